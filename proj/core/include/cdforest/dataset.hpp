#ifndef CDFOREST_DATASET_HPP
#define CDFOREST_DATASET_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace cdforest {

// Training data: n observations of a d-dimensional feature vector and a
// scalar response. Immutable after construction; safe to share read-only
// across concurrent tree builders.
//
// Construction does not reject bad values; validate() reports violations
// so callers can surface them with locations.
class Dataset {
public:
    Dataset() = default;
    Dataset(std::vector<double> features, std::vector<double> responses,
            std::size_t n_features);

    std::size_t n_rows() const { return responses_.size(); }
    std::size_t n_features() const { return n_features_; }

    double feature(std::size_t row, std::size_t col) const {
        return features_[row * n_features_ + col];
    }
    std::span<const double> row(std::size_t r) const {
        return {features_.data() + r * n_features_, n_features_};
    }
    double response(std::size_t row) const { return responses_[row]; }
    const std::vector<double>& responses() const { return responses_; }
    const std::vector<double>& feature_matrix() const { return features_; }

    bool operator==(const Dataset& other) const = default;

private:
    std::vector<double> features_;   // row-major, n_rows x n_features
    std::vector<double> responses_;  // length n_rows
    std::size_t n_features_ = 0;
};

// Every invariant violation found in `ds`, each naming its location.
// Empty means the dataset is valid.
std::vector<std::string> validate(const Dataset& ds);

}  // namespace cdforest

#endif  // CDFOREST_DATASET_HPP
