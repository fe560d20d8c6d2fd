#include "cdforest/dataset.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace cdforest {

Dataset::Dataset(std::vector<double> features, std::vector<double> responses,
                 std::size_t n_features)
    : features_(std::move(features)),
      responses_(std::move(responses)),
      n_features_(n_features) {
    if (n_features_ > 0 && features_.size() % n_features_ != 0) {
        throw std::invalid_argument(
            "dataset: feature buffer size is not a multiple of the feature count");
    }
}

std::vector<std::string> validate(const Dataset& ds) {
    std::vector<std::string> violations;
    const std::size_t n = ds.n_rows();
    const std::size_t d = ds.n_features();

    if (n == 0) violations.push_back("dataset is empty (n = 0)");
    if (d == 0) violations.push_back("dataset has no features (d = 0)");
    if (d > 0 && ds.feature_matrix().size() != n * d) {
        violations.push_back("length mismatch: " +
                             std::to_string(ds.feature_matrix().size() / d) +
                             " feature rows vs " + std::to_string(n) + " responses");
    }

    const std::size_t feature_rows = d > 0 ? ds.feature_matrix().size() / d : 0;
    for (std::size_t i = 0; i < feature_rows; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            if (!std::isfinite(ds.feature_matrix()[i * d + j])) {
                violations.push_back("non-finite feature at row " + std::to_string(i) +
                                     ", column " + std::to_string(j));
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(ds.response(i))) {
            violations.push_back("non-finite response at row " + std::to_string(i));
        }
    }
    return violations;
}

}  // namespace cdforest
