#ifndef CDFOREST_WEIGHTED_ECDF_HPP
#define CDFOREST_WEIGHTED_ECDF_HPP

#include <span>
#include <vector>

namespace cdforest {

// Right-continuous step evaluation of a weighted ECDF given its sorted
// response values and cumulative weights: the cumulative weight of the
// last response <= y, 0 below the smallest response.
double step_cdf_at(std::span<const double> sorted_responses,
                   std::span<const double> cum_weights, double y);

// Plug-in quantile: the smallest stored response whose cumulative weight
// reaches alpha. Falls back to the largest response if the total mass
// stays below alpha (possible only for defective weight vectors).
double step_quantile(std::span<const double> sorted_responses,
                     std::span<const double> cum_weights, double alpha);

// Weighted conditional empirical CDF: responses in nondecreasing order
// (ties preserved) paired with the cumulative sums of their weights.
// Value object; safe to copy across threads.
class WeightedEcdf {
public:
    WeightedEcdf(std::vector<double> sorted_responses,
                 std::vector<double> cum_weights);

    // Builds from unsorted (response, weight) pairs; sorting is stable in
    // the original index order so tied responses keep adjacent steps.
    static WeightedEcdf from_pairs(std::span<const double> responses,
                                   std::span<const double> weights);

    double cdf_at(double y) const;
    double quantile(double alpha) const;

    const std::vector<double>& sorted_responses() const { return sorted_responses_; }
    const std::vector<double>& cum_weights() const { return cum_weights_; }
    std::size_t size() const { return sorted_responses_.size(); }

    // Final cumulative weight; 1 within 1e-9 unless an empty-cell guard
    // fired upstream, which is deliberately left visible here.
    double total_mass() const { return cum_weights_.back(); }

private:
    std::vector<double> sorted_responses_;
    std::vector<double> cum_weights_;
};

}  // namespace cdforest

#endif  // CDFOREST_WEIGHTED_ECDF_HPP
