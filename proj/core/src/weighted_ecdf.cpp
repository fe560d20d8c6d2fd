#include "cdforest/weighted_ecdf.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace cdforest {

double step_cdf_at(std::span<const double> sorted_responses,
                   std::span<const double> cum_weights, double y) {
    if (std::isnan(y)) throw std::invalid_argument("cdf_at: y is NaN");
    const auto it =
        std::upper_bound(sorted_responses.begin(), sorted_responses.end(), y);
    if (it == sorted_responses.begin()) return 0.0;
    const auto idx = static_cast<std::size_t>(it - sorted_responses.begin()) - 1;
    return cum_weights[idx];
}

double step_quantile(std::span<const double> sorted_responses,
                     std::span<const double> cum_weights, double alpha) {
    if (!(alpha > 0.0) || !(alpha < 1.0)) {
        throw std::domain_error("quantile: alpha must lie in (0, 1)");
    }
    const auto it = std::lower_bound(cum_weights.begin(), cum_weights.end(), alpha);
    if (it == cum_weights.end()) return sorted_responses.back();
    return sorted_responses[static_cast<std::size_t>(it - cum_weights.begin())];
}

WeightedEcdf::WeightedEcdf(std::vector<double> sorted_responses,
                           std::vector<double> cum_weights)
    : sorted_responses_(std::move(sorted_responses)),
      cum_weights_(std::move(cum_weights)) {
    if (sorted_responses_.empty()) {
        throw std::invalid_argument("WeightedEcdf: at least one response is required");
    }
    if (sorted_responses_.size() != cum_weights_.size()) {
        throw std::invalid_argument("WeightedEcdf: responses and weights differ in length");
    }
}

WeightedEcdf WeightedEcdf::from_pairs(std::span<const double> responses,
                                      std::span<const double> weights) {
    if (responses.size() != weights.size()) {
        throw std::invalid_argument("WeightedEcdf: responses and weights differ in length");
    }
    std::vector<std::uint32_t> order(responses.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&responses](std::uint32_t a, std::uint32_t b) {
                  if (responses[a] != responses[b]) return responses[a] < responses[b];
                  return a < b;
              });
    std::vector<double> sorted(responses.size());
    std::vector<double> cum(responses.size());
    double running = 0.0;
    for (std::size_t i = 0; i < order.size(); ++i) {
        sorted[i] = responses[order[i]];
        running += weights[order[i]];
        cum[i] = running;
    }
    return WeightedEcdf(std::move(sorted), std::move(cum));
}

double WeightedEcdf::cdf_at(double y) const {
    return step_cdf_at(sorted_responses_, cum_weights_, y);
}

double WeightedEcdf::quantile(double alpha) const {
    return step_quantile(sorted_responses_, cum_weights_, alpha);
}

}  // namespace cdforest
