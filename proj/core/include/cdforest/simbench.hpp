#ifndef CDFOREST_SIMBENCH_HPP
#define CDFOREST_SIMBENCH_HPP

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cdforest/forest.hpp"
#include "cdforest/toy_model.hpp"
#include "cdforest/weighted_ecdf.hpp"

namespace cdforest {

// Monte-Carlo study configuration: p query points are drawn once from the
// covariate law, then for each of s replications a fresh training sample
// is drawn, a forest is fitted and every query point is evaluated.
// Everything is keyed off `seed` through fixed substreams, so reruns and
// any thread count reproduce identical numbers.
struct BenchmarkConfig {
    std::size_t n = 10000;                           // training size
    std::size_t n_trees = 500;                       // k
    std::size_t max_features = 0;                    // 0 -> all features
    std::optional<std::size_t> min_samples_leaf;     // empty -> default rule
    std::size_t replications = 1;                    // s
    std::size_t query_points = 1;                    // p
    std::vector<double> alphas = {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
    bool scheme_original = true;
    bool scheme_bootstrap = true;
    ToyModelConfig toy{};                            // toy.seed is ignored here
    std::uint64_t seed = 0;
    unsigned threads = 0;                            // 0 -> hardware

    void check() const;

    std::size_t resolved_max_features() const {
        return max_features == 0 ? ToyModelConfig::dimension : max_features;
    }
    std::size_t resolved_min_samples_leaf() const {
        return min_samples_leaf ? *min_samples_leaf : default_min_samples_leaf(n);
    }
};

// Kolmogorov-Smirnov distance between the step estimate and the true
// conditional CDF at x, computed exactly at the jump points (both the
// jump value and the left limit; the continuous CDF attains the supremum
// there).
double ks_distance(const WeightedEcdf& ecdf, std::span<const double> x, double sigma);
double ks_distance_steps(std::span<const double> sorted_responses,
                         std::span<const double> cum_weights,
                         std::span<const double> x, double sigma);

struct QuantileStats {
    double rmse = 0.0;
    double bias = 0.0;
    double variance = 0.0;
};

struct BenchmarkResult {
    std::vector<std::array<double, 3>> query_xs;  // the p evaluation points
    std::vector<double> alphas;

    // KS part (benchmark-cdf): per-point replication means and the overall
    // averages; vectors are empty for schemes that were not requested.
    bool has_cdf = false;
    std::vector<double> ks_original;   // size p
    std::vector<double> ks_bootstrap;  // size p
    double m_ks_original = 0.0;
    double m_ks_bootstrap = 0.0;

    // Quantile part (benchmark-quantile): cell (point, alpha) lives at
    // index point * alphas.size() + alpha_index.
    bool has_quantile = false;
    std::vector<QuantileStats> q_original;    // size p * alphas
    std::vector<QuantileStats> q_bootstrap;   // size p * alphas
    std::vector<QuantileStats> mq_original;   // size alphas (M_ averages)
    std::vector<QuantileStats> mq_bootstrap;  // size alphas
};

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Combined runner; the two spec'd entry points below are restrictions.
BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, bool with_cdf,
                              bool with_quantile, const ProgressFn& progress = {});

// Averaged Kolmogorov-Smirnov study: per-point mean KS over replications
// plus M_KS per scheme.
BenchmarkResult run_cdf_benchmark(const BenchmarkConfig& cfg,
                                  const ProgressFn& progress = {});

// Averaged quantile-error study: per-point RMSE / Bias / Variance per
// alpha and scheme, with M_RMSE / M_Bias / M_Variance aggregates.
BenchmarkResult run_quantile_benchmark(const BenchmarkConfig& cfg,
                                       const ProgressFn& progress = {});

// CSV and manifest emission. Columns are fixed and all numbers use
// shortest round-trip formatting, so identical runs give identical bytes.
void write_cdf_points_csv(const BenchmarkResult& result, const std::string& path);
void write_cdf_aggregate_csv(const BenchmarkResult& result, const std::string& path);
void write_quantile_points_csv(const BenchmarkResult& result, const std::string& path);
void write_quantile_aggregate_csv(const BenchmarkResult& result, const std::string& path);

// JSON run manifest: full configuration, code version and the emitted
// files. No timestamps, by design.
void write_manifest(const BenchmarkConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs, const std::string& path);

}  // namespace cdforest

#endif  // CDFOREST_SIMBENCH_HPP
