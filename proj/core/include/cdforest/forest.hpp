#ifndef CDFOREST_FOREST_HPP
#define CDFOREST_FOREST_HPP

#include <cstdint>
#include <span>
#include <vector>

#include "cdforest/dataset.hpp"
#include "cdforest/tree.hpp"
#include "cdforest/weighted_ecdf.hpp"

namespace cdforest {

struct ForestHyperparameters {
    std::size_t n_trees = 1;
    std::size_t max_features = 1;
    std::size_t min_samples_leaf = 1;
    std::uint64_t seed = 0;
};

// Leaf-size rule used when none is given: floor(sqrt(n) * ln(n)^1.5 / 250),
// clamped to at least 1.
std::size_t default_min_samples_leaf(std::size_t n);

// Which occupancy record backs the per-query weights: the bootstrap
// multiplicities of each tree's own sample, or the original training
// sample routed through the finished tree.
enum class WeightScheme { kBootstrap, kOriginal };

const char* to_string(WeightScheme scheme);

// Per-training-observation weights for one query point. Entries are
// nonnegative and sum to 1 (up to rounding) for any forest produced by
// fit; the sum is left untouched if an empty-cell guard fired.
struct WeightVector {
    std::vector<double> values;

    double sum() const;
};

// An ensemble of CART trees grown on bootstrap samples of one dataset,
// carrying everything needed to answer conditional distribution queries:
// tree structures, occupancy records, and the training responses.
// Immutable after fit; all query methods are safe under unlimited
// concurrent callers.
class Forest {
public:
    // Grows hp.n_trees trees, each on the substream (hp.seed, tree index),
    // so the result does not depend on the thread count.
    static Forest fit(const Dataset& ds, const ForestHyperparameters& hp,
                      unsigned threads = 1);

    // Reassembles a forest from parts (model loading, synthetic fixtures).
    static Forest from_parts(std::vector<Tree> trees, ForestHyperparameters hp,
                             std::vector<double> responses);

    const ForestHyperparameters& hyperparameters() const { return hp_; }
    std::size_t n_training() const { return responses_.size(); }
    std::size_t dimension() const { return dimension_; }
    std::size_t n_trees() const { return trees_.size(); }
    const std::vector<Tree>& trees() const { return trees_; }
    const std::vector<double>& responses() const { return responses_; }

    // Training responses in ECDF order (nondecreasing, ties in original
    // index order); cum_weights of conditional_cdf line up with these.
    const std::vector<double>& sorted_responses() const { return sorted_responses_; }

    WeightVector weights_bootstrap(std::span<const double> x) const;
    WeightVector weights_original(std::span<const double> x) const;
    WeightVector weights(std::span<const double> x, WeightScheme scheme) const;

    double predict_mean(std::span<const double> x, WeightScheme scheme) const;

    WeightedEcdf conditional_cdf(std::span<const double> x, WeightScheme scheme) const;

    // Allocation-free variant for hot loops: fills `cum` (resized to n)
    // with the cumulative weights matching sorted_responses().
    void conditional_cdf_into(std::span<const double> x, WeightScheme scheme,
                              std::vector<double>& cum) const;

private:
    Forest() = default;

    void check_query(std::span<const double> x) const;
    void accumulate_weights(std::span<const double> x, WeightScheme scheme,
                            double* out, const std::uint32_t* remap) const;
    void index_responses();

    std::vector<Tree> trees_;
    ForestHyperparameters hp_{};
    std::vector<double> responses_;
    std::size_t dimension_ = 0;

    std::vector<std::uint32_t> response_order_;  // ECDF order -> original index
    std::vector<std::uint32_t> rank_of_;         // original index -> ECDF order
    std::vector<double> sorted_responses_;
};

}  // namespace cdforest

#endif  // CDFOREST_FOREST_HPP
