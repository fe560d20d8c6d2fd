#ifndef CDFOREST_TREE_HPP
#define CDFOREST_TREE_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "cdforest/dataset.hpp"
#include "cdforest/rng.hpp"

namespace cdforest {

// Multiplicities of a bootstrap draw: counts[j] is the number of times
// observation j was drawn. Entries sum to the sample size.
struct BootstrapCounts {
    std::vector<std::uint32_t> counts;

    std::size_t size() const { return counts.size(); }
    std::uint32_t operator[](std::size_t j) const { return counts[j]; }
};

// Axis-aligned cut. Routing rule is fixed: x[feature] < threshold goes
// left, x[feature] >= threshold goes right.
struct Split {
    std::size_t feature = 0;
    double threshold = 0.0;
};

struct TreeHyperparameters {
    std::size_t max_features = 0;      // features drawn per node, in [1, d]
    std::size_t min_samples_leaf = 1;  // minimum bootstrap occupancy per leaf
};

// Flattened tree node. Leaves carry their occupancy record: the range of
// original-sample member indices (all j whose feature vector falls in the
// cell, including those never drawn by the bootstrap) and the total
// bootstrap count of the cell.
struct TreeNode {
    std::int32_t left = -1;
    std::int32_t right = -1;
    std::int32_t feature = -1;
    double threshold = 0.0;
    std::uint32_t members_begin = 0;
    std::uint32_t members_end = 0;
    std::uint32_t bootstrap_total = 0;  // N^b of the leaf

    bool is_leaf() const { return left < 0; }
    std::uint32_t original_count() const { return members_end - members_begin; }

    bool operator==(const TreeNode&) const = default;
};

// Sorted-order of every feature column; shared read-only by all trees
// grown on the same dataset.
class FeatureOrder {
public:
    static FeatureOrder build(const Dataset& ds);

    std::span<const std::uint32_t> column(std::size_t f) const {
        return {order_.data() + f * n_, n_};
    }

private:
    std::vector<std::uint32_t> order_;  // d blocks of n indices
    std::size_t n_ = 0;
};

// A grown CART regression tree. Immutable once built; routing queries are
// safe under unlimited concurrent callers.
class Tree {
public:
    const TreeNode& node(std::size_t i) const { return nodes_[i]; }
    const std::vector<TreeNode>& nodes() const { return nodes_; }
    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t dimension() const { return dimension_; }
    std::size_t n_rows() const { return bootstrap_.size(); }
    std::uint64_t seed() const { return seed_; }
    const BootstrapCounts& bootstrap() const { return bootstrap_; }

    // Original-sample indices occupying a leaf, ascending.
    std::span<const std::uint32_t> members(const TreeNode& leaf) const {
        return {member_indices_.data() + leaf.members_begin,
                leaf.members_end - leaf.members_begin};
    }
    const std::vector<std::uint32_t>& member_indices() const {
        return member_indices_;
    }

    // Index of the unique leaf whose cell contains x.
    std::size_t leaf_index(std::span<const double> x) const;
    const TreeNode& leaf_for(std::span<const double> x) const {
        return nodes_[leaf_index(x)];
    }

    std::size_t n_leaves() const;

    // Reassembles a tree from raw arrays (model loading, synthetic
    // fixtures), checking structural soundness: child indices point
    // forward, features are in range, thresholds are finite, and leaf
    // member ranges tile [0, n). Occupancy totals are taken as stored;
    // an inconsistent total is the deserialized-corruption case the
    // weight computations guard against.
    static Tree from_parts(std::vector<TreeNode> nodes,
                           std::vector<std::uint32_t> member_indices,
                           BootstrapCounts bootstrap, std::uint64_t seed,
                           std::size_t dimension);

private:
    friend Tree grow_tree(const Dataset&, const FeatureOrder&,
                          const TreeHyperparameters&, std::uint64_t);

    std::vector<TreeNode> nodes_;
    std::vector<std::uint32_t> member_indices_;
    BootstrapCounts bootstrap_;
    std::uint64_t seed_ = 0;
    std::size_t dimension_ = 0;
};

// n draws with replacement from n observations, as multiplicities.
BootstrapCounts draw_bootstrap(std::size_t n, Rng& rng);

// Cut minimizing the bootstrap-count-weighted sum of squared deviations of
// the response from the child means, over the candidate features and all
// midpoint thresholds between consecutive distinct represented values.
// Members with a zero bootstrap count are ignored. Returns nullopt when no
// cut yields two bootstrap-occupied children or all responses are equal.
// Ties resolve to the lowest feature index, then the smallest threshold.
std::optional<Split> best_split(const Dataset& ds,
                                std::span<const std::uint32_t> node_members,
                                const BootstrapCounts& node_counts,
                                std::span<const std::size_t> candidate_features);

// Grows a tree on a fresh bootstrap sample: every node draws
// hp.max_features features without replacement and takes the best
// admissible cut; a cut is admissible only if both children keep at least
// hp.min_samples_leaf bootstrap observations. After growth every original
// observation is routed into its leaf, so leaves record occupancy for the
// full training sample. Pure function of (ds, hp, seed).
Tree grow_tree(const Dataset& ds, const FeatureOrder& order,
               const TreeHyperparameters& hp, std::uint64_t seed);
Tree grow_tree(const Dataset& ds, const TreeHyperparameters& hp,
               std::uint64_t seed);

}  // namespace cdforest

#endif  // CDFOREST_TREE_HPP
