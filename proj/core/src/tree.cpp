#include "cdforest/tree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cdforest {

FeatureOrder FeatureOrder::build(const Dataset& ds) {
    const std::size_t n = ds.n_rows();
    const std::size_t d = ds.n_features();
    FeatureOrder fo;
    fo.n_ = n;
    fo.order_.resize(n * d);
    for (std::size_t f = 0; f < d; ++f) {
        std::uint32_t* col = fo.order_.data() + f * n;
        for (std::size_t i = 0; i < n; ++i) col[i] = static_cast<std::uint32_t>(i);
        std::sort(col, col + n, [&ds, f](std::uint32_t a, std::uint32_t b) {
            const double va = ds.feature(a, f);
            const double vb = ds.feature(b, f);
            if (va != vb) return va < vb;
            return a < b;  // total order keeps the sort deterministic
        });
    }
    return fo;
}

BootstrapCounts draw_bootstrap(std::size_t n, Rng& rng) {
    if (n == 0) throw std::invalid_argument("draw_bootstrap: n must be >= 1");
    BootstrapCounts bc;
    bc.counts.assign(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        ++bc.counts[static_cast<std::size_t>(rng.uniform_below(n))];
    }
    return bc;
}

namespace {

struct ScoredSplit {
    double criterion;
    double threshold;
};

// Best admissible cut along one feature. `ids` are the node's
// bootstrap-represented members sorted ascending by the feature value;
// responses enter centered on the node mean so the criterion is stable
// under large response offsets. Thresholds are midpoints between
// consecutive distinct values; a cut is admissible when both sides keep at
// least `min_count` bootstrap observations.
std::optional<ScoredSplit> scan_feature(const Dataset& ds, std::size_t feature,
                                        std::span<const std::uint32_t> ids,
                                        const std::vector<std::uint32_t>& counts,
                                        double node_mean, std::uint64_t total_w,
                                        double total_zsum, double total_zsumsq,
                                        std::uint64_t min_count) {
    std::optional<ScoredSplit> best;
    std::uint64_t lw = 0;
    double lsum = 0.0;
    double lsumsq = 0.0;
    const std::size_t m = ids.size();
    std::size_t i = 0;
    while (i < m) {
        const double v = ds.feature(ids[i], feature);
        do {
            const std::uint32_t id = ids[i];
            const double w = static_cast<double>(counts[id]);
            const double z = ds.response(id) - node_mean;
            lw += counts[id];
            lsum += w * z;
            lsumsq += w * z * z;
            ++i;
        } while (i < m && ds.feature(ids[i], feature) == v);
        if (i == m) break;
        const std::uint64_t rw = total_w - lw;
        if (lw < min_count || rw < min_count) continue;
        const double rsum = total_zsum - lsum;
        const double rsumsq = total_zsumsq - lsumsq;
        const double crit =
            (lsumsq - lsum * lsum / static_cast<double>(lw)) +
            (rsumsq - rsum * rsum / static_cast<double>(rw));
        const double vnext = ds.feature(ids[i], feature);
        double threshold = v + 0.5 * (vnext - v);
        if (threshold <= v) threshold = vnext;  // adjacent doubles
        if (!best || crit < best->criterion) best = ScoredSplit{crit, threshold};
    }
    return best;
}

struct NodeStats {
    std::uint64_t weight = 0;
    double mean = 0.0;
    double zsum = 0.0;
    double zsumsq = 0.0;
    bool constant_response = true;
};

NodeStats node_stats(const Dataset& ds, std::span<const std::uint32_t> ids,
                     const std::vector<std::uint32_t>& counts) {
    NodeStats s;
    double wsum_y = 0.0;
    double ymin = std::numeric_limits<double>::infinity();
    double ymax = -std::numeric_limits<double>::infinity();
    for (const std::uint32_t id : ids) {
        const double w = static_cast<double>(counts[id]);
        const double y = ds.response(id);
        s.weight += counts[id];
        wsum_y += w * y;
        ymin = std::min(ymin, y);
        ymax = std::max(ymax, y);
    }
    if (s.weight == 0) return s;
    s.mean = wsum_y / static_cast<double>(s.weight);
    s.constant_response = (ymin == ymax);
    for (const std::uint32_t id : ids) {
        const double w = static_cast<double>(counts[id]);
        const double z = ds.response(id) - s.mean;
        s.zsum += w * z;
        s.zsumsq += w * z * z;
    }
    return s;
}

std::size_t route(const std::vector<TreeNode>& nodes, const Dataset& ds,
                  std::size_t row) {
    std::size_t cur = 0;
    while (!nodes[cur].is_leaf()) {
        const TreeNode& nd = nodes[cur];
        cur = ds.feature(row, static_cast<std::size_t>(nd.feature)) < nd.threshold
                  ? static_cast<std::size_t>(nd.left)
                  : static_cast<std::size_t>(nd.right);
    }
    return cur;
}

}  // namespace

std::optional<Split> best_split(const Dataset& ds,
                                std::span<const std::uint32_t> node_members,
                                const BootstrapCounts& node_counts,
                                std::span<const std::size_t> candidate_features) {
    const std::size_t d = ds.n_features();
    for (const std::size_t f : candidate_features) {
        if (f >= d) throw std::invalid_argument("best_split: feature index out of range");
    }

    std::vector<std::uint32_t> rep;
    rep.reserve(node_members.size());
    for (const std::uint32_t id : node_members) {
        if (node_counts[id] >= 1) rep.push_back(id);
    }
    if (rep.size() < 2) return std::nullopt;

    const NodeStats stats = node_stats(ds, rep, node_counts.counts);
    if (stats.constant_response) return std::nullopt;

    std::vector<std::size_t> feats(candidate_features.begin(), candidate_features.end());
    std::sort(feats.begin(), feats.end());
    feats.erase(std::unique(feats.begin(), feats.end()), feats.end());

    std::optional<Split> best;
    double best_crit = 0.0;
    std::vector<std::uint32_t> sorted(rep);
    for (const std::size_t f : feats) {
        std::sort(sorted.begin(), sorted.end(), [&ds, f](std::uint32_t a, std::uint32_t b) {
            const double va = ds.feature(a, f);
            const double vb = ds.feature(b, f);
            if (va != vb) return va < vb;
            return a < b;
        });
        const auto cand = scan_feature(ds, f, sorted, node_counts.counts, stats.mean,
                                       stats.weight, stats.zsum, stats.zsumsq, 1);
        if (cand && (!best || cand->criterion < best_crit)) {
            best = Split{f, cand->threshold};
            best_crit = cand->criterion;
        }
    }
    return best;
}

Tree grow_tree(const Dataset& ds, const FeatureOrder& order,
               const TreeHyperparameters& hp, std::uint64_t seed) {
    const std::size_t n = ds.n_rows();
    const std::size_t d = ds.n_features();
    if (n == 0 || d == 0) throw std::invalid_argument("grow_tree: empty dataset");
    if (hp.max_features < 1 || hp.max_features > d) {
        throw std::invalid_argument("grow_tree: max_features must be in [1, d]");
    }
    if (hp.min_samples_leaf < 1 || hp.min_samples_leaf > n) {
        throw std::invalid_argument("grow_tree: min_samples_leaf must be in [1, n]");
    }

    Rng rng(seed);
    Tree tree;
    tree.seed_ = seed;
    tree.dimension_ = d;
    tree.bootstrap_ = draw_bootstrap(n, rng);
    const std::vector<std::uint32_t>& counts = tree.bootstrap_.counts;

    // Bootstrap-represented members of each feature column, presorted.
    std::size_t m = 0;
    for (std::size_t j = 0; j < n; ++j) m += counts[j] > 0 ? 1 : 0;
    std::vector<std::uint32_t> idx(m * d);
    for (std::size_t f = 0; f < d; ++f) {
        std::size_t k = f * m;
        for (const std::uint32_t id : order.column(f)) {
            if (counts[id] > 0) idx[k++] = id;
        }
    }

    const std::uint64_t min_leaf = hp.min_samples_leaf;
    std::vector<std::uint32_t> tmp(m);
    std::vector<std::uint8_t> go_left(n, 0);
    std::vector<std::size_t> feat_scratch(d);

    struct Job {
        std::uint32_t lo, hi;
        std::uint32_t node;
        std::uint64_t weight;
    };
    std::vector<Job> stack;
    tree.nodes_.push_back(TreeNode{});
    stack.push_back({0, static_cast<std::uint32_t>(m), 0, static_cast<std::uint64_t>(n)});

    while (!stack.empty()) {
        const Job job = stack.back();
        stack.pop_back();
        auto segment = [&](std::size_t f) {
            return std::span<const std::uint32_t>(idx.data() + f * m + job.lo,
                                                  job.hi - job.lo);
        };

        auto make_leaf = [&] {
            tree.nodes_[job.node].bootstrap_total = static_cast<std::uint32_t>(job.weight);
        };

        if (job.weight < 2 * min_leaf) {
            make_leaf();
            continue;
        }
        const NodeStats stats = node_stats(ds, segment(0), counts);
        if (stats.constant_response) {
            make_leaf();
            continue;
        }

        // Fresh feature draw for this node, without replacement.
        for (std::size_t i = 0; i < d; ++i) feat_scratch[i] = i;
        for (std::size_t i = 0; i < hp.max_features; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng.uniform_below(d - i));
            std::swap(feat_scratch[i], feat_scratch[j]);
        }
        std::sort(feat_scratch.begin(), feat_scratch.begin() + hp.max_features);

        std::optional<ScoredSplit> best;
        std::size_t best_feature = 0;
        for (std::size_t c = 0; c < hp.max_features; ++c) {
            const std::size_t f = feat_scratch[c];
            const auto cand = scan_feature(ds, f, segment(f), counts, stats.mean,
                                           stats.weight, stats.zsum, stats.zsumsq,
                                           min_leaf);
            if (cand && (!best || cand->criterion < best->criterion)) {
                best = cand;
                best_feature = f;
            }
        }
        if (!best) {
            make_leaf();
            continue;
        }

        const double threshold = best->threshold;
        std::uint64_t left_w = 0;
        for (const std::uint32_t id : segment(best_feature)) {
            const bool left = ds.feature(id, best_feature) < threshold;
            go_left[id] = left ? 1 : 0;
            if (left) left_w += counts[id];
        }

        // Stable partition of every feature column keeps each side sorted.
        std::uint32_t left_size = 0;
        for (std::size_t f = 0; f < d; ++f) {
            std::uint32_t* seg = idx.data() + f * m + job.lo;
            const std::uint32_t len = job.hi - job.lo;
            std::uint32_t nl = 0, nr = 0;
            for (std::uint32_t i = 0; i < len; ++i) {
                const std::uint32_t id = seg[i];
                if (go_left[id]) {
                    seg[nl++] = id;
                } else {
                    tmp[nr++] = id;
                }
            }
            std::copy(tmp.begin(), tmp.begin() + nr, seg + nl);
            left_size = nl;
        }

        const auto left_node = static_cast<std::uint32_t>(tree.nodes_.size());
        const auto right_node = left_node + 1;
        TreeNode& nd = tree.nodes_[job.node];
        nd.feature = static_cast<std::int32_t>(best_feature);
        nd.threshold = threshold;
        nd.left = static_cast<std::int32_t>(left_node);
        nd.right = static_cast<std::int32_t>(right_node);
        tree.nodes_.push_back(TreeNode{});
        tree.nodes_.push_back(TreeNode{});

        stack.push_back({job.lo + left_size, job.hi, right_node, job.weight - left_w});
        stack.push_back({job.lo, job.lo + left_size, left_node, left_w});
    }

    // Route the full original sample into leaves; members are ascending by
    // construction of the counting pass.
    std::vector<std::uint32_t> leaf_of(n);
    std::vector<std::uint32_t> leaf_sizes(tree.nodes_.size(), 0);
    for (std::size_t j = 0; j < n; ++j) {
        const std::size_t leaf = route(tree.nodes_, ds, j);
        leaf_of[j] = static_cast<std::uint32_t>(leaf);
        ++leaf_sizes[leaf];
    }
    std::uint32_t offset = 0;
    for (std::size_t i = 0; i < tree.nodes_.size(); ++i) {
        if (!tree.nodes_[i].is_leaf()) continue;
        tree.nodes_[i].members_begin = offset;
        tree.nodes_[i].members_end = offset;
        offset += leaf_sizes[i];
    }
    tree.member_indices_.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        TreeNode& leaf = tree.nodes_[leaf_of[j]];
        tree.member_indices_[leaf.members_end++] = static_cast<std::uint32_t>(j);
    }
    return tree;
}

Tree grow_tree(const Dataset& ds, const TreeHyperparameters& hp,
               std::uint64_t seed) {
    return grow_tree(ds, FeatureOrder::build(ds), hp, seed);
}

Tree Tree::from_parts(std::vector<TreeNode> nodes,
                      std::vector<std::uint32_t> member_indices,
                      BootstrapCounts bootstrap, std::uint64_t seed,
                      std::size_t dimension) {
    const std::size_t n = bootstrap.size();
    if (nodes.empty()) throw std::invalid_argument("tree: no nodes");
    if (n == 0 || dimension == 0) throw std::invalid_argument("tree: empty shape");
    if (member_indices.size() != n) {
        throw std::invalid_argument("tree: member table must list every observation");
    }
    for (const std::uint32_t id : member_indices) {
        if (id >= n) throw std::invalid_argument("tree: member index out of range");
    }
    const std::size_t n_nodes = nodes.size();
    for (std::size_t i = 0; i < n_nodes; ++i) {
        const TreeNode& nd = nodes[i];
        if (nd.is_leaf()) {
            if (nd.right >= 0 || nd.feature >= 0 || nd.members_begin > nd.members_end ||
                nd.members_end > n) {
                throw std::invalid_argument("tree: bad leaf node");
            }
        } else {
            const auto l = static_cast<std::size_t>(nd.left);
            const auto r = static_cast<std::size_t>(nd.right);
            if (l <= i || r <= i || l >= n_nodes || r >= n_nodes || nd.feature < 0 ||
                static_cast<std::size_t>(nd.feature) >= dimension ||
                !std::isfinite(nd.threshold)) {
                throw std::invalid_argument("tree: bad internal node");
            }
        }
    }
    std::uint32_t offset = 0;
    for (const TreeNode& nd : nodes) {
        if (!nd.is_leaf()) continue;
        if (nd.members_begin != offset) {
            throw std::invalid_argument("tree: leaf member ranges do not tile");
        }
        offset = nd.members_end;
    }
    if (offset != n) {
        throw std::invalid_argument("tree: leaf member ranges do not cover the sample");
    }

    Tree tree;
    tree.nodes_ = std::move(nodes);
    tree.member_indices_ = std::move(member_indices);
    tree.bootstrap_ = std::move(bootstrap);
    tree.seed_ = seed;
    tree.dimension_ = dimension;
    return tree;
}

std::size_t Tree::leaf_index(std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw std::invalid_argument("leaf_index: query has dimension " +
                                    std::to_string(x.size()) + ", tree expects " +
                                    std::to_string(dimension_));
    }
    for (const double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("leaf_index: query has a non-finite coordinate");
        }
    }
    std::size_t cur = 0;
    while (!nodes_[cur].is_leaf()) {
        const TreeNode& nd = nodes_[cur];
        cur = x[static_cast<std::size_t>(nd.feature)] < nd.threshold
                  ? static_cast<std::size_t>(nd.left)
                  : static_cast<std::size_t>(nd.right);
    }
    return cur;
}

std::size_t Tree::n_leaves() const {
    std::size_t count = 0;
    for (const TreeNode& nd : nodes_) count += nd.is_leaf() ? 1 : 0;
    return count;
}

}  // namespace cdforest
