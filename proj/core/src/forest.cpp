#include "cdforest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cdforest/parallel.hpp"

namespace cdforest {

namespace {
constexpr std::uint64_t kTreeStreamTag = 0x74726565;  // per-tree substreams
}

std::size_t default_min_samples_leaf(std::size_t n) {
    if (n <= 1) return 1;
    const double dn = static_cast<double>(n);
    const double value = std::sqrt(dn) * std::pow(std::log(dn), 1.5) / 250.0;
    const auto floored = static_cast<std::size_t>(value);
    return std::max<std::size_t>(floored, 1);
}

const char* to_string(WeightScheme scheme) {
    return scheme == WeightScheme::kBootstrap ? "bootstrap" : "original";
}

double WeightVector::sum() const {
    double total = 0.0;
    for (const double v : values) total += v;
    return total;
}

Forest Forest::fit(const Dataset& ds, const ForestHyperparameters& hp,
                   unsigned threads) {
    const std::size_t n = ds.n_rows();
    const std::size_t d = ds.n_features();
    if (hp.n_trees < 1) throw std::invalid_argument("fit: n_trees must be >= 1");
    if (hp.max_features < 1 || hp.max_features > d) {
        throw std::invalid_argument("fit: max_features must be in [1, d]");
    }
    if (hp.min_samples_leaf < 1 || hp.min_samples_leaf > n) {
        throw std::invalid_argument("fit: min_samples_leaf must be in [1, n]");
    }
    const std::vector<std::string> violations = validate(ds);
    if (!violations.empty()) {
        throw std::invalid_argument("fit: invalid dataset: " + violations.front());
    }

    Forest forest;
    forest.hp_ = hp;
    forest.dimension_ = d;
    forest.responses_ = ds.responses();
    forest.trees_.resize(hp.n_trees);

    const FeatureOrder order = FeatureOrder::build(ds);
    const TreeHyperparameters tree_hp{hp.max_features, hp.min_samples_leaf};
    parallel_for(hp.n_trees, threads, [&](std::size_t ell) {
        forest.trees_[ell] =
            grow_tree(ds, order, tree_hp, Rng::mix(hp.seed, kTreeStreamTag, ell));
    });

    forest.index_responses();
    return forest;
}

Forest Forest::from_parts(std::vector<Tree> trees, ForestHyperparameters hp,
                          std::vector<double> responses) {
    if (trees.empty()) throw std::invalid_argument("from_parts: no trees");
    if (trees.size() != hp.n_trees) {
        throw std::invalid_argument("from_parts: tree count does not match n_trees");
    }
    const std::size_t n = responses.size();
    const std::size_t d = trees.front().dimension();
    for (const Tree& t : trees) {
        if (t.dimension() != d || t.n_rows() != n) {
            throw std::invalid_argument("from_parts: trees disagree on dataset shape");
        }
    }
    Forest forest;
    forest.trees_ = std::move(trees);
    forest.hp_ = hp;
    forest.responses_ = std::move(responses);
    forest.dimension_ = d;
    forest.index_responses();
    return forest;
}

void Forest::index_responses() {
    const std::size_t n = responses_.size();
    response_order_.resize(n);
    std::iota(response_order_.begin(), response_order_.end(), 0);
    std::sort(response_order_.begin(), response_order_.end(),
              [this](std::uint32_t a, std::uint32_t b) {
                  if (responses_[a] != responses_[b]) return responses_[a] < responses_[b];
                  return a < b;
              });
    rank_of_.resize(n);
    sorted_responses_.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        rank_of_[response_order_[i]] = static_cast<std::uint32_t>(i);
        sorted_responses_[i] = responses_[response_order_[i]];
    }
}

void Forest::check_query(std::span<const double> x) const {
    if (x.size() != dimension_) {
        throw std::invalid_argument("query has dimension " + std::to_string(x.size()) +
                                    ", forest expects " + std::to_string(dimension_));
    }
    for (const double v : x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("query has a non-finite coordinate");
        }
    }
}

void Forest::accumulate_weights(std::span<const double> x, WeightScheme scheme,
                                double* out, const std::uint32_t* remap) const {
    const double k = static_cast<double>(trees_.size());
    for (const Tree& tree : trees_) {
        const TreeNode& leaf = tree.leaf_for(x);
        if (scheme == WeightScheme::kBootstrap) {
            const std::uint32_t nb = leaf.bootstrap_total;
            if (nb == 0) continue;  // 0/0 convention; tree contributes nothing
            const double denom = static_cast<double>(nb);
            for (const std::uint32_t id : tree.members(leaf)) {
                const std::uint32_t c = tree.bootstrap()[id];
                if (c == 0) continue;
                out[remap ? remap[id] : id] += static_cast<double>(c) / denom;
            }
        } else {
            const std::uint32_t no = leaf.original_count();
            if (no == 0) continue;  // same guard for defective trees
            const double denom = static_cast<double>(no);
            for (const std::uint32_t id : tree.members(leaf)) {
                out[remap ? remap[id] : id] += 1.0 / denom;
            }
        }
    }
    const std::size_t n = responses_.size();
    for (std::size_t j = 0; j < n; ++j) out[j] /= k;
}

WeightVector Forest::weights(std::span<const double> x, WeightScheme scheme) const {
    check_query(x);
    WeightVector w;
    w.values.assign(responses_.size(), 0.0);
    accumulate_weights(x, scheme, w.values.data(), nullptr);
    return w;
}

WeightVector Forest::weights_bootstrap(std::span<const double> x) const {
    return weights(x, WeightScheme::kBootstrap);
}

WeightVector Forest::weights_original(std::span<const double> x) const {
    return weights(x, WeightScheme::kOriginal);
}

double Forest::predict_mean(std::span<const double> x, WeightScheme scheme) const {
    const WeightVector w = weights(x, scheme);
    double acc = 0.0;
    for (std::size_t j = 0; j < responses_.size(); ++j) {
        acc += w.values[j] * responses_[j];
    }
    return acc;
}

void Forest::conditional_cdf_into(std::span<const double> x, WeightScheme scheme,
                                  std::vector<double>& cum) const {
    check_query(x);
    const std::size_t n = responses_.size();
    cum.assign(n, 0.0);
    accumulate_weights(x, scheme, cum.data(), rank_of_.data());
    double running = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        running += cum[i];
        cum[i] = running;
    }
}

WeightedEcdf Forest::conditional_cdf(std::span<const double> x,
                                     WeightScheme scheme) const {
    std::vector<double> cum;
    conditional_cdf_into(x, scheme, cum);
    return WeightedEcdf(sorted_responses_, std::move(cum));
}

}  // namespace cdforest
