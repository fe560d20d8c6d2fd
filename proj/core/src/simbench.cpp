#include "cdforest/simbench.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "cdforest/csv.hpp"
#include "cdforest/normal.hpp"
#include "cdforest/parallel.hpp"
#include "cdforest/version.hpp"

namespace cdforest {

namespace {
// Substream tags: query points, per-replication training data, per-
// replication forest seeds.
constexpr std::uint64_t kQueryTag = 0x2171;
constexpr std::uint64_t kDataTag = 0x2164;
constexpr std::uint64_t kForestTag = 0x2166;
}  // namespace

void BenchmarkConfig::check() const {
    toy.check();
    if (n < 1) throw std::invalid_argument("benchmark: n must be >= 1");
    if (n_trees < 1) throw std::invalid_argument("benchmark: n_trees must be >= 1");
    if (replications < 1) throw std::invalid_argument("benchmark: replications must be >= 1");
    if (query_points < 1) throw std::invalid_argument("benchmark: query_points must be >= 1");
    if (!scheme_original && !scheme_bootstrap) {
        throw std::invalid_argument("benchmark: at least one weight scheme is required");
    }
    const std::size_t mf = resolved_max_features();
    if (mf < 1 || mf > ToyModelConfig::dimension) {
        throw std::invalid_argument("benchmark: max_features must be in [1, 3]");
    }
    const std::size_t msl = resolved_min_samples_leaf();
    if (msl < 1 || msl > n) {
        throw std::invalid_argument("benchmark: min_samples_leaf must be in [1, n]");
    }
    if (alphas.empty()) throw std::invalid_argument("benchmark: alphas must be nonempty");
    for (const double a : alphas) {
        if (!(a > 0.0) || !(a < 1.0)) {
            throw std::invalid_argument("benchmark: every alpha must lie in (0, 1)");
        }
    }
}

double ks_distance_steps(std::span<const double> sorted_responses,
                         std::span<const double> cum_weights,
                         std::span<const double> x, double sigma) {
    if (sorted_responses.empty()) {
        throw std::invalid_argument("ks_distance: empty step function");
    }
    double center = 0.0;
    for (const double xi : x) center += xi;
    const double inv_sigma = 1.0 / sigma;

    double sup = 0.0;
    double prev = 0.0;
    for (std::size_t i = 0; i < sorted_responses.size(); ++i) {
        const double cum = cum_weights[i];
        if (cum == prev) continue;  // not a jump
        const double f = normal_cdf((sorted_responses[i] - center) * inv_sigma);
        sup = std::max(sup, std::abs(cum - f));
        sup = std::max(sup, std::abs(prev - f));
        prev = cum;
    }
    return sup;
}

double ks_distance(const WeightedEcdf& ecdf, std::span<const double> x, double sigma) {
    if (!(sigma > 0.0)) throw std::invalid_argument("ks_distance: sigma must be positive");
    return ks_distance_steps(ecdf.sorted_responses(), ecdf.cum_weights(), x, sigma);
}

namespace {

// Raw per-replication outcome, accumulated in replication order.
struct RepOutcome {
    std::vector<double> ks_o, ks_b;  // size p when used
    std::vector<double> q_o, q_b;    // size p * alphas when used
};

QuantileStats finalize_cell(double sum_q, double sumsq_q, double sum_sqerr,
                            double true_q, double s) {
    QuantileStats out;
    out.rmse = std::sqrt(sum_sqerr / s);
    const double mean_q = sum_q / s;
    out.bias = std::abs(mean_q - true_q);
    out.variance = std::max(0.0, sumsq_q / s - mean_q * mean_q);
    return out;
}

}  // namespace

BenchmarkResult run_benchmark(const BenchmarkConfig& cfg, bool with_cdf,
                              bool with_quantile, const ProgressFn& progress) {
    cfg.check();
    if (!with_cdf && !with_quantile) {
        throw std::invalid_argument("run_benchmark: nothing to compute");
    }

    const std::size_t p = cfg.query_points;
    const std::size_t s = cfg.replications;
    const std::size_t n_alphas = cfg.alphas.size();
    const double sigma = cfg.toy.noise_sigma;

    BenchmarkResult result;
    result.alphas = cfg.alphas;
    result.has_cdf = with_cdf;
    result.has_quantile = with_quantile;

    // Query points drawn once from the covariate law.
    {
        ToyModelSampler sampler(cfg.toy, Rng::mix(cfg.seed, kQueryTag));
        result.query_xs.reserve(p);
        for (std::size_t i = 0; i < p; ++i) result.query_xs.push_back(sampler.covariates());
    }

    // True quantiles per (point, alpha).
    std::vector<double> true_q;
    if (with_quantile) {
        std::vector<double> z(n_alphas);
        for (std::size_t a = 0; a < n_alphas; ++a) z[a] = normal_quantile(cfg.alphas[a]);
        true_q.resize(p * n_alphas);
        for (std::size_t i = 0; i < p; ++i) {
            const auto& x = result.query_xs[i];
            const double center = x[0] + x[1] + x[2];
            for (std::size_t a = 0; a < n_alphas; ++a) {
                true_q[i * n_alphas + a] = center + sigma * z[a];
            }
        }
    }

    ForestHyperparameters hp;
    hp.n_trees = cfg.n_trees;
    hp.max_features = cfg.resolved_max_features();
    hp.min_samples_leaf = cfg.resolved_min_samples_leaf();

    // Accumulators, filled strictly in replication order.
    std::vector<double> ks_sum_o(with_cdf && cfg.scheme_original ? p : 0, 0.0);
    std::vector<double> ks_sum_b(with_cdf && cfg.scheme_bootstrap ? p : 0, 0.0);
    const std::size_t cells = with_quantile ? p * n_alphas : 0;
    std::vector<double> qo_sum(cfg.scheme_original ? cells : 0, 0.0);
    std::vector<double> qo_sumsq(qo_sum.size(), 0.0);
    std::vector<double> qo_sqerr(qo_sum.size(), 0.0);
    std::vector<double> qb_sum(cfg.scheme_bootstrap ? cells : 0, 0.0);
    std::vector<double> qb_sumsq(qb_sum.size(), 0.0);
    std::vector<double> qb_sqerr(qb_sum.size(), 0.0);

    auto evaluate_scheme = [&](const Forest& forest, WeightScheme scheme,
                               std::vector<double>& cum, RepOutcome& out) {
        const std::span<const double> resp = forest.sorted_responses();
        std::vector<double>& ks_dst =
            scheme == WeightScheme::kOriginal ? out.ks_o : out.ks_b;
        std::vector<double>& q_dst =
            scheme == WeightScheme::kOriginal ? out.q_o : out.q_b;
        for (std::size_t i = 0; i < p; ++i) {
            const auto& x = result.query_xs[i];
            forest.conditional_cdf_into(x, scheme, cum);
            if (with_cdf) ks_dst[i] = ks_distance_steps(resp, cum, x, sigma);
            if (with_quantile) {
                for (std::size_t a = 0; a < n_alphas; ++a) {
                    q_dst[i * n_alphas + a] = step_quantile(resp, cum, cfg.alphas[a]);
                }
            }
        }
    };

    auto work = [&](std::size_t rep) {
        ToyModelConfig toy = cfg.toy;
        toy.seed = Rng::mix(cfg.seed, kDataTag, rep);
        const Dataset ds = sample_toy(toy, cfg.n);

        ForestHyperparameters rep_hp = hp;
        rep_hp.seed = Rng::mix(cfg.seed, kForestTag, rep);
        const Forest forest = Forest::fit(ds, rep_hp, 1);

        RepOutcome out;
        if (with_cdf) {
            if (cfg.scheme_original) out.ks_o.resize(p);
            if (cfg.scheme_bootstrap) out.ks_b.resize(p);
        }
        if (with_quantile) {
            if (cfg.scheme_original) out.q_o.resize(p * n_alphas);
            if (cfg.scheme_bootstrap) out.q_b.resize(p * n_alphas);
        }
        std::vector<double> cum;
        if (cfg.scheme_original) evaluate_scheme(forest, WeightScheme::kOriginal, cum, out);
        if (cfg.scheme_bootstrap) evaluate_scheme(forest, WeightScheme::kBootstrap, cum, out);
        return out;
    };

    std::size_t done = 0;
    auto consume = [&](std::size_t, RepOutcome&& out) {
        for (std::size_t i = 0; i < ks_sum_o.size(); ++i) ks_sum_o[i] += out.ks_o[i];
        for (std::size_t i = 0; i < ks_sum_b.size(); ++i) ks_sum_b[i] += out.ks_b[i];
        for (std::size_t i = 0; i < qo_sum.size(); ++i) {
            const double q = out.q_o[i];
            qo_sum[i] += q;
            qo_sumsq[i] += q * q;
            const double e = q - true_q[i];
            qo_sqerr[i] += e * e;
        }
        for (std::size_t i = 0; i < qb_sum.size(); ++i) {
            const double q = out.q_b[i];
            qb_sum[i] += q;
            qb_sumsq[i] += q * q;
            const double e = q - true_q[i];
            qb_sqerr[i] += e * e;
        }
        ++done;
        if (progress) progress(done, s);
    };

    parallel_ordered<RepOutcome>(s, cfg.threads, work, consume);

    const auto ds = static_cast<double>(s);
    if (with_cdf) {
        if (cfg.scheme_original) {
            result.ks_original.resize(p);
            double total = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                result.ks_original[i] = ks_sum_o[i] / ds;
                total += result.ks_original[i];
            }
            result.m_ks_original = total / static_cast<double>(p);
        }
        if (cfg.scheme_bootstrap) {
            result.ks_bootstrap.resize(p);
            double total = 0.0;
            for (std::size_t i = 0; i < p; ++i) {
                result.ks_bootstrap[i] = ks_sum_b[i] / ds;
                total += result.ks_bootstrap[i];
            }
            result.m_ks_bootstrap = total / static_cast<double>(p);
        }
    }
    if (with_quantile) {
        auto finalize = [&](const std::vector<double>& sum,
                            const std::vector<double>& sumsq,
                            const std::vector<double>& sqerr,
                            std::vector<QuantileStats>& cells_out,
                            std::vector<QuantileStats>& agg_out) {
            if (sum.empty()) return;
            cells_out.resize(p * n_alphas);
            agg_out.assign(n_alphas, QuantileStats{});
            for (std::size_t i = 0; i < p; ++i) {
                for (std::size_t a = 0; a < n_alphas; ++a) {
                    const std::size_t idx = i * n_alphas + a;
                    cells_out[idx] =
                        finalize_cell(sum[idx], sumsq[idx], sqerr[idx], true_q[idx], ds);
                    agg_out[a].rmse += cells_out[idx].rmse;
                    agg_out[a].bias += cells_out[idx].bias;
                    agg_out[a].variance += cells_out[idx].variance;
                }
            }
            for (QuantileStats& m : agg_out) {
                m.rmse /= static_cast<double>(p);
                m.bias /= static_cast<double>(p);
                m.variance /= static_cast<double>(p);
            }
        };
        finalize(qo_sum, qo_sumsq, qo_sqerr, result.q_original, result.mq_original);
        finalize(qb_sum, qb_sumsq, qb_sqerr, result.q_bootstrap, result.mq_bootstrap);
    }
    return result;
}

BenchmarkResult run_cdf_benchmark(const BenchmarkConfig& cfg, const ProgressFn& progress) {
    return run_benchmark(cfg, true, false, progress);
}

BenchmarkResult run_quantile_benchmark(const BenchmarkConfig& cfg,
                                       const ProgressFn& progress) {
    return run_benchmark(cfg, false, true, progress);
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open file for writing: " + path);
    return out;
}

}  // namespace

void write_cdf_points_csv(const BenchmarkResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "point_id,x1,x2,x3,scheme,ks\n";
    auto emit = [&](const std::vector<double>& ks, const char* scheme) {
        for (std::size_t i = 0; i < ks.size(); ++i) {
            const auto& x = result.query_xs[i];
            out << i << ',' << format_double(x[0]) << ',' << format_double(x[1]) << ','
                << format_double(x[2]) << ',' << scheme << ',' << format_double(ks[i])
                << '\n';
        }
    };
    emit(result.ks_original, "original");
    emit(result.ks_bootstrap, "bootstrap");
}

void write_cdf_aggregate_csv(const BenchmarkResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "scheme,m_ks\n";
    if (!result.ks_original.empty()) {
        out << "original," << format_double(result.m_ks_original) << '\n';
    }
    if (!result.ks_bootstrap.empty()) {
        out << "bootstrap," << format_double(result.m_ks_bootstrap) << '\n';
    }
}

void write_quantile_points_csv(const BenchmarkResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "point_id,x1,x2,x3,alpha,scheme,rmse,bias,variance\n";
    const std::size_t n_alphas = result.alphas.size();
    auto emit = [&](const std::vector<QuantileStats>& cells, const char* scheme) {
        for (std::size_t i = 0; i * n_alphas < cells.size(); ++i) {
            const auto& x = result.query_xs[i];
            for (std::size_t a = 0; a < n_alphas; ++a) {
                const QuantileStats& c = cells[i * n_alphas + a];
                out << i << ',' << format_double(x[0]) << ',' << format_double(x[1])
                    << ',' << format_double(x[2]) << ',' << format_double(result.alphas[a])
                    << ',' << scheme << ',' << format_double(c.rmse) << ','
                    << format_double(c.bias) << ',' << format_double(c.variance) << '\n';
            }
        }
    };
    emit(result.q_original, "original");
    emit(result.q_bootstrap, "bootstrap");
}

void write_quantile_aggregate_csv(const BenchmarkResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    const bool orig = !result.mq_original.empty();
    const bool boot = !result.mq_bootstrap.empty();
    out << "alpha";
    if (orig) out << ",original_m_rmse,original_m_bias,original_m_variance";
    if (boot) out << ",bootstrap_m_rmse,bootstrap_m_bias,bootstrap_m_variance";
    out << '\n';
    for (std::size_t a = 0; a < result.alphas.size(); ++a) {
        out << format_double(result.alphas[a]);
        if (orig) {
            const QuantileStats& m = result.mq_original[a];
            out << ',' << format_double(m.rmse) << ',' << format_double(m.bias) << ','
                << format_double(m.variance);
        }
        if (boot) {
            const QuantileStats& m = result.mq_bootstrap[a];
            out << ',' << format_double(m.rmse) << ',' << format_double(m.bias) << ','
                << format_double(m.variance);
        }
        out << '\n';
    }
}

void write_manifest(const BenchmarkConfig& cfg, const std::string& command,
                    const std::vector<std::string>& outputs, const std::string& path) {
    nlohmann::ordered_json j;
    j["tool"] = "cdforest";
    j["version"] = kVersion;
    j["command"] = command;
    nlohmann::ordered_json c;
    c["n"] = cfg.n;
    c["n_trees"] = cfg.n_trees;
    c["max_features"] = cfg.resolved_max_features();
    c["min_samples_leaf"] = cfg.resolved_min_samples_leaf();
    c["replications"] = cfg.replications;
    c["query_points"] = cfg.query_points;
    c["alphas"] = cfg.alphas;
    c["schemes"] = [&] {
        std::vector<std::string> schemes;
        if (cfg.scheme_original) schemes.emplace_back("original");
        if (cfg.scheme_bootstrap) schemes.emplace_back("bootstrap");
        return schemes;
    }();
    c["seed"] = cfg.seed;
    nlohmann::ordered_json toy;
    toy["gpd_scale"] = cfg.toy.gpd_scale;
    toy["gpd_shape"] = cfg.toy.gpd_shape;
    toy["lognormal_mu"] = cfg.toy.lognormal_mu;
    toy["lognormal_sigma"] = cfg.toy.lognormal_sigma;
    toy["gamma_shape"] = cfg.toy.gamma_shape;
    toy["gamma_scale"] = cfg.toy.gamma_scale;
    toy["noise_sigma"] = cfg.toy.noise_sigma;
    c["toy_model"] = toy;
    j["config"] = c;
    j["outputs"] = outputs;

    std::ofstream out = open_out(path);
    out << j.dump(2) << '\n';
}

}  // namespace cdforest
