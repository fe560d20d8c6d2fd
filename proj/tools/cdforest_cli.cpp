// Command-line front end for conditional distribution forests: fit a
// forest on a CSV, query conditional quantiles / CDF values from a saved
// model, sample the builtin toy model, and run the Monte-Carlo benchmarks.

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cdforest/csv.hpp"
#include "cdforest/forest.hpp"
#include "cdforest/model_io.hpp"
#include "cdforest/simbench.hpp"
#include "cdforest/toy_model.hpp"
#include "cdforest/version.hpp"

namespace {

using namespace cdforest;

std::vector<double> parse_double_list(const std::string& csv, const char* what) {
    std::vector<double> values;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        const std::string item = csv.substr(start, comma - start);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), v);
        if (ec != std::errc{} || ptr != item.data() + item.size()) {
            throw CLI::ValidationError(std::string(what) + ": cannot parse '" + item + "'");
        }
        values.push_back(v);
        start = comma + 1;
    }
    if (values.empty()) throw CLI::ValidationError(std::string(what) + ": empty list");
    return values;
}

WeightScheme parse_scheme(const std::string& s) {
    if (s == "bootstrap") return WeightScheme::kBootstrap;
    if (s == "original") return WeightScheme::kOriginal;
    throw CLI::ValidationError("--scheme must be 'bootstrap' or 'original'");
}

ColumnRef parse_response_ref(const std::string& response, bool has_header) {
    if (has_header) return ColumnRef{response};
    std::size_t idx = 0;
    const auto [ptr, ec] =
        std::from_chars(response.data(), response.data() + response.size(), idx);
    if (ec != std::errc{} || ptr != response.data() + response.size()) {
        throw CLI::ValidationError(
            "--response must be a 0-based column index when the file has no header");
    }
    return ColumnRef{idx};
}

void add_toy_flags(CLI::App* cmd, ToyModelConfig& toy) {
    cmd->add_option("--gpd-scale", toy.gpd_scale, "GPD scale of X1");
    cmd->add_option("--gpd-shape", toy.gpd_shape, "GPD shape of X1");
    cmd->add_option("--lognormal-mu", toy.lognormal_mu, "log-mean of X2");
    cmd->add_option("--lognormal-sigma", toy.lognormal_sigma, "log-sd of X2");
    cmd->add_option("--gamma-shape", toy.gamma_shape, "gamma shape of X3");
    cmd->add_option("--gamma-scale", toy.gamma_scale, "gamma scale of X3");
    cmd->add_option("--noise-sigma", toy.noise_sigma, "noise standard deviation");
}

struct BenchFlags {
    BenchmarkConfig cfg;
    std::size_t min_samples_leaf = 0;
    CLI::Option* min_samples_leaf_opt = nullptr;
    std::string alphas = "0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9";
    std::string schemes = "both";
    std::string out_dir = ".";
};

void add_bench_flags(CLI::App* cmd, BenchFlags& f, bool with_alphas) {
    cmd->add_option("--n", f.cfg.n, "training sample size per replication");
    cmd->add_option("--n-trees", f.cfg.n_trees, "trees per forest (k)");
    cmd->add_option("--max-features", f.cfg.max_features,
                    "features per node, 0 = all");
    f.min_samples_leaf_opt =
        cmd->add_option("--min-samples-leaf", f.min_samples_leaf,
                        "minimum bootstrap occupancy per leaf "
                        "(default: the sqrt(n)ln(n)^1.5/250 rule)");
    cmd->add_option("--reps", f.cfg.replications, "replications (s)");
    cmd->add_option("--points", f.cfg.query_points, "query points (p)");
    if (with_alphas) cmd->add_option("--alphas", f.alphas, "comma-separated levels");
    cmd->add_option("--schemes", f.schemes, "both | original | bootstrap")
        ->check(CLI::IsMember({"both", "original", "bootstrap"}));
    cmd->add_option("--seed", f.cfg.seed, "master seed");
    cmd->add_option("--threads", f.cfg.threads, "worker threads, 0 = hardware");
    cmd->add_option("--out-dir", f.out_dir, "directory for CSVs and the manifest");
    add_toy_flags(cmd, f.cfg.toy);
}

BenchmarkConfig resolve_bench(const BenchFlags& f, bool with_alphas) {
    BenchmarkConfig cfg = f.cfg;
    if (f.min_samples_leaf_opt->count() > 0) cfg.min_samples_leaf = f.min_samples_leaf;
    if (with_alphas) cfg.alphas = parse_double_list(f.alphas, "--alphas");
    cfg.scheme_original = f.schemes != "bootstrap";
    cfg.scheme_bootstrap = f.schemes != "original";
    return cfg;
}

ProgressFn stderr_progress() {
    return [](std::size_t done, std::size_t total) {
        std::fprintf(stderr, "replication %zu/%zu\n", done, total);
    };
}

int cmd_fit(const std::string& train, const std::string& response, bool no_header,
            std::size_t n_trees, std::size_t max_features,
            std::optional<std::size_t> min_samples_leaf, std::uint64_t seed,
            unsigned threads, const std::string& out) {
    const Dataset ds = load_csv(train, parse_response_ref(response, !no_header),
                                !no_header);
    ForestHyperparameters hp;
    hp.n_trees = n_trees;
    hp.max_features = max_features == 0 ? ds.n_features() : max_features;
    hp.min_samples_leaf =
        min_samples_leaf ? *min_samples_leaf : default_min_samples_leaf(ds.n_rows());
    hp.seed = seed;

    const Forest forest = Forest::fit(ds, hp, threads);
    save_model(forest, out);

    std::size_t total_leaves = 0, min_leaves = SIZE_MAX, max_leaves = 0;
    for (const Tree& t : forest.trees()) {
        const std::size_t l = t.n_leaves();
        total_leaves += l;
        min_leaves = std::min(min_leaves, l);
        max_leaves = std::max(max_leaves, l);
    }
    std::printf(
        "fit: n=%zu d=%zu k=%zu max_features=%zu min_samples_leaf=%zu "
        "leaves_total=%zu leaves_min=%zu leaves_max=%zu model=%s\n",
        ds.n_rows(), ds.n_features(), hp.n_trees, hp.max_features,
        hp.min_samples_leaf, total_leaves, min_leaves, max_leaves, out.c_str());
    return 0;
}

int cmd_predict_quantile(const std::string& model, const std::string& queries,
                         bool queries_header, const std::string& alphas_csv,
                         const std::string& scheme_name, const std::string& out) {
    const Forest forest = load_model(model);
    const WeightScheme scheme = parse_scheme(scheme_name);
    const std::vector<double> alphas = parse_double_list(alphas_csv, "--alphas");
    const auto rows = load_query_csv(queries, queries_header, forest.dimension());

    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open file for writing: " + out);
    os << "query_id,alpha,scheme,quantile\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const WeightedEcdf ecdf = forest.conditional_cdf(rows[i], scheme);
        for (const double alpha : alphas) {
            os << i << ',' << format_double(alpha) << ',' << scheme_name << ','
               << format_double(ecdf.quantile(alpha)) << '\n';
        }
    }
    std::printf("predict-quantile: %zu queries x %zu alphas -> %s\n", rows.size(),
                alphas.size(), out.c_str());
    return 0;
}

int cmd_predict_cdf(const std::string& model, const std::string& queries,
                    bool queries_header, const std::string& ys_csv,
                    const std::string& scheme_name, const std::string& out) {
    const Forest forest = load_model(model);
    const WeightScheme scheme = parse_scheme(scheme_name);
    const std::vector<double> ys = parse_double_list(ys_csv, "--y");
    const auto rows = load_query_csv(queries, queries_header, forest.dimension());

    std::ofstream os(out, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open file for writing: " + out);
    os << "query_id,y,scheme,cdf\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const WeightedEcdf ecdf = forest.conditional_cdf(rows[i], scheme);
        for (const double y : ys) {
            os << i << ',' << format_double(y) << ',' << scheme_name << ','
               << format_double(ecdf.cdf_at(y)) << '\n';
        }
    }
    std::printf("predict-cdf: %zu queries x %zu y-values -> %s\n", rows.size(),
                ys.size(), out.c_str());
    return 0;
}

int cmd_sample(const ToyModelConfig& toy, std::size_t n, bool no_header,
               const std::string& out) {
    const Dataset ds = sample_toy(toy, n);
    save_csv(ds, out, !no_header);
    std::printf("sample: n=%zu d=%zu seed=%llu -> %s\n", ds.n_rows(), ds.n_features(),
                static_cast<unsigned long long>(toy.seed), out.c_str());
    return 0;
}

void print_cdf_table(const BenchmarkResult& r) {
    std::printf("scheme      m_ks\n");
    if (!r.ks_original.empty()) std::printf("original    %.6f\n", r.m_ks_original);
    if (!r.ks_bootstrap.empty()) std::printf("bootstrap   %.6f\n", r.m_ks_bootstrap);
}

void print_quantile_table(const BenchmarkResult& r) {
    const bool orig = !r.mq_original.empty();
    const bool boot = !r.mq_bootstrap.empty();
    std::printf("alpha");
    if (orig) std::printf("  | original m_rmse  m_bias  m_variance");
    if (boot) std::printf("  | bootstrap m_rmse  m_bias  m_variance");
    std::printf("\n");
    for (std::size_t a = 0; a < r.alphas.size(); ++a) {
        std::printf("%5.2f", r.alphas[a]);
        if (orig) {
            std::printf("  |          %.4f  %.4f  %.4f", r.mq_original[a].rmse,
                        r.mq_original[a].bias, r.mq_original[a].variance);
        }
        if (boot) {
            std::printf("  |           %.4f  %.4f  %.4f", r.mq_bootstrap[a].rmse,
                        r.mq_bootstrap[a].bias, r.mq_bootstrap[a].variance);
        }
        std::printf("\n");
    }
}

int cmd_benchmark(const BenchFlags& flags, bool quantile) {
    const BenchmarkConfig cfg = resolve_bench(flags, quantile);
    std::filesystem::create_directories(flags.out_dir);
    const auto path = [&](const char* name) {
        return (std::filesystem::path(flags.out_dir) / name).string();
    };

    if (quantile) {
        const BenchmarkResult r = run_quantile_benchmark(cfg, stderr_progress());
        write_quantile_points_csv(r, path("quantile_points.csv"));
        write_quantile_aggregate_csv(r, path("quantile_aggregate.csv"));
        write_manifest(cfg, "benchmark-quantile",
                       {"quantile_points.csv", "quantile_aggregate.csv"},
                       path("manifest.json"));
        print_quantile_table(r);
    } else {
        const BenchmarkResult r = run_cdf_benchmark(cfg, stderr_progress());
        write_cdf_points_csv(r, path("cdf_points.csv"));
        write_cdf_aggregate_csv(r, path("cdf_aggregate.csv"));
        write_manifest(cfg, "benchmark-cdf", {"cdf_points.csv", "cdf_aggregate.csv"},
                       path("manifest.json"));
        print_cdf_table(r);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"conditional distribution forests: conditional CDF and "
                 "quantile estimation with random forests"};
    app.set_version_flag("--version", std::string("cdforest ") + kVersion);
    app.require_subcommand(1);

    // fit
    auto* fit = app.add_subcommand("fit", "grow a forest on a CSV and save the model");
    std::string fit_train, fit_response = "y", fit_out = "model.cdf";
    bool fit_no_header = false;
    std::size_t fit_trees = 100, fit_mf = 0, fit_msl = 0;
    std::uint64_t fit_seed = 0;
    unsigned fit_threads = 0;
    fit->add_option("--train", fit_train, "training CSV")->required();
    fit->add_option("--response", fit_response,
                    "response column name (or 0-based index with --no-header)");
    fit->add_flag("--no-header", fit_no_header, "CSV has no header row");
    fit->add_option("--n-trees", fit_trees, "number of trees (k)");
    fit->add_option("--max-features", fit_mf, "features per node, 0 = all");
    auto* fit_msl_opt =
        fit->add_option("--min-samples-leaf", fit_msl,
                        "minimum bootstrap occupancy per leaf "
                        "(default: the sqrt(n)ln(n)^1.5/250 rule)");
    fit->add_option("--seed", fit_seed, "forest seed");
    fit->add_option("--threads", fit_threads, "worker threads, 0 = hardware");
    fit->add_option("--out", fit_out, "model file to write");

    // predict-quantile
    auto* pq = app.add_subcommand("predict-quantile",
                                  "conditional quantiles for query points");
    std::string pq_model, pq_queries, pq_alphas = "0.1,0.5,0.9";
    std::string pq_scheme = "original", pq_out = "quantiles.csv";
    bool pq_header = false;
    pq->add_option("--model", pq_model, "model file")->required();
    pq->add_option("--queries", pq_queries, "CSV of query points (features only)")
        ->required();
    pq->add_flag("--queries-header", pq_header, "query CSV has a header row");
    pq->add_option("--alphas", pq_alphas, "comma-separated quantile levels");
    pq->add_option("--scheme", pq_scheme, "bootstrap | original")
        ->check(CLI::IsMember({"bootstrap", "original"}));
    pq->add_option("--out", pq_out, "output CSV");

    // predict-cdf
    auto* pc = app.add_subcommand("predict-cdf",
                                  "conditional CDF values for query points");
    std::string pc_model, pc_queries, pc_ys;
    std::string pc_scheme = "original", pc_out = "cdf.csv";
    bool pc_header = false;
    pc->add_option("--model", pc_model, "model file")->required();
    pc->add_option("--queries", pc_queries, "CSV of query points (features only)")
        ->required();
    pc->add_flag("--queries-header", pc_header, "query CSV has a header row");
    pc->add_option("--y", pc_ys, "comma-separated evaluation points")->required();
    pc->add_option("--scheme", pc_scheme, "bootstrap | original")
        ->check(CLI::IsMember({"bootstrap", "original"}));
    pc->add_option("--out", pc_out, "output CSV");

    // sample
    auto* sample = app.add_subcommand("sample", "draw a toy-model training CSV");
    ToyModelConfig sample_toy_cfg;
    std::size_t sample_n = 1000;
    bool sample_no_header = false;
    std::string sample_out = "toy.csv";
    sample->add_option("--n", sample_n, "number of rows");
    sample->add_option("--seed", sample_toy_cfg.seed, "sampler seed");
    sample->add_flag("--no-header", sample_no_header, "omit the header row");
    sample->add_option("--out", sample_out, "output CSV");
    add_toy_flags(sample, sample_toy_cfg);

    // benchmark-cdf / benchmark-quantile
    auto* bc = app.add_subcommand("benchmark-cdf",
                                  "averaged Kolmogorov-Smirnov study on the toy model");
    BenchFlags bc_flags;
    add_bench_flags(bc, bc_flags, false);

    auto* bq = app.add_subcommand("benchmark-quantile",
                                  "averaged quantile RMSE/Bias/Variance study");
    BenchFlags bq_flags;
    add_bench_flags(bq, bq_flags, true);

    CLI11_PARSE(app, argc, argv);

    try {
        if (fit->parsed()) {
            const std::optional<std::size_t> msl =
                fit_msl_opt->count() > 0 ? std::optional<std::size_t>(fit_msl)
                                         : std::nullopt;
            return cmd_fit(fit_train, fit_response, fit_no_header, fit_trees, fit_mf,
                           msl, fit_seed, fit_threads, fit_out);
        }
        if (pq->parsed()) {
            return cmd_predict_quantile(pq_model, pq_queries, pq_header, pq_alphas,
                                        pq_scheme, pq_out);
        }
        if (pc->parsed()) {
            return cmd_predict_cdf(pc_model, pc_queries, pc_header, pc_ys, pc_scheme,
                                   pc_out);
        }
        if (sample->parsed()) {
            return cmd_sample(sample_toy_cfg, sample_n, sample_no_header, sample_out);
        }
        if (bc->parsed()) return cmd_benchmark(bc_flags, false);
        if (bq->parsed()) return cmd_benchmark(bq_flags, true);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
