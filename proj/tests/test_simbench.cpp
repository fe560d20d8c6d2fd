#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "cdforest/forest.hpp"
#include "cdforest/normal.hpp"
#include "cdforest/simbench.hpp"
#include "test_support.hpp"

using namespace cdforest;

namespace {

BenchmarkConfig tiny_config() {
    BenchmarkConfig cfg;
    cfg.n = 150;
    cfg.n_trees = 8;
    cfg.replications = 4;
    cfg.query_points = 6;
    cfg.alphas = {0.3, 0.5, 0.7};
    cfg.seed = 99;
    cfg.threads = 1;
    return cfg;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("ks_distance geometry") {
    const std::vector<double> x{0.5, 0.5, 0.5};  // center 1.5
    const double sigma = 2.0;

    SUBCASE("single step of mass one") {
        for (const double y0 : {-3.0, 1.5, 2.0, 8.0}) {
            const WeightedEcdf one(std::vector<double>{y0}, std::vector<double>{1.0});
            const double f = true_cdf(x, y0, sigma);
            const double expected = std::max(f, 1.0 - f);
            CHECK(ks_distance(one, x, sigma) == doctest::Approx(expected));
            CHECK(ks_distance(one, x, sigma) >= 0.5);
        }
    }

    SUBCASE("invariant to permuting the response/weight pairs") {
        const std::vector<double> resp{2.0, -1.0, 4.0, 0.5};
        const std::vector<double> w{0.4, 0.1, 0.3, 0.2};
        const std::vector<double> resp_perm{0.5, 2.0, -1.0, 4.0};
        const std::vector<double> w_perm{0.2, 0.4, 0.1, 0.3};
        const auto a = WeightedEcdf::from_pairs(resp, w);
        const auto b = WeightedEcdf::from_pairs(resp_perm, w_perm);
        CHECK(ks_distance(a, x, sigma) == ks_distance(b, x, sigma));
    }

    SUBCASE("matches a dense-grid brute force") {
        const Dataset ds = testsup::random_dataset(3, 60, 3);
        const Forest f = Forest::fit(ds, {5, 3, 3, 7});
        const std::vector<double> q{5.0, 5.0, 5.0};
        const WeightedEcdf ecdf = f.conditional_cdf(q, WeightScheme::kOriginal);

        const double exact = ks_distance(ecdf, q, sigma);
        const double lo = ecdf.sorted_responses().front() - 6.0 * sigma;
        const double hi = ecdf.sorted_responses().back() + 6.0 * sigma;
        double grid_max = 0.0;
        const std::size_t grid = 1000000;
        for (std::size_t i = 0; i <= grid; ++i) {
            const double y = lo + (hi - lo) * static_cast<double>(i) / grid;
            grid_max = std::max(grid_max,
                                std::abs(ecdf.cdf_at(y) - true_cdf(q, y, sigma)));
        }
        CHECK(exact >= grid_max - 1e-12);  // grid can only undershoot the sup
        CHECK(std::abs(exact - grid_max) < 1e-3);
    }
}

TEST_CASE("config validation") {
    BenchmarkConfig cfg = tiny_config();
    cfg.alphas = {0.0};
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = tiny_config();
    cfg.scheme_original = cfg.scheme_bootstrap = false;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = tiny_config();
    cfg.min_samples_leaf = cfg.n + 1;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = tiny_config();
    cfg.max_features = 4;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg = tiny_config();
    cfg.replications = 0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("default leaf rule") {
    CHECK(default_min_samples_leaf(1) == 1);
    CHECK(default_min_samples_leaf(100) == 1);  // formula gives 0.39, clamped
    CHECK(default_min_samples_leaf(10000) == 11);
    CHECK(default_min_samples_leaf(500) == 1);
    CHECK(default_min_samples_leaf(2000) == 3);
    CHECK(default_min_samples_leaf(8000) == 9);
}

TEST_CASE("benchmark runs are deterministic and schedule-independent") {
    const BenchmarkConfig cfg = tiny_config();
    const BenchmarkResult a = run_benchmark(cfg, true, true);

    SUBCASE("bit-identical rerun") {
        const BenchmarkResult b = run_benchmark(cfg, true, true);
        CHECK(a.m_ks_original == b.m_ks_original);
        CHECK(a.m_ks_bootstrap == b.m_ks_bootstrap);
        CHECK(a.ks_original == b.ks_original);
        REQUIRE(a.q_original.size() == b.q_original.size());
        for (std::size_t i = 0; i < a.q_original.size(); ++i) {
            CHECK(a.q_original[i].rmse == b.q_original[i].rmse);
            CHECK(a.q_original[i].bias == b.q_original[i].bias);
            CHECK(a.q_original[i].variance == b.q_original[i].variance);
        }
    }

    SUBCASE("thread count does not change a single emitted number") {
        BenchmarkConfig threaded = cfg;
        threaded.threads = 2;
        const BenchmarkResult b = run_benchmark(threaded, true, true);
        CHECK(a.m_ks_original == b.m_ks_original);
        CHECK(a.m_ks_bootstrap == b.m_ks_bootstrap);
        CHECK(a.ks_bootstrap == b.ks_bootstrap);
        for (std::size_t i = 0; i < a.q_bootstrap.size(); ++i) {
            CHECK(a.q_bootstrap[i].rmse == b.q_bootstrap[i].rmse);
            CHECK(a.q_bootstrap[i].variance == b.q_bootstrap[i].variance);
        }
    }

    SUBCASE("s = 1, p = 1 collapses to one deterministic scalar") {
        BenchmarkConfig single = cfg;
        single.replications = 1;
        single.query_points = 1;
        const BenchmarkResult r1 = run_cdf_benchmark(single);
        const BenchmarkResult r2 = run_cdf_benchmark(single);
        CHECK(r1.m_ks_original == r2.m_ks_original);
        CHECK(r1.ks_original.size() == 1);
        CHECK(r1.m_ks_original == r1.ks_original[0]);
    }
}

TEST_CASE("metric ranges and the bias-variance identity") {
    const BenchmarkResult r = run_benchmark(tiny_config(), true, true);

    for (const double ks : r.ks_original) CHECK((ks >= 0.0 && ks <= 1.0));
    for (const double ks : r.ks_bootstrap) CHECK((ks >= 0.0 && ks <= 1.0));
    CHECK((r.m_ks_original >= 0.0 && r.m_ks_original <= 1.0));
    CHECK((r.m_ks_bootstrap >= 0.0 && r.m_ks_bootstrap <= 1.0));

    // per point and alpha: rmse^2 = bias^2 + variance, up to rounding
    auto check_identity = [](const std::vector<QuantileStats>& cells) {
        for (const QuantileStats& c : cells) {
            CHECK(c.variance >= 0.0);
            CHECK(c.rmse * c.rmse >= c.bias * c.bias - 1e-9);
            CHECK(std::abs(c.rmse * c.rmse - c.bias * c.bias - c.variance) <= 1e-9);
        }
    };
    check_identity(r.q_original);
    check_identity(r.q_bootstrap);
}

TEST_CASE("constant responses give zero quantile error against a constant oracle") {
    const double c = 4.5;
    std::vector<double> features;
    std::vector<double> responses(80, c);
    Rng rng(5);
    for (int i = 0; i < 80; ++i) features.push_back(10.0 * rng.next_double());
    const Dataset ds(std::move(features), std::move(responses), 1);
    const Forest f = Forest::fit(ds, {5, 1, 2, 3});
    const std::vector<double> x{5.0};
    for (const WeightScheme scheme : {WeightScheme::kBootstrap, WeightScheme::kOriginal}) {
        const WeightedEcdf ecdf = f.conditional_cdf(x, scheme);
        for (const double alpha : {0.1, 0.5, 0.9}) {
            CHECK(ecdf.quantile(alpha) == c);  // rmse against the constant is 0
        }
    }
}

TEST_CASE("csv and manifest emission") {
    const BenchmarkConfig cfg = tiny_config();
    const BenchmarkResult r = run_benchmark(cfg, true, true);

    const std::string qp = testsup::tmp_path("qpoints.csv");
    const std::string qa = testsup::tmp_path("qagg.csv");
    const std::string cp = testsup::tmp_path("cpoints.csv");
    const std::string ca = testsup::tmp_path("cagg.csv");
    const std::string mf = testsup::tmp_path("manifest.json");
    write_quantile_points_csv(r, qp);
    write_quantile_aggregate_csv(r, qa);
    write_cdf_points_csv(r, cp);
    write_cdf_aggregate_csv(r, ca);
    write_manifest(cfg, "benchmark-quantile", {"a.csv"}, mf);

    const std::string qp_text = slurp(qp);
    CHECK(qp_text.find("point_id,x1,x2,x3,alpha,scheme,rmse,bias,variance") == 0);
    // 6 points x 3 alphas x 2 schemes data rows
    CHECK(std::count(qp_text.begin(), qp_text.end(), '\n') == 1 + 6 * 3 * 2);

    const std::string qa_text = slurp(qa);
    CHECK(qa_text.find("alpha,original_m_rmse,original_m_bias,original_m_variance,"
                       "bootstrap_m_rmse,bootstrap_m_bias,bootstrap_m_variance") == 0);
    CHECK(std::count(qa_text.begin(), qa_text.end(), '\n') == 1 + 3);

    const std::string cp_text = slurp(cp);
    CHECK(cp_text.find("point_id,x1,x2,x3,scheme,ks") == 0);
    CHECK(std::count(cp_text.begin(), cp_text.end(), '\n') == 1 + 6 * 2);

    const std::string ca_text = slurp(ca);
    CHECK(ca_text.find("scheme,m_ks") == 0);

    const std::string mf_text = slurp(mf);
    CHECK(mf_text.find("\"seed\": 99") != std::string::npos);
    CHECK(mf_text.find("\"version\"") != std::string::npos);
    CHECK(mf_text.find("\"min_samples_leaf\": 1") != std::string::npos);

    // emission is deterministic
    const std::string qp2 = testsup::tmp_path("qpoints2.csv");
    write_quantile_points_csv(r, qp2);
    CHECK(slurp(qp2) == qp_text);
}

TEST_CASE("single-scheme runs restrict the outputs") {
    BenchmarkConfig cfg = tiny_config();
    cfg.scheme_bootstrap = false;
    const BenchmarkResult r = run_benchmark(cfg, true, true);
    CHECK(r.ks_bootstrap.empty());
    CHECK_FALSE(r.ks_original.empty());
    CHECK(r.q_bootstrap.empty());
    CHECK(r.mq_original.size() == cfg.alphas.size());

    const std::string qa = testsup::tmp_path("qagg_single.csv");
    write_quantile_aggregate_csv(r, qa);
    CHECK(slurp(qa).find("alpha,original_m_rmse") == 0);
    CHECK(slurp(qa).find("bootstrap") == std::string::npos);
}
