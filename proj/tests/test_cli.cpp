// Exercises the installed command-line surface end to end by spawning the
// real binary (path injected by the build system).
#include <doctest.h>

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "cdforest/csv.hpp"
#include "cdforest/forest.hpp"
#include "cdforest/model_io.hpp"
#include "cdforest/toy_model.hpp"
#include "test_support.hpp"

using namespace cdforest;

namespace {

const std::string kCli = CDFOREST_CLI_PATH;

struct RunResult {
    int exit_code;
    std::string out;
};

RunResult run(const std::string& args) {
    const std::string out_path = testsup::tmp_path("cli_stdout.txt");
    const std::string cmd = kCli + " " + args + " > " + out_path + " 2>/dev/null";
    const int status = std::system(cmd.c_str());
    std::ifstream in(out_path, std::ios::binary);
    std::string out((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
    return {WEXITSTATUS(status), out};
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string((std::istreambuf_iterator<char>(in)),
                       std::istreambuf_iterator<char>());
}

// Parses "query_id,alpha,scheme,value" rows.
std::vector<double> csv_values(const std::string& text) {
    std::vector<double> values;
    std::istringstream lines(text);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        const std::size_t comma = line.rfind(',');
        REQUIRE(comma != std::string::npos);
        double v = 0.0;
        const char* first = line.data() + comma + 1;
        const char* last = line.data() + line.size();
        REQUIRE(std::from_chars(first, last, v).ec == std::errc{});
        values.push_back(v);
    }
    return values;
}

}  // namespace

TEST_CASE("sample output round-trips through the dataset loader") {
    const std::string csv = testsup::tmp_path("cli_toy.csv");
    const RunResult r = run("sample --n 100 --seed 7 --out " + csv);
    REQUIRE(r.exit_code == 0);

    const Dataset ds = load_csv(csv, ColumnRef{std::string("y")}, true);
    CHECK(ds.n_rows() == 100);
    CHECK(ds.n_features() == 3);

    const std::string csv2 = testsup::tmp_path("cli_toy2.csv");
    save_csv(ds, csv2);
    CHECK(load_csv(csv2, ColumnRef{std::string("y")}, true) == ds);
    CHECK(slurp(csv2) == slurp(csv));  // same bytes, same parse

    // rerun is byte-identical
    const std::string csv3 = testsup::tmp_path("cli_toy3.csv");
    run("sample --n 100 --seed 7 --out " + csv3);
    CHECK(slurp(csv3) == slurp(csv));
}

TEST_CASE("fit is deterministic and validates flags") {
    const std::string csv = testsup::tmp_path("cli_train.csv");
    run("sample --n 120 --seed 3 --out " + csv);

    const std::string m1 = testsup::tmp_path("cli_m1.cdf");
    const std::string m2 = testsup::tmp_path("cli_m2.cdf");
    const std::string flags = " --n-trees 10 --seed 1 --out ";
    const RunResult r1 = run("fit --train " + csv + flags + m1);
    REQUIRE(r1.exit_code == 0);
    CHECK(r1.out.find("n=120 d=3 k=10") != std::string::npos);
    const RunResult r2 = run("fit --train " + csv + flags + m2);
    REQUIRE(r2.exit_code == 0);
    CHECK(slurp(m1) == slurp(m2));

    CHECK(run("fit --train " + csv + " --min-samples-leaf 0 --out " + m2).exit_code != 0);
    CHECK(run("fit --train /nonexistent.csv --out " + m2).exit_code != 0);
}

TEST_CASE("predict-quantile matches the in-process library") {
    const std::string csv = testsup::tmp_path("cli_pq_train.csv");
    run("sample --n 150 --seed 11 --out " + csv);
    const std::string model = testsup::tmp_path("cli_pq.cdf");
    REQUIRE(run("fit --train " + csv + " --n-trees 7 --seed 5 --min-samples-leaf 4 --out " +
                model).exit_code == 0);

    const std::string queries = testsup::tmp_path("cli_pq_queries.csv");
    {
        std::ofstream q(queries);
        q << "1,2,1\n0.5,3,0.8\n";
    }
    const std::string out = testsup::tmp_path("cli_pq_out.csv");
    const RunResult r = run("predict-quantile --model " + model + " --queries " + queries +
                            " --alphas 0.1,0.5,0.9 --scheme bootstrap --out " + out);
    REQUIRE(r.exit_code == 0);

    const std::vector<double> got = csv_values(slurp(out));
    REQUIRE(got.size() == 6);  // 2 queries x 3 alphas
    // nondecreasing within each query
    CHECK(got[0] <= got[1]);
    CHECK(got[1] <= got[2]);
    CHECK(got[3] <= got[4]);
    CHECK(got[4] <= got[5]);

    // identical numbers from the library path
    const Dataset ds = load_csv(csv, ColumnRef{std::string("y")}, true);
    const Forest f = Forest::fit(ds, {7, 3, 4, 5});
    const std::vector<std::vector<double>> xs{{1, 2, 1}, {0.5, 3, 0.8}};
    std::size_t idx = 0;
    for (const auto& x : xs) {
        const WeightedEcdf ecdf = f.conditional_cdf(x, WeightScheme::kBootstrap);
        for (const double alpha : {0.1, 0.5, 0.9}) {
            CHECK(got[idx++] == ecdf.quantile(alpha));
        }
    }

    CHECK(run("predict-quantile --model " + model + " --queries " + queries +
              " --scheme nonsense --out " + out).exit_code != 0);
}

TEST_CASE("degenerate single-leaf model: sample median vs weighted median") {
    const std::string csv = testsup::tmp_path("cli_med_train.csv");
    run("sample --n 40 --seed 9 --out " + csv);
    const std::string model = testsup::tmp_path("cli_med.cdf");
    REQUIRE(run("fit --train " + csv +
                " --n-trees 1 --min-samples-leaf 40 --seed 2 --out " + model)
                .exit_code == 0);

    const std::string queries = testsup::tmp_path("cli_med_queries.csv");
    {
        std::ofstream q(queries);
        q << "1,1,1\n";
    }
    const std::string out = testsup::tmp_path("cli_med_out.csv");

    REQUIRE(run("predict-quantile --model " + model + " --queries " + queries +
                " --alphas 0.5 --scheme original --out " + out).exit_code == 0);
    const double original_median = csv_values(slurp(out)).at(0);

    REQUIRE(run("predict-quantile --model " + model + " --queries " + queries +
                " --alphas 0.5 --scheme bootstrap --out " + out).exit_code == 0);
    const double bootstrap_median = csv_values(slurp(out)).at(0);

    // original: inf rule on the uniform ECDF
    const Dataset ds = load_csv(csv, ColumnRef{std::string("y")}, true);
    std::vector<double> sorted = ds.responses();
    std::sort(sorted.begin(), sorted.end());
    CHECK(original_median == sorted[19]);  // first index with cum 20/40 >= 0.5

    // bootstrap: weighted median under B_j / n from the stored counts
    const Forest f = load_model(model);
    const auto& counts = f.trees().front().bootstrap().counts;
    std::vector<std::pair<double, std::uint32_t>> pairs;
    for (std::size_t j = 0; j < 40; ++j) pairs.emplace_back(ds.response(j), counts[j]);
    std::sort(pairs.begin(), pairs.end());
    double cum = 0.0;
    double expected = pairs.back().first;
    for (const auto& [y, c] : pairs) {
        cum += static_cast<double>(c) / 40.0;
        if (cum >= 0.5) {
            expected = y;
            break;
        }
    }
    CHECK(bootstrap_median == expected);
}

TEST_CASE("predict-cdf values match the library") {
    const std::string csv = testsup::tmp_path("cli_pc_train.csv");
    run("sample --n 80 --seed 21 --out " + csv);
    const std::string model = testsup::tmp_path("cli_pc.cdf");
    REQUIRE(run("fit --train " + csv + " --n-trees 5 --seed 8 --min-samples-leaf 3 --out " +
                model).exit_code == 0);
    const std::string queries = testsup::tmp_path("cli_pc_queries.csv");
    {
        std::ofstream q(queries);
        q << "2,3,1\n";
    }
    const std::string out = testsup::tmp_path("cli_pc_out.csv");
    REQUIRE(run("predict-cdf --model " + model + " --queries " + queries +
                " --y 2.0,6.0,10.0 --scheme original --out " + out).exit_code == 0);
    const std::vector<double> got = csv_values(slurp(out));
    REQUIRE(got.size() == 3);
    CHECK(got[0] <= got[1]);
    CHECK(got[1] <= got[2]);

    const Dataset ds = load_csv(csv, ColumnRef{std::string("y")}, true);
    const Forest f = Forest::fit(ds, {5, 3, 3, 8});
    const std::vector<double> x{2, 3, 1};
    const WeightedEcdf ecdf = f.conditional_cdf(x, WeightScheme::kOriginal);
    CHECK(got[0] == ecdf.cdf_at(2.0));
    CHECK(got[1] == ecdf.cdf_at(6.0));
    CHECK(got[2] == ecdf.cdf_at(10.0));
}

TEST_CASE("benchmark subcommands emit deterministic artifacts") {
    namespace fs = std::filesystem;
    const std::string dir1 = testsup::tmp_path("bench1");
    const std::string dir2 = testsup::tmp_path("bench2");
    fs::remove_all(dir1);
    fs::remove_all(dir2);

    const std::string flags =
        " --n 120 --n-trees 6 --reps 2 --points 5 --seed 31 --threads 2 --alphas 0.5 "
        "--out-dir ";
    const RunResult r1 = run("benchmark-quantile" + flags + dir1);
    REQUIRE(r1.exit_code == 0);
    CHECK(r1.out.find("alpha") != std::string::npos);
    const RunResult r2 = run("benchmark-quantile" + flags + dir2);
    REQUIRE(r2.exit_code == 0);

    CHECK(slurp(dir1 + "/quantile_points.csv") == slurp(dir2 + "/quantile_points.csv"));
    CHECK(slurp(dir1 + "/quantile_aggregate.csv") ==
          slurp(dir2 + "/quantile_aggregate.csv"));
    CHECK(slurp(dir1 + "/manifest.json") == slurp(dir2 + "/manifest.json"));
    CHECK(r1.out == r2.out);

    // single alpha -> exactly one aggregate data row
    const std::string agg = slurp(dir1 + "/quantile_aggregate.csv");
    CHECK(std::count(agg.begin(), agg.end(), '\n') == 2);

    const std::string cdir = testsup::tmp_path("bench_cdf");
    fs::remove_all(cdir);
    const RunResult rc = run("benchmark-cdf --n 120 --n-trees 6 --reps 2 --points 5 "
                             "--seed 31 --out-dir " + cdir);
    REQUIRE(rc.exit_code == 0);
    CHECK(slurp(cdir + "/cdf_points.csv").find("point_id,x1,x2,x3,scheme,ks") == 0);
    CHECK(slurp(cdir + "/manifest.json").find("benchmark-cdf") != std::string::npos);

    CHECK(run("benchmark-cdf --n 10 --min-samples-leaf 20 --out-dir " + cdir)
              .exit_code != 0);
}
