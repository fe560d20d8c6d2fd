#include <doctest.h>

#include <cmath>
#include <fstream>

#include "cdforest/csv.hpp"
#include "cdforest/dataset.hpp"
#include "cdforest/toy_model.hpp"
#include "test_support.hpp"

using namespace cdforest;

namespace {
void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}
}  // namespace

TEST_CASE("load_csv parses a small header file") {
    const std::string path = testsup::tmp_path("basic.csv");
    write_file(path, "x1,x2,y\n1,2,3\n4,5e0,6\n7,8,9.5\n");
    const Dataset ds = load_csv(path, ColumnRef{std::string("y")}, true);
    CHECK(ds.n_rows() == 3);
    CHECK(ds.n_features() == 2);
    CHECK(ds.feature(1, 1) == 5.0);
    CHECK(ds.response(2) == 9.5);
}

TEST_CASE("load_csv selects the response column by name or index") {
    const std::string path = testsup::tmp_path("respcol.csv");
    write_file(path, "a,y,b\n1,2,3\n4,5,6\n");
    const Dataset by_name = load_csv(path, ColumnRef{std::string("y")}, true);
    CHECK(by_name.response(0) == 2.0);
    CHECK(by_name.feature(0, 0) == 1.0);
    CHECK(by_name.feature(0, 1) == 3.0);

    write_file(path, "1,2,3\n4,5,6\n");
    const Dataset by_index = load_csv(path, ColumnRef{std::size_t{1}}, false);
    CHECK(by_index.response(1) == 5.0);
}

TEST_CASE("load_csv names the row and column of a bad cell") {
    const std::string path = testsup::tmp_path("badcell.csv");
    write_file(path, "x1,x2,y\n1,abc,3\n");
    CHECK_THROWS_WITH_AS(load_csv(path, ColumnRef{std::string("y")}, true),
                         doctest::Contains("row 1"), CsvError);
    try {
        load_csv(path, ColumnRef{std::string("y")}, true);
    } catch (const CsvError& e) {
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("load_csv error paths") {
    CHECK_THROWS_AS(load_csv("/nonexistent/nope.csv", ColumnRef{std::size_t{0}}, false),
                    CsvError);

    const std::string path = testsup::tmp_path("errors.csv");
    write_file(path, "");
    CHECK_THROWS_WITH_AS(load_csv(path, ColumnRef{std::size_t{0}}, false),
                         doctest::Contains("empty"), CsvError);

    write_file(path, "x1,x2,y\n1,2,3\n");
    CHECK_THROWS_WITH_AS(load_csv(path, ColumnRef{std::string("z")}, true),
                         doctest::Contains("absent"), CsvError);

    write_file(path, "x1,x2,y\n1,2,3\n4,5\n");
    CHECK_THROWS_AS(load_csv(path, ColumnRef{std::string("y")}, true), CsvError);

    write_file(path, "x1,x2,y\n1,,3\n");
    CHECK_THROWS_WITH_AS(load_csv(path, ColumnRef{std::string("y")}, true),
                         doctest::Contains("missing cell"), CsvError);

    write_file(path, "1,2,3\n");
    CHECK_THROWS_AS(load_csv(path, ColumnRef{std::size_t{7}}, false), CsvError);
}

TEST_CASE("save then load reproduces a sampled dataset bit-exactly") {
    ToyModelConfig toy;
    toy.seed = 7;
    const Dataset ds = sample_toy(toy, 100);

    const std::string path = testsup::tmp_path("roundtrip.csv");
    save_csv(ds, path);
    const Dataset again = load_csv(path, ColumnRef{std::string("y")}, true);
    REQUIRE(again.n_rows() == ds.n_rows());
    CHECK(again == ds);

    // and once more through the no-header form
    save_csv(again, path, false);
    const Dataset third = load_csv(path, ColumnRef{std::size_t{3}}, false);
    CHECK(third == ds);
}

TEST_CASE("validate flags every violation with its location") {
    const Dataset ok({1.0, 2.0, 3.0, 4.0}, {1.0, 2.0}, 2);
    CHECK(validate(ok).empty());

    Dataset with_nan({1.0, 2.0, std::nan(""), 4.0}, {1.0, 2.0}, 2);
    const auto v = validate(with_nan);
    REQUIRE(v.size() == 1);
    CHECK(v[0].find("row 1") != std::string::npos);
    CHECK(v[0].find("column 0") != std::string::npos);

    const Dataset mismatched({1.0, 2.0, 3.0, 4.0}, {1.0, 2.0, 3.0}, 2);
    bool found = false;
    for (const auto& msg : validate(mismatched)) {
        if (msg.find("length mismatch") != std::string::npos) found = true;
    }
    CHECK(found);

    const Dataset bad_response({1.0}, {std::numeric_limits<double>::infinity()}, 1);
    CHECK(validate(bad_response).size() == 1);
}

TEST_CASE("sampler output validates clean for any seed") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        ToyModelConfig toy;
        toy.seed = seed;
        CHECK(validate(sample_toy(toy, 60)).empty());
    }
}
