#ifndef CDFOREST_CSV_HPP
#define CDFOREST_CSV_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>

#include "cdforest/dataset.hpp"

namespace cdforest {

// Column selector: a name (requires a header row) or a 0-based index.
using ColumnRef = std::variant<std::size_t, std::string>;

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Reads a comma-separated file, peeling off `response_column` as the
// response; the remaining columns become features in file order. Every
// cell must parse as a 64-bit float (scientific notation accepted); rows
// with missing cells are an error.
Dataset load_csv(const std::string& path, const ColumnRef& response_column,
                 bool has_header);

// Writes features as columns x1..xd followed by the response column y.
// Doubles are printed with shortest round-trip notation, so
// load_csv(save_csv(ds)) reproduces ds bit-exactly.
void save_csv(const Dataset& ds, const std::string& path, bool write_header = true);

// Reads a feature-only CSV (query points), expecting `expected_dim`
// columns when nonzero.
std::vector<std::vector<double>> load_query_csv(const std::string& path,
                                                bool has_header,
                                                std::size_t expected_dim = 0);

// Shortest decimal representation that parses back to the same double.
std::string format_double(double value);

}  // namespace cdforest

#endif  // CDFOREST_CSV_HPP
