#include "cdforest/csv.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <system_error>

namespace cdforest {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            cells.push_back(line.substr(start));
            break;
        }
        cells.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return cells;
}

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return s.substr(b, e - b);
}

double parse_cell(const std::string& raw, std::size_t row, std::size_t col) {
    const std::string cell = trim(raw);
    if (cell.empty()) {
        throw CsvError("missing cell at row " + std::to_string(row) + ", column " +
                       std::to_string(col));
    }
    double value = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) {
        throw CsvError("unparseable cell '" + cell + "' at row " + std::to_string(row) +
                       ", column " + std::to_string(col));
    }
    return value;
}

std::vector<std::string> read_lines(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CsvError("cannot open file: " + path);
    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // ignore a trailing blank line
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw CsvError("empty file: " + path);
    return lines;
}

}  // namespace

std::string format_double(double value) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), value);
    return std::string(buf, res.ptr);
}

Dataset load_csv(const std::string& path, const ColumnRef& response_column,
                 bool has_header) {
    const std::vector<std::string> lines = read_lines(path);

    std::size_t first_data_row = 0;
    std::vector<std::string> header;
    if (has_header) {
        header = split_line(lines[0]);
        first_data_row = 1;
        if (first_data_row >= lines.size()) throw CsvError("no data rows in " + path);
    }
    const std::size_t n_cols = split_line(lines[first_data_row]).size();
    if (n_cols < 2) {
        throw CsvError("need at least one feature column and one response column");
    }

    std::size_t response_idx;
    if (std::holds_alternative<std::string>(response_column)) {
        const std::string& name = std::get<std::string>(response_column);
        if (!has_header) {
            throw CsvError("response column named '" + name +
                           "' requires a header row");
        }
        std::size_t found = header.size();
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) {
                found = i;
                break;
            }
        }
        if (found == header.size()) {
            throw CsvError("response column '" + name + "' absent from header");
        }
        response_idx = found;
    } else {
        response_idx = std::get<std::size_t>(response_column);
        if (response_idx >= n_cols) {
            throw CsvError("response column index " + std::to_string(response_idx) +
                           " out of range (file has " + std::to_string(n_cols) +
                           " columns)");
        }
    }

    const std::size_t n = lines.size() - first_data_row;
    const std::size_t d = n_cols - 1;
    std::vector<double> features;
    features.reserve(n * d);
    std::vector<double> responses;
    responses.reserve(n);

    for (std::size_t r = 0; r < n; ++r) {
        const std::size_t row_no = r + first_data_row;
        const std::vector<std::string> cells = split_line(lines[row_no]);
        if (cells.size() != n_cols) {
            throw CsvError("row " + std::to_string(row_no) + " has " +
                           std::to_string(cells.size()) + " cells, expected " +
                           std::to_string(n_cols));
        }
        for (std::size_t c = 0; c < n_cols; ++c) {
            const double v = parse_cell(cells[c], row_no, c);
            if (c == response_idx) {
                responses.push_back(v);
            } else {
                features.push_back(v);
            }
        }
    }
    return Dataset(std::move(features), std::move(responses), d);
}

void save_csv(const Dataset& ds, const std::string& path, bool write_header) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CsvError("cannot open file for writing: " + path);

    const std::size_t d = ds.n_features();
    if (write_header) {
        for (std::size_t j = 0; j < d; ++j) out << 'x' << (j + 1) << ',';
        out << "y\n";
    }
    for (std::size_t i = 0; i < ds.n_rows(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            out << format_double(ds.feature(i, j)) << ',';
        }
        out << format_double(ds.response(i)) << '\n';
    }
    if (!out) throw CsvError("write failed: " + path);
}

std::vector<std::vector<double>> load_query_csv(const std::string& path,
                                                bool has_header,
                                                std::size_t expected_dim) {
    const std::vector<std::string> lines = read_lines(path);
    const std::size_t first_data_row = has_header ? 1 : 0;
    if (first_data_row >= lines.size()) throw CsvError("no data rows in " + path);

    std::vector<std::vector<double>> rows;
    for (std::size_t r = first_data_row; r < lines.size(); ++r) {
        const std::vector<std::string> cells = split_line(lines[r]);
        if (expected_dim != 0 && cells.size() != expected_dim) {
            throw CsvError("query row " + std::to_string(r) + " has " +
                           std::to_string(cells.size()) + " columns, expected " +
                           std::to_string(expected_dim));
        }
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::size_t c = 0; c < cells.size(); ++c) {
            row.push_back(parse_cell(cells[c], r, c));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace cdforest
