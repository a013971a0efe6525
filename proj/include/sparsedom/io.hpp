#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sparsedom/grid.hpp"
#include "sparsedom/measure.hpp"
#include "sparsedom/weights.hpp"

namespace sparsedom {

// Shortest round-trippable decimal form of a double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

// Every emitted CSV starts with a comment line carrying the config hash and
// seed, then a header row. Field values never contain commas.
class CsvWriter {
  public:
    CsvWriter(const std::string& path, const std::string& comment,
              const std::vector<std::string>& header)
        : out_(path) {
        if (!out_) throw std::runtime_error("cannot open output file '" + path + "'");
        out_ << "# " << comment << "\n";
        write_row(header);
    }

    void write_row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << fields[i];
        }
        out_ << "\n";
    }

  private:
    std::ofstream out_;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<std::vector<std::string>> read_csv_rows(const std::string& path,
                                                           const std::string& expected_header) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open input file '" + path + "'");
    std::string line;
    bool header_seen = false;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            std::string got = line;
            if (!got.empty() && got.back() == '\r') got.pop_back();
            if (got.substr(0, expected_header.size()) != expected_header)
                throw std::runtime_error("file '" + path + "': expected header '" +
                                         expected_header + "'");
            header_seen = true;
            continue;
        }
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

} // namespace detail

inline void write_measure_csv(const std::string& path, const DyadicMeasure& mu,
                              const std::string& comment = "measure") {
    CsvWriter csv(path, comment, {"cell_index", "mass"});
    for (std::uint64_t c = 0; c < mu.grid().cell_count(); ++c)
        csv.write_row({std::to_string(c), format_double(mu.cell_mass(c))});
}

inline DyadicMeasure read_measure_csv(const std::string& path, const GridSpec& grid) {
    std::vector<double> mass(grid.cell_count(), 0.0);
    for (const auto& row : detail::read_csv_rows(path, "cell_index,mass")) {
        if (row.size() != 2) throw std::runtime_error("file '" + path + "': malformed row");
        const std::uint64_t c = std::stoull(row[0]);
        if (c >= mass.size()) throw std::runtime_error("file '" + path + "': cell index out of range");
        mass[c] = std::stod(row[1]);
    }
    return DyadicMeasure(grid, std::move(mass));
}

inline void write_function_csv(const std::string& path, const SimpleFunction& f,
                               const std::string& comment = "function") {
    std::vector<std::string> header = {"cell_index"};
    for (int i = 1; i <= f.dim(); ++i) header.push_back("v_" + std::to_string(i));
    CsvWriter csv(path, comment, header);
    for (std::uint64_t c = 0; c < f.grid().cell_count(); ++c) {
        std::vector<std::string> row = {std::to_string(c)};
        for (double x : f.value(c)) row.push_back(format_double(x));
        csv.write_row(row);
    }
}

inline SimpleFunction read_function_csv(const std::string& path, const GridSpec& grid) {
    const auto rows = detail::read_csv_rows(path, "cell_index");
    if (rows.empty()) throw std::runtime_error("file '" + path + "': no data rows");
    const int dim = int(rows.front().size()) - 1;
    if (dim < 1) throw std::runtime_error("file '" + path + "': no value columns");
    SimpleFunction f(grid, dim);
    for (const auto& row : rows) {
        if (int(row.size()) != dim + 1) throw std::runtime_error("file '" + path + "': ragged row");
        const std::uint64_t c = std::stoull(row[0]);
        if (c >= grid.cell_count())
            throw std::runtime_error("file '" + path + "': cell index out of range");
        for (int i = 0; i < dim; ++i) f.value(c)[i] = std::stod(row[i + 1]);
    }
    return f;
}

inline Weight read_weight_csv(const std::string& path, const GridSpec& grid) {
    std::vector<double> values(grid.cell_count(), 0.0);
    for (const auto& row : detail::read_csv_rows(path, "cell_index,mass")) {
        if (row.size() != 2) throw std::runtime_error("file '" + path + "': malformed row");
        values.at(std::stoull(row[0])) = std::stod(row[1]);
    }
    return Weight(grid, std::move(values));
}

} // namespace sparsedom
