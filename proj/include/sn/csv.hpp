#ifndef SN_CSV_HPP
#define SN_CSV_HPP

// Minimal CSV interchange: comma separated, mandatory header row, '.'
// decimal point, UTF-8 passthrough.  Numeric parsing is locale independent.

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "sn/types.hpp"

namespace sn {

struct CsvError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class CsvDataset {
  public:
    static CsvDataset read(std::istream& in) {
        CsvDataset out;
        std::string line;
        if (!std::getline(in, line)) throw CsvError("csv: empty input");
        strip_cr(line);
        out.header_ = split(line);
        if (out.header_.empty()) throw CsvError("csv: empty header");
        while (std::getline(in, line)) {
            strip_cr(line);
            if (line.empty()) continue;
            auto cells = split(line);
            if (cells.size() != out.header_.size())
                throw CsvError("csv: ragged row (expected " + std::to_string(out.header_.size()) +
                               " cells)");
            out.cells_.push_back(std::move(cells));
        }
        return out;
    }

    static CsvDataset read_string(const std::string& text) {
        std::istringstream is(text);
        return read(is);
    }

    const std::vector<std::string>& header() const { return header_; }
    Eigen::Index rows() const { return static_cast<Eigen::Index>(cells_.size()); }

    Eigen::Index column_index(const std::string& name) const {
        for (std::size_t i = 0; i < header_.size(); ++i)
            if (header_[i] == name) return static_cast<Eigen::Index>(i);
        throw CsvError("csv: no column named '" + name + "'");
    }

    std::vector<std::string> string_column(const std::string& name) const {
        const auto j = static_cast<std::size_t>(column_index(name));
        std::vector<std::string> out;
        out.reserve(cells_.size());
        for (const auto& row : cells_) out.push_back(row[j]);
        return out;
    }

    Vecd numeric_column(const std::string& name) const {
        const auto j = static_cast<std::size_t>(column_index(name));
        Vecd out(rows());
        for (std::size_t i = 0; i < cells_.size(); ++i)
            out(static_cast<Eigen::Index>(i)) = parse_number(cells_[i][j], name);
        return out;
    }

    Matd numeric_columns(const std::vector<std::string>& names) const {
        Matd out(rows(), static_cast<Eigen::Index>(names.size()));
        for (std::size_t c = 0; c < names.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = numeric_column(names[c]);
        return out;
    }

  private:
    static void strip_cr(std::string& s) {
        if (!s.empty() && s.back() == '\r') s.pop_back();
    }
    static std::vector<std::string> split(const std::string& line) {
        std::vector<std::string> out;
        std::string cur;
        for (char ch : line) {
            if (ch == ',') {
                out.push_back(cur);
                cur.clear();
            } else {
                cur.push_back(ch);
            }
        }
        out.push_back(cur);
        return out;
    }
    static double parse_number(const std::string& s, const std::string& col) {
        double v = 0;
        const char* b = s.data();
        const char* e = s.data() + s.size();
        auto res = std::from_chars(b, e, v);
        if (res.ec != std::errc() || res.ptr != e)
            throw CsvError("csv: non-numeric cell '" + s + "' in column '" + col + "'");
        return v;
    }

    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> cells_;
};

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void write_csv(std::ostream& out, const std::vector<std::string>& header, const Matd& m) {
    for (std::size_t j = 0; j < header.size(); ++j)
        out << header[j] << (j + 1 < header.size() ? "," : "\n");
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            out << format_number(m(i, j)) << (j + 1 < m.cols() ? "," : "\n");
}

}  // namespace sn

#endif
