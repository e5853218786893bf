#pragma once

#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "mgfnorm/common.hpp"
#include "mgfnorm/garch.hpp"

namespace mgfnorm {

namespace io_detail {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

inline bool parse_double(const std::string& text, double& out) {
    std::size_t begin = text.find_first_not_of(" \t\r");
    if (begin == std::string::npos) return false;
    std::size_t end = text.find_last_not_of(" \t\r") + 1;
    const char* first = text.data() + begin;
    const char* last = text.data() + end;
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last;
}

}  // namespace io_detail

/**
 * @brief Read a numeric matrix from comma-delimited text.
 *
 * One row per line, blank lines skipped. A first line whose fields do not
 * all parse as numbers is treated as a header. Ragged rows and unparsable
 * fields raise ParseError carrying the 1-based row and column.
 */
inline Matrix read_csv_matrix(std::istream& in) {
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t line_no = 0;
    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = io_detail::split_line(line);
        std::vector<double> row(fields.size());
        bool all_numeric = true;
        std::size_t bad_col = 0;
        for (std::size_t c = 0; c < fields.size(); ++c) {
            if (!io_detail::parse_double(fields[c], row[c])) {
                all_numeric = false;
                bad_col = c + 1;
                break;
            }
        }
        if (!all_numeric) {
            if (first_content_line) {  // header line
                first_content_line = false;
                continue;
            }
            throw ParseError("unparsable numeric field", line_no, bad_col);
        }
        first_content_line = false;
        if (!rows.empty() && row.size() != rows.front().size()) {
            throw ParseError("ragged row: expected " + std::to_string(rows.front().size()) +
                                 " fields, got " + std::to_string(row.size()),
                             line_no, row.size());
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError("no data rows", line_no, 0);
    Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c];
        }
    }
    return m;
}

inline Matrix read_csv_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    return read_csv_matrix(in);
}

inline void write_csv_matrix(std::ostream& os, const Matrix& m) {
    os.precision(17);
    for (Index r = 0; r < m.rows(); ++r) {
        for (Index c = 0; c < m.cols(); ++c) {
            if (c > 0) os << ',';
            os << m(r, c);
        }
        os << '\n';
    }
}

/**
 * @brief Flat parameter record: header plus one row
 *        d,p,q, b..., B1 row-major..., Gamma1 row-major..., R lower triangle
 *        (row-major, off-diagonal only).
 */
inline void write_garch_params_csv(std::ostream& os, const GarchParams& params, int p,
                                   int q) {
    const int d = params.d();
    os << "d,p,q";
    for (int i = 0; i < d; ++i) os << ",b" << i;
    for (int k = 0; k < p; ++k) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) os << ",B" << (k + 1) << '_' << r << c;
        }
    }
    for (int k = 0; k < q; ++k) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) os << ",G" << (k + 1) << '_' << r << c;
        }
    }
    for (int r = 1; r < d; ++r) {
        for (int c = 0; c < r; ++c) os << ",R_" << r << c;
    }
    os << '\n';
    os.precision(17);
    os << d << ',' << p << ',' << q;
    for (int i = 0; i < d; ++i) os << ',' << params.b(i);
    for (int k = 0; k < p; ++k) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) os << ',' << params.B[k](r, c);
        }
    }
    for (int k = 0; k < q; ++k) {
        for (int r = 0; r < d; ++r) {
            for (int c = 0; c < d; ++c) os << ',' << params.Gamma[k](r, c);
        }
    }
    for (int r = 1; r < d; ++r) {
        for (int c = 0; c < r; ++c) os << ',' << params.R(r, c);
    }
    os << '\n';
}

inline std::pair<GarchParams, GarchSpec> read_garch_params_csv(std::istream& in) {
    const Matrix rec = read_csv_matrix(in);
    if (rec.rows() != 1) throw ParseError("expected a single parameter row", 2, 0);
    Index at = 0;
    auto next = [&]() -> double {
        if (at >= rec.cols()) throw ParseError("parameter record too short", 2, at + 1);
        return rec(0, at++);
    };
    GarchSpec spec;
    spec.d = static_cast<int>(next());
    spec.p = static_cast<int>(next());
    spec.q = static_cast<int>(next());
    spec.validate();
    GarchParams params;
    params.b.resize(spec.d);
    for (int i = 0; i < spec.d; ++i) params.b(i) = next();
    for (int k = 0; k < spec.p; ++k) {
        Matrix m(spec.d, spec.d);
        for (int r = 0; r < spec.d; ++r) {
            for (int c = 0; c < spec.d; ++c) m(r, c) = next();
        }
        params.B.push_back(std::move(m));
    }
    for (int k = 0; k < spec.q; ++k) {
        Matrix m(spec.d, spec.d);
        for (int r = 0; r < spec.d; ++r) {
            for (int c = 0; c < spec.d; ++c) m(r, c) = next();
        }
        params.Gamma.push_back(std::move(m));
    }
    params.R = Matrix::Identity(spec.d, spec.d);
    for (int r = 1; r < spec.d; ++r) {
        for (int c = 0; c < r; ++c) {
            const double v = next();
            params.R(r, c) = v;
            params.R(c, r) = v;
        }
    }
    if (at != rec.cols()) throw ParseError("trailing fields in parameter record", 2, at + 1);
    params.validate();
    return {params, spec};
}

}  // namespace mgfnorm
