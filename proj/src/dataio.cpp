#include "cps/dataio.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <string>

#include "cps/errors.hpp"
#include "cps/stats.hpp"

namespace cps::dataio {

std::string format_double(double v) {
    char buf[40];
    std::string best;
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = std::strtod(buf, nullptr);
        if (back != v) continue;
        if (best.empty() || std::strlen(buf) < best.size()) best = buf;
        if (prec >= 6) break;  // longer precisions cannot shorten the string
    }
    if (best.empty()) best = buf;
    return best;
}

namespace {

struct RawTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

// Comma-separated parser with quoted fields, doubled-quote escapes and
// CRLF tolerance. Line numbers are 1-based and include the header.
RawTable parse_csv(std::istream& in) {
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    RawTable table;
    std::vector<std::string> row;
    std::string field;
    bool quoted = false;
    bool any_field = false;
    std::size_t line = 1;

    auto end_field = [&]() {
        row.push_back(field);
        field.clear();
        any_field = false;
    };
    auto end_row = [&]() {
        // A bare newline (no separators, no content) is skipped, so blank
        // lines and a final newline never count as rows.
        if (row.empty() && field.empty() && !any_field) return;
        end_field();
        if (table.header.empty()) table.header = std::move(row);
        else table.rows.push_back(std::move(row));
        row.clear();
    };

    std::size_t i = 0;
    const std::size_t len = text.size();
    while (i < len) {
        char c = text[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < len && text[i + 1] == '"') {
                    field += '"';
                    i += 2;
                } else {
                    quoted = false;
                    ++i;
                }
            } else {
                if (c == '\n') ++line;
                field += c;
                ++i;
            }
            continue;
        }
        switch (c) {
        case '"':
            if (!field.empty())
                throw schema_error("line " + std::to_string(line) +
                                   ": quote inside an unquoted field");
            quoted = true;
            any_field = true;
            ++i;
            break;
        case ',':
            end_field();
            ++i;
            break;
        case '\r':
            if (i + 1 < len && text[i + 1] == '\n') ++i;
            [[fallthrough]];
        case '\n':
            end_row();
            ++line;
            ++i;
            break;
        default:
            field += c;
            any_field = true;
            ++i;
            break;
        }
    }
    if (quoted)
        throw schema_error("unterminated quoted field at end of input");
    if (!field.empty() || any_field || !row.empty()) end_row();
    return table;
}

bool is_missing(const std::string& cell) {
    if (cell.empty()) return true;
    std::string low;
    low.reserve(cell.size());
    for (char c : cell)
        low += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return low == "na" || low == "nan" || low == "null";
}

double parse_cell(const std::string& cell, std::size_t line,
                  const std::string& column) {
    const char* start = cell.c_str();
    char* end = nullptr;
    double v = std::strtod(start, &end);
    while (end != nullptr && *end != '\0' &&
           std::isspace(static_cast<unsigned char>(*end)))
        ++end;
    if (end == start || end == nullptr || *end != '\0')
        throw parse_error("line " + std::to_string(line) + ", column '" +
                          column + "': cannot parse '" + cell + "' as a number");
    if (!std::isfinite(v))
        throw parse_error("line " + std::to_string(line) + ", column '" +
                          column + "': non-finite value '" + cell + "'");
    return v;
}

std::string quote_name(const std::string& name) {
    bool needs = false;
    for (char c : name)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') needs = true;
    if (!needs) return name;
    std::string out = "\"";
    for (char c : name) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

} // namespace

Dataset load_csv_stream(std::istream& in, const std::string& response,
                        const std::vector<std::string>& conditioning) {
    RawTable table = parse_csv(in);
    if (table.header.empty()) throw schema_error("input has no header row");

    const std::size_t cols = table.header.size();
    for (std::size_t a = 0; a < cols; ++a)
        for (std::size_t b = a + 1; b < cols; ++b)
            if (table.header[a] == table.header[b])
                throw schema_error("duplicate column name '" + table.header[a] +
                                   "'");

    auto find_col = [&](const std::string& name) {
        for (std::size_t j = 0; j < cols; ++j)
            if (table.header[j] == name) return j;
        return cols;
    };

    std::size_t y_col = find_col(response);
    if (y_col == cols)
        throw schema_error("response column '" + response + "' not found");

    std::vector<std::size_t> w_cols;
    for (const std::string& name : conditioning) {
        std::size_t j = find_col(name);
        if (j == cols)
            throw schema_error("conditioning column '" + name + "' not found");
        if (j == y_col)
            throw schema_error("conditioning column '" + name +
                               "' is the response");
        for (std::size_t seen : w_cols)
            if (seen == j)
                throw schema_error("conditioning column '" + name +
                                   "' listed twice");
        w_cols.push_back(j);
    }

    std::vector<std::size_t> x_cols;
    for (std::size_t j = 0; j < cols; ++j) {
        if (j == y_col) continue;
        bool taken = false;
        for (std::size_t w : w_cols)
            if (w == j) taken = true;
        if (!taken) x_cols.push_back(j);
    }

    Dataset ds;
    ds.response_name = table.header[y_col];
    for (std::size_t j : w_cols) ds.conditioning_names.push_back(table.header[j]);
    for (std::size_t j : x_cols) ds.covariate_names.push_back(table.header[j]);

    std::vector<double> y_vals;
    std::vector<double> w_vals;  // row-major n x r
    std::vector<double> x_vals;  // row-major n x p

    for (std::size_t r = 0; r < table.rows.size(); ++r) {
        const std::vector<std::string>& row = table.rows[r];
        const std::size_t line = r + 2;
        if (row.size() != cols)
            throw schema_error("line " + std::to_string(line) + ": expected " +
                               std::to_string(cols) + " fields, found " +
                               std::to_string(row.size()));
        bool missing = false;
        for (const std::string& cell : row)
            if (is_missing(cell)) missing = true;
        if (missing) {
            ++ds.n_dropped;
            continue;
        }
        y_vals.push_back(parse_cell(row[y_col], line, table.header[y_col]));
        for (std::size_t j : w_cols)
            w_vals.push_back(parse_cell(row[j], line, table.header[j]));
        for (std::size_t j : x_cols)
            x_vals.push_back(parse_cell(row[j], line, table.header[j]));
    }

    const std::size_t n = y_vals.size();
    ds.y.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i)
        ds.y[static_cast<Eigen::Index>(i)] = y_vals[i];
    ds.W.resize(static_cast<Eigen::Index>(n),
                static_cast<Eigen::Index>(w_cols.size()));
    ds.X.resize(static_cast<Eigen::Index>(n),
                static_cast<Eigen::Index>(x_cols.size()));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w_cols.size(); ++j)
            ds.W(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                w_vals[i * w_cols.size() + j];
        for (std::size_t j = 0; j < x_cols.size(); ++j)
            ds.X(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                x_vals[i * x_cols.size() + j];
    }
    return ds;
}

Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& conditioning) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path + "'");
    return load_csv_stream(in, response, conditioning);
}

std::string to_csv_string(const Dataset& ds) {
    std::string s = quote_name(ds.response_name);
    for (const std::string& name : ds.conditioning_names)
        s += ',' + quote_name(name);
    for (const std::string& name : ds.covariate_names)
        s += ',' + quote_name(name);
    s += '\n';
    const std::size_t n = ds.n();
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::Index r = static_cast<Eigen::Index>(i);
        s += format_double(ds.y[r]);
        for (Eigen::Index j = 0; j < ds.W.cols(); ++j)
            s += ',' + format_double(ds.W(r, j));
        for (Eigen::Index j = 0; j < ds.X.cols(); ++j)
            s += ',' + format_double(ds.X(r, j));
        s += '\n';
    }
    return s;
}

void save_csv(const std::string& path, const Dataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot open '" + path + "' for writing");
    out << to_csv_string(ds);
    if (!out) throw io_error("write to '" + path + "' failed");
}

OutlierReport ih_outlier_report(const Eigen::MatrixXd& X,
                                const std::vector<std::string>& names,
                                double threshold, bool two_sided) {
    const std::size_t n = static_cast<std::size_t>(X.rows());
    const std::size_t p = static_cast<std::size_t>(X.cols());
    if (n < 3)
        throw insufficient_data_error("outlier scan needs at least 3 rows");
    if (!names.empty() && names.size() != p)
        throw domain_error("column name count does not match the matrix");

    OutlierReport report;
    report.threshold = threshold;
    report.two_sided = two_sided;
    std::size_t with_outliers = 0;

    std::vector<double> work(n);
    for (std::size_t j = 0; j < p; ++j) {
        Eigen::Index jc = static_cast<Eigen::Index>(j);
        OutlierColumn col;
        col.index = j;
        col.name = names.empty() ? "col" + std::to_string(j + 1) : names[j];
        for (std::size_t i = 0; i < n; ++i)
            work[i] = X(static_cast<Eigen::Index>(i), jc);
        col.median = stats::median(work);
        for (std::size_t i = 0; i < n; ++i)
            work[i] = std::abs(X(static_cast<Eigen::Index>(i), jc) - col.median);
        col.mad = stats::median(work);
        if (col.mad <= 0.0) {
            col.degenerate = true;
        } else {
            for (std::size_t i = 0; i < n; ++i) {
                double z = 0.6745 *
                           (X(static_cast<Eigen::Index>(i), jc) - col.median) /
                           col.mad;
                bool flag = two_sided ? std::abs(z) > threshold : z > threshold;
                if (flag) col.outlier_rows.push_back(i);
            }
        }
        if (!col.outlier_rows.empty()) ++with_outliers;
        report.columns.push_back(std::move(col));
    }
    report.fraction_columns_with_outliers =
        p == 0 ? 0.0
               : static_cast<double>(with_outliers) / static_cast<double>(p);
    return report;
}

} // namespace cps::dataio
