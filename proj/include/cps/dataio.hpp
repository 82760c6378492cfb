#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace cps::dataio {

struct Dataset {
    std::string response_name;
    std::vector<std::string> conditioning_names;
    std::vector<std::string> covariate_names;
    Eigen::VectorXd y;
    Eigen::MatrixXd W;  // conditioning columns, in request order
    Eigen::MatrixXd X;  // remaining columns, in file order
    std::size_t n_dropped = 0;  // rows removed for missing entries

    std::size_t n() const { return static_cast<std::size_t>(y.size()); }
};

// Reads a comma-separated file with a header row. Quoted fields, embedded
// commas/quotes and CRLF endings are handled. Rows with missing entries
// (empty, NA, NaN, null) are dropped and counted. Throws schema_error for
// structural problems, parse_error for non-numeric cells, io_error when the
// file cannot be opened.
Dataset load_csv(const std::string& path, const std::string& response,
                 const std::vector<std::string>& conditioning = {});

Dataset load_csv_stream(std::istream& in, const std::string& response,
                        const std::vector<std::string>& conditioning = {});

// Writes response, conditioning, then covariate columns. Finite values
// round-trip bit-exactly through load_csv.
void save_csv(const std::string& path, const Dataset& ds);
std::string to_csv_string(const Dataset& ds);

// Shortest decimal form that parses back to the same double.
std::string format_double(double v);

struct OutlierColumn {
    std::string name;
    std::size_t index = 0;
    std::vector<std::size_t> outlier_rows;
    bool degenerate = false;  // zero median absolute deviation
    double median = 0.0;
    double mad = 0.0;
};

struct OutlierReport {
    std::vector<OutlierColumn> columns;
    double threshold = 3.5;
    bool two_sided = true;
    double fraction_columns_with_outliers = 0.0;
};

// Robust per-column outlier scan: flags entries whose score
// 0.6745 * (x - median) / MAD exceeds the threshold in absolute value
// (or positively, when one-sided). Columns with zero MAD are reported as
// degenerate and contribute no flags.
OutlierReport ih_outlier_report(const Eigen::MatrixXd& X,
                                const std::vector<std::string>& names,
                                double threshold = 3.5, bool two_sided = true);

} // namespace cps::dataio
