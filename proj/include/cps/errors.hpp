#pragma once

#include <stdexcept>
#include <string>

namespace cps {

// Base class for all errors thrown by this library.
struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// An argument is outside its admissible range (quantile level, threshold, ...).
struct domain_error : error {
    using error::error;
};

// Too few observations for the requested operation.
struct insufficient_data_error : error {
    using error::error;
};

// Design matrix is rank deficient and no fallback was permitted.
struct singular_design_error : error {
    using error::error;
};

// Conditional design has grown too large relative to the sample size.
struct design_too_large_error : error {
    using error::error;
};

// All kernel weights vanished at the requested evaluation point.
struct degenerate_window_error : error {
    using error::error;
};

// A variance estimate collapsed below the usable floor.
struct degenerate_variance_error : error {
    using error::error;
};

// File could not be opened or read.
struct io_error : error {
    using error::error;
};

// A cell could not be parsed as a number.
struct parse_error : error {
    using error::error;
};

// Structural problem with a tabular input (duplicate or missing columns, ...).
struct schema_error : error {
    using error::error;
};

} // namespace cps
