#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cps/cc.hpp"
#include "cps/screening.hpp"

namespace cps::simbench {

// Benchmark scenario identifiers. ex1/ex2 drive the equality tests; the
// rest are screening scenarios.
enum class Example {
    ex1_a1,
    ex1_a2,
    ex2,
    ex3_b1,
    ex3_b2,
    ex3_b3,
    ex4_d1,
    ex4_d2,
    ex5,
};

enum class ErrorDist { normal, cauchy, scaled_cauchy, scaled_t3 };

const char* example_name(Example e);
const char* error_name(ErrorDist e);
bool parse_example(const std::string& s, Example& out);
bool parse_error_dist(const std::string& s, ErrorDist& out);

struct SimulationSpec {
    Example example = Example::ex1_a2;
    std::size_t n = 200;
    std::size_t p = 0;  // covariate count for screening examples
    double rho = 0.0;
    double c0 = 0.0;
    ErrorDist error = ErrorDist::normal;
    std::uint64_t seed = 1;
    std::size_t reps = 100;
    cc::QuantilePair pair{0.5, 0.5};
    double level = 0.05;
};

struct SimData {
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    Eigen::MatrixXd W;       // zero columns when the scenario has none
    Eigen::MatrixXd latent;  // pre-contamination covariates when distinct
    std::vector<std::size_t> active;
};

// Draws one replication. Deterministic in (spec.seed, rep).
SimData generate(const SimulationSpec& spec, std::size_t rep);

struct TestStudyReport {
    SimulationSpec spec;
    std::size_t reps = 0;
    std::size_t rejections = 0;
    double rate = 0.0;
    std::vector<std::uint8_t> reject_flags;
};

// Size/power study for the equality tests (ex1_* via the marginal test,
// ex2 via the conditional test).
TestStudyReport run_test_study(const SimulationSpec& spec, unsigned threads = 1);

enum class MethodKind { cc_sis, cpc_case1, cpc_case2, cpc_case3, pearson_sis, kendall_sis };

struct MethodSpec {
    MethodKind kind = MethodKind::cc_sis;
    cc::QuantilePair pair{0.5, 0.5};
    std::string label;
};

std::string method_label(const MethodSpec& m);

struct MethodSummary {
    std::string label;
    double mms_median = 0.0;
    double mms_rsd = 0.0;
    double coverage = 0.0;  // fraction of reps with all actives inside d_n
    std::vector<double> active_rank_median;
    std::vector<std::size_t> mms_per_rep;
    std::vector<std::vector<std::size_t>> active_ranks_per_rep;
};

struct ScreeningStudyReport {
    SimulationSpec spec;
    std::size_t d_n = 0;
    std::vector<MethodSummary> methods;
};

// Screening study: every method sees the same replication draws.
ScreeningStudyReport run_screening_study(const SimulationSpec& spec,
                                         const std::vector<MethodSpec>& methods,
                                         const screening::ScreeningConfig& base,
                                         unsigned threads = 1);

// Plain-text renderings used by the command line tool.
std::string to_csv(const TestStudyReport& r);
std::string to_table(const TestStudyReport& r);
std::string to_csv(const ScreeningStudyReport& r);
std::string to_table(const ScreeningStudyReport& r);

} // namespace cps::simbench
