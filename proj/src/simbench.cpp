#include "cps/simbench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <vector>

#include "cps/cpc.hpp"
#include "cps/dataio.hpp"
#include "cps/empirical.hpp"
#include "cps/errors.hpp"
#include "cps/parallel.hpp"
#include "cps/rng.hpp"
#include "cps/stats.hpp"

namespace cps::simbench {

const char* example_name(Example e) {
    switch (e) {
    case Example::ex1_a1: return "ex1_a1";
    case Example::ex1_a2: return "ex1_a2";
    case Example::ex2: return "ex2";
    case Example::ex3_b1: return "ex3_b1";
    case Example::ex3_b2: return "ex3_b2";
    case Example::ex3_b3: return "ex3_b3";
    case Example::ex4_d1: return "ex4_d1";
    case Example::ex4_d2: return "ex4_d2";
    case Example::ex5: return "ex5";
    }
    return "unknown";
}

const char* error_name(ErrorDist e) {
    switch (e) {
    case ErrorDist::normal: return "normal";
    case ErrorDist::cauchy: return "cauchy";
    case ErrorDist::scaled_cauchy: return "scaled-cauchy";
    case ErrorDist::scaled_t3: return "scaled-t3";
    }
    return "unknown";
}

bool parse_example(const std::string& s, Example& out) {
    for (Example e : {Example::ex1_a1, Example::ex1_a2, Example::ex2,
                      Example::ex3_b1, Example::ex3_b2, Example::ex3_b3,
                      Example::ex4_d1, Example::ex4_d2, Example::ex5}) {
        if (s == example_name(e)) {
            out = e;
            return true;
        }
    }
    return false;
}

bool parse_error_dist(const std::string& s, ErrorDist& out) {
    for (ErrorDist e : {ErrorDist::normal, ErrorDist::cauchy,
                        ErrorDist::scaled_cauchy, ErrorDist::scaled_t3}) {
        if (s == error_name(e)) {
            out = e;
            return true;
        }
    }
    return false;
}

namespace {

double draw_error(Rng& rng, ErrorDist e) {
    switch (e) {
    case ErrorDist::normal: return rng.normal();
    case ErrorDist::cauchy: return rng.cauchy();
    case ErrorDist::scaled_cauchy: return rng.cauchy() / 3.0;
    case ErrorDist::scaled_t3: return rng.student_t(3.0) / 3.0;
    }
    return 0.0;
}

// First-order autoregressive row: entry j has unit variance and the
// correlation with entry k decays as rho^{|j-k|}.
void fill_ar1_row(Rng& rng, double rho, double* out, std::size_t m) {
    double carry = std::sqrt(1.0 - rho * rho);
    for (std::size_t j = 0; j < m; ++j) {
        double g = rng.normal();
        out[j] = j == 0 ? g : rho * out[j - 1] + carry * g;
    }
}

std::size_t resolve_p(const SimulationSpec& spec, std::size_t minimum) {
    std::size_t p = spec.p > 0 ? spec.p : 1000;
    if (p < minimum)
        throw domain_error("covariate dimension too small for this scenario");
    return p;
}

} // namespace

SimData generate(const SimulationSpec& spec, std::size_t rep) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(rep)));
    const std::size_t n = spec.n;
    if (n < 2) throw insufficient_data_error("need at least two observations");
    const double rho = spec.rho;

    SimData data;
    data.W.resize(static_cast<Eigen::Index>(n), 0);
    data.latent.resize(static_cast<Eigen::Index>(n), 0);

    switch (spec.example) {
    case Example::ex1_a1: {
        // Per row: two correlated standard normals.
        data.X.resize(static_cast<Eigen::Index>(n), 2);
        data.y.resize(static_cast<Eigen::Index>(n));
        double carry = std::sqrt(1.0 - rho * rho);
        for (std::size_t i = 0; i < n; ++i) {
            double z1 = rng.normal();
            double z2 = rho * z1 + carry * rng.normal();
            data.X(static_cast<Eigen::Index>(i), 0) = z1;
            data.X(static_cast<Eigen::Index>(i), 1) = z2;
            data.y[static_cast<Eigen::Index>(i)] =
                std::exp(2.0 * z1) + std::exp((2.0 + spec.c0) * z2);
        }
        data.active = {0, 1};
        break;
    }
    case Example::ex1_a2: {
        // Per row: two correlated normals, two contaminant draws, model error.
        // The response uses the clean pair; the covariates are contaminated.
        data.X.resize(static_cast<Eigen::Index>(n), 2);
        data.latent.resize(static_cast<Eigen::Index>(n), 2);
        data.y.resize(static_cast<Eigen::Index>(n));
        double carry = std::sqrt(1.0 - rho * rho);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index r = static_cast<Eigen::Index>(i);
            double z1 = rng.normal();
            double z2 = rho * z1 + carry * rng.normal();
            double c1 = rng.cauchy() / 5.0;
            double c2 = rng.cauchy() / 5.0;
            double e = rng.normal();
            data.latent(r, 0) = z1;
            data.latent(r, 1) = z2;
            data.X(r, 0) = 0.9 * z1 + 0.1 * c1;
            data.X(r, 1) = 0.9 * z2 + 0.1 * c2;
            data.y[r] = 2.0 * z1 + (2.0 + spec.c0) * z2 + e;
        }
        data.active = {0, 1};
        break;
    }
    case Example::ex2: {
        // Per row: four autoregressive conditioning variables, two t-noise
        // draws, model error. Both covariates share the conditioning signal.
        const Eigen::Vector4d b(3.0, 4.0, 3.0, 4.0);
        data.W.resize(static_cast<Eigen::Index>(n), 4);
        data.X.resize(static_cast<Eigen::Index>(n), 2);
        data.y.resize(static_cast<Eigen::Index>(n));
        double zrow[4];
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index r = static_cast<Eigen::Index>(i);
            fill_ar1_row(rng, rho, zrow, 4);
            double zb = 0.0;
            for (int j = 0; j < 4; ++j) {
                data.W(r, j) = zrow[j];
                zb += zrow[j] * b[j];
            }
            double x1 = zb + rng.student_t(3.0) / 3.0;
            double x2 = zb + rng.student_t(3.0) / 3.0;
            double e = draw_error(rng, spec.error);
            data.X(r, 0) = x1;
            data.X(r, 1) = x2;
            data.y[r] = 2.0 * x1 + (2.0 + spec.c0) * x2 + zb + e;
        }
        data.active = {0, 1};
        break;
    }
    case Example::ex3_b1:
    case Example::ex3_b2:
    case Example::ex3_b3: {
        std::size_t p = resolve_p(spec, spec.example == Example::ex3_b2 ? 10 : 5);
        // Random response coefficients are drawn once per replication,
        // before any data.
        double beta[3] = {0.0, 0.0, 0.0};
        if (spec.example == Example::ex3_b3) {
            double sign = rng.bernoulli(0.4) ? -1.0 : 1.0;
            double z0 = 0.5 * rng.normal();
            double base = 4.0 * std::log(static_cast<double>(n)) /
                              std::sqrt(static_cast<double>(n)) +
                          z0;
            const double c[3] = {1.0, 0.5, 1.0};
            for (int j = 0; j < 3; ++j) beta[j] = c[j] * sign * base;
        }
        data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        data.latent.resize(static_cast<Eigen::Index>(n),
                           static_cast<Eigen::Index>(p));
        data.y.resize(static_cast<Eigen::Index>(n));
        std::vector<double> star(p);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index r = static_cast<Eigen::Index>(i);
            fill_ar1_row(rng, rho, star.data(), p);
            for (std::size_t j = 0; j < p; ++j) {
                Eigen::Index jc = static_cast<Eigen::Index>(j);
                data.latent(r, jc) = star[j];
                data.X(r, jc) = 0.8 * star[j] + 0.2 * rng.cauchy();
            }
            double e = draw_error(rng, spec.error);
            double mu = 0.0;
            switch (spec.example) {
            case Example::ex3_b1:
                mu = 3.0 * star[0] + 3.0 * star[1] + 2.0 * star[2] +
                     2.0 * star[3] + 2.0 * star[4];
                break;
            case Example::ex3_b2:
                mu = 5.0 * star[0] * (star[0] < 0.0 ? 1.0 : 0.0) +
                     5.0 * star[1] * (star[1] > 0.0 ? 1.0 : 0.0) +
                     5.0 * std::sin(star[9]);
                break;
            default:
                mu = std::exp(3.0 * beta[0] * std::sin(star[0]) +
                              2.0 * beta[1] * std::exp(star[1]) +
                              1.5 * beta[2] * (star[2] > 0.0 ? 1.0 : 0.0) +
                              2.0 * std::log(std::abs(star[3])));
                break;
            }
            data.y[r] = mu + e;
        }
        if (spec.example == Example::ex3_b1) data.active = {0, 1, 2, 3, 4};
        else if (spec.example == Example::ex3_b2) data.active = {0, 1, 9};
        else data.active = {0, 1, 2, 3};
        break;
    }
    case Example::ex4_d1:
    case Example::ex4_d2: {
        std::size_t p = resolve_p(spec, 4);
        const bool contaminated = spec.example == Example::ex4_d2;
        const double beta = 4.0;
        const double root_rho = std::sqrt(std::max(rho, 0.0));
        const double carry = std::sqrt(std::max(1.0 - rho, 0.0));
        data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        if (contaminated)
            data.latent.resize(static_cast<Eigen::Index>(n),
                               static_cast<Eigen::Index>(p));
        data.y.resize(static_cast<Eigen::Index>(n));
        std::vector<double> star(p);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index r = static_cast<Eigen::Index>(i);
            // Column 4 is the shared factor; the others load on it with
            // weight sqrt(rho), which makes its correlation with each of
            // them sqrt(rho) and every other pairwise correlation rho. The
            // contaminated variant correlates only the first four columns.
            double factor = rng.normal();
            for (std::size_t j = 0; j < p; ++j) {
                if (j == 3) {
                    star[j] = factor;
                    continue;
                }
                double g = rng.normal();
                bool linked = !contaminated || j < 4;
                star[j] = linked ? root_rho * factor + carry * g : g;
            }
            for (std::size_t j = 0; j < p; ++j) {
                Eigen::Index jc = static_cast<Eigen::Index>(j);
                if (contaminated) {
                    data.latent(r, jc) = star[j];
                    data.X(r, jc) = 0.9 * star[j] + 0.1 * (rng.cauchy() / 5.0);
                } else {
                    data.X(r, jc) = star[j];
                }
            }
            double e = draw_error(rng, spec.error);
            data.y[r] = beta * (star[0] + star[1] + star[2]) -
                        3.0 * beta * root_rho * star[3] + e;
        }
        data.active = {0, 1, 2, 3};
        break;
    }
    case Example::ex5: {
        std::size_t p = resolve_p(spec, 4);
        const Eigen::Vector4d b(2.0, 4.0 / 3.0, 2.0, 4.0 / 3.0);
        data.W.resize(static_cast<Eigen::Index>(n), 4);
        data.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(p));
        data.y.resize(static_cast<Eigen::Index>(n));
        double wrow[4];
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::Index r = static_cast<Eigen::Index>(i);
            fill_ar1_row(rng, rho, wrow, 4);
            double wb = 0.0;
            for (int j = 0; j < 4; ++j) {
                data.W(r, j) = wrow[j];
                wb += wrow[j] * b[j];
            }
            for (std::size_t j = 0; j < p; ++j)
                data.X(r, static_cast<Eigen::Index>(j)) =
                    wb + rng.cauchy() / 3.0;
            double e = draw_error(rng, spec.error);
            data.y[r] = 2.0 * data.X(r, 0) + 2.0 * data.X(r, 1) -
                        4.0 * data.X(r, 2) + 3.0 * data.X(r, 3) + e;
        }
        data.active = {0, 1, 2, 3};
        break;
    }
    }
    return data;
}

TestStudyReport run_test_study(const SimulationSpec& spec, unsigned threads) {
    if (spec.example != Example::ex1_a1 && spec.example != Example::ex1_a2 &&
        spec.example != Example::ex2)
        throw domain_error("not an equality-test scenario");
    if (spec.reps < 1) throw domain_error("need at least one replication");

    TestStudyReport rep;
    rep.spec = spec;
    rep.reps = spec.reps;
    rep.reject_flags.assign(spec.reps, 0);

    parallel_for(spec.reps, resolve_threads(threads), [&](std::size_t r) {
        SimData data = generate(spec, r);
        std::span<const double> y(data.y.data(),
                                  static_cast<std::size_t>(data.y.size()));
        std::span<const double> x1(data.X.col(0).data(), spec.n);
        std::span<const double> x2(data.X.col(1).data(), spec.n);
        double p_value;
        if (spec.example == Example::ex2) {
            cpc::ConditioningDesign design =
                cpc::ConditioningDesign::external(data.W);
            p_value = cpc::test_equal(y, x1, x2, design, spec.pair).p_value;
        } else {
            p_value = cc::test_equal(y, x1, x2, spec.pair).p_value;
        }
        rep.reject_flags[r] = p_value < spec.level ? 1 : 0;
    });

    for (std::uint8_t f : rep.reject_flags) rep.rejections += f;
    rep.rate = static_cast<double>(rep.rejections) / static_cast<double>(rep.reps);
    return rep;
}

std::string method_label(const MethodSpec& m) {
    if (!m.label.empty()) return m.label;
    const char* base = "";
    bool with_pair = true;
    switch (m.kind) {
    case MethodKind::cc_sis: base = "cc-sis"; break;
    case MethodKind::cpc_case1: base = "cpc-sis-case1"; break;
    case MethodKind::cpc_case2: base = "cpc-sis-case2"; break;
    case MethodKind::cpc_case3: base = "cpc-sis-case3"; break;
    case MethodKind::pearson_sis: base = "pearson-sis"; with_pair = false; break;
    case MethodKind::kendall_sis: base = "kendall-sis"; with_pair = false; break;
    }
    if (!with_pair) return base;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%s(%g,%g)", base, m.pair.tau, m.pair.iota);
    return buf;
}

namespace {

double median_of(std::vector<double> v) { return stats::median(v); }

double rsd_of(const std::vector<double>& v) {
    double q1 = empirical::quantile_of(v, 0.25);
    double q3 = empirical::quantile_of(v, 0.75);
    return (q3 - q1) / 1.349;
}

} // namespace

ScreeningStudyReport run_screening_study(const SimulationSpec& spec,
                                         const std::vector<MethodSpec>& methods,
                                         const screening::ScreeningConfig& base,
                                         unsigned threads) {
    if (spec.reps < 1) throw domain_error("need at least one replication");
    if (methods.empty()) throw domain_error("no screening methods requested");
    if (spec.example == Example::ex1_a1 || spec.example == Example::ex1_a2 ||
        spec.example == Example::ex2)
        throw domain_error("not a screening scenario");

    ScreeningStudyReport out;
    out.spec = spec;
    out.d_n = base.d_n > 0 ? base.d_n : screening::default_dn(spec.n);

    const std::size_t m_count = methods.size();
    const std::size_t reps = spec.reps;
    std::vector<std::size_t> actives = generate(spec, 0).active;
    const std::size_t a_count = actives.size();

    std::vector<std::vector<std::size_t>> mms(m_count,
                                              std::vector<std::size_t>(reps, 0));
    std::vector<std::vector<std::vector<std::size_t>>> ranks(
        m_count, std::vector<std::vector<std::size_t>>(
                     reps, std::vector<std::size_t>(a_count, 0)));

    parallel_for(reps, resolve_threads(threads), [&](std::size_t r) {
        SimData data = generate(spec, r);
        std::span<const double> y(data.y.data(),
                                  static_cast<std::size_t>(data.y.size()));
        const std::size_t p = static_cast<std::size_t>(data.X.cols());
        for (std::size_t m = 0; m < m_count; ++m) {
            screening::ScreeningConfig cfg = base;
            cfg.pair = methods[m].pair;
            cfg.mode = screening::ThresholdMode::top_dn;
            cfg.d_n = out.d_n;
            cfg.threads = 1;
            screening::ScreeningResult res;
            switch (methods[m].kind) {
            case MethodKind::cc_sis:
                res = screening::cc_sis(y, data.X, cfg);
                break;
            case MethodKind::cpc_case1:
                res = screening::cpc_sis_case1(y, data.X, cfg);
                break;
            case MethodKind::cpc_case2:
                res = screening::cpc_sis_case2(y, data.X, data.W, cfg);
                break;
            case MethodKind::cpc_case3:
                res = screening::cpc_sis_case3(y, data.X, data.W, cfg);
                break;
            case MethodKind::pearson_sis:
                res = screening::pearson_sis(y, data.X, cfg);
                break;
            case MethodKind::kendall_sis:
                res = screening::kendall_sis(y, data.X, cfg);
                break;
            }
            std::vector<std::size_t> position(p, 0);
            for (std::size_t k = 0; k < res.ranking.size(); ++k)
                position[res.ranking[k]] = k + 1;
            std::size_t worst = 0;
            for (std::size_t a = 0; a < a_count; ++a) {
                std::size_t pos = position[data.active[a]];
                ranks[m][r][a] = pos;
                worst = std::max(worst, pos);
            }
            mms[m][r] = worst;
        }
    });

    for (std::size_t m = 0; m < m_count; ++m) {
        MethodSummary s;
        s.label = method_label(methods[m]);
        s.mms_per_rep = mms[m];
        s.active_ranks_per_rep = ranks[m];
        std::vector<double> mv(reps);
        for (std::size_t r = 0; r < reps; ++r)
            mv[r] = static_cast<double>(mms[m][r]);
        s.mms_median = median_of(mv);
        s.mms_rsd = rsd_of(mv);
        std::size_t covered = 0;
        for (std::size_t r = 0; r < reps; ++r)
            if (mms[m][r] <= out.d_n) ++covered;
        s.coverage = static_cast<double>(covered) / static_cast<double>(reps);
        s.active_rank_median.resize(a_count);
        std::vector<double> rv(reps);
        for (std::size_t a = 0; a < a_count; ++a) {
            for (std::size_t r = 0; r < reps; ++r)
                rv[r] = static_cast<double>(ranks[m][r][a]);
            s.active_rank_median[a] = median_of(rv);
        }
        out.methods.push_back(std::move(s));
    }
    return out;
}

namespace {

void append_kv(std::string& s, const char* key, const std::string& value) {
    s += "# ";
    s += key;
    s += '=';
    s += value;
    s += '\n';
}

void append_spec_header(std::string& s, const SimulationSpec& spec,
                        const char* report_kind) {
    append_kv(s, "schema", "1");
    append_kv(s, "report", report_kind);
    append_kv(s, "example", example_name(spec.example));
    append_kv(s, "n", std::to_string(spec.n));
    append_kv(s, "p", std::to_string(spec.p));
    append_kv(s, "rho", dataio::format_double(spec.rho));
    append_kv(s, "c0", dataio::format_double(spec.c0));
    append_kv(s, "error", error_name(spec.error));
    append_kv(s, "tau", dataio::format_double(spec.pair.tau));
    append_kv(s, "iota", dataio::format_double(spec.pair.iota));
    append_kv(s, "level", dataio::format_double(spec.level));
    append_kv(s, "seed", std::to_string(spec.seed));
    append_kv(s, "reps", std::to_string(spec.reps));
}

} // namespace

std::string to_csv(const TestStudyReport& r) {
    std::string s;
    append_spec_header(s, r.spec, "test-study");
    append_kv(s, "rejections", std::to_string(r.rejections));
    append_kv(s, "rate", dataio::format_double(r.rate));
    s += "rep,reject\n";
    for (std::size_t i = 0; i < r.reject_flags.size(); ++i) {
        s += std::to_string(i + 1);
        s += ',';
        s += r.reject_flags[i] ? '1' : '0';
        s += '\n';
    }
    return s;
}

std::string to_table(const TestStudyReport& r) {
    char buf[256];
    std::string s = "equality test study\n";
    std::snprintf(buf, sizeof buf, "  %-10s %s\n", "example",
                  example_name(r.spec.example));
    s += buf;
    std::snprintf(buf, sizeof buf, "  %-10s n=%zu rho=%g c0=%g error=%s\n",
                  "setup", r.spec.n, r.spec.rho, r.spec.c0,
                  error_name(r.spec.error));
    s += buf;
    std::snprintf(buf, sizeof buf, "  %-10s (%g,%g) level=%g seed=%llu\n",
                  "pair", r.spec.pair.tau, r.spec.pair.iota, r.spec.level,
                  static_cast<unsigned long long>(r.spec.seed));
    s += buf;
    std::snprintf(buf, sizeof buf, "  %-10s %zu / %zu\n", "rejections",
                  r.rejections, r.reps);
    s += buf;
    std::snprintf(buf, sizeof buf, "  %-10s %.4f\n", "rate", r.rate);
    s += buf;
    return s;
}

std::string to_csv(const ScreeningStudyReport& r) {
    std::string s;
    append_spec_header(s, r.spec, "screening-study");
    append_kv(s, "d_n", std::to_string(r.d_n));
    std::size_t a_count =
        r.methods.empty() ? 0 : r.methods.front().active_rank_median.size();
    s += "method,mms_median,mms_rsd,coverage";
    for (std::size_t a = 0; a < a_count; ++a)
        s += ",rank_median_" + std::to_string(a + 1);
    s += '\n';
    for (const MethodSummary& m : r.methods) {
        s += '"';
        s += m.label;
        s += '"';
        s += ',' + dataio::format_double(m.mms_median);
        s += ',' + dataio::format_double(m.mms_rsd);
        s += ',' + dataio::format_double(m.coverage);
        for (double v : m.active_rank_median) s += ',' + dataio::format_double(v);
        s += '\n';
    }
    return s;
}

std::string to_table(const ScreeningStudyReport& r) {
    char buf[256];
    std::string s = "screening study\n";
    std::snprintf(buf, sizeof buf,
                  "  example=%s n=%zu p=%zu rho=%g error=%s reps=%zu seed=%llu "
                  "d_n=%zu\n",
                  example_name(r.spec.example), r.spec.n, r.spec.p, r.spec.rho,
                  error_name(r.spec.error), r.spec.reps,
                  static_cast<unsigned long long>(r.spec.seed), r.d_n);
    s += buf;
    std::size_t a_count =
        r.methods.empty() ? 0 : r.methods.front().active_rank_median.size();
    std::size_t width = 24;
    for (const MethodSummary& m : r.methods)
        width = std::max(width, m.label.size() + 2);
    std::snprintf(buf, sizeof buf, "  %-*s", static_cast<int>(width), "method");
    s += buf;
    for (std::size_t a = 0; a < a_count; ++a) {
        std::string h = "R" + std::to_string(a + 1);
        std::snprintf(buf, sizeof buf, " %6s", h.c_str());
        s += buf;
    }
    std::snprintf(buf, sizeof buf, " %14s %6s\n", "MMS(RSD)", "P");
    s += buf;
    for (const MethodSummary& m : r.methods) {
        std::snprintf(buf, sizeof buf, "  %-*s", static_cast<int>(width),
                      m.label.c_str());
        s += buf;
        for (double v : m.active_rank_median) {
            std::snprintf(buf, sizeof buf, " %6.4g", v);
            s += buf;
        }
        char mmsbuf[64];
        std::snprintf(mmsbuf, sizeof mmsbuf, "%.4g (%.4g)", m.mms_median,
                      m.mms_rsd);
        std::snprintf(buf, sizeof buf, " %14s %6.2f\n", mmsbuf, m.coverage);
        s += buf;
    }
    return s;
}

} // namespace cps::simbench
