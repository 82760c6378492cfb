#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cps/cc.hpp"
#include "cps/cpc.hpp"
#include "cps/dataio.hpp"
#include "cps/errors.hpp"
#include "cps/evaluation.hpp"
#include "cps/parallel.hpp"
#include "cps/screening.hpp"
#include "cps/simbench.hpp"
#include "cps/stats.hpp"

using json = nlohmann::ordered_json;

namespace {

using cps::dataio::format_double;

struct OutputTarget {
    std::string path;  // empty means stdout

    void write(const std::string& content) const {
        if (path.empty()) {
            std::cout << content;
            return;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw cps::io_error("cannot open '" + path + "' for writing");
        out << content;
        if (!out) throw cps::io_error("write to '" + path + "' failed");
    }
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

cps::cc::QuantilePair resolve_pair(const std::string& pair_str, double tau,
                                   double iota) {
    cps::cc::QuantilePair p{tau, iota};
    if (!pair_str.empty()) {
        double a = 0.0, b = 0.0;
        char trail = 0;
        if (std::sscanf(pair_str.c_str(), "%lf,%lf%c", &a, &b, &trail) != 2)
            throw cps::domain_error("cannot parse pair '" + pair_str +
                                    "'; expected two comma-separated levels");
        p.tau = a;
        p.iota = b;
    }
    return p;
}

std::string csv_quote(const std::string& s) {
    bool needs = false;
    for (char c : s)
        if (c == ',' || c == '"' || c == '\n' || c == '\r') needs = true;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::string join_sizes(const std::vector<std::size_t>& v, char sep,
                       std::size_t offset) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) s += sep;
        s += std::to_string(v[i] + offset);
    }
    return s;
}

enum class Format { table, csv, json_fmt };

Format parse_format(const std::string& s) {
    if (s == "table") return Format::table;
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json_fmt;
    throw cps::domain_error("unknown format '" + s + "'");
}

// ---------------------------------------------------------------- screen

struct ScreenArgs {
    std::string data;
    std::string response;
    std::string method = "cc";
    std::string conditioning;
    std::string pair_str;
    double tau = 0.5;
    double iota = 0.5;
    std::size_t top = 0;
    std::string mode = "top";
    double nu = 0.0;
    double dbar = 10.0;
    std::size_t ell = 3;
    unsigned threads = 0;
    std::string format = "table";
    std::string output;
};

struct ScreenRow {
    std::size_t rank = 0;
    std::size_t column = 0;  // 0-based X column
    double utility = 0.0;
    bool selected = false;
    bool has_stats = false;
    double estimate = 0.0;
    double z = 0.0;
    double p_value = 1.0;
};

int run_screen(const ScreenArgs& a) {
    cps::dataio::Dataset ds =
        cps::dataio::load_csv(a.data, a.response, split_list(a.conditioning));

    cps::screening::ScreeningConfig cfg;
    cfg.pair = resolve_pair(a.pair_str, a.tau, a.iota);
    cfg.d_n = a.top;
    if (a.mode == "top") cfg.mode = cps::screening::ThresholdMode::top_dn;
    else if (a.mode == "absolute") cfg.mode = cps::screening::ThresholdMode::absolute;
    else if (a.mode == "fdr") cfg.mode = cps::screening::ThresholdMode::fdr;
    else throw cps::domain_error("unknown threshold mode '" + a.mode + "'");
    cfg.nu_n = a.nu;
    cfg.dbar_n = a.dbar;
    cfg.ell = a.ell;
    cfg.threads = cps::resolve_threads(a.threads);

    std::span<const double> y(ds.y.data(), ds.n());
    const bool has_w = ds.W.cols() > 0;
    cps::screening::ScreeningResult res;
    if (a.method == "cc") res = cps::screening::cc_sis(y, ds.X, cfg);
    else if (a.method == "pearson") res = cps::screening::pearson_sis(y, ds.X, cfg);
    else if (a.method == "kendall") res = cps::screening::kendall_sis(y, ds.X, cfg);
    else if (a.method == "cpc-case1") {
        if (has_w)
            throw cps::domain_error(
                "cpc-case1 uses no external conditioning columns");
        res = cps::screening::cpc_sis_case1(y, ds.X, cfg);
    } else if (a.method == "cpc-case2")
        res = cps::screening::cpc_sis_case2(y, ds.X, ds.W, cfg);
    else if (a.method == "cpc-case3")
        res = cps::screening::cpc_sis_case3(y, ds.X, ds.W, cfg);
    else throw cps::domain_error("unknown method '" + a.method + "'");

    const std::size_t p = res.utilities.size();
    std::vector<bool> selected(p, false);
    for (std::size_t j : res.selected) selected[j] = true;

    // Inference columns: estimates, z and p for the selected covariates,
    // where the method carries a variance model.
    std::vector<ScreenRow> rows(p);
    const double root_n = std::sqrt(static_cast<double>(ds.n()));
    std::vector<std::vector<std::size_t>> cond_of(p);
    for (const auto& step : res.per_step_log)
        cond_of[step.chosen] = step.conditional_set;

    for (std::size_t k = 0; k < res.ranking.size(); ++k) {
        std::size_t j = res.ranking[k];
        ScreenRow& row = rows[k];
        row.rank = k + 1;
        row.column = j;
        row.utility = res.utilities[j];
        row.selected = selected[j];
        if (!row.selected) continue;
        std::span<const double> x(ds.X.col(static_cast<Eigen::Index>(j)).data(),
                                  ds.n());
        try {
            if (a.method == "cc") {
                row.estimate = cps::cc::estimate(y, x, cfg.pair).value;
                double omega = cps::cc::variance(y, x, cfg.pair, cfg.kernel);
                row.z = root_n * row.estimate / std::sqrt(omega);
                row.has_stats = true;
            } else if (a.method == "cpc-case2") {
                cps::cpc::ConditioningDesign design =
                    cps::cpc::ConditioningDesign::external(ds.W);
                cps::cpc::CpcEstimate est =
                    cps::cpc::estimate(y, x, design, cfg.pair, cfg.fit);
                double omega = cps::cpc::variance(design, est, cfg.kernel);
                row.estimate = est.value;
                row.z = root_n * est.value / std::sqrt(omega);
                row.has_stats = true;
            } else if (a.method == "cpc-case1" || a.method == "cpc-case3") {
                cps::cpc::ConditioningDesign design =
                    a.method == "cpc-case1"
                        ? cps::cpc::ConditioningDesign::covariate_subset(
                              ds.X, cond_of[j])
                        : cps::cpc::ConditioningDesign::mixed(ds.W, ds.X,
                                                             cond_of[j]);
                cps::cpc::CpcEstimate est =
                    cps::cpc::estimate(y, x, design, cfg.pair, cfg.fit);
                double omega = cps::cpc::variance(design, est, cfg.kernel);
                row.estimate = est.value;
                row.z = root_n * est.value / std::sqrt(omega);
                row.has_stats = true;
            }
        } catch (const cps::degenerate_variance_error&) {
            row.has_stats = false;
        }
        if (row.has_stats) row.p_value = cps::stats::two_sided_p(row.z);
    }

    Format fmt = parse_format(a.format);
    OutputTarget out{a.output};

    auto config_header = [&](std::string& s) {
        s += "# schema=1\n# command=screen\n";
        s += "# data=" + a.data + "\n# response=" + ds.response_name + "\n";
        s += "# method=" + a.method + "\n";
        s += "# tau=" + format_double(cfg.pair.tau) +
             " iota=" + format_double(cfg.pair.iota) + "\n";
        s += "# mode=" + a.mode + " nu=" + format_double(cfg.nu_n) +
             " dbar=" + format_double(cfg.dbar_n) +
             " ell=" + std::to_string(cfg.ell) + "\n";
        s += "# n=" + std::to_string(ds.n()) + " p=" + std::to_string(p) +
             " dropped=" + std::to_string(ds.n_dropped) + "\n";
        if (!ds.conditioning_names.empty()) {
            s += "# conditioning=";
            for (std::size_t i = 0; i < ds.conditioning_names.size(); ++i)
                s += (i ? "," : "") + ds.conditioning_names[i];
            s += '\n';
        }
        s += "# selected=" + std::to_string(res.selected.size()) +
             " threshold=" + format_double(res.threshold_used) + "\n";
        for (const std::string& note : res.notes) s += "# note " + note + "\n";
    };

    if (fmt == Format::csv) {
        std::string s;
        config_header(s);
        for (const auto& step : res.per_step_log)
            s += "# step iteration=" + std::to_string(step.iteration) +
                 " chosen=" + std::to_string(step.chosen + 1) +
                 " ridge=" + (step.ridge_used ? std::string("1") : std::string("0")) +
                 " set=" + join_sizes(step.conditional_set, ';', 1) + "\n";
        s += "rank,column,name,utility,estimate,z,p_value,selected\n";
        for (const ScreenRow& row : rows) {
            s += std::to_string(row.rank) + ',' +
                 std::to_string(row.column + 1) + ',' +
                 csv_quote(ds.covariate_names[row.column]) + ',' +
                 format_double(row.utility) + ',';
            if (row.has_stats)
                s += format_double(row.estimate) + ',' + format_double(row.z) +
                     ',' + format_double(row.p_value);
            else
                s += ",,";
            s += row.selected ? ",1\n" : ",0\n";
        }
        out.write(s);
    } else if (fmt == Format::json_fmt) {
        json doc;
        doc["schema"] = 1;
        doc["command"] = "screen";
        json cfgj;
        cfgj["data"] = a.data;
        cfgj["response"] = ds.response_name;
        cfgj["method"] = a.method;
        cfgj["tau"] = cfg.pair.tau;
        cfgj["iota"] = cfg.pair.iota;
        cfgj["mode"] = a.mode;
        cfgj["nu"] = cfg.nu_n;
        cfgj["dbar"] = cfg.dbar_n;
        cfgj["ell"] = cfg.ell;
        cfgj["conditioning"] = ds.conditioning_names;
        cfgj["n"] = ds.n();
        cfgj["p"] = p;
        cfgj["dropped"] = ds.n_dropped;
        doc["config"] = cfgj;
        doc["threshold"] = res.threshold_used;
        doc["notes"] = res.notes;
        json rowsj = json::array();
        for (const ScreenRow& row : rows) {
            json r;
            r["rank"] = row.rank;
            r["column"] = row.column + 1;
            r["name"] = ds.covariate_names[row.column];
            r["utility"] = row.utility;
            if (row.has_stats) {
                r["estimate"] = row.estimate;
                r["z"] = row.z;
                r["p_value"] = row.p_value;
            }
            r["selected"] = row.selected;
            rowsj.push_back(std::move(r));
        }
        doc["ranking"] = std::move(rowsj);
        json steps = json::array();
        for (const auto& step : res.per_step_log) {
            json sj;
            sj["iteration"] = step.iteration;
            sj["chosen"] = step.chosen + 1;
            json set = json::array();
            for (std::size_t c : step.conditional_set) set.push_back(c + 1);
            sj["conditional_set"] = std::move(set);
            sj["ridge_used"] = step.ridge_used;
            steps.push_back(std::move(sj));
        }
        doc["per_step_log"] = std::move(steps);
        out.write(doc.dump(2) + "\n");
    } else {
        std::string s;
        config_header(s);
        char buf[256];
        std::size_t name_w = 10;
        std::size_t shown = 0;
        for (const ScreenRow& row : rows) {
            if (!row.selected) continue;
            ++shown;
            name_w = std::max(name_w,
                              std::min<std::size_t>(
                                  ds.covariate_names[row.column].size(), 28));
        }
        std::snprintf(buf, sizeof buf, "%5s %7s %-*s %12s %12s %9s %11s\n",
                      "rank", "column", static_cast<int>(name_w), "name",
                      "utility", "estimate", "z", "p");
        s += buf;
        for (const ScreenRow& row : rows) {
            if (!row.selected) continue;
            std::string zs = "-", ps = "-", es = "-";
            if (row.has_stats) {
                char t[48];
                std::snprintf(t, sizeof t, "%.4g", row.estimate);
                es = t;
                std::snprintf(t, sizeof t, "%.4g", row.z);
                zs = t;
                std::snprintf(t, sizeof t, "%.3g", row.p_value);
                ps = t;
            }
            std::snprintf(buf, sizeof buf, "%5zu %7zu %-*s %12.6g %12s %9s %11s\n",
                          row.rank, row.column + 1, static_cast<int>(name_w),
                          ds.covariate_names[row.column].c_str(), row.utility,
                          es.c_str(), zs.c_str(), ps.c_str());
            s += buf;
        }
        if (shown == 0) s += "  (nothing selected)\n";
        if (!res.per_step_log.empty()) {
            s += "iterative steps\n";
            for (const auto& step : res.per_step_log) {
                std::snprintf(buf, sizeof buf, "  %3zu -> column %zu%s  set {%s}\n",
                              step.iteration, step.chosen + 1,
                              step.ridge_used ? " (ridge)" : "",
                              join_sizes(step.conditional_set, ',', 1).c_str());
                s += buf;
            }
        }
        out.write(s);
    }
    return 0;
}

// ------------------------------------------------------------------ test

struct TestArgs {
    std::string data;
    std::string response;
    std::string x;
    std::string equal;
    std::string conditioning;
    std::string pair_str;
    double tau = 0.5;
    double iota = 0.5;
    std::string format = "table";
    std::string output;
};

int run_test(const TestArgs& a) {
    if (a.x.empty() == a.equal.empty())
        throw cps::domain_error("pass exactly one of --x or --equal");
    cps::dataio::Dataset ds =
        cps::dataio::load_csv(a.data, a.response, split_list(a.conditioning));
    cps::cc::QuantilePair pair = resolve_pair(a.pair_str, a.tau, a.iota);
    std::span<const double> y(ds.y.data(), ds.n());

    auto col = [&](const std::string& name) -> std::span<const double> {
        for (std::size_t j = 0; j < ds.covariate_names.size(); ++j)
            if (ds.covariate_names[j] == name)
                return {ds.X.col(static_cast<Eigen::Index>(j)).data(), ds.n()};
        throw cps::schema_error("covariate '" + name + "' not found");
    };

    const bool conditional = ds.W.cols() > 0;
    std::string kind;
    json result;
    std::string csv_head, csv_row;

    if (!a.x.empty()) {
        kind = conditional ? "cpc-zero" : "cc-zero";
        double estimate, variance, z, p_value;
        if (conditional) {
            cps::cpc::ConditioningDesign design =
                cps::cpc::ConditioningDesign::external(ds.W);
            cps::cpc::TestResult r =
                cps::cpc::test_zero(y, col(a.x), design, pair);
            estimate = r.estimate.value;
            variance = r.omega;
            z = r.z;
            p_value = r.p_value;
        } else {
            cps::cc::TestResult r = cps::cc::test_zero(y, col(a.x), pair);
            estimate = r.estimate.value;
            variance = r.estimate.variance;
            z = r.z;
            p_value = r.p_value;
        }
        result["estimate"] = estimate;
        result["variance"] = variance;
        result["z"] = z;
        result["p_value"] = p_value;
        csv_head = "kind,covariate,estimate,variance,z,p_value";
        csv_row = kind + ',' + csv_quote(a.x) + ',' + format_double(estimate) +
                  ',' + format_double(variance) + ',' + format_double(z) + ',' +
                  format_double(p_value);
    } else {
        std::vector<std::string> names = split_list(a.equal);
        if (names.size() != 2)
            throw cps::domain_error("--equal needs exactly two column names");
        kind = conditional ? "cpc-equal" : "cc-equal";
        double e1, e2, delta, xi, z, p_value;
        if (conditional) {
            cps::cpc::ConditioningDesign design =
                cps::cpc::ConditioningDesign::external(ds.W);
            cps::cpc::EqualTestResult r =
                cps::cpc::test_equal(y, col(names[0]), col(names[1]), design, pair);
            e1 = r.first.value;
            e2 = r.second.value;
            delta = r.delta;
            xi = r.xi;
            z = r.z;
            p_value = r.p_value;
        } else {
            cps::cc::EqualTestResult r =
                cps::cc::test_equal(y, col(names[0]), col(names[1]), pair);
            e1 = r.first.value;
            e2 = r.second.value;
            delta = r.delta;
            xi = r.xi;
            z = r.z;
            p_value = r.p_value;
        }
        result["estimate_first"] = e1;
        result["estimate_second"] = e2;
        result["delta"] = delta;
        result["variance"] = xi;
        result["z"] = z;
        result["p_value"] = p_value;
        csv_head = "kind,first,second,estimate_first,estimate_second,delta,"
                   "variance,z,p_value";
        csv_row = kind + ',' + csv_quote(names[0]) + ',' + csv_quote(names[1]) +
                  ',' + format_double(e1) + ',' + format_double(e2) + ',' +
                  format_double(delta) + ',' + format_double(xi) + ',' +
                  format_double(z) + ',' + format_double(p_value);
    }

    Format fmt = parse_format(a.format);
    OutputTarget out{a.output};
    std::string header;
    header += "# schema=1\n# command=test\n# data=" + a.data + "\n";
    header += "# response=" + ds.response_name + "\n";
    header += "# kind=" + kind + "\n";
    header += "# tau=" + format_double(pair.tau) +
              " iota=" + format_double(pair.iota) + "\n";
    header += "# n=" + std::to_string(ds.n()) +
              " dropped=" + std::to_string(ds.n_dropped) + "\n";

    if (fmt == Format::csv) {
        out.write(header + csv_head + "\n" + csv_row + "\n");
    } else if (fmt == Format::json_fmt) {
        json doc;
        doc["schema"] = 1;
        doc["command"] = "test";
        json cfgj;
        cfgj["data"] = a.data;
        cfgj["response"] = ds.response_name;
        cfgj["kind"] = kind;
        cfgj["tau"] = pair.tau;
        cfgj["iota"] = pair.iota;
        cfgj["conditioning"] = ds.conditioning_names;
        cfgj["n"] = ds.n();
        cfgj["dropped"] = ds.n_dropped;
        doc["config"] = cfgj;
        doc["result"] = result;
        out.write(doc.dump(2) + "\n");
    } else {
        std::string s = header;
        for (auto& [key, value] : result.items()) {
            char buf[96];
            std::snprintf(buf, sizeof buf, "  %-16s %.6g\n", key.c_str(),
                          value.get<double>());
            s += buf;
        }
        out.write(s);
    }
    return 0;
}

// -------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string example;
    std::size_t n = 200;
    std::size_t p = 0;
    double rho = 0.0;
    double c0 = 0.0;
    std::string error = "normal";
    std::size_t reps = 200;
    std::uint64_t seed = 1;
    double level = 0.05;
    std::string pair_str;
    double tau = 0.5;
    double iota = 0.5;
    std::string methods;
    std::size_t dn = 0;
    std::size_t ell = 3;
    unsigned threads = 0;
    std::string format = "table";
    std::string output;
};

int run_simulate(const SimulateArgs& a) {
    namespace sb = cps::simbench;
    sb::SimulationSpec spec;
    if (!sb::parse_example(a.example, spec.example))
        throw cps::domain_error("unknown example '" + a.example + "'");
    spec.n = a.n;
    spec.p = a.p;
    spec.rho = a.rho;
    spec.c0 = a.c0;
    if (!sb::parse_error_dist(a.error, spec.error))
        throw cps::domain_error("unknown error distribution '" + a.error + "'");
    spec.reps = a.reps;
    spec.seed = a.seed;
    spec.level = a.level;
    spec.pair = resolve_pair(a.pair_str, a.tau, a.iota);

    const bool testing = spec.example == sb::Example::ex1_a1 ||
                         spec.example == sb::Example::ex1_a2 ||
                         spec.example == sb::Example::ex2;

    Format fmt = parse_format(a.format);
    OutputTarget out{a.output};
    unsigned threads = cps::resolve_threads(a.threads);

    if (testing) {
        sb::TestStudyReport report = sb::run_test_study(spec, threads);
        if (fmt == Format::csv) out.write(sb::to_csv(report));
        else if (fmt == Format::table) out.write(sb::to_table(report));
        else {
            json doc;
            doc["schema"] = 1;
            doc["command"] = "simulate";
            doc["report"] = "test-study";
            json cfgj;
            cfgj["example"] = sb::example_name(spec.example);
            cfgj["n"] = spec.n;
            cfgj["rho"] = spec.rho;
            cfgj["c0"] = spec.c0;
            cfgj["error"] = sb::error_name(spec.error);
            cfgj["tau"] = spec.pair.tau;
            cfgj["iota"] = spec.pair.iota;
            cfgj["level"] = spec.level;
            cfgj["seed"] = spec.seed;
            cfgj["reps"] = spec.reps;
            doc["config"] = cfgj;
            doc["rejections"] = report.rejections;
            doc["rate"] = report.rate;
            json flags = json::array();
            for (std::uint8_t f : report.reject_flags)
                flags.push_back(static_cast<int>(f));
            doc["reject_flags"] = std::move(flags);
            out.write(doc.dump(2) + "\n");
        }
        return 0;
    }

    std::string method_list = a.methods;
    if (method_list.empty()) {
        switch (spec.example) {
        case sb::Example::ex4_d1:
        case sb::Example::ex4_d2: method_list = "cpc-case1"; break;
        case sb::Example::ex5: method_list = "cpc-case2"; break;
        default: method_list = "cc"; break;
        }
    }
    std::vector<sb::MethodSpec> methods;
    for (const std::string& name : split_list(method_list)) {
        sb::MethodSpec m;
        m.pair = spec.pair;
        if (name == "cc") m.kind = sb::MethodKind::cc_sis;
        else if (name == "pearson") m.kind = sb::MethodKind::pearson_sis;
        else if (name == "kendall") m.kind = sb::MethodKind::kendall_sis;
        else if (name == "cpc-case1") m.kind = sb::MethodKind::cpc_case1;
        else if (name == "cpc-case2") m.kind = sb::MethodKind::cpc_case2;
        else if (name == "cpc-case3") m.kind = sb::MethodKind::cpc_case3;
        else throw cps::domain_error("unknown method '" + name + "'");
        methods.push_back(std::move(m));
    }

    cps::screening::ScreeningConfig base;
    base.d_n = a.dn;
    base.ell = a.ell;
    sb::ScreeningStudyReport report =
        sb::run_screening_study(spec, methods, base, threads);

    if (fmt == Format::csv) out.write(sb::to_csv(report));
    else if (fmt == Format::table) out.write(sb::to_table(report));
    else {
        json doc;
        doc["schema"] = 1;
        doc["command"] = "simulate";
        doc["report"] = "screening-study";
        json cfgj;
        cfgj["example"] = sb::example_name(spec.example);
        cfgj["n"] = spec.n;
        cfgj["p"] = spec.p;
        cfgj["rho"] = spec.rho;
        cfgj["c0"] = spec.c0;
        cfgj["error"] = sb::error_name(spec.error);
        cfgj["tau"] = spec.pair.tau;
        cfgj["iota"] = spec.pair.iota;
        cfgj["seed"] = spec.seed;
        cfgj["reps"] = spec.reps;
        cfgj["d_n"] = report.d_n;
        doc["config"] = cfgj;
        json ms = json::array();
        for (const sb::MethodSummary& m : report.methods) {
            json mj;
            mj["label"] = m.label;
            mj["mms_median"] = m.mms_median;
            mj["mms_rsd"] = m.mms_rsd;
            mj["coverage"] = m.coverage;
            mj["rank_medians"] = m.active_rank_median;
            mj["mms_per_rep"] = m.mms_per_rep;
            mj["active_ranks_per_rep"] = m.active_ranks_per_rep;
            ms.push_back(std::move(mj));
        }
        doc["methods"] = std::move(ms);
        out.write(doc.dump(2) + "\n");
    }
    return 0;
}

// -------------------------------------------------------------- outliers

struct OutlierArgs {
    std::string data;
    std::string response;
    double threshold = 3.5;
    bool one_sided = false;
    std::string format = "table";
    std::string output;
};

int run_outliers(const OutlierArgs& a) {
    cps::dataio::Dataset ds = cps::dataio::load_csv(a.data, a.response);
    cps::dataio::OutlierReport report = cps::dataio::ih_outlier_report(
        ds.X, ds.covariate_names, a.threshold, !a.one_sided);

    Format fmt = parse_format(a.format);
    OutputTarget out{a.output};

    std::string header;
    header += "# schema=1\n# command=outliers\n# data=" + a.data + "\n";
    header += "# response=" + ds.response_name + "\n";
    header += "# threshold=" + format_double(report.threshold) +
              " two_sided=" + (report.two_sided ? std::string("1") : std::string("0")) +
              "\n";
    header += "# n=" + std::to_string(ds.n()) +
              " p=" + std::to_string(report.columns.size()) +
              " dropped=" + std::to_string(ds.n_dropped) + "\n";
    header += "# fraction_with_outliers=" +
              format_double(report.fraction_columns_with_outliers) + "\n";

    if (fmt == Format::csv) {
        std::string s = header;
        s += "name,column,median,mad,degenerate,outlier_count,outlier_rows\n";
        for (const auto& col : report.columns) {
            s += csv_quote(col.name) + ',' + std::to_string(col.index + 1) +
                 ',' + format_double(col.median) + ',' +
                 format_double(col.mad) + ',' + (col.degenerate ? "1" : "0") +
                 ',' + std::to_string(col.outlier_rows.size()) + ',' +
                 join_sizes(col.outlier_rows, ';', 1) + '\n';
        }
        out.write(s);
    } else if (fmt == Format::json_fmt) {
        json doc;
        doc["schema"] = 1;
        doc["command"] = "outliers";
        json cfgj;
        cfgj["data"] = a.data;
        cfgj["response"] = ds.response_name;
        cfgj["threshold"] = report.threshold;
        cfgj["two_sided"] = report.two_sided;
        cfgj["n"] = ds.n();
        cfgj["p"] = report.columns.size();
        cfgj["dropped"] = ds.n_dropped;
        doc["config"] = cfgj;
        doc["fraction_with_outliers"] = report.fraction_columns_with_outliers;
        json cols = json::array();
        for (const auto& col : report.columns) {
            json cj;
            cj["name"] = col.name;
            cj["column"] = col.index + 1;
            cj["median"] = col.median;
            cj["mad"] = col.mad;
            cj["degenerate"] = col.degenerate;
            json rows = json::array();
            for (std::size_t r : col.outlier_rows) rows.push_back(r + 1);
            cj["outlier_rows"] = std::move(rows);
            cols.push_back(std::move(cj));
        }
        doc["columns"] = std::move(cols);
        out.write(doc.dump(2) + "\n");
    } else {
        std::string s = header;
        char buf[256];
        std::size_t flagged = 0, degenerate = 0;
        for (const auto& col : report.columns) {
            if (!col.outlier_rows.empty()) ++flagged;
            if (col.degenerate) ++degenerate;
        }
        std::snprintf(buf, sizeof buf,
                      "  columns=%zu flagged=%zu degenerate=%zu\n",
                      report.columns.size(), flagged, degenerate);
        s += buf;
        for (const auto& col : report.columns) {
            if (col.outlier_rows.empty() && !col.degenerate) continue;
            if (col.degenerate) {
                std::snprintf(buf, sizeof buf, "  %-24s degenerate (zero spread)\n",
                              col.name.c_str());
            } else {
                std::snprintf(buf, sizeof buf, "  %-24s rows %s\n",
                              col.name.c_str(),
                              join_sizes(col.outlier_rows, ',', 1).c_str());
            }
            s += buf;
        }
        out.write(s);
    }
    return 0;
}

// -------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string data;
    std::string response;
    std::string columns;
    std::string indices;
    std::size_t top = 0;
    std::string method = "cc";
    std::string pair_str;
    double tau = 0.5;
    double iota = 0.5;
    std::size_t partitions = 500;
    double ratio = 0.8;
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::string format = "table";
    std::string output;
};

int run_evaluate(const EvaluateArgs& a) {
    int picks = (!a.columns.empty() ? 1 : 0) + (!a.indices.empty() ? 1 : 0) +
                (a.top > 0 ? 1 : 0);
    if (picks != 1)
        throw cps::domain_error(
            "pass exactly one of --columns, --indices or --top");
    cps::dataio::Dataset ds = cps::dataio::load_csv(a.data, a.response);
    std::span<const double> y(ds.y.data(), ds.n());
    const std::size_t p = static_cast<std::size_t>(ds.X.cols());

    std::vector<std::size_t> selected;
    if (!a.columns.empty()) {
        for (const std::string& name : split_list(a.columns)) {
            std::size_t j = p;
            for (std::size_t k = 0; k < p; ++k)
                if (ds.covariate_names[k] == name) j = k;
            if (j == p)
                throw cps::schema_error("covariate '" + name + "' not found");
            selected.push_back(j);
        }
    } else if (!a.indices.empty()) {
        for (const std::string& tok : split_list(a.indices)) {
            char* end = nullptr;
            long v = std::strtol(tok.c_str(), &end, 10);
            if (end == tok.c_str() || *end != '\0' || v < 1 ||
                static_cast<std::size_t>(v) > p)
                throw cps::domain_error("bad column index '" + tok + "'");
            selected.push_back(static_cast<std::size_t>(v - 1));
        }
    } else {
        cps::screening::ScreeningConfig cfg;
        cfg.pair = resolve_pair(a.pair_str, a.tau, a.iota);
        cfg.d_n = a.top;
        cfg.threads = cps::resolve_threads(a.threads);
        cps::screening::ScreeningResult res;
        if (a.method == "cc") res = cps::screening::cc_sis(y, ds.X, cfg);
        else if (a.method == "pearson")
            res = cps::screening::pearson_sis(y, ds.X, cfg);
        else if (a.method == "kendall")
            res = cps::screening::kendall_sis(y, ds.X, cfg);
        else
            throw cps::domain_error("evaluate --top supports the marginal "
                                    "methods cc, pearson and kendall");
        selected = res.selected;
    }

    cps::evaluation::PartitionConfig pc;
    pc.partitions = a.partitions;
    pc.train_fraction = a.ratio;
    pc.seed = a.seed;
    cps::evaluation::PredictionErrorReport report =
        cps::evaluation::prediction_error(y, ds.X, selected, pc);

    Format fmt = parse_format(a.format);
    OutputTarget out{a.output};
    std::string cols_line = join_sizes(selected, ';', 1);

    std::string header;
    header += "# schema=1\n# command=evaluate\n# data=" + a.data + "\n";
    header += "# response=" + ds.response_name + "\n";
    header += "# columns=" + cols_line + "\n";
    header += "# partitions=" + std::to_string(report.partitions) +
              " ratio=" + format_double(pc.train_fraction) +
              " seed=" + std::to_string(pc.seed) + "\n";
    header += "# n=" + std::to_string(ds.n()) +
              " train_size=" + std::to_string(report.train_size) +
              " k=" + std::to_string(selected.size()) +
              " ridge=" + (report.ridge_used ? std::string("1") : std::string("0")) +
              "\n";
    header += "# pe_quantile=" + format_double(report.pe_quantile) + "\n";
    header += "# pe_ols=" + format_double(report.pe_ols) + "\n";

    if (fmt == Format::csv) {
        std::string s = header;
        s += "partition,pe_quantile,pe_ols\n";
        for (std::size_t i = 0; i < report.partitions; ++i)
            s += std::to_string(i + 1) + ',' +
                 format_double(report.pe_quantile_per_partition[i]) + ',' +
                 format_double(report.pe_ols_per_partition[i]) + '\n';
        out.write(s);
    } else if (fmt == Format::json_fmt) {
        json doc;
        doc["schema"] = 1;
        doc["command"] = "evaluate";
        json cfgj;
        cfgj["data"] = a.data;
        cfgj["response"] = ds.response_name;
        json cols = json::array();
        for (std::size_t j : selected) cols.push_back(j + 1);
        cfgj["columns"] = std::move(cols);
        cfgj["partitions"] = report.partitions;
        cfgj["ratio"] = pc.train_fraction;
        cfgj["seed"] = pc.seed;
        cfgj["n"] = ds.n();
        cfgj["train_size"] = report.train_size;
        doc["config"] = cfgj;
        doc["pe_quantile"] = report.pe_quantile;
        doc["pe_ols"] = report.pe_ols;
        doc["ridge_used"] = report.ridge_used;
        doc["pe_quantile_per_partition"] = report.pe_quantile_per_partition;
        doc["pe_ols_per_partition"] = report.pe_ols_per_partition;
        out.write(doc.dump(2) + "\n");
    } else {
        std::string s = header;
        char buf[96];
        std::snprintf(buf, sizeof buf, "  %-14s %.6g\n", "pe_quantile",
                      report.pe_quantile);
        s += buf;
        std::snprintf(buf, sizeof buf, "  %-14s %.6g\n", "pe_ols", report.pe_ols);
        s += buf;
        out.write(s);
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"copula correlation screening toolkit"};
    app.require_subcommand(1);

    ScreenArgs sa;
    auto* screen = app.add_subcommand("screen", "rank covariates for a response");
    screen->add_option("--data", sa.data, "input CSV file")->required();
    screen->add_option("--response", sa.response, "response column name")->required();
    screen->add_option("--method", sa.method,
                       "cc, pearson, kendall, cpc-case1, cpc-case2, cpc-case3");
    screen->add_option("--conditioning", sa.conditioning,
                       "comma-separated conditioning column names");
    screen->add_option("--tau", sa.tau, "response-side quantile level");
    screen->add_option("--iota", sa.iota, "covariate-side quantile level");
    screen->add_option("--pair", sa.pair_str, "both levels as tau,iota");
    screen->add_option("--top", sa.top, "model size (0 = floor(n/log n))");
    screen->add_option("--mode", sa.mode, "top, absolute or fdr");
    screen->add_option("--nu", sa.nu, "absolute-mode utility cutoff");
    screen->add_option("--dbar", sa.dbar, "fdr-mode tolerated false count");
    screen->add_option("--ell", sa.ell, "per-covariate companion set size");
    screen->add_option("--threads", sa.threads, "worker threads (0 = auto)");
    screen->add_option("--format", sa.format, "table, csv or json");
    screen->add_option("--output", sa.output, "write to file instead of stdout");

    TestArgs ta;
    auto* test = app.add_subcommand("test", "correlation hypothesis tests");
    test->add_option("--data", ta.data, "input CSV file")->required();
    test->add_option("--response", ta.response, "response column name")->required();
    test->add_option("--x", ta.x, "covariate for the zero-correlation test");
    test->add_option("--equal", ta.equal,
                     "two covariates for the equality test, comma-separated");
    test->add_option("--conditioning", ta.conditioning,
                     "conditioning column names (switches to the conditional test)");
    test->add_option("--tau", ta.tau, "response-side quantile level");
    test->add_option("--iota", ta.iota, "covariate-side quantile level");
    test->add_option("--pair", ta.pair_str, "both levels as tau,iota");
    test->add_option("--format", ta.format, "table, csv or json");
    test->add_option("--output", ta.output, "write to file instead of stdout");

    SimulateArgs ma;
    auto* sim = app.add_subcommand("simulate", "benchmark studies");
    sim->add_option("--example", ma.example, "scenario name")->required();
    sim->add_option("--n", ma.n, "sample size");
    sim->add_option("--p", ma.p, "covariate count (0 = scenario default)");
    sim->add_option("--rho", ma.rho, "correlation parameter");
    sim->add_option("--c0", ma.c0, "signal offset");
    sim->add_option("--error", ma.error,
                    "normal, cauchy, scaled-cauchy or scaled-t3");
    sim->add_option("--reps", ma.reps, "replication count");
    sim->add_option("--seed", ma.seed, "base seed");
    sim->add_option("--level", ma.level, "test significance level");
    sim->add_option("--tau", ma.tau, "response-side quantile level");
    sim->add_option("--iota", ma.iota, "covariate-side quantile level");
    sim->add_option("--pair", ma.pair_str, "both levels as tau,iota");
    sim->add_option("--methods", ma.methods,
                    "screening methods, comma-separated");
    sim->add_option("--dn", ma.dn, "model size (0 = floor(n/log n))");
    sim->add_option("--ell", ma.ell, "per-covariate companion set size");
    sim->add_option("--threads", ma.threads, "worker threads (0 = auto)");
    sim->add_option("--format", ma.format, "table, csv or json");
    sim->add_option("--output", ma.output, "write to file instead of stdout");

    OutlierArgs oa;
    auto* outl = app.add_subcommand("outliers", "robust per-column outlier scan");
    outl->add_option("--data", oa.data, "input CSV file")->required();
    outl->add_option("--response", oa.response, "response column name")->required();
    outl->add_option("--threshold", oa.threshold, "score cutoff");
    outl->add_flag("--one-sided", oa.one_sided, "flag high side only");
    outl->add_option("--format", oa.format, "table, csv or json");
    outl->add_option("--output", oa.output, "write to file instead of stdout");

    EvaluateArgs ea;
    auto* ev = app.add_subcommand("evaluate", "prediction error of a model");
    ev->add_option("--data", ea.data, "input CSV file")->required();
    ev->add_option("--response", ea.response, "response column name")->required();
    ev->add_option("--columns", ea.columns, "covariate names, comma-separated");
    ev->add_option("--indices", ea.indices, "covariate indices, comma-separated");
    ev->add_option("--top", ea.top, "screen first and keep this many");
    ev->add_option("--method", ea.method, "screening method for --top");
    ev->add_option("--tau", ea.tau, "response-side quantile level");
    ev->add_option("--iota", ea.iota, "covariate-side quantile level");
    ev->add_option("--pair", ea.pair_str, "both levels as tau,iota");
    ev->add_option("--partitions", ea.partitions, "random splits");
    ev->add_option("--ratio", ea.ratio, "training fraction");
    ev->add_option("--seed", ea.seed, "partition seed");
    ev->add_option("--threads", ea.threads, "worker threads (0 = auto)");
    ev->add_option("--format", ea.format, "table, csv or json");
    ev->add_option("--output", ea.output, "write to file instead of stdout");

    try {
        app.parse(argc, argv);
        if (screen->parsed()) return run_screen(sa);
        if (test->parsed()) return run_test(ta);
        if (sim->parsed()) return run_simulate(ma);
        if (outl->parsed()) return run_outliers(oa);
        if (ev->parsed()) return run_evaluate(ea);
        return 2;
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const cps::schema_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const cps::parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
