#include "cps/cpc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "cps/errors.hpp"
#include "cps/stats.hpp"

namespace cps::cpc {

namespace {

void validate_pair(const QuantilePair& p) {
    if (!(p.tau > 0.0) || !(p.tau < 1.0) || !(p.iota > 0.0) || !(p.iota < 1.0))
        throw domain_error("quantile pair must lie strictly inside (0, 1)^2");
}

QuantilePair clamp_pair(QuantilePair p) {
    validate_pair(p);
    p.tau = std::clamp(p.tau, 0.05, 0.95);
    p.iota = std::clamp(p.iota, 0.05, 0.95);
    return p;
}

double norm_const(const QuantilePair& p) {
    return std::sqrt(p.tau * (1.0 - p.tau) * p.iota * (1.0 - p.iota));
}

Eigen::VectorXd ridge_solve(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    Eigen::Index q = A.rows();
    double base = std::abs(A.trace()) / static_cast<double>(q);
    if (!(base > 0.0)) base = 1.0;
    double lambda = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd M = A;
        if (lambda > 0.0) M.diagonal().array() += lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd x = ldlt.solve(b);
            if (x.allFinite()) {
                double rel = (M * x - b).norm() / (1.0 + b.norm());
                if (rel < 1e-6) return x;
            }
        }
        lambda = lambda == 0.0 ? 1e-8 * base : lambda * 100.0;
    }
    throw degenerate_variance_error("plug-in system stayed singular");
}

} // namespace

ConditioningDesign ConditioningDesign::constant_only(std::size_t n) {
    ConditioningDesign d;
    d.Z = Eigen::MatrixXd::Ones(static_cast<Eigen::Index>(n), 1);
    return d;
}

ConditioningDesign ConditioningDesign::external(const Eigen::MatrixXd& W) {
    ConditioningDesign d;
    d.Z.resize(W.rows(), W.cols() + 1);
    d.Z.col(0).setOnes();
    d.Z.rightCols(W.cols()) = W;
    return d;
}

ConditioningDesign ConditioningDesign::covariate_subset(
    const Eigen::MatrixXd& X, std::span<const std::size_t> idx) {
    ConditioningDesign d;
    d.Z.resize(X.rows(), static_cast<Eigen::Index>(idx.size()) + 1);
    d.Z.col(0).setOnes();
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= static_cast<std::size_t>(X.cols()))
            throw domain_error("conditioning column index out of range");
        d.Z.col(static_cast<Eigen::Index>(k) + 1) =
            X.col(static_cast<Eigen::Index>(idx[k]));
    }
    return d;
}

ConditioningDesign ConditioningDesign::mixed(const Eigen::MatrixXd& W,
                                             const Eigen::MatrixXd& X,
                                             std::span<const std::size_t> idx) {
    if (W.rows() != X.rows())
        throw domain_error("conditioning blocks must have matching rows");
    ConditioningDesign d;
    d.Z.resize(X.rows(),
               W.cols() + static_cast<Eigen::Index>(idx.size()) + 1);
    d.Z.col(0).setOnes();
    d.Z.middleCols(1, W.cols()) = W;
    for (std::size_t k = 0; k < idx.size(); ++k) {
        if (idx[k] >= static_cast<std::size_t>(X.cols()))
            throw domain_error("conditioning column index out of range");
        d.Z.col(W.cols() + static_cast<Eigen::Index>(k) + 1) =
            X.col(static_cast<Eigen::Index>(idx[k]));
    }
    return d;
}

void ConditioningDesign::validate() const {
    if (Z.rows() < 1 || Z.cols() < 1)
        throw domain_error("conditioning design is empty");
    for (Eigen::Index i = 0; i < Z.rows(); ++i)
        if (Z(i, 0) != 1.0)
            throw domain_error("conditioning design must start with an intercept column");
}

namespace {

void check_sizes(std::span<const double> y, const ConditioningDesign& design) {
    design.validate();
    if (y.size() != design.n())
        throw domain_error("response and design lengths differ");
    if (design.n() <= design.q() + 2)
        throw design_too_large_error(
            "conditional design has too many columns for the sample size");
}

double value_from_residuals(const Eigen::VectorXd& ry, const Eigen::VectorXd& rx,
                            const QuantilePair& pair) {
    double s = norm_const(pair);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < ry.size(); ++i) {
        double py = pair.tau - (ry[i] <= 0.0 ? 1.0 : 0.0);
        double px = pair.iota - (rx[i] <= 0.0 ? 1.0 : 0.0);
        sum += py * px;
    }
    return sum / (static_cast<double>(ry.size()) * s);
}

} // namespace

CpcEstimate estimate(std::span<const double> y, std::span<const double> x,
                     const ConditioningDesign& design, QuantilePair pair,
                     const quantreg::FitOptions& fit) {
    validate_pair(pair);
    check_sizes(y, design);
    Eigen::Map<const Eigen::VectorXd> ym(y.data(),
                                         static_cast<Eigen::Index>(y.size()));
    quantreg::QuantRegFit y_fit = quantreg::fit(design.Z, ym, pair.tau, fit);
    return estimate_with_y_fit(y_fit, x, design, pair, fit);
}

CpcEstimate estimate_with_y_fit(const quantreg::QuantRegFit& y_fit,
                                std::span<const double> x,
                                const ConditioningDesign& design,
                                QuantilePair pair,
                                const quantreg::FitOptions& fit) {
    validate_pair(pair);
    check_sizes(x, design);
    if (y_fit.residuals.size() != static_cast<Eigen::Index>(x.size()))
        throw domain_error("shared response fit does not match the sample");
    Eigen::Map<const Eigen::VectorXd> xm(x.data(),
                                         static_cast<Eigen::Index>(x.size()));
    CpcEstimate est;
    est.pair = pair;
    est.n = x.size();
    est.y_fit = y_fit;
    est.x_fit = quantreg::fit(design.Z, xm, pair.iota, fit);
    est.value = value_from_residuals(est.y_fit.residuals, est.x_fit.residuals, pair);
    return est;
}

InfluencePieces influence(const ConditioningDesign& design,
                          const CpcEstimate& est,
                          const empirical::KernelConfig& kernel) {
    design.validate();
    const Eigen::Index n = design.Z.rows();
    if (est.y_fit.residuals.size() != n || est.x_fit.residuals.size() != n)
        throw domain_error("estimate does not match the design");

    const Eigen::VectorXd& ry = est.y_fit.residuals;
    const Eigen::VectorXd& rx = est.x_fit.residuals;
    const double tau = est.pair.tau;
    const double iota = est.pair.iota;
    const double s = norm_const(est.pair);

    std::span<const double> ry_s(ry.data(), static_cast<std::size_t>(n));
    std::span<const double> rx_s(rx.data(), static_cast<std::size_t>(n));

    std::vector<double> wy = empirical::nw_weights(ry_s, 0.0, kernel);
    std::vector<double> wx = empirical::nw_weights(rx_s, 0.0, kernel);
    double f0y = empirical::kde_at_zero(ry_s, kernel);
    double f0x = empirical::kde_at_zero(rx_s, kernel);

    Eigen::VectorXd iy(n), ix(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        iy[i] = ry[i] <= 0.0 ? 1.0 : 0.0;
        ix[i] = rx[i] <= 0.0 ? 1.0 : 0.0;
    }

    Eigen::Map<const Eigen::VectorXd> wym(wy.data(), n);
    Eigen::Map<const Eigen::VectorXd> wxm(wx.data(), n);
    double swy = wym.sum();
    double swx = wxm.sum();

    Eigen::MatrixXd My = design.Z.transpose() * wym.asDiagonal() * design.Z / swy;
    Eigen::MatrixXd Mx = design.Z.transpose() * wxm.asDiagonal() * design.Z / swx;
    Eigen::VectorXd m12 = design.Z.transpose() * (wym.cwiseProduct(ix)) / swy;
    Eigen::VectorXd m21 = design.Z.transpose() * (wxm.cwiseProduct(iy)) / swx;

    Eigen::MatrixXd delta11 = f0y * My;
    Eigen::VectorXd delta12 = f0y * m12;
    Eigen::MatrixXd delta22 = f0x * Mx;
    Eigen::VectorXd delta21 = f0x * m21;

    InfluencePieces out;
    out.d = ridge_solve(delta11, delta12);
    out.e = ridge_solve(delta22, delta21);

    out.zeta.resize(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        double joint = (iy[i] != 0.0 && ix[i] != 0.0) ? 1.0 : 0.0;
        double psi_y = tau - iy[i];
        double psi_x = iota - ix[i];
        double dz = out.d.dot(design.Z.row(i)) * psi_y;
        double ez = out.e.dot(design.Z.row(i)) * psi_x;
        out.zeta[i] = (joint + dz + ez) / s;
    }
    return out;
}

namespace {

double pop_var(const Eigen::VectorXd& v) {
    double m = v.mean();
    return (v.array() - m).square().sum() / static_cast<double>(v.size());
}

} // namespace

double variance(const ConditioningDesign& design, const CpcEstimate& est,
                const empirical::KernelConfig& kernel) {
    InfluencePieces pieces = influence(design, est, kernel);
    double omega = pop_var(pieces.zeta);
    if (omega <= 1e-12)
        throw degenerate_variance_error("conditional influence variance collapsed");
    return omega;
}

TestResult test_zero(std::span<const double> y, std::span<const double> x,
                     const ConditioningDesign& design, QuantilePair pair,
                     const empirical::KernelConfig& kernel,
                     const quantreg::FitOptions& fit) {
    QuantilePair cp = clamp_pair(pair);
    TestResult res;
    res.estimate = estimate(y, x, design, cp, fit);
    res.omega = variance(design, res.estimate, kernel);
    double n = static_cast<double>(res.estimate.n);
    res.z = std::sqrt(n) * res.estimate.value / std::sqrt(res.omega);
    res.p_value = stats::two_sided_p(res.z);
    return res;
}

EqualTestResult test_equal(std::span<const double> y,
                           std::span<const double> x1,
                           std::span<const double> x2,
                           const ConditioningDesign& design, QuantilePair pair,
                           const empirical::KernelConfig& kernel,
                           const quantreg::FitOptions& fit) {
    QuantilePair cp = clamp_pair(pair);
    check_sizes(y, design);
    Eigen::Map<const Eigen::VectorXd> ym(y.data(),
                                         static_cast<Eigen::Index>(y.size()));
    quantreg::QuantRegFit y_fit = quantreg::fit(design.Z, ym, cp.tau, fit);

    EqualTestResult res;
    res.first = estimate_with_y_fit(y_fit, x1, design, cp, fit);
    res.second = estimate_with_y_fit(y_fit, x2, design, cp, fit);

    InfluencePieces p1 = influence(design, res.first, kernel);
    InfluencePieces p2 = influence(design, res.second, kernel);
    Eigen::VectorXd diff = p1.zeta - p2.zeta;

    res.delta = res.first.value - res.second.value;
    res.xi = pop_var(diff);
    if (res.xi <= 1e-12)
        throw degenerate_variance_error(
            "paired influence variance collapsed (identical covariates?)");
    double n = static_cast<double>(y.size());
    res.z = std::sqrt(n) * res.delta / std::sqrt(res.xi);
    res.p_value = stats::two_sided_p(res.z);
    return res;
}

} // namespace cps::cpc
