#include "cps/quantreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "cps/empirical.hpp"
#include "cps/errors.hpp"
#include "cps/stats.hpp"

namespace cps::quantreg {

double check_loss(const Eigen::VectorXd& residuals, double w) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < residuals.size(); ++i) {
        double u = residuals[i];
        s += u * (w - (u <= 0.0 ? 1.0 : 0.0));
    }
    return s / static_cast<double>(residuals.size());
}

namespace {

// Solves A x = b, adding an escalating ridge on numerical failure.
Eigen::VectorXd solve_spd(Eigen::MatrixXd A, const Eigen::VectorXd& b,
                          bool allow_ridge, bool& ridge_used) {
    Eigen::Index q = A.rows();
    double base = A.trace() / static_cast<double>(q);
    if (!(base > 0.0)) base = 1.0;
    double lambda = 0.0;
    for (int attempt = 0; attempt < 4; ++attempt) {
        Eigen::MatrixXd M = A;
        if (lambda > 0.0)
            M.diagonal().array() += lambda;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
        if (ldlt.info() == Eigen::Success) {
            Eigen::VectorXd x = ldlt.solve(b);
            if (x.allFinite()) {
                double rel = (M * x - b).norm() / (1.0 + b.norm());
                if (rel < 1e-6) {
                    if (lambda > 0.0) ridge_used = true;
                    return x;
                }
            }
        }
        if (!allow_ridge)
            throw singular_design_error("weighted normal equations are singular");
        lambda = lambda == 0.0 ? 1e-8 * base : lambda * 100.0;
    }
    throw singular_design_error("weighted normal equations stayed singular");
}

} // namespace

QuantRegFit fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double w,
                const FitOptions& opts) {
    const Eigen::Index n = Z.rows();
    const Eigen::Index q = Z.cols();
    if (!(w > 0.0) || !(w < 1.0))
        throw domain_error("quantile level must lie strictly inside (0, 1)");
    if (q < 1)
        throw domain_error("design needs at least one column");
    if (y.size() != n)
        throw domain_error("design and response lengths differ");
    if (n <= q)
        throw insufficient_data_error("quantile regression needs n > q");

    QuantRegFit out;
    out.level = w;

    // A single constant column is solved exactly through the order-statistic
    // quantile, which pins the convention the rest of the library relies on.
    if (q == 1) {
        double c = Z(0, 0);
        bool constant = c != 0.0;
        for (Eigen::Index i = 1; constant && i < n; ++i)
            if (Z(i, 0) != c) constant = false;
        if (constant) {
            std::span<const double> ys(y.data(), static_cast<std::size_t>(n));
            double qv = empirical::quantile_of(ys, w);
            double beta = c == 1.0 ? qv : qv / c;
            out.coefficients = Eigen::VectorXd::Constant(1, beta);
            out.residuals = y.array() - (c == 1.0 ? qv : c * beta);
            out.objective = check_loss(out.residuals, w);
            out.converged = true;
            out.iterations = 0;
            return out;
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Z);
    bool deficient = qr.rank() < q;
    if (deficient && !opts.allow_ridge)
        throw singular_design_error("design matrix is rank deficient");

    Eigen::VectorXd beta;
    if (!deficient) {
        beta = qr.solve(y);
    } else {
        Eigen::MatrixXd gram = Z.transpose() * Z;
        out.ridge_used = true;
        bool dummy = false;
        gram.diagonal().array() += 1e-8 * (gram.trace() / static_cast<double>(q));
        beta = solve_spd(gram, Z.transpose() * y, true, dummy);
    }

    Eigen::VectorXd r = y - Z * beta;
    double best_obj = check_loss(r, w);
    Eigen::VectorXd best_beta = beta;
    {
        double zero_obj = check_loss(y, w);
        if (zero_obj < best_obj) {
            best_obj = zero_obj;
            best_beta = Eigen::VectorXd::Zero(q);
        }
    }

    std::span<const double> ys(y.data(), static_cast<std::size_t>(n));
    double sdy = stats::sample_sd(ys);
    const double eps_min = 1e-8;
    double eps = std::max(1e-2 * sdy, eps_min);

    const Eigen::VectorXd zsum = Z.colwise().sum();
    Eigen::MatrixXd A(q, q);
    Eigen::VectorXd b(q);
    Eigen::VectorXd weights(n);

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        ++iter;
        for (Eigen::Index i = 0; i < n; ++i)
            weights[i] = 0.5 / std::max(std::abs(r[i]), eps);
        A.noalias() = Z.transpose() * weights.asDiagonal() * Z;
        b.noalias() = Z.transpose() * (weights.asDiagonal() * y);
        b.noalias() += (w - 0.5) * zsum;

        Eigen::VectorXd next = solve_spd(A, b, opts.allow_ridge, out.ridge_used);
        double delta = (next - beta).lpNorm<Eigen::Infinity>();
        beta = next;
        r.noalias() = y - Z * beta;
        double obj = check_loss(r, w);
        if (obj < best_obj) {
            best_obj = obj;
            best_beta = beta;
        }

        double scale = std::max(1.0, beta.lpNorm<Eigen::Infinity>());
        double stage_tol = std::max(opts.tol, eps * 1e-3) * scale;
        if (delta < stage_tol) {
            if (eps <= eps_min) {
                converged = delta < opts.tol * scale;
                break;
            }
            eps = std::max(eps / 10.0, eps_min);
        }
    }

    out.coefficients = best_beta;
    out.residuals = y - Z * best_beta;
    out.objective = check_loss(out.residuals, w);
    out.converged = converged;
    out.iterations = iter;
    return out;
}

} // namespace cps::quantreg
