#pragma once

#include <Eigen/Dense>

namespace cps::quantreg {

struct FitOptions {
    double tol = 1e-8;
    int max_iter = 200;
    bool allow_ridge = true;
};

struct QuantRegFit {
    Eigen::VectorXd coefficients;
    double level = 0.5;
    Eigen::VectorXd residuals;   // y - Z * coefficients
    double objective = 0.0;      // mean check loss of the residuals
    bool converged = false;
    int iterations = 0;
    bool ridge_used = false;
};

// Mean check loss (1/n) * sum rho_w(r_i) with rho_w(u) = u * (w - 1{u <= 0}).
double check_loss(const Eigen::VectorXd& residuals, double w);

// Linear quantile regression of y on the columns of Z at level w.
//
// The solver runs iteratively reweighted least squares on a smoothed check
// loss, with the smoothing width lowered geometrically from 1e-2 * sd(y)
// to 1e-8. An intercept-only design (single constant column) is solved
// exactly through the order-statistic quantile. Z must contain any constant
// column explicitly; none is added here.
QuantRegFit fit(const Eigen::MatrixXd& Z, const Eigen::VectorXd& y, double w,
                const FitOptions& opts = {});

} // namespace cps::quantreg
