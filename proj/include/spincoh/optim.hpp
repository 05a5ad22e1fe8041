#pragma once

#include <Eigen/Dense>
#include <functional>
#include <vector>

namespace spincoh::optim {

using ResidualFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
using JacobianFn = std::function<Eigen::MatrixXd(const Eigen::VectorXd&)>;

struct LsqOptions {
    int max_iterations = 200;
    double rel_step_tol = 1e-10;   // stop when |dx| < tol * (|x| + tol)
    double initial_damping = 1e-3;
};

struct LsqResult {
    Eigen::VectorXd params;
    double cost = 0.0;  // 0.5 * ||r||^2
    int iterations = 0;
    bool converged = false;
};

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x,
                                 double eps = 1e-7);

// Damped Gauss-Newton (Levenberg-Marquardt) least squares. `jacobian` may be
// empty, in which case a forward-difference Jacobian is used.
LsqResult levenberg_marquardt(const ResidualFn& residual, const JacobianFn& jacobian,
                              const Eigen::VectorXd& x0, const LsqOptions& opts = {});

// Runs LM from every start and keeps the lowest-cost converged result
// (falling back to the lowest-cost result if none converged).
LsqResult multistart(const ResidualFn& residual, const JacobianFn& jacobian,
                     const std::vector<Eigen::VectorXd>& starts, const LsqOptions& opts = {});

// Ordinary least squares y = intercept + slope*x with standard errors.
struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double r2 = 0.0;
};

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y);

// Pool-adjacent-violators: weighted least-squares projection onto the
// nonincreasing cone.
std::vector<double> isotonic_nonincreasing(const std::vector<double>& y,
                                           const std::vector<double>& w);

}  // namespace spincoh::optim
