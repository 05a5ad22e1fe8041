#include "spincoh/optim.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace spincoh::optim {

Eigen::MatrixXd numeric_jacobian(const ResidualFn& residual, const Eigen::VectorXd& x,
                                 double eps) {
    const Eigen::VectorXd r0 = residual(x);
    Eigen::MatrixXd J(r0.size(), x.size());
    for (Eigen::Index j = 0; j < x.size(); ++j) {
        Eigen::VectorXd xp = x;
        const double h = eps * (std::abs(x[j]) + eps);
        xp[j] += h;
        J.col(j) = (residual(xp) - r0) / h;
    }
    return J;
}

LsqResult levenberg_marquardt(const ResidualFn& residual, const JacobianFn& jacobian,
                              const Eigen::VectorXd& x0, const LsqOptions& opts) {
    LsqResult res;
    res.params = x0;
    Eigen::VectorXd r = residual(res.params);
    res.cost = 0.5 * r.squaredNorm();
    if (!std::isfinite(res.cost))
        throw std::invalid_argument("levenberg_marquardt: non-finite cost at start point");

    double lambda = opts.initial_damping;
    for (res.iterations = 0; res.iterations < opts.max_iterations; ++res.iterations) {
        const Eigen::MatrixXd J =
            jacobian ? jacobian(res.params) : numeric_jacobian(residual, res.params);
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;

        bool stepped = false;
        for (int attempt = 0; attempt < 40; ++attempt) {
            Eigen::MatrixXd A = JtJ;
            for (Eigen::Index i = 0; i < A.rows(); ++i)
                A(i, i) += lambda * (JtJ(i, i) > 0 ? JtJ(i, i) : 1.0);
            const Eigen::VectorXd dx = A.ldlt().solve(-g);
            if (!dx.allFinite()) {
                lambda *= 4.0;
                continue;
            }
            const Eigen::VectorXd x_new = res.params + dx;
            const Eigen::VectorXd r_new = residual(x_new);
            const double cost_new = 0.5 * r_new.squaredNorm();
            if (std::isfinite(cost_new) && cost_new <= res.cost) {
                const double step = dx.norm();
                const double scale = res.params.norm() + opts.rel_step_tol;
                res.params = x_new;
                r = r_new;
                res.cost = cost_new;
                lambda = std::max(lambda / 3.0, 1e-14);
                stepped = true;
                if (step < opts.rel_step_tol * scale) {
                    res.converged = true;
                    return res;
                }
                break;
            }
            lambda *= 4.0;
        }
        if (!stepped) {  // no descent direction left: local optimum
            res.converged = true;
            return res;
        }
    }
    return res;
}

LsqResult multistart(const ResidualFn& residual, const JacobianFn& jacobian,
                     const std::vector<Eigen::VectorXd>& starts, const LsqOptions& opts) {
    if (starts.empty()) throw std::invalid_argument("multistart: no start points");
    LsqResult best;
    best.cost = std::numeric_limits<double>::infinity();
    bool have_converged = false;
    for (const auto& s : starts) {
        LsqResult r;
        try {
            r = levenberg_marquardt(residual, jacobian, s, opts);
        } catch (const std::invalid_argument&) {
            continue;
        }
        const bool better = (r.converged && !have_converged) ||
                            (r.converged == have_converged && r.cost < best.cost);
        if (better) {
            best = r;
            have_converged = have_converged || r.converged;
        }
    }
    if (!std::isfinite(best.cost))
        throw std::runtime_error("multistart: every start point failed");
    return best;
}

LinearFit linear_fit(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    if (n != y.size() || n < 2) throw std::invalid_argument("linear_fit: need >= 2 points");
    double sx = 0, sy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i];
        sy += y[i];
    }
    const double mx = sx / double(n), my = sy / double(n);
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
        syy += (y[i] - my) * (y[i] - my);
    }
    if (sxx <= 0.0) throw std::invalid_argument("linear_fit: degenerate x values");
    LinearFit f;
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss_res = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        ss_res += e * e;
    }
    f.r2 = (syy > 0) ? 1.0 - ss_res / syy : 1.0;
    if (n > 2) {
        const double s2 = ss_res / double(n - 2);
        f.slope_stderr = std::sqrt(s2 / sxx);
        f.intercept_stderr = std::sqrt(s2 * (1.0 / double(n) + mx * mx / sxx));
    }
    return f;
}

std::vector<double> isotonic_nonincreasing(const std::vector<double>& y,
                                           const std::vector<double>& w) {
    if (y.size() != w.size()) throw std::invalid_argument("isotonic: size mismatch");
    // PAVA on -y gives the nondecreasing projection; negate back.
    struct Block {
        double sum_wy, sum_w;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < y.size(); ++i) {
        blocks.push_back({-y[i] * w[i], w[i], 1});
        while (blocks.size() > 1) {
            auto& b = blocks[blocks.size() - 1];
            auto& a = blocks[blocks.size() - 2];
            if (a.sum_wy / a.sum_w <= b.sum_wy / b.sum_w) break;
            a = {a.sum_wy + b.sum_wy, a.sum_w + b.sum_w, a.count + b.count};
            blocks.pop_back();
        }
    }
    std::vector<double> out;
    out.reserve(y.size());
    for (const auto& b : blocks)
        for (std::size_t k = 0; k < b.count; ++k) out.push_back(-b.sum_wy / b.sum_w);
    return out;
}

}  // namespace spincoh::optim
