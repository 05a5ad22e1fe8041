#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace spincoh::quad {

// Thrown when an adaptive integral fails to reach its tolerance. Carries the
// best available partial result so callers can report it.
class QuadratureError : public std::runtime_error {
  public:
    QuadratureError(const std::string& what, double partial, double error_estimate)
        : std::runtime_error(what), partial_value(partial), error_estimate(error_estimate) {}
    double partial_value;
    double error_estimate;
};

struct QuadResult {
    double value{0.0};
    double error{0.0};
    std::size_t n_evals{0};
};

namespace detail {

// Gauss-Kronrod 7-15 nodes/weights (QUADPACK dqk15 constants).
inline constexpr double kGK15Nodes[8] = {
    0.991455371120813, 0.949107912342759, 0.864864423359769, 0.741531185599394,
    0.586087235467691, 0.405845151377397, 0.207784955007898, 0.000000000000000};
inline constexpr double kGK15WeightsK[8] = {
    0.022935322010529, 0.063092092629979, 0.104790010322250, 0.140653259715525,
    0.169004726639267, 0.190350578064785, 0.204432940075298, 0.209482141084728};
inline constexpr double kGK15WeightsG[4] = {
    0.129484966168870, 0.279705391489277, 0.381830050505119, 0.417959183673469};

template <class F>
inline void gk15(const F& f, double a, double b, double& value, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double fv[15];
    // sample symmetric node pairs; node 7 is the midpoint
    for (int i = 0; i < 7; ++i) {
        fv[i] = f(c - h * kGK15Nodes[i]);
        fv[14 - i] = f(c + h * kGK15Nodes[i]);
    }
    fv[7] = f(c);
    double k = 0.0;
    for (int i = 0; i < 7; ++i) k += kGK15WeightsK[i] * (fv[i] + fv[14 - i]);
    k += kGK15WeightsK[7] * fv[7];
    double g = 0.0;
    for (int i = 0; i < 3; ++i) g += kGK15WeightsG[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
    g += kGK15WeightsG[3] * fv[7];
    value = k * h;
    err = std::abs((k - g) * h);
}

}  // namespace detail

// Adaptive Gauss-Kronrod on [a, b]. Bisects the worst interval until the
// summed error estimate satisfies abs_tol + rel_tol*|integral|.
template <class F>
QuadResult integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-9,
                              double abs_tol = 0.0, std::size_t max_intervals = 2000) {
    struct Seg {
        double a, b, value, err;
    };
    std::vector<Seg> segs;
    double v, e;
    detail::gk15(f, a, b, v, e);
    segs.push_back({a, b, v, e});
    std::size_t evals = 15;
    for (;;) {
        double total = 0.0, toterr = 0.0;
        std::size_t worst = 0;
        double worst_err = -1.0;
        for (std::size_t i = 0; i < segs.size(); ++i) {
            total += segs[i].value;
            toterr += segs[i].err;
            if (segs[i].err > worst_err) {
                worst_err = segs[i].err;
                worst = i;
            }
        }
        if (toterr <= abs_tol + rel_tol * std::abs(total))
            return {total, toterr, evals};
        if (segs.size() >= max_intervals)
            throw QuadratureError("adaptive quadrature did not converge (" +
                                      std::to_string(segs.size()) + " intervals, err=" +
                                      std::to_string(toterr) + ")",
                                  total, toterr);
        Seg s = segs[worst];
        const double m = 0.5 * (s.a + s.b);
        Seg left{s.a, m, 0, 0}, right{m, s.b, 0, 0};
        detail::gk15(f, left.a, left.b, left.value, left.err);
        detail::gk15(f, right.a, right.b, right.value, right.err);
        evals += 30;
        segs[worst] = left;
        segs.push_back(right);
    }
}

// Single non-adaptive GK15 panel (value + error estimate), for integrands
// already split into smooth lobes.
template <class F>
QuadResult integrate_panel(const F& f, double a, double b) {
    double v, e;
    detail::gk15(f, a, b, v, e);
    return {v, e, 15};
}

}  // namespace spincoh::quad
