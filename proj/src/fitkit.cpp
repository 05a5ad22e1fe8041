#include "spincoh/fitkit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "spincoh/log.hpp"
#include "spincoh/optim.hpp"

namespace spincoh {

namespace {

constexpr double kPi = std::numbers::pi;

double stretched_model(double t, double t0, double a, double t2, double n) {
    const double u = (t - t0) / t2;
    if (u <= 0.0) return a;
    return a * std::exp(-std::pow(u, n));
}

// Free fit of (a, T2, n) with t0 fixed; optionally holds the amplitude.
StretchedExpFit fit_stretched_core(const CoherenceTrace& trace, std::optional<double> fixed_a) {
    const double t0 = trace.n_pulses * trace.t_pi;
    const auto& ts = trace.time_s;
    const auto& cs = trace.c;

    const double c_max = *std::max_element(cs.begin(), cs.end());
    const double a0 = std::clamp(fixed_a.value_or(c_max), 0.05, 1.5);

    // crude T2 start: first crossing of a0/e, else the last time
    double t2_0 = std::max(ts.back() - t0, 1e-12);
    for (std::size_t i = 0; i < cs.size(); ++i) {
        if (cs[i] < a0 * 0.3679 && ts[i] > t0) {
            t2_0 = std::max(ts[i] - t0, 1e-12);
            break;
        }
    }

    const bool free_a = !fixed_a.has_value();
    const int np = free_a ? 3 : 2;

    const auto unpack = [&](const Eigen::VectorXd& th, double& a, double& t2, double& n) {
        int j = 0;
        a = free_a ? th[j++] : *fixed_a;
        t2 = std::exp(th[j++]);
        n = std::exp(th[j]);
    };
    const auto residual = [&](const Eigen::VectorXd& th) {
        double a, t2, n;
        unpack(th, a, t2, n);
        Eigen::VectorXd r(ts.size());
        for (std::size_t i = 0; i < ts.size(); ++i)
            r[i] = stretched_model(ts[i], t0, a, t2, n) - cs[i];
        return r;
    };
    const auto jacobian = [&](const Eigen::VectorXd& th) {
        double a, t2, n;
        unpack(th, a, t2, n);
        Eigen::MatrixXd J(ts.size(), np);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            const double u = (ts[i] - t0) / t2;
            if (u <= 0.0) {
                int j = 0;
                if (free_a) J(i, j++) = 1.0;
                J(i, j++) = 0.0;
                J(i, j) = 0.0;
                continue;
            }
            const double un = std::pow(u, n);
            const double E = std::exp(-un);
            int j = 0;
            if (free_a) J(i, j++) = E;
            J(i, j++) = a * E * n * un;                              // d/d lnT2
            J(i, j) = (u > 1e-300) ? -a * E * un * std::log(u) * n   // d/d ln n
                                   : 0.0;
        }
        return J;
    };

    std::vector<Eigen::VectorXd> starts;
    for (double n0 : {0.5, 1.0, 1.5, 2.0, 3.0}) {
        Eigen::VectorXd th(np);
        int j = 0;
        if (free_a) th[j++] = a0;
        th[j++] = std::log(t2_0);
        th[j] = std::log(n0);
        starts.push_back(th);
    }
    const auto best = optim::multistart(residual, jacobian, starts);
    if (!best.converged)
        throw std::runtime_error("fit_stretched_exp: no start converged (cost " +
                                 std::to_string(best.cost) + ")");

    StretchedExpFit fit;
    double a, t2, n;
    unpack(best.params, a, t2, n);
    fit.amplitude = a;
    fit.t2 = t2;
    fit.stretch_n = n;
    fit.t0 = t0;
    fit.residual_norm = std::sqrt(2.0 * best.cost);
    fit.converged = best.converged;
    double mean = 0, ss = 0;
    for (double v : cs) mean += v;
    mean /= double(cs.size());
    for (double v : cs) ss += (v - mean) * (v - mean);
    fit.r2 = (ss > 0) ? 1.0 - 2.0 * best.cost / ss : 1.0;
    if (n <= 0.1 || n > 4.0)
        warn("fit_stretched_exp: stretch exponent " + std::to_string(n) +
             " outside the expected (0.1, 4] range");
    return fit;
}

}  // namespace

StretchedExpFit fit_stretched_exp(const CoherenceTrace& trace) {
    validate(trace);
    if (trace.c.size() < 5)
        throw std::invalid_argument("fit_stretched_exp: need >= 5 samples");
    return fit_stretched_core(trace, std::nullopt);
}

std::vector<StretchedExpFit> fit_amplitude_monotone(const std::vector<CoherenceTrace>& traces) {
    if (traces.empty()) throw std::invalid_argument("fit_amplitude_monotone: no traces");
    for (std::size_t i = 1; i < traces.size(); ++i)
        if (traces[i].n_pulses < traces[i - 1].n_pulses)
            throw std::invalid_argument("fit_amplitude_monotone: traces must be sorted by N");

    std::vector<StretchedExpFit> fits;
    std::vector<double> amps, weights;
    for (const auto& tr : traces) {
        if (tr.c.size() < 5)
            throw std::invalid_argument("fit_amplitude_monotone: need >= 5 samples per trace");
        fits.push_back(fit_stretched_core(tr, std::nullopt));
        amps.push_back(fits.back().amplitude);
        weights.push_back(double(tr.c.size()));
    }
    const auto projected = optim::isotonic_nonincreasing(amps, weights);
    for (std::size_t i = 0; i < traces.size(); ++i) {
        if (std::abs(projected[i] - amps[i]) > 1e-10 * std::max(1.0, std::abs(amps[i]))) {
            fits[i] = fit_stretched_core(traces[i], projected[i]);
            fits[i].amplitude_clipped = true;
        }
        fits[i].amplitude = projected[i];
    }
    return fits;
}

PowerLawFit fit_power_law(const std::vector<std::pair<int, double>>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_power_law: need >= 3 points");
    std::vector<double> x, y;
    for (const auto& [n, t2] : points) {
        if (n < 1) throw std::invalid_argument("fit_power_law: N >= 1 required");
        if (t2 <= 0.0) throw std::invalid_argument("fit_power_law: T2 must be > 0");
        x.push_back(std::log(double(n)));
        y.push_back(std::log(t2));
    }
    const auto lf = optim::linear_fit(x, y);
    PowerLawFit f;
    f.k = lf.slope;
    f.k_stderr = lf.slope_stderr;
    f.t2_echo = std::exp(lf.intercept);
    f.t2_echo_stderr = f.t2_echo * lf.intercept_stderr;
    f.r2 = lf.r2;
    return f;
}

Eigen::Matrix3d three_level_rate_matrix(double omega, double gamma) {
    Eigen::Matrix3d m;
    // populations ordered (p0, p+, p-)
    m << -2 * omega, omega, omega,
         omega, -(omega + gamma), gamma,
         omega, gamma, -(omega + gamma);
    return m;
}

ExpDecayFit fit_exp_decay(const std::vector<double>& t, const std::vector<double>& y,
                          bool with_offset) {
    if (t.size() != y.size() || t.size() < 3)
        throw std::invalid_argument("fit_exp_decay: need >= 3 samples");

    // log-linear start when the data allows it
    double a0 = y.front(), r0 = 1.0 / std::max(t.back() - t.front(), 1e-12);
    {
        std::vector<double> lx, ly;
        for (std::size_t i = 0; i < y.size(); ++i)
            if (y[i] > 0.0) {
                lx.push_back(t[i]);
                ly.push_back(std::log(y[i]));
            }
        if (lx.size() >= 2) {
            try {
                const auto lf = optim::linear_fit(lx, ly);
                if (lf.slope < 0.0) {
                    r0 = -lf.slope;
                    a0 = std::exp(lf.intercept);
                }
            } catch (const std::invalid_argument&) {
            }
        }
    }

    const int np = with_offset ? 3 : 2;
    const auto residual = [&](const Eigen::VectorXd& th) {
        const double a = th[0], r = std::exp(th[1]);
        const double c = with_offset ? th[2] : 0.0;
        Eigen::VectorXd out(t.size());
        for (std::size_t i = 0; i < t.size(); ++i)
            out[i] = a * std::exp(-r * t[i]) + c - y[i];
        return out;
    };
    const auto jacobian = [&](const Eigen::VectorXd& th) {
        const double a = th[0], r = std::exp(th[1]);
        Eigen::MatrixXd J(t.size(), np);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const double e = std::exp(-r * t[i]);
            J(i, 0) = e;
            J(i, 1) = -a * t[i] * e * r;
            if (with_offset) J(i, 2) = 1.0;
        }
        return J;
    };

    Eigen::VectorXd th0(np);
    th0[0] = a0;
    th0[1] = std::log(std::max(r0, 1e-300));
    if (with_offset) th0[2] = 0.0;
    const auto res = optim::levenberg_marquardt(residual, jacobian, th0);

    ExpDecayFit f;
    f.amplitude = res.params[0];
    f.rate = std::exp(res.params[1]);
    f.offset = with_offset ? res.params[2] : 0.0;
    f.converged = res.converged;
    double my = 0, ss = 0;
    for (double v : y) my += v;
    my /= double(y.size());
    for (double v : y) ss += (v - my) * (v - my);
    f.r2 = (ss > 0) ? 1.0 - 2.0 * res.cost / ss : 1.0;
    return f;
}

RatePair fit_rate_equations(const RelaxationTrace& sq_trace, const RelaxationTrace& dq_trace) {
    if (sq_trace.time_s.empty() || dq_trace.time_s.empty())
        throw std::invalid_argument("fit_rate_equations: empty trace");
    const auto sq = fit_exp_decay(sq_trace.time_s, sq_trace.signal);
    const auto dq = fit_exp_decay(dq_trace.time_s, dq_trace.signal);

    RatePair rp;
    rp.omega_sq_rate = sq.rate / 3.0;
    rp.gamma_dq_rate = 0.5 * (dq.rate - rp.omega_sq_rate);
    if (rp.gamma_dq_rate < -0.02 * dq.rate) {
        rp.gamma_negative_flag = true;
        warn("fit_rate_equations: fitted gamma < 0 beyond noise tolerance (" +
             std::to_string(rp.gamma_dq_rate) + " 1/s)");
    }
    rp.t1_sq = 1.0 / (3.0 * rp.omega_sq_rate);
    rp.t1_dq = 1.0 / (rp.omega_sq_rate + 2.0 * rp.gamma_dq_rate);
    return rp;
}

// ---------------------------------------------------------------------------
// Noise-model fit
// ---------------------------------------------------------------------------

namespace {

struct NoisePack {
    int n_lor;
    bool with_white;
    bool with_anchor;
    double s_dq, omega_dq;

    int n_params() const { return 2 * n_lor + (with_anchor ? 1 : 0) + (with_white ? 1 : 0); }

    NoiseSpectrum spectrum(const Eigen::VectorXd& th) const {
        NoiseSpectrum s;
        for (int k = 0; k < n_lor; ++k)
            s.lorentzians.push_back({std::exp(th[2 * k]), std::exp(th[2 * k + 1])});
        int j = 2 * n_lor;
        if (with_anchor) {
            const double a = 1.0 + 1.0 / (1.0 + std::exp(-th[j++]));
            s.one_over_f = OneOverFComponent{s_dq * std::pow(omega_dq, a), a};
        }
        if (with_white) s.white_floor = std::exp(th[j]);
        return s;
    }
};

}  // namespace

NoiseFitResult fit_noise_model(const BinnedSpectrum& binned, const DqAnchor& anchor,
                               int n_lorentzians, bool with_white) {
    if (n_lorentzians < 0 || n_lorentzians > 4)
        throw std::invalid_argument("fit_noise_model: n_lorentzians out of range");
    std::vector<double> w, s;
    for (std::size_t i = 0; i < binned.omega.size(); ++i) {
        if (binned.s_mean[i] > 0.0) {
            w.push_back(binned.omega[i]);
            s.push_back(binned.s_mean[i]);
        }
    }
    NoisePack pack{n_lorentzians, with_white, anchor.s_dq > 0.0, anchor.s_dq, anchor.omega_dq};
    if (pack.with_anchor && anchor.omega_dq <= 0.0)
        throw std::invalid_argument("fit_noise_model: anchor omega_dq must be > 0");
    if (int(w.size()) < pack.n_params() + 1)
        throw std::invalid_argument("fit_noise_model: need at least n_params + 1 bins");

    const auto residual = [&](const Eigen::VectorXd& th) {
        const NoiseSpectrum spec = pack.spectrum(th);
        Eigen::VectorXd r(w.size());
        for (std::size_t i = 0; i < w.size(); ++i)
            r[i] = std::log(eval_total(spec, w[i])) - std::log(s[i]);
        return r;
    };
    const auto jacobian = [&](const Eigen::VectorXd& th) {
        const NoiseSpectrum spec = pack.spectrum(th);
        Eigen::MatrixXd J(w.size(), pack.n_params());
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double total = eval_total(spec, w[i]);
            for (int k = 0; k < pack.n_lor; ++k) {
                const auto& c = spec.lorentzians[k];
                const double x = w[i] * c.tau_c;
                const double L = c.delta * c.delta * c.tau_c / (kPi * (1.0 + x * x));
                J(i, 2 * k) = 2.0 * L / total;                          // d/d lnDelta
                J(i, 2 * k + 1) = L * (1.0 - x * x) / (1.0 + x * x) / total;  // d/d lntau
            }
            int j = 2 * pack.n_lor;
            if (pack.with_anchor) {
                const double a = spec.one_over_f->exponent_a;
                const double term = spec.one_over_f->delta_e / std::pow(w[i], a);
                const double da_dth = (a - 1.0) * (2.0 - a);
                J(i, j++) = term * std::log(pack.omega_dq / w[i]) * da_dth / total;
            }
            if (pack.with_white) J(i, j) = spec.white_floor / total;
        }
        return J;
    };

    // multi-start over tau_c decades (0.1 - 1000 ns)
    const std::vector<double> tau_grid = {1e-10, 1e-9, 1e-8, 1e-7, 1e-6};
    const double s_ref = *std::max_element(s.begin(), s.end());
    std::vector<Eigen::VectorXd> starts;
    const auto make_start = [&](const std::vector<double>& taus) {
        Eigen::VectorXd th(pack.n_params());
        for (int k = 0; k < pack.n_lor; ++k) {
            const double d0 = std::sqrt(kPi * s_ref / (pack.n_lor * taus[k]));
            th[2 * k] = std::log(d0);
            th[2 * k + 1] = std::log(taus[k]);
        }
        int j = 2 * pack.n_lor;
        if (pack.with_anchor) th[j++] = 0.0;  // a = 1.5
        if (pack.with_white) th[j] = std::log(*std::min_element(s.begin(), s.end()) * 0.1);
        starts.push_back(th);
    };
    if (pack.n_lor == 0) {
        make_start({});
    } else if (pack.n_lor == 1) {
        for (double t1 : tau_grid) make_start({t1});
    } else {
        for (std::size_t i = 0; i < tau_grid.size(); ++i)
            for (std::size_t j2 = 0; j2 < i; ++j2)
                make_start(std::vector<double>{tau_grid[i], tau_grid[j2]});
    }

    const auto best = optim::multistart(residual, jacobian, starts);

    NoiseFitResult out;
    out.spectrum = pack.spectrum(best.params);
    if (pack.with_anchor) {
        out.exponent_a = out.spectrum.one_over_f->exponent_a;
        out.delta_e = out.spectrum.one_over_f->delta_e;
    }
    // r^2 in log-S space
    double my = 0, ss = 0;
    for (double v : s) my += std::log(v);
    my /= double(s.size());
    for (double v : s) ss += (std::log(v) - my) * (std::log(v) - my);
    out.r2 = (ss > 0) ? 1.0 - 2.0 * best.cost / ss : 1.0;
    if (out.r2 < 0.0) {
        out.failed = true;
        warn("fit_noise_model: r^2 < 0, fit worse than the mean");
    }

    // tau identifiability: a Lorentzian whose knee sits below the probed band
    // (or whose profiled cost is flat toward smaller tau) is only an upper
    // bound on tau_c.
    const double w_max = *std::max_element(w.begin(), w.end());
    const double dof = std::max(1.0, double(w.size()) - pack.n_params());
    const double cost_thr = best.cost + 2.0 * best.cost / dof + 1e-14 * double(w.size());
    out.tau_upper_bound.assign(std::size_t(pack.n_lor), false);
    for (int k = 0; k < pack.n_lor; ++k) {
        const double tau_fit = out.spectrum.lorentzians[k].tau_c;
        if (w_max * tau_fit < 0.2) {
            out.tau_upper_bound[k] = true;
            continue;
        }
        // profile: hold tau_k at tau_fit/4 (amplitude rescaled to keep
        // Delta^2 tau), refit the rest from the warm start
        Eigen::VectorXd th = best.params;
        th[2 * k + 1] = std::log(tau_fit / 4.0);
        th[2 * k] += 0.5 * std::log(4.0);
        const auto fixed = th[2 * k + 1];
        const auto res_prof = [&](const Eigen::VectorXd& q) {
            Eigen::VectorXd full = q;
            full[2 * k + 1] = fixed;
            return residual(full);
        };
        try {
            const auto prof = optim::levenberg_marquardt(res_prof, nullptr, th);
            if (prof.cost <= cost_thr) out.tau_upper_bound[k] = true;
        } catch (const std::exception&) {
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bath classification
// ---------------------------------------------------------------------------

BathClassification classify_bath(const ChiCurve& echo, double tau_c) {
    if (tau_c <= 0.0) throw std::invalid_argument("classify_bath: tau_c must be > 0");
    if (echo.time_s.size() != echo.chi.size())
        throw std::invalid_argument("classify_bath: malformed curve");

    BathClassification out;
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < echo.time_s.size(); ++i) {
        if (echo.time_s[i] > 10.0 * tau_c && echo.chi[i] > 0.0 &&
            std::isfinite(echo.chi[i])) {
            lx.push_back(std::log(echo.time_s[i]));
            ly.push_back(std::log(echo.chi[i]));
        }
    }
    if (lx.size() < 4) {
        out.reason = "only " + std::to_string(lx.size()) +
                     " usable points beyond t > 10 tau_c; need >= 4";
        return out;
    }
    const auto lf = optim::linear_fit(lx, ly);
    out.n_rw = lf.slope;
    out.n_rw_stderr = lf.slope_stderr;

    std::vector<double> bx, by;
    for (std::size_t i = 0; i < echo.time_s.size(); ++i) {
        if (echo.time_s[i] < tau_c && echo.chi[i] > 0.0 && std::isfinite(echo.chi[i])) {
            bx.push_back(std::log(echo.time_s[i]));
            by.push_back(std::log(echo.chi[i]));
        }
    }
    if (bx.size() >= 3) out.n_ballistic = optim::linear_fit(bx, by).slope;

    if (out.n_rw <= 0.75) {
        out.verdict = BathVerdict::ConfigurationalAveraging;
        out.reason = "n_rw <= 0.75: spins rearrange between shots";
    } else if (std::abs(out.n_rw - 1.0) <= 0.25) {
        out.verdict = BathVerdict::FixedMarkovian;
        out.reason = "n_rw within 0.25 of 1: fixed spin positions";
    } else {
        out.reason = "n_rw = " + std::to_string(out.n_rw) + " matches neither regime";
    }
    for (int d = 1; d <= 3; ++d)
        for (int alpha : {2, 3})
            if (std::abs(out.n_rw - 0.5 * d / alpha) <= 0.1) out.candidates.emplace_back(d, alpha);
    return out;
}

// ---------------------------------------------------------------------------
// PL unmixing and DEER arithmetic
// ---------------------------------------------------------------------------

UnmixResult unmix_pl(const std::vector<double>& measured, const std::vector<double>& ref_nv0,
                     const std::vector<double>& ref_nvm) {
    const std::size_t n = measured.size();
    if (n < 2 || ref_nv0.size() != n || ref_nvm.size() != n)
        throw std::invalid_argument("unmix_pl: spectra must share a common grid");

    const auto normalize = [](std::vector<double> v) {
        double sum = 0;
        for (double x : v) sum += x;
        if (sum <= 0.0) throw std::invalid_argument("unmix_pl: non-positive spectrum sum");
        for (double& x : v) x /= sum;
        return v;
    };
    const auto m = normalize(measured), r0 = normalize(ref_nv0), rm = normalize(ref_nvm);

    double num = 0, den = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = r0[i] - rm[i];
        num += (m[i] - rm[i]) * d;
        den += d * d;
    }
    if (den < 1e-24)
        throw std::runtime_error("unmix_pl: reference spectra are identical; fraction indeterminate");
    UnmixResult out;
    out.a = std::clamp(num / den, 0.0, 1.0);
    out.nv_minus_fraction = 1.0 - out.a;
    return out;
}

DeerSignals deer_signals(double f1, double f2, double f3, double f4) {
    if (f1 + f2 <= 0.0 || f3 + f4 <= 0.0)
        throw std::invalid_argument("deer_signals: F1+F2 and F3+F4 must be > 0");
    DeerSignals s;
    s.s_d = (f1 - f2) / (f1 + f2);
    s.s_e = (f3 - f4) / (f3 + f4);
    if (s.s_e == 0.0)
        throw std::runtime_error("deer_signals: echo signal S_E = 0 (F3 = F4), FID ratio undefined");
    s.s_fid = s.s_d / s.s_e;
    return s;
}

std::vector<DeerSignals> deer_signal_series(const std::vector<double>& f1,
                                            const std::vector<double>& f2,
                                            const std::vector<double>& f3,
                                            const std::vector<double>& f4) {
    const std::size_t n = f1.size();
    if (f2.size() != n || f3.size() != n || f4.size() != n)
        throw std::invalid_argument("deer_signal_series: length mismatch");
    std::vector<DeerSignals> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(deer_signals(f1[i], f2[i], f3[i], f4[i]));
    return out;
}

}  // namespace spincoh
