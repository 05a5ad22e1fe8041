#pragma once

#include <Eigen/Dense>
#include <array>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spincoh/extract.hpp"
#include "spincoh/filterfn.hpp"
#include "spincoh/spectra.hpp"

namespace spincoh {

// ---------------------------------------------------------------------------
// Stretched exponential  c(t) = a exp(-((t - t0)/T2)^n),  t0 = N t_pi fixed
// ---------------------------------------------------------------------------

struct StretchedExpFit {
    double amplitude = 1.0;    // a, dimensionless
    double t2 = 0.0;           // s
    double stretch_n = 1.0;
    double t0 = 0.0;           // N * t_pi (s), held fixed during the fit
    double residual_norm = 0.0;
    double r2 = 0.0;
    bool converged = false;
    bool amplitude_clipped = false;  // set by the monotone joint fit
};

StretchedExpFit fit_stretched_exp(const CoherenceTrace& trace);

// Joint fit of traces ordered by N with amplitudes constrained nonincreasing
// in N (pulse errors only reduce contrast). Per-trace T2 and n stay free;
// amplitudes are projected onto the nonincreasing cone and the remaining
// parameters refit.
std::vector<StretchedExpFit> fit_amplitude_monotone(const std::vector<CoherenceTrace>& traces);

// ---------------------------------------------------------------------------
// T2(N) power law  T2(N) = T2_echo * N^k
// ---------------------------------------------------------------------------

struct PowerLawFit {
    double t2_echo = 0.0;  // s
    double k = 0.0;
    double k_stderr = 0.0;
    double t2_echo_stderr = 0.0;  // propagated from the intercept
    double r2 = 0.0;
};

PowerLawFit fit_power_law(const std::vector<std::pair<int, double>>& points);

// ---------------------------------------------------------------------------
// Three-level (ms = 0, +1, -1) relaxation: Omega on each 0 <-> +-1 link,
// gamma on +1 <-> -1. Population relaxation eigenvalues are 3*Omega and
// Omega + 2*gamma, giving T1_SQ = 1/(3 Omega) and T1_DQ = 1/(Omega + 2 gamma).
// ---------------------------------------------------------------------------

struct RelaxationTrace {
    std::vector<double> time_s;
    std::vector<double> signal;  // initialized-state population difference
};

struct RatePair {
    double omega_sq_rate = 0.0;  // Omega (1/s)
    double gamma_dq_rate = 0.0;  // gamma (1/s)
    double t1_sq = 0.0;          // 1/(3 Omega)
    double t1_dq = 0.0;          // 1/(Omega + 2 gamma)
    bool gamma_negative_flag = false;
};

Eigen::Matrix3d three_level_rate_matrix(double omega, double gamma);

RatePair fit_rate_equations(const RelaxationTrace& sq_trace, const RelaxationTrace& dq_trace);

// Single-exponential helper y = A exp(-rate t) (+ offset when requested).
struct ExpDecayFit {
    double amplitude = 0.0;
    double rate = 0.0;
    double offset = 0.0;
    double r2 = 0.0;
    bool converged = false;
};

ExpDecayFit fit_exp_decay(const std::vector<double>& t, const std::vector<double>& y,
                          bool with_offset = false);

// ---------------------------------------------------------------------------
// Combined noise-model fit (Lorentzians + DQ-anchored 1/f^a + optional floor)
// ---------------------------------------------------------------------------

struct DqAnchor {
    double s_dq = 0.0;      // S_DQ(omega_dq) = gamma (rad/s)
    double omega_dq = 0.0;  // rad/s
};

struct NoiseFitResult {
    NoiseSpectrum spectrum;          // fitted model (anchored 1/f included)
    double exponent_a = 0.0;
    double delta_e = 0.0;            // = s_dq * omega_dq^a by construction
    double r2 = 0.0;                 // in log-S space
    std::vector<bool> tau_upper_bound;  // per Lorentzian: tau_c identified only
                                        // from above (knee below the probed band)
    bool failed = false;             // r2 < 0 (worse than the mean)
};

// Nonlinear least squares in log-S space over {Delta_k, tau_ck, a, optional
// S0}; Delta_e is eliminated through the anchor Delta_e = s_dq * omega_dq^a.
// Multi-start over tau_c decades 0.1 - 1000 ns.
NoiseFitResult fit_noise_model(const BinnedSpectrum& binned, const DqAnchor& anchor,
                               int n_lorentzians, bool with_white);

// ---------------------------------------------------------------------------
// Echo stretching-exponent classification
// ---------------------------------------------------------------------------

enum class BathVerdict { FixedMarkovian, ConfigurationalAveraging, Indeterminate };

struct BathClassification {
    double n_rw = 0.0;        // random-walk-regime exponent (t > 10 tau_c)
    double n_rw_stderr = 0.0;
    std::optional<double> n_ballistic;  // slope on t < tau_c, when available
    BathVerdict verdict = BathVerdict::Indeterminate;
    std::vector<std::pair<int, int>> candidates;  // (D, alpha) with |n - D/2a| <= 0.1
    std::string reason;
};

BathClassification classify_bath(const ChiCurve& echo, double tau_c);

// ---------------------------------------------------------------------------
// PL spectrum unmixing and DEER signal arithmetic
// ---------------------------------------------------------------------------

struct UnmixResult {
    double a = 0.0;            // NV0 weight, clipped to [0,1]
    double nv_minus_fraction = 0.0;  // 1 - a
};

// Constrained least squares for pl = a pl0 + (1-a) plm on a common grid;
// every spectrum is normalized to unit sum first.
UnmixResult unmix_pl(const std::vector<double>& measured, const std::vector<double>& ref_nv0,
                     const std::vector<double>& ref_nvm);

struct DeerSignals {
    double s_d = 0.0;    // (F1-F2)/(F1+F2)
    double s_e = 0.0;    // (F3-F4)/(F3+F4)
    double s_fid = 0.0;  // s_d / s_e
};

DeerSignals deer_signals(double f1, double f2, double f3, double f4);

std::vector<DeerSignals> deer_signal_series(const std::vector<double>& f1,
                                            const std::vector<double>& f2,
                                            const std::vector<double>& f3,
                                            const std::vector<double>& f4);

}  // namespace spincoh
