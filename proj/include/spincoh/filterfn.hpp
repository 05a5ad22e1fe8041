#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spincoh/spectra.hpp"

namespace spincoh {

enum class SequenceKind { Echo, Cpmg };

// Multipulse decoupling sequence: N ideal pi pulses over total free
// precession time t, standard CPMG timing (tau/2, tau, ..., tau, tau/2).
struct DecouplingSequence {
    int n_pulses = 1;
    double t_pi = 0.0;       // pi-pulse duration (s), used by the Monte Carlo
    double total_time = 0.0; // total free precession time (s)
    SequenceKind kind = SequenceKind::Echo;

    static DecouplingSequence echo(double total_time, double t_pi = 0.0);
    static DecouplingSequence cpmg(int n_pulses, double total_time, double t_pi = 0.0);
};

void validate(const DecouplingSequence& seq);

// Decoherence curve chi(t) with the sequence it was computed for.
struct ChiCurve {
    std::vector<double> time_s;
    std::vector<double> chi;
    int n_pulses = 1;
    double t_pi = 0.0;
    std::string label;
};

struct ChiOptions {
    double rel_tol = 1e-6;
    int min_harmonics = 50;    // filter peaks covered by explicit lobes
    int max_harmonics = 3200;  // extension cap before giving up
};

// CPMG filter weight F_N(w t)/w^2 with
//   F_N(x) = 8 sin^4(x/4N) sin^2(x/2)/cos^2(x/2N)   (N even)
//   F_N(x) = 8 sin^4(x/4N) cos^2(x/2)/cos^2(x/2N)   (N odd; N=1 is the
//            Hahn-echo filter 8 sin^4(x/4))
// The removable singularities at the filter peaks x = N pi (2j+1) take their
// limit value (peak height 2 N^2).
double filter_weight(double omega, const DecouplingSequence& seq);

// Dimensionless closed-form filter F_N(x); exposed for tests and plotting.
double filter_function(double x, int n_pulses);

// chi(t) = (1/pi) * int_0^inf S(w) F_N(w t) / w^2 dw.
// Integrated per lobe between filter zeros out to at least
// `min_harmonics` filter peaks; the remainder is added analytically from the
// residual filter weight (exact for a white floor, bounded by monotonicity
// otherwise). Throws quad::QuadratureError (carrying the partial sum) if the
// requested tolerance cannot be met.
double chi_exact(const NoiseSpectrum& spectrum, const DecouplingSequence& seq,
                 const ChiOptions& opts = {});

// Delta-peak approximation chi = t * S(pi N / t) / pi, sampling the spectrum
// at the primary filter peak w0 = pi N / t. Warns (does not fail) below the
// N >= 64 validity cutoff.
double chi_delta(const NoiseSpectrum& spectrum, int n_pulses, double total_time);

// Calibration constant kappa such that kappa * chi_delta equals chi_exact
// exactly for white noise (sequence-independent; numerically pi/2). Computed
// once by quadrature and cached.
double delta_calibration();

// T2(N): root of chi_exact(T2) = chi_threshold, bracketed bisection in log t
// over [1 ns, 10 s] to relative tolerance 1e-4.
std::vector<std::pair<int, double>> predict_t2_curve(const NoiseSpectrum& spectrum,
                                                     const std::vector<int>& n_values,
                                                     double chi_threshold = 1.0);

// Convenience: chi_exact evaluated on a time grid.
ChiCurve compute_chi_curve(const NoiseSpectrum& spectrum, int n_pulses, double t_pi,
                           const std::vector<double>& times, const ChiOptions& opts = {});

}  // namespace spincoh
