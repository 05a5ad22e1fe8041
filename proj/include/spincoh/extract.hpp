#pragma once

#include <optional>
#include <string>
#include <vector>

namespace spincoh {

// A coherence-vs-time trace for one pulse number N.
struct CoherenceTrace {
    int n_pulses = 1;
    double t_pi = 0.0;
    std::vector<double> time_s;   // strictly increasing
    std::vector<double> c;        // coherence, in [0,1] after normalization
    std::string source;           // free-form tag (particle id, sim seed, ...)
};

void validate(const CoherenceTrace& trace);

enum class NoiseSource { Cpmg, Dq, Sq };

struct SpectrumPoint {
    double omega0 = 0.0;   // rad/s
    double s_value = 0.0;  // rad/s
    NoiseSource source = NoiseSource::Cpmg;
    double weight = 0.0;   // optional inverse variance; 0 = unweighted
};

struct BinnedSpectrum {
    std::vector<double> omega;    // bin centers (geometric), rad/s
    std::vector<double> s_mean;   // arithmetic mean of S per bin
    std::vector<double> s_stderr; // standard error of the mean (0 for n=1)
    std::vector<int> count;
    int n_bins_requested = 14;
};

// Contrast -> coherence mapping applied before extraction.
struct Normalization {
    enum class Mode { Identity, Affine, MinMax } mode = Mode::Identity;
    double baseline = 0.0;   // Affine: c = (raw - baseline) / amplitude
    double amplitude = 1.0;
};

// Rescales a raw trace to [0,1] per the given mapping, then discards samples
// with c < 0 or c > 1 (c = 0 and c = 1 are kept; downstream log transforms
// skip them). Throws std::runtime_error if nothing survives.
CoherenceTrace normalize_trace(const CoherenceTrace& raw,
                               const Normalization& norm = {});

// Spectral decomposition: every retained sample (t, c) with 0 < c < 1 of a
// trace with N > min_pulses becomes a spectrum point at w0 = pi N / t with
//   S = pi * (-ln c) / (kappa * t),
// inverting the calibrated delta approximation (kappa from
// delta_calibration()). Traces at or below min_pulses are skipped with a
// warning.
std::vector<SpectrumPoint> extract_spectrum(const std::vector<CoherenceTrace>& traces,
                                            int min_pulses = 64);

// Geometric binning between the min and max omega; arithmetic mean and
// standard error per bin; empty bins omitted.
BinnedSpectrum log_bin(const std::vector<SpectrumPoint>& points, int n_bins = 14);

// Combined overview: binned CPMG points plus the DQ rate point
// S_DQ(w_dq) = gamma and the SQ rate point S_SQ(w_sq) = Omega.
struct OverviewAnchors {
    double gamma_dq = 0.0;                  // DQ transition rate (1/s)
    double omega_dq = 2 * 3.14159265358979323846 * 18.8e6;
    double omega_sq_rate = 0.0;             // SQ transition rate Omega (1/s)
    double omega_sq = 2 * 3.14159265358979323846 * 2.87e9;
};

std::vector<SpectrumPoint> assemble_overview(const BinnedSpectrum& binned,
                                             const OverviewAnchors& anchors);

}  // namespace spincoh
