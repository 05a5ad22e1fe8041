#include "spincoh/extract.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spincoh/filterfn.hpp"
#include "spincoh/log.hpp"

namespace spincoh {

namespace {
constexpr double kPi = std::numbers::pi;
}

void validate(const CoherenceTrace& trace) {
    if (trace.n_pulses < 1) throw std::invalid_argument("CoherenceTrace: N >= 1 required");
    if (trace.time_s.size() != trace.c.size())
        throw std::invalid_argument("CoherenceTrace: time/c size mismatch");
    for (std::size_t i = 1; i < trace.time_s.size(); ++i)
        if (trace.time_s[i] <= trace.time_s[i - 1])
            throw std::invalid_argument("CoherenceTrace: time must be strictly increasing");
}

CoherenceTrace normalize_trace(const CoherenceTrace& raw, const Normalization& norm) {
    validate(raw);
    if (raw.c.empty()) throw std::runtime_error("normalize_trace: empty trace");

    double baseline = norm.baseline, amplitude = norm.amplitude;
    if (norm.mode == Normalization::Mode::MinMax) {
        const auto [lo, hi] = std::minmax_element(raw.c.begin(), raw.c.end());
        baseline = *lo;
        amplitude = *hi - *lo;
        if (amplitude <= 0.0)
            throw std::runtime_error("normalize_trace: constant trace, min/max rescale undefined");
    } else if (norm.mode == Normalization::Mode::Identity) {
        baseline = 0.0;
        amplitude = 1.0;
    }
    if (amplitude == 0.0) throw std::invalid_argument("normalize_trace: zero amplitude");

    CoherenceTrace out;
    out.n_pulses = raw.n_pulses;
    out.t_pi = raw.t_pi;
    out.source = raw.source;
    for (std::size_t i = 0; i < raw.c.size(); ++i) {
        const double c = (raw.c[i] - baseline) / amplitude;
        if (c < 0.0 || c > 1.0) continue;
        out.time_s.push_back(raw.time_s[i]);
        out.c.push_back(c);
    }
    if (out.c.empty())
        throw std::runtime_error("normalize_trace: all samples discarded");
    return out;
}

std::vector<SpectrumPoint> extract_spectrum(const std::vector<CoherenceTrace>& traces,
                                            int min_pulses) {
    const double kappa = delta_calibration();
    std::vector<SpectrumPoint> points;
    bool any_valid_trace = false;
    for (const auto& tr : traces) {
        validate(tr);
        if (tr.n_pulses <= min_pulses) {
            warn("extract_spectrum: skipping trace '" + tr.source + "' with N = " +
                 std::to_string(tr.n_pulses) + " <= " + std::to_string(min_pulses));
            continue;
        }
        any_valid_trace = true;
        for (std::size_t i = 0; i < tr.c.size(); ++i) {
            const double c = tr.c[i];
            if (!(c > 0.0 && c < 1.0)) continue;  // 0 and 1 excluded from the log
            const double t = tr.time_s[i];
            if (t <= 0.0) continue;
            SpectrumPoint p;
            p.omega0 = kPi * tr.n_pulses / t;
            p.s_value = kPi * (-std::log(c)) / (kappa * t);
            p.source = NoiseSource::Cpmg;
            points.push_back(p);
        }
    }
    if (!any_valid_trace)
        throw std::runtime_error("extract_spectrum: no trace with N > " +
                                 std::to_string(min_pulses) + " (no CPMG points retained)");
    if (points.empty())
        throw std::runtime_error("extract_spectrum: no samples retained");
    return points;
}

BinnedSpectrum log_bin(const std::vector<SpectrumPoint>& points, int n_bins) {
    if (points.empty()) throw std::invalid_argument("log_bin: no points");
    if (n_bins < 1) throw std::invalid_argument("log_bin: n_bins >= 1 required");
    double wmin = points[0].omega0, wmax = points[0].omega0;
    for (const auto& p : points) {
        if (p.omega0 <= 0.0) throw std::invalid_argument("log_bin: omega must be > 0");
        wmin = std::min(wmin, p.omega0);
        wmax = std::max(wmax, p.omega0);
    }

    BinnedSpectrum out;
    out.n_bins_requested = n_bins;
    const double span = std::log(wmax / wmin);
    std::vector<std::vector<double>> buckets(n_bins);
    for (const auto& p : points) {
        int b = (span > 0.0)
                    ? std::min(n_bins - 1, int(std::floor(std::log(p.omega0 / wmin) / span * n_bins)))
                    : 0;
        buckets[b].push_back(p.s_value);
    }
    for (int b = 0; b < n_bins; ++b) {
        if (buckets[b].empty()) continue;
        const double lo = wmin * std::exp(span * b / n_bins);
        const double hi = wmin * std::exp(span * (b + 1) / n_bins);
        const std::size_t n = buckets[b].size();
        double mean = 0;
        for (double v : buckets[b]) mean += v;
        mean /= double(n);
        double var = 0;
        for (double v : buckets[b]) var += (v - mean) * (v - mean);
        const double sem = (n > 1) ? std::sqrt(var / double(n - 1) / double(n)) : 0.0;
        out.omega.push_back(std::sqrt(lo * hi));
        out.s_mean.push_back(mean);
        out.s_stderr.push_back(sem);
        out.count.push_back(int(n));
    }
    return out;
}

std::vector<SpectrumPoint> assemble_overview(const BinnedSpectrum& binned,
                                             const OverviewAnchors& anchors) {
    if (anchors.gamma_dq < 0.0 || anchors.omega_sq_rate < 0.0)
        throw std::invalid_argument("assemble_overview: rates must be >= 0");
    std::vector<SpectrumPoint> out;
    out.reserve(binned.omega.size() + 2);
    for (std::size_t i = 0; i < binned.omega.size(); ++i) {
        SpectrumPoint p;
        p.omega0 = binned.omega[i];
        p.s_value = binned.s_mean[i];
        p.source = NoiseSource::Cpmg;
        const double se = binned.s_stderr[i];
        p.weight = (se > 0.0) ? 1.0 / (se * se) : 0.0;
        out.push_back(p);
    }
    out.push_back({anchors.omega_dq, anchors.gamma_dq, NoiseSource::Dq, 0.0});
    out.push_back({anchors.omega_sq, anchors.omega_sq_rate, NoiseSource::Sq, 0.0});
    return out;
}

}  // namespace spincoh
