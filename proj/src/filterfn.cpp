#include "spincoh/filterfn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <queue>
#include <stdexcept>

#include "spincoh/log.hpp"
#include "spincoh/quadrature.hpp"

namespace spincoh {

namespace {

constexpr double kPi = std::numbers::pi;

// sin^2(x/2)/cos^2(x/2N) (even N) or cos^2(x/2)/cos^2(x/2N) (odd N), with the
// 0/0 at filter peaks replaced by its limit N^2.
double peak_ratio(double x, int n) {
    const double c = std::cos(x / (2.0 * n));
    const double num = (n % 2 == 0) ? std::sin(0.5 * x) : std::cos(0.5 * x);
    if (std::abs(c) < 1e-7) return double(n) * double(n);
    const double r = num / c;
    return r * r;
}

struct Lobe {
    double a, b;
    double val_s;  // integral of S(x/t) F(x)/x^2
    double val_1;  // integral of F(x)/x^2
    double err;
    int depth;
};

}  // namespace

DecouplingSequence DecouplingSequence::echo(double total_time, double t_pi) {
    DecouplingSequence s{1, t_pi, total_time, SequenceKind::Echo};
    validate(s);
    return s;
}

DecouplingSequence DecouplingSequence::cpmg(int n_pulses, double total_time, double t_pi) {
    DecouplingSequence s{n_pulses, t_pi, total_time, SequenceKind::Cpmg};
    validate(s);
    return s;
}

void validate(const DecouplingSequence& seq) {
    if (seq.n_pulses < 1) throw std::invalid_argument("DecouplingSequence: N >= 1 required");
    if (seq.total_time <= 0.0)
        throw std::invalid_argument("DecouplingSequence: total_time must be > 0");
    if (seq.t_pi < 0.0) throw std::invalid_argument("DecouplingSequence: t_pi must be >= 0");
    if (seq.kind == SequenceKind::Echo && seq.n_pulses != 1)
        throw std::invalid_argument("DecouplingSequence: Echo implies N = 1");
}

double filter_function(double x, int n_pulses) {
    if (n_pulses < 1) throw std::invalid_argument("filter_function: N >= 1 required");
    const double s = std::sin(x / (4.0 * n_pulses));
    const double s4 = s * s * s * s;
    return 8.0 * s4 * peak_ratio(x, n_pulses);
}

double filter_weight(double omega, const DecouplingSequence& seq) {
    validate(seq);
    if (omega <= 0.0) throw std::invalid_argument("filter_weight: omega must be > 0");
    const double x = omega * seq.total_time;
    return filter_function(x, seq.n_pulses) / (omega * omega);
}

double chi_exact(const NoiseSpectrum& spectrum, const DecouplingSequence& seq,
                 const ChiOptions& opts) {
    validate(seq);
    validate(spectrum);
    const int n = seq.n_pulses;
    const double t = seq.total_time;

    // integrand pair in x = w t
    const auto fs = [&](double x, double& f_s, double& f_1) {
        const double F = filter_function(x, n);
        const double g = F / (x * x);
        f_1 = g;
        f_s = g * eval_total(spectrum, x / t);
    };
    const auto eval_lobe = [&](double a, double b, int depth) {
        // GK15 panel accumulating both integrands in one pass of F
        using namespace quad::detail;
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        double ks = 0, k1 = 0, gs = 0, g1 = 0;
        for (int i = 0; i < 8; ++i) {
            double vs, v1;
            if (i == 7) {
                fs(c, vs, v1);
                ks += kGK15WeightsK[7] * vs;
                k1 += kGK15WeightsK[7] * v1;
                gs += kGK15WeightsG[3] * vs;
                g1 += kGK15WeightsG[3] * v1;
                continue;
            }
            double vs2, v12;
            fs(c - h * kGK15Nodes[i], vs, v1);
            fs(c + h * kGK15Nodes[i], vs2, v12);
            ks += kGK15WeightsK[i] * (vs + vs2);
            k1 += kGK15WeightsK[i] * (v1 + v12);
            if (i % 2 == 1) {
                gs += kGK15WeightsG[i / 2] * (vs + vs2);
                g1 += kGK15WeightsG[i / 2] * (v1 + v12);
            }
        }
        return Lobe{a, b, ks * h, k1 * h, std::abs((ks - gs) * h), depth};
    };

    int harmonics = opts.min_harmonics;
    for (;;) {
        // explicit lobes out to the midpoint past peak k = 2*harmonics + 1
        const double x_max = 2.0 * kPi * n * (harmonics + 1.0);
        const std::size_t n_lobes = std::size_t(std::llround(x_max / kPi));

        std::vector<Lobe> lobes;
        lobes.reserve(n_lobes + 64);
        double sum_s = 0, sum_1 = 0, sum_err = 0;
        for (std::size_t m = 0; m < n_lobes; ++m) {
            lobes.push_back(eval_lobe(m * kPi, (m + 1) * kPi, 0));
            sum_s += lobes.back().val_s;
            sum_1 += lobes.back().val_1;
            sum_err += lobes.back().err;
        }

        // refine the worst lobes until the quadrature error is well below tol
        auto cmp = [&lobes](std::size_t i, std::size_t j) { return lobes[i].err < lobes[j].err; };
        std::priority_queue<std::size_t, std::vector<std::size_t>, decltype(cmp)> heap(cmp);
        for (std::size_t i = 0; i < lobes.size(); ++i) heap.push(i);
        const double err_budget = 0.2 * opts.rel_tol;
        std::size_t extra = 0;
        while (!heap.empty() && extra < 20000) {
            if (sum_err <= err_budget * std::abs(sum_s) + 1e-300) break;
            const std::size_t i = heap.top();
            heap.pop();
            const Lobe lo = lobes[i];
            if (lo.depth > 40) continue;
            const double mid = 0.5 * (lo.a + lo.b);
            const Lobe l = eval_lobe(lo.a, mid, lo.depth + 1);
            const Lobe r = eval_lobe(mid, lo.b, lo.depth + 1);
            sum_s += l.val_s + r.val_s - lo.val_s;
            sum_1 += l.val_1 + r.val_1 - lo.val_1;
            sum_err += l.err + r.err - lo.err;
            lobes[i] = l;
            heap.push(i);
            lobes.push_back(r);
            heap.push(lobes.size() - 1);
            ++extra;
        }

        // analytic remainder beyond x_max: the residual filter weight
        // R = pi/2 - int F/x^2 (known exactly from the quadrature) is
        // distributed over the remaining peaks k proportional to 1/k^2 and
        // applied to S at the peak frequencies. Exact for a white floor;
        // the decaying part carries the envelope-shape error (~5-15%).
        const double residual = std::max(kPi / 2.0 - sum_1, 0.0);
        const auto odd_inv_sq_tail = [](double k) {  // sum of j^-2, odd j >= k
            return 0.5 / k + 0.5 / (k * k) + 1.0 / (3.0 * k * k * k);
        };
        const double floor = spectrum.white_floor;
        double tail = floor * residual;
        double tail_err = 0.0;
        {
            const long k_start = 2L * harmonics + 3;
            const double w_scale = residual / odd_inv_sq_tail(double(k_start));
            double acc = 0.0;
            long k = k_start;
            double excess = 0.0;
            for (int terms = 0; terms < 200000; ++terms, k += 2) {
                excess = eval_total(spectrum, double(k) * kPi * n / t) - floor;
                if (excess <= 0.0) break;
                const double term = excess * w_scale / (double(k) * double(k));
                acc += term;
                if (term < 1e-6 * (acc + 1e-300) && terms > 8) break;
            }
            const double k_rem = std::max(excess, 0.0) * w_scale * odd_inv_sq_tail(double(k));
            tail += acc + k_rem;
            tail_err = 0.15 * acc + k_rem;
        }

        const double chi = (t / kPi) * (sum_s + tail);
        const double err = (t / kPi) * (sum_err + tail_err);
        if (chi == 0.0) return 0.0;
        if (err <= opts.rel_tol * std::abs(chi)) return chi;
        if (harmonics >= opts.max_harmonics)
            throw quad::QuadratureError(
                "chi_exact: tolerance not reached at " + std::to_string(harmonics) +
                    " harmonics (rel err " + std::to_string(err / std::abs(chi)) + ")",
                chi, err);
        harmonics = std::min(2 * harmonics, opts.max_harmonics);
    }
}

double chi_delta(const NoiseSpectrum& spectrum, int n_pulses, double total_time) {
    if (n_pulses < 1) throw std::invalid_argument("chi_delta: N >= 1 required");
    if (total_time <= 0.0) throw std::invalid_argument("chi_delta: total_time must be > 0");
    if (n_pulses < 64)
        warn("chi_delta: N = " + std::to_string(n_pulses) +
             " is below the N >= 64 validity cutoff of the delta approximation");
    const double w0 = kPi * n_pulses / total_time;
    return total_time * eval_total(spectrum, w0) / kPi;
}

double delta_calibration() {
    static const double kappa = [] {
        const auto white = NoiseSpectrum::white(1.0);
        const auto seq = DecouplingSequence::cpmg(128, 1.0);
        return chi_exact(white, seq) / (1.0 / kPi);
    }();
    return kappa;
}

std::vector<std::pair<int, double>> predict_t2_curve(const NoiseSpectrum& spectrum,
                                                     const std::vector<int>& n_values,
                                                     double chi_threshold) {
    if (n_values.empty()) throw std::invalid_argument("predict_t2_curve: n_values empty");
    if (chi_threshold <= 0.0)
        throw std::invalid_argument("predict_t2_curve: threshold must be > 0");
    constexpr double t_lo = 1e-9, t_hi = 10.0;
    std::vector<std::pair<int, double>> out;
    out.reserve(n_values.size());
    for (int n : n_values) {
        const auto chi_at = [&](double t) {
            return chi_exact(spectrum, DecouplingSequence::cpmg(n, t));
        };
        double lo = t_lo, hi = t_hi;
        if (chi_at(lo) > chi_threshold || chi_at(hi) < chi_threshold)
            throw std::runtime_error("predict_t2_curve: no root of chi = threshold in [1 ns, 10 s] for N = " +
                                     std::to_string(n));
        while (hi / lo > 1.0 + 1e-4) {
            const double mid = std::sqrt(lo * hi);
            (chi_at(mid) > chi_threshold ? hi : lo) = mid;
        }
        out.emplace_back(n, std::sqrt(lo * hi));
    }
    return out;
}

ChiCurve compute_chi_curve(const NoiseSpectrum& spectrum, int n_pulses, double t_pi,
                           const std::vector<double>& times, const ChiOptions& opts) {
    ChiCurve c;
    c.n_pulses = n_pulses;
    c.t_pi = t_pi;
    c.time_s = times;
    c.chi.reserve(times.size());
    for (double t : times)
        c.chi.push_back(chi_exact(spectrum, DecouplingSequence::cpmg(n_pulses, t, t_pi), opts));
    return c;
}

}  // namespace spincoh
