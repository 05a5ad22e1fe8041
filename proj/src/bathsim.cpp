#include "spincoh/bathsim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "spincoh/log.hpp"

namespace spincoh {

namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}  // namespace

// ---------------------------------------------------------------------------
// rng: splitmix64-derived streams feeding xoshiro256++, Box-Muller gaussians
// ---------------------------------------------------------------------------

namespace rng {

namespace {
inline std::uint64_t splitmix64_next(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}
inline std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }
}  // namespace

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b) {
    std::uint64_t x = seed;
    (void)splitmix64_next(x);
    x ^= 0xA0761D6478BD642FULL + salt_a;
    (void)splitmix64_next(x);
    x ^= 0xE7037ED1A0B428DBULL + salt_b;
    return splitmix64_next(x);
}

Gaussian::Gaussian(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& si : s_) si = splitmix64_next(x);
}

std::uint64_t Gaussian::next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double Gaussian::uniform() {
    return double(next_u64() >> 11) * 0x1.0p-53;
}

double Gaussian::operator()() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    double u = uniform();
    while (u <= 0.0) u = uniform();
    const double r = std::sqrt(-2.0 * std::log(u));
    const double phi = kTwoPi * uniform();
    spare_ = r * std::sin(phi);
    have_spare_ = true;
    return r * std::cos(phi);
}

}  // namespace rng

// ---------------------------------------------------------------------------
// OU bath
// ---------------------------------------------------------------------------

NoiseSpectrum spectrum_of(const OUParams& params) {
    // Var b = delta^2 and K(tau) = delta^2 exp(-|tau|/tau_c) correspond to an
    // Eq.-1-normalized Lorentzian of amplitude sqrt(2 pi) delta.
    return NoiseSpectrum::single_lorentzian(std::sqrt(kTwoPi) * params.delta, params.tau_c);
}

OUParams ou_params_for(const LorentzianComponent& component, double dt, std::uint64_t seed) {
    OUParams p;
    p.delta = component.delta / std::sqrt(kTwoPi);
    p.tau_c = component.tau_c;
    p.dt = dt;
    p.seed = seed;
    return p;
}

namespace {

void validate_ou(const OUParams& p) {
    if (p.delta < 0.0) throw std::invalid_argument("OUParams: delta must be >= 0");
    if (p.tau_c <= 0.0) throw std::invalid_argument("OUParams: tau_c must be > 0");
    if (p.dt <= 0.0) throw std::invalid_argument("OUParams: dt must be > 0");
    if (p.dt > p.tau_c / 10.0)
        throw std::invalid_argument("OUParams: dt must be <= tau_c/10");
}

// Exact conditional sampling over an interval of length h: updates b and
// returns y = int_0^h b(u) du. Uses one gaussian for the b update and a
// second, correlated one for the integral.
struct OUStepper {
    double sigma, tau;
    double mu, s_b, ymean_coef, c_y, d_y;

    OUStepper(double sigma_, double tau_, double h) : sigma(sigma_), tau(tau_) {
        const double eps = h / tau;
        const double e1 = -std::expm1(-eps);  // 1 - exp(-h/tau)
        mu = 1.0 - e1;
        const double one_minus_mu2 = e1 * (2.0 - e1);
        s_b = sigma * std::sqrt(std::max(one_minus_mu2, 0.0));
        ymean_coef = tau * e1;
        // Var y = sigma^2 tau^2 (2 eps - 2 e1 - e1^2); series below eps ~ 1e-4
        const double var_core = (eps < 1e-4)
                                    ? eps * eps * eps * (2.0 / 3.0 - 0.5 * eps)
                                    : 2.0 * eps - 2.0 * e1 - e1 * e1;
        const double var_y = sigma * sigma * tau * tau * std::max(var_core, 0.0);
        const double cov = sigma * sigma * tau * e1 * e1;
        c_y = (s_b > 0.0) ? cov / s_b : 0.0;
        d_y = std::sqrt(std::max(var_y - c_y * c_y, 0.0));
    }

    double step(double& b, rng::Gaussian& g) const {
        const double xi1 = g(), xi2 = g();
        const double y = ymean_coef * b + c_y * xi1 + d_y * xi2;
        b = mu * b + s_b * xi1;
        return y;
    }
    void propagate_only(double& b, rng::Gaussian& g) const {
        b = mu * b + s_b * g();
    }
};

struct Segment {
    double length;
    double weight;  // toggling sign: +1, -1, or 0 (suspended)
};

// CPMG wall-clock schedule: free intervals tau/2, tau, ..., tau, tau/2 with
// alternating sign; pulse windows handled per mode.
std::vector<Segment> build_schedule(const DecouplingSequence& seq, PulseDephasingMode mode) {
    const int n = seq.n_pulses;
    const double tau = seq.total_time / n;
    const double tp = seq.t_pi;
    std::vector<Segment> raw;
    raw.reserve(std::size_t(2 * n + 1));
    double sign = 1.0;
    for (int j = 0; j <= n; ++j) {
        const double free_len = (j == 0 || j == n) ? tau / 2.0 : tau;
        raw.push_back({free_len, sign});
        if (j == n) break;
        switch (mode) {
            case PulseDephasingMode::ZeroWidth:
                break;
            case PulseDephasingMode::FrozenDuringPulse:
                if (tp > 0.0) raw.push_back({tp, 0.0});
                break;
            case PulseDephasingMode::AccumulateDuringPulse:
                if (tp > 0.0) {
                    raw.push_back({tp / 2.0, sign});
                    raw.push_back({tp / 2.0, -sign});
                }
                break;
        }
        sign = -sign;
    }
    // merge equal-weight neighbours
    std::vector<Segment> merged;
    for (const auto& s : raw) {
        if (!merged.empty() && merged.back().weight == s.weight)
            merged.back().length += s.length;
        else
            merged.push_back(s);
    }
    return merged;
}

}  // namespace

std::vector<double> ou_trajectory(const OUParams& params, double duration) {
    validate_ou(params);
    if (duration <= 0.0) throw std::invalid_argument("ou_trajectory: duration must be > 0");
    const std::size_t n = std::size_t(std::floor(duration / params.dt)) + 1;
    rng::Gaussian g(rng::mix(params.seed, 0x0F, 0));
    std::vector<double> out(n);
    const double mu = std::exp(-params.dt / params.tau_c);
    const double s = params.delta * std::sqrt(-std::expm1(-2.0 * params.dt / params.tau_c));
    out[0] = params.delta * g();
    for (std::size_t i = 1; i < n; ++i) out[i] = out[i - 1] * mu + s * g();
    return out;
}

CoherencePoint simulate_coherence(const std::vector<OUParams>& components,
                                  const DecouplingSequence& seq, PulseDephasingMode mode,
                                  int n_shots, std::uint64_t seed, int n_threads) {
    validate(seq);
    if (components.empty()) throw std::invalid_argument("simulate_coherence: no components");
    for (const auto& c : components) validate_ou(c);
    if (n_shots < 100) throw std::invalid_argument("simulate_coherence: n_shots >= 100 required");

    const auto schedule = build_schedule(seq, mode);
    // per-component steppers per segment length
    std::vector<std::vector<OUStepper>> steppers(components.size());
    for (std::size_t k = 0; k < components.size(); ++k) {
        steppers[k].reserve(schedule.size());
        for (const auto& s : schedule)
            steppers[k].emplace_back(components[k].delta, components[k].tau_c, s.length);
    }

    constexpr int kChunk = 512;
    const int n_chunks = (n_shots + kChunk - 1) / kChunk;
    std::vector<double> chunk_sum(n_chunks, 0.0), chunk_sum2(n_chunks, 0.0);

    const auto run_chunk = [&](int chunk) {
        const int lo = chunk * kChunk;
        const int hi = std::min(lo + kChunk, n_shots);
        double cs = 0.0, cs2 = 0.0;
        std::vector<double> b(components.size());
        for (int shot = lo; shot < hi; ++shot) {
            rng::Gaussian g(rng::mix(seed, 0xC0, std::uint64_t(shot) + 1));
            for (std::size_t k = 0; k < components.size(); ++k)
                b[k] = components[k].delta * g();
            double phi = 0.0;
            for (std::size_t si = 0; si < schedule.size(); ++si) {
                const double w = schedule[si].weight;
                for (std::size_t k = 0; k < components.size(); ++k) {
                    if (w == 0.0)
                        steppers[k][si].propagate_only(b[k], g);
                    else
                        phi += w * steppers[k][si].step(b[k], g);
                }
            }
            const double c = std::cos(phi);
            cs += c;
            cs2 += c * c;
        }
        chunk_sum[chunk] = cs;
        chunk_sum2[chunk] = cs2;
    };

    int workers = n_threads > 0 ? n_threads : int(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, n_chunks);
    if (workers == 1) {
        for (int c = 0; c < n_chunks; ++c) run_chunk(c);
    } else {
        std::vector<std::thread> pool;
        std::atomic<int> next{0};
        for (int t = 0; t < workers; ++t)
            pool.emplace_back([&] {
                for (int c = next.fetch_add(1); c < n_chunks; c = next.fetch_add(1)) run_chunk(c);
            });
        for (auto& th : pool) th.join();
    }

    double sum = 0.0, sum2 = 0.0;  // fixed chunk-order reduction
    for (int c = 0; c < n_chunks; ++c) {
        sum += chunk_sum[c];
        sum2 += chunk_sum2[c];
    }
    CoherencePoint out;
    out.t = seq.total_time;
    out.c = sum / n_shots;
    const double var = std::max(sum2 / n_shots - out.c * out.c, 0.0);
    out.std_err = std::sqrt(var / n_shots);
    return out;
}

CoherencePoint simulate_coherence(const OUParams& params, const DecouplingSequence& seq,
                                  PulseDephasingMode mode, int n_shots) {
    return simulate_coherence(std::vector<OUParams>{params}, seq, mode, n_shots, params.seed);
}

SimTrace simulate_coherence_curve(const std::vector<OUParams>& components, int n_pulses,
                                  double t_pi, const std::vector<double>& times,
                                  PulseDephasingMode mode, int n_shots, std::uint64_t seed,
                                  int n_threads) {
    SimTrace trace;
    trace.n_pulses = n_pulses;
    trace.t_pi = t_pi;
    trace.seed = seed;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const auto seq = DecouplingSequence::cpmg(n_pulses, times[i], t_pi);
        const auto pt = simulate_coherence(components, seq, mode, n_shots,
                                           rng::mix(seed, 0x7A, i + 1), n_threads);
        trace.time_s.push_back(pt.t);
        trace.c.push_back(pt.c);
        trace.std_err.push_back(pt.std_err);
    }
    return trace;
}

CoherenceTrace SimTrace::as_coherence_trace(const std::string& source) const {
    CoherenceTrace tr;
    tr.n_pulses = n_pulses;
    tr.t_pi = t_pi;
    tr.time_s = time_s;
    tr.c = c;
    tr.source = source;
    return tr;
}

// ---------------------------------------------------------------------------
// Dipolar telegraph bath
// ---------------------------------------------------------------------------

void validate(const DipolarBathConfig& config) {
    if (config.dimensionality < 1 || config.dimensionality > 3)
        throw std::invalid_argument("DipolarBathConfig: D must be 1, 2, or 3");
    if (config.interaction_exponent != 2 && config.interaction_exponent != 3)
        throw std::invalid_argument("DipolarBathConfig: alpha must be 2 or 3");
    if (config.spin_density <= 0.0 && config.n_spins <= 0)
        throw std::invalid_argument("DipolarBathConfig: need spin_density > 0 or n_spins > 0");
    if (config.flip_rate <= 0.0)
        throw std::invalid_argument("DipolarBathConfig: flip_rate must be > 0");
    if (config.exclusion_radius <= 0.0)
        throw std::invalid_argument("DipolarBathConfig: exclusion_radius must be > 0");
    if (config.region_size <= config.exclusion_radius)
        throw std::invalid_argument("DipolarBathConfig: region_size must exceed exclusion_radius");
    if (config.coupling_prefactor <= 0.0)
        throw std::invalid_argument("DipolarBathConfig: coupling_prefactor must be > 0");
}

namespace {

double shell_volume(int d, double r_in, double r_out) {
    switch (d) {
        case 1: return 2.0 * (r_out - r_in);
        case 2: return kPi * (r_out * r_out - r_in * r_in);
        default: return 4.0 / 3.0 * kPi * (r_out * r_out * r_out - r_in * r_in * r_in);
    }
}

// radius uniform in the D-dimensional shell [r_in, r_out]
double sample_radius(int d, double r_in, double r_out, double u) {
    const double a = std::pow(r_in, d), b = std::pow(r_out, d);
    return std::pow(a + u * (b - a), 1.0 / d);
}

// Knuth Poisson sampler; fine for the bath sizes used here
int sample_poisson(double mean, rng::Gaussian& g) {
    const double limit = std::exp(-mean);
    int k = 0;
    double p = 1.0;
    do {
        ++k;
        p *= g.uniform();
    } while (p > limit);
    return k - 1;
}

std::vector<double> sample_couplings(const DipolarBathConfig& cfg, int n, rng::Gaussian& g) {
    std::vector<double> b(n);
    for (int j = 0; j < n; ++j) {
        const double r = sample_radius(cfg.dimensionality, cfg.exclusion_radius,
                                       cfg.region_size, g.uniform());
        b[j] = cfg.coupling_prefactor / std::pow(r, cfg.interaction_exponent);
    }
    return b;
}

// int_0^t s(u) sigma(u) du for one telegraph spin under Hahn-echo toggling
// (s = +1 before t/2, -1 after).
double telegraph_echo_integral(double t, double rate, rng::Gaussian& g) {
    double sigma = (g.uniform() < 0.5) ? 1.0 : -1.0;
    const double half = 0.5 * t;
    double pos = 0.0, integral = 0.0;
    while (pos < t) {
        double u = g.uniform();
        while (u <= 0.0) u = g.uniform();
        const double next = pos + (-std::log(u) / rate);
        const double end = std::min(next, t);
        // overlap of [pos, end] with the +1 window minus the -1 window
        const double below = std::max(std::min(end, half) - pos, 0.0);
        const double above = std::max(end - std::max(pos, half), 0.0);
        integral += sigma * (below - above);
        sigma = -sigma;
        pos = next;
    }
    return integral;
}

}  // namespace

ChiCurve dipolar_echo_ensemble(const DipolarBathConfig& config, const std::vector<double>& times,
                               int n_realizations) {
    validate(config);
    if (times.empty()) throw std::invalid_argument("dipolar_echo_ensemble: no times");
    if (n_realizations < 1)
        throw std::invalid_argument("dipolar_echo_ensemble: n_realizations >= 1 required");
    if (n_realizations < 1000)
        warn("dipolar_echo_ensemble: n_realizations < 1000; exponent estimates will be noisy");

    const double volume =
        shell_volume(config.dimensionality, config.exclusion_radius, config.region_size);
    // n_spins > 0 pins the count; otherwise the count is Poissonian with mean
    // density * volume per realization (grand-canonical configurational
    // average, exactly exponential in the single-spin decoherence integral)
    const bool poisson_count = config.n_spins <= 0;
    const double mean_count =
        poisson_count ? config.spin_density * volume : double(config.n_spins);
    if (mean_count < 10.0)
        throw std::runtime_error("dipolar_echo_ensemble: only " +
                                 std::to_string(int(mean_count)) +
                                 " spins in the region; enlarge region_size or density "
                                 "(finite-size artifact guard)");

    std::vector<double> frozen;
    if (config.hopping == HoppingMode::None) {
        rng::Gaussian g(rng::mix(config.seed, 0x505, 0));
        const int n0 = poisson_count ? sample_poisson(mean_count, g) : config.n_spins;
        frozen = sample_couplings(config, std::max(n0, 1), g);
    }

    ChiCurve curve;
    curve.n_pulses = 1;
    curve.t_pi = 0.0;
    curve.label = "dipolar_echo";
    for (std::size_t ti = 0; ti < times.size(); ++ti) {
        const double t = times[ti];
        if (t <= 0.0) throw std::invalid_argument("dipolar_echo_ensemble: times must be > 0");
        double sum_c = 0.0;
        for (int rz = 0; rz < n_realizations; ++rz) {
            rng::Gaussian g(rng::mix(config.seed, ti + 1, std::uint64_t(rz) + 1));
            std::vector<double> resampled;
            if (config.hopping == HoppingMode::ResamplePerShot) {
                const int n = poisson_count ? sample_poisson(mean_count, g) : config.n_spins;
                resampled = sample_couplings(config, n, g);
            }
            const std::vector<double>& b =
                (config.hopping == HoppingMode::ResamplePerShot) ? resampled : frozen;
            double phi = 0.0;
            for (double bj : b) phi += bj * telegraph_echo_integral(t, config.flip_rate, g);
            sum_c += std::cos(phi);
        }
        const double c = sum_c / n_realizations;
        curve.time_s.push_back(t);
        if (c > 0.0) {
            curve.chi.push_back(-std::log(c));
        } else {
            warn("dipolar_echo_ensemble: <C> <= 0 at t = " + std::to_string(t) +
                 "; chi undefined at this point");
            curve.chi.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }
    return curve;
}

}  // namespace spincoh
