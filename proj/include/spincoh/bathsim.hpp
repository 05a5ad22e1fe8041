#pragma once

#include <cstdint>
#include <vector>

#include "spincoh/extract.hpp"
#include "spincoh/filterfn.hpp"
#include "spincoh/spectra.hpp"

namespace spincoh {

// ---------------------------------------------------------------------------
// Ornstein-Uhlenbeck dephasing bath
// ---------------------------------------------------------------------------

// Stationary OU process b(t) with Var b = delta^2 and autocovariance
// delta^2 exp(-|tau|/tau_c). In this toolkit's spectral convention its
// one-sided density equals a LorentzianComponent of amplitude
// sqrt(2 pi) * delta (see spectrum_of).
struct OUParams {
    double delta = 0.0;   // coupling (rad/s); stationary std dev of b
    double tau_c = 1e-6;  // correlation time (s)
    double dt = 1e-8;     // trajectory sampling step (s); dt <= tau_c/10
    std::uint64_t seed = 1;
};

// Equivalent one-sided spectrum of the OU process (single Lorentzian).
NoiseSpectrum spectrum_of(const OUParams& params);

// OU params realizing a Lorentzian component (inverse of spectrum_of).
OUParams ou_params_for(const LorentzianComponent& component, double dt, std::uint64_t seed);

// Exact-discretization trajectory sampled at 0, dt, 2dt, ... <= duration:
//   b_{i+1} = b_i e^{-dt/tau_c} + delta sqrt(1 - e^{-2 dt/tau_c}) xi_i,
// initial sample from the stationary distribution. Rejects dt > tau_c/10.
std::vector<double> ou_trajectory(const OUParams& params, double duration);

// How dephasing is treated while a pi pulse is being applied.
enum class PulseDephasingMode {
    AccumulateDuringPulse,  // phase accumulates through the pulse window
    FrozenDuringPulse,      // accumulation suspended (s = 0) during the pulse
    ZeroWidth,              // pulses take no wall time
};

struct CoherencePoint {
    double t = 0.0;       // total free precession time (s)
    double c = 0.0;       // <cos phi>
    double std_err = 0.0; // sample standard error of the mean
};

// Simulated coherence trace (CSV columns t_s, c, stderr).
struct SimTrace {
    int n_pulses = 1;
    double t_pi = 0.0;
    std::vector<double> time_s;
    std::vector<double> c;
    std::vector<double> std_err;
    std::uint64_t seed = 0;

    CoherenceTrace as_coherence_trace(const std::string& source) const;
};

// Monte Carlo CPMG coherence under an OU bath (sum of independent OU
// components): C = <cos phi>, phi = int s(u) b(u) du with the toggling sign
// flipping at pulse centers (CPMG timing tau/2, tau, ..., tau, tau/2).
// Phase increments over every interval are sampled from the exact joint
// distribution of (b, int b dt), so there is no time-step bias. Requires
// n_shots >= 100. Deterministic in (seed, shot index); shots are reduced in
// fixed chunk order independent of thread count.
CoherencePoint simulate_coherence(const std::vector<OUParams>& components,
                                  const DecouplingSequence& seq, PulseDephasingMode mode,
                                  int n_shots, std::uint64_t seed, int n_threads = 0);

CoherencePoint simulate_coherence(const OUParams& params, const DecouplingSequence& seq,
                                  PulseDephasingMode mode, int n_shots);

SimTrace simulate_coherence_curve(const std::vector<OUParams>& components, int n_pulses,
                                  double t_pi, const std::vector<double>& times,
                                  PulseDephasingMode mode, int n_shots, std::uint64_t seed,
                                  int n_threads = 0);

// ---------------------------------------------------------------------------
// Discrete dipolar (telegraph) bath
// ---------------------------------------------------------------------------

enum class HoppingMode {
    None,             // positions drawn once and kept for every shot
    ResamplePerShot,  // positions redrawn every shot (configurational averaging)
};

struct DipolarBathConfig {
    int dimensionality = 3;          // D in {1, 2, 3}
    int interaction_exponent = 3;    // alpha: 3 dipolar, 2 point charge
    double spin_density = 0.0;       // per unit D-volume
    double flip_rate = 0.0;          // 1/tau_c (s^-1)
    HoppingMode hopping = HoppingMode::None;
    double coupling_prefactor = 0.0; // rad/s * (length)^alpha
    double exclusion_radius = 0.0;   // minimum probe-spin distance
    int n_spins = 0;                 // > 0 overrides the density-derived count
    double region_size = 0.0;        // outer radius of the spin region
    std::uint64_t seed = 1;
};

void validate(const DipolarBathConfig& config);

// Hahn-echo ensemble over telegraph spins: each bath spin holds +-1, flips at
// flip_rate, couples as prefactor/r^alpha; the echo phase uses the toggling
// sign (+1 first half, -1 second half). Returns chi(t) = -ln <C(t)>.
// Realizations are independent per time point; with hopping none the spin
// positions are frozen once from the seed.
ChiCurve dipolar_echo_ensemble(const DipolarBathConfig& config, const std::vector<double>& times,
                               int n_realizations);

// ---------------------------------------------------------------------------
// Deterministic stream derivation and portable gaussian sampling
// ---------------------------------------------------------------------------

namespace rng {

std::uint64_t mix(std::uint64_t seed, std::uint64_t salt_a, std::uint64_t salt_b = 0);

// mt19937_64 + Box-Muller, fully pinned (no library-defined distributions).
class Gaussian {
  public:
    explicit Gaussian(std::uint64_t seed);
    double operator()();
    double uniform();  // in [0, 1)

  private:
    std::uint64_t s_[4];
    bool have_spare_ = false;
    double spare_ = 0.0;
    std::uint64_t next_u64();
};

}  // namespace rng

}  // namespace spincoh
