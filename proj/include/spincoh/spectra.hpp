#pragma once

#include <optional>
#include <vector>

namespace spincoh {

// One Lorentzian bath component,
//   S_k(w) = Delta_k^2 tau_ck / (pi (1 + (w tau_ck)^2)),
// so that the integral over w in [0, inf) is Delta_k^2 / 2.
struct LorentzianComponent {
    double delta = 0.0;   // coupling strength (rad/s)
    double tau_c = 1e-9;  // bath correlation time (s)
};

// Power-law (charge-noise) term Delta_e / w^a.
struct OneOverFComponent {
    double delta_e = 0.0;  // amplitude, rad/s * (rad/s)^a
    double exponent_a = 1.0;
};

// One-sided noise power spectrum in angular frequency (rad/s). All
// user-facing frequencies in Hz convert via w = 2*pi*f.
struct NoiseSpectrum {
    std::vector<LorentzianComponent> lorentzians;
    std::optional<OneOverFComponent> one_over_f;
    double white_floor = 0.0;  // rad/s

    static NoiseSpectrum white(double s0);
    static NoiseSpectrum single_lorentzian(double delta, double tau_c);
};

// Sum of Lorentzian components at angular frequency omega >= 0.
// Throws std::invalid_argument on omega < 0 or any tau_c <= 0 / delta < 0.
double eval_lorentzian_sum(const std::vector<LorentzianComponent>& components, double omega);

// Full spectrum: Lorentzians + Delta_e/w^a + white floor.
// Throws std::domain_error at omega = 0 when a 1/f^a term is present.
double eval_total(const NoiseSpectrum& spectrum, double omega);

// Basic validity (non-negative amplitudes, positive correlation times).
void validate(const NoiseSpectrum& spectrum);

// Lorentzian-comb approximation of a power-law term over [omega_min,
// omega_max]: correlation times log-spaced at `per_decade` per decade with
// amplitudes Delta_j^2 = 2 sin(pi a/2) Delta_e tau_j^(a-1) dln(tau), which
// sums to Delta_e/w^a away from the comb edges. Lets the OU Monte Carlo
// realize 1/f^a-type baths. Requires 0 < a < 2.
std::vector<LorentzianComponent> lorentzian_comb_for_power_law(
    const OneOverFComponent& term, double omega_min, double omega_max, int per_decade = 4);

}  // namespace spincoh
