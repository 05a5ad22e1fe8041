#include "spincoh/spectra.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace spincoh {

NoiseSpectrum NoiseSpectrum::white(double s0) {
    NoiseSpectrum s;
    s.white_floor = s0;
    return s;
}

NoiseSpectrum NoiseSpectrum::single_lorentzian(double delta, double tau_c) {
    NoiseSpectrum s;
    s.lorentzians.push_back({delta, tau_c});
    return s;
}

double eval_lorentzian_sum(const std::vector<LorentzianComponent>& components, double omega) {
    if (omega < 0.0) throw std::invalid_argument("eval_lorentzian_sum: omega must be >= 0");
    double out = 0.0;
    for (const auto& c : components) {
        if (c.tau_c <= 0.0)
            throw std::invalid_argument("eval_lorentzian_sum: tau_c must be > 0");
        if (c.delta < 0.0)
            throw std::invalid_argument("eval_lorentzian_sum: delta must be >= 0");
        const double wt = omega * c.tau_c;
        out += c.delta * c.delta * c.tau_c / (std::numbers::pi * (1.0 + wt * wt));
    }
    return out;
}

double eval_total(const NoiseSpectrum& spectrum, double omega) {
    double out = eval_lorentzian_sum(spectrum.lorentzians, omega);
    if (spectrum.one_over_f && spectrum.one_over_f->delta_e > 0.0) {
        if (omega <= 0.0)
            throw std::domain_error("eval_total: 1/f^a term diverges at omega = 0");
        out += spectrum.one_over_f->delta_e / std::pow(omega, spectrum.one_over_f->exponent_a);
    }
    return out + spectrum.white_floor;
}

std::vector<LorentzianComponent> lorentzian_comb_for_power_law(
    const OneOverFComponent& term, double omega_min, double omega_max, int per_decade) {
    const double a = term.exponent_a;
    if (a <= 0.0 || a >= 2.0)
        throw std::invalid_argument("lorentzian_comb_for_power_law: need 0 < a < 2");
    if (omega_min <= 0.0 || omega_max <= omega_min)
        throw std::invalid_argument("lorentzian_comb_for_power_law: bad omega band");
    if (per_decade < 1)
        throw std::invalid_argument("lorentzian_comb_for_power_law: per_decade >= 1");
    // The comb realizes S(w) = (2 sin(pi a/2) Delta_e / pi) w^-a
    // int u^(a-1)/(1+u^2) du over the covered u = w tau range. Pad the tau
    // range so each truncated edge carries < 0.5% of the full integral
    // I_a = (pi/2)/sin(pi a/2); the slow-tau side scales like u^(a-2) and
    // needs wide padding as a -> 2.
    const double integral_a = (std::numbers::pi / 2.0) / std::sin(std::numbers::pi * a / 2.0);
    const double edge_tol = 0.005;
    const double u_min = std::pow(edge_tol * a * integral_a, 1.0 / a);
    const double u_max =
        std::min(std::pow(edge_tol * (2.0 - a) * integral_a, -1.0 / (2.0 - a)), 1e12);
    const double tau_lo = u_min / omega_max;
    const double tau_hi = u_max / omega_min;
    const double dln = std::numbers::ln10 / per_decade;
    const double weight = 2.0 * std::sin(std::numbers::pi * a / 2.0) * term.delta_e * dln;
    std::vector<LorentzianComponent> comb;
    for (double lt = std::log(tau_lo); lt <= std::log(tau_hi) + 1e-12; lt += dln) {
        const double tau = std::exp(lt);
        comb.push_back({std::sqrt(weight * std::pow(tau, a - 1.0)), tau});
    }
    return comb;
}

void validate(const NoiseSpectrum& spectrum) {
    for (const auto& c : spectrum.lorentzians) {
        if (c.tau_c <= 0.0) throw std::invalid_argument("NoiseSpectrum: tau_c must be > 0");
        if (c.delta < 0.0) throw std::invalid_argument("NoiseSpectrum: delta must be >= 0");
    }
    if (spectrum.one_over_f && spectrum.one_over_f->delta_e < 0.0)
        throw std::invalid_argument("NoiseSpectrum: delta_e must be >= 0");
    if (spectrum.white_floor < 0.0)
        throw std::invalid_argument("NoiseSpectrum: white_floor must be >= 0");
}

}  // namespace spincoh
