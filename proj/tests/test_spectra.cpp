#include "doctest.h"

#include <cmath>
#include <numbers>

#include "spincoh/quadrature.hpp"
#include "spincoh/spectra.hpp"

using namespace spincoh;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_SUITE_BEGIN("spectra");

TEST_CASE("lorentzian sum at closed-form points") {
    // S(0) = Delta^2 tau_c / pi, and the half-height point at omega tau = 1
    CHECK(eval_lorentzian_sum({{1.0, 1.0}}, 0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-14));
    CHECK(eval_lorentzian_sum({{1.0, 1.0}}, 1.0) ==
          doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-14));
}

TEST_CASE("core-shell components at 3.7 MHz match the frozen reference") {
    // independent arbitrary-precision evaluation (40-digit) of the sum
    const std::vector<LorentzianComponent> comps = {{2.9e6, 40e-9}, {1.3e7, 1e-9}};
    const double v = eval_lorentzian_sum(comps, kTwoPi * 3.7e6);
    CHECK(v == doctest::Approx(111188.71655830363).epsilon(1e-12));
}

TEST_CASE("eval_total: white floor, pure 1/f, frozen bare-spectrum value") {
    CHECK(eval_total(NoiseSpectrum::white(5.0), 123.0) == doctest::Approx(5.0));

    NoiseSpectrum one_over_f;
    one_over_f.one_over_f = OneOverFComponent{1.0, 1.0};
    CHECK(eval_total(one_over_f, 2.0) == doctest::Approx(0.5).epsilon(1e-14));

    // bare fit with a DQ anchor of gamma = 1e4 1/s at omega_dq = 2 pi 18.8 MHz
    NoiseSpectrum bare = NoiseSpectrum::single_lorentzian(2.4e7, 1e-9);
    const double omega_dq = kTwoPi * 18.8e6;
    bare.one_over_f = OneOverFComponent{1e4 * std::pow(omega_dq, 1.7), 1.7};
    CHECK(bare.one_over_f->delta_e == doctest::Approx(5.2841376213185977e17).epsilon(1e-12));
    CHECK(eval_total(bare, kTwoPi * 10e6) ==
          doctest::Approx(211871.64359624012).epsilon(1e-12));
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(eval_lorentzian_sum({{1.0, 1.0}}, -1.0), std::invalid_argument);
    CHECK_THROWS_AS(eval_lorentzian_sum({{1.0, 0.0}}, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(eval_lorentzian_sum({{-1.0, 1.0}}, 1.0), std::invalid_argument);
    NoiseSpectrum s;
    s.one_over_f = OneOverFComponent{1.0, 1.5};
    CHECK_THROWS_AS(eval_total(s, 0.0), std::domain_error);
}

TEST_CASE("each Lorentzian integrates to Delta^2/2") {
    for (const auto& [delta, tau] : {std::pair{1.0, 1.0}, {2.9e6, 40e-9}, {1.3e7, 1e-9}}) {
        const std::vector<LorentzianComponent> c = {{delta, tau}};
        const auto integral = quad::integrate_adaptive(
            [&](double w) { return eval_lorentzian_sum(c, w); }, 0.0, 1e4 / tau, 1e-9);
        // analytic tail beyond 1e4/tau: Delta^2/(pi * 1e4) of the total
        CHECK(integral.value ==
              doctest::Approx(delta * delta / 2.0).epsilon(1e-3));
    }
}

TEST_CASE("monotonicity in amplitude parameters and the high-frequency floor") {
    NoiseSpectrum s;
    s.lorentzians = {{2.9e6, 40e-9}, {1.3e7, 1e-9}};
    s.one_over_f = OneOverFComponent{1e15, 1.6};
    s.white_floor = 10.0;
    for (double w : {1e5, 1e6, 1e7, 1e8, 1e9}) {
        const double base = eval_total(s, w);
        NoiseSpectrum up = s;
        up.lorentzians[0].delta *= 1.3;
        CHECK(eval_total(up, w) >= base);
        up = s;
        up.one_over_f->delta_e *= 1.3;
        CHECK(eval_total(up, w) >= base);
        up = s;
        up.white_floor += 5.0;
        CHECK(eval_total(up, w) >= base);
    }
    // S -> white floor at omega = 1e6 / min tau_c, within 1%
    const double w_hi = 1e6 / 1e-9;
    CHECK(eval_total(s, w_hi) == doctest::Approx(s.white_floor).epsilon(0.01));
}

TEST_CASE("lorentzian comb reproduces the power law across the band") {
    for (double a : {1.3, 1.6, 1.7}) {
        const OneOverFComponent term{1e15, a};
        const double wlo = kTwoPi * 1e6, whi = kTwoPi * 1e8;
        const auto comb = lorentzian_comb_for_power_law(term, wlo, whi, 6);
        for (double w = wlo; w <= whi; w *= 1.9) {
            const double want = term.delta_e / std::pow(w, a);
            CHECK(eval_lorentzian_sum(comb, w) == doctest::Approx(want).epsilon(0.02));
        }
    }
    CHECK_THROWS_AS(lorentzian_comb_for_power_law({1.0, 2.5}, 1.0, 10.0, 3),
                    std::invalid_argument);
}

TEST_CASE("strictly decreasing when a 1/f term is present") {
    NoiseSpectrum s;
    s.lorentzians = {{1e6, 50e-9}};
    s.one_over_f = OneOverFComponent{1e12, 1.3};
    double prev = eval_total(s, 1e3);
    for (double w = 2e3; w < 1e10; w *= 1.7) {
        const double cur = eval_total(s, w);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_SUITE_END();
