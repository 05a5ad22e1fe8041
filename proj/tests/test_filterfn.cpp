#include "doctest.h"

#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "spincoh/filterfn.hpp"
#include "spincoh/log.hpp"
#include "spincoh/quadrature.hpp"

using namespace spincoh;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

// OU variance realizing an Eq.-1 Lorentzian of amplitude delta
double lorentzian_variance(double delta) { return delta * delta / kTwoPi; }
}  // namespace

TEST_SUITE_BEGIN("filterfn");

TEST_CASE("sequence validation") {
    CHECK_THROWS_AS(DecouplingSequence::cpmg(0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(DecouplingSequence::cpmg(4, -1.0), std::invalid_argument);
    DecouplingSequence bad{2, 0.0, 1.0, SequenceKind::Echo};
    CHECK_THROWS_AS(validate(bad), std::invalid_argument);
    CHECK(DecouplingSequence::echo(1e-6).n_pulses == 1);
}

TEST_CASE("filter closed form: DC suppression, zeros, Hahn reduction") {
    const auto seq = DecouplingSequence::cpmg(8, 1e-6);
    // DC noise is fully decoupled: weight -> 0 as omega -> 0+
    CHECK(filter_weight(1e-3, seq) < 1e-30);
    CHECK(filter_weight(1.0, seq) < filter_weight(kPi * 8 / 1e-6, seq) * 1e-10);

    // N = 1 is the Hahn-echo filter 8 sin^4(x/4)
    for (double x : {0.3, 1.0, 2.0, kTwoPi, 9.0}) {
        const double s = std::sin(x / 4.0);
        CHECK(filter_function(x, 1) == doctest::Approx(8.0 * s * s * s * s).epsilon(1e-12));
    }
    CHECK(filter_function(4.0 * kPi, 1) == doctest::Approx(0.0));
    // even-N zero of sin^2(x/2) away from the peaks
    CHECK(filter_function(4.0 * kPi, 2) == doctest::Approx(0.0));
}

TEST_CASE("primary peak value and removable singularity, N = 64") {
    const int n = 64;
    const double t = 1.0;
    const auto seq = DecouplingSequence::cpmg(n, t);
    const double w0 = kPi * n / t;
    // peak height F = 2 N^2, so the weight is 2 t^2 / pi^2 = 0.2026423672846755
    CHECK(filter_weight(w0, seq) == doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-9));
    // smooth through the 0/0 point
    CHECK(filter_weight(w0 * (1 + 1e-6), seq) ==
          doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-4));
    CHECK(filter_weight(w0 * (1 - 1e-9), seq) ==
          doctest::Approx(2.0 / (kPi * kPi)).epsilon(1e-6));
}

TEST_CASE("chi_exact: zero spectrum and exact white-noise law") {
    const NoiseSpectrum zero;
    CHECK(chi_exact(zero, DecouplingSequence::cpmg(16, 1e-5)) == doctest::Approx(0.0));

    // white noise: chi = S0 t / 2, independent of N
    for (int n : {1, 2, 16, 128}) {
        for (double t : {1e-6, 5e-5}) {
            const double chi = chi_exact(NoiseSpectrum::white(3.0), DecouplingSequence::cpmg(n, t));
            CHECK(chi == doctest::Approx(3.0 * t / 2.0).epsilon(1e-8));
        }
    }
}

TEST_CASE("chi_exact against the time-domain OU oracle across N") {
    // the oracle integrates the exponential autocovariance in closed form
    // over the CPMG toggling rectangles; no quadrature involved
    const double delta = 1e6, tau = 46e-9;
    const auto spec = NoiseSpectrum::single_lorentzian(delta, tau);
    for (int n : {1, 2, 3, 4, 16, 64, 128}) {
        for (double t : {5e-7, 5e-6, 5e-5}) {
            const double got = chi_exact(spec, DecouplingSequence::cpmg(n, t));
            const double want =
                oracles::ou_chi_time_domain(lorentzian_variance(delta), tau,
                                            oracles::cpmg_segments(n, t));
            CHECK(got == doctest::Approx(want).epsilon(2e-5));
        }
    }
}

TEST_CASE("chi_exact refinement oracle at the paper's Lorentzian") {
    const auto spec = NoiseSpectrum::single_lorentzian(1e6, 46e-9);
    const auto seq = DecouplingSequence::cpmg(128, 50e-6);
    const double chi = chi_exact(spec, seq);
    ChiOptions tight;
    tight.rel_tol = 1e-7;
    tight.min_harmonics = 500;
    const double chi_tight = chi_exact(spec, seq, tight);
    CHECK(chi == doctest::Approx(chi_tight).epsilon(1e-5));
    // frozen independent reference (mpmath per-lobe quadrature)
    CHECK(chi == doctest::Approx(0.27956037519).epsilon(2e-6));
}

TEST_CASE("chi_exact monotone in time and amplitudes") {
    NoiseSpectrum s;
    s.lorentzians = {{2.9e6, 40e-9}};
    s.one_over_f = OneOverFComponent{1e15, 1.6};
    double prev = 0.0;
    for (double t : {1e-6, 3e-6, 1e-5, 3e-5}) {
        const double c = chi_exact(s, DecouplingSequence::cpmg(32, t));
        CHECK(c >= prev);
        prev = c;
    }
    NoiseSpectrum s2 = s;
    s2.lorentzians[0].delta *= 2.0;
    CHECK(chi_exact(s2, DecouplingSequence::cpmg(32, 1e-5)) >
          chi_exact(s, DecouplingSequence::cpmg(32, 1e-5)));
}

TEST_CASE("echo OU regimes: t^3 below tau_c, t above") {
    const double delta = 5e6, tau = 1e-6;
    const auto spec = NoiseSpectrum::single_lorentzian(delta, tau);
    const auto slope = [&](double t_lo, double t_hi) {
        const double c_lo = chi_exact(spec, DecouplingSequence::echo(t_lo));
        const double c_hi = chi_exact(spec, DecouplingSequence::echo(t_hi));
        return std::log(c_hi / c_lo) / std::log(t_hi / t_lo);
    };
    CHECK(slope(0.01 * tau, 0.04 * tau) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(slope(50 * tau, 200 * tau) == doctest::Approx(1.0).epsilon(0.15));
    // and the closed form itself
    const double t = 0.3 * tau;
    CHECK(chi_exact(spec, DecouplingSequence::echo(t)) ==
          doctest::Approx(oracles::ou_echo_chi(lorentzian_variance(delta), tau, t))
              .epsilon(1e-5));
}

TEST_CASE("chi_exact reports non-convergence with the partial sum") {
    const auto spec = NoiseSpectrum::single_lorentzian(1e6, 46e-9);
    const auto seq = DecouplingSequence::cpmg(16, 2e-5);
    const double truth = chi_exact(spec, seq);
    ChiOptions impossible;
    impossible.rel_tol = 1e-16;  // below what the tail estimate can certify
    impossible.min_harmonics = 50;
    impossible.max_harmonics = 50;
    try {
        (void)chi_exact(spec, seq, impossible);
        FAIL("expected QuadratureError");
    } catch (const quad::QuadratureError& e) {
        CHECK(e.partial_value == doctest::Approx(truth).epsilon(1e-3));
        CHECK(e.error_estimate > 0.0);
    }
}

TEST_CASE("chi_delta: identity, white linearity, validity warning") {
    const double t = 7e-6;
    // S(omega0) = pi/t makes chi exactly 1
    CHECK(chi_delta(NoiseSpectrum::white(kPi / t), 128, t) == doctest::Approx(1.0));
    CHECK(chi_delta(NoiseSpectrum::white(2.0), 128, t) ==
          doctest::Approx(2.0 * t / kPi).epsilon(1e-14));

    std::vector<std::string> warnings;
    set_warn_sink([&](const std::string& msg) { warnings.push_back(msg); });
    (void)chi_delta(NoiseSpectrum::white(1.0), 32, t);
    set_warn_sink({});
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("below the N >= 64") != std::string::npos);
}

TEST_CASE("chi_delta strictly decreasing in N for a strictly decreasing spectrum") {
    NoiseSpectrum s;
    s.one_over_f = OneOverFComponent{1e12, 1.5};
    const double t = 1e-5;
    double prev = chi_delta(s, 64, t);
    for (int n : {128, 256, 512}) {
        const double c = chi_delta(s, n, t);
        CHECK(c < prev);
        prev = c;
    }
}

TEST_CASE("kappa calibration: exact for white noise, sequence independent") {
    const double kappa = delta_calibration();
    CHECK(kappa == doctest::Approx(kPi / 2.0).epsilon(1e-9));
    for (int n : {64, 256, 1024}) {
        const double t = 3e-5;
        const auto white = NoiseSpectrum::white(0.7);
        CHECK(kappa * chi_delta(white, n, t) ==
              doctest::Approx(chi_exact(white, DecouplingSequence::cpmg(n, t))).epsilon(1e-8));
    }
}

TEST_CASE("calibrated delta approximation near the exact value at N = 128") {
    const auto spec = NoiseSpectrum::single_lorentzian(1e6, 46e-9);
    const double t = 50e-6;
    const double ratio = delta_calibration() * chi_delta(spec, 128, t) /
                         chi_exact(spec, DecouplingSequence::cpmg(128, t));
    CHECK(ratio > 0.8);
    CHECK(ratio < 1.25);
}

TEST_CASE("predict_t2_curve: white noise is not decoupled") {
    const double s0 = 2.0 / 50e-6;  // chi = 1 at exactly 50 us
    const auto curve = predict_t2_curve(NoiseSpectrum::white(s0), {1, 16, 256});
    for (const auto& [n, t2] : curve) CHECK(t2 == doctest::Approx(50e-6).epsilon(3e-4));
    // no root when the noise is far too weak
    CHECK_THROWS_AS(predict_t2_curve(NoiseSpectrum::white(1e-9), {4}), std::runtime_error);
}

TEST_CASE("compute_chi_curve carries times, chi, and metadata") {
    const auto spec = NoiseSpectrum::white(1e4);
    const auto c = compute_chi_curve(spec, 8, 1e-8, {1e-6, 2e-6});
    CHECK(c.n_pulses == 8);
    REQUIRE(c.chi.size() == 2);
    CHECK(c.chi[1] == doctest::Approx(1e4 * 2e-6 / 2.0).epsilon(1e-8));
}

TEST_SUITE_END();
