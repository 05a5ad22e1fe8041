#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oracles.hpp"
#include "spincoh/bathsim.hpp"
#include "spincoh/fitkit.hpp"

using namespace spincoh;
namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

TEST_SUITE_BEGIN("bathsim");

TEST_CASE("stream derivation is deterministic and salt-sensitive") {
    CHECK(rng::mix(1, 2, 3) == rng::mix(1, 2, 3));
    CHECK(rng::mix(1, 2, 3) != rng::mix(1, 2, 4));
    CHECK(rng::mix(1, 2, 3) != rng::mix(2, 2, 3));
    rng::Gaussian a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
}

TEST_CASE("ou_trajectory: validation, zero coupling, determinism") {
    OUParams p{0.0, 1e-6, 1e-8, 7};
    const auto z = ou_trajectory(p, 1e-5);
    for (double v : z) CHECK(v == 0.0);

    p.delta = 1.0;
    p.dt = 2e-7;  // > tau_c/10
    CHECK_THROWS_AS(ou_trajectory(p, 1e-5), std::invalid_argument);
    p.dt = 1e-8;
    const auto t1 = ou_trajectory(p, 1e-5);
    const auto t2 = ou_trajectory(p, 1e-5);
    CHECK(t1 == t2);
}

TEST_CASE("ou stationary distribution passes a KS test at the 1% level") {
    OUParams p{2.5, 1e-6, 1e-7, 11};
    const auto path = ou_trajectory(p, 1.0001e-6);  // ~10 steps per path
    // build 1e4 nearly independent samples from many short paths
    std::vector<double> samples;
    for (std::uint64_t s = 0; s < 1000; ++s) {
        OUParams q = p;
        q.seed = 1000 + s;
        const auto tr = ou_trajectory(q, 1.0001e-6);
        for (std::size_t i = 0; i < tr.size(); i += 1) samples.push_back(tr[i] / p.delta);
    }
    // the per-path samples are correlated (lag 0.1 tau), so thin by 5
    std::vector<double> thin;
    for (std::size_t i = 0; i < samples.size(); i += 5) thin.push_back(samples[i]);
    std::sort(thin.begin(), thin.end());
    const auto phi = [](double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); };
    double d = 0.0;
    for (std::size_t i = 0; i < thin.size(); ++i) {
        const double f = phi(thin[i]);
        d = std::max(d, std::abs(f - double(i + 1) / thin.size()));
        d = std::max(d, std::abs(f - double(i) / thin.size()));
    }
    const double crit = 1.63 / std::sqrt(double(thin.size()));  // alpha = 0.01
    CHECK(d < crit);
}

TEST_CASE("ou ensemble autocovariance matches exp(-lag/tau_c) within 3 sigma") {
    const double tau = 1e-6, delta = 1.0;
    const int n_paths = 10000;
    const double lag = 0.5e-6;
    double sum = 0, sum2 = 0;
    for (int s = 0; s < n_paths; ++s) {
        OUParams p{delta, tau, 5e-8, std::uint64_t(500000 + s)};
        const auto tr = ou_trajectory(p, lag * 1.0001);
        const double x = tr.front() * tr.back();
        sum += x;
        sum2 += x * x;
    }
    const double mean = sum / n_paths;
    const double se = std::sqrt((sum2 / n_paths - mean * mean) / n_paths);
    CHECK(std::abs(mean - std::exp(-lag / tau)) < 3.0 * se);
}

TEST_CASE("ou periodogram matches the Lorentzian of spectrum_of within 10%") {
    const double tau = 1e-6, delta = 1.0, dt = tau / 20.0;
    const int n_steps = 1200, n_paths = 1000;
    const double duration = n_steps * dt;
    std::vector<double> omegas;
    for (double w = 0.1 / tau; w <= 10.0 / tau * 1.0001; w *= std::pow(100.0, 1.0 / 8.0))
        omegas.push_back(w);
    std::vector<double> psd(omegas.size(), 0.0);
    for (int s = 0; s < n_paths; ++s) {
        OUParams p{delta, tau, dt, std::uint64_t(900000 + s)};
        const auto tr = ou_trajectory(p, duration);
        for (std::size_t k = 0; k < omegas.size(); ++k) {
            double re = 0, im = 0;
            for (std::size_t i = 0; i < tr.size(); ++i) {
                re += tr[i] * std::cos(omegas[k] * i * dt);
                im += tr[i] * std::sin(omegas[k] * i * dt);
            }
            psd[k] += (re * re + im * im) * dt * dt / duration;
        }
    }
    const auto spec = spectrum_of(OUParams{delta, tau, dt, 0});
    for (std::size_t k = 0; k < omegas.size(); ++k) {
        psd[k] /= n_paths;
        const double expect = eval_lorentzian_sum(spec.lorentzians, omegas[k]);
        CHECK(psd[k] == doctest::Approx(expect).epsilon(0.10));
    }
}

TEST_CASE("spectrum_of / ou_params_for are inverse maps") {
    const OUParams p{3.3e5, 47e-9, 1e-9, 5};
    const auto spec = spectrum_of(p);
    REQUIRE(spec.lorentzians.size() == 1);
    CHECK(spec.lorentzians[0].delta == doctest::Approx(std::sqrt(kTwoPi) * 3.3e5));
    const auto q = ou_params_for(spec.lorentzians[0], 1e-9, 5);
    CHECK(q.delta == doctest::Approx(p.delta).epsilon(1e-14));
    CHECK(q.tau_c == doctest::Approx(p.tau_c));
}

TEST_CASE("simulate_coherence: zero coupling, argument guards, determinism") {
    const auto seq = DecouplingSequence::cpmg(8, 1e-6);
    OUParams p{0.0, 1e-7, 1e-9, 3};
    const auto pt = simulate_coherence(p, seq, PulseDephasingMode::ZeroWidth, 200);
    CHECK(pt.c == doctest::Approx(1.0));
    CHECK(pt.std_err == doctest::Approx(0.0));

    p.delta = 1e6;
    CHECK_THROWS_AS(simulate_coherence(p, seq, PulseDephasingMode::ZeroWidth, 99),
                    std::invalid_argument);

    const auto a = simulate_coherence({p}, seq, PulseDephasingMode::ZeroWidth, 2000, 77, 1);
    const auto b = simulate_coherence({p}, seq, PulseDephasingMode::ZeroWidth, 2000, 77, 4);
    CHECK(a.c == b.c);  // bit-identical regardless of thread count
    CHECK(a.std_err == b.std_err);
    const auto c = simulate_coherence({p}, seq, PulseDephasingMode::ZeroWidth, 2000, 78, 1);
    CHECK(a.c != c.c);
}

TEST_CASE("zero-width Monte Carlo agrees with the time-domain oracle, N = 64") {
    // the spec's reference point: OU delta = 1e6 rad/s, tau_c = 46 ns
    const double delta = 1e6, tau = 46e-9;
    const int n = 64, n_shots = 10000;
    int checked = 0;
    for (double t : {3e-6, 1e-5, 2e-5, 3e-5, 5e-5, 7e-5}) {
        const double chi =
            oracles::ou_chi_time_domain(delta * delta, tau, oracles::cpmg_segments(n, t));
        if (chi < 0.02 || chi > 3.5) continue;
        const auto pt = simulate_coherence({OUParams{delta, tau, 1e-9, 1}},
                                           DecouplingSequence::cpmg(n, t),
                                           PulseDephasingMode::ZeroWidth, n_shots, 12345, 0);
        CHECK(std::abs(pt.c - std::exp(-chi)) < 3.0 * std::max(pt.std_err, 1e-4));
        ++checked;
    }
    CHECK(checked >= 3);
}

TEST_CASE("Monte Carlo error falls as 1/sqrt(n_shots) with no step bias") {
    const double delta = 2e6, tau = 100e-9;
    const double t = 2e-5;
    const int n = 16;
    const double chi =
        oracles::ou_chi_time_domain(delta * delta, tau, oracles::cpmg_segments(n, t));
    const double c_exact = std::exp(-chi);
    double prev_se = 0.0;
    int step = 0;
    for (int shots : {100, 1000, 10000, 100000}) {
        const auto pt = simulate_coherence({OUParams{delta, tau, 1e-9, 1}},
                                           DecouplingSequence::cpmg(n, t),
                                           PulseDephasingMode::ZeroWidth, shots, 999, 0);
        CHECK(std::abs(pt.c - c_exact) < 4.0 * pt.std_err);
        if (step > 0) CHECK(pt.std_err == doctest::Approx(prev_se / std::sqrt(10.0)).epsilon(0.4));
        prev_se = pt.std_err;
        ++step;
    }
}

TEST_CASE("finite pulses dephase faster (Fig-E8B-style setup)") {
    // tau_c << t_pi and N t_pi comparable to the decay scale
    const double tau = 1e-9, t_pi = 10e-9;
    const double delta = 2.2e7;
    const int n = 10, shots = 40000;
    const std::vector<OUParams> bath = {OUParams{delta, tau, 1e-10, 1}};
    for (double t : {1e-6, 2e-6}) {
        const auto seq0 = DecouplingSequence::cpmg(n, t, 0.0);
        const auto seqp = DecouplingSequence::cpmg(n, t, t_pi);
        const auto zero = simulate_coherence(bath, seq0, PulseDephasingMode::ZeroWidth, shots, 5, 0);
        const auto acc =
            simulate_coherence(bath, seqp, PulseDephasingMode::AccumulateDuringPulse, shots, 5, 0);
        const auto froz =
            simulate_coherence(bath, seqp, PulseDephasingMode::FrozenDuringPulse, shots, 5, 0);
        const double chi =
            oracles::ou_chi_time_domain(delta * delta, tau, oracles::cpmg_segments(n, t));
        // accumulating through the pulse windows loses extra coherence
        CHECK(acc.c < zero.c - 2.0 * (acc.std_err + zero.std_err));
        // sign-suspended pulses track the ideal-pulse prediction
        CHECK(std::abs(froz.c - std::exp(-chi)) < 4.0 * froz.std_err + 0.01);
        CHECK(std::abs(zero.c - std::exp(-chi)) < 3.5 * zero.std_err);
    }
}

TEST_CASE("simulate_coherence_curve carries metadata and stderr") {
    const auto tr = simulate_coherence_curve({OUParams{1e6, 46e-9, 1e-9, 1}}, 4, 1e-8,
                                             {1e-5, 2e-5}, PulseDephasingMode::ZeroWidth, 400, 9, 0);
    CHECK(tr.n_pulses == 4);
    REQUIRE(tr.c.size() == 2);
    CHECK(tr.std_err[0] > 0.0);
    const auto ct = tr.as_coherence_trace("sim");
    CHECK(ct.source == "sim");
    CHECK(ct.c == tr.c);
}

TEST_CASE("dipolar bath validation and the finite-size guard") {
    DipolarBathConfig c;
    c.dimensionality = 3;
    c.interaction_exponent = 3;
    c.spin_density = 1e-3;
    c.flip_rate = 1e6;
    c.coupling_prefactor = 1e5;
    c.exclusion_radius = 1.0;
    c.region_size = 4.0;
    CHECK_THROWS_AS(dipolar_echo_ensemble(c, {1e-6}, 100), std::runtime_error);  // < 10 spins
    c.interaction_exponent = 4;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
    c.interaction_exponent = 3;
    c.region_size = 0.5;
    CHECK_THROWS_AS(validate(c), std::invalid_argument);
}

TEST_CASE("dipolar ensemble is seed-deterministic") {
    DipolarBathConfig c;
    c.spin_density = 0.01;
    c.flip_rate = 1e6;
    c.coupling_prefactor = 6e5;
    c.exclusion_radius = 1.0;
    c.region_size = 8.0;
    c.seed = 21;
    const auto a = dipolar_echo_ensemble(c, {1e-5, 3e-5}, 200);
    const auto b = dipolar_echo_ensemble(c, {1e-5, 3e-5}, 200);
    CHECK(a.chi == b.chi);
}

TEST_CASE("hopping ensemble matches the annealed analytic oracle") {
    DipolarBathConfig c;
    c.dimensionality = 3;
    c.interaction_exponent = 3;
    c.flip_rate = 1e6;
    c.coupling_prefactor = 6e5;
    c.exclusion_radius = 1.0;
    c.region_size = 8.0;
    c.n_spins = 20;
    c.hopping = HoppingMode::ResamplePerShot;
    c.seed = 4243;
    const std::vector<double> times = {2e-5, 5e-5, 1e-4};
    const auto curve = dipolar_echo_ensemble(c, times, 4000);
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double oracle = oracles::annealed_dipolar_chi(
            c.n_spins, 3, c.coupling_prefactor, 3, c.exclusion_radius, c.region_size,
            c.flip_rate, times[i]);
        CHECK(curve.chi[i] == doctest::Approx(oracle).epsilon(0.10));
    }
}

TEST_SUITE_END();
