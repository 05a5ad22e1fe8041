#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "spincoh/bathsim.hpp"
#include "spincoh/extract.hpp"
#include "spincoh/filterfn.hpp"
#include "spincoh/log.hpp"

using namespace spincoh;
namespace {
constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

CoherenceTrace make_trace(int n, std::vector<double> t, std::vector<double> c) {
    CoherenceTrace tr;
    tr.n_pulses = n;
    tr.time_s = std::move(t);
    tr.c = std::move(c);
    tr.source = "test";
    return tr;
}
}  // namespace

TEST_SUITE_BEGIN("extract");

TEST_CASE("normalize_trace: identity is idempotent, out-of-range samples dropped") {
    const auto tr = make_trace(1, {1e-6, 2e-6, 3e-6}, {0.0, 0.5, 1.0});
    const auto out = normalize_trace(tr);
    CHECK(out.c == tr.c);

    const auto dirty = make_trace(1, {1e-6, 2e-6, 3e-6, 4e-6}, {1.03, 0.5, -0.02, 0.4});
    const auto cleaned = normalize_trace(dirty);
    REQUIRE(cleaned.c.size() == 2);
    CHECK(cleaned.c[0] == doctest::Approx(0.5));
    CHECK(cleaned.c[1] == doctest::Approx(0.4));
    CHECK(cleaned.time_s[1] == doctest::Approx(4e-6));
}

TEST_CASE("normalize_trace: affine contrast mapping and min/max rescale") {
    // raw contrast with baseline 0.3, amplitude 0.4: c = (raw - 0.3)/0.4
    Normalization affine;
    affine.mode = Normalization::Mode::Affine;
    affine.baseline = 0.3;
    affine.amplitude = 0.4;
    const auto raw = make_trace(128, {1e-6, 2e-6}, {0.70, 0.50});
    const auto out = normalize_trace(raw, affine);
    CHECK(out.c[0] == doctest::Approx(1.0));
    CHECK(out.c[1] == doctest::Approx(0.5));

    Normalization mm;
    mm.mode = Normalization::Mode::MinMax;
    const auto out2 = normalize_trace(make_trace(1, {1.0, 2.0, 3.0}, {0.2, 0.5, 0.8}), mm);
    CHECK(out2.c.front() == doctest::Approx(0.0));
    CHECK(out2.c.back() == doctest::Approx(1.0));

    CHECK_THROWS_AS(normalize_trace(make_trace(1, {1.0}, {1.7}), Normalization{}),
                    std::runtime_error);  // everything discarded
}

TEST_CASE("extract_spectrum inverts the calibrated delta model") {
    // c = exp(-kappa * chi_delta) for a white floor: recovered S is exact
    const double s0 = 4.2e4;
    const double kappa = delta_calibration();
    const auto white = NoiseSpectrum::white(s0);
    std::vector<double> times = {4e-6, 8e-6, 16e-6, 32e-6};
    std::vector<double> c;
    for (double t : times) c.push_back(std::exp(-kappa * chi_delta(white, 128, t)));
    const auto points = extract_spectrum({make_trace(128, times, c)});
    REQUIRE(points.size() == times.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        CHECK(points[i].omega0 == doctest::Approx(kPi * 128 / times[i]));
        CHECK(points[i].s_value == doctest::Approx(s0).epsilon(1e-12));
    }
}

TEST_CASE("extract_spectrum: chi = 1 sample maps to S = pi/(kappa t)") {
    const double t = 5e-6;
    const auto points =
        extract_spectrum({make_trace(256, {t}, {std::exp(-1.0)})});
    REQUIRE(points.size() == 1);
    CHECK(points[0].s_value == doctest::Approx(kPi / (delta_calibration() * t)).epsilon(1e-12));
}

TEST_CASE("extract_spectrum skips low-N traces and errors when none remain") {
    std::vector<std::string> warnings;
    set_warn_sink([&](const std::string& m) { warnings.push_back(m); });
    const auto pts = extract_spectrum({make_trace(64, {1e-6}, {0.5}),
                                       make_trace(128, {1e-6}, {0.5})});
    set_warn_sink({});
    CHECK(pts.size() == 1);
    CHECK(warnings.size() == 1);

    CHECK_THROWS_WITH_AS(
        (void)extract_spectrum({make_trace(64, {1e-6}, {0.5})}),
        doctest::Contains("no CPMG points retained"), std::runtime_error);
    // c = 0 and c = 1 excluded from the log transform
    CHECK_THROWS_AS((void)extract_spectrum({make_trace(128, {1e-6, 2e-6}, {1.0, 0.0})}),
                    std::runtime_error);
}

TEST_CASE("extract_spectrum is invariant under trace order") {
    const auto t1 = make_trace(128, {4e-6, 8e-6}, {0.7, 0.4});
    const auto t2 = make_trace(512, {6e-6, 9e-6}, {0.8, 0.6});
    auto key = [](const SpectrumPoint& p) { return std::pair(p.omega0, p.s_value); };
    auto a = extract_spectrum({t1, t2});
    auto b = extract_spectrum({t2, t1});
    std::sort(a.begin(), a.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    std::sort(b.begin(), b.end(), [&](auto& x, auto& y) { return key(x) < key(y); });
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].omega0 == doctest::Approx(b[i].omega0));
        CHECK(a[i].s_value == doctest::Approx(b[i].s_value));
    }
}

TEST_CASE("log_bin: single point, equal-omega stderr, counts") {
    std::vector<SpectrumPoint> one = {{1e7, 3.0, NoiseSource::Cpmg, 0}};
    const auto b1 = log_bin(one);
    REQUIRE(b1.omega.size() == 1);
    CHECK(b1.s_mean[0] == doctest::Approx(3.0));
    CHECK(b1.count[0] == 1);
    CHECK(b1.s_stderr[0] == doctest::Approx(0.0));

    std::vector<SpectrumPoint> two = {{1e7, 1.0, NoiseSource::Cpmg, 0},
                                      {1e7, 3.0, NoiseSource::Cpmg, 0}};
    const auto b2 = log_bin(two);
    REQUIRE(b2.omega.size() == 1);
    CHECK(b2.s_mean[0] == doctest::Approx(2.0));
    CHECK(b2.s_stderr[0] == doctest::Approx(1.0));
}

TEST_CASE("log_bin recovers a Lorentzian from noisy points (generator oracle)") {
    rng::Gaussian g(42);
    const std::vector<LorentzianComponent> lor = {{1e7, 20e-9}};
    std::vector<SpectrumPoint> pts;
    for (int i = 0; i < 1000; ++i) {
        const double w = kTwoPi * 2e6 * std::pow(12.5, g.uniform());  // 2-25 MHz
        const double s = eval_lorentzian_sum(lor, w) * (1.0 + 0.1 * g());
        pts.push_back({w, s, NoiseSource::Cpmg, 0});
    }
    const auto binned = log_bin(pts, 14);
    int total = 0;
    for (std::size_t i = 0; i < binned.omega.size(); ++i) {
        total += binned.count[i];
        const double expect = eval_lorentzian_sum(lor, binned.omega[i]);
        // bin means within ~2 stderr of the generator (bin-center curvature
        // makes this approximate; allow 3 where counts are small)
        const double tol = 3.0 * std::max(binned.s_stderr[i], 0.02 * expect);
        CHECK(std::abs(binned.s_mean[i] - expect) < tol);
    }
    CHECK(total == 1000);
    for (std::size_t i = 1; i < binned.omega.size(); ++i)
        CHECK(binned.omega[i] > binned.omega[i - 1]);
}

TEST_CASE("assemble_overview appends the DQ and SQ rate points") {
    OverviewAnchors a;
    a.gamma_dq = 10.0;
    a.omega_sq_rate = 20.0;
    const auto pts = assemble_overview(BinnedSpectrum{}, a);
    REQUIRE(pts.size() == 2);
    CHECK(pts[0].source == NoiseSource::Dq);
    CHECK(pts[0].omega0 == doctest::Approx(kTwoPi * 18.8e6));
    CHECK(pts[1].source == NoiseSource::Sq);
    CHECK(pts[1].omega0 == doctest::Approx(kTwoPi * 2.87e9));

    // rate algebra: T1_DQ = 50 us with Omega = 0 gives gamma = 1e4 1/s
    OverviewAnchors b;
    b.gamma_dq = 1.0 / (2.0 * 50e-6);
    CHECK(assemble_overview(BinnedSpectrum{}, b)[0].s_value == doctest::Approx(1e4));
    // bare T1_SQ = 114 us: Omega = 1/(3 * 114 us) at 2.87 GHz
    OverviewAnchors c;
    c.omega_sq_rate = 1.0 / (3.0 * 114e-6);
    const auto sq = assemble_overview(BinnedSpectrum{}, c)[1];
    CHECK(sq.s_value == doctest::Approx(2924.0).epsilon(1e-3));
    CHECK(sq.omega0 == doctest::Approx(kTwoPi * 2.87e9));
}

TEST_SUITE_END();
