"""Smoke tests for the spincoh python bindings."""

import math

import pytest

sc = pytest.importorskip("spincoh")


def test_version():
    assert sc.__version__


def test_lorentzian_values():
    comps = [sc.LorentzianComponent(1.0, 1.0)]
    assert sc.eval_lorentzian_sum(comps, 0.0) == pytest.approx(1.0 / math.pi)
    assert sc.eval_lorentzian_sum(comps, 1.0) == pytest.approx(1.0 / (2.0 * math.pi))


def test_white_noise_chi_and_kappa():
    white = sc.NoiseSpectrum.white(3.0)
    seq = sc.DecouplingSequence.cpmg(64, 1e-5)
    assert sc.chi_exact(white, seq) == pytest.approx(3.0 * 1e-5 / 2.0, rel=1e-8)
    assert sc.delta_calibration() == pytest.approx(math.pi / 2.0, rel=1e-9)


def test_simulate_coherence_deterministic():
    params = sc.OUParams(1e6, 46e-9, 1e-9, seed=5)
    seq = sc.DecouplingSequence.cpmg(16, 1e-5)
    a = sc.simulate_coherence([params], seq, sc.PulseDephasingMode.ZeroWidth, 500, 5)
    b = sc.simulate_coherence([params], seq, sc.PulseDephasingMode.ZeroWidth, 500, 5)
    assert a.c == b.c
    assert 0.0 < a.c <= 1.0


def test_extract_round_trip():
    kappa = sc.delta_calibration()
    white = sc.NoiseSpectrum.white(4e4)
    tr = sc.CoherenceTrace()
    tr.n_pulses = 128
    tr.time_s = [4e-6, 8e-6, 16e-6]
    tr.c = [math.exp(-kappa * sc.chi_delta(white, 128, t)) for t in tr.time_s]
    pts = sc.extract_spectrum([tr], 64)
    for p in pts:
        assert p.s_value == pytest.approx(4e4, rel=1e-10)


def test_stretched_fit():
    tr = sc.CoherenceTrace()
    tr.n_pulses = 1
    tr.time_s = [1e-6 * i for i in range(1, 30)]
    tr.c = [math.exp(-((t / 8e-6) ** 1.4)) for t in tr.time_s]
    fit = sc.fit_stretched_exp(tr)
    assert fit.t2 == pytest.approx(8e-6, rel=1e-6)
    assert fit.stretch_n == pytest.approx(1.4, rel=1e-6)


def test_band_bending_solve():
    cfg = sc.BandConfig.coreshell_default()
    cfg.grid_points = 600
    prof = sc.solve_poisson(cfg)
    assert prof.band_shift_ev[-1] == pytest.approx(0.225)
    rep = sc.p1_depletion_report(prof, "P1")
    assert rep.width_nm > 0.0
    assert 0.0 < rep.fraction_reduced < 1.0
    assert abs(sc.nv_stability_report(prof)) < 0.05


def test_unmix():
    r0 = [math.exp(-0.5 * ((i - 20) / 6.0) ** 2) for i in range(64)]
    rm = [math.exp(-0.5 * ((i - 40) / 9.0) ** 2) for i in range(64)]
    s0, sm = sum(r0), sum(rm)
    m = [0.4 * a / s0 + 0.6 * b / sm for a, b in zip(r0, rm)]
    res = sc.unmix_pl(m, r0, rm)
    assert res.nv_minus_fraction == pytest.approx(0.6, abs=1e-9)
