import math

import pytest

import fsdpy


def test_spectra_constructors():
    sp = fsdpy.make_power_spectrum(2.0, 4)
    assert sp.eigenvalues == pytest.approx([1.0, 0.25, 1 / 9, 1 / 16])
    assert sp.family == "power"

    plat = fsdpy.make_plateau_spectrum(2, 1.0, 0.1, 4)
    assert plat.eigenvalues == [1.0, 1.0, 0.1, 0.1]

    multi = fsdpy.make_multiplateau_spectrum(4, 2)
    assert list(multi.shell_bounds) == [1, 5, 15]
    assert multi.dim() == 15

    with pytest.raises(ValueError):
        fsdpy.make_power_spectrum(0.9, 4)


def test_filters():
    assert fsdpy.filter_eval("gf", 10.0, 0.0) == 10.0
    assert fsdpy.filter_eval("ridge", 10.0, 0.1) == pytest.approx(5.0)
    assert fsdpy.residual_eval("gd:0.1", 3.0, 1.0) == pytest.approx(0.729)
    # identity psi + x phi = 1
    for name in ("gf", "ridge", "gd:0.05", "pcr:0.5"):
        x, t = 0.37, 12.0
        phi = fsdpy.filter_eval(name, t, x)
        psi = fsdpy.residual_eval(name, t, x)
        assert psi + x * phi == pytest.approx(1.0, abs=1e-12)


def test_estimation_dimension_and_rate():
    sp = fsdpy.make_explicit_spectrum([0.9, 0.5, 0.04, 0.01])
    ed = fsdpy.estimation_dimension(sp, 10.0, 0.5)
    assert ed.k_star == 2
    assert ed.threshold == pytest.approx(0.05)

    sig = fsdpy.make_aligned_signal(sp, 2, 1.0)
    problem = fsdpy.RegressionProblem(sp, sig, noise_std=1.0)
    rate = fsdpy.rate_breakdown(problem, "ridge", t=10.0, b=0.5, N=100)
    assert rate.k_star == 2
    assert rate.total == pytest.approx(
        rate.bias_head + rate.var_head + rate.align_tail + rate.var_tail
    )
    assert rate.align_tail == 0.0


def test_monte_carlo_determinism():
    sp = fsdpy.make_plateau_spectrum(2, 1.0, 0.05, 8)
    sig = fsdpy.make_aligned_signal(sp, 2, 1.0)
    problem = fsdpy.RegressionProblem(sp, sig, noise_std=0.5)
    a = fsdpy.run_monte_carlo(problem, "ridge", t=5.0, N=40, trials=8, master_seed=3)
    b = fsdpy.run_monte_carlo(
        problem, "ridge", t=5.0, N=40, trials=8, master_seed=3, parallelism=4
    )
    assert a.median == b.median
    assert [t.excess_risk for t in a.per_trial] == [
        t.excess_risk for t in b.per_trial
    ]
    for t in a.per_trial:
        assert t.excess_risk == pytest.approx(t.risk_head + t.risk_tail)


def test_plateau_saturation_closed_forms():
    sc = fsdpy.PlateauScenario(
        k=4, sigma=1.0, eps=0.005, p=160004, alpha_star=1.0, noise_std=1.0, N=400
    )
    report = fsdpy.plateau_saturation(sc, b=0.5, box=0.05, grid_points=512)
    assert report.hypothesis_met
    assert report.min_ridge == pytest.approx(report.closed_ridge, rel=0.01)
    assert report.min_gf == pytest.approx(report.closed_gf, rel=0.01)
    assert report.verdict_gf_leq_ridge


def test_partial_order():
    sp = fsdpy.make_power_spectrum(2.0, 32)
    sig = fsdpy.make_sobolev_signal(sp, 2.0)
    problem = fsdpy.RegressionProblem(sp, sig, noise_std=1.0)
    verdict = fsdpy.partial_order_verdict(problem, "gf", "ridge", t=9.0)
    assert verdict.a_leq_b
    assert verdict.bias_ratio <= 1.0


def test_sobolev_theory_slope():
    grid = [2**k for k in range(10, 17)]
    study = fsdpy.sobolev_study(2.0, 1.0, grid, filter="ridge")
    assert study.theory.target_exponent == pytest.approx(-2 / 3)
    assert abs(study.theory.fitted_slope - study.theory.target_exponent) < 0.05
