"""Smoke tests for the python bindings."""

import math

import pytest

import pullback_lab as pl


def test_version():
    assert pl.__version__


def test_decay_function_calculus():
    r = pl.DecayFunction.from_expression("poly(1,0,1)")
    assert r(1.0) == pytest.approx(2.0)
    s = pl.combine(r, pl.DecayFunction.constant(1.0), "product")
    assert s(1.0) == pytest.approx(2.0)
    sq = pl.scale_sqrt(pl.DecayFunction.constant(4.0), 1.0, True)
    assert sq(0.0) == pytest.approx(2.0)


def test_membership_verdicts():
    ok = pl.membership_check(pl.DecayFunction.constant(1.0), alphas=[1.0], t_anchors=[0.0],
                             tau_max=50.0)
    assert ok["status"] == "certified-decay"
    bad = pl.membership_check(pl.DecayFunction.from_expression("exp(-1)"), alphas=[0.5],
                              t_anchors=[0.0], tau_max=60.0)
    assert bad["status"] == "refuted"


def test_exp_integral_closed_form():
    mu = pl.exp_integral_transform(pl.DecayFunction.constant(2.0), 0.4, 60.0, 0.004, -5.0, 5.0,
                                   1.0)
    assert mu(0.0) == pytest.approx(5.0, rel=1e-6)


def test_geometry_primitives():
    U = pl.PointCloud([[0.0], [1.0]])
    V = pl.PointCloud([[0.0]])
    assert pl.hausdorff_semidist(U, V) == pytest.approx(1.0)
    assert pl.hausdorff_semidist(V, U) == pytest.approx(0.0)
    assert pl.diameter(U) == pytest.approx(1.0)
    lower, upper = pl.kappa_bounds(pl.PointCloud([[0.0], [2.0]]), 1e-9, 1)
    assert upper == pytest.approx(2.0 * lower)
    assert pl.ball_measure_exact(pl.PointCloud([[0.0], [1.0], [2.0]]), 2) == pytest.approx(1.0)


def test_benchmark_validation_and_constants():
    spec = pl.ModelSpec.default_benchmark()
    assert spec.lambda1 == pytest.approx(1.0)
    report = pl.validate_hypotheses(spec)
    assert report["ok"]
    assert report["M_mu0"] <= 2.0

    constants = pl.compute_constants(spec)
    assert constants["beta"] == pytest.approx(0.4)
    assert constants["mu_ctr"] == pytest.approx(math.exp(-1.0))
    assert constants["T_ctr"] == pytest.approx(1.0 + math.log(3.0))

    bad = pl.validate_hypotheses(pl.benchmark_with_H4_violated())
    assert not bad["ok"]
    assert any(f["hypothesis"] == "H4" for f in bad["failures"])


def test_toy_process_and_rate_fit():
    S = pl.make_contraction_toy(1.0, 2, 1e-2)
    y = S.advance(1.0, 0.0, [1.0, 2.0])
    assert y[0] == pytest.approx(math.exp(-1.0), rel=1e-10)

    samples = [(k, 5.0 * math.exp(-0.3 * k)) for k in range(1, 11)]
    fit = pl.fit_exponential_rate(samples)
    assert fit.omega_hat == pytest.approx(0.3, rel=1e-9)
    assert fit.C_hat == pytest.approx(5.0, rel=1e-9)


def test_wave_process_short_run():
    spec = pl.ModelSpec.default_benchmark()
    S = pl.make_process(spec)
    x0 = [0.0] * S.dim
    x0[0] = 1.0
    y = S.advance(0.1, 0.0, x0)
    assert len(y) == S.dim
    assert all(math.isfinite(v) for v in y)
    # identity law
    same = S.advance(0.0, 0.0, x0)
    assert same == x0

    norms = pl.simulate_norms(spec, 0.0, x0, 0.5, 100)
    assert norms[0][1] == pytest.approx(1.0)
    assert norms[-1][0] == pytest.approx(0.5)
