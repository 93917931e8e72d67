import math
import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eitcool.cooling import closed_form_rates, cooling_summary, sideband_rates
from eitcool.errors import ParameterError
from eitcool.params import Geometry, LambdaParams, ProbeParams, TrapParams, derived_quantities

HBAR = 1.054571817e-34      # CODATA 2018, exact in SI since 2019
AMU = 1.66053906660e-27


def test_bench_derived(bench_params, bench_geom, bench_trap):
    d = derived_quantities(bench_params, bench_geom, bench_trap)
    assert d.omega == pytest.approx(17.0 * math.sqrt(2.0), rel=1e-15)
    assert round(d.omega, 3) == 24.042
    assert d.eta == pytest.approx(0.02, rel=1e-12)
    assert d.x0 is None


def test_equal_projections_cancel():
    g = Geometry(0.06, 0.03, math.acos(0.5), 0.0)
    assert g.eta == pytest.approx(0.0, abs=1e-15)
    assert g.zeta(3.0) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("pattern, alpha", [("isotropic", 1.0 / 3.0), ("dipole", 0.2)])
def test_pattern_moments(pattern, alpha):
    g = Geometry(0.01, 0.01, pattern=pattern)
    u, w = g.emission_nodes()
    assert w.sum() == pytest.approx(1.0, abs=1e-15)
    assert g.alpha == pytest.approx(alpha, rel=1e-14)


def test_custom_pattern_normalised():
    g = Geometry(0.01, 0.01, pattern="custom", custom_nodes=(-1.0, 0.0, 1.0), custom_weights=(1.0, 2.0, 1.0))
    assert sum(g.custom_weights) == pytest.approx(1.0)
    assert g.alpha == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        Geometry(0.01, 0.01, pattern="custom", custom_nodes=(2.0,), custom_weights=(1.0,))
    with pytest.raises(ParameterError):
        Geometry(0.01, 0.01, pattern="quadrupole")


def test_zeta_at_zero_is_eta(bench_geom):
    assert bench_geom.zeta(0.0) == bench_geom.eta
    assert bench_geom.zeta(4.0) == pytest.approx(0.06)


def test_branching_defaults():
    p = LambdaParams(1.0, 2.0, -3.0, 10.0)
    assert (p.gamma1, p.gamma2) == (5.0, 5.0)
    q = LambdaParams(1.0, 2.0, -3.0, 10.0, gamma1=3.0)
    assert q.gamma2 == 7.0
    r = p.with_branching(10.0)
    assert r.gamma1 / r.gamma2 == pytest.approx(10.0)
    assert r.gamma1 + r.gamma2 == pytest.approx(10.0, rel=1e-15)


@pytest.mark.parametrize("kwargs", [
    dict(omega1=-1.0, omega2=1.0, delta=0.0, gamma=1.0),
    dict(omega1=0.0, omega2=0.0, delta=0.0, gamma=1.0),
    dict(omega1=1.0, omega2=1.0, delta=0.0, gamma=0.0),
    dict(omega1=1.0, omega2=1.0, delta=float("nan"), gamma=1.0),
    dict(omega1=1.0, omega2=1.0, delta=0.0, gamma=20.0, gamma1=5.0, gamma2=5.0),
    dict(omega1=1.0, omega2=1.0, delta=0.0, gamma=1.0, gamma1=2.0),
])
def test_invalid_lambda_params(kwargs):
    with pytest.raises(ParameterError):
        LambdaParams(**kwargs)


def test_trap_validation():
    with pytest.raises(ParameterError):
        TrapParams(0.0)
    with pytest.raises(ParameterError):
        TrapParams(1.0, nmax=0)
    with pytest.raises(ParameterError):
        TrapParams(1.0).x0


def test_ground_state_widths():
    trap = TrapParams(2.0 * math.pi, mass=40 * AMU)
    assert trap.x0 * trap.p0 == pytest.approx(HBAR / 2.0, rel=1e-12)
    assert trap.x0 == pytest.approx(math.sqrt(HBAR / (2 * 40 * AMU * 2 * math.pi * 1e6)), rel=1e-12)
    # roughly 11 nm for calcium in a 1 MHz trap
    assert 1.0e-8 < trap.x0 < 1.2e-8


def test_probe_warns_when_strong(bench_params):
    with pytest.warns(RuntimeWarning):
        assert not ProbeParams(5.0).check_weak(bench_params)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert ProbeParams(0.5).check_weak(bench_params)


@given(st.floats(1e-3, 1e3), st.floats(0.5, 40), st.floats(0.5, 40), st.floats(-200, -1),
       st.floats(1, 50), st.floats(0.2, 5))
def test_global_rescaling_invariance(factor, o1, o2, delta, gamma, nu):
    # only ratios of frequencies enter: A/gamma, n_inf and W t are scale free
    p = LambdaParams(o1, o2, delta, gamma)
    q = p.scaled(factor)
    geom = Geometry.counterpropagating(0.01)
    ap, am = closed_form_rates(p, nu)
    bp, bm = closed_form_rates(q, nu * factor)
    assert bp / q.gamma == pytest.approx(ap / p.gamma, rel=1e-10)
    assert bm / q.gamma == pytest.approx(am / p.gamma, rel=1e-10)
    s1 = cooling_summary(p, geom, TrapParams(nu), strict=False)
    s2 = cooling_summary(q, geom, TrapParams(nu * factor), strict=False)
    assert s2.w / factor == pytest.approx(s1.w, rel=1e-10)
    if s1.cooling:
        assert s2.nInf == pytest.approx(s1.nInf, rel=1e-9)


@given(st.floats(1e-2, 1e2))
def test_regression_rates_scale_free(factor):
    p = LambdaParams(12.0, 9.0, -30.0, 15.0)
    r1 = sideband_rates(p, TrapParams(1.5), method="regression")
    r2 = sideband_rates(p.scaled(factor), TrapParams(1.5 * factor), method="regression")
    assert r2.aMinus / factor == pytest.approx(r1.aMinus, rel=1e-9)
    assert r2.aPlus / factor == pytest.approx(r1.aPlus, rel=1e-8)


def test_parameters_are_immutable(bench_params):
    with pytest.raises(Exception):
        bench_params.omega1 = 3.0
    assert np.isfinite(bench_params.omega)
