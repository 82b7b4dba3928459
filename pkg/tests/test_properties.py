import math

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from chtransit import report
from chtransit.classifier import (
    TransitionReport,
    TransitionType,
    classify_coupled,
    classify_rectangular,
)
from chtransit.params import CoupledParams, ModelParams
from chtransit.solver import SimState, SolverConfig, step
from chtransit.spectral import DomainSpec, SpectralField

pos = st.floats(0.05, 20.0, allow_nan=False)
gam2 = st.floats(-10.0, 10.0, allow_nan=False)
length = st.floats(0.5, 10.0, allow_nan=False)
modes = st.integers(1, 3)
QUICK = settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])


def clear_margin(r: TransitionReport) -> bool:
    return abs(r.margin) > 1e-6 * max(1.0, abs(r.threshold_gamma3))


@QUICK
@given(gam2, pos, length, modes, st.floats(0.2, 5.0))
def test_verdict_invariant_under_scaling(g2, g3, L, m, t):
    a = classify_rectangular(ModelParams(1.0, g2, g3), L, m)
    assume(clear_margin(a))
    b = classify_rectangular(ModelParams(1.0, t * g2, t * t * g3), L, m)
    assert a.transition_type == b.transition_type
    assert b.threshold_gamma3 == np.float64(t * t * a.threshold_gamma3) or math.isclose(
        b.threshold_gamma3, t * t * a.threshold_gamma3, rel_tol=1e-12, abs_tol=1e-300
    )


@QUICK
@given(gam2, pos, pos, length, modes)
def test_larger_gamma3_never_less_continuous(g2, g3a, g3b, L, m):
    lo, hi = sorted((g3a, g3b))
    a = classify_rectangular(ModelParams(1.0, g2, lo), L, m)
    b = classify_rectangular(ModelParams(1.0, g2, hi), L, m)
    assert b.margin >= a.margin
    if a.transition_type is TransitionType.TYPE_I:
        assert b.transition_type is TransitionType.TYPE_I


@QUICK
@given(gam2, pos, length, modes)
def test_report_round_trip(g2, g3, L, m):
    r = classify_rectangular(ModelParams(1.0, g2, g3), L, m)
    back = TransitionReport.from_dict(report.loads(report.dumps(r)))
    assert back == r


@given(st.floats(allow_nan=False))
def test_float_text_round_trip(x):
    assert float(report.loads(report.dumps([x]))[0]) == x


@QUICK
@given(gam2, pos, length, modes, st.floats(0.1, 5.0), st.floats(0.1, 5.0), st.floats(0.1, 5.0))
def test_zero_mobility_coupling_renormalizes_gamma3(g2, g3, L, m, a1, a2, g1):
    eff = g3 - a2 * g1 / a1
    assume(eff > 0.05)
    base = ModelParams(1.0, g2, g3)
    c = classify_coupled(CoupledParams(base, mu=0.0, alpha1=a1, alpha2=a2, gamma1=g1), L, m)
    r = classify_rectangular(ModelParams(1.0, g2, eff), L, m)
    assume(clear_margin(r))
    assert c.transition_type == r.transition_type
    assert math.isclose(c.sigma, r.sigma, rel_tol=1e-9, abs_tol=1e-9)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(0.5, 3.0), pos)
def test_odd_symmetry_of_step(seed, lam, g3):
    d = DomainSpec.rectangular(math.pi, 32)
    u = 0.2 * np.random.default_rng(seed).standard_normal(d.shape)
    p, cfg = ModelParams(lam, 0.0, g3), SolverConfig(dt=0.01, stabilization=1.0)
    a = step(SimState(SpectralField(d, u)), p, cfg)
    b = step(SimState(SpectralField(d, -u)), p, cfg)
    assert np.max(np.abs(a.u.spectral() + b.u.spectral())) <= 1e-12
