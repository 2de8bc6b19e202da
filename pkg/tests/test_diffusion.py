"""Accumulated-error state machine and the generic diffusion step."""

import math

import numpy as np
import pytest

from gridtrack.diffusion import (
    ErrorState,
    check_contained,
    diffuse_step,
    windowed_tracking_error,
)
from gridtrack.errors import DomainViolation
from gridtrack.geometry import (
    ConvexPolygon,
    FiniteSet1D,
    Setpoint,
    project_convex,
    project_finite,
)


def test_ideal_device_keeps_zero_error():
    st = ErrorState()
    for _ in range(5):
        st = st.update(Setpoint(3.0, 1.0), Setpoint(3.0, 1.0))
    assert st.e == Setpoint(0.0, 0.0)
    assert st.k == 5


def test_half_power_miss():
    st = ErrorState().update(Setpoint(-7500.0, 0.0), Setpoint(0.0, 0.0))
    assert st.e == Setpoint(7500.0, 0.0)
    assert st.e.norm() == 0.5 * 15000.0


def test_error_equals_brute_force_sum():
    rng = np.random.default_rng(0)
    st = ErrorState()
    reqs, imps = [], []
    for _ in range(50):
        r = Setpoint(*rng.uniform(-100, 100, 2))
        i = Setpoint(*rng.uniform(-100, 100, 2))
        reqs.append(r)
        imps.append(i)
        st = st.update(r, i)
    # replay left-to-right reproduces e bit for bit
    ep = eq = 0.0
    for r, i in zip(reqs, imps):
        ep += i.p - r.p
        eq += i.q - r.q
    assert st.e == Setpoint(ep, eq)
    assert st.history_req == tuple(reqs)
    assert st.history_imp == tuple(imps)


def test_update_rejects_nonfinite():
    with pytest.raises(ValueError):
        ErrorState().update(Setpoint(math.nan, 0.0), Setpoint(0.0, 0.0))


def test_states_are_values_fork_safe():
    a = ErrorState().update(Setpoint(1, 0), Setpoint(0, 0))
    b = a.update(Setpoint(1, 0), Setpoint(2, 0))
    c = a.update(Setpoint(1, 0), Setpoint(5, 0))  # fork from the same parent
    assert b.e.p == pytest.approx(0.0)
    assert c.e.p == pytest.approx(3.0)
    assert a.k == 1 and b.k == 2 and c.k == 2
    assert a.history_imp == (Setpoint(0.0, 0.0),)


def test_diffuse_identity_map_cancels_error():
    st = ErrorState().update(Setpoint(4.0, 0.0), Setpoint(1.0, 0.0))  # e = (-3, 0)
    imp, st2 = diffuse_step(st, Setpoint(7.0, 2.0), lambda x: x)
    assert imp == Setpoint(10.0, 2.0)
    assert st2.e == Setpoint(0.0, 0.0)


def test_diffuse_two_level_codebook_alternates():
    s = FiniteSet1D([-15000.0, 0.0])
    st = ErrorState()
    f = None
    imps = []
    for _ in range(6):
        req = Setpoint(-7500.0, 0.0)
        f = lambda x, req=req: Setpoint(project_finite(s, x.p, tie_toward=req.p), 0.0)
        imp, st = diffuse_step(st, req, f)
        imps.append(imp.p)
        assert st.e.p in (0.0, 7500.0)
    assert imps == [0.0, -15000.0, 0.0, -15000.0, 0.0, -15000.0]


def test_diffuse_interval_clamp():
    iv = ConvexPolygon.interval(0.0, 10.0)
    st = ErrorState().update(Setpoint(0.0, 0.0), Setpoint(-3.0, 0.0))  # e = (-3, 0)
    imp, st2 = diffuse_step(st, Setpoint(4.0, 0.0), lambda x: project_convex(iv, x))
    assert imp == pytest.approx((7.0, 0.0))


def test_diffuse_domain_violation_reports_request_and_error():
    dom = ConvexPolygon.interval(0.0, 1.0)
    st = ErrorState().update(Setpoint(5.0, 0.0), Setpoint(0.0, 0.0))  # e = (-5, 0)
    with pytest.raises(DomainViolation) as err:
        diffuse_step(st, Setpoint(0.5, 0.0), lambda x: x, domain=dom)
    assert err.value.u_req == Setpoint(0.5, 0.0)
    assert err.value.e == Setpoint(-5.0, 0.0)


def test_containment_invariant_random_g_approximation_maps():
    """Projection onto a finite subset of the advertisement, fed through
    diffusion, keeps the error inside the gap set at every step."""
    rng = np.random.default_rng(42)
    for _ in range(40):
        vals = np.sort(rng.uniform(-100.0, 100.0, size=rng.integers(2, 7)))
        s = FiniteSet1D(vals)
        half = 0.5 * max(b - a for a, b in zip(vals, vals[1:]))
        g = ConvexPolygon([(-half, 0.0), (half, 0.0)])
        st = ErrorState()
        for _ in range(80):
            req = Setpoint(rng.uniform(vals[0], vals[-1]), 0.0)
            f = lambda x: Setpoint(project_finite(s, x.p), 0.0)
            _, st = diffuse_step(st, req, f)
        assert check_contained(st, g, tol=1e-9)


def test_check_contained_examples():
    st = ErrorState()
    for _ in range(4):
        st = st.update(Setpoint(1.0, 1.0), Setpoint(1.0, 1.0))
    assert check_contained(st, ConvexPolygon([(0.0, 0.0)]))
    st2 = ErrorState().update(Setpoint(0.0, 0.0), Setpoint(10.0, 0.0))
    assert not check_contained(st2, ConvexPolygon([(0.0, 0.0)]))
    assert check_contained(st2, ConvexPolygon.interval(-10.0, 10.0))


def test_windowed_error_zero_for_equal_histories():
    st = ErrorState()
    for v in range(8):
        st = st.update(Setpoint(float(v), 0.0), Setpoint(float(v), 0.0))
    for m in range(8):
        assert windowed_tracking_error(st, m) == 0.0


def test_windowed_error_equals_e_difference_identity():
    rng = np.random.default_rng(1)
    st = ErrorState()
    for _ in range(60):
        st = st.update(Setpoint(*rng.uniform(-10, 10, 2)), Setpoint(*rng.uniform(-10, 10, 2)))
    es = [Setpoint(0.0, 0.0)] + list(st.history_e)
    for m in [0, 1, 5, 20, 59]:
        direct = windowed_tracking_error(st, m)
        ident = math.hypot(
            es[st.k].p - es[st.k - m - 1].p, es[st.k].q - es[st.k - m - 1].q
        ) / (m + 1)
        assert direct == pytest.approx(ident, abs=1e-9)


def test_windowed_error_bounds_for_bounded_agent():
    # two-level codebook trace is c-bounded with c = half the gap
    s = FiniteSet1D([0.0, 2.0])
    c = 1.0
    st = ErrorState()
    rng = np.random.default_rng(3)
    for _ in range(100):
        req = Setpoint(rng.uniform(0.0, 2.0), 0.0)
        _, st = diffuse_step(st, req, lambda x: Setpoint(project_finite(s, x.p), 0.0))
    for m in range(0, st.k):
        bound = (c if m == st.k - 1 else 2 * c) / (m + 1)
        assert windowed_tracking_error(st, m) <= bound + 1e-9


def test_windowed_error_range_check():
    st = ErrorState().update(Setpoint(0, 0), Setpoint(0, 0))
    with pytest.raises(ValueError):
        windowed_tracking_error(st, 1)
    with pytest.raises(ValueError):
        windowed_tracking_error(st, -1)
