import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bregshrink import feasibility as fz
from bregshrink.geometry import negative_entropy, pnorm, squared_norm

E = math.e


# halfspace constructors ------------------------------------------------------------

def test_comparison_halfspace_examples():
    g = squared_norm(2)
    h = fz.halfspace_from_bregman_comparison(g, [1.0, 2.0], [1.0, 2.0])
    assert h.is_degenerate and h.b == 0.0
    h = fz.halfspace_from_bregman_comparison(g, [0.0, 0.0], [1.0, 0.0])
    np.testing.assert_allclose(h.a, [1.0, 0.0])
    assert h.b == pytest.approx(0.5)
    h = fz.halfspace_from_bregman_comparison(negative_entropy(2), [1.0, 1.0], [E, 1.0])
    np.testing.assert_allclose(h.a, [1.0, 0.0], atol=1e-15)
    assert h.b == pytest.approx(E - 1)
    assert h.tag is fz.Tag.BREGMAN_COMPARISON


def test_resolvent_gap_halfspace_examples():
    g = squared_norm(2)
    assert fz.halfspace_from_resolvent_gap(g, [1.0, 1.0], [1.0, 1.0]).is_degenerate
    h = fz.halfspace_from_resolvent_gap(g, [1.0, 0.0], [0.0, 0.0])
    np.testing.assert_allclose(h.a, [1.0, 0.0])
    assert h.b == pytest.approx(0.5)
    h = fz.halfspace_from_resolvent_gap(negative_entropy(1), [E], [1.0])
    assert h.a[0] == pytest.approx(1.0)
    assert h.b == pytest.approx(E - 1)


def test_anchor_halfspace_examples():
    g = squared_norm(2)
    assert fz.halfspace_from_anchor(g, [1.0, 0.0], [1.0, 0.0]).is_degenerate
    h = fz.halfspace_from_anchor(g, [0.0, 0.0], [1.0, 0.0])
    np.testing.assert_allclose(h.a, [1.0, 0.0])
    assert h.b == pytest.approx(0.0, abs=1e-14)
    h = fz.halfspace_from_anchor(negative_entropy(1), [1.0], [E])
    assert h.a[0] == pytest.approx(1.0)
    assert h.b == pytest.approx(1.0)


def test_noise_level_cut_is_flat():
    # two points a few ulps apart carry no direction
    g = negative_entropy(2)
    x = np.array([0.3, 7.0])
    y = x * (1 + 2e-16)
    h = fz.halfspace_from_bregman_comparison(g, y, x)
    assert h.is_degenerate and h.offset == 0.0


@pytest.mark.parametrize("g", [squared_norm(3), negative_entropy(3), pnorm(3, 1.5)],
                         ids=lambda g: g.kind.value)
def test_comparison_halfspace_equivalence(g):
    rng = np.random.default_rng(4)
    lo, hi = g.sampling_box()
    y, x = rng.uniform(lo, hi, (2, 3))
    h = fz.halfspace_from_bregman_comparison(g, y, x)
    for z in rng.uniform(lo, hi, (1000, 3)):
        diff = g.bregman(z, y) - g.bregman(z, x)
        if abs(diff) <= 1e-9 * (1 + g.bregman(z, x)):
            continue
        assert (h.slack(z) <= 0) == (diff <= 0)


# single halfspace ---------------------------------------------------------------------

def test_project_halfspace_examples():
    g = squared_norm(2)
    H = fz.halfspace([1.0, 0.0], 1.0)
    np.testing.assert_array_equal(fz.project_halfspace(g, [0.5, 3.0], H), [0.5, 3.0])
    np.testing.assert_allclose(fz.project_halfspace(g, [2.0, 0.0], H), [1.0, 0.0])
    S = fz.halfspace([1.0, 1.0], 1.0)
    np.testing.assert_allclose(fz.project_halfspace(negative_entropy(2), [2.0, 2.0], S),
                               [0.5, 0.5], atol=1e-11)


def test_unbounded_projection_is_reported():
    # positive orthant cannot reach {z1 + z2 <= -1}
    with pytest.raises(fz.UnboundedProjection):
        fz.project_halfspace(negative_entropy(2), [1.0, 1.0], fz.halfspace([1.0, 1.0], -1.0))


# polyhedra ---------------------------------------------------------------------------

def test_project_polyhedron_examples():
    g = squared_norm(2)
    rep = fz.project_ledger(g, [2.0, 3.0], fz.ConstraintLedger())
    np.testing.assert_array_equal(rep.point, [2.0, 3.0])
    H = fz.halfspace([1.0, 2.0], 1.0)
    one = fz.project_polyhedron(g, [2.0, 3.0], [H]).point
    np.testing.assert_allclose(one, fz.project_halfspace(g, [2.0, 3.0], H), atol=1e-10)
    hs = [fz.halfspace([1.0, 0.0], 1.0), fz.halfspace([0.0, 1.0], 0.0)]
    rep = fz.project_polyhedron(g, [2.0, 2.0], hs)
    np.testing.assert_allclose(rep.point, [1.0, 0.0], atol=1e-10)
    np.testing.assert_allclose(rep.point, fz.active_set_projection([2.0, 2.0], [[1, 0], [0, 1]],
                                                                   [1.0, 0.0]), atol=1e-10)
    assert np.all(rep.dual_multipliers >= 0)
    assert rep.max_violation <= 1e-9


def test_entropy_projection_with_box():
    g = negative_entropy(3)
    x1 = np.array([2.0, 3.0, 5.0])
    rep = fz.project_polyhedron(g, x1, [fz.halfspace(np.ones(3), 6.0)],
                                (0.1 * np.ones(3), 20.0 * np.ones(3)))
    np.testing.assert_allclose(rep.point, 0.6 * x1, atol=1e-10)


def test_inactive_constraints_carry_no_multiplier():
    g = squared_norm(2)
    hs = [fz.halfspace([1.0, 0.0], 1.0), fz.halfspace([0.0, 1.0], 10.0)]
    rep = fz.project_polyhedron(g, [2.0, 2.0], hs)
    assert rep.dual_multipliers[1] <= 1e-12
    assert rep.dual_multipliers[0] == pytest.approx(1.0)


def test_degenerate_empty_constraint_is_infeasible():
    h = fz.AffineHalfspace(np.zeros(2), -1.0)
    with pytest.raises(fz.InfeasibleProjection):
        fz.project_polyhedron(squared_norm(2), [0.0, 0.0], [h])


def test_inconsistent_halfspaces_are_detected():
    hs = [fz.halfspace([1.0], -1.0), fz.halfspace([-1.0], -1.0)]
    with pytest.raises(fz.ProjectionError):
        fz.project_polyhedron(squared_norm(1), [0.0], hs)


def test_active_set_oracle_reports_empty_polyhedra():
    with pytest.raises(fz.InfeasibleProjection):
        fz.active_set_projection([0.0], [[1.0], [-1.0]], [-1.0, -1.0])


def _random_instance(rng, d, m):
    c = rng.uniform(-1, 1, d)
    A = rng.normal(size=(m, d))
    b = A @ c + rng.uniform(0.0, 1.0, m)
    x1 = rng.uniform(-5, 5, d)
    return A, b, x1


@seed(13)
@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 6), st.integers(1, 8))
def test_matches_active_set_oracle(s, d, m):
    A, b, x1 = _random_instance(np.random.default_rng(s), d, m)
    z = fz.project_polyhedron(squared_norm(d), x1, [fz.halfspace(a, bi) for a, bi in zip(A, b)])
    np.testing.assert_allclose(z.point, fz.active_set_projection(x1, A, b), atol=1e-6)


@pytest.mark.parametrize("g", [squared_norm(4), pnorm(4, 1.5)], ids=lambda g: g.kind.value)
def test_idempotent_and_optimal(g):
    rng = np.random.default_rng(9)
    for _ in range(10):
        A, b, x1 = _random_instance(rng, 4, 6)
        hs = [fz.halfspace(a, bi) for a, bi in zip(A, b)]
        z = fz.project_polyhedron(g, x1, hs).point
        assert np.linalg.norm(fz.project_polyhedron(g, z, hs).point - z) <= 1e-10
        # feasible points never beat the projection
        c = np.linalg.lstsq(A, b - 0.5, rcond=None)[0]
        for t in rng.uniform(0, 1, 200):
            y = t * z + (1 - t) * c + rng.normal(scale=0.05, size=4)
            if np.all(A @ y <= b):
                assert g.bregman(z, x1) <= g.bregman(y, x1) + 1e-8
                assert g.bregman(y, z) + g.bregman(z, x1) <= g.bregman(y, x1) + 1e-8


# ledger and membership ------------------------------------------------------------------

def test_membership_examples():
    ok, worst = fz.membership([0.0, 0.0], fz.ConstraintLedger())
    assert ok and worst == -math.inf
    led = fz.ConstraintLedger()
    led.add_c(fz.halfspace([1.0, 0.0], 0.5))
    assert fz.membership([0.0, 0.0], led) == (True, pytest.approx(-0.5))
    assert fz.membership([1.0, 0.0], led) == (False, pytest.approx(0.5))


def test_ledger_is_append_only():
    led = fz.ConstraintLedger()
    led.add_c(fz.halfspace([1.0], 1.0))
    snap = led.snapshot()
    led.add_q(fz.halfspace([-1.0], 1.0))
    assert len(snap) == 1 and len(led) == 2
    assert led.halfspaces()[0] is snap.halfspaces()[0]


vec = arrays(np.float64, 2, elements=st.floats(-5, 5))


@seed(17)
@settings(max_examples=100, deadline=None)
@given(a=vec, b=st.floats(-3, 3), z=vec)
def test_slack_matches_raw_form(a, b, z):
    h = fz.halfspace(a, b)
    assert h.slack(z) == pytest.approx(float(a @ z) - b, abs=1e-12)
