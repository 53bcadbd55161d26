import math

import numpy as np
import pytest
from hypothesis import given, seed, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from bregshrink.geometry import (DomainViolation, GradientRangeError, negative_entropy, pnorm,
                                 squared_norm)

E = math.e
GEOMETRIES = [squared_norm(2), negative_entropy(2), pnorm(2, 1.5)]


# closed forms ------------------------------------------------------------------

def test_value_examples():
    assert squared_norm(2).value([3.0, 4.0]) == pytest.approx(12.5)
    assert negative_entropy(2).value([1.0, 1.0]) == pytest.approx(-2.0)
    assert pnorm(2, 1.5).value([1.0, 0.0]) == pytest.approx(2.0 / 3.0)


def test_entropy_value_at_boundary_uses_zero_log_zero():
    assert negative_entropy(2).value([0.0, 1.0]) == pytest.approx(-1.0)


def test_gradient_examples():
    np.testing.assert_allclose(squared_norm(2).gradient([2.0, -1.0]), [2.0, -1.0])
    np.testing.assert_allclose(negative_entropy(2).gradient([1.0, E]), [0.0, 1.0], atol=1e-15)
    np.testing.assert_allclose(pnorm(2, 1.5).gradient([4.0, 0.0]), [2.0, 0.0])


def test_gradient_inverse_examples():
    np.testing.assert_allclose(negative_entropy(2).gradient_inverse([0.0, 1.0]), [1.0, E])
    np.testing.assert_allclose(squared_norm(2).gradient_inverse([2.0, -1.0]), [2.0, -1.0])
    np.testing.assert_allclose(pnorm(2, 1.5).gradient_inverse([2.0, 0.0]), [4.0, 0.0])


def test_bregman_examples():
    for g in GEOMETRIES:
        assert g.bregman([1.0, 1.0], [1.0, 1.0]) == 0.0
    assert squared_norm(2).bregman([0.0, 0.0], [1.0, 1.0]) == pytest.approx(1.0)
    assert negative_entropy(2).bregman([E, 1.0], [1.0, 1.0]) == pytest.approx(1.0)


def test_dual_average_examples():
    g = squared_norm(2)
    np.testing.assert_allclose(g.dual_average([1.0], [[3.0, 7.0]]), [3.0, 7.0])
    np.testing.assert_allclose(g.dual_average([0.5, 0.5], [[0.0, 0.0], [2.0, 2.0]]), [1.0, 1.0])
    h = negative_entropy(2)
    np.testing.assert_allclose(h.dual_average([0.5, 0.5], [[1.0, 1.0], [E**2, 1.0]]), [E, 1.0])


# errors ------------------------------------------------------------------------

def test_domain_violation_reports_the_coordinate():
    with pytest.raises(DomainViolation) as info:
        negative_entropy(3).gradient([1.0, -0.5, 2.0])
    assert info.value.index == 1
    with pytest.raises(DomainViolation):
        negative_entropy(2).value([-1.0, 1.0])
    with pytest.raises(DomainViolation):
        negative_entropy(2).bregman([1.0, 1.0], [0.0, 1.0])


def test_entropy_gradient_inverse_overflow():
    with pytest.raises(GradientRangeError):
        negative_entropy(1).gradient_inverse([1000.0])


def test_dual_average_rejects_bad_weights():
    g = squared_norm(1)
    with pytest.raises(ValueError):
        g.dual_average([0.5, 0.4], [[0.0], [1.0]])
    with pytest.raises(ValueError):
        g.dual_average([1.5, -0.5], [[0.0], [1.0]])


@pytest.mark.parametrize("p", [1.0, 1.005, 2.5])
def test_pnorm_exponent_range(p):
    with pytest.raises(ValueError):
        pnorm(2, p)


# identities on random points -------------------------------------------------------

def _interior(g, raw):
    lo, hi = g.sampling_box()
    return lo + (hi - lo) * raw


unit = arrays(np.float64, 3, elements=st.floats(0.0, 1.0))


@pytest.mark.parametrize("g", [squared_norm(3), negative_entropy(3), pnorm(3, 1.5)],
                         ids=lambda g: g.kind.value)
@seed(7)
@settings(max_examples=60, deadline=None)
@given(rx=unit, ry=unit, rz=unit)
def test_three_point_identity(g, rx, ry, rz):
    x, y, z = (_interior(g, r) for r in (rx, ry, rz))
    lhs = g.bregman(x, y) + g.bregman(y, z) - g.bregman(x, z)
    rhs = float((x - y) @ (g.gradient(z) - g.gradient(y)))
    scale = 1 + abs(g.bregman(x, y)) + abs(g.bregman(y, z)) + abs(g.bregman(x, z)) + abs(rhs)
    assert abs(lhs - rhs) <= 1e-9 * scale


@pytest.mark.parametrize("g", [squared_norm(3), negative_entropy(3), pnorm(3, 1.5)],
                         ids=lambda g: g.kind.value)
@seed(11)
@settings(max_examples=60, deadline=None)
@given(rx=unit)
def test_conjugacy_round_trip(g, rx):
    x = _interior(g, rx)
    back = g.gradient_inverse(g.gradient(x))
    assert np.linalg.norm(back - x) <= 1e-10 * (1 + np.linalg.norm(x))
    # Fenchel-Young holds with equality on the graph of the gradient
    fy = g.value(x) + g.conjugate(g.gradient(x)) - x @ g.gradient(x)
    assert abs(fy) <= 1e-10 * (1 + abs(g.value(x)))


def _bregman_mp(g, y, x):
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 50
    total = mp.mpf(0)
    for yi, xi in zip(y, x):
        yi, xi = mp.mpf(float(yi)), mp.mpf(float(xi))
        if g.kind.value == "negative_entropy":
            total += yi * mp.log(yi / xi) - yi + xi
        else:
            p = mp.mpf(g.p)
            gx = mp.sign(xi) * abs(xi) ** (p - 1)
            total += abs(yi) ** p / p - abs(xi) ** p / p - gx * (yi - xi)
    return float(total)


@pytest.mark.parametrize("g", [negative_entropy(3), pnorm(3, 1.5), pnorm(3, 1.2)],
                         ids=lambda g: f"{g.kind.value}{g.p or ''}")
@seed(3)
@settings(max_examples=40, deadline=None)
@given(rx=unit, eps=st.floats(-0.09, 0.09))
def test_near_diagonal_bregman_is_accurate(g, rx, eps):
    # the textbook formula cancels badly here; compare with 50-digit arithmetic
    x = _interior(g, rx)
    y = x * (1 + eps)
    ref = _bregman_mp(g, y, x)
    assert g.bregman(y, x) == pytest.approx(ref, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("g", GEOMETRIES, ids=lambda g: g.kind.value)
def test_gradient_difference_matches_plain_difference(g):
    rng = np.random.default_rng(0)
    lo, hi = g.sampling_box()
    for _ in range(50):
        x, y = rng.uniform(lo, hi, (2, 2))
        np.testing.assert_allclose(g.gradient_difference(x, y), g.gradient(x) - g.gradient(y),
                                   rtol=1e-12, atol=1e-12)


def test_gradient_difference_keeps_tiny_gaps():
    g = negative_entropy(1)
    x = np.array([3.0])
    y = x * (1 + 1e-13)
    assert g.gradient_difference(x, y)[0] == pytest.approx(-math.log1p(1e-13), rel=1e-3)


@pytest.mark.parametrize("g", GEOMETRIES, ids=lambda g: g.kind.value)
def test_finite_difference_gradient(g):
    rng = np.random.default_rng(5)
    lo, hi = g.sampling_box()
    for _ in range(20):
        x = rng.uniform(lo, hi, 2)
        h = 1e-6 * (1 + np.abs(x))
        fd = [(g.value(x + h[i] * e) - g.value(x - h[i] * e)) / (2 * h[i])
              for i, e in enumerate(np.eye(2))]
        np.testing.assert_allclose(fd, g.gradient(x), rtol=1e-6, atol=1e-6)


def test_geometry_is_hashable_value_data():
    assert squared_norm(3) == squared_norm(3)
    assert len({pnorm(2, 1.5), pnorm(2, 1.5), pnorm(2, 1.2)}) == 2
