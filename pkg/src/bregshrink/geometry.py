"""Legendre functions on R^d and the Bregman geometry they induce.

Three separable kinds are supported:

* ``squared_norm``      f(x) = 1/2 sum x_i^2            (dom f = R^d)
* ``negative_entropy``  f(x) = sum x_i log x_i - x_i    (dom f = closed orthant)
* ``pnorm``             f(x) = 1/p sum |x_i|^p          (dom f = R^d, 1 < p <= 2)

Points of the primal space and covectors of the dual space are both plain
1-D float arrays; the distinction is kept in names only.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "Kind",
    "LegendreGeometry",
    "DomainViolation",
    "GradientRangeError",
    "squared_norm",
    "negative_entropy",
    "pnorm",
]

#: Smallest accepted exponent for the p-norm energy.
P_MIN = 1.01
#: Exponent above which ``exp`` overflows in double precision.
_EXP_MAX = 709.0


class Kind(str, enum.Enum):
    SQUARED_NORM = "squared_norm"
    NEGATIVE_ENTROPY = "negative_entropy"
    PNORM = "pnorm"


class DomainViolation(ValueError):
    """A point lies outside the (interior of the) domain of f."""

    def __init__(self, index: int, value: float, kind: Kind | str, interior: bool = True):
        self.index = int(index)
        self.value = float(value)
        self.kind = Kind(kind)
        where = "int dom f" if interior else "dom f"
        super().__init__(
            f"coordinate {self.index} = {self.value!r} lies outside {where} "
            f"for {self.kind.value}"
        )


class GradientRangeError(OverflowError):
    """The inverse gradient saturated the floating point range."""


@dataclass(frozen=True)
class LegendreGeometry:
    """A separable Legendre function together with its conjugate.

    Parameters
    ----------
    kind : Kind or str
        Which closed form to use.
    dim : int
        Dimension of the space.
    p : float, optional
        Exponent of the p-norm energy, ignored for the other kinds.
    """

    kind: Kind
    dim: int
    p: float = 2.0

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        object.__setattr__(self, "dim", int(self.dim))
        if self.kind is Kind.PNORM:
            if not (P_MIN <= self.p <= 2.0):
                raise ValueError(f"p must lie in [{P_MIN}, 2], got {self.p!r}")
        else:
            object.__setattr__(self, "p", 2.0)

    # -- helpers -----------------------------------------------------------

    def _vec(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise ValueError(f"expected a vector of shape ({self.dim},), got {x.shape}")
        if not np.all(np.isfinite(x)):
            i = int(np.flatnonzero(~np.isfinite(x))[0])
            raise DomainViolation(i, x[i], self.kind, interior=False)
        return x

    def check_domain(self, x, interior: bool = True) -> np.ndarray:
        """Return ``x`` as an array, raising DomainViolation if it is outside."""
        x = self._vec(x)
        if self.kind is Kind.NEGATIVE_ENTROPY:
            bad = x <= 0.0 if interior else x < 0.0
            if np.any(bad):
                i = int(np.flatnonzero(bad)[0])
                raise DomainViolation(i, x[i], self.kind, interior=interior)
        return x

    def in_interior(self, x) -> bool:
        try:
            self.check_domain(x)
        except (DomainViolation, ValueError):
            return False
        return True

    @property
    def conjugate_exponent(self) -> float:
        return self.p / (self.p - 1.0)

    # -- f, f*, grad f, grad f* ---------------------------------------------

    def value(self, x) -> float:
        x = self.check_domain(x, interior=False)
        if self.kind is Kind.SQUARED_NORM:
            return 0.5 * float(x @ x)
        if self.kind is Kind.NEGATIVE_ENTROPY:
            pos = x > 0
            xp = x[pos]
            # 0 log 0 = 0 on the boundary
            return float(np.sum(xp * np.log(xp)) - np.sum(x))
        return float(np.sum(np.abs(x) ** self.p) / self.p)

    def conjugate(self, y) -> float:
        """Fenchel conjugate f*(y)."""
        y = self._vec(y)
        if self.kind is Kind.SQUARED_NORM:
            return 0.5 * float(y @ y)
        if self.kind is Kind.NEGATIVE_ENTROPY:
            return float(np.sum(np.exp(y)))
        q = self.conjugate_exponent
        return float(np.sum(np.abs(y) ** q) / q)

    def gradient(self, x) -> np.ndarray:
        x = self.check_domain(x)
        if self.kind is Kind.SQUARED_NORM:
            return x.copy()
        if self.kind is Kind.NEGATIVE_ENTROPY:
            return np.log(x)
        return np.sign(x) * np.abs(x) ** (self.p - 1.0)

    def gradient_inverse(self, y) -> np.ndarray:
        """Gradient of the conjugate, the inverse of :meth:`gradient`."""
        y = self._vec(y)
        if self.kind is Kind.SQUARED_NORM:
            return y.copy()
        if self.kind is Kind.NEGATIVE_ENTROPY:
            if np.any(y > _EXP_MAX):
                i = int(np.argmax(y))
                raise GradientRangeError(
                    f"exp overflows at coordinate {i} (value {y[i]!r})")
            return np.exp(y)
        return np.sign(y) * np.abs(y) ** (1.0 / (self.p - 1.0))

    def hessian_diag(self, x) -> np.ndarray:
        x = self.check_domain(x)
        if self.kind is Kind.SQUARED_NORM:
            return np.ones_like(x)
        if self.kind is Kind.NEGATIVE_ENTROPY:
            return 1.0 / x
        with np.errstate(divide="ignore"):
            return (self.p - 1.0) * np.abs(x) ** (self.p - 2.0)

    def conjugate_hessian_diag(self, y) -> np.ndarray:
        """Diagonal of the Hessian of f*; finite everywhere for the three kinds."""
        y = self._vec(y)
        if self.kind is Kind.SQUARED_NORM:
            return np.ones_like(y)
        if self.kind is Kind.NEGATIVE_ENTROPY:
            return np.exp(np.minimum(y, _EXP_MAX))
        e = 1.0 / (self.p - 1.0)
        if e == 1.0:
            return np.ones_like(y)
        return e * np.abs(y) ** (e - 1.0)

    # -- Bregman distance -----------------------------------------------------

    def bregman(self, y, x) -> float:
        """D_f(y, x) = f(y) - f(x) - <grad f(x), y - x>.

        Summed per coordinate; where ``y`` is close to ``x`` the term is taken
        from its power series in ``(y - x) / x``, since the closed form then
        cancels down to rounding noise.
        """
        y = self.check_domain(y, interior=False)
        x = self.check_domain(x)
        if self.kind is Kind.SQUARED_NORM:
            d = y - x
            return 0.5 * float(d @ d)
        terms = np.empty_like(x)
        if self.kind is Kind.NEGATIVE_ENTROPY:
            pos = y > 0
            terms[:] = x - y
            terms[pos] += y[pos] * np.log(y[pos] / x[pos])
            scale = x
            near = _near(y, x)
            coef = _ENTROPY_SERIES
        else:
            p = self.p
            ax = np.abs(x)
            terms[:] = (np.abs(y) ** p - ax ** p) / p - np.sign(x) * ax ** (p - 1.0) * (y - x)
            scale = ax ** p / p
            near = _near(y, x) & (x != 0)
            coef = _binomial_series(p)
        if np.any(near):
            r = (y[near] - x[near]) / x[near]
            terms[near] = scale[near] * _series(coef, r)
        return max(float(np.sum(terms)), 0.0)

    def gradient_difference(self, x, y) -> np.ndarray:
        """``grad f(x) - grad f(y)``, accurate to rounding even when x ~ y."""
        x = self.check_domain(x)
        y = self.check_domain(y)
        if self.kind is Kind.SQUARED_NORM:
            return x - y
        if self.kind is Kind.NEGATIVE_ENTROPY:
            return -np.log1p((y - x) / x)
        out = self.gradient(x) - self.gradient(y)
        same = (np.sign(x) == np.sign(y)) & (x != 0)
        if np.any(same):
            xs = x[same]
            r = (y[same] - xs) / xs
            out[same] = -np.sign(xs) * np.abs(xs) ** (self.p - 1.0) * np.expm1(
                (self.p - 1.0) * np.log1p(r))
        return out

    def dual_average(self, weights: Sequence[float], points: Sequence) -> np.ndarray:
        """grad f*( sum_i t_i grad f(x_i) ) for a convex weight vector t."""
        t = np.asarray(weights, dtype=float)
        if t.ndim != 1 or len(t) != len(points) or len(t) == 0:
            raise ValueError("weights and points must be nonempty and of equal length")
        if np.any(t <= 0):
            raise ValueError("weights must be strictly positive")
        if abs(float(t.sum()) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {t.sum()!r}")
        if len(points) == 1:
            return self.check_domain(points[0]).copy()
        theta = sum(ti * self.gradient(xi) for ti, xi in zip(t, points))
        return self.gradient_inverse(theta)

    def sampling_box(self) -> tuple[float, float]:
        """Coordinate range used for random sampling away from the boundary."""
        if self.kind is Kind.NEGATIVE_ENTROPY:
            return 0.1, 10.0
        return -10.0, 10.0


#: Below this relative gap the Bregman term comes from its power series.
_SERIES_GAP = 0.1
_SERIES_TERMS = 24
# (1 + r) log(1 + r) - r = sum_{k>=2} (-1)^k r^k / (k (k - 1))
_ENTROPY_SERIES = np.array([0.0, 0.0] + [(-1.0) ** k / (k * (k - 1))
                                        for k in range(2, _SERIES_TERMS + 2)])


def _binomial_series(p):
    # ((1 + r)^p - 1 - p r) / 1 = sum_{k>=2} C(p, k) r^k
    c = np.zeros(_SERIES_TERMS + 2)
    b = 1.0
    for k in range(1, _SERIES_TERMS + 2):
        b *= (p - k + 1) / k
        c[k] = b
    c[1] = 0.0
    return c


def _series(coef, r):
    return np.polynomial.polynomial.polyval(r, coef)


def _near(y, x):
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.abs(y - x) < _SERIES_GAP * np.abs(x)


def squared_norm(dim: int) -> LegendreGeometry:
    return LegendreGeometry(Kind.SQUARED_NORM, dim)


def negative_entropy(dim: int) -> LegendreGeometry:
    return LegendreGeometry(Kind.NEGATIVE_ENTROPY, dim)


def pnorm(dim: int, p: float) -> LegendreGeometry:
    return LegendreGeometry(Kind.PNORM, dim, p)
