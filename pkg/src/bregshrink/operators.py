"""A closed catalog of monotone operators and fixed-point mappings.

Every catalog entry knows its solution set in closed form (zeros of a
monotone operator, fixed points of a mapping), so iterations and inequality
checks can always be compared against an exact witness.

Separable geometries make most Bregman resolvents explicit: the normal cone
of a box resolves to a clamp, the weighted absolute sum to a soft threshold in
the dual.  Only the linear operator needs an iterative solve outside the
Euclidean case.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .feasibility import AffineHalfspace, halfspace, project_halfspace
from .geometry import GradientRangeError, Kind, LegendreGeometry

__all__ = [
    "MonotoneKind",
    "BismKind",
    "MappingKind",
    "MonotoneOperatorSpec",
    "BismOperatorSpec",
    "DemimetricMappingSpec",
    "OperatorFamilies",
    "ResolventError",
    "resolvent",
    "yosida",
    "selection_distance",
    "anti_resolvent",
    "fb_step",
    "apply_mapping",
    "demimetric_gap",
    "tightest_k",
    "default_families",
]


NEWTON_TOL = 1e-11
NEWTON_MAX_ITER = 200
WITNESS_TOL = 1e-10


class ResolventError(ArithmeticError):
    """Damped Newton failed to solve for a resolvent point."""

    def __init__(self, msg, residual, iterations):
        super().__init__(msg)
        self.residual = residual
        self.iterations = iterations


class MonotoneKind(str, enum.Enum):
    ZERO = "zero"
    LINEAR_PSD = "linear_psd"
    ABS_SUM = "abs_sum"
    NORMAL_CONE_BOX = "normal_cone_box"


class BismKind(str, enum.Enum):
    ZERO = "zero"
    AFFINE_GRADIENT = "affine_gradient"


class MappingKind(str, enum.Enum):
    IDENTITY = "identity"
    BOX_PROJECTION = "box_projection"
    HALFSPACE_PROJECTION = "halfspace_projection"
    RESOLVENT = "resolvent"
    STRICT_PSEUDO_CONTRACTION = "strict_pseudo_contraction"


def _arr(v, dim=None):
    if v is None:
        return None
    a = np.array(v, dtype=float)
    a.setflags(write=False)
    return a


def _is_psd(M, floor=-1e-10):
    if not np.allclose(M, M.T, atol=1e-12):
        return False
    return bool(np.linalg.eigvalsh(M).min() >= floor)


# -- maximal monotone operators ----------------------------------------------

@dataclass(frozen=True, eq=False)
class MonotoneOperatorSpec:
    """A maximal monotone operator from the catalog.

    ``linear_psd`` is ``u -> M u``, ``abs_sum`` the subdifferential of
    ``sum w_i |u_i|``, ``normal_cone_box`` the normal cone of
    ``[lower, upper]``.
    """

    kind: MonotoneKind
    dim: int
    matrix: np.ndarray | None = None
    weights: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", MonotoneKind(self.kind))
        for name in ("matrix", "weights", "lower", "upper"):
            object.__setattr__(self, name, _arr(getattr(self, name)))
        d = self.dim
        if self.kind is MonotoneKind.LINEAR_PSD:
            if self.matrix is None or self.matrix.shape != (d, d):
                raise ValueError(f"linear_psd needs a {d}x{d} matrix")
            if not _is_psd(self.matrix):
                raise ValueError("linear_psd matrix must be symmetric positive semidefinite")
        elif self.kind is MonotoneKind.ABS_SUM:
            if self.weights is None:
                object.__setattr__(self, "weights", _arr(np.ones(d)))
            if self.weights.shape != (d,) or np.any(self.weights < 0):
                raise ValueError(f"abs_sum needs {d} nonnegative weights")
        elif self.kind is MonotoneKind.NORMAL_CONE_BOX:
            if self.lower is None or self.upper is None:
                raise ValueError("normal_cone_box needs lower and upper bounds")
            if self.lower.shape != (d,) or self.upper.shape != (d,):
                raise ValueError(f"box bounds must have length {d}")
            if np.any(self.lower > self.upper):
                raise ValueError("box bounds need lower <= upper")

    @classmethod
    def zero(cls, dim):
        return cls(MonotoneKind.ZERO, dim)

    @classmethod
    def linear(cls, matrix):
        M = np.asarray(matrix, dtype=float)
        return cls(MonotoneKind.LINEAR_PSD, M.shape[0], matrix=M)

    @classmethod
    def abs_sum(cls, weights):
        w = np.asarray(weights, dtype=float)
        return cls(MonotoneKind.ABS_SUM, len(w), weights=w)

    @classmethod
    def box(cls, lower, upper):
        lo = np.asarray(lower, dtype=float)
        return cls(MonotoneKind.NORMAL_CONE_BOX, len(lo), lower=lo, upper=upper)

    def is_zero(self, u, tol=WITNESS_TOL) -> bool:
        """Whether ``0 in A(u)``."""
        return selection_distance(self, u, np.zeros(self.dim)) <= tol

    def sample_zero(self, g: LegendreGeometry, rng: np.random.Generator):
        """A random point of ``A^{-1} 0`` inside int dom f, or None."""
        lo_s, hi_s = g.sampling_box()
        d = self.dim
        if self.kind is MonotoneKind.ZERO:
            return rng.uniform(lo_s, hi_s, d)
        if self.kind is MonotoneKind.NORMAL_CONE_BOX:
            lo = np.clip(lo_s, self.lower, self.upper)
            hi = np.clip(hi_s, self.lower, self.upper)
            q = rng.uniform(lo, hi)
        elif self.kind is MonotoneKind.LINEAR_PSD:
            vals, vecs = np.linalg.eigh(self.matrix)
            null = vecs[:, vals <= 1e-10 * max(1.0, abs(vals).max())]
            q = null @ rng.uniform(-1.0, 1.0, null.shape[1]) if null.size else np.zeros(d)
            if g.kind is Kind.NEGATIVE_ENTROPY and not g.in_interior(q):
                # look for a positive null vector along the null space
                if null.size and np.all(np.abs(null.sum(axis=1)) > 0):
                    q = null @ (null.T @ np.ones(d))
                    q = q if np.all(q > 0) else -q
        else:
            q = np.where(self.weights > 0, 0.0, rng.uniform(lo_s, hi_s, d))
        return q if g.in_interior(q) else None


def selection_distance(A: MonotoneOperatorSpec, u, a_star) -> float:
    """Euclidean distance from the covector ``a_star`` to the set ``A(u)``."""
    u = np.asarray(u, dtype=float)
    a_star = np.asarray(a_star, dtype=float)
    if A.kind is MonotoneKind.ZERO:
        return float(np.linalg.norm(a_star))
    if A.kind is MonotoneKind.LINEAR_PSD:
        return float(np.linalg.norm(a_star - A.matrix @ u))
    if A.kind is MonotoneKind.ABS_SUM:
        w = A.weights
        nz = u != 0
        r = np.where(nz, np.abs(a_star - w * np.sign(u)), np.maximum(np.abs(a_star) - w, 0.0))
        return float(np.linalg.norm(r))
    lo, hi = A.lower, A.upper
    scale = 1e-12 * np.maximum(1.0, np.maximum(np.abs(lo), np.abs(hi)))
    if np.any(u < lo - scale) or np.any(u > hi + scale):
        return float("inf")
    at_lo = np.abs(u - lo) <= scale
    at_hi = np.abs(u - hi) <= scale
    r = np.abs(a_star)
    r = np.where(at_hi & ~at_lo, np.maximum(-a_star, 0.0), r)
    r = np.where(at_lo & ~at_hi, np.maximum(a_star, 0.0), r)
    r = np.where(at_lo & at_hi, 0.0, r)
    return float(np.linalg.norm(r))


def _newton_linear(g: LegendreGeometry, M, lam, x):
    """Solve grad f(u) + lam M u = grad f(x) by damped Newton in the dual.

    The unknown is ``theta = grad f(u)``; the residual
    ``theta + lam M grad f*(theta) - grad f(x)`` has Jacobian
    ``I + lam M diag(h)`` with ``h >= 0``, which is always invertible.
    """
    target = g.gradient(x)
    theta = target.copy()

    def residual(th):
        return th + lam * (M @ g.gradient_inverse(th)) - target

    r = residual(theta)
    rn = float(np.linalg.norm(r))
    scale = max(1.0, float(np.linalg.norm(target)))
    for it in range(1, NEWTON_MAX_ITER + 1):
        if rn <= NEWTON_TOL * scale:
            return g.gradient_inverse(theta)
        J = np.eye(g.dim) + lam * M * g.conjugate_hessian_diag(theta)[None, :]
        step = np.linalg.solve(J, r)
        t = 1.0
        while True:
            cand = theta - t * step
            try:
                rc = residual(cand)
                rcn = float(np.linalg.norm(rc))
            except (GradientRangeError, FloatingPointError):
                rcn = np.inf
            if rcn < rn or t < 1e-12:
                break
            t *= 0.5
        if not np.isfinite(rcn):
            break
        theta, r, rn = cand, rc, rcn
    raise ResolventError(
        f"Newton solve for the resolvent did not reach {NEWTON_TOL:g} "
        f"(residual {rn:.3e})", rn, NEWTON_MAX_ITER)


def resolvent(g: LegendreGeometry, A: MonotoneOperatorSpec, lam: float, x) -> np.ndarray:
    """Res_{lam A}^f(x) = (grad f + lam A)^{-1} grad f(x)."""
    if not lam > 0:
        raise ValueError(f"resolvent parameter must be positive, got {lam!r}")
    x = g.check_domain(x)
    if A.kind is MonotoneKind.ZERO:
        return x.copy()
    if A.kind is MonotoneKind.NORMAL_CONE_BOX:
        # separable f: the Bregman projection onto a box is a clamp
        return np.minimum(np.maximum(x, A.lower), A.upper)
    if A.kind is MonotoneKind.ABS_SUM:
        theta = g.gradient(x)
        t = lam * A.weights
        if g.kind is Kind.NEGATIVE_ENTROPY:
            # on the open orthant the subdifferential is the constant w
            return g.gradient_inverse(theta - t)
        return g.gradient_inverse(np.sign(theta) * np.maximum(np.abs(theta) - t, 0.0))
    if g.kind is Kind.SQUARED_NORM:
        return np.linalg.solve(np.eye(g.dim) + lam * A.matrix, x)
    return _newton_linear(g, A.matrix, lam, x)


def yosida(g: LegendreGeometry, A: MonotoneOperatorSpec, lam: float, x) -> np.ndarray:
    """(grad f(x) - grad f(Res(x))) / lam, an element of A(Res(x))."""
    u = resolvent(g, A, lam, x)
    return (g.gradient(x) - g.gradient(u)) / lam


def resolvent_residual(g: LegendreGeometry, A: MonotoneOperatorSpec, lam: float, x) -> float:
    """lam * dist(yosida(x), A(Res(x))): how far Res(x) is from solving its equation."""
    u = resolvent(g, A, lam, x)
    a_star = (g.gradient(x) - g.gradient(u)) / lam
    return lam * selection_distance(A, u, a_star)


# -- Bregman inverse strongly monotone mappings ------------------------------

@dataclass(frozen=True, eq=False)
class BismOperatorSpec:
    """``B(x) = Q x - q`` with Q symmetric positive semidefinite, or zero."""

    kind: BismKind
    dim: int
    matrix: np.ndarray | None = None
    shift: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", BismKind(self.kind))
        object.__setattr__(self, "matrix", _arr(self.matrix))
        object.__setattr__(self, "shift", _arr(self.shift))
        d = self.dim
        if self.kind is BismKind.AFFINE_GRADIENT:
            if self.matrix is None:
                object.__setattr__(self, "matrix", _arr(np.zeros((d, d))))
            if self.shift is None:
                object.__setattr__(self, "shift", _arr(np.zeros(d)))
            if self.matrix.shape != (d, d) or self.shift.shape != (d,):
                raise ValueError(f"affine_gradient needs a {d}x{d} matrix and a {d}-vector")
            if not _is_psd(self.matrix):
                raise ValueError("affine_gradient matrix must be symmetric positive semidefinite")

    @classmethod
    def zero(cls, dim):
        return cls(BismKind.ZERO, dim)

    @classmethod
    def affine(cls, matrix, shift):
        Q = np.asarray(matrix, dtype=float)
        return cls(BismKind.AFFINE_GRADIENT, Q.shape[0], matrix=Q, shift=shift)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind is BismKind.ZERO:
            return np.zeros_like(x)
        return self.matrix @ x - self.shift


def anti_resolvent(g: LegendreGeometry, B: BismOperatorSpec, lam: float, x) -> np.ndarray:
    """grad f*(grad f(x) - lam B(x))."""
    if not lam > 0:
        raise ValueError(f"anti-resolvent parameter must be positive, got {lam!r}")
    x = g.check_domain(x)
    if B.kind is BismKind.ZERO:
        return x.copy()
    return g.gradient_inverse(g.gradient(x) - lam * B(x))


def fb_step(g: LegendreGeometry, G: MonotoneOperatorSpec, B: BismOperatorSpec,
            eta: float, x) -> np.ndarray:
    """Forward-backward step Res_{eta G}^f(B_eta^f(x)); fixes exactly (B+G)^{-1}0."""
    return resolvent(g, G, eta, anti_resolvent(g, B, eta, x))


# -- demimetric mappings ------------------------------------------------------

def tightest_k(matrix) -> float:
    """Smallest k for which ``x -> c + L (x - c)`` is k-demimetric (L symmetric).

    With K = I - L, the demimetric inequality reads
    ``2 <v, K v> >= (1 - k) |K v|^2``; on each eigenvector of L with
    eigenvalue nu < 1 this needs ``k >= 1 - 2 / (1 - nu)``.
    """
    nus = np.linalg.eigvalsh(np.asarray(matrix, dtype=float))
    moving = nus[nus < 1.0 - 1e-12]
    if moving.size == 0:
        return -np.inf
    return float(1.0 - 2.0 / (1.0 - moving.min()))


@dataclass(frozen=True, eq=False)
class DemimetricMappingSpec:
    """A Bregman k-demimetric mapping with a known fixed point.

    Every catalog mapping is continuous with a closed convex fixed point set
    and Bregman quasi-nonexpansive, so the declared ``k`` may be anything in
    ``[tightest, 1)``.  ``validate=False`` skips the k check; it exists for
    negative controls only.
    """

    kind: MappingKind
    dim: int
    k: float = 0.0
    fixed_point_witness: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    normal: np.ndarray | None = None
    offset: float | None = None
    operator: MonotoneOperatorSpec | None = None
    lam: float = 1.0
    matrix: np.ndarray | None = None
    center: np.ndarray | None = None
    validate: bool = True

    def __post_init__(self):
        object.__setattr__(self, "kind", MappingKind(self.kind))
        for name in ("fixed_point_witness", "lower", "upper", "normal", "matrix", "center"):
            object.__setattr__(self, name, _arr(getattr(self, name)))
        if not self.k < 1:
            raise ValueError(f"k must be < 1, got {self.k!r}")
        d = self.dim
        kind = self.kind
        default = None
        if kind is MappingKind.BOX_PROJECTION:
            if self.lower is None or self.upper is None or np.any(self.lower > self.upper):
                raise ValueError("box_projection needs bounds with lower <= upper")
            default = np.clip(np.where(np.isfinite(self.lower) & np.isfinite(self.upper),
                                       0.5 * (self.lower + self.upper), 0.0),
                              self.lower, self.upper)
        elif kind is MappingKind.HALFSPACE_PROJECTION:
            if self.normal is None or self.offset is None or not np.any(self.normal):
                raise ValueError("halfspace_projection needs a nonzero normal and an offset")
            object.__setattr__(self, "offset", float(self.offset))
            default = self.offset * self.normal / float(self.normal @ self.normal)
        elif kind is MappingKind.RESOLVENT:
            if self.operator is None or not self.lam > 0:
                raise ValueError("resolvent mapping needs an operator and lam > 0")
        elif kind is MappingKind.STRICT_PSEUDO_CONTRACTION:
            if self.matrix is None or self.matrix.shape != (d, d):
                raise ValueError(f"strict_pseudo_contraction needs a {d}x{d} matrix")
            if not np.allclose(self.matrix, self.matrix.T, atol=1e-12):
                raise ValueError("strict_pseudo_contraction matrix must be symmetric")
            nus = np.linalg.eigvalsh(self.matrix)
            if self.validate and (nus.max() > 1 + 1e-12 or nus.min() < -1 - 1e-12):
                raise ValueError(
                    "eigenvalues must lie in [-1, 1] so the mapping is quasi-nonexpansive")
            if self.center is None:
                object.__setattr__(self, "center", _arr(np.zeros(d)))
            default = self.center
            if self.validate and self.k < tightest_k(self.matrix) - 1e-12:
                raise ValueError(
                    f"declared k={self.k} is below the tightest k={tightest_k(self.matrix):.6g}")
        else:
            default = np.zeros(d)
        if self.fixed_point_witness is None:
            if default is None:
                raise ValueError(f"{kind.value} mapping needs an explicit fixed_point_witness")
            object.__setattr__(self, "fixed_point_witness", _arr(default))
        if self.fixed_point_witness.shape != (d,):
            raise ValueError(f"fixed point witness must have length {d}")
        if self.fixed_point_residual(self.fixed_point_witness) > WITNESS_TOL:
            raise ValueError("fixed_point_witness is not a fixed point of the mapping")

    def fixed_point_residual(self, q) -> float:
        """Geometry-free distance-like measure of how far q is from F(T)."""
        q = np.asarray(q, dtype=float)
        kind = self.kind
        if kind is MappingKind.IDENTITY:
            return 0.0
        if kind is MappingKind.BOX_PROJECTION:
            return float(np.linalg.norm(q - np.clip(q, self.lower, self.upper)))
        if kind is MappingKind.HALFSPACE_PROJECTION:
            s = float(self.normal @ q) - self.offset
            return max(s, 0.0) / float(np.linalg.norm(self.normal))
        if kind is MappingKind.RESOLVENT:
            return selection_distance(self.operator, q, np.zeros(self.dim))
        v = q - self.center
        return float(np.linalg.norm(self.matrix @ v - v))

    @property
    def halfspace(self) -> AffineHalfspace:
        return halfspace(self.normal, self.offset)

    @classmethod
    def identity(cls, dim, k=0.0):
        return cls(MappingKind.IDENTITY, dim, k)

    @classmethod
    def box_projection(cls, lower, upper, k=0.0, witness=None):
        lo = np.asarray(lower, dtype=float)
        return cls(MappingKind.BOX_PROJECTION, len(lo), k, witness, lower=lo, upper=upper)

    @classmethod
    def halfspace_projection(cls, normal, offset, k=0.0, witness=None):
        a = np.asarray(normal, dtype=float)
        return cls(MappingKind.HALFSPACE_PROJECTION, len(a), k, witness,
                   normal=a, offset=offset)

    @classmethod
    def resolvent_of(cls, operator: MonotoneOperatorSpec, lam=1.0, k=0.0, witness=None):
        if witness is None:
            witness = np.zeros(operator.dim)
        return cls(MappingKind.RESOLVENT, operator.dim, k, witness,
                   operator=operator, lam=lam)

    @classmethod
    def strict_pseudo_contraction(cls, matrix, center=None, k=None, validate=True):
        L = np.asarray(matrix, dtype=float)
        if k is None:
            k = max(tightest_k(L), -1e6)
        return cls(MappingKind.STRICT_PSEUDO_CONTRACTION, L.shape[0], k,
                   matrix=L, center=center, validate=validate)


def apply_mapping(g: LegendreGeometry, T: DemimetricMappingSpec, x) -> np.ndarray:
    """Evaluate T(x)."""
    x = g.check_domain(x)
    kind = T.kind
    if kind is MappingKind.IDENTITY:
        return x.copy()
    if kind is MappingKind.BOX_PROJECTION:
        return np.minimum(np.maximum(x, T.lower), T.upper)
    if kind is MappingKind.HALFSPACE_PROJECTION:
        return project_halfspace(g, x, T.halfspace)
    if kind is MappingKind.RESOLVENT:
        return resolvent(g, T.operator, T.lam, x)
    if g.kind is not Kind.SQUARED_NORM:
        raise ValueError("strict pseudo-contractions are defined for the squared norm only")
    return T.center + T.matrix @ (x - T.center)


def demimetric_gap(g: LegendreGeometry, T: DemimetricMappingSpec, x, q, k=None) -> float:
    """<x - q, grad f(x) - grad f(Tx)> - (1 - k) D_f(x, Tx); nonnegative when T is k-demimetric."""
    q = np.asarray(q, dtype=float)
    if T.fixed_point_residual(q) > 1e-8:
        raise ValueError("q is not a fixed point of T (residual above 1e-8)")
    k = T.k if k is None else k
    x = g.check_domain(x)
    tx = apply_mapping(g, T, x)
    return float((x - q) @ (g.gradient(x) - g.gradient(tx))) - (1.0 - k) * g.bregman(x, tx)


# -- families -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorFamilies:
    """The operators of one problem: mappings T_j, BISM mappings B_i, A and G."""

    demimetric: tuple
    bism: tuple
    A: MonotoneOperatorSpec
    G: MonotoneOperatorSpec
    witness: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "witness", _arr(self.witness))
        object.__setattr__(self, "demimetric", tuple((T, float(w)) for T, w in self.demimetric))
        object.__setattr__(self, "bism", tuple((B, float(w)) for B, w in self.bism))
        for label, fam in (("demimetric", self.demimetric), ("bism", self.bism)):
            if not fam:
                raise ValueError(f"[{label}] family must not be empty")
            w = np.array([wt for _, wt in fam])
            if np.any(w <= 0) or np.any(w > 1):
                raise ValueError(f"[{label}] weights must lie in (0, 1]")
            if abs(float(w.sum()) - 1.0) > 1e-12:
                raise ValueError(f"[{label}] weights must sum to 1, got {w.sum():.15g}")
        dims = {T.dim for T, _ in self.demimetric} | {B.dim for B, _ in self.bism}
        dims |= {self.A.dim, self.G.dim}
        if len(dims) != 1:
            raise ValueError(f"operators disagree on the dimension: {sorted(dims)}")

    @property
    def dim(self) -> int:
        return self.A.dim

    @property
    def mappings(self) -> list:
        return [T for T, _ in self.demimetric]

    @property
    def bisms(self) -> list:
        return [B for B, _ in self.bism]

    def omega_residuals(self, g: LegendreGeometry, z, eta: float = 0.5) -> dict:
        """How far z is from each solution set making up Omega."""
        z = np.asarray(z, dtype=float)
        return {
            "A": selection_distance(self.A, z, np.zeros(self.dim)),
            "T": max(T.fixed_point_residual(z) for T in self.mappings),
            "B+G": max(float(np.linalg.norm(fb_step(g, self.G, B, eta, z) - z))
                       for B in self.bisms),
        }


def _psd_orthogonal_to(v, rng, top=2.0):
    """A PSD matrix whose null space contains ``v``."""
    d = len(v)
    u = v / np.linalg.norm(v)
    P = np.eye(d) - np.outer(u, u)
    R = np.linalg.qr(rng.normal(size=(d, d)))[0]
    S = R @ np.diag(np.linspace(0.5, top, d)) @ R.T
    M = P @ S @ P
    return 0.5 * (M + M.T)


def default_families(g: LegendreGeometry) -> OperatorFamilies:
    """A catalog exercising every operator kind legal for ``g``.

    All families share the witness stored on the result, a point of Omega.
    """
    d = g.dim
    rng = np.random.default_rng(12345)
    if g.kind is Kind.NEGATIVE_ENTROPY:
        ones = np.ones(d)
        M = _psd_orthogonal_to(ones, rng)
        T = [
            (DemimetricMappingSpec.box_projection(0.5 * ones, 5.0 * ones, witness=ones), 0.2),
            (DemimetricMappingSpec.halfspace_projection(ones, 2.0 * d, witness=ones), 0.2),
            (DemimetricMappingSpec.resolvent_of(
                MonotoneOperatorSpec.box(0.2 * ones, 3.0 * ones), witness=ones), 0.2),
            (DemimetricMappingSpec.resolvent_of(
                MonotoneOperatorSpec.linear(M), lam=0.7, witness=ones), 0.2),
            (DemimetricMappingSpec.identity(d), 0.2),
        ]
        return OperatorFamilies(
            demimetric=T, bism=[(BismOperatorSpec.zero(d), 1.0)],
            A=MonotoneOperatorSpec.box(0.05 * ones, 50.0 * ones),
            G=MonotoneOperatorSpec.box(0.1 * ones, 20.0 * ones),
            witness=ones)
    a = np.ones(d) / np.sqrt(d)
    w = 0.5 * a
    M = _psd_orthogonal_to(a, rng)
    R = np.linalg.qr(rng.normal(size=(d, d)))[0]
    L = R @ np.diag(np.linspace(-0.8, 0.9, d)) @ R.T
    L = 0.5 * (L + L.T)
    T = [
        (DemimetricMappingSpec.box_projection(-np.ones(d), np.ones(d), witness=w), 0.2),
        (DemimetricMappingSpec.halfspace_projection(a, 0.5, witness=w), 0.2),
        (DemimetricMappingSpec.resolvent_of(MonotoneOperatorSpec.linear(M), lam=0.7,
                                            witness=w), 0.2),
        (DemimetricMappingSpec.resolvent_of(
            MonotoneOperatorSpec.box(-2.0 * np.ones(d), 2.0 * np.ones(d)), witness=w), 0.2),
    ]
    if g.kind is Kind.SQUARED_NORM:
        T.append((DemimetricMappingSpec.strict_pseudo_contraction(L, center=w), 0.2))
        bism = [(BismOperatorSpec.affine(np.outer(a, a), 0.5 * a), 0.5),
                (BismOperatorSpec.zero(d), 0.5)]
    else:
        T.append((DemimetricMappingSpec.identity(d), 0.2))
        bism = [(BismOperatorSpec.zero(d), 1.0)]
    return OperatorFamilies(
        demimetric=T, bism=bism,
        A=MonotoneOperatorSpec.linear(M),
        G=MonotoneOperatorSpec.box(-np.ones(d), np.ones(d)),
        witness=w)
