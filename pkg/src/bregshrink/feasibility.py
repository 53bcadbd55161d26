"""Polyhedral outer approximations and Bregman projections onto them.

Every set that the shrinking projection method intersects is an affine
halfspace ``{z : <a, z> <= b}``.  Halfspaces are stored in the anchored form
``<a, z - anchor> <= offset`` as well, which is how violations are evaluated:
when ``a`` is tiny (a sub-step that has almost converged) the raw offset ``b``
loses all significant digits to cancellation, the anchored form does not.
"""

from __future__ import annotations

import enum
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import quadprog

from .geometry import DomainViolation, Kind, LegendreGeometry

log = logging.getLogger(__name__)

__all__ = [
    "Tag",
    "AffineHalfspace",
    "ConstraintLedger",
    "ProjectionReport",
    "ProjectionError",
    "UnboundedProjection",
    "InfeasibleProjection",
    "ProjectionNotConverged",
    "halfspace",
    "halfspace_from_bregman_comparison",
    "halfspace_from_resolvent_gap",
    "halfspace_from_anchor",
    "box_halfspaces",
    "project_halfspace",
    "project_ledger",
    "project_polyhedron",
    "membership",
    "active_set_projection",
]


class Tag(str, enum.Enum):
    BREGMAN_COMPARISON = "bregman_comparison"
    RESOLVENT_GAP = "resolvent_gap"
    ANCHOR = "anchor"
    EXTERNAL = "external"


class ProjectionError(ArithmeticError):
    """Base class for numerical failures of a Bregman projection."""


class UnboundedProjection(ProjectionError):
    """The dual root could not be bracketed; the constraint misses dom f."""


class InfeasibleProjection(ProjectionError):
    """The intersection of the constraints is (numerically) empty."""

    def __init__(self, msg, max_violation=math.inf):
        super().__init__(msg)
        self.max_violation = max_violation


class ProjectionNotConverged(ProjectionError):
    def __init__(self, msg, max_violation, sweeps):
        super().__init__(msg)
        self.max_violation = max_violation
        self.sweeps = sweeps


@dataclass(frozen=True, eq=False)
class AffineHalfspace:
    """The set ``{z : <a, z> <= b}``, equivalently ``<a, z - anchor> <= offset``."""

    a: np.ndarray
    b: float
    tag: Tag = Tag.EXTERNAL
    generation: int = 0
    anchor: np.ndarray | None = None
    offset: float | None = None

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "tag", Tag(self.tag))
        if self.anchor is None:
            object.__setattr__(self, "anchor", np.zeros_like(a))
            object.__setattr__(self, "offset", float(self.b))
        else:
            p = np.asarray(self.anchor, dtype=float)
            p.setflags(write=False)
            object.__setattr__(self, "anchor", p)
            object.__setattr__(self, "offset", float(self.offset))

    @property
    def is_degenerate(self) -> bool:
        return not np.any(self.a)

    def slack(self, z) -> float:
        """<a, z> - b, evaluated in anchored form (positive means violated)."""
        return float(self.a @ (np.asarray(z, dtype=float) - self.anchor)) - self.offset

    def contains(self, z, tol: float = 0.0) -> bool:
        return self.slack(z) <= tol

    def __repr__(self):
        return (f"AffineHalfspace(a={np.array2string(self.a, precision=6)}, "
                f"b={self.b:.6g}, tag={self.tag.value}, generation={self.generation})")


def halfspace(a, b, tag=Tag.EXTERNAL, generation=0) -> AffineHalfspace:
    return AffineHalfspace(np.asarray(a, dtype=float), float(b), tag, generation)


#: Gradient gaps below this many ulps of the gradients are rounding noise.
_NOISE_ULPS = 8.0
#: A cut whose whole normal sits below this many ulps carries no direction.
_FLAT_ULPS = 64.0


def _cut(g, left, right, anchor, offset, tag, generation):
    """The cut ``<grad f(left) - grad f(right), z - anchor> <= offset``.

    The input points are themselves computed to a few ulps, so a gradient
    gap of that order has no meaningful direction; normalizing it would turn
    rounding into a hard face.  Noise components of the normal are zeroed,
    a normal made only of near-noise is zeroed whole (the cut becomes
    degenerate), and the offset is widened by the rounding bound of
    ``<a, z - anchor>`` so that the cut never excludes a point that the exact
    cut keeps.
    """
    a = g.gradient_difference(left, right)
    eps = np.finfo(float).eps
    size = np.abs(g.gradient(left)) + np.abs(g.gradient(right))
    a[np.abs(a) <= _NOISE_ULPS * eps * size] = 0.0
    if np.all(np.abs(a) <= _FLAT_ULPS * eps * size.max()):
        # a flat cut; its offset is a Bregman distance of rounding order
        a[:] = 0.0
        offset = 0.0
    else:
        offset += _NOISE_ULPS * eps * float(size.max()) * (1.0 + float(np.abs(anchor).max()))
    b = float(a @ anchor) + offset
    return AffineHalfspace(a, b, tag, generation, anchor=anchor, offset=offset)


def halfspace_from_bregman_comparison(g: LegendreGeometry, y, x, generation: int = 0):
    """The set ``{z : D_f(z, y) <= D_f(z, x)}`` as a halfspace.

    ``a = grad f(x) - grad f(y)`` and ``b = f(y) - f(x) + <grad f(x), x> -
    <grad f(y), y>``; around ``y`` this reads ``<a, z - y> <= D_f(y, x)``.
    """
    y = g.check_domain(y)
    x = g.check_domain(x)
    return _cut(g, x, y, y, g.bregman(y, x), Tag.BREGMAN_COMPARISON, generation)


def halfspace_from_resolvent_gap(g: LegendreGeometry, z_n, u_n, generation: int = 0):
    """``{z : <z_n - z, grad f(z_n) - grad f(u_n)> >= D_f(z_n, u_n)}``."""
    z_n = g.check_domain(z_n)
    u_n = g.check_domain(u_n)
    return _cut(g, z_n, u_n, z_n, -g.bregman(z_n, u_n), Tag.RESOLVENT_GAP, generation)


def halfspace_from_anchor(g: LegendreGeometry, x_next, x1, generation: int = 0):
    """``{z : <x_next - z, grad f(x1) - grad f(x_next)> >= 0}``."""
    x_next = g.check_domain(x_next)
    x1 = g.check_domain(x1)
    return _cut(g, x1, x_next, x_next, 0.0, Tag.ANCHOR, generation)


def box_halfspaces(lower, upper) -> list[AffineHalfspace]:
    """The finite faces of a box as external halfspaces."""
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    out = []
    eye = np.eye(len(lower))
    for i in range(len(lower)):
        if np.isfinite(upper[i]):
            out.append(halfspace(eye[i], upper[i]))
        if np.isfinite(lower[i]):
            out.append(halfspace(-eye[i], -lower[i]))
    return out


@dataclass
class ConstraintLedger:
    """Append-only record of the halfspaces cutting out C_n and Q_n.

    ``base_box`` is the set C (``C_1 = Q_1 = C``), or None for the whole
    domain of f.
    """

    c_constraints: list = field(default_factory=list)
    q_constraints: list = field(default_factory=list)
    base_box: tuple | None = None

    def __post_init__(self):
        # insertion order keeps warm-start multipliers aligned as both lists grow
        self._order = list(self.c_constraints) + list(self.q_constraints)
        if self.base_box is not None:
            lo, hi = (np.asarray(v, dtype=float) for v in self.base_box)
            if np.any(lo > hi):
                raise ValueError("base box needs lower <= upper")
            self.base_box = (lo, hi)

    def add_c(self, h: AffineHalfspace):
        self.c_constraints.append(h)
        self._order.append(h)

    def add_q(self, h: AffineHalfspace):
        self.q_constraints.append(h)
        self._order.append(h)

    def halfspaces(self) -> list[AffineHalfspace]:
        """All halfspaces in insertion order."""
        return list(self._order)

    def __len__(self):
        return len(self.c_constraints) + len(self.q_constraints)

    def snapshot(self) -> "ConstraintLedger":
        snap = ConstraintLedger(list(self.c_constraints), list(self.q_constraints),
                                self.base_box)
        snap._order = list(self._order)
        return snap


@dataclass
class ProjectionReport:
    """Result of a polyhedral projection.

    ``certificate`` bounds how far the variational inequality
    ``<z - y, grad f(x1) - grad f(z)> >= 0`` can fail over feasible ``y``.
    ``degraded`` marks a point accepted at the conditioning floor: either a
    frozen iterate whose certificate stays below ``STAGNATION_CERT``, or the
    primal finisher's KKT point when nearly dependent active normals keep
    the dual reconstruction from certifying it.
    """

    point: np.ndarray
    dual_multipliers: np.ndarray
    sweeps: int
    max_violation: float
    certificate: float = 0.0
    degraded: bool = False


#: Sweeps without primal motion before the stagnation rule may accept.
STAGNATION_SWEEPS = 20
#: Largest certificate the stagnation rule accepts.
STAGNATION_CERT = 1e-8
#: Certificate small enough to stop without waiting for the iterate to settle.
CERT_EXACT = 1e-13
#: Relative stationarity residual of an acceptable primal KKT point.
PRIMAL_KKT = 1e-12


# -- single halfspace ---------------------------------------------------------

def _dual_root(g: LegendreGeometry, theta, a, anchor, offset, tol=1e-11, mu_max=1e12):
    """Root mu > 0 of phi(mu) = <a, grad f*(theta - mu a) - anchor> - offset.

    phi is strictly decreasing because grad f* is strictly monotone.
    """
    if g.kind is Kind.SQUARED_NORM:
        return max((float(a @ (theta - anchor)) - offset) / float(a @ a), 0.0)

    def phi(mu):
        return float(a @ (g.gradient_inverse(theta - mu * a) - anchor)) - offset

    def dphi(mu):
        return -float(a * a @ g.conjugate_hessian_diag(theta - mu * a))

    f0 = phi(0.0)
    if f0 <= 0:
        return 0.0
    amax = float(np.abs(a).max())
    lo, hi = 0.0, 1.0 / max(amax, 1e-300)
    while True:
        try:
            fhi = phi(hi)
        except OverflowError:
            fhi = -math.inf
        if fhi <= 0:
            break
        lo = hi
        hi *= 4.0
        # the bound applies to the multiplier of the unit normal
        if hi * amax > mu_max:
            raise UnboundedProjection(
                "dual root not bracketed below mu = 1e12; the halfspace does not "
                "meet the domain of f")
    mu = lo
    scale = max(1.0, abs(offset), float(np.abs(a) @ np.abs(anchor)))
    for _ in range(200):
        try:
            val = phi(mu)
        except OverflowError:
            val = -math.inf
        if abs(val) <= tol * scale:
            return mu
        if val > 0:
            lo = mu
        else:
            hi = mu
        step_ok = False
        if math.isfinite(val):
            d = dphi(mu)
            if d < 0:
                cand = mu - val / d
                if lo < cand < hi:
                    mu = cand
                    step_ok = True
        if not step_ok:
            mu = 0.5 * (lo + hi)
        if hi - lo <= 1e-16 * max(1.0, hi):
            return mu
    return mu


def project_halfspace(g: LegendreGeometry, x, h: AffineHalfspace) -> np.ndarray:
    """Bregman projection of ``x`` onto a single halfspace."""
    x = g.check_domain(x)
    if h.slack(x) <= 0:
        return x.copy()
    if h.is_degenerate:
        raise InfeasibleProjection("degenerate halfspace with negative offset is empty")
    theta = g.gradient(x)
    mu = _dual_root(g, theta, h.a, h.anchor, h.offset)
    return g.gradient_inverse(theta - mu * h.a)


# -- intersections ------------------------------------------------------------

def _box_primal(g, th_free, lo, hi):
    """Primal point for free dual ``th_free`` with the box block solved exactly.

    f is separable, so the Bregman projection onto a box is a clamp; the box
    correction covector ``nu`` is nonzero only on clamped coordinates.
    """
    z = g.gradient_inverse(th_free)
    nu = np.zeros_like(z)
    if lo is None:
        return z, nu
    zc = np.minimum(np.maximum(z, lo), hi)
    clamped = zc != z
    if np.any(clamped):
        nu[clamped] = th_free[clamped] - g.gradient(zc)[clamped]
    return zc, nu


def project_polyhedron(g: LegendreGeometry, x1, halfspaces: Sequence[AffineHalfspace],
                       box=None, *, tol: float = 1e-9, step_tol: float = 1e-11,
                       max_sweeps: int = 10000, multipliers=None,
                       polish: bool = True, patience: int = STAGNATION_SWEEPS
                       ) -> ProjectionReport:
    """Bregman projection of ``x1`` onto ``box`` intersected with the halfspaces.

    Dual block-coordinate ascent (Bregman-Dykstra / Hildreth): halfspace ``i``
    carries a multiplier ``mu_i >= 0`` and the box a correction covector
    ``nu``; the primal iterate is ``grad f*(grad f(x1) - A^T mu - nu)``.
    Each sweep updates the box block, then every halfspace that is violated
    or carries a positive multiplier.  Early sweeps, and every tenth after,
    also try an SQP finisher (see ``_polish``), which settles the last digits
    that the cyclic sweeps approach only linearly.

    ``multipliers`` warm-starts the halfspace duals (missing trailing entries
    start at zero).  Violations are normalized slacks ``(<a, z> - b) / |a|``.
    """
    x1 = g.check_domain(x1)
    hs = list(halfspaces)
    m = len(hs)
    d = g.dim
    lo = hi = None
    if box is not None:
        lo, hi = (np.asarray(v, dtype=float) for v in box)
        if np.any(lo > hi):
            raise InfeasibleProjection("empty base box")
        if g.kind is Kind.NEGATIVE_ENTROPY:
            if np.any(hi <= 0):
                raise InfeasibleProjection("base box misses the positive orthant")
            lo = np.maximum(lo, 0.0)
    for h in hs:
        if h.is_degenerate and h.offset < 0:
            raise InfeasibleProjection(
                f"degenerate constraint 0 <= {h.b!r} is empty", max_violation=-h.offset)

    live = [i for i, h in enumerate(hs) if not h.is_degenerate]
    A = np.array([h.a for h in hs]).reshape(m, d)
    P = np.array([h.anchor for h in hs]).reshape(m, d)
    off = np.array([h.offset for h in hs])
    anorm = np.linalg.norm(A, axis=1)
    anorm_safe = np.where(anorm > 0, anorm, 1.0)

    mu = np.zeros(m)
    if multipliers is not None:
        k = min(len(multipliers), m)
        mu[:k] = np.maximum(np.asarray(multipliers[:k], dtype=float), 0.0)
        mu[anorm == 0] = 0.0
    theta0 = g.gradient(x1)

    def violations(z):
        if m == 0:
            return np.zeros(0)
        return (np.einsum("ij,ij->i", A, z[None, :] - P) - off) / anorm_safe

    def max_violation(z, viol):
        box_v = 0.0 if lo is None else float(max(np.max(lo - z), np.max(z - hi)))
        return max(float(viol.max(initial=0.0)), box_v, 0.0)

    def kkt_residual(mu, viol, maxv):
        # z = grad f*(theta0 - A^T mu - nu) is stationary by construction, so for
        # every feasible y:  <z - y, grad f(x1) - grad f(z)> >= -sum mu_i (-s_i)^+.
        # The sum certifies the variational inequality; it also rules out a
        # positive multiplier left on a slack constraint.
        cert = float(mu @ (anorm * np.maximum(-viol, 0.0))) if m else 0.0
        return max(maxv, cert)

    th_free = theta0 - A.T @ mu
    z, nu = _box_primal(g, th_free, lo, hi)
    sweeps = 0
    stall = 0
    frozen = 0
    best = math.inf
    working = list(live)
    while True:
        z_prev = z
        _, nu = _box_primal(g, th_free, lo, hi)
        for i in working:
            a = A[i]
            th_free = th_free + mu[i] * a
            mu[i] = _dual_root(g, th_free - nu, a, P[i], off[i])
            th_free = th_free - mu[i] * a
        sweeps += 1
        z, nu = _box_primal(g, th_free, lo, hi)
        viol = violations(z)
        maxv = max_violation(z, viol)
        kkt = kkt_residual(mu, viol, maxv)
        if polish and m and kkt > tol and (sweeps <= 3 or sweeps % 10 == 0):
            fallback = None
            # late in a run the cuts can pin a slab thinner than rounding;
            # relaxing every face by tol / 2 makes the subproblem consistent
            for relax in (0.0, 0.5 * tol):
                found = _polish(g, theta0, A, P, off, lo, hi, z, relax=relax)
                if found is None:
                    continue
                cand, z_p, stat = found
                th_c = theta0 - A.T @ cand
                z_c, nu_c = _box_primal(g, th_c, lo, hi)
                viol_c = violations(z_c)
                maxv_c = max_violation(z_c, viol_c)
                kkt_c = kkt_residual(cand, viol_c, maxv_c)
                maxv_p = math.inf
                if stat <= PRIMAL_KKT:
                    viol_p = violations(z_p)
                    maxv_p = max_violation(z_p, viol_p)
                if kkt_c <= tol:
                    # certified; the finisher's own point is the same up to the
                    # cancellation in A^T mu, and usually the more feasible one
                    if maxv_p <= maxv_c:
                        return ProjectionReport(z_p, cand, sweeps, maxv_p, kkt_c)
                    return ProjectionReport(z_c, cand, sweeps, maxv_c, max(kkt_c - maxv_c, 0.0))
                if kkt_c <= kkt:
                    mu, th_free, z, nu, viol, maxv, kkt = cand, th_c, z_c, nu_c, viol_c, maxv_c, kkt_c
                if fallback is None and maxv_p <= tol:
                    comp = float(cand @ (anorm * np.maximum(-viol_p, 0.0)))
                    fallback = ProjectionReport(z_p, cand, sweeps, maxv_p, comp, degraded=True)
            if fallback is not None:
                log.debug("projection accepted as primal KKT point (dual certificate %.1e)", kkt)
                return fallback
        change = float(np.linalg.norm(z - z_prev))
        still = change <= step_tol * max(1.0, float(np.linalg.norm(z)))
        # the certificate bounds D_f(x*, z) by itself; stillness only guards
        # against the slow creep of the cyclic sweeps
        if kkt <= CERT_EXACT or (kkt <= tol and still):
            return ProjectionReport(z, mu, sweeps, maxv, max(kkt - maxv, 0.0))
        # near the limit of a long run the active normals can be so nearly
        # dependent that the certificate has a floor above tol; a feasible
        # point that no longer moves is accepted and flagged
        frozen = frozen + 1 if (still and maxv <= tol) else 0
        if frozen >= patience and kkt <= STAGNATION_CERT:
            log.debug("projection accepted by stagnation: certificate %.3e after %d sweeps",
                      kkt, sweeps)
            return ProjectionReport(z, mu, sweeps, maxv, kkt, degraded=True)
        if sweeps >= max_sweeps:
            raise ProjectionNotConverged(
                f"projection did not converge in {max_sweeps} sweeps "
                f"(max violation {maxv:.3e})", maxv, sweeps)
        # multipliers of the unit normals; raw ones are large on short normals
        big = float((mu * anorm).max()) if m else 0.0
        if big > 1e10:
            stall = stall + 1 if maxv >= 0.999 * best else 0
            if stall > 50:
                raise InfeasibleProjection(
                    f"dual multipliers diverge (max {big:.3e}) while the "
                    f"violation stays at {maxv:.3e}; the intersection looks empty", maxv)
        best = min(best, maxv)
        if maxv > tol or sweeps % 10 == 0:
            working = [i for i in live if mu[i] > 0 or viol[i] > 0.0]
        else:
            working = [i for i in working if mu[i] > 0 or viol[i] > 0.0]


def _ldp(G, h):
    """Least-distance program min |w| s.t. G w >= h.

    Solved by the Goldfarb-Idnani dual active-set method, which stays exact
    when many constraints are nearly dependent.  Returns ``(w, lam)`` with
    ``w = G^T lam`` and ``lam >= 0`` the multipliers, or None when the
    constraints are inconsistent.
    """
    n = G.shape[1]
    try:
        w, _, _, _, lam, _ = quadprog.solve_qp(np.eye(n), np.zeros(n),
                                               np.ascontiguousarray(G.T), h.copy(), 0)
    except ValueError:
        return None
    return w, lam


def _polish(g, theta0, A, P, off, lo, hi, z, relax=0.0, max_newton=40):
    """Finish the projection by SQP with least-distance subproblems.

    Hildreth cycling finds the primal point quickly but shifts multiplier
    mass between nearly parallel constraints very slowly.  Each step here
    minimizes the quadratic model of D_f(., x1) over the full polyhedron;
    f is separable, so its diagonal Hessian is exact and the step is a
    Newton step (one step suffices for the squared norm).

    Returns ``(mu, z, stat)``: the multipliers of the last subproblem rescaled
    to the raw normals, the primal point, and its stationarity residual
    relative to the size of the terms that cancel in it; or None when the
    finisher fails.
    """
    anorm = np.linalg.norm(A, axis=1)
    live = anorm > 0
    n_live = int(live.sum())
    An = A[live] / anorm[live, None]
    c = (np.einsum("ij,ij->i", A[live], P[live]) + off[live]) / anorm[live] + relax
    if lo is not None:
        d = g.dim
        finite_lo = np.isfinite(lo)
        finite_hi = np.isfinite(hi)
        I = np.eye(d)
        An = np.vstack([An, I[finite_hi], -I[finite_lo]])
        c = np.concatenate([c, hi[finite_hi], -lo[finite_lo]])
    z = np.array(z, dtype=float)

    def merit(x):
        return g.value(x) - float(theta0 @ x)

    def newton_step(z):
        grad = g.gradient(z) - theta0
        H = np.clip(g.hessian_diag(z), 1e-12, 1e12)
        Hm = 1.0 / np.sqrt(H)
        # s = Hm * (w - Hm * grad); An s <= c - An z
        G = -An * Hm[None, :]
        h = -(c - An @ z) - An @ (Hm * Hm * grad)
        sol = _ldp(G, h)
        if sol is None:
            return None
        w, lam = sol
        return grad, Hm * (w - Hm * grad), lam

    feasible = False
    lam = None
    for _ in range(max_newton):
        try:
            res = newton_step(z)
        except (DomainViolation, ValueError):
            return None
        if res is None:
            return None
        grad, step, lam = res
        if feasible and np.linalg.norm(step) <= 1e-14 * max(1.0, float(np.abs(z).max())):
            break
        t = 1.0
        if g.kind is Kind.NEGATIVE_ENTROPY:
            neg = step < 0
            if np.any(neg):
                t = min(1.0, 0.99 * float(np.min(-z[neg] / step[neg])))
        if feasible:
            # iterates are feasible and so is every point on the segment;
            # backtrack on the objective
            f0 = merit(z)
            slope = float(grad @ step)
            if slope >= 0:
                break
            while merit(z + t * step) > f0 + 1e-4 * t * slope:
                t *= 0.5
                if t < 1e-8:
                    break
            else:
                z = z + t * step
                continue
            # no decrease left above rounding
            break
        z = z + t * step
        feasible = t == 1.0
    else:
        return None
    try:
        grad = g.gradient(z) - theta0
    except (DomainViolation, ValueError):
        return None
    resid = grad + An.T @ lam
    scale = max(1.0, float(np.abs(theta0).max()), float(lam.sum()))
    out = np.zeros(len(A))
    out[live] = lam[:n_live] / anorm[live]
    return out, z, float(np.abs(resid).max()) / scale


def project_ledger(g: LegendreGeometry, x1, ledger: ConstraintLedger, **kw) -> ProjectionReport:
    """Bregman projection of ``x1`` onto everything recorded in ``ledger``."""
    return project_polyhedron(g, x1, ledger.halfspaces(), ledger.base_box, **kw)


def membership(z, ledger: ConstraintLedger | Iterable[AffineHalfspace], tol: float = 0.0):
    """Whether ``z`` satisfies every constraint, and the largest raw slack.

    An empty ledger returns ``(True, -inf)``.
    """
    hs = ledger.halfspaces() if isinstance(ledger, ConstraintLedger) else list(ledger)
    worst = -math.inf
    z = np.asarray(z, dtype=float)
    for h in hs:
        worst = max(worst, h.slack(z))
    if isinstance(ledger, ConstraintLedger) and ledger.base_box is not None:
        lo, hi = ledger.base_box
        worst = max(worst, float(np.max(lo - z)), float(np.max(z - hi)))
    return worst <= tol, worst


# -- independent oracle -------------------------------------------------------

def active_set_projection(x1, A, b, *, tol: float = 1e-9, max_constraints: int = 16):
    """Euclidean projection onto ``{z : A z <= b}`` by exhaustive enumeration.

    Every subset of constraints is tried as the active set (by increasing
    size); the first KKT point, primal and dual feasible, is returned.  Only
    meant as an oracle for small instances.
    """
    x1 = np.asarray(x1, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m = len(b)
    if m > max_constraints:
        raise ValueError(f"enumeration over {m} constraints is too large")
    if m == 0 or np.all(A @ x1 <= b + tol):
        return x1.copy()
    scale = 1.0 + np.linalg.norm(x1) + np.abs(b).max()
    for size in range(1, m + 1):
        for S in itertools.combinations(range(m), size):
            S = list(S)
            As = A[S]
            rhs = As @ x1 - b[S]
            K = As @ As.T
            lam, *_ = np.linalg.lstsq(K, rhs, rcond=None)
            if not np.allclose(K @ lam, rhs, atol=1e-10 * scale):
                continue
            if np.any(lam < -tol):
                continue
            z = x1 - As.T @ lam
            if np.all(A @ z <= b + tol * scale):
                return z
    raise InfeasibleProjection("no KKT point found; polyhedron is empty")
