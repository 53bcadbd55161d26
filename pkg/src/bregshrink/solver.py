"""The Bregman shrinking projection iteration.

One step from ``x_n``:

    y_n     = grad f*( sum_j xi_j [(1 - lam_n) grad f(x_n) + lam_n grad f(T_j x_n)] )
    z_n     = grad f*( sum_i sigma_i grad f( Res_{eta_n G}(B_{i, eta_n}(y_n)) ) )
    u_n     = Res_{r_n A}(z_n)
    C_{n+1} = C_n  cut by  D(., y_n) <= D(., x_n),  D(., z_n) <= D(., y_n)
                   and     <z_n - ., grad f(z_n) - grad f(u_n)> >= D(z_n, u_n)
    x_{n+1} = Bregman projection of x_1 onto C_{n+1} and Q_n
    Q_{n+1} = Q_n  cut by  <x_{n+1} - ., grad f(x_1) - grad f(x_{n+1})> >= 0

All cuts are halfspaces, so the sets are kept as an append-only ledger and
every projection is onto a polyhedron.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import feasibility as fz
from .feasibility import ConstraintLedger, ProjectionError
from .geometry import DomainViolation, GradientRangeError, Kind, LegendreGeometry
from .operators import (OperatorFamilies, ResolventError, apply_mapping, fb_step,
                        resolvent)

__all__ = [
    "Schedules",
    "OmegaDescription",
    "ProblemSpec",
    "StopRule",
    "IterationRecord",
    "IterationTrace",
    "SolverState",
    "SolverFailure",
    "OracleError",
    "initial_state",
    "iterate_once",
    "run",
    "oracle_solution",
    "fejer_check",
    "FejerReport",
    "TRACE_COLUMNS",
]

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("n", "Df_xn_x1", "step_norm", "maxT_resid", "maxFB_resid",
                 "resA_resid", "oracle_gap", "ledger_size", "sweeps")

#: Half-width of the default base set C for geometries defined on all of R^d.
DEFAULT_BOX_RADIUS = 1e3
MAX_ETA_HALVINGS = 40


class SolverFailure(ArithmeticError):
    """A sub-step of the iteration failed; ``substep`` names which one."""

    def __init__(self, substep: str, cause: Exception):
        super().__init__(f"step ({substep}) failed: {cause}")
        self.substep = substep
        self.cause = cause


class OracleError(ValueError):
    pass


def _schedule_value(s, n: int) -> float:
    if np.ndim(s) == 0:
        return float(s)
    return float(s[min(n - 1, len(s) - 1)])


def _schedule_values(s) -> list:
    return [float(s)] if np.ndim(s) == 0 else [float(v) for v in s]


@dataclass(frozen=True)
class Schedules:
    """Parameter sequences; a constant or a finite sequence whose last entry repeats.

    ``a`` and ``c`` are the lower bounds on lambda_n and r_n and default to
    the smallest value emitted.  ``b`` is carried along but never used.
    """

    lambda_n: float | tuple = 0.5
    eta_n: float | tuple = 0.5
    r_n: float | tuple = 1.0
    a: float | None = None
    c: float | None = None
    b: float | None = None

    def __post_init__(self):
        for name in ("lambda_n", "eta_n", "r_n"):
            v = getattr(self, name)
            if np.ndim(v) != 0:
                v = tuple(float(t) for t in v)
                if not v:
                    raise ValueError(f"{name} schedule is empty")
                object.__setattr__(self, name, v)
            else:
                object.__setattr__(self, name, float(v))
        lams = _schedule_values(self.lambda_n)
        rs = _schedule_values(self.r_n)
        if self.a is None:
            object.__setattr__(self, "a", min(lams))
        if self.c is None:
            object.__setattr__(self, "c", min(rs))
        if not self.a > 0:
            raise ValueError(f"lambda lower bound a must be positive, got {self.a!r}")
        if not self.c > 0:
            raise ValueError(f"r lower bound c must be positive, got {self.c!r}")
        for v in lams:
            if not (self.a <= v < 1.0):
                raise ValueError(f"lambda_n = {v!r} violates 0 < a = {self.a!r} <= lambda_n < 1")
        for v in rs:
            if not (self.c <= v):
                raise ValueError(f"r_n = {v!r} violates 0 < c = {self.c!r} <= r_n")
        for v in _schedule_values(self.eta_n):
            if not v > 0:
                raise ValueError(f"eta_n = {v!r} must be positive")

    def lam(self, n: int) -> float:
        return _schedule_value(self.lambda_n, n)

    def eta(self, n: int) -> float:
        return _schedule_value(self.eta_n, n)

    def r(self, n: int) -> float:
        return _schedule_value(self.r_n, n)


@dataclass(frozen=True, eq=False)
class OmegaDescription:
    """Omega as a box intersected with affine inequalities and equalities."""

    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    ineq_normals: np.ndarray | None = None
    ineq_offsets: np.ndarray | None = None
    eq_normals: np.ndarray | None = None
    eq_offsets: np.ndarray | None = None

    def __post_init__(self):
        for name in ("lower", "upper", "ineq_offsets", "eq_offsets"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.atleast_1d(np.asarray(v, dtype=float)))
        for name in ("ineq_normals", "eq_normals"):
            v = getattr(self, name)
            if v is not None:
                object.__setattr__(self, name, np.atleast_2d(np.asarray(v, dtype=float)))
        if (self.lower is None) != (self.upper is None):
            raise ValueError("omega box needs both lower and upper")
        for nm, of in (("ineq", self.ineq_offsets), ("eq", self.eq_offsets)):
            normals = getattr(self, f"{nm}_normals")
            if (normals is None) != (of is None) or (
                    normals is not None and len(normals) != len(of)):
                raise ValueError(f"{nm} normals and offsets must match")

    @property
    def box(self):
        return None if self.lower is None else (self.lower, self.upper)

    def halfspaces(self) -> list:
        hs = []
        if self.ineq_normals is not None:
            hs += [fz.halfspace(a, b) for a, b in zip(self.ineq_normals, self.ineq_offsets)]
        if self.eq_normals is not None:
            for a, b in zip(self.eq_normals, self.eq_offsets):
                hs += [fz.halfspace(a, b), fz.halfspace(-a, -b)]
        return hs

    @property
    def is_whole_space(self) -> bool:
        return self.box is None and not self.halfspaces()


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    geometry: LegendreGeometry
    families: OperatorFamilies
    schedules: Schedules = field(default_factory=Schedules)
    x1: np.ndarray = None
    base_box: tuple | None = None
    witness: np.ndarray | None = None
    omega: OmegaDescription | None = None
    name: str = ""

    def __post_init__(self):
        g = self.geometry
        if self.families.dim != g.dim:
            raise ValueError("operators and geometry disagree on the dimension")
        object.__setattr__(self, "x1", g.check_domain(self.x1).copy())
        if self.base_box is not None:
            lo, hi = (np.asarray(v, dtype=float) for v in self.base_box)
            if lo.shape != (g.dim,) or hi.shape != (g.dim,) or np.any(lo > hi):
                raise ValueError("base box must have matching shape and lower <= upper")
            if np.any(self.x1 < lo) or np.any(self.x1 > hi):
                raise ValueError("x1 must lie in the base set C")
            object.__setattr__(self, "base_box", (lo, hi))
        if self.witness is None and self.families.witness is not None:
            object.__setattr__(self, "witness", self.families.witness)
        if self.witness is not None:
            w = g.check_domain(self.witness).copy()
            object.__setattr__(self, "witness", w)
            res = self.families.omega_residuals(g, w, self.schedules.eta(1))
            bad = {k: v for k, v in res.items() if v > 1e-8}
            if bad:
                raise ValueError(f"witness is not in Omega: residuals {bad}")
            if self.base_box is not None and (
                    np.any(w < self.base_box[0]) or np.any(w > self.base_box[1])):
                raise ValueError("witness lies outside the base set C")

    @property
    def dim(self) -> int:
        return self.geometry.dim

    def with_schedules(self, schedules: Schedules) -> "ProblemSpec":
        return ProblemSpec(self.geometry, self.families, schedules, self.x1,
                           self.base_box, self.witness, self.omega, self.name)


def default_base_box(g: LegendreGeometry, x1):
    """C defaults to a large box, or to the whole open orthant for entropy."""
    if g.kind is Kind.NEGATIVE_ENTROPY:
        return None
    r = max(DEFAULT_BOX_RADIUS, 10.0 * float(np.abs(x1).max()))
    return (-r * np.ones(g.dim), r * np.ones(g.dim))


@dataclass(frozen=True)
class StopRule:
    max_iter: int = 2000
    tol_step: float = 1e-8
    tol_sol: float | None = None

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol_step >= 0:
            raise ValueError("tol_step must be nonnegative")


@dataclass
class IterationRecord:
    n: int
    x: np.ndarray
    Df_xn_x1: float
    step_norm: float
    maxT_resid: float
    maxFB_resid: float
    resA_resid: float
    oracle_gap: float
    ledger_size: int
    sweeps: int
    witness_slack: float = -math.inf
    eta: float = math.nan

    def row(self) -> tuple:
        return (self.n, self.Df_xn_x1, self.step_norm, self.maxT_resid, self.maxFB_resid,
                self.resA_resid, self.oracle_gap, self.ledger_size, self.sweeps)


@dataclass
class IterationTrace:
    records: list = field(default_factory=list)
    final_point: np.ndarray | None = None
    status: str = "running"
    message: str = ""
    omega0: np.ndarray | None = None
    witness_bound: float | None = None

    def __len__(self):
        return len(self.records)

    @property
    def converged(self) -> bool:
        return self.status == "converged"

    @property
    def failed(self) -> bool:
        return self.status == "failed"

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records], dtype=float)

    def rows(self) -> list:
        return [r.row() for r in self.records]


@dataclass
class SolverState:
    n: int
    x: np.ndarray
    ledger: ConstraintLedger
    y: np.ndarray | None = None
    z: np.ndarray | None = None
    u: np.ndarray | None = None
    history: IterationTrace = field(default_factory=IterationTrace)
    multipliers: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eta_scale: float = 1.0


def initial_state(spec: ProblemSpec) -> SolverState:
    box = spec.base_box if spec.base_box is not None else default_base_box(spec.geometry, spec.x1)
    return SolverState(n=1, x=spec.x1.copy(), ledger=ConstraintLedger(base_box=box))


def _substep(name, fn, *args, **kw):
    try:
        return fn(*args, **kw)
    except (DomainViolation, GradientRangeError, ResolventError, ProjectionError) as exc:
        raise SolverFailure(name, exc) from exc


def _fb_average(spec: ProblemSpec, y, eta):
    g = spec.geometry
    fam = spec.families
    theta = np.zeros(g.dim)
    worst = 0.0
    for B, sigma in fam.bism:
        p = fb_step(g, fam.G, B, eta, y)
        g.check_domain(p)
        theta += sigma * g.gradient(p)
        worst = max(worst, float(np.linalg.norm(y - p)))
    return g.gradient_inverse(theta), worst


def iterate_once(spec: ProblemSpec, state: SolverState, omega0=None) -> SolverState:
    """Advance ``state`` from x_n to x_{n+1}; the state is updated in place."""
    g = spec.geometry
    fam = spec.families
    n = state.n
    x = state.x
    x1 = spec.x1
    lam = spec.schedules.lam(n)

    # (a) convex blend with each T_j in the dual, averaged with weights xi_j
    gx = g.gradient(x)
    theta = np.zeros(g.dim)
    max_t = 0.0
    for T, xi in fam.demimetric:
        tx = _substep("a", apply_mapping, g, T, x)
        _substep("a", g.check_domain, tx)
        theta += xi * ((1.0 - lam) * gx + lam * g.gradient(tx))
        max_t = max(max_t, float(np.linalg.norm(x - tx)))
    y = _substep("a", g.gradient_inverse, theta)
    _substep("a", g.check_domain, y)

    # (b) forward-backward steps, halving eta when the anti-resolvent leaves the domain
    eta = spec.schedules.eta(n) * state.eta_scale
    for _ in range(MAX_ETA_HALVINGS):
        try:
            z, max_fb = _fb_average(spec, y, eta)
            g.check_domain(z)
            break
        except (DomainViolation, GradientRangeError) as exc:
            log.warning("iteration %d: eta=%g left int dom f (%s); halving", n, eta, exc)
            eta *= 0.5
            state.eta_scale *= 0.5
    else:
        raise SolverFailure("b", DomainViolation(0, eta, g.kind))

    # (c) resolvent of A
    r = spec.schedules.r(n)
    u = _substep("c", resolvent, g, fam.A, r, z)
    _substep("c", g.check_domain, u)

    # (d) new cuts of C
    led = state.ledger
    led.add_c(fz.halfspace_from_bregman_comparison(g, y, x, n))
    led.add_c(fz.halfspace_from_bregman_comparison(g, z, y, n))
    led.add_c(fz.halfspace_from_resolvent_gap(g, z, u, n))

    # (e) project x1
    rep = _substep("e", fz.project_ledger, g, x1, led, multipliers=state.multipliers)
    x_next = rep.point
    _substep("e", g.check_domain, x_next)

    # (f) new cut of Q
    led.add_q(fz.halfspace_from_anchor(g, x_next, x1, n))
    state.multipliers = np.append(rep.dual_multipliers, 0.0)

    # (g) trace
    slack = -math.inf
    if spec.witness is not None:
        slack = fz.membership(spec.witness, led)[1]
    rec = IterationRecord(
        n=n, x=x.copy(), Df_xn_x1=g.bregman(x, x1),
        step_norm=float(np.linalg.norm(x_next - x)),
        maxT_resid=max_t, maxFB_resid=max_fb,
        resA_resid=float(np.linalg.norm(z - u)),
        oracle_gap=float(np.linalg.norm(x - omega0)) if omega0 is not None else math.nan,
        ledger_size=len(led), sweeps=rep.sweeps, witness_slack=slack, eta=eta)
    state.history.records.append(rec)
    state.y, state.z, state.u = y, z, u
    state.x = x_next
    state.n = n + 1
    return state


def run(spec: ProblemSpec, stop: StopRule = StopRule(), omega0=None) -> IterationTrace:
    """Iterate until the stop rule fires; failures are reported, not raised.

    ``omega0`` defaults to :func:`oracle_solution` when the problem describes
    Omega analytically.  With ``stop.tol_sol`` set, convergence also requires
    the final point within ``tol_sol`` of it.
    """
    if omega0 is None and spec.omega is not None:
        omega0 = oracle_solution(spec)
    state = initial_state(spec)
    trace = state.history
    trace.omega0 = None if omega0 is None else np.asarray(omega0, dtype=float)
    if spec.witness is not None:
        trace.witness_bound = spec.geometry.bregman(spec.witness, spec.x1)
    try:
        while True:
            iterate_once(spec, state, trace.omega0)
            rec = trace.records[-1]
            close = True
            if stop.tol_sol is not None and trace.omega0 is not None:
                close = float(np.linalg.norm(state.x - trace.omega0)) <= stop.tol_sol
            if rec.step_norm <= stop.tol_step and close:
                trace.status = "converged"
                trace.message = f"step {rec.step_norm:.3e} <= {stop.tol_step:g} at n={rec.n}"
                break
            if rec.n >= stop.max_iter:
                trace.status = "max_iter"
                trace.message = f"iteration cap {stop.max_iter} reached"
                break
    except SolverFailure as exc:
        trace.status = "failed"
        trace.message = str(exc)
        log.error("run %s failed at n=%d: %s", spec.name or "?", state.n, exc)
    trace.final_point = state.x.copy()
    return trace


def oracle_solution(spec: ProblemSpec) -> np.ndarray:
    """Bregman projection of x1 onto the analytically described Omega.

    Computed directly from the description, never from the iteration; for the
    squared norm it is cross-checked against active-set enumeration when the
    description has at most 16 constraints.
    """
    om = spec.omega
    if om is None:
        raise OracleError("problem has no analytic description of Omega")
    g = spec.geometry
    if om.is_whole_space:
        return spec.x1.copy()
    hs = om.halfspaces()
    rep = fz.project_polyhedron(g, spec.x1, hs, om.box, tol=1e-13, step_tol=1e-14,
                                max_sweeps=100000)
    if g.kind is Kind.SQUARED_NORM:
        all_hs = hs + (fz.box_halfspaces(*om.box) if om.box is not None else [])
        if len(all_hs) <= 16:
            A = np.array([h.a for h in all_hs])
            b = np.array([h.b for h in all_hs])
            ref = fz.active_set_projection(spec.x1, A, b)
            gap = float(np.abs(ref - rep.point).max())
            if gap > 1e-6:
                raise OracleError(f"projection oracles disagree by {gap:.3e}")
    return rep.point


@dataclass
class FejerReport:
    monotone: bool
    bounded: bool
    first_violation: int | None
    reason: str = ""

    @property
    def ok(self) -> bool:
        return self.monotone and self.bounded


def fejer_check(trace: IterationTrace | Sequence[float], bound: float | None = None,
                mono_tol: float = 1e-10, bound_tol: float = 1e-8) -> FejerReport:
    """Check that D_f(x_n, x1) is nondecreasing and bounded by D_f(witness, x1).

    Accepts a trace or the raw sequence of distances.  The first offending
    iteration number is reported (1-based, as in the trace).
    """
    if isinstance(trace, IterationTrace):
        if not trace.records:
            raise ValueError("empty trace")
        D = trace.column("Df_xn_x1")
        ns = [r.n for r in trace.records]
        if bound is None:
            bound = trace.witness_bound
    else:
        D = np.asarray(trace, dtype=float)
        if D.size == 0:
            raise ValueError("empty trace")
        ns = list(range(1, len(D) + 1))
    first = None
    reason = ""
    drops = np.flatnonzero(np.diff(D) < -mono_tol)
    monotone = drops.size == 0
    if not monotone:
        first = ns[int(drops[0]) + 1]
        reason = f"D_f(x_n, x1) decreases at n={first}"
    bounded = True
    if bound is not None:
        over = np.flatnonzero(D > bound + bound_tol)
        if over.size:
            bounded = False
            n_over = ns[int(over[0])]
            if first is None or n_over < first:
                first = n_over
                reason = f"D_f(x_n, x1) exceeds the witness bound at n={n_over}"
    return FejerReport(monotone, bounded, first, reason)
