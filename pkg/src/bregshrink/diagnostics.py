"""Seeded property suites with machine-readable reports.

Every check reduces to a residual compared against a fixed bound: a case
passes when ``residual <= bound``.  A case is a pure function of
``(seed, index)``; the per-case seed recorded in the report replays it
through :func:`case_rng`.
"""

from __future__ import annotations

import csv
import hashlib
import io
import math
import time
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import feasibility as fz
from .geometry import Kind, LegendreGeometry, negative_entropy, pnorm, squared_norm
from .operators import (DemimetricMappingSpec, MappingKind, OperatorFamilies,
                        anti_resolvent, apply_mapping, default_families, demimetric_gap,
                        fb_step, resolvent, resolvent_residual)
from .solver import ProblemSpec, StopRule, oracle_solution, run

__all__ = [
    "CSV_HEADER", "COVERAGE", "Failure", "SuiteReport", "ConvergenceCase",
    "case_seed", "case_rng", "CorruptedGeometry", "misdeclared_families",
    "run_identity_suite", "run_operator_suite", "run_projection_suite",
    "run_convergence_suite", "bundled_cases", "write_report", "write_coverage",
]

CSV_HEADER = ("suite", "case", "seed", "residual", "bound", "pass")

# check name -> (module, invariant); every bound lives in exactly one suite
COVERAGE = {
    "three_point": ("geometry", "three-point identity", "identity"),
    "four_point": ("geometry", "four-point identity", "identity"),
    "conjugacy": ("geometry", "conjugacy round trip", "identity"),
    "nonnegativity": ("geometry", "D_f >= 0", "identity"),
    "dual_average": ("geometry", "averaging inequality for dual_average", "identity"),
    "fd_gradient": ("geometry", "finite-difference gradient", "identity"),
    "seq_consistency": ("geometry", "sequential consistency spot-check", "identity"),
    "resolvent_residual": ("operators", "resolvent residual", "operator"),
    "resolvent_ineq": ("operators", "resolvent three-distance inequality", "operator"),
    "fb_ineq": ("operators", "forward-backward three-distance inequality", "operator"),
    "bism": ("operators", "BISM defining inequality", "operator"),
    "demimetric": ("operators", "demimetric gap for declared k", "operator"),
    "qne": ("operators", "quasi-nonexpansive for k <= 0", "operator"),
    "qne_zero_demimetric": ("operators", "quasi-nonexpansive implies 0-demimetric", "operator"),
    "oracle_match": ("feasibility", "projection matches enumeration oracle", "projection"),
    "variational": ("feasibility", "variational characterization of the projection",
                    "projection"),
    "three_distance": ("feasibility", "projection three-distance inequality", "projection"),
    "idempotence": ("feasibility", "idempotence", "projection"),
    "optimality": ("feasibility", "optimality by perturbation", "projection"),
    "halfspace_equiv": ("feasibility", "comparison halfspace equivalence", "projection"),
    "converged": ("solver", "run terminates by the step rule", "convergence"),
    "iterations": ("solver", "iteration budget", "convergence"),
    "monotone": ("solver", "D_f(x_n, x1) nondecreasing", "convergence"),
    "bounded": ("solver", "D_f(x_n, x1) bounded by the witness", "convergence"),
    "witness_slack": ("solver", "witness containment", "convergence"),
    "nested": ("feasibility", "ledger nestedness", "convergence"),
    "T_resid": ("solver", "fixed-point residual decay", "convergence"),
    "FB_resid": ("solver", "forward-backward residual decay", "convergence"),
    "A_resid": ("solver", "resolvent gap decay", "convergence"),
    "step": ("solver", "vanishing steps", "convergence"),
    "oracle_gap": ("solver", "strong convergence to the oracle", "convergence"),
}


def case_seed(seed: int, index: int) -> int:
    """The per-case seed derived from a suite seed and a case index."""
    return int(np.random.SeedSequence([int(seed), int(index)]).generate_state(1, np.uint64)[0])


def case_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.default_rng(case_seed(seed, index))


def _digest(*arrays) -> str:
    h = hashlib.sha1()
    for a in arrays:
        h.update(np.ascontiguousarray(np.asarray(a, dtype=float)).tobytes())
    return h.hexdigest()[:12]


@dataclass(frozen=True)
class Failure:
    case: str
    seed: int
    digest: str
    residual: float
    bound: float


@dataclass
class SuiteReport:
    """Outcome of one suite; ``failures`` is empty exactly when it passed."""

    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    wall_time: float = 0.0
    rows: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.failures

    def record(self, case: str, seed: int, residual: float, bound: float, inputs=()):
        residual = float(residual)
        ok = math.isfinite(residual) and residual <= bound
        self.cases += 1
        self.rows.append((self.name, case, seed, residual, bound, ok))
        if not ok:
            self.failures.append(Failure(case, seed, _digest(*inputs), residual, bound))
        return ok

    def merge(self, other: "SuiteReport") -> "SuiteReport":
        self.cases += other.cases
        self.failures += other.failures
        self.rows += other.rows
        self.wall_time += other.wall_time
        return self

    def worst(self, check: str) -> float:
        """Largest residual among cases whose name starts with ``check``."""
        vals = [r[3] for r in self.rows if r[1].split("[")[0] == check]
        return max(vals) if vals else -math.inf

    def checks(self) -> dict:
        """check name -> (cases, failures)."""
        out: dict = {}
        for r in self.rows:
            key = r[1].split("[")[0]
            n, f = out.get(key, (0, 0))
            out[key] = (n + 1, f + (not r[5]))
        return out

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{status} {self.name}: {self.cases} cases, {len(self.failures)} failures, "
                f"{self.wall_time:.2f}s")


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return str(v)


def write_report(reports: Iterable[SuiteReport], stream) -> None:
    """CSV lines ``suite,case,seed,residual,bound,pass``; wall time is left out
    so identical seeds give byte-identical output."""
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        for row in rep.rows:
            w.writerow([_fmt(v) for v in row])


def write_coverage(reports: Iterable[SuiteReport], stream) -> None:
    """Coverage map: which suite exercised each module invariant."""
    seen: dict = {}
    for rep in reports:
        for check, (n, f) in rep.checks().items():
            n0, f0 = seen.get(check, (0, 0))
            seen[check] = (n0 + n, f0 + f)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("check", "module", "invariant", "suite", "cases", "failures"))
    for check, (module, inv, suite) in COVERAGE.items():
        n, f = seen.get(check, (0, 0))
        w.writerow((check, module, inv, suite, n, f))


def report_csv(reports: Sequence[SuiteReport]) -> str:
    buf = io.StringIO()
    write_report(reports, buf)
    return buf.getvalue()


def _run_case(rep: SuiteReport, case: str, seed: int, bound: float, fn: Callable, *inputs):
    try:
        res = fn()
    except (ArithmeticError, ValueError) as exc:
        # an exception inside a check is a failure, not a crash
        res = math.inf
        rep.failures.append(Failure(f"{case}!{type(exc).__name__}", seed, _digest(*inputs),
                                    math.inf, bound))
        rep.cases += 1
        rep.rows.append((rep.name, case, seed, math.inf, bound, False))
        return False
    if res is None:
        return True
    return rep.record(case, seed, res, bound, inputs)


# -- geometry -----------------------------------------------------------------

@dataclass(frozen=True)
class CorruptedGeometry(LegendreGeometry):
    """Negative control: the gradient is off by a relative ``error``."""

    error: float = 1e-3

    def gradient(self, x):
        return super().gradient(x) * (1.0 + self.error) + self.error


def _sample(g: LegendreGeometry, rng, n=None):
    lo, hi = g.sampling_box()
    shape = (g.dim,) if n is None else (n, g.dim)
    return rng.uniform(lo, hi, shape)


def _fd_gradient(g: LegendreGeometry, x):
    out = np.empty_like(x)
    for i in range(len(x)):
        h = 1e-5 * max(1.0, abs(x[i]))
        if g.kind is Kind.NEGATIVE_ENTROPY:
            h = min(h, 0.5 * x[i])
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (g.value(x + e) - g.value(x - e)) / (2.0 * h)
    return out


def run_identity_suite(g: LegendreGeometry, samples: int, seed: int,
                       corrupt_gradient: bool = False) -> SuiteReport:
    """Three- and four-point identities, conjugacy, the dual averaging
    inequality, finite-difference gradients and sequential consistency.

    Identity residuals are relative: ``|lhs - rhs| / (1 + sum of |terms|)``
    against 1e-9.  The finite-difference residual is relative to
    ``1 + |grad f(x)|`` against 1e-6.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    if corrupt_gradient:
        g = CorruptedGeometry(g.kind, g.dim, g.p)
    name = f"identity:{g.kind.value}" + (":corrupted" if corrupt_gradient else "")
    rep = SuiteReport(name)
    t0 = time.perf_counter()
    D = g.bregman
    for i in range(samples):
        s = case_seed(seed, i)
        rng = np.random.default_rng(s)
        x, y, z, w = _sample(g, rng, 4)

        def three():
            lhs = D(x, y) + D(y, z) - D(x, z)
            rhs = float((x - y) @ (g.gradient(z) - g.gradient(y)))
            return abs(lhs - rhs) / (1 + abs(D(x, y)) + abs(D(y, z)) + abs(D(x, z)) + abs(rhs))

        def four():
            lhs = D(x, y) - D(x, w) - D(z, y) + D(z, w)
            rhs = float((x - z) @ (g.gradient(w) - g.gradient(y)))
            mag = abs(D(x, y)) + abs(D(x, w)) + abs(D(z, y)) + abs(D(z, w)) + abs(rhs)
            return abs(lhs - rhs) / (1 + mag)

        def conj():
            gx = g.gradient(x)
            rt = float(np.linalg.norm(g.gradient_inverse(gx) - x)) / (1 + np.linalg.norm(x))
            fy = g.value(x) + g.conjugate(gx) - float(x @ gx)
            return max(rt, abs(fy) / (1 + abs(g.value(x)) + abs(g.conjugate(gx))))

        def nonneg():
            return -min(D(x, y), D(y, x), D(x, x))

        def avg():
            k = int(rng.integers(2, 5))
            pts = _sample(g, rng, k)
            t = rng.dirichlet(np.ones(k))
            t = t / t.sum()
            lhs = D(z, g.dual_average(t, list(pts)))
            rhs = sum(ti * D(z, p) for ti, p in zip(t, pts))
            return (lhs - rhs) / (1 + abs(rhs))

        def fd():
            gr = g.gradient(x)
            return float(np.max(np.abs(_fd_gradient(g, x) - gr) / (1 + np.abs(gr))))

        def seq():
            u = rng.normal(size=g.dim)
            u /= np.linalg.norm(u)
            step = 10.0 ** rng.uniform(-6, -1)
            yy = x + step * u
            if not g.in_interior(yy):
                return 0.0
            return float(np.linalg.norm(yy - x)) if D(yy, x) <= 1e-8 else 0.0

        _run_case(rep, f"three_point[{i}]", s, 1e-9, three, x, y, z)
        _run_case(rep, f"four_point[{i}]", s, 1e-9, four, x, y, z, w)
        _run_case(rep, f"conjugacy[{i}]", s, 1e-10, conj, x)
        _run_case(rep, f"nonnegativity[{i}]", s, 1e-12, nonneg, x, y)
        _run_case(rep, f"dual_average[{i}]", s, 1e-9, avg, z)
        _run_case(rep, f"fd_gradient[{i}]", s, 1e-6, fd, x)
        _run_case(rep, f"seq_consistency[{i}]", s, 1e-3, seq, x)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- operators ----------------------------------------------------------------

def misdeclared_families(dim: int = 3) -> OperatorFamilies:
    """Negative control: x -> -x/2 declared (-0.9)-demimetric, below its true -1/3."""
    L = -0.5 * np.eye(dim)
    T = DemimetricMappingSpec.strict_pseudo_contraction(L, center=np.zeros(dim), k=-0.9,
                                                        validate=False)
    base = default_families(squared_norm(dim))
    return OperatorFamilies(demimetric=[(T, 1.0)], bism=base.bism, A=base.A, G=base.G,
                            witness=base.witness)


def _resolvent_ops(families: OperatorFamilies):
    ops = [("A", families.A, 1.0), ("G", families.G, 1.0)]
    for j, T in enumerate(families.mappings):
        if T.kind is MappingKind.RESOLVENT:
            ops.append((f"T{j}", T.operator, T.lam))
    return ops


def run_operator_suite(g: LegendreGeometry, families: OperatorFamilies, samples: int,
                       seed: int, eta: float = 0.5, name: str | None = None) -> SuiteReport:
    """Resolvent residuals and inequalities, demimetric gaps, quasi-nonexpansiveness
    and the BISM inequality on seeded samples.

    Bounds: resolvent residual 1e-10; every inequality 1e-9 absolute.
    """
    if samples < 1:
        raise ValueError("samples must be at least 1")
    rep = SuiteReport(name or f"operator:{g.kind.value}")
    t0 = time.perf_counter()
    D = g.bregman
    witness = families.witness
    ops = _resolvent_ops(families)
    for i in range(samples):
        s = case_seed(seed, i)
        rng = np.random.default_rng(s)
        x, y = _sample(g, rng, 2)
        lam = float(rng.uniform(0.1, 2.0))

        for label, A, lam0 in ops:
            _run_case(rep, f"resolvent_residual[{i}:{label}]", s, 1e-10,
                      lambda A=A: resolvent_residual(g, A, lam * lam0, x), x)

            def prop(A=A):
                q = A.sample_zero(g, rng)
                if q is None:
                    return None
                u = resolvent(g, A, lam * lam0, x)
                return D(q, u) + D(u, x) - D(q, x)

            _run_case(rep, f"resolvent_ineq[{i}:{label}]", s, 1e-9, prop, x)

        for b, B in enumerate(families.bisms):
            def fb(B=B):
                us = [witness] if witness is not None else []
                if B.kind.value == "zero":
                    q = families.G.sample_zero(g, rng)
                    if q is not None:
                        us.append(q)
                if not us:
                    return None
                v = fb_step(g, families.G, B, eta, x)
                return max(D(u, v) + D(v, x) - D(u, x) for u in us)

            def bism(B=B):
                bx = anti_resolvent(g, B, eta, x)
                by = anti_resolvent(g, B, eta, y)
                return -float((eta * (B(x) - B(y))) @ (bx - by))

            _run_case(rep, f"fb_ineq[{i}:B{b}]", s, 1e-9, fb, x)
            _run_case(rep, f"bism[{i}:B{b}]", s, 1e-9, bism, x, y)

        for j, T in enumerate(families.mappings):
            q = T.fixed_point_witness
            if q is None:
                q = x if T.kind is MappingKind.IDENTITY else None
            if q is None:
                continue
            _run_case(rep, f"demimetric[{i}:T{j}]", s, 1e-9,
                      lambda T=T, q=q: -demimetric_gap(g, T, x, q), x, q)
            if T.k <= 0:
                _run_case(rep, f"qne[{i}:T{j}]", s, 1e-9,
                          lambda T=T, q=q: D(q, apply_mapping(g, T, x)) - D(q, x), x, q)
                _run_case(rep, f"qne_zero_demimetric[{i}:T{j}]", s, 1e-9,
                          lambda T=T, q=q: -demimetric_gap(g, T, x, q, k=0.0), x, q)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- feasibility --------------------------------------------------------------

def _random_polyhedron(rng, d: int, m: int):
    """Halfspaces ``A z <= b`` around a random interior center."""
    A = rng.normal(size=(m, d))
    c = rng.uniform(-2.0, 2.0, d)
    b = A @ c + rng.uniform(0.1, 1.5, m)
    return A, b, c


def _feasible_points(rng, A, b, c, z, n: int):
    """Points of ``{A y <= b}`` from ray shooting out of ``c`` and segments to ``z``."""
    u = rng.normal(size=(n, A.shape[1]))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    Au = u @ A.T
    slack = b - A @ c
    with np.errstate(divide="ignore"):
        t = np.where(Au > 0, slack[None, :] / Au, np.inf).min(axis=1)
    t = np.minimum(t, 20.0) * rng.uniform(0, 1, n)
    pts = c + t[:, None] * u
    half = n // 2
    s = rng.uniform(0, 1, half)[:, None]
    pts[:half] = s * pts[:half] + (1 - s) * z
    return pts


def run_projection_suite(instances: int, seed: int, points: int = 1000,
                         g: LegendreGeometry | None = None) -> SuiteReport:
    """Random polyhedra of dimension <= 6 with <= 8 halfspaces.

    For the squared norm the projector is compared with the enumeration
    oracle (bound 1e-6); for every geometry the variational and
    three-distance inequalities are checked against ``points`` sampled
    feasible points (bound 1e-8), plus idempotence (1e-10) and
    optimality by perturbation (1e-8).  The comparison-halfspace
    equivalence is checked on the same samples (boundary band 1e-9).
    """
    if instances < 1:
        raise ValueError("instances must be at least 1")
    kind = (g.kind if g is not None else Kind.SQUARED_NORM)
    rep = SuiteReport(f"projection:{kind.value}")
    t0 = time.perf_counter()
    for i in range(instances):
        s = case_seed(seed, i)
        rng = np.random.default_rng(s)
        d = int(rng.integers(1, 7))
        m = int(rng.integers(1, 9))
        gi = squared_norm(d) if g is None else replace(g, dim=d)
        A, b, c = _random_polyhedron(rng, d, m)
        if gi.kind is Kind.NEGATIVE_ENTROPY:
            c = np.abs(c) + 0.5
            b = A @ c + rng.uniform(0.1, 1.5, m)
        x1 = _sample(gi, rng) * 0.5
        hs = [fz.halfspace(A[k], b[k]) for k in range(m)]
        box = (np.full(d, 1e-9), np.full(d, 1e6)) if gi.kind is Kind.NEGATIVE_ENTROPY else None
        try:
            z = fz.project_polyhedron(gi, x1, hs, box).point
        except (ArithmeticError, ValueError):
            rep.record(f"oracle_match[{i}]", s, math.inf, 1e-6, (x1, A, b))
            continue
        if gi.kind is Kind.SQUARED_NORM:
            _run_case(rep, f"oracle_match[{i}]", s, 1e-6,
                      lambda: float(np.max(np.abs(z - fz.active_set_projection(x1, A, b)))),
                      x1, A, b)
        Y = _feasible_points(rng, A, b, c, z, points)
        if box is not None:
            Y = Y[np.all(Y > 0, axis=1)]
        gz = gi.gradient(z)
        gx = gi.gradient(x1)
        Dzx = gi.bregman(z, x1)
        Dy = np.array([gi.bregman(y, x1) for y in Y])
        Dyz = np.array([gi.bregman(y, z) for y in Y])
        _run_case(rep, f"variational[{i}]", s, 1e-8,
                  lambda: float(np.max(-((z - Y) @ (gx - gz)))), x1, A, b)
        _run_case(rep, f"three_distance[{i}]", s, 1e-8,
                  lambda: float(np.max(Dyz + Dzx - Dy)), x1, A, b)
        _run_case(rep, f"optimality[{i}]", s, 1e-8, lambda: float(np.max(Dzx - Dy)), x1, A, b)
        _run_case(rep, f"idempotence[{i}]", s, 1e-10,
                  lambda: float(np.linalg.norm(fz.project_polyhedron(gi, z, hs, box).point - z)),
                  x1, A, b)

        # comparison halfspace {D(z, p) <= D(z, q)} against its affine form
        p, q = _sample(gi, rng, 2)
        h = fz.halfspace_from_bregman_comparison(gi, p, q, 0)
        samp = _sample(gi, rng, points)

        def equiv():
            bad = 0
            for w in samp:
                diff = gi.bregman(w, p) - gi.bregman(w, q)
                if abs(diff) <= 1e-9 * (1 + gi.bregman(w, q)):
                    continue
                bad += (h.slack(w) <= 0) != (diff <= 0)
            return float(bad)

        _run_case(rep, f"halfspace_equiv[{i}]", s, 0.0, equiv, p, q)
    rep.wall_time = time.perf_counter() - t0
    return rep


# -- solver -------------------------------------------------------------------

@dataclass(frozen=True)
class ConvergenceCase:
    """A bundled problem with its iteration budget and oracle tolerance."""

    name: str
    build: Callable[[], ProblemSpec]
    max_iter: int = 2000
    tol_sol: float = 1e-5
    tol_step: float = 1e-8


def bundled_cases() -> list:
    from .problems import entropy_d3, hilbert_d5, identity_problem, projection_1d
    return [
        ConvergenceCase("identity", identity_problem, max_iter=1),
        ConvergenceCase("projection_1d", projection_1d, max_iter=1000, tol_sol=1e-6),
        ConvergenceCase("hilbert_d5", hilbert_d5, max_iter=500, tol_sol=1e-5),
        ConvergenceCase("entropy_d3", entropy_d3, max_iter=1000, tol_sol=1e-4),
    ]


def run_convergence_suite(cases: Sequence[ConvergenceCase] | None = None, seed: int = 0,
                          traces: dict | None = None) -> SuiteReport:
    """Run each problem and check the solver invariants plus the oracle gap.

    The solver is deterministic; ``seed`` only labels the rows.  When
    ``traces`` is a dict it receives each run's trace under the case name.
    """
    cases = bundled_cases() if cases is None else cases
    rep = SuiteReport("convergence")
    t0 = time.perf_counter()
    for idx, case in enumerate(cases):
        s = case_seed(seed, idx)
        spec = case.build()
        omega0 = oracle_solution(spec) if spec.omega is not None else None
        t1 = time.perf_counter()
        tr = run(spec, StopRule(max_iter=case.max_iter, tol_step=case.tol_step), omega0)
        elapsed = time.perf_counter() - t1
        if traces is not None:
            traces[case.name] = (tr, elapsed)
        tag = case.name
        rep.record(f"converged[{tag}]", s, 0.0 if tr.converged else 1.0, 0.0)
        rep.record(f"iterations[{tag}]", s, float(len(tr)), float(case.max_iter))
        D = tr.column("Df_xn_x1")
        drops = D[:-1] - D[1:] if len(D) > 1 else np.zeros(1)
        rep.record(f"monotone[{tag}]", s, float(np.max(drops, initial=0.0)), 1e-10)
        if spec.witness is not None:
            bound = spec.geometry.bregman(spec.witness, spec.x1)
            rep.record(f"bounded[{tag}]", s, float(np.max(D) - bound), 1e-8)
            rep.record(f"witness_slack[{tag}]", s,
                       max(r.witness_slack for r in tr.records), 1e-9)
        sizes = tr.column("ledger_size")
        rep.record(f"nested[{tag}]", s,
                   float(np.sum(np.diff(sizes) < 0)) if len(sizes) > 1 else 0.0, 0.0)
        last = tr.records[-1] if tr.records else None
        if last is not None:
            rep.record(f"T_resid[{tag}]", s, last.maxT_resid, 1e-5)
            rep.record(f"FB_resid[{tag}]", s, last.maxFB_resid, 1e-5)
            rep.record(f"A_resid[{tag}]", s, last.resA_resid, 1e-5)
            rep.record(f"step[{tag}]", s, last.step_norm, 1e-6)
        if omega0 is not None:
            rep.record(f"oracle_gap[{tag}]", s,
                       float(np.linalg.norm(tr.final_point - omega0)), case.tol_sol)
    rep.wall_time = time.perf_counter() - t0
    return rep


def suite_geometries(dim: int = 4, p: float = 1.5) -> list:
    return [squared_norm(dim), negative_entropy(dim), pnorm(dim, p)]
