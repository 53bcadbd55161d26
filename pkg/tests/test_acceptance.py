"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run with pytest (the lines appear in the terminal summary) or directly as
``python3 tests/test_acceptance.py``.
"""

import time

import numpy as np
import pytest

from bregshrink import diagnostics as dg
from bregshrink.geometry import Kind
from bregshrink.operators import apply_mapping, default_families
from bregshrink.problems import entropy_d3, hilbert_d5
from bregshrink.solver import StopRule, fejer_check, oracle_solution, run

LINES = {}


def report(number, title, ok, detail, elapsed):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({detail}; {elapsed:.2f}s)"
    LINES[number] = line
    print(line)
    return ok


_RUNS = {}


def acceptance_runs():
    """The two end-to-end runs, computed once: name -> (spec, trace, omega0, seconds)."""
    if not _RUNS:
        for build, max_iter in ((hilbert_d5, 500), (entropy_d3, 1000)):
            t0 = time.perf_counter()
            spec = build()
            omega0 = oracle_solution(spec)
            tr = run(spec, StopRule(max_iter=max_iter), omega0)
            _RUNS[spec.name] = (spec, tr, omega0, time.perf_counter() - t0)
    return _RUNS


# -- criteria ------------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    reps = [dg.run_identity_suite(g, 1000, seed=0) for g in dg.suite_geometries()]
    elapsed = time.perf_counter() - t0
    fails = sum(len(r.failures) for r in reps)
    ident = max(max(r.worst(c) for c in ("three_point", "four_point", "dual_average"))
                for r in reps)
    fd = max(r.worst("fd_gradient") for r in reps)
    ok = fails == 0 and elapsed < 5.0
    return report(1, "identity suites, 3 geometries x 1000 samples", ok,
                  f"{fails} failures, worst identity {ident:.1e}, worst FD {fd:.1e}", elapsed)


def criterion_2():
    t0 = time.perf_counter()
    rep = dg.run_projection_suite(100, seed=0, points=1000)
    elapsed = time.perf_counter() - t0
    gap = rep.worst("oracle_match")
    vi = max(rep.worst("variational"), rep.worst("three_distance"))
    ok = rep.passed and gap <= 1e-6 and vi <= 1e-8 and elapsed < 30.0
    return report(2, "projection vs enumeration oracle, 100 polyhedra", ok,
                  f"oracle gap {gap:.1e}, worst inequality residual {vi:.1e}", elapsed)


def criterion_3():
    spec, tr, omega0, elapsed = acceptance_runs()["hilbert_d5"]
    gap = float(np.linalg.norm(tr.final_point - omega0))
    ok = tr.converged and len(tr) <= 500 and gap <= 1e-5 and elapsed < 10.0
    return report(3, "Hilbert case d=5", ok,
                  f"{len(tr)} iterations, |x_N - omega0| = {gap:.1e}", elapsed)


def criterion_4():
    spec, tr, omega0, elapsed = acceptance_runs()["entropy_d3"]
    gap = float(np.linalg.norm(tr.final_point - omega0))
    ok = len(tr) <= 1000 and gap <= 1e-4 and elapsed < 10.0
    return report(4, "entropy geometry d=3", ok,
                  f"{len(tr)} iterations, |x_N - omega0| = {gap:.1e}", elapsed)


def criterion_5():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, (spec, tr, _, _) in acceptance_runs().items():
        fj = fejer_check(tr, bound=spec.geometry.bregman(spec.witness, spec.x1))
        D = tr.column("Df_xn_x1")
        drop = float(np.max(D[:-1] - D[1:], initial=0.0))
        ok &= fj.ok
        parts.append(f"{name}: largest drop {drop:.1e}")
    return report(5, "monotone and bounded D_f(x_n, x1)", ok, ", ".join(parts),
                  time.perf_counter() - t0)


def criterion_6():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, (_, tr, _, _) in acceptance_runs().items():
        slack = max(r.witness_slack for r in tr.records)
        ok &= slack <= 1e-9
        parts.append(f"{name}: max slack {slack:.1e}")
    return report(6, "witness containment", ok, ", ".join(parts), time.perf_counter() - t0)


def criterion_7():
    t0 = time.perf_counter()
    parts, ok = [], True
    for name, (_, tr, _, _) in acceptance_runs().items():
        r = tr.records[-1]
        worst = max(r.maxT_resid, r.maxFB_resid, r.resA_resid)
        ok &= worst <= 1e-5 and r.step_norm <= 1e-6
        parts.append(f"{name}: residual {worst:.1e}, step {r.step_norm:.1e}")
    return report(7, "residual decay at termination", ok, ", ".join(parts),
                  time.perf_counter() - t0)


def criterion_8():
    t0 = time.perf_counter()
    worst, maps, bad = -np.inf, 0, 0
    for g in dg.suite_geometries():
        for j, T in enumerate(default_families(g).mappings):
            if T.k > 0:
                continue
            maps += 1
            q = T.fixed_point_witness
            for i in range(1000):
                rng = dg.case_rng(j, i)
                lo, hi = g.sampling_box()
                x = rng.uniform(lo, hi, g.dim)
                r = g.bregman(q, apply_mapping(g, T, x)) - g.bregman(q, x)
                worst = max(worst, r)
                bad += r > 1e-9
    return report(8, "quasi-nonexpansive for k <= 0", bad == 0,
                  f"{maps} mappings x 1000 samples, {bad} violations, worst {worst:.1e}",
                  time.perf_counter() - t0)


def criterion_9():
    t0 = time.perf_counter()
    corrupted = [dg.run_identity_suite(g, 200, seed=0, corrupt_gradient=True)
                 for g in dg.suite_geometries()]
    misdeclared = dg.run_operator_suite(dg.squared_norm(3), dg.misdeclared_families(3), 200,
                                        seed=0)
    caught = [not r.passed for r in corrupted] + [not misdeclared.passed]
    n_fail = sum(len(r.failures) for r in corrupted + [misdeclared])
    return report(9, "negative controls fail", all(caught),
                  f"{sum(caught)}/{len(caught)} controls caught, {n_fail} failures",
                  time.perf_counter() - t0)


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
            criterion_7, criterion_8, criterion_9]


@pytest.mark.parametrize("criterion", CRITERIA, ids=lambda f: f.__name__)
def test_acceptance(criterion):
    assert criterion(), LINES.get(int(criterion.__name__.split("_")[1]))


def test_entropy_oracle_is_the_rescaling():
    spec = entropy_d3()
    assert spec.geometry.kind is Kind.NEGATIVE_ENTROPY
    np.testing.assert_allclose(oracle_solution(spec), 0.6 * spec.x1, atol=1e-12)


if __name__ == "__main__":
    results = [c() for c in CRITERIA]
    raise SystemExit(0 if all(results) else 1)
