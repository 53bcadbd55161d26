import numpy as np
import pytest

from bregshrink import feasibility as fz
from bregshrink import solver
from bregshrink.geometry import negative_entropy, squared_norm
from bregshrink.operators import (BismOperatorSpec, DemimetricMappingSpec, MonotoneOperatorSpec,
                                  OperatorFamilies)
from bregshrink.problems import entropy_d3, hilbert_d5, identity_problem, projection_1d
from bregshrink.solver import (TRACE_COLUMNS, IterationTrace, OmegaDescription, OracleError,
                               ProblemSpec, Schedules, SolverFailure, StopRule, fejer_check,
                               initial_state, iterate_once, oracle_solution, run)


@pytest.fixture(scope="module")
def hilbert_trace():
    return run(hilbert_d5(), StopRule(max_iter=500))


# one step by hand ------------------------------------------------------------------

def test_first_step_of_the_projection_problem():
    spec = projection_1d()
    state = iterate_once(spec, initial_state(spec))
    assert state.y[0] == pytest.approx(0.5)
    assert state.z[0] == pytest.approx(0.5)
    assert state.u[0] == pytest.approx(0.5)
    assert state.x[0] == pytest.approx(0.75, abs=1e-12)
    # the comparison cut from (y1, x1) is {z <= 0.75}; the others are full space
    cuts = [h for h in state.ledger.c_constraints if not h.is_degenerate]
    assert len(cuts) == 1
    assert cuts[0].b / cuts[0].a[0] == pytest.approx(0.75, abs=1e-12)
    assert cuts[0].contains([0.75]) and not cuts[0].contains([0.75 + 1e-9])


def test_witness_stays_in_every_generation():
    spec = projection_1d()
    state = initial_state(spec)
    for _ in range(30):
        iterate_once(spec, state)
        assert fz.membership([0.0], state.ledger)[0]


def test_identity_problem_stops_at_once():
    spec = identity_problem()
    tr = run(spec)
    assert tr.converged and len(tr) == 1
    np.testing.assert_array_equal(tr.final_point, spec.x1)


# full runs --------------------------------------------------------------------------

def test_projection_problem_reaches_zero():
    tr = run(projection_1d(), StopRule(max_iter=1000, tol_step=1e-8))
    assert tr.converged
    assert abs(tr.final_point[0]) <= 1e-6
    D = tr.column("Df_xn_x1")
    assert D[0] == 0.0
    assert D[1] == pytest.approx(0.03125)
    assert fejer_check(tr).ok


def test_hilbert_problem_reaches_the_oracle(hilbert_trace):
    tr = hilbert_trace
    assert tr.converged and len(tr) <= 500
    assert np.linalg.norm(tr.final_point - tr.omega0) <= 1e-5
    assert max(r.witness_slack for r in tr.records) <= 1e-9
    assert fejer_check(tr).ok


def test_entropy_problem_reaches_the_rescaling():
    tr = run(entropy_d3(), StopRule(max_iter=1000))
    np.testing.assert_allclose(tr.omega0, [1.2, 1.8, 3.0], atol=1e-10)
    assert np.linalg.norm(tr.final_point - tr.omega0) <= 1e-4
    assert fejer_check(tr).ok


def test_tol_sol_gates_convergence():
    tr = run(projection_1d(), StopRule(max_iter=5, tol_step=1.0, tol_sol=1e-12))
    assert tr.status == "max_iter" and len(tr) == 5


def test_trace_rows_follow_the_frozen_columns(hilbert_trace):
    assert TRACE_COLUMNS == ("n", "Df_xn_x1", "step_norm", "maxT_resid", "maxFB_resid",
                             "resA_resid", "oracle_gap", "ledger_size", "sweeps")
    rows = hilbert_trace.rows()
    assert all(len(r) == len(TRACE_COLUMNS) for r in rows)
    assert [r[0] for r in rows] == list(range(1, len(rows) + 1))
    sizes = hilbert_trace.column("ledger_size")
    assert np.all(np.diff(sizes) == 4)


def test_failures_are_reported_not_raised(monkeypatch):
    # a cut that misses the positive orthant makes step (e) fail
    spec = entropy_d3()
    fresh = solver.initial_state

    def poisoned(sp):
        state = fresh(sp)
        state.ledger.add_c(fz.halfspace(np.ones(3), -1.0))
        return state

    with pytest.raises(SolverFailure, match=r"step \(e\)"):
        iterate_once(spec, poisoned(spec))
    monkeypatch.setattr(solver, "initial_state", poisoned)
    tr = run(spec, StopRule(max_iter=3))
    assert tr.failed and len(tr) == 0
    np.testing.assert_array_equal(tr.final_point, spec.x1)


# oracle ---------------------------------------------------------------------------

def _trivial_families(d):
    return OperatorFamilies(demimetric=[(DemimetricMappingSpec.identity(d), 1.0)],
                            bism=[(BismOperatorSpec.zero(d), 1.0)],
                            A=MonotoneOperatorSpec.zero(d), G=MonotoneOperatorSpec.zero(d))


def test_oracle_examples():
    spec = ProblemSpec(squared_norm(2), _trivial_families(2), x1=[3.0, -1.0],
                       omega=OmegaDescription())
    np.testing.assert_array_equal(oracle_solution(spec), [3.0, -1.0])
    spec = ProblemSpec(squared_norm(1), _trivial_families(1), x1=[1.0],
                       omega=OmegaDescription(ineq_normals=[[1.0]], ineq_offsets=[0.0]))
    assert oracle_solution(spec)[0] == pytest.approx(0.0, abs=1e-12)
    spec = ProblemSpec(negative_entropy(2), _trivial_families(2), x1=[2.0, 2.0],
                       omega=OmegaDescription(ineq_normals=[[1.0, 1.0]], ineq_offsets=[1.0]))
    np.testing.assert_allclose(oracle_solution(spec), [0.5, 0.5], atol=1e-12)


def test_oracle_needs_a_description():
    spec = ProblemSpec(squared_norm(1), _trivial_families(1), x1=[1.0])
    with pytest.raises(OracleError):
        oracle_solution(spec)


# Fejer check -------------------------------------------------------------------------

def test_fejer_examples():
    assert fejer_check([0.0, 0.0, 0.0]).ok
    assert fejer_check([0.0, 0.03125, 0.06, 0.1]).ok
    rep = fejer_check([0.0, 0.1, 0.2, 0.15, 0.3])
    assert not rep.monotone and rep.first_violation == 4
    rep = fejer_check([0.0, 0.1, 0.2], bound=0.15)
    assert not rep.bounded and rep.first_violation == 3
    with pytest.raises(ValueError):
        fejer_check(IterationTrace())


# validation -------------------------------------------------------------------------

@pytest.mark.parametrize("kw", [dict(lambda_n=1.0), dict(lambda_n=0.0), dict(r_n=0.0),
                                dict(eta_n=-1.0), dict(lambda_n=0.3, a=0.5),
                                dict(lambda_n=())])
def test_schedule_bounds(kw):
    with pytest.raises(ValueError):
        Schedules(**kw)


def test_schedule_sequences_repeat_their_last_entry():
    s = Schedules(lambda_n=(0.2, 0.4, 0.6))
    assert [s.lam(n) for n in (1, 2, 3, 4, 10)] == [0.2, 0.4, 0.6, 0.6, 0.6]
    assert s.a == 0.2


def test_problem_spec_checks_its_witness():
    fam = _trivial_families(1)
    T = DemimetricMappingSpec.halfspace_projection([1.0], 0.0)
    fam = OperatorFamilies(demimetric=[(T, 1.0)], bism=fam.bism, A=fam.A, G=fam.G)
    with pytest.raises(ValueError, match="witness"):
        ProblemSpec(squared_norm(1), fam, x1=[1.0], witness=[0.5])
    with pytest.raises(ValueError):
        ProblemSpec(squared_norm(1), fam, x1=[1.0], base_box=([2.0], [3.0]))


def test_stop_rule_validation():
    with pytest.raises(ValueError):
        StopRule(max_iter=0)
    with pytest.raises(ValueError):
        StopRule(tol_step=float("nan"))
