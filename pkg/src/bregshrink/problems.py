"""Bundled problems with analytic solution sets."""

from __future__ import annotations

import numpy as np

from .geometry import negative_entropy, squared_norm
from .operators import (BismOperatorSpec, DemimetricMappingSpec, MonotoneOperatorSpec,
                        OperatorFamilies)
from .solver import OmegaDescription, ProblemSpec, Schedules

__all__ = ["identity_problem", "projection_1d", "hilbert_d5", "entropy_d3", "BUNDLED"]


def identity_problem(dim: int = 2, x1=None) -> ProblemSpec:
    """Every operator is the identity or zero; Omega is the whole space."""
    g = squared_norm(dim)
    x1 = np.arange(1.0, dim + 1.0) if x1 is None else x1
    fam = OperatorFamilies(
        demimetric=[(DemimetricMappingSpec.identity(dim), 1.0)],
        bism=[(BismOperatorSpec.zero(dim), 1.0)],
        A=MonotoneOperatorSpec.zero(dim), G=MonotoneOperatorSpec.zero(dim))
    return ProblemSpec(g, fam, Schedules(), x1, witness=np.asarray(x1, dtype=float),
                       omega=OmegaDescription(), name="identity")


def projection_1d() -> ProblemSpec:
    """d = 1, T = projection onto (-inf, 0]; Omega = (-inf, 0], x1 = 1, omega_0 = 0."""
    g = squared_norm(1)
    T = DemimetricMappingSpec.halfspace_projection([1.0], 0.0, witness=[0.0])
    fam = OperatorFamilies(
        demimetric=[(T, 1.0)], bism=[(BismOperatorSpec.zero(1), 1.0)],
        A=MonotoneOperatorSpec.zero(1), G=MonotoneOperatorSpec.zero(1))
    om = OmegaDescription(ineq_normals=[[1.0]], ineq_offsets=[0.0])
    return ProblemSpec(g, fam, Schedules(lambda_n=0.5), [1.0], witness=[0.0], omega=om,
                       name="projection_1d")


def hilbert_d5() -> ProblemSpec:
    """Squared norm in d = 5 with Omega = [-1, 1]^5 cut by the hyperplane <a, x> = 1/2.

    T_1 projects onto the box, T_2 onto the halfspace <a, x> <= 1/2.  With
    B(x) = a (<a, x> - 1/2) and G the normal cone of the box, (B + G)^{-1}0
    minimizes (<a, x> - 1/2)^2 over the box, which is the box slice by the
    hyperplane.  A is the normal cone of the larger box [-2, 2]^5.
    """
    d = 5
    g = squared_norm(d)
    a = np.ones(d) / np.sqrt(d)
    beta = 0.5
    lo, hi = -np.ones(d), np.ones(d)
    witness = beta * a
    T1 = DemimetricMappingSpec.box_projection(lo, hi, witness=witness)
    T2 = DemimetricMappingSpec.halfspace_projection(a, beta, witness=witness)
    B = BismOperatorSpec.affine(np.outer(a, a), beta * a)
    fam = OperatorFamilies(
        demimetric=[(T1, 0.5), (T2, 0.5)], bism=[(B, 1.0)],
        A=MonotoneOperatorSpec.box(-2.0 * np.ones(d), 2.0 * np.ones(d)),
        G=MonotoneOperatorSpec.box(lo, hi))
    om = OmegaDescription(lower=lo, upper=hi, eq_normals=[a], eq_offsets=[beta])
    x1 = np.array([3.0, -2.0, 0.5, 2.5, 1.0])
    box = (-5.0 * np.ones(d), 5.0 * np.ones(d))
    return ProblemSpec(g, fam, Schedules(lambda_n=0.5, eta_n=0.5, r_n=1.0), x1,
                       base_box=box, witness=witness, omega=om, name="hilbert_d5")


def entropy_d3() -> ProblemSpec:
    """Negative entropy in d = 3 with Omega = {sum z <= 6} inside [0.1, 20]^3.

    From x1 = (2, 3, 5) the KL projection onto the sum constraint is the
    rescaling 0.6 * x1 = (1.2, 1.8, 3.0), which lies inside the box.
    """
    d = 3
    g = negative_entropy(d)
    ones = np.ones(d)
    s = 6.0
    lo, hi = 0.1 * ones, 20.0 * ones
    witness = ones
    T1 = DemimetricMappingSpec.halfspace_projection(ones, s, witness=witness)
    T2 = DemimetricMappingSpec.box_projection(lo, hi, witness=witness)
    fam = OperatorFamilies(
        demimetric=[(T1, 0.5), (T2, 0.5)], bism=[(BismOperatorSpec.zero(d), 1.0)],
        A=MonotoneOperatorSpec.box(0.05 * ones, 50.0 * ones),
        G=MonotoneOperatorSpec.box(lo, hi))
    om = OmegaDescription(lower=lo, upper=hi, ineq_normals=[ones], ineq_offsets=[s])
    return ProblemSpec(g, fam, Schedules(lambda_n=0.5, eta_n=0.5, r_n=1.0),
                       [2.0, 3.0, 5.0], witness=witness, omega=om, name="entropy_d3")


BUNDLED = {
    "identity": identity_problem,
    "projection_1d": projection_1d,
    "hilbert_d5": hilbert_d5,
    "entropy_d3": entropy_d3,
}
