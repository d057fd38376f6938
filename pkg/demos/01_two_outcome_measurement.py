"""A two-outcome measurement, step by step.

Build the interaction, evolve an equal-weight system state and look at the
branches in the measurement basis and in a Hadamard-rotated one.
"""
import math

import numpy as np

from everett import (
    SystemState,
    build_model,
    check_branch_form,
    hadamard_primed_bases,
    match_to_unprimed,
    schrodinger_evolve,
    verify_condition_M2,
    verify_M2_for_basis,
)

np.set_printoptions(precision=4, suppress=True)

model = build_model(2, duration=1.0)
print("coupling kappa =", model.kappa, " kappa * T =", model.kappa * model.duration)
print("U is unitary:", model.u.is_unitary())

# ready state times |S:j> goes to the record |O:j+1> times |S:j>
rep = verify_condition_M2(model)
print("M2 residual per branch:", rep.detail["per_branch"])

state = SystemState.uniform(2)
psi_t = schrodinger_evolve(model, state)
print("branch amplitudes:", check_branch_form(psi_t, model))

# the same vector looks biorthogonal in rotated bases too
bp = hadamard_primed_bases(model)
coeffs = [np.vdot(np.kron(bp.o_basis[:, j + 1], bp.s_basis[:, j]), psi_t) for j in range(2)]
print("coefficients in the rotated bases:", np.array(coeffs))

# but the rotated bases are not correlated by U
res = verify_M2_for_basis(model, bp)
print("rotated-basis M2 residuals:", res)
print("  branch 1 vs sqrt(2 - sqrt 2):", math.sqrt(2 - math.sqrt(2)))
print("  branch 2 vs sqrt 2:          ", math.sqrt(2))
print("rotated bases equivalent to the measurement bases?", bool(match_to_unprimed(model, bp)))
