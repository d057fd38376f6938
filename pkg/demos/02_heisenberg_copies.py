"""Everett copies of an evolved record observable.

The record observable b, carried to the final time, splits into one block per
pointer projector.  The extractor recovers that split from the operator alone.
"""
import numpy as np

from everett import (
    ComplexOperator,
    Space,
    build_model,
    closed_form_branches,
    evolve_operator,
    extract_copy_structure,
    kron,
    permutation_equivalent,
)

np.set_printoptions(precision=3, suppress=True)

model = build_model(3, beta=[0.0, 2.0, -1.0, 5.0])
b = model.record_operator()
bt = evolve_operator(model, b)

dec = extract_copy_structure(bt, model.ready, seed=0)
print("copy form found, residual", dec.residual)
for br in dec.branches:
    print("record value", br.record_value.real, " system vector", br.vector)

ref = closed_form_branches(model, b)
print("matches the closed-form branches with permutation", permutation_equivalent(ref, dec))

# a small generic coupling destroys the structure
x_o = np.zeros((4, 4))
x_o[0, 1] = x_o[1, 0] = 1.0
x_s = np.zeros((3, 3))
x_s[0, 1] = x_s[1, 0] = 1.0
k = kron(ComplexOperator(x_o, Space.O), ComplexOperator(x_s, Space.S))
k = k * (0.3 / k.frobenius_norm())
verdict = extract_copy_structure(bt.op + k, model.ready, seed=0)
print("after perturbation:", type(verdict).__name__, "residual", round(verdict.residual, 4))
