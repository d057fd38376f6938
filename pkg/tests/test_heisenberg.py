"""Heisenberg picture: evolved operators, copy-structure extraction,
uniqueness, impossibility for noncommuting observables."""
import math

import numpy as np
import pytest
import scipy.optimize

from everett import (
    ComplexOperator,
    DimensionMismatch,
    EverettDecomposition,
    NotCopyForm,
    Space,
    SystemState,
    build_model,
    closed_form_branches,
    evolve_operator,
    expectation_consistency,
    extract_copy_structure,
    kron,
    noncommuting_impossibility_check,
    permutation_equivalent,
)
from everett.heisenberg import (
    HeisenbergOperator,
    canonicalize,
    commutator_norm,
    embed,
    rotated_contrast,
)
from everett.report import random_recorded_operator
from everett.tensor import conditional_blocks

X_O = ComplexOperator(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex), Space.O)
X_S = ComplexOperator(np.array([[0, 1], [1, 0]], dtype=complex), Space.S)


def _perturbed(scale_to_norm=None, strength=0.3):
    model = build_model(2)
    bt = evolve_operator(model, model.record_operator()).op
    k = kron(X_O, X_S)
    if scale_to_norm is not None:
        k = k * (scale_to_norm / k.frobenius_norm())
    else:
        k = k * strength
    return bt + k


def _best_basis_residual(op):
    """Smallest relative off-diagonal block mass over all 2x2 system bases,
    by a grid search refined with Nelder-Mead."""
    blocks = conditional_blocks(op)
    norm = op.frobenius_norm()

    def resid(x):
        t, p = x
        v = np.array([[math.cos(t), -math.sin(t)], [np.exp(1j * p) * math.sin(t), np.exp(1j * p) * math.cos(t)]])
        rot = np.einsum("ia,mnij,jb->mnab", v.conj(), blocks, v)
        return math.hypot(np.linalg.norm(rot[:, :, 0, 1]), np.linalg.norm(rot[:, :, 1, 0])) / norm

    grid = [(t, p) for t in np.linspace(0, math.pi, 91) for p in np.linspace(0, 2 * math.pi, 91)]
    start = min(grid, key=resid)
    out = scipy.optimize.minimize(resid, start, method="Nelder-Mead", options={"xatol": 1e-12, "fatol": 1e-15})
    return min(out.fun, resid(start))


def test_evolved_operator_matches_direct_product():
    model = build_model(3)
    b = model.record_operator()
    heis = evolve_operator(model, b)
    u = model.u.data
    want = u.conj().T @ np.kron(b.data, np.eye(3)) @ u
    np.testing.assert_allclose(heis.op.data, want, atol=1e-13)
    np.testing.assert_allclose(embed(b, 3).data, np.kron(b.data, np.eye(3)), atol=0)


@pytest.mark.parametrize("m", [2, 3, 4])
def test_closed_form_reproduces_evolved_operator(m):
    beta = np.linspace(-1.0, 2.0, m + 1)
    model = build_model(m, beta=beta)
    dec = closed_form_branches(model, model.record_operator())
    assert dec.residual <= 1e-13
    np.testing.assert_allclose(dec.record_values, beta[1:], atol=1e-13)


@pytest.mark.parametrize("m", [2, 3, 4, 6])
def test_extraction_recovers_record_values(m):
    rng = np.random.default_rng(100 + m)
    beta = rng.permutation(np.arange(m + 1, dtype=float)) * 1.3 - 2.0
    model = build_model(m, beta=beta)
    b = model.record_operator()
    dec = extract_copy_structure(evolve_operator(model, b), model.ready, seed=m)
    assert isinstance(dec, EverettDecomposition) and dec.canonical
    assert dec.residual <= 1e-10
    np.testing.assert_allclose(np.real(dec.record_values), np.sort(beta[1:]), atol=1e-10)
    assert permutation_equivalent(closed_form_branches(model, b), dec)
    assert dec.reconstruct().data.shape == (model.dim, model.dim)
    assert np.linalg.norm(dec.reconstruct().data - evolve_operator(model, b).op.data) <= 1e-10


def test_extraction_of_identity_is_not_copy_form():
    verdict = extract_copy_structure(ComplexOperator.identity(6, Space.OS))
    assert isinstance(verdict, NotCopyForm) and not verdict
    assert "record values coincide" in verdict.reason


def test_extraction_of_zero_is_not_copy_form():
    assert not extract_copy_structure(ComplexOperator.zeros(6, Space.OS))


def test_extraction_needs_composite_operator():
    with pytest.raises(DimensionMismatch):
        extract_copy_structure(ComplexOperator.identity(3, Space.O))


def test_extraction_rejects_ready_not_eigenvector():
    a = np.array([[1, 0.5, 0], [0.5, 2, 0], [0, 0, 3]], dtype=complex)
    op = kron(ComplexOperator(a, Space.O), ComplexOperator(np.diag([1.0, 0.0]), Space.S))
    op = op + kron(ComplexOperator(np.diag([5.0, 6.0, 7.0]), Space.O), ComplexOperator(np.diag([0.0, 1.0]), Space.S))
    verdict = extract_copy_structure(op)
    assert not verdict and "eigenvector" in verdict.reason


def test_negative_control_golden_value():
    verdict = extract_copy_structure(HeisenbergOperator(_perturbed(scale_to_norm=0.3)), seed=0)
    assert isinstance(verdict, NotCopyForm)
    assert verdict.residual == pytest.approx(0.09454642608504815, rel=1e-9)


@pytest.mark.parametrize("norm", [0.3, None])
def test_negative_control_residual_bounded_by_basis_oracle(norm):
    op = _perturbed(scale_to_norm=norm)
    oracle = _best_basis_residual(op)
    assert oracle > 0.05
    for seed in range(3):
        verdict = extract_copy_structure(op, seed=seed)
        assert not verdict
        assert verdict.residual >= oracle - 1e-9
        assert verdict.residual <= oracle * 1.1


def test_canonical_form_is_sorted_and_phase_fixed():
    model = build_model(3, beta=[0.0, 3.0, -1.0, 2.0])
    dec = extract_copy_structure(evolve_operator(model, model.record_operator()), seed=5)
    vals = [v.real for v in dec.record_values]
    assert vals == sorted(vals)
    for br in dec.branches:
        lead = next(x for x in br.vector if abs(x) > 1e-8)
        assert abs(lead.imag) < 1e-15 and lead.real > 0
    again = canonicalize(dec)
    assert permutation_equivalent(dec, again) == (0, 1, 2)


def test_mixing_seeds_agree():
    model = build_model(4, beta=[0.5, -1.0, 2.0, 3.5, 1.0])
    heis = evolve_operator(model, model.record_operator())
    decs = [extract_copy_structure(heis, seed=s) for s in range(5)]
    for d in decs[1:]:
        assert permutation_equivalent(decs[0], d) == (0, 1, 2, 3)


def test_permutation_equivalent_detects_mismatch():
    m1 = build_model(2, beta=[0.0, 1.0, 2.0])
    m2 = build_model(2, beta=[0.0, 1.0, 3.0])
    d1 = closed_form_branches(m1, m1.record_operator())
    d2 = closed_form_branches(m2, m2.record_operator())
    assert not permutation_equivalent(d1, d2)


@pytest.mark.parametrize("m", [2, 3, 5])
def test_noncommuting_impossibility(m):
    rng = np.random.default_rng(m)
    model = build_model(m)
    d = random_recorded_operator(m, rng, 1e-6)
    rep = noncommuting_impossibility_check(model, model.pointer_operator(), d)
    assert rep.applicable and rep.projector_match
    assert rep.commutator_norm <= 1e-10
    assert sorted(rep.permutation) == list(range(m))


def test_impossibility_not_applicable_without_copies():
    model = build_model(2)
    rep = noncommuting_impossibility_check(model, model.pointer_operator(), ComplexOperator.identity(3, Space.O))
    assert not rep.applicable and rep.commutator_norm is None


def test_rotated_contrast_two_outcomes():
    model = build_model(2)
    a = model.pointer_operator().data
    f = np.array([[1, 1], [1, -1]]) / math.sqrt(2)
    a_prime = f @ np.diag([1.0, 2.0]) @ f.T
    oracle = np.linalg.norm(a @ a_prime - a_prime @ a)
    assert rotated_contrast(model, model.pointer_operator()) == pytest.approx(oracle, abs=1e-14)
    assert oracle == pytest.approx(1 / math.sqrt(2), abs=1e-14)
    assert commutator_norm(a, a) == 0.0


def test_picture_consistency_worked_case():
    model = build_model(2, beta=[0.0, 1.0, 2.0])
    state = SystemState.uniform(2)
    b = model.record_operator()
    psi_t = model.u.data @ np.kron(model.ready, state.psi)
    lhs = np.vdot(psi_t, np.kron(b.data, np.eye(2)) @ psi_t)
    assert lhs.real == pytest.approx(1.5, abs=1e-12)
    assert expectation_consistency(model, b, state) <= 1e-12
