"""Acceptance criteria 1-11, each at its stated tolerance.

Run with ``pytest tests/test_acceptance.py -v``; the terminal summary lists
one PASS/FAIL line per criterion.
"""
import json
import math

import numpy as np
import pytest

from everett import (
    EquivalenceWitness,
    EverettDecomposition,
    NotCopyForm,
    SystemState,
    build_model,
    check_branch_form,
    closed_form_branches,
    evolve_operator,
    expectation_consistency,
    extract_copy_structure,
    hadamard_primed_bases,
    kron,
    match_to_unprimed,
    noncommuting_impossibility_check,
    permutation_equivalent,
    random_basis_search,
    schrodinger_evolve,
    verify_condition_M2,
    verify_M2_for_basis,
)
from everett.ambiguity import apply_witness
from everett.cli import main
from everett.heisenberg import HeisenbergOperator, rotated_contrast
from everett.measurement import ready_product
from everett.report import random_distinct_values, random_recorded_operator
from everett.tensor import ComplexOperator, DEFAULT_TOLERANCES, Space

pytestmark = pytest.mark.acceptance

DIMS = (2, 3, 4, 6)
N_MODELS = 100
MIX_SEEDS = 5


@pytest.fixture(scope="module")
def extraction_runs():
    """100 seeded models with random distinct record values, each extracted
    with five mixing seeds."""
    runs = []
    for k, s in enumerate(np.random.SeedSequence(2024).spawn(N_MODELS)):
        rng = np.random.default_rng(s)
        m = DIMS[k % len(DIMS)]
        beta = random_distinct_values(m + 1, rng, DEFAULT_TOLERANCES.degeneracy_gap)
        model = build_model(m, float(rng.uniform(0.5, 2.0)), beta=beta)
        b = model.record_operator()
        heis = evolve_operator(model, b)
        decs = [extract_copy_structure(heis, model.ready, seed=1000 * k + j) for j in range(MIX_SEEDS)]
        runs.append((model, beta, heis, closed_form_branches(model, b), decs))
    return runs


def test_criterion_01_measurement_construction(criterion):
    worst_m2 = worst_unit = worst_kappa = 0.0
    for m in DIMS:
        for duration in (0.5, 1.0, 2.0):
            model = build_model(m, duration)
            u = model.u.data
            worst_unit = max(worst_unit, float(np.linalg.norm(u.conj().T @ u - np.eye(model.dim))))
            worst_m2 = max(worst_m2, verify_condition_M2(model).residual)
            worst_kappa = max(worst_kappa, abs(model.kappa * duration - math.pi / 2))
    ok = worst_m2 <= 1e-10 and worst_unit <= 1e-10 and worst_kappa <= 1e-15
    criterion(1, ok, f"max M2 residual {worst_m2:.2e}, unitarity defect {worst_unit:.2e}, |kappa*T - pi/2| {worst_kappa:.1e}")
    assert ok


def test_criterion_02_branch_form(criterion):
    worst = 0.0
    failures = 0
    for m in DIMS:
        model = build_model(m)
        rng = np.random.default_rng(m)
        for _ in range(100):
            state = SystemState.random(m, rng)
            coeffs = check_branch_form(schrodinger_evolve(model, state), model)
            if not isinstance(coeffs, np.ndarray):
                failures += 1
                continue
            worst = max(worst, float(np.max(np.abs(coeffs - state.psi))))
    ok = failures == 0 and worst <= 1e-10
    criterion(2, ok, f"400 states, {failures} not in branch form, max amplitude error {worst:.2e}")
    assert ok


def test_criterion_03_ambiguity_demo(criterion):
    model = build_model(2)
    bp = hadamard_primed_bases(model)
    r = 1 / math.sqrt(2)
    psi_t = schrodinger_evolve(model, SystemState.uniform(2))
    coeffs = np.array([np.vdot(np.kron(bp.o_basis[:, j + 1], bp.s_basis[:, j]), psi_t) for j in range(2)])
    rewrite_err = float(np.max(np.abs(coeffs - r)))

    target = math.sqrt(2 - math.sqrt(2))
    residuals = verify_M2_for_basis(model, bp)
    residual_errs = [abs(x - target) for x in residuals]

    verdict = match_to_unprimed(model, bp)
    s1 = bp.s_basis[:, 0]
    overlap = np.vdot(np.kron(bp.o_basis[:, 1], s1), model.u.data @ ready_product(s1, 2))
    overlap_err = abs(overlap - r)

    parts = {
        "rewrite (1/sqrt2, 1/sqrt2)": rewrite_err <= 1e-12,
        "branch 1 residual sqrt(2-sqrt2)": residual_errs[0] <= 1e-10,
        "branch 2 residual sqrt(2-sqrt2)": residual_errs[1] <= 1e-10,
        "Hadamard pair NotEquivalent": not verdict,
        "overlap 1/sqrt2": overlap_err <= 1e-12,
    }
    ok = all(parts.values())
    failed = [k for k, v in parts.items() if not v]
    criterion(3, ok, f"residuals {residuals[0]:.16f}, {residuals[1]:.16f} (target {target:.16f})"
                     + (f"; failing parts: {failed}" if failed else ""))
    assert parts["rewrite (1/sqrt2, 1/sqrt2)"], rewrite_err
    assert parts["branch 1 residual sqrt(2-sqrt2)"], residuals[0]
    assert parts["Hadamard pair NotEquivalent"]
    assert parts["overlap 1/sqrt2"], overlap_err
    assert parts["branch 2 residual sqrt(2-sqrt2)"], (
        f"branch 2 M2 residual is {residuals[1]!r}, not {target!r}"
    )


def test_criterion_04_schrodinger_uniqueness(criterion):
    counter = 0
    satisfying = 0
    adversarial = 0
    adversarial_ok = 0
    for m in (2, 3):
        model = build_model(m)
        res = random_basis_search(model, 1000, seed=m)
        counter += res.counterexamples
        satisfying += res.satisfying
        rng = np.random.default_rng(100 + m)
        for _ in range(1000):
            perm = rng.permutation(m)
            phases = np.exp(1j * rng.uniform(-math.pi, math.pi, m))
            bp = apply_witness(m, perm, phases)
            adversarial += 1
            w = match_to_unprimed(model, bp)
            adversarial_ok += (
                isinstance(w, EquivalenceWitness)
                and max(verify_M2_for_basis(model, bp)) <= 1e-6
                and w.permutation == tuple(int(p) for p in perm)
            )
        structured = random_basis_search(model, 1000, seed=m, ensemble="structured")
        counter += structured.counterexamples
    ok = counter == 0 and adversarial_ok == adversarial
    criterion(4, ok, f"Haar: {satisfying} satisfying, counterexamples {counter}; "
                     f"permuted/phased: {adversarial_ok}/{adversarial} equivalent")
    assert ok


def test_criterion_05_heisenberg_extraction(criterion, extraction_runs):
    failures = []
    worst_resid = worst_beta = 0.0
    for k, (model, beta, heis, reference, decs) in enumerate(extraction_runs):
        dec = decs[0]
        if not isinstance(dec, EverettDecomposition):
            failures.append((k, dec.reason))
            continue
        target = heis.op
        recon = float(np.linalg.norm(dec.reconstruct().data - target.data)) / target.frobenius_norm()
        got = sorted((complex(v) for v in dec.record_values), key=lambda z: (z.real, z.imag))
        want = sorted(float(v) for v in beta[1:])
        err = max(abs(a - b) for a, b in zip(got, want))
        worst_resid = max(worst_resid, recon)
        worst_beta = max(worst_beta, err)
        if recon > 1e-10 or err > 1e-10 or not permutation_equivalent(reference, dec):
            failures.append((k, "mismatch"))
    ok = not failures
    criterion(5, ok, f"{N_MODELS} models, failures {len(failures)}, max reconstruction residual {worst_resid:.2e}, "
                     f"max record error {worst_beta:.2e}")
    assert ok, failures


def test_criterion_06_expansion_uniqueness(criterion, extraction_runs):
    failures = 0
    for _, _, _, _, decs in extraction_runs:
        if not all(decs):
            failures += 1
            continue
        for i in range(len(decs)):
            for j in range(i + 1, len(decs)):
                failures += not permutation_equivalent(decs[i], decs[j])
    ok = failures == 0
    criterion(6, ok, f"{N_MODELS} models x {MIX_SEEDS} mixing seeds, {failures} non-equivalent pairs")
    assert ok


def test_criterion_07_eigenvalue_condition(criterion, extraction_runs):
    worst = 0.0
    count = 0
    for model, _, _, _, decs in extraction_runs:
        for dec in decs:
            for br in dec.branches:
                out = br.branch_op.data @ model.ready
                worst = max(worst, float(np.linalg.norm(out - br.record_value * model.ready)))
                count += 1
    ok = count > 0 and worst <= 1e-8
    criterion(7, ok, f"{count} branches, max ||b_i|O:0> - beta_i|O:0>|| = {worst:.2e}")
    assert ok


def test_criterion_08_noncommuting_impossibility(criterion):
    failures = 0
    worst = 0.0
    for k, s in enumerate(np.random.SeedSequence(88).spawn(100)):
        rng = np.random.default_rng(s)
        m = DIMS[k % len(DIMS)]
        alpha = random_distinct_values(m, rng, DEFAULT_TOLERANCES.degeneracy_gap)
        model = build_model(m, float(rng.uniform(0.5, 2.0)), alpha=alpha)
        d = random_recorded_operator(m, rng, DEFAULT_TOLERANCES.degeneracy_gap)
        rep = noncommuting_impossibility_check(model, model.pointer_operator(), d, seed=k)
        if not (rep.applicable and rep.projector_match and rep.commutator_norm <= 1e-10):
            failures += 1
        if rep.commutator_norm is not None:
            worst = max(worst, rep.commutator_norm)
    model = build_model(2)
    contrast = rotated_contrast(model, model.pointer_operator())
    ok = failures == 0 and worst <= 1e-10 and contrast > 0.1
    criterion(8, ok, f"100 pairs, failures {failures}, max commutator {worst:.2e}; rotated contrast {contrast:.4f}")
    assert ok


def test_criterion_09_picture_consistency(criterion):
    worst = 0.0
    for k, s in enumerate(np.random.SeedSequence(99).spawn(100)):
        rng = np.random.default_rng(s)
        m = DIMS[k % len(DIMS)]
        model = build_model(m, float(rng.uniform(0.5, 2.0)))
        state = SystemState.random(m, rng)
        raw = rng.standard_normal((m + 1, m + 1)) + 1j * rng.standard_normal((m + 1, m + 1))
        b = ComplexOperator(raw + raw.conj().T, Space.O)
        worst = max(worst, expectation_consistency(model, b, state))

    model = build_model(2, beta=[0.0, 1.0, 2.0])
    state = SystemState.uniform(2)
    b = model.record_operator()
    psi_t = schrodinger_evolve(model, state)
    schrod = np.vdot(psi_t, np.kron(b.data, np.eye(2)) @ psi_t)
    psi_in = ready_product(state.psi, 2)
    heis = np.vdot(psi_in, evolve_operator(model, b).op.data @ psi_in)
    worked = max(abs(schrod - 1.5), abs(heis - 1.5))
    ok = worst <= 1e-10 and worked <= 1e-10
    criterion(9, ok, f"100 cases, max |diff| {worst:.2e}; worked case {schrod.real:.15f} vs {heis.real:.15f}")
    assert ok


def test_criterion_10_negative_control(criterion):
    model = build_model(2)
    bt = evolve_operator(model, model.record_operator()).op
    assert extract_copy_structure(HeisenbergOperator(bt))
    x_o = ComplexOperator(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex), Space.O)
    x_s = ComplexOperator(np.array([[0, 1], [1, 0]], dtype=complex), Space.S)
    coupling = kron(x_o, x_s)
    coupling = coupling * (0.3 / coupling.frobenius_norm())
    verdict = extract_copy_structure(HeisenbergOperator(bt + coupling))
    ok = isinstance(verdict, NotCopyForm) and verdict.residual > 0.05
    criterion(10, ok, f"verdict {type(verdict).__name__}, residual {getattr(verdict, 'residual', float('nan')):.6f}")
    assert ok


def test_criterion_11_determinism(criterion, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"m": 3, "beta": [0.0, 1.5, -2.0, 4.0], "seed": 7, "trials": 30}))
    identical = []
    for command in (["verify", "--config", str(cfg)], ["sweep", "--config", str(cfg)], ["demo-ambiguity"]):
        outs = []
        for run in range(2):
            path = tmp_path / f"{command[0]}-{run}.json"
            main([*command, "-o", str(path)])
            outs.append(path.read_bytes())
        identical.append(outs[0] == outs[1] and len(outs[0]) > 0)
    ok = all(identical)
    criterion(11, ok, f"byte-identical reports for verify/sweep/demo-ambiguity: {identical}")
    assert ok
