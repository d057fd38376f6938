"""Heisenberg-picture operators and their Everett-copy structure.

A composite operator is in *copy form* when it can be written
``B = sum_i b_i (x) P_i`` with rank-1 system projectors ``P_i`` summing to
the identity, apparatus operators ``b_i`` that all have the ready vector as
an eigenvector, and pairwise distinct eigenvalues (record values) on it.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import DimensionMismatch, RetriesExhausted
from .measurement import MeasurementModel, SystemState, degenerate_pairs, ready_product, schrodinger_evolve
from .tensor import (
    DEFAULT_TOLERANCES,
    ComplexOperator,
    Space,
    ToleranceProfile,
    conditional_blocks,
    frob_dist,
    hermitian_eig,
    kron,
)

__all__ = [
    "HeisenbergOperator",
    "Branch",
    "EverettDecomposition",
    "NotCopyForm",
    "NotEquivalent",
    "ImpossibilityReport",
    "embed",
    "evolve_operator",
    "closed_form_branches",
    "extract_copy_structure",
    "canonicalize",
    "permutation_equivalent",
    "noncommuting_impossibility_check",
    "commutator_norm",
    "rotated_contrast",
    "expectation_consistency",
]


@dataclass(frozen=True, eq=False)
class HeisenbergOperator:
    op: ComplexOperator
    provenance: dict = field(default_factory=dict)


def embed(o: ComplexOperator, m: int) -> ComplexOperator:
    """Lift an apparatus or system operator to the composite space."""
    if not isinstance(o, ComplexOperator):
        raise DimensionMismatch("expected a tagged ComplexOperator")
    if o.space is Space.O:
        if o.dim != m + 1:
            raise DimensionMismatch(f"apparatus operator must be {m + 1}x{m + 1}")
        return kron(o, ComplexOperator.identity(m, Space.S))
    if o.space is Space.S:
        if o.dim != m:
            raise DimensionMismatch(f"system operator must be {m}x{m}")
        return kron(ComplexOperator.identity(m + 1, Space.O), o)
    if o.dim != m * (m + 1):
        raise DimensionMismatch(f"composite operator must be {m * (m + 1)}x{m * (m + 1)}")
    return o


def evolve_operator(model: MeasurementModel, o: ComplexOperator) -> HeisenbergOperator:
    """``o(t) = U^dag o U`` after embedding ``o`` into the composite space."""
    full = embed(o, model.m)
    u = model.u
    return HeisenbergOperator(
        u.dag() @ full @ u,
        {"source_space": o.space.value, "m": model.m, "duration": model.duration},
    )


@dataclass(frozen=True, eq=False)
class Branch:
    branch_op: ComplexOperator
    projector: ComplexOperator
    record_value: complex
    vector: np.ndarray


@dataclass(frozen=True, eq=False)
class EverettDecomposition:
    branches: tuple
    residual: float
    canonical: bool = False

    def __len__(self):
        return len(self.branches)

    @property
    def record_values(self) -> tuple:
        return tuple(b.record_value for b in self.branches)

    def degenerate_pairs(self, gap: float = DEFAULT_TOLERANCES.degeneracy_gap) -> list:
        return degenerate_pairs(self.record_values, gap)

    def reconstruct(self) -> ComplexOperator:
        total = None
        for br in self.branches:
            term = kron(br.branch_op, br.projector)
            total = term if total is None else total + term
        return total

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotCopyForm:
    residual: float
    reason: str

    def __bool__(self):
        return False


@dataclass(frozen=True)
class NotEquivalent:
    reason: str

    def __bool__(self):
        return False


def _projector(vec: np.ndarray) -> ComplexOperator:
    return ComplexOperator(np.outer(vec, vec.conj()), Space.S)


def closed_form_branches(model: MeasurementModel, b: ComplexOperator) -> EverettDecomposition:
    """Branches ``b_i = u_i^dag b u_i`` read straight from the model's
    per-branch rotations; the reference decomposition for ``b(t)``."""
    if b.space is not Space.O or b.dim != model.m + 1:
        raise DimensionMismatch("closed-form branches need an apparatus operator")
    ready = model.ready
    branches = []
    for j, u_j in enumerate(model.u_branches):
        b_j = u_j.dag() @ b @ u_j
        vec = np.eye(model.m, dtype=np.complex128)[:, j]
        branches.append(Branch(b_j, _projector(vec), complex(ready.conj() @ (b_j @ ready)), vec))
    dec = EverettDecomposition(tuple(branches), 0.0)
    target = evolve_operator(model, b).op
    scale = max(target.frobenius_norm(), np.finfo(float).tiny)
    return EverettDecomposition(dec.branches, frob_dist(dec.reconstruct(), target) / scale)


def _fix_phase(vec: np.ndarray, threshold: float) -> np.ndarray:
    """Rotate ``vec`` so its first non-negligible component is real positive."""
    for x in vec:
        if abs(x) > threshold:
            return vec * (abs(x) / x)
    return vec


def canonicalize(dec: EverettDecomposition, tol: ToleranceProfile = DEFAULT_TOLERANCES) -> EverettDecomposition:
    """Sort branches by record value and fix each defining vector's phase."""
    order = sorted(range(len(dec.branches)), key=lambda k: (dec.branches[k].record_value.real, dec.branches[k].record_value.imag))
    branches = []
    for k in order:
        br = dec.branches[k]
        vec = _fix_phase(br.vector, tol.residual_tol)
        branches.append(Branch(br.branch_op, br.projector, br.record_value, vec))
    return EverettDecomposition(tuple(branches), dec.residual, True)


def _attempt(blocks: np.ndarray, norm: float, rng: np.random.Generator, tol: ToleranceProfile):
    n_o, _, m, _ = blocks.shape
    r = (rng.standard_normal((n_o, n_o)) + 1j * rng.standard_normal((n_o, n_o))) / norm
    mix = np.einsum("mn,mnij->ij", r, blocks)
    g = 0.5 * (mix + mix.conj().T)
    evals, vecs = hermitian_eig(g, tol=np.inf)
    gaps = np.diff(evals)
    scale = max(float(np.max(np.abs(evals))), np.finfo(float).tiny)
    return vecs, bool(gaps.size and gaps.min() < tol.degeneracy_gap * scale)


def _off_diagonal_residual(blocks: np.ndarray, vecs: np.ndarray, norm: float):
    """Relative block mass left off the diagonal in the basis ``vecs``.

    Also returns the diagonal entries arranged as ``diag[i, m, n]``, i.e. the
    matrix elements ``(b_i)_{mn} = <s_i| C_mn |s_i>``.
    """
    m = vecs.shape[0]
    rotated = np.einsum("ia,mnij,jb->mnab", vecs.conj(), blocks, vecs)
    diag = np.einsum("mnii->imn", rotated).copy()
    idx = np.arange(m)
    rotated[:, :, idx, idx] = 0.0
    return float(np.linalg.norm(rotated)) / norm, diag


def extract_copy_structure(
    b: HeisenbergOperator,
    ready: Optional[np.ndarray] = None,
    tol: ToleranceProfile = DEFAULT_TOLERANCES,
    seed=0,
):
    """Decide whether a composite operator is in copy form and, if so,
    recover its decomposition.

    The conditional blocks ``<O:m|B|O:n>`` of an operator in copy form all
    commute and share the eigenbasis of the system projectors.  A random
    Hermitian mixture of the blocks separates that basis with probability
    one; the mixture is redrawn when its spectrum is (near) degenerate.

    Returns a canonical :class:`EverettDecomposition` or a
    :class:`NotCopyForm` carrying the best reconstruction residual reached.
    """
    op = b.op if isinstance(b, HeisenbergOperator) else b
    if not isinstance(op, ComplexOperator) or op.space is not Space.OS:
        raise DimensionMismatch("copy-structure extraction needs a composite operator")
    m = op.m
    if ready is None:
        ready = np.eye(m + 1, dtype=np.complex128)[:, 0]
    ready = np.asarray(ready, dtype=np.complex128)
    if ready.shape != (m + 1,):
        raise DimensionMismatch(f"ready vector must have {m + 1} components")
    if abs(np.linalg.norm(ready) - 1.0) > tol.eq_tol:
        raise ValueError("ready vector must be normalized")

    norm = op.frobenius_norm()
    if norm == 0.0:
        return NotCopyForm(0.0, "zero operator: all record values coincide")
    blocks = conditional_blocks(op)
    rng = np.random.default_rng(seed)

    # Each non-degenerate draw yields a candidate basis; the first one that
    # diagonalizes every block wins.  Otherwise the best residual is reported.
    chosen = None
    best = None
    degenerate_vecs = None
    for _ in range(int(tol.max_retries)):
        vecs, degenerate = _attempt(blocks, norm, rng, tol)
        if degenerate:
            degenerate_vecs = vecs
            continue
        residual, diag = _off_diagonal_residual(blocks, vecs, norm)
        if residual <= tol.residual_tol:
            chosen = (vecs, residual, diag)
            break
        best = residual if best is None else min(best, residual)

    degenerate = chosen is None and best is None
    if chosen is None and not degenerate:
        return NotCopyForm(best, "conditional blocks are not simultaneously diagonalizable")
    if degenerate:
        # Every draw was degenerate.  Checking the last basis anyway is safe:
        # a persistent degeneracy forces coinciding branch operators, which
        # the record-value test below rejects.
        residual, diag = _off_diagonal_residual(blocks, degenerate_vecs, norm)
        if residual > tol.residual_tol:
            return NotCopyForm(residual, "conditional blocks are not simultaneously diagonalizable (block mixture stayed degenerate)")
        chosen = (degenerate_vecs, residual, diag)
    vecs, residual, diag = chosen

    branches = []
    ray_defects = []
    for i in range(m):
        b_i = ComplexOperator(diag[i], Space.O)
        out = b_i @ ready
        beta = complex(ready.conj() @ out)
        ray_defects.append(float(np.linalg.norm(out - beta * ready)))
        vec = vecs[:, i]
        branches.append(Branch(b_i, _projector(vec), beta, vec))
    if max(ray_defects) > tol.residual_tol:
        return NotCopyForm(residual, f"ready vector is not an eigenvector of every branch operator (defect {max(ray_defects):.3e})")
    pairs = degenerate_pairs([br.record_value for br in branches], tol.degeneracy_gap)
    if pairs:
        return NotCopyForm(residual, f"record values coincide for branch pairs {pairs}")
    if degenerate:
        # Distinct record values always give a separable mixture, so a
        # persistently degenerate one that still passed every check above
        # means something is inconsistent; refuse to guess.
        raise RetriesExhausted(f"block mixture stayed degenerate after {tol.max_retries} draws")
    return canonicalize(EverettDecomposition(tuple(branches), residual), tol)


def permutation_equivalent(d1: EverettDecomposition, d2: EverettDecomposition, tol: float = DEFAULT_TOLERANCES.residual_tol):
    """Find ``pi`` with ``d2[i] == d1[pi[i]]`` (projector and branch operator)."""
    if len(d1) != len(d2):
        return NotEquivalent(f"different branch counts {len(d1)} and {len(d2)}")
    perm = []
    used = set()
    for i, br2 in enumerate(d2.branches):
        hits = [
            k
            for k, br1 in enumerate(d1.branches)
            if frob_dist(br2.projector, br1.projector) <= tol and frob_dist(br2.branch_op, br1.branch_op) <= tol
        ]
        if len(hits) != 1 or hits[0] in used:
            return NotEquivalent(f"branch {i} of the second decomposition has {len(hits)} admissible partners")
        used.add(hits[0])
        perm.append(hits[0])
    return tuple(perm)


def commutator_norm(a, b) -> float:
    x = a.data if isinstance(a, ComplexOperator) else np.asarray(a)
    y = b.data if isinstance(b, ComplexOperator) else np.asarray(b)
    return float(np.linalg.norm(x @ y - y @ x))


@dataclass(frozen=True)
class ImpossibilityReport:
    applicable: bool
    projector_match: bool
    commutator_norm: Optional[float]
    permutation: tuple = ()
    note: str = ""


def _distinct_values(m: int) -> np.ndarray:
    return np.arange(1, m + 1, dtype=float)


def noncommuting_impossibility_check(
    model: MeasurementModel,
    a: ComplexOperator,
    d: ComplexOperator,
    tol: Optional[ToleranceProfile] = None,
    seed=0,
) -> ImpossibilityReport:
    """Check that the copy structure of ``d(t)`` singles out the pointer basis.

    Any system observable diagonal in the extracted branch basis must then
    commute with the pointer observable ``a``.
    """
    tol = model.tol if tol is None else tol
    a_mat = a.data
    m = model.m
    off = a_mat - np.diag(a_mat.diagonal())
    if np.linalg.norm(off) > tol.eq_tol:
        raise ValueError("pointer observable must be diagonal in the pointer basis")
    if degenerate_pairs(list(a_mat.diagonal()), tol.degeneracy_gap):
        raise ValueError("pointer observable must be nondegenerate")
    verdict = extract_copy_structure(evolve_operator(model, d), model.ready, tol, seed)
    if not verdict:
        return ImpossibilityReport(False, False, None, (), f"no Everett copies: {verdict.reason}")
    reference = EverettDecomposition(
        tuple(
            Branch(ComplexOperator.zeros(m + 1, Space.O), model.projector(j), 0.0, np.eye(m)[:, j])
            for j in range(m)
        ),
        0.0,
    )
    perm = []
    for br in verdict.branches:
        hits = [j for j, ref in enumerate(reference.branches) if frob_dist(br.projector, ref.projector) <= tol.residual_tol]
        perm.append(hits[0] if len(hits) == 1 else None)
    match = None not in perm and len(set(perm)) == m
    a_prime = sum(v * br.projector.data for v, br in zip(_distinct_values(m), verdict.branches))
    return ImpossibilityReport(
        True,
        match,
        commutator_norm(a_mat, a_prime),
        tuple(perm) if match else (),
        "extracted projectors coincide with the pointer projectors" if match else "extracted projectors differ from the pointer projectors",
    )


def rotated_contrast(model: MeasurementModel, a: ComplexOperator, rotation=None) -> float:
    """Commutator norm for an observable diagonal in a rotated system basis.

    This is the situation the copy structure rules out: it bypasses the
    extractor and builds ``a'`` directly in the basis given by the columns of
    ``rotation`` (default: the discrete Fourier basis).
    """
    m = model.m
    if rotation is None:
        k = np.arange(m)
        rotation = np.exp(2j * np.pi * np.outer(k, k) / m) / np.sqrt(m)
    a_prime = rotation @ np.diag(_distinct_values(m)) @ rotation.conj().T
    return commutator_norm(a, a_prime)


def expectation_consistency(model: MeasurementModel, b: ComplexOperator, state) -> float:
    """``|<psi(t)| b |psi(t)> - <psi(t_in)| b(t) |psi(t_in)>|``."""
    state = state if isinstance(state, SystemState) else SystemState(state)
    full = embed(b, model.m)
    psi_t = schrodinger_evolve(model, state)
    schrodinger = complex(psi_t.conj() @ (full @ psi_t))
    psi_in = ready_product(state.psi, model.m)
    heisenberg = complex(psi_in.conj() @ (evolve_operator(model, b).op @ psi_in))
    return abs(schrodinger - heisenberg)
