"""Alternative bases for the post-measurement state and when they are
genuinely different.

Bases are stored as matrices whose *columns* are the basis vectors:
``s_basis[:, j]`` is the primed system vector for branch ``j`` and
``o_basis[:, i]`` the primed apparatus vector with O-index ``i`` (column 0
is the ready state).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidDimension
from .measurement import MeasurementModel, ready_product
from .tensor import haar_random_unitary

__all__ = [
    "BasisPair",
    "EquivalenceWitness",
    "NotEquivalent",
    "SearchResult",
    "unprimed_bases",
    "hadamard_primed_bases",
    "apply_witness",
    "verify_M2_for_basis",
    "match_to_unprimed",
    "random_basis_search",
]

# Overlap thresholds for reading a permutation off an overlap matrix.
MATCH_HIGH = 1.0 - 1e-6
MATCH_LOW = 1e-6


def _orthonormality_defect(basis: np.ndarray) -> float:
    return float(np.linalg.norm(basis.conj().T @ basis - np.eye(basis.shape[1])))


@dataclass(frozen=True, eq=False)
class BasisPair:
    s_basis: np.ndarray
    o_basis: np.ndarray
    tol: float = 1e-10

    def __post_init__(self):
        s = np.array(self.s_basis, dtype=np.complex128, copy=True)
        o = np.array(self.o_basis, dtype=np.complex128, copy=True)
        m = s.shape[0]
        if s.shape != (m, m) or o.shape != (m + 1, m + 1):
            raise InvalidDimension(f"need an MxM system basis and (M+1)x(M+1) apparatus basis, got {s.shape}, {o.shape}")
        if _orthonormality_defect(s) > self.tol:
            raise ValueError("system basis is not orthonormal")
        if _orthonormality_defect(o) > self.tol:
            raise ValueError("apparatus basis is not orthonormal")
        ready = np.zeros(m + 1)
        ready[0] = 1.0
        if np.linalg.norm(o[:, 0] - ready) > self.tol:
            raise ValueError("primed ready state must equal the unprimed ready state")
        s.setflags(write=False)
        o.setflags(write=False)
        object.__setattr__(self, "s_basis", s)
        object.__setattr__(self, "o_basis", o)

    @property
    def m(self) -> int:
        return self.s_basis.shape[0]


@dataclass(frozen=True)
class EquivalenceWitness:
    """``|S':j> = phases[j] |S:perm[j]>`` and ``|O':j+1> = |O:perm[j]+1>``."""

    permutation: tuple
    phases: tuple

    @property
    def phase_angles(self) -> tuple:
        """Phase arguments in the principal branch (-pi, pi]."""
        out = []
        for a in self.phases:
            ang = math.atan2(a.imag, a.real)
            out.append(math.pi if ang <= -math.pi else ang)
        return tuple(out)

    def __bool__(self):
        return True


@dataclass(frozen=True)
class NotEquivalent:
    reason: str
    overlaps: tuple = ()

    def __bool__(self):
        return False


def unprimed_bases(m: int) -> BasisPair:
    return BasisPair(np.eye(m), np.eye(m + 1))


def hadamard_primed_bases(model: MeasurementModel) -> BasisPair:
    """The rotated bases of the two-outcome ambiguity example."""
    if model.m != 2:
        raise InvalidDimension("the Hadamard rotation example needs m = 2")
    r = 1.0 / math.sqrt(2.0)
    s = np.array([[r, r], [r, -r]])
    o = np.array([[1.0, 0.0, 0.0], [0.0, r, r], [0.0, r, -r]])
    return BasisPair(s, o)


def apply_witness(m: int, permutation: Sequence[int], phases: Sequence[complex]) -> BasisPair:
    """Build the primed bases described by a permutation/phase witness."""
    perm = [int(p) for p in permutation]
    if sorted(perm) != list(range(m)) or len(phases) != m:
        raise ValueError("witness must be a permutation of 0..m-1 with m phases")
    s = np.zeros((m, m), dtype=np.complex128)
    o = np.zeros((m + 1, m + 1), dtype=np.complex128)
    o[0, 0] = 1.0
    for j, (p, a) in enumerate(zip(perm, phases)):
        s[p, j] = a
        o[p + 1, j + 1] = 1.0
    return BasisPair(s, o)


def verify_M2_for_basis(model: MeasurementModel, bp: BasisPair) -> list:
    """Per-branch residuals ``|| U |O:0>|S':j> - |O':j>|S':j> ||``."""
    if bp.m != model.m:
        raise InvalidDimension("basis pair and model have different dimensions")
    u = model.u.data
    out = []
    for j in range(model.m):
        s_vec = bp.s_basis[:, j]
        lhs = u @ ready_product(s_vec, model.m)
        rhs = np.kron(bp.o_basis[:, j + 1], s_vec)
        out.append(float(np.linalg.norm(lhs - rhs)))
    return out


def _read_permutation(overlaps: np.ndarray):
    """Column-wise 0/1 overlap structure -> permutation, or None."""
    mags = np.abs(overlaps)
    perm = []
    for j in range(mags.shape[1]):
        col = mags[:, j]
        k = int(np.argmax(col))
        others = np.delete(col, k)
        if col[k] <= MATCH_HIGH or (others.size and others.max() >= MATCH_LOW):
            return None
        perm.append(k)
    if len(set(perm)) != len(perm):
        return None
    return perm


def match_to_unprimed(model: MeasurementModel, bp: BasisPair, tol: float = None):
    """Decide whether primed bases are the unprimed ones up to relabeling and
    unimodular phases on the system vectors.

    Returns an :class:`EquivalenceWitness` or :class:`NotEquivalent`.
    """
    tol = model.tol.eq_tol if tol is None else tol
    m = model.m
    if bp.m != m:
        raise InvalidDimension("basis pair and model have different dimensions")
    s_overlaps = bp.s_basis  # <S:k|S':j> since the unprimed basis is the standard one
    perm = _read_permutation(s_overlaps)
    if perm is None:
        return NotEquivalent(
            "system overlaps are not a phase-scaled permutation",
            tuple(tuple(float(x) for x in row) for row in np.abs(s_overlaps)),
        )
    o_overlaps = bp.o_basis[:, 1:]
    o_perm = _read_permutation(o_overlaps)
    if o_perm is None or [p - 1 for p in o_perm] != perm:
        return NotEquivalent(
            "apparatus overlaps do not follow the system permutation",
            tuple(tuple(float(x) for x in row) for row in np.abs(o_overlaps)),
        )
    phases = []
    for j, p in enumerate(perm):
        a = complex(s_overlaps[p, j])
        a /= abs(a)
        s_err = np.linalg.norm(bp.s_basis[:, j] - a * np.eye(m)[:, p])
        o_err = np.linalg.norm(bp.o_basis[:, j + 1] - np.eye(m + 1)[:, p + 1])
        if s_err > tol or o_err > tol:
            return NotEquivalent(f"branch {j} deviates from its matched basis vector by {max(s_err, o_err):.3e}")
        phases.append(a)
    return EquivalenceWitness(tuple(perm), tuple(phases))


@dataclass(frozen=True)
class SearchResult:
    trials: int
    satisfying: int
    equivalent: int
    counterexamples: int
    ensemble: str


def _random_pair(m: int, rng: np.random.Generator, ensemble: str) -> BasisPair:
    if ensemble == "haar":
        s = haar_random_unitary(m, rng)
        o = np.eye(m + 1, dtype=np.complex128)
        o[1:, 1:] = haar_random_unitary(m, rng)
        return BasisPair(s, o)
    if ensemble == "structured":
        # Permuted and phased unprimed bases; with probability 1/2 a random
        # pair of branches is additionally mixed by a finite rotation.
        perm = rng.permutation(m)
        phases = np.exp(1j * rng.uniform(-math.pi, math.pi, m))
        bp = apply_witness(m, perm, phases)
        if rng.random() < 0.5:
            return bp
        j, k = rng.choice(m, size=2, replace=False)
        theta = rng.uniform(0.05, math.pi / 2)
        rot = np.eye(m, dtype=np.complex128)
        rot[[j, j, k, k], [j, k, j, k]] = [math.cos(theta), -math.sin(theta), math.sin(theta), math.cos(theta)]
        s = bp.s_basis @ rot
        orot = np.eye(m + 1, dtype=np.complex128)
        orot[1:, 1:] = rot
        return BasisPair(s, bp.o_basis @ orot)
    raise ValueError(f"unknown ensemble {ensemble!r}")


def random_basis_search(
    model: MeasurementModel,
    trials: int,
    seed: int = 0,
    tol: float = 1e-6,
    ensemble: str = "haar",
) -> SearchResult:
    """Try to falsify the Schrodinger-picture uniqueness statement.

    Draws primed basis pairs (ready state held fixed), keeps those whose
    branches satisfy the measurement condition within ``tol`` and counts the
    ones that nonetheless fail to match the unprimed bases.  A correct
    statement yields zero counterexamples.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    rng = np.random.default_rng(seed)
    satisfying = equivalent = counterexamples = 0
    for _ in range(trials):
        bp = _random_pair(model.m, rng, ensemble)
        if max(verify_M2_for_basis(model, bp)) > tol:
            continue
        satisfying += 1
        if match_to_unprimed(model, bp, tol):
            equivalent += 1
        else:
            counterexamples += 1
    return SearchResult(trials, satisfying, equivalent, counterexamples, ensemble)
