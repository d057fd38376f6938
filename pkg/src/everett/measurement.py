"""Ideal (von Neumann) measurement models.

Branch labels are 0-based in code: branch ``j`` pairs the system basis state
stored at S-index ``j`` with the apparatus record state stored at O-index
``j + 1``.  O-index 0 is the ready state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ConditionM2Violation, DegenerateSpectrum, InvalidDimension, NotNormalized
from .tensor import (
    DEFAULT_TOLERANCES,
    ComplexOperator,
    Space,
    ToleranceProfile,
    basis_ket,
    kron,
    unitary_exp,
)

__all__ = [
    "MeasurementModel",
    "SystemState",
    "ConditionReport",
    "NotBranchForm",
    "branch_generator",
    "build_interaction_hamiltonian",
    "build_model",
    "verify_condition_M2",
    "verify_condition_M4",
    "schrodinger_evolve",
    "check_branch_form",
    "record_operator",
    "pointer_operator",
    "degenerate_pairs",
]


def degenerate_pairs(values: Sequence[complex], gap: float) -> list:
    """Index pairs ``(i, j)``, ``i < j``, whose values lie within ``gap``."""
    vals = list(values)
    return [
        (i, j)
        for i in range(len(vals))
        for j in range(i + 1, len(vals))
        if abs(vals[i] - vals[j]) <= gap
    ]


def o_ket(index: int, m: int) -> np.ndarray:
    return basis_ket(index, m + 1)


def s_ket(index: int, m: int) -> np.ndarray:
    return basis_ket(index, m)


def branch_ket(j: int, m: int) -> np.ndarray:
    """``|O:j+1>|S:j>`` in composite ordering."""
    return np.kron(o_ket(j + 1, m), s_ket(j, m))


def ready_product(psi: np.ndarray, m: int) -> np.ndarray:
    """``|O:0> (x) psi``."""
    return np.kron(o_ket(0, m), psi)


def branch_generator(i: int, m: int, kappa: float) -> ComplexOperator:
    """Apparatus generator rotating the ready state into record ``i`` (1-based).

    ``h = i kappa (|O:i><O:0| - |O:0><O:i|)``.
    """
    if not 1 <= i <= m:
        raise InvalidDimension(f"branch index {i} outside 1..{m}")
    h = np.zeros((m + 1, m + 1), dtype=np.complex128)
    h[i, 0] = 1j * kappa
    h[0, i] = -1j * kappa
    return ComplexOperator(h, Space.O)


def projector_s(j: int, m: int) -> ComplexOperator:
    p = np.zeros((m, m), dtype=np.complex128)
    p[j, j] = 1.0
    return ComplexOperator(p, Space.S)


def build_interaction_hamiltonian(m: int, kappa: float) -> ComplexOperator:
    """``H = sum_i h_i (x) P_i`` for the standard family of branch generators."""
    if m < 2:
        raise InvalidDimension(f"system dimension must be at least 2, got {m}")
    if not (kappa > 0 and math.isfinite(kappa)):
        raise ValueError(f"kappa must be positive and finite, got {kappa!r}")
    dim = m * (m + 1)
    h = ComplexOperator.zeros(dim)
    for j in range(m):
        h = h + kron(branch_generator(j + 1, m, kappa), projector_s(j, m))
    return h


def record_operator(beta: Sequence[float], m: Optional[int] = None) -> ComplexOperator:
    """Apparatus operator diagonal in the record basis, ``b|O:i> = beta_i |O:i>``."""
    beta = np.asarray(beta, dtype=np.complex128)
    if m is not None and beta.shape != (m + 1,):
        raise InvalidDimension(f"need {m + 1} record values, got {beta.shape[0]}")
    return ComplexOperator(np.diag(beta), Space.O)


def pointer_operator(alpha: Sequence[float]) -> ComplexOperator:
    """System operator diagonal in the pointer basis, ``a|S:i> = alpha_i |S:i>``."""
    return ComplexOperator(np.diag(np.asarray(alpha, dtype=np.complex128)), Space.S)


@dataclass(frozen=True, eq=False)
class MeasurementModel:
    m: int
    duration: float
    kappa: float
    alpha: tuple
    beta: tuple
    hamiltonian: ComplexOperator
    u: ComplexOperator
    u_branches: tuple
    tol: ToleranceProfile = field(default=DEFAULT_TOLERANCES)

    ready_index = 0

    @property
    def dim_o(self) -> int:
        return self.m + 1

    @property
    def dim(self) -> int:
        return self.m * (self.m + 1)

    @property
    def ready(self) -> np.ndarray:
        return o_ket(0, self.m)

    def pointer_operator(self) -> ComplexOperator:
        return pointer_operator(self.alpha)

    def record_operator(self) -> ComplexOperator:
        return record_operator(self.beta, self.m)

    def projector(self, j: int) -> ComplexOperator:
        return projector_s(j, self.m)

    def with_unitary(self, u) -> "MeasurementModel":
        """Copy of the model with its evolution operator replaced (no checks run)."""
        if not isinstance(u, ComplexOperator):
            u = ComplexOperator(u, Space.OS)
        if u.dim != self.dim:
            raise InvalidDimension(f"unitary must be {self.dim}x{self.dim}")
        return MeasurementModel(
            m=self.m,
            duration=self.duration,
            kappa=self.kappa,
            alpha=self.alpha,
            beta=self.beta,
            hamiltonian=self.hamiltonian,
            u=u,
            u_branches=self.u_branches,
            tol=self.tol,
        )


def _check_distinct(name: str, values, expected_len: int, gap: float):
    if len(values) != expected_len:
        raise InvalidDimension(f"{name} must have {expected_len} entries, got {len(values)}")
    if not all(math.isfinite(v) for v in values):
        raise ValueError(f"{name} entries must be finite")
    pairs = degenerate_pairs(values, gap)
    if pairs:
        raise DegenerateSpectrum(f"{name} has coinciding values at index pairs {pairs}")


def build_model(
    m: int,
    duration: float = 1.0,
    alpha: Optional[Sequence[float]] = None,
    beta: Optional[Sequence[float]] = None,
    tol: ToleranceProfile = DEFAULT_TOLERANCES,
) -> MeasurementModel:
    """Construct an ideal measurement whose unitary satisfies M2.

    The coupling is chosen as ``kappa = pi / (2 * duration)`` so that each
    branch rotation takes the ready state exactly onto its record state.
    Pointer values default to ``1..m`` and record values to ``0..m``.
    """
    if m < 2:
        raise InvalidDimension(f"system dimension must be at least 2, got {m}")
    if not (duration > 0 and math.isfinite(duration)):
        raise ValueError(f"duration must be positive and finite, got {duration!r}")
    alpha = tuple(float(a) for a in (range(1, m + 1) if alpha is None else alpha))
    beta = tuple(float(b) for b in (range(0, m + 1) if beta is None else beta))
    _check_distinct("alpha", alpha, m, tol.degeneracy_gap)
    _check_distinct("beta", beta, m + 1, tol.degeneracy_gap)

    kappa = math.pi / (2.0 * duration)
    h = build_interaction_hamiltonian(m, kappa)
    u = unitary_exp(h, duration, tol.eq_tol)
    u_branches = tuple(unitary_exp(branch_generator(i, m, kappa), duration, tol.eq_tol) for i in range(1, m + 1))
    model = MeasurementModel(
        m=m,
        duration=float(duration),
        kappa=kappa,
        alpha=alpha,
        beta=beta,
        hamiltonian=h,
        u=u,
        u_branches=u_branches,
        tol=tol,
    )
    if not u.is_unitary(tol.eq_tol):
        raise ConditionM2Violation("constructed evolution operator is not unitary")
    report = verify_condition_M2(model)
    if not report.passed:
        raise ConditionM2Violation(f"constructed model fails M2 (residual {report.residual:.3e})")
    return model


@dataclass(frozen=True)
class ConditionReport:
    condition: str
    passed: bool
    residual: float
    tolerance: float
    detail: dict = field(default_factory=dict)


def verify_condition_M2(model: MeasurementModel, u=None) -> ConditionReport:
    """Check ``U |O:0>|S:i> = |O:i>|S:i>`` for every branch.

    ``u`` overrides the model's own evolution operator, so any externally
    supplied unitary can be tested against the model's bases.
    """
    u_mat = (model.u if u is None else u)
    u_mat = u_mat.data if isinstance(u_mat, ComplexOperator) else np.asarray(u_mat, dtype=np.complex128)
    m = model.m
    residuals = []
    for j in range(m):
        out = u_mat @ ready_product(s_ket(j, m), m)
        residuals.append(float(np.linalg.norm(out - branch_ket(j, m))))
    worst = max(residuals)
    tol = model.tol.eq_tol
    return ConditionReport("M2", worst <= tol, worst, tol, {"per_branch": residuals})


def verify_condition_M4(model: MeasurementModel, b) -> ConditionReport:
    """Check that ``b`` has every record state ``|O:i>`` as an eigenvector
    with pairwise distinct eigenvalues.

    ``residual`` is the larger of the worst eigenvector residual and a
    degeneracy deficit ``max(0, 1 - min_gap / degeneracy_gap)``, so that
    ``passed`` is exactly ``residual <= tolerance``.
    """
    b_mat = b.data if isinstance(b, ComplexOperator) else np.asarray(b, dtype=np.complex128)
    if isinstance(b, ComplexOperator) and b.space is not Space.O:
        raise InvalidDimension("M4 operator must act on the apparatus space")
    m = model.m
    if b_mat.shape != (m + 1, m + 1):
        raise InvalidDimension(f"M4 operator must be {m + 1}x{m + 1}")
    values = []
    eig_residuals = []
    for i in range(m + 1):
        ket = o_ket(i, m)
        out = b_mat @ ket
        value = complex(out[i])
        values.append(value)
        eig_residuals.append(float(np.linalg.norm(out - value * ket)))
    gap = model.tol.degeneracy_gap
    pairs = degenerate_pairs(values, gap)
    min_gap = min(abs(values[i] - values[j]) for i in range(m + 1) for j in range(i + 1, m + 1))
    deficit = max(0.0, 1.0 - min_gap / gap)
    residual = max(max(eig_residuals), deficit)
    tol = model.tol.eq_tol
    return ConditionReport(
        "M4",
        residual <= tol and not pairs,
        residual,
        tol,
        {
            "eigen_residuals": eig_residuals,
            "record_values": values,
            "min_gap": min_gap,
            "degenerate_pairs": pairs,
        },
    )


@dataclass(frozen=True, eq=False)
class SystemState:
    """Normalized system state ``sum_i psi_i |S:i>``."""

    psi: np.ndarray
    tol: float = DEFAULT_TOLERANCES.eq_tol

    def __post_init__(self):
        psi = np.array(self.psi, dtype=np.complex128, copy=True).reshape(-1)
        if psi.size == 0 or not np.all(np.isfinite(psi)):
            raise NotNormalized("state amplitudes must be finite and non-empty")
        norm = float(np.linalg.norm(psi))
        if abs(norm - 1.0) > self.tol:
            raise NotNormalized(f"state norm {norm!r} differs from 1 by more than {self.tol}")
        psi.setflags(write=False)
        object.__setattr__(self, "psi", psi)

    @property
    def m(self) -> int:
        return self.psi.shape[0]

    @classmethod
    def uniform(cls, m: int) -> "SystemState":
        return cls(np.full(m, 1.0 / math.sqrt(m)))

    @classmethod
    def random(cls, m: int, seed=None) -> "SystemState":
        rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
        z = rng.standard_normal(m) + 1j * rng.standard_normal(m)
        return cls(z / np.linalg.norm(z))


def _as_state(state) -> SystemState:
    return state if isinstance(state, SystemState) else SystemState(state)


def _evolve(model: MeasurementModel, psi) -> np.ndarray:
    """``U (|O:0> (x) psi)`` without any normalization check; linear in ``psi``."""
    psi = np.asarray(psi, dtype=np.complex128)
    if psi.shape != (model.m,):
        raise InvalidDimension(f"state must have {model.m} amplitudes")
    return model.u.data @ ready_product(psi, model.m)


def schrodinger_evolve(model: MeasurementModel, state) -> np.ndarray:
    return _evolve(model, _as_state(state).psi)


@dataclass(frozen=True)
class NotBranchForm:
    residual: float
    norm_defect: float
    reason: str

    def __bool__(self):
        return False


def check_branch_form(psi_t, model: MeasurementModel):
    """Read off branch amplitudes ``c_i = <O:i|<S:i| psi_t``.

    Returns the coefficient array when ``psi_t`` is exactly
    ``sum_i c_i |O:i>|S:i>`` with unit total weight, otherwise a
    :class:`NotBranchForm` value carrying the residual.
    """
    psi_t = np.asarray(psi_t, dtype=np.complex128)
    m = model.m
    if psi_t.shape != (model.dim,):
        raise InvalidDimension(f"composite state must have {model.dim} amplitudes")
    kets = np.stack([branch_ket(j, m) for j in range(m)], axis=1)
    coeffs = kets.conj().T @ psi_t
    residual = float(np.linalg.norm(psi_t - kets @ coeffs))
    norm_defect = abs(float(np.sum(np.abs(coeffs) ** 2)) - 1.0)
    tol = model.tol.eq_tol
    if residual > tol:
        return NotBranchForm(residual, norm_defect, "state has weight outside the branch kets")
    if norm_defect > tol:
        return NotBranchForm(residual, norm_defect, "branch weights do not sum to one")
    return coeffs
