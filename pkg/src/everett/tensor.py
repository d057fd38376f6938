"""Dense complex linear algebra on the small spaces of a measurement model.

Three spaces appear throughout the package:

* ``S``  -- the measured system, dimension ``M``;
* ``O``  -- the apparatus ("observer"), dimension ``M + 1``, index 0 is the
  ready state;
* ``OS`` -- the composite space, dimension ``M (M + 1)``.

Composite kets are ordered O-factor-major: the basis vector
``|O:o>|S:s>`` sits at index ``k = o * M + s``.  This is exactly the
ordering produced by ``np.kron(A_O, B_S)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import ConvergenceFailure, DimensionMismatch, InvalidDimension, NotHermitian

__all__ = [
    "Space",
    "ToleranceProfile",
    "DEFAULT_TOLERANCES",
    "ComplexOperator",
    "composite_index",
    "basis_ket",
    "kron",
    "hermitian_eig",
    "unitary_exp",
    "conditional_blocks",
    "reassemble_blocks",
    "haar_random_unitary",
    "random_hermitian",
    "frob_dist",
]


class Space(str, enum.Enum):
    S = "S"
    O = "O"  # noqa: E741
    OS = "OS"


def _m_from_dim(space: Space, dim: int) -> int:
    """Recover the system dimension M implied by an operator's tag and size."""
    if space is Space.S:
        return dim
    if space is Space.O:
        return dim - 1
    # M (M + 1) = dim
    m = int(round((math.sqrt(1 + 4 * dim) - 1) / 2))
    if m < 1 or m * (m + 1) != dim:
        raise DimensionMismatch(f"dimension {dim} is not of the form M(M+1)")
    return m


@dataclass(frozen=True)
class ToleranceProfile:
    eq_tol: float = 1e-10
    residual_tol: float = 1e-8
    degeneracy_gap: float = 1e-6
    max_retries: int = 8

    def __post_init__(self):
        for name in ("eq_tol", "residual_tol", "degeneracy_gap", "max_retries"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and strictly positive, got {value!r}")
        if self.eq_tol > self.residual_tol:
            raise ValueError("eq_tol must not exceed residual_tol")
        if int(self.max_retries) != self.max_retries:
            raise ValueError("max_retries must be an integer")

    def replace(self, **overrides) -> "ToleranceProfile":
        values = {
            "eq_tol": self.eq_tol,
            "residual_tol": self.residual_tol,
            "degeneracy_gap": self.degeneracy_gap,
            "max_retries": self.max_retries,
        }
        unknown = set(overrides) - set(values)
        if unknown:
            raise ValueError(f"unknown tolerance keys: {sorted(unknown)}")
        values.update(overrides)
        values["max_retries"] = int(values["max_retries"])
        return ToleranceProfile(**values)

    def as_dict(self) -> dict:
        return {
            "eq_tol": self.eq_tol,
            "residual_tol": self.residual_tol,
            "degeneracy_gap": self.degeneracy_gap,
            "max_retries": self.max_retries,
        }


DEFAULT_TOLERANCES = ToleranceProfile()


@dataclass(frozen=True, eq=False)
class ComplexOperator:
    """Square complex matrix tagged with the space it acts on.

    The underlying array is copied on construction and marked read-only, so
    operators can be shared freely.
    """

    data: np.ndarray
    space: Space = field(default=Space.OS)

    def __post_init__(self):
        arr = np.array(self.data, dtype=np.complex128, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] == 0:
            raise DimensionMismatch(f"operator must be a non-empty square matrix, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("operator entries must be finite")
        space = Space(self.space)
        _m_from_dim(space, arr.shape[0])
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)
        object.__setattr__(self, "space", space)

    @property
    def dim(self) -> int:
        return self.data.shape[0]

    @property
    def m(self) -> int:
        return _m_from_dim(self.space, self.dim)

    @classmethod
    def identity(cls, dim: int, space: Space = Space.OS) -> "ComplexOperator":
        return cls(np.eye(dim), space)

    @classmethod
    def zeros(cls, dim: int, space: Space = Space.OS) -> "ComplexOperator":
        return cls(np.zeros((dim, dim)), space)

    def dag(self) -> "ComplexOperator":
        return ComplexOperator(self.data.conj().T, self.space)

    def _check(self, other: "ComplexOperator"):
        if not isinstance(other, ComplexOperator):
            return NotImplemented
        if other.space is not self.space or other.dim != self.dim:
            raise DimensionMismatch(
                f"operands act on different spaces: {self.space.value}[{self.dim}] vs "
                f"{other.space.value}[{other.dim}]"
            )
        return None

    def __matmul__(self, other):
        if isinstance(other, ComplexOperator):
            self._check(other)
            return ComplexOperator(self.data @ other.data, self.space)
        vec = np.asarray(other, dtype=np.complex128)
        if vec.shape != (self.dim,):
            raise DimensionMismatch(f"vector of length {vec.shape} does not fit {self.space.value}[{self.dim}]")
        return self.data @ vec

    def __add__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexOperator(self.data + other.data, self.space)

    def __sub__(self, other):
        if self._check(other) is NotImplemented:
            return NotImplemented
        return ComplexOperator(self.data - other.data, self.space)

    def __mul__(self, scalar):
        if isinstance(scalar, ComplexOperator):
            return NotImplemented
        return ComplexOperator(complex(scalar) * self.data, self.space)

    __rmul__ = __mul__

    def __neg__(self):
        return ComplexOperator(-self.data, self.space)

    def __repr__(self):
        return f"ComplexOperator(space={self.space.value}, dim={self.dim})"

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.data))

    def is_hermitian(self, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
        scale = max(1.0, self.frobenius_norm())
        return float(np.linalg.norm(self.data - self.data.conj().T)) <= tol * scale

    def is_unitary(self, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
        gram = self.data.conj().T @ self.data
        return float(np.linalg.norm(gram - np.eye(self.dim))) <= tol

    def is_projector(self, tol: float = DEFAULT_TOLERANCES.eq_tol) -> bool:
        if not self.is_hermitian(tol):
            return False
        return float(np.linalg.norm(self.data @ self.data - self.data)) <= tol


def _matrix(x) -> np.ndarray:
    if isinstance(x, ComplexOperator):
        return x.data
    return np.asarray(x, dtype=np.complex128)


def _like(template, arr: np.ndarray):
    """Wrap ``arr`` the same way ``template`` was wrapped."""
    if isinstance(template, ComplexOperator):
        return ComplexOperator(arr, template.space)
    return arr


def composite_index(o: int, s: int, m: int) -> int:
    """Index of ``|O:o>|S:s>`` in the composite basis (``s`` is 0-based)."""
    if not (0 <= o <= m and 0 <= s < m):
        raise IndexError(f"(o={o}, s={s}) out of range for M={m}")
    return o * m + s


def basis_ket(index: int, dim: int) -> np.ndarray:
    ket = np.zeros(dim, dtype=np.complex128)
    ket[index] = 1.0
    return ket


def kron(a: ComplexOperator, b: ComplexOperator) -> ComplexOperator:
    """Tensor product ``a (x) b`` of an apparatus and a system operator."""
    if not isinstance(a, ComplexOperator) or not isinstance(b, ComplexOperator):
        raise DimensionMismatch("kron expects tagged ComplexOperator arguments")
    if a.space is not Space.O or b.space is not Space.S:
        raise DimensionMismatch(
            f"kron expects an O-space then an S-space operator, got {a.space.value}, {b.space.value}"
        )
    if a.dim != b.dim + 1:
        raise DimensionMismatch(f"O-space dimension {a.dim} must be S-space dimension {b.dim} plus one")
    return ComplexOperator(np.kron(a.data, b.data), Space.OS)


# -- Hermitian eigensolver ---------------------------------------------------

_EPS = np.finfo(float).eps


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(a.diagonal())))


def _jacobi_hermitian(a: np.ndarray, max_sweeps: int):
    """Cyclic complex Jacobi; returns (diagonal, eigenvector matrix)."""
    n = a.shape[0]
    a = a.copy()
    v = np.eye(n, dtype=np.complex128)
    norm = float(np.linalg.norm(a))
    if n == 1 or norm == 0.0:
        return a.diagonal().real.copy(), v
    target = 2.0 * _EPS * norm
    skip = 1e-3 * _EPS * norm
    for _ in range(max_sweeps):
        off = _off_norm(a)
        if off <= target:
            return a.diagonal().real.copy(), v
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                r = abs(apq)
                if r <= skip:
                    continue
                # Phase the q-th vector so the (p, q) entry becomes real, then
                # apply the real symmetric Jacobi rotation that annihilates it.
                phase = apq / r
                app = a[p, p].real
                aqq = a[q, q].real
                theta = 0.5 * math.atan2(2.0 * r, aqq - app)
                c, s = math.cos(theta), math.sin(theta)
                rot = np.array([[c, s], [-s * phase.conjugate(), c * phase.conjugate()]])
                idx = [p, q]
                a[:, idx] = a[:, idx] @ rot
                a[idx, :] = rot.conj().T @ a[idx, :]
                v[:, idx] = v[:, idx] @ rot
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real
    off = _off_norm(a)
    if off <= 64 * target:
        return a.diagonal().real.copy(), v
    raise ConvergenceFailure(f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})")


def hermitian_eig(h, tol: float = DEFAULT_TOLERANCES.eq_tol, max_sweeps: int = 60):
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    Returns ``(eigenvalues, eigenvectors)`` with eigenvalues ascending (ties
    keep their index order) and eigenvectors as the columns of a unitary
    matrix.  If ``h`` is a :class:`ComplexOperator` the eigenvector matrix is
    returned as one, tagged with the same space.
    """
    mat = _matrix(h)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {mat.shape}")
    if not np.all(np.isfinite(mat)):
        raise ValueError("matrix entries must be finite")
    scale = max(1.0, float(np.linalg.norm(mat)))
    if float(np.linalg.norm(mat - mat.conj().T)) > tol * scale:
        raise NotHermitian("matrix is not Hermitian within tolerance")
    herm = 0.5 * (mat + mat.conj().T)
    evals, evecs = _jacobi_hermitian(herm, max_sweeps)
    order = np.argsort(evals, kind="stable")
    return evals[order], _like(h, evecs[:, order])


def unitary_exp(h, tau: float, tol: float = DEFAULT_TOLERANCES.eq_tol):
    """``exp(-i h tau)`` for Hermitian ``h``, built from its eigendecomposition."""
    if not math.isfinite(tau):
        raise ValueError("tau must be finite")
    evals, evecs = hermitian_eig(h, tol)
    vecs = _matrix(evecs)
    u = (vecs * np.exp(-1j * evals * tau)) @ vecs.conj().T
    return _like(h, u)


# -- conditional blocks ------------------------------------------------------

def conditional_blocks(b: ComplexOperator) -> np.ndarray:
    """Slice a composite operator by apparatus indices.

    Returns an array ``c`` of shape ``(M+1, M+1, M, M)`` with
    ``c[m, n] = <O:m| B |O:n>``, an operator on S.
    """
    if not isinstance(b, ComplexOperator) or b.space is not Space.OS:
        raise DimensionMismatch("conditional_blocks expects a composite (OS) operator")
    m = b.m
    return b.data.reshape(m + 1, m, m + 1, m).transpose(0, 2, 1, 3).copy()


def reassemble_blocks(blocks: np.ndarray) -> ComplexOperator:
    """Inverse of :func:`conditional_blocks`."""
    blocks = np.asarray(blocks, dtype=np.complex128)
    if blocks.ndim != 4 or blocks.shape[0] != blocks.shape[1] or blocks.shape[2] != blocks.shape[3]:
        raise DimensionMismatch(f"bad block grid shape {blocks.shape}")
    if blocks.shape[0] != blocks.shape[2] + 1:
        raise DimensionMismatch("block grid must be (M+1) x (M+1) blocks of size M x M")
    m = blocks.shape[2]
    dim = m * (m + 1)
    return ComplexOperator(blocks.transpose(0, 2, 1, 3).reshape(dim, dim), Space.OS)


# -- random ensembles --------------------------------------------------------

Seed = Union[int, np.random.Generator, None]


def _rng(seed: Seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def haar_random_unitary(n: int, seed: Seed = None) -> np.ndarray:
    """Haar-distributed ``n x n`` unitary (Ginibre draw, QR, phase-fixed diagonal)."""
    if n < 1:
        raise InvalidDimension("n must be at least 1")
    rng = _rng(seed)
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = r.diagonal()
    return q * (d / np.abs(d))


def random_hermitian(n: int, seed: Seed = None) -> np.ndarray:
    rng = _rng(seed)
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (z + z.conj().T)


def frob_dist(a, b) -> float:
    if isinstance(a, ComplexOperator) and isinstance(b, ComplexOperator):
        if a.space is not b.space or a.dim != b.dim:
            raise DimensionMismatch("operators act on different spaces")
    x, y = _matrix(a), _matrix(b)
    if x.shape != y.shape:
        raise DimensionMismatch(f"shape mismatch {x.shape} vs {y.shape}")
    return float(np.linalg.norm(x - y))
