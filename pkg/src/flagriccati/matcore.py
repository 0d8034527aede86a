"""Dense complex matrix helpers shared by the rest of the package.

Matrices are plain ``numpy`` complex arrays. The functions here validate what
they are given (finite entries, Hermiticity, positive definiteness) and fail
loudly instead of regularizing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import IndexOutOfRange, NotHermitian, NotPositiveDefinite, SingularMatrix

HERMITIAN_TOL = 1e-12
EIGEN_FLOOR = 1e-12
SINGULAR_FLOOR = 1e-12


@dataclass(frozen=True)
class BlockPartition:
    """Ordered block sizes ``(n_1, ..., n_r)`` of an ``N x N`` matrix."""

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if any(s < 1 for s in sizes):
            raise ValueError(f"block sizes must be positive, got {sizes}")
        if sum(sizes) < 2:
            raise ValueError(f"partition total must be at least 2, got {sizes}")
        object.__setattr__(self, "sizes", sizes)

    @classmethod
    def of(cls, sizes: "BlockPartition | Sequence[int]") -> "BlockPartition":
        return sizes if isinstance(sizes, BlockPartition) else cls(tuple(sizes))

    @property
    def total(self) -> int:
        return sum(self.sizes)

    @property
    def nblocks(self) -> int:
        return len(self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        return tuple(int(x) for x in np.concatenate(([0], np.cumsum(self.sizes))))

    def slice(self, i: int) -> slice:
        if not 0 <= i < self.nblocks:
            raise IndexOutOfRange(f"block index {i} out of range for {self.nblocks} blocks")
        off = self.offsets
        return slice(off[i], off[i + 1])

    def __iter__(self):
        return iter(self.sizes)

    def __len__(self):
        return len(self.sizes)


def as_matrix(A, square: bool = False) -> np.ndarray:
    """Return ``A`` as a 2-D complex array, rejecting NaN/Inf entries."""
    M = np.asarray(A, dtype=complex)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {M.shape}")
    if square and M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def as_hermitian(A, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Validate ``A`` as Hermitian and return its symmetrized copy.

    Defects up to ``tol * (1 + max|A|)`` are rounding noise and get removed by
    ``(A + A^H) / 2``; anything larger raises :class:`NotHermitian`.
    """
    M = as_matrix(A, square=True)
    defect = np.max(np.abs(M - M.conj().T), initial=0.0)
    if defect > tol * (1.0 + np.max(np.abs(M), initial=0.0)):
        raise NotHermitian(defect)
    return 0.5 * (M + M.conj().T)


def dagger(A: np.ndarray) -> np.ndarray:
    return A.conj().T


def hpd_inv_sqrt(A, eigen_floor: float = EIGEN_FLOOR) -> np.ndarray:
    """Principal inverse square root of a Hermitian positive-definite matrix.

    Computed from the unitary eigendecomposition ``A = W diag(w) W^H`` as
    ``W diag(w^{-1/2}) W^H``. Eigenvalues at or below ``eigen_floor`` times
    the largest one raise :class:`NotPositiveDefinite`.
    """
    A = as_hermitian(A)
    w, W = np.linalg.eigh(A)
    if w[-1] <= 0 or w[0] <= eigen_floor * w[-1]:
        raise NotPositiveDefinite(w[0])
    B = (W * (1.0 / np.sqrt(w))) @ W.conj().T
    return 0.5 * (B + B.conj().T)


def hpd_sqrt(A, eigen_floor: float = EIGEN_FLOOR) -> np.ndarray:
    A = as_hermitian(A)
    w, W = np.linalg.eigh(A)
    if w[-1] <= 0 or w[0] <= eigen_floor * w[-1]:
        raise NotPositiveDefinite(w[0])
    B = (W * np.sqrt(w)) @ W.conj().T
    return 0.5 * (B + B.conj().T)


def polar_unitary(A, floor: float = SINGULAR_FLOOR) -> np.ndarray:
    """Nearest unitary to ``A`` in Frobenius norm, ``A (A^H A)^{-1/2}``."""
    A = as_matrix(A, square=True)
    smin = np.linalg.svd(A, compute_uv=False)[-1]
    if smin <= floor:
        raise SingularMatrix(smin)
    return A @ hpd_inv_sqrt(A.conj().T @ A, eigen_floor=0.0)


def unitarity_defect(U) -> float:
    """Frobenius norm of ``U^H U - I``."""
    U = np.asarray(U)
    return float(np.linalg.norm(U.conj().T @ U - np.eye(U.shape[1])))


def block(A, p: BlockPartition | Sequence[int], i: int, j: int) -> np.ndarray:
    """The ``(i, j)`` sub-block of ``A`` under partition ``p``."""
    p = BlockPartition.of(p)
    A = np.asarray(A)
    if A.shape != (p.total, p.total):
        raise ValueError(f"matrix shape {A.shape} does not match partition {p.sizes}")
    return A[p.slice(i), p.slice(j)]


def block_diag(blocks: Sequence[np.ndarray]) -> np.ndarray:
    blocks = [np.atleast_2d(np.asarray(b, dtype=complex)) for b in blocks]
    n = sum(b.shape[0] for b in blocks)
    m = sum(b.shape[1] for b in blocks)
    out = np.zeros((n, m), dtype=complex)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary from the QR decomposition of a Ginibre matrix."""
    G = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
    Q, R = np.linalg.qr(G)
    d = np.diag(R)
    return Q * (d / np.abs(d))


def random_hpd(n: int, rng: np.random.Generator, shift: float = 0.5) -> np.ndarray:
    G = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return G @ G.conj().T + shift * np.eye(n)
