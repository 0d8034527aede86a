"""Unitary frames from flag coordinates.

A point of the flag manifold ``U(N) / U(n_1) x ... x U(n_r)`` is stored as the
strictly-lower blocks of a lower-unipotent coset representative ``F``. Its
unitary frame comes from block Gram-Schmidt on the block columns of ``F``:
in closed form for two and three blocks, recursively for any partition.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import UnsupportedPartition
from .matcore import (
    BlockPartition,
    as_matrix,
    block_diag,
    dagger,
    hpd_inv_sqrt,
    hpd_sqrt,
    unitarity_defect,
)

UNITARY_TOL = 1e-10


def lower_pairs(nblocks: int) -> list[tuple[int, int]]:
    """Strictly-lower block positions in lexicographic (row, col) order."""
    return [(i, j) for i in range(nblocks) for j in range(i)]


@dataclass(frozen=True)
class FlagCoordinates:
    """Strictly-lower blocks of the coset representative.

    ``blocks`` follows :func:`lower_pairs`: ``[Z]`` for two blocks and
    ``[X, Y, Z]`` at positions (1,0), (2,0), (2,1) for three.
    """

    partition: BlockPartition
    blocks: tuple[np.ndarray, ...]

    def __post_init__(self):
        p = BlockPartition.of(self.partition)
        pairs = lower_pairs(p.nblocks)
        if len(self.blocks) != len(pairs):
            raise ValueError(f"expected {len(pairs)} coordinate blocks for partition {p.sizes}, "
                             f"got {len(self.blocks)}")
        frozen = []
        for (i, j), b in zip(pairs, self.blocks):
            b = as_matrix(np.atleast_2d(b)).copy()
            if b.shape != (p.sizes[i], p.sizes[j]):
                raise ValueError(f"block ({i},{j}) has shape {b.shape}, "
                                 f"expected {(p.sizes[i], p.sizes[j])}")
            b.setflags(write=False)
            frozen.append(b)
        object.__setattr__(self, "partition", p)
        object.__setattr__(self, "blocks", tuple(frozen))

    @classmethod
    def zeros(cls, partition) -> "FlagCoordinates":
        p = BlockPartition.of(partition)
        return cls(p, tuple(np.zeros((p.sizes[i], p.sizes[j]), complex)
                            for i, j in lower_pairs(p.nblocks)))

    @classmethod
    def random(cls, partition, rng: np.random.Generator, scale: float = 1.0) -> "FlagCoordinates":
        p = BlockPartition.of(partition)
        blocks = []
        for i, j in lower_pairs(p.nblocks):
            shape = (p.sizes[i], p.sizes[j])
            blocks.append(scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
                          / np.sqrt(2))
        return cls(p, tuple(blocks))

    def get(self, i: int, j: int) -> np.ndarray:
        return self.blocks[lower_pairs(self.partition.nblocks).index((i, j))]

    @property
    def X(self):
        self._need(3)
        return self.blocks[0]

    @property
    def Y(self):
        self._need(3)
        return self.blocks[1]

    @property
    def Z(self):
        if self.partition.nblocks == 2:
            return self.blocks[0]
        self._need(3)
        return self.blocks[2]

    def _need(self, r):
        if self.partition.nblocks != r:
            raise UnsupportedPartition(f"named access needs {r} blocks, have {self.partition.nblocks}")

    def representative(self) -> np.ndarray:
        """The lower-unipotent coset representative ``F`` (``G`` for two blocks)."""
        p = self.partition
        F = np.eye(p.total, dtype=complex)
        for (i, j), b in zip(lower_pairs(p.nblocks), self.blocks):
            F[p.slice(i), p.slice(j)] = b
        return F

    def norm(self) -> float:
        return float(max(np.linalg.norm(b, 2) for b in self.blocks))

    def max_abs_diff(self, other: "FlagCoordinates") -> float:
        return float(max(np.max(np.abs(a - b)) for a, b in zip(self.blocks, other.blocks)))


@dataclass(frozen=True)
class UnitaryFrame:
    partition: BlockPartition
    matrix: np.ndarray

    def __post_init__(self):
        p = BlockPartition.of(self.partition)
        M = as_matrix(self.matrix, square=True).copy()
        if M.shape[0] != p.total:
            raise ValueError(f"frame of size {M.shape[0]} does not match partition {p.sizes}")
        defect = unitarity_defect(M)
        if defect > UNITARY_TOL:
            raise ValueError(f"frame is not unitary (defect {defect:.3e})")
        M.setflags(write=False)
        object.__setattr__(self, "partition", p)
        object.__setattr__(self, "matrix", M)

    def block_column(self, k: int) -> np.ndarray:
        return self.matrix[:, self.partition.slice(k)]


class ProjectionPair(NamedTuple):
    P: np.ndarray
    Q: np.ndarray | None = None


def _require_blocks(c: FlagCoordinates, r: int):
    if c.partition.nblocks != r:
        raise UnsupportedPartition(f"expected {r} blocks, got partition {c.partition.sizes}")


def grassmann_frame(c: FlagCoordinates) -> UnitaryFrame:
    """``[[E, -Z^H], [Z, E]] diag((E + Z^H Z)^{-1/2}, (E + Z Z^H)^{-1/2})``."""
    return UnitaryFrame(c.partition, _grassmann_matrix(c))


def _grassmann_matrix(c: FlagCoordinates) -> np.ndarray:
    _require_blocks(c, 2)
    m, n = c.partition.sizes
    Z = c.Z
    L = np.eye(m) + dagger(Z) @ Z
    M = np.eye(n) + Z @ dagger(Z)
    W = np.block([[np.eye(m), -dagger(Z)], [Z, np.eye(n)]])
    return W @ block_diag([hpd_inv_sqrt(L), hpd_inv_sqrt(M)])


class FlagGram(NamedTuple):
    """Intermediate quantities of the closed-form three-block frame.

    ``lam = E + X^H X + Y^H Y``, ``L = E + Z^H Z``, ``delta = X + Z^H Y`` and
    ``middle = L - delta lam^{-1} delta^H`` are the first two Gram factors.
    ``last`` is the third one, kept as ``gamma^{-1}`` with
    ``gamma = E + Z Z^H + (ZX - Y)(ZX - Y)^H``; ``gamma`` is a sum of positive
    terms while the expanded form cancels catastrophically for large
    coordinates. ``upper`` is the upper-unipotent middle factor of the
    decomposition and ``W = F @ upper`` the unnormalized frame. ``dual_row``
    is the last block row of ``F^{-1}``.
    """

    lam: np.ndarray
    L: np.ndarray
    delta: np.ndarray
    middle: np.ndarray
    gamma: np.ndarray
    last: np.ndarray
    upper: np.ndarray
    W: np.ndarray
    dual_row: np.ndarray


def flag_gram(c: FlagCoordinates) -> FlagGram:
    _require_blocks(c, 3)
    l, m, n = c.partition.sizes
    X, Y, Z = c.blocks
    El, Em, En = np.eye(l), np.eye(m), np.eye(n)

    lam = El + dagger(X) @ X + dagger(Y) @ Y
    L = Em + dagger(Z) @ Z
    delta = X + dagger(Z) @ Y
    lam_inv_dh = np.linalg.solve(lam, dagger(delta))
    middle = L - delta @ lam_inv_dh
    middle = 0.5 * (middle + dagger(middle))

    # last block row of F^{-1}; orthogonal to the first two block columns of F
    R3 = np.hstack([Z @ X - Y, -Z, En])
    gamma = R3 @ dagger(R3)
    last = np.linalg.inv(gamma)
    W3 = dagger(R3) @ last

    F = c.representative()
    upper = np.block([
        [El, -lam_inv_dh, np.zeros((l, n))],
        [np.zeros((m, l)), Em, np.zeros((m, n))],
        [np.zeros((n, l)), np.zeros((n, m)), En],
    ])
    # F^{-1} W3 gives the third column of the upper factor
    upper[:, l + m:] = np.linalg.solve(F, W3)
    upper[l + m:, l + m:] = En
    W = F @ upper
    W[:, l + m:] = W3
    return FlagGram(lam, L, delta, middle, gamma, last, upper, W, R3)


def _flag_scale(g: FlagGram) -> np.ndarray:
    return block_diag([hpd_inv_sqrt(g.lam), hpd_inv_sqrt(g.middle), hpd_sqrt(g.gamma)])


def flag_frame(c: FlagCoordinates) -> UnitaryFrame:
    """Closed-form three-block frame ``(V1, V2, V3)``."""
    return UnitaryFrame(c.partition, _flag_matrix(c))


def _flag_matrix(c: FlagCoordinates) -> np.ndarray:
    g = flag_gram(c)
    l, m, _ = c.partition.sizes
    return np.hstack([
        g.W[:, :l] @ hpd_inv_sqrt(g.lam),
        g.W[:, l:l + m] @ hpd_inv_sqrt(g.middle),
        dagger(g.dual_row) @ hpd_inv_sqrt(g.gamma),
    ])


def frame_decomposition(c: FlagCoordinates) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Factor the three-block frame as lower-unipotent x upper-unipotent x block-diagonal.

    The first factor is the coset representative, the third holds the inverse
    square roots of the three Gram factors.
    """
    g = flag_gram(c)
    return c.representative(), g.upper, _flag_scale(g)


def gram_schmidt_blocks(A, partition) -> np.ndarray:
    """Block Gram-Schmidt on the block columns of ``A``.

    Each block column is deflated by the projections onto the previous ones,
    ``(I - P_1 - ... - P_{k-1}) A_k``, then normalized by the inverse square
    root of its Gram matrix. Raises NotPositiveDefinite if a deflated block
    column is numerically rank deficient.
    """
    p = BlockPartition.of(partition)
    A = as_matrix(A, square=True)
    N = p.total
    out = np.empty_like(A)
    proj = np.zeros((N, N), dtype=complex)
    for k in range(p.nblocks):
        s = p.slice(k)
        Vt = (np.eye(N) - proj) @ A[:, s]
        Vk = Vt @ hpd_inv_sqrt(dagger(Vt) @ Vt)
        out[:, s] = Vk
        proj = proj + Vk @ dagger(Vk)
    return out


def recursive_frame(c: FlagCoordinates) -> UnitaryFrame:
    """Frame of any partition by block Gram-Schmidt on the coset representative."""
    return UnitaryFrame(c.partition, gram_schmidt_blocks(c.representative(), c.partition))


def frame(c: FlagCoordinates) -> UnitaryFrame:
    """Closed form for two or three blocks, recursion beyond that."""
    r = c.partition.nblocks
    if r == 2:
        return grassmann_frame(c)
    if r == 3:
        return flag_frame(c)
    return recursive_frame(c)


def frame_matrix(c: FlagCoordinates) -> np.ndarray:
    """Closed-form frame as a bare array, without the unitarity check.

    Used for diagnostics far out in the chart, where rounding may push the
    defect past the tolerance that :class:`UnitaryFrame` enforces.
    """
    r = c.partition.nblocks
    if r == 2:
        return _grassmann_matrix(c)
    if r == 3:
        return _flag_matrix(c)
    return gram_schmidt_blocks(c.representative(), c.partition)


def _masks(p: BlockPartition) -> list[np.ndarray]:
    if p.nblocks not in (2, 3):
        raise UnsupportedPartition(f"projections are defined for 2 or 3 blocks, got {p.sizes}")
    out = []
    for upto in range(1, p.nblocks):
        d = np.zeros(p.total)
        d[:p.offsets[upto]] = 1.0
        out.append(np.diag(d))
    return out


def projections(f: UnitaryFrame) -> ProjectionPair:
    """``P = V diag(E_l, 0, ...) V^H`` and, for three blocks, ``Q = V diag(E_l, E_m, 0) V^H``."""
    V = f.matrix
    mats = [V @ D @ dagger(V) for D in _masks(f.partition)]
    return ProjectionPair(*mats)


def w_route_projections(c: FlagCoordinates) -> ProjectionPair:
    """Projections through the unnormalized frame ``W``, ``W D W^{-1}``.

    ``W`` is not unitary and grows ill-conditioned with the coordinates, so
    this is a small-scale cross-check of :func:`projections`, not a
    production path.
    """
    p = c.partition
    if p.nblocks == 2:
        Z = c.Z
        m, n = p.sizes
        W = np.block([[np.eye(m), -dagger(Z)], [Z, np.eye(n)]])
    else:
        W = flag_gram(c).W
    mats = [np.linalg.solve(W.T, (W @ D).T).T for D in _masks(p)]
    return ProjectionPair(*mats)


def gauge_transform(f: UnitaryFrame, blocks: Sequence[np.ndarray]) -> UnitaryFrame:
    """Right-multiply the frame by ``diag(U_1, ..., U_r)``."""
    p = f.partition
    if len(blocks) != p.nblocks:
        raise ValueError(f"need {p.nblocks} gauge blocks, got {len(blocks)}")
    for k, U in enumerate(blocks):
        U = np.atleast_2d(np.asarray(U, dtype=complex))
        if U.shape != (p.sizes[k], p.sizes[k]):
            raise ValueError(f"gauge block {k} has shape {U.shape}, expected {(p.sizes[k],) * 2}")
        if unitarity_defect(U) > UNITARY_TOL:
            raise ValueError(f"gauge block {k} is not unitary")
    return UnitaryFrame(p, f.matrix @ block_diag(blocks))
