"""Time-dependent block Hamiltonians built from cosine harmonics.

Every upper-triangular entry ``(j, k)`` with ``j <= k`` carries a list of
terms ``amplitude * cos(frequency * t + phase)``; the lower triangle is the
complex conjugate, so ``H(t)`` is Hermitian by construction. Diagonal
amplitudes must be real.

The JSON form is::

    {"partition": [l, m, n],
     "entries": [{"row": 0, "col": 1,
                  "terms": [{"re": 0.5, "im": -0.1, "freq": 2.0, "phase": 0.0}]}]}
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigError, UnsupportedPartition
from .matcore import BlockPartition, block


@dataclass(frozen=True)
class HarmonicTerm:
    amplitude: complex
    frequency: float = 0.0
    phase: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "amplitude", complex(self.amplitude))
        object.__setattr__(self, "frequency", float(self.frequency))
        object.__setattr__(self, "phase", float(self.phase))
        if not all(np.isfinite([self.amplitude.real, self.amplitude.imag,
                                self.frequency, self.phase])):
            raise ValueError("harmonic term has non-finite values")

    def __call__(self, t: float) -> complex:
        return self.amplitude * np.cos(self.frequency * t + self.phase)


@dataclass(frozen=True)
class BlockHamiltonian:
    partition: BlockPartition
    entry_terms: Mapping[tuple[int, int], tuple[HarmonicTerm, ...]] = field(default_factory=dict)

    def __post_init__(self):
        p = BlockPartition.of(self.partition)
        N = p.total
        terms = {}
        for key, ts in sorted(self.entry_terms.items()):
            j, k = (int(x) for x in key)
            if not (0 <= j <= k < N):
                raise ValueError(f"entry ({j},{k}) must satisfy 0 <= row <= col < {N}")
            ts = tuple(t if isinstance(t, HarmonicTerm) else HarmonicTerm(*t) for t in ts)
            if j == k and any(t.amplitude.imag != 0.0 for t in ts):
                raise ValueError(f"diagonal entry ({j},{j}) must have real amplitudes")
            if ts:
                terms[(j, k)] = ts
        object.__setattr__(self, "partition", p)
        object.__setattr__(self, "entry_terms", terms)

        flat = [(j, k, t) for (j, k), ts in terms.items() for t in ts]
        object.__setattr__(self, "_rows", np.array([f[0] for f in flat], dtype=int))
        object.__setattr__(self, "_cols", np.array([f[1] for f in flat], dtype=int))
        object.__setattr__(self, "_amp", np.array([f[2].amplitude for f in flat], dtype=complex))
        object.__setattr__(self, "_freq", np.array([f[2].frequency for f in flat], dtype=float))
        object.__setattr__(self, "_phase", np.array([f[2].phase for f in flat], dtype=float))

    @property
    def dim(self) -> int:
        return self.partition.total

    def __call__(self, t: float) -> np.ndarray:
        return evaluate(self, t)

    def __eq__(self, other):
        if not isinstance(other, BlockHamiltonian):
            return NotImplemented
        return self.partition == other.partition and self.entry_terms == other.entry_terms

    def __hash__(self):
        return hash((self.partition, tuple(self.entry_terms.items())))

    @classmethod
    def constant(cls, H, partition) -> "BlockHamiltonian":
        """Time-independent Hamiltonian with the given (Hermitian) matrix."""
        H = np.asarray(H, dtype=complex)
        terms = {}
        for j in range(H.shape[0]):
            for k in range(j, H.shape[0]):
                a = H[j, k].real if j == k else H[j, k]
                if a != 0:
                    terms[(j, k)] = (HarmonicTerm(a),)
        return cls(BlockPartition.of(partition), terms)


def evaluate(h: BlockHamiltonian, t: float) -> np.ndarray:
    """``H(t)`` as a dense Hermitian matrix."""
    N = h.dim
    U = np.zeros((N, N), dtype=complex)
    if h._amp.size:
        np.add.at(U, (h._rows, h._cols), h._amp * np.cos(h._freq * t + h._phase))
    diag = np.diag(np.diag(U))
    return U + U.conj().T - diag


_NAMES_2 = {"H1": (0, 0), "H2": (1, 1), "V": (1, 0)}
_NAMES_3 = {"H1": (0, 0), "H2": (1, 1), "H3": (2, 2),
            "V1": (1, 0), "V2": (2, 0), "V3": (2, 1)}


def block_names(partition) -> dict[str, tuple[int, int]]:
    r = BlockPartition.of(partition).nblocks
    if r == 2:
        return dict(_NAMES_2)
    if r == 3:
        return dict(_NAMES_3)
    raise UnsupportedPartition(f"named blocks exist for 2 or 3 blocks, got {r}")


def block_view(h: BlockHamiltonian, t: float) -> dict[str, np.ndarray]:
    """Named blocks of ``H(t)``: ``H1, H2, V`` or ``H1, H2, H3, V1, V2, V3``.

    The off-diagonal blocks sit below the diagonal (``V1`` at (1,0), ``V2`` at
    (2,0), ``V3`` at (2,1)); their adjoints fill the upper triangle.
    """
    names = block_names(h.partition)
    H = evaluate(h, t)
    return {name: block(H, h.partition, i, j) for name, (i, j) in names.items()}


def assemble(blocks: Mapping[str, np.ndarray], partition) -> np.ndarray:
    """Inverse of :func:`block_view`."""
    p = BlockPartition.of(partition)
    H = np.zeros((p.total, p.total), dtype=complex)
    for name, (i, j) in block_names(p).items():
        H[p.slice(i), p.slice(j)] = blocks[name]
        if i != j:
            H[p.slice(j), p.slice(i)] = np.conj(blocks[name]).T
    return H


def random_hamiltonian(partition, seed: int, terms_per_entry: int = 2,
                       freq_range: tuple[float, float] = (0.0, 5.0),
                       amp_scale: float = 1.0) -> BlockHamiltonian:
    """Deterministic random harmonic Hamiltonian.

    Off-diagonal amplitudes are complex Gaussian, diagonal ones real Gaussian
    with zero phase; frequencies are uniform in ``freq_range`` and phases
    uniform in ``[0, 2 pi)``.
    """
    if terms_per_entry < 0:
        raise ValueError("terms_per_entry must be non-negative")
    p = BlockPartition.of(partition)
    rng = np.random.default_rng(seed)
    lo, hi = freq_range
    terms = {}
    for j in range(p.total):
        for k in range(j, p.total):
            ts = []
            for _ in range(terms_per_entry):
                freq = rng.uniform(lo, hi)
                if j == k:
                    ts.append(HarmonicTerm(amp_scale * rng.standard_normal(), freq, 0.0))
                else:
                    re, im = rng.standard_normal(2) / np.sqrt(2)
                    ts.append(HarmonicTerm(amp_scale * complex(re, im), freq,
                                           rng.uniform(0.0, 2 * np.pi)))
            terms[(j, k)] = tuple(ts)
    return BlockHamiltonian(p, terms)


def to_dict(h: BlockHamiltonian) -> dict:
    return {
        "partition": list(h.partition.sizes),
        "entries": [
            {"row": j, "col": k,
             "terms": [{"re": t.amplitude.real, "im": t.amplitude.imag,
                        "freq": t.frequency, "phase": t.phase} for t in ts]}
            for (j, k), ts in h.entry_terms.items()
        ],
    }


def from_dict(d: Mapping) -> BlockHamiltonian:
    try:
        partition = BlockPartition(tuple(d["partition"]))
        terms: dict[tuple[int, int], list[HarmonicTerm]] = {}
        for e in d.get("entries", []):
            row, col = int(e["row"]), int(e["col"])
            if row > col:
                raise ConfigError(f"entry ({row},{col}): row must not exceed col")
            for t in e.get("terms", []):
                im = float(t.get("im", 0.0))
                if row == col and im != 0.0:
                    raise ConfigError(f"diagonal entry ({row},{col}) has nonzero im")
                terms.setdefault((row, col), []).append(
                    HarmonicTerm(complex(float(t["re"]), im), float(t.get("freq", 0.0)),
                                 float(t.get("phase", 0.0))))
        return BlockHamiltonian(partition, {k: tuple(v) for k, v in terms.items()})
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"invalid hamiltonian: {exc}") from exc


def dumps(h: BlockHamiltonian) -> str:
    return json.dumps(to_dict(h), indent=2)


def loads(text: str) -> BlockHamiltonian:
    return from_dict(json.loads(text))


def scalar_hamiltonian(partition: Sequence[int], **named) -> BlockHamiltonian:
    """Constant Hamiltonian from named scalar blocks, e.g. ``h1=0, v=1``.

    Names follow the one-level-per-block layout: ``h1, h2, v`` for two blocks
    and ``h1, h2, h3, v1, v2, v3`` for three.
    """
    p = BlockPartition.of(partition)
    if any(s != 1 for s in p.sizes):
        raise UnsupportedPartition("scalar_hamiltonian needs all block sizes equal to 1")
    blocks = {}
    for name, (i, j) in block_names(p).items():
        blocks[name] = np.array([[named.get(name.lower(), 0.0)]], dtype=complex)
    return BlockHamiltonian.constant(assemble(blocks, p), p)
