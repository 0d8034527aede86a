"""Cross-ratio tools for scalar Riccati ensembles and an invariant-search harness.

For the two-level flow ``i dz/dt = v + (h2 - h1) z - conj(v) z^2`` the
cross-ratio of any four solutions is constant in time, and a fourth solution
follows algebraically from three others. For the three-level interacting
system no such formula is known; :func:`invariant_search` only measures how
much a fixed library of candidate expressions drifts along an ensemble.
"""
from __future__ import annotations

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import IntegratorConfig, Trajectory, integrate_riccati, rk4_step
from .errors import DegenerateConfiguration, UnsupportedPartition
from .frames import FlagCoordinates
from .hamiltonians import BlockHamiltonian

DEGENERATE_TOL = 1e-14


def _vanishes(a: complex, b: complex, tol: float = DEGENERATE_TOL) -> bool:
    """Whether ``a - b`` is zero relative to the size of its operands."""
    return abs(a - b) <= tol * max(abs(a), abs(b)) or a == b


def cross_ratio(z: complex, z1: complex, z2: complex, z3: complex) -> complex:
    """``((z - z1) / (z - z3)) / ((z2 - z1) / (z2 - z3))``."""
    bad = [name for name, (a, b) in {"z-z3": (z, z3), "z2-z1": (z2, z1),
                                     "z2-z3": (z2, z3)}.items() if _vanishes(a, b)]
    if bad:
        raise DegenerateConfiguration(bad)
    return ((z - z1) / (z - z3)) / ((z2 - z1) / (z2 - z3))


def superpose(k: complex, z1: complex, z2: complex, z3: complex) -> complex:
    """Solve ``cross_ratio(z, z1, z2, z3) = k`` for ``z``."""
    num = k * z3 * (z2 - z1) - z1 * (z2 - z3)
    a, b = k * (z2 - z1), z2 - z3
    if _vanishes(a, b):
        raise DegenerateConfiguration(["k(z2-z1)-(z2-z3)"])
    return num / (a - b)


def mobius(a: complex, b: complex, c: complex, d: complex) -> Callable[[complex], complex]:
    return lambda z: (a * z + b) / (c * z + d)


@dataclass
class SolutionEnsemble:
    """Solutions of one flow on a shared time grid.

    ``values`` has shape ``(members, T, ncoords)``: one column per scalar
    coordinate (``z`` for two levels, ``x, y, z`` for three).
    """

    times: np.ndarray
    values: np.ndarray
    hamiltonian: BlockHamiltonian | None = None
    config: IntegratorConfig | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 3 or self.values.shape[1] != self.times.size:
            raise ValueError("values must have shape (members, len(times), ncoords)")
        if self.values.shape[0] < 4:
            raise ValueError("an ensemble needs at least 4 members")

    @property
    def members(self) -> int:
        return self.values.shape[0]

    def coordinate(self, k: int) -> np.ndarray:
        """Array ``(members, T)`` of scalar coordinate ``k``."""
        return self.values[:, :, k]

    def check_distinct(self, k: int = 0, at: int = 0):
        pts = self.values[:, at, k]
        for i in range(len(pts)):
            for j in range(i):
                if _vanishes(pts[i], pts[j]):
                    raise DegenerateConfiguration([f"member {j} == member {i}"], self.times[at])


def _scalar_series(traj: Trajectory) -> np.ndarray:
    return np.stack([np.array([b[0, 0] for b in c.blocks]) for c in traj.states])


def integrate_ensemble(h: BlockHamiltonian, initials: Sequence[FlagCoordinates],
                       cfg: IntegratorConfig = IntegratorConfig(), sample_every: int = 1,
                       jobs: int = 1) -> SolutionEnsemble:
    """Integrate each initial condition of a one-level-per-block system.

    Members may run on a thread pool; the result is ordered by member index
    regardless of ``jobs``.
    """
    if any(s != 1 for s in h.partition.sizes):
        raise UnsupportedPartition("ensembles are defined for scalar (all blocks of size 1) systems")

    def run(c0):
        return integrate_riccati(c0, h, cfg, sample_every=sample_every, diagnostics=False)

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            trajs = list(pool.map(run, initials))
    else:
        trajs = [run(c0) for c0 in initials]
    values = np.stack([_scalar_series(t) for t in trajs])
    return SolutionEnsemble(trajs[0].times, values, h, cfg)


def integrate_scalar_flow(f: Callable[[float, np.ndarray], np.ndarray], z0: Sequence[complex],
                          cfg: IntegratorConfig = IntegratorConfig()) -> SolutionEnsemble:
    """Ensemble of an arbitrary scalar flow ``dz/dt = f(t, z)`` (vectorized over members)."""
    z = np.asarray(z0, dtype=complex)
    dt = cfg.h
    out = [z.copy()]
    for k in range(cfg.nsteps):
        z = rk4_step(f, k * dt, z, dt)
        out.append(z.copy())
    times = dt * np.arange(cfg.nsteps + 1)
    return SolutionEnsemble(times, np.stack(out, axis=1)[:, :, None], None, cfg)


@dataclass
class DriftReport:
    k0: complex
    max_drift: float
    argmax_time: float
    values: np.ndarray


def cross_ratio_drift(e: SolutionEnsemble, coordinate: int = 0) -> DriftReport:
    """Drift of ``cross_ratio(z, z1, z2, z3)`` along the grid.

    Uses members 0..3 as ``(z, z1, z2, z3)``; drift is
    ``max |k(t) - k(0)| / (1 + |k(0)|)``.
    """
    e.check_distinct(coordinate)
    zs = e.coordinate(coordinate)[:4]
    ks = np.empty(e.times.size, dtype=complex)
    for i, t in enumerate(e.times):
        try:
            ks[i] = cross_ratio(*zs[:, i])
        except DegenerateConfiguration as exc:
            raise DegenerateConfiguration(exc.denominators, float(t)) from exc
    drift = np.abs(ks - ks[0]) / (1.0 + abs(ks[0]))
    i = int(np.argmax(drift))
    return DriftReport(ks[0], float(drift[i]), float(e.times[i]), ks)


def reconstruct_fourth(e: SolutionEnsemble, coordinate: int = 0) -> tuple[np.ndarray, float]:
    """Rebuild member 0 from members 1..3 and the initial cross-ratio.

    Returns the reconstructed series and its sup-norm error against member 0.
    """
    zs = e.coordinate(coordinate)[:4]
    k = cross_ratio(*zs[:, 0])
    rec = np.array([superpose(k, *zs[1:, i]) for i in range(e.times.size)])
    return rec, float(np.max(np.abs(rec - zs[0])))


# Candidate library for the three-level system. Each evaluator receives an
# array of shape (arity, 3) holding (x, y, z) of the first `arity` members at
# one time.

def _det3(a, b, c):
    return np.linalg.det(np.array([a, b, c]))


def _five_point(vecs):
    """Projective invariant of five points of CP^2, [012][034] / ([013][024])."""
    p0, p1, p2, p3, p4 = vecs
    num = _det3(p0, p1, p2) * _det3(p0, p3, p4)
    den = _det3(p0, p1, p3) * _det3(p0, p2, p4)
    if abs(den) <= DEGENERATE_TOL * max(abs(num), 1.0):
        raise DegenerateConfiguration(["[013][024]"])
    return num / den


def _pair_ratio(u, v):
    """Cross-ratio analogue from 2x2 determinants of (x, y) pairs."""
    def d(i, j):
        return u[i] * v[j] - u[j] * v[i]
    num, den = d(0, 1) * d(2, 3), d(0, 2) * d(1, 3)
    if abs(den) <= DEGENERATE_TOL * max(abs(num), 1.0):
        raise DegenerateConfiguration(["[02][13]"])
    return num / den


@dataclass(frozen=True)
class CandidateFunctional:
    name: str
    arity: int
    evaluator: Callable[[np.ndarray], complex]

    def __call__(self, pts: np.ndarray) -> complex:
        return self.evaluator(pts[:self.arity])


CANDIDATES: dict[str, CandidateFunctional] = {
    c.name: c for c in [
        CandidateFunctional("cross_ratio_x", 4, lambda p: cross_ratio(*p[:, 0])),
        CandidateFunctional("cross_ratio_y", 4, lambda p: cross_ratio(*p[:, 1])),
        CandidateFunctional("cross_ratio_z", 4, lambda p: cross_ratio(*p[:, 2])),
        CandidateFunctional("cross_ratio_xz_minus_y", 4,
                            lambda p: cross_ratio(*(p[:, 0] * p[:, 2] - p[:, 1]))),
        CandidateFunctional("det_ratio_xy_pairs", 4, lambda p: _pair_ratio(p[:, 0], p[:, 1])),
        # first frame column (1, x, y) and the annihilator (xz - y, -z, 1) of
        # the first two, each as points of the projective plane
        CandidateFunctional("det_ratio_first_column", 5,
                            lambda p: _five_point([(1.0, x, y) for x, y, _ in p])),
        CandidateFunctional("det_ratio_dual_row", 5,
                            lambda p: _five_point([(x * z - y, -z, 1.0) for x, y, z in p])),
    ]
}


@dataclass
class DriftRow:
    candidate: str
    max_drift: float
    argmax_time: float
    degeneracies: int


def invariant_search(e: SolutionEnsemble, candidates: Sequence[str | CandidateFunctional] | None = None
                     ) -> list[DriftRow]:
    """Relative drift of each candidate along the ensemble, ranked ascending.

    Degenerate evaluations are counted per candidate, not raised. A candidate
    needing more members than the ensemble has is reported with NaN drift.
    Small drift is evidence, not proof, of invariance.
    """
    if e.values.shape[2] != 3:
        raise ValueError("invariant_search expects a three-level (x, y, z) ensemble")
    pts = e.values[:, 0, :]
    for i in range(e.members):
        for j in range(i):
            if np.allclose(pts[i], pts[j], rtol=DEGENERATE_TOL, atol=0.0):
                raise DegenerateConfiguration([f"member {j} == member {i}"], e.times[0])
    if candidates is None:
        candidates = list(CANDIDATES)
    rows = []
    for cand in candidates:
        cand = CANDIDATES[cand] if isinstance(cand, str) else cand
        if cand.arity > e.members:
            rows.append(DriftRow(cand.name, float("nan"), float("nan"), e.times.size))
            continue
        vals = np.full(e.times.size, np.nan, dtype=complex)
        degenerate = 0
        for i in range(e.times.size):
            try:
                vals[i] = cand(e.values[:, i, :])
            except DegenerateConfiguration:
                degenerate += 1
        ok = np.isfinite(vals)
        if not ok[0] or not ok.any():
            rows.append(DriftRow(cand.name, float("nan"), float("nan"), degenerate))
            continue
        drift = np.where(ok, np.abs(vals - vals[0]) / (1.0 + abs(vals[0])), -np.inf)
        i = int(np.argmax(drift))
        rows.append(DriftRow(cand.name, float(drift[i]), float(e.times[i]), degenerate))
    return sorted(rows, key=lambda r: (np.isnan(r.max_drift), r.max_drift))


def drift_table_csv(rows: Sequence[DriftRow]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["candidate", "max_drift", "argmax_time", "degeneracies"])
    for r in rows:
        w.writerow([r.candidate, f"{r.max_drift:.17g}", f"{r.argmax_time:.17g}", r.degeneracies])
    return buf.getvalue()
