"""Seeded cross-validation battery run by ``flagriccati verify``."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dynamics import IntegratorConfig, integrate_riccati, integrate_schrodinger
from .errors import ChartEscape, ChartSingular, FlagRiccatiError, StepRejected
from .extraction import extract, extract_trajectory
from .frames import (
    FlagCoordinates,
    flag_frame,
    frame,
    frame_decomposition,
    gauge_transform,
    gram_schmidt_blocks,
    projections,
    recursive_frame,
    w_route_projections,
)
from .hamiltonians import random_hamiltonian
from .matcore import BlockPartition, block_diag, random_unitary, unitarity_defect
from .superposition import cross_ratio_drift, integrate_ensemble, reconstruct_fourth

DEFAULT_PARTITIONS = ((1, 1), (2, 3), (1, 1, 1), (1, 2, 2))


@dataclass
class CheckResult:
    name: str
    max_error: float | None
    tolerance: float
    passed: bool
    skipped: bool = False
    detail: str = ""

    def as_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        if d["max_error"] is not None and not np.isfinite(d["max_error"]):
            d["max_error"] = str(d["max_error"])
        return d


@dataclass
class BatteryConfig:
    partitions: Sequence[Sequence[int]] = DEFAULT_PARTITIONS
    draws: int = 20
    seed: int = 0
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    initial_scale: float = 0.5
    amp_scale: float = 0.5


def scalar_flag_matrix(x: complex, y: complex, z: complex) -> np.ndarray:
    """The explicit 3 x 3 frame for one level per block, entry by entry."""
    cx, cy, cz = np.conj(x), np.conj(y), np.conj(z)
    d1 = 1 + abs(x) ** 2 + abs(y) ** 2
    d2 = 1 + abs(z) ** 2 + abs(x * z - y) ** 2
    s1, s2, s12 = np.sqrt(d1), np.sqrt(d2), np.sqrt(d1 * d2)
    return np.array([
        [1 / s1, -(cx + cy * z) / s12, (cx * cz - cy) / s2],
        [x / s1, (1 - (x * z - y) * cy) / s12, -cz / s2],
        [y / s1, (z + cx * (x * z - y)) / s12, 1 / s2],
    ])


def _max(values) -> float:
    values = list(values)
    return float(max(values)) if values else 0.0


def _check(name: str, tol: float, fn: Callable[[], float], detail: str = "") -> CheckResult:
    try:
        err = float(fn())
    except (StepRejected, ChartEscape, ChartSingular) as exc:
        return CheckResult(name, float("inf"), tol, False, detail=str(exc))
    return CheckResult(name, err, tol, bool(err < tol), detail=detail)


def run_battery(cfg: BatteryConfig = BatteryConfig()) -> list[CheckResult]:
    parts = [BlockPartition.of(p) for p in cfg.partitions]
    small = [p for p in parts if p.nblocks in (2, 3)]
    three = [p for p in parts if p.nblocks == 3]
    rng = np.random.default_rng(cfg.seed)

    def draws(p):
        return [FlagCoordinates.random(p, rng) for _ in range(cfg.draws)]

    samples = {p: draws(p) for p in parts}
    results: list[CheckResult] = []

    results.append(_check("frame_unitarity", 1e-10, lambda: _max(
        unitarity_defect(frame(c).matrix) for p in parts for c in samples[p])))
    results.append(_check("oracle_equivalence", 1e-12, lambda: _max(
        np.max(np.abs(frame(c).matrix - recursive_frame(c).matrix))
        for p in small for c in samples[p])))

    def covariance():
        errs = []
        for p in parts:
            for c in samples[p]:
                D = block_diag([random_unitary(s, rng) for s in p.sizes])
                lhs = gram_schmidt_blocks(c.representative() @ D, p)
                errs.append(np.max(np.abs(lhs - frame(c).matrix @ D)))
        return _max(errs)
    results.append(_check("covariance", 1e-10, covariance))

    def projection_laws():
        errs = []
        for p in small:
            for c in samples[p]:
                f = frame(c)
                P, Q = projections(f)
                l = p.sizes[0]
                errs += [np.max(np.abs(P @ P - P)), np.max(np.abs(P - P.conj().T)),
                         abs(np.trace(P) - l) * 1e-2]
                if Q is not None:
                    errs += [np.max(np.abs(Q @ Q - Q)), np.max(np.abs(Q - Q.conj().T)),
                             abs(np.trace(Q) - l - p.sizes[1]) * 1e-2,
                             np.max(np.abs(P @ Q - P)), np.max(np.abs(Q @ P - P))]
                Pw = w_route_projections(c)
                errs += [np.max(np.abs(a - b)) for a, b in zip((P, Q), Pw) if a is not None]
        return _max(errs)
    results.append(_check("projection_laws", 1e-10, projection_laws,
                          "trace errors scaled by 1e-2 to apply their 1e-8 tolerance"))

    def roundtrip():
        errs = []
        for p in small:
            for c in samples[p]:
                got, _ = extract(frame(c).matrix, p)
                errs.append(got.max_abs_diff(c) / max(1.0, c.norm()))
        return _max(errs)
    results.append(_check("extraction_roundtrip", 1e-12, roundtrip))

    def gauge():
        errs = []
        for p in small:
            for c in samples[p]:
                f = frame(c)
                g = gauge_transform(f, [random_unitary(s, rng) for s in p.sizes])
                errs.append(extract(g.matrix, p)[0].max_abs_diff(extract(f.matrix, p)[0]))
        return _max(errs)
    results.append(_check("gauge_invariance", 1e-10, gauge))

    if three:
        def scalar_identity():
            errs = []
            for _ in range(cfg.draws):
                c = FlagCoordinates.random((1, 1, 1), rng)
                x, y, z = (b[0, 0] for b in c.blocks)
                errs.append(np.max(np.abs(flag_frame(c).matrix - scalar_flag_matrix(x, y, z))))
            return _max(errs)
        results.append(_check("scalar_frame_identity", 1e-12, scalar_identity))

        def decomposition():
            errs = []
            for p in three:
                for c in samples[p]:
                    F, U, D = frame_decomposition(c)
                    errs.append(np.max(np.abs(F @ U @ D - flag_frame(c).matrix)))
            return _max(errs)
        results.append(_check("flag_decomposition", 1e-10, decomposition))
    else:
        for name in ("scalar_frame_identity", "flag_decomposition"):
            results.append(CheckResult(name, None, 1e-12, True, skipped=True,
                                       detail="no 3-block partition requested"))

    for k, p in enumerate(small):
        name = f"full_vs_reduced[{','.join(map(str, p.sizes))}]"
        h = random_hamiltonian(p, cfg.seed + k, amp_scale=cfg.amp_scale)
        c0 = FlagCoordinates.random(p, rng, cfg.initial_scale)

        def cross(h=h, c0=c0, p=p):
            full = integrate_schrodinger(h, frame(c0).matrix, cfg.integrator)
            ext = extract_trajectory(full)
            red = integrate_riccati(c0, h, cfg.integrator, diagnostics=False)
            return _max(a.max_abs_diff(b) for a, b in zip(ext.states, red.states))
        results.append(_check(name, 1e-6, cross))

    if any(p.sizes == (1, 1) for p in parts):
        def drift():
            h = random_hamiltonian((1, 1), cfg.seed, amp_scale=cfg.amp_scale)
            z0 = np.array([0.1 + 0.2j, -0.6 + 0.3j, 0.5 - 0.5j, -0.2 - 0.8j])
            inits = [FlagCoordinates((1, 1), (np.array([[z]]),)) for z in z0]
            e = integrate_ensemble(h, inits, cfg.integrator)
            return cross_ratio_drift(e).max_drift, reconstruct_fourth(e)[1]
        try:
            d, r = drift()
            results.append(CheckResult("cross_ratio_drift", d, 1e-8, d < 1e-8))
            results.append(CheckResult("superposition_reconstruction", r, 1e-7, r < 1e-7))
        except FlagRiccatiError as exc:
            results.append(CheckResult("cross_ratio_drift", float("inf"), 1e-8, False, detail=str(exc)))
    return results
