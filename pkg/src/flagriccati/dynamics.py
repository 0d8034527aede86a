"""Fixed-step RK4 integration of the full and reduced evolutions.

``integrate_schrodinger`` propagates ``i dU/dt = H(t) U``. ``integrate_riccati``
propagates the coordinates of the frame directly, with the single matrix
Riccati equation for two blocks and the interacting system for three.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ChartEscape, FlagRiccatiError, StepRejected, UnsupportedPartition
from .frames import FlagCoordinates, frame_matrix
from .hamiltonians import BlockHamiltonian, block_view, evaluate
from .matcore import dagger, polar_unitary, unitarity_defect

logger = logging.getLogger(__name__)

STEP_REJECT_DEFECT = 1e-4
ESCAPE_NORM = 1e8


@dataclass(frozen=True)
class IntegratorConfig:
    """RK4 settings. The number of steps is ``round(t_end / step)`` and the
    step actually taken is ``t_end / nsteps``."""

    step: float = 1e-3
    t_end: float = 1.0
    reunitarize_every: int = 10
    method: str = "rk4_fixed"

    def __post_init__(self):
        if self.method != "rk4_fixed":
            raise ValueError(f"unknown method {self.method!r}")
        if not self.step > 0:
            raise ValueError("step must be positive")
        if not self.t_end > 0:
            raise ValueError("t_end must be positive")
        if self.reunitarize_every < 0:
            raise ValueError("reunitarize_every must be >= 0")

    @property
    def nsteps(self) -> int:
        return max(1, int(round(self.t_end / self.step)))

    @property
    def h(self) -> float:
        return self.t_end / self.nsteps


@dataclass
class Trajectory:
    """Sampled solution: ``states[k]`` is the value at ``times[k]``.

    ``kind`` is ``"full"`` (states are N x N propagators) or ``"grassmann"`` /
    ``"flag"`` (states are :class:`FlagCoordinates`).
    """

    kind: str
    partition: object
    times: np.ndarray
    states: list
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.states) != len(self.times):
            raise ValueError("states and times differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self):
        return len(self.times)

    def block_series(self, idx: int) -> np.ndarray:
        """Stack of one coordinate block over time, shape (T, rows, cols)."""
        return np.stack([s.blocks[idx] for s in self.states])


def rk4_step(f: Callable, t: float, y, h: float):
    """One classical RK4 step for ``y' = f(t, y)`` with ``y`` an array or tuple of arrays."""
    if isinstance(y, tuple):
        def axpy(a, x, b):
            return tuple(xi + a * bi for xi, bi in zip(x, b))
        k1 = f(t, y)
        k2 = f(t + h / 2, axpy(h / 2, y, k1))
        k3 = f(t + h / 2, axpy(h / 2, y, k2))
        k4 = f(t + h, axpy(h, y, k3))
        return tuple(yi + h / 6 * (a + 2 * b + 2 * c + d)
                     for yi, a, b, c, d in zip(y, k1, k2, k3, k4))
    k1 = f(t, y)
    k2 = f(t + h / 2, y + h / 2 * k1)
    k3 = f(t + h / 2, y + h / 2 * k2)
    k4 = f(t + h, y + h * k3)
    return y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def schrodinger_rhs(h: BlockHamiltonian) -> Callable:
    return lambda t, U: -1j * (evaluate(h, t) @ U)


def integrate_schrodinger(h: BlockHamiltonian, U0, cfg: IntegratorConfig = IntegratorConfig(),
                          sample_every: int = 1, t0: float = 0.0) -> Trajectory:
    """Propagate ``i dU/dt = H(t) U`` from ``U(t0) = U0``.

    Every ``cfg.reunitarize_every`` steps the propagator is replaced by its
    polar unitary factor. The unitarity defect is checked after every step
    and recorded at the sample times; above ``1e-4`` the run is aborted with
    :class:`StepRejected`.
    """
    U = np.array(U0, dtype=complex)
    if U.shape != (h.dim, h.dim):
        raise ValueError(f"initial unitary has shape {U.shape}, Hamiltonian is {h.dim}x{h.dim}")
    d0 = unitarity_defect(U)
    if d0 > 1e-10:
        raise ValueError(f"initial matrix is not unitary (defect {d0:.3e})")
    f = schrodinger_rhs(h)
    dt = cfg.h
    times, states, defects = [t0], [U.copy()], [d0]
    for k in range(1, cfg.nsteps + 1):
        t = t0 + (k - 1) * dt
        U = rk4_step(f, t, U, dt)
        if cfg.reunitarize_every and k % cfg.reunitarize_every == 0:
            U = polar_unitary(U)
        defect = unitarity_defect(U)
        if not np.isfinite(defect) or defect > STEP_REJECT_DEFECT:
            raise StepRejected(t0 + k * dt, defect)
        if k % sample_every == 0 or k == cfg.nsteps:
            times.append(t0 + k * dt)
            states.append(U.copy())
            defects.append(defect)
    return Trajectory("full", h.partition, np.array(times), states,
                      {"unitarity_defect": np.array(defects)})


def riccati_rhs_grassmann(Z, blocks) -> np.ndarray:
    """``dZ/dt = -i (V + H2 Z - Z H1 - Z V^H Z)``."""
    H1, H2, V = blocks["H1"], blocks["H2"], blocks["V"]
    return -1j * (V + H2 @ Z - Z @ H1 - Z @ dagger(V) @ Z)


def riccati_rhs_flag(X, Y, Z, blocks) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Right-hand side of the interacting Riccati system for three blocks."""
    H1, H2, H3 = blocks["H1"], blocks["H2"], blocks["H3"]
    V1, V2, V3 = blocks["V1"], blocks["V2"], blocks["V3"]
    V1h, V2h, V3h = dagger(V1), dagger(V2), dagger(V3)
    dX = V1 + H2 @ X - X @ H1 - X @ V1h @ X + V3h @ Y - X @ V2h @ Y
    dY = V2 + H3 @ Y - Y @ H1 - Y @ V2h @ Y + V3 @ X - Y @ V1h @ X
    dZ = V3 + H3 @ Z - Z @ H2 - Z @ V3h @ Z + (Z @ X - Y) @ (V1h + V2h @ Z)
    return -1j * dX, -1j * dY, -1j * dZ


def reduced_rhs(h: BlockHamiltonian) -> Callable:
    """RHS on the tuple of coordinate blocks for a 2- or 3-block Hamiltonian."""
    r = h.partition.nblocks
    if r == 2:
        return lambda t, y: (riccati_rhs_grassmann(y[0], block_view(h, t)),)
    if r == 3:
        return lambda t, y: riccati_rhs_flag(*y, block_view(h, t))
    raise UnsupportedPartition(f"reduced flow exists for 2 or 3 blocks, got {r}")


def chart_diagnostics(c: FlagCoordinates) -> tuple[float, float]:
    """Unitarity defect and chart condition of the frame rebuilt from ``c``."""
    from .extraction import chart_report

    try:
        V = frame_matrix(c)
    except FlagRiccatiError:
        return float("nan"), float("inf")
    return unitarity_defect(V), chart_report(V, c.partition).condition


def integrate_riccati(coords0: FlagCoordinates, h: BlockHamiltonian,
                      cfg: IntegratorConfig = IntegratorConfig(), sample_every: int = 1,
                      diagnostics: bool = True, escape_norm: float = ESCAPE_NORM,
                      t0: float = 0.0) -> Trajectory:
    """Integrate the reduced flow in coordinates.

    When any coordinate block exceeds ``escape_norm`` (or stops being finite)
    the flow has left the chart; :class:`ChartEscape` is raised carrying the
    partial trajectory. With ``diagnostics`` the frame is rebuilt at every
    sample time to record its unitarity defect and chart condition.
    """
    if coords0.partition != h.partition:
        raise ValueError(f"coordinate partition {coords0.partition.sizes} does not match "
                         f"Hamiltonian partition {h.partition.sizes}")
    f = reduced_rhs(h)
    p = coords0.partition
    kind = "grassmann" if p.nblocks == 2 else "flag"
    dt = cfg.h
    y = tuple(np.array(b) for b in coords0.blocks)
    times, states = [t0], [coords0]
    diag: dict[str, list[float]] = {"unitarity_defect": [], "chart_condition": []}

    def record(c):
        if diagnostics:
            d, cond = chart_diagnostics(c)
            diag["unitarity_defect"].append(d)
            diag["chart_condition"].append(cond)

    def partial():
        return Trajectory(kind, p, np.array(times), list(states),
                          {k: np.array(v) for k, v in diag.items() if diagnostics})

    record(coords0)
    for k in range(1, cfg.nsteps + 1):
        t = t0 + (k - 1) * dt
        y = rk4_step(f, t, y, dt)
        norm = max(np.linalg.norm(b) for b in y)
        if not np.isfinite(norm) or norm > escape_norm:
            logger.info("chart escape at t=%.6g (norm %.3e)", t + dt, norm)
            raise ChartEscape(t + dt, t, norm if np.isfinite(norm) else np.inf, partial())
        if k % sample_every == 0 or k == cfg.nsteps:
            c = FlagCoordinates(p, y)
            times.append(t0 + k * dt)
            states.append(c)
            record(c)
    return partial()
