"""Recover flag coordinates from the leading block columns of a frame.

Only the spans of the leading block columns are used, so the result does not
change under right multiplication by a block-diagonal (or block-upper
triangular) matrix.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import ChartSingular, UnsupportedPartition
from .frames import FlagCoordinates
from .matcore import BlockPartition, as_matrix

CHART_MAX_CONDITION = 1e12


class ChartReport(NamedTuple):
    """``condition`` is ``||C|| / sigma_min(C1)`` for the inverted block ``C1``
    of the block column ``C``; it is at least 1 and equals
    ``sqrt(1 + ||Z||^2)`` on the frame of a two-block point."""

    condition: float
    singular: bool


def _right_divide(B: np.ndarray, C: np.ndarray, scale: float, which: str):
    """``B C^{-1}`` with a conditioning check on ``C``."""
    s = np.linalg.svd(C, compute_uv=False)
    cond = np.inf if s[-1] == 0 else scale / s[-1]
    if not cond < CHART_MAX_CONDITION:
        raise ChartSingular(cond, which)
    return np.linalg.solve(C.T, B.T).T, max(cond, 1.0)


def extract_grassmann(U, partition) -> tuple[FlagCoordinates, ChartReport]:
    """``Z = C2 C1^{-1}`` from the leading ``m`` columns ``(C1; C2)`` of ``U``."""
    p = BlockPartition.of(partition)
    if p.nblocks != 2:
        raise UnsupportedPartition(f"expected 2 blocks, got {p.sizes}")
    m = p.sizes[0]
    U = as_matrix(U)
    C = U[:, :m]
    scale = np.linalg.norm(C, 2)
    Z, cond = _right_divide(C[m:], C[:m], scale, "first")
    return FlagCoordinates(p, (Z,)), ChartReport(cond, False)


def extract_flag(U, partition) -> tuple[FlagCoordinates, ChartReport]:
    """Coordinates ``(X, Y, Z)`` from the first two block columns of ``U``.

    With the first block column ``(C1; C2; C3)``, ``X = C2 C1^{-1}`` and
    ``Y = C3 C1^{-1}``. With the second ``(a; b; c)``,
    ``Z = (c - Y a)(b - X a)^{-1}``.
    """
    p = BlockPartition.of(partition)
    if p.nblocks != 3:
        raise UnsupportedPartition(f"expected 3 blocks, got {p.sizes}")
    l, m, _ = p.sizes
    U = as_matrix(U)
    C = U[:, :l]
    XY, cond1 = _right_divide(C[l:], C[:l], np.linalg.norm(C, 2), "first")
    X, Y = XY[:m], XY[m:]
    D = U[:, l:l + m]
    a, b, c = D[:l], D[l:l + m], D[l + m:]
    Z, cond2 = _right_divide(c - Y @ a, b - X @ a, np.linalg.norm(D, 2), "second")
    return FlagCoordinates(p, (X, Y, Z)), ChartReport(max(cond1, cond2), False)


def extract(U, partition) -> tuple[FlagCoordinates, ChartReport]:
    p = BlockPartition.of(partition)
    if p.nblocks == 2:
        return extract_grassmann(U, p)
    if p.nblocks == 3:
        return extract_flag(U, p)
    raise UnsupportedPartition(f"extraction is implemented for 2 or 3 blocks, got {p.sizes}")


def chart_report(U, partition) -> ChartReport:
    """Like :func:`extract` but reports a singular chart instead of raising."""
    try:
        return extract(U, partition)[1]
    except ChartSingular as exc:
        return ChartReport(exc.condition, True)


def extract_trajectory(traj):
    """Coordinates along a full-propagation trajectory.

    Raises :class:`ChartSingular` with the offending sample time filled in.
    """
    from .dynamics import Trajectory

    if traj.kind != "full":
        raise ValueError("extract_trajectory needs a full-propagation trajectory")
    coords, conds = [], []
    for t, U in zip(traj.times, traj.states):
        try:
            c, rep = extract(U, traj.partition)
        except ChartSingular as exc:
            raise ChartSingular(exc.condition, exc.which, float(t)) from exc
        coords.append(c)
        conds.append(rep.condition)
    kind = "grassmann" if traj.partition.nblocks == 2 else "flag"
    diag = dict(traj.diagnostics)
    diag["chart_condition"] = np.array(conds)
    return Trajectory(kind, traj.partition, traj.times.copy(), coords, diag)
