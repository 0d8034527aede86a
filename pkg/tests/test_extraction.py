import numpy as np
import pytest

from flagriccati.dynamics import Trajectory
from flagriccati.errors import ChartSingular, UnsupportedPartition
from flagriccati.extraction import chart_report, extract, extract_flag, extract_grassmann, extract_trajectory
from flagriccati.frames import FlagCoordinates, frame, frame_matrix
from flagriccati.matcore import BlockPartition, block_diag, random_unitary

PARTITIONS = [(1, 1), (2, 3), (3, 1), (1, 1, 1), (1, 2, 2), (2, 1, 1), (2, 2, 2)]


@pytest.mark.parametrize("sizes", PARTITIONS)
def test_round_trip_unit_scale(rng, sizes):
    for _ in range(50):
        c = FlagCoordinates.random(sizes, rng)
        got, rep = extract(frame(c).matrix, sizes)
        assert got.max_abs_diff(c) < 1e-12
        assert rep.condition >= 1 and not rep.singular


@pytest.mark.parametrize("sizes", PARTITIONS)
def test_round_trip_up_to_norm_1e3(rng, sizes):
    # relative to the coordinate size: absolute errors grow like eps * |c|
    for _ in range(200):
        c = FlagCoordinates.random(sizes, rng, 10 ** rng.uniform(-1, 3))
        got, _ = extract(frame_matrix(c), sizes)
        assert got.max_abs_diff(c) / max(1.0, c.norm()) < 1e-12


def test_identity_gives_zero():
    for sizes in [(2, 3), (1, 2, 2)]:
        c, rep = extract(np.eye(sum(sizes)), sizes)
        assert c.max_abs_diff(FlagCoordinates.zeros(sizes)) == 0 and rep.condition == 1


def test_only_leading_columns_needed(rng):
    c = FlagCoordinates.random((1, 2, 2), rng)
    V = frame(c).matrix
    assert extract_flag(V[:, :3], (1, 2, 2))[0].max_abs_diff(c) < 1e-12
    c2 = FlagCoordinates.random((2, 3), rng)
    assert extract_grassmann(frame(c2).matrix[:, :2], (2, 3))[0].max_abs_diff(c2) < 1e-12


def test_grassmann_condition_formula(rng):
    c = FlagCoordinates.random((2, 3), rng, 2.0)
    rep = chart_report(frame(c).matrix, (2, 3))
    assert rep.condition == pytest.approx(np.sqrt(1 + c.norm() ** 2), rel=1e-12)


def test_antipodal_point_is_singular():
    U = np.array([[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ChartSingular) as info:
        extract(U, (1, 1))
    assert info.value.which == "first" and np.isinf(info.value.condition)
    assert chart_report(U, (1, 1)).singular


def test_second_inversion_can_fail():
    U = np.eye(3)[:, [0, 2, 1]]
    with pytest.raises(ChartSingular) as info:
        extract(U, (1, 1, 1))
    assert info.value.which == "second"


@pytest.mark.parametrize("sizes", [(2, 3), (1, 2, 2), (2, 1, 1)])
def test_gauge_invariance(rng, sizes):
    for _ in range(50):
        c = FlagCoordinates.random(sizes, rng)
        V = frame(c).matrix
        D = block_diag([random_unitary(s, rng) for s in sizes])
        assert extract(V @ D, sizes)[0].max_abs_diff(extract(V, sizes)[0]) < 1e-12


def test_invariant_under_upper_triangular_blocks(rng):
    p = BlockPartition((1, 2, 2))
    c = FlagCoordinates.random(p, rng)
    B = np.triu(rng.standard_normal((5, 5))) + 3 * np.eye(5)
    assert extract(c.representative() @ B, p)[0].max_abs_diff(c) < 1e-12


def test_unsupported_partition():
    with pytest.raises(UnsupportedPartition):
        extract(np.eye(4), (1, 1, 1, 1))


def test_trajectory_reports_singular_time():
    states = [np.eye(2), np.array([[0.0, 1.0], [1.0, 0.0]])]
    traj = Trajectory("full", BlockPartition((1, 1)), [0.0, 0.5], states)
    with pytest.raises(ChartSingular) as info:
        extract_trajectory(traj)
    assert info.value.time == 0.5


def test_trajectory_adds_condition(rng):
    c = FlagCoordinates.random((1, 1, 1), rng)
    traj = Trajectory("full", BlockPartition((1, 1, 1)), [0.0, 1.0], [frame(c).matrix] * 2)
    out = extract_trajectory(traj)
    assert out.kind == "flag" and out.diagnostics["chart_condition"].shape == (2,)
