import numpy as np
import pytest

from flagriccati.dynamics import (
    IntegratorConfig,
    Trajectory,
    integrate_riccati,
    integrate_schrodinger,
    riccati_rhs_flag,
    riccati_rhs_grassmann,
)
from flagriccati.errors import ChartEscape, StepRejected, UnsupportedPartition
from flagriccati.extraction import extract
from flagriccati.frames import FlagCoordinates, frame
from flagriccati.hamiltonians import (
    BlockHamiltonian,
    block_view,
    random_hamiltonian,
    scalar_hamiltonian,
)
from flagriccati.matcore import random_unitary, unitarity_defect

from helpers import decoupled, local_coordinates


def test_config_validation():
    cfg = IntegratorConfig(step=0.3, t_end=1.0)
    assert cfg.nsteps == 3 and cfg.h == pytest.approx(1 / 3)
    for bad in ({"step": 0}, {"t_end": -1}, {"reunitarize_every": -1}, {"method": "euler"}):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)


def test_trajectory_validation():
    with pytest.raises(ValueError):
        Trajectory("full", (1, 1), [0.0, 0.0], [np.eye(2), np.eye(2)])
    with pytest.raises(ValueError):
        Trajectory("full", (1, 1), [0.0, 1.0], [np.eye(2)])


def test_schrodinger_zero_hamiltonian(rng):
    U0 = random_unitary(3, rng)
    traj = integrate_schrodinger(BlockHamiltonian((1, 2)), U0, IntegratorConfig(step=0.1))
    # only the polar re-unitarization touches U0, at rounding level
    assert max(np.max(np.abs(U - U0)) for U in traj.states) < 1e-14


def test_schrodinger_scalar_phase():
    h = BlockHamiltonian.constant(np.diag([1.0, 0.0]), (1, 1))
    traj = integrate_schrodinger(h, np.eye(2), IntegratorConfig(step=1e-3, t_end=1.0))
    assert abs(traj.states[-1][0, 0] - np.exp(-1j)) < 1e-12


def test_schrodinger_pauli_x():
    h = BlockHamiltonian.constant([[0, 1], [1, 0]], (1, 1))
    traj = integrate_schrodinger(h, np.eye(2), IntegratorConfig(step=1e-3, t_end=1.0), 100)
    sx = np.array([[0, 1], [1, 0]])
    err = max(np.max(np.abs(U - (np.cos(t) * np.eye(2) - 1j * np.sin(t) * sx)))
              for t, U in zip(traj.times, traj.states))
    assert err < 1e-9


def test_schrodinger_rejects_large_steps():
    h = random_hamiltonian((1, 2), 0, amp_scale=5.0)
    with pytest.raises(StepRejected) as info:
        integrate_schrodinger(h, np.eye(3), IntegratorConfig(step=0.5, t_end=5.0))
    assert info.value.time > 0


def test_schrodinger_unitarity_with_reunitarization():
    h = random_hamiltonian((2, 1, 1), 4)
    traj = integrate_schrodinger(h, np.eye(4), IntegratorConfig(step=1e-3, reunitarize_every=10))
    assert np.max(traj.diagnostics["unitarity_defect"]) < 1e-8


def test_grassmann_rhs_zero_and_scalar_form(rng):
    zero = {"H1": np.zeros((2, 2)), "H2": np.zeros((3, 3)), "V": np.zeros((3, 2))}
    assert np.array_equal(riccati_rhs_grassmann(np.zeros((3, 2)), zero), np.zeros((3, 2)))
    z, h1, h2 = 0.3 + 0.1j, 0.7, -1.2
    v = 0.4 - 0.9j
    blocks = {"H1": np.array([[h1]]), "H2": np.array([[h2]]), "V": np.array([[v]])}
    expected = -1j * (v + (h2 - h1) * z - np.conj(v) * z ** 2)
    assert abs(riccati_rhs_grassmann(np.array([[z]]), blocks)[0, 0] - expected) < 1e-15


def test_flag_rhs_zero_and_scalar_form(rng):
    zero = {k: np.zeros((1, 1)) for k in ("H1", "H2", "H3", "V1", "V2", "V3")}
    assert all(np.array_equal(d, np.zeros((1, 1))) for d in riccati_rhs_flag(*[np.zeros((1, 1))] * 3, zero))
    h1, h2, h3 = rng.standard_normal(3)
    v1, v2, v3 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    x, y, z = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    c = np.conj
    ex = v1 + (h2 - h1) * x - c(v1) * x * x + c(v3) * y - c(v2) * x * y
    ey = v2 + (h3 - h1) * y - c(v2) * y * y + v3 * x - c(v1) * x * y
    ez = v3 + (h3 - h2) * z - c(v3) * z * z + (x * z - y) * (c(v1) + c(v2) * z)
    blocks = {k: np.array([[val]]) for k, val in
              zip(("H1", "H2", "H3", "V1", "V2", "V3"), (h1, h2, h3, v1, v2, v3))}
    got = riccati_rhs_flag(np.array([[x]]), np.array([[y]]), np.array([[z]]), blocks)
    for g, e in zip(got, (ex, ey, ez)):
        assert abs(g[0, 0] + 1j * e) < 1e-14


def test_flag_rhs_embeds_grassmann(rng):
    hd, hs = decoupled((2, 1, 2), 6)
    b3, b2 = block_view(hd, 0.4), block_view(hs, 0.4)
    X = rng.standard_normal((1, 2)) + 1j * rng.standard_normal((1, 2))
    dX, dY, _ = riccati_rhs_flag(X, np.zeros((2, 2)), rng.standard_normal((2, 1)), b3)
    assert np.max(np.abs(dX - riccati_rhs_grassmann(X, {"H1": b2["H1"], "H2": b2["H2"], "V": b2["V"]}))) < 1e-14
    assert np.max(np.abs(dY)) < 1e-15


def test_riccati_zero_hamiltonian(rng):
    c0 = FlagCoordinates.random((1, 2, 1), rng)
    traj = integrate_riccati(c0, BlockHamiltonian((1, 2, 1)), IntegratorConfig(step=0.1))
    assert all(s.max_abs_diff(c0) == 0 for s in traj.states)


def test_riccati_tangent_solution():
    h = scalar_hamiltonian((1, 1), v=1.0)
    cfg = IntegratorConfig(step=1e-3, t_end=0.5)
    traj = integrate_riccati(FlagCoordinates.zeros((1, 1)), h, cfg)
    assert abs(traj.states[-1].Z[0, 0] - (-1j * np.tan(0.5))) < 1e-8


def test_riccati_records_diagnostics(rng):
    c0 = FlagCoordinates.random((1, 1, 1), rng, 0.5)
    traj = integrate_riccati(c0, random_hamiltonian((1, 1, 1), 2), IntegratorConfig(), 100)
    assert len(traj) == 11
    assert np.all(traj.diagnostics["chart_condition"] >= 1)
    assert np.max(traj.diagnostics["unitarity_defect"]) < 1e-12


def test_riccati_unsupported_partition():
    with pytest.raises(UnsupportedPartition):
        integrate_riccati(FlagCoordinates.zeros((1, 1, 1, 1)), BlockHamiltonian((1, 1, 1, 1)))


def test_riccati_chart_escape_carries_partial():
    h = scalar_hamiltonian((1, 1), v=1.0)
    with pytest.raises(ChartEscape) as info:
        integrate_riccati(FlagCoordinates.zeros((1, 1)), h, IntegratorConfig(step=1e-3, t_end=2.0))
    exc = info.value
    assert np.pi / 2 - 2e-3 < exc.time < np.pi / 2 + 2e-3
    assert exc.last_good_time < exc.time
    part = exc.partial
    assert part.times[-1] == pytest.approx(exc.last_good_time)
    assert all(np.all(np.isfinite(s.Z)) for s in part.states)


def test_full_and_reduced_agree_grassmann(rng):
    c0 = FlagCoordinates.random((2, 2), rng, 0.5)
    h = random_hamiltonian((2, 2), 1, amp_scale=0.5)
    cfg = IntegratorConfig()
    full = integrate_schrodinger(h, frame(c0).matrix, cfg, 50)
    red = integrate_riccati(c0, h, cfg, 50, diagnostics=False)
    err = max(extract(U, (2, 2))[0].max_abs_diff(c) for U, c in zip(full.states, red.states))
    assert err < 1e-6


def test_grassmann_finite_difference_order(rng):
    p = (2, 2)
    h = random_hamiltonian(p, 7, amp_scale=0.5)
    c0 = FlagCoordinates.random(p, rng, 0.5)
    t = 0.6
    errs = []
    for dh in (1e-3, 5e-4):
        cfg = IntegratorConfig(step=dh, t_end=t - dh)
        Ustart = integrate_schrodinger(h, frame(c0).matrix, cfg).states[-1]
        before, mid, after = local_coordinates(h, Ustart, t, dh)
        slope = (after.Z - before.Z) / (2 * dh)
        errs.append(np.max(np.abs(slope - riccati_rhs_grassmann(mid.Z, block_view(h, t)))))
    assert 3 < errs[0] / errs[1] < 5


def test_order_of_convergence():
    h = random_hamiltonian((1, 1, 1), 3, amp_scale=0.5)
    c0 = FlagCoordinates((1, 1, 1), (np.array([[0.2j]]), np.array([[0.1]]), np.array([[-0.3]])))

    def final(step):
        return integrate_riccati(c0, h, IntegratorConfig(step=step), diagnostics=False).states[-1]
    ref = final(0.025 / 16)
    errs = [final(s).max_abs_diff(ref) for s in (0.1, 0.05, 0.025)]
    for a, b in zip(errs, errs[1:]):
        assert 8 < a / b < 32
