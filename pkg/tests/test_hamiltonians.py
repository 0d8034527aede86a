from pathlib import Path

import numpy as np
import pytest

from flagriccati.errors import ConfigError, UnsupportedPartition
from flagriccati.hamiltonians import (
    BlockHamiltonian,
    HarmonicTerm,
    assemble,
    block_view,
    dumps,
    evaluate,
    from_dict,
    loads,
    random_hamiltonian,
    scalar_hamiltonian,
    to_dict,
)

GOLDEN = Path(__file__).parent / "data" / "golden_hamiltonian_seed42.json"


def test_empty_is_zero():
    h = BlockHamiltonian((2, 1))
    assert np.array_equal(evaluate(h, 0.7), np.zeros((3, 3)))


def test_single_diagonal_term():
    h = BlockHamiltonian((1, 1), {(0, 0): (HarmonicTerm(1.0),)})
    for t in (0.0, 1.3, -4.0):
        assert np.array_equal(evaluate(h, t), np.diag([1.0, 0.0]))


def test_rejects_bad_entries():
    with pytest.raises(ValueError):
        BlockHamiltonian((1, 1), {(1, 0): (HarmonicTerm(1.0),)})
    with pytest.raises(ValueError):
        BlockHamiltonian((1, 1), {(0, 0): (HarmonicTerm(1j),)})
    with pytest.raises(ValueError):
        HarmonicTerm(np.nan)


def test_hermitian_at_many_times(rng):
    h = random_hamiltonian((2, 1, 2), 3)
    for t in rng.uniform(-10, 10, 1000):
        H = evaluate(h, t)
        assert np.max(np.abs(H - H.conj().T)) <= 1e-15


def test_matches_entrywise_recomputation():
    h = random_hamiltonian((1, 1, 1), 5)
    t = 0.37
    H = evaluate(h, t)
    for j in range(3):
        for k in range(3):
            a, b = min(j, k), max(j, k)
            v = sum(term.amplitude * np.cos(term.frequency * t + term.phase)
                    for term in h.entry_terms.get((a, b), ()))
            assert abs(H[j, k] - (v if j <= k else np.conj(v))) < 1e-15


def test_block_view_diagonal():
    h = BlockHamiltonian.constant(np.diag([1.0, 2.0, 3.0]), (1, 1, 1))
    b = block_view(h, 0.0)
    assert [b[k][0, 0] for k in ("H1", "H2", "H3")] == [1, 2, 3]
    assert all(b[k][0, 0] == 0 for k in ("V1", "V2", "V3"))


@pytest.mark.parametrize("sizes", [(2, 3), (1, 1), (1, 2, 2), (1, 1, 1)])
def test_block_view_reassembles(sizes):
    h = random_hamiltonian(sizes, 11)
    assert np.array_equal(assemble(block_view(h, 0.8), sizes), evaluate(h, 0.8))


def test_block_view_unsupported():
    with pytest.raises(UnsupportedPartition):
        block_view(BlockHamiltonian((1, 1, 1, 1)), 0.0)


def test_random_zero_terms():
    h = random_hamiltonian((2, 2), 1, terms_per_entry=0)
    assert np.array_equal(evaluate(h, 1.0), np.zeros((4, 4)))


def test_random_is_deterministic():
    assert dumps(random_hamiltonian((1, 2), 9)) == dumps(random_hamiltonian((1, 2), 9))
    assert dumps(random_hamiltonian((1, 2), 9)) != dumps(random_hamiltonian((1, 2), 10))


def test_golden_snapshot():
    h = random_hamiltonian((1, 1, 1), 42, terms_per_entry=2, freq_range=(0.0, 5.0), amp_scale=1.0)
    assert dumps(h) + "\n" == GOLDEN.read_text()


def test_serialization_round_trip_is_exact():
    h = random_hamiltonian((2, 1, 1), 8)
    back = loads(dumps(h))
    assert back == h
    for t in (0.0, 0.123, 7.5):
        assert np.array_equal(evaluate(back, t), evaluate(h, t))


def test_schema_errors():
    good = to_dict(random_hamiltonian((1, 1), 0))
    bad_order = {"partition": [1, 1], "entries": [{"row": 1, "col": 0, "terms": []}]}
    bad_diag = {"partition": [1, 1],
                "entries": [{"row": 0, "col": 0, "terms": [{"re": 1, "im": 0.5}]}]}
    missing = {"entries": []}
    assert from_dict(good) == random_hamiltonian((1, 1), 0)
    for d in (bad_order, bad_diag, missing):
        with pytest.raises(ConfigError):
            from_dict(d)


def test_scalar_hamiltonian_layout():
    h = scalar_hamiltonian((1, 1), h1=0.5, v=2 - 1j)
    assert np.allclose(evaluate(h, 0.0), [[0.5, 2 + 1j], [2 - 1j, 0]])
