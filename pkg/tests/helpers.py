"""Shared constructions for the test modules."""
import numpy as np
from scipy.linalg import expm

from flagriccati.dynamics import IntegratorConfig, integrate_schrodinger
from flagriccati.extraction import extract
from flagriccati.hamiltonians import BlockHamiltonian, random_hamiltonian
from flagriccati.matcore import BlockPartition


def decoupled(sizes, seed, amp_scale=0.5):
    """Three-block Hamiltonian with V2 = V3 = 0 and its (l, m) restriction."""
    p = BlockPartition.of(sizes)
    cut = p.offsets[2]
    h = random_hamiltonian(p, seed, amp_scale=amp_scale)
    kept = {(j, k): ts for (j, k), ts in h.entry_terms.items() if k < cut or j >= cut}
    sub = {(j, k): ts for (j, k), ts in kept.items() if k < cut}
    return BlockHamiltonian(p, kept), BlockHamiltonian(p.sizes[:2], sub)


def local_coordinates(h, U, t, dh, substeps=50):
    """Coordinates at ``t - dh, t, t + dh`` from a finely resolved propagation of ``U(t - dh)``."""
    cfg = IntegratorConfig(step=dh / substeps, t_end=2 * dh, reunitarize_every=0)
    traj = integrate_schrodinger(h, U, cfg, sample_every=substeps, t0=t - dh)
    return [extract(V, h.partition)[0] for V in traj.states]


def random_gauge(sizes, rng):
    """Block-diagonal unitary gauge ``t -> diag(exp(-i A_k t))`` with random Hermitian ``A_k``."""
    gens = []
    for s in sizes:
        A = rng.standard_normal((s, s)) + 1j * rng.standard_normal((s, s))
        gens.append((A + A.conj().T) / 2)

    def gauge(t):
        N = sum(sizes)
        D = np.zeros((N, N), dtype=complex)
        o = 0
        for s, A in zip(sizes, gens):
            D[o:o + s, o:o + s] = expm(-1j * t * A)
            o += s
        return D
    return gauge
