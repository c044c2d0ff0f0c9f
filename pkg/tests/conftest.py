"""Shared fixtures and independent oracles.

The oracles here deliberately avoid the code paths they check: ground
states come from a vectorized brute-force energy table, driver matrices
from an explicit Pauli tensor (Kronecker) construction.
"""

import numpy as np
import pytest

from fairsample.ising import ProblemInstance

# --- brute-force Ising oracle ----------------------------------------------


def all_energies(instance: ProblemInstance) -> np.ndarray:
    """Energies of every configuration word 0..2^N-1, computed naively."""
    n = instance.n_spins
    ix = np.arange(1 << n, dtype=np.int64)
    s = 2.0 * ((ix[:, None] >> np.arange(n)) & 1) - 1.0
    e = np.zeros(1 << n)
    for i, j, J in instance.couplers:
        e -= J * s[:, i] * s[:, j]
    for i, h in instance.fields:
        e -= h * s[:, i]
    return e


def naive_ground_states(instance: ProblemInstance, tol: float = 1e-9):
    e = all_energies(instance)
    emin = float(e.min())
    states = np.nonzero(e <= emin + tol)[0]
    return emin, tuple(int(s) for s in states)


# --- dense Pauli tensor oracle ----------------------------------------------

_SX = np.array([[0.0, 1.0], [1.0, 0.0]])
_ID = np.eye(2)


def pauli_x_product(sites, n_spins: int) -> np.ndarray:
    """Dense tensor product of sigma-x on `sites`, identity elsewhere.

    Site 0 is the least significant bit of the basis index, so it sits at
    the *right* end of the Kronecker chain.
    """
    out = np.array([[1.0]])
    for i in range(n_spins):
        out = np.kron(_SX if i in sites else _ID, out)
    return out


def dense_driver_oracle(driver, n_spins: int) -> np.ndarray:
    """Driver matrix assembled term-by-term from Pauli tensor products."""
    from itertools import combinations

    dim = 1 << n_spins
    H = np.zeros((dim, dim))
    if driver.mode == "all_subsets":
        for d in range(1, min(driver.max_order, n_spins) + 1):
            g = driver.sign_factor * driver.amplitudes[d - 1]
            for sites in combinations(range(n_spins), d):
                H += g * pauli_x_product(set(sites), n_spins)
    else:
        for sites, g in driver.terms:
            H += driver.sign_factor * g * pauli_x_product(set(sites), n_spins)
    return H


# --- random instances --------------------------------------------------------


def random_instance(rng, n_spins: int, values=(-2.0, -1.0, 1.0, 2.0),
                    edge_prob: float = 0.6, with_fields: bool = False):
    """Random all-to-all instance with at least a spanning-tree edge count."""
    from itertools import combinations

    while True:
        couplers = tuple(
            (i, j, float(rng.choice(values)))
            for i, j in combinations(range(n_spins), 2)
            if rng.random() < edge_prob)
        if len(couplers) >= n_spins - 1:
            break
    fields = ()
    if with_fields:
        fields = tuple((i, float(rng.choice(values)))
                       for i in range(n_spins) if rng.random() < 0.5)
    return ProblemInstance(n_spins, couplers, fields)


# --- common small systems -----------------------------------------------------


@pytest.fixture
def ferro_pair():
    """2-spin ferromagnet: ground states dd (0) and uu (3) at E = -1."""
    return ProblemInstance(2, ((0, 1, 1.0),))


@pytest.fixture
def af_triangle():
    """3-spin antiferromagnetic triangle: six degenerate ground states."""
    return ProblemInstance(3, ((0, 1, -1.0), (0, 2, -1.0), (1, 2, -1.0)))
