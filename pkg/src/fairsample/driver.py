"""Sigma-x product driver Hamiltonians.

A driver couples z-basis words ``a`` and ``b`` through the set of spins it
flips, ``a ^ b``.  In ``all_subsets`` mode every subset of size d <= n
carries amplitude ``Gamma[d]``; in ``explicit`` mode a term list gives one
amplitude per flip subset.  The stoquastic sign convention makes every
off-diagonal element non-positive.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np
from numba import njit
from scipy.sparse.linalg import LinearOperator, eigsh


class DegenerateDriverError(ValueError):
    """Driver ground space is degenerate; anneal start would be ambiguous."""


@dataclass(frozen=True)
class DriverSpec:
    """Specification of a sigma-x product driver.

    ``amplitudes[d-1]`` is Gamma^{x,d} in ``all_subsets`` mode; ``terms``
    holds ``(sites, amplitude)`` pairs in ``explicit`` mode.  ``sign`` is
    'stoquastic' (off-diagonals = -amplitude) or 'raw' (+amplitude).
    """

    mode: str = "all_subsets"
    max_order: int = 1
    amplitudes: tuple[float, ...] = (1.0,)
    terms: tuple[tuple[tuple[int, ...], float], ...] = ()
    sign: str = "stoquastic"

    def __post_init__(self):
        if self.mode not in ("all_subsets", "explicit"):
            raise ValueError(f"unknown driver mode {self.mode!r}")
        if self.sign not in ("stoquastic", "raw"):
            raise ValueError(f"unknown sign convention {self.sign!r}")
        if self.mode == "all_subsets":
            if self.max_order < 1:
                raise ValueError("max_order must be >= 1")
            amps = tuple(float(a) for a in self.amplitudes)
            if len(amps) != self.max_order:
                raise ValueError("need one amplitude per order 1..n")
            object.__setattr__(self, "amplitudes", amps)
        else:
            seen = set()
            terms = []
            for sites, amp in self.terms:
                key = tuple(sorted(int(s) for s in sites))
                if not key:
                    raise ValueError("empty flip subset")
                if len(set(key)) != len(key):
                    raise ValueError(f"repeated site in term {key}")
                if key in seen:
                    raise ValueError(f"duplicate term {key}")
                seen.add(key)
                terms.append((key, float(amp)))
            object.__setattr__(self, "terms", tuple(terms))

    @property
    def sign_factor(self) -> float:
        return -1.0 if self.sign == "stoquastic" else 1.0

    def order(self) -> int:
        if self.mode == "all_subsets":
            return self.max_order
        return max(len(sites) for sites, _ in self.terms)

    def amplitude_by_distance(self, n_spins: int) -> np.ndarray:
        """Signed matrix element per Hamming distance (all_subsets only)."""
        if self.mode != "all_subsets":
            raise ValueError("amplitude_by_distance is all_subsets-only")
        amp = np.zeros(n_spins + 1)
        for d in range(1, min(self.max_order, n_spins) + 1):
            amp[d] = self.sign_factor * self.amplitudes[d - 1]
        return amp

    def flip_masks(self, n_spins: int):
        """All (mask, signed amplitude) pairs of the driver on n_spins sites."""
        masks, amps = [], []
        if self.mode == "all_subsets":
            for d in range(1, min(self.max_order, n_spins) + 1):
                g = self.sign_factor * self.amplitudes[d - 1]
                if g == 0.0:
                    continue
                for sites in combinations(range(n_spins), d):
                    mask = 0
                    for s in sites:
                        mask |= 1 << s
                    masks.append(mask)
                    amps.append(g)
        else:
            for sites, amp in self.terms:
                if sites and sites[-1] >= n_spins:
                    raise ValueError(f"term {sites} out of range for N={n_spins}")
                mask = 0
                for s in sites:
                    mask |= 1 << s
                masks.append(mask)
                amps.append(self.sign_factor * amp)
        return np.array(masks, dtype=np.int64), np.array(amps, dtype=np.float64)

    def element(self, a: int, b: int, n_spins: int) -> float:
        """Matrix element <a|H_D|b>."""
        x = a ^ b
        if x == 0:
            return 0.0
        if self.mode == "all_subsets":
            d = int(x).bit_count()
            if d > self.max_order:
                return 0.0
            return self.sign_factor * self.amplitudes[d - 1]
        val = 0.0
        for sites, amp in self.terms:
            mask = 0
            for s in sites:
                mask |= 1 << s
            if mask == x:
                val += self.sign_factor * amp
        return val


def transverse_field(n_spins: int, gamma: float = 1.0) -> DriverSpec:
    """Standard order-1 stoquastic driver."""
    return DriverSpec(mode="all_subsets", max_order=1, amplitudes=(gamma,))


def uniform_driver(max_order: int, gamma: float = 1.0) -> DriverSpec:
    """all_subsets driver with Gamma = gamma at every order up to max_order."""
    return DriverSpec(mode="all_subsets", max_order=max_order,
                      amplitudes=(gamma,) * max_order)


@njit(cache=True)
def _apply_masks(state, masks, amps, out):
    dim = state.shape[0]
    for k in range(masks.shape[0]):
        m = masks[k]
        g = amps[k]
        for i in range(dim):
            out[i] += g * state[i ^ m]


def apply_driver(driver: DriverSpec, state: np.ndarray,
                 n_spins: int | None = None) -> np.ndarray:
    """Matrix-free H_D |state> in the full 2^N basis."""
    dim = state.shape[0]
    if n_spins is None:
        n_spins = dim.bit_length() - 1
    if dim != 1 << n_spins:
        raise ValueError(f"state length {dim} is not 2^{n_spins}")
    masks, amps = driver.flip_masks(n_spins)
    out = np.zeros(dim, dtype=np.complex128)
    _apply_masks(np.ascontiguousarray(state, dtype=np.complex128), masks, amps, out)
    if not np.iscomplexobj(state):
        return out.real.copy()
    return out


def dense_driver_matrix(driver: DriverSpec, n_spins: int) -> np.ndarray:
    """Dense 2^N x 2^N driver matrix (small N only)."""
    dim = 1 << n_spins
    H = np.zeros((dim, dim))
    masks, amps = driver.flip_masks(n_spins)
    ix = np.arange(dim)
    for m, g in zip(masks, amps):
        H[ix, ix ^ m] += g
    return H


def driver_ground_state(driver: DriverSpec, n_spins: int,
                        degeneracy_tol: float = 1e-8) -> np.ndarray:
    """Normalized lowest eigenvector of the driver alone.

    Raises DegenerateDriverError when the two lowest eigenvalues coincide
    within tolerance, since the anneal start would then be ambiguous.
    """
    if n_spins > 16:
        raise ValueError("driver ground state capped at 16 spins")
    dim = 1 << n_spins
    if dim <= 512:
        H = dense_driver_matrix(driver, n_spins)
        vals, vecs = np.linalg.eigh(H)
        e0, e1 = vals[0], vals[1]
        v = vecs[:, 0]
    else:
        masks, amps = driver.flip_masks(n_spins)

        def matvec(x):
            out = np.zeros(dim, dtype=np.complex128)
            _apply_masks(np.ascontiguousarray(x, dtype=np.complex128), masks, amps, out)
            return out.real if not np.iscomplexobj(x) else out

        op = LinearOperator((dim, dim), matvec=matvec, dtype=np.float64)
        vals, vecs = eigsh(op, k=2, which="SA")
        order = np.argsort(vals)
        e0, e1 = vals[order[0]], vals[order[1]]
        v = vecs[:, order[0]]
    if e1 - e0 <= degeneracy_tol * max(1.0, abs(e0)):
        raise DegenerateDriverError(
            f"driver ground space degenerate: E0={e0:.12g}, E1={e1:.12g}")
    v = np.asarray(v, dtype=np.complex128)
    # deterministic phase: largest-magnitude entry real positive
    pivot = np.argmax(np.abs(v))
    v = v * (np.abs(v[pivot]) / v[pivot])
    return v / np.linalg.norm(v)
