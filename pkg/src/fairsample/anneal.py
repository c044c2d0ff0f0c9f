"""Exact state-vector annealing of small instances.

Integrates i d|psi>/dt = H(t)|psi> with H(t) = (1 - t/T) H_D + (t/T) H_P
(hbar = 1) by fixed-step RK4.  H_P is applied as a diagonal, the driver
matrix-free via Hamming flip masks, so no 2^N x 2^N matrix is ever formed.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass

import numpy as np
from numba import njit

from .driver import DriverSpec, apply_driver, driver_ground_state
from .ising import (GroundStateSet, ProblemInstance, bitstring_of,
                    enumerate_ground_states, flip_all)


class SizeLimitError(ValueError):
    pass


class ToleranceError(RuntimeError):
    """Requested norm-drift tolerance unreachable within the step budget."""


def build_problem_diagonal(instance: ProblemInstance) -> np.ndarray:
    """Energies of all 2^N basis states, indexed by configuration word."""
    n = instance.n_spins
    if n > 16:
        raise SizeLimitError(f"dense diagonal capped at 16 spins, got {n}")
    dim = 1 << n
    ix = np.arange(dim, dtype=np.int64)
    s = np.empty((dim, n), dtype=np.float64)
    for i in range(n):
        s[:, i] = 2.0 * ((ix >> i) & 1) - 1.0
    diag = np.zeros(dim)
    for i, j, J in instance.couplers:
        diag -= J * s[:, i] * s[:, j]
    for i, h in instance.fields:
        diag -= h * s[:, i]
    return diag


@njit(cache=True)
def _h_apply(psi, diag, masks, amps, wd, wp, out):
    dim = psi.shape[0]
    for i in range(dim):
        out[i] = wp * diag[i] * psi[i]
    for k in range(masks.shape[0]):
        m = masks[k]
        g = wd * amps[k]
        for i in range(dim):
            out[i] += g * psi[i ^ m]


@njit(cache=True)
def _rk4_anneal(psi, diag, masks, amps, T, n_steps, rec_every,
                gs_idx, norms, probs):
    dim = psi.shape[0]
    dt = T / n_steps
    k1 = np.empty(dim, dtype=np.complex128)
    k2 = np.empty(dim, dtype=np.complex128)
    k3 = np.empty(dim, dtype=np.complex128)
    k4 = np.empty(dim, dtype=np.complex128)
    tmp = np.empty(dim, dtype=np.complex128)
    mi = -1j
    r = 0
    norms[0] = np.sqrt(np.sum(np.abs(psi) ** 2))
    for q in range(gs_idx.shape[0]):
        probs[0, q] = np.abs(psi[gs_idx[q]]) ** 2
    for step in range(n_steps):
        t = step * dt
        # k1
        s = t / T
        _h_apply(psi, diag, masks, amps, 1.0 - s, s, k1)
        for i in range(dim):
            k1[i] *= mi
        # k2
        s = (t + 0.5 * dt) / T
        for i in range(dim):
            tmp[i] = psi[i] + 0.5 * dt * k1[i]
        _h_apply(tmp, diag, masks, amps, 1.0 - s, s, k2)
        for i in range(dim):
            k2[i] *= mi
        # k3
        for i in range(dim):
            tmp[i] = psi[i] + 0.5 * dt * k2[i]
        _h_apply(tmp, diag, masks, amps, 1.0 - s, s, k3)
        for i in range(dim):
            k3[i] *= mi
        # k4
        s = (t + dt) / T
        for i in range(dim):
            tmp[i] = psi[i] + dt * k3[i]
        _h_apply(tmp, diag, masks, amps, 1.0 - s, s, k4)
        for i in range(dim):
            k4[i] *= mi
        for i in range(dim):
            psi[i] += (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if (step + 1) % rec_every == 0:
            r += 1
            norms[r] = np.sqrt(np.sum(np.abs(psi) ** 2))
            for q in range(gs_idx.shape[0]):
                probs[r, q] = np.abs(psi[gs_idx[q]]) ** 2


@dataclass(frozen=True)
class AnnealTrace:
    """Recorded instantaneous ground-state probabilities of one anneal."""

    times: np.ndarray            # (R,)
    probabilities: np.ndarray    # (R, k): per ground state (orbit-summed if gauge)
    p_total: np.ndarray          # (R,): total ground-state probability
    norms: np.ndarray            # (R,)
    T: float
    states: tuple[int, ...]      # column order; gauge representatives if gauge
    n_spins: int
    gauge: bool
    n_steps: int
    psi_final: np.ndarray | None = None   # full end state (diagnostics only)

    def write_csv(self, csv_path, sidecar_path=None) -> None:
        """Trace CSV `t,norm,p_total,p_0,...` plus JSON column sidecar."""
        with open(csv_path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "norm", "p_total"]
                       + [f"p_{i}" for i in range(len(self.states))])
            for r in range(len(self.times)):
                w.writerow([f"{self.times[r]:.10g}", f"{self.norms[r]:.12g}",
                            f"{self.p_total[r]:.12g}"]
                           + [f"{p:.12g}" for p in self.probabilities[r]])
        if sidecar_path is not None:
            doc = {f"p_{i}": bitstring_of(s, self.n_spins)
                   for i, s in enumerate(self.states)}
            doc["gauge"] = self.gauge
            with open(sidecar_path, "w") as fh:
                json.dump(doc, fh, indent=1)


def _estimate_steps(T, lam, tol, record_chunks):
    # RK4 on eigenvalue -i*lambda loses |R|^2 ~ (lam*dt)^6/144 per step.
    n = (lam * T) ** 1.2 / max(72.0 * 0.5 * tol, 1e-300) ** 0.2
    n = int(np.ceil(max(n, 64.0)))
    return ((n + record_chunks - 1) // record_chunks) * record_chunks


def integrate_anneal(instance: ProblemInstance, driver: DriverSpec, T: float,
                     record_points: int = 101, tolerance: float = 1e-6,
                     ground_states: GroundStateSet | None = None,
                     max_steps: int = 50_000_000) -> AnnealTrace:
    """Integrate the anneal and record instantaneous ground-state probabilities.

    The step count starts from an analytic drift estimate and doubles until
    the final norm deviates from 1 by at most ``tolerance``.  Gauge reduction
    (orbit-summed probability columns) is applied iff the instance has no
    local fields.
    """
    n = instance.n_spins
    if n > 14:
        raise SizeLimitError(f"anneal integration capped at 14 spins, got {n}")
    if T <= 0:
        raise ValueError("anneal time must be positive")
    if record_points < 2:
        raise ValueError("need at least 2 record points")
    gauge = not instance.has_fields
    if ground_states is None:
        ground_states = enumerate_ground_states(instance, gauge_reduce=gauge)
    diag = build_problem_diagonal(instance)
    masks, amps = driver.flip_masks(n)
    psi0 = driver_ground_state(driver, n)

    if gauge:
        reps = ground_states.states
        cols = [(s, flip_all(s, n)) for s in reps]
    else:
        reps = ground_states.states
        cols = [(s,) for s in reps]
    gs_idx = np.array([s for col in cols for s in col], dtype=np.int64)

    lam = float(np.max(np.abs(diag)))
    lam = max(lam, float(np.sum(np.abs(amps))))
    chunks = record_points - 1
    n_steps = _estimate_steps(T, lam, tolerance, chunks)
    while True:
        if n_steps > max_steps:
            raise ToleranceError(
                f"norm tolerance {tolerance} needs more than {max_steps} steps")
        psi = psi0.astype(np.complex128).copy()
        norms = np.zeros(record_points)
        raw = np.zeros((record_points, len(gs_idx)))
        _rk4_anneal(psi, diag, masks, amps, float(T), n_steps,
                    n_steps // chunks, gs_idx, norms, raw)
        if abs(norms[-1] - 1.0) <= tolerance:
            break
        n_steps *= 2

    k = len(cols)
    probs = np.zeros((record_points, k))
    col = 0
    for q, members in enumerate(cols):
        for _ in members:
            probs[:, q] += raw[:, col]
            col += 1
    times = np.linspace(0.0, T, record_points)
    return AnnealTrace(times=times, probabilities=probs,
                       p_total=raw.sum(axis=1), norms=norms, T=float(T),
                       states=tuple(reps), n_spins=n, gauge=gauge,
                       n_steps=n_steps, psi_final=psi)


@dataclass(frozen=True)
class FinalDistribution:
    states: tuple[int, ...]
    probabilities: np.ndarray   # renormalized over the ground-state subspace
    total_weight: float         # ground-state weight before renormalization
    gauge: bool


def final_distribution(trace: AnnealTrace) -> FinalDistribution:
    """End-of-anneal distribution over ground states.

    ``total_weight`` (before renormalization) is the adiabaticity diagnostic:
    values well below 1 mean the anneal leaked out of the ground space.
    """
    p = trace.probabilities[-1].copy()
    total = float(p.sum())
    if total > 0:
        p = p / total
    return FinalDistribution(states=trace.states, probabilities=p,
                             total_weight=total, gauge=trace.gauge)


def energy_expectation(instance: ProblemInstance, driver: DriverSpec,
                       psi: np.ndarray, s: float) -> float:
    """<psi|H(s)|psi> for diagnostics."""
    diag = build_problem_diagonal(instance)
    hpsi = s * diag * psi + (1.0 - s) * apply_driver(driver, psi)
    return float(np.real(np.vdot(psi, hpsi)))
