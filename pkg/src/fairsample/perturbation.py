"""Degenerate perturbation theory for end-of-anneal sampling probabilities.

Near the end of an adiabatic anneal the residual driver acts as a
perturbation on the degenerate classical ground space.  The k x k
restriction V of the driver to that space is built combinatorially from the
ground-state words alone (no 2^N object), its lowest eigenspace predicts
the sampling distribution, and a trivial V escalates to second order where
excited-state energy denominators enter.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field, replace
from math import comb
from itertools import combinations

import numpy as np

from .driver import DriverSpec, uniform_driver
from .ising import GroundStateSet, ProblemInstance, energy

# Entries of first-order V are exact sums of unit amplitudes, so only true
# zeros occur; the trivial threshold just guards float noise.
TRIVIAL_TOL = 1e-12
EIG_GROUP_RTOL = 1e-9
EIG_GROUP_ATOL = 1e-12
FAIR_TOL = 1e-6
HARD_RATIO = 1e-2
ZERO_PROB_TOL = 1e-12
SPAN_TOL = 1e-9

CATEGORIES = ("fair", "soft", "hard", "highord")


class FirstOrderNotTrivialError(ValueError):
    """Second-order V requested although first order already lifts the space."""


@dataclass(frozen=True)
class SubspaceMatrix:
    matrix: np.ndarray                  # k x k, symmetric
    basis: tuple[int, ...]              # ground-state words, fixed order
    order: str                          # 'first' | 'second'

    @property
    def k(self) -> int:
        return len(self.basis)

    @property
    def trivial(self) -> bool:
        return float(np.max(np.abs(self.matrix))) <= TRIVIAL_TOL


@dataclass(frozen=True)
class SamplingPrediction:
    states: tuple[int, ...]
    probabilities: np.ndarray           # empty for highord
    multiplicity: int                   # l, dimension of the lowest eigenspace
    lowest_eigenvalue: float
    category: str
    hard_suppressed: tuple[bool, ...]
    ratio: float                        # min/max probability; nan for highord
    order: str = "first"
    projector_approximation: bool = False   # l > 1 reported via projector diagonal


def _states_of(states) -> tuple[int, ...]:
    if isinstance(states, GroundStateSet):
        return states.states
    return tuple(int(s) for s in states)


def build_first_order_V(states, driver: DriverSpec) -> SubspaceMatrix:
    """V_ab = <a|H_D|b> over the ground-state words, built combinatorially."""
    basis = _states_of(states)
    k = len(basis)
    if k < 2:
        raise ValueError("need at least two ground states")
    V = np.zeros((k, k))
    if driver.mode == "all_subsets":
        n = driver.max_order
        amp = np.zeros(n + 1)
        amp[1:] = driver.sign_factor * np.asarray(driver.amplitudes)
        for a in range(k):
            for b in range(a + 1, k):
                d = (basis[a] ^ basis[b]).bit_count()
                if 1 <= d <= n:
                    V[a, b] = V[b, a] = amp[d]
    else:
        mask_amp = {}
        for sites, g in driver.terms:
            mask = 0
            for s in sites:
                mask |= 1 << s
            mask_amp[mask] = mask_amp.get(mask, 0.0) + driver.sign_factor * g
        for a in range(k):
            for b in range(a + 1, k):
                g = mask_amp.get(basis[a] ^ basis[b])
                if g is not None:
                    V[a, b] = V[b, a] = g
    return SubspaceMatrix(matrix=V, basis=basis, order="first")


def build_second_order_V(states, driver: DriverSpec,
                         instance: ProblemInstance) -> SubspaceMatrix:
    """V2_ab = sum_k <a|H_D|k><k|H_D|b> / (E_gs - E_k) over excited configs.

    Only configs within driver range of at least one ground state enter;
    rejected when first order is non-trivial since V2 is not the governing
    matrix then.
    """
    if instance.n_spins > 24:
        raise ValueError("second-order sweep capped at 24 spins")
    if isinstance(states, GroundStateSet) and states.gauge:
        raise ValueError("second-order V needs the full (non-gauge-reduced) set")
    first = build_first_order_V(states, driver)
    if not first.trivial:
        raise FirstOrderNotTrivialError(
            "first-order V is non-trivial; second order does not govern sampling")
    basis = first.basis
    if isinstance(states, GroundStateSet):
        e_gs = states.energy
    else:
        e_gs = energy(instance, basis[0])
    gs_set = set(basis)
    masks, amps = driver.flip_masks(instance.n_spins)
    # amplitude into each excited neighbor, per ground state; anything inside
    # the degenerate subspace (by energy, not just by membership in `basis`)
    # is excluded from the sweep
    energies = {}

    def excited(cfg):
        if cfg in gs_set:
            return False
        if cfg not in energies:
            energies[cfg] = energy(instance, cfg)
        return energies[cfg] > e_gs + 1e-9

    neighbors = []
    for a in basis:
        na = {}
        for m, g in zip(masks, amps):
            kcfg = a ^ int(m)
            if not excited(kcfg):
                continue
            na[kcfg] = na.get(kcfg, 0.0) + g
        neighbors.append(na)
    denom = {}
    k = len(basis)
    V = np.zeros((k, k))
    for a in range(k):
        for b in range(a, k):
            acc = 0.0
            na, nb = neighbors[a], neighbors[b]
            if len(nb) < len(na):
                na, nb = nb, na
            for kcfg, ga in na.items():
                gb = nb.get(kcfg)
                if gb is None:
                    continue
                if kcfg not in denom:
                    denom[kcfg] = e_gs - energies[kcfg]
                acc += ga * gb / denom[kcfg]
            V[a, b] = V[b, a] = acc
    return SubspaceMatrix(matrix=V, basis=basis, order="second")


def predict(V: SubspaceMatrix, tolerance: float = FAIR_TOL) -> SamplingPrediction:
    """Sampling prediction from the lowest eigenspace of V.

    l = 1: probabilities are squared components of the lowest eigenvector.
    l > 1: the normalized projector diagonal is reported (flagged as an
    approximation); a state is hard-suppressed only if its component
    vanishes in every lowest eigenvector.  Trivial V yields 'highord' with
    no probabilities; the caller must escalate to second order.
    """
    k = V.k
    if V.trivial:
        return SamplingPrediction(
            states=V.basis, probabilities=np.zeros(0), multiplicity=0,
            lowest_eigenvalue=0.0, category="highord",
            hard_suppressed=(False,) * k, ratio=float("nan"), order=V.order)
    if not np.allclose(V.matrix, V.matrix.T, atol=1e-10):
        raise ValueError("subspace matrix must be symmetric")
    w, U = np.linalg.eigh(V.matrix)
    scale = max(np.max(np.abs(w)), 1.0)
    group_tol = max(EIG_GROUP_RTOL * scale, EIG_GROUP_ATOL)
    low = int(np.sum(w - w[0] <= group_tol))
    vecs = U[:, :low]
    if low == 1:
        p = vecs[:, 0] ** 2
        suppressed = p <= ZERO_PROB_TOL
        approx = False
    else:
        p = np.sum(vecs ** 2, axis=1)
        total = p.sum()
        p = p / total if total > 0 else p
        suppressed = np.max(np.abs(vecs), axis=1) <= SPAN_TOL
        approx = True
    p = np.clip(p, 0.0, 1.0)
    p = p / p.sum()
    pmax = float(p.max())
    pmin = float(p.min())
    ratio = pmin / pmax if pmax > 0 else 0.0
    pred = SamplingPrediction(
        states=V.basis, probabilities=p, multiplicity=low,
        lowest_eigenvalue=float(w[0]), category="",
        hard_suppressed=tuple(bool(x) for x in suppressed),
        ratio=ratio, order=V.order, projector_approximation=approx)
    return replace(pred, category=classify(pred, tolerance))


def classify(prediction: SamplingPrediction, tolerance: float = FAIR_TOL) -> str:
    """fair / soft / hard / highord from a prediction's probabilities."""
    if prediction.probabilities.size == 0:
        return "highord"
    p = prediction.probabilities
    if any(prediction.hard_suppressed) or float(p.min()) <= ZERO_PROB_TOL:
        return "hard"
    ratio = float(p.min() / p.max())
    if ratio <= HARD_RATIO:
        return "hard"
    if ratio >= 1.0 - tolerance:
        return "fair"
    return "soft"


def predict_for_instance(instance: ProblemInstance, driver: DriverSpec,
                         ground_states: GroundStateSet) -> SamplingPrediction:
    """First-order prediction with automatic second-order escalation."""
    V = build_first_order_V(ground_states, driver)
    if not V.trivial:
        return predict(V)
    V2 = build_second_order_V(ground_states, driver, instance)
    return predict(V2)


@dataclass(frozen=True)
class StudyRow:
    n_spins: int
    degeneracy: int
    driver_order: int
    fractions: dict = field(compare=False)
    samples: int = 0
    exhaustive: bool = False


def _sample_subset(rng, space: int, size: int) -> tuple[int, ...]:
    if space <= 4 * size:
        return tuple(int(x) for x in rng.choice(space, size=size, replace=False))
    picked = set()
    while len(picked) < size:
        picked.add(int(rng.integers(space)))
    return tuple(sorted(picked))


def driver_study(n_spins: int, degeneracy: int, driver_orders,
                 samples: int = 400, seed: int = 0,
                 randomized_amplitudes: bool = False) -> list[StudyRow]:
    """Category fractions over random ground-state combinations (no H_P).

    For each driver order, `samples` random distinct size-`degeneracy`
    subsets of the 2^n_spins words are classified at first order with
    Gamma = 1 at every order (or per-subset random amplitudes when
    ``randomized_amplitudes``); 'highord' is terminal since there is no
    problem Hamiltonian to escalate with.  Enumeration is exhaustive when
    the number of subsets does not exceed `samples`.
    """
    space = 1 << n_spins
    if degeneracy > space:
        raise ValueError("degeneracy exceeds the number of configurations")
    total = comb(space, degeneracy) if degeneracy <= 64 else None
    exhaustive = total is not None and total <= samples
    rows = []
    for order in driver_orders:
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=seed, spawn_key=(order,)))
        counts = {c: 0 for c in CATEGORIES}
        if exhaustive:
            subsets = combinations(range(space), degeneracy)
        else:
            subsets = (_sample_subset(rng, space, degeneracy)
                       for _ in range(samples))
        n_done = 0
        for subset in subsets:
            if randomized_amplitudes:
                amps = tuple(rng.uniform(0.5, 1.5, size=order))
                drv = DriverSpec(mode="all_subsets", max_order=order,
                                 amplitudes=amps)
            else:
                drv = uniform_driver(order)
            counts[predict(build_first_order_V(subset, drv)).category] += 1
            n_done += 1
        fractions = {c: counts[c] / n_done for c in CATEGORIES}
        rows.append(StudyRow(n_spins=n_spins, degeneracy=degeneracy,
                             driver_order=order, fractions=fractions,
                             samples=n_done, exhaustive=exhaustive))
    return rows


def write_study_csv(rows: list[StudyRow], path, seed: int) -> None:
    """Study CSV: n_spins,degeneracy,driver_order,fair,soft,hard,highord,samples,seed."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["n_spins", "degeneracy", "driver_order",
                    "fair", "soft", "hard", "highord", "samples", "seed"])
        for r in rows:
            w.writerow([r.n_spins, r.degeneracy, r.driver_order]
                       + [f"{r.fractions[c]:.10g}" for c in CATEGORIES]
                       + [r.samples, seed])
