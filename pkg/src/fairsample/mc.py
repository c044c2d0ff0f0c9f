"""Monte Carlo annealers: simulated annealing and discrete-time path-integral
simulated quantum annealing with transverse-field and two-spin drivers.

The SQA worldline stores, per imaginary-time block of width dtau = beta/M,
the z-configuration at the diagonal slice plus crossing flags: one per spin
for the single-site boundary (A) and one per driver pair for its sub-boundary
(B).  A spin crosses an A-boundary with weight factor tanh(dtau*(1-s)*Gamma)
relative to not crossing; a pair crosses its B-sub-boundary jointly (both
spins or neither) with relative factor tanh(dtau*(1-s)*K).  Metropolis
ratios are exact products of these factors and diagonal Boltzmann weights,
so zero-weight crossings (exactly one spin of a pair flipping) never occur
in a stored configuration.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .driver import DriverSpec
from .ising import GroundStateSet, ProblemInstance, bitstring_of, enumerate_ground_states


@dataclass(frozen=True)
class Schedule:
    """Linear anneal schedule over `steps` sweeps.

    For SA the control value is the inverse temperature (beta_start ->
    beta_end); for SQA the schedule weight s = t/T ramps 0 -> 1 and the
    endpoints are implicit.
    """
    steps: int
    kind: str = "linear"
    beta_start: float = 0.1
    beta_end: float = 5.0

    def __post_init__(self):
        if self.kind != "linear":
            raise ValueError(f"unknown schedule kind {self.kind!r}")
        if self.steps < 1:
            raise ValueError("steps must be >= 1")


# ---------------------------------------------------------------------------
# simulated annealing

@njit(cache=True)
def _sa_anneal(n, ptr, idx, jval, hvec, betas, seed):
    np.random.seed(seed)
    s = np.empty(n, dtype=np.int8)
    for i in range(n):
        s[i] = 1 if np.random.random() < 0.5 else -1
    for t in range(betas.shape[0]):
        beta = betas[t]
        for i in range(n):
            acc = hvec[i]
            for p in range(ptr[i], ptr[i + 1]):
                acc += jval[p] * s[idx[p]]
            de = 2.0 * s[i] * acc
            if de <= 0.0 or np.random.random() < np.exp(-beta * de):
                s[i] = -s[i]
    cfg = 0
    for i in range(n):
        if s[i] > 0:
            cfg |= 1 << i
    return cfg


def sa_run(instance: ProblemInstance, schedule: Schedule, seed: int) -> int:
    """One simulated-annealing run; returns the final configuration word."""
    ptr, idx, jval, hvec = instance.adjacency()
    betas = np.linspace(schedule.beta_start, schedule.beta_end, schedule.steps)
    return int(_sa_anneal(instance.n_spins, ptr, idx, jval, hvec, betas,
                          seed & 0x7FFFFFFF))


# ---------------------------------------------------------------------------
# path-integral SQA

@njit(cache=True)
def _de_single(z, m, i, ptr, idx, jval, hvec):
    acc = hvec[i]
    for p in range(ptr[i], ptr[i + 1]):
        acc += jval[p] * z[m, idx[p]]
    return 2.0 * z[m, i] * acc


@njit(cache=True)
def _accept(fin, zero_net, boltz):
    if zero_net > 0:
        return False
    if zero_net < 0:
        return True
    return np.random.random() < fin * boltz


@njit(cache=True)
def _sqa_sweep(z, A, B, ptr, idx, jval, hvec, pairs, pairJ,
               dtau, s, t_a, t_b):
    M, n = z.shape
    P = pairs.shape[0]
    for m in range(M):
        m1 = (m + 1) % M
        for i in range(n):
            dA = (1 - 2 * A[m, i]) + (1 - 2 * A[m1, i])
            de = _de_single(z, m1, i, ptr, idx, jval, hvec)
            if t_a > 0.0:
                fin = t_a ** dA
                zero = 0
            else:
                fin = 1.0
                zero = dA
            if _accept(fin, zero, np.exp(-dtau * s * de)):
                A[m, i] ^= 1
                A[m1, i] ^= 1
                z[m1, i] = -z[m1, i]
        for p in range(P):
            j = pairs[p, 0]
            k = pairs[p, 1]
            dB = 1 - 2 * B[m, p]
            dA = (1 - 2 * A[m1, j]) + (1 - 2 * A[m1, k])
            de = (_de_single(z, m1, j, ptr, idx, jval, hvec)
                  + _de_single(z, m1, k, ptr, idx, jval, hvec)
                  - 4.0 * pairJ[p] * z[m1, j] * z[m1, k])
            fin = 1.0
            zero = 0
            if t_a > 0.0:
                fin *= t_a ** dA
            else:
                zero += dA
            if t_b > 0.0:
                fin *= t_b ** dB
            else:
                zero += dB
            if _accept(fin, zero, np.exp(-dtau * s * de)):
                B[m, p] ^= 1
                A[m1, j] ^= 1
                A[m1, k] ^= 1
                z[m1, j] = -z[m1, j]
                z[m1, k] = -z[m1, k]
    # full temporal-line flips (no crossing change)
    for i in range(n):
        de = 0.0
        for m in range(M):
            de += _de_single(z, m, i, ptr, idx, jval, hvec)
        if np.random.random() < np.exp(-dtau * s * de):
            for m in range(M):
                z[m, i] = -z[m, i]


@njit(cache=True)
def _sqa_init(M, n, seed):
    np.random.seed(seed)
    z = np.empty((M, n), dtype=np.int8)
    for i in range(n):
        v = 1 if np.random.random() < 0.5 else -1
        for m in range(M):
            z[m, i] = v
    return z


@njit(cache=True)
def _sqa_anneal(M, n, ptr, idx, jval, hvec, pairs, pairJ,
                beta, gamma, kappa, steps, seed):
    z = _sqa_init(M, n, seed)
    A = np.zeros((M, n), dtype=np.uint8)
    B = np.zeros((M, pairs.shape[0]), dtype=np.uint8)
    dtau = beta / M
    for t in range(steps):
        s = (t + 1.0) / steps
        t_a = np.tanh(dtau * (1.0 - s) * gamma)
        t_b = np.tanh(dtau * (1.0 - s) * kappa)
        _sqa_sweep(z, A, B, ptr, idx, jval, hvec, pairs, pairJ,
                   dtau, s, t_a, t_b)
    m_read = np.random.randint(0, M)
    cfg = 0
    for i in range(n):
        if z[m_read, i] > 0:
            cfg |= 1 << i
    return cfg


@njit(cache=True)
def _sqa_fixed_s(M, n, ptr, idx, jval, hvec, pairs, pairJ, beta,
                 gamma, kappa, s, n_therm, n_sweeps, seed, obs_i, obs_j):
    z = _sqa_init(M, n, seed)
    A = np.zeros((M, n), dtype=np.uint8)
    B = np.zeros((M, pairs.shape[0]), dtype=np.uint8)
    dtau = beta / M
    t_a = np.tanh(dtau * (1.0 - s) * gamma)
    t_b = np.tanh(dtau * (1.0 - s) * kappa)
    ep = np.empty(n_sweeps)
    corr = np.empty(n_sweeps)
    for t in range(n_therm + n_sweeps):
        _sqa_sweep(z, A, B, ptr, idx, jval, hvec, pairs, pairJ,
                   dtau, s, t_a, t_b)
        if t >= n_therm:
            e_acc = 0.0
            c_acc = 0.0
            for m in range(M):
                e_slice = 0.0
                for i in range(n):
                    for p in range(ptr[i], ptr[i + 1]):
                        if idx[p] > i:
                            e_slice -= jval[p] * z[m, i] * z[m, idx[p]]
                    e_slice -= hvec[i] * z[m, i]
                e_acc += e_slice
                c_acc += z[m, obs_i] * z[m, obs_j]
            ep[t - n_therm] = e_acc / M
            corr[t - n_therm] = c_acc / M
    return ep, corr


def _driver_params(driver: DriverSpec):
    if driver.mode != "all_subsets" or driver.max_order > 2:
        raise ValueError("SQA drivers are all_subsets with order <= 2")
    if driver.sign != "stoquastic":
        raise ValueError("SQA requires a stoquastic driver")
    gamma = driver.amplitudes[0]
    kappa = driver.amplitudes[1] if driver.max_order == 2 else 0.0
    if gamma < 0 or kappa < 0:
        raise ValueError("driver amplitudes must be non-negative")
    return gamma, kappa


def _pair_arrays(instance: ProblemInstance, pairs):
    if pairs is None:
        pairs = [(i, j) for i, j, _ in instance.couplers]
    Jmap = {(i, j): J for i, j, J in instance.couplers}
    arr = np.zeros((len(pairs), 2), dtype=np.int64)
    pj = np.zeros(len(pairs))
    seen = set()
    for q, (i, j) in enumerate(pairs):
        if not (0 <= i < j < instance.n_spins):
            raise ValueError(f"invalid driver pair ({i}, {j})")
        if (i, j) in seen:
            raise ValueError(f"duplicate driver pair ({i}, {j})")
        seen.add((i, j))
        arr[q, 0] = i
        arr[q, 1] = j
        pj[q] = Jmap.get((i, j), 0.0)
    return arr, pj


def sqa_run(instance: ProblemInstance, driver: DriverSpec, beta: float,
            slices: int, schedule: Schedule, seed: int, pairs=None) -> int:
    """One path-integral SQA anneal (s ramps 0 -> 1); returns the z-word of
    a uniformly chosen time slice."""
    if slices < 2:
        raise ValueError("need at least 2 imaginary-time slices")
    gamma, kappa = _driver_params(driver)
    if kappa > 0.0:
        parr, pj = _pair_arrays(instance, pairs)
        if parr.shape[0] == 0:
            raise ValueError("K > 0 requires a non-empty driver pair set")
    else:
        parr = np.zeros((0, 2), dtype=np.int64)
        pj = np.zeros(0)
    ptr, idx, jval, hvec = instance.adjacency()
    return int(_sqa_anneal(slices, instance.n_spins, ptr, idx, jval, hvec,
                           parr, pj, beta, gamma, kappa, schedule.steps,
                           seed & 0x7FFFFFFF))


def sqa_fixed_s(instance: ProblemInstance, driver: DriverSpec, beta: float,
                slices: int, s: float, n_sweeps: int, n_therm: int,
                seed: int, pairs=None, observable_pair=(0, 1)):
    """Equilibrium sampling of the Trotterized Gibbs state at fixed s.

    Returns per-sweep series of the diagonal energy (slice average) and the
    sigma-z correlation of ``observable_pair``.
    """
    gamma, kappa = _driver_params(driver)
    if kappa > 0.0:
        parr, pj = _pair_arrays(instance, pairs)
    else:
        parr = np.zeros((0, 2), dtype=np.int64)
        pj = np.zeros(0)
    ptr, idx, jval, hvec = instance.adjacency()
    oi, oj = observable_pair
    return _sqa_fixed_s(slices, instance.n_spins, ptr, idx, jval, hvec,
                        parr, pj, beta, gamma, kappa, s, n_therm, n_sweeps,
                        seed & 0x7FFFFFFF, oi, oj)


# ---------------------------------------------------------------------------
# sampling histograms

@dataclass(frozen=True)
class SampleHistogram:
    """End-of-anneal counts binned against the exact ground-state set."""

    states: tuple[int, ...]
    counts: np.ndarray
    non_gs: int
    runs: int
    engine: str
    n_spins: int
    params: dict = field(default_factory=dict, compare=False)
    seed: int = 0

    def __post_init__(self):
        if int(self.counts.sum()) + self.non_gs != self.runs:
            raise ValueError("histogram counts must sum to runs")

    @property
    def gs_hits(self) -> int:
        return self.runs - self.non_gs

    def to_json(self, instance_id: str = "") -> dict:
        return {
            "instance_id": instance_id,
            "engine": self.engine,
            "params": self.params,
            "counts": {bitstring_of(s, self.n_spins): int(c)
                       for s, c in zip(self.states, self.counts)},
            "non_gs": self.non_gs,
            "runs": self.runs,
            "seed": self.seed,
        }

    def save(self, path, instance_id: str = "") -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(instance_id), fh, indent=1)


ENGINES = ("sa", "sqa_x", "sqa_xx")


def _run_one(engine: str, instance: ProblemInstance, params: dict, seed: int) -> int:
    if engine == "sa":
        sched = Schedule(steps=params.get("steps", 256),
                         beta_start=params.get("beta_start", 0.1),
                         beta_end=params.get("beta_end", 5.0))
        return sa_run(instance, sched, seed)
    if engine in ("sqa_x", "sqa_xx"):
        gamma = params.get("gamma", 1.0)
        if engine == "sqa_xx":
            kappa = params.get("kappa", 1.0)
            driver = DriverSpec(mode="all_subsets", max_order=2,
                                amplitudes=(gamma, kappa))
        else:
            driver = DriverSpec(mode="all_subsets", max_order=1,
                                amplitudes=(gamma,))
        sched = Schedule(steps=params.get("steps", 256))
        return sqa_run(instance, driver, beta=params.get("beta", 8.0),
                       slices=params.get("slices", 64), schedule=sched,
                       seed=seed, pairs=params.get("pairs"))
    raise ValueError(f"unknown engine {engine!r}")


def derived_seed(master: int, index: int) -> int:
    ss = np.random.SeedSequence(entropy=master, spawn_key=(index,))
    return int(ss.generate_state(1)[0])


def sample_distribution(engine: str, instance: ProblemInstance, params: dict,
                        runs: int, seed: int,
                        ground_states: GroundStateSet | None = None) -> SampleHistogram:
    """Independent anneals with per-run derived seeds, binned against the
    exact ground-state set; non-minima go to a separate bucket."""
    if ground_states is None:
        ground_states = enumerate_ground_states(instance)
    index = ground_states.index()
    counts = np.zeros(len(ground_states), dtype=np.int64)
    non_gs = 0
    for r in range(runs):
        cfg = _run_one(engine, instance, params, derived_seed(seed, r))
        slot = index.get(cfg)
        if slot is None:
            non_gs += 1
        else:
            counts[slot] += 1
    return SampleHistogram(states=ground_states.states, counts=counts,
                           non_gs=non_gs, runs=runs, engine=engine,
                           n_spins=instance.n_spins, params=dict(params),
                           seed=seed)


@dataclass(frozen=True)
class RankCurve:
    """Disorder-averaged rank-ordered ground-state probabilities."""

    p_mean: np.ndarray
    p_stderr: np.ndarray
    ratios: tuple[float, ...]      # per-instance max/min probability ratio
    engine: str

    @property
    def k(self) -> int:
        return len(self.p_mean)

    @property
    def ratio_mean(self) -> float:
        return float(np.mean(self.ratios))

    @property
    def curve_ratio(self) -> float:
        """max/min of the averaged curve; finite whenever every rank is hit."""
        lo = float(self.p_mean[-1])
        return float(self.p_mean[0]) / lo if lo > 0 else float("inf")

    def write_csv(self, path) -> None:
        import csv as _csv
        with open(path, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["rank", "p_mean", "p_stderr"])
            for r in range(self.k):
                w.writerow([r, f"{self.p_mean[r]:.10g}", f"{self.p_stderr[r]:.10g}"])


def rank_order_average(histograms) -> RankCurve:
    """Sort per-state probabilities (conditioned on reaching a ground state)
    descending per instance, then average rank-wise across instances."""
    histograms = list(histograms)
    if not histograms:
        raise ValueError("no histograms")
    k = len(histograms[0].states)
    engine = histograms[0].engine
    for h in histograms:
        if len(h.states) != k:
            raise ValueError("mixed ground-state degeneracy across histograms")
    curves = []
    ratios = []
    for h in histograms:
        hits = h.gs_hits
        p = np.sort(h.counts / hits)[::-1] if hits > 0 else np.zeros(k)
        curves.append(p)
        pmin = p[-1]
        ratios.append(float(p[0] / pmin) if pmin > 0 else float("inf"))
    stack = np.array(curves)
    stderr = (stack.std(axis=0, ddof=1) / np.sqrt(len(curves))
              if len(curves) > 1 else np.zeros(k))
    return RankCurve(p_mean=stack.mean(axis=0), p_stderr=stderr,
                     ratios=tuple(ratios), engine=engine)
