"""Classical Ising problem instances, exact ground-state enumeration, and
2D spin-glass instance generation/mining.

Conventions used throughout the package:

* A spin configuration is an integer bit word; bit ``i`` is site ``i`` and
  bit value 1 means sigma_z = +1 (spin up), so ``s_i = 2*bit_i - 1``.
* The cost function is ``E = -sum_ij J_ij s_i s_j - sum_i h_i s_i`` with
  every coupler counted once (``i < j``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit


class EnumerationLimitError(ValueError):
    """Instance too large for exhaustive enumeration."""


class GaugeError(ValueError):
    """Gauge reduction requested for an instance with local fields."""


# Energies from {+-1, +-2, +-4} couplers are exact integers; the tolerance
# only has to absorb incremental float drift over a 2^N Gray sweep and cover
# non-integer couplers used in sensitivity studies.
ENERGY_TOL = 1e-6


@dataclass(frozen=True)
class ProblemInstance:
    """Classical Ising cost function on ``n_spins`` sites."""

    n_spins: int
    couplers: tuple[tuple[int, int, float], ...]
    fields: tuple[tuple[int, float], ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n_spins < 1:
            raise ValueError("n_spins must be positive")
        object.__setattr__(self, "couplers", tuple(
            (int(i), int(j), float(J)) for i, j, J in self.couplers))
        object.__setattr__(self, "fields", tuple(
            (int(i), float(h)) for i, h in self.fields))
        seen = set()
        for i, j, J in self.couplers:
            if not (0 <= i < j < self.n_spins):
                raise ValueError(f"bad coupler sites ({i}, {j})")
            if (i, j) in seen:
                raise ValueError(f"duplicate coupler ({i}, {j})")
            seen.add((i, j))
            if not math.isfinite(J) or J == 0.0:
                raise ValueError(f"bad coupler value J[{i},{j}] = {J}")
        seen = set()
        for i, h in self.fields:
            if not 0 <= i < self.n_spins:
                raise ValueError(f"bad field site {i}")
            if i in seen:
                raise ValueError(f"duplicate field on site {i}")
            seen.add(i)
            if not math.isfinite(h):
                raise ValueError(f"non-finite field on site {i}")

    @property
    def has_fields(self) -> bool:
        return len(self.fields) > 0

    def adjacency(self):
        """CSR-style neighbor arrays (ptr, idx, jval) plus the field vector."""
        deg = np.zeros(self.n_spins + 1, dtype=np.int64)
        for i, j, _ in self.couplers:
            deg[i + 1] += 1
            deg[j + 1] += 1
        ptr = np.cumsum(deg)
        idx = np.zeros(ptr[-1], dtype=np.int64)
        jval = np.zeros(ptr[-1], dtype=np.float64)
        fill = ptr[:-1].copy()
        for i, j, J in self.couplers:
            idx[fill[i]] = j
            jval[fill[i]] = J
            fill[i] += 1
            idx[fill[j]] = i
            jval[fill[j]] = J
            fill[j] += 1
        hvec = np.zeros(self.n_spins, dtype=np.float64)
        for i, h in self.fields:
            hvec[i] = h
        return ptr, idx, jval, hvec

    def to_json(self) -> dict:
        return {
            "n_spins": self.n_spins,
            "couplers": [[i, j, J] for i, j, J in self.couplers],
            "fields": [[i, h] for i, h in self.fields],
            "metadata": self.metadata,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "ProblemInstance":
        return cls(
            n_spins=doc["n_spins"],
            couplers=tuple((c[0], c[1], c[2]) for c in doc["couplers"]),
            fields=tuple((f[0], f[1]) for f in doc.get("fields", [])),
            metadata=doc.get("metadata", {}),
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "ProblemInstance":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def spins_of(config: int, n_spins: int) -> np.ndarray:
    """+-1 spin vector of a configuration word."""
    return np.array([2 * ((config >> i) & 1) - 1 for i in range(n_spins)],
                    dtype=np.int64)


def config_of(spins) -> int:
    word = 0
    for i, s in enumerate(spins):
        if s > 0:
            word |= 1 << i
    return word


def bitstring_of(config: int, n_spins: int) -> str:
    """'u'/'d' string, site 0 first."""
    return "".join("u" if (config >> i) & 1 else "d" for i in range(n_spins))


def config_of_bitstring(text: str) -> int:
    word = 0
    for i, c in enumerate(text):
        if c == "u":
            word |= 1 << i
        elif c != "d":
            raise ValueError(f"bad bitstring character {c!r}")
    return word


def flip_all(config: int, n_spins: int) -> int:
    return config ^ ((1 << n_spins) - 1)


def energy(instance: ProblemInstance, config: int) -> float:
    """Ising energy of a single configuration."""
    e = 0.0
    for i, j, J in instance.couplers:
        si = 2 * ((config >> i) & 1) - 1
        sj = 2 * ((config >> j) & 1) - 1
        e -= J * si * sj
    for i, h in instance.fields:
        e -= h * (2 * ((config >> i) & 1) - 1)
    return e


@dataclass(frozen=True)
class GroundStateSet:
    """Exact minimum energy plus every minimizing configuration."""

    energy: float
    states: tuple[int, ...]
    gauge: bool = False

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(sorted(int(s) for s in self.states)))

    def __len__(self) -> int:
        return len(self.states)

    def index(self) -> dict:
        return {s: i for i, s in enumerate(self.states)}

    def to_json(self, n_spins: int) -> dict:
        return {
            "energy": self.energy,
            "states": [bitstring_of(s, n_spins) for s in self.states],
            "gauge": self.gauge,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "GroundStateSet":
        states = tuple(
            s if isinstance(s, int) else config_of_bitstring(s)
            for s in doc["states"])
        return cls(energy=doc["energy"], states=states, gauge=doc.get("gauge", False))


@njit(cache=True)
def _gray_sweep(n_spins, ptr, idx, jval, hvec, e0, tol):
    """Gray-code sweep over all 2^n configurations with O(deg) energy updates.

    Returns (emin, states) where states holds every configuration within
    tol of the minimum, in visit order.
    """
    total = 1 << n_spins
    cfg = 0
    e = e0
    emin = e
    states = [0]
    for t in range(1, total):
        # bit flipped by the Gray code at step t
        b = 0
        tt = t
        while tt & 1 == 0:
            tt >>= 1
            b += 1
        sb = 2.0 * ((cfg >> b) & 1) - 1.0
        acc = hvec[b]
        for p in range(ptr[b], ptr[b + 1]):
            acc += jval[p] * (2.0 * ((cfg >> idx[p]) & 1) - 1.0)
        e += 2.0 * sb * acc
        cfg ^= 1 << b
        if e < emin - tol:
            emin = e
            states.clear()
            states.append(cfg)
        elif e <= emin + tol:
            states.append(cfg)
    return emin, states


def enumerate_ground_states(instance: ProblemInstance,
                            gauge_reduce: bool = False,
                            tol: float = ENERGY_TOL) -> GroundStateSet:
    """Exhaustively enumerate all minimum-energy configurations.

    With ``gauge_reduce`` the Z2 representatives with spin 0 up are returned;
    the full ground-state set is their orbit under the global spin flip.
    """
    if instance.n_spins > 30:
        raise EnumerationLimitError(
            f"enumeration capped at 30 spins, got {instance.n_spins}")
    if gauge_reduce and instance.has_fields:
        raise GaugeError("gauge reduction requires an instance without local fields")
    ptr, idx, jval, hvec = instance.adjacency()
    e0 = energy(instance, 0)
    emin, states = _gray_sweep(instance.n_spins, ptr, idx, jval, hvec, e0, tol)
    states = sorted(int(s) for s in states)
    # Recompute the minimum exactly on one representative to shed sweep drift.
    emin = energy(instance, states[0])
    if gauge_reduce:
        states = [s for s in states if (s >> 0) & 1]
    return GroundStateSet(energy=emin, states=tuple(states), gauge=gauge_reduce)


def _lattice_edges(L: int):
    """Edges of the L x L periodic square lattice; duplicates merged for L=2."""
    edges = {}
    for y in range(L):
        for x in range(L):
            i = y * L + x
            for jx, jy in ((x + 1) % L, y), (x, (y + 1) % L):
                j = jy * L + jx
                if i == j:
                    continue
                a, b = min(i, j), max(i, j)
                edges[(a, b)] = edges.get((a, b), 0) + 1
    return edges


def generate_lattice_instance(L: int, coupler_values=(-4, -2, -1, 1, 2, 4),
                              seed: int = 0) -> ProblemInstance:
    """Random spin glass on the periodic L x L square lattice.

    Each lattice edge draws uniformly from ``coupler_values``; for L=2 the
    doubled periodic edges are merged by summing their draws.
    """
    if L < 2:
        raise ValueError("L must be at least 2")
    values = list(coupler_values)
    if not values:
        raise ValueError("empty coupler value set")
    rng = np.random.default_rng(seed)
    couplers = []
    for (i, j), mult in sorted(_lattice_edges(L).items()):
        J = sum(float(rng.choice(values)) for _ in range(mult))
        if J != 0.0:
            couplers.append((i, j, J))
    return ProblemInstance(
        n_spins=L * L,
        couplers=tuple(couplers),
        metadata={"lattice": {"L": L, "periodic": True}, "seed": int(seed)},
    )


@dataclass(frozen=True)
class MiningResult:
    instances: tuple[ProblemInstance, ...]
    attempts: int
    target_degeneracy: int


def mine_instances(L: int, target_degeneracy: int, count: int,
                   max_attempts: int = 10000, seed: int = 0,
                   coupler_values=(-4, -2, -1, 1, 2, 4)) -> MiningResult:
    """Search random lattice instances for an exact ground-state degeneracy.

    Exhausting ``max_attempts`` with fewer than ``count`` hits is reported in
    the result, not raised.
    """
    if L > 5:
        raise EnumerationLimitError("mining limited to L <= 5 (exact enumeration)")
    found = []
    attempts = 0
    while attempts < max_attempts and len(found) < count:
        child = np.random.SeedSequence(entropy=seed, spawn_key=(attempts,))
        inst_seed = int(child.generate_state(1)[0])
        inst = generate_lattice_instance(L, coupler_values, seed=inst_seed)
        attempts += 1
        gs = enumerate_ground_states(inst)
        if len(gs) == target_degeneracy:
            inst.metadata["degeneracy"] = target_degeneracy
            inst.metadata["mining_attempt"] = attempts - 1
            found.append(inst)
    return MiningResult(instances=tuple(found), attempts=attempts,
                        target_degeneracy=target_degeneracy)
