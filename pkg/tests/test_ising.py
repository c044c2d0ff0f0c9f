"""Instance validation, energies, exact enumeration, lattice generation."""

import json

import numpy as np
import pytest

from fairsample.ising import (EnumerationLimitError, GaugeError,
                              GroundStateSet, ProblemInstance, bitstring_of,
                              config_of, config_of_bitstring, energy,
                              enumerate_ground_states, flip_all,
                              generate_lattice_instance, mine_instances,
                              spins_of)

from conftest import all_energies, naive_ground_states, random_instance


# --- configuration word helpers ---------------------------------------------

def test_spin_word_round_trip():
    rng = np.random.default_rng(0)
    for _ in range(50):
        n = int(rng.integers(1, 20))
        word = int(rng.integers(1 << n))
        assert config_of(spins_of(word, n)) == word
        assert config_of_bitstring(bitstring_of(word, n)) == word


def test_bitstring_site_zero_first():
    assert bitstring_of(0b001, 3) == "udd"
    assert bitstring_of(0b100, 3) == "ddu"
    with pytest.raises(ValueError):
        config_of_bitstring("ux")


def test_flip_all():
    assert flip_all(0b101, 3) == 0b010
    assert flip_all(0, 4) == 0b1111


# --- validation ---------------------------------------------------------------

@pytest.mark.parametrize("couplers", [
    ((1, 0, 1.0),),            # i >= j
    ((0, 2, 1.0),),            # out of range
    ((0, 1, 1.0), (0, 1, 2.0)),  # duplicate
    ((0, 1, 0.0),),            # zero coupling
    ((0, 1, float("nan")),),   # non-finite
])
def test_rejects_bad_couplers(couplers):
    with pytest.raises(ValueError):
        ProblemInstance(2, couplers)


def test_rejects_bad_fields():
    with pytest.raises(ValueError):
        ProblemInstance(2, ((0, 1, 1.0),), fields=((2, 1.0),))
    with pytest.raises(ValueError):
        ProblemInstance(2, ((0, 1, 1.0),), fields=((0, 1.0), (0, 2.0)))


def test_instance_json_round_trip(tmp_path):
    inst = ProblemInstance(3, ((0, 1, -1.5), (1, 2, 2.0)), fields=((2, 0.5),),
                           metadata={"tag": "x"})
    path = tmp_path / "inst.json"
    inst.save(path)
    back = ProblemInstance.load(path)
    assert back == inst
    assert back.metadata == {"tag": "x"}


# --- energy --------------------------------------------------------------------

def test_energy_hand_values(ferro_pair, af_triangle):
    # ferromagnet: aligned pairs at -J, anti-aligned at +J
    assert energy(ferro_pair, 0b00) == -1.0
    assert energy(ferro_pair, 0b11) == -1.0
    assert energy(ferro_pair, 0b01) == 1.0
    # AF triangle: one frustrated bond in any 2:1 split
    assert energy(af_triangle, 0b001) == -1.0
    assert energy(af_triangle, 0b111) == 3.0


def test_energy_matches_vectorized_oracle():
    rng = np.random.default_rng(1)
    inst = random_instance(rng, 6, with_fields=True)
    table = all_energies(inst)
    for word in rng.integers(1 << 6, size=40):
        assert energy(inst, int(word)) == pytest.approx(table[word], abs=1e-12)


def test_global_flip_invariance_without_fields():
    rng = np.random.default_rng(2)
    inst = random_instance(rng, 7)
    for word in rng.integers(1 << 7, size=20):
        w = int(word)
        assert energy(inst, w) == pytest.approx(
            energy(inst, flip_all(w, 7)), abs=1e-12)


# --- enumeration ----------------------------------------------------------------

def test_enumerate_ferro_pair(ferro_pair):
    gs = enumerate_ground_states(ferro_pair)
    assert gs.energy == -1.0
    assert gs.states == (0b00, 0b11)


def test_enumerate_af_triangle(af_triangle):
    gs = enumerate_ground_states(af_triangle)
    assert gs.energy == -1.0
    assert gs.states == (1, 2, 3, 4, 5, 6)


def test_enumeration_matches_naive_oracle():
    rng = np.random.default_rng(3)
    for trial in range(40):
        n = int(rng.integers(2, 11))
        inst = random_instance(rng, n, with_fields=bool(trial % 2))
        emin, states = naive_ground_states(inst)
        gs = enumerate_ground_states(inst)
        assert gs.states == states
        assert gs.energy == pytest.approx(emin, abs=1e-9)


def test_enumeration_z2_closure():
    rng = np.random.default_rng(4)
    for _ in range(20):
        n = int(rng.integers(2, 9))
        inst = random_instance(rng, n)
        gs = enumerate_ground_states(inst)
        assert len(gs) % 2 == 0
        members = set(gs.states)
        assert all(flip_all(s, n) in members for s in gs.states)


def test_gauge_reduction_orbits():
    rng = np.random.default_rng(5)
    inst = random_instance(rng, 6)
    full = enumerate_ground_states(inst)
    reps = enumerate_ground_states(inst, gauge_reduce=True)
    assert reps.gauge and not full.gauge
    assert len(reps) * 2 == len(full)
    assert all(r & 1 for r in reps.states)       # spin 0 up in representatives
    orbit = set(reps.states) | {flip_all(r, 6) for r in reps.states}
    assert orbit == set(full.states)


def test_gauge_reduction_rejects_fields():
    inst = ProblemInstance(2, ((0, 1, 1.0),), fields=((0, 0.5),))
    with pytest.raises(GaugeError):
        enumerate_ground_states(inst, gauge_reduce=True)


def test_enumeration_size_cap():
    inst = ProblemInstance(31, ((0, 1, 1.0),))
    with pytest.raises(EnumerationLimitError):
        enumerate_ground_states(inst)


def test_ground_state_set_json_round_trip():
    gs = GroundStateSet(energy=-2.0, states=(3, 0))
    doc = gs.to_json(2)
    assert doc["states"] == ["dd", "uu"]       # sorted
    assert GroundStateSet.from_json(doc) == gs


# --- lattice generation and mining ------------------------------------------------

def test_lattice_instance_shape():
    inst = generate_lattice_instance(4, seed=0)
    assert inst.n_spins == 16
    assert len(inst.couplers) == 32            # 2 * L^2 periodic edges
    assert all(abs(J) in (1, 2, 4) for _, _, J in inst.couplers)


def test_lattice_l2_merges_doubled_edges():
    # L=2 periodic neighbors coincide in pairs: at most 4 merged couplers,
    # each a sum of two draws (dropped entirely if the draws cancel).
    inst = generate_lattice_instance(2, seed=0)
    assert inst.n_spins == 4
    assert len(inst.couplers) <= 4
    assert all(J != 0.0 for _, _, J in inst.couplers)


def test_lattice_determinism():
    a = generate_lattice_instance(3, seed=42)
    b = generate_lattice_instance(3, seed=42)
    c = generate_lattice_instance(3, seed=43)
    assert a == b
    assert a != c


def test_mining_hits_target_degeneracy():
    res = mine_instances(L=3, target_degeneracy=4, count=3, seed=0,
                         max_attempts=200)
    assert res.target_degeneracy == 4
    assert len(res.instances) == 3
    for inst in res.instances:
        assert len(enumerate_ground_states(inst)) == 4
        assert inst.metadata["degeneracy"] == 4


def test_mining_reports_exhaustion():
    # degeneracy 3 is impossible without fields (Z2 pairs), so mining must
    # exhaust its budget and report zero hits instead of raising
    res = mine_instances(L=2, target_degeneracy=3, count=1, seed=0,
                         max_attempts=25)
    assert res.instances == ()
    assert res.attempts == 25


def test_adjacency_round_trip():
    rng = np.random.default_rng(6)
    inst = random_instance(rng, 5, with_fields=True)
    ptr, idx, jval, hvec = inst.adjacency()
    rebuilt = {}
    for i in range(5):
        for p in range(ptr[i], ptr[i + 1]):
            a, b = min(i, int(idx[p])), max(i, int(idx[p]))
            rebuilt[(a, b)] = float(jval[p])
    assert rebuilt == {(i, j): J for i, j, J in inst.couplers}
    assert {i: h for i, h in inst.fields} == {
        i: float(h) for i, h in enumerate(hvec) if h != 0.0}
