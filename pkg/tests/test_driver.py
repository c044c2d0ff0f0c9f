"""Driver specification, matrix-free application, driver ground states."""

import numpy as np
import pytest

from fairsample.driver import (DegenerateDriverError, DriverSpec,
                               apply_driver, dense_driver_matrix,
                               driver_ground_state, transverse_field,
                               uniform_driver)

from conftest import dense_driver_oracle


# --- specification -----------------------------------------------------------

def test_spec_validation():
    with pytest.raises(ValueError):
        DriverSpec(mode="bogus")
    with pytest.raises(ValueError):
        DriverSpec(sign="positive")
    with pytest.raises(ValueError):
        DriverSpec(max_order=2, amplitudes=(1.0,))       # amplitude count
    with pytest.raises(ValueError):
        DriverSpec(mode="explicit", terms=(((), 1.0),))  # empty subset
    with pytest.raises(ValueError):
        DriverSpec(mode="explicit", terms=(((0, 0), 1.0),))
    with pytest.raises(ValueError):
        DriverSpec(mode="explicit", terms=(((0, 1), 1.0), ((1, 0), 2.0)))


def test_sign_convention():
    assert transverse_field(2).sign_factor == -1.0
    assert DriverSpec(sign="raw").sign_factor == 1.0


def test_element_hamming_rule():
    drv = DriverSpec(max_order=2, amplitudes=(0.5, 0.25))
    assert drv.element(0b000, 0b001, 3) == -0.5
    assert drv.element(0b000, 0b011, 3) == -0.25
    assert drv.element(0b000, 0b111, 3) == 0.0   # distance beyond max_order
    assert drv.element(0b101, 0b101, 3) == 0.0   # diagonal


def test_explicit_element():
    drv = DriverSpec(mode="explicit", terms=(((0, 2), 2.0), ((1,), 3.0)))
    assert drv.element(0b000, 0b101, 3) == -2.0
    assert drv.element(0b000, 0b010, 3) == -3.0
    assert drv.element(0b000, 0b100, 3) == 0.0


def test_flip_mask_count():
    # all subsets of size <= n over N spins
    masks, amps = uniform_driver(2).flip_masks(5)
    assert len(masks) == 5 + 10
    assert np.all(amps == -1.0)
    with pytest.raises(ValueError):
        DriverSpec(mode="explicit", terms=(((4,), 1.0),)).flip_masks(3)


# --- matrix-free application ---------------------------------------------------

def test_apply_single_sigma_x():
    drv = transverse_field(1)
    out = apply_driver(drv, np.array([1.0, 0.0]))
    assert np.allclose(out, [0.0, -1.0])


def test_apply_dense_driver_on_uniform_vector():
    # order n = N: every row sums to -(2^N - 1) on the uniform vector
    n = 4
    u = np.ones(1 << n) / np.sqrt(1 << n)
    out = apply_driver(uniform_driver(n), u)
    assert np.allclose(out, -(2 ** n - 1) * u)


def test_apply_matches_pauli_tensor_oracle():
    rng = np.random.default_rng(7)
    for n_spins in (2, 3, 5):
        for order in (1, 2, n_spins):
            amps = tuple(rng.uniform(0.2, 1.5, size=order))
            drv = DriverSpec(max_order=order, amplitudes=amps)
            H = dense_driver_oracle(drv, n_spins)
            psi = rng.normal(size=1 << n_spins) + 1j * rng.normal(size=1 << n_spins)
            assert np.allclose(apply_driver(drv, psi), H @ psi, atol=1e-12)


def test_apply_matches_oracle_explicit_mode():
    rng = np.random.default_rng(8)
    drv = DriverSpec(mode="explicit",
                     terms=(((0,), 1.0), ((1, 3), 0.5), ((0, 1, 2), 2.0)))
    H = dense_driver_oracle(drv, 4)
    psi = rng.normal(size=16)
    assert np.allclose(apply_driver(drv, psi), H @ psi, atol=1e-12)
    assert np.allclose(dense_driver_matrix(drv, 4), H, atol=1e-12)


def test_element_matches_dense_matrix():
    drv = DriverSpec(max_order=3, amplitudes=(1.0, 0.5, 0.25))
    H = dense_driver_oracle(drv, 4)
    for a in range(16):
        for b in range(16):
            assert drv.element(a, b, 4) == pytest.approx(H[a, b], abs=1e-15)


def test_apply_rejects_wrong_length():
    with pytest.raises(ValueError):
        apply_driver(transverse_field(1), np.zeros(6))


# --- driver ground states --------------------------------------------------------

def test_transverse_field_ground_state_is_uniform():
    v = driver_ground_state(transverse_field(1), 3)
    assert np.allclose(v, np.full(8, 1 / np.sqrt(8)))


def test_order_two_ground_state_is_uniform():
    # complete flip graph up to distance 2 is connected: Perron-Frobenius
    # gives a unique non-negative ground state, here exactly uniform
    v = driver_ground_state(uniform_driver(2), 4)
    assert np.allclose(v, np.full(16, 0.25))


def test_ground_state_matches_dense_eigensolver():
    drv = DriverSpec(max_order=2, amplitudes=(1.0, 0.7))
    v = driver_ground_state(drv, 5)
    H = dense_driver_oracle(drv, 5)
    w, U = np.linalg.eigh(H)
    ref = U[:, 0]
    ref = ref * np.sign(ref[np.argmax(np.abs(ref))])
    assert np.allclose(np.abs(v), np.abs(ref), atol=1e-9)
    assert v[np.argmax(np.abs(v))].real > 0
    assert np.allclose(v.imag, 0.0)


def test_raw_sign_ground_state_has_mixed_signs():
    v = driver_ground_state(DriverSpec(sign="raw"), 3).real
    assert (v > 1e-9).any() and (v < -1e-9).any()
    H = dense_driver_oracle(DriverSpec(sign="raw"), 3)
    w, _ = np.linalg.eigh(H)
    assert float(np.real(np.vdot(v, H @ v))) == pytest.approx(w[0], abs=1e-9)


def test_degenerate_driver_detected():
    # a driver acting on spin 0 only leaves spin 1 free: two-fold degeneracy
    drv = DriverSpec(mode="explicit", terms=(((0,), 1.0),))
    with pytest.raises(DegenerateDriverError):
        driver_ground_state(drv, 2)


def test_large_n_iterative_path_matches_dense():
    # dim 1024 goes through the sparse eigensolver branch
    v = driver_ground_state(transverse_field(1), 10)
    assert np.allclose(np.abs(v), 1 / np.sqrt(1024), atol=1e-7)
