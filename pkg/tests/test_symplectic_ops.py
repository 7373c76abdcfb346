import math

import numpy as np
import pytest

from backend.app.covariance_core import (
    is_pure,
    symplectic_eigenvalues,
    symplectic_form,
    tensor,
    thermal_state,
    two_mode_squeezed,
    vacuum_state,
)
from backend.app.exceptions import DimensionMismatchError, InvalidArgumentError
from backend.app.symplectic_ops import (
    SymplecticMatrix,
    apply,
    apply_local,
    beam_splitter,
    collective_mixer,
    embed,
    fourier_basis,
    identity,
    local_update,
    passive,
    phase_rotation,
    single_mode_squeezer,
    two_mode_squeezer,
)


def _is_symplectic(S):
    omega = symplectic_form(S.n_modes)
    return np.allclose(S.mat @ omega @ S.mat.T, omega, atol=1e-12)


@pytest.mark.parametrize("build", [
    lambda: beam_splitter(0.3, 0, 2, 3),
    lambda: two_mode_squeezer(0.8, 1, 0, 2),
    lambda: phase_rotation(1.1, 1, 2),
    lambda: single_mode_squeezer(-0.4, 0, 1),
    lambda: collective_mixer(7),
])
def test_builders_are_symplectic(build):
    assert _is_symplectic(build())


def test_non_symplectic_matrix_rejected():
    with pytest.raises(InvalidArgumentError, match="not symplectic"):
        SymplecticMatrix(mat=2 * np.eye(2), n_modes=1)


def test_wrong_shape_rejected():
    with pytest.raises(DimensionMismatchError):
        SymplecticMatrix(mat=np.eye(4), n_modes=1)


@pytest.mark.parametrize("t", [-0.1, 1.2])
def test_beam_splitter_rejects_bad_transmittivity(t):
    with pytest.raises(InvalidArgumentError):
        beam_splitter(t, 0, 1, 2)


@pytest.mark.parametrize("i, j", [(0, 0), (0, 2), (-1, 1)])
def test_beam_splitter_rejects_bad_indices(i, j):
    with pytest.raises(InvalidArgumentError):
        beam_splitter(0.5, i, j, 2)


def test_beam_splitter_with_unit_transmittivity_is_identity():
    assert np.allclose(beam_splitter(1.0, 0, 1, 2).mat, identity(2).mat)


def test_beam_splitters_compose_by_angle(rng):
    for _ in range(10):
        t1, t2 = rng.uniform(0.72, 1.0, size=2)
        # x_i -> cos(a) x_i - sin(a) x_j; angles add while the sum stays below pi/2
        angle = math.acos(t1) + math.acos(t2)
        composed = beam_splitter(t1, 0, 1, 2) @ beam_splitter(t2, 0, 1, 2)
        assert np.allclose(composed.mat, beam_splitter(math.cos(angle), 0, 1, 2).mat, atol=1e-12)


def test_inverse_undoes_map():
    S = two_mode_squeezer(0.6, 0, 1, 2) @ beam_splitter(0.4, 0, 1, 2)
    assert np.allclose((S @ S.inverse()).mat, np.eye(4), atol=1e-12)


def test_composition_needs_matching_sizes():
    with pytest.raises(DimensionMismatchError):
        identity(2) @ identity(3)


@pytest.mark.parametrize("s", [0.2, 1.0, 2.0])
def test_squeezer_on_vacuum_gives_two_mode_squeezed_state(s):
    state = apply(vacuum_state(2, ("a1", "a2")), two_mode_squeezer(s, 0, 1, 2))
    assert state.allclose(two_mode_squeezed(s), atol=1e-12)


def test_symplectic_maps_preserve_spectrum():
    state = tensor(two_mode_squeezed(0.9), thermal_state(4.0, "c0"))
    before = symplectic_eigenvalues(state)
    S = beam_splitter(0.6, 1, 2, 3) @ phase_rotation(0.3, 0, 3) @ single_mode_squeezer(0.5, 2, 3)
    after = symplectic_eigenvalues(apply(state, S))
    assert after == pytest.approx(before, rel=1e-10)


def test_apply_rejects_size_mismatch():
    with pytest.raises(DimensionMismatchError):
        apply(vacuum_state(2), identity(3))


def test_apply_local_matches_embedded_map():
    state = tensor(two_mode_squeezed(0.5), thermal_state(3.0, "c0"))
    local = apply_local(state, beam_splitter(0.7, 0, 1, 2), ("a2", "c0"))
    full = apply(state, beam_splitter(0.7, 1, 2, 3))
    assert local.allclose(full, atol=1e-14)


def test_apply_local_respects_label_order():
    state = tensor(two_mode_squeezed(0.5), thermal_state(3.0, "c0"))
    swapped = apply_local(state, beam_splitter(0.7, 1, 0, 2), ("c0", "a2"))
    assert swapped.allclose(apply(state, beam_splitter(0.7, 1, 2, 3)), atol=1e-14)


def test_local_update_equals_full_conjugation(rng):
    a = rng.normal(size=(8, 8))
    cov = a @ a.T
    block = beam_splitter(0.35, 0, 1, 2).mat
    idx = np.array([2, 3, 6, 7])
    full = embed(block, (1, 3), 4).mat
    assert np.allclose(local_update(cov, block, idx), full @ cov @ full.T, atol=1e-12)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 11, 100])
def test_fourier_basis_is_orthonormal(n):
    basis = fourier_basis(n)
    assert basis.shape == (n, n)
    assert np.allclose(basis @ basis.T, np.eye(n), atol=1e-12)
    assert np.allclose(basis[0], 1 / math.sqrt(n))


def test_fourier_basis_needs_modes():
    with pytest.raises(InvalidArgumentError):
        fourier_basis(0)


def test_passive_map_leaves_thermal_product_invariant():
    n = 6
    env = 3.0 * np.eye(2 * n)
    mixed = collective_mixer(n).mat @ env @ collective_mixer(n).mat.T
    assert np.allclose(mixed, env, atol=1e-12)


def test_passive_map_keeps_purity():
    state = tensor(two_mode_squeezed(0.8), vacuum_state(3, ("b0", "b1", "b2")))
    state = apply_local(state, passive(fourier_basis(4)), ("a2", "b0", "b1", "b2"))
    assert is_pure(state)


def test_full_reflection_swaps_with_sign():
    state = apply(tensor(thermal_state(2.0, "x"), thermal_state(5.0, "y")), beam_splitter(0.0, 0, 1, 2))
    assert np.allclose(state.block("x"), 5.0 * np.eye(2))
    assert np.allclose(state.block("y"), 2.0 * np.eye(2))
    assert np.allclose(beam_splitter(0.0, 0, 1, 2).mat[:2, 2:], -np.eye(2))


def test_zero_squeezing_is_identity():
    assert np.allclose(two_mode_squeezer(0.0, 0, 1, 3).mat, np.eye(6))


def test_apply_identity_leaves_state_unchanged():
    state = two_mode_squeezed(0.4)
    assert apply(state, identity(2)) == state


def test_single_environment_mode_mixer_is_identity():
    assert np.allclose(collective_mixer(1).mat, np.eye(2))


def test_random_compositions_stay_physical(rng):
    state = tensor(two_mode_squeezed(0.5), thermal_state(2.0, "c0"))
    for _ in range(20):
        S = identity(3)
        for _ in range(4):
            i, j = rng.choice(3, size=2, replace=False)
            if rng.uniform() < 0.5:
                S = beam_splitter(float(rng.uniform()), int(i), int(j), 3) @ S
            else:
                S = two_mode_squeezer(float(rng.uniform(-1, 1)), int(i), int(j), 3) @ S
        assert symplectic_eigenvalues(apply(state, S)) == pytest.approx(symplectic_eigenvalues(state), rel=1e-9)
