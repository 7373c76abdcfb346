import math

import numpy as np
import pytest
from scipy import linalg

from backend.app.covariance_core import (
    GaussianState,
    is_pure,
    reduce,
    symplectic_eigenvalues,
    tensor,
    thermal_state,
    two_mode_squeezed,
)
from backend.app.dynamics import (
    COLLECTIVE_MODES,
    SYSTEM_MODES,
    _integrate,
    _moment_rhs,
    assert_decoupled,
    chain_collective_weights,
    chain_evolve,
    closed_form_collective,
    closed_form_system,
    collective_evolve,
    concentrate_environment,
    env_labels,
    fokker_planck_evolve,
    fokker_planck_trajectory,
    hidden_mode_margin,
    purified_chain_evolve,
    purified_collective_evolve,
    star_evolve,
)
from backend.app.exceptions import InvalidArgumentError, UnsupportedPartitionError
from backend.app.schemas import ChainParams, ScenarioParams
from backend.app.separability import pair_margin
from backend.app.symplectic_ops import apply_local, beam_splitter, collective_mixer

from .conftest import random_scenarios


def _max_dev(a, b):
    return float(np.max(np.abs(a.cov - b.cov)))


def test_three_models_agree(rng):
    for p in random_scenarios(rng, 100):
        reference = closed_form_system(p)
        assert _max_dev(reduce(collective_evolve(p), SYSTEM_MODES), reference) <= 1e-10
        for n in (1, 10, 100):
            chain = chain_evolve(ChainParams(scenario=p, n_splitters=n))
            assert _max_dev(reduce(chain, SYSTEM_MODES), reference) <= 1e-10


def test_collective_matches_entrywise_closed_form(rng):
    for p in random_scenarios(rng, 50):
        assert collective_evolve(p).allclose(closed_form_collective(p), atol=1e-12)


@pytest.mark.parametrize("t_sq", [0.0, 1.0])
def test_endpoints(t_sq):
    p = ScenarioParams(s=0.7, n_bar=1.5, t_sq=t_sq)
    state = collective_evolve(p)
    if t_sq == 1.0:
        assert np.allclose(state.block("c0"), p.n_tilde * np.eye(2))
        assert np.allclose(state.block("a2"), math.cosh(1.4) * np.eye(2))
    else:
        assert np.allclose(state.block("a2"), p.n_tilde * np.eye(2))
        assert np.allclose(state.block("a1", "a2"), 0.0)


def test_evolution_keeps_state_physical(rng):
    for p in random_scenarios(rng, 20):
        assert symplectic_eigenvalues(collective_evolve(p))[0] >= 1 - 1e-9


def test_vacuum_environment_keeps_purity():
    state = collective_evolve(ScenarioParams(s=1.2, n_bar=0.0, t_sq=0.37))
    assert is_pure(state)


@pytest.mark.parametrize("n", [2, 10, 100])
def test_star_model_reduces_to_collective(n):
    p = ScenarioParams(s=0.9, n_bar=1.3, t_sq=0.42)
    star = star_evolve(ChainParams(scenario=p, n_splitters=n))
    mixed = apply_local(star, collective_mixer(n), env_labels(n))
    assert _max_dev(reduce(mixed, ("a1", "a2", "b0")), collective_evolve(p)) <= 1e-12
    assert_decoupled(mixed, ("a1", "a2", "b0"))


@pytest.mark.parametrize("n", [2, 10, 100])
def test_chain_concentrates_onto_one_mode(n):
    p = ScenarioParams(s=0.9, n_bar=1.3, t_sq=0.42)
    cp = ChainParams(scenario=p, n_splitters=n)
    concentrated = concentrate_environment(chain_evolve(cp), cp)
    assert_decoupled(concentrated, COLLECTIVE_MODES)
    assert _max_dev(reduce(concentrated, COLLECTIVE_MODES), collective_evolve(p)) <= 1e-10


def test_chain_weights_are_normalized_and_decaying():
    cp = ChainParams(scenario=ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.3), n_splitters=20)
    w = chain_collective_weights(cp)
    assert np.linalg.norm(w) == pytest.approx(1.0)
    assert np.all(np.diff(w) < 0)


def test_chain_weights_without_interaction_are_uniform():
    cp = ChainParams(scenario=ScenarioParams(s=1.0, n_bar=1.0, t_sq=1.0), n_splitters=5)
    assert chain_collective_weights(cp) == pytest.approx(np.full(5, 1 / math.sqrt(5)))


def test_chain_with_one_splitter_is_collective():
    p = ScenarioParams(s=0.5, n_bar=2.0, t_sq=0.6)
    chain = chain_evolve(ChainParams(scenario=p, n_splitters=1))
    assert np.allclose(chain.cov, collective_evolve(p).cov, atol=1e-12)


def test_assert_decoupled_detects_correlations():
    state = collective_evolve(ScenarioParams(s=0.5, n_bar=2.0, t_sq=0.6))
    with pytest.raises(UnsupportedPartitionError):
        assert_decoupled(state, SYSTEM_MODES)


def test_rk4_and_dop853_integrators_agree():
    v = two_mode_squeezed(0.9).cov
    rhs = _moment_rhs(2.5)
    rk4 = _integrate(v, 1.7, 400, rhs, "rk4")
    dop853 = _integrate(v, 1.7, 1, rhs, "dop853")
    assert np.allclose(rk4, dop853, rtol=0, atol=1e-9)


@pytest.mark.parametrize("method", ["rk4", "dop853"])
@pytest.mark.parametrize("n_tilde", [1.0, 3.0, 11.0])
def test_thermal_a2_is_a_fixed_point(method, n_tilde):
    # uncorrelated a2 already at the bath variance does not move
    v = linalg.block_diag(np.eye(2), n_tilde * np.eye(2))
    out = _integrate(v, 2.0, 100, _moment_rhs(n_tilde), method)
    assert np.allclose(out[2:, 2:], n_tilde * np.eye(2), rtol=0, atol=1e-12)
    assert np.allclose(out, v, rtol=0, atol=1e-12)


def test_fokker_planck_matches_closed_form(rng):
    for p in random_scenarios(rng, 10, t_sq_range=(0.05, 1.0)):
        assert _max_dev(fokker_planck_evolve(p, steps=1000), closed_form_system(p)) <= 1e-8


def test_fokker_planck_is_fourth_order():
    p = ScenarioParams(s=1.0, n_bar=2.0, t_sq=0.3)
    reference = closed_form_system(p)
    coarse = _max_dev(fokker_planck_evolve(p, steps=10), reference)
    fine = _max_dev(fokker_planck_evolve(p, steps=20), reference)
    assert 12 < coarse / fine < 20


def test_fokker_planck_dop853_option():
    p = ScenarioParams(s=0.6, n_bar=0.8, t_sq=0.45)
    state = fokker_planck_evolve(p, method="dop853")
    assert _max_dev(state, closed_form_system(p)) <= 1e-8


@pytest.mark.parametrize("kwargs, match", [
    (dict(steps=0), "steps"),
    (dict(method="euler"), "method"),
])
def test_fokker_planck_rejects_bad_arguments(kwargs, match):
    with pytest.raises(InvalidArgumentError, match=match):
        fokker_planck_evolve(ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.5), **kwargs)


def test_fokker_planck_rejects_infinite_time():
    with pytest.raises(InvalidArgumentError, match="infinite"):
        fokker_planck_evolve(ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.0))


def test_trajectory_samples_decay_path():
    p = ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.2)
    path = fokker_planck_trajectory(p, steps=1000, samples=5)
    assert len(path) == 5
    assert path[0][0] == 1.0
    assert path[-1][0] == pytest.approx(0.2)
    last = ScenarioParams(s=1.0, n_bar=1.0, t_sq=path[-1][0])
    assert _max_dev(path[-1][1], closed_form_system(last)) <= 1e-8


def test_trajectory_needs_two_samples():
    with pytest.raises(InvalidArgumentError):
        fokker_planck_trajectory(ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.2), samples=1)


def test_trajectory_rejects_fewer_steps_than_segments():
    with pytest.raises(InvalidArgumentError, match="samples - 1"):
        fokker_planck_trajectory(ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.2), steps=5, samples=11)


def test_trajectory_with_one_segment_matches_evolve():
    p = ScenarioParams(s=0.7, n_bar=1.5, t_sq=0.3)
    path = fokker_planck_trajectory(p, steps=37, samples=2)
    assert path[-1][1].allclose(fokker_planck_evolve(p, steps=37), atol=1e-13)


def test_trajectory_uses_leftover_steps():
    p = ScenarioParams(s=1.0, n_bar=2.0, t_sq=0.05)
    reference = closed_form_system(p)
    even = _max_dev(fokker_planck_trajectory(p, steps=9, samples=4)[-1][1], reference)
    uneven = _max_dev(fokker_planck_trajectory(p, steps=11, samples=4)[-1][1], reference)
    assert uneven < even


@pytest.mark.parametrize("s", [0.2, 1.0, 2.0])
def test_vacuum_environment_never_separates(s):
    for t_sq in np.linspace(0.01, 1.0, 25):
        state = collective_evolve(ScenarioParams(s=s, n_bar=0.0, t_sq=float(t_sq)))
        assert pair_margin(state, "a1", "a2") < 0


def test_purified_collective_is_pure_and_reduces_correctly(rng):
    for p in random_scenarios(rng, 20):
        purified = purified_collective_evolve(p)
        assert purified.modes == ("a1", "a2", "c0", "c0p")
        assert is_pure(purified)
        assert reduce(purified, COLLECTIVE_MODES).allclose(collective_evolve(p), atol=1e-12)


@pytest.mark.parametrize("n", [1, 5])
def test_purified_chain_is_pure(n):
    p = ScenarioParams(s=0.8, n_bar=1.5, t_sq=0.35)
    cp = ChainParams(scenario=p, n_splitters=n)
    purified = purified_chain_evolve(cp)
    assert is_pure(purified)
    chain = chain_evolve(cp)
    assert reduce(purified, chain.modes).allclose(chain, atol=1e-12)


def test_hidden_margin_needs_hidden_modes():
    with pytest.raises(InvalidArgumentError):
        hidden_mode_margin(collective_evolve(ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.5)))


def test_hidden_margin_of_chain_matches_collective():
    p = ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.3)
    chain = purified_chain_evolve(ChainParams(scenario=p, n_splitters=8))
    assert hidden_mode_margin(chain) == pytest.approx(hidden_mode_margin(purified_collective_evolve(p)), abs=1e-9)


def test_hidden_margin_ignores_other_labels_ending_in_p():
    p = ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.3)
    purified = purified_collective_evolve(p)
    extended = tensor(purified, thermal_state(3.0, "xp"))
    assert hidden_mode_margin(extended) == pytest.approx(hidden_mode_margin(purified), abs=1e-12)
    with pytest.raises(InvalidArgumentError):
        hidden_mode_margin(tensor(collective_evolve(p), thermal_state(3.0, "xp")))


def test_hidden_margin_accepts_explicit_partners():
    p = ScenarioParams(s=1.0, n_bar=1.0, t_sq=0.3)
    purified = purified_collective_evolve(p)
    renamed = GaussianState(modes=("a1", "a2", "c0", "env"), cov=purified.cov)
    assert hidden_mode_margin(renamed, hidden=("env",)) == pytest.approx(hidden_mode_margin(purified), abs=1e-12)


def _energy(state):
    return float(np.trace(reduce(state, ("a2", "c0")).cov))


def test_beam_splitter_conserves_energy_of_a2_and_c0(rng):
    for p in random_scenarios(rng, 20):
        before = ScenarioParams(s=p.s, n_bar=p.n_bar, t_sq=1.0)
        assert _energy(collective_evolve(p)) == pytest.approx(_energy(collective_evolve(before)), rel=1e-12)


def test_closed_form_limits():
    p = ScenarioParams(s=0.6, n_bar=1.0, t_sq=1.0)
    assert closed_form_system(p).allclose(two_mode_squeezed(0.6))
    p = ScenarioParams(s=0.6, n_bar=1.0, t_sq=0.0)
    assert np.allclose(closed_form_system(p).cov, np.diag([math.cosh(1.2)] * 2 + [3.0] * 2))


def test_unsqueezed_system_leaves_a1_decoupled():
    state = collective_evolve(ScenarioParams(s=0.0, n_bar=1.0, t_sq=0.4))
    assert np.allclose(state.block("a1"), np.eye(2))
    assert np.allclose(state.block("a1", "a2"), 0.0)
    assert np.allclose(state.block("a1", "c0"), 0.0)


def test_chain_order_does_not_change_system_reduction():
    p = ScenarioParams(s=0.8, n_bar=1.2, t_sq=0.35)
    cp = ChainParams(scenario=p, n_splitters=6)
    env = env_labels(6)
    state = two_mode_squeezed(p.s)
    for label in env:
        state = tensor(state, thermal_state(p.n_tilde, label))
    for label in reversed(env):
        state = apply_local(state, beam_splitter(cp.splitter_t, 0, 1, 2), ("a2", label))
    assert _max_dev(reduce(state, SYSTEM_MODES), reduce(chain_evolve(cp), SYSTEM_MODES)) <= 1e-12


def test_vacuum_environment_has_no_hidden_partner():
    state = purified_collective_evolve(ScenarioParams(s=1.0, n_bar=0.0, t_sq=0.2))
    assert hidden_mode_margin(state) >= -1e-9
