from __future__ import annotations

import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from filterpy.common import runge_kutta4
from scipy import linalg
from scipy.integrate import solve_ivp

from .config import RK4_STEPS
from .covariance_core import GaussianState, tensor, thermal_state, trusted_state, two_mode_squeezed
from .exceptions import InvalidArgumentError, UnsupportedPartitionError
from .schemas import ChainParams, Partition, ScenarioParams
from .separability import ppt_margin
from .symplectic_ops import (
    apply,
    apply_local,
    beam_splitter,
    beam_splitter_block,
    fourier_basis,
    local_update,
    passive,
)

logger = logging.getLogger(__name__)

SYSTEM_MODES = ("a1", "a2")
COLLECTIVE_MODES = ("a1", "a2", "c0")
COLLECTIVE_HIDDEN = "c0p"


def env_labels(n: int) -> Tuple[str, ...]:
    return tuple(f"b{m}" for m in range(n))


def hidden_labels(n: int) -> Tuple[str, ...]:
    return tuple(f"b{m}p" for m in range(n))


def collective_labels(n: int) -> Tuple[str, ...]:
    return tuple(f"c{m}" for m in range(n))


def _initial_system(p: ScenarioParams) -> np.ndarray:
    return two_mode_squeezed(p.s, SYSTEM_MODES).cov


def collective_evolve(p: ScenarioParams) -> GaussianState:
    """a2 meets the collective environment mode c0 on a single beam splitter of transmittivity t^2."""
    v0 = tensor(two_mode_squeezed(p.s, SYSTEM_MODES), thermal_state(p.n_tilde, "c0"))
    return apply(v0, beam_splitter(p.t, 1, 2, 3))


def closed_form_system(p: ScenarioParams) -> GaussianState:
    ch, sh = math.cosh(2 * p.s), math.sinh(2 * p.s)
    eye, sigma_z = np.eye(2), np.diag([1.0, -1.0])
    decayed = p.t_sq * ch + (1 - p.t_sq) * p.n_tilde
    cov = np.block([
        [ch * eye, p.t * sh * sigma_z],
        [p.t * sh * sigma_z, decayed * eye],
    ])
    return trusted_state(SYSTEM_MODES, cov)


def closed_form_collective(p: ScenarioParams) -> GaussianState:
    """Entry-by-entry form of the (a1, a2, c0) covariance after the collective beam splitter."""
    ch, sh = math.cosh(2 * p.s), math.sinh(2 * p.s)
    t, r, n_tilde = p.t, p.r, p.n_tilde
    eye, sigma_z = np.eye(2), np.diag([1.0, -1.0])
    cov = np.block([
        [ch * eye, t * sh * sigma_z, r * sh * sigma_z],
        [t * sh * sigma_z, (t * t * ch + r * r * n_tilde) * eye, t * r * (ch - n_tilde) * eye],
        [r * sh * sigma_z, t * r * (ch - n_tilde) * eye, (r * r * ch + t * t * n_tilde) * eye],
    ])
    return trusted_state(COLLECTIVE_MODES, cov)


def _moment_rhs(n_tilde: float) -> Callable[[np.ndarray], np.ndarray]:
    # V' = A V + V A^T + D: a2 relaxes to n_tilde at rate 1, a1-a2 correlations at rate 1/2
    drift = np.diag([0.0, 0.0, -0.5, -0.5])
    diffusion = np.diag([0.0, 0.0, n_tilde, n_tilde])

    def rhs(v: np.ndarray) -> np.ndarray:
        return drift @ v + v @ drift.T + diffusion

    return rhs


def _integrate(v: np.ndarray, tau: float, steps: int, rhs, method: str) -> np.ndarray:
    if method == "rk4":
        dx = tau / steps
        for _ in range(steps):
            v = runge_kutta4(v, 0.0, dx, lambda y, _x: rhs(y))
        return v
    if method == "dop853":
        if tau == 0:
            return v
        sol = solve_ivp(
            lambda _, y: rhs(y.reshape(4, 4)).ravel(),
            (0.0, tau), v.ravel(), method="DOP853", rtol=1e-12, atol=1e-12,
        )
        if not sol.success:
            raise InvalidArgumentError(f"Moment integration failed: {sol.message}")
        return sol.y[:, -1].reshape(4, 4)
    raise InvalidArgumentError(f"Unknown integration method '{method}'")


def fokker_planck_evolve(p: ScenarioParams, steps: int = RK4_STEPS, method: str = "rk4") -> GaussianState:
    """Integrates the second-moment equations of the thermal Fokker-Planck dynamics up to t^2.

    Time is measured in units of 1/gamma, so the final time is -ln(t^2);
    t^2 = 0 would need infinite time and is rejected.
    """
    if steps < 1:
        raise InvalidArgumentError(f"steps must be >= 1, got {steps}")
    if p.t_sq == 0:
        raise InvalidArgumentError("t_sq = 0 corresponds to infinite interaction time")
    v = _integrate(_initial_system(p), p.tau, steps, _moment_rhs(p.n_tilde), method)
    logger.debug(f"Integrated moments to tau={p.tau:.6g} with {steps} {method} steps")
    return trusted_state(SYSTEM_MODES, v)


def fokker_planck_trajectory(
    p: ScenarioParams, steps: int = RK4_STEPS, samples: int = 11,
) -> List[Tuple[float, GaussianState]]:
    """(t^2, state) at ``samples`` evenly spaced times between 0 and -ln(p.t_sq)."""
    if samples < 2:
        raise InvalidArgumentError(f"samples must be >= 2, got {samples}")
    if steps < samples - 1:
        raise InvalidArgumentError(f"steps must be >= samples - 1 = {samples - 1}, got {steps}")
    if p.t_sq == 0:
        raise InvalidArgumentError("t_sq = 0 corresponds to infinite interaction time")
    rhs = _moment_rhs(p.n_tilde)
    segment = p.tau / (samples - 1)
    per_segment, extra = divmod(steps, samples - 1)
    v = _initial_system(p)
    out = [(1.0, trusted_state(SYSTEM_MODES, v))]
    for k in range(1, samples):
        # the first `extra` segments take one more step, so `steps` are taken in total
        v = _integrate(v, segment, per_segment + (k <= extra), rhs, "rk4")
        out.append((math.exp(-k * segment), trusted_state(SYSTEM_MODES, v)))
    return out


def _chain_initial(cp: ChainParams, purified: bool = False) -> Tuple[Tuple[str, ...], np.ndarray]:
    n = cp.n_splitters
    p = cp.scenario
    modes = SYSTEM_MODES + env_labels(n)
    env = p.n_tilde * np.eye(2 * n)
    if purified:
        modes += hidden_labels(n)
        env = p.n_tilde * np.eye(4 * n)
        cross = math.sinh(2 * p.env_squeezing) * np.diag([1.0, -1.0])
        for m in range(n):
            b, bp = 2 * m, 2 * (n + m)
            env[b:b + 2, bp:bp + 2] = cross
            env[bp:bp + 2, b:b + 2] = cross
    return modes, linalg.block_diag(_initial_system(p), env)


def _run_chain(cp: ChainParams, cov: np.ndarray) -> np.ndarray:
    block = beam_splitter_block(cp.splitter_t)
    for m in range(cp.n_splitters):
        b = 2 * (2 + m)
        cov = local_update(cov, block, np.array([2, 3, b, b + 1]))
    return cov


def chain_evolve(cp: ChainParams) -> GaussianState:
    """a2 passes N beam splitters in turn, meeting a fresh thermal mode b_m at each.

    Each splitter has amplitude transmittivity t^(1/N), so the accumulated
    transmittivity is t^2. a2 meets b0 first.
    """
    modes, cov = _chain_initial(cp)
    return GaussianState(modes=modes, cov=_run_chain(cp, cov))


def purified_chain_evolve(cp: ChainParams) -> GaussianState:
    """Chain with every thermal b_m purified by a hidden partner b_m' (labels ``b{m}p``)."""
    modes, cov = _chain_initial(cp, purified=True)
    return GaussianState(modes=modes, cov=_run_chain(cp, cov))


def star_evolve(cp: ChainParams) -> GaussianState:
    """All b_m coupled to a2 at once with equal strength.

    The environment is rotated into collective modes, c0 meets a2 on one beam
    splitter, and the rotation is undone, so the result is in the b_m basis.
    """
    n = cp.n_splitters
    p = cp.scenario
    env = env_labels(n)
    modes, cov = _chain_initial(cp)
    state = trusted_state(modes, cov)
    basis = fourier_basis(n)
    state = apply_local(state, passive(basis), env)
    state = apply_local(state, beam_splitter(p.t, 0, 1, 2), ("a2", "b0"))
    state = apply_local(state, passive(basis.T), env)
    return GaussianState(modes=state.modes, cov=state.cov)


def chain_collective_weights(cp: ChainParams) -> np.ndarray:
    """Unit vector w with sum_m w_m b_m the environment mode that received a2's amplitude.

    Splitter m hands over R T^m of the original a2. With no interaction
    (t^2 = 1) the uniform collective mode is returned.
    """
    T, R = cp.splitter_t, cp.splitter_r
    weights = R * T ** np.arange(cp.n_splitters)
    norm = float(np.linalg.norm(weights))
    if norm < 1e-12:
        return fourier_basis(cp.n_splitters)[0]
    return weights / norm


def concentrate_environment(state: GaussianState, cp: ChainParams) -> GaussianState:
    """Rotates the chain's b-modes so that c0 carries all of the coupling to the system.

    The rotation is passive and local to the environment, so it changes no
    separability verdict across a system|environment cut.
    """
    n = cp.n_splitters
    w = chain_collective_weights(cp)
    rotation = np.vstack([w, linalg.null_space(w[None, :]).T])
    rotated = apply_local(state, passive(rotation), env_labels(n))
    labels = tuple(
        dict(zip(env_labels(n), collective_labels(n))).get(m, m) for m in rotated.modes
    )
    return trusted_state(labels, rotated.cov)


def assert_decoupled(state: GaussianState, keep: Sequence[str], tol: float = 1e-9) -> None:
    """Raises unless modes outside ``keep`` are uncorrelated with the modes in ``keep``."""
    kept = state.quadrature_indices(keep)
    rest = np.setdiff1d(np.arange(state.cov.shape[0]), kept)
    if rest.size == 0:
        return
    leak = float(np.max(np.abs(state.cov[np.ix_(rest, kept)])))
    if leak > tol:
        raise UnsupportedPartitionError(
            f"Modes outside {tuple(keep)} remain correlated with them (max {leak:.3g})"
        )


def purified_collective_evolve(p: ScenarioParams) -> GaussianState:
    """Collective model with c0 purified by its counter mode c0p; the result is pure."""
    system = two_mode_squeezed(p.s, SYSTEM_MODES)
    environment = two_mode_squeezed(p.env_squeezing, ("c0", COLLECTIVE_HIDDEN))
    return apply(tensor(system, environment), beam_splitter(p.t, 1, 2, 4))


def hidden_mode_margin(state: GaussianState, hidden: Optional[Sequence[str]] = None) -> float:
    """PPT margin of a2 against the group of all hidden partner modes.

    Without ``hidden``, the partners are the purifying labels this module
    assigns: ``c0p`` and ``b{m}p``.
    """
    if hidden is None:
        known = {COLLECTIVE_HIDDEN, *hidden_labels(len(state.modes))}
        hidden = tuple(m for m in state.modes if m in known)
    hidden = tuple(hidden)
    if not hidden:
        raise InvalidArgumentError("State has no hidden partner modes")
    return ppt_margin(state, Partition.of(("a2",), hidden))
