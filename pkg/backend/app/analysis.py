from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np

from .config import SEPARABILITY_TOL, SWEEP_WORKERS
from .covariance_core import GaussianState, is_pure, reduce, trusted_state
from .dynamics import (
    COLLECTIVE_MODES,
    SYSTEM_MODES,
    assert_decoupled,
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
from .exceptions import InvalidArgumentError, NoBoundaryError
from .schemas import ChainParams, ModelKind, Partition, ScenarioParams, SweepGrid, SweepRecord
from .separability import classify_margins, classify_tripartite, pair_key, pair_margin, ppt_margin
from .symplectic_ops import apply_local, collective_mixer

logger = logging.getLogger(__name__)

# Bisection stays off the degenerate endpoints t^2 = 0 and t^2 = 1.
BRACKET = (1e-6, 1 - 1e-6)


class BoundaryKind(str, Enum):
    SYS_PAIR = "sys"
    ENV_PAIR = "env"
    HIDDEN = "hidden"


def analytic_thresholds(n_bar: float) -> Tuple[float, float]:
    """(t^2 below which a1-a2 is separable, t^2 above which a1-c0 is separable)."""
    if n_bar < 0 or not math.isfinite(n_bar):
        raise InvalidArgumentError(f"n_bar must be finite and >= 0, got {n_bar}")
    return n_bar / (1 + n_bar), 1 / (1 + n_bar)


def hidden_threshold(s: float) -> float:
    """t^2 above which a2 is separable from the hidden partner modes, for any n_bar > 0."""
    n_bar_s = (math.cosh(2 * s) - 1) / 2
    return 1 / (1 + n_bar_s)


def _margin_function(n_bar: float, which: BoundaryKind, s: float) -> Callable[[float], float]:
    if which == BoundaryKind.SYS_PAIR:
        return lambda t_sq: pair_margin(collective_evolve(ScenarioParams(s=s, n_bar=n_bar, t_sq=t_sq)), "a1", "a2")
    if which == BoundaryKind.ENV_PAIR:
        return lambda t_sq: pair_margin(collective_evolve(ScenarioParams(s=s, n_bar=n_bar, t_sq=t_sq)), "a1", "c0")
    return lambda t_sq: hidden_mode_margin(purified_collective_evolve(ScenarioParams(s=s, n_bar=n_bar, t_sq=t_sq)))


def boundary_bisect(
    n_bar: float,
    which: BoundaryKind,
    s: float = 1.0,
    tol: float = 1e-9,
    max_iter: int = 200,
) -> float:
    """t^2 at which the chosen pair margin changes sign, found by bisection.

    Raises NoBoundaryError when the verdict is the same at both ends of the
    bracket, which is the case for s = 0 and for the degenerate n_bar = 0.
    """
    if tol <= 0:
        raise InvalidArgumentError(f"tol must be > 0, got {tol}")
    which = BoundaryKind(which)
    margin = _margin_function(n_bar, which, s)
    lo, hi = BRACKET
    entangled_lo = margin(lo) < -SEPARABILITY_TOL
    entangled_hi = margin(hi) < -SEPARABILITY_TOL
    if entangled_lo == entangled_hi:
        raise NoBoundaryError(
            f"No {which.value} boundary in t^2 for n_bar={n_bar}, s={s}: "
            f"{'entangled' if entangled_lo else 'separable'} across {BRACKET}"
        )
    for _ in range(max_iter):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        if (margin(mid) < 0) == entangled_lo:
            lo = mid
        else:
            hi = mid
    else:
        logger.warning(f"Bisection for {which.value} boundary stopped after {max_iter} iterations")
    return 0.5 * (lo + hi)


def _record(n_bar: float, t_sq: float, s: float, pairs: Dict[str, float], splits: Dict[str, float]) -> SweepRecord:
    kind, _, _ = classify_margins(COLLECTIVE_MODES, pairs, splits)
    return SweepRecord(
        n_bar=n_bar,
        t_sq=t_sq,
        s=s,
        margin_a1a2=pairs[pair_key("a1", "a2")],
        margin_a1c0=pairs[pair_key("a1", "c0")],
        margin_a2c0=pairs[pair_key("a2", "c0")],
        bip_a1=splits["a1"],
        bip_a2=splits["a2"],
        bip_c0=splits["c0"],
        tripartite_class=kind,
    )


def _chain_margins(cp: ChainParams) -> Tuple[Dict[str, float], Dict[str, float]]:
    """Margins with the whole b-mode group standing in for c0."""
    state = chain_evolve(cp)
    env = env_labels(cp.n_splitters)
    pairs = {
        pair_key("a1", "a2"): pair_margin(state, "a1", "a2"),
        pair_key("a1", "c0"): ppt_margin(state, Partition.of(("a1",), env)),
        pair_key("a2", "c0"): ppt_margin(state, Partition.of(("a2",), env)),
    }
    concentrated = concentrate_environment(state, cp)
    assert_decoupled(concentrated, COLLECTIVE_MODES)
    splits = {
        "a1": ppt_margin(state, Partition.one_vs_rest("a1", state.modes)),
        "a2": ppt_margin(state, Partition.one_vs_rest("a2", state.modes)),
        "c0": ppt_margin(concentrated, Partition.of(("c0",), SYSTEM_MODES)),
    }
    return pairs, splits


def evaluate_point(
    n_bar: float, t_sq: float, s: float = 1.0,
    model: ModelKind = ModelKind.COLLECTIVE, n_splitters: int = 100,
) -> SweepRecord:
    """All separability margins of one (n_bar, t^2) point under the chosen model."""
    p = ScenarioParams(s=s, n_bar=n_bar, t_sq=t_sq)
    if model == ModelKind.CHAIN:
        pairs, splits = _chain_margins(ChainParams(scenario=p, n_splitters=n_splitters))
    else:
        state = collective_evolve(p) if model == ModelKind.COLLECTIVE else closed_form_collective(p)
        report = classify_tripartite(state)
        pairs, splits = report.pair_margins, report.bipartition_margins
    record = _record(n_bar, t_sq, s, pairs, splits)
    logger.debug(f"n_bar={n_bar:.6g} t_sq={t_sq:.6g} -> {record.tripartite_class.value}")
    return record


def sweep(grid: SweepGrid, workers: int = SWEEP_WORKERS) -> List[SweepRecord]:
    """One record per grid point, n_bar-major, independent of evaluation order."""
    started = time.perf_counter()
    logger.info(
        f"Sweeping {len(grid.n_bar_values)}x{len(grid.t_sq_values)} grid, "
        f"model={grid.model.value}, s={grid.s}, workers={workers}"
    )

    def run(point):
        return evaluate_point(point[0], point[1], grid.s, grid.model, grid.n_splitters)

    if workers <= 1:
        records = [run(point) for point in grid.points]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(run, grid.points))
    logger.info(f"Sweep finished: {len(records)} records in {time.perf_counter() - started:.2f}s")
    return records


def _max_deviation(a: GaussianState, b: GaussianState) -> float:
    return float(np.max(np.abs(a.cov - b.cov)))


def model_deviations(p: ScenarioParams, n_splitters: int = 100, steps: int = 1000) -> Dict[str, float]:
    """Largest entrywise differences between the equivalent dynamical models."""
    cp = ChainParams(scenario=p, n_splitters=n_splitters)
    reference = closed_form_system(p)
    collective = collective_evolve(p)
    star = star_evolve(cp)
    chain = chain_evolve(cp)
    env = env_labels(n_splitters)

    deviations = {
        "collective": _max_deviation(reduce(collective, SYSTEM_MODES), reference),
        "collective_closed_form": _max_deviation(collective, closed_form_collective(p)),
        "chain": _max_deviation(reduce(chain, SYSTEM_MODES), reference),
        "chain_concentrated": _max_deviation(
            reduce(concentrate_environment(chain, cp), COLLECTIVE_MODES), collective,
        ),
        "star": _max_deviation(reduce(star, SYSTEM_MODES), reference),
        "star_mixed": _max_deviation(
            reduce(_relabel_collective(apply_local(star, collective_mixer(n_splitters), env)), COLLECTIVE_MODES),
            collective,
        ),
    }
    if p.t_sq > 0:
        deviations["fokker_planck"] = _max_deviation(fokker_planck_evolve(p, steps), reference)
    logger.info(f"Model deviations at {p.model_dump()}: {deviations}")
    return deviations


def _relabel_collective(state: GaussianState) -> GaussianState:
    labels = tuple("c" + m[1:] if m.startswith("b") else m for m in state.modes)
    return trusted_state(labels, state.cov)


def purification_summary(p: ScenarioParams, n_splitters: Optional[int] = None) -> Dict[str, object]:
    """Purity and hidden-mode entanglement of the purified collective (and optionally chain) model."""
    purified = purified_collective_evolve(p)
    margin = hidden_mode_margin(purified)
    summary: Dict[str, object] = {
        "n_bar": p.n_bar,
        "t_sq": p.t_sq,
        "s": p.s,
        "pure": is_pure(purified),
        "reduction_deviation": _max_deviation(reduce(purified, COLLECTIVE_MODES), collective_evolve(p)),
        "margin_a2_hidden": margin,
        "a2_hidden_entangled": margin < -SEPARABILITY_TOL,
        "hidden_threshold": hidden_threshold(p.s),
    }
    if n_splitters is not None:
        chain = purified_chain_evolve(ChainParams(scenario=p, n_splitters=n_splitters))
        summary["chain_pure"] = is_pure(chain)
        summary["chain_margin_a2_hidden"] = hidden_mode_margin(chain)
    return summary


def trajectory(p: ScenarioParams, steps: int = 1000, samples: int = 11) -> List[Dict[str, float]]:
    """a1-a2 margin along the decay path t^2 = exp(-tau), from the moment equations."""
    rows = []
    for t_sq, state in fokker_planck_trajectory(p, steps, samples):
        rows.append({"t_sq": t_sq, "margin_a1a2": pair_margin(state, "a1", "a2")})
    return rows
