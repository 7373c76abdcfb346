from __future__ import annotations

import itertools
import logging
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import linalg

from .config import SEPARABILITY_TOL
from .covariance_core import GaussianState, reduce, selection, symplectic_spectrum
from .exceptions import InvalidArgumentError, UnsupportedPartitionError
from .schemas import EntanglementReport, ModeSelection, Partition, TripartiteClass

logger = logging.getLogger(__name__)


def partial_momentum_reversal(
    state: GaussianState, reversed_modes: Union[ModeSelection, Sequence[str]] = ()
) -> np.ndarray:
    """Lambda V Lambda with p -> -p on ``reversed_modes``; the result need not be physical."""
    labels = reversed_modes.labels if isinstance(reversed_modes, ModeSelection) else tuple(reversed_modes)
    flip = np.ones(2 * state.n_modes)
    if labels:
        for label in selection(state, labels).labels:
            flip[2 * state.index(label) + 1] = -1.0
    return flip[:, None] * state.cov * flip[None, :]


def ppt_margin(state: GaussianState, partition: Partition) -> float:
    """Smallest symplectic eigenvalue of the partially momentum-reversed covariance, minus 1.

    Only 1 x N splits are accepted: there PPT is necessary and sufficient for
    Gaussian states. Modes outside the partition are traced out first.
    """
    selection(state, partition.labels)
    if len(partition.side_a) == 1:
        single = partition.side_a
    elif len(partition.side_b) == 1:
        single = partition.side_b
    else:
        raise UnsupportedPartitionError(
            f"{len(partition.side_a)} x {len(partition.side_b)} split: PPT is not sufficient for "
            "multi-mode sides on both ends"
        )
    sub = reduce(state, partition.labels)
    return float(symplectic_spectrum(partial_momentum_reversal(sub, single))[0]) - 1


def is_separable(state: GaussianState, partition: Partition, tol: float = SEPARABILITY_TOL) -> bool:
    return ppt_margin(state, partition) >= -tol


def pair_margin(state: GaussianState, x: str, y: str) -> float:
    return ppt_margin(state, Partition.of((x,), (y,)))


def one_vs_rest_margin(state: GaussianState, label: str) -> float:
    return ppt_margin(state, Partition.one_vs_rest(label, state.modes))


def p_function_classical(state: GaussianState, tol: float = SEPARABILITY_TOL) -> bool:
    """True when V - 1 is positive semidefinite, i.e. the state has a regular positive P function."""
    lowest = float(linalg.eigvalsh(state.cov - np.eye(state.cov.shape[0]))[0])
    return lowest >= -tol


def pair_key(x: str, y: str) -> str:
    return f"{x}|{y}"


def classify_margins(
    modes: Sequence[str],
    pair_margins: Dict[str, float],
    bipartition_margins: Dict[str, float],
    tol: float = SEPARABILITY_TOL,
) -> Tuple[TripartiteClass, List[Tuple[str, str]], Optional[str]]:
    """Tripartite class from the three pair and three 1-vs-2 margins.

    Full inseparability is decided first, so a biseparable state is never
    reported as GHZ-type even when it has no pairwise entanglement.
    """
    if any(bipartition_margins[m] >= -tol for m in modes):
        return TripartiteClass.BISEPARABLE, [], None

    entangled = [
        (x, y) for x, y in itertools.combinations(modes, 2)
        if pair_margins[pair_key(x, y)] < -tol
    ]
    if not entangled:
        return TripartiteClass.GHZ, [], None
    if len(entangled) == 1:
        return TripartiteClass.ONE_PAIR, entangled, None
    if len(entangled) == 2:
        shared = (set(entangled[0]) & set(entangled[1])).pop()
        return TripartiteClass.TWO_WAY, entangled, shared
    return TripartiteClass.FULL_WITH_PAIRS, entangled, None


def classify_tripartite(state: GaussianState, tol: float = SEPARABILITY_TOL) -> EntanglementReport:
    if state.n_modes != 3:
        raise InvalidArgumentError(f"Tripartite classification needs exactly 3 modes, got {state.n_modes}")

    modes = state.modes
    pairs = {pair_key(x, y): pair_margin(state, x, y) for x, y in itertools.combinations(modes, 2)}
    splits = {m: one_vs_rest_margin(state, m) for m in modes}
    kind, entangled, shared = classify_margins(modes, pairs, splits, tol)
    logger.debug(f"Classified {modes}: {kind.value} pairs={pairs} splits={splits}")

    return EntanglementReport(
        modes=modes,
        pair_margins=pairs,
        bipartition_margins=splits,
        tripartite_class=kind,
        entangled_pairs=entangled,
        shared_mode=shared,
    )
