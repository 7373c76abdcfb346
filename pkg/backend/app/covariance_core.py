from __future__ import annotations

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, ValidationInfo, field_validator, model_validator
from scipy import linalg

from .config import PHYSICAL_TOL
from .exceptions import (
    DuplicateModeError,
    InvalidArgumentError,
    InvalidSelectionError,
    MalformedStateError,
    UnphysicalStateError,
)
from .schemas import ModeSelection

logger = logging.getLogger(__name__)

Selection = Union[ModeSelection, Sequence[str], str]

# Asymmetry above this is a caller bug, not rounding noise.
_ASYMMETRY_REJECT = 1e-8


def symplectic_form(n_modes: int) -> np.ndarray:
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def _check_matrix(cov: np.ndarray) -> np.ndarray:
    cov = np.array(cov, dtype=float)
    if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] == 0 or cov.shape[0] % 2:
        raise MalformedStateError(f"Covariance must be a non-empty 2n x 2n matrix, got shape {cov.shape}")
    if not np.all(np.isfinite(cov)):
        raise MalformedStateError("Covariance has non-finite entries")
    scale = max(1.0, float(np.max(np.abs(cov))))
    if np.max(np.abs(cov - cov.T)) > _ASYMMETRY_REJECT * scale:
        raise MalformedStateError("Covariance is not symmetric")
    return cov


def symplectic_spectrum(cov: np.ndarray) -> np.ndarray:
    """Symplectic eigenvalues of a raw covariance-shaped matrix, ascending.

    For positive definite ``cov = L L^T`` the matrix ``L^T Omega L`` is
    antisymmetric and similar to ``Omega cov``, so ``i L^T Omega L`` is
    Hermitian with eigenvalues ``+-nu_k``.
    """
    cov = _check_matrix(cov)
    cov = (cov + cov.T) / 2
    n = cov.shape[0] // 2
    omega = symplectic_form(n)
    try:
        chol = linalg.cholesky(cov, lower=True)
    except linalg.LinAlgError:
        logger.warning("Covariance is not positive definite, using a general eigensolve of Omega.V")
        moduli = np.sort(np.abs(np.linalg.eigvals(omega @ cov)))
        return moduli[::2]
    antisym = chol.T @ omega @ chol
    eig = linalg.eigvalsh(1j * antisym)
    return np.sort(eig[n:])


class GaussianState(BaseModel):
    """Zero-mean Gaussian state given by its covariance matrix.

    Quadratures are ordered mode-major, (q1, p1, q2, p2, ...), and the vacuum
    covariance is the identity. ``cov`` is symmetrized and frozen on
    construction. States violating the uncertainty relation are rejected
    unless validated with ``context={"check_physical": False}``
    (see :meth:`unchecked`).
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    modes: Tuple[str, ...]
    cov: np.ndarray

    @field_validator("modes", mode="before")
    @classmethod
    def _unique_modes(cls, v):
        labels = tuple(str(x) for x in v)
        if not labels:
            raise InvalidArgumentError("A state needs at least one mode")
        if len(set(labels)) != len(labels):
            raise DuplicateModeError(f"Duplicate mode labels: {labels}")
        return labels

    @field_validator("cov", mode="before")
    @classmethod
    def _symmetrize(cls, v):
        cov = _check_matrix(v)
        cov = (cov + cov.T) / 2
        cov.setflags(write=False)
        return cov

    @model_validator(mode="after")
    def _physical(self, info: ValidationInfo):
        if self.cov.shape[0] != 2 * len(self.modes):
            raise MalformedStateError(
                f"{len(self.modes)} modes need a {2 * len(self.modes)}-dim covariance, got {self.cov.shape[0]}"
            )
        if (info.context or {}).get("check_physical", True):
            margin = float(symplectic_spectrum(self.cov)[0]) - 1
            if margin < -PHYSICAL_TOL:
                raise UnphysicalStateError(f"Smallest symplectic eigenvalue is {1 + margin:.6g} < 1")
        return self

    @classmethod
    def unchecked(cls, cov, modes: Optional[Sequence[str]] = None) -> "GaussianState":
        cov = np.asarray(cov, dtype=float)
        if modes is None:
            modes = default_labels(cov.shape[0] // 2)
        return cls.model_validate({"modes": modes, "cov": cov}, context={"check_physical": False})

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def index(self, label: str) -> int:
        try:
            return self.modes.index(label)
        except ValueError:
            raise InvalidSelectionError(f"Unknown mode '{label}' (state has {list(self.modes)})") from None

    def quadrature_indices(self, labels: Sequence[str]) -> np.ndarray:
        idx = [self.index(label) for label in labels]
        return np.array([2 * k + q for k in idx for q in (0, 1)], dtype=int)

    def block(self, x: str, y: Optional[str] = None) -> np.ndarray:
        """2x2 covariance block between modes ``x`` and ``y`` (``y`` defaults to ``x``)."""
        i, j = self.index(x), self.index(y or x)
        return self.cov[2 * i:2 * i + 2, 2 * j:2 * j + 2]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, GaussianState):
            return NotImplemented
        return self.modes == other.modes and np.array_equal(self.cov, other.cov)

    def allclose(self, other: "GaussianState", atol: float = 1e-12) -> bool:
        return self.modes == other.modes and np.allclose(self.cov, other.cov, rtol=0, atol=atol)


def trusted_state(modes: Sequence[str], cov: np.ndarray) -> GaussianState:
    """Builds a state without validation; only for outputs of physicality-preserving maps."""
    cov = np.array(cov, dtype=float)
    cov = (cov + cov.T) / 2
    cov.setflags(write=False)
    return GaussianState.model_construct(modes=tuple(modes), cov=cov)


def default_labels(n_modes: int) -> Tuple[str, ...]:
    return tuple(f"m{k}" for k in range(n_modes))


def selection(state: GaussianState, keep: Selection) -> ModeSelection:
    if not isinstance(keep, ModeSelection):
        keep = ModeSelection(labels=keep)
    unknown = [label for label in keep.labels if label not in state.modes]
    if unknown:
        raise InvalidSelectionError(f"Unknown modes {unknown} (state has {list(state.modes)})")
    return keep


def vacuum_state(n_modes: int, labels: Optional[Sequence[str]] = None) -> GaussianState:
    if not isinstance(n_modes, (int, np.integer)) or n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be a positive integer, got {n_modes!r}")
    return GaussianState(modes=labels or default_labels(n_modes), cov=np.eye(2 * n_modes))


def thermal_state(n_tilde: float, label: str = "m0") -> GaussianState:
    """Single-mode thermal state with variance n_tilde = 2 n_bar + 1."""
    if not math.isfinite(n_tilde):
        raise InvalidArgumentError(f"n_tilde must be finite, got {n_tilde}")
    if n_tilde < 1 - PHYSICAL_TOL:
        raise UnphysicalStateError(f"Thermal variance {n_tilde} is below the vacuum level 1")
    return GaussianState(modes=(label,), cov=n_tilde * np.eye(2))


def two_mode_squeezed(s: float, labels: Sequence[str] = ("a1", "a2")) -> GaussianState:
    if not math.isfinite(s):
        raise InvalidArgumentError(f"Squeezing must be finite, got {s}")
    ch, sh = math.cosh(2 * s), math.sinh(2 * s)
    sigma_z = np.diag([1.0, -1.0])
    cov = np.block([[ch * np.eye(2), sh * sigma_z], [sh * sigma_z, ch * np.eye(2)]])
    return GaussianState(modes=labels, cov=cov)


def tensor(a: GaussianState, b: GaussianState) -> GaussianState:
    clash = set(a.modes) & set(b.modes)
    if clash:
        raise DuplicateModeError(f"Cannot tensor states sharing modes {sorted(clash)}")
    return trusted_state(a.modes + b.modes, linalg.block_diag(a.cov, b.cov))


def relabel(state: GaussianState, labels: Sequence[str]) -> GaussianState:
    if len(labels) != state.n_modes:
        raise InvalidArgumentError(f"Expected {state.n_modes} labels, got {len(labels)}")
    return GaussianState.model_validate({"modes": labels, "cov": state.cov}, context={"check_physical": False})


def reduce(state: GaussianState, keep: Selection) -> GaussianState:
    """Gaussian partial trace: the principal submatrix on ``keep``, in ``keep`` order."""
    keep = selection(state, keep)
    idx = state.quadrature_indices(keep.labels)
    return trusted_state(keep.labels, state.cov[np.ix_(idx, idx)])


def symplectic_eigenvalues(state: GaussianState) -> np.ndarray:
    return symplectic_spectrum(state.cov)


def is_physical(state: GaussianState, tol: float = PHYSICAL_TOL) -> Tuple[bool, float]:
    margin = float(symplectic_eigenvalues(state)[0]) - 1
    return margin >= -tol, margin


def is_pure(state: GaussianState, tol: float = PHYSICAL_TOL) -> bool:
    return bool(np.all(np.abs(symplectic_eigenvalues(state) - 1) <= tol))
