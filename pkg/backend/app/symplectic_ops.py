from __future__ import annotations

import logging
import math
from typing import Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, field_validator, model_validator

from .config import SYMPLECTIC_TOL
from .covariance_core import GaussianState, Selection, selection, symplectic_form, trusted_state
from .exceptions import DimensionMismatchError, InvalidArgumentError

logger = logging.getLogger(__name__)


class SymplecticMatrix(BaseModel):
    """Real 2n x 2n map on quadratures with S . Omega . S^T = Omega."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    mat: np.ndarray
    n_modes: int

    @field_validator("mat", mode="before")
    @classmethod
    def _freeze(cls, v):
        mat = np.array(v, dtype=float)
        mat.setflags(write=False)
        return mat

    @model_validator(mode="after")
    def _symplectic(self):
        dim = 2 * self.n_modes
        if self.n_modes < 1 or self.mat.shape != (dim, dim):
            raise DimensionMismatchError(f"Expected a {dim}x{dim} matrix, got {self.mat.shape}")
        omega = symplectic_form(self.n_modes)
        defect = float(np.max(np.abs(self.mat @ omega @ self.mat.T - omega)))
        if defect > SYMPLECTIC_TOL:
            raise InvalidArgumentError(f"Matrix is not symplectic (defect {defect:.3g})")
        return self

    def __matmul__(self, other: "SymplecticMatrix") -> "SymplecticMatrix":
        if other.n_modes != self.n_modes:
            raise DimensionMismatchError(f"Cannot compose {self.n_modes}- and {other.n_modes}-mode maps")
        return SymplecticMatrix(mat=self.mat @ other.mat, n_modes=self.n_modes)

    def inverse(self) -> "SymplecticMatrix":
        omega = symplectic_form(self.n_modes)
        return SymplecticMatrix(mat=omega @ self.mat.T @ omega.T, n_modes=self.n_modes)


def _check_indices(n_modes: int, *indices: int) -> None:
    if n_modes < 1:
        raise InvalidArgumentError(f"n_modes must be >= 1, got {n_modes}")
    for k in indices:
        if not 0 <= k < n_modes:
            raise InvalidArgumentError(f"Mode index {k} out of range for {n_modes} modes")
    if len(set(indices)) != len(indices):
        raise InvalidArgumentError(f"Mode indices must be distinct, got {indices}")


def identity(n_modes: int) -> SymplecticMatrix:
    return SymplecticMatrix(mat=np.eye(2 * n_modes), n_modes=n_modes)


def embed(block: np.ndarray, indices: Sequence[int], n_modes: int) -> SymplecticMatrix:
    """Lifts a symplectic block on modes ``indices`` to the full n-mode space."""
    _check_indices(n_modes, *indices)
    idx = [2 * k + q for k in indices for q in (0, 1)]
    mat = np.eye(2 * n_modes)
    mat[np.ix_(idx, idx)] = block
    return SymplecticMatrix(mat=mat, n_modes=n_modes)


def beam_splitter_block(t: float) -> np.ndarray:
    r = math.sqrt(max(0.0, 1 - t * t))
    eye = np.eye(2)
    return np.block([[t * eye, -r * eye], [r * eye, t * eye]])


def beam_splitter(t: float, i: int, j: int, n_modes: int) -> SymplecticMatrix:
    """Beam splitter of amplitude transmittivity t: x_i -> t x_i - r x_j, x_j -> r x_i + t x_j."""
    if not 0 <= t <= 1:
        raise InvalidArgumentError(f"Transmittivity must lie in [0, 1], got {t}")
    return embed(beam_splitter_block(t), (i, j), n_modes)


def two_mode_squeezer_block(s: float) -> np.ndarray:
    ch, sh = math.cosh(s), math.sinh(s)
    sigma_z = np.diag([1.0, -1.0])
    return np.block([[ch * np.eye(2), sh * sigma_z], [sh * sigma_z, ch * np.eye(2)]])


def two_mode_squeezer(s: float, i: int, j: int, n_modes: int) -> SymplecticMatrix:
    if not math.isfinite(s):
        raise InvalidArgumentError(f"Squeezing must be finite, got {s}")
    return embed(two_mode_squeezer_block(s), (i, j), n_modes)


def phase_rotation(phi: float, i: int, n_modes: int) -> SymplecticMatrix:
    c, s = math.cos(phi), math.sin(phi)
    return embed(np.array([[c, s], [-s, c]]), (i,), n_modes)


def single_mode_squeezer(r: float, i: int, n_modes: int) -> SymplecticMatrix:
    return embed(np.diag([math.exp(-r), math.exp(r)]), (i,), n_modes)


def passive(orthogonal: np.ndarray) -> SymplecticMatrix:
    """Lifts a real orthogonal mode-mixing matrix to quadrature space (same map on q and p)."""
    orthogonal = np.asarray(orthogonal, dtype=float)
    return SymplecticMatrix(mat=np.kron(orthogonal, np.eye(2)), n_modes=orthogonal.shape[0])


def fourier_basis(n: int) -> np.ndarray:
    """Real orthonormal Fourier basis whose first row is the uniform vector 1/sqrt(n).

    Rows after the first come in normalized cosine/sine pairs; for even n the
    alternating row (-1)^m/sqrt(n) closes the basis.
    """
    if n < 1:
        raise InvalidArgumentError(f"Need at least one environment mode, got {n}")
    m = np.arange(n)
    rows = [np.full(n, 1 / math.sqrt(n))]
    for k in range(1, (n - 1) // 2 + 1):
        phase = 2 * math.pi * k * m / n
        rows.append(math.sqrt(2 / n) * np.cos(phase))
        rows.append(math.sqrt(2 / n) * np.sin(phase))
    if n % 2 == 0:
        rows.append((-1.0) ** m / math.sqrt(n))
    return np.vstack(rows)


def collective_mixer(n: int) -> SymplecticMatrix:
    """Maps N environment modes b_m to collective modes c_n; c_0 is the uniform mode."""
    return passive(fourier_basis(n))


def apply(state: GaussianState, S: SymplecticMatrix) -> GaussianState:
    if S.n_modes != state.n_modes:
        raise DimensionMismatchError(f"{S.n_modes}-mode map applied to a {state.n_modes}-mode state")
    return trusted_state(state.modes, S.mat @ state.cov @ S.mat.T)


def apply_local(state: GaussianState, S: SymplecticMatrix, labels: Selection) -> GaussianState:
    """Applies a k-mode map to the modes ``labels`` only, leaving the rest untouched."""
    labels = selection(state, labels)
    if S.n_modes != len(labels):
        raise DimensionMismatchError(f"{S.n_modes}-mode map applied to {len(labels)} modes")
    return trusted_state(state.modes, local_update(state.cov, S.mat, state.quadrature_indices(labels.labels)))


def local_update(cov: np.ndarray, block: np.ndarray, idx: np.ndarray) -> np.ndarray:
    """M cov M^T for M equal to the identity outside rows/columns ``idx``; O(n) per call."""
    out = np.array(cov, dtype=float)
    out[idx, :] = block @ out[idx, :]
    out[:, idx] = out[:, idx] @ block.T
    return out
