"""Density matrices, pure states and pure decompositions.

The overlap matrix ``M_kl = <a_k|b_l>`` between pure decompositions of two
states has singular values that do not depend on which decompositions were
chosen; they are the eigenvalues of ``sqrt(sqrt(rho_b) rho_a sqrt(rho_b))``.
That identity is what lets every measure in :mod:`coherence_lab.measures`
be written in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadRank, DimensionMismatch, NotNormalized, NotPSD, NotSquare, TraceNotOne
from .numerics import (
    HERMITIAN_TOL,
    PSD_FLOOR,
    as_matrix,
    as_vector,
    dagger,
    hermitian_eig,
    make_rng,
    psd_sqrt,
    random_complex_gaussian,
    singular_values,
)

SPECTRAL_CUTOFF = 1e-12

__all__ = [
    "DensityMatrix",
    "PureState",
    "PureDecomposition",
    "validate_density",
    "pure_state",
    "basis_state",
    "spectral_decomposition",
    "overlap_matrix_m",
    "uhlmann_fidelity",
    "m_singular_values",
    "random_density",
    "random_pure_state",
]


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """A validated quantum state: Hermitian, PSD, unit trace (all to 1e-9)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix, "density matrix")
        if m.shape[0] != m.shape[1]:
            raise NotSquare(f"density matrix must be square, got shape {m.shape}")
        spec = hermitian_eig(m)
        if spec.values[-1] < PSD_FLOOR:
            raise NotPSD(
                f"density matrix is not positive semidefinite: "
                f"smallest eigenvalue {spec.values[-1]:.3e}"
            )
        tr = np.trace(m)
        if abs(tr - 1) > HERMITIAN_TOL:
            raise TraceNotOne(f"density matrix trace is {tr.real:.12g} (deviation {abs(tr - 1):.3e})")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues sorted non-increasing."""
        return hermitian_eig(self.matrix).values

    def sqrt(self) -> np.ndarray:
        return psd_sqrt(self.matrix)

    def purity(self) -> float:
        return float(np.real(np.trace(self.matrix @ self.matrix)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True, eq=False)
class PureState:
    amplitudes: np.ndarray

    def __post_init__(self):
        v = as_vector(self.amplitudes, "amplitudes")
        norm = np.linalg.norm(v)
        if abs(norm - 1) > HERMITIAN_TOL:
            raise NotNormalized(f"pure state norm is {norm:.12g} (deviation {abs(norm - 1):.3e})")
        object.__setattr__(self, "amplitudes", v)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())

    def density(self) -> DensityMatrix:
        return DensityMatrix(self.projector())


@dataclass(frozen=True, eq=False)
class PureDecomposition:
    """Unnormalized vectors ``|a_k>`` (rows of ``vectors``) with ``sum_k |a_k><a_k| = rho``."""

    vectors: np.ndarray

    def __post_init__(self):
        v = np.array(self.vectors, dtype=complex)
        if v.ndim != 2 or v.shape[1] < 1:
            raise ValueError(f"decomposition must be a (count, dim) array, got shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.vectors.shape[1]

    def __len__(self) -> int:
        return self.vectors.shape[0]

    def state_matrix(self) -> np.ndarray:
        return self.vectors.T @ self.vectors.conj()

    def state(self) -> DensityMatrix:
        return DensityMatrix(self.state_matrix())


def validate_density(matrix) -> DensityMatrix:
    return DensityMatrix(matrix)


def pure_state(amplitudes, normalize: bool = False) -> PureState:
    v = np.asarray(amplitudes, dtype=complex)
    if normalize:
        v = v / np.linalg.norm(v)
    return PureState(v)


def basis_state(dim: int, index: int) -> PureState:
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return PureState(v)


def spectral_decomposition(rho: DensityMatrix) -> PureDecomposition:
    """Vectors ``sqrt(lambda_k) |psi_k>`` for eigenvalues above 1e-12, largest first."""
    spec = hermitian_eig(rho.matrix)
    keep = spec.values > SPECTRAL_CUTOFF
    vecs = spec.vectors[:, keep] * np.sqrt(spec.values[keep])
    return PureDecomposition(vecs.T)


def overlap_matrix_m(da: PureDecomposition, db: PureDecomposition) -> np.ndarray:
    if da.dim != db.dim:
        raise DimensionMismatch(f"decompositions act on dimensions {da.dim} and {db.dim}")
    return da.vectors.conj() @ db.vectors.T


def uhlmann_fidelity(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    """``tr sqrt(sqrt(rho_b) rho_a sqrt(rho_b))``, the maximal overlap of purifications."""
    _check_dims(rho_a, rho_b)
    sb = rho_b.sqrt()
    inner = sb @ rho_a.matrix @ sb
    return float(np.real(np.trace(psd_sqrt((inner + dagger(inner)) / 2))))


def _check_dims(rho_a: DensityMatrix, rho_b: DensityMatrix) -> None:
    if rho_a.dim != rho_b.dim:
        raise DimensionMismatch(f"states have dimensions {rho_a.dim} and {rho_b.dim}")


def m_singular_values(rho_a: DensityMatrix, rho_b: DensityMatrix) -> np.ndarray:
    """Singular values of the spectral-decomposition overlap matrix, non-increasing."""
    m = overlap_matrix_m(spectral_decomposition(rho_a), spectral_decomposition(rho_b))
    return singular_values(m)


def random_density(dim: int, rank: int | None = None, seed=0) -> DensityMatrix:
    """``G G^dagger / tr[G G^dagger]`` for a ``dim x rank`` complex Ginibre ``G``."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise BadRank(f"rank must lie in [1, {dim}], got {rank}")
    rng = make_rng(seed)
    g = random_complex_gaussian((dim, rank), rng)
    rho = g @ dagger(g)
    rho = rho / np.trace(rho).real
    return DensityMatrix((rho + dagger(rho)) / 2)


def random_pure_state(dim: int, seed=0) -> PureState:
    rng = make_rng(seed)
    v = random_complex_gaussian(dim, rng)
    return PureState(v / np.linalg.norm(v))
