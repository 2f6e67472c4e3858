"""Dense complex matrix primitives with fixed tolerances.

All routines work on ``numpy`` arrays of ``complex128`` and are pure
functions of their inputs. Tolerances are module constants so that every
caller agrees on what "Hermitian", "unitary" or "zero" means.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import NonFinite, NotHermitian, NotPSD, NotSquare, NotUnitary, RankDeficient

HERMITIAN_TOL = 1e-9
UNITARY_TOL = 1e-9
PSD_FLOOR = -1e-9
RECONSTRUCTION_TOL = 1e-8
# eigenvalues at or below this are rounding noise for matrices of unit scale
ZERO_EIGENVALUE = 1e-14
FULL_RANK_FLOOR = 1e-12

__all__ = [
    "HERMITIAN_TOL",
    "UNITARY_TOL",
    "PSD_FLOOR",
    "RECONSTRUCTION_TOL",
    "Spectrum",
    "as_matrix",
    "as_vector",
    "dagger",
    "max_abs",
    "derive_seed",
    "make_rng",
    "hermitian_eig",
    "singular_values",
    "psd_sqrt",
    "clamp_spectrum",
    "polar_unitary",
    "svd_unitary_factor",
    "check_unitary",
    "complete_unitary",
    "random_unitary",
    "random_complex_gaussian",
]


def as_matrix(m, name: str = "matrix") -> np.ndarray:
    """Return ``m`` as a read-only 2-D complex array, rejecting NaN/Inf."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def as_vector(v, name: str = "vector") -> np.ndarray:
    arr = np.array(v, dtype=complex).reshape(-1)
    if arr.size < 1:
        raise ValueError(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise NonFinite(f"{name} has non-finite entries")
    arr.setflags(write=False)
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(np.swapaxes(m, -1, -2))


def max_abs(m) -> float:
    """Max-entry norm; 0.0 for empty input."""
    m = np.asarray(m)
    return float(np.max(np.abs(m))) if m.size else 0.0


def _require_square(m: np.ndarray, name: str) -> None:
    if m.shape[0] != m.shape[1]:
        raise NotSquare(f"{name} must be square, got shape {m.shape}")


# -- randomness -------------------------------------------------------------

def derive_seed(seed: int, *stream: int) -> int:
    """Mix ``seed`` with stream counters into an independent 64-bit seed.

    Uses :class:`numpy.random.SeedSequence` hashing, which is stable across
    platforms and numpy versions.
    """
    words = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(s) for s in stream]
    ss = np.random.SeedSequence(words)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_rng(seed, *stream: int) -> np.random.Generator:
    """Build a generator from an integer seed (plus optional stream counters).

    A ``Generator`` passed in is returned unchanged so that callers can
    thread one stream through several draws.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(derive_seed(seed, *stream))


def random_complex_gaussian(shape, rng: np.random.Generator) -> np.ndarray:
    """Standard complex normal entries (``E|z|^2 = 1``)."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


# -- spectra ----------------------------------------------------------------

@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues sorted non-increasing; ``vectors[:, k]`` pairs with ``values[k]``."""

    values: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return len(self.values)

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ dagger(self.vectors)


def hermitian_eig(h) -> Spectrum:
    """Eigendecomposition of a Hermitian matrix.

    Raises
    ------
    NotSquare
        If ``h`` is not square.
    NotHermitian
        If ``max|H - H^dagger| > HERMITIAN_TOL``.
    """
    h = as_matrix(h, "H")
    _require_square(h, "H")
    dev = max_abs(h - dagger(h))
    if dev > HERMITIAN_TOL:
        raise NotHermitian(f"matrix is not Hermitian: max|H - H^dagger| = {dev:.3e}")
    vals, vecs = np.linalg.eigh((h + dagger(h)) / 2)
    # eigh is ascending; a stable sort on -vals keeps ties in eigh's order
    order = np.argsort(-vals, kind="stable")
    return Spectrum(vals[order], vecs[:, order])


def singular_values(m) -> np.ndarray:
    """Singular values, non-increasing, ``min(rows, cols)`` of them."""
    return np.linalg.svd(as_matrix(m), compute_uv=False)


def psd_sqrt(p) -> np.ndarray:
    """Principal square root of a positive-semidefinite Hermitian matrix.

    Eigenvalues in ``[PSD_FLOOR, 0)`` are treated as rounding error and
    clamped to zero, as are positive eigenvalues below ``ZERO_EIGENVALUE``
    (relative to ``max(1, lambda_max)``) whose square roots would otherwise
    inject ``~1e-8`` noise.
    """
    spec = hermitian_eig(p)
    lo = spec.values[-1]
    if lo < PSD_FLOOR:
        raise NotPSD(f"matrix is not positive semidefinite: smallest eigenvalue {lo:.3e}")
    vals = clamp_spectrum(spec.values)
    return (spec.vectors * np.sqrt(vals)) @ dagger(spec.vectors)


def clamp_spectrum(values: np.ndarray) -> np.ndarray:
    """Zero out eigenvalues at or below ``ZERO_EIGENVALUE * max(1, lambda_max)``.

    Works along the last axis, so stacks of spectra are accepted.
    """
    values = np.asarray(values, dtype=float)
    top = np.max(values, axis=-1, keepdims=True) if values.size else 0.0
    floor = ZERO_EIGENVALUE * np.maximum(1.0, top)
    return np.where(values > floor, values, 0.0)


# -- unitaries --------------------------------------------------------------

def svd_unitary_factor(m) -> np.ndarray:
    """``W = U V^dagger`` from the full SVD of a square matrix, any rank."""
    m = as_matrix(m, "M")
    _require_square(m, "M")
    u, _, vh = np.linalg.svd(m)
    return u @ vh


def polar_unitary(m) -> np.ndarray:
    """Unitary polar factor of a full-rank square matrix.

    ``W`` maximizes ``|tr[W^dagger M]|`` over the unitary group and attains
    the nuclear norm of ``M``.

    Raises
    ------
    RankDeficient
        If the smallest singular value is at most ``1e-12``; the polar factor
        is then not unique. :func:`svd_unitary_factor` still gives a maximizer.
    """
    m = as_matrix(m, "M")
    _require_square(m, "M")
    u, s, vh = np.linalg.svd(m)
    if s[-1] <= FULL_RANK_FLOOR:
        raise RankDeficient(f"matrix is rank deficient: smallest singular value {s[-1]:.3e}")
    return u @ vh


def check_unitary(u, name: str = "U") -> np.ndarray:
    u = as_matrix(u, name)
    _require_square(u, name)
    dev = max_abs(dagger(u) @ u - np.eye(u.shape[0]))
    if dev > UNITARY_TOL:
        raise NotUnitary(f"{name} is not unitary: max|U^dagger U - I| = {dev:.3e}")
    return u


def complete_unitary(columns: np.ndarray, positions: Sequence[int], n: int) -> np.ndarray:
    """Embed orthonormal ``columns`` at ``positions`` of an ``n x n`` unitary.

    Remaining columns are filled, in increasing position order, by
    Gram-Schmidt over the canonical basis vectors taken in index order, so
    the result is deterministic.
    """
    columns = np.asarray(columns, dtype=complex).reshape(n, -1)
    positions = list(positions)
    if len(positions) != columns.shape[1] or len(set(positions)) != len(positions):
        raise ValueError("positions must be distinct and match the number of columns")
    dev = max_abs(dagger(columns) @ columns - np.eye(columns.shape[1]))
    if dev > UNITARY_TOL:
        raise ValueError(f"prescribed columns are not orthonormal: deviation {dev:.3e}")

    basis = [columns[:, j] for j in range(columns.shape[1])]
    fill = []
    need = n - len(basis)
    for j in range(n):
        if len(fill) == need:
            break
        v = np.zeros(n, dtype=complex)
        v[j] = 1.0
        for _ in range(2):
            for b in basis + fill:
                v = v - b * np.vdot(b, v)
        norm = np.linalg.norm(v)
        if norm > 1e-6:
            fill.append(v / norm)
    if len(fill) < need:
        # pathological span; fall back to an orthonormal null-space basis
        span = np.column_stack(basis + fill) if basis + fill else np.zeros((n, 0))
        u, _, _ = np.linalg.svd(span, full_matrices=True)
        fill.extend(u[:, span.shape[1]:].T[: need - len(fill)])

    out = np.zeros((n, n), dtype=complex)
    free = [p for p in range(n) if p not in set(positions)]
    out[:, positions] = columns
    for p, v in zip(free, fill):
        out[:, p] = v
    return out


def random_unitary(dim: int, seed=0) -> np.ndarray:
    """Haar-random unitary.

    QR of a complex Ginibre matrix with the phases of ``diag(R)`` folded
    back into ``Q``; without that step the distribution is not invariant.
    """
    if dim < 1:
        raise ValueError("dim must be >= 1")
    rng = make_rng(seed)
    z = random_complex_gaussian((dim, dim), rng)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
