"""Gluings of two channels and their interference functions.

A gluing is a joint operation on both interferometer paths whose
restriction to each path is a given channel. For local (LSP) gluings the
interference is

    F(rho) = sum_kl b_l conj(a_k) tr[A_k^dagger B_l rho],   |a|, |b| <= 1,

and subspace-preserving (SP) gluings replace ``b_l conj(a_k)`` by a
contraction ``C_lk``. Inserting a unitary ``U`` after channel B gives the
generalized interference ``G(rho, U) = sum_kl C_lk tr[A_k^dagger U B_l rho]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channels import KrausChannel, random_channel
from .errors import ContractionInfeasible, DimensionMismatch, ValidationError
from .numerics import as_matrix, as_vector, check_unitary, dagger, make_rng, random_complex_gaussian, singular_values
from .states import DensityMatrix, PureState

NORM_SLACK = 1e-12

__all__ = [
    "LSPGluing",
    "SPGluing",
    "CoherenceOperatorPair",
    "interference_lsp",
    "interference_sp",
    "generalized_interference",
    "coherence_operators",
    "overlap_matrix_q",
    "lsp_as_sp",
    "kraus_overlaps",
    "random_lsp_gluing",
    "random_sp_gluing",
    "random_contraction",
]


def _check_same_dim(channel_a: KrausChannel, channel_b: KrausChannel) -> None:
    if channel_a.dim != channel_b.dim:
        raise DimensionMismatch(f"glued channels act on dimensions {channel_a.dim} and {channel_b.dim}")


@dataclass(frozen=True, eq=False)
class LSPGluing:
    channel_a: KrausChannel
    channel_b: KrausChannel
    coeff_a: np.ndarray
    coeff_b: np.ndarray

    def __post_init__(self):
        _check_same_dim(self.channel_a, self.channel_b)
        for name, channel in (("coeff_a", self.channel_a), ("coeff_b", self.channel_b)):
            c = as_vector(getattr(self, name), name)
            if c.shape[0] != channel.n_kraus:
                raise DimensionMismatch(f"{name} has {c.shape[0]} entries for {channel.n_kraus} Kraus operators")
            norm = np.linalg.norm(c)
            if norm > 1 + NORM_SLACK:
                raise ValidationError(f"{name} must have norm <= 1, got {norm:.15g}")
            object.__setattr__(self, name, c)

    @property
    def dim(self) -> int:
        return self.channel_a.dim


@dataclass(frozen=True, eq=False)
class SPGluing:
    """``contraction`` has shape ``(n_kraus(B), n_kraus(A))`` and satisfies ``C C^dagger <= I``."""

    channel_a: KrausChannel
    channel_b: KrausChannel
    contraction: np.ndarray

    def __post_init__(self):
        _check_same_dim(self.channel_a, self.channel_b)
        c = as_matrix(self.contraction, "contraction")
        expected = (self.channel_b.n_kraus, self.channel_a.n_kraus)
        if c.shape != expected:
            raise DimensionMismatch(f"contraction has shape {c.shape}, expected {expected}")
        top = singular_values(c)[0]
        if top > 1 + NORM_SLACK:
            raise ContractionInfeasible(f"contraction violates C C^dagger <= I: largest singular value {top:.15g}")
        object.__setattr__(self, "contraction", c)

    @property
    def dim(self) -> int:
        return self.channel_a.dim


@dataclass(frozen=True, eq=False)
class CoherenceOperatorPair:
    op_a: np.ndarray
    op_b: np.ndarray

    def interference(self, rho) -> complex:
        return complex(np.trace(dagger(self.op_a) @ self.op_b @ _matrix_of(rho)))


def lsp_as_sp(g: LSPGluing) -> SPGluing:
    """The same gluing with ``C = b a^dagger``."""
    return SPGluing(g.channel_a, g.channel_b, np.outer(g.coeff_b, g.coeff_a.conj()))


def _matrix_of(rho) -> np.ndarray:
    if isinstance(rho, DensityMatrix):
        return rho.matrix
    if isinstance(rho, PureState):
        return rho.projector()
    return np.asarray(rho, dtype=complex)


def kraus_overlaps(channel_a: KrausChannel, channel_b: KrausChannel, rho, u=None) -> np.ndarray:
    """``T_kl = tr[A_k^dagger U B_l rho]`` (``U = I`` when omitted)."""
    _check_same_dim(channel_a, channel_b)
    m = _matrix_of(rho)
    d = channel_a.dim
    if m.shape != (d, d):
        raise DimensionMismatch(f"state of shape {m.shape} for {d}-dimensional channels")
    b = channel_b.kraus
    if u is not None:
        u = check_unitary(u, "shift")
        if u.shape[0] != d:
            raise DimensionMismatch(f"shift has dimension {u.shape[0]}, channels {d}")
        b = np.einsum("ij,ljk->lik", u, b)
    # tr[A_k^dagger X_l rho] = sum_{j,i} conj(A_k[j,i]) (X_l rho)[j,i]
    return np.einsum("kji,lji->kl", channel_a.kraus.conj(), b @ m)


def interference_lsp(g: LSPGluing, rho) -> complex:
    t = kraus_overlaps(g.channel_a, g.channel_b, rho)
    return complex(g.coeff_a.conj() @ t @ g.coeff_b)


def interference_sp(g: SPGluing, rho) -> complex:
    t = kraus_overlaps(g.channel_a, g.channel_b, rho)
    return complex(np.sum(g.contraction.T * t))


def generalized_interference(g: SPGluing | LSPGluing, rho, u) -> complex:
    """``G(rho, U) = sum_kl C_lk tr[A_k^dagger U B_l rho]``; LSP gluings are embedded first."""
    if isinstance(g, LSPGluing):
        g = lsp_as_sp(g)
    t = kraus_overlaps(g.channel_a, g.channel_b, rho, u)
    return complex(np.sum(g.contraction.T * t))


def coherence_operators(g: LSPGluing) -> CoherenceOperatorPair:
    op_a = np.einsum("k,kij->ij", g.coeff_a, g.channel_a.kraus)
    op_b = np.einsum("l,lij->ij", g.coeff_b, g.channel_b.kraus)
    return CoherenceOperatorPair(op_a, op_b)


def overlap_matrix_q(channel_a: KrausChannel, channel_b: KrausChannel, psi: PureState, u=None) -> np.ndarray:
    """``Q_kl = <psi| A_k^dagger U B_l |psi>`` with ``U = I`` by default."""
    _check_same_dim(channel_a, channel_b)
    if psi.dim != channel_a.dim:
        raise DimensionMismatch(f"input state has dimension {psi.dim}, channels {channel_a.dim}")
    left = channel_a.kraus @ psi.amplitudes
    right = channel_b.kraus @ psi.amplitudes
    if u is not None:
        u = check_unitary(u, "shift")
        if u.shape[0] != psi.dim:
            raise DimensionMismatch(f"shift has dimension {u.shape[0]}, channels {psi.dim}")
        right = right @ u.T
    return left.conj() @ right.T


# -- random generators ------------------------------------------------------

def _random_ball_vector(n: int, rng: np.random.Generator, on_sphere: bool) -> np.ndarray:
    v = random_complex_gaussian(n, rng)
    v /= np.linalg.norm(v)
    return v if on_sphere else v * rng.uniform() ** (1 / (2 * n))


def random_lsp_gluing(dim: int, seed=0, max_kraus: int = 4) -> LSPGluing:
    """Random channels (1..max_kraus operators) with coefficients in the unit ball.

    Half of the draws put the coefficients on the unit sphere, where the
    optimum of every measure lives.
    """
    rng = make_rng(seed)
    ra, rb = rng.integers(1, max_kraus + 1, size=2)
    a = random_channel(dim, int(ra), rng)
    b = random_channel(dim, int(rb), rng)
    on_sphere = bool(rng.integers(2))
    return LSPGluing(a, b, _random_ball_vector(int(ra), rng, on_sphere), _random_ball_vector(int(rb), rng, on_sphere))


def random_contraction(rows: int, cols: int, rng: np.random.Generator, on_boundary: bool = False) -> np.ndarray:
    g = random_complex_gaussian((rows, cols), rng)
    g /= singular_values(g)[0]
    return g if on_boundary else g * rng.uniform()


def random_sp_gluing(dim: int, seed=0, max_kraus: int = 4) -> SPGluing:
    rng = make_rng(seed)
    ra, rb = rng.integers(1, max_kraus + 1, size=2)
    a = random_channel(dim, int(ra), rng)
    b = random_channel(dim, int(rb), rng)
    c = random_contraction(int(rb), int(ra), rng, on_boundary=bool(rng.integers(2)))
    return SPGluing(a, b, c)
