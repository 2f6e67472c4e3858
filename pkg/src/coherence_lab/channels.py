"""Trace-preserving completely positive maps in Kraus form.

A channel is stored as a stack of Kraus operators of shape ``(r, d, d)``.
The Kraus ordering matters downstream: gluing coefficients are indexed
against it, so every transformation here returns a new channel and never
reorders silently.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NotIsometry, NotSquare, NotTracePreserving, ValidationError
from .numerics import (
    HERMITIAN_TOL,
    UNITARY_TOL,
    as_matrix,
    check_unitary,
    complete_unitary,
    dagger,
    hermitian_eig,
    make_rng,
    max_abs,
    random_unitary,
)
from .states import DensityMatrix, PureState, spectral_decomposition

INDEPENDENCE_CUTOFF = 1e-10

__all__ = [
    "KrausChannel",
    "StinespringDilation",
    "validate_channel",
    "unitary_channel",
    "identity_channel",
    "apply_channel",
    "choi_matrix",
    "choi_distance",
    "reduce_to_independent",
    "remix_kraus",
    "compose_unitary",
    "stinespring_dilation",
    "dilation_from_isometry",
    "preparation_channel",
    "random_preparation_channel",
    "pure_decomposition_of_output",
    "random_channel",
    "random_isometry",
]


@dataclass(frozen=True, eq=False)
class KrausChannel:
    kraus: np.ndarray

    def __post_init__(self):
        ops = np.array(self.kraus, dtype=complex)
        if ops.ndim == 2:
            ops = ops[None]
        if ops.ndim != 3 or ops.shape[0] < 1:
            raise ValidationError(f"Kraus operators must form a (r, d, d) stack, got shape {ops.shape}")
        if ops.shape[1] != ops.shape[2]:
            raise NotSquare(f"Kraus operators must be square, got {ops.shape[1]}x{ops.shape[2]}")
        if not np.all(np.isfinite(ops)):
            raise ValidationError("Kraus operators have non-finite entries")
        dev = completeness_deviation(ops)
        if dev > HERMITIAN_TOL:
            raise NotTracePreserving(f"channel is not trace preserving: max|sum K^dagger K - I| = {dev:.3e}")
        ops.setflags(write=False)
        object.__setattr__(self, "kraus", ops)

    @property
    def dim(self) -> int:
        return self.kraus.shape[1]

    @property
    def n_kraus(self) -> int:
        return self.kraus.shape[0]

    def __len__(self) -> int:
        return self.n_kraus

    def __iter__(self):
        return iter(self.kraus)

    def __call__(self, rho):
        return apply_channel(self, rho)


def completeness_deviation(ops: np.ndarray) -> float:
    total = np.einsum("kji,kjl->il", ops.conj(), ops)
    return max_abs(total - np.eye(ops.shape[1]))


def validate_channel(kraus) -> KrausChannel:
    ops = [as_matrix(k, "Kraus operator") for k in kraus]
    shapes = {k.shape for k in ops}
    if len(shapes) != 1:
        raise DimensionMismatch(f"Kraus operators have differing shapes {sorted(shapes)}")
    return KrausChannel(np.stack(ops))


def unitary_channel(u) -> KrausChannel:
    return KrausChannel(check_unitary(u)[None])


def identity_channel(dim: int) -> KrausChannel:
    return KrausChannel(np.eye(dim, dtype=complex)[None])


def _matrix_of(rho) -> np.ndarray:
    return rho.matrix if isinstance(rho, DensityMatrix) else np.asarray(rho, dtype=complex)


def apply_channel(channel: KrausChannel, rho) -> DensityMatrix:
    """``sum_k K_k rho K_k^dagger``."""
    m = _matrix_of(rho)
    if m.shape != (channel.dim, channel.dim):
        raise DimensionMismatch(f"state of shape {m.shape} fed to a {channel.dim}-dimensional channel")
    out = np.einsum("kij,jl,kml->im", channel.kraus, m, channel.kraus.conj())
    return DensityMatrix((out + dagger(out)) / 2)


def choi_matrix(channel: KrausChannel) -> np.ndarray:
    """``(channel x id)(|Phi><Phi|)`` with unnormalized ``|Phi> = sum_i |i>|i>``.

    For ``K`` stored row-major, ``(K x 1)|Phi>`` is just ``K.reshape(-1)``.
    """
    vecs = channel.kraus.reshape(channel.n_kraus, -1)
    return vecs.T @ vecs.conj()


def choi_distance(first: KrausChannel, second: KrausChannel) -> float:
    if first.dim != second.dim:
        raise DimensionMismatch(f"channels act on dimensions {first.dim} and {second.dim}")
    return max_abs(choi_matrix(first) - choi_matrix(second))


def reduce_to_independent(channel: KrausChannel) -> KrausChannel:
    """Equivalent channel with linearly independent Kraus operators.

    Diagonalizes the Gram matrix ``G_kl = tr[K_k^dagger K_l]`` and keeps
    directions whose eigenvalue exceeds ``1e-10`` of the largest. A channel
    whose operators are already independent is returned unchanged.
    """
    ops = channel.kraus
    gram = np.einsum("kij,lij->kl", ops.conj(), ops)
    spec = hermitian_eig((gram + dagger(gram)) / 2)
    keep = spec.values > INDEPENDENCE_CUTOFF * spec.values[0]
    if keep.all():
        return channel
    w = spec.vectors[:, keep]
    # fix the phase of each direction: largest-modulus component real positive
    pivots = np.argmax(np.abs(w), axis=0)
    phases = w[pivots, np.arange(w.shape[1])]
    w = w * (np.abs(phases) / phases)
    new = np.einsum("kj,kab->jab", w, ops)
    return KrausChannel(new)


def remix_kraus(channel: KrausChannel, v) -> KrausChannel:
    """``K'_j = sum_k V_jk K_k`` for an isometry ``V`` (``V^dagger V = I``) on the Kraus index."""
    v = as_matrix(v, "V")
    if v.shape[1] != channel.n_kraus:
        raise DimensionMismatch(f"remix matrix has {v.shape[1]} columns for {channel.n_kraus} Kraus operators")
    dev = max_abs(dagger(v) @ v - np.eye(v.shape[1]))
    if dev > UNITARY_TOL:
        raise NotIsometry(f"remix matrix is not an isometry: max|V^dagger V - I| = {dev:.3e}")
    return KrausChannel(np.einsum("jk,kab->jab", v, channel.kraus))


def compose_unitary(channel: KrausChannel, u) -> KrausChannel:
    """The channel followed by the unitary ``u`` (Kraus operators ``u K_k``)."""
    u = check_unitary(u)
    if u.shape[0] != channel.dim:
        raise DimensionMismatch(f"unitary of dimension {u.shape[0]} after a {channel.dim}-dimensional channel")
    return KrausChannel(np.einsum("ij,kjl->kil", u, channel.kraus))


# -- dilations --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class StinespringDilation:
    """Unitary on ``system x ancilla`` (system index major) plus the ancilla start state."""

    system_dim: int
    ancilla_dim: int
    global_unitary: np.ndarray
    ancilla_ref: np.ndarray

    def __post_init__(self):
        n = self.system_dim * self.ancilla_dim
        u = check_unitary(self.global_unitary, "dilation unitary")
        if u.shape != (n, n):
            raise DimensionMismatch(f"dilation unitary has shape {u.shape}, expected {(n, n)}")
        ref = PureState(self.ancilla_ref).amplitudes
        if ref.shape[0] != self.ancilla_dim:
            raise DimensionMismatch("ancilla reference state has the wrong dimension")
        object.__setattr__(self, "global_unitary", u)
        object.__setattr__(self, "ancilla_ref", ref)

    def isometry(self) -> np.ndarray:
        """``|phi> -> U (|phi> x |E0>)`` as a ``(d*e, d)`` matrix."""
        u = self.global_unitary.reshape(self.system_dim, self.ancilla_dim, self.system_dim, self.ancilla_dim)
        iso = np.einsum("abcd,d->abc", u, self.ancilla_ref)
        return iso.reshape(self.system_dim * self.ancilla_dim, self.system_dim)

    def kraus_operators(self) -> np.ndarray:
        """``K_k = <e_k| U |E0>`` in the canonical ancilla basis."""
        iso = self.isometry().reshape(self.system_dim, self.ancilla_dim, self.system_dim)
        return np.transpose(iso, (1, 0, 2))

    def channel(self) -> KrausChannel:
        return KrausChannel(self.kraus_operators())

    def reference_block(self) -> np.ndarray:
        """``<E0| U |E0>``, the operator applied when the ancilla is left undisturbed."""
        iso = self.isometry().reshape(self.system_dim, self.ancilla_dim, self.system_dim)
        return np.einsum("e,aeb->ab", self.ancilla_ref.conj(), iso)

    def apply(self, rho) -> np.ndarray:
        """Evolve ``rho x |E0><E0|`` and trace out the ancilla."""
        m = _matrix_of(rho)
        iso = self.isometry()
        big = iso @ m @ dagger(iso)
        d, e = self.system_dim, self.ancilla_dim
        return np.einsum("aebe->ab", big.reshape(d, e, d, e))


def dilation_from_isometry(iso_columns: np.ndarray, system_dim: int, ancilla_dim: int) -> StinespringDilation:
    """Complete the map ``|i>|e_0> -> iso_columns[:, i]`` to a dilation with ``|E0> = |e_0>``."""
    positions = [i * ancilla_dim for i in range(system_dim)]
    u = complete_unitary(iso_columns, positions, system_dim * ancilla_dim)
    ref = np.zeros(ancilla_dim, dtype=complex)
    ref[0] = 1.0
    return StinespringDilation(system_dim, ancilla_dim, u, ref)


def stinespring_dilation(channel: KrausChannel) -> StinespringDilation:
    """Canonical dilation ``|phi>|e_0> -> sum_k K_k|phi> x |e_k>``.

    The ancilla has one level per Kraus operator. Columns outside the
    ``|e_0>`` block are completed by Gram-Schmidt over the canonical basis,
    which for ``{|0><0|, |1><1|}`` yields exactly the controlled-NOT with the
    system as control.
    """
    d, r = channel.dim, channel.n_kraus
    # iso[(a, k), i] = K_k[a, i]
    iso = np.transpose(channel.kraus, (1, 0, 2)).reshape(d * r, d)
    return dilation_from_isometry(iso, d, r)


# -- preparations -----------------------------------------------------------

def _orthonormal_complement(psi: np.ndarray) -> np.ndarray:
    """Columns spanning the complement of ``psi``, by deterministic Gram-Schmidt."""
    d = psi.shape[0]
    u = complete_unitary(psi[:, None], [0], d)
    return u[:, 1:]


def preparation_channel(psi: PureState, target: DensityMatrix) -> KrausChannel:
    """A channel mapping ``|psi><psi|`` to ``target``.

    Kraus operators are ``|a_k><psi|`` for the spectral decomposition
    ``{|a_k>}`` of the target, followed by completion operators
    ``|a_1/|a_1|><psi_j^perp|`` that annihilate ``psi`` and only serve to
    make the map trace preserving.
    """
    if psi.dim != target.dim:
        raise DimensionMismatch(f"input state has dimension {psi.dim}, target {target.dim}")
    vecs = spectral_decomposition(target).vectors
    bra = psi.amplitudes.conj()
    ops = [np.outer(a, bra) for a in vecs]
    lead = vecs[0] / np.linalg.norm(vecs[0])
    comp = _orthonormal_complement(psi.amplitudes)
    ops.extend(np.outer(lead, comp[:, j].conj()) for j in range(comp.shape[1]))
    return KrausChannel(np.stack(ops))


def random_preparation_channel(psi: PureState, target: DensityMatrix, seed=0) -> KrausChannel:
    """Another feasible preparation: random decomposition of ``target``, random completion.

    The ``psi`` branch uses ``|b_j> = sum_k V_jk |a_k>`` for a random isometry
    ``V`` with one spare row; the complement of ``psi`` is routed through a
    random channel, so this is not a Kraus remix of :func:`preparation_channel`.
    """
    if psi.dim != target.dim:
        raise DimensionMismatch(f"input state has dimension {psi.dim}, target {target.dim}")
    rng = make_rng(seed)
    vecs = spectral_decomposition(target).vectors
    vecs = random_isometry(len(vecs) + 1, len(vecs), rng) @ vecs
    bra = psi.amplitudes.conj()
    complement = np.eye(psi.dim) - np.outer(psi.amplitudes, bra)
    tail = random_channel(psi.dim, int(rng.integers(1, 3)), rng).kraus @ complement
    return KrausChannel(np.concatenate([np.einsum("ja,b->jab", vecs, bra), tail]))


def pure_decomposition_of_output(channel: KrausChannel, psi: PureState) -> np.ndarray:
    """Rows ``K_k |psi>``; a pure decomposition of ``channel(|psi><psi|)``."""
    if psi.dim != channel.dim:
        raise DimensionMismatch(f"input state has dimension {psi.dim}, channel {channel.dim}")
    return channel.kraus @ psi.amplitudes


# -- random generators ------------------------------------------------------

def random_isometry(rows: int, cols: int, seed=0) -> np.ndarray:
    """First ``cols`` columns of a Haar unitary of size ``rows``."""
    if cols > rows:
        raise ValueError("an isometry needs rows >= cols")
    return random_unitary(rows, make_rng(seed))[:, :cols]


def random_channel(dim: int, n_kraus: int, seed=0) -> KrausChannel:
    """Kraus blocks of a Haar isometry ``C^d -> C^d x C^r``."""
    iso = random_isometry(dim * n_kraus, dim, seed)
    return KrausChannel(iso.reshape(n_kraus, dim, dim))
