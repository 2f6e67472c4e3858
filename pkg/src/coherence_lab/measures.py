"""Interferometric fidelity and coherence measures.

Four closed forms, each the maximal visibility over a class of gluings:

==========  ===========================  ==========================================
name        gluings / interferometer     value
==========  ===========================  ==========================================
``lsp``     local, plain                 ``lambda_max(sqrt(sqrt(rb) ra sqrt(rb)))``
``sp``      shared ancilla, plain        ``tr sqrt(sqrt(rb) ra sqrt(rb))`` (Uhlmann)
``glsp``    local, variable unitary      ``sqrt(lambda_max(ra) lambda_max(rb))``
``gsp``     shared ancilla, variable U   ``sum_k sqrt(lambda_k(ra) lambda_k(rb))``
==========  ===========================  ==========================================

The numeric maximizers work from channels instead of states: they build the
overlap matrix ``Q`` and optimize over coefficient vectors, contractions or
unitaries. Random-search oracles certify that no sample beats the optimum.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .channels import KrausChannel, apply_channel
from .errors import DimensionMismatch, RankDeficient
from .gluings import overlap_matrix_q
from .numerics import (
    FULL_RANK_FLOOR,
    clamp_spectrum,
    dagger,
    hermitian_eig,
    make_rng,
    polar_unitary,
    psd_sqrt,
    random_complex_gaussian,
)
from .states import DensityMatrix, PureState, uhlmann_fidelity

MEASURES = ("lsp", "sp", "glsp", "gsp")
DEFAULT_SAMPLES = 1000

__all__ = [
    "MEASURES",
    "MeasureReport",
    "coherent_fidelity_lsp",
    "coherent_fidelity_sp",
    "coherence_lsp",
    "coherence_sp",
    "measure",
    "fidelity_under_shift",
    "optimal_aligner",
    "maximize_lsp_numeric",
    "maximize_sp_numeric",
    "maximize_generalized_numeric",
    "search_coefficients",
    "search_contractions",
    "search_unitaries",
    "unitaries_from_params",
]


@dataclass(frozen=True)
class MeasureReport:
    """Optimal visibility plus the parameters that achieve it.

    ``certificate_gap`` is the optimum minus the best random-search sample;
    it must never be below ``-1e-8``.
    """

    value: float
    optimizer: dict = field(default_factory=dict)
    certificate_gap: float = float("nan")


def _check_pair(rho_a: DensityMatrix, rho_b: DensityMatrix) -> None:
    if rho_a.dim != rho_b.dim:
        raise DimensionMismatch(f"states have dimensions {rho_a.dim} and {rho_b.dim}")


def _clamped(values: np.ndarray) -> np.ndarray:
    return clamp_spectrum(values)


# -- closed forms -----------------------------------------------------------

def coherent_fidelity_lsp(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    _check_pair(rho_a, rho_b)
    sb = rho_b.sqrt()
    inner = sb @ rho_a.matrix @ sb
    root = psd_sqrt((inner + dagger(inner)) / 2)
    return float(hermitian_eig(root).values[0])


def coherent_fidelity_sp(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    return uhlmann_fidelity(rho_a, rho_b)


def coherence_lsp(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    _check_pair(rho_a, rho_b)
    la = _clamped(rho_a.eigenvalues())[0]
    lb = _clamped(rho_b.eigenvalues())[0]
    return float(np.sqrt(la) * np.sqrt(lb))


def coherence_sp(rho_a: DensityMatrix, rho_b: DensityMatrix) -> float:
    _check_pair(rho_a, rho_b)
    la = _clamped(rho_a.eigenvalues())
    lb = _clamped(rho_b.eigenvalues())
    return float(np.sum(np.sqrt(la) * np.sqrt(lb)))


_CLOSED_FORMS = {
    "lsp": coherent_fidelity_lsp,
    "sp": coherent_fidelity_sp,
    "glsp": coherence_lsp,
    "gsp": coherence_sp,
}


def measure(rho_a: DensityMatrix, rho_b: DensityMatrix, which: str) -> float:
    try:
        fn = _CLOSED_FORMS[which]
    except KeyError:
        raise ValueError(f"unknown measure {which!r}; expected one of {MEASURES}") from None
    return fn(rho_a, rho_b)


def _mode(mode: str) -> str:
    if mode not in ("lsp", "sp"):
        raise ValueError(f"mode must be 'lsp' or 'sp', got {mode!r}")
    return mode


def fidelity_under_shift(rho_a: DensityMatrix, rho_b: DensityMatrix, u, mode: str) -> float:
    """Coherent fidelity between ``U rho_a U^dagger`` and ``rho_b``."""
    _check_pair(rho_a, rho_b)
    u = np.asarray(u, dtype=complex)
    shifted = DensityMatrix(u @ rho_a.matrix @ dagger(u))
    if _mode(mode) == "lsp":
        return coherent_fidelity_lsp(shifted, rho_b)
    return coherent_fidelity_sp(shifted, rho_b)


def optimal_aligner(rho_a: DensityMatrix, rho_b: DensityMatrix, mode: str = "sp") -> np.ndarray:
    """``U* = sum_k |psi_k^B><psi_k^A|`` over eigenbases sorted non-increasing.

    ``U* rho_a U*^dagger`` commutes with ``rho_b`` and pairs the spectra in
    order, which attains both the ``glsp`` and ``gsp`` suprema; for ``lsp``
    only the leading pair matters, so the same unitary serves both modes.
    """
    _check_pair(rho_a, rho_b)
    _mode(mode)
    va = hermitian_eig(rho_a.matrix).vectors
    vb = hermitian_eig(rho_b.matrix).vectors
    return vb @ dagger(va)


# -- numeric maximizers over channels ---------------------------------------

def _phase_fix(a: np.ndarray, b: np.ndarray, q: np.ndarray):
    f = a.conj() @ q @ b
    if abs(f) > 0:
        b = b * (abs(f) / f)
    return a, b


def maximize_lsp_numeric(channel_a: KrausChannel, channel_b: KrausChannel, psi: PureState,
                         samples: int = DEFAULT_SAMPLES, seed=0, shift=None) -> MeasureReport:
    """Maximize ``|a^dagger Q b|`` over unit coefficient vectors.

    The optimum is the top singular value of ``Q``, attained by the top
    singular-vector pair. The report's gap compares it with ``samples``
    random unit-vector pairs.
    """
    q = overlap_matrix_q(channel_a, channel_b, psi, shift)
    u, s, vh = np.linalg.svd(q)
    a, b = _phase_fix(u[:, 0], vh[0].conj(), q)
    achieved = complex(a.conj() @ q @ b)
    best = search_coefficients(q, samples, seed)
    return MeasureReport(
        float(s[0]),
        {"coeff_a": a, "coeff_b": b, "achieved": achieved},
        float(s[0] - best),
    )


def _optimal_contraction(q: np.ndarray) -> np.ndarray:
    """``C`` with ``C C^dagger <= I`` maximizing ``|tr[C Q]|``; zero off the support of ``Q``."""
    if q.shape[0] == q.shape[1]:
        try:
            return dagger(polar_unitary(q))
        except RankDeficient:
            pass
    u, s, vh = np.linalg.svd(q, full_matrices=False)
    r = int(np.sum(s > FULL_RANK_FLOOR))
    return dagger(vh[:r]) @ dagger(u[:, :r])


def maximize_sp_numeric(channel_a: KrausChannel, channel_b: KrausChannel, psi: PureState,
                        samples: int = DEFAULT_SAMPLES, seed=0, shift=None) -> MeasureReport:
    """Maximize ``|tr[C Q]|`` over contractions; the optimum is the nuclear norm of ``Q``."""
    q = overlap_matrix_q(channel_a, channel_b, psi, shift)
    value = float(np.sum(np.linalg.svd(q, compute_uv=False)))
    c = _optimal_contraction(q)
    achieved = complex(np.trace(c @ q))
    best = search_contractions(q, samples, seed)
    return MeasureReport(value, {"contraction": c, "achieved": achieved}, value - best)


def maximize_generalized_numeric(channel_a: KrausChannel, channel_b: KrausChannel, psi: PureState,
                                 mode: str = "sp", samples: int = DEFAULT_SAMPLES, seed=0) -> MeasureReport:
    """Optimize the variable unitary of the generalized interferometer as well.

    The shift sits after channel B, so it must carry the eigenbasis of the
    B output onto that of the A output.
    """
    _mode(mode)
    rho = psi.density()
    rho_a = apply_channel(channel_a, rho)
    rho_b = apply_channel(channel_b, rho)
    shift = optimal_aligner(rho_b, rho_a, mode)
    inner = maximize_lsp_numeric if mode == "lsp" else maximize_sp_numeric
    report = inner(channel_a, channel_b, psi, samples=0, shift=shift)

    left = channel_a.kraus @ psi.amplitudes
    right = channel_b.kraus @ psi.amplitudes
    us = unitaries_from_params(_unitary_params(psi.dim, samples, make_rng(seed)))
    qs = np.einsum("ki,sij,lj->skl", left.conj(), us, right)
    svals = np.linalg.svd(qs, compute_uv=False) if samples else np.zeros((0, 1))
    scores = svals[:, 0] if mode == "lsp" else svals.sum(axis=1)
    best = float(scores.max()) if samples else -np.inf
    optimizer = dict(report.optimizer, shift=shift)
    return MeasureReport(report.value, optimizer, report.value - best)


# -- random-search oracles --------------------------------------------------

def _unit_rows(n: int, width: int, rng: np.random.Generator) -> np.ndarray:
    v = random_complex_gaussian((n, width), rng)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def search_coefficients(q: np.ndarray, samples: int = DEFAULT_SAMPLES, seed=0) -> float:
    """Best ``|a^dagger Q b|`` over random unit vectors; ``-inf`` for no samples."""
    if samples <= 0:
        return -np.inf
    rng = make_rng(seed)
    a = _unit_rows(samples, q.shape[0], rng)
    b = _unit_rows(samples, q.shape[1], rng)
    return float(np.abs(np.einsum("sk,kl,sl->s", a.conj(), q, b)).max())


def search_contractions(q: np.ndarray, samples: int = DEFAULT_SAMPLES, seed=0) -> float:
    """Best ``|tr[C Q]|`` over random boundary contractions of shape ``Q^T``."""
    if samples <= 0:
        return -np.inf
    rng = make_rng(seed)
    cs = random_complex_gaussian((samples, q.shape[1], q.shape[0]), rng)
    cs /= np.linalg.svd(cs, compute_uv=False)[:, :1, None]
    return float(np.abs(np.einsum("slk,kl->s", cs, q)).max())


def _unitary_params(dim: int, samples: int, rng: np.random.Generator) -> np.ndarray:
    return rng.normal(scale=np.pi, size=(samples, dim * dim))


def unitaries_from_params(params: np.ndarray) -> np.ndarray:
    """``exp(iH)`` for Hermitian ``H`` filled from ``d^2`` real numbers per row.

    The first ``d`` numbers are the diagonal; the rest fill the real and
    imaginary parts of the strict upper triangle.
    """
    params = np.atleast_2d(params)
    n = params.shape[0]
    dim = int(round(np.sqrt(params.shape[1])))
    h = np.zeros((n, dim, dim), dtype=complex)
    idx = np.arange(dim)
    h[:, idx, idx] = params[:, :dim]
    iu = np.triu_indices(dim, 1)
    m = len(iu[0])
    upper = params[:, dim:dim + m] + 1j * params[:, dim + m:dim + 2 * m]
    h[:, iu[0], iu[1]] = upper
    h[:, iu[1], iu[0]] = upper.conj()
    vals, vecs = np.linalg.eigh(h)
    return np.einsum("sij,sj,skj->sik", vecs, np.exp(1j * vals), vecs.conj())


def _shifted_scores(rho_a: DensityMatrix, rho_b: DensityMatrix, us: np.ndarray, mode: str) -> np.ndarray:
    sb = rho_b.sqrt()
    inner = sb @ us @ rho_a.matrix @ dagger(us) @ sb
    inner = (inner + dagger(inner)) / 2
    roots = np.sqrt(_clamped(np.linalg.eigvalsh(inner)))
    return roots[:, -1] if mode == "lsp" else roots.sum(axis=1)


def search_unitaries(rho_a: DensityMatrix, rho_b: DensityMatrix, mode: str,
                     samples: int = DEFAULT_SAMPLES, seed=0, refine: int = 0):
    """Best coherent fidelity between ``U rho_a U^dagger`` and ``rho_b`` over ``U = exp(iH)``.

    With ``refine > 0`` the best ``refine`` samples are polished by
    Nelder-Mead; the result still approaches the supremum from below.

    Returns
    -------
    (float, ndarray)
        Best value found and the unitary achieving it.
    """
    _check_pair(rho_a, rho_b)
    _mode(mode)
    if samples <= 0:
        return -np.inf, np.eye(rho_a.dim, dtype=complex)
    rng = make_rng(seed)
    params = _unitary_params(rho_a.dim, samples, rng)
    scores = _shifted_scores(rho_a, rho_b, unitaries_from_params(params), mode)
    order = np.argsort(-scores, kind="stable")
    best_val, best_p = float(scores[order[0]]), params[order[0]]

    def objective(p):
        return -float(_shifted_scores(rho_a, rho_b, unitaries_from_params(p), mode)[0])

    for i in order[:refine]:
        res = minimize(objective, params[i], method="Nelder-Mead",
                       options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        if -res.fun > best_val:
            best_val, best_p = -float(res.fun), res.x
    return best_val, unitaries_from_params(best_p)[0]
