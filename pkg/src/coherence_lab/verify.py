"""Seeded property suites behind ``coherence-lab verify``.

Each check draws its own random instance per trial from a generator seeded
by ``(seed, crc32(check name), trial)`` and returns a deviation: an absolute
error for identities, or the largest excess for inequalities. A check passes
when its worst deviation over all trials is within tolerance. Because trials
are independently seeded and the reduction is a max, the printed numbers do
not depend on how trials are split across worker processes.
"""

from __future__ import annotations

import zlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import channels as ch
from . import gluings as gl
from . import interferometer as ifm
from . import measures as ms
from . import states as st
from .numerics import (
    dagger,
    hermitian_eig,
    make_rng,
    max_abs,
    psd_sqrt,
    random_complex_gaussian,
    random_unitary,
    singular_values,
    svd_unitary_factor,
)

SEARCH_SAMPLES = 1000


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    tolerance: float
    fn: Callable[[int, np.random.Generator], float]


@dataclass(frozen=True)
class CheckResult:
    suite: str
    name: str
    tolerance: float
    deviation: float | None

    @property
    def passed(self) -> bool:
        return self.deviation is None or self.deviation <= self.tolerance


def _padded_diff(x: np.ndarray, y: np.ndarray) -> float:
    n = max(len(x), len(y))
    return max_abs(np.pad(x, (0, n - len(x))) - np.pad(y, (0, n - len(y))))


def _rand_rank(dim: int, rng) -> int:
    return int(rng.integers(1, dim + 1))


def _pair(dim: int, rng):
    return (st.random_density(dim, _rand_rank(dim, rng), rng),
            st.random_density(dim, _rand_rank(dim, rng), rng))


def _remixed(channel: ch.KrausChannel, rng) -> ch.KrausChannel:
    extra = int(rng.integers(0, 3))
    v = ch.random_isometry(channel.n_kraus + extra, channel.n_kraus, rng)
    return ch.remix_kraus(channel, v)


# -- numerics ---------------------------------------------------------------

def _eig_reconstruction(dim, rng):
    g = random_complex_gaussian((dim, dim), rng)
    h = g + dagger(g)
    return max_abs(hermitian_eig(h).reconstruct() - h)


def _sv_unitary_invariance(dim, rng):
    m = random_complex_gaussian((dim, dim), rng)
    v, w = random_unitary(dim, rng), random_unitary(dim, rng)
    return max_abs(singular_values(m) - singular_values(v @ m @ w))


def _psd_sqrt_consistency(dim, rng):
    g = random_complex_gaussian((dim, dim), rng)
    s = psd_sqrt(g @ dagger(g))
    return max_abs(psd_sqrt(s @ s) - s)


def _polar_never_exceeded(dim, rng):
    m = random_complex_gaussian((dim, dim), rng)
    nuclear = float(np.sum(singular_values(m)))
    w = svd_unitary_factor(m)
    attained = abs(abs(np.trace(dagger(w) @ m)) - nuclear)
    ws = ms.unitaries_from_params(rng.normal(scale=np.pi, size=(SEARCH_SAMPLES, dim * dim)))
    excess = float(np.abs(np.einsum("sji,ji->s", ws.conj(), m)).max()) - nuclear
    return max(attained, excess)


# -- states -----------------------------------------------------------------

def _decomposition_freedom(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    da, db = st.spectral_decomposition(rho_a), st.spectral_decomposition(rho_b)
    base = singular_values(st.overlap_matrix_m(da, db))
    r = len(da)
    v = ch.random_isometry(r + int(rng.integers(0, 3)), r, rng)
    remixed = st.PureDecomposition(v @ da.vectors)
    return _padded_diff(base, singular_values(st.overlap_matrix_m(remixed, db)))


def _sv_identity(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    sb = rho_b.sqrt()
    eig = hermitian_eig(psd_sqrt(sb @ rho_a.matrix @ sb)).values
    return _padded_diff(st.m_singular_values(rho_a, rho_b), eig)


def _uhlmann_vs_m(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    return abs(st.uhlmann_fidelity(rho_a, rho_b) - float(np.sum(st.m_singular_values(rho_a, rho_b))))


def _fidelity_bounds(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    f = st.uhlmann_fidelity(rho_a, rho_b)
    return max(-f, f - 1, abs(st.uhlmann_fidelity(rho_a, rho_a) - 1))


# -- channels ---------------------------------------------------------------

def _dilation_round_trip(dim, rng):
    channel = ch.random_channel(dim, int(rng.integers(1, 5)), rng)
    rho = st.random_density(dim, None, rng)
    dil = ch.stinespring_dilation(channel)
    return max_abs(dil.apply(rho) - ch.apply_channel(channel, rho).matrix)


def _choi_preservation(dim, rng):
    channel = ch.random_channel(dim, int(rng.integers(1, 5)), rng)
    padded = ch.KrausChannel(np.concatenate([channel.kraus, np.zeros((1, dim, dim))]))
    return max(ch.choi_distance(channel, _remixed(channel, rng)),
               ch.choi_distance(channel, ch.reduce_to_independent(padded)))


def _decomposition_bridge(dim, rng):
    psi = st.random_pure_state(dim, rng)
    target = st.random_density(dim, _rand_rank(dim, rng), rng)
    prep = ch.preparation_channel(psi, target)
    vecs = ch.pure_decomposition_of_output(prep, psi)
    recon = vecs.T @ vecs.conj()
    return max(max_abs(recon - target.matrix),
               max_abs(ch.apply_channel(prep, psi.density()).matrix - target.matrix))


def _completion_annihilation(dim, rng):
    psi = st.random_pure_state(dim, rng)
    rho_a, rho_b = _pair(dim, rng)
    pa, pb = ch.preparation_channel(psi, rho_a), ch.preparation_channel(psi, rho_b)
    ra, rb = len(st.spectral_decomposition(rho_a)), len(st.spectral_decomposition(rho_b))
    full = singular_values(gl.overlap_matrix_q(pa, pb, psi))
    left = pa.kraus[:ra] @ psi.amplitudes
    right = pb.kraus[:rb] @ psi.amplitudes
    trimmed = singular_values(left.conj() @ right.T)
    return _padded_diff(full, trimmed)


# -- gluings ----------------------------------------------------------------

def _interference_bounded(dim, rng):
    rho = st.random_density(dim, None, rng)
    f_lsp = gl.interference_lsp(gl.random_lsp_gluing(dim, rng), rho)
    f_sp = gl.interference_sp(gl.random_sp_gluing(dim, rng), rho)
    return max(abs(f_lsp), abs(f_sp)) - 1


def _coherence_operator_consistency(dim, rng):
    g = gl.random_lsp_gluing(dim, rng)
    rho = st.random_density(dim, None, rng)
    return abs(gl.coherence_operators(g).interference(rho) - gl.interference_lsp(g, rho))


def _sp_embeds_lsp(dim, rng):
    g = gl.random_lsp_gluing(dim, rng)
    rho = st.random_density(dim, None, rng)
    return abs(gl.interference_sp(gl.lsp_as_sp(g), rho) - gl.interference_lsp(g, rho))


def _q_invariance(dim, rng):
    psi = st.random_pure_state(dim, rng)
    rho_a, rho_b = _pair(dim, rng)
    pa, pb = ch.preparation_channel(psi, rho_a), ch.preparation_channel(psi, rho_b)
    base = singular_values(gl.overlap_matrix_q(pa, pb, psi))
    variants = [
        (_remixed(pa, rng), pb),
        (pa, _remixed(pb, rng)),
        (ch.random_preparation_channel(psi, rho_a, rng), ch.random_preparation_channel(psi, rho_b, rng)),
    ]
    return max(_padded_diff(base, singular_values(gl.overlap_matrix_q(a, b, psi))) for a, b in variants)


def _linearity(dim, rng):
    g = gl.random_sp_gluing(dim, rng)
    r1, r2 = st.random_density(dim, None, rng), st.random_density(dim, None, rng)
    alpha = float(rng.uniform())
    mix = st.DensityMatrix(alpha * r1.matrix + (1 - alpha) * r2.matrix)
    lhs = gl.interference_sp(g, mix)
    rhs = alpha * gl.interference_sp(g, r1) + (1 - alpha) * gl.interference_sp(g, r2)
    return abs(lhs - rhs)


# -- measures ---------------------------------------------------------------

def _four(rho_a, rho_b):
    return [ms.measure(rho_a, rho_b, w) for w in ms.MEASURES]


def _ordering_chain(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    f_lsp, f_sp, g_lsp, g_sp = _four(rho_a, rho_b)
    excess = [f_lsp - f_sp, f_sp - g_sp, f_lsp - g_lsp, g_lsp - g_sp,
              -min(f_lsp, f_sp, g_lsp, g_sp), max(f_lsp, f_sp, g_lsp, g_sp) - 1]
    return max(excess)


def channel_constructions(rho_a, rho_b, psi, rng):
    """Feasible channel pairs preparing ``(rho_a, rho_b)``: spectral, remixed, other input, random."""
    pairs = [(ch.preparation_channel(psi, rho_a), ch.preparation_channel(psi, rho_b), psi)]
    pa, pb, _ = pairs[0]
    pairs.append((_remixed(pa, rng), _remixed(pb, rng), psi))
    other = st.random_pure_state(rho_a.dim, rng)
    pairs.append((ch.preparation_channel(other, rho_a), ch.preparation_channel(other, rho_b), other))
    pairs.append((ch.random_preparation_channel(psi, rho_a, rng), ch.random_preparation_channel(psi, rho_b, rng), psi))
    return pairs


def numeric_measures(pa, pb, psi) -> list[float]:
    return [
        ms.maximize_lsp_numeric(pa, pb, psi, samples=0).value,
        ms.maximize_sp_numeric(pa, pb, psi, samples=0).value,
        ms.maximize_generalized_numeric(pa, pb, psi, "lsp", samples=0).value,
        ms.maximize_generalized_numeric(pa, pb, psi, "sp", samples=0).value,
    ]


def _channel_independence(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    psi = st.random_pure_state(dim, rng)
    closed = np.array(_four(rho_a, rho_b))
    rows = [numeric_measures(*c) for c in channel_constructions(rho_a, rho_b, psi, rng)]
    return max_abs(np.array(rows) - closed)


def _input_state_irrelevance(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    values = []
    for _ in range(2):
        psi = st.random_pure_state(dim, rng)
        values.append(numeric_measures(ch.preparation_channel(psi, rho_a), ch.preparation_channel(psi, rho_b), psi))
    return max_abs(np.array(values[0]) - np.array(values[1]))


def _unitary_invariance_g(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    v, w = random_unitary(dim, rng), random_unitary(dim, rng)
    ra = st.DensityMatrix(v @ rho_a.matrix @ dagger(v))
    rb = st.DensityMatrix(w @ rho_b.matrix @ dagger(w))
    return max(abs(ms.coherence_lsp(ra, rb) - ms.coherence_lsp(rho_a, rho_b)),
               abs(ms.coherence_sp(ra, rb) - ms.coherence_sp(rho_a, rho_b)))


def _numeric_never_exceeds(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    psi = st.random_pure_state(dim, rng)
    pa, pb = ch.preparation_channel(psi, rho_a), ch.preparation_channel(psi, rho_b)
    q = gl.overlap_matrix_q(pa, pb, psi)
    f_lsp, f_sp, g_lsp, g_sp = _four(rho_a, rho_b)
    return max(
        ms.search_coefficients(q, SEARCH_SAMPLES, rng) - f_lsp,
        ms.search_contractions(q, SEARCH_SAMPLES, rng) - f_sp,
        ms.search_unitaries(rho_a, rho_b, "lsp", SEARCH_SAMPLES, rng)[0] - g_lsp,
        ms.search_unitaries(rho_a, rho_b, "sp", SEARCH_SAMPLES, rng)[0] - g_sp,
    )


def _aligner_attains(dim, rng):
    rho_a, rho_b = _pair(dim, rng)
    dev = []
    for mode, closed in (("lsp", ms.coherence_lsp), ("sp", ms.coherence_sp)):
        u = ms.optimal_aligner(rho_a, rho_b, mode)
        dev.append(abs(ms.fidelity_under_shift(rho_a, rho_b, u, mode) - closed(rho_a, rho_b)))
    return max(dev)


# -- interferometer ---------------------------------------------------------

def _oracle_lsp(dim, rng):
    g = gl.random_lsp_gluing(dim, rng)
    psi = st.random_pure_state(dim, rng)
    sim = ifm.phase_scan(ifm.build_lsp_dilation(g), psi).pattern.amplitude
    return abs(sim - gl.interference_lsp(g, psi))


def _oracle_sp(dim, rng):
    g = gl.random_sp_gluing(dim, rng)
    psi = st.random_pure_state(dim, rng)
    u = random_unitary(dim, rng)
    d = ifm.build_sp_dilation(g)
    plain = abs(ifm.phase_scan(d, psi).pattern.amplitude - gl.interference_sp(g, psi))
    shifted = abs(ifm.phase_scan(d, psi, u).pattern.amplitude - gl.generalized_interference(g, psi, u))
    return max(plain, shifted)


def _subspace_preservation(dim, rng):
    g = gl.random_lsp_gluing(dim, rng) if rng.integers(2) else gl.random_sp_gluing(dim, rng)
    d = ifm.build_lsp_dilation(g) if isinstance(g, gl.LSPGluing) else ifm.build_sp_dilation(g)
    n = d.system_dim * d.ancilla_dim
    full = d.unitary
    leak = max(max_abs(full[:n, n:]), max_abs(full[n:, :n]))
    cfg = ifm.InterferometerConfig(float(rng.uniform(0, 2 * np.pi)), random_unitary(dim, rng))
    pa, pb = ifm.detection_probabilities(d, st.random_pure_state(dim, rng), cfg)
    return max(leak, abs(pa + pb - 1))


def _shift_reduction(dim, rng):
    channel = ch.random_channel(dim, int(rng.integers(1, 4)), rng)
    b = random_complex_gaussian(channel.n_kraus, rng)
    b *= rng.uniform() / np.linalg.norm(b)
    u = random_unitary(dim, rng)
    psi = st.random_pure_state(dim, rng)
    phi = float(rng.uniform(0, 2 * np.pi))
    empty = ch.identity_channel(dim)
    shifted = ifm.build_lsp_dilation(gl.LSPGluing(empty, channel, [1.0], b))
    composed = ifm.build_lsp_dilation(gl.LSPGluing(empty, ch.compose_unitary(channel, u), [1.0], b))
    return abs(ifm.simulate(shifted, psi, ifm.InterferometerConfig(phi, u))
               - ifm.simulate(composed, psi, ifm.InterferometerConfig(phi)))


def _visibility_bounded(dim, rng):
    g = gl.random_sp_gluing(dim, rng)
    psi = st.random_pure_state(dim, rng)
    return ifm.phase_scan(ifm.build_sp_dilation(g), psi, random_unitary(dim, rng)).pattern.visibility - 1


CHECKS = [
    Check("numerics", "eig_reconstruction", 1e-9, _eig_reconstruction),
    Check("numerics", "singular_value_unitary_invariance", 1e-9, _sv_unitary_invariance),
    Check("numerics", "psd_sqrt_consistency", 1e-8, _psd_sqrt_consistency),
    Check("numerics", "polar_never_exceeded", 1e-8, _polar_never_exceeded),
    Check("states", "decomposition_freedom", 1e-9, _decomposition_freedom),
    Check("states", "singular_value_identity", 1e-9, _sv_identity),
    Check("states", "uhlmann_equals_m_nuclear_norm", 1e-9, _uhlmann_vs_m),
    Check("states", "fidelity_bounds", 1e-8, _fidelity_bounds),
    Check("channels", "dilation_round_trip", 1e-9, _dilation_round_trip),
    Check("channels", "choi_preservation", 1e-9, _choi_preservation),
    Check("channels", "decomposition_bridge", 1e-9, _decomposition_bridge),
    Check("channels", "completion_annihilation", 1e-10, _completion_annihilation),
    Check("gluings", "interference_bounded", 1e-9, _interference_bounded),
    Check("gluings", "coherence_operator_consistency", 1e-10, _coherence_operator_consistency),
    Check("gluings", "sp_embeds_lsp", 1e-12, _sp_embeds_lsp),
    Check("gluings", "q_singular_value_invariance", 1e-9, _q_invariance),
    Check("gluings", "linearity", 1e-12, _linearity),
    Check("measures", "ordering_chain", 1e-9, _ordering_chain),
    Check("measures", "channel_independence", 1e-9, _channel_independence),
    Check("measures", "input_state_irrelevance", 1e-9, _input_state_irrelevance),
    Check("measures", "unitary_invariance_g", 1e-9, _unitary_invariance_g),
    Check("measures", "numeric_never_exceeds", 1e-8, _numeric_never_exceeds),
    Check("measures", "aligner_attains", 1e-9, _aligner_attains),
    Check("interferometer", "oracle_equivalence_lsp", 1e-10, _oracle_lsp),
    Check("interferometer", "oracle_equivalence_sp", 1e-10, _oracle_sp),
    Check("interferometer", "subspace_preservation", 1e-12, _subspace_preservation),
    Check("interferometer", "shift_reduction", 1e-10, _shift_reduction),
    Check("interferometer", "visibility_bounded", 1e-9, _visibility_bounded),
]


def _stream(name: str) -> int:
    return zlib.crc32(name.encode())


def _run_chunk(task):
    index, dim, seed, start, stop = task
    check = CHECKS[index]
    worst = None
    for trial in range(start, stop):
        dev = float(check.fn(dim, make_rng(seed, _stream(check.name), trial)))
        worst = dev if worst is None else max(worst, dev)
    return index, worst


def run_checks(dim: int, trials: int, seed: int, workers: int = 1, chunk: int = 25) -> list[CheckResult]:
    """Run every check for ``trials`` seeded trials at dimension ``dim``."""
    if not 2 <= dim <= 4:
        raise ValueError(f"dim must be in 2..4, got {dim}")
    if trials < 0:
        raise ValueError("trials must be non-negative")
    tasks = [(i, dim, seed, s, min(s + chunk, trials))
             for i in range(len(CHECKS)) for s in range(0, trials, chunk)]
    worst: dict[int, float | None] = {i: None for i in range(len(CHECKS))}
    if workers > 1 and tasks:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, tasks))
    else:
        results = [_run_chunk(t) for t in tasks]
    for i, dev in results:
        if dev is not None:
            worst[i] = dev if worst[i] is None else max(worst[i], dev)
    return [CheckResult(c.suite, c.name, c.tolerance, worst[i]) for i, c in enumerate(CHECKS)]
