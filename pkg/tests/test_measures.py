import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherence_lab.channels import (
    KrausChannel,
    apply_channel,
    identity_channel,
    preparation_channel,
    random_channel,
    random_isometry,
    random_preparation_channel,
    remix_kraus,
)
from coherence_lab.errors import DimensionMismatch
from coherence_lab.gluings import SPGluing, generalized_interference, overlap_matrix_q
from coherence_lab.measures import (
    MEASURES,
    coherence_lsp,
    coherence_sp,
    coherent_fidelity_lsp,
    coherent_fidelity_sp,
    fidelity_under_shift,
    maximize_generalized_numeric,
    maximize_lsp_numeric,
    maximize_sp_numeric,
    measure,
    optimal_aligner,
    search_unitaries,
    unitaries_from_params,
)
from coherence_lab.numerics import dagger, make_rng, max_abs, random_unitary, singular_values
from coherence_lab.states import (
    DensityMatrix,
    basis_state,
    m_singular_values,
    pure_state,
    random_density,
    random_pure_state,
)

from conftest import P0, P1, PLUS

seeds = st.integers(0, 2**63 - 1)
dims = st.integers(2, 4)

MIXED = DensityMatrix(np.eye(2) / 2)
ZERO = DensityMatrix(P0)
ONE = DensityMatrix(P1)
D73 = DensityMatrix(np.diag([0.7, 0.3]))
D64 = DensityMatrix(np.diag([0.6, 0.4]))
MEASURE = KrausChannel(np.array([P0, P1]))

# sqrt(0.7 * 0.6) and sqrt(0.7 * 0.6) + sqrt(0.3 * 0.4), evaluated in double precision
GLSP_73_64 = 0.6480740698407860
GSP_73_64 = 0.9944842313545614


def random_pair(dim, rng):
    ra, rb = rng.integers(1, dim + 1, size=2)
    return random_density(dim, int(ra), rng), random_density(dim, int(rb), rng)


def test_frozen_constants():
    assert abs(GLSP_73_64 - np.sqrt(0.42)) < 1e-16
    assert abs(GSP_73_64 - (np.sqrt(0.42) + np.sqrt(0.12))) < 1e-16


def test_lsp_examples():
    psi = random_pure_state(3, seed=1).density()
    assert abs(coherent_fidelity_lsp(psi, psi) - 1) < 1e-9
    assert abs(coherent_fidelity_lsp(MIXED, MIXED) - 0.5) < 1e-15
    assert abs(coherent_fidelity_lsp(MIXED, ZERO) - 1 / np.sqrt(2)) < 1e-15


def test_sp_examples():
    rho = random_density(3, seed=2)
    assert abs(coherent_fidelity_sp(rho, rho) - 1) < 1e-9
    assert abs(coherent_fidelity_sp(MIXED, ZERO) - 1 / np.sqrt(2)) < 1e-15
    assert abs(coherent_fidelity_sp(MIXED, MIXED) - 1) < 1e-15


def test_generalized_examples():
    assert abs(coherence_lsp(ZERO, ONE) - 1) < 1e-15
    assert abs(coherence_lsp(MIXED, MIXED) - 0.5) < 1e-15
    assert abs(coherence_lsp(D73, D64) - GLSP_73_64) < 1e-15
    assert abs(coherence_sp(MIXED, MIXED) - 1) < 1e-15
    assert abs(coherence_sp(D73, D64) - GSP_73_64) < 1e-15
    a, b = random_pure_state(3, seed=3).density(), random_pure_state(3, seed=4).density()
    assert abs(coherence_sp(a, b) - 1) < 1e-12


def test_measure_dispatch():
    for which in MEASURES:
        assert measure(D73, D64, which) == {"lsp": coherent_fidelity_lsp, "sp": coherent_fidelity_sp,
                                            "glsp": coherence_lsp, "gsp": coherence_sp}[which](D73, D64)
    with pytest.raises(ValueError):
        measure(D73, D64, "nope")
    with pytest.raises(DimensionMismatch):
        measure(D73, random_density(3), "sp")


def test_unitary_search_approaches_from_below():
    for mode, closed in (("lsp", GLSP_73_64), ("sp", GSP_73_64)):
        best, u = search_unitaries(D73, D64, mode, samples=1000, seed=7, refine=3)
        assert best <= closed + 1e-8
        assert closed - best < 1e-4
        assert max_abs(dagger(u) @ u - np.eye(2)) < 1e-9


def test_unitaries_from_params_are_unitary():
    us = unitaries_from_params(make_rng(1).normal(size=(20, 9)))
    assert max_abs(np.einsum("sji,sjk->sik", us.conj(), us) - np.eye(3)) < 1e-12


def test_lsp_numeric_examples():
    one = pure_state([1.0])
    report = maximize_lsp_numeric(identity_channel(1), identity_channel(1), one)
    assert abs(report.value - 1) < 1e-15
    assert abs(abs(report.optimizer["coeff_a"][0]) - 1) < 1e-15

    zero = basis_state(2, 0)
    report = maximize_lsp_numeric(preparation_channel(zero, MIXED), preparation_channel(zero, ZERO), zero)
    assert abs(report.value - 1 / np.sqrt(2)) < 1e-12

    report = maximize_lsp_numeric(MEASURE, identity_channel(2), pure_state(PLUS))
    assert abs(report.value - 1 / np.sqrt(2)) < 1e-15
    # achieved amplitude is real and non-negative
    assert abs(report.optimizer["achieved"] - report.value) < 1e-14
    assert report.certificate_gap >= -1e-8


def test_sp_numeric_examples():
    one = pure_state([1.0])
    report = maximize_sp_numeric(identity_channel(1), identity_channel(1), one)
    assert abs(report.value - 1) < 1e-15 and max_abs(report.optimizer["contraction"] - 1) < 1e-15

    report = maximize_sp_numeric(MEASURE, MEASURE, pure_state(PLUS))
    assert abs(report.value - 1) < 1e-15
    assert max_abs(report.optimizer["contraction"] - np.eye(2)) < 1e-14

    rng = make_rng(9)
    a, b = random_channel(3, 3, rng), random_channel(3, 2, rng)
    report = maximize_sp_numeric(a, b, random_pure_state(3, rng), samples=1000, seed=rng)
    assert report.certificate_gap >= -1e-8
    # the reported contraction is feasible and achieves the value
    c = report.optimizer["contraction"]
    assert singular_values(c)[0] <= 1 + 1e-12
    assert abs(report.optimizer["achieved"] - report.value) < 1e-12


def test_sp_numeric_rank_deficient_q():
    zero = basis_state(2, 0)
    report = maximize_sp_numeric(preparation_channel(zero, ZERO), preparation_channel(zero, MIXED), zero)
    assert abs(report.value - 1 / np.sqrt(2)) < 1e-12
    assert singular_values(report.optimizer["contraction"])[0] <= 1 + 1e-12


def test_aligner_examples():
    rho = random_density(3, seed=11)
    u = optimal_aligner(rho, rho)
    assert max_abs(np.abs(u) - np.eye(3)) < 1e-12
    assert abs(fidelity_under_shift(rho, rho, u, "sp") - coherence_sp(rho, rho)) < 1e-9
    assert abs(fidelity_under_shift(rho, rho, u, "lsp") - coherence_lsp(rho, rho)) < 1e-9

    u = optimal_aligner(ZERO, ONE, "lsp")
    assert abs(abs(u[1, 0]) - 1) < 1e-15
    assert abs(fidelity_under_shift(ZERO, ONE, u, "lsp") - 1) < 1e-12


def test_aligner_beats_random_unitaries():
    rng = make_rng(12)
    rho_a, rho_b = random_pair(3, rng)
    for mode, closed in (("lsp", coherence_lsp(rho_a, rho_b)), ("sp", coherence_sp(rho_a, rho_b))):
        attained = fidelity_under_shift(rho_a, rho_b, optimal_aligner(rho_a, rho_b, mode), mode)
        best, _ = search_unitaries(rho_a, rho_b, mode, samples=1000, seed=rng)
        assert best <= attained + 1e-8
        assert abs(attained - closed) < 1e-9


def test_generalized_numeric_uses_shift():
    zero = basis_state(2, 0)
    a, b = preparation_channel(zero, ZERO), preparation_channel(zero, ONE)
    for mode in ("lsp", "sp"):
        report = maximize_generalized_numeric(a, b, zero, mode=mode, samples=500, seed=1)
        assert abs(report.value - 1) < 1e-12
        assert report.certificate_gap >= -1e-8
    # the returned contraction and shift reproduce the value in the generalized formula
    c, u = report.optimizer["contraction"], report.optimizer["shift"]
    assert abs(abs(generalized_interference(SPGluing(a, b, c), zero, u)) - 1) < 1e-12


@given(seed=seeds, dim=dims)
def test_closed_forms_match_m_matrix(seed, dim):
    rho_a, rho_b = random_pair(dim, make_rng(seed))
    s = m_singular_values(rho_a, rho_b)
    assert abs(coherent_fidelity_lsp(rho_a, rho_b) - s[0]) < 1e-9
    assert abs(coherent_fidelity_sp(rho_a, rho_b) - s.sum()) < 1e-9


@given(seed=seeds, dim=dims)
def test_ordering_chain(seed, dim):
    rho_a, rho_b = random_pair(dim, make_rng(seed))
    f_lsp, f_sp = coherent_fidelity_lsp(rho_a, rho_b), coherent_fidelity_sp(rho_a, rho_b)
    g_lsp, g_sp = coherence_lsp(rho_a, rho_b), coherence_sp(rho_a, rho_b)
    slack = 1e-9
    assert f_lsp <= f_sp + slack and f_sp <= g_sp + slack
    assert f_lsp <= g_lsp + slack and g_lsp <= g_sp + slack
    for v in (f_lsp, f_sp, g_lsp, g_sp):
        assert -slack <= v <= 1 + slack


@given(seed=seeds, dim=dims)
def test_channel_independence(seed, dim):
    rng = make_rng(seed)
    rho_a, rho_b = random_pair(dim, rng)
    psi = random_pure_state(dim, rng)
    other = random_pure_state(dim, rng)
    pa, pb = preparation_channel(psi, rho_a), preparation_channel(psi, rho_b)
    constructions = [
        (pa, pb, psi),
        (remix_kraus(pa, random_isometry(pa.n_kraus + 1, pa.n_kraus, rng)),
         remix_kraus(pb, random_isometry(pb.n_kraus, pb.n_kraus, rng)), psi),
        (preparation_channel(other, rho_a), preparation_channel(other, rho_b), other),
        (random_preparation_channel(psi, rho_a, rng), random_preparation_channel(psi, rho_b, rng), psi),
    ]
    expected = {"lsp": coherent_fidelity_lsp(rho_a, rho_b), "sp": coherent_fidelity_sp(rho_a, rho_b),
                "glsp": coherence_lsp(rho_a, rho_b), "gsp": coherence_sp(rho_a, rho_b)}
    for a, b, start in constructions:
        assert abs(maximize_lsp_numeric(a, b, start, samples=0).value - expected["lsp"]) < 1e-9
        assert abs(maximize_sp_numeric(a, b, start, samples=0).value - expected["sp"]) < 1e-9
        assert abs(maximize_generalized_numeric(a, b, start, "lsp", samples=0).value - expected["glsp"]) < 1e-9
        assert abs(maximize_generalized_numeric(a, b, start, "sp", samples=0).value - expected["gsp"]) < 1e-9


@given(seed=seeds, dim=dims)
def test_g_unitary_invariance(seed, dim):
    rng = make_rng(seed)
    rho_a, rho_b = random_pair(dim, rng)
    v, w = random_unitary(dim, rng), random_unitary(dim, rng)
    ra = DensityMatrix(v @ rho_a.matrix @ dagger(v))
    rb = DensityMatrix(w @ rho_b.matrix @ dagger(w))
    assert abs(coherence_lsp(ra, rb) - coherence_lsp(rho_a, rho_b)) < 1e-9
    assert abs(coherence_sp(ra, rb) - coherence_sp(rho_a, rho_b)) < 1e-9


@given(seed=seeds, dim=dims)
def test_searches_never_exceed(seed, dim):
    rng = make_rng(seed)
    rho_a, rho_b = random_pair(dim, rng)
    psi = random_pure_state(dim, rng)
    a, b = preparation_channel(psi, rho_a), random_preparation_channel(psi, rho_b, rng)
    for report in (maximize_lsp_numeric(a, b, psi, samples=300, seed=rng),
                   maximize_sp_numeric(a, b, psi, samples=300, seed=rng),
                   maximize_generalized_numeric(a, b, psi, "lsp", samples=300, seed=rng),
                   maximize_generalized_numeric(a, b, psi, "sp", samples=300, seed=rng)):
        assert report.certificate_gap >= -1e-8


@given(seed=seeds, dim=dims)
def test_aligner_attains_g(seed, dim):
    rng = make_rng(seed)
    rho_a, rho_b = random_pair(dim, rng)
    for mode, fn in (("lsp", coherence_lsp), ("sp", coherence_sp)):
        u = optimal_aligner(rho_a, rho_b, mode)
        assert max_abs(dagger(u) @ u - np.eye(dim)) < 1e-9
        assert abs(fidelity_under_shift(rho_a, rho_b, u, mode) - fn(rho_a, rho_b)) < 1e-9


@given(seed=seeds, dim=dims)
def test_shift_inside_q(seed, dim):
    # with the aligner after channel B, Q reaches the G closed forms
    rng = make_rng(seed)
    rho_a, rho_b = random_pair(dim, rng)
    psi = random_pure_state(dim, rng)
    a, b = preparation_channel(psi, rho_a), preparation_channel(psi, rho_b)
    u = optimal_aligner(apply_channel(b, psi.density()), apply_channel(a, psi.density()))
    s = singular_values(overlap_matrix_q(a, b, psi, u))
    assert abs(s[0] - coherence_lsp(rho_a, rho_b)) < 1e-9
    assert abs(s.sum() - coherence_sp(rho_a, rho_b)) < 1e-9
