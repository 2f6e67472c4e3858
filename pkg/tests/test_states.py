import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from coherence_lab.channels import random_isometry
from coherence_lab.errors import BadRank, DimensionMismatch, NotNormalized, NotPSD, NotSquare, TraceNotOne
from coherence_lab.numerics import make_rng, max_abs, psd_sqrt, random_unitary, singular_values
from coherence_lab.states import (
    DensityMatrix,
    PureDecomposition,
    basis_state,
    m_singular_values,
    overlap_matrix_m,
    pure_state,
    random_density,
    random_pure_state,
    spectral_decomposition,
    uhlmann_fidelity,
    validate_density,
)

from conftest import P0, P1

seeds = st.integers(0, 2**63 - 1)
dims = st.integers(2, 4)

MIXED = DensityMatrix(np.eye(2) / 2)
ZERO = DensityMatrix(P0)
ONE = DensityMatrix(P1)


def random_pair(dim, seed):
    rng = make_rng(seed)
    ra, rb = rng.integers(1, dim + 1, size=2)
    return random_density(dim, int(ra), rng), random_density(dim, int(rb), rng)


def test_validate_density():
    rho = validate_density(np.eye(2) / 2)
    assert rho.dim == 2 and abs(rho.purity() - 0.5) < 1e-15
    with pytest.raises(TraceNotOne):
        validate_density(np.diag([0.7, 0.4]))
    with pytest.raises(NotPSD):
        validate_density([[0.5, 0.6], [0.6, 0.5]])
    with pytest.raises(NotSquare):
        validate_density(np.ones((2, 3)) / 2)


def test_validation_errors_are_value_errors():
    with pytest.raises(ValueError):
        validate_density(np.diag([0.7, 0.4]))


def test_pure_states():
    psi = pure_state([1, 1j], normalize=True)
    assert abs(psi.density().purity() - 1) < 1e-15
    with pytest.raises(NotNormalized):
        pure_state([1, 1])
    assert basis_state(3, 2).amplitudes[2] == 1


def test_spectral_decomposition_examples():
    d = spectral_decomposition(ZERO)
    assert len(d) == 1 and abs(abs(d.vectors[0, 0]) - 1) < 1e-15

    d = spectral_decomposition(MIXED)
    norms = np.linalg.norm(d.vectors, axis=1)
    assert len(d) == 2 and np.abs(norms - 1 / np.sqrt(2)).max() < 1e-15
    assert abs(np.vdot(d.vectors[0], d.vectors[1])) < 1e-15

    d = spectral_decomposition(DensityMatrix(np.diag([0.7, 0.3])))
    assert np.abs(np.linalg.norm(d.vectors, axis=1) - np.sqrt([0.7, 0.3])).max() < 1e-15


@given(seed=seeds, dim=dims)
def test_spectral_decomposition_reconstructs(seed, dim):
    rho = random_density(dim, seed=seed)
    assert max_abs(spectral_decomposition(rho).state_matrix() - rho.matrix) < 1e-12


def test_overlap_matrix_examples():
    m = overlap_matrix_m(spectral_decomposition(ZERO), spectral_decomposition(ONE))
    assert m.shape == (1, 1) and abs(m[0, 0]) < 1e-15
    m = overlap_matrix_m(spectral_decomposition(ZERO), spectral_decomposition(ZERO))
    assert abs(abs(m[0, 0]) - 1) < 1e-15
    m = overlap_matrix_m(spectral_decomposition(MIXED), spectral_decomposition(ZERO))
    assert m.shape == (2, 1)
    assert abs(singular_values(m)[0] - 1 / np.sqrt(2)) < 1e-15


def test_overlap_matrix_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        overlap_matrix_m(spectral_decomposition(ZERO), spectral_decomposition(random_density(3)))


def test_uhlmann_examples():
    rho = random_density(3, seed=4)
    assert abs(uhlmann_fidelity(rho, rho) - 1) < 1e-9
    assert abs(uhlmann_fidelity(ZERO, ONE)) < 1e-15
    assert abs(uhlmann_fidelity(MIXED, ZERO) - 1 / np.sqrt(2)) < 1e-15


@given(seed=seeds, dim=dims)
def test_uhlmann_commuting_states(seed, dim):
    # diagonal states: F = sum_i sqrt(p_i q_i)
    rng = make_rng(seed)
    p, q = rng.dirichlet(np.ones(dim)), rng.dirichlet(np.ones(dim))
    expected = np.sum(np.sqrt(p * q))
    got = uhlmann_fidelity(DensityMatrix(np.diag(p)), DensityMatrix(np.diag(q)))
    assert abs(got - expected) < 1e-9


@given(seed=seeds, dim=dims)
def test_uhlmann_pure_states(seed, dim):
    rng = make_rng(seed)
    a, b = random_pure_state(dim, rng), random_pure_state(dim, rng)
    expected = abs(np.vdot(a.amplitudes, b.amplitudes))
    assert abs(uhlmann_fidelity(a.density(), b.density()) - expected) < 1e-7


@given(seed=seeds, dim=dims)
def test_decomposition_freedom(seed, dim):
    rng = make_rng(seed)
    rho_a, rho_b = random_pair(dim, rng)
    da, db = spectral_decomposition(rho_a), spectral_decomposition(rho_b)
    va = random_isometry(len(da) + 2, len(da), rng)
    vb = random_isometry(len(db) + 1, len(db), rng)
    da2, db2 = PureDecomposition(va @ da.vectors), PureDecomposition(vb @ db.vectors)
    assert max_abs(da2.state_matrix() - rho_a.matrix) < 1e-12
    s1 = singular_values(overlap_matrix_m(da, db))
    s2 = singular_values(overlap_matrix_m(da2, db2))
    n = min(len(s1), len(s2))
    assert np.abs(s1[:n] - s2[:n]).max() < 1e-9
    assert np.abs(s1[n:]).max(initial=0) < 1e-9 and np.abs(s2[n:]).max(initial=0) < 1e-9


@given(seed=seeds, dim=dims)
def test_singular_value_identity(seed, dim):
    rho_a, rho_b = random_pair(dim, seed)
    sb = rho_b.sqrt()
    root = psd_sqrt(sb @ rho_a.matrix @ sb)
    eigs = np.sort(np.linalg.eigvalsh(root))[::-1]
    s = m_singular_values(rho_a, rho_b)
    assert np.abs(s - eigs[: len(s)]).max() < 1e-9
    assert np.abs(eigs[len(s):]).max(initial=0) < 1e-9
    assert abs(uhlmann_fidelity(rho_a, rho_b) - s.sum()) < 1e-9


@given(seed=seeds, dim=dims)
def test_fidelity_bounds_and_symmetry(seed, dim):
    rho_a, rho_b = random_pair(dim, seed)
    f = uhlmann_fidelity(rho_a, rho_b)
    assert -1e-9 <= f <= 1 + 1e-9
    assert abs(f - uhlmann_fidelity(rho_b, rho_a)) < 1e-7
    # unitarily rotated copies are different states, with fidelity below 1
    u = random_unitary(dim, seed)
    rho_c = DensityMatrix(u @ rho_a.matrix @ u.conj().T)
    if max_abs(rho_c.matrix - rho_a.matrix) > 1e-3:
        assert uhlmann_fidelity(rho_a, rho_c) < 1 - 1e-8


def test_random_density_examples():
    rho = random_density(2, rank=1, seed=5)
    vals = rho.eigenvalues()
    assert abs(vals[0] - 1) < 1e-12 and abs(vals[1]) < 1e-12
    rho = random_density(3, rank=3, seed=5)
    assert abs(rho.eigenvalues().sum() - 1) < 1e-12
    assert np.array_equal(random_density(3, seed=8).matrix, random_density(3, seed=8).matrix)
    with pytest.raises(BadRank):
        random_density(2, rank=3)
    with pytest.raises(BadRank):
        random_density(2, rank=0)
