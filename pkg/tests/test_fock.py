import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairdiag import fock
from pairdiag.errors import CapacityExceeded, DimensionMismatch, ModeOutOfRange, SectorTooSmall
from pairdiag.fock import (
    annihilator,
    assemble_fiber_hamiltonian,
    assemble_hamiltonian,
    b_operator,
    build_fock,
    commutator_check,
    creator,
    field_product,
    inequality_suite,
    ladder,
    lowest_eigenvalues,
    random_safe_states,
    second_quantize,
    segal_field,
    spectrum_compare,
    weyl_check,
)
from pairdiag.pair_model import PairModel, diagonalize, random_pair_model

E_SINGLE = (np.sqrt(2) - 1) / 2
E_SINGLE_NEG = (np.sqrt(0.5) - 1) / 2


def single(lam=1.0):
    return PairModel(np.eye(1), ((lam, np.ones(1)),))


def two_mode():
    return PairModel(np.diag([1.0, 2.0]), ((0.8, np.array([1.0, 1.0]) / np.sqrt(2)),))


# build_fock / ladder


def test_single_mode_basis():
    s = build_fock(1, 3)
    assert s.basis == ((0,), (1,), (2,), (3,))
    assert s.dim == 4


def test_graded_lex_basis():
    assert build_fock(2, 2).basis == ((0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2))


def test_vacuum_only():
    s = build_fock(3, 0)
    assert s.dim == 1 and s.basis[0] == (0, 0, 0)


@pytest.mark.parametrize("d,nmax,dim", [(1, 10, 11), (2, 5, 21), (3, 4, 35), (4, 3, 35)])
def test_dimension_formula(d, nmax, dim):
    s = build_fock(d, nmax)
    assert s.dim == dim
    assert s.basis[0] == (0,) * d
    assert list(s.quanta) == sorted(s.quanta)


def test_capacity():
    with pytest.raises(CapacityExceeded):
        build_fock(4, 40)
    with pytest.raises(CapacityExceeded):
        build_fock(2, 5, capacity=20)


def test_bad_arguments():
    with pytest.raises(ValueError):
        build_fock(0, 3)


def test_ladder_matrix_elements():
    s = build_fock(1, 2)
    a, adag = ladder(s, 0)
    ad = adag.dense()
    np.testing.assert_allclose(ad @ [1, 0, 0], [0, 1, 0])
    np.testing.assert_allclose(ad @ [0, 1, 0], [0, 0, np.sqrt(2)])
    np.testing.assert_allclose(ad @ [0, 0, 1], [0, 0, 0])
    assert a.dense()[1, 2] == pytest.approx(np.sqrt(2))
    np.testing.assert_array_equal(a.dense(), ad.T)


def test_ladder_mode_out_of_range():
    with pytest.raises(ModeOutOfRange):
        ladder(build_fock(2, 2), 2)


@pytest.mark.parametrize("d,nmax", [(1, 2), (2, 4), (3, 3)])
def test_ccr_below_cutoff(d, nmax):
    s = build_fock(d, nmax)
    idx = s.sector(nmax - 1)
    for i in range(d):
        for j in range(d):
            ai, _ = ladder(s, i)
            _, ajd = ladder(s, j)
            c = ai.commutator(ajd).dense()[np.ix_(idx, idx)]
            want = np.eye(idx.size) if i == j else np.zeros((idx.size, idx.size))
            assert np.max(np.abs(c - want)) <= 1e-13


# second quantization and fields


def test_number_operator_diagonal():
    s = build_fock(2, 3)
    n = second_quantize(s, np.diag([1.5, 0.25])).dense()
    want = [1.5 * o[0] + 0.25 * o[1] for o in s.basis]
    np.testing.assert_allclose(np.diag(n), want)
    np.testing.assert_allclose(n - np.diag(np.diag(n)), 0)


def test_total_number_spectrum():
    s = build_fock(2, 2)
    np.testing.assert_allclose(np.linalg.eigvalsh(second_quantize(s, np.eye(2)).dense()), [0, 1, 1, 2, 2, 2], atol=1e-14)


def test_second_quantize_kills_vacuum():
    s = build_fock(3, 3)
    A = np.array([[1, 2j, 0], [-2j, 3, 1], [0, 1, 0.5]])
    op = second_quantize(s, A)
    assert np.max(np.abs(op.matrix @ s.vacuum())) == 0
    assert op.quanta_degree == 0


def test_second_quantize_dimension_check():
    with pytest.raises(DimensionMismatch):
        second_quantize(build_fock(2, 2), np.eye(3))


def test_vacuum_fluctuation():
    s = build_fock(1, 4)
    phi = segal_field(s, np.ones(1)).dense()
    v = s.vacuum()
    assert np.vdot(v, phi @ phi @ v).real == pytest.approx(0.5)
    assert abs(np.vdot(v, phi @ v)) == 0
    assert segal_field(s, np.ones(1)).quanta_degree == 1


def test_field_commutator_single_mode():
    s = build_fock(1, 3)
    c = segal_field(s, np.array([1.0])).commutator(segal_field(s, np.array([1j]))).dense()
    idx = s.sector(2)
    np.testing.assert_allclose(c[np.ix_(idx, idx)], 1j * np.eye(3), atol=1e-15)


def test_antilinear_annihilator():
    s = build_fock(1, 3)
    np.testing.assert_allclose(annihilator(s, np.array([1j])).dense(), -1j * ladder(s, 0)[0].dense())
    np.testing.assert_allclose(creator(s, np.array([1j])).dense(), 1j * ladder(s, 0)[1].dense())


def test_field_product_is_compression():
    s_big = build_fock(2, 10)
    s = build_fock(2, 6)
    f, h = np.array([0.3, 1j]), np.array([1.0, 0.5 - 0.2j])
    big = (segal_field(s_big, f) @ segal_field(s_big, h)).dense()
    idx = s_big.sector(6)
    np.testing.assert_allclose(field_product(s, f, h).dense(), big[np.ix_(idx, idx)], atol=1e-14)


# Hamiltonian and spectrum


def test_free_hamiltonian():
    s = build_fock(2, 3)
    T = np.diag([1.0, 2.0])
    np.testing.assert_array_equal(assemble_hamiltonian(s, PairModel(T)).dense(), second_quantize(s, T).dense())


def test_single_mode_ground_energy():
    e = lowest_eigenvalues(assemble_hamiltonian(build_fock(1, 40), single()), 1)[0]
    assert e == pytest.approx(0.2071068, abs=1e-7)
    assert e == pytest.approx(E_SINGLE, abs=1e-12)


def test_negative_coupling_ground_energy():
    e = lowest_eigenvalues(assemble_hamiltonian(build_fock(1, 40), single(-0.5)), 1)[0]
    assert e == pytest.approx(-0.1464466, abs=1e-7)
    assert e == pytest.approx(E_SINGLE_NEG, abs=1e-12)


def test_truncation_is_variational():
    m = two_mode()
    prev = np.inf
    for nmax in (4, 8, 12, 16):
        e = lowest_eigenvalues(assemble_hamiltonian(build_fock(2, nmax), m), 1)[0]
        assert e <= prev + 1e-14
        prev = e
    assert prev >= diagonalize(m).E - 1e-12


def test_spectrum_free():
    m = PairModel(np.diag([1.0, 1.7]))
    assert spectrum_compare(build_fock(2, 6), m, 10).max_dev <= 1e-14


def test_spectrum_single_mode():
    cmp = spectrum_compare(build_fock(1, 40), single(), 5)
    np.testing.assert_allclose(cmp.eigs_pred, E_SINGLE + np.sqrt(2) * np.arange(5), atol=1e-14)
    assert cmp.max_dev <= 1e-6


def test_spectrum_two_mode_convergence():
    devs = [spectrum_compare(build_fock(2, n), two_mode(), 4).max_dev for n in (8, 16, 24)]
    assert devs[0] > devs[1] > devs[2]
    # frozen from the oracle run
    assert devs[0] == pytest.approx(1.4857e-6, rel=1e-3)
    assert devs[2] <= 1e-12


def test_spectrum_rejects_large_k():
    with pytest.raises(ValueError):
        spectrum_compare(build_fock(1, 3), single(), 5)


def test_spectral_gap_is_eigmin_S():
    m = two_mode()
    e = lowest_eigenvalues(assemble_hamiltonian(build_fock(2, 30), m), 2)
    assert e[1] - e[0] == pytest.approx(diagonalize(m).eigmin_S, abs=1e-5)


def test_lanczos_path_matches_dense(monkeypatch):
    # the linear term breaks parity, so the 2925-state space stays one block
    s = build_fock(3, 24)
    H = assemble_fiber_hamiltonian(s, np.diag([1.0, 1.3, 2.0]), [np.array([1.0, 0.5, 0.2])], [0.5])
    sparse = lowest_eigenvalues(H, 3)
    monkeypatch.setattr(fock, "DENSE_LIMIT", 10**6)
    np.testing.assert_allclose(sparse, lowest_eigenvalues(H, 3), atol=1e-10)


def test_block_split_finds_vacuum_level():
    s = build_fock(3, 24)
    np.testing.assert_allclose(lowest_eigenvalues(second_quantize(s, np.diag([0.7, 1.2, 2.0])), 3), [0, 0.7, 1.2])


def test_fiber_hamiltonian_zero_momentum():
    s = build_fock(1, 10)
    T, gs = np.eye(1), [np.ones(1)]
    np.testing.assert_allclose(
        assemble_fiber_hamiltonian(s, T, gs, [0.0]).dense(), assemble_hamiltonian(s, single()).dense()
    )
    with pytest.raises(DimensionMismatch):
        assemble_fiber_hamiltonian(s, T, gs, [0.0, 1.0])


# B(f) and commutators


def test_b_operator_trivial_pair():
    m = PairModel(np.diag([1.0, 2.0]))
    p = diagonalize(m).pair
    s = build_fock(2, 3)
    f = np.array([0.3 + 0.4j, -1.0])
    np.testing.assert_allclose(b_operator(s, f, p).dense(), annihilator(s, f).dense(), atol=1e-15)


def test_b_operator_single_mode_entries():
    p = diagonalize(single()).pair
    X, Y = p.X[0, 0], p.Y[0, 0]
    s = build_fock(1, 3)
    a, adag = ladder(s, 0)
    np.testing.assert_allclose(b_operator(s, np.ones(1), p).dense(), X * a.dense() + Y * adag.dense(), atol=1e-15)
    assert b_operator(s, np.ones(1), p).dense()[0, 1] == pytest.approx(X)
    assert b_operator(s, np.ones(1), p).dense()[1, 0] == pytest.approx(Y)


def test_b_operator_ccr():
    m = two_mode()
    p = diagonalize(m).pair
    s = build_fock(2, 8)
    f, g = np.array([0.3 + 0.2j, 1.0]), np.array([-0.5j, 0.7])
    c = b_operator(s, f, p).commutator(b_operator(s, g, p).H).dense()
    idx = s.sector(6)
    np.testing.assert_allclose(c[np.ix_(idx, idx)], np.vdot(f, g) * np.eye(idx.size), atol=1e-12)


def test_commutator_free_field():
    m = PairModel(np.diag([1.0, 2.0]))
    r = diagonalize(m)
    c = commutator_check(build_fock(2, 6), m, r.pair, np.array([1.0, 1j]), r.S)
    assert c.res_annih <= 1e-13 and c.res_creat <= 1e-13


def test_commutator_single_mode():
    m = single()
    r = diagonalize(m)
    c = commutator_check(build_fock(1, 12), m, r.pair, np.ones(1), r.S)
    assert c.res_annih <= 1e-10 and c.res_creat <= 1e-10


def test_commutator_random_dim4():
    m = random_pair_model(np.random.default_rng(11), 4, 3)
    r = diagonalize(m)
    f = np.array([1.0, 0.5j, -0.3, 0.2 + 0.1j])
    c = commutator_check(build_fock(4, 8), m, r.pair, f, r.S)
    assert c.res_annih <= 1e-9 and c.res_creat <= 1e-9


def test_commutator_needs_room():
    m = single()
    r = diagonalize(m)
    with pytest.raises(SectorTooSmall):
        commutator_check(build_fock(1, 2), m, r.pair, np.ones(1), r.S)


# inequality suite


def test_phi_squared_on_vacuum():
    s = build_fock(1, 3)
    v = s.vacuum()
    lhs = 0.5 * np.linalg.norm(field_product(s, np.ones(1), np.ones(1)).matrix @ v)
    assert lhs == pytest.approx(np.sqrt(3) / 4)
    assert lhs <= 1.0


def test_identity_on_vacuum():
    s = build_fock(1, 3)
    v = s.vacuum()
    dG = second_quantize(s, np.eye(1)).dense()
    phi = segal_field(s, np.ones(1)).dense()
    p2 = field_product(s, np.ones(1), np.ones(1)).dense()
    phi_v = phi @ v
    val = -2 * np.vdot(dG @ v, p2 @ v).real + 2 * np.vdot(phi_v, dG @ phi_v).real - 1.0
    assert val == pytest.approx(0.0, abs=1e-15)


def test_inequality_suite_single_mode():
    rep = inequality_suite(build_fock(1, 20), single(), samples=1000, seed=42)
    assert rep.total_violations == 0
    assert rep.max_identity_residual <= 1e-9
    assert rep.checks["phi2"] == 1000 and rep.checks["key"] == 3000


def test_inequality_suite_negative_coupling_and_two_modes():
    for m, d in ((single(-0.5), 1), (two_mode(), 2)):
        rep = inequality_suite(build_fock(d, 10), m, samples=500, seed=7)
        assert rep.total_violations == 0
        assert rep.max_identity_residual <= 1e-9


def test_inequality_suite_is_seeded():
    a = inequality_suite(build_fock(2, 6), two_mode(), samples=50, seed=3)
    b = inequality_suite(build_fock(2, 6), two_mode(), samples=50, seed=3)
    assert a.max_identity_residual == b.max_identity_residual


def test_inequality_suite_needs_room():
    with pytest.raises(SectorTooSmall):
        inequality_suite(build_fock(1, 1), single())


def test_random_safe_states_support():
    s = build_fock(2, 6)
    psi = random_safe_states(s, 20, 4, np.random.default_rng(0))
    np.testing.assert_allclose(np.linalg.norm(psi, axis=0), 1.0)
    assert np.all(psi[s.quanta > 4] == 0)


def test_weyl_relation():
    assert weyl_check(20, 0.3, 0.4j) <= 1e-6


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), dim=st.integers(1, 3), n=st.integers(0, 3))
def test_commutators_on_random_models(seed, dim, n):
    rng = np.random.default_rng(seed)
    m = random_pair_model(rng, dim, n)
    r = diagonalize(m)
    f = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    c = commutator_check(build_fock(dim, 7), m, r.pair, f, r.S)
    assert c.res_annih <= 1e-9 and c.res_creat <= 1e-9
