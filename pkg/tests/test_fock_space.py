import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import special, stats

from photonwave import field_synthesis as fs
from photonwave import fock_space as fk
from photonwave import momentum_space as ms
from photonwave.constants import NATURAL, SI


@pytest.fixture(scope="module")
def grid8():
    return ms.MomentumGrid.cartesian_box(8, 3.0)


@pytest.fixture(scope="module")
def three_modes(grid8):
    return fk.ModeSet.from_grid(grid8, [100, 200, 300], [1, 1, -1])


def _normalized_amps(modes, raw):
    raw = np.asarray(raw, complex)
    return raw / math.sqrt(np.sum(modes.weights * np.abs(raw) ** 2))


# ------------------------------------------------------------------ basis


@pytest.mark.parametrize("m, n", [(1, 5), (2, 4), (3, 3)])
def test_basis_dimension_and_index(m, n):
    b = fk.FockBasis(m, n)
    assert len(b) == special.comb(m + n, n, exact=True)
    for i, occ in enumerate(b.tuples):
        assert b.index[tuple(occ)] == i
    assert b.tuples[0].sum() == 0


def test_lowering_matrix_elements():
    b = fk.FockBasis(2, 3)
    low = b.lowering[1].toarray()
    assert low[b.index[(1, 1)], b.index[(1, 2)]] == pytest.approx(math.sqrt(2))
    assert np.allclose(b.raising[1].toarray(), low.T)


@pytest.mark.parametrize(
    "args, msg",
    [
        (([[0, 0, 1]], [2], [1.0]), "helicities"),
        (([[0, 0, 1]], [1], [-1.0]), "weights"),
        (([[0, 0, 0]], [1], [1.0]), "k = 0"),
        (([[0, 0, 1], [0, 0, 1]], [1, 1], [1.0, 1.0]), "distinct"),
    ],
)
def test_mode_set_validation(args, msg):
    with pytest.raises(ValueError, match=msg):
        fk.ModeSet(*args)


# ----------------------------------------------------------- commutators


def test_diagonal_commutator_is_kappa(three_modes):
    for i in range(3):
        c = fk.commutator_check(three_modes, i, i)
        assert c.real > 0 and c.imag == 0
        assert c.real == pytest.approx(three_modes.kappa[i], rel=1e-13)


def test_off_diagonal_commutator_vanishes_exactly(three_modes):
    assert fk.commutator_check(three_modes, 0, 2) == 0
    assert fk.commutator_check(three_modes, 1, 0) == 0


def test_commutator_index_out_of_range(three_modes):
    with pytest.raises(IndexError):
        fk.commutator_check(three_modes, 0, 5)


def test_smeared_commutator_is_state_norm(grid8):
    f = ms.make_gaussian_state(grid8, (1.0, 0.5, 0.5), 0.6, (1.0, 0.0))
    nodes = np.nonzero(np.abs(f.f_plus) > 1e-4 * np.abs(f.f_plus).max())[0]
    modes = fk.ModeSet.from_grid(grid8, nodes, np.ones(len(nodes), int))
    amps = modes.restrict(f)
    A = fk.smeared_creation(modes, 1, amps)
    a = A.getH()
    C = (a @ A - A @ a).toarray()
    assert C[0, 0].real == pytest.approx(1.0, abs=1e-6)
    assert C[0, 0].real == pytest.approx(np.sum(modes.weights * np.abs(amps) ** 2), rel=1e-13)


# --------------------------------------------------------- photon states


def test_one_mode_photon_is_number_state(three_modes):
    amps = _normalized_amps(three_modes, [0, 1, 0])
    s = fk.create_photon(amps, three_modes)
    assert s.as_dict(1e-15).keys() == {(0, 1, 0)}
    assert s.norm() == pytest.approx(1.0, abs=1e-14)
    assert fk.number_expectation(s) == pytest.approx(1.0)


def test_photon_overlap_equals_wavefunction_overlap(grid8, three_modes, rng):
    u = _normalized_amps(three_modes, rng.normal(size=3) + 1j * rng.normal(size=3))
    v = _normalized_amps(three_modes, rng.normal(size=3) + 1j * rng.normal(size=3))
    su, sv = fk.create_photon(u, three_modes), fk.create_photon(v, three_modes)
    ref = np.sum(three_modes.weights * np.conj(u) * v)
    assert su.inner(sv) == pytest.approx(ref, abs=1e-14)


def test_create_photon_from_grid_state(grid8):
    f = ms.make_gaussian_state(grid8, (1.0, 0.5, 0.5), 0.6, (0.6, 0.8))
    g = ms.make_gaussian_state(grid8, (0.5, 1.0, 0.0), 0.7, (0.8, -0.6j))
    nodes = np.arange(grid8.size)
    modes = fk.ModeSet.from_grid(grid8, np.concatenate([nodes, nodes]), np.r_[np.ones(512), -np.ones(512)].astype(int))
    sf, sg = fk.create_photon(f, modes), fk.create_photon(g, modes)
    assert sf.inner(sg) == pytest.approx(ms.inner_product(f, g), abs=1e-13)


def test_unnormalized_wavefunction_is_rejected(three_modes):
    with pytest.raises(ValueError, match="not normalized"):
        fk.create_photon([1.0, 1.0, 1.0], three_modes)


def test_n_photon_state_norm_and_number(three_modes):
    amps = _normalized_amps(three_modes, [0.3, 1.0j, -0.5])
    for n in range(4):
        s = fk.n_photon_state(amps, three_modes, n, 4)
        assert s.norm() == pytest.approx(1.0, rel=1e-13)
        assert fk.number_expectation(s) == pytest.approx(n, rel=1e-13)


# ------------------------------------------------------------- symmetrize


def test_symmetric_input_is_unchanged(three_modes, rng):
    a = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    sym = fk.NPhotonWavefunction(three_modes, a + a.T)
    assert np.allclose(fk.symmetrize(sym).amplitudes, sym.amplitudes, rtol=1e-15)


def test_antisymmetric_pair_is_annihilated(three_modes, rng):
    a = rng.normal(size=(3, 3))
    out = fk.symmetrize(fk.NPhotonWavefunction(three_modes, a - a.T))
    assert not np.any(out.amplitudes)


def test_three_photon_symmetrization_is_permutation_invariant(three_modes, rng):
    raw = fk.NPhotonWavefunction(three_modes, rng.normal(size=(3, 3, 3)) + 1j * rng.normal(size=(3, 3, 3)))
    out = fk.symmetrize(raw)
    for p in itertools.permutations(range(3)):
        assert np.allclose(np.transpose(out.amplitudes, p), out.amplitudes, rtol=0, atol=1e-15)
    assert out.is_symmetric(1e-15)
    twice = fk.symmetrize(out)
    assert np.allclose(twice.amplitudes, out.amplitudes, atol=1e-15)


def test_product_wavefunction_maps_to_n_photon_state(three_modes):
    amps = _normalized_amps(three_modes, [0.3, 1.0j, -0.5])
    psi = fk.NPhotonWavefunction(three_modes, np.einsum("i,j->ij", amps, amps))
    a = psi.to_fock(2)
    b = fk.n_photon_state(amps, three_modes, 2, 2)
    assert np.allclose(a.amplitudes, b.amplitudes, atol=1e-14)


# ---------------------------------------------------------- field operator


@pytest.fixture(scope="module")
def example():
    return fk.two_mode_example()


def test_vacuum_field_vanishes(example):
    f, modes = example
    vac = fk.FockState.vacuum(modes, 3)
    assert not np.any(fk.field_operator_element(vac, vac, [1e-7, 0, 0], 1e-15))


@pytest.mark.parametrize("n", [0, 1, 2, 3])
def test_number_state_field_vanishes(example, n):
    f, modes = example
    s = fk.n_photon_state(f, modes, n, 4)
    assert np.max(np.abs(fk.field_operator_element(s, s, [3e-7, -1e-7, 2e-7], 2e-15))) == 0


def test_one_photon_matrix_element_is_positive_frequency_field(example):
    f, modes = example
    vac = fk.FockState.vacuum(modes, 1)
    one = fk.create_photon(f, modes)
    r, t = np.array([2e-7, -4e-7, 1e-7]), 3e-15
    el = fk.field_operator_element(vac, one, r, t, SI)
    plus_only = ms.PhotonWavefunctionK(f.grid, f.f_plus, np.zeros(f.grid.size))
    ref = math.sqrt(SI.hbar * SI.c) * fs.field_at(plus_only, r[None], t, constants=SI)[0]
    assert np.allclose(el, ref, rtol=1e-12, atol=0)


def test_field_operator_hermitian_part_gives_real_expectation(example):
    f, modes = example
    cs = fk.coherent_state(f, modes, 2.0)
    r, t = np.array([1e-7, 0, 0]), 0.0
    F = fk.field_operator_element(cs, cs, r, t, SI)
    Fd = np.conj(fk.field_operator_element(cs, cs, r, t, SI))
    assert np.allclose(0.5 * (F + Fd).imag, 0)


# ------------------------------------------------------------ observables


def test_vacuum_energy_is_zero(example):
    _, modes = example
    vac = fk.FockState.vacuum(modes, 2)
    assert fk.hamiltonian_expectation(vac) == 0
    assert fk.number_expectation(vac) == 0


def test_single_mode_photon_energy(example):
    f, modes = example
    amps = np.array([1 / math.sqrt(modes.weights[0]), 0])
    s = fk.create_photon(amps, modes)
    assert fk.hamiltonian_expectation(s, SI) == pytest.approx(SI.hbar * SI.c * modes.kmag[0], rel=1e-14)


def test_free_evolution_phases(example):
    f, modes = example
    s = fk.create_photon(f, modes, 2)
    t = 1.3e-15
    e = fk.free_evolution(s, t, SI)
    w = modes.omega(SI)
    d = s.as_dict(1e-15)
    de = e.as_dict(1e-15)
    for occ, a in d.items():
        assert de[occ] == pytest.approx(a * np.exp(-1j * np.dot(occ, w) * t), rel=1e-12)


# --------------------------------------------------------------- coherent


@given(st.floats(0.01, 20.0), st.sampled_from([1e-6, 1e-8, 1e-10]))
def test_poisson_cutoff_is_minimal(n_avg, eps):
    n = fk.poisson_cutoff(n_avg, eps)
    assert stats.poisson.sf(n, n_avg) < eps
    assert n == 0 or stats.poisson.sf(n - 1, n_avg) >= eps


def test_zero_mean_coherent_state_is_vacuum(example):
    f, modes = example
    cs = fk.coherent_state(f, modes, 0.0)
    assert cs.as_dict(0.0) == {(0, 0): 1.0}
    assert not np.any(fk.field_operator_element(cs, cs, [0, 0, 0]))


def test_single_mode_coherent_amplitude_ratio(three_modes):
    amps = _normalized_amps(three_modes, [1, 0, 0])
    cs = fk.coherent_state(amps, three_modes, 1.0)
    c1, c2 = cs.as_dict()[(1, 0, 0)], cs.as_dict()[(2, 0, 0)]
    assert abs(c2 / c1) == pytest.approx(1 / math.sqrt(2), rel=1e-14)


@pytest.mark.parametrize("n_avg", [0.5, 1.0, 4.0])
def test_coherent_state_statistics(example, n_avg):
    f, modes = example
    eps = 1e-8
    cs = fk.coherent_state(f, modes, n_avg, eps=eps)
    tail = stats.poisson.sf(cs.n_max, n_avg)
    assert tail < eps
    assert cs.norm() ** 2 == pytest.approx(1 - tail, abs=1e-14)
    dist = fk.number_distribution(cs)
    assert np.allclose(dist, stats.poisson.pmf(np.arange(cs.n_max + 1), n_avg), rtol=1e-12, atol=1e-300)
    assert fk.number_expectation(cs) == pytest.approx(n_avg, abs=n_avg * 10 * eps + 1e-12)


def test_coherent_state_mean_field(example, rng):
    f, modes = example
    n_avg = 2.0
    cs = fk.coherent_state(f, modes, n_avg, eps=1e-10)
    for _ in range(5):
        r, t = rng.uniform(-1e-6, 1e-6, 3), rng.uniform(0, 1e-14)
        q = fk.field_operator_element(cs, cs, r, t, SI)
        c = math.sqrt(n_avg * SI.hbar * SI.c) * fs.field_at(f, r[None], t, constants=SI)[0]
        assert np.linalg.norm(q - c) < 1e-8 * np.linalg.norm(c)


def test_explicit_cutoff_with_large_tail_is_rejected(example):
    f, modes = example
    with pytest.raises(ValueError, match="use N_max >= "):
        fk.coherent_state(f, modes, 4.0, n_max=5, eps=1e-8)
