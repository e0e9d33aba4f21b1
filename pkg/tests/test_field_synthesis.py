import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from photonwave import field_synthesis as fs
from photonwave import momentum_space as ms
from photonwave import poincare as pc
from photonwave.constants import NATURAL, SI

coord = st.floats(-5, 5, allow_nan=False)
nonzero_k = st.tuples(coord, coord, coord).filter(lambda v: np.linalg.norm(v) > 1e-3)


@pytest.fixture(scope="module")
def kg16():
    return ms.MomentumGrid.cartesian_box(16, 5.0)


@pytest.fixture(scope="module")
def sg16(kg16):
    return fs.SpatialGrid.paired_with(kg16)


@pytest.fixture(scope="module")
def packet(kg16):
    return ms.make_gaussian_state(kg16, (1.0, 0.5, 1.0), 0.7, (0.8, 0.6j))


def _mode(grid, node, fp=1.0, fm=0.0):
    a = np.zeros(grid.size, complex)
    b = np.zeros(grid.size, complex)
    a[node], b[node] = fp, fm
    return ms.PhotonWavefunctionK(grid, a, b)


# ------------------------------------------------------------ polarization


def test_polarization_along_z_is_exact():
    e = fs.polarization_vector([0, 0, 3.0]).e
    assert np.array_equal(e, np.array([1, 1j, 0]) / math.sqrt(2))


def test_polarization_along_x_is_rotated_z_vector():
    # rotation about y taking z to x sends (1, i, 0) to (0, i, -1)
    e = fs.polarization_vector([2.0, 0, 0]).e
    assert np.allclose(e, np.array([0, 1j, -1]) / math.sqrt(2), atol=1e-16)


@given(nonzero_k)
def test_polarization_solves_eigen_equation(k):
    k = np.array(k)
    e = fs.polarization_vector(k).e
    assert np.linalg.norm(1j * np.cross(k, e) - np.linalg.norm(k) * e) < 1e-12 * max(1.0, np.linalg.norm(k))
    assert abs(np.vdot(e, e) - 1) < 1e-14
    assert abs(np.dot(k, e)) < 1e-12 * np.linalg.norm(k)


def test_polarization_connection_is_alpha():
    # e^* . d_i e = -i alpha_i
    k = np.array([[0.8, -0.5, 1.1], [-1.2, 0.3, -0.7]])
    h = 1e-6
    alpha, _ = pc.connection(k)
    for i in range(3):
        d = np.zeros(3)
        d[i] = h
        de = (fs.polarization_vectors(k + d) - fs.polarization_vectors(k - d)) / (2 * h)
        lhs = np.sum(np.conj(fs.polarization_vectors(k)) * de, axis=-1)
        assert np.allclose(lhs, -1j * alpha[:, i], atol=1e-9)


def test_polarization_undefined_at_origin():
    with pytest.raises(ValueError, match="k = 0"):
        fs.polarization_vector([0, 0, 0])


# --------------------------------------------------------------- synthesis


def test_zero_state_gives_zero_field(kg16, sg16):
    F = fs.synthesize(ms.PhotonWavefunctionK.zeros(kg16), sg16)
    assert not np.any(F.F)


def test_fft_synthesis_matches_direct_sum(packet, sg16):
    F = fs.synthesize(packet, sg16, t=0.3, constants=NATURAL)
    pts = sg16.positions()[::5, ::3, ::4]
    direct = fs.field_at(packet, pts, 0.3, constants=NATURAL)
    assert np.max(np.abs(F.F[::5, ::3, ::4] - direct)) < 1e-12 * np.max(np.abs(direct))


def test_unpaired_grid_falls_back_to_direct_sum(packet):
    grid = fs.SpatialGrid((-1, -1, -1), (0.3, 0.3, 0.3), (4, 5, 6))
    F = fs.synthesize(packet, grid, constants=NATURAL)
    assert np.allclose(F.F, fs.field_at(packet, grid.positions(), constants=NATURAL))
    with pytest.raises(ValueError, match="fallback"):
        fs.synthesize(packet, grid, fallback=False)


def test_single_mode_is_circular_plane_wave(kg16, sg16):
    node = 16 * 16 * 10 + 16 * 8 + 12
    f = _mode(kg16, node)
    k = kg16.nodes[node]
    t = 0.4
    F = fs.synthesize(f, sg16, t=t, constants=NATURAL)
    r = sg16.positions()
    amp = kg16.volume_weights[node] / (2 * math.pi) ** 1.5
    expected = amp * fs.polarization_vectors(k) * np.exp(1j * (r @ k - np.linalg.norm(k) * t))[..., None]
    assert np.max(np.abs(F.F - expected)) < 1e-13 * amp
    # the electric field of the mode is the Re[...] plane-wave form
    E = math.sqrt(2 / NATURAL.epsilon_0) * F.F.real
    ref = fs.plane_wave_electric_field(k, 1.0, 0.0, r[2, 3, 4], [t], NATURAL)[0]
    assert np.allclose(E[2, 3, 4], math.sqrt(2 / NATURAL.epsilon_0) * amp * ref, atol=1e-14)


def test_synthesized_fields_are_transverse(packet, sg16):
    assert fs.divergence_residual(fs.synthesize(packet, sg16, constants=NATURAL)) < 1e-12


def test_parseval_energy(packet, sg16):
    F = fs.synthesize(packet, sg16, quantum_scale=True, constants=SI)
    H = pc.expectation(packet, pc.apply_energy(packet, SI)).real
    assert fs.field_energy(F) == pytest.approx(H, rel=1e-12)


def test_quantum_scale_factor(packet, sg16):
    a = fs.synthesize(packet, sg16, constants=SI).F
    b = fs.synthesize(packet, sg16, quantum_scale=True, constants=SI).F
    assert np.allclose(b, math.sqrt(SI.hbar * SI.c) * a, rtol=1e-15)


# ------------------------------------------------------------- E and B


def test_real_field_has_no_magnetic_part(sg16, rng):
    F = fs.RSField(sg16, rng.normal(size=sg16.shape + (3,)))
    E, B = fs.split_fields(F)
    assert not np.any(B)
    F = fs.RSField(sg16, 1j * rng.normal(size=sg16.shape + (3,)))
    E, B = fs.split_fields(F)
    assert not np.any(E)


def test_field_round_trip_and_energy_forms(sg16, rng):
    F = fs.RSField(sg16, rng.normal(size=sg16.shape + (3,)) + 1j * rng.normal(size=sg16.shape + (3,)))
    E, B = fs.split_fields(F, SI)
    G = fs.from_fields(sg16, E, B, constants=SI)
    assert np.max(np.abs(G.F - F.F)) < 1e-14 * np.max(np.abs(F.F))
    assert fs.field_energy_EB(E, B, sg16, SI) == pytest.approx(fs.field_energy(F), rel=1e-12)


def test_zero_field_has_zero_energy_and_momentum(sg16):
    F = fs.RSField(sg16, np.zeros(sg16.shape + (3,)))
    assert fs.field_energy(F) == 0
    assert not np.any(fs.field_momentum(F))


def test_plane_wave_energy_equals_momentum_magnitude(kg16, sg16):
    F = fs.synthesize(_mode(kg16, 1234), sg16, constants=NATURAL)
    P, resid = fs.field_momentum(F, with_residual=True)
    assert fs.field_energy(F) == pytest.approx(np.linalg.norm(P), rel=1e-12)
    assert resid < 1e-14 * fs.field_energy(F)
    assert np.allclose(P / np.linalg.norm(P), kg16.nodes[1234] / kg16.kmag[1234])


# --------------------------------------------------------------- evolution


def test_evolve_zero_step_is_identity(packet, sg16):
    F = fs.synthesize(packet, sg16, constants=NATURAL)
    G = fs.evolve(F, 0.0, constants=NATURAL)
    assert np.max(np.abs(G.F - F.F)) < 1e-15 * np.max(np.abs(F.F)) * 10


def test_monochromatic_wave_picks_up_global_phase(kg16, sg16):
    f = _mode(kg16, 777)
    F = fs.synthesize(f, sg16, constants=NATURAL)
    dt = 0.13
    G = fs.evolve(F, dt, steps=7, constants=NATURAL)
    w = kg16.kmag[777]
    assert np.max(np.abs(G.F - F.F * np.exp(-1j * w * 7 * dt))) < 1e-13 * np.max(np.abs(F.F))
    assert G.t == pytest.approx(7 * dt)


def test_evolution_matches_synthesis_at_later_time(packet, sg16):
    F = fs.synthesize(packet, sg16, constants=NATURAL)
    G = fs.evolve(F, 0.25, steps=4, constants=NATURAL)
    ref = fs.synthesize(packet, sg16, t=1.0, constants=NATURAL)
    assert np.max(np.abs(G.F - ref.F)) < 1e-12 * np.max(np.abs(ref.F))


def test_evolution_conserves_energy_and_momentum(packet, sg16):
    F = fs.synthesize(packet, sg16, constants=NATURAL)
    G = fs.evolve(F, 0.05, steps=200, constants=NATURAL)
    assert fs.field_energy(G) == pytest.approx(fs.field_energy(F), rel=1e-12)
    assert np.allclose(fs.field_momentum(G), fs.field_momentum(F), rtol=1e-11)


def test_evolve_requires_periodic_grid(packet):
    grid = fs.SpatialGrid.paired_with(packet.grid)
    closed = fs.SpatialGrid(grid.origin, grid.spacing, grid.shape, periodic=False)
    F = fs.RSField(closed, np.zeros(closed.shape + (3,)))
    with pytest.raises(ValueError, match="periodic"):
        fs.evolve(F, 0.1)


# ---------------------------------------------------------- helicity split


def test_single_helicity_input_has_no_minus_part(kg16, sg16):
    f = ms.make_gaussian_state(kg16, (1.0, -1.0, 0.5), 0.8, (1.0, 0.0))
    psi = fs.helicity_split(fs.synthesize(f, sg16, constants=NATURAL))
    assert np.max(np.abs(psi.psi_minus)) < 1e-14 * np.max(np.abs(psi.psi_plus))


def test_helicity_split_recovers_each_branch(packet, kg16, sg16):
    t = 0.6
    psi = fs.helicity_split(fs.synthesize(packet, sg16, t=t, constants=NATURAL))
    plus = ms.PhotonWavefunctionK(kg16, packet.f_plus, np.zeros(kg16.size))
    minus = ms.PhotonWavefunctionK(kg16, np.zeros(kg16.size), packet.f_minus)
    ref_p = fs.synthesize(plus, sg16, t=t, constants=NATURAL).F
    # conj of the negative-frequency part: sum e^* f- e^{i(k.r - w t)}
    ref_m = np.conj(fs.synthesize(minus, sg16, t=t, constants=NATURAL).F)
    scale = np.max(np.abs(ref_p))
    assert np.max(np.abs(psi.psi_plus - ref_p)) < 1e-13 * scale
    assert np.max(np.abs(psi.psi_minus - ref_m)) < 1e-13 * scale


def test_helicity_energies_add_up(packet, sg16):
    F = fs.synthesize(packet, sg16, constants=NATURAL)
    psi = fs.helicity_split(F)
    e = sg16.cell_volume * np.sum(np.abs(psi.psi_plus) ** 2 + np.abs(psi.psi_minus) ** 2)
    assert e == pytest.approx(fs.field_energy(F), rel=1e-12)


def test_bloch_zero_grid_leaves_dc_alone(rng):
    grid = fs.SpatialGrid((0, 0, 0), (0.5, 0.5, 0.5), (6, 6, 6), bloch=0.0)
    F = fs.RSField(grid, np.ones(grid.shape + (3,), complex))
    psi = fs.helicity_split(F)
    assert np.max(np.abs(psi.psi_plus)) < 1e-14 and np.max(np.abs(psi.psi_minus)) < 1e-14
    assert np.allclose(fs.evolve(F, 1.0).F, F.F)


# ------------------------------------------------------------ nonlocal norm


def test_single_photon_nonlocal_norm_is_one(packet, sg16):
    psi = fs.helicity_split(fs.synthesize(packet, sg16, constants=NATURAL))
    assert fs.nonlocal_norm(psi) == pytest.approx(ms.norm_squared(packet), rel=1e-12)


def test_nonlocal_norm_is_quadratic(packet, sg16):
    psi = fs.helicity_split(fs.synthesize(packet, sg16, constants=NATURAL))
    double = fs.PositionWavefunctions(psi.grid, 2 * psi.psi_plus, 2 * psi.psi_minus)
    assert fs.nonlocal_norm(double) == pytest.approx(4 * fs.nonlocal_norm(psi), rel=1e-14)


def test_zero_field_nonlocal_norm(sg16):
    z = np.zeros(sg16.shape + (3,))
    assert fs.nonlocal_norm(fs.PositionWavefunctions(sg16, z, z)) == 0.0


def test_direct_double_integral_oracle():
    g8 = ms.MomentumGrid.cartesian_box(8, 4.0)
    f = ms.make_gaussian_state(g8, (0.5, 0.0, 0.3), 1.0, (1.0, 0.5))
    psi = fs.helicity_split(fs.synthesize(f, fs.SpatialGrid.paired_with(g8), constants=NATURAL))
    assert fs.nonlocal_norm_direct(psi) == pytest.approx(fs.nonlocal_norm(psi), rel=0.05)


def test_energy_moment_tracks_translation():
    # box large enough that the packet does not wrap
    kg = ms.MomentumGrid.cartesian_box(32, 4.0)
    sg = fs.SpatialGrid.paired_with(kg)
    f = ms.make_gaussian_state(kg, (1.5, 0.5, 1.0), 0.6, (1.0, 0.0))
    r0 = np.array([0.6, -0.4, 0.3])
    m0 = fs.position_energy_moment(fs.helicity_split(fs.synthesize(f, sg, constants=NATURAL)))
    h = ms.translate(f, 0.0, r0, NATURAL)
    m1 = fs.position_energy_moment(fs.helicity_split(fs.synthesize(h, sg, constants=NATURAL)))
    E = pc.expectation(f, pc.apply_energy(f, NATURAL)).real
    # energy density has algebraic tails, so the box truncates the moment at ~1e-5
    assert np.allclose((m1 - m0) / E, -r0, atol=1e-4)


# ------------------------------------------------------------- ellipses


@given(st.floats(0.05, 2), st.floats(0.05, 2), st.floats(-math.pi, math.pi), st.floats(-math.pi, math.pi))
def test_field_trace_ellipse_matches_stokes(ap, am, dp, dm):
    if abs(ap - am) < 1e-3:
        return  # orientation undefined for circular traces
    k = np.array([0.0, 0.0, 2.0])
    t = np.linspace(0, 2 * math.pi / 2.0, 400, endpoint=False)
    fp, fm = ap * np.exp(1j * dp), am * np.exp(1j * dm)
    E = fs.plane_wave_electric_field(k, fp, fm, np.zeros(3), t, NATURAL)
    traced = fs.ellipse_from_trace(E, k)
    g = ms.MomentumGrid.cartesian(2, 1.0)
    S = ms.stokes_at(ms.PhotonWavefunctionK(g, np.full(8, fp), np.full(8, fm)), 0)
    el = S.ellipse
    assert traced["major"] == pytest.approx(el["major"], rel=1e-10)
    assert traced["minor"] == pytest.approx(el["minor"], abs=1e-10)
    if abs(ap - am) > 0.05:
        d = (traced["orientation"] - el["orientation"] + math.pi / 2) % math.pi - math.pi / 2
        assert abs(d) < 1e-8
