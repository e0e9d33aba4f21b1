import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import optimize

from photonwave import thermal_radiometry as th
from photonwave.constants import SI

nus = st.floats(1e9, 1e15)
temps = st.floats(1.0, 1e4)


def _nu_for_x(x, T):
    return x * SI.k_B * T / SI.h


# ----------------------------------------------------------- Boltzmann


def test_equal_levels_are_uniform():
    assert np.allclose(th.boltzmann_probabilities([2.0, 2.0, 2.0, 2.0], 300.0), 0.25)


def test_two_levels_split_by_kT_ln2():
    T = 500.0
    p = th.boltzmann_probabilities([0.0, SI.k_B * T * math.log(2)], T)
    assert np.allclose(p, [2 / 3, 1 / 3], rtol=1e-14)


def test_empty_level_list_is_rejected():
    with pytest.raises(ValueError, match="empty"):
        th.boltzmann_probabilities([], 1.0)


def test_density_matrix_diagonal_is_boltzmann():
    nu, T = 2e13, 300.0
    rho = th.thermal_density_matrix(nu, T, 40)
    E = SI.h * nu * np.arange(41)
    assert np.allclose(np.diag(rho.matrix()), th.boltzmann_probabilities(E, T), rtol=1e-12)
    assert rho.trace() == pytest.approx(1.0, abs=1e-15)


# --------------------------------------------------------- density matrix


def test_cold_mode_sits_in_vacuum():
    T = 10.0
    rho = th.thermal_density_matrix(_nu_for_x(60.0, T), T, 1)
    assert rho.weights[0] == pytest.approx(1.0, abs=1e-25)


def test_successive_weights_are_geometric():
    T, x = 300.0, 0.7
    w = th.thermal_density_matrix(_nu_for_x(x, T), T, 60).weights
    assert np.allclose(w[1:] / w[:-1], math.exp(-x), rtol=1e-13)


def test_density_matrix_mean_matches_closed_form():
    T, x = 300.0, 0.9
    nu = _nu_for_x(x, T)
    rho = th.thermal_density_matrix(nu, T, 60)
    assert rho.mean_occupation() == pytest.approx(th.average_occupation(nu, T), rel=1e-10)


def test_insufficient_cutoff_is_rejected():
    with pytest.raises(ValueError, match="use N_max >= "):
        th.thermal_density_matrix(_nu_for_x(0.1, 300.0), 300.0, 10)


# ------------------------------------------------------ mean occupation


def test_occupation_is_one_at_ln2():
    T = 77.0
    nu = _nu_for_x(math.log(2), T)
    assert th.average_occupation(nu, T) == pytest.approx(1.0, rel=1e-14)
    assert th.average_occupation(nu, T, method="recursion") == pytest.approx(1.0, rel=1e-14)


@given(nus, temps)
def test_recursion_and_closed_form_agree(nu, T):
    a = th.average_occupation(nu, T, method="recursion")
    b = th.average_occupation(nu, T)
    if b == 0:
        assert a == 0
    else:
        assert a == pytest.approx(b, rel=1e-14)
        # the recursion fixed point itself
        q = math.exp(-SI.h * nu / (SI.k_B * T))
        assert a == pytest.approx(q * (a + 1), rel=1e-13)


def test_classical_limit_is_equipartition():
    T = 300.0
    for x in (1e-3, 1e-5):
        nu = _nu_for_x(x, T)
        N = th.average_occupation(nu, T)
        assert N * x == pytest.approx(1 - x / 2, rel=x * x)
        assert th.average_energy(nu, T) == pytest.approx(SI.k_B * T, rel=x)


def test_large_argument_does_not_overflow():
    with np.errstate(over="raise"):
        assert th.average_occupation(1e16, 1.0, method="recursion") == 0.0
        assert 0 <= th.average_occupation(1e16, 1.0) < 1e-300


def test_trace_oracle_matches_closed_form():
    for x in (0.05, 0.5, 3.0):
        nu = _nu_for_x(x, 300.0)
        assert th.average_occupation_trace(nu, 300.0) == pytest.approx(th.average_occupation(nu, 300.0), rel=1e-12)


def test_unknown_method_and_bad_inputs():
    with pytest.raises(ValueError):
        th.average_occupation(1e12, 300.0, method="magic")
    with pytest.raises(ValueError):
        th.average_occupation(-1.0, 300.0)
    with pytest.raises(ValueError):
        th.planck_density(1e12, 0.0)


# --------------------------------------------------------------- spectra


def test_series_truncation_error_is_geometric_tail():
    # N terms of sum_n e^{-n x} miss exactly a fraction e^{-N x}
    T = 300.0
    nu = _nu_for_x(1.0, T)
    exact = th.planck_density(nu, T)
    for n in (1, 3, 6, 10):
        err = 1 - th.planck_series(nu, T, n) / exact
        assert err == pytest.approx(math.exp(-n), rel=1e-10)


def test_fifty_term_series_converges():
    # e^{-50} ~ 2e-22 is below float64 resolution, so 50 terms must agree to roundoff
    T = 300.0
    nu = _nu_for_x(1.0, T)
    s = th.planck_series(nu, T, 50)
    assert abs(s / th.planck_density(nu, T) - 1) <= max(math.exp(-50), 4 * np.finfo(float).eps)


def test_rayleigh_jeans_limit():
    T = 300.0
    for x in (1e-2, 1e-3):
        nu = _nu_for_x(x, T)
        ratio = th.planck_density(nu, T) / th.rayleigh_jeans(nu, T)
        assert abs(ratio - 1) < x
        assert ratio == pytest.approx(1 - x / 2, abs=x * x / 10)


@given(nus, temps)
def test_energy_over_number_density_is_photon_energy(nu, T):
    n = th.planck_number_density(nu, T)
    if n > 1e-300:
        assert th.planck_density(nu, T) / n == pytest.approx(SI.h * nu, rel=1e-14)


# ----------------------------------------------------------- peak and totals


def test_wien_coefficient_root():
    x = th.wien_coefficient()
    assert x == pytest.approx(2.8214393721, abs=1e-10)
    assert 3 * (1 - math.exp(-x)) == pytest.approx(x, rel=1e-15)
    # independent bisection on the derivative of x^3/(e^x - 1)
    bis = optimize.bisect(lambda y: 3 * (1 - math.exp(-y)) - y, 1.0, 5.0, xtol=1e-14)
    assert x == pytest.approx(bis, abs=1e-12)
    assert round(x, 2) == 2.82


def test_cmb_peak_frequency():
    nu, coeff = th.peak_frequency(th.CMB_TEMPERATURE)
    assert nu == pytest.approx(158.8e9, rel=1e-3)
    assert abs(nu / 159e9 - 1) < 0.01


@given(temps)
def test_peak_frequency_is_linear_in_temperature(T):
    a, _ = th.peak_frequency(T)
    b, _ = th.peak_frequency(2 * T)
    assert b == pytest.approx(2 * a, rel=1e-12)


def test_peak_is_a_maximum_of_spectrum():
    T = 5778.0
    nu, _ = th.peak_frequency(T)
    assert th.planck_density(nu, T) > th.planck_density(nu * 1.001, T)
    assert th.planck_density(nu, T) > th.planck_density(nu * 0.999, T)


@pytest.mark.parametrize("T", [2.7, 300.0, 5778.0])
def test_quadrature_totals_match_closed_forms(T):
    assert th.total_energy_density(T) == pytest.approx(th.total_energy_density_closed(T), rel=1e-8)
    assert th.total_photon_density(T) == pytest.approx(th.total_photon_density_closed(T), rel=1e-8)


def test_cmb_photon_density():
    n = th.total_photon_density(th.CMB_TEMPERATURE)
    assert n == pytest.approx(4.0e8, rel=0.01)
    assert abs(n * 1e-6 / 400 - 1) < 0.01


def test_solar_to_cmb_density_ratio():
    r = th.total_photon_density(th.SOLAR_TEMPERATURE) / th.total_photon_density(th.CMB_TEMPERATURE)
    assert r == pytest.approx((5778 / 2.7) ** 3, rel=1e-8)
    assert abs(r / 9.8e9 - 1) < 0.02


def test_zeta3():
    assert th.zeta3() == pytest.approx(1.2020569031595942, abs=1e-12)
    assert round(th.zeta3(), 3) == 1.202


# --------------------------------------------------------------- photons


def test_photon_energy_at_one_metre():
    assert th.photon_energy(1.0) == pytest.approx(1.986e-25, rel=5e-4)
    assert th.photon_energy(1.0) == pytest.approx(1.98645e-25, rel=1e-5)


def test_photon_energy_at_500nm():
    assert th.photon_energy(500e-9) == pytest.approx(3.97e-19, rel=1e-3)


@given(st.floats(1e-12, 1e3))
def test_energy_times_wavelength_is_constant(lam):
    assert th.photon_energy(lam) * lam == pytest.approx(SI.h * SI.c, rel=1e-14)


def test_summary_fields():
    s = th.summary(2.7)
    assert s["energy_density_rel_delta"] < 1e-8
    assert s["photon_density_rel_delta"] < 1e-8
    assert s["photon_density_per_cm3"] == pytest.approx(s["photon_density_per_m3"] * 1e-6)
    rows = th.spectrum_table(2.7, n_points=50)
    assert rows.shape == (50, 3)
    assert np.allclose(rows[:, 1] / rows[:, 2], SI.h * rows[:, 0], rtol=1e-13)
