"""Thermal photon states and blackbody radiometry.

Throughout, ``beta = 1 / (k_B T)`` and ``x = beta h nu`` is the dimensionless
photon energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import integrate, optimize, special

from .constants import SI, PhysicalConstants
from .fock_space import FockBasis, ModeSet

__all__ = [
    "CMB_TEMPERATURE",
    "SOLAR_TEMPERATURE",
    "X_CUT",
    "ThermalSpec",
    "ThermalState",
    "boltzmann_probabilities",
    "thermal_density_matrix",
    "average_occupation",
    "average_energy",
    "average_occupation_trace",
    "planck_density",
    "planck_number_density",
    "planck_series",
    "rayleigh_jeans",
    "wien_coefficient",
    "peak_frequency",
    "total_energy_density",
    "total_photon_density",
    "total_energy_density_closed",
    "total_photon_density_closed",
    "zeta3",
    "photon_energy",
    "spectrum_table",
    "summary",
]

CMB_TEMPERATURE = 2.7
SOLAR_TEMPERATURE = 5778.0
X_CUT = 50.0


def _check_T(T):
    if not np.all(np.asarray(T, float) > 0):
        raise ValueError("temperature must be positive")


@dataclass(frozen=True)
class ThermalSpec:
    T: float
    constants: PhysicalConstants = SI

    def __post_init__(self):
        _check_T(self.T)

    @property
    def beta(self) -> float:
        return 1.0 / (self.constants.k_B * self.T)

    def x(self, nu):
        return self.constants.h * np.asarray(nu, float) * self.beta


def _x(nu, T, constants):
    _check_T(T)
    nu = np.asarray(nu, float)
    if np.any(nu <= 0):
        raise ValueError("frequency must be positive")
    return constants.h * nu / (constants.k_B * np.asarray(T, float))


def boltzmann_probabilities(energies: Sequence[float], T: float, constants: PhysicalConstants = SI) -> np.ndarray:
    """``p_n = exp(-beta E_n) / Z``, evaluated relative to the lowest level."""
    E = np.asarray(energies, float).ravel()
    if E.size == 0:
        raise ValueError("energy list is empty")
    _check_T(T)
    logw = -(E - E.min()) / (constants.k_B * T)
    w = np.exp(logw)
    return w / w.sum()


@dataclass(frozen=True, eq=False)
class ThermalState:
    """Single-mode thermal density operator, diagonal in the number basis."""

    nu: float
    T: float
    weights: np.ndarray
    tail: float

    @property
    def n_max(self) -> int:
        return len(self.weights) - 1

    def matrix(self) -> np.ndarray:
        return np.diag(self.weights)

    def trace(self) -> float:
        return float(self.weights.sum())

    def mean_occupation(self) -> float:
        return float(np.arange(len(self.weights)) @ self.weights)


def thermal_density_matrix(
    nu: float, T: float, n_max: int, constants: PhysicalConstants = SI, tail_tol: float = 1e-12
) -> ThermalState:
    """Weights ``exp(-n x)`` for ``n = 0..N_max``, normalized to unit trace.

    The discarded probability ``exp(-(N_max + 1) x)`` must not exceed ``tail_tol``.
    """
    x = float(_x(nu, T, constants))
    tail = math.exp(-(n_max + 1) * x)
    if tail > tail_tol:
        need = math.ceil(-math.log(tail_tol) / x) - 1
        raise ValueError(f"N_max={n_max} leaves thermal tail {tail:.3g} > {tail_tol:g}; use N_max >= {need}")
    w = np.exp(-x * np.arange(n_max + 1))
    return ThermalState(float(nu), float(T), w / w.sum(), tail)


def average_occupation(nu, T, constants: PhysicalConstants = SI, method: str = "closed"):
    """Mean photon number of a mode at ``nu``.

    ``method="recursion"`` solves ``N = q (N + 1)`` with ``q = exp(-x)`` (the
    cyclic-trace identity) as ``q / (1 - q)``; ``"closed"`` is ``1/(e^x - 1)``.
    Both stay finite for large ``x`` by underflowing to ``exp(-x)``.
    """
    x = _x(nu, T, constants)
    if method == "closed":
        # past x ~ 700 expm1 overflows; 1/(e^x - 1) equals e^-x to double precision there
        with np.errstate(over="ignore"):
            return np.where(x > 700.0, np.exp(-np.minimum(x, 1e300)), 1.0 / np.expm1(np.minimum(x, 700.0)))[()]
    if method == "recursion":
        q = np.exp(-x)
        return q / -np.expm1(-x)
    raise ValueError(f"unknown method {method!r}")


def average_energy(nu, T, constants: PhysicalConstants = SI):
    return constants.h * np.asarray(nu, float) * average_occupation(nu, T, constants)


def average_occupation_trace(nu: float, T: float, constants: PhysicalConstants = SI, tail_tol: float = 1e-17) -> float:
    """``Tr(rho b^dag b)`` with explicit truncated single-mode operators."""
    x = float(_x(nu, T, constants))
    n_max = max(1, math.ceil(-math.log(tail_tol) / x))
    k = 2 * math.pi * nu / constants.c
    modes = ModeSet([[0.0, 0.0, k]], [1], [1.0])
    basis = FockBasis(len(modes), n_max)
    b = basis.lowering[0]
    N = (basis.raising[0] @ b).toarray()
    H = constants.h * nu * N
    weights = np.exp(-np.diag(H) / (constants.k_B * T))
    rho = np.diag(weights / weights.sum())
    return float(np.trace(rho @ N))


def planck_density(nu, T, constants: PhysicalConstants = SI):
    """Spectral energy density ``(8 pi h nu^3 / c^3) / (e^x - 1)`` [J s / m^3]."""
    nu = np.asarray(nu, float)
    return 8 * math.pi * constants.h * nu**3 / constants.c**3 * average_occupation(nu, T, constants)


def planck_number_density(nu, T, constants: PhysicalConstants = SI):
    """Spectral photon density ``rho_E / (h nu)`` [s / m^3]."""
    nu = np.asarray(nu, float)
    return 8 * math.pi * nu**2 / constants.c**3 * average_occupation(nu, T, constants)


def planck_series(nu, T, terms: int, constants: PhysicalConstants = SI):
    """Partial sum ``(8 pi h nu^3/c^3) sum_{n=1..terms} e^{-n x}``."""
    x = _x(nu, T, constants)
    n = np.arange(1, terms + 1)
    s = np.sum(np.exp(-np.multiply.outer(x, n)), axis=-1)
    nu = np.asarray(nu, float)
    return 8 * math.pi * constants.h * nu**3 / constants.c**3 * s


def rayleigh_jeans(nu, T, constants: PhysicalConstants = SI):
    nu = np.asarray(nu, float)
    return 8 * math.pi * nu**2 * constants.k_B * np.asarray(T, float) / constants.c**3


def wien_coefficient() -> float:
    """Root of ``3 (1 - e^{-x}) = x``, i.e. the stationary point of ``x^3/(e^x - 1)``."""
    return optimize.brentq(lambda x: 3.0 * -math.expm1(-x) - x, 1.0, 5.0, xtol=1e-15, rtol=1e-15)


def peak_frequency(T, constants: PhysicalConstants = SI):
    """``(nu_max, coefficient)`` with ``nu_max = coefficient k_B T / h``."""
    _check_T(T)
    x = wien_coefficient()
    return x * constants.k_B * np.asarray(T, float) / constants.h, x


def _bose_integral(power: int) -> float:
    """``int_0^inf x^p / (e^x - 1) dx`` as quadrature on ``(0, X_CUT]`` plus the exact tail."""
    head, _ = integrate.quad(
        lambda x: x**power / math.expm1(x) if x > 0 else 0.0, 0.0, X_CUT, epsabs=0, epsrel=1e-13, limit=200
    )
    # x^p/(e^x - 1) = sum_n x^p e^{-nx};  int_X^inf x^p e^{-nx} = Gamma(p+1, nX) / n^(p+1)
    g = math.gamma(power + 1)
    tail = 0.0
    for n in range(1, 50):
        term = g * special.gammaincc(power + 1, n * X_CUT) / n ** (power + 1)
        tail += term
        if term < 1e-30 * head:
            break
    return head + tail


def total_energy_density(T, constants: PhysicalConstants = SI):
    """``int rho_E d nu`` by quadrature [J / m^3]."""
    _check_T(T)
    kT = constants.k_B * np.asarray(T, float)
    return 8 * math.pi * kT**4 / (constants.h * constants.c) ** 3 * _bose_integral(3)


def total_photon_density(T, constants: PhysicalConstants = SI):
    """``int rho_N d nu`` by quadrature [1 / m^3]."""
    _check_T(T)
    kT = constants.k_B * np.asarray(T, float)
    return 8 * math.pi * (kT / (constants.h * constants.c)) ** 3 * _bose_integral(2)


def total_energy_density_closed(T, constants: PhysicalConstants = SI):
    """``(8 pi^5 h c / 15) (k_B T / h c)^4``."""
    a = constants.k_B * np.asarray(T, float) / constants.hc
    return 8 * math.pi**5 * constants.hc / 15 * a**4


def total_photon_density_closed(T, constants: PhysicalConstants = SI):
    """``16 pi zeta(3) (k_B T / h c)^3``."""
    a = constants.k_B * np.asarray(T, float) / constants.hc
    return 16 * math.pi * zeta3() * a**3


def zeta3() -> float:
    return float(special.zeta(3.0))


def photon_energy(wavelength, constants: PhysicalConstants = SI):
    """``E = h c / lambda`` [J]."""
    lam = np.asarray(wavelength, float)
    if np.any(lam <= 0):
        raise ValueError("wavelength must be positive")
    return constants.hc / lam


def spectrum_table(T: float, nu=None, n_points: int = 200, constants: PhysicalConstants = SI) -> np.ndarray:
    """Rows ``(nu, rho_E, rho_N)``; default sampling spans ``x`` from 0.01 to 30."""
    _check_T(T)
    if nu is None:
        kT_h = constants.k_B * T / constants.h
        nu = np.geomspace(0.01 * kT_h, 30 * kT_h, n_points)
    nu = np.asarray(nu, float)
    return np.column_stack([nu, planck_density(nu, T, constants), planck_number_density(nu, T, constants)])


def summary(T: float, constants: PhysicalConstants = SI) -> dict:
    nu_max, coeff = peak_frequency(T, constants)
    uq, uc = float(total_energy_density(T, constants)), float(total_energy_density_closed(T, constants))
    nq, nc = float(total_photon_density(T, constants)), float(total_photon_density_closed(T, constants))
    return {
        "T_K": float(T),
        "nu_max_Hz": float(nu_max),
        "wien_coefficient": coeff,
        "energy_density_J_per_m3": uq,
        "energy_density_closed_J_per_m3": uc,
        "energy_density_rel_delta": abs(uq / uc - 1),
        "photon_density_per_m3": nq,
        "photon_density_closed_per_m3": nc,
        "photon_density_rel_delta": abs(nq / nc - 1),
        "photon_density_per_cm3": nq * 1e-6,
    }
