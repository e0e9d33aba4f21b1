"""Riemann-Silberstein fields built from momentum-space wavefunctions.

Spatial grids pair with half-cell-shifted Cartesian momentum grids: the
discrete modes are ``k = (n + 1/2) dk`` per axis, so ``k = 0`` is never a
mode and the box closes with a Bloch phase of ``-1`` per period.  With that
pairing every spectral operation here (synthesis, free evolution, helicity
projection, the nonlocal norm) is exact on the grid.  Grids with integer
modes (``bloch=0``) are supported too; their DC mode belongs to neither
helicity branch.

Amplitude convention::

    F(r, t) = sum_k dk^3 / (2 pi)^(3/2) [ e(k) f+(k) e^{i(k.r - w t)}
                                        + e(k) f-(k)^* e^{-i(k.r - w t)} ]

optionally multiplied by ``sqrt(hbar c)`` (``quantum_scale=True``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy import fft as sfft
from scipy import integrate, special

from .constants import SI, PhysicalConstants
from .momentum_space import MomentumGrid, PhotonWavefunctionK

__all__ = [
    "SPIN_MATRICES",
    "SpatialGrid",
    "RSField",
    "PolarizationVector",
    "PositionWavefunctions",
    "polarization_vector",
    "polarization_vectors",
    "synthesize",
    "field_at",
    "split_fields",
    "from_fields",
    "field_energy",
    "field_energy_EB",
    "field_momentum",
    "divergence_residual",
    "evolve",
    "helicity_split",
    "nonlocal_norm",
    "nonlocal_norm_direct",
    "position_energy_moment",
    "plane_wave_electric_field",
    "ellipse_from_trace",
]

SPIN_MATRICES = np.array(
    [
        [[0, 0, 0], [0, 0, -1j], [0, 1j, 0]],
        [[0, 0, 1j], [0, 0, 0], [-1j, 0, 0]],
        [[0, -1j, 0], [1j, 0, 0], [0, 0, 0]],
    ]
)

_TWO_PI_32 = (2 * math.pi) ** 1.5
_LEVI_CIVITA = np.zeros((3, 3, 3))
for _i, _j, _k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
    _LEVI_CIVITA[_i, _j, _k] = 1.0
    _LEVI_CIVITA[_i, _k, _j] = -1.0


# ------------------------------------------------------------------- grids


@dataclass(frozen=True)
class SpatialGrid:
    """Uniform 3-D box of ``shape`` nodes at ``origin + m * spacing``.

    ``bloch`` is the mode offset in units of ``dk`` (0.5 pairs with
    :meth:`MomentumGrid.cartesian`).  ``periodic`` marks the box as
    spectrally closed, which free evolution requires.
    """

    origin: tuple
    spacing: tuple
    shape: tuple
    periodic: bool = True
    bloch: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "origin", tuple(float(x) for x in self.origin))
        object.__setattr__(self, "spacing", tuple(float(x) for x in self.spacing))
        object.__setattr__(self, "shape", tuple(int(x) for x in self.shape))
        if len(self.origin) != 3 or len(self.spacing) != 3 or len(self.shape) != 3:
            raise ValueError("origin, spacing and shape need three entries")
        if min(self.spacing) <= 0:
            raise ValueError("spacings must be positive")
        if min(self.shape) < 2:
            raise ValueError("need at least 2 nodes per axis")
        if self.bloch not in (0.0, 0.5):
            raise ValueError("bloch offset must be 0 or 0.5")

    @classmethod
    def paired_with(cls, kgrid: MomentumGrid, origin: Optional[Sequence[float]] = None) -> "SpatialGrid":
        """Box whose FFT modes are exactly the nodes of ``kgrid``; centered by default."""
        if kgrid.family != "cartesian":
            raise ValueError("FFT pairing needs a cartesian momentum grid")
        n = kgrid.shape
        dr = tuple(2 * math.pi / (ni * di) for ni, di in zip(n, kgrid.spacing))
        if origin is None:
            origin = tuple(-0.5 * ni * d for ni, d in zip(n, dr))
        return cls(tuple(origin), dr, n, True, 0.5)

    @property
    def dk(self) -> np.ndarray:
        return np.array([2 * math.pi / (n * d) for n, d in zip(self.shape, self.spacing)])

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def axes(self) -> list:
        return [o + d * np.arange(n) for o, d, n in zip(self.origin, self.spacing, self.shape)]

    def positions(self) -> np.ndarray:
        """``(Nx, Ny, Nz, 3)`` array of node coordinates."""
        X = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack(X, axis=-1)

    def wavevectors(self) -> np.ndarray:
        """``(Nx, Ny, Nz, 3)`` mode wavevectors in FFT order."""
        ks = [
            2 * math.pi * np.fft.fftfreq(n, d) + self.bloch * dk
            for n, d, dk in zip(self.shape, self.spacing, self.dk)
        ]
        K = np.meshgrid(*ks, indexing="ij")
        return np.stack(K, axis=-1)

    def momentum_grid(self) -> MomentumGrid:
        if self.bloch != 0.5:
            raise ValueError("only half-shifted boxes pair with a momentum grid")
        return MomentumGrid.cartesian(self.shape, self.dk)

    def pairs_with(self, kgrid: MomentumGrid) -> bool:
        return (
            self.bloch == 0.5
            and kgrid.family == "cartesian"
            and tuple(kgrid.shape) == self.shape
            and np.allclose(kgrid.spacing, self.dk, rtol=1e-12, atol=0)
        )

    def shifted(self, r0: Sequence[float]) -> "SpatialGrid":
        return SpatialGrid(
            tuple(np.add(self.origin, r0)), self.spacing, self.shape, self.periodic, self.bloch
        )

    def metadata(self) -> dict:
        return {
            "origin": list(self.origin),
            "spacing": list(self.spacing),
            "shape": list(self.shape),
            "periodic": self.periodic,
            "bloch": self.bloch,
        }


@dataclass(frozen=True, eq=False)
class RSField:
    """Complex 3-vector field on a spatial grid, ``F`` of shape ``(Nx, Ny, Nz, 3)``."""

    grid: SpatialGrid
    F: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        F = np.asarray(self.F, complex)
        if F.shape != self.grid.shape + (3,):
            raise ValueError(f"field shape {F.shape} does not match grid {self.grid.shape}")
        F.setflags(write=False)
        object.__setattr__(self, "F", F)


@dataclass(frozen=True, eq=False)
class PositionWavefunctions:
    grid: SpatialGrid
    psi_plus: np.ndarray
    psi_minus: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class PolarizationVector:
    """Unit helicity-plus vector ``e(k)``; ``minus`` is ``e(k)^*``."""

    e: np.ndarray

    @property
    def minus(self) -> np.ndarray:
        return np.conj(self.e)


# ------------------------------------------------------------- polarization


def polarization_vectors(k: np.ndarray) -> np.ndarray:
    """``e(k) = (e_theta + i e_phi) / sqrt(2)`` for an array of wavevectors.

    This phase convention is the one whose Berry connection is the
    ``alpha(k)`` of :mod:`photonwave.poincare`: ``e^* . grad e = -i alpha``.
    On the +z axis ``phi`` is taken as 0, which gives ``(1, i, 0)/sqrt(2)``.
    """
    k = np.asarray(k, float)
    kx, ky, kz = k[..., 0], k[..., 1], k[..., 2]
    kp = np.hypot(kx, ky)
    kk = np.sqrt(kp * kp + kz * kz)
    if np.any(kk == 0):
        raise ValueError("polarization vector is undefined at k = 0")
    on_axis = kp == 0
    cphi = np.where(on_axis, 1.0, kx / np.where(on_axis, 1.0, kp))
    sphi = np.where(on_axis, 0.0, ky / np.where(on_axis, 1.0, kp))
    cth = kz / kk
    sth = kp / kk
    e_th = np.stack([cth * cphi, cth * sphi, -sth], axis=-1)
    e_ph = np.stack([-sphi, cphi, np.zeros_like(cphi)], axis=-1)
    return (e_th + 1j * e_ph) / math.sqrt(2.0)


def polarization_vector(k: Sequence[float]) -> PolarizationVector:
    k = np.asarray(k, float)
    if k.shape != (3,):
        raise ValueError("expected one wavevector")
    if not np.any(k):
        raise ValueError("polarization vector is undefined at k = 0")
    return PolarizationVector(polarization_vectors(k))


# -------------------------------------------------------------- transforms


class _Transform:
    """Cached phase factors for the grid's discrete Fourier pair."""

    _cache: dict = {}

    def __new__(cls, grid: SpatialGrid):
        hit = cls._cache.get(grid)
        if hit is not None:
            return hit
        self = super().__new__(cls)
        self.K = grid.wavevectors()
        if grid.bloch == 0:
            bl = np.ones(grid.shape)
        else:
            parts = [
                np.exp(1j * grid.bloch * dk * d * np.arange(n))
                for dk, d, n in zip(grid.dk, grid.spacing, grid.shape)
            ]
            bl = parts[0][:, None, None] * parts[1][None, :, None] * parts[2][None, None, :]
        org = np.exp(1j * (self.K @ np.asarray(grid.origin)))
        fwd = float(np.prod(grid.dk)) / _TWO_PI_32 * grid.size
        inv = grid.cell_volume / _TWO_PI_32
        self.to_real = (fwd * org)[..., None], bl[..., None]
        self.to_k = np.conj(bl)[..., None], (inv * np.conj(org))[..., None]
        if len(cls._cache) > 8:
            cls._cache.clear()
        cls._cache[grid] = self
        return self


def to_real_space(grid: SpatialGrid, Fk: np.ndarray) -> np.ndarray:
    """``sum_k dk^3/(2pi)^{3/2} Fk(k) e^{ik.r}`` on the grid; ``Fk`` in FFT order."""
    a, b = _Transform(grid).to_real
    return sfft.ifftn(Fk * a, axes=(0, 1, 2), workers=-1) * b


def to_spectral(grid: SpatialGrid, F: np.ndarray) -> np.ndarray:
    """Inverse of :func:`to_real_space` (discrete ``(2pi)^{-3/2} int d^3r e^{-ikr} F``)."""
    a, b = _Transform(grid).to_k
    return sfft.fftn(F * a, axes=(0, 1, 2), workers=-1) * b


def _sorted_to_fft(arr: np.ndarray) -> np.ndarray:
    return np.fft.ifftshift(arr, axes=(0, 1, 2))


def _helicity_projectors(K: np.ndarray):
    """``(P+, P-, P0, |k|)``: eigenprojectors of ``s.k`` for eigenvalues ``+k, -k, 0``.

    With ``(khat x)`` written as a matrix, ``P+- = (1 - khat khat +- i khat x) / 2``.
    The DC mode, if present, goes to neither branch.
    """
    kk = np.sqrt(np.sum(K * K, axis=-1))
    dc = kk == 0
    khat = K / np.where(dc, 1.0, kk)[..., None]
    P0 = khat[..., :, None] * khat[..., None, :]
    X = np.einsum("ijk,...j->...ik", _LEVI_CIVITA, khat)  # X v = khat x v
    T = np.eye(3) - P0
    Pp = 0.5 * (T + 1j * X)
    Pm = 0.5 * (T - 1j * X)
    Pp[dc] = 0.0
    Pm[dc] = 0.0
    P0[dc] = np.eye(3)
    return Pp, Pm, P0, kk


def _apply(M: np.ndarray, V: np.ndarray) -> np.ndarray:
    return (M @ V[..., None])[..., 0]


# ---------------------------------------------------------------- synthesis


def synthesize(
    f: PhotonWavefunctionK,
    grid: SpatialGrid,
    t: float = 0.0,
    quantum_scale: bool = False,
    constants: PhysicalConstants = SI,
    fallback: bool = True,
) -> RSField:
    """Field of the momentum-space amplitudes ``f`` on ``grid`` at time ``t``.

    Uses the FFT when ``grid`` pairs with ``f.grid`` and direct summation over
    the momentum nodes otherwise (``fallback=False`` turns that into an error).
    """
    scale = math.sqrt(constants.hbar * constants.c) if quantum_scale else 1.0
    c = constants.c
    if grid.pairs_with(f.grid):
        shape = f.grid.shape
        nodes = f.grid.nodes.reshape(shape + (3,))
        e = polarization_vectors(nodes)
        w = c * np.sqrt(np.sum(nodes**2, axis=-1))
        fp = f.f_plus.reshape(shape)
        fm_rev = f.f_minus.reshape(shape)[::-1, ::-1, ::-1]
        e_rev = e[::-1, ::-1, ::-1]
        Fk = e * (fp * np.exp(-1j * w * t))[..., None] + e_rev * (np.conj(fm_rev) * np.exp(1j * w * t))[..., None]
        F = to_real_space(grid, _sorted_to_fft(Fk))
        return RSField(grid, scale * F, t)
    if not fallback:
        raise ValueError("spatial grid is not FFT-compatible with the momentum grid and fallback is disabled")
    return RSField(grid, scale * field_at(f, grid.positions(), t, constants=constants), t)


def field_at(
    f: PhotonWavefunctionK,
    r: np.ndarray,
    t: float = 0.0,
    quantum_scale: bool = False,
    constants: PhysicalConstants = SI,
    chunk: int = 4096,
) -> np.ndarray:
    """Direct mode sum of the field at arbitrary points ``r`` (shape ``(..., 3)``)."""
    r = np.asarray(r, float)
    pts = r.reshape(-1, 3)
    k = f.grid.nodes
    e = polarization_vectors(k)
    vw = f.grid.volume_weights / _TWO_PI_32
    w = constants.c * f.grid.kmag
    ap = vw * f.f_plus * np.exp(-1j * w * t)
    am = vw * np.conj(f.f_minus) * np.exp(1j * w * t)
    out = np.empty((pts.shape[0], 3), complex)
    for s in range(0, pts.shape[0], chunk):
        ph = np.exp(1j * (pts[s : s + chunk] @ k.T))
        out[s : s + chunk] = (ph * ap) @ e + (np.conj(ph) * am) @ e
    if quantum_scale:
        out *= math.sqrt(constants.hbar * constants.c)
    return out.reshape(r.shape)


# -------------------------------------------------------- field quantities


def split_fields(F: RSField, constants: PhysicalConstants = SI) -> tuple[np.ndarray, np.ndarray]:
    """``(E, B)`` with ``F = eps0 E / sqrt(2 eps0) + i B / sqrt(2 mu0)``."""
    E = math.sqrt(2.0 / constants.epsilon_0) * F.F.real
    B = math.sqrt(2.0 * constants.mu_0) * F.F.imag
    return E, B


def from_fields(grid: SpatialGrid, E, B, t: float = 0.0, constants: PhysicalConstants = SI) -> RSField:
    D = constants.epsilon_0 * np.asarray(E)
    F = D / math.sqrt(2 * constants.epsilon_0) + 1j * np.asarray(B) / math.sqrt(2 * constants.mu_0)
    return RSField(grid, F, t)


def field_energy(F: RSField) -> float:
    """``sum d^3r F^* . F``."""
    return float(F.grid.cell_volume * np.sum(np.abs(F.F) ** 2))


def field_energy_EB(E, B, grid: SpatialGrid, constants: PhysicalConstants = SI) -> float:
    """``sum d^3r [D.D/(2 eps0) + B.B/(2 mu0)]``."""
    D = constants.epsilon_0 * np.asarray(E)
    dens = np.sum(D * D, axis=-1) / (2 * constants.epsilon_0) + np.sum(np.asarray(B) ** 2, axis=-1) / (2 * constants.mu_0)
    return float(grid.cell_volume * np.sum(dens))


def field_momentum(F: RSField, with_residual: bool = False):
    """``-i sum d^3r F^* x F`` (equals ``c sum D x B``, so ``E = |P|`` for a plane wave).

    The exact result is real; ``with_residual=True`` also returns the norm of
    the discarded imaginary part.
    """
    P = -1j * F.grid.cell_volume * np.sum(np.cross(np.conj(F.F), F.F), axis=(0, 1, 2))
    if with_residual:
        return P.real, float(np.linalg.norm(P.imag))
    return P.real


def divergence_residual(F: RSField) -> float:
    """``||k . F(k)|| / ||k|| ||F(k)||`` over the spectral modes (0 for a transverse field)."""
    Fk = to_spectral(F.grid, F.F)
    K = _Transform(F.grid).K
    div = np.sum(K * Fk, axis=-1)
    denom = math.sqrt(float(np.sum(np.sum(K * K, axis=-1) * np.sum(np.abs(Fk) ** 2, axis=-1))))
    if denom == 0:
        return 0.0
    return math.sqrt(float(np.sum(np.abs(div) ** 2))) / denom


def evolve(F: RSField, dt: float, steps: int = 1, constants: PhysicalConstants = SI) -> RSField:
    """Free propagation ``F(k) -> exp(-i c (s.k) dt) F(k)``, repeated ``steps`` times."""
    if not F.grid.periodic:
        raise ValueError("free evolution needs a periodic (spectrally closed) grid")
    grid = F.grid
    c = constants.c
    Pp, Pm, P0, kk = _helicity_projectors(_Transform(grid).K)
    ph = np.exp(-1j * c * kk * dt)[..., None, None]
    U = ph * Pp + np.conj(ph) * Pm + P0
    field = F.F
    for _ in range(steps):
        field = to_real_space(grid, _apply(U, to_spectral(grid, field)))
    return RSField(grid, field, F.t + steps * dt)


def helicity_split(F: RSField) -> PositionWavefunctions:
    """Positive-frequency part and conjugated negative-frequency part of ``F``."""
    grid = F.grid
    if not grid.periodic:
        raise ValueError("helicity projection needs a periodic grid")
    Pp, Pm, _, _ = _helicity_projectors(_Transform(grid).K)
    Fk = to_spectral(grid, F.F)
    psi_p = to_real_space(grid, _apply(Pp, Fk))
    psi_m = np.conj(to_real_space(grid, _apply(Pm, Fk)))
    return PositionWavefunctions(grid, psi_p, psi_m, F.t)


def nonlocal_norm(psi: PositionWavefunctions) -> float:
    """``(1/2pi^2) sum_l int int Psi_l^*(r) . Psi_l(r') / |r - r'|^2``, spectrally.

    Evaluated as ``sum_l sum_k dk^3 |Psi_l(k)|^2 / |k|``; a DC mode, if the
    grid has one, is skipped.
    """
    grid = psi.grid
    K = _Transform(grid).K
    kk = np.sqrt(np.sum(K * K, axis=-1))
    inv = np.where(kk == 0, 0.0, 1.0 / np.where(kk == 0, 1.0, kk))
    total = 0.0
    for comp in (psi.psi_plus, psi.psi_minus):
        Pk = to_spectral(grid, comp)
        total += float(np.sum(inv * np.sum(np.abs(Pk) ** 2, axis=-1)))
    return total * float(np.prod(grid.dk))


def _box_inverse_square(grid: SpatialGrid, r: np.ndarray) -> np.ndarray:
    """``int_box d^3x / |x - r|^2`` over the union of grid cells, for each point ``r``.

    Uses ``1/d^2 = int_0^inf exp(-s d^2) ds`` so that the box integral factorizes
    into error functions; the remaining 1-D integral runs in ``u = sqrt(s)``.
    """
    h = np.asarray(grid.spacing)
    lo = np.asarray(grid.origin) - 0.5 * h - r
    hi = lo + h * np.asarray(grid.shape)

    def integrand(t):
        # u = t / (1 - t) maps [0, 1) onto [0, inf)
        u = t / (1.0 - t) if t < 1.0 else math.inf
        if u == 0.0 or u == math.inf:
            return np.zeros(len(r))
        fac = 0.5 * math.sqrt(math.pi) / u * (special.erf(u * hi) - special.erf(u * lo))
        return 2.0 * u * np.prod(fac, axis=1) / (1.0 - t) ** 2

    val, _ = integrate.quad_vec(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10, limit=400)
    return val


def nonlocal_norm_direct(psi: PositionWavefunctions) -> float:
    """Brute-force real-space double sum of the nonlocal norm (small grids only).

    The kernel singularity is subtracted: ``Psi^*(r).[Psi(r') - Psi(r)]`` is
    summed over distinct nodes and ``|Psi(r)|^2`` is integrated exactly against
    ``1/|r - r'|^2`` over the box.  The free-space kernel is used, so this
    matches :func:`nonlocal_norm` only for fields that decay inside the box.
    """
    grid = psi.grid
    if grid.size > 16**3:
        raise ValueError("direct double sum is limited to grids of at most 16^3 nodes")
    r = grid.positions().reshape(-1, 3)
    d2 = np.sum((r[:, None, :] - r[None, :, :]) ** 2, axis=-1)
    np.fill_diagonal(d2, np.inf)
    kern = 1.0 / d2
    row = kern.sum(axis=1)
    W = _box_inverse_square(grid, r)
    dv = grid.cell_volume
    total = 0.0
    for comp in (psi.psi_plus, psi.psi_minus):
        v = comp.reshape(-1, 3)
        dens = np.sum(np.abs(v) ** 2, axis=-1)
        G = np.conj(v) @ v.T  # Psi^*(r) . Psi(r')
        total += dv * dv * (float(np.real(np.sum(G * kern))) - float(dens @ row)) + dv * float(dens @ W)
    return total / (2 * math.pi**2)


def position_energy_moment(psi: PositionWavefunctions) -> np.ndarray:
    """``sum_l sum d^3r r |Psi_l(r)|^2`` (first moment of the energy density)."""
    r = psi.grid.positions()
    dens = np.sum(np.abs(psi.psi_plus) ** 2 + np.abs(psi.psi_minus) ** 2, axis=-1)
    return psi.grid.cell_volume * np.sum(dens[..., None] * r, axis=(0, 1, 2))


# ------------------------------------------------------------- plane waves


def plane_wave_electric_field(
    k: Sequence[float],
    f_plus: complex,
    f_minus: complex,
    r: np.ndarray,
    t: np.ndarray,
    constants: PhysicalConstants = SI,
) -> np.ndarray:
    """``Re[(e f+ + e^* f-) e^{i(k.r - w t)}]`` for one mode, over ``t``.

    This is the real part of the mode's contribution to ``F`` (``e f+ e^{i phi}
    + e f-^* e^{-i phi}``) with the second term rewritten through
    ``Re z = Re z^*``.
    """
    k = np.asarray(k, float)
    e = polarization_vectors(k)
    w = constants.c * np.linalg.norm(k)
    phase = np.exp(1j * (np.asarray(r, float) @ k - w * np.asarray(t, float)))
    amp = e * f_plus + np.conj(e) * f_minus
    return np.real(np.multiply.outer(phase, amp))


def ellipse_from_trace(E: np.ndarray, k: Sequence[float]) -> dict:
    """Semi-axes and orientation of a sampled field trace ``E`` of shape ``(nt, 3)``.

    The orientation is measured in the plane spanned by ``Re e`` and
    ``Im e`` (``x`` and ``y`` for ``k`` along ``+z``).
    """
    e = polarization_vectors(np.asarray(k, float))
    u = np.sqrt(2.0) * e.real
    v = np.sqrt(2.0) * e.imag
    x = E @ u
    y = E @ v
    cov = np.array([[np.mean(x * x), np.mean(x * y)], [np.mean(x * y), np.mean(y * y)]])
    vals, vecs = np.linalg.eigh(cov)
    major = math.sqrt(2 * max(vals[1], 0.0))
    minor = math.sqrt(2 * max(vals[0], 0.0))
    vx, vy = vecs[:, 1]
    angle = math.atan2(vy, vx)
    angle = (angle + math.pi / 2) % math.pi - math.pi / 2
    return {"major": major, "minor": minor, "orientation": angle}
