"""Photon wavefunctions in the momentum representation.

A state is a pair of complex amplitudes ``(f_plus, f_minus)`` for the two
helicities, sampled on a :class:`MomentumGrid` whose weights realize the
invariant measure ``d^3k / |k|``.  Inner products, norms and expectation
values are weighted sums over the grid nodes.

States built by the factories also carry closed-form callables for the
amplitude and its gradient.  Those are what the derivative-based generators
in :mod:`photonwave.poincare` use when they need values off the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.special import roots_legendre

from .constants import SI, PhysicalConstants

__all__ = [
    "MomentumGrid",
    "PhotonWavefunctionK",
    "StokesVector",
    "inner_product",
    "norm_squared",
    "normalize",
    "stokes_at",
    "stokes_table",
    "translate",
    "make_gaussian_state",
    "state_from_function",
    "is_normalized",
    "GridMismatchError",
]

# (k: (..., 3)) -> (2, ...) complex amplitudes (f_plus, f_minus)
AmplitudeFn = Callable[[np.ndarray], np.ndarray]
# (k: (..., 3)) -> (2, ..., 3) gradients of (f_plus, f_minus)
GradientFn = Callable[[np.ndarray], np.ndarray]

NORMALIZATION_TOL = 1e-10


class GridMismatchError(ValueError):
    """Two states (or a state and an operator) live on different grids."""


def _reference_isotropic_error(nodes: np.ndarray, weights: np.ndarray, s: float) -> float:
    # int d^3k/k exp(-k^2 / (2 s^2)) = 4 pi s^2
    k2 = np.einsum("ij,ij->i", nodes, nodes)
    approx = float(np.sum(weights * np.exp(-k2 / (2 * s * s))))
    exact = 4.0 * math.pi * s * s
    return abs(approx - exact) / exact


@dataclass(frozen=True, eq=False)
class MomentumGrid:
    """Quadrature nodes ``k`` and weights with ``sum(w * g) ~ int d^3k/k g``.

    Use :meth:`cartesian` or :meth:`spherical` to build one.  Cartesian grids
    store their nodes in C order of ``shape`` so that arrays reshape to
    ``(nx, ny, nz)``.
    """

    nodes: np.ndarray
    weights: np.ndarray
    family: str
    params: dict = field(default_factory=dict)
    shape: Optional[tuple] = None

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        weights = np.asarray(self.weights, dtype=float)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise ValueError("nodes must have shape (n, 3)")
        if weights.shape != (nodes.shape[0],):
            raise ValueError("one weight per node required")
        if np.any(weights <= 0):
            raise ValueError("quadrature weights must be positive")
        if np.any(np.einsum("ij,ij->i", nodes, nodes) == 0.0):
            raise ValueError("the measure d^3k/k excludes k = 0; no node may sit at the origin")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    # ------------------------------------------------------------------ builders
    @classmethod
    def cartesian(cls, n: int | Sequence[int], spacing: float | Sequence[float]) -> "MomentumGrid":
        """Uniform box, shifted by half a cell so the origin is never sampled.

        Nodes along each axis are ``(i + 1/2 - n/2) * dk`` for ``i < n``; the
        set is symmetric under ``k -> -k``.  Weight is ``dk^3 / |k|``.
        """
        n = _triple(n, int)
        dk = _triple(spacing, float)
        if min(n) < 2:
            raise ValueError("need at least 2 nodes per axis")
        if any(ni % 2 for ni in n):
            raise ValueError("node counts must be even: an odd count puts a node at k = 0")
        if min(dk) <= 0:
            raise ValueError("spacing must be positive")
        axes = [(np.arange(ni) + 0.5 - ni / 2.0) * di for ni, di in zip(n, dk)]
        kx, ky, kz = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([kx.ravel(), ky.ravel(), kz.ravel()], axis=1)
        kmag = np.sqrt(np.einsum("ij,ij->i", nodes, nodes))
        weights = dk[0] * dk[1] * dk[2] / kmag
        params = {"n": list(n), "spacing": list(dk), "k_max": [0.5 * a * b for a, b in zip(n, dk)]}
        return cls(nodes, weights, "cartesian", params, tuple(n))

    @classmethod
    def cartesian_box(cls, n: int | Sequence[int], k_max: float | Sequence[float]) -> "MomentumGrid":
        """Cartesian grid covering ``[-k_max, k_max]`` per axis with ``n`` cells."""
        n = _triple(n, int)
        km = _triple(k_max, float)
        return cls.cartesian(n, [2 * a / b for a, b in zip(km, n)])

    @classmethod
    def spherical(
        cls,
        n_r: int,
        n_theta: int,
        n_phi: int,
        k_min: float,
        k_max: float,
    ) -> "MomentumGrid":
        """Spherical product grid realizing ``k dk dOmega``.

        Gauss-Legendre in ``u = ln k`` on ``[ln k_min, ln k_max]`` (so the
        radial nodes are log-spaced and ``k dk = k^2 du``), Gauss-Legendre in
        ``cos(theta)`` and uniform in ``phi``.
        """
        if not 0 < k_min < k_max:
            raise ValueError("need 0 < k_min < k_max")
        if min(n_r, n_theta, n_phi) < 1:
            raise ValueError("resolutions must be positive")
        xu, wu = roots_legendre(n_r)
        a, b = math.log(k_min), math.log(k_max)
        u = 0.5 * (b - a) * xu + 0.5 * (b + a)
        wu = 0.5 * (b - a) * wu
        k = np.exp(u)
        ct, wt = roots_legendre(n_theta)
        phi = 2 * math.pi * (np.arange(n_phi) + 0.5) / n_phi
        wp = 2 * math.pi / n_phi
        K, CT, PH = np.meshgrid(k, ct, phi, indexing="ij")
        W = (wu * k**2)[:, None, None] * wt[None, :, None] * wp
        ST = np.sqrt(1 - CT**2)
        nodes = np.stack(
            [(K * ST * np.cos(PH)).ravel(), (K * ST * np.sin(PH)).ravel(), (K * CT).ravel()], axis=1
        )
        params = {"n_r": n_r, "n_theta": n_theta, "n_phi": n_phi, "k_min": k_min, "k_max": k_max}
        return cls(nodes, np.broadcast_to(W, K.shape).ravel(), "spherical", params, (n_r, n_theta, n_phi))

    # ---------------------------------------------------------------- properties
    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def kmag(self) -> np.ndarray:
        return np.sqrt(np.einsum("ij,ij->i", self.nodes, self.nodes))

    @property
    def volume_weights(self) -> np.ndarray:
        """Plain ``d^3k`` weights (``weights * |k|``)."""
        return self.weights * self.kmag

    @property
    def spacing(self) -> np.ndarray:
        if self.family != "cartesian":
            raise ValueError("spacing is defined for cartesian grids only")
        return np.asarray(self.params["spacing"])

    def k_bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.nodes.min(axis=0), self.nodes.max(axis=0)

    @property
    def tolerance(self) -> float:
        """Quadrature error estimate from a reference isotropic Gaussian.

        The reference width is tied to the grid's extent; the returned value
        is the relative error against the closed form, floored at 1e-14.
        """
        try:
            return self._tolerance  # type: ignore[attr-defined]
        except AttributeError:
            pass
        if self.family == "cartesian":
            s = min(self.params["k_max"]) / 6.0
        else:
            s = self.params["k_max"] / 6.0
        tol = max(_reference_isotropic_error(self.nodes, self.weights, s), 1e-14)
        object.__setattr__(self, "_tolerance", tol)
        return tol

    def same_as(self, other: "MomentumGrid") -> bool:
        if self is other:
            return True
        return (
            self.nodes.shape == other.nodes.shape
            and np.array_equal(self.nodes, other.nodes)
            and np.array_equal(self.weights, other.weights)
        )

    def metadata(self) -> dict:
        return {"family": self.family, "params": self.params, "shape": list(self.shape or ())}


def _triple(value, kind):
    if np.ndim(value) == 0:
        return (kind(value),) * 3
    out = tuple(kind(v) for v in value)
    if len(out) == 1:
        return out * 3
    if len(out) != 3:
        raise ValueError("expected a scalar or three values")
    return out


@dataclass(frozen=True, eq=False)
class PhotonWavefunctionK:
    """Two-component photon wavefunction ``(f_plus, f_minus)`` on a grid.

    ``amplitude`` and ``gradient`` are optional closed forms valid at any
    ``k`` (shape ``(..., 3)``); they must agree with the sampled arrays.
    """

    grid: MomentumGrid
    f_plus: np.ndarray
    f_minus: np.ndarray
    amplitude: Optional[AmplitudeFn] = None
    gradient: Optional[GradientFn] = None
    normalized: bool = False

    def __post_init__(self):
        fp = np.asarray(self.f_plus, dtype=complex)
        fm = np.asarray(self.f_minus, dtype=complex)
        if fp.shape != (self.grid.size,) or fm.shape != (self.grid.size,):
            raise ValueError("both helicity components must be sampled on every grid node")
        fp.setflags(write=False)
        fm.setflags(write=False)
        object.__setattr__(self, "f_plus", fp)
        object.__setattr__(self, "f_minus", fm)

    @property
    def components(self) -> np.ndarray:
        """Stacked ``(2, n)`` array ordered (+, -)."""
        return np.stack([self.f_plus, self.f_minus])

    def scaled(self, factor: complex) -> "PhotonWavefunctionK":
        amp = self.amplitude
        grad = self.gradient
        return PhotonWavefunctionK(
            self.grid,
            factor * self.f_plus,
            factor * self.f_minus,
            None if amp is None else (lambda k, a=amp: factor * a(k)),
            None if grad is None else (lambda k, g=grad: factor * g(k)),
            normalized=self.normalized and abs(abs(factor) - 1.0) < 1e-15,
        )

    @classmethod
    def zeros(cls, grid: MomentumGrid) -> "PhotonWavefunctionK":
        z = np.zeros(grid.size, complex)
        return cls(grid, z, z)


@dataclass(frozen=True)
class StokesVector:
    S0: float
    S1: float
    S2: float
    S3: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.S0, self.S1, self.S2, self.S3)

    @property
    def ellipse(self) -> dict:
        """Ellipse of the electric field: semi-axes and orientation.

        Semi-axes are ``(|f+| + |f-|)/sqrt(2)`` and ``||f+| - |f-||/sqrt(2)``
        for the plane wave built with ``e = (1, i, 0)/sqrt(2)``; the major
        axis sits at ``atan2(S2, S1) / 2``.
        """
        ap = math.sqrt(max(0.0, 0.5 * (self.S0 + self.S3)))
        am = math.sqrt(max(0.0, 0.5 * (self.S0 - self.S3)))
        return {
            "major": (ap + am) / math.sqrt(2),
            "minor": abs(ap - am) / math.sqrt(2),
            "orientation": 0.5 * math.atan2(self.S2, self.S1),
            "handedness": int(np.sign(self.S3)),
        }


def _check_same_grid(a: PhotonWavefunctionK, b: PhotonWavefunctionK) -> None:
    if not a.grid.same_as(b.grid):
        raise GridMismatchError(
            f"states live on different momentum grids ({a.grid.family}, {a.grid.size} nodes vs "
            f"{b.grid.family}, {b.grid.size} nodes)"
        )


def inner_product(f1: PhotonWavefunctionK, f2: PhotonWavefunctionK) -> complex:
    """``sum_k w(k) [f1+^* f2+ + f1-^* f2-]``."""
    _check_same_grid(f1, f2)
    w = f1.grid.weights
    return complex(np.sum(w * (np.conj(f1.f_plus) * f2.f_plus + np.conj(f1.f_minus) * f2.f_minus)))


def norm_squared(f: PhotonWavefunctionK) -> float:
    w = f.grid.weights
    return float(np.sum(w * (np.abs(f.f_plus) ** 2 + np.abs(f.f_minus) ** 2)))


def normalize(f: PhotonWavefunctionK) -> PhotonWavefunctionK:
    n2 = norm_squared(f)
    if not n2 > 0.0:
        raise ValueError("null state cannot be normalized")
    out = f.scaled(1.0 / math.sqrt(n2))
    return replace(out, normalized=True)


def stokes_at(f: PhotonWavefunctionK, node_index: int) -> StokesVector:
    """Stokes parameters of the two amplitudes at one node.

    ``S1 + i S2 = 2 f+^* f-`` so that ``S1 = 2|f+||f-|cos(d- - d+)`` and
    ``S2 = 2|f+||f-|sin(d- - d+)``.
    """
    if not -f.grid.size <= node_index < f.grid.size:
        raise IndexError(f"node {node_index} out of range for grid of {f.grid.size} nodes")
    a = complex(f.f_plus[node_index])
    b = complex(f.f_minus[node_index])
    return StokesVector(*_stokes(a, b))


def _stokes(a, b):
    aa = np.abs(a) ** 2
    bb = np.abs(b) ** 2
    cross = 2.0 * np.conj(a) * b
    return aa + bb, np.real(cross), np.imag(cross), aa - bb


def stokes_table(f: PhotonWavefunctionK) -> np.ndarray:
    """``(n, 4)`` array of ``(S0, S1, S2, S3)`` at every node."""
    return np.stack(_stokes(f.f_plus, f.f_minus), axis=1)


def translate(
    f: PhotonWavefunctionK,
    t0: float = 0.0,
    r0: Sequence[float] = (0.0, 0.0, 0.0),
    constants: PhysicalConstants = SI,
) -> PhotonWavefunctionK:
    """Space-time translation: multiply by ``exp(i omega t0) exp(i k.r0)``.

    The synthesized field of the result satisfies ``F'(r, t) = F(r + r0, t - t0)``.
    """
    r0 = np.asarray(r0, dtype=float)
    c = constants.c

    def phase(k):
        kk = np.sqrt(np.sum(k * k, axis=-1))
        return np.exp(1j * (c * kk * t0 + k @ r0))

    ph = phase(f.grid.nodes)
    amp = f.amplitude
    grad = f.gradient
    new_amp = None if amp is None else (lambda k: phase(k) * amp(k))

    def new_grad(k):
        kk = np.sqrt(np.sum(k * k, axis=-1))[..., None]
        dphase = 1j * (c * t0 * k / kk + r0)
        return phase(k)[..., None] * (grad(k) + dphase * amp(k)[..., None])

    return PhotonWavefunctionK(
        f.grid,
        ph * f.f_plus,
        ph * f.f_minus,
        new_amp,
        None if (grad is None or amp is None) else new_grad,
        normalized=f.normalized,
    )


def make_gaussian_state(
    grid: MomentumGrid,
    center: Sequence[float],
    sigma: float,
    weights: tuple[complex, complex] = (1.0, 0.0),
    mirrored: bool = False,
) -> PhotonWavefunctionK:
    """Normalized Gaussian ``f_+- = c_+- exp(-|k - k0|^2 / (2 sigma^2))``.

    With ``mirrored=True`` a second lobe at ``-k0`` is added, which gives a
    state with zero mean momentum.  The normalization constant is computed on
    ``grid`` and baked into the closed-form amplitude and gradient.
    """
    if not sigma > 0:
        raise ValueError("sigma must be positive")
    cp, cm = complex(weights[0]), complex(weights[1])
    if abs(cp) ** 2 + abs(cm) ** 2 == 0:
        raise ValueError("helicity weights must not both vanish")
    k0 = np.asarray(center, dtype=float)
    lo, hi = grid.k_bounds()
    if np.any(k0 < lo) or np.any(k0 > hi):
        raise ValueError(f"Gaussian center {k0} lies outside the grid support")
    s2 = sigma * sigma
    coeffs = np.array([cp, cm])

    def profile(k):
        d = k - k0
        g = np.exp(-np.sum(d * d, axis=-1) / (2 * s2))
        if mirrored:
            e = k + k0
            g = g + np.exp(-np.sum(e * e, axis=-1) / (2 * s2))
        return g

    def profile_grad(k):
        d = k - k0
        g = np.exp(-np.sum(d * d, axis=-1) / (2 * s2))[..., None] * (-d / s2)
        if mirrored:
            e = k + k0
            g = g + np.exp(-np.sum(e * e, axis=-1) / (2 * s2))[..., None] * (-e / s2)
        return g

    raw = profile(grid.nodes)
    n2 = float(np.sum(grid.weights * raw**2)) * (abs(cp) ** 2 + abs(cm) ** 2)
    if not n2 > 0:
        raise ValueError("Gaussian has empty support on this grid")
    scale = coeffs / math.sqrt(n2)

    def amplitude(k):
        g = profile(np.asarray(k, float))
        return scale.reshape((2,) + (1,) * g.ndim) * g

    def gradient(k):
        g = profile_grad(np.asarray(k, float))
        return scale.reshape((2,) + (1,) * g.ndim) * g

    return PhotonWavefunctionK(
        grid, scale[0] * raw, scale[1] * raw, amplitude, gradient, normalized=True
    )


def state_from_function(
    grid: MomentumGrid,
    amplitude: AmplitudeFn,
    gradient: Optional[GradientFn] = None,
    normalize_state: bool = True,
) -> PhotonWavefunctionK:
    """Sample a closed-form amplitude on ``grid`` (optionally normalizing)."""
    vals = np.asarray(amplitude(grid.nodes), complex)
    f = PhotonWavefunctionK(grid, vals[0], vals[1], amplitude, gradient)
    return normalize(f) if normalize_state else f


def is_normalized(f: PhotonWavefunctionK, tol: float = NORMALIZATION_TOL) -> bool:
    return abs(norm_squared(f) - 1.0) <= tol
