"""Poincare generators acting on momentum-space photon wavefunctions.

Energy and momentum are multiplication operators.  Angular momentum, the
boost (moment of energy) and the position operator involve the covariant
derivative ``D = d/dk - i lambda alpha(k)`` with the light-cone connection
``alpha = (-ky kz, kx kz, 0) / (|k| k_perp^2)``.

Derivatives come from one of three sources:

``"analytic"``
    the state's closed-form gradient;
``"fd"``
    centered differences of the state's closed-form amplitude with step ``h``
    (these compose, so nested operators work on derived states);
``"grid"``
    second-order centered differences of the sampled arrays on a Cartesian
    grid.

``alpha`` is singular on the k_z axis.  Nodes with ``k_perp^2 < eps |k|^2``
are flagged, and derivative-based results are set to zero there.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields
from typing import Callable, Optional, Sequence

import numpy as np

from .constants import SI, PhysicalConstants
from .momentum_space import (
    NORMALIZATION_TOL,
    GridMismatchError,
    MomentumGrid,
    PhotonWavefunctionK,
    inner_product,
    make_gaussian_state,
    norm_squared,
)
from .momentum_space import translate as translate_state

__all__ = [
    "CONNECTION_EPS",
    "ConnectionSingularityError",
    "GeneratorResult",
    "UncertaintyReport",
    "connection",
    "apply_energy",
    "apply_momentum",
    "covariant_derivative",
    "curvature",
    "curvature_field",
    "apply_angular_momentum",
    "apply_boost",
    "position_operator",
    "symmetric_position_operator",
    "expectation",
    "uncertainty_bound",
    "uncertainty_product",
    "zero_momentum_sweep",
]

CONNECTION_EPS = 1e-6
HELICITY = np.array([1.0, -1.0])


class ConnectionSingularityError(ValueError):
    """The state has non-negligible weight where ``alpha(k)`` is singular."""


@dataclass(frozen=True)
class GeneratorResult:
    """Output of a generator: one (scalar) or three (vector) states.

    ``parts`` holds named addends when the operator has a natural split,
    e.g. ``"orbital"`` and ``"helicity"`` for the angular momentum.
    """

    components: tuple
    singular: np.ndarray
    parts: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.components)

    def __getitem__(self, i) -> PhotonWavefunctionK:
        return self.components[i]

    def __iter__(self):
        return iter(self.components)


def connection(k: np.ndarray, eps: float = CONNECTION_EPS) -> tuple[np.ndarray, np.ndarray]:
    """``alpha(k)`` at points ``k`` (shape ``(..., 3)``) and the singular mask.

    ``alpha`` is set to zero on masked points.
    """
    k = np.asarray(k, float)
    kx, ky, kz = k[..., 0], k[..., 1], k[..., 2]
    kp2 = kx * kx + ky * ky
    k2 = kp2 + kz * kz
    singular = kp2 < eps * k2
    safe = np.where(singular, 1.0, kp2)
    pref = np.where(singular, 0.0, kz / (np.sqrt(k2) * safe))
    alpha = np.stack([-ky * pref, kx * pref, np.zeros_like(kx)], axis=-1)
    return alpha, singular


def curvature_field(k: np.ndarray) -> np.ndarray:
    """``k / |k|^3`` at points ``k``; ``(D x D) f = +i lambda (k/|k|^3) f``."""
    k = np.asarray(k, float)
    kk = np.sqrt(np.sum(k * k, axis=-1, keepdims=True))
    return k / kk**3


# ----------------------------------------------------------------- internals


def _lam(ndim_extra: int) -> np.ndarray:
    return HELICITY.reshape((2,) + (1,) * ndim_extra)


def _state(f, values, amp=None, grad=None):
    return PhotonWavefunctionK(f.grid, values[0], values[1], amp, grad)


def _multiply(f: PhotonWavefunctionK, m: Callable, dm: Optional[Callable] = None) -> PhotonWavefunctionK:
    """Multiply by ``m(k)`` (broadcastable against ``(2, ...)``).

    ``dm(k)`` (shape broadcastable to ``(2, ..., 3)``) enables the product
    rule for the gradient when the parent carries one.
    """
    vals = m(f.grid.nodes) * f.components
    amp = None if f.amplitude is None else (lambda k, a=f.amplitude: m(k) * a(k))
    grad = None
    if f.gradient is not None and f.amplitude is not None and dm is not None:
        def grad(k, a=f.amplitude, g=f.gradient):
            mk = np.asarray(m(k))
            return mk[..., None] * g(k) + dm(k) * a(k)[..., None]
    return _state(f, vals, amp, grad)


def _default_step(f: PhotonWavefunctionK) -> float:
    g = f.grid
    if g.family == "cartesian":
        return 1e-3 * float(np.min(g.spacing))
    return 1e-3 * float(g.params["k_max"]) / max(int(g.params["n_r"]), 1)


def _pick_method(f: PhotonWavefunctionK, method: str) -> str:
    if method == "auto":
        if f.gradient is not None:
            return "analytic"
        if f.amplitude is not None:
            return "fd"
        return "grid"
    if method not in ("analytic", "fd", "grid"):
        raise ValueError(f"unknown derivative method {method!r}")
    if method == "analytic" and f.gradient is None:
        raise ValueError("state carries no analytic gradient")
    if method == "fd" and f.amplitude is None:
        raise ValueError("finite differences off the grid need a closed-form amplitude")
    return method


def _fd_gradient(amp: Callable, h: float) -> Callable:
    def grad(k):
        k = np.asarray(k, float)
        out = []
        for i in range(3):
            dk = np.zeros(3)
            dk[i] = h
            out.append((amp(k + dk) - amp(k - dk)) / (2 * h))
        return np.stack(out, axis=-1)

    return grad


def _grid_gradient(f: PhotonWavefunctionK) -> np.ndarray:
    g = f.grid
    if g.family != "cartesian":
        raise ValueError("grid differencing requires a cartesian momentum grid")
    shape = g.shape
    dk = g.spacing
    out = np.empty((2, g.size, 3), complex)
    for c, comp in enumerate((f.f_plus, f.f_minus)):
        arr = comp.reshape(shape)
        parts = np.gradient(arr, *dk, edge_order=2)
        for i in range(3):
            out[c, :, i] = parts[i].ravel()
    return out


def _gradient_source(f, method, step):
    """(sampled gradient (2, n, 3), callable gradient or None)."""
    method = _pick_method(f, method)
    if method == "analytic":
        gfun = f.gradient
        return np.asarray(gfun(f.grid.nodes)), gfun
    if method == "fd":
        h = step if step is not None else _default_step(f)
        gfun = _fd_gradient(f.amplitude, h)
        return gfun(f.grid.nodes), gfun
    return _grid_gradient(f), None


# ------------------------------------------------------------- generators


def apply_energy(f: PhotonWavefunctionK, constants: PhysicalConstants = SI) -> GeneratorResult:
    """``(H f)(k) = hbar c |k| f(k)``."""
    hc = constants.hbar * constants.c

    def m(k):
        return hc * np.sqrt(np.sum(np.asarray(k) ** 2, axis=-1))

    def dm(k):
        k = np.asarray(k)
        return hc * k / np.sqrt(np.sum(k * k, axis=-1, keepdims=True))

    return GeneratorResult((_multiply(f, m, dm),), np.zeros(f.grid.size, bool))


def apply_momentum(f: PhotonWavefunctionK, constants: PhysicalConstants = SI) -> GeneratorResult:
    """``(P f)(k) = hbar k f(k)``, three components."""
    hbar = constants.hbar
    comps = []
    for i in range(3):
        def m(k, i=i):
            return hbar * np.asarray(k)[..., i]

        def dm(k, i=i):
            e = np.zeros(3)
            e[i] = hbar
            return np.broadcast_to(e, np.shape(k))

        comps.append(_multiply(f, m, dm))
    return GeneratorResult(tuple(comps), np.zeros(f.grid.size, bool))


def covariant_derivative(
    f: PhotonWavefunctionK,
    method: str = "auto",
    step: Optional[float] = None,
    eps: float = CONNECTION_EPS,
) -> GeneratorResult:
    """``(D_i f)_+- = d_i f_+- -+ i alpha_i f_+-`` for ``i = x, y, z``.

    Each returned component carries a closed-form amplitude whenever the
    input does, so the result can be differentiated again with ``"fd"``.
    """
    method = _pick_method(f, method)
    grad_s, gfun = _gradient_source(f, method, step)
    alpha, singular = connection(f.grid.nodes, eps)
    comps = []
    for i in range(3):
        vals = grad_s[..., i] - 1j * _lam(1) * alpha[:, i] * f.components
        vals = np.where(singular, 0.0, vals)
        amp = None
        if gfun is not None and f.amplitude is not None:
            def amp(k, i=i, a=f.amplitude, g=gfun):
                al, sing = connection(k, eps)
                lam = _lam(np.ndim(k) - 1)
                out = g(k)[..., i] - 1j * lam * al[..., i] * a(k)
                return np.where(sing, 0.0, out)
        comps.append(_state(f, vals, amp))
    return GeneratorResult(tuple(comps), singular)


def curvature(
    f: PhotonWavefunctionK,
    method: str = "auto",
    step: Optional[float] = None,
    eps: float = CONNECTION_EPS,
) -> GeneratorResult:
    """``(D x D) f`` from nested derivatives.

    The outer derivative always differences the inner result with step
    ``step`` (``"fd"``), while the inner one uses ``method``.
    """
    h = step if step is not None else _default_step(f)
    inner = covariant_derivative(f, method, h, eps)
    outer = [covariant_derivative(inner[j], "fd", h, eps) for j in range(3)]
    comps = []
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        a, b = outer[k][j], outer[j][k]  # D_j D_k f and D_k D_j f
        comps.append(_state(f, a.components - b.components))
    singular = inner.singular | np.any([o.singular for o in outer], axis=0)
    return GeneratorResult(tuple(comps), singular)


def position_operator(
    f: PhotonWavefunctionK, method: str = "auto", step: Optional[float] = None, eps: float = CONNECTION_EPS
) -> GeneratorResult:
    """``R = i D`` (center of photon energy)."""
    D = covariant_derivative(f, method, step, eps)
    comps = tuple(_scale_state(c, 1j) for c in D)
    return GeneratorResult(comps, D.singular)


def symmetric_position_operator(
    f: PhotonWavefunctionK, method: str = "auto", step: Optional[float] = None, eps: float = CONNECTION_EPS
) -> GeneratorResult:
    """Hermitian part of ``R = i D`` with respect to the ``d^3k/k`` product.

    Equals ``i D - i k / (2 k^2)``, i.e. ``c (H^-1 N + N H^-1) / 2``.
    """
    R = position_operator(f, method, step, eps)

    def m(k):
        k = np.asarray(k)
        return k / np.sum(k * k, axis=-1, keepdims=True)

    shift = m(f.grid.nodes)
    comps = []
    for i, c in enumerate(R):
        vals = c.components - 0.5j * shift[:, i] * f.components
        vals = np.where(R.singular, 0.0, vals)
        amp = None
        if c.amplitude is not None and f.amplitude is not None:
            def amp(k, i=i, ca=c.amplitude, fa=f.amplitude):
                return ca(k) - 0.5j * m(k)[..., i] * fa(k)
        comps.append(_state(f, vals, amp))
    return GeneratorResult(tuple(comps), R.singular)


def apply_boost(
    f: PhotonWavefunctionK,
    method: str = "auto",
    step: Optional[float] = None,
    eps: float = CONNECTION_EPS,
    constants: PhysicalConstants = SI,
) -> GeneratorResult:
    """``N = i hbar omega D``."""
    R = position_operator(f, method, step, eps)
    E = constants.hbar * constants.c
    comps = []
    for c in R:
        def m(k):
            return E * np.sqrt(np.sum(np.asarray(k) ** 2, axis=-1))

        comps.append(_multiply(c, m))
    return GeneratorResult(tuple(comps), R.singular)


def apply_angular_momentum(
    f: PhotonWavefunctionK,
    method: str = "auto",
    step: Optional[float] = None,
    eps: float = CONNECTION_EPS,
    constants: PhysicalConstants = SI,
) -> GeneratorResult:
    """``J = -i hbar k x D f + hbar lambda (k/|k|) f``.

    ``parts["orbital"]`` is the first addend (perpendicular to ``k``),
    ``parts["helicity"]`` the second (parallel to ``k``).
    """
    hbar = constants.hbar
    D = covariant_derivative(f, method, step, eps)
    nodes = f.grid.nodes
    kmag = np.sqrt(np.sum(nodes**2, axis=1))
    orbital, helic, total = [], [], []
    for i in range(3):
        j, l = (i + 1) % 3, (i + 2) % 3
        ov = -1j * hbar * (nodes[:, j] * D[l].components - nodes[:, l] * D[j].components)
        hv = hbar * _lam(1) * (nodes[:, i] / kmag) * f.components
        oamp = hamp = tamp = None
        if D[j].amplitude is not None and D[l].amplitude is not None and f.amplitude is not None:
            def oamp(k, j=j, l=l, Dj=D[j].amplitude, Dl=D[l].amplitude):
                k = np.asarray(k)
                return -1j * hbar * (k[..., j] * Dl(k) - k[..., l] * Dj(k))

            def hamp(k, i=i, a=f.amplitude):
                k = np.asarray(k)
                kk = np.sqrt(np.sum(k * k, axis=-1))
                return hbar * _lam(k.ndim - 1) * (k[..., i] / kk) * a(k)

            def tamp(k, o=oamp, hh=hamp):
                return o(k) + hh(k)
        orbital.append(_state(f, ov, oamp))
        helic.append(_state(f, hv, hamp))
        total.append(_state(f, ov + hv, tamp))
    return GeneratorResult(
        tuple(total), D.singular, {"orbital": tuple(orbital), "helicity": tuple(helic)}
    )


def _scale_state(s: PhotonWavefunctionK, factor: complex) -> PhotonWavefunctionK:
    amp = None if s.amplitude is None else (lambda k, a=s.amplitude: factor * a(k))
    return PhotonWavefunctionK(s.grid, factor * s.f_plus, factor * s.f_minus, amp)


def expectation(f: PhotonWavefunctionK, result: GeneratorResult | PhotonWavefunctionK):
    """``<f | A f>`` for a generator output; a scalar or a length-3 array."""
    if isinstance(result, PhotonWavefunctionK):
        return inner_product(f, result)
    vals = np.array([inner_product(f, c) for c in result.components])
    return vals[0] if len(vals) == 1 else vals


# ----------------------------------------------------------- uncertainty


def uncertainty_bound(hbar: float = 1.0) -> float:
    """``(3/2) hbar sqrt(1 + 4 sqrt(5)/9)``, equal to ``hbar sqrt(9/4 + sqrt(5))``."""
    return 1.5 * hbar * math.sqrt(1.0 + 4.0 * math.sqrt(5.0) / 9.0)


@dataclass(frozen=True)
class UncertaintyReport:
    mean_R: tuple
    mean_P: tuple
    delta_R: float
    delta_P: float
    product: float
    bound: float
    tolerance: float = 0.0
    singular_weight: float = 0.0

    @property
    def zero_mean_momentum(self) -> bool:
        """True when ``|<P>|`` is negligible against ``Delta P``.

        The photon bound is a statement about such states; for a moving
        narrow-band packet ``Delta R Delta P`` tends to ``3 hbar / 2``.
        """
        return float(np.linalg.norm(self.mean_P)) <= 1e-6 * max(self.delta_P, 1e-300)

    @property
    def satisfied(self) -> bool:
        return self.product >= self.bound * (1.0 - self.tolerance)

    def to_record(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = [float(x) for x in v] if isinstance(v, tuple) else float(v)
        return out

    def to_text(self) -> str:
        lines = []
        for key, v in self.to_record().items():
            if isinstance(v, list):
                v = " ".join(f"{x:.16e}" for x in v)
            else:
                v = f"{v:.16e}"
            lines.append(f"{key} = {v}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps(self.to_record())

    @classmethod
    def from_record(cls, rec: dict) -> "UncertaintyReport":
        kw = {}
        for f in fields(cls):
            v = rec[f.name]
            kw[f.name] = tuple(v) if isinstance(v, (list, tuple)) else float(v)
        return cls(**kw)

    @classmethod
    def from_text(cls, text: str) -> "UncertaintyReport":
        rec = {}
        for line in text.splitlines():
            if not line.strip():
                continue
            key, _, val = line.partition("=")
            parts = [float(x) for x in val.split()]
            rec[key.strip()] = parts if len(parts) > 1 else parts[0]
        return cls.from_record(rec)


def uncertainty_product(
    f: PhotonWavefunctionK,
    method: str = "auto",
    step: Optional[float] = None,
    eps: float = CONNECTION_EPS,
    constants: PhysicalConstants = SI,
    singular_tol: float = 1e-8,
) -> UncertaintyReport:
    """Position and momentum spreads of a normalized state.

    ``Delta R^2 = sum_i || (R_i - <R_i>) f ||^2`` with ``R`` the Hermitian
    (symmetrized) center-of-energy operator, and
    ``Delta P^2 = <|P - <P>|^2>``, both in the ``d^3k/k`` inner product.
    """
    n2 = norm_squared(f)
    if abs(n2 - 1.0) > 100 * NORMALIZATION_TOL:
        raise ValueError(f"uncertainty_product needs a normalized state (norm^2 = {n2:.6g})")
    hbar = constants.hbar
    w = f.grid.weights
    dens = np.abs(f.f_plus) ** 2 + np.abs(f.f_minus) ** 2
    R = symmetric_position_operator(f, method, step, eps)
    sing_w = float(np.sum(w[R.singular] * dens[R.singular]))
    if sing_w > singular_tol:
        raise ConnectionSingularityError(
            f"connection singularity: {sing_w:.3e} of the probability sits on "
            f"{int(R.singular.sum())} nodes near the k_z axis (k_perp^2 < {eps:g} k^2)"
        )
    mask = ~R.singular
    mean_R = np.empty(3)
    var_R = 0.0
    for i, c in enumerate(R):
        mean_R[i] = np.real(np.sum(w * (np.conj(f.f_plus) * c.f_plus + np.conj(f.f_minus) * c.f_minus)))
        dev = c.components - mean_R[i] * f.components * mask
        var_R += float(np.sum(w * (np.abs(dev[0]) ** 2 + np.abs(dev[1]) ** 2)))
    P = hbar * f.grid.nodes
    mean_P = np.sum((w * dens)[:, None] * P, axis=0)
    var_P = float(np.sum(w * dens * np.sum((P - mean_P) ** 2, axis=1)))
    dR, dP = math.sqrt(max(var_R, 0.0)), math.sqrt(max(var_P, 0.0))
    return UncertaintyReport(
        tuple(mean_R),
        tuple(mean_P),
        dR,
        dP,
        dR * dP,
        uncertainty_bound(hbar),
        tolerance=max(f.grid.tolerance, 1e-6),
        singular_weight=sing_w,
    )


def zero_momentum_sweep(
    n_states: int,
    seed: int,
    grid_n: int = 64,
    translate: bool = False,
    constants: PhysicalConstants = SI,
) -> list:
    """Uncertainty reports for random mirrored Gaussian pairs.

    Each state has lobes at ``+-k0`` (so ``<P> = 0``) with ``|k0|/sigma`` in
    ``[4, 8]`` and polar angle in ``[pi/4, pi/2]``, which keeps the lobes off
    the ``k_z`` axis.  ``translate`` adds a random spatial shift.
    """
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(n_states):
        s = rng.uniform(0.2, 1.0)
        km = rng.uniform(4.0, 8.0) * s
        th = rng.uniform(math.pi / 4, math.pi / 2)
        ph = rng.uniform(0.0, 2 * math.pi)
        k0 = km * np.array([math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)])
        mix = rng.uniform(0.0, 1.0)
        c = (math.sqrt(mix), math.sqrt(1.0 - mix) * np.exp(1j * rng.uniform(0, 2 * math.pi)))
        grid = MomentumGrid.cartesian_box(grid_n, km + 6 * s)
        f = make_gaussian_state(grid, k0, s, c, mirrored=True)
        if translate:
            f = translate_state(f, 0.0, rng.uniform(-2.0, 2.0, 3) / s, constants)
        rep = uncertainty_product(f, constants=constants)
        out.append({"sigma": s, "k0": k0.tolist(), "mix": mix, "report": rep})
    return out
