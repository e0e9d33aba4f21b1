"""Second quantization on a finite set of discrete photon modes.

Each mode is a momentum node ``k_i`` with helicity ``lambda_i`` and the
invariant-measure weight ``w_i`` of its parent grid.  The continuum relation
``[a(k), a^dag(k')] = k delta^3(k - k')`` is discretized as

    [a_i, a_j^dag] = delta_ij kappa_i,   kappa_i = 1 / w_i,

so ``int d^3k/k g(k) a(k)`` becomes ``sum_i sqrt(w_i) g_i b_i`` with unit
bosonic operators ``b_i = a_i / sqrt(kappa_i)``.  With that bookkeeping
``a_f^dag = sum_i sqrt(w_i) f_i b_i^dag`` and ``[a_f, a_f^dag] = <f|f>``.

States live in the occupation basis ``{(n_1..n_M) : sum n <= N_max}``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy import sparse, stats

from .constants import SI, PhysicalConstants
from .field_synthesis import polarization_vectors
from .momentum_space import MomentumGrid, PhotonWavefunctionK

__all__ = [
    "DEFAULT_TAIL",
    "ModeSet",
    "FockBasis",
    "FockState",
    "NPhotonWavefunction",
    "commutator_check",
    "creation_operator",
    "annihilation_operator",
    "smeared_creation",
    "create_photon",
    "n_photon_state",
    "symmetrize",
    "field_operator_element",
    "field_expectation",
    "hamiltonian_expectation",
    "number_expectation",
    "number_distribution",
    "poisson_cutoff",
    "coherent_state",
    "free_evolution",
    "two_mode_example",
]

DEFAULT_TAIL = 1e-8
_TWO_PI_32 = (2 * math.pi) ** 1.5


@dataclass(frozen=True, eq=False)
class ModeSet:
    """Discrete modes ``(k_i, lambda_i, w_i)``; ``omega_i = c |k_i|``."""

    k: np.ndarray
    helicity: np.ndarray
    weights: np.ndarray
    node_index: Optional[np.ndarray] = None
    grid: Optional[MomentumGrid] = field(default=None, repr=False)

    def __post_init__(self):
        k = np.atleast_2d(np.asarray(self.k, float))
        lam = np.asarray(self.helicity, int).ravel()
        w = np.asarray(self.weights, float).ravel()
        if k.shape != (len(lam), 3) or len(w) != len(lam):
            raise ValueError("k, helicity and weights must describe the same modes")
        if len(lam) == 0:
            raise ValueError("mode set is empty")
        if not np.all(np.isin(lam, (1, -1))):
            raise ValueError("helicities must be +1 or -1")
        if np.any(w <= 0):
            raise ValueError("mode weights must be positive")
        if np.any(np.linalg.norm(k, axis=1) == 0):
            raise ValueError("a mode at k = 0 is not allowed")
        keys = {(tuple(ki), int(li)) for ki, li in zip(k, lam)}
        if len(keys) != len(lam):
            raise ValueError("modes must be distinct (k, helicity) pairs")
        for name, v in (("k", k), ("helicity", lam), ("weights", w)):
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        if self.node_index is not None:
            idx = np.asarray(self.node_index, int).ravel()
            if len(idx) != len(lam):
                raise ValueError("node_index must list one node per mode")
            object.__setattr__(self, "node_index", idx)

    @classmethod
    def from_grid(cls, grid: MomentumGrid, nodes: Sequence[int], helicities: Sequence[int]) -> "ModeSet":
        nodes = np.asarray(nodes, int)
        return cls(grid.nodes[nodes], np.asarray(helicities), grid.weights[nodes], nodes, grid)

    def __len__(self) -> int:
        return len(self.helicity)

    @property
    def kmag(self) -> np.ndarray:
        return np.linalg.norm(self.k, axis=1)

    @property
    def kappa(self) -> np.ndarray:
        return 1.0 / self.weights

    def omega(self, constants: PhysicalConstants = SI) -> np.ndarray:
        return constants.c * self.kmag

    def restrict(self, f: PhotonWavefunctionK) -> np.ndarray:
        """Mode amplitudes ``f_{lambda_i}(k_i)`` of a grid wavefunction."""
        if self.node_index is None or self.grid is None:
            raise ValueError("mode set was not built from a grid")
        if not f.grid.same_as(self.grid):
            raise ValueError("wavefunction lives on a different grid than the mode set")
        comp = np.where(self.helicity == 1, f.f_plus[self.node_index], f.f_minus[self.node_index])
        return np.asarray(comp, complex)

    def same_as(self, other: "ModeSet") -> bool:
        return (
            self is other
            or (
                np.array_equal(self.k, other.k)
                and np.array_equal(self.helicity, other.helicity)
                and np.array_equal(self.weights, other.weights)
            )
        )

    def metadata(self) -> dict:
        return {
            "k": self.k.tolist(),
            "helicity": self.helicity.tolist(),
            "weights": self.weights.tolist(),
        }


class FockBasis:
    """Occupation tuples with total photon number at most ``n_max``, ordered by sector."""

    _cache: dict = {}

    def __new__(cls, n_modes: int, n_max: int):
        key = (int(n_modes), int(n_max))
        if key in cls._cache:
            return cls._cache[key]
        if n_modes < 1 or n_max < 0:
            raise ValueError("need at least one mode and a non-negative cutoff")
        self = super().__new__(cls)
        self.n_modes, self.n_max = key
        tuples = []
        for total in range(self.n_max + 1):
            for combo in itertools.combinations_with_replacement(range(self.n_modes), total):
                occ = [0] * self.n_modes
                for i in combo:
                    occ[i] += 1
                tuples.append(tuple(occ))
        self.tuples = np.array(tuples, dtype=int).reshape(len(tuples), self.n_modes)
        self.index = {t: i for i, t in enumerate(tuples)}
        self.total = self.tuples.sum(axis=1)
        cls._cache[key] = self
        return self

    def __len__(self) -> int:
        return len(self.tuples)

    @cached_property
    def lowering(self) -> list:
        """Sparse ``b_i`` matrices (truncated: nothing is raised past ``n_max``)."""
        mats = []
        D = len(self)
        for i in range(self.n_modes):
            rows, cols, vals = [], [], []
            for col, occ in enumerate(self.tuples):
                if occ[i] > 0:
                    lower = list(occ)
                    lower[i] -= 1
                    rows.append(self.index[tuple(lower)])
                    cols.append(col)
                    vals.append(math.sqrt(occ[i]))
            mats.append(sparse.csr_matrix((vals, (rows, cols)), shape=(D, D)))
        return mats

    @cached_property
    def raising(self) -> list:
        return [b.T.conj().tocsr() for b in self.lowering]

    def guarded(self) -> np.ndarray:
        """Indices of the subspace ``sum n < n_max`` where the CCR hold exactly."""
        return np.nonzero(self.total < self.n_max)[0]


@dataclass(frozen=True, eq=False)
class FockState:
    """Amplitudes over :class:`FockBasis` tuples for a given :class:`ModeSet`."""

    modes: ModeSet
    n_max: int
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, complex).ravel()
        if len(a) != len(self.basis):
            raise ValueError(f"expected {len(self.basis)} amplitudes, got {len(a)}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @property
    def basis(self) -> FockBasis:
        return FockBasis(len(self.modes), self.n_max)

    @classmethod
    def vacuum(cls, modes: ModeSet, n_max: int) -> "FockState":
        a = np.zeros(len(FockBasis(len(modes), n_max)), complex)
        a[0] = 1.0
        return cls(modes, n_max, a)

    @classmethod
    def from_dict(cls, modes: ModeSet, n_max: int, amps: Mapping[tuple, complex]) -> "FockState":
        """General superposition of basis states; tuples beyond ``n_max`` are rejected."""
        basis = FockBasis(len(modes), n_max)
        a = np.zeros(len(basis), complex)
        for occ, val in amps.items():
            occ = tuple(int(x) for x in occ)
            if len(occ) != len(modes) or min(occ) < 0:
                raise ValueError(f"bad occupation tuple {occ}")
            if sum(occ) > n_max:
                raise ValueError(f"occupation {occ} exceeds the cutoff N_max={n_max}")
            a[basis.index[occ]] += val
        return cls(modes, n_max, a)

    def as_dict(self, threshold: float = 0.0) -> dict:
        return {
            tuple(int(x) for x in occ): complex(val)
            for occ, val in zip(self.basis.tuples, self.amplitudes)
            if abs(val) > threshold
        }

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0:
            raise ValueError("null state cannot be normalized")
        return FockState(self.modes, self.n_max, self.amplitudes / n)

    def inner(self, other: "FockState") -> complex:
        _check_compatible(self, other)
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def _check_compatible(a: FockState, b: FockState) -> None:
    if not a.modes.same_as(b.modes):
        raise ValueError("Fock states are defined over different mode sets")
    if a.n_max != b.n_max:
        raise ValueError("Fock states have different truncations")


def _check_mode(modes: ModeSet, i: int) -> None:
    if not 0 <= i < len(modes):
        raise IndexError(f"mode index {i} out of range for {len(modes)} modes")


def annihilation_operator(modes: ModeSet, n_max: int, i: int) -> sparse.csr_matrix:
    """``a_i = sqrt(kappa_i) b_i`` on the truncated basis."""
    _check_mode(modes, i)
    return math.sqrt(modes.kappa[i]) * FockBasis(len(modes), n_max).lowering[i]


def creation_operator(modes: ModeSet, n_max: int, i: int) -> sparse.csr_matrix:
    _check_mode(modes, i)
    return math.sqrt(modes.kappa[i]) * FockBasis(len(modes), n_max).raising[i]


def commutator_check(modes: ModeSet, i: int, j: int, n_max: int = 4) -> complex:
    """Scalar ``c`` with ``[a_i, a_j^dag] = c * 1`` on the guarded subspace.

    Raises if the truncated commutator is not proportional to the identity there.
    """
    a = annihilation_operator(modes, n_max, i)
    ad = creation_operator(modes, n_max, j)
    C = (a @ ad - ad @ a).toarray()
    g = FockBasis(len(modes), n_max).guarded()
    block = C[np.ix_(g, g)]
    c = block[0, 0] if len(g) else 0.0
    if not np.allclose(block, c * np.eye(len(g)), rtol=1e-13, atol=1e-13 * max(1.0, abs(c))):
        raise ArithmeticError("truncated commutator is not a multiple of the identity")
    return complex(c)


def smeared_creation(modes: ModeSet, n_max: int, amps: np.ndarray) -> sparse.csr_matrix:
    """``a_f^dag = sum_i sqrt(w_i) f_i b_i^dag`` for mode amplitudes ``f_i``."""
    amps = np.asarray(amps, complex)
    if amps.shape != (len(modes),):
        raise ValueError("need one amplitude per mode")
    basis = FockBasis(len(modes), n_max)
    D = len(basis)
    out = sparse.csr_matrix((D, D), dtype=complex)
    for i, (fi, wi) in enumerate(zip(amps, modes.weights)):
        if fi != 0:
            out = out + (math.sqrt(wi) * fi) * basis.raising[i]
    return out.tocsr()


def _mode_amplitudes(f, modes: ModeSet) -> np.ndarray:
    if isinstance(f, PhotonWavefunctionK):
        return modes.restrict(f)
    amps = np.asarray(f, complex)
    if amps.shape != (len(modes),):
        raise ValueError("need one amplitude per mode")
    return amps


def _require_normalized(amps, modes, tol):
    n2 = float(np.sum(modes.weights * np.abs(amps) ** 2))
    if abs(n2 - 1.0) > tol:
        raise ValueError(f"wavefunction is not normalized on the mode set (norm^2 = {n2:.12g})")


def create_photon(f, modes: ModeSet, n_max: int = 1, tol: float = 1e-10) -> FockState:
    """``a_f^dag |0>`` for ``f`` normalized over the modes (grid state or amplitude array)."""
    if n_max < 1:
        raise ValueError("N_max must be at least 1")
    amps = _mode_amplitudes(f, modes)
    _require_normalized(amps, modes, tol)
    vac = FockState.vacuum(modes, n_max)
    return FockState(modes, n_max, smeared_creation(modes, n_max, amps) @ vac.amplitudes)


def n_photon_state(f, modes: ModeSet, n: int, n_max: Optional[int] = None, tol: float = 1e-10) -> FockState:
    """Normalized ``(a_f^dag)^n |0> / sqrt(n!)``."""
    n_max = n if n_max is None else n_max
    if n > n_max:
        raise ValueError("photon number exceeds the cutoff")
    amps = _mode_amplitudes(f, modes)
    _require_normalized(amps, modes, tol)
    A = smeared_creation(modes, n_max, amps)
    v = FockState.vacuum(modes, n_max).amplitudes
    for m in range(1, n + 1):
        v = A @ v / math.sqrt(m)
    return FockState(modes, n_max, v)


# ---------------------------------------------------------- N-photon data


@dataclass(frozen=True, eq=False)
class NPhotonWavefunction:
    """Amplitude ``psi[i_1, ..., i_N]`` over N mode indices."""

    modes: ModeSet
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amplitudes, complex)
        if a.ndim < 1 or any(s != len(self.modes) for s in a.shape):
            raise ValueError("amplitude array must have one axis of length M per photon")
        object.__setattr__(self, "amplitudes", a)

    @property
    def n(self) -> int:
        return self.amplitudes.ndim

    def is_symmetric(self, atol: float = 0.0) -> bool:
        a = self.amplitudes
        return all(
            np.allclose(a, np.transpose(a, p), rtol=0, atol=atol)
            for p in itertools.permutations(range(self.n))
        )

    def to_fock(self, n_max: Optional[int] = None) -> FockState:
        """``(1/sqrt(N!)) sum psi[i..] prod sqrt(w_i) b_i^dag |0>`` (symmetric part only)."""
        n_max = self.n if n_max is None else n_max
        if self.n > n_max:
            raise ValueError("photon number exceeds the cutoff")
        basis = FockBasis(len(self.modes), n_max)
        sw = np.sqrt(self.modes.weights)
        out = np.zeros(len(basis), complex)
        for idx in itertools.product(range(len(self.modes)), repeat=self.n):
            val = self.amplitudes[idx]
            if val == 0:
                continue
            occ = [0] * len(self.modes)
            for i in idx:
                occ[i] += 1
            # b^dag product on |0> gives sqrt(prod n_i!) |occ>
            fac = math.sqrt(math.prod(math.factorial(m) for m in occ))
            out[basis.index[tuple(occ)]] += val * np.prod(sw[list(idx)]) * fac
        return FockState(self.modes, n_max, out / math.sqrt(math.factorial(self.n)))


def symmetrize(raw: NPhotonWavefunction) -> NPhotonWavefunction:
    """Average over all ``N!`` permutations of the photon arguments."""
    a = raw.amplitudes
    perms = list(itertools.permutations(range(raw.n)))
    acc = np.zeros_like(a)
    for p in perms:
        acc = acc + np.transpose(a, p)
    return NPhotonWavefunction(raw.modes, acc / len(perms))


# ------------------------------------------------------------ observables


def _field_operators(modes: ModeSet, n_max: int, r, t, constants):
    """Sparse matrices of the three Cartesian components of ``F(r, t)``."""
    basis = FockBasis(len(modes), n_max)
    e = polarization_vectors(modes.k)
    coef = math.sqrt(constants.hbar * constants.c) * modes.kmag * np.sqrt(modes.weights) / _TWO_PI_32
    phase = np.exp(1j * (modes.k @ np.asarray(r, float) - modes.omega(constants) * t))
    D = len(basis)
    ops = [sparse.csr_matrix((D, D), dtype=complex) for _ in range(3)]
    for i in range(len(modes)):
        if modes.helicity[i] == 1:
            term, op = coef[i] * phase[i], basis.lowering[i]
        else:
            term, op = coef[i] * np.conj(phase[i]), basis.raising[i]
        for a in range(3):
            if e[i, a] != 0:
                ops[a] = ops[a] + (term * e[i, a]) * op
    return ops


def field_operator_element(
    bra: FockState, ket: FockState, r: Sequence[float], t: float = 0.0, constants: PhysicalConstants = SI
) -> np.ndarray:
    """``<bra| F(r, t) |ket>`` as a complex 3-vector.

    ``F = sqrt(hbar c) sum_i k_i sqrt(w_i) / (2 pi)^{3/2} e(k_i) [b_i e^{i(k.r - w t)}``
    for ``lambda_i = +1`` and ``b_i^dag e^{-i(k.r - w t)}`` for ``lambda_i = -1]``.
    """
    _check_compatible(bra, ket)
    ops = _field_operators(ket.modes, ket.n_max, r, t, constants)
    return np.array([np.vdot(bra.amplitudes, op @ ket.amplitudes) for op in ops])


def field_expectation(state: FockState, r, t: float = 0.0, constants: PhysicalConstants = SI) -> np.ndarray:
    """``<F(r, t)>`` for one point or an array of points ``(..., 3)``."""
    r = np.asarray(r, float)
    pts = r.reshape(-1, 3)
    vals = np.array([field_operator_element(state, state, p, t, constants) for p in pts])
    return vals.reshape(r.shape)


def number_distribution(state: FockState) -> np.ndarray:
    """Probability of each total photon number ``0..N_max``."""
    p = np.abs(state.amplitudes) ** 2
    return np.bincount(state.basis.total, weights=p, minlength=state.n_max + 1)


def number_expectation(state: FockState) -> float:
    p = np.abs(state.amplitudes) ** 2
    s = float(p.sum())
    if s == 0:
        raise ValueError("expectation value of the null state")
    return float(p @ state.basis.total) / s


def hamiltonian_expectation(state: FockState, constants: PhysicalConstants = SI) -> float:
    """``<sum_i hbar omega_i b_i^dag b_i>`` (no vacuum term)."""
    p = np.abs(state.amplitudes) ** 2
    s = float(p.sum())
    if s == 0:
        raise ValueError("expectation value of the null state")
    energies = state.basis.tuples @ (constants.hbar * state.modes.omega(constants))
    return float(p @ energies) / s


def free_evolution(state: FockState, t: float, constants: PhysicalConstants = SI) -> FockState:
    """``exp(-i H t / hbar)`` applied basis-state by basis-state."""
    energies = state.basis.tuples @ state.modes.omega(constants)
    return FockState(state.modes, state.n_max, state.amplitudes * np.exp(-1j * energies * t))


# ------------------------------------------------------------ coherent states


def poisson_cutoff(n_avg: float, eps: float = DEFAULT_TAIL) -> int:
    """Smallest ``N_max`` with Poisson tail ``P(n > N_max) < eps``."""
    if n_avg < 0:
        raise ValueError("mean photon number must be non-negative")
    if not 0 < eps < 1:
        raise ValueError("tail bound must lie in (0, 1)")
    if n_avg == 0:
        return 0
    n = int(n_avg)
    while stats.poisson.sf(n, n_avg) >= eps:
        n += 1
    return n


def coherent_state(
    f,
    modes: ModeSet,
    n_avg: float,
    n_max: Optional[int] = None,
    eps: float = DEFAULT_TAIL,
    tol: float = 1e-10,
) -> FockState:
    """``exp(-N/2) sum_n N^{n/2} / n! (a_f^dag)^n |0>`` truncated at ``N_max``.

    ``N_max`` defaults to :func:`poisson_cutoff`; an explicit value whose tail
    exceeds ``eps`` is an error.  The state's norm is ``1 - tail``.
    """
    if n_avg < 0:
        raise ValueError("mean photon number must be non-negative")
    if n_max is None:
        n_max = max(1, poisson_cutoff(n_avg, eps))
    elif n_avg > 0 and stats.poisson.sf(n_max, n_avg) >= eps:
        need = poisson_cutoff(n_avg, eps)
        raise ValueError(f"Poisson tail beyond N_max={n_max} exceeds {eps:g}; use N_max >= {need}")
    amps = _mode_amplitudes(f, modes)
    _require_normalized(amps, modes, tol)
    A = smeared_creation(modes, n_max, amps)
    v = FockState.vacuum(modes, n_max).amplitudes * math.exp(-0.5 * n_avg)
    out = v.copy()
    root = math.sqrt(n_avg)
    for n in range(1, n_max + 1):
        v = (root / n) * (A @ v)
        out += v
    return FockState(modes, n_max, out)


def two_mode_example(
    amp_plus: complex = 0.6 * np.exp(0.3j),
    amp_minus: complex = 0.8 * np.exp(-1.1j),
    k_max: float = 2e7,
    n: int = 8,
    nodes: tuple = (100, 300),
) -> tuple[PhotonWavefunctionK, ModeSet]:
    """A normalized wavefunction living on two modes, one of each helicity.

    Mode ``nodes[0]`` of an ``n^3`` Cartesian grid carries ``f_+`` and
    ``nodes[1]`` carries ``f_-``; the default ``k_max`` is in 1/m.
    """
    grid = MomentumGrid.cartesian_box(n, k_max)
    a, b = nodes
    if a == b:
        raise ValueError("the two modes must sit on different nodes")
    modes = ModeSet.from_grid(grid, [a, b], [1, -1])
    fp = np.zeros(grid.size, complex)
    fm = np.zeros(grid.size, complex)
    fp[a] = amp_plus
    fm[b] = amp_minus
    if abs(amp_plus) == 0 and abs(amp_minus) == 0:
        raise ValueError("null state cannot be normalized")
    n2 = float(np.sum(grid.weights * (np.abs(fp) ** 2 + np.abs(fm) ** 2)))
    return PhotonWavefunctionK(grid, fp / math.sqrt(n2), fm / math.sqrt(n2), normalized=True), modes
