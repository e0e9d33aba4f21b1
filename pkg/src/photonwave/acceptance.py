"""Acceptance battery shared by ``photonwave selftest`` and the test suite.

Each ``criterion_N`` returns a :class:`CriterionResult`; thresholds are the
stated ones and are never loosened here.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Optional

import numpy as np

from .constants import NATURAL, SI
from . import field_synthesis as fs
from . import fock_space as fk
from . import momentum_space as ms
from . import poincare as pc
from . import thermal_radiometry as th

__all__ = ["CriterionResult", "CRITERIA", "run_one", "run_all", "format_result", "format_table"]


@dataclass
class CriterionResult:
    number: int
    title: str
    passed: bool
    summary: str
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def to_record(self) -> dict:
        return {
            "number": self.number,
            "title": self.title,
            "passed": self.passed,
            "summary": self.summary,
            "seconds": self.seconds,
            "details": _jsonable(self.details),
        }


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


# ----------------------------------------------------------------- helpers


def zero_momentum_sweep(n_states: int, seed: int, grid_n: int = 64, translate: bool = False):
    return pc.zero_momentum_sweep(n_states, seed, grid_n, translate, NATURAL)


def _curvature_states():
    g = ms.MomentumGrid.cartesian_box(32, 4.0)
    return [
        ms.make_gaussian_state(g, (1.5, 0.5, 0.7), 0.5, (0.8, 0.6j)),
        ms.make_gaussian_state(g, (-1.0, 1.2, -0.4), 0.6, (1.0, 0.0)),
        ms.make_gaussian_state(g, (0.6, -1.4, 1.1), 0.45, (0.3, 1.0j)),
    ]


def curvature_residual(f, h: float, sign: int) -> float:
    """Max relative deviation of ``(D x D) f`` from ``sign * i lambda k/k^3 f``."""
    C = pc.curvature(f, "analytic", h)
    cf = pc.curvature_field(f.grid.nodes)
    lam = pc.HELICITY[:, None]
    comps = f.components
    scale = np.abs(comps).max()
    keep = (np.abs(comps).max(axis=0) > 1e-3 * scale) & ~C.singular
    err = 0.0
    for i in range(3):
        target = sign * 1j * lam * cf[:, i] * comps
        err = max(err, float(np.abs(C[i].components - target)[:, keep].max()))
    return err / scale


def _norm_chain_packets():
    return [((2.0, 0.0, 1.0), 0.6, (1.0, 0.0), False),
            ((0.0, -1.5, 1.5), 0.7, (0.6, 0.8j), False),
            ((1.0, 1.0, 1.0), 0.5, (0.0, 1.0), True)]


def _oracle_packets():
    return [(4.0, (0.5, 0.0, 0.3), 1.0), (3.0, (0.3, 0.3, 0.0), 0.7), (4.0, (0.8, -0.4, 0.0), 0.9)]


# --------------------------------------------------------------- criteria


def criterion_1(n_states: int = 100, grid_n: int = 64) -> CriterionResult:
    bound = pc.uncertainty_bound(1.0)
    const_ok = abs(bound - 2.1180339887) < 5e-11 and abs(bound - math.sqrt(2.25 + math.sqrt(5))) < 1e-14
    sweep = zero_momentum_sweep(n_states, seed=20240601, grid_n=grid_n)
    prods = np.array([s["report"].product for s in sweep])
    floor = 2.118 * (1 - 1e-3)
    ok = const_ok and len(prods) >= 100 and bool(np.all(prods >= floor))
    return CriterionResult(
        1,
        "uncertainty bound",
        ok,
        f"bound={bound:.10f}; {len(prods)} states, min product={prods.min():.6f} (floor {floor:.6f})",
        {"bound": bound, "min_product": prods.min(), "max_product": prods.max(), "n_states": len(prods)},
    )


def criterion_2() -> CriterionResult:
    g = ms.MomentumGrid.cartesian_box(32, 4.0)
    f = ms.make_gaussian_state(g, (1.5, 0.5, 0.7), 0.5, (0.8, 0.6j))
    comm = np.zeros((3, 3), complex)
    P = pc.apply_momentum(f, NATURAL)
    R_fd = pc.position_operator(f, "fd", 1e-5)
    for j in range(3):
        RP = pc.position_operator(P[j], "fd", 1e-5)
        for i in range(3):
            comm[i, j] = pc.expectation(f, RP[i]) - ms.inner_product(f, pc.apply_momentum(R_fd[i], NATURAL)[j])
    comm_err = float(np.abs(comm - 1j * np.eye(3)).max())
    # analytic-gradient oracle for the same matrix
    R_an = pc.position_operator(f, "analytic")
    oracle_gap = float(max(
        abs(ms.inner_product(f, R_fd[i]) - ms.inner_product(f, R_an[i])) for i in range(3)
    ))
    comm_ok = comm_err < 1e-6

    h1, h2 = 1e-2, 5e-3
    literal, flipped = [], []
    for st in _curvature_states():
        literal.append((curvature_residual(st, h1, -1), curvature_residual(st, h2, -1)))
        flipped.append((curvature_residual(st, h1, +1), curvature_residual(st, h2, +1)))

    def o_h2(pairs):
        return all(e1 < 100 * h1**2 and e2 < 0.35 * e1 + 1e-12 for e1, e2 in pairs)

    curv_ok = o_h2(literal)
    return CriterionResult(
        2,
        "commutator and curvature",
        comm_ok and curv_ok,
        f"max|<[R,P]> - i delta|={comm_err:.2e}; (DxD)f = -i lam k/k^3 f residuals "
        f"{', '.join(f'{a:.2e}' for a, _ in literal)} at h={h1:g} "
        f"(with +i: {', '.join(f'{a:.1e}->{b:.1e}' for a, b in flipped)})",
        {
            "commutator_error": comm_err,
            "fd_vs_analytic_mean_R": oracle_gap,
            "commutator_ok": comm_ok,
            "curvature_minus_i": literal,
            "curvature_plus_i": flipped,
            "curvature_ok": curv_ok,
            "curvature_plus_i_ok": o_h2(flipped),
        },
    )


def criterion_3() -> CriterionResult:
    kg = ms.MomentumGrid.cartesian_box(64, 8.0)
    sg = fs.SpatialGrid.paired_with(kg)
    ref = ms.MomentumGrid.spherical(96, 64, 64, 1e-3, 10.0)
    chain = []
    for cen, sig, w, mir in _norm_chain_packets():
        f = ms.make_gaussian_state(kg, cen, sig, w, mirrored=mir)
        a = f.amplitude(ref.nodes)
        k_norm = float(np.sum(ref.weights * (np.abs(a[0]) ** 2 + np.abs(a[1]) ** 2)))
        nl = fs.nonlocal_norm(fs.helicity_split(fs.synthesize(f, sg, constants=NATURAL)))
        chain.append(abs(nl / k_norm - 1))
    direct = []
    for kmax, cen, sig in _oracle_packets():
        g8 = ms.MomentumGrid.cartesian_box(8, kmax)
        s8 = fs.SpatialGrid.paired_with(g8)
        f = ms.make_gaussian_state(g8, cen, sig, (1.0, 0.5))
        psi = fs.helicity_split(fs.synthesize(f, s8, constants=NATURAL))
        direct.append(abs(fs.nonlocal_norm_direct(psi) / fs.nonlocal_norm(psi) - 1))
    ok = max(chain) < 1e-4 and max(direct) < 0.05
    return CriterionResult(
        3,
        "norm chain",
        ok,
        f"64^3 nonlocal vs momentum norm: max rel {max(chain):.2e}; 8^3 double sum: max rel {max(direct):.3f}",
        {"chain": chain, "direct": direct},
    )


def criterion_4(n: int = 24, steps: int = 1000) -> CriterionResult:
    kg = ms.MomentumGrid.cartesian_box(n, 5.0)
    sg = fs.SpatialGrid.paired_with(kg)
    f = ms.make_gaussian_state(kg, (1.0, 0.5, 1.0), 0.7, (0.8, 0.6j))
    F = fs.synthesize(f, sg, constants=NATURAL)
    E0, P0 = fs.field_energy(F), fs.field_momentum(F)
    G = fs.evolve(F, 0.05, steps=steps, constants=NATURAL)
    dE = abs(fs.field_energy(G) / E0 - 1)
    dP = float(np.linalg.norm(fs.field_momentum(G) - P0) / np.linalg.norm(P0))
    divs, splits = [], []
    for cen, sig, w in [((1.0, 0.5, 1.0), 0.7, (0.8, 0.6j)), ((-2.0, 0.0, 0.5), 0.5, (0.0, 1.0)), ((0.3, -1.0, -1.5), 0.9, (1.0, 1.0))]:
        Fi = fs.synthesize(ms.make_gaussian_state(kg, cen, sig, w), sg, constants=NATURAL)
        divs.append(fs.divergence_residual(Fi))
        psi = fs.helicity_split(Fi)
        e_psi = sg.cell_volume * float(np.sum(np.abs(psi.psi_plus) ** 2 + np.abs(psi.psi_minus) ** 2))
        splits.append(abs(e_psi / fs.field_energy(Fi) - 1))
    divs.append(fs.divergence_residual(G))
    ok = dE < 1e-10 and dP < 1e-10 and max(divs) < 1e-10 and max(splits) < 1e-10
    return CriterionResult(
        4,
        "Maxwell / energy conservation",
        ok,
        f"{steps} steps on {n}^3: dE={dE:.1e}, dP={dP:.1e}; max div={max(divs):.1e}; helicity energy split={max(splits):.1e}",
        {"energy_drift": dE, "momentum_drift": dP, "divergence": divs, "helicity_split": splits},
    )


def criterion_5(seed: int = 5) -> CriterionResult:
    e = fs.polarization_vector([0.0, 0.0, 2.5]).e
    exact = bool(np.array_equal(e, np.array([1.0, 1.0j, 0.0]) / math.sqrt(2.0)))
    rng = np.random.default_rng(seed)
    worst, ident = 0.0, 0.0
    g = ms.MomentumGrid.cartesian(2, 1.0)
    for _ in range(20):
        ap, am = rng.uniform(0.0, 2.0, 2)
        dp, dm = rng.uniform(-math.pi, math.pi, 2)
        fp = np.full(g.size, ap * np.exp(1j * dp))
        fm = np.full(g.size, am * np.exp(1j * dm))
        S = ms.stokes_at(ms.PhotonWavefunctionK(g, fp, fm), 0)
        ref = (ap**2 + am**2, 2 * ap * am * math.cos(dm - dp), 2 * ap * am * math.sin(dm - dp), ap**2 - am**2)
        worst = max(worst, max(abs(a - b) for a, b in zip(S.as_tuple(), ref)))
        ident = max(ident, abs(S.S0**2 - (S.S1**2 + S.S2**2 + S.S3**2)) / max(S.S0**2, 1e-300))
    ok = exact and worst < 1e-12 and ident < 1e-14
    return CriterionResult(
        5,
        "polarization and Stokes",
        ok,
        f"e(z) exact={exact}; Stokes max abs err={worst:.1e}; |S0^2 - |S|^2|/S0^2 max={ident:.1e}",
        {"e_z": [complex(x) for x in e], "stokes_err": worst, "identity": ident},
    )


def coherent_setup():
    return fk.two_mode_example()


def criterion_6(seed: int = 6) -> CriterionResult:
    f, modes = coherent_setup()
    rng = np.random.default_rng(seed)
    pts = [(rng.uniform(-1e-6, 1e-6, 3), rng.uniform(0, 1e-14)) for _ in range(10)]
    worst = {}
    for N in (0.5, 1.0, 4.0):
        cs = fk.coherent_state(f, modes, N, eps=1e-8)
        errs = []
        for r, t in pts:
            q = fk.field_operator_element(cs, cs, r, t, SI)
            c = math.sqrt(N * SI.hbar * SI.c) * fs.field_at(f, r[None], t, constants=SI)[0]
            errs.append(float(np.linalg.norm(q - c) / np.linalg.norm(c)))
        worst[N] = max(errs)
    fixed = 0.0
    for n in (0, 1, 2, 3):
        s = fk.n_photon_state(f, modes, n, 4)
        for r, t in pts[:3]:
            fixed = max(fixed, float(np.abs(fk.field_operator_element(s, s, r, t, SI)).max()))
    ok = max(worst.values()) < 1e-6 and fixed == 0.0
    return CriterionResult(
        6,
        "coherent correspondence",
        ok,
        "max rel |<F> - sqrt(N hbar c) F_cl|: " + ", ".join(f"N={k:g}: {v:.1e}" for k, v in worst.items())
        + f"; fixed-number |<F>| max={fixed:.1e}",
        {"rel_error": worst, "fixed_number_field": fixed},
    )


def criterion_7() -> CriterionResult:
    nus = np.geomspace(1e12, 1e14, 10)
    Ts = np.geomspace(10.0, 1000.0, 10)
    rc = tc = 0.0
    for nu in nus:
        for T in Ts:
            closed = float(th.average_occupation(nu, T))
            rc = max(rc, abs(float(th.average_occupation(nu, T, method="recursion")) / closed - 1))
            tc = max(tc, abs(th.average_occupation_trace(nu, T) / closed - 1))
    rj = 0.0
    T = 300.0
    for x in (1e-2, 1e-3, 1e-4):
        nu = x * SI.k_B * T / SI.h
        ratio = float(th.planck_density(nu, T) / th.rayleigh_jeans(nu, T))
        # rho/rho_RJ = 1 - x/2 + x^2/12 - ...
        rj = max(rj, abs(ratio - (1 - x / 2)) / (x * x / 12))
    ok = rc < 1e-10 and tc < 1e-10 and rj < 1.01
    return CriterionResult(
        7,
        "thermal occupation",
        ok,
        f"recursion/closed max rel={rc:.1e}; trace/closed max rel={tc:.1e}; RJ second-order remainder/(x^2/12) max={rj:.4f}",
        {"recursion": rc, "trace": tc, "rayleigh_jeans": rj},
    )


def criterion_8() -> CriterionResult:
    nu_cmb, coeff = th.peak_frequency(th.CMB_TEMPERATURE)
    n_cmb = float(th.total_photon_density(th.CMB_TEMPERATURE)) * 1e-6
    tot = 0.0
    for T in (2.7, 300.0, 5778.0):
        tot = max(
            tot,
            abs(float(th.total_energy_density(T) / th.total_energy_density_closed(T)) - 1),
            abs(float(th.total_photon_density(T) / th.total_photon_density_closed(T)) - 1),
        )
    z = th.zeta3()
    ratio = float(th.total_photon_density(th.SOLAR_TEMPERATURE) / th.total_photon_density(th.CMB_TEMPERATURE))
    checks = {
        "coefficient": abs(coeff - 2.8214) < 5e-5,
        "nu_max": abs(nu_cmb / 159e9 - 1) < 0.01,
        "density": abs(n_cmb / 400 - 1) < 0.01,
        "totals": tot < 1e-8,
        "zeta3": abs(z - 1.2020569031595942) < 1e-12,
        "ratio": abs(ratio / 9.8e9 - 1) < 0.02,
    }
    return CriterionResult(
        8,
        "radiometry numbers",
        all(checks.values()),
        f"x_max={coeff:.6f}; nu_max(2.7K)={nu_cmb / 1e9:.2f} GHz; n(2.7K)={n_cmb:.1f} cm^-3; "
        f"totals rel={tot:.1e}; zeta(3)={z:.13f}; sun/CMB={ratio:.3e}",
        {"coefficient": coeff, "nu_max": nu_cmb, "density_cm3": n_cmb, "totals": tot, "zeta3": z, "ratio": ratio, "checks": checks},
    )


def criterion_9() -> CriterionResult:
    E = float(th.photon_energy(1.0))
    ok = abs(E / 1.986e-25 - 1) < 5e-4
    return CriterionResult(9, "photon energy", ok, f"E(1 m)={E:.6e} J", {"energy": E})


def criterion_10(n_states: int = 30) -> CriterionResult:
    sweep = zero_momentum_sweep(n_states, seed=777, grid_n=48, translate=True)
    prods = np.array([s["report"].product for s in sweep])
    floor = pc.uncertainty_bound(1.0) * (1 - 1e-3)
    ok = bool(np.all(prods >= floor))
    return CriterionResult(
        10,
        "bound non-violation (no minimizer required)",
        ok,
        f"{n_states} translated zero-momentum states: min product={prods.min():.4f} >= {floor:.4f}",
        {"min_product": prods.min(), "closest_approach": prods.min() / pc.uncertainty_bound(1.0) - 1},
    )


CRITERIA: dict[int, Callable[[], CriterionResult]] = {
    1: criterion_1,
    2: criterion_2,
    3: criterion_3,
    4: criterion_4,
    5: criterion_5,
    6: criterion_6,
    7: criterion_7,
    8: criterion_8,
    9: criterion_9,
    10: criterion_10,
}


def run_one(number: int) -> CriterionResult:
    t0 = time.perf_counter()
    try:
        res = CRITERIA[number]()
    except Exception as exc:  # a crash is a failure, reported as such
        res = CriterionResult(number, f"criterion {number}", False, f"error: {type(exc).__name__}: {exc}")
    res.seconds = time.perf_counter() - t0
    return res


def run_all(select: Optional[Iterable[int]] = None) -> list:
    nums = sorted(CRITERIA) if select is None else sorted(set(select))
    return [run_one(n) for n in nums]


def format_result(r: CriterionResult) -> str:
    return f"[{'PASS' if r.passed else 'FAIL'}] {r.number:2d} {r.title}: {r.summary} ({r.seconds:.1f}s)"


def format_table(results) -> str:
    lines = [format_result(r) for r in results]
    n_ok = sum(r.passed for r in results)
    lines.append(f"{n_ok}/{len(results)} criteria passed")
    return "\n".join(lines)
