"""Heterogeneous multicore fiber as a group-index-variable true-time-delay line.

Each core n is summarised at the anchor wavelength lambda0 by its group
delay tau_g0, dispersion D_n and slope S_n. Delays over a link of length L
follow the quadratic expansion

    tau_n(lambda) = L * [tau_g0 + D_n (lambda - lambda0) + S_n/2 (lambda - lambda0)^2]

and adjacent cores differ by

    dtau(lambda) = L * [dD (lambda - lambda0) + dS/2 (lambda - lambda0)^2].

Units: delays in ps, per-length delays in ps/km, D in ps/(km nm), S in
ps/(km nm^2), wavelengths and radii in metres.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DegenerateCores,
    DesignInfeasible,
    NoGuidedMode,
    NoSolutionInBox,
    OutsideValidityBand,
    SolverDivergence,
    TTDLError,
)
from .waveguide import (
    DEFAULT_STEP,
    FUSED_SILICA,
    MaterialModel,
    RadialProfile,
    modal_parameters,
)

log = logging.getLogger(__name__)

LAMBDA0 = 1550e-9
VALIDITY_BAND = 30e-9

A1_BOX = (2.5e-6, 6.0e-6)
DELTA1_BOX = (0.002, 0.008)

D_TOL = 0.05  # ps/(km nm)
TAU_TOL = 0.1  # ps/km, per designed core
TAU_SPREAD_TOL = 0.2  # ps/km, across the fiber

# (a2, w, delta2); every trench sits at delta2 = 1 % below the cladding.
# The first entry is core 1's trench.
DEFAULT_TRENCH_MENU = (
    (6e-6, 4e-6, 0.01),
    (3e-6, 2e-6, 0.01),
    (3e-6, 3e-6, 0.01),
    (4e-6, 2e-6, 0.01),
    (4e-6, 3e-6, 0.01),
    (5e-6, 2e-6, 0.01),
    (5e-6, 3e-6, 0.01),
    (7e-6, 3e-6, 0.01),
    (8e-6, 2e-6, 0.01),
)
DEFAULT_CORE1_DELTA1 = 0.005
DEFAULT_MIN_DELTA_N_EFF = 3e-4


@dataclass(frozen=True)
class CoreDesign:
    index: int
    profile: RadialProfile
    n_eff0: float
    tau_g0: float  # ps/km
    D: float  # ps/(km nm)
    S: float  # ps/(km nm^2)
    lambda0: float = LAMBDA0

    @classmethod
    def analyze(cls, profile, index=1, lambda0=LAMBDA0, material=FUSED_SILICA,
                step=DEFAULT_STEP) -> "CoreDesign":
        p = modal_parameters(profile, material, lambda0, step)
        return cls(index, profile, p.n_eff, p.tau_g, p.D, p.S, lambda0)


@dataclass(frozen=True)
class HeteroMCF:
    cores: tuple[CoreDesign, ...]
    pitch: float = 35e-6
    cladding_diameter: float = 125e-6
    lambda0: float = LAMBDA0
    delta_d_target: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "cores", tuple(self.cores))

    @property
    def n_cores(self) -> int:
        return len(self.cores)

    def adjacent_delta_n_eff(self) -> list[float]:
        return [b.n_eff0 - a.n_eff0 for a, b in zip(self.cores, self.cores[1:])]

    def tau_spread(self) -> float:
        taus = [c.tau_g0 for c in self.cores]
        return max(taus) - min(taus)

    def threshold_radii(self) -> list[float | None]:
        """Phase-matching bend radius per adjacent pair; None for identical cores."""
        out = []
        for a, b in zip(self.cores, self.cores[1:]):
            try:
                out.append(bend_threshold_radius(max(a.n_eff0, b.n_eff0),
                                                 abs(b.n_eff0 - a.n_eff0), self.pitch))
            except DegenerateCores:
                out.append(None)
        return out

    def tolerance_flags(self) -> dict[str, bool]:
        ds = [c.D for c in self.cores]
        steps = np.diff(ds)
        return {
            "d_increasing": bool(np.all(steps > 0)) if self.delta_d_target > 0 else True,
            "d_step": bool(np.all(np.abs(steps - self.delta_d_target) < D_TOL)),
            "tau_common": self.tau_spread() < TAU_SPREAD_TOL,
            "d_positive": all(d > 0 for d in ds),
        }


@dataclass(frozen=True)
class LinkDelayProfile:
    length_km: float
    wavelength: float
    delays: tuple[float, ...]  # ps, per core
    differential: tuple[float, ...]  # ps, adjacent pairs

    @property
    def uniformity(self) -> float:
        """Largest deviation of a differential delay from their mean, ps."""
        if not self.differential:
            return 0.0
        d = np.asarray(self.differential)
        return float(np.max(np.abs(d - d.mean())))


def _detuning_nm(core, wavelength, band):
    dl = wavelength - core.lambda0
    if abs(dl) > band * (1 + 1e-12):
        raise OutsideValidityBand(
            f"{wavelength * 1e9:.3f} nm is more than {band * 1e9:g} nm from "
            f"lambda0 = {core.lambda0 * 1e9:.3f} nm"
        )
    return dl * 1e9


def taylor_group_delay(core: CoreDesign, wavelength: float, length_km: float,
                       band: float = VALIDITY_BAND) -> float:
    """Absolute group delay of ``core`` over ``length_km``, ps."""
    x = _detuning_nm(core, wavelength, band)
    return length_km * (core.tau_g0 + core.D * x + 0.5 * core.S * x * x)


def differential_delay(core_n: CoreDesign, core_n1: CoreDesign, wavelength: float,
                       length_km: float, band: float = VALIDITY_BAND) -> float:
    """Delay of core n+1 relative to core n, ps; zero at lambda0 by construction."""
    x = _detuning_nm(core_n, wavelength, band)
    dd = core_n1.D - core_n.D
    ds = core_n1.S - core_n.S
    return length_km * (dd * x + 0.5 * ds * x * x)


def link_delays(mcf: HeteroMCF, wavelength: float, length_km: float,
                band: float = VALIDITY_BAND) -> LinkDelayProfile:
    delays = tuple(taylor_group_delay(c, wavelength, length_km, band) for c in mcf.cores)
    diff = tuple(
        differential_delay(a, b, wavelength, length_km, band)
        for a, b in zip(mcf.cores, mcf.cores[1:])
    )
    return LinkDelayProfile(length_km, wavelength, delays, diff)


def bend_threshold_radius(n_eff_ref: float, delta_n_eff: float, pitch: float) -> float:
    """Bend radius R_pk = pitch * n_eff / dn_eff at which adjacent cores phase-match, m."""
    if not delta_n_eff > 0:
        raise DegenerateCores(
            f"delta n_eff = {delta_n_eff!r}: identical cores have no finite phase-matching radius"
        )
    return pitch * n_eff_ref / delta_n_eff


# --- core design -----------------------------------------------------------

def _params(a1, delta1, trench, lambda0, material, step):
    prof = RadialProfile.trench_assisted(a1, delta1, *trench)
    return prof, modal_parameters(prof, material, lambda0, step)


def _design_d_only(d_target, trench, lambda0, delta1, material, step, scan=15):
    def f(a1):
        try:
            return _params(a1, delta1, trench, lambda0, material, step)[1].D - d_target
        except NoGuidedMode:
            return np.nan

    grid = np.linspace(*A1_BOX, scan)
    vals = [f(a) for a in grid]
    for lo, hi, flo, fhi in zip(grid, grid[1:], vals, vals[1:]):
        if np.isfinite(flo) and np.isfinite(fhi) and flo * fhi <= 0:
            a1 = brentq(f, lo, hi, xtol=1e-12)
            return _params(a1, delta1, trench, lambda0, material, step)[0]
    raise NoSolutionInBox(
        f"D = {d_target} ps/(km nm) not reachable for a1 in "
        f"[{A1_BOX[0] * 1e6}, {A1_BOX[1] * 1e6}] um at delta1 = {delta1:.4%}"
    )


def _design_d_tau(d_target, tau_target, trench, lambda0, material, step, initial,
                  max_iter=40):
    # unknowns scaled to um and percent so the Jacobian is well balanced
    lo = np.array([A1_BOX[0] * 1e6, DELTA1_BOX[0] * 100])
    hi = np.array([A1_BOX[1] * 1e6, DELTA1_BOX[1] * 100])
    scale = np.array([1.0, 500.0])  # residual weights: ps/(km nm), ps/km
    target = np.array([d_target, tau_target])

    def g(x):
        try:
            p = _params(x[0] * 1e-6, x[1] / 100, trench, lambda0, material, step)[1]
        except NoGuidedMode:
            return None
        return np.array([p.D, p.tau_g]) - target

    if initial is None:
        best = None
        for a in np.linspace(lo[0], hi[0], 6):
            for d in np.linspace(lo[1], hi[1], 6):
                r = g(np.array([a, d]))
                if r is not None:
                    cost = np.max(np.abs(r) / scale)
                    if best is None or cost < best[0]:
                        best = (cost, np.array([a, d]))
        if best is None:
            raise NoSolutionInBox("no guided design anywhere in the search box")
        x = best[1]
    else:
        x = np.clip(np.array([initial[0] * 1e6, initial[1] * 100]), lo, hi)

    r = g(x)
    if r is None:
        raise SolverDivergence("initial design point does not guide")
    h = np.array([1e-3, 1e-4])
    pinned = 0
    for _ in range(max_iter):
        if abs(r[0]) < 1e-4 and abs(r[1]) < 2e-3:
            return x
        jac = np.empty((2, 2))
        for j in range(2):
            xj = x.copy()
            xj[j] += h[j] if xj[j] + h[j] <= hi[j] else -h[j]
            rj = g(xj)
            if rj is None:
                raise SolverDivergence("Jacobian probe left the guided region")
            jac[:, j] = (rj - r) / (xj[j] - x[j])
        try:
            dx = np.linalg.solve(jac, -r)
        except np.linalg.LinAlgError as exc:
            raise SolverDivergence(f"singular Jacobian at a1={x[0]} um, delta1={x[1]} %") from exc
        # trust region: at most 0.5 um and 0.05 % per step
        t = min(1.0, 1.0 / max(np.max(np.abs(dx) / [0.5, 0.05]), 1e-300))
        cost = np.max(np.abs(r) / scale)
        while True:
            xn = np.clip(x + t * dx, lo, hi)
            rn = g(xn)
            if rn is not None and np.max(np.abs(rn) / scale) < cost:
                break
            t *= 0.5
            if t < 1e-6:
                raise SolverDivergence(
                    f"damped Newton stalled at a1={x[0]:.4f} um, delta1={x[1]:.4f} %, "
                    f"residual D {r[0]:+.3g}, tau {r[1]:+.3g}"
                )
        on_wall = np.any((xn <= lo) | (xn >= hi))
        pinned = pinned + 1 if on_wall else 0
        if pinned >= 5:
            raise NoSolutionInBox(
                f"design pinned to the search-box wall at a1={xn[0]:.3f} um, delta1={xn[1]:.3f} %"
            )
        x, r = xn, rn
    raise SolverDivergence(f"no convergence after {max_iter} iterations")


def design_core(
    d_target: float,
    tau_g_target: float | None = None,
    trench: tuple[float, float, float] = (0.0, 0.0, 0.0),
    lambda0: float = LAMBDA0,
    *,
    delta1: float = DEFAULT_CORE1_DELTA1,
    index: int = 1,
    initial: tuple[float, float] | None = None,
    material: MaterialModel = FUSED_SILICA,
    step: float = DEFAULT_STEP,
) -> CoreDesign:
    """Find (a1, delta1) meeting D = d_target and, if given, tau_g0 = tau_g_target.

    Without a group-delay target only a1 is varied, at the fixed ``delta1``.
    ``initial`` is an (a1 [m], delta1) starting point for the 2-D solve.
    """
    if not 10.0 <= d_target <= 25.0:
        raise ValueError(f"d_target {d_target} outside [10, 25] ps/(km nm)")
    a2, w, delta2 = trench
    if a2 < 0 or w < 0 or not 0 <= delta2 < 0.05:
        raise ValueError(f"unphysical trench {trench}")
    if tau_g_target is None:
        prof = _design_d_only(d_target, trench, lambda0, delta1, material, step)
    else:
        try:
            x = _design_d_tau(d_target, tau_g_target, trench, lambda0, material, step, initial)
        except (SolverDivergence, NoSolutionInBox):
            if initial is None:
                raise
            # warm start failed; restart from the best point of a coarse box scan
            x = _design_d_tau(d_target, tau_g_target, trench, lambda0, material, step, None)
        prof = RadialProfile.trench_assisted(x[0] * 1e-6, x[1] / 100, *trench)
    core = CoreDesign.analyze(prof, index, lambda0, material, step)
    if abs(core.D - d_target) >= D_TOL:
        raise SolverDivergence(f"achieved D {core.D:.4f} misses target {d_target}")
    if tau_g_target is not None and abs(core.tau_g0 - tau_g_target) >= TAU_TOL:
        raise SolverDivergence(f"achieved tau_g0 {core.tau_g0:.4f} misses target {tau_g_target}")
    return core


def design_hetero_mcf(
    n_cores: int = 7,
    d_start: float = 14.75,
    delta_d: float = 1.0,
    lambda0: float = LAMBDA0,
    trench_menu=DEFAULT_TRENCH_MENU,
    *,
    core1_delta1: float = DEFAULT_CORE1_DELTA1,
    min_delta_n_eff: float = DEFAULT_MIN_DELTA_N_EFF,
    pitch: float = 35e-6,
    cladding_diameter: float = 125e-6,
    material: MaterialModel = FUSED_SILICA,
) -> HeteroMCF:
    """Design cores with D_n = d_start + (n-1) delta_d sharing core 1's group delay.

    Core 1 takes the first menu trench at the fixed ``core1_delta1``. Every
    later core is designed once per menu trench, then one trench per core
    is picked so that each adjacent |n_eff| step clears ``min_delta_n_eff``
    while the worst adjacent |S_{n+1} - S_n| is as small as possible
    (ties go to the larger smallest |n_eff| step). With delta_d = 0 all
    cores are copies of core 1.
    """
    if n_cores < 1:
        raise ValueError("n_cores must be >= 1")
    trench_menu = [tuple(float(v) for v in t) for t in trench_menu]
    if not trench_menu:
        raise ValueError("trench_menu must not be empty")

    try:
        first = design_core(d_start, None, trench_menu[0], lambda0, delta1=core1_delta1,
                            index=1, material=material)
    except (TTDLError, ValueError) as exc:
        raise DesignInfeasible(f"core 1: {exc}", core=1, constraint="D") from exc
    if delta_d == 0 and n_cores > 1:
        log.warning("delta_d = 0: homogeneous design, R_pk undefined")
        cores = [first] + [
            CoreDesign(n, first.profile, first.n_eff0, first.tau_g0, first.D, first.S, lambda0)
            for n in range(2, n_cores + 1)
        ]
        return HeteroMCF(tuple(cores), pitch, cladding_diameter, lambda0, delta_d)

    # candidates[n][trench index] -> CoreDesign, for n >= 2
    candidates: dict[int, dict[int, CoreDesign]] = {1: {0: first}}
    for n in range(2, n_cores + 1):
        target = d_start + (n - 1) * delta_d
        found, errors = {}, []
        for t, trench in enumerate(trench_menu):
            seed = candidates[n - 1].get(t, first)
            try:
                found[t] = design_core(
                    target, first.tau_g0, trench, lambda0, index=n,
                    initial=(seed.profile.a1, seed.profile.delta1), material=material,
                )
            except (TTDLError, ValueError) as exc:
                errors.append(f"trench {t}: {exc}")
        if not found:
            raise DesignInfeasible(
                f"core {n} (D = {target:g}): no menu trench reaches D and the common "
                "group delay inside the search box; " + "; ".join(errors),
                core=n, constraint="D/tau",
            )
        candidates[n] = found

    # minimax path over trench choices; state value (worst |dS|, -smallest |dn|)
    best = {0: ((0.0, -np.inf), [first])}
    for n in range(2, n_cores + 1):
        nxt = {}
        for t, core in candidates[n].items():
            options = []
            for value, path in best.values():
                prev = path[-1]
                dn = abs(core.n_eff0 - prev.n_eff0)
                if dn < min_delta_n_eff:
                    continue
                ds = abs(core.S - prev.S)
                options.append(((max(value[0], ds), max(value[1], -dn)), path + [core]))
            if options:
                nxt[t] = min(options, key=lambda o: o[0])
        if not nxt:
            raise DesignInfeasible(
                f"core {n}: no trench keeps |dn_eff| to core {n - 1} above "
                f"{min_delta_n_eff:g}",
                core=n, constraint="delta_n_eff",
            )
        best = nxt
    _, path = min(best.values(), key=lambda o: o[0])
    return HeteroMCF(tuple(path), pitch, cladding_diameter, lambda0, delta_d)
