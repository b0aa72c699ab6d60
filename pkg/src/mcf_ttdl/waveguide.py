"""Scalar LP01 solver for radially layered weakly guiding fibers.

Internally everything is SI (metres, seconds). Group delay is reported in
ps/km, dispersion in ps/(km nm) and dispersion slope in ps/(km nm^2).

The field in each layer is expanded in ordinary Bessel functions (J0, Y0)
where the layer index exceeds n_eff and in modified Bessel functions
(I0, K0) where it does not. The (F, dF/dr) state is carried outward
through the layers; the guided-mode condition is that the growing I0 part
vanishes in the outer cladding.

The unknown is solved as delta_eff = n_eff - n_clad. Keeping the small
quantity as the variable makes n_eff(lambda) smooth to well below one ulp
of n_eff, which the finite-difference dispersion slope needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq
from scipy.special import i0, i1, j0, j1, k0, k1, y0, y1

from .errors import (
    ConvergenceFailure,
    InvalidProfile,
    NoGuidedMode,
    StencilOutOfRange,
    WavelengthOutOfRange,
)

C0 = 299_792_458.0  # m/s

# Malitson (1965) fused silica; C terms are squared resonance wavelengths in um^2
FUSED_SILICA_B = (0.6961663, 0.4079426, 0.8974794)
FUSED_SILICA_C = (0.0684043**2, 0.1162414**2, 9.896161**2)

WAVELENGTH_RANGE = (1.0e-6, 2.0e-6)
MAX_ABS_DELTA = 0.05

DEFAULT_STEP = 0.1e-9
SCAN_MARGIN = 1e-7
SCAN_RESOLUTION = 1e-5
RESIDUAL_TOL = 1e-10

# s/m -> ps/km
_S_PER_M_TO_PS_PER_KM = 1e15
# s/m^2 -> ps/(km nm)
_S_PER_M2_TO_PS_PER_KM_NM = 1e6
# s/m^3 -> ps/(km nm^2)
_S_PER_M3_TO_PS_PER_KM_NM2 = 1e-3


@dataclass(frozen=True)
class MaterialModel:
    """Three-term Sellmeier base material with a multiplicative doping offset.

    A layer with relative index ``delta`` has n = n_base(lambda) * (1 + delta).
    """

    sellmeier_b: tuple[float, float, float] = FUSED_SILICA_B
    sellmeier_c: tuple[float, float, float] = FUSED_SILICA_C
    offset_rule: str = "multiplicative"

    def __post_init__(self):
        if len(self.sellmeier_b) != 3 or len(self.sellmeier_c) != 3:
            raise ValueError("Sellmeier model needs exactly three B and three C terms")
        if self.offset_rule != "multiplicative":
            raise ValueError(f"unsupported offset rule {self.offset_rule!r}")

    def base_index(self, wavelength):
        """n_base at ``wavelength`` (m); accepts scalars or arrays."""
        lam2 = (np.asarray(wavelength, dtype=float) * 1e6) ** 2
        n2 = 1.0
        for b, c in zip(self.sellmeier_b, self.sellmeier_c):
            n2 = n2 + b * lam2 / (lam2 - c)
        return np.sqrt(n2)

    def index_derivatives(self, wavelength: float):
        """(n, dn/dl, d2n/dl2, d3n/dl3) of the base material, derivatives per metre."""
        lam = float(wavelength) * 1e6
        l2 = lam * lam
        f, f1, f2, f3 = 1.0, 0.0, 0.0, 0.0
        for b, c in zip(self.sellmeier_b, self.sellmeier_c):
            den = l2 - c
            f += b * l2 / den
            f1 += -2.0 * b * c * lam / den**2
            f2 += 2.0 * b * c * (3.0 * l2 + c) / den**3
            f3 += -24.0 * b * c * lam * (l2 + c) / den**4
        # f = n^2
        n = float(np.sqrt(f))
        n1 = f1 / (2 * n)
        n2 = (f2 - 2 * n1**2) / (2 * n)
        n3 = (f3 - 6 * n1 * n2) / (2 * n)
        return n, n1 * 1e6, n2 * 1e12, n3 * 1e18


FUSED_SILICA = MaterialModel()


def _check_wavelength(wavelength):
    lo, hi = WAVELENGTH_RANGE
    lam = np.asarray(wavelength, dtype=float)
    if np.any(~np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
        raise WavelengthOutOfRange(
            f"wavelength {wavelength!r} m outside [{lo:g}, {hi:g}] m"
        )


def refractive_index(material: MaterialModel, delta: float, wavelength):
    """Index of a layer with relative index difference ``delta`` at ``wavelength`` (m)."""
    _check_wavelength(wavelength)
    if not abs(delta) < MAX_ABS_DELTA:
        raise ValueError(f"|delta| must be < {MAX_ABS_DELTA}, got {delta}")
    return material.base_index(wavelength) * (1.0 + delta)


@dataclass(frozen=True)
class RadialProfile:
    """Concentric layers as (outer_radius [m], delta) pairs, innermost first.

    Everything beyond the last radius is outer cladding with delta = 0.
    For trench-assisted cores the layers are core, inner cladding, trench.
    """

    layers: tuple[tuple[float, float], ...]
    cladding_radius: float = 62.5e-6

    def __post_init__(self):
        layers = tuple((float(r), float(d)) for r, d in self.layers)
        object.__setattr__(self, "layers", layers)
        if not layers:
            raise InvalidProfile("profile needs at least one layer")
        radii = [r for r, _ in layers]
        if radii[0] <= 0:
            raise InvalidProfile("layer radii must be positive")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise InvalidProfile(f"outer radii must increase strictly: {radii}")
        if radii[-1] >= self.cladding_radius:
            raise InvalidProfile(
                f"profile radius {radii[-1]:.3g} m exceeds cladding radius "
                f"{self.cladding_radius:.3g} m"
            )
        for _, d in layers:
            if not abs(d) < MAX_ABS_DELTA:
                raise InvalidProfile(f"|delta| must be < {MAX_ABS_DELTA}, got {d}")

    @classmethod
    def step_index(cls, a1: float, delta1: float, **kw) -> "RadialProfile":
        return cls(((a1, delta1),), **kw)

    @classmethod
    def trench_assisted(
        cls, a1: float, delta1: float, a2: float = 0.0, w: float = 0.0,
        delta2: float = 0.0, **kw,
    ) -> "RadialProfile":
        """Core [0, a1], gap [a1, a1+a2] at cladding index, trench [a1+a2, a1+a2+w] at -delta2.

        Zero-width layers are dropped, so w = 0 or delta2 = 0 gives the
        step-index profile.
        """
        if a2 < 0 or w < 0 or delta2 < 0:
            raise InvalidProfile("a2, w and delta2 must be non-negative")
        layers = [(a1, delta1)]
        if w > 0 and delta2 > 0:
            if a2 > 0:
                layers.append((a1 + a2, 0.0))
            layers.append((a1 + a2 + w, -delta2))
        return cls(tuple(layers), **kw)

    @property
    def a1(self) -> float:
        return self.layers[0][0]

    @property
    def delta1(self) -> float:
        return self.layers[0][1]

    @property
    def trench(self) -> tuple[float, float, float]:
        """(a2, w, delta2) under the trench-assisted reading of the layers."""
        if len(self.layers) == 1:
            return (0.0, 0.0, 0.0)
        if len(self.layers) == 2 and self.layers[1][1] < 0:
            return (0.0, self.layers[1][0] - self.a1, -self.layers[1][1])
        if len(self.layers) == 3 and self.layers[1][1] == 0 and self.layers[2][1] < 0:
            return (
                self.layers[1][0] - self.a1,
                self.layers[2][0] - self.layers[1][0],
                -self.layers[2][1],
            )
        raise InvalidProfile("profile is not a trench-assisted core")

    def indices(self, material: MaterialModel, wavelength: float):
        """(per-layer indices, cladding index) at ``wavelength``."""
        n_clad = float(refractive_index(material, 0.0, wavelength))
        return [n_clad * (1.0 + d) for _, d in self.layers], n_clad


@dataclass(frozen=True)
class LayerField:
    """Field in one layer: A*J0(q r) + B*Y0(q r) if oscillatory, else A*I0 + B*K0."""

    oscillatory: bool
    q: float  # transverse wavenumber, 1/m
    a: float
    b: float

    def value(self, r):
        x = self.q * r
        if self.oscillatory:
            return self.a * j0(x) + (self.b * y0(x) if self.b else 0.0)
        return self.a * i0(x) + (self.b * k0(x) if self.b else 0.0)

    def derivative(self, r):
        x = self.q * r
        if self.oscillatory:
            return -self.q * (self.a * j1(x) + (self.b * y1(x) if self.b else 0.0))
        return self.q * (self.a * i1(x) - (self.b * k1(x) if self.b else 0.0))


@dataclass(frozen=True)
class ModeSolution:
    n_eff: float
    wavelength: float
    layer_coefficients: tuple[LayerField, ...]
    residual: float
    radii: tuple[float, ...] = ()

    def amplitude(self, r):
        """Unnormalised scalar field F(r), with F(0) = 1."""
        r = np.asarray(r, dtype=float)
        which = np.searchsorted(np.asarray(self.radii), r, side="left")
        out = np.empty_like(r)
        for i, lf in enumerate(self.layer_coefficients):
            m = which == i
            if np.any(m):
                out[m] = lf.value(r[m])
        return out

    def continuity_mismatch(self) -> float:
        """Largest jump of F or r*dF/dr across any layer interface.

        Jumps are measured against the mode's own scale, the largest of
        F(0) = 1 and |F|, |r dF/dr| at the interfaces. Far out in a trench
        the local field can be many decades below the peak, and a local
        normalisation there would only measure rounding.
        """
        pairs = list(zip(self.radii, self.layer_coefficients, self.layer_coefficients[1:]))
        scale = 1.0
        for r, inner, _ in pairs:
            scale = max(scale, abs(inner.value(r)), abs(inner.derivative(r) * r))
        worst = 0.0
        for r, inner, outer in pairs:
            df = abs(inner.value(r) - outer.value(r))
            dd = abs(inner.derivative(r) - outer.derivative(r)) * r
            worst = max(worst, df / scale, dd / scale)
        return worst


def _transverse(k, n_clad, layer_delta, delta_eff):
    """(oscillatory mask, q) with q = k*sqrt(|n_layer^2 - n_eff^2|).

    n_layer - n_eff is formed from the small quantities n_clad*delta and
    delta_eff so no digits cancel.
    """
    gap = n_clad * layer_delta - delta_eff
    diff = gap * (n_clad * (2.0 + layer_delta) + delta_eff)
    osc = diff > 0
    # q -> 0 is a removable point of the state transfer; keep Y0/K0 finite
    q = np.maximum(k * np.sqrt(np.abs(diff)), 1e-9 * k)
    return osc, q


def _coefficients(osc, q, r, f, g):
    """Expansion coefficients of the layer solution matching F=f, dF/dr=g at r."""
    x = q * r
    with np.errstate(all="ignore"):
        gq = g / q
        # J1*Y0 - J0*Y1 = 2/(pi x)
        det_o = 2.0 / (np.pi * x)
        a_o = (-f * y1(x) - y0(x) * gq) / det_o
        b_o = (j0(x) * gq + j1(x) * f) / det_o
        # I0*K1 + I1*K0 = 1/x
        a_e = x * (f * k1(x) + k0(x) * gq)
        b_e = x * (i1(x) * f - i0(x) * gq)
    return np.where(osc, a_o, a_e), np.where(osc, b_o, b_e)


def _evaluate(osc, q, a, b, r):
    x = q * r
    with np.errstate(all="ignore"):
        f = np.where(osc, a * j0(x) + b * y0(x), a * i0(x) + b * k0(x))
        g = np.where(osc, -q * (a * j1(x) + b * y1(x)), q * (a * i1(x) - b * k1(x)))
    return f, g


def _march(delta_eff, k, radii, deltas, n_clad):
    """Carry the field outward; returns per-layer (osc, q, A, B) and the residual.

    The residual is the growing part A*I0(qR) of the outer-cladding field at the
    last interface R, relative to F(0) = 1. It is continuous in n_eff and
    vanishes at guided-mode roots; only its sign is used while scanning.
    """
    delta_eff = np.asarray(delta_eff, dtype=float)
    layers = []
    osc, q = _transverse(k, n_clad, deltas[0], delta_eff)
    a, b = np.ones_like(delta_eff), np.zeros_like(delta_eff)
    layers.append((osc, q, a, b))
    for i, r in enumerate(radii):
        f, g = _evaluate(osc, q, a, b, r)
        d_next = deltas[i + 1] if i + 1 < len(deltas) else 0.0
        osc, q = _transverse(k, n_clad, d_next, delta_eff)
        a, b = _coefficients(osc, q, r, f, g)
        layers.append((osc, q, a, b))
    # outer cladding is evanescent for any n_eff above n_clad
    residual = a * i0(q * radii[-1])
    return layers, residual


def _inward(delta_eff, k, radii, deltas, n_clad):
    """Layer coefficients for every layer outside the core, built from the cladding inward.

    The outer cladding starts as a pure K0 tail; each interface then fixes
    the next layer in. Growing solutions are never carried outward, so
    rounding is not amplified far from the core.
    """
    osc, q = _transverse(k, n_clad, 0.0, delta_eff)
    a, b = 0.0, 1.0
    layers = [(osc, q, a, b)]
    for i in range(len(radii) - 1, 0, -1):
        f, g = _evaluate(osc, q, a, b, radii[i])
        osc, q = _transverse(k, n_clad, deltas[i], delta_eff)
        a, b = _coefficients(osc, q, radii[i], f, g)
        layers.append((osc, q, a, b))
    return layers[::-1]


def _solve(profile, material, wavelength, scan_resolution=SCAN_RESOLUTION):
    """Largest root of the guided-mode condition; returns (delta_eff, n_clad, layers, residual, radii)."""
    _check_wavelength(wavelength)
    n_clad = float(material.base_index(wavelength))
    radii = [r for r, _ in profile.layers]
    deltas = [d for _, d in profile.layers]
    top = n_clad * max(deltas)
    lo, hi = SCAN_MARGIN, top - SCAN_MARGIN
    if hi <= lo:
        raise NoGuidedMode(f"no index contrast above cladding (n_max - n_clad = {top:.3g})")
    k = 2.0 * np.pi / wavelength

    count = max(int(np.ceil((hi - lo) / scan_resolution)), 1) + 1
    grid = np.linspace(hi, lo, count)
    _, res = _march(grid, k, radii, deltas, n_clad)
    sign = np.sign(res)
    flips = np.nonzero(sign[:-1] * sign[1:] <= 0)[0]
    if flips.size == 0:
        raise NoGuidedMode(f"no guided LP01 root in ({n_clad:.9f}, {n_clad + top:.9f})")
    i = flips[0]
    upper, lower = grid[i], grid[i + 1]

    def resid(d):
        return float(_march(np.array(d), k, radii, deltas, n_clad)[1])

    if resid(upper) == 0.0:
        root = upper
    else:
        try:
            root = brentq(resid, lower, upper, xtol=1e-20,
                          rtol=4 * np.finfo(float).eps, maxiter=200)
        except (RuntimeError, ValueError) as exc:
            raise ConvergenceFailure(
                f"root refinement failed in [{lower}, {upper}]: {exc}"
            ) from exc
    layers, res = _march(np.array(root), k, radii, deltas, n_clad)
    res = float(res)
    if not abs(res) < RESIDUAL_TOL:
        raise ConvergenceFailure(f"residual {res:.3e} at delta_eff={root!r} above {RESIDUAL_TOL}")
    return float(root), n_clad, layers, res, radii


def solve_lp01(
    profile: RadialProfile,
    material: MaterialModel = FUSED_SILICA,
    wavelength: float = 1550e-9,
    *,
    scan_resolution: float = SCAN_RESOLUTION,
) -> ModeSolution:
    """Fundamental (largest n_eff) guided root of the layered scalar eigenproblem."""
    root, n_clad, layers, res, radii = _solve(profile, material, wavelength, scan_resolution)
    # core from the outward march, everything else from the cladding inward,
    # joined on F at the core edge where the field is of order one
    k = 2.0 * np.pi / wavelength
    deltas = [d for _, d in profile.layers]
    outer = _inward(root, k, radii, deltas, n_clad)
    core = layers[0]
    f_core = float(_evaluate(*core, radii[0])[0])
    f_out = float(_evaluate(*outer[0], radii[0])[0])
    scale = f_core / f_out
    coeffs = (LayerField(bool(core[0]), float(core[1]), float(core[2]), float(core[3])),) + tuple(
        LayerField(bool(o), float(q), float(a) * scale, float(b) * scale) for o, q, a, b in outer
    )
    return ModeSolution(n_clad + root, float(wavelength), coeffs, res, tuple(radii))


def effective_index(profile, material=FUSED_SILICA, wavelength=1550e-9) -> float:
    return solve_lp01(profile, material, wavelength).n_eff


def _stencil(profile, material, wavelength, step, offsets):
    """delta_eff = n_eff - n_clad at wavelength + j*step for each offset j."""
    if not step > 0:
        raise StencilOutOfRange(f"stencil step must be positive, got {step}")
    lams = [wavelength + j * step for j in offsets]
    lo, hi = WAVELENGTH_RANGE
    if min(lams) < lo or max(lams) > hi:
        raise StencilOutOfRange(
            f"stencil [{min(lams):.6g}, {max(lams):.6g}] m leaves material range"
        )
    return {j: _solve(profile, material, lam)[0] for j, lam in zip(offsets, lams)}


def _guided_group_index(dn, j, wavelength, step):
    """Waveguide part of the group index, dn - lambda * d(dn)/dlambda, at offset j."""
    lam = wavelength + j * step
    return dn[j] - lam * (dn[j + 1] - dn[j - 1]) / (2.0 * step)


def group_index(profile, material=FUSED_SILICA, wavelength=1550e-9, step=DEFAULT_STEP) -> float:
    """n_g = n_eff - lambda * dn_eff/dlambda.

    The cladding Sellmeier term is differentiated analytically; only the
    guided excess n_eff - n_clad goes through the central difference.
    """
    _check_wavelength(wavelength)
    dn = _stencil(profile, material, wavelength, step, (-1, 0, 1))
    n, n1, _, _ = material.index_derivatives(wavelength)
    return (n - wavelength * n1) + _guided_group_index(dn, 0, wavelength, step)


def group_delay_per_km(
    profile: RadialProfile,
    material: MaterialModel = FUSED_SILICA,
    wavelength: float = 1550e-9,
    step: float = DEFAULT_STEP,
) -> float:
    """Group delay tau_g = n_g / c in ps/km."""
    return group_index(profile, material, wavelength, step) / C0 * _S_PER_M_TO_PS_PER_KM


@dataclass(frozen=True)
class ModalParameters:
    """n_eff, tau_g [ps/km], D [ps/(km nm)] and S [ps/(km nm^2)] at one wavelength."""

    wavelength: float
    n_eff: float
    tau_g: float
    D: float
    S: float


def modal_parameters(
    profile: RadialProfile,
    material: MaterialModel = FUSED_SILICA,
    wavelength: float = 1550e-9,
    step: float = DEFAULT_STEP,
) -> ModalParameters:
    """All modal quantities from one 7-point stencil.

    The guided part of the group index is sampled at offsets -2..2; D takes
    its 3-point central first derivative and S its 5-point second
    derivative. The material part uses the analytic Sellmeier derivatives,
    d(n - l n')/dl = -l n'' and d2(n - l n')/dl2 = -n'' - l n'''.
    """
    _check_wavelength(wavelength)
    dn = _stencil(profile, material, wavelength, step, tuple(range(-3, 4)))
    g = {j: _guided_group_index(dn, j, wavelength, step) for j in range(-2, 3)}
    n, n1, n2, n3 = material.index_derivatives(wavelength)
    ng = (n - wavelength * n1) + g[0]
    dng = -wavelength * n2 + (g[1] - g[-1]) / (2.0 * step)
    d2ng = (-n2 - wavelength * n3) + (
        -g[2] + 16 * g[1] - 30 * g[0] + 16 * g[-1] - g[-2]
    ) / (12.0 * step**2)
    return ModalParameters(
        wavelength=wavelength,
        n_eff=n + dn[0],
        tau_g=ng / C0 * _S_PER_M_TO_PS_PER_KM,
        D=dng / C0 * _S_PER_M2_TO_PS_PER_KM_NM,
        S=d2ng / C0 * _S_PER_M3_TO_PS_PER_KM_NM2,
    )


def dispersion_params(
    profile: RadialProfile,
    material: MaterialModel = FUSED_SILICA,
    wavelength: float = 1550e-9,
    step: float = DEFAULT_STEP,
) -> tuple[float, float]:
    """(D [ps/(km nm)], S [ps/(km nm^2)]) by finite differences of the group delay."""
    p = modal_parameters(profile, material, wavelength, step)
    return p.D, p.S


def material_dispersion(material: MaterialModel, wavelength: float) -> float:
    """Bulk dispersion -(lambda/c) d2n/dlambda2 of the base material, ps/(km nm)."""
    _check_wavelength(wavelength)
    _, _, n2, _ = material.index_derivatives(wavelength)
    return -wavelength / C0 * n2 * _S_PER_M2_TO_PS_PER_KM_NM


def sweep(profile: RadialProfile, material: MaterialModel, wavelengths: Sequence[float],
          step: float = DEFAULT_STEP) -> list[ModalParameters]:
    return [modal_parameters(profile, material, lam, step) for lam in wavelengths]
