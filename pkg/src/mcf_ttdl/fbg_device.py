"""Multicavity FBG device in a homogeneous multicore fiber.

Each target core carries a short array of uniform gratings at distinct
Bragg wavelengths and positions. Reading one core across wavelengths
(wavelength diversity) or one wavelength across cores (spatial diversity)
gives a set of single-bounce reflection taps whose delays are
2 * n_g * z / c, with z the grating centre.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Literal

import numpy as np
from scipy.linalg import expm

from .errors import ChannelNotFound, CoreNotFound, InvalidLayout
from .waveguide import C0

DEFAULT_GROUP_INDEX = 1.468
DEFAULT_N_EFF = 1.447
DEFAULT_GRATING_LENGTH = 5e-3
DEFAULT_DELTA_N = 1e-4
MAX_DEVICE_LENGTH = 0.2
BAND = (1.5e-6, 1.6e-6)
CHANNEL_MATCH_TOL = 0.1e-9

CANONICAL_CHANNELS = (1537.07e-9, 1541.51e-9, 1546.26e-9)

Diversity = Literal["spatial", "wavelength"]


@dataclass(frozen=True)
class GratingSpec:
    core_id: int
    z_start: float  # leading edge, m
    length: float  # m
    bragg_wavelength: float  # m
    delta_n: float = DEFAULT_DELTA_N
    reflectivity_weight: float = 1.0

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidLayout(f"grating length must be positive, got {self.length}")
        if not BAND[0] <= self.bragg_wavelength <= BAND[1]:
            raise InvalidLayout(f"Bragg wavelength {self.bragg_wavelength} m outside 1.5-1.6 um")
        if self.delta_n < 0:
            raise InvalidLayout("delta_n must be non-negative")
        if not 0 < self.reflectivity_weight <= 1:
            raise InvalidLayout("reflectivity_weight must lie in (0, 1]")

    @property
    def center(self) -> float:
        return self.z_start + 0.5 * self.length

    @property
    def z_end(self) -> float:
        return self.z_start + self.length


@dataclass(frozen=True)
class FiberSection:
    n_eff: float = DEFAULT_N_EFF
    n_g: float = DEFAULT_GROUP_INDEX
    length: float = 0.1  # m


@dataclass(frozen=True)
class MulticavityLayout:
    fiber: FiberSection
    gratings: tuple[GratingSpec, ...]
    wavelength_channels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "gratings", tuple(self.gratings))
        object.__setattr__(self, "wavelength_channels", tuple(self.wavelength_channels))
        if not 0 < self.fiber.length <= MAX_DEVICE_LENGTH:
            raise InvalidLayout(f"device length must be in (0, {MAX_DEVICE_LENGTH}] m")
        for core in self.cores:
            gs = sorted(self.in_core(core), key=lambda g: g.z_start)
            for a, b in zip(gs, gs[1:]):
                if b.z_start < a.z_end:
                    raise InvalidLayout(f"gratings overlap in core {core}")
        for g in self.gratings:
            if g.z_start < 0 or g.z_end > self.fiber.length:
                raise InvalidLayout(f"grating in core {g.core_id} extends past the fiber")

    @property
    def cores(self) -> list[int]:
        return sorted({g.core_id for g in self.gratings})

    def in_core(self, core: int) -> list[GratingSpec]:
        return [g for g in self.gratings if g.core_id == core]

    def with_group_index(self, n_g: float) -> "MulticavityLayout":
        return replace(self, fiber=replace(self.fiber, n_g=n_g))

    def channel_wavelength(self, channel) -> float:
        """Resolve a channel given as 1-based index (int) or wavelength in m (float)."""
        if isinstance(channel, (int, np.integer)) and not isinstance(channel, bool):
            if not 1 <= channel <= len(self.wavelength_channels):
                raise ChannelNotFound(f"channel index {channel} not in 1..{len(self.wavelength_channels)}")
            return self.wavelength_channels[channel - 1]
        lam = float(channel)
        for c in self.wavelength_channels:
            if abs(c - lam) <= CHANNEL_MATCH_TOL:
                return c
        raise ChannelNotFound(f"no channel at {lam * 1e9:.3f} nm")

    def grating_at(self, core: int, channel) -> GratingSpec:
        lam = self.channel_wavelength(channel)
        hits = [g for g in self.in_core(core) if abs(g.bragg_wavelength - lam) <= CHANNEL_MATCH_TOL]
        if len(hits) != 1:
            raise ChannelNotFound(
                f"core {core} has {len(hits)} gratings at {lam * 1e9:.2f} nm, expected 1"
            )
        return hits[0]


def canonical_paper_layout(
    n_g: float = DEFAULT_GROUP_INDEX,
    grating_length: float = DEFAULT_GRATING_LENGTH,
    delta_n: float = DEFAULT_DELTA_N,
    offset: float = 10e-3,
) -> MulticavityLayout:
    """Three gratings in each of cores 4, 5 and 6 of a 7-core fiber.

    Grating centres (mm from ``offset``) for channel i = 0, 1, 2:
      core 6: 20 i        (20 mm spacing)
      core 5: 6 + 21 i    (21 mm spacing)
      core 4: 12 + 22 i   (22 mm spacing)
    so same-channel gratings in adjacent cores are displaced by 6, 7 and 8 mm.
    """
    spacing = {6: 20e-3, 5: 21e-3, 4: 22e-3}
    start = {6: 0.0, 5: 6e-3, 4: 12e-3}
    gratings = []
    for core in (4, 5, 6):
        for i, lam in enumerate(CANONICAL_CHANNELS):
            centre = offset + start[core] + i * spacing[core]
            gratings.append(GratingSpec(core, centre - grating_length / 2, grating_length,
                                        lam, delta_n))
    far = max(g.z_end for g in gratings)
    fiber = FiberSection(DEFAULT_N_EFF, n_g, round(far + offset, 6))
    return MulticavityLayout(fiber, tuple(gratings), CANONICAL_CHANNELS)


@dataclass(frozen=True)
class ReflectionSpectrum:
    wavelengths: np.ndarray  # m
    r: np.ndarray  # complex amplitude reflection
    t: np.ndarray = field(default=None)  # complex amplitude transmission

    @property
    def reflectivity(self) -> np.ndarray:
        return np.abs(self.r) ** 2

    @property
    def transmissivity(self) -> np.ndarray:
        return np.abs(self.t) ** 2

    def reflectivity_db(self, floor_db: float = -120.0) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.maximum(10 * np.log10(self.reflectivity), floor_db)


def _coupling(spec: GratingSpec, n_eff: float, lam):
    kappa = np.pi * spec.delta_n / lam
    delta = 2 * np.pi * n_eff * (1.0 / lam - 1.0 / spec.bragg_wavelength)
    return kappa, delta


def uniform_grating_response(spec: GratingSpec, n_eff: float, wavelengths) -> ReflectionSpectrum:
    """Closed-form coupled-mode reflection of a uniform grating.

    r = -kappa sinh(sL) / (delta sinh(sL) + i s cosh(sL)),  s^2 = kappa^2 - delta^2
    """
    lam = np.asarray(wavelengths, dtype=float)
    kappa, delta = _coupling(spec, n_eff, lam)
    s = np.sqrt((kappa**2 - delta**2).astype(complex))
    sl = s * spec.length
    den = delta * np.sinh(sl) + 1j * s * np.cosh(sl)
    # s -> 0 limit: sinh(sL)/s -> L
    small = np.abs(sl) < 1e-8
    sinh_over_s = np.where(small, spec.length, np.sinh(sl) / np.where(small, 1, s))
    den = np.where(small, delta * spec.length + 1j, den / np.where(small, 1, s))
    r = -kappa * sinh_over_s / den
    t = 1.0 / den
    return ReflectionSpectrum(lam, r, t)


def transfer_matrix_response(spec: GratingSpec, n_eff: float, wavelengths,
                             sections: int = 50) -> ReflectionSpectrum:
    """Reflection from a product of per-section matrix exponentials of the coupled-mode system.

    Forward/backward amplitudes obey d/dz [R, S] = [[i d, i k], [-i k, -i d]] [R, S];
    the device matrix T is built section by section and r = -T21/T22, t = 1/T22.
    """
    lam = np.atleast_1d(np.asarray(wavelengths, dtype=float))
    dz = spec.length / sections
    r = np.empty(lam.shape, dtype=complex)
    t = np.empty(lam.shape, dtype=complex)
    for i, lm in enumerate(lam):
        kappa, delta = _coupling(spec, n_eff, lm)
        gen = np.array([[1j * delta, 1j * kappa], [-1j * kappa, -1j * delta]]) * dz
        step = expm(gen)
        m = np.eye(2, dtype=complex)
        for _ in range(sections):
            m = step @ m
        r[i] = -m[1, 0] / m[1, 1]
        t[i] = 1.0 / m[1, 1]
    return ReflectionSpectrum(lam, r, t)


def core_spectrum(layout: MulticavityLayout, core: int, wavelengths) -> ReflectionSpectrum:
    """Incoherent sum of the single-grating reflectivities of one core."""
    gs = layout.in_core(core)
    if not gs:
        raise CoreNotFound(f"core {core} carries no gratings")
    lam = np.asarray(wavelengths, dtype=float)
    power = np.zeros(lam.shape)
    for g in gs:
        power += g.reflectivity_weight**2 * uniform_grating_response(g, layout.fiber.n_eff, lam).reflectivity
    power = np.minimum(power, 1.0)
    return ReflectionSpectrum(lam, np.sqrt(power).astype(complex), np.sqrt(1 - power).astype(complex))


def _select(layout: MulticavityLayout, mode: Diversity, key) -> list[GratingSpec]:
    if mode == "wavelength":
        if key not in layout.cores:
            raise CoreNotFound(f"core {key} not in layout (cores {layout.cores})")
        return sorted(layout.in_core(key), key=lambda g: g.center)
    if mode == "spatial":
        lam = layout.channel_wavelength(key)
        return sorted((layout.grating_at(c, lam) for c in layout.cores), key=lambda g: g.center)
    raise ValueError(f"diversity must be 'spatial' or 'wavelength', got {mode!r}")


def grating_delay(layout: MulticavityLayout, grating: GratingSpec) -> float:
    """Round-trip delay from the fiber input to the grating centre, ps."""
    return 2.0 * layout.fiber.n_g * grating.center / C0 * 1e12


def tap_delays(layout: MulticavityLayout, mode: Diversity, key,
               relative: bool = True) -> np.ndarray:
    """Round-trip tap delays in ps, ascending.

    ``key`` is the core number in wavelength mode and the channel (1-based
    index or wavelength in m) in spatial mode. With ``relative`` the
    earliest tap is moved to 0.
    """
    tau = np.array([grating_delay(layout, g) for g in _select(layout, mode, key)])
    return tau - tau[0] if relative else tau


def tap_amplitudes(layout: MulticavityLayout, mode: Diversity, key,
                   source: Literal["weight", "reflectivity"] = "weight") -> np.ndarray:
    """Linear tap amplitudes in the same order as :func:`tap_delays`.

    ``source="reflectivity"`` uses the field amplitude sqrt(R_peak) of each
    grating, scaled by its weight.
    """
    gs = _select(layout, mode, key)
    w = np.array([g.reflectivity_weight for g in gs])
    if source == "weight":
        return w
    if source == "reflectivity":
        peak = np.array([
            uniform_grating_response(g, layout.fiber.n_eff, [g.bragg_wavelength]).reflectivity[0]
            for g in gs
        ])
        return w * np.sqrt(peak)
    raise ValueError(f"unknown amplitude source {source!r}")


def spectrum_csv(spectrum: ReflectionSpectrum) -> str:
    lines = ["wavelength_nm,reflectivity_db"]
    for lam, db in zip(spectrum.wavelengths, spectrum.reflectivity_db()):
        lines.append(f"{lam * 1e9:.9g},{db:.9g}")
    return "\n".join(lines) + "\n"
