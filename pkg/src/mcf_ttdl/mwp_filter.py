"""Incoherent microwave-photonic FIR filter built from a set of delayed taps.

H(f) = sum_k a_k exp(-j 2 pi f tau_k), with non-negative intensity weights a_k.
Delays are in ps and frequencies in Hz unless a name says otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .errors import (
    EmptyOrSingleTap,
    EmptyTapSet,
    InsufficientPeaks,
    InvalidTapSet,
    NonUniformSpacing,
)

FLOOR_DB = -120.0
UNIFORMITY_TOL = 0.01
PEAK_TOL_DB = 0.5  # a local maximum within this of 0 dB counts as a passband


@dataclass(frozen=True)
class TapSet:
    delays: np.ndarray  # ps, ascending, first is 0
    amplitudes: np.ndarray

    def __post_init__(self):
        d = np.asarray(self.delays, dtype=float).ravel()
        a = np.asarray(self.amplitudes, dtype=float).ravel()
        if d.size == 0:
            raise EmptyTapSet("tap set is empty")
        if a.shape != d.shape:
            raise InvalidTapSet(f"{d.size} delays but {a.size} amplitudes")
        if d[0] != 0:
            raise InvalidTapSet("first delay must be 0")
        if np.any(np.diff(d) <= 0):
            raise InvalidTapSet("delays must be strictly increasing")
        if np.any(a < 0) or not np.all(np.isfinite(a)):
            raise InvalidTapSet("amplitudes must be finite and non-negative")
        if not np.any(a > 0):
            raise InvalidTapSet("at least one amplitude must be positive")
        object.__setattr__(self, "delays", d)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def from_delays(cls, delays, amplitudes=None) -> "TapSet":
        """Sort arbitrary delays (ps), shift the earliest to 0 and default to unit weights."""
        d = np.asarray(delays, dtype=float).ravel()
        if d.size == 0:
            raise EmptyTapSet("tap set is empty")
        a = np.ones_like(d) if amplitudes is None else np.asarray(amplitudes, dtype=float).ravel()
        if a.shape != d.shape:
            raise InvalidTapSet(f"{d.size} delays but {a.size} amplitudes")
        order = np.argsort(d, kind="stable")
        return cls(d[order] - d[order][0], a[order])

    @classmethod
    def uniform(cls, n: int, spacing_ps: float, amplitudes=None) -> "TapSet":
        return cls(np.arange(n) * spacing_ps, np.ones(n) if amplitudes is None else amplitudes)

    @property
    def count(self) -> int:
        return int(self.delays.size)


@dataclass(frozen=True)
class FilterResponse:
    frequency: np.ndarray  # Hz
    magnitude_db: np.ndarray  # peak-normalised, clamped at FLOOR_DB

    def to_csv(self) -> str:
        rows = ["frequency_ghz,magnitude_db"]
        rows += [f"{f * 1e-9:.9g},{m:.9g}" for f, m in zip(self.frequency, self.magnitude_db)]
        return "\n".join(rows) + "\n"


def response(taps: TapSet, frequency) -> np.ndarray:
    """Complex H(f) with amplitudes normalised by their maximum.

    Dividing by the largest weight first makes the result independent of a
    common scale factor whenever the scaled weights are exactly proportional.
    """
    f = np.asarray(frequency, dtype=float)
    a = taps.amplitudes / taps.amplitudes.max()
    phase = -2j * np.pi * np.multiply.outer(f, taps.delays * 1e-12)
    return np.exp(phase) @ a


def transfer_function(taps: TapSet, f_start: float, f_stop: float, points: int) -> FilterResponse:
    if taps is None or taps.count == 0:
        raise EmptyTapSet("tap set is empty")
    if not (f_stop > f_start >= 0):
        raise ValueError("need f_stop > f_start >= 0")
    if points < 2:
        raise ValueError("need at least 2 frequency points")
    f = np.linspace(f_start, f_stop, int(points))
    mag = np.abs(response(taps, f))
    with np.errstate(divide="ignore"):
        db = 20 * np.log10(mag / mag.max())
    return FilterResponse(f, np.maximum(db, FLOOR_DB))


def fsr(taps: TapSet) -> float:
    """Free spectral range 1/mean(delta tau), GHz."""
    if taps.count < 2:
        raise EmptyOrSingleTap("FSR needs at least two taps")
    steps = np.diff(taps.delays)
    mean = steps.mean()
    worst = np.max(np.abs(steps - mean)) / mean
    if worst > UNIFORMITY_TOL:
        raise NonUniformSpacing(
            f"tap spacings {np.round(steps, 3).tolist()} ps deviate {worst:.2%} from their mean"
        )
    return 1e3 / mean


def _main_peaks(resp: FilterResponse) -> np.ndarray:
    m = resp.magnitude_db
    idx = list(find_peaks(m)[0])
    # strict maxima at either end of the grid count too; a flat response has none
    if m[0] > m[1]:
        idx.insert(0, 0)
    if m[-1] > m[-2]:
        idx.append(len(m) - 1)
    idx = np.array(idx, dtype=int)
    return idx[m[idx] >= -PEAK_TOL_DB]


def measured_fsr(resp: FilterResponse) -> float:
    """Mean spacing of the passband peaks, GHz."""
    peaks = _main_peaks(resp)
    if peaks.size < 2:
        raise InsufficientPeaks(f"found {peaks.size} passband peak(s); need 2")
    return float(np.mean(np.diff(resp.frequency[peaks]))) * 1e-9


def mslr(resp: FilterResponse) -> float:
    """Main-lobe to strongest-sidelobe ratio between the first two passbands, dB."""
    peaks = _main_peaks(resp)
    if peaks.size < 2:
        raise InsufficientPeaks(f"found {peaks.size} passband peak(s); need 2")
    lo, hi = peaks[0], peaks[1]
    seg = resp.magnitude_db[lo:hi + 1]
    side = find_peaks(seg)[0]
    side = side[seg[side] < -PEAK_TOL_DB]
    if side.size == 0:
        raise InsufficientPeaks("no secondary lobe between the first two passbands")
    return float(-seg[side].max())


def bandwidth_3db(resp: FilterResponse) -> float:
    """Full -3 dB width of the first passband, GHz.

    A passband centred on f = 0 is mirrored, as |H(-f)| = |H(f)| for real weights.
    """
    peaks = _main_peaks(resp)
    if peaks.size < 1:
        raise InsufficientPeaks("no passband found")
    f, m = resp.frequency, resp.magnitude_db
    p = peaks[0]
    level = m[p] - 3.0

    def crossing(indices):
        prev = p
        for i in indices:
            if m[i] <= level:
                # linear interpolation between prev and i
                return f[prev] + (level - m[prev]) * (f[i] - f[prev]) / (m[i] - m[prev])
            prev = i
        return None

    right = crossing(range(p + 1, len(m)))
    left = crossing(range(p - 1, -1, -1))
    if right is None:
        raise InsufficientPeaks("first passband does not fall 3 dB within the grid")
    if left is None:
        if f[p] != 0:
            raise InsufficientPeaks("first passband does not fall 3 dB within the grid")
        left = -right
    return float(right - left) * 1e-9


@dataclass(frozen=True)
class FilterMetrics:
    fsr_measured: float  # GHz
    mslr: float  # dB
    bw3db: float  # GHz


def filter_metrics(resp: FilterResponse) -> FilterMetrics:
    return FilterMetrics(measured_fsr(resp), mslr(resp), bandwidth_3db(resp))
