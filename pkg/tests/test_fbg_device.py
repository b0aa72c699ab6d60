import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcf_ttdl import fbg_device as fb
from mcf_ttdl.errors import ChannelNotFound, CoreNotFound, InvalidLayout
from mcf_ttdl.fbg_device import FiberSection, GratingSpec, MulticavityLayout
from mcf_ttdl.mwp_filter import TapSet, fsr
from mcf_ttdl.waveguide import C0

LB = 1550e-9
N_EFF = 1.447


def grating_for(kl, length=5e-3, lam_b=LB):
    # delta_n giving kappa*L = kl at the Bragg wavelength
    return GratingSpec(1, 0.0, length, lam_b, kl * lam_b / (np.pi * length))


@pytest.fixture(scope="module")
def layout():
    return fb.canonical_paper_layout()


# --- canonical layout -------------------------------------------------------

def test_layout_shape(layout):
    assert len(layout.gratings) == 9
    assert layout.cores == [4, 5, 6]
    assert all(len(layout.in_core(c)) == 3 for c in layout.cores)
    assert layout.wavelength_channels == pytest.approx((1537.07e-9, 1541.51e-9, 1546.26e-9))


@pytest.mark.parametrize("core, spacing", [(6, 20e-3), (5, 21e-3), (4, 22e-3)])
def test_intra_core_spacing(layout, core, spacing):
    centres = sorted(g.center for g in layout.in_core(core))
    assert np.diff(centres) == pytest.approx([spacing, spacing], abs=1e-12)


@pytest.mark.parametrize("channel, displacement", [(1, 6e-3), (2, 7e-3), (3, 8e-3)])
def test_inter_core_displacement(layout, channel, displacement):
    centres = [layout.grating_at(c, channel).center for c in (6, 5, 4)]
    assert np.diff(centres) == pytest.approx([displacement, displacement], abs=1e-12)


def test_channels_well_separated(layout):
    assert np.min(np.diff(layout.wavelength_channels)) > 4e-9


def test_layout_fits_fiber(layout):
    assert all(0 <= g.z_start and g.z_end <= layout.fiber.length for g in layout.gratings)
    assert layout.fiber.length <= fb.MAX_DEVICE_LENGTH


def test_invalid_layouts():
    fiber = FiberSection(length=0.05)
    with pytest.raises(InvalidLayout):
        MulticavityLayout(fiber, (GratingSpec(1, 0.0, 5e-3, LB), GratingSpec(1, 4e-3, 5e-3, 1.54e-6)),
                          (LB,))
    with pytest.raises(InvalidLayout):
        MulticavityLayout(fiber, (GratingSpec(1, 0.048, 5e-3, LB),), (LB,))
    with pytest.raises(InvalidLayout):
        MulticavityLayout(FiberSection(length=0.3), (GratingSpec(1, 0.0, 5e-3, LB),), (LB,))
    with pytest.raises(InvalidLayout):
        GratingSpec(1, 0.0, 5e-3, 1.3e-6)
    with pytest.raises(InvalidLayout):
        GratingSpec(1, 0.0, 0.0, LB)


# --- grating response ---------------------------------------------------------

def test_zero_index_modulation_reflects_nothing():
    g = GratingSpec(1, 0.0, 5e-3, LB, 0.0)
    lam = np.linspace(1549e-9, 1551e-9, 101)
    assert np.all(fb.uniform_grating_response(g, N_EFF, lam).reflectivity == 0)


@pytest.mark.parametrize("kl", [0.25, 0.5, 1.0, 2.0, 3.0])
def test_peak_reflectivity_tanh_squared(kl):
    g = grating_for(kl)
    closed = fb.uniform_grating_response(g, N_EFF, [LB]).reflectivity[0]
    tm = fb.transfer_matrix_response(g, N_EFF, [LB]).reflectivity[0]
    assert closed == pytest.approx(np.tanh(kl) ** 2, abs=1e-12)
    assert abs(closed - tm) < 1e-6


def test_kappa_l_one_value():
    r = fb.uniform_grating_response(grating_for(1.0), N_EFF, [LB]).reflectivity[0]
    assert r == pytest.approx(0.58002, abs=1e-5)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.0, 3.0), st.floats(-1.5e-9, 1.5e-9))
def test_closed_form_matches_transfer_matrix(kl, detune):
    g = grating_for(kl)
    lam = [LB + detune]
    a = fb.uniform_grating_response(g, N_EFF, lam).reflectivity[0]
    b = fb.transfer_matrix_response(g, N_EFF, lam, sections=20).reflectivity[0]
    assert abs(a - b) < 1e-6


@given(st.floats(0.0, 3.0))
def test_energy_conservation(kl):
    lam = np.linspace(1548e-9, 1552e-9, 401)
    spec = fb.uniform_grating_response(grating_for(kl), N_EFF, lam)
    assert np.max(np.abs(spec.reflectivity + spec.transmissivity - 1)) < 1e-9
    assert np.all((spec.reflectivity >= 0) & (spec.reflectivity <= 1))


def test_peak_at_bragg_wavelength():
    lam = np.linspace(1549e-9, 1551e-9, 2001)
    r = fb.uniform_grating_response(grating_for(1.5), N_EFF, lam).reflectivity
    assert abs(lam[np.argmax(r)] - LB) <= lam[1] - lam[0]


def test_core_spectrum_has_three_peaks(layout):
    lam = np.linspace(1535e-9, 1548e-9, 2601)
    spec = fb.core_spectrum(layout, 6, lam)
    for c in layout.wavelength_channels:
        assert spec.reflectivity[np.argmin(np.abs(lam - c))] > 0.2
    with pytest.raises(CoreNotFound):
        fb.core_spectrum(layout, 2, lam)


def test_spectrum_csv():
    spec = fb.uniform_grating_response(grating_for(1.0), N_EFF, [1549e-9, LB])
    lines = fb.spectrum_csv(spec).splitlines()
    assert lines[0] == "wavelength_nm,reflectivity_db"
    assert len(lines) == 3
    assert float(lines[2].split(",")[1]) == pytest.approx(10 * np.log10(np.tanh(1.0) ** 2))


# --- taps -----------------------------------------------------------------------

def test_wavelength_mode_core6_delay(layout):
    d = fb.tap_delays(layout, "wavelength", 6)
    step = 2 * 1.468 * 0.020 / C0 * 1e12
    assert np.diff(d) == pytest.approx([step, step], rel=1e-12)
    assert step == pytest.approx(195.7, abs=0.2)
    assert d[0] == 0.0


def test_spatial_mode_channel1_delay(layout):
    d = fb.tap_delays(layout, "spatial", 1)
    step = 2 * 1.468 * 0.006 / C0 * 1e12
    assert np.diff(d) == pytest.approx([step, step], rel=1e-12)
    assert step == pytest.approx(58.7, abs=0.1)


def test_channel_by_wavelength(layout):
    by_index = fb.tap_delays(layout, "spatial", 2)
    by_lambda = fb.tap_delays(layout, "spatial", 1541.51e-9)
    assert np.array_equal(by_index, by_lambda)


def test_single_grating_selection():
    lay = MulticavityLayout(FiberSection(length=0.05), (GratingSpec(3, 0.01, 5e-3, LB),), (LB,))
    assert fb.tap_delays(lay, "wavelength", 3).tolist() == [0.0]
    assert fb.tap_delays(lay, "spatial", 1).tolist() == [0.0]


def test_selection_errors(layout):
    with pytest.raises(CoreNotFound):
        fb.tap_delays(layout, "wavelength", 1)
    with pytest.raises(ChannelNotFound):
        fb.tap_delays(layout, "spatial", 4)
    with pytest.raises(ChannelNotFound):
        fb.tap_delays(layout, "spatial", 1550e-9)
    with pytest.raises(ValueError):
        fb.tap_delays(layout, "diagonal", 1)


@given(st.floats(0.0, 0.05), st.floats(6e-3, 0.1), st.floats(1.4, 1.55))
def test_delay_arithmetic(z0, d, n_g):
    fiber = FiberSection(n_g=n_g, length=0.2)
    lay = MulticavityLayout(fiber, (GratingSpec(1, z0, 5e-3, 1540e-9),
                                    GratingSpec(1, z0 + d, 5e-3, 1545e-9)), (1540e-9, 1545e-9))
    got = fb.tap_delays(lay, "wavelength", 1)[1]
    assert got == pytest.approx(2 * n_g * d / C0 * 1e12, rel=1e-12)


def test_spatial_and_wavelength_modes_agree(layout):
    for core in layout.cores:
        per_core = fb.tap_delays(layout, "wavelength", core, relative=False)
        for i, ch in enumerate(layout.wavelength_channels, start=1):
            g = layout.grating_at(core, ch)
            spatial = fb.tap_delays(layout, "spatial", i, relative=False)
            wavelength_side = per_core[sorted(layout.in_core(core), key=lambda x: x.center).index(g)]
            assert fb.grating_delay(layout, g) in spatial
            assert wavelength_side == fb.grating_delay(layout, g)


def test_group_index_scales_delays(layout):
    a = fb.tap_delays(layout, "wavelength", 5)
    b = fb.tap_delays(layout.with_group_index(1.468 * 2), "wavelength", 5)
    assert b == pytest.approx(2 * a, rel=1e-14)


def test_amplitudes_default_and_weights(layout):
    assert fb.tap_amplitudes(layout, "wavelength", 6).tolist() == [1.0, 1.0, 1.0]
    gs = [GratingSpec(1, 0.01 + 0.02 * i, 5e-3, lam, 1e-4, w)
          for i, (lam, w) in enumerate(zip(fb.CANONICAL_CHANNELS, (1.0, 0.707, 1.0)))]
    lay = MulticavityLayout(FiberSection(length=0.1), tuple(gs), fb.CANONICAL_CHANNELS)
    assert fb.tap_amplitudes(lay, "wavelength", 1).tolist() == [1.0, 0.707, 1.0]


def test_amplitudes_from_peak_reflectivity():
    gs = [GratingSpec(1, 0.01 + 0.02 * i, 5e-3, lam, dn)
          for i, (lam, dn) in enumerate(zip(fb.CANONICAL_CHANNELS, (0.5e-4, 1e-4, 2e-4)))]
    lay = MulticavityLayout(FiberSection(length=0.1), tuple(gs), fb.CANONICAL_CHANNELS)
    amps = fb.tap_amplitudes(lay, "wavelength", 1, source="reflectivity")
    expected = [np.tanh(np.pi * g.delta_n / g.bragg_wavelength * g.length) for g in gs]
    assert amps == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        fb.tap_amplitudes(lay, "wavelength", 1, source="guess")


@pytest.mark.parametrize("mode, key, target", [
    ("wavelength", 6, 4.97), ("wavelength", 4, 4.45),
    ("spatial", 3, 12.50), ("spatial", 1, 17.76),
])
def test_canonical_fsrs(layout, mode, key, target):
    taps = TapSet(fb.tap_delays(layout, mode, key), fb.tap_amplitudes(layout, mode, key))
    assert fsr(taps) == pytest.approx(target, rel=0.05)
