import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from conftest import analytic_step_index_neff
from mcf_ttdl import waveguide as wg
from mcf_ttdl.errors import (
    InvalidProfile,
    NoGuidedMode,
    StencilOutOfRange,
    WavelengthOutOfRange,
)
from mcf_ttdl.waveguide import FUSED_SILICA, MaterialModel, RadialProfile

SMF = RadialProfile.step_index(4.1e-6, 0.0036)
TRENCHED = RadialProfile.trench_assisted(4.0e-6, 0.005, 6e-6, 4e-6, 0.01)


def sellmeier_by_hand(lam_um):
    # three-term fused silica (Malitson), evaluated term by term
    terms = [
        0.6961663 * lam_um**2 / (lam_um**2 - 0.0684043**2),
        0.4079426 * lam_um**2 / (lam_um**2 - 0.1162414**2),
        0.8974794 * lam_um**2 / (lam_um**2 - 9.896161**2),
    ]
    return (1 + sum(terms)) ** 0.5


# --- material -----------------------------------------------------------

@pytest.mark.parametrize("lam_um, approx", [(1.55, 1.4440), (0.5876, 1.4585)])
def test_sellmeier_matches_hand_calculation(lam_um, approx):
    if lam_um < 1.0:
        # outside the solver range, so go through the raw material model
        n = FUSED_SILICA.base_index(lam_um * 1e-6)
    else:
        n = wg.refractive_index(FUSED_SILICA, 0.0, lam_um * 1e-6)
    assert n == pytest.approx(sellmeier_by_hand(lam_um), abs=1e-12)
    assert n == pytest.approx(approx, abs=1e-4)


@given(st.floats(-0.049, 0.049), st.floats(1.0e-6, 2.0e-6))
def test_delta_is_a_multiplicative_offset(delta, lam):
    base = wg.refractive_index(FUSED_SILICA, 0.0, lam)
    assert wg.refractive_index(FUSED_SILICA, delta, lam) == base * (1 + delta)


def test_delta_0005_exact():
    lam = 1.55e-6
    assert wg.refractive_index(FUSED_SILICA, 0.005, lam) == 1.005 * wg.refractive_index(
        FUSED_SILICA, 0.0, lam)


@pytest.mark.parametrize("lam", [0.9e-6, 2.1e-6, float("nan")])
def test_wavelength_range_enforced(lam):
    with pytest.raises(WavelengthOutOfRange):
        wg.refractive_index(FUSED_SILICA, 0.0, lam)


def test_large_delta_rejected():
    with pytest.raises(ValueError):
        wg.refractive_index(FUSED_SILICA, 0.06, 1.55e-6)


def test_index_derivatives_match_finite_differences():
    lam, h = 1.55e-6, 1e-9
    n, n1, n2, n3 = FUSED_SILICA.index_derivatives(lam)
    f = FUSED_SILICA.base_index
    assert n1 == pytest.approx((f(lam + h) - f(lam - h)) / (2 * h), rel=1e-6)
    assert n2 == pytest.approx((f(lam + h) - 2 * n + f(lam - h)) / h**2, rel=1e-4)
    d2 = lambda x: FUSED_SILICA.index_derivatives(x)[2]
    assert n3 == pytest.approx((d2(lam + h) - d2(lam - h)) / (2 * h), rel=1e-5)


def test_bulk_silica_zero_dispersion_near_1270nm():
    zdw = brentq(lambda x: wg.material_dispersion(FUSED_SILICA, x), 1.2e-6, 1.4e-6)
    assert 1.26e-6 < zdw < 1.29e-6
    assert wg.material_dispersion(FUSED_SILICA, 1.55e-6) > 0


# --- profiles -----------------------------------------------------------

def test_profile_validation():
    with pytest.raises(InvalidProfile):
        RadialProfile(())
    with pytest.raises(InvalidProfile):
        RadialProfile(((5e-6, 0.003), (4e-6, 0.0)))
    with pytest.raises(InvalidProfile):
        RadialProfile(((70e-6, 0.003),))
    with pytest.raises(InvalidProfile):
        RadialProfile.step_index(4e-6, 0.06)
    with pytest.raises(InvalidProfile):
        RadialProfile.trench_assisted(4e-6, 0.005, -1e-6, 2e-6, 0.01)


def test_trench_readback():
    assert TRENCHED.trench == pytest.approx((6e-6, 4e-6, 0.01))
    assert SMF.trench == (0.0, 0.0, 0.0)
    assert RadialProfile.trench_assisted(4e-6, 0.005, 0.0, 3e-6, 0.01).trench == pytest.approx(
        (0.0, 3e-6, 0.01))


def test_zero_width_trench_is_step_index():
    assert RadialProfile.trench_assisted(4.1e-6, 0.0036, 5e-6, 0.0, 0.01) == SMF
    assert RadialProfile.trench_assisted(4.1e-6, 0.0036, 5e-6, 3e-6, 0.0) == SMF


# --- mode solver ----------------------------------------------------------

def test_no_contrast_has_no_guided_mode():
    with pytest.raises(NoGuidedMode):
        wg.solve_lp01(RadialProfile.step_index(4e-6, 0.0))


def test_depressed_core_has_no_guided_mode():
    with pytest.raises(NoGuidedMode):
        wg.solve_lp01(RadialProfile.step_index(4e-6, -0.003))


def test_smf_matches_analytic_root():
    n_clad = FUSED_SILICA.base_index(1550e-9)
    expected = analytic_step_index_neff(4.1e-6, n_clad, 0.0036, 1550e-9)
    assert abs(wg.effective_index(SMF) - expected) < 1e-8


@settings(max_examples=25, deadline=None)
@given(st.floats(2.0e-6, 8.0e-6), st.floats(0.002, 0.01), st.floats(1.2e-6, 1.8e-6))
def test_two_layer_oracle_equivalence(a, delta, lam):
    n_clad = FUSED_SILICA.base_index(lam)
    expected = analytic_step_index_neff(a, n_clad, delta, lam)
    got = wg.effective_index(RadialProfile.step_index(a, delta), FUSED_SILICA, lam)
    assert abs(got - expected) < 1e-8


def test_vanishing_trench_tends_to_step_index():
    shallow = RadialProfile.trench_assisted(4.1e-6, 0.0036, 5e-6, 1e-9, 1e-7)
    assert abs(wg.effective_index(shallow) - wg.effective_index(SMF)) < 1e-12


@settings(max_examples=20, deadline=None)
@given(
    st.floats(3e-6, 5.5e-6), st.floats(0.003, 0.008), st.just(0.0) | st.floats(0.5e-6, 8e-6),
    st.floats(1e-6, 5e-6), st.floats(0.0, 0.012), st.floats(1.3e-6, 1.7e-6),
)
def test_guided_bracket(a1, d1, a2, w, d2, lam):
    prof = RadialProfile.trench_assisted(a1, d1, a2, w, d2)
    try:
        sol = wg.solve_lp01(prof, FUSED_SILICA, lam)
    except NoGuidedMode:
        # a deep trench can cut LP01 off, but only if the index-area integral
        # is negative; a weak guide with a non-negative integral always binds
        r_in, r_out = a1 + a2, a1 + a2 + w
        assert d1 * a1**2 < d2 * (r_out**2 - r_in**2)
        return
    layer_n, n_clad = prof.indices(FUSED_SILICA, lam)
    assert n_clad < sol.n_eff < max(layer_n)
    assert sol.continuity_mismatch() < 1e-10


def test_trench_lowers_n_eff_slightly():
    # lowering the index anywhere can only lower the eigenvalue
    plain = wg.effective_index(RadialProfile.step_index(4e-6, 0.005))
    assert plain - 1e-4 < wg.effective_index(TRENCHED) < plain


def test_field_shape():
    sol = wg.solve_lp01(TRENCHED)
    assert sol.amplitude(np.array([0.0]))[0] == pytest.approx(1.0)
    r = np.linspace(0, 30e-6, 400)
    f = sol.amplitude(r)
    assert np.all(f > 0)  # fundamental mode has no radial node
    assert f[-1] < 1e-6
    assert sol.continuity_mismatch() < 1e-10
    assert abs(sol.residual) < wg.RESIDUAL_TOL


def test_n_eff_decreases_with_wavelength():
    lams = np.linspace(1530e-9, 1570e-9, 9)
    for prof in (SMF, TRENCHED):
        n = [wg.effective_index(prof, FUSED_SILICA, lam) for lam in lams]
        assert np.all(np.diff(n) < 0)


# --- group delay and dispersion --------------------------------------------

def test_flat_n_eff_gives_n_eff_over_c(monkeypatch):
    # dispersionless material plus a stencil returning one value
    flat = MaterialModel(sellmeier_b=(0.5, 0.3, 0.2), sellmeier_c=(0.0, 0.0, 0.0))
    monkeypatch.setattr(wg, "_stencil", lambda *a, **k: {-1: 2e-3, 0: 2e-3, 1: 2e-3})
    n_eff = flat.base_index(1550e-9) + 2e-3
    tau = wg.group_delay_per_km(SMF, flat, 1550e-9)
    assert tau == pytest.approx(n_eff / wg.C0 * 1e15, rel=1e-14)


def test_smf_group_index_against_five_point_oracle():
    lam, h = 1550e-9, 0.5e-9
    n = [wg.effective_index(SMF, FUSED_SILICA, lam + j * h) for j in (-2, -1, 0, 1, 2)]
    dn = (n[0] - 8 * n[1] + 8 * n[3] - n[4]) / (12 * h)
    oracle = n[2] - lam * dn
    ng = wg.group_index(SMF)
    assert 1.46 < ng < 1.48
    assert ng == pytest.approx(oracle, abs=1e-8)


def test_group_delay_step_halving():
    a = wg.group_delay_per_km(SMF, step=0.1e-9)
    b = wg.group_delay_per_km(SMF, step=0.05e-9)
    assert abs(a - b) < 1e-3


def test_smf_dispersion_against_dense_oracle():
    lam, h = 1550e-9, 1e-9
    n = [wg.effective_index(SMF, FUSED_SILICA, lam + j * h) for j in (-2, -1, 0, 1, 2)]
    d2n = (-n[0] + 16 * n[1] - 30 * n[2] + 16 * n[3] - n[4]) / (12 * h**2)
    oracle = -lam / wg.C0 * d2n * 1e6  # s/m^2 -> ps/(km nm)
    D, S = wg.dispersion_params(SMF)
    assert D == pytest.approx(17.0, abs=1.5)
    assert D == pytest.approx(oracle, abs=0.01)
    assert 0.03 < S < 0.09


@pytest.mark.parametrize("prof", [SMF, TRENCHED], ids=["smf", "trench"])
def test_dispersion_step_stability(prof):
    d1, _ = wg.dispersion_params(prof, step=0.1e-9)
    d2, _ = wg.dispersion_params(prof, step=0.05e-9)
    assert abs(d1 - d2) < 0.02


def test_modal_parameters_consistent():
    p = wg.modal_parameters(TRENCHED)
    assert p.n_eff == pytest.approx(wg.effective_index(TRENCHED), abs=1e-15)
    assert p.tau_g == pytest.approx(wg.group_delay_per_km(TRENCHED), abs=1e-6)
    assert (p.D, p.S) == wg.dispersion_params(TRENCHED)


def test_dispersion_slope_matches_d_differences():
    h = 2e-9
    lo = wg.modal_parameters(SMF, wavelength=1550e-9 - h).D
    hi = wg.modal_parameters(SMF, wavelength=1550e-9 + h).D
    assert wg.modal_parameters(SMF).S == pytest.approx((hi - lo) / 4.0, abs=2e-3)


def test_stencil_out_of_range():
    with pytest.raises(StencilOutOfRange):
        wg.modal_parameters(SMF, wavelength=1.0e-6, step=1e-9)
    with pytest.raises(StencilOutOfRange):
        wg.group_index(SMF, step=0.0)


def test_sweep_returns_one_entry_per_wavelength():
    lams = [1540e-9, 1550e-9, 1560e-9]
    out = wg.sweep(SMF, FUSED_SILICA, lams)
    assert [p.wavelength for p in out] == lams
    assert out[1] == wg.modal_parameters(SMF)
