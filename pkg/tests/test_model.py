import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0, hbar

from rabr.model import (DimensionlessParams, DomainError, FieldState1D, Grid1D, ParameterError,
                        PhysicalParams, cooperative_time, decompose_field, derive_dimensionless,
                        gap_edges, params_from_mapping, reconstruct_field, zeta_of_z)


def erbium_like(**kw):
    base = dict(n0=1.5, a1=0.01, omega_c=1.2e15, omega_0=1.2e15 + 1e9, mu=1e-31, rho_0=1e25)
    base.update(kw)
    return PhysicalParams(**base)


def test_cooperative_time_matches_gaussian_form():
    # Gaussian-unit tau0 = (n0/mu_G) sqrt(hbar_G / (2 pi omega rho_G)) evaluated in cgs
    p = erbium_like()
    mu_g = p.mu * 2.99792458e11            # C m -> statC cm
    hbar_g = hbar * 1e7                    # J s -> erg s
    rho_g = p.rho_0 * 1e-6                 # m^-3 -> cm^-3
    tau_g = p.n0 / mu_g * math.sqrt(hbar_g / (2 * math.pi * p.omega_c * rho_g))
    assert cooperative_time(p) == pytest.approx(tau_g, rel=1e-6)


def test_dimensionless_reduction():
    p = erbium_like()
    d = derive_dimensionless(p)
    tau0 = p.n0 / abs(p.mu) * math.sqrt(2 * epsilon_0 * hbar / (p.omega_c * p.rho_0))
    assert d.tau0 == pytest.approx(tau0)
    assert d.eta == pytest.approx(p.a1 * p.omega_c * tau0 / 4)
    assert d.delta == pytest.approx((p.omega_0 - p.omega_c) * tau0)


def test_resonant_dopant_has_zero_detuning():
    assert derive_dimensionless(erbium_like(omega_0=1.2e15)).delta == 0.0


def test_gap_edges():
    lo, hi = gap_edges(erbium_like(a1=0.04))
    assert lo == pytest.approx(1.2e15 * 0.99)
    assert hi == pytest.approx(1.2e15 * 1.01)


def test_svea_flag():
    assert erbium_like(a1=0.1).svea_valid
    assert not erbium_like(a1=0.7).svea_valid


@pytest.mark.parametrize("bad", [dict(n0=0.9), dict(rho_0=0.0), dict(mu=0.0), dict(a1=-0.1),
                                 dict(omega_c=float("nan"))])
def test_invalid_physical_params(bad):
    with pytest.raises(ParameterError):
        erbium_like(**bad)


def test_invalid_dimensionless():
    with pytest.raises(ParameterError):
        DimensionlessParams(eta=-1.0, delta=0.0)
    with pytest.raises(ParameterError):
        DimensionlessParams(eta=1.0, delta=float("inf"))


def test_params_from_mapping():
    assert isinstance(params_from_mapping({"eta": 4, "delta": 0}), DimensionlessParams)
    with pytest.raises(ParameterError, match="unknown"):
        params_from_mapping({"eta": 4, "delta": 0, "bogus": 1})
    with pytest.raises(ParameterError, match="eta"):
        params_from_mapping({"delta": 0})


def test_grid_spacing():
    g = Grid1D.centered(10.0, 100)
    assert g.h == pytest.approx(0.2)
    assert g.zeta[0] == -10.0 and g.zeta[-1] == pytest.approx(9.8)
    with pytest.raises(ParameterError):
        Grid1D(1.0, 0.0, 64)


def test_ground_state_is_valid():
    s = FieldState1D.ground(np.linspace(-1, 1, 32))
    s.check()
    assert s.bloch_norm_error() == 0.0


def test_state_rejects_bad_norm():
    s = FieldState1D.ground(np.linspace(-1, 1, 32))
    s.inv[3] = -0.5
    with pytest.raises(ParameterError):
        s.check()


@settings(max_examples=30, deadline=None)
@given(st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6), st.floats(-1e6, 1e6))
def test_decomposition_is_linear_and_invertible(fr, fi, br, bi):
    p = erbium_like()
    ef, eb = complex(fr, fi), complex(br, bi)
    sp, sm = decompose_field(ef, eb, p)
    scale = 2 * cooperative_time(p) * p.mu / hbar
    assert (sp + sm) / (2 * scale) == pytest.approx(ef, abs=1e-9 * (abs(ef) + 1))
    assert (sp - sm) / (2 * scale) == pytest.approx(eb, abs=1e-9 * (abs(eb) + 1))


def test_reconstruct_field_standing_wave():
    p = erbium_like()
    zeta = np.linspace(-1, 1, 64, endpoint=False)
    s = FieldState1D.ground(zeta)
    s.sigma_plus[:] = 1.0
    z = np.linspace(-1e-7, 1e-7, 11)
    e = reconstruct_field(s, p, z, 0.0)
    tau0 = cooperative_time(p)
    np.testing.assert_allclose(e, hbar / (p.mu * tau0) * np.cos(p.k_c * z), rtol=1e-12)
    assert zeta_of_z(C_LIGHT * tau0 / p.n0, p) == pytest.approx(1.0)


def test_reconstruct_out_of_range():
    p = erbium_like()
    s = FieldState1D.ground(np.linspace(-1, 1, 32))
    with pytest.raises(DomainError):
        reconstruct_field(s, p, [1.0], 0.0)
