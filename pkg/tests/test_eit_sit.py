import math
from dataclasses import replace

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.constants import c as C_LIGHT

from rabr.eit_sit import (EitSitParams, absorption_free_range, calibrate_alpha0, channel_capacity,
                          channel_metrics, cross_phase_coefficient, crossover_ratio, design_report,
                          eit_group_velocity, launch_angle, loss_ratio, matching_mismatch,
                          max_channel_density, probe_phase_shift, raman_effective_rabi,
                          sit_soliton_velocity, two_photon_absorption, velocity_matching)
from rabr.model import DomainError, ParameterError

BASE = EitSitParams().resolved()
RESONANT = replace(BASE, Delta_b=0.5 * BASE.gamma_4)

positive = st.floats(1e-3, 1e9, allow_nan=False, allow_infinity=False)


def test_anchor_phase_and_absorption():
    phi, absorbed = probe_phase_shift(BASE, 0.04)
    assert abs(phi) == pytest.approx(math.pi, rel=1e-12)
    assert absorbed < 0.1
    assert loss_ratio(BASE) == pytest.approx(1 / 60)


def test_calibration_inverts_phase_formula():
    p = replace(BASE, alpha_0=calibrate_alpha0(BASE, z=0.1, phase=1.0))
    assert abs(probe_phase_shift(p, 0.1)[0]) == pytest.approx(1.0, rel=1e-12)


def test_no_control_no_phase():
    p = replace(BASE, Omega_b=0.0)
    assert probe_phase_shift(p, 0.04)[0] == 0.0
    with pytest.raises(DomainError):
        calibrate_alpha0(p)


def test_phase_scales_as_inverse_drive_squared():
    phi1 = probe_phase_shift(BASE, 0.04)[0]
    phi2 = probe_phase_shift(replace(BASE, Omega_d=2 * BASE.Omega_d), 0.04)[0]
    assert phi2 == pytest.approx(phi1 / 4, rel=1e-12)


def test_imaginary_part_ratio():
    a = cross_phase_coefficient(BASE)
    assert a.imag == pytest.approx(-BASE.gamma_4 * a.real / (2 * BASE.Delta_b), rel=1e-12)


def test_regime_guards():
    with pytest.raises(DomainError):
        probe_phase_shift(RESONANT, 0.04)
    with pytest.raises(DomainError):
        two_photon_absorption(BASE)
    with pytest.raises(DomainError):
        two_photon_absorption(replace(RESONANT, Omega_d=0.0))


def test_two_photon_switch():
    im_a, im_b = two_photon_absorption(replace(RESONANT, Omega_b=0.0))
    assert im_a == 0.0
    im_a, im_b = two_photon_absorption(RESONANT)
    swapped = two_photon_absorption(replace(RESONANT, Omega_a=RESONANT.Omega_b,
                                            Omega_b=RESONANT.Omega_a))
    assert swapped == pytest.approx((im_b, im_a), rel=1e-12)
    assert im_a / im_b == pytest.approx(RESONANT.Omega_b ** 2 / RESONANT.Omega_a ** 2, rel=1e-12)


def test_regimes_join_at_crossover():
    assert 0.5 <= crossover_ratio(BASE) <= 2.0


def test_eit_velocity():
    v, slow = eit_group_velocity(BASE)
    assert slow and v < 0.01 * C_LIGHT / BASE.n0
    v2, _ = eit_group_velocity(replace(BASE, Omega_d=2 * BASE.Omega_d))
    assert v2 == pytest.approx(4 * v, rel=1e-12)
    assert eit_group_velocity(replace(BASE, Omega_a=7e5))[0] == v


def test_sit_control():
    s = sit_soliton_velocity(1e6, 0.25)
    assert s.area == pytest.approx(2 * math.pi, rel=1e-14)
    # width 2/Omega_b: of order a microsecond for Omega_b = 1e6
    assert s.width == pytest.approx(2e-6)
    assert sit_soliton_velocity(2e6, 0.25).velocity == pytest.approx(2 * s.velocity)
    with pytest.raises(ParameterError):
        sit_soliton_velocity(0.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(positive, positive, positive, positive)
def test_velocity_matching_identity(omega_b, alpha_a, alpha_b, gamma_2):
    omega_d = velocity_matching(omega_b, alpha_a, alpha_b, gamma_2)
    v_eit = 2 * omega_d ** 2 / (alpha_a * gamma_2)
    v_sit = omega_b / (2 * alpha_b)
    assert v_eit == pytest.approx(v_sit, rel=1e-10)


def test_velocity_matching_examples():
    assert velocity_matching(4e6, 1.0, 1.0, 1e7) == pytest.approx(
        2 * velocity_matching(1e6, 1.0, 1.0, 1e7))
    assert velocity_matching(1e6, 3.0, 3.0, 4e6) == pytest.approx(1e6)
    assert matching_mismatch(BASE) < 1e-10


def test_launch_angle():
    psi, ok = launch_angle(1e-3, 0.04, 1.5, 40.0)
    assert ok
    assert launch_angle(1e-3, 0.04, 1.5, 0.0)[0] == 0.0
    assert launch_angle(1e-3, 0.08, 1.5, 40.0)[0] == pytest.approx(psi / 2)
    # transit time through the length equals the beam's transverse crossing time
    assert 0.04 / 40.0 == pytest.approx(1e-3 / (C_LIGHT / 1.5 * math.sin(psi)), rel=psi ** 2 + 1e-12)


def test_raman_rabi():
    assert raman_effective_rabi(1e6, 5e9, 5e9)[0] == pytest.approx(1e6)
    assert raman_effective_rabi(1e6, 5e9, 1e10)[0] == pytest.approx(0.5e6)
    assert not raman_effective_rabi(1e6, 5e7, 5e7, gamma_max=1e7)[1]
    assert raman_effective_rabi(1e6, 5e9, 5e9, gamma_max=1e7)[1]
    with pytest.raises(DomainError):
        raman_effective_rabi(1e6, 1e6, 0.0)


def test_absorption_free_range():
    v = eit_group_velocity(BASE)[0]
    assert absorption_free_range(v, 1e7) < 0.04
    assert absorption_free_range(2 * v, 1e7) == pytest.approx(2 * absorption_free_range(v, 1e7))
    assert absorption_free_range(v, 10.0) > 0.04


def test_channel_metrics():
    assert channel_capacity(3.0, math.e) == pytest.approx(3.0)
    m = channel_metrics(1e13, 10.0, 8, 4, bandwidth=1e13, linewidth=1e6)
    assert m["D_max"] == 1e7 and m["D"] == 32
    assert max_channel_density(1e13, 1e6) == 1e7
    with pytest.raises(ParameterError):
        channel_capacity(1.0, 1.0)


@settings(max_examples=40, deadline=None)
@given(positive, st.floats(1.01, 1e6), st.floats(1.01, 1e6))
def test_capacity_additive_over_bands(W, r1, r2):
    assert channel_capacity(W, r1) + channel_capacity(W, r2) == pytest.approx(
        channel_capacity(W, r1 * r2), rel=1e-12)


def test_design_report_flags():
    rep = design_report(EitSitParams())
    assert rep.flags["slow_light"] and rep.flags["dispersive_regime"]
    assert rep.flags["absorption_below_10pct"] and rep.flags["velocity_matched"]
    assert not rep.flags["range_covers_length"]
    assert not rep.accepted
    good = design_report(EitSitParams(gamma_6=10.0))
    assert good.accepted
    raman = design_report(EitSitParams(gamma_raman=10.0, Omega_R=5e9, Delta_raman=5e9))
    assert raman.flags["raman_range_covers_length"] and raman.flags["raman_adiabatic"]
    assert "phase_shift" in rep.table()
    resonant = design_report(EitSitParams(Delta_b=5e6, alpha_0=BASE.alpha_0))
    assert "im_alpha_a" in resonant.values


def test_invalid_params():
    with pytest.raises(ParameterError):
        EitSitParams(gamma_2=-1.0)
    with pytest.raises(ParameterError):
        EitSitParams(n0=0.5)
    with pytest.raises(ParameterError):
        eit_group_velocity(EitSitParams())
