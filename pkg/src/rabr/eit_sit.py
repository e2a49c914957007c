"""Design formulas for EIT-assisted SIT solitons in a doped photonic crystal.

A weak probe ``a`` sees the strong drive ``d`` (EIT) and is phase shifted
by a control pulse ``b``; in the dispersive regime |Delta_b| > gamma_4 the
probe picks up a cross-phase with little loss, in the resonant regime the
medium absorbs a and b only together (two-photon switch).  The control is
an SIT soliton whose velocity is matched to the probe's EIT group
velocity.  All inputs are SI with rates in rad/s.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, replace

from scipy.constants import c as C_LIGHT

from .model import DomainError, ParameterError

# Level decay rates assumed when none are supplied (rad/s).
DEFAULT_GAMMA = 1e7
ANCHOR_LENGTH = 0.04
ANCHOR_PHASE = math.pi

# Matching derivations use gamma_2 where the EIT velocity uses gamma_3; the
# default identifies the two (and alpha_a with alpha_0).
DEFAULT_RATE_MAP = {"gamma_3": "gamma_2", "alpha_a": "alpha_0"}


@dataclass(frozen=True)
class EitSitParams:
    gamma_2: float = DEFAULT_GAMMA
    gamma_3: float = DEFAULT_GAMMA
    gamma_4: float = DEFAULT_GAMMA
    gamma_6: float = DEFAULT_GAMMA
    Delta_b: float = 30 * DEFAULT_GAMMA
    Omega_d: float = 4e6
    Omega_a: float = 1e5
    Omega_b: float = 1e6
    alpha_0: float | None = None
    alpha_a: float | None = None
    alpha_b: float | None = None
    n0: float = 1.5
    Omega_R: float | None = None
    Delta_raman: float | None = None
    D: float = 1e-3
    L: float = ANCHOR_LENGTH
    gamma_raman: float | None = None

    def __post_init__(self):
        for name, value in asdict(self).items():
            if value is None:
                continue
            if not math.isfinite(value):
                raise ParameterError(f"{name} must be finite")
            if name in ("Delta_b", "Delta_raman", "Omega_a", "Omega_b", "Omega_d", "Omega_R"):
                continue
            if value <= 0:
                raise ParameterError(f"{name} must be > 0")
        if self.n0 < 1:
            raise ParameterError("n0 must be >= 1")

    @property
    def dispersive(self) -> bool:
        return abs(self.Delta_b) > self.gamma_4

    def resolved(self) -> "EitSitParams":
        """Fill alpha_0 from the phase anchor and alpha_a, alpha_b from the rate identification."""
        p = self
        if p.alpha_0 is None:
            p = replace(p, alpha_0=calibrate_alpha0(p))
        if p.alpha_a is None:
            p = replace(p, alpha_a=p.alpha_0)
        if p.alpha_b is None:
            # SIT control travelling at the probe's EIT group velocity
            p = replace(p, alpha_b=abs(p.Omega_b) / (2 * eit_group_velocity(p)[0]))
        return p


def _require(p, *names):
    missing = [n for n in names if getattr(p, n) is None]
    if missing:
        raise ParameterError(f"missing parameters: {missing}; call resolved() first")


def calibrate_alpha0(p: EitSitParams, z: float = ANCHOR_LENGTH, phase: float = ANCHOR_PHASE) -> float:
    """Resonant absorption coefficient that gives |phi_a| = ``phase`` after ``z``.

    This is a calibration, not a density model: it back-solves the probe
    phase formula for alpha_0.
    """
    if p.Omega_b == 0:
        raise DomainError("no control field: the phase shift cannot be calibrated")
    return phase * 2 * abs(p.Delta_b) * p.Omega_d ** 2 / (p.gamma_2 * p.Omega_b ** 2 * z)


def cross_phase_coefficient(p: EitSitParams) -> complex:
    """Complex alpha_a in the dispersive regime: Re from the cross-phase, Im = -gamma_4 Re / (2 Delta_b)."""
    _require(p, "alpha_0")
    if not p.dispersive:
        raise DomainError("|Delta_b| <= gamma_4 is the resonant regime; use two_photon_absorption")
    if p.Omega_d == 0:
        raise DomainError("Omega_d = 0: no EIT window")
    re = -p.alpha_0 * p.gamma_2 * abs(p.Omega_b) ** 2 / (2 * p.Delta_b * abs(p.Omega_d) ** 2)
    return complex(re, -p.gamma_4 * re / (2 * p.Delta_b))


def probe_phase_shift(p: EitSitParams, z: float) -> tuple[float, float]:
    """Cross-phase phi_a and absorbed fraction of probe intensity after length ``z``."""
    if z < 0:
        raise ParameterError("z must be >= 0")
    alpha = cross_phase_coefficient(p)
    return alpha.real * z, 1 - math.exp(-2 * abs(alpha.imag) * z)


def loss_ratio(p: EitSitParams) -> float:
    """|Im alpha_a / Re alpha_a| = gamma_4 / (2 |Delta_b|)."""
    return p.gamma_4 / (2 * abs(p.Delta_b))


def two_photon_absorption(p: EitSitParams) -> tuple[float, float]:
    """(Im alpha_a, Im alpha_b) in the resonant regime: each field is absorbed only with the other present."""
    _require(p, "alpha_0")
    if p.dispersive:
        raise DomainError("|Delta_b| > gamma_4 is the dispersive regime; use probe_phase_shift")
    if p.Omega_d == 0:
        raise DomainError("Omega_d = 0 makes the two-photon absorption singular")
    k = p.alpha_0 * p.gamma_2 / (p.gamma_4 * abs(p.Omega_d) ** 2)
    return k * abs(p.Omega_b) ** 2, k * abs(p.Omega_a) ** 2


def eit_group_velocity(p: EitSitParams) -> tuple[float, bool]:
    """Probe group velocity 2|Omega_d|^2 / (alpha_0 gamma_3) and whether it is below 1% of c/n0."""
    _require(p, "alpha_0")
    if p.Omega_d == 0:
        raise DomainError("Omega_d must be nonzero")
    v = 2 * abs(p.Omega_d) ** 2 / (p.alpha_0 * p.gamma_3)
    return v, v < 0.01 * C_LIGHT / p.n0


@dataclass(frozen=True)
class SitControl:
    velocity: float
    width: float
    beta: float
    area: float


def sit_soliton_velocity(Omega_b: float, alpha_b: float) -> SitControl:
    """Velocity Omega_b / (2 alpha_b) of a 2 pi SIT control pulse, with its width and area."""
    if Omega_b <= 0 or alpha_b <= 0:
        raise ParameterError("Omega_b and alpha_b must be > 0")
    v = Omega_b / (2 * alpha_b)
    beta = 1 / (2 * alpha_b)
    return SitControl(v, 2 * beta / v, beta, math.pi * Omega_b / (v * alpha_b))


def velocity_matching(Omega_b: float, alpha_a: float, alpha_b: float, gamma_2: float) -> float:
    """Drive Rabi frequency that makes the probe and the SIT control co-propagate."""
    for name, v in (("Omega_b", Omega_b), ("alpha_a", alpha_a), ("alpha_b", alpha_b),
                    ("gamma_2", gamma_2)):
        if v <= 0:
            raise ParameterError(f"{name} must be > 0")
    return math.sqrt(Omega_b * alpha_a * gamma_2 / (4 * alpha_b))


def matching_mismatch(p: EitSitParams) -> float:
    """Relative difference of the two group velocities once Omega_d is set by velocity matching.

    The EIT velocity is evaluated with gamma_3 -> gamma_2 and alpha_0 -> alpha_a,
    so this checks an algebraic identity rather than a physical equality.
    """
    _require(p, "alpha_a", "alpha_b")
    omega_d = velocity_matching(abs(p.Omega_b), p.alpha_a, p.alpha_b, p.gamma_2)
    mapped = replace(p, Omega_d=omega_d, alpha_0=p.alpha_a, gamma_3=p.gamma_2)
    v_eit = eit_group_velocity(mapped)[0]
    v_sit = sit_soliton_velocity(abs(p.Omega_b), p.alpha_b).velocity
    return abs(v_eit - v_sit) / v_sit


def launch_angle(D: float, L: float, n0: float, v_b: float) -> tuple[float, bool]:
    """Small tilt psi = D n0 v_b / (L c) that keeps the beam in the crystal for the pulse transit."""
    if D <= 0 or L <= 0 or v_b < 0 or n0 < 1:
        raise ParameterError("need D, L > 0, v_b >= 0 and n0 >= 1")
    psi = D * n0 * v_b / (L * C_LIGHT)
    return psi, psi < 0.1


def raman_effective_rabi(Omega_b: float, Omega_R: float, Delta_raman: float,
                         gamma_max: float | None = None) -> tuple[float, bool]:
    """Two-photon Rabi frequency Omega_b Omega_R / Delta through a far-detuned level.

    The flag is False when |Delta| < 10 * ``gamma_max`` (adiabatic elimination doubtful).
    """
    if Delta_raman == 0:
        raise DomainError("Delta_raman = 0 is singular")
    ok = gamma_max is None or abs(Delta_raman) >= 10 * gamma_max
    return Omega_b * Omega_R / Delta_raman, ok


def absorption_free_range(v_b: float, gamma_upper: float) -> float:
    if v_b <= 0 or gamma_upper <= 0:
        raise ParameterError("v_b and gamma_upper must be > 0")
    return v_b / gamma_upper


def channel_capacity(W: float, Is_over_In: float) -> float:
    if W <= 0:
        raise ParameterError("W must be > 0")
    if not Is_over_In > 1:
        raise ParameterError("signal-to-noise ratio must exceed 1")
    return W * math.log(Is_over_In)


def max_channel_density(bandwidth: float, linewidth: float) -> float:
    if bandwidth <= 0 or linewidth <= 0:
        raise ParameterError("bandwidth and linewidth must be > 0")
    return bandwidth / linewidth


def channel_metrics(W: float, Is_over_In: float, N_bits: int, M_channels: int,
                    bandwidth: float | None = None, linewidth: float | None = None) -> dict:
    """Capacity C = W ln(Is/In), density D = N M, and D_max = bandwidth/linewidth when given."""
    if N_bits < 0 or M_channels < 0:
        raise ParameterError("bit and channel counts must be >= 0")
    out = {"C": channel_capacity(W, Is_over_In), "D": N_bits * M_channels}
    if bandwidth is not None and linewidth is not None:
        out["D_max"] = max_channel_density(bandwidth, linewidth)
    return out


def crossover_ratio(p: EitSitParams) -> float:
    """|alpha_a| just inside the dispersive regime over Im alpha_a just inside the resonant one.

    Both sides are evaluated at |Delta_b| = gamma_4 (shifted by a relative
    1e-9); values within a factor of two mean the two regimes join smoothly.
    """
    _require(p, "alpha_0")
    sign = 1.0 if p.Delta_b >= 0 else -1.0
    disp = replace(p, Delta_b=sign * p.gamma_4 * (1 + 1e-9))
    res = replace(p, Delta_b=sign * p.gamma_4 * (1 - 1e-9))
    return abs(cross_phase_coefficient(disp)) / two_photon_absorption(res)[0]


@dataclass
class DesignReport:
    params: EitSitParams
    values: dict = field(default_factory=dict)
    flags: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return all(self.flags.values())

    def to_dict(self) -> dict:
        return {"params": asdict(self.params), "values": dict(self.values),
                "flags": dict(self.flags), "accepted": self.accepted}

    def table(self) -> str:
        rows = [f"{k:<28s} {v:.6g}" for k, v in self.values.items()]
        rows += [f"{k:<28s} {'ok' if v else 'FAIL'}" for k, v in self.flags.items()]
        return "\n".join(rows)


def design_report(p: EitSitParams, z: float | None = None) -> DesignReport:
    """Every derived design quantity at interaction length ``z`` (default p.L) with validity flags."""
    p = p.resolved()
    z = p.L if z is None else z
    rep = DesignReport(p)
    v, rep.flags["slow_light"] = eit_group_velocity(p)
    rep.values["alpha_0"] = p.alpha_0
    rep.values["eit_group_velocity"] = v
    rep.flags["dispersive_regime"] = p.dispersive
    if p.dispersive:
        phi, absorbed = probe_phase_shift(p, z)
        rep.values["phase_shift"] = phi
        rep.values["absorbed_fraction"] = absorbed
        rep.values["loss_ratio"] = loss_ratio(p)
        rep.flags["absorption_below_10pct"] = absorbed < 0.1
    else:
        im_a, im_b = two_photon_absorption(p)
        rep.values["im_alpha_a"] = im_a
        rep.values["im_alpha_b"] = im_b
    sit = sit_soliton_velocity(abs(p.Omega_b), p.alpha_b)
    rep.values["alpha_b"] = p.alpha_b
    rep.values["sit_velocity"] = sit.velocity
    rep.values["sit_width"] = sit.width
    rep.values["sit_area"] = sit.area
    rep.values["matched_Omega_d"] = velocity_matching(abs(p.Omega_b), p.alpha_a, p.alpha_b, p.gamma_2)
    rep.values["matching_mismatch"] = matching_mismatch(p)
    rep.flags["velocity_matched"] = rep.values["matching_mismatch"] < 1e-10
    psi, rep.flags["small_launch_angle"] = launch_angle(p.D, p.L, p.n0, sit.velocity)
    rep.values["launch_angle"] = psi
    z_max = absorption_free_range(sit.velocity, p.gamma_6)
    rep.values["absorption_free_range"] = z_max
    rep.flags["range_covers_length"] = z_max >= z
    if p.Omega_R is not None and p.Delta_raman is not None:
        eff, rep.flags["raman_adiabatic"] = raman_effective_rabi(
            abs(p.Omega_b), p.Omega_R, p.Delta_raman, max(p.gamma_4, p.gamma_6))
        rep.values["raman_effective_rabi"] = eff
    if p.gamma_raman is not None:
        z_raman = absorption_free_range(sit.velocity, p.gamma_raman)
        rep.values["raman_absorption_free_range"] = z_raman
        rep.flags["raman_range_covers_length"] = z_raman >= z
    return rep
