"""Closed-form and semi-analytic soliton solutions.

Covers the uniform-medium 2pi SIT pulse, the standing (zero-velocity) gap
soliton obtained by inverting its implicit profile relation, the companion
Sigma_- field, the NLS reduction near the kappa = 0 band edges, and the 2D
light-bullet ansatz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .dispersion import dressed_roots, soliton_bands
from .model import DomainError, FieldState1D, Grid1D, ParameterError


# ---------------------------------------------------------------------------
# uniform-medium SIT soliton


@dataclass(frozen=True)
class SechSoliton:
    """2pi SIT pulse Omega = A0 sech(beta (zeta - v tau~)) / tau0."""

    beta: float
    tau0: float = 1.0

    def __post_init__(self):
        if not self.beta > 0:
            raise ParameterError("beta must be > 0")

    @property
    def amplitude(self) -> float:
        return 2 / self.beta

    @property
    def velocity(self) -> float:
        return 1 / self.beta ** 2

    def rabi(self, zeta, tau=0.0):
        zeta = np.asarray(zeta, dtype=float)
        return self.amplitude / np.cosh(self.beta * (zeta - self.velocity * tau)) / self.tau0

    def area_phase(self, zeta, tau=0.0):
        """Running pulse area theta(zeta, tau~); falls from 2pi behind the pulse to 0 ahead."""
        zeta = np.asarray(zeta, dtype=float)
        arg = -self.beta * (zeta - self.velocity * tau)
        # 4 atan(e^a) written to stay accurate for large |a|
        return np.where(arg > 0, 2 * np.pi - 4 * np.arctan(np.exp(-np.abs(arg))),
                        4 * np.arctan(np.exp(-np.abs(arg))))


def sit_sech_soliton(beta: float, tau0: float = 1.0) -> SechSoliton:
    return SechSoliton(beta, tau0)


# ---------------------------------------------------------------------------
# zero-velocity gap soliton


def _zv_constants(chi, eta, delta):
    r0sq = 1 - abs((chi + eta) * (chi - delta)) / 2
    k = math.sqrt(2 * abs((chi - delta) / (chi - eta)))
    return r0sq, k


def zeta_of_r(r, chi: float, eta: float, delta: float):
    """|zeta| at which the profile parameter equals ``r`` (0 < r <= R0)."""
    r0sq, k = _zv_constants(chi, eta, delta)
    r0 = math.sqrt(r0sq)
    r = np.asarray(r, dtype=float)
    gap = np.sqrt(np.maximum(r0sq - r * r, 0.0))
    return k * (np.arctan(gap / math.sqrt(1 - r0sq)) / math.sqrt(1 - r0sq)
                + np.log((r0 + gap) / r) / (2 * r0))


def zv_decay_rate(chi: float, eta: float, delta: float) -> float:
    """Tail rate of the small-amplitude sech limit."""
    r0sq, _ = _zv_constants(chi, eta, delta)
    return math.sqrt(max(r0sq, 0.0)) * math.sqrt(2 * abs((chi - eta) / (chi - delta)))


def invert_zeta_of_r(abs_zeta, chi, eta, delta, tol=1e-12, r_floor=1e-300):
    """Solve zeta_of_r(R) = |zeta| for R pointwise.

    Bisection in log R over (r_floor, R0] followed by a secant step kept
    inside the final bracket.  Points beyond zeta_of_r(r_floor) get r_floor.
    """
    r0 = math.sqrt(_zv_constants(chi, eta, delta)[0])
    target = np.asarray(abs_zeta, dtype=float)
    lo = np.full(target.shape, math.log(r_floor))
    hi = np.full(target.shape, math.log(r0))
    # zeta_of_r decreases in R: larger zeta -> smaller R
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        too_far = zeta_of_r(np.exp(mid), chi, eta, delta) > target
        lo = np.where(too_far, mid, lo)
        hi = np.where(too_far, hi, mid)
        if np.max(np.exp(hi) - np.exp(lo)) < tol * r0 * 1e-3:
            break
    r_lo, r_hi = np.exp(lo), np.exp(hi)
    f_lo = zeta_of_r(r_lo, chi, eta, delta) - target
    f_hi = zeta_of_r(r_hi, chi, eta, delta) - target
    denom = f_hi - f_lo
    with np.errstate(divide="ignore", invalid="ignore"):
        sec = r_hi - f_hi * (r_hi - r_lo) / denom
    ok = np.isfinite(sec) & (sec >= r_lo) & (sec <= r_hi)
    r = np.where(ok, sec, 0.5 * (r_lo + r_hi))
    r = np.where(target <= 0, r0, r)
    return r


def _check_monotone(chi, eta, delta, n=2000):
    r0 = math.sqrt(_zv_constants(chi, eta, delta)[0])
    r = r0 * np.logspace(-12, 0, n)
    z = zeta_of_r(r, chi, eta, delta)
    if not np.all(np.diff(z) < 0):
        raise DomainError("implicit profile relation is not monotone; cannot bracket")


@dataclass
class ZVSolitonProfile:
    chi: float
    eta: float
    delta: float
    grid: Grid1D
    S: np.ndarray
    Pcal: np.ndarray
    Acal: np.ndarray
    R0: float
    S_peak: float
    meta: dict = field(default_factory=dict)

    @property
    def zeta(self) -> np.ndarray:
        return self.grid.zeta

    @property
    def area(self) -> float:
        return float(np.sum(np.abs(self.S)) * self.grid.h)

    def inversion(self) -> np.ndarray:
        d = self.chi - self.delta
        return -abs(d) / np.sqrt(d * d + self.S ** 2)

    def to_state(self, push: float = 0.0) -> FieldState1D:
        """Field state at tau = 0, optionally multiplied by exp(i push zeta).

        Time derivatives follow the stationary ansatz, Pi = -i chi Sigma.
        The push phase is applied to Sigma_+-, Pi_+- and P alike, which keeps
        the Bloch norm intact.
        """
        phase = np.exp(1j * push * self.zeta)
        sp = self.S * phase
        sm = 1j * self.Acal * phase
        return FieldState1D(
            self.zeta, sp, sm, -1j * self.chi * sp, -1j * self.chi * sm,
            1j * self.Pcal * phase, self.inversion(), 0.0,
            meta={"chi": self.chi, "eta": self.eta, "delta": self.delta, "push": push})


def _check_in_band(chi, eta, delta):
    bands = soliton_bands(eta, delta)
    if not bands.contains(chi):
        raise DomainError(
            f"chi={chi} is outside the soliton bands: lower={bands.lower_band}, "
            f"upper={bands.upper_band}")
    r0sq, _ = _zv_constants(chi, eta, delta)
    if r0sq <= 0 or r0sq >= 1:
        raise DomainError(f"degenerate profile, R0^2 = {r0sq}")


def default_zv_grid(chi, eta, delta, n_zeta=4096, widths=20.0, tail=1e-7) -> Grid1D:
    """Centred grid of +-``widths`` sech widths, widened if the tail is not yet below ``tail``."""
    _check_in_band(chi, eta, delta)
    r0sq, _ = _zv_constants(chi, eta, delta)
    half = widths / zv_decay_rate(chi, eta, delta)
    s_peak = 4 * math.sqrt(r0sq) / abs(chi + eta)
    r_tail = tail * s_peak / (2 * abs(chi - delta))
    half = max(half, 1.05 * float(zeta_of_r(r_tail, chi, eta, delta)))
    return Grid1D.centered(half, n_zeta)


def zv_soliton(chi: float, eta: float, delta: float, grid: Grid1D | None = None) -> ZVSolitonProfile:
    """Standing gap soliton at frequency ``chi``."""
    _check_in_band(chi, eta, delta)
    _check_monotone(chi, eta, delta)
    r0sq, _ = _zv_constants(chi, eta, delta)
    if grid is None:
        grid = default_zv_grid(chi, eta, delta)
    zeta = grid.zeta
    r0 = math.sqrt(r0sq)
    d = chi - delta

    r = invert_zeta_of_r(np.abs(zeta), chi, eta, delta)
    S = 2 * abs(d) * r / (1 - r * r)
    Pcal = -np.sign(d) * S / np.sqrt(d * d + S * S)
    Acal, radiative = sigma_minus_of(Pcal, grid.h, chi, eta)
    s_peak = float(S.max())

    meta = {
        "S_peak_substitution": 4 * r0 / abs(chi + eta),
        "S_peak_printed": 4 * r0 / math.sqrt(abs(chi + eta)),
        "radiative": radiative,
        "grid_too_small": bool(max(S[0], S[-1]) > 1e-6 * s_peak),
    }
    meta["S_peak_deviation_substitution"] = abs(s_peak - meta["S_peak_substitution"])
    meta["S_peak_deviation_printed"] = abs(s_peak - meta["S_peak_printed"])
    return ZVSolitonProfile(chi, eta, delta, grid, S, Pcal, Acal, r0, s_peak, meta)


def zv_small_amplitude(chi: float, eta: float, delta: float, zeta) -> np.ndarray:
    """Broad sech limit of the standing soliton, valid for R0^2 << 1."""
    r0 = math.sqrt(_zv_constants(chi, eta, delta)[0])
    return 2 * abs(chi - delta) * r0 / np.cosh(zv_decay_rate(chi, eta, delta) * np.asarray(zeta))


def zv_rhs(S, chi: float, eta: float, delta: float):
    """Right-hand side of the stationary profile equation S'' = f(S)."""
    d = chi - delta
    return (eta ** 2 - chi ** 2) * S - 2 * S * (eta - chi) * np.sign(d) / np.sqrt(d * d + S * S)


def sigma_minus_of(Pcal, h: float, chi: float, eta: float, eps_rel: float = 1e-6):
    """Solve A'' + (chi^2 - eta^2) A = 2 P' spectrally on a uniform grid of spacing ``h``.

    Returns (A, radiative).  For |chi| > eta the operator has propagating
    modes and the denominator is shifted by i*eps; the flag reports it.
    """
    Pcal = np.asarray(Pcal, dtype=float)
    k = 2 * np.pi * np.fft.fftfreq(len(Pcal), d=h)
    denom = (chi * chi - eta * eta - k * k).astype(complex)
    radiative = abs(chi) > eta
    if radiative:
        denom = denom + 1j * eps_rel * (chi * chi + eta * eta)
    a_hat = 2j * k * np.fft.fft(Pcal) / denom
    return np.fft.ifft(a_hat).real, radiative


# ---------------------------------------------------------------------------
# NLS reduction


@dataclass(frozen=True)
class NLSReduction:
    """Coefficients of 2i a S_tau + S_zz + b |S|^2 S = c S near a kappa = 0 frequency chi0."""

    eta: float
    delta: float
    chi0: float
    coeff_time: float
    coeff_nonlinear: float
    coeff_detune: float
    is_anchor: bool

    @property
    def a(self) -> float:
        return self.coeff_time / 2

    @property
    def dispersion(self) -> float:
        """D in i S_tau + (D/2) S_zz + g |S|^2 S = 0."""
        return 1 / self.a

    @property
    def nonlinearity(self) -> float:
        return self.coeff_nonlinear / (2 * self.a)

    @property
    def bright(self) -> bool:
        return self.dispersion * self.nonlinearity > 0

    def soliton(self, amplitude: float, velocity: float, zeta, tau: float = 0.0,
                center: float = 0.0) -> np.ndarray:
        """Slowly varying envelope S(zeta, tau) of the bright NLS soliton."""
        if not self.bright:
            raise DomainError("no bright soliton: dispersion and nonlinearity have opposite signs")
        p = self.dispersion / 2
        q = self.nonlinearity
        zeta = np.asarray(zeta, dtype=float)
        xi = zeta - center - velocity * tau
        lam = amplitude * math.sqrt(q / (2 * p))
        phase = velocity / (2 * p) * (zeta - center) - (velocity ** 2 / (4 * p) - q * amplitude ** 2 / 2) * tau
        detune = -self.coeff_detune / (2 * self.a) * tau
        return amplitude / np.cosh(lam * xi) * np.exp(1j * (phase + detune))

    def field_state(self, amplitude, velocity, zeta, center=0.0, dt=1e-6) -> FieldState1D:
        """Full-model state seeded with the NLS soliton, medium slaved adiabatically."""
        def sigma(t):
            return self.soliton(amplitude, velocity, zeta, t, center) * np.exp(-1j * self.chi0 * t)

        sp = sigma(0.0)
        pi_p = (sigma(dt) - sigma(-dt)) / (2 * dt)
        d = self.chi0 - self.delta
        root = np.sqrt(d * d + np.abs(sp) ** 2)
        pol = -1j * np.sign(d) * sp / root
        inv = -abs(d) / root
        z = np.zeros_like(sp)
        return FieldState1D(zeta, sp, z, pi_p, z.copy(), pol, inv)


def nls_reduction(eta: float, delta: float, chi0: float) -> NLSReduction:
    d = chi0 - delta
    if d == 0:
        raise DomainError("chi0 = delta makes the reduction singular")
    coeff_time = 2 * (chi0 * d * d - eta + delta) / (d * d)
    coeff_nl = (chi0 - eta) / d ** 3
    coeff_det = eta ** 2 - chi0 ** 2 + 2 * (chi0 - eta) / d
    anchors = list(dressed_roots(0.0, eta, delta)) + [eta]
    is_anchor = any(abs(chi0 - a) <= 1e-9 * max(1.0, abs(a)) for a in anchors)
    return NLSReduction(eta, delta, chi0, coeff_time, coeff_nl, coeff_det, is_anchor)


# ---------------------------------------------------------------------------
# 2D light bullet


@dataclass
class LightBulletState:
    eta: float
    delta: float
    C: float
    Theta0: float
    A0: float
    beta: float
    v: float
    kappa: float
    chi: float
    zeta: np.ndarray
    x: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    pi_plus: np.ndarray
    pi_minus: np.ndarray
    pol: np.ndarray
    inv: np.ndarray
    tau: float = 0.0
    medium: str = "ansatz"

    @property
    def validity_metric(self) -> float:
        return math.sqrt(self.delta / self.eta - 1) * self.C ** 2

    @property
    def valid(self) -> bool:
        return self.validity_metric < 0.1

    @property
    def center(self) -> float:
        """Longitudinal position of the peak at ``tau``."""
        return self.v * self.tau - self.Theta0 / self.beta

    @property
    def group_velocity(self) -> float:
        return self.v


def bullet_constants(eta: float, delta: float) -> dict:
    if not eta > 0 or not delta / eta > 1:
        raise ParameterError("light bullet requires delta/eta > 1")
    return {
        "A0": 2 * math.sqrt(delta / eta - 1),
        "beta": math.sqrt(delta / eta + 1),
        "v": -math.sqrt((delta - eta) / (delta + eta)),
        "kappa": -math.sqrt(delta ** 2 - eta ** 2),
        "chi": delta,
    }


def _sech(a):
    return 1 / np.cosh(a)


def _bullet_field(s, cx, A0):
    """Sigma_+ envelope (without carrier) as a function of s = beta(zeta - v tau) + Theta0 and C x."""
    return A0 * np.sqrt(_sech(s + cx) * _sech(s - cx))


def _history_medium(s, cx, A0, beta, v, ds=0.01, s_start=-40.0):
    """Bloch vector left behind by the travelling ansatz field.

    With chi = delta the carrier drops out and, in the variable s (which
    grows at rate beta|v| at a fixed point), the Bloch equations read
    dp/ds = w F(s)/(beta|v|),  dw/ds = -Re(F p*)/(beta|v|)
    with F = A0 sqrt(sech(s+Cx) sech(s-Cx)) e^{i pi/4}.  They are integrated
    from the ground state once per transverse position and interpolated.
    """
    cx_vals, inverse = np.unique(cx, return_inverse=True)
    rate = 1 / (beta * abs(v))
    s_hi = max(float(np.max(s)), -s_start)
    n = int(math.ceil((s_hi - s_start) / ds))
    grid_s = s_start + ds * np.arange(n + 1)
    rot = np.exp(1j * np.pi / 4)

    def rhs(si, p, w):
        f = _bullet_field(si, cx_vals, A0) * rot * rate
        return w * f, -(f * np.conj(p)).real

    p = np.zeros(len(cx_vals), dtype=complex)
    w = -np.ones(len(cx_vals))
    ps = np.empty((n + 1, len(cx_vals)), dtype=complex)
    ws = np.empty((n + 1, len(cx_vals)))
    ps[0], ws[0] = p, w
    for i in range(n):
        si = grid_s[i]
        k1p, k1w = rhs(si, p, w)
        k2p, k2w = rhs(si + ds / 2, p + ds / 2 * k1p, w + ds / 2 * k1w)
        k3p, k3w = rhs(si + ds / 2, p + ds / 2 * k2p, w + ds / 2 * k2w)
        k4p, k4w = rhs(si + ds, p + ds * k3p, w + ds * k3w)
        p = p + ds / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        w = w + ds / 6 * (k1w + 2 * k2w + 2 * k3w + k4w)
        ps[i + 1], ws[i + 1] = p, w

    s_flat = np.broadcast_to(s, cx.shape).ravel()
    idx = inverse.ravel()
    pol = np.empty(s_flat.shape, dtype=complex)
    inv = np.empty(s_flat.shape)
    for j in range(len(cx_vals)):
        sel = idx == j
        pol[sel] = (np.interp(s_flat[sel], grid_s, ps[:, j].real, left=0.0)
                    + 1j * np.interp(s_flat[sel], grid_s, ps[:, j].imag, left=0.0))
        inv[sel] = np.interp(s_flat[sel], grid_s, ws[:, j], left=-1.0)
    norm = np.sqrt(np.abs(pol) ** 2 + inv ** 2)
    return (pol / norm).reshape(cx.shape), (inv / norm).reshape(cx.shape)


def light_bullet_ansatz(eta: float, delta: float, C: float, Theta0: float, zeta, x,
                        tau: float = 0.0, medium: str = "ansatz") -> LightBulletState:
    """Spatiotemporal bullet on the (zeta, x) grid at time ``tau``.

    Arrays are indexed [zeta, x].  ``medium`` selects how (P, w) are built:
    "ansatz" uses the closed form (P with the modulus of the ansatz, w =
    +-sqrt(1 - |P|^2) signed so that it relaxes to the ground state away from
    the pulse), "history" integrates the Bloch equations under the ansatz
    field's own past.  Both are unit norm and agree on axis; off axis the
    history medium is left partly inverted behind the pulse.
    """
    k = bullet_constants(eta, delta)
    metric = math.sqrt(delta / eta - 1) * C ** 2
    if metric >= 1:
        raise ParameterError(f"validity metric sqrt(delta/eta-1) C^2 = {metric:.3g} >= 1")
    if medium not in ("ansatz", "history"):
        raise ParameterError(f"unknown medium construction {medium!r}")
    A0, beta, v, kappa, chi = k["A0"], k["beta"], k["v"], k["kappa"], k["chi"]
    zeta = np.asarray(zeta, dtype=float)
    x = np.asarray(x, dtype=float)
    Z, X = np.meshgrid(zeta, x, indexing="ij")
    s = beta * (Z - v * tau) + Theta0
    th1, th2 = s + C * X, s - C * X
    s1, s2, t1, t2 = _sech(th1), _sech(th2), np.tanh(th1), np.tanh(th2)
    u = np.sqrt(s1 * s2)
    carrier = np.exp(1j * (kappa * Z - chi * tau) + 1j * np.pi / 4)

    sp = A0 * u * carrier
    pi_p = (0.5 * beta * v * (t1 + t2) - 1j * chi) * sp
    sm = sp / v
    pi_m = pi_p / v

    if medium == "ansatz":
        br = (t1 - t2) ** 2 - 2 * (s1 ** 2 + s2 ** 2)
        pol = u * ((t1 + t2) - 1j * math.sqrt((delta - eta) / (4 * eta)) * C ** 2 * br) * carrier
        mag = np.abs(pol)
        pol = np.where(mag > 1, pol / np.maximum(mag, 1e-300), pol)
        inv = np.where(2 * s1 * s2 - 1 >= 0, 1.0, -1.0) * np.sqrt(np.maximum(1 - np.abs(pol) ** 2, 0))
    else:
        p_env, inv = _history_medium(s, C * X, A0, beta, v)
        # p_env carries the e^{i pi/4} of the field; restore the spatial carrier
        pol = p_env * np.exp(1j * (kappa * Z - chi * tau))

    return LightBulletState(eta, delta, C, Theta0, A0, beta, v, kappa, chi, zeta, x,
                            sp, sm, pi_p, pi_m, pol, inv, tau, medium)
