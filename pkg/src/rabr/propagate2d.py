"""Maxwell-Bloch integration with one transverse dimension.

Fields live on a (zeta, x) grid, indexed [zeta, x].  The transverse
direction is periodic and handled with FFTs: the mixed derivatives
-i d^3 Sigma_+/(dtau dx^2) and i d^3 Sigma_-/(dzeta dx^2) only involve Pi and
d Sigma/d zeta, so every wavenumber q is advanced explicitly:

    dPi_+/dtau = Sigma_+'' - eta^2 Sigma_+ + 2i(eta - delta) P + 2 w Sigma_+
                 + q^2 (eta Sigma_+ - i Pi_+ + i dSigma_-/dzeta)
    dPi_-/dtau = Sigma_-'' - eta^2 Sigma_- - 2 dP/dzeta
                 + q^2 (-eta Sigma_- - i Pi_- + i dSigma_+/dzeta)

The Bloch equations are pointwise and unchanged from 1D.  Polarization
sources entering the wave equations are low-pass filtered in q (2/3 rule)
so products computed in real space do not alias.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .model import BLOCH_NORM_TOL, DimensionlessParams, ParameterError
from .propagate1d import (LongitudinalOps, NumericalAbort, RunConfig, peak_location,
                          rk4_step, sponge_profile)


@dataclass
class FieldState2D:
    zeta: np.ndarray
    x: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    pi_plus: np.ndarray
    pi_minus: np.ndarray
    pol: np.ndarray
    inv: np.ndarray
    tau: float = 0.0
    meta: dict = field(default_factory=dict)

    COMPLEX_FIELDS = ("sigma_plus", "sigma_minus", "pi_plus", "pi_minus", "pol")

    def __post_init__(self):
        self.zeta = np.asarray(self.zeta, dtype=float)
        self.x = np.asarray(self.x, dtype=float)
        for name in self.COMPLEX_FIELDS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=complex))
        self.inv = np.asarray(self.inv, dtype=float)
        shape = (len(self.zeta), len(self.x))
        for name in self.COMPLEX_FIELDS + ("inv",):
            if getattr(self, name).shape != shape:
                raise ParameterError(f"{name} does not match the grid shape {shape}")

    @property
    def h(self) -> float:
        return float(self.zeta[1] - self.zeta[0])

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0])

    def bloch_norm_error(self) -> float:
        return float(np.max(np.abs(np.abs(self.pol) ** 2 + self.inv ** 2 - 1)))

    def check(self, tol: float = BLOCH_NORM_TOL) -> None:
        err = self.bloch_norm_error()
        if err > tol:
            raise ParameterError(f"Bloch-vector norm violated by {err:.3g}")

    def copy(self) -> "FieldState2D":
        return replace(self, **{n: getattr(self, n).copy() for n in self.COMPLEX_FIELDS + ("inv",)},
                       meta=dict(self.meta))

    @classmethod
    def ground(cls, zeta, x) -> "FieldState2D":
        shape = (len(zeta), len(x))
        z = np.zeros(shape, dtype=complex)
        return cls(zeta, x, z, z.copy(), z.copy(), z.copy(), z.copy(), -np.ones(shape))

    @classmethod
    def uniform(cls, state1d, x) -> "FieldState2D":
        """Transverse-uniform extension of a 1D state."""
        n = len(x)
        return cls(state1d.zeta, x, *(np.repeat(getattr(state1d, f)[:, None], n, axis=1)
                                      for f in ("sigma_plus", "sigma_minus", "pi_plus",
                                                "pi_minus", "pol", "inv")),
                   tau=state1d.tau, meta=dict(state1d.meta))

    @classmethod
    def from_bullet(cls, bullet) -> "FieldState2D":
        return cls(bullet.zeta, bullet.x, bullet.sigma_plus, bullet.sigma_minus, bullet.pi_plus,
                   bullet.pi_minus, bullet.pol, bullet.inv, bullet.tau,
                   meta={"eta": bullet.eta, "delta": bullet.delta, "C": bullet.C,
                         "Theta0": bullet.Theta0})

    def odd_part(self) -> float:
        """Largest x-odd component of |Sigma_+| relative to its maximum (grid assumed symmetric)."""
        a = np.abs(self.sigma_plus)
        mirrored = a[:, (-np.arange(a.shape[1])) % a.shape[1]]
        return float(np.max(np.abs(a - mirrored)) / max(a.max(), 1e-300))


def transverse_grid(length: float, n: int) -> np.ndarray:
    """Periodic grid on [-length/2, length/2) that is symmetric under x -> -x (mod length)."""
    if length <= 0 or n < 4:
        raise ParameterError("need length > 0 and n >= 4")
    return -length / 2 + length / n * np.arange(n)


def dealias_mask(n: int) -> np.ndarray:
    """Keep |q| below 2/3 of the Nyquist wavenumber."""
    k = np.abs(np.fft.fftfreq(n) * n)
    return (k < n / 3).astype(float)


@dataclass
class Trajectory2D:
    times: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    snapshots: list = field(default_factory=list)
    final: FieldState2D | None = None
    status: str = "ok"
    info: dict = field(default_factory=dict)

    def series(self, key) -> np.ndarray:
        return np.asarray(self.diagnostics[key])


def _metrics(state: FieldState2D, reference=None) -> dict:
    mag = np.abs(state.sigma_plus)
    axis = int(np.argmin(np.abs(state.x)))
    pos, val = peak_location(state.zeta, mag[:, axis])
    out = {"tau": float(state.tau), "bloch_norm_error": state.bloch_norm_error(),
           "peak_position": pos, "peak_value": val,
           "energy": float((mag ** 2).sum() * state.h * state.dx)}
    if reference is not None:
        out["fidelity"] = bullet_fidelity(state, reference(state.tau))
    return out


def make_rhs2d(zeta, x, params: DimensionlessParams, cfg: RunConfig, dealias: bool = True):
    eta, delta = params.eta, params.delta
    ops = LongitudinalOps(len(zeta), zeta[1] - zeta[0], cfg.spatial_scheme,
                          cfg.boundary == "periodic")
    sigma = (sponge_profile(zeta, cfg.sponge_width, cfg.sponge_strength)
             if cfg.boundary == "sponge" else np.zeros_like(zeta))[:, None]
    q2 = ((2 * np.pi * np.fft.fftfreq(len(x), d=x[1] - x[0])) ** 2)[None, :]
    mask = dealias_mask(len(x))[None, :] if dealias else np.ones((1, len(x)))
    coupling = 2j * (eta - delta)

    def fx(a):
        return np.fft.fft(a, axis=1)

    def ifx(a):
        return np.fft.ifft(a, axis=1)

    def rhs(y):
        sp, pp, sm, pm, pol, w = y
        w = w.real
        dsp, dsm = ops.d1(sp), ops.d1(sm)
        src_p = coupling * pol + 2 * w * sp
        src_m = -2 * ops.d1(pol)
        trans_p = q2 * fx(eta * sp - 1j * pp + 1j * dsm) + mask * fx(src_p)
        trans_m = q2 * fx(-eta * sm - 1j * pm + 1j * dsp) + mask * fx(src_m)
        out = np.empty_like(y)
        out[0] = pp
        out[1] = ops.d2(sp) - eta ** 2 * sp + ifx(trans_p) - sigma * pp
        out[2] = pm
        out[3] = ops.d2(sm) - eta ** 2 * sm + ifx(trans_m) - sigma * pm
        out[4] = -1j * delta * pol + w * sp
        out[5] = -(sp * np.conj(pol)).real
        return out

    return rhs


def _pack(s: FieldState2D):
    return np.stack([s.sigma_plus, s.pi_plus, s.sigma_minus, s.pi_minus, s.pol,
                     s.inv.astype(complex)])


def _unpack(y, like: FieldState2D, tau) -> FieldState2D:
    return FieldState2D(like.zeta, like.x, y[0].copy(), y[2].copy(), y[1].copy(), y[3].copy(),
                        y[4].copy(), y[5].real.copy(), tau, dict(like.meta))


def evolve2d(initial: FieldState2D, params: DimensionlessParams, cfg: RunConfig, tau_end: float,
             reference=None, keep_every: int = 0, dealias: bool = True,
             progress=None) -> Trajectory2D:
    """Integrate to ``tau_end`` with RK4 and dt = cfl * min(dzeta, ...).

    ``reference`` is an optional callable tau -> LightBulletState; when given,
    the bullet fidelity is recorded at every output.  ``keep_every`` > 0
    stores every n-th output state.  The step also respects the transverse
    rotation rate q_max^2 (dt q_max^2 <= 2).
    """
    if not tau_end > initial.tau:
        raise ParameterError("tau_end must exceed the initial time")
    initial.check(tol=1e-6)
    h = initial.h
    q_max = math.pi / initial.dx
    dt_max = min(cfg.cfl * h, 2.0 / q_max ** 2)
    n_steps = int(math.ceil((tau_end - initial.tau) / dt_max))
    dt = (tau_end - initial.tau) / n_steps
    rhs = make_rhs2d(initial.zeta, initial.x, params, cfg, dealias)

    traj = Trajectory2D(info={"dt": dt, "n_steps": n_steps})

    def record(state, k):
        traj.times.append(float(state.tau))
        for key, val in _metrics(state, reference).items():
            traj.diagnostics.setdefault(key, []).append(val)
        if keep_every and k % keep_every == 0:
            traj.snapshots.append(state.copy())

    record(initial, 0)
    y = _pack(initial)
    k = 0
    for step in range(1, n_steps + 1):
        y = rk4_step(rhs, y, dt)
        if step % cfg.output_every == 0 or step == n_steps:
            k += 1
            state = _unpack(y, initial, initial.tau + step * dt)
            record(state, k)
            err = traj.diagnostics["bloch_norm_error"][-1]
            if progress is not None:
                progress(state, traj)
            if not np.all(np.isfinite(y)) or err > cfg.norm_abort:
                traj.status = "aborted"
                traj.final = state
                raise NumericalAbort(
                    f"Bloch-norm drift {err:.3g} at tau={state.tau:.4g} exceeds {cfg.norm_abort}",
                    traj)
    traj.final = _unpack(y, initial, tau_end)
    return traj


def bullet_fidelity(state, reference) -> float:
    """Normalised overlap of |Sigma_+| with the reference, maximised over (zeta, x) shifts.

    Shifts are searched on the grid by FFT cross-correlation: zero-padded
    along zeta and periodic along x.
    """
    a = np.abs(np.asarray(reference.sigma_plus))
    b = np.abs(np.asarray(state.sigma_plus))
    if a.shape != b.shape:
        raise ParameterError("state and reference grids differ")
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 1.0 if na == nb else 0.0
    a, b = a / na, b / nb
    n = a.shape[0]
    fa = np.fft.fft2(a, s=(2 * n, a.shape[1]))
    fb = np.fft.fft2(b, s=(2 * n, b.shape[1]))
    corr = np.fft.ifft2(fb * np.conj(fa)).real
    return float(min(1.0, corr.max() ** 2))
