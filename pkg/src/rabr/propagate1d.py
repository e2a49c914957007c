"""Time integration of the 1D Maxwell-Bloch system.

The wave equations are second order in time; each is split into the field
and its time derivative (Pi = d Sigma / d tau) and advanced with classical
RK4 together with the Bloch equations:

    dPi_+/dtau = Sigma_+'' - eta^2 Sigma_+ + 2i(eta - delta) P + 2 w Sigma_+
    dPi_-/dtau = Sigma_-'' - eta^2 Sigma_- - 2 P'
    dP/dtau    = -i delta P + w Sigma_+
    dw/dtau    = -Re(Sigma_+ P*)

The inversion w is a dynamical variable (ground state w = -1), so the Bloch
norm |P|^2 + w^2 is a conserved quantity that the run monitors.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import find_peaks

from .model import DimensionlessParams, FieldState1D, ParameterError

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


class NumericalAbort(RuntimeError):
    """Raised when a run leaves its validity envelope; carries the partial trajectory."""

    def __init__(self, message, trajectory=None):
        super().__init__(message)
        self.trajectory = trajectory


@dataclass(frozen=True)
class RunConfig:
    boundary: str = "sponge"
    sponge_width: float = 0.1
    cfl: float = 0.5
    output_every: int = 50
    spatial_scheme: str = "fd4"
    sponge_strength: float = 2.0
    norm_abort: float = 1e-3
    keep_states: bool = True

    def __post_init__(self):
        if self.boundary not in ("periodic", "sponge"):
            raise ConfigError(f"unknown boundary {self.boundary!r}")
        if self.spatial_scheme not in ("spectral", "fd4"):
            raise ConfigError(f"unknown spatial scheme {self.spatial_scheme!r}")
        if not 0 < self.cfl <= 0.9:
            raise ConfigError(f"cfl={self.cfl} violates 0 < cfl <= 0.9")
        if self.boundary == "sponge" and not 0.02 <= self.sponge_width <= 0.25:
            raise ConfigError("sponge_width must lie in [0.02, 0.25]")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1")


# ---------------------------------------------------------------------------
# spatial operators (axis 0 is the longitudinal coordinate)


class LongitudinalOps:
    """First and second zeta-derivatives along axis 0."""

    def __init__(self, n: int, h: float, scheme: str, periodic: bool):
        if scheme == "spectral" and not periodic:
            raise ConfigError("spectral derivatives need periodic boundaries")
        self.n, self.h, self.scheme, self.periodic = n, h, scheme, periodic
        if scheme == "spectral":
            self.k = 2 * np.pi * np.fft.fftfreq(n, d=h)

    def _expand(self, a):
        return self.k.reshape((-1,) + (1,) * (a.ndim - 1))

    def _padded(self, a):
        """Copy of ``a`` with two ghost rows at each end (periodic wrap or zeros)."""
        b = np.empty((a.shape[0] + 4,) + a.shape[1:], dtype=a.dtype)
        b[2:-2] = a
        if self.periodic:
            b[:2] = a[-2:]
            b[-2:] = a[:2]
        else:
            b[:2] = 0
            b[-2:] = 0
        return b

    def d1(self, a):
        if self.scheme == "spectral":
            return np.fft.ifft(1j * self._expand(a) * np.fft.fft(a, axis=0), axis=0)
        b = self._padded(a)
        out = b[:-4] - b[4:]
        out -= 8 * (b[1:-3] - b[3:-1])
        out *= 1 / (12 * self.h)
        return out

    def d2(self, a):
        if self.scheme == "spectral":
            return np.fft.ifft(-self._expand(a) ** 2 * np.fft.fft(a, axis=0), axis=0)
        b = self._padded(a)
        out = b[1:-3] + b[3:-1]
        out *= 16
        out -= b[:-4]
        out -= b[4:]
        out -= 30 * a
        out *= 1 / (12 * self.h ** 2)
        return out


def sponge_profile(zeta: np.ndarray, width: float, strength: float) -> np.ndarray:
    """Damping rate rising quadratically over ``width`` (fraction of the domain) at each end."""
    length = zeta[-1] - zeta[0]
    ramp = width * length
    depth = np.maximum(np.maximum(zeta[0] + ramp - zeta, zeta - (zeta[-1] - ramp)), 0.0)
    return strength * (depth / ramp) ** 2


def interior_mask(zeta: np.ndarray, cfg: RunConfig) -> np.ndarray:
    if cfg.boundary != "sponge":
        return np.ones(zeta.shape, dtype=bool)
    return sponge_profile(zeta, cfg.sponge_width, 1.0) == 0


def rk4_step(rhs, y, dt):
    k1 = rhs(y)
    k2 = rhs(y + 0.5 * dt * k1)
    k3 = rhs(y + 0.5 * dt * k2)
    k4 = rhs(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


# ---------------------------------------------------------------------------
# diagnostics


def peak_location(zeta, mag):
    """Position and height of the global maximum, refined by a parabola through three points."""
    i = int(np.argmax(mag))
    if 0 < i < len(mag) - 1:
        a, b, c = mag[i - 1], mag[i], mag[i + 1]
        denom = a - 2 * b + c
        off = 0.5 * (a - c) / denom if denom != 0 else 0.0
        h = zeta[1] - zeta[0]
        return float(zeta[i] + off * h), float(b - 0.25 * (a - c) * off)
    return float(zeta[i]), float(mag[i])


def state_metrics(state: FieldState1D) -> dict:
    h = state.h
    mag = np.abs(state.sigma_plus)
    power = mag ** 2
    total = power.sum()
    pos, val = peak_location(state.zeta, mag)
    return {
        "tau": float(state.tau),
        "area": float(mag.sum() * h),
        "field_energy": float((power + np.abs(state.sigma_minus) ** 2).sum() * h),
        "bloch_norm_error": state.bloch_norm_error(),
        "centroid": float((state.zeta * power).sum() / total) if total > 0 else float("nan"),
        "peak_position": pos,
        "peak_value": val,
    }


def temporal_area(rabi_series, dtau: float) -> float:
    """Time integral of a Rabi-frequency record sampled at a fixed point."""
    r = np.asarray(rabi_series)
    return float(np.trapezoid(r, dx=dtau)) if hasattr(np, "trapezoid") else float(np.trapz(r, dx=dtau))


def _overlap_all_shifts(a, b):
    """<a, b shifted by s> for every integer shift s, via zero-padded FFT correlation."""
    n = len(a)
    fa = np.fft.fft(a, 2 * n)
    fb = np.fft.fft(b, 2 * n)
    return np.fft.ifft(fb * np.conj(fa))


def fidelity(a, b, translate: bool = True) -> float:
    """|<a, b>|^2 / (|a|^2 |b|^2), maximised over integer grid translations of b."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    na = np.linalg.norm(a)
    nb = np.linalg.norm(b)
    if na == 0 or nb == 0:
        return 1.0 if na == nb else 0.0
    # normalise first so tiny amplitudes do not underflow in the product of norms
    a, b = a / na, b / nb
    if not translate:
        return float(min(abs(np.vdot(a, b)) ** 2, 1.0))
    corr = _overlap_all_shifts(a, b)
    return float(min(np.max(np.abs(corr)) ** 2, 1.0))


# ---------------------------------------------------------------------------
# Maxwell-Bloch integration


@dataclass
class Trajectory:
    times: list = field(default_factory=list)
    snapshots: list = field(default_factory=list)
    diagnostics: dict = field(default_factory=dict)
    status: str = "ok"
    info: dict = field(default_factory=dict)

    def record(self, state, keep: bool):
        if self.times and state.tau <= self.times[-1]:
            raise ValueError("snapshot times must increase")
        self.times.append(float(state.tau))
        self.snapshots.append(state.copy() if keep else None)
        for k, v in state_metrics(state).items():
            self.diagnostics.setdefault(k, []).append(v)

    def series(self, key) -> np.ndarray:
        return np.asarray(self.diagnostics[key])

    @property
    def final(self):
        return self.snapshots[-1]


def _pack(state: FieldState1D) -> np.ndarray:
    return np.stack([state.sigma_plus, state.pi_plus, state.sigma_minus, state.pi_minus,
                     state.pol, state.inv.astype(complex)])


def _unpack(y, zeta, tau, meta) -> FieldState1D:
    return FieldState1D(zeta, y[0].copy(), y[2].copy(), y[1].copy(), y[3].copy(),
                        y[4].copy(), y[5].real.copy(), tau, dict(meta))


def make_rhs(zeta, params: DimensionlessParams, cfg: RunConfig):
    eta, delta = params.eta, params.delta
    h = zeta[1] - zeta[0]
    ops = LongitudinalOps(len(zeta), h, cfg.spatial_scheme, cfg.boundary == "periodic")
    sigma = (sponge_profile(zeta, cfg.sponge_width, cfg.sponge_strength)
             if cfg.boundary == "sponge" else np.zeros_like(zeta))
    coupling = 2j * (eta - delta)

    def rhs(y):
        sp, pp, sm, pm, pol, w = y
        w = w.real
        out = np.empty_like(y)
        out[0] = pp
        out[1] = ops.d2(sp) - eta ** 2 * sp + coupling * pol + 2 * w * sp - sigma * pp
        out[2] = pm
        out[3] = ops.d2(sm) - eta ** 2 * sm - 2 * ops.d1(pol) - sigma * pm
        out[4] = -1j * delta * pol + w * sp
        out[5] = -(sp * np.conj(pol)).real
        return out

    return rhs


def evolve(initial: FieldState1D, params: DimensionlessParams, cfg: RunConfig,
           tau_end: float) -> Trajectory:
    """Integrate from ``initial.tau`` to ``tau_end`` with dt = cfl * dzeta."""
    if not tau_end > initial.tau:
        raise ParameterError("tau_end must exceed the initial time")
    initial.check()
    zeta = initial.zeta
    h = zeta[1] - zeta[0]
    n_steps = int(math.ceil((tau_end - initial.tau) / (cfg.cfl * h)))
    dt = (tau_end - initial.tau) / n_steps
    rhs = make_rhs(zeta, params, cfg)

    traj = Trajectory(info={"dt": dt, "n_steps": n_steps, "eta": params.eta,
                            "delta": params.delta})
    traj.record(initial, cfg.keep_states)
    y = _pack(initial)
    tau0 = initial.tau
    for step in range(1, n_steps + 1):
        y = rk4_step(rhs, y, dt)
        if step % cfg.output_every == 0 or step == n_steps:
            state = _unpack(y, zeta, tau0 + step * dt, initial.meta)
            traj.record(state, cfg.keep_states)
            err = traj.diagnostics["bloch_norm_error"][-1]
            if not np.all(np.isfinite(y)) or err > cfg.norm_abort:
                traj.status = "aborted"
                raise NumericalAbort(
                    f"Bloch-norm drift {err:.3g} at tau={state.tau:.4g} exceeds {cfg.norm_abort}",
                    traj)
    if not cfg.keep_states:
        traj.snapshots[-1] = _unpack(y, zeta, tau_end, initial.meta)
    return traj


def time_reversed(state: FieldState1D) -> FieldState1D:
    """Image of ``state`` under tau -> -tau for the lossless equations.

    Sigma_+ -> Sigma_+*, Sigma_- -> -Sigma_-*, Pi_+ -> -Pi_+*, Pi_- -> Pi_-*,
    P -> -P*, w -> w.  Applying it twice is the identity; evolving the image
    for a time T and mapping back undoes T of forward evolution.
    """
    return FieldState1D(state.zeta, np.conj(state.sigma_plus), -np.conj(state.sigma_minus),
                        -np.conj(state.pi_plus), np.conj(state.pi_minus), -np.conj(state.pol),
                        state.inv.copy(), state.tau, dict(state.meta))


# ---------------------------------------------------------------------------
# push experiments


@dataclass
class SolitonCensus:
    count: int
    positions: list
    velocities: list
    peaks: list

    @property
    def quiescent(self) -> int:
        return sum(abs(v) < 1e-3 for v in self.velocities)

    @property
    def moving(self) -> int:
        return self.count - self.quiescent


def _local_maxima(mag, threshold, mask, min_gap=1):
    # prominence keeps ripples riding on one hump from counting as separate pulses
    idx, _ = find_peaks(mag, height=threshold, prominence=threshold, distance=max(1, min_gap))
    return idx[mask[idx]]


def soliton_census(traj: Trajectory, cfg: RunConfig, rel_threshold: float = 0.1,
                   window: float = 0.25, search: float = 3.0,
                   min_separation: float = 2.0) -> SolitonCensus:
    """Count humps of |Sigma_+| above ``rel_threshold`` of the global peak at the end of the run.

    A hump is a local maximum whose height and prominence both exceed the
    threshold; of two humps closer than ``min_separation`` only the higher is
    kept, and the sponge layers are excluded.
    It counts when it can be followed back through every snapshot of the
    last ``window`` fraction of the run (nearest local maximum within
    ``search`` of the previous position).  Velocities are least-squares
    slopes of the tracked positions.
    """
    states = [s for s in traj.snapshots if s is not None]
    if not states:
        raise ValueError("census needs stored snapshots")
    zeta = states[-1].zeta
    mask = interior_mask(zeta, cfg)
    t_end = states[-1].tau
    t_start = states[0].tau
    tail = [s for s in states if s.tau >= t_end - window * (t_end - t_start)]

    def maxima(s):
        mag = np.abs(s.sigma_plus)
        gap = int(round(min_separation / (zeta[1] - zeta[0])))
        return mag, _local_maxima(mag, rel_threshold * mag[mask].max(), mask, gap)

    mag_end, idx_end = maxima(tail[-1])
    positions, velocities, peaks = [], [], []
    for i0 in idx_end:
        track_t, track_z = [], []
        cur = peak_location(zeta[i0 - 1:i0 + 2], mag_end[i0 - 1:i0 + 2])[0]
        ok = True
        for s in reversed(tail):
            mag, idx = maxima(s)
            if len(idx) == 0:
                ok = False
                break
            j = idx[np.argmin(np.abs(zeta[idx] - cur))]
            if abs(zeta[j] - cur) > search:
                ok = False
                break
            cur = peak_location(zeta[j - 1:j + 2], mag[j - 1:j + 2])[0]
            track_t.append(s.tau)
            track_z.append(cur)
        if not ok or len(track_t) < 2:
            continue
        vel = float(np.polyfit(track_t, track_z, 1)[0])
        positions.append(track_z[0])
        velocities.append(vel)
        peaks.append(float(mag_end[i0]))
    return SolitonCensus(len(positions), positions, velocities, peaks)


def pushed_state(profile, p: float, push_medium: bool = False) -> FieldState1D:
    """Standing soliton kicked by exp(i p zeta).

    By default only the forward field is multiplied (Sigma_+ and its time
    derivative Pi_+ = -i chi Sigma_+); Sigma_-, P and w keep their standing
    values and the dynamics adjusts them.  With ``push_medium`` the phase is
    applied to every complex field including P, which makes the push a pure
    Galilean boost of the whole soliton.
    """
    state = profile.to_state()
    phase = np.exp(1j * p * state.zeta)
    names = ("sigma_plus", "pi_plus")
    if push_medium:
        names += ("sigma_minus", "pi_minus", "pol")
    for name in names:
        setattr(state, name, getattr(state, name) * phase)
    state.meta["push"] = p
    state.meta["push_medium"] = push_medium
    return state


def push_experiment(profile, p: float, params: DimensionlessParams, cfg: RunConfig,
                    tau_end: float, push_medium: bool = False):
    """Push a standing soliton by exp(i p zeta), evolve, and count the solitons left."""
    initial = pushed_state(profile, p, push_medium)
    traj = evolve(initial, params, cfg, tau_end)
    return traj, soliton_census(traj, cfg)


# ---------------------------------------------------------------------------
# sine-Gordon baseline


@dataclass
class SineGordonRun:
    zeta: np.ndarray
    times: np.ndarray
    theta: np.ndarray
    rabi: np.ndarray
    peak_positions: np.ndarray
    probe_index: int
    probe_area: float

    def velocity(self) -> float:
        return float(np.polyfit(self.times, self.peak_positions, 1)[0])


def _cumulative(f, h):
    """Cumulative trapezoid from the left end, starting at zero."""
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1])) * h
    return out


def sine_gordon_rabi(theta, h):
    """Rabi frequency d theta / d tau~ = -int_{-inf}^{zeta} sin(theta) for a field-free left end."""
    return -_cumulative(np.sin(theta), h)


def sine_gordon_evolve(theta_initial, zeta, tau_end: float, dt: float | None = None,
                       output_every: int = 10, probe: float | None = None) -> SineGordonRun:
    """Integrate theta_{zeta tau~} = -sin(theta) in characteristic coordinates.

    The state is theta(zeta) at fixed tau~; its tau~-derivative, the Rabi
    frequency, follows from the zeta-integral of -sin(theta) with the field
    vanishing at the left edge.  ``probe`` picks the position whose
    temporal area (time integral of the Rabi frequency) is reported.
    """
    theta = np.array(theta_initial, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    h = zeta[1] - zeta[0]
    if dt is None:
        dt = 0.5 * h
    n_steps = int(math.ceil(tau_end / dt))
    dt = tau_end / n_steps
    i_probe = int(np.argmin(np.abs(zeta - (probe if probe is not None else zeta.mean()))))

    def rhs(th):
        return sine_gordon_rabi(th, h)

    times, thetas, rabis, peaks = [], [], [], []
    probe_series = []

    def record(t, th):
        r = rhs(th)
        times.append(t)
        thetas.append(th.copy())
        rabis.append(r)
        peaks.append(peak_location(zeta, np.abs(r))[0])

    record(0.0, theta)
    probe_series.append(rhs(theta)[i_probe])
    for step in range(1, n_steps + 1):
        theta = rk4_step(rhs, theta, dt)
        if not np.all(np.isfinite(theta)):
            raise NumericalAbort(f"sine-Gordon run diverged at tau~={step * dt:.4g}")
        probe_series.append(rhs(theta)[i_probe])
        if step % output_every == 0 or step == n_steps:
            record(step * dt, theta)
    return SineGordonRun(zeta, np.array(times), np.array(thetas), np.array(rabis),
                         np.array(peaks), i_probe, temporal_area(probe_series, dt))
