"""Parameters, grids and field states for the resonantly absorbing Bragg reflector.

Physical inputs are SI.  Everything downstream works with the dimensionless
reduction (eta, delta, tau0): time is measured in units of the cooperative
absorption time tau0 and the coordinate in units of c*tau0/n0.

The transverse coordinate of the 2D model is taken as already rescaled by the
Fresnel number, so no Fresnel parameter is carried here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.constants import epsilon_0, hbar

BLOCH_NORM_TOL = 1e-6


class ParameterError(ValueError):
    """Raised for physically invalid or non-finite parameters."""


class DomainError(ValueError):
    """Raised when an argument lies outside the domain where a result exists."""


@dataclass(frozen=True)
class PhysicalParams:
    """Dimensional crystal and dopant parameters.

    Attributes
    ----------
    n0 : float
        background refractive index
    a1 : float
        index-modulation depth, n^2 = n0^2 (1 + a1 cos 2 kc z)
    omega_c : float
        gap-centre angular frequency, rad/s
    omega_0 : float
        atomic transition angular frequency, rad/s
    mu : float
        transition dipole moment, C m
    rho_0 : float
        z-averaged dopant density, m^-3
    """

    n0: float
    a1: float
    omega_c: float
    omega_0: float
    mu: float
    rho_0: float

    def __post_init__(self):
        for name in ("n0", "a1", "omega_c", "omega_0", "mu", "rho_0"):
            if not math.isfinite(getattr(self, name)):
                raise ParameterError(f"{name} must be finite")
        if self.n0 < 1:
            raise ParameterError("n0 must be >= 1")
        if self.a1 < 0:
            raise ParameterError("a1 must be >= 0")
        if self.omega_c <= 0:
            raise ParameterError("omega_c must be > 0")
        if self.rho_0 <= 0:
            raise ParameterError("rho_0 must be > 0")
        if self.mu == 0:
            raise ParameterError("mu must be nonzero")

    @property
    def svea_valid(self) -> bool:
        """Bragg reflection length must exceed a wavelength: a1 < 2/pi."""
        return self.a1 < 2 / math.pi

    @property
    def k_c(self) -> float:
        return self.omega_c * self.n0 / C_LIGHT


@dataclass(frozen=True)
class DimensionlessParams:
    eta: float
    delta: float
    tau0: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.eta) and math.isfinite(self.delta)
                and math.isfinite(self.tau0)):
            raise ParameterError("dimensionless parameters must be finite")
        if self.eta < 0:
            raise ParameterError("eta must be >= 0")
        if self.tau0 <= 0:
            raise ParameterError("tau0 must be > 0")


def cooperative_time(p: PhysicalParams) -> float:
    """Cooperative resonant absorption time tau0 in seconds.

    The Gaussian-unit expression (n0/mu) sqrt(hbar / (2 pi omega_c rho_0))
    becomes (n0/mu) sqrt(2 eps0 hbar / (omega_c rho_0)) after mu^2 -> mu^2/(4 pi eps0).
    """
    return abs(p.n0 / p.mu) * math.sqrt(2 * epsilon_0 * hbar / (p.omega_c * p.rho_0))


def derive_dimensionless(p: PhysicalParams) -> DimensionlessParams:
    tau0 = cooperative_time(p)
    eta = p.a1 * p.omega_c * tau0 / 4
    delta = (p.omega_0 - p.omega_c) * tau0
    if not all(math.isfinite(v) for v in (tau0, eta, delta)) or tau0 <= 0:
        raise ParameterError("non-finite dimensionless parameters")
    return DimensionlessParams(eta=eta, delta=delta, tau0=tau0)


def gap_edges(p: PhysicalParams) -> tuple[float, float]:
    half = p.omega_c * p.a1 / 4
    return p.omega_c - half, p.omega_c + half


def params_from_mapping(data: dict) -> PhysicalParams | DimensionlessParams:
    """Build parameters from a flat JSON-style mapping.

    Accepts either the full SI set (n0, a1, omega_c, omega_0, mu, rho_0) or
    the dimensionless pair (eta, delta) with optional tau0.  Unknown keys are
    rejected.
    """
    physical = {"n0", "a1", "omega_c", "omega_0", "mu", "rho_0"}
    reduced = {"eta", "delta", "tau0"}
    keys = set(data)
    if keys <= reduced and {"eta", "delta"} <= keys:
        return DimensionlessParams(**{k: float(v) for k, v in data.items()})
    if keys == physical:
        return PhysicalParams(**{k: float(v) for k, v in data.items()})
    unknown = keys - physical - reduced
    if unknown:
        raise ParameterError(f"unknown parameter keys: {sorted(unknown)}")
    missing = (reduced - {"tau0"} - keys) if keys & reduced else (physical - keys)
    raise ParameterError(f"missing parameter keys: {sorted(missing)}")


@dataclass(frozen=True)
class Grid1D:
    """Uniform grid zeta_j = zeta_min + j*h, h = (zeta_max - zeta_min)/n_zeta.

    The right end point is excluded so the same grid serves periodic runs.
    """

    zeta_min: float
    zeta_max: float
    n_zeta: int
    d_tau: float = 0.05
    tau_end: float = 1.0

    def __post_init__(self):
        if not self.zeta_max > self.zeta_min:
            raise ParameterError("zeta_max must exceed zeta_min")
        if self.n_zeta < 16:
            raise ParameterError("n_zeta must be >= 16")
        if self.d_tau <= 0:
            raise ParameterError("d_tau must be > 0")

    @property
    def h(self) -> float:
        return (self.zeta_max - self.zeta_min) / self.n_zeta

    @property
    def zeta(self) -> np.ndarray:
        return self.zeta_min + self.h * np.arange(self.n_zeta)

    @classmethod
    def centered(cls, half_width: float, n_zeta: int, **kw) -> "Grid1D":
        return cls(-half_width, half_width, n_zeta, **kw)


@dataclass
class FieldState1D:
    """Envelopes on a 1D grid.

    ``pi_plus``/``pi_minus`` hold the time derivatives of ``sigma_plus``/``sigma_minus``.
    The ground state of the medium is pol = 0, inv = -1.
    """

    zeta: np.ndarray
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
        for name in self.COMPLEX_FIELDS:
            setattr(self, name, np.asarray(getattr(self, name), dtype=complex))
        self.inv = np.asarray(self.inv, dtype=float)
        shape = self.zeta.shape
        for name in self.COMPLEX_FIELDS + ("inv",):
            if getattr(self, name).shape != shape:
                raise ParameterError(f"{name} does not match the grid shape {shape}")

    @property
    def h(self) -> float:
        return float(self.zeta[1] - self.zeta[0])

    def bloch_norm_error(self) -> float:
        return float(np.max(np.abs(np.abs(self.pol) ** 2 + self.inv ** 2 - 1)))

    def check(self, tol: float = BLOCH_NORM_TOL) -> None:
        err = self.bloch_norm_error()
        if err > tol:
            raise ParameterError(f"Bloch-vector norm violated by {err:.3g}")
        if np.max(np.abs(self.pol)) > 1 + 1e-9:
            raise ParameterError("|pol| exceeds 1")

    def copy(self) -> "FieldState1D":
        return replace(self, **{n: getattr(self, n).copy()
                                for n in self.COMPLEX_FIELDS + ("inv", "zeta")},
                       meta=dict(self.meta))

    @classmethod
    def ground(cls, zeta: np.ndarray) -> "FieldState1D":
        zeta = np.asarray(zeta, dtype=float)
        z = np.zeros(zeta.shape, dtype=complex)
        return cls(zeta, z, z.copy(), z.copy(), z.copy(), z.copy(), -np.ones_like(zeta))


def decompose_field(e_forward, e_backward, p: PhysicalParams) -> tuple[np.ndarray, np.ndarray]:
    """Map forward/backward slowly varying amplitudes (V/m) onto Sigma_+- ."""
    tau0 = cooperative_time(p)
    scale = 2 * tau0 * p.mu / hbar
    e_forward = np.asarray(e_forward, dtype=complex)
    e_backward = np.asarray(e_backward, dtype=complex)
    return scale * (e_forward + e_backward), scale * (e_forward - e_backward)


def zeta_of_z(z, p: PhysicalParams) -> np.ndarray:
    return np.asarray(z, dtype=float) * p.n0 / (C_LIGHT * cooperative_time(p))


def reconstruct_field(state: FieldState1D, p: PhysicalParams, z_samples, t: float) -> np.ndarray:
    """Real electric field E(z, t) in V/m at physical positions ``z_samples``.

    Sigma_+- are linearly interpolated from the dimensionless grid.
    """
    tau0 = cooperative_time(p)
    z = np.asarray(z_samples, dtype=float)
    zeta = zeta_of_z(z, p)
    lo, hi = state.zeta[0], state.zeta[-1]
    span = hi - lo
    if np.any(zeta < lo - 1e-12 * span) or np.any(zeta > hi + 1e-12 * span):
        raise DomainError("z samples fall outside the state grid")

    def interp(a):
        return np.interp(zeta, state.zeta, a.real) + 1j * np.interp(zeta, state.zeta, a.imag)

    carrier = np.exp(-1j * p.omega_c * t)
    sp = interp(state.sigma_plus) * carrier
    sm = interp(state.sigma_minus) * carrier
    kz = p.k_c * z
    return hbar / (p.mu * tau0) * (sp.real * np.cos(kz) - sm.imag * np.sin(kz))
