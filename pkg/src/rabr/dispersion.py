"""Linearised spectrum of the doped Bragg reflector.

Small-signal plane waves exp(i(kappa*zeta - chi*tau)) on the ground-state
medium obey

    (chi^2 - kappa^2 - eta^2) (chi - delta) D(chi, kappa) = 0,
    D = (chi - delta) (chi^2 - kappa^2 - 2 - eta^2) + 2 (eta - delta).

The first factor is the bare grating, the cubic D holds the three branches
dressed by the resonant layers, and chi = delta is a flat (dispersionless)
root reported separately.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ParameterError

BRANCH_LABELS = ("bare_plus", "bare_minus", "dressed_1", "dressed_2", "dressed_3")
FLAT_LABEL = "flat"


def cubic_coefficients(kappa: float, eta: float, delta: float) -> np.ndarray:
    """Coefficients of D(chi) in descending powers of chi."""
    m = kappa * kappa + 2 + eta * eta
    return np.array([1.0, -delta, -m, delta * m + 2 * (eta - delta)])


def full_polynomial(kappa: float, eta: float, delta: float) -> np.ndarray:
    bare = np.array([1.0, 0.0, -(kappa * kappa + eta * eta)])
    flat = np.array([1.0, -delta])
    return np.polymul(np.polymul(bare, flat), cubic_coefficients(kappa, eta, delta))


def relative_residual(coeffs: np.ndarray, chi: float) -> float:
    """|p(chi)| divided by the largest monomial |c_i chi^i|."""
    powers = chi ** np.arange(len(coeffs) - 1, -1, -1)
    terms = coeffs * powers
    scale = np.max(np.abs(terms))
    return float(abs(terms.sum()) / scale) if scale > 0 else 0.0


def _polish(coeffs: np.ndarray, root: float, steps: int = 3) -> float:
    dcoeffs = np.polyder(coeffs)
    for _ in range(steps):
        d = np.polyval(dcoeffs, root)
        if d == 0:
            break
        step = np.polyval(coeffs, root) / d
        root -= step
        if abs(step) <= 1e-16 * max(1.0, abs(root)):
            break
    return root


def dressed_roots(kappa: float, eta: float, delta: float) -> np.ndarray:
    """Real roots of the cubic, ascending, via companion-matrix eigenvalues."""
    coeffs = cubic_coefficients(kappa, eta, delta)
    companion = np.zeros((3, 3))
    companion[0, :] = -coeffs[1:]
    companion[1, 0] = companion[2, 1] = 1.0
    ev = np.linalg.eigvals(companion)
    scale = max(1.0, np.max(np.abs(ev)))
    real = np.sort(ev[np.abs(ev.imag) <= 1e-9 * scale].real)
    return np.array([_polish(coeffs, r) for r in real])


def branches_at(kappa: float, eta: float, delta: float) -> list[tuple[str, float]]:
    """All real spectral roots at one wavenumber.

    Dressed roots are labelled dressed_1 < dressed_2 < dressed_3 when all three
    are real.  The flat root chi = delta is appended only when it is not also
    a root of the cubic.
    """
    if not all(math.isfinite(v) for v in (kappa, eta, delta)):
        raise ParameterError("non-finite input")
    bare = math.hypot(kappa, eta)
    out = [("bare_plus", bare), ("bare_minus", -bare)]
    roots = dressed_roots(kappa, eta, delta)
    if len(roots) == 3:
        out += [(f"dressed_{i + 1}", float(r)) for i, r in enumerate(roots)]
    else:
        out += [("dressed", float(r)) for r in roots]
    # D(delta) = 2 (eta - delta): the flat root is shared with the cubic only at eta = delta
    if abs(eta - delta) > 1e-12:
        out.append((FLAT_LABEL, float(delta)))
    return out


def kzero_frequencies(eta: float, delta: float) -> tuple[float, float, float]:
    """Closed-form kappa = 0 roots: (eta, chi_0+, chi_0-)."""
    root = math.sqrt(2 + (eta + delta) ** 2 / 4)
    mid = -(eta - delta) / 2
    return eta, mid + root, mid - root


def asymptotic_dressed(kappa: float, eta: float, delta: float) -> float:
    """Large-|kappa| limit of the middle dressed branch."""
    return delta + 2 * (eta - delta) / kappa ** 2


def gap_closing_eta(delta: float) -> float:
    return delta / 2 + math.sqrt(1 + delta * delta / 4)


def group_velocity(kappa: float, chi: float, eta: float, delta: float) -> float:
    """d chi / d kappa on a dressed branch by implicit differentiation of D."""
    d_chi = (chi * chi - kappa * kappa - 2 - eta * eta) + 2 * chi * (chi - delta)
    d_kappa = -2 * kappa * (chi - delta)
    return -d_kappa / d_chi


@dataclass
class DispersionSpectrum:
    kappa_grid: np.ndarray
    branches: dict[str, np.ndarray]
    eta: float
    delta: float

    def rows(self):
        """(kappa, label, chi) triples in kappa-major order."""
        for i, k in enumerate(self.kappa_grid):
            for label in BRANCH_LABELS:
                chi = self.branches[label][i]
                if math.isfinite(chi):
                    yield float(k), label, float(chi)


def spectrum(kappa_grid, eta: float, delta: float) -> DispersionSpectrum:
    """Sample every branch on ``kappa_grid``.

    Dressed branches are continued from the kappa = 0 anchors (chi_0-, middle
    root, chi_0+) by nearest-neighbour matching, so a branch keeps its label
    across the grid.  Points where only one dressed root is real are NaN on
    the branches that do not continue.
    """
    kappa_grid = np.asarray(kappa_grid, dtype=float)
    n = len(kappa_grid)
    bare = np.hypot(kappa_grid, eta)
    branches = {"bare_plus": bare, "bare_minus": -bare}
    dressed = np.full((3, n), np.nan)

    order = np.argsort(np.abs(kappa_grid), kind="stable")
    start = order[0]
    anchors = dressed_roots(kappa_grid[start], eta, delta)
    dressed[: len(anchors), start] = anchors[:3]

    # walk outwards from the smallest |kappa| in both directions
    for direction in (1, -1):
        prev = dressed[:, start].copy()
        i = start + direction
        while 0 <= i < n:
            roots = dressed_roots(kappa_grid[i], eta, delta)
            cur = np.full(3, np.nan)
            free = list(roots)
            for b in np.argsort(np.isnan(prev)):
                if not free or math.isnan(prev[b]):
                    continue
                j = int(np.argmin([abs(r - prev[b]) for r in free]))
                cur[b] = free.pop(j)
            dressed[:, i] = cur
            prev = np.where(np.isnan(cur), prev, cur)
            i += direction

    for b in range(3):
        branches[f"dressed_{b + 1}"] = dressed[b]
    return DispersionSpectrum(kappa_grid, branches, eta, delta)


def spectrum_residuals(spec: DispersionSpectrum) -> np.ndarray:
    """Relative residual of the full sixth-degree relation at every emitted point."""
    out = []
    for k, _, chi in spec.rows():
        out.append(relative_residual(full_polynomial(k, spec.eta, spec.delta), chi))
    return np.array(out)


@dataclass(frozen=True)
class SolitonBands:
    chi_1: float
    chi_2: float
    lower_band: tuple[float, float]
    upper_band: tuple[float, float] | None

    def contains(self, chi: float) -> bool:
        lo, hi = self.lower_band
        if lo < chi < hi:
            return True
        if self.upper_band is not None:
            lo, hi = self.upper_band
            return lo < chi < hi
        return False


def soliton_bands(eta: float, delta: float) -> SolitonBands:
    """Frequency bands that carry standing bright solitons."""
    if not eta > 0:
        raise ParameterError("eta must be > 0 for soliton bands")
    root = math.sqrt((eta + delta) ** 2 + 8)
    chi_1 = 0.5 * (delta - eta - root)
    chi_2 = 0.5 * (delta - eta + root)
    lower = (chi_1, min(chi_2, -eta, delta))
    upper = (max(chi_1, eta, delta), chi_2) if delta > eta - 1 / eta else None
    return SolitonBands(chi_1, chi_2, lower, upper)
