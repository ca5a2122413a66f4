"""Energy- and angle-resolved intensity, left-right anisotropy and the objective."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import units
from .betas import assemble_cos, beta_tables, make_integrator
from .errors import ConfigError, DomainError
from .pulses import FieldSpec
from .structure import DipoleSet, OrbitalSet

__all__ = ["PADGrid", "NegativeIntensityWarning", "theta_grid", "compute_pad", "anisotropy",
           "objective", "write_pad_csv"]

CLIP_RTOL = 1e-12
MIRROR_TOL = 1e-12


class NegativeIntensityWarning(UserWarning):
    pass


def theta_grid(n: int) -> np.ndarray:
    """n equally spaced angles on [0, pi], mirror symmetric by construction."""
    if n < 2:
        raise ConfigError("need at least 2 theta nodes")
    th = math.pi * np.arange(n) / (n - 1)
    half = n // 2
    th[n - half:] = math.pi - th[:half][::-1]
    if n % 2:
        th[half] = math.pi / 2
    return th


def _mirror_index(th: np.ndarray) -> np.ndarray:
    rev = th[::-1]
    if np.max(np.abs(th + rev - math.pi)) > MIRROR_TOL:
        raise ConfigError("theta grid is not symmetric under theta -> pi - theta")
    return np.arange(th.size)[::-1].copy()


@dataclass(frozen=True, eq=False)
class PADGrid:
    e_grid: np.ndarray        # eV
    theta_grid: np.ndarray    # rad
    intensity: np.ndarray     # (n_e, n_theta)
    phi_slice: float = math.pi / 2
    n_negative: int = 0
    parts: dict | None = field(default=None, repr=False)

    def __post_init__(self):
        e = np.asarray(self.e_grid, dtype=float)
        th = np.asarray(self.theta_grid, dtype=float)
        I = np.asarray(self.intensity, dtype=float)
        if I.shape != (e.size, th.size):
            raise ConfigError(f"intensity shape {I.shape} does not match grids ({e.size}, {th.size})")
        if np.any(np.diff(e) <= 0) or np.any(np.diff(th) <= 0):
            raise ConfigError("energy and theta grids must be strictly ascending")
        if th.size and (th[0] < 0 or th[-1] > math.pi + MIRROR_TOL):
            raise ConfigError("theta grid must lie in [0, pi]")
        for a in (e, th, I):
            a.setflags(write=False)
        object.__setattr__(self, "e_grid", e)
        object.__setattr__(self, "theta_grid", th)
        object.__setattr__(self, "intensity", I)

    @property
    def mirror(self) -> np.ndarray:
        return _mirror_index(self.theta_grid)

    @property
    def I0(self) -> float:
        return float(np.max(self.intensity))

    def scaled(self, factor: float) -> "PADGrid":
        return PADGrid(self.e_grid, self.theta_grid, self.intensity * factor, self.phi_slice)


def compute_pad(orb: OrbitalSet, dip: DipoleSet, spec: FieldSpec, e_grid, theta,
                phi: float = math.pi / 2, threads: int = 1, keep_parts: bool = False) -> PADGrid:
    """I(e, theta) at azimuth ``phi``; ``e_grid`` in eV, angles in radians."""
    e_ev = np.atleast_1d(np.asarray(e_grid, dtype=float))
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if e_ev.size == 0 or th.size == 0:
        raise ConfigError("energy and theta grids must be non-empty")
    _mirror_index(th)
    e_au = units.ev_to_au(e_ev)
    lo, hi = dip.k_grid[0], dip.k_grid[-1]
    tol = 1e-12 * max(1.0, abs(hi))
    if e_au.min() < lo - tol or e_au.max() > hi + tol:
        raise DomainError(
            f"energy grid [{e_ev.min():g}, {e_ev.max():g}] eV exceeds dipole range "
            f"[{dip.k_grid_ev[0]:g}, {dip.k_grid_ev[-1]:g}] eV")
    integ = make_integrator(orb, spec, float(e_au.max()))
    # cos(pi - theta) = -cos(theta) exactly, so even-L content cancels exactly in A
    x = np.cos(th)
    half = th.size // 2
    x[th.size - half:] = -x[:half][::-1]
    if th.size % 2:
        x[half] = 0.0

    def row(e):
        tabs = beta_tables(orb, dip, spec, e, integ)
        return assemble_cos(*tabs, x, np.full_like(th, phi), return_parts=True)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            rows = list(ex.map(row, e_au))
    else:
        rows = [row(e) for e in e_au]
    I = np.array([r[0] for r in rows])
    parts = None
    if keep_parts:
        parts = {k: np.array([r[1][k] for r in rows]) for k in ("1ph", "2ph", "int")}
    I0 = float(np.max(I)) if I.size else 0.0
    neg = I < 0
    big = I < -CLIP_RTOL * max(I0, 0.0)
    n_big = int(np.count_nonzero(big))
    if n_big:
        warnings.warn(f"{n_big} PAD values are negative beyond {CLIP_RTOL:g} x I0 "
                      f"(min {I.min():.3e}, I0 {I0:.3e}); perturbative truncation?",
                      NegativeIntensityWarning, stacklevel=2)
    I = np.where(neg & ~big, 0.0, I)
    return PADGrid(e_ev, th, I, phi, n_big, parts)


def anisotropy(g: PADGrid) -> np.ndarray:
    """A(e, theta) = [I(e, theta) - I(e, pi - theta)] / I0 with the global maximum I0."""
    I0 = g.I0
    if not I0 > 0:
        raise ConfigError("degenerate PAD: maximum intensity is not positive")
    I = np.clip(g.intensity, 0.0, None)
    A = (I - I[:, g.mirror]) / I0
    if np.max(np.abs(A), initial=0.0) > 1.0 + 1e-12:
        raise AssertionError("|A| > 1: intensity grid is inconsistent")
    return A


def objective(g: PADGrid) -> tuple[float, float, float]:
    """(max |A|, energy in eV, theta in rad); first maximum in row-major order."""
    A = np.abs(anisotropy(g))
    k = int(np.argmax(A))
    i, j = divmod(k, A.shape[1])
    return float(A[i, j]), float(g.e_grid[i]), float(g.theta_grid[j])


def write_pad_csv(path, g: PADGrid) -> None:
    A = anisotropy(g)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["e_eV", "theta_deg", "intensity", "anisotropy"])
        for i, e in enumerate(g.e_grid):
            for j, th in enumerate(g.theta_grid):
                w.writerow([repr(float(e)), repr(float(np.degrees(th))),
                            repr(float(g.intensity[i, j])), repr(float(A[i, j]))])
