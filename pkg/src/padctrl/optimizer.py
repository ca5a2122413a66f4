"""Derivative-free maximization of the anisotropy objective and bichromatic scans.

The search is a cyclic coordinate ascent: each free parameter in turn is
sampled on a coarse grid over its bounds and then refined with a golden-section
line search around the best sample.  An optional Nelder-Mead polish (scipy)
runs on the reflected problem, so every point it proposes is mapped back into
the box before evaluation.  Evaluations that fail or violate the intensity cap
score -inf and the run continues.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from . import units
from .errors import ConfigError, NumericalError
from .pad import compute_pad, objective, theta_grid
from .pulses import Channel, FieldSpec, SubPulse
from .structure import DipoleSet, OrbitalSet

__all__ = [
    "PARAM_NAMES",
    "FreeParam",
    "OptProblem",
    "OptTrace",
    "optimize",
    "apply_params",
    "template_values",
    "preset",
    "PRESETS",
    "ScanResult",
    "scan_bichromatic",
    "bichromatic_spec",
    "fit_phase_oscillation",
]

PARAM_NAMES = ("intensity_Wcm2", "omega_eV", "phase_rad", "tau_fs", "fwhm_fs")
DEFAULT_FWHM_MAX_FS = 60.0
DEFAULT_TAU_MAX_FS = 100.0
DEFAULT_INTENSITY_CAP = 1e12
GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FreeParam:
    pulse: int
    name: str
    lower: float
    upper: float

    def __post_init__(self):
        if self.name not in PARAM_NAMES:
            raise ConfigError(f"unknown parameter {self.name!r}; expected one of {PARAM_NAMES}")
        if not (math.isfinite(self.lower) and math.isfinite(self.upper)) or not self.lower < self.upper:
            raise ConfigError(f"bounds for {self.name} of pulse {self.pulse} must be finite with lower < upper")

    @property
    def width(self) -> float:
        return self.upper - self.lower

    @classmethod
    def default(cls, pulse: int, name: str, intensity_cap: float = DEFAULT_INTENSITY_CAP,
                omega_ev: float | None = None) -> "FreeParam":
        """Free parameter with the documented default bounds."""
        if name == "intensity_Wcm2":
            return cls(pulse, name, 0.0, intensity_cap)
        if name == "phase_rad":
            return cls(pulse, name, 0.0, 2.0 * math.pi)
        if name == "tau_fs":
            return cls(pulse, name, -DEFAULT_TAU_MAX_FS, DEFAULT_TAU_MAX_FS)
        if name == "fwhm_fs":
            return cls(pulse, name, 5.0, DEFAULT_FWHM_MAX_FS)
        if omega_ev is None:
            raise ConfigError("omega_eV needs explicit bounds")
        return cls(pulse, name, 0.95 * omega_ev, 1.05 * omega_ev)


def _value(p: SubPulse, name: str) -> float:
    if name == "intensity_Wcm2":
        return units.amplitude_to_intensity(p.E0)
    if name == "omega_eV":
        return units.au_to_ev(p.omega)
    if name == "phase_rad":
        return p.phi
    if name == "tau_fs":
        return units.au_to_fs(p.tau)
    return units.au_to_fs(p.fwhm)


def template_values(template: FieldSpec, free: Sequence[FreeParam]) -> np.ndarray:
    return np.array([_value(template.pulses[f.pulse], f.name) for f in free], dtype=float)


def apply_params(template: FieldSpec, free: Sequence[FreeParam], x) -> FieldSpec:
    recs = [dict(E0=p.E0, omega=p.omega, phi=p.phi, tau=p.tau, sigma=p.sigma, channel=p.channel)
            for p in template.pulses]
    for f, v in zip(free, x):
        r = recs[f.pulse]
        v = float(v)
        if f.name == "intensity_Wcm2":
            r["E0"] = units.intensity_to_amplitude(max(v, 0.0))
        elif f.name == "omega_eV":
            r["omega"] = units.ev_to_au(v)
        elif f.name == "phase_rad":
            r["phi"] = v
        elif f.name == "tau_fs":
            r["tau"] = units.fs_to_au(v)
        else:
            r["sigma"] = units.fs_to_au(v) / units.FWHM_PER_SIGMA
    return FieldSpec(tuple(SubPulse(**r) for r in recs))


@dataclass
class OptProblem:
    template: FieldSpec
    free: list[FreeParam] = field(default_factory=list)
    e_grid_ev: Sequence[float] = (10.0,)
    theta_steps: int = 37
    phi_slice: float = math.pi / 2
    budget: int = 200
    seed: int = 0
    restarts: int = 1
    polish: bool = False
    intensity_cap: float = DEFAULT_INTENSITY_CAP
    coarse: int = 5
    line_tol: float = 1e-5
    objective_fn: Callable[[FieldSpec], float] | None = None
    threads: int = 1

    def validate(self) -> None:
        if self.budget < max(1, len(self.free)):
            raise ConfigError(f"budget {self.budget} is smaller than the number of free parameters")
        if self.restarts < 1:
            raise ConfigError("restarts must be >= 1")
        keys = set()
        for f in self.free:
            if not 0 <= f.pulse < len(self.template.pulses):
                raise ConfigError(f"free parameter refers to missing pulse {f.pulse}")
            if (f.pulse, f.name) in keys:
                raise ConfigError(f"parameter {f.name} of pulse {f.pulse} is listed twice")
            keys.add((f.pulse, f.name))
            if f.name in ("intensity_Wcm2", "fwhm_fs") and f.lower < 0:
                raise ConfigError(f"{f.name} lower bound must be >= 0")
            if f.name == "fwhm_fs" and f.lower <= 0:
                raise ConfigError("fwhm_fs lower bound must be > 0")
            if f.name == "omega_eV" and f.lower <= 0:
                raise ConfigError("omega_eV lower bound must be > 0")
        if self.intensity_cap <= 0:
            raise ConfigError("intensity cap must be positive")
        # a feasible point must exist: the lower intensity bounds alone must fit under the cap
        fixed_i = sum(_value(p, "intensity_Wcm2") for i, p in enumerate(self.template.pulses)
                      if (i, "intensity_Wcm2") not in keys)
        low_i = sum(f.lower for f in self.free if f.name == "intensity_Wcm2")
        if fixed_i + low_i > self.intensity_cap * (1 + 1e-12):
            raise ConfigError("no feasible point: fixed and minimal intensities exceed the cap")


@dataclass
class OptTrace:
    index: list[int] = field(default_factory=list)
    params: list[tuple[float, ...]] = field(default_factory=list)
    values: list[float] = field(default_factory=list)
    best: list[float] = field(default_factory=list)
    restart: list[int] = field(default_factory=list)
    failures: list[str] = field(default_factory=list)

    def record(self, x, v: float, restart: int) -> None:
        self.index.append(len(self.values))
        self.params.append(tuple(float(a) for a in x))
        self.values.append(float(v))
        prev = self.best[-1] if self.best else -math.inf
        self.best.append(max(prev, float(v)))
        self.restart.append(restart)

    def __len__(self) -> int:
        return len(self.values)

    @property
    def best_value(self) -> float:
        return self.best[-1] if self.best else -math.inf

    @property
    def best_params(self) -> tuple[float, ...]:
        i = int(np.argmax(self.values))
        return self.params[i]

    def write_csv(self, path, names: Sequence[str]) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["eval", "restart", *names, "objective", "best_so_far"])
            for i, r, x, v, b in zip(self.index, self.restart, self.params, self.values, self.best):
                w.writerow([i, r, *[repr(a) for a in x], repr(v), repr(b)])


class _BudgetExhausted(Exception):
    pass


class _Evaluator:
    def __init__(self, p: OptProblem, orb, dip, trace: OptTrace):
        self.p = p
        self.orb = orb
        self.dip = dip
        self.trace = trace
        self.lo = np.array([f.lower for f in p.free])
        self.hi = np.array([f.upper for f in p.free])
        self.cache: dict = {}
        self.restart = 0
        self.th = theta_grid(p.theta_steps)

    def key(self, x):
        w = np.where(self.hi > self.lo, self.hi - self.lo, 1.0)
        return tuple(np.round((np.asarray(x) - self.lo) / w, 12).tolist())

    def feasible(self, spec: FieldSpec) -> bool:
        tot = sum(units.amplitude_to_intensity(s.E0) for s in spec.pulses)
        return tot <= self.p.intensity_cap * (1 + 1e-12)

    def __call__(self, x) -> float:
        x = np.asarray(x, dtype=float)
        if x.size and (np.any(x < self.lo) or np.any(x > self.hi)):
            raise AssertionError("optimizer proposed a point outside the bounds")
        k = self.key(x)
        if k in self.cache:
            return self.cache[k]
        if len(self.trace) >= self.p.budget:
            raise _BudgetExhausted
        spec = apply_params(self.p.template, self.p.free, x)
        if not self.feasible(spec):
            v = -math.inf
        else:
            try:
                if self.p.objective_fn is not None:
                    v = float(self.p.objective_fn(spec))
                else:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        g = compute_pad(self.orb, self.dip, spec, self.p.e_grid_ev, self.th,
                                        self.p.phi_slice, threads=self.p.threads)
                    v = objective(g)[0]
                if not math.isfinite(v):
                    v = -math.inf
            except (ArithmeticError, ValueError, NumericalError) as exc:
                self.trace.failures.append(f"eval {len(self.trace)}: {type(exc).__name__}: {exc}")
                v = -math.inf
        self.trace.record(x, v, self.restart)
        self.cache[k] = v
        return v


def _reflect(x, lo, hi):
    w = hi - lo
    y = np.mod(x - lo, 2.0 * w)
    y = np.where(y > w, 2.0 * w - y, y)
    return np.clip(lo + y, lo, hi)


def _line_search(f, x, i, lo, hi, coarse, tol):
    """Maximize f along coordinate i; returns (x_best, f_best)."""
    best_x = x.copy()
    best_v = f(x)
    grid = np.linspace(lo[i], hi[i], coarse)
    vals = []
    for g in grid:
        y = x.copy()
        y[i] = g
        v = f(y)
        vals.append(v)
        if v > best_v:
            best_v, best_x = v, y
    j = int(np.argmax(vals))
    a = grid[max(j - 1, 0)]
    b = grid[min(j + 1, coarse - 1)]
    if best_x[i] < a or best_x[i] > b:  # starting point was better than every grid node
        a = max(lo[i], best_x[i] - (hi[i] - lo[i]) / (coarse - 1))
        b = min(hi[i], best_x[i] + (hi[i] - lo[i]) / (coarse - 1))

    def at(t):
        y = best_x.copy()
        y[i] = t
        return f(y), y

    c = b - GOLDEN * (b - a)
    d = a + GOLDEN * (b - a)
    fc, yc = at(c)
    fd, yd = at(d)
    while (b - a) > tol * (hi[i] - lo[i]):
        if fc >= fd:
            b, d, fd, yd = d, c, fc, yc
            c = b - GOLDEN * (b - a)
            fc, yc = at(c)
        else:
            a, c, fc, yc = c, d, fd, yd
            d = a + GOLDEN * (b - a)
            fd, yd = at(d)
    for v, y in ((fc, yc), (fd, yd)):
        if v > best_v:
            best_v, best_x = v, y
    return best_x, best_v


def _coordinate_ascent(f, x0, lo, hi, coarse, tol, max_sweeps=50):
    x = x0.copy()
    v = f(x)
    for _ in range(max_sweeps):
        v_start = v
        for i in range(x.size):
            x, v = _line_search(f, x, i, lo, hi, coarse, tol)
        if not v > v_start + 1e-12 * max(1.0, abs(v_start)):
            break
    return x, v


def optimize(p: OptProblem, orb: OrbitalSet | None = None, dip: DipoleSet | None = None):
    """Maximize the objective; returns (best FieldSpec, OptTrace)."""
    p.validate()
    if p.objective_fn is None and (orb is None or dip is None):
        raise ConfigError("orbital and dipole data are required unless objective_fn is given")
    trace = OptTrace()
    ev = _Evaluator(p, orb, dip, trace)
    if not p.free:
        ev(np.zeros(0))
        return p.template, trace
    lo, hi = ev.lo, ev.hi
    rng = np.random.default_rng(p.seed)
    x_t = np.clip(template_values(p.template, p.free), lo, hi)
    for r in range(p.restarts):
        ev.restart = r
        x0 = x_t if r == 0 else lo + rng.random(lo.size) * (hi - lo)
        try:
            x, _ = _coordinate_ascent(ev, x0, lo, hi, p.coarse, p.line_tol)
            if p.polish:
                def neg(z):
                    v = ev(_reflect(np.asarray(z), lo, hi))
                    return 1e300 if v == -math.inf else -v
                step = 0.05 * (hi - lo)
                simplex = np.vstack([x] + [x + np.eye(x.size)[k] * step[k] for k in range(x.size)])
                minimize(neg, x, method="Nelder-Mead",
                         options={"initial_simplex": simplex, "xatol": 1e-9, "fatol": 1e-12,
                                  "maxfev": max(1, p.budget - len(trace))})
        except _BudgetExhausted:
            break
    best = apply_params(p.template, p.free, trace.best_params)
    return best, trace


# ---------------------------------------------------------------------------
# presets

PRESETS = {
    "rempi5": (7.1, 10.8, 11.1, 14.8, 21.9),
    "lumo3": (7.075, 14.803, 21.878),
    "bichromatic": (10.939, 21.878),
}


def preset(name: str, intensity_wcm2: float = 1e11, fwhm_fs: float = 23.0,
           channel: str = "LIN_Z") -> FieldSpec:
    """Multi-color templates with equal intensity, zero phase and zero delay."""
    try:
        carriers = PRESETS[name]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
    return FieldSpec.from_records([
        {"intensity_Wcm2": intensity_wcm2, "omega_eV": w, "phase_rad": 0.0, "tau_fs": 0.0,
         "fwhm_fs": fwhm_fs, "channel": channel} for w in carriers])


# ---------------------------------------------------------------------------
# bichromatic scans


def _canonical_phase(phi: float) -> float:
    r = round(math.fmod(phi, 2.0 * math.pi) % (2.0 * math.pi), 12)
    return 0.0 if r >= round(2.0 * math.pi, 12) else r


def bichromatic_spec(omega_ev: float, phase: float, intensity_wcm2: float = 1e11,
                     ratio: float = 2.0, fwhm_fs: float = 23.0, tau_fs: float = 0.0,
                     fundamental: bool = True, channel: str = "LIN_Z") -> FieldSpec:
    """(omega, 2 omega) pair; ``phase`` is applied to the second harmonic and
    ``ratio`` is I(2 omega) / I(omega)."""
    phi = _canonical_phase(phase)
    recs = [{"intensity_Wcm2": ratio * intensity_wcm2, "omega_eV": 2.0 * omega_ev, "phase_rad": phi,
             "tau_fs": tau_fs, "fwhm_fs": fwhm_fs, "channel": channel}]
    if fundamental:
        recs.insert(0, {"intensity_Wcm2": intensity_wcm2, "omega_eV": omega_ev, "phase_rad": 0.0,
                        "tau_fs": tau_fs, "fwhm_fs": fwhm_fs, "channel": channel})
    return FieldSpec.from_records(recs)


@dataclass(frozen=True, eq=False)
class ScanResult:
    omega_ev: np.ndarray       # fundamental photon energies
    phase: np.ndarray          # relative phases (as requested)
    e_k_ev: np.ndarray         # photoelectron energy per omega
    theta: np.ndarray          # evaluation angle per omega (rad)
    asymmetry: np.ndarray      # signed A, shape (n_omega, n_phase)
    interference: np.ndarray   # I_int(theta) - I_int(pi - theta), same shape

    def write_csv(self, path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["omega_eV", "two_omega_eV", "phase_rad", "e_k_eV", "theta_deg",
                        "asymmetry", "interference_diff"])
            for i, om in enumerate(self.omega_ev):
                for j, ph in enumerate(self.phase):
                    w.writerow([repr(float(om)), repr(float(2 * om)), repr(float(ph)),
                                repr(float(self.e_k_ev[i])), repr(float(np.degrees(self.theta[i]))),
                                repr(float(self.asymmetry[i, j])), repr(float(self.interference[i, j]))])


def scan_bichromatic(orb: OrbitalSet, dip: DipoleSet, omega_range, phase_range,
                     intensity_wcm2: float = 1e11, ratio: float = 2.0, fwhm_fs: float = 23.0,
                     e_k_ev: float | None = None, theta: float | None = None,
                     theta_steps: int = 37, phi_slice: float = math.pi / 2,
                     fundamental: bool = True, channel: str = "LIN_Z") -> ScanResult:
    """Signed anisotropy over a (fundamental energy, relative phase) grid.

    The photoelectron energy defaults to the one-photon line of the second
    harmonic, ``2 omega + e_i0``.  With ``theta=None`` each omega row is
    evaluated at the angle that maximizes |A| over the phase row.
    """
    om = np.atleast_1d(np.asarray(omega_range, dtype=float))
    ph = np.atleast_1d(np.asarray(phase_range, dtype=float))
    if om.size == 0 or ph.size == 0:
        raise ConfigError("omega and phase ranges must be non-empty")
    th = theta_grid(theta_steps)
    e_i0_ev = orb.energies_ev[orb.i0_index]
    n_om, n_ph = om.size, ph.size
    A = np.zeros((n_om, n_ph))
    D = np.zeros((n_om, n_ph))
    e_used = np.zeros(n_om)
    th_used = np.zeros(n_om)
    j_mirror = th.size - 1 - np.arange(th.size)
    for i, w in enumerate(om):
        e = 2.0 * w + e_i0_ev if e_k_ev is None else e_k_ev
        e_used[i] = e
        rowsA, rowsD = [], []
        memo: dict = {}
        for phase in ph:
            key = _canonical_phase(phase)
            if key not in memo:
                spec = bichromatic_spec(w, phase, intensity_wcm2, ratio, fwhm_fs,
                                        fundamental=fundamental, channel=channel)
                with warnings.catch_warnings():
                    warnings.simplefilter("ignore")
                    g = compute_pad(orb, dip, spec, [e], th, phi_slice, keep_parts=True)
                I = g.intensity[0]
                I0 = g.I0
                a = (I - I[j_mirror]) / I0 if I0 > 0 else np.zeros_like(I)
                d = g.parts["int"][0] - g.parts["int"][0][j_mirror]
                memo[key] = (a, d)
            rowsA.append(memo[key][0])
            rowsD.append(memo[key][1])
        RA = np.array(rowsA)
        RD = np.array(rowsD)
        if theta is None:
            j = int(np.argmax(np.max(np.abs(RA), axis=0)))
        else:
            j = int(np.argmin(np.abs(th - theta)))
        th_used[i] = th[j]
        A[i] = RA[:, j]
        D[i] = RD[:, j]
    return ScanResult(om, ph, e_used, th_used, A, D)


def fit_phase_oscillation(phase, values) -> tuple[float, float, float]:
    """Least-squares fit values ~ a cos(phase + delta); returns (a, delta, max residual)."""
    ph = np.asarray(phase, dtype=float)
    y = np.asarray(values, dtype=float)
    X = np.stack([np.cos(ph), np.sin(ph)], axis=1)
    (c, s), *_ = np.linalg.lstsq(X, y, rcond=None)
    amp = math.hypot(c, s)
    delta = math.atan2(-s, c)
    res = float(np.max(np.abs(X @ np.array([c, s]) - y), initial=0.0))
    return amp, delta, res
