"""Shaped multi-color fields and the time integrals that drive the amplitudes.

A field is a coherent sum of Gaussian sub-pulses.  Each sub-pulse has the
envelope ``h(t) = E0 exp(-(t - tau)^2 / (2 sigma^2))`` (so FWHM =
2 sqrt(2 ln 2) sigma) and a carrier phase ``Omega(t) = omega (t - tau) + phi``.
Three polarization channels are supported:

* ``LIN_Z``: real field along z, ``E_0(t) = h cos(Omega)``
* ``CRP``:   ``E_{+-1}(t) = +-h exp(+-i Omega) / sqrt(2)``
* ``CLP``:   ``E_{+-1}(t) = -+h exp(-+i Omega) / sqrt(2)``

The spherical components are defined through ``E = sum_mu0 E_mu0 conj(e_mu0)``
with ``e_{+-1} = -+(e_x +- i e_y)/sqrt(2)``.  With this choice a CRP pulse at
its peak points along ``-x`` and rotates towards ``-y``; CLP points along
``+x`` and rotates towards ``-y``.  Everything is in atomic units here; the
JSON record format uses eV, fs and W/cm^2.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import units
from .errors import ConfigError, QuadratureError

__all__ = [
    "Channel",
    "SubPulse",
    "FieldSpec",
    "SphericalFieldSample",
    "eval_field",
    "spherical_components",
    "cartesian_field",
    "helicity",
    "FieldIntegrator",
    "one_photon_integral",
    "two_photon_integral",
    "Spectrum",
    "power_spectrum",
    "time_frequency_map",
]

SQRT_HALF = 1.0 / math.sqrt(2.0)


class Channel(str, enum.Enum):
    LIN_Z = "LIN_Z"
    CRP = "CRP"
    CLP = "CLP"


@dataclass(frozen=True)
class SubPulse:
    E0: float
    omega: float
    phi: float
    tau: float
    sigma: float
    channel: Channel = Channel.LIN_Z

    def __post_init__(self):
        try:
            object.__setattr__(self, "channel", Channel(self.channel))
        except ValueError:
            raise ConfigError(f"unknown channel {self.channel!r}; expected LIN_Z, CRP or CLP") from None
        for name in ("E0", "omega", "phi", "tau", "sigma"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigError(f"sub-pulse {name} must be finite")
        if self.E0 < 0:
            raise ConfigError("sub-pulse E0 must be >= 0")
        if self.sigma <= 0:
            raise ConfigError("sub-pulse sigma must be > 0")
        if self.omega <= 0:
            raise ConfigError("sub-pulse omega must be > 0")

    @property
    def fwhm(self) -> float:
        return units.FWHM_PER_SIGMA * self.sigma

    def envelope(self, t):
        return self.E0 * np.exp(-((t - self.tau) ** 2) / (2.0 * self.sigma**2))

    def carrier_phase(self, t):
        return self.omega * (t - self.tau) + self.phi

    @classmethod
    def from_record(cls, rec: dict) -> "SubPulse":
        has_a = rec.get("amplitude_au") is not None
        has_i = rec.get("intensity_Wcm2") is not None
        if has_a == has_i:
            raise ConfigError("sub-pulse needs exactly one of amplitude_au / intensity_Wcm2")
        try:
            if has_a:
                e0 = float(rec["amplitude_au"])
            else:
                i = float(rec["intensity_Wcm2"])
                if i < 0:
                    raise ConfigError("intensity_Wcm2 must be >= 0")
                e0 = units.intensity_to_amplitude(i)
            fwhm = units.fs_to_au(float(rec["fwhm_fs"]))
            return cls(
                E0=e0,
                omega=units.ev_to_au(float(rec["omega_eV"])),
                phi=float(rec.get("phase_rad", 0.0)),
                tau=units.fs_to_au(float(rec.get("tau_fs", 0.0))),
                sigma=fwhm / units.FWHM_PER_SIGMA,
                channel=rec.get("channel", "LIN_Z"),
            )
        except KeyError as exc:
            raise ConfigError(f"sub-pulse record is missing key {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad sub-pulse record {rec!r}: {exc}") from None

    def to_record(self) -> dict:
        return {
            "amplitude_au": self.E0,
            "omega_eV": units.au_to_ev(self.omega),
            "phase_rad": self.phi,
            "tau_fs": units.au_to_fs(self.tau),
            "fwhm_fs": units.au_to_fs(self.fwhm),
            "channel": self.channel.value,
        }


@dataclass(frozen=True)
class FieldSpec:
    pulses: tuple[SubPulse, ...]

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.pulses:
            raise ConfigError("FieldSpec needs at least one sub-pulse")

    def __iter__(self):
        return iter(self.pulses)

    def __len__(self):
        return len(self.pulses)

    def window(self, n_sigma: float = 8.0) -> tuple[float, float]:
        smax = max(p.sigma for p in self.pulses)
        return (min(p.tau for p in self.pulses) - n_sigma * smax,
                max(p.tau for p in self.pulses) + n_sigma * smax)

    def scaled(self, factor: float) -> "FieldSpec":
        return FieldSpec(tuple(_replace(p, E0=p.E0 * factor) for p in self.pulses))

    def has_channel(self, mu0: int) -> bool:
        if mu0 == 0:
            return any(p.channel is Channel.LIN_Z and p.E0 > 0 for p in self.pulses)
        return any(p.channel is not Channel.LIN_Z and p.E0 > 0 for p in self.pulses)

    @classmethod
    def from_records(cls, records) -> "FieldSpec":
        if isinstance(records, dict):
            records = records.get("pulses")
        if not isinstance(records, (list, tuple)):
            raise ConfigError("field spec must be a list of sub-pulse records")
        return cls(tuple(SubPulse.from_record(r) for r in records))

    def to_records(self) -> list[dict]:
        return [p.to_record() for p in self.pulses]

    @classmethod
    def load_json(cls, path) -> "FieldSpec":
        try:
            text = Path(path).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read field spec {path}: {exc}") from None
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_records(data)

    def dump_json(self, path) -> None:
        Path(path).write_text(json.dumps({"pulses": self.to_records()}, indent=2) + "\n",
                              encoding="utf-8")


def _replace(p: SubPulse, **kw) -> SubPulse:
    d = dict(E0=p.E0, omega=p.omega, phi=p.phi, tau=p.tau, sigma=p.sigma, channel=p.channel)
    d.update(kw)
    return SubPulse(**d)


@dataclass(frozen=True)
class SphericalFieldSample:
    e_plus: np.ndarray | complex
    e_zero: np.ndarray | complex
    e_minus: np.ndarray | complex

    def as_array(self) -> np.ndarray:
        """Components stacked in the order mu0 = -1, 0, +1."""
        return np.stack(np.broadcast_arrays(self.e_minus, self.e_zero, self.e_plus))

    def cartesian(self) -> np.ndarray:
        """Cartesian (x, y, z) along the last axis; complex dtype, real for physical fields."""
        return _spherical_to_cartesian(self.as_array())


def _spherical_to_cartesian(comps: np.ndarray) -> np.ndarray:
    em, e0, ep = comps
    ex = (em - ep) * SQRT_HALF
    ey = 1j * (em + ep) * SQRT_HALF
    return np.stack([ex, ey, e0 + 0j], axis=-1)


def _subpulse_components(p: SubPulse, t: np.ndarray) -> tuple:
    h = p.envelope(t)
    om = p.carrier_phase(t)
    if p.channel is Channel.LIN_Z:
        return (0, h * np.cos(om))
    if p.channel is Channel.CRP:
        w = SQRT_HALF * h * np.exp(1j * om)
        return (1, w, -np.conj(w))
    w = SQRT_HALF * h * np.exp(-1j * om)
    return (1, -w, np.conj(w))


def spherical_components(spec: FieldSpec, t) -> np.ndarray:
    """Array of shape (3,) + t.shape with components for mu0 = -1, 0, +1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros((3,) + t.shape, dtype=complex)
    for p in spec.pulses:
        c = _subpulse_components(p, t)
        if c[0] == 0:
            out[1] += c[1]
        else:
            out[2] += c[1]
            out[0] += c[2]
    return out


def eval_field(spec: FieldSpec, t) -> SphericalFieldSample:
    c = spherical_components(spec, t)
    if c.ndim == 1:
        return SphericalFieldSample(e_plus=complex(c[2]), e_zero=complex(c[1]),
                                    e_minus=complex(c[0]))
    return SphericalFieldSample(e_plus=c[2], e_zero=c[1], e_minus=c[0])


def cartesian_field(spec: FieldSpec, t) -> np.ndarray:
    """Real cartesian field, shape t.shape + (3,)."""
    xyz = _spherical_to_cartesian(spherical_components(spec, t))
    return xyz.real


def helicity(spec: FieldSpec, omega_j: float, t, freq_tol: float = 1e-6,
             floor: float | None = None):
    """Differential helicity of the sub-band at carrier ``omega_j``.

    Returns None (scalar t) or NaN entries (array t) where both envelopes are
    below ``floor``; the default floor is 1e-12 of the largest matched E0.
    """
    matched = [p for p in spec.pulses
               if p.channel is not Channel.LIN_Z and abs(p.omega - omega_j) < freq_tol]
    if not matched:
        raise LookupError(f"no circular sub-pulse with carrier {omega_j} a.u. (tol {freq_tol})")
    if floor is None:
        floor = 1e-12 * max(p.E0 for p in matched)
    t_arr = np.asarray(t, dtype=float)
    mag = {}
    for ch in (Channel.CRP, Channel.CLP):
        sub = [p for p in matched if p.channel is ch]
        if sub:
            xyz = cartesian_field(FieldSpec(tuple(sub)), t_arr)
            mag[ch] = np.linalg.norm(xyz, axis=-1)
        else:
            mag[ch] = np.zeros(t_arr.shape)
    r, l = mag[Channel.CRP], mag[Channel.CLP]
    tot = r + l
    gap = tot <= floor
    with np.errstate(invalid="ignore", divide="ignore"):
        z = np.where(gap, np.nan, (r - l) / np.where(gap, 1.0, tot))
    if t_arr.ndim == 0:
        return None if gap else float(z)
    return z


# ---------------------------------------------------------------------------
# time integrals


@lru_cache(maxsize=8)
def _panel_rule(n: int):
    """Gauss-Legendre nodes/weights on [-1, 1] and the node-to-node
    antiderivative matrix S with S @ f(x) ~ int_{-1}^{x_i} f."""
    x, w = np.polynomial.legendre.leggauss(n)
    V = np.polynomial.legendre.legvander(x, n - 1)
    A = np.empty((n, n))
    A[:, 0] = x + 1.0
    for k in range(1, n):
        ck = np.zeros(n + 1)
        ck[k + 1] = 1.0
        cm = np.zeros(n + 1)
        cm[k - 1] = 1.0
        A[:, k] = (np.polynomial.legendre.legval(x, ck) - np.polynomial.legendre.legval(x, cm)) / (2 * k + 1)
    S = A @ np.linalg.inv(V)
    return x, w, S


class FieldIntegrator:
    """Composite Gauss-Legendre grid covering the field support.

    ``max_freq`` is the largest angular frequency of any exponential factor
    that will multiply the field (a.u.); the panel width is half a period of
    the fastest integrand so that each period gets >= 2*nodes points.
    """

    def __init__(self, spec: FieldSpec, max_freq: float = 0.0, nodes: int = 20,
                 refine: int = 1, n_sigma: float = 8.0):
        self.spec = spec
        self.nodes = nodes
        self.refine = refine
        self.n_sigma = n_sigma
        self.max_freq = float(max_freq)
        t0, t1 = spec.window(n_sigma)
        wmax = max(p.omega for p in spec.pulses)
        smin = min(p.sigma for p in spec.pulses)
        f = abs(self.max_freq) + 2.0 * wmax + 8.0 / smin
        h = min(math.pi / f, smin / 2.0) / refine
        npan = max(1, int(math.ceil((t1 - t0) / h)))
        h = (t1 - t0) / npan
        x, w, S = _panel_rule(nodes)
        starts = t0 + h * np.arange(npan)
        self.t = (starts[:, None] + 0.5 * h * (x[None, :] + 1.0)).ravel()
        self.w = np.tile(0.5 * h * w, npan)
        self._S = 0.5 * h * S
        self._npan = npan
        self.t0, self.t1 = t0, t1
        self.comps = spherical_components(spec, self.t)
        self.active = np.array([spec.has_channel(m) for m in (-1, 0, 1)])
        self._inner_cache: dict = {}

    def one_photon(self, delta: float) -> np.ndarray:
        """I_mu0(delta) for mu0 = -1, 0, +1."""
        ph = np.exp(1j * delta * self.t) * self.w
        out = self.comps @ ph
        out[~self.active] = 0.0
        return out

    def inner(self, a: float) -> np.ndarray:
        """Running integrals int_{t0}^{t} exp(i a s) E_nu0(s) ds at the nodes, shape (3, N)."""
        key = round(float(a), 14)
        got = self._inner_cache.get(key)
        if got is not None:
            return got
        f = self.comps * np.exp(1j * a * self.t)
        f = f.reshape(3, self._npan, self.nodes)
        local = np.einsum("ij,cpj->cpi", self._S, f)
        tot = np.einsum("j,cpj->cp", self.w[: self.nodes], f)
        offs = np.concatenate([np.zeros((3, 1)), np.cumsum(tot, axis=1)[:, :-1]], axis=1)
        g = (local + offs[:, :, None]).reshape(3, -1)
        g[~self.active] = 0.0
        if len(self._inner_cache) > 64:
            self._inner_cache.clear()
        self._inner_cache[key] = g
        return g

    def two_photon(self, e_k: float, e_p: float, e_i0: float) -> np.ndarray:
        """F[mu0, nu0] (index = component + 1) for intermediate level e_p."""
        g = self.inner(e_p - e_i0)
        outer = self.comps * (np.exp(1j * (e_k - e_p) * self.t) * self.w)
        out = outer @ g.T
        out[~self.active, :] = 0.0
        return out

    def abs_moment(self) -> np.ndarray:
        """int |E_mu0| dt per component; bounds |I| and is the error scale."""
        return np.abs(self.comps) @ self.w


def _check_mu(*mus):
    for m in mus:
        if m not in (-1, 0, 1):
            raise ConfigError(f"spherical component must be -1, 0 or +1, got {m}")


def _compare(a, b, scale, rtol, what):
    err = abs(a - b)
    if err > rtol * max(scale, 1e-300) and err > 0:
        raise QuadratureError(
            f"{what}: grid-doubling difference {err:.3e} exceeds rtol {rtol:g} x scale {scale:.3e}")
    return b


def one_photon_integral(spec: FieldSpec, mu0: int, delta: float, rtol: float = 1e-10) -> complex:
    """int E_mu0(t) exp(i delta t) dt over the whole field support."""
    _check_mu(mu0)
    if not spec.has_channel(mu0):
        return 0j
    fi = FieldIntegrator(spec, abs(delta))
    fi2 = FieldIntegrator(spec, abs(delta), refine=2)
    a = fi.one_photon(delta)[mu0 + 1]
    b = fi2.one_photon(delta)[mu0 + 1]
    return complex(_compare(a, b, fi2.abs_moment()[mu0 + 1], rtol, "one-photon integral"))


def two_photon_integral(spec: FieldSpec, mu0: int, nu0: int, e_k: float, e_p: float,
                        e_i0: float, rtol: float = 1e-9) -> complex:
    """Time-ordered double integral with mu0 on the later (outer) photon."""
    _check_mu(mu0, nu0)
    if not (spec.has_channel(mu0) and spec.has_channel(nu0)):
        return 0j
    f = abs(e_k - e_p) + abs(e_p - e_i0)
    fi = FieldIntegrator(spec, f)
    fi2 = FieldIntegrator(spec, f, refine=2)
    a = fi.two_photon(e_k, e_p, e_i0)[mu0 + 1, nu0 + 1]
    b = fi2.two_photon(e_k, e_p, e_i0)[mu0 + 1, nu0 + 1]
    m = fi2.abs_moment()
    return complex(_compare(a, b, m[mu0 + 1] * m[nu0 + 1], rtol, "two-photon integral"))


# ---------------------------------------------------------------------------
# spectra


@dataclass(frozen=True)
class Spectrum:
    omega: np.ndarray
    intensity: np.ndarray
    phase: np.ndarray

    def rows(self):
        return list(zip(self.omega.tolist(), self.intensity.tolist(), self.phase.tolist()))


def _sample_grid(spec: FieldSpec, omega_max: float, samples_per_period: int):
    t0, t1 = spec.window()
    wmax = max(max(p.omega for p in spec.pulses), omega_max)
    dt = 2.0 * math.pi / (wmax * samples_per_period)
    n = int(math.ceil((t1 - t0) / dt)) + 1
    t = t0 + dt * np.arange(n)
    return t, dt


def power_spectrum(spec: FieldSpec, omega_grid, samples_per_period: int = 16) -> Spectrum:
    """|FT|^2 summed over cartesian components, with the unwrapped phase of the
    dominant component."""
    omega = np.asarray(omega_grid, dtype=float)
    if omega.ndim != 1 or omega.size == 0:
        raise ConfigError("omega_grid must be a non-empty 1-d array")
    t, dt = _sample_grid(spec, float(np.max(np.abs(omega))), samples_per_period)
    nyq = math.pi / dt
    if np.max(np.abs(omega)) >= nyq:
        raise ConfigError(f"omega_grid exceeds the sampling Nyquist limit {nyq:.4g} a.u.")
    e = cartesian_field(spec, t)  # (N, 3)
    ft = np.exp(1j * np.outer(omega, t)) @ e * dt  # (n_omega, 3)
    power = np.abs(ft) ** 2
    dom = int(np.argmax(power.sum(axis=0)))
    return Spectrum(omega=omega, intensity=power.sum(axis=1),
                    phase=np.unwrap(np.angle(ft[:, dom])))


def time_frequency_map(spec: FieldSpec, t_grid, omega_grid, component: int | None = None,
                       window_sigma: float | None = None,
                       samples_per_period: int = 16) -> np.ndarray:
    """Gabor spectrogram S[i, j] of one cartesian component (0=x, 1=y, 2=z).

    The default component is the one carrying the most energy and the default
    Gaussian window width is half the shortest sub-pulse sigma.
    """
    tg = np.asarray(t_grid, dtype=float)
    omega = np.asarray(omega_grid, dtype=float)
    if tg.size == 0 or omega.size == 0:
        raise ConfigError("t_grid and omega_grid must be non-empty")
    t, dt = _sample_grid(spec, float(np.max(np.abs(omega))), samples_per_period)
    if np.max(np.abs(omega)) >= math.pi / dt:
        raise ConfigError("omega_grid exceeds the sampling Nyquist limit")
    e = cartesian_field(spec, t)
    if component is None:
        component = int(np.argmax((e**2).sum(axis=0)))
    sig = e[:, component]
    s = window_sigma if window_sigma is not None else 0.5 * min(p.sigma for p in spec.pulses)
    kern = np.exp(1j * np.outer(t, omega))  # (N, n_omega)
    out = np.empty((tg.size, omega.size))
    for i, tc in enumerate(tg):
        g = np.exp(-((t - tc) ** 2) / (2.0 * s * s))
        out[i] = np.abs((sig * g) @ kern * dt) ** 2
    return out
