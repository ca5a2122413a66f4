"""Orbital level schemes, molecular-frame dipole tables and a synthetic generator.

Dipole components are stored as ``r_{p,q}.e_mu = e_mu . <p|r|q>`` with the
spherical unit vectors of :mod:`padctrl.angular`, index ``mu + 1``.  Partial
waves are flattened as ``lm = l*l + l + m``.  Energies are stored in eV (the
interface unit) so files round-trip exactly; ``*_au`` properties convert.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.special import loggamma

from . import units
from .angular import spherical_basis
from .errors import DataValidationError, DomainError

__all__ = [
    "OrbitalSet",
    "DipoleSet",
    "lm_index",
    "lm_pairs",
    "load_dipoles",
    "write_dipoles",
    "interpolate_continuum",
    "continuum_at",
    "synth_hydrogenic",
    "chfclbr_levels",
    "chfclbr_preset",
    "HERMITICITY_TOL",
]

HERMITICITY_TOL = 1e-10


def lm_index(l: int, m: int) -> int:
    return l * l + l + m


def lm_pairs(l_max: int) -> list[tuple[int, int]]:
    return [(l, m) for l in range(l_max + 1) for m in range(-l, l + 1)]


@dataclass(frozen=True)
class OrbitalSet:
    labels: tuple[str, ...]
    energies_ev: tuple[float, ...]
    occupied: tuple[bool, ...]
    i0: str

    def __post_init__(self):
        for name in ("labels", "energies_ev", "occupied"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        n = len(self.labels)
        if n == 0 or len(self.energies_ev) != n or len(self.occupied) != n:
            raise DataValidationError("orbital labels, energies and occupations must have equal, non-zero length")
        if len(set(self.labels)) != n:
            raise DataValidationError("orbital labels must be unique")
        if not all(math.isfinite(e) for e in self.energies_ev):
            raise DataValidationError("orbital energies must be finite")
        if self.i0 not in self.labels:
            raise DataValidationError(f"ionized orbital {self.i0!r} is not in the orbital list")
        if not self.occupied[self.index(self.i0)]:
            raise DataValidationError("the ionized orbital must be occupied")

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise DataValidationError(f"unknown orbital {label!r}") from None

    @property
    def i0_index(self) -> int:
        return self.index(self.i0)

    @property
    def energies(self) -> np.ndarray:
        return units.ev_to_au(np.asarray(self.energies_ev, dtype=float))

    @property
    def e_i0(self) -> float:
        return float(self.energies[self.i0_index])

    @property
    def virtual(self) -> list[int]:
        return [i for i, o in enumerate(self.occupied) if not o]

    @property
    def occupied_indices(self) -> list[int]:
        return [i for i, o in enumerate(self.occupied) if o]

    @property
    def intermediates(self) -> list[int]:
        """Levels p entering the two-photon sums: i0 itself and every virtual orbital."""
        return [self.i0_index] + self.virtual


@dataclass(frozen=True, eq=False)
class DipoleSet:
    labels: tuple[str, ...]
    k_grid_ev: np.ndarray
    l_max: int
    bb: np.ndarray  # (n_orb, n_orb, 3)
    bc: np.ndarray  # (n_orb, n_k, (l_max+1)^2, 3)
    validate: bool = field(default=True, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        k = np.array(self.k_grid_ev, dtype=float)
        bb = np.array(self.bb, dtype=complex)
        bc = np.array(self.bc, dtype=complex)
        n = len(self.labels)
        nlm = (self.l_max + 1) ** 2
        if self.l_max < 0:
            raise DataValidationError("l_max must be >= 0")
        if k.ndim != 1 or k.size == 0:
            raise DataValidationError("k grid must be a non-empty 1-d array")
        if bb.shape != (n, n, 3):
            raise DataValidationError(f"bound-bound table has shape {bb.shape}, expected {(n, n, 3)}")
        if bc.shape != (n, k.size, nlm, 3):
            raise DataValidationError(f"bound-continuum table has shape {bc.shape}, expected {(n, k.size, nlm, 3)}")
        for a in (k, bb, bc):
            a.setflags(write=False)
        object.__setattr__(self, "k_grid_ev", k)
        object.__setattr__(self, "bb", bb)
        object.__setattr__(self, "bc", bc)
        if self.validate:
            self.check()

    def check(self) -> None:
        k = self.k_grid_ev
        bad = np.nonzero(np.diff(k) <= 0)[0]
        if bad.size:
            raise DataValidationError(
                "k grid not strictly increasing at indices " + ", ".join(str(i + 1) for i in bad[:10]))
        if not (np.all(np.isfinite(k)) and np.all(np.isfinite(self.bb)) and np.all(np.isfinite(self.bc))):
            raise DataValidationError("dipole data contain non-finite values")
        # r_{q,p,mu} = (-1)^mu conj(r_{p,q,-mu})
        sign = np.array([-1.0, 1.0, -1.0])
        herm = sign * np.conj(self.bb[:, :, ::-1]).transpose(1, 0, 2)
        dev = np.abs(self.bb - herm)
        scale = max(1.0, float(np.max(np.abs(self.bb), initial=0.0)))
        off = np.argwhere(dev > HERMITICITY_TOL * scale)
        if off.size:
            items = [f"({self.labels[q]}, {self.labels[p]}, mu={mu - 1})" for q, p, mu in off[:10]]
            raise DataValidationError("bound-bound hermiticity violated for " + ", ".join(items))

    @property
    def k_grid(self) -> np.ndarray:
        return units.ev_to_au(self.k_grid_ev)

    @property
    def n_lm(self) -> int:
        return (self.l_max + 1) ** 2

    def index(self, label: str) -> int:
        return self.labels.index(label)

    def with_data(self, bb=None, bc=None) -> "DipoleSet":
        return DipoleSet(self.labels, self.k_grid_ev, self.l_max,
                         self.bb if bb is None else bb, self.bc if bc is None else bc)

    def conjugated(self) -> "DipoleSet":
        """Dipoles of the complex-conjugated orbitals and continuum states.

        In spherical components this is ``r_mu -> (-1)^mu conj(r_-mu)`` for
        bound-bound vectors and ``r_{l,m,mu} -> (-1)^(m+mu) conj(r_{l,-m,-mu})``
        for the partial waves.
        """
        sgn = np.array([-1.0, 1.0, -1.0])
        bb = sgn * np.conj(self.bb[:, :, ::-1])
        lm = lm_pairs(self.l_max)
        mirror = [lm_index(l, -m) for (l, m) in lm]
        msgn = np.array([(-1.0) ** m for (_, m) in lm])
        bc = msgn[None, None, :, None] * sgn * np.conj(self.bc[:, :, mirror, ::-1])
        return DipoleSet(self.labels, self.k_grid_ev, self.l_max, bb, bc)

    def truncated(self, l_max: int) -> "DipoleSet":
        return DipoleSet(self.labels, self.k_grid_ev, l_max, self.bb,
                         self.bc[:, :, : (l_max + 1) ** 2, :])


# ---------------------------------------------------------------------------
# interpolation


def _bracket(d: DipoleSet, e_k: float) -> tuple[int, float]:
    k = d.k_grid
    tol = 1e-12 * max(1.0, abs(k[-1]))
    if not (k[0] - tol <= e_k <= k[-1] + tol):
        raise DomainError(
            f"e_k = {units.au_to_ev(e_k):.6g} eV outside dipole grid "
            f"[{d.k_grid_ev[0]:.6g}, {d.k_grid_ev[-1]:.6g}] eV")
    if k.size == 1:
        return 0, 0.0
    j = int(np.searchsorted(k, e_k, side="right")) - 1
    j = min(max(j, 0), k.size - 2)
    t = (e_k - k[j]) / (k[j + 1] - k[j])
    return j, min(max(t, 0.0), 1.0)


def continuum_at(d: DipoleSet, e_k: float) -> np.ndarray:
    """All bound-continuum elements at energy ``e_k`` (a.u.), shape (n_orb, n_lm, 3)."""
    j, t = _bracket(d, e_k)
    if t == 0.0:
        return d.bc[:, j].copy()
    if t == 1.0:
        return d.bc[:, j + 1].copy()
    a, b = d.bc[:, j], d.bc[:, j + 1]
    re = (1.0 - t) * a.real + t * b.real
    im = (1.0 - t) * a.imag + t * b.imag
    return re + 1j * im


def interpolate_continuum(d: DipoleSet, p, l: int, m: int, mu: int, e_k: float) -> complex:
    """Linear interpolation (real and imaginary parts separately) of r_{k l m; p}.e_mu."""
    pi = p if isinstance(p, int) else d.index(p)
    if not (0 <= l <= d.l_max and abs(m) <= l and mu in (-1, 0, 1)):
        raise DomainError(f"(l, m, mu) = ({l}, {m}, {mu}) outside the table (l_max={d.l_max})")
    return complex(continuum_at(d, e_k)[pi, lm_index(l, m), mu + 1])


# ---------------------------------------------------------------------------
# file format


def _fmt(x: float) -> str:
    return repr(float(x))


def write_dipoles(path, orb: OrbitalSet, dip: DipoleSet, comment: str | None = None) -> None:
    lines = []
    if comment:
        lines += [f"# {c}" for c in comment.splitlines()]
    for lab, e, occ in zip(orb.labels, orb.energies_ev, orb.occupied):
        tail = " i0" if lab == orb.i0 else ""
        lines.append(f"#orbital {lab} {_fmt(e)} {'occ' if occ else 'virt'}{tail}")
    lines.append("#kgrid_eV " + " ".join(_fmt(v) for v in dip.k_grid_ev))
    lines.append(f"#lmax {dip.l_max}")
    n = len(dip.labels)
    for p in range(n):
        for q in range(n):
            for mu in (-1, 0, 1):
                v = dip.bb[p, q, mu + 1]
                if v != 0:
                    lines.append(f"bb {dip.labels[p]} {dip.labels[q]} {mu} {_fmt(v.real)} {_fmt(v.imag)}")
    lm = lm_pairs(dip.l_max)
    for p in range(n):
        for ik in range(dip.k_grid_ev.size):
            for i, (l, m) in enumerate(lm):
                for mu in (-1, 0, 1):
                    v = dip.bc[p, ik, i, mu + 1]
                    if v != 0:
                        lines.append(f"bc {dip.labels[p]} {ik} {l} {m} {mu} {_fmt(v.real)} {_fmt(v.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_dipoles(path) -> tuple[OrbitalSet, DipoleSet]:
    """Parse the line-oriented dipole format; see README for the grammar."""
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise DataValidationError(f"cannot read dipole file {p}: {exc.strerror or exc}") from None

    def fail(lineno, msg):
        raise DataValidationError(f"{p}:{lineno}: {msg}")

    labels, energies, occ, i0 = [], [], [], []
    kgrid = None
    lmax_decl = None
    bb_rows, bc_rows = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line:
            continue
        tok = line.split()
        try:
            if tok[0] == "#orbital":
                if len(tok) not in (4, 5) or tok[3] not in ("occ", "virt") or (len(tok) == 5 and tok[4] != "i0"):
                    fail(lineno, "expected '#orbital <label> <energy_eV> <occ|virt> [i0]'")
                labels.append(tok[1])
                energies.append(float(tok[2]))
                occ.append(tok[3] == "occ")
                if len(tok) == 5:
                    i0.append(tok[1])
            elif tok[0] == "#kgrid_eV":
                if kgrid is not None:
                    fail(lineno, "duplicate #kgrid_eV line")
                kgrid = [float(v) for v in tok[1:]]
                if not kgrid:
                    fail(lineno, "empty k grid")
            elif tok[0] == "#lmax":
                lmax_decl = int(tok[1])
            elif tok[0].startswith("#"):
                continue
            elif tok[0] == "bb":
                if len(tok) != 6:
                    fail(lineno, "expected 'bb <p> <q> <mu> <re> <im>'")
                bb_rows.append((lineno, tok[1], tok[2], int(tok[3]), complex(float(tok[4]), float(tok[5]))))
            elif tok[0] == "bc":
                if len(tok) != 8:
                    fail(lineno, "expected 'bc <p> <k_index> <l> <m> <mu> <re> <im>'")
                bc_rows.append((lineno, tok[1], int(tok[2]), int(tok[3]), int(tok[4]), int(tok[5]),
                                complex(float(tok[6]), float(tok[7]))))
            else:
                fail(lineno, f"unknown record type {tok[0]!r}")
        except ValueError as exc:
            if isinstance(exc, DataValidationError):
                raise
            fail(lineno, f"cannot parse number ({exc})")

    if not labels:
        raise DataValidationError(f"{p}: no #orbital lines")
    if len(i0) != 1:
        raise DataValidationError(f"{p}: exactly one orbital must be marked i0 (found {len(i0)})")
    if kgrid is None:
        raise DataValidationError(f"{p}: missing #kgrid_eV line")
    orb = OrbitalSet(tuple(labels), tuple(energies), tuple(occ), i0[0])
    lmax = lmax_decl if lmax_decl is not None else max([r[3] for r in bc_rows], default=0)
    n, nk, nlm = len(labels), len(kgrid), (lmax + 1) ** 2
    bb = np.zeros((n, n, 3), dtype=complex)
    bc = np.zeros((n, nk, nlm, 3), dtype=complex)
    seen = set()
    for lineno, a, b, mu, v in bb_rows:
        if a not in labels or b not in labels:
            fail(lineno, f"unknown orbital in 'bb {a} {b}'")
        if mu not in (-1, 0, 1):
            fail(lineno, f"mu must be -1, 0 or +1 (got {mu})")
        key = ("bb", a, b, mu)
        if key in seen:
            fail(lineno, "duplicate entry")
        seen.add(key)
        bb[labels.index(a), labels.index(b), mu + 1] = v
    for lineno, a, ik, l, m, mu, v in bc_rows:
        if a not in labels:
            fail(lineno, f"unknown orbital {a!r}")
        if not 0 <= ik < nk:
            fail(lineno, f"k index {ik} outside grid of {nk} points")
        if not (0 <= l <= lmax and abs(m) <= l):
            fail(lineno, f"invalid partial wave (l={l}, m={m}) for l_max={lmax}")
        if mu not in (-1, 0, 1):
            fail(lineno, f"mu must be -1, 0 or +1 (got {mu})")
        key = ("bc", a, ik, l, m, mu)
        if key in seen:
            fail(lineno, "duplicate entry")
        seen.add(key)
        bc[labels.index(a), ik, lm_index(l, m), mu + 1] = v
    try:
        dip = DipoleSet(tuple(labels), np.array(kgrid), lmax, bb, bc)
    except DataValidationError as exc:
        raise DataValidationError(f"{p}: {exc}") from None
    return orb, dip


# ---------------------------------------------------------------------------
# synthetic data

CHFCLBR_LEVELS_EV = {
    "HOMO": -11.878,
    "LUMO": -4.803,
    "LUMO+1": -0.974,
    "LUMO+2": -0.8136,
}


def chfclbr_levels(n_virtual: int = 3) -> OrbitalSet:
    """HOMO plus up to three virtual levels of the CHFClBr-like preset."""
    if not 1 <= n_virtual <= 3:
        raise ValueError("the preset has between 1 and 3 virtual orbitals")
    labels = ["HOMO", "LUMO", "LUMO+1", "LUMO+2"][: n_virtual + 1]
    return OrbitalSet(tuple(labels), tuple(CHFCLBR_LEVELS_EV[x] for x in labels),
                      (True,) + (False,) * n_virtual, "HOMO")


def _default_levels(n_virtual: int, n_core: int) -> OrbitalSet:
    if n_core == 0 and n_virtual <= 3:
        return chfclbr_levels(n_virtual)
    labels = [f"CORE{i}" for i in range(n_core, 0, -1)] + ["HOMO"]
    energies = [-11.878 - 2.5 * i for i in range(n_core, 0, -1)] + [-11.878]
    virt = list(CHFCLBR_LEVELS_EV.values())[1:]
    for i in range(n_virtual):
        labels.append("LUMO" if i == 0 else f"LUMO+{i}")
        energies.append(virt[i] if i < 3 else -0.8136 + 0.35 * (i - 2))
    occ = [True] * (n_core + 1) + [False] * n_virtual
    return OrbitalSet(tuple(labels), tuple(energies), tuple(occ), "HOMO")


def _coulomb_phase(l: int, k: np.ndarray) -> np.ndarray:
    return np.imag(loggamma(l + 1 - 1j / k))


def synth_hydrogenic(l_max: int = 3, k_grid=None, n_virtual: int = 3, seed: int = 0,
                     m_symmetric: bool = False, n_core: int = 0,
                     levels: OrbitalSet | None = None) -> tuple[OrbitalSet, DipoleSet]:
    """Smooth complex dipoles with hydrogen-like energy dependence.

    ``k_grid`` is in eV (default 60 points on [0.5, 30] eV).  Each channel
    gets a random complex strength and phase drawn before the grid is touched,
    times ``k^l / (1 + k^2)^(l+2)`` and the Coulomb phase ``arg Gamma(l+1-i/k)``.
    With ``m_symmetric`` the data are mirror-symmetric under y -> -y, i.e.
    ``r_{l,m,mu} = (-1)^(m+mu) r_{l,-m,-mu}`` and real bound-bound
    vectors with no y component, which makes the molecule achiral.
    """
    if l_max < 1:
        raise ValueError("l_max must be >= 1")
    if n_virtual < 1:
        raise ValueError("n_virtual must be >= 1")
    orb = levels if levels is not None else _default_levels(n_virtual, n_core)
    k_ev = np.linspace(0.5, 30.0, 60) if k_grid is None else np.asarray(k_grid, dtype=float)
    rng = np.random.default_rng(seed)
    n = len(orb.labels)
    lm = lm_pairs(l_max)
    nlm = len(lm)

    # bound-bound: hermitian cartesian matrix elements d_pq, r_mu = e_mu . d
    d = rng.normal(size=(n, n, 3)) + 1j * rng.normal(size=(n, n, 3))
    d = 0.5 * (d + np.conj(d.transpose(1, 0, 2)))
    if m_symmetric:
        d = d.real + 0j
        d[:, :, 1] = 0.0
    e = spherical_basis()
    bb = np.einsum("mc,pqc->pqm", e, d)

    amp = (rng.normal(size=(n, nlm, 3)) + 1j * rng.normal(size=(n, nlm, 3))) / np.sqrt(2.0)
    ph0 = rng.uniform(0, 2 * np.pi, size=(n, nlm, 3))
    slope = rng.normal(scale=0.5, size=(n, nlm, 3))
    if m_symmetric:
        sgn = np.array([(-1) ** (m + mu) for (_, m) in lm for mu in (-1, 0, 1)]).reshape(nlm, 3)
        mirror = np.array([lm_index(l, -m) for (l, m) in lm])
        amp_m = sgn[None] * amp[:, mirror, ::-1]
        amp = 0.5 * (amp + amp_m)
        # phases must also match under the mirror
        ph0 = 0.5 * (ph0 + ph0[:, mirror, ::-1])
        slope = 0.5 * (slope + slope[:, mirror, ::-1])

    k = np.sqrt(2.0 * units.ev_to_au(k_ev))
    eau = units.ev_to_au(k_ev)
    bc = np.zeros((n, k_ev.size, nlm, 3), dtype=complex)
    for i, (l, m) in enumerate(lm):
        radial = k**l / (1.0 + k * k) ** (l + 2) * np.exp(1j * _coulomb_phase(l, k))
        phase = np.exp(1j * (ph0[:, i, :, None] + slope[:, i, :, None] * eau[None, None, :]))
        bc[:, :, i, :] = (amp[:, i, :, None] * phase * radial[None, None, :]).transpose(0, 2, 1)
    return orb, DipoleSet(orb.labels, k_ev, l_max, bb, bc)


def chfclbr_preset(l_max: int = 3, seed: int = 0, k_grid=None) -> tuple[OrbitalSet, DipoleSet]:
    """Preset level scheme (HOMO, LUMO, LUMO+1, LUMO+2) with synthetic dipoles."""
    return synth_hydrogenic(l_max=l_max, k_grid=k_grid, n_virtual=3, seed=seed,
                            levels=chfclbr_levels(3))
