"""Command-line entry point: ``padctrl {pad,scan,optimize,pulse,validate,write-dipoles}``.

Exit codes: 0 success, 2 configuration error, 3 data validation error,
4 numerical error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import math
import platform
import sys
import time
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, plotting, units
from .betas import beta_tables, make_integrator, write_beta_csv
from .errors import ConfigError, DataValidationError, DomainError, NumericalError
from .optimizer import (PARAM_NAMES, PRESETS, FreeParam, OptProblem, optimize, preset,
                        scan_bichromatic, template_values)
from .pad import NegativeIntensityWarning, anisotropy, compute_pad, objective, theta_grid, write_pad_csv
from .pulses import Channel, FieldSpec, helicity, power_spectrum, time_frequency_map
from .structure import chfclbr_preset, load_dipoles, synth_hydrogenic, write_dipoles

EXIT_OK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERIC = 0, 2, 3, 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


@dataclass
class RunConfig:
    command: str
    out: Path
    args: dict
    inputs: dict = field(default_factory=dict)
    outputs: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def path(self, name: str) -> Path:
        p = self.out / name
        self.outputs.append(name)
        return p

    def write_manifest(self, argv) -> None:
        man = {
            "tool": "padctrl",
            "version": __version__,
            "command": self.command,
            "argv": list(argv),
            "args": self.args,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "summary": self.summary,
            "units": {
                "internal": "atomic units",
                "energy": "eV at interfaces (1 Eh = %r eV)" % units.HARTREE_EV,
                "time": "fs at interfaces (1 a.u. = %r s)" % units.AU_TIME_S,
                "intensity": "W/cm^2, I = %r * E0^2" % units.AU_INTENSITY_WCM2,
                "angles": "theta in degrees in CSV, radians internally",
                "envelope": "exp(-(t-tau)^2/(2 sigma^2)), FWHM = 2 sqrt(2 ln 2) sigma",
            },
            "python": platform.python_version(),
            "numpy": np.__version__,
            "created_unix": time.time(),
        }
        (self.out / "manifest.json").write_text(json.dumps(man, indent=2, default=str) + "\n", encoding="utf-8")


# ---------------------------------------------------------------------------
# shared argument groups


def _common(p):
    p.add_argument("--dipoles", type=Path, help="dipole file; omitted -> synthetic CHFClBr-like preset")
    p.add_argument("--l-max", type=int, default=3, help="partial waves of the synthetic preset")
    p.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--svg", action="store_true", help="also write SVG figures")


def _field_args(p, default_preset="lumo3"):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--field", type=Path, help="field spec JSON")
    g.add_argument("--preset", default=None, choices=sorted(PRESETS),
                   help=f"multi-color template (default {default_preset})")
    p.add_argument("--intensity", type=float, default=1e11, help="per-color intensity of presets, W/cm^2")
    p.add_argument("--fwhm", type=float, default=23.0, help="preset FWHM in fs")
    p.add_argument("--channel", default="LIN_Z", choices=[c.value for c in Channel])
    p.set_defaults(default_preset=default_preset)


def _grid_args(p):
    p.add_argument("--e-min", type=float, default=5.0)
    p.add_argument("--e-max", type=float, default=15.0)
    p.add_argument("--e-steps", type=int, default=41)
    p.add_argument("--theta-steps", type=int, default=37)
    p.add_argument("--phi-slice", type=float, default=90.0, help="azimuth of the PAD slice, degrees")
    p.add_argument("--angle-convention", choices=["pol-axis", "prop-axis"], default="pol-axis",
                   help="label for the reported angle; the computation is unchanged")


def _load_data(args, cfg: RunConfig):
    if args.dipoles is not None:
        path = Path(args.dipoles)
        if not path.exists():
            raise DataValidationError(f"dipole file not found: {path}")
        orb, dip = load_dipoles(path)
        cfg.inputs["dipoles"] = {"path": str(path), "sha256": hashlib.sha256(path.read_bytes()).hexdigest()}
    else:
        if args.l_max < 1:
            raise ConfigError("--l-max must be >= 1")
        orb, dip = chfclbr_preset(l_max=args.l_max, seed=args.seed)
        cfg.inputs["dipoles"] = {"synthetic": "chfclbr_preset", "l_max": args.l_max, "seed": args.seed}
    return orb, dip


def _load_field(args, cfg: RunConfig) -> FieldSpec:
    if getattr(args, "field", None) is not None:
        spec = FieldSpec.load_json(args.field)
    else:
        spec = preset(args.preset or args.default_preset, args.intensity, args.fwhm, args.channel)
    cfg.inputs["field"] = spec.to_records()
    return spec


def _grids(args):
    if args.e_steps < 1:
        raise ConfigError("--e-steps must be >= 1")
    if args.e_steps > 1 and not args.e_max > args.e_min:
        raise ConfigError("--e-max must exceed --e-min")
    if args.threads < 1:
        raise ConfigError("--threads must be >= 1")
    e = np.linspace(args.e_min, args.e_max, args.e_steps) if args.e_steps > 1 else np.array([args.e_min])
    return e, theta_grid(args.theta_steps), math.radians(args.phi_slice)


def _write_matrix_csv(path, e, th, values, name):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["e_eV", "theta_deg", name])
        for i, ev in enumerate(e):
            for j, t in enumerate(th):
                w.writerow([repr(float(ev)), repr(float(np.degrees(t))), repr(float(values[i, j]))])


def _emit_pad(cfg: RunConfig, g, args, prefix=""):
    A = anisotropy(g)
    write_pad_csv(cfg.path(prefix + "pad.csv"), g)
    _write_matrix_csv(cfg.path(prefix + "anisotropy.csv"), g.e_grid, g.theta_grid, A, "anisotropy")
    if args.svg:
        lab = "theta (deg, from %s)" % ("polarization axis" if args.angle_convention == "pol-axis"
                                         else "propagation axis")
        plotting.heatmap(cfg.path(prefix + "pad.svg"), g.intensity.T, g.e_grid, np.degrees(g.theta_grid),
                         "PAD intensity", "photoelectron energy (eV)", lab)
        plotting.heatmap(cfg.path(prefix + "anisotropy.svg"), A.T, g.e_grid, np.degrees(g.theta_grid),
                         "left-right anisotropy A", "photoelectron energy (eV)", lab, diverging=True)
    v, e, th = objective(g)
    cfg.summary.update({"best_abs_A": v, "e_eV": e, "theta_deg": math.degrees(th),
                        "angle_convention": args.angle_convention, "I0": g.I0,
                        "negative_points": g.n_negative})
    print(f"best |A| = {v:.6g} at e={e:.6g} eV, theta={math.degrees(th):.6g} deg")


# ---------------------------------------------------------------------------
# commands


def cmd_pad(args, cfg: RunConfig) -> int:
    e, th, phi = _grids(args)
    orb, dip = _load_data(args, cfg)
    spec = _load_field(args, cfg)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NegativeIntensityWarning)
        g = compute_pad(orb, dip, spec, e, th, phi, threads=args.threads)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    _emit_pad(cfg, g, args)
    if args.betas:
        integ = make_integrator(orb, spec, units.ev_to_au(float(e.max())))
        tabs = []
        for ek in units.ev_to_au(e):
            tabs.extend(beta_tables(orb, dip, spec, float(ek), integ))
        write_beta_csv(cfg.path("betas.csv"), tabs)
    return EXIT_OK


def cmd_scan(args, cfg: RunConfig) -> int:
    if args.omega_steps < 1 or args.phase_steps < 1:
        raise ConfigError("scan ranges must be non-empty (--omega-steps, --phase-steps >= 1)")
    if args.omega_steps > 1 and not args.omega_max > args.omega_min:
        raise ConfigError("--omega-max must exceed --omega-min")
    orb, dip = _load_data(args, cfg)
    om = np.linspace(args.omega_min, args.omega_max, args.omega_steps) if args.omega_steps > 1 \
        else np.array([args.omega_min])
    ph = np.linspace(0.0, args.phase_max, args.phase_steps)
    theta = None if args.theta_deg is None else math.radians(args.theta_deg)
    res = scan_bichromatic(orb, dip, om, ph, intensity_wcm2=args.intensity, ratio=args.ratio,
                           fwhm_fs=args.fwhm, e_k_ev=args.e_k, theta=theta,
                           theta_steps=args.theta_steps, phi_slice=math.radians(args.phi_slice),
                           fundamental=not args.no_fundamental)
    res.write_csv(cfg.path("scan.csv"))
    if args.svg:
        plotting.heatmap(cfg.path("scan.svg"), res.asymmetry.T, 2 * om, ph, "signed anisotropy A",
                         "second-harmonic photon energy (eV)", "relative phase (rad)", diverging=True)
    i, j = np.unravel_index(int(np.argmax(np.abs(res.asymmetry))), res.asymmetry.shape)
    cfg.summary.update({"max_abs_A": float(abs(res.asymmetry[i, j])), "omega_eV": float(om[i]),
                        "phase_rad": float(ph[j]), "rows": int(om.size * ph.size)})
    print(f"max |A| = {abs(res.asymmetry[i, j]):.6g} at omega={om[i]:.6g} eV, phase={ph[j]:.6g} rad")
    return EXIT_OK


def _parse_free(specs, template: FieldSpec, cap: float):
    free = []
    for item in specs:
        parts = item.split(":")
        if len(parts) == 1:
            name = _param_alias(parts[0])
            for k, p in enumerate(template.pulses):
                free.append(FreeParam.default(k, name, cap, units.au_to_ev(p.omega)))
        elif len(parts) in (2, 4):
            try:
                k = int(parts[0])
            except ValueError:
                raise ConfigError(f"bad --free item {item!r}") from None
            if not 0 <= k < len(template.pulses):
                raise ConfigError(f"--free refers to missing pulse {k}")
            name = _param_alias(parts[1])
            if len(parts) == 2:
                free.append(FreeParam.default(k, name, cap, units.au_to_ev(template.pulses[k].omega)))
            else:
                try:
                    free.append(FreeParam(k, name, float(parts[2]), float(parts[3])))
                except ValueError as exc:
                    raise ConfigError(f"bad bounds in --free item {item!r}: {exc}") from None
        else:
            raise ConfigError(f"bad --free item {item!r}: use NAME, K:NAME or K:NAME:LO:HI")
    return free


_ALIASES = {"intensity": "intensity_Wcm2", "omega": "omega_eV", "phase": "phase_rad",
            "tau": "tau_fs", "delay": "tau_fs", "fwhm": "fwhm_fs"}


def _param_alias(name: str) -> str:
    n = _ALIASES.get(name, name)
    if n not in PARAM_NAMES:
        raise ConfigError(f"unknown parameter {name!r}")
    return n


def _stub_objective(free):
    centre = np.array([f.lower + 0.3 * f.width for f in free])
    width = np.array([f.width for f in free])

    def fn(spec):
        x = template_values(spec, free)
        return 1.0 - float(np.sum(((x - centre) / width) ** 2))
    return fn, centre


def cmd_optimize(args, cfg: RunConfig) -> int:
    if args.budget < 1:
        raise ConfigError("--budget must be >= 1")
    e, th, phi = _grids(args)
    if args.e_target is not None:
        e = np.array([args.e_target])
    orb, dip = _load_data(args, cfg)
    template = _load_field(args, cfg)
    free = _parse_free(args.free or [], template, args.intensity_cap)
    prob = OptProblem(template=template, free=free, e_grid_ev=tuple(e), theta_steps=args.theta_steps,
                      phi_slice=phi, budget=args.budget, seed=args.seed, restarts=args.restarts,
                      polish=args.polish, intensity_cap=args.intensity_cap, threads=args.threads)
    if args.objective == "stub":
        prob.objective_fn, centre = _stub_objective(free)
        cfg.summary["stub_maximizer"] = centre.tolist()
    best, trace = optimize(prob, orb, dip)
    names = [f"{f.pulse}:{f.name}" for f in free]
    trace.write_csv(cfg.path("trace.csv"), names)
    best.dump_json(cfg.path("best_field.json"))
    cfg.summary.update({"evaluations": len(trace), "best_objective": trace.best_value,
                        "best_params": dict(zip(names, trace.best_params)), "failures": trace.failures[:20]})
    print(f"best objective = {trace.best_value:.6g} after {len(trace)} evaluations")
    if args.objective != "stub":
        g = compute_pad(orb, dip, best, e, th, phi, threads=args.threads)
        _emit_pad(cfg, g, args, prefix="final_")
    return EXIT_OK


def cmd_pulse(args, cfg: RunConfig) -> int:
    spec = _load_field(args, cfg)
    if args.omega_steps < 2 or args.t_steps < 2:
        raise ConfigError("--omega-steps and --t-steps must be >= 2")
    wmax = max(p.omega for p in spec.pulses)
    w_lo = units.ev_to_au(args.omega_min) if args.omega_min is not None else 0.5 * min(p.omega for p in spec.pulses)
    w_hi = units.ev_to_au(args.omega_max) if args.omega_max is not None else 1.15 * wmax
    if not w_hi > w_lo:
        raise ConfigError("--omega-max must exceed --omega-min")
    om = np.linspace(w_lo, w_hi, args.omega_steps)
    sp = power_spectrum(spec, om)
    with open(cfg.path("spectrum.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega_eV", "intensity", "phase_rad"])
        for a, b, c in sp.rows():
            w.writerow([repr(units.au_to_ev(a)), repr(b), repr(c)])
    t0, t1 = spec.window(4.0)
    t = np.linspace(t0, t1, args.t_steps)
    circ = sorted({p.omega for p in spec.pulses if p.channel is not Channel.LIN_Z})
    hel = {}
    for wj in circ:
        hel[f"zeta_{units.au_to_ev(wj):.4f}eV"] = helicity(spec, wj, t)
    with open(cfg.path("helicity.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t_fs", *hel.keys()])
        for i, tv in enumerate(t):
            w.writerow([repr(units.au_to_fs(tv)), *["nan" if np.isnan(v[i]) else repr(float(v[i]))
                                                     for v in hel.values()]])
    S = None
    if not args.no_spectrogram:
        S = time_frequency_map(spec, t, om)
        with open(cfg.path("spectrogram.csv"), "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t_fs", "omega_eV", "power"])
            for i, tv in enumerate(t):
                for j, ov in enumerate(om):
                    w.writerow([repr(units.au_to_fs(tv)), repr(units.au_to_ev(ov)), repr(float(S[i, j]))])
    if args.svg:
        plotting.lineplot(cfg.path("spectrum.svg"), units.au_to_ev(om),
                          {"|E(omega)|^2 / max": sp.intensity / max(sp.intensity.max(), 1e-300)},
                          "power spectrum", "photon energy (eV)", "normalized intensity")
        if hel:
            plotting.lineplot(cfg.path("helicity.svg"), units.au_to_fs(t), hel, "helicity", "time (fs)", "zeta")
        if S is not None:
            plotting.heatmap(cfg.path("spectrogram.svg"), S.T, units.au_to_fs(t), units.au_to_ev(om),
                             "Gabor spectrogram", "time (fs)", "photon energy (eV)")
    k = int(np.argmax(sp.intensity))
    cfg.summary.update({"spectral_peak_eV": units.au_to_ev(float(om[k])), "circular_carriers_eV":
                        [units.au_to_ev(w) for w in circ]})
    print(f"spectral peak at {units.au_to_ev(float(om[k])):.6g} eV; {len(circ)} circular sub-band(s)")
    return EXIT_OK


def cmd_validate(args, cfg: RunConfig) -> int:
    from .validation import compare_instance, random_instance, Instance
    worst = {"1ph": 0.0, "2ph": 0.0, "int": 0.0}
    rows = []
    if args.dipoles is not None:
        orb, dip = _load_data(args, cfg)
        lm = min(dip.l_max, args.l_max)
        dip = dip.truncated(lm) if lm < dip.l_max else dip
    for k in range(args.instances):
        inst = random_instance(args.seed + k, l_max=args.l_max, n_virtual=args.n_virtual)
        if args.dipoles is not None:
            lo, hi = dip.k_grid[0], dip.k_grid[-1]
            e_k = float(np.clip(inst.e_k, lo, hi))
            inst = Instance(orb, dip, inst.spec, e_k)
        r = compare_instance(inst)
        rows.append({"instance": k, **{f"{p}_rel": r[p]["rel"] for p in worst},
                     **{f"{p}_scale": r[p]["scale"] for p in worst}})
        for p in worst:
            worst[p] = max(worst[p], r[p]["rel"])
    with open(cfg.path("validate.csv"), "w", newline="", encoding="utf-8") as fh:
        w = csv.DictWriter(fh, fieldnames=list(rows[0].keys()), lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    ok = all(v <= args.tol for v in worst.values())
    cfg.summary.update({"max_rel_dev": worst, "tol": args.tol, "passed": ok})
    for p, v in worst.items():
        print(f"{p}: max relative deviation {v:.3e}")
    print("PASS" if ok else "FAIL", f"(tol {args.tol:g}, {args.instances} instances)")
    return EXIT_OK if ok else EXIT_NUMERIC


def cmd_write_dipoles(args, cfg: RunConfig) -> int:
    if args.l_max < 1:
        raise ConfigError("--l-max must be >= 1")
    orb, dip = synth_hydrogenic(l_max=args.l_max, n_virtual=args.n_virtual, seed=args.seed,
                                m_symmetric=args.m_symmetric)
    target = args.path
    write_dipoles(target, orb, dip, comment="synthetic hydrogen-like dipoles (not ab initio data)")
    cfg.outputs.append(str(target))
    cfg.summary.update({"orbitals": list(orb.labels), "l_max": args.l_max})
    print(f"wrote {target}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="padctrl", description="Orientation-averaged PADs and anisotropy control.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    q = sub.add_parser("pad", help="energy/angle-resolved PAD and anisotropy maps")
    _common(q)
    _field_args(q)
    _grid_args(q)
    q.add_argument("--betas", action="store_true", help="also write betas.csv")
    q.set_defaults(func=cmd_pad)

    q = sub.add_parser("scan", help="bichromatic (omega, 2 omega) phase/energy scan")
    _common(q)
    q.add_argument("--omega-min", type=float, default=10.6, help="fundamental photon energy, eV")
    q.add_argument("--omega-max", type=float, default=11.2)
    q.add_argument("--omega-steps", type=int, default=13)
    q.add_argument("--phase-steps", type=int, default=25)
    q.add_argument("--phase-max", type=float, default=2 * math.pi)
    q.add_argument("--intensity", type=float, default=1e11, help="fundamental intensity, W/cm^2")
    q.add_argument("--ratio", type=float, default=2.0, help="I(2 omega) / I(omega)")
    q.add_argument("--fwhm", type=float, default=23.0)
    q.add_argument("--e-k", type=float, default=None, help="fixed photoelectron energy, eV")
    q.add_argument("--theta-deg", type=float, default=None, help="fixed evaluation angle")
    q.add_argument("--theta-steps", type=int, default=37)
    q.add_argument("--phi-slice", type=float, default=90.0)
    q.add_argument("--angle-convention", choices=["pol-axis", "prop-axis"], default="pol-axis")
    q.add_argument("--no-fundamental", action="store_true", help="drop the omega component")
    q.set_defaults(func=cmd_scan)

    q = sub.add_parser("optimize", help="maximize max |A| over free pulse parameters")
    _common(q)
    _field_args(q, default_preset="bichromatic")
    _grid_args(q)
    q.add_argument("--e-target", type=float, default=None, help="single target energy, eV")
    q.add_argument("--free", nargs="*", default=None,
                   help="free parameters: NAME (all pulses), K:NAME or K:NAME:LO:HI")
    q.add_argument("--budget", type=int, default=100)
    q.add_argument("--restarts", type=int, default=1)
    q.add_argument("--polish", action="store_true", help="Nelder-Mead polish after coordinate ascent")
    q.add_argument("--intensity-cap", type=float, default=1e12, help="total intensity cap, W/cm^2")
    q.add_argument("--objective", choices=["anisotropy", "stub"], default="anisotropy")
    q.set_defaults(func=cmd_optimize)

    q = sub.add_parser("pulse", help="spectrum, spectrogram and helicity of a field")
    q.add_argument("--out", type=Path, default=Path("out"))
    q.add_argument("--svg", action="store_true")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threads", type=int, default=1)
    _field_args(q)
    q.add_argument("--omega-min", type=float, default=None, help="eV")
    q.add_argument("--omega-max", type=float, default=None, help="eV")
    q.add_argument("--omega-steps", type=int, default=400)
    q.add_argument("--t-steps", type=int, default=200)
    q.add_argument("--no-spectrogram", action="store_true")
    q.set_defaults(func=cmd_pulse)

    q = sub.add_parser("validate", help="closed-form tables vs brute-force orientation average")
    q.add_argument("--dipoles", type=Path, default=None)
    q.add_argument("--out", type=Path, default=Path("out"))
    q.add_argument("--l-max", type=int, default=2)
    q.add_argument("--n-virtual", type=int, default=2)
    q.add_argument("--instances", type=int, default=5)
    q.add_argument("--tol", type=float, default=1e-6)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--threads", type=int, default=1)
    q.set_defaults(func=cmd_validate, svg=False)

    q = sub.add_parser("write-dipoles", help="write the synthetic dipole set to a file")
    q.add_argument("path", type=Path)
    q.add_argument("--out", type=Path, default=Path("out"))
    q.add_argument("--l-max", type=int, default=3)
    q.add_argument("--n-virtual", type=int, default=3)
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--m-symmetric", action="store_true")
    q.set_defaults(func=cmd_write_dipoles)
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig(args.command, Path(args.out),
                        {k: v for k, v in vars(args).items() if k != "func"})
        cfg.out.mkdir(parents=True, exist_ok=True)
        code = args.func(args, cfg)
        cfg.write_manifest(argv)
        return code
    except DataValidationError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConfigError, DomainError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, ArithmeticError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
