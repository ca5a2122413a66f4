"""Spectrum, spectral phase, differential helicity and Gabor spectrogram of a
five-color field with mixed circular sub-pulses, after a short phase/delay
optimization of the anisotropy at 10 eV on synthetic dipoles.

    python scripts/fig5_spectrum_phase.py --out out/fig5
"""

from __future__ import annotations

import argparse
import csv
from pathlib import Path

import numpy as np

from padctrl import plotting, units
from padctrl.optimizer import FreeParam, OptProblem, optimize, preset
from padctrl.pulses import Channel, FieldSpec, helicity, power_spectrum, time_frequency_map
from padctrl.structure import chfclbr_preset

CHANNELS = ("CRP", "CLP", "CRP", "CLP", "CRP")


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("out/fig5"))
    ap.add_argument("--budget", type=int, default=60)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    args.out.mkdir(parents=True, exist_ok=True)

    orb, dip = chfclbr_preset(l_max=3, seed=args.seed)
    recs = preset("rempi5").to_records()
    for r, ch in zip(recs, CHANNELS):
        r["channel"] = ch
    template = FieldSpec.from_records(recs)
    free = [FreeParam(k, "phase_rad", 0.0, 2 * np.pi) for k in (1, 3)] + \
           [FreeParam(k, "tau_fs", -40.0, 40.0) for k in (1, 3)]
    prob = OptProblem(template, free, e_grid_ev=(10.0,), theta_steps=19, budget=args.budget, seed=args.seed)
    spec, trace = optimize(prob, orb, dip)
    spec.dump_json(args.out / "field.json")
    print(f"optimized |A| = {trace.best_value:.4e} after {len(trace)} evaluations")

    pulses = spec.pulses
    om = np.linspace(0.5 * min(p.omega for p in pulses), 1.15 * max(p.omega for p in pulses), 600)
    sp = power_spectrum(spec, om)
    ev = units.au_to_ev(om)
    with open(args.out / "spectrum.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["omega_eV", "intensity", "phase_rad"])
        w.writerows(zip(ev.tolist(), sp.intensity.tolist(), sp.phase.tolist()))
    plotting.lineplot(args.out / "spectrum.svg", ev, {"intensity / max": sp.intensity / sp.intensity.max()},
                      "power spectrum", "photon energy (eV)", "normalized intensity")
    plotting.lineplot(args.out / "phase.svg", ev, {"phase": sp.phase}, "spectral phase",
                      "photon energy (eV)", "rad")

    t0, t1 = spec.window(4.0)
    t = np.linspace(t0, t1, 240)
    carriers = sorted({p.omega for p in pulses if p.channel is not Channel.LIN_Z})
    hel = {f"{units.au_to_ev(w):.2f} eV": helicity(spec, w, t) for w in carriers}
    plotting.lineplot(args.out / "helicity.svg", units.au_to_fs(t), hel, "differential helicity",
                      "time (fs)", "zeta")
    S = time_frequency_map(spec, t[::3], om[::5])
    plotting.heatmap(args.out / "spectrogram.svg", S.T, units.au_to_fs(t[::3]), ev[::5],
                     "Gabor spectrogram", "time (fs)", "photon energy (eV)")
    for name, z in hel.items():
        print(f"helicity {name}: range [{np.nanmin(z):+.3f}, {np.nanmax(z):+.3f}]")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
