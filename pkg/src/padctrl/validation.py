"""Randomized cross-checks of the closed-form tables against the brute-force oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import units
from .betas import L_CAP, beta_tables, make_integrator
from .oracle import EulerQuadrature, brute_force_betas, time_integrals
from .pulses import FieldSpec, SubPulse
from .structure import DipoleSet, OrbitalSet, synth_hydrogenic

__all__ = ["Instance", "random_instance", "compare_instance"]

CHANNELS = ("LIN_Z", "CRP", "CLP")


@dataclass(frozen=True, eq=False)
class Instance:
    orb: OrbitalSet
    dip: DipoleSet
    spec: FieldSpec
    e_k: float  # a.u.


def random_instance(seed: int, l_max: int = 2, n_virtual: int = 2, n_core: int = 1) -> Instance:
    """Small random problem whose carriers hit a two-photon resonance and the
    one-photon line at the same final energy, so that all three parts are sizable."""
    rng = np.random.default_rng(seed)
    orb, dip = synth_hydrogenic(l_max=l_max, k_grid=np.linspace(2.0, 20.0, 19), n_virtual=n_virtual,
                                seed=int(rng.integers(2**31)), n_core=n_core,
                                m_symmetric=bool(rng.random() < 0.2))
    eps = orb.energies
    i0 = orb.i0_index
    e_k = units.ev_to_au(rng.uniform(4.0, 16.0))
    p = orb.virtual[int(rng.integers(len(orb.virtual)))]
    carriers = [eps[p] - eps[i0], e_k - eps[p], e_k - eps[i0]]
    pulses = []
    for w in carriers:
        det = rng.normal(scale=0.003)
        sigma = rng.uniform(80.0, 250.0)
        pulses.append(SubPulse(E0=rng.uniform(0.002, 0.02), omega=abs(w + det), phi=rng.uniform(0, 2 * math.pi),
                               tau=rng.normal(scale=60.0), sigma=sigma,
                               channel=CHANNELS[int(rng.integers(3))]))
    return Instance(orb, dip, FieldSpec(tuple(pulses)), float(e_k))


def compare_instance(inst: Instance, quad: EulerQuadrature | None = None) -> dict:
    """Max deviation between the two pipelines per part, scaled by the oracle's max |beta|."""
    integ = make_integrator(inst.orb, inst.spec, inst.e_k)
    b = dict(zip(("1ph", "2ph", "int"), beta_tables(inst.orb, inst.dip, inst.spec, inst.e_k, integ)))
    ti = time_integrals(inst.orb, inst.dip, inst.spec, inst.e_k, integ)
    ref = brute_force_betas(inst.orb, inst.dip, inst.spec, inst.e_k, quad=quad, ti=ti)
    out = {}
    for key, tab in b.items():
        r = ref[key]
        Lr = r.shape[0] - 1
        mine = np.zeros_like(r)
        for L in range(min(Lr, L_CAP) + 1):
            mine[L, Lr - L: Lr + L + 1] = tab.data[L, L_CAP - L: L_CAP + L + 1]
        scale = float(np.max(np.abs(r)))
        dev = float(np.max(np.abs(mine - r)))
        out[key] = {"rel": dev / scale if scale > 0 else dev, "scale": scale,
                    "beyond_cap": float(np.max(np.abs(r[L_CAP + 1:]), initial=0.0))}
    return out
