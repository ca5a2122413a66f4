from __future__ import annotations

import math

import numpy as np
import pytest

from padctrl import units
from padctrl.pulses import FieldSpec, SubPulse
from padctrl.structure import chfclbr_preset, synth_hydrogenic


_REPORTS: list[str] = []


def report(name: str, ok: bool, detail: str = "") -> None:
    """One summary line per acceptance check; repeated in the terminal summary."""
    line = f"[{'PASS' if ok else 'FAIL'}] {name}" + (f": {detail}" if detail else "")
    _REPORTS.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _REPORTS:
        terminalreporter.section("acceptance criteria")
        for line in _REPORTS:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def small():
    """l_max = 2 hydrogen-like data with two virtual orbitals and one core level."""
    return synth_hydrogenic(l_max=2, k_grid=np.linspace(2.0, 20.0, 19), n_virtual=2, seed=7, n_core=1)


@pytest.fixture(scope="session")
def preset_data():
    return chfclbr_preset(l_max=3, seed=0)


def resonant_spec(orb, e_k, channels=("LIN_Z", "LIN_Z", "LIN_Z"), E0=0.01, sigma=150.0, p=None):
    """Three colors: i0 -> p, p -> e_k and the direct i0 -> e_k line."""
    eps = orb.energies
    i0 = orb.i0_index
    p = orb.virtual[0] if p is None else p
    carriers = [eps[p] - eps[i0], e_k - eps[p], e_k - eps[i0]]
    return FieldSpec(tuple(SubPulse(E0=E0, omega=w, phi=0.3 * k, tau=10.0 * k, sigma=sigma, channel=c)
                           for k, (w, c) in enumerate(zip(carriers, channels))))


def ev(x: float) -> float:
    return units.ev_to_au(x)


TWO_PI = 2.0 * math.pi
