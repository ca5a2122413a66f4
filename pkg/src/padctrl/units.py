"""Unit conversions (CODATA 2018).  Atomic units are used internally."""

import math

HARTREE_EV = 27.211386245988
AU_TIME_S = 2.4188843265857e-17
FS_AU = 1e-15 / AU_TIME_S  # atomic time units per femtosecond

# atomic unit of field strength (V/m) and the intensity of a field with that
# peak amplitude, I = eps0 c E^2 / 2, in W/cm^2
AU_FIELD_VM = 5.14220674763e11
_EPS0 = 8.8541878128e-12
_C = 299792458.0
AU_INTENSITY_WCM2 = 0.5 * _EPS0 * _C * AU_FIELD_VM**2 * 1e-4

FWHM_PER_SIGMA = 2.0 * math.sqrt(2.0 * math.log(2.0))


def ev_to_au(e):
    return e / HARTREE_EV


def au_to_ev(e):
    return e * HARTREE_EV


def fs_to_au(t):
    return t * FS_AU


def au_to_fs(t):
    return t / FS_AU


def intensity_to_amplitude(i_wcm2):
    """Peak field (a.u.) for a peak intensity in W/cm^2: I = 3.50945e16 E0^2."""
    return math.sqrt(i_wcm2 / AU_INTENSITY_WCM2)


def amplitude_to_intensity(e0):
    return AU_INTENSITY_WCM2 * e0 * e0
