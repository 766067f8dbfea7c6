"""Physical constants and unit conversions (atomic units internally).

Everything downstream works in hartree / bohr / atomic time units; the
conversions here are the single place where lab units (nm, fs, mJ, W/cm^2,
kelvin, m/s) enter or leave.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# CODATA-ish conversion factors.
AU_TIME_FS = 0.02418884326586         # 1 atomic time unit in fs
AU_VELOCITY_M_PER_S = 2.18769126364e6  # 1 atomic velocity unit in m/s
AU_LENGTH_NM = 0.0529177210903        # 1 bohr in nm
SPEED_OF_LIGHT_AU = 137.035999084
AU_INTENSITY_W_CM2 = 3.50944758e16    # intensity of a 1-a.u. field amplitude
BOLTZMANN_HARTREE_PER_K = 3.166811563e-6

PROTON_ELECTRON_MASS_RATIO = 1836.152701


@dataclass(frozen=True)
class Constants:
    """Mass bookkeeping for a homonuclear single-charge diatomic.

    `fragment_mass` is the single-nucleus mass m, `reduced_mass` the nuclear
    reduced mass M = m/2 (both in electron masses).  The asymptotic phases of
    the flux analysis are written with m; propagation uses M.  They agree
    because k^2/m == k^2/(2M).
    """

    mass_ratio: float = PROTON_ELECTRON_MASS_RATIO
    k_boltzmann: float = BOLTZMANN_HARTREE_PER_K

    @property
    def fragment_mass(self) -> float:
        return self.mass_ratio

    @property
    def reduced_mass(self) -> float:
        return self.mass_ratio / 2.0


CONST = Constants()


def fs_to_au(t_fs: float) -> float:
    return t_fs / AU_TIME_FS


def au_to_fs(t_au: float) -> float:
    return t_au * AU_TIME_FS


def wavelength_nm_to_omega(lambda_nm: float) -> float:
    """Carrier angular frequency (a.u.) of light with vacuum wavelength in nm.

    omega = 2 pi c / lambda; 785 nm -> 0.05804 hartree.
    """
    return 2.0 * math.pi * SPEED_OF_LIGHT_AU * AU_LENGTH_NM / lambda_nm


def intensity_to_field(i_w_cm2: float) -> float:
    """Peak field amplitude (a.u.) for a given intensity in W/cm^2."""
    return math.sqrt(i_w_cm2 / AU_INTENSITY_W_CM2)


def velocity_m_per_s_to_au(v: float) -> float:
    return v / AU_VELOCITY_M_PER_S
