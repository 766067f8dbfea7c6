"""Laser pulse: Gaussian intensity envelope times an oscillatory carrier.

The intensity envelope is exp[-2 (t-t_c)^2 / w_t^2] (w_t in the same units as
t), so the field amplitude envelope is its square root.  The field is

    E(t) = eps0 * exp[-(t-t_c)^2 / w_t^2] * cos(omega * (t - t_c))

with eps0 fixed by the job's peak intensity.  All times are atomic units
internally; constructors take fs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import fs_to_au, intensity_to_field, wavelength_nm_to_omega
from .errors import ValidationError

ENVELOPE_OFF_FRACTION = 1e-4  # intensity envelope below this counts as "pulse over"


@dataclass(frozen=True)
class LaserPulse:
    """Pulse parameters in atomic units (use the constructors for lab units)."""

    wavelength_nm: float
    peak_intensity: float      # W/cm^2 for this job (not necessarily the focus I0)
    w_t: float                 # intensity-envelope width, atomic time units
    t_center: float
    t_start: float
    t_end: float
    constant_field: float | None = None  # test fixture: static field, no envelope

    def __post_init__(self):
        if self.constant_field is None:
            for t in (self.t_start, self.t_end):
                if self.intensity_envelope(t) >= ENVELOPE_OFF_FRACTION:
                    raise ValidationError(
                        "LaserPulse: intensity envelope exceeds 1e-4 of peak at the "
                        f"window edge t={t:g}"
                    )

    # -- constructors --------------------------------------------------------

    @classmethod
    def gaussian(cls, wavelength_nm, peak_intensity, w_t_fs,
                 pre_center_widths=3.0, tail_au=0.0):
        """Window [0, pre_center_widths*w_t*2 + tail]: peak sits at
        pre_center_widths * w_t after t_start, symmetric fall-off, plus an
        optional field-free tail."""
        w_t = fs_to_au(w_t_fs)
        t_center = pre_center_widths * w_t
        return cls(
            wavelength_nm=wavelength_nm,
            peak_intensity=peak_intensity,
            w_t=w_t,
            t_center=t_center,
            t_start=0.0,
            t_end=2.0 * t_center + tail_au,
        )

    @classmethod
    def from_autocorrelation(cls, wavelength_nm, peak_intensity, t_ac_fs, **kw):
        """w_t = t_ac / (2 sqrt(ln 2))."""
        return cls.gaussian(
            wavelength_nm, peak_intensity, t_ac_fs / (2.0 * math.sqrt(math.log(2.0))), **kw
        )

    @classmethod
    def constant(cls, field_amplitude, t_end, omega=0.0):
        """Static (or bare-carrier) field test fixture; bypasses the envelope."""
        wavelength = 2.0 * math.pi * 0.0529177210903 / omega if omega > 0 else math.inf
        obj = cls(
            wavelength_nm=wavelength,
            peak_intensity=0.0,
            w_t=math.inf,
            t_center=0.0,
            t_start=0.0,
            t_end=t_end,
            constant_field=field_amplitude,
        )
        object.__setattr__(obj, "_omega_override", omega)
        return obj

    # -- evaluation ----------------------------------------------------------

    @property
    def omega(self) -> float:
        if self.constant_field is not None:
            return getattr(self, "_omega_override", 0.0)
        return wavelength_nm_to_omega(self.wavelength_nm)

    @property
    def eps0(self) -> float:
        if self.constant_field is not None:
            return self.constant_field
        return intensity_to_field(self.peak_intensity)

    def intensity_envelope(self, t):
        """Relative intensity envelope in [0, 1]."""
        if self.constant_field is not None:
            return np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else 1.0
        u = (np.asarray(t, dtype=float) - self.t_center) / self.w_t
        return np.exp(-2.0 * u * u)

    def field_envelope(self, t):
        if self.constant_field is not None:
            out = np.full_like(np.asarray(t, dtype=float), self.constant_field)
            return out if np.ndim(t) else float(out)
        u = (np.asarray(t, dtype=float) - self.t_center) / self.w_t
        return self.eps0 * np.exp(-u * u)

    def field(self, t):
        """Full oscillatory field E(t) (no rotating-wave approximation)."""
        if self.constant_field is not None:
            om = self.omega
            carrier = np.cos(om * np.asarray(t, dtype=float)) if om else 1.0
            return self.constant_field * carrier
        tt = np.asarray(t, dtype=float)
        return self.field_envelope(tt) * np.cos(self.omega * (tt - self.t_center))

    def is_off(self, t) -> bool:
        """True once the intensity envelope is below 1e-4 of peak (past center)."""
        if self.constant_field is not None:
            return False
        return t > self.t_center and self.intensity_envelope(t) < ENVELOPE_OFF_FRACTION
