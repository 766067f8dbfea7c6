"""Run configuration: a single INI-style file with explicit unit suffixes.

Sections: [potential], [pulse], [beam], [focus], [grid], [populations],
[output].  Every physical quantity carries a unit suffix (e.g. `785 nm`,
`0.7 mJ`, `16 TWcm2`, `300 au`), parsed and converted here at the boundary;
counts and switches are bare.  Unknown keys are an error (listing them), as
are inconsistent grids.
"""

from __future__ import annotations

import configparser
import hashlib
import math
from dataclasses import dataclass, field
from pathlib import Path

from .constants import fs_to_au
from .errors import ConfigError

# unit suffix -> (family, factor to the internal convention of that family)
_UNITS = {
    "nm": ("wavelength_nm", 1.0),
    "fs": ("time_fs", 1.0),
    "au": ("atomic", 1.0),
    "bohr": ("atomic", 1.0),
    "mJ": ("energy_mj", 1.0),
    "mm": ("length_mm", 1.0),
    "um": ("length_um", 1.0),
    "K": ("kelvin", 1.0),
    "m/s": ("velocity_m_s", 1.0),
    "TWcm2": ("intensity_w_cm2", 1e12),
    "Wcm2": ("intensity_w_cm2", 1.0),
}


def parse_quantity(text: str, family: str, key: str) -> float:
    parts = text.split()
    if len(parts) != 2:
        raise ConfigError(
            f"{key}: physical quantities need an explicit unit suffix "
            f"(got '{text}')"
        )
    val, unit = parts
    if unit not in _UNITS:
        raise ConfigError(f"{key}: unknown unit '{unit}'")
    fam, factor = _UNITS[unit]
    if fam != family:
        raise ConfigError(
            f"{key}: expected a {family} quantity, got unit '{unit}'"
        )
    try:
        return float(val) * factor
    except ValueError:
        raise ConfigError(f"{key}: non-numeric value '{val}'") from None


_SCHEMA = {
    "potential": {"table"},
    "pulse": {"wavelength", "w_t", "t_ac", "dt", "dt_tail", "tail_time",
              "tail_k_ref", "pre_center_widths"},
    "beam": {"velocity", "half_width"},
    "focus": {"pulse_energy", "autocorrelation_time", "focal_length",
              "b_x", "b_y", "override_i0", "n_intensities"},
    "grid": {"n_r", "r_min", "r_max", "n_l", "r_split", "mask_width",
             "split_stride", "diag_stride", "asymptotic_phase"},
    "populations": {"file", "n_max"},
    "output": {"directory", "krho_max", "n_krho", "n_alpha", "window",
               "cuts", "channel_combine"},
}


@dataclass
class RunConfig:
    """Parsed, unit-converted configuration plus its content digest."""

    path: Path
    potential_table: Path | None          # None -> packaged table
    wavelength_nm: float
    w_t_fs: float
    dt: float
    dt_tail: float | None
    tail_time: float | None
    tail_k_ref: float
    pre_center_widths: float
    beam_velocity_m_s: float
    half_width_um: float
    pulse_energy_mj: float
    t_ac_fs: float
    focal_length_mm: float
    b_x_mm: float
    b_y_mm: float
    override_i0: float | None
    n_intensities: int
    n_r: int
    r_min: float
    r_max: float
    n_l: int
    r_split: float
    mask_width: float
    split_stride: int
    diag_stride: int
    asymptotic_phase: str
    population_file: Path
    n_max: int
    out_dir: Path
    krho_max: float
    n_krho: int
    n_alpha: int
    window: float
    cut_positions: tuple[float, ...]
    channel_combine: str
    digest: str = field(default="")


def load_config(path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    cp.read(path)

    unknown = []
    for section in cp.sections():
        if section not in _SCHEMA:
            unknown.append(f"[{section}]")
            continue
        for key in cp[section]:
            if key not in _SCHEMA[section]:
                unknown.append(f"[{section}] {key}")
    if unknown:
        raise ConfigError("unknown config keys: " + ", ".join(sorted(unknown)))

    def get(section, key, default=None):
        if cp.has_option(section, key):
            return cp.get(section, key)
        return default

    def qty(section, key, family, default=None):
        raw = get(section, key)
        if raw is None:
            if default is None:
                raise ConfigError(f"missing required key [{section}] {key}")
            return default
        return parse_quantity(raw, family, f"[{section}] {key}")

    table_raw = get("potential", "table", "builtin")
    table = None if table_raw == "builtin" else (path.parent / table_raw).resolve()
    if table is not None and not table.exists():
        raise ConfigError(f"[potential] table: file not found: {table}")

    if cp.has_option("pulse", "w_t"):
        w_t_fs = qty("pulse", "w_t", "time_fs")
    elif cp.has_option("pulse", "t_ac"):
        w_t_fs = qty("pulse", "t_ac", "time_fs") / (2.0 * math.sqrt(math.log(2.0)))
    else:
        raise ConfigError("missing [pulse] w_t (or t_ac)")

    pop_raw = get("populations", "file")
    if pop_raw is None:
        raise ConfigError("missing required key [populations] file")
    pop_file = (path.parent / pop_raw).resolve()
    if not pop_file.exists():
        raise ConfigError(f"[populations] file: not found: {pop_file}")

    cuts_raw = get("output", "cuts", "")
    cut_positions = tuple(
        parse_quantity(tok.strip(), "atomic", "[output] cuts")
        for tok in cuts_raw.split(",") if tok.strip()
    )

    phase = get("grid", "asymptotic_phase", "volkov")
    if phase not in ("volkov", "free", "defer"):
        raise ConfigError("[grid] asymptotic_phase must be volkov|free|defer")
    combine = get("output", "channel_combine", "incoherent")

    tail_time = None
    if cp.has_option("pulse", "tail_time"):
        tail_time = qty("pulse", "tail_time", "atomic")
    dt_tail = None
    if cp.has_option("pulse", "dt_tail"):
        dt_tail = qty("pulse", "dt_tail", "atomic")

    cfg = RunConfig(
        path=path,
        potential_table=table,
        wavelength_nm=qty("pulse", "wavelength", "wavelength_nm"),
        w_t_fs=w_t_fs,
        dt=qty("pulse", "dt", "atomic", 0.05),
        dt_tail=dt_tail,
        tail_time=tail_time,
        tail_k_ref=qty("pulse", "tail_k_ref", "atomic", 2.0),
        pre_center_widths=float(get("pulse", "pre_center_widths", "3.0")),
        beam_velocity_m_s=qty("beam", "velocity", "velocity_m_s", 1.0e6),
        half_width_um=qty("beam", "half_width", "length_um", 50.0),
        pulse_energy_mj=qty("focus", "pulse_energy", "energy_mj"),
        t_ac_fs=qty("focus", "autocorrelation_time", "time_fs"),
        focal_length_mm=qty("focus", "focal_length", "length_mm"),
        b_x_mm=qty("focus", "b_x", "length_mm"),
        b_y_mm=qty("focus", "b_y", "length_mm"),
        override_i0=(qty("focus", "override_i0", "intensity_w_cm2")
                     if cp.has_option("focus", "override_i0") else None),
        n_intensities=int(get("focus", "n_intensities", "12")),
        n_r=int(get("grid", "n_r", "4096")),
        r_min=qty("grid", "r_min", "atomic", 0.2),
        r_max=qty("grid", "r_max", "atomic", 400.0),
        n_l=int(get("grid", "n_l", "48")),
        r_split=qty("grid", "r_split", "atomic", 300.0),
        mask_width=qty("grid", "mask_width", "atomic", 20.0),
        split_stride=int(get("grid", "split_stride", "100")),
        diag_stride=int(get("grid", "diag_stride", "400")),
        asymptotic_phase=phase,
        population_file=pop_file,
        n_max=int(get("populations", "n_max", "2")),
        out_dir=(path.parent / get("output", "directory", "out")).resolve(),
        krho_max=qty("output", "krho_max", "atomic", 12.0),
        n_krho=int(get("output", "n_krho", "1201")),
        n_alpha=int(get("output", "n_alpha", "181")),
        window=qty("output", "window", "atomic", 0.07),
        cut_positions=cut_positions or (5.5, 6.5),
        channel_combine=combine,
    )

    h = hashlib.sha256()
    h.update(path.read_bytes())
    h.update(pop_file.read_bytes())
    if table is not None:
        h.update(table.read_bytes())
    cfg.digest = h.hexdigest()
    return cfg
