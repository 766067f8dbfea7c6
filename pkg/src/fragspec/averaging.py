"""Statistical averages: M_N degeneracy, nuclear-spin/Boltzmann rotation
weights, vibrational populations, and the laser focal-volume intensity
average.

The focal-volume average is the double spatial integral

    P_avg = int_{-L}^{L} dx int_{-inf}^{inf} dy  P(I(x,y)),
    I(x,y) = I0 exp(-x^2/r_x^2) exp(-y^2/r_y^2),

evaluated per output cell through the integration-by-parts form: changing
variables y -> I gives a weight 1/(I sqrt(-ln(I/I_x))) whose exact
antiderivative is -2 sqrt(-ln(I/I_x)), so

    int_0^infty P dy = r_y int_0^{I_x} sqrt(ln(I_x/I)) dP/dI dI

with a vanishing boundary term (P(I=0) = 0), and the identical procedure in x
leaves the boundary term L * F(I_L) at the beam edge.  P(I) per cell is a
monotone piecewise-cubic (PCHIP) interpolant anchored at (0, 0); dP/dI is its
analytic derivative, and every panel integral against the sqrt-log weights is
evaluated in closed form via lower incomplete gamma functions, so the only
approximations are the interpolant itself and the outer Gauss-Legendre
quadrature.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.special import gammainc, erf

from .constants import CONST
from .errors import ConfigError, ValidationError
from .spectra import DetectorImage

__all__ = [
    "PopulationModel", "FocusModel", "load_population_file",
    "focal_radii", "peak_intensity",
    "mn_average", "rotational_average", "vibrational_average",
    "intensity_average", "gaussian_overlap_factor",
]


@dataclass
class PopulationModel:
    """Relative vibrational populations a(v) and per-v rotational temperatures."""

    a_v: dict[int, float]
    t_rot: dict[int, float]
    n_max: int = 6

    def __post_init__(self):
        if not any(a > 0 for a in self.a_v.values()):
            raise ValidationError("PopulationModel: need at least one a_v > 0")
        if any(a < 0 for a in self.a_v.values()):
            raise ValidationError("PopulationModel: negative population")
        if any(t <= 0 for t in self.t_rot.values()):
            raise ValidationError("PopulationModel: rotational temperatures must be > 0")


def load_population_file(path) -> PopulationModel:
    """Text lines 'v a_v T_v' ('#' comments allowed)."""
    a_v, t_rot = {}, {}
    for lineno, line in enumerate(open(path, encoding="utf-8"), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        parts = body.split()
        if len(parts) != 3:
            raise ConfigError(f"{path}:{lineno}: expected 'v a_v T_v'")
        v = int(parts[0])
        a_v[v] = float(parts[1])
        t_rot[v] = float(parts[2])
    return PopulationModel(a_v=a_v, t_rot=t_rot)


@dataclass
class FocusModel:
    """Laser focus and ion-beam geometry (lab units)."""

    e0_mj: float
    t_ac_fs: float
    wavelength_nm: float
    f_mm: float
    b_x_mm: float
    b_y_mm: float
    half_width_um: float = 50.0       # ion beam half width L
    override_i0: float | None = None  # W/cm^2; used when the formula value was adjusted

    @property
    def r_x_um(self) -> float:
        return focal_radii(self)[0]

    @property
    def r_y_um(self) -> float:
        return focal_radii(self)[1]

    @property
    def i0_formula(self) -> float:
        return peak_intensity(self, formula_only=True)

    @property
    def i0(self) -> float:
        return peak_intensity(self)

    @property
    def i_edge(self) -> float:
        """Intensity at the beam edge (x = L, y = 0)."""
        return self.i0 * math.exp(-((self.half_width_um / self.r_x_um) ** 2))


def focal_radii(model: FocusModel) -> tuple[float, float]:
    """r = lambda f / (2 pi b), reported in micrometres."""
    lam_mm = model.wavelength_nm * 1e-6
    r_x = lam_mm * model.f_mm / (2.0 * math.pi * model.b_x_mm) * 1e3
    r_y = lam_mm * model.f_mm / (2.0 * math.pi * model.b_y_mm) * 1e3
    return r_x, r_y


def peak_intensity(model: FocusModel, formula_only: bool = False) -> float:
    """I0 = 2 sqrt(2 ln 2) E0 / (pi^{3/2} r_x r_y t_ac) in W/cm^2."""
    r_x, r_y = focal_radii(model)
    e0_j = model.e0_mj * 1e-3
    r_x_cm, r_y_cm = r_x * 1e-4, r_y * 1e-4
    t_s = model.t_ac_fs * 1e-15
    value = (2.0 * math.sqrt(2.0 * math.log(2.0)) * e0_j
             / (math.pi**1.5 * r_x_cm * r_y_cm * t_s))
    if model.override_i0 is not None and not formula_only:
        return model.override_i0
    return value


# -- weighted sums over quantum numbers ---------------------------------------


def _check_grids(images):
    first = None
    for img in images:
        if first is None:
            first = img
        elif not first.grids_match(img):
            raise ConfigError("detector images do not share grid descriptors")
    return first


def _combine(images, weights) -> DetectorImage:
    first = _check_grids(images)
    total = sum(weights)
    p = np.zeros_like(first.p)
    for img, wt in zip(images, weights):
        p += (wt / total) * img.p
    return DetectorImage(p=p, krho=first.krho.copy(), alpha=first.alpha.copy(),
                         beam_velocity=first.beam_velocity,
                         drift_length=first.drift_length)


def mn_average(images: Mapping[int, DetectorImage], n_rot: int) -> DetectorImage:
    """(1/(2N+1)) [P_0 + 2 sum_{M=1..N} P_M]; the Hamiltonian is even in M_N."""
    missing = [m for m in range(n_rot + 1) if m not in images]
    if missing:
        raise ConfigError(f"mn_average: missing images for M_N = {missing}")
    imgs = [images[m] for m in range(n_rot + 1)]
    weights = [1.0] + [2.0] * n_rot
    # weights sum to 2N+1 exactly, so _combine's normalization is the 1/(2N+1)
    return _combine(imgs, weights)


def rotational_weights(pops: PopulationModel, v: int,
                       shifts: Mapping[int, float]) -> dict[int, float]:
    """b_N g_N with b_N = exp(-dE(v,N)/(k_B T_v)), g_N = 1 (even) / 3 (odd)."""
    try:
        t_v = pops.t_rot[v]
    except KeyError:
        raise ConfigError(f"no rotational temperature for v={v}") from None
    out = {}
    for n in range(pops.n_max + 1):
        if n not in shifts:
            raise ValidationError(f"missing level energy difference for (v={v}, N={n})")
        b = math.exp(-shifts[n] / (CONST.k_boltzmann * t_v))
        g = 3.0 if n % 2 else 1.0
        out[n] = b * g
    return out


def rotational_average(images: Mapping[int, DetectorImage], v: int,
                       pops: PopulationModel,
                       shifts: Mapping[int, float] | Callable[[int, int], float]
                       ) -> DetectorImage:
    """P_v = sum_N b_N g_N P_{v,N} / sum_N b_N g_N."""
    if callable(shifts):
        shifts = {n: shifts(v, n) for n in range(pops.n_max + 1)}
    wts = rotational_weights(pops, v, shifts)
    missing = [n for n in range(pops.n_max + 1) if n not in images]
    if missing:
        raise ConfigError(f"rotational_average: missing images for N = {missing}")
    total = sum(wts.values())
    tail = wts[pops.n_max] / total
    if tail >= 1e-3:
        warnings.warn(
            f"rotational truncation tail b_N g_N / Q = {tail:.2e} at N={pops.n_max} "
            "exceeds 1e-3; raise n_max", stacklevel=2,
        )
    order = sorted(wts)
    return _combine([images[n] for n in order], [wts[n] for n in order])


def vibrational_average(images: Mapping[int, DetectorImage],
                        pops: PopulationModel) -> DetectorImage:
    """P = sum_v a(v) P_v / sum_v a(v)."""
    missing = [v for v in images if v not in pops.a_v]
    if missing:
        raise ConfigError(f"vibrational_average: no a_v for v = {missing}")
    order = sorted(images)
    return _combine([images[v] for v in order], [pops.a_v[v] for v in order])


# -- focal-volume intensity average -------------------------------------------

_GAMMA_32 = math.gamma(1.5)
_GAMMA_12 = math.gamma(0.5)


def _panel_coeffs_global(pchip: PchipInterpolator) -> tuple[np.ndarray, np.ndarray]:
    """Quadratic coefficients of dP/dI per panel in global powers of I.

    Returns (breaks, C) with C of shape (n_panels, 3, *cells): dP/dI =
    C[j,0] + C[j,1] I + C[j,2] I^2 on [breaks[j], breaks[j+1]].
    """
    d = pchip.derivative()
    breaks = d.x
    c = d.c                      # (3, n_panels, ...) in local (I - a) powers
    a = breaks[:-1]
    sh = (len(a),) + (1,) * (c.ndim - 2)
    a = a.reshape(sh)
    c2, c1, c0 = c[0], c[1], c[2]
    g0 = c0 - c1 * a + c2 * a * a
    g1 = c1 - 2.0 * c2 * a
    g2 = c2
    return breaks, np.stack([g0, g1, g2], axis=1)


def _sqrtlog_weights(breaks: np.ndarray, ix: float, power: float) -> np.ndarray:
    """W[j, m] = int over panel-j-clipped-to-[0, ix] of s(I)^power * I^m dI,
    s(I) = ln(ix / I), for m = 0..2 and power in {+1/2, -1/2}.

    Closed form via the lower incomplete gamma function: for s = ln(ix/I),
    int I^m s^p dI = ix^{m+1} (m+1)^{-(p+1)} gamma(p+1, (m+1) s) evaluated
    between the panel ends.
    """
    lo = np.minimum(breaks[:-1], ix)
    hi = np.minimum(breaks[1:], ix)
    log_ix = math.log(ix)
    s_lo = np.where(lo > 0.0, log_ix - np.log(np.maximum(lo, 1e-300)), np.inf)
    s_hi = np.where(hi > 0.0, log_ix - np.log(np.maximum(hi, 1e-300)), np.inf)
    a_p = power + 1.0
    gamma_a = _GAMMA_32 if power > 0 else _GAMMA_12
    w = np.zeros((len(lo), 3))
    for m in range(3):
        n1 = m + 1.0
        g_lo = gammainc(a_p, np.where(np.isinf(s_lo), np.inf, n1 * s_lo))
        g_hi = gammainc(a_p, n1 * np.where(np.isinf(s_hi), np.inf, s_hi))
        w[:, m] = ix**n1 / n1**a_p * gamma_a * (g_lo - g_hi)
    w[hi <= lo] = 0.0
    return w


class _CellInterpolants:
    """Per-cell PCHIP of P(I) anchored at (0,0), with exact sqrt-log integrals."""

    def __init__(self, intensities: np.ndarray, stack: np.ndarray):
        i_ext = np.concatenate([[0.0], intensities])
        p_ext = np.concatenate([np.zeros((1,) + stack.shape[1:]), stack], axis=0)
        self.pchip = PchipInterpolator(i_ext, p_ext, axis=0)
        self.breaks, self.coeffs = _panel_coeffs_global(self.pchip)

    def inner_sqrt_integral(self, ix: float) -> np.ndarray:
        """int_0^{ix} sqrt(ln(ix/I)) dP/dI dI per cell."""
        w = _sqrtlog_weights(self.breaks, ix, +0.5)
        return np.einsum("jm,jm...->...", w, self.coeffs)

    def inner_invsqrt_integral(self, ix: float) -> np.ndarray:
        """int_0^{ix} dP/dI / sqrt(ln(ix/I)) dI per cell."""
        w = _sqrtlog_weights(self.breaks, ix, -0.5)
        return np.einsum("jm,jm...->...", w, self.coeffs)


def intensity_average(curves: Mapping[float, DetectorImage],
                      model: FocusModel, n_outer: int = 24) -> DetectorImage:
    """Focal-volume average of per-intensity images (units: um^2 x image).

    Requires >= 4 intensity samples with I_max = I0 and I_min <= I_L; all
    images must share grid descriptors.  Prefactors are retained so a linear
    probe P = c I integrates to c I0 pi r_x r_y erf(L/r_x) exactly.
    """
    if len(curves) < 4:
        raise ValidationError("intensity_average: need at least 4 intensity samples")
    intensities = np.array(sorted(curves))
    if np.any(intensities <= 0):
        raise ValidationError("intensity samples must be positive")
    i0 = model.i0
    if not math.isclose(intensities[-1], i0, rel_tol=1e-9):
        raise ConfigError(
            f"largest intensity sample {intensities[-1]:g} != focus I0 {i0:g}"
        )
    r_x, r_y = focal_radii(model)
    big_l = model.half_width_um
    i_l = i0 * math.exp(-((big_l / r_x) ** 2))
    if intensities[0] > i_l * (1 + 1e-9):
        raise ConfigError(
            f"smallest intensity sample {intensities[0]:g} must lie at or below "
            f"the beam-edge intensity I_L = {i_l:g}"
        )
    imgs = [curves[i] for i in intensities]
    first = _check_grids(imgs)
    stack = np.stack([img.p for img in imgs], axis=0)

    cells = _CellInterpolants(intensities, stack)

    def f_inner(ix: float) -> np.ndarray:
        # int_0^inf P(I(x, y)) dy at the x where I_x = ix (boundary term vanishes)
        return r_y * cells.inner_sqrt_integral(ix)

    def f_inner_deriv(ix: float) -> np.ndarray:
        return (r_y / (2.0 * ix)) * cells.inner_invsqrt_integral(ix)

    # outer x-integral, transformed with w = sqrt(ln(I0/I_x)) in [0, L/r_x]:
    # int_0^L F(I_x) dx = L F(I_L) + r_x int sqrt(ln(I0/Ix)) F'(Ix) dIx
    #                   = L F(I_L) + 2 r_x I0 int_0^{L/r_x} w^2 e^{-w^2} F' dw
    w_edge = big_l / r_x
    knots = np.sqrt(np.log(i0 / np.clip(intensities[:-1], i_l, None)))
    splits = np.unique(np.concatenate([[0.0], knots[knots < w_edge], [w_edge]]))
    gl_x, gl_w = np.polynomial.legendre.leggauss(n_outer)
    outer = np.zeros_like(first.p)
    for a, b in zip(splits[:-1], splits[1:]):
        wn = 0.5 * (b - a) * gl_x + 0.5 * (a + b)
        wq = 0.5 * (b - a) * gl_w
        for wv, ww in zip(wn, wq):
            ix = i0 * math.exp(-wv * wv)
            outer += ww * (wv * wv * math.exp(-wv * wv)) * f_inner_deriv(ix)
    total = 4.0 * (big_l * f_inner(i_l) + 2.0 * r_x * i0 * outer)
    np.clip(total, 0.0, None, out=total)
    return DetectorImage(p=total, krho=first.krho.copy(), alpha=first.alpha.copy(),
                         beam_velocity=first.beam_velocity,
                         drift_length=first.drift_length)


def gaussian_overlap_factor(model: FocusModel) -> float:
    """int_{-L}^{L} e^{-x^2/r_x^2} dx * int e^{-y^2/r_y^2} dy = pi r_x r_y erf(L/r_x)."""
    r_x, r_y = focal_radii(model)
    return math.pi * r_x * r_y * erf(model.half_width_um / r_x)
