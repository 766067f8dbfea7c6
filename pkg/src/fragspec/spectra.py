"""From accumulated momentum amplitudes to detector-plane spectra.

The detector-plane probability is the line-of-sight projection

    P(k_rho, alpha) = 1/2 int_{k_rho}^inf  P(k, theta) / (k sqrt(k^2-k_rho^2)) dk,
    cos(theta) = (k_rho / k) cos(alpha),

evaluated here in its regularized (integrated-by-parts) form

    P = -1/(2 k_rho) int arccos(k_rho/k) [dP/dk
          + k_rho cos(alpha) / (k sqrt(k^2 - k_rho^2 cos^2 alpha)) dP/dtheta] dk.

The substitution u = arccos(k_rho/k) removes the sqrt-type endpoint behaviour
for every alpha (at alpha = 0 the integrand tends to the compensated limit
(1/k_rho) dP/dtheta), after which composite Simpson quadrature converges
cleanly.  `direct_abel` integrates the singular kernel directly with the
u = sqrt(k^2 - k_rho^2) endpoint substitution and serves as the in-repo
cross-check.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .constants import CONST, velocity_m_per_s_to_au
from .errors import DomainError, ValidationError
from .propagator import MomentumAmplitude

__all__ = [
    "MolecularSpectrum", "DetectorImage", "DetectorGridSpec", "Cut",
    "momentum_spectrum", "abel_project", "direct_abel", "convolve_detector",
    "normalize", "cut", "molecular_mass", "detector_mass",
    "small_velocity_check",
]


@dataclass
class MolecularSpectrum:
    """P(k, theta) >= 0 on the (k, cos theta quadrature) grid."""

    p: np.ndarray          # (n_k, n_theta)
    k: np.ndarray          # increasing, > 0
    x: np.ndarray          # cos(theta) nodes, increasing
    w: np.ndarray          # quadrature weights

    def __post_init__(self):
        if np.any(self.p < 0):
            raise ValidationError("MolecularSpectrum: negative values")
        peak = float(self.p.max(initial=0.0))
        if peak > 0 and float(self.p[-1].max()) > 1e-6 * peak:
            warnings.warn(
                "momentum grid too small: spectrum tail above 1e-6 of peak at k_max",
                stacklevel=2,
            )


@dataclass
class DetectorGridSpec:
    """Output grid for the detector plane (defaults resolve the 0.07 a.u. gate)."""

    krho_max: float = 12.0
    n_krho: int = 1201
    n_alpha: int = 181
    beam_velocity: float = 1.0e6   # m/s, metadata
    drift_length: float = 1.0     # m, metadata


@dataclass
class DetectorImage:
    """P(k_rho, alpha) on uniform grids, alpha in [0, pi/2]."""

    p: np.ndarray          # (n_krho, n_alpha)
    krho: np.ndarray
    alpha: np.ndarray
    beam_velocity: float = 1.0e6
    drift_length: float = 1.0

    def grids_match(self, other: "DetectorImage") -> bool:
        return (
            self.p.shape == other.p.shape
            and np.array_equal(self.krho, other.krho)
            and np.array_equal(self.alpha, other.alpha)
        )


@dataclass
class Cut:
    kind: str              # "alpha0" | "fixed_krho"
    coordinate: np.ndarray
    values: np.ndarray
    requested: float | None = None
    snapped: float | None = None


def momentum_spectrum(acc: MomentumAmplitude, combine: str = "incoherent"
                      ) -> MolecularSpectrum:
    """|Phi_hat|^2 with the two electronic channels summed incoherently.

    The g/u superposition dephases over the macroscopic flight to the
    detector, so probabilities add; `combine` exposes the single-sided
    coherent alternatives for sensitivity studies.
    """
    g, u = acc.phi_hat[0], acc.phi_hat[1]
    if combine == "incoherent":
        p = np.abs(g) ** 2 + np.abs(u) ** 2
    elif combine == "coherent_plus":
        p = np.abs(g + u) ** 2
    elif combine == "coherent_minus":
        p = np.abs(g - u) ** 2
    else:
        raise ValidationError(f"unknown channel combination '{combine}'")
    return MolecularSpectrum(p=p, k=acc.k.copy(), x=acc.x, w=acc.w)


# -- Abel projection ----------------------------------------------------------


def _fornberg_first_derivative(nodes: np.ndarray, half_width: int = 2) -> np.ndarray:
    """Dense first-derivative matrix from centered stencils of 2*hw+1 nodes
    (one-sided near the ends), exact for polynomials of the stencil degree."""
    n = len(nodes)
    d = np.zeros((n, n))
    for i in range(n):
        lo = max(0, min(i - half_width, n - (2 * half_width + 1)))
        hi = min(n, lo + 2 * half_width + 1)
        xs = nodes[lo:hi] - nodes[i]
        m = len(xs)
        v = np.vander(xs, m, increasing=True).T   # v[p, j] = xs_j^p
        rhs = np.zeros(m)
        rhs[1] = 1.0                              # coefficient of the p=1 term
        d[i, lo:hi] = np.linalg.solve(v, rhs)
    return d


def _centered_dk(p: np.ndarray, k: np.ndarray) -> np.ndarray:
    """Centered differences along k; fourth-order stencil on uniform grids."""
    dk = np.diff(k)
    if not np.allclose(dk, dk[0], rtol=1e-10, atol=0.0):
        return _fornberg_first_derivative(k) @ p
    h = float(dk[0])
    out = np.gradient(p, h, axis=0, edge_order=2)
    if len(k) >= 5:
        out[2:-2] = (p[:-4] - 8.0 * p[1:-3] + 8.0 * p[3:-1] - p[4:]) / (12.0 * h)
    return out


class _SpecInterp:
    """Bicubic interpolants of P and its centred-difference partials."""

    def __init__(self, spec: MolecularSpectrum):
        k, x, p = spec.k, spec.x, spec.p
        theta = np.arccos(np.clip(x, -1.0, 1.0))
        dp_dk = _centered_dk(p, k)
        dp_dth = p @ _fornberg_first_derivative(theta).T
        kx, ky = min(3, len(k) - 1), min(3, len(x) - 1)
        self.p = RectBivariateSpline(k, x, p, kx=kx, ky=ky)
        self.pk = RectBivariateSpline(k, x, dp_dk, kx=kx, ky=ky)
        self.pth = RectBivariateSpline(k, x, dp_dth, kx=kx, ky=ky)
        self.k_max = float(k[-1])
        self.k_min = float(k[0])


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


_GL64 = np.polynomial.legendre.leggauss(64)


def _nonuniform_simpson_weights(x: np.ndarray) -> np.ndarray:
    """Composite Simpson weights for arbitrary increasing nodes (trapezoid on
    a trailing odd panel)."""
    n = len(x)
    w = np.zeros(n)
    i = 0
    while i + 2 < n:
        h0 = x[i + 1] - x[i]
        h1 = x[i + 2] - x[i + 1]
        s = h0 + h1
        w[i] += s * (2.0 * h0 - h1) / (6.0 * h0)
        w[i + 1] += s**3 / (6.0 * h0 * h1)
        w[i + 2] += s * (2.0 * h1 - h0) / (6.0 * h1)
        i += 2
    if i + 1 < n:
        w[i] += 0.5 * (x[i + 1] - x[i])
        w[i + 1] += 0.5 * (x[i + 1] - x[i])
    return w


def _data_node_quadrature(spec_k: np.ndarray, kr: float, k_max: float):
    """Quadrature for int_{kr}^{k_max} ... du on u = sqrt(k^2 - kr^2):
    64-point Gauss-Legendre over the first eight data panels (resolves the
    series-expanded kernel near k = k_rho), then composite Simpson on the
    spectrum's own nodes.  Returns (u, w, k(u), n_fine)."""
    j0 = int(np.searchsorted(spec_k, kr, side="right"))
    ja = min(j0 + 8, len(spec_k) - 1)
    u_a = np.sqrt(max(spec_k[ja] ** 2 - kr**2, 0.0))
    ug, wg = _GL64
    u_fine = 0.5 * u_a * (ug + 1.0)
    w_fine = 0.5 * u_a * wg
    kj = spec_k[ja:]
    uj = np.sqrt(np.maximum(kj**2 - kr**2, 0.0))
    w_data = _nonuniform_simpson_weights(uj) if len(uj) > 1 else np.zeros(1)
    u = np.concatenate([u_fine, uj])
    w = np.concatenate([w_fine, w_data])
    kq = np.sqrt(u**2 + kr**2)
    kq[len(u_fine):] = kj  # exact node values, no round-trip error
    return u, w, kq, len(u_fine)


def _alpha0_check(k_q, krho, cos_a, x_q):
    # geometry identity cos(theta) = (k_rho/k) cos(alpha), reconstructed
    recon = (krho / k_q) * cos_a
    if np.max(np.abs(recon - x_q)) > 1e-12:
        raise AssertionError("theta<->alpha mapping violated at evaluation points")


def _project(spec: MolecularSpectrum, out: DetectorGridSpec,
             regularized: bool) -> DetectorImage:
    if out.krho_max > spec.k[-1]:
        raise DomainError(
            f"requested k_rho up to {out.krho_max} exceeds spectrum support "
            f"{spec.k[-1]:g}"
        )
    interp = _SpecInterp(spec)
    krho = np.linspace(0.0, out.krho_max, out.n_krho)
    alpha = np.linspace(0.0, np.pi / 2.0, out.n_alpha)
    cos_a = np.cos(alpha)
    img = np.zeros((out.n_krho, out.n_alpha))

    for i, kr in enumerate(krho):
        if kr <= 0.0:
            # k_rho = 0: both forms reduce to 1/2 int P(k, pi/2)/k^2 dk.
            # The operand P/k^2 has a finite k->0 limit for any physical
            # spectrum; close the [0, k_min] gap by linear extrapolation.
            kq = spec.k
            vals = interp.p.ev(kq, np.zeros_like(kq)) / kq**2
            f0 = vals[0] + (vals[0] - vals[1]) * kq[0] / (kq[1] - kq[0])
            img[i, :] = 0.5 * np.trapezoid(
                np.concatenate([[f0], vals]), np.concatenate([[0.0], kq])
            )
            continue

        if regularized:
            # Composite quadrature on the spectrum's own k nodes (trapezoid in
            # u = sqrt(k^2-k_rho^2), so the arccos kernel is smooth and the
            # centred-difference spike of a jump integrates to its mass), with
            # the first sub-interval [k_rho, k_{j0+8}] handled by Gauss-
            # Legendre in u: there the kernel's series-expanded non-singular
            # form (the alpha=0 compensation) is resolved exactly.
            u, wq, kq, _ = _data_node_quadrature(spec.k, kr, interp.k_max)
            dk_du = np.divide(u, kq, out=np.zeros_like(u), where=kq > 0)
            arc = np.arccos(np.clip(kr / kq, -1.0, 1.0))
            xq = np.outer(cos_a, kr / kq)                 # (n_alpha, n_u)
            kq2 = np.broadcast_to(kq, xq.shape)
            if i == len(krho) // 2:
                _alpha0_check(kq2, kr, cos_a[:, None], xq)
            pk = interp.pk.ev(kq2.ravel(), xq.ravel()).reshape(xq.shape)
            pth = interp.pth.ev(kq2.ravel(), xq.ravel()).reshape(xq.shape)
            # sqrt(k^2 - k_rho^2 cos^2 a) = sqrt(u^2 + k_rho^2 sin^2 a): stable,
            # and the alpha=0 endpoint reduces to the compensated (1/k_rho) dP/dth
            sin_a = np.sin(alpha)
            denom = np.sqrt(u[None, :] ** 2 + (kr * sin_a[:, None]) ** 2)
            with np.errstate(invalid="ignore", divide="ignore"):
                coef_th = np.where(
                    denom > 0.0, arc[None, :] * kr * cos_a[:, None] * u[None, :]
                    / (kq2**2 * denom), 0.0,
                )
            integrand = (arc * dk_du) * pk + coef_th * pth
            img[i, :] = -(integrand @ wq) / (2.0 * kr)
        else:
            u, wq, kq, _ = _data_node_quadrature(spec.k, kr, interp.k_max)
            xq = np.outer(cos_a, kr / kq)
            kq2 = np.broadcast_to(kq, xq.shape)
            vals = interp.p.ev(kq2.ravel(), xq.ravel()).reshape(xq.shape)
            img[i, :] = 0.5 * (vals / kq2**2) @ wq

    np.clip(img, 0.0, None, out=img)
    return DetectorImage(
        p=img, krho=krho, alpha=alpha,
        beam_velocity=out.beam_velocity, drift_length=out.drift_length,
    )


def abel_project(spec: MolecularSpectrum, out: DetectorGridSpec) -> DetectorImage:
    """Regularized projection (integration-by-parts kernel)."""
    return _project(spec, out, regularized=True)


def direct_abel(spec: MolecularSpectrum, out: DetectorGridSpec) -> DetectorImage:
    """Singular-kernel projection with the sqrt endpoint substitution."""
    return _project(spec, out, regularized=False)


# -- detector-plane operations ------------------------------------------------


def convolve_detector(img: DetectorImage, window_width: float) -> DetectorImage:
    """Square-gate moving average over k_rho at fixed alpha.

    Edges are handled by truncating the window and renormalizing the weights.
    """
    if window_width <= 0:
        raise ValidationError("window width must be positive")
    dk = img.krho[1] - img.krho[0]
    half = int(round(window_width / dk)) // 2
    if 2 * half + 1 <= 1:
        warnings.warn("detector window narrower than one k_rho bin: no-op",
                      stacklevel=2)
        return replace(img, p=img.p.copy())
    kernel = np.ones(2 * half + 1)
    num = np.apply_along_axis(np.convolve, 0, img.p, kernel, "same")
    den = np.convolve(np.ones(img.p.shape[0]), kernel, "same")
    return replace(img, p=num / den[:, None])


def detector_mass(img: DetectorImage) -> float:
    inner = np.trapezoid(img.p * img.krho[:, None], img.krho, axis=0)
    return float(np.trapezoid(inner, img.alpha))


def molecular_mass(spec: MolecularSpectrum) -> float:
    return float(np.trapezoid(spec.p @ spec.w, spec.k))


def normalize(img: DetectorImage) -> DetectorImage:
    """Scale so that int k_rho dk_rho int dalpha P = 1 (trapezoid rule)."""
    mass = detector_mass(img)
    if mass <= 0:
        raise DomainError("cannot normalize an image with zero mass")
    return replace(img, p=img.p / mass)


def cut(img: DetectorImage, axis: str, value: float = 0.0) -> Cut:
    if axis == "alpha0":
        return Cut(kind="alpha0", coordinate=img.krho.copy(),
                   values=img.p[:, 0].copy())
    if axis == "fixed_krho":
        if not (img.krho[0] <= value <= img.krho[-1]):
            raise DomainError(f"k_rho={value} outside the image grid")
        idx = int(np.argmin(np.abs(img.krho - value)))
        return Cut(kind="fixed_krho", coordinate=img.alpha.copy(),
                   values=img.p[idx, :].copy(), requested=value,
                   snapped=float(img.krho[idx]))
    raise DomainError(f"unknown cut axis '{axis}'")


def small_velocity_check(beam_velocity_m_s: float, k_max: float,
                         fragment_mass: float | None = None) -> float:
    """Worst-case neglected correction sqrt(k^2-k_rho^2)/(m v); warns > 1e-2."""
    m = fragment_mass or CONST.fragment_mass
    v = velocity_m_per_s_to_au(beam_velocity_m_s)
    ratio = k_max / (m * v)
    if ratio >= 1e-2:
        warnings.warn(
            f"time-of-flight approximation t ~ D/v marginal: correction "
            f"{ratio:.3g} >= 1e-2 at k={k_max:g}",
            stacklevel=2,
        )
    return ratio
