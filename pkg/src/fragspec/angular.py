"""Associated-Legendre spectral basis on Gauss-Legendre nodes.

For fixed azimuthal number m the basis functions are the orthonormal
associated Legendre functions N_l^m(x), l = m .. m+n_l-1, x = cos(theta),
with int_{-1}^{1} N_l^m N_l'^m dx = delta_{ll'}.  Gauss-Legendre quadrature
with n_theta >= l_max + 1 nodes integrates every retained product exactly, so
the discrete transform pair is exactly unitary on the retained subspace and
the combined polar+azimuthal kinetic operator is diagonal with eigenvalue
l(l+1)/(2 M R^2) per radial shell.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError


def normalized_plm(m: int, l_max: int, x: np.ndarray) -> np.ndarray:
    """Matrix N[l-m, j] of orthonormal associated Legendre N_l^m(x_j).

    Stable upward recurrence in l at fixed m (no Condon-Shortley phase).
    """
    x = np.asarray(x, dtype=float)
    n_l = l_max - m + 1
    out = np.empty((n_l, len(x)))
    # seed: N_m^m
    pmm = np.full_like(x, 1.0 / np.sqrt(2.0))
    if m > 0:
        s = np.sqrt(np.maximum(0.0, 1.0 - x * x))
        for k in range(1, m + 1):
            pmm = np.sqrt((2.0 * k + 1.0) / (2.0 * k)) * s * pmm
    out[0] = pmm
    if n_l > 1:
        a_prev = 0.0
        pm1, pm2 = pmm, np.zeros_like(x)
        for i, l in enumerate(range(m + 1, l_max + 1), start=1):
            a_l = np.sqrt((4.0 * l * l - 1.0) / (l * l - m * m))
            new = a_l * (x * pm1 - (pm2 / a_prev if a_prev else 0.0))
            out[i] = new
            pm2, pm1, a_prev = pm1, new, a_l
    return out


@dataclass
class AngularBasis:
    """Gauss-Legendre collocation + associated-Legendre transform for one m."""

    m_n: int
    n_l: int
    n_theta: int | None = None
    x: np.ndarray = field(init=False)
    w: np.ndarray = field(init=False)

    def __post_init__(self):
        self.m_n = abs(int(self.m_n))  # the Hamiltonian depends on |M_N| only
        if self.n_l < 1:
            raise ValidationError("AngularBasis: n_l must be >= 1")
        if self.n_theta is None:
            self.n_theta = self.m_n + self.n_l
        if self.n_theta < self.m_n + self.n_l:
            raise ValidationError(
                "AngularBasis: quadrature with n_theta < l_max+1 cannot integrate "
                "the retained products exactly"
            )
        self.x, self.w = np.polynomial.legendre.leggauss(self.n_theta)
        self.l_values = np.arange(self.m_n, self.m_n + self.n_l)
        # P[j, i] = N_{l_i}^{m}(x_j)
        self.P = np.ascontiguousarray(normalized_plm(self.m_n, self.l_values[-1], self.x).T)
        self.Pw = np.ascontiguousarray(self.P * self.w[:, None])
        gram = self.Pw.T @ self.P
        err = np.max(np.abs(gram - np.eye(self.n_l)))
        if err > 1e-12:
            raise ValidationError(
                f"AngularBasis: quadrature orthonormality defect {err:.2e} > 1e-12"
            )
        self.l_l1 = (self.l_values * (self.l_values + 1.0)).astype(float)

    # Transforms operate on the trailing axis (..., n_theta) <-> (..., n_l).

    def forward(self, f: np.ndarray) -> np.ndarray:
        """Grid values on the x nodes -> spectral coefficients c_l."""
        return f @ self.Pw

    def inverse(self, c: np.ndarray) -> np.ndarray:
        """Spectral coefficients -> grid values on the x nodes."""
        return c @ self.P.T

    def theta(self) -> np.ndarray:
        return np.arccos(self.x)
