"""Radial rovibrational eigenstates by Numerov shooting.

Solves  [-1/(2M) d^2/dR^2 + V1(R) + N(N+1)/(2M R^2)] chi = E chi  with
node-count bracketing and Brent refinement of the Numerov matching residual
at the outer classical turning point.

The caller's RadialGrid fixes the domain and the output sampling only; the
sweep itself runs on an internally refined copy (step <= 0.005 bohr) because
a fourth-order scheme on a propagation-sized step cannot deliver the 1e-10
eigenvalue tolerance this module promises.  chi is returned on the caller's
grid with sum |chi|^2 dR = 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit

from .constants import CONST
from .errors import ConvergenceError, NotBoundError
from .grids import RadialGrid
from .potentials import PotentialSet

__all__ = ["BoundState", "solve_bound_state", "rotational_shift",
           "count_bound_levels", "level_table", "default_solver_grid"]

_REFINE_TARGET = 0.005     # bohr
_E_TOP = -1e-9             # "just below threshold" probe energy
_MAX_ITER = 200


@dataclass
class BoundState:
    v: int
    n_rot: int
    energy: float          # hartree, asymptote-zero convention
    chi: np.ndarray        # real, on the caller grid, sum |chi|^2 dR = 1
    grid: RadialGrid

    @property
    def norm(self) -> float:
        return float(np.sum(self.chi**2) * self.grid.dr)


@njit(cache=True)
def _sweep_count(g):
    """Outward Numerov sweep with rescaling; returns the node count."""
    n = g.shape[0]
    y0, y1 = 0.0, 1e-12
    nodes = 0
    for i in range(1, n - 1):
        y2 = ((2.0 + 10.0 * g[i]) * y1 - (1.0 - g[i - 1]) * y0) / (1.0 - g[i + 1])
        if (y2 < 0.0 and y1 > 0.0) or (y2 > 0.0 and y1 < 0.0):
            nodes += 1
        a = abs(y2)
        if a > 1e250:
            y1 /= a
            y2 /= a
        y0, y1 = y1, y2
    return nodes


@njit(cache=True)
def _sweep_match(g, m):
    """Numerov residual at match index m for solutions glued with y(m)=1."""
    # outward: ends with y1 = y(m), y0 = y(m-1)
    y0, y1 = 0.0, 1e-12
    for i in range(1, m):
        y2 = ((2.0 + 10.0 * g[i]) * y1 - (1.0 - g[i - 1]) * y0) / (1.0 - g[i + 1])
        a = abs(y2)
        if a > 1e250:
            y1 /= a
            y2 /= a
        y0, y1 = y1, y2
    out_m, out_m1 = y1, y0
    # inward: ends with z1 = y(m), z0 = y(m+1)
    n = g.shape[0]
    z0, z1 = 0.0, 1e-12
    for i in range(n - 2, m, -1):
        z2 = ((2.0 + 10.0 * g[i]) * z1 - (1.0 - g[i + 1]) * z0) / (1.0 - g[i - 1])
        a = abs(z2)
        if a > 1e250:
            z1 /= a
            z2 /= a
        z0, z1 = z1, z2
    in_m, in_m1 = z1, z0
    if out_m == 0.0 or in_m == 0.0:
        return np.inf
    # residual of the three-term recurrence across the glue point
    return ((1.0 - g[m - 1]) * out_m1 / out_m
            + (1.0 - g[m + 1]) * in_m1 / in_m
            - (2.0 + 10.0 * g[m]))


@njit(cache=True)
def _sweep_assemble(g, m):
    """Glued, unnormalized eigenfunction over the whole sweep grid."""
    n = g.shape[0]
    y = np.zeros(n)
    y[0], y[1] = 0.0, 1e-12
    for i in range(1, m + 1):
        y[i + 1] = ((2.0 + 10.0 * g[i]) * y[i] - (1.0 - g[i - 1]) * y[i - 1]) / (1.0 - g[i + 1])
        if abs(y[i + 1]) > 1e200:
            y[: i + 2] /= abs(y[i + 1])
    z = np.zeros(n)
    z[n - 1], z[n - 2] = 0.0, 1e-12
    for i in range(n - 2, m, -1):
        z[i - 1] = ((2.0 + 10.0 * g[i]) * z[i] - (1.0 - g[i + 1]) * z[i + 1]) / (1.0 - g[i - 1])
        if abs(z[i - 1]) > 1e200:
            z[i - 1 :] /= abs(z[i - 1])
    scale = y[m] / z[m]
    y[m + 1 :] = z[m + 1 :] * scale
    return y


class _Sweep:
    """Refined-grid machinery shared by the solver entry points."""

    def __init__(self, pot: PotentialSet, n_rot: int, grid: RadialGrid,
                 mass: float, r_stop: float | None = None):
        factor = 1
        while grid.dr / factor > _REFINE_TARGET:
            factor *= 2
        self.factor = factor
        self.h = grid.dr / factor
        r_hi = grid.r_max if r_stop is None else min(r_stop, grid.r_max)
        n = int(round((r_hi - grid.r_min) / self.h)) + 1
        self.r = grid.r_min + self.h * np.arange(n)
        v1 = pot.evaluate(self.r)[0]
        self.v_eff = v1 + n_rot * (n_rot + 1) / (2.0 * mass * self.r**2)
        self.base = 2.0 * mass * self.v_eff
        self.mass = mass
        self.grid = grid

    def g_of(self, energy: float) -> np.ndarray:
        return (self.h**2 / 12.0) * (self.base - 2.0 * self.mass * energy)

    def count(self, energy: float) -> int:
        return int(_sweep_count(self.g_of(energy)))

    def turning_index(self, energy: float) -> int:
        allowed = np.nonzero(self.v_eff <= energy)[0]
        if len(allowed) == 0:
            return -1
        m = int(allowed[-1])
        return min(max(m, 2), len(self.r) - 3)

    def residual(self, energy: float) -> float:
        m = self.turning_index(energy)
        return float(_sweep_match(self.g_of(energy), m))


def default_solver_grid(pot: PotentialSet) -> RadialGrid:
    r_min = float(pot.r_samples[0])
    r_max = float(min(pot.r_samples[-1], r_min + 80.0))
    return RadialGrid(n_r=1024, r_min=r_min, r_max=r_max)


def count_bound_levels(pot, n_rot=0, grid=None, mass=None) -> int:
    grid = grid or default_solver_grid(pot)
    mass = mass or CONST.reduced_mass
    return _Sweep(pot, n_rot, grid, mass).count(_E_TOP)


def solve_bound_state(pot: PotentialSet, n_rot: int, v: int,
                      grid: RadialGrid | None = None, mass: float | None = None
                      ) -> BoundState:
    """Eigenstate (v, N) of the effective radial potential.

    Raises NotBoundError when fewer than v+1 levels are bound, and
    ConvergenceError if the eigenvalue refinement stalls.
    """
    if v < 0 or n_rot < 0:
        raise ValueError("v and n_rot must be non-negative")
    grid = grid or default_solver_grid(pot)
    mass = mass or CONST.reduced_mass

    sweep = _Sweep(pot, n_rot, grid, mass)
    n_bound = sweep.count(_E_TOP)
    if n_bound <= v:
        # near-threshold retry: pull the outer boundary in to ~3x the outer
        # turning point so the shallow long-range tail cannot confuse the shot
        m = sweep.turning_index(_E_TOP)
        if m > 0:
            r_t = sweep.r[m]
            tight = _Sweep(pot, n_rot, grid, mass, r_stop=3.0 * r_t)
            n2 = tight.count(_E_TOP)
            if n2 > v:
                sweep, n_bound = tight, n2
        if n_bound <= v:
            raise NotBoundError(v, n_bound)

    # bracket eigenvalue v by node count: count(E) = #levels below E
    e_lo = float(np.min(sweep.v_eff)) + 1e-14
    e_hi = _E_TOP
    it = 0
    while it < _MAX_ITER:
        if (sweep.count(e_lo) == v and sweep.count(e_hi) == v + 1
                and (e_hi - e_lo) < 1e-6 * max(1.0, abs(e_lo))):
            break
        mid = 0.5 * (e_lo + e_hi)
        if sweep.count(mid) <= v:
            e_lo = mid
        else:
            e_hi = mid
        it += 1
    else:
        raise ConvergenceError(
            f"node bracketing stalled after {_MAX_ITER} iterations, "
            f"bracket [{e_lo!r}, {e_hi!r}]"
        )

    f_lo, f_hi = sweep.residual(e_lo), sweep.residual(e_hi)
    it2 = 0
    while f_lo * f_hi > 0 and it2 < 60:
        # residual pole inside: shrink the count bracket further
        mid = 0.5 * (e_lo + e_hi)
        if sweep.count(mid) <= v:
            e_lo, f_lo = mid, sweep.residual(mid)
        else:
            e_hi, f_hi = mid, sweep.residual(mid)
        it2 += 1
    if f_lo * f_hi > 0:
        raise ConvergenceError(
            f"no sign change of the matching residual in [{e_lo!r}, {e_hi!r}]"
        )

    from scipy.optimize import brentq

    energy = float(brentq(sweep.residual, e_lo, e_hi,
                          xtol=1e-11, rtol=4 * np.finfo(float).eps,
                          maxiter=_MAX_ITER))

    m = sweep.turning_index(energy)
    y = _sweep_assemble(sweep.g_of(energy), m)
    y /= np.sqrt(np.sum(y * y) * sweep.h)

    # The Numerov residual at the glue point is h * (jump in y'/y) to leading
    # order, so |D|/h is the log-derivative discontinuity (1e-8 contract,
    # scaled by the characteristic local wavenumber).
    d_final = sweep.residual(energy)
    kappa = math.sqrt(2.0 * sweep.mass * max(energy - np.min(sweep.v_eff), 1e-12))
    if not np.isfinite(d_final) or abs(d_final) / sweep.h > 1e-8 * max(1.0, kappa):
        raise ConvergenceError(
            f"log-derivative mismatch {abs(d_final)/sweep.h:.2e} at the matching point"
        )

    nodes = int(np.sum(np.abs(np.diff(np.sign(y[np.abs(y) > 1e-10 * np.max(np.abs(y))]))) > 1))
    if nodes != v:
        raise ConvergenceError(f"converged state has {nodes} nodes, expected {v}")

    # restrict to the caller grid (the sweep nodes contain it exactly)
    chi = np.zeros(grid.n_r)
    n_avail = (len(sweep.r) - 1) // sweep.factor + 1
    take = min(grid.n_r, n_avail)
    chi[:take] = y[:: sweep.factor][:take]
    chi /= np.sqrt(np.sum(chi * chi) * grid.dr)
    if chi[np.argmax(np.abs(chi))] < 0:
        chi = -chi
    return BoundState(v=v, n_rot=n_rot, energy=energy, chi=chi, grid=grid)


def rotational_shift(pot: PotentialSet, v: int, n_rot: int,
                     grid: RadialGrid | None = None, mass: float | None = None) -> float:
    """Delta E(v, N) = E(v, N) - E(v, 0) >= 0."""
    if n_rot == 0:
        return 0.0
    grid = grid or default_solver_grid(pot)
    e_n = solve_bound_state(pot, n_rot, v, grid, mass).energy
    e_0 = solve_bound_state(pot, 0, v, grid, mass).energy
    return e_n - e_0


def level_table(pot: PotentialSet, v_max: int, n_max: int,
                grid: RadialGrid | None = None, mass: float | None = None):
    """(v, N, E) rows for every bound level with v <= v_max, N <= n_max."""
    grid = grid or default_solver_grid(pot)
    rows = []
    for n_rot in range(n_max + 1):
        for v in range(v_max + 1):
            try:
                st = solve_bound_state(pot, n_rot, v, grid, mass)
            except NotBoundError:
                break
            rows.append((v, n_rot, st.energy))
    return rows
