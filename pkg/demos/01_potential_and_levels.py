#!/usr/bin/env python3
"""Shipped H2+ curves, transition dipole, and the bound-level ladder.

Loads the packaged 1ssg/2psu table, prints the well parameters and the
charge-resonance behaviour of the dipole, then solves the first rotational
ladders and writes a levels CSV.
"""

import numpy as np

from fragspec import (RadialGrid, count_bound_levels, level_table,
                      load_potential_table, shipped_table_path)
from fragspec.blockio import write_levels_csv

pot = load_potential_table(shipped_table_path())
r = pot.r_samples
i_min = int(np.argmin(pot.v1_samples))
print(f"table rows: {len(r)}, range {r[0]:g}..{r[-1]:g} bohr")
print(f"ground well: depth {pot.v1_samples[i_min]:+.6f} hartree at R = {r[i_min]:g}")
print(f"vertical gap at the well: {pot.v2_samples[i_min]-pot.v1_samples[i_min]:.4f} hartree")
for rr in (10.0, 50.0, 150.0):
    mu = pot.evaluate(rr)[2]
    print(f"mu({rr:5.1f})/R = {mu/rr:.6f}   (charge-resonance limit 1/2)")

grid = RadialGrid(n_r=1024, r_min=0.2, r_max=80.0)
print(f"\nbound levels (N=0): {count_bound_levels(pot, 0, grid)}")
rows = level_table(pot, v_max=12, n_max=2, grid=grid)
write_levels_csv("levels.csv", rows)
print(f"wrote {len(rows)} levels to levels.csv")
for v, n, e in rows:
    if n == 0:
        print(f"  E(v={v:2d}, N=0) = {e:+.6f} hartree")
