"""A path whose quadratic variation does not converge along the dyadics.

The wavelet coefficients are zero except on rows just before the
checkpoint levels 1, 3, 6, 10, 15, where one large burst is planted.  The
level-n quadratic variation then hits the integer n at each checkpoint but
collapses to (n-1) * 2**(1-n) one level earlier — limsup infinity, liminf
zero, so no refining-partition limit exists.
"""

import numpy as np

import roughvar as rv
from roughvar import schauder

n_max = 5
coeffs = schauder.counterexample_coefficients(n_max)
x = schauder.schauder_eval(coeffs, coeffs.max_level)
print(f"bursts on coefficient rows {schauder.counterexample_burst_levels(n_max)}"
      f" of {coeffs.max_level}; path has {x.samples.size} samples")

checkpoints = [1, 3, 6, 10, 15]
print("\nlevel n   [x]_n(1)        note")
vals, levels = [], []
for s_n in checkpoints:
    for n in (s_n - 1, s_n):
        qv = rv.pth_variation(x, rv.dyadic_partition(n, x.grid_level), 2.0)
        note = "checkpoint" if n == s_n else ""
        print(f"{n:7d}   {qv.terminal:<13.9g}   {note}")
        vals.append(qv.terminal)
        levels.append(n)

rep = rv.limit_diagnostics(vals, window=len(vals), levels=levels)
print(f"\nclassification over the interleaved levels: {rep.classification}")
print(f"limsup estimate {rep.limsup_est:g}, liminf estimate {rep.liminf_est:g}")

# The identity behind the table: the level-n quadratic variation equals
# 2**-n times the summed squares of all coefficient rows above n.
n = 10
identity = schauder.level_qv_identity(coeffs, n)
direct = rv.pth_variation(x, rv.dyadic_partition(n, x.grid_level), 2.0).terminal
print(f"\ncoefficient identity at level {n}: {identity:.12g} "
      f"vs direct {direct:.12g} (diff {identity - direct:+.1e})")
