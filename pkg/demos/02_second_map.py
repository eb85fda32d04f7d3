"""A map whose critical orbit lands on a period-5 cycle after three steps.

The parameter is found by root finding on f^{k0+p}(c) - f^{k0}(c), then the
postcritical points cut the core into a Markov partition.  The point
z = f^3(c) is periodic and on the critical orbit, so its escape ratio should
approach 1 - lam_z**(-1/2) with lam_z the multiplier of the 5-cycle.
"""

import numpy as np

from mtescape import find_mt_parameter, local_escape_sweep
from mtescape.maps import critical_orbit
from mtescape.symbolic import build_partition

f = find_mt_parameter(3, 5, [3.92, 3.94])
orbit = critical_orbit(f)
part = build_partition(orbit, f)
print(f"A = {f.A:.16f}  residual {orbit.residual:.1e}")
print(f"preperiod {orbit.k0}, period {orbit.p}, cycle multiplier {orbit.lambda_tail:.6f}")
print(f"Markov partition with {part.M} intervals, boundaries {np.round(part.boundaries, 5)}")

z = orbit.point(3)
rep = local_escape_sweep(f, z, 1e-2 * 10 ** (-0.5 * np.arange(5)), n_bins=1 << 15)
print(f"\nz = f^3(c) = {z:.12f}: case {rep.case}, period {rep.period}")
for e, r in rep.observed:
    print(f"  eps={e:.2e}  e(H)/mu(H) = {r:.4f}")
print(f"extrapolated {rep.extrapolated:.4f} against predicted {rep.predicted:.4f}")
