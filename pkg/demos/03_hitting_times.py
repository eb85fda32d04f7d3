"""First hitting times of shrinking holes.

For mu-distributed starting points, the chance of avoiding H for
t * mu(H)**-alpha steps decays like exp(-L t mu(H)**(1-alpha)).  The
constant L is the same number as the escape ratio, and it does not care
which alpha is used.  Monte Carlo with a fixed seed; about half a minute.
"""

import numpy as np

from mtescape import UnimodalMap
from mtescape.hts import hts_sweep

f = UnimodalMap(4.0)
eps = 1e-2 * 10 ** (-0.5 * np.arange(4))
for z in (0.0, 0.3):
    rep = hts_sweep(f, z, eps, alphas=(0.8, 1.0, 1.5), n_samples=200_000, seed=7)
    print(f"\nz={z}: {rep.case}, predicted L = {rep.predicted:.3f}")
    for r in rep.rows:
        if r.alpha == 1.0:
            print(f"  eps={r.eps_L:.2e}  n_eps={r.n_eps:6d}  surviving {r.survivor_frac:.4f}"
                  f"  L = {r.L_value:.4f} +- {r.stderr:.4f}")
    for (a, t), v in rep.extrapolated.items():
        print(f"  extrapolated, alpha={a:g}: {v:.4f}")
