"""The first-return map that makes the escape limits computable.

Around the fixed point 0 of the full logistic map we take a domain Y bounded
by postcritical preimages, cut it into intervals on which the first return
time tau is constant, and check three facts the escape analysis rests on:

* the measure of {tau > n} decays exponentially;
* Kac: the integral of tau against mu restricted to Y is 1;
* the return domains accumulating at 0 form ladders whose gaps shrink by
  1/lam_z = 1/4 per rung.
"""

import numpy as np

from mtescape import UnimodalMap
from mtescape.maps import critical_orbit
from mtescape.measure import MeasureEvaluator, build_ulam, default_breakpoints, invariant_density
from mtescape.symbolic import (
    build_inducing_domain,
    build_partition,
    first_return_map,
    identify_chains,
)

f = UnimodalMap(4.0)
orbit = critical_orbit(f)
dom = build_inducing_domain(build_partition(orbit, f), 0.0)
induced = first_return_map(f, dom)
print(f"{len(induced.domains)} return domains, coverage of Y {induced.coverage:.8f}")

ns, meas, counts = induced.tail_counts()
print("\n  n   mu_Y(tau > n)   domains with tau = n")
for n, m, c in list(zip(ns, meas, counts))[:12]:
    print(f"{n:3d}   {m:13.6e}   {c}")
good = meas > 0
slope = np.polyfit(ns[good][2:], np.log(meas[good][2:]), 1)[0]
print(f"log-tail slope {slope:.4f}")

density = invariant_density(build_ulam(f, 1 << 15, breakpoints=default_breakpoints(f, orbit)),
                            orbit=orbit)
ev = MeasureEvaluator(density)
print(f"Kac sum {sum(d.tau * ev(d.left, d.right) for d in induced.domains):.8f}")

ladder = identify_chains(induced, 0.0).right_ladder
gaps = np.abs(np.diff(ladder))
print("ladder gap ratios", np.round(gaps[1:9] / gaps[:8], 5))
