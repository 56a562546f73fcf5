"""The squared Bessel oracle: exact answers to check simulations against.

BESQ(delta) admits an exact transition sampler (no time discretization),
a closed-form probability of hitting zero before t, and a known zero-set
dimension.  Two Dyson particles map onto it exactly: their squared gap
is 2 * BESQ(2k + 1).  This script exercises each closed form.

Run:  python3 demos/besq_oracle_tour.py
"""

import numpy as np
from scipy import stats

from weylgas import (BesqSpec, besq_exact_transition, besq_hit_probability,
                     besq_zero_dimension)

spec = BesqSpec(delta=1.0, x0=1.0)

# exact transition sampling: the mean identity E X_t = x0 + delta t
xs = besq_exact_transition(spec, t=1.0, size=200_000, seed=1)
print(f"E X_1 = {xs.mean():.4f}   (exact: {spec.x0 + spec.delta:.4f})")

# additivity in (delta, x0)
a = besq_exact_transition(BesqSpec(1.0, 0.4), 0.7, 100_000, seed=2)
b = besq_exact_transition(BesqSpec(2.5, 1.1), 0.7, 100_000, seed=3)
c = besq_exact_transition(BesqSpec(3.5, 1.5), 0.7, 100_000, seed=4)
print(f"additivity KS distance: {stats.ks_2samp(a + b, c).statistic:.4f}")

# hitting the origin: for delta = 1 this is the reflection principle
p = besq_hit_probability(spec, t=1.0)
print(f"P(hit 0 by t=1) = {p:.5f}   "
      f"(reflection principle: {2 * stats.norm.sf(1.0):.5f})")

# zero-set dimension across the attainable range
print("zero-set dimension 1 - delta/2:")
for delta in (0.5, 1.0, 1.5, 2.0):
    print(f"  delta = {delta}: {besq_zero_dimension(delta)}")

# the Dyson gap correspondence: coupling k gives delta = 2k + 1
for k in (0.1, 0.25, 0.4):
    delta = 2 * k + 1
    print(f"Dyson k = {k}: gap zero set has dimension "
          f"{besq_zero_dimension(delta):.2f} = 1/2 - k")
