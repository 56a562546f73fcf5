"""Tour of the exact algebraic layer.

Builds the supported root systems, shows the positive/simple root
structure, and evaluates the two polynomial identities that power the
drift formulas in exact rational arithmetic: the two-index expansion of
elementary symmetric polynomials and the reflection-pair identities.
Every residual printed below is exactly zero.

Run:  python3 demos/algebra_identities.py
"""

import numpy as np

from weylgas import (build_root_system, residual_e_form2,
                     residual_reflection_identities)

rng = np.random.default_rng(0)

for family, N in [("A", 4), ("B", 3), ("D", 4)]:
    R = build_root_system(family, N)
    print(f"{family}_{N}: {R.M} positive roots, "
          f"{len(R.simple_roots)} simple: {R.simple_roots}")

    sq = [int(v) for v in rng.integers(1, 60, size=R.M)]
    worst = 0
    for n in range(1, R.M + 1):
        i, j = rng.choice(R.M, size=2, replace=False)
        worst = max(worst, abs(residual_e_form2(sq, n, int(i), int(j))))
    print(f"  e-polynomial expansion residual over all n: {worst}")

    x = [int(v) for v in rng.integers(-9, 9, size=N)]
    pm = R.positive_matrix
    worst = 0
    for bi, beta in enumerate(R.positive_roots):
        for ai, alpha in enumerate(R.positive_roots):
            if ai == bi or pm[ai] @ pm[bi] == 0:
                continue
            r1, r2 = residual_reflection_identities(x, alpha, beta, R)
            worst = max(worst, abs(r1), abs(r2))
    print(f"  reflection-pair residual at x={x}: {worst}")
