"""Branching Brownian motion: where does the mean density drop to one?

Particles diffuse with generator kappa * Laplacian while branching. The mean
density l1(t, 0, y) = 1 on a sphere whose radius grows like 2 sqrt(kappa beta) t.
"""

from mitograph import ModelParams, SplitKernel, empirical_front

p = ModelParams(beta=1.0, kappa=1.0, dim=1)
fs = empirical_front(p, SplitKernel.uniform(0.25), [5.0 + 0.5 * i for i in range(11)], R=400, seed=4)
print("   t   empirical   exact    2 sqrt(kappa beta) t")
for row in fs.table:
    print(f"{row['t']:5.1f}  {row['empirical_radius']:8.3f}  {row['exact_radius']:8.3f}  {row['leading_radius']:8.3f}")
print(f"\nfitted front speed {fs.speed:.3f} +- {fs.speed_se:.3f} (asymptotic speed 2)")
