"""Intermittency: the population near the origin is exponentially distributed.

The number of particles in a fixed ball, divided by its mean, converges to
Exp(1). Its variance is therefore comparable to the squared mean.
"""

from mitograph import ModelParams, SplitKernel, occupation_law

p = ModelParams(beta=1.0, kappa=1.0, dim=1)
rep = occupation_law(p, SplitKernel.uniform(0.25), t=8.0, center=[0.0], radius=1.0, R=5000, seed=6)
print(f"mean count in B_1(0) at t=8: {rep.extra['mean_count']:.1f} (expected {rep.extra['expected_count']:.1f})")
print(f"variance of N / EN: {rep.extra['variance_ratio']:.3f} (Exp(1) has variance 1)")
print(f"KS distance to Exp(1): {rep.ks:.4f}")
