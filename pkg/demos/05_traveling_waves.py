"""Traveling waves of kappa phi'' + c phi' + beta phi (1 - phi) = 0.

A monotone front from 1 down to 0 exists only when c >= 2 sqrt(kappa beta);
slower waves overshoot zero. The minimal speed is found by bisection on that
dichotomy.
"""

from mitograph import ModelParams, minimal_speed, traveling_wave

for kappa, beta in ((1.0, 1.0), (0.5, 1.0), (1.0, 2.0)):
    p = ModelParams(beta=beta, kappa=kappa)
    print(f"kappa={kappa}, beta={beta}: minimal speed {minimal_speed(p):.5f}  (2 sqrt(kappa beta) = {2 * (kappa * beta) ** 0.5:.5f})")

p = ModelParams()
for c in (1.0, 1.9, 2.0, 2.5, 4.0):
    w = traveling_wave(c, p)
    print(f"c={c}: {w.classification}, profile min {w.phi.min():+.3e}")
