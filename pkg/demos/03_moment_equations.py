"""Expected total mass and its second moment as functions of (t, m).

L1(t, m) = E_m M(t) and L2(t, m) = E_m M(t)^2 solve linear equations with a
rescaled argument theta m. The solver marches them on a mass grid; the closed
forms come from an affine (L1) and quadratic (L2) ansatz.
"""

import math

from mitograph import MassGrid, ModelParams, SplitKernel, exact_L1, exact_L2_ode, solve_L1, solve_L2
from mitograph.moments import convergence_study

q = SplitKernel.uniform(0.25)
for p in (ModelParams(beta=1.0, mu=0.0), ModelParams(beta=1.0, mu=0.5)):
    grid = MassGrid.default(p)
    f1 = solve_L1(p, q, grid, 3.0)
    f2 = solve_L2(p, q, grid, 3.0)
    print(f"beta={p.beta}, mu={p.mu}, t=3, m=1")
    print(f"  L1 solver {f1.at(1.0):.8f}   closed form {exact_L1(p, 1.0, 3.0):.8f}")
    print(f"  L2 solver {f2.at(1.0):.8f}   coefficient ODE {exact_L2_ode(p, q, 1.0, 3.0):.8f}")

p = ModelParams(beta=1.0, mu=0.0)
for t in (2.0, 4.0, 6.0, 8.0):
    ratio = exact_L2_ode(p, q, 1.0, t) / (2 * math.exp(t) ** 2)
    print(f"L2 / (2 (e^t v/beta)^2) at t={t}: {ratio:.4f}")

rep = convergence_study(p, q, 2.0, sizes=(256, 512, 1024), moment=2, order=1)
print("\nfirst-order upwind on L2, errors under refinement:", ", ".join(f"{e:.2e}" for e in rep["errors"]))
