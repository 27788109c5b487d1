"""First and second moments of the total mass, ``L1 = E_m M(t)`` and ``L2 = E_m M(t)^2``.

Both solve pantograph-type equations on the mass half-line::

    dL1/dt = v dL1/dm + 2 beta int (L1(theta m) - L1(m)) q dtheta + (beta - mu) L1,   L1(0, m) = m
    dL2/dt = (same operator on L2) + 2 beta int L1(theta m) L1((1 - theta) m) q dtheta, L2(0, m) = m^2

The numerical solver is a method of lines: one-sided differences reaching
toward larger m (characteristics ``m + v t`` carry information from the
right), kernel quadrature with cubic interpolation for the rescaled argument,
a polynomial far-field closure past ``m_max`` and classical RK4 in time.

Closed forms serve as oracles. Affine functions are mapped to affine
functions, giving ``L1 = m e^{-mu t} + (v/beta) e^{(beta-mu) t} (1 - e^{-beta t})``;
quadratics are mapped to quadratics, which reduces ``L2`` to a three
dimensional linear ODE for its coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.integrate import solve_ivp

from .errors import CFLViolation, IntegrationFailure
from .kernels import SplitKernel, kernel_moment
from .params import ModelParams, validate_params


@dataclass(frozen=True)
class MassGrid:
    m_max: float
    n_points: int = 1024

    def __post_init__(self):
        if self.n_points < 256:
            raise ValueError("mass grid needs at least 256 points")
        if not self.m_max > 0:
            raise ValueError("m_max must be positive")

    @classmethod
    def default(cls, p: ModelParams, n_points: int = 1024, span: float = 20.0) -> "MassGrid":
        return cls(m_max=span * p.v / p.beta, n_points=n_points)

    @property
    def nodes(self) -> np.ndarray:
        return np.linspace(0.0, self.m_max, self.n_points)

    @property
    def spacing(self) -> float:
        return self.m_max / (self.n_points - 1)


@dataclass
class MomentField:
    grid: MassGrid
    t: float
    values: np.ndarray

    def at(self, m):
        """Cubic interpolation of the field at masses in ``[0, m_max]``."""
        m = np.atleast_1d(np.asarray(m, dtype=float))
        out = interpolation_matrix(self.grid, m) @ self.values
        return float(out[0]) if out.size == 1 else out


def _cubic_weights(s):
    """Lagrange weights on offsets -1, 0, 1, 2 for fractional position ``s`` in [0, 1)."""
    return np.stack([
        -s * (s - 1) * (s - 2) / 6,
        (s + 1) * (s - 1) * (s - 2) / 2,
        -(s + 1) * s * (s - 2) / 2,
        (s + 1) * s * (s - 1) / 6,
    ], axis=-1)


def interpolation_matrix(grid: MassGrid, x) -> sparse.csr_matrix:
    """Sparse matrix evaluating the 4-point cubic interpolant of grid values at ``x``.

    Stencils are shifted inward near both ends, so every ``x`` in
    ``[0, m_max]`` uses grid nodes only.
    """
    x = np.asarray(x, dtype=float)
    n = grid.n_points
    pos = x / grid.spacing
    base = np.clip(np.floor(pos).astype(np.int64) - 1, 0, n - 4)
    s = pos - base - 1.0
    w = _cubic_weights(s)
    rows = np.repeat(np.arange(x.size), 4)
    cols = (base[:, None] + np.arange(4)[None, :]).ravel()
    return sparse.csr_matrix((w.ravel(), (rows, cols)), shape=(x.size, n))


def nonlocal_matrix(grid: MassGrid, q: SplitKernel, n_quad: int = 32) -> sparse.csr_matrix:
    """Matrix ``W`` with ``(W f)_i = int (f(theta m_i) - f(m_i)) q(theta) dtheta``."""
    m = grid.nodes
    nodes, weights = q.quadrature(n_quad)
    W = sparse.csr_matrix((grid.n_points, grid.n_points))
    for th, w in zip(nodes, weights):
        W = W + w * interpolation_matrix(grid, th * m)
    return (W - weights.sum() * sparse.identity(grid.n_points, format="csr")).tocsr()


def nonlocal_term(f: MomentField, q: SplitKernel, n_quad: int = 32) -> np.ndarray:
    return nonlocal_matrix(f.grid, q, n_quad) @ f.values


class _Advection:
    """``dL/dm`` by one-sided differences toward larger m with polynomial ghost values."""

    def __init__(self, grid: MassGrid, order: int, closure_degree: int, closure_fraction: float = 0.1):
        if order not in (1, 2):
            raise ValueError("advection order must be 1 or 2")
        self.h = grid.spacing
        self.order = order
        self.degree = closure_degree
        n = grid.n_points
        k = max(closure_degree + 2, int(math.ceil(closure_fraction * n)))
        self.fit_idx = np.arange(n - k, n)
        # fit in a local coordinate to keep the Vandermonde system well conditioned
        z = (self.fit_idx - (n - 1)).astype(float)
        V = np.vander(z, closure_degree + 1, increasing=True)
        ghost_z = np.arange(1, order + 1, dtype=float)
        G = np.vander(ghost_z, closure_degree + 1, increasing=True)
        self.ghost_map = G @ np.linalg.pinv(V)

    def __call__(self, L):
        ghosts = self.ghost_map @ L[self.fit_idx]
        ext = np.concatenate([L, ghosts])
        if self.order == 1:
            return (ext[1:] - ext[:-1]) / self.h
        return (-3.0 * ext[:-2] + 4.0 * ext[1:-1] - ext[2:]) / (2.0 * self.h)


def stable_dt(p: ModelParams, grid: MassGrid) -> float:
    d = p.beta - p.mu
    return min(0.5 * grid.spacing / p.v, 0.1 / (2.0 * p.beta + d))


def _rk4(rhs, y, t0, t_end, dt):
    steps = max(1, int(math.ceil((t_end - t0) / dt - 1e-12)))
    h = (t_end - t0) / steps
    t = t0
    for _ in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def _march(rhs, y0, grid, times, dt):
    times = np.atleast_1d(np.asarray(times, dtype=float))
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("output times must be nonnegative and sorted")
    out = []
    y, t = y0, 0.0
    for t_out in times:
        if t_out > t:
            y = _rk4(rhs, y, t, t_out, dt)
            t = t_out
        out.append(MomentField(grid=grid, t=float(t_out), values=y.copy()))
    return out


def _check_dt(p, grid, dt):
    bound = stable_dt(p, grid)
    if dt is None:
        return bound
    if dt > bound * (1 + 1e-12):
        raise CFLViolation(f"dt={dt} exceeds stability bound {bound}")
    return dt


def moment_operator(p: ModelParams, q: SplitKernel, grid: MassGrid, order: int = 2,
                    closure_degree: int = 1, n_quad: int = 32):
    """Right-hand side ``f -> v f' + 2 beta int (f(theta m) - f(m)) q + (beta - mu) f`` on the grid."""
    adv = _Advection(grid, order, closure_degree)
    W = nonlocal_matrix(grid, q, n_quad)
    delta = p.beta - p.mu

    def apply(f):
        return p.v * adv(f) + 2.0 * p.beta * (W @ f) + delta * f

    return apply


def solve_L1(p: ModelParams, q: SplitKernel, grid: MassGrid | None = None, t_end=1.0, dt=None,
             order: int = 2, n_quad: int = 32):
    """Method-of-lines solution of the first-moment equation.

    ``t_end`` may be a scalar (returns one :class:`MomentField`) or a sorted
    sequence of output times (returns a list). The far-field closure is affine.
    """
    validate_params(p)
    grid = grid or MassGrid.default(p)
    dt = _check_dt(p, grid, dt)
    op = moment_operator(p, q, grid, order=order, closure_degree=1, n_quad=n_quad)
    fields = _march(lambda t, y: op(y), grid.nodes.copy(), grid, t_end, dt)
    return fields[0] if np.ndim(t_end) == 0 else fields


def solve_L2(p: ModelParams, q: SplitKernel, grid: MassGrid | None = None, t_end=1.0, dt=None,
             order: int = 2, n_quad: int = 32):
    """Method-of-lines solution of the second-moment equation.

    The source term uses the closed-form first moment. The far-field closure
    is quadratic, matching the quadratic growth of ``L2`` in m.
    """
    validate_params(p)
    grid = grid or MassGrid.default(p)
    dt = _check_dt(p, grid, dt)
    op = moment_operator(p, q, grid, order=order, closure_degree=2, n_quad=n_quad)
    m = grid.nodes
    nodes, weights = q.quadrature(n_quad)

    def source(t):
        a, b = l1_coefficients(p, t)
        prod = (a * nodes[None, :] * m[:, None] + b) * (a * (1 - nodes[None, :]) * m[:, None] + b)
        return 2.0 * p.beta * (prod @ weights)

    fields = _march(lambda t, y: op(y) + source(t), m ** 2, grid, t_end, dt)
    return fields[0] if np.ndim(t_end) == 0 else fields


def l1_coefficients(p: ModelParams, t):
    """``(a, b)`` with ``L1(t, m) = a m + b``."""
    a = np.exp(-p.mu * t)
    b = p.v / p.beta * np.exp((p.beta - p.mu) * t) * -np.expm1(-p.beta * t)
    return a, b


def exact_L1(p: ModelParams, m, t):
    """``E_m M(t) = m e^{-mu t} + (v/beta) e^{(beta-mu) t} (1 - e^{-beta t})``."""
    a, b = l1_coefficients(p, t)
    return a * np.asarray(m, dtype=float) + b


def l2_coefficients(p: ModelParams, q: SplitKernel, t, rtol: float = 1e-12):
    """``(c, d, e)`` with ``L2(t, m) = c m^2 + d m + e``, from the coefficient ODE.

    Integrated with an adaptive 8th-order Runge-Kutta method. ``t`` may be a
    scalar or a sorted array of times.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    beta, v = p.beta, p.v
    delta = p.beta - p.mu
    th2 = kernel_moment(q, 2)
    th_one_minus = kernel_moment(q, 1) - th2

    def rhs(s, y):
        c, d, e = y
        a, b = l1_coefficients(p, s)
        return [
            (2 * beta * (th2 - 1) + delta) * c + 2 * beta * a * a * th_one_minus,
            2 * v * c + (delta - beta) * d + 2 * beta * a * b,
            v * d + delta * e + 2 * beta * b * b,
        ]

    t_max = float(t_arr.max())
    if t_max == 0.0:
        coeffs = np.tile([[1.0], [0.0], [0.0]], (1, t_arr.size))
    else:
        sol = solve_ivp(rhs, (0.0, t_max), [1.0, 0.0, 0.0], method="DOP853", rtol=rtol,
                        atol=1e-14, dense_output=True)
        if not sol.success:
            raise IntegrationFailure(sol.message)
        coeffs = sol.sol(t_arr)
    if np.ndim(t) == 0:
        return tuple(float(c[0]) for c in coeffs)
    return coeffs[0], coeffs[1], coeffs[2]


def exact_L2_ode(p: ModelParams, q: SplitKernel, m, t):
    """``E_m M(t)^2`` from the quadratic-coefficient ODE (scalar ``t``)."""
    c, d, e = l2_coefficients(p, q, t)
    m = np.asarray(m, dtype=float)
    return c * m * m + d * m + e


def l2_leading_ratio(p: ModelParams, q: SplitKernel, m: float, t: float) -> float:
    """``L2(t, m) / (2 (e^{(beta-mu) t} v / beta)^2)``."""
    return float(exact_L2_ode(p, q, m, t) / (2.0 * (math.exp((p.beta - p.mu) * t) * p.v / p.beta) ** 2))


def relative_error(num, exact) -> float:
    """``max |num - exact| / (1 + |exact|)`` over the grid."""
    return float(np.max(np.abs(np.asarray(num) - np.asarray(exact)) / (1.0 + np.abs(exact))))


def convergence_study(p: ModelParams, q: SplitKernel, t_end: float, sizes=(256, 512, 1024),
                      moment: int = 1, order: int = 2, span: float = 20.0) -> dict:
    """Solver error against the closed form for a sequence of grid sizes."""
    errors = []
    for n in sizes:
        grid = MassGrid.default(p, n_points=n, span=span)
        if moment == 1:
            f = solve_L1(p, q, grid, t_end, order=order)
            ref = exact_L1(p, grid.nodes, t_end)
        else:
            f = solve_L2(p, q, grid, t_end, order=order)
            ref = exact_L2_ode(p, q, grid.nodes, t_end)
        errors.append(relative_error(f.values, ref))
    errs = np.array(errors)
    with np.errstate(divide="ignore", invalid="ignore"):
        orders = np.log2(errs[:-1] / errs[1:]).tolist()
    return {"moment": moment, "order": order, "t": t_end, "sizes": list(sizes),
            "errors": errs.tolist(), "observed_order": orders}


def field_rows(p: ModelParams, q: SplitKernel, L1: MomentField, L2: MomentField):
    """CSV rows ``(m, L1, L2, exact_L1, exact_L2)`` for one output time."""
    m = L1.grid.nodes
    e1 = exact_L1(p, m, L1.t)
    e2 = exact_L2_ode(p, q, m, L2.t)
    return [tuple(float(x) for x in row) for row in zip(m, L1.values, L2.values, e1, e2)]
