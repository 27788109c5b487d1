"""The tagged mass process and its invariant law.

Following one line of descent, the mass grows at speed ``v`` and at the
jumps of a rate ``2 beta`` Poisson process is multiplied by an independent
``theta ~ q`` (either daughter is followed with equal probability, which
doubles the jump rate). Its generator is::

    L f(m) = v f'(m) + 2 beta * integral (f(theta m) - f(m)) q(theta) dtheta

The invariant law is that of the random geometric series
``xi = v tau_0 + v tau_1 theta_1 + v tau_2 theta_1 theta_2 + ...`` with
``tau_i ~ Exp(2 beta)``; it satisfies ``xi = v tau + theta xi'`` in law.
Observed only at its jump times the process converges to the same series
without the leading ``v tau_0`` term.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, factorial, log

import numpy as np
from scipy import optimize

from .errors import DegenerateKernel, InsufficientTailData
from .kernels import SplitKernel, kernel_moment, log_inverse_mean
from .params import ModelParams, validate_params
from .rng import as_generator
from .stats import EmpiricalDistribution, mean_se

CHUNK = 1 << 20


@dataclass
class TaggedMassState:
    t: float
    m: np.ndarray | float


@dataclass
class InvariantSeriesSample:
    xi: np.ndarray
    terms_used: np.ndarray
    truncation_bound: np.ndarray

    def __len__(self):
        return self.xi.size


@dataclass
class MassMomentOracle:
    moments: tuple
    alpha: float | None
    tail_rate: float
    log_inv_theta: float


@dataclass
class SmallMassBoundReport:
    m: np.ndarray
    prob: np.ndarray
    hits: np.ndarray
    used: np.ndarray
    c1_hat: float
    intercept: float
    sse_log_squared: float
    sse_log: float
    violation: bool
    worst_excess_se: float
    table: list = field(default_factory=list)

    @property
    def quadratic_preferred(self) -> bool:
        return self.sse_log_squared < self.sse_log


def simulate_tagged_mass(p: ModelParams, q: SplitKernel, m0: float, t_end: float, seed=None,
                         size: int | None = None) -> TaggedMassState:
    """Exact simulation of ``m(t_end)`` started from ``m0`` (``size`` copies)."""
    validate_params(p)
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    rng = as_generator(seed)
    n = 1 if size is None else int(size)
    m = np.full(n, float(m0))
    remaining = np.full(n, float(t_end))
    active = np.arange(n)
    while active.size:
        tau = rng.exponential(1.0 / (2.0 * p.beta), active.size)
        jump = tau < remaining[active]
        stop = active[~jump]
        m[stop] += p.v * remaining[stop]
        go = active[jump]
        tj = tau[jump]
        m[go] = (m[go] + p.v * tj) * q.sample(rng, go.size)
        remaining[go] -= tj
        active = go
    return TaggedMassState(t=t_end, m=float(m[0]) if size is None else m)


def tagged_mean(p: ModelParams, m0: float, t: float) -> float:
    """``E m(t) = v/beta + (m0 - v/beta) exp(-beta t)``."""
    return p.v / p.beta + (m0 - p.v / p.beta) * np.exp(-p.beta * t)


def simulate_embedded_chain(p: ModelParams, q: SplitKernel, m0: float, n: int, seed=None,
                            size: int | None = None) -> np.ndarray:
    """Masses right after the first ``n`` jumps, ``m_k = (m_{k-1} + v tau_k) theta_k``.

    Shape ``(n,)``, or ``(size, n)`` for ``size`` independent chains.
    """
    validate_params(p)
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = as_generator(seed)
    k = 1 if size is None else int(size)
    out = np.empty((k, n))
    m = np.full(k, float(m0))
    for i in range(n):
        tau = rng.exponential(1.0 / (2.0 * p.beta), k)
        m = (m + p.v * tau) * q.sample(rng, k)
        out[:, i] = m
    return out[0] if size is None else out


def sample_invariant_series(p: ModelParams, q: SplitKernel, seed=None, eps_rel: float = 1e-12,
                            size: int = 1, include_leading: bool = True) -> InvariantSeriesSample:
    """Draw ``size`` truncated copies of the random geometric series.

    A copy stops once the expected remainder given its product of thetas,
    ``v * prod / (2 beta (1 - E theta))``, falls below ``eps_rel * v / beta``.
    Without ``include_leading`` the ``v tau_0`` term is dropped, giving the
    limit law of the embedded chain.
    """
    validate_params(p)
    if not 0 < eps_rel < 1:
        raise ValueError("eps_rel must lie in (0, 1)")
    rng = as_generator(seed)
    scale = 1.0 / (2.0 * p.beta)
    bulk = p.v / p.beta
    remainder_factor = p.v * scale / (1.0 - kernel_moment(q, 1))
    xi = np.empty(size)
    terms = np.empty(size, dtype=np.int64)
    bound = np.empty(size)
    for lo in range(0, size, CHUNK):
        hi = min(size, lo + CHUNK)
        k = hi - lo
        # compacted working set: (index, partial sum, theta product)
        idx = np.arange(lo, hi)
        x = p.v * rng.exponential(scale, k) if include_leading else np.zeros(k)
        prod = np.ones(k)
        nt = 1 if include_leading else 0
        while idx.size:
            prod *= q.sample(rng, idx.size)
            x += (p.v * prod) * rng.standard_exponential(idx.size) * scale
            nt += 1
            done = remainder_factor * prod < eps_rel * bulk
            if done.any():
                xi[idx[done]] = x[done]
                terms[idx[done]] = nt
                bound[idx[done]] = remainder_factor * prod[done]
                keep = ~done
                idx, x, prod = idx[keep], x[keep], prod[keep]
    return InvariantSeriesSample(xi=xi, terms_used=terms, truncation_bound=bound)


def fixed_point_map(p: ModelParams, q: SplitKernel, xi_tilde, seed=None) -> np.ndarray:
    """``v tau + theta * xi_tilde`` with fresh ``tau`` and ``theta``."""
    rng = as_generator(seed)
    xi_tilde = np.asarray(xi_tilde, dtype=float)
    n = xi_tilde.size
    return p.v * rng.exponential(1.0 / (2.0 * p.beta), n) + q.sample(rng, n) * xi_tilde


def moment_recursion(v, beta, theta_moments, K: int) -> list:
    """``E xi**k`` for ``k = 1..K`` from raw theta moments ``E theta**k``.

    Uses ``E xi^k (1 - E theta^k) = sum_{i=1..k} C(k,i) v^i E tau^i E theta^(k-i) E xi^(k-i)``
    with ``E tau^i = i! / (2 beta)^i``. Works with floats or ``Fraction``.
    """
    th = [1] + list(theta_moments)
    xi = [1]
    for k in range(1, K + 1):
        s = 0
        for i in range(1, k + 1):
            s += comb(k, i) * v ** i * factorial(i) / (2 * beta) ** i * th[k - i] * xi[k - i]
        xi.append(s / (1 - th[k]))
    return xi[1:]


def invariant_moment_exact(p: ModelParams, q: SplitKernel, k: int) -> float:
    if k < 1:
        raise ValueError("k must be >= 1")
    th = [kernel_moment(q, j) for j in range(1, k + 1)]
    return float(moment_recursion(p.v, p.beta, th, k)[-1])


def moment_oracle(p: ModelParams, q: SplitKernel, K: int = 6, alpha: float | None = None) -> MassMomentOracle:
    th = [kernel_moment(q, j) for j in range(1, K + 1)]
    return MassMomentOracle(
        moments=tuple(moment_recursion(p.v, p.beta, th, K)),
        alpha=alpha,
        tail_rate=2.0 * p.beta / p.v,
        log_inv_theta=log_inverse_mean(q),
    )


def estimate_alpha(q: SplitKernel, R: int = 100_000, eps_rel: float = 1e-12, seed=None):
    """Monte Carlo ``E 1 / prod_{n>=1} (1 - theta_1 ... theta_n)`` and its SE.

    Each product is truncated once ``theta_1 ... theta_n < eps_rel``; the
    neglected factor is ``1 + O(eps_rel)``. Returns ``(estimate, se)``; the SE
    is zero for the atomic kernel, where the product is deterministic.
    """
    if q.a <= 0:
        raise DegenerateKernel("alpha needs a support gap a > 0 so that theta_1 stays below 1")
    rng = as_generator(seed)
    n = 1 if q.kind == "atomic-half" else int(R)
    log_c = np.zeros(n)
    prod = np.ones(n)
    active = np.arange(n)
    while active.size:
        prod[active] *= q.sample(rng, active.size)
        log_c[active] -= np.log1p(-prod[active])
        active = active[prod[active] >= eps_rel]
    c = np.exp(log_c)
    if n == 1:
        return float(c[0]), 0.0
    return mean_se(c)


def tail_approximation(m, alpha: float, p: ModelParams):
    """Leading large-mass term ``(2 alpha beta / v) exp(-2 beta m / v)`` of the invariant density."""
    m = np.asarray(m, dtype=float)
    out = 2.0 * alpha * p.beta / p.v * np.exp(-2.0 * p.beta * m / p.v)
    return float(out) if out.ndim == 0 else out


def tail_fit(samples, p: ModelParams, window=None):
    """Exponential fit of the sample density on ``window`` (default ``[3, 6] v/beta``).

    The rate is the maximum-likelihood estimate for an exponential law
    truncated to the window. Returns a dict with ``slope`` (of the log
    density), its ``slope_se``, the ``prefactor`` A in ``A exp(slope m)`` and
    the number of samples in the window.
    """
    x = np.asarray(samples, dtype=float)
    lo, hi = window if window is not None else (3.0 * p.v / p.beta, 6.0 * p.v / p.beta)
    inside = x[(x >= lo) & (x <= hi)]
    n_in = inside.size
    if n_in < 10:
        raise InsufficientTailData(f"only {n_in} samples in tail window [{lo}, {hi}]")
    width = hi - lo
    target = inside.mean() - lo

    def excess_mean(lam):
        # mean of an Exp(lam) truncated to [0, width]
        return 1.0 / lam - width / np.expm1(lam * width)

    with np.errstate(over="ignore"):
        lam = optimize.brentq(lambda l: excess_mean(l) - target, 1e-8, 1e3)
    # Fisher information of the truncated exponential
    info = 1.0 / lam ** 2 - width ** 2 * np.exp(lam * width) / np.expm1(lam * width) ** 2
    slope_se = 1.0 / np.sqrt(n_in * info)
    frac = n_in / x.size
    prefactor = frac * lam / (np.exp(-lam * lo) - np.exp(-lam * hi))
    return {"slope": -lam, "slope_se": float(slope_se), "prefactor": float(prefactor),
            "n_window": int(n_in), "window": (lo, hi)}


def small_mass_bound_check(samples, q: SplitKernel, p: ModelParams, m_grid, min_hits: int = 10) -> SmallMassBoundReport:
    """Fit ``log P{xi <= m} ~ -c ln(1/m)**2 + C`` on small masses and test the bound.

    Only grid points below ``v / (2 beta)`` with at least ``min_hits`` samples
    enter the fit. The fit is compared with the power-law alternative
    ``log P ~ -c' ln(1/m) + C'``. A violation is flagged when the power law
    fits at least as well or the fitted ``c1`` is not positive. The largest
    standardized excess over the fitted bound is reported as a diagnostic.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    m = np.asarray(m_grid, dtype=float)
    n = x.size
    hits = np.searchsorted(x, m, side="right")
    prob = hits / n
    used = (m < p.v / (2.0 * p.beta)) & (m > 0) & (hits >= min_hits)
    if used.sum() < 3:
        raise InsufficientTailData("fewer than 3 grid points with enough hits below v/(2 beta)")
    L = np.log(1.0 / m[used])
    y = np.log(prob[used])
    # SE of log P from the binomial count
    se_log = np.sqrt((1.0 - prob[used]) / hits[used])
    w = 1.0 / se_log

    A2 = np.column_stack([-L ** 2, np.ones_like(L)])
    A1 = np.column_stack([-L, np.ones_like(L)])
    coef2, *_ = np.linalg.lstsq(A2 * w[:, None], y * w, rcond=None)
    coef1, *_ = np.linalg.lstsq(A1 * w[:, None], y * w, rcond=None)
    sse2 = float(np.sum(((A2 @ coef2 - y) * w) ** 2))
    sse1 = float(np.sum(((A1 @ coef1 - y) * w) ** 2))
    excess = (y - A2 @ coef2) / se_log
    worst = float(excess.max())
    violation = bool(sse1 <= sse2 or coef2[0] <= 0)
    table = [
        {"m": float(mi), "prob": float(pi), "hits": int(hi), "used": bool(ui)}
        for mi, pi, hi, ui in zip(m, prob, hits, used)
    ]
    return SmallMassBoundReport(m=m, prob=prob, hits=hits, used=used, c1_hat=float(coef2[0]),
                                intercept=float(coef2[1]), sse_log_squared=sse2, sse_log=sse1,
                                violation=violation, worst_excess_se=worst, table=table)


def bump(center: float, width: float):
    """Smooth test function supported on ``(center - width, center + width)`` and its derivative."""

    def phi(x):
        u = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(u) < 1
        out = np.zeros_like(u)
        out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
        return out

    def dphi(x):
        u = (np.asarray(x, dtype=float) - center) / width
        inside = np.abs(u) < 1
        out = np.zeros_like(u)
        ui = u[inside]
        out[inside] = np.exp(-1.0 / (1.0 - ui ** 2)) * (-2.0 * ui / (1.0 - ui ** 2) ** 2) / width
        return out

    return phi, dphi


def default_test_functions(p: ModelParams):
    s = p.v / p.beta
    return [bump(c * s, w * s) for c, w in [(0.5, 0.5), (1.0, 0.75), (1.5, 1.0), (2.5, 1.5), (0.75, 0.6)]]


@dataclass
class StationarityReport:
    residuals: np.ndarray
    se: np.ndarray

    @property
    def z(self) -> np.ndarray:
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(self.se > 0, np.abs(self.residuals) / self.se,
                            np.where(self.residuals == 0, 0.0, np.inf))

    @property
    def max_z(self) -> float:
        return float(self.z.max())


def stationarity_residual(pi_hat, q: SplitKernel, p: ModelParams, test_functions=None,
                          quad_nodes: int = 48) -> StationarityReport:
    """Weak-form stationarity check ``E[L phi(xi)] = 0`` under the sampled law.

    For each ``(phi, dphi)`` computes the Monte Carlo mean of
    ``v dphi(xi) + 2 beta * integral (phi(theta xi) - phi(xi)) q(theta) dtheta``
    and its standard error; the theta integral uses the kernel quadrature.
    ``max_z`` of the report is the largest ``|r_j| / se_j``.
    """
    xs = pi_hat.samples if isinstance(pi_hat, EmpiricalDistribution) else np.asarray(pi_hat, dtype=float)
    if test_functions is None:
        test_functions = default_test_functions(p)
    nodes, weights = q.quadrature(quad_nodes)
    res, ses = [], []
    for phi, dphi in test_functions:
        vals = np.empty(xs.size)
        for lo in range(0, xs.size, 65536):
            x = xs[lo:lo + 65536]
            jump = phi(x[:, None] * nodes[None, :]) @ weights - phi(x)
            vals[lo:lo + 65536] = p.v * dphi(x) + 2.0 * p.beta * jump
        mu, se = mean_se(vals)
        res.append(mu)
        ses.append(se)
    return StationarityReport(residuals=np.array(res), se=np.array(ses))


def critical_lambda(m: float, q: SplitKernel) -> float:
    """Leading-order saddle point ``ln(1/m) / (m E ln(1/theta))`` of the small-mass Chernoff bound."""
    return log(1.0 / m) / (m * log_inverse_mean(q))
