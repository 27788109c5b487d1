"""Branching Brownian motion with masses and its front statistics.

Particles diffuse with generator ``kappa * Laplacian`` (variance ``2 kappa t``
per coordinate) while masses follow the non-spatial rules. Spatial motion is
independent of branching and masses, so the expected particle density from one
particle at the origin is::

    l1(t, 0, y) = exp(-|y|^2 / (4 kappa t) + beta t) / (4 pi kappa t)^(d/2)

and the expected mass in a region factorises into a heat-kernel integral times
``exp((beta - mu) t)`` times the tagged-process mean mass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np
from scipy import optimize, special
from scipy.integrate import solve_ivp

from .errors import FrontUndefined, InsufficientSamples, IntegrationFailure
from .kernels import SplitKernel
from .mass_process import tagged_mean
from .params import ModelParams, validate_params
from .population import DEFAULT_CAP, PopulationSnapshot, block_layout, map_blocks, simulate_block
from .rng import as_generator, stream
from .stats import ComparisonReport, ks_statistic, mean_se


@dataclass
class SpatialParticle:
    position: np.ndarray
    mass: float


# regions


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``lo <= x <= hi``; a 1-d interval when given scalars."""

    lo: tuple
    hi: tuple

    def __init__(self, lo, hi):
        object.__setattr__(self, "lo", tuple(np.atleast_1d(np.asarray(lo, dtype=float))))
        object.__setattr__(self, "hi", tuple(np.atleast_1d(np.asarray(hi, dtype=float))))

    def contains(self, x):
        x = np.asarray(x, dtype=float).reshape(len(x), -1)
        return np.all((x >= np.array(self.lo)) & (x <= np.array(self.hi)), axis=1)

    def gaussian_mass(self, center, var: float) -> float:
        """``P(center + N(0, var I) in box)``."""
        c = np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)), (len(self.lo),))
        sd = math.sqrt(var)
        lo = (np.array(self.lo) - c) / sd
        hi = (np.array(self.hi) - c) / sd
        return float(np.prod(special.ndtr(hi) - special.ndtr(lo)))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __init__(self, center, radius):
        object.__setattr__(self, "center", tuple(np.atleast_1d(np.asarray(center, dtype=float))))
        object.__setattr__(self, "radius", float(radius))

    def contains(self, x):
        x = np.asarray(x, dtype=float).reshape(len(x), -1)
        return np.sum((x - np.array(self.center)) ** 2, axis=1) <= self.radius ** 2

    def gaussian_mass(self, center, var: float) -> float:
        c = np.array(self.center) - np.broadcast_to(np.atleast_1d(np.asarray(center, dtype=float)), (len(self.center),))
        d = len(self.center)
        if d == 1:
            return Box(c[0] - self.radius, c[0] + self.radius).gaussian_mass(0.0, var)
        # noncentral chi-square with d degrees of freedom
        from scipy.stats import ncx2, chi2
        nc = float(np.sum(c ** 2) / var)
        x = self.radius ** 2 / var
        return float(chi2.cdf(x, d) if nc == 0 else ncx2.cdf(x, d, nc))


class Everywhere:
    def contains(self, x):
        return np.ones(len(x), dtype=bool)

    def gaussian_mass(self, center, var: float) -> float:
        return 1.0


# simulation


def simulate_bbm(p: ModelParams, q: SplitKernel, m0: float, t_end: float, seed=None,
                 cap: int = DEFAULT_CAP) -> PopulationSnapshot:
    """One replicate started from a particle of mass ``m0`` at the origin."""
    validate_params(p)
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    rng = as_generator(seed)
    ((_, masses, pos),) = simulate_block(p, q, m0, [t_end], 1, rng, cap=cap, spatial=True)
    return PopulationSnapshot(t=t_end, masses=masses, positions=pos)


def _block_reduce(i, start, count, *, p, q, m0, times, seed, cap, reducer, purpose):
    rng = stream(seed, purpose, i)
    obs = simulate_block(p, q, m0, times, count, rng, cap=cap, spatial=True, first_replicate=start)
    return reducer(obs, count)


def bbm_ensemble(p: ModelParams, q: SplitKernel, m0: float, times, R: int, seed: int, reducer,
                 cap: int = DEFAULT_CAP, workers: int = 1, purpose: str = "bbm"):
    """Run ``R`` replicates in blocks and apply ``reducer(observations, n_rep)`` per block.

    ``observations`` is the list returned by :func:`simulate_block` for the
    sorted ``times``; replicate indices inside it are block-local. Returns the
    per-block reductions in replicate order.
    """
    d = validate_params(p)
    times = sorted(np.atleast_1d(np.asarray(times, dtype=float)).tolist())
    blocks = block_layout(R, math.exp(d.delta * times[-1]))
    func = partial(_block_reduce, p=p, q=q, m0=m0, times=times, seed=seed, cap=cap,
                   reducer=reducer, purpose=purpose)
    return map_blocks(func, blocks, workers)


def _region_reducer(obs, n_rep, regions):
    reps, masses, pos = obs[0]
    N = np.zeros((n_rep, len(regions)))
    M = np.zeros((n_rep, len(regions)))
    for j, reg in enumerate(regions):
        inside = reg.contains(pos)
        N[:, j] = np.bincount(reps[inside], minlength=n_rep)
        M[:, j] = np.bincount(reps[inside], weights=masses[inside], minlength=n_rep)
    sq = np.bincount(reps, weights=np.sum(pos ** 2, axis=1), minlength=n_rep)
    return N, M, sq, np.bincount(reps, minlength=n_rep)


@dataclass
class RegionStats:
    """Per-replicate particle counts ``N`` and masses ``M`` in each region."""

    regions: list
    N: np.ndarray
    M: np.ndarray
    sum_sq_position: np.ndarray
    total: np.ndarray


def region_ensemble(p: ModelParams, q: SplitKernel, m0: float, t: float, regions, R: int, seed: int,
                    cap: int = DEFAULT_CAP, workers: int = 1) -> RegionStats:
    parts = bbm_ensemble(p, q, m0, [t], R, seed, partial(_region_reducer, regions=list(regions)),
                         cap=cap, workers=workers, purpose="bbm-regions")
    return RegionStats(regions=list(regions), N=np.concatenate([x[0] for x in parts]),
                       M=np.concatenate([x[1] for x in parts]),
                       sum_sq_position=np.concatenate([x[2] for x in parts]),
                       total=np.concatenate([x[3] for x in parts]))


# mean density and the density front


def mean_density(t: float, y, p: ModelParams) -> float:
    """Expected particle density at ``y`` from one particle at the origin (no deaths)."""
    if t <= 0:
        raise ValueError("t must be > 0")
    y = np.asarray(y, dtype=float)
    r2 = np.sum(y ** 2) if y.ndim else float(y) ** 2
    d = p.dim
    return float(math.exp(-r2 / (4 * p.kappa * t) + p.beta * t) / (4 * math.pi * p.kappa * t) ** (d / 2))


def mean_count(t: float, region, p: ModelParams, x=0.0) -> float:
    """``E N(t, region)`` from one particle at ``x``: ``e^{(beta - mu) t}`` times a Gaussian probability."""
    return math.exp((p.beta - p.mu) * t) * region.gaussian_mass(x, 2 * p.kappa * t)


def density_front_radius(t: float, p: ModelParams) -> float:
    """Radius where the mean density equals one, ``sqrt(4 kappa t (beta t - (d/2) ln(4 pi kappa t)))``."""
    inner = p.beta * t - 0.5 * p.dim * math.log(4 * math.pi * p.kappa * t)
    if t <= 0 or inner < 0:
        raise FrontUndefined(f"mean density stays below 1 at t={t}")
    return math.sqrt(4 * p.kappa * t * inner)


def density_front_radius_numeric(t: float, p: ModelParams, xtol: float = 1e-14) -> float:
    """Same radius by root finding on ``log l1(t, 0, r) = 0``."""
    def log_l1(r):
        return -r * r / (4 * p.kappa * t) + p.beta * t - 0.5 * p.dim * math.log(4 * math.pi * p.kappa * t)

    if log_l1(0.0) < 0:
        raise FrontUndefined(f"mean density stays below 1 at t={t}")
    hi = 1.0
    while log_l1(hi) > 0:
        hi *= 2
    return optimize.brentq(log_l1, 0.0, hi, xtol=xtol, rtol=4 * np.finfo(float).eps)


def front_leading_radius(t: float, p: ModelParams) -> float:
    return 2.0 * math.sqrt(p.kappa * p.beta) * t


def _unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def _front_reducer(obs, n_rep, edges):
    return np.stack([np.histogram(np.sqrt(np.sum(pos ** 2, axis=1)), bins=edges)[0] for _, _, pos in obs])


@dataclass
class FrontStats:
    t: np.ndarray
    radius: np.ndarray
    radius_bin: np.ndarray
    exact: np.ndarray
    leading: np.ndarray
    speed: float
    speed_se: float
    R: int
    table: list = field(default_factory=list)


def front_from_histograms(times, hist, edges, R: int, dim: int, threshold: float = 1.0):
    """Outermost radius where the ensemble-mean density reaches ``threshold``.

    ``hist[j]`` counts particle radii per shell at ``times[j]``, summed over
    ``R`` replicates. Returns ``(radius_bin, radius)``: the centre of the
    outermost shell at or above threshold, and the crossing refined by linear
    interpolation of the log density between that shell and the next.
    """
    shell = _unit_ball_volume(dim) * (edges[1:] ** dim - edges[:-1] ** dim)
    centers = 0.5 * (edges[1:] + edges[:-1])
    raw, refined = [], []
    for counts in hist:
        dens = counts / (R * shell)
        above = np.flatnonzero(dens >= threshold)
        if above.size == 0:
            raw.append(np.nan)
            refined.append(np.nan)
            continue
        k = above[-1]
        raw.append(centers[k])
        if k + 1 < dens.size and dens[k + 1] > 0:
            l0, l1 = math.log(dens[k]), math.log(dens[k + 1])
            frac = (l0 - math.log(threshold)) / (l0 - l1)
            refined.append(centers[k] + frac * (centers[k + 1] - centers[k]))
        else:
            refined.append(centers[k] + 0.5 * (edges[k + 1] - edges[k]))
    return np.array(raw), np.array(refined)


def fit_speed(t, r):
    """Least-squares slope of ``r`` against ``t`` and its standard error."""
    t = np.asarray(t, dtype=float)
    r = np.asarray(r, dtype=float)
    A = np.column_stack([t, np.ones_like(t)])
    coef, res, *_ = np.linalg.lstsq(A, r, rcond=None)
    dof = max(t.size - 2, 1)
    resid = r - A @ coef
    s2 = float(resid @ resid) / dof
    se = math.sqrt(s2 / np.sum((t - t.mean()) ** 2))
    return float(coef[0]), se


def empirical_front(p: ModelParams, q: SplitKernel, times, R: int, seed: int, bin_width: float = 1.0,
                    threshold: float = 1.0, m0: float = 1.0, cap: int = DEFAULT_CAP,
                    workers: int = 1) -> FrontStats:
    """Density front of an ensemble of branching Brownian motions.

    Particle radii are binned in shells of ``bin_width`` and the mean density
    is the total count over ``R`` times the shell volume. The speed is the
    least-squares slope of the refined radius over the second half of the time
    window.
    """
    validate_params(p)
    times = np.sort(np.atleast_1d(np.asarray(times, dtype=float)))
    r_max = 2 * math.sqrt(p.kappa * p.beta) * times[-1] + 12 * math.sqrt(2 * p.kappa * times[-1]) + 2 * bin_width
    edges = np.arange(0.0, r_max + bin_width, bin_width)
    parts = bbm_ensemble(p, q, m0, times, R, seed, partial(_front_reducer, edges=edges), cap=cap,
                         workers=workers, purpose="bbm-front")
    hist = np.sum(parts, axis=0)
    raw, refined = front_from_histograms(times, hist, edges, R, p.dim, threshold)
    exact = np.array([density_front_radius(t, p) if _front_exists(t, p) else np.nan for t in times])
    leading = np.array([front_leading_radius(t, p) for t in times])
    half = times >= times[0] + 0.5 * (times[-1] - times[0])
    ok = half & np.isfinite(refined)
    if ok.sum() < 2:
        raise FrontUndefined("fewer than two front measurements in the fitting window")
    speed, se = fit_speed(times[ok], refined[ok])
    table = [{"t": float(t), "empirical_radius": float(r), "bin_radius": float(b), "exact_radius": float(e),
              "leading_radius": float(l)} for t, r, b, e, l in zip(times, refined, raw, exact, leading)]
    return FrontStats(t=times, radius=refined, radius_bin=raw, exact=exact, leading=leading, speed=speed,
                      speed_se=se, R=R, table=table)


def _front_exists(t, p):
    return t > 0 and p.beta * t - 0.5 * p.dim * math.log(4 * math.pi * p.kappa * t) >= 0


# traveling waves of  kappa phi'' + c phi' + beta phi (1 - phi) = 0


@dataclass
class WaveProfile:
    c: float
    z: np.ndarray
    phi: np.ndarray
    classification: str


def linear_classification(c: float, p: ModelParams) -> str:
    """Type of the equilibrium ``phi = 0`` from the sign of ``c^2 - 4 kappa beta``."""
    return "monotone-front" if c * c >= 4 * p.kappa * p.beta else "oscillatory"


def _unstable_rate(c, p):
    # growth rate of the deviation from phi = 1
    return (-c + math.sqrt(c * c + 4 * p.kappa * p.beta)) / (2 * p.kappa)


def crosses_zero(c: float, p: ModelParams, z_max: float | None = None, eps: float = 1e-6,
                 rtol: float = 1e-10) -> bool:
    """Whether the orbit leaving ``phi = 1`` downward ever reaches ``phi = 0``.

    Integrates ``u = ln phi`` and ``w = phi' / phi``, which stay finite while
    ``phi > 0`` however small ``phi`` gets; reaching zero shows up as ``w``
    running off to minus infinity.
    """
    k, b = p.kappa, p.beta
    lam = _unstable_rate(c, p)
    if z_max is None:
        z_max = 4000.0 * math.sqrt(k / b)
    w_floor = -1e3 * (1.0 + c / k + math.sqrt(b / k))

    def rhs(z, y):
        u, w = y
        return [w, -(c / k) * w - (b / k) * (-math.expm1(u)) - w * w]

    def blow(z, y):
        return y[1] - w_floor

    blow.terminal = True
    y0 = [math.log1p(-eps), -eps * lam / (1 - eps)]
    sol = solve_ivp(rhs, (0.0, z_max), y0, method="DOP853", rtol=rtol, atol=1e-12, events=blow)
    if sol.status == -1:
        raise IntegrationFailure(sol.message)
    return bool(sol.t_events[0].size)


def traveling_wave(c: float, p: ModelParams, z_span=None, tol: float = 1e-10,
                   n_points: int = 801, eps: float = 1e-6) -> WaveProfile:
    """Profile on the unstable manifold of ``phi = 1`` for speed ``c``.

    The profile is integrated over ``z_span`` and stops early where it
    reaches zero. The default span covers the departure from ``1 - eps`` plus
    twenty decay lengths ``c / beta`` of the slowest front tail. The
    classification comes from :func:`crosses_zero`, which follows the orbit
    far beyond ``z_span``.
    """
    if not c > 0:
        raise ValueError("wave speed must be positive")
    k, b = p.kappa, p.beta
    lam = _unstable_rate(c, p)
    if z_span is None:
        z_span = (0.0, math.log(1.0 / eps) / lam + 20.0 * c / b)

    def rhs(z, y):
        phi, dphi = y
        return [dphi, -(c * dphi + b * phi * (1 - phi)) / k]

    def hit_zero(z, y):
        return y[0]

    hit_zero.terminal = True
    hit_zero.direction = -1

    def escape(z, y):
        return abs(y[0]) - 10.0

    escape.terminal = True
    z0, z1 = z_span
    sol = solve_ivp(rhs, (z0, z1), [1 - eps, -eps * lam], method="DOP853", rtol=tol, atol=1e-14,
                    events=[hit_zero, escape], dense_output=True)
    if sol.status == -1 or sol.t_events[1].size:
        raise IntegrationFailure(f"wave integration failed at c={c}")
    z_end = sol.t[-1]
    z = np.linspace(z0, z_end, n_points)
    phi = sol.sol(z)[0]
    kind = "oscillatory" if sol.t_events[0].size or crosses_zero(c, p) else "monotone-front"
    return WaveProfile(c=c, z=z, phi=phi, classification=kind)


def minimal_speed(p: ModelParams, tol: float = 1e-4, lo: float | None = None, hi: float | None = None) -> float:
    """Smallest speed with a monotone front, by bisection on :func:`crosses_zero`."""
    scale = math.sqrt(p.kappa * p.beta)
    lo = 0.1 * scale if lo is None else lo
    hi = 4.0 * scale if hi is None else hi
    if not crosses_zero(lo, p):
        raise ValueError(f"lower bracket c={lo} already gives a monotone front")
    if crosses_zero(hi, p):
        raise ValueError(f"upper bracket c={hi} is still oscillatory")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if crosses_zero(mid, p):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# first moment and occupation laws


def spatial_first_moment(t: float, x, m: float, region, p: ModelParams, q: SplitKernel | None = None) -> float:
    """``E_{x,m} M(t, region)``: heat-kernel mass of the region times
    ``e^{(beta - mu) t}`` times the tagged mean mass. ``q`` enters only through
    ``E theta = 1/2`` and is accepted for symmetry with the simulators."""
    if t <= 0:
        raise ValueError("t must be > 0")
    return mean_count(t, region, p, x) * float(tagged_mean(p, m, t))


def occupation_law(p: ModelParams, q: SplitKernel, t: float, center, radius: float, R: int, seed: int,
                   m0: float = 1.0, cap: int = DEFAULT_CAP, workers: int = 1, min_samples: int = 1000):
    """Law of ``N(t, B) / E N(t, B)`` for the ball ``B = B_radius(center)``.

    The normalising mean is the ensemble average. Returns a
    :class:`ComparisonReport` with the KS distance to Exp(1). Balls centred
    outside the density front are not tested; the report then carries
    ``outside_front = True`` and no KS value.
    """
    if R < min_samples:
        raise InsufficientSamples(f"need at least {min_samples} replicates, got {R}")
    c = np.atleast_1d(np.asarray(center, dtype=float))
    outside = _front_exists(t, p) and float(np.linalg.norm(c)) > density_front_radius(t, p)
    expected = mean_count(t, Ball(c, radius), p)
    if outside or not _front_exists(t, p):
        return ComparisonReport(n=R, extra={"outside_front": True, "expected_count": expected})
    ball = Ball(c, radius)
    stats = region_ensemble(p, q, m0, t, [ball], R, seed, cap=cap, workers=workers)
    counts = stats.N[:, 0]
    mean, se = mean_se(counts)
    ratio = counts / mean
    ks = ks_statistic(ratio, lambda a: -np.expm1(-np.maximum(a, 0.0)))
    return ComparisonReport(n=R, ks=ks, extra={"outside_front": False, "mean_count": mean, "mean_se": se,
                                               "expected_count": expected,
                                               "variance_ratio": float(np.var(ratio, ddof=1))})
