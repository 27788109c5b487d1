"""Exact simulation of the branching population with masses.

Each particle carries an exponential clock of rate ``beta + mu``. When it
rings the particle splits with probability ``beta / (beta + mu)`` (daughters
get ``theta * m`` and ``(1 - theta) * m``) and dies otherwise. Between events
every mass grows at speed ``v``.

Two engines implement these rules:

* :func:`simulate_population` runs one replicate with a time-ordered event
  queue and can log every event. It is the reference for event-level
  invariants.
* :func:`simulate_block` advances many replicates generation by generation,
  vectorised with numpy. Sub-populations of distinct particles evolve
  independently, so processing a whole generation at once is exact; it only
  gives up the global time order, which no returned quantity needs.
  :func:`replicate_ensemble` uses this engine.
"""

from __future__ import annotations

import heapq
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .counting import gw_limit_survival_cdf, gw_pmf, gw_support
from .errors import InsufficientSamples, PopulationCap
from .kernels import SplitKernel
from .params import DerivedParams, ModelParams, validate_params
from .rng import as_generator, stream
from .stats import ComparisonReport, empirical_pmf, ks_statistic, mean_se, total_variation

DEFAULT_CAP = 10_000_000
# particles per vectorised work block; fixes the block layout independently of workers
BLOCK_PARTICLES = 1_000_000
MAX_BLOCK_REPLICATES = 4096


@dataclass
class Particle:
    mass: float
    birth_time: float

    def mass_at(self, t: float, v: float) -> float:
        return self.mass + v * (t - self.birth_time)


@dataclass
class PopulationSnapshot:
    t: float
    masses: np.ndarray
    positions: np.ndarray | None = None
    events: list | None = field(default=None, repr=False)

    @property
    def N(self) -> int:
        return int(self.masses.size)

    @property
    def M(self) -> float:
        return float(self.masses.sum())

    @property
    def extinct(self) -> bool:
        return self.masses.size == 0


def simulate_population(p: ModelParams, q: SplitKernel, m0: float, t_end: float, seed=None,
                        cap: int = DEFAULT_CAP, record: bool = False) -> PopulationSnapshot:
    """One replicate from a single particle of mass ``m0``.

    With ``record`` the snapshot carries an event log: one dict per event with
    the event time, kind, parent mass, daughter masses and the population
    ``(N, M)`` just before and after.
    """
    validate_params(p)
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    rng = as_generator(seed)
    rate = p.beta + p.mu
    p_split = p.beta / rate
    tie = itertools.count()
    queue = [(rng.exponential(1.0 / rate), next(tie), Particle(m0, 0.0))]
    log = [] if record else None

    def total_mass(t):
        return sum(part.mass_at(t, p.v) for _, _, part in queue)

    while queue and queue[0][0] <= t_end:
        t_ev, _, part = heapq.heappop(queue)
        if record:
            before = (len(queue) + 1, total_mass(t_ev) + part.mass_at(t_ev, p.v))
        m = part.mass_at(t_ev, p.v)
        if rng.random() < p_split:
            theta = float(q.sample(rng))
            daughters = (theta * m, (1.0 - theta) * m)
            for md in daughters:
                heapq.heappush(queue, (t_ev + rng.exponential(1.0 / rate), next(tie), Particle(md, t_ev)))
            kind = "split"
        else:
            daughters = ()
            kind = "death"
        if len(queue) > cap:
            raise PopulationCap(f"live population exceeded cap={cap} at t={t_ev:.4g}")
        if record:
            log.append({"t": t_ev, "kind": kind, "parent_mass": m, "daughters": daughters,
                        "before": before, "after": (len(queue), total_mass(t_ev))})
    masses = np.array([part.mass_at(t_end, p.v) for _, _, part in queue])
    return PopulationSnapshot(t=t_end, masses=masses, events=log)


def simulate_block(p: ModelParams, q: SplitKernel, m0: float, times, n_rep: int,
                   rng: np.random.Generator, cap: int = DEFAULT_CAP, spatial: bool = False,
                   first_replicate: int = 0):
    """Advance ``n_rep`` independent replicates and observe them at ``times``.

    Returns one tuple ``(replicate, mass, position)`` of flat arrays per
    observation time (``position`` is ``None`` unless ``spatial``; it has
    shape ``(n, dim)`` otherwise). Positions follow Brownian motion with
    generator ``kappa * Laplacian``: a Gaussian increment of variance
    ``2 kappa dt`` per coordinate, drawn exactly over each elapsed interval.
    """
    times = np.sort(np.atleast_1d(np.asarray(times, dtype=float)))
    horizon = times[-1]
    rate = p.beta + p.mu
    p_split = p.beta / rate
    dim = int(p.dim) if spatial else 0
    sd = math.sqrt(2.0 * p.kappa)

    rep = np.arange(n_rep, dtype=np.int64)
    birth = np.zeros(n_rep)
    mass0 = np.full(n_rep, float(m0))
    pos = np.zeros((n_rep, dim))
    out = [([], [], []) for _ in times]

    while rep.size:
        n = rep.size
        end = birth + rng.exponential(1.0 / rate, n)
        if spatial:
            cur_t = birth.copy()
            cur_pos = pos.copy()
        for j, t in enumerate(times):
            alive = (birth <= t) & (end > t)
            if not alive.any():
                continue
            idx = np.flatnonzero(alive)
            out[j][0].append(rep[idx])
            out[j][1].append(mass0[idx] + p.v * (t - birth[idx]))
            if spatial:
                dt = t - cur_t[idx]
                cur_pos[idx] += sd * np.sqrt(dt)[:, None] * rng.standard_normal((idx.size, dim))
                cur_t[idx] = t
                out[j][2].append(cur_pos[idx].copy())
        fired = np.flatnonzero(end <= horizon)
        splits = fired[rng.random(fired.size) < p_split]
        k = splits.size
        if k == 0:
            break
        parent_mass = mass0[splits] + p.v * (end[splits] - birth[splits])
        theta = np.asarray(q.sample(rng, k))
        rep = np.concatenate([rep[splits], rep[splits]])
        birth = np.concatenate([end[splits], end[splits]])
        mass0 = np.concatenate([theta * parent_mass, (1.0 - theta) * parent_mass])
        if spatial:
            dt = end[splits] - cur_t[splits]
            at_split = cur_pos[splits] + sd * np.sqrt(dt)[:, None] * rng.standard_normal((k, dim))
            pos = np.concatenate([at_split, at_split])
        counts = np.bincount(rep, minlength=n_rep)
        if counts.max() > 2 * cap:
            r = int(np.argmax(counts))
            raise PopulationCap(f"replicate {first_replicate + r} exceeded cap={cap}",
                                replicate=first_replicate + r)

    result = []
    for j in range(times.size):
        reps, masses, poss = out[j]
        reps = np.concatenate(reps) if reps else np.zeros(0, dtype=np.int64)
        masses = np.concatenate(masses) if masses else np.zeros(0)
        order = np.argsort(reps, kind="stable")
        reps, masses = reps[order], masses[order]
        if spatial:
            poss = np.concatenate(poss)[order] if poss else np.zeros((0, dim))
        else:
            poss = None
        counts = np.bincount(reps, minlength=n_rep)
        if counts.size and counts.max() > cap:
            r = int(np.argmax(counts))
            raise PopulationCap(f"replicate {first_replicate + r} exceeded cap={cap}",
                                replicate=first_replicate + r)
        result.append((reps, masses, poss))
    return result


def block_layout(R: int, expected_size: float) -> list[tuple[int, int]]:
    """Split ``R`` replicates into ``(start, count)`` blocks.

    Depends only on ``R`` and the expected population size, never on the
    worker count.
    """
    per_block = int(max(1, min(MAX_BLOCK_REPLICATES, BLOCK_PARTICLES // max(expected_size, 1.0))))
    return [(s, min(per_block, R - s)) for s in range(0, R, per_block)]


def map_blocks(func, blocks, workers: int = 1):
    """Apply ``func(block_index, start, count)`` to every block, results in block order."""
    args = [(i, s, c) for i, (s, c) in enumerate(blocks)]
    if workers <= 1 or len(args) <= 1:
        return [func(*a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, *zip(*args)))


@dataclass
class EnsembleStats:
    """Per-replicate ``(N, M)`` at time ``t`` plus optional retained masses."""

    t: float
    params: ModelParams
    m0: float
    N: np.ndarray
    M: np.ndarray
    masses: np.ndarray | None = field(default=None, repr=False)
    mass_replicate: np.ndarray | None = field(default=None, repr=False)

    @property
    def R(self) -> int:
        return int(self.N.size)

    @property
    def mean_N(self):
        return mean_se(self.N)[0]

    @property
    def se_N(self):
        return mean_se(self.N)[1]

    @property
    def mean_M(self):
        return mean_se(self.M)[0]

    @property
    def se_M(self):
        return mean_se(self.M)[1]

    @property
    def extinct_fraction(self) -> float:
        return float(np.mean(self.N == 0))

    def summary(self) -> dict:
        return {
            "params": vars(self.params).copy(),
            "m0": self.m0,
            "t": self.t,
            "R": self.R,
            "mean_N": self.mean_N,
            "se_N": self.se_N,
            "mean_M": self.mean_M,
            "se_M": self.se_M,
            "extinct_fraction": self.extinct_fraction,
        }

    def rows(self):
        """CSV rows ``(replicate, N, M)``."""
        return [(r, int(n), float(m)) for r, (n, m) in enumerate(zip(self.N, self.M))]


def _ensemble_block(i, start, count, *, p, q, m0, t_end, seed, cap, keep_masses):
    rng = stream(seed, "gw-ensemble", i)
    ((reps, masses, _),) = simulate_block(p, q, m0, [t_end], count, rng, cap=cap, first_replicate=start)
    N = np.bincount(reps, minlength=count)
    M = np.bincount(reps, weights=masses, minlength=count)
    if keep_masses:
        return N, M, masses, reps + start
    return N, M, None, None


def replicate_ensemble(p: ModelParams, q: SplitKernel, m0: float, t_end: float, R: int, seed: int,
                       cap: int = DEFAULT_CAP, workers: int = 1, keep_masses: bool = False) -> EnsembleStats:
    """``R`` independent replicates; extinct ones count as ``(N, M) = (0, 0)``."""
    d = validate_params(p)
    if R < 1:
        raise ValueError("R must be >= 1")
    if t_end < 0:
        raise ValueError("t_end must be >= 0")
    blocks = block_layout(R, math.exp(d.delta * t_end))
    func = partial(_ensemble_block, p=p, q=q, m0=m0, t_end=t_end, seed=seed, cap=cap, keep_masses=keep_masses)
    parts = map_blocks(func, blocks, workers)
    N = np.concatenate([x[0] for x in parts])
    M = np.concatenate([x[1] for x in parts])
    masses = reps = None
    if keep_masses:
        masses = np.concatenate([x[2] for x in parts])
        reps = np.concatenate([x[3] for x in parts])
    return EnsembleStats(t=t_end, params=p, m0=m0, N=N, M=M, masses=masses, mass_replicate=reps)


def compare_counts_law(stats: EnsembleStats, d: DerivedParams, t: float | None = None,
                       min_samples: int = 1000) -> ComparisonReport:
    """Total variation of the empirical N(t) law against the closed form, and
    KS distance of ``N / exp(delta t)`` among survivors against the survival
    part of the limit law."""
    if stats.R < min_samples:
        raise InsufficientSamples(f"need at least {min_samples} replicates, got {stats.R}")
    t = stats.t if t is None else t
    K = max(int(stats.N.max()), gw_support(t, d))
    emp = empirical_pmf(stats.N, K)
    ref = gw_pmf(np.arange(K + 1), t, d)
    tv = total_variation(emp, ref)
    surv = stats.N[stats.N > 0] / math.exp(d.delta * t)
    ks = ks_statistic(surv, lambda x: gw_limit_survival_cdf(x, d.gamma)) if surv.size else float("nan")
    return ComparisonReport(n=stats.R, tv=tv, ks=ks, extra={"survivors": int(surv.size)})
