"""Empirical distributions and goodness-of-fit distances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sps


@dataclass
class ComparisonReport:
    """Distances between an empirical sample and a reference law."""

    n: int
    tv: float | None = None
    ks: float | None = None
    ks_pvalue: float | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"n": self.n, "tv": self.tv, "ks": self.ks, "ks_pvalue": self.ks_pvalue}
        out.update(self.extra)
        return out


def mean_se(x) -> tuple[float, float]:
    """Sample mean and its standard error ``sd / sqrt(n)``."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if n < 2:
        return float(x.mean()) if n else float("nan"), float("nan")
    return float(x.mean()), float(x.std(ddof=1) / np.sqrt(n))


class EmpiricalDistribution:
    """Samples with optional nonnegative weights."""

    def __init__(self, samples, weights=None):
        self.samples = np.asarray(samples, dtype=float).ravel()
        if weights is None:
            self.weights = None
        else:
            w = np.asarray(weights, dtype=float).ravel()
            if w.shape != self.samples.shape or np.any(w < 0):
                raise ValueError("weights must be nonnegative and match samples")
            self.weights = w / w.sum()

    def __len__(self):
        return self.samples.size

    def mean(self) -> float:
        return float(np.average(self.samples, weights=self.weights))

    def moment(self, k: int) -> float:
        return float(np.average(self.samples ** k, weights=self.weights))

    def expect(self, f) -> tuple[float, float]:
        """Mean of ``f(samples)`` with standard error (unweighted samples)."""
        if self.weights is not None:
            raise NotImplementedError("standard errors need unweighted samples")
        return mean_se(f(self.samples))

    def cdf(self, x):
        order = np.argsort(self.samples, kind="stable")
        xs = self.samples[order]
        w = np.full(xs.size, 1.0 / xs.size) if self.weights is None else self.weights[order]
        cw = np.concatenate([[0.0], np.cumsum(w)])
        return cw[np.searchsorted(xs, x, side="right")]

    def histogram(self, bins, range=None, density=True):
        return np.histogram(self.samples, bins=bins, range=range, weights=self.weights, density=density)

    def ks(self, cdf) -> ComparisonReport:
        if self.weights is not None:
            raise NotImplementedError("KS against a CDF uses unweighted samples")
        res = sps.kstest(self.samples, cdf)
        return ComparisonReport(n=len(self), ks=float(res.statistic), ks_pvalue=float(res.pvalue))

    def ks_two_sample(self, other: "EmpiricalDistribution") -> ComparisonReport:
        res = sps.ks_2samp(self.samples, other.samples)
        return ComparisonReport(n=min(len(self), len(other)), ks=float(res.statistic), ks_pvalue=float(res.pvalue))


def empirical_pmf(counts, support_max: int | None = None) -> np.ndarray:
    counts = np.asarray(counts, dtype=np.int64)
    size = int(counts.max()) + 1 if counts.size else 1
    if support_max is not None:
        size = max(size, support_max + 1)
    return np.bincount(counts, minlength=size) / max(counts.size, 1)


def total_variation(p, q) -> float:
    """``sum |p - q| / 2`` after padding to a common support; missing mass in
    a truncated reference counts toward the distance."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n = max(p.size, q.size)
    p = np.pad(p, (0, n - p.size))
    q = np.pad(q, (0, n - q.size))
    slack = abs((1.0 - p.sum()) - (1.0 - q.sum()))
    return float(0.5 * (np.abs(p - q).sum() + slack))


def ks_statistic(samples, cdf) -> float:
    """Sup distance between the empirical CDF of ``samples`` and ``cdf``;
    handles ties, so it is valid for lattice data."""
    return float(sps.kstest(np.asarray(samples, dtype=float), cdf).statistic)


def ks_two_sample(x, y) -> float:
    return float(sps.ks_2samp(x, y).statistic)
