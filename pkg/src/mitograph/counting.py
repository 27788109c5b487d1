"""Closed-form laws of the particle count N(t) (linear birth-death process).

Starting from one particle, N(t) is zero-modified geometric. With
``E = exp(delta t)``::

    P(N = 0) = gamma (E - 1) / (E - gamma)
    P(N = k) = (1 - gamma)**2 E (E - 1)**(k - 1) / (E - gamma)**(k + 1),  k >= 1

Every factor is nonnegative, so the formulas are evaluated as written (in
log space for large ``k``).
"""

from __future__ import annotations

import numpy as np

from .params import DerivedParams


def _ratio_terms(t, d: DerivedParams):
    # em1 = E - 1 and emg = E - gamma without cancellation for small delta*t
    em1 = np.expm1(d.delta * t)
    emg = em1 + (1.0 - d.gamma)
    return em1, emg


def gw_pmf(k, t: float, d: DerivedParams):
    """``P(N(t) = k)`` for one or many ``k``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    k = np.asarray(k)
    em1, emg = _ratio_terms(t, d)
    g = d.gamma
    kk = np.maximum(k, 1).astype(float)
    if em1 == 0.0:
        out = np.where(k == 1, 1.0, 0.0)
    else:
        log_pk = (
            2.0 * np.log1p(-g)
            + d.delta * t
            + (kk - 1.0) * np.log(em1)
            - (kk + 1.0) * np.log(emg)
        )
        out = np.where(k >= 1, np.exp(log_pk), g * em1 / emg)
    out = np.where(k < 0, 0.0, out)
    return float(out) if out.ndim == 0 else out


def gw_survival_ratio(t: float, d: DerivedParams) -> float:
    """Success probability ``p`` of the geometric law of N(t) given N(t) > 0."""
    _, emg = _ratio_terms(t, d)
    return (1.0 - d.gamma) / emg


def gw_support(t: float, d: DerivedParams, tail: float = 1e-12) -> int:
    """Smallest K with ``P(N(t) > K) <= tail``."""
    p = gw_survival_ratio(t, d)
    if p >= 1.0:
        return 1
    survive = 1.0 - gw_pmf(0, t, d)
    # P(N > K) = survive * (1 - p)**K
    return max(1, int(np.ceil(np.log(tail / survive) / np.log1p(-p))))


def gw_mean(t: float, d: DerivedParams) -> float:
    """``E N(t) = exp(delta t)``."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return float(np.exp(d.delta * t))


def gw_limit_cdf(x, gamma: float):
    """CDF of ``W = lim N(t) exp(-delta t)``.

    ``W`` has an atom ``gamma`` at zero (extinction) and, given survival, is
    exponential with mean ``1 / (1 - gamma)`` so that ``E W = 1``. At
    ``gamma = 0`` this is the Exp(1) law.
    """
    if not 0.0 <= gamma < 1.0:
        raise ValueError("gamma must lie in [0, 1)")
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0, 0.0, gamma + (1.0 - gamma) * -np.expm1(-(1.0 - gamma) * np.maximum(x, 0.0)))
    return float(out) if out.ndim == 0 else out


def gw_limit_survival_cdf(x, gamma: float):
    """CDF of ``W`` conditioned on ``W > 0``."""
    x = np.asarray(x, dtype=float)
    out = np.where(x < 0, 0.0, -np.expm1(-(1.0 - gamma) * np.maximum(x, 0.0)))
    return float(out) if out.ndim == 0 else out


def gw_limit_density_displayed(x, gamma: float):
    """Absolutely continuous part ``(1 - gamma) exp(-x)`` of the alternative
    limit law with atom ``gamma`` at zero.

    Its mean is ``1 - gamma``, which disagrees with ``E W = 1`` unless
    ``gamma = 0``; kept for comparison only.
    """
    x = np.asarray(x, dtype=float)
    return np.where(x >= 0, (1.0 - gamma) * np.exp(-np.maximum(x, 0.0)), 0.0)
