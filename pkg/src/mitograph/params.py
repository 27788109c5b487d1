"""Model parameters and their validation."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import NegativeDiffusion, NonpositiveRate, SubcriticalOrCritical


@dataclass(frozen=True)
class ModelParams:
    """Rates and speeds of the branching model.

    Attributes
    ----------
    beta : splitting rate (1/time).
    mu : death rate (1/time).
    v : linear mass growth speed (mass/time).
    kappa : diffusion coefficient, generator ``kappa * Laplacian``. Only the
        spatial model uses it.
    dim : spatial dimension. Only the spatial model uses it.
    """

    beta: float = 1.0
    mu: float = 0.0
    v: float = 1.0
    kappa: float = 1.0
    dim: int = 1


@dataclass(frozen=True)
class DerivedParams:
    delta: float
    gamma: float

    @classmethod
    def from_rates(cls, beta: float, mu: float) -> "DerivedParams":
        return cls(delta=beta - mu, gamma=mu / beta)


def validate_params(p: ModelParams) -> DerivedParams:
    """Check the supercritical regime and return ``(delta, gamma)``.

    Raises
    ------
    NonpositiveRate
        ``beta <= 0``, ``v <= 0``, ``mu < 0`` or ``dim < 1``.
    SubcriticalOrCritical
        ``beta <= mu``.
    NegativeDiffusion
        ``kappa < 0``.
    """
    if not p.beta > 0:
        raise NonpositiveRate(f"splitting rate beta must be > 0, got {p.beta}")
    if not p.v > 0:
        raise NonpositiveRate(f"growth speed v must be > 0, got {p.v}")
    if not p.mu >= 0:
        raise NonpositiveRate(f"death rate mu must be >= 0, got {p.mu}")
    if not p.beta > p.mu:
        raise SubcriticalOrCritical(
            f"need beta > mu (supercritical), got beta={p.beta}, mu={p.mu}"
        )
    if not p.kappa >= 0:
        raise NegativeDiffusion(f"kappa must be >= 0, got {p.kappa}")
    if int(p.dim) != p.dim or p.dim < 1:
        raise NonpositiveRate(f"dimension must be a positive integer, got {p.dim}")
    return DerivedParams.from_rates(p.beta, p.mu)
