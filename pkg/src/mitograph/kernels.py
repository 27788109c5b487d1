"""Symmetric splitting kernels for the mass fraction kept by one daughter.

A kernel is a law on ``[a, 1 - a]`` that is symmetric about 1/2. Four kinds
are supported:

``atomic-half``
    theta is always 1/2.
``uniform``
    uniform on ``[a, 1 - a]``.
``beta``
    ``a + (1 - 2a) X`` with ``X ~ Beta(shape, shape)``.
``tabulated``
    density values on a uniform grid spanning ``[a, 1 - a]``, linearly
    interpolated in between.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb, log

import numpy as np
from scipy import integrate, special

from .errors import InvalidKernel

KINDS = ("atomic-half", "uniform", "beta", "tabulated")

SYMMETRY_TOL = 1e-12
NORMALISATION_TOL = 1e-10


@dataclass(frozen=True)
class KernelMoments:
    m_k: tuple
    log_inv_mean: float
    theta_one_minus: float


@dataclass(frozen=True, eq=False)
class SplitKernel:
    kind: str
    a: float = 0.0
    shape: float = 1.0
    values: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise InvalidKernel(f"unknown kernel kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.a <= 0.5:
            raise InvalidKernel(f"support gap a must lie in [0, 1/2], got {self.a}")
        if self.kind == "atomic-half":
            object.__setattr__(self, "a", 0.5)
        if self.kind in ("uniform", "beta", "tabulated") and self.a == 0.5:
            raise InvalidKernel("a = 1/2 leaves no room for a density; use atomic-half")
        if self.kind == "beta" and not self.shape > 0:
            raise InvalidKernel(f"beta shape must be > 0, got {self.shape}")
        if self.kind == "tabulated":
            vals = np.asarray(self.values, dtype=float)
            if vals.ndim != 1 or vals.size < 2:
                raise InvalidKernel("tabulated kernel needs at least two density values")
            if np.any(vals < 0) or not np.all(np.isfinite(vals)):
                raise InvalidKernel("tabulated density must be finite and nonnegative")
            scale = max(vals.max(), 1.0)
            if np.max(np.abs(vals - vals[::-1])) > SYMMETRY_TOL * scale:
                raise InvalidKernel("tabulated density is not symmetric about 1/2")
            h = (1.0 - 2.0 * self.a) / (vals.size - 1)
            total = h * (vals.sum() - 0.5 * (vals[0] + vals[-1]))
            if abs(total - 1.0) > NORMALISATION_TOL:
                raise InvalidKernel(f"tabulated density integrates to {total!r}, not 1")
            vals.setflags(write=False)
            object.__setattr__(self, "values", vals)

    # constructors

    @classmethod
    def atomic_half(cls) -> "SplitKernel":
        return cls("atomic-half", a=0.5)

    @classmethod
    def uniform(cls, a: float = 0.0) -> "SplitKernel":
        return cls("uniform", a=a)

    @classmethod
    def beta(cls, shape: float, a: float = 0.0) -> "SplitKernel":
        return cls("beta", a=a, shape=shape)

    @classmethod
    def tabulated(cls, values, a: float = 0.0, normalize: bool = True) -> "SplitKernel":
        """Kernel from density samples on a uniform grid over ``[a, 1 - a]``.

        With ``normalize`` the values are symmetrised and rescaled so the
        piecewise-linear interpolant integrates to one.
        """
        vals = np.asarray(values, dtype=float)
        if normalize:
            vals = 0.5 * (vals + vals[::-1])
            h = (1.0 - 2.0 * a) / (vals.size - 1)
            vals = vals / (h * (vals.sum() - 0.5 * (vals[0] + vals[-1])))
        return cls("tabulated", a=a, values=vals)

    @classmethod
    def from_spec(cls, spec: dict) -> "SplitKernel":
        """Build a kernel from a config mapping such as ``{"kind": "uniform", "a": 0.25}``."""
        spec = dict(spec)
        kind = spec.pop("kind", None)
        allowed = {"a", "shape", "values"}
        unknown = set(spec) - allowed
        if unknown:
            raise InvalidKernel(f"unknown kernel fields {sorted(unknown)}")
        if kind == "atomic-half":
            return cls.atomic_half()
        if kind == "uniform":
            return cls.uniform(spec.get("a", 0.0))
        if kind == "beta":
            return cls.beta(spec.get("shape", 1.0), spec.get("a", 0.0))
        if kind == "tabulated":
            return cls.tabulated(spec["values"], spec.get("a", 0.0))
        raise InvalidKernel(f"unknown kernel kind {kind!r}")

    def to_spec(self) -> dict:
        if self.kind == "atomic-half":
            return {"kind": self.kind}
        out = {"kind": self.kind, "a": self.a}
        if self.kind == "beta":
            out["shape"] = self.shape
        if self.kind == "tabulated":
            out["values"] = self.values.tolist()
        return out

    # density and quadrature

    @property
    def width(self) -> float:
        return 1.0 - 2.0 * self.a

    def density(self, theta):
        """Density of theta. Not defined for the atomic kernel."""
        theta = np.asarray(theta, dtype=float)
        inside = (theta >= self.a) & (theta <= 1.0 - self.a)
        if self.kind == "atomic-half":
            raise InvalidKernel("atomic kernel has no density")
        if self.kind == "uniform":
            return np.where(inside, 1.0 / self.width, 0.0)
        if self.kind == "beta":
            x = np.clip((theta - self.a) / self.width, 0.0, 1.0)
            with np.errstate(divide="ignore"):
                d = special.beta(self.shape, self.shape) ** -1 * (x * (1 - x)) ** (self.shape - 1)
            return np.where(inside, d / self.width, 0.0)
        grid = np.linspace(self.a, 1.0 - self.a, self.values.size)
        return np.where(inside, np.interp(theta, grid, self.values), 0.0)

    def quadrature(self, n: int = 32):
        """Nodes and weights with ``sum(w * f(nodes)) ~ E f(theta)``.

        Exact for polynomials of degree ``< 2n`` on the uniform and beta kinds
        (Gauss-Legendre and Gauss-Jacobi). The tabulated kind uses composite
        Gauss-Legendre per grid cell, exact for polynomials of degree
        ``< 2 * per_cell - 1``.
        """
        if self.kind == "atomic-half":
            return np.array([0.5]), np.array([1.0])
        if self.kind == "uniform":
            x, w = np.polynomial.legendre.leggauss(n)
            return self.a + self.width * (x + 1) / 2, w / 2
        if self.kind == "beta":
            s = self.shape
            x, w = special.roots_jacobi(n, s - 1, s - 1)
            return self.a + self.width * (x + 1) / 2, w / w.sum()
        cells = self.values.size - 1
        per_cell = max(2, -(-n // cells))
        x, w = np.polynomial.legendre.leggauss(per_cell)
        edges = np.linspace(self.a, 1.0 - self.a, cells + 1)
        h = edges[1] - edges[0]
        nodes = (edges[:-1, None] + h * (x[None, :] + 1) / 2).ravel()
        weights = (np.broadcast_to(w * h / 2, (cells, per_cell))).ravel() * self.density(nodes)
        return nodes, weights

    def expect(self, f, n: int = 32) -> float:
        nodes, weights = self.quadrature(n)
        return float(np.dot(weights, f(nodes)))

    # sampling

    def sample(self, rng: np.random.Generator, size=None):
        """Draw i.i.d. thetas from this kernel."""
        if self.kind == "atomic-half":
            return np.full(size, 0.5) if size is not None else 0.5
        if self.kind == "uniform":
            return self.a + self.width * rng.random(size)
        if self.kind == "beta":
            return self.a + self.width * rng.beta(self.shape, self.shape, size)
        return self._sample_tabulated(rng.random(size))

    def _sample_tabulated(self, u):
        # exact inverse CDF of the piecewise-linear density
        f = self.values
        h = self.width / (f.size - 1)
        cell_mass = 0.5 * h * (f[:-1] + f[1:])
        cum = np.concatenate([[0.0], np.cumsum(cell_mass)])
        target = np.asarray(u, dtype=float) * cum[-1]
        i = np.clip(np.searchsorted(cum, target, side="right") - 1, 0, f.size - 2)
        r = target - cum[i]
        f0, slope = f[i], (f[i + 1] - f[i]) / h
        # solve f0 x + slope x^2 / 2 = r for x in [0, h]
        with np.errstate(divide="ignore", invalid="ignore"):
            disc = np.sqrt(np.maximum(f0 * f0 + 2.0 * slope * r, 0.0))
            x = np.where(np.abs(slope) > 1e-14, 2.0 * r / (f0 + disc), r / np.where(f0 > 0, f0, 1.0))
        x = np.clip(x, 0.0, h)
        out = self.a + i * h + x
        return float(out) if out.ndim == 0 else out


def kernel_moment(q: SplitKernel, k: int) -> float:
    """Raw moment ``E theta**k``."""
    if k < 0 or int(k) != k:
        raise ValueError(f"moment order must be a nonnegative integer, got {k}")
    k = int(k)
    if k == 0:
        return 1.0
    a, w = q.a, q.width
    if q.kind == "atomic-half":
        return 0.5 ** k
    if q.kind == "uniform":
        return ((1 - a) ** (k + 1) - a ** (k + 1)) / ((k + 1) * w)
    if q.kind == "beta":
        s = q.shape
        total = 0.0
        ex = 1.0
        for j in range(k + 1):
            total += comb(k, j) * a ** (k - j) * w ** j * ex
            ex *= (s + j) / (2 * s + j)
        return total
    return q.expect(lambda t: t ** k, n=8 * (q.values.size - 1))


def log_inverse_mean(q: SplitKernel) -> float:
    """``E ln(1/theta)``."""
    a, w = q.a, q.width
    if q.kind == "atomic-half":
        return log(2.0)
    if q.kind == "uniform":
        def antideriv(t):
            return t - t * log(t) if t > 0 else 0.0
        return (antideriv(1 - a) - antideriv(a)) / w
    val, _ = integrate.quad(
        lambda t: -np.log(t) * float(q.density(t)), a, 1 - a, limit=200,
        points=None if q.kind != "tabulated" else np.linspace(a, 1 - a, q.values.size)[1:-1][:50],
    )
    return val


def kernel_moments(q: SplitKernel, K: int = 6) -> KernelMoments:
    m = tuple(kernel_moment(q, k) for k in range(1, K + 1))
    return KernelMoments(m_k=m, log_inv_mean=log_inverse_mean(q), theta_one_minus=m[0] - m[1])


def sample_theta(q: SplitKernel, rng: np.random.Generator, size=None):
    """I.i.d. draws of the mass fraction theta."""
    return q.sample(rng, size)
