"""Config-driven experiment runner.

An experiment is described by one JSON document::

    {"experiment": "counts-law",
     "params": {"beta": 1.0, "mu": 0.0, "v": 1.0},
     "kernel": {"kind": "uniform", "a": 0.25},
     "t": 0.6931471805599453, "replicates": 100000, "seed": 7}

:func:`run` validates the whole config before simulating anything, then
writes artifacts atomically and returns a :class:`RunReport` with one entry
per checked criterion.
"""

from __future__ import annotations

import json
import math
import os
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import counting, kpp, mass_process, moments, population
from .errors import ConfigError, MitographError
from .io import write_csv, write_json
from .kernels import SplitKernel, kernel_moment
from .params import ModelParams, validate_params
from .rng import stream
from .stats import mean_se

COMMON_FIELDS = {"experiment", "params", "kernel", "seed", "m0", "output_dir"}
PARAM_FIELDS = {"beta", "mu", "v", "kappa", "dim"}

CATALOG = {
    "counts-law": {
        "required": ["t"],
        "optional": {"replicates": 100_000, "cap": population.DEFAULT_CAP, "tv_tolerance": 0.01,
                     "limit_ks_tolerance": None},
        "claims": "geometric law of N(t), E N(t) = exp(delta t), extinction probability, "
                  "limit law of N(t) exp(-delta t)",
        "oracle": "closed-form pmf evaluated in positive algebraic form; exponential limit CDF",
    },
    "total-mass-moments": {
        "required": ["t"],
        "optional": {"replicates": 100_000, "cap": population.DEFAULT_CAP},
        "claims": "first and second moments of the total mass M(t)",
        "oracle": "affine closed form for E M and the quadratic-coefficient ODE for E M^2",
    },
    "invariant-density": {
        "required": [],
        "optional": {"samples": 1_000_000, "max_moment": 6, "eps_rel": 1e-12, "dump_samples": 10_000,
                     "tagged_samples": 100_000},
        "claims": "moments of the invariant mass law, its fixed-point equation, convergence of the tagged "
                  "process and the weak stationarity equation",
        "oracle": "moment recursion with exponential raw moments; two-sample KS; adjoint pairing with "
                  "bump test functions and an exponential negative control",
    },
    "tail-asymptotics": {
        "required": [],
        "optional": {"samples": 10_000_000, "alpha_replicates": 100_000, "eps_rel": 1e-12},
        "claims": "large-mass tail (2 alpha beta / v) exp(-2 beta m / v) of the invariant density",
        "oracle": "truncated-exponential MLE of the tail slope; Monte Carlo alpha",
    },
    "small-mass-bound": {
        "required": [],
        "optional": {"samples": 10_000_000, "m_grid": None},
        "claims": "P{xi <= m} <= exp(-c1 ln^2(1/m)) as m -> 0",
        "oracle": "ln^2 versus ln regression of log P; exponential negative control",
    },
    "fde-solve": {
        "required": [],
        "optional": {"times": [1.0, 2.0, 3.0, 4.0], "n_points": 1024, "span": 20.0, "l2_t_max": 3.0,
                     "refine_sizes": [512, 1024], "leading_t": 6.0, "tolerance": 1e-3},
        "claims": "pantograph-type equations for L1 = E M(t) and L2 = E M(t)^2 and the large-t "
                  "behaviour of L1 and L2",
        "oracle": "closed-form L1 and the L2 coefficient ODE",
    },
    "kpp-front": {
        "required": [],
        "optional": {"times": [5.0 + 0.25 * i for i in range(21)], "replicates": 1000, "bin_width": 1.0,
                     "threshold": 1.0, "dump_replicates": 1, "cap": population.DEFAULT_CAP},
        "claims": "density front l1(t, 0, y) = 1 moving at speed 2 sqrt(kappa beta)",
        "oracle": "closed-form front radius and brentq root of the mean density",
    },
    "traveling-wave": {
        "required": [],
        "optional": {"c_values": [0.5, 1.0, 1.5, 1.9, 1.99, 2.01, 2.5, 3.0, 4.0], "tol": 1e-4},
        "claims": "monotone traveling waves of kappa phi'' + c phi' + beta phi (1 - phi) = 0 exist iff "
                  "c >= 2 sqrt(kappa beta)",
        "oracle": "sign of the linearisation discriminant c^2 - 4 kappa beta",
    },
    "occupation-law": {
        "required": [],
        "optional": {"t": 8.0, "replicates": 10_000, "center": [0.0], "radius": 1.0,
                     "ks_tolerance": 0.05, "cap": population.DEFAULT_CAP},
        "claims": "N(t, B) / E N(t, B) -> Exp(1) for balls in the central zone",
        "oracle": "Exp(1) CDF",
    },
}


@dataclass
class ExperimentConfig:
    experiment: str
    params: ModelParams
    kernel: SplitKernel
    seed: int = 0
    m0: float = 1.0
    output_dir: str | None = None
    options: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, doc: dict) -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        kind = doc.get("experiment")
        if kind not in CATALOG:
            raise ConfigError(f"unknown or missing experiment kind {kind!r}; see `mitograph list`")
        spec = CATALOG[kind]
        allowed = COMMON_FIELDS | set(spec["required"]) | set(spec["optional"])
        unknown = set(doc) - allowed
        if unknown:
            raise ConfigError(f"unknown config fields for {kind}: {sorted(unknown)}")
        missing = [f for f in spec["required"] if f not in doc]
        if missing:
            raise ConfigError(f"missing required fields for {kind}: {missing}")
        pdoc = doc.get("params", {})
        if not isinstance(pdoc, dict) or set(pdoc) - PARAM_FIELDS:
            raise ConfigError(f"params must be an object with fields from {sorted(PARAM_FIELDS)}")
        try:
            params = ModelParams(**{k: (int(v) if k == "dim" else float(v)) for k, v in pdoc.items()})
            validate_params(params)
            kernel = SplitKernel.from_spec(doc.get("kernel", {"kind": "uniform", "a": 0.25}))
            seed = int(doc.get("seed", 0))
            m0 = float(doc.get("m0", 1.0))
        except (MitographError, TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc
        if not m0 > 0:
            raise ConfigError("m0 must be positive")
        options = dict(spec["optional"])
        for key in list(spec["required"]) + list(spec["optional"]):
            if key in doc:
                options[key] = doc[key]
        _check_options(kind, options)
        return cls(experiment=kind, params=params, kernel=kernel, seed=seed, m0=m0,
                   output_dir=doc.get("output_dir"), options=options, raw=dict(doc))

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc)

    def echo(self) -> dict:
        out = dict(self.raw)
        out["params"] = vars(self.params).copy()
        out["kernel"] = self.kernel.to_spec()
        out["seed"] = self.seed
        out.update({k: v for k, v in self.options.items()})
        return out


def _check_options(kind, opts):
    def positive_int(name):
        v = opts.get(name)
        if not isinstance(v, (int, float)) or int(v) != v or v < 1:
            raise ConfigError(f"{name} must be a positive integer")
        opts[name] = int(v)

    def number(name, positive=False):
        v = opts.get(name)
        if not isinstance(v, (int, float)) or isinstance(v, bool) or not math.isfinite(v) or (positive and v <= 0):
            raise ConfigError(f"{name} must be a {'positive ' if positive else ''}number")
        opts[name] = float(v)

    def number_list(name, positive=False):
        v = opts.get(name)
        if not isinstance(v, list) or not v:
            raise ConfigError(f"{name} must be a nonempty list of numbers")
        try:
            vals = [float(x) for x in v]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{name} must be a list of numbers") from exc
        if positive and any(x <= 0 for x in vals):
            raise ConfigError(f"{name} entries must be positive")
        opts[name] = vals

    for name in ("replicates", "cap", "samples", "max_moment", "dump_samples", "tagged_samples",
                 "alpha_replicates", "n_points", "dump_replicates"):
        if name in opts and not (name == "dump_samples" and opts[name] == 0) and not (
                name == "dump_replicates" and opts[name] == 0):
            positive_int(name)
    for name in ("tv_tolerance", "eps_rel", "span", "l2_t_max", "leading_t", "tolerance", "bin_width",
                 "threshold", "tol", "radius", "ks_tolerance"):
        if name in opts:
            number(name, positive=True)
    if "t" in opts:
        number("t")
        if opts["t"] < 0:
            raise ConfigError("t must be >= 0")
    if opts.get("limit_ks_tolerance") is not None:
        number("limit_ks_tolerance", positive=True)
    for name in ("times", "c_values"):
        if name in opts:
            number_list(name, positive=True)
    if "refine_sizes" in opts:
        number_list("refine_sizes", positive=True)
        opts["refine_sizes"] = [int(x) for x in opts["refine_sizes"]]
    if "center" in opts:
        number_list("center")
    if opts.get("m_grid") is not None:
        number_list("m_grid", positive=True)
    if kind == "fde-solve" and min(opts["times"]) > opts["l2_t_max"]:
        raise ConfigError("at least one output time must not exceed l2_t_max")
    if opts.get("eps_rel", 0.5) >= 1:
        raise ConfigError("eps_rel must lie in (0, 1)")


@dataclass
class Criterion:
    name: str
    statistic: float
    tolerance: float
    oracle: float | str | None
    passed: bool
    note: str = ""

    def as_dict(self) -> dict:
        return {"name": self.name, "statistic": self.statistic, "tolerance": self.tolerance,
                "oracle": self.oracle, "passed": bool(self.passed), "note": self.note}


@dataclass
class RunReport:
    config: dict
    wall_clock: float
    criteria: list
    artifacts: list

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.criteria)

    def as_dict(self) -> dict:
        return {"config": self.config, "wall_clock_s": self.wall_clock, "passed": self.passed,
                "criteria": [c.as_dict() for c in self.criteria], "artifacts": self.artifacts}


def _within_se(name, estimate, se, oracle, n_se=3.0):
    stat = abs(estimate - oracle) / se if se > 0 else (0.0 if estimate == oracle else math.inf)
    return Criterion(name, stat, n_se, oracle, stat < n_se, note=f"estimate={estimate!r}, se={se!r}; statistic in SE units")


# experiments: each returns (criteria, {filename: (kind, payload)})


def _exp_counts_law(cfg: ExperimentConfig, workers: int):
    o, p = cfg.options, cfg.params
    d = validate_params(p)
    t = o["t"]
    stats = population.replicate_ensemble(p, cfg.kernel, cfg.m0, t, o["replicates"], cfg.seed,
                                          cap=o["cap"], workers=workers)
    cmp = population.compare_counts_law(stats, d, t, min_samples=1)
    p0 = counting.gw_pmf(0, t, d)
    ext_se = math.sqrt(max(p0 * (1 - p0), 1e-300) / stats.R)
    crit = [
        Criterion("tv_counts", cmp.tv, o["tv_tolerance"], "gw_pmf", cmp.tv < o["tv_tolerance"]),
        _within_se("mean_counts", stats.mean_N, stats.se_N, counting.gw_mean(t, d)),
        _within_se("extinction_fraction", stats.extinct_fraction, ext_se, p0),
    ]
    if o["limit_ks_tolerance"] is not None:
        crit.append(Criterion("ks_limit", cmp.ks, o["limit_ks_tolerance"], "survival part of limit CDF",
                              cmp.ks < o["limit_ks_tolerance"]))
    summary = stats.summary()
    summary.update({"tv_counts": cmp.tv, "ks_limit": cmp.ks})
    return crit, {"ensemble.csv": ("csv", (["replicate", "N", "M"], stats.rows())),
                  "summary.json": ("json", summary)}


def _exp_total_mass_moments(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    t = o["t"]
    stats = population.replicate_ensemble(p, q, cfg.m0, t, o["replicates"], cfg.seed, cap=o["cap"], workers=workers)
    m1, se1 = mean_se(stats.M)
    m2, se2 = mean_se(stats.M ** 2)
    l1 = float(moments.exact_L1(p, cfg.m0, t))
    l2 = float(moments.exact_L2_ode(p, q, cfg.m0, t))
    crit = [_within_se("mean_total_mass", m1, se1, l1), _within_se("second_moment_total_mass", m2, se2, l2)]
    summary = stats.summary()
    summary.update({"E_M2": m2, "se_M2": se2, "exact_L1": l1, "exact_L2": l2})
    return crit, {"ensemble.csv": ("csv", (["replicate", "N", "M"], stats.rows())),
                  "summary.json": ("json", summary)}


def _exp_invariant_density(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    n, K = o["samples"], o["max_moment"]
    xi = mass_process.sample_invariant_series(p, q, stream(cfg.seed, "series"), o["eps_rel"], size=n).xi
    oracle = mass_process.moment_oracle(p, q, K)
    crit = []
    table = []
    for k in range(1, K + 1):
        est, se = mean_se(xi ** k)
        crit.append(_within_se(f"moment_{k}", est, se, oracle.moments[k - 1]))
        table.append({"k": k, "exact": oracle.moments[k - 1], "monte_carlo": est, "se": se})
    xi2 = mass_process.sample_invariant_series(p, q, stream(cfg.seed, "series-b"), o["eps_rel"], size=n).xi
    mapped = mass_process.fixed_point_map(p, q, xi2, stream(cfg.seed, "fixed-point"))
    from .stats import ks_two_sample
    ks_fp = ks_two_sample(xi, mapped)
    crit.append(Criterion("fixed_point_ks", ks_fp, 0.01, "two-sample KS", ks_fp < 0.01))
    nt = o["tagged_samples"]
    tagged = mass_process.simulate_tagged_mass(p, q, cfg.m0, 12.0 / p.beta, stream(cfg.seed, "tagged"), size=nt).m
    ks_tag = ks_two_sample(tagged, xi[:nt])
    crit.append(Criterion("tagged_stationarity_ks", ks_tag, 0.02, "two-sample KS", ks_tag < 0.02))
    rep = mass_process.stationarity_residual(xi, q, p)
    crit.append(Criterion("weak_residual_max_z", rep.max_z, 3.0, 0.0, rep.max_z < 3.0))
    exp_s = stream(cfg.seed, "exp-control").exponential(p.v / p.beta, n)
    ctrl = mass_process.stationarity_residual(exp_s, q, p)
    crit.append(Criterion("exp_control_max_z", ctrl.max_z, 5.0, "> 5 SE", ctrl.max_z > 5.0,
                          note="negative control passes when the residual is large"))
    dump = min(o["dump_samples"], n)
    return crit, {
        "samples.csv": ("csv", (["sample_index", "xi"], [(i, float(x)) for i, x in enumerate(xi[:dump])])),
        "moments.json": ("json", {"moments": table, "residuals": rep.residuals, "residual_se": rep.se,
                                  "exp_control_residuals": ctrl.residuals, "exp_control_se": ctrl.se,
                                  "fixed_point_ks": ks_fp, "tagged_ks": ks_tag}),
    }


def _exp_tail(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    xi = mass_process.sample_invariant_series(p, q, stream(cfg.seed, "series"), o["eps_rel"], size=o["samples"]).xi
    fit = mass_process.tail_fit(xi, p)
    alpha, alpha_se = mass_process.estimate_alpha(q, o["alpha_replicates"], seed=stream(cfg.seed, "alpha"))
    rate = -2 * p.beta / p.v
    pref = 2 * alpha * p.beta / p.v
    slope_err = abs(fit["slope"] / rate - 1)
    pref_err = abs(fit["prefactor"] / pref - 1)
    crit = [Criterion("tail_slope_rel_error", slope_err, 0.10, rate, slope_err < 0.10),
            Criterion("tail_prefactor_rel_error", pref_err, 0.25, pref, pref_err < 0.25)]
    out = dict(fit)
    out.update({"alpha": alpha, "alpha_se": alpha_se, "theory_slope": rate, "theory_prefactor": pref})
    return crit, {"tail.json": ("json", out)}


def _exp_small_mass(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    s = p.v / p.beta
    grid = o["m_grid"] or [0.05 * s, 0.1 * s, 0.2 * s, 0.3 * s]
    xi = mass_process.sample_invariant_series(p, q, stream(cfg.seed, "series"), size=o["samples"]).xi
    rep = mass_process.small_mass_bound_check(xi, q, p, grid)
    ctrl_s = stream(cfg.seed, "exp-control").exponential(s, o["samples"])
    ctrl = mass_process.small_mass_bound_check(ctrl_s, q, p, grid)
    crit = [
        Criterion("ln2_fit_better", rep.sse_log_squared, rep.sse_log, "sse of ln(1/m) fit",
                  rep.sse_log_squared < rep.sse_log, note="statistic: weighted SSE of ln^2 fit"),
        Criterion("c1_positive", rep.c1_hat, 0.0, "> 0", rep.c1_hat > 0),
        Criterion("exp_control_flagged", float(ctrl.violation), 1.0, "violation", ctrl.violation),
    ]
    return crit, {"small_mass.json": ("json", {
        "c1_hat": rep.c1_hat, "intercept": rep.intercept, "sse_log_squared": rep.sse_log_squared,
        "sse_log": rep.sse_log, "violation": rep.violation, "grid": rep.table,
        "control": {"c1_hat": ctrl.c1_hat, "sse_log_squared": ctrl.sse_log_squared, "sse_log": ctrl.sse_log,
                    "violation": ctrl.violation}})}


def _exp_fde(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    tol = o["tolerance"]
    grid = moments.MassGrid.default(p, n_points=o["n_points"], span=o["span"])
    times = sorted(o["times"])
    L1 = moments.solve_L1(p, q, grid, times)
    L2 = moments.solve_L2(p, q, grid, times)
    crit, files = [], {}
    err1 = max(moments.relative_error(f.values, moments.exact_L1(p, grid.nodes, f.t)) for f in L1)
    err2 = max(moments.relative_error(f.values, moments.exact_L2_ode(p, q, grid.nodes, f.t))
               for f in L2 if f.t <= o["l2_t_max"])
    crit.append(Criterion("L1_max_rel_error", err1, tol, "exact_L1", err1 <= tol))
    crit.append(Criterion("L2_max_rel_error", err2, tol, "exact_L2_ode", err2 <= tol))
    conv = moments.convergence_study(p, q, times[-1], o["refine_sizes"], moment=1, span=o["span"])
    ratios = [a / b for a, b in zip(conv["errors"][:-1], conv["errors"][1:])]
    worst = min(ratios) if ratios else math.inf
    crit.append(Criterion("L1_refinement_ratio", worst, 2.0, ">= 2", worst >= 2.0))
    if p.mu == 0:
        l2_lead = moments.solve_L2(p, q, grid, o["leading_t"])
        ratio = float(l2_lead.at(cfg.m0) / (2 * (math.exp(p.beta * o["leading_t"]) * p.v / p.beta) ** 2))
        crit.append(Criterion("L2_leading_ratio", abs(ratio - 1), 0.05, 1.0, abs(ratio - 1) <= 0.05))
        conv["leading_ratio"] = ratio
    for f, f2 in zip(L1, L2):
        files[f"fields_t{f.t:g}.csv"] = ("csv", (["m", "L1", "L2", "exact_L1", "exact_L2"],
                                                 moments.field_rows(p, q, f, f2)))
    conv["L1_error"] = err1
    conv["L2_error"] = err2
    files["convergence.json"] = ("json", conv)
    return crit, files


def _exp_kpp_front(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    fs = kpp.empirical_front(p, q, o["times"], o["replicates"], cfg.seed, bin_width=o["bin_width"],
                             threshold=o["threshold"], m0=cfg.m0, cap=o["cap"], workers=workers)
    lead = 2 * math.sqrt(p.kappa * p.beta)
    rel = abs(fs.speed / lead - 1)
    diffs = [abs(kpp.density_front_radius(t, p) - kpp.density_front_radius_numeric(t, p))
             for t in fs.t if kpp._front_exists(t, p)]
    worst = max(diffs) if diffs else math.inf
    crit = [Criterion("front_speed_rel_error", rel, 0.10, lead, rel < 0.10),
            Criterion("exact_radius_vs_root", worst, 1e-9, "brentq root", worst <= 1e-9)]
    rows = [(r["t"], r["empirical_radius"], r["exact_radius"], r["leading_radius"]) for r in fs.table]
    files = {"front.csv": ("csv", (["t", "empirical_radius", "exact_radius", "leading_radius"], rows)),
             "front.json": ("json", {"speed": fs.speed, "speed_se": fs.speed_se, "table": fs.table})}
    prow = []
    for r in range(o["dump_replicates"]):
        snap = kpp.simulate_bbm(p, q, cfg.m0, float(max(fs.t)), stream(cfg.seed, "dump", r), cap=o["cap"])
        prow.extend((r, *(float(c) for c in x), float(m)) for x, m in zip(snap.positions, snap.masses))
    if o["dump_replicates"]:
        coords = ["x"] if p.dim == 1 else [f"x{i}" for i in range(p.dim)]
        files["particles.csv"] = ("csv", (["replicate", *coords, "mass"], prow))
    return crit, files


def _exp_wave(cfg, workers):
    o, p = cfg.options, cfg.params
    c_star = 2 * math.sqrt(p.kappa * p.beta)
    cmin = kpp.minimal_speed(p, tol=o["tol"])
    cs = sorted(o["c_values"])
    kinds = [kpp.traveling_wave(c, p).classification for c in cs]
    flips = sum(1 for a, b in zip(kinds, kinds[1:]) if a != b)
    crit = [Criterion("minimal_speed_error", abs(cmin - c_star), 1e-3, c_star, abs(cmin - c_star) < 1e-3),
            Criterion("classification_flips", flips, 1, "exactly one flip", flips == 1
                      and kinds[0] == "oscillatory" and kinds[-1] == "monotone-front")]
    return crit, {"wave.json": ("json", {"minimal_speed": cmin, "linear_minimal_speed": c_star,
                                         "waves": [{"c": c, "classification": k} for c, k in zip(cs, kinds)]})}


def _exp_occupation(cfg, workers):
    o, p, q = cfg.options, cfg.params, cfg.kernel
    rep = kpp.occupation_law(p, q, o["t"], o["center"], o["radius"], o["replicates"], cfg.seed,
                             m0=cfg.m0, cap=o["cap"], workers=workers)
    if rep.extra.get("outside_front"):
        crit = [Criterion("occupation_ks", math.nan, o["ks_tolerance"], "Exp(1)", False,
                          note="ball centre lies outside the density front; law not tested")]
    else:
        crit = [Criterion("occupation_ks", rep.ks, o["ks_tolerance"], "Exp(1)", rep.ks < o["ks_tolerance"])]
    return crit, {"occupation.json": ("json", rep.as_dict())}


RUNNERS = {
    "counts-law": _exp_counts_law,
    "total-mass-moments": _exp_total_mass_moments,
    "invariant-density": _exp_invariant_density,
    "tail-asymptotics": _exp_tail,
    "small-mass-bound": _exp_small_mass,
    "fde-solve": _exp_fde,
    "kpp-front": _exp_kpp_front,
    "traveling-wave": _exp_wave,
    "occupation-law": _exp_occupation,
}


def list_experiments(verbose: bool = False) -> dict:
    """Catalog of experiment kinds with their config fields and checked claims."""
    out = {}
    for kind, spec in CATALOG.items():
        entry = {"required": list(spec["required"]), "optional": dict(spec["optional"]), "claims": spec["claims"]}
        if verbose:
            entry["oracle"] = spec["oracle"]
        out[kind] = entry
    return out


def run(config, out_dir=None, workers: int | None = None, seed: int | None = None) -> RunReport:
    """Validate ``config`` (path, dict or :class:`ExperimentConfig`), run it and write artifacts."""
    if isinstance(config, ExperimentConfig):
        cfg = config
    elif isinstance(config, dict):
        cfg = ExperimentConfig.from_dict(config)
    else:
        cfg = ExperimentConfig.load(config)
    if seed is not None:
        cfg.seed = int(seed)
    workers = os.cpu_count() or 1 if workers is None else max(1, int(workers))
    out = Path(out_dir or cfg.output_dir or f"runs/{cfg.experiment}")
    start = time.perf_counter()
    criteria, files = RUNNERS[cfg.experiment](cfg, workers)
    elapsed = time.perf_counter() - start
    written = []
    for name, (kind, payload) in files.items():
        if kind == "csv":
            header, rows = payload
            write_csv(out / name, header, rows)
        else:
            write_json(out / name, payload)
        written.append(name)
    report = RunReport(config=cfg.echo(), wall_clock=elapsed, criteria=criteria, artifacts=sorted(written))
    write_json(out / "report.json", report.as_dict())
    return report
