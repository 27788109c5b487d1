"""Supercritical branching with particle mass: simulation, moment equations,
invariant mass law and the spatial (branching Brownian motion) extension."""

from .counting import gw_limit_cdf, gw_mean, gw_pmf
from .errors import (CFLViolation, ConfigError, DegenerateKernel, FrontUndefined, InsufficientSamples,
                     InsufficientTailData, IntegrationFailure, InvalidKernel, MitographError, NegativeDiffusion,
                     NonpositiveRate, ParameterError, PopulationCap, SubcriticalOrCritical)
from .harness import ExperimentConfig, RunReport, list_experiments, run
from .kernels import SplitKernel, kernel_moment, kernel_moments
from .kpp import (Ball, Box, Everywhere, density_front_radius, empirical_front, mean_density, minimal_speed,
                  occupation_law, simulate_bbm, spatial_first_moment, traveling_wave)
from .mass_process import (estimate_alpha, fixed_point_map, invariant_moment_exact, moment_oracle,
                           sample_invariant_series, simulate_embedded_chain, simulate_tagged_mass,
                           small_mass_bound_check, stationarity_residual, tail_approximation, tail_fit)
from .moments import MassGrid, MomentField, exact_L1, exact_L2_ode, nonlocal_term, solve_L1, solve_L2
from .params import DerivedParams, ModelParams, validate_params
from .population import compare_counts_law, replicate_ensemble, simulate_population

__version__ = "0.1.0"
