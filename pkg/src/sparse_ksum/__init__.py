"""Samplers, solvers, reductions, amplification, and a toy bit-encryption
scheme for planted k-SUM / k-XOR experiments in the sparse regime, with exact
small-instance oracles and seeded Monte-Carlo harnesses."""

__version__ = "0.1.0"

from .errors import (
    BudgetExceeded,
    ConfigError,
    FamilyMismatch,
    IntractableError,
    InvalidKRange,
    InvalidParam,
    InvalidPrime,
    KsumError,
    ModulusMismatch,
    NonInvertibleK,
    NotXor,
    VersionMismatch,
)
from .groups import Family, GroupSpec, add, density_of, is_admissible, make_spec, negate
from .instances import (
    Instance,
    count_solutions,
    exact_pmf,
    sample_d0,
    sample_d1,
    sample_d_ell,
    verify,
)
from .rng import Rng, as_rng, derive_seed
from .solvers import (
    SolverResult,
    SubsetSumInstance,
    brute_force,
    density_k_to_kprime,
    density_subsample,
    exhaustive_subset_sum,
    gauss_kxor,
    meet_in_the_middle,
    mitm_subset_sum,
    subset_sum_reduce_avg,
    subset_sum_reduce_worst,
)

__all__ = [name for name in dir() if not name.startswith("_")]
