"""Closed-form solution-count statistics and exact divergences.

Everything exact is a Fraction; floats appear only in Monte-Carlo summaries
(means, z-scores).  The closed forms live here so tests can confront them
with both enumerated distributions and sampled data:

  null model:     E[c] = C(r,k)/|G|,  Var[c] = (C(r,k)/|G|)(1 - 1/|G|)
  planted model:  E[c] = 1 + (C(r,k)-1)/|G|,
                  Var[c] < (C(r,k)/|G|)(1 + 2^k k^2 / r)   (an upper bound)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Optional, Union

from .errors import BudgetExceeded, InvalidParam
from .groups import GroupSpec
from .instances import (
    DEFAULT_PMF_BUDGET,
    Instance,
    count_solutions,
    enumerate_instances,
    exact_pmf,
    sample_d0,
    sample_d1,
)
from .rng import Rng, as_rng


@dataclass(frozen=True)
class ClosedFormMoments:
    mean: Fraction
    variance: Fraction
    variance_is_bound: bool  # True: upper bound, not an equality


def closed_form_moments(r: int, k: int, order: int, dist: str) -> ClosedFormMoments:
    """Exact mean/variance of the solution count; the planted variance is a bound."""
    c_rk = math.comb(r, k)
    if dist == "d0":
        mean = Fraction(c_rk, order)
        var = Fraction(c_rk, order) * (1 - Fraction(1, order))
        return ClosedFormMoments(mean, var, False)
    if dist == "d1":
        mean = 1 + Fraction(c_rk - 1, order)
        bound = Fraction(c_rk, order) * (1 + Fraction(2 ** k * k * k, r))
        return ClosedFormMoments(mean, bound, True)
    raise InvalidParam(f"unknown distribution tag {dist!r}")


@dataclass(frozen=True)
class MomentReport:
    distribution: str
    trials: int
    seed: int
    empirical_mean: float
    empirical_variance: float
    closed_mean: Fraction
    closed_variance: Fraction
    variance_is_bound: bool
    z_mean: float
    z_variance: Optional[float]  # None when the closed form is only a bound


def monte_carlo_moments(
    spec: GroupSpec,
    r: int,
    k: int,
    dist: str,
    trials: int,
    rng_seed: Union[int, Rng],
) -> MomentReport:
    """Sampled mean/variance of the solution count with z-scores vs closed forms.

    The variance z-score uses the plug-in standard error of the sample
    variance, sqrt((m4 - s^4)/n); it is omitted for the planted model, whose
    closed form is an upper bound rather than an equality.
    """
    if trials < 1000:
        raise InvalidParam("use at least 1000 trials for stable z-scores")
    rng = as_rng(rng_seed)
    sampler = sample_d0 if dist == "d0" else sample_d1
    if dist not in ("d0", "d1"):
        raise InvalidParam(f"unknown distribution tag {dist!r}")
    counts = []
    for t in range(trials):
        counts.append(count_solutions(sampler(spec, r, k, rng.child("mc", t))))
    n = trials
    mean = sum(counts) / n
    s2 = sum((c - mean) ** 2 for c in counts) / (n - 1)
    m4 = sum((c - mean) ** 4 for c in counts) / n

    closed = closed_form_moments(r, k, spec.order, dist)
    se_mean = math.sqrt(max(s2, 1e-300) / n)
    z_mean = (mean - float(closed.mean)) / se_mean
    if closed.variance_is_bound:
        z_var = None
    else:
        se_var = math.sqrt(max(m4 - s2 * s2, 1e-300) / n)
        z_var = (s2 - float(closed.variance)) / se_var
    return MomentReport(
        dist, trials, rng.seed, mean, s2, closed.mean, closed.variance,
        closed.variance_is_bound, z_mean, z_var,
    )


# ---------------------------------------------------------------------------
# Exact divergences on enumerable groups
# ---------------------------------------------------------------------------

Pmf = Dict[tuple, Fraction]


def statistical_distance(p: Pmf, q: Pmf) -> Fraction:
    """Total variation distance, exact."""
    keys = set(p) | set(q)
    total = sum(abs(p.get(x, Fraction(0)) - q.get(x, Fraction(0))) for x in keys)
    return total / 2


def renyi_max_ratio(p: Pmf, q: Pmf) -> Fraction:
    """max over supp(p) of p(x)/q(x); the order-infinity divergence ratio."""
    best = Fraction(0)
    for x, px in p.items():
        if px == 0:
            continue
        qx = q.get(x, Fraction(0))
        if qx == 0:
            raise InvalidParam("support of p must be contained in support of q")
        best = max(best, px / qx)
    return best


def solution_count_histogram(
    spec: GroupSpec, r: int, k: int, budget: int = DEFAULT_PMF_BUDGET
) -> Dict[int, Fraction]:
    """Exact distribution of the solution count under the null model."""
    total = spec.order ** r
    if total > budget:
        raise BudgetExceeded(f"|G|^r = {total} exceeds budget {budget}")
    tally: Dict[int, int] = {}
    for inst in enumerate_instances(spec, r, k, budget):
        c = count_solutions(inst)
        tally[c] = tally.get(c, 0) + 1
    return {c: Fraction(n, total) for c, n in tally.items()}


@dataclass(frozen=True)
class DivergenceReport:
    ell: int
    sd_hybrid_planted: Fraction            # exact SD(D^ell, D1)
    sd_product_form: Fraction              # Pr_D1[c > ell] * Pr_D0[c <= ell]
    renyi_hybrid_null: Fraction            # exact max ratio D^ell / D0
    renyi_closed_form: Fraction            # (|G|/C(r,k)) * ell + Pr_D1[c > ell]
    tail_planted: Fraction                 # Pr_D1[c > ell]
    head_null: Fraction                    # Pr_D0[c <= ell]


def exact_divergences(
    spec: GroupSpec, r: int, k: int, ell: int, budget: int = DEFAULT_PMF_BUDGET
) -> DivergenceReport:
    """Exact divergences of the capped hybrid against both endpoints.

    All pmfs come from enumerating the sampling procedures, so the closed
    forms reported alongside are genuinely independent quantities.
    """
    p0 = exact_pmf(spec, r, k, "d0", budget=budget)
    p1 = exact_pmf(spec, r, k, "d1", budget=budget)
    pl = exact_pmf(spec, r, k, "dell", ell=ell, budget=budget)

    counts = {elems: count_solutions(Instance(spec, k, elems)) for elems in p0}
    tail = sum((m for e, m in p1.items() if counts[e] > ell), Fraction(0))
    head = sum((m for e, m in p0.items() if counts[e] <= ell), Fraction(0))

    c_rk = math.comb(r, k)
    return DivergenceReport(
        ell=ell,
        sd_hybrid_planted=statistical_distance(pl, p1),
        sd_product_form=tail * head,
        renyi_hybrid_null=renyi_max_ratio(pl, p0),
        renyi_closed_form=Fraction(spec.order, c_rk) * ell + tail,
        tail_planted=tail,
        head_null=head,
    )


@dataclass(frozen=True)
class SdBoundReport:
    sd_null_planted: Fraction         # exact SD(D0, D1)
    pr_no_solution: Fraction          # Pr_D0[c = 0]
    bound: Fraction                   # |G| / (|G| + C(r,k))
    identity_applicable: bool         # |G| >= C(r,k), where SD = Pr[c=0] exactly
    bound_holds: bool


def sd_bound_check(
    spec: GroupSpec, r: int, k: int, budget: int = DEFAULT_PMF_BUDGET
) -> SdBoundReport:
    """Exact SD between null and planted models against the |G|/(|G|+C) bound.

    Uses the count histogram and the planted pmf's density (|G|/C) c with
    respect to the null model, so SD = (1/2) E_null |1 - (|G|/C) c|.  When
    |G| >= C(r,k) the planted pmf dominates the null pmf wherever c >= 1 and
    SD collapses to Pr_null[c = 0] exactly.
    """
    hist = solution_count_histogram(spec, r, k, budget=budget)
    c_rk = math.comb(r, k)
    ratio = Fraction(spec.order, c_rk)
    sd = sum((mass * abs(1 - ratio * c) for c, mass in hist.items()), Fraction(0)) / 2
    pr_zero = hist.get(0, Fraction(0))
    bound = Fraction(spec.order, spec.order + c_rk)
    return SdBoundReport(
        sd_null_planted=sd,
        pr_no_solution=pr_zero,
        bound=bound,
        identity_applicable=spec.order >= c_rk,
        bound_holds=sd < bound,
    )
