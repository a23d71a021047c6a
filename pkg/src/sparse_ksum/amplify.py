"""Success amplification for weak planted-search solvers.

Pipeline: a weak solver is first wrapped by solution obfuscation (one random
permutation and one random zero-sum tuple added entrywise), then driven from
many nearby instances produced by a solution-preserving random walk.  A round
is accepted only when the returned k-tuple indexes entries left unchanged by
the walk and verifies on the original input, so the amplifier can never emit
a wrong answer.

Two density-1 lifts reduce an instance at density <= 1 down to the walkable
regime: the vector lift appends fresh uniform rows, the modular lift
randomizes fresh high-order digits.  Both accept only solutions that verify
on the original input.

Round-count formulas explode at desk scale (k^k log r, 64 log r / gamma^(2k+2)),
so the config exposes per-count multipliers; experiments that use them must
record the override.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple, Union

from .errors import FamilyMismatch, InvalidParam, ModulusMismatch
from .groups import (
    Family,
    GroupSpec,
    add,
    density_of,
    negate,
    identity,
    sample_element,
    sample_element_excluding,
)
from .instances import Instance, Solution, verify
from .rng import Rng, as_rng
from .solvers import SolverResult, meet_in_the_middle

WeakSolverFn = Callable[[Instance, Rng], Optional[Solution]]


@dataclass(frozen=True)
class WeakSolver:
    """A maybe-succeeding solver with its declared success probability.

    Calls re-verify any returned solution and discard it if wrong, so
    downstream code can trust a non-None result.
    """

    fn: WeakSolverFn
    gamma: float
    name: str = "weak"

    def __call__(self, inst: Instance, rng: Rng) -> Optional[Solution]:
        sol = self.fn(inst, rng)
        if sol is None:
            return None
        sol = tuple(sorted(sol))
        return sol if verify(inst, sol) else None


def mitm_weak_solver() -> WeakSolver:
    return WeakSolver(lambda inst, rng: meet_in_the_middle(inst).found, 1.0, "mitm")


def crippled(inner: WeakSolver, success_prob: float) -> WeakSolver:
    """Fail independently with probability 1 - success_prob before running."""

    def fn(inst: Instance, rng: Rng) -> Optional[Solution]:
        if rng.random() >= success_prob:
            return None
        return inner(inst, rng)

    return WeakSolver(fn, success_prob * inner.gamma, f"crippled({success_prob})")


@dataclass(frozen=True)
class AmplifyConfig:
    """Round counts for the amplification pipeline.

    gamma is the weak solver's success probability; alpha defaults to the
    exponent matching gamma to 1/log^alpha r (computed, documented, and not
    asserted asymptotically).  The *_scale multipliers are desk-scale
    overrides; any run using them should record the scales alongside results.
    """

    gamma: Fraction
    alpha: Optional[float] = None
    obf_scale: float = 1.0
    walk_scale: float = 1.0
    outer_scale: float = 1.0
    lift_scale: float = 1.0

    def __post_init__(self):
        if not (0 < self.gamma <= 1):
            raise InvalidParam(f"gamma must be in (0,1], got {self.gamma}")

    def derived_alpha(self, r: int) -> float:
        if self.alpha is not None:
            return self.alpha
        loglog = math.log2(max(2.0, math.log2(r)))
        return math.log2(1 / float(self.gamma)) / loglog

    def obf_rounds(self, r: int, k: int) -> int:
        return max(1, math.ceil(k ** k * math.log2(r) * self.obf_scale))

    def walk_steps(self, r: int) -> int:
        return max(1, math.ceil(r * math.log(1 / float(self.gamma)) * self.walk_scale))

    def outer_rounds(self, r: int, k: int) -> int:
        g = float(self.gamma)
        return max(1, math.ceil(64 * math.log(r) / g ** (2 * k + 2) * self.outer_scale))

    def lift_rounds(self, r: int) -> int:
        a = self.derived_alpha(r)
        return max(1, math.ceil(math.log2(r) ** (a + 2) * self.lift_scale))

    def delta0(self, r: int, k: int) -> float:
        """Walkable target density k log r / (k log r + (alpha+1) loglog r)."""
        a = self.derived_alpha(r)
        klogr = k * math.log2(r)
        return klogr / (klogr + (a + 1) * math.log2(max(2.0, math.log2(r))))


def sample_zero_sum_tuple(spec: GroupSpec, k: int, rng: Rng) -> Tuple:
    """k uniform elements conditioned on summing to the identity."""
    parts = [sample_element(spec, rng) for _ in range(k - 1)]
    total = identity(spec)
    for e in parts:
        total = add(total, e, spec)
    parts.append(negate(total, spec))
    return tuple(parts)


def obfuscate_and_solve(
    inst: Instance,
    weak: WeakSolver,
    cfg: AmplifyConfig,
    rng_seed: Union[int, Rng],
) -> SolverResult:
    """Hide the solution's location and values, then retry the weak solver.

    One permutation and one zero-sum k-tuple are sampled up front; each round
    re-rolls only the entrywise assignment of tuple members, runs the weak
    solver on the permuted result, un-permutes, and accepts on verification
    against the original instance.
    """
    rng = as_rng(rng_seed)
    spec, r, k = inst.spec, inst.r, inst.k
    perm = rng.sample(range(r), r)  # permuted position j holds original perm[j]
    noise = sample_zero_sum_tuple(spec, k, rng)
    rounds = cfg.obf_rounds(r, k)

    calls = 0
    for _ in range(rounds):
        masked = [add(inst.elems[j], noise[rng.randrange(k)], spec) for j in range(r)]
        shuffled = Instance(spec, k, tuple(masked[perm[j]] for j in range(r)))
        calls += 1
        got = weak(shuffled, rng)
        if got is not None:
            back = tuple(sorted(perm[j] for j in got))
            if verify(inst, back):
                return SolverResult(back, calls)
    return SolverResult(None, calls)


def amplify(
    inst: Instance,
    weak: WeakSolver,
    cfg: AmplifyConfig,
    rng_seed: Union[int, Rng],
) -> SolverResult:
    """Random-walk amplification of a weak solver's success probability.

    Each outer round walks a copy of the input (every step resamples one
    entry to a *different* value), runs the obfuscated solver on the walked
    copy, and accepts only if the returned k-tuple sits on entries unchanged
    between input and copy and verifies on the input.  Never returns a wrong
    answer.
    """
    rng = as_rng(rng_seed)
    spec, r, k = inst.spec, inst.r, inst.k
    delta = density_of(spec, r, k)
    walkable = 1 - math.log2(max(2.0, math.log2(r))) / math.log2(r)
    if delta > walkable:
        warnings.warn(
            f"density {delta:.3f} above walkable regime {walkable:.3f}; "
            "general-group guarantee does not apply",
            stacklevel=2,
        )
    outer = cfg.outer_rounds(r, k)
    steps = cfg.walk_steps(r)

    calls = 0
    for _ in range(outer):
        walked = list(inst.elems)
        for _ in range(steps):
            i = rng.randrange(r)
            walked[i] = sample_element_excluding(spec, walked[i], rng)
        walked_inst = Instance(spec, k, tuple(walked))
        res = obfuscate_and_solve(walked_inst, weak, cfg, rng)
        calls += res.subsets_examined
        sol = res.found
        if sol is not None:
            unchanged = all(inst.elems[i] == walked[i] for i in sol)
            if unchanged and verify(inst, sol):
                return SolverResult(sol, calls)
    return SolverResult(None, calls)


# ---------------------------------------------------------------------------
# Density lifts down to the walkable regime
# ---------------------------------------------------------------------------


def extend_with_random_rows(inst: Instance, rows: int, rng: Rng) -> Instance:
    """Append ``rows`` fresh uniform digit rows to a vector instance.

    The planted record is kept only if it still verifies afterwards (each
    appended row kills it with probability 1 - 1/q)."""
    if inst.spec.family is not Family.VECTOR_MOD_Q:
        raise FamilyMismatch("row extension needs the vector family")
    spec = inst.spec
    new_spec = GroupSpec(Family.VECTOR_MOD_Q, spec.m + rows, spec.q)
    elems = tuple(
        e + tuple(rng.randrange(spec.q) for _ in range(rows)) for e in inst.elems
    )
    out = Instance(new_spec, inst.k, elems)
    if inst.planted is not None and verify(out, inst.planted):
        out = Instance(new_spec, inst.k, elems, planted=inst.planted)
    return out


def randomize_high_digits(inst: Instance, add_bits: int, rng: Rng) -> Instance:
    """Add beta_i * 2^m for uniform beta_i < 2^add_bits to a modular instance.

    Reducing the output mod 2^m recovers the input exactly."""
    if inst.spec.family is not Family.MODULAR2M:
        raise ModulusMismatch("high-digit randomization needs the modular family")
    m = inst.spec.m
    new_spec = GroupSpec(Family.MODULAR2M, m + add_bits)
    elems = tuple(e + (rng.getrandbits(add_bits) << m) for e in inst.elems)
    out = Instance(new_spec, inst.k, elems)
    if inst.planted is not None and verify(out, inst.planted):
        out = Instance(new_spec, inst.k, elems, planted=inst.planted)
    return out


def _lift_row_count(inst: Instance, cfg: AmplifyConfig) -> int:
    """Rows/digits needed to move the instance from its density to delta0."""
    r, k = inst.r, inst.k
    d0 = cfg.delta0(r, k)
    d = density_of(inst.spec, r, k)
    if d0 >= d:
        raise InvalidParam(
            f"target density {d0:.4f} must be below instance density {d:.4f}"
        )
    lg_q = math.log2(inst.spec.q)
    rows = math.ceil(k * math.log2(r) / lg_q * (1 / d0 - 1 / d))
    return max(1, rows)


def lift_vector_density(
    inst: Instance,
    weak0: WeakSolver,
    cfg: AmplifyConfig,
    rng_seed: Union[int, Rng],
) -> SolverResult:
    """Solve a density <= 1 vector instance with a solver for lower density.

    Each of the lift rounds appends fresh uniform rows and runs the solver on
    the taller matrix; the planted set survives a round with probability
    exactly q^-rows.  Accepted solutions must verify on the original input.
    """
    if inst.spec.family is not Family.VECTOR_MOD_Q:
        raise FamilyMismatch("lift_vector_density needs the vector family")
    rng = as_rng(rng_seed)
    rows = _lift_row_count(inst, cfg)
    rounds = cfg.lift_rounds(inst.r)
    for _ in range(rounds):
        tall = extend_with_random_rows(inst.hide(), rows, rng)
        got = weak0(tall, rng)
        if got is not None and verify(inst, got):
            return SolverResult(got, rounds)
    return SolverResult(None, rounds)


def lift_modular_density(
    inst: Instance,
    weak0: WeakSolver,
    cfg: AmplifyConfig,
    rng_seed: Union[int, Rng],
) -> SolverResult:
    """Modular counterpart of the vector lift: randomize high-order digits.

    A solution of the widened instance reduces to one of the original because
    the original modulus divides the widened one; planted survival per round
    is exactly 2^-add_bits.
    """
    if inst.spec.family is not Family.MODULAR2M:
        raise ModulusMismatch("lift_modular_density needs the modular family")
    rng = as_rng(rng_seed)
    add_bits = _lift_row_count(inst, cfg)
    rounds = cfg.lift_rounds(inst.r)
    for _ in range(rounds):
        wide = randomize_high_digits(inst.hide(), add_bits, rng)
        got = weak0(wide, rng)
        if got is not None and verify(inst, got):
            return SolverResult(got, rounds)
    return SolverResult(None, rounds)


def downshift_solver_vector(
    weak: WeakSolver, delta0: float, delta: float
) -> WeakSolver:
    """Adapt a density-``delta`` solver to density-``delta0`` vector inputs.

    Discards a random 1 - delta0/delta fraction of the rows (keeping
    ceil(m * delta0/delta)), solves the shorter instance, and re-verifies on
    the original taller input.  Success degrades by at most a constant
    factor (the shorter instance rarely has many spurious solutions).
    """
    if not (0 < delta0 < delta):
        raise InvalidParam(f"need 0 < delta0 < delta, got {delta0}, {delta}")

    def fn(inst: Instance, rng: Rng) -> Optional[Solution]:
        if inst.spec.family is not Family.VECTOR_MOD_Q:
            raise FamilyMismatch("downshift wrapper needs the vector family")
        m = inst.spec.m
        keep = min(m, math.ceil(m * delta0 / delta))
        rows = sorted(rng.sample(range(m), keep))
        short_spec = GroupSpec(Family.VECTOR_MOD_Q, keep, inst.spec.q)
        short = Instance(
            short_spec,
            inst.k,
            tuple(tuple(e[i] for i in rows) for e in inst.elems),
        )
        got = weak(short, rng)
        if got is not None and verify(inst, got):
            return got
        return None

    return WeakSolver(fn, weak.gamma / 10, f"downshift({weak.name})")
