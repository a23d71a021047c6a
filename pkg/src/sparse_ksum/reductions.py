"""Search-to-decision reduction, its sparsifier, and the vector-form reductions.

The search-from-decision driver keeps one counter per index: each round it
replaces a random half of the entries with fresh uniform elements, asks the
decision oracle whether a solution is still present, and credits every index
it did not replace when the answer is yes.  Indices of the planted solution
get credited noticeably more often, so the top-k counters recover it.

The sparsifier here resamples uniformly over the whole group.  That is a
different operation from the solution-preserving walk in the amplification
module, which resamples uniformly over the group minus the current value;
the two must not be conflated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, FrozenSet, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import InvalidParam, NonInvertibleK
from .groups import Element, Family, GroupSpec, add, identity, sample_element
from .instances import Instance, Solution, verify
from .rng import Rng, as_rng
from .solvers import SolverResult, _is_prime


@dataclass(frozen=True)
class DecisionOracle:
    """A solution-existence oracle plus its declared error rate.

    ``fn`` must be deterministic given the instance and any seed baked into
    it, so reduction runs replay exactly.
    """

    fn: Callable[[Instance], int]
    error_rate: float = 0.0

    def __call__(self, inst: Instance) -> int:
        return 1 if self.fn(inst) else 0


@dataclass
class CounterState:
    """Per-index vote counters accumulated by the reduction."""

    counters: List[int]
    rounds_completed: int = 0
    selected: Optional[Solution] = None
    oracle_answers: List[int] = field(default_factory=list)


def sparsify_r(
    inst: Instance, rng_seed: Union[int, Rng]
) -> Tuple[Instance, FrozenSet[int]]:
    """Resample the indices hit by r//2 uniform draws (with replacement).

    Entries outside the drawn set are preserved bit for bit.  Returns the new
    instance and the drawn index set; the planted record survives only when
    untouched by the draw.
    """
    rng = as_rng(rng_seed)
    r = inst.r
    drawn = frozenset(rng.randrange(r) for _ in range(r // 2))
    elems = list(inst.elems)
    for i in drawn:
        elems[i] = sample_element(inst.spec, rng)
    planted = inst.planted
    if planted is not None and not drawn.isdisjoint(planted):
        planted = None
    return Instance(inst.spec, inst.k, tuple(elems), planted), drawn


def decision_round_count(r: int, k: int, gamma: float, round_scale: float = 1.0) -> int:
    """ceil(2^(2k+7) * ln(r/gamma)), with an optional desk-scale multiplier."""
    if not (0 < gamma < 1):
        raise InvalidParam(f"gamma must be in (0,1), got {gamma}")
    return max(1, math.ceil((1 << (2 * k + 7)) * math.log(r / gamma) * round_scale))


def search_from_decision(
    inst: Instance,
    oracle: DecisionOracle,
    gamma: float,
    rng_seed: Union[int, Rng],
    round_scale: float = 1.0,
) -> Tuple[SolverResult, CounterState]:
    """Recover a solution from a decision oracle via replace-half voting.

    Runs p = ceil(2^(2k+7) ln(r/gamma)) rounds (times ``round_scale``) and
    outputs the k indices with the largest counters, ties broken toward the
    smallest index.  The result is Found only if the selection verifies; the
    counter state is returned either way for auditing.
    """
    rng = as_rng(rng_seed)
    r, k = inst.r, inst.k
    rounds = decision_round_count(r, k, gamma, round_scale)
    state = CounterState(counters=[0] * r)
    for _ in range(rounds):
        probe, drawn = sparsify_r(inst, rng)
        answer = oracle(probe)
        state.oracle_answers.append(answer)
        if answer:
            for i in range(r):
                if i not in drawn:
                    state.counters[i] += 1
        state.rounds_completed += 1
    # Largest counters win; ties go to the smaller index.
    ranked = sorted(range(r), key=lambda i: (-state.counters[i], i))
    selected = tuple(sorted(ranked[:k]))
    state.selected = selected
    found = selected if verify(inst, selected) else None
    return SolverResult(found, rounds), state


# ---------------------------------------------------------------------------
# Modulus q^m k-SUM  ->  vector k-SUM over Z_q^m (carry-vector reduction)
# ---------------------------------------------------------------------------


def _digits_base_q(x: int, q: int, m: int) -> Tuple[int, ...]:
    out = []
    for _ in range(m):
        out.append(x % q)
        x //= q
    return tuple(out)


def digits_to_int(digits: Sequence[int], q: int) -> int:
    x = 0
    for d in reversed(digits):
        x = x * q + d
    return x


def ksum_to_vector(
    values: Sequence[int], q: int, m: int, k: int
) -> Iterator[Tuple[Tuple[int, ...], Instance]]:
    """Carry-shifted digit matrices of a k-SUM instance over Z_{q^m}.

    Yields exactly k^m pairs (carry vector v, vector instance): each entry of
    digit row i is shifted by v_i / k mod q.  If the input has a planted
    zero-sum k-set, the base-q carries of that sum form one v for which the
    same set is a vector solution.  Lazy: matrices are built on demand.
    """
    if q < 2 or not _is_prime(q):
        raise InvalidParam(f"q must be a prime >= 2, got {q}")
    if math.gcd(k, q) != 1:
        raise NonInvertibleK(f"k={k} has no inverse mod q={q}")
    modulus = q ** m
    values = tuple(v % modulus for v in values)
    inv_k = pow(k % q, -1, q)
    spec = GroupSpec(Family.VECTOR_MOD_Q, m, q)
    digit_rows = [
        [_digits_base_q(v, q, m)[i] for v in values] for i in range(m)
    ]

    def carry_vectors() -> Iterator[Tuple[int, ...]]:
        v = [0] * m
        while True:
            yield tuple(v)
            i = 0
            while i < m and v[i] == k - 1:
                v[i] = 0
                i += 1
            if i == m:
                return
            v[i] += 1

    r = len(values)
    for v in carry_vectors():
        shift = [(vi * inv_k) % q for vi in v]
        elems = tuple(
            tuple((digit_rows[i][j] + shift[i]) % q for i in range(m))
            for j in range(r)
        )
        yield v, Instance(spec, k, elems, planted=None)


# ---------------------------------------------------------------------------
# Vector k-SUM decision  ->  targeted vector k-SUM (permute-to-front)
# ---------------------------------------------------------------------------

# A targeted oracle decides, for (target, elements), whether some (k-1)-subset
# of the elements sums with the target to the identity.  The sign convention
# is fixed so that any member of a planted zero-sum set landing in the target
# slot is detected: target + sum(subset) == 0.
TargetedOracle = Callable[[Element, Tuple[Element, ...]], int]


def exact_targeted_oracle(spec: GroupSpec, k: int) -> TargetedOracle:
    """Brute-force targeted oracle over (k-1)-subsets of the element list."""
    from itertools import combinations

    def oracle(target: Element, elements: Tuple[Element, ...]) -> int:
        for combo in combinations(range(len(elements)), k - 1):
            s = target
            for i in combo:
                s = add(s, elements[i], spec)
            if s == identity(spec):
                return 1
        return 0

    return oracle


def vector_to_targeted(
    inst: Instance,
    oracle: TargetedOracle,
    rng_seed: Union[int, Rng],
    rounds_multiplier: int = 1,
) -> int:
    """Decide vector k-SUM using a targeted oracle, one permutation per round.

    Runs at most r rounds (times ``rounds_multiplier``): each round permutes
    the entries uniformly, presents slot 1 as the target and the rest as the
    list, and returns 1 on the first oracle accept.
    """
    rng = as_rng(rng_seed)
    r = inst.r
    rounds = r * max(1, rounds_multiplier)
    for _ in range(rounds):
        perm = rng.sample(range(r), r)
        target = inst.elems[perm[0]]
        rest = tuple(inst.elems[i] for i in perm[1:])
        if oracle(target, rest):
            return 1
    return 0
