"""Instance sampling, solution counting, and exact pmf evaluation.

Three samplers are provided:

  * ``sample_d0``    -- r i.i.d. uniform group elements (the null model).
  * ``sample_d1``    -- null model with one uniformly chosen k-subset made to
                        sum to the identity by overwriting its smallest index
                        (the planted model).
  * ``sample_d_ell`` -- planted model, resampled once from the null model
                        whenever the instance has more than ell solutions.

``exact_pmf`` evaluates these distributions exactly (as Fractions) on
enumerable groups by enumerating the sampling procedure itself, so closed-form
identities about the pmfs can be asserted against it rather than baked in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterator, Optional, Tuple, Union

from .errors import BudgetExceeded, IntractableError, InvalidParam
from .groups import (
    Element,
    Family,
    GroupSpec,
    add,
    element_from_hex,
    element_to_hex,
    identity,
    negate,
    sample_element,
)
from .rng import Rng, as_rng

Solution = Tuple[int, ...]

DEFAULT_SUBSET_BUDGET = 10 ** 8
DEFAULT_PMF_BUDGET = 2 ** 24


@dataclass(frozen=True)
class Instance:
    """An array of r group elements, with the planted set recorded if known.

    ``planted`` is bookkeeping for harnesses; solvers must not read it, and
    serialization can strip it (``hide_planted``) for adversarial testing.
    """

    spec: GroupSpec
    k: int
    elems: Tuple[Element, ...]
    planted: Optional[Solution] = None

    @property
    def r(self) -> int:
        return len(self.elems)

    def hide(self) -> "Instance":
        return replace(self, planted=None)

    def to_json(self, hide_planted: bool = False) -> dict:
        planted = None if hide_planted else self.planted
        return {
            "spec": self.spec.to_json(),
            "k": self.k,
            "elems": [element_to_hex(e, self.spec) for e in self.elems],
            "planted": list(planted) if planted is not None else None,
        }

    @staticmethod
    def from_json(obj: dict) -> "Instance":
        spec = GroupSpec.from_json(obj["spec"])
        elems = tuple(element_from_hex(s, spec) for s in obj["elems"])
        planted = tuple(obj["planted"]) if obj.get("planted") is not None else None
        return Instance(spec, int(obj["k"]), elems, planted)


def validate_solution(sol: Solution, r: int, k: int) -> None:
    if len(sol) != k:
        raise InvalidParam(f"solution must have exactly k={k} indices, got {len(sol)}")
    if any(not (0 <= i < r) for i in sol):
        raise IndexError(f"solution index out of range [0, {r})")
    if any(sol[i] >= sol[i + 1] for i in range(len(sol) - 1)):
        raise InvalidParam("solution indices must be strictly increasing")


def verify(inst: Instance, sol: Solution) -> bool:
    """True iff the elements at the given k indices sum to the identity."""
    validate_solution(tuple(sol), inst.r, inst.k)
    spec = inst.spec
    total = identity(spec)
    for i in sol:
        total = add(total, inst.elems[i], spec)
    return total == identity(spec)


def sample_d0(spec: GroupSpec, r: int, k: int, rng_seed: Union[int, Rng]) -> Instance:
    """r i.i.d. uniform elements; no planted set."""
    if r < k:
        raise InvalidParam(f"r must be >= k, got r={r}, k={k}")
    rng = as_rng(rng_seed)
    elems = tuple(sample_element(spec, rng) for _ in range(r))
    return Instance(spec, k, elems, planted=None)


def _plant(elems: list, subset: Solution, spec: GroupSpec) -> None:
    """Overwrite the smallest index of the subset so the subset sums to 0."""
    i = subset[0]
    total = identity(spec)
    for j in subset[1:]:
        total = add(total, elems[j], spec)
    elems[i] = negate(total, spec)


def sample_d1(spec: GroupSpec, r: int, k: int, rng_seed: Union[int, Rng]) -> Instance:
    """Uniform instance with a uniformly chosen k-subset planted as a solution.

    The overwrite hits the smallest index of the subset unconditionally, which
    is what makes the pmf exactly (|G|/C(r,k)) * c(X) * |G|^-r later on.
    """
    if r < k:
        raise InvalidParam(f"r must be >= k, got r={r}, k={k}")
    rng = as_rng(rng_seed)
    elems = [sample_element(spec, rng) for _ in range(r)]
    subset = tuple(sorted(rng.sample(range(r), k)))
    _plant(elems, subset, spec)
    return Instance(spec, k, tuple(elems), planted=subset)


def sample_d_ell(
    spec: GroupSpec,
    r: int,
    k: int,
    ell: int,
    rng_seed: Union[int, Rng],
    budget: int = DEFAULT_SUBSET_BUDGET,
) -> Instance:
    """Planted sample, resampled once from the null model if it has > ell solutions."""
    if not (0 <= ell <= math.comb(r, k)):
        raise InvalidParam(f"ell must be in [0, C(r,k)], got {ell}")
    if math.comb(r, k) > budget:
        raise IntractableError(
            f"solution counting needs C({r},{k})={math.comb(r, k)} > budget {budget}"
        )
    rng = as_rng(rng_seed)
    inst = sample_d1(spec, r, k, rng)
    if count_solutions(inst, budget=budget) > ell:
        return sample_d0(spec, r, k, rng)
    return inst


def count_solutions(inst: Instance, budget: int = DEFAULT_SUBSET_BUDGET) -> int:
    """Exact number of k-subsets summing to the identity.

    Subsets are enumerated in colex order with incrementally maintained suffix
    sums, one group addition per step (amortized).
    """
    r, k = inst.r, inst.k
    total_subsets = math.comb(r, k)
    if total_subsets > budget:
        raise BudgetExceeded(
            f"C({r},{k})={total_subsets} subsets exceeds budget {budget}"
        )
    return _scan_subsets(inst, count_all=True)


def exists_solution(inst: Instance, budget: int = DEFAULT_SUBSET_BUDGET) -> bool:
    """Early-exit existence check; same enumeration as count_solutions."""
    r, k = inst.r, inst.k
    if math.comb(r, k) > budget:
        raise BudgetExceeded(f"C({r},{k}) subsets exceeds budget {budget}")
    if k == 3:
        return _exists_3sum(inst)
    return _scan_subsets(inst, count_all=False) > 0


def _exists_3sum(inst: Instance) -> bool:
    # Pair-and-lookup: x_a completes pair (b, c) iff x_a = -(x_b + x_c).
    spec = inst.spec
    elems = inst.elems
    r = len(elems)
    where: Dict[Element, list] = {}
    for i, x in enumerate(elems):
        where.setdefault(x, []).append(i)
    for b in range(r):
        xb = elems[b]
        for c in range(b + 1, r):
            target = negate(add(xb, elems[c], spec), spec)
            for a in where.get(target, ()):
                if a != b and a != c:
                    return True
    return False


def _scan_subsets(inst: Instance, count_all: bool) -> int:
    spec = inst.spec
    elems = inst.elems
    r, k = inst.r, inst.k
    fam = spec.family
    zero = identity(spec)
    if fam is Family.MODULAR2M:
        mask = (1 << spec.m) - 1
        combine = lambda a, b: (a + b) & mask  # noqa: E731
    elif fam is Family.XOR:
        combine = lambda a, b: a ^ b  # noqa: E731
    else:
        q = spec.q
        combine = lambda a, b: tuple((x + y) % q for x, y in zip(a, b))  # noqa: E731

    c = list(range(k))
    # suffix[i] = elems[c[i]] + ... + elems[c[k-1]]; suffix[k] = 0
    suffix = [zero] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix[i] = combine(elems[c[i]], suffix[i + 1])

    count = 0
    while True:
        if suffix[0] == zero:
            if not count_all:
                return 1
            count += 1
        # colex successor: bump the lowest index that has headroom, reset below
        i = 0
        while i < k:
            nxt = c[i] + 1
            limit = c[i + 1] if i + 1 < k else r
            if nxt < limit:
                break
            i += 1
        if i == k:
            return count
        c[i] += 1
        suffix[i] = combine(elems[c[i]], suffix[i + 1])
        for j in range(i - 1, -1, -1):
            c[j] = j
            suffix[j] = combine(elems[j], suffix[j + 1])


def enumerate_elements(spec: GroupSpec) -> Iterator[Element]:
    """All |G| elements, in a fixed order."""
    if spec.family is Family.VECTOR_MOD_Q:
        yield from product(range(spec.q), repeat=spec.m)
    else:
        yield from range(1 << spec.m)


def enumerate_instances(spec: GroupSpec, r: int, k: int, budget: int) -> Iterator[Instance]:
    total = spec.order ** r
    if total > budget:
        raise BudgetExceeded(f"|G|^r = {total} instances exceeds budget {budget}")
    for elems in product(list(enumerate_elements(spec)), repeat=r):
        yield Instance(spec, k, elems)


def exact_pmf(
    spec: GroupSpec,
    r: int,
    k: int,
    dist: str,
    ell: Optional[int] = None,
    budget: int = DEFAULT_PMF_BUDGET,
) -> Dict[Tuple[Element, ...], Fraction]:
    """Exact pmf of "d0", "d1", or "dell" over all |G|^r element tuples.

    The planted pmf is tallied by enumerating every (uniform draw, subset)
    pair of the sampling procedure, not by a closed-form expression, so the
    closed forms stay independently checkable.  All masses are Fractions and
    sum to exactly 1.
    """
    order = spec.order
    total = order ** r
    if total > budget:
        raise BudgetExceeded(f"|G|^r = {total} instances exceeds budget {budget}")
    if dist == "d0":
        p = Fraction(1, total)
        return {inst.elems: p for inst in enumerate_instances(spec, r, k, budget)}
    if dist == "d1":
        return _pmf_planted(spec, r, k, budget)
    if dist == "dell":
        if ell is None:
            raise InvalidParam("dell requires ell")
        if not (0 <= ell <= math.comb(r, k)):
            raise InvalidParam(f"ell must be in [0, C(r,k)], got {ell}")
        planted = _pmf_planted(spec, r, k, budget)
        tail = Fraction(0)
        kept: Dict[Tuple[Element, ...], Fraction] = {}
        for elems, mass in planted.items():
            if count_solutions(Instance(spec, k, elems)) > ell:
                tail += mass
            else:
                kept[elems] = mass
        resample = tail / total
        out: Dict[Tuple[Element, ...], Fraction] = {}
        for inst in enumerate_instances(spec, r, k, budget):
            out[inst.elems] = kept.get(inst.elems, Fraction(0)) + resample
        return out
    raise InvalidParam(f"unknown distribution tag {dist!r}")


def _pmf_planted(spec, r, k, budget) -> Dict[Tuple[Element, ...], Fraction]:
    subsets = list(combinations(range(r), k))
    weight = Fraction(1, (spec.order ** r) * len(subsets))
    # Every instance gets an entry; unreachable ones keep exact mass zero.
    tally: Dict[Tuple[Element, ...], Fraction] = {
        inst.elems: Fraction(0) for inst in enumerate_instances(spec, r, k, budget)
    }
    for base in list(tally):
        for subset in subsets:
            elems = list(base)
            _plant(elems, subset, spec)
            tally[tuple(elems)] += weight
    return tally
