"""Direct search algorithms and reductions to subset sum.

Solvers return a SolverResult whose ``found`` field, when set, always passes
``verify`` on the instance it was asked about: no solver ever reports a
non-solution.  ``brute_force`` and ``meet_in_the_middle`` are exact (they
agree on Found/NotFound for every instance); the Gaussian-elimination k-XOR
solver is Monte-Carlo with a bounded iteration count.

The subset-sum backends are deliberately pluggable: a backend is any callable
``SubsetSumInstance -> Optional[tuple[int, ...]]``.  Two are shipped, a
Gray-code exhaustive scan for up to 30 items and a meet-in-the-middle scan;
lattice-based backends can be plugged in through the same signature.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Callable, List, Optional, Sequence, Tuple, Union

from .errors import (
    BudgetExceeded,
    InvalidKRange,
    InvalidParam,
    InvalidPrime,
    NotXor,
)
from .groups import Element, Family, add, identity, negate, sample_element
from .instances import Instance, Solution, verify
from .rng import Rng, as_rng

DEFAULT_SUBSET_BUDGET = 10 ** 8
DEFAULT_MITM_BUDGET = 10 ** 7
EXHAUSTIVE_ITEM_CAP = 30

InnerSolver = Callable[[Instance], "SolverResult"]
SubsetSumBackend = Callable[["SubsetSumInstance"], Optional[Tuple[int, ...]]]


@dataclass(frozen=True)
class SolverResult:
    """Outcome of one solver run. ``found is None`` means NotFound."""

    found: Optional[Solution]
    subsets_examined: int = 0
    wall_nanos: int = 0

    @property
    def ok(self) -> bool:
        return self.found is not None


def brute_force(inst: Instance, budget: int = DEFAULT_SUBSET_BUDGET) -> SolverResult:
    """Scan k-subsets in lexicographic order, return the first solution.

    The returned solution is therefore the lexicographically smallest one.
    """
    r, k = inst.r, inst.k
    total = math.comb(r, k)
    if total > budget:
        raise BudgetExceeded(f"C({r},{k})={total} subsets exceeds budget {budget}")
    start = time.perf_counter_ns()
    spec = inst.spec
    elems = inst.elems
    zero = identity(spec)

    c = list(range(k))
    prefix = [zero] * k
    acc = zero
    for i in range(k):
        acc = add(acc, elems[c[i]], spec)
        prefix[i] = acc

    examined = 0
    while True:
        examined += 1
        if prefix[k - 1] == zero:
            return SolverResult(tuple(c), examined, time.perf_counter_ns() - start)
        j = k - 1
        while j >= 0 and c[j] == r - k + j:
            j -= 1
        if j < 0:
            return SolverResult(None, examined, time.perf_counter_ns() - start)
        c[j] += 1
        for t in range(j + 1, k):
            c[t] = c[t - 1] + 1
        acc = prefix[j - 1] if j > 0 else zero
        for t in range(j, k):
            acc = add(acc, elems[c[t]], spec)
            prefix[t] = acc


def meet_in_the_middle(
    inst: Instance, memory_budget: int = DEFAULT_MITM_BUDGET
) -> SolverResult:
    """Hash all ceil(k/2)-subset sums, probe with negated floor(k/2)-subset sums.

    Collisions that share an index are skipped and probing continues; only
    index-disjoint unions are solutions.  Exact: agrees with brute_force on
    Found/NotFound for every instance.
    """
    r, k = inst.r, inst.k
    a = (k + 1) // 2  # stored side takes the larger half
    b = k - a
    if math.comb(r, a) > memory_budget:
        raise BudgetExceeded(
            f"C({r},{a})={math.comb(r, a)} table entries exceeds budget {memory_budget}"
        )
    start = time.perf_counter_ns()
    spec = inst.spec
    elems = inst.elems

    table: dict = {}
    examined = 0
    for combo in combinations(range(r), a):
        s = identity(spec)
        for i in combo:
            s = add(s, elems[i], spec)
        table.setdefault(s, []).append(combo)
        examined += 1

    for combo in combinations(range(r), b):
        s = identity(spec)
        for i in combo:
            s = add(s, elems[i], spec)
        examined += 1
        probe = set(combo)
        for cand in table.get(negate(s, spec), ()):
            if probe.isdisjoint(cand):
                sol = tuple(sorted(cand + combo))
                return SolverResult(sol, examined, time.perf_counter_ns() - start)
    return SolverResult(None, examined, time.perf_counter_ns() - start)


# ---------------------------------------------------------------------------
# Low-density k-XOR via column subsampling + Gaussian elimination
# ---------------------------------------------------------------------------

_KERNEL_ENUM_NULLITY_CAP = 20


def _kernel_basis(columns: Sequence[int]) -> List[int]:
    """Kernel basis of the GF(2) matrix with the given bit-packed columns.

    Returns combination bitmasks over column positions; each mask XORs the
    selected columns to zero.
    """
    pivots: dict = {}
    kernel: List[int] = []
    for ci, v in enumerate(columns):
        combo = 1 << ci
        while v:
            p = v.bit_length() - 1
            if p not in pivots:
                pivots[p] = (v, combo)
                break
            pv, pc = pivots[p]
            v ^= pv
            combo ^= pc
        if v == 0:
            kernel.append(combo)
    return kernel


def _weight_k_kernel_vector(kernel: List[int], k: int) -> Optional[int]:
    """First kernel combination of Hamming weight exactly k.

    Basis vectors are checked in order first, then all basis combinations in
    increasing counter order, provided the nullity is small enough; larger
    kernels are abandoned (caller resamples).
    """
    for mask in kernel:
        if mask.bit_count() == k:
            return mask
    d = len(kernel)
    if d < 2 or d > _KERNEL_ENUM_NULLITY_CAP:
        return None
    for sel in range(3, 1 << d):  # single-vector combos already checked
        if sel & (sel - 1) == 0:
            continue
        acc = 0
        s = sel
        while s:
            j = (s & -s).bit_length() - 1
            acc ^= kernel[j]
            s &= s - 1
        if acc.bit_count() == k:
            return acc
    return None


def gauss_kxor(
    inst: Instance,
    rng_seed: Union[int, Rng],
    iteration_cap: Optional[int] = None,
) -> SolverResult:
    """Subsample m/2 columns, eliminate, look for a weight-k kernel vector.

    When r <= m/2 the elimination is applied once to the whole matrix (no
    subsampling can help there).  Otherwise runs ceil((4r/m)^k * ceil(log2 r))
    iterations, each drawing a fresh column subset.
    """
    spec = inst.spec
    if spec.family is not Family.XOR:
        raise NotXor(f"gauss_kxor needs the XOR family, got {spec.family.value}")
    rng = as_rng(rng_seed)
    start = time.perf_counter_ns()
    m, r, k = spec.m, inst.r, inst.k
    elems = inst.elems

    def attempt(col_idx: Sequence[int]) -> Optional[Solution]:
        kernel = _kernel_basis([elems[i] for i in col_idx])
        mask = _weight_k_kernel_vector(kernel, k)
        if mask is None:
            return None
        sol = tuple(sorted(col_idx[j] for j in range(len(col_idx)) if (mask >> j) & 1))
        return sol

    half = m // 2
    if r <= half:
        sol = attempt(range(r))
        return SolverResult(sol, 1, time.perf_counter_ns() - start)

    iters = math.ceil((4 * r / m) ** k * math.ceil(math.log2(r)))
    if iteration_cap is not None:
        iters = min(iters, iteration_cap)
    for it in range(iters):
        cols = rng.sample(range(r), half)
        sol = attempt(cols)
        if sol is not None:
            return SolverResult(sol, it + 1, time.perf_counter_ns() - start)
    return SolverResult(None, iters, time.perf_counter_ns() - start)


# ---------------------------------------------------------------------------
# Integer / prime-modulus instances (inputs of the subset-sum reductions)
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class IntKsumInstance:
    """k-SUM over the integers: find k entries summing to exactly 0."""

    values: Tuple[int, ...]
    k: int
    planted: Optional[Solution] = None

    @property
    def r(self) -> int:
        return len(self.values)

    def solution_ok(self, sol: Solution) -> bool:
        return sum(self.values[i] for i in sol) == 0


@dataclass(frozen=True)
class ZpKsumInstance:
    """k-SUM over Z_p for a prime p: find k entries summing to 0 mod p."""

    values: Tuple[int, ...]
    p: int
    k: int
    planted: Optional[Solution] = None

    @property
    def r(self) -> int:
        return len(self.values)

    def solution_ok(self, sol: Solution) -> bool:
        return sum(self.values[i] for i in sol) % self.p == 0


def sample_int_ksum(
    r: int, k: int, bound: int, rng_seed: Union[int, Rng], planted: bool = True
) -> IntKsumInstance:
    """Uniform entries in [-bound, bound]; when planted, the smallest index of
    a random k-subset is overwritten with minus the sum of the others."""
    rng = as_rng(rng_seed)
    values = [rng.randrange(2 * bound + 1) - bound for _ in range(r)]
    subset = None
    if planted:
        subset = tuple(sorted(rng.sample(range(r), k)))
        values[subset[0]] = -sum(values[i] for i in subset[1:])
    return IntKsumInstance(tuple(values), k, subset)


def sample_zp_ksum(
    r: int, k: int, p: int, rng_seed: Union[int, Rng], planted: bool = True
) -> ZpKsumInstance:
    if not _is_prime(p):
        raise InvalidPrime(f"{p} is not prime")
    rng = as_rng(rng_seed)
    values = [rng.randrange(p) for _ in range(r)]
    subset = None
    if planted:
        subset = tuple(sorted(rng.sample(range(r), k)))
        values[subset[0]] = (-sum(values[i] for i in subset[1:])) % p
    return ZpKsumInstance(tuple(values), p, k, subset)


# ---------------------------------------------------------------------------
# Subset sum: instance type and shipped backends
# ---------------------------------------------------------------------------


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return False
        f += 2
    return True


def next_prime(n: int) -> int:
    c = max(2, n)
    while not _is_prime(c):
        c += 1
    return c


def _is_prime_power(n: int) -> bool:
    if n < 2:
        return False
    p = 2
    while p * p <= n:
        if n % p == 0:
            while n % p == 0:
                n //= p
            return n == 1
        p += 1
    return True  # n itself is prime


@dataclass(frozen=True)
class SubsetSumInstance:
    """Values plus a target; when modular, the modulus must be a prime power."""

    values: Tuple[int, ...]
    target: int
    modulus: Optional[int] = None

    def __post_init__(self):
        if self.modulus is not None and not _is_prime_power(self.modulus):
            raise InvalidPrime(f"modulus {self.modulus} is not a prime power")

    def subset_ok(self, indices: Sequence[int]) -> bool:
        s = sum(self.values[i] for i in indices)
        if self.modulus is not None:
            return s % self.modulus == self.target % self.modulus
        return s == self.target


def exhaustive_subset_sum(ss: SubsetSumInstance) -> Optional[Tuple[int, ...]]:
    """Gray-code scan of all 2^n subsets (n <= 30), one add/sub per step."""
    n = len(ss.values)
    if n > EXHAUSTIVE_ITEM_CAP:
        raise BudgetExceeded(f"exhaustive backend caps at {EXHAUSTIVE_ITEM_CAP} items")
    mod = ss.modulus
    target = ss.target % mod if mod is not None else ss.target
    total = 0
    member = 0
    if total == target:
        return ()
    for g in range(1, 1 << n):
        bit = (g & -g).bit_length() - 1
        flip = 1 << bit
        if member & flip:
            total -= ss.values[bit]
        else:
            total += ss.values[bit]
        member ^= flip
        if mod is not None:
            total %= mod
        if total == target:
            return tuple(i for i in range(n) if (member >> i) & 1)
    return None


def mitm_subset_sum(
    ss: SubsetSumInstance, memory_budget: int = DEFAULT_MITM_BUDGET
) -> Optional[Tuple[int, ...]]:
    """Meet-in-the-middle over the two index halves."""
    n = len(ss.values)
    h = n // 2
    if 1 << (n - h) > memory_budget:
        raise BudgetExceeded("subset-sum half table exceeds memory budget")
    mod = ss.modulus
    target = ss.target % mod if mod is not None else ss.target

    left = ss.values[:h]
    right = ss.values[h:]
    sums: dict = {}
    for mask in range(1 << len(right)):
        s = 0
        mm = mask
        while mm:
            b = (mm & -mm).bit_length() - 1
            s += right[b]
            mm &= mm - 1
        if mod is not None:
            s %= mod
        sums.setdefault(s, mask)
    for mask in range(1 << h):
        s = 0
        mm = mask
        while mm:
            b = (mm & -mm).bit_length() - 1
            s += left[b]
            mm &= mm - 1
        need = target - s
        if mod is not None:
            need %= mod
        other = sums.get(need)
        if other is not None:
            out = [i for i in range(h) if (mask >> i) & 1]
            out += [h + i for i in range(len(right)) if (other >> i) & 1]
            return tuple(out)
    return None


# ---------------------------------------------------------------------------
# Reductions from k-SUM to subset sum
# ---------------------------------------------------------------------------


def subset_sum_reduce_worst(values: Sequence[int], k: int) -> SubsetSumInstance:
    """Shift every entry by (k+1)*M so any subset hitting the target has size k.

    M = max|X_i| + 1; Y_i = (k+1)M + X_i lies in (kM, (k+2)M), which forces
    exactly k summands to reach t = k(k+1)M, and those k map straight back to
    a zero-sum k-set of X.
    """
    values = tuple(values)
    m_bound = max(abs(v) for v in values) + 1
    shifted = tuple((k + 1) * m_bound + v for v in values)
    return SubsetSumInstance(shifted, k * (k + 1) * m_bound, None)


def solve_int_ksum_via_subset_sum(
    inst: IntKsumInstance, backend: SubsetSumBackend
) -> Optional[Solution]:
    ss = subset_sum_reduce_worst(inst.values, inst.k)
    found = backend(ss)
    # the value window forces |found| == k; enforce it rather than assume it
    if found is None or len(found) != inst.k:
        return None
    sol = tuple(sorted(found))
    return sol if inst.solution_ok(sol) else None


@dataclass(frozen=True)
class AvgSubsetSumReduction:
    """Randomized embedding of a Z_p k-SUM instance into average-case subset sum.

    Holds the bookkeeping needed by the recovery step: the random shift alpha
    and the random padding set S that went into the target.
    """

    instance: SubsetSumInstance
    alpha: int
    padding: frozenset
    p: int
    k: int

    def recover(self, found: Optional[Sequence[int]]) -> Optional[Solution]:
        """Strip the padding set: valid only when it is contained in the
        returned subset and exactly k extra indices remain."""
        if found is None:
            return None
        s = set(found)
        if self.padding <= s and len(s - self.padding) == self.k:
            return tuple(sorted(s - self.padding))
        return None


def subset_sum_reduce_avg(
    inst: ZpKsumInstance, rng_seed: Union[int, Rng]
) -> AvgSubsetSumReduction:
    """Shift all entries by a random alpha, pad the target with a random subset.

    Y_i = alpha + X_i (mod p); t = k*alpha + sum_{i in S} Y_i (mod p) for a
    uniformly random S.  When S misses the planted set T, S union T solves the
    subset-sum instance and recovery returns T.
    """
    p, k = inst.p, inst.k
    if not _is_prime(p):
        raise InvalidPrime(f"{p} is not prime")
    if p <= k:
        raise InvalidParam(f"need p > k, got p={p}, k={k}")
    rng = as_rng(rng_seed)
    alpha = rng.randrange(p)
    shifted = tuple((alpha + v) % p for v in inst.values)
    padding = frozenset(i for i in range(inst.r) if rng.getrandbits(1))
    target = (k * alpha + sum(shifted[i] for i in padding)) % p
    return AvgSubsetSumReduction(
        SubsetSumInstance(shifted, target, p), alpha, padding, p, k
    )


@dataclass(frozen=True)
class AvgReductionOutcome:
    solution: Optional[Solution]
    padding_disjoint: bool  # padding set missed the planted set
    backend_found: bool


def solve_zp_ksum_via_subset_sum(
    inst: ZpKsumInstance, backend: SubsetSumBackend, rng_seed: Union[int, Rng]
) -> AvgReductionOutcome:
    red = subset_sum_reduce_avg(inst, rng_seed)
    found = backend(red.instance)
    sol = red.recover(found)
    if sol is not None and not inst.solution_ok(sol):
        sol = None
    disjoint = inst.planted is not None and red.padding.isdisjoint(inst.planted)
    return AvgReductionOutcome(sol, disjoint, found is not None)


# ---------------------------------------------------------------------------
# Density-changing reductions
# ---------------------------------------------------------------------------


def ceil_rational_power(base: int, exp: Fraction) -> int:
    """Exact ceil(base**exp) for rational exp >= 0 (no float boundary issues)."""
    if exp <= 0:
        return 1
    num, den = exp.numerator, exp.denominator
    rhs = base ** num
    s = max(1, int(round(base ** (num / den))))
    while s ** den < rhs:
        s += 1
    while s > 1 and (s - 1) ** den >= rhs:
        s -= 1
    return s


@dataclass(frozen=True)
class KShiftOutput:
    """One pass of the pair-and-merge transform, with its index bookkeeping.

    ``index_map[i]`` lists the original indices feeding entry i of the derived
    instance: one index for copied entries, two for merged pairs, none for
    fresh random padding.  ``dropped`` holds indices truncated away to make r
    divisible by 4.
    """

    instance: Instance
    index_map: Tuple[Tuple[int, ...], ...]
    dropped: Tuple[int, ...]
    source_k: int

    def map_back(self, sol: Solution) -> Optional[Solution]:
        """Back-map a k1-solution; valid only if it uses no fresh entries and
        touches exactly source_k distinct original indices."""
        contributors: List[int] = []
        for i in sol:
            src = self.index_map[i]
            if not src:
                return None
            contributors.extend(src)
        out = tuple(sorted(contributors))
        if len(set(out)) != len(out) or len(out) != self.source_k:
            return None
        return out

    def planted_survived(self, planted: Solution, k1: int) -> bool:
        """True iff the planted k2-set appears as a valid k1-set: the entries
        touching it contain only planted indices and number exactly k1."""
        pset = set(planted)
        touching = [src for src in self.index_map if pset.intersection(src)]
        covered = [i for src in touching for i in src]
        return (
            len(touching) == k1
            and all(set(src) <= pset for src in touching)
            and set(covered) == pset
        )


def density_k_to_kprime(
    inst: Instance, k1: int, rng_seed: Union[int, Rng]
) -> KShiftOutput:
    """One iteration of the pair-and-merge density shift from k2-SUM to k1-SUM.

    Copies r/2 entries, merges the remaining r/2 into r/4 pair sums, pads with
    r/4 fresh uniform elements, and randomly permutes; output size is again r.
    When r is not divisible by 4 the tail is truncated first (recorded in
    ``dropped``; planted survival probability degrades accordingly).
    """
    k2 = inst.k
    if k1 < 3:
        raise InvalidParam(f"k1 must be >= 3, got {k1}")
    if not (k1 + 1 <= k2 <= 2 * k1 - 1):
        raise InvalidKRange(f"need k2 in [k1+1, 2*k1-1], got k1={k1}, k2={k2}")
    rng = as_rng(rng_seed)
    spec = inst.spec
    r_used = inst.r - (inst.r % 4)
    if r_used < 4:
        raise InvalidParam("instance too small after truncation to a multiple of 4")
    dropped = tuple(range(r_used, inst.r))

    order = rng.sample(range(r_used), r_used)
    singles = order[: r_used // 2]
    pair_pool = order[r_used // 2:]

    entries: List[Tuple[Element, Tuple[int, ...]]] = []
    for i in singles:
        entries.append((inst.elems[i], (i,)))
    for j in range(0, len(pair_pool), 2):
        a, b = pair_pool[j], pair_pool[j + 1]
        entries.append((add(inst.elems[a], inst.elems[b], spec), (a, b)))
    for _ in range(r_used // 4):
        entries.append((sample_element(spec, rng), ()))
    rng.shuffle(entries)

    elems = tuple(e for e, _ in entries)
    index_map = tuple(src for _, src in entries)
    derived = Instance(spec, k1, elems, planted=None)
    return KShiftOutput(derived, index_map, dropped, k2)


def density_subsample(
    inst: Instance,
    delta_target: Union[Fraction, str],
    inner_solver: InnerSolver,
    rng_seed: Union[int, Rng],
) -> SolverResult:
    """Repeatedly solve a random ceil(r^delta)-element subinstance.

    Runs 2*ceil(r^(k(1-delta))) rounds; any solution found is mapped back and
    verified against the original instance before being returned.
    """
    delta = Fraction(delta_target)
    if not (Fraction(1, 2) < delta < 1):
        raise InvalidParam(f"delta_target must be in (1/2, 1), got {delta}")
    rng = as_rng(rng_seed)
    start = time.perf_counter_ns()
    r, k = inst.r, inst.k
    size = ceil_rational_power(r, delta)
    rounds = 2 * ceil_rational_power(r, Fraction(k) * (1 - delta))

    examined = 0
    for _ in range(rounds):
        pick = rng.sample(range(r), size)
        sub = Instance(inst.spec, k, tuple(inst.elems[i] for i in pick))
        res = inner_solver(sub)
        examined += 1
        if res.found is not None:
            mapped = tuple(sorted(pick[j] for j in res.found))
            if len(set(mapped)) == k and verify(inst, mapped):
                return SolverResult(mapped, examined, time.perf_counter_ns() - start)
    return SolverResult(None, examined, time.perf_counter_ns() - start)
