"""Bit encryption from planted column dependencies plus learning-parity noise.

The public key is an m x r bit matrix whose columns carry a hidden weight-k
zero-XOR dependency; the secret key is the location of that dependency.  A
one-bit message is encrypted as ell rows that are either all uniform (bit 0)
or all noisy random row-combinations of the public key (bit 1); decryption
thresholds the weight of C * sk, which collapses the structured rows to pure
noise rows.

All bit matrices are packed 64 columns per uint64 limb (LSB first within a
limb).  Functions accept either an integer seed (a fresh generator is built
from it) or a numpy Generator (consumed statefully); harnesses derive
per-trial child seeds through the toolkit seed chain.

This is an experimental apparatus for measuring correctness and simple
distinguishers, not a hardened cryptosystem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import InvalidParam
from .rng import Rng, derive_seed

SeedLike = Union[int, np.random.Generator]

_U64 = np.uint64


def _gen(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, Rng):
        raise TypeError("pass an integer seed (e.g. rng.seed) or numpy Generator")
    return np.random.Generator(np.random.PCG64(int(seed)))


def nlimbs(cols: int) -> int:
    return (cols + 63) // 64


def _tail_mask(cols: int) -> int:
    rem = cols % 64
    return (1 << rem) - 1 if rem else (1 << 64) - 1


def random_bits(gen: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    out = gen.integers(0, 1 << 64, size=(rows, nlimbs(cols)), dtype=_U64)
    out[:, -1] &= _U64(_tail_mask(cols))
    return out


def bernoulli_bits(
    gen: np.random.Generator, rows: int, cols: int, p: float
) -> np.ndarray:
    if p <= 0:
        return np.zeros((rows, nlimbs(cols)), dtype=_U64)
    return pack_bool(gen.random((rows, cols)) < p)


def pack_bool(bits: np.ndarray) -> np.ndarray:
    """Pack a (rows, cols) boolean array into (rows, nlimbs) uint64 limbs."""
    rows, cols = bits.shape
    if rows == 0:
        return np.zeros((0, nlimbs(cols)), dtype=_U64)
    width = nlimbs(cols) * 64
    padded = np.zeros((rows, width), dtype=_U64)
    padded[:, :cols] = bits
    chunks = padded.reshape(rows, -1, 64)
    weights = (_U64(1) << np.arange(64, dtype=_U64))[None, None, :]
    return (chunks * weights).sum(axis=2, dtype=_U64)


def unpack_bool(packed: np.ndarray, cols: int) -> np.ndarray:
    rows = packed.shape[0]
    idx = np.arange(cols)
    limb = packed[:, idx // 64]
    return ((limb >> (idx % 64).astype(_U64)) & _U64(1)).astype(bool).reshape(rows, cols)


def index_mask(indices: Sequence[int], cols: int) -> np.ndarray:
    """Packed single row with ones exactly at the given column indices."""
    mask = np.zeros(nlimbs(cols), dtype=_U64)
    for i in indices:
        if not (0 <= i < cols):
            raise IndexError(f"column {i} out of range [0,{cols})")
        mask[i // 64] |= _U64(1) << _U64(i % 64)
    return mask


def parity_with_mask(matrix: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Per-row parity of the bits selected by a packed mask."""
    return (np.bitwise_count(matrix & mask[None, :]).sum(axis=1) & 1).astype(np.uint8)


def to_base64(matrix: np.ndarray) -> str:
    import base64

    return base64.b64encode(np.ascontiguousarray(matrix).tobytes()).decode("ascii")


def from_base64(payload: str, rows: int, cols: int) -> np.ndarray:
    import base64

    raw = np.frombuffer(base64.b64decode(payload), dtype=_U64)
    return raw.reshape(rows, nlimbs(cols)).copy()


# ---------------------------------------------------------------------------
# Parameters, keys, ciphertexts
# ---------------------------------------------------------------------------


def derive_repetitions(eta: float, k: int, eps_target: float = 0.01) -> int:
    """Smallest repetition count guaranteeing decryption error <= eps_target:
    ceil(32 * (1-eta)^(-2k) * ln(1/eps))."""
    if not (0 < eps_target < 1):
        raise InvalidParam("eps_target must be in (0,1)")
    return math.ceil(32 * (1 - eta) ** (-2 * k) * math.log(1 / eps_target))


@dataclass(frozen=True)
class PkeParams:
    """Column count r, row count m, dependency size k, noise rate eta,
    repetition count ell.

    eta = 0 is allowed for noiseless diagnostics (rank attacks), though the
    scheme proper uses eta in (0,1).
    """

    r: int
    m: int
    k: int
    eta: float
    ell: int

    def __post_init__(self):
        if self.k > self.r:
            raise InvalidParam(f"need k <= r, got k={self.k}, r={self.r}")
        if self.m < 1 or self.ell < 1:
            raise InvalidParam("m and ell must be >= 1")
        if not (0 <= self.eta < 1):
            raise InvalidParam(f"eta must be in [0,1), got {self.eta}")

    @staticmethod
    def with_derived_ell(
        r: int, m: int, k: int, eta: float, eps_target: float = 0.01
    ) -> "PkeParams":
        return PkeParams(r, m, k, eta, derive_repetitions(eta, k, eps_target))

    @property
    def decision_threshold(self) -> float:
        return self.ell * (0.5 - (1 - self.eta) ** self.k / 4)


@dataclass(frozen=True)
class PkeKeyPair:
    pk: np.ndarray  # (m, nlimbs(r)) packed rows
    sk: Tuple[int, ...]  # sorted k column indices
    params: PkeParams

    @property
    def sk_mask(self) -> np.ndarray:
        return index_mask(self.sk, self.params.r)


@dataclass(frozen=True)
class Ciphertext:
    matrix: np.ndarray  # (ell, nlimbs(r)) packed rows


def keygen(params: PkeParams, rng_seed: SeedLike) -> PkeKeyPair:
    """Uniform matrix with one column overwritten so the sk columns XOR to zero.

    The overwritten column is the smallest index of the secret set, mirroring
    the planted-instance sampler (columns are the instance's elements)."""
    gen = _gen(rng_seed)
    r, m, k = params.r, params.m, params.k
    pk = random_bits(gen, m, r)
    sk = tuple(sorted(int(i) for i in gen.choice(r, size=k, replace=False)))
    i0 = sk[0]
    others = index_mask(sk[1:], r)
    par = parity_with_mask(pk, others).astype(_U64)
    limb, bit = i0 // 64, _U64(i0 % 64)
    pk[:, limb] = (pk[:, limb] & ~(_U64(1) << bit)) | (par << bit)
    return PkeKeyPair(pk, sk, params)


def _rows_times_pk(
    gen: np.random.Generator, pk: np.ndarray, m: int, count: int
) -> np.ndarray:
    """count rows of the form s^T pk for fresh uniform s."""
    s_bool = gen.random((count, m)) < 0.5
    out = np.zeros((count, pk.shape[1]), dtype=_U64)
    for i in range(m):
        out[s_bool[:, i]] ^= pk[i]
    return out


def encrypt(key: PkeKeyPair, bit: int, rng_seed: SeedLike) -> Ciphertext:
    """bit=0: uniform ell x r matrix.  bit=1: S pk + E with E ~ Ber(eta/2)."""
    gen = _gen(rng_seed)
    p = key.params
    if bit == 0:
        return Ciphertext(random_bits(gen, p.ell, p.r))
    if bit != 1:
        raise InvalidParam("message bit must be 0 or 1")
    c = _rows_times_pk(gen, key.pk, p.m, p.ell)
    c ^= bernoulli_bits(gen, p.ell, p.r, p.eta / 2)
    return Ciphertext(c)


def decrypt(sk: Sequence[int], ct: Ciphertext, params: PkeParams) -> int:
    """Threshold ||C sk||_0 at ell(1/2 - (1-eta)^k / 4); above means bit 0."""
    mask = index_mask(sk, params.r)
    weight = int(parity_with_mask(ct.matrix, mask).sum())
    return 0 if weight > params.decision_threshold else 1


def ciphertext_weight(key: PkeKeyPair, ct: Ciphertext) -> int:
    """||C sk||_0, the statistic decryption thresholds."""
    return int(parity_with_mask(ct.matrix, key.sk_mask).sum())


# ---------------------------------------------------------------------------
# LPN sampling
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LpnSample:
    """(X, y) with X an r x m bit matrix; honest samples carry (s, e)."""

    x: np.ndarray  # (r, nlimbs(m)) packed rows
    y: np.ndarray  # (1, nlimbs(r)) packed row
    m: int
    r: int
    ground_truth: Optional[Tuple[np.ndarray, np.ndarray]] = None  # (s, e) packed rows


def lpn_sample(
    m: int, r: int, eta: float, secret_fresh: bool, rng_seed: SeedLike
) -> LpnSample:
    """secret_fresh=True: y = X s + e for fresh uniform s and Ber(eta) noise e.
    secret_fresh=False: y uniform, no ground truth."""
    gen = _gen(rng_seed)
    x = random_bits(gen, r, m)
    if not secret_fresh:
        return LpnSample(x, random_bits(gen, 1, r), m, r)
    s = random_bits(gen, 1, m)
    e = bernoulli_bits(gen, 1, r, eta)
    y_bits = parity_with_mask(x, s[0]).astype(bool)[None, :]
    y = pack_bool(y_bits) ^ e
    return LpnSample(x, y, m, r, ground_truth=(s, e))


# ---------------------------------------------------------------------------
# Hybrid distributions for distinguishing experiments
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HybridSample:
    pk: np.ndarray
    matrix: np.ndarray
    sk: Optional[Tuple[int, ...]]
    row_rules: Tuple[str, ...]  # "lpn" or "uniform" per row, pre-shuffle order


def hybrid_sample(
    i: int,
    b: int,
    params: PkeParams,
    rng_seed: SeedLike,
    shuffle_rows: bool = False,
) -> HybridSample:
    """Key from the planted (b=1) or uniform (b=0) matrix distribution, then
    i noisy row-combination rows followed by ell - i uniform rows.

    Honest rows come first (deterministic order); order-blind distinguishers
    can request a row shuffle instead.
    """
    if not (0 <= i <= params.ell):
        raise InvalidParam(f"need 0 <= i <= ell, got i={i}")
    gen = _gen(rng_seed)
    if b == 1:
        key = keygen(params, gen)
        pk, sk = key.pk, key.sk
    elif b == 0:
        pk, sk = random_bits(gen, params.m, params.r), None
    else:
        raise InvalidParam("b must be 0 or 1")
    honest = _rows_times_pk(gen, pk, params.m, i)
    honest ^= bernoulli_bits(gen, i, params.r, params.eta / 2)
    uniform = random_bits(gen, params.ell - i, params.r)
    matrix = np.concatenate([honest, uniform], axis=0)
    rules = ("lpn",) * i + ("uniform",) * (params.ell - i)
    if shuffle_rows:
        matrix = matrix[gen.permutation(params.ell)]
    return HybridSample(pk, matrix, sk, rules)


# ---------------------------------------------------------------------------
# Distinguishers and the advantage harness
# ---------------------------------------------------------------------------


def wilson_interval(successes: int, n: int, z: float = 1.96) -> Tuple[float, float]:
    if n == 0:
        return (0.0, 1.0)
    phat = successes / n
    denom = 1 + z * z / n
    center = (phat + z * z / (2 * n)) / denom
    rad = z * math.sqrt(phat * (1 - phat) / n + z * z / (4 * n * n)) / denom
    return (max(0.0, center - rad), min(1.0, center + rad))


@dataclass(frozen=True)
class AdvantageReport:
    trials: int
    rate_a: float
    rate_b: float
    ci_a: Tuple[float, float]
    ci_b: Tuple[float, float]
    advantage: float
    root_seed: int

    @property
    def advantage_lower(self) -> float:
        """Conservative lower bound: CI endpoints pushed toward each other."""
        if self.rate_a >= self.rate_b:
            return max(0.0, self.ci_a[0] - self.ci_b[1])
        return max(0.0, self.ci_b[0] - self.ci_a[1])


def distinguisher_harness(
    sampler_a: Callable[[int], object],
    sampler_b: Callable[[int], object],
    attacker: Callable[[object], int],
    trials: int,
    root_seed: int,
) -> AdvantageReport:
    """Empirical |Pr[attacker=1 on A] - Pr[attacker=1 on B]| with Wilson CIs.

    Samplers receive derived per-trial seeds, so every trial replays from
    (root_seed, trial index) alone.
    """
    if trials < 100:
        raise InvalidParam("need at least 100 trials for a meaningful interval")
    hits_a = hits_b = 0
    for t in range(trials):
        hits_a += 1 if attacker(sampler_a(derive_seed(root_seed, ["a", t]))) else 0
        hits_b += 1 if attacker(sampler_b(derive_seed(root_seed, ["b", t]))) else 0
    rate_a, rate_b = hits_a / trials, hits_b / trials
    return AdvantageReport(
        trials,
        rate_a,
        rate_b,
        wilson_interval(hits_a, trials),
        wilson_interval(hits_b, trials),
        abs(rate_a - rate_b),
        root_seed,
    )


def gf2_rank(matrix: np.ndarray) -> int:
    """Rank over GF(2) of packed rows."""
    limbs = matrix.shape[1]
    pivots: dict = {}
    for raw in matrix:
        v = 0
        for j in range(limbs):
            v |= int(raw[j]) << (64 * j)
        while v:
            b = v.bit_length() - 1
            if b in pivots:
                v ^= pivots[b]
            else:
                pivots[b] = v
                break
    return len(pivots)


def rank_attacker(m: int, slack: int = 2) -> Callable[[HybridSample], int]:
    """Flags samples whose rows span an (m + slack)-dimensional space or less,
    i.e. are consistent with low-rank structure plus sparse noise at eta ~ 0."""

    def attack(sample: HybridSample) -> int:
        return 1 if gf2_rank(sample.matrix) <= m + slack else 0

    return attack
