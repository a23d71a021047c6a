"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to stream the criterion lines.
Every tolerance is pinned here; all randomness is seeded, so a failure is a
defect, not noise.  Desk-scale round-count overrides, where permitted, are
recorded in the printed detail.
"""

import math
import time
from fractions import Fraction

import numpy as np
from scipy import stats

from sparse_ksum import pke
from sparse_ksum.amplify import AmplifyConfig, amplify, crippled, mitm_weak_solver
from sparse_ksum.analysis import (
    exact_divergences,
    monte_carlo_moments,
    sd_bound_check,
)
from sparse_ksum.groups import Family, GroupSpec, make_spec
from sparse_ksum.instances import (
    Instance,
    count_solutions,
    exact_pmf,
    exists_solution,
    sample_d0,
    sample_d1,
    verify,
)
from sparse_ksum.reductions import (
    DecisionOracle,
    decision_round_count,
    ksum_to_vector,
    search_from_decision,
)
from sparse_ksum.rng import Rng, derive_seed
from sparse_ksum.solvers import (
    brute_force,
    exhaustive_subset_sum,
    gauss_kxor,
    meet_in_the_middle,
    next_prime,
    sample_int_ksum,
    sample_zp_ksum,
    solve_zp_ksum_via_subset_sum,
    subset_sum_reduce_worst,
)


def check(n: int, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {n:2d}: {'PASS' if ok else 'FAIL'} - {detail}", flush=True)
    assert ok, f"criterion {n}: {detail}"


def test_criterion_01_moment_formulas():
    t0 = time.perf_counter()
    spec = GroupSpec(Family.XOR, 7)
    null = monte_carlo_moments(spec, 10, 3, "d0", 10_000, 101)
    planted = monte_carlo_moments(spec, 10, 3, "d1", 10_000, 102)
    elapsed = time.perf_counter() - t0
    ok = (
        null.closed_mean == Fraction(15, 16)
        and null.closed_variance == Fraction(15, 16) * Fraction(127, 128)
        and abs(null.z_mean) <= 4
        and abs(null.z_variance) <= 4
        and planted.closed_mean == 1 + Fraction(119, 128)
        and abs(planted.z_mean) <= 4
        and elapsed < 30
    )
    check(1, ok, (
        f"null mean z={null.z_mean:+.2f}, var z={null.z_variance:+.2f}; "
        f"planted mean z={planted.z_mean:+.2f}; 10^4 trials each, {elapsed:.1f}s"
    ))


def test_criterion_02_exact_pmf_identities():
    t0 = time.perf_counter()
    spec = GroupSpec(Family.XOR, 3)
    r, k = 4, 3
    order, c_rk = spec.order, math.comb(r, k)
    p0 = exact_pmf(spec, r, k, "d0")
    p1 = exact_pmf(spec, r, k, "d1")
    counts = {e: count_solutions(Instance(spec, k, e)) for e in p0}

    planted_identity = all(
        p1[e] == Fraction(order, c_rk) * counts[e] * p0[e] for e in p0
    )
    hybrid_identity = True
    for ell in (0, 1, 2, c_rk):
        pl = exact_pmf(spec, r, k, "dell", ell=ell)
        tail = sum((m for e, m in p1.items() if counts[e] > ell), Fraction(0))
        for e in p0:
            keep = Fraction(order, c_rk) * counts[e] if counts[e] <= ell else Fraction(0)
            if pl[e] != (keep + tail) * p0[e]:
                hybrid_identity = False
    elapsed = time.perf_counter() - t0
    ok = planted_identity and hybrid_identity and elapsed < 60
    check(2, ok, (
        f"|G|=8, r=4, k=3: planted density identity and capped-hybrid identity "
        f"hold entrywise in exact rationals for ell in 0,1,2,{c_rk}; {elapsed:.1f}s"
    ))


SD_GRID = [
    (Family.XOR, 2, 2, 4, 3),
    (Family.XOR, 3, 2, 4, 3),
    (Family.XOR, 4, 2, 4, 3),
    (Family.XOR, 3, 2, 5, 4),
    (Family.XOR, 3, 2, 6, 5),
    (Family.MODULAR2M, 3, 2, 4, 3),
    (Family.MODULAR2M, 4, 2, 4, 3),
    (Family.VECTOR_MOD_Q, 2, 3, 4, 3),
    (Family.VECTOR_MOD_Q, 1, 5, 4, 3),
    (Family.VECTOR_MOD_Q, 1, 7, 4, 3),
]


def test_criterion_03_divergence_identities():
    spec = GroupSpec(Family.XOR, 3)
    r, k = 4, 3
    equalities = True
    for ell in (0, 1, 2, math.comb(r, k)):
        rep = exact_divergences(spec, r, k, ell)
        equalities &= rep.renyi_hybrid_null == rep.renyi_closed_form
        equalities &= rep.sd_hybrid_planted == rep.sd_product_form

    bound_ok = 0
    for fam, m, q, gr, gk in SD_GRID:
        rep = sd_bound_check(GroupSpec(fam, m, q), gr, gk)
        if rep.bound_holds and (not rep.identity_applicable
                                or rep.sd_null_planted == rep.pr_no_solution):
            bound_ok += 1
    ok = equalities and bound_ok == len(SD_GRID)
    check(3, ok, (
        f"max-ratio equality and SD product identity exact at |G|=8,r=4,k=3; "
        f"SD < |G|/(|G|+C(r,k)) on {bound_ok}/{len(SD_GRID)} grid points"
    ))


def test_criterion_04_solver_exactness():
    rng = Rng(104)
    configs = [(16, 3, 8), (16, 3, 12), (12, 3, 6), (14, 4, 9), (16, 4, 12)]
    trials_per = 100  # x2 distributions x5 configs = 1000 instances
    mismatches = 0
    total = 0
    for r, k, m in configs:
        spec = GroupSpec(Family.XOR, m)
        for t in range(trials_per):
            for dist, sampler in (("d0", sample_d0), ("d1", sample_d1)):
                inst = sampler(spec, r, k, rng.child(r, k, m, dist, t)).hide()
                total += 1
                if brute_force(inst).ok != meet_in_the_middle(inst).ok:
                    mismatches += 1
    ok = mismatches == 0 and total == 1000
    check(4, ok, f"meet-in-the-middle vs brute force: {mismatches} discrepancies "
                 f"over {total} mixed instances (r<=16, k<=4)")


def test_criterion_05_elimination_solver():
    t0 = time.perf_counter()
    rng = Rng(105)
    spec_sq = GroupSpec(Family.XOR, 64)
    wins_sq = 0
    for t in range(200):
        inst = sample_d1(spec_sq, 64, 4, rng.child("sq", t))
        res = gauss_kxor(inst.hide(), rng.child("sqg", t))
        if res.found is not None and verify(inst, res.found):
            wins_sq += 1
    spec_tall = GroupSpec(Family.XOR, 192)
    wins_tall = 0
    for t in range(200):
        inst = sample_d1(spec_tall, 96, 4, rng.child("tl", t))
        res = gauss_kxor(inst.hide(), rng.child("tlg", t))
        if res.found is not None and verify(inst, res.found):
            wins_tall += 1
    elapsed = time.perf_counter() - t0
    ok = wins_sq >= 180 and wins_tall >= 190 and elapsed < 120
    check(5, ok, (
        f"square r=64,k=4,m=64: {wins_sq}/200 (need >=180); "
        f"tall r=96,m=192: {wins_tall}/200 (need >=190); {elapsed:.1f}s"
    ))


def test_criterion_06_search_from_decision():
    r, k, gamma, scale = 12, 3, 0.1, 1 / 64
    spec = make_spec(r, k, Fraction(1, 2), Family.XOR)
    full_rounds = decision_round_count(r, k, gamma)
    eff_rounds = decision_round_count(r, k, gamma, scale)
    assert full_rounds == math.ceil(2 ** 13 * math.log(120)) == 39220

    oracle = DecisionOracle(lambda inst: exists_solution(inst))
    rng = Rng(106)
    wins = 0
    gaps = []
    for t in range(200):
        inst = sample_d1(spec, r, k, rng.child("i", t))
        res, state = search_from_decision(
            inst.hide(), oracle, gamma, rng.child("s", t), round_scale=scale
        )
        if res.found is not None and verify(inst, res.found):
            wins += 1
        planted = set(inst.planted)
        in_mean = sum(state.counters[i] for i in planted) / k
        out_mean = sum(
            state.counters[i] for i in range(r) if i not in planted
        ) / (r - k)
        gaps.append(in_mean - out_mean)
    gap_mean = sum(gaps) / len(gaps)
    gap_se = math.sqrt(
        sum((g - gap_mean) ** 2 for g in gaps) / (len(gaps) - 1) / len(gaps)
    )
    threshold = eff_rounds / 2 ** (k + 4)
    ok = wins >= 180 and (gap_mean - 3 * gap_se) >= threshold
    check(6, ok, (
        f"recovery {wins}/200 (need >=180); counter gap {gap_mean:.1f} "
        f"(-3se {gap_mean - 3 * gap_se:.1f}) >= p/2^(k+4) = {threshold:.1f}; "
        f"p = ceil(2^13 ln 120) = {full_rounds}, run at recorded scale 1/64 "
        f"({eff_rounds} rounds)"
    ))


def test_criterion_07_worst_case_subset_sum():
    rng = Rng(107)
    good = 0
    size_ok = True
    for t in range(100):
        inst = sample_int_ksum(12, 3, 100, rng.child(t))
        ss = subset_sum_reduce_worst(inst.values, inst.k)
        found = exhaustive_subset_sum(ss)
        if found is None or len(found) != inst.k:
            size_ok = False
            continue
        if inst.solution_ok(tuple(sorted(found))):
            good += 1
    ok = good == 100 and size_ok
    check(7, ok, f"mapped-back solutions verify {good}/100; "
                 f"every backend solution has size exactly k={3}")


def test_criterion_08_average_case_subset_sum():
    p = next_prime(2 ** 24)
    rng = Rng(108)
    trials = 500
    recovered = 0
    disjoint = 0
    backend_hits_on_disjoint = 0
    for t in range(trials):
        inst = sample_zp_ksum(12, 3, p, rng.child("i", t))
        out = solve_zp_ksum_via_subset_sum(
            inst, exhaustive_subset_sum, rng.child("r", t)
        )
        recovered += out.solution is not None
        if out.padding_disjoint:
            disjoint += 1
            backend_hits_on_disjoint += out.backend_found
    end_rate = recovered / trials
    backend_rate = backend_hits_on_disjoint / max(1, disjoint)
    target = backend_rate * 2 ** -3
    ratio = end_rate / target if target else float("inf")
    ok = 0.5 <= ratio <= 2.0
    check(8, ok, (
        f"end-to-end rate {end_rate:.3f} vs backend-rate*2^-k = {target:.3f} "
        f"(ratio {ratio:.2f}, need within factor 2); p={p}, {trials} trials"
    ))


def test_criterion_09_carry_vector_reduction():
    q, m, k, r = 5, 2, 3, 8
    modulus = q ** m
    rng = Rng(109)
    hits = 0
    for t in range(200):
        child = rng.child(t)
        values = [child.randrange(modulus) for _ in range(r)]
        planted = tuple(sorted(child.sample(range(r), k)))
        values[planted[0]] = (-sum(values[i] for i in planted[1:])) % modulus
        carriers = list(ksum_to_vector(values, q, m, k))
        assert len(carriers) == k ** m == 9
        if any(verify(inst, planted) for _, inst in carriers):
            hits += 1
    ok = hits == 200
    check(9, ok, f"some carry vector among k^m=9 exposes the planted set "
                 f"in {hits}/200 planted mod-25 instances")


def test_criterion_10_amplification_uplift():
    import warnings

    spec = make_spec(16, 3, Fraction(7, 10), Family.XOR)
    scales = dict(obf_scale=0.5, walk_scale=0.25, outer_scale=1e-6)
    cfg = AmplifyConfig(gamma=Fraction(1, 5), **scales)
    weak = crippled(mitm_weak_solver(), 0.2)
    rng = Rng(110)
    amped = raw = 0
    sound = True
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        for t in range(100):
            inst = sample_d1(spec, 16, 3, rng.child("i", t))
            hidden = inst.hide()
            raw += weak(hidden, rng.child("raw", t)) is not None
            res = amplify(hidden, weak, cfg, rng.child("amp", t))
            if res.found is not None:
                if not verify(inst, res.found):
                    sound = False
                amped += 1
    raw_rate = raw / 100
    lo, hi = pke.wilson_interval(raw, 100)
    ok = amped >= 95 and sound and abs(raw_rate - 0.2) <= 0.12
    check(10, ok, (
        f"amplified {amped}/100 (need >=95) vs raw {raw_rate:.2f} "
        f"(95% CI [{lo:.2f},{hi:.2f}], target 0.2); no non-verifying output; "
        f"recorded overrides {scales} -> rounds obf={cfg.obf_rounds(16, 3)}, "
        f"walk={cfg.walk_steps(16)}, outer={cfg.outer_rounds(16, 3)}"
    ))


def test_criterion_11_density_lift_survival():
    from sparse_ksum.amplify import extend_with_random_rows, randomize_high_digits

    trials = 10_000
    rows = 4
    p_survive = 2.0 ** -rows
    sigma = math.sqrt(trials * p_survive * (1 - p_survive))

    vec_spec = GroupSpec(Family.VECTOR_MOD_Q, 12, 2)
    rng = Rng(111)
    vec_inst = sample_d1(vec_spec, 16, 3, rng.child("v"))
    vec_hits = sum(
        extend_with_random_rows(vec_inst, rows, rng.child("ve", t)).planted is not None
        for t in range(trials)
    )

    mod_spec = GroupSpec(Family.MODULAR2M, 12)
    mod_inst = sample_d1(mod_spec, 16, 3, rng.child("m"))
    mod_hits = sum(
        randomize_high_digits(mod_inst, rows, rng.child("me", t)).planted is not None
        for t in range(trials)
    )
    expect = trials * p_survive
    ok = abs(vec_hits - expect) <= 3 * sigma and abs(mod_hits - expect) <= 3 * sigma
    check(11, ok, (
        f"per-round survival: vector {vec_hits}/{trials}, modular "
        f"{mod_hits}/{trials}, expected {expect:.0f} +/- {3 * sigma:.0f} "
        f"(3 sigma, q^-rows = 2^-{rows})"
    ))


def test_criterion_12_pke_correctness():
    t0 = time.perf_counter()
    trials = 2000
    full_ell = 430  # pinned repetition count; above the derived floor of 429
    grid = [27, 54, 108, 215, 430]
    params_by_ell = {e: pke.PkeParams(r=64, m=16, k=4, eta=0.125, ell=e) for e in grid}
    full = params_by_ell[full_ell]
    errs = {e: [0, 0] for e in grid}
    for t in range(trials):
        key = pke.keygen(full, derive_seed(112, ["kg", t]))
        mask = key.sk_mask
        for b in (0, 1):
            ct = pke.encrypt(key, b, derive_seed(112, ["enc", t, b]))
            parities = pke.parity_with_mask(ct.matrix, mask)
            cum = np.cumsum(parities)
            for e in grid:
                bit = 0 if cum[e - 1] > params_by_ell[e].decision_threshold else 1
                if bit != b:
                    errs[e][b] += 1
    elapsed = time.perf_counter() - t0
    final0, final1 = errs[full_ell][0] / trials, errs[full_ell][1] / trials
    combined = [sum(errs[e]) for e in grid]
    monotone = all(combined[i + 1] <= combined[i] for i in range(len(grid) - 1))
    ok = final0 <= 0.02 and final1 <= 0.02 and monotone and elapsed < 120
    check(12, ok, (
        f"eta=1/8,k=4,ell=430: per-bit error {final0:.4f}/{final1:.4f} "
        f"(need <=0.02, {trials} round trips per bit); error counts over "
        f"doubling ell grid {grid}: {combined} monotone={monotone}; {elapsed:.1f}s"
    ))


def test_criterion_13_pke_hybrid_structure():
    params = pke.PkeParams.with_derived_ell(r=32, m=16, k=4, eta=0.125)
    n = 10_000
    w_hybrid = []
    w_enc = []
    for t in range(n):
        hs = pke.hybrid_sample(params.ell, 1, params, derive_seed(113, ["h", t]))
        mask = pke.index_mask(hs.sk, params.r)
        w_hybrid.append(int(pke.parity_with_mask(hs.matrix, mask).sum()))
        key = pke.keygen(params, derive_seed(113, ["kg", t]))
        ct = pke.encrypt(key, 1, derive_seed(113, ["e", t]))
        w_enc.append(pke.ciphertext_weight(key, ct))
    ks = stats.ks_2samp(w_hybrid, w_enc)

    def top_hybrid(seed):
        return pke.hybrid_sample(params.ell, 1, params, seed)

    def bottom_hybrid(seed):
        return pke.hybrid_sample(0, 1, params, seed)

    def sk_holder(sample):
        return pke.decrypt(sample.sk, pke.Ciphertext(sample.matrix), params)

    holder = pke.distinguisher_harness(top_hybrid, bottom_hybrid, sk_holder, 500, 114)

    noiseless = pke.PkeParams(r=32, m=12, k=3, eta=0.0, ell=64)
    attacker = pke.rank_attacker(noiseless.m)

    def enc_bit(bit):
        def sampler(seed):
            key = pke.keygen(noiseless, seed)
            ct = pke.encrypt(key, bit, derive_seed(seed, ["ct"]))
            return pke.HybridSample(key.pk, ct.matrix, key.sk, ())

        return sampler

    rank = pke.distinguisher_harness(enc_bit(1), enc_bit(0), attacker, 200, 115)
    ok = ks.pvalue > 0.001 and holder.advantage >= 0.9 and rank.advantage >= 0.9
    check(13, ok, (
        f"weight-statistic KS p={ks.pvalue:.3f} over {n} samples (need >0.001); "
        f"sk-holder advantage {holder.advantage:.3f} (need >=0.9); "
        f"eta=0 rank-attack advantage {rank.advantage:.3f} (need >=0.9)"
    ))
