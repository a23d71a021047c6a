"""Command-line front end: gen, solve, reduce, amplify, stats, pke, replay.

Conventions:
  * every randomized command requires --seed; outputs embed the seed and the
    package version so any result row replays bit-for-bit;
  * single artifacts are JSON, grids are CSV; files are written atomically;
  * exit codes: 0 clean, 1 assertion failure (a measured value out of band),
    2 bad configuration, 3 budget exceeded, 4 I/O error;
  * SPARSE_KSUM_BUDGET overrides the default enumeration budget.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import tempfile
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Dict, List, Optional

from . import __version__
from .errors import BudgetExceeded, ConfigError, KsumError, VersionMismatch
from .groups import Family, GroupSpec, make_spec
from .instances import (
    DEFAULT_SUBSET_BUDGET,
    Instance,
    exists_solution,
    sample_d0,
    sample_d1,
    sample_d_ell,
    verify,
)
from .reductions import (
    DecisionOracle,
    exact_targeted_oracle,
    ksum_to_vector,
    search_from_decision,
    vector_to_targeted,
)
from .rng import derive_seed
from .solvers import (
    IntKsumInstance,
    ZpKsumInstance,
    brute_force,
    density_k_to_kprime,
    density_subsample,
    exhaustive_subset_sum,
    gauss_kxor,
    meet_in_the_middle,
    mitm_subset_sum,
    sample_int_ksum,
    sample_zp_ksum,
    solve_int_ksum_via_subset_sum,
    solve_zp_ksum_via_subset_sum,
)

SCHEMA_VERSION = 1
EXIT_ASSERT = 1
EXIT_CONFIG = 2
EXIT_BUDGET = 3
EXIT_IO = 4


def _budget(args) -> int:
    if args.budget is not None:
        return args.budget
    env = os.environ.get("SPARSE_KSUM_BUDGET")
    return int(env) if env else DEFAULT_SUBSET_BUDGET


def _require_seed(args) -> int:
    if args.seed is None:
        raise ConfigError("--seed is mandatory for randomized commands")
    return args.seed


def _atomic_write(path: str, payload: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".sparse-ksum-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(payload)
        os.replace(tmp, path)
    except OSError as e:  # pragma: no cover - filesystem dependent
        raise KsumError(f"cannot write {path}: {e}") from e


def _emit(args, obj) -> None:
    payload = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if args.out:
        _atomic_write(args.out, payload)
    else:
        sys.stdout.write(payload)


def _emit_rows(args, rows: List[Dict]) -> None:
    if args.format == "json":
        _emit(args, rows)
        return
    buf = io.StringIO()
    if rows:
        writer = csv.DictWriter(buf, fieldnames=sorted(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    if args.out:
        _atomic_write(args.out, buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())


def result_row(command: str, params: Dict, seed: Optional[int], metrics: Dict) -> Dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "seed": seed,
        "metrics": metrics,
        "version": __version__,
    }


# ---------------------------------------------------------------------------
# Instance files (three kinds: group, integer, prime-modulus)
# ---------------------------------------------------------------------------


def instance_to_json(inst) -> Dict:
    if isinstance(inst, Instance):
        out = inst.to_json()
        out["kind"] = "group"
        return out
    if isinstance(inst, IntKsumInstance):
        return {
            "kind": "int",
            "values": list(inst.values),
            "k": inst.k,
            "planted": list(inst.planted) if inst.planted else None,
        }
    if isinstance(inst, ZpKsumInstance):
        return {
            "kind": "zp",
            "values": list(inst.values),
            "p": inst.p,
            "k": inst.k,
            "planted": list(inst.planted) if inst.planted else None,
        }
    raise ConfigError(f"unknown instance type {type(inst)!r}")


def instance_from_json(obj: Dict):
    kind = obj.get("kind", "group")
    if kind == "group":
        return Instance.from_json(obj)
    planted = tuple(obj["planted"]) if obj.get("planted") else None
    if kind == "int":
        return IntKsumInstance(tuple(obj["values"]), int(obj["k"]), planted)
    if kind == "zp":
        return ZpKsumInstance(tuple(obj["values"]), int(obj["p"]), int(obj["k"]), planted)
    raise ConfigError(f"unknown instance kind {kind!r}")


def _load_instance(path: str):
    try:
        with open(path) as f:
            return instance_from_json(json.load(f))
    except FileNotFoundError as e:
        raise KsumError(f"cannot read {path}") from e


# ---------------------------------------------------------------------------
# gen
# ---------------------------------------------------------------------------


def _generate_instance(gen: Dict, seed: int, budget: int):
    fam = gen["family"]
    r, k = int(gen["r"]), int(gen["k"])
    dist = gen["dist"]
    if fam in ("xor", "modular2m", "vector"):
        spec = make_spec(r, k, Fraction(gen["delta"]), Family(fam), q=int(gen["q"]))
        if dist == "d0":
            return sample_d0(spec, r, k, seed)
        if dist == "d1":
            return sample_d1(spec, r, k, seed)
        if dist == "dell":
            if gen.get("ell") is None:
                raise ConfigError("--ell is required for dist=dell")
            return sample_d_ell(spec, r, k, int(gen["ell"]), seed, budget=budget)
        raise ConfigError(f"unknown dist {dist}")
    if fam == "int":
        return sample_int_ksum(r, k, int(gen["bound"]), seed, planted=dist == "d1")
    if fam == "zp":
        return sample_zp_ksum(r, k, int(gen["p"]), seed, planted=dist == "d1")
    raise ConfigError(f"unknown family {fam}")


def cmd_gen(args) -> int:
    seed = _require_seed(args)
    gen = {
        "family": args.family, "r": args.r, "k": args.k, "delta": str(args.delta),
        "q": args.q, "dist": args.dist, "ell": args.ell, "bound": args.bound,
        "p": args.p, "hide_planted": bool(args.hide_planted),
        "schema_version": SCHEMA_VERSION,
    }
    inst = _generate_instance(gen, seed, _budget(args))
    obj = instance_to_json(inst)
    if args.hide_planted:
        obj["planted"] = None
    obj["seed"] = seed
    obj["gen"] = gen
    _emit(args, obj)
    return 0


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    inst = _load_instance(args.infile)
    budget = _budget(args)
    metrics: Dict = {}
    if args.algo in ("brute", "mitm", "gauss"):
        if not isinstance(inst, Instance):
            raise ConfigError(f"--algo {args.algo} needs a group instance")
        if args.algo == "brute":
            res = brute_force(inst, budget=budget)
        elif args.algo == "mitm":
            res = meet_in_the_middle(inst)
        else:
            res = gauss_kxor(inst, _require_seed(args))
        metrics = {
            "found": list(res.found) if res.found else None,
            "verified": bool(res.found and verify(inst, res.found)),
            "subsets_examined": res.subsets_examined,
            "wall_nanos": res.wall_nanos,
        }
    elif args.algo == "subsetsum-worst":
        if not isinstance(inst, IntKsumInstance):
            raise ConfigError("subsetsum-worst needs an integer instance")
        backend = exhaustive_subset_sum if args.backend == "exhaustive" else mitm_subset_sum
        sol = solve_int_ksum_via_subset_sum(inst, backend)
        metrics = {"found": list(sol) if sol else None, "verified": sol is not None}
    elif args.algo == "subsetsum-avg":
        if not isinstance(inst, ZpKsumInstance):
            raise ConfigError("subsetsum-avg needs a prime-modulus instance")
        backend = exhaustive_subset_sum if args.backend == "exhaustive" else mitm_subset_sum
        out = solve_zp_ksum_via_subset_sum(inst, backend, _require_seed(args))
        metrics = {
            "found": list(out.solution) if out.solution else None,
            "verified": out.solution is not None,
            "padding_disjoint": out.padding_disjoint,
            "backend_found": out.backend_found,
        }
    else:
        raise ConfigError(f"unknown algo {args.algo}")
    _emit(args, result_row("solve", {"algo": args.algo, "infile": args.infile}, args.seed, metrics))
    return 0


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------


def cmd_reduce(args) -> int:
    seed = _require_seed(args)
    inst = _load_instance(args.infile)
    budget = _budget(args)
    if args.kind == "s2d":
        if not isinstance(inst, Instance):
            raise ConfigError("s2d needs a group instance")
        oracle = DecisionOracle(lambda x: exists_solution(x, budget=budget))
        res, state = search_from_decision(inst, oracle, args.gamma, seed, args.round_scale)
        metrics = {
            "found": list(res.found) if res.found else None,
            "selected": list(state.selected),
            "rounds": state.rounds_completed,
            "counters": state.counters,
            "oracle_answers": state.oracle_answers,
        }
    elif args.kind == "k2v":
        if not isinstance(inst, ZpKsumInstance):
            raise ConfigError("k2v needs a modulus-q^m instance (kind zp with p = q^m)")
        if args.vq ** args.vm != inst.p:
            raise ConfigError("q^m must equal the instance modulus")
        if inst.k ** args.vm > 10 ** 6:
            raise BudgetExceeded("carry space k^m exceeds 10^6 matrices")
        mats = []
        for v, vec_inst in ksum_to_vector(inst.values, args.vq, args.vm, inst.k):
            mats.append({"carry": list(v), "instance": instance_to_json(vec_inst)})
        metrics = {"count": len(mats), "matrices": mats}
    elif args.kind == "v2t":
        if not isinstance(inst, Instance) or inst.spec.family is not Family.VECTOR_MOD_Q:
            raise ConfigError("v2t needs a vector-family instance")
        oracle = exact_targeted_oracle(inst.spec, inst.k)
        answers: List[int] = []

        def logged(target, elements):
            a = oracle(target, elements)
            answers.append(a)
            return a

        bit = vector_to_targeted(inst, logged, seed, args.rounds_multiplier)
        metrics = {"bit": bit, "oracle_answers": answers}
    elif args.kind == "subsample":
        if not isinstance(inst, Instance):
            raise ConfigError("subsample needs a group instance")
        inner = brute_force if args.inner == "brute" else meet_in_the_middle
        res = density_subsample(inst, Fraction(args.delta_target), inner, seed)
        metrics = {"found": list(res.found) if res.found else None,
                   "rounds": res.subsets_examined}
    elif args.kind == "kshift":
        if not isinstance(inst, Instance):
            raise ConfigError("kshift needs a group instance")
        out = density_k_to_kprime(inst, args.k1, seed)
        metrics = {
            "instance": instance_to_json(out.instance),
            "index_map": [list(src) for src in out.index_map],
            "dropped": list(out.dropped),
        }
    else:
        raise ConfigError(f"unknown reduce kind {args.kind}")
    _emit(args, result_row("reduce", {"kind": args.kind, "infile": args.infile}, seed, metrics))
    return 0


# ---------------------------------------------------------------------------
# amplify
# ---------------------------------------------------------------------------


def cmd_amplify(args) -> int:
    from .amplify import AmplifyConfig, WeakSolver, amplify, crippled, mitm_weak_solver

    seed = _require_seed(args)
    inst = _load_instance(args.infile)
    if not isinstance(inst, Instance):
        raise ConfigError("amplify needs a group instance")
    if args.weak == "mitm":
        weak = mitm_weak_solver()
    elif args.weak == "gauss":
        weak = WeakSolver(lambda i, rng: gauss_kxor(i, rng).found, 1.0, "gauss")
    elif args.weak.startswith("crippled:"):
        weak = crippled(mitm_weak_solver(), float(args.weak.split(":", 1)[1]))
    else:
        raise ConfigError(f"unknown weak solver {args.weak}")
    cfg = AmplifyConfig(
        gamma=Fraction(args.gamma),
        alpha=args.alpha,
        obf_scale=args.rounds_scale,
        walk_scale=args.rounds_scale,
        outer_scale=args.rounds_scale,
    )
    trace: List[Dict] = []
    if args.trace:
        base_fn = weak.fn

        def traced(i, rng, _fn=base_fn):
            got = _fn(i, rng)
            trace.append({"call": len(trace), "found": list(got) if got else None})
            return got

        weak = WeakSolver(traced, weak.gamma, weak.name)
    res = amplify(inst.hide(), weak, cfg, seed)
    metrics = {
        "found": list(res.found) if res.found else None,
        "weak_calls": res.subsets_examined,
        "scales": {"rounds_scale": args.rounds_scale},
    }
    if args.trace:
        metrics["trace"] = trace
    _emit(args, result_row("amplify", {"weak": args.weak, "gamma": args.gamma}, seed, metrics))
    return 0


# ---------------------------------------------------------------------------
# stats
# ---------------------------------------------------------------------------


def _parse_grid(text: str) -> List[Dict[str, int]]:
    try:
        cells = []
        for chunk in text.split(";"):
            cell: Dict[str, int] = {}
            for kv in chunk.split(","):
                key, val = kv.split("=")
                cell[key.strip()] = int(val)
            cells.append(cell)
        return cells
    except ValueError as e:
        raise ConfigError(f"bad grid {text!r}: {e}") from e


def _moments_cell(cell, fam, dist, trials, seed) -> Dict:
    from .analysis import monte_carlo_moments

    spec = GroupSpec(Family(fam), cell["m"], cell.get("q", 2))
    rep = monte_carlo_moments(spec, cell["r"], cell["k"], dist, trials,
                              derive_seed(seed, ["cell", cell["r"], cell["k"], cell["m"]]))
    return {
        **cell,
        "family": fam,
        "q": cell.get("q", 2),
        "dist": dist,
        "trials": trials,
        "seed": rep.seed,
        "empirical_mean": rep.empirical_mean,
        "empirical_variance": rep.empirical_variance,
        "closed_mean": str(rep.closed_mean),
        "closed_variance": str(rep.closed_variance),
        "variance_is_bound": rep.variance_is_bound,
        "z_mean": rep.z_mean,
        "z_variance": rep.z_variance,
    }


def cmd_stats(args) -> int:
    from .analysis import exact_divergences, sd_bound_check

    seed = args.seed
    cells = _parse_grid(args.grid)
    failures = 0
    rows: List[Dict] = []
    if args.stat == "moments":
        if seed is None:
            raise ConfigError("--seed is mandatory for moments")
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            rows = list(
                pool.map(
                    lambda c: _moments_cell(c, args.family, args.dist, args.trials, seed),
                    cells,
                )
            )
        for row in rows:
            bad_mean = abs(row["z_mean"]) > 4
            bad_var = row["z_variance"] is not None and abs(row["z_variance"]) > 4
            row["pass"] = not (bad_mean or bad_var)
            failures += 0 if row["pass"] else 1
    elif args.stat == "divergence":
        for cell in cells:
            spec = GroupSpec(Family(args.family), cell["m"], cell.get("q", 2))
            rep = exact_divergences(spec, cell["r"], cell["k"], cell.get("ell", 0),
                                    budget=_budget(args))
            ok = (rep.renyi_hybrid_null == rep.renyi_closed_form
                  and rep.sd_hybrid_planted == rep.sd_product_form)
            rows.append({**cell, "renyi_exact": str(rep.renyi_hybrid_null),
                         "renyi_closed": str(rep.renyi_closed_form),
                         "sd_exact": str(rep.sd_hybrid_planted),
                         "sd_product": str(rep.sd_product_form), "pass": ok})
            failures += 0 if ok else 1
    elif args.stat == "sdbound":
        for cell in cells:
            spec = GroupSpec(Family(args.family), cell["m"], cell.get("q", 2))
            rep = sd_bound_check(spec, cell["r"], cell["k"], budget=_budget(args))
            rows.append({**cell, "sd": str(rep.sd_null_planted),
                         "pr_no_solution": str(rep.pr_no_solution),
                         "bound": str(rep.bound),
                         "identity_applicable": rep.identity_applicable,
                         "pass": rep.bound_holds})
            failures += 0 if rep.bound_holds else 1
    else:
        raise ConfigError(f"unknown stat {args.stat}")
    rows.sort(key=lambda row: tuple(sorted((k, str(v)) for k, v in row.items())))
    _emit_rows(args, rows)
    return EXIT_ASSERT if failures else 0


# ---------------------------------------------------------------------------
# pke
# ---------------------------------------------------------------------------


def _parse_params(text: str) -> Dict[str, float]:
    try:
        out: Dict[str, float] = {}
        for kv in text.split(","):
            key, val = kv.split("=")
            out[key.strip()] = float(val)
        return out
    except ValueError as e:
        raise ConfigError(f"bad params {text!r}: {e}") from e


def cmd_pke(args) -> int:
    from . import pke

    seed = _require_seed(args)
    raw = _parse_params(args.params) if args.params else {}
    # dedicated flags override the --params bundle
    eta = args.eta if args.eta is not None else raw.get("eta", 0.125)
    k = args.k if args.k is not None else int(raw.get("k", 3))
    r = args.r if args.r is not None else int(raw.get("r", 64))
    m = args.m if args.m is not None else int(raw.get("m", 16))
    eps = args.eps
    if args.ell is not None:
        ell = args.ell
    elif "ell" in raw:
        ell = int(raw["ell"])
    else:
        ell = pke.derive_repetitions(eta, k, eps)
    params = pke.PkeParams(r=r, m=m, k=k, eta=eta, ell=ell)

    if args.action == "keygen":
        key = pke.keygen(params, seed)
        _emit(args, {"pk": pke.to_base64(key.pk), "sk": list(key.sk),
                     "params": params.__dict__, "seed": seed})
        return 0
    if args.action == "enc":
        with open(args.key) as f:
            kd = json.load(f)
        key = pke.PkeKeyPair(pke.from_base64(kd["pk"], m, r), tuple(kd["sk"]), params)
        ct = pke.encrypt(key, args.bit, seed)
        _emit(args, {"ct": pke.to_base64(ct.matrix), "params": params.__dict__, "seed": seed})
        return 0
    if args.action == "dec":
        with open(args.key) as f:
            kd = json.load(f)
        with open(args.ct) as f:
            cd = json.load(f)
        ct = pke.Ciphertext(pke.from_base64(cd["ct"], ell, r))
        _emit(args, {"bit": pke.decrypt(tuple(kd["sk"]), ct, params)})
        return 0
    if args.action == "correctness-sweep":
        errs = {0: 0, 1: 0}
        for t in range(args.trials):
            key = pke.keygen(params, derive_seed(seed, ["kg", t]))
            for b in (0, 1):
                ct = pke.encrypt(key, b, derive_seed(seed, ["enc", t, b]))
                if pke.decrypt(key.sk, ct, params) != b:
                    errs[b] += 1
        rows = [{
            "r": r, "m": m, "k": k, "eta": eta, "ell": ell, "trials": args.trials,
            "seed": seed, "err0": errs[0] / args.trials, "err1": errs[1] / args.trials,
            "eps_target": eps,
        }]
        ok = rows[0]["err0"] <= 2 * eps and rows[0]["err1"] <= 2 * eps
        rows[0]["pass"] = ok
        _emit_rows(args, rows)
        return 0 if ok else EXIT_ASSERT
    if args.action == "hybrid-experiment":
        def send_one(s):
            return pke.hybrid_sample(params.ell, 1, params, s)

        def send_zero(s):
            return pke.hybrid_sample(0, 1, params, s)

        def holder(sample):
            return pke.decrypt(sample.sk, pke.Ciphertext(sample.matrix), params)

        rep = pke.distinguisher_harness(send_one, send_zero, holder, args.trials, seed)
        _emit(args, result_row("pke-hybrid", {"params": raw}, seed, {
            "advantage": rep.advantage, "rate_enc1": rep.rate_a, "rate_enc0": rep.rate_b,
            "ci_enc1": rep.ci_a, "ci_enc0": rep.ci_b,
        }))
        return 0
    raise ConfigError(f"unknown pke action {args.action}")


# ---------------------------------------------------------------------------
# replay
# ---------------------------------------------------------------------------


def _check_schema(version) -> None:
    if version != SCHEMA_VERSION:
        raise VersionMismatch(f"unsupported schema version {version}")


def cmd_replay(args) -> int:
    """Recompute a stored row and compare; deterministic rows must match exactly."""
    from . import pke

    with open(args.infile) as f:
        row = json.load(f)
    if isinstance(row, list):
        if len(row) != 1:
            raise ConfigError("replay expects a single row")
        row = row[0]

    if "gen" in row:  # an instance file with its embedded generation record
        _check_schema(row["gen"].get("schema_version"))
        inst = _generate_instance(row["gen"], row["seed"], _budget(args))
        redone = instance_to_json(inst)
        if row["gen"]["hide_planted"]:
            redone["planted"] = None
        same = all(redone[key] == row[key] for key in redone)
        _emit(args, {"replayed": "gen", "match": same})
        return 0 if same else EXIT_ASSERT

    if row.get("command") == "solve":
        _check_schema(row.get("schema_version"))
        ns = argparse.Namespace(**vars(args))
        ns.algo = row["params"]["algo"]
        ns.infile = row["params"]["infile"]
        ns.seed = row["seed"]
        ns.backend = "exhaustive"
        ns.out = None
        buf = io.StringIO()
        old = sys.stdout
        sys.stdout = buf
        try:
            cmd_solve(ns)
        finally:
            sys.stdout = old
        redone = json.loads(buf.getvalue())
        same = redone["metrics"]["found"] == row["metrics"]["found"]
        _emit(args, {"replayed": "solve", "match": same})
        return 0 if same else EXIT_ASSERT

    if "empirical_mean" in row:  # a moments grid cell (json format)
        from .analysis import monte_carlo_moments

        spec = GroupSpec(Family(row["family"]), int(row["m"]), int(row.get("q", 2)))
        rep = monte_carlo_moments(
            spec, int(row["r"]), int(row["k"]), row["dist"], int(row["trials"]),
            int(row["seed"]),
        )
        same = (rep.empirical_mean == row["empirical_mean"]
                and rep.empirical_variance == row["empirical_variance"])
        _emit(args, {"replayed": "stats-moments", "match": same})
        return 0 if same else EXIT_ASSERT

    if "err0" in row:  # a correctness-sweep cell (json format)
        params = pke.PkeParams(r=int(row["r"]), m=int(row["m"]), k=int(row["k"]),
                               eta=float(row["eta"]), ell=int(row["ell"]))
        seed, trials = int(row["seed"]), int(row["trials"])
        errs = {0: 0, 1: 0}
        for t in range(trials):
            key = pke.keygen(params, derive_seed(seed, ["kg", t]))
            for b in (0, 1):
                ct = pke.encrypt(key, b, derive_seed(seed, ["enc", t, b]))
                if pke.decrypt(key.sk, ct, params) != b:
                    errs[b] += 1
        same = (errs[0] / trials == row["err0"] and errs[1] / trials == row["err1"])
        _emit(args, {"replayed": "pke-sweep", "match": same})
        return 0 if same else EXIT_ASSERT

    raise ConfigError("replay does not recognize this row shape")


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Global flags are legal both before and after the subcommand; the
    # sub-level copies use SUPPRESS so they never clobber pre-subcommand values.
    d = argparse.SUPPRESS if suppress else None

    def dflt(value):
        return argparse.SUPPRESS if suppress else value

    parser.add_argument("--seed", type=int, default=dflt(None),
                        help="root seed (mandatory when randomized)")
    parser.add_argument("--budget", type=int, default=dflt(None),
                        help="enumeration budget override")
    parser.add_argument("--threads", type=int, default=dflt(1))
    parser.add_argument("--format", choices=("csv", "json"), default=dflt("csv"))
    parser.add_argument("-o", "--out", default=dflt(None), help="output file (atomic write)")
    parser.add_argument("--dry-run", action="store_true", default=dflt(False))
    _ = d


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparse-ksum",
                                description="planted k-SUM experiment toolkit")
    _add_global_flags(p, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_global_flags(common, suppress=True)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="sample an instance")
    g.add_argument("--family", required=True,
                   choices=("xor", "modular2m", "vector", "int", "zp"))
    g.add_argument("--r", type=int, required=True)
    g.add_argument("--k", type=int, required=True)
    g.add_argument("--delta", default="1")
    g.add_argument("--q", type=int, default=2)
    g.add_argument("--dist", choices=("d0", "d1", "dell"), default="d1")
    g.add_argument("--ell", type=int, default=None)
    g.add_argument("--bound", type=int, default=1000, help="integer family value bound")
    g.add_argument("--p", type=int, default=16777259, help="prime for the zp family")
    g.add_argument("--hide-planted", action="store_true")
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", parents=[common], help="run a solver on an instance file")
    s.add_argument("--algo", required=True,
                   choices=("brute", "mitm", "gauss", "subsetsum-worst", "subsetsum-avg"))
    s.add_argument("--in", dest="infile", required=True)
    s.add_argument("--backend", choices=("exhaustive", "mitm"), default="exhaustive")
    s.set_defaults(fn=cmd_solve)

    r = sub.add_parser("reduce", parents=[common], help="run a reduction")
    r.add_argument("--kind", required=True,
                   choices=("s2d", "k2v", "v2t", "subsample", "kshift"))
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--gamma", type=float, default=0.1)
    r.add_argument("--round-scale", type=float, default=1.0)
    r.add_argument("--rounds-multiplier", type=int, default=1)
    r.add_argument("--k1", type=int, default=3)
    r.add_argument("--delta-target", default="3/4")
    r.add_argument("--inner", choices=("brute", "mitm"), default="brute")
    r.add_argument("--vq", type=int, default=5, help="q for the carry reduction")
    r.add_argument("--vm", type=int, default=2, help="m for the carry reduction")
    r.set_defaults(fn=cmd_reduce)

    a = sub.add_parser("amplify", parents=[common], help="amplify a weak solver on an instance")
    a.add_argument("--in", dest="infile", required=True)
    a.add_argument("--weak", default="mitm", help="mitm | gauss | crippled:P")
    a.add_argument("--gamma", default="0.2")
    a.add_argument("--alpha", type=float, default=None)
    a.add_argument("--rounds-scale", type=float, default=1.0)
    a.add_argument("--trace", action="store_true")
    a.set_defaults(fn=cmd_amplify)

    st = sub.add_parser("stats", parents=[common], help="closed-form vs measured statistics")
    st.add_argument("stat", choices=("moments", "divergence", "sdbound"))
    st.add_argument("--grid", required=True, help="e.g. r=10,k=3,m=7;r=12,k=3,m=8")
    st.add_argument("--family", default="xor")
    st.add_argument("--dist", choices=("d0", "d1"), default="d0")
    st.add_argument("--trials", type=int, default=10000)
    st.set_defaults(fn=cmd_stats)

    pk = sub.add_parser("pke", parents=[common], help="bit-encryption experiments")
    pk.add_argument("action",
                    choices=("keygen", "enc", "dec", "correctness-sweep", "hybrid-experiment"))
    pk.add_argument("--params", default=None, help="r=..,eta=..,k=..,m=..,ell=..")
    pk.add_argument("--eta", type=float, default=None)
    pk.add_argument("--k", type=int, default=None)
    pk.add_argument("--r", type=int, default=None)
    pk.add_argument("--m", type=int, default=None)
    pk.add_argument("--ell", type=int, default=None)
    pk.add_argument("--eps", type=float, default=0.01)
    pk.add_argument("--trials", type=int, default=2000)
    pk.add_argument("--key", default=None)
    pk.add_argument("--ct", default=None)
    pk.add_argument("--bit", type=int, default=1)
    pk.set_defaults(fn=cmd_pke)

    rp = sub.add_parser("replay", parents=[common], help="recompute a stored result row")
    rp.add_argument("--in", dest="infile", required=True)
    rp.set_defaults(fn=cmd_replay)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.dry_run:
        plan = {k: v for k, v in vars(args).items() if k != "fn" and not callable(v)}
        print(json.dumps({"plan": plan}, sort_keys=True, default=str))
        return 0
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return EXIT_BUDGET
    except VersionMismatch as e:
        print(f"version mismatch: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as e:
        print(f"io error: {e}", file=sys.stderr)
        return EXIT_IO
    except KsumError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
