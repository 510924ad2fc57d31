"""Command-line front end: counters, identity tests, reductions, pipelines and experiments.

Every command writes line-oriented rows (JSON lines or CSV) to stdout or
--output, ending with one summary row.  Rows carry the seed and the
stream_id of the trial, and RandomStream(seed, stream_id) replays that
trial alone.  Exit codes: 0 ok, 2 usage, 3 capability, 4 internal
assertion.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from typing import Callable, Iterable

import numpy as np

from . import plots
from .algebra import RandomStream, as_modulus, next_prime_at_least
from .counters import (classify_highly_symmetric, count_cliques, family_clique_count, family_graph,
                       hcl_bruteforce, hcy_bruteforce, kclique_bruteforce, kclique_fast, permanent_bruteforce,
                       sym_clique_count)
from .errors import InternalAssertionError, IsocountError, UsageError
from .graphs import (Digraph, DirectedMultigraph, SimpleGraph, UndirectedMultigraph, automorphism_order,
                     class_partition, complement, empirical_rigidity, graph_to_json, isomorphism_class,
                     load_graph, num_pairs, random_graph, save_graph)
from .identity_tests import (hcl_query_count, hcy_query_count, is_hcl_pipeline, is_hcy_pipeline,
                             single_round_frequencies, single_round_rates)
from .oracle import (CATALOG, DIRECTED, MAX_TABLE_PAIRS, STRATEGIES, class_correctness_table,
                     machine_catalog, sample_corrupt_oracle, truth_function)
from .reductions import (AmplificationConfig, PipelineTrace, measure_zero_fraction, reduce_clique_to_half,
                         reduce_half_to_counting, reduce_hamcycle_to_counting, theorem1_pipeline,
                         theorem2_pipeline)

DEFAULT_SEED = 20240601
# trials use stream ids 0, 1, 2, ...; shared objects (the sampled oracle) use this one
SHARED_STREAM = 1 << 32


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

class Report:
    """Row sink.  JSON lines stream as they come; CSV is written on close with the union of columns."""

    def __init__(self, fmt: str, out):
        if fmt not in ("jsonl", "csv"):
            raise UsageError("format is jsonl or csv")
        self.fmt = fmt
        self.out = out
        self.rows: list[dict] = []

    def row(self, doc: dict) -> None:
        if self.fmt == "jsonl":
            self.out.write(json.dumps(doc) + "\n")
            self.out.flush()
        else:
            self.rows.append(doc)

    def close(self) -> None:
        if self.fmt != "csv" or not self.rows:
            return
        columns: list[str] = []
        for doc in self.rows:
            columns.extend(k for k in doc if k not in columns)
        w = csv.DictWriter(self.out, fieldnames=columns, lineterminator="\n")
        w.writeheader()
        for doc in self.rows:
            w.writerow({k: json.dumps(v) if isinstance(v, (list, dict)) else v for k, v in doc.items()})
        self.out.flush()


def _ms(t0: float) -> float:
    return round((time.perf_counter() - t0) * 1000, 3)


def _modulus(args, default_bits: int | None = None):
    if getattr(args, "p", None) is not None and getattr(args, "p_bits", None) is not None:
        raise UsageError("give --p or --p-bits, not both")
    if getattr(args, "p", None) is not None:
        return as_modulus(args.p)
    bits = getattr(args, "p_bits", None)
    if bits is None:
        bits = default_bits
    if bits is None:
        raise UsageError("a modulus is required (--p or --p-bits)")
    if not 1 <= bits <= 61:
        raise UsageError("--p-bits must lie in 1..61")
    return next_prime_at_least(1 << bits)


def _figure(args, name: str) -> str | None:
    if not getattr(args, "figure_dir", None):
        return None
    return os.path.join(args.figure_dir, name + ".png")


def _positive(name: str, value: int) -> int:
    if value < 1:
        raise UsageError(f"--{name} must be positive")
    return value


# ---------------------------------------------------------------------------
# count
# ---------------------------------------------------------------------------

def _as_undirected(G, p_default) -> UndirectedMultigraph:
    if isinstance(G, UndirectedMultigraph):
        return G
    if isinstance(G, SimpleGraph):
        return UndirectedMultigraph.from_simple(G, p_default)
    raise UsageError("this counter needs an undirected graph")


def _as_directed(G, p_default) -> DirectedMultigraph:
    if isinstance(G, DirectedMultigraph):
        return G
    if isinstance(G, Digraph):
        return DirectedMultigraph.from_matrix(p_default, G.matrix)
    if isinstance(G, SimpleGraph):
        return DirectedMultigraph.from_matrix(p_default, G.adjacency())
    raise UsageError("this counter needs a directed graph")


def cmd_count(args, report: Report) -> None:
    G = load_graph(args.graph)
    mod = _modulus(args, 31) if (args.p is not None or args.p_bits is not None) else as_modulus((1 << 31) - 1)
    t0 = time.perf_counter()
    row = {"command": "count", "alg": args.alg, "k": args.k}
    if args.alg in ("brute", "fast"):
        if args.k is None:
            raise UsageError("--k is required")
        F = _as_undirected(G, mod)
        value = int(kclique_bruteforce(F, args.k) if args.alg == "brute" else kclique_fast(F, args.k, args.strassen))
        row["p"] = F.p
    elif args.alg in ("sym", "bitmask"):
        if not isinstance(G, SimpleGraph):
            raise UsageError(f"the {args.alg} counter needs a simple graph")
        if args.k is None:
            raise UsageError("--k is required")
        if args.alg == "sym":
            if args.t is None:
                raise UsageError("--t is required for the sym counter")
            value = sym_clique_count(G, args.t, args.k, RandomStream(args.seed, 0))
        else:
            value = count_cliques(G, args.k)
    elif args.alg == "hcl":
        F = _as_undirected(G, mod)
        value, row["p"] = int(hcl_bruteforce(F)), F.p
    elif args.alg in ("hcy", "permanent"):
        E = _as_directed(G, mod)
        value = int(hcy_bruteforce(E) if args.alg == "hcy" else permanent_bruteforce(E))
        row["p"] = E.p
    elif args.alg == "aut":
        if not isinstance(G, SimpleGraph):
            raise UsageError("automorphism counting needs a simple graph")
        value = automorphism_order(G)
    else:  # pragma: no cover - argparse restricts choices
        raise UsageError(f"unknown counter {args.alg}")
    row.update({"n": G.n, "count": value, "seed": args.seed, "stream_id": 0, "wall_ms": _ms(t0)})
    report.row(row)


# ---------------------------------------------------------------------------
# identify
# ---------------------------------------------------------------------------

def cmd_identify(args, report: Report) -> None:
    mod = _modulus(args, 20)
    _positive("trials", args.trials)
    M = machine_catalog(args.machine, args.n, mod, alpha=args.alpha, epsilon=args.noise, seed=args.seed)
    directed = M.domain_kind == DIRECTED
    accepted = 0
    queries = 0
    t_all = time.perf_counter()
    for trial in range(args.trials):
        t0 = time.perf_counter()
        rng = RandomStream(args.seed, trial)
        if directed:
            v = is_hcy_pipeline(M, args.repetitions, rng, k_start=args.k_start)
        else:
            v = is_hcl_pipeline(M, args.repetitions, rng)
        accepted += v.accepted
        queries += v.queries
        if not args.summary_only:
            report.row({"trial": trial, "seed": args.seed, "stream_id": trial, "machine": M.label, "n": M.n,
                        "p": M.p, "verdict": v.verdict, "rounds_run": v.rounds_run, "queries": v.queries,
                        "failed_round": (v.first_failure or {}).get("round"), "wall_ms": _ms(t0)})
    expected = (hcy_query_count(M.n, args.repetitions, args.k_start) if directed
                else hcl_query_count(M.n, args.repetitions))
    report.row({"summary": "identify", "machine": M.label, "pipeline": "hcy" if directed else "hcl", "n": M.n,
                "p": M.p, "repetitions": args.repetitions, "trials": args.trials, "accepted": accepted,
                "rejected": args.trials - accepted, "oracle_queries": queries,
                "queries_if_accepted": expected, "seed": args.seed, "wall_ms": _ms(t_all)})
    path = _figure(args, f"identify_{args.machine}_n{M.n}")
    if path:
        plots.bar_figure(path, ["accepted", "rejected"], [accepted, args.trials - accepted],
                         title=f"{M.label}, n={M.n}, p={M.p}", ylabel="trials")


# ---------------------------------------------------------------------------
# reduce
# ---------------------------------------------------------------------------

def _has_half_clique(U: SimpleGraph) -> bool:
    return count_cliques(U, U.n // 2) > 0


def cmd_reduce(args, report: Report) -> None:
    G = load_graph(args.graph)
    t_all = time.perf_counter()
    if args.reduction == "clique":
        if not isinstance(G, SimpleGraph):
            raise UsageError("the clique reduction needs a simple graph")
        if args.k is None:
            raise UsageError("--k is required")
        out = reduce_clique_to_half(G, args.k)
        if args.out:
            save_graph(out, args.out)
        report.row({"reduction": "clique", "n": G.n, "k": args.k, "n_out": out.n, "m_out": out.num_edges,
                    "has_k_clique": count_cliques(G, args.k) > 0, "has_half_clique": _has_half_clique(out),
                    "graph": graph_to_json(out), "seed": args.seed, "stream_id": 0, "wall_ms": _ms(t_all)})
        return
    mod = _modulus(args, 10)
    _positive("trials", args.trials)
    if args.reduction == "hamcycle":
        if not isinstance(G, (Digraph, SimpleGraph)):
            raise UsageError("the Hamiltonian-cycle reduction needs a digraph or simple graph")
        reduce, count, bound = reduce_hamcycle_to_counting, hcy_bruteforce, G.n / (mod.p - 1)
    else:
        if not isinstance(G, SimpleGraph):
            raise UsageError("the half-clique reduction needs a simple graph")
        reduce, count, bound = reduce_half_to_counting, hcl_bruteforce, num_pairs(G.n) / (mod.p - 1)
    nonzero = 0
    for trial in range(args.trials):
        t0 = time.perf_counter()
        out = reduce(G, mod, RandomStream(args.seed, trial))
        value = int(count(out))
        nonzero += value != 0
        if trial == 0 and args.out:
            save_graph(out, args.out)
        if not args.summary_only:
            report.row({"trial": trial, "seed": args.seed, "stream_id": trial, "reduction": args.reduction,
                        "value": value, "nonzero": value != 0, "wall_ms": _ms(t0)})
    report.row({"summary": "reduce", "reduction": args.reduction, "n": G.n, "p": mod.p, "trials": args.trials,
                "nonzero": nonzero, "zero": args.trials - nonzero, "soundness_bound": bound,
                "seed": args.seed, "wall_ms": _ms(t_all)})


# ---------------------------------------------------------------------------
# amplify
# ---------------------------------------------------------------------------

def _oracle_mode(args, n: int) -> str:
    if args.mode != "auto":
        return args.mode
    return "exact-table" if num_pairs(n) <= MAX_TABLE_PAIRS and n <= 7 else "keyed-prf"


def _amplify_inputs(args, n: int) -> Callable[[int, RandomStream], SimpleGraph]:
    if args.input:
        U = load_graph(args.input)
        if not isinstance(U, SimpleGraph) or U.n != n:
            raise UsageError(f"--input must be a simple graph on {n} vertices")
        return lambda trial, rng: U
    if args.inputs == "families":
        return lambda trial, rng: family_graph(trial % 12 + 1, n)
    return lambda trial, rng: random_graph(n, rng)


def cmd_amplify(args, report: Report) -> None:
    n, k = args.n, args.k
    _positive("trials", args.trials)
    H = truth_function(args.truth or f"clique-parity:{k}")
    mode = _oracle_mode(args, n)
    O = sample_corrupt_oracle(H, n, args.c, mode, args.strategy, RandomStream(args.seed, SHARED_STREAM))
    cfg = AmplificationConfig(args.epsilon, args.delta, args.alpha, args.ct)
    make_input = _amplify_inputs(args, n)
    correct = 0
    queries = 0
    paths: dict[str, int] = {}
    t_all = time.perf_counter()
    for trial in range(args.trials):
        t0 = time.perf_counter()
        rng = RandomStream(args.seed, trial)
        U = make_input(trial, rng.child(0))
        trace = PipelineTrace()
        if args.pipeline == "theorem1":
            value = theorem1_pipeline(O, U, k, cfg, rng.child(1), trace)
        else:
            value = theorem2_pipeline(O, U, k, args.epsilon, rng.child(1), min_n=args.min_n, delta=args.delta,
                                      fallback=cfg, trace=trace)
        truth = O.truth(U)
        correct += value == truth
        queries += trace.oracle_queries
        paths[trace.path] = paths.get(trace.path, 0) + 1
        if not args.summary_only:
            report.row({"trial": trial, "seed": args.seed, "stream_id": trial, "pipeline": args.pipeline,
                        "input_index": U.index(), "value": value, "truth": truth, "correct": value == truth,
                        "path": trace.path, "family": trace.family, "oracle_queries": trace.oracle_queries,
                        "steps": trace.steps, "wall_ms": _ms(t0)})
    report.row({"summary": "amplify", "pipeline": args.pipeline, "n": n, "k": k, "epsilon": args.epsilon,
                "c": args.c, "strategy": args.strategy, "mode": mode, "truth_function": H.name,
                "threshold_constant": args.ct, "trials": args.trials, "correct": correct,
                "oracle_queries": queries, "paths": dict(sorted(paths.items())), "seed": args.seed,
                "wall_ms": _ms(t_all)})
    path = _figure(args, f"amplify_{args.pipeline}_n{n}_{args.strategy}")
    if path:
        labels = sorted(paths)
        plots.bar_figure(path, labels, [paths[p] for p in labels],
                         title=f"{args.pipeline}: {correct}/{args.trials} correct", ylabel="inputs")


# ---------------------------------------------------------------------------
# experiment
# ---------------------------------------------------------------------------

def _exp_soundness(args, report: Report) -> None:
    mod = _modulus(args, 20)
    M = machine_catalog(args.machine, args.n, mod, alpha=args.alpha)
    t0 = time.perf_counter()
    freq = single_round_frequencies(M, _positive("trials", args.trials), args.seed)
    exact = single_round_rates(M)
    worst = 0.0
    for s, (stage, f) in enumerate(freq.items()):
        worst = max(worst, abs(f - exact[stage]))
        report.row({"experiment": "soundness", "machine": M.label, "n": M.n, "p": M.p, "stage": stage,
                    "trials": args.trials, "frequency": f, "exact_rate": exact[stage], "seed": args.seed,
                    "stream_id": s})
    report.row({"summary": "soundness", "machine": M.label, "n": M.n, "p": M.p, "trials": args.trials,
                "max_abs_deviation": worst, "seed": args.seed, "wall_ms": _ms(t0)})
    path = _figure(args, f"soundness_{args.machine}_n{M.n}")
    if path:
        labels = list(freq)
        plots.bar_figure(path, labels, [freq[s] for s in labels], reference=[exact[s] for s in labels],
                         reference_label="exact", title=f"{M.label}: single-round rejection", ylabel="rate")


def large_class_threshold(num_classes: int, epsilon: float, oracles: int) -> float:
    """Class size above which a correctness <= 1/2 + eps/2 should never be seen (Hoeffding plus union bound)."""
    return 8 / epsilon ** 2 * math.log(oracles * num_classes)


def _exp_class_survey(args, report: Report) -> None:
    n = args.n
    if args.strategy == "zero":
        raise UsageError("the survey measures membership in the correct set; use flip or random-wrong")
    _, sizes = class_partition(n)
    threshold = large_class_threshold(len(sizes), args.epsilon, _positive("oracles", args.oracles))
    bar = 0.5 + args.epsilon / 2
    H = truth_function(args.truth or "clique-parity:3")
    bad_total = 0
    worst = 1.0
    t0 = time.perf_counter()
    first = None
    for i in range(args.oracles):
        O = sample_corrupt_oracle(H, n, args.c, "exact-table", args.strategy, RandomStream(args.seed, i))
        corr, sz = class_correctness_table(O)
        large = sz >= threshold
        bad = int(np.sum(large & (corr <= bar)))
        low = float(corr[large].min()) if large.any() else 1.0
        bad_total += bad
        worst = min(worst, low)
        if first is None:
            first = (sz, corr)
        if args.summary_only:
            continue
        report.row({"experiment": "class-survey", "oracle": i, "seed": args.seed, "stream_id": i, "n": n, "c": args.c,
                    "large_classes": int(large.sum()), "bad_large_classes": bad,
                    "min_large_correctness": low})
    report.row({"summary": "class-survey", "n": n, "c": args.c, "epsilon": args.epsilon, "oracles": args.oracles,
                "classes": len(sizes), "size_threshold": threshold, "correctness_bar": bar,
                "bad_large_classes": bad_total, "min_large_correctness": worst, "seed": args.seed,
                "wall_ms": _ms(t0)})
    path = _figure(args, f"class_survey_n{n}_c{args.c}")
    if path and first is not None:
        plots.scatter_figure(path, first[0], first[1], title="per-class correctness, first oracle",
                             xlabel="class size", ylabel="fraction correct", hline=bar, vline=threshold, logx=True)


def _exp_rigidity(args, report: Report) -> None:
    t0 = time.perf_counter()
    ns = args.ns or [args.n]
    fractions = []
    for s, n in enumerate(ns):
        f = empirical_rigidity(n, _positive("samples", args.samples), RandomStream(args.seed, s))
        fractions.append(f)
        report.row({"experiment": "rigidity", "n": n, "samples": args.samples, "rigid_fraction": f,
                    "stderr": math.sqrt(f * (1 - f) / args.samples), "seed": args.seed, "stream_id": s})
    report.row({"summary": "rigidity", "ns": ns, "samples": args.samples, "seed": args.seed, "wall_ms": _ms(t0)})
    path = _figure(args, "rigidity")
    if path:
        plots.bar_figure(path, [str(n) for n in ns], fractions, title="rigid fraction of random graphs",
                         ylabel="fraction")


def _exp_zero(args, report: Report) -> None:
    mod = _modulus(args, None) if (args.p is not None or args.p_bits is not None) else as_modulus(1009)
    t0 = time.perf_counter()
    counter = {"hcy": (hcy_bruteforce, "directed"), "hcl": (hcl_bruteforce, "undirected")}
    labels, values, errors = [], [], []
    for s, name in enumerate(args.counters):
        fn, kind = counter[name]
        f, se = measure_zero_fraction(fn, args.n, mod, _positive("samples", args.samples),
                                      RandomStream(args.seed, s), kind)
        z = (f - 1 / mod.p) / se if se > 0 else float("inf")
        labels.append(name)
        values.append(f)
        errors.append(se)
        report.row({"experiment": "zero-fraction", "counter": name, "n": args.n, "p": mod.p,
                    "samples": args.samples, "fraction": f, "stderr": se, "expected": 1 / mod.p,
                    "z": z, "seed": args.seed, "stream_id": s})
    report.row({"summary": "zero-fraction", "p": mod.p, "seed": args.seed, "wall_ms": _ms(t0)})
    path = _figure(args, f"zero_fraction_p{mod.p}")
    if path:
        plots.errorbar_figure(path, labels, values, errors, 1 / mod.p, title=f"zero fraction at p={mod.p}",
                              ylabel="fraction")


def cmd_experiment(args, report: Report) -> None:
    {"soundness": _exp_soundness, "class-survey": _exp_class_survey, "rigidity": _exp_rigidity,
     "zero-fraction": _exp_zero}[args.kind](args, report)


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def _check_counters(rng: RandomStream) -> bool:
    p = as_modulus((1 << 31) - 1)
    for n, k in ((6, 3), (7, 4), (7, 5), (8, 6)):
        F = UndirectedMultigraph.random(n, p, rng.child())
        if int(kclique_fast(F, k)) != int(kclique_bruteforce(F, k)):
            return False
    return all(int(hcy_bruteforce(DirectedMultigraph.from_matrix(p, 1 - np.eye(n, dtype=np.int64))))
               == math.factorial(n - 1) for n in range(3, 7))


def _check_orbit_stabilizer(rng: RandomStream) -> bool:
    for _ in range(20):
        U = random_graph(5, rng)
        if automorphism_order(U) * len(isomorphism_class(U)) != 120:
            return False
        if automorphism_order(U) != automorphism_order(complement(U)):
            return False
    return True


def _check_identity(rng: RandomStream) -> bool:
    p = next_prime_at_least(1 << 20)
    ok = is_hcy_pipeline(machine_catalog("hcy", 5, p), 3, rng.child()).accepted
    ok &= is_hcl_pipeline(machine_catalog("hcl", 6, p), 3, rng.child()).accepted
    ok &= not is_hcy_pipeline(machine_catalog("permanent", 5, p), 3, rng.child()).accepted
    ok &= not is_hcl_pipeline(machine_catalog("scaled_hcl", 6, p), 3, rng.child()).accepted
    return bool(ok)


def _check_families(rng: RandomStream) -> bool:
    for n in (8, 9):
        for fid in range(1, 13):
            tag, count = classify_highly_symmetric(family_graph(fid, n), 3)
            if tag is None or tag.id != fid or count != count_cliques(family_graph(fid, n), 3):
                return False
            if family_clique_count(fid, n, 3) != count:
                return False
    return True


def _check_reductions(rng: RandomStream) -> bool:
    for idx in range(1 << 6):
        U = SimpleGraph.from_index(4, idx)
        for k in range(1, 5):
            if _has_half_clique(reduce_clique_to_half(U, k)) != (count_cliques(U, k) > 0):
                return False
    return True


def _check_symmetric(rng: RandomStream) -> bool:
    K5e = complement(SimpleGraph.from_edges(5, [(4, 5)]))
    return sym_clique_count(K5e, 12, 3, rng) == 7


SELFTESTS = {
    "counters": _check_counters,
    "orbit-stabilizer": _check_orbit_stabilizer,
    "identity-tests": _check_identity,
    "families": _check_families,
    "clique-to-half": _check_reductions,
    "symmetric-count": _check_symmetric,
}


def cmd_selftest(args, report: Report) -> None:
    failed = []
    t_all = time.perf_counter()
    for s, (name, check) in enumerate(SELFTESTS.items()):
        t0 = time.perf_counter()
        ok = bool(check(RandomStream(args.seed, s)))
        if not ok:
            failed.append(name)
        report.row({"check": name, "passed": ok, "seed": args.seed, "stream_id": s, "wall_ms": _ms(t0)})
    report.row({"summary": "selftest", "checks": len(SELFTESTS), "failed": failed, "seed": args.seed,
                "wall_ms": _ms(t_all)})
    if failed:
        raise InternalAssertionError(f"selftest failures: {', '.join(failed)}")


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def _add_common(sp: argparse.ArgumentParser, modulus: bool = True) -> None:
    sp.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed (default %(default)s)")
    sp.add_argument("--format", choices=("jsonl", "csv"), default="jsonl")
    sp.add_argument("--output", help="write the report here instead of stdout")
    sp.add_argument("--figure-dir", help="also render PNG figures into this directory")
    sp.add_argument("--summary-only", action="store_true", help="omit per-trial rows")
    if modulus:
        sp.add_argument("--p", type=int, help="prime modulus")
        sp.add_argument("--p-bits", type=int, help="use the least prime >= 2^b")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="isocount", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("count", help="count cliques, cycles or automorphisms of a graph file")
    _add_common(sp)
    sp.add_argument("--graph", required=True, help="graph JSON file")
    sp.add_argument("--alg", required=True, choices=("brute", "fast", "sym", "bitmask", "hcy", "hcl",
                                                     "permanent", "aut"))
    sp.add_argument("--k", type=int)
    sp.add_argument("--t", type=int, help="class-size bound for the sym counter")
    sp.add_argument("--strassen", action="store_true", help="use Strassen products in the fast counter")

    sp = sub.add_parser("identify", help="run the HCY or HCL identity pipeline on a catalog machine")
    _add_common(sp)
    sp.add_argument("--machine", required=True, help=f"one of {', '.join(CATALOG)} (or hcy, hcl, permanent)")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--repetitions", type=int, default=20)
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--k-start", type=int, default=1, choices=(1, 2))
    sp.add_argument("--alpha", type=int, default=2, help="scale of the scaled_* machines")
    sp.add_argument("--noise", type=float, default=0.01, help="corrupted fraction of the noisy machine")

    sp = sub.add_parser("reduce", help="apply a decision-to-counting reduction to a graph file")
    _add_common(sp)
    sp.add_argument("--reduction", required=True, choices=("hamcycle", "half", "clique"))
    sp.add_argument("--graph", required=True)
    sp.add_argument("--k", type=int, help="clique size for the clique reduction")
    sp.add_argument("--trials", type=int, default=1)
    sp.add_argument("--out", help="save the (first) reduced graph here")

    sp = sub.add_parser("amplify", help="run an amplification pipeline against a sampled corrupt oracle")
    _add_common(sp, modulus=False)
    sp.add_argument("--pipeline", required=True, choices=("theorem1", "theorem2"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--k", type=int, default=3)
    sp.add_argument("--epsilon", type=float, required=True)
    sp.add_argument("--c", type=float, required=True, help="fraction of inputs the oracle answers correctly")
    sp.add_argument("--delta", type=float, default=0.01)
    sp.add_argument("--alpha", type=float, default=0.1)
    sp.add_argument("--ct", type=float, default=1.0, help="threshold constant c_t in t(n) = c_t n^2 / eps^2")
    sp.add_argument("--mode", choices=("auto", "exact-table", "keyed-prf"), default="auto")
    sp.add_argument("--strategy", choices=STRATEGIES, default="flip")
    sp.add_argument("--truth", help="ground-truth function, default clique-parity:<k>")
    sp.add_argument("--trials", type=int, default=100)
    sp.add_argument("--inputs", choices=("random", "families"), default="random")
    sp.add_argument("--input", help="run every trial on this graph file")
    sp.add_argument("--min-n", type=int, default=8, help="classification floor of theorem2")

    sp = sub.add_parser("experiment", help="batched Monte-Carlo experiments")
    _add_common(sp)
    sp.add_argument("--kind", required=True, choices=("soundness", "class-survey", "rigidity", "zero-fraction"))
    sp.add_argument("--machine", default="exact_permanent")
    sp.add_argument("--n", type=int, default=7)
    sp.add_argument("--ns", type=int, nargs="+", help="several sizes (rigidity)")
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--oracles", type=int, default=200)
    sp.add_argument("--c", type=float, default=0.75)
    sp.add_argument("--epsilon", type=float, default=0.25)
    sp.add_argument("--strategy", choices=STRATEGIES, default="flip")
    sp.add_argument("--truth")
    sp.add_argument("--alpha", type=int, default=2)
    sp.add_argument("--counters", nargs="+", choices=("hcy", "hcl"), default=["hcy"])

    sp = sub.add_parser("selftest", help="run the built-in invariant checks")
    _add_common(sp, modulus=False)
    return ap


COMMANDS = {"count": cmd_count, "identify": cmd_identify, "reduce": cmd_reduce, "amplify": cmd_amplify,
            "experiment": cmd_experiment, "selftest": cmd_selftest}


def _error(exc: BaseException, kind: str) -> None:
    sys.stderr.write(json.dumps({"error": kind, "message": str(exc)}) + "\n")


def main(argv: Iterable[str] | None = None) -> int:
    args = build_parser().parse_args(list(argv) if argv is not None else None)
    if not 0 <= args.seed < 1 << 64:
        _error(UsageError("seed must be a 64-bit unsigned integer"), "UsageError")
        return 2
    out = open(args.output, "w", newline="") if args.output else sys.stdout
    report = Report(args.format, out)
    try:
        COMMANDS[args.command](args, report)
        return 0
    except IsocountError as exc:
        _error(exc, type(exc).__name__)
        return exc.exit_code
    except AssertionError as exc:
        _error(exc, "InternalAssertionError")
        return 4
    except (OSError, ValueError) as exc:
        _error(exc, "UsageError")
        return 2
    finally:
        report.close()
        if out is not sys.stdout:
            out.close()


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
