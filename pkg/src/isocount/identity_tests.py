"""Randomized tests deciding whether a degree-promised machine computes HCY or HCL.

Every test is one-sided: the exact polynomial is always accepted, and a
machine computing anything else within its degree promise is rejected with
the probabilities documented on each function.  All queries go through a
_Session, which checks they stay inside the machine's domain, counts them
and optionally keeps a transcript.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .algebra import RandomStream
from .errors import UsageError
from .graphs import ACCEPT, REJECT, num_pairs, pair_arrays, pair_index, pair_map
from .oracle import DIRECTED, UNDIRECTED, PolynomialMachine


@dataclass
class TestVerdict:
    verdict: str
    rounds_run: int = 0
    first_failure: Optional[dict] = None
    transcript: Optional[list] = None
    queries: int = 0

    __test__ = False  # not a pytest class

    @property
    def accepted(self) -> bool:
        return self.verdict == ACCEPT

    def transcript_lines(self) -> str:
        return "".join(json.dumps(row, sort_keys=True) + "\n" for row in self.transcript or [])


class _Session:
    def __init__(self, M: PolynomialMachine, record: bool):
        self.M = M
        self.queries = 0
        self.transcript = [] if record else None

    def ask(self, entries: np.ndarray, tag: str) -> int:
        M = self.M
        entries = np.asarray(entries, dtype=np.int64)
        # domain discipline: every query is a well-formed point of Z_p^N
        if entries.shape != (M.num_variables,) or entries.min() < 0 or entries.max() >= M.p:
            raise AssertionError(f"query outside the domain of {M.label}")
        value = int(M.fn(entries)) % M.p
        self.queries += 1
        if self.transcript is not None:
            self.transcript.append({"round": tag, "query": entries.tolist(), "answer": value})
        return value

    def verdict(self, verdict: str, rounds: int, failure: dict | None = None) -> TestVerdict:
        return TestVerdict(verdict, rounds, failure, self.transcript, self.queries)


def _require(M: PolynomialMachine, kind: str) -> None:
    if M.domain_kind != kind:
        raise UsageError(f"{M.label} is a {M.domain_kind} machine; this test needs a {kind} one")


def _require_p(M: PolynomialMachine, bound: int) -> None:
    if M.p <= bound:
        raise UsageError(f"this test needs p > {bound}; got p = {M.p}")


# ---------------------------------------------------------------------------
# directed (HCY) tests
# ---------------------------------------------------------------------------

def _genperm_pass(S: _Session, rng: RandomStream) -> dict | None:
    M = S.M
    n, p = M.n, M.p
    for i in range(n):
        for axis in ("row", "column"):
            E = rng.field_values(p, (n, n))
            if axis == "row":
                E[i, :] = 0
            else:
                E[:, i] = 0
            tag = f"genperm:{axis}{i + 1}"
            v = S.ask(E.ravel(), tag)
            if v != 0:
                return {"round": tag, "answer": v, "expected": 0}
    return None


def _isoperm_round(S: _Session, rng: RandomStream) -> dict | None:
    M = S.M
    n, p = M.n, M.p
    E = rng.field_values(p, (n, n))
    pi = rng.permutation_array(n)
    a = S.ask(E.ravel(), "isoperm:E")
    b = S.ask(E[np.ix_(pi, pi)].ravel(), "isoperm:pi(E)")
    if a != b:
        return {"round": "isoperm", "answer": b, "expected": a, "permutation": (pi + 1).tolist()}
    return None


def _nocycle_round(S: _Session, k: int, rng: RandomStream) -> dict | None:
    M = S.M
    n, p = M.n, M.p
    E = np.zeros((n, n), dtype=np.int64)
    E[k:, k:] = rng.field_values(p, (n - k, n - k))
    for i in range(k - 1):
        E[i, i + 1] = 1
    E[k - 1, 0] = 1  # for k = 1 this is the self-loop e_(1,1)
    tag = f"nocycle:{k}"
    v = S.ask(E.ravel(), tag)
    if v != 0:
        return {"round": tag, "answer": v, "expected": 0}
    return None


def _final_probe(S: _Session) -> dict | None:
    n = S.M.n
    E = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        E[i, (i + 1) % n] = 1
    v = S.ask(E.ravel(), "unit-cycle")
    if v != 1:
        return {"round": "unit-cycle", "answer": v, "expected": 1}
    return None


def _directed_checks(M: PolynomialMachine) -> None:
    _require(M, DIRECTED)
    _require_p(M, M.n)


def genperm_test(M: PolynomialMachine, rng: RandomStream, record: bool = False) -> TestVerdict:
    """One pass: for each i, zero row i (then column i), fill the rest uniformly, demand 0.

    Members of the generalized-permanent space always pass; anything else
    within degree n passes with probability at most n/p.
    """
    _directed_checks(M)
    S = _Session(M, record)
    fail = _genperm_pass(S, rng)
    return S.verdict(REJECT if fail else ACCEPT, 1, fail)


def isoperm_test(M: PolynomialMachine, rng: RandomStream, record: bool = False) -> TestVerdict:
    """Compare M(E) with M(pi(E)) for one uniform E and pi."""
    _directed_checks(M)
    S = _Session(M, record)
    fail = _isoperm_round(S, rng)
    return S.verdict(REJECT if fail else ACCEPT, 1, fail)


def nocycle_test(M: PolynomialMachine, k: int, rng: RandomStream, record: bool = False) -> TestVerdict:
    """Unit k-cycle on vertices 1..k, uniform block on k+1..n, zeros elsewhere; demand 0."""
    _directed_checks(M)
    if not 1 <= k <= M.n // 2:
        raise UsageError(f"k must lie in 1..{M.n // 2}")
    S = _Session(M, record)
    fail = _nocycle_round(S, k, rng)
    return S.verdict(REJECT if fail else ACCEPT, 1, fail)


def hcy_query_count(n: int, repetitions: int, k_start: int = 1) -> int:
    """Queries issued by an accepting run of is_hcy_pipeline."""
    return repetitions * (2 * n + 2 + (n // 2 - k_start + 1)) + 1


def is_hcy_pipeline(M: PolynomialMachine, repetitions: int, rng: RandomStream, k_start: int = 1,
                    record: bool = False) -> TestVerdict:
    """Accept iff M looks like HCY.

    Each repetition runs one genperm pass, one isoperm round and one
    nocycle round for every k in k_start..n/2 (k_start = 2 gives the
    range without self-loops).  A final query on the unit n-cycle must
    return 1, which pins the scale.
    """
    _directed_checks(M)
    if M.degree_bound > M.n:
        raise UsageError(f"degree promise {M.degree_bound} exceeds n = {M.n}")
    if repetitions < 1:
        raise UsageError("repetitions must be positive")
    if k_start not in (1, 2):
        raise UsageError("k_start is 1 or 2")
    S = _Session(M, record)
    for r in range(repetitions):
        fail = _genperm_pass(S, rng) or _isoperm_round(S, rng)
        k = k_start
        while not fail and k <= M.n // 2:
            fail = _nocycle_round(S, k, rng)
            k += 1
        if fail:
            fail["repetition"] = r + 1
            return S.verdict(REJECT, r + 1, fail)
    fail = _final_probe(S)
    return S.verdict(REJECT if fail else ACCEPT, repetitions, fail)


# ---------------------------------------------------------------------------
# undirected (HCL) tests
# ---------------------------------------------------------------------------

def _multilinear_round(S: _Session, pos: int, rng: RandomStream) -> dict | None:
    M = S.M
    p = M.p
    F = rng.field_values(p, M.num_variables)
    a1, a2 = (int(x) for x in rng.field_values(p, 2))
    vals = []
    for a in (a1, (a1 + 1) % p, a2, (a2 + 1) % p):
        F[pos] = a
        vals.append(S.ask(F.copy(), f"multilinear:{pos}"))
    d1 = (vals[1] - vals[0]) % p
    d2 = (vals[3] - vals[2]) % p
    if d1 != d2:
        return {"round": f"multilinear:{pos}", "answer": d2, "expected": d1, "anchors": [a1, a2]}
    return None


def _isomult_round(S: _Session, rng: RandomStream) -> dict | None:
    M = S.M
    F = rng.field_values(M.p, M.num_variables)
    pi = rng.permutation_array(M.n)
    a = S.ask(F, "isomult:F")
    b = S.ask(F[pair_map(pi)], "isomult:pi(F)")
    if a != b:
        return {"round": "isomult", "answer": b, "expected": a, "permutation": (pi + 1).tolist()}
    return None


def _hcl_probe_round(S: _Session, rng: RandomStream) -> dict | None:
    M = S.M
    n, p = M.n, M.p
    h = n // 2
    F1 = rng.field_values(p, M.num_variables)
    F1[:n - 1] = 0  # pairs {1, j}: vertex 1 isolated
    F2 = F1.copy()
    for j in range(2, h):  # unit edges from vertex 1 to 2..h-1
        F2[pair_index(1, j, n)] = 1
    a = S.ask(F1, "hcl-probe:F1")
    b = S.ask(F2, "hcl-probe:F2")
    if a != b:
        return {"round": "hcl-probe", "answer": b, "expected": a}
    K = np.zeros(M.num_variables, dtype=np.int64)
    for i in range(1, h + 1):
        for j in range(i + 1, h + 1):
            K[pair_index(i, j, n)] = 1
    v = S.ask(K, "hcl-probe:unit-clique")
    if v != 1:
        return {"round": "hcl-probe:unit-clique", "answer": v, "expected": 1}
    return None


def _undirected_checks(M: PolynomialMachine) -> None:
    _require(M, UNDIRECTED)
    _require_p(M, M.n * (M.n - 1))


def multilinear_test(M: PolynomialMachine, pair: tuple[int, int], rng: RandomStream,
                     record: bool = False) -> TestVerdict:
    """Finite differences in one variable at two random anchors must agree."""
    _undirected_checks(M)
    if M.degree_bound > num_pairs(M.n):
        raise UsageError("degree promise exceeds C(n,2)")
    S = _Session(M, record)
    fail = _multilinear_round(S, pair_index(pair[0], pair[1], M.n), rng)
    return S.verdict(REJECT if fail else ACCEPT, 1, fail)


def isomult_test(M: PolynomialMachine, rng: RandomStream, record: bool = False) -> TestVerdict:
    """Compare M(F) with M(pi(F)) for one uniform F and pi."""
    _undirected_checks(M)
    S = _Session(M, record)
    fail = _isomult_round(S, rng)
    return S.verdict(REJECT if fail else ACCEPT, 1, fail)


def is_hcl_probe(M: PolynomialMachine, rng: RandomStream, record: bool = False) -> TestVerdict:
    """Attach n/2 - 2 unit edges to an isolated vertex 1 and demand no change; then M(unit K_{n/2}) = 1."""
    _undirected_checks(M)
    h = M.n // 2
    if M.degree_bound > h * (h - 1) // 2:
        raise UsageError("degree promise exceeds C(n/2, 2)")
    S = _Session(M, record)
    fail = _hcl_probe_round(S, rng)
    return S.verdict(REJECT if fail else ACCEPT, 1, fail)


def hcl_query_count(n: int, repetitions: int) -> int:
    """Queries issued by an accepting run of is_hcl_pipeline."""
    return repetitions * (4 * num_pairs(n) + 2 + 3)


def is_hcl_pipeline(M: PolynomialMachine, repetitions: int, rng: RandomStream,
                    record: bool = False) -> TestVerdict:
    """Accept iff M looks like HCL: multilinearity in every pair, invariance, then the clique probe."""
    _undirected_checks(M)
    h = M.n // 2
    if M.degree_bound > h * (h - 1) // 2:
        raise UsageError(f"degree promise {M.degree_bound} exceeds C({h},2)")
    if repetitions < 1:
        raise UsageError("repetitions must be positive")
    S = _Session(M, record)
    for r in range(repetitions):
        fail = None
        for pos in range(M.num_variables):
            fail = _multilinear_round(S, pos, rng)
            if fail:
                break
        fail = fail or _isomult_round(S, rng) or _hcl_probe_round(S, rng)
        if fail:
            fail["repetition"] = r + 1
            return S.verdict(REJECT, r + 1, fail)
    return S.verdict(ACCEPT, repetitions)


# ---------------------------------------------------------------------------
# exact single-round rejection rates
# ---------------------------------------------------------------------------

def _nonzero_rate(poly) -> float:
    # a formally nonzero difference of degree d survives a uniform point
    # with probability >= 1 - d/p; at the field sizes used this is 1 to
    # within far less than any Monte-Carlo tolerance
    return 0.0 if poly.is_zero() else 1.0


def single_round_rates(M: PolynomialMachine) -> dict[str, float]:
    """Rejection probability of each single round, computed from M's symbolic form.

    Invariance rounds reject with probability 1 - |Pi(H)|/n!, where Pi(H) is
    the group of relabelings fixing H.  Every other round compares a
    substituted polynomial with a constant, so it rejects with probability
    about 1 when the difference is formally nonzero and 0 otherwise.
    Rates ignore the d/p Schwartz-Zippel slack.
    """
    H = M.symbolic()
    if H is None:
        raise UsageError(f"{M.label} has no symbolic form")
    n = M.n
    inv = 1.0 - H.invariance_group_order() / math.factorial(n)
    rates: dict[str, float] = {}
    if M.domain_kind == DIRECTED:
        idx = np.arange(n * n).reshape(n, n)
        rates["genperm"] = max(_nonzero_rate(H.substitute({int(v): 0 for v in line}))
                               for i in range(n) for line in (idx[i, :], idx[:, i]))
        rates["isoperm"] = inv
        for k in range(1, n // 2 + 1):
            fixed = {}
            for i in range(n):
                for j in range(n):
                    if i < k or j < k:
                        fixed[int(idx[i, j])] = 0
            for i in range(k - 1):
                fixed[int(idx[i, i + 1])] = 1
            fixed[int(idx[k - 1, 0])] = 1
            rates[f"nocycle:{k}"] = _nonzero_rate(H.substitute(fixed))
        cycle = np.zeros(n * n, dtype=np.int64)
        cycle[idx[np.arange(n), (np.arange(n) + 1) % n]] = 1
        rates["unit-cycle"] = float(H.evaluate(cycle) != 1)
        return rates
    I, J = pair_arrays(n)
    for pos in range(num_pairs(n)):
        rates[f"multilinear:{I[pos] + 1}-{J[pos] + 1}"] = float(H.degree_in(pos) >= 2)
    rates["isomult"] = inv
    h = n // 2
    star = {pos: 0 for pos in range(n - 1)}
    star2 = dict(star)
    for j in range(2, h):
        star2[pair_index(1, j, n)] = 1
    probe = _nonzero_rate(H.substitute(star) - H.substitute(star2))
    K = np.zeros(num_pairs(n), dtype=np.int64)
    for i in range(1, h + 1):
        for j in range(i + 1, h + 1):
            K[pair_index(i, j, n)] = 1
    rates["hcl-probe"] = max(probe, float(H.evaluate(K) != 1))
    return rates


def _single_round_runners(M) -> dict[str, Callable[[RandomStream], bool]]:
    """Stage name -> function running one round and returning True on rejection."""
    if M.domain_kind == DIRECTED:
        runners = {"genperm": lambda r: not genperm_test(M, r).accepted,
                   "isoperm": lambda r: not isoperm_test(M, r).accepted}
        for k in range(1, M.n // 2 + 1):
            runners[f"nocycle:{k}"] = (lambda kk: lambda r: not nocycle_test(M, kk, r).accepted)(k)
        return runners
    return {"multilinear:1-2": lambda r: not multilinear_test(M, (1, 2), r).accepted,
            "isomult": lambda r: not isomult_test(M, r).accepted,
            "hcl-probe": lambda r: not is_hcl_probe(M, r).accepted}


def single_round_frequencies(M, trials: int, seed: int) -> dict[str, float]:
    """Monte-Carlo rejection frequency of each single round over `trials` streams."""
    out = {}
    for s, (stage, run) in enumerate(_single_round_runners(M).items()):
        hits = sum(run(RandomStream(seed, t, (s,))) for t in range(trials))
        out[stage] = hits / trials
    return out
