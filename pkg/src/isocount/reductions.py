"""Decision-to-counting reductions and the corrupt-oracle amplification pipelines."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import RandomStream, as_modulus
from .counters import classify_highly_symmetric, sym_clique_count
from .errors import InternalAssertionError, UsageError
from .graphs import (ACCEPT, Digraph, DirectedMultigraph, SimpleGraph, UndirectedMultigraph, aut_size_test,
                     num_pairs, permute, random_permutation)
from .oracle import CorruptOracle, query


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------

def _nonzero_residues(p: int, size, rng: RandomStream) -> np.ndarray:
    """Uniform values in [1, p-1]."""
    return 1 + rng.field_values(p - 1, size) if p > 2 else np.ones(size, dtype=np.int64)


def reduce_hamcycle_to_counting(D: "Digraph | SimpleGraph", p, rng: RandomStream) -> DirectedMultigraph:
    """Arcs get uniform nonzero weights, non-arcs 0.

    A digraph without a Hamiltonian cycle maps to HCY = 0 always; one with a
    Hamiltonian cycle maps to HCY != 0 except with probability <= n/(p-1).
    A SimpleGraph is read as the digraph with both orientations of each edge.
    """
    mod = as_modulus(p)
    if isinstance(D, SimpleGraph):
        D = Digraph.from_simple(D)
    if not isinstance(D, Digraph):
        raise UsageError("expected a Digraph or SimpleGraph")
    if mod.p <= D.n + 1:
        raise UsageError(f"need p > n + 1 = {D.n + 1}")
    arcs = D.matrix.ravel().astype(bool)
    entries = np.zeros(D.n * D.n, dtype=np.int64)
    entries[arcs] = _nonzero_residues(mod.p, int(arcs.sum()), rng)
    return DirectedMultigraph(D.n, mod, entries)


def reduce_half_to_counting(U: SimpleGraph, p, rng: RandomStream) -> UndirectedMultigraph:
    """Edges get uniform nonzero weights, non-edges 0; soundness failure <= C(n,2)/(p-1)."""
    mod = as_modulus(p)
    if mod.p <= num_pairs(U.n) + 1:
        raise UsageError(f"need p > C(n,2) + 1 = {num_pairs(U.n) + 1}")
    on = U.bits.astype(bool)
    entries = np.zeros(num_pairs(U.n), dtype=np.int64)
    entries[on] = _nonzero_residues(mod.p, int(on.sum()), rng)
    return UndirectedMultigraph(U.n, mod, entries)


def reduce_clique_to_half(U: SimpleGraph, k: int) -> SimpleGraph:
    """A graph U' with a floor(n'/2)-clique iff U has a k-clique.

    For k > n/2, pad U with 2k - n isolated vertices (n' = 2k).  Otherwise
    join U completely to a fresh clique on n - 2k vertices (n' = 2n - 2k).
    """
    n = U.n
    if not 1 <= k <= n:
        raise UsageError(f"k must lie in 1..{n}")
    if k > n // 2:
        n2 = 2 * k
        A = np.zeros((n2, n2), dtype=np.uint8)
        A[:n, :n] = U.adjacency()
        return SimpleGraph.from_adjacency(A)
    n2 = 2 * n - 2 * k
    A = np.ones((n2, n2), dtype=np.uint8)
    A[:n, :n] = U.adjacency()
    np.fill_diagonal(A, 0)
    return SimpleGraph.from_adjacency(A)


# ---------------------------------------------------------------------------
# amplification
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AmplificationConfig:
    epsilon: float
    delta: float = 0.01
    alpha: float = 0.1
    threshold_constant: float = 100.0

    def __post_init__(self) -> None:
        for name in ("epsilon", "delta", "alpha", "threshold_constant"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise UsageError(f"{name} must be finite and positive")
        if self.epsilon > 0.5:
            raise UsageError("epsilon must lie in (0, 1/2]")
        if self.delta >= 1:
            raise UsageError("delta must lie in (0, 1)")

    @property
    def majority_queries(self) -> int:
        """m = ceil(2 ln(1/delta) / epsilon^2), from the Hoeffding bound exp(-m eps^2 / 2) <= delta."""
        # round away float noise so exact cases (eps = 1/2, delta = e^-8) give the exact integer
        raw = 2 * math.log(1 / self.delta) / self.epsilon ** 2
        return max(1, math.ceil(round(raw, 9)))

    def threshold(self, n: int) -> int:
        """t(n) = ceil(c_t n^2 / epsilon^2)."""
        return max(1, math.ceil(round(self.threshold_constant * n * n / self.epsilon ** 2, 9)))

    def symmetric_threshold(self, n: int) -> int:
        return max(1, math.ceil(self.threshold(n) ** (1 + self.alpha)))


@dataclass
class PipelineTrace:
    """What a pipeline run did: the branch taken, oracle queries and elementary steps."""

    path: str = ""
    oracle_queries: int = 0
    steps: int = 0
    family: Optional[int] = None
    notes: list = field(default_factory=list)


def amplify_query(O: CorruptOracle, U: SimpleGraph, rng: RandomStream,
                  trace: PipelineTrace | None = None) -> int:
    """Ask the oracle about one uniformly relabeled copy of U."""
    pi = random_permutation(U.n, rng)
    if trace is not None:
        trace.oracle_queries += 1
        trace.steps += U.n + 2 * num_pairs(U.n)  # draw pi, relabel the bits, index the copy
    return query(O, permute(pi, U))


def majority(values) -> int:
    """Most frequent value; ties go to the least value."""
    counts = Counter(values)
    best = max(counts.values())
    return min(v for v, c in counts.items() if c == best)


def amplify_majority(O: CorruptOracle, U: SimpleGraph, cfg: AmplificationConfig, rng: RandomStream,
                     trace: PipelineTrace | None = None) -> int:
    m = cfg.majority_queries
    return majority(amplify_query(O, U, rng, trace) for _ in range(m))


def _finisher(O: CorruptOracle) -> Callable[[int], int]:
    if O.H.finisher is None or O.H.clique_k is None:
        raise UsageError(f"{O.H.name} is not declared computable from a clique count")
    return O.H.finisher


def theorem1_pipeline(O: CorruptOracle, U: SimpleGraph, k: int, cfg: AmplificationConfig, rng: RandomStream,
                      trace: PipelineTrace | None = None) -> int:
    """Automorphism-size test, then either symmetric counting or majority amplification.

    Inputs with many automorphisms (|Aut(U)| >= n!/t) have small isomorphism
    classes that a corrupt oracle may get wrong wholesale, so they are
    counted directly by sampling their class.  Everything else is answered
    by majority vote over random relabelings.
    """
    finish = _finisher(O)
    if k != O.H.clique_k:
        raise UsageError(f"{O.H.name} is computed from {O.H.clique_k}-cliques, not {k}-cliques")
    if U.n != O.n:
        raise UsageError("input size differs from the oracle's")
    n = U.n
    t = cfg.threshold(n)
    trace = trace if trace is not None else PipelineTrace()
    trace.steps += t * n * (n + num_pairs(n))
    if aut_size_test(U, t, rng.child(0)) == ACCEPT:
        trace.path = "symmetric"
        t_sym = cfg.symmetric_threshold(n)
        trace.steps += t_sym * n * n * (n + num_pairs(n))
        try:
            return finish(sym_clique_count(U, t_sym, k, rng.child(1)))
        except InternalAssertionError:
            # a non-integral count proves the class is larger than promised;
            # such inputs belong to the majority path
            trace.path = "symmetric-fallback"
            return amplify_majority(O, U, cfg, rng.child(2), trace)
    trace.path = "amplify"
    return amplify_majority(O, U, cfg, rng.child(2), trace)


def theorem2_pipeline(O: CorruptOracle, U: SimpleGraph, k: int, epsilon: float, rng: RandomStream,
                      min_n: int = 8, delta: float = 0.01, fallback: AmplificationConfig | None = None,
                      trace: PipelineTrace | None = None) -> int:
    """Closed form for the twelve highly symmetric families, majority vote otherwise.

    Below the classification floor the call falls back to theorem1_pipeline
    (with `fallback`, default c_t = 1).
    """
    finish = _finisher(O)
    if k <= 2:
        raise UsageError("k must exceed 2")
    if k != O.H.clique_k:
        raise UsageError(f"{O.H.name} is computed from {O.H.clique_k}-cliques, not {k}-cliques")
    if U.n != O.n:
        raise UsageError("input size differs from the oracle's")
    trace = trace if trace is not None else PipelineTrace()
    cfg = AmplificationConfig(epsilon, delta)
    if U.n < max(min_n, 4):
        fb = fallback or AmplificationConfig(epsilon, delta, threshold_constant=1.0)
        value = theorem1_pipeline(O, U, k, fb, rng, trace)
        trace.path = "fallback-" + trace.path
        return value
    trace.steps += num_pairs(U.n) + U.n  # degree sequence and a linear scan over it
    tag, count = classify_highly_symmetric(U, k, min_n=min_n)
    if tag is not None:
        trace.path = "family"
        trace.family = tag.id
        return finish(count)
    trace.path = "amplify"
    return amplify_majority(O, U, cfg, rng, trace)


# ---------------------------------------------------------------------------
# zero baseline
# ---------------------------------------------------------------------------

def measure_zero_fraction(H: Callable, n: int, p, samples: int, rng: RandomStream,
                          kind: str = "directed") -> tuple[float, float]:
    """Fraction of uniform multigraph inputs on which H evaluates to 0, with its standard error.

    kind selects directed (n^2 entries) or undirected (C(n,2) entries) inputs.
    """
    mod = as_modulus(p)
    if samples < 1:
        raise UsageError("samples must be positive")
    if kind == "directed":
        make, width = DirectedMultigraph, n * n
    elif kind == "undirected":
        make, width = UndirectedMultigraph, num_pairs(n)
    else:
        raise UsageError("kind is 'directed' or 'undirected'")
    zeros = 0
    batch = 10_000
    left = samples
    while left:
        b = min(batch, left)
        block = rng.field_values(mod.p, (b, width))
        for row in block:
            if int(H(make(n, mod, row))) == 0:
                zeros += 1
        left -= b
    f = zeros / samples
    return f, math.sqrt(max(f * (1 - f), 0.0) / samples)
