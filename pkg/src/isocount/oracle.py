"""Black-box polynomial machines and simulated corrupt oracles.

A PolynomialMachine stands in for a machine handed to the identification
tests: it maps a multigraph to a field element and carries a degree
promise.  A CorruptOracle answers a ground-truth graph function correctly
on a chosen set of inputs and according to a corruption strategy elsewhere.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .algebra import FieldElement, PrimeModulus, RandomStream, as_modulus, mul_mod, native_ok, prod_mod, sum_mod
from .counters import (SparseMonomialPoly, _combos, _subset_pairs, conjugacy_class_rows, count_cliques,
                       directed_poly_from_rows, matmul_mod, ncycle_successors, triangle_count)
from .errors import CapabilityError, UsageError
from .graphs import (DirectedMultigraph, Permutation, SimpleGraph, UndirectedMultigraph, all_permutations,
                     class_partition, isomorphism_class, num_pairs)

DIRECTED = "directed"
UNDIRECTED = "undirected"

MODES = ("exact-table", "keyed-prf")
STRATEGIES = ("flip", "random-wrong", "zero", "class-targeted")
MAX_TABLE_PAIRS = 28


# ---------------------------------------------------------------------------
# keyed pseudorandom function
# ---------------------------------------------------------------------------

def prf64(seed: int, tag: bytes, data: bytes) -> int:
    """64-bit keyed hash of data; tag separates independent uses of one key."""
    h = hashlib.blake2b(data, digest_size=8, key=int(seed).to_bytes(8, "little"), person=tag[:16])
    return int.from_bytes(h.digest(), "little")


def _index_bytes(index: int) -> bytes:
    return int(index).to_bytes(max(1, (int(index).bit_length() + 7) // 8), "little")


# ---------------------------------------------------------------------------
# fast evaluators used inside machines
# ---------------------------------------------------------------------------

@lru_cache(maxsize=16)
def _subset_masks(n: int) -> tuple[np.ndarray, np.ndarray]:
    masks = ((np.arange(1 << n)[:, None] >> np.arange(n)) & 1).astype(np.int64)
    return masks, masks.sum(axis=1)


@lru_cache(maxsize=16)
def _held_karp_layers(n: int) -> list:
    """Index plan for the subset DP over vertices 2..n (vertex 1 is the fixed start)."""
    m = n - 1
    popcount = np.array([bin(s).count("1") for s in range(1 << m)])
    layers = []
    for size in range(1, m):
        S = np.flatnonzero(popcount == size)
        src, w = np.nonzero(((S[:, None] >> np.arange(m)) & 1) == 0)
        layers.append((S, src, w, S[src] | (1 << w)))
    return layers


def hcy_held_karp(M: np.ndarray, p: int) -> int:
    """HCY by dynamic programming over subsets of the non-start vertices.

    dp[S, v] is the weight of all paths from vertex 1 through exactly the
    set S ending at v.
    """
    n = M.shape[0]
    if n == 1:
        return int(M[0, 0]) % p
    m = n - 1
    B = M[1:, 1:]
    dp = np.zeros((1 << m, m), dtype=np.int64)
    dp[1 << np.arange(m), np.arange(m)] = M[0, 1:]
    for S, src, w, target in _held_karp_layers(n):
        ext = matmul_mod(dp[S], B, p)
        dp[target, w] = ext[src, w]
    return sum_mod(mul_mod(dp[-1], M[1:, 0], p), p)


def permanent_ryser(M: np.ndarray, p: int) -> int:
    n = M.shape[0]
    masks, sizes = _subset_masks(n)
    rowsums = matmul_mod(masks, M.T, p)  # entry (S, i) = sum_{j in S} a_ij
    prods = prod_mod(rowsums, p)
    sign = np.where((n - sizes) % 2 == 0, 1, p - 1)
    return sum_mod(mul_mod(prods, sign, p), p)


def _held_karp_ok(n: int, p: int) -> bool:
    # the DP products stay in native int64 under this bound
    return 2 <= n <= 16 and (n - 1) * (p - 1) ** 2 < 1 << 63


def _rows_sum(M: np.ndarray, rows: np.ndarray, p: int) -> int:
    n = M.shape[0]
    vals = M[np.arange(n)[None, :], rows]
    return sum_mod(prod_mod(vals, p), p)


# ---------------------------------------------------------------------------
# polynomial machines
# ---------------------------------------------------------------------------

@dataclass
class PolynomialMachine:
    domain_kind: str
    n: int
    modulus: PrimeModulus
    degree_bound: int
    label: str
    fn: Callable[[np.ndarray], int] = field(repr=False)
    symbolic_builder: Optional[Callable[[], SparseMonomialPoly]] = field(default=None, repr=False)

    @property
    def p(self) -> int:
        return self.modulus.p

    @property
    def graph_type(self):
        return DirectedMultigraph if self.domain_kind == DIRECTED else UndirectedMultigraph

    @property
    def num_variables(self) -> int:
        return self.n * self.n if self.domain_kind == DIRECTED else num_pairs(self.n)

    def check_domain(self, G) -> None:
        if not isinstance(G, self.graph_type):
            raise UsageError(f"{self.label} expects a {self.domain_kind} multigraph")
        if G.n != self.n or G.p != self.p:
            raise UsageError(f"{self.label} is defined for n={self.n}, p={self.p}")

    def value(self, G) -> int:
        self.check_domain(G)
        return int(self.fn(G.entries)) % self.p

    def __call__(self, G) -> FieldElement:
        return FieldElement(self.value(G), self.modulus)

    def symbolic(self) -> SparseMonomialPoly | None:
        return None if self.symbolic_builder is None else self.symbolic_builder()


def _matrix_fn(n: int, inner: Callable[[np.ndarray], int]) -> Callable[[np.ndarray], int]:
    return lambda entries: inner(entries.reshape(n, n))


def _hcl_terms(n: int, p: int, alpha: int = 1) -> SparseMonomialPoly:
    subsets = _combos(n, n // 2)
    pos = _subset_pairs(n, subsets)
    return SparseMonomialPoly.build(n, p, UNDIRECTED, ((tuple(r), alpha) for r in pos))


def _exact_hcy(n: int, mod: PrimeModulus, alpha: int = 1, label: str = "exact_hcy") -> PolynomialMachine:
    p = mod.p
    if _held_karp_ok(n, p):
        def inner(M):
            return alpha * hcy_held_karp(M, p) % p
    else:
        if n > 10:
            raise CapabilityError("HCY machines are limited to n <= 10 for this modulus")
        succ = ncycle_successors(n)

        def inner(M):
            return alpha * _rows_sum(M, succ, p) % p
    return PolynomialMachine(DIRECTED, n, mod, n, label, _matrix_fn(n, inner),
                             lambda: directed_poly_from_rows(n, p, ncycle_successors(n), alpha))


def _exact_hcl(n: int, mod: PrimeModulus, alpha: int = 1, label: str = "exact_hcl") -> PolynomialMachine:
    p = mod.p
    if n > 14:
        raise CapabilityError("HCL machines are limited to n <= 14")
    pos = _subset_pairs(n, _combos(n, n // 2))

    def fn(entries):
        return alpha * sum_mod(prod_mod(entries[pos], p), p) % p
    h = n // 2
    return PolynomialMachine(UNDIRECTED, n, mod, h * (h - 1) // 2, label, fn,
                             lambda: _hcl_terms(n, p, alpha))


def _exact_permanent(n: int, mod: PrimeModulus) -> PolynomialMachine:
    p = mod.p
    if n > 16:
        raise CapabilityError("permanent machines are limited to n <= 16")
    if native_ok(p) and n * p < 1 << 62:
        def inner(M):
            return permanent_ryser(M, p)
    else:
        perms = all_permutations(n).astype(np.int64)

        def inner(M):
            return _rows_sum(M, perms, p)
    return PolynomialMachine(DIRECTED, n, mod, n, "exact_permanent", _matrix_fn(n, inner),
                             lambda: directed_poly_from_rows(n, p, all_permutations(n).astype(np.int64)))


def _conj_class(n: int, mod: PrimeModulus, parts: Sequence[int]) -> PolynomialMachine:
    p = mod.p
    parts = tuple(sorted((int(x) for x in parts), reverse=True))
    rows = conjugacy_class_rows(n, parts)

    def inner(M):
        return _rows_sum(M, rows, p)
    return PolynomialMachine(DIRECTED, n, mod, n, f"conj_class{parts}", _matrix_fn(n, inner),
                             lambda: directed_poly_from_rows(n, p, rows))


def _single_cover(n: int, mod: PrimeModulus, sigma: Permutation | None) -> PolynomialMachine:
    p = mod.p
    if sigma is None:
        sigma = Permutation([i % n + 1 for i in range(1, n + 1)])
    cols = np.arange(n) * n + sigma.array

    def fn(entries):
        return int(prod_mod(entries[cols], p))
    return PolynomialMachine(DIRECTED, n, mod, n, "single_cover_monomial", fn,
                             lambda: SparseMonomialPoly.build(n, p, DIRECTED, [(tuple(cols), 1)]))


def _row_monomial(n: int, mod: PrimeModulus) -> PolynomialMachine:
    p = mod.p
    cols = np.arange(1, n)  # entries (1, j) for j >= 2

    def fn(entries):
        return int(prod_mod(entries[cols], p))
    return PolynomialMachine(DIRECTED, n, mod, n - 1, "row_monomial", fn,
                             lambda: SparseMonomialPoly.build(n, p, DIRECTED, [(tuple(cols), 1)]))


def _edge_sum(n: int, mod: PrimeModulus) -> PolynomialMachine:
    p = mod.p

    def fn(entries):
        return sum_mod(entries, p)
    return PolynomialMachine(UNDIRECTED, n, mod, 1, "edge_sum", fn,
                             lambda: SparseMonomialPoly.build(n, p, UNDIRECTED,
                                                              (((k,), 1) for k in range(num_pairs(n)))))


def _edge_monomial(n: int, mod: PrimeModulus) -> PolynomialMachine:
    p = mod.p
    return PolynomialMachine(UNDIRECTED, n, mod, 1, "edge_monomial", lambda e: int(e[0]) % p,
                             lambda: SparseMonomialPoly.build(n, p, UNDIRECTED, [((0,), 1)]))


def _square_variable(n: int, mod: PrimeModulus) -> PolynomialMachine:
    p = mod.p
    return PolynomialMachine(UNDIRECTED, n, mod, 2, "square_variable", lambda e: int(e[0]) * int(e[0]) % p,
                             lambda: SparseMonomialPoly.build(n, p, UNDIRECTED, [((0, 0), 1)]))


def noisy_machine(base: PolynomialMachine, epsilon: float, seed: int) -> PolynomialMachine:
    """base, except on inputs whose keyed hash falls in an epsilon fraction, where it answers wrongly."""
    if not 0 <= epsilon <= 1:
        raise UsageError("epsilon must lie in [0, 1]")
    p = base.p
    cut = int(epsilon * 2 ** 64)

    def fn(entries):
        value = int(base.fn(entries)) % p
        data = entries.tobytes()
        if prf64(seed, b"noisy-select", data) < cut:
            shift = 1 + prf64(seed, b"noisy-value", data) % (p - 1)
            return (value + shift) % p
        return value
    return PolynomialMachine(base.domain_kind, base.n, base.modulus, base.degree_bound,
                             f"noisy({base.label}, {epsilon})", fn, None)


CATALOG = ("exact_hcy", "exact_hcl", "exact_permanent", "scaled_hcy", "scaled_hcl", "conj_class",
           "single_cover_monomial", "row_monomial", "edge_sum", "edge_monomial", "square_variable", "noisy")

_ALIASES = {"hcy": "exact_hcy", "hcl": "exact_hcl", "permanent": "exact_permanent"}


def machine_catalog(kind: str, n: int, p, *, alpha: int = 2, parts: Sequence[int] | None = None,
                    sigma: Permutation | None = None, base: str = "exact_hcy", epsilon: float = 0.01,
                    seed: int = 0) -> PolynomialMachine:
    """Build a named machine.

    kinds: exact_hcy, exact_hcl, exact_permanent, scaled_hcy, scaled_hcl
    (alpha times the exact polynomial), conj_class (cycle type `parts`,
    default (n-2, 2)), single_cover_monomial (the monomial of one
    permutation, default the n-cycle i -> i+1), row_monomial (product of
    e_(1,j) over j >= 2), edge_sum, edge_monomial (e_{1,2}),
    square_variable (e_{1,2}^2) and noisy (machine `base` corrupted on an
    epsilon fraction of inputs).
    """
    kind = _ALIASES.get(kind, kind)
    mod = as_modulus(p)
    if n < 2:
        raise UsageError("machines need n >= 2")
    if kind == "exact_hcy":
        return _exact_hcy(n, mod)
    if kind == "exact_hcl":
        return _exact_hcl(n, mod)
    if kind == "exact_permanent":
        return _exact_permanent(n, mod)
    if kind == "scaled_hcy":
        return _exact_hcy(n, mod, alpha % mod.p, f"scaled_hcy({alpha})")
    if kind == "scaled_hcl":
        return _exact_hcl(n, mod, alpha % mod.p, f"scaled_hcl({alpha})")
    if kind == "conj_class":
        if parts is None:
            if n < 4:
                raise UsageError("the default conj_class type (n-2, 2) needs n >= 4")
            parts = (n - 2, 2)
        if sum(parts) != n:
            raise UsageError(f"cycle type {tuple(parts)} does not partition {n}")
        return _conj_class(n, mod, parts)
    if kind == "single_cover_monomial":
        return _single_cover(n, mod, sigma)
    if kind == "row_monomial":
        return _row_monomial(n, mod)
    if kind == "edge_sum":
        return _edge_sum(n, mod)
    if kind == "edge_monomial":
        return _edge_monomial(n, mod)
    if kind == "square_variable":
        return _square_variable(n, mod)
    if kind == "noisy":
        if _ALIASES.get(base, base) == "noisy":
            raise UsageError("noisy needs a non-noisy base machine")
        return noisy_machine(machine_catalog(base, n, mod, alpha=alpha, parts=parts, sigma=sigma),
                             epsilon, seed)
    raise UsageError(f"unknown machine kind {kind!r}; choose from {', '.join(CATALOG)}")


# ---------------------------------------------------------------------------
# ground truth functions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GroundTruthFunction:
    """An isomorphism-invariant graph function, optionally computable from a k-clique count."""

    name: str
    eval: Callable[[SimpleGraph], int] = field(repr=False)
    isomorphism_invariant: bool = True
    codomain: Optional[Callable[[int], Sequence[int]]] = field(default=None, repr=False)
    clique_k: Optional[int] = None
    finisher: Optional[Callable[[int], int]] = field(default=None, repr=False)

    def values(self, n: int) -> Sequence[int] | None:
        return None if self.codomain is None else self.codomain(n)

    def is_boolean(self, n: int) -> bool:
        vals = self.values(n)
        return vals is not None and tuple(vals) == (0, 1)


def _clique_eval(k: int) -> Callable[[SimpleGraph], int]:
    if k == 3:
        return triangle_count
    return lambda U: count_cliques(U, k)


def clique_parity(k: int = 3) -> GroundTruthFunction:
    count = _clique_eval(k)
    return GroundTruthFunction(f"clique-parity:{k}", lambda U: count(U) % 2, True,
                               lambda n: (0, 1), k, lambda c: c % 2)


def clique_count(k: int = 3) -> GroundTruthFunction:
    return GroundTruthFunction(f"clique-count:{k}", _clique_eval(k), True,
                               lambda n: tuple(range(math.comb(n, k) + 1)), k, lambda c: c)


def truth_function(name: str) -> GroundTruthFunction:
    """Look up a ground-truth function by its name ("clique-parity:3", "clique-count:4", ...)."""
    kind, _, arg = name.partition(":")
    try:
        k = int(arg) if arg else 3
    except ValueError:
        raise UsageError(f"bad ground-truth name {name!r}") from None
    if k < 1:
        raise UsageError("k must be positive")
    if kind == "clique-parity":
        return clique_parity(k)
    if kind == "clique-count":
        return clique_count(k)
    raise UsageError(f"unknown ground-truth function {name!r}")


# ---------------------------------------------------------------------------
# corrupt oracles
# ---------------------------------------------------------------------------

def exact_subset_mask(N: int, size: int, gen: np.random.Generator, block: int = 1 << 20) -> np.ndarray:
    """Packed little-endian bit mask of a uniform subset of range(N) with exactly `size` members.

    The count in each block of indices is drawn from the multivariate
    hypergeometric law and then a uniform subset of that size is chosen
    inside the block, which is equivalent to sequential selection sampling.
    """
    if not 0 <= size <= N:
        raise UsageError("subset size out of range")
    starts = list(range(0, N, block))
    lengths = [min(block, N - s) for s in starts]
    if len(starts) == 1:
        counts = [size]
    else:
        counts = gen.multivariate_hypergeometric(np.array(lengths, dtype=np.int64), size).tolist()
    packed = np.zeros((N + 7) // 8, dtype=np.uint8)
    for s, length, count in zip(starts, lengths, counts):
        bm = np.zeros(length, dtype=bool)
        if count:
            bm[gen.choice(length, size=count, replace=False)] = True
        chunk = np.packbits(bm, bitorder="little")
        packed[s // 8:s // 8 + len(chunk)] = chunk
    return packed


def _mask_bit(packed: np.ndarray, index: int) -> bool:
    return bool((packed[index >> 3] >> (index & 7)) & 1)


def unpack_mask(packed: np.ndarray, N: int) -> np.ndarray:
    return np.unpackbits(packed, bitorder="little")[:N].astype(bool)


class CorruptOracle:
    """One sample of the corrupt-oracle experiment for a ground-truth function.

    The sample is fully determined by (H, n, c, mode, strategy, seed); the
    correct set is rebuilt from the seed rather than stored.  `queries`
    counts calls to query() and is the only mutable state.
    """

    def __init__(self, H: GroundTruthFunction, n: int, c: float, mode: str, strategy: str, seed: int):
        if mode not in MODES:
            raise UsageError(f"mode must be one of {MODES}")
        if strategy not in STRATEGIES:
            raise UsageError(f"strategy must be one of {STRATEGIES}")
        if not 0 < c <= 1:
            raise UsageError("c must lie in (0, 1]")
        if n < 1:
            raise UsageError("n must be positive")
        if strategy == "flip" and not H.is_boolean(n):
            raise UsageError("the flip strategy needs a boolean ground truth")
        if strategy in ("random-wrong", "class-targeted") and H.values(n) is None:
            raise UsageError(f"the {strategy} strategy needs a finite codomain")
        self.H = H
        self.n = int(n)
        self.c = float(c)
        self.mode = mode
        self.strategy = strategy
        self.seed = int(seed)
        self.queries = 0
        self.m = num_pairs(self.n)
        self._truth_cache: dict[int, int] = {}
        self._mask = None
        if mode == "exact-table":
            if self.m > MAX_TABLE_PAIRS:
                raise CapabilityError(f"exact tables need C(n,2) <= {MAX_TABLE_PAIRS}")
            self._mask = self._build_table()
        elif strategy == "class-targeted":
            raise CapabilityError("class-targeted corruption needs the exact-table mode")

    # --- construction -------------------------------------------------------

    @property
    def table_size(self) -> int:
        return 1 << self.m

    @property
    def correct_size(self) -> int:
        return int(round(self.c * self.table_size))

    def _build_table(self) -> np.ndarray:
        gen = RandomStream(self.seed, stream_id=0, path=(1,)).generator
        N = self.table_size
        if self.strategy != "class-targeted":
            return exact_subset_mask(N, self.correct_size, gen)
        labels, sizes = class_partition(self.n)
        budget = N - self.correct_size
        order = np.lexsort((np.arange(len(sizes)), sizes))
        corrupt_classes = []
        for cls in order:
            if sizes[cls] > budget:
                break
            corrupt_classes.append(cls)
            budget -= int(sizes[cls])
        wrong = np.isin(labels, np.array(corrupt_classes, dtype=labels.dtype))
        if budget:
            rest = np.flatnonzero(~wrong)
            wrong[gen.choice(rest, size=budget, replace=False)] = True
        self.targeted_classes = tuple(int(c) for c in corrupt_classes)
        return np.packbits(~wrong, bitorder="little")

    def snapshot(self) -> dict:
        return {"mode": self.mode, "strategy": self.strategy, "c": self.c, "n": self.n,
                "seed": self.seed, "H": self.H.name}

    def to_json(self) -> str:
        return json.dumps(self.snapshot(), sort_keys=True)

    @classmethod
    def from_snapshot(cls, doc: "dict | str") -> "CorruptOracle":
        if isinstance(doc, str):
            doc = json.loads(doc)
        try:
            return cls(truth_function(doc["H"]), int(doc["n"]), float(doc["c"]), doc["mode"],
                       doc["strategy"], int(doc["seed"]))
        except KeyError as exc:
            raise UsageError(f"oracle snapshot missing {exc}") from None

    # --- answers ------------------------------------------------------------

    def is_correct_index(self, index: int) -> bool:
        if self._mask is not None:
            return _mask_bit(self._mask, index)
        return prf64(self.seed, b"correct", _index_bytes(index)) < self.c * 2 ** 64

    def correct_mask(self) -> np.ndarray:
        """Boolean membership of every index in the correct set (exact-table only)."""
        if self._mask is None:
            raise CapabilityError("the correct set is only materialised in exact-table mode")
        return unpack_mask(self._mask, self.table_size)

    def truth(self, U: SimpleGraph, index: int | None = None) -> int:
        index = U.index() if index is None else index
        v = self._truth_cache.get(index)
        if v is None:
            v = int(self.H.eval(U))
            if len(self._truth_cache) < 1_000_000:
                self._truth_cache[index] = v
        return v

    def _wrong(self, U: SimpleGraph, index: int) -> int:
        truth = self.truth(U, index)
        if self.strategy == "zero":
            return 0
        if self.strategy == "flip" or (self.strategy == "class-targeted" and self.H.is_boolean(self.n)):
            return 1 - truth
        values = [v for v in self.H.values(self.n) if v != truth]
        if not values:
            return truth
        return values[prf64(self.seed, b"wrong", _index_bytes(index)) % len(values)]

    def answer(self, U: SimpleGraph) -> int:
        """The oracle's answer on U without touching the query counter."""
        if U.n != self.n:
            raise UsageError(f"oracle is for n={self.n}, got a graph on {U.n} vertices")
        index = U.index()
        if self.is_correct_index(index):
            return self.truth(U, index)
        return self._wrong(U, index)


def sample_corrupt_oracle(H: GroundTruthFunction, n: int, c: float, mode: str, strategy: str,
                          rng: RandomStream) -> CorruptOracle:
    seed = int(rng.integers(0, 2 ** 63))
    return CorruptOracle(H, n, c, mode, strategy, seed)


def query(O: CorruptOracle, U: SimpleGraph) -> int:
    O.queries += 1
    return O.answer(U)


def per_class_correctness(O: CorruptOracle, U: SimpleGraph) -> float:
    """Fraction of U's isomorphism class on which the oracle answers correctly."""
    if U.n != O.n:
        raise UsageError("graph size differs from the oracle's")
    members = isomorphism_class(U)
    truth = O.truth(U)  # invariant, so one evaluation serves the class
    good = sum(1 for V in members if O.answer(V) == truth)
    return good / len(members)


def class_correctness_table(O: CorruptOracle) -> tuple[np.ndarray, np.ndarray]:
    """Per-class (correct fraction, class size) over every class, for n <= 7.

    Uses membership in the correct set, which equals answer correctness
    for every strategy whose corrupt answers are always wrong (all but zero).
    """
    if O.strategy == "zero":
        raise UsageError("the zero strategy can answer correctly off the correct set; use per_class_correctness")
    labels, sizes = class_partition(O.n)
    good = np.bincount(labels, weights=O.correct_mask().astype(np.float64), minlength=len(sizes))
    return good / sizes, sizes
