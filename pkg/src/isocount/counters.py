"""Reference evaluators for the counting polynomials, plus the fast clique counters.

The brute-force routines enumerate their defining sums directly and serve
as the ground truth the rest of the package is checked against.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np

from .algebra import FieldElement, PrimeModulus, RandomStream, as_modulus, mul_mod, prod_mod, sum_mod
from .errors import CapabilityError, InternalAssertionError, UsageError
from .graphs import (DirectedMultigraph, Permutation, SimpleGraph, UndirectedMultigraph,
                     all_permutations, complement, cycle_type,
                     cycle_type_codes, num_pairs, pair_index, pair_index_matrix,
                     pair_map)

MAX_HCY_N = 10
MAX_HCL_N = 14
MAX_PERM_N = 9
MAX_GPR_N = 8
MAX_KCLIQUE_SUBSETS = 10 ** 7
MAX_FAST_ROWS = 4000


def _fe(value: int, p: PrimeModulus) -> FieldElement:
    return FieldElement(int(value) % p.p, p)


def _sum_terms(rows: np.ndarray, cols: np.ndarray, M: np.ndarray, p: int, chunk: int = 100_000) -> int:
    """Sum over rows r of prod_i M[rows[r, i], cols[r, i]] mod p."""
    total = 0
    for s in range(0, len(rows), chunk):
        vals = M[rows[s:s + chunk], cols[s:s + chunk]]
        total = (total + sum_mod(prod_mod(vals, p), p)) % p
    return total


# ---------------------------------------------------------------------------
# directed families: HCY, permanent, generalized permanent, conjugacy classes
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4)
def ncycle_successors(n: int) -> np.ndarray:
    """Successor arrays of all (n-1)! cyclic permutations that form one n-cycle."""
    if n == 1:
        return np.zeros((1, 1), dtype=np.int64)
    orders = np.array(list(itertools.permutations(range(1, n))), dtype=np.int64)
    rows = np.arange(len(orders))[:, None]
    succ = np.empty((len(orders), n), dtype=np.int64)
    succ[:, 0] = orders[:, 0]
    succ[rows, orders[:, :-1]] = orders[:, 1:]
    succ[rows[:, 0], orders[:, -1]] = 0
    succ.setflags(write=False)
    return succ


def _row_ids(n: int, m: int) -> np.ndarray:
    return np.broadcast_to(np.arange(n, dtype=np.int64), (m, n))


def hcy_bruteforce(E: DirectedMultigraph) -> FieldElement:
    """Sum over the (n-1)! n-cycles sigma of prod_i e_(i, sigma(i))."""
    n = E.n
    if n > MAX_HCY_N:
        raise CapabilityError(f"brute-force HCY is limited to n <= {MAX_HCY_N}")
    succ = ncycle_successors(n)
    return _fe(_sum_terms(_row_ids(n, len(succ)), succ, E.matrix(), E.p), E.modulus)


def permanent_bruteforce(E: DirectedMultigraph) -> FieldElement:
    n = E.n
    if n > MAX_PERM_N:
        raise CapabilityError(f"brute-force permanent is limited to n <= {MAX_PERM_N}")
    perms = all_permutations(n).astype(np.int64)
    return _fe(_sum_terms(_row_ids(n, len(perms)), perms, E.matrix(), E.p), E.modulus)


@dataclass
class GprCoefficients:
    """Coefficient vector of a generalized permanent; absent permutations weigh 0."""

    n: int
    modulus: PrimeModulus
    by_permutation: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        self.modulus = as_modulus(self.modulus)
        clean = {}
        for perm, coeff in self.by_permutation.items():
            if not isinstance(perm, Permutation) or perm.n != self.n:
                raise UsageError("coefficients must be keyed by permutations of the right size")
            v = int(coeff) % self.modulus.p
            if v:
                clean[perm] = v
        self.by_permutation = clean

    @classmethod
    def from_class_function(cls, n: int, p, weight: Mapping[tuple, int]) -> "GprCoefficients":
        """Coefficients constant on conjugacy classes: weight maps cycle-type parts to a value."""
        perms = all_permutations(n)
        types, codes = cycle_type_codes(n)
        coeffs = {}
        for r, row in enumerate(perms):
            v = weight.get(types[codes[r]], 0)
            if v:
                coeffs[Permutation.from_array(row)] = v
        return cls(n, p, coeffs)

    def coefficient(self, perm: Permutation) -> FieldElement:
        return _fe(self.by_permutation.get(perm, 0), self.modulus)


def gpr_evaluate(A: GprCoefficients, E: DirectedMultigraph) -> FieldElement:
    if E.n != A.n or E.p != A.modulus.p:
        raise UsageError("coefficient vector and multigraph disagree on n or p")
    if E.n > MAX_GPR_N:
        raise CapabilityError(f"generalized permanents are limited to n <= {MAX_GPR_N}")
    if not A.by_permutation:
        return _fe(0, E.modulus)
    perms = np.array([q.array for q in A.by_permutation], dtype=np.int64)
    coeffs = np.array(list(A.by_permutation.values()), dtype=np.int64)
    vals = prod_mod(E.matrix()[_row_ids(E.n, len(perms)), perms], E.p)
    return _fe(sum_mod(mul_mod(vals, coeffs, E.p), E.p), E.modulus)


@lru_cache(maxsize=16)
def conjugacy_class_rows(n: int, parts: tuple[int, ...]) -> np.ndarray:
    """All permutations with the given cycle type, filtered from S_n."""
    if n > MAX_GPR_N:
        raise CapabilityError(f"conjugacy classes are materialised only for n <= {MAX_GPR_N}")
    types, codes = cycle_type_codes(n)
    parts = tuple(sorted(parts, reverse=True))
    if parts not in types:
        raise UsageError(f"{parts} is not a partition of {n}")
    rows = all_permutations(n)[codes == types.index(parts)].astype(np.int64)
    rows.setflags(write=False)
    return rows


def conjugacy_class_poly(gamma: Permutation, E: DirectedMultigraph) -> FieldElement:
    """Sum over sigma conjugate to gamma of prod_i e_(i, sigma(i))."""
    if gamma.n != E.n:
        raise UsageError("permutation and multigraph sizes differ")
    rows = conjugacy_class_rows(E.n, cycle_type(gamma).parts)
    return _fe(_sum_terms(_row_ids(E.n, len(rows)), rows, E.matrix(), E.p), E.modulus)


# ---------------------------------------------------------------------------
# undirected families
# ---------------------------------------------------------------------------

def _subset_pairs(n: int, subsets: np.ndarray) -> np.ndarray:
    """Canonical pair positions inside each vertex subset (rows of zero-based vertices)."""
    k = subsets.shape[1]
    idx = pair_index_matrix(n)
    a, b = np.triu_indices(k, k=1)
    return idx[subsets[:, a], subsets[:, b]]


@lru_cache(maxsize=32)
def _combos(n: int, k: int) -> np.ndarray:
    count = math.comb(n, k)
    flat = np.fromiter(itertools.chain.from_iterable(itertools.combinations(range(n), k)),
                       dtype=np.int64, count=count * k)
    arr = flat.reshape(count, k)
    arr.setflags(write=False)
    return arr


def _clique_sum(F: UndirectedMultigraph, k: int, chunk: int = 200_000) -> int:
    n, p = F.n, F.p
    if k > n:
        return 0
    if k <= 1:
        return math.comb(n, k) % p
    if math.comb(n, k) <= 50_000:
        blocks = [_combos(n, k)]
    else:
        it = itertools.combinations(range(n), k)
        blocks = iter(lambda: np.array(list(itertools.islice(it, chunk)), dtype=np.int64).reshape(-1, k), None)
    total = 0
    for sub in blocks:
        if len(sub) == 0:
            break
        vals = F.entries[_subset_pairs(n, sub)]
        total = (total + sum_mod(prod_mod(vals, p), p)) % p
    return total


def hcl_bruteforce(F: UndirectedMultigraph) -> FieldElement:
    """Sum over floor(n/2)-subsets S of the product of the edge weights inside S."""
    if F.n > MAX_HCL_N:
        raise CapabilityError(f"brute-force HCL is limited to n <= {MAX_HCL_N}")
    return _fe(_clique_sum(F, F.n // 2), F.modulus)


def kclique_bruteforce(F: UndirectedMultigraph, k: int) -> FieldElement:
    if k < 0:
        raise UsageError("k must be non-negative")
    if math.comb(F.n, k) > MAX_KCLIQUE_SUBSETS:
        raise CapabilityError(f"C({F.n},{k}) subsets exceed the brute-force bound")
    return _fe(_clique_sum(F, k), F.modulus)


def iso_subgraph_poly(S: Iterable[Sequence[int]], F: UndirectedMultigraph) -> FieldElement:
    """Sum over the distinct relabelings sigma(S) of the product of their edge weights."""
    n = F.n
    if n > MAX_GPR_N:
        raise CapabilityError(f"subgraph-class polynomials are limited to n <= {MAX_GPR_N}")
    positions = sorted({pair_index(int(i), int(j), n) for i, j in S})
    if not positions:
        return _fe(1, F.modulus)
    mask = np.zeros(num_pairs(n), dtype=np.uint8)
    mask[positions] = 1
    images = np.unique(mask[pair_map(all_permutations(n).astype(np.int64))], axis=0)
    # each image row is an edge set; its monomial is the product over its 1-positions
    cols = np.array([np.flatnonzero(r) for r in images], dtype=np.int64)
    vals = F.entries[cols]
    return _fe(sum_mod(prod_mod(vals, F.p), F.p), F.modulus)


# ---------------------------------------------------------------------------
# sparse polynomials (symbolic form of small machines)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SparseMonomialPoly:
    """A polynomial as a map from monomials to coefficients.

    A monomial is a sorted tuple of variable positions with repetition, so
    e^2 appears as (v, v).  Variables are directed entry positions
    ((i-1)*n + (j-1)) or canonical pair positions, per variable_kind.
    """

    n: int
    p: int
    variable_kind: str
    terms: tuple  # ((monomial, coeff), ...), sorted, no zero coefficients

    @classmethod
    def build(cls, n: int, p: int, variable_kind: str, terms: Iterable) -> "SparseMonomialPoly":
        if variable_kind not in ("directed", "undirected"):
            raise UsageError("variable_kind is 'directed' or 'undirected'")
        acc: dict = {}
        for mono, coeff in terms:
            key = tuple(sorted(int(v) for v in mono))
            acc[key] = (acc.get(key, 0) + int(coeff)) % p
        return cls(n, p, variable_kind, tuple(sorted((m, c) for m, c in acc.items() if c)))

    @property
    def num_variables(self) -> int:
        return self.n * self.n if self.variable_kind == "directed" else num_pairs(self.n)

    @property
    def degree(self) -> int:
        return max((len(m) for m, _ in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def is_multilinear(self) -> bool:
        return all(len(set(m)) == len(m) for m, _ in self.terms)

    def degree_in(self, var: int) -> int:
        return max((m.count(var) for m, _ in self.terms), default=0)

    def evaluate(self, entries: Sequence[int]) -> int:
        total = 0
        for mono, coeff in self.terms:
            v = coeff
            for x in mono:
                v = v * int(entries[x]) % self.p
            total += v
        return total % self.p

    def _var_map(self, perm0: np.ndarray) -> np.ndarray:
        """Position of each variable after relabeling: x at (i,j) becomes (pi(i), pi(j))."""
        if self.variable_kind == "directed":
            n = self.n
            # the relabeled polynomial reads entry (pi(i), pi(j)) where it used (i, j)
            i, j = np.divmod(np.arange(n * n), n)
            return perm0[i] * n + perm0[j]
        return pair_map(perm0)

    def permuted(self, perm0: np.ndarray) -> "SparseMonomialPoly":
        """The polynomial E -> H(permute(pi, E))."""
        vmap = self._var_map(np.asarray(perm0, dtype=np.int64))
        return SparseMonomialPoly.build(self.n, self.p, self.variable_kind,
                                        ((tuple(vmap[list(m)]), c) for m, c in self.terms))

    def substitute(self, values: Mapping[int, int]) -> "SparseMonomialPoly":
        """Fix some variables to constants; the rest stay symbolic."""
        out = []
        for mono, coeff in self.terms:
            c = coeff
            rest = []
            for x in mono:
                if x in values:
                    c = c * (values[x] % self.p) % self.p
                else:
                    rest.append(x)
            if c:
                out.append((tuple(rest), c))
        return SparseMonomialPoly.build(self.n, self.p, self.variable_kind, out)

    def __sub__(self, other: "SparseMonomialPoly") -> "SparseMonomialPoly":
        neg = ((m, -c) for m, c in other.terms)
        return SparseMonomialPoly.build(self.n, self.p, self.variable_kind,
                                        itertools.chain(self.terms, neg))

    def invariance_group_order(self) -> int:
        """|{pi in S_n : H(permute(pi, .)) == H}| by enumeration."""
        target = self.terms
        return sum(1 for row in all_permutations(self.n).astype(np.int64)
                   if self.permuted(row).terms == target)


def directed_poly_from_rows(n: int, p: int, rows: np.ndarray, coeff: int = 1) -> SparseMonomialPoly:
    """Symbolic sum over permutation rows sigma of coeff * prod_i e_(i, sigma(i))."""
    base = np.arange(n) * n
    return SparseMonomialPoly.build(n, p, "directed", ((tuple(base + r), coeff) for r in np.asarray(rows)))


# ---------------------------------------------------------------------------
# fast k-clique counting by matrix multiplication
# ---------------------------------------------------------------------------

def _matmul_native(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    N = A.shape[1]
    if N == 0:
        return np.zeros((A.shape[0], B.shape[1]), dtype=np.int64)
    if N * (p - 1) ** 2 < 1 << 63:
        return A @ B % p
    if N * (p - 1) * (1 << 16) < 1 << 63:
        hi, lo = np.divmod(B, 1 << 16)
        return ((A @ hi % p) * (1 << 16) + A @ lo) % p
    return None


def matmul_mod(A: np.ndarray, B: np.ndarray, p: int) -> np.ndarray:
    """Exact schoolbook product mod p of reduced int64 matrices."""
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    out = _matmul_native(A, B, p)
    if out is not None:
        return out
    prod = A.astype(object).dot(B.astype(object)) % p
    return prod.astype(np.int64)


def strassen_mod(A: np.ndarray, B: np.ndarray, p: int, leaf: int = 64) -> np.ndarray:
    """Strassen's recursion over Z_p, falling back to schoolbook below `leaf`."""
    n, m = A.shape
    m2, k = B.shape
    if m != m2:
        raise UsageError("shape mismatch")
    size = max(n, m, k)
    if size <= leaf:
        return matmul_mod(A, B, p)
    half = (size + 1) // 2
    dim = 2 * half
    Ap = np.zeros((dim, dim), dtype=np.int64)
    Bp = np.zeros((dim, dim), dtype=np.int64)
    Ap[:n, :m] = A
    Bp[:m, :k] = B
    a11, a12, a21, a22 = Ap[:half, :half], Ap[:half, half:], Ap[half:, :half], Ap[half:, half:]
    b11, b12, b21, b22 = Bp[:half, :half], Bp[:half, half:], Bp[half:, :half], Bp[half:, half:]

    def rec(X, Y):
        return strassen_mod(X % p, Y % p, p, leaf)

    m1 = rec(a11 + a22, b11 + b22)
    m2_ = rec(a21 + a22, b11)
    m3 = rec(a11, b12 - b22)
    m4 = rec(a22, b21 - b11)
    m5 = rec(a11 + a12, b22)
    m6 = rec(a21 - a11, b11 + b12)
    m7 = rec(a12 - a22, b21 + b22)
    C = np.empty((dim, dim), dtype=np.int64)
    C[:half, :half] = (m1 + m4 - m5 + m7) % p
    C[:half, half:] = (m3 + m5) % p
    C[half:, :half] = (m2_ + m4) % p
    C[half:, half:] = (m1 - m2_ + m3 + m6) % p
    return C[:n, :k]


def _blocks_weight(M: np.ndarray, subsets: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray]:
    """Inner weights w(S) and cross weights W[S, S'] for vertex blocks of equal size.

    M must have a zero diagonal, which makes W vanish on overlapping blocks.
    """
    s = subsets.shape[1]
    inner = np.ones(len(subsets), dtype=np.int64)
    for a in range(s):
        for b in range(a + 1, s):
            inner = mul_mod(inner, M[subsets[:, a], subsets[:, b]], p)
    W = np.ones((len(subsets), len(subsets)), dtype=np.int64)
    for a in range(s):
        for b in range(s):
            W = mul_mod(W, M[subsets[:, a][:, None], subsets[:, b][None, :]], p)
    return inner, W


def _clique_trace(M: np.ndarray, kk: int, p: int, strassen: bool) -> int:
    """Number of kk-cliques (3 | kk) of the weighted graph M, mod p."""
    s = kk // 3
    N = M.shape[0]
    if math.comb(N, s) > MAX_FAST_ROWS:
        raise CapabilityError(f"C({N},{s}) rows exceed the fast counter's memory bound")
    subsets = _combos(N, s)
    inner, W = _blocks_weight(M, subsets, p)
    X = mul_mod(inner[:, None], W, p)
    X2 = strassen_mod(X, X, p) if strassen else matmul_mod(X, X, p)
    trace = sum_mod(mul_mod(X2, X.T, p), p)
    # each clique is one closed walk per ordered split into three labelled blocks
    walks_per_clique = math.factorial(3 * s) // math.factorial(s) ** 3
    return trace * pow(walks_per_clique, -1, p) % p


def _padded(M: np.ndarray, dummy: Sequence[tuple[int, int]]) -> np.ndarray:
    """Append dummy vertices; dummy[d] = (weight to every original vertex, weight to earlier dummies)."""
    n = M.shape[0]
    t = len(dummy)
    out = np.zeros((n + t, n + t), dtype=np.int64)
    out[:n, :n] = M
    for d, (to_orig, to_dummy) in enumerate(dummy):
        out[n + d, :n] = out[:n, n + d] = to_orig
        for e in range(d):
            out[n + d, n + e] = out[n + e, n + d] = to_dummy
    return out


def kclique_fast(F: UndirectedMultigraph, k: int, strassen: bool = False) -> FieldElement:
    """k-clique count of a multigraph via trace((D W)^3), exact over Z_p.

    When 3 does not divide k, one or two dummy vertices are added and the
    auxiliary counts are combined by inclusion-exclusion.
    """
    if k < 1:
        raise UsageError("k must be positive")
    p = F.p
    t = 3 * math.ceil(k / 3) - k
    kk = k + t
    if p <= kk:
        raise CapabilityError(f"the fast counter needs p > {kk}")
    M = F.matrix()

    def f(matrix):
        return _clique_trace(matrix, kk, p, strassen)

    if t == 0:
        value = f(M)
    elif t == 1:
        value = f(_padded(M, [(1, 0)])) - f(_padded(M, [(0, 0)]))
    else:
        g1 = f(_padded(M, [(0, 0), (0, 0)]))
        g2 = f(_padded(M, [(1, 0), (0, 0)]))
        g3 = f(_padded(M, [(0, 0), (1, 0)]))
        g4 = f(_padded(M, [(1, 0), (1, 1)]))
        value = g4 - g3 - g2 + g1
    return _fe(value, F.modulus)


# ---------------------------------------------------------------------------
# simple-graph clique counts and the symmetric-graph counter
# ---------------------------------------------------------------------------

def count_cliques(U: SimpleGraph, k: int) -> int:
    """Exact number of k-vertex cliques of a simple graph (bitmask search)."""
    n = U.n
    if k < 0:
        raise UsageError("k must be non-negative")
    if k == 0:
        return 1
    A = U.adjacency()
    nbr = [int(sum(1 << j for j in np.flatnonzero(A[i]))) for i in range(n)]

    def grow(cands: int, depth: int) -> int:
        if depth == k:
            return 1
        total = 0
        while cands:
            low = cands & -cands
            v = low.bit_length() - 1
            cands ^= low
            # only later vertices, so each clique is counted once
            total += grow(cands & nbr[v], depth + 1)
        return total

    return grow((1 << n) - 1, 0)


def triangle_count(U: SimpleGraph) -> int:
    A = U.adjacency().astype(np.int64)
    return int(np.trace(A @ A @ A)) // 6


def _pack_rows(rows: np.ndarray) -> np.ndarray:
    """Canonical encoding of 0/1 rows: little-endian integers, or packed bytes past 62 bits."""
    width = rows.shape[1]
    if width <= 62:
        return rows.astype(np.int64) @ (np.int64(1) << np.arange(width, dtype=np.int64))
    packed = np.packbits(rows, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view(f"V{packed.shape[1]}").ravel()


def sym_clique_count(U: SimpleGraph, t: int, k: int, rng: RandomStream, chunk: int = 200_000) -> int:
    """k-clique count of a graph promised to have |Aut(U)| >= n!/t.

    Collects the distinct relabelings seen among t*n^2 random permutations,
    counts those whose first k vertices form a clique and scales by
    C(n, k) / (number collected).  Copies are kept as sorted arrays of
    their packed bit encodings.
    """
    n = U.n
    if t < 1 or k < 0:
        raise UsageError("need t >= 1 and k >= 0")
    if k > n:
        return 0
    head = _subset_pairs(n, np.arange(k, dtype=np.int64)[None, :])[0]
    seen = _pack_rows(U.bits[None, :])
    hit = seen if U.bits[head].all() else seen[:0]
    draws = t * n * n
    while draws > 0:
        m = min(chunk, draws)
        images = U.bits[pair_map(rng.permutation_arrays(m, n))]
        codes = _pack_rows(images)
        seen = np.union1d(seen, codes)
        hit = np.union1d(hit, codes[images[:, head].all(axis=1)])
        draws -= m
    collected = len(seen)
    numer = len(hit) * math.comb(n, k)
    if numer % collected:
        raise InternalAssertionError(
            f"clique fraction {len(hit)}/{collected} times C({n},{k}) is not integral; "
            "the automorphism-size promise failed or the class was not fully collected")
    return numer // collected


# ---------------------------------------------------------------------------
# the twelve highly symmetric families
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FamilyTag:
    id: int
    name: str
    complemented: bool


DENSE_FAMILIES = {
    1: "complete",
    2: "complete minus an edge",
    3: "K_{n-1} plus an isolated vertex",
    4: "K_{n-1} plus a pendant vertex",
    5: "K_{n-2} plus two isolated vertices",
    6: "K_{n-2} plus a disjoint edge",
}


def family_tag(fid: int) -> FamilyTag:
    if not 1 <= fid <= 12:
        raise UsageError("family ids run from 1 to 12")
    base = fid if fid <= 6 else fid - 6
    name = DENSE_FAMILIES[base]
    return FamilyTag(fid, name if fid <= 6 else f"complement of {name}", fid > 6)


def family_graph(fid: int, n: int) -> SimpleGraph:
    """A labelled member of family fid on n vertices (big clique on the low labels)."""
    if n < 4:
        raise UsageError("family graphs need n >= 4")
    base = fid if fid <= 6 else fid - 6
    if base == 1:
        edges = _clique_edges(range(1, n + 1))
    elif base == 2:
        edges = [e for e in _clique_edges(range(1, n + 1)) if e != (n - 1, n)]
    elif base == 3:
        edges = _clique_edges(range(1, n))
    elif base == 4:
        edges = _clique_edges(range(1, n)) + [(1, n)]
    elif base == 5:
        edges = _clique_edges(range(1, n - 1))
    elif base == 6:
        edges = _clique_edges(range(1, n - 1)) + [(n - 1, n)]
    else:
        raise UsageError("family ids run from 1 to 12")
    U = SimpleGraph.from_edges(n, edges)
    return complement(U) if fid > 6 else U


def _clique_edges(vertices) -> list[tuple[int, int]]:
    return list(itertools.combinations(list(vertices), 2))


def family_clique_count(fid: int, n: int, k: int) -> int:
    """Closed-form k-clique count (k > 2) of family fid on n vertices."""
    if k <= 2:
        raise UsageError("closed forms are stated for k > 2")
    c = math.comb
    dense = {1: c(n, k), 2: c(n, k) - c(n - 2, k - 2), 3: c(n - 1, k), 4: c(n - 1, k),
             5: c(n - 2, k), 6: c(n - 2, k)}
    if fid <= 6:
        return dense[fid]
    # sparse side: only the two universal vertices of family 11 close triangles
    if fid == 11:
        return n - 2 if k == 3 else 0
    return 0


def _dense_family(U: SimpleGraph) -> int | None:
    """Which of the six dense templates U is, judged by degrees plus one adjacency check."""
    n = U.n
    deg = U.degrees()
    ds = sorted(deg.tolist())

    def multiset(*groups):
        out = []
        for d, count in groups:
            out += [d] * count
        return ds == sorted(out)

    if multiset((n - 1, n)):
        return 1
    if multiset((n - 2, 2), (n - 1, n - 2)):
        return 2
    if multiset((0, 1), (n - 2, n - 1)):
        return 3
    if multiset((1, 1), (n - 1, 1), (n - 2, n - 2)):
        return 4
    if multiset((0, 2), (n - 3, n - 2)):
        return 5
    if multiset((1, 2), (n - 3, n - 2)):
        if n - 3 == 1:
            return 6  # every degree is 1: a perfect matching on four vertices
        x, y = (int(v) + 1 for v in np.flatnonzero(deg == 1))
        if U.has_edge(x, y):
            return 6
    return None


def classify_highly_symmetric(U: SimpleGraph, k: int, min_n: int = 8) -> tuple[FamilyTag | None, int | None]:
    """Match U against the twelve families and return (tag, k-clique count) or (None, None).

    Both U and its complement are compared with the six dense templates, so
    the check is exact at every n >= 4.  The work is a degree computation,
    i.e. O(n^2) bit reads.
    """
    if k <= 2:
        raise UsageError("classification counts are defined for k > 2")
    if U.n < min_n:
        raise UsageError(f"classification applies for n >= {min_n}; got n = {U.n}")
    if U.n < 4:
        raise UsageError("classification needs n >= 4")
    fid = _dense_family(U)
    if fid is None:
        other = _dense_family(complement(U))
        if other is not None:
            fid = other + 6
    if fid is None:
        return None, None
    return family_tag(fid), family_clique_count(fid, U.n, k)
