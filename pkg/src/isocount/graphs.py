"""Graph encodings, the relabeling action of S_n, and automorphism machinery.

Conventions used everywhere in the package:

* Vertices are 1-based in the public API and in files, 0-based in arrays.
* Undirected pairs (i, j), i < j, are ordered lexicographically:
  (1,2), (1,3), ..., (1,n), (2,3), ..., (n-1,n).
* A directed entry (i, j) lives at row-major position (i-1)*n + (j-1);
  the diagonal is included.
* permute(pi, G) has entry (i, j) equal to G's entry (pi(i), pi(j)).
* compose(pi, sigma) applies pi first, then sigma.  With the action above
  this gives permute(compose(pi, sigma), G) == permute(pi, permute(sigma, G)).
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from .algebra import FieldElement, PrimeModulus, RandomStream, as_modulus
from .errors import CapabilityError, UsageError

ACCEPT = "ACCEPT"
REJECT = "REJECT"

MAX_AUT_N = 10
MAX_CLASS_N = 8
MAX_PARTITION_N = 7


# ---------------------------------------------------------------------------
# pair bookkeeping
# ---------------------------------------------------------------------------

def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


@lru_cache(maxsize=None)
def pair_arrays(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Zero-based endpoint arrays (I, J) of the canonical pair order."""
    I, J = np.triu_indices(n, k=1)
    I = I.astype(np.int64)
    J = J.astype(np.int64)
    I.setflags(write=False)
    J.setflags(write=False)
    return I, J


@lru_cache(maxsize=None)
def pair_index_matrix(n: int) -> np.ndarray:
    """Symmetric n x n table of canonical pair positions, -1 on the diagonal."""
    idx = -np.ones((n, n), dtype=np.int64)
    I, J = pair_arrays(n)
    pos = np.arange(len(I))
    idx[I, J] = pos
    idx[J, I] = pos
    idx.setflags(write=False)
    return idx


def pair_index(i: int, j: int, n: int) -> int:
    """Canonical position of the 1-based pair {i, j}."""
    if i == j or not (1 <= i <= n and 1 <= j <= n):
        raise UsageError(f"invalid pair ({i}, {j}) for n={n}")
    if i > j:
        i, j = j, i
    return (i - 1) * n - (i - 1) * i // 2 + (j - i - 1)


def directed_index(i: int, j: int, n: int) -> int:
    if not (1 <= i <= n and 1 <= j <= n):
        raise UsageError(f"invalid entry ({i}, {j}) for n={n}")
    return (i - 1) * n + (j - 1)


def pair_map(perm0: np.ndarray) -> np.ndarray:
    """For zero-based permutation rows, the source pair position of each output pair.

    Works on a single permutation (shape (n,)) or a batch (shape (m, n)).
    """
    n = perm0.shape[-1]
    I, J = pair_arrays(n)
    return pair_index_matrix(n)[perm0[..., I], perm0[..., J]]


# ---------------------------------------------------------------------------
# permutations
# ---------------------------------------------------------------------------

class Permutation:
    """A bijection of {1..n}, stored as the tuple (pi(1), ..., pi(n))."""

    __slots__ = ("mapping", "array")

    def __init__(self, mapping: Sequence[int]):
        mapping = tuple(int(x) for x in mapping)
        n = len(mapping)
        if sorted(mapping) != list(range(1, n + 1)):
            raise UsageError(f"not a permutation of 1..{n}: {mapping}")
        self.mapping = mapping
        arr = np.asarray(mapping, dtype=np.int64) - 1
        arr.setflags(write=False)
        self.array = arr

    @classmethod
    def from_array(cls, arr0: Iterable[int]) -> "Permutation":
        return cls([int(x) + 1 for x in arr0])

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(range(1, n + 1))

    @classmethod
    def from_cycles(cls, n: int, cycles: Iterable[Sequence[int]]) -> "Permutation":
        m = list(range(1, n + 1))
        seen = set()
        for cyc in cycles:
            for a, b in zip(cyc, list(cyc[1:]) + [cyc[0]]):
                if a in seen:
                    raise UsageError("cycles are not disjoint")
                seen.add(a)
                m[a - 1] = b
        return cls(m)

    @property
    def n(self) -> int:
        return len(self.mapping)

    def __call__(self, i: int) -> int:
        return self.mapping[i - 1]

    def __eq__(self, other) -> bool:
        return isinstance(other, Permutation) and self.mapping == other.mapping

    def __hash__(self) -> int:
        return hash(self.mapping)

    def __repr__(self) -> str:
        return f"Permutation({list(self.mapping)})"

    def cycles(self) -> list[tuple[int, ...]]:
        seen = [False] * self.n
        out = []
        for start in range(1, self.n + 1):
            if seen[start - 1]:
                continue
            cyc = []
            x = start
            while not seen[x - 1]:
                seen[x - 1] = True
                cyc.append(x)
                x = self(x)
            out.append(tuple(cyc))
        return out


def compose(pi: Permutation, sigma: Permutation) -> Permutation:
    """The permutation x -> sigma(pi(x)): apply pi first, then sigma."""
    if pi.n != sigma.n:
        raise UsageError("composing permutations of different sizes")
    return Permutation.from_array(sigma.array[pi.array])


def invert(pi: Permutation) -> Permutation:
    inv = np.empty(pi.n, dtype=np.int64)
    inv[pi.array] = np.arange(pi.n)
    return Permutation.from_array(inv)


@dataclass(frozen=True)
class CycleType:
    parts: tuple[int, ...]

    def __post_init__(self) -> None:
        parts = tuple(sorted((int(x) for x in self.parts), reverse=True))
        if any(x <= 0 for x in parts):
            raise UsageError("cycle lengths must be positive")
        object.__setattr__(self, "parts", parts)

    @property
    def n(self) -> int:
        return sum(self.parts)

    def class_size(self) -> int:
        """Number of permutations of this type: n! / prod(k^m_k * m_k!)."""
        denom = 1
        for k in set(self.parts):
            m = self.parts.count(k)
            denom *= k ** m * math.factorial(m)
        return math.factorial(self.n) // denom

    def representative(self) -> Permutation:
        cycles, start = [], 1
        for k in self.parts:
            cycles.append(list(range(start, start + k)))
            start += k
        return Permutation.from_cycles(self.n, cycles)


def cycle_type(pi: Permutation) -> CycleType:
    return CycleType(tuple(len(c) for c in pi.cycles()))


def random_permutation(n: int, rng: RandomStream) -> Permutation:
    if n < 1:
        raise UsageError("n must be positive")
    return Permutation.from_array(rng.permutation_array(n))


@lru_cache(maxsize=4)
def all_permutations(n: int) -> np.ndarray:
    """Every element of S_n as zero-based rows, in lexicographic order."""
    if n > MAX_AUT_N:
        raise CapabilityError(f"enumerating S_{n} is beyond the n <= {MAX_AUT_N} bound")
    dtype = np.int8
    arr = np.array(list(itertools.permutations(range(n))), dtype=dtype).reshape(-1, n)
    arr.setflags(write=False)
    return arr


@lru_cache(maxsize=4)
def cycle_type_codes(n: int) -> tuple[list[tuple[int, ...]], np.ndarray]:
    """For S_n in all_permutations order: the list of types and each row's type code."""
    perms = all_permutations(n)
    types: dict[tuple[int, ...], int] = {}
    codes = np.empty(len(perms), dtype=np.int32)
    for r, row in enumerate(perms.tolist()):
        seen = [False] * n
        lens = []
        for s in range(n):
            if not seen[s]:
                k, x = 0, s
                while not seen[x]:
                    seen[x] = True
                    x = row[x]
                    k += 1
                lens.append(k)
        key = tuple(sorted(lens, reverse=True))
        codes[r] = types.setdefault(key, len(types))
    ordered = sorted(types, key=types.get)
    return ordered, codes


# ---------------------------------------------------------------------------
# graph encodings
# ---------------------------------------------------------------------------

def _frozen(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class SimpleGraph:
    """Simple undirected graph as a 0/1 vector over the canonical pair order."""

    kind = "simple"
    __slots__ = ("n", "bits", "_hash")

    def __init__(self, n: int, bits: Iterable[int]):
        arr = np.asarray(list(bits) if not isinstance(bits, np.ndarray) else bits)
        if arr.ndim != 1 or arr.size != num_pairs(n):
            raise UsageError(f"expected {num_pairs(n)} bits for n={n}, got shape {arr.shape}")
        if arr.size and (arr.min() < 0 or arr.max() > 1):
            raise UsageError("bits must be 0 or 1")
        self.n = int(n)
        self.bits = _frozen(arr.astype(np.uint8))
        self._hash = None

    # constructors --------------------------------------------------------
    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> "SimpleGraph":
        bits = np.zeros(num_pairs(n), dtype=np.uint8)
        for e in edges:
            bits[pair_index(int(e[0]), int(e[1]), n)] = 1
        return cls(n, bits)

    @classmethod
    def from_adjacency(cls, adj) -> "SimpleGraph":
        adj = np.asarray(adj)
        n = adj.shape[0]
        I, J = pair_arrays(n)
        return cls(n, (adj[I, J] != 0).astype(np.uint8))

    @classmethod
    def from_index(cls, n: int, index: int) -> "SimpleGraph":
        m = num_pairs(n)
        if not 0 <= index < 1 << m:
            raise UsageError("graph index out of range")
        raw = np.frombuffer(int(index).to_bytes((m + 7) // 8 or 1, "little"), dtype=np.uint8)
        return cls(n, np.unpackbits(raw, bitorder="little")[:m])

    # views ---------------------------------------------------------------
    def adjacency(self) -> np.ndarray:
        A = np.zeros((self.n, self.n), dtype=np.uint8)
        I, J = pair_arrays(self.n)
        A[I, J] = self.bits
        A[J, I] = self.bits
        return A

    def edges(self) -> list[tuple[int, int]]:
        I, J = pair_arrays(self.n)
        on = np.flatnonzero(self.bits)
        return [(int(I[k]) + 1, int(J[k]) + 1) for k in on]

    def degrees(self) -> np.ndarray:
        return self.adjacency().sum(axis=1).astype(np.int64)

    @property
    def num_edges(self) -> int:
        return int(self.bits.sum())

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.bits[pair_index(i, j, self.n)])

    def index(self) -> int:
        """Integer whose bit k is the k-th canonical pair."""
        packed = np.packbits(self.bits, bitorder="little")
        return int.from_bytes(packed.tobytes(), "little")

    def key(self) -> bytes:
        return self.bits.tobytes()

    def __eq__(self, other) -> bool:
        return isinstance(other, SimpleGraph) and self.n == other.n and np.array_equal(self.bits, other.bits)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, self.bits.tobytes()))
        return self._hash

    def __repr__(self) -> str:
        return f"SimpleGraph(n={self.n}, edges={self.edges()})"


class Digraph:
    """Simple directed graph (no loops) as an n x n 0/1 matrix."""

    kind = "digraph"
    __slots__ = ("n", "matrix")

    def __init__(self, n: int, matrix):
        M = np.asarray(matrix, dtype=np.uint8).reshape(n, n).copy()
        if M.size and M.max() > 1:
            raise UsageError("digraph entries must be 0 or 1")
        if np.any(np.diag(M)):
            raise UsageError("digraphs have no self-loops")
        self.n = int(n)
        self.matrix = _frozen(M)

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Sequence[int]]) -> "Digraph":
        M = np.zeros((n, n), dtype=np.uint8)
        for a, b in arcs:
            M[a - 1, b - 1] = 1
        return cls(n, M)

    @classmethod
    def from_simple(cls, U: SimpleGraph) -> "Digraph":
        return cls(U.n, U.adjacency())

    def arcs(self) -> list[tuple[int, int]]:
        return [(int(a) + 1, int(b) + 1) for a, b in zip(*np.nonzero(self.matrix))]

    def __eq__(self, other) -> bool:
        return isinstance(other, Digraph) and np.array_equal(self.matrix, other.matrix)

    def __hash__(self) -> int:
        return hash(self.matrix.tobytes())


class _Multigraph:
    kind = ""
    __slots__ = ("n", "modulus", "entries", "_hash")

    def __init__(self, n: int, p: "int | PrimeModulus", entries):
        self.modulus = as_modulus(p)
        arr = np.asarray(entries)
        if arr.dtype == object:
            arr = np.array([int(x) for x in arr.ravel()], dtype=np.int64)
        arr = arr.astype(np.int64).ravel()
        if arr.size != self._length(n):
            raise UsageError(f"expected {self._length(n)} entries for n={n}, got {arr.size}")
        if arr.size and (arr.min() < 0 or arr.max() >= self.modulus.p):
            raise UsageError(f"entries must lie in [0, {self.modulus.p})")
        self.n = int(n)
        self.entries = _frozen(arr)
        self._hash = None

    @staticmethod
    def _length(n: int) -> int:
        raise NotImplementedError

    @property
    def p(self) -> int:
        return self.modulus.p

    def element(self, k: int) -> FieldElement:
        return FieldElement(int(self.entries[k]), self.modulus)

    def __eq__(self, other) -> bool:
        return (type(other) is type(self) and self.n == other.n and self.p == other.p
                and np.array_equal(self.entries, other.entries))

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.kind, self.n, self.p, self.entries.tobytes()))
        return self._hash


class DirectedMultigraph(_Multigraph):
    """E_{n,p}: n^2 residues in row-major order, diagonal included."""

    kind = "directed-multi"
    __slots__ = ()

    @staticmethod
    def _length(n: int) -> int:
        return n * n

    @classmethod
    def from_matrix(cls, p, M) -> "DirectedMultigraph":
        M = np.asarray(M)
        return cls(M.shape[0], p, M.ravel())

    @classmethod
    def random(cls, n: int, p, rng: RandomStream) -> "DirectedMultigraph":
        p = as_modulus(p)
        return cls(n, p, rng.field_values(p.p, n * n))

    def matrix(self) -> np.ndarray:
        return self.entries.reshape(self.n, self.n)

    def entry(self, i: int, j: int) -> FieldElement:
        return self.element(directed_index(i, j, self.n))

    def __repr__(self) -> str:
        return f"DirectedMultigraph(n={self.n}, p={self.p})"


class UndirectedMultigraph(_Multigraph):
    """F_{n,p}: C(n,2) residues in the canonical pair order."""

    kind = "undirected-multi"
    __slots__ = ()

    @staticmethod
    def _length(n: int) -> int:
        return num_pairs(n)

    @classmethod
    def from_matrix(cls, p, M) -> "UndirectedMultigraph":
        M = np.asarray(M)
        n = M.shape[0]
        I, J = pair_arrays(n)
        return cls(n, p, M[I, J])

    @classmethod
    def from_simple(cls, U: SimpleGraph, p) -> "UndirectedMultigraph":
        return cls(U.n, p, U.bits.astype(np.int64))

    @classmethod
    def random(cls, n: int, p, rng: RandomStream) -> "UndirectedMultigraph":
        p = as_modulus(p)
        return cls(n, p, rng.field_values(p.p, num_pairs(n)))

    def matrix(self) -> np.ndarray:
        M = np.zeros((self.n, self.n), dtype=np.int64)
        I, J = pair_arrays(self.n)
        M[I, J] = self.entries
        M[J, I] = self.entries
        return M

    def entry(self, i: int, j: int) -> FieldElement:
        return self.element(pair_index(i, j, self.n))

    def __repr__(self) -> str:
        return f"UndirectedMultigraph(n={self.n}, p={self.p})"


AnyGraph = "SimpleGraph | DirectedMultigraph | UndirectedMultigraph | Digraph"


def permute(pi: Permutation, G):
    """Relabel G: the output's entry (i, j) is G's entry (pi(i), pi(j))."""
    if pi.n != G.n:
        raise UsageError(f"permutation on {pi.n} points applied to a graph on {G.n} vertices")
    a = pi.array
    if isinstance(G, SimpleGraph):
        return SimpleGraph(G.n, G.bits[pair_map(a)])
    if isinstance(G, UndirectedMultigraph):
        return UndirectedMultigraph(G.n, G.modulus, G.entries[pair_map(a)])
    if isinstance(G, DirectedMultigraph):
        return DirectedMultigraph(G.n, G.modulus, G.matrix()[np.ix_(a, a)].ravel())
    if isinstance(G, Digraph):
        return Digraph(G.n, G.matrix[np.ix_(a, a)])
    raise UsageError(f"cannot permute {type(G).__name__}")


def complement(U: SimpleGraph) -> SimpleGraph:
    return SimpleGraph(U.n, 1 - U.bits)


# ---------------------------------------------------------------------------
# named graphs
# ---------------------------------------------------------------------------

def complete_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, np.ones(num_pairs(n), dtype=np.uint8))


def empty_graph(n: int) -> SimpleGraph:
    return SimpleGraph(n, np.zeros(num_pairs(n), dtype=np.uint8))


def cycle_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(n, [(i, i % n + 1) for i in range(1, n + 1)])


def path_graph(n: int) -> SimpleGraph:
    return SimpleGraph.from_edges(n, [(i, i + 1) for i in range(1, n)])


def random_graph(n: int, rng: RandomStream) -> SimpleGraph:
    return SimpleGraph(n, rng.bits(num_pairs(n)))


# ---------------------------------------------------------------------------
# automorphisms and orbits
# ---------------------------------------------------------------------------

def _check_aut_size(n: int) -> None:
    if n > MAX_AUT_N:
        raise CapabilityError(f"automorphism computations are limited to n <= {MAX_AUT_N}")


def automorphism_order(U: SimpleGraph) -> int:
    """|Aut(U)|, by exhaustive search over S_n organised as a stabilizer chain.

    Fix vertices 0, 1, ... in turn.  At each level the orbit of the next
    vertex under the pointwise stabilizer of the earlier ones is found by
    trying every target and searching for one automorphism realising it.
    The product of the orbit sizes is |Aut(U)|.  Partial maps that already
    break adjacency are pruned, so the search never misses an automorphism.
    """
    n = U.n
    _check_aut_size(n)
    if n <= 1:
        return 1
    A = U.adjacency().astype(bool)
    adj = [list(map(bool, row)) for row in A]
    deg = A.sum(axis=1)
    nbr_deg = [tuple(sorted(deg[A[v]].tolist())) for v in range(n)]
    inv = [(int(deg[v]), nbr_deg[v]) for v in range(n)]

    def consistent(mapping: dict[int, int], x: int, y: int) -> bool:
        row_x, row_y = adj[x], adj[y]
        for a, b in mapping.items():
            if row_x[a] != row_y[b]:
                return False
        return True

    def extend(mapping: dict[int, int], used: set[int], order: list[int], pos: int) -> bool:
        if pos == len(order):
            return True
        x = order[pos]
        for y in range(n):
            if y in used or inv[y] != inv[x] or not consistent(mapping, x, y):
                continue
            mapping[x] = y
            used.add(y)
            if extend(mapping, used, order, pos + 1):
                return True
            del mapping[x]
            used.discard(y)
        return False

    total = 1
    for level in range(n - 1):
        fixed = list(range(level))
        rest = list(range(level + 1, n))
        orbit = 1
        for w in range(level + 1, n):
            if inv[w] != inv[level]:
                continue
            mapping = {f: f for f in fixed}
            if not consistent(mapping, level, w):
                continue
            mapping[level] = w
            if extend(mapping, set(fixed) | {w}, rest, 0):
                orbit += 1
        total *= orbit
    return total


def automorphism_order_enumerated(U: SimpleGraph, chunk: int = 200_000) -> int:
    """|Aut(U)| by testing every element of S_n (plain vectorised enumeration)."""
    _check_aut_size(U.n)
    if U.n <= 1:
        return 1
    perms = all_permutations(U.n).astype(np.int64)
    count = 0
    for s in range(0, len(perms), chunk):
        images = U.bits[pair_map(perms[s:s + chunk])]
        count += int(np.all(images == U.bits, axis=1).sum())
    return count


def _orbit_rows(bits: np.ndarray, n: int) -> np.ndarray:
    perms = all_permutations(n).astype(np.int64)
    return np.unique(bits[pair_map(perms)], axis=0)


def isomorphism_class(U: SimpleGraph, limit: int | None = None) -> set[SimpleGraph]:
    """All distinct relabelings of U.

    Up to n = 8 every permutation is applied.  Beyond that a caller-supplied
    size limit is required and the orbit is grown by adjacent transpositions.
    """
    n = U.n
    if n <= 1:
        return {U}
    if n <= MAX_CLASS_N:
        return {SimpleGraph(n, row) for row in _orbit_rows(U.bits, n)}
    if limit is None:
        raise CapabilityError(f"isomorphism classes beyond n={MAX_CLASS_N} need an explicit size limit")
    gens = []
    for i in range(n - 1):
        a = np.arange(n)
        a[i], a[i + 1] = a[i + 1], a[i]
        gens.append(pair_map(a))
    seen = {U.bits.tobytes()}
    frontier = [U.bits]
    while frontier:
        nxt = []
        for b in frontier:
            for g in gens:
                img = b[g]
                key = img.tobytes()
                if key not in seen:
                    seen.add(key)
                    if len(seen) > limit:
                        raise CapabilityError(f"isomorphism class exceeds the limit {limit}")
                    nxt.append(img)
        frontier = nxt
    return {SimpleGraph(n, np.frombuffer(k, dtype=np.uint8)) for k in seen}


@lru_cache(maxsize=2)
def class_partition(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Isomorphism-class label of every graph index on n vertices, plus class sizes.

    Classes are numbered by their smallest index.  Limited to n <= 7.
    """
    if n > MAX_PARTITION_N:
        raise CapabilityError(f"full class partitions are limited to n <= {MAX_PARTITION_N}")
    m = num_pairs(n)
    N = 1 << m
    labels = np.full(N, -1, dtype=np.int32)
    if n <= 1:
        labels[:] = 0
        return labels, np.array([N], dtype=np.int64)
    maps = pair_map(all_permutations(n).astype(np.int64))
    weights = (np.int64(1) << np.arange(m, dtype=np.int64))
    sizes = []
    ptr = 0
    lab = labels  # local alias for the scan loop
    while True:
        while ptr < N and lab[ptr] != -1:
            ptr += 1
        if ptr == N:
            break
        bits = (ptr >> np.arange(m)) & 1
        images = np.unique(bits[maps] @ weights)
        lab[images] = len(sizes)
        sizes.append(len(images))
    labels.setflags(write=False)
    return labels, np.array(sizes, dtype=np.int64)


def aut_fixed_count(U: SimpleGraph, draws: int, rng: RandomStream, chunk: int = 100_000) -> int:
    """Number of `draws` uniform permutations pi with permute(pi, U) == U."""
    count = 0
    left = draws
    while left > 0:
        m = min(chunk, left)
        perms = rng.permutation_arrays(m, U.n)
        images = U.bits[pair_map(perms)]
        count += int(np.all(images == U.bits, axis=1).sum())
        left -= m
    return count


def aut_size_test(U: SimpleGraph, t: int, rng: RandomStream) -> str:
    """ACCEPT iff at least n/2 of t*n random relabelings fix U."""
    if t < 1:
        raise UsageError("t must be at least 1")
    c = aut_fixed_count(U, t * U.n, rng)
    return ACCEPT if c >= U.n / 2 else REJECT


def empirical_rigidity(n: int, samples: int, rng: RandomStream) -> float:
    """Fraction of uniformly random n-vertex graphs with trivial automorphism group."""
    _check_aut_size(n)
    if samples < 1:
        raise UsageError("samples must be positive")
    rigid = 0
    for _ in range(samples):
        if automorphism_order(random_graph(n, rng)) == 1:
            rigid += 1
    return rigid / samples


# ---------------------------------------------------------------------------
# graph files
# ---------------------------------------------------------------------------

def graph_to_json(G) -> dict:
    if isinstance(G, SimpleGraph):
        return {"kind": "simple", "n": G.n, "edges": [list(e) for e in G.edges()]}
    if isinstance(G, Digraph):
        return {"kind": "digraph", "n": G.n, "edges": [list(a) for a in G.arcs()]}
    if isinstance(G, UndirectedMultigraph):
        I, J = pair_arrays(G.n)
        edges = [[int(I[k]) + 1, int(J[k]) + 1, int(G.entries[k])] for k in np.flatnonzero(G.entries)]
        return {"kind": "undirected-multi", "n": G.n, "p": G.p, "edges": edges}
    if isinstance(G, DirectedMultigraph):
        M = G.matrix()
        edges = [[int(i) + 1, int(j) + 1, int(M[i, j])] for i, j in zip(*np.nonzero(M))]
        return {"kind": "directed-multi", "n": G.n, "p": G.p, "edges": edges}
    raise UsageError(f"cannot serialise {type(G).__name__}")


def graph_from_json(doc: dict):
    try:
        kind = doc["kind"]
        n = int(doc["n"])
        edges = doc.get("edges", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"malformed graph document: {exc}") from None
    if n < 1:
        raise UsageError("n must be positive")
    if kind == "simple":
        for e in edges:
            if len(e) != 2:
                raise UsageError("simple graph edges are [i, j]")
        return SimpleGraph.from_edges(n, edges)
    if kind == "digraph":
        for e in edges:
            if len(e) != 2:
                raise UsageError("digraph arcs are [i, j]")
        return Digraph.from_arcs(n, edges)
    if kind not in ("directed-multi", "undirected-multi"):
        raise UsageError(f"unknown graph kind {kind!r}")
    if "p" not in doc:
        raise UsageError("multigraph documents need p")
    p = as_modulus(int(doc["p"]))
    for e in edges:
        if len(e) != 3:
            raise UsageError("multigraph edges are [i, j, w]")
    if kind == "directed-multi":
        M = np.zeros((n, n), dtype=np.int64)
        for i, j, w in edges:
            directed_index(i, j, n)
            M[i - 1, j - 1] = int(w) % p.p
        return DirectedMultigraph.from_matrix(p, M)
    vals = np.zeros(num_pairs(n), dtype=np.int64)
    for i, j, w in edges:
        vals[pair_index(i, j, n)] = int(w) % p.p
    return UndirectedMultigraph(n, p, vals)


def load_graph(path: str):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise UsageError(f"{path}: not valid JSON ({exc})") from None
    return graph_from_json(doc)


def save_graph(G, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_json(G), fh)
        fh.write("\n")
