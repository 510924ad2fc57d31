import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isocount.algebra import PrimeModulus, RandomStream
from isocount.counters import hcy_bruteforce
from isocount.errors import CapabilityError, UsageError
from isocount.graphs import (ACCEPT, REJECT, CycleType, Digraph, DirectedMultigraph, Permutation, SimpleGraph,
                             UndirectedMultigraph, aut_size_test, automorphism_order,
                             automorphism_order_enumerated, class_partition, complement, complete_graph, compose,
                             cycle_graph, cycle_type, directed_index, empirical_rigidity, empty_graph,
                             graph_from_json, invert, isomorphism_class, load_graph, pair_index,
                             path_graph, permute, random_graph, random_permutation, save_graph)

from conftest import brute_aut_order

perms5 = st.permutations(range(1, 6)).map(Permutation)


def test_pair_and_directed_indexing():
    assert [pair_index(1, j, 4) for j in (2, 3, 4)] == [0, 1, 2]
    assert pair_index(2, 3, 4) == 3 and pair_index(3, 4, 4) == 5
    assert pair_index(3, 1, 4) == pair_index(1, 3, 4)
    assert directed_index(2, 1, 3) == 3
    with pytest.raises(UsageError):
        pair_index(2, 2, 4)


def test_permutation_validation():
    with pytest.raises(UsageError):
        Permutation([1, 1, 2])
    with pytest.raises(UsageError):
        Permutation.from_cycles(4, [(1, 2), (2, 3)])


@given(perms5, perms5)
def test_composition_acts_as_successive_relabelings(pi, sigma):
    U = cycle_graph(5)
    U = SimpleGraph.from_edges(5, U.edges() + [(1, 3)])
    assert permute(compose(pi, sigma), U) == permute(pi, permute(sigma, U))
    assert compose(pi, invert(pi)) == Permutation.identity(5)


def test_cycle_type_examples():
    assert cycle_type(Permutation.identity(4)).parts == (1, 1, 1, 1)
    assert cycle_type(Permutation.from_cycles(5, [(1, 2, 3), (4, 5)])).parts == (3, 2)
    assert CycleType((2, 2)).class_size() == 3
    assert sum(CycleType(p).class_size() for p in [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]) == 24


def test_cycle_type_conjugation_invariant():
    r = RandomStream(3)
    for _ in range(1000):
        pi, s = random_permutation(6, r), random_permutation(6, r)
        assert cycle_type(compose(compose(invert(s), pi), s)) == cycle_type(pi)


def test_random_permutation_uniform():
    r = RandomStream(4)
    assert random_permutation(1, r) == Permutation.identity(1)
    counts = {}
    for _ in range(60_000):
        p = random_permutation(3, r).mapping
        counts[p] = counts.get(p, 0) + 1
    assert len(counts) == 6
    assert all(abs(c / 60_000 - 1 / 6) < 0.01 for c in counts.values())
    assert random_permutation(7, RandomStream(9)) == random_permutation(7, RandomStream(9))


def test_permute_directed_example():
    p = PrimeModulus(7)
    M = np.zeros((3, 3), dtype=np.int64)
    M[0, 1] = 5
    out = permute(Permutation([2, 1, 3]), DirectedMultigraph.from_matrix(p, M)).matrix()
    expected = np.zeros((3, 3), dtype=np.int64)
    expected[1, 0] = 5
    assert np.array_equal(out, expected)


def test_permute_identity_and_hcy_invariance():
    r = RandomStream(5)
    p = PrimeModulus(101)
    U = random_graph(6, r)
    assert permute(Permutation.identity(6), U) == U
    for _ in range(100):
        E = DirectedMultigraph.random(5, p, r)
        assert hcy_bruteforce(permute(random_permutation(5, r), E)) == hcy_bruteforce(E)


def test_undirected_permute_matches_matrix_relabeling():
    r = RandomStream(6)
    F = UndirectedMultigraph.random(6, 101, r)
    pi = random_permutation(6, r)
    M = F.matrix()
    assert np.array_equal(permute(pi, F).matrix(), M[np.ix_(pi.array, pi.array)])


def test_complement_examples():
    U = random_graph(7, RandomStream(7))
    assert complement(complement(U)) == U
    assert complement(complete_graph(4)) == empty_graph(4)


def test_automorphism_examples():
    assert automorphism_order(complete_graph(4)) == 24
    assert automorphism_order(path_graph(3)) == 2
    assert automorphism_order(cycle_graph(5)) == 10
    assert automorphism_order(complete_graph(10)) == math.factorial(10)
    with pytest.raises(CapabilityError):
        automorphism_order(complete_graph(11))


def test_automorphisms_match_brute_force_all_n5():
    for idx in range(1 << 10):
        U = SimpleGraph.from_index(5, idx)
        assert automorphism_order(U) == brute_aut_order(U)


def test_automorphisms_match_enumeration_random_n7():
    r = RandomStream(8)
    for _ in range(40):
        U = random_graph(7, r)
        assert automorphism_order(U) == automorphism_order_enumerated(U)


def test_orbit_stabilizer_and_complement_exhaustive_n5():
    for idx in range(1 << 10):
        U = SimpleGraph.from_index(5, idx)
        a = automorphism_order(U)
        assert a * len(isomorphism_class(U)) == 120
        assert a == automorphism_order(complement(U))


def test_isomorphism_class_examples():
    assert len(isomorphism_class(complete_graph(5))) == 1
    assert len(isomorphism_class(SimpleGraph.from_edges(4, [(1, 2)]))) == 6


def test_class_partition_counts():
    # numbers of unlabeled graphs on n vertices
    for n, classes in [(1, 1), (2, 2), (3, 4), (4, 11), (5, 34), (6, 156)]:
        labels, sizes = class_partition(n)
        assert len(sizes) == classes
        assert sizes.sum() == 2 ** (n * (n - 1) // 2)
        assert np.array_equal(np.bincount(labels), sizes)


def test_index_roundtrip():
    for idx in (0, 1, 37, 1023):
        assert SimpleGraph.from_index(5, idx).index() == idx
    assert SimpleGraph.from_edges(3, [(1, 2)]).index() == 1


def test_aut_size_examples():
    r = RandomStream(10)
    accept = sum(aut_size_test(complete_graph(8), 4, r.child()) == ACCEPT for _ in range(1000))
    assert accept >= 990
    rigid = next(U for U in (random_graph(8, r) for _ in range(100)) if automorphism_order(U) == 1)
    reject = sum(aut_size_test(rigid, 4, r.child()) == REJECT for _ in range(1000))
    assert reject >= 990
    with pytest.raises(UsageError):
        aut_size_test(rigid, 0, r)


def test_rigidity_small_cases():
    assert empirical_rigidity(3, 200, RandomStream(1)) == 0
    assert empirical_rigidity(1, 10, RandomStream(1)) == 1


@pytest.mark.parametrize("n, rigid_classes", [(5, 0), (6, 8), (7, 152)])
def test_rigid_class_counts(n, rigid_classes):
    # known counts of unlabeled asymmetric graphs
    _, sizes = class_partition(n)
    assert int(np.sum(sizes == math.factorial(n))) == rigid_classes


def test_graph_files_roundtrip(tmp_path):
    r = RandomStream(11)
    items = [random_graph(6, r), Digraph.from_arcs(4, [(1, 2), (2, 3), (4, 1)]),
             DirectedMultigraph.random(4, 101, r), UndirectedMultigraph.random(5, 101, r)]
    for i, G in enumerate(items):
        path = tmp_path / f"g{i}.json"
        save_graph(G, str(path))
        assert load_graph(str(path)) == G


@pytest.mark.parametrize("doc", [{"n": 3}, {"kind": "simple", "n": 3, "edges": [[1, 1]]},
                                 {"kind": "simple", "n": 3, "edges": [[1, 4]]},
                                 {"kind": "directed-multi", "n": 2, "edges": []},
                                 {"kind": "blob", "n": 2}])
def test_graph_files_malformed(doc):
    with pytest.raises(UsageError):
        graph_from_json(doc)


def test_multigraph_validation():
    with pytest.raises(UsageError):
        UndirectedMultigraph(3, 7, [1, 2])
    with pytest.raises(UsageError):
        DirectedMultigraph(2, 7, [1, 2, 3, 9])
    with pytest.raises(UsageError):
        Digraph(2, [[1, 0], [0, 0]])
