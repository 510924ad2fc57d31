import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from isocount.algebra import (FieldElement, PrimeModulus, RandomStream, field_arithmetic, is_prime, mul_mod,
                              next_prime_at_least, prod_mod, repetitions_for_error, sample_field_element, sum_mod)
from isocount.errors import DomainError, UsageError

from conftest import trial_division_prime

P7 = PrimeModulus(7)


def test_field_examples():
    assert field_arithmetic(PrimeModulus(5).element(3), PrimeModulus(5).element(4), "add") == 2
    assert field_arithmetic(P7.element(2), None, "inv") == 4
    assert field_arithmetic(P7.element(3), 5, "pow") == 5


def test_inverse_of_zero_is_a_domain_error():
    with pytest.raises(DomainError):
        P7.element(0).inverse()


def test_mixed_moduli_rejected():
    with pytest.raises(UsageError):
        P7.element(1) + PrimeModulus(11).element(1)
    with pytest.raises(UsageError):
        field_arithmetic(P7.element(1), PrimeModulus(11).element(1), "mul")


def test_unreduced_value_rejected():
    with pytest.raises(UsageError):
        FieldElement(7, P7)


@pytest.mark.parametrize("bad", [1, 4, 9, 1 << 62, -3])
def test_bad_moduli(bad):
    with pytest.raises(UsageError):
        PrimeModulus(bad)


def test_two_is_a_valid_modulus():
    assert PrimeModulus(2).element(3) == 1


def test_next_prime_examples():
    assert next_prime_at_least(7).p == 7
    assert next_prime_at_least(14).p == 17
    q = next_prime_at_least(1 << 20).p
    assert q == 1048583
    assert trial_division_prime(q)
    assert not any(trial_division_prime(x) for x in range(1 << 20, q))


def test_primality_matches_trial_division_below_20000():
    assert all(is_prime(n) == trial_division_prime(n) for n in range(20000))


@pytest.mark.parametrize("n", [2 ** 31 - 1, 2 ** 61 - 1, 3215031751, 3825123056546413051])
def test_primality_large(n):
    # 3215031751 and 3825123056546413051 are strong pseudoprimes to small bases
    assert is_prime(n) == (n in (2 ** 31 - 1, 2 ** 61 - 1))


@given(st.integers(0, 10 ** 6), st.integers(0, 10 ** 6), st.sampled_from([2, 3, 101, 2 ** 31 - 1, 2 ** 61 - 1]))
def test_field_ring_laws(a, b, p):
    m = PrimeModulus(p)
    x, y = m.element(a), m.element(b)
    assert (x + y).value == (a + b) % p
    assert (x * y).value == a * b % p
    assert (x - y) + y == x
    if x:
        assert x * x.inverse() == 1


@given(st.lists(st.integers(0, 2 ** 61 - 2), min_size=1, max_size=12))
def test_vector_helpers_exact_for_large_p(vals):
    p = 2 ** 61 - 1
    arr = np.array(vals, dtype=np.int64)
    assert int(prod_mod(arr, p)) == math.prod(vals) % p
    assert sum_mod(arr, p) == sum(vals) % p
    assert list(mul_mod(arr, arr[::-1], p)) == [a * b % p for a, b in zip(vals, vals[::-1])]


def test_stream_reproducible_and_independent():
    a = RandomStream(5, 3).field_values(101, 50)
    b = RandomStream(5, 3).field_values(101, 50)
    c = RandomStream(5, 4).field_values(101, 50)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    s = RandomStream(5)
    assert not np.array_equal(s.child(0).bits(64), s.child(1).bits(64))
    assert np.array_equal(RandomStream(5, 0, (2,)).bits(64), s.child(2).bits(64))


def test_field_values_frozen_sequence():
    # pins the sampling procedure: changing it changes every replayed trial
    assert RandomStream(0).field_values(101, 8).tolist() == [0, 40, 97, 92, 26, 16, 54, 89]


def test_p2_uniform_mean():
    v = RandomStream(1).field_values(2, 100_000)
    assert set(np.unique(v)) <= {0, 1}
    assert abs(v.mean() - 0.5) < 0.01
    assert sample_field_element(2, RandomStream(1)).value in (0, 1)


def test_p13_chi_square():
    from scipy.stats import chisquare
    v = RandomStream(2).field_values(13, 100_000)
    counts = np.bincount(v, minlength=13)
    assert chisquare(counts).pvalue > 0.001


def test_repetitions_for_error():
    r = repetitions_for_error(2 ** 20, 10)
    assert (0.5 + 10 / 2 ** 20) ** r <= 2 ** -40
    with pytest.raises(UsageError):
        repetitions_for_error(7, 4)
