"""Arithmetic in Z_p, primality and reproducible random streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, UsageError

PRIME_LIMIT = 1 << 62

# Deterministic for every n < 3.3 * 10^24, which covers the 64-bit range.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)

# Largest modulus for which (p-1)^2 fits in a signed 64-bit integer.
NATIVE_MUL_LIMIT = 3037000499


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test, exact for all 64-bit integers."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n == q:
            return True
        if n % q == 0:
            return False
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


@dataclass(frozen=True)
class PrimeModulus:
    p: int

    def __post_init__(self) -> None:
        if not isinstance(self.p, (int, np.integer)) or isinstance(self.p, bool):
            raise UsageError(f"modulus must be an integer, got {self.p!r}")
        object.__setattr__(self, "p", int(self.p))
        if not 2 <= self.p < PRIME_LIMIT:
            raise UsageError(f"modulus {self.p} outside [2, 2^62)")
        if not is_prime(self.p):
            raise UsageError(f"{self.p} is not prime")

    @property
    def bit_width(self) -> int:
        return self.p.bit_length()

    def element(self, value: int) -> "FieldElement":
        return FieldElement(int(value) % self.p, self)

    def __int__(self) -> int:
        return self.p


def as_modulus(p: "int | PrimeModulus") -> PrimeModulus:
    return p if isinstance(p, PrimeModulus) else PrimeModulus(int(p))


@dataclass(frozen=True)
class FieldElement:
    """An element of Z_p. Compares equal to plain ints holding the same residue."""

    value: int
    modulus: PrimeModulus

    def __post_init__(self) -> None:
        if not 0 <= self.value < self.modulus.p:
            raise UsageError(f"value {self.value} not reduced mod {self.modulus.p}")

    @property
    def p(self) -> int:
        return self.modulus.p

    def _coerce(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.modulus.p != self.modulus.p:
                raise UsageError("arithmetic between different moduli")
            return other.value
        if isinstance(other, (int, np.integer)) and not isinstance(other, bool):
            return int(other) % self.p
        return NotImplemented

    def __add__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement((self.value + b) % self.p, self.modulus)

    __radd__ = __add__

    def __sub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement((self.value - b) % self.p, self.modulus)

    def __rsub__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement((b - self.value) % self.p, self.modulus)

    def __mul__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return FieldElement(self.value * b % self.p, self.modulus)

    __rmul__ = __mul__

    def __neg__(self):
        return FieldElement(-self.value % self.p, self.modulus)

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        return FieldElement(pow(self.value, e, self.p), self.modulus)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise DomainError("zero has no inverse")
        return FieldElement(pow(self.value, -1, self.p), self.modulus)

    def __truediv__(self, other):
        b = self._coerce(other)
        if b is NotImplemented:
            return b
        return self * FieldElement(b, self.modulus).inverse()

    def __eq__(self, other) -> bool:
        if isinstance(other, FieldElement):
            return self.modulus.p == other.modulus.p and self.value == other.value
        if isinstance(other, (int, np.integer)) and not isinstance(other, bool):
            return self.value == int(other)
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.value)

    def __int__(self) -> int:
        return self.value

    def __index__(self) -> int:
        return self.value

    def __bool__(self) -> bool:
        return self.value != 0

    def __repr__(self) -> str:
        return f"{self.value} (mod {self.p})"


def field_arithmetic(a: FieldElement, b: "FieldElement | int | None", op: str) -> FieldElement:
    """Apply op in {add, sub, mul, inv, pow}; for pow, b is the exponent."""
    if op == "inv":
        return a.inverse()
    if op == "pow":
        return a ** int(b)
    if not isinstance(b, FieldElement):
        raise UsageError(f"{op} needs two field elements")
    if a.modulus.p != b.modulus.p:
        raise UsageError("arithmetic between different moduli")
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise UsageError(f"unknown field operation {op!r}")


def next_prime_at_least(lower: int) -> PrimeModulus:
    if not 2 <= lower < PRIME_LIMIT:
        raise UsageError(f"lower bound {lower} outside [2, 2^62)")
    q = lower
    while not is_prime(q):
        q += 1
    if q >= PRIME_LIMIT:
        raise UsageError(f"no prime in [{lower}, 2^62)")
    return PrimeModulus(q)


# ---------------------------------------------------------------------------
# vectorised helpers on int64 arrays holding reduced residues
# ---------------------------------------------------------------------------

def native_ok(p: int) -> bool:
    return p <= NATIVE_MUL_LIMIT


def mul_mod(a, b, p: int):
    """Elementwise a*b mod p for reduced residues, exact for every p < 2^62."""
    if native_ok(p):
        return np.asarray(a, dtype=np.int64) * np.asarray(b, dtype=np.int64) % p
    # astype(object) yields Python ints, which multiply without overflow
    prod = np.asarray(a, dtype=np.int64).astype(object) * np.asarray(b, dtype=np.int64).astype(object) % p
    return np.asarray(prod).astype(np.int64)


def prod_mod(values: np.ndarray, p: int, axis: int = -1) -> np.ndarray:
    """Product mod p along one axis, reducing after every factor."""
    values = np.asarray(values, dtype=np.int64)
    if axis not in (-1, values.ndim - 1):
        values = np.moveaxis(values, axis, -1)
    k = values.shape[-1]
    if k == 0:
        return np.ones(values.shape[:-1], dtype=np.int64)
    acc = values[..., 0] % p
    if native_ok(p):
        for j in range(1, k):
            acc = acc * values[..., j] % p
        return acc
    for j in range(1, k):
        acc = mul_mod(acc, values[..., j], p)
    return acc


def sum_mod(values: np.ndarray, p: int) -> int:
    """Sum of reduced residues mod p without int64 overflow."""
    values = np.asarray(values, dtype=np.int64).ravel()
    if values.size == 0:
        return 0
    # chunks of 2^31 terms below 2^62 cannot overflow
    if values.size < (1 << 31) and p < (1 << 31):
        return int(values.sum() % p)
    return int(sum(int(v) for v in values) % p)


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------

class RandomStream:
    """Seeded, platform-independent random source with derivable substreams.

    The state is a PCG64 generator keyed by (seed, stream_id, path).  Child
    streams extend the path, so components of one trial never share state.
    """

    def __init__(self, seed: int, stream_id: int = 0, path: Sequence[int] = ()):
        if seed < 0 or seed >= 1 << 64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(x) for x in path)
        ss = np.random.SeedSequence(self.seed, spawn_key=(self.stream_id,) + self.path)
        self.generator = np.random.Generator(np.random.PCG64(ss))
        self._children = 0

    def child(self, label: int | None = None) -> "RandomStream":
        if label is None:
            label = self._children
            self._children += 1
        return RandomStream(self.seed, self.stream_id, self.path + (label,))

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, stream_id={self.stream_id}, path={self.path})"

    # --- draws --------------------------------------------------------------

    def integers(self, low: int, high: int, size=None):
        return self.generator.integers(low, high, size=size)

    def random(self, size=None):
        return self.generator.random(size)

    def bits(self, count: int) -> np.ndarray:
        return self.generator.integers(0, 2, size=count, dtype=np.uint8)

    def permutation_array(self, n: int) -> np.ndarray:
        """Zero-based uniform permutation of range(n) (Fisher-Yates)."""
        return self.generator.permutation(n)

    def permutation_arrays(self, count: int, n: int) -> np.ndarray:
        """count independent uniform zero-based permutations, one per row."""
        base = np.tile(np.arange(n, dtype=np.int64), (count, 1))
        return self.generator.permuted(base, axis=1)

    def field_values(self, p: int, size) -> np.ndarray:
        """Uniform residues in [0, p) by rejection sampling on (p-1).bit_length() bits."""
        return uniform_residues(self.generator, p, size)


def uniform_residues(gen: np.random.Generator, p: int, size) -> np.ndarray:
    shape = (size,) if isinstance(size, (int, np.integer)) else tuple(size)
    total = int(np.prod(shape)) if shape else 1
    bits = max(1, (p - 1).bit_length())
    out = np.empty(total, dtype=np.int64)
    filled = 0
    while filled < total:
        need = total - filled
        # acceptance probability is above 1/2, so oversample a little
        draw = gen.integers(0, 1 << bits, size=need + need // 2 + 8, dtype=np.uint64)
        keep = draw[draw < p][:need]
        out[filled:filled + keep.size] = keep.astype(np.int64)
        filled += keep.size
    return out.reshape(shape)


def sample_field_element(p: "int | PrimeModulus", rng: RandomStream) -> FieldElement:
    mod = as_modulus(p)
    return FieldElement(int(rng.field_values(mod.p, 1)[0]), mod)


def repetitions_for_error(p: int, degree: int, target_log2: float = 40.0) -> int:
    """Rounds needed so a per-round pass probability of 1/2 + degree/p drops below 2^-target."""
    per_round = 0.5 + degree / p
    if per_round >= 1:
        raise UsageError("p too small for the degree bound")
    return max(1, math.ceil(target_log2 * math.log(2) / -math.log(per_round)))
