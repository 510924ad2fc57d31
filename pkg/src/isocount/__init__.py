"""Randomized identity tests, corrupt-oracle amplification and exact clique counting over Z_p."""

from .algebra import FieldElement, PrimeModulus, RandomStream, is_prime, next_prime_at_least
from .errors import CapabilityError, DomainError, InternalAssertionError, IsocountError, UsageError
from .graphs import (Digraph, DirectedMultigraph, Permutation, SimpleGraph, UndirectedMultigraph,
                     automorphism_order, permute)

__version__ = "0.1.0"

__all__ = [
    "CapabilityError", "Digraph", "DirectedMultigraph", "DomainError", "FieldElement", "InternalAssertionError",
    "IsocountError", "Permutation", "PrimeModulus", "RandomStream", "SimpleGraph", "UndirectedMultigraph",
    "UsageError", "automorphism_order", "is_prime", "next_prime_at_least", "permute",
]
