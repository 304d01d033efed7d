"""Bit-exact, cycle-accurate model of a digit-serial pipelined NTT accelerator.

Lazy Montgomery butterflies keep every intermediate value in the redundant
range [0, 2q) as long as the Montgomery radix satisfies R > 8q; the whole
pipeline can therefore move d-bit digits end to end and defer the single
conditional subtraction to the exit stage.
"""

from dsntt.errors import ConfigError, ContractError, DomainError, NoPrimeFound, NttError
from dsntt.params import (
    MontgomeryContext,
    NttDomain,
    build_context,
    build_domain,
    find_ntt_prime,
    find_primitive_root,
)
from dsntt.montcore import butterfly_lazy, finalize, mont_mul_lazy, redc, to_montgomery

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ContractError",
    "DomainError",
    "NoPrimeFound",
    "NttError",
    "MontgomeryContext",
    "NttDomain",
    "build_context",
    "build_domain",
    "find_ntt_prime",
    "find_primitive_root",
    "butterfly_lazy",
    "finalize",
    "mont_mul_lazy",
    "redc",
    "to_montgomery",
]
