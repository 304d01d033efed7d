"""Plain-arithmetic NTT oracles. Slow on purpose; correctness only."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

from dsntt.errors import DomainError
from dsntt.params import NttDomain


@dataclass(frozen=True)
class CoefficientVector:
    values: tuple
    q: int

    def __post_init__(self):
        for v in self.values:
            if not 0 <= v < self.q:
                raise DomainError(f"coefficient {v} not in [0, {self.q})")

    def to_json(self) -> str:
        return json.dumps({"q": str(self.q), "n": len(self.values),
                           "values": [str(v) for v in self.values]})

    @classmethod
    def from_json(cls, text: str) -> "CoefficientVector":
        doc = json.loads(text)
        values = tuple(int(v) for v in doc["values"])
        if "n" in doc and int(doc["n"]) != len(values):
            raise DomainError(f"declared n={doc['n']} but {len(values)} values")
        return cls(values, int(doc["q"]))


def bit_reverse(i: int, bits: int) -> int:
    return int(format(i, f"0{bits}b")[::-1], 2) if bits else 0


def bit_reverse_permutation(values: Sequence[int]) -> list:
    n = len(values)
    bits = n.bit_length() - 1
    if 1 << bits != n:
        raise DomainError(f"length {n} is not a power of two")
    return [values[bit_reverse(i, bits)] for i in range(n)]


def _check(a: Sequence[int], domain: NttDomain) -> None:
    if len(a) != domain.n:
        raise DomainError(f"expected {domain.n} values, got {len(a)}")
    for v in a:
        if not 0 <= v < domain.q:
            raise DomainError(f"{v} not in [0, {domain.q})")


def _direct(a: Sequence[int], root: int, q: int) -> list:
    n = len(a)
    powers = [pow(root, e, q) for e in range(n)]
    out = []
    for k in range(n):
        out.append(sum(a[j] * powers[(j * k) % n] for j in range(n)) % q)
    return out


def naive_ntt(a: Sequence[int], domain: NttDomain) -> list:
    """A_k = sum_j a_j * omega^(jk) mod q, natural order."""
    _check(a, domain)
    return _direct(a, domain.omega, domain.q)


def naive_intt(A: Sequence[int], domain: NttDomain) -> list:
    _check(A, domain)
    q = domain.q
    return [v * domain.n_inv % q for v in _direct(A, domain.omega_inv, q)]


def iterative_ntt(a: Sequence[int], domain: NttDomain) -> list:
    """Radix-2 decimation in frequency; natural input, bit-reversed output."""
    _check(a, domain)
    q, n = domain.q, domain.n
    x = list(a)
    half, s = n // 2, 0
    while half >= 1:
        w = pow(domain.omega, 1 << s, q)
        for start in range(0, n, 2 * half):
            tw = 1
            for j in range(start, start + half):
                u, v = x[j], x[j + half]
                x[j] = (u + v) % q
                x[j + half] = (u - v) * tw % q
                tw = tw * w % q
        half //= 2
        s += 1
    return x


def pointwise(a: Sequence[int], b: Sequence[int], q: int) -> list:
    return [x * y % q for x, y in zip(a, b)]


def cyclic_convolve(a: Sequence[int], b: Sequence[int], q: int) -> list:
    n = len(a)
    if len(b) != n:
        raise DomainError("operands differ in length")
    c = [0] * n
    for i in range(n):
        if a[i]:
            for j in range(n):
                c[(i + j) % n] += a[i] * b[j]
    return [v % q for v in c]
