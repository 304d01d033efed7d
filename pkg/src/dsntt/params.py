"""NTT-friendly primes, roots of unity, Montgomery contexts and twiddle tables.

Everything here is deterministic: the smallest qualifying prime and the
smallest qualifying root are always returned, so fixtures are stable.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Literal

from sympy import isprime

from dsntt.errors import DomainError, NoPrimeFound

Direction = Literal["forward", "inverse"]


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def find_ntt_prime(bits: int, n: int) -> int:
    """Smallest prime q with q = 1 (mod n) and ceil(log2 q) == bits."""
    if not _is_power_of_two(n):
        raise DomainError(f"n={n} is not a power of two")
    if bits < (n - 1).bit_length() + 1:
        raise NoPrimeFound(f"no {bits}-bit prime = 1 mod {n}: range too small")
    lo, hi = 1 << (bits - 1), 1 << bits
    q = (lo // n) * n + 1
    if q <= lo:
        q += n
    while q < hi:
        if q % 2 == 1 and isprime(q):
            return q
        q += n
    raise NoPrimeFound(f"no prime = 1 mod {n} with {bits} bits")


def find_primitive_root(q: int, n: int) -> int:
    """Smallest primitive n-th root of unity modulo the prime q (n a power of two)."""
    if not _is_power_of_two(n):
        raise DomainError(f"n={n} is not a power of two")
    if (q - 1) % n != 0:
        raise DomainError(f"n={n} does not divide q-1={q - 1}")
    if n == 1:
        return 1
    e = (q - 1) // n
    g = 2
    while True:
        w0 = pow(g, e, q)
        if pow(w0, n // 2, q) == q - 1:
            break
        g += 1
        if g >= q:
            raise DomainError(f"q={q} has no primitive {n}-th root (is it prime?)")
    # the primitive n-th roots are exactly the odd powers of w0
    best = q
    w2 = w0 * w0 % q
    cur = w0
    for _ in range(n // 2):
        if cur < best:
            best = cur
        cur = cur * w2 % q
    return best


@dataclass(frozen=True)
class MontgomeryContext:
    """Modulus, digit size and Montgomery radix R = 2**r_exp.

    ``check_radix=False`` exists only for experiments that deliberately
    violate the R > 8q rule; every production path uses :func:`build_context`.
    """

    q: int
    d: int
    r_exp: int
    check_radix: bool = True
    w: int = field(init=False)
    num_digits: int = field(init=False)
    neg_q_inv: int = field(init=False)
    two_q: int = field(init=False)
    R: int = field(init=False)
    r_mask: int = field(init=False)

    def __post_init__(self):
        q, d, r_exp = self.q, self.d, self.r_exp
        if q < 3 or q % 2 == 0:
            raise DomainError(f"modulus must be odd and >= 3, got {q}")
        if d < 1:
            raise DomainError(f"digit size must be >= 1, got {d}")
        if r_exp % d:
            raise DomainError(f"r_exp={r_exp} is not a multiple of d={d}")
        R = 1 << r_exp
        if self.check_radix and R <= 8 * q:
            raise DomainError(f"radix 2^{r_exp} does not exceed 8q")
        if R <= q:
            raise DomainError("radix must exceed q")
        set_ = object.__setattr__
        set_(self, "w", (q - 1).bit_length())
        set_(self, "num_digits", r_exp // d)
        set_(self, "neg_q_inv", (-pow(q, -1, R)) % R)
        set_(self, "two_q", 2 * q)
        set_(self, "R", R)
        set_(self, "r_mask", R - 1)

    @property
    def mont_one(self) -> int:
        return self.R % self.q

    def to_dict(self) -> dict:
        return {"q": str(self.q), "d": self.d, "r_exp": self.r_exp,
                "neg_q_inv": str(self.neg_q_inv), "num_digits": self.num_digits}


def build_context(q: int, d: int) -> MontgomeryContext:
    """Context with the smallest digit-aligned radix exceeding 8q."""
    if q % 2 == 0:
        raise DomainError(f"modulus must be odd, got {q}")
    if d < 1:
        raise DomainError(f"digit size must be >= 1, got {d}")
    w = (q - 1).bit_length()
    r_exp = -(-(w + 3) // d) * d
    return MontgomeryContext(q=q, d=d, r_exp=r_exp)


@dataclass(frozen=True)
class NttDomain:
    """Transform size, roots and per-stage Montgomery twiddles.

    ``twiddle_tables[s][k]`` is the Montgomery form of root**(k * 2**s) for
    the decimation-in-frequency stage s, where root is omega (forward) or
    omega_inv (inverse). ``scale`` is the plain constant the exit stage
    multiplies by: 1 forward, n^-1 inverse.
    """

    n: int
    ctx: MontgomeryContext
    direction: str
    omega: int
    omega_inv: int
    n_inv: int
    twiddle_tables: tuple
    mont_one: int
    scale: int

    @property
    def q(self) -> int:
        return self.ctx.q

    @property
    def root(self) -> int:
        return self.omega if self.direction == "forward" else self.omega_inv

    @property
    def n_inv_mont(self) -> int:
        return self.n_inv * self.ctx.R % self.ctx.q

    def to_json(self) -> str:
        doc = {
            "n": self.n,
            "ctx": self.ctx.to_dict(),
            "direction": self.direction,
            "omega": str(self.omega),
            "omega_inv": str(self.omega_inv),
            "n_inv": str(self.n_inv),
            "mont_one": str(self.mont_one),
            "scale": str(self.scale),
            "twiddle_tables": [[str(t) for t in tab] for tab in self.twiddle_tables],
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "NttDomain":
        doc = json.loads(text)
        c = doc["ctx"]
        ctx = MontgomeryContext(q=int(c["q"]), d=int(c["d"]), r_exp=int(c["r_exp"]))
        return cls(
            n=int(doc["n"]),
            ctx=ctx,
            direction=doc["direction"],
            omega=int(doc["omega"]),
            omega_inv=int(doc["omega_inv"]),
            n_inv=int(doc["n_inv"]),
            twiddle_tables=tuple(tuple(int(t) for t in tab) for tab in doc["twiddle_tables"]),
            mont_one=int(doc["mont_one"]),
            scale=int(doc["scale"]),
        )


def build_domain(q: int, n: int, d: int, direction: Direction = "forward") -> NttDomain:
    if direction not in ("forward", "inverse"):
        raise DomainError(f"unknown direction {direction!r}")
    omega = find_primitive_root(q, n)
    ctx = build_context(q, d)
    omega_inv = pow(omega, -1, q)
    n_inv = pow(n, -1, q)
    root = omega if direction == "forward" else omega_inv
    R = ctx.R
    tables = []
    s = 0
    while (n >> (s + 1)) >= 1:
        step = 1 << s
        count = n >> (s + 1)
        tables.append(tuple(pow(root, k * step, q) * R % q for k in range(count)))
        s += 1
    if n == 1:
        tables.append((R % q,))
    return NttDomain(
        n=n,
        ctx=ctx,
        direction=direction,
        omega=omega,
        omega_inv=omega_inv,
        n_inv=n_inv,
        twiddle_tables=tuple(tables),
        mont_one=R % q,
        scale=1 if direction == "forward" else n_inv,
    )
