"""Digit transport and the systolic digit-serial Montgomery multiplier.

Words travel least-significant digit first as ``num_digits`` digits of d
bits. The multiplier is a chain of ``num_digits`` processing elements; PE i
folds in multiplier digit b_i, adds m_i*q where
m_i = (t mod 2^d) * (-q^-1 mod 2^d) mod 2^d, and drops the lowest digit
(the shift by d). After all PEs the accumulated quotient digits form
[p * (-q^-1)]_R, so the chain result equals word-level REDC bit for bit.

Timing: the first result digit leaves ``pe_latency * pe_count`` cycles after
the first operand digit enters, and a new operation may start every
``num_digits`` cycles.
"""

from __future__ import annotations

from collections import deque

from dsntt.errors import ContractError, DomainError
from dsntt.params import MontgomeryContext

DigitStream = list


def decompose(x: int, ctx: MontgomeryContext) -> DigitStream:
    if not 0 <= x < ctx.R:
        raise DomainError(f"{x} does not fit in {ctx.r_exp} bits")
    mask = (1 << ctx.d) - 1
    return [(x >> (ctx.d * i)) & mask for i in range(ctx.num_digits)]


def recompose(s, ctx: MontgomeryContext) -> int:
    if len(s) != ctx.num_digits:
        raise DomainError(f"stream has {len(s)} digits, expected {ctx.num_digits}")
    x = 0
    for i in reversed(range(len(s))):
        if not 0 <= s[i] < 1 << ctx.d:
            raise DomainError(f"digit {s[i]} exceeds {ctx.d} bits")
        x = (x << ctx.d) | s[i]
    return x


def pe_chain(a: int, b_digits, ctx: MontgomeryContext) -> int:
    """Run operand ``a`` through one PE per digit of ``b``."""
    d = ctx.d
    dmask = (1 << d) - 1
    q = ctx.q
    q_digit_inv = ctx.neg_q_inv & dmask
    t = 0
    for b_i in b_digits:
        t += a * b_i
        m_i = ((t & dmask) * q_digit_inv) & dmask
        t = (t + m_i * q) >> d
    return t


def systolic_mont_mul(a: DigitStream, b: DigitStream, mult: "SystolicMultiplier"):
    """One isolated multiplication: (result stream, first-in to first-out latency)."""
    ctx = mult.ctx
    av, bv = recompose(a, ctx), recompose(b, ctx)
    if av >= ctx.two_q or bv >= ctx.two_q:
        raise DomainError("operands must lie in [0, 2q)")
    return decompose(pe_chain(av, b, ctx), ctx), mult.latency


class SystolicMultiplier:
    """Clocked model: call :meth:`clock` once per cycle.

    Operands are the butterfly output (below 4q) and a twiddle (below 2q);
    their product stays below qR, so the result is below 2q.
    """

    def __init__(self, ctx: MontgomeryContext, pe_latency: int = 4, latency: int | None = None):
        if pe_latency < 1:
            raise DomainError("pe_latency must be >= 1")
        self.ctx = ctx
        self.pe_count = ctx.num_digits
        self.pe_latency = pe_latency
        # an explicit latency models a non-systolic (word-level) multiplier
        self.latency = pe_latency * self.pe_count if latency is None else latency
        if self.latency < ctx.num_digits:
            raise DomainError("latency shorter than one word time")
        self.reset()

    def reset(self):
        self.cycle = 0
        self._a = []
        self._b = []
        self._start = None
        self._pending = deque()  # (emit_cycle, digit)
        self.ops_done = 0
        self.range_violations = 0

    @property
    def busy(self) -> bool:
        return bool(self._a) or bool(self._pending)

    def clock(self, a_digit=None, b_digit=None):
        ctx = self.ctx
        if a_digit is not None:
            if not self._a:
                self._start = self.cycle
            self._a.append(a_digit)
            self._b.append(b_digit)
            if len(self._a) == ctx.num_digits:
                av = recompose(self._a, ctx)
                if av >= 4 * ctx.q or recompose(self._b, ctx) >= ctx.two_q:
                    raise ContractError("multiplier operands out of range")
                res = pe_chain(av, self._b, ctx)
                if res >= ctx.two_q:
                    self.range_violations += 1
                first = self._start + self.latency
                for i, dig in enumerate(decompose(res, ctx)):
                    self._pending.append((first + i, dig))
                self._a, self._b = [], []
                self.ops_done += 1
        out = None
        if self._pending and self._pending[0][0] == self.cycle:
            out = self._pending.popleft()[1]
        self.cycle += 1
        return out

    def stream(self, pairs):
        """Feed ``pairs`` of (a, b) words back to back; return results and cycle stats."""
        ctx = self.ctx
        self.reset()
        feed = []
        for a, b in pairs:
            feed.extend(zip(decompose(a, ctx), decompose(b, ctx)))
        out_digits = []
        first_out = []
        i = 0
        while i < len(feed) or self.busy:
            if i < len(feed):
                dig = self.clock(*feed[i])
            else:
                dig = self.clock()
            i += 1
            if dig is not None:
                if len(out_digits) % ctx.num_digits == 0:
                    first_out.append(self.cycle - 1)
                out_digits.append(dig)
        nd = ctx.num_digits
        results = [recompose(out_digits[k:k + nd], ctx) for k in range(0, len(out_digits), nd)]
        return results, first_out


def digit_serial_addsub(a: DigitStream, b: DigitStream, ctx: MontgomeryContext):
    """Ripple-carry a+b and a-b+2q, one digit per cycle, LSD first."""
    nd, d = ctx.num_digits, ctx.d
    mask = (1 << d) - 1
    av, bv = recompose(a, ctx), recompose(b, ctx)
    if av >= ctx.two_q or bv >= ctx.two_q:
        raise DomainError("operands must lie in [0, 2q)")
    tq = decompose(ctx.two_q, ctx)
    s_out, d_out = [], []
    cs = cd = 0
    for k in range(nd):
        s = a[k] + b[k] + cs
        s_out.append(s & mask)
        cs = s >> d
        t = a[k] - b[k] + tq[k] + cd
        d_out.append(t & mask)
        cd = t >> d  # floor shift; carry in {-1, 0, 1}
        assert -1 <= cd <= 1 and 0 <= cs <= 1
    # both results are below 4q < R/2: nothing carries out of the top digit
    assert cs == 0 and cd == 0
    return s_out, d_out
