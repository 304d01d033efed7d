"""Pure-Python clocked engine. One call to :meth:`PySim.step` is one cycle.

Every unit exchanges single d-bit digits. Units are evaluated upstream
first within a cycle; latency comes only from stage buffers, multipliers
and the exit correction. This engine is the observable reference: traces
and :func:`step` always use it, and the compiled core must agree with it.
"""

from __future__ import annotations

from collections import deque

from dsntt.digitflow import SystolicMultiplier, decompose, recompose


class _SdfStage:
    """Delay-feedback stage: move phase stores incoming / emits buffered,
    compute phase adds incoming to buffered and stores (buffered - incoming + 2q)."""

    def __init__(self, B, m, nd, d, two_q_digits):
        self.B = B
        self.nd = nd
        self.d = d
        self.mask = (1 << d) - 1
        self.tq = two_q_digits
        self.end = (m + B) * nd
        self.fifo = deque()
        self.c = -1
        self.cs = self.cd = 0
        self.max_occ = 0
        self.busy_cycles = 0
        self.carry_violations = 0

    @property
    def phase(self) -> str:
        if self.c < 0 or self.c >= self.end:
            return "idle"
        return "compute" if (self.c // self.nd // self.B) & 1 else "move"

    def clock(self, x):
        if self.c < 0:
            if x is None:
                return None
            self.c = 0
        if self.c >= self.end:
            return None
        nd, B = self.nd, self.B
        w, k = divmod(self.c, nd)
        out = None
        if k == 0:
            self.cs = self.cd = 0
        if (w // B) & 1 == 0:
            if w >= 2 * B:
                out = self.fifo.popleft()
            if x is not None:
                self.fifo.append(x)
        else:
            y = self.fifo.popleft()
            s = y + x + self.cs
            out = s & self.mask
            self.cs = s >> self.d
            t = y - x + self.tq[k] + self.cd
            self.fifo.append(t & self.mask)
            self.cd = t >> self.d
            if k == nd - 1 and (self.cs or self.cd):
                self.carry_violations += 1
        if len(self.fifo) > self.max_occ:
            self.max_occ = len(self.fifo)
        if out is not None:
            self.busy_cycles += 1
        self.c += 1
        return out


class _TwiddledMultiplier:
    """A multiplier plus the ROM cursor that streams its twiddle digits."""

    def __init__(self, ctx, pe_latency, latency, twiddles):
        self.mult = SystolicMultiplier(ctx, pe_latency, latency)
        self.ctx = ctx
        self.tw = twiddles  # list per op, or a single constant
        self.count = 0
        self._digits = None

    def clock(self, a):
        if a is None:
            return self.mult.clock()
        nd = self.ctx.num_digits
        o, k = divmod(self.count, nd)
        if k == 0:
            word = self.tw[o] if isinstance(self.tw, list) else self.tw
            self._digits = decompose(word, self.ctx)
        self.count += 1
        return self.mult.clock(a, self._digits[k])


class _Correction:
    """Collects one word, subtracts q if needed, re-emits it nd cycles later."""

    def __init__(self, ctx):
        self.ctx = ctx
        self.buf = []
        self.pending = deque()
        self.cycle = 0
        self.start = 0
        self.range_violations = 0

    def clock(self, x):
        ctx = self.ctx
        if x is not None:
            if not self.buf:
                self.start = self.cycle
            self.buf.append(x)
            if len(self.buf) == ctx.num_digits:
                v = recompose(self.buf, ctx)
                if v >= ctx.two_q:
                    self.range_violations += 1
                if v >= ctx.q:
                    v -= ctx.q
                for i, dig in enumerate(decompose(v, ctx)):
                    self.pending.append((self.start + ctx.num_digits + i, dig))
                self.buf = []
        out = None
        if self.pending and self.pending[0][0] == self.cycle:
            out = self.pending.popleft()[1]
        self.cycle += 1
        return out


class PySim:
    """Clocked simulation of one transform through a :class:`Pipeline`."""

    backend = "python"

    def __init__(self, pl, values):
        self.pl = pl
        ctx = pl.ctx
        cfg = pl.cfg
        nd, P, m, d = pl.nd, pl.P, pl.m, ctx.d
        self.words = pl.input_words(values)
        self.in_digits = [[dig for w in ws for dig in decompose(w, ctx)] for ws in self.words]
        self.input_cycles = m * nd
        tq = decompose(ctx.two_q, ctx)
        self.tq = tq
        self.stages = [[_SdfStage(pl.blocks[s], m, nd, d, tq) for s in range(pl.S)] for _ in range(P)]
        self.stage_mults = [[_TwiddledMultiplier(ctx, cfg.pe_latency, pl.L, pl.path_twiddles[p][s])
                             for s in range(pl.S)] for p in range(P)]
        self.merge_mults = [[_TwiddledMultiplier(ctx, cfg.pe_latency, pl.L, pl.merge_twiddles[l][r])
                             for r in range(P)] for l in range(pl.log_p)]
        self.merge_carries = [[0, 0] * P for _ in range(pl.log_p)]
        self.merge_count = [0] * pl.log_p
        self.exit_mults = [_TwiddledMultiplier(ctx, cfg.pe_latency, pl.L, pl.exit_constant) for _ in range(P)]
        self.corrections = [_Correction(ctx) for _ in range(P)]
        self.out_digits = [[] for _ in range(P)]
        self.cycle = 0
        self.first_out = None
        self.last_out = None
        self.in_per_cycle = []
        self.merge_carry_violations = 0
        self.expected_out = m * nd

    @property
    def done(self) -> bool:
        return all(len(o) == self.expected_out for o in self.out_digits)

    def _merge_level(self, l, xs):
        P = self.pl.P
        if xs[0] is None:
            return [mm.clock(None) for mm in self.merge_mults[l]]
        nd, d = self.pl.nd, self.pl.ctx.d
        mask = (1 << d) - 1
        k = self.merge_count[l] % nd
        self.merge_count[l] += 1
        B = P >> (l + 1)
        carries = self.merge_carries[l]
        bfu = [None] * P
        for base in range(0, P, 2 * B):
            for j in range(B):
                u, v = base + j, base + j + B
                if k == 0:
                    carries[2 * u] = carries[2 * u + 1] = 0
                s = xs[u] + xs[v] + carries[2 * u]
                bfu[u] = s & mask
                carries[2 * u] = s >> d
                t = xs[u] - xs[v] + self.tq[k] + carries[2 * u + 1]
                bfu[v] = t & mask
                carries[2 * u + 1] = t >> d
                if k == nd - 1 and (carries[2 * u] or carries[2 * u + 1]):
                    self.merge_carry_violations += 1
        return [self.merge_mults[l][r].clock(bfu[r]) for r in range(P)]

    def step(self) -> dict:
        """Advance one cycle and return the observable state."""
        pl = self.pl
        t = self.cycle
        if self.done:
            return {"cycle": t, "idle": True, "stages": [], "links": {}}
        links = {}
        lanes = []
        consumed = 0
        for p in range(pl.P):
            x = self.in_digits[p][t] if t < self.input_cycles else None
            if x is not None:
                consumed += 1
            links[f"in{p}"] = x
            for s in range(pl.S):
                y = self.stages[p][s].clock(x)
                links[f"p{p}.s{s}.bfu"] = y
                x = self.stage_mults[p][s].clock(y)
                links[f"p{p}.s{s}.out"] = x
            lanes.append(x)
        for l in range(pl.log_p):
            lanes = self._merge_level(l, lanes)
            for r, x in enumerate(lanes):
                links[f"m{l}.{r}"] = x
        for r in range(pl.P):
            x = self.exit_mults[r].clock(lanes[r])
            links[f"x{r}"] = x
            x = self.corrections[r].clock(x)
            links[f"out{r}"] = x
            if x is not None:
                self.out_digits[r].append(x)
                if self.first_out is None:
                    self.first_out = t
                self.last_out = t
        if t < self.input_cycles:
            self.in_per_cycle.append(consumed)
        stages = [{"path": p, "stage": s, "phase": st.phase, "occupancy": len(st.fifo)}
                  for p in range(pl.P) for s, st in enumerate(self.stages[p])]
        self.cycle += 1
        return {"cycle": t, "idle": False, "stages": stages, "links": links}

    def run(self):
        while not self.done:
            self.step()
        return self.finish()

    def finish(self):
        pl = self.pl
        ctx = pl.ctx
        nd = pl.nd
        lanes = []
        for r in range(pl.P):
            digs = self.out_digits[r]
            lanes.append([recompose(digs[i:i + nd], ctx) for i in range(0, len(digs), nd)])
        stats = {
            "total_cycles": self.last_out + 1,
            "first_out": self.first_out,
            "in_per_cycle": self.in_per_cycle,
            "max_occ": [max(self.stages[p][s].max_occ for p in range(pl.P)) for s in range(pl.S)],
            "busy": {f"p{p}.s{s}": self.stages[p][s].busy_cycles
                     for p in range(pl.P) for s in range(pl.S)},
            "range_violations": sum(mm.mult.range_violations for row in self.stage_mults for mm in row)
            + sum(mm.mult.range_violations for row in self.merge_mults for mm in row)
            + sum(mm.mult.range_violations for mm in self.exit_mults)
            + sum(c.range_violations for c in self.corrections),
            "carry_violations": sum(st.carry_violations for row in self.stages for st in row)
            + self.merge_carry_violations,
        }
        return lanes, stats
