# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled clocked engine. Same cycle semantics as sim.PySim.

Digit transport, delay-feedback buffers, carries and the multiplier delay
lines run in C; only the per-word Montgomery product touches Python ints.
Requires d <= 32.
"""

import numpy as np

ctypedef unsigned long long u64
ctypedef long long i64


cdef class CoreSim:
    cdef object pl, ctx, q, qR, neg_q_inv, r_mask, two_q, four_q
    cdef int P, S, logp, nd, d, m, L, U, RS, nbytes, r_exp
    cdef u64 mask
    cdef object tws
    cdef public str backend
    # stage state
    cdef u64[:, :] fifo
    cdef i64[:] f_head, f_cnt, f_cap, st_c, st_end, st_B, st_max, st_busy
    cdef i64[:] cs, cd
    # multiplier / correction units
    cdef u64[:, :] acc
    cdef i64[:] acc_n, u_start, u_ops, u_lat
    cdef u64[:, :] ring
    cdef unsigned char[:, :] ring_v
    cdef i64[:] tq
    cdef i64[:, :] mcarry
    cdef u64[:, :] in_dig, out_dig
    cdef i64[:] out_n
    cdef public long long cycle, first_out, last_out, in_min, in_max
    cdef public long long range_violations, carry_violations
    cdef long long input_cycles

    def __init__(self, pl, values):
        from dsntt.digitflow import decompose
        self.backend = "compiled"
        self.pl = pl
        ctx = pl.ctx
        self.ctx = ctx
        self.q = ctx.q
        self.two_q = ctx.two_q
        self.four_q = 4 * ctx.q
        self.qR = ctx.q << ctx.r_exp
        self.neg_q_inv = ctx.neg_q_inv
        self.r_mask = ctx.r_mask
        self.r_exp = ctx.r_exp
        self.P, self.S, self.logp, self.nd, self.d, self.m, self.L = pl.P, pl.S, pl.log_p, pl.nd, ctx.d, pl.m, pl.L
        if self.d > 32:
            raise ValueError("compiled core needs d <= 32")
        self.mask = (1ULL << self.d) - 1
        self.nbytes = (ctx.r_exp + 7) // 8
        P, S, nd, m = self.P, self.S, self.nd, self.m
        ns = P * S
        maxcap = max([nd * b for b in pl.blocks] + [1])
        self.fifo = np.zeros((max(ns, 1), maxcap), dtype=np.uint64)
        self.f_head = np.zeros(max(ns, 1), dtype=np.int64)
        self.f_cnt = np.zeros(max(ns, 1), dtype=np.int64)
        self.f_cap = np.full(max(ns, 1), maxcap, dtype=np.int64)
        self.st_c = np.full(max(ns, 1), -1, dtype=np.int64)
        self.st_end = np.zeros(max(ns, 1), dtype=np.int64)
        self.st_B = np.ones(max(ns, 1), dtype=np.int64)
        self.st_max = np.zeros(max(ns, 1), dtype=np.int64)
        self.st_busy = np.zeros(max(ns, 1), dtype=np.int64)
        self.cs = np.zeros(max(ns, 1), dtype=np.int64)
        self.cd = np.zeros(max(ns, 1), dtype=np.int64)
        for p in range(P):
            for s in range(S):
                i = p * S + s
                self.st_B[i] = pl.blocks[s]
                self.st_end[i] = (m + pl.blocks[s]) * nd
        # units: path mults, merge mults, exit mults, corrections
        self.U = ns + self.logp * P + 2 * P
        self.RS = self.L + nd + 1
        self.acc = np.zeros((self.U, nd), dtype=np.uint64)
        self.acc_n = np.zeros(self.U, dtype=np.int64)
        self.u_start = np.zeros(self.U, dtype=np.int64)
        self.u_ops = np.zeros(self.U, dtype=np.int64)
        self.u_lat = np.full(self.U, self.L, dtype=np.int64)
        for r in range(P):
            self.u_lat[ns + self.logp * P + P + r] = nd
        self.ring = np.zeros((self.U, self.RS), dtype=np.uint64)
        self.ring_v = np.zeros((self.U, self.RS), dtype=np.uint8)
        tws = []
        for p in range(P):
            for s in range(S):
                tws.append(pl.path_twiddles[p][s])
        for l in range(self.logp):
            for r in range(P):
                tws.append([pl.merge_twiddles[l][r]])
        for r in range(P):
            tws.append([pl.exit_constant])
        for r in range(P):
            tws.append(None)
        self.tws = tws
        self.tq = np.array(decompose(ctx.two_q, ctx), dtype=np.int64)
        self.mcarry = np.zeros((max(self.logp, 1), 2 * P), dtype=np.int64)
        words = pl.input_words(values)
        self.in_dig = np.array([[dg for w in ws for dg in decompose(w, ctx)] for ws in words], dtype=np.uint64)
        self.out_dig = np.zeros((P, m * nd), dtype=np.uint64)
        self.out_n = np.zeros(P, dtype=np.int64)
        self.cycle = 0
        self.first_out = -1
        self.last_out = -1
        self.in_min = 1 << 30
        self.in_max = 0
        self.range_violations = 0
        self.carry_violations = 0
        self.input_cycles = m * nd

    cdef object _pack(self, int u):
        cdef bytearray buf = bytearray(self.nbytes)
        cdef u64 bits = 0
        cdef int nb = 0, k, pos = 0
        for k in range(self.nd):
            bits |= self.acc[u, k] << nb
            nb += self.d
            while nb >= 8:
                buf[pos] = bits & 0xFF
                pos += 1
                bits >>= 8
                nb -= 8
        if nb > 0 and pos < self.nbytes:
            buf[pos] = bits & 0xFF
        return int.from_bytes(buf, "little")

    cdef int _unpack(self, int u, object value, long long first) except -1:
        cdef bytes raw = value.to_bytes(self.nbytes, "little")
        cdef const unsigned char[:] b = raw
        cdef u64 bits = 0
        cdef int nb = 0, pos = 0, k, slot
        for k in range(self.nd):
            while nb < self.d:
                if pos < self.nbytes:
                    bits |= (<u64>b[pos]) << nb
                pos += 1
                nb += 8
            slot = (first + k) % self.RS
            self.ring[u, slot] = bits & self.mask
            self.ring_v[u, slot] = 1
            bits >>= self.d
            nb -= self.d
        return 0

    cdef int _unit(self, int u, int has, u64 x, u64* out) except -1:
        """Clock unit u with optional input digit x; returns 1 if it emits."""
        cdef int slot
        cdef object a, tw, res, mm
        cdef list tl
        if has:
            if self.acc_n[u] == 0:
                self.u_start[u] = self.cycle
            self.acc[u, self.acc_n[u]] = x
            self.acc_n[u] += 1
            if self.acc_n[u] == self.nd:
                a = self._pack(u)
                tl = self.tws[u]
                if tl is None:
                    if a >= self.two_q:
                        self.range_violations += 1
                    res = a - self.q if a >= self.q else a
                else:
                    tw = tl[self.u_ops[u]] if len(tl) > 1 else tl[0]
                    if a >= self.four_q:
                        raise ArithmeticError("multiplier operand out of range")
                    a = a * tw
                    mm = ((a & self.r_mask) * self.neg_q_inv) & self.r_mask
                    res = (a + self.q * mm) >> self.r_exp
                    if res >= self.two_q:
                        self.range_violations += 1
                self._unpack(u, res, self.u_start[u] + self.u_lat[u])
                self.acc_n[u] = 0
                self.u_ops[u] += 1
        slot = self.cycle % self.RS
        if self.ring_v[u, slot]:
            self.ring_v[u, slot] = 0
            out[0] = self.ring[u, slot]
            return 1
        return 0

    cdef int _stage(self, int i, int has, u64 x, u64* out) noexcept:
        cdef long long c = self.st_c[i], w, k, B = self.st_B[i]
        cdef long long cap = self.f_cap[i]
        cdef u64 y
        cdef i64 s, t
        cdef int emit = 0
        if c < 0:
            if not has:
                return 0
            c = 0
        if c >= self.st_end[i]:
            self.st_c[i] = c
            return 0
        w = c // self.nd
        k = c % self.nd
        if k == 0:
            self.cs[i] = 0
            self.cd[i] = 0
        if (w // B) % 2 == 0:
            if w >= 2 * B:
                out[0] = self.fifo[i, self.f_head[i]]
                self.f_head[i] = (self.f_head[i] + 1) % cap
                self.f_cnt[i] -= 1
                emit = 1
            if has:
                self.fifo[i, (self.f_head[i] + self.f_cnt[i]) % cap] = x
                self.f_cnt[i] += 1
        else:
            y = self.fifo[i, self.f_head[i]]
            self.f_head[i] = (self.f_head[i] + 1) % cap
            self.f_cnt[i] -= 1
            s = <i64>y + <i64>x + self.cs[i]
            out[0] = <u64>s & self.mask
            self.cs[i] = s >> self.d
            t = <i64>y - <i64>x + self.tq[k] + self.cd[i]
            self.fifo[i, (self.f_head[i] + self.f_cnt[i]) % cap] = <u64>t & self.mask
            self.f_cnt[i] += 1
            self.cd[i] = (t - (t & <i64>self.mask)) >> self.d
            emit = 1
            if k == self.nd - 1 and (self.cs[i] != 0 or self.cd[i] != 0):
                self.carry_violations += 1
        if self.f_cnt[i] > self.st_max[i]:
            self.st_max[i] = self.f_cnt[i]
        if emit:
            self.st_busy[i] += 1
        self.st_c[i] = c + 1
        return emit

    def run(self, long long max_cycles):
        cdef int P = self.P, S = self.S, p, s, r, l, B, base, j, uu, vv
        cdef int ns = P * S
        cdef long long t, need = P * self.m * self.nd, got = 0
        cdef int nd = self.nd, d = self.d, consumed
        cdef u64 lane_v[64]
        cdef unsigned char lane_h[64]
        cdef u64 bfu_v[64]
        cdef u64 y
        cdef int h
        cdef i64 sm, df
        cdef long long k
        cdef long long mcount[64]
        for l in range(64):
            mcount[l] = 0
        if P > 64:
            raise ValueError("compiled core supports at most 64 paths")
        while got < need:
            t = self.cycle
            if t >= max_cycles:
                raise RuntimeError("pipeline failed to drain")
            consumed = 0
            for p in range(P):
                h = t < self.input_cycles
                y = self.in_dig[p, t] if h else 0
                consumed += h
                for s in range(S):
                    h = self._stage(p * S + s, h, y, &y)
                    h = self._unit(p * S + s, h, y, &y)
                lane_v[p] = y
                lane_h[p] = h
            for l in range(self.logp):
                if lane_h[0]:
                    k = mcount[l] % nd
                    mcount[l] += 1
                    B = P >> (l + 1)
                    for base in range(0, P, 2 * B):
                        for j in range(B):
                            uu = base + j
                            vv = uu + B
                            if k == 0:
                                self.mcarry[l, 2 * uu] = 0
                                self.mcarry[l, 2 * uu + 1] = 0
                            sm = <i64>lane_v[uu] + <i64>lane_v[vv] + self.mcarry[l, 2 * uu]
                            bfu_v[uu] = <u64>sm & self.mask
                            self.mcarry[l, 2 * uu] = sm >> d
                            df = <i64>lane_v[uu] - <i64>lane_v[vv] + self.tq[k] + self.mcarry[l, 2 * uu + 1]
                            bfu_v[vv] = <u64>df & self.mask
                            self.mcarry[l, 2 * uu + 1] = (df - (df & <i64>self.mask)) >> d
                            if k == nd - 1 and (self.mcarry[l, 2 * uu] != 0 or self.mcarry[l, 2 * uu + 1] != 0):
                                self.carry_violations += 1
                    h = 1
                else:
                    h = 0
                for r in range(P):
                    lane_h[r] = self._unit(ns + l * P + r, h, bfu_v[r], &lane_v[r])
            for r in range(P):
                h = self._unit(ns + self.logp * P + r, lane_h[r], lane_v[r], &y)
                h = self._unit(ns + self.logp * P + P + r, h, y, &y)
                if h:
                    self.out_dig[r, self.out_n[r]] = y
                    self.out_n[r] += 1
                    got += 1
                    if self.first_out < 0:
                        self.first_out = t
                    self.last_out = t
            if t < self.input_cycles:
                if consumed < self.in_min:
                    self.in_min = consumed
                if consumed > self.in_max:
                    self.in_max = consumed
            self.cycle += 1
        return self.finish()

    def finish(self):
        from dsntt.digitflow import recompose
        pl = self.pl
        nd = self.nd
        lanes = []
        for r in range(self.P):
            digs = [int(v) for v in np.asarray(self.out_dig[r])]
            lanes.append([recompose(digs[i:i + nd], self.ctx) for i in range(0, len(digs), nd)])
        S, P = self.S, self.P
        stats = {
            "total_cycles": self.last_out + 1,
            "first_out": self.first_out,
            "in_per_cycle": (int(self.in_min), int(self.in_max)),
            "max_occ": [int(max(self.st_max[p * S + s] for p in range(P))) for s in range(S)],
            "busy": {f"p{p}.s{s}": int(self.st_busy[p * S + s]) for p in range(P) for s in range(S)},
            "range_violations": int(self.range_violations),
            "carry_violations": int(self.carry_violations),
        }
        return lanes, stats
