"""Pipeline configuration, static netlist tables and the cycle report."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from dsntt.errors import ConfigError, NttError
from dsntt.montcore import to_montgomery
from dsntt.params import NttDomain, build_domain
from dsntt.reference import bit_reverse

MULTIPLIER_MODELS = ("systolic", "wordlevel")


@dataclass(frozen=True)
class PipelineConfig:
    """One accelerator instance.

    ``multiplier="systolic"`` is the digit-serial design: one PE per digit,
    ``pe_latency`` cycles each. ``"wordlevel"`` models a full-word
    Montgomery multiplier that reduces ``reduction_step_bits`` per step,
    ``pe_latency`` cycles per step; it only makes sense with a full-word
    digit and serves as the single-path baseline.
    """

    n: int
    domain: NttDomain
    d: int
    paths: int = 1
    direction: str = "forward"
    reorder_output: bool = False
    pe_latency: int = 4
    multiplier: str = "systolic"
    reduction_step_bits: int = 12

    @classmethod
    def create(cls, n: int, q: int, d: int, paths: int = 1, direction: str = "forward", **kw) -> "PipelineConfig":
        try:
            domain = build_domain(q, n, d, direction)
        except NttError as exc:
            raise ConfigError(str(exc)) from exc
        return cls(n=n, domain=domain, d=d, paths=paths, direction=direction, **kw)

    def __post_init__(self):
        n, p = self.n, self.paths
        if n < 2 or n & (n - 1):
            raise ConfigError(f"n={n} must be a power of two >= 2")
        if p < 1 or p & (p - 1):
            raise ConfigError(f"paths={p} must be a power of two")
        if n % p or n // p < 2:
            raise ConfigError(f"n/paths must be >= 2 (n={n}, paths={p})")
        if self.domain.n != n or self.domain.ctx.d != self.d or self.domain.direction != self.direction:
            raise ConfigError("domain does not match n/d/direction")
        if self.pe_latency < 1:
            raise ConfigError("pe_latency must be >= 1")
        if self.multiplier not in MULTIPLIER_MODELS:
            raise ConfigError(f"unknown multiplier model {self.multiplier!r}")
        if self.multiplier == "wordlevel" and self.domain.ctx.num_digits != 1:
            raise ConfigError("the word-level multiplier needs a full-word digit")

    @property
    def ctx(self):
        return self.domain.ctx

    @property
    def bandwidth(self) -> int:
        return self.d * self.paths

    @property
    def multiplier_latency(self) -> int:
        if self.multiplier == "systolic":
            return self.pe_latency * self.ctx.num_digits
        steps = -(-self.ctx.r_exp // self.reduction_step_bits)
        return self.pe_latency * steps

    def echo(self) -> dict:
        return {
            "n": self.n,
            "q": str(self.domain.q),
            "d": self.d,
            "r_exp": self.ctx.r_exp,
            "num_digits": self.ctx.num_digits,
            "paths": self.paths,
            "direction": self.direction,
            "reorder_output": self.reorder_output,
            "pe_latency": self.pe_latency,
            "multiplier": self.multiplier,
            "reduction_step_bits": self.reduction_step_bits,
        }


@dataclass
class CycleReport:
    total_cycles: int
    fill_latency: int
    drain_latency: int
    input_cycles: int
    steady_input_bits_per_cycle: float
    input_digits_per_cycle_min: int
    input_digits_per_cycle_max: int
    per_stage_busy_fraction: dict
    max_buffer_occupancy: list
    buffer_capacity: list
    multiplier_latency: int
    merge_latency: int
    exit_latency: int
    range_violations: int
    carry_violations: int
    pe_count: int
    stages_per_path: int
    backend: str
    config: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


class Pipeline:
    """Static netlist: per-path SDF stages, merge network, exit stage.

    Input element j enters path j % paths at word slot j // paths. Path p
    computes the (n/paths)-point transform of its decimated subsequence;
    the last stage multiplier of each path applies the inter-path twiddle
    root^(p * k1) (k1 the path output frequency) in place of its trivial
    twiddle. Output word slot t of lane r carries index bitrev_n(t*paths + r).
    """

    def __init__(self, cfg: PipelineConfig):
        self.cfg = cfg
        dom = cfg.domain
        ctx = dom.ctx
        self.ctx = ctx
        self.nd = ctx.num_digits
        self.P = cfg.paths
        self.m = cfg.n // cfg.paths
        self.S = self.m.bit_length() - 1
        self.log_p = self.P.bit_length() - 1
        self.blocks = [self.m >> (s + 1) for s in range(self.S)]
        self.L = cfg.multiplier_latency
        one = dom.mont_one
        q, root, n = dom.q, dom.root, cfg.n

        # twiddle word per multiplier op, path p, stage s
        self.path_twiddles = []
        for p in range(self.P):
            per_stage = []
            for s in range(self.S):
                B = self.blocks[s]
                table = dom.twiddle_tables[s + self.log_p]
                ops = []
                for o in range(self.m):
                    r = o % (2 * B)
                    ops.append(one if r < B else table[r - B])
                if s == self.S - 1 and self.P > 1:
                    ops = [to_montgomery(pow(root, p * bit_reverse(o, self.S), q), ctx)
                           for o in range(self.m)]
                per_stage.append(ops)
            self.path_twiddles.append(per_stage)

        # merge level l: constant twiddle per lane
        self.merge_twiddles = []
        for l in range(self.log_p):
            B = self.P >> (l + 1)
            table = dom.twiddle_tables[self.S + l]
            lane_tw = []
            for lane in range(self.P):
                j = lane % (2 * B)
                lane_tw.append(one if j < B else table[j - B])
            self.merge_twiddles.append(lane_tw)
        self.exit_constant = dom.scale

    @property
    def pe_count(self) -> int:
        return self.nd if self.cfg.multiplier == "systolic" else -(-self.ctx.r_exp // self.cfg.reduction_step_bits)

    @property
    def stage_count(self) -> int:
        return self.S

    @property
    def merge_size(self) -> int:
        return self.P

    def buffer_capacity(self, s: int) -> int:
        """Digit slots in path stage s (0-based): num_digits * m / 2^(s+1)."""
        return self.nd * self.blocks[s]

    def stage_start(self, s: int) -> int:
        return sum(self.blocks[i] * self.nd + self.L for i in range(s))

    def first_output_cycle(self) -> int:
        return self.stage_start(self.S) + self.log_p * self.L + self.L + self.nd

    def input_words(self, values) -> list:
        """Montgomery-form words per path, in arrival order."""
        if len(values) != self.cfg.n:
            raise ConfigError(f"expected {self.cfg.n} values, got {len(values)}")
        ctx = self.ctx
        words = [to_montgomery(int(v), ctx) for v in values]
        return [[words[p + self.P * j] for j in range(self.m)] for p in range(self.P)]

    def order_outputs(self, lanes: list) -> list:
        """Flatten lane outputs to bit-reversed order, or natural if configured."""
        out = [lanes[r][t] for t in range(self.m) for r in range(self.P)]
        if self.cfg.reorder_output:
            bits = self.cfg.n.bit_length() - 1
            out = [out[bit_reverse(i, bits)] for i in range(len(out))]
        return out


def build_pipeline(cfg: PipelineConfig) -> Pipeline:
    return Pipeline(cfg)


def cycle_model(cfg: PipelineConfig) -> int:
    """Closed-form total cycles.

    input streaming m*nd, plus per path stage (buffer fill B_s*nd + one
    multiplier L), plus log2(paths) merge multipliers, plus the exit
    multiplier and the nd-cycle correction.
    """
    nd = cfg.ctx.num_digits
    m = cfg.n // cfg.paths
    L = cfg.multiplier_latency
    stages = m.bit_length() - 1
    merge = cfg.paths.bit_length() - 1
    return m * nd + (m - 1) * nd + stages * L + merge * L + L + nd
