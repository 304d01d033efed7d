"""run / load / step over a :class:`Pipeline`, and report assembly."""

from __future__ import annotations

from dsntt.errors import ConfigError, DomainError
from dsntt.pipeline.config import CycleReport, Pipeline, cycle_model
from dsntt.pipeline.sim import PySim


def _check_values(pl: Pipeline, values) -> list:
    values = [int(v) for v in values]
    if len(values) != pl.cfg.n:
        raise DomainError(f"expected {pl.cfg.n} values, got {len(values)}")
    q = pl.ctx.q
    for v in values:
        if not 0 <= v < q:
            raise DomainError(f"input {v} not in [0, {q})")
    return values


def _pick_backend(pl: Pipeline, backend: str):
    from dsntt import pipeline as pkg

    if backend == "python":
        return PySim
    usable = pkg.CoreSim is not None and pl.ctx.d <= 32 and pl.P <= 64
    if backend == "compiled":
        if not usable:
            raise ConfigError("compiled core unavailable for this configuration")
        return pkg.CoreSim
    if backend != "auto":
        raise ConfigError(f"unknown backend {backend!r}")
    return pkg.CoreSim if usable else PySim


def _report(pl: Pipeline, stats: dict, backend: str) -> CycleReport:
    cfg = pl.cfg
    total = stats["total_cycles"]
    in_cycles = pl.m * pl.nd
    ipc = stats["in_per_cycle"]
    lo, hi = (min(ipc), max(ipc)) if isinstance(ipc, list) else ipc
    return CycleReport(
        total_cycles=total,
        fill_latency=stats["first_out"],
        drain_latency=total - in_cycles,
        input_cycles=in_cycles,
        steady_input_bits_per_cycle=cfg.n * pl.nd * pl.ctx.d / in_cycles,
        input_digits_per_cycle_min=lo,
        input_digits_per_cycle_max=hi,
        per_stage_busy_fraction={k: v / total for k, v in sorted(stats["busy"].items())},
        max_buffer_occupancy=list(stats["max_occ"]),
        buffer_capacity=[pl.buffer_capacity(s) for s in range(pl.S)],
        multiplier_latency=pl.L,
        merge_latency=pl.log_p * pl.L,
        exit_latency=pl.L + pl.nd,
        range_violations=stats["range_violations"],
        carry_violations=stats["carry_violations"],
        pe_count=pl.pe_count,
        stages_per_path=pl.S,
        backend=backend,
        config=cfg.echo() | {"predicted_total_cycles": cycle_model(cfg)},
    )


def run(pl: Pipeline, values, backend: str = "auto"):
    """Push one vector through the pipeline; returns (outputs, CycleReport)."""
    values = _check_values(pl, values)
    engine = _pick_backend(pl, backend)
    sim = engine(pl, values)
    limit = 4 * cycle_model(pl.cfg) + 64
    if engine is PySim:
        while not sim.done:
            if sim.cycle > limit:
                raise RuntimeError("pipeline failed to drain")
            sim.step()
        lanes, stats = sim.finish()
    else:
        lanes, stats = sim.run(limit)
    return pl.order_outputs(lanes), _report(pl, stats, sim.backend)


def load(pl: Pipeline, values) -> PySim:
    """Attach a fresh clocked simulation to ``pl`` for cycle stepping."""
    pl.sim = PySim(pl, _check_values(pl, values))
    return pl.sim


def step(pl: Pipeline) -> dict:
    sim = getattr(pl, "sim", None)
    if sim is None:
        raise ConfigError("pipeline not loaded")
    return sim.step()
