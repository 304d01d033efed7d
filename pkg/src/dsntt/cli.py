"""Command-line front end: verify, bench, sweep, convolve.

Exit codes: 0 pass, 1 verification failure, 2 configuration error.
Big integers are written as decimal strings in every report.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import subprocess
import sys
from pathlib import Path

from dsntt import __version__
from dsntt.errors import NttError
from dsntt.montcore import finalize, mont_mul_lazy, to_montgomery
from dsntt.params import find_ntt_prime
from dsntt.pipeline import PipelineConfig, build_pipeline, cycle_model, run
from dsntt.reference import CoefficientVector, bit_reverse_permutation, cyclic_convolve, naive_intt, naive_ntt

PRNG = "python-random-mt19937/v1"
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def version_string() -> str:
    try:
        desc = subprocess.run(["git", "describe", "--always", "--dirty"], capture_output=True, text=True,
                              cwd=Path(__file__).parent, timeout=5)
        if desc.returncode == 0 and desc.stdout.strip():
            return f"{__version__}+{desc.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


def _resolve_q(args, n: int) -> int:
    if args.q is not None:
        return args.q
    return find_ntt_prime(args.q_bits, max(n, 1))


def _config(args, d=None, paths=None, direction=None, reorder=False) -> PipelineConfig:
    return PipelineConfig.create(
        args.n, _resolve_q(args, args.n), d or args.d, paths or args.paths,
        direction or args.direction, reorder_output=reorder,
        pe_latency=args.pe_latency, multiplier=args.multiplier,
    )


def _check_bandwidth(args, d, paths) -> None:
    if args.bandwidth is not None and d * paths != args.bandwidth:
        raise NttError(f"d*paths = {d * paths} does not match the pinned bandwidth {args.bandwidth}")


def _load_vector(path, q: int, n: int) -> list:
    vec = CoefficientVector.from_json(Path(path).read_text())
    if vec.q != q or len(vec.values) != n:
        raise NttError(f"{path}: vector has q={vec.q}, n={len(vec.values)}; expected q={q}, n={n}")
    return list(vec.values)


def _expected(cfg, a) -> list:
    ref = naive_ntt(a, cfg.domain) if cfg.direction == "forward" else naive_intt(a, cfg.domain)
    return ref if cfg.reorder_output else bit_reverse_permutation(ref)


def cmd_verify(args) -> tuple:
    _check_bandwidth(args, args.d, args.paths)
    cfg = _config(args)
    pl = build_pipeline(cfg)
    rng = random.Random(args.seed)
    q = cfg.domain.q
    vectors = []
    if args.input:
        vectors.append(_load_vector(args.input, q, cfg.n))
    vectors += [[rng.randrange(q) for _ in range(cfg.n)] for _ in range(args.trials)]
    failures, range_viol, cycles = [], 0, set()
    for i, a in enumerate(vectors):
        out, rep = run(pl, a)
        range_viol += rep.range_violations + rep.carry_violations
        cycles.add(rep.total_cycles)
        if out != _expected(cfg, a):
            failures.append({"trial": i, "input": [str(v) for v in a]})
    body = {
        "trials": len(vectors),
        "passed": len(vectors) - len(failures),
        "failures": failures,
        "range_violations": range_viol,
        "total_cycles": sorted(cycles),
        "predicted_total_cycles": cycle_model(cfg),
    }
    ok = not failures and range_viol == 0
    return cfg.echo(), body, ok


def cmd_bench(args) -> tuple:
    _check_bandwidth(args, args.d, args.paths)
    cfg = _config(args)
    pl = build_pipeline(cfg)
    rng = random.Random(args.seed)
    a = [rng.randrange(cfg.domain.q) for _ in range(cfg.n)]
    out, rep = run(pl, a)
    if args.trace:
        from dsntt.pipeline.trace import write_trace

        fmt = "jsonl" if args.trace.endswith(".jsonl") else "csv"
        with open(args.trace, "w") as fp:
            write_trace(pl, a, fp, fmt)
    body = {"report": rep.to_dict(), "measured_total_cycles": rep.total_cycles,
            "predicted_total_cycles": cycle_model(cfg)}
    ok = out == _expected(cfg, a) and rep.total_cycles == cycle_model(cfg)
    return cfg.echo(), body, ok


def cmd_sweep(args) -> tuple:
    digits = [int(x) for x in args.digits.split(",")] if args.digits else [args.d]
    bw = args.bandwidth if args.bandwidth is not None else 256
    rows = []
    rng = random.Random(args.seed)
    q = _resolve_q(args, args.n)
    a = [rng.randrange(q) for _ in range(args.n)]
    for d in digits:
        if args.paths_given:
            paths = args.paths
            if d * paths != bw:
                raise NttError(f"d={d} with paths={paths} gives {d * paths} bits/cycle, pinned {bw}")
        else:
            if bw % d:
                raise NttError(f"bandwidth {bw} is not a multiple of d={d}")
            paths = bw // d
        cfg = PipelineConfig.create(args.n, q, d, paths, args.direction,
                                    pe_latency=args.pe_latency, multiplier=args.multiplier)
        pl = build_pipeline(cfg)
        out, rep = run(pl, a)
        rows.append({
            "d": d,
            "paths": paths,
            "num_digits": pl.nd,
            "pe_count": pl.pe_count,
            "multipliers": paths * (pl.S + pl.log_p + 1),
            "stages_per_path": pl.S,
            "buffer_digit_slots": paths * sum(pl.buffer_capacity(s) for s in range(pl.S)),
            "bits_per_cycle": rep.steady_input_bits_per_cycle,
            "total_cycles": rep.total_cycles,
            "predicted_total_cycles": cycle_model(cfg),
            "correct": out == _expected(cfg, a),
        })
    cyc = [r["total_cycles"] for r in rows]
    body = {"bandwidth": bw, "rows": rows, "cycle_ratio_max_min": max(cyc) / min(cyc)}
    ok = all(r["correct"] and r["total_cycles"] == r["predicted_total_cycles"] for r in rows)
    echo = {"n": args.n, "q": str(q), "digits": digits, "bandwidth": bw,
            "direction": args.direction, "pe_latency": args.pe_latency}
    return echo, body, ok


def convolve_via_pipeline(fwd_pl, inv_pl, a, b) -> list:
    """NTT both operands, multiply pointwise in Montgomery form, INTT."""
    ctx = fwd_pl.ctx
    A, _ = run(fwd_pl, a)
    B, _ = run(fwd_pl, b)
    C = [finalize(mont_mul_lazy(to_montgomery(x, ctx), to_montgomery(y, ctx), ctx), ctx)
         for x, y in zip(A, B)]
    c, _ = run(inv_pl, C)
    return c


def cmd_convolve(args) -> tuple:
    _check_bandwidth(args, args.d, args.paths)
    fwd = _config(args, direction="forward", reorder=True)
    inv = _config(args, direction="inverse", reorder=True)
    q = fwd.domain.q
    rng = random.Random(args.seed)
    a = _load_vector(args.input_a, q, fwd.n) if args.input_a else [rng.randrange(q) for _ in range(fwd.n)]
    b = _load_vector(args.input_b, q, fwd.n) if args.input_b else [rng.randrange(q) for _ in range(fwd.n)]
    c = convolve_via_pipeline(build_pipeline(fwd), build_pipeline(inv), a, b)
    want = cyclic_convolve(a, b, q)
    body = {"product": [str(v) for v in c], "matches_schoolbook": c == want}
    return fwd.echo(), body, c == want


COMMANDS = {"verify": cmd_verify, "bench": cmd_bench, "sweep": cmd_sweep, "convolve": cmd_convolve}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dsntt", description=__doc__.splitlines()[0])
    p.add_argument("--mode", choices=sorted(COMMANDS), required=True)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--q", type=int, default=None, help="modulus (prime, n | q-1)")
    p.add_argument("--q-bits", type=int, default=64, help="pick the smallest NTT prime of this width")
    p.add_argument("--d", type=int, default=4, help="digit size in bits")
    p.add_argument("--paths", type=int, default=None)
    p.add_argument("--direction", choices=["forward", "inverse"], default="forward")
    p.add_argument("--bandwidth", type=int, default=None,
                   help="pin d*paths (sweep defaults to 256)")
    p.add_argument("--digits", default=None, help="comma separated digit sizes for sweep")
    p.add_argument("--pe-latency", type=int, default=4)
    p.add_argument("--multiplier", choices=["systolic", "wordlevel"], default="systolic")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--input", default=None, help="JSON vector {q, n, values}")
    p.add_argument("--input-a", default=None)
    p.add_argument("--input-b", default=None)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--trace", default=None, help="bench: write a per-cycle trace (.csv or .jsonl)")
    return p


def _csv(report: dict) -> str:
    buf = io.StringIO()
    body = report["result"]
    rows = body.get("rows")
    if rows is None:
        flat = {k: v for k, v in body.items() if not isinstance(v, (list, dict))}
        if "report" in body:
            flat.update({k: v for k, v in body["report"].items() if not isinstance(v, (list, dict))})
        rows = [flat]
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.paths_given = args.paths is not None
    if args.paths is None:
        args.paths = 1
    try:
        echo, body, ok = COMMANDS[args.mode](args)
    except NttError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    report = {
        "mode": args.mode,
        "version": version_string(),
        "seed": args.seed,
        "prng": PRNG,
        "config": echo,
        "status": "pass" if ok else "fail",
        "result": body,
    }
    text = _csv(report) if args.format == "csv" else json.dumps(report, sort_keys=True, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
