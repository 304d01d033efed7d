"""Time the compiled core against the pure-Python engine on the same vectors.

    python3 benchmarks/bench_engines.py [--repeat 3]

Both engines must produce identical outputs and cycle reports; the script
aborts if they disagree.
"""

import argparse
import random
import time

from dsntt.params import find_ntt_prime
from dsntt.pipeline import HAVE_COMPILED, PipelineConfig, build_pipeline, run

CONFIGS = [
    # n, q bits, d, paths
    (64, 64, 8, 2),
    (256, 64, 16, 4),
    (128, 253, 32, 8),
    (1024, 253, 32, 8),
    (1024, 253, 4, 1),
]


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        res = fn()
        best = min(best, time.perf_counter() - t)
    return best, res


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not HAVE_COMPILED:
        raise SystemExit("compiled core not built; run `pip install --no-build-isolation -e .`")
    print(f"{'n':>5} {'qbits':>5} {'d':>3} {'P':>2} {'cycles':>7} {'python s':>9} {'compiled s':>10} {'speedup':>8}")
    for n, bits, d, paths in CONFIGS:
        q = find_ntt_prime(bits, 1024)
        pl = build_pipeline(PipelineConfig.create(n, q, d, paths))
        rng = random.Random(n)
        a = [rng.randrange(q) for _ in range(n)]
        tp, (op, rp) = best_of(lambda: run(pl, a, "python"), args.repeat)
        tc, (oc, rc) = best_of(lambda: run(pl, a, "compiled"), args.repeat)
        if op != oc or rp.total_cycles != rc.total_cycles:
            raise SystemExit(f"engines disagree at n={n} d={d} paths={paths}")
        print(f"{n:>5} {bits:>5} {d:>3} {paths:>2} {rp.total_cycles:>7} {tp:>9.3f} {tc:>10.4f} {tp / tc:>7.0f}x")


if __name__ == "__main__":
    main()
