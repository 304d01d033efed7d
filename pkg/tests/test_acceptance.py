"""Acceptance suite: ten criteria, one PASS/FAIL line each.

Run with ``python3 -m pytest tests/test_acceptance.py -v`` (the verdict
lines are printed even without ``-s``) or ``python3 tests/test_acceptance.py``.
"""

import functools
import random

import pytest
from sympy import primerange

from conftest import ext_euclid_inverse
from dsntt.digitflow import SystolicMultiplier
from dsntt.montcore import butterfly_cube_scan, butterfly_lazy, finalize, mont_mul_lazy, redc, to_montgomery
from dsntt.params import MontgomeryContext, build_context, build_domain, find_ntt_prime
from dsntt.pipeline import PipelineConfig, build_pipeline, cycle_model, load, run
from dsntt.cli import convolve_via_pipeline
from dsntt.reference import bit_reverse_permutation, cyclic_convolve, naive_ntt

pytestmark = pytest.mark.slow

Q_SMALL = find_ntt_prime(17, 1024)
Q_64 = find_ntt_prime(64, 1024)
Q_WIDE = find_ntt_prime(253, 1024)
Q_CLASSES = {"small": Q_SMALL, "64-bit": Q_64, "253-bit": Q_WIDE}
SIZES = [4, 8, 16, 64, 256, 1024]
DIGITS = [4, 8, 16, 32]
PATHS = [1, 2, 4, 8]
VECTORS = 20


@pytest.fixture
def verdict(capsys):
    def report(k, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {k:>2}: {'PASS' if ok else 'FAIL'}  {detail}")
        assert ok, detail
    return report


def _vectors(q, n):
    rng = random.Random(q ^ n)
    return [[rng.randrange(q) for _ in range(n)] for _ in range(VECTORS)]


@functools.lru_cache(maxsize=None)
def _expected(q, n):
    dom = build_domain(q, n, 4)
    return [bit_reverse_permutation(naive_ntt(a, dom)) for a in _vectors(q, n)]


def _matrix():
    for label, q in Q_CLASSES.items():
        for n in SIZES:
            for d in DIGITS:
                for paths in PATHS:
                    if n // paths >= 2:
                        yield label, q, n, d, paths


@pytest.fixture(scope="module")
def matrix_runs():
    """Run every valid combination once; criteria 1, 7 and 9 share the reports."""
    runs = []
    for label, q, n, d, paths in _matrix():
        pl = build_pipeline(PipelineConfig.create(n, q, d, paths))
        want = _expected(q, n)
        mism = 0
        reports = []
        for a, ref in zip(_vectors(q, n), want):
            out, rep = run(pl, a)
            mism += out != ref
            reports.append(rep)
        runs.append(((label, n, d, paths), pl, mism, reports))
    return runs


def test_c01_oracle_equivalence(matrix_runs, verdict):
    bad = [key for key, _, mism, _ in matrix_runs if mism]
    vecs = sum(len(r) for *_, r in matrix_runs)
    verdict(1, not bad, f"{len(matrix_runs)} combos, {vecs} vectors, mismatching combos: {bad[:5]}")


def test_c02_range_closure(verdict):
    cases = viol = cong = 0
    for q in primerange(3, 64):
        for d in (1, 4, 8):
            res = butterfly_cube_scan(build_context(q, d))
            cases += res["cases"]
            viol += res["range_violations"]
            cong += res["congruence_failures"]
    ctx = build_context(Q_WIDE, 32)
    r_inv = ext_euclid_inverse(ctx.R % Q_WIDE, Q_WIDE)
    rng = random.Random(2)
    tq = 2 * Q_WIDE
    rand = 1_000_000
    for _ in range(rand):
        ai, aj, wa, ws = rng.randrange(tq), rng.randrange(tq), rng.randrange(tq), rng.randrange(tq)
        t_add, t_sub = butterfly_lazy(ai, aj, wa, ws, ctx)
        if t_add >= tq or t_sub >= tq:
            viol += 1
        if t_add % Q_WIDE != (ai + aj) * wa * r_inv % Q_WIDE or t_sub % Q_WIDE != (ai - aj) * ws * r_inv % Q_WIDE:
            cong += 1
    verdict(2, viol == 0 and cong == 0,
            f"{cases} exhaustive + {rand} random butterflies, range violations {viol}, congruence failures {cong}")


def test_c03_margin_necessity(verdict):
    tested = exceptions = 0
    for q in list(primerange(3, 5000)) + [2 ** 61 - 1, 2 ** 127 - 1, Q_WIDE]:
        w = (q - 1).bit_length()
        for r_exp in (w, w + 1):
            if 1 << r_exp > 4 * q or 1 << r_exp <= q:
                continue
            ctx = MontgomeryContext(q, 1, r_exp, check_radix=False)
            x = 2 * q - 1
            t_add, t_sub = butterfly_lazy(x, x, x, x, ctx, checked=False)
            r_inv = ext_euclid_inverse(ctx.R % q, q)
            tested += 1
            if not (t_add >= 2 * q and t_add % q == 2 * x * x * r_inv % q and t_sub % q == 0):
                exceptions += 1
    verdict(3, tested > 0 and exceptions == 0, f"{tested} (q, R<=4q) pairs, exceptions {exceptions}")


def test_c04_redc(verdict):
    rng = random.Random(4)
    fails = checks = 0
    for q in (13, 17, Q_SMALL, Q_64, 2 ** 127 - 1, Q_WIDE):
        ctx = build_context(q, 8)
        r_inv = ext_euclid_inverse(ctx.R % q, q)
        bound = q * ctx.R
        for _ in range(170_000):
            p = rng.randrange(bound)
            r = redc(p, ctx)
            checks += 1
            if r >= 2 * q or r % q != p * r_inv % q:
                fails += 1
    fin = 0
    for q in primerange(3, 64):
        ctx = build_context(q, 4)
        for a in range(q):
            fin += 1
            fails += finalize(to_montgomery(a, ctx), ctx) != a
    for q in (Q_64, Q_WIDE):
        ctx = build_context(q, 32)
        for _ in range(10_000):
            a = rng.randrange(q)
            fin += 1
            fails += finalize(to_montgomery(a, ctx), ctx) != a
    verdict(4, fails == 0 and checks >= 1_000_000, f"{checks} redc + {fin} round trips, failures {fails}")


@pytest.mark.parametrize("q,d", [(13, 4), (Q_SMALL, 8), (Q_64, 16), (Q_WIDE, 32)])
def test_c05_systolic(q, d, verdict):
    ctx = build_context(q, d)
    rng = random.Random(q)
    k = 100_000
    pairs = [(rng.randrange(2 * q), rng.randrange(2 * q)) for _ in range(k)]
    mult = SystolicMultiplier(ctx)
    res, first = mult.stream(pairs)
    mism = sum(r != mont_mul_lazy(a, b, ctx) for r, (a, b) in zip(res, pairs))
    nd = ctx.num_digits
    # the k-th result leaves completely at latency + (k-1)*nd + nd cycles after the first input
    timing = first[-1] == mult.latency + (k - 1) * nd and first == [mult.latency + i * nd for i in range(k)]
    verdict(5, mism == 0 and len(res) == k and timing,
            f"q={q.bit_length()}b d={d}: {k} pairs, mismatches {mism}, "
            f"last issue at {first[-1]} = L + (k-1)*nd: {timing}")


def test_c06_cycle_ordering(verdict):
    multi, base = [], []
    for n in (128, 256, 512, 1024):
        cm = PipelineConfig.create(n, Q_WIDE, 32, 8)
        cb = PipelineConfig.create(n, Q_WIDE, 256, 1, multiplier="wordlevel")
        assert cm.bandwidth == cb.bandwidth == 256
        a = _vectors(Q_WIDE, n)[0]
        rm = run(build_pipeline(cm), a)[1].total_cycles
        rb = run(build_pipeline(cb), a)[1].total_cycles
        assert rm == cycle_model(cm) and rb == cycle_model(cb)
        multi.append(rm)
        base.append(rb)
    ordered = all(m < b for m, b in zip(multi, base))
    monotone = all(x < y for x, y in zip(multi, multi[1:])) and all(x < y for x, y in zip(base, base[1:]))
    verdict(6, ordered and monotone, f"8 paths x 32b: {multi}, 1 path x 256b: {base}")


def test_c07_bandwidth(matrix_runs, verdict):
    bad = []
    for key, pl, _, reports in matrix_runs:
        want = pl.ctx.d * pl.P
        for rep in reports:
            if (rep.steady_input_bits_per_cycle != want
                    or rep.input_digits_per_cycle_min != pl.P or rep.input_digits_per_cycle_max != pl.P):
                bad.append(key)
                break
    verdict(7, not bad, f"{len(matrix_runs)} combos consume exactly d*paths bits every input cycle; bad: {bad[:5]}")


def test_c08_convolution(verdict):
    rng = random.Random(8)
    fails = total = 0
    for n, q, d, paths in ((8, Q_64, 8, 2), (64, Q_64, 16, 4), (256, Q_WIDE, 32, 8)):
        fwd = build_pipeline(PipelineConfig.create(n, q, d, paths, "forward", reorder_output=True))
        inv = build_pipeline(PipelineConfig.create(n, q, d, paths, "inverse", reorder_output=True))
        for _ in range(50):
            a = [rng.randrange(q) for _ in range(n)]
            b = [rng.randrange(q) for _ in range(n)]
            total += 1
            fails += convolve_via_pipeline(fwd, inv, a, b) != cyclic_convolve(a, b, q)
    verdict(8, fails == 0, f"{total} pairs over n in (8, 64, 256), mismatches {fails}")


def test_c09_buffer_sizing(matrix_runs, verdict):
    # stage i (1-based) holds num_digits * n_local / 2^i digit slots
    bad = []
    for key, pl, _, reports in matrix_runs:
        want = [pl.nd * pl.m // 2 ** i for i in range(1, pl.S + 1)]
        if any(rep.max_buffer_occupancy != want or rep.buffer_capacity != want for rep in reports):
            bad.append(key)
    traced = overflow = 0
    for n, q, d, paths in ((8, 17, 4, 1), (16, 17, 4, 2), (64, Q_64, 8, 4), (256, Q_WIDE, 32, 8)):
        pl = build_pipeline(PipelineConfig.create(n, q, d, paths))
        want = [pl.nd * pl.m // 2 ** i for i in range(1, pl.S + 1)]
        sim = load(pl, _vectors(q, n)[0])
        peak = [0] * pl.S
        while True:
            obs = sim.step()
            if obs["idle"]:
                break
            for st in obs["stages"]:
                s = st["stage"]
                peak[s] = max(peak[s], st["occupancy"])
                overflow += st["occupancy"] > want[s]
        traced += 1
        if peak != want:
            bad.append(("trace", n, d, paths))
    verdict(9, not bad and overflow == 0,
            f"{len(matrix_runs)} reports + {traced} traces match nd*n_local/2^i, overflows {overflow}, bad {bad[:5]}")


def test_c10_structure(verdict):
    bad = []
    for n, q, d, paths in ((8, 17, 4, 2), (1024, Q_WIDE, 32, 8), (256, Q_64, 16, 1)):
        pl = build_pipeline(PipelineConfig.create(n, q, d, paths))
        nd = pl.ctx.num_digits
        sim = load(pl, [0] * n)
        mults = [m.mult for row in sim.stage_mults for m in row] + [m.mult for m in sim.exit_mults] \
            + [m.mult for row in sim.merge_mults for m in row]
        ok = (pl.pe_count == nd and all(m.pe_count == nd for m in mults)
              and pl.stage_count == (n // paths).bit_length() - 1
              and all(len(row) == pl.stage_count for row in sim.stages))
        if not ok:
            bad.append((n, d, paths))
    verdict(10, not bad, f"3 configs, PE count = num_digits and stages = log2(n/paths); bad {bad}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
