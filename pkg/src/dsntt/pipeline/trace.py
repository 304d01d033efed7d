"""Per-cycle trace emission for golden-trace diffing.

One record per cycle per observation point with fixed columns
(cycle, stage, phase, link, digit). ``digit`` is empty when the link is idle.
"""

from __future__ import annotations

import csv
import hashlib
import json

from dsntt.pipeline.runner import load

COLUMNS = ("cycle", "stage", "phase", "link", "digit")


def iter_trace(pl, values):
    sim = load(pl, values)
    while True:
        obs = sim.step()
        if obs["idle"]:
            return
        phases = {f"p{s['path']}.s{s['stage']}": s["phase"] for s in obs["stages"]}
        for link, digit in obs["links"].items():
            unit = link.rsplit(".", 1)[0] if link.startswith("p") else link
            yield (obs["cycle"], unit, phases.get(unit, "-"), link, "" if digit is None else str(digit))


def write_trace(pl, values, fp, fmt: str = "csv") -> int:
    rows = 0
    if fmt == "csv":
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(COLUMNS)
        for rec in iter_trace(pl, values):
            writer.writerow(rec)
            rows += 1
    elif fmt == "jsonl":
        for rec in iter_trace(pl, values):
            fp.write(json.dumps(dict(zip(COLUMNS, rec))) + "\n")
            rows += 1
    else:
        raise ValueError(f"unknown trace format {fmt!r}")
    return rows


def trace_hash(pl, values) -> str:
    h = hashlib.sha256()
    for rec in iter_trace(pl, values):
        h.update(repr(rec).encode())
    return h.hexdigest()
