import json
from importlib import resources

import jsonschema
import pytest

from dsntt.cli import main
from dsntt.params import find_ntt_prime
from dsntt.reference import CoefficientVector


@pytest.fixture(scope="module")
def schema():
    return json.loads(resources.files("dsntt.schemas").joinpath("report.schema.json").read_text())


def invoke(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_verify_example(capsys, schema):
    code, out, _ = invoke(capsys, "--mode", "verify", "--n", "8", "--q", "17", "--d", "4",
                          "--paths", "2", "--trials", "100", "--seed", "1")
    rep = json.loads(out)
    jsonschema.validate(rep, schema)
    assert code == 0 and rep["status"] == "pass"
    assert rep["result"]["trials"] == rep["result"]["passed"] == 100
    assert rep["seed"] == 1 and rep["prng"]


def test_verify_is_reproducible(capsys):
    args = ("--mode", "verify", "--n", "16", "--q", "17", "--d", "4", "--trials", "5", "--seed", "9")
    assert invoke(capsys, *args)[1] == invoke(capsys, *args)[1]


def test_verify_config_error(capsys):
    code, out, err = invoke(capsys, "--mode", "verify", "--n", "4", "--paths", "4")
    assert code == 2 and out == "" and "error" in err


def test_verify_zero_trials(capsys, schema):
    code, out, _ = invoke(capsys, "--mode", "verify", "--n", "8", "--q", "17", "--trials", "0")
    rep = json.loads(out)
    jsonschema.validate(rep, schema)
    assert code == 0 and rep["result"]["trials"] == 0


def test_verify_json_input(tmp_path, capsys):
    f = tmp_path / "v.json"
    f.write_text(CoefficientVector((1, 2, 3, 4), 13).to_json())
    code, out, _ = invoke(capsys, "--mode", "verify", "--n", "4", "--q", "13", "--trials", "0",
                          "--input", str(f))
    assert code == 0 and json.loads(out)["result"]["trials"] == 1
    code, _, _ = invoke(capsys, "--mode", "verify", "--n", "8", "--q", "17", "--input", str(f))
    assert code == 2


def test_bench_wide(capsys, schema):
    code, out, _ = invoke(capsys, "--mode", "bench", "--n", "128", "--q-bits", "253", "--d", "32",
                          "--paths", "8", "--bandwidth", "256")
    rep = json.loads(out)
    jsonschema.validate(rep, schema)
    multi = rep["result"]["measured_total_cycles"]
    assert code == 0 and multi == rep["result"]["predicted_total_cycles"]
    code, out, _ = invoke(capsys, "--mode", "bench", "--n", "128", "--q-bits", "253", "--d", "256",
                          "--paths", "1", "--multiplier", "wordlevel", "--bandwidth", "256")
    assert code == 0 and json.loads(out)["result"]["measured_total_cycles"] > multi


def test_bench_bandwidth_mismatch(capsys):
    code, _, _ = invoke(capsys, "--mode", "bench", "--n", "8", "--q", "17", "--d", "4",
                        "--paths", "2", "--bandwidth", "256")
    assert code == 2


def test_bench_csv_and_trace(tmp_path, capsys):
    trace = tmp_path / "t.csv"
    code, out, _ = invoke(capsys, "--mode", "bench", "--n", "8", "--q", "17", "--format", "csv",
                          "--trace", str(trace))
    assert code == 0 and out.startswith("measured_total_cycles,")
    assert trace.read_text().startswith("cycle,stage,phase,link,digit")


def test_out_file(tmp_path, capsys):
    f = tmp_path / "r.json"
    code, out, _ = invoke(capsys, "--mode", "bench", "--n", "8", "--q", "17", "--out", str(f))
    assert code == 0 and out == "" and json.loads(f.read_text())["mode"] == "bench"


def test_convolve(capsys, schema):
    code, out, _ = invoke(capsys, "--mode", "convolve", "--n", "64", "--q", str(find_ntt_prime(14, 64)),
                          "--d", "4", "--paths", "4", "--seed", "3")
    rep = json.loads(out)
    jsonschema.validate(rep, schema)
    assert code == 0 and rep["result"]["matches_schoolbook"]


def test_sweep_mismatch(capsys):
    code, _, _ = invoke(capsys, "--mode", "sweep", "--n", "64", "--q-bits", "253", "--digits", "16,32",
                        "--paths", "8")
    assert code == 2


@pytest.fixture(scope="module")
def sweep_report():
    import contextlib
    import io

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["--mode", "sweep", "--n", "1024", "--q-bits", "253", "--digits", "16,32,64,128"])
    return code, json.loads(buf.getvalue())


def test_sweep_rows(sweep_report, schema):
    code, rep = sweep_report
    jsonschema.validate(rep, schema)
    assert code == 0
    rows = rep["result"]["rows"]
    assert [r["d"] * r["paths"] for r in rows] == [256] * 4
    assert all(r["bits_per_cycle"] == 256 for r in rows)


def test_sweep_ratio_calibrated(sweep_report):
    # measured 2752/2136 with the default 4-cycle PE
    assert sweep_report[1]["result"]["cycle_ratio_max_min"] == pytest.approx(2752 / 2136)


@pytest.mark.xfail(strict=True, reason="max/min ratio is 1.288 with a 4-cycle PE; see ledger")
def test_sweep_nearly_constant(sweep_report):
    assert sweep_report[1]["result"]["cycle_ratio_max_min"] <= 1.25
