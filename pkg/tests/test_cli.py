import json
from pathlib import Path

import pytest

from anticonc.cli import SCHEMA_VERSION, main

CORPUS = Path(__file__).resolve().parents[1] / "src" / "anticonc" / "data" / "corpus"
ONES10 = CORPUS / "02-ones-10.json"


def run(args, capsys):
    code = main(args)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_q_exact_known_value(capsys, tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({
        "id": "flat",
        "distribution": "rademacher",
        "weights": [[1.0]] * 10,
        "parameters": {"tau": 0.0},
    }))
    code, out, _ = run(["q", str(inst)], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["value"] == 0.24609375
    assert obj["method"] == "exact"
    assert obj["spec_version"] == SCHEMA_VERSION


def test_q_methods_mc_and_esseen(capsys):
    code, out, _ = run(["q", str(ONES10), "--method", "mc", "--budget", "20000"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["method"] == "monte_carlo"
    assert abs(obj["value"] - 0.24609375) < 0.02
    code, out, _ = run(["q", str(ONES10), "--method", "esseen"], capsys)
    assert code == 0
    assert json.loads(out)["method"] == "esseen_upper"


def test_malformed_json_is_exit_two(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"id": "x", ')
    code, _, err = run(["q", str(bad)], capsys)
    assert code == 2
    assert "malformed JSON" in err


def test_missing_parameter_is_exit_two(capsys, tmp_path):
    inst = tmp_path / "inst.json"
    inst.write_text(json.dumps({
        "id": "no-tau",
        "distribution": "rademacher",
        "weights": [[1.0]],
    }))
    code, _, err = run(["q", str(inst)], capsys)
    assert code == 2
    assert "tau" in err


def test_capacity_is_exit_three(capsys, tmp_path):
    import numpy as np
    rng = np.random.default_rng(1)
    inst = tmp_path / "big.json"
    inst.write_text(json.dumps({
        "id": "big",
        "distribution": "rademacher",
        "weights": [[float(v)] for v in rng.normal(size=40)],
        "parameters": {"tau": 1.0},
    }))
    code, _, err = run(["q", str(inst), "--budget", "5000"], capsys)
    assert code == 3
    assert "capacity" in err.lower()


def test_lcd_command(capsys):
    code, out, _ = run(["lcd", str(CORPUS / "12-lcd-ones-09-g5a10.json")], capsys)
    assert code == 0
    obj = json.loads(out)
    lcd = obj["lcd"]
    assert lcd["certified"] and lcd["converged"]
    assert lcd["d_lower"] <= 2.0 / 3.0 <= lcd["d_upper"] + 1e-6


def test_bounds_json_and_csv(capsys, tmp_path):
    out_json = tmp_path / "rep.json"
    code = main(["bounds", str(ONES10), "--budget", "5000", "--out", str(out_json)])
    assert code == 0
    obj = json.loads(out_json.read_text())
    assert obj["spec_version"] == SCHEMA_VERSION
    assert len(obj["reports"]) == 1
    rep = obj["reports"][0]
    assert rep["instance"] == "02-ones-10"
    assert "transfer_plain" in rep["bounds"]

    out_csv = tmp_path / "rep.csv"
    code = main([
        "bounds", str(ONES10), "--budget", "5000",
        "--format", "csv", "--out", str(out_csv),
    ])
    assert code == 0
    lines = out_csv.read_text().strip().split("\n")
    assert lines[0].startswith("instance,tag,value,vacuous,target")
    assert all(line.split(",")[0] == "02-ones-10" for line in lines[1:])


def test_bounds_grid_is_sorted_and_repeatable(tmp_path):
    out1 = tmp_path / "grid1.csv"
    out2 = tmp_path / "grid2.csv"
    args = ["bounds", str(CORPUS), "--budget", "3000", "--format", "csv"]
    assert main(args + ["--out", str(out1)]) == 0
    assert main(args + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()
    names = [line.split(",")[0] for line in out1.read_text().strip().split("\n")[1:]]
    assert names == sorted(names)


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    args = ["bounds", str(CORPUS), "--budget", "3000", "--format", "csv"]
    seq = tmp_path / "seq.csv"
    par = tmp_path / "par.csv"
    assert main(args + ["--out", str(seq)]) == 0
    monkeypatch.setenv("ANTICONC_THREADS", "4")
    assert main(args + ["--out", str(par)]) == 0
    assert seq.read_bytes() == par.read_bytes()


def test_bad_thread_count_is_exit_two(capsys, monkeypatch):
    monkeypatch.setenv("ANTICONC_THREADS", "zero")
    code, _, err = run(["bounds", str(ONES10), "--budget", "3000"], capsys)
    assert code == 2
    assert "ANTICONC_THREADS" in err


def test_gapfit_command(capsys):
    code, out, _ = run(["gapfit", str(ONES10)], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["beta"]["value"] == 0.0
    assert obj["beta"]["uncovered_count"] == 0.0
    assert obj["window"] == 0.5
    assert "witness" in obj["gamma_fit"]


def test_verify_text_and_exit_codes(capsys, tmp_path):
    code, out, _ = run(["verify"], capsys)
    assert code == 0
    assert out.splitlines()[0] == "instances: 25"
    assert out.splitlines()[-1] == "result: PASS"

    import shutil
    bad_dir = tmp_path / "corpus"
    shutil.copytree(CORPUS, bad_dir)
    target = bad_dir / "01-ones-04.json"
    obj = json.loads(target.read_text())
    obj["expected"]["p"]["value"] = 0.77
    target.write_text(json.dumps(obj))
    code, out, _ = run(["verify", str(bad_dir)], capsys)
    assert code == 1
    assert "first counterexample:" in out
    assert "result: FAIL" in out


def test_verify_seed_determinism(tmp_path):
    a = tmp_path / "a.txt"
    b = tmp_path / "b.txt"
    assert main(["verify", "--seed", "5", "--out", str(a)]) == 0
    assert main(["verify", "--seed", "5", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_verify_json_format(capsys):
    code, out, _ = run(["verify", "--format", "json"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["passed"] is True
    assert obj["spec_version"] == SCHEMA_VERSION
    assert obj["n_instances"] == 25


def test_constants_file_applies(capsys, tmp_path):
    consts = tmp_path / "c.json"
    consts.write_text(json.dumps({"c_d": 2.0}))
    code, out, _ = run(
        ["bounds", str(ONES10), "--budget", "3000", "--constants", str(consts)],
        capsys,
    )
    assert code == 0
    rep = json.loads(out)["reports"][0]
    assert rep["constants"]["c_d"] == 2.0

    consts.write_text(json.dumps({"nope": 1.0}))
    code, _, err = run(
        ["bounds", str(ONES10), "--budget", "3000", "--constants", str(consts)],
        capsys,
    )
    assert code == 2
    assert "nope" in err
