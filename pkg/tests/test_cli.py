import csv
import json

import pytest

from upmsp.cli import main
from upmsp.exhaustive import optimal_makespan
from upmsp.instances import read_instance
from upmsp.neighbourhoods import NEIGHBOURHOODS
from upmsp.regression import load_models
from upmsp.telemetry import read_events

FAST = ["--budget-ms", "0", "--max-iters", "1500"]


def run(capsys, *argv):
    try:
        code = main([str(a) for a in argv])
    except SystemExit as exc:
        code = exc.code
    out = capsys.readouterr()
    return code, out.out, out.err


def test_generate_one_file_deterministically(tmp_path, capsys):
    args = ["generate", "--machines", 2, "--jobs", 10, "--max-setup", 9, "--seed", 1]
    code, out, _ = run(capsys, *args, "--out", tmp_path / "a")
    assert code == 0
    path = tmp_path / "a" / "inst_M2_J10_S9_s1.txt"
    assert out.strip() == str(path)
    inst = read_instance(path)
    assert (inst.n_machines, inst.n_jobs, inst.max_setup) == (2, 10, 9)
    run(capsys, *args, "--out", tmp_path / "b")
    assert path.read_bytes() == (tmp_path / "b" / path.name).read_bytes()


def test_generate_several_cells(tmp_path, capsys):
    code, out, _ = run(capsys, "generate", "--machines", 2, 4, "--jobs", 20,
                       "--max-setup", 9, "--count", 2, "--out", tmp_path)
    assert code == 0
    files = sorted(tmp_path.glob("*.txt"))
    assert len(files) == 4 == len(out.split())
    for f in files:
        read_instance(f)


def test_seed_from_environment(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("UPMSP_SEED", "17")
    run(capsys, "generate", "--machines", 2, "--jobs", 5, "--max-setup", 9,
        "--out", tmp_path)
    assert (tmp_path / "inst_M2_J5_S9_s17.txt").exists()
    monkeypatch.setenv("UPMSP_SEED", "many")
    code, _, err = run(capsys, "generate", "--machines", 2, "--jobs", 5,
                       "--max-setup", 9, "--out", tmp_path)
    assert code == 1 and "UPMSP_SEED" in err


@pytest.fixture
def tiny(tmp_path, capsys):
    run(capsys, "generate", "--machines", 2, "--jobs", 6, "--max-setup", 49,
        "--seed", 3, "--out", tmp_path)
    return tmp_path / "inst_M2_J6_S49_s3.txt"


def test_solve_with_exhaustive_check(tiny, capsys):
    code, out, _ = run(capsys, "solve", "--instance", tiny, "--seed", 2,
                       "--exhaustive-check", *FAST)
    assert code == 0
    result = json.loads(out)
    opt = optimal_makespan(read_instance(tiny))[0]
    assert result["exhaustive_optimum"] == opt
    assert result["cmax"] >= opt
    assert result["optimal"] == (result["cmax"] == opt)


def test_solve_is_repeatable(tiny, tmp_path, capsys):
    outs, logs = [], []
    for name in ("a", "b"):
        tele = tmp_path / f"{name}.jsonl"
        code, out, _ = run(capsys, "solve", "--instance", tiny, "--seed", 4,
                           "--telemetry", tele, *FAST)
        assert code == 0
        outs.append(json.loads(out))
        logs.append([{k: v for k, v in e.to_dict().items() if k != "elapsed_ms"}
                     for e in read_events(tele)])
    outs[0].pop("telemetry"), outs[1].pop("telemetry")
    assert outs[0] == outs[1]
    assert logs[0] == logs[1] and len(logs[0]) == outs[0]["recorded_events"] > 0


def test_solve_accepts_budget_plateaus(tiny, capsys):
    code, out, _ = run(capsys, "solve", "--instance", tiny, "--plateau", "budget", *FAST)
    assert code == 0 and json.loads(out)["iterations"] == 1500
    code, _, _ = run(capsys, "solve", "--instance", tiny, "--plateau", "often", *FAST)
    assert code == 1


@pytest.mark.parametrize("extra", [
    ["--policy", "adaptive"], ["--t0", "warm"], ["--record-every", "0"],
    ["--alpha", "1.5"], ["--budget-ms", "0", "--max-iters", "0"],
])
def test_solve_usage_errors(tiny, capsys, extra):
    code, _, err = run(capsys, "solve", "--instance", tiny, *extra)
    assert code == 1 and err


def test_data_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("2 1 5\n3\n", encoding="utf-8")
    code, _, err = run(capsys, "solve", "--instance", bad, *FAST)
    assert code == 2 and "truncated" in err
    code, _, err = run(capsys, "solve", "--instance", tmp_path / "missing.txt", *FAST)
    assert code == 1 and "missing.txt" in err
    big = tmp_path / "big"
    run(capsys, "generate", "--machines", 2, "--jobs", 12, "--max-setup", 9,
        "--out", big)
    code, _, err = run(capsys, "solve", "--instance", next(big.glob("*.txt")),
                       "--exhaustive-check", *FAST)
    assert code == 1 and "8 jobs" in err


def test_missing_subcommand_is_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main([])
    assert info.value.code == 1


def test_pipeline_small_grid(tmp_path, capsys):
    out = tmp_path / "exp"
    code, msg, _ = run(capsys, "experiment", "--grid", "M=2,3;J=6,8;S=9",
                       "--instances-per-cell", 1, "--seeds", 0, 1, "--out-dir", out,
                       "--jobs-parallel", 1, *FAST)
    assert code == 0 and "8 runs" in msg
    assert len(list((out / "telemetry").glob("*.jsonl"))) == 8
    with open(out / "runs.csv", encoding="utf-8") as fh:
        assert len(list(csv.DictReader(fh))) == 8

    model = tmp_path / "models.json"
    code, msg, _ = run(capsys, "fit", "--telemetry", out / "telemetry", "--out", model)
    assert code == 0 and len(msg.splitlines()) == 6
    assert set(load_models(model)) == set(NEIGHBOURHOODS)
    code, _, err = run(capsys, "fit", "--telemetry", out / "telemetry", "--out", model,
                       "--aliased", "raise")
    assert code == 2 and "offending columns" in err

    table = tmp_path / "compare.csv"
    code, _, _ = run(capsys, "compare", "--instances", out / "instances", "--model", model,
                     "--seeds", 0, 1, "--out", table, "--jobs-parallel", 1, *FAST)
    assert code == 0
    with open(table, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 8
    assert all(r["cmax_uniform"] and r["cmax_adaptive"] for r in rows)
    assert all(int(r["difference"]) == int(r["cmax_adaptive"]) - int(r["cmax_uniform"])
               for r in rows)

    rep = tmp_path / "report"
    code, msg, _ = run(capsys, "report", "--in", out / "telemetry", model, table,
                       "--out-dir", rep)
    assert code == 0
    assert len(list(rep.glob("*.svg"))) == 6
    assert (rep / "comparison_summary.csv").exists()


def test_compare_shape(tmp_path, capsys):
    inst_dir = tmp_path / "inst"
    run(capsys, "generate", "--machines", 2, "--jobs", 5, "--max-setup", 9,
        "--count", 10, "--out", inst_dir)
    exp = tmp_path / "exp"
    run(capsys, "experiment", "--grid", "M=2,3;J=6,8;S=9", "--instances-per-cell", 1,
        "--out-dir", exp, "--jobs-parallel", 1, *FAST)
    model = tmp_path / "m.json"
    assert run(capsys, "fit", "--telemetry", exp / "telemetry", "--out", model)[0] == 0
    table = tmp_path / "cmp.csv"
    code, _, _ = run(capsys, "compare", "--instances", inst_dir, "--model", model,
                     "--seeds", 0, 1, 2, 3, 4, "--out", table, "--jobs-parallel", 1,
                     "--budget-ms", 0, "--max-iters", 300)
    assert code == 0
    with open(table, encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 50
    assert all(r["cmax_uniform"] and r["cmax_adaptive"] for r in rows)


def test_report_needs_telemetry(tmp_path, capsys):
    code, _, err = run(capsys, "report", "--in", tmp_path / "nothing", "--out-dir", tmp_path)
    assert code == 1 and "telemetry" in err


def test_compare_input_errors(tiny, tmp_path, capsys):
    code, _, _ = run(capsys, "compare", "--instances", tiny, "--model",
                     tmp_path / "none.json", "--seeds", 0, "--out", tmp_path / "c.csv",
                     *FAST)
    assert code == 1
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2", encoding="utf-8")
    code, _, err = run(capsys, "compare", "--instances", tiny, "--model", broken,
                       "--seeds", 0, "--out", tmp_path / "c.csv", *FAST)
    assert code == 2 and "model" in err
