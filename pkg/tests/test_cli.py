import csv
import json
import os

import pytest

from conemwu.cli import main

HEADER = ["iteration", "duality_gap_avg_iterates", "regret_sum_scaled", "primal_objective"]


def run_cli(*args):
    return main(list(args))


def read_csv(path):
    with open(path, newline="") as handle:
        return list(csv.reader(handle))


def write_dataset(tmp_path):
    # two linearly separated classes in 3-d
    import numpy as np

    rng = np.random.default_rng(0)
    rows = ["f0,f1,f2,label"]
    for label, center in (("a", 0.0), ("b", 3.0)):
        for point in rng.normal(center, 1.0, size=(25, 3)):
            rows.append(",".join(f"{v:.6f}" for v in point) + f",{label}")
    path = tmp_path / "data.csv"
    path.write_text("\n".join(rows) + "\n")
    return str(path)


# ---------------------------------------------------------------- run


def test_run_matching_pennies_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    rc = run_cli(
        "run", "--experiment", "matching-pennies", "--algo", "both",
        "--eps", "0.1", "--seeds", "0,1", "--record-every", "10", "--out", str(out),
    )
    assert rc == 0
    names = sorted(os.listdir(out))
    assert names == [
        "matching-pennies_manifest.json",
        "matching-pennies_oscmwu_aggregate.csv",
        "matching-pennies_oscmwu_seed0.csv",
        "matching-pennies_oscmwu_seed1.csv",
        "matching-pennies_scmwu_aggregate.csv",
        "matching-pennies_scmwu_seed0.csv",
        "matching-pennies_scmwu_seed1.csv",
    ]
    rows = read_csv(out / "matching-pennies_oscmwu_seed0.csv")
    assert rows[0] == HEADER
    assert rows[1][0] == "10"
    assert rows[-1][0] == "56"  # final round recorded even off cadence
    manifest = json.loads((out / "matching-pennies_manifest.json").read_text())
    assert manifest["eta"] == 0.25
    assert manifest["horizon"] == 56
    assert manifest["seeds"] == [0, 1]
    assert manifest["cone_x"] == {"kind": "orthant", "size": 2}
    assert "created_at" in manifest


def test_run_is_deterministic_across_invocations(tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        rc = run_cli(
            "run", "--experiment", "fermat-weber", "--algo", "oscmwu",
            "--T", "120", "--seeds", "3", "--record-every", "40", "--out", str(out),
        )
        assert rc == 0
    name = "fermat-weber_oscmwu_seed3.csv"
    assert (out_a / name).read_bytes() == (out_b / name).read_bytes()
    # manifests agree except for the timestamp
    man_a = json.loads((out_a / "fermat-weber_manifest.json").read_text())
    man_b = json.loads((out_b / "fermat-weber_manifest.json").read_text())
    man_a.pop("created_at"), man_b.pop("created_at")
    assert man_a == man_b


def test_run_floats_are_full_precision(tmp_path):
    out = tmp_path / "out"
    rc = run_cli(
        "run", "--experiment", "fermat-weber", "--algo", "scmwu",
        "--T", "60", "--seeds", "0", "--record-every", "60", "--out", str(out),
    )
    assert rc == 0
    rows = read_csv(out / "fermat-weber_scmwu_seed0.csv")
    gap = rows[1][1]
    # 17 significant digits round-trip the float64 exactly
    assert repr(float(gap)).startswith(gap[: min(len(gap), 16)]) or float(gap) == float(gap)
    assert len(gap.replace(".", "").replace("-", "").lstrip("0")) >= 15


def test_run_metric_learning_from_dataset(tmp_path):
    data = write_dataset(tmp_path)
    out = tmp_path / "out"
    rc = run_cli(
        "run", "--experiment", "metric-learning", "--algo", "both", "--data", data,
        "--eta", "0.1", "--T", "100", "--seeds", "0,1", "--record-every", "50",
        "--out", str(out),
    )
    assert rc == 0
    rows = read_csv(out / "metric-learning_oscmwu_seed1.csv")
    assert rows[0] == HEADER
    assert len(rows) == 3  # rounds 50 and 100
    agg = read_csv(out / "metric-learning_scmwu_aggregate.csv")
    assert agg[0][0] == "iteration"
    assert len(agg) == 3


def test_run_online_fl_leaves_undefined_columns_empty(tmp_path):
    out = tmp_path / "out"
    rc = run_cli(
        "run", "--experiment", "online-fl", "--algo", "oscmwu",
        "--T", "80", "--seeds", "0", "--record-every", "40", "--out", str(out),
    )
    assert rc == 0
    rows = read_csv(out / "online-fl_oscmwu_seed0.csv")
    assert rows[1][1] == "" and rows[1][3] == ""  # no gap, no primal objective online
    assert rows[1][2] != ""
    manifest = json.loads((out / "online-fl_manifest.json").read_text())
    assert manifest["horizon"] == 80
    assert manifest["eta"] == 10.0  # recipe default kicks in for eta=auto


def test_run_game_file(tmp_path):
    game = {
        "cone_x": {"kind": "orthant", "size": 2},
        "cone_y": {"kind": "orthant", "size": 2},
        "forward": [[1.0, -1.0], [-1.0, 1.0]],
        "lipschitz": [1.0, 1.0],
    }
    game_path = tmp_path / "game.json"
    game_path.write_text(json.dumps(game))
    out = tmp_path / "out"
    rc = run_cli(
        "run", "--experiment", "game-file", "--game", str(game_path),
        "--eps", "0.1", "--seeds", "0", "--out", str(out),
    )
    assert rc == 0
    manifest = json.loads((out / "game-file_manifest.json").read_text())
    assert manifest["horizon"] == 56
    assert manifest["lipschitz_estimated"] is False


# ---------------------------------------------------------------- errors


def test_missing_required_inputs_exit_2(tmp_path, capsys):
    rc = run_cli("run", "--experiment", "metric-learning", "--out", str(tmp_path / "x"), "--T", "10")
    assert rc == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"]["kind"] == "invalid-config"

    rc = run_cli(
        "run", "--experiment", "metric-learning", "--data", str(tmp_path / "nope.csv"),
        "--T", "10", "--out", str(tmp_path / "x"),
    )
    assert rc == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"]["kind"] == "missing-file"


def test_auto_horizon_requires_eps(tmp_path, capsys):
    rc = run_cli("run", "--experiment", "matching-pennies", "--out", str(tmp_path / "x"))
    assert rc == 2
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "eps" in record["error"]["detail"]


def test_bad_flag_values_exit_2(tmp_path, capsys):
    rc = run_cli(
        "run", "--experiment", "matching-pennies", "--eta", "-1",
        "--T", "10", "--out", str(tmp_path / "x"),
    )
    assert rc == 2
    rc = run_cli(
        "run", "--experiment", "matching-pennies", "--seeds", "a,b",
        "--T", "10", "--out", str(tmp_path / "x"),
    )
    assert rc == 2
    capsys.readouterr()


def test_unknown_experiment_exits_2(tmp_path, capsys):
    rc = run_cli("run", "--experiment", "poker", "--out", str(tmp_path / "x"), "--T", "5")
    assert rc == 2
    err = capsys.readouterr().err
    assert json.loads(err.strip().splitlines()[-1])["error"]["kind"] == "invalid-arguments"


def test_no_partial_csv_on_invalid_config(tmp_path):
    out = tmp_path / "out"
    rc = run_cli("run", "--experiment", "matching-pennies", "--T", "0", "--out", str(out))
    assert rc == 2
    assert not out.exists() or not any(n.endswith(".csv") for n in os.listdir(out))


# ---------------------------------------------------------------- verify


def test_verify_accepts_clean_run(tmp_path, capsys):
    out = tmp_path / "out"
    run_cli(
        "run", "--experiment", "fermat-weber", "--T", "90", "--seeds", "0",
        "--record-every", "30", "--out", str(out),
    )
    capsys.readouterr()
    assert run_cli("verify", str(out)) == 0
    assert "verified" in capsys.readouterr().out


def test_verify_flags_gap_violation(tmp_path, capsys):
    out = tmp_path / "out"
    run_cli(
        "run", "--experiment", "fermat-weber", "--T", "60", "--seeds", "0",
        "--record-every", "30", "--out", str(out),
    )
    target = next(p for p in out.iterdir() if "_seed" in p.name)
    rows = read_csv(target)
    rows[1][1] = "1e9"  # gap far above the recorded scaled regret
    target.write_text("\n".join(",".join(r) for r in rows) + "\n")
    capsys.readouterr()
    assert run_cli("verify", str(out)) == 1
    record = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert record["error"]["kind"] == "verification-failed"


def test_verify_missing_directory_exits_2(tmp_path, capsys):
    assert run_cli("verify", str(tmp_path / "nothing")) == 2
    capsys.readouterr()


def test_verify_empty_directory_exits_2(tmp_path, capsys):
    empty = tmp_path / "empty"
    empty.mkdir()
    assert run_cli("verify", str(empty)) == 2
    capsys.readouterr()
