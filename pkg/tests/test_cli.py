import csv
import io
import json

import pytest

from szegedy_search.cli import ConfigError, RunConfig, main

from reference_tables import TABLE1


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_table1_default_json(capsys):
    code, out, _ = run(capsys, "table1", "--format", "json")
    assert code == 0
    d = json.loads(out)
    assert d["marked"] == [1, 2, 4]
    assert d["rows"] == TABLE1
    assert d["stages"][0] == "(W')^2" and d["stages"][-1] == "R_a'(W')^5"


def test_table1_csv_shape(capsys):
    code, out, _ = run(capsys, "table1", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0
    assert len(rows) == 13 and all(len(r) == 9 for r in rows)


def test_table1_text_default(capsys):
    code, out, _ = run(capsys, "table1")
    assert code == 0
    assert "|1,6>" in out and "R_a'(W')^5" in out


def test_table1_no_marked_all_plus(capsys):
    code, out, _ = run(capsys, "table1", "--marked", "", "--format", "json")
    assert code == 0
    assert set(json.loads(out)["rows"].values()) == {"+" * 8}


def test_walk_verdicts(capsys):
    code, out, _ = run(capsys, "walk")
    assert code == 0
    d = json.loads(out)
    assert d["report"]["verdict"] is True
    assert d["final_minus_initial_max"] < 1e-10
    code, out, _ = run(capsys, "walk", "--side", "5", "--steps", "20")
    assert json.loads(out)["report"]["verdict"] is True
    code, out, _ = run(capsys, "walk", "--side", "5", "--marked", "1", "--steps", "20")
    assert json.loads(out)["report"]["verdict"] is False


def test_walk_csv_header(capsys):
    _, out, _ = run(capsys, "walk", "--n", "4", "--marked", "1", "--steps", "1", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0][:3] == ["stage", "|1,1>", "|1,2>"]
    assert len(rows) == 3 and all(len(r) == len(rows[0]) for r in rows)


@pytest.mark.parametrize(
    "argv,exact",
    [
        (["--n", "6", "--marked", "1"], "35/6"),
        (["--n", "9", "--marked", "1,2,3"], "56/9"),
        (["--n", "5", "--marked", "1,2,3,4,5"], "0/1"),
    ],
)
def test_hitting_exact(capsys, argv, exact):
    code, out, _ = run(capsys, "hitting", *argv, "--trials", "20000", "--seed", "3")
    assert code == 0
    d = json.loads(out)
    assert d["exact_value"] == exact
    if d["mc_stderr"]:
        assert abs(d["mc_estimate"] - d["exact_value_float"]) <= 3 * d["mc_stderr"]


def test_mixing_text(capsys):
    code, out, _ = run(capsys, "mixing", "--n", "11", "--format", "text")
    assert code == 0 and "mixing time 399" in out


def test_separation_rows_and_determinism(capsys):
    argv = ("separation", "--sweep", "16:4,64:8,256:16")
    code, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert code == 0 and first == second
    rows = list(csv.DictReader(io.StringIO(first)))
    assert [r["n"] for r in rows] == ["16", "64", "256"]
    assert rows[0]["classical_ht"] == "91/4"


def test_grid_reduce_and_sample(capsys):
    code, out, _ = run(capsys, "grid-reduce")
    assert code == 0 and json.loads(out)["verdict"] is True
    code, out, _ = run(capsys, "sample", "--trials", "50000", "--seed", "5")
    d = json.loads(out)
    assert code == 0 and abs(d["mean"] - 3) <= 3 * d["stderr"]


def test_out_file(tmp_path, capsys):
    target = tmp_path / "t.json"
    code, out, _ = run(capsys, "table1", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text(encoding="utf-8"))["rows"] == TABLE1


def test_config_file(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"graph": {"kind": "cycle", "n": 6}, "marked": [1, 2, 4], "format": "json"}))
    code, out, _ = run(capsys, "table1", "--config", str(path))
    assert code == 0 and json.loads(out)["rows"] == TABLE1


@pytest.mark.parametrize(
    "argv",
    [
        ["table1", "--marked", "7"],
        ["table1", "--n", "2"],
        ["walk", "--steps", "0"],
        ["mixing", "--epsilon", "1.5"],
        ["hitting", "--marked", ""],
        ["nosuch"],
        ["table1", "--bogus"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, _ = run(capsys, *argv)
    assert code == 2


def test_unknown_config_field(tmp_path, capsys):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps({"colour": "blue"}))
    code, _, err = run(capsys, "table1", "--config", str(path))
    assert code == 2 and "colour" in err
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict("walk", {"graph": {"n": 6, "wrap": True}})
    assert info.value.field == "graph.wrap"


def test_runtime_error_exit_1(tmp_path, capsys):
    # two disjoint triangles: walkers started in the second never reach vertex 1
    path = tmp_path / "split.json"
    edges = [[1, 2], [2, 3], [3, 1], [4, 5], [5, 6], [6, 4]]
    path.write_text(json.dumps({"graph": {"kind": "general", "n": 6, "edges": edges}, "marked": [1]}))
    code, out, err = run(capsys, "hitting", "--config", str(path), "--trials", "10")
    assert code == 1 and out == ""
    assert "NoAbsorptionError" in err


def test_sample_k_out_of_range(capsys):
    assert run(capsys, "sample", "--n", "9", "--k", "0")[0] == 2
    assert run(capsys, "sample", "--n", "9", "--k", "10")[0] == 2


def test_config_roundtrip():
    cfg = RunConfig.from_dict("walk", {"graph": {"kind": "torus", "side": 5}, "steps": 10})
    assert cfg.marked == "diagonal"
    again = RunConfig.from_dict("walk", {k: v for k, v in cfg.to_dict().items() if k != "command"})
    assert again == cfg
