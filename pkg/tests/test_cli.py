import csv
import json

import pytest

from cascadenet.cli import main

SIM = ["simulate", "--config", "case-study", "--gamma", "0.5", "--scenario", "worst",
       "--iterations", "3", "--importance", "R1", "--seed", "7"]


def read_bytes(folder):
    return {p.name: p.read_bytes() for p in sorted(folder.iterdir())}


@pytest.fixture(scope="module")
def run1(tmp_path_factory):
    out = tmp_path_factory.mktemp("run1")
    assert main(SIM + ["--out", str(out)]) == 0
    return out


def test_simulate_writes_outputs(run1):
    assert {"report.csv", "summary.csv", "edges.csv", "manifest.json"} <= set(read_bytes(run1))
    manifest = json.loads((run1 / "manifest.json").read_text())
    assert manifest["parameters"]["gamma"] == 0.5 and manifest["parameters"]["seed"] == 7
    assert manifest["output_dir"] == str(run1)
    with open(run1 / "report.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert {int(r["iteration"]) for r in rows} == {1, 2, 3}


def test_simulate_rerun_identical(run1):
    before = read_bytes(run1)
    assert main(SIM + ["--out", str(run1)]) == 0
    assert read_bytes(run1) == before


def test_simulate_missing_config(tmp_path, capsys):
    code = main(["simulate", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert code == 2
    assert "nope.json" in capsys.readouterr().err


def test_simulate_bad_gamma(tmp_path, capsys):
    code = main(["simulate", "--config", "case-study", "--gamma", "1.5", "--out", str(tmp_path)])
    assert code == 1
    assert "Γ must lie in [0,1]" in capsys.readouterr().err


def test_simulate_invalid_config(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"infrastructures": [{"name": "x"}]}))
    assert main(["simulate", "--config", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "infrastructures[0]" in capsys.readouterr().err


def test_importance_from_file(tmp_path):
    mat = tmp_path / "r.json"
    mat.write_text(json.dumps([[0, 1, 0.2], [1, 0, 0.8], [0, 0, 0]]))
    assert main(["simulate", "--config", "case-study", "--importance", str(mat), "--out", str(tmp_path / "o")]) == 0


def test_sweep_tables(tmp_path):
    out = tmp_path / "sweep"
    code = main(["sweep", "--config", "case-study", "--gamma-list", "0.3,0.5,0.7",
                 "--importance-list", "R1,R2,R3", "--strict", "--out", str(out)])
    assert code == 0
    with open(out / "importance_sweep.csv", newline="") as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 3 * 3 * 3 * 3  # Γ x R x infra x scenario
    with open(out / "gamma_sweep.csv", newline="") as fh:
        header = next(csv.reader(fh))
    assert header == ["gamma", "scenario", "pair", "parent", "child", "value"]


def test_sweep_empty_gamma_list(tmp_path):
    assert main(["sweep", "--config", "case-study", "--gamma-list", "", "--out", str(tmp_path)]) == 1


def test_verify_filter(tmp_path):
    out = tmp_path / "v"
    assert main(["verify", "--samples", "20000", "--gates", "and,or", "--out", str(out)]) == 0
    with open(out / "error_budget.csv", newline="") as fh:
        gates = {r["gate"] for r in csv.DictReader(fh)}
    assert gates == {"and", "or"}


def test_verify_unknown_gate(tmp_path):
    assert main(["verify", "--gates", "xor", "--out", str(tmp_path)]) == 1


def test_export_map(run1, tmp_path):
    out = tmp_path / "maps"
    assert main(["export-map", "--run", str(run1), "--infra", "water",
                 "--layer", "comprehensive", "--out", str(out)]) == 0
    (path,) = out.glob("*.geojson")
    doc = json.loads(path.read_text())
    assert len(doc["features"]) == 16
    assert {f["properties"]["iteration"] for f in doc["features"]} == {3}
    first = path.read_bytes()
    assert main(["export-map", "--run", str(run1), "--infra", "water", "--out", str(out)]) == 0
    assert path.read_bytes() == first


def test_export_map_many(run1, tmp_path):
    out = tmp_path / "maps"
    code = main(["export-map", "--run", str(run1), "--infra", "water,electricity",
                 "--layer", "intra,comprehensive", "--iteration", "1,3", "--grid", "--out", str(out)])
    assert code == 0
    assert len(list(out.glob("map_*.geojson"))) == 2 * 2 * 2
    assert (out / "grid.geojson").exists()


def test_export_map_unknown_infra(run1, capsys):
    assert main(["export-map", "--run", str(run1), "--infra", "gas"]) == 1
    err = capsys.readouterr().err
    assert "water" in err and "electricity" in err


def test_export_map_missing_run(tmp_path):
    assert main(["export-map", "--run", str(tmp_path / "none"), "--infra", "water"]) == 2
