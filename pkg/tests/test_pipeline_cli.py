import json
import subprocess
import sys

import numpy as np
import pytest

from conftest import YEARS, synthetic_long_csv
from sdgnet.cli import main
from sdgnet.exceptions import ValidationError
from sdgnet.model import FittedModel
from sdgnet.pipeline import PipelineConfig, run_pipeline

PER_COUNTRY = ("nodes", "features", "report", "per_goal", "heatmap", "bars")


def run_cli(*args):
    return main([str(a) for a in args])


def test_run_writes_expected_files(workspace):
    assert run_cli("run", "--config", workspace) == 0
    out = workspace.parent / "out"
    manifest = json.loads((out / "manifest.json").read_text())
    paths = {e["path"] for e in manifest["files"]}
    assert {"drop_log.csv", "model.json", "eval.json"} <= paths
    for c in range(12):
        for kind in PER_COUNTRY:
            assert f"{kind}_C{c:02d}.csv" in paths
    assert not list(out.glob(".staging-*"))


def test_run_is_deterministic(workspace, tmp_path):
    cfg = PipelineConfig.load(workspace)
    a = run_pipeline(cfg.override(out_dir=str(tmp_path / "a")))
    b = run_pipeline(cfg.override(out_dir=str(tmp_path / "b")))
    assert a == b
    assert (tmp_path / "a/manifest.json").read_bytes() == (tmp_path / "b/manifest.json").read_bytes()


def test_seed_changes_split(workspace, tmp_path):
    cfg = PipelineConfig.load(workspace)
    a = run_pipeline(cfg.override(out_dir=str(tmp_path / "a"), seed=1))
    b = run_pipeline(cfg.override(out_dir=str(tmp_path / "b"), seed=2))
    digest = lambda m: {e["path"]: e["sha256"] for e in m["files"]}["model.json"]
    assert digest(a) != digest(b)


def test_model_records_seed_and_fraction(workspace):
    run_cli("run", "--config", workspace)
    with open(workspace.parent / "out/model.json") as fh:
        m = FittedModel.from_json(fh)
    assert (m.seed, m.train_fraction, m.source) == (7, 0.8, "fit")
    assert m.converged


def test_eval_counts_test_split(workspace):
    run_cli("run", "--config", workspace)
    ev = json.loads((workspace.parent / "out/eval.json").read_text())
    # 12 countries x 30 indicators, 20% held out per category (120 points each)
    assert ev["tp"] + ev["fn"] + ev["fp"] + ev["tn"] == 3 * 24
    assert 0.0 <= ev["accuracy"] <= 1.0


def test_train_fraction_one_rejected(workspace):
    with pytest.raises(ValidationError):
        PipelineConfig.load(workspace).override(train_fraction=1.0).validate()
    assert run_cli("run", "--config", workspace, "--train-fraction", 1.0) == 1
    assert not (workspace.parent / "out").exists()


def test_unknown_config_key(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"panel_path": "p.csv", "bogus": 1}))
    assert run_cli("run", "--config", tmp_path / "c.json") == 1


def test_fixture_model_single_country(workspace):
    assert run_cli("run", "--config", workspace, "--paper-model", "--country", "C03") == 0
    out = workspace.parent / "out"
    names = {p.name for p in out.iterdir()}
    assert "report_C03.csv" in names and "heatmap_C03.csv.svg" in names
    assert not any("C04" in n for n in names)
    m = json.loads((out / "model.json").read_text())
    assert m["source"] == "paper"


def test_missing_panel_is_data_error(tmp_path):
    (tmp_path / "c.json").write_text(json.dumps({"panel_path": "nope.csv", "model_source": "paper"}))
    assert run_cli("run", "--config", tmp_path / "c.json") == 2


def test_unknown_country_is_data_error(workspace):
    assert run_cli("run", "--config", workspace, "--country", "ZZZ") == 2
    assert not (workspace.parent / "out").exists()


def test_single_class_is_fit_error(tmp_path):
    # every series rises, so every indicator is synergy-dominated
    lines = ["country_code,indicator_id,sdg_goal,year,value"]
    rng = np.random.default_rng(0)
    for c in ("AAA", "BBB"):
        for k in range(6):
            vals = np.linspace(10, 90, len(YEARS)) + rng.normal(0, 0.01, len(YEARS))
            lines += [f"{c},i{k},{k + 1},{y},{v:.3f}" for y, v in zip(YEARS, vals)]
    (tmp_path / "p.csv").write_text("\n".join(lines) + "\n")
    (tmp_path / "s.csv").write_text("country_code,sdg_index_score\nAAA,40\nBBB,90\n")
    cfg = {"panel_path": "p.csv", "scores_path": "s.csv", "out_dir": "out"}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert run_cli("run", "--config", tmp_path / "c.json") == 3
    assert not (tmp_path / "out").exists() or not any((tmp_path / "out").iterdir())


def test_wide_panel_format(tmp_path):
    head = "country_code,indicator_id,sdg_goal," + ",".join(map(str, YEARS))
    rows = [head]
    rng = np.random.default_rng(1)
    for k in range(5):
        rows.append(f"IND,i{k},{k + 1}," + ",".join(f"{v:.2f}" for v in rng.uniform(0, 100, 25)))
    (tmp_path / "w.csv").write_text("\n".join(rows) + "\n")
    cfg = {"panel_path": "w.csv", "panel_format": "wide", "model_source": "paper", "out_dir": "o"}
    (tmp_path / "c.json").write_text(json.dumps(cfg))
    assert run_cli("run", "--config", tmp_path / "c.json", "--no-svg") == 0
    assert (tmp_path / "o/report_IND.csv").exists()
    assert not list((tmp_path / "o").glob("*.svg"))


@pytest.mark.parametrize("verb, expected", [
    ("ingest", ["drop_log.csv", "panel_clean.csv"]),
    ("network", ["nodes_C01.csv", "heatmap_C01.csv", "heatmap_C01.csv.svg"]),
    ("features", ["features_C01.csv"]),
    ("fit", ["model.json"]),
    ("evaluate", ["eval.json"]),
    ("classify", ["report_C01.csv", "per_goal_C01.csv"]),
    ("report", ["report_C01.csv", "bars_C01.csv", "heatmap_C01.csv"]),
])
def test_verbs(workspace, verb, expected):
    country = [] if verb in ("ingest", "fit", "evaluate") else ["--country", "C01"]
    assert run_cli(verb, "--config", workspace, *country) == 0
    out = workspace.parent / "out"
    for name in expected:
        assert (out / name).exists(), name


def test_drop_log_lists_extras(workspace):
    run_cli("ingest", "--config", workspace)
    text = (workspace.parent / "out/drop_log.csv").read_text()
    assert "C00,flat,constant" in text and "C00,gappy,missing" in text


def test_evaluate_reuses_saved_model(workspace):
    run_cli("fit", "--config", workspace)
    model = workspace.parent / "out/model.json"
    before = model.read_bytes()
    assert run_cli("evaluate", "--config", workspace, "--model", model) == 0
    assert model.read_bytes() == before


def test_console_script(workspace):
    proc = subprocess.run([sys.executable, "-m", "sdgnet.cli", "run", "--config", str(workspace),
                           "--paper-model"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "wrote" in proc.stdout
