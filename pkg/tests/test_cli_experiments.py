import csv
import json

import pytest

from influence_game_lab.cli import main
from influence_game_lab.experiments import ExperimentSpec, reproduce, run_sweep


def test_list_figures(capsys):
    assert main(["--list-figures"]) == 0
    out = capsys.readouterr().out
    assert all(f"fig{i}" in out for i in range(2, 6))


def test_no_command_is_an_error(capsys):
    assert main([]) == 2


def test_reproduce_writes_csv_and_manifest(tmp_path, capsys):
    rc = main(["reproduce", "--figure", "fig3", "--trials", "2", "--sweep", "10,20", "--out", str(tmp_path)])
    assert rc == 0
    gap = list(csv.reader((tmp_path / "fig3_gap_u1.csv").open()))
    assert gap[0] == ["sweep", "mean", "stderr"]
    assert [r[0] for r in gap[1:]] == ["10", "20"]
    manifest = json.loads((tmp_path / "fig3_manifest.json").read_text())
    assert manifest["spec"]["trials"] == 2 and manifest["scenario"]["seed"] == 7


def test_spec_validation():
    with pytest.raises(ValueError, match="sweep"):
        ExperimentSpec("fig3", sweep=[20, 10]).validate()
    with pytest.raises(ValueError, match="trials"):
        ExperimentSpec("fig3", trials=0).validate()
    with pytest.raises(ValueError, match="figure"):
        ExperimentSpec("fig9", sweep=[1]).validate()


def test_default_trials():
    assert ExperimentSpec("fig2").trials == 50
    assert ExperimentSpec("fig5").trials == 20


def test_sweep_is_worker_independent():
    spec = dict(figure="fig2", trials=3, sweep=[2, 5])
    assert run_sweep(ExperimentSpec(**spec), workers=1) == run_sweep(ExperimentSpec(**spec), workers=2)


def test_single_offline_cli(tmp_path):
    out = tmp_path / "plan.json"
    assert main(["single-offline", "--scenario", "fig2", "--seed", "3", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["spent"] == pytest.approx(40.0)


def test_single_online_cli(tmp_path):
    out = tmp_path / "trace.csv"
    assert main(["single-online", "--scenario", "fig2", "--seed", "1", "--trials", "3", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert len(rows) == 100 and "theta" in rows[0]
    summary = json.loads(out.with_suffix(".json").read_text())
    assert summary["mean_regret"] <= summary["bound"]


def test_single_online_rejects_large_step(capsys):
    assert main(["single-online", "--scenario", "fig2", "--eta", "5", "--trials", "1"]) == 1
    assert "step size" in capsys.readouterr().err


def test_game_cli(tmp_path):
    out = tmp_path / "nash.json"
    assert main(["game-offline", "--scenario", "fig3", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["report"]["converged"] is True
    base = tmp_path / "online"
    assert main(["game-online", "--scenario", "fig4", "--mode", "partial", "--seed", "2", "--out", str(base)]) == 0
    rows = list(csv.DictReader(base.with_suffix(".csv").open()))
    assert {r["player"] for r in rows} == {"1", "2", "3"}


def test_bad_scenario_path(capsys):
    assert main(["single-offline", "--scenario", "/nonexistent.json"]) == 1


def test_reproduce_files_listed(tmp_path):
    written = reproduce(ExperimentSpec("fig2", trials=2, sweep=[2], out=str(tmp_path)))
    names = sorted(p.name for p in written)
    assert names == sorted(["fig2_manifest.json"] + [f"fig2_regret_alpha{a}.csv" for a in (0.2, 0.4, 0.6)])
