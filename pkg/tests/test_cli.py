import json

import pytest

from bridgekit.cli import build_parser, run
from bridgekit.io import read_dataset, write_dataset
from bridgekit.synth import make_bridge_dataset


@pytest.fixture(scope="module")
def ingested(tmp_path_factory, fixtures_dir):
    out = tmp_path_factory.mktemp("ingested")
    code = run([
        "ingest",
        "--nbi", str(fixtures_dir / "nbi_sample.dat"),
        "--layout", str(fixtures_dir / "nbi_layout.cfg"),
        "--seismic", str(fixtures_dir / "seismic_grid.dat"),
        "--costs", str(fixtures_dir / "costs.csv"),
        "--deflator", str(fixtures_dir / "deflator.csv"),
        "--post-1971",
        "--exclude-states", "AK,HI,PR",
        "--dedupe-on", "structure_id",
        "--avg-span",
        "--out", str(out),
    ])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def bridge_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bridges")
    write_dataset(make_bridge_dataset(2500, seed=9), out / "dataset.csv")
    return out


class TestIngestCommand:
    def test_outputs_exist(self, ingested):
        assert (ingested / "dataset.csv").exists()
        assert (ingested / "dataset.schema").exists()
        assert (ingested / "rejects.csv").exists()
        d = read_dataset(ingested / "dataset.csv")
        assert "seismic_pga" in [a.name for a in d.schema]
        rejects = (ingested / "rejects.csv").read_text()
        assert "pre-1971" in rejects and "malformed-field" in rejects

    def test_idempotent(self, ingested, fixtures_dir, tmp_path):
        first = (ingested / "dataset.csv").read_bytes()
        code = run([
            "ingest", "--nbi", str(fixtures_dir / "nbi_sample.dat"),
            "--layout", str(fixtures_dir / "nbi_layout.cfg"),
            "--seismic", str(fixtures_dir / "seismic_grid.dat"),
            "--costs", str(fixtures_dir / "costs.csv"),
            "--deflator", str(fixtures_dir / "deflator.csv"),
            "--post-1971", "--exclude-states", "AK,HI,PR",
            "--dedupe-on", "structure_id", "--avg-span",
            "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "dataset.csv").read_bytes() == first


class TestExitCodes:
    def test_missing_file_is_data_error(self, tmp_path):
        code = run(["ingest", "--nbi", "/nope.dat", "--layout", "/nope.cfg",
                    "--out", str(tmp_path)])
        assert code == 2

    def test_bad_parameter_is_validation_error(self, bridge_dir, tmp_path):
        code = run(["train", "--data", str(bridge_dir), "--spec", "dtree",
                    "--confidence", "0.9", "--out", str(tmp_path / "m.model")])
        assert code == 1

    def test_unknown_spec_is_validation_error(self, bridge_dir, tmp_path):
        code = run(["train", "--data", str(bridge_dir), "--spec", "svm",
                    "--out", str(tmp_path / "m.model")])
        assert code == 1


class TestTrainPredictInspect:
    def test_flow(self, bridge_dir, tmp_path, capsys):
        model_path = tmp_path / "wa.model"
        code = run(["train", "--data", str(bridge_dir), "--spec", "dtree",
                    "--state", "WA", "--folds", "5", "--seed", "3",
                    "--reproducible", "--out", str(model_path)])
        assert code == 0
        capsys.readouterr()

        instance_csv = tmp_path / "query.csv"
        instance_csv.write_text(
            "material,deck_type,max_span_length,avg_span_length,seismic_pga\n"
            "concrete,cast_in_place,20.0,15.0,0.55\n"
            "steel,open_grating,45.0,30.0,?\n")
        code = run(["predict", "--model", str(model_path),
                    "--instance", str(instance_csv)])
        out = capsys.readouterr().out
        assert code == 0
        lines = [json.loads(l) for l in out.strip().splitlines()]
        assert len(lines) == 2
        for line in lines:
            assert abs(sum(r["p"] for r in line["distribution"]) - 1) < 1e-9
        assert lines[0]["distribution"][0]["class"] == "BoxBeam"  # planted hazard rule

        code = run(["model", "inspect", "--model", str(model_path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "kind: dtree" in out and "material" in out

    def test_train_deterministic(self, bridge_dir, tmp_path):
        a = tmp_path / "a.model"
        b = tmp_path / "b.model"
        for path in (a, b):
            assert run(["train", "--data", str(bridge_dir), "--spec", "bayesnet",
                        "--state", "GA", "--folds", "5", "--seed", "1",
                        "--reproducible", "--out", str(path)]) == 0
        assert a.read_bytes() == b.read_bytes()


class TestSelectCommand:
    def test_ranked_csv(self, bridge_dir, tmp_path, capsys):
        out_csv = tmp_path / "scores.csv"
        code = run(["select", "--data", str(bridge_dir), "--state", "GA",
                    "--out", str(out_csv)])
        assert code == 0
        lines = out_csv.read_text().splitlines()
        assert lines[0] == "attribute,chi2_score,infogain_score,kept_chi2"
        assert len(lines) == 6  # five features
        scores = [float(l.split(",")[1]) for l in lines[1:]]
        assert scores == sorted(scores, reverse=True)


class TestEvaluateCommand:
    def test_cross_validation_report(self, bridge_dir, tmp_path, capsys):
        code = run(["evaluate", "--data", str(bridge_dir), "--state", "GA",
                    "--spec", "oner", "--folds", "5", "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert 0 <= doc["weighted_recall"] <= 1
        assert doc["protocol"] == "cross-validation"

    def test_hold_one_state_out(self, bridge_dir, tmp_path, capsys):
        code = run(["evaluate", "--data", str(bridge_dir), "--spec", "oner",
                    "--hold-one-state-out", "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert set(doc["states"]) == {"GA", "MN", "PA", "VA", "WA"}


class TestExperimentCommand:
    def test_grid_run(self, bridge_dir, tmp_path, capsys):
        grid = tmp_path / "grid.cfg"
        grid.write_text(
            "[base]\nattrs = material,deck_type\nspec = oner\nk = 5\nseed = 1\n\n"
            "[full]\nattrs = material,deck_type,max_span_length,avg_span_length\n"
            "spec = oner\nk = 5\nseed = 1\nbaseline = base\n")
        code = run(["experiment", "--config", str(grid), "--data", str(bridge_dir),
                    "--out", str(tmp_path / "reports")])
        assert code == 0
        for name in ("absolute.csv", "deltas.csv", "per_class.csv", "summary.json"):
            assert (tmp_path / "reports" / name).exists()


class TestCorrelateCommand:
    def test_correlation_csv(self, bridge_dir, fixtures_dir, tmp_path, capsys):
        grid = tmp_path / "grid.cfg"
        grid.write_text("[base]\nattrs = material\nspec = oner\nk = 5\nseed = 1\n")
        assert run(["experiment", "--config", str(grid), "--data", str(bridge_dir),
                    "--out", str(tmp_path / "reports")]) == 0
        code = run(["correlate", "--summary", str(tmp_path / "reports" / "summary.json"),
                    "--cell", "base", "--climate", str(fixtures_dir / "climate.csv"),
                    "--out", str(tmp_path / "corr.csv")])
        assert code == 0
        lines = (tmp_path / "corr.csv").read_text().splitlines()
        assert lines[0] == "parameter,pearson_r"
        assert len(lines) == 5


class TestConfigFile:
    def test_config_sets_defaults_cli_overrides(self, bridge_dir, tmp_path, capsys):
        cfg = tmp_path / "train.cfg"
        cfg.write_text("spec = oner\nstate = GA\nfolds = 5\nreproducible = true\n")
        out = tmp_path / "m.model"
        code = run(["train", "--config", str(cfg), "--data", str(bridge_dir),
                    "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["kind"] == "oner"
        code = run(["train", "--config", str(cfg), "--data", str(bridge_dir),
                    "--spec", "dtree", "--folds", "5", "--out", str(out)])
        assert code == 0
        assert json.loads(out.read_text())["kind"] == "dtree"

    def test_unknown_config_key_rejected(self, bridge_dir, tmp_path):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("kernel = rbf\n")
        code = run(["train", "--config", str(cfg), "--data", str(bridge_dir),
                    "--out", str(tmp_path / "m.model")])
        assert code == 1


class TestHelp:
    def test_advertised_flags_exist(self):
        parser = build_parser()
        sub = next(a for a in parser._actions
                   if isinstance(a, __import__("argparse")._SubParsersAction))
        all_flags = set()
        for name, p in sub.choices.items():
            for action in p._actions:
                all_flags.update(action.option_strings)
            if name == "model":
                inner = next(a for a in p._actions
                             if isinstance(a, __import__("argparse")._SubParsersAction))
                for ip in inner.choices.values():
                    for action in ip._actions:
                        all_flags.update(action.option_strings)
        for flag in ("--seed", "--folds", "--bias", "--confidence", "--min-objects",
                     "--max-parents", "--alpha", "--post-1971",
                     "--resample-whole-dataset", "--attrs"):
            assert flag in all_flags, flag

    def test_every_flag_documented_in_help(self):
        parser = build_parser()
        sub = next(a for a in parser._actions
                   if isinstance(a, __import__("argparse")._SubParsersAction))
        for name, p in sub.choices.items():
            help_text = p.format_help()
            for action in p._actions:
                for opt in action.option_strings:
                    assert opt in help_text, (name, opt)


class TestResamplingFlags:
    def test_evaluate_with_bias(self, bridge_dir, tmp_path, capsys):
        code = run(["evaluate", "--data", str(bridge_dir), "--state", "WA",
                    "--spec", "dtree", "--folds", "5", "--bias", "0.1",
                    "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert doc["protocol"] == "cross-validation"
        assert 0 < doc["weighted_recall"] <= 1

    def test_resample_whole_dataset_flag(self, bridge_dir, tmp_path, capsys):
        code = run(["evaluate", "--data", str(bridge_dir), "--state", "WA",
                    "--spec", "oner", "--folds", "5", "--bias", "0.2",
                    "--resample-whole-dataset", "--out", str(tmp_path)])
        assert code == 0
        doc = json.loads((tmp_path / "report.json").read_text())
        assert "resampled" in doc["protocol"]
