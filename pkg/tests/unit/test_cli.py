"""Tests for the command-line interface."""

import json

import pytest
from typer.testing import CliRunner

from cranetraj import __version__
from cranetraj.cli import EXIT_USAGE, app

runner = CliRunner()


class TestTimemin:
    """Tests for the timemin command."""

    def test_running_gear(self, tmp_path):
        result = runner.invoke(app, ["timemin", "--drive", "running", "--distance", "30", "--out", str(tmp_path)])

        assert result.exit_code == 0
        assert "T = 16.5000 s" in result.output
        saved = json.loads((tmp_path / "timemin_running_30.json").read_text())
        assert saved["T"] == pytest.approx(16.5)
        assert saved["drive"] == "running"

    def test_lifting_gear(self, tmp_path):
        result = runner.invoke(app, ["timemin", "--drive", "lifting", "-d", "20", "--out", str(tmp_path)])

        assert result.exit_code == 0
        assert "24.7222" in result.output

    def test_negative_distance(self, tmp_path):
        result = runner.invoke(app, ["timemin", "--distance=-1", "--out", str(tmp_path)])

        assert result.exit_code == EXIT_USAGE

    def test_missing_config(self, tmp_path):
        result = runner.invoke(app, ["timemin", "-d", "5", "--config", str(tmp_path / "none.json")])

        assert result.exit_code == EXIT_USAGE


class TestOptimize:
    def test_origin_is_rejected(self, tmp_path):
        """No travel at all leaves nothing to optimize."""
        result = runner.invoke(app, ["optimize", "--sx", "0", "--sy", "0", "--out", str(tmp_path)])

        assert result.exit_code == EXIT_USAGE

    def test_idle_drive(self, tmp_path):
        result = runner.invoke(app, ["optimize", "--sx", "0", "--sy", "5", "--out", str(tmp_path)])

        assert result.exit_code == 0
        reports = list(tmp_path.glob("*_report.json"))
        assert len(reports) == 1
        report = json.loads(reports[0].read_text())
        assert report["version"] == __version__
        assert "config_hash" in report

    def test_solver_flags_reach_the_search(self, tmp_path, monkeypatch):
        import cranetraj.optimizer as optimizer

        seen = {}
        real = optimizer.optimize

        def spy(spec, settings=None):
            seen["settings"] = settings
            return real(spec, settings)

        monkeypatch.setattr(optimizer, "optimize", spy)
        args = ["optimize", "--sx", "0", "--sy", "5", "--out", str(tmp_path)]

        result = runner.invoke(app, [*args, "--n-max", "12", "--patience", "2", "--refine-top-k", "1", "--profile"])

        assert result.exit_code == 0
        settings = seen["settings"]
        assert (settings.n_max, settings.patience, settings.refine_top_k) == (12, 2, 1)
        assert "trajectories/s" in result.output
        assert "plan solves" in result.output

    def test_invalid_patience(self, tmp_path):
        result = runner.invoke(app, ["optimize", "--sx", "0", "--sy", "5", "--patience", "0", "--out", str(tmp_path)])

        assert result.exit_code == EXIT_USAGE


class TestValidateModel:
    def test_prints_table_and_fit(self):
        result = runner.invoke(app, ["validate-model", "--drive", "lifting", "--points", "3"])

        assert result.exit_code == 0
        assert "Quadratic fit residual" in result.output
        assert "c00=" in result.output
        assert "Efficiency at the nominal motor point" in result.output

    def test_invalid_model(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps({"effective_mass": -5}))

        result = runner.invoke(app, ["validate-model", "--model", str(path)])

        assert result.exit_code == EXIT_USAGE


def test_version():
    result = runner.invoke(app, ["version"])

    assert result.exit_code == 0
    assert __version__ in result.output
