import csv
import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from budgetwise.campaign import RESULT_COLUMNS
from budgetwise.cli import main
from budgetwise.surfaces import SurfaceGrid, save_surface

FAST = [
    "--budget", "400",
    "--steps", "2",
    "--seeds", "2",
    "--m-count", "6",
    "--strides", "4,1",
]


@pytest.fixture
def runner():
    return CliRunner()


def _grid_file(tmp_path):
    grid = SurfaceGrid(
        name="measured",
        c_knots=(0, 50, 120, 250, 400),
        s_knots=(0, 10, 25, 40),
        scores=tuple(
            tuple(round(0.2 + 0.001 * c + 0.008 * s, 6) for c in (0, 50, 120, 250, 400))
            for s in (0, 10, 25, 40)
        ),
    )
    path = tmp_path / "measured.json"
    save_surface(grid, path)
    return path


class TestSimulate:
    def test_writes_csv_with_expected_shape(self, runner, tmp_path):
        out = tmp_path / "results.csv"
        result = runner.invoke(
            main,
            ["simulate", "--surface", "preset:log-default", *FAST, "--out", str(out)],
        )
        assert result.exit_code == 0, result.output + str(result.exception)
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        # 12 methods (adaptive + 10 fixed + estimated-best-fixed) x 2 seeds.
        assert len(rows) == 24
        assert tuple(rows[0]) == RESULT_COLUMNS
        assert {r["method"] for r in rows} == {
            "adaptive", "estimated-best-fixed",
            *(f"fixed-{0.5 + 0.05 * i:.2f}" for i in range(10)),
        }
        for row in rows:
            assert row["error"] == ""
            assert float(row["spent"]) <= 400.0 + 1e-9

    def test_baselines_none(self, runner, tmp_path):
        out = tmp_path / "results.csv"
        result = runner.invoke(
            main,
            ["simulate", "--surface", "preset:log-default", *FAST,
             "--baselines", "none", "--out", str(out)],
        )
        assert result.exit_code == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 2
        assert all(r["method"] == "adaptive" for r in rows)

    def test_alpha_s_comma_list_fans_out(self, runner, tmp_path):
        out = tmp_path / "results.csv"
        result = runner.invoke(
            main,
            ["simulate", "--surface", "preset:log-default", *FAST,
             "--alpha-s", "5,25", "--baselines", "none", "--out", str(out)],
        )
        assert result.exit_code == 0
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert sorted({r["alpha_s"] for r in rows}) == ["25.0", "5.0"]
        assert len(rows) == 4

    def test_deterministic_output_bytes(self, runner, tmp_path):
        args = ["simulate", "--surface", "preset:log-default", *FAST]
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        assert runner.invoke(main, [*args, "--out", str(a)]).exit_code == 0
        assert runner.invoke(main, [*args, "--out", str(b), "--jobs", "4"]).exit_code == 0
        assert a.read_bytes() == b.read_bytes()

    def test_grid_file_surface(self, runner, tmp_path):
        path = _grid_file(tmp_path)
        out = tmp_path / "results.csv"
        result = runner.invoke(
            main,
            ["simulate", "--surface", str(path), "--budget", "300", "--steps", "2",
             "--seeds", "1", "--m-count", "6", "--strides", "4,1",
             "--baselines", "none", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output + str(result.exception)
        with open(out, newline="") as fh:
            (row,) = list(csv.DictReader(fh))
        assert row["surface"] == "measured"

    def test_trajectories_dir(self, runner, tmp_path):
        traj_dir = tmp_path / "traj"
        result = runner.invoke(
            main,
            ["simulate", "--surface", "preset:log-default", *FAST,
             "--baselines", "none", "--trajectories-dir", str(traj_dir)],
        )
        assert result.exit_code == 0
        files = sorted(traj_dir.glob("*.json"))
        assert len(files) == 2
        doc = json.loads(files[0].read_text())
        assert doc["method"] == "adaptive"
        assert len(doc["iterations"]) == 2

    def test_config_file_overridden_by_flags(self, runner, tmp_path):
        cfg = tmp_path / "cfg.toml"
        cfg.write_text(
            'surface = "preset:log-default"\n'
            "budget = 400\nsteps = 5\nseeds = 1\nm_count = 6\n"
            'strides = "4,1"\nbaselines = "none"\n'
        )
        out = tmp_path / "results.csv"
        result = runner.invoke(
            main,
            ["simulate", "--config", str(cfg), "--steps", "2", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output + str(result.exception)
        with open(out, newline="") as fh:
            (row,) = list(csv.DictReader(fh))
        assert row["steps"] == "2"  # flag wins over the file's 5

    def test_missing_surface_is_usage_error(self, runner):
        result = runner.invoke(main, ["simulate", "--steps", "2"])
        assert result.exit_code == 1
        assert "surface" in result.stderr

    def test_invalid_steps_named_in_error(self, runner):
        result = runner.invoke(
            main, ["simulate", "--surface", "preset:log-default", "--steps", "0"]
        )
        assert result.exit_code == 1
        assert "steps" in result.stderr

    def test_unknown_preset_fails_cleanly(self, runner):
        result = runner.invoke(main, ["simulate", "--surface", "preset:bogus"])
        assert result.exit_code == 1
        assert "preset" in result.stderr

    def test_bad_surface_file_exit_code(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"name": "x", "c_knots": [3, 1], "s_knots": [0, 1], "scores": [[0.1, 0.1], [0.1, 0.1]]}')
        result = runner.invoke(main, ["simulate", "--surface", str(path), *FAST])
        assert result.exit_code == 1
        assert "c_knots" in result.stderr

    def test_failed_runs_exit_code_two(self, runner, tmp_path, monkeypatch):
        import budgetwise.cli as climod

        def boom(*args, **kwargs):
            raise RuntimeError("surface backend offline")

        class BrokenSurface:
            name = "broken"
            max_c = 1000
            max_s = 1000
            evaluate = staticmethod(boom)

        monkeypatch.setattr(climod, "resolve_surface", lambda src: BrokenSurface())
        out = tmp_path / "results.csv"
        result = runner.invoke(
            main,
            ["simulate", "--surface", "preset:log-default", *FAST,
             "--baselines", "none", "--out", str(out)],
        )
        assert result.exit_code == 2
        assert "failed" in result.stderr
        with open(out, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert all("RuntimeError" in r["error"] for r in rows)


class TestSurfaceCommand:
    def test_describes_grid_file(self, runner, tmp_path):
        path = _grid_file(tmp_path)
        result = runner.invoke(main, ["surface", str(path)])
        assert result.exit_code == 0
        assert "name: measured" in result.output
        assert "knots: 5 x 4" in result.output

    def test_sample_emits_dense_grid(self, runner, tmp_path):
        path = _grid_file(tmp_path)
        out = tmp_path / "dense.json"
        result = runner.invoke(
            main, ["surface", str(path), "--sample", "9x5", "--out", str(out)]
        )
        assert result.exit_code == 0
        doc = json.loads(out.read_text())
        assert len(doc["c"]) == 9 and len(doc["s"]) == 5
        assert len(doc["scores"]) == 5 and len(doc["scores"][0]) == 9

    def test_missing_file(self, runner, tmp_path):
        result = runner.invoke(main, ["surface", str(tmp_path / "nope.json")])
        assert result.exit_code == 1
        assert "not found" in result.stderr

    def test_schema_error_names_field(self, runner, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"name": "x", "c_knots": [0, 1], "s_knots": [0, 1]}))
        result = runner.invoke(main, ["surface", str(path)])
        assert result.exit_code == 1
        assert "scores" in result.stderr


class TestServeCommand:
    def test_refuses_occupied_port(self, runner, tmp_path):
        import socket

        with socket.socket() as sock:
            sock.bind(("127.0.0.1", 0))
            sock.listen(1)
            port = sock.getsockname()[1]
            result = runner.invoke(
                main,
                ["serve", "--port", str(port), "--session-dir", str(tmp_path)],
            )
        assert result.exit_code == 1
        assert f"127.0.0.1:{port}" in result.stderr

    def test_unwritable_session_dir(self, runner, tmp_path):
        # Parent is a regular file, so the directory can never be created.
        blocker = tmp_path / "blocker"
        blocker.write_text("")
        result = runner.invoke(
            main, ["serve", "--port", "0", "--session-dir", str(blocker / "sub")]
        )
        assert result.exit_code == 1
        assert "not writable" in result.stderr
