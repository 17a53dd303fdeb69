import csv
import math

import numpy as np
import pytest
import yaml

from conewalk.cli import main
from conewalk.config import load_config, parse_config
from conewalk.errors import ConfigError

ESTAR_RAW = {
    "dimension": 2,
    "matrices": [[[2.0, 1.0], [1.0, 1.0]], [[1.0, 1.0], [1.0, 2.0]]],
    "probs": [0.5, 0.5],
    "seed": 424242,
}


def _write_config(tmp_path, extra=None, **overrides):
    raw = dict(ESTAR_RAW, **overrides)
    if extra:
        raw.update(extra)
    path = tmp_path / "exp.yaml"
    path.write_text(yaml.safe_dump(raw))
    return path


class TestConfigParsing:
    def test_minimal_config(self, tmp_path):
        cfg = load_config(_write_config(tmp_path))
        assert cfg.dimension == 2
        assert cfg.walk.n_steps == 100_000  # defaults fill missing sections
        assert cfg.ensemble().size == 2

    def test_missing_required_key(self):
        raw = dict(ESTAR_RAW)
        del raw["seed"]
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_wrong_matrix_shape(self):
        raw = dict(ESTAR_RAW, matrices=[[[1.0, 0.0]]])
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            parse_config(dict(ESTAR_RAW, typo_section={}))

    def test_bad_seed(self):
        with pytest.raises(ConfigError):
            parse_config(dict(ESTAR_RAW, seed=-3))

    def test_window_ratio_checked(self):
        raw = dict(ESTAR_RAW, harmonic={"window_T": 1.0, "ds": 0.3})
        with pytest.raises(ConfigError):
            parse_config(raw)

    def test_cos_initial_needs_period(self):
        raw = dict(ESTAR_RAW, harmonic={"initial": "cos"})
        with pytest.raises(ConfigError):
            parse_config(raw)


class TestValidateCommand:
    def test_valid_config_exit_zero(self, tmp_path, capsys):
        path = _write_config(tmp_path)
        assert main(["validate", "--config", str(path)]) == 0
        assert "config ok" in capsys.readouterr().out

    def test_zero_column_exit_one(self, tmp_path, capsys):
        path = _write_config(
            tmp_path, matrices=[[[1.0, 0.0], [2.0, 0.0]], [[1.0, 1.0], [1.0, 2.0]]]
        )
        assert main(["validate", "--config", str(path)]) == 1
        assert "column 1" in capsys.readouterr().err

    def test_truncated_file_exit_two(self, tmp_path, capsys):
        path = tmp_path / "broken.yaml"
        path.write_text("dimension: 2\nmatrices: [[[1, 0")
        assert main(["validate", "--config", str(path)]) == 2
        assert "error" in capsys.readouterr().err

    def test_missing_file_exit_two(self, tmp_path):
        assert main(["validate", "--config", str(tmp_path / "nope.yaml")]) == 2


class TestSectionCommands:
    def test_analyze_permutation_reports_fails_ii(self, tmp_path, capsys):
        path = _write_config(
            tmp_path,
            matrices=[[[0.0, 1.0], [1.0, 0.0]]],
            probs=[1.0],
            output_dir=str(tmp_path / "out"),
        )
        code = main(["analyze", "--config", str(path), "--no-figures"])
        assert code == 0  # a scientific verdict is a result, not a failure
        report = (tmp_path / "out" / "report.txt").read_text()
        assert "condition-verdict: fails_ii" in report
        assert "positive-word: none" in report

    def test_recurrence_without_positive_product_fails(self, tmp_path, capsys):
        path = _write_config(
            tmp_path,
            matrices=[[[0.0, 1.0], [1.0, 0.0]]],
            probs=[1.0],
            output_dir=str(tmp_path / "out"),
        )
        assert main(["recurrence", "--config", str(path), "--no-figures"]) == 1

    def test_harmonic_periodic_seed_survives(self, tmp_path):
        lg2 = math.log(2.0)
        ds = lg2 / 8.0
        # window must outlast the drift flood: 2T > n_iter * log 2
        path = _write_config(
            tmp_path,
            matrices=[[[1.0, 1.0], [1.0, 1.0]]],
            probs=[1.0],
            output_dir=str(tmp_path / "out"),
            extra={
                "harmonic": {
                    "grid_nodes": 61,
                    "window_T": 400 * ds,
                    "ds": ds,
                    "n_iter": 60,
                    "initial": "cos",
                    "initial_period": lg2,
                }
            },
        )
        assert main(["harmonic", "--config", str(path), "--no-figures"]) == 0
        with open(tmp_path / "out" / "harmonic_history.csv") as fh:
            rows = list(csv.DictReader(fh))
        osc = np.array([float(r["osc"]) for r in rows])
        assert osc[-1] / osc[0] > 0.9  # the periodic harmonic survives

    def test_simulate_writes_trajectories_and_figures(self, tmp_path):
        path = _write_config(
            tmp_path,
            output_dir=str(tmp_path / "out"),
            extra={"walk": {"n_steps": 500, "n_paths": 2}},
        )
        assert main(["simulate", "--config", str(path)]) == 0
        out = tmp_path / "out"
        assert (out / "trajectory_000.csv").exists()
        assert (out / "trajectory_001.csv").exists()
        assert (out / "simulate.png").exists()
        assert (out / "timings.txt").exists()
        with open(out / "trajectory_000.csv") as fh:
            rows = list(csv.reader(fh))
        assert rows[0] == ["step", "x0", "x1", "s", "increment"]
        assert len(rows) == 502

    def test_report_runs_all_sections(self, tmp_path):
        path = _write_config(
            tmp_path,
            output_dir=str(tmp_path / "out"),
            extra={
                "walk": {"n_steps": 2000},
                "recurrence": {"n_trials": 200},
                "harmonic": {"grid_nodes": 31, "window_T": 2.0, "ds": 0.1, "n_iter": 20},
            },
        )
        assert main(["report", "--config", str(path), "--no-figures"]) == 0
        report = (tmp_path / "out" / "report.txt").read_text()
        for section in ("[config]", "[semigroup]", "[simulate]", "[stationary]",
                        "[recurrence]", "[harmonic]"):
            assert section in report

    def test_rerun_is_byte_identical(self, tmp_path):
        path = _write_config(
            tmp_path,
            output_dir=str(tmp_path / "ignored"),
            extra={
                "walk": {"n_steps": 1000},
                "recurrence": {"n_trials": 100},
                "harmonic": {"grid_nodes": 31, "window_T": 2.0, "ds": 0.1, "n_iter": 10},
            },
        )
        out_a, out_b = tmp_path / "a", tmp_path / "b"
        assert main(["report", "--config", str(path), "--out", str(out_a), "--no-figures"]) == 0
        assert main(["report", "--config", str(path), "--out", str(out_b), "--no-figures"]) == 0
        for f in sorted(out_a.iterdir()):
            if f.name == "timings.txt":
                continue
            assert f.read_bytes() == (out_b / f.name).read_bytes(), f.name

    def test_analyze_with_figures_handles_empty_lambda_set(self, tmp_path):
        path = _write_config(
            tmp_path,
            matrices=[[[0.0, 1.0], [1.0, 0.0]]],
            probs=[1.0],
            output_dir=str(tmp_path / "out"),
        )
        assert main(["analyze", "--config", str(path)]) == 0
        assert (tmp_path / "out" / "semigroup.png").exists()
