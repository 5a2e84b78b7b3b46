import json

import pytest

from passorder.cli import main
from passorder.experiments import (
    CSV_HEADER,
    ScenarioSpec,
    run_golden,
    run_sweep,
)


class TestGolden:
    def test_passes(self, capsys):
        assert main(["golden"]) == 0
        out = capsys.readouterr().out
        assert "golden example: PASS" in out
        assert out.count("PASS") == 8  # 7 checks + verdict

    def test_corrupt_negative_control(self, capsys):
        assert main(["golden", "--corrupt"]) == 1
        out = capsys.readouterr().out
        assert "FAIL d_all: expected" in out
        assert "golden example: FAIL" in out

    def test_report_object(self):
        report = run_golden()
        assert report.passed
        names = [c.name for c in report.checks]
        assert names == [
            "conflict_sets",
            "cdg_uni_edges",
            "cdg_bi_edges",
            "cug_edges",
            "d_all",
            "opt_dfst_depths",
            "mm_layers",
        ]


class TestSweep:
    def test_csv_schema_and_row_count(self, tmp_path, capsys):
        code = main(
            [
                "sweep",
                "--n", "10",
                "--seeds", "2",
                "--scheduler", "dfst,mm",
                "--out", str(tmp_path),
                "--no-runtime",
            ]
        )
        assert code == 0
        csv_text = (tmp_path / "sweep.csv").read_text()
        lines = csv_text.splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 1 + 4  # 2 schedulers x 1 n x 2 seeds
        aggregates = json.loads((tmp_path / "aggregates.json").read_text())
        assert "dfst.n10.evac_mean_s" in aggregates
        assert "mm.n10.evac_std_s" in aggregates

    def test_byte_identical_reruns(self, tmp_path):
        spec = ScenarioSpec(
            n_values=(12,),
            seeds=(0, 1),
            schedulers=("opt_dfst",),
            measure_runtime=False,
        )
        assert run_sweep(spec).to_csv() == run_sweep(spec).to_csv()

    def test_env_var_out_dir(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("PASSORDER_OUT", str(tmp_path / "from_env"))
        code = main(
            ["sweep", "--n", "5", "--seeds", "1", "--scheduler", "dfst",
             "--no-runtime"]
        )
        assert code == 0
        assert (tmp_path / "from_env" / "sweep.csv").exists()

    def test_config_file(self, tmp_path, capsys):
        config = tmp_path / "scenario.json"
        config.write_text(
            json.dumps(
                {
                    "p": 0.4,
                    "n": [8],
                    "seeds": [3],
                    "schedulers": ["mm"],
                    "out": str(tmp_path / "results"),
                    "sim": {"lock_distance": 120.0},
                }
            )
        )
        assert main(["sweep", "--config", str(config), "--no-runtime"]) == 0
        lines = (tmp_path / "results" / "sweep.csv").read_text().splitlines()
        assert lines[1].startswith("mm,8,3,")

    def test_invalid_spec_rejected(self):
        with pytest.raises(ValueError, match="at least one seed"):
            ScenarioSpec(seeds=())
        with pytest.raises(ValueError, match="unknown schedulers"):
            ScenarioSpec(schedulers=("magic",))
        with pytest.raises(ValueError, match="probability"):
            ScenarioSpec(probability=1.4)

    def test_minimal_spec_single_row(self):
        spec = ScenarioSpec(
            n_values=(1,), seeds=(0,), schedulers=("mm",),
            measure_runtime=False,
        )
        result = run_sweep(spec)
        assert len(result.rows) == 1
        assert result.rows[0].evac_s > 0.0


class TestSimulateCommand:
    def test_example1_metrics_json(self, tmp_path, capsys):
        out = tmp_path / "metrics.json"
        code = main(
            ["simulate", "--scheduler", "mm", "--example1", "--json", str(out)]
        )
        assert code == 0
        payload = json.loads(out.read_text())
        assert payload["d_all"] == 3
        assert payload["safety_violations"] == 0

    def test_seeded_run_with_trajectory(self, tmp_path, capsys):
        trajectory = tmp_path / "traj.csv"
        code = main(
            [
                "simulate",
                "--scheduler", "dfst",
                "--n", "6",
                "--seed", "2",
                "--trajectory", str(trajectory),
            ]
        )
        assert code == 0
        lines = trajectory.read_text().splitlines()
        assert lines[0] == "t,vehicle,lane,pos,vel,depth"
        assert len(lines) > 10


class TestExportGraphs:
    def test_example1_stdout(self, capsys):
        assert main(["export-graphs", "--example1"]) == 0
        out = capsys.readouterr().out
        assert out.startswith("cdg 6\n")
        assert "cug 6" in out
        assert "u 5 6" in out
        assert "e 3 6" in out

    def test_random_fleet_to_files(self, tmp_path, capsys):
        code = main(
            ["export-graphs", "--n", "9", "--seed", "4", "--out", str(tmp_path)]
        )
        assert code == 0
        cdg_text = (tmp_path / "cdg.txt").read_text()
        cug_text = (tmp_path / "cug.txt").read_text()
        assert cdg_text.startswith("cdg 9\n")
        assert cug_text.startswith("cug 9\n")
        n_pairs = 9 * 8 // 2
        edge_lines = len(cdg_text.splitlines()) - 1 + len(cug_text.splitlines()) - 1
        # every unordered vehicle pair appears exactly once across the two
        # files, plus the root links
        root_links = sum(
            1 for line in cdg_text.splitlines() if line.startswith("u 0 ")
        )
        assert edge_lines == n_pairs + root_links
