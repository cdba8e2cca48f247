import json
from pathlib import Path

import pytest

from mofs.cli import build_parser, main


@pytest.fixture(scope="module")
def demo_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("demo")
    code = main(["demo-data", "--out", str(out), "--train-rows", "240",
                 "--test-rows", "160", "--noise-features", "3",
                 "--seed", "5"])
    assert code == 0
    return out


def run_args(demo_dir, out, **extra):
    args = ["run", "--config", str(demo_dir / "demo_config.json"),
            "--pop", "8", "--gens", "2", "--repeats", "2", "--seed", "3",
            "--out", str(out)]
    for key, value in extra.items():
        args.extend([f"--{key}", str(value)])
    return args


def test_demo_data_files(demo_dir):
    assert (demo_dir / "train.csv").is_file()
    assert (demo_dir / "test.csv").is_file()
    config = json.loads((demo_dir / "demo_config.json").read_text(encoding="utf-8"))
    assert config["dataset"]["feature_count"] == 5
    assert config["train_path"].endswith("train.csv")
    assert len((demo_dir / "train.csv").read_text(encoding="utf-8").strip()
               .split("\n")) == 240


def test_run_subcommand_writes_outputs(demo_dir, tmp_path, capsys):
    out = tmp_path / "run"
    code = main(run_args(demo_dir, out))
    assert code == 0
    captured = capsys.readouterr().out
    assert "nsga2-dr3: 2 repeat(s) finished" in captured
    assert "no-selection reference" in captured
    assert (out / "config.json").is_file()
    assert (out / "summary.csv").is_file()
    assert (out / "repeat_00" / "archive.csv").is_file()
    assert (out / "repeat_01" / "archive.csv").is_file()


def test_run_flag_overrides_config(demo_dir, tmp_path):
    out = tmp_path / "run"
    code = main(run_args(demo_dir, out, algorithm="moead", formulation="acc2"))
    assert code == 0
    echo = json.loads((out / "config.json").read_text(encoding="utf-8"))
    assert echo["config"]["algorithm"] == "moead"
    assert echo["config"]["formulation"] == "acc2"
    assert echo["config"]["pop"] == 8  # flag value, not the default


def test_baseline_subcommand(demo_dir, tmp_path, capsys):
    out = tmp_path / "base"
    code = main(["baseline", "--method", "sfs",
                 "--config", str(demo_dir / "demo_config.json"),
                 "--k-grid", "1,2,9",
                 "--repeats", "1", "--seed", "3", "--out", str(out)])
    assert code == 0
    captured = capsys.readouterr()
    assert "sfs: grid done" in captured.out
    assert "k=9" in captured.err  # infeasible k warned on stderr
    assert (out / "repeat_00" / "grid.csv").is_file()


def test_baseline_pca_size_note(demo_dir, tmp_path, capsys):
    out = tmp_path / "pca"
    code = main(["baseline", "--method", "pca",
                 "--config", str(demo_dir / "demo_config.json"),
                 "--k-grid", "1,2", "--repeats", "1", "--out", str(out)])
    assert code == 0
    assert "retained components" in capsys.readouterr().out


def test_report_and_project_pipeline(demo_dir, tmp_path, capsys):
    run_a = tmp_path / "a"
    run_b = tmp_path / "b"
    assert main(run_args(demo_dir, run_a)) == 0
    assert main(["baseline", "--method", "rfe",
                 "--config", str(demo_dir / "demo_config.json"),
                 "--k-grid", "2,3", "--repeats", "2", "--seed", "3",
                 "--out", str(run_b)]) == 0
    capsys.readouterr()

    report_out = tmp_path / "report"
    code = main(["report", "--inputs", str(run_a), str(run_b),
                 "--out", str(report_out)])
    assert code == 0
    captured = capsys.readouterr().out
    assert "nsga2-dr3 *" in captured
    assert "report written to" in captured
    assert "figure written to" in captured
    assert (report_out / "report.csv").is_file()
    assert (report_out / "report.txt").is_file()
    assert (report_out / "report.png").is_file()

    project_out = tmp_path / "proj"
    code = main(["project", "--inputs", str(run_a), str(run_b),
                 "--out", str(project_out), "--no-figures"])
    assert code == 0
    assert not (project_out / "projection.png").exists()
    assert (project_out / "projection_accuracy_detection_rate.csv").is_file()


def test_report_no_figures_flag(demo_dir, tmp_path, capsys):
    run_dir = tmp_path / "run"
    assert main(run_args(demo_dir, run_dir)) == 0
    capsys.readouterr()
    out = tmp_path / "report"
    assert main(["report", "--inputs", str(run_dir), "--out", str(out),
                 "--no-figures"]) == 0
    assert not (out / "report.png").exists()
    assert (out / "report.txt").is_file()


def test_report_single_repeat_footnote(demo_dir, tmp_path, capsys):
    run_dir = tmp_path / "single"
    assert main(run_args(demo_dir, run_dir, repeats=1)) == 0
    capsys.readouterr()
    out = tmp_path / "report"
    assert main(["report", "--inputs", str(run_dir), "--out", str(out),
                 "--no-figures"]) == 0
    assert "single repeat" in capsys.readouterr().out


def test_cli_error_path_exit_code(tmp_path, capsys):
    code = main(["run", "--dataset", "nslkdd",
                 "--train", str(tmp_path / "missing.csv"),
                 "--test", str(tmp_path / "missing.csv"),
                 "--pop", "8", "--gens", "1"])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_cli_unknown_config_key(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"population": 5}), encoding="utf-8")
    code = main(["run", "--config", str(bad)])
    assert code == 2
    assert "unknown config keys" in capsys.readouterr().err


def test_parser_rejects_bad_choices(capsys):
    parser = build_parser()
    with pytest.raises(SystemExit):
        parser.parse_args(["run", "--algorithm", "annealing"])
    with pytest.raises(SystemExit):
        parser.parse_args(["baseline"])  # --method is required
    capsys.readouterr()


def test_project_duplicate_labels_disambiguated(demo_dir, tmp_path, capsys):
    run_a = tmp_path / "a"
    run_b = tmp_path / "b"
    assert main(run_args(demo_dir, run_a)) == 0
    assert main(run_args(demo_dir, run_b)) == 0
    capsys.readouterr()
    out = tmp_path / "proj"
    assert main(["project", "--inputs", str(run_a), str(run_b),
                 "--out", str(out), "--no-figures"]) == 0
    text = (out / "projection_accuracy_detection_rate.csv").read_text(encoding="utf-8")
    assert "nsga2-dr3#2" in text
