import json

import numpy as np
import pytest

from unimix_lt.cli import main
from unimix_lt.data import load_csv

TINY_TRAIN = {
    "classes": 4, "rho": 10.0, "n_max": 40, "dims": 4,
    "loss": "bayias_ce", "t1_steps": 20, "t2_steps": 30, "batch_size": 16,
    "lr": 0.1, "hidden_dims": [8], "seed": 3,
}


def write_cfg(tmp_path, cfg, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_bytes(directory):
    return {p.name: p.read_bytes() for p in directory.iterdir() if p.is_file()}


def test_no_arguments_prints_usage(capsys):
    assert main([]) == 1
    assert "usage" in capsys.readouterr().err.lower()


def test_unknown_subcommand_and_bad_flag():
    assert main(["frobnicate"]) == 1
    assert main(["gen-data", "--out", "x", "--classes", "not-a-number"]) == 1


def test_help_exits_zero():
    assert main(["--help"]) == 0


def test_gen_data_gaussians(tmp_path):
    out = tmp_path / "run"
    assert main(["gen-data", "--out", str(out), "--classes", "5", "--rho", "10",
                 "--n-max", "50", "--dims", "3", "--seed", "1"]) == 0
    ds = load_csv(out / "data.csv")
    assert ds.num_classes == 5 and ds.dims == 3
    meta = json.loads((out / "meta.json").read_text())
    assert meta["class_counts"] == ds.class_counts.tolist()
    assert (out / "config.resolved.json").is_file()


def test_gen_data_circles(tmp_path):
    out = tmp_path / "run"
    assert main(["gen-data", "--out", str(out), "--kind", "circles",
                 "--n-pos", "60", "--n-neg", "6", "--seed", "2"]) == 0
    ds = load_csv(out / "data.csv")
    np.testing.assert_array_equal(ds.class_counts, [60, 6])


def test_gen_data_rejects_bad_kind(tmp_path):
    assert main(["gen-data", "--out", str(tmp_path / "x"), "--kind", "gaussians",
                 "--n-max", "2", "--classes", "5"]) == 1


def test_verify_dist_shapes(tmp_path):
    out = tmp_path / "vd"
    assert main(["verify-dist", "--out", str(out), "--classes", "100", "--rho", "200",
                 "--tau", "-1", "--trials", "20000", "--seed", "7"]) == 0
    curve_lines = (out / "curves.csv").read_text().strip().splitlines()
    assert curve_lines[0] == "kind,y,density"
    assert len(curve_lines) == 1 + 4 * 100  # four closed-form curves on the class grid
    hist_lines = (out / "histogram.csv").read_text().strip().splitlines()
    assert hist_lines[0] == "class,empirical_prob,closed_form_prob"
    assert len(hist_lines) == 1 + 100
    emp = np.array([float(l.split(",")[1]) for l in hist_lines[1:]])
    assert abs(emp.sum() - 1.0) < 1e-9


def test_verify_dist_rejects_tau_zero_full(tmp_path):
    assert main(["verify-dist", "--out", str(tmp_path / "x"), "--classes", "10",
                 "--rho", "10", "--tau", "0", "--trials", "100"]) == 1


def test_train_then_eval_pipeline(tmp_path):
    run = tmp_path / "run"
    cfg = write_cfg(tmp_path, TINY_TRAIN)
    assert main(["train", "--config", cfg, "--out", str(run)]) == 0
    assert (run / "model.json").is_file()
    log_lines = (run / "train_log.csv").read_text().strip().splitlines()
    assert log_lines[0] == "step,phase,loss,lr"
    assert len(log_lines) == 1 + 30

    test_dir = tmp_path / "test_data"
    assert main(["gen-data", "--out", str(test_dir), "--classes", "4", "--rho", "1",
                 "--n-max", "25", "--dims", "4", "--seed", "99"]) == 0
    ev = tmp_path / "eval"
    assert main(["eval", "--out", str(ev), "--model", str(run / "model.json"),
                 "--data", str(test_dir / "data.csv")]) == 0
    report = json.loads((ev / "report.json").read_text())
    assert set(report) == {"accuracy", "ece", "mce", "ace", "tace", "sce", "brier"}
    assert (ev / "reliability.csv").read_text().splitlines()[0] == "bin_lo,bin_hi,count,acc,conf"
    assert (ev / "density.csv").read_text().splitlines()[0] == "batch,conf,acc"
    assert (ev / "confusion.csv").is_file() and (ev / "confusion_log.csv").is_file()


def test_train_requires_config(tmp_path):
    assert main(["train", "--out", str(tmp_path / "x")]) == 1


def test_train_rejects_unknown_keys(tmp_path):
    cfg = write_cfg(tmp_path, {**TINY_TRAIN, "zebra": 1})
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "x")]) == 1


def test_train_rejects_bad_loss(tmp_path):
    cfg = write_cfg(tmp_path, {**TINY_TRAIN, "loss": "hinge"})
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "x")]) == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")  # overflow is the point
def test_train_divergence_exits_two(tmp_path):
    cfg = write_cfg(tmp_path, {**TINY_TRAIN, "lr": 1e30, "t1_steps": 0, "t2_steps": 30})
    assert main(["train", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


def test_train_replay_is_bitwise(tmp_path):
    run_a = tmp_path / "a"
    run_b = tmp_path / "b"
    cfg = write_cfg(tmp_path, TINY_TRAIN)
    assert main(["train", "--config", cfg, "--out", str(run_a)]) == 0
    assert main(["train", "--config", str(run_a / "config.resolved.json"),
                 "--out", str(run_b)]) == 0
    assert read_bytes(run_a) == read_bytes(run_b)


def test_verify_dist_replay_is_bitwise(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert main(["verify-dist", "--out", str(a), "--classes", "10", "--rho", "10",
                 "--trials", "5000", "--seed", "3"]) == 0
    assert main(["verify-dist", "--out", str(b),
                 "--config", str(a / "config.resolved.json")]) == 0
    assert read_bytes(a) == read_bytes(b)


def test_run_dirs_are_single_command(tmp_path):
    run = tmp_path / "run"
    cfg = write_cfg(tmp_path, TINY_TRAIN)
    assert main(["train", "--config", cfg, "--out", str(run)]) == 0
    data = tmp_path / "data"
    assert main(["gen-data", "--out", str(data), "--classes", "4", "--rho", "1",
                 "--n-max", "20", "--dims", "4", "--seed", "0"]) == 0
    # evaluating into the training run directory would clobber its config
    assert main(["eval", "--out", str(run), "--model", str(run / "model.json"),
                 "--data", str(data / "data.csv")]) == 1
    # replaying the same command into the same directory is allowed
    assert main(["train", "--config", str(run / "config.resolved.json"),
                 "--out", str(run)]) == 0


def test_report_follows_model_pointer(tmp_path):
    run = tmp_path / "train_run"
    cfg = write_cfg(tmp_path, TINY_TRAIN)
    assert main(["train", "--config", cfg, "--out", str(run)]) == 0
    data = tmp_path / "data"
    assert main(["gen-data", "--out", str(data), "--classes", "4", "--rho", "1",
                 "--n-max", "20", "--dims", "4", "--seed", "0"]) == 0
    runs = tmp_path / "evals"
    assert main(["eval", "--out", str(runs / "combo"), "--model",
                 str(run / "model.json"), "--data", str(data / "data.csv")]) == 0
    assert main(["report", "--runs", str(runs)]) == 0
    rows = json.loads((runs / "summary.json").read_text())
    assert rows[0]["loss"] == "bayias_ce"
    assert rows[0]["mix_mode"] == "unimix_full"


def test_eval_dimension_mismatch(tmp_path):
    run = tmp_path / "run"
    cfg = write_cfg(tmp_path, TINY_TRAIN)
    assert main(["train", "--config", cfg, "--out", str(run)]) == 0
    bad = tmp_path / "bad"
    assert main(["gen-data", "--out", str(bad), "--classes", "4", "--rho", "1",
                 "--n-max", "20", "--dims", "7", "--seed", "0"]) == 0
    assert main(["eval", "--out", str(tmp_path / "x"), "--model", str(run / "model.json"),
                 "--data", str(bad / "data.csv")]) == 1


def test_circles_demo_outputs(tmp_path):
    out = tmp_path / "circles"
    assert main(["circles-demo", "--out", str(out), "--steps", "60", "--seed", "1",
                 "--cloud-points", "40"]) == 0
    lines = (out / "boundary.csv").read_text().strip().splitlines()
    assert lines[0] == "scenario,w0,w1,b,angle_error_deg,offset"
    assert [l.split(",")[0] for l in lines[1:]] == ["balanced", "imbalanced",
                                                    "mixup", "unimix"]
    points = (out / "points.csv").read_text().strip().splitlines()
    assert points[0] == "scenario,x,y,label,is_virtual"
    virtual = [l for l in points[1:] if l.endswith(",1")]
    assert len(virtual) == 2 * 40  # mixup and unimix clouds


def test_report_aggregates_and_warns(tmp_path, capsys):
    runs = tmp_path / "runs"
    for name, acc in (("a_run", 0.5), ("b_run", 0.75)):
        d = runs / name
        d.mkdir(parents=True)
        scalars = {"accuracy": acc, "ece": 0.1, "mce": 0.2, "ace": 0.1,
                   "tace": 0.1, "sce": 0.05, "brier": 0.3}
        (d / "report.json").write_text(json.dumps(scalars))
        (d / "config.resolved.json").write_text(
            json.dumps({"loss": "ce", "mix_mode": "unimix_full"}))
    corrupt = runs / "c_run"
    corrupt.mkdir()
    (corrupt / "report.json").write_text("{not json")
    out = tmp_path / "summary"
    assert main(["report", "--runs", str(runs), "--out", str(out)]) == 0
    assert "c_run" in capsys.readouterr().err
    lines = (out / "summary.csv").read_text().strip().splitlines()
    assert lines[0].startswith("run,loss,mix_mode,accuracy")
    assert [l.split(",")[0] for l in lines[1:]] == ["a_run", "b_run"]
    rows = json.loads((out / "summary.json").read_text())
    assert rows[1]["accuracy"] == 0.75


def test_report_empty_dir_fails(tmp_path):
    runs = tmp_path / "runs"
    runs.mkdir()
    assert main(["report", "--runs", str(runs)]) == 1
