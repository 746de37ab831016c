import json

import numpy as np
import pytest
from click.testing import CliRunner

from gctsc.cli import main
from gctsc.core import seeded_rng
from gctsc.io import (
    ingest,
    read_binary,
    read_csv_matrix,
    read_labels_csv,
    write_binary,
    write_csv_matrix,
    write_labels_csv,
)


def test_csv_roundtrip(tmp_path):
    path = tmp_path / "x.csv"
    path.write_text("0,0.5,1\n1,0.5,0\n")
    X = read_csv_matrix(path)
    assert X.shape == (2, 3)
    assert np.array_equal(X, [[0.0, 0.5, 1.0], [1.0, 0.5, 0.0]])
    out = tmp_path / "y.csv"
    write_csv_matrix(out, X)
    assert np.array_equal(read_csv_matrix(out), X)


def test_csv_nan_names_position(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("0,0.5\n1,nan\n")
    with pytest.raises(ValueError, match="row 1, column 1"):
        read_csv_matrix(path)


def test_csv_ragged_row(tmp_path):
    path = tmp_path / "ragged.csv"
    path.write_text("0,1,2\n3,4\n")
    with pytest.raises(ValueError, match="dimension mismatch"):
        read_csv_matrix(path)


def test_csv_malformed_value(tmp_path):
    path = tmp_path / "junk.csv"
    path.write_text("0,abc\n")
    with pytest.raises(ValueError, match="malformed"):
        read_csv_matrix(path)


def test_binary_roundtrip(tmp_path):
    X = seeded_rng(0).uniform(0, 1, (7, 11))
    labels = seeded_rng(1).integers(0, 3, 11)
    path = tmp_path / "x.bin"
    write_binary(path, X, labels)
    X2, labels2 = read_binary(path)
    assert np.array_equal(X, X2)
    assert np.array_equal(labels, labels2)
    write_binary(path, X)
    X3, labels3 = read_binary(path)
    assert np.array_equal(X, X3) and labels3 is None


def test_binary_bad_magic(tmp_path):
    path = tmp_path / "bad.bin"
    path.write_bytes(b"NOPE" + b"\x00" * 20)
    with pytest.raises(ValueError, match="magic"):
        read_binary(path)


def test_binary_truncated(tmp_path):
    X = np.ones((4, 6))
    path = tmp_path / "x.bin"
    write_binary(path, X)
    path.write_bytes(path.read_bytes()[:-40])
    with pytest.raises(ValueError, match="truncated"):
        read_binary(path)


def test_ingest_normalizes_and_attaches_labels(tmp_path):
    feats = tmp_path / "x.csv"
    feats.write_text("0,2,4\n8,2,0\n")
    labels = tmp_path / "y.csv"
    labels.write_text("0\n0\n1\n")
    fs = ingest(feats, labels)
    assert fs.features.min() == 0.0 and fs.features.max() == 1.0
    assert np.array_equal(fs.labels, [0, 0, 1])


def test_ingest_label_length_mismatch(tmp_path):
    feats = tmp_path / "x.csv"
    feats.write_text("0,2,4\n8,2,0\n")
    labels = tmp_path / "y.csv"
    labels.write_text("0\n1\n")
    with pytest.raises(ValueError, match="dimension mismatch"):
        ingest(feats, labels)


def test_ingest_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError, match="nope.csv"):
        ingest(tmp_path / "nope.csv")


def test_labels_csv_roundtrip(tmp_path):
    path = tmp_path / "labels.csv"
    write_labels_csv(path, np.array([3, 1, 2]))
    assert np.array_equal(read_labels_csv(path), [3, 1, 2])


@pytest.fixture
def synth_spec_file(tmp_path):
    spec = dict(n=20, M=2, dim_m=[1, 1], segment_lengths=[[0, 15], [1, 15]], seed=3)
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(spec))
    return path


def test_cli_synth_run_pipeline(tmp_path, synth_spec_file):
    runner = CliRunner()
    feats = tmp_path / "X.csv"
    res = runner.invoke(main, ["synth", "--spec", str(synth_spec_file), "--out-features", str(feats)])
    assert res.exit_code == 0, res.output
    out = tmp_path / "out"
    args = [
        "run", "--input", str(feats), "--labels", str(tmp_path / "X.labels.csv"),
        "--k", "from-labels", "--out", str(out), "--seeds", "0,1,2,3,4",
        "--max-outer-iters", "40", "--r", "4", "--s", "3",
    ]
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    assert "NMI 1.0000 +/- 0.0000" in res.output
    for name in ("metrics.csv", "diagnostics.csv", "labels.csv", "segments.svg"):
        assert (out / name).exists()
    lines = (out / "metrics.csv").read_text().splitlines()
    assert lines[-2].startswith("mean,1,1") and lines[-1].startswith("std,0,0")
    header = (out / "diagnostics.csv").read_text().splitlines()[0]
    assert "gap_fro" in header and "gap_inf" in header
    svg = (out / "segments.svg").read_text()
    assert svg.startswith("<svg") and svg.count("<rect") >= 12  # 6 strips x 2 segments


def test_cli_run_deterministic_artifacts(tmp_path, synth_spec_file):
    runner = CliRunner()
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        args = [
            "run", "--synth", str(synth_spec_file), "--k", "2", "--out", str(out),
            "--seeds", "0,1", "--max-outer-iters", "25", "--r", "4", "--s", "3",
        ]
        res = runner.invoke(main, args)
        assert res.exit_code == 0, res.output
        outputs.append((out / "metrics.csv").read_bytes())
    assert outputs[0] == outputs[1]


def test_cli_ablation_not_better_than_full(tmp_path, synth_spec_file):
    runner = CliRunner()
    scores = {}
    for mode in ("full", "tsc-ablation"):
        out = tmp_path / mode
        args = [
            "run", "--synth", str(synth_spec_file), "--k", "2", "--out", str(out),
            "--seeds", "0", "--max-outer-iters", "40", "--r", "4", "--s", "3",
            "--mode", mode,
        ]
        res = runner.invoke(main, args)
        assert res.exit_code == 0, res.output
        mean_row = (out / "metrics.csv").read_text().splitlines()[-2]
        scores[mode] = float(mean_row.split(",")[2])
    assert scores["tsc-ablation"] <= scores["full"] + 1e-9


def test_cli_sweep_grid(tmp_path, synth_spec_file):
    runner = CliRunner()
    out = tmp_path / "sweep"
    args = [
        "sweep", "--synth", str(synth_spec_file), "--k", "2", "--out", str(out),
        "--seeds", "0", "--max-outer-iters", "15", "--r", "4", "--s", "3",
        "--grid", "lambda0=0.1,0.25", "--grid", "lambda2=1,10",
    ]
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "lambda0,lambda2,acc_mean,acc_std,nmi_mean,nmi_std"
    assert len(lines) == 5  # header + 2x2 grid


def test_cli_sweep_deduplicates(tmp_path, synth_spec_file):
    from gctsc.experiments import config_from_dict, run_sweep

    cfg = config_from_dict(
        dict(
            synth=json.loads(synth_spec_file.read_text()),
            k=2,
            output_dir=str(tmp_path / "dedup"),
            seeds=[0],
            solver=dict(max_outer_iters=10, r=4, s=3),
            sweep=dict(lambda0=[0.1, 0.1, 0.25]),
        )
    )
    with pytest.warns(UserWarning, match="duplicate"):
        rows = run_sweep(cfg)
    assert len(rows) == 2


def test_cli_missing_input_exit_2():
    runner = CliRunner()
    res = runner.invoke(main, ["run", "--input", "does-not-exist.csv", "--k", "2"])
    assert res.exit_code == 2
    assert "does-not-exist.csv" in res.output


def test_cli_bad_config_exit_2(tmp_path, synth_spec_file):
    runner = CliRunner()
    res = runner.invoke(
        main, ["run", "--synth", str(synth_spec_file), "--k", "2", "--rho", "-1"]
    )
    assert res.exit_code == 2


def test_cli_numerical_failure_exit_1(tmp_path, synth_spec_file, monkeypatch):
    import gctsc.cli as cli_mod
    from gctsc import NumericalError

    def boom(cfg):
        raise NumericalError("solver produced non-finite iterates")

    monkeypatch.setattr(cli_mod, "run_experiment", boom)
    runner = CliRunner()
    res = runner.invoke(main, ["run", "--synth", str(synth_spec_file), "--k", "2"])
    assert res.exit_code == 1
    assert "numerical failure" in res.output


def test_cli_convert_roundtrip(tmp_path, synth_spec_file):
    runner = CliRunner()
    feats = tmp_path / "X.csv"
    res = runner.invoke(main, ["synth", "--spec", str(synth_spec_file), "--out-features", str(feats)])
    assert res.exit_code == 0, res.output
    binpath = tmp_path / "X.bin"
    res = runner.invoke(
        main,
        ["convert", "--input", str(feats), "--output", str(binpath),
         "--labels", str(tmp_path / "X.labels.csv")],
    )
    assert res.exit_code == 0, res.output
    back = tmp_path / "back.csv"
    res = runner.invoke(main, ["convert", "--input", str(binpath), "--output", str(back)])
    assert res.exit_code == 0, res.output
    assert np.allclose(read_csv_matrix(back), read_csv_matrix(feats))
    X, labels = read_binary(binpath)
    assert labels is not None and labels.size == X.shape[1]


def test_cli_config_file(tmp_path, synth_spec_file):
    runner = CliRunner()
    cfg = dict(
        synth=json.loads(synth_spec_file.read_text()),
        k=2,
        output_dir=str(tmp_path / "cfgout"),
        seeds=[0],
        solver=dict(max_outer_iters=20, r=4, s=3),
    )
    cfg_path = tmp_path / "exp.json"
    cfg_path.write_text(json.dumps(cfg))
    res = runner.invoke(main, ["run", "--config", str(cfg_path)])
    assert res.exit_code == 0, res.output
    assert (tmp_path / "cfgout" / "metrics.csv").exists()


def test_output_dir_env_default(tmp_path, synth_spec_file, monkeypatch):
    monkeypatch.setenv("GCTSC_OUTPUT_DIR", str(tmp_path / "envout"))
    runner = CliRunner()
    args = [
        "run", "--synth", str(synth_spec_file), "--k", "2", "--seeds", "0",
        "--max-outer-iters", "10", "--r", "4", "--s", "3",
    ]
    res = runner.invoke(main, args)
    assert res.exit_code == 0, res.output
    assert (tmp_path / "envout" / "metrics.csv").exists()
