"""Command-line interface: run experiments, sweeps, synthetic data
generation and file-format conversion.

Exit codes: 0 on success, 1 on numerical failure, 2 on I/O or
configuration failure.
"""

from __future__ import annotations

import functools
import json
import sys
from pathlib import Path

import click
import numpy as np

from .admm import NumericalError
from .experiments import (
    ExperimentConfig,
    config_from_dict,
    run_experiment,
    run_sweep,
)
from .io import read_labels_csv, read_binary, read_csv_matrix, write_binary, write_csv_matrix, write_labels_csv
from .synth import NoiseMode, SynthSpec, add_noise, generate


def _guard(fn):
    """Map exceptions to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (NumericalError, np.linalg.LinAlgError, FloatingPointError) as exc:
            click.echo(f"numerical failure: {exc}", err=True)
            sys.exit(1)
        except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)

    return wrapper


def _load_synth_spec(path: str) -> SynthSpec:
    with Path(path).open() as fh:
        data = json.load(fh)
    if "noise_mode" in data:
        data["noise_mode"] = NoiseMode(data["noise_mode"])
    if "segment_lengths" in data:
        data["segment_lengths"] = [tuple(p) for p in data["segment_lengths"]]
    return SynthSpec(**data)


_SOLVER_FLAGS = (
    ("lambda0", float),
    ("lambda1", float),
    ("lambda2", float),
    ("rho", float),
    ("h", float),
    ("r", int),
    ("s", int),
    ("max_outer_iters", int),
    ("tol", float),
    ("mode", str),
    ("inner_gd_iters", int),
    ("inner_gd_step", float),
)


def _solver_options(fn):
    for name, kind in reversed(_SOLVER_FLAGS):
        flag = "--" + name.replace("_", "-")
        fn = click.option(flag, type=kind, default=None)(fn)
    return fn


def _build_config(config, input, labels, synth, k, out, seeds, sweep_grids=None, **solver_flags):
    data = {}
    if config is not None:
        with Path(config).open() as fh:
            data = json.load(fh)
    if input is not None:
        data["input"] = input
        data.pop("synth", None)
    if labels is not None:
        data["labels"] = labels
    if synth is not None:
        with Path(synth).open() as fh:
            data["synth"] = json.load(fh)
        data.pop("input", None)
    if k is not None:
        data["k"] = None if k == "from-labels" else int(k)
    if out is not None:
        data["output_dir"] = out
    if seeds is not None:
        data["seeds"] = [int(s) for s in seeds.split(",")]
    solver = dict(data.get("solver", {}))
    for name, _ in _SOLVER_FLAGS:
        if solver_flags.get(name) is not None:
            solver[name] = solver_flags[name]
    data["solver"] = solver
    if sweep_grids:
        grids = dict(data.get("sweep", {}))
        for spec in sweep_grids:
            name, _, values = spec.partition("=")
            if not values:
                raise ValueError(f"malformed --grid {spec!r}; expected name=v1,v2,...")
            grids[name] = [float(v) for v in values.split(",")]
        data["sweep"] = grids
    return config_from_dict(data)


@click.group()
def main():
    """Graph-constrained temporal subspace clustering."""


@main.command()
@click.option("--config", type=str, default=None, help="Experiment config JSON.")
@click.option("--input", type=str, default=None, help="Feature file (CSV or binary).")
@click.option("--labels", type=str, default=None, help="Companion label CSV.")
@click.option("--synth", type=str, default=None, help="Synthetic spec JSON.")
@click.option("--k", type=str, default=None, help='Cluster count or "from-labels".')
@click.option("--out", type=str, default=None, help="Output directory.")
@click.option("--seeds", type=str, default=None, help="Comma-separated repeat seeds.")
@_solver_options
@_guard
def run(config, input, labels, synth, k, out, seeds, **solver_flags):
    """Fit, cluster and score one experiment."""
    cfg = _build_config(config, input, labels, synth, k, out, seeds, **solver_flags)
    summary = run_experiment(cfg)
    click.echo(
        f"k={summary['k']} n={summary['n']} N={summary['N']} | "
        f"ACC {summary['acc_mean']:.4f} +/- {summary['acc_std']:.4f} | "
        f"NMI {summary['nmi_mean']:.4f} +/- {summary['nmi_std']:.4f}"
    )
    click.echo(f"artifacts written to {summary['output_dir']}")


@main.command()
@click.option("--config", type=str, default=None, help="Experiment config JSON.")
@click.option("--input", type=str, default=None)
@click.option("--labels", type=str, default=None)
@click.option("--synth", type=str, default=None)
@click.option("--k", type=str, default=None)
@click.option("--out", type=str, default=None)
@click.option("--seeds", type=str, default=None)
@click.option("--grid", "grids", type=str, multiple=True, help="Sweep grid name=v1,v2,...")
@_solver_options
@_guard
def sweep(config, input, labels, synth, k, out, seeds, grids, **solver_flags):
    """Grid search over hyperparameters, one scored row per point."""
    cfg = _build_config(config, input, labels, synth, k, out, seeds, sweep_grids=grids, **solver_flags)
    rows = run_sweep(cfg)
    names = [c for c in rows[0] if not c.endswith(("_mean", "_std"))]
    for row in rows:
        point = " ".join(f"{n}={row[n]:g}" for n in names)
        click.echo(f"{point} | ACC {row['acc_mean']:.4f} | NMI {row['nmi_mean']:.4f}")
    click.echo(f"sweep table written to {cfg.resolve_output_dir() / 'sweep.csv'}")


@main.command()
@click.option("--spec", type=str, required=True, help="Synthetic spec JSON.")
@click.option("--out-features", type=str, required=True)
@click.option("--out-labels", type=str, default=None)
@_guard
def synth(spec, out_features, out_labels):
    """Generate a synthetic labeled sequence and write it to disk."""
    sp = _load_synth_spec(spec)
    fs = generate(sp)
    if sp.noise_mode is not NoiseMode.NONE and sp.noise_sigma > 0:
        fs = add_noise(fs, sp)
    if out_features.endswith(".bin"):
        write_binary(out_features, fs.features, fs.labels)
    else:
        write_csv_matrix(out_features, fs.features)
        if out_labels is None:
            out_labels = str(Path(out_features).with_suffix(".labels.csv"))
    if out_labels is not None:
        write_labels_csv(out_labels, fs.labels)
    click.echo(f"wrote {fs.n}x{fs.N} features to {out_features}")


@main.command()
@click.option("--input", "input_path", type=str, required=True)
@click.option("--output", "output_path", type=str, required=True)
@click.option("--labels", type=str, default=None, help="Label CSV for CSV input.")
@click.option("--labels-out", type=str, default=None, help="Label CSV for CSV output.")
@_guard
def convert(input_path, output_path, labels, labels_out):
    """Convert features between the CSV and binary containers."""
    src = Path(input_path)
    if not src.exists():
        raise FileNotFoundError(f"input file not found: {src}")
    with src.open("rb") as fh:
        is_binary = fh.read(4) == b"GCRL"
    if is_binary:
        X, lab = read_binary(src)
    else:
        X = read_csv_matrix(src)
        lab = read_labels_csv(labels) if labels else None
    if output_path.endswith(".bin"):
        write_binary(output_path, X, lab)
    else:
        write_csv_matrix(output_path, X)
        if lab is not None:
            write_labels_csv(labels_out or str(Path(output_path).with_suffix(".labels.csv")), lab)
    click.echo(f"converted {src} -> {output_path}")


if __name__ == "__main__":
    main()
