"""End-to-end experiment running: fit -> affinity -> normalized cut ->
metrics, over repeat seeds and hyperparameter grids, with CSV/SVG artifacts."""

from __future__ import annotations

import dataclasses
import itertools
import json
import os
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .admm import FitResult, fit
from .clustering import code_affinity, normalized_cut
from .core import FeatureSequence, Segmentation, SolverConfig, SolverMode
from .io import ingest
from .metrics import MetricReport, evaluate
from .synth import NoiseMode, SynthSpec, add_noise, generate

ENV_OUTPUT_DIR = "GCTSC_OUTPUT_DIR"

#: Hyperparameters a sweep may range over.
SWEEPABLE = ("lambda0", "lambda1", "lambda2", "h")


@dataclass
class ExperimentConfig:
    """Everything one experiment needs: a data source (file or synthetic
    spec), solver settings, the cluster count (None = from labels), the
    output directory, repeat seeds and optional sweep grids."""

    solver: SolverConfig = field(default_factory=SolverConfig)
    input_path: str | None = None
    labels_path: str | None = None
    synth: SynthSpec | None = None
    k: int | None = None
    output_dir: str | None = None
    seeds: list[int] = field(default_factory=lambda: [0])
    sweep: dict[str, list[float]] = field(default_factory=dict)

    def __post_init__(self):
        if (self.input_path is None) == (self.synth is None):
            raise ValueError("configure exactly one of input_path or synth")
        if not self.seeds:
            raise ValueError("need at least one seed")
        for name in self.sweep:
            if name not in SWEEPABLE:
                raise ValueError(f"cannot sweep over {name!r}; choose from {SWEEPABLE}")
            if not self.sweep[name]:
                raise ValueError(f"empty sweep grid for {name!r}")

    def resolve_output_dir(self) -> Path:
        out = self.output_dir or os.environ.get(ENV_OUTPUT_DIR) or "gctsc-out"
        path = Path(out)
        path.mkdir(parents=True, exist_ok=True)
        return path


def config_from_dict(data: dict) -> ExperimentConfig:
    """Build an ExperimentConfig from a plain (JSON-shaped) dictionary."""
    solver_data = dict(data.get("solver", {}))
    if "mode" in solver_data:
        solver_data["mode"] = SolverMode(solver_data["mode"])
    solver = SolverConfig(**solver_data)
    synth = None
    if "synth" in data and data["synth"] is not None:
        synth_data = dict(data["synth"])
        if "noise_mode" in synth_data:
            synth_data["noise_mode"] = NoiseMode(synth_data["noise_mode"])
        if "segment_lengths" in synth_data:
            synth_data["segment_lengths"] = [tuple(p) for p in synth_data["segment_lengths"]]
        synth = SynthSpec(**synth_data)
    k = data.get("k")
    if k in ("from-labels", None):
        k = None
    return ExperimentConfig(
        solver=solver,
        input_path=data.get("input"),
        labels_path=data.get("labels"),
        synth=synth,
        k=k,
        output_dir=data.get("output_dir"),
        seeds=list(data.get("seeds", [0])),
        sweep={name: list(vals) for name, vals in data.get("sweep", {}).items()},
    )


def load_config(path: str | Path) -> ExperimentConfig:
    with Path(path).open() as fh:
        return config_from_dict(json.load(fh))


def load_dataset(cfg: ExperimentConfig) -> FeatureSequence:
    """Materialize the experiment's data (file ingest or synthetic draw)."""
    if cfg.synth is not None:
        fs = generate(cfg.synth)
        if cfg.synth.noise_mode is not NoiseMode.NONE and cfg.synth.noise_sigma > 0:
            fs = add_noise(fs, cfg.synth)
        return fs
    return ingest(cfg.input_path, cfg.labels_path)


def resolve_k(cfg: ExperimentConfig, fs: FeatureSequence) -> int:
    if cfg.k is not None:
        k = int(cfg.k)
    elif fs.labels is not None:
        k = int(np.unique(fs.labels).size)
    else:
        raise ValueError("cluster count unresolved: no k given and no labels present")
    if k < 2:
        raise ValueError(f"need k >= 2 clusters, got {k}")
    return k


def run_single(
    fs: FeatureSequence, solver: SolverConfig, k: int, seed: int
) -> tuple[MetricReport | None, Segmentation, FitResult]:
    """One seeded pipeline pass; metrics are None without ground truth."""
    cfg = dataclasses.replace(solver, seed=seed)
    result = fit(fs, cfg)
    seg = normalized_cut(code_affinity(result.Z), k, seed=seed)
    report = evaluate(seg.labels, fs.labels) if fs.labels is not None else None
    return report, seg, result


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    std = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
    return float(arr.mean()), std


def run_experiment(cfg: ExperimentConfig) -> dict:
    """Run the pipeline for every seed and write the artifact files.

    Writes under the output directory: ``metrics.csv`` (per-seed rows plus
    mean and sample-std rows), ``diagnostics.csv`` (per-iteration solver
    trace per seed), ``labels.csv`` (true and predicted label strips) and
    ``segments.svg`` (strip rendering).  Returns the summary dict.
    """
    fs = load_dataset(cfg)
    if fs.labels is None:
        raise ValueError("run_experiment needs ground-truth labels for scoring")
    k = resolve_k(cfg, fs)
    out = cfg.resolve_output_dir()

    rows = []
    strips: dict[str, np.ndarray] = {"true": fs.labels}
    diag_lines = ["seed,iteration,objective,graph_loss,gap_fro,gap_inf,dict_gap_fro,code_gap_fro,sylvester_residual"]
    for seed in cfg.seeds:
        report, seg, result = run_single(fs, cfg.solver, k, seed)
        rows.append((seed, report.acc, report.nmi, result.iterations_run, result.converged))
        strips[f"pred_seed{seed}"] = seg.labels
        for d in result.diagnostics:
            diag_lines.append(
                f"{seed},{d.iteration},{d.objective:.10g},{d.graph_loss:.10g},"
                f"{d.gap_fro:.10g},{d.gap_inf:.10g},{d.dict_gap_fro:.10g},"
                f"{d.code_gap_fro:.10g},{d.sylvester_residual:.10g}"
            )

    acc_mean, acc_std = _mean_std([r[1] for r in rows])
    nmi_mean, nmi_std = _mean_std([r[2] for r in rows])

    metric_lines = ["seed,acc,nmi,iterations,converged"]
    for seed, acc, nmi_v, iters, conv in rows:
        metric_lines.append(f"{seed},{acc:.10g},{nmi_v:.10g},{iters},{str(conv).lower()}")
    metric_lines.append(f"mean,{acc_mean:.10g},{nmi_mean:.10g},,")
    metric_lines.append(f"std,{acc_std:.10g},{nmi_std:.10g},,")

    (out / "metrics.csv").write_text("\n".join(metric_lines) + "\n")
    (out / "diagnostics.csv").write_text("\n".join(diag_lines) + "\n")
    _write_label_strips(out / "labels.csv", strips)
    _write_segment_svg(out / "segments.svg", strips)

    return {
        "k": k,
        "n": fs.n,
        "N": fs.N,
        "acc_mean": acc_mean,
        "acc_std": acc_std,
        "nmi_mean": nmi_mean,
        "nmi_std": nmi_std,
        "per_seed": rows,
        "output_dir": str(out),
    }


def run_sweep(cfg: ExperimentConfig) -> list[dict]:
    """Cartesian sweep over the configured grids, one scored row per point.

    Duplicate grid points are dropped with a warning; rows are sorted by
    the parameter tuple and written to ``sweep.csv``.
    """
    if not cfg.sweep:
        raise ValueError("no sweep grids configured")
    fs = load_dataset(cfg)
    if fs.labels is None:
        raise ValueError("run_sweep needs ground-truth labels for scoring")
    k = resolve_k(cfg, fs)
    out = cfg.resolve_output_dir()

    names = sorted(cfg.sweep)
    points = []
    seen = set()
    for combo in itertools.product(*(cfg.sweep[name] for name in names)):
        if combo in seen:
            warnings.warn(f"duplicate sweep point {dict(zip(names, combo))} skipped", stacklevel=2)
            continue
        seen.add(combo)
        points.append(combo)
    points.sort()

    results = []
    for combo in points:
        solver = dataclasses.replace(cfg.solver, **dict(zip(names, combo)))
        accs, nmis = [], []
        for seed in cfg.seeds:
            report, _, _ = run_single(fs, solver, k, seed)
            accs.append(report.acc)
            nmis.append(report.nmi)
        acc_mean, acc_std = _mean_std(accs)
        nmi_mean, nmi_std = _mean_std(nmis)
        row = dict(zip(names, combo))
        row.update(acc_mean=acc_mean, acc_std=acc_std, nmi_mean=nmi_mean, nmi_std=nmi_std)
        results.append(row)

    header = names + ["acc_mean", "acc_std", "nmi_mean", "nmi_std"]
    lines = [",".join(header)]
    for row in results:
        lines.append(",".join(f"{row[c]:.10g}" for c in header))
    (out / "sweep.csv").write_text("\n".join(lines) + "\n")
    return results


def _write_label_strips(path: Path, strips: dict[str, np.ndarray]) -> None:
    names = list(strips)
    N = len(next(iter(strips.values())))
    lines = ["frame," + ",".join(names)]
    for t in range(N):
        lines.append(f"{t}," + ",".join(str(int(strips[name][t])) for name in names))
    path.write_text("\n".join(lines) + "\n")


_PALETTE = (
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f",
    "#edc948", "#b07aa1", "#ff9da7", "#9c755f", "#bab0ac",
)


def _write_segment_svg(path: Path, strips: dict[str, np.ndarray]) -> None:
    """Render each label strip as a row of colored per-frame rectangles."""
    names = list(strips)
    N = len(next(iter(strips.values())))
    width, row_h, gap, label_w = 800, 28, 10, 120
    height = len(names) * (row_h + gap) + gap
    cell = width / N
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width + label_w}" height="{height}">'
    ]
    for i, name in enumerate(names):
        y = gap + i * (row_h + gap)
        parts.append(
            f'<text x="4" y="{y + row_h / 2 + 4}" font-family="monospace" font-size="12">{name}</text>'
        )
        labels = strips[name]
        for start, end, cid in Segmentation.from_labels(labels).segments:
            x = label_w + start * cell
            w = (end - start + 1) * cell
            color = _PALETTE[int(cid) % len(_PALETTE)]
            parts.append(
                f'<rect x="{x:.2f}" y="{y}" width="{w:.2f}" height="{row_h}" fill="{color}"/>'
            )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")
