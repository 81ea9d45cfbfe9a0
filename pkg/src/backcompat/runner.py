"""Executes a parsed experiment config and writes its output files.

Every experiment writes into the config's output directory and returns the
relative paths it wrote plus a one-line machine-parseable summary; the CLI
wraps this in a RunManifest. All files are deterministic functions of the
config, so a rerun is byte-identical.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

from .compat import align, compare
from .config import ExperimentConfig
from .errors import ConfigError
from .experiments import (
    BaselineResult,
    SweepResult,
    TrialResult,
    lambda_sweep,
    noise_sweep,
    saturation_curve,
    stochasticity_baseline,
)
from .forgetting import (
    QUADRANT_NAMES,
    count_forgetting_events,
    forgetting_by_quadrant,
    write_forgetting_table,
)
from .logs import load_prediction_log
from .pipeline import (
    blacklist_report,
    char_accuracy_from_log,
    load_blacklist,
    load_char_table,
    save_char_table,
    write_blacklist_report,
)
from .training import load_epoch_log


def _num(x: float) -> float | None:
    return None if isinstance(x, float) and math.isnan(x) else x


def _report_doc(trial: TrialResult) -> dict:
    r = trial.report
    doc = {
        "trial_index": trial.trial_index,
        "seed_h1": trial.seed_h1,
        "seed_h2": trial.seed_h2,
        "test_digest": trial.test_digest,
        "report": {
            "btc": r.btc,
            "bec": r.bec,
            "acc_h1": r.acc_h1,
            "acc_h2": r.acc_h2,
            "accuracy_gain": r.accuracy_gain,
            "quadrants": {
                "both_correct": r.quadrants.both_correct,
                "both_wrong": r.quadrants.both_wrong,
                "h1c_h2w": r.quadrants.h1c_h2w,
                "h1w_h2c": r.quadrants.h1w_h2c,
            },
            "degenerate_flags": sorted(r.degenerate_flags),
            "incompatible_ids": list(r.incompatible_ids),
        },
        "class_rows": [vars(row) for row in trial.class_rows],
    }
    if trial.tag_rows is not None:
        doc["tag_rows"] = [vars(row) for row in trial.tag_rows]
    if trial.forgetting_rows is not None:
        doc["forgetting_rows"] = [
            {
                "quadrant": row.quadrant,
                "model": row.model,
                "mean": _num(row.mean),
                "std": _num(row.std),
                "n": row.n,
            }
            for row in trial.forgetting_rows
        ]
    return doc


def _write_json(doc: dict, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(c) if isinstance(c, float) else c for c in row])


def _write_trials(trials, out_dir: Path, prefix: str = "trial") -> list[str]:
    written = []
    for trial in trials:
        rel = f"trials/{prefix}_{trial.trial_index:04d}.json"
        _write_json(_report_doc(trial), out_dir / rel)
        written.append(rel)
    return written


def _safe_name(group: str) -> str:
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in group)


def _write_baseline(result: BaselineResult, out_dir: Path) -> list[str]:
    written = _write_trials(result.trials, out_dir)
    _write_csv(
        out_dir / "aggregate.csv",
        ["n_trials", "acc_mean", "acc_std", "btc_mean", "btc_std", "bec_mean", "bec_std"],
        [
            [
                len(result.trials),
                result.acc_mean,
                result.acc_std,
                result.btc_mean,
                result.btc_std,
                result.bec_mean,
                result.bec_std,
            ]
        ],
    )
    written.append("aggregate.csv")
    if all(t.forgetting_rows is not None for t in result.trials):
        rows = []
        for quadrant in QUADRANT_NAMES:
            for model in ("h1", "h2"):
                means = [
                    row.mean
                    for t in result.trials
                    for row in t.forgetting_rows
                    if row.quadrant == quadrant and row.model == model and not math.isnan(row.mean)
                ]
                if means:
                    mean = sum(means) / len(means)
                    var = sum((m - mean) ** 2 for m in means) / len(means)
                    rows.append([quadrant, model, mean, math.sqrt(var), len(means)])
                else:
                    rows.append([quadrant, model, "", "", 0])
        _write_csv(
            out_dir / "forgetting_aggregate.csv",
            ["quadrant", "model", "mean_of_trial_means", "std_of_trial_means", "n_trials"],
            rows,
        )
        written.append("forgetting_aggregate.csv")
    return written


def _write_sweep(result: SweepResult, out_dir: Path) -> list[str]:
    written = []
    axis = result.axis_name
    for cell in result.cells:
        written += _write_trials(
            cell.trials, out_dir, prefix=f"{axis}_{_safe_name(repr(cell.axis_value))}"
        )
    _write_csv(
        out_dir / "aggregate.csv",
        [
            axis,
            "n_trials",
            "btc_mean",
            "btc_std",
            "bec_mean",
            "bec_std",
            "gain_mean",
            "gain_std",
            "acc_h1_mean",
            "acc_h2_mean",
        ],
        [
            [
                cell.axis_value,
                len(cell.trials),
                cell.btc_mean,
                cell.btc_std,
                cell.bec_mean,
                cell.bec_std,
                cell.gain_mean,
                cell.gain_std,
                cell.acc_h1_mean,
                cell.acc_h2_mean,
            ]
            for cell in result.cells
        ],
    )
    written.append("aggregate.csv")
    for curve, value in (
        ("btc", lambda c: c.btc_mean),
        ("bec", lambda c: c.bec_mean),
        ("gain", lambda c: c.gain_mean),
    ):
        rel = f"curves/{curve}.csv"
        _write_csv(out_dir / rel, [axis, curve], [[c.axis_value, value(c)] for c in result.cells])
        written.append(rel)
    groups = sorted({g for cell in result.cells for g in cell.group_gain_mean})
    for group in groups:
        rel = f"curves/group_gain_{_safe_name(group)}.csv"
        _write_csv(
            out_dir / rel,
            [axis, "gain"],
            [[c.axis_value, c.group_gain_mean[group]] for c in result.cells if group in c.group_gain_mean],
        )
        written.append(rel)
    _write_json(
        {
            "btc_mean": result.baseline_btc_mean,
            "btc_std": result.baseline_btc_std,
            "bec_mean": result.baseline_bec_mean,
            "bec_std": result.baseline_bec_std,
        },
        out_dir / "baseline.json",
    )
    written.append("baseline.json")
    return written


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> tuple[str, list[str]]:
    """Returns (summary line, relative output paths)."""
    out_dir = cfg.output_dir
    out_dir.mkdir(parents=True, exist_ok=True)

    if cfg.experiment in ("baseline", "saturation"):
        result = stochasticity_baseline(
            cfg.datasets["train"],
            cfg.datasets["test"],
            cfg.trainer,
            cfg.trials,
            d_val=cfg.datasets.get("val"),
            workers=workers,
        )
        written = _write_baseline(result, out_dir)
        summary = (
            f"experiment={cfg.experiment} trials={cfg.trials} "
            f"acc={result.acc_mean:.4f} btc={result.btc_mean:.4f} bec={result.bec_mean:.4f}"
        )
        if cfg.experiment == "saturation":
            curve = saturation_curve(result.trials)
            _write_csv(
                out_dir / "saturation.csv", ["k", "unique_incompatible"], list(map(list, enumerate(curve)))
            )
            written.append("saturation.csv")
            summary += f" u_final={curve[-1]}"
        return summary, written

    if cfg.experiment == "noise-sweep":
        result = noise_sweep(
            cfg.datasets["train_small"],
            cfg.datasets["train_big"],
            cfg.datasets["test"],
            cfg.noise,
            cfg.rates,
            cfg.trainer,
            cfg.trials,
            warm_start=cfg.warm_start,
            workers=workers,
        )
        written = _write_sweep(result, out_dir)
        summary = (
            f"experiment=noise-sweep rates={len(cfg.rates)} trials={cfg.trials} "
            f"bec_first={result.cells[0].bec_mean:.4f} bec_last={result.cells[-1].bec_mean:.4f}"
        )
        return summary, written

    if cfg.experiment == "lambda-sweep":
        result = lambda_sweep(
            cfg.datasets["train_small"],
            cfg.datasets["train_big"],
            cfg.datasets["test"],
            cfg.noise,
            cfg.lambdas,
            cfg.trainer,
            cfg.trials,
            warm_start=cfg.warm_start,
            workers=workers,
        )
        written = _write_sweep(result, out_dir)
        summary = (
            f"experiment=lambda-sweep lambdas={len(cfg.lambdas)} trials={cfg.trials} "
            f"bec_first={result.cells[0].bec_mean:.4f} bec_last={result.cells[-1].bec_mean:.4f}"
        )
        return summary, written

    if cfg.experiment == "forgetting":
        log1 = load_prediction_log(cfg.files["log_h1"])
        log2 = load_prediction_log(cfg.files["log_h2"])
        cmp = align(log1, log2)
        counts1 = count_forgetting_events(load_epoch_log(cfg.files["epochs_h1"]))
        counts2 = count_forgetting_events(load_epoch_log(cfg.files["epochs_h2"]))
        rows = forgetting_by_quadrant(cmp, counts1, counts2)
        write_forgetting_table(rows, out_dir / "quadrant_table.csv")
        written = ["quadrant_table.csv"]
        for name, counts in (("h1", counts1), ("h2", counts2)):
            rel = f"counts_{name}.csv"
            _write_csv(
                out_dir / rel,
                ["id", "events"],
                [[i, counts.counts[i]] for i in sorted(counts.counts)],
            )
            written.append(rel)
        report = compare(cmp)
        summary = (
            f"experiment=forgetting n={len(cmp.aligned_ids)} "
            f"incompatible={report.quadrants.h1c_h2w}"
        )
        return summary, written

    if cfg.experiment == "pipeline":
        written = []
        if "char_table_h1" in cfg.files:
            table1 = load_char_table(cfg.files["char_table_h1"], model_id="h1")
            table2 = load_char_table(cfg.files["char_table_h2"], model_id="h2")
        else:
            charmap = {int(k): str(v) for k, v in cfg.raw["charmap"].items()}
            table1 = char_accuracy_from_log(load_prediction_log(cfg.files["log_h1"]), charmap)
            table2 = char_accuracy_from_log(load_prediction_log(cfg.files["log_h2"]), charmap)
            save_char_table(table1, out_dir / "char_table_h1.csv")
            save_char_table(table2, out_dir / "char_table_h2.csv")
            written += ["char_table_h1.csv", "char_table_h2.csv"]
        words = load_blacklist(cfg.files["blacklist"])
        rows = blacklist_report(words, table1, table2)
        write_blacklist_report(rows, out_dir / "blacklist_report.csv")
        written.append("blacklist_report.csv")
        worst = rows[0]
        summary = (
            f"experiment=pipeline words={len(rows)} "
            f"worst={worst.word} delta={worst.delta:+.4f}"
        )
        return summary, written

    raise ConfigError(f"unknown experiment {cfg.experiment!r}")
