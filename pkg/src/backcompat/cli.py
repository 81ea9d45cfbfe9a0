"""Command-line entry point.

Exit codes are a stable contract for CI: 0 success, 1 internal error,
2 user/config error. Each command prints exactly one machine-parseable
summary line on stdout; diagnostics and warnings go to stderr. Every command
writes a RunManifest covering the files it produced, even on failure.
"""

from __future__ import annotations

import csv
import os
import sys
from pathlib import Path

import click

from . import compat
from .config import load_experiment_config
from .errors import ValidationError
from .logs import load_prediction_log
from .manifest import RunManifest
from .runner import run_experiment
from .synth import make_dataset
from .data import save_dataset

_WORKERS_ENV = "BACKCOMPAT_WORKERS"


def _workers_default() -> int:
    raw = os.environ.get(_WORKERS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _fail(exc: Exception) -> int:
    if isinstance(exc, ValidationError):
        click.echo(f"error: {exc}", err=True)
        return 2
    click.echo(f"internal error: {exc}", err=True)
    return 1


@click.group()
@click.version_option(package_name="backcompat")
def main() -> None:
    """Backward-compatibility analysis for ML model updates."""


@main.command()
@click.argument("log1_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("log2_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--allow-partial", is_flag=True, help="Align on the id intersection.")
@click.option(
    "--group-by",
    default="true-label",
    show_default=True,
    help="Group rows by 'true-label' or by tag namespace as 'tag:<ns>'.",
)
@click.option("--hist-bins", type=int, default=None, help="Also write a confidence histogram.")
@click.option(
    "--hist-model",
    type=click.Choice(["h1", "h2"]),
    default="h2",
    show_default=True,
    help="Whose confidence to histogram.",
)
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False),
    default=".",
    show_default=True,
    help="Directory for report.json, groups.csv, incompatible.csv.",
)
def compare(log1_path, log2_path, allow_partial, group_by, hist_bins, hist_model, out_dir):
    """Compare two prediction logs and report BTC/BEC."""
    out = Path(out_dir)
    manifest = RunManifest(
        command="compare",
        config={
            "log1": log1_path,
            "log2": log2_path,
            "allow_partial": allow_partial,
            "group_by": group_by,
            "hist_bins": hist_bins,
            "hist_model": hist_model,
        },
    )
    try:
        manifest.add_input(log1_path)
        manifest.add_input(log2_path)
        warnings: list[str] = []
        log1 = load_prediction_log(log1_path, warnings)
        log2 = load_prediction_log(log2_path, warnings)
        for note in warnings:
            click.echo(f"warning: {note}", err=True)

        cmp = compat.align(log1, log2, allow_partial=allow_partial)
        report = compat.compare(cmp)
        if group_by == "true-label":
            rows = compat.group_breakdown(cmp)
        elif group_by.startswith("tag:"):
            rows = compat.group_breakdown(cmp, by_tag=group_by[4:])
        else:
            raise ValidationError(f"--group-by must be 'true-label' or 'tag:<ns>', got {group_by!r}")

        out.mkdir(parents=True, exist_ok=True)
        _write_compare_outputs(cmp, report, rows, out, manifest)
        if hist_bins is not None:
            hist = compat.confidence_histogram(cmp, hist_model, hist_bins)
            with open(out / "histogram.csv", "w", encoding="utf-8", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["bin_lo", "bin_hi", "count"])
                for i, count in enumerate(hist.counts):
                    writer.writerow([repr(hist.edges[i]), repr(hist.edges[i + 1]), count])
            manifest.outputs.append("histogram.csv")
    except Exception as exc:  # manifest records the failure, then exit 1/2
        manifest.status = "error"
        manifest.error = str(exc)
        try:
            manifest.write(out)
        except OSError:
            pass
        sys.exit(_fail(exc))
    manifest.write(out)
    click.echo(f"BTC={report.btc:.4f} BEC={report.bec:.4f} ΔAcc={report.accuracy_gain:+.4f}")


def _write_compare_outputs(cmp, report, rows, out: Path, manifest: RunManifest) -> None:
    import json

    doc = {
        "model_id_h1": cmp.log_h1.model_id,
        "model_id_h2": cmp.log_h2.model_id,
        "n_aligned": len(cmp.aligned_ids),
        "btc": report.btc,
        "bec": report.bec,
        "acc_h1": report.acc_h1,
        "acc_h2": report.acc_h2,
        "accuracy_gain": report.accuracy_gain,
        "quadrants": {
            "both_correct": report.quadrants.both_correct,
            "both_wrong": report.quadrants.both_wrong,
            "h1c_h2w": report.quadrants.h1c_h2w,
            "h1w_h2c": report.quadrants.h1w_h2c,
        },
        "degenerate_flags": sorted(report.degenerate_flags),
        "incompatible_ids": list(report.incompatible_ids),
    }
    (out / "report.json").write_text(
        json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    manifest.outputs.append("report.json")

    with open(out / "groups.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(
            ["group", "n", "acc_h1", "acc_h2", "gain", "incompatible_count", "incompatible_share"]
        )
        for row in rows:
            writer.writerow(
                [
                    row.group,
                    row.n,
                    repr(row.acc_h1),
                    repr(row.acc_h2),
                    repr(row.gain),
                    row.incompatible_count,
                    repr(row.incompatible_share),
                ]
            )
    manifest.outputs.append("groups.csv")

    with open(out / "incompatible.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "true_label", "pred_h1", "pred_h2", "conf_h1", "conf_h2"])
        for example_id in report.incompatible_ids:
            r1 = cmp.log_h1.by_id[example_id]
            r2 = cmp.log_h2.by_id[example_id]
            writer.writerow(
                [
                    example_id,
                    r1.true_label,
                    r1.predicted_label,
                    r2.predicted_label,
                    "" if r1.confidence is None else repr(r1.confidence),
                    "" if r2.confidence is None else repr(r2.confidence),
                ]
            )
    manifest.outputs.append("incompatible.csv")


@main.command()
@click.argument("config_path", type=click.Path(exists=True, dir_okay=False))
@click.option(
    "--out-dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Override the config's output_dir.",
)
@click.option(
    "--workers",
    type=int,
    default=None,
    help=f"Parallel trial workers (default ${_WORKERS_ENV} or 1).",
)
def run(config_path, out_dir, workers):
    """Run the experiment described by a JSON config."""
    workers = workers if workers is not None else _workers_default()
    manifest = RunManifest(command="run", config={})
    manifest_dir = Path(out_dir) if out_dir is not None else None
    try:
        manifest.add_input(config_path)
        cfg = load_experiment_config(config_path)
        manifest.config = cfg.raw
        if out_dir is not None:
            cfg.output_dir = Path(out_dir).resolve()
        manifest_dir = cfg.output_dir
        for path in cfg.input_paths:
            manifest.add_input(path)
        summary, outputs = run_experiment(cfg, workers=workers)
        manifest.outputs = outputs
    except Exception as exc:
        manifest.status = "error"
        manifest.error = str(exc)
        if manifest_dir is not None:
            try:
                manifest.write(manifest_dir)
            except OSError:
                pass
        sys.exit(_fail(exc))
    manifest.write(manifest_dir)
    click.echo(summary)


@main.command()
@click.argument("dataset_kind")
@click.option("--size", type=int, required=True)
@click.option("--seed", type=int, required=True)
@click.option("--out", "out_path", type=click.Path(dir_okay=False), required=True)
@click.option("--param", "params", multiple=True, help="kind-specific KEY=VALUE, repeatable")
def synth(dataset_kind, size, seed, out_path, params):
    """Generate a synthetic dataset (kinds: blobs-binary, blobs-multi,
    glyph-grid, token-groups)."""
    manifest = RunManifest(
        command="synth",
        config={"kind": dataset_kind, "size": size, "seed": seed, "params": list(params)},
    )
    out = Path(out_path)
    try:
        kwargs = {}
        for raw in params:
            if "=" not in raw:
                raise ValidationError(f"--param needs KEY=VALUE, got {raw!r}")
            key, value = raw.split("=", 1)
            try:
                kwargs[key] = int(value)
            except ValueError:
                try:
                    kwargs[key] = float(value)
                except ValueError:
                    kwargs[key] = value
        dataset = make_dataset(dataset_kind, size, seed, **kwargs)
        out.parent.mkdir(parents=True, exist_ok=True)
        save_dataset(dataset, out)
        manifest.outputs = [out.name]
    except TypeError as exc:
        manifest.status = "error"
        manifest.error = str(exc)
        _write_synth_manifest(manifest, out)
        sys.exit(_fail(ValidationError(f"bad --param for {dataset_kind!r}: {exc}")))
    except Exception as exc:
        manifest.status = "error"
        manifest.error = str(exc)
        _write_synth_manifest(manifest, out)
        sys.exit(_fail(exc))
    _write_synth_manifest(manifest, out)
    click.echo(f"kind={dataset_kind} size={size} seed={seed} out={out_path}")


def _write_synth_manifest(manifest: RunManifest, out: Path) -> None:
    # synth writes a single file; its manifest sits alongside as <out>.manifest.json
    import json

    try:
        doc = {
            "command": manifest.command,
            "tool_version": manifest.tool_version,
            "config": manifest.config,
            "inputs": manifest.inputs,
            "outputs": sorted(manifest.outputs),
            "status": manifest.status,
            "error": manifest.error,
        }
        target = out.parent / (out.name + ".manifest.json")
        out.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError:
        pass


if __name__ == "__main__":
    main()
