"""Experiment configs: one JSON document drives one `backcompat run`.

Schema (fields by experiment; paths resolve relative to the config file):

    {
      "experiment": "baseline" | "noise-sweep" | "lambda-sweep" |
                    "saturation" | "forgetting" | "pipeline",
      "seed": 1234,
      "output_dir": "out/my-run",
      "trials": 25,
      "trainer": {"learning_rate": 0.05, "epochs": 30, "batch_size": 32,
                  "arch": "linear", "hidden_units": null,
                  "shuffle_each_epoch": true},
      "datasets": {"train": <spec>, "test": <spec>, "val": <spec>,
                   "train_big": <spec>,
                   "train_small": {"subset_of": "train_big", "size": 500}},
      "noise": {"kind": "label_swap", "seed": 99, "rate": 0.3,
                "params": {"label_a": 0, "label_b": 1}},
      "rates": [0.0, 0.1, ...],          # noise-sweep
      "lambdas": [0.0, 0.5, ...],        # lambda-sweep
      "warm_start": true,                 # sweeps; default true
      "files": {...}                      # forgetting / pipeline inputs
    }

A dataset <spec> is {"path": "file.jsonl"} or
{"synth": {"kind": ..., "size": ..., "seed": ..., "params": {...}}}, or a
balanced id-subset {"subset_of": "<other>", "size": n}. Any of the three
may add "drop_labels": [..] to remove whole classes, e.g. to carve the
(n-1)-class task out of a set that still carries an outlier class.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .data import Dataset, load_dataset
from .errors import ConfigError, ValidationError
from .noise import NoiseSpec
from .synth import make_dataset, stratified_head
from .training import TrainConfig

EXPERIMENTS = ("baseline", "noise-sweep", "lambda-sweep", "saturation", "forgetting", "pipeline")


@dataclass
class ExperimentConfig:
    experiment: str
    output_dir: Path
    raw: dict
    input_paths: list[Path] = field(default_factory=list)  # files read while resolving
    seed: int = 0
    trials: int = 0
    trainer: TrainConfig | None = None
    datasets: dict[str, Dataset] = field(default_factory=dict)
    noise: NoiseSpec | None = None
    rates: list[float] | None = None
    lambdas: list[float] | None = None
    warm_start: bool = True
    files: dict[str, Path] = field(default_factory=dict)


def _require(raw: dict, key: str, kind, experiment: str):
    if key not in raw:
        raise ConfigError(f"experiment {experiment!r} requires field {key!r}")
    value = raw[key]
    if kind is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, kind):
        raise ConfigError(f"field {key!r} must be {kind.__name__}, got {type(value).__name__}")
    return value


def _sorted_grid(raw: dict, key: str) -> list[float]:
    values = raw.get(key)
    if not isinstance(values, list) or not values:
        raise ConfigError(f"field {key!r} must be a non-empty list")
    try:
        values = [float(v) for v in values]
    except (TypeError, ValueError):
        raise ConfigError(f"field {key!r} must contain numbers") from None
    if sorted(values) != values:
        raise ConfigError(f"field {key!r} must be sorted ascending")
    return values


def _trainer_from(raw: dict, seed: int) -> TrainConfig:
    t = raw.get("trainer")
    if not isinstance(t, dict):
        raise ConfigError("field 'trainer' must be an object")
    try:
        return TrainConfig(
            learning_rate=float(t["learning_rate"]),
            epochs=int(t["epochs"]),
            batch_size=int(t["batch_size"]),
            seed=seed,
            arch=t.get("arch", "linear"),
            hidden_units=t.get("hidden_units"),
            shuffle_each_epoch=bool(t.get("shuffle_each_epoch", True)),
        )
    except KeyError as exc:
        raise ConfigError(f"field 'trainer' misses {exc.args[0]!r}") from exc
    except ValidationError as exc:
        raise ConfigError(f"field 'trainer': {exc}") from exc


def _resolve_datasets(cfg: ExperimentConfig, base: Path, names: list[str]) -> None:
    specs = cfg.raw.get("datasets")
    if not isinstance(specs, dict):
        raise ConfigError("field 'datasets' must be an object")
    deferred: list[tuple[str, dict]] = []
    for name in names:
        if name not in specs:
            raise ConfigError(f"field 'datasets' misses {name!r}")
        spec = specs[name]
        if not isinstance(spec, dict):
            raise ConfigError(f"dataset {name!r} must be an object")
        if "subset_of" in spec:
            deferred.append((name, spec))
        elif "path" in spec:
            path = (base / spec["path"]).resolve()
            cfg.input_paths.append(path)
            cfg.datasets[name] = _post_process(load_dataset(path), spec, name)
        elif "synth" in spec:
            s = spec["synth"]
            try:
                built = make_dataset(s["kind"], int(s["size"]), int(s["seed"]), **s.get("params", {}))
            except KeyError as exc:
                raise ConfigError(f"dataset {name!r} synth spec misses {exc.args[0]!r}") from exc
            except TypeError as exc:
                raise ConfigError(f"dataset {name!r}: bad synth params ({exc})") from exc
            cfg.datasets[name] = _post_process(built, spec, name)
        else:
            raise ConfigError(f"dataset {name!r} needs 'path', 'synth', or 'subset_of'")
    for name, spec in deferred:
        parent = spec["subset_of"]
        if parent not in cfg.datasets:
            raise ConfigError(f"dataset {name!r}: subset_of {parent!r} not resolved")
        pruned = _post_process(cfg.datasets[parent], spec, name)
        cfg.datasets[name] = stratified_head(pruned, int(spec["size"]))


def _post_process(d: Dataset, spec: dict, name: str):
    # optional "drop_labels": remove whole classes, e.g. to carve the n-1
    # class task out of a dataset that still carries an outlier class
    if "drop_labels" in spec:
        try:
            return d.drop_labels([int(l) for l in spec["drop_labels"]])
        except (TypeError, ValidationError) as exc:
            raise ConfigError(f"dataset {name!r}: bad drop_labels ({exc})") from exc
    return d


def _noise_from(raw: dict) -> NoiseSpec:
    n = raw.get("noise")
    if not isinstance(n, dict):
        raise ConfigError("field 'noise' must be an object")
    try:
        return NoiseSpec(
            kind=n["kind"],
            rate=float(n.get("rate", 0.0)),
            seed=int(n["seed"]),
            params=dict(n.get("params", {})),
        )
    except KeyError as exc:
        raise ConfigError(f"field 'noise' misses {exc.args[0]!r}") from exc
    except ValidationError as exc:
        raise ConfigError(f"field 'noise': {exc}") from exc


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    path = Path(path)
    base = path.parent
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    experiment = raw.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"field 'experiment' must be one of {list(EXPERIMENTS)}, got {experiment!r}")
    if "output_dir" not in raw:
        raise ConfigError("field 'output_dir' is required")
    cfg = ExperimentConfig(
        experiment=experiment, output_dir=(base / raw["output_dir"]).resolve(), raw=raw
    )

    if experiment in ("baseline", "saturation"):
        cfg.seed = _require(raw, "seed", int, experiment)
        cfg.trials = _require(raw, "trials", int, experiment)
        cfg.trainer = _trainer_from(raw, cfg.seed)
        names = ["train", "test"]
        if "val" in raw.get("datasets", {}):
            names.append("val")
        _resolve_datasets(cfg, base, names)
    elif experiment in ("noise-sweep", "lambda-sweep"):
        cfg.seed = _require(raw, "seed", int, experiment)
        cfg.trials = _require(raw, "trials", int, experiment)
        cfg.trainer = _trainer_from(raw, cfg.seed)
        cfg.noise = _noise_from(raw)
        cfg.warm_start = bool(raw.get("warm_start", True))
        _resolve_datasets(cfg, base, ["train_big", "train_small", "test"])
        if experiment == "noise-sweep":
            cfg.rates = _sorted_grid(raw, "rates")
        else:
            cfg.lambdas = _sorted_grid(raw, "lambdas")
            if cfg.lambdas[0] != 0.0:
                raise ConfigError("field 'lambdas' must start at 0")
    elif experiment == "forgetting":
        wanted = ("log_h1", "log_h2", "epochs_h1", "epochs_h2")
        files = raw.get("files")
        if not isinstance(files, dict):
            raise ConfigError("field 'files' must be an object")
        for key in wanted:
            if key not in files:
                raise ConfigError(f"field 'files' misses {key!r}")
            cfg.files[key] = (base / files[key]).resolve()
            cfg.input_paths.append(cfg.files[key])
    elif experiment == "pipeline":
        files = raw.get("files")
        if not isinstance(files, dict):
            raise ConfigError("field 'files' must be an object")
        if "blacklist" not in files:
            raise ConfigError("field 'files' misses 'blacklist'")
        if "char_table_h1" in files and "char_table_h2" in files:
            keys = ("blacklist", "char_table_h1", "char_table_h2")
        elif "log_h1" in files and "log_h2" in files:
            keys = ("blacklist", "log_h1", "log_h2")
            charmap = raw.get("charmap")
            if not isinstance(charmap, dict) or not charmap:
                raise ConfigError("pipeline with logs requires a non-empty 'charmap' object")
        else:
            raise ConfigError(
                "field 'files' needs either char_table_h1/char_table_h2 or log_h1/log_h2"
            )
        for key in keys:
            cfg.files[key] = (base / files[key]).resolve()
            cfg.input_paths.append(cfg.files[key])
    return cfg
