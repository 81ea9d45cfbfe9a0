"""Experiment orchestration: stochasticity baselines, saturation curves,
noise sweeps, and compatibility-penalty sweeps.

Seeding: trial i derives its model seeds as hash(root, "trial", i, role[,
rate]), so adding trials or axis points never perturbs existing ones, and a
lambda sweep's lambda=0 column reproduces the plain noise-sweep cell at the
same rate bit-for-bit (lambda never enters a seed). Within a trial, h1 is
trained once and shared across every rate, isolating the noise effect; h2 is
warm-started from h1 when the config says so.

Trials are independent jobs; with workers > 1 they run in a process pool and
results are reduced in deterministic (axis, trial) order either way.
"""

from __future__ import annotations

import hashlib
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .compat import CompatibilityReport, GroupRow, align, compare, group_breakdown
from .data import Dataset
from .errors import SubsetViolation, TestSetMismatch, ValidationError
from .forgetting import ForgettingRow, count_forgetting_events, forgetting_by_quadrant
from .models import predict
from .noise import GROUP_FLIP, NoiseSpec, apply_noise
from .rng import derive_seed
from .training import TrainConfig, train


@dataclass(frozen=True)
class TrialResult:
    trial_index: int
    seed_h1: int
    seed_h2: int
    report: CompatibilityReport
    class_rows: tuple[GroupRow, ...]
    tag_rows: tuple[GroupRow, ...] | None
    forgetting_rows: tuple[ForgettingRow, ...] | None
    test_digest: str


@dataclass(frozen=True)
class BaselineResult:
    trials: tuple[TrialResult, ...]
    acc_mean: float  # pooled over h1 and h2 (identical training data)
    acc_std: float
    btc_mean: float
    btc_std: float
    bec_mean: float
    bec_std: float


@dataclass(frozen=True)
class SweepCell:
    axis_value: float
    trials: tuple[TrialResult, ...]
    btc_mean: float
    btc_std: float
    bec_mean: float
    bec_std: float
    gain_mean: float
    gain_std: float
    acc_h1_mean: float
    acc_h2_mean: float
    group_gain_mean: dict[str, float]  # class label (or tag value) -> mean gain


@dataclass(frozen=True)
class SweepResult:
    axis_name: str  # "rate" | "lambda_c"
    cells: tuple[SweepCell, ...]
    baseline_btc_mean: float
    baseline_btc_std: float
    baseline_bec_mean: float
    baseline_bec_std: float


def _digest(ids: tuple[str, ...]) -> str:
    h = hashlib.sha256()
    for example_id in ids:
        h.update(example_id.encode("utf-8"))
        h.update(b"\x00")
    return h.hexdigest()[:16]


def _mean_std(values: list[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=np.float64)
    return float(arr.mean()), float(arr.std())  # population std


def _evaluate_pair(
    h1, h2, d_test: Dataset, d_val: Dataset | None, eval_logs_h1, eval_logs_h2, tag_namespace
) -> tuple[CompatibilityReport, tuple, tuple | None, tuple | None, str]:
    cmp = align(predict(h1, d_test, "h1"), predict(h2, d_test, "h2"))
    report = compare(cmp)
    class_rows = tuple(group_breakdown(cmp))
    tag_rows = tuple(group_breakdown(cmp, by_tag=tag_namespace)) if tag_namespace else None
    forgetting_rows = None
    if d_val is not None and eval_logs_h1 and eval_logs_h2:
        val_cmp = align(predict(h1, d_val, "h1"), predict(h2, d_val, "h2"))
        forgetting_rows = tuple(
            forgetting_by_quadrant(
                val_cmp,
                count_forgetting_events(eval_logs_h1[0]),
                count_forgetting_events(eval_logs_h2[0]),
            )
        )
    return report, class_rows, tag_rows, forgetting_rows, _digest(cmp.aligned_ids)


def _baseline_trial(
    d_train: Dataset, d_test: Dataset, d_val: Dataset | None, cfg: TrainConfig, i: int
) -> TrialResult:
    seed_h1 = derive_seed(cfg.seed, "trial", i, "h1")
    seed_h2 = derive_seed(cfg.seed, "trial", i, "h2")
    # a baseline is plain retraining: cold starts, no penalty
    base = replace(cfg, warm_start_from=None, lambda_c=0.0, reference_model=None)
    eval_sets = [d_val] if d_val is not None else []
    h1, logs1 = train(d_train, replace(base, seed=seed_h1), eval_sets)
    h2, logs2 = train(d_train, replace(base, seed=seed_h2), eval_sets)
    report, class_rows, tag_rows, forgetting_rows, digest = _evaluate_pair(
        h1, h2, d_test, d_val, logs1, logs2, None
    )
    return TrialResult(
        trial_index=i,
        seed_h1=seed_h1,
        seed_h2=seed_h2,
        report=report,
        class_rows=class_rows,
        tag_rows=tag_rows,
        forgetting_rows=forgetting_rows,
        test_digest=digest,
    )


def _run_jobs(fn, jobs: list[tuple], workers: int) -> list:
    if workers <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, *zip(*jobs)))  # map preserves submission order


def stochasticity_baseline(
    d_train: Dataset,
    d_test: Dataset,
    cfg: TrainConfig,
    n_trials: int,
    d_val: Dataset | None = None,
    workers: int = 1,
) -> BaselineResult:
    """Retrain pairs on identical data with distinct derived seeds; any
    incompatibility is optimization stochasticity alone. With ``d_val``,
    per-epoch correctness is logged there and each trial carries a
    forgetting-by-quadrant table computed on the validation comparison."""
    if n_trials < 2:
        raise ValidationError("a baseline needs n_trials >= 2")
    jobs = [(d_train, d_test, d_val, cfg, i) for i in range(n_trials)]
    trials = _run_jobs(_baseline_trial, jobs, workers)
    accs: list[float] = []
    for t in trials:
        accs.extend([t.report.acc_h1, t.report.acc_h2])
    acc_mean, acc_std = _mean_std(accs)
    btc_mean, btc_std = _mean_std([t.report.btc for t in trials])
    bec_mean, bec_std = _mean_std([t.report.bec for t in trials])
    return BaselineResult(
        trials=tuple(trials),
        acc_mean=acc_mean,
        acc_std=acc_std,
        btc_mean=btc_mean,
        btc_std=btc_std,
        bec_mean=bec_mean,
        bec_std=bec_std,
    )


def saturation_curve(trials: list[TrialResult] | tuple[TrialResult, ...]) -> list[int]:
    """u_k = |union of incompatible ids over the first k trials|, k = 0..n.

    Non-decreasing by construction; u_0 = 0. All trials must share a test set.
    """
    if not trials:
        raise ValidationError("saturation needs at least one trial")
    digests = {t.test_digest for t in trials}
    if len(digests) != 1:
        raise TestSetMismatch(f"trials cover {len(digests)} distinct test sets")
    seen: set[str] = set()
    curve = [0]
    for t in trials:
        seen.update(t.report.incompatible_ids)
        curve.append(len(seen))
    return curve


def _check_subset(d_small: Dataset, d_big: Dataset) -> None:
    missing = set(d_small.ids) - set(d_big.ids)
    if missing:
        raise SubsetViolation(
            f"{len(missing)} small-set ids are not in the big set (e.g. {sorted(missing)[:5]})"
        )


def _sweep_trial(
    d_small: Dataset,
    d_big: Dataset,
    d_test: Dataset,
    template: NoiseSpec,
    rates: tuple[float, ...],
    lambdas: tuple[float, ...],
    cfg: TrainConfig,
    i: int,
    warm_start: bool,
) -> list[TrialResult]:
    """One trial across every (rate, lambda) grid point; h1 is shared.

    Exactly one of the two grids has multiple points: noise sweeps pass
    lambdas=(cfg.lambda_c,), lambda sweeps pass a single rate.
    """
    seed_h1 = derive_seed(cfg.seed, "trial", i, "h1")
    h1, _ = train(
        d_small,
        replace(cfg, seed=seed_h1, warm_start_from=None, lambda_c=0.0, reference_model=None),
    )
    tag_namespace = None
    if template.kind == GROUP_FLIP:
        tag_namespace = template.params["group_tag"].split(":", 1)[0]
    results = []
    for rate in rates:
        noisy = apply_noise(
            d_big, replace(template, rate=rate, seed=derive_seed(template.seed, "noise", i, rate))
        )
        seed_h2 = derive_seed(cfg.seed, "trial", i, "h2", rate)
        for lam in lambdas:
            h2, _ = train(
                noisy,
                replace(
                    cfg,
                    seed=seed_h2,
                    warm_start_from=h1 if warm_start else None,
                    lambda_c=lam,
                    reference_model=h1 if lam > 0 else None,
                ),
            )
            report, class_rows, tag_rows, _, digest = _evaluate_pair(
                h1, h2, d_test, None, None, None, tag_namespace
            )
            results.append(
                TrialResult(
                    trial_index=i,
                    seed_h1=seed_h1,
                    seed_h2=seed_h2,
                    report=report,
                    class_rows=class_rows,
                    tag_rows=tag_rows,
                    forgetting_rows=None,
                    test_digest=digest,
                )
            )
    return results


def _aggregate_cell(axis_value: float, trials: list[TrialResult]) -> SweepCell:
    btc_mean, btc_std = _mean_std([t.report.btc for t in trials])
    bec_mean, bec_std = _mean_std([t.report.bec for t in trials])
    gain_mean, gain_std = _mean_std([t.report.accuracy_gain for t in trials])
    acc1_mean, _ = _mean_std([t.report.acc_h1 for t in trials])
    acc2_mean, _ = _mean_std([t.report.acc_h2 for t in trials])
    rows_per_trial = [t.tag_rows if t.tag_rows is not None else t.class_rows for t in trials]
    group_gain: dict[str, float] = {}
    for group in sorted({row.group for rows in rows_per_trial for row in rows}):
        gains = [row.gain for rows in rows_per_trial for row in rows if row.group == group]
        group_gain[group] = float(np.mean(gains))
    return SweepCell(
        axis_value=axis_value,
        trials=tuple(trials),
        btc_mean=btc_mean,
        btc_std=btc_std,
        bec_mean=bec_mean,
        bec_std=bec_std,
        gain_mean=gain_mean,
        gain_std=gain_std,
        acc_h1_mean=acc1_mean,
        acc_h2_mean=acc2_mean,
        group_gain_mean=group_gain,
    )


def _baseline_band(
    d_small: Dataset, d_test: Dataset, cfg: TrainConfig, n_trials: int, workers: int
) -> BaselineResult:
    # The no-update band: D1 = D2 = the small clean set, seeds derived from
    # the sweep root so an external stochasticity_baseline call can replay it.
    return stochasticity_baseline(
        d_small, d_test, replace(cfg, seed=derive_seed(cfg.seed, "baseline")), n_trials,
        workers=workers,
    )


def noise_sweep(
    d_clean_small: Dataset,
    d_big: Dataset,
    d_test: Dataset,
    spec_template: NoiseSpec,
    rates: list[float],
    cfg: TrainConfig,
    trials_per_rate: int,
    warm_start: bool = True,
    workers: int = 1,
) -> SweepResult:
    """Train h1 on the small clean set once per trial; per rate, corrupt the
    big set, train h2 (warm-started from h1 by default), compare on the
    clean test set. Emits per-rate aggregates plus the no-update band."""
    _check_subset(d_clean_small, d_big)
    if sorted(rates) != list(rates):
        raise ValidationError("rates must be sorted ascending")
    rates_t = tuple(float(r) for r in rates)
    jobs = [
        (d_clean_small, d_big, d_test, spec_template, rates_t, (0.0,), cfg, i, warm_start)
        for i in range(trials_per_rate)
    ]
    per_trial = _run_jobs(_sweep_trial, jobs, workers)
    cells = []
    for k, rate in enumerate(rates_t):
        cells.append(_aggregate_cell(rate, [per_trial[i][k] for i in range(trials_per_rate)]))
    band = _baseline_band(d_clean_small, d_test, cfg, trials_per_rate, workers)
    return SweepResult(
        axis_name="rate",
        cells=tuple(cells),
        baseline_btc_mean=band.btc_mean,
        baseline_btc_std=band.btc_std,
        baseline_bec_mean=band.bec_mean,
        baseline_bec_std=band.bec_std,
    )


def lambda_sweep(
    d_clean_small: Dataset,
    d_big: Dataset,
    d_test: Dataset,
    noise: NoiseSpec,
    lambdas: list[float],
    cfg: TrainConfig,
    trials_per_lambda: int,
    warm_start: bool = True,
    workers: int = 1,
) -> SweepResult:
    """Sweep the compatibility penalty at one fixed noise setting. The
    lambda = 0 column reproduces the plain noise-sweep cell at this rate."""
    _check_subset(d_clean_small, d_big)
    if sorted(lambdas) != list(lambdas):
        raise ValidationError("lambdas must be sorted ascending")
    if not lambdas or lambdas[0] != 0.0:
        raise ValidationError("lambdas must start at 0")
    lambdas_t = tuple(float(l) for l in lambdas)
    jobs = [
        (d_clean_small, d_big, d_test, noise, (float(noise.rate),), lambdas_t, cfg, i, warm_start)
        for i in range(trials_per_lambda)
    ]
    per_trial = _run_jobs(_sweep_trial, jobs, workers)
    cells = []
    for k, lam in enumerate(lambdas_t):
        cells.append(_aggregate_cell(lam, [per_trial[i][k] for i in range(trials_per_lambda)]))
    band = _baseline_band(d_clean_small, d_test, cfg, trials_per_lambda, workers)
    return SweepResult(
        axis_name="lambda_c",
        cells=tuple(cells),
        baseline_btc_mean=band.btc_mean,
        baseline_btc_std=band.btc_std,
        baseline_bec_mean=band.bec_mean,
        baseline_bec_std=band.bec_std,
    )
