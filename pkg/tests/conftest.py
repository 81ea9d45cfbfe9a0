from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for oracles.py

from backcompat.logs import PredictionLog, PredictionRecord

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        _ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in sorted(_ACCEPTANCE_RESULTS.items()):
        terminalreporter.write_line(f"{outcome}  {name}")


def make_log(model_id: str, outcomes: dict[str, bool], label_set=(0, 1), conf=None) -> PredictionLog:
    """A binary log where every true label is 0 and correctness is given
    per id: correct -> pred 0, wrong -> pred 1."""
    records = tuple(
        PredictionRecord(
            example_id=rid,
            true_label=0,
            predicted_label=0 if correct else 1,
            confidence=None if conf is None else conf.get(rid),
        )
        for rid, correct in outcomes.items()
    )
    return PredictionLog(model_id=model_id, label_set=tuple(label_set), records=records)


@pytest.fixture
def ten_point_pair():
    """The hand-enumerated fixture: h1 correct on p01..p07, h2 correct on
    p01..p06 and p08. BTC = 6/7, BEC = 2/3, quadrants (6, 2, 1, 1)."""
    ids = [f"p{i:02d}" for i in range(1, 11)]
    h1 = make_log("h1", {rid: rid <= "p07" for rid in ids})
    h2 = make_log("h2", {rid: rid <= "p06" or rid == "p08" for rid in ids})
    return h1, h2


@pytest.fixture(scope="session")
def repo_root() -> Path:
    return Path(__file__).resolve().parent.parent


@pytest.fixture(scope="session")
def baseline_run(repo_root):
    """The shipped 25-trial stochasticity baseline, run once per session."""
    import time

    from backcompat.config import load_experiment_config
    from backcompat.experiments import stochasticity_baseline

    cfg = load_experiment_config(repo_root / "configs" / "quickstart-baseline.json")
    t0 = time.monotonic()
    result = stochasticity_baseline(
        cfg.datasets["train"], cfg.datasets["test"], cfg.trainer, cfg.trials,
        d_val=cfg.datasets["val"],
    )
    return result, time.monotonic() - t0


@pytest.fixture(scope="session")
def noise_sweep_run(repo_root):
    """The shipped label-noise sweep, run once per session."""
    import time

    from backcompat.config import load_experiment_config
    from backcompat.experiments import noise_sweep

    cfg = load_experiment_config(repo_root / "configs" / "quickstart-noise-sweep.json")
    t0 = time.monotonic()
    result = noise_sweep(
        cfg.datasets["train_small"], cfg.datasets["train_big"], cfg.datasets["test"],
        cfg.noise, cfg.rates, cfg.trainer, cfg.trials, warm_start=cfg.warm_start,
    )
    return result, time.monotonic() - t0
