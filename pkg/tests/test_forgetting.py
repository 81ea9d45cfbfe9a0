from __future__ import annotations

import math

import numpy as np
import pytest

from backcompat.compat import align
from backcompat.errors import EmptyLog, IdCoverageMismatch
from backcompat.forgetting import (
    ForgettingCounts,
    count_forgetting_events,
    forgetting_by_quadrant,
    write_forgetting_table,
)
from backcompat.training import EpochEvalLog

from conftest import make_log


def log_from_sequences(sequences: dict[str, list[int]]) -> EpochEvalLog:
    ids = tuple(sequences)
    matrix = np.array([sequences[i] for i in ids], dtype=bool).T  # epochs x n
    return EpochEvalLog(dataset_id="val", example_ids=ids, correct=matrix)


class TestCounting:
    @pytest.mark.parametrize(
        "sequence,expected",
        [
            ([1, 1, 1, 1], 0),
            ([1, 0, 1, 0], 2),
            ([0, 0, 1, 0, 0, 1], 1),
            ([0, 0, 0], 0),
            ([1], 0),
            ([0, 1, 1, 1], 0),
            ([1, 0, 0, 0], 1),
        ],
    )
    def test_hand_counted_sequences(self, sequence, expected):
        counts = count_forgetting_events(log_from_sequences({"x": sequence}))
        assert counts.counts["x"] == expected
        assert counts.epochs_observed == len(sequence)

    def test_count_bounded_by_half_epochs(self):
        rng = np.random.default_rng(0)
        for _ in range(50):
            epochs = int(rng.integers(1, 20))
            seq = rng.integers(0, 2, epochs).tolist()
            counts = count_forgetting_events(log_from_sequences({"x": seq}))
            assert counts.counts["x"] <= epochs // 2

    def test_empty_log_rejected(self):
        log = EpochEvalLog(dataset_id="v", example_ids=("a",), correct=np.zeros((0, 1), dtype=bool))
        with pytest.raises(EmptyLog):
            count_forgetting_events(log)


class TestByQuadrant:
    def build(self, quadrant_counts: dict[str, list[int]]):
        """9-point comparison with 3 points per quadrant row and explicit
        per-point forgetting counts."""
        outcomes1, outcomes2, c1, c2 = {}, {}, {}, {}
        ids_by_quadrant = {
            "both_correct": ["bc0", "bc1", "bc2"],
            "both_wrong": ["bw0", "bw1", "bw2"],
            "h1c_h2w": ["ic0", "ic1", "ic2"],
        }
        for quadrant, ids in ids_by_quadrant.items():
            for k, rid in enumerate(ids):
                outcomes1[rid] = quadrant in ("both_correct", "h1c_h2w")
                outcomes2[rid] = quadrant == "both_correct"
                c1[rid] = quadrant_counts[quadrant][k]
                c2[rid] = quadrant_counts[quadrant][k]
        cmp = align(make_log("h1", outcomes1), make_log("h2", outcomes2))
        counts = ForgettingCounts(counts=c1, epochs_observed=10)
        return cmp, counts

    def test_all_zero(self):
        cmp, counts = self.build(
            {"both_correct": [0, 0, 0], "both_wrong": [0, 0, 0], "h1c_h2w": [0, 0, 0]}
        )
        rows = forgetting_by_quadrant(cmp, counts, counts)
        populated = [r for r in rows if r.n > 0]
        assert all(r.mean == 0.0 for r in populated)

    def test_all_one_gives_zero_std(self):
        cmp, counts = self.build(
            {"both_correct": [1, 1, 1], "both_wrong": [1, 1, 1], "h1c_h2w": [1, 1, 1]}
        )
        rows = forgetting_by_quadrant(cmp, counts, counts)
        populated = [r for r in rows if r.n > 0]
        assert all(r.mean == 1.0 and r.std == 0.0 for r in populated)

    def test_hand_aggregated_means(self):
        cmp, counts = self.build(
            {"both_correct": [0, 0, 0], "both_wrong": [1, 1, 1], "h1c_h2w": [2, 2, 2]}
        )
        rows = {(r.quadrant, r.model): r for r in forgetting_by_quadrant(cmp, counts, counts)}
        assert rows[("both_correct", "h1")].mean == 0.0
        assert rows[("both_wrong", "h1")].mean == 1.0
        assert rows[("h1c_h2w", "h1")].mean == 2.0
        assert rows[("h1w_h2c", "h1")].n == 0 and math.isnan(rows[("h1w_h2c", "h1")].mean)

    def test_table_has_four_quadrants_by_two_models(self):
        cmp, counts = self.build(
            {"both_correct": [0, 1, 2], "both_wrong": [3, 4, 5], "h1c_h2w": [1, 1, 4]}
        )
        rows = forgetting_by_quadrant(cmp, counts, counts)
        assert len(rows) == 8
        assert sum(r.n for r in rows) == 2 * len(cmp.aligned_ids)

    def test_coverage_mismatch(self):
        cmp, counts = self.build(
            {"both_correct": [0, 0, 0], "both_wrong": [0, 0, 0], "h1c_h2w": [0, 0, 0]}
        )
        partial = ForgettingCounts(counts={"bc0": 1}, epochs_observed=10)
        with pytest.raises(IdCoverageMismatch):
            forgetting_by_quadrant(cmp, partial, counts)

    def test_weighted_means_recompose_global_sum(self):
        cmp, counts = self.build(
            {"both_correct": [0, 1, 2], "both_wrong": [3, 0, 1], "h1c_h2w": [5, 2, 2]}
        )
        rows = [r for r in forgetting_by_quadrant(cmp, counts, counts) if r.model == "h1" and r.n]
        total = sum(r.mean * r.n for r in rows)
        assert total == pytest.approx(sum(counts.counts[i] for i in cmp.aligned_ids))

    def test_order_invariance(self):
        quadrant_counts = {"both_correct": [0, 1, 2], "both_wrong": [3, 0, 1], "h1c_h2w": [5, 2, 2]}
        cmp, counts = self.build(quadrant_counts)
        rows_a = forgetting_by_quadrant(cmp, counts, counts)
        # rebuild with h1's records reversed
        rev1 = make_log("h1", {r.example_id: r.correct for r in reversed(cmp.log_h1.records)})
        rev_cmp = align(rev1, cmp.log_h2)
        rows_b = forgetting_by_quadrant(rev_cmp, counts, counts)
        assert rows_a == rows_b


def test_csv_writer(tmp_path):
    cmp_builder = TestByQuadrant()
    cmp, counts = cmp_builder.build(
        {"both_correct": [0, 0, 0], "both_wrong": [1, 1, 1], "h1c_h2w": [2, 2, 2]}
    )
    rows = forgetting_by_quadrant(cmp, counts, counts)
    path = tmp_path / "table.csv"
    write_forgetting_table(rows, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "quadrant,model,mean,std,n"
    assert len(lines) == 9
