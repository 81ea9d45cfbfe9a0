from __future__ import annotations

import math

import numpy as np
import pytest

from backcompat.data import Dataset
from backcompat.errors import (
    BadAreaFraction,
    IdenticalPair,
    NoShape,
    NotBinary,
    UnknownGroup,
    UnknownLabel,
)
from backcompat.noise import (
    NoiseSpec,
    apply_noise,
    inject_feature_occlusion,
    inject_group_flip,
    inject_label_noise,
    inject_outlier_noise,
)
from backcompat.synth import make_glyph_grid


def pair_dataset(n_per_class: int = 500, classes=(0, 1), extra_class: int | None = None) -> Dataset:
    labels = []
    for c in classes:
        labels += [c] * n_per_class
    if extra_class is not None:
        labels += [extra_class] * n_per_class
    n = len(labels)
    rng = np.random.default_rng(0)
    return Dataset(
        ids=tuple(f"i{k:05d}" for k in range(n)),
        features=rng.normal(size=(n, 3)),
        labels=np.array(labels),
        label_set=tuple(classes) + (() if extra_class is None else (extra_class,)),
        dataset_id="pairs",
    )


def binomial_3sigma(n: int, p: float) -> tuple[float, float]:
    mean = n * p
    sigma = math.sqrt(n * p * (1 - p))
    return mean - 3 * sigma, mean + 3 * sigma


class TestLabelNoise:
    def test_rate_zero_is_identity(self):
        d = pair_dataset()
        out = inject_label_noise(d, (0, 1), rate=0.0, seed=42)
        assert np.array_equal(out.labels, d.labels)
        assert np.array_equal(out.features, d.features)

    def test_rate_one_is_involution(self):
        d = pair_dataset()
        once = inject_label_noise(d, (0, 1), rate=1.0, seed=42)
        assert not np.array_equal(once.labels, d.labels)
        assert (once.labels != d.labels).all()  # every pair-class label swapped
        twice = inject_label_noise(once, (0, 1), rate=1.0, seed=42)
        assert np.array_equal(twice.labels, d.labels)

    def test_flip_count_within_binomial_bounds(self):
        d = pair_dataset(500)  # 1000 pair-class instances
        out = inject_label_noise(d, (0, 1), rate=0.3, seed=7)
        flipped = int((out.labels != d.labels).sum())
        lo, hi = binomial_3sigma(1000, 0.3)
        assert lo <= flipped <= hi

    def test_non_pair_instances_untouched(self):
        d = pair_dataset(200, classes=(0, 1), extra_class=2)
        out = inject_label_noise(d, (0, 1), rate=1.0, seed=3)
        mask = d.labels == 2
        assert np.array_equal(out.labels[mask], d.labels[mask])
        assert np.array_equal(out.features, d.features)

    def test_order_independence(self):
        d = pair_dataset(100)
        perm = np.random.default_rng(1).permutation(len(d))
        shuffled = d.subset(perm)
        out_a = inject_label_noise(d, (0, 1), rate=0.5, seed=9)
        out_b = inject_label_noise(shuffled, (0, 1), rate=0.5, seed=9)
        flips_a = {d.ids[i] for i in range(len(d)) if out_a.labels[i] != d.labels[i]}
        flips_b = {
            shuffled.ids[i] for i in range(len(shuffled)) if out_b.labels[i] != shuffled.labels[i]
        }
        assert flips_a == flips_b

    def test_errors(self):
        d = pair_dataset(10)
        with pytest.raises(UnknownLabel):
            inject_label_noise(d, (0, 9), rate=0.5, seed=0)
        with pytest.raises(IdenticalPair):
            inject_label_noise(d, (1, 1), rate=0.5, seed=0)


class TestOcclusion:
    def test_rate_zero_is_identity(self):
        d = make_glyph_grid(40, seed=5)
        out = inject_feature_occlusion(d, target_label=0, rate=0.0, seed=1)
        assert np.array_equal(out.features, d.features)

    def test_exact_pixel_count_on_10x10(self):
        # 10x10 single channel, area 0.2 -> ceil(20) = 20 px as a 5x4 block
        rng = np.random.default_rng(2)
        d = Dataset(
            ids=tuple(f"g{k}" for k in range(30)),
            features=rng.uniform(0.5, 1.0, size=(30, 100)),  # never equal to fill 0
            labels=np.zeros(30, dtype=int),
            label_set=(0, 1),
            feature_shape=(10, 10, 1),
        )
        out = inject_feature_occlusion(d, target_label=0, rate=1.0, area_fraction=0.2, seed=11)
        changed = (out.features != d.features).sum(axis=1)
        assert (changed == 20).all()
        # occluded pixels carry the fill value
        assert ((out.features == 0.0).sum(axis=1) == 20).all()

    def test_rectangle_is_contiguous(self):
        rng = np.random.default_rng(3)
        d = Dataset(
            ids=("one",),
            features=rng.uniform(0.5, 1.0, size=(1, 144)),
            labels=np.array([0]),
            label_set=(0,),
            feature_shape=(12, 12, 1),
        )
        out = inject_feature_occlusion(d, 0, rate=1.0, area_fraction=0.25, seed=4)
        grid = (out.features[0] != d.features[0]).reshape(12, 12)
        rows = np.flatnonzero(grid.any(axis=1))
        cols = np.flatnonzero(grid.any(axis=0))
        assert grid[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1].all()

    def test_labels_never_modified(self):
        d = make_glyph_grid(30, seed=6)
        out = inject_feature_occlusion(d, target_label=1, rate=1.0, seed=2)
        assert np.array_equal(out.labels, d.labels)

    def test_errors(self):
        d = make_glyph_grid(10, seed=7)
        with pytest.raises(BadAreaFraction):
            inject_feature_occlusion(d, 0, rate=0.5, area_fraction=1.0, seed=0)
        flat = pair_dataset(5)
        with pytest.raises(NoShape):
            inject_feature_occlusion(flat, 0, rate=0.5, seed=0)


class TestOutlierNoise:
    def test_rate_zero_removes_class(self):
        d = pair_dataset(200, classes=(0, 1), extra_class=9)
        out = inject_outlier_noise(d, outlier_label=9, target_label=0, rate=0.0, seed=1)
        assert out.label_set == (0, 1)
        assert len(out) == 400
        assert 9 not in set(out.labels.tolist())

    def test_rate_one_keeps_all_as_target(self):
        d = pair_dataset(200, classes=(0, 1), extra_class=9)
        out = inject_outlier_noise(d, outlier_label=9, target_label=0, rate=1.0, seed=1)
        assert len(out) == 600
        kept_outliers = [i for i in out.ids if i not in d.ids[:400]]
        assert len(kept_outliers) == 200
        assert (out.labels[-200:] == 0).all()

    def test_kept_count_within_binomial_bounds(self):
        d = pair_dataset(200, classes=(0, 1), extra_class=9)
        out = inject_outlier_noise(d, 9, 0, rate=0.5, seed=5)
        kept = len(out) - 400
        lo, hi = binomial_3sigma(200, 0.5)
        assert lo <= kept <= hi

    def test_other_instances_bit_identical(self):
        d = pair_dataset(100, classes=(0, 1), extra_class=9)
        out = inject_outlier_noise(d, 9, 1, rate=0.3, seed=8)
        keep = {rid: k for k, rid in enumerate(out.ids)}
        for i, rid in enumerate(d.ids[:200]):
            assert np.array_equal(out.features[keep[rid]], d.features[i])
            assert out.labels[keep[rid]] == d.labels[i]

    def test_errors(self):
        d = pair_dataset(10, classes=(0, 1), extra_class=9)
        with pytest.raises(UnknownLabel):
            inject_outlier_noise(d, 5, 0, rate=0.5, seed=0)
        with pytest.raises(IdenticalPair):
            inject_outlier_noise(d, 9, 9, rate=0.5, seed=0)


def grouped_dataset(n: int = 400, tagged_frac: float = 1.0) -> Dataset:
    rng = np.random.default_rng(4)
    n_tagged = int(n * tagged_frac)
    groups = tuple(
        frozenset({"kw:comedy"}) if k < n_tagged else frozenset({"kw:other"}) for k in range(n)
    )
    return Dataset(
        ids=tuple(f"r{k:05d}" for k in range(n)),
        features=rng.normal(size=(n, 2)),
        labels=rng.integers(0, 2, size=n),
        label_set=(0, 1),
        groups=groups,
        dataset_id="reviews",
    )


class TestGroupFlip:
    def test_rate_zero_is_identity(self):
        d = grouped_dataset()
        out = inject_group_flip(d, "kw:comedy", rate=0.0, seed=1)
        assert np.array_equal(out.labels, d.labels)

    def test_rate_one_twice_restores_group(self):
        d = grouped_dataset()
        twice = inject_group_flip(
            inject_group_flip(d, "kw:comedy", rate=1.0, seed=1), "kw:comedy", rate=1.0, seed=1
        )
        assert np.array_equal(twice.labels, d.labels)

    def test_flip_count_within_binomial_bounds(self):
        d = grouped_dataset(400, tagged_frac=1.0)
        out = inject_group_flip(d, "kw:comedy", rate=0.47, seed=2)
        flipped = int((out.labels != d.labels).sum())
        lo, hi = binomial_3sigma(400, 0.47)
        assert lo <= flipped <= hi

    def test_untagged_untouched(self):
        d = grouped_dataset(200, tagged_frac=0.5)
        out = inject_group_flip(d, "kw:comedy", rate=1.0, seed=3)
        assert np.array_equal(out.labels[100:], d.labels[100:])
        assert (out.labels[:100] != d.labels[:100]).all()

    def test_errors(self):
        d = grouped_dataset(20)
        with pytest.raises(UnknownGroup):
            inject_group_flip(d, "kw:nonexistent", rate=0.5, seed=0)
        multi = pair_dataset(10, classes=(0, 1), extra_class=2)
        with pytest.raises(NotBinary):
            inject_group_flip(multi, "kw:comedy", rate=0.5, seed=0)


class TestDeterminism:
    def test_byte_identical_reruns(self):
        d = pair_dataset(300)
        spec = NoiseSpec(kind="label_swap", rate=0.37, seed=123, params={"label_a": 0, "label_b": 1})
        out1 = apply_noise(d, spec)
        out2 = apply_noise(d, spec)
        assert np.array_equal(out1.labels, out2.labels)
        assert out1.features.tobytes() == out2.features.tobytes()

    def test_occlusion_reruns_identical(self):
        d = make_glyph_grid(60, seed=9)
        spec = NoiseSpec(
            kind="feature_occlusion",
            rate=0.8,
            seed=55,
            params={"target_label": 2, "area_fraction": 0.2},
        )
        assert apply_noise(d, spec).features.tobytes() == apply_noise(d, spec).features.tobytes()

    def test_different_seeds_differ(self):
        d = pair_dataset(300)
        a = inject_label_noise(d, (0, 1), 0.5, seed=1)
        b = inject_label_noise(d, (0, 1), 0.5, seed=2)
        assert not np.array_equal(a.labels, b.labels)
