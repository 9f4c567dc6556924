import io

import numpy as np
import pytest

from astra.data import (
    DataFormatError,
    Dataset,
    RawData,
    fold_split,
    orient_labels,
    parse_csv,
    parse_sparse,
    standardize,
    stratified_folds,
    undersample_minority,
    write_sparse,
)


class TestParseSparse:
    def test_basic(self):
        raw = parse_sparse(io.StringIO("1 1:0.5 3:2\n-1 2:1\n"))
        assert raw.X.tolist() == [[0.5, 0, 2], [0, 1, 0]]
        assert raw.labels.tolist() == [1, -1]

    def test_one_two_labels_preserved(self):
        raw = parse_sparse(io.StringIO("2 1:1\n1 1:2\n2 1:3\n"))
        assert raw.labels.tolist() == [2, 1, 2]

    def test_bad_label(self):
        with pytest.raises(DataFormatError, match="line 2"):
            parse_sparse(io.StringIO("1 1:1\nxx 1:1\n"))

    def test_bad_token(self):
        with pytest.raises(DataFormatError, match="line 1"):
            parse_sparse(io.StringIO("1 1:a\n"))

    def test_non_ascending_indices(self):
        with pytest.raises(DataFormatError, match="ascending"):
            parse_sparse(io.StringIO("1 2:1 2:2\n"))

    def test_empty_file(self):
        with pytest.raises(DataFormatError, match="empty"):
            parse_sparse(io.StringIO(""))

    def test_roundtrip_lossless(self, tmp_path):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(20, 5))
        X[rng.random(X.shape) < 0.3] = 0.0
        labels = rng.choice([-1.0, 1.0], 20)
        path = tmp_path / "data.txt"
        write_sparse(path, X, labels)
        raw = parse_sparse(path)
        assert np.array_equal(raw.X, X)
        assert np.array_equal(raw.labels, labels)


class TestParseCsv:
    def test_basic(self):
        raw = parse_csv(io.StringIO("1,0.5,2\n0,1.5,-1\n"))
        assert raw.X.tolist() == [[0.5, 2], [1.5, -1]]
        assert raw.labels.tolist() == [1, 0]

    def test_header_skipped(self):
        raw = parse_csv(io.StringIO("label,f1\n1,2.0\n"))
        assert raw.labels.tolist() == [1]


class TestOrientLabels:
    def test_minority_to_one(self):
        labels = np.array([2.0] * 100 + [1.0] * 5)
        ds = orient_labels(RawData(X=np.zeros((105, 1)), labels=labels))
        assert ds.m1 == 5 and ds.m0 == 100
        assert ds.ir == pytest.approx(20.0)
        assert np.all(ds.y[-5:] == 1)

    def test_tie_takes_larger_label(self):
        labels = np.array([-1.0, 1.0, -1.0, 1.0, -1.0, 1.0])
        ds = orient_labels(RawData(X=np.zeros((6, 1)), labels=labels))
        assert np.array_equal(ds.y, [0, 1, 0, 1, 0, 1])

    def test_skin_like_ir(self):
        labels = np.array([1.0] * 20000 + [2.0] * 34)
        ds = orient_labels(RawData(X=np.zeros((20034, 1)), labels=labels))
        assert ds.ir == pytest.approx(20000 / 34)

    def test_wrong_label_count(self):
        with pytest.raises(ValueError):
            orient_labels(RawData(X=np.zeros((3, 1)), labels=np.array([1.0, 2.0, 3.0])))


class TestStandardize:
    def test_train_moments(self):
        rng = np.random.default_rng(1)
        ds = Dataset(X=rng.normal(5, 3, (50, 4)), y=np.array([0] * 49 + [1]))
        scaled, _, _, _ = standardize(ds)
        assert np.allclose(scaled.X.mean(axis=0), 0, atol=1e-9)
        assert np.allclose(scaled.X.std(axis=0), 1, atol=1e-9)

    def test_constant_feature_centered_only(self):
        X = np.ones((10, 2))
        X[:, 1] = np.arange(10)
        ds = Dataset(X=X, y=np.array([0] * 9 + [1]))
        scaled, _, _, _ = standardize(ds)
        assert np.allclose(scaled.X[:, 0], 0)

    def test_others_use_train_statistics(self):
        train = Dataset(X=np.array([[0.0], [2.0]]), y=np.array([0, 1]))
        test = Dataset(X=np.array([[10.0]]), y=np.array([1]))
        _, (scaled_test,), mean, std = standardize(train, [test])
        assert mean[0] == 1.0 and std[0] == 1.0
        assert scaled_test.X[0, 0] == 9.0


class TestStratifiedFolds:
    def test_one_positive_per_fold(self):
        rng = np.random.default_rng(2)
        ds = Dataset(X=rng.normal(size=(105, 2)), y=np.array([0] * 100 + [1] * 5))
        plan = stratified_folds(ds, 5, seed=0)
        for f in range(5):
            assert np.sum(ds.y[plan.fold_indices(f)] == 1) == 1

    def test_fold_sizes_balanced_per_class(self):
        rng = np.random.default_rng(3)
        ds = Dataset(X=rng.normal(size=(83, 2)),
                     y=(rng.random(83) < 0.3).astype(int))
        plan = stratified_folds(ds, 5, seed=1)
        for cls in (0, 1):
            counts = [np.sum(ds.y[plan.fold_indices(f)] == cls) for f in range(5)]
            assert max(counts) - min(counts) <= 1

    def test_deterministic(self):
        ds = Dataset(X=np.zeros((20, 1)), y=np.array([0] * 15 + [1] * 5))
        a = stratified_folds(ds, 5, seed=7)
        b = stratified_folds(ds, 5, seed=7)
        assert np.array_equal(a.assignments, b.assignments)

    def test_partition(self):
        ds = Dataset(X=np.zeros((37, 1)), y=np.array([0] * 30 + [1] * 7))
        plan = stratified_folds(ds, 5, seed=3)
        all_idx = np.concatenate([plan.fold_indices(f) for f in range(5)])
        assert sorted(all_idx) == list(range(37))

    def test_errors(self):
        ds = Dataset(X=np.zeros((3, 1)), y=np.array([0, 0, 1]))
        with pytest.raises(ValueError):
            stratified_folds(ds, 5, seed=0)


class TestFoldSplit:
    def test_roles_partition(self):
        ds = Dataset(X=np.arange(40.0).reshape(40, 1),
                     y=np.array([0] * 35 + [1] * 5))
        plan = stratified_folds(ds, 5, seed=4)
        for rotation in range(5):
            tr, val, te = fold_split(ds, plan, rotation, (rotation + 1) % 5)
            total = sorted(np.concatenate([tr.X[:, 0], val.X[:, 0], te.X[:, 0]]))
            assert total == sorted(ds.X[:, 0])
            assert tr.m_tot + val.m_tot + te.m_tot == 40

    def test_same_fold_rejected(self):
        ds = Dataset(X=np.zeros((10, 1)), y=np.array([0] * 8 + [1] * 2))
        plan = stratified_folds(ds, 5, seed=0)
        with pytest.raises(ValueError):
            fold_split(ds, plan, 1, 1)


class TestUndersample:
    def test_counts_and_ir(self):
        ds = Dataset(X=np.zeros((20034, 3)), y=np.array([0] * 20000 + [1] * 34))
        reduced, kept = undersample_minority(ds, 5, seed=0)
        assert reduced.m_tot == 20005
        assert reduced.m1 == 5
        assert reduced.ir == pytest.approx(4000.0)
        assert len(kept) == 5

    def test_keep_all_is_identity(self):
        rng = np.random.default_rng(5)
        ds = Dataset(X=rng.normal(size=(30, 2)), y=np.array([0] * 25 + [1] * 5))
        reduced, _ = undersample_minority(ds, 5, seed=1)
        assert np.array_equal(reduced.X, ds.X)
        assert np.array_equal(reduced.y, ds.y)

    def test_negatives_untouched(self):
        rng = np.random.default_rng(6)
        ds = Dataset(X=rng.normal(size=(50, 2)), y=np.array([0] * 40 + [1] * 10))
        reduced, _ = undersample_minority(ds, 3, seed=2)
        assert np.array_equal(reduced.X[reduced.y == 0], ds.X[ds.y == 0])

    def test_seeded(self):
        ds = Dataset(X=np.zeros((50, 1)), y=np.array([0] * 40 + [1] * 10))
        _, a = undersample_minority(ds, 3, seed=9)
        _, b = undersample_minority(ds, 3, seed=9)
        assert np.array_equal(a, b)

    def test_keep_out_of_range(self):
        ds = Dataset(X=np.zeros((10, 1)), y=np.array([0] * 8 + [1] * 2))
        with pytest.raises(ValueError):
            undersample_minority(ds, 3, seed=0)
