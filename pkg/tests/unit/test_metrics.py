from types import SimpleNamespace

import numpy as np
import pytest

from src.evaluation.metrics import (
    ConfusionMatrix,
    accuracy,
    f_score,
    mcc,
    one_vs_rest,
    precision_recall,
)
from src.evaluation.reports import class_report, mapping_table, render_confusion
from src.exceptions import DomainError
from src.models.knn import KnnClassifier, KnnHyperParams, single_shot_accuracy


class TestConfusionMatrix:

    def test_from_predictions_rows_are_predicted(self):
        chi = ConfusionMatrix.from_predictions([1, 1, 0], [0, 1, 0], n_classes=2)
        np.testing.assert_array_equal(chi.chi, [[1, 0], [1, 1]])
        assert chi.total == 3

    def test_read_only(self):
        chi = ConfusionMatrix(np.eye(2, dtype=int))
        with pytest.raises(ValueError):
            chi.chi[0, 0] = 5

    def test_rejects_negative(self):
        with pytest.raises(DomainError):
            ConfusionMatrix(np.array([[1, -1], [0, 1]]))

    def test_rejects_non_square(self):
        with pytest.raises(DomainError):
            ConfusionMatrix(np.zeros((2, 3)))

    def test_rejects_unknown_class(self):
        with pytest.raises(DomainError):
            ConfusionMatrix.from_predictions([0, 4], [0, 1])

    def test_equality(self):
        assert ConfusionMatrix(np.eye(3)) == ConfusionMatrix(np.eye(3, dtype=int))


class TestAccuracy:

    def test_diagonal(self):
        assert accuracy(np.diag([5, 3, 2, 7])) == 100.0

    def test_three_quarters(self):
        assert accuracy(np.array([[3, 1], [1, 3]])) == 75.0

    def test_empty(self):
        with pytest.raises(DomainError):
            accuracy(np.zeros((4, 4), dtype=int))

    def test_matches_single_shot(self, clustered_points):
        features, labels = clustered_points
        model = KnnClassifier(KnnHyperParams(k=15), mapping="f3").fit(features[::2], labels[::2])
        chi = ConfusionMatrix.from_predictions(model.predict(features[1::2]), labels[1::2])
        assert accuracy(chi) == pytest.approx(single_shot_accuracy(model, features[1::2], labels[1::2]))


class TestPerClassMetrics:

    def test_symmetric_two_class(self):
        chi = np.array([[8, 2], [2, 8]])
        p, r = precision_recall(chi, 0)
        assert p.value == pytest.approx(0.8)
        assert r.value == pytest.approx(0.8)
        assert f_score(chi, 0).value == pytest.approx(80.0)

    def test_precision_uses_column(self):
        chi = np.array([[6, 0], [4, 10]])
        p, r = precision_recall(chi, 0)
        assert p.value == pytest.approx(0.6)
        assert r.value == pytest.approx(1.0)

    def test_undefined_when_class_never_appears(self):
        chi = np.array([[5, 0], [0, 0]])
        p, r = precision_recall(chi, 1)
        assert not p.defined and not r.defined
        assert not f_score(chi, 1).defined
        assert not mcc(chi, 1).defined

    def test_one_vs_rest(self):
        chi = np.array([[5, 1, 0], [2, 6, 1], [0, 0, 4]])
        t_pos, f_pos, f_neg, t_neg = one_vs_rest(chi, 0)
        assert (t_pos, f_pos, f_neg, t_neg) == (5, 2, 1, 11)
        assert t_pos + f_pos + f_neg + t_neg == chi.sum()

    def test_mcc_perfect_and_inverted(self):
        assert mcc(np.diag([4, 6]), 0).value == pytest.approx(100.0)
        assert mcc(np.array([[0, 4], [6, 0]]), 0).value == pytest.approx(-100.0)

    def test_mcc_bounds(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            chi = rng.integers(1, 20, size=(4, 4))
            for k in range(4):
                assert -100.0 <= mcc(chi, k).value <= 100.0

    def test_permutation_invariance(self):
        chi = np.array([[5, 1, 0], [2, 6, 1], [0, 3, 4]])
        perm = [2, 0, 1]
        permuted = chi[np.ix_(perm, perm)]
        for new_k, old_k in enumerate(perm):
            assert f_score(permuted, new_k).value == pytest.approx(f_score(chi, old_k).value)
            assert mcc(permuted, new_k).value == pytest.approx(mcc(chi, old_k).value)

    def test_class_out_of_range(self):
        with pytest.raises(DomainError):
            precision_recall(np.eye(2), 2)


class TestReports:

    def test_class_report(self):
        report = class_report(np.array([[8, 2], [2, 8]]))
        assert list(report["class"]) == [0, 1]
        assert report.loc[0, "F_k"] == pytest.approx(80.0)
        assert report["F_defined"].all()

    def test_class_report_flags_undefined(self):
        report = class_report(np.array([[5, 0], [0, 0]]))
        assert not report.loc[1, "p_defined"]
        assert np.isnan(report.loc[1, "phi_k"])

    def test_render_confusion(self):
        text = render_confusion(np.array([[8, 2], [2, 8]]))
        lines = text.splitlines()
        assert "true 0" in lines[0] and "true 1" in lines[0]
        assert lines[1].startswith("pred 0")
        assert lines[1].split()[2:] == ["8", "2"]

    def test_mapping_table_without_timings(self):
        result = SimpleNamespace(
            mapping="f2", hyperparams=KnnHyperParams(k=7), train_seconds=0.1,
            predict_seconds=0.2, train_accuracy=90.0, validation_accuracy=85.0,
        )
        table = mapping_table([result], include_timings=False)
        assert list(table.columns) == [
            "mapping", "k", "weighting", "metric", "train_accuracy", "validation_accuracy"
        ]
        assert "train_seconds" in mapping_table([result]).columns
