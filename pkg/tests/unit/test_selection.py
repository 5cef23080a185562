import numpy as np
import pytest
from pydantic import ValidationError

from src.exceptions import DomainError
from src.models.knn import KnnHyperParams
from src.models.selection import (
    HyperSpace,
    cross_validate,
    kfold_accuracy,
    kfold_indices,
    random_search,
)


class _RecordingModel:
    """Prediz sempre 0 e anota quais amostras foram avaliadas."""

    seen = []

    def fit(self, features, labels):
        return self

    def predict(self, features):
        _RecordingModel.seen.extend(features[:, 0].astype(int).tolist())
        return np.zeros(len(features), dtype=int)


class TestHyperSpace:

    def test_canonical_order(self):
        space = HyperSpace(k_range=(1, 2), weightings=("distance", "uniform"), metrics=("euclidean",))
        assert [(c.k, c.weighting) for c in space.candidates()] == [
            (1, "uniform"), (1, "distance"), (2, "uniform"), (2, "distance")
        ]
        assert space.size == 4

    def test_default_size(self):
        assert HyperSpace().size == 50 * 2 * 2

    def test_invalid_k_range(self):
        with pytest.raises(ValidationError):
            HyperSpace(k_range=(0, 3))

    def test_unknown_metric(self):
        with pytest.raises(ValidationError):
            HyperSpace(metrics=("chebyshev",))


class TestKfold:

    def test_folds_partition(self):
        splits = kfold_indices(23, 5, np.random.default_rng(0))
        assert sorted(np.concatenate(splits).tolist()) == list(range(23))
        assert sorted(len(s) for s in splits) == [4, 4, 5, 5, 5]

    def test_too_few_samples(self):
        with pytest.raises(DomainError):
            kfold_indices(3, 5, np.random.default_rng(0))

    def test_single_fold(self):
        with pytest.raises(DomainError):
            kfold_indices(10, 1, np.random.default_rng(0))

    def test_each_sample_evaluated_once(self):
        _RecordingModel.seen = []
        features = np.arange(17, dtype=float)[:, None]
        scores = cross_validate(features, np.zeros(17), _RecordingModel, folds=4, seed=2)
        assert len(scores) == 4
        assert sorted(_RecordingModel.seen) == list(range(17))

    def test_constant_labels_give_full_accuracy(self, synthetic_points):
        features, _ = synthetic_points
        labels = np.full(len(features), 2)
        assert kfold_accuracy(features, labels, KnnHyperParams(k=3), mapping="f3") == 100.0

    def test_same_seed_same_score(self, synthetic_points):
        features, labels = synthetic_points
        a = kfold_accuracy(features, labels, KnnHyperParams(k=3), seed=4, mapping="f3")
        b = kfold_accuracy(features, labels, KnnHyperParams(k=3), seed=4, mapping="f3")
        assert a == b


class TestRandomSearch:

    def test_single_combination(self, clustered_points):
        features, labels = clustered_points
        space = HyperSpace(k_range=(3, 3), weightings=("uniform",), metrics=("euclidean",))
        result = random_search(features, labels, space=space, n_iter=1, mapping="f3")
        assert result.best == KnnHyperParams(k=3)
        assert len(result.trials) == 1
        assert result.best_score == result.trials[0].score

    def test_n_iter_clipped(self, synthetic_points, caplog):
        features, labels = synthetic_points
        space = HyperSpace(k_range=(1, 2), metrics=("euclidean",))
        result = random_search(features, labels, space=space, n_iter=50, mapping="f3")
        assert len(result.trials) == 4
        assert "limitando" in caplog.text

    def test_full_space_matches_exhaustive(self, synthetic_points):
        features, labels = synthetic_points
        space = HyperSpace(k_range=(1, 6))
        result = random_search(features, labels, space=space, n_iter=space.size, seed=3, mapping="f3")

        scores = {
            hp: kfold_accuracy(features, labels, hp, seed=3, mapping="f3")
            for hp in space.candidates()
        }
        best_score = max(scores.values())
        expected = next(hp for hp in space.candidates() if scores[hp] == best_score)
        assert result.best == expected
        assert result.best_score == best_score

    def test_deterministic(self, synthetic_points):
        features, labels = synthetic_points
        space = HyperSpace(k_range=(1, 10))
        a = random_search(features, labels, space=space, n_iter=5, seed=7, mapping="f3")
        b = random_search(features, labels, space=space, n_iter=5, seed=7, mapping="f3")
        assert a == b

    def test_large_k_filtered_out(self, synthetic_points):
        features, labels = synthetic_points
        space = HyperSpace(k_range=(20, 40), weightings=("uniform",), metrics=("euclidean",))
        result = random_search(features, labels, space=space, n_iter=30, mapping="f3")
        # 30 amostras, 5 dobras: treino de 24
        assert max(t.hyperparams.k for t in result.trials) == 24

    def test_parallel_matches_serial(self, clustered_points):
        features, labels = clustered_points
        space = HyperSpace(k_range=(1, 5))
        serial = random_search(features, labels, space=space, n_iter=4, seed=1, mapping="f3")
        parallel = random_search(features, labels, space=space, n_iter=4, seed=1, mapping="f3", workers=2)
        assert serial == parallel

    def test_invalid_n_iter(self, synthetic_points):
        features, labels = synthetic_points
        with pytest.raises(DomainError):
            random_search(features, labels, n_iter=0, mapping="f3")
