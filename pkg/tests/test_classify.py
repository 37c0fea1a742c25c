import json
import math

import numpy as np
import pytest

from specsiam.classify import (
    ClassifierKind,
    ClassifierSpec,
    GaussianNbClassifier,
    GradientBoostingClassifier,
    KnnClassifier,
    LabeledFeatures,
    RandomForestClassifier,
    SmoSvmClassifier,
    _tree_predict,
    classifier_search_space,
    default_spec,
    fit,
    model_from_dict,
    model_to_dict,
    predict,
)
from specsiam.errors import DataError


# ---------------------------------------------------------------------------
# oracles

def knn_oracle(x_train, y_train, x, k):
    """Exhaustive neighbor enumeration; distance ties keep the lower row index."""
    preds = []
    for row in np.atleast_2d(x):
        dists = sorted(
            (float(((row - t) ** 2).sum()), i) for i, t in enumerate(x_train)
        )
        votes = [int(y_train[i]) for _, i in dists[:k]]
        case_votes = sum(votes)
        preds.append(1 if 2 * case_votes >= k else 0)
    return np.array(preds)


def nb_oracle(x_train, y_train, x):
    """Log-posterior computed term by term with the same variance floor."""
    stats = {}
    for cls in (0, 1):
        rows = x_train[y_train == cls]
        stats[cls] = (
            rows.mean(axis=0),
            np.maximum(rows.var(axis=0), 1e-9),
            rows.shape[0] / x_train.shape[0],
        )
    preds = []
    for row in np.atleast_2d(x):
        scores = {}
        for cls in (0, 1):
            mu, var, prior = stats[cls]
            ll = math.log(prior)
            for j in range(row.size):
                ll += -0.5 * math.log(2 * math.pi * var[j]) - (row[j] - mu[j]) ** 2 / (2 * var[j])
            scores[cls] = ll
        preds.append(1 if scores[1] >= scores[0] else 0)
    return np.array(preds)


def kkt_violation(model, x, y):
    s = np.where(y == 1, 1.0, -1.0)
    f = model.decision_function(x)
    worst = abs(float((model.alphas * s).sum()))
    for i in range(len(x)):
        margin = s[i] * f[i]
        if model.alphas[i] <= 1e-8:
            worst = max(worst, max(0.0, 1.0 - margin))
        elif model.alphas[i] >= model.c - 1e-8:
            worst = max(worst, max(0.0, margin - 1.0))
        else:
            worst = max(worst, abs(margin - 1.0))
    return worst


# ---------------------------------------------------------------------------

class TestKnn:
    def fixture(self, seed=0, n=8, d=3):
        rng = np.random.default_rng(seed)
        x = rng.random((n, d))
        y = rng.integers(0, 2, n)
        if len(set(y.tolist())) < 2:
            y[0] = 1 - y[0]
        return x, y

    def test_stores_training_set_verbatim(self):
        x, y = self.fixture()
        model = KnnClassifier(k=3).fit(x, y)
        np.testing.assert_array_equal(model.x_train, x)
        np.testing.assert_array_equal(model.y_train, y)

    def test_k1_returns_exact_nearest_label(self):
        x, y = self.fixture(1)
        model = KnnClassifier(k=1).fit(x, y)
        preds = model.predict(x + 1e-9)
        np.testing.assert_array_equal(preds, y)

    @pytest.mark.parametrize("k", [1, 2, 3, 5, 7])
    def test_matches_enumeration_oracle(self, k):
        x, y = self.fixture(2)
        queries = np.random.default_rng(3).random((20, 3))
        model = KnnClassifier(k=k).fit(x, y)
        np.testing.assert_array_equal(model.predict(queries), knn_oracle(x, y, queries, k))

    def test_even_k_tie_breaks_toward_case(self):
        x = np.array([[0.0], [1.0]])
        y = np.array([0, 1])
        model = KnnClassifier(k=2).fit(x, y)
        assert model.predict(np.array([[0.5]]))[0] == 1

    def test_permutation_invariance(self):
        x, y = self.fixture(4)
        queries = np.random.default_rng(5).random((10, 3))
        base = KnnClassifier(k=3).fit(x, y).predict(queries)
        perm = np.random.default_rng(6).permutation(len(x))
        shuffled = KnnClassifier(k=3).fit(x[perm], y[perm]).predict(queries)
        np.testing.assert_array_equal(base, shuffled)

    def test_k_larger_than_train_rejected(self):
        x, y = self.fixture()
        with pytest.raises(DataError):
            KnnClassifier(k=100).fit(x, y)


class TestNaiveBayes:
    def test_decision_boundary_at_half(self):
        # class 0 values {-1, 1}: mean 0, var 1; class 1 values {0, 2}: mean 1, var 1
        x = np.array([[-1.0], [1.0], [0.0], [2.0]])
        y = np.array([0, 0, 1, 1])
        model = GaussianNbClassifier().fit(x, y)
        assert model.predict(np.array([[0.49]]))[0] == 0
        assert model.predict(np.array([[0.51]]))[0] == 1
        assert model.predict(np.array([[0.5]]))[0] == 1  # exact tie goes to case

    def test_matches_enumeration_oracle(self):
        rng = np.random.default_rng(7)
        x = rng.random((8, 4))
        y = np.array([0, 0, 0, 1, 1, 1, 0, 1])
        queries = rng.random((25, 4))
        model = GaussianNbClassifier().fit(x, y)
        np.testing.assert_array_equal(model.predict(queries), nb_oracle(x, y, queries))

    def test_zero_variance_feature_stays_finite(self):
        x = np.array([[1.0, 0.2], [1.0, 0.4], [1.0, 0.9], [1.0, 1.1]])
        y = np.array([0, 0, 1, 1])
        model = GaussianNbClassifier().fit(x, y)
        preds = model.predict(np.array([[1.0, 0.3], [1.0, 1.0], [55.0, 1.0]]))
        assert preds.tolist() == [0, 1, 1]

    def test_permutation_invariance(self):
        rng = np.random.default_rng(8)
        x = rng.random((8, 2))
        y = np.array([0, 1, 0, 1, 0, 1, 0, 1])
        queries = rng.random((10, 2))
        base = GaussianNbClassifier().fit(x, y).predict(queries)
        perm = rng.permutation(8)
        np.testing.assert_array_equal(
            base, GaussianNbClassifier().fit(x[perm], y[perm]).predict(queries)
        )

    def test_single_class_rejected(self):
        with pytest.raises(DataError, match="single class"):
            GaussianNbClassifier().fit(np.zeros((3, 1)), np.ones(3))


class TestSvm:
    def separable(self):
        x = np.array([[0.0, 0.0], [0.0, 1.0], [3.0, 3.0], [3.0, 4.0]])
        y = np.array([0, 0, 1, 1])
        return x, y

    def test_linear_separable_fixture(self):
        x, y = self.separable()
        model = SmoSvmClassifier(kernel="linear", c=5.0, seed=0).fit(x, y)
        np.testing.assert_array_equal(model.predict(x), y)
        assert kkt_violation(model, x, y) <= 1e-3
        assert (model.alphas >= -1e-12).all()
        assert (model.alphas <= model.c + 1e-12).all()

    def test_rbf_ring_fixture(self):
        rng = np.random.default_rng(9)
        inner = rng.normal(0.0, 0.2, (6, 2))
        angles = np.linspace(0, 2 * np.pi, 6, endpoint=False)
        outer = 3.0 * np.column_stack([np.cos(angles), np.sin(angles)])
        x = np.vstack([inner, outer])
        y = np.array([1] * 6 + [0] * 6)
        model = SmoSvmClassifier(kernel="rbf", c=5.0, gamma=0.5, seed=1).fit(x, y)
        np.testing.assert_array_equal(model.predict(x), y)

    def test_deterministic_per_seed(self):
        rng = np.random.default_rng(10)
        x = rng.random((12, 3))
        y = rng.integers(0, 2, 12)
        y[:2] = [0, 1]
        a = SmoSvmClassifier(kernel="rbf", c=2.0, gamma=1.0, seed=3).fit(x, y)
        b = SmoSvmClassifier(kernel="rbf", c=2.0, gamma=1.0, seed=3).fit(x, y)
        np.testing.assert_array_equal(a.alphas, b.alphas)
        assert a.b == b.b

    def test_single_class_rejected(self):
        with pytest.raises(DataError, match="single class"):
            SmoSvmClassifier().fit(np.zeros((3, 1)), np.zeros(3))


class TestRandomForest:
    def fixture(self):
        rng = np.random.default_rng(11)
        x0 = rng.normal(0.0, 0.3, (10, 2))
        x1 = rng.normal(2.0, 0.3, (10, 2))
        return np.vstack([x0, x1]), np.array([0] * 10 + [1] * 10)

    def test_single_tree_forest_equals_its_tree(self):
        x, y = self.fixture()
        model = RandomForestClassifier(n_estimators=1, seed=4).fit(x, y)
        np.testing.assert_array_equal(model.predict(x), _tree_predict(model.trees[0], x).astype(int))

    def test_deterministic_per_seed(self):
        x, y = self.fixture()
        a = RandomForestClassifier(n_estimators=5, seed=7).fit(x, y)
        b = RandomForestClassifier(n_estimators=5, seed=7).fit(x, y)
        assert a.trees == b.trees
        c = RandomForestClassifier(n_estimators=5, seed=8).fit(x, y)
        assert a.trees != c.trees

    def test_separates_easy_classes(self):
        x, y = self.fixture()
        model = RandomForestClassifier(n_estimators=10, seed=0).fit(x, y)
        assert (model.predict(x) == y).mean() == 1.0

    def test_single_class_allowed(self):
        model = RandomForestClassifier(n_estimators=2, seed=0).fit(np.zeros((3, 1)), np.ones(3))
        assert model.predict(np.zeros((2, 1))).tolist() == [1, 1]


class TestGradientBoosting:
    def fixture(self):
        rng = np.random.default_rng(12)
        x = rng.random((16, 3))
        y = (x[:, 0] > 0.5).astype(int)
        if y.sum() in (0, len(y)):
            y[0] = 1 - y[0]
        return x, y

    def test_training_loss_non_increasing(self):
        x, y = self.fixture()
        model = GradientBoostingClassifier(n_estimators=30, max_depth=3, learning_rate=0.1).fit(x, y)
        trace = np.array(model.train_loss_trace)
        assert trace.size == 31
        assert (np.diff(trace) <= 1e-12).all()

    def test_round_additivity(self):
        x, y = self.fixture()
        model = GradientBoostingClassifier(n_estimators=8, max_depth=2, learning_rate=0.05).fit(x, y)
        for r in range(1, 9):
            prev = model.decision_function(x, n_rounds=r - 1)
            step = model.learning_rate * _tree_predict(model.trees[r - 1], x)
            np.testing.assert_allclose(model.decision_function(x, n_rounds=r), prev + step, rtol=1e-12)

    def test_fits_simple_rule(self):
        x, y = self.fixture()
        model = GradientBoostingClassifier(n_estimators=50, max_depth=2, learning_rate=0.3).fit(x, y)
        assert (model.predict(x) == y).mean() == 1.0

    def test_single_class_rejected(self):
        with pytest.raises(DataError, match="single class"):
            GradientBoostingClassifier().fit(np.zeros((3, 1)), np.zeros(3))


class TestSpecAndFactory:
    def test_default_specs_valid(self):
        for kind in ClassifierKind:
            spec = default_spec(kind)
            assert spec.kind is kind

    @pytest.mark.parametrize(
        "kind,params",
        [
            (ClassifierKind.KNN, {"k": 1}),
            (ClassifierKind.KNN, {"k": 9}),
            (ClassifierKind.SVM, {"kernel": "poly", "c": 1.0, "gamma": 0.1}),
            (ClassifierKind.SVM, {"kernel": "linear", "c": 10.0, "gamma": 0.1}),
            (ClassifierKind.RF, {"n_estimators": 7}),
            (ClassifierKind.XGB, {"max_depth": 8, "learning_rate": 0.05, "n_estimators": 50}),
            (ClassifierKind.XGB, {"max_depth": 3, "learning_rate": 0.5, "n_estimators": 50}),
            (ClassifierKind.NB, {"smoothing": 1.0}),
        ],
    )
    def test_out_of_domain_params_rejected(self, kind, params):
        with pytest.raises(DataError):
            ClassifierSpec(kind, params)

    def test_search_spaces_cover_domains(self):
        knn = classifier_search_space(ClassifierKind.KNN)
        assert knn.dims[0].values == (2, 3, 4, 5, 6, 7, 8)
        svm = classifier_search_space(ClassifierKind.SVM)
        assert svm.names == ("kernel", "c", "gamma")
        assert svm.dims[1].low == 0.5 and svm.dims[1].high == 5.0
        assert svm.dims[2].low == 1e-5 and svm.dims[2].high == 1.0
        rf = classifier_search_space(ClassifierKind.RF)
        assert rf.dims[0].values == (5, 10, 15, 20, 25)
        xgb = classifier_search_space(ClassifierKind.XGB)
        assert xgb.dims[0].values == (3, 4, 5, 6, 7)
        assert xgb.dims[2].values == (10, 50, 100, 200)
        assert classifier_search_space(ClassifierKind.NB).n_dims == 0

    def test_factory_round_trip_all_kinds(self):
        rng = np.random.default_rng(13)
        x = rng.random((12, 3))
        y = np.array([0, 1] * 6)
        table = LabeledFeatures(
            tuple(f"s{i}" for i in range(12)), tuple([0] * 12), x, y
        )
        for kind in ClassifierKind:
            model = fit(default_spec(kind), table, seed=1)
            preds = predict(model, x)
            assert preds.shape == (12,)
            payload = json.loads(json.dumps(model_to_dict(model)))
            clone = model_from_dict(payload)
            np.testing.assert_array_equal(predict(clone, x), preds)

    def test_dimension_mismatch_rejected(self):
        x = np.random.default_rng(0).random((6, 2))
        y = np.array([0, 1, 0, 1, 0, 1])
        model = KnnClassifier(k=1).fit(x, y)
        with pytest.raises(DataError, match="dimension"):
            model.predict(np.zeros((2, 5)))


class TestLabeledFeatures:
    def make(self):
        x = np.array([[0.1, 0.9], [0.8, 0.2], [0.4, 0.6], [0.3, 0.7]])
        return LabeledFeatures(("a", "a", "b", "b"), (0, 1, 0, 1), x, np.array([1, 1, 0, 0]))

    def test_subjects_and_subset(self):
        table = self.make()
        assert table.subjects() == ("a", "b")
        sub = table.subset(["b"])
        assert sub.n_rows == 2
        assert set(sub.subject_ids) == {"b"}

    def test_csv_round_trip_exact(self, tmp_path):
        table = self.make()
        path = tmp_path / "features.csv"
        table.to_csv(path)
        back = LabeledFeatures.from_csv(path)
        assert back.subject_ids == table.subject_ids
        assert back.channels == table.channels
        np.testing.assert_array_equal(back.x, table.x)
        np.testing.assert_array_equal(back.y, table.y)

    def test_validation(self):
        with pytest.raises(DataError):
            LabeledFeatures(("a",), (0,), np.zeros((1, 2)), np.array([2]))
        with pytest.raises(DataError):
            LabeledFeatures(("a", "b"), (0,), np.zeros((2, 2)), np.array([0, 1]))
