"""Downstream classifiers over extracted feature vectors.

All five are self-contained numpy implementations: k-nearest neighbors,
Gaussian naive Bayes, an SMO-trained SVM (linear and RBF kernels), a random
forest of Gini trees, and gradient-boosted regression trees on logistic-loss
gradients. Labels are binary with case = 1 as the positive class; every tie
breaks toward case.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from .bayesopt import Continuous, Discrete, LogContinuous, SearchSpace
from .errors import DataError
from .signals import Label

__all__ = [
    "LabeledFeatures",
    "ClassifierKind",
    "ClassifierSpec",
    "KnnClassifier",
    "GaussianNbClassifier",
    "SmoSvmClassifier",
    "RandomForestClassifier",
    "GradientBoostingClassifier",
    "fit",
    "predict",
    "decision_scores",
    "default_spec",
    "classifier_search_space",
    "model_to_dict",
    "model_from_dict",
]


@dataclass(frozen=True)
class LabeledFeatures:
    """Per-(subject, channel) feature rows with binary labels (1 = case)."""

    subject_ids: tuple[str, ...]
    channels: tuple[int, ...]
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if x.ndim != 2:
            raise DataError("feature matrix must be 2-D")
        n = x.shape[0]
        if not (len(self.subject_ids) == len(self.channels) == n == y.size):
            raise DataError("subject_ids, channels, x and y must agree in length")
        if n and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 (control) or 1 (case)")
        if not np.isfinite(x).all():
            raise DataError("non-finite feature value")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "subject_ids", tuple(self.subject_ids))
        object.__setattr__(self, "channels", tuple(int(c) for c in self.channels))

    @property
    def n_rows(self) -> int:
        return self.x.shape[0]

    @property
    def n_features(self) -> int:
        return self.x.shape[1]

    def subjects(self) -> tuple[str, ...]:
        seen: dict[str, None] = {}
        for sid in self.subject_ids:
            seen.setdefault(sid)
        return tuple(seen)

    def subject_labels(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for sid, label in zip(self.subject_ids, self.y):
            out[sid] = int(label)
        return out

    def subset(self, subject_ids) -> "LabeledFeatures":
        wanted = set(subject_ids)
        keep = [i for i, sid in enumerate(self.subject_ids) if sid in wanted]
        return LabeledFeatures(
            subject_ids=tuple(self.subject_ids[i] for i in keep),
            channels=tuple(self.channels[i] for i in keep),
            x=self.x[keep],
            y=self.y[keep],
        )

    def to_csv(self, path: str | Path) -> None:
        q = self.n_features
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["subject_id", "channel"] + [f"f_{i+1}" for i in range(q)] + ["label"])
            for i in range(self.n_rows):
                label = Label.CASE.value if self.y[i] == 1 else Label.CONTROL.value
                writer.writerow(
                    [self.subject_ids[i], self.channels[i]]
                    + [repr(float(v)) for v in self.x[i]]
                    + [label]
                )

    @staticmethod
    def from_csv(path: str | Path) -> "LabeledFeatures":
        path = Path(path)
        if not path.is_file():
            raise DataError(f"feature table not found: {path}")
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if not header or header[0] != "subject_id" or header[-1] != "label":
                raise DataError(f"{path} is not a feature table CSV")
            sids, chans, rows, labels = [], [], [], []
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                if len(row) != len(header):
                    raise DataError(f"{path}: ragged row at line {lineno}")
                sids.append(row[0])
                chans.append(int(row[1]))
                try:
                    rows.append([float(v) for v in row[2:-1]])
                except ValueError as exc:
                    raise DataError(f"{path}: non-numeric feature at line {lineno}") from exc
                try:
                    labels.append(1 if Label(row[-1]) is Label.CASE else 0)
                except ValueError:
                    raise DataError(f"{path}: bad label {row[-1]!r} at line {lineno}") from None
        return LabeledFeatures(tuple(sids), tuple(chans), np.asarray(rows), np.asarray(labels))


class ClassifierKind(Enum):
    KNN = "knn"
    NB = "nb"
    SVM = "svm"
    RF = "rf"
    XGB = "xgb"


KNN_K_VALUES = (2, 3, 4, 5, 6, 7, 8)
SVM_KERNELS = ("linear", "rbf")
SVM_C_RANGE = (0.5, 5.0)
SVM_GAMMA_RANGE = (1e-5, 1.0)
RF_ESTIMATOR_VALUES = (5, 10, 15, 20, 25)
XGB_DEPTH_VALUES = (3, 4, 5, 6, 7)
XGB_LEARNING_RATE_RANGE = (0.001, 0.1)
XGB_ESTIMATOR_VALUES = (10, 50, 100, 200)

NB_VARIANCE_FLOOR = 1e-9


@dataclass(frozen=True)
class ClassifierSpec:
    """A classifier kind plus hyperparameters constrained to the search domains."""

    kind: ClassifierKind
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        p = dict(self.params)
        kind = self.kind
        if kind is ClassifierKind.KNN:
            self._expect_keys(p, {"k"})
            if p["k"] not in KNN_K_VALUES:
                raise DataError(f"knn k must be in {KNN_K_VALUES}, got {p['k']}")
        elif kind is ClassifierKind.NB:
            self._expect_keys(p, set())
        elif kind is ClassifierKind.SVM:
            self._expect_keys(p, {"kernel", "c", "gamma"})
            if p["kernel"] not in SVM_KERNELS:
                raise DataError(f"svm kernel must be one of {SVM_KERNELS}")
            if not (SVM_C_RANGE[0] <= p["c"] <= SVM_C_RANGE[1]):
                raise DataError(f"svm c must lie in {SVM_C_RANGE}")
            if not (SVM_GAMMA_RANGE[0] <= p["gamma"] <= SVM_GAMMA_RANGE[1]):
                raise DataError(f"svm gamma must lie in {SVM_GAMMA_RANGE}")
        elif kind is ClassifierKind.RF:
            self._expect_keys(p, {"n_estimators"})
            if p["n_estimators"] not in RF_ESTIMATOR_VALUES:
                raise DataError(f"rf n_estimators must be in {RF_ESTIMATOR_VALUES}")
        elif kind is ClassifierKind.XGB:
            self._expect_keys(p, {"max_depth", "learning_rate", "n_estimators"})
            if p["max_depth"] not in XGB_DEPTH_VALUES:
                raise DataError(f"xgb max_depth must be in {XGB_DEPTH_VALUES}")
            lo, hi = XGB_LEARNING_RATE_RANGE
            if not (lo <= p["learning_rate"] <= hi):
                raise DataError(f"xgb learning_rate must lie in {XGB_LEARNING_RATE_RANGE}")
            if p["n_estimators"] not in XGB_ESTIMATOR_VALUES:
                raise DataError(f"xgb n_estimators must be in {XGB_ESTIMATOR_VALUES}")
        object.__setattr__(self, "params", p)

    @staticmethod
    def _expect_keys(params: dict, expected: set):
        if set(params) != expected:
            raise DataError(f"expected hyperparameters {sorted(expected)}, got {sorted(params)}")


def default_spec(kind: ClassifierKind) -> ClassifierSpec:
    defaults = {
        ClassifierKind.KNN: {"k": 3},
        ClassifierKind.NB: {},
        ClassifierKind.SVM: {"kernel": "linear", "c": 1.0, "gamma": 0.1},
        ClassifierKind.RF: {"n_estimators": 10},
        ClassifierKind.XGB: {"max_depth": 3, "learning_rate": 0.1, "n_estimators": 50},
    }
    return ClassifierSpec(kind, defaults[kind])


def classifier_search_space(kind: ClassifierKind) -> SearchSpace:
    """The tuning domain of each classifier; naive Bayes has nothing to tune."""
    if kind is ClassifierKind.KNN:
        return SearchSpace((Discrete("k", KNN_K_VALUES),))
    if kind is ClassifierKind.NB:
        return SearchSpace(())
    if kind is ClassifierKind.SVM:
        return SearchSpace(
            (
                Discrete("kernel", SVM_KERNELS),
                Continuous("c", *SVM_C_RANGE),
                LogContinuous("gamma", *SVM_GAMMA_RANGE),
            )
        )
    if kind is ClassifierKind.RF:
        return SearchSpace((Discrete("n_estimators", RF_ESTIMATOR_VALUES),))
    if kind is ClassifierKind.XGB:
        return SearchSpace(
            (
                Discrete("max_depth", XGB_DEPTH_VALUES),
                LogContinuous("learning_rate", *XGB_LEARNING_RATE_RANGE),
                Discrete("n_estimators", XGB_ESTIMATOR_VALUES),
            )
        )
    raise DataError(f"unknown classifier kind {kind}")


# ---------------------------------------------------------------------------
# decision trees shared by the forest and the boosting ensemble

def _gini(counts1: np.ndarray, totals: np.ndarray) -> np.ndarray:
    p1 = counts1 / totals
    return 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)


def _best_split(xcol: np.ndarray, y: np.ndarray, mode: str):
    order = np.argsort(xcol, kind="stable")
    xs, ys = xcol[order], y[order]
    boundaries = np.nonzero(xs[1:] != xs[:-1])[0]
    if boundaries.size == 0:
        return None
    n = xs.size
    n_left = boundaries + 1
    n_right = n - n_left
    if mode == "gini":
        ones = np.cumsum(ys == 1)
        left1 = ones[boundaries]
        right1 = ones[-1] - left1
        cost = (n_left * _gini(left1, n_left) + n_right * _gini(right1, n_right)) / n
    else:
        s = np.cumsum(ys)
        s2 = np.cumsum(ys * ys)
        sl, sl2 = s[boundaries], s2[boundaries]
        sr, sr2 = s[-1] - sl, s2[-1] - sl2
        var_left = sl2 / n_left - (sl / n_left) ** 2
        var_right = sr2 / n_right - (sr / n_right) ** 2
        cost = (n_left * var_left + n_right * var_right) / n
    best = int(np.argmin(cost))
    threshold = 0.5 * (xs[boundaries[best]] + xs[boundaries[best] + 1])
    return float(cost[best]), float(threshold)


def _leaf_value(y: np.ndarray, mode: str) -> float:
    if mode == "gini":
        ones = int((y == 1).sum())
        return 1.0 if 2 * ones >= y.size else 0.0  # tie breaks toward case
    return float(y.mean())


def _node_impurity(y: np.ndarray, mode: str) -> float:
    if mode == "gini":
        p1 = float((y == 1).mean())
        return 1.0 - p1 * p1 - (1.0 - p1) * (1.0 - p1)
    return float(np.var(y))


def _build_tree(x, y, mode, max_depth, rng, subsample_features, depth=0):
    n, d = x.shape
    if n < 2 or (max_depth is not None and depth >= max_depth):
        return {"leaf": _leaf_value(y, mode)}
    parent = _node_impurity(y, mode)
    if parent <= 1e-15:
        return {"leaf": _leaf_value(y, mode)}
    if subsample_features and rng is not None:
        m = max(1, int(round(math.sqrt(d))))
        features = np.sort(rng.choice(d, size=min(m, d), replace=False))
    else:
        features = np.arange(d)
    best = None
    for j in features:
        found = _best_split(x[:, j], y, mode)
        if found is None:
            continue
        cost, threshold = found
        if best is None or cost < best[0] - 1e-15:
            best = (cost, int(j), threshold)
    if best is None or best[0] >= parent - 1e-12:
        return {"leaf": _leaf_value(y, mode)}
    _, j, threshold = best
    mask = x[:, j] <= threshold
    return {
        "feature": j,
        "threshold": threshold,
        "left": _build_tree(x[mask], y[mask], mode, max_depth, rng, subsample_features, depth + 1),
        "right": _build_tree(x[~mask], y[~mask], mode, max_depth, rng, subsample_features, depth + 1),
    }


def _tree_predict(node: dict, x: np.ndarray) -> np.ndarray:
    out = np.empty(x.shape[0])

    def descend(nd, idx):
        if "leaf" in nd:
            out[idx] = nd["leaf"]
            return
        mask = x[idx, nd["feature"]] <= nd["threshold"]
        descend(nd["left"], idx[mask])
        descend(nd["right"], idx[~mask])

    descend(node, np.arange(x.shape[0]))
    return out


# ---------------------------------------------------------------------------
# classifiers

class KnnClassifier:
    """Lazy euclidean k-NN; ties break toward case, then toward lower row index."""

    def __init__(self, k: int = 3):
        if k < 1:
            raise DataError("k must be >= 1")
        self.k = k
        self.x_train: np.ndarray | None = None
        self.y_train: np.ndarray | None = None

    def fit(self, x, y):
        x, y = _check_training(x, y, require_both_classes=False)
        if self.k > x.shape[0]:
            raise DataError(f"k={self.k} exceeds {x.shape[0]} training rows")
        self.x_train, self.y_train = x, y
        return self

    def predict(self, x):
        x = _check_features(x, self.x_train.shape[1])
        d2 = ((x[:, None, :] - self.x_train[None, :, :]) ** 2).sum(axis=2)
        order = np.argsort(d2, axis=1, kind="stable")[:, : self.k]
        votes_case = (self.y_train[order] == 1).sum(axis=1)
        return (2 * votes_case >= self.k).astype(np.int64)


class GaussianNbClassifier:
    """Per-feature Gaussian likelihoods with a variance floor; priors from counts."""

    def __init__(self):
        self.priors: np.ndarray | None = None  # [control, case]
        self.means: np.ndarray | None = None
        self.variances: np.ndarray | None = None

    def fit(self, x, y):
        x, y = _check_training(x, y, require_both_classes=True)
        means, variances, priors = [], [], []
        for cls in (0, 1):
            rows = x[y == cls]
            means.append(rows.mean(axis=0))
            variances.append(np.maximum(rows.var(axis=0), NB_VARIANCE_FLOOR))
            priors.append(rows.shape[0] / x.shape[0])
        self.means = np.array(means)
        self.variances = np.array(variances)
        self.priors = np.array(priors)
        return self

    def _log_posterior(self, x):
        out = np.empty((x.shape[0], 2))
        for cls in (0, 1):
            mu, var = self.means[cls], self.variances[cls]
            ll = -0.5 * (np.log(2.0 * np.pi * var) + (x - mu) ** 2 / var).sum(axis=1)
            out[:, cls] = ll + np.log(self.priors[cls])
        return out

    def predict(self, x):
        x = _check_features(x, self.means.shape[1])
        post = self._log_posterior(x)
        return (post[:, 1] >= post[:, 0]).astype(np.int64)


class SmoSvmClassifier:
    """Soft-margin SVM trained by pairwise coordinate ascent on the dual."""

    def __init__(self, kernel: str = "linear", c: float = 1.0, gamma: float = 0.1,
                 tol: float = 1e-3, max_passes: int = 100, seed: int = 0):
        if kernel not in SVM_KERNELS:
            raise DataError(f"kernel must be one of {SVM_KERNELS}")
        if c <= 0:
            raise DataError("c must be positive")
        if kernel == "rbf" and gamma <= 0:
            raise DataError("gamma must be positive for the rbf kernel")
        self.kernel = kernel
        self.c = c
        self.gamma = gamma
        self.tol = tol
        self.max_passes = max_passes
        self.seed = seed
        self.x_train = self.s_train = self.alphas = None
        self.b = 0.0

    def _gram(self, xa, xb):
        if self.kernel == "linear":
            return xa @ xb.T
        d2 = (
            (xa * xa).sum(axis=1)[:, None]
            + (xb * xb).sum(axis=1)[None, :]
            - 2.0 * (xa @ xb.T)
        )
        return np.exp(-self.gamma * np.maximum(d2, 0.0))

    def fit(self, x, y):
        x, y = _check_training(x, y, require_both_classes=True)
        s = np.where(y == 1, 1.0, -1.0)
        n = x.shape[0]
        k = self._gram(x, x)
        alphas = np.zeros(n)
        b = 0.0
        rng = np.random.default_rng(self.seed)
        c, tol = self.c, self.tol
        for _ in range(self.max_passes):
            changed = 0
            for i in range(n):
                err_i = float(alphas * s @ k[:, i]) + b - s[i]
                if not ((s[i] * err_i < -tol and alphas[i] < c) or (s[i] * err_i > tol and alphas[i] > 0)):
                    continue
                j = int(rng.integers(n - 1))
                if j >= i:
                    j += 1
                err_j = float(alphas * s @ k[:, j]) + b - s[j]
                ai_old, aj_old = alphas[i], alphas[j]
                if s[i] != s[j]:
                    lo, hi = max(0.0, aj_old - ai_old), min(c, c + aj_old - ai_old)
                else:
                    lo, hi = max(0.0, ai_old + aj_old - c), min(c, ai_old + aj_old)
                if lo >= hi:
                    continue
                eta = 2.0 * k[i, j] - k[i, i] - k[j, j]
                if eta >= 0:
                    continue
                aj = np.clip(aj_old - s[j] * (err_i - err_j) / eta, lo, hi)
                if abs(aj - aj_old) < 1e-5:
                    continue
                ai = ai_old + s[i] * s[j] * (aj_old - aj)
                b1 = b - err_i - s[i] * (ai - ai_old) * k[i, i] - s[j] * (aj - aj_old) * k[i, j]
                b2 = b - err_j - s[i] * (ai - ai_old) * k[i, j] - s[j] * (aj - aj_old) * k[j, j]
                alphas[i], alphas[j] = ai, aj
                if 0.0 < ai < c:
                    b = b1
                elif 0.0 < aj < c:
                    b = b2
                else:
                    b = 0.5 * (b1 + b2)
                changed += 1
            if changed == 0:
                break
        self.x_train, self.s_train, self.alphas, self.b = x, s, alphas, b
        return self

    def decision_function(self, x):
        x = _check_features(x, self.x_train.shape[1])
        k = self._gram(self.x_train, x)
        return (self.alphas * self.s_train) @ k + self.b

    def predict(self, x):
        return (self.decision_function(x) >= 0.0).astype(np.int64)


class RandomForestClassifier:
    """Bagged Gini trees with sqrt(d) feature subsampling per split."""

    def __init__(self, n_estimators: int = 10, max_depth: int | None = None, seed: int = 0):
        if n_estimators < 1:
            raise DataError("n_estimators must be >= 1")
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.seed = seed
        self.trees: list[dict] = []
        self.n_features_ = None

    def fit(self, x, y):
        x, y = _check_training(x, y, require_both_classes=False)
        self.n_features_ = x.shape[1]
        self.trees = []
        for seq in np.random.SeedSequence(self.seed).spawn(self.n_estimators):
            rng = np.random.default_rng(seq)
            idx = rng.integers(0, x.shape[0], x.shape[0])  # bootstrap of exactly n rows
            self.trees.append(
                _build_tree(x[idx], y[idx], "gini", self.max_depth, rng, subsample_features=True)
            )
        return self

    def predict(self, x):
        x = _check_features(x, self.n_features_)
        votes = np.zeros(x.shape[0])
        for tree in self.trees:
            votes += _tree_predict(tree, x)
        return (2.0 * votes >= len(self.trees)).astype(np.int64)


class GradientBoostingClassifier:
    """Shrunken regression trees fit to logistic-loss gradients (residuals)."""

    def __init__(self, n_estimators: int = 50, max_depth: int = 3,
                 learning_rate: float = 0.1, seed: int = 0):
        if n_estimators < 1 or max_depth < 1:
            raise DataError("n_estimators and max_depth must be >= 1")
        if learning_rate <= 0:
            raise DataError("learning_rate must be positive")
        self.n_estimators = n_estimators
        self.max_depth = max_depth
        self.learning_rate = learning_rate
        self.seed = seed
        self.f0 = 0.0
        self.trees: list[dict] = []
        self.train_loss_trace: list[float] = []
        self.n_features_ = None

    @staticmethod
    def _log_loss(y, scores):
        p = 1.0 / (1.0 + np.exp(-scores))
        p = np.clip(p, 1e-12, 1.0 - 1e-12)
        return float(-(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)).mean())

    def fit(self, x, y):
        x, y = _check_training(x, y, require_both_classes=True)
        self.n_features_ = x.shape[1]
        yf = y.astype(np.float64)
        p0 = yf.mean()
        self.f0 = float(np.log(p0 / (1.0 - p0)))
        scores = np.full(x.shape[0], self.f0)
        self.trees = []
        self.train_loss_trace = [self._log_loss(yf, scores)]
        for _ in range(self.n_estimators):
            residual = yf - 1.0 / (1.0 + np.exp(-scores))
            tree = _build_tree(x, residual, "mse", self.max_depth, None, subsample_features=False)
            self.trees.append(tree)
            scores = scores + self.learning_rate * _tree_predict(tree, x)
            self.train_loss_trace.append(self._log_loss(yf, scores))
        return self

    def decision_function(self, x, n_rounds: int | None = None):
        x = _check_features(x, self.n_features_)
        if n_rounds is None:
            n_rounds = len(self.trees)
        scores = np.full(x.shape[0], self.f0)
        for tree in self.trees[:n_rounds]:
            scores = scores + self.learning_rate * _tree_predict(tree, x)
        return scores

    def predict(self, x):
        return (self.decision_function(x) >= 0.0).astype(np.int64)


def _check_training(x, y, require_both_classes: bool):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if x.ndim != 2 or x.shape[0] != y.size:
        raise DataError("x must be (n, d) with one label per row")
    if x.shape[0] < 2:
        raise DataError("need at least 2 training examples")
    if require_both_classes and len(np.unique(y)) < 2:
        raise DataError("training set contains a single class")
    return x, y


def _check_features(x, n_features):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[1] != n_features:
        raise DataError(f"feature dimension {x.shape[1]} does not match training {n_features}")
    return x


def fit(spec: ClassifierSpec, train: LabeledFeatures, seed: int = 0):
    """Train a classifier of the given spec on the feature table."""
    p = spec.params
    if spec.kind is ClassifierKind.KNN:
        model = KnnClassifier(k=p["k"])
    elif spec.kind is ClassifierKind.NB:
        model = GaussianNbClassifier()
    elif spec.kind is ClassifierKind.SVM:
        model = SmoSvmClassifier(kernel=p["kernel"], c=p["c"], gamma=p["gamma"], seed=seed)
    elif spec.kind is ClassifierKind.RF:
        model = RandomForestClassifier(n_estimators=p["n_estimators"], seed=seed)
    elif spec.kind is ClassifierKind.XGB:
        model = GradientBoostingClassifier(
            n_estimators=p["n_estimators"],
            max_depth=p["max_depth"],
            learning_rate=p["learning_rate"],
            seed=seed,
        )
    else:
        raise DataError(f"unknown classifier kind {spec.kind}")
    return model.fit(train.x, train.y)


def predict(model, x) -> np.ndarray:
    return model.predict(x)


def decision_scores(model, x):
    """Real-valued scores where the model defines them, else None."""
    if hasattr(model, "decision_function"):
        return model.decision_function(x)
    return None


# ---------------------------------------------------------------------------
# serialization

def model_to_dict(model) -> dict:
    if isinstance(model, KnnClassifier):
        return {
            "model": "knn",
            "k": model.k,
            "x": model.x_train.tolist(),
            "y": model.y_train.tolist(),
        }
    if isinstance(model, GaussianNbClassifier):
        return {
            "model": "nb",
            "priors": model.priors.tolist(),
            "means": model.means.tolist(),
            "variances": model.variances.tolist(),
        }
    if isinstance(model, SmoSvmClassifier):
        return {
            "model": "svm",
            "kernel": model.kernel,
            "c": model.c,
            "gamma": model.gamma,
            "x": model.x_train.tolist(),
            "s": model.s_train.tolist(),
            "alphas": model.alphas.tolist(),
            "b": model.b,
        }
    if isinstance(model, RandomForestClassifier):
        return {
            "model": "rf",
            "n_estimators": model.n_estimators,
            "max_depth": model.max_depth,
            "seed": model.seed,
            "n_features": model.n_features_,
            "trees": model.trees,
        }
    if isinstance(model, GradientBoostingClassifier):
        return {
            "model": "xgb",
            "n_estimators": model.n_estimators,
            "max_depth": model.max_depth,
            "learning_rate": model.learning_rate,
            "seed": model.seed,
            "n_features": model.n_features_,
            "f0": model.f0,
            "trees": model.trees,
        }
    raise DataError(f"cannot serialize model of type {type(model).__name__}")


def model_from_dict(payload: dict):
    kind = payload.get("model")
    if kind == "knn":
        model = KnnClassifier(k=payload["k"])
        model.x_train = np.asarray(payload["x"], dtype=np.float64)
        model.y_train = np.asarray(payload["y"], dtype=np.int64)
        return model
    if kind == "nb":
        model = GaussianNbClassifier()
        model.priors = np.asarray(payload["priors"])
        model.means = np.asarray(payload["means"])
        model.variances = np.asarray(payload["variances"])
        return model
    if kind == "svm":
        model = SmoSvmClassifier(kernel=payload["kernel"], c=payload["c"], gamma=payload["gamma"])
        model.x_train = np.asarray(payload["x"], dtype=np.float64)
        model.s_train = np.asarray(payload["s"], dtype=np.float64)
        model.alphas = np.asarray(payload["alphas"], dtype=np.float64)
        model.b = float(payload["b"])
        return model
    if kind == "rf":
        model = RandomForestClassifier(
            n_estimators=payload["n_estimators"], max_depth=payload["max_depth"], seed=payload["seed"]
        )
        model.n_features_ = payload["n_features"]
        model.trees = payload["trees"]
        return model
    if kind == "xgb":
        model = GradientBoostingClassifier(
            n_estimators=payload["n_estimators"],
            max_depth=payload["max_depth"],
            learning_rate=payload["learning_rate"],
            seed=payload["seed"],
        )
        model.n_features_ = payload["n_features"]
        model.f0 = float(payload["f0"])
        model.trees = payload["trees"]
        return model
    raise DataError(f"unknown serialized model kind {kind!r}")
