"""Evaluation protocol: fold-aware min-max scaling, stratified splits, LDA/k-NN, metrics."""

from __future__ import annotations

from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ClassTooSmall,
    DimensionMismatch,
    EmptyTrainingSet,
    LengthMismatch,
    SingleClassAUCUndefined,
    SingularCovariance,
)

LDA_RIDGE = 1e-6


# ---------------------------------------------------------------- scaling


@dataclass(frozen=True)
class MinMaxScaler:
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def span(self) -> np.ndarray:
        return self.maxs - self.mins

    def transform(self, rows) -> np.ndarray:
        return apply_minmax(self, rows)

    def inverse(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        return rows * self.span + self.mins


def fit_minmax(train_rows) -> MinMaxScaler:
    rows = np.asarray(train_rows, dtype=float)
    if rows.ndim == 1:
        rows = rows[None, :]
    if rows.shape[0] == 0:
        raise EmptyTrainingSet("cannot fit a scaler on zero rows")
    return MinMaxScaler(rows.min(axis=0), rows.max(axis=0))


def apply_minmax(scaler: MinMaxScaler, rows) -> np.ndarray:
    """``(x - min) / (max - min)``; constant features map to 0. No clamping."""
    rows = np.asarray(rows, dtype=float)
    if rows.shape[-1] != len(scaler.mins):
        raise DimensionMismatch(f"scaler has {len(scaler.mins)} features, rows have {rows.shape[-1]}")
    span = scaler.span
    safe = np.where(span > 0, span, 1.0)
    out = (rows - scaler.mins) / safe
    return np.where(span > 0, out, 0.0)


# ---------------------------------------------------------------- splits


@dataclass(frozen=True)
class Holdout:
    train_fraction: float = 0.7

    def __post_init__(self):
        if not 0 < self.train_fraction < 1:
            raise ValueError("train fraction must lie strictly between 0 and 1")

    def __str__(self):
        return f"holdout:{self.train_fraction:g}"


@dataclass(frozen=True)
class KFold:
    k: int = 10

    def __post_init__(self):
        if self.k < 2:
            raise ValueError("k must be >= 2")

    def __str__(self):
        return f"kfold:{self.k}"


def parse_split(text: str) -> Holdout | KFold:
    """Parse ``holdout:F`` or ``kfold:K``."""
    kind, _, value = text.partition(":")
    kind = kind.strip().lower()
    try:
        if kind == "holdout":
            return Holdout(float(value) if value else 0.7)
        if kind == "kfold":
            return KFold(int(value) if value else 10)
    except ValueError as exc:
        raise ValueError(f"bad split {text!r}: {exc}") from exc
    raise ValueError(f"bad split {text!r}; expected holdout:F or kfold:K")


@dataclass(frozen=True)
class SplitPlan:
    """Partition ids per sample.

    For a holdout plan ``assignments`` is 0 (train) or 1 (test); for k-fold it
    is the test fold of each sample.
    """

    mode: Holdout | KFold
    seed: int
    assignments: np.ndarray

    @property
    def n_folds(self) -> int:
        return 1 if isinstance(self.mode, Holdout) else self.mode.k

    def folds(self):
        """Yield ``(train_idx, test_idx)`` pairs."""
        a = self.assignments
        if isinstance(self.mode, Holdout):
            yield np.flatnonzero(a == 0), np.flatnonzero(a == 1)
            return
        for f in range(self.mode.k):
            yield np.flatnonzero(a != f), np.flatnonzero(a == f)


def make_splits(labels, mode: Holdout | KFold, seed: int = 0, groups=None) -> SplitPlan:
    """Stratified, seeded partition of samples.

    ``labels`` may be a sequence of labels or anything with a ``labels``
    attribute (such as a dataset manifest). When ``groups`` is given, whole
    groups are assigned together and stratification uses each group's first
    label.
    """
    labels = list(getattr(labels, "labels", labels))
    if groups is not None:
        groups = list(groups)
        if len(groups) != len(labels):
            raise LengthMismatch("groups and labels differ in length")
        order = list(dict.fromkeys(groups))
        first = {}
        for g, lab in zip(groups, labels):
            first.setdefault(g, lab)
        unit_plan = make_splits([first[g] for g in order], mode, seed)
        index = {g: i for i, g in enumerate(order)}
        assign = np.array([unit_plan.assignments[index[g]] for g in groups])
        return SplitPlan(mode, seed, assign)

    counts = Counter(labels)
    if len(counts) < 2:
        raise ClassTooSmall(f"need at least 2 classes, got {len(counts)}")
    small = sorted(c for c, n in counts.items() if n < 2)
    if small:
        raise ClassTooSmall(f"classes with fewer than 2 samples: {small}")

    rng = np.random.default_rng(seed)
    y = np.array(labels, dtype=object)
    assign = np.empty(len(labels), dtype=np.int64)
    position = 0
    for cls in sorted(counts, key=str):
        idx = np.flatnonzero(y == cls)
        idx = idx[rng.permutation(len(idx))]
        if isinstance(mode, Holdout):
            n_train = int(round(mode.train_fraction * len(idx)))
            n_train = min(max(n_train, 1), len(idx) - 1)
            assign[idx[:n_train]] = 0
            assign[idx[n_train:]] = 1
        else:
            # round-robin continuing across classes keeps fold sizes within 1
            assign[idx] = (position + np.arange(len(idx))) % mode.k
            position += len(idx)
    return SplitPlan(mode, seed, assign)


# ---------------------------------------------------------------- classifiers


@dataclass(frozen=True)
class LDAModel:
    classes: np.ndarray
    means: np.ndarray  # (K, p)
    priors: np.ndarray  # (K,)
    coef: np.ndarray  # (K, p) = means @ inv(cov)
    intercept: np.ndarray  # (K,)

    def decision_function(self, rows) -> np.ndarray:
        rows = np.asarray(rows, dtype=float)
        if rows.shape[-1] != self.coef.shape[1]:
            raise DimensionMismatch(f"model has {self.coef.shape[1]} features, rows have {rows.shape[-1]}")
        return rows @ self.coef.T + self.intercept


def lda_fit(rows, labels, ridge: float = LDA_RIDGE) -> LDAModel:
    """Gaussian discriminant with a shared (pooled) covariance.

    ``ridge`` is added to the covariance diagonal before inversion.
    """
    X = np.asarray(rows, dtype=float)
    y = np.asarray(labels)
    if X.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if len(y) != X.shape[0]:
        raise LengthMismatch("rows and labels differ in length")
    classes = np.array(sorted(set(y.tolist()), key=str), dtype=y.dtype)
    if len(classes) < 2:
        raise ClassTooSmall("LDA needs at least two classes")

    n, p = X.shape
    means = np.stack([X[y == c].mean(axis=0) for c in classes])
    priors = np.array([np.mean(y == c) for c in classes])
    lookup = {c: i for i, c in enumerate(classes.tolist())}
    centred = X - means[[lookup[v] for v in y.tolist()]]
    dof = n - len(classes) if n > len(classes) else n
    cov = centred.T @ centred / dof
    cov[np.diag_indices(p)] += ridge
    try:
        chol = np.linalg.cholesky(cov)
    except np.linalg.LinAlgError as exc:
        raise SingularCovariance(f"pooled covariance is not positive definite: {exc}") from exc
    # solve cov @ W = means.T with the Cholesky factor
    w = np.linalg.solve(chol.T, np.linalg.solve(chol, means.T))
    if not np.all(np.isfinite(w)):
        raise SingularCovariance("pooled covariance inversion produced non-finite weights")
    coef = w.T
    intercept = -0.5 * np.einsum("kp,kp->k", coef, means) + np.log(priors)
    return LDAModel(classes, means, priors, coef, intercept)


def lda_predict(model: LDAModel, rows):
    """Predicted labels and per-class posterior probabilities."""
    scores = model.decision_function(rows)
    shifted = scores - scores.max(axis=1, keepdims=True)
    post = np.exp(shifted)
    post /= post.sum(axis=1, keepdims=True)
    return model.classes[np.argmax(scores, axis=1)], post


def _neighbours(train_rows, k, query_rows):
    train = np.asarray(train_rows, dtype=float)
    query = np.asarray(query_rows, dtype=float)
    if train.shape[0] == 0:
        raise EmptyTrainingSet("no training rows")
    if not 1 <= k <= train.shape[0]:
        raise ValueError(f"k must lie in [1, {train.shape[0]}], got {k}")
    if query.shape[-1] != train.shape[-1]:
        raise DimensionMismatch("query and training rows differ in dimension")
    d2 = ((query[:, None, :] - train[None, :, :]) ** 2).sum(axis=2)
    order = np.argsort(d2, axis=1, kind="stable")[:, :k]
    return order, np.sqrt(np.take_along_axis(d2, order, axis=1))


def knn_predict(train_rows, train_labels, k: int, query_rows) -> np.ndarray:
    """Majority vote among the ``k`` nearest training rows (Euclidean).

    Equal distances are ordered by training index. Vote ties go to the label
    whose voting neighbours are closest on average, then to the smallest
    label.
    """
    labels = np.asarray(train_labels)
    order, dist = _neighbours(train_rows, k, query_rows)
    out = []
    for idx, dd in zip(order, dist):
        votes: dict = {}
        for i, d in zip(idx, dd):
            votes.setdefault(labels[i], []).append(d)
        best = min(votes.items(), key=lambda kv: (-len(kv[1]), float(np.mean(kv[1])), str(kv[0])))
        out.append(best[0])
    return np.array(out, dtype=labels.dtype)


def knn_scores(train_rows, train_labels, k: int, query_rows, classes) -> np.ndarray:
    """Fraction of the ``k`` neighbour votes received by each class."""
    labels = np.asarray(train_labels)
    order, _ = _neighbours(train_rows, k, query_rows)
    neigh = labels[order]
    return np.stack([(neigh == c).mean(axis=1) for c in classes], axis=1)


# ---------------------------------------------------------------- metrics


def binary_auc(scores, positive) -> float:
    """Trapezoidal area under the ROC curve; tied scores form one step."""
    scores = np.asarray(scores, dtype=float)
    positive = np.asarray(positive, dtype=bool)
    n_pos = int(positive.sum())
    n_neg = len(positive) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise SingleClassAUCUndefined("AUC needs both positive and negative samples")
    order = np.argsort(-scores, kind="stable")
    s, p = scores[order], positive[order]
    last = np.r_[np.flatnonzero(np.diff(s) != 0), len(s) - 1]
    tp = np.r_[0, np.cumsum(p)[last]] / n_pos
    fp = np.r_[0, np.cumsum(~p)[last]] / n_neg
    return float(np.sum(np.diff(fp) * (tp[1:] + tp[:-1]) / 2))


@dataclass
class EvalReport:
    classes: list
    accuracy: float
    auc: float
    confusion: np.ndarray  # rows: truth, columns: prediction
    accuracy_sd: float = 0.0
    fold_accuracies: list = field(default_factory=list)
    fold_aucs: list = field(default_factory=list)
    folds: list = field(default_factory=list)

    @property
    def accuracy_mean(self) -> float:
        return float(np.mean(self.fold_accuracies)) if self.fold_accuracies else self.accuracy

    def as_items(self) -> list[tuple[str, str]]:
        """Deterministic ``key=value`` pairs for the report file."""
        fmt = lambda v: format(float(v), ".17g")  # noqa: E731
        items = [
            ("classes", ",".join(map(str, self.classes))),
            ("n_samples", str(int(self.confusion.sum()))),
            ("accuracy", fmt(self.accuracy)),
            ("accuracy_mean", fmt(self.accuracy_mean)),
            ("accuracy_sd", fmt(self.accuracy_sd)),
            ("auc", fmt(self.auc)),
        ]
        if self.fold_accuracies:
            items.append(("fold_accuracies", ",".join(fmt(a) for a in self.fold_accuracies)))
            items.append(("fold_aucs", ",".join(fmt(a) for a in self.fold_aucs)))
        for cls, row in zip(self.classes, self.confusion):
            items.append((f"confusion.{cls}", ",".join(str(int(v)) for v in row)))
        return items


def evaluate(predictions, scores, truth, classes=None) -> EvalReport:
    """Accuracy, one-vs-rest macro AUC and confusion counts.

    ``scores`` has one column per entry of ``classes`` (default: sorted union
    of truth and predictions). Classes absent from ``truth`` are left out of
    the AUC average.
    """
    pred = np.asarray(predictions)
    truth = np.asarray(truth)
    if len(pred) != len(truth):
        raise LengthMismatch(f"{len(pred)} predictions for {len(truth)} samples")
    if classes is None:
        classes = sorted(set(truth.tolist()) | set(pred.tolist()), key=str)
    classes = list(classes)
    index = {c: i for i, c in enumerate(classes)}
    confusion = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(truth.tolist(), pred.tolist()):
        confusion[index[t], index[p]] += 1
    accuracy = float(np.trace(confusion) / len(truth)) if len(truth) else 0.0

    auc = float("nan")
    if scores is not None:
        scores = np.asarray(scores, dtype=float)
        if scores.shape != (len(truth), len(classes)):
            raise LengthMismatch(f"scores shape {scores.shape} != ({len(truth)}, {len(classes)})")
        per_class = []
        for c, i in index.items():
            pos = truth == c
            if pos.any() and not pos.all():
                per_class.append(binary_auc(scores[:, i], pos))
        if not per_class:
            raise SingleClassAUCUndefined("truth contains a single class")
        auc = float(np.mean(per_class))
    return EvalReport(classes, accuracy, auc, confusion)


# ---------------------------------------------------------------- protocol


@dataclass
class FoldResult:
    index: int
    train_idx: np.ndarray
    test_idx: np.ndarray
    scaler: MinMaxScaler
    report: EvalReport


def _classify(classifier, knn_k, X_train, y_train, X_test, classes):
    if classifier == "lda":
        model = lda_fit(X_train, y_train)
        pred, post = lda_predict(model, X_test)
        lookup = {c: i for i, c in enumerate(model.classes.tolist())}
        scores = np.zeros((len(X_test), len(classes)))
        for j, c in enumerate(classes):
            if c in lookup:
                scores[:, j] = post[:, lookup[c]]
        return pred, scores
    if classifier == "knn":
        k = min(knn_k, len(X_train))
        return knn_predict(X_train, y_train, k, X_test), knn_scores(X_train, y_train, k, X_test, classes)
    raise ValueError(f"unknown classifier {classifier!r}")


def run_protocol(features, labels, plan: SplitPlan, classifier: str = "lda", knn_k: int = 5, threads: int = 1) -> EvalReport:
    """Scale, train and score every fold of ``plan``.

    The scaler of each fold is fitted on that fold's training rows only.
    Fold results are merged in fold order: pooled confusion and accuracy,
    mean AUC across folds and the population SD of fold accuracies.
    """
    X = np.asarray(features, dtype=float)
    y = np.asarray(labels)
    if len(y) != X.shape[0]:
        raise LengthMismatch("features and labels differ in length")
    classes = sorted(set(y.tolist()), key=str)

    def one(item):
        f, (train, test) = item
        if len(train) == 0:
            raise EmptyTrainingSet(f"fold {f} has no training rows")
        scaler = fit_minmax(X[train])
        pred, scores = _classify(
            classifier, knn_k, apply_minmax(scaler, X[train]), y[train], apply_minmax(scaler, X[test]), classes
        )
        return FoldResult(f, train, test, scaler, evaluate(pred, scores, y[test], classes))

    items = [(f, tt) for f, tt in enumerate(plan.folds()) if len(tt[1])]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(one, items))
    else:
        results = [one(it) for it in items]

    confusion = sum(r.report.confusion for r in results)
    accs = [r.report.accuracy for r in results]
    aucs = [r.report.auc for r in results]
    return EvalReport(
        classes,
        float(np.trace(confusion) / confusion.sum()),
        float(np.mean(aucs)),
        confusion,
        accuracy_sd=float(np.std(accs)) if len(accs) > 1 else 0.0,
        fold_accuracies=accs if len(accs) > 1 else [],
        fold_aucs=aucs if len(aucs) > 1 else [],
        folds=results,
    )
