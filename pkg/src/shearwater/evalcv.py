"""Shared fold construction, metrics, threshold tuning, the cross-validation
driver, and majority voting.

One stratified FoldAssignment is built once per run and shared by every
model setting and both dataset modes; hard labels come from a single
decision threshold tuned on pooled out-of-fold scores.
"""

from __future__ import annotations

import csv
import io
import zlib
from dataclasses import dataclass, field

import numpy as np

from .boost import GbdtParams, LearnerKind, TrainedModel, fit_learner, predict_scores
from .datasets import DatasetMode, FeatureMatrix, impute
from .errors import (
    BirdSetMismatch,
    LengthMismatch,
    MissingLabel,
    SingleClass,
    TooFewPerClass,
)


def stable_seed(text: str) -> int:
    """Platform-stable integer from a string, for seeding rng streams."""
    return zlib.crc32(text.encode("utf-8"))


@dataclass(frozen=True)
class ModelSetting:
    """One trainable setting: a learner on one dataset variant."""

    kind: LearnerKind
    mode: DatasetMode
    params: GbdtParams = field(default_factory=GbdtParams)

    @property
    def name(self) -> str:
        return f"{self.mode.value}_{self.kind.value}"


def setting_rng(setting_name: str, seed: int, stage: int) -> np.random.Generator:
    """Private random stream per (setting, replicate seed, fold/stage).

    Deriving the stream from the setting name keeps settings that share an
    algorithm (e.g. the two exact-backend logistic learners) from training
    bit-identical ensemble members.
    """
    return np.random.default_rng([seed, stable_seed(setting_name), stage])


@dataclass
class FoldAssignment:
    """Deterministic stratified bird -> fold map."""

    assignment: dict[str, int]
    k: int
    seed: int

    def fold_vector(self, bird_ids: list[str]) -> np.ndarray:
        return np.array([self.assignment[b] for b in bird_ids], dtype=np.int64)


def make_folds(labels: dict[str, int], k: int = 5, seed: int = 0) -> FoldAssignment:
    """Stratified k-fold assignment.

    Within each class the sorted bird ids are shuffled by a seeded
    generator and dealt round-robin, so per-class fold counts differ by at
    most one and the result is a pure function of (labels, k, seed).
    """
    rng = np.random.default_rng(seed)
    assignment: dict[str, int] = {}
    for cls in (0, 1):
        ids = sorted(b for b, lab in labels.items() if lab == cls)
        if len(ids) < k:
            raise TooFewPerClass(f"class {cls} has {len(ids)} birds, need >= {k}")
        perm = rng.permutation(len(ids))
        for pos, idx in enumerate(perm):
            assignment[ids[idx]] = pos % k
    return FoldAssignment(assignment=assignment, k=k, seed=seed)


def _confusion(pred, truth) -> tuple[int, int, int, int]:
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise LengthMismatch(f"pred {pred.shape} vs truth {truth.shape}")
    if pred.size == 0:
        raise LengthMismatch("empty prediction vector")
    tp = int(((pred == 1) & (truth == 1)).sum())
    fp = int(((pred == 1) & (truth == 0)).sum())
    fn = int(((pred == 0) & (truth == 1)).sum())
    tn = int(((pred == 0) & (truth == 0)).sum())
    return tp, fp, fn, tn


def f1_score(pred, truth) -> float:
    """F1 with positive class 1; zero when TP = 0 but errors exist, and 1.0
    in the vacuous all-true-negative case.
    """
    tp, fp, fn, _ = _confusion(pred, truth)
    denom = 2 * tp + fp + fn
    if denom == 0:
        return 1.0
    return 2.0 * tp / denom


def accuracy(pred, truth) -> float:
    tp, fp, fn, tn = _confusion(pred, truth)
    return (tp + tn) / (tp + fp + fn + tn)


def tune_threshold(scores, truth) -> float:
    """Threshold maximizing F1 of (score > tau) over the distinct-score
    midpoints plus below-min / above-max sentinels; ties take the smallest.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truth = np.asarray(truth)
    if scores.shape != truth.shape:
        raise LengthMismatch(f"scores {scores.shape} vs truth {truth.shape}")
    if not np.isfinite(scores).all():
        raise ValueError("scores must be finite")
    if len(np.unique(truth)) < 2:
        raise SingleClass("threshold tuning needs both classes present")
    distinct = np.unique(scores)
    candidates = np.concatenate(
        [[distinct[0] - 1.0], 0.5 * (distinct[:-1] + distinct[1:]), [distinct[-1] + 1.0]]
    )
    best_tau = candidates[0]
    best_f1 = -1.0
    for tau in candidates:
        f1 = f1_score((scores > tau).astype(np.int64), truth)
        if f1 > best_f1:
            best_f1 = f1
            best_tau = tau
    return float(best_tau)


def hard_labels(scores, tau: float) -> np.ndarray:
    return (np.asarray(scores) > tau).astype(np.int64)


@dataclass
class CvResult:
    setting_name: str
    fold_f1: list[float]
    mean_f1: float
    oof_scores: np.ndarray
    threshold: float
    oof_labels: np.ndarray
    bird_ids: list[str]


def cross_validate(
    setting: ModelSetting,
    matrix: FeatureMatrix,
    folds: FoldAssignment,
    seed: int = 0,
) -> CvResult:
    """Out-of-fold evaluation of one setting under the shared folds.

    Each fold refits imputation statistics on its training split, fits the
    learner, and scores the held-out birds; the decision threshold is tuned
    once on the pooled out-of-fold scores and the per-fold F1 values are
    reported at that threshold.
    """
    if matrix.labels is None:
        raise MissingLabel("cross-validation needs a labeled matrix")
    fold_of = folds.fold_vector(matrix.bird_ids)
    y = matrix.labels
    oof = np.empty(len(y), dtype=np.float64)
    for k in range(folds.k):
        test_mask = fold_of == k
        train = matrix.subset(~test_mask)
        test = matrix.subset(test_mask)
        train_imp = impute(train, train)
        test_imp = impute(train, test)
        rng = setting_rng(setting.name, seed, k)
        model = fit_learner(
            setting.kind, train_imp.values, train.labels, setting.params, rng, train.columns
        )
        oof[test_mask] = predict_scores(model, test_imp)
    tau = tune_threshold(oof, y)
    labels = hard_labels(oof, tau)
    fold_f1 = [float(f1_score(labels[fold_of == k], y[fold_of == k])) for k in range(folds.k)]
    return CvResult(
        setting_name=setting.name,
        fold_f1=fold_f1,
        mean_f1=float(np.mean(fold_f1)),
        oof_scores=oof,
        threshold=tau,
        oof_labels=labels,
        bird_ids=list(matrix.bird_ids),
    )


def fit_final_model(
    setting: ModelSetting,
    matrix: FeatureMatrix,
    folds: FoldAssignment,
    seed: int = 0,
) -> TrainedModel:
    """Fit on all rows with the threshold tuned on out-of-fold scores."""
    cv = cross_validate(setting, matrix, folds, seed)
    full_imp = impute(matrix, matrix)
    rng = setting_rng(setting.name, seed, folds.k)
    model = fit_learner(
        setting.kind, full_imp.values, matrix.labels, setting.params, rng, matrix.columns
    )
    model.threshold = cv.threshold
    return model


@dataclass
class PredictionSet:
    """Hard labels for a fixed bird set from one (setting, seed) run."""

    bird_ids: list[str]
    labels: np.ndarray
    source: str = ""

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if len(self.bird_ids) != len(self.labels):
            raise LengthMismatch("bird_ids and labels lengths differ")

    def sorted(self) -> "PredictionSet":
        order = np.argsort(np.asarray(self.bird_ids, dtype=object))
        return PredictionSet(
            bird_ids=[self.bird_ids[i] for i in order],
            labels=self.labels[order],
            source=self.source,
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(["bird_id", "label"])
        for bird_id, label in zip(self.bird_ids, self.labels):
            writer.writerow([bird_id, int(label)])
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, source: str = "") -> "PredictionSet":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if header != ["bird_id", "label"]:
            raise BirdSetMismatch(f"bad predictions header {header!r}")
        ids, labels = [], []
        for row in reader:
            if not row:
                continue
            ids.append(row[0])
            labels.append(int(row[1]))
        return cls(bird_ids=ids, labels=np.array(labels, dtype=np.int64), source=source)


def prevalent_label(labels: np.ndarray | list[int]) -> int:
    """Majority class of a training label vector; exact ties go to 1."""
    labels = np.asarray(labels)
    ones = int((labels == 1).sum())
    zeros = int((labels == 0).sum())
    return 1 if ones >= zeros else 0


def majority_vote(sets: list[PredictionSet], tie_label: int = 1) -> PredictionSet:
    """Per-bird most frequent label across prediction sets.

    Exact vote ties resolve to ``tie_label`` (the training-prevalent
    class). All sets must cover identical bird ids.
    """
    if not sets:
        raise BirdSetMismatch("no prediction sets to vote over")
    base = sets[0].sorted()
    reference = base.bird_ids
    votes = np.zeros(len(reference), dtype=np.int64)
    for pset in sets:
        ordered = pset.sorted()
        if ordered.bird_ids != reference:
            raise BirdSetMismatch(
                f"prediction set {pset.source!r} covers different birds"
            )
        votes += ordered.labels
    n = len(sets)
    labels = np.where(votes * 2 > n, 1, np.where(votes * 2 < n, 0, tie_label))
    return PredictionSet(bird_ids=reference, labels=labels, source="majority_vote")


# --- file formats ---------------------------------------------------------

def folds_to_csv(folds: FoldAssignment) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["bird_id", "fold"])
    for bird_id in sorted(folds.assignment):
        writer.writerow([bird_id, folds.assignment[bird_id]])
    return out.getvalue()


def folds_from_csv(text: str, k: int, seed: int) -> FoldAssignment:
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != ["bird_id", "fold"]:
        raise BirdSetMismatch(f"bad folds header {header!r}")
    assignment = {row[0]: int(row[1]) for row in reader if row}
    return FoldAssignment(assignment=assignment, k=k, seed=seed)


def cv_report_csv(results: list[tuple[str, CvResult]]) -> str:
    """Per-fold F1 rows: setting,fold,f1."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["setting", "fold", "f1"])
    for name, result in results:
        for fold, f1 in enumerate(result.fold_f1):
            writer.writerow([name, fold, repr(float(f1))])
    return out.getvalue()


def cv_summary_csv(
    results: list[tuple[str, CvResult]],
    ensemble_f1: float | None = None,
) -> str:
    """Summary rows: setting,mean_f1,threshold, plus an ensemble row."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["setting", "mean_f1", "threshold"])
    for name, result in results:
        writer.writerow([name, repr(float(result.mean_f1)), repr(float(result.threshold))])
    if ensemble_f1 is not None:
        writer.writerow(["ensemble", repr(float(ensemble_f1)), ""])
    return out.getvalue()
