"""The ensemble learners: logistic and pairwise-rank GBDT, random forest,
extra trees, and the linear SVM wrapper, all sharing the Newton tree
backends from :mod:`shearwater.trees`.

Brand differences reduce to (loss, split-candidate generation, tree shape,
bagging): the xgb variants and sk_gbt use exact splits, the lgb variants
histogram splits, cat oblivious trees, and the forests average class-mean
leaves instead of boosting.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from enum import Enum

import numpy as np

from .errors import DegenerateLabels, SchemaMismatch, SingleClass
from .linsvm import SvmModel, fit_pegasos
from .trees import (
    DecisionTree,
    TreeParams,
    build_bins,
    fit_tree_exact,
    fit_tree_hist,
    fit_tree_oblivious,
    fit_tree_uniform,
)

PROB_CLAMP = 1e-6


class LearnerKind(str, Enum):
    XGB_BINARY = "xgb_binary"
    XGB_RANK = "xgb_rank"
    LGB_GBDT = "lgb_gbdt"
    LGB_RF = "lgb_rf"
    CAT = "cat"
    SK_GBT = "sk_gbt"
    SK_RF = "sk_rf"
    SK_ET = "sk_et"
    SVC = "svc"

    @property
    def backend(self) -> str:
        if self in (LearnerKind.LGB_GBDT, LearnerKind.LGB_RF):
            return "hist"
        if self is LearnerKind.CAT:
            return "oblivious"
        return "exact"

    @property
    def family(self) -> str:
        if self is LearnerKind.XGB_RANK:
            return "pairwise"
        if self in (LearnerKind.LGB_RF, LearnerKind.SK_RF, LearnerKind.SK_ET):
            return "forest"
        if self is LearnerKind.SVC:
            return "svm"
        return "logistic"


@dataclass
class GbdtParams:
    """Hyperparameters shared by every learner (unused fields are ignored
    by learners they do not apply to). Defaults are sensible tuned-range
    values; runs override them through the config.
    """

    n_rounds: int = 300
    learning_rate: float = 0.05
    max_depth: int = 5
    reg_lambda: float = 1.0
    min_child_weight: float = 1.0
    subsample: float = 0.8
    colsample: float = 0.8
    n_trees: int = 500  # forests
    pair_cap_factor: int = 100  # rank loss: pairs per round capped at factor * n
    max_bin_edges: int = 255  # histogram backend
    svm_reg: float = 1e-2
    svm_epochs: int = 30

    @classmethod
    def from_dict(cls, doc: dict) -> "GbdtParams":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(doc) - known)
        if unknown:
            raise KeyError(f"unknown hyperparameters: {unknown}")
        return cls(**doc)

    def tree_params(self) -> TreeParams:
        return TreeParams(
            max_depth=self.max_depth,
            min_child_weight=self.min_child_weight,
            reg_lambda=self.reg_lambda,
        )


@dataclass
class TrainedModel:
    """A fitted learner plus its feature schema and decision threshold."""

    kind: LearnerKind
    params: GbdtParams
    feature_names: list[str]
    f0: float = 0.0
    trees: list[DecisionTree] | None = None
    svm: SvmModel | None = None
    threshold: float | None = None
    loss_history: list[float] | None = None

    def to_dict(self) -> dict:
        doc = {
            "kind": self.kind.value,
            "params": asdict(self.params),
            "feature_names": list(self.feature_names),
            "f0": self.f0,
            "threshold": self.threshold,
        }
        if self.svm is not None:
            doc["svm"] = self.svm.to_dict()
        else:
            doc["trees"] = [t.to_dict() for t in self.trees]
        return doc

    @classmethod
    def from_dict(cls, doc: dict) -> "TrainedModel":
        return cls(
            kind=LearnerKind(doc["kind"]),
            params=GbdtParams.from_dict(doc["params"]),
            feature_names=list(doc["feature_names"]),
            f0=float(doc["f0"]),
            threshold=None if doc["threshold"] is None else float(doc["threshold"]),
            trees=[DecisionTree.from_dict(t) for t in doc["trees"]] if "trees" in doc else None,
            svm=SvmModel.from_dict(doc["svm"]) if "svm" in doc else None,
        )


def sigmoid(x):
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def logistic_loss(margins, y) -> float:
    """Mean negative binomial log-likelihood at raw margins F."""
    margins = np.asarray(margins, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return float(np.mean(np.logaddexp(0.0, margins) - y * margins))


def pairwise_loss(scores, y) -> float:
    """Sum over positive/negative pairs of log(1 + exp(-(s_i - s_j)))."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    diff = scores[y == 1][:, None] - scores[y == 0][None, :]
    return float(np.logaddexp(0.0, -diff).sum())


def pairwise_grad_hess(scores, y) -> tuple[np.ndarray, np.ndarray]:
    """Per-instance gradient and hessian of the all-pairs rank loss."""
    scores = np.asarray(scores, dtype=np.float64)
    y = np.asarray(y)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    diff = scores[pos][:, None] - scores[neg][None, :]
    s = sigmoid(-diff)  # d loss / d (s_j - s_i) direction
    w = s * (1.0 - s)
    grad = np.zeros(scores.size)
    hess = np.zeros(scores.size)
    np.add.at(grad, pos, -s.sum(axis=1))
    np.add.at(grad, neg, s.sum(axis=0))
    np.add.at(hess, pos, w.sum(axis=1))
    np.add.at(hess, neg, w.sum(axis=0))
    return grad, hess


def _sample_rows(n: int, fraction: float, rng) -> np.ndarray | None:
    if fraction >= 1.0:
        return None
    size = max(1, int(round(fraction * n)))
    rows = rng.choice(n, size=size, replace=False)
    rows.sort()
    return rows


def _sample_features(d: int, fraction: float, rng) -> np.ndarray | None:
    if fraction >= 1.0:
        return None
    size = max(1, int(round(fraction * d)))
    feats = rng.choice(d, size=size, replace=False)
    feats.sort()
    return feats


def _backend_fitter(backend: str, X, params: GbdtParams):
    """Returns fit(rows, feats, grad, hess, rng) for the chosen backend."""
    tree_params = params.tree_params()
    if backend == "exact":
        def fit(rows, feats, grad, hess, rng):
            return fit_tree_exact(
                X, grad, hess, tree_params, rng, rows=rows, candidate_features=feats
            )
    elif backend == "hist":
        bins = build_bins(X, params.max_bin_edges)
        Xb = bins.bin_matrix(X)

        def fit(rows, feats, grad, hess, rng):
            return fit_tree_hist(
                Xb, grad, hess, bins, tree_params, rng, rows=rows, candidate_features=feats
            )
    elif backend == "oblivious":
        def fit(rows, feats, grad, hess, rng):
            return fit_tree_oblivious(
                X, grad, hess, tree_params, rng, rows=rows, candidate_features=feats
            )
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return fit


def fit_gbdt_logistic(
    X,
    y,
    params: GbdtParams,
    backend: str = "exact",
    rng: np.random.Generator | None = None,
    feature_names: list[str] | None = None,
    kind: LearnerKind = LearnerKind.XGB_BINARY,
) -> TrainedModel:
    """Stagewise logistic-loss boosting with Newton trees.

    F0 is the clamped log-odds of the training prevalence; each round fits
    a tree to (p - y, p(1 - p)) on an optionally row/column-subsampled view
    and adds learning_rate * tree to the raw margin.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise DegenerateLabels("cannot fit on an empty label vector")
    if rng is None:
        rng = np.random.default_rng(0)
    p_bar = float(np.clip(y.mean(), PROB_CLAMP, 1.0 - PROB_CLAMP))
    f0 = float(np.log(p_bar / (1.0 - p_bar)))
    fitter = _backend_fitter(backend, X, params)
    n, d = X.shape
    margins = np.full(n, f0)
    trees: list[DecisionTree] = []
    history: list[float] = []
    for _ in range(params.n_rounds):
        p = sigmoid(margins)
        grad = p - y
        hess = p * (1.0 - p)
        rows = _sample_rows(n, params.subsample, rng)
        feats = _sample_features(d, params.colsample, rng)
        tree = fitter(rows, feats, grad, hess, rng)
        tree.scale_leaves(params.learning_rate)
        margins += tree.predict(X)
        trees.append(tree)
        history.append(logistic_loss(margins, y))
    return TrainedModel(
        kind=kind,
        params=params,
        feature_names=feature_names or [f"f{i}" for i in range(d)],
        f0=f0,
        trees=trees,
        loss_history=history,
    )


def fit_gbdt_pairwise(
    X,
    y,
    params: GbdtParams,
    backend: str = "exact",
    rng: np.random.Generator | None = None,
    feature_names: list[str] | None = None,
) -> TrainedModel:
    """RankNet-style pairwise boosting; scores are raw margins.

    Per-instance gradients aggregate over that instance's sampled pairs;
    pairs are drawn uniformly without replacement up to
    pair_cap_factor * n per round (all pairs when they fit).
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    pos = np.flatnonzero(y == 1)
    neg = np.flatnonzero(y == 0)
    if pos.size == 0 or neg.size == 0:
        raise SingleClass("pairwise loss needs both classes")
    if rng is None:
        rng = np.random.default_rng(0)
    fitter = _backend_fitter(backend, X, params)
    n, d = X.shape
    cap = params.pair_cap_factor * n
    total_pairs = pos.size * neg.size
    margins = np.zeros(n)
    trees: list[DecisionTree] = []
    for _ in range(params.n_rounds):
        if total_pairs <= cap:
            pair_ids = np.arange(total_pairs)
        else:
            pair_ids = rng.choice(total_pairs, size=cap, replace=False)
        i_idx = pos[pair_ids // neg.size]
        j_idx = neg[pair_ids % neg.size]
        s = sigmoid(margins[j_idx] - margins[i_idx])
        w = s * (1.0 - s)
        grad = np.zeros(n)
        hess = np.zeros(n)
        np.add.at(grad, i_idx, -s)
        np.add.at(grad, j_idx, s)
        np.add.at(hess, i_idx, w)
        np.add.at(hess, j_idx, w)
        rows = _sample_rows(n, params.subsample, rng)
        feats = _sample_features(d, params.colsample, rng)
        tree = fitter(rows, feats, grad, hess, rng)
        tree.scale_leaves(params.learning_rate)
        margins += tree.predict(X)
        trees.append(tree)
    return TrainedModel(
        kind=LearnerKind.XGB_RANK,
        params=params,
        feature_names=feature_names or [f"f{i}" for i in range(d)],
        f0=0.0,
        trees=trees,
    )


def fit_forest(
    X,
    y,
    params: GbdtParams,
    kind: LearnerKind = LearnerKind.SK_RF,
    rng: np.random.Generator | None = None,
    feature_names: list[str] | None = None,
) -> TrainedModel:
    """Random forest / extra trees with class-mean leaves.

    Trees fit residual gradients g = p_bar - y with unit hessians and no
    regularization, then leaves are shifted by p_bar so each stores the
    class mean of its instances; the score is the mean tree output.

    * sk_rf:  bootstrap rows, sqrt(d) features per node, exact splits
    * lgb_rf: same bagging policy on the histogram backend
    * sk_et:  no bootstrap, sqrt(d) random uniform-threshold candidates
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if y.size == 0:
        raise DegenerateLabels("cannot fit on an empty label vector")
    if rng is None:
        rng = np.random.default_rng(0)
    n, d = X.shape
    per_node = max(1, int(np.ceil(np.sqrt(d))))
    tree_params = TreeParams(
        max_depth=params.max_depth,
        min_child_weight=params.min_child_weight,
        reg_lambda=0.0,
        features_per_node=per_node,
    )
    bins = Xb = None
    if kind is LearnerKind.LGB_RF:
        bins = build_bins(X, params.max_bin_edges)
        Xb = bins.bin_matrix(X)
    trees: list[DecisionTree] = []
    for _ in range(params.n_trees):
        if kind is LearnerKind.SK_ET:
            rows = np.arange(n)
        else:
            rows = rng.integers(0, n, size=n)
        p_bar = float(y[rows].mean())
        grad = p_bar - y
        hess = np.ones(n)
        if kind is LearnerKind.SK_ET:
            tree = fit_tree_uniform(X, grad, hess, tree_params, rng, rows=rows)
        elif kind is LearnerKind.LGB_RF:
            tree = fit_tree_hist(Xb, grad, hess, bins, tree_params, rng, rows=rows)
        else:
            tree = fit_tree_exact(X, grad, hess, tree_params, rng, rows=rows)
        tree.shift_leaves(p_bar)
        for leaf in tree.leaves():
            # leaves are class means; clamp away shift rounding like -1e-17
            leaf.value = float(np.clip(leaf.value, 0.0, 1.0))
        trees.append(tree)
    return TrainedModel(
        kind=kind,
        params=params,
        feature_names=feature_names or [f"f{i}" for i in range(d)],
        f0=0.0,
        trees=trees,
    )


def fit_learner(
    kind: LearnerKind,
    X,
    y,
    params: GbdtParams,
    rng: np.random.Generator,
    feature_names: list[str] | None = None,
) -> TrainedModel:
    """Dispatch one of the nine learner settings."""
    if kind is LearnerKind.XGB_RANK:
        return fit_gbdt_pairwise(X, y, params, "exact", rng, feature_names)
    if kind in (LearnerKind.LGB_RF, LearnerKind.SK_RF, LearnerKind.SK_ET):
        return fit_forest(X, y, params, kind, rng, feature_names)
    if kind is LearnerKind.SVC:
        svm = fit_pegasos(X, y, params.svm_reg, params.svm_epochs, rng)
        return TrainedModel(
            kind=kind,
            params=params,
            feature_names=feature_names or [f"f{i}" for i in range(np.asarray(X).shape[1])],
            svm=svm,
        )
    return fit_gbdt_logistic(X, y, params, kind.backend, rng, feature_names, kind=kind)


def predict_scores(model: TrainedModel, X, columns: list[str] | None = None) -> np.ndarray:
    """Deterministic scores: probabilities for logistic and forest
    learners, raw margins for rank and svc.
    """
    if columns is None and hasattr(X, "columns") and hasattr(X, "values"):
        columns = list(X.columns)
        X = X.values
    if columns is not None and list(columns) != list(model.feature_names):
        raise SchemaMismatch(f"{model.kind.value}: feature columns do not match the model schema")
    X = np.asarray(X, dtype=np.float64)
    if X.shape[1] != len(model.feature_names):
        raise SchemaMismatch(
            f"{model.kind.value}: expected {len(model.feature_names)} features, got {X.shape[1]}"
        )
    if model.svm is not None:
        return model.svm.score(X)
    raw = np.full(X.shape[0], model.f0)
    for tree in model.trees:
        raw += tree.predict(X)
    family = model.kind.family
    if family == "logistic":
        return sigmoid(raw)
    if family == "forest":
        return raw / max(1, len(model.trees))
    return raw  # pairwise margins
