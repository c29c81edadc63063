"""Feature-matrix assembly for the two dataset variants.

``together`` runs feature extraction on full trajectories (248 columns);
``split`` filters each trajectory to its day and night subsequences,
extracts the full battery independently on each, and prefixes the columns
``day_`` / ``night_`` (496 columns). Exceedance thresholds always come
from the matching pooled subset of the *training* corpus.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import EmptyPool, MissingLabel, SchemaMismatch
from .featex import VelocityThresholds, bird_features, feature_names, velocity_thresholds
from .geokin import velocities
from .trajdata import Corpus, Trajectory, atomic_write_text


class DatasetMode(str, Enum):
    TOGETHER = "together"
    SPLIT = "split"


def schema_columns(mode: DatasetMode) -> list[str]:
    """Column names of a built matrix; a pure function of the mode."""
    base = feature_names()
    if mode == DatasetMode.TOGETHER:
        return list(base)
    return [f"day_{c}" for c in base] + [f"night_{c}" for c in base]


@dataclass
class FeatureMatrix:
    """Dense per-bird feature rows with NaN as the missing sentinel."""

    bird_ids: list[str]
    columns: list[str]
    values: np.ndarray  # (n_birds, n_columns) float64
    labels: np.ndarray | None = None  # int64, aligned with bird_ids

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.shape != (len(self.bird_ids), len(self.columns)):
            raise ValueError("matrix shape does not match ids/columns")
        if len(set(self.columns)) != len(self.columns):
            raise ValueError("duplicate column names")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)

    def subset(self, mask: np.ndarray) -> "FeatureMatrix":
        idx = np.flatnonzero(mask)
        return FeatureMatrix(
            bird_ids=[self.bird_ids[i] for i in idx],
            columns=list(self.columns),
            values=self.values[idx],
            labels=None if self.labels is None else self.labels[idx],
        )

    def to_csv(self) -> str:
        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        header = ["bird_id"] + (["label"] if self.labels is not None else []) + self.columns
        writer.writerow(header)
        for i, bird_id in enumerate(self.bird_ids):
            row = [bird_id]
            if self.labels is not None:
                row.append(str(int(self.labels[i])))
            row += ["" if np.isnan(v) else repr(float(v)) for v in self.values[i]]
            writer.writerow(row)
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "FeatureMatrix":
        reader = csv.reader(io.StringIO(text))
        header = next(reader)
        if not header or header[0] != "bird_id":
            raise SchemaMismatch("feature CSV must start with a bird_id column")
        has_label = len(header) > 1 and header[1] == "label"
        columns = header[2:] if has_label else header[1:]
        bird_ids, labels, rows = [], [], []
        for row in reader:
            if not row:
                continue
            bird_ids.append(row[0])
            body = row[1:]
            if has_label:
                labels.append(int(body[0]))
                body = body[1:]
            rows.append([np.nan if cell == "" else float(cell) for cell in body])
        values = np.array(rows, dtype=np.float64).reshape(len(bird_ids), len(columns))
        return cls(
            bird_ids=bird_ids,
            columns=columns,
            values=values,
            labels=np.array(labels, dtype=np.int64) if has_label else None,
        )


def pooled_velocities(corpus: Corpus, daytime: int | None = None) -> np.ndarray:
    """All velocity samples across the corpus, in sorted bird_id order.

    With a daytime flag, each trajectory is first filtered to that
    subsequence and re-differenced within it.
    """
    chunks = []
    for traj in corpus:
        track = traj if daytime is None else traj.filter_daytime(daytime)
        v = velocities(track).values
        if v.size:
            chunks.append(v)
    if not chunks:
        return np.empty(0)
    return np.concatenate(chunks)


def global_velocity_thresholds(
    corpus: Corpus, mode: DatasetMode, subset: str = "all"
) -> VelocityThresholds:
    """Exceedance thresholds from the pooled corpus velocities.

    ``subset`` is "all" for together mode, "day" or "night" for split mode.
    Raises EmptyPool when the requested subset holds no velocity samples.
    """
    if len(corpus) == 0:
        raise EmptyPool("corpus is empty")
    if mode == DatasetMode.TOGETHER or subset == "all":
        pooled = pooled_velocities(corpus, daytime=None)
    elif subset == "day":
        pooled = pooled_velocities(corpus, daytime=1)
    elif subset == "night":
        pooled = pooled_velocities(corpus, daytime=0)
    else:
        raise ValueError(f"unknown subset {subset!r}")
    if pooled.size == 0:
        raise EmptyPool(f"no velocity samples in subset {subset!r}")
    return velocity_thresholds(pooled)


def _subset_block(track: Trajectory, thresholds: VelocityThresholds | None, width: int) -> np.ndarray:
    if len(track) == 0:
        return np.full(width, np.nan)
    return bird_features(track, thresholds)


def build_dataset(corpus: Corpus, mode: DatasetMode) -> FeatureMatrix:
    """Assemble the feature matrix for a corpus under the given mode.

    Thresholds are pooled from this corpus; to reuse training thresholds on
    a test corpus, call :func:`build_dataset_with_thresholds` instead.
    """
    return build_dataset_with_thresholds(corpus, mode, compute_thresholds(corpus, mode))


def compute_thresholds(corpus: Corpus, mode: DatasetMode) -> dict[str, VelocityThresholds | None]:
    """Pooled thresholds per subset; a subset with no velocities maps to None."""
    if mode == DatasetMode.TOGETHER:
        subsets = ("all",)
    else:
        subsets = ("day", "night")
    out: dict[str, VelocityThresholds | None] = {}
    for subset in subsets:
        try:
            out[subset] = global_velocity_thresholds(corpus, mode, subset)
        except EmptyPool:
            out[subset] = None
    return out


def build_dataset_with_thresholds(
    corpus: Corpus,
    mode: DatasetMode,
    thresholds: dict[str, VelocityThresholds | None],
) -> FeatureMatrix:
    base_width = len(feature_names())
    rows = []
    for traj in corpus:
        if mode == DatasetMode.TOGETHER:
            rows.append(bird_features(traj, thresholds["all"]))
        else:
            day = _subset_block(traj.filter_daytime(1), thresholds["day"], base_width)
            night = _subset_block(traj.filter_daytime(0), thresholds["night"], base_width)
            rows.append(np.concatenate([day, night]))
    values = np.array(rows, dtype=np.float64).reshape(len(corpus), -1)
    labels = None
    if corpus.labels is not None:
        missing = [b for b in corpus.bird_ids if b not in corpus.labels]
        if missing:
            raise MissingLabel(f"birds without labels: {missing[:5]}")
        labels = np.array([corpus.labels[b] for b in corpus.bird_ids], dtype=np.int64)
    return FeatureMatrix(
        bird_ids=corpus.bird_ids,
        columns=schema_columns(mode),
        values=values,
        labels=labels,
    )


def impute(train: FeatureMatrix, apply_to: FeatureMatrix) -> FeatureMatrix:
    """Fill missing entries with training-column medians (0 when a training
    column is entirely missing). Idempotent; never touches the train matrix.
    """
    if train.columns != apply_to.columns:
        raise SchemaMismatch("imputation train/apply column schemas differ")
    fill = np.zeros(len(train.columns))
    observed = ~np.isnan(train.values)
    any_observed = observed.any(axis=0)
    if any_observed.any():
        fill[any_observed] = np.nanmedian(train.values[:, any_observed], axis=0)
    values = apply_to.values.copy()
    nan_rows, nan_cols = np.nonzero(np.isnan(values))
    values[nan_rows, nan_cols] = fill[nan_cols]
    return FeatureMatrix(
        bird_ids=list(apply_to.bird_ids),
        columns=list(apply_to.columns),
        values=values,
        labels=None if apply_to.labels is None else apply_to.labels.copy(),
    )


def write_manifest(columns: list[str], path: str | Path) -> None:
    """Persist the ordered column schema, one name per line."""
    atomic_write_text(path, "\n".join(columns) + "\n")


def read_manifest(path: str | Path) -> list[str]:
    return Path(path).read_text().splitlines()
