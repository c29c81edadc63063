"""Trajectory corpus parsing and persistence in the competition CSV schema.

A trajectory file is UTF-8 CSV with the mandatory header::

    longitude,latitude,sun_azimuth,sun_elevation,daytime,elapsed_time,local_time,days

``local_time`` is formatted ``hh:mm:ss`` and stored as integer seconds of
day; ``elapsed_time`` is read as seconds since trip start (the data ships
without a unit, so seconds is a declared assumption and every kinematic
quantity downstream is consistent with it).
"""

from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    MalformedRow,
    NonMonotonicTime,
    OutOfRange,
    TooShort,
    UnknownBirdInLabels,
)

CSV_HEADER = (
    "longitude",
    "latitude",
    "sun_azimuth",
    "sun_elevation",
    "daytime",
    "elapsed_time",
    "local_time",
    "days",
)
LABELS_HEADER = ("bird_id", "label")

SECONDS_PER_DAY = 86400


@dataclass(frozen=True)
class TrajectoryPoint:
    """One GPS fix with its solar and timing metadata."""

    longitude: float
    latitude: float
    sun_azimuth: float  # degrees clockwise from North, [0, 360)
    sun_elevation: float  # degrees above the horizon, [-90, 90]
    daytime: int  # 1 day, 0 night
    elapsed: float  # seconds since trip start
    local_time: int  # seconds of day, [0, 86400)
    days: int  # day counter starting at 1


@dataclass
class Trajectory:
    """Column-oriented trajectory for one bird trip.

    Parsing validates all invariants; direct construction (used for
    day/night subsequences) does not, so short or empty tracks are
    representable internally.
    """

    bird_id: str
    longitude: np.ndarray
    latitude: np.ndarray
    sun_azimuth: np.ndarray
    sun_elevation: np.ndarray
    daytime: np.ndarray
    elapsed: np.ndarray
    local_time: np.ndarray
    days: np.ndarray

    def __len__(self) -> int:
        return len(self.longitude)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Trajectory):
            return NotImplemented
        return self.bird_id == other.bird_id and all(
            np.array_equal(getattr(self, name), getattr(other, name))
            for name in (
                "longitude",
                "latitude",
                "sun_azimuth",
                "sun_elevation",
                "daytime",
                "elapsed",
                "local_time",
                "days",
            )
        )

    def point(self, i: int) -> TrajectoryPoint:
        return TrajectoryPoint(
            longitude=float(self.longitude[i]),
            latitude=float(self.latitude[i]),
            sun_azimuth=float(self.sun_azimuth[i]),
            sun_elevation=float(self.sun_elevation[i]),
            daytime=int(self.daytime[i]),
            elapsed=float(self.elapsed[i]),
            local_time=int(self.local_time[i]),
            days=int(self.days[i]),
        )

    @property
    def points(self) -> list[TrajectoryPoint]:
        return [self.point(i) for i in range(len(self))]

    def filter_daytime(self, flag: int) -> "Trajectory":
        """Subsequence of points with the given daytime flag.

        The result keeps original elapsed timestamps and may be arbitrarily
        short (down to empty); it is not re-validated.
        """
        mask = self.daytime == flag
        return Trajectory(
            bird_id=self.bird_id,
            longitude=self.longitude[mask],
            latitude=self.latitude[mask],
            sun_azimuth=self.sun_azimuth[mask],
            sun_elevation=self.sun_elevation[mask],
            daytime=self.daytime[mask],
            elapsed=self.elapsed[mask],
            local_time=self.local_time[mask],
            days=self.days[mask],
        )

    def validate(self) -> None:
        if len(self) < 2:
            raise TooShort(f"{self.bird_id}: trajectory has {len(self)} rows, need >= 2")
        checks = (
            ("longitude", self.longitude >= -180, self.longitude <= 180),
            ("latitude", self.latitude >= -90, self.latitude <= 90),
            ("sun_azimuth", self.sun_azimuth >= 0, self.sun_azimuth < 360),
            ("sun_elevation", self.sun_elevation >= -90, self.sun_elevation <= 90),
            ("daytime", self.daytime >= 0, self.daytime <= 1),
            ("elapsed", self.elapsed >= 0, np.isfinite(self.elapsed)),
            ("local_time", self.local_time >= 0, self.local_time < SECONDS_PER_DAY),
            ("days", self.days >= 1, self.days < np.inf),
        )
        for name, lo_ok, hi_ok in checks:
            bad = ~(np.asarray(lo_ok) & np.asarray(hi_ok))
            if bad.any():
                row = int(np.argmax(bad))
                raise OutOfRange(f"{self.bird_id}: row {row}: {name} out of range")
        if not (np.diff(self.elapsed) > 0).all():
            row = int(np.argmax(~(np.diff(self.elapsed) > 0))) + 1
            raise NonMonotonicTime(
                f"{self.bird_id}: row {row}: elapsed_time not strictly increasing"
            )


def parse_local_time(text: str) -> int:
    """``hh:mm:ss`` -> integer seconds of day."""
    parts = text.strip().split(":")
    if len(parts) != 3:
        raise MalformedRow(f"bad local_time {text!r}")
    try:
        h, m, s = (int(p) for p in parts)
    except ValueError:
        raise MalformedRow(f"bad local_time {text!r}") from None
    if not (0 <= m < 60 and 0 <= s < 60):
        raise MalformedRow(f"bad local_time {text!r}")
    return h * 3600 + m * 60 + s


def format_local_time(seconds: int) -> str:
    h, rem = divmod(int(seconds), 3600)
    m, s = divmod(rem, 60)
    return f"{h:02d}:{m:02d}:{s:02d}"


def _float(text: str, column: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise MalformedRow(f"unparseable {column} {text!r}") from None


def _int(text: str, column: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise MalformedRow(f"unparseable {column} {text!r}") from None


def parse_trajectory(bird_id: str, csv_text: str) -> Trajectory:
    """Parse one trajectory CSV document and validate all invariants."""
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow(f"{bird_id}: empty file") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise MalformedRow(f"{bird_id}: bad header {header!r}")

    cols: list[list] = [[] for _ in CSV_HEADER]
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != len(CSV_HEADER):
            raise MalformedRow(f"{bird_id}: line {lineno}: expected 8 fields, got {len(row)}")
        cols[0].append(_float(row[0], "longitude"))
        cols[1].append(_float(row[1], "latitude"))
        cols[2].append(_float(row[2], "sun_azimuth"))
        cols[3].append(_float(row[3], "sun_elevation"))
        cols[4].append(_int(row[4], "daytime"))
        cols[5].append(_float(row[5], "elapsed_time"))
        cols[6].append(parse_local_time(row[6]))
        cols[7].append(_int(row[7], "days"))

    traj = Trajectory(
        bird_id=bird_id,
        longitude=np.array(cols[0], dtype=np.float64),
        latitude=np.array(cols[1], dtype=np.float64),
        sun_azimuth=np.array(cols[2], dtype=np.float64),
        sun_elevation=np.array(cols[3], dtype=np.float64),
        daytime=np.array(cols[4], dtype=np.int64),
        elapsed=np.array(cols[5], dtype=np.float64),
        local_time=np.array(cols[6], dtype=np.int64),
        days=np.array(cols[7], dtype=np.int64),
    )
    traj.validate()
    return traj


def trajectory_to_csv(traj: Trajectory) -> str:
    """Inverse of :func:`parse_trajectory`; floats use shortest round-trip repr."""
    lines = [",".join(CSV_HEADER)]
    for i in range(len(traj)):
        lines.append(
            ",".join(
                (
                    repr(float(traj.longitude[i])),
                    repr(float(traj.latitude[i])),
                    repr(float(traj.sun_azimuth[i])),
                    repr(float(traj.sun_elevation[i])),
                    str(int(traj.daytime[i])),
                    repr(float(traj.elapsed[i])),
                    format_local_time(int(traj.local_time[i])),
                    str(int(traj.days[i])),
                )
            )
        )
    return "\n".join(lines) + "\n"


def parse_labels(csv_text: str) -> dict[str, int]:
    """Parse a ``bird_id,label`` CSV (label must be 0 or 1)."""
    reader = csv.reader(io.StringIO(csv_text))
    try:
        header = next(reader)
    except StopIteration:
        raise MalformedRow("labels: empty file") from None
    if tuple(h.strip() for h in header) != LABELS_HEADER:
        raise MalformedRow(f"labels: bad header {header!r}")
    labels: dict[str, int] = {}
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 2:
            raise MalformedRow(f"labels: line {lineno}: expected 2 fields")
        value = _int(row[1], "label")
        if value not in (0, 1):
            raise OutOfRange(f"labels: line {lineno}: label must be 0 or 1, got {value}")
        labels[row[0]] = value
    return labels


def labels_to_csv(labels: dict[str, int]) -> str:
    lines = [",".join(LABELS_HEADER)]
    lines += [f"{bird_id},{labels[bird_id]}" for bird_id in sorted(labels)]
    return "\n".join(lines) + "\n"


@dataclass
class Corpus:
    """Immutable collection of trajectories keyed by bird id.

    Iteration order is always lexicographic in bird_id regardless of how
    the corpus was assembled.
    """

    trajectories: dict[str, Trajectory]
    labels: dict[str, int] | None = None

    def __post_init__(self) -> None:
        self.trajectories = dict(sorted(self.trajectories.items()))
        if self.labels is not None:
            unknown = sorted(set(self.labels) - set(self.trajectories))
            if unknown:
                raise UnknownBirdInLabels(
                    f"labels reference birds with no trajectory: {unknown[:5]}"
                )
            self.labels = dict(sorted(self.labels.items()))

    @property
    def bird_ids(self) -> list[str]:
        return list(self.trajectories)

    def __len__(self) -> int:
        return len(self.trajectories)

    def __iter__(self):
        return iter(self.trajectories.values())

    def __getitem__(self, bird_id: str) -> Trajectory:
        return self.trajectories[bird_id]


def load_corpus(trajectory_dir: str | Path, labels_path: str | Path | None = None) -> Corpus:
    """Load every ``<bird_id>.csv`` under a directory plus optional labels.

    Files are processed in lexicographic bird_id order so corpus iteration
    order is a pure function of the file names.
    """
    trajectory_dir = Path(trajectory_dir)
    if not trajectory_dir.is_dir():
        raise FileNotFoundError(f"trajectory directory not found: {trajectory_dir}")
    trajectories: dict[str, Trajectory] = {}
    for path in sorted(trajectory_dir.glob("*.csv"), key=lambda p: p.stem):
        try:
            trajectories[path.stem] = parse_trajectory(path.stem, path.read_text())
        except (MalformedRow, NonMonotonicTime, OutOfRange, TooShort) as exc:
            raise type(exc)(f"{path.name}: {exc}") from None
    labels = None
    if labels_path is not None:
        labels = parse_labels(Path(labels_path).read_text())
    return Corpus(trajectories=trajectories, labels=labels)


def atomic_write_text(path: str | Path, text: str) -> None:
    """Write-then-rename so reruns overwrite outputs atomically."""
    path = Path(path)
    tmp = path.with_name(f"{path.name}.tmp{os.getpid()}")
    tmp.write_text(text)
    os.replace(tmp, path)


def save_corpus(
    corpus: Corpus,
    trajectory_dir: str | Path,
    labels_path: str | Path | None = None,
) -> None:
    """Write one CSV per bird (plus the labels file when labels exist)."""
    trajectory_dir = Path(trajectory_dir)
    trajectory_dir.mkdir(parents=True, exist_ok=True)
    for bird_id, traj in corpus.trajectories.items():
        atomic_write_text(trajectory_dir / f"{bird_id}.csv", trajectory_to_csv(traj))
    if labels_path is not None and corpus.labels is not None:
        atomic_write_text(labels_path, labels_to_csv(corpus.labels))
