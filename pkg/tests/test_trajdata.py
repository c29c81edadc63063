import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from shearwater.errors import (
    MalformedRow,
    NonMonotonicTime,
    OutOfRange,
    TooShort,
    UnknownBirdInLabels,
)
from shearwater.trajdata import (
    Corpus,
    load_corpus,
    parse_labels,
    parse_local_time,
    parse_trajectory,
    save_corpus,
    trajectory_to_csv,
)

HEADER = "longitude,latitude,sun_azimuth,sun_elevation,daytime,elapsed_time,local_time,days"


def doc(*rows):
    return HEADER + "\n" + "\n".join(rows) + "\n"


TWO_ROWS = doc(
    "139.0,38.5,180.0,45.0,1,0,12:00:00,1",
    "139.1,38.6,181.0,44.0,1,60,12:01:00,1",
)


def test_minimal_valid_input():
    traj = parse_trajectory("b1", TWO_ROWS)
    assert len(traj) == 2
    assert traj.longitude[1] == 139.1
    assert traj.local_time[0] == 12 * 3600


def test_local_time_seconds_of_day():
    assert parse_local_time("13:05:30") == 47130
    assert parse_local_time("00:00:00") == 0
    assert parse_local_time("23:59:59") == 86399


@pytest.mark.parametrize("text", ["13:05", "13:05:30:00", "ab:cd:ef", "13:61:00", "13:00:60"])
def test_local_time_malformed(text):
    with pytest.raises(MalformedRow):
        parse_local_time(text)


def test_duplicate_elapsed_rejected():
    text = doc(
        "139.0,38.5,180.0,45.0,1,0,12:00:00,1",
        "139.1,38.6,181.0,44.0,1,60,12:01:00,1",
        "139.2,38.7,182.0,43.0,1,60,12:02:00,1",
    )
    with pytest.raises(NonMonotonicTime):
        parse_trajectory("b1", text)


def test_too_short():
    with pytest.raises(TooShort):
        parse_trajectory("b1", doc("139.0,38.5,180.0,45.0,1,0,12:00:00,1"))


def test_wrong_column_count():
    with pytest.raises(MalformedRow):
        parse_trajectory("b1", doc("139.0,38.5,180.0,45.0,1,0,12:00:00"))


def test_unparseable_number():
    with pytest.raises(MalformedRow):
        parse_trajectory(
            "b1",
            doc(
                "oops,38.5,180.0,45.0,1,0,12:00:00,1",
                "139.1,38.6,181.0,44.0,1,60,12:01:00,1",
            ),
        )


@pytest.mark.parametrize(
    "row",
    [
        "181.0,38.5,180.0,45.0,1,0,12:00:00,1",  # longitude
        "139.0,91.0,180.0,45.0,1,0,12:00:00,1",  # latitude
        "139.0,38.5,360.0,45.0,1,0,12:00:00,1",  # azimuth: 360 excluded
        "139.0,38.5,180.0,95.0,1,0,12:00:00,1",  # elevation
        "139.0,38.5,180.0,45.0,2,0,12:00:00,1",  # daytime
        "139.0,38.5,180.0,45.0,1,-5,12:00:00,1",  # elapsed
        "139.0,38.5,180.0,45.0,1,0,12:00:00,0",  # days
    ],
)
def test_out_of_range_fields(row):
    with pytest.raises(OutOfRange):
        parse_trajectory("b1", doc(row, "139.1,38.6,181.0,44.0,1,60,12:01:00,1"))


def test_bad_header():
    with pytest.raises(MalformedRow):
        parse_trajectory("b1", "lon,lat\n1,2\n")


def test_round_trip_identity():
    traj = parse_trajectory("b1", TWO_ROWS)
    again = parse_trajectory("b1", trajectory_to_csv(traj))
    assert again == traj


@settings(max_examples=50, deadline=None)
@given(
    n=st.integers(min_value=2, max_value=8),
    seed=st.integers(min_value=0, max_value=2**31),
)
def test_round_trip_random_trajectories(n, seed):
    rng = np.random.default_rng(seed)
    from tests.conftest import make_traj

    traj = make_traj(
        longitude=rng.uniform(-179, 179, n),
        latitude=rng.uniform(-89, 89, n),
        elapsed=np.cumsum(rng.uniform(1, 600, n)) - 1.0,
        sun_azimuth=rng.uniform(0, 359.99, n),
        sun_elevation=rng.uniform(-89, 89, n),
        daytime=rng.integers(0, 2, n),
        local_time=rng.integers(0, 86400, n),
        days=rng.integers(1, 5, n),
    )
    traj.validate()
    again = parse_trajectory("b1", trajectory_to_csv(traj))
    assert again == traj


def test_corpus_iteration_order_lexicographic(tmp_path):
    for name in ("b2", "b1", "b10"):
        (tmp_path / f"{name}.csv").write_text(TWO_ROWS)
    corpus = load_corpus(tmp_path)
    assert corpus.bird_ids == ["b1", "b10", "b2"]


def test_corpus_order_independent_of_insertion():
    t = parse_trajectory("x", TWO_ROWS)
    c = Corpus(trajectories={"b2": t, "b1": t})
    assert c.bird_ids == ["b1", "b2"]


def test_load_corpus_annotates_file(tmp_path):
    (tmp_path / "bad.csv").write_text(doc("139.0,38.5,180.0,45.0,1,0,12:00:00,1"))
    with pytest.raises(TooShort, match="bad.csv"):
        load_corpus(tmp_path)


def test_labels_unknown_bird(tmp_path):
    trips = tmp_path / "trips"
    trips.mkdir()
    (trips / "b1.csv").write_text(TWO_ROWS)
    labels = tmp_path / "labels.csv"  # outside the trajectory dir
    labels.write_text("bird_id,label\nb1,1\nghost,0\n")
    with pytest.raises(UnknownBirdInLabels):
        load_corpus(trips, labels)


def test_labels_value_validation():
    with pytest.raises(OutOfRange):
        parse_labels("bird_id,label\nb1,2\n")
    with pytest.raises(MalformedRow):
        parse_labels("bird_id,label\nb1,x\n")
    assert parse_labels("bird_id,label\nb1,1\nb0,0\n") == {"b0": 0, "b1": 1}


def test_corpus_save_load_round_trip(tmp_path):
    t1 = parse_trajectory("b1", TWO_ROWS)
    corpus = Corpus(trajectories={"b1": t1}, labels={"b1": 1})
    save_corpus(corpus, tmp_path / "trips", tmp_path / "labels.csv")
    loaded = load_corpus(tmp_path / "trips", tmp_path / "labels.csv")
    assert loaded.bird_ids == ["b1"]
    assert loaded["b1"] == t1
    assert loaded.labels == {"b1": 1}


def test_corpus_at_paper_scale():
    # 631 birds, 326 labeled 1 and 305 labeled 0
    t = parse_trajectory("x", TWO_ROWS)
    ids = [f"bird_{i:04d}" for i in range(631)]
    labels = {b: (1 if i < 326 else 0) for i, b in enumerate(ids)}
    corpus = Corpus(trajectories={b: t for b in ids}, labels=labels)
    assert len(corpus) == 631
    assert sum(corpus.labels.values()) == 326
    assert sum(1 for v in corpus.labels.values() if v == 0) == 305


def test_filter_daytime_keeps_timestamps():
    from tests.conftest import make_traj

    traj = make_traj(
        longitude=[1.0, 2.0, 3.0, 4.0],
        daytime=[1, 0, 1, 0],
        elapsed=[0.0, 60.0, 120.0, 180.0],
    )
    day = traj.filter_daytime(1)
    assert list(day.elapsed) == [0.0, 120.0]
    assert len(traj.filter_daytime(0)) == 2
