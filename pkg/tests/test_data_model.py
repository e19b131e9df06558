import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from grouplect import (
    Dataset,
    GroupStructure,
    IngestionError,
    generate_illustrative,
    incremental_cost,
    load_dataset,
    load_groups,
    subset_cost,
    train_valid_split,
    zero_cost_pool,
)

# costs of the NBP and UN groups in the MIMIC feature-group table
MIMIC_LIKE = GroupStructure(((0, 1, 2), (3, 4, 5, 6), (7, 8)), (3.0, 12.0, 5.0),
                            ("NBP", "UN", "G5"))


def test_subset_cost_examples():
    assert subset_cost([], MIMIC_LIKE) == 0.0
    assert subset_cost([0, 3, 4], MIMIC_LIKE) == 15.0
    assert subset_cost([7, 8], MIMIC_LIKE) == 5.0


def test_subset_cost_rejects_bad_index():
    with pytest.raises(ValueError):
        subset_cost([9], MIMIC_LIKE)


def test_incremental_cost_examples():
    assert incremental_cost(1, [0], MIMIC_LIKE) == 0.0
    assert incremental_cost(3, [0], MIMIC_LIKE) == 12.0
    with pytest.raises(ValueError):
        incremental_cost(0, [0], MIMIC_LIKE)


def test_zero_cost_pool_examples(illustrative):
    _, g = illustrative
    assert zero_cost_pool([], g) == []
    assert zero_cost_pool([0], g) == [1, 2]
    assert zero_cost_pool(range(5), g) == []


subsets = st.sets(st.integers(0, 8))


@given(subsets, subsets)
def test_subset_cost_monotone(a, b):
    assert subset_cost(a, MIMIC_LIKE) <= subset_cost(a | b, MIMIC_LIKE)


@given(subsets, st.integers(0, 8))
def test_incremental_cost_telescopes(S, k):
    S.discard(k)
    inc = incremental_cost(k, S, MIMIC_LIKE)
    assert inc in (0.0, MIMIC_LIKE.cost_of_feature(k))
    assert inc == subset_cost(S | {k}, MIMIC_LIKE) - subset_cost(S, MIMIC_LIKE)


@given(subsets)
def test_zero_cost_pool_members_are_free(S):
    U = zero_cost_pool(S, MIMIC_LIKE)
    assert not set(U) & S
    assert all(incremental_cost(j, S, MIMIC_LIKE) == 0.0 for j in U)


@pytest.mark.parametrize("groups,costs", [
    (((0, 1), (1, 2)), (1.0, 1.0)),     # overlap
    (((0, 2),), (1.0,)),                # does not cover 1
    (((0, 1), (2,)), (1.0, -1.0)),      # negative cost
    (((0, 1, 2), ()), (1.0, 1.0)),      # empty group
])
def test_group_structure_invariants(groups, costs):
    with pytest.raises(ValueError):
        GroupStructure(groups, costs)
    # a valid partition of three features builds fine
    GroupStructure(((0, 1), (2,)), (1.0, 0.0))


def test_dataset_invariants():
    with pytest.raises(ValueError, match="non-binary"):
        Dataset(np.zeros((2, 1)), np.array([[2], [0]]), ("a",), ("y",))
    with pytest.raises(ValueError, match="row count"):
        Dataset(np.zeros((2, 1)), np.zeros((3, 1)), ("a",), ("y",))
    with pytest.raises(ValueError, match="duplicate"):
        Dataset(np.zeros((2, 2)), np.zeros((2, 1)), ("a", "a"), ("y",))


def test_illustrative_structure_and_determinism():
    d1, g = generate_illustrative(300, 0.2, seed=3)
    d2, _ = generate_illustrative(300, 0.2, seed=3)
    assert g.costs == (1.0, 1.0, 1.0)
    assert g.groups == ((0, 1, 2), (3,), (4,))
    assert d1.feature_names == ("X1", "X2", "X3", "X4", "X5")
    assert np.array_equal(d1.features, d2.features)
    assert np.array_equal(d1.labels, d2.labels)


def test_illustrative_rho_zero_copies():
    d, _ = generate_illustrative(500, 0.0, seed=1)
    assert np.array_equal(d.features[:, 1], d.features[:, 3])
    assert np.array_equal(d.features[:, 2], d.features[:, 4])


def test_illustrative_corruption_level():
    # shuffling a fraction rho of entries leaves a correlation of about 1 - rho
    d, _ = generate_illustrative(100_000, 0.2, seed=5)
    r24 = np.corrcoef(d.features[:, 1], d.features[:, 3])[0, 1]
    r35 = np.corrcoef(d.features[:, 2], d.features[:, 4])[0, 1]
    assert abs(r24 - 0.8) < 0.05
    assert abs(r35 - 0.8) < 0.05
    # the two corrupted columns use independent row subsets
    changed2 = d.features[:, 1] != d.features[:, 3]
    changed3 = d.features[:, 2] != d.features[:, 4]
    assert not np.array_equal(changed2, changed3)


def test_illustrative_label_signal():
    d, _ = generate_illustrative(20_000, 0.2, seed=2)
    X, Y = d.features, d.labels
    assert Y[X[:, 0] > 1, 0].mean() > 0.9
    assert Y[X[:, 3] > 1, 1].mean() > 0.85
    assert 0.6 < Y[X[:, 4] > 1, 2].mean() < 0.85


def _write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def test_load_dataset_roundtrip(tmp_path):
    f = _write(tmp_path, "f.csv", "a,b\n1,2.5\n3,4\n5,6\n7,8e-1\n")
    l = _write(tmp_path, "l.csv", "y1,y2\n0,1\n1,1\n0,0\n1,0\n")
    d = load_dataset(f, l)
    assert (d.n, d.p, d.q) == (4, 2, 2)
    assert d.features[3, 1] == 0.8


def test_load_dataset_errors(tmp_path):
    f = _write(tmp_path, "f.csv", "a,b\n1,2\n3,4\n")
    with pytest.raises(IngestionError, match="non-binary label"):
        load_dataset(f, _write(tmp_path, "l.csv", "y\n0\n2\n"))
    with pytest.raises(IngestionError, match="row count mismatch"):
        load_dataset(f, _write(tmp_path, "l2.csv", "y\n0\n1\n1\n"))
    with pytest.raises(IngestionError, match="duplicate"):
        load_dataset(_write(tmp_path, "f2.csv", "a,a\n1,2\n3,4\n"),
                     _write(tmp_path, "l3.csv", "y\n0\n1\n"))
    with pytest.raises(IngestionError, match=r"l4.csv:3"):
        load_dataset(f, _write(tmp_path, "l4.csv", "y\n0\nyes\n"))


@pytest.fixture
def three_features(tmp_path):
    f = _write(tmp_path, "f.csv", "f1,f2,f3\n1,2,3\n4,5,6\n")
    l = _write(tmp_path, "l.csv", "y\n0\n1\n")
    return load_dataset(f, l)


def test_load_groups(tmp_path, three_features):
    m = _write(tmp_path, "g.json", json.dumps([
        {"name": "A", "cost": 1, "features": ["f1", "f2"]},
        {"name": "B", "cost": 2.5, "features": ["f3"]}]))
    g = load_groups(m, three_features)
    assert g.groups == ((0, 1), (2,))
    assert g.costs == (1.0, 2.5)
    assert g.names == ("A", "B")


@pytest.mark.parametrize("manifest,message", [
    ([{"name": "A", "cost": 1, "features": ["f1", "f2"]}], "uncovered feature"),
    ([{"name": "A", "cost": -1, "features": ["f1", "f2", "f3"]}], "negative cost"),
    ([{"name": "A", "cost": 1, "features": ["f1", "zz", "f2", "f3"]}], "unknown feature"),
    ([{"name": "A", "cost": 1, "features": ["f1", "f2"]},
      {"name": "B", "cost": 1, "features": ["f2", "f3"]}], "in two groups"),
])
def test_load_groups_errors(tmp_path, three_features, manifest, message):
    m = _write(tmp_path, "g.json", json.dumps(manifest))
    with pytest.raises(IngestionError, match=message):
        load_groups(m, three_features)


def test_split_sizes_and_determinism():
    d, _ = generate_illustrative(10, 0.2, seed=0)
    tr, va = train_valid_split(d, 0.8, seed=4)
    assert (tr.n, va.n) == (8, 2)
    tr2, va2 = train_valid_split(d, 0.8, seed=4)
    assert np.array_equal(tr.features, tr2.features)
    rows = np.vstack([tr.features, va.features])
    assert sorted(map(tuple, rows)) == sorted(map(tuple, d.features))


def test_split_seeds_differ():
    d, _ = generate_illustrative(40, 0.2, seed=0)
    differs = 0
    for s in range(20):
        a, _ = train_valid_split(d, 0.8, seed=s)
        b, _ = train_valid_split(d, 0.8, seed=s + 100)
        differs += not np.array_equal(a.features, b.features)
    assert differs >= 19


def test_split_rejects_empty_part():
    d, _ = generate_illustrative(3, 0.2, seed=0)
    with pytest.raises(ValueError):
        train_valid_split(d, 0.2, seed=0)
    with pytest.raises(ValueError):
        train_valid_split(d, 1.0, seed=0)
