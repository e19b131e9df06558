"""Datasets, group cost structure, synthetic data and ingestion."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


class IngestionError(ValueError):
    """Raised when an input file violates the documented format."""


@dataclass(frozen=True)
class Dataset:
    """Real-valued feature matrix paired with a binary label matrix."""

    features: np.ndarray
    labels: np.ndarray
    feature_names: tuple[str, ...]
    label_names: tuple[str, ...]

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        Y = np.asarray(self.labels)
        if X.ndim != 2 or Y.ndim != 2:
            raise ValueError("features and labels must be 2-D")
        if X.shape[0] < 1 or X.shape[1] < 1 or Y.shape[1] < 1:
            raise ValueError("dataset needs n >= 1, p >= 1, q >= 1")
        if X.shape[0] != Y.shape[0]:
            raise ValueError("row count mismatch between features and labels")
        if not np.isin(Y, (0, 1)).all():
            raise ValueError("non-binary label")
        names = tuple(str(s) for s in self.feature_names)
        lnames = tuple(str(s) for s in self.label_names)
        if len(names) != X.shape[1] or len(lnames) != Y.shape[1]:
            raise ValueError("name count does not match column count")
        if len(set(names)) != len(names) or len(set(lnames)) != len(lnames):
            raise ValueError("duplicate column name")
        X = X.copy()
        Y = Y.astype(np.int8)
        X.flags.writeable = False
        Y.flags.writeable = False
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", Y)
        object.__setattr__(self, "feature_names", names)
        object.__setattr__(self, "label_names", lnames)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    @property
    def q(self) -> int:
        return self.labels.shape[1]

    def take_rows(self, rows) -> "Dataset":
        rows = np.asarray(rows, dtype=int)
        return Dataset(self.features[rows], self.labels[rows],
                       self.feature_names, self.label_names)


@dataclass(frozen=True)
class GroupStructure:
    """Partition of the feature indices into groups, one cost per group."""

    groups: tuple[tuple[int, ...], ...]
    costs: tuple[float, ...]
    names: tuple[str, ...] = ()
    group_of: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        groups = tuple(tuple(int(j) for j in g) for g in self.groups)
        costs = tuple(float(c) for c in self.costs)
        if len(groups) != len(costs):
            raise ValueError("one cost per group required")
        if any(len(g) == 0 for g in groups):
            raise ValueError("empty group")
        if any(not math.isfinite(c) or c < 0 for c in costs):
            raise ValueError("negative cost")
        flat = [j for g in groups for j in g]
        p = len(flat)
        if len(set(flat)) != p:
            raise ValueError("groups overlap")
        if sorted(flat) != list(range(p)):
            raise ValueError("groups must partition feature indices 0..p-1")
        names = tuple(self.names) or tuple(f"G{k + 1}" for k in range(len(groups)))
        if len(names) != len(groups):
            raise ValueError("one name per group required")
        owner = np.empty(p, dtype=int)
        for k, g in enumerate(groups):
            owner[list(g)] = k
        owner.flags.writeable = False
        object.__setattr__(self, "groups", groups)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "group_of", owner)

    @property
    def n_features(self) -> int:
        return len(self.group_of)

    def cost_of_feature(self, k: int) -> float:
        return self.costs[self.group_of[k]]

    def total_cost(self) -> float:
        return float(sum(self.costs))


@dataclass(frozen=True)
class Budget:
    value: float

    def __post_init__(self):
        if not self.value >= 0:
            raise ValueError("budget must be nonnegative")


@dataclass(frozen=True)
class Step:
    feature: int
    phase: int
    score: float
    shadow_max: float | None
    cum_cost: float


STOP_REASONS = ("budget_exhausted", "shadow_stop", "pool_exhausted", "infeasible")


@dataclass
class SelectionTrace:
    """Ordered record of one selection run."""

    steps: list[Step] = field(default_factory=list)
    stop_reason: str = "pool_exhausted"

    @property
    def selected(self) -> list[int]:
        return [s.feature for s in self.steps]

    @property
    def total_cost(self) -> float:
        return self.steps[-1].cum_cost if self.steps else 0.0

    @property
    def feasible(self) -> bool:
        return self.stop_reason != "infeasible"

    def to_dict(self, feature_names: Sequence[str]) -> dict:
        def num(x):
            if x is None or not math.isfinite(x):
                return None
            return float(x)

        return {
            "steps": [
                {"feature": feature_names[s.feature], "phase": s.phase,
                 "score": num(s.score), "shadow_max": num(s.shadow_max),
                 "cum_cost": float(s.cum_cost)}
                for s in self.steps
            ],
            "stop_reason": self.stop_reason,
            "selected": [feature_names[j] for j in self.selected],
            "total_cost": float(self.total_cost),
        }


def _check_indices(S: Iterable[int], g: GroupStructure) -> list[int]:
    S = [int(j) for j in S]
    p = g.n_features
    for j in S:
        if not 0 <= j < p:
            raise ValueError(f"feature index {j} out of range for p={p}")
    return S


def subset_cost(S: Iterable[int], g: GroupStructure) -> float:
    """Sum of the costs of every group touched by ``S``; each group is paid once."""
    S = _check_indices(S, g)
    touched = {int(g.group_of[j]) for j in S}
    return float(sum(g.costs[k] for k in sorted(touched)))


def incremental_cost(k: int, S: Iterable[int], g: GroupStructure) -> float:
    S = set(_check_indices(S, g))
    (k,) = _check_indices([k], g)
    if k in S:
        raise ValueError(f"feature {k} is already selected")
    grp = g.group_of[k]
    if any(g.group_of[j] == grp for j in S):
        return 0.0
    return g.costs[grp]


def zero_cost_pool(S: Iterable[int], g: GroupStructure) -> list[int]:
    """Unselected features whose group has already been paid for."""
    S = set(_check_indices(S, g))
    opened = {int(g.group_of[j]) for j in S}
    return [j for j in range(g.n_features)
            if j not in S and int(g.group_of[j]) in opened]


def _sigmoid(s):
    return 1.0 / (1.0 + np.exp(-s))


def generate_illustrative(n: int, rho: float = 0.2, seed: int = 0
                          ) -> tuple[Dataset, GroupStructure]:
    """Five-feature, three-label synthetic problem with one cheap redundant group.

    X1..X5 are standard normal; Y1, Y2, Y3 are Bernoulli with success
    probabilities sigmoid(3 X1), sigmoid(2 X4) and sigmoid(X5).  X2 and X3 are
    then overwritten with copies of X4 and X5 in which ``round(rho * n)``
    randomly chosen entries are shuffled among themselves (independently for
    each column).  Groups are {X1, X2, X3}, {X4}, {X5}, each of cost 1.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0.0 <= rho <= 1.0:
        raise ValueError("rho must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, 5))
    u = rng.random((n, 3))
    Y = np.column_stack([
        u[:, 0] < _sigmoid(3.0 * X[:, 0]),
        u[:, 1] < _sigmoid(2.0 * X[:, 3]),
        u[:, 2] < _sigmoid(X[:, 4]),
    ]).astype(np.int8)
    m = int(math.floor(rho * n + 0.5))
    for dst, src in ((1, 3), (2, 4)):
        col = X[:, src].copy()
        rows = np.sort(rng.choice(n, size=m, replace=False))
        col[rows] = col[rows[rng.permutation(m)]]
        X[:, dst] = col
    data = Dataset(X, Y, tuple(f"X{i}" for i in range(1, 6)),
                   tuple(f"Y{i}" for i in range(1, 4)))
    groups = GroupStructure(((0, 1, 2), (3,), (4,)), (1.0, 1.0, 1.0),
                            ("G1", "G2", "G3"))
    return data, groups


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            try:
                header = next(reader)
            except StopIteration:
                raise IngestionError(f"{path}: empty file (header row required)") from None
            rows = []
            for row in reader:
                if not row:
                    continue
                if len(row) != len(header):
                    raise IngestionError(
                        f"{path}:{reader.line_num}: expected {len(header)} cells, got {len(row)}")
                rows.append(row)
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror or exc}") from exc
    header = [h.strip() for h in header]
    seen = set()
    for h in header:
        if h in seen:
            raise IngestionError(f"{path}:1: duplicate column name {h!r}")
        seen.add(h)
    return header, rows


def load_dataset(features_path, labels_path) -> Dataset:
    fnames, frows = _read_csv(features_path)
    lnames, lrows = _read_csv(labels_path)
    if len(frows) != len(lrows):
        raise IngestionError(
            f"row count mismatch: {features_path} has {len(frows)} rows, "
            f"{labels_path} has {len(lrows)}")
    if not frows:
        raise IngestionError(f"{features_path}: no data rows")
    X = np.empty((len(frows), len(fnames)))
    for i, row in enumerate(frows):
        try:
            X[i] = [float(c) for c in row]
        except ValueError:
            raise IngestionError(f"{features_path}:{i + 2}: non-numeric feature value") from None
    Y = np.empty((len(lrows), len(lnames)), dtype=np.int8)
    for i, row in enumerate(lrows):
        for j, c in enumerate(row):
            c = c.strip()
            if c not in ("0", "1"):
                raise IngestionError(
                    f"{labels_path}:{i + 2}: non-binary label {c!r} in column {lnames[j]!r}")
            Y[i, j] = int(c)
    return Dataset(X, Y, tuple(fnames), tuple(lnames))


def load_groups(manifest_path, dataset: Dataset) -> GroupStructure:
    """Read a JSON group manifest ``[{"name", "cost", "features"}, ...]``."""
    path = Path(manifest_path)
    try:
        entries = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise IngestionError(f"{path}: {exc.strerror or exc}") from exc
    except json.JSONDecodeError as exc:
        raise IngestionError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from exc
    if not isinstance(entries, list):
        raise IngestionError(f"{path}: manifest must be a JSON array")
    index = {name: j for j, name in enumerate(dataset.feature_names)}
    owner: dict[str, str] = {}
    groups, costs, names = [], [], []
    for entry in entries:
        if not isinstance(entry, dict) or not {"name", "cost", "features"} <= entry.keys():
            raise IngestionError(f"{path}: each group needs name, cost and features")
        gname = str(entry["name"])
        cost = entry["cost"]
        if isinstance(cost, bool) or not isinstance(cost, (int, float)):
            raise IngestionError(f"{path}: group {gname!r}: cost must be a number")
        if cost < 0:
            raise IngestionError(f"{path}: group {gname!r}: negative cost {cost}")
        members = []
        for f in entry["features"]:
            if f not in index:
                raise IngestionError(f"{path}: group {gname!r}: unknown feature {f!r}")
            if f in owner:
                raise IngestionError(
                    f"{path}: feature {f!r} in two groups ({owner[f]!r}, {gname!r})")
            owner[f] = gname
            members.append(index[f])
        if not members:
            raise IngestionError(f"{path}: group {gname!r} is empty")
        groups.append(tuple(sorted(members)))
        costs.append(float(cost))
        names.append(gname)
    missing = [f for f in dataset.feature_names if f not in owner]
    if missing:
        raise IngestionError(f"{path}: uncovered feature(s): {', '.join(missing)}")
    return GroupStructure(tuple(groups), tuple(costs), tuple(names))


def train_valid_split(d: Dataset, train_fraction: float = 0.8, seed: int = 0
                      ) -> tuple[Dataset, Dataset]:
    """Random row split; the training part gets ``floor(n * train_fraction)`` rows."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie in (0, 1)")
    n_train = int(math.floor(d.n * train_fraction))
    if n_train < 1 or n_train >= d.n:
        raise ValueError(
            f"train_fraction={train_fraction} leaves an empty part for n={d.n}")
    perm = np.random.default_rng(seed).permutation(d.n)
    return d.take_rows(np.sort(perm[:n_train])), d.take_rows(np.sort(perm[n_train:]))
