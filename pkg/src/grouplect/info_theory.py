"""Discretization and plug-in estimators of entropy and (conditional) mutual information.

All quantities are in bits.  Joint distributions are tabulated only over the
cells actually observed: code tuples are folded into a single integer key,
re-compressed whenever the key space would overflow, and counted with
``np.unique``.
"""
from __future__ import annotations

import threading
from typing import Iterable, Sequence

import numpy as np

from .data_model import Dataset

DEFAULT_BINS = 5
_KEY_LIMIT = 2 ** 62


class DiscretizedView:
    """Integer-coded columns (features first, then labels) with per-column arity.

    Instances are immutable.  Joint entropies are memoised per column set; the
    cache is guarded by a lock so a view can be shared between threads.
    """

    def __init__(self, codes: np.ndarray, arity: Sequence[int], origin: Sequence[str],
                 names: Sequence[str]):
        codes = np.ascontiguousarray(codes, dtype=np.int64)
        if codes.ndim != 2:
            raise ValueError("codes must be 2-D (rows x columns)")
        arity = np.asarray(arity, dtype=np.int64)
        if len(arity) != codes.shape[1] or len(origin) != codes.shape[1]:
            raise ValueError("arity/origin length must match the column count")
        if codes.size and ((codes < 0).any() or (codes >= arity).any()):
            raise ValueError("codes must lie in [0, arity)")
        for c, o in enumerate(origin):
            if o == "label" and arity[c] > 2:
                raise ValueError("label columns must have arity <= 2")
        codes.flags.writeable = False
        arity.flags.writeable = False
        self.codes = codes
        self.arity = arity
        self.origin = tuple(origin)
        self.names = tuple(names)
        self._cache: dict[frozenset, float] = {}
        self._lock = threading.Lock()

    @property
    def n(self) -> int:
        return self.codes.shape[0]

    @property
    def feature_cols(self) -> list[int]:
        return [c for c, o in enumerate(self.origin) if o == "feature"]

    @property
    def label_cols(self) -> list[int]:
        return [c for c, o in enumerate(self.origin) if o == "label"]

    def with_columns(self, codes: np.ndarray, origin: str, names: Sequence[str]
                     ) -> "DiscretizedView":
        """A new view with extra columns appended; this view is left untouched."""
        codes = np.asarray(codes, dtype=np.int64).reshape(self.n, -1)
        arity = [int(c.max()) + 1 if len(c) else 1 for c in codes.T]
        view = DiscretizedView(
            np.hstack([self.codes, codes]),
            np.concatenate([self.arity, arity]),
            self.origin + (origin,) * codes.shape[1],
            self.names + tuple(names),
        )
        with self._lock:
            view._cache.update(self._cache)
        return view

    def joint_entropy(self, cols: Iterable[int]) -> float:
        key = frozenset(int(c) for c in cols)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        value = entropy_of_codes(self.codes[:, sorted(key)], self.arity[sorted(key)])
        with self._lock:
            self._cache[key] = value
        return value


def _encode_column(x: np.ndarray, bins: int) -> np.ndarray:
    uniq, inverse = np.unique(x, return_inverse=True)
    if len(uniq) <= bins:
        return inverse.astype(np.int64)
    # code = floor(bins * #values strictly below / n): ties always share a code
    counts = np.bincount(inverse, minlength=len(uniq))
    below = np.concatenate(([0], np.cumsum(counts)[:-1]))
    raw = (below * bins) // len(x)
    _, dense = np.unique(raw, return_inverse=True)
    return dense[inverse].astype(np.int64)


def discretize(d: Dataset, bins: int = DEFAULT_BINS) -> DiscretizedView:
    """Equal-frequency binning of features into at most ``bins`` codes; labels pass through."""
    if bins < 2:
        raise ValueError("bins must be >= 2")
    cols = [_encode_column(d.features[:, j], bins) for j in range(d.p)]
    cols += [d.labels[:, l].astype(np.int64) for l in range(d.q)]
    codes = np.column_stack(cols)
    arity = [max(int(c.max()) + 1, 1) for c in cols[:d.p]] + [2] * d.q
    origin = ["feature"] * d.p + ["label"] * d.q
    return DiscretizedView(codes, arity, origin, d.feature_names + d.label_names)


def entropy_of_codes(codes: np.ndarray, arity: Sequence[int] | None = None) -> float:
    """Plug-in joint entropy (bits) of the rows of an integer code matrix."""
    codes = np.asarray(codes, dtype=np.int64)
    if codes.ndim == 1:
        codes = codes[:, None]
    n, m = codes.shape
    if n == 0 or m == 0:
        return 0.0
    if arity is None:
        arity = codes.max(axis=0) + 1
    key = np.zeros(n, dtype=np.int64)
    span = 1
    for c in range(m):
        a = max(int(arity[c]), 1)
        if span * a >= _KEY_LIMIT:
            _, key = np.unique(key, return_inverse=True)
            key = key.astype(np.int64)
            span = int(key.max()) + 1
        key = key * a + codes[:, c]
        span *= a
    _, counts = np.unique(key, return_counts=True)
    p = counts / n
    h = float(-(p * np.log2(p)).sum())
    return h if h > 0.0 else 0.0


def _as_set(cols) -> frozenset:
    if isinstance(cols, (int, np.integer)):
        return frozenset((int(cols),))
    return frozenset(int(c) for c in cols)


def entropy(view: DiscretizedView, cols) -> float:
    cols = _as_set(cols)
    if not cols:
        raise ValueError("entropy needs at least one column")
    return view.joint_entropy(cols)


def _h(view, cols: frozenset) -> float:
    return view.joint_entropy(cols) if cols else 0.0


def mutual_information(view: DiscretizedView, A, B) -> float:
    A, B = _as_set(A), _as_set(B)
    if not A or not B:
        raise ValueError("mutual_information needs nonempty column sets")
    if A & B:
        raise ValueError("column sets must be disjoint")
    mi = _h(view, A) + _h(view, B) - _h(view, A | B)
    return mi if mi > 0.0 else 0.0


def conditional_mi(view: DiscretizedView, A, B, C=()) -> float:
    A, B, C = _as_set(A), _as_set(B), _as_set(C)
    if not A or not B:
        raise ValueError("conditional_mi needs nonempty A and B")
    if A & B or A & C or B & C:
        raise ValueError("column sets must be pairwise disjoint")
    if not C:
        return mutual_information(view, A, B)
    cmi = _h(view, A | C) + _h(view, B | C) - _h(view, A | B | C) - _h(view, C)
    return cmi if cmi > 0.0 else 0.0


def interaction_information(view: DiscretizedView, label: int, k: int, j: int) -> float:
    """Conditional minus marginal MI of ``k`` with ``label``; negative means redundancy."""
    if len({int(label), int(k), int(j)}) != 3:
        raise ValueError("label, k and j must be distinct columns")
    return conditional_mi(view, k, label, j) - mutual_information(view, k, label)
