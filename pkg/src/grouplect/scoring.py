"""Candidate score functions and the shadow-feature pool."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from .info_theory import DiscretizedView, conditional_mi, mutual_information

CRITERIA = ("lower_bound_sum", "full_cmi")


@dataclass(frozen=True)
class ScoreConfig:
    """How a candidate feature is scored against the labels.

    ``full_cmi`` is the plug-in conditional mutual information between the
    candidate and the whole label vector given every selected feature.
    ``lower_bound_sum`` replaces it by low-order terms: subsets of at most
    ``feature_order`` features (the candidate plus one selected partner when
    the order is 2) against label subsets of size ``label_order``.
    """

    feature_order: int = 2
    label_order: int = 1
    criterion: str = "lower_bound_sum"

    def __post_init__(self):
        if self.feature_order not in (1, 2):
            raise ValueError("feature_order must be 1 or 2")
        if self.label_order not in (1, 2):
            raise ValueError("label_order must be 1 or 2")
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}")


def _label_blocks(Y: Sequence[int], order: int) -> list[tuple[int, ...]]:
    Y = list(Y)
    if order == 1:
        return [(l,) for l in Y]
    if len(Y) < order:
        return [tuple(Y)]
    return list(combinations(Y, order))


def score_candidate(view: DiscretizedView, k: int, S: Iterable[int], Y: Sequence[int],
                    cfg: ScoreConfig = ScoreConfig()) -> float:
    S = [int(j) for j in S]
    if k in S:
        raise ValueError(f"candidate {k} is already in the selected set")
    if cfg.criterion == "full_cmi":
        return conditional_mi(view, [k], Y, S)
    blocks = _label_blocks(Y, cfg.label_order)
    if cfg.feature_order == 1 or not S:
        return float(sum(mutual_information(view, [k], L) for L in blocks))
    return float(sum(conditional_mi(view, [k], L, [j]) for L in blocks for j in S))


@dataclass(frozen=True)
class ShadowPool:
    """Permuted copies of pooled feature columns, appended to a copy of the view.

    ``view`` holds the original columns plus one shadow column per source;
    ``shadow_of[j]`` is the column index of the shadow of feature column ``j``.
    """

    view: DiscretizedView
    sources: tuple[int, ...]
    shadow_of: dict
    seed: int


def make_shadow_pool(view: DiscretizedView, U: Iterable[int], seed: int = 0) -> ShadowPool:
    U = sorted(int(j) for j in U)
    if not U:
        raise ValueError("shadow pool needs at least one source feature")
    shadows = []
    for j in U:
        rng = np.random.default_rng([int(seed), j])
        shadows.append(view.codes[rng.permutation(view.n), j])
    base = view.codes.shape[1]
    names = [f"shadow({view.names[j]})" for j in U]
    augmented = view.with_columns(np.column_stack(shadows), "shadow", names)
    return ShadowPool(augmented, tuple(U), {j: base + i for i, j in enumerate(U)}, int(seed))


def max_shadow_score(pool: ShadowPool, remaining: Iterable[int], S: Iterable[int],
                     Y: Sequence[int], cfg: ScoreConfig = ScoreConfig()) -> float:
    """Best score among the shadows of ``remaining``; ``-inf`` when there are none."""
    S = list(S)
    best = float("-inf")
    for j in sorted(remaining):
        if j not in pool.shadow_of:
            raise ValueError(f"feature {j} has no shadow in this pool")
        best = max(best, score_candidate(pool.view, pool.shadow_of[j], S, Y, cfg))
    return best
