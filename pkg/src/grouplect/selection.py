"""Budgeted selection: penalized forward selection, the two-phase shadow method, brute force."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .data_model import (
    Budget,
    GroupStructure,
    SelectionTrace,
    Step,
    incremental_cost,
    subset_cost,
    zero_cost_pool,
)
from .info_theory import DiscretizedView, mutual_information
from .scoring import ScoreConfig, make_shadow_pool, max_shadow_score, score_candidate

BUDGET_MODES = ("affordable_only", "paper_strict")
STOP_MODES = ("first_shadow_win", "fraction_of_wins")


@dataclass(frozen=True)
class SelectionConfig:
    budget: float = math.inf
    score_cfg: ScoreConfig = field(default_factory=ScoreConfig)
    lam: float = 0.0
    budget_mode: str = "affordable_only"
    stop_mode: str = "first_shadow_win"
    stop_fraction: float = 0.05
    shadow_seed: int = 0

    def __post_init__(self):
        if isinstance(self.budget, Budget):
            object.__setattr__(self, "budget", self.budget.value)
        Budget(self.budget)
        if not self.lam >= 0:
            raise ValueError("lambda must be nonnegative")
        if self.budget_mode not in BUDGET_MODES:
            raise ValueError(f"budget_mode must be one of {BUDGET_MODES}")
        if self.stop_mode not in STOP_MODES:
            raise ValueError(f"stop_mode must be one of {STOP_MODES}")
        if self.stop_mode == "fraction_of_wins" and not 0 < self.stop_fraction <= 1:
            raise ValueError("stop_fraction must lie in (0, 1]")


def _argmax(scores: dict[int, float]) -> int:
    # strictly greater wins; equal scores go to the lowest index
    best = None
    for k in sorted(scores):
        if best is None or scores[k] > scores[best]:
            best = k
    return best


def _check_view(view: DiscretizedView, g: GroupStructure) -> list[int]:
    feats = view.feature_cols
    if feats != list(range(g.n_features)):
        raise ValueError("view features do not match the group structure")
    return view.label_cols


def _forward(view, g, cfg: SelectionConfig, lam: float, budget_mode: str
             ) -> SelectionTrace:
    Y = _check_view(view, g)
    trace = SelectionTrace()
    S: list[int] = []
    cost = 0.0
    while True:
        candidates = [k for k in range(g.n_features) if k not in S]
        if not candidates:
            trace.stop_reason = "pool_exhausted"
            return trace
        relevance = {k: score_candidate(view, k, S, Y, cfg.score_cfg) for k in candidates}
        extra = {k: incremental_cost(k, S, g) for k in candidates}
        k = _argmax({k: relevance[k] - lam * extra[k] for k in candidates})
        if budget_mode == "affordable_only" and cost + extra[k] > cfg.budget:
            trace.stop_reason = "budget_exhausted"
            return trace
        S.append(k)
        cost = subset_cost(S, g)
        trace.steps.append(Step(k, 1, relevance[k], None, cost))
        if budget_mode == "paper_strict" and cost > cfg.budget:
            trace.stop_reason = "infeasible"
            return trace


def sfs_penalized(view: DiscretizedView, g: GroupStructure, cfg: SelectionConfig
                  ) -> SelectionTrace:
    """Greedy forward selection maximizing relevance minus ``lam`` times incremental cost.

    ``affordable_only`` stops before the first argmax that would exceed the
    budget.  ``paper_strict`` always adds the argmax and stops once the cost
    exceeds the budget, in which case the run is reported as infeasible.
    """
    return _forward(view, g, cfg, cfg.lam, cfg.budget_mode)


def lambda_max(view: DiscretizedView, g: GroupStructure,
               score_cfg: ScoreConfig = ScoreConfig()) -> float:
    """Smallest penalty (times 1 + 1e-6) forcing the first pick into a cheapest group."""
    distinct = sorted(set(g.costs))
    if len(distinct) < 2:
        return 0.0
    gap = min(b - a for a, b in zip(distinct, distinct[1:]))
    Y = _check_view(view, g)
    r = [score_candidate(view, k, [], Y, score_cfg) for k in range(g.n_features)]
    spread = max(r) - min(r)
    if spread <= 0.0:
        # equal relevances: any positive penalty orders by cost
        return 1e-6 / gap
    return spread / gap * (1 + 1e-6)


def proposed_select(view: DiscretizedView, g: GroupStructure, cfg: SelectionConfig
                    ) -> SelectionTrace:
    """Cost-blind forward selection within budget, then shadow-stopped free additions.

    Phase 1 runs unpenalized forward selection that never exceeds the budget.
    Phase 2 considers the features made free by phase 1 (unselected members
    of already paid groups) and adds them greedily, each conditioned on
    everything selected so far.  Before each addition the best candidate is
    compared with the best shadow of the remaining free features; a shadow
    scoring strictly higher ends the run (``first_shadow_win``) or counts as
    a win towards ``ceil(stop_fraction * |pool|)`` (``fraction_of_wins``).
    """
    Y = _check_view(view, g)
    trace = _forward(view, g, cfg, 0.0, "affordable_only")
    S1 = trace.selected
    U = zero_cost_pool(S1, g)
    if not U:
        trace.stop_reason = "pool_exhausted"
        return trace
    pool = make_shadow_pool(view, U, cfg.shadow_seed)
    needed = math.ceil(cfg.stop_fraction * len(U))
    wins = 0
    S = list(S1)
    cost = subset_cost(S, g)
    remaining = list(U)
    while remaining:
        relevance = {k: score_candidate(view, k, S, Y, cfg.score_cfg) for k in remaining}
        k = _argmax(relevance)
        shadow = max_shadow_score(pool, remaining, S, Y, cfg.score_cfg)
        if shadow > relevance[k]:
            wins += 1
            if cfg.stop_mode == "first_shadow_win" or wins >= needed:
                trace.stop_reason = "shadow_stop"
                return trace
        S.append(k)
        remaining.remove(k)
        trace.steps.append(Step(k, 2, relevance[k], shadow, cost))
    trace.stop_reason = "pool_exhausted"
    return trace


def joint_relevance(view: DiscretizedView, S) -> float:
    """Plug-in MI between the whole label vector and the features in ``S`` (0 for empty S)."""
    S = list(S)
    if not S:
        return 0.0
    return mutual_information(view, S, view.label_cols)


def exhaustive_oracle(view: DiscretizedView, g: GroupStructure, budget, max_p: int = 15
                      ) -> tuple[int, ...]:
    """Best affordable subset by brute force; ties go to smaller, then lexicographically first sets."""
    B = budget.value if isinstance(budget, Budget) else Budget(budget).value
    _check_view(view, g)
    p = g.n_features
    if p > max_p:
        raise ValueError(f"exhaustive search refused: p={p} exceeds max_p={max_p}")
    best, best_mi = (), 0.0
    for size in range(1, p + 1):
        for S in combinations(range(p), size):
            if subset_cost(S, g) > B:
                continue
            mi = joint_relevance(view, S)
            if mi > best_mi + 1e-12:
                best, best_mi = S, mi
    return best
