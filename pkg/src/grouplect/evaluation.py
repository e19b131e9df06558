"""Multi-label k-nearest-neighbour classifier and multi-label metrics."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.stats import rankdata

from .data_model import Dataset, GroupStructure, subset_cost

METRIC_NAMES = ("hamming_loss", "ranking_loss", "coverage_error", "zero_one_loss",
                "subset_accuracy", "micro_f1", "micro_auc")


@dataclass(frozen=True)
class MlknnModel:
    k: int
    s: float
    subset: tuple[int, ...]
    prior: np.ndarray          # (q,)
    cond_pos: np.ndarray       # (q, k+1): P(count | label relevant)
    cond_neg: np.ndarray       # (q, k+1): P(count | label irrelevant)
    mean: np.ndarray
    scale: np.ndarray
    train_X: np.ndarray = field(repr=False)   # standardized selected columns
    train_Y: np.ndarray = field(repr=False)


def _neighbours(query: np.ndarray, ref: np.ndarray, k: int, exclude_self: bool = False,
                chunk: int = 512) -> np.ndarray:
    """Indices of the ``k`` nearest rows of ``ref``; ties resolved by lower row index."""
    out = np.empty((len(query), k), dtype=np.int64)
    ref_sq = (ref ** 2).sum(axis=1)
    for start in range(0, len(query), chunk):
        Q = query[start:start + chunk]
        d = (Q ** 2).sum(axis=1)[:, None] + ref_sq[None, :] - 2.0 * Q @ ref.T
        np.maximum(d, 0.0, out=d)
        if exclude_self:
            rows = np.arange(len(Q))
            d[rows, start + rows] = np.inf
        # every row tied with the k-th smallest distance stays in contention
        kth = np.partition(d, k - 1, axis=1)[:, k - 1]
        for i in range(len(Q)):
            cand = np.flatnonzero(d[i] <= kth[i])
            order = np.lexsort((cand, d[i, cand]))
            out[start + i] = cand[order[:k]]
    return out


def fit_mlknn(train: Dataset, S, k: int = 10, s: float = 1.0) -> MlknnModel:
    """Fit ML-kNN on the columns ``S`` of ``train`` (Euclidean on z-scores, self excluded)."""
    S = tuple(int(j) for j in S)
    if not S:
        raise ValueError("feature subset must be nonempty")
    n = train.n
    if not 1 <= k < n:
        raise ValueError(f"need 1 <= k < n_train (k={k}, n={n})")
    if s < 0:
        raise ValueError("smoothing must be nonnegative")
    X = train.features[:, list(S)]
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale[scale == 0] = 1.0
    Z = (X - mean) / scale
    Y = train.labels.astype(np.int64)
    q = Y.shape[1]
    prior = (s + Y.sum(axis=0)) / (2 * s + n)
    nn = _neighbours(Z, Z, k, exclude_self=True)
    counts = Y[nn].sum(axis=1)                        # (n, q)
    cond_pos = np.empty((q, k + 1))
    cond_neg = np.empty((q, k + 1))
    for l in range(q):
        pos = np.bincount(counts[Y[:, l] == 1, l], minlength=k + 1)
        neg = np.bincount(counts[Y[:, l] == 0, l], minlength=k + 1)
        cond_pos[l] = _smooth(pos, s, k)
        cond_neg[l] = _smooth(neg, s, k)
    return MlknnModel(k, float(s), S, prior, cond_pos, cond_neg, mean, scale, Z, Y)


def _smooth(hist: np.ndarray, s: float, k: int) -> np.ndarray:
    denom = s * (k + 1) + hist.sum()
    if denom == 0:
        return np.full(k + 1, 1.0 / (k + 1))
    return (s + hist) / denom


def predict(model: MlknnModel, instances) -> tuple[np.ndarray, np.ndarray]:
    """Posterior relevance scores and 0/1 decisions (score >= 0.5).

    ``instances`` is either a :class:`Dataset` (the model's columns are taken
    from it) or an array whose columns already match the model's subset.
    """
    if isinstance(instances, Dataset):
        X = instances.features[:, list(model.subset)]
    else:
        X = np.asarray(instances, dtype=float)
        if X.ndim != 2 or X.shape[1] != len(model.subset):
            raise ValueError(
                f"expected {len(model.subset)} columns, got shape {X.shape}")
    Z = (X - model.mean) / model.scale
    nn = _neighbours(Z, model.train_X, model.k)
    counts = model.train_Y[nn].sum(axis=1)
    q = model.train_Y.shape[1]
    cols = np.arange(q)
    pos = model.prior * model.cond_pos[cols, counts]
    neg = (1 - model.prior) * model.cond_neg[cols, counts]
    total = pos + neg
    with np.errstate(invalid="ignore", divide="ignore"):
        scores = np.where(total > 0, pos / total, 0.5)
    return scores, (scores >= 0.5).astype(np.int8)


@dataclass
class EvalReport:
    hamming_loss: float
    ranking_loss: float
    coverage_error: float
    zero_one_loss: float
    subset_accuracy: float
    micro_f1: float
    micro_auc: float
    subset: tuple[str, ...] = ()
    total_cost: float = 0.0
    ranking_rows_skipped: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("ranking_rows_skipped")
        d["subset"] = list(self.subset)
        return d


def compute_metrics(truth, scores, decisions) -> EvalReport:
    """The seven multi-label metrics.

    Rows without both a positive and a negative label are left out of the
    ranking loss (their number is kept in ``ranking_rows_skipped``); rows
    without a positive are left out of the coverage error.  Score ties count
    one half in both ranking loss and micro AUC.
    """
    T = np.asarray(truth).astype(np.int64)
    P = np.asarray(scores, dtype=float)
    D = np.asarray(decisions).astype(np.int64)
    if T.shape != P.shape or T.shape != D.shape or T.ndim != 2:
        raise ValueError(f"shape mismatch: {T.shape}, {P.shape}, {D.shape}")
    n, q = T.shape

    hamming = float((T != D).mean())
    zero_one = float((T != D).any(axis=1).mean())

    rank_losses, coverages = [], []
    for t, s in zip(T, P):
        pos, neg = s[t == 1], s[t == 0]
        if len(pos):
            # depth of the worst-ranked positive, ties counted against us
            coverages.append(int((s >= pos.min()).sum()))
        if len(pos) and len(neg):
            wrong = (pos[:, None] < neg[None, :]).sum() + 0.5 * (pos[:, None] == neg[None, :]).sum()
            rank_losses.append(wrong / (len(pos) * len(neg)))
    ranking = float(np.mean(rank_losses)) if rank_losses else 0.0
    coverage = float(np.mean(coverages)) if coverages else float("nan")

    tp = int(((D == 1) & (T == 1)).sum())
    fp = int(((D == 1) & (T == 0)).sum())
    fn = int(((D == 0) & (T == 1)).sum())
    micro_f1 = 1.0 if tp + fp + fn == 0 else 2 * tp / (2 * tp + fp + fn)

    flat_t, flat_s = T.ravel(), P.ravel()
    n_pos = int(flat_t.sum())
    n_neg = flat_t.size - n_pos
    if n_pos and n_neg:
        ranks = rankdata(flat_s)
        auc = (ranks[flat_t == 1].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)
    else:
        auc = float("nan")

    return EvalReport(
        hamming_loss=hamming,
        ranking_loss=ranking,
        coverage_error=coverage,
        zero_one_loss=zero_one,
        subset_accuracy=1.0 - zero_one,
        micro_f1=float(micro_f1),
        micro_auc=float(auc),
        ranking_rows_skipped=n - len(rank_losses),
    )


def evaluate_subset(train: Dataset, valid: Dataset, S, g: GroupStructure,
                    k: int = 10, s: float = 1.0) -> EvalReport:
    model = fit_mlknn(train, S, k, s)
    scores, decisions = predict(model, valid)
    report = compute_metrics(valid.labels, scores, decisions)
    report.subset = tuple(train.feature_names[j] for j in model.subset)
    report.total_cost = subset_cost(model.subset, g)
    return report
