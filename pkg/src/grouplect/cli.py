"""Command-line front end.

Exit codes: 0 success, 1 bad input, 2 configuration error, 3 infeasible
selection under ``--budget-mode paper-strict``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import statistics
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .data_model import (
    Dataset,
    GroupStructure,
    IngestionError,
    generate_illustrative,
    load_dataset,
    load_groups,
    subset_cost,
    train_valid_split,
)
from .evaluation import METRIC_NAMES, evaluate_subset
from .info_theory import DEFAULT_BINS, discretize
from .scoring import ScoreConfig
from .selection import (
    SelectionConfig,
    exhaustive_oracle,
    joint_relevance,
    lambda_max,
    proposed_select,
    sfs_penalized,
)

EXIT_OK, EXIT_INPUT, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3
ORACLE_MAX_P = 15
SWEEP_METHODS = ("proposed", "traditional", "sfs-lmax", "sfs-half-lmax")


class ConfigError(ValueError):
    pass


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with tmp.open("w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False, allow_nan=False) + "\n"


def _clean(x):
    """JSON-safe float: non-finite values become null."""
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def _seed(args) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get("GROUPLECT_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ConfigError(f"GROUPLECT_SEED must be an integer, got {env!r}") from None


def _manifest(args, command: str, inputs: dict, config: dict) -> dict:
    return {
        "tool": "grouplect",
        "version": __version__,
        "command": command,
        "inputs": inputs,
        "config": config,
    }


def _score_cfg(args) -> ScoreConfig:
    try:
        return ScoreConfig(args.order_a, args.order_b, args.criterion.replace("-", "_"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _selection_cfg(args, budget: float, lam: float, seed: int) -> SelectionConfig:
    try:
        return SelectionConfig(
            budget=budget,
            score_cfg=_score_cfg(args),
            lam=lam,
            budget_mode=args.budget_mode.replace("-", "_"),
            stop_mode={"first-shadow-win": "first_shadow_win",
                       "fraction": "fraction_of_wins"}[args.stop_mode],
            stop_fraction=args.stop_fraction,
            shadow_seed=seed,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def _common_config(args, seed: int) -> dict:
    return {
        "budget_mode": args.budget_mode,
        "stop_mode": args.stop_mode,
        "stop_fraction": args.stop_fraction,
        "bins": args.bins,
        "criterion": args.criterion,
        "order_a": args.order_a,
        "order_b": args.order_b,
        "seed": seed,
    }


def _load(args) -> tuple[Dataset, GroupStructure]:
    for flag in ("features", "labels", "groups"):
        if getattr(args, flag) is None:
            raise ConfigError(f"--{flag} is required")
    data = load_dataset(args.features, args.labels)
    return data, load_groups(args.groups, data)


def _inputs(args) -> dict:
    return {"features": args.features, "labels": args.labels, "groups": args.groups}


def _run_method(method: str, view, groups, args, budget: float, seed: int, lmax=None):
    if method == "proposed":
        return proposed_select(view, groups, _selection_cfg(args, budget, 0.0, seed))
    if method == "traditional":
        return sfs_penalized(view, groups, _selection_cfg(args, budget, 0.0, seed))
    if lmax is None:
        lmax = lambda_max(view, groups, _score_cfg(args))
    factor = {"sfs-lmax": 1.0, "sfs-half-lmax": 0.5}[method]
    return sfs_penalized(view, groups, _selection_cfg(args, budget, factor * lmax, seed))


# -- commands -----------------------------------------------------------------

def cmd_synth(args) -> int:
    seed = _seed(args)
    if args.n < 1 or not 0 <= args.rho <= 1:
        raise ConfigError("need --n >= 1 and 0 <= --rho <= 1")
    data, groups = generate_illustrative(args.n, args.rho, seed)
    out = Path(args.out)
    feat = io.StringIO()
    w = csv.writer(feat, lineterminator="\n")
    w.writerow(data.feature_names)
    w.writerows([[repr(float(v)) for v in row] for row in data.features])
    lab = io.StringIO()
    w = csv.writer(lab, lineterminator="\n")
    w.writerow(data.label_names)
    w.writerows([[int(v) for v in row] for row in data.labels])
    manifest = [
        {"name": name, "cost": cost, "features": [data.feature_names[j] for j in g]}
        for name, cost, g in zip(groups.names, groups.costs, groups.groups)
    ]
    _write_atomic(out / "features.csv", feat.getvalue())
    _write_atomic(out / "labels.csv", lab.getvalue())
    _write_atomic(out / "groups.json", _dump(manifest))
    _write_atomic(out / "manifest.json", _dump(_manifest(
        args, "synth", {}, {"n": args.n, "rho": args.rho, "seed": seed})))
    print(f"wrote {out / 'features.csv'}, {out / 'labels.csv'}, {out / 'groups.json'}")
    return EXIT_OK


def _step_table(trace, names) -> str:
    lines = []
    chosen: list[str] = []
    for i, step in enumerate(trace.steps, 1):
        chosen.append(names[step.feature])
        shadow = "" if step.shadow_max is None else f"  shadow_max={step.shadow_max:.4f}"
        lines.append(f"Step = {i}  phase {step.phase}  {{{', '.join(chosen)}}}  "
                     f"score={step.score:.4f}  cost={step.cum_cost:g}{shadow}")
    lines.append(f"stop: {trace.stop_reason}")
    return "\n".join(lines)


def cmd_select(args) -> int:
    seed = _seed(args)
    if args.budget is None:
        raise ConfigError("--budget is required")
    data, groups = _load(args)
    view = discretize(data, args.bins)
    lam = args.lam
    if args.method == "proposed":
        lam = 0.0
    elif args.lambda_max:
        lam = lambda_max(view, groups, _score_cfg(args))
    trace = (proposed_select if args.method == "proposed" else sfs_penalized)(
        view, groups, _selection_cfg(args, args.budget, lam, seed))
    config = _common_config(args, seed)
    config.update({"method": args.method, "budget": args.budget, "lambda": lam,
                   "lambda_max_flag": bool(args.lambda_max)})
    doc = trace.to_dict(data.feature_names)
    doc["manifest"] = _manifest(args, "select", _inputs(args), config)
    _write_atomic(Path(args.out), _dump(doc))
    print(_step_table(trace, data.feature_names))
    return EXIT_INFEASIBLE if trace.stop_reason == "infeasible" else EXIT_OK


def cmd_evaluate(args) -> int:
    seed = _seed(args)
    data, groups = _load(args)
    names = [s.strip() for s in args.subset.split(",") if s.strip()]
    index = {n: j for j, n in enumerate(data.feature_names)}
    unknown = [n for n in names if n not in index]
    if unknown or not names:
        raise ConfigError(f"bad --subset (unknown: {unknown})" if unknown else "empty --subset")
    train, valid = train_valid_split(data, args.train_fraction, seed)
    report = evaluate_subset(train, valid, [index[n] for n in names], groups,
                             args.knn_k, args.knn_s)
    doc = {k: _clean(v) for k, v in report.to_dict().items()}
    config = {"subset": names, "train_fraction": args.train_fraction,
              "knn_k": args.knn_k, "knn_s": args.knn_s, "seed": seed}
    doc["manifest"] = _manifest(args, "evaluate", _inputs(args), config)
    _write_atomic(Path(args.out), _dump(doc))
    print(", ".join(f"{m}={doc[m]}" for m in METRIC_NAMES))
    return EXIT_OK


def _sweep_repeat(args, data, groups, budgets, methods, seed, r):
    train, valid = train_valid_split(data, args.train_fraction, seed + r)
    view = discretize(train, args.bins)
    lmax = None
    if any(m.startswith("sfs-") for m in methods):
        lmax = lambda_max(view, groups, _score_cfg(args))
    rows = []
    for budget in budgets:
        for method in methods:
            key = (budget, method, r)
            try:
                trace = _run_method(method, view, groups, args, budget, seed + r, lmax)
                if trace.stop_reason == "infeasible":
                    status, report = "infeasible", None
                elif not trace.selected:
                    status, report = "empty_selection", None
                else:
                    report = evaluate_subset(train, valid, trace.selected, groups,
                                             args.knn_k, args.knn_s)
                    status = "ok"
            except (ValueError, ArithmeticError) as exc:
                status, report = f"error: {exc}", None
            for metric in METRIC_NAMES + ("total_cost", "n_selected"):
                if report is None:
                    value = ""
                elif metric == "n_selected":
                    value = len(report.subset)
                else:
                    v = getattr(report, metric)
                    value = repr(float(v)) if math.isfinite(v) else ""
                rows.append(key + (metric, value, status))
    return rows


def cmd_sweep(args) -> int:
    seed = _seed(args)
    budgets = [float(b) for b in args.budgets.split(",") if b.strip()]
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    if not budgets:
        raise ConfigError("--budgets must list at least one budget")
    bad = [m for m in methods if m not in SWEEP_METHODS]
    if bad or not methods:
        raise ConfigError(f"--methods must be drawn from {SWEEP_METHODS}")
    if args.repeats < 1:
        raise ConfigError("--repeats must be >= 1")
    _selection_cfg(args, 0.0, 0.0, seed)
    data, groups = _load(args)

    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        chunks = list(pool.map(
            lambda r: _sweep_repeat(args, data, groups, budgets, methods, seed, r),
            range(args.repeats)))
    order = {m: i for i, m in enumerate(methods)}
    rows = sorted((row for chunk in chunks for row in chunk),
                  key=lambda t: (t[0], order[t[1]], t[2], t[3]))

    long = io.StringIO()
    w = csv.writer(long, lineterminator="\n")
    w.writerow(["budget", "method", "repeat", "metric", "value", "status"])
    w.writerows([(repr(b), m, r, metric, v, s) for b, m, r, metric, v, s in rows])

    cells: dict[tuple, list[float]] = {}
    for b, m, r, metric, v, s in rows:
        vals = cells.setdefault((b, m, metric), [])
        if s == "ok" and v != "":
            vals.append(float(v))
    summary = io.StringIO()
    w = csv.writer(summary, lineterminator="\n")
    w.writerow(["budget", "method", "metric", "mean", "sd", "n_ok"])
    for (b, m, metric), vals in sorted(cells.items(), key=lambda kv: (kv[0][0], order[kv[0][1]])):
        mean = repr(statistics.fmean(vals)) if vals else ""
        sd = repr(statistics.stdev(vals)) if len(vals) > 1 else ("0.0" if vals else "")
        w.writerow([repr(b), m, metric, mean, sd, len(vals)])

    config = _common_config(args, seed)
    config.update({"budgets": budgets, "methods": methods, "repeats": args.repeats,
                   "train_fraction": args.train_fraction, "knn_k": args.knn_k,
                   "knn_s": args.knn_s})
    out = Path(args.out)
    _write_atomic(out / "metrics.csv", long.getvalue())
    _write_atomic(out / "summary.csv", summary.getvalue())
    _write_atomic(out / "manifest.json", _dump(_manifest(args, "sweep", _inputs(args), config)))
    print(f"wrote {out / 'metrics.csv'} ({len(rows)} rows) and {out / 'summary.csv'}")
    return EXIT_OK


def cmd_oracle(args) -> int:
    seed = _seed(args)
    if args.budget is None:
        raise ConfigError("--budget is required")
    data, groups = _load(args)
    if data.p > ORACLE_MAX_P:
        raise ConfigError(
            f"refusing exhaustive search over p={data.p} features (limit {ORACLE_MAX_P})")
    view = discretize(data, args.bins)
    best = exhaustive_oracle(view, groups, args.budget, ORACLE_MAX_P)
    prop = proposed_select(view, groups, _selection_cfg(args, args.budget, 0.0, seed))
    trad = sfs_penalized(view, groups, _selection_cfg(args, args.budget, 0.0, seed))

    def entry(S):
        S = sorted(S)
        return {"selected": [data.feature_names[j] for j in S],
                "cost": subset_cost(S, groups),
                "mi": joint_relevance(view, S)}

    config = _common_config(args, seed)
    config["budget"] = args.budget
    doc = {"oracle": entry(best), "proposed": entry(prop.selected),
           "traditional": entry(trad.selected),
           "manifest": _manifest(args, "oracle", _inputs(args), config)}
    _write_atomic(Path(args.out), _dump(doc))
    print(f"oracle MI={doc['oracle']['mi']:.6f} {doc['oracle']['selected']}; "
          f"proposed MI={doc['proposed']['mi']:.6f}; traditional MI={doc['traditional']['mi']:.6f}")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _add_data_flags(p):
    p.add_argument("--features", help="features CSV (header row of feature names)")
    p.add_argument("--labels", help="labels CSV with 0/1 cells")
    p.add_argument("--groups", help="group manifest JSON")


def _add_selection_flags(p):
    p.add_argument("--budget-mode", choices=("affordable-only", "paper-strict"),
                   default="affordable-only")
    p.add_argument("--stop-mode", choices=("first-shadow-win", "fraction"),
                   default="first-shadow-win")
    p.add_argument("--stop-fraction", type=float, default=0.05)
    p.add_argument("--bins", type=int, default=DEFAULT_BINS)
    p.add_argument("--criterion", choices=("lower-bound-sum", "full-cmi"),
                   default="lower-bound-sum")
    p.add_argument("--order-a", type=int, default=2, help="feature-subset order")
    p.add_argument("--order-b", type=int, default=1, help="label-subset order")


def _add_knn_flags(p):
    p.add_argument("--knn-k", type=int, default=10)
    p.add_argument("--knn-s", type=float, default=1.0)
    p.add_argument("--train-fraction", type=float, default=0.8)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grouplect",
        description="Cost-constrained multi-label feature selection with feature groups.")
    parser.add_argument("--version", action="version", version=f"grouplect {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="write the five-feature illustrative dataset")
    p.add_argument("--n", type=int, default=5000)
    p.add_argument("--rho", type=float, default=0.2)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("select", help="run one selection and write trace JSON")
    _add_data_flags(p)
    _add_selection_flags(p)
    p.add_argument("--budget", type=float)
    p.add_argument("--method", choices=("proposed", "sfs"), default="proposed")
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--lambda-max", action="store_true",
                   help="use the penalty that puts cheapest groups first")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="trace.json")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("evaluate", help="ML-kNN metrics for a named feature subset")
    _add_data_flags(p)
    _add_knn_flags(p)
    p.add_argument("--subset", required=True, help="comma-separated feature names")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="report.json")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep", help="budgets x methods x repeated splits -> long CSV")
    _add_data_flags(p)
    _add_selection_flags(p)
    _add_knn_flags(p)
    p.add_argument("--budgets", required=True, help="comma-separated budgets")
    p.add_argument("--methods", default="proposed,traditional",
                   help=f"comma-separated subset of {','.join(SWEEP_METHODS)}")
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="sweep_out", help="output directory")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", help="exhaustive best subset within budget (p <= 15)")
    _add_data_flags(p)
    _add_selection_flags(p)
    p.add_argument("--budget", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default="oracle.json")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"grouplect: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestionError as exc:
        print(f"grouplect: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"grouplect: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"grouplect: invalid input: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
