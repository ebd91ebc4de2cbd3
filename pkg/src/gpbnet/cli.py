"""Command-line front end: structure learning and experiment protocols.

Outputs are machine-readable (JSON structures, long-form CSV tables) and
byte-identical across runs with the same configuration. Wall-clock timing
per phase goes to stderr so it never perturbs the output files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import experiments
from .dataset import load_delimited, standardize
from .errors import DataFormatError, GpbnetError, SchemaError
from .optimize import GpOptimizerConfig
from .scoring import (
    CONTINUOUS_METHODS,
    ScoreCache,
    ScoreConfig,
    Scorer,
    cache_get_or_compute,
)
from .scoring.base import FamilyKey
from .scoring.hybrid import HybridFit
from .scoring.kernel import KernelFit
from .scoring.linear_gaussian import LinearGaussianFit
from .search import SearchConfig, hill_climb

USAGE_EXIT = 2
FAILURE_EXIT = 1


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.12g}"
    return str(value)


def _write_rows(out, fieldnames, rows) -> None:
    text = io.StringIO()
    writer = csv.writer(text, lineterminator="\n")
    writer.writerow(fieldnames)
    for row in rows:
        writer.writerow([_fmt(row[f]) for f in fieldnames])
    _write_text(out, text.getvalue())


def _write_text(out, text: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)


def _parse_int_list(text: str) -> tuple[int, ...]:
    values: list[int] = []
    for piece in text.split(","):
        piece = piece.strip()
        if ".." in piece:
            lo, hi = piece.split("..", 1)
            values.extend(range(int(lo), int(hi) + 1))
        elif piece:
            values.append(int(piece))
    if not values:
        raise SchemaError(f"empty integer list {text!r}")
    return tuple(values)


def _parse_float_list(text: str) -> tuple[float, ...]:
    values = tuple(float(p) for p in text.split(",") if p.strip())
    if not values:
        raise SchemaError(f"empty float list {text!r}")
    return values


def _parse_name_list(text: str) -> tuple[str, ...]:
    values = tuple(p.strip() for p in text.split(",") if p.strip())
    if not values:
        raise SchemaError(f"empty list {text!r}")
    return values


def _parse_hints(text: str | None) -> dict:
    if not text:
        return {}
    hints = {}
    for piece in text.split(","):
        if "=" not in piece:
            raise SchemaError(f"bad schema hint {piece!r}; expected name=kind")
        name, kind = piece.split("=", 1)
        hints[name.strip()] = kind.strip()
    return hints


def _phase(name: str, started: float) -> None:
    print(f"phase={name} seconds={time.perf_counter() - started:.3f}", file=sys.stderr)


def _harness_config(args) -> experiments.HarnessConfig:
    scoring = ScoreConfig(gp=GpOptimizerConfig(seed=args.seed))
    search = SearchConfig(max_parents=args.max_parents, seed=args.seed)
    kwargs = {}
    if getattr(args, "m_train", None) is not None:
        kwargs["m_train"] = args.m_train
    if getattr(args, "m_test", None) is not None:
        kwargs["m_test"] = args.m_test
    return experiments.HarnessConfig(scoring=scoring, search=search, **kwargs)


def _load_standardized(args):
    data = load_delimited(args.input, _parse_hints(args.hints))
    return standardize(data)


def _describe_fit(fitted) -> str:
    from .covariance import Hyperparameters

    if isinstance(fitted, Hyperparameters):
        parts = [
            f"theta0={fitted.theta0:.6g}",
            f"theta1={fitted.theta1:.6g}",
        ]
        if fitted.theta2 is not None:
            parts.append(f"theta2={fitted.theta2:.6g}")
        parts.append(f"theta3={fitted.theta3:.6g}")
        if fitted.lengthscales:
            lams = ";".join(f"{v:.6g}" for v in fitted.lengthscales)
            parts.append(f"lengthscales={lams}")
        return " ".join(parts)
    if isinstance(fitted, KernelFit):
        return f"bandwidth={fitted.bandwidth:.6g}"
    if isinstance(fitted, LinearGaussianFit):
        coefs = ";".join(f"{v:.6g}" for v in fitted.coef_mean)
        return f"coef={coefs} a_n={fitted.a_n:.6g} b_n={fitted.b_n:.6g}"
    if isinstance(fitted, HybridFit):
        return f"hybrid over {len(fitted.parts)} configurations"
    return type(fitted).__name__


def cmd_learn(args) -> int:
    started = time.perf_counter()
    data_std, _ = _load_standardized(args)
    _phase("load", started)
    started = time.perf_counter()
    scorer = Scorer(args.scorer, ScoreConfig(gp=GpOptimizerConfig(seed=args.seed)))
    config = SearchConfig(max_parents=args.max_parents, seed=args.seed, restarts=args.restarts)
    cache = ScoreCache()
    dag, trace = hill_climb(data_std, scorer, config, cache)
    _phase("learn", started)
    started = time.perf_counter()
    bound = scorer.bind(data_std)
    names = data_std.names
    families = []
    for v in range(dag.n):
        fs = cache_get_or_compute(cache, FamilyKey.make(v, dag.parents_of(v)), bound)
        families.append(
            {
                "child": names[v],
                "parents": [names[p] for p in dag.parents_of(v)],
                "log_score": fs.log_score,
                "penalty": fs.penalty_applied,
            }
        )
    doc = {
        "command": "learn",
        "scorer": args.scorer,
        "max_parents": args.max_parents,
        "seed": args.seed,
        "variables": [
            {"name": c.name, "kind": c.kind, "arity": c.arity} for c in data_std.columns
        ],
        "edges": sorted([names[p], names[c]] for p, c in dag.edges),
        "families": families,
        "total_score": trace.final_total,
        "trace": {
            "initial_total": trace.initial_total,
            "moves": [
                {
                    "kind": r.move.kind,
                    "parent": names[r.move.parent],
                    "child": names[r.move.child],
                    "delta": r.delta,
                    "total": r.total,
                }
                for r in trace.records
            ],
        },
    }
    _write_text(args.out, json.dumps(doc, indent=2, sort_keys=True) + "\n")
    _phase("write", started)
    return 0


def cmd_score(args) -> int:
    data_std, _ = _load_standardized(args)
    child = data_std.index_of(args.child)
    parents = tuple(data_std.index_of(p) for p in _parse_name_list(args.parents)) if args.parents else ()
    rows = []
    for method in _parse_name_list(args.scorer):
        scorer = Scorer(method, ScoreConfig(gp=GpOptimizerConfig(seed=args.seed)))
        fs = scorer.score(data_std, child, parents)
        rows.append(
            {
                "scorer": method,
                "child": args.child,
                "parents": ";".join(sorted(data_std.names[p] for p in parents)),
                "log_score": fs.log_score,
                "penalty": fs.penalty_applied,
                "fitted": _describe_fit(fs.fitted),
            }
        )
    _write_rows(args.out, ["scorer", "child", "parents", "log_score", "penalty", "fitted"], rows)
    return 0


def cmd_noise_sweep(args) -> int:
    started = time.perf_counter()
    rows = experiments.noise_sweep(
        functions=_parse_name_list(args.functions),
        noise_grid=_parse_float_list(args.noise_grid),
        seeds=_parse_int_list(args.seeds),
        method=args.scorer,
        config=_harness_config(args),
    )
    _phase("sweep", started)
    _write_rows(
        args.out,
        ["function", "noise", "model", "seed", "score", "test_log_loss", "error"],
        rows,
    )
    return 0


def cmd_model_comparison(args) -> int:
    started = time.perf_counter()
    rows = experiments.model_comparison(
        functions=_parse_name_list(args.functions),
        sizes=_parse_int_list(args.sizes),
        seeds=_parse_int_list(args.seeds),
        methods=_parse_name_list(args.scorer),
        noise=args.noise,
        config=_harness_config(args),
    )
    _phase("comparison", started)
    _write_rows(
        args.out,
        ["function", "size", "scorer", "seed", "dependent_loss", "independent_loss", "ratio", "error"],
        rows,
    )
    return 0


def cmd_structure_recovery(args) -> int:
    started = time.perf_counter()
    rows = experiments.structure_recovery(
        structures=_parse_name_list(args.structures),
        links=_parse_name_list(args.links),
        m_values=_parse_int_list(args.m_values),
        seeds=_parse_int_list(args.seeds),
        methods=_parse_name_list(args.scorer),
        noise=args.noise,
        config=_harness_config(args),
    )
    _phase("recovery", started)
    _write_rows(
        args.out,
        [
            "structure", "link", "m", "scorer", "seed",
            "missing", "extra", "misoriented", "arcs_true", "arcs_correct", "error",
        ],
        rows,
    )
    return 0


def cmd_benchmark(args) -> int:
    started = time.perf_counter()
    data = load_delimited(args.input, _parse_hints(args.hints))
    name = args.name or args.input
    rows = experiments.benchmark(
        data,
        name,
        sizes=_parse_int_list(args.sizes),
        test_count=args.test_count,
        seeds=_parse_int_list(args.seeds),
        methods=_parse_name_list(args.scorer),
        config=_harness_config(args),
    )
    _phase("benchmark", started)
    _write_rows(
        args.out,
        ["dataset", "size", "scorer", "seed", "mean_test_loglik", "n_edges", "error"],
        rows,
    )
    return 0


def cmd_predict_profile(args) -> int:
    data = load_delimited(args.input, _parse_hints(args.hints))
    rows = experiments.predict_profile(
        data,
        child=data.index_of(args.child),
        parent=data.index_of(args.parent),
        grid_size=args.grid_size,
        config=_harness_config(args),
    )
    _write_rows(args.out, ["u", "mean", "sd"], rows)
    return 0


def _add_common(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--seed", type=int, default=0, help="base RNG seed")
    sub.add_argument("--scorer", default="gp", help="scorer(s): gp, linear_gaussian, kernel")
    sub.add_argument("--max-parents", type=int, default=3)
    sub.add_argument("--out", default="-", help="output path ('-' for stdout)")
    sub.add_argument("--config", default=None, help="key=value config file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gpbnet",
        description="Bayesian network structure learning with GP family scores",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("learn", help="learn a structure from a delimited file")
    p.add_argument("--input", required=True)
    p.add_argument("--hints", default=None, help="name=kind[,name=kind...] schema hints")
    p.add_argument("--restarts", type=int, default=0)
    _add_common(p)
    p.set_defaults(handler=cmd_learn)

    p = subs.add_parser("score", help="score one family under selected scorers")
    p.add_argument("--input", required=True)
    p.add_argument("--hints", default=None)
    p.add_argument("--child", required=True)
    p.add_argument("--parents", default="", help="comma-separated parent names")
    _add_common(p)
    p.set_defaults(handler=cmd_score)

    p = subs.add_parser("noise-sweep", help="scores/log losses across noise levels")
    p.add_argument("--functions", default="linear,quadratic,cubic,sinusoidal")
    p.add_argument("--noise-grid", default="0.2,0.4,0.6,0.8,1.0,1.2,1.4,1.6")
    p.add_argument("--seeds", default="0..9")
    p.add_argument("--m-train", type=int, default=100)
    p.add_argument("--m-test", type=int, default=300)
    _add_common(p)
    p.set_defaults(handler=cmd_noise_sweep)

    p = subs.add_parser("model-comparison", help="dependent-vs-independent log-loss ratios")
    p.add_argument("--functions", default="linear,quadratic,cubic,sinusoidal")
    p.add_argument("--sizes", default="20,50,100")
    p.add_argument("--seeds", default="0..9")
    p.add_argument("--noise", type=float, default=0.4)
    p.add_argument("--m-test", type=int, default=300)
    _add_common(p)
    p.set_defaults(handler=cmd_model_comparison, scorer="gp,linear_gaussian,kernel")

    p = subs.add_parser("structure-recovery", help="three-variable recovery experiments")
    p.add_argument("--structures", default="chain")
    p.add_argument("--links", default="quadratic")
    p.add_argument("--m-values", default="100")
    p.add_argument("--seeds", default="0..19")
    p.add_argument("--noise", type=float, default=0.4)
    _add_common(p)
    p.set_defaults(handler=cmd_structure_recovery, scorer="gp,linear_gaussian,kernel")

    p = subs.add_parser("benchmark", help="learning curves on a delimited dataset")
    p.add_argument("--input", required=True)
    p.add_argument("--hints", default=None)
    p.add_argument("--name", default=None)
    p.add_argument("--sizes", default="20,50,100")
    p.add_argument("--test-count", type=int, default=100)
    p.add_argument("--seeds", default="0")
    _add_common(p)
    p.set_defaults(handler=cmd_benchmark, scorer="gp,linear_gaussian,kernel")

    p = subs.add_parser("predict-profile", help="1-D GP predictive mean/sd on a grid")
    p.add_argument("--input", required=True)
    p.add_argument("--hints", default=None)
    p.add_argument("--child", required=True)
    p.add_argument("--parent", required=True)
    p.add_argument("--grid-size", type=int, default=200)
    _add_common(p)
    p.set_defaults(handler=cmd_predict_profile)

    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv, args):
    """Re-parse with file values as defaults so explicit flags win."""
    entries = {}
    with open(args.config, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise SchemaError(f"{args.config}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            entries[key.replace("-", "_")] = value
    sub_actions = next(
        a for a in parser._actions if isinstance(a, argparse._SubParsersAction)
    )
    sub = sub_actions.choices[args.command]
    known = {
        a.dest: a for a in sub._actions if a.dest not in ("help", "handler", "command")
    }
    unknown = set(entries) - set(known)
    if unknown:
        raise SchemaError(f"unknown config keys: {sorted(unknown)}")
    defaults = {}
    for key, raw in entries.items():
        action = known[key]
        defaults[key] = action.type(raw) if action.type else raw
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "config", None):
            args = _apply_config_file(parser, argv, args)
    except SystemExit as exc:
        return USAGE_EXIT if exc.code else 0
    try:
        _validate_common(args)
        return args.handler(args)
    except (DataFormatError, SchemaError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_EXIT
    except GpbnetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return FAILURE_EXIT


def _validate_common(args) -> None:
    if args.max_parents < 1:
        raise SchemaError("--max-parents must be >= 1")
    for method in _parse_name_list(args.scorer):
        if method not in CONTINUOUS_METHODS:
            raise SchemaError(f"unknown scorer {method!r}")
    if getattr(args, "test_count", None) is not None and args.test_count < 1:
        raise SchemaError("--test-count must be >= 1")
    if getattr(args, "grid_size", None) is not None and args.grid_size < 2:
        raise SchemaError("--grid-size must be >= 2")


if __name__ == "__main__":
    sys.exit(main())
