"""Command-line driver.

    kahler-fedosov models [--model-file FILE]
    kahler-fedosov star F G [--model M] [--weight N] [--level K] [--order R]
    kahler-fedosov verify [--model M] [--weight N] [--level K] [--suite S]
    kahler-fedosov act OPERATOR SECTION [--model M] [--sign +|-] [--level K]

Exit codes: 0 success, 1 a verification check failed, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from .coeff import ExprError, GaussianRational, render
from .geom import BUILTIN_MODELS, ChartError, KahlerChart, HolomorphicChart, builtin_model, load_model, model_source
from .verify import SUITES, RunConfig, build_report, render_report, run_suite


class UsageError(Exception):
    pass


def _positive_weight(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 2:
        raise argparse.ArgumentTypeError("the weight cap must be at least 2")
    return value


def _level(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value == 0:
        raise argparse.ArgumentTypeError("the level must be nonzero")
    return value


def _add_model_args(p: argparse.ArgumentParser, weight: bool = True):
    p.add_argument("--model", default=None, help=f"built-in model ({', '.join(BUILTIN_MODELS)}); default cp1")
    p.add_argument("--model-file", default=None, help="JSON model description")
    if weight:
        p.add_argument("--weight", type=_positive_weight, default=6, help="weight cap N (default 6)")
    p.add_argument("--format", choices=("text", "json"), default="text")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kahler-fedosov", description="Exact Fedosov quantization on Kahler charts.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("models", help="list built-in models, or validate a model file")
    p.add_argument("--model-file", default=None)
    p.add_argument("--format", choices=("text", "json"), default="text")

    p = sub.add_parser("star", help="coefficients of the star product of two functions")
    p.add_argument("f")
    p.add_argument("g")
    _add_model_args(p)
    p.add_argument("--level", type=_level, default=None, help="also sum the series at hbar = i/k")
    p.add_argument("--order", type=int, default=None, help="highest hbar order wanted (default: all the cap allows)")

    p = sub.add_parser("verify", help="run the verification suite")
    _add_model_args(p)
    p.add_argument("--level", type=_level, default=None)
    p.add_argument("--suite", choices=SUITES, default="all")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default: one per suite group)")

    p = sub.add_parser("act", help="apply a quantizable operator to a holomorphic section")
    p.add_argument("operator", help="f:<holomorphic expression> or xi:<components separated by ','>")
    p.add_argument("section", help="holomorphic frame coefficient")
    _add_model_args(p)
    p.add_argument("--sign", choices=("+", "-"), default="+")
    p.add_argument("--level", type=_level, default=1)
    return parser


# ================================================================ model resolution

def model_description(args) -> dict:
    if args.model and args.model_file:
        raise UsageError("give either --model or --model-file, not both")
    if args.model_file:
        try:
            with open(args.model_file, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read model file: {exc}")
        try:
            source = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"model file is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}")
        load_model(source)
        return source
    name = args.model or "cp1"
    if name not in BUILTIN_MODELS:
        raise UsageError(f"unknown model {name!r}; built-ins are {', '.join(BUILTIN_MODELS)}")
    return model_source(name)


def _chart(source: dict):
    name = source.get("name")
    if name in BUILTIN_MODELS and source == model_source(name):
        return builtin_model(name)
    return load_model(source)


def _emit(args, payload: dict, text: str):
    if args.format == "json":
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        sys.stdout.write(text)


# ================================================================ commands

def cmd_models(args) -> int:
    if args.model_file:
        args.model = None
        source = model_description(args)
        chart = load_model(source)
        info = {"name": source.get("name", "user-model"), "mode": source["mode"], "n": source["n"], "valid": True,
                "kind": type(chart).__name__}
        _emit(args, info, f"{info['name']}: valid {info['mode']} model, n={info['n']}\n")
        return 0
    listing = [model_source(name) for name in BUILTIN_MODELS]
    lines = [f"{m['name']}: {m['mode']} n={m['n']} omega={m['omega']}" for m in listing]
    _emit(args, {"models": listing}, "\n".join(lines) + "\n")
    return 0


def cmd_star(args) -> int:
    from .fedosov import fedosov_holomorphic, fedosov_kahler, fedosov_real, hbar_at_level, star
    source = model_description(args)
    chart = _chart(source)
    ring = chart.ring
    f, g = ring.parse(args.f), ring.parse(args.g)
    N = args.weight
    available = N // 2
    order = available if args.order is None else args.order
    if order > available:
        sys.stderr.write(f"warning: cap {N} only determines orders up to hbar^{available}; "
                         f"raise --weight to {2 * order} for hbar^{order}\n")
        order = available
    if isinstance(chart, KahlerChart):
        F = fedosov_kahler(chart, N)
    elif isinstance(chart, HolomorphicChart):
        F = fedosov_holomorphic(chart, N=N)
    else:
        F = fedosov_real(chart, N=N)
    coeffs = star(f, g, F)[:order + 1]
    payload = {"model": source.get("name", "user-model"), "cap": N, "f": args.f, "g": args.g,
               "coefficients": [{"order": r, "value": render(c)} for r, c in enumerate(coeffs)]}
    lines = [f"C_{r} = {render(c)}" for r, c in enumerate(coeffs)]
    if args.level is not None:
        h = ring.const(hbar_at_level(GaussianRational(args.level)))
        total = ring.zero
        for r, c in enumerate(coeffs):
            total = total + c * h ** r
        payload["level"] = args.level
        payload["truncated-value"] = render(total)
        lines.append(f"sum at hbar = i/{args.level} through hbar^{order}: {render(total)}")
    _emit(args, payload, "\n".join(lines) + "\n")
    return 0


def cmd_verify(args) -> int:
    source = model_description(args)
    cfg = RunConfig(source, weight=args.weight, level=args.level, suite=args.suite)
    if args.weight < 4:
        sys.stderr.write(f"warning: cap {args.weight} is below 4; checks are flagged low-cap\n")
    results = run_suite(cfg, jobs=args.jobs)
    report = build_report(cfg, results)
    sys.stdout.write(render_report(report, args.format))
    return 0 if all(r.passed for r in results) else 1


def parse_operator(text: str, bundle):
    """f:<expr> or xi:<c1,c2,...> as a quantizable element of the bundle."""
    from .modact import quantizable_function, quantizable_xi
    kind, sep, body = text.partition(":")
    if not sep or kind not in ("f", "xi"):
        raise UsageError(f"operator must be f:<expr> or xi:<expr>, got {text!r}")
    chart = bundle.chart
    if kind == "f":
        f = chart.ring.parse(body)
        if not chart.is_holomorphic(f):
            raise UsageError("the function of an f: operator must be holomorphic")
        return quantizable_function(f, bundle)
    parts = [p.strip() for p in body.split(",")]
    if len(parts) != chart.n:
        raise UsageError(f"a vector field on this chart needs {chart.n} components")
    return quantizable_xi(tuple(parts), bundle)


def cmd_act(args) -> int:
    from .modact import LineBundle, module_connection, tdo_apply
    source = model_description(args)
    chart = _chart(source)
    if not isinstance(chart, KahlerChart):
        raise UsageError("actions need a Kahler model")
    F = module_connection(chart, args.weight)
    bundle = LineBundle(F, args.level, args.sign)
    Q = parse_operator(args.operator, bundle)
    s0 = chart.ring.parse(args.section)
    if not chart.is_holomorphic(s0):
        raise UsageError("the section must be holomorphic")
    result = tdo_apply(Q, s0, bundle)
    payload = {"model": source.get("name", "user-model"), "sign": args.sign, "level": args.level,
               "operator": args.operator, "section": args.section, "result": render(result)}
    _emit(args, payload, render(result) + "\n")
    return 0


COMMANDS = {"models": cmd_models, "star": cmd_star, "verify": cmd_verify, "act": cmd_act}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code == 0 else 2
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ChartError, ExprError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
