"""Command-line entry point.

Exit codes: 0 when every check passes, 1 on a bound violation, 2 on a
usage or input error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .families import (
    TemplateError,
    TypeNParams,
    build_gen_g,
    build_type_n,
    gen_l_from_permutation,
    parse_template,
    parse_type_n_params,
    template_kind,
)
from .harness import BudgetExceeded, SweepSpec, brute_force_min_width, render_profile, report_emit, sweep_verify
from .morse import InvalidPresentation, ParseError, parse, serialize, thick_thin, width_direct
from .tangles import MoveError, format_trace
from .thinning import (
    HypothesisError,
    composite_reduction,
    gen_reduce,
    prop43_hypothesis,
    prop44_hypothesis,
    prop45_index,
    prop47_move,
    reduce_n_minus_1,
    reduce_n_minus_2,
    thin_params,
)

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2
STRATEGIES = ("auto", "lemma32", "lemma34", "composite", "prop47", "prop43", "prop44", "prop45")

log = logging.getLogger("thinwidth")


class UsageError(Exception):
    pass


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(x) for x in text.replace(",", " ").split()]
    except ValueError:
        raise UsageError(f"{what}: expected a comma-separated list of integers, got {text!r}") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from None


def _write(path: str, text: str) -> None:
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot write {path}: {e.strerror or e}") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        _write(out, text)
    else:
        sys.stdout.write(text)


def _load_presentation(args):
    if getattr(args, "template", False):
        d = parse_template(_read(args.file))
        return d.compile(), d
    return parse(_read(args.file)), None


# -- subcommands ------------------------------------------------------------------


def cmd_width(args) -> int:
    p, _ = _load_presentation(args)
    w = width_direct(p)
    print(f"width {w}")
    if p.is_knot:
        rep = thick_thin(p)
        print(f"thick {' '.join(map(str, rep.thick))}")
        print(f"thin {' '.join(map(str, rep.thin))}")
        print(f"lemma_total {rep.lemma_total}")
    return EXIT_OK


def cmd_construct(args) -> int:
    if args.params:
        d = parse_template(_read(args.params))
    elif args.family == "type-n":
        if not args.s:
            raise UsageError("construct --family type-n needs --params or --s")
        s = _ints(args.s, "--s")
        d = build_type_n(TypeNParams.uniform(s, args.slack))
    elif args.family == "gen-g":
        if not (args.s1 and args.s2):
            raise UsageError("construct --family gen-g needs --params or --s1 and --s2")
        s1, s2 = _ints(args.s1, "--s1"), _ints(args.s2, "--s2")
        d = build_gen_g(s1, s2, (args.slack,) * len(s1), (args.slack,) * len(s1))
    else:
        if not (args.s and args.order):
            raise UsageError("construct --family gen-l needs --params or --s and --order")
        s = _ints(args.s, "--s")
        d = gen_l_from_permutation(_ints(args.order, "--order"), TypeNParams.uniform(s, args.slack))
    p = d.compile()
    _emit(serialize(p), args.out)
    log.info("compiled %s with %d events, width %d", d.family, len(p), width_direct(p))
    return EXIT_OK


def _auto_gen(d):
    lay = d.layout
    s1, s2 = lay.s, lay.s2 if lay.s2 is not None else lay.s
    if prop43_hypothesis(s1, s2):
        return "prop43"
    if prop44_hypothesis(s1, s2):
        return "prop44"
    if prop45_index(s1, s2) is not None:
        return "prop45"
    raise HypothesisError(f"no generalized script applies to s1={s1}, s2={s2}")


def cmd_thin(args) -> int:
    text = _read(args.params)
    d = parse_template(text)
    kind = template_kind(text)
    strat = args.strategy
    if kind == "prop47":
        if strat not in ("auto", "prop47"):
            raise UsageError(f"strategy {strat} does not apply to a prop47 template")
        out = prop47_move(d)
    elif strat == "prop47":
        raise UsageError("strategy prop47 needs a prop47 template")
    elif kind == "gen-g" and strat in ("auto", "prop43", "prop44", "prop45"):
        out = gen_reduce(d, _auto_gen(d) if strat == "auto" else strat)
    elif kind != "type-n":
        raise UsageError(f"strategy {strat} needs a type-n template, got {kind}")
    else:
        params = parse_type_n_params(text)
        if strat == "auto":
            out = thin_params(params)
        elif strat == "lemma32":
            out = reduce_n_minus_1(params)
        elif strat == "lemma34":
            out = reduce_n_minus_2(params)
        elif strat == "composite":
            out = composite_reduction(params)
        else:
            raise UsageError(f"strategy {strat} needs a gen-g template")
    out.check()
    bound = "-" if out.bound is None else str(out.bound)
    verdict = "pass" if out.passed else "FAIL"
    print(
        f"hypothesis={out.hypothesis} holds={str(out.hypothesis_holds).lower()} "
        f"w_before={width_direct(out.before)} w_after={width_direct(out.after)} "
        f"delta={out.delta} bound={bound} {verdict}"
    )
    if args.trace:
        _write(args.trace, format_trace(out.trace, args.params, args.out or "-"))
    if args.out:
        _write(args.out, serialize(out.after))
    return EXIT_OK if out.passed else EXIT_VIOLATION


def cmd_verify(args) -> int:
    try:
        spec = SweepSpec.from_json(_read(args.sweep))
    except (ValueError, TypeError) as e:
        raise UsageError(f"bad sweep spec {args.sweep}: {e}") from None
    rows, summary = sweep_verify(spec)
    fmt = args.format or ("tsv" if str(args.out or "").endswith(".tsv") else "csv")
    if args.out:
        report_emit(rows, fmt, args.out)
    else:
        sys.stdout.write(report_emit(rows, fmt))
    for hyp in sorted(summary.per_hypothesis):
        ok, bad = summary.per_hypothesis[hyp]
        print(f"{hyp}: {ok} pass, {bad} fail", file=sys.stderr)
    print(f"{summary.total} instances, {summary.failures} failures", file=sys.stderr)
    return EXIT_OK if summary.ok else EXIT_VIOLATION


def cmd_oracle(args) -> int:
    p, d = _load_presentation(args)
    try:
        low = brute_force_min_width(p, diagram=d, budget=args.budget)
    except BudgetExceeded as e:
        raise UsageError(str(e)) from None
    print(f"width {width_direct(p)}")
    print(f"oracle_min {low}")
    return EXIT_OK


def cmd_render(args) -> int:
    p, _ = _load_presentation(args)
    sys.stdout.write(render_profile(p))
    return EXIT_OK


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="thinwidth", description="Width bookkeeping for Morse presentations of knots.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def with_file(name, help_):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("file")
        sp.add_argument("--template", action="store_true", help="read FILE as a template and compile it")
        return sp

    sp = with_file("width", "width and thick/thin levels of a presentation")
    sp.set_defaults(func=cmd_width)

    sp = sub.add_parser("construct", help="compile a template to a presentation")
    sp.add_argument("--family", choices=("type-n", "gen-g", "gen-l"), default="type-n")
    sp.add_argument("--params", help="template file")
    sp.add_argument("--s", help="bundle sizes, e.g. 3,3,3")
    sp.add_argument("--s1", help="gen-g: A-bundle sizes")
    sp.add_argument("--s2", help="gen-g: B-bundle sizes")
    sp.add_argument("--order", help="gen-l: level permutation, e.g. 2,1,3")
    sp.add_argument("--slack", type=int, default=0, help="extra min/max pairs per box")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_construct)

    sp = sub.add_parser("thin", help="run a thinning script on a template")
    sp.add_argument("--params", required=True, help="template file")
    sp.add_argument("--strategy", choices=STRATEGIES, default="auto")
    sp.add_argument("--trace", help="write the certified move trace here")
    sp.add_argument("--out", help="write the thinned presentation here")
    sp.set_defaults(func=cmd_thin)

    sp = sub.add_parser("verify", help="sweep a parameter grid and check every bound")
    sp.add_argument("--sweep", required=True, help="JSON sweep spec")
    sp.add_argument("--out")
    sp.add_argument("--format", choices=("csv", "tsv", "text"))
    sp.set_defaults(func=cmd_verify)

    sp = with_file("oracle", "least width over bundle-respecting reorderings")
    sp.add_argument("--budget", type=int, default=12)
    sp.set_defaults(func=cmd_oracle)

    sp = with_file("render", "text picture of the level profile")
    sp.set_defaults(func=cmd_render)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, ParseError, TemplateError, InvalidPresentation, HypothesisError, MoveError) as e:
        print(f"thinwidth: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
