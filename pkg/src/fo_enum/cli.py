"""Command-line entry point: ``fo-enum index|enum|check|bench``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from typing import Sequence, TextIO

from .decomposition import build_plan, dump_plan
from .enumeration import delay_stats, open_cursor
from .evaluator import Evaluator, brute_enumerate
from .formula import Exists, Formula, FormulaError, RadiusOverflowError, parse_formula
from .generators import FAMILIES, generate
from .neighborhood import dump_type_index
from .structure import StructureError, Structure, check_degree_bound, gaifman_graph, load_structure

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PRECONDITION = 2
EXIT_MISMATCH = 3


class UsageError(Exception):
    pass


class PreconditionError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    structure_path: str | None = None
    query_text: str | None = None
    query_path: str | None = None
    degree: int | None = None
    radius: int | None = None
    head: tuple[str, ...] | None = None
    limit: int | None = None
    oracle_check: bool = False
    stats: bool = False
    types: bool = False
    seed: int = 0
    family: str = "ladder"
    sizes: tuple[int, ...] = (100, 1000, 10000)
    colors: float | None = None


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _non_negative(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {text}")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text}") from None
    if not values or min(values) < 1:
        raise argparse.ArgumentTypeError("sizes must be positive")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fo-enum",
        description="Enumerate answers of first-order queries over bounded-degree structures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser, needs_structure: bool = True) -> None:
        if needs_structure:
            p.add_argument("--structure", required=True, metavar="PATH", help="facts file")
        q = p.add_mutually_exclusive_group(required=True)
        q.add_argument("--query", metavar="TEXT")
        q.add_argument("--query-file", metavar="PATH")
        p.add_argument("--degree", type=_non_negative, metavar="D")
        p.add_argument("--radius", type=_positive, metavar="R",
                       help="locality radius override (unsound unless the query is R-local)")
        p.add_argument("--head", metavar="V1,V2,...", help="answer coordinate order")

    p = sub.add_parser("index", help="build indices and print the decomposition plan")
    common(p)
    p.add_argument("--types", action="store_true", help="also dump the type index")

    p = sub.add_parser("enum", help="stream answers in lexicographic order")
    common(p)
    p.add_argument("--limit", type=_positive, metavar="N")
    p.add_argument("--stats", action="store_true")
    p.add_argument("--oracle-check", action="store_true")

    p = sub.add_parser("check", help="decide a sentence (or the existential closure of a query)")
    common(p)

    p = sub.add_parser("bench", help="delay and preprocessing steps over a generated family")
    common(p, needs_structure=False)
    p.add_argument("--family", choices=FAMILIES, default="ladder")
    p.add_argument("--sizes", type=_int_list, default=(100, 1000, 10000), metavar="N1,N2,...")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=_positive, metavar="N", help="emissions measured per size")
    p.add_argument("--colors", type=float, metavar="FRACTION",
                   help="add a unary relation C on a seeded fraction of elements")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    head = None
    if args.head:
        head = tuple(v.strip() for v in args.head.split(",") if v.strip())
    return RunConfig(
        command=args.command,
        structure_path=getattr(args, "structure", None),
        query_text=args.query,
        query_path=args.query_file,
        degree=args.degree,
        radius=args.radius,
        head=head,
        limit=getattr(args, "limit", None),
        oracle_check=getattr(args, "oracle_check", False),
        stats=getattr(args, "stats", False),
        types=getattr(args, "types", False),
        seed=getattr(args, "seed", 0),
        family=getattr(args, "family", "ladder"),
        sizes=getattr(args, "sizes", (100, 1000, 10000)),
        colors=getattr(args, "colors", None),
    )


# ---------------------------------------------------------------------------


def _query_text(cfg: RunConfig) -> str:
    if cfg.query_path is not None:
        try:
            with open(cfg.query_path, encoding="utf-8") as fh:
                return fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read query file: {exc}") from None
    assert cfg.query_text is not None
    return cfg.query_text


def _formula(cfg: RunConfig, s: Structure) -> Formula:
    f = parse_formula(_query_text(cfg), s.signature)
    if cfg.head is not None:
        f = f.with_head(cfg.head)
    return f


def _structure(cfg: RunConfig) -> Structure:
    try:
        s = load_structure(cfg.structure_path)
    except OSError as exc:
        raise UsageError(f"cannot read structure: {exc}") from None
    if cfg.degree is not None:
        g = gaifman_graph(s)
        if not check_degree_bound(g, cfg.degree):
            raise PreconditionError(
                f"structure is not {cfg.degree}-degree-bounded (max degree {g.max_degree})"
            )
    return s


def _override_note(cfg: RunConfig, err: TextIO) -> None:
    if cfg.radius is not None:
        print(
            f"warning: radius overridden to r={cfg.radius}; answers are only correct "
            f"if the query is {cfg.radius}-local",
            file=err,
        )


def _tsv(s: Structure, t: Sequence[int]) -> str:
    return "\t".join(s.label(t))


def _sentence_value(s: Structure, f: Formula) -> bool:
    node = f.root
    for v in reversed(f.free_vars):
        node = Exists(v, node)
    return Evaluator(s).evaluate(node, {})


def cmd_index(cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    s = _structure(cfg)
    f = _formula(cfg, s)
    if f.k == 0:
        raise UsageError("index needs a query with free variables; use check for sentences")
    _override_note(cfg, err)
    plan = build_plan(f, s, cfg.radius, cfg.degree)
    out.write(dump_plan(plan))
    steps = dict(plan.preprocess_steps)
    steps["total"] = plan.total_preprocess_steps
    out.write("# preprocess_steps " + json.dumps(steps, sort_keys=True) + "\n")
    if cfg.types:
        out.write(dump_type_index(plan.ti, s))
    return EXIT_OK


def cmd_enum(cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    s = _structure(cfg)
    f = _formula(cfg, s)
    _override_note(cfg, err)
    emitted: list[tuple[int, ...]] = []
    stats: dict[str, object] = {}
    if f.k == 0:
        # a sentence has the single empty answer iff it holds
        if _sentence_value(s, f):
            emitted.append(())
            out.write("\n")
        stats = {"emitted": len(emitted), "sentence": True}
    else:
        plan = build_plan(f, s, cfg.radius, cfg.degree)
        cursor = open_cursor(plan)
        while cfg.limit is None or len(emitted) < cfg.limit:
            t = cursor.next_answer()
            if t is None:
                break
            emitted.append(t)
            out.write(_tsv(s, t) + "\n")
        if cfg.stats:
            stats = delay_stats(cursor).as_dict() if (cursor.emitted or cursor.exhausted) else {
                "emitted": 0, "max_steps": 0, "mean_steps": 0.0, "open_steps": cursor.open_steps,
                "tail_steps": 0, "preprocess_steps": plan.total_preprocess_steps,
            }
            stats["step_bound"] = cursor.step_bound()
            stats["state_bytes"] = len(cursor.state())
            stats["r"] = plan.r
            stats["radius_overridden"] = plan.radius.overridden
            stats["streams"] = len(cursor.streams)
    status = EXIT_OK
    if cfg.oracle_check:
        expected = brute_enumerate(s, f)
        if cfg.limit is not None:
            expected = expected[: cfg.limit]
        if emitted == expected:
            out.write("oracle: match\n")
        else:
            missing = len(set(expected) - set(emitted))
            extra = len(set(emitted) - set(expected))
            out.write(f"oracle: MISMATCH (missing {missing}, unexpected {extra})\n")
            status = EXIT_MISMATCH
    if cfg.stats:
        out.write("stats " + json.dumps(stats, sort_keys=True, indent=2) + "\n")
    return status


def cmd_check(cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    s = _structure(cfg)
    f = _formula(cfg, s)
    out.write("true\n" if _sentence_value(s, f) else "false\n")
    return EXIT_OK


def cmd_bench(cfg: RunConfig, out: TextIO, err: TextIO) -> int:
    degree = 3 if cfg.degree is None else cfg.degree
    _override_note(cfg, err)
    out.write("n\tpreprocess_steps\tmax_delay_steps\tstep_bound\tstate_bytes\temitted\n")
    for n in cfg.sizes:
        s = generate(cfg.family, n, seed=cfg.seed, degree=degree, color_fraction=cfg.colors)
        f = _formula(cfg, s)
        if f.k == 0:
            raise UsageError("bench needs a query with free variables")
        if not check_degree_bound(gaifman_graph(s), degree):
            raise PreconditionError(f"generated structure exceeds degree {degree}")
        plan = build_plan(f, s, cfg.radius, degree)
        cursor = open_cursor(plan)
        count = 0
        while cfg.limit is None or count < cfg.limit:
            if cursor.next_answer() is None:
                break
            count += 1
        out.write(
            f"{n}\t{plan.total_preprocess_steps}\t{cursor.max_steps}\t{cursor.step_bound()}"
            f"\t{len(cursor.state())}\t{count}\n"
        )
    return EXIT_OK


COMMANDS = {"index": cmd_index, "enum": cmd_enum, "check": cmd_check, "bench": cmd_bench}


def execute_command(cfg: RunConfig, out: TextIO | None = None, err: TextIO | None = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        return COMMANDS[cfg.command](cfg, out, err)
    except (FormulaError, StructureError, UsageError) as exc:
        print(f"error: {exc}", file=err)
        return EXIT_USAGE
    except RadiusOverflowError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PRECONDITION
    except PreconditionError as exc:
        print(f"error: {exc}", file=err)
        return EXIT_PRECONDITION


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    return execute_command(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
