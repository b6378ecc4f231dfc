"""Command-line front end: mining runs and ad-hoc query tooling.

Subcommands:

* ``mine`` — run both mining phases and emit the frequent-query report, the
  rule report, and a structured JSON dump, either to stdout or to files.
* ``eval`` — evaluate one query against the data, printing its answers and
  support (grouped per constant assignment when placeholders are present).
* ``contain`` — classify the containment relationship between two queries.
* ``sql`` — print the SQL rendering of a query.

All output is deterministic: repeated runs over identical inputs produce
identical bytes.  Exit codes: 0 success, 2 command-line usage error,
3 input or configuration error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass
from pathlib import Path

from .containment import (
    is_contained,
    is_diagonally_contained,
    is_equivalent,
)
from .errors import ConfigError, CqmineError
from .evaluation import evaluate, support_grouped
from .phase1 import MinerConfig, parse_key_atom, run_phase1
from .phase2 import RuleConfig, run_phase2
from .queries import parse_query, render_term
from .relational import load_instance, load_schema
from .reports import dump_json, frequent_report_lines, rule_report_lines, run_dump
from .sqlgen import emit_sql

__all__ = [
    "RunManifest",
    "build_parser",
    "cmd_contain",
    "cmd_emit_sql",
    "cmd_eval",
    "cmd_mine",
    "main",
]


@dataclass(frozen=True, slots=True)
class RunManifest:
    """Validated description of one command-line run."""

    schema_path: Path
    data_dir: Path
    miner: MinerConfig
    rules: RuleConfig
    out_dir: Path | None = None
    format: str = "text"
    jobs: int = 1
    seed: int | None = None

    def __post_init__(self) -> None:
        if not self.schema_path.is_file():
            raise ConfigError(f"schema file not found: {self.schema_path}")
        if not self.data_dir.is_dir():
            raise ConfigError(f"data directory not found: {self.data_dir}")
        if self.format not in ("text", "structured"):
            raise ConfigError(f"unknown output format: {self.format!r}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")


def _key_atom_pattern(config: MinerConfig) -> str | None:
    if config.key_atom is None:
        return None
    underscores = ", ".join("_" for _ in config.key_atom.args)
    return f"{config.key_atom.relation}({underscores})"


def _parameters(manifest: RunManifest) -> dict:
    miner, rules = manifest.miner, manifest.rules
    return {
        "schema": str(manifest.schema_path),
        "data": str(manifest.data_dir),
        "minsup": miner.minsup,
        "max_atoms": miner.max_atoms,
        "enable_constants": miner.enable_constants,
        "key_atom": _key_atom_pattern(miner),
        "modulo_head_permutation": miner.modulo_head_permutation,
        "minconf": {
            "numerator": rules.minconf.numerator,
            "denominator": rules.minconf.denominator,
        },
        "include_trivial": rules.include_trivial,
        "jobs": manifest.jobs,
    }


def cmd_mine(manifest: RunManifest) -> int:
    """Run phase 1 and phase 2 and emit all three reports."""
    schema = load_schema(manifest.schema_path)
    instance = load_instance(schema, manifest.data_dir)
    state = run_phase1(instance, manifest.miner, jobs=manifest.jobs)
    rules = run_phase2(state, instance, manifest.rules, jobs=manifest.jobs)

    frequent_lines = frequent_report_lines(state)
    rule_lines = rule_report_lines(rules)
    payload = run_dump(state, rules, _parameters(manifest))

    if manifest.out_dir is not None:
        manifest.out_dir.mkdir(parents=True, exist_ok=True)
        frequent_text = "".join(line + "\n" for line in frequent_lines)
        rule_text = "".join(line + "\n" for line in rule_lines)
        (manifest.out_dir / "frequent.txt").write_text(frequent_text, encoding="utf-8")
        (manifest.out_dir / "rules.txt").write_text(rule_text, encoding="utf-8")
        (manifest.out_dir / "run.json").write_text(
            dump_json(payload), encoding="utf-8"
        )
        return 0
    if manifest.format == "structured":
        sys.stdout.write(dump_json(payload))
        return 0
    print(f"# frequent queries: {len(frequent_lines)}")
    for line in frequent_lines:
        print(line)
    print(f"# association rules: {len(rule_lines)}")
    for line in rule_lines:
        print(line)
    return 0


def cmd_eval(query_text: str, manifest: RunManifest) -> int:
    """Print a query's answers and support, grouped when placeholders occur."""
    schema = load_schema(manifest.schema_path)
    instance = load_instance(schema, manifest.data_dir)
    query = parse_query(query_text, schema)
    if query.symbolic_constants():
        grouped = support_grouped(query, instance, manifest.miner.minsup)
        print("\t".join([*(render_term(s) for s in grouped.symbols), "support"]))
        for values, count in grouped.sorted_items():
            print("\t".join([*values, str(count)]))
        return 0
    answers = evaluate(query, instance)
    for answer in sorted(answers):
        print("\t".join(answer))
    print(f"support\t{len(answers)}")
    return 0


def cmd_contain(query1_text: str, query2_text: str, schema=None) -> int:
    """Classify how two queries relate under containment."""
    q1 = parse_query(query1_text, schema)
    q2 = parse_query(query2_text, schema)
    if q1.arity == q2.arity and is_equivalent(q1, q2):
        print("equivalent")
    elif q1.arity == q2.arity and is_contained(q1, q2):
        print("q1 ⊂ q2")
    elif q1.arity == q2.arity and is_contained(q2, q1):
        print("q2 ⊂ q1")
    elif is_diagonally_contained(q1, q2):
        print("q1 ⊂Δ q2 (diagonal only)")
    elif is_diagonally_contained(q2, q1):
        print("q2 ⊂Δ q1 (diagonal only)")
    else:
        print("incomparable")
    return 0


def cmd_emit_sql(query_text: str, schema) -> int:
    """Print the SQL rendering of one query."""
    print(emit_sql(parse_query(query_text, schema), schema))
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_data_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--schema", required=True, help="schema declaration file")
    parser.add_argument("--data", required=True, help="directory of relation CSV files")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cqmine",
        description="Frequent conjunctive queries and association rules "
        "over relational data.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    mine = commands.add_parser("mine", help="run both mining phases")
    _add_data_options(mine)
    mine.add_argument("--minsup", type=int, required=True,
                      help="minimum support (absolute count)")
    mine.add_argument("--minconf", default="1",
                      help="minimum rule confidence, a fraction or decimal in (0, 1]")
    mine.add_argument("--max-atoms", type=int, default=2,
                      help="largest query body explored (default 2)")
    mine.add_argument("--no-constants", action="store_true",
                      help="disable constant discovery")
    mine.add_argument("--key-atom", metavar="REL(_,_)",
                      help="restrict to queries containing this anchor atom, "
                      "with its variables as the head")
    mine.add_argument("--jobs", type=int, default=1,
                      help="evaluation/search threads (default 1)")
    mine.add_argument("--out-dir",
                      help="write frequent.txt, rules.txt and run.json here "
                      "instead of stdout")
    mine.add_argument("--format", choices=("text", "structured"), default="text",
                      help="stdout format when --out-dir is not given")
    mine.set_defaults(handler=_handle_mine)

    evaluate_cmd = commands.add_parser("eval", help="evaluate one query")
    _add_data_options(evaluate_cmd)
    evaluate_cmd.add_argument("--minsup", type=int, default=1,
                              help="hide constant assignments below this support")
    evaluate_cmd.add_argument("query", help="query text")
    evaluate_cmd.set_defaults(handler=_handle_eval)

    contain = commands.add_parser("contain",
                                  help="compare two queries under containment")
    contain.add_argument("--schema", help="optional schema for validation")
    contain.add_argument("query1", help="first query")
    contain.add_argument("query2", help="second query")
    contain.set_defaults(handler=_handle_contain)

    sql = commands.add_parser("sql", help="print a query's SQL rendering")
    sql.add_argument("--schema", required=True, help="schema declaration file")
    sql.add_argument("query", help="query text")
    sql.set_defaults(handler=_handle_sql)

    return parser


def _manifest_for_mine(args: argparse.Namespace) -> RunManifest:
    key_atom = None
    if args.key_atom:
        key_atom = parse_key_atom(args.key_atom, load_schema(args.schema))
    if args.max_atoms > 3:
        print(
            f"warning: --max-atoms {args.max_atoms} explores a very large "
            "candidate space; expect a long run",
            file=sys.stderr,
        )
    miner = MinerConfig(
        minsup=args.minsup,
        max_atoms=args.max_atoms,
        enable_constants=not args.no_constants,
        key_atom=key_atom,
    )
    return RunManifest(
        schema_path=Path(args.schema),
        data_dir=Path(args.data),
        miner=miner,
        rules=RuleConfig(args.minconf),
        out_dir=Path(args.out_dir) if args.out_dir else None,
        format=args.format,
        jobs=args.jobs,
    )


def _handle_mine(args: argparse.Namespace) -> int:
    return cmd_mine(_manifest_for_mine(args))


def _handle_eval(args: argparse.Namespace) -> int:
    manifest = RunManifest(
        schema_path=Path(args.schema),
        data_dir=Path(args.data),
        miner=MinerConfig(minsup=max(args.minsup, 1)),
        rules=RuleConfig("1"),
    )
    return cmd_eval(args.query, manifest)


def _handle_contain(args: argparse.Namespace) -> int:
    schema = load_schema(args.schema) if args.schema else None
    return cmd_contain(args.query1, args.query2, schema)


def _handle_sql(args: argparse.Namespace) -> int:
    return cmd_emit_sql(args.query, load_schema(args.schema))


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.handler(args)
    except CqmineError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
