"""``ctrmatch`` command line: ingest contracts, build the AA graph, match.

Exit codes: 0 reuse found (or command succeeded), 1 build new, 2 input error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .contract_graph import FormatError
from .contract_lang import ContractSyntaxError
from .pipeline import (
    DEFAULT_WITNESS_LIMIT,
    InvalidContractError,
    Recommendation,
    Repository,
    build_architecture,
    ingest,
    match,
    report,
)
from .protocol_automata import ProtocolParseError

EXIT_REUSE = 0
EXIT_BUILD_NEW = 1
EXIT_INPUT_ERROR = 2


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrmatch", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def repo_arg(p: argparse.ArgumentParser) -> None:
        p.add_argument(
            "--repo",
            default=os.environ.get("CTRMATCH_REPO"),
            help="repository directory (default: $CTRMATCH_REPO)",
        )

    p = sub.add_parser("ingest", help="parse contracts and store their graphs")
    p.add_argument("files", nargs="*")
    repo_arg(p)

    p = sub.add_parser("build-aa", help="write the application-architecture graph")
    repo_arg(p)

    p = sub.add_parser("match", help="find components matching a required contract")
    p.add_argument("required")
    repo_arg(p)
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--witness-limit", type=_positive, default=DEFAULT_WITNESS_LIMIT)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    if not args.repo:
        print("ctrmatch: no repository given (use --repo or CTRMATCH_REPO)", file=sys.stderr)
        return EXIT_INPUT_ERROR
    repo = Repository.open(args.repo)

    if args.command == "ingest":
        records = ingest(args.files, repo)
        for rec in records:
            if rec.ok:
                print(f"ingested {rec.component} from {rec.path}")
        return EXIT_INPUT_ERROR if any(not r.ok for r in records) else 0

    if args.command == "build-aa":
        try:
            path = build_architecture(repo)
        except (FormatError, OSError) as exc:
            print(f"ctrmatch: cannot build architecture graph: {exc}", file=sys.stderr)
            return EXIT_INPUT_ERROR
        print(path)
        return 0

    try:
        outcome = match(args.required, repo, witness_limit=args.witness_limit)
    except ContractSyntaxError as exc:
        print(f"{args.required}:{exc.line}:{exc.column}: {exc.message}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (InvalidContractError, ProtocolParseError, FormatError, OSError) as exc:
        print(f"ctrmatch: {args.required}: {exc}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    if args.format == "json":
        for w in outcome.warnings:
            logging.getLogger("ctrmatch").warning(w)
    print(report(outcome, args.format))
    return EXIT_REUSE if outcome.recommendation is Recommendation.REUSE else EXIT_BUILD_NEW


if __name__ == "__main__":
    sys.exit(main())
