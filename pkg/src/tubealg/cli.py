"""Command-line front end.

::

    tubealg nondegen problem.json        # witness search only
    tubealg obstruct problem.json        # inverse-derivative relation test
    tubealg polar profile.json           # relation test on the profile derivative
    tubealg guess series.json            # raw relation search
    tubealg corpus DIR [--run]           # write (and optionally run) the bundled examples

Reports go to stdout (or ``--out``).  Exit status: 0 when an analysis
completed, 1 on input errors, 2 when no nondegeneracy witness was found.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .obstruction import InvalidWitnessError, Witness
from .report import (INPUT_ERROR, InputError, Report, RunOptions, emit_corpus, load_problem, run,
                     run_guess)


def _witness_arg(text: str) -> Witness:
    try:
        return Witness.from_dict(json.loads(text))
    except (json.JSONDecodeError, KeyError, TypeError, InvalidWitnessError) as exc:
        raise argparse.ArgumentTypeError(
            f"expected JSON like '{{\"betas\": [[1]], \"ks\": [1]}}': {exc}") from None


def _bound_flags(p: argparse.ArgumentParser, witness: bool = True) -> None:
    p.add_argument("--degree", type=int, help="total degree bound D of the relation search (default 6)")
    p.add_argument("--order", type=int,
                   help="truncation order N (default: unknowns + margin)")
    p.add_argument("--margin", type=int, help="extra equations beyond the unknown count (default 8)")
    p.add_argument("--validate-bump", type=int,
                   help="found relations are re-checked at order N + bump (default 10)")
    p.add_argument("--out", type=Path, help="write the report here instead of stdout")
    p.add_argument("--timings", action="store_true", help="include wall-clock timings in the report")
    if witness:
        p.add_argument("--max-witness-order", type=int,
                       help="longest multiindex tried in the witness search (default 6)")
        p.add_argument("--witness", type=_witness_arg, help="explicit witness as JSON")
        p.add_argument("--assume-family", action="store_true",
                       help="assert the family-membership hypotheses (recorded in the report)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tubealg",
        description="Necessary conditions for local algebraizability of rigid tubes.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("nondegen", help="search for a finite-nondegeneracy witness")
    p.add_argument("file", type=Path)
    _bound_flags(p)

    p = sub.add_parser("obstruct", help="relation test on the inverse derivative map")
    p.add_argument("file", type=Path)
    _bound_flags(p)
    p.add_argument("--first-second", action="store_true",
                   help="also test second partials against first partials (d = 1)")

    p = sub.add_parser("polar", help="relation test on the derivative of a polar profile")
    p.add_argument("file", type=Path)
    _bound_flags(p, witness=False)
    p.add_argument("--assume-family", action="store_true",
                   help="assert the automorphism-algebra hypothesis (recorded in the report)")

    p = sub.add_parser("guess", help="raw polynomial-relation search on a series")
    p.add_argument("file", type=Path)
    _bound_flags(p, witness=False)

    p = sub.add_parser("corpus", help="write the bundled example problems")
    p.add_argument("directory", type=Path)
    p.add_argument("--run", action="store_true",
                   help="also run every problem and write <name>.report.json next to it")
    return parser


def _options(args) -> RunOptions:
    return RunOptions(
        degree=args.degree,
        order=args.order,
        margin=args.margin,
        max_witness_order=getattr(args, "max_witness_order", None),
        validate_bump=args.validate_bump,
        witness=getattr(args, "witness", None),
        assume_family=getattr(args, "assume_family", False),
        first_second=getattr(args, "first_second", False),
        timings=args.timings,
    )


def _emit(report: Report, out: Path | None) -> int:
    text = report.to_json()
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text)
    return report.exit_code


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    if args.command == "corpus":
        problems = emit_corpus(args.directory)
        worst = 0
        for p in problems:
            line = f"{p.name}.json"
            if args.run:
                report = run(p)
                (args.directory / f"{p.name}.report.json").write_text(report.to_json())
                line += f"\t{report.verdict}"
                worst = max(worst, report.exit_code)
            print(line)
        return worst

    options = _options(args)
    if args.command == "guess":
        try:
            data = json.loads(args.file.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            report = Report(command="guess", input={"file": str(args.file)}, verdict=INPUT_ERROR,
                            message="input rejected", error=str(exc))
            return _emit(report, args.out)
        return _emit(run_guess(data, options), args.out)

    try:
        problem = load_problem(args.file)
    except InputError as exc:
        report = Report(command=args.command, input={"file": str(args.file)},
                        verdict=INPUT_ERROR, message="input rejected", error=str(exc))
        return _emit(report, args.out)
    return _emit(run(problem, options, command=args.command), args.out)


if __name__ == "__main__":
    sys.exit(main())
