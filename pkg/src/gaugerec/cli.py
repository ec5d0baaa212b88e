"""Command-line interface: run one scenario, check the algebra, or batch a directory."""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from .cuntz import build_multiplet, check_cuntz_relations
from .scenario import (
    EXIT_CHECK_FAILED,
    EXIT_CONFIG_ERROR,
    ConfigError,
    emit_report,
    load_config,
    render_text,
    run_scenario,
)
from .wordspace import build_word_basis


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaugerec",
        description=(
            "Simulate local errors generated by a truncated Cuntz multiplet, "
            "solve for recovery operators, and verify the algebraic checks."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run one scenario config and write its report")
    run_p.add_argument("--config", required=True, type=Path, help="scenario config (JSON)")
    run_p.add_argument("--out", required=True, type=Path, help="report destination")
    run_p.add_argument(
        "--format", choices=("machine", "text"), default="machine", help="report format"
    )
    run_p.add_argument(
        "--verbose", action="store_true", help="also print the text summary to stderr"
    )

    alg_p = sub.add_parser(
        "check-algebra", help="standalone defect report for the generator relations"
    )
    alg_p.add_argument("--d", required=True, type=int, help="alphabet size")
    alg_p.add_argument("--L", required=True, type=int, help="maximum word length")
    alg_p.add_argument("--tol", type=float, default=1e-9, help="pass tolerance")

    batch_p = sub.add_parser(
        "batch", help="run every *.json config in a directory, writing *.report files"
    )
    batch_p.add_argument("--dir", required=True, type=Path, help="config directory")
    batch_p.add_argument(
        "--format", choices=("machine", "text"), default="machine", help="report format"
    )
    batch_p.add_argument("--jobs", type=int, default=None, help="parallel workers")
    return parser


def _cmd_run(args) -> int:
    try:
        config = load_config(args.config)
        report = run_scenario(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    emit_report(report, path=args.out, format=args.format)
    if args.verbose:
        sys.stderr.write(render_text(report))
    return report.exit_code


def _cmd_check_algebra(args) -> int:
    try:
        basis = build_word_basis(args.d, args.L)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    report = check_cuntz_relations(build_multiplet(basis), tol=args.tol)
    token = "PASS" if report.passed else "FAIL"
    print(f"generator relations d={args.d} L={args.L} dim={basis.dim}")
    print(f"  isometry_defect={report.isometry_defect!r}")
    print(f"  completeness_defect={report.completeness_defect!r}")
    print(f"  {token} (tol={args.tol!r})")
    return 0 if report.passed else EXIT_CHECK_FAILED


def _run_one(config_path: Path, out_path: Path, format: str) -> int:
    try:
        report = run_scenario(load_config(config_path))
    except ConfigError as exc:
        print(f"{config_path.name}: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    emit_report(report, path=out_path, format=format)
    print(f"{config_path.name}: {report.status} (exit {report.exit_code})")
    return report.exit_code


def _cmd_batch(args) -> int:
    directory = args.dir
    if not directory.is_dir():
        print(f"config error: {directory} is not a directory", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    suffix = ".report.json" if args.format == "machine" else ".report.txt"
    configs = sorted(
        p
        for p in directory.glob("*.json")
        if not p.name.endswith(".report.json")
    )
    if not configs:
        print(f"config error: no configs found in {directory}", file=sys.stderr)
        return EXIT_CONFIG_ERROR
    jobs = [(p, p.with_name(p.stem + suffix)) for p in configs]
    with ThreadPoolExecutor(max_workers=args.jobs) as pool:
        codes = list(
            pool.map(lambda job: _run_one(job[0], job[1], args.format), jobs)
        )
    return max(codes)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "check-algebra":
        return _cmd_check_algebra(args)
    if args.command == "batch":
        return _cmd_batch(args)
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    raise SystemExit(main())
