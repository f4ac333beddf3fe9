"""Command line entry point: ``parkset reachset|plan|simulate <scenario.json>``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .errors import ScenarioError
from .pipeline import EXIT_OK, EXIT_USAGE, MODES, run_pipeline
from .scenario import bundled_scenarios, load_scenario


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _grid(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NX,NY,NPSI integers, got {text!r}") from None
    if len(vals) != 3 or min(vals) < 2:
        raise argparse.ArgumentTypeError("expected three integers >= 2")
    return vals  # type: ignore[return-value]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="parkset",
        description="Reachable-set path planning for reverse vertical parking.",
        epilog="bundled scenarios: " + ", ".join(bundled_scenarios()),
    )
    p.add_argument("mode", choices=MODES)
    p.add_argument("scenario", help="scenario JSON file (or the name of a bundled one)")
    p.add_argument("--out", type=Path, default=Path("out"), help="artifact directory (default: ./out)")
    p.add_argument("--cache-dir", type=Path, default=None, help="reachable-set cache directory (default: --out)")
    p.add_argument("--seed", type=int, default=None, help="disturbance seed override")
    p.add_argument("--grid", type=_grid, default=None, metavar="NX,NY,NPSI", help="grid count override")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        scn = load_scenario(args.scenario).with_overrides(seed=args.seed, grid=args.grid)
    except ScenarioError as e:
        print(f"parkset: invalid scenario: {e}", file=sys.stderr)
        return EXIT_USAGE
    try:
        res = run_pipeline(scn, args.mode, args.out, args.cache_dir)
    except OSError as e:
        print(f"parkset: I/O error: {e}", file=sys.stderr)
        return EXIT_USAGE
    for name, path in sorted(res.artifacts.items()):
        print(f"{name}: {path}")
    if res.status != EXIT_OK:
        print(f"parkset: {res.message}", file=sys.stderr)
    return res.status


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
