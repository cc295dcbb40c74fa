"""``prodint analyze``: run an analysis on a ``.tiny`` program and report verdicts."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from .cfg import build_cfg
from .concrete import check_soundness, collect_concrete
from .engine import (
    DOMAIN_ORDER,
    PRODUCTS,
    REDUCTIONS,
    AnalysisConfig,
    AnalysisResult,
    PowerSpec,
    analyze,
    parse_atoms,
)
from .arrays import ARRAY_MODES
from .nonrel import AnalysisError
from .parser import ParseError, parse

EXIT_PROVED, EXIT_UNKNOWN, EXIT_ERROR, EXIT_UNSOUND = 0, 1, 2, 3
EXPONENT_FLAGS = {"parity": "parity", "bool": "bool", "interval-atoms": "interval"}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_ERROR)


def _csv(text: str) -> list[str]:
    return [p.strip() for p in text.split(",") if p.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="prodint", description="Abstract interpretation with product domains.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", help="analyze a .tiny program")
    a.add_argument("program", type=Path)
    a.add_argument("--domains", type=_csv, default=["interval"],
                   help=f"comma-separated subset of {', '.join(DOMAIN_ORDER)}")
    a.add_argument("--product", choices=PRODUCTS, default=None)
    a.add_argument("--reductions", type=_csv, default=[],
                   help=f"comma-separated rules among {', '.join(REDUCTIONS)}")
    a.add_argument("--power-pivot")
    a.add_argument("--power-exponent", choices=sorted(EXPONENT_FLAGS))
    a.add_argument("--power-atoms", help='e.g. "(-inf,2];[3,+inf)", "odd;even" or "true;false"')
    a.add_argument("--widening-delay", type=int, default=1)
    a.add_argument("--arrays", choices=ARRAY_MODES)
    a.add_argument("--input-ranges", action="store_true",
                   help="start from the declared input ranges instead of top")
    a.add_argument("--oracle", action="store_true", help="check soundness against concrete runs")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--out", type=Path, help="also write the JSON report to this path")
    return parser


def config_from_args(args: argparse.Namespace) -> AnalysisConfig:
    product = args.product
    if product is None:
        product = "none" if len(args.domains) == 1 else ("reduced" if args.reductions else "cartesian")
    power = None
    if product == "power":
        if not (args.power_pivot and args.power_exponent and args.power_atoms):
            raise ValueError("--product power needs --power-pivot, --power-exponent and --power-atoms")
        exponent = EXPONENT_FLAGS[args.power_exponent]
        power = PowerSpec(args.power_pivot, exponent, parse_atoms(exponent, args.power_atoms))
    return AnalysisConfig(
        domains=tuple(args.domains),
        product=product,
        reductions=tuple(args.reductions),
        power=power,
        widening_delay=args.widening_delay,
        arrays=args.arrays,
        use_input_ranges=args.input_ranges,
    )


def report(result: AnalysisResult, program: str, oracle: dict | None = None) -> dict:
    cfg = result.cfg
    out = {
        "program": program,
        "config": result.config.describe(),
        "points": [{"node": n, "state": result.render(n)} for n in cfg.nodes],
        "obligations": [
            {"line": o.line, "col": o.col, "kind": o.kind, "verdict": o.verdict}
            for o in result.obligations
        ],
        "counters": {"node_visits": result.iterations},
    }
    if oracle is not None:
        out["oracle"] = oracle
    return out


def render_text(rep: dict) -> str:
    lines = [f"program: {rep['program']}", f"config: {json.dumps(rep['config'], sort_keys=True)}"]
    lines += [f"  {p['node']:>3}: {p['state']}" for p in rep["points"]]
    lines.append("obligations:")
    lines += [f"  {o['line']}:{o['col']} {o['kind']} {o['verdict']}" for o in rep["obligations"]]
    lines.append(f"node visits: {rep['counters']['node_visits']}")
    if "oracle" in rep:
        lines.append(f"oracle: {rep['oracle']['checked']} stores, {rep['oracle']['violations']} violations")
    return "\n".join(lines) + "\n"


def exit_code(rep: dict) -> int:
    if rep.get("oracle", {}).get("violations"):
        return EXIT_UNSOUND
    if all(o["verdict"] == "PROVED" for o in rep["obligations"]):
        return EXIT_PROVED
    return EXIT_UNKNOWN


def run(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        text = args.program.read_text(encoding="utf-8")
        config = config_from_args(args)
        cfg = build_cfg(parse(text))
        result = analyze(cfg, config)
        oracle = None
        if args.oracle:
            sound = check_soundness(result, collect_concrete(cfg))
            oracle = {"checked": sound.checked, "violations": len(sound.violations)}
            for node, store, why in sound.violations:
                print(f"violation at node {node}: {why} for {store}", file=sys.stderr)
    except (OSError, ParseError, ValueError, AnalysisError) as exc:
        print(f"prodint: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    rep = report(result, str(args.program), oracle)
    if args.format == "json":
        sys.stdout.write(json.dumps(rep, indent=2, ensure_ascii=False) + "\n")
    else:
        sys.stdout.write(render_text(rep))
    if args.out:
        args.out.write_text(json.dumps(rep, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return exit_code(rep)


def main() -> None:
    raise SystemExit(run())


if __name__ == "__main__":
    main()
