"""Command line entry point: ``cloneforge run --scenario all --out report``."""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path

from . import checks
from .dot import emit_lattice_dot
from .engine import generate_clone
from .filters import filter_lattice
from .finops import OpTable
from .semilattice import Semilattice, con_lattice_dot

log = logging.getLogger("cloneforge")

REPORT_SCHEMA = 1


def load_config(path: str | None, overrides: dict) -> checks.RunConfig:
    """Defaults, then the JSON file at ``path``, then command-line flags."""
    cfg = checks.RunConfig()
    data = {}
    if path:
        data = json.loads(Path(path).read_text())
    data.update({k: v for k, v in overrides.items() if v is not None})
    names = {f.name for f in dataclasses.fields(cfg)}
    for key, value in data.items():
        if key not in names:
            raise ValueError(f"unknown config key {key!r}")
        if key == "window":
            value = tuple(value)
        setattr(cfg, key, value)
    cfg.validate()
    return cfg


def diagrams(cfg: checks.RunConfig) -> dict[str, str]:
    out = {}
    if cfg.scenario in ("semilattice", "all"):
        out["con_chain4.dot"] = con_lattice_dot(Semilattice.chain(4), "Con(chain4)")
    if cfg.scenario in ("filters", "all"):
        out[f"filters_q{cfg.filter_base}.dot"] = filter_lattice(cfg.filter_base).dot()
    return out


def run_scenario(cfg: checks.RunConfig) -> tuple[int, dict]:
    """Run the checks, write the artifacts, return ``(exit_status, report)``."""
    results = checks.run_checks(cfg)
    report = {
        "schema": REPORT_SCHEMA,
        "config": {k: (list(v) if isinstance(v, tuple) else v)
                   for k, v in dataclasses.asdict(cfg).items() if k != "out"},
        "checks": [r.to_json() for r in results],
        "passed": all(r.passed for r in results),
    }
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    timings = {r.id: {"seconds": round(r.seconds, 3), "limit": r.max_seconds} for r in results}
    (out / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    (out / "summary.txt").write_text("\n".join(r.line() for r in results) + "\n")
    for name, text in diagrams(cfg).items():
        (out / name).write_text(text)
    for r in results:
        log.info(r.line())
    return (0 if report["passed"] else 1), report


def _divisor_dot(n: int) -> str:
    divs = [d for d in range(1, n + 1) if n % d == 0]
    return emit_lattice_dot(divs, lambda a, b: b % a == 0, f"divisors{n}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="cloneforge", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a verification scenario")
    run.add_argument("--scenario", choices=sorted(checks.SCENARIOS), default=None)
    run.add_argument("--config", help="JSON file of RunConfig overrides")
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--out", default=None, help="output directory")
    run.add_argument("-q", "--quiet", action="store_true")

    dot = sub.add_parser("dot", help="print a Hasse diagram")
    dot.add_argument("kind", choices=["filters", "con-chain", "divisors"])
    dot.add_argument("n", type=int)

    clo = sub.add_parser("closure", help="close a set of JSON operation tables")
    clo.add_argument("tables", help="JSON file holding a list of operation tables")
    clo.add_argument("--arity-bound", type=int, default=checks.RunConfig.arity_bound)
    clo.add_argument("--size-bound", type=int, default=checks.RunConfig.size_bound)
    clo.add_argument("--base", type=int, default=None)

    args = parser.parse_args(argv)
    if args.command == "run":
        logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO,
                            format="%(message)s")
        try:
            cfg = load_config(args.config, {"scenario": args.scenario, "seed": args.seed,
                                            "out": args.out})
        except (ValueError, OSError) as e:
            parser.error(str(e))
        status, _ = run_scenario(cfg)
        return status
    if args.command == "dot":
        if args.kind == "filters":
            sys.stdout.write(filter_lattice(args.n).dot())
        elif args.kind == "con-chain":
            sys.stdout.write(con_lattice_dot(Semilattice.chain(args.n), f"Con(chain{args.n})"))
        else:
            sys.stdout.write(_divisor_dot(args.n))
        return 0
    tables = [OpTable.from_json(t) for t in json.loads(Path(args.tables).read_text())]
    res = generate_clone(tables, args.arity_bound, args.size_bound, base=args.base)
    sys.stdout.write(res.dumps() + "\n")
    return 0 if res.complete else 2


if __name__ == "__main__":
    sys.exit(main())
