"""Command-line entry point.

Subcommands: generate (synthetic cases), optimize (run one algorithm on
JSON inputs), bench (timing and cost comparison), catalog (import and
filter instance types), serve (run the REST service).  Every command is
non-interactive and all randomness is controlled by seed flags.

Exit codes: 0 success, 2 infeasible application, 64 usage, 65 bad input
data, 74 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
from pathlib import Path
from typing import Sequence

import uvicorn

from . import erich, georg
from .bench import export_report, run_cases
from .catalog import CatalogQuery, bundled_catalog, filter_catalog, import_catalog
from .datagen import CASE_PAIRINGS, build_case
from .domain import (
    Algorithm,
    Application,
    InfeasibleAppError,
    MarketSpace,
    Provider,
    canonical_json,
)
from .erich import ErichInput
from .georg import GaConfig
from .service import ServiceConfig, create_app

__all__ = ["main", "build_parser"]

EX_OK = 0
EX_INFEASIBLE = 2
EX_USAGE = 64
EX_DATAERR = 65
EX_IOERR = 74


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad flags by default; the documented usage
    # exit code is 64
    def error(self, message):
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, out: str) -> None:
    if out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


def _load_json(path: str):
    return json.loads(Path(path).read_text())


def _parse_case_list(raw: str) -> list[int]:
    cases = []
    for part in raw.split(","):
        part = part.strip()
        if not part:
            continue
        case_id = int(part)
        if case_id not in CASE_PAIRINGS:
            raise ValueError(f"unknown case {case_id}, expected one of {sorted(CASE_PAIRINGS)}")
        cases.append(case_id)
    if not cases:
        raise ValueError("no cases given")
    return cases


def _ga_config(args) -> GaConfig:
    kwargs = {"seed": args.seed}
    if args.population is not None:
        kwargs["population_size"] = args.population
    if args.generations is not None:
        kwargs["max_generations"] = args.generations
    if args.mutation_rate is not None:
        kwargs["mutation_rate"] = args.mutation_rate
    return GaConfig(**kwargs)


def cmd_generate(args) -> int:
    inp = build_case(args.case, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    apps_path = out / "apps.json"
    types_path = out / "types.json"
    apps_path.write_text(canonical_json([a.to_dict() for a in inp.apps]) + "\n")
    types_path.write_text(canonical_json([t.to_dict() for t in inp.types]) + "\n")
    print(f"wrote {apps_path} ({len(inp.apps)} applications)")
    print(f"wrote {types_path} ({len(inp.types)} instance types)")
    return EX_OK


def cmd_optimize(args) -> int:
    raw_apps = _load_json(args.apps)
    if not isinstance(raw_apps, list):
        raise ValueError(f"{args.apps}: expected a JSON list of applications")
    apps = [Application.from_dict(d) for d in raw_apps]
    types = import_catalog(args.types, format="json")
    inp = ErichInput.from_sets(apps=apps, types=types, q_min=args.q_min)
    algorithm = Algorithm(args.algorithm)
    if algorithm is Algorithm.ERICH:
        alloc = erich.optimize(inp)
    else:
        alloc, _trace = georg.run(inp, _ga_config(args))
    _emit(canonical_json(alloc.to_dict()) + "\n", args.out)
    if args.out != "-":
        print(f"wrote {args.out} (cost {alloc.total_cost:.4f})")
    return EX_OK


def cmd_bench(args) -> int:
    cases = _parse_case_list(args.cases)
    reports = run_cases(cases, repetitions=args.reps, seed=args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = export_report(reports, format="csv", path=out / "bench.csv")
    json_path = export_report(reports, format="json", path=out / "bench.json")
    for report in reports:
        for result in report.results:
            if result.error is not None:
                print(f"{report.label} {result.algorithm.value}: failed: {result.error}")
                continue
            wall = statistics.median(result.wall_times_ms)
            print(
                f"{report.label} {result.algorithm.value}: "
                f"cost {result.total_cost:.2f}, median {wall:.1f} ms, "
                f"utilization {result.mean_utilization:.3f}"
            )
    print(f"wrote {csv_path}")
    print(f"wrote {json_path}")
    return EX_OK


def cmd_catalog(args) -> int:
    if args.action == "import":
        types = import_catalog(args.path, format=args.format)
    else:
        source = import_catalog(args.path, format=args.format) if args.path else bundled_catalog()
        query = CatalogQuery(
            providers=(
                frozenset(Provider(p.strip()) for p in args.providers.split(","))
                if args.providers
                else None
            ),
            markets=(
                frozenset(MarketSpace(m.strip()) for m in args.markets.split(","))
                if args.markets
                else None
            ),
            min_capacity=args.min_capacity,
            max_price=args.max_price,
        )
        types = filter_catalog(source, query)
    _emit(canonical_json([t.to_dict() for t in types]) + "\n", args.out)
    if args.out != "-":
        print(f"wrote {args.out} ({len(types)} instance types)")
    return EX_OK


def cmd_serve(args) -> int:
    config = ServiceConfig.from_file(args.config) if args.config else ServiceConfig.from_env()
    app = create_app(config, static_dir=config.static_dir)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EX_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cloudfolio", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a synthetic case as apps.json + types.json")
    p.add_argument("--case", type=int, required=True, choices=sorted(CASE_PAIRINGS))
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("optimize", help="run one algorithm on JSON inputs")
    p.add_argument("--apps", required=True, help="applications JSON file")
    p.add_argument("--types", required=True, help="instance types JSON file")
    p.add_argument(
        "--algorithm", required=True, choices=[a.value for a in Algorithm]
    )
    p.add_argument("--q-min", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--population", type=int, default=None)
    p.add_argument("--generations", type=int, default=None)
    p.add_argument("--mutation-rate", type=float, default=None)
    p.add_argument("--out", required=True, help="allocation JSON file, - for stdout")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("bench", help="benchmark algorithms on generated cases")
    p.add_argument("--cases", required=True, help="comma-separated case ids, e.g. 1,2,6")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("catalog", help="import or filter instance-type catalogs")
    p.add_argument("action", choices=["import", "filter"])
    p.add_argument("--path", default=None, help="catalog file (filter defaults to bundled)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--providers", default=None, help="comma-separated provider names")
    p.add_argument("--markets", default=None, help="comma-separated market names")
    p.add_argument("--min-capacity", type=float, default=None)
    p.add_argument("--max-price", type=float, default=None)
    p.add_argument("--out", default="-", help="output JSON file, - for stdout")
    p.set_defaults(func=cmd_catalog)

    p = sub.add_parser("serve", help="run the REST service")
    p.add_argument("--config", default=None, help="service config JSON file")
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "catalog" and args.action == "import" and not args.path:
        parser.error("catalog import requires --path")
    try:
        return args.func(args)
    except InfeasibleAppError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_INFEASIBLE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_IOERR
    except (ValueError, LookupError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EX_DATAERR


if __name__ == "__main__":
    sys.exit(main())
