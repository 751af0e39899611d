"""Command-line interface: run benchmarks, rescore logs, render reports, serve."""

from __future__ import annotations

import argparse
import csv
import sys
from pathlib import Path

from .catalog import load_catalog
from .harness import RunConfig, parse_agent_spec, render_report, run_benchmark, score_log
from .metrics import summary_csv
from .money import cents


def _cmd_run(args: argparse.Namespace) -> int:
    cfg = RunConfig(
        catalog=load_catalog(args.catalog),
        buyer=parse_agent_spec(args.buyer),
        seller=parse_agent_spec(args.seller),
        budget_factor=args.budget_factor,
        max_turns=args.max_turns,
        sigma=cents(args.sigma),
        seed=args.seed,
        parallelism=args.parallel,
        repetitions=args.repetitions,
        out_dir=Path(args.out) if args.out else None,
        resume=args.resume,
    )
    summary, log_path = run_benchmark(cfg)
    sys.stdout.write(summary_csv(summary))
    if log_path is not None:
        print(f"log: {log_path}", file=sys.stderr)
    return 0


def _cmd_score(args: argparse.Namespace) -> int:
    sys.stdout.write(summary_csv(score_log(args.log)))
    return 0


def _read_summary_csv(path: str):
    from .metrics import BenchmarkSummary, ScopeStats

    with open(path, newline="", encoding="utf-8") as fh:
        rows = {row["role"]: row for row in csv.DictReader(fh)}
    buyer, seller = rows["buyer"], rows["seller"]

    def scope(prefix: str) -> ScopeStats:
        suffix = "" if prefix == "all" else f"_{prefix}"
        count = int(buyer[f"n_{prefix}"])
        rate = buyer[f"deal_rate{suffix}"] if prefix != "all" else None
        deals = round(float(rate) * count) if rate else 0
        return ScopeStats(
            count=count,
            deals=deals,
            snp_b=float(buyer[f"snp{suffix}"]),
            snp_s=float(seller[f"snp{suffix}"]),
        )

    def opt(value: str):
        return None if value in ("", "undef") else float(value)

    return BenchmarkSummary(
        all=scope("all"),
        mi=scope("mi"),
        ci=scope("ci"),
        share_b=opt(buyer["share"]),
        share_s=opt(seller["share"]),
        avg_fbr=opt(buyer["avg_fbr"]),
    )


def _cmd_report(args: argparse.Namespace) -> int:
    summaries = [(Path(p).stem, _read_summary_csv(p)) for p in args.summaries]
    sys.stdout.write(render_report(summaries))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .server import create_app

    host, _, port = args.bind.rpartition(":")
    app = create_app(
        load_catalog(args.catalog),
        budget_factor=args.budget_factor,
        max_turns=args.max_turns,
        sigma=cents(args.sigma),
    )
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bargainbench")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a benchmark over a catalog")
    run.add_argument("--catalog", required=True)
    run.add_argument("--buyer", required=True)
    run.add_argument("--seller", required=True)
    run.add_argument("--budget-factor", type=float, default=0.8)
    run.add_argument("--max-turns", type=int, default=10)
    run.add_argument("--sigma", type=float, default=0.01)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--parallel", type=int, default=1)
    run.add_argument("--repetitions", type=int, default=1)
    run.add_argument("--out", default=None)
    run.add_argument("--resume", action="store_true")
    run.set_defaults(func=_cmd_run)

    score = sub.add_parser("score", help="recompute a summary from a session log")
    score.add_argument("--log", required=True)
    score.set_defaults(func=_cmd_score)

    report = sub.add_parser("report", help="render summaries as a fixed-width table")
    report.add_argument("--summaries", nargs="+", required=True)
    report.set_defaults(func=_cmd_report)

    serve = sub.add_parser("serve", help="serve the live-session HTTP API")
    serve.add_argument("--bind", default="127.0.0.1:8000")
    serve.add_argument("--catalog", required=True)
    serve.add_argument("--budget-factor", type=float, default=0.8)
    serve.add_argument("--max-turns", type=int, default=10)
    serve.add_argument("--sigma", type=float, default=0.01)
    serve.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
