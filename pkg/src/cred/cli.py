"""Command-line entry points: run, suite, convert-osm, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ExperimentConfig, SuiteConfig, load_config


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cred",
        description="Active preference learning over navigation tasks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment cell")
    run.add_argument("--config", required=True, help="experiment config JSON")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")
    run.add_argument("--out", default=None, help="directory for metrics.csv and logs.json")

    suite = sub.add_parser("suite", help="run a condition x user x seed grid")
    suite.add_argument("--config", required=True, help="suite config JSON")
    suite.add_argument("--out", default="runs", help="output directory")

    osm = sub.add_parser("convert-osm", help="convert an OSM XML export to a graph environment")
    osm.add_argument("--in", dest="input", required=True, help="OSM XML file")
    osm.add_argument("--radius", type=float, required=True, help="radius in meters")
    osm.add_argument("--center", required=True, help="lat,lon of the center point")
    osm.add_argument("--out", required=True, help="output environment JSON")

    serve = sub.add_parser("serve", help="serve the preference elicitation HTTP API")
    serve.add_argument("--config", required=True, help="experiment config JSON")
    serve.add_argument("--bind", default="127.0.0.1:8000", help="host:port to listen on")
    serve.add_argument("--sessions", default="sessions", help="session persistence directory")

    return parser


def _cmd_run(args) -> int:
    config = load_config(args.config)
    if not isinstance(config, ExperimentConfig):
        print("error: `cred run` needs a single-run config (no `base` key)", file=sys.stderr)
        return 2
    if args.seed is not None:
        config = config.with_overrides(seed=args.seed)

    from .harness import logs_to_rows, run_experiment, write_csv

    result = run_experiment(config)
    rows = logs_to_rows(result)
    text = write_csv(rows)
    if args.out is None:
        print(text, end="")
    else:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(rows, out / "metrics.csv")
        with open(out / "logs.json", "w") as fh:
            json.dump([log.to_json() for log in result.logs], fh, indent=2)
            fh.write("\n")
        print(f"wrote {out / 'metrics.csv'} and {out / 'logs.json'}")
    return 0


def _cmd_suite(args) -> int:
    config = load_config(args.config)
    if not isinstance(config, SuiteConfig):
        print("error: `cred suite` needs a suite config (with a `base` key)", file=sys.stderr)
        return 2

    from .harness import run_suite

    out = run_suite(config, out_dir=args.out)
    n_rows = len(out["rows"])
    n_failures = len(out["failures"])
    print(f"wrote {Path(args.out) / 'metrics.csv'} ({n_rows} rows, {n_failures} failed cells)")
    return 1 if n_failures else 0


def _cmd_convert_osm(args) -> int:
    try:
        lat, lon = (float(v) for v in args.center.split(","))
    except ValueError:
        print("error: --center must be 'lat,lon'", file=sys.stderr)
        return 2

    from .osm import convert_osm_to_file

    env = convert_osm_to_file(args.input, (lat, lon), args.radius, args.out)
    n_nodes = len(env.domain.nodes)
    n_edges = len(env.domain.edges)
    print(f"wrote {args.out}: {n_nodes} nodes, {n_edges} edges, id {env.env_id}")
    return 0


def _cmd_serve(args) -> int:
    config = load_config(args.config)
    if isinstance(config, SuiteConfig):
        config = config.base

    from .service import serve

    serve(config, args.sessions, bind=args.bind)
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "suite": _cmd_suite,
        "convert-osm": _cmd_convert_osm,
        "serve": _cmd_serve,
    }[args.command]
    return handler(args)


if __name__ == "__main__":
    sys.exit(main())
