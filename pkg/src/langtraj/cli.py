"""Command-line entry point: ``langtraj <command> ...``.

Log level comes from the LANGTRAJ_LOG_LEVEL environment variable (default WARNING).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import yaml

from . import __version__
from .errors import LangTrajError

log = logging.getLogger("langtraj")


def _common(p: argparse.ArgumentParser, inputs: bool = True) -> None:
    p.add_argument("--config", type=Path, help="YAML run configuration")
    p.add_argument("--out", type=Path, help="output directory")
    p.add_argument("--alpha", type=float, help="FDR level (default 0.05)")
    p.add_argument("--jobs", type=int, help="worker threads for assessment")
    p.add_argument("--seed", type=int, help="seed recorded in the manifest")
    if inputs:
        for name in ("transcripts", "pcl", "demographics", "bundle"):
            p.add_argument(f"--{name}", type=Path)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="langtraj", description="Language-based assessments and PCL trajectories.")
    parser.add_argument("--version", action="version", version=f"langtraj {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (
        ("ingest", "parse inputs and write the analysis sample"),
        ("trajectory", "fit per-responder PCL slopes"),
        ("analyze", "run the association analyses"),
        ("run", "end-to-end pipeline with all reports"),
    ):
        _common(sub.add_parser(name, help=help_))

    p = sub.add_parser("assess", help="score transcripts with a model bundle")
    p.add_argument("--transcripts", type=Path, required=True)
    p.add_argument("--bundle", type=Path, required=True)
    p.add_argument("--out", type=Path, required=True, help="assessment CSV to write")
    p.add_argument("--jobs", type=int, default=1)

    p = sub.add_parser("report", help="render a results file as a table or a tertile plot")
    p.add_argument("--results", type=Path, required=True)
    p.add_argument("--format", choices=("table", "plot"), default="table")
    p.add_argument("--out", type=Path, required=True)

    p = sub.add_parser("simulate", help="write a synthetic cohort with planted effects")
    p.add_argument("--config", type=Path)
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--n-subjects", type=int, dest="n_subjects")
    return parser


STAGE_FOR = {"ingest": "ingest", "trajectory": "trajectory", "analyze": "report", "run": "report"}


def _cmd_pipeline(args) -> int:
    from .config import load_config
    from .pipeline import run_pipeline

    overrides = {k: getattr(args, k) for k in ("out", "alpha", "jobs", "seed", "transcripts", "pcl", "demographics", "bundle")}
    cfg = load_config(args.config, **overrides)
    if args.command == "analyze":
        # tables only; the figures belong to ``run``
        cfg.analyses["tertiles"] = False
    outcome = run_pipeline(cfg, until=STAGE_FOR[args.command])
    if outcome.error is not None:
        print(f"error: {outcome.error}", file=sys.stderr)
    return outcome.status


def _cmd_assess(args) -> int:
    from .assess import assess_cohort
    from .cohort import parse_transcripts
    from .lexica import load_bundle

    table = assess_cohort(parse_transcripts(args.transcripts), load_bundle(args.bundle), jobs=args.jobs)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(table.to_csv(), encoding="utf-8")
    return 0


def _cmd_report(args) -> int:
    from .pipeline import TABLE_TITLES
    from .reporting import read_results_csv, read_tertile_csv, render_results, tertile_svg

    args.out.parent.mkdir(parents=True, exist_ok=True)
    if args.format == "plot":
        args.out.write_text(tertile_svg(read_tertile_csv(args.results)), encoding="utf-8")
        return 0
    fmt = {".csv": "csv", ".md": "markdown"}.get(args.out.suffix, "text")
    tables = render_results(read_results_csv(args.results), TABLE_TITLES)
    args.out.write_text("\n".join(t.serialize(fmt) for t in tables), encoding="utf-8")
    return 0


def _cmd_simulate(args) -> int:
    from .synth import SynthConfig, generate_cohort

    data = {}
    if args.config is not None:
        doc = yaml.safe_load(args.config.read_text()) or {}
        data = dict(doc.get("simulate", doc))
        if "seed" in doc and "seed" not in data:
            data["seed"] = doc["seed"]
        data = {k: v for k, v in data.items() if k not in ("inputs", "analyses", "alpha", "jobs", "out")}
    if args.seed is not None:
        data["seed"] = args.seed
    if args.n_subjects is not None:
        data["n_subjects"] = args.n_subjects
    cohort = generate_cohort(SynthConfig.from_dict(data))
    for name, path in cohort.write(args.out).items():
        log.info("wrote %s: %s", name, path)
    return 0


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("LANGTRAJ_LOG_LEVEL", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    handler = {
        "assess": _cmd_assess,
        "report": _cmd_report,
        "simulate": _cmd_simulate,
    }.get(args.command, _cmd_pipeline)
    try:
        return handler(args)
    except LangTrajError as exc:
        print(f"error: [{args.command}] {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: [{args.command}] {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
