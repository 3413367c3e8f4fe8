"""Command-line entry point.

Exit status: 0 success, 1 pipeline error, 2 configuration or I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from importlib import resources
from pathlib import Path

from .errors import ConfigError, PipelineError
from .pipeline import ExplanationRun, RunConfig, run_pipeline
from .report import format_table, serialize, write_text
from .svg import render_svg

log = logging.getLogger("ontoexplain")


def example_config_path(name: str = "haberman") -> Path:
    return Path(str(resources.files("ontoexplain") / "data" / f"{name}_config.json"))


def render_report(run: ExplanationRun, fmt: str = "json", out=None, plot=None, stream=None) -> None:
    """Write the JSON report (and optional SVG); ``table`` also prints the rank grid."""
    stream = stream or sys.stdout
    text = serialize(run.report)
    if out:
        write_text(out, text)
    if fmt == "table":
        stream.write(format_table(run.report["explanations"]))
        for w in run.report["warnings"]:
            stream.write(f"warning: {w}\n")
    elif not out:
        stream.write(text)
    if plot:
        pred = run.report["prediction"]["label"]
        write_text(plot, render_svg(run.plot, f"test point predicted {pred}"))


def _parse_test(text: str) -> dict:
    out = {}
    for part in text.split(","):
        if "=" not in part:
            raise ConfigError(f"--test expects name=value pairs, got {part!r}")
        k, v = part.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ontoexplain", description=__doc__.splitlines()[0])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="run configuration (JSON)")
    src.add_argument("--example", choices=["haberman"], help="use a shipped example configuration")
    p.add_argument("--dataset", help="CSV dataset path")
    p.add_argument("--model", choices=["lr", "knn"])
    p.add_argument("--k", type=int, help="neighbourhood size for kNN")
    test = p.add_mutually_exclusive_group()
    test.add_argument("--test-index", type=int, help="dataset row to hold out and explain")
    test.add_argument("--test", help="inline test point, e.g. age=35,year=63,nodes=0")
    p.add_argument("--ontology")
    p.add_argument("--blc-rules")
    p.add_argument("--mapping")
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="report path (JSON)")
    p.add_argument("--plot", help="SVG plot path")
    p.add_argument("--format", choices=["json", "table"])
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def _load_config(args) -> RunConfig:
    path = Path(args.config) if args.config else example_config_path(args.example)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from None
    base = path.parent
    cwd = Path.cwd()
    if args.dataset:
        doc["dataset"]["path"] = str(cwd / args.dataset)
    for flag, key in (("ontology", "ontology"), ("blc_rules", "blc_rules"), ("mapping", "mapping")):
        if getattr(args, flag):
            doc[key] = str(cwd / getattr(args, flag))
    if args.model:
        doc.setdefault("model", {})["kind"] = args.model
    if args.k is not None:
        doc.setdefault("model", {})["k"] = args.k
    if args.test_index is not None:
        doc["test"] = {"index": args.test_index}
    elif args.test:
        doc["test"] = {"values": _parse_test(args.test)}
    if args.seed is not None:
        doc["seed"] = args.seed
    out = doc.setdefault("output", {})
    for flag in ("out", "plot", "format"):
        v = getattr(args, flag)
        if v:
            key = "report" if flag == "out" else flag
            out[key] = v if flag == "format" else str(cwd / v)
    return RunConfig.from_dict(doc, base)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _load_config(args)
    except (OSError, ConfigError, ValueError, KeyError) as exc:
        print(f"error: stage 'config': {exc}", file=sys.stderr)
        return 2
    try:
        run = run_pipeline(cfg)
    except PipelineError as exc:
        print(f"error: stage {exc.stage!r}: {exc.cause}", file=sys.stderr)
        return exc.exit_code
    try:
        render_report(run, cfg.format, cfg.report, cfg.plot)
    except OSError as exc:
        print(f"error: stage 'render_report': {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
