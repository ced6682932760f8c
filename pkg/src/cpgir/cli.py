"""Command line: translate, stats, query, compare."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .analysis.queries import RULES
from .export import export_graphml, export_json, export_neo4j_csv
from .ir.model import ParseError
from .passes import PassPipeline
from .pipeline import TranslationResult, translate

log = logging.getLogger("cpgir")

EXIT_OK, EXIT_FINDINGS, EXIT_FATAL = 0, 1, 2
FORMATS = ("json", "graphml", "neo4j-csv", "none")
_EXTENSIONS = {"json": ".json", "graphml": ".graphml"}


@dataclass
class RunConfig:
    input_paths: list[str]
    pipeline: PassPipeline = field(default_factory=PassPipeline)
    output_format: str = "none"
    output_path: Optional[str] = None
    stub_removal: bool = False
    baseline_reg2mem: bool = False
    queries: list[str] = field(default_factory=list)
    stats_only: bool = False
    fail_on_findings: bool = False

    def __post_init__(self):
        if self.output_format not in FORMATS:
            raise ValueError(f"unknown output format {self.output_format!r}")
        if self.output_format == "neo4j-csv" and not self.output_path:
            raise ValueError("neo4j-csv output needs an output directory (-o)")
        unknown = [q for q in self.queries if q not in RULES]
        if unknown:
            raise ValueError(f"unknown rule(s) {', '.join(unknown)}; known: {', '.join(sorted(RULES))}")


def stats_line(result: TranslationResult, label: str = "") -> str:
    st = result.stats
    phases = ", ".join(f"{k}={v:.2f}" for k, v in st.phase_times.items())
    prefix = f"{label}: " if label else ""
    return (f"{prefix}# Nodes: {st.node_count}, # Functions: {st.function_count}, "
            f"# Problem nodes: {st.problem_node_count}, Analysis time [ms]: {st.total_ms:.2f} ({phases})")


def _translate(path: str, cfg: RunConfig, baseline: bool = False) -> TranslationResult:
    with open(path, encoding="utf-8", errors="replace") as fh:
        source = fh.read()
    return translate(source, path, pipeline=cfg.pipeline, baseline_reg2mem=baseline)


def _output_target(cfg: RunConfig, path: str) -> Optional[str]:
    """Where the export for ``path`` goes; None means stdout."""
    if not cfg.output_path:
        return None
    if cfg.output_format == "neo4j-csv":
        if len(cfg.input_paths) == 1:
            return cfg.output_path
        return os.path.join(cfg.output_path, Path(path).stem)
    if len(cfg.input_paths) == 1 and not os.path.isdir(cfg.output_path):
        return cfg.output_path
    return os.path.join(cfg.output_path, Path(path).stem + _EXTENSIONS[cfg.output_format])


def _export(result: TranslationResult, cfg: RunConfig, path: str, out) -> None:
    fmt = cfg.output_format
    if fmt == "none":
        return
    t0 = time.perf_counter()
    target = _output_target(cfg, path)
    if fmt == "neo4j-csv":
        export_neo4j_csv(result.graph, target)
    else:
        data = export_json(result.graph) if fmt == "json" else export_graphml(result.graph)
        if target is None:
            out.write(data.decode("utf-8"))
        else:
            os.makedirs(os.path.dirname(target) or ".", exist_ok=True)
            with open(target, "wb") as fh:
                fh.write(data)
    result.graph.phase_times["export"] = (time.perf_counter() - t0) * 1000.0


def run(cfg: RunConfig, out=None, err=None) -> int:
    """Process every input; a failing file is reported and the batch continues."""
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    status = EXIT_OK
    for path in cfg.input_paths:
        try:
            result = _translate(path, cfg, cfg.baseline_reg2mem)
        except ParseError as exc:
            print(f"{path}: fatal parse error: {exc}", file=err)
            status = EXIT_FATAL
            continue
        except OSError as exc:
            print(f"{path}: {exc.strerror or exc}", file=err)
            status = EXIT_FATAL
            continue
        for d in result.diagnostics.diagnostics:
            log.log(logging.ERROR if d.severity == "error" else logging.WARNING, "%s:%s", path, d)
        if not cfg.stats_only:
            try:
                _export(result, cfg, path, out)
            except OSError as exc:
                print(f"{path}: cannot write output: {exc.strerror or exc}", file=err)
                status = EXIT_FATAL
                continue
        findings = []
        for rule in cfg.queries:
            findings.extend(RULES[rule](result.graph))
        if cfg.queries:
            report = {"file": path, "findings": [f.to_dict() for f in findings]}
            out.write(json.dumps(report, sort_keys=True) + "\n")
        if cfg.stats_only or cfg.output_format == "none" or cfg.output_path:
            print(stats_line(result, path), file=err if cfg.queries else out)
        if findings and cfg.fail_on_findings and status == EXIT_OK:
            status = EXIT_FINDINGS
    return status


def compare(paths: list[str], pipeline: PassPipeline, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    status = EXIT_OK
    for path in paths:
        cfg = RunConfig([path], pipeline)
        try:
            ours = _translate(path, cfg)
            base = _translate(path, cfg, baseline=True)
        except (ParseError, OSError) as exc:
            print(f"{path}: {exc}", file=err)
            status = EXIT_FATAL
            continue
        print(stats_line(ours, f"{path} [phi-elimination]"), file=out)
        print(stats_line(base, f"{path} [reg2mem]"), file=out)
        b = base.stats.node_count
        if b:
            print(f"{path}: node reduction {100.0 * (b - ours.stats.node_count) / b:.1f}%", file=out)
    return status


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cpgir", description="Translate LLVM-IR into a code property graph.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_output=True):
        p.add_argument("inputs", nargs="+", metavar="FILE", help="textual LLVM-IR (.ll) files")
        p.add_argument("--passes", default=None,
                       help="comma separated passes, 'all' or 'none' (default: phi-elimination,eog,dfg,"
                            "inline-blocks,catch-cleanup)")
        p.add_argument("--remove-stubs", action="store_true", help="also remove library stub functions")
        p.add_argument("--baseline-reg2mem", action="store_true",
                       help="demote registers to memory before translation instead of eliminating φs")
        if with_output:
            p.add_argument("--format", choices=FORMATS[:3], default="json")
            p.add_argument("-o", "--out", default=None, help="output file, or directory for neo4j-csv and batches")

    common(sub.add_parser("translate", help="translate and export the graph"))
    common(sub.add_parser("stats", help="print node, function and problem-node counts"), with_output=False)
    q = sub.add_parser("query", help="run detectors and print a JSON findings report")
    common(q, with_output=False)
    q.add_argument("--rule", action="append", choices=sorted(RULES), help="rule id (default: all rules)")
    q.add_argument("--fail-on-findings", action=argparse.BooleanOptionalAction, default=True,
                   help="exit with status 1 when anything is found (default: on)")
    common(sub.add_parser("compare", help="compare node counts against the reg2mem baseline"), with_output=False)
    for name in ("translate", "stats"):
        sp = sub.choices[name]
        sp.add_argument("--rule", action="append", choices=sorted(RULES), help="also run this detector")
        sp.add_argument("--fail-on-findings", action="store_true", help="exit with status 1 on findings")
    return parser


def _configure_logging() -> None:
    level = os.environ.get("CPGIR_LOG", "warn").lower()
    levels = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}
    logging.basicConfig(level=levels.get(level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr)


def main(argv=None) -> int:
    _configure_logging()
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        pipeline = PassPipeline.from_spec(args.passes, remove_stubs=args.remove_stubs)
        if args.command == "compare":
            return compare(args.inputs, pipeline)
        rules = args.rule or []
        if args.command == "query" and not rules:
            rules = sorted(RULES)
        cfg = RunConfig(
            input_paths=args.inputs,
            pipeline=pipeline,
            output_format=getattr(args, "format", "none") if args.command == "translate" else "none",
            output_path=getattr(args, "out", None),
            stub_removal=args.remove_stubs,
            baseline_reg2mem=args.baseline_reg2mem,
            queries=rules,
            stats_only=args.command == "stats",
            fail_on_findings=args.fail_on_findings,
        )
    except ValueError as exc:
        parser.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
