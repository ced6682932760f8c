"""End-to-end translation: parse, map, run passes, finalize."""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass, field
from typing import Optional

from .cpg.graph import CpgGraph, TranslationStats
from .ir.model import IrModule, ParseReport
from .ir.parser import parse_module
from .mapper import Mapper, PhiRecord
from .passes import PassPipeline, reg2mem, run_pipeline

# Nested statements after block inlining can be deep; the EOG builder recurses.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 20000))


@dataclass
class TranslationResult:
    graph: CpgGraph
    module: IrModule
    phi_records: list[PhiRecord] = field(default_factory=list)

    @property
    def diagnostics(self) -> ParseReport:
        return self.module.report

    @property
    def stats(self) -> TranslationStats:
        return self.graph.stats


def translate(source: str, source_name: str = "<input>", pipeline: Optional[PassPipeline] = None,
              baseline_reg2mem: bool = False, strict: bool = False, finalize: bool = True) -> TranslationResult:
    """Translate LLVM-IR text to a code property graph.

    Raises ParseError only for structurally broken input; everything else
    ends up as diagnostics and ProblemNodes.
    """
    pipeline = pipeline if pipeline is not None else PassPipeline()
    times: dict[str, float] = {}
    t0 = time.perf_counter()
    module = parse_module(source, source_name)
    times["parse"] = (time.perf_counter() - t0) * 1000.0
    if baseline_reg2mem:
        t0 = time.perf_counter()
        module = reg2mem(module)
        times["reg2mem"] = (time.perf_counter() - t0) * 1000.0
    t0 = time.perf_counter()
    mapper = Mapper(module)
    graph = mapper.translate()
    times["map"] = (time.perf_counter() - t0) * 1000.0
    run_pipeline(graph, mapper.phi_records, module, pipeline, strict=strict, times=times)
    if finalize:
        t0 = time.perf_counter()
        graph.finalize()
        for rec in mapper.phi_records:
            rec.owning_function = graph.last_remap.get(rec.owning_function, -1)
        times["finalize"] = (time.perf_counter() - t0) * 1000.0
    graph.phase_times = times
    return TranslationResult(graph, module, mapper.phi_records)


def translate_file(path, **kwargs) -> TranslationResult:
    with open(path, encoding="utf-8", errors="replace") as fh:
        return translate(fh.read(), str(path), **kwargs)
