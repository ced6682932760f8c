"""Graph passes run after translation."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from ..cpg.graph import CpgGraph
from ..ir.model import IrModule, ParseReport
from .cleanup import cleanup_catch_blocks, remove_stubs
from .dfg import build_dfg
from .eog import GotoWithoutLabel, build_eog
from .inline import inline_single_pred_blocks
from .phi import UnknownPredecessor, eliminate_phis, phi_artifacts
from .reg2mem import reg2mem

PASS_ORDER = ("phi-elimination", "eog", "dfg", "inline-blocks", "catch-cleanup", "remove-stubs")
DEFAULT_PASSES = PASS_ORDER[:5]
_STRUCTURAL = ("inline-blocks", "catch-cleanup", "remove-stubs")


@dataclass
class PassPipeline:
    passes: list[str] = field(default_factory=lambda: list(DEFAULT_PASSES))
    enabled: dict[str, bool] = field(default_factory=dict)

    def __post_init__(self):
        unknown = [p for p in self.passes if p not in PASS_ORDER]
        if unknown:
            raise ValueError(f"unknown pass(es): {', '.join(unknown)}; known: {', '.join(PASS_ORDER)}")
        for p in PASS_ORDER:
            self.enabled.setdefault(p, p in self.passes)

    @classmethod
    def from_spec(cls, spec: Optional[str] = None, remove_stubs: bool = False) -> "PassPipeline":
        """``spec`` is a comma list, ``all``, ``none`` or None for the default set."""
        if spec is None or spec == "":
            names = list(DEFAULT_PASSES)
        elif spec == "all":
            names = list(DEFAULT_PASSES)
        elif spec == "none":
            names = []
        else:
            names = [s.strip() for s in spec.split(",") if s.strip()]
        if remove_stubs and "remove-stubs" not in names:
            names.append("remove-stubs")
        return cls(names)

    def active(self) -> list[str]:
        """Enabled passes in their fixed dependency order."""
        return [p for p in PASS_ORDER if self.enabled.get(p)]


def run_pipeline(graph: CpgGraph, phi_records, module: Optional[IrModule], pipeline: PassPipeline,
                 strict: bool = False, times: Optional[dict] = None,
                 report: Optional[ParseReport] = None) -> CpgGraph:
    times = times if times is not None else {}
    report = report if report is not None else (module.report if module is not None else ParseReport())
    active = pipeline.active()

    def timed(name, fn):
        t0 = time.perf_counter()
        fn()
        times[name] = times.get(name, 0.0) + (time.perf_counter() - t0) * 1000.0

    structural = False
    for name in active:
        if name == "phi-elimination":
            timed(name, lambda: eliminate_phis(graph, phi_records, module, strict=strict, report=report))
        elif name == "eog":
            timed(name, lambda: build_eog(graph, strict=strict, report=report))
        elif name == "dfg":
            timed(name, lambda: build_dfg(graph, report=report))
        elif name == "inline-blocks":
            timed(name, lambda: inline_single_pred_blocks(graph, report=report))
        elif name == "catch-cleanup":
            timed(name, lambda: cleanup_catch_blocks(graph))
        elif name == "remove-stubs":
            timed(name, lambda: remove_stubs(graph, True))
        structural = structural or name in _STRUCTURAL
    if structural:
        if "eog" in active:
            timed("eog", lambda: build_eog(graph, strict=False, report=report))
        if "dfg" in active:
            timed("dfg", lambda: build_dfg(graph, report=report))
    return graph


__all__ = [
    "DEFAULT_PASSES", "PASS_ORDER", "GotoWithoutLabel", "PassPipeline", "UnknownPredecessor",
    "build_dfg", "build_eog", "cleanup_catch_blocks", "eliminate_phis", "inline_single_pred_blocks",
    "phi_artifacts", "reg2mem", "remove_stubs", "run_pipeline",
]
