"""Shared test utilities."""

import random
from pathlib import Path

from cpgir import map_module, parse_module, translate
from cpgir.passes import PassPipeline

FIXTURES = Path(__file__).parent / "fixtures"
PHI_CORPUS = sorted((FIXTURES / "phi").glob("*.ll"))
ALL_FIXTURES = sorted(FIXTURES.rglob("*.ll"))

# small values keep the loop fixtures short; extremes exercise wrap-around
ARG_POOL = [-9, -3, -1, 0, 1, 2, 3, 4, 7, 12, 25, 64, 127, -128, 255, 2**31 - 1]


def text(name):
    return (FIXTURES / name).read_text()


def fresh(source):
    """Freshly mapped graph (no passes) with its φ records."""
    g, phis, _ = map_module(parse_module(source))
    return g, phis


def passed(source, passes=None, **kw):
    return translate(source, pipeline=PassPipeline.from_spec(passes), **kw).graph


def arg_vectors(arity, count=20, seed=0):
    rng = random.Random(seed * 7919 + arity)
    vectors = []
    seen = set()
    while len(vectors) < count:
        v = tuple(rng.choice(ARG_POOL) for _ in range(arity))
        if v not in seen or len(seen) >= len(ARG_POOL) ** arity:
            seen.add(v)
            vectors.append(list(v))
    return vectors


def label(g, nid):
    n = g.node(nid)
    if n.kind in ("BinaryOperator", "UnaryOperator"):
        return n.prop("operatorCode")
    if n.kind == "Literal":
        return n.prop("value")
    if n.kind == "CastExpression":
        return n.prop("signedness") or n.prop("castKind")
    return n.name


def shape(g, nid):
    """(kind, label, [child shapes]) for structural comparison."""
    n = g.node(nid)
    return (n.kind, label(g, nid), [shape(g, c) for _, c in n.children])


def count_kind(g, kind):
    return sum(1 for n in g.nodes.values() if n.kind == kind)


def function_nodes(g, name):
    fid = g.function_by_name(name)
    return [fid] + list(g.descendants(fid))
