import copy

import pytest

from cpgir import export_json, interpret_function, map_module, parse_module, translate
from cpgir.ir.parser import parse_module as _parse
from cpgir.passes import (
    GotoWithoutLabel, PassPipeline, UnknownPredecessor, build_dfg, build_eog, cleanup_catch_blocks, eliminate_phis,
    inline_single_pred_blocks, phi_artifacts, reg2mem, remove_stubs,
)
from cpgir.pipeline import translate as run

from helpers import ALL_FIXTURES, PHI_CORPUS, count_kind, fresh, passed, shape, text


def _decl(g, name):
    return next(n for n in g.nodes_of_kind("VariableDeclaration") if g.node(n).name == name)


def _stmts(g, label):
    lab = next(n for n in g.nodes_of_kind("LabelStatement") if g.node(n).name == label)
    return [shape(g, s) for s in g.ast_children(g.child(lab, "subStatement"))]


# φ-elimination

def test_phi_elimination_shape():
    g = passed(text("argc_phi.ll"), "phi-elimination,eog,dfg")
    body = g.child(g.function_by_name("main"), "body")
    first = g.ast_children(body)[0]
    assert shape(g, first) == ("VariableDeclaration", "b", [])
    assert _stmts(g, "BB1")[-2:] == [
        ("BinaryOperator", "=", [("DeclaredReferenceExpression", "b", []), ("DeclaredReferenceExpression", "a", [])]),
        ("GotoStatement", "BB3", [])]
    assert _stmts(g, "BB2")[-2:] == [
        ("BinaryOperator", "=", [("DeclaredReferenceExpression", "b", []),
                                 ("DeclaredReferenceExpression", "argc", [])]),
        ("GotoStatement", "BB3", [])]
    assert _stmts(g, "BB3") == [("ReturnStatement", None, [("DeclaredReferenceExpression", "b", [])])]
    assert phi_artifacts(g) == []


def test_degenerate_phi_budget():
    src = text("phi/chain.ll")
    g, phis = fresh(src)
    before = len(g.nodes)
    eliminate_phis(g, phis, parse_module(src))
    # per φ: one declaration, one assignment with target ref and a single-ref source
    assert len(g.nodes) - before == len(phis) * (1 + 3)


def test_budget_with_k_unconditional_predecessors():
    src = text("phi/clamp.ll")
    g, phis = fresh(src)
    before = len(g.nodes)
    eliminate_phis(g, phis, parse_module(src))
    (rec,) = phis
    assert len(g.nodes) - before == 1 + 3 * len(rec.incoming)


def test_phi_assignments_in_occurrence_order():
    g = passed(text("phi/sum_loop.ll"), "phi-elimination")
    tail = _stmts(g, "body")[-3:]
    assert [s[2][0][1] for s in tail[:2]] == ["i", "s"]
    assert tail[2] == ("GotoStatement", "loop", [])


def test_conditional_predecessor_gets_wrapped_arm():
    g = passed(text("phi/abs.ll"), "phi-elimination")
    (i,) = g.nodes_of_kind("IfStatement")
    other = g.child(i, "elseStatement")
    assert g.node(other).prop("phiEdge")
    assert shape(g, other)[2] == [
        ("BinaryOperator", "=", [("DeclaredReferenceExpression", "r", []), ("DeclaredReferenceExpression", "a", [])]),
        ("GotoStatement", "done", [])]
    assert shape(g, g.child(i, "thenStatement")) == ("GotoStatement", "flip", [])


def test_parallel_copy_hazard_is_reported_and_in_order():
    src = text("swap_hazard.ll")
    r = translate(src)
    assert any("parallel-copy hazard" in d.message for d in r.diagnostics.diagnostics)
    pre, phis = fresh(src)
    f_pre, f_post = pre.function_by_name("f"), r.graph.function_by_name("f")
    # n=2 runs the back edge once: a parallel swap gives b-a, in-order copies give 0
    assert interpret_function(pre, f_pre, [1, 2, 2], phis) == 1
    assert interpret_function(r.graph, f_post, [1, 2, 2]) == 0
    assert interpret_function(r.graph, f_post, [1, 2, 1]) == interpret_function(pre, f_pre, [1, 2, 1], phis) == -1


def test_unknown_predecessor():
    src = text("argc_phi.ll")
    g, phis = fresh(src)
    phis[0].incoming[0] = (phis[0].incoming[0][0], "nowhere")
    with pytest.raises(UnknownPredecessor):
        eliminate_phis(g, phis, parse_module(src))
    g, phis = fresh(src)
    phis[0].incoming[0] = (phis[0].incoming[0][0], "nowhere")
    m = parse_module(src)
    eliminate_phis(g, phis, m, strict=False)
    assert m.report.errors


def test_no_phi_artifacts_on_any_fixture():
    for path in ALL_FIXTURES:
        assert phi_artifacts(passed(path.read_text())) == [], path.name


# EOG

def test_straight_line_eog_chain():
    g = passed("define i32 @f(i32 %a) {\n  %x = add i32 %a, 1\n  %y = add i32 %x, 2\n  ret i32 %y\n}\n",
               "phi-elimination,eog")
    x, y = _decl(g, "x"), _decl(g, "y")
    (ret,) = g.nodes_of_kind("ReturnStatement")
    assert x in _reach(g, g.child(x, "initializer"), 1)
    assert _path(g, x, y) and _path(g, y, ret)
    assert g.eog_successors(ret) == []


def _reach(g, start, depth=10**6):
    seen, frontier = {start}, [start]
    for _ in range(depth):
        nxt = []
        for n in frontier:
            for s in g.eog_successors(n):
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        if not nxt:
            break
        frontier = nxt
    return seen


def _path(g, a, b):
    return b in _reach(g, a)


def test_entry_branches_to_both_blocks():
    g = passed(text("argc_phi.ll"), "phi-elimination,eog")
    (i,) = g.nodes_of_kind("IfStatement")
    labels = {g.node(n).name: n for n in g.nodes_of_kind("LabelStatement")}
    assert _path(g, i, labels["BB1"]) and _path(g, i, labels["BB2"])
    assert not _path(g, labels["BB1"], labels["BB2"])


def test_invoke_reaches_catch_clause():
    g = passed(text("exceptions.ll"), "phi-elimination,eog")
    (call,) = [c for c in g.nodes_of_kind("CallExpression") if g.node(c).name == "may_throw"]
    (clause,) = g.nodes_of_kind("CatchClause")
    assert clause in g.eog_successors(call)
    lpad = next(n for n in g.nodes_of_kind("LabelStatement") if g.node(n).name == "lpad")
    fid = g.function_by_name("guarded")
    assert _path(g, fid, lpad)


def test_throw_has_no_successors():
    g = passed(text("exceptions.ll"))
    for t in g.nodes_of_kind("ThrowStatement"):
        assert g.eog_successors(t) == []


def test_goto_without_label():
    g, phis = fresh("define void @f() {\n  br label %x\nx:\n  ret void\n}\n")
    lab = g.nodes_of_kind("LabelStatement")[1]
    g.node(lab).name = "renamed"
    with pytest.raises(GotoWithoutLabel):
        build_eog(g)


# DFG

def test_def_use_example():
    g = passed("define i32 @f(i32 %a, i32 %b) {\n  %c = add i32 %a, %b\n  ret i32 %c\n}\n", "phi-elimination,eog,dfg")
    c = _decl(g, "c")
    op = g.child(c, "initializer")
    assert op in g.dfg_predecessors(c)
    params = {g.node(p).name: p for p in g.nodes_of_kind("ParameterDeclaration")}
    for name in ("a", "b"):
        (ref,) = [r for r in g.ast_children(op) if g.node(r).name == name]
        assert g.dfg_predecessors(ref) == [params[name]]
        assert g.refers_to(ref) == params[name]


def test_hoisted_declaration_dataflow():
    g = passed(text("argc_phi.ll"), "phi-elimination,eog,dfg")
    b = _decl(g, "b")
    preds = g.dfg_predecessors(b)
    assert len(preds) == 2 and all(g.node(p).prop("access") == "write" for p in preds)
    (ret,) = g.nodes_of_kind("ReturnStatement")
    assert g.dfg_successors(b) == [g.child(ret, "returnValue")]


def test_global_refers_to_single_declaration():
    src = ("@g = global i32 7\ndefine i32 @f() {\n  %x = load i32, i32* @g\n  ret i32 %x\n}\n"
           "define i32 @h() {\n  %y = load i32, i32* @g\n  ret i32 %y\n}\n")
    g = passed(src)
    refs = [n for n in g.nodes_of_kind("DeclaredReferenceExpression") if g.node(n).name == "g"]
    assert len(refs) == 2
    targets = {g.refers_to(r) for r in refs}
    assert len(targets) == 1 and g.node(targets.pop()).prop("scope") == "global"


def test_local_shadows_global():
    src = ("@x = global i32 7\ndefine i32 @f(i32 %x) {\n  %r = add i32 %x, 1\n  ret i32 %r\n}\n")
    g = passed(src)
    (ref,) = [n for n in g.nodes_of_kind("DeclaredReferenceExpression") if g.node(n).name == "x"]
    assert g.node(g.refers_to(ref)).kind == "ParameterDeclaration"


def test_call_argument_flows_to_parameter():
    g = passed(text("phi/calls.ll"))
    (v,) = [p for p in g.nodes_of_kind("ParameterDeclaration") if g.node(p).name == "v"]
    kinds = sorted(g.node(p).kind for p in g.dfg_predecessors(v))
    assert kinds == ["DeclaredReferenceExpression", "DeclaredReferenceExpression"]


def test_unresolved_reference_is_tolerated():
    r = translate("define i32 @f() {\n  %x = add i32 %nope, 1\n  ret i32 %x\n}\n")
    (ref,) = [n for n in r.graph.nodes_of_kind("DeclaredReferenceExpression") if r.graph.node(n).name == "nope"]
    assert r.graph.refers_to(ref) is None
    assert any("nope" in d.message for d in r.diagnostics.diagnostics)


# inlining

def test_diamond_arms_inlined_join_kept():
    src = text("diamond.ll")
    before = passed(src, "phi-elimination,eog,dfg")
    after = passed(src)
    assert len(before.nodes) - len(after.nodes) == 4
    labels = [after.node(n).name for n in after.nodes_of_kind("LabelStatement")]
    assert labels == ["entry", "join"]
    join = after.nodes_of_kind("LabelStatement")[1]
    assert len(after.eog_predecessors(join)) == 2


def test_exit_block_spliced():
    g = passed(text("phi/chain.ll"))
    assert [g.node(n).name for n in g.nodes_of_kind("LabelStatement")] == ["entry"]
    assert count_kind(g, "GotoStatement") == 0


def test_inlining_idempotent_and_non_increasing():
    for path in ALL_FIXTURES:
        src = path.read_text()
        g, phis = fresh(src)
        eliminate_phis(g, phis, parse_module(src), strict=False)
        build_eog(g, strict=False)
        n0 = len(g.nodes)
        inline_single_pred_blocks(g)
        n1 = len(g.nodes)
        once = export_json(copy.deepcopy(g).finalize())
        inline_single_pred_blocks(g)
        assert len(g.nodes) == n1 <= n0, path.name
        assert export_json(g.finalize()) == once, path.name


def test_loop_header_not_inlined():
    g = passed(text("phi/sum_loop.ll"))
    assert "loop" in [g.node(n).name for n in g.nodes_of_kind("LabelStatement")]


# catch cleanup

def test_catchswitch_rethrow_uses_clause_parameter():
    g = passed(text("catchswitch.ll"))
    (clause,) = [c for c in g.nodes_of_kind("CatchClause") if g.node(c).prop("catchswitch")]
    param = g.child(clause, "parameter")
    (th,) = g.nodes_of_kind("ThrowStatement")
    ref = g.child(th, "exception")
    assert g.refers_to(ref) == param
    assert not [n for n in g.nodes_of_kind("VariableDeclaration") if g.node(n).prop("intermediate")]


def test_cleanup_is_noop_without_exceptions():
    for name in ("phi/collatz.ll", "gep_chain.ll"):
        a = passed(text(name), "phi-elimination,eog,dfg,inline-blocks")
        b = passed(text(name), "phi-elimination,eog,dfg,inline-blocks,catch-cleanup")
        assert export_json(a) == export_json(b)


def test_nested_catch_cleanup_keeps_outer_chain():
    g = passed(text("nested_catch.ll"))
    clauses = {g.node(c).prop("catchswitch"): c for c in g.nodes_of_kind("CatchClause") if g.node(c).prop("catchswitch")}
    assert set(clauses) == {"cs", "cs2"}
    for name, clause in clauses.items():
        throws = [t for t in g.descendants(clause) if g.node(t).kind == "ThrowStatement"
                  and g.enclosing(t, "CatchClause") == clause]
        assert len(throws) == 1
        assert g.refers_to(g.child(throws[0], "exception")) == g.child(clause, "parameter")
    assert g.enclosing(clauses["cs2"], "CatchClause") is not None


def test_cleanup_idempotent():
    g = passed(text("nested_catch.ll"), "phi-elimination,eog,dfg,inline-blocks").thaw()
    cleanup_catch_blocks(g)
    n1 = len(g.nodes)
    cleanup_catch_blocks(g)
    assert len(g.nodes) == n1


# stubs

def _names(g):
    return sorted(g.node(f).name for f in g.functions())


def test_stub_chain_removed():
    g = translate(text("stub_chain.ll"), pipeline=PassPipeline.from_spec(None, remove_stubs=True)).graph
    assert _names(g) == ["h", "main", "not_a_stub"]
    calls = [c for c in g.nodes_of_kind("CallExpression") if g.node(c).name == "h"]
    assert {g.node(g.function_of(c)).name for c in calls} == {"main", "not_a_stub"}
    main_call = next(c for c in calls if g.node(g.function_of(c)).name == "main")
    (arg,) = g.ast_children(main_call, "arguments")
    assert g.node(g.refers_to(arg)).name == "argc"


def test_stubs_kept_when_disabled():
    g = passed(text("stub_chain.ll"))
    assert _names(g) == ["f", "g", "h", "main", "not_a_stub"]
    h = g.thaw()
    remove_stubs(h, enabled=False)
    assert _names(h) == ["f", "g", "h", "main", "not_a_stub"]


def test_stub_removal_idempotent():
    g = translate(text("stub_chain.ll"), pipeline=PassPipeline.from_spec(None, remove_stubs=True), finalize=False).graph
    n = len(g.nodes)
    remove_stubs(g)
    assert len(g.nodes) == n


# reg2mem baseline

def test_reg2mem_leaves_input_untouched():
    m = _parse(text("phi/gcd.ll"))
    before = repr(m.functions)
    out = reg2mem(m)
    assert repr(m.functions) == before
    fn = out.function("f")
    assert not [i for i in fn.instructions() if i.opcode == "phi"]
    names = [i.result_name for i in fn.instructions()]
    assert "reg2mem alloca point" in names
    assert any(n and n.endswith(".reg2mem") for n in names)


def test_reg2mem_splits_critical_edges():
    out = reg2mem(_parse(text("phi/abs.ll")))
    labels = [b.label for b in out.function("f").blocks]
    assert "entry.done_crit_edge" in labels


def test_reg2mem_preserves_semantics():
    from helpers import arg_vectors
    for path in PHI_CORPUS:
        src = path.read_text()
        g0, phis = fresh(src)
        gb = run(src, baseline_reg2mem=True).graph
        f0, fb = g0.function_by_name("f"), gb.function_by_name("f")
        arity = len(g0.ast_children(f0, "parameters"))
        for args in arg_vectors(arity, 8):
            assert interpret_function(gb, fb, args) == interpret_function(g0, f0, args, phis), (path.name, args)


# pipeline

def test_pipeline_order_is_canonical():
    p = PassPipeline(["dfg", "inline-blocks", "phi-elimination", "eog"])
    assert p.active() == ["phi-elimination", "eog", "dfg", "inline-blocks"]
    with pytest.raises(ValueError):
        PassPipeline.from_spec("phi-elimination,bogus")
    assert PassPipeline.from_spec("none").active() == []
    assert PassPipeline.from_spec("all").active() == [
        "phi-elimination", "eog", "dfg", "inline-blocks", "catch-cleanup"]


def test_phase_times_recorded():
    r = translate(text("argc_phi.ll"))
    assert {"parse", "map", "phi-elimination", "eog", "dfg", "inline-blocks", "catch-cleanup", "finalize"} <= set(
        r.stats.phase_times)
    assert r.stats.total_ms > 0
