import itertools
import math

import pytest

from cpgir import interpret_function
from cpgir.cpg.render import function_source

from helpers import count_kind, fresh, label, passed, shape, text


def _decl(g, name):
    return next(n for n in g.nodes_of_kind("VariableDeclaration") if g.node(n).name == name)


def _init_shape(g, name):
    return shape(g, g.child(_decl(g, name), "initializer"))


def _fn(body, params="i32 %a, i32 %b", ret="i32"):
    return f"define {ret} @f({params}) {{\n" + "\n".join("  " + ln for ln in body) + "\n}\n"


def test_udiv_wraps_operands_in_unsigned_casts():
    g, _ = fresh(_fn(["%c = udiv i32 %a, %b", "ret i32 %c"]))
    assert _init_shape(g, "c") == (
        "BinaryOperator", "/", [
            ("CastExpression", "unsigned", [("DeclaredReferenceExpression", "a", [])]),
            ("CastExpression", "unsigned", [("DeclaredReferenceExpression", "b", [])]),
        ])


def test_add_has_no_casts():
    g, _ = fresh(_fn(["%c = add nsw i32 %a, %b", "ret i32 %c"]))
    s = _init_shape(g, "c")
    assert s[0:2] == ("BinaryOperator", "+") and [c[0] for c in s[2]] == ["DeclaredReferenceExpression"] * 2
    assert g.node(g.child(_decl(g, "c"), "initializer")).prop("flags") == ["nsw"]


def test_icmp_signed_predicate_casts():
    g, _ = fresh(_fn(["%c = icmp slt i32 %a, %b", "%r = zext i1 %c to i32", "ret i32 %r"]))
    s = _init_shape(g, "c")
    assert s[1] == "<" and [c[1] for c in s[2]] == ["signed", "signed"]
    s = _init_shape(g, "r")
    assert s[0] == "CastExpression" and g.node(g.child(_decl(g, "r"), "initializer")).prop("castKind") == "zext"


def test_fcmp_ult_and_olt_shapes():
    g, _ = fresh(_fn(["%u = fcmp ult float %a, %b", "%o = fcmp olt float %a, %b", "ret i1 %u"],
                     "float %a, float %b", "i1"))
    iso = ("CallExpression", "isunordered", [("DeclaredReferenceExpression", "a", []),
                                             ("DeclaredReferenceExpression", "b", [])])
    lt = ("BinaryOperator", "<", [("DeclaredReferenceExpression", "a", []), ("DeclaredReferenceExpression", "b", [])])
    assert _init_shape(g, "u") == ("BinaryOperator", "||", [iso, lt])
    assert _init_shape(g, "o") == ("BinaryOperator", "&&", [("UnaryOperator", "!", [iso]), lt])


FCMP = {
    "oeq": lambda a, b: a == b, "ogt": lambda a, b: a > b, "oge": lambda a, b: a >= b,
    "olt": lambda a, b: a < b, "ole": lambda a, b: a <= b, "one": lambda a, b: a < b or a > b,
}
SPECIALS = [1.0, -0.0, math.nan, math.inf]


def _pred_oracle(pred, a, b):
    uno = math.isnan(a) or math.isnan(b)
    if pred == "uno":
        return uno
    if pred == "ord":
        return not uno
    if pred in ("true", "false"):
        return pred == "true"
    rel = FCMP["o" + pred[1:]](a, b)
    return (not uno and rel) if pred[0] == "o" else (uno or rel)


@pytest.mark.parametrize("pred", ["oeq", "ogt", "oge", "olt", "ole", "one", "ord",
                                  "ueq", "ugt", "uge", "ult", "ule", "une", "uno", "true", "false"])
def test_fcmp_expansion_truth_tables(pred):
    g, _ = fresh(_fn([f"%c = fcmp {pred} double %a, %b", "ret i1 %c"], "double %a, double %b", "i1"))
    fid = g.function_by_name("f")
    for a, b in itertools.product(SPECIALS, repeat=2):
        assert interpret_function(g, fid, [a, b]) == int(_pred_oracle(pred, a, b)), (pred, a, b)


def test_cast_insertion_observable_on_i8():
    g, _ = fresh(_fn(["%u = udiv i8 %a, %b", "%s = sdiv i8 %a, %b", "%r = sub i8 %u, %s", "ret i8 %u"],
                     "i8 %a, i8 %b", "i8"))
    u = _fn(["%u = udiv i8 %a, %b", "ret i8 %u"], "i8 %a, i8 %b", "i8")
    s = _fn(["%s = sdiv i8 %a, %b", "ret i8 %s"], "i8 %a, i8 %b", "i8")
    gu, _ = fresh(u)
    gs, _ = fresh(s)
    assert interpret_function(gu, gu.function_by_name("f"), [0xFF, 2]) == 127
    assert interpret_function(gs, gs.function_by_name("f"), [0xFF, 2]) == 0


def test_gep_chain_shape():
    g, _ = fresh(text("gep_chain.ll"))
    s = _init_shape(g, "arrayidx")
    assert s == (
        "UnaryOperator", "&", [
            ("ArraySubscriptionExpression", None, [
                ("ArraySubscriptionExpression", None, [
                    ("MemberExpression", "field_1", [
                        ("MemberExpression", "field_2", [
                            ("ArraySubscriptionExpression", None, [
                                ("DeclaredReferenceExpression", "s", []), ("Literal", 1, [])]),
                        ]),
                    ]),
                    ("Literal", 5, []),
                ]),
                ("Literal", 13, []),
            ]),
        ])
    assert function_source(g, g.function_by_name("foo")).count("&s[1].field_2.field_1[5][13]") == 1


def test_gep_member_field_edges():
    g, _ = fresh(text("gep_chain.ll"))
    for m in g.nodes_of_kind("MemberExpression"):
        (fld,) = g.successors(m, "FIELD")
        assert g.node(fld).name == g.node(m).name
        rec = g.parent(fld)
        assert g.node(rec).name in ("struct.ST", "struct.RT")


def test_gep_index_past_arity_is_problem():
    src = "%S = type { i32 }\ndefine i32* @f(%S* %p) {\n  %q = getelementptr %S, %S* %p, i64 0, i32 3\n  ret i32* %q\n}\n"
    g, _ = fresh(src)
    assert count_kind(g, "ProblemNode") == 1


def test_insertvalue_copy_then_member_write():
    g, _ = fresh(text("insertvalue.ll"))
    b = _decl(g, "b")
    assert shape(g, g.child(b, "initializer")) == ("DeclaredReferenceExpression", "a", [])
    assert str(g.node(b).type) == "{ i32, i8 }"
    stmts = g.ast_children(g.parent(b), "statements")
    assign = stmts[stmts.index(b) + 1]
    assert shape(g, assign) == ("BinaryOperator", "=", [
        ("MemberExpression", "field_1", [("DeclaredReferenceExpression", "b", [])]), ("Literal", 7, [])])
    recs = [n for n in g.nodes_of_kind("RecordDeclaration") if g.node(n).name == "literal_i32_i8"]
    assert len(recs) == 1


def test_extractvalue_projection():
    g, _ = fresh(_fn(["%v = extractvalue {i32} %a, 0", "ret i32 %v"], "{i32} %a"))
    assert _init_shape(g, "v") == ("MemberExpression", "field_0", [("DeclaredReferenceExpression", "a", [])])


def test_vector_element_ops():
    src = _fn(["%e = extractelement <4 x i32> %v, i32 1", "%w = insertelement <4 x i32> %v, i32 %e, i32 0",
               "ret i32 %e"], "<4 x i32> %v")
    g, _ = fresh(src)
    assert _init_shape(g, "e")[0] == "ArraySubscriptionExpression"
    assert _init_shape(g, "w") == ("DeclaredReferenceExpression", "v", [])


def test_alloca_store_load_simplified():
    g, _ = fresh(_fn(["%p = alloca i32", "store i32 5, i32* %p", "%v = load i32, i32* %p", "ret i32 %v"], ""))
    assert g.node(_decl(g, "p")).prop("alloca")
    assigns = [n for n in g.nodes_of_kind("BinaryOperator") if g.node(n).prop("operatorCode") == "="]
    assert [shape(g, a) for a in assigns] == [
        ("BinaryOperator", "=", [("DeclaredReferenceExpression", "p", []), ("Literal", 5, [])])]
    assert _init_shape(g, "v") == ("DeclaredReferenceExpression", "p", [])
    assert interpret_function(g, g.function_by_name("f"), []) == 5


def test_load_through_pointer_param_is_dereference():
    g, _ = fresh(_fn(["%v = load i32, i32* %q", "ret i32 %v"], "i32* %q"))
    assert _init_shape(g, "v") == ("UnaryOperator", "*", [("DeclaredReferenceExpression", "q", [])])


def test_fence_and_unknown_intrinsic():
    g, _ = fresh(_fn(["fence seq_cst", "%r = call i8* @llvm.objc.retain(i8* %x)", "ret void"], "i8* %x", "void"))
    names = [g.node(c).name for c in g.nodes_of_kind("CallExpression")]
    assert names == ["llvm.fence", "llvm.objc.retain"]


def test_casts_record_kind():
    g, _ = fresh(_fn(["%b = zext i8 %a to i32", "%q = bitcast i8* %p to i32*", "%i = ptrtoint i32* %q to i64",
                      "ret i32 %b"], "i8 %a, i8* %p"))
    kinds = {g.node(_decl(g, n)).name: g.node(g.child(_decl(g, n), "initializer")).prop("castKind")
             for n in ("b", "q", "i")}
    assert kinds == {"b": "zext", "q": "bitcast", "i": "ptrtoint"}
    assert str(g.node(g.child(_decl(g, "i"), "initializer")).type) == "i64"


def test_cmpxchg_block():
    g, _ = fresh(_fn(["%r = cmpxchg i32* %p, i32 %old, i32 %new seq_cst seq_cst", "ret void"],
                     "i32* %p, i32 %old, i32 %new", "void"))
    (blk,) = [n for n in g.nodes_of_kind("CompoundStatement") if g.node(n).prop("atomic")]
    kids = g.ast_children(blk)
    assert len(kids) == 3
    assert [g.node(k).kind for k in kids] == ["VariableDeclaration", "IfStatement", "VariableDeclaration"]
    assert g.node(blk).prop("success_ordering") == "seq_cst"
    ctor = g.child(kids[2], "initializer")
    assert g.node(ctor).name == "literal_i32_i1"


def test_atomicrmw_variants():
    def block(op):
        g, _ = fresh(_fn([f"%o = atomicrmw {op} i32* %p, i32 %v monotonic", "ret i32 %o"], "i32* %p, i32 %v"))
        (blk,) = [n for n in g.nodes_of_kind("CompoundStatement") if g.node(n).prop("atomic")]
        return g, [shape(g, k) for k in g.ast_children(blk)]

    g, s = block("add")
    assert s[1] == ("BinaryOperator", "=", [
        ("UnaryOperator", "*", [("DeclaredReferenceExpression", "p", [])]),
        ("BinaryOperator", "+", [("DeclaredReferenceExpression", "o", []), ("DeclaredReferenceExpression", "v", [])])])
    _, s = block("xchg")
    assert s[1][2][1] == ("DeclaredReferenceExpression", "v", [])
    _, s = block("umax")
    assert s[1][0] == "IfStatement"
    g, _ = fresh(_fn(["%o = atomicrmw uinc_wrap i32* %p, i32 %v monotonic", "ret i32 %o"], "i32* %p, i32 %v"))
    assert [g.node(c).name for c in g.nodes_of_kind("CallExpression")] == ["llvm.atomicrmw.uinc_wrap"]


def test_atomicrmw_semantics_via_interpreter():
    src = ("define i32 @f(i32 %v) {\n  %p = alloca i32\n  store i32 10, i32* %p\n"
           "  %o = atomicrmw OP i32* %p, i32 %v seq_cst\n  %n = load i32, i32* %p\n  %r = mul i32 %n, 100\n"
           "  %s = add i32 %r, %o\n  ret i32 %s\n}\n")
    expect = {"add": lambda v: (10 + v) * 100 + 10, "xchg": lambda v: v * 100 + 10,
              "max": lambda v: max(10, v) * 100 + 10, "sub": lambda v: (10 - v) * 100 + 10}
    for op, fn in expect.items():
        g, _ = fresh(src.replace("OP", op))
        for v in (-5, 3, 10, 42):
            assert interpret_function(g, g.function_by_name("f"), [v]) == fn(v), (op, v)


def test_control_flow_shapes():
    g, _ = fresh(text("argc_phi.ll"))
    ifs = g.nodes_of_kind("IfStatement")
    assert [shape(g, i)[2][1:] for i in ifs] == [[("GotoStatement", "BB1", []), ("GotoStatement", "BB2", [])]]
    (ret,) = g.nodes_of_kind("ReturnStatement")
    assert shape(g, ret) == ("ReturnStatement", None, [("DeclaredReferenceExpression", "b", [])])


def test_switch_shape():
    g, _ = fresh(_fn(["switch i32 %a, label %d [i32 0, label %z]", "z:", "ret i32 0", "d:", "ret i32 1"]))
    (sw,) = g.nodes_of_kind("SwitchStatement")
    cases = g.ast_children(sw, "cases")
    targets = {g.node(g.child(c, "statement")).name for c in cases}
    assert len(cases) == 2 and targets == {"z", "d"}
    assert g.node(cases[-1]).prop("default")


def test_select_and_unreachable():
    g, _ = fresh(_fn(["%m = select i1 %c, i32 %a, i32 %b", "unreachable"], "i1 %c, i32 %a, i32 %b"))
    assert _init_shape(g, "m")[0] == "ConditionalExpression"
    assert any(g.node(c).name == "llvm.unreachable" for c in g.nodes_of_kind("CallExpression"))


def test_void_call_is_bare_expression():
    g, _ = fresh("declare void @g(i32)\n" + _fn(["call void @g(i32 %a)", "ret void"], "i32 %a", "void"))
    (c,) = g.nodes_of_kind("CallExpression")
    assert g.node(g.parent(c)).kind == "CompoundStatement"


def test_phi_records_deferred():
    g, phis = fresh(text("argc_phi.ll"))
    assert [(p.target_name, [(v.value, lab) for v, lab in p.incoming]) for p in phis] == [
        ("b", [("a", "BB1"), ("argc", "BB2")])]
    assert not any(g.node(n).name == "b" for n in g.nodes_of_kind("VariableDeclaration"))
    g2, phis2 = fresh(text("swap_hazard.ll"))
    assert [p.target_name for p in phis2] == ["x", "y", "i"]


def test_invoke_try_shape():
    g, _ = fresh(text("exceptions.ll"))
    (t,) = g.nodes_of_kind("TryStatement")
    tb = g.child(t, "tryBlock")
    assert [g.node(k).kind for k in g.ast_children(tb)] == ["VariableDeclaration", "GotoStatement"]
    (clause,) = g.ast_children(t, "catchClauses")
    assert shape(g, g.child(clause, "body")) == ("CompoundStatement", None, [("GotoStatement", "lpad", [])])
    (th,) = g.nodes_of_kind("ThrowStatement")
    assert shape(g, th) == ("ThrowStatement", None, [("DeclaredReferenceExpression", "lp", [])])
    assert any(g.node(c).name == "llvm.landingpad" for c in g.nodes_of_kind("CallExpression"))


def test_catchswitch_if_chain_with_rethrow():
    g, _ = fresh(text("catchswitch.ll"))
    clauses = [c for c in g.nodes_of_kind("CatchClause") if g.node(c).prop("catchswitch")]
    (clause,) = clauses
    (top,) = g.ast_children(g.child(clause, "body"))
    assert g.node(top).kind == "IfStatement"
    inner = g.child(top, "elseStatement")
    assert g.node(inner).kind == "IfStatement"
    last = g.child(inner, "elseStatement")
    assert g.node(last).kind == "ThrowStatement"


def test_missing_catchpad_is_problem():
    src = text("catchswitch.ll").replace("[label %h1, label %h2]", "[label %h1, label %nowhere]")
    g, _ = fresh(src)
    assert count_kind(g, "ProblemNode") == 1


def _nest(n):
    e = "ptrtoint (i32* @g to i64)"
    for _ in range(n - 1):
        e = f"add (i64 {e}, i64 1)"
    return f"@g = global i32 0\ndefine i64 @f() {{\n  %r = add i64 {e}, 0\n  ret i64 %r\n}}\n"


def test_deep_constant_expression_becomes_problem_node():
    g8, _ = fresh(_nest(8))
    g9, _ = fresh(_nest(9))
    assert g8.stats.problem_node_count == 0
    assert g9.stats.problem_node_count == 1


def test_malformed_instruction_becomes_problem_node():
    g, _ = fresh(_fn(["%c = add i32 %a,", "ret i32 %a"]))
    assert g.stats.problem_node_count == 1
    decl = _decl(g, "c")
    assert g.node(g.child(decl, "initializer")).kind == "ProblemNode"


def test_totality_every_instruction_maps():
    for name in ("phi/collatz.ll", "exceptions.ll", "catchswitch.ll", "gep_chain.ll"):
        from cpgir.ir import parse_module
        m = parse_module(text(name))
        g, phis = fresh(text(name))
        codes = {n.code for n in g.nodes.values()}
        for fn in m.functions:
            for ins in fn.instructions():
                assert ins.opcode == "phi" or ins.raw_text in codes, ins.raw_text
        assert len(phis) == sum(1 for fn in m.functions for i in fn.instructions() if i.opcode == "phi")


def test_literal_labels():
    g, _ = fresh(_fn(["%c = add i32 %a, -1", "ret i32 %c"]))
    lit = g.child(g.child(_decl(g, "c"), "initializer"), "rhs")
    assert label(g, lit) == -1
