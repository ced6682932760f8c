import pytest

from cpgir.cpg import CpgGraph
from cpgir.cpg.graph import FrozenGraphError, MissingRequiredProperty, UnknownNode
from cpgir.ir.types import I8, I32, TypeRef

from helpers import passed, text


def test_new_node_and_required_properties():
    g = CpgGraph()
    b = g.new_node("BinaryOperator", operatorCode="+")
    assert g.node(b).kind == "BinaryOperator"
    lit = g.new_node("Literal", type=I8, value=7)
    assert g.node(lit).prop("value") == 7
    with pytest.raises(MissingRequiredProperty):
        g.new_node("BinaryOperator")
    with pytest.raises(MissingRequiredProperty):
        g.new_node("Literal")
    with pytest.raises(ValueError):
        g.new_node("LambdaExpression")


def test_node_count_tracks_creation():
    g = CpgGraph()
    for _ in range(328):
        g.new_node("CompoundStatement")
    assert g.stats.node_count == 328


def test_intern_literal_struct():
    g = CpgGraph()
    tu = g.new_node("TranslationUnit", "m")
    a = g.intern_literal_struct([I32, I8], tu)
    assert g.intern_literal_struct([I32, I8], tu) == a
    assert g.node(a).name == "literal_i32_i8"
    fields = g.record_fields(a)
    assert [(g.node(f).name, str(g.node(f).type)) for f in fields] == [("field_0", "i32"), ("field_1", "i8")]
    b = g.intern_literal_struct([I8, I32], tu)
    assert b != a and g.node(b).name == "literal_i8_i32"


def test_ast_children_order_and_unknown_node():
    g = passed(text("phi/calls.ll"))
    tu = g.roots[0]
    kids = g.ast_children(tu)
    assert [g.node(k).kind for k in kids] == ["FunctionDeclaration", "FunctionDeclaration"]
    with pytest.raises(UnknownNode):
        g.ast_children(10**6)


def test_return_has_no_eog_successors():
    g = passed(text("phi/max.ll"))
    for r in g.nodes_of_kind("ReturnStatement"):
        assert g.eog_successors(r) == []


def test_declaration_dfg_predecessor_is_initializer():
    g = passed("define i32 @f() {\n  %x = add i32 5, 0\n  %y = or i32 %x, 0\n  ret i32 %y\n}\n")
    x = next(n for n in g.nodes_of_kind("VariableDeclaration") if g.node(n).name == "x")
    init = g.child(x, "initializer")
    assert init in g.dfg_predecessors(x)


def test_refers_to_only_targets_declarations():
    g = CpgGraph()
    ref = g.new_node("DeclaredReferenceExpression", "x")
    lit = g.new_node("Literal", value=1)
    decl = g.new_node("VariableDeclaration", "x")
    g.add_edge(ref, decl, "REFERS_TO")
    with pytest.raises(ValueError):
        g.add_edge(ref, lit, "REFERS_TO")
    with pytest.raises(ValueError):
        g.add_edge(lit, decl, "REFERS_TO")


def test_finalize_dense_ids_and_freeze():
    g = passed(text("argc_phi.ll"))
    assert sorted(g.nodes) == list(range(len(g.nodes)))
    with pytest.raises(FrozenGraphError):
        g.new_node("CompoundStatement")


def test_graph_invariants_on_fixtures():
    from helpers import ALL_FIXTURES
    for path in ALL_FIXTURES:
        g = passed(path.read_text())
        parents = {}
        for n in g.nodes.values():
            for _, c in n.children:
                assert c not in parents, path.name
                parents[c] = n.id
        for n in g.nodes.values():
            assert (n.id in parents) == (n.kind != "TranslationUnit"), (path.name, n.id, n.kind)
            assert n.parent == parents.get(n.id)
        for e in g.edges():
            assert e.src in g.nodes and e.dst in g.nodes
            if e.kind == "EOG":
                assert g.function_of(e.src) == g.function_of(e.dst)
        st = g.stats
        assert st.node_count == len(g.nodes)
        assert st.problem_node_count == sum(1 for n in g.nodes.values() if n.kind == "ProblemNode")
        assert st.function_count == sum(1 for n in g.nodes.values() if n.kind == "FunctionDeclaration")


def test_instruction_nodes_have_code():
    g = passed(text("phi/collatz.ll"))
    for n in g.nodes.values():
        if n.kind in ("VariableDeclaration", "BinaryOperator", "IfStatement", "ReturnStatement"):
            assert n.code, n


def test_queries_do_not_mutate():
    from cpgir.analysis import evaluate, find_calls
    g = passed(text("crypto/md5_typed.ll"))
    before = (len(g.nodes), g.edge_count())
    for c in find_calls(g, "SSL_CTX_set_cipher_list"):
        evaluate(g, g.ast_children(c, "arguments")[1])
    assert (len(g.nodes), g.edge_count()) == before


def test_typeref_cpg_name():
    assert TypeRef.pointer(TypeRef.named_struct("struct.ST")).cpg_name() == "struct.ST*"
    assert TypeRef.literal_struct([I32, I8]).cpg_name() == "literal_i32_i8"
