import csv
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from cpgir import export_graphml, export_json, export_neo4j_csv, import_json, translate
from cpgir.cli import RunConfig, main

from helpers import ALL_FIXTURES, FIXTURES, passed, text


# JSON

def test_json_deterministic_and_round_trips():
    for path in ALL_FIXTURES:
        a = export_json(translate(path.read_text()).graph)
        b = export_json(translate(path.read_text()).graph)
        assert a == b, path.name
        assert export_json(import_json(a)) == a, path.name


def test_empty_module_json():
    doc = json.loads(export_json(translate("").graph))
    assert [n["kind"] for n in doc["nodes"]] == ["TranslationUnit"]
    assert doc["edges"] == []
    assert doc["stats"]["node_count"] == 1 and doc["stats"]["function_count"] == 0


def test_insertvalue_json():
    doc = json.loads(export_json(translate(text("insertvalue.ll")).graph))
    assert any(n["kind"] == "RecordDeclaration" and n["name"] == "literal_i32_i8" for n in doc["nodes"])
    assert any(n["kind"] == "MemberExpression" and n["name"] == "field_1" for n in doc["nodes"])


def test_json_stats_match_graph():
    r = translate(text("argc_phi.ll"))
    doc = json.loads(export_json(r.graph))
    assert doc["stats"]["node_count"] == len(doc["nodes"]) == r.stats.node_count
    assert doc["stats"]["edge_count"] == len(doc["edges"])


def test_nan_literal_serialized():
    g = passed("define i1 @f(double %x) {\n  %c = fcmp uno double %x, 0x7FF8000000000000\n  ret i1 %c\n}\n")
    data = export_json(g)
    json.loads(data)
    assert b'"NaN"' in data


# CSV and GraphML

def test_neo4j_csv(tmp_path):
    src = ('@s = private constant [6 x i8] c"a,\\22b\\00"\n'
           "define ptr @f() {\n  ret ptr @s\n}\n")
    g = translate(src).graph
    nodes_path, edges_path = export_neo4j_csv(g, tmp_path / "out")
    with open(nodes_path, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["id:ID", "kind:LABEL", "name", "code", "type"]
    assert len(rows) - 1 == len(g.nodes)
    # code carries commas and double quotes; csv quoting must round-trip it
    assert [g.node(int(r[0])).code for r in rows[1:]] == [r[3] for r in rows[1:]]
    assert any('c"a,\\22b' in r[3] for r in rows[1:])
    assert '"c""a,' in (tmp_path / "out" / "nodes.csv").read_text()
    with open(edges_path, newline="") as fh:
        erows = list(csv.reader(fh))
    assert erows[0] == [":START_ID", ":END_ID", "kind:TYPE"]
    assert {r[2] for r in erows[1:]} >= {"AST"}
    assert len(erows) - 1 == len(list(g.edges()))


def test_graphml_parses():
    g = translate(text("argc_phi.ll")).graph
    root = ET.fromstring(export_graphml(g))
    ns = {"g": "http://graphml.graphdrawing.org/xmlns"}
    assert len(root.findall(".//g:node", ns)) == len(g.nodes)
    assert len(root.findall(".//g:edge", ns)) == len(list(g.edges()))


# CLI

def test_run_config_validation():
    with pytest.raises(ValueError):
        RunConfig(["x.ll"], output_format="neo4j-csv")
    with pytest.raises(ValueError):
        RunConfig(["x.ll"], output_format="pdf")
    with pytest.raises(ValueError):
        RunConfig(["x.ll"], queries=["nope"])


def test_cli_translate_stdout(capsys):
    assert main(["translate", str(FIXTURES / "argc_phi.ll")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["stats"]["function_count"] == 1


def test_cli_translate_to_file(tmp_path, capsys):
    out = tmp_path / "g.graphml"
    assert main(["translate", str(FIXTURES / "argc_phi.ll"), "--format", "graphml", "-o", str(out)]) == 0
    ET.parse(out)
    assert "# Functions: 1" in capsys.readouterr().out


def test_cli_neo4j_requires_out(capsys):
    with pytest.raises(SystemExit) as e:
        main(["translate", str(FIXTURES / "argc_phi.ll"), "--format", "neo4j-csv"])
    assert e.value.code == 2


def test_cli_stats(capsys):
    assert main(["stats", str(FIXTURES / "phi/calls.ll")]) == 0
    line = capsys.readouterr().out
    assert "# Nodes: " in line and "# Functions: 2" in line and "# Problem nodes: 0" in line
    assert "Analysis time [ms]:" in line


def test_cli_query_exit_codes(capsys):
    assert main(["query", str(FIXTURES / "crypto/md5_typed.ll")]) == 1
    report = json.loads(capsys.readouterr().out)
    assert [f["rule_id"] for f in report["findings"]] == ["cipher-misuse/md5"]
    assert main(["query", str(FIXTURES / "crypto/aes_typed.ll")]) == 0
    assert json.loads(capsys.readouterr().out)["findings"] == []
    assert main(["query", "--no-fail-on-findings", str(FIXTURES / "crypto/md5_typed.ll")]) == 0


def test_cli_batch_continues_after_fatal(tmp_path, capsys):
    bad = tmp_path / "bad.ll"
    bad.write_text("define i32 @f() {\n  ret i32 0\n")
    missing = tmp_path / "missing.ll"
    code = main(["stats", str(bad), str(missing), str(FIXTURES / "argc_phi.ll")])
    cap = capsys.readouterr()
    assert code == 2
    assert "argc_phi.ll: # Nodes:" in cap.out
    assert "bad.ll" in cap.err and "missing.ll" in cap.err


def test_cli_compare(capsys):
    assert main(["compare", str(FIXTURES / "phi/gcd.ll")]) == 0
    out = capsys.readouterr().out.splitlines()
    assert "[phi-elimination]" in out[0] and "[reg2mem]" in out[1]
    assert "node reduction" in out[2]


def test_cli_passes_flag(capsys):
    assert main(["stats", "--passes", "none", str(FIXTURES / "argc_phi.ll")]) == 0
    assert main(["stats", "--passes", "all", "--remove-stubs", str(FIXTURES / "stub_chain.ll")]) == 0
    cap = capsys.readouterr().out.splitlines()
    assert "# Functions: 3" in cap[1]
    with pytest.raises(SystemExit):
        main(["stats", "--passes", "bogus", str(FIXTURES / "argc_phi.ll")])


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "cpgir", "stats", str(FIXTURES / "argc_phi.ll")],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "# Functions: 1" in r.stdout
