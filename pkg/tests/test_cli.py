import json
import subprocess
import sys
from importlib import resources

import pytest

from jacobel.cli import main
from jacobel.document import CORPUS_NAMES, corpus, parse_document
from jacobel.errors import InputError

CORPUS = resources.files("jacobel") / "corpus"


def path(name):
    return str(CORPUS / f"{name}.json")


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--json")
    return code, json.loads(out)


def write(tmp_path, data, name="doc.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return str(p)


def test_corpus_contents():
    docs = corpus()
    assert tuple(d.name for d in docs) == CORPUS_NAMES
    shapes = {d.name: (d.curve.p, len(d.curve.reducible_nodes), len(d.curve.irreducible_nodes))
              for d in docs}
    assert shapes["banana"] == (2, 2, 0)
    assert shapes["triangle"] == (3, 3, 0)
    assert shapes["loop"] == (1, 0, 1)
    assert shapes["theta"] == (2, 3, 0)
    assert shapes["chain4"] == (4, 3, 0)
    assert shapes["mixed"] == (2, 2, 1)
    for d in docs:
        assert d.line_bundle.total == d.curve.genus - d.polarization.slope


def test_validate_banana(capsys):
    code, cert = run_json(capsys, "validate", path("banana"))
    assert code == 0
    r = cert["results"]
    assert (r["components"], r["nodes"], r["reducible_nodes"], r["genus"]) == (2, 2, 2, 1)
    assert r["degree_ok"] and cert["warnings"] == []


def test_validate_degree_warning(capsys, tmp_path):
    doc = json.loads((CORPUS / "banana.json").read_text())
    doc["line_bundle"] = {"v1": 3, "v2": 0}
    code, cert = run_json(capsys, "validate", write(tmp_path, doc))
    assert code == 0
    assert not cert["results"]["degree_ok"]
    assert cert["warnings"]


@pytest.mark.parametrize("doc", [
    {"components": [{"name": "a"}], "nodes": [{"name": "x", "ends": ["a", "b"]}]},
    {"components": [{"name": "a"}, {"name": "b"}]},
    {"components": [{"name": "a"}], "line_bundle": {"a": 1, "z": 0}},
    {"components": [{"name": "a"}], "polarization": {"rank": 2, "multidegree": {"a": 1}}},
    {"components": [{"name": "a"}], "colour": "red"},
    {"components": [{"name": "a"}], "options": {"speed": 3}},
    "{ not json",
])
def test_bad_documents_exit_2(capsys, tmp_path, doc):
    code, _, err = run(capsys, "validate", write(tmp_path, doc))
    assert code == 2
    assert "input error" in err


def test_missing_file_exit_2(capsys, tmp_path):
    assert run(capsys, "validate", str(tmp_path / "nope.json"))[0] == 2


def test_stability_override(capsys):
    code, cert = run_json(capsys, "stability", path("banana"), "--multidegree", "0,0")
    assert code == 0 and cert["results"]["verdict"] == "stable"
    code, cert = run_json(capsys, "stability", path("banana"), "--multidegree=2,-2")
    assert code == 0
    assert cert["results"]["verdict"] == "not-semistable"
    assert cert["results"]["witness"] == ["v2"] and cert["results"]["witness_beta"] == "-1"


def test_stability_expect(capsys):
    assert run(capsys, "stability", path("banana"), "--multidegree=2,-2",
               "--expect", "quasistable")[0] == 1
    assert run(capsys, "stability", path("banana"), "--multidegree=1,-1",
               "--expect", "quasistable")[0] == 0
    assert run(capsys, "stability", path("banana"), "--multidegree=1,-1",
               "--expect", "stable")[0] == 1
    assert run(capsys, "stability", path("banana"), "--multidegree=-1,1",
               "--expect", "semistable-only")[0] == 0


def test_stability_bad_override(capsys):
    assert run(capsys, "stability", path("banana"), "--multidegree", "0,0,1")[0] == 2
    assert run(capsys, "stability", path("banana"), "--multidegree", "a,b")[0] == 2


def test_stability_default_class(capsys):
    code, cert = run_json(capsys, "stability", path("banana"), "--table")
    assert code == 0
    assert cert["results"]["multidegree"] == [0, 0]
    assert len(cert["results"]["beta_table"]) == 2


def test_twister_command(capsys):
    code, cert = run_json(capsys, "twister", path("banana"), "--oracle")
    assert code == 0
    assert [r["oracle"]["agrees"] for r in cert["results"]["twisters"]] == [True, True]
    assert len(cert["results"]["differences"]) == 2


def test_twister_violation_exit_1(capsys, tmp_path):
    doc = json.loads((CORPUS / "triangle.json").read_text())
    doc["polarization"] = {"rank": 2, "multidegree": {"v1": 1, "v2": 0, "v3": -1}}
    doc["line_bundle"] = {"v1": 1, "v2": 0, "v3": 0}
    doc["marked_point"] = "v2"
    code, cert = run_json(capsys, "twister", write(tmp_path, doc))
    assert code == 1
    bad = [d for d in cert["results"]["differences"] if "violation" in d]
    assert [(d["i"], d["j"]) for d in bad] == [("v1", "v3")]


def test_abel_banana(capsys):
    code, cert = run_json(capsys, "abel", path("banana"))
    assert code == 0
    recs = cert["results"]["records"]
    assert len(recs) == 4
    n1 = recs[2]
    assert n1["fiber"] == "C(1)"
    assert n1["mtilde"] == [0, -1, 1, 0] and n1["g_class"] == [1, 0, -1, 0]
    assert n1["pushforward"]["degrees"] == [1, 0]
    assert n1["pushforward"]["noninvertible"] == ["n1"]
    assert n1["stability"]["verdict"] == "P-quasistable"


def test_abel_smooth(capsys, tmp_path):
    p = write(tmp_path, {"components": [{"name": "v", "genus": 2}], "line_bundle": {"v": 2}})
    code, cert = run_json(capsys, "abel", p)
    assert code == 0 and len(cert["results"]["records"]) == 1


def test_abel_all_choices_and_oracle(capsys):
    code, cert = run_json(capsys, "abel", path("mixed"), "--all-choices", "--oracle")
    assert code == 0
    assert cert["results"]["all_choices"] == {"assignments": 4, "independent": True,
                                              "mismatches": []}
    assert cert["results"]["oracle"]["agrees"]


def test_abel_needs_right_degree(capsys, tmp_path):
    doc = json.loads((CORPUS / "banana.json").read_text())
    doc["line_bundle"] = {"v1": 0, "v2": 0}
    assert run(capsys, "abel", write(tmp_path, doc))[0] == 2


def test_abel_respects_document_choice(capsys, tmp_path):
    doc = json.loads((CORPUS / "banana.json").read_text())
    doc["desingularization"] = {"matchings": {"n1>n2": "parallel"}}
    code, cert = run_json(capsys, "abel", write(tmp_path, doc))
    assert code == 0
    assert cert["results"]["choice"] == {"n1>n2": "parallel", "n2>n1": "cross"}


def test_enumerate(capsys):
    code, cert = run_json(capsys, "enumerate", path("banana"))
    assert code == 0
    assert cert["results"]["semistable"] == [[-1, 1], [0, 0], [1, -1]]
    assert cert["results"]["quasistable"] == [[0, 0], [1, -1]]


def test_enumerate_cap(capsys, tmp_path):
    doc = json.loads((CORPUS / "chain4.json").read_text())
    doc["options"] = {"search_cap": 2}
    assert run(capsys, "enumerate", write(tmp_path, doc))[0] == 2


def test_human_output(capsys):
    code, out, _ = run(capsys, "abel", path("loop"))
    assert code == 0
    assert "C_R" in out and "[2, -1]" in out


def test_json_is_deterministic(capsys):
    outs = []
    for _ in range(2):
        main(["abel", path("chain4"), "--all-choices", "--json"])
        outs.append(capsys.readouterr().out)
    assert outs[0] == outs[1]


def test_parse_document_errors():
    with pytest.raises(InputError):
        parse_document([])
    with pytest.raises(InputError):
        parse_document({"nodes": []})
    with pytest.raises(InputError):
        parse_document({"components": [{"name": "a"}, {"name": "b"}],
                        "nodes": [{"name": "x", "ends": ["a", "b"]},
                                  {"name": "y", "ends": ["a", "b"]}],
                        "desingularization": {"matchings": {"x-y": "cross"}}})


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "jacobel.cli", "validate", path("loop")],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert "g=2" in out.stdout
