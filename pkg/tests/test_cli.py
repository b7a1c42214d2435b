import io
import json
import re
from pathlib import Path

import pytest

from germlab.cli import VERBS, run
from germlab.groups import builtin_group, group
from germlab.hausdorff import resolve_builtin_certificate, verify_certificate

DATA = Path(__file__).parent / "data"
README = Path(__file__).parent.parent / "README.md"


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    try:
        code = run(list(argv), out, err)
    except SystemExit as exc:
        code = exc.code
    doc = json.loads(out.getvalue()) if out.getvalue() else None
    return code, doc, err.getvalue()


def test_hausdorff_verify_builtin():
    code, doc, _ = call("hausdorff-verify", "--group", "builtin:K(00,1)", "--cert", "builtin:lemma5.3", "--depth", "30")
    assert code == 0 and doc["verdict"] == "pass" and doc["schema"] == "germlab/1"
    assert len(doc["levels"]) == 30


def test_nucleus_budget_is_not_an_error():
    code, doc, _ = call("nucleus", "--group", "builtin:M(3)", "--size-cap", "200", "--depth-cap", "12")
    assert code == 0 and doc["status"] == "budget_exceeded"


def test_eval_from_file():
    code, doc, err = call("eval", "--group", str(DATA / "k1.json"), "--element", "a1", "--word", "111")
    assert code == 0 and doc["image"] == "010" and "010" in err


@pytest.mark.parametrize(
    "argv,key,value",
    [
        (["section", "--group", "builtin:K(00,1)", "--element", "a1", "--vertex", "00"], "section", "b1"),
        (["identity", "--group", "builtin:K(00,1)", "--element", "a1^2"], "identity", True),
        (["order", "--group", "builtin:K(00,1)", "--element", "a1"], "order", 2),
        (["special-sets", "--group", "builtin:K(1)"], "n1", [{"element": "1", "word": "0"}]),
        (["quotient", "--group", "builtin:K()", "--level", "4"], "order", 16),
        (["stabilizer", "--group", "builtin:K()", "--vertex", "1"], "schreier_generators", ["a1^2"]),
        (["kernel-ball", "--group", "builtin:K()", "--ray", "(1)", "--level", "3", "--word-bound", "3"], "elements", ["1"]),
        (["hausdorff-search", "--group", "builtin:K()", "--word-bound", "2"], "certificates", []),
        (["lqa-search", "--group", "builtin:K()", "--word-bound", "2", "--depth", "5"], "witnesses", []),
        (["formula-check"], "passed", True),
    ],
)
def test_verbs(argv, key, value):
    code, doc, _ = call(*argv)
    assert code == 0 and doc[key] == value


def test_witness_check_inline_and_file(tmp_path):
    args = ["--group", "builtin:K(1)", "--ray", "(1)", "--level", "5", "--g", "(a1 a2)^-16 a2^4 (a1 a2)^16", "--h", "(a1 a2)^-32"]
    code, doc, _ = call("witness-check", *args)
    assert code == 0 and doc["accepted"] and doc["conjugate_section"] == "(a2 a1 a2^-1, 1)"
    path = tmp_path / "w.json"
    path.write_text(json.dumps({"group": "builtin:K(1)", "ray": "(1)", "level": 5, "g": "1", "h": "(a1 a2)^-32"}))
    code, doc, _ = call("witness-check", "--witness", str(path))
    assert code == 0 and not doc["accepted"] and doc["failed_clause"] == "c"


def test_activity_verb():
    code, doc, _ = call("activity", "--group", "builtin:M(3)")
    assert code == 0
    assert doc["elements"]["m3"]["counts"][:3] == [3, 5, 7]
    assert (doc["elements"]["m3"]["class"], doc["elements"]["m3"]["degree"]) == ("polynomial", 1)


@pytest.mark.parametrize(
    "ref,verdict",
    [("K(1)", "Hausdorff certified"), ("K(00,1)", "non-Hausdorff certified"), ("M(2)", "inconclusive"), ("M(3)", "non-Hausdorff certified")],
)
def test_report(ref, verdict):
    code, doc, _ = call("report", "--group", f"builtin:{ref}")
    assert code == 0 and doc["verdict"] == verdict
    if ref == "K(00,1)":
        assert "a1" in doc["witnesses"]
    if ref == "M(2)":
        assert "open" in doc["reason"]


def test_exit_codes(tmp_path):
    assert call("eval", "--group", "builtin:K(1)")[0] == 1
    assert call("eval", "--group", "missing.json", "--element", "a1", "--word", "1")[0] == 1
    assert call("eval", "--group", "builtin:K(0,0)", "--element", "a1", "--word", "1")[0] == 1
    assert call("eval", "--group", "builtin:K(1)", "--element", "q7", "--word", "1")[0] == 1
    assert call("hausdorff-verify", "--group", "builtin:K(1)", "--cert", "builtin:thm1.4")[0] == 1
    assert call("quotient", "--group", "builtin:K(1)", "--level", "20", "--cap", "1000")[0] == 2
    assert call("special-sets", "--group", "builtin:M(3)", "--size-cap", "50", "--depth-cap", "6")[0] == 2
    assert call("no-such-verb")[0] == 1


def test_determinism():
    argv = ["report", "--group", "builtin:K(00,1)"]
    a, b = io.StringIO(), io.StringIO()
    run(argv, a, io.StringIO())
    run(argv, b, io.StringIO())
    assert a.getvalue() == b.getvalue()


def test_every_verb_is_documented_and_registry_names_resolve():
    text = README.read_text()
    for verb in VERBS:
        assert f"`{verb}`" in text or f"germlab {verb}" in text
    for name in set(re.findall(r"builtin:((?:K|M)\([^)]*\)|odometer|grigorchuk)", text)):
        builtin_group(name)
    hosts = {"lemma5.3": "K(00,1)", "lemma5.5": "K(1,110)", "thm1.4": "M(3)"}
    for cert in set(re.findall(r"builtin:(lemma5\.3|lemma5\.5:a\d|thm1\.4)", text)):
        G = group("builtin:" + hosts[cert.split(":")[0]])
        assert verify_certificate(resolve_builtin_certificate(G, cert), 5).passed
