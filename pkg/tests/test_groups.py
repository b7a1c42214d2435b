import json

import pytest

from germlab import wreath
from germlab.groups import (
    Group,
    SpecError,
    build_grigorchuk,
    build_Kv,
    build_Kwv,
    build_Md,
    builtin_group,
    dump_spec,
    load_spec,
    parse_expr,
    resolve_group,
)
from germlab.wreath import apply, level_normal_form, section

K1_DOCUMENT = {
    "degree": 2,
    "generators": {
        "a1": {"perm": [1, 0], "sections": ["", "a2"]},
        "a2": {"perm": [0, 1], "sections": ["", "a1"]},
    },
}


def form(g, n=1):
    nf = level_normal_form(g, n)
    return nf.perm, nf.sections


def test_kv_examples():
    G = Group(build_Kv("1"))
    a1, a2, one = G.gen("a1"), G.gen("a2"), G.identity
    assert form(a1) == ((1, 0), {(0,): one, (1,): a2})
    assert form(a2) == ((0, 1), {(0,): one, (1,): a1})
    odo = Group(build_Kv(""))
    assert odo.spec.family == "odometer" and odo.names == ["a1"]
    assert form(odo.gen("a1")) == ((1, 0), {(0,): odo.identity, (1,): odo.gen("a1")})
    K0 = Group(build_Kv("0"))
    assert form(K0.gen("a2"))[1][(0,)] == K0.gen("a1")
    with pytest.raises(SpecError):
        build_Kv("012")


def test_kwv_examples():
    G = Group(build_Kwv("00", "1"))
    assert G.names == ["b1", "b2", "a1"]
    a1 = G.gen("a1")
    assert section(a1, (0,)) == G.gen("b2")
    assert section(a1, (0, 0)) == G.gen("b1")
    assert section(a1, (0, 1)) == G.identity
    assert section(a1, (1,)) == a1
    H = Group(build_Kwv("1", "0"))
    assert form(H.gen("a1")) == ((0, 1), {(0,): H.gen("a1"), (1,): H.gen("b1")})
    with pytest.raises(SpecError, match="y_k != x_n"):
        build_Kwv("0", "0")


def test_md_examples():
    G = Group(build_Md(3))
    m1, m2, m3 = (G.gen(f"m{i}") for i in (1, 2, 3))
    one = G.identity
    assert form(m3) == ((0, 1, 2), {(0,): m1, (1,): m2, (2,): m3})
    assert form(m2) == ((1, 0, 2), {(0,): one, (1,): m2, (2,): one})
    assert form(m1)[0] == (1, 2, 0)
    H = Group(build_Md(2))
    assert H.names == ["m1", "m2"]
    assert form(H.gen("m2"))[1] == {(0,): H.gen("m1"), (1,): H.gen("m2")}
    with pytest.raises(SpecError):
        build_Md(1)


def test_load_spec_examples():
    assert load_spec(K1_DOCUMENT) == build_Kv("1")
    bad = json.loads(json.dumps(K1_DOCUMENT))
    bad["generators"]["a2"]["sections"] = ["q", ""]
    with pytest.raises(SpecError, match="q"):
        load_spec(bad)
    bad = json.loads(json.dumps(K1_DOCUMENT))
    bad["generators"]["a1"]["perm"] = [0, 0]
    with pytest.raises(SpecError, match="not a bijection"):
        load_spec(bad)
    bad = json.loads(json.dumps(K1_DOCUMENT))
    bad["generators"]["a1"]["sections"] = ["", "a2", ""]
    with pytest.raises(SpecError, match="degree"):
        load_spec(bad)


@pytest.mark.parametrize("ref", ["K()", "K(1)", "K(01)", "K(00,1)", "K(11,0)", "K(1,110)", "M(2)", "M(3)", "M(5)", "grigorchuk", "odometer"])
def test_round_trip(ref):
    spec = builtin_group(ref)
    again = load_spec(json.dumps(dump_spec(spec)))
    assert again == spec
    assert again.family == spec.family and again.params == spec.params


def test_closure_is_syntactic():
    for ref in ("K(1)", "K(00,1)", "M(4)", "grigorchuk"):
        spec = builtin_group(ref)
        for g in spec.generators.values():
            for sec in g.sections:
                assert all(name in spec.generators for name, _ in sec)


def test_odometer_adds_one():
    a1 = Group(build_Kv("")).gen("a1")
    for k in range(11):
        for tail in ((), (0,), (1, 1, 0)):
            assert apply(a1, (1,) * k + (0,) + tail) == (0,) * k + (1,) + tail


def test_registry():
    assert resolve_group("builtin:K(00,1)") == build_Kwv("00", "1")
    assert builtin_group("grigorchuk") == build_grigorchuk()
    for bad in ("K(2)", "Q(1)", "M(x)", "K(0,0)"):
        with pytest.raises(SpecError):
            builtin_group(bad)


def test_word_syntax():
    G = Group(build_Kv("1"))
    assert G.element("a1 a2^-1 a1") == G.gen("a1") * G.gen("a2").inverse() * G.gen("a1")
    assert G.element("(a1 a2)^3") == wreath.power(G.element("a1 a2"), 3)
    assert G.element("") == G.element("1") == G.identity
    with pytest.raises(SpecError):
        parse_expr("a1 q", G.names)
    with pytest.raises(SpecError):
        parse_expr("(a1", G.names)


def test_ball_is_shortlex_and_distinct():
    G = Group(build_Kv(""))
    ball = G.ball(3)
    assert [g.label for g in ball] == ["1", "a1", "a1^-1", "a1^2", "a1^-2", "a1^3", "a1^-3"]
