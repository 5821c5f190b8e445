import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from weakstat.dsl import DslError, load, parse, reference_source, to_source
from weakstat.dsl.elaborate import gell_mann_element
from weakstat.dsl.syntax import (
    BinOp,
    Const,
    Decl,
    GellMann,
    Identity,
    Imag,
    Ket,
    Neg,
    Num,
    Outer,
    Pauli,
    Ref,
    ScenarioDoc,
    Sqrt,
)
from weakstat.operators import gell_mann
from weakstat.scenarios import bell_chsh_scenario, double_slit_scenario, entangled_scenario

from conftest import check_positions, fuzz_sources

REFERENCES = ("bell", "double_slit", "entangled")


def _errors(text):
    with pytest.raises(DslError) as info:
        load(text)
    return [str(d) for d in info.value.errors]


def _max_diff(pairs):
    return max(float(np.max(np.abs(np.asarray(a) - np.asarray(b)))) for a, b in pairs)


# built-in equivalence


def _outcome_ops(sc):
    return [p for outcomes in sc.measurements.values() for p in outcomes.values()]


def test_bell_reference_matches_builtin():
    sc = load(reference_source("bell"), "bell")
    ref = bell_chsh_scenario()
    pairs = [(sc.initial, ref.initial)]
    pairs += zip(_outcome_ops(sc), _outcome_ops(ref))
    pairs += zip(sc.probes.values(), ref.probes.values())
    assert len(_outcome_ops(sc)) == 4 and len(sc.probes) == 4
    assert _max_diff(pairs) <= 1e-12
    assert len(sc.queries) == 16


def test_double_slit_reference_matches_builtin():
    sc = load(reference_source("double_slit"), "double_slit")
    ref = double_slit_scenario()
    pairs = [(sc.initial, ref.initial)]
    pairs += zip(_outcome_ops(sc), _outcome_ops(ref))
    pairs += zip(sc.probes.values(), ref.probes.values())
    assert _max_diff(pairs) <= 1e-12
    assert sc.warnings == ("3:13: warning: ket normalized (norm was 1.41421)",)


def test_entangled_reference_matches_builtin():
    sc = load(reference_source("entangled"), "entangled")
    ref = entangled_scenario(2)
    pairs = [(sc.initial, ref.initial)]
    pairs += zip(_outcome_ops(sc), _outcome_ops(ref))
    pairs += zip(sc.probes.values(), ref.probes.values())
    assert _max_diff(pairs) <= 1e-12
    assert (sc.dim_a, sc.dim_b) == (2, 2)


@pytest.mark.parametrize("name", REFERENCES)
def test_reference_round_trip(name):
    doc = parse(reference_source(name))
    again = parse(to_source(doc))
    assert again == doc
    assert to_source(again) == to_source(doc)


def test_bell_reference_declaration_count():
    doc = parse(reference_source("bell"))
    assert len(doc) == 28
    kinds = [d.kind for d in doc.declarations]
    assert kinds.count("pvm") == 2 and kinds.count("query") == 16
    assert doc.source_spans[("dim", "dim")].line == 6


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_gell_mann_atoms_match_operators(d):
    for k, (_, m) in enumerate(gell_mann(d), start=1):
        assert np.array_equal(gell_mann_element(d, k), m)


# parse results and diagnostics


def test_empty_input():
    with pytest.raises(DslError) as info:
        parse("")
    assert str(info.value.diagnostics[0]) == "1:1: error: expected at least one declaration"
    with pytest.raises(DslError):
        parse("# only a comment\n\n")


def test_dangling_operator():
    with pytest.raises(DslError) as info:
        parse("state psi = ket[1, 1]/")
    d = info.value.errors[0]
    assert (d.line, d.column) == (1, 22)
    assert "'/'" in d.message


def test_ket_normalization_warning():
    sc = load("dim 2\nstate psi = ket[1, 1]\nop a = I2\npvm m = {a}\n")
    assert np.allclose(sc.initial, np.full((2, 2), 0.5))
    assert len(sc.warnings) == 1 and "normalized" in sc.warnings[0]


def test_semantic_diagnostics():
    base = "dim 2\nstate p = ket[1, 0]\nop a = outer(ket[1, 0], ket[1, 0])\nop b = outer(ket[0, 1], ket[0, 1])\n"
    assert _errors(base + "pvm m = {a}\n") == [
        "5:1: error: PVM incomplete: projectors of 'm' do not sum to the identity"
    ]
    assert _errors(base + "pvm m = {a, b}\nprobe x = outer(ket[1, 0], ket[0, 1])\n") == [
        "6:1: error: probe 'x' is not Hermitian"
    ]
    assert _errors("dim 2\nstate p = ket[1, 0, 0]\nop a = I2\npvm m = {a}\n") == [
        "2:1: error: state 'p' has dimension 3, scenario has 2"
    ]
    assert _errors(base + "pvm m = {a, b}\nprobe x = X\nquery q = cond(zz, x)\n") == [
        "7:16: error: 'zz' is not an outcome of any declared pvm"
    ]
    assert _errors("dim 2\nop X = I2\n")[0] == "2:4: error: 'X' is a reserved word and cannot be used as a name"
    assert _errors("dim 2\nstate p = ket[1, 0] $\n")[0] == "2:21: error: unexpected character '$'"
    assert _errors("op a = I2\n") == ["1:1: error: missing 'dim' declaration"]
    errs = _errors(base + "pvm m = {a, b}\nprobe x = q + X\n")
    assert errs == ["6:11: error: undefined name 'q'"]
    errs = _errors(base + "pvm m = {a, b}\nprobe x = X / 0\n")
    assert errs == ["6:11: error: division by zero"]


def test_duplicate_declaration_reported_once():
    errs = _errors("dim 2\nstate p = ket[1, 0]\nstate p = ket[0, 1]\nop a = I2\npvm m = {a}\n")
    assert errs == ["3:1: error: 'p' is already declared as state at 2:1"]


def test_all_bad_lines_are_reported():
    src = "dim 2\nstate p = ket[1, 0\nop a = * X\nop b = I2\npvm m = {b}\n"
    with pytest.raises(DslError) as info:
        load(src)
    lines = {d.line for d in info.value.errors}
    assert {2, 3} <= lines


def test_operator_expressions():
    src = """dim 2x2
state e = maxent 2
op a = (I2 + Z) / 2 kron I2
op b = (I2 - Z) / 2 ⊗ I2
pvm m = {a, b}
probe p = 0.5 + 0.5 * (X ⊗ X)
probe q = outer(ket[1, 0, 0, 0], ket[1, 0, 0, 0]) * (2 + 0i) / 2
probe r = gellmann(4, 3) * sqrt(2) - 1.5 * I4 + pi - pi
query j = joint(a, p)
"""
    sc = load(src)
    assert np.allclose(sc.probes["p"], 0.5 * np.eye(4) + 0.5 * np.kron([[0, 1], [1, 0]], [[0, 1], [1, 0]]))
    assert sc.probes["q"][0, 0] == 1
    assert sc.queries[0].kind == "joint"


def test_complex_literals():
    sc = load("dim 2\nstate p = ket[1, 0]\nop a = I2\npvm m = {a}\nprobe y = 2i * outer(ket[0, 1], ket[1, 0]) - 2 * i * outer(ket[1, 0], ket[0, 1])\n")
    assert np.allclose(sc.probes["y"], [[0, -2j], [2j, 0]])


# fuzzing


def test_fuzz_token_mutations():
    diagnosed = 0
    for text in fuzz_sources(1000, seed=20240611):
        try:
            load(text)
        except DslError as exc:
            assert exc.errors, "a DslError must carry at least one error"
            check_positions(text, exc.diagnostics)
            diagnosed += 1
    assert diagnosed > 500


@given(st.text(alphabet="dimstaeopqury =,[](){}+-*/⊗#\n0123456789.xXYZIi", max_size=80))
def test_arbitrary_text_never_crashes(text):
    try:
        load(text)
    except DslError as exc:
        assert exc.errors
        check_positions(text, exc.diagnostics)


def test_deep_nesting_is_diagnosed():
    with pytest.raises(DslError):
        parse("dim 2\nop a = " + "(" * 5000 + "X" + ")" * 5000 + "\n")


# printer round trip on generated trees

_names = st.sampled_from(["a", "b2", "psi_1", "Zed"])
_leaves = st.one_of(
    st.floats(0, 1e6, allow_nan=False).map(Num),
    st.floats(0, 1e6, allow_nan=False).map(Imag),
    st.sampled_from(["i", "pi"]).map(Const),
    st.integers(1, 9).map(Identity),
    st.sampled_from("XYZ").map(Pauli),
    st.tuples(st.integers(2, 5), st.integers(1, 24)).map(lambda t: GellMann(*t)),
    _names.map(Ref),
)


def _extend(children):
    return st.one_of(
        children.map(Neg),
        children.map(Sqrt),
        st.lists(children, min_size=1, max_size=3).map(lambda xs: Ket(tuple(xs))),
        st.tuples(children, children).map(lambda t: Outer(*t)),
        st.tuples(st.sampled_from(["+", "-", "*", "/", "kron"]), children, children).map(lambda t: BinOp(*t)),
    )


_exprs = st.recursive(_leaves, _extend, max_leaves=12)


@given(st.lists(st.tuples(st.sampled_from(["op", "probe", "state"]), _names, _exprs), min_size=1, max_size=4))
def test_printer_round_trip(decls):
    doc = ScenarioDoc(tuple(Decl(k, n, e) for k, n, e in decls))
    assert parse(to_source(doc)) == doc
