import itertools
import json
from importlib import resources

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qlw import formula as fm, hilbert as hb
from qlw.formula import elementaries, parse
from qlw.omlattice import NotOrthomodularError, boolean, mo, o6
from qlw.semantics import (BudgetExhausted, LawClass, SequentialFormulaError, UnassignedError, Valuation,
                           classify_law, evaluate, evaluate_subspaces, find_countermodel, holds,
                           is_formally_true, model_family, resolve_model)

from .conftest import formulas

DISTRIBUTIVE = "(A & (B | C)) -> ((A&B) | (A&C))"


def truth_value(f, env):
    """Classical two-valued semantics, the oracle for Boolean collapse."""
    if isinstance(f, fm.Elementary):
        return env[f.name]
    if isinstance(f, fm.Top):
        return True
    if isinstance(f, fm.Bottom):
        return False
    if isinstance(f, fm.Not):
        return not truth_value(f.child, env)
    a, b = truth_value(f.left, env), truth_value(f.right, env)
    if isinstance(f, fm.And):
        return a and b
    if isinstance(f, fm.Or):
        return a or b
    return (not a) or b


def tautology(f):
    names = sorted(elementaries(f))
    return all(truth_value(f, dict(zip(names, bits)))
               for bits in itertools.product([False, True], repeat=len(names)))


def as_set(label, n):
    return {"0": frozenset(), "1": frozenset("abc"[:n])}.get(label, frozenset(label))


def set_value(f, env, n):
    """Powerset semantics: meet = intersection, join = union, ortho = complement."""
    full = frozenset("abc"[:n])
    if isinstance(f, fm.Elementary):
        return env[f.name]
    if isinstance(f, fm.Top):
        return full
    if isinstance(f, fm.Bottom):
        return frozenset()
    if isinstance(f, fm.Not):
        return full - set_value(f.child, env, n)
    a, b = set_value(f.left, env, n), set_value(f.right, env, n)
    if isinstance(f, fm.And):
        return a & b
    if isinstance(f, fm.Or):
        return a | b
    return (full - a) | b


# ------------------------------------------------------------------ evaluate

def test_evaluate_examples():
    L = mo(2)
    assert evaluate("A | ~A", Valuation(L, {"A": "a"})) == "1"
    v = Valuation(L, {"A": "a", "B": "b"})
    assert evaluate("A & (B | ~B)", v) == "a"
    assert evaluate("(A&B) | (A&~B)", v) == "0"
    with pytest.raises(SequentialFormulaError):
        evaluate("A &> B", v)
    with pytest.raises(UnassignedError):
        evaluate("C", v)
    with pytest.raises(NotOrthomodularError):
        evaluate("A", Valuation(o6(), {"A": "a"}))
    with pytest.raises(KeyError):
        Valuation(L, {"A": "nope"})


def test_holds_examples():
    L = mo(2)
    for x in L.elements:
        v = Valuation(L, {"A": x})
        assert holds("implies", "A", "1", v)
        assert holds("implies", "0", "A", v)
        assert holds("proof_equiv", "A", "~~A", v) and holds("value_equiv", "A", "A & A", v)
    for x, y in itertools.product(L.elements, repeat=2):
        v = Valuation(L, {"A": x, "B": y})
        assert holds("implies", "A", "B", v) == (evaluate("A -> B", v) == "1")
        # A <= B defined as A == A & B
        assert holds("implies", "A", "B", v) == holds("proof_equiv", "A", "A & B", v)
    with pytest.raises(ValueError):
        holds("entails", "A", "B", Valuation(L, {"A": "a", "B": "a"}))


# ------------------------------------------------------------------ validity

@pytest.mark.parametrize("law", ["A -> A", "A | ~A", "~(A & ~A)", "(A & (A -> B)) -> B"])
def test_core_laws_are_formally_true(law):
    report = is_formally_true(law)
    assert report.valid is True and report.countermodel is None
    assert report.models_scanned == len(model_family().models)


def test_distributive_countermodel():
    report = find_countermodel(DISTRIBUTIVE)
    assert report.status == "invalid"
    cm = report.countermodel
    assert (cm.model, cm.assignment) == ("MO(2)", {"A": "a", "B": "b", "C": "b'"})
    L = resolve_model(cm.model)
    assert evaluate(DISTRIBUTIVE, Valuation(L, cm.assignment)) == cm.value != "1"


def test_countermodel_is_first_in_scan_order():
    # brute-force scan over the same family, in the documented order
    f = parse(DISTRIBUTIVE)
    first = None
    for L in model_family().models:
        for combo in itertools.product(L.elements, repeat=3):
            v = Valuation(L, dict(zip("ABC", combo)))
            if evaluate(f, v) != "1":
                first = (L.name, dict(zip("ABC", combo)))
                break
        if first:
            break
    cm = find_countermodel(f).countermodel
    assert (cm.model, cm.assignment) == first


@pytest.mark.parametrize("law", ["A -> A", "(A&B) -> (B&A)"])
def test_no_countermodel(law):
    assert find_countermodel(law).status == "valid"


def test_budget_exhaustion_is_inconclusive():
    report = find_countermodel("(A & B & C & D) -> A", budget=50)
    assert report.status == "inconclusive" and report.valid is None
    assert report.valuations_scanned == 50
    with pytest.raises(BudgetExhausted):
        classify_law("(A & B & C & D) -> A", budget=50)


def test_formula_without_elementaries():
    assert find_countermodel("1").status == "valid"
    assert find_countermodel("0 -> 1").status == "valid"
    r = find_countermodel("0")
    assert r.countermodel.assignment == {} and r.countermodel.model == "boolean(1)"


def test_sequential_rejected():
    with pytest.raises(SequentialFormulaError):
        find_countermodel("A &> B")


def test_families():
    assert [L.name for L in model_family("boolean").models] == ["boolean(1)", "boolean(2)", "boolean(3)"]
    assert len(model_family("oml").models) == 7
    assert len(model_family("default").models) == 10
    assert len(model_family("atomic").models) == 10
    assert model_family("default", seed=3).models[-1].name == "hilbert(d=3,rays=2,seed=3)"
    with pytest.raises(ValueError):
        model_family("all")
    with pytest.raises(ValueError):
        from qlw.semantics import ModelFamily
        ModelFamily("empty", ())
    with pytest.raises(NotOrthomodularError):
        from qlw.semantics import ModelFamily
        ModelFamily("bad", (o6(),))


def test_resolve_model_round_trips_names():
    for L in model_family("default").models:
        M = resolve_model(L.name)
        assert M.elements == L.elements and (M.leq == L.leq).all()


@pytest.mark.parametrize("law, expected", [
    (DISTRIBUTIVE, LawClass.CLASSICAL_ONLY),
    ("(A & (A -> B)) -> B", LawClass.QUANTUM_VALID),
    ("A -> ~A", LawClass.INVALID_EVERYWHERE),
])
def test_classify(law, expected):
    assert classify_law(law) is expected


def test_classify_invalid_everywhere_fails_in_boolean1():
    cm = find_countermodel("A -> ~A").countermodel
    assert (cm.model, cm.assignment) == ("boolean(1)", {"A": "1"})


def test_catalogue_classifications():
    data = json.loads((resources.files("qlw") / "data" / "laws.json").read_text())
    for entry in data["laws"]:
        assert classify_law(entry["formula"]).value == entry["expected"], entry["name"]


# ------------------------------------------------------------------ properties

@given(formulas(), st.sampled_from(model_family("default").models), st.data())
def test_hook_soundness(f, L, data):
    env = {n: data.draw(st.sampled_from(L.elements)) for n in "ABC"}
    v = Valuation(L, env)
    g = fm.Implies(f, fm.Elementary("A"))
    assert (evaluate(g, v) == "1") == L.le(evaluate(f, v), env["A"])


@given(formulas(), st.sampled_from([1, 2, 3]), st.data())
def test_boolean_collapse(f, n, data):
    L = boolean(n)
    env = {name: data.draw(st.sampled_from(L.elements)) for name in "ABC"}
    got = as_set(evaluate(f, Valuation(L, env)), n)
    assert got == set_value(f, {k: as_set(x, n) for k, x in env.items()}, n)


@given(formulas(max_leaves=8))
@settings(max_examples=100)
def test_boolean_family_validity_is_classical_tautology(f):
    assert find_countermodel(f, "boolean").valid == tautology(f)


def monotone_formulas():
    leaves = st.sampled_from("ABC").map(fm.Elementary)
    return st.recursive(leaves, lambda c: st.tuples(st.sampled_from([fm.And, fm.Or]), c, c)
                        .map(lambda t: t[0](t[1], t[2])), max_leaves=8)


@given(monotone_formulas(), st.sampled_from([mo(3), boolean(3)]), st.data())
def test_monotonicity(f, L, data):
    low, high = {}, {}
    for name in "ABC":
        x = data.draw(st.sampled_from(L.elements))
        y = data.draw(st.sampled_from([e for e in L.elements if L.le(x, e)]))
        low[name], high[name] = x, y
    assert L.le(evaluate(f, Valuation(L, low)), evaluate(f, Valuation(L, high)))


def test_quantum_valid_catalogue_laws_hold_on_random_subspaces():
    data = json.loads((resources.files("qlw") / "data" / "laws.json").read_text())
    laws = [parse(e["formula"]) for e in data["laws"] if e["expected"] == "quantum_valid"]
    rng = np.random.default_rng(2024)
    for f in laws:
        names = sorted(elementaries(f))
        for t in range(1000):
            d = int(rng.integers(2, 5))
            env = {n: hb.random_subspace(d, int(rng.integers(0, d + 1)), rng.integers(2**32)) for n in names}
            value = evaluate_subspaces(f, env, d=d)
            assert hb.equal(value, hb.full(d)), (f, t)


def test_evaluate_subspaces_distributive_witness():
    z, x = hb.ray([1, 0]), hb.ray([1, 1])
    value = evaluate_subspaces(DISTRIBUTIVE, {"A": x, "B": z, "C": hb.ortho(z)})
    assert value.dim == 1
