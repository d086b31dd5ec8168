import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersynth.automata import Mode, SymbolicAutomaton, Transition, ucw_for
from hypersynth.formula import TRUE, desugar_term, forall, parse_hyperltl
from hypersynth.semantics import LassoTrace, enumerate_lassos, eval_formula, parse_lasso, unzip_lasso, zip_lassos
from hypersynth.tsys import (
    Semantics, TransitionSystem, build_run_graph, check_annotation, constant_system, enumerate_systems,
    find_annotation, find_rejecting_lasso, from_json, generated_trace, letter_of, mask_of, model_check,
    self_compose, to_dot, to_json,
)

from strategies import bodies


def echo():
    """Moore system whose output o copies the previous input i."""
    return TransitionSystem(("i",), ("o",), Semantics.MOORE, ((0, 1), (0, 1)), (0, 1))


def test_masks():
    assert mask_of({"b"}, ("a", "b")) == 2
    assert letter_of(3, ("a", "b")) == {"a", "b"}
    with pytest.raises(ValueError):
        mask_of({"c"}, ("a",))


def test_validation():
    with pytest.raises(ValueError):
        TransitionSystem(("i",), ("o",), Semantics.MOORE, (), ())
    with pytest.raises(ValueError):
        TransitionSystem(("i",), ("o",), Semantics.MOORE, ((0,),), (0,))
    with pytest.raises(ValueError):
        TransitionSystem(("i",), ("o",), Semantics.MOORE, ((0, 2),), (0,))
    with pytest.raises(ValueError):
        TransitionSystem(("i",), ("i",), Semantics.MOORE, ((0, 0),), (0,))
    with pytest.raises(ValueError):
        TransitionSystem(("i",), ("o",), Semantics.MEALY, ((0, 0),), ((0,),))


def test_constant_system_trace():
    t = constant_system(["r"], ["g"], ["g"])
    assert generated_trace(t, parse_lasso("; {}")) == parse_lasso("; {g}")


def test_generated_trace_and_run():
    t = echo()
    assert t.run([{"i"}, set(), set()]) == [frozenset({"i"}), frozenset({"o"}), frozenset()]
    w = generated_trace(t, parse_lasso("; {i} {}"))
    assert w.same_word(LassoTrace([], [{"i"}, {"o"}]))


def test_mealy_view_of_moore():
    t = echo()
    m = t.to_mealy()
    for w in enumerate_lassos(["i"], 1, 2):
        assert generated_trace(t, w) == generated_trace(m, w)


def test_self_composition_shape():
    t = echo()
    t2 = self_compose(t, 2)
    assert t2.size == 4
    assert t2.inputs == (("i", "pi1"), ("i", "pi2"))
    assert t2.reachable() == set(range(4))
    with pytest.raises(ValueError):
        self_compose(t, 0)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(enumerate_lassos(["i"], 1, 2)), st.sampled_from(enumerate_lassos(["i"], 1, 2)))
def test_self_composition_commutes_with_traces(x, y):
    t = echo()
    t2 = self_compose(t, ["p", "q"])
    z = {"p": x, "q": y}
    zipped = zip_lassos(z, ["p", "q"])
    got = unzip_lasso(generated_trace(t2, zipped), ["p", "q"])
    assert got["p"].same_word(generated_trace(t, x))
    assert got["q"].same_word(generated_trace(t, y))


def test_run_graph_of_trivial_pair():
    t = constant_system(["r"], ["g"], ["g"])
    loop = SymbolicAutomaton(("q0",), 0, (Transition(0, TRUE, 0),), frozenset(), Mode.UCW, frozenset())
    g = build_run_graph(self_compose(t, ["pi"]), loop)
    assert len(g.vertices) == 1 and g.succ == [[0]] and not g.rejecting
    ann = find_annotation(g)
    assert ann is not None and check_annotation(g, ann)


def test_annotation_and_lasso_are_exclusive():
    f = parse_hyperltl("forall p. G (i[p] -> X o[p])")
    tn = self_compose(echo(), f.variables)
    g = build_run_graph(tn, ucw_for(desugar_term(f.body)))
    assert find_rejecting_lasso(g) is None
    ann = find_annotation(g)
    assert check_annotation(g, ann)
    bad = parse_hyperltl("forall p. G (i[p] -> o[p])")
    g = build_run_graph(self_compose(echo(), bad.variables), ucw_for(desugar_term(bad.body)))
    assert find_annotation(g) is None
    lasso = find_rejecting_lasso(g)
    assert lasso.cycle and g.rejecting & set(lasso.cycle)


def test_model_check_examples():
    assert model_check(constant_system(["r"], ["g"]), forall("pi", body=TRUE))
    t = echo()
    assert model_check(t, parse_hyperltl("forall p. G (i[p] <-> X o[p])"))
    v = model_check(t, parse_hyperltl("forall p. forall q. G (o[p] <-> o[q])"))
    assert not v
    f = parse_hyperltl("forall p. forall q. G (o[p] <-> o[q])")
    assert not eval_formula(f, [generated_trace(t, w) for w in _inputs(v)])
    with pytest.raises(ValueError):
        model_check(t, parse_hyperltl("exists p. o[p]"))
    with pytest.raises(ValueError):
        model_check(t, parse_hyperltl("forall p. x[p]"))


def _inputs(v):
    return [LassoTrace([x & {"i"} for x in w.stem], [x & {"i"} for x in w.loop]) for w in v.witnesses]


def test_json_roundtrip():
    t = echo()
    assert from_json(to_json(t)) == t
    m = t.to_mealy()
    assert from_json(to_json(m)) == m
    with pytest.raises(ValueError):
        from_json({"semantics": "moore"})


def test_dot_export():
    dot = to_dot(echo())
    assert dot.count("->") == 1 + 4
    assert "{o}" in dot


def test_enumeration_counts():
    assert sum(1 for _ in enumerate_systems(["i"], ["o"], 1)) == 2
    assert sum(1 for _ in enumerate_systems(["i"], ["o"], 2)) == 16 * 4
    assert sum(1 for _ in enumerate_systems(["i"], ["o"], 1, Semantics.MEALY)) == 4


SYSTEMS = list(enumerate_systems(["i"], ["o"], 1)) + list(enumerate_systems(["i"], ["o"], 2))
PROBES = enumerate_lassos(["i"], 2, 2)


@settings(max_examples=120, deadline=None)
@given(bodies(("p", "q"), ("i", "o"), 2), st.sampled_from(SYSTEMS), st.randoms(use_true_random=False))
def test_model_check_against_lasso_semantics(body, t, rng):
    f = forall("p", "q", body=body)
    v = model_check(t, f)
    if not v:
        assert not eval_formula(f, [generated_trace(t, w) for w in _inputs(v)])
    else:
        for x, y in (rng.sample(PROBES, 2) for _ in range(10)):
            assert eval_formula(f, [generated_trace(t, x), generated_trace(t, y)])
