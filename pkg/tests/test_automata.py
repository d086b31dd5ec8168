import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersynth.automata import (
    Mode, SymbolicAutomaton, Tableau, Transition, compile_guard, dualize, guard_holds, ltl_to_nba,
    nba_accepts_lasso, to_dot, ucw_accepts_lasso, ucw_for,
)
from hypersynth.formula import TRUE, And, Atom, Globally, Not, Or, desugar_term, negate_to_nnf, parse_hyperltl
from hypersynth.semantics import enumerate_lassos, eval_body_on_zip, parse_lasso, zip_lassos

from strategies import bodies

A = Atom("a", "p")
B = Atom("b", "p")


def zipped(w, var="p"):
    return zip_lassos({var: w}, [var])


def nba(body):
    return ltl_to_nba(negate_to_nnf(negate_to_nnf(desugar_term(body))))


def test_true_has_one_accepting_state():
    a = ltl_to_nba(TRUE)
    assert a.size == 1 and a.marked == {0}
    assert nba_accepts_lasso(a, zipped(parse_lasso("; {}")))


def test_globally_eventually_examples():
    gf = nba(parse_hyperltl("forall p. G F a[p]").body)
    assert nba_accepts_lasso(gf, zipped(parse_lasso("{} ; {} {a}")))
    assert not nba_accepts_lasso(gf, zipped(parse_lasso("{a} ; {}")))
    fg = nba(parse_hyperltl("forall p. F G a[p]").body)
    assert nba_accepts_lasso(fg, zipped(parse_lasso("{} {} ; {a}")))
    assert not nba_accepts_lasso(fg, zipped(parse_lasso("; {a} {}")))


def test_guards():
    letter = frozenset({("a", "p")})
    assert guard_holds(And(A, Not(B)), letter)
    assert not guard_holds(Or(B, Not(A)), letter)
    fn = compile_guard(And(A, Not(B)), {A: 0, B: 1})
    assert fn(0b01) and not fn(0b11) and not fn(0)
    with pytest.raises(ValueError):
        compile_guard(A, {B: 0})
    with pytest.raises(TypeError):
        compile_guard(Globally(A), {A: 0})


def test_automaton_validation():
    with pytest.raises(ValueError):
        SymbolicAutomaton(("q0",), 1, (), frozenset(), Mode.NBA, frozenset())
    with pytest.raises(ValueError):
        SymbolicAutomaton(("q0",), 0, (Transition(0, A, 0),), frozenset(), Mode.NBA, frozenset())
    with pytest.raises(ValueError):
        SymbolicAutomaton(("q0",), 0, (Transition(0, TRUE, 3),), frozenset(), Mode.NBA, frozenset())


def test_dualize_checks_mode_and_roundtrips():
    a = nba(A)
    u = dualize(a)
    assert u.mode is Mode.UCW and u.marked == a.marked
    assert dualize(u, Mode.UCW) == a
    with pytest.raises(ValueError):
        dualize(u)
    with pytest.raises(ValueError):
        nba_accepts_lasso(u, zipped(parse_lasso("; {}")))
    with pytest.raises(ValueError):
        ucw_accepts_lasso(a, zipped(parse_lasso("; {}")))


def test_acceptance_needs_zipped_letters():
    with pytest.raises(ValueError, match="zip"):
        nba_accepts_lasso(nba(A), parse_lasso("; {a}"))


def test_guard_tables_agree_with_terms():
    body = negate_to_nnf(desugar_term(parse_hyperltl("forall p. G (a[p] -> X (b[p] U a[p]))").body))
    t = Tableau(body)
    assert t.tabular
    for q in range(t.size):
        for (term, target), (raw, target2) in zip(t.successors(q), t.raw_successors(q)):
            assert target == target2
            for m in range(4):
                letter = frozenset(x for j, x in enumerate(t.support) if m >> j & 1)
                letter = frozenset((x.ap, x.var) for x in letter)
                assert guard_holds(term, letter) == bool(raw >> m & 1)


def test_to_dot_mentions_every_state():
    a = nba(parse_hyperltl("forall p. a[p] U b[p]").body)
    dot = to_dot(a, "u")
    assert dot.startswith("digraph u {")
    for q in range(a.size):
        assert f"q{q} [" in dot


LASSOS = enumerate_lassos(["a", "b"], 2, 2)
PAIRS = [(x, y) for x in enumerate_lassos(["a"], 1, 2) for y in enumerate_lassos(["a"], 1, 2)]


@settings(max_examples=300, deadline=None)
@given(bodies(), st.sampled_from(LASSOS))
def test_nba_matches_semantics(body, w):
    d = desugar_term(body)
    expected = eval_body_on_zip(body, {"p": w})
    assert nba_accepts_lasso(ltl_to_nba(negate_to_nnf(negate_to_nnf(d))), zipped(w)) == expected
    assert ucw_accepts_lasso(ucw_for(d), zipped(w)) == expected
    assert ucw_accepts_lasso(dualize(ltl_to_nba(negate_to_nnf(d))), zipped(w)) == expected


@settings(max_examples=150, deadline=None)
@given(bodies(("p", "q"), ("a",), 3), st.sampled_from(PAIRS))
def test_two_variable_automata(body, pair):
    x, y = pair
    z = zip_lassos({"p": x, "q": y}, ["p", "q"])
    expected = eval_body_on_zip(body, {"p": x, "q": y})
    assert ucw_accepts_lasso(ucw_for(desugar_term(body)), z) == expected
