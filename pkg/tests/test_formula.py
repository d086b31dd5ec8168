import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypersynth.formula import (
    FALSE, TRUE, AlphabetSpec, And, Atom, Const, Eventually, Formula, Globally, Iff, Implies, Next, Not, Or,
    ParseError, PCPInstance, PrefixClass, Quant, Release, Until, WeakUntil, collapse, conj, desugar_term,
    encode_pcp, exists, forall, format_formula, independence, is_kernel, is_nnf, negate_to_nnf, parse_hyperltl,
    parse_ltl, pcp_prop, prefix_class, reduce1, rename, subterms,
)
from hypersynth.semantics import enumerate_lassos, eval_body_on_zip, eval_formula

from strategies import bodies

AB = AlphabetSpec({"a"}, {"b"})


def a(v="p"):
    return Atom("a", v)


def b(v="p"):
    return Atom("b", v)


# ---------------------------------------------------------------------------
# parsing and printing


def test_parse_single_quantifier():
    f = parse_hyperltl("forall p1. G a[p1]")
    assert f == forall("p1", body=Globally(Atom("a", "p1")))


def test_parse_two_variable_equivalence():
    f = parse_hyperltl("forall p1. forall p2. G (a[p1] <-> a[p2])")
    assert f.variables == ("p1", "p2")
    assert f.body == Globally(Iff(Atom("a", "p1"), Atom("a", "p2")))


def test_parse_mixed_prefix():
    f = parse_hyperltl("forall p. exists q. F (i[p] <-> i[q])")
    assert f.prefix == ((Quant.FORALL, "p"), (Quant.EXISTS, "q"))


def test_precedence_and_associativity():
    f = parse_hyperltl("forall p. a[p] && b[p] || !a[p] -> b[p] U a[p] U b[p]")
    left = Or(And(a(), b()), Not(a()))
    assert f.body == Implies(left, Until(b(), Until(a(), b())))
    g = parse_hyperltl("forall p. a[p] -> b[p] -> a[p]")
    assert g.body == Implies(a(), Implies(b(), a()))


def test_parse_errors_carry_position():
    with pytest.raises(ParseError) as e:
        parse_hyperltl("forall p.\n  G (a[p] && )")
    assert e.value.line == 2
    with pytest.raises(ValueError, match="unbound"):
        parse_hyperltl("forall p. a[q]")
    with pytest.raises(ValueError):
        parse_hyperltl("forall p. c[p]", AB)
    with pytest.raises(ValueError, match="quantified twice"):
        parse_hyperltl("forall p. forall p. a[p]")


def test_parse_ltl_uses_implicit_variable():
    t = parse_ltl("G (a -> X b)", AB, var="pi")
    assert t == Globally(Implies(Atom("a", "pi"), Next(Atom("b", "pi"))))


@settings(max_examples=300, deadline=None)
@given(bodies(("p", "q")))
def test_print_parse_roundtrip(body):
    f = Formula(((Quant.FORALL, "p"), (Quant.EXISTS, "q")), body)
    assert parse_hyperltl(format_formula(f)) == f


# ---------------------------------------------------------------------------
# desugaring and negation normal form


def test_desugar_examples():
    assert desugar_term(Eventually(a())) == Until(TRUE, a())
    assert desugar_term(Globally(a())) == Release(FALSE, a())
    assert desugar_term(WeakUntil(a(), b())) == Or(Release(FALSE, a()), Until(a(), b()))


def test_negate_to_nnf_examples():
    assert negate_to_nnf(Until(a(), b())) == Release(Not(a()), Not(b()))
    assert negate_to_nnf(Not(a())) == a()
    assert negate_to_nnf(And(a(), Next(b()))) == Or(Not(a()), Next(Not(b())))


LASSOS = enumerate_lassos(["a", "b"], 2, 2)


@settings(max_examples=150, deadline=None)
@given(bodies(), st.sampled_from(LASSOS))
def test_desugar_preserves_meaning_and_is_idempotent(body, w):
    d = desugar_term(body)
    assert is_kernel(d)
    assert desugar_term(d) == d
    assert eval_body_on_zip(d, {"p": w}) == eval_body_on_zip(body, {"p": w})


@settings(max_examples=150, deadline=None)
@given(bodies(), st.sampled_from(LASSOS))
def test_negate_to_nnf_negates(body, w):
    n = negate_to_nnf(desugar_term(body))
    assert is_nnf(n)
    assert eval_body_on_zip(n, {"p": w}) == (not eval_body_on_zip(body, {"p": w}))


# ---------------------------------------------------------------------------
# macros and prefix classes


def test_independence_shapes():
    assert independence({"i"}, {"o"}, "p", "q") == Release(
        Not(Iff(Atom("i", "p"), Atom("i", "q"))), Iff(Atom("o", "p"), Atom("o", "q"))
    )
    assert independence(set(), {"o"}, "p", "q") == Release(FALSE, Iff(Atom("o", "p"), Atom("o", "q")))
    assert independence({"a", "b"}, set(), "p", "q").right == TRUE
    with pytest.raises(ValueError, match="overlap"):
        independence({"a"}, {"a"})


@pytest.mark.parametrize(
    "text, expected",
    [
        ("forall p. forall q. a[p]", PrefixClass.FORALL_MANY),
        ("exists p. forall q. a[p]", PrefixClass.EXISTS_FORALL1),
        ("forall p. exists q. a[p]", PrefixClass.FORALL_EXISTS),
        ("forall p. a[p]", PrefixClass.FORALL1),
        ("exists p. exists q. a[p]", PrefixClass.EXISTS),
        ("exists p. forall q. forall r. a[p]", PrefixClass.EXISTS_FORALL_MANY),
        ("forall p. exists q. forall r. a[p]", PrefixClass.OTHER),
        ("true", PrefixClass.EXISTS),
    ],
)
def test_prefix_class(text, expected):
    assert prefix_class(parse_hyperltl(text)) is expected


# ---------------------------------------------------------------------------
# collapse and 1-reduction


def test_collapse_examples():
    f = parse_hyperltl("forall p1. forall p2. G a[p1] || G a[p2]")
    assert collapse(f, "pi") == forall("pi", body=Or(Globally(Atom("a", "pi")), Globally(Atom("a", "pi"))))
    g = parse_hyperltl("forall p1. forall p2. G (a[p1] <-> a[p2])")
    assert collapse(g).body == Globally(Iff(Atom("a", "pi"), Atom("a", "pi")))
    h = parse_hyperltl("forall p. F a[p]")
    assert collapse(h, "r") == forall("r", body=Eventually(Atom("a", "r")))
    with pytest.raises(ValueError):
        collapse(parse_hyperltl("exists p. a[p]"))


def test_collapse_is_idempotent():
    f = parse_hyperltl("forall p. forall q. a[p] U b[q]")
    once = collapse(f)
    assert collapse(once) == once


def _conjuncts(t):
    return _conjuncts(t.left) + _conjuncts(t.right) if isinstance(t, And) else [t]


def test_reduce1_examples():
    f = parse_hyperltl("forall p1. forall p2. G (a[p1] <-> a[p2])")
    assert reduce1(f) == forall("p1", body=Globally(Iff(Atom("a", "p1"), Atom("a", "p1"))))
    g = parse_hyperltl("forall x. forall y. forall z. G (a[x] -> a[y] || a[z])")
    r = reduce1(g)
    assert r.variables == ("x", "y")
    assert len(_conjuncts(r.body)) == 3
    with pytest.raises(ValueError):
        reduce1(parse_hyperltl("forall p. a[p]"))


SINGLE = enumerate_lassos(["a"], 1, 2)


@settings(max_examples=100, deadline=None)
@given(bodies(("p", "q"), ("a",), 2), st.sampled_from(SINGLE))
def test_singleton_agreement_with_collapse(body, t):
    f = forall("p", "q", body=body)
    assert eval_formula(f, [t]) == eval_formula(collapse(f), [t])


@settings(max_examples=60, deadline=None)
@given(bodies(("p", "q", "r"), ("a",), 2), st.lists(st.sampled_from(SINGLE), min_size=1, max_size=2))
def test_reduce1_agrees_on_small_sets(body, traces):
    f = forall("p", "q", "r", body=body)
    assert eval_formula(f, traces) == eval_formula(reduce1(f), traces)


# ---------------------------------------------------------------------------
# PCP encoding


THREE_STONES = PCPInstance(["a", "b"], ["a", "ab", "bba"], ["baa", "aa", "bb"])


def test_pcp_alphabet_and_prefix():
    f, alphabet = encode_pcp(THREE_STONES)
    assert alphabet.inputs == {"i"}
    assert len(alphabet.outputs) == 25
    assert pcp_prop("a_dot", "hash") in alphabet.outputs
    assert prefix_class(f) is PrefixClass.FORALL_EXISTS


def test_pcp_relevance_subformula_is_verbatim():
    f, _ = encode_pcp(THREE_STONES)
    rel = Until(Not(Atom("i", "pi")), Globally(Atom("i", "pi")))
    assert rel in set(subterms(f.body))


def test_pcp_known_solution():
    assert THREE_STONES.is_solution([3, 2, 3, 1])
    assert not THREE_STONES.is_solution([1, 2])


def test_pcp_rejects_malformed():
    with pytest.raises(ValueError):
        PCPInstance(["a"], [], [])
    with pytest.raises(ValueError):
        PCPInstance(["a"], ["a"], ["a", "a"])
    with pytest.raises(ValueError):
        PCPInstance(["a"], ["c"], ["a"])


def test_pcp_one_stone_instance():
    f, alphabet = encode_pcp(PCPInstance(["a"], ["a"], ["a"]))
    assert PCPInstance(["a"], ["a"], ["a"]).is_solution([1])
    assert len(alphabet.outputs) == 9
    assert parse_hyperltl(format_formula(f), alphabet) == f


def test_rename_and_conj_helpers():
    t = rename(And(a("p"), b("q")), {"p": "x"})
    assert t == And(a("x"), b("q"))
    assert conj([]) == TRUE
    assert Const(True) == TRUE
    assert exists("p", body=a()).is_existential()
    assert list(itertools.islice(subterms(t), 1)) == [t]
