import time

import pytest

from hypersynth.counterex import (
    build_counterexample_problem, candidate_systems, closed_loop, component, counterexample_at,
    find_counterexample, nondeterminism, spec_formula, verify_counterexample,
)
from hypersynth.formula import AlphabetSpec, Atom, Iff, Until, parse_hyperltl
from hypersynth.semantics import eval_formula, format_lasso
from hypersynth.synth import Interrupted, synthesize
from hypersynth.tsys import Semantics, constant_system, enumerate_systems

IO = AlphabetSpec({"i"}, {"o"})
PHI1 = parse_hyperltl("forall p. forall q. F (i[p] <-> i[q])")
PHI2 = parse_hyperltl("forall p. forall q. G (o[p] <-> o[q]) && G (i[p] <-> X o[p])")
PREDICT = parse_hyperltl("forall pi. F (i[pi] <-> o[pi])")


def inputs_only(w):
    return format_lasso(w.canonical()).replace("o,", "").replace(",o", "").replace("{o}", "{}")


def test_problem_shape():
    p = build_counterexample_problem(PHI1, 2, IO)
    assert p.observed == ("o_c1", "o_c2") and p.emitted == ("i_c1", "i_c2")
    assert p.selections == ((1, 1), (1, 2), (2, 1), (2, 2))
    assert p.disjuncts == 5
    assert p.instance(1).semantics is Semantics.MEALY
    with pytest.raises(ValueError):
        build_counterexample_problem(PHI1, 1, IO)
    with pytest.raises(ValueError):
        build_counterexample_problem(parse_hyperltl("exists p. i[p]"), 1, IO)
    with pytest.raises(ValueError):
        p.restrict((3, 3))


def test_attempts_rank_distinct_components_first():
    p = build_counterexample_problem(PHI1, 2, IO)
    picks = [a.selections for a in p.attempts()]
    assert picks[:2] == [((1, 2),), ((2, 1),)]
    assert picks[-1] == p.selections


def test_nondeterminism_formula():
    c = lambda ap, j: Atom(component(ap, j), "pi")  # noqa: E731
    moore = nondeterminism(["i"], ["o"], 2, Semantics.MOORE)
    assert isinstance(moore, Until) and moore.left == Iff(c("i", 1), c("i", 2))
    mealy = nondeterminism(["i"], ["o"], 2, Semantics.MEALY)
    assert mealy.right.left == Iff(c("i", 1), c("i", 2))


def test_phi1_counterexample():
    start = time.monotonic()
    cs = find_counterexample(PHI1, 2, 2, IO)
    assert cs is not None and cs.k == 2
    for t in enumerate_systems(["i"], ["o"], 1):
        traces = closed_loop(cs, t)
        assert {inputs_only(w) for w in traces} == {"; {}", "; {i}"}
    assert time.monotonic() - start < 30


def test_phi2_counterexample():
    cs = find_counterexample(PHI2, 2, 2, IO)
    assert cs is not None and cs.k == 2
    assert verify_counterexample(cs, PHI2, candidate_systems(["i"], ["o"], Semantics.MOORE, samples=80, seed=3))


def test_predict_inverts_outputs():
    cs = find_counterexample(PREDICT, 1, 2, IO)
    assert cs is not None and cs.k == 1
    env = cs.system
    for s in env.reachable():
        for m in range(1 << len(env.inputs)):
            assert env.output(s, m) == 1 - m


def test_extend_keeps_winning():
    cs = find_counterexample(PREDICT, 1, 1, IO)
    bigger = cs.extend()
    assert bigger.k == 2 and bigger.problem.k == 2
    systems = list(enumerate_systems(["i"], ["o"], 2))
    assert verify_counterexample(bigger, PREDICT, systems)
    for t in systems[:20]:
        a, b = closed_loop(bigger, t)
        assert a == b == closed_loop(cs, t)[0]


def test_closed_loop_validation():
    cs = find_counterexample(PREDICT, 1, 1, IO)
    with pytest.raises(ValueError):
        closed_loop(cs, constant_system(["x"], ["o"]))
    with pytest.raises(ValueError):
        closed_loop(cs, constant_system(["i"], ["o"], semantics=Semantics.MEALY))


def test_mealy_predict_has_no_counterexample():
    assert counterexample_at(build_counterexample_problem(PREDICT, 1, IO, Semantics.MEALY), 1) is None


def test_mutex_sym_strategy_defeats_the_nonsym_system(bench):
    sym, nonsym = bench("mutex-sym"), bench("mutex-nonsym")
    f = spec_formula(sym)
    cs = find_counterexample(f, 2, 1, sym.alphabet, sym.semantics)
    assert cs is not None and cs.bound == 1
    arbiter = synthesize(nonsym, 2).system
    traces = closed_loop(cs, arbiter)
    assert not eval_formula(f, traces)
    assert not eval_formula(sym.hyper_formula(), traces)


def test_mutex_tie_yields_no_counter_strategy(bench):
    tie = bench("mutex-tie")
    problem = build_counterexample_problem(spec_formula(tie), 2, tie.alphabet, tie.semantics)
    for p in problem.attempts():
        try:
            assert counterexample_at(p, 1, max_nodes=3_000) is None
        except Interrupted:
            pass
