"""Acceptance criteria, one test each; every test prints a single PASS/FAIL line.

Run ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import itertools
import random
import sys
import time

import numpy as np
import pytest

from hypersynth.automata import dualize, ltl_to_nba, nba_accepts_lasso, ucw_accepts_lasso
from hypersynth.cli import MAX_INPUT_BITS, RunOptions, benchmark_names, load_spec, run
from hypersynth.counterex import candidate_systems, closed_loop, find_counterexample
from hypersynth.formula import (
    AlphabetSpec, And, Atom, Eventually, Globally, Iff, Implies, Next, Not, Or, Release, Until, WeakUntil,
    collapse, conj, desugar_term, forall, independence, negate_to_nnf, parse_hyperltl, reduce1,
)
from hypersynth.fragments import PlanKind, linear_check, route
from hypersynth.semantics import LassoTrace, TraceUniverse, enumerate_lassos, eval_body_on_zip, eval_formula, zip_lassos
from hypersynth.synth import synthesize
from hypersynth.tsys import Semantics, enumerate_systems, generated_trace, model_check

IO = AlphabetSpec({"i"}, {"o"})


@pytest.fixture
def report(pytestconfig):
    """Print one PASS/FAIL line past output capture and return the verdict."""
    terminal = pytestconfig.pluginmanager.getplugin("terminalreporter")

    def say(n: int, title: str, ok: bool, detail: str, seconds: float, limit: float) -> bool:
        ok = ok and seconds <= limit
        line = f"CRITERION {n} [{title}]: {'PASS' if ok else 'FAIL'} - {detail} ({seconds:.1f}s, limit {limit:.0f}s)"
        if terminal is None:
            print(line)
        else:
            terminal.write_line("")
            terminal.write_line(line)
        return ok

    return say


# ---------------------------------------------------------------------------
# random bodies with an exact operator count


UNARY = (Not, Next, Eventually, Globally)
BINARY = (And, Or, Implies, Iff, Until, Release, WeakUntil)


def random_body(rng: random.Random, leaves: list, ops: int):
    if ops == 0:
        return rng.choice(leaves)
    if rng.random() < 0.4:
        return rng.choice(UNARY)(random_body(rng, leaves, ops - 1))
    left = rng.randrange(ops)
    return rng.choice(BINARY)(random_body(rng, leaves, left), random_body(rng, leaves, ops - 1 - left))


# ---------------------------------------------------------------------------
# 1. verdict parity on the mutex family


def test_criterion_1_mutex_parity(report):
    expected = {
        "mutex-nonsym": ("REALIZABLE", "states", 2),
        "mutex-sym": ("UNREALIZABLE", "k", 2),
        "mutex-tie": ("REALIZABLE", "states", 3),
    }
    ok, details, worst = True, [], 0.0
    for name, (verdict, key, value) in expected.items():
        start = time.monotonic()
        r = run(load_spec(name), RunOptions(single_threaded=True, timeout=60)).to_json()
        took = time.monotonic() - start
        worst = max(worst, took)
        got = r.get(key)
        good = r["verdict"] == verdict and got == value and took <= 60
        if verdict == "REALIZABLE":
            good = good and r["semantics"] == "moore"
        ok &= good
        details.append(f"{name} {r['verdict']} {key}={got} in {took:.1f}s")
    assert report(1, "mutex verdicts", ok, "; ".join(details), worst, 60)


# ---------------------------------------------------------------------------
# 2. secret decision end to end


def test_criterion_2_secret_decision(report):
    start = time.monotonic()
    ltl_spec, full = load_spec("secret-decision-ltl"), load_spec("secret-decision")
    eq2 = full.hyper_formula()
    ltl_only = synthesize(ltl_spec, 8)
    rejected = ltl_only.realizable and not model_check(ltl_only.system, eq2).holds
    both = synthesize(full, 8)
    passes = both.realizable and both.bound <= 8
    passes = passes and model_check(both.system, full.ltl_formula()).holds and model_check(both.system, eq2).holds
    took = time.monotonic() - start
    detail = (f"LTL-only system ({ltl_only.bound} states) rejected by the hyper part: {rejected}; "
              f"combined system at bound {both.bound} passes both: {passes}")
    assert report(2, "secret decision", rejected and passes, detail, took, 120)


# ---------------------------------------------------------------------------
# 3. counterexamples to realizability


def _loops(traces):
    return {tuple(tuple(sorted(x & {"i"})) for x in LassoTrace(t.stem, t.loop).canonical().loop) for t in traces}


def test_criterion_3_counterexamples(report):
    details, ok, worst = [], True, 0.0

    start = time.monotonic()
    phi1 = parse_hyperltl("forall p. forall q. F (i[p] <-> i[q])")
    cs = find_counterexample(phi1, 2, 2, IO)
    good = cs is not None and cs.k == 2
    if good:
        loops = set()
        for t in candidate_systems(["i"], ["o"], Semantics.MOORE):
            traces = [w.project(("i",)) for w in closed_loop(cs, t)]
            loops |= {frozenset(_loops(traces))}
        good = loops == {frozenset({((),), (("i",),)})}
    took = time.monotonic() - start
    worst = max(worst, took)
    ok &= good and took <= 30
    details.append(f"phi1 k={cs.k if cs else None} inputs ultimately {{0^w, i^w}}: {good}")

    start = time.monotonic()
    phi2 = parse_hyperltl("forall p. forall q. G (o[p] <-> o[q]) && G (i[p] <-> X o[p])")
    cs = find_counterexample(phi2, 2, 2, IO)
    took = time.monotonic() - start
    worst = max(worst, took)
    good = cs is not None and cs.k == 2
    ok &= good and took <= 30
    details.append(f"phi2 k={cs.k if cs else None}")

    start = time.monotonic()
    predict = parse_hyperltl("forall pi. F (i[pi] <-> o[pi])")
    cs = find_counterexample(predict, 1, 2, IO)
    took = time.monotonic() - start
    worst = max(worst, took)
    inverts = cs is not None and cs.k == 1 and all(
        cs.system.output(s, m) == 1 - m for s in cs.system.reachable() for m in (0, 1)
    )
    ok &= inverts and took <= 30
    details.append(f"F(i<->o) k={cs.k if cs else None} inverts outputs: {inverts}")
    assert report(3, "counterexamples", ok, "; ".join(details), worst, 30)


# ---------------------------------------------------------------------------
# 4. model checking against the lasso semantics


def test_criterion_4_model_check_oracle(report):
    start = time.monotonic()
    rng = random.Random(2024)
    leaves = [Atom(a, v) for a in ("i", "o") for v in ("p", "q")]
    formulas = [forall("p", "q", body=random_body(rng, leaves, ops)) for ops in range(6) for _ in range(34)]
    systems = []
    for semantics in (Semantics.MOORE, Semantics.MEALY):
        for b in (1, 2):
            systems.extend(enumerate_systems(["i"], ["o"], b, semantics))
    pool = enumerate_lassos(["i"], 3, 3)
    pairs = checked = violations = 0
    bad = []
    for t in systems:
        probe_ids = rng.sample(range(len(pool)), 30)
        produced = [generated_trace(t, pool[j]) for j in probe_ids]
        universe = TraceUniverse(produced, ["i", "o"])
        probes = np.array([rng.sample(range(len(produced)), 2) for _ in range(200)])
        for f in formulas:
            pairs += 1
            v = model_check(t, f)
            if not v.holds:
                violations += 1
                ws = list(v.witnesses)
                regenerated = all(generated_trace(t, w.project(("i",))).same_word(w) for w in ws)
                if eval_formula(f, ws) or not regenerated:
                    bad.append((f, t, "witness"))
            else:
                table = universe.holds(f.body, f.variables)
                checked += len(probes)
                if not table[probes[:, 0], probes[:, 1]].all():
                    bad.append((f, t, "probe"))
        universe._memo.clear()
    took = time.monotonic() - start
    ok = not bad and pairs >= 500
    detail = f"{pairs} (formula, system) pairs, {violations} violations confirmed, {checked} probes, {len(bad)} mismatches"
    assert report(4, "model checking oracle", ok, detail, took, 600)


# ---------------------------------------------------------------------------
# 5. automata against the lasso semantics


def test_criterion_5_automata(report):
    start = time.monotonic()
    rng = random.Random(5)
    leaves = [Atom("a", "p"), Atom("b", "p")]
    lassos = enumerate_lassos(["a", "b"], 2, 2)
    mismatches = 0
    for _ in range(1000):
        body = random_body(rng, leaves, rng.randrange(6))
        w = rng.choice(lassos)
        expected = eval_body_on_zip(body, {"p": w})
        nnf = negate_to_nnf(negate_to_nnf(desugar_term(body)))
        a = ltl_to_nba(nnf)
        z = zip_lassos({"p": w}, ["p"])
        if nba_accepts_lasso(a, z) != expected or ucw_accepts_lasso(dualize(a), z) != (not expected):
            mismatches += 1
    took = time.monotonic() - start
    detail = f"1000 (body, lasso) pairs, {mismatches} mismatches; dual UCW accepts the complement"
    assert report(5, "automata", mismatches == 0, detail, took, 120)


# ---------------------------------------------------------------------------
# 6. collapse and 1-reduction, exhaustively


def kernel_bodies(leaves: list, max_ops: int):
    """Every body over ``leaves`` built from not, and, next, until with at most ``max_ops`` operators."""
    by_size = [list(leaves)]
    for n in range(1, max_ops + 1):
        level = [k(x) for k in (Not, Next) for x in by_size[n - 1]]
        for left in range(n):
            for x, y in itertools.product(by_size[left], by_size[n - 1 - left]):
                level.append(And(x, y))
                level.append(Until(x, y))
        by_size.append(level)
    return [t for level in by_size for t in level]


def test_criterion_6_collapse_and_reduction(report):
    start = time.monotonic()
    universe = TraceUniverse.bounded(["a"], 2, 2)
    singles = np.arange(universe.m).reshape(-1, 1)
    pairs = np.array([c for c in itertools.combinations(range(universe.m), 2)])
    counts, failures = {}, 0
    for variables in (("p", "q"), ("p", "q", "r")):
        bodies = kernel_bodies([Atom("a", v) for v in variables], 4)
        counts[len(variables)] = len(bodies)
        for j, body in enumerate(bodies):
            f = forall(*variables, body=body)
            c, r = collapse(f), reduce1(f)
            if not np.array_equal(universe.set_values(f, singles), universe.set_values(c, singles)):
                failures += 1
            if not np.array_equal(universe.set_values(f, singles), universe.set_values(r, singles)):
                failures += 1
            if len(variables) == 3 and not np.array_equal(universe.set_values(f, pairs), universe.set_values(r, pairs)):
                failures += 1
            if j % 2000 == 1999:
                universe._memo.clear()
        universe._memo.clear()
    took = time.monotonic() - start
    detail = (f"{counts[2]} forall^2 and {counts[3]} forall^3 bodies (not/and/X/U, <= 4 operators) on "
              f"{universe.m} lassos up to (2,2); {failures} disagreements")
    assert report(6, "collapse and reduce1", failures == 0, detail, took, 300)


# ---------------------------------------------------------------------------
# 7. linear fragment


def test_criterion_7_linear_fragment(report):
    start = time.monotonic()
    worked = parse_hyperltl(
        "forall p. forall q. (!(a[p] <-> a[q])) R (c[p] <-> c[q]) && G (c[p] <-> d[p]) && G (b[p] <-> X e[p])"
    )
    chain = linear_check(worked, AlphabetSpec({"a", "b"}, {"c", "d", "e"}))
    got_chain = chain is not None and chain.chain() == [frozenset({"a"}), frozenset({"a", "b"})]
    procs = 0 if chain is None else len([p for p, _, _ in chain.architecture.processes if p != chain.architecture.env])
    fork = forall("p", "q", body=conj([independence({"a"}, {"c"}, "p", "q"), independence({"b"}, {"d"}, "p", "q")]))
    no_chain = linear_check(fork, AlphabetSpec({"a", "b"}, {"c", "d"})) is None
    took = time.monotonic() - start
    views = None if chain is None else [sorted(v) for v in chain.chain()]
    detail = f"worked example chain {views} with {procs} processes; fork has no chain: {no_chain}"
    assert report(7, "linear fragment", got_chain and procs == 3 and no_chain, detail, took, 60)


# ---------------------------------------------------------------------------
# 8. the two searches never both succeed


SIDE_SECONDS = 25


def _synth_side(spec, plan) -> bool:
    if plan.kind is PlanKind.EXISTS:
        return run(spec, RunOptions(single_threaded=True)).verdict == "REALIZABLE"
    if plan.kind is not PlanKind.RACE or len(spec.inputs) > MAX_INPUT_BITS:
        return False
    r = synthesize(spec, int(spec.option("max_bound", 4)), deadline=time.monotonic() + SIDE_SECONDS)
    return r.realizable


def _counter_side(spec, plan) -> bool:
    target = plan.formula if plan.kind is PlanKind.RACE else plan.universal_part
    if plan.kind not in (PlanKind.RACE, PlanKind.COUNTEREXAMPLE_ONLY) or target is None:
        return False
    n = max(len(target.prefix), 1)
    if len(spec.outputs) * n > MAX_INPUT_BITS:
        return False
    deadline = time.monotonic() + SIDE_SECONDS
    for k in range(n, int(spec.option("max_k", 2)) + 1):
        if len(spec.outputs) * k > MAX_INPUT_BITS or time.monotonic() > deadline:
            break
        if find_counterexample(target, k, 2, spec.alphabet, spec.semantics, deadline=deadline) is not None:
            return True
    return False


def test_criterion_8_dual_race_soundness(report):
    start = time.monotonic()
    both, summary = [], []
    for name in benchmark_names():
        spec = load_spec(name)
        plan = route(spec)
        realizable = _synth_side(spec, plan)
        refuted = _counter_side(spec, plan)
        if realizable and refuted:
            both.append(name)
        summary.append(f"{name}:{'R' if realizable else '-'}{'U' if refuted else '-'}")
    took = time.monotonic() - start
    detail = f"{len(summary)} specs, both sides won on {both or 'none'} [{' '.join(summary)}]"
    assert report(8, "dual race soundness", not both, detail, took, 900)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
