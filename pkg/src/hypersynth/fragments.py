"""Decidability classes and the constructive reductions between them.

Universal formulas are refined with two bounded checks: whether merging
all trace variables preserves the meaning, and whether the outputs can be
ordered so that each depends on a growing set of inputs.  Both checks are
exhaustive on small lasso universes only, so every positive answer is
reported as holding up to the bound that was used.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np

from .formula import (
    AlphabetSpec, And, Atom, Formula, Globally, Iff, Implies, PrefixClass, Quant, Term, collapse,
    conj, format_term, independence, map_atoms, prefix_class, props, rename, subterms, trace_vars,
)
from .semantics import EquivVerdict, LassoTrace, TraceUniverse, check_equiv_bounded, eval_formula
from .tsys import Semantics, TransitionSystem, generated_trace


class Fragment(enum.Enum):
    EXISTS = "E*"
    EXISTS_FORALL1 = "E*A1"
    LINEAR = "linear-A*"
    FORALL1 = "A1"
    FORALL_MANY = "A>1"
    EXISTS_FORALL_MANY = "E*A>1"
    FORALL_EXISTS = "A*E*"
    OTHER = "other-alternation"

    @property
    def complexity(self) -> str:
        return _COMPLEXITY[self]

    @property
    def decidable(self) -> bool:
        return not self.complexity.startswith("undecidable")


_COMPLEXITY = {
    Fragment.EXISTS: "pspace-complete",
    Fragment.EXISTS_FORALL1: "decidable-3exptime",
    Fragment.LINEAR: "decidable",
    Fragment.FORALL1: "decidable-ltl",
    Fragment.FORALL_MANY: "undecidable-general",
    Fragment.EXISTS_FORALL_MANY: "undecidable",
    Fragment.FORALL_EXISTS: "undecidable",
    Fragment.OTHER: "undecidable",
}

_BY_PREFIX = {
    PrefixClass.EXISTS: Fragment.EXISTS,
    PrefixClass.EXISTS_FORALL1: Fragment.EXISTS_FORALL1,
    PrefixClass.FORALL1: Fragment.FORALL1,
    PrefixClass.FORALL_MANY: Fragment.FORALL_MANY,
    PrefixClass.EXISTS_FORALL_MANY: Fragment.EXISTS_FORALL_MANY,
    PrefixClass.FORALL_EXISTS: Fragment.FORALL_EXISTS,
    PrefixClass.OTHER: Fragment.OTHER,
}


@dataclass(frozen=True)
class Bounds:
    """Lasso universe used by bounded equivalence checks."""

    max_stem: int
    max_loop: int

    def to_json(self) -> dict:
        return {"max_stem": self.max_stem, "max_loop": self.max_loop}


_SCHEDULE = ((0, 1), (1, 1), (0, 2), (1, 2), (2, 1), (2, 2))
COLLAPSE_BUDGET = 17_000_000
LINEAR_BUDGET = 2_000_000


def universe_shapes(aps: Sequence[str], n: int, budget: int) -> list[Bounds]:
    """Scheduled lasso shapes whose ``n``-fold tuple table fits ``budget``, smallest first."""
    letters = 1 << len(aps)
    return [Bounds(s, l) for s, l in _SCHEDULE if (letters ** (s + l)) ** max(n, 1) <= budget]


def universe_bounds(aps: Sequence[str], n: int, budget: int = LINEAR_BUDGET) -> Bounds | None:
    """Largest affordable shape with lassos of length at least two, if any."""
    shapes = [b for b in universe_shapes(aps, n, budget) if b.max_stem + b.max_loop >= 2]
    return shapes[-1] if shapes else None


@dataclass(frozen=True)
class DistributedArchitecture:
    processes: tuple[tuple[str, frozenset[str], frozenset[str]], ...]
    env: str
    objective: Term
    objective_var: str = "pi"

    def __post_init__(self):
        names = [p for p, _, _ in self.processes]
        if len(set(names)) != len(names):
            raise ValueError("process names must be unique")
        if self.env not in names:
            raise ValueError(f"environment {self.env!r} is not a process")
        seen: set[str] = set()
        for name, ins, outs in self.processes:
            if seen & outs:
                raise ValueError(f"outputs {sorted(seen & outs)} are written by two processes")
            seen |= outs
            if name == self.env and ins:
                raise ValueError("the environment process has no inputs")

    def inputs(self, p: str) -> frozenset[str]:
        return next(i for n, i, _ in self.processes if n == p)

    def outputs(self, p: str) -> frozenset[str]:
        return next(o for n, _, o in self.processes if n == p)

    def has_fork(self) -> bool:
        """Two system processes whose views are incomparable."""
        views = [ins for name, ins, _ in self.processes if name != self.env]
        return any(not (a <= b or b <= a) for a, b in itertools.combinations(views, 2))

    def to_json(self) -> dict:
        return {
            "processes": [
                {"name": n, "inputs": sorted(i), "outputs": sorted(o)} for n, i, o in self.processes
            ],
            "env": self.env,
            "objective": format_term(self.objective, implicit_var=self.objective_var),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)


@dataclass(frozen=True)
class LinearChain:
    """Outputs in chain order with the input set each may observe."""

    order: tuple[str, ...]
    views: tuple[frozenset[str], ...]
    bounds: Bounds
    architecture: DistributedArchitecture

    def view(self, output: str) -> frozenset[str]:
        return self.views[self.order.index(output)]

    def chain(self) -> list[frozenset[str]]:
        """The distinct views, smallest first."""
        out: list[frozenset[str]] = []
        for v in self.views:
            if not out or out[-1] != v:
                out.append(v)
        return out

    def to_json(self) -> dict:
        return {
            "order": list(self.order),
            "views": [sorted(v) for v in self.views],
            "bounds": self.bounds.to_json(),
        }


@dataclass(frozen=True)
class DecidabilityVerdict:
    fragment: Fragment
    prefix: PrefixClass
    evidence: Mapping[str, Any] = field(default_factory=dict)
    notes: tuple[str, ...] = ()

    @property
    def label(self) -> str:
        return f"{self.fragment.value}: {self.fragment.complexity}"

    def to_json(self) -> dict:
        return {
            "fragment": self.fragment.value,
            "complexity": self.fragment.complexity,
            "prefix": self.prefix.value,
            "evidence": dict(self.evidence),
            "notes": list(self.notes),
        }


def _alphabet(alphabet: AlphabetSpec | tuple, f: Formula) -> tuple[tuple[str, ...], tuple[str, ...]]:
    if isinstance(alphabet, AlphabetSpec):
        inputs, outputs = tuple(sorted(alphabet.inputs)), tuple(sorted(alphabet.outputs))
    else:
        inputs, outputs = (tuple(sorted(x)) for x in alphabet)
    stray = props(f.body) - set(inputs) - set(outputs)
    if stray:
        raise ValueError(f"formula mentions propositions outside the alphabet: {sorted(stray)}")
    return inputs, outputs


# ---------------------------------------------------------------------------
# collapse and linear fragment


def collapse_check(f: Formula, aps: Sequence[str] | None = None, bounds: Bounds | None = None,
                   budget: int = COLLAPSE_BUDGET) -> tuple[EquivVerdict, Bounds | None]:
    """Bounded check that ``f`` and its one-variable collapse agree.

    Without explicit bounds, growing shapes are tried until one refutes the
    equivalence or the budget runs out.  The shape of the last check is returned.
    """
    aps = sorted(aps if aps is not None else props(f.body))
    shapes = [bounds] if bounds is not None else universe_shapes(aps, len(f.prefix), budget)
    verdict, used = EquivVerdict(True), None
    for b in shapes:
        verdict = check_equiv_bounded(f, collapse(f), len(f.prefix), b.max_stem, b.max_loop, aps=aps)
        used = b
        if not verdict.equivalent:
            break
    return verdict, used


def determinism(inputs: Sequence[str], outputs: Sequence[str], pi: str = "pi1", pi2: str = "pi2") -> Term:
    """``outputs`` are a function of the history of ``inputs`` (Moore timing)."""
    return independence(inputs, outputs, pi, pi2)


def _with_pair(f: Formula, extra: Term, pi: str, pi2: str) -> Formula:
    """``f`` conjoined with a two-variable universal body over ``pi, pi2``."""
    vs = list(f.variables)
    while len(vs) < 2:
        vs.append(f"pi{len(vs) + 1}" if f"pi{len(vs) + 1}" not in vs else f"rho{len(vs)}")
    prefix = f.prefix + tuple((Quant.FORALL, v) for v in vs[len(f.prefix):])
    return Formula(prefix, conj([f.body, rename(extra, {pi: vs[0], pi2: vs[1]})]))


def _implies_bounded(f: Formula, g: Term, pi: str, pi2: str, universe: TraceUniverse) -> bool:
    """``f`` entails ``forall pi pi2. g`` on every trace set of the universe."""
    return bool(check_equiv_bounded(f, _with_pair(f, g, pi, pi2), 2, 0, 1, universe=universe))


def _dependence_order(body: Term, outputs: Sequence[str], inputs: Sequence[str]) -> list[str]:
    """Outputs that syntactically share a subformula with fewer inputs come first."""
    reach: dict[str, set[str]] = {o: set() for o in outputs}
    for t in subterms(body):
        ps = props(t) if not isinstance(t, Atom) else {t.ap}
        for o in outputs:
            if o in ps:
                reach[o] |= ps & set(inputs)
    return sorted(outputs, key=lambda o: (len(reach[o]), o))


def linear_check(f: Formula, alphabet: AlphabetSpec | tuple, bounds: Bounds | None = None,
                 max_inputs: int = 6) -> LinearChain | None:
    """Find views ``J_1 <= J_2 <= ...`` such that ``f`` plus determinism is the collapse plus per-output determinism.

    Views are tried smallest first.  An output's candidate views are those
    whose determinism is entailed; a chain is accepted when the full
    equivalence holds on the bounded universe.
    """
    if not f.is_universal():
        raise ValueError("the linear fragment is defined for universal formulas")
    inputs, outputs = _alphabet(alphabet, f)
    if len(inputs) > max_inputs:
        return None
    pi, pi2 = "lin1", "lin2"
    det = _with_pair(f, determinism(inputs, outputs, pi, pi2), pi, pi2)
    aps = sorted(set(inputs) | set(outputs))
    bounds = bounds or universe_bounds(aps, len(det.prefix))
    if bounds is None:
        return None
    universe = TraceUniverse.bounded(aps, bounds.max_stem, bounds.max_loop)
    base = collapse(f)
    subsets = [frozenset(c) for r in range(len(inputs) + 1) for c in itertools.combinations(inputs, r)]
    order = _dependence_order(f.body, outputs, inputs)
    views: dict[str, list[frozenset[str]]] = {}
    for o in order:
        views[o] = [j for j in subsets if _implies_bounded(det, determinism(sorted(j), [o], pi, pi2), pi, pi2, universe)]
        if not views[o]:
            return None

    def candidates():
        for combo in itertools.product(*(views[o] for o in order)):
            ranked = sorted(zip(order, combo), key=lambda p: (len(p[1]), order.index(p[0])))
            if all(a[1] <= b[1] for a, b in zip(ranked, ranked[1:])):
                yield sum(len(j) for j in combo), ranked

    for _, ranked in sorted(candidates(), key=lambda c: (c[0], [sorted(j) for _, j in c[1]])):
        parts = [determinism(sorted(j), [o], pi, pi2) for o, j in ranked]
        rhs = _with_pair(base, conj(parts), pi, pi2)
        if check_equiv_bounded(det, rhs, 2, bounds.max_stem, bounds.max_loop, universe=universe):
            chain_order = tuple(o for o, _ in ranked)
            chain_views = tuple(j for _, j in ranked)
            arch = DistributedArchitecture(
                (("env", frozenset(), frozenset(inputs)),)
                + tuple((f"p_{o}", j, frozenset([o])) for o, j in ranked),
                "env",
                base.body,
                base.variables[0],
            )
            return LinearChain(chain_order, chain_views, bounds, arch)
    return None


# ---------------------------------------------------------------------------
# classification


def classify(f: Formula, alphabet: AlphabetSpec | tuple | None = None, bounds: Bounds | None = None,
             try_linear: bool = True) -> DecidabilityVerdict:
    pc = prefix_class(f)
    fragment = _BY_PREFIX[pc]
    if pc is not PrefixClass.FORALL_MANY:
        return DecidabilityVerdict(fragment, pc)
    if alphabet is None:
        aps = sorted(props(f.body))
    else:
        inputs, outputs = _alphabet(alphabet, f)
        aps = sorted(inputs + outputs)
    evidence: dict[str, Any] = {}
    col, used = collapse_check(f, aps, bounds)
    evidence["collapse"] = {
        "equivalent": col.equivalent if used else None,
        "bounds": used.to_json() if used else None,
        "counterexample": None if col.equivalent else [str(t) for t in col.counterexample],
    }
    if used is None or (used.max_stem + used.max_loop < 2 and col.equivalent):
        notes = ("alphabet too large for bounded checks", "bounded-methods-apply")
        return DecidabilityVerdict(Fragment.FORALL_MANY, pc, evidence, notes)
    if col.equivalent:
        return DecidabilityVerdict(Fragment.FORALL1, pc, evidence, ("collapse equivalence holds up to bound",))
    if try_linear and alphabet is not None:
        chain = linear_check(f, alphabet)
        if chain is not None:
            evidence["linear"] = chain.to_json()
            return DecidabilityVerdict(Fragment.LINEAR, pc, evidence, ("linear chain holds up to bound",))
        evidence["linear"] = None
    return DecidabilityVerdict(Fragment.FORALL_MANY, pc, evidence, ("bounded-methods-apply",))


# ---------------------------------------------------------------------------
# existential formulas


@dataclass(frozen=True)
class ExistsModel:
    traces: tuple[LassoTrace, ...]
    bounds: Bounds


def exists_reduction(f: Formula, alphabet: AlphabetSpec | tuple) -> Formula:
    """``f`` with input determinism over two fresh universal variables."""
    if not f.is_existential():
        raise ValueError("the reduction applies to existential formulas")
    inputs, outputs = _alphabet(alphabet, f)
    used = set(f.variables)
    a, b = "det1", "det2"
    while a in used or b in used:
        a, b = a + "_", b + "_"
    prefix = f.prefix + ((Quant.FORALL, a), (Quant.FORALL, b))
    return Formula(prefix, conj([f.body, determinism(inputs, outputs, a, b)]))


def find_exists_model(f: Formula, alphabet: AlphabetSpec | tuple, max_stem: int = 2, max_loop: int = 2,
                      budget: int = 4_000_000) -> ExistsModel | None:
    """Lassos for the existential variables that satisfy the body and are input deterministic."""
    if not f.is_existential():
        raise ValueError("expected an existential formula")
    inputs, outputs = _alphabet(alphabet, f)
    aps = sorted(set(inputs) | set(outputs))
    vs = f.variables
    n = len(vs)
    pairs = [determinism(inputs, outputs, x, y) for x, y in itertools.combinations(vs, 2)]
    body = conj([f.body, *pairs])
    letters = 1 << len(aps)
    shapes = sorted(
        ((s, l) for s in range(max_stem + 1) for l in range(1, max_loop + 1)),
        key=lambda p: (p[0] + p[1], p[1]),
    )
    for stem, loop in shapes:
        if (letters ** (stem + loop)) ** max(n, 1) > budget:
            continue
        universe = TraceUniverse.bounded(aps, stem, loop)
        if n == 0:
            return ExistsModel((), Bounds(stem, loop)) if universe.holds(body, ()).all() else None
        table = universe.holds(body, vs)
        hits = np.argwhere(table)
        if len(hits):
            return ExistsModel(tuple(universe.lassos[i] for i in hits[0]), Bounds(stem, loop))
    return None


def prefix_strategy(traces: Sequence[LassoTrace], inputs: Sequence[str], outputs: Sequence[str],
                    semantics: Semantics = Semantics.MOORE) -> TransitionSystem:
    """Follow whichever witness trace the input history matches; output nothing once none does.

    Witnesses must be input deterministic for the chosen timing.
    """
    inputs, outputs = tuple(inputs), tuple(outputs)
    width = 1 << len(inputs)
    traces = list(traces)

    def in_mask(t: LassoTrace, i: int) -> int:
        x = t.letter(i)
        return sum(1 << k for k, a in enumerate(inputs) if a in x)

    def out_mask(t: LassoTrace, i: int) -> int:
        x = t.letter(i)
        return sum(1 << k for k, a in enumerate(outputs) if a in x)

    horizon = max((len(t.stem) for t in traces), default=0)
    period = 1
    for t in traces:
        period = period * len(t.loop) // np.gcd(period, len(t.loop))

    def norm(pos: int) -> int:
        return pos if pos < horizon else horizon + (pos - horizon) % period

    def emit(live: frozenset[int], pos: int) -> int:
        got = {out_mask(traces[j], pos) for j in live}
        if len(got) > 1:
            raise ValueError("witness traces are not input deterministic")
        return got.pop() if got else 0

    start = (frozenset(range(len(traces))), 0)
    index = {start: 0}
    order = [start]
    tau: list[list[int]] = []
    labels: list = []
    k = 0
    while k < len(order):
        live, pos = order[k]
        row, lab = [], []
        for m in range(width):
            matched = frozenset(j for j in live if in_mask(traces[j], pos) == m)
            nxt = (matched, norm(pos + 1)) if matched else (frozenset(), 0)
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
            row.append(index[nxt])
            lab.append(emit(matched, pos))
        tau.append(row)
        labels.append(emit(live, pos) if semantics is Semantics.MOORE else tuple(lab))
        k += 1
    return TransitionSystem(inputs, outputs, semantics, tuple(map(tuple, tau)), tuple(labels))


def check_exists_strategy(f: Formula, model: ExistsModel, system: TransitionSystem) -> bool:
    """The strategy reproduces every witness, so its trace set satisfies ``f``."""
    produced = [generated_trace(system, t.project(system.inputs)) for t in model.traces]
    return eval_formula(f, produced)


# ---------------------------------------------------------------------------
# exists^n forall^1


def _copy(t: Term, var: str) -> Term:
    return map_atoms(t, lambda a: Atom(f"{a.ap}_{a.var}", var))


def exists_forall1_reduction(f: Formula, alphabet: AlphabetSpec | tuple, var: str = "pi") -> DistributedArchitecture:
    """Architecture where one process fixes the existential traces blindly and another answers the environment.

    Each existential copy must behave like the universal copy whenever it
    sees the same inputs.
    """
    if prefix_class(f) not in (PrefixClass.EXISTS_FORALL1, PrefixClass.FORALL1):
        raise ValueError(f"expected an exists^n forall^1 prefix, got {prefix_class(f).value}")
    inputs, outputs = _alphabet(alphabet, f)
    *exist, univ = f.variables
    ins = lambda v: frozenset(f"{a}_{v}" for a in inputs)  # noqa: E731
    outs = lambda v: frozenset(f"{a}_{v}" for a in outputs)  # noqa: E731

    def same(aps: Sequence[str], v: str) -> Term:
        return Globally(conj(Iff(Atom(f"{a}_{v}", var), Atom(f"{a}_{univ}", var)) for a in aps))

    consistency = [Implies(same(inputs, v), same(outputs, v)) for v in exist]
    theta = conj([_copy(f.body, var), *consistency])
    processes = [("env", frozenset(), ins(univ))]
    if exist:
        blind = frozenset().union(*(ins(v) | outs(v) for v in exist))
        processes.append(("p", frozenset(), blind))
    processes.append(("p_prime", ins(univ), outs(univ)))
    return DistributedArchitecture(tuple(processes), "env", theta, var)


# ---------------------------------------------------------------------------
# routing


class PlanKind(enum.Enum):
    EXISTS = "exists-model-search"
    ARCHITECTURE = "emit-architecture"
    RACE = "synthesis-race"
    COUNTEREXAMPLE_ONLY = "counterexample-only"
    UNSUPPORTED = "unsupported"


@dataclass(frozen=True)
class ExecutionPlan:
    kind: PlanKind
    formula: Formula
    verdict: DecidabilityVerdict
    notes: tuple[str, ...] = ()
    universal_part: Formula | None = None

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "classification": self.verdict.to_json(), "notes": list(self.notes)}


def universal_part(f: Formula) -> Formula | None:
    """Conjuncts that only mention the leading universal variables.

    Every system satisfying ``f`` satisfies this part, so refuting it refutes ``f``.
    """
    lead = []
    for q, v in f.prefix:
        if q is not Quant.FORALL:
            break
        lead.append(v)
    if not lead:
        return None

    def split(t: Term) -> list[Term]:
        return split(t.left) + split(t.right) if isinstance(t, And) else [t]

    keep = [t for t in split(f.body) if trace_vars(t) <= set(lead)]
    if not keep:
        return None
    body = conj(keep)
    used = [v for v in lead if v in trace_vars(body)] or lead[:1]
    return Formula(tuple((Quant.FORALL, v) for v in used), body)


def route(spec, classify_bounds: Bounds | None = None, try_linear: bool = True) -> ExecutionPlan:
    """Pick the procedure for a specification file from its combined prefix."""
    f = spec.combined()
    verdict = classify(f, spec.alphabet, classify_bounds, try_linear)
    match verdict.fragment:
        case Fragment.EXISTS:
            return ExecutionPlan(PlanKind.EXISTS, f, verdict, ("reduced to satisfiability with input determinism",))
        case Fragment.EXISTS_FORALL1:
            return ExecutionPlan(PlanKind.ARCHITECTURE, f, verdict, ("architecture emitted; distributed synthesis is not solved here",))
        case Fragment.FORALL1 | Fragment.LINEAR | Fragment.FORALL_MANY:
            notes = []
            if verdict.fragment is Fragment.FORALL1 and prefix_class(f) is PrefixClass.FORALL_MANY:
                notes.append("collapse fast path available (equivalence up to bound)")
            if verdict.fragment is Fragment.LINEAR:
                notes.append("linear fragment (up to bound)")
            return ExecutionPlan(PlanKind.RACE, f, verdict, tuple(notes))
        case Fragment.FORALL_EXISTS:
            part = universal_part(f)
            notes = ["realizability is undecidable for this prefix; only counterexamples are searched"]
            if part is None:
                notes.append("no purely universal conjunct to refute")
            return ExecutionPlan(PlanKind.COUNTEREXAMPLE_ONLY, f, verdict, tuple(notes), part)
    return ExecutionPlan(
        PlanKind.UNSUPPORTED, f, verdict,
        (f"quantifier prefix {verdict.prefix.value} is not supported",),
    )
