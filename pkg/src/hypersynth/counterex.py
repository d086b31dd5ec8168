"""Bounded unrealizability through k-counterexample strategies.

A counter strategy watches ``k`` output streams of the system and
produces ``k`` input streams.  It wins when the system's answers are not
those of one deterministic strategy, or when some choice of ``n`` of the
``k`` traces violates the body.  Finding one is plain LTL synthesis with
the roles of inputs and outputs swapped, over propositions ``ap_cj``.
"""

from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .formula import AlphabetSpec, Atom, Formula, Iff, Not, Term, Until, conj, disj, map_atoms, props, xor
from .semantics import LassoTrace, eval_formula
from .synth import BoundedInstance, Interrupted, SoundnessError, encode, extract, solve
from .tsys import Semantics, TransitionSystem, enumerate_systems, letter_of, mask_of

CS_VAR = "pi"


def component(ap: str, j: int) -> str:
    """Name of proposition ``ap`` on the ``j``-th (1-based) tupled trace."""
    return f"{ap}_c{j}"


@dataclass(frozen=True)
class CounterexampleProblem:
    formula: Formula
    k: int
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]
    semantics: Semantics
    selections: tuple[tuple[int, ...], ...]
    body: Term

    @property
    def observed(self) -> tuple[str, ...]:
        """Counter-strategy inputs: the system outputs on every component."""
        return tuple(component(o, j) for j in range(1, self.k + 1) for o in self.outputs)

    @property
    def emitted(self) -> tuple[str, ...]:
        """Counter-strategy outputs: the system inputs on every component."""
        return tuple(component(i, j) for j in range(1, self.k + 1) for i in self.inputs)

    @property
    def disjuncts(self) -> int:
        return len(self.selections) + len(list(itertools.combinations(range(self.k), 2)))

    def instance(self, bound: int) -> BoundedInstance:
        return BoundedInstance(self.body, (CS_VAR,), bound, self.semantics.opposite, self.observed, self.emitted)

    def restrict(self, pick: Sequence[int]) -> "CounterexampleProblem":
        """The objective with a single violation target.

        It implies the full objective, so a strategy winning it wins there too.
        """
        pick = tuple(pick)
        if pick not in self.selections:
            raise ValueError(f"{pick} is not a selection of this problem")
        nd = nondeterminism(self.inputs, self.outputs, self.k, self.semantics)
        variables = self.formula.variables or ("pi",)
        body = disj([nd, Not(selection(self.formula.body, variables, pick))])
        return CounterexampleProblem(self.formula, self.k, self.inputs, self.outputs, self.semantics, (pick,), body)

    def attempts(self) -> list["CounterexampleProblem"]:
        """Single-target objectives on distinct components first, then the full one."""
        if len(self.selections) == 1:
            return [self]
        ranked = sorted(self.selections, key=lambda p: (-len(set(p)), p))
        return [self.restrict(p) for p in ranked] + [self]


def _on(ap: str, j: int) -> Atom:
    return Atom(component(ap, j), CS_VAR)


def nondeterminism(inputs: Sequence[str], outputs: Sequence[str], k: int, semantics: Semantics) -> Term:
    """Some two components receive the same inputs but see different outputs.

    For Moore systems outputs may differ one step after the inputs do, so
    the inputs only need to agree strictly before the disagreement; Mealy
    outputs react immediately, so the inputs must also agree at that point.
    """
    out = []
    for a, b in itertools.combinations(range(1, k + 1), 2):
        same_in = conj(Iff(_on(i, a), _on(i, b)) for i in inputs)
        diff_out = disj(xor(_on(o, a), _on(o, b)) for o in outputs)
        if semantics is Semantics.MEALY:
            diff_out = conj([same_in, diff_out])
        out.append(Until(same_in, diff_out))
    return disj(out)


def selection(body: Term, variables: Sequence[str], pick: Sequence[int]) -> Term:
    where = dict(zip(variables, pick))
    return map_atoms(body, lambda a: _on(a.ap, where[a.var]))


def build_counterexample_problem(f: Formula, k: int, alphabet: AlphabetSpec | tuple,
                                 semantics: Semantics = Semantics.MOORE) -> CounterexampleProblem:
    """Objective ``not D  or  OR_P not psi[P]`` over ordered selections with repetition."""
    if not f.is_universal():
        raise ValueError("counterexamples are defined for universal formulas")
    n = len(f.prefix)
    if k < max(n, 1):
        raise ValueError(f"k = {k} is smaller than the number of quantifiers {n}")
    if isinstance(alphabet, AlphabetSpec):
        inputs, outputs = tuple(sorted(alphabet.inputs)), tuple(sorted(alphabet.outputs))
    else:
        inputs, outputs = map(tuple, alphabet)
    stray = props(f.body) - set(inputs) - set(outputs)
    if stray:
        raise ValueError(f"formula mentions propositions outside the alphabet: {sorted(stray)}")
    variables = f.variables or ("pi",)
    picks = tuple(itertools.product(range(1, k + 1), repeat=len(variables)))
    violations = [Not(selection(f.body, variables, p)) for p in picks]
    body = disj([nondeterminism(inputs, outputs, k, semantics), *violations])
    return CounterexampleProblem(f, k, inputs, outputs, semantics, picks, body)


@dataclass(frozen=True)
class CounterStrategy:
    system: TransitionSystem
    k: int
    problem: CounterexampleProblem
    bound: int
    stats: Mapping[str, float] = field(default_factory=dict)

    def extend(self) -> "CounterStrategy":
        """The same strategy on ``k + 1`` components, the last duplicating the first."""
        p = self.problem
        bigger = build_counterexample_problem(p.formula, p.k + 1, (p.inputs, p.outputs), p.semantics)
        t = self.system
        no, ni = len(p.outputs), len(p.inputs)
        k = p.k
        width_new = 1 << (no * (k + 1))

        def shrink(m: int) -> int:
            return m & ((1 << (no * k)) - 1)

        def grow(lab: int) -> int:
            return lab | ((lab & ((1 << ni) - 1)) << (ni * k))

        tau = tuple(tuple(t.tau[s][shrink(m)] for m in range(width_new)) for s in range(t.size))
        if t.semantics is Semantics.MOORE:
            labels = tuple(grow(lab) for lab in t.labels)
        else:
            labels = tuple(tuple(grow(t.labels[s][shrink(m)]) for m in range(width_new)) for s in range(t.size))
        ext = TransitionSystem(bigger.observed, bigger.emitted, t.semantics, tau, labels, t.initial, "environment")
        return CounterStrategy(ext, k + 1, bigger, self.bound, dict(self.stats))


# ---------------------------------------------------------------------------
# closed loop


def closed_loop(cs: CounterStrategy, system: TransitionSystem) -> list[LassoTrace]:
    """The ``k`` traces produced when ``system`` plays against the counter strategy."""
    p = cs.problem
    if set(system.inputs) != set(p.inputs) or set(system.outputs) != set(p.outputs):
        raise ValueError("system alphabet does not match the counterexample problem")
    if system.semantics is cs.system.semantics:
        raise ValueError("system and counter strategy must use opposite semantics")
    k, ni, no = p.k, len(p.inputs), len(p.outputs)
    in_pos = [system.inputs.index(a) for a in p.inputs]
    out_pos = [system.outputs.index(a) for a in p.outputs]

    def to_cs(omasks) -> int:
        m = 0
        for j, om in enumerate(omasks):
            for x, pos in enumerate(out_pos):
                if om >> pos & 1:
                    m |= 1 << (j * no + x)
        return m

    def from_cs(m: int) -> list[int]:
        out = []
        for j in range(k):
            im = 0
            for x, pos in enumerate(in_pos):
                if m >> (j * ni + x) & 1:
                    im |= 1 << pos
            out.append(im)
        return out

    seen: dict[tuple, int] = {}
    rows: list[list[frozenset]] = []
    states, c = (system.initial,) * k, cs.system.initial
    while (states, c) not in seen:
        seen[(states, c)] = len(rows)
        if system.semantics is Semantics.MOORE:
            omasks = [system.labels[s] for s in states]
            om = to_cs(omasks)
            imasks = from_cs(cs.system.output(c, om))
        else:
            imasks = from_cs(cs.system.labels[c])
            omasks = [system.labels[s][im] for s, im in zip(states, imasks)]
            om = to_cs(omasks)
        rows.append([letter_of(im, system.inputs) | letter_of(o, system.outputs) for im, o in zip(imasks, omasks)])
        states = tuple(system.tau[s][im] for s, im in zip(states, imasks))
        c = cs.system.tau[c][om]
    start = seen[(states, c)]
    return [LassoTrace([r[j] for r in rows[:start]], [r[j] for r in rows[start:]]) for j in range(k)]


def verify_counterexample(cs: CounterStrategy, f: Formula, systems: Iterable[TransitionSystem]) -> bool:
    """Every system, played against ``cs``, yields traces that violate ``f``."""
    for t in systems:
        traces = closed_loop(cs, t)
        if eval_formula(f, traces):
            return False
    return True


def candidate_systems(inputs: Sequence[str], outputs: Sequence[str], semantics: Semantics,
                      max_states: int = 3, samples: int = 40, seed: int = 0) -> list[TransitionSystem]:
    """All one-state systems (capped) plus a seeded sample of larger ones."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    width, top = 1 << len(inputs), 1 << len(outputs)
    out = list(itertools.islice(enumerate_systems(inputs, outputs, 1, semantics), 64))
    rng = random.Random(seed)
    for _ in range(samples):
        b = rng.randint(2, max(2, max_states))
        tau = tuple(tuple(rng.randrange(b) for _ in range(width)) for _ in range(b))
        if semantics is Semantics.MOORE:
            labels = tuple(rng.randrange(top) for _ in range(b))
        else:
            labels = tuple(tuple(rng.randrange(top) for _ in range(width)) for _ in range(b))
        out.append(TransitionSystem(inputs, outputs, semantics, tau, labels))
    return out


# ---------------------------------------------------------------------------
# search


def counterexample_at(problem: CounterexampleProblem, bound: int, cancel: threading.Event | None = None,
                      deadline: float | None = None, max_nodes: int | None = None,
                      systems: Sequence[TransitionSystem] | None = None) -> CounterStrategy | None:
    """Counter strategy with exactly ``bound`` states, verified on candidate systems."""
    cs_ = encode(problem.instance(bound))
    model = solve(cs_, "builtin", cancel=cancel, deadline=deadline, max_nodes=max_nodes)
    if model is None:
        return None
    strat = CounterStrategy(extract(model, cs_, role="environment"), problem.k, problem, bound, dict(model.stats))
    if systems is None:
        systems = candidate_systems(problem.inputs, problem.outputs, problem.semantics)
    if not verify_counterexample(strat, problem.formula, systems):
        raise SoundnessError("counter strategy failed closed-loop verification")
    return strat


def find_counterexample(f: Formula, k: int, max_bound: int, alphabet: AlphabetSpec | tuple,
                        semantics: Semantics = Semantics.MOORE, cancel: threading.Event | None = None,
                        deadline: float | None = None, attempt_nodes: int | None = 20_000) -> CounterStrategy | None:
    """Bounds in increasing order; at each bound single-target objectives get ``attempt_nodes`` first."""
    problem = build_counterexample_problem(f, k, alphabet, semantics)
    systems = candidate_systems(problem.inputs, problem.outputs, problem.semantics)
    for b in range(1, max_bound + 1):
        for p in problem.attempts():
            if cancel is not None and cancel.is_set():
                return None
            budget = None if p is problem else attempt_nodes
            try:
                found = counterexample_at(p, b, cancel, deadline, budget, systems)
            except Interrupted:
                if p is problem:
                    return None
                continue
            if found is not None:
                return found
    return None


def spec_formula(spec) -> Formula:
    """The universal formula whose unrealizability a counterexample witnesses."""
    return spec.combined()
