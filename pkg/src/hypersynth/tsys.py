"""Finite transition systems, self-composition, run graphs and model checking."""

from __future__ import annotations

import enum
import itertools
import json
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, Sequence

import networkx as nx

from .automata import SymbolicAutomaton, compile_guard, ucw_for
from .formula import Atom, Formula, Term, desugar_term, props
from .semantics import LassoTrace, unzip_lasso


class Semantics(enum.Enum):
    MOORE = "moore"
    MEALY = "mealy"

    @property
    def opposite(self) -> "Semantics":
        return Semantics.MEALY if self is Semantics.MOORE else Semantics.MOORE


def mask_of(letter: Iterable[Hashable], names: Sequence[Hashable]) -> int:
    letter = set(letter)
    stray = letter - set(names)
    if stray:
        raise ValueError(f"letter mentions unknown propositions {sorted(map(str, stray))}")
    return sum(1 << j for j, a in enumerate(names) if a in letter)


def letter_of(mask: int, names: Sequence[Hashable]) -> frozenset:
    return frozenset(a for j, a in enumerate(names) if mask >> j & 1)


@dataclass(frozen=True)
class TransitionSystem:
    """Deterministic system with ``len(tau)`` states and initial state ``initial``.

    ``tau[s][m]`` is the successor under the input letter with mask ``m``
    (bit ``j`` set iff ``inputs[j]`` holds).  Moore labels are one output
    mask per state; Mealy labels are indexed by state and input mask.
    """

    inputs: tuple[Hashable, ...]
    outputs: tuple[Hashable, ...]
    semantics: Semantics
    tau: tuple[tuple[int, ...], ...]
    labels: tuple
    initial: int = 0
    role: str = "system"

    def __post_init__(self):
        b = len(self.tau)
        if b == 0:
            raise ValueError("a transition system needs at least one state")
        if set(self.inputs) & set(self.outputs):
            raise ValueError("inputs and outputs overlap")
        if not 0 <= self.initial < b:
            raise ValueError("initial state out of range")
        width = 1 << len(self.inputs)
        top = 1 << len(self.outputs)
        for s, row in enumerate(self.tau):
            if len(row) != width:
                raise ValueError(f"state {s} is not total over the {width} input letters")
            if any(not 0 <= x < b for x in row):
                raise ValueError(f"state {s} has a successor out of range")
        if len(self.labels) != b:
            raise ValueError("one label entry per state is required")
        for s, lab in enumerate(self.labels):
            entries = (lab,) if self.semantics is Semantics.MOORE else lab
            if self.semantics is Semantics.MEALY and len(entries) != width:
                raise ValueError(f"mealy labels of state {s} are not total")
            if any(not 0 <= x < top for x in entries):
                raise ValueError(f"label of state {s} out of range")

    @property
    def size(self) -> int:
        return len(self.tau)

    @property
    def aps(self) -> tuple[Hashable, ...]:
        return self.inputs + self.outputs

    def output(self, s: int, imask: int) -> int:
        if self.semantics is Semantics.MOORE:
            return self.labels[s]
        return self.labels[s][imask]

    def letter(self, s: int, imask: int) -> frozenset:
        return letter_of(imask, self.inputs) | letter_of(self.output(s, imask), self.outputs)

    def run(self, inputs: Iterable[Iterable[Hashable]]) -> list[frozenset]:
        """Letters produced on a finite input word."""
        s, out = self.initial, []
        for x in inputs:
            m = mask_of(x, self.inputs)
            out.append(self.letter(s, m))
            s = self.tau[s][m]
        return out

    def to_mealy(self) -> "TransitionSystem":
        if self.semantics is Semantics.MEALY:
            return self
        width = 1 << len(self.inputs)
        labels = tuple(tuple([lab] * width) for lab in self.labels)
        return TransitionSystem(self.inputs, self.outputs, Semantics.MEALY, self.tau, labels, self.initial, self.role)

    def reachable(self) -> set[int]:
        seen, stack = {self.initial}, [self.initial]
        while stack:
            for t in self.tau[stack.pop()]:
                if t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen


def constant_system(inputs, outputs, output: Iterable[Hashable] = (), semantics=Semantics.MOORE) -> TransitionSystem:
    inputs, outputs = tuple(inputs), tuple(outputs)
    m = mask_of(output, outputs)
    width = 1 << len(inputs)
    labels = (m,) if semantics is Semantics.MOORE else ((m,) * width,)
    return TransitionSystem(inputs, outputs, semantics, ((0,) * width,), labels)


# ---------------------------------------------------------------------------
# traces


def generated_trace(t: TransitionSystem, w: LassoTrace) -> LassoTrace:
    """Label an input lasso with the outputs produced along ``tau*``."""
    n = len(w.stem) + len(w.loop)
    succ = list(range(1, n)) + [len(w.stem)]
    masks = [mask_of(w.letter(p), t.inputs) for p in range(n)]
    seen: dict[tuple[int, int], int] = {}
    letters: list[frozenset] = []
    s, p = t.initial, 0
    while (s, p) not in seen:
        seen[(s, p)] = len(letters)
        letters.append(t.letter(s, masks[p]))
        s, p = t.tau[s][masks[p]], succ[p]
    k = seen[(s, p)]
    return LassoTrace(letters[:k], letters[k:])


def self_compose(t: TransitionSystem, n: int | Sequence[str]) -> TransitionSystem:
    """The ``n``-fold product; propositions become ``(ap, var)`` pairs.

    Composite states are mixed-radix numbers with component ``j`` as digit
    ``j``; composite input masks concatenate the component masks.
    """
    variables = [f"pi{j + 1}" for j in range(n)] if isinstance(n, int) else list(n)
    k = len(variables)
    if k == 0:
        raise ValueError("self-composition needs n >= 1")
    b, ni, no = t.size, len(t.inputs), len(t.outputs)
    inputs = tuple((a, v) for v in variables for a in t.inputs)
    outputs = tuple((a, v) for v in variables for a in t.outputs)
    states = list(itertools.product(range(b), repeat=k))
    enc = {st: sum(x * b**j for j, x in enumerate(st)) for st in states}
    width = 1 << (ni * k)
    imask_parts = [[(m >> (j * ni)) & ((1 << ni) - 1) for j in range(k)] for m in range(width)]
    tau = [None] * len(states)
    labels = [None] * len(states)
    for st in states:
        row = []
        for parts in imask_parts:
            row.append(enc[tuple(t.tau[s][m] for s, m in zip(st, parts))])
        tau[enc[st]] = tuple(row)
        if t.semantics is Semantics.MOORE:
            labels[enc[st]] = sum(t.labels[s] << (j * no) for j, s in enumerate(st))
        else:
            labels[enc[st]] = tuple(
                sum(t.labels[s][m] << (j * no) for j, (s, m) in enumerate(zip(st, parts))) for parts in imask_parts
            )
    return TransitionSystem(inputs, outputs, t.semantics, tuple(tau), tuple(labels), enc[(t.initial,) * k], t.role)


# ---------------------------------------------------------------------------
# run graph


@dataclass
class RunGraph:
    """Reachable part of the product of a system and a universal co-Büchi automaton.

    Vertices are ``(state, q)`` pairs numbered in discovery order; vertex 0
    is initial.  ``labels[(u, w)]`` is the smallest input mask driving the edge.
    """

    vertices: list[tuple[int, int]]
    succ: list[list[int]]
    labels: dict[tuple[int, int], int]
    rejecting: set[int]
    system: TransitionSystem
    automaton: SymbolicAutomaton

    @property
    def initial(self) -> int:
        return 0

    def graph(self) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(range(len(self.vertices)))
        for u, ws in enumerate(self.succ):
            g.add_edges_from((u, w) for w in ws)
        return g


def build_run_graph(tn: TransitionSystem, a: SymbolicAutomaton) -> RunGraph:
    bit_of = {}
    for j, ap in enumerate(tn.aps):
        if isinstance(ap, tuple) and len(ap) == 2:
            bit_of[Atom(*ap)] = j
    missing = a.alphabet - set(bit_of)
    if missing:
        raise ValueError(f"automaton propositions missing from the system: {sorted(map(str, missing))}")
    out: dict[int, list[tuple]] = {}
    for tr in a.transitions:
        out.setdefault(tr.source, []).append((compile_guard(tr.guard, bit_of), tr.target))
    ni = len(tn.inputs)
    width = 1 << ni
    index = {(tn.initial, a.initial): 0}
    vertices = [(tn.initial, a.initial)]
    succ: list[list[int]] = [[]]
    labels: dict[tuple[int, int], int] = {}
    queue = deque([0])
    while queue:
        u = queue.popleft()
        s, q = vertices[u]
        trans = out.get(q, ())
        if not trans:
            continue
        for m in range(width):
            letter = m | (tn.output(s, m) << ni)
            s2 = tn.tau[s][m]
            for fn, q2 in trans:
                if fn(letter):
                    v = (s2, q2)
                    if v not in index:
                        index[v] = len(vertices)
                        vertices.append(v)
                        succ.append([])
                        queue.append(index[v])
                    w = index[v]
                    if (u, w) not in labels:
                        labels[(u, w)] = m
                        succ[u].append(w)
    rejecting = {i for i, (_, q) in enumerate(vertices) if q in a.marked}
    return RunGraph(vertices, succ, labels, rejecting, tn, a)


@dataclass(frozen=True)
class Annotation:
    """Reachability flag and rejecting-visit counter per vertex."""

    reachable: tuple[bool, ...]
    counter: tuple[int, ...]


@dataclass(frozen=True)
class RejectingLasso:
    """A run-graph path to a rejecting vertex followed by a cycle back to it."""

    stem: tuple[int, ...]
    cycle: tuple[int, ...]
    stem_inputs: tuple[int, ...]
    cycle_inputs: tuple[int, ...]


def _bad_sccs(g: RunGraph, dg: nx.DiGraph) -> list[set[int]]:
    bad = []
    for comp in nx.strongly_connected_components(dg):
        if not comp & g.rejecting:
            continue
        if len(comp) > 1 or any(dg.has_edge(v, v) for v in comp):
            bad.append(comp)
    return bad


def find_annotation(g: RunGraph) -> Annotation | None:
    """Annotation exists iff no reachable cycle visits a rejecting vertex."""
    dg = g.graph()
    if _bad_sccs(g, dg):
        return None
    cond = nx.condensation(dg)
    members = cond.graph["mapping"]
    weight = {c: sum(1 for v in cond.nodes[c]["members"] if v in g.rejecting) for c in cond.nodes}
    best: dict[int, int] = {}
    for c in nx.topological_sort(cond):
        preds = [best[p] for p in cond.predecessors(c)]
        best[c] = (max(preds) if preds else 0) + weight[c]
    n = len(g.vertices)
    return Annotation(tuple([True] * n), tuple(best[members[v]] for v in range(n)))


def _bfs_path(succ, sources: Iterable[int], target: int, allowed: set[int] | None = None) -> list[int] | None:
    parent: dict[int, int | None] = {}
    queue = deque()
    for s in sources:
        if s not in parent and (allowed is None or s in allowed):
            parent[s] = None
            queue.append(s)
    while queue:
        u = queue.popleft()
        if u == target:
            path = [u]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            return path[::-1]
        for w in sorted(succ[u]):
            if w not in parent and (allowed is None or w in allowed):
                parent[w] = u
                queue.append(w)
    return None


def find_rejecting_lasso(g: RunGraph) -> RejectingLasso | None:
    """Shortest stem to the lowest-index rejecting vertex on a cycle, plus a shortest cycle."""
    dg = g.graph()
    bad = _bad_sccs(g, dg)
    if not bad:
        return None
    r = min(v for comp in bad for v in comp if v in g.rejecting)
    comp = next(c for c in bad if r in c)
    stem = _bfs_path(g.succ, [0], r)
    loop = _bfs_path(g.succ, [w for w in sorted(g.succ[r]) if w in comp], r, comp)
    cycle = [r] + loop
    return RejectingLasso(
        tuple(stem[:-1]),
        tuple(cycle[:-1]),
        tuple(g.labels[(u, w)] for u, w in zip(stem, stem[1:])),
        tuple(g.labels[(u, w)] for u, w in zip(cycle, cycle[1:])),
    )


def check_annotation(g: RunGraph, ann: Annotation) -> bool:
    """Local consistency: counters never decrease and strictly grow into rejecting vertices."""
    for u, ws in enumerate(g.succ):
        for w in ws:
            need = ann.counter[u] + (1 if w in g.rejecting else 0)
            if ann.counter[w] < need:
                return False
    return True


# ---------------------------------------------------------------------------
# model checking


@dataclass(frozen=True)
class CheckVerdict:
    holds: bool
    witnesses: tuple[LassoTrace, ...] = ()
    variables: tuple[str, ...] = ()
    vertices: int = 0

    def __bool__(self) -> bool:
        return self.holds


@lru_cache(maxsize=256)
def _ucw(body: Term) -> SymbolicAutomaton:
    return ucw_for(desugar_term(body))


def model_check(t: TransitionSystem, f: Formula) -> CheckVerdict:
    """Check a universal formula on ``t`` through the run graph of the self-composition."""
    if not f.is_universal():
        raise ValueError("model_check needs a universal formula")
    stray = props(f.body) - set(t.aps)
    if stray:
        raise ValueError(f"formula mentions propositions unknown to the system: {sorted(stray)}")
    variables = f.variables or ("pi",)
    tn = self_compose(t, variables)
    g = build_run_graph(tn, _ucw(f.body))
    lasso = find_rejecting_lasso(g)
    if lasso is None:
        return CheckVerdict(True, (), tuple(variables), len(g.vertices))
    stem = [letter_of(m, tn.inputs) for m in lasso.stem_inputs]
    loop = [letter_of(m, tn.inputs) for m in lasso.cycle_inputs]
    zipped = generated_trace(tn, LassoTrace(stem, loop))
    parts = unzip_lasso(zipped, variables)
    return CheckVerdict(False, tuple(parts[v] for v in variables), tuple(variables), len(g.vertices))


# ---------------------------------------------------------------------------
# import / export


def to_json(t: TransitionSystem) -> dict:
    width = 1 << len(t.inputs)
    transitions = []
    for s in range(t.size):
        for m in range(width):
            entry = {"from": s, "input": sorted(map(str, letter_of(m, t.inputs))), "to": t.tau[s][m]}
            if t.semantics is Semantics.MEALY:
                entry["output"] = sorted(map(str, letter_of(t.labels[s][m], t.outputs)))
            transitions.append(entry)
    out = {
        "semantics": t.semantics.value,
        "role": t.role,
        "inputs": list(t.inputs),
        "outputs": list(t.outputs),
        "states": list(range(t.size)),
        "initial": t.initial,
        "transitions": transitions,
    }
    if t.semantics is Semantics.MOORE:
        out["labels"] = {str(s): sorted(map(str, letter_of(t.labels[s], t.outputs))) for s in range(t.size)}
    return out


def from_json(data: Mapping | str) -> TransitionSystem:
    if isinstance(data, str):
        data = json.loads(data)
    try:
        semantics = Semantics(data["semantics"])
        inputs = tuple(data["inputs"])
        outputs = tuple(data["outputs"])
        names = list(data["states"])
        idx = {str(s): j for j, s in enumerate(names)}
        width = 1 << len(inputs)
        tau = [[None] * width for _ in names]
        mealy = [[None] * width for _ in names]
        for tr in data["transitions"]:
            s, m = idx[str(tr["from"])], mask_of(tr["input"], inputs)
            tau[s][m] = idx[str(tr["to"])]
            if semantics is Semantics.MEALY:
                mealy[s][m] = mask_of(tr["output"], outputs)
        if any(x is None for row in tau for x in row):
            raise ValueError("transition relation is not total")
        if semantics is Semantics.MOORE:
            labels = tuple(mask_of(data["labels"][str(s)], outputs) for s in names)
        else:
            if any(x is None for row in mealy for x in row):
                raise ValueError("mealy outputs are not total")
            labels = tuple(tuple(row) for row in mealy)
        initial = idx[str(data["initial"])]
    except KeyError as e:
        raise ValueError(f"malformed transition system: missing {e}") from None
    return TransitionSystem(inputs, outputs, semantics, tuple(map(tuple, tau)), labels, initial, data.get("role", "system"))


def _fmt(letter: frozenset) -> str:
    return ",".join(sorted(map(str, letter))) or "-"


def to_dot(t: TransitionSystem, name: str = "system") -> str:
    """Moore outputs label states; Mealy outputs label edges after a slash."""
    width = 1 << len(t.inputs)
    lines = [f"digraph {name} {{", "  rankdir=LR;", "  init [shape=point];"]
    for s in range(t.size):
        label = f"s{s}"
        if t.semantics is Semantics.MOORE:
            label += f"\\n{{{_fmt(letter_of(t.labels[s], t.outputs))}}}"
        lines.append(f'  s{s} [shape=circle, label="{label}"];')
    lines.append(f"  init -> s{t.initial};")
    for s in range(t.size):
        grouped: dict[int, list[str]] = {}
        for m in range(width):
            text = f"{{{_fmt(letter_of(m, t.inputs))}}}"
            if t.semantics is Semantics.MEALY:
                text += f" / {{{_fmt(letter_of(t.labels[s][m], t.outputs))}}}"
            grouped.setdefault(t.tau[s][m], []).append(text)
        for dst, texts in sorted(grouped.items()):
            lines.append(f'  s{s} -> s{dst} [label="{" | ".join(texts)}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def enumerate_systems(inputs, outputs, states: int, semantics=Semantics.MOORE) -> Iterable[TransitionSystem]:
    """All systems with exactly ``states`` states over the given alphabet."""
    inputs, outputs = tuple(inputs), tuple(outputs)
    width = 1 << len(inputs)
    top = 1 << len(outputs)
    rows = list(itertools.product(range(states), repeat=width))
    if semantics is Semantics.MOORE:
        label_space = itertools.product(range(top), repeat=states)
    else:
        label_space = itertools.product(itertools.product(range(top), repeat=width), repeat=states)
    label_space = list(label_space)
    for tau in itertools.product(rows, repeat=states):
        for labels in label_space:
            yield TransitionSystem(inputs, outputs, semantics, tau, labels)
