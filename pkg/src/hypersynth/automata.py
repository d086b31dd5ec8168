"""Büchi automata for quantifier-free bodies and their universal co-Büchi duals.

Letters are sets of indexed propositions ``(ap, var)``; transition guards
are propositional :class:`~hypersynth.formula.Term` objects over
:class:`~hypersynth.formula.Atom` s, so the alphabet is never expanded.
"""

from __future__ import annotations

import enum
from collections import deque
from collections.abc import Callable
from dataclasses import dataclass

import networkx as nx

from .formula import (
    FALSE, TRUE, And, Atom, Const, Iff, Implies, Next, Not, Or, Release, Term, Until,
    atoms, conj, disj, format_term, negate_to_nnf, subterms, to_nnf, is_nnf,
)
from .semantics import LassoTrace


class Mode(enum.Enum):
    NBA = "nondet-buchi"
    UCW = "universal-cobuchi"


@dataclass(frozen=True)
class Transition:
    source: int
    guard: Term
    target: int


@dataclass(frozen=True)
class SymbolicAutomaton:
    states: tuple[str, ...]
    initial: int
    transitions: tuple[Transition, ...]
    marked: frozenset[int]
    mode: Mode
    alphabet: frozenset[Atom]

    def __post_init__(self):
        n = len(self.states)
        if not 0 <= self.initial < n:
            raise ValueError("initial state out of range")
        for t in self.transitions:
            if not (0 <= t.source < n and 0 <= t.target < n):
                raise ValueError(f"transition {t} leaves the state set")
            stray = atoms(t.guard) - self.alphabet
            if stray:
                raise ValueError(f"guard mentions atoms outside the alphabet: {sorted(map(str, stray))}")
        if not self.marked <= set(range(n)):
            raise ValueError("marked states out of range")

    @property
    def size(self) -> int:
        return len(self.states)

    @property
    def variables(self) -> frozenset[str]:
        return frozenset(a.var for a in self.alphabet)

    def out(self, q: int) -> list[Transition]:
        return [t for t in self.transitions if t.source == q]


# ---------------------------------------------------------------------------
# guards


def is_propositional(t: Term) -> bool:
    return all(isinstance(s, (Atom, Const, Not, And, Or, Implies, Iff)) for s in subterms(t))


def guard_holds(guard: Term, letter: frozenset) -> bool:
    match guard:
        case Atom(ap, var):
            return (ap, var) in letter
        case Const(v):
            return v
        case Not(a):
            return not guard_holds(a, letter)
        case And(a, b):
            return guard_holds(a, letter) and guard_holds(b, letter)
        case Or(a, b):
            return guard_holds(a, letter) or guard_holds(b, letter)
        case Implies(a, b):
            return (not guard_holds(a, letter)) or guard_holds(b, letter)
        case Iff(a, b):
            return guard_holds(a, letter) == guard_holds(b, letter)
    raise TypeError(f"guard is not propositional: {guard!r}")


# ---------------------------------------------------------------------------
# tableau construction


@dataclass(frozen=True)
class _Cover:
    guard: object
    nexts: frozenset[Term]
    postponed: frozenset[Term]


def _and(a: Term, b: Term) -> Term:
    if a == TRUE or a == b:
        return b
    if b == TRUE:
        return a
    if a == FALSE or b == FALSE:
        return FALSE
    if Not(a) == b or Not(b) == a:
        return FALSE
    return And(a, b)


def _or(a: Term, b: Term) -> Term:
    if a == FALSE or a == b:
        return b
    if b == FALSE:
        return a
    if a == TRUE or b == TRUE:
        return TRUE
    return Or(a, b)


class _TermGuards:
    """Guards as formulas; used when the support is too wide for truth tables."""

    def __init__(self):
        self.true, self.false = TRUE, FALSE

    def leaf(self, t: Term) -> Term:
        return t

    def conj(self, a, b):
        return _and(a, b)

    def disj(self, a, b):
        return _or(a, b)

    def term(self, g) -> Term:
        return g


class _TableGuards:
    """Guards as truth tables: bit ``m`` of the integer is the value under assignment ``m``.

    Bit ``j`` of an assignment index is the value of ``support[j]``.
    """

    def __init__(self, support: list[Atom]):
        self.support = support
        self.index = {a: j for j, a in enumerate(support)}
        n = len(support)
        self.false = 0
        self.true = (1 << (1 << n)) - 1
        self.atom = []
        for j in range(n):
            half = 1 << j
            mask, width = ((1 << half) - 1) << half, 2 * half
            # doubling keeps this linear in the table size
            while width < 1 << n:
                mask |= mask << width
                width *= 2
            self.atom.append(mask)
        self._terms: dict[tuple[int, int], Term] = {}

    def leaf(self, t: Term) -> int:
        match t:
            case Atom():
                return self.atom[self.index[t]]
            case Const(v):
                return self.true if v else 0
            case Not(a):
                return self.true ^ self.leaf(a)
            case And(a, b):
                return self.leaf(a) & self.leaf(b)
            case Or(a, b):
                return self.leaf(a) | self.leaf(b)
            case Implies(a, b):
                return (self.true ^ self.leaf(a)) | self.leaf(b)
            case Iff(a, b):
                return self.true ^ (self.leaf(a) ^ self.leaf(b))
        raise TypeError(f"guard is not propositional: {t!r}")

    def conj(self, a: int, b: int) -> int:
        return a & b

    def disj(self, a: int, b: int) -> int:
        return a | b

    def term(self, g: int, j: int = 0) -> Term:
        """Shannon expansion in support order, sharing equal cofactors."""
        if g == 0:
            return FALSE
        if g == self.true:
            return TRUE
        key = (g, j)
        if key in self._terms:
            return self._terms[key]
        half = 1 << j
        pos = self.atom[j]
        hi = g & pos
        hi |= hi >> half
        lo = g & (self.true ^ pos)
        lo |= lo << half
        a = self.support[j]
        if hi == lo:
            out = self.term(g, j + 1)
        else:
            t_hi, t_lo = self.term(hi, j + 1), self.term(lo, j + 1)
            if t_lo == FALSE:
                out = _and(a, t_hi)
            elif t_hi == FALSE:
                out = _and(Not(a), t_lo)
            elif t_hi == TRUE:
                out = _or(a, t_lo)
            elif t_lo == TRUE:
                out = _or(Not(a), t_hi)
            else:
                out = _or(_and(a, t_hi), _and(Not(a), t_lo))
        self._terms[key] = out
        return out


TABLE_LIMIT = 20
_NONE: frozenset = frozenset()


class _CoverBuilder:
    """Ways to satisfy a term now: a guard on the current letter plus next-step obligations.

    An until lands in the postponed set when the cover defers it.
    Covers with equal obligations and postponed sets are merged.
    """

    def __init__(self, algebra, check: Callable[[], None] | None = None):
        self.alg = algebra
        self.check = check
        self.memo: dict[Term, list[_Cover]] = {}
        # progress of interrupted products, so an aborted expansion resumes
        self._partial: dict[object, tuple[int, object]] = {}

    def _add(self, merged: dict, guard, nexts: frozenset, postponed: frozenset):
        if guard == self.alg.false:
            return
        key = (nexts, postponed)
        merged[key] = self.alg.disj(merged[key], guard) if key in merged else guard

    def merge(self, covers: list[_Cover]) -> list[_Cover]:
        merged: dict[tuple[frozenset, frozenset], object] = {}
        for c in covers:
            self._add(merged, c.guard, c.nexts, c.postponed)
        return [_Cover(g, n, p) for (n, p), g in merged.items()]

    def product(self, xs: list[_Cover], ys: list[_Cover], key: object = None) -> list[_Cover]:
        # merge on the fly: the full cross product can be far larger than its merge
        start, merged = self._partial.get(key, (0, {}))
        for i in range(start, len(xs)):
            if self.check is not None:
                if key is not None:
                    self._partial[key] = (i, merged)
                self.check()
            x = xs[i]
            for y in ys:
                self._add(merged, self.alg.conj(x.guard, y.guard), x.nexts | y.nexts, x.postponed | y.postponed)
        self._partial.pop(key, None)
        return [_Cover(g, n, p) for (n, p), g in merged.items()]

    def of(self, t: Term) -> list[_Cover]:
        if t in self.memo:
            return self.memo[t]
        alg = self.alg
        if isinstance(t, Const):
            out = [_Cover(alg.true, _NONE, _NONE)] if t.value else []
        elif is_propositional(t):
            out = self.merge([_Cover(alg.leaf(t), _NONE, _NONE)])
        else:
            match t:
                case And(a, b):
                    out = self.product(self.of(a), self.of(b), t)
                case Or(a, b):
                    out = self.merge(self.of(a) + self.of(b))
                case Next(a):
                    out = [_Cover(alg.true, frozenset([a]), _NONE)]
                case Until(a, b):
                    stay = frozenset([t])
                    out = self.merge(self.of(b) + [
                        _Cover(c.guard, c.nexts | stay, c.postponed | stay) for c in self.of(a)
                    ])
                case Release(a, b):
                    stay = frozenset([t])
                    both = self.product(self.of(a), self.of(b), t)
                    out = self.merge(both + [_Cover(c.guard, c.nexts | stay, c.postponed) for c in self.of(b)])
                case _:
                    raise TypeError(f"term is not in negation normal form: {t!r}")
        self.memo[t] = out
        return out

    def covers(self, obligations: frozenset[Term]) -> list[_Cover]:
        key = ("covers", obligations)
        j, out = self._partial.get(key, (0, [_Cover(self.alg.true, _NONE, _NONE)]))
        terms = sorted(obligations, key=str)
        while j < len(terms):
            self._partial[key] = (j, out)
            out = self.product(out, self.of(terms[j]), (key, j))
            j += 1
        self._partial.pop(key, None)
        return out


def _state_name(obligations: frozenset[Term], counter: int | None) -> str:
    body = ", ".join(sorted(format_term(t) for t in obligations)) or "true"
    return f"{{{body}}}" if counter is None else f"{{{body}}}#{counter}"


class Tableau:
    """Lazily expanded Büchi automaton for an NNF body.

    States are pairs (obligation set, counter).  The generalised acceptance
    (one set per until-subformula, satisfied when the until is not
    postponed) is degeneralised with a counter; counter value ``k`` marks
    the accepting states.  Covers sharing target and postponed set are
    merged into one transition whose guard is the disjunction of theirs.
    """

    def __init__(self, body: Term, check: Callable[[], None] | None = None):
        """``check`` is polled during cover construction and may raise to abort."""
        if not is_nnf(body):
            body = to_nnf(body)
        self.body = body
        self.untils = sorted({s for s in subterms(body) if isinstance(s, Until)}, key=str)
        self.alphabet = frozenset(atoms(body))
        self.support = sorted(self.alphabet, key=str)
        if len(self.support) <= TABLE_LIMIT:
            self.guards = _TableGuards(self.support)
        else:
            self.guards = _TermGuards()
        self._builder = _CoverBuilder(self.guards, check)
        self._raw: dict[int, list[tuple[object, int]]] = {}
        self._obls: list[frozenset[Term]] = []
        self._obl_ids: dict[frozenset[Term], int] = {}
        self._gen: dict[int, list[tuple[Term, int, frozenset[Term]]]] = {}
        self._keys: list[tuple[int, int]] = []
        self._ids: dict[tuple[int, int], int] = {}
        self._succ: dict[int, list[tuple[Term, int]]] = {}
        self.initial = self._state(self._obl(frozenset([body])), 0)

    def _obl(self, obl: frozenset[Term]) -> int:
        obl = frozenset(t for t in obl if t != Const(True))
        if obl not in self._obl_ids:
            self._obl_ids[obl] = len(self._obls)
            self._obls.append(obl)
        return self._obl_ids[obl]

    def _state(self, o: int, c: int) -> int:
        key = (o, c)
        if key not in self._ids:
            self._ids[key] = len(self._keys)
            self._keys.append(key)
        return self._ids[key]

    def _general(self, o: int):
        if o not in self._gen:
            covers = sorted(self._builder.covers(self._obls[o]), key=lambda c: (len(c.nexts), sorted(map(str, c.nexts))))
            self._gen[o] = [(c.guard, self._obl(c.nexts), c.postponed) for c in covers]
        return self._gen[o]

    @property
    def check(self) -> Callable[[], None] | None:
        return self._builder.check

    @check.setter
    def check(self, check: Callable[[], None] | None):
        self._builder.check = check

    @property
    def size(self) -> int:
        """Number of states discovered so far."""
        return len(self._keys)

    def is_marked(self, q: int) -> bool:
        return self._keys[q][1] == len(self.untils)

    def name(self, q: int) -> str:
        o, c = self._keys[q]
        return _state_name(self._obls[o], c if self.untils else None)

    @property
    def tabular(self) -> bool:
        """Whether raw guards are truth tables over :attr:`support`."""
        return isinstance(self.guards, _TableGuards)

    def successors(self, q: int) -> list[tuple[Term, int]]:
        if q not in self._succ:
            self._succ[q] = [(self.guards.term(g), r) for g, r in self.raw_successors(q)]
        return self._succ[q]

    def raw_successors(self, q: int) -> list[tuple[object, int]]:
        if q not in self._raw:
            o, c = self._keys[q]
            k = len(self.untils)
            base = 0 if c == k else c
            out = []
            for guard, tgt, post in self._general(o):
                c1 = base
                while c1 < k and self.untils[c1] not in post:
                    c1 += 1
                out.append((guard, self._state(tgt, c1)))
            self._raw[q] = out
        return self._raw[q]

    def explore(self, mode: Mode = Mode.NBA, alphabet: frozenset[Atom] | None = None) -> SymbolicAutomaton:
        seen = {self.initial}
        queue = deque([self.initial])
        transitions = []
        while queue:
            q = queue.popleft()
            for guard, r in self.successors(q):
                transitions.append(Transition(q, guard, r))
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
        n = self.size
        return SymbolicAutomaton(
            tuple(self.name(q) for q in range(n)),
            self.initial,
            tuple(transitions),
            frozenset(q for q in range(n) if self.is_marked(q)),
            mode,
            self.alphabet | (alphabet or frozenset()),
        )


def ltl_to_nba(body: Term) -> SymbolicAutomaton:
    """Nondeterministic Büchi automaton accepting the zipped words satisfying ``body``."""
    return Tableau(body).explore()


def dualize(a: SymbolicAutomaton, expect: Mode = Mode.NBA) -> SymbolicAutomaton:
    """Flip branching and acceptance; marked states become rejecting (or back)."""
    if a.mode is not expect:
        raise ValueError(f"expected a {expect.value} automaton, got {a.mode.value}")
    flipped = Mode.UCW if a.mode is Mode.NBA else Mode.NBA
    return SymbolicAutomaton(a.states, a.initial, a.transitions, a.marked, flipped, a.alphabet)


def ucw_for(body: Term) -> SymbolicAutomaton:
    """Universal co-Büchi automaton whose language is the models of ``body``."""
    return Tableau(negate_to_nnf(body)).explore(Mode.UCW, frozenset(atoms(body)))


def compile_guard(guard: Term, bit_of: dict[Atom, int]):
    """Turn a guard into a predicate over an integer letter mask."""

    def go(t: Term) -> str:
        match t:
            case Atom():
                if t not in bit_of:
                    raise ValueError(f"guard atom {t} is not in the letter alphabet")
                return f"(m >> {bit_of[t]} & 1)"
            case Const(v):
                return "True" if v else "False"
            case Not(a):
                return f"(not {go(a)})"
            case And(a, b):
                return f"({go(a)} and {go(b)})"
            case Or(a, b):
                return f"({go(a)} or {go(b)})"
            case Implies(a, b):
                return f"((not {go(a)}) or {go(b)})"
            case Iff(a, b):
                return f"(bool({go(a)}) == bool({go(b)}))"
        raise TypeError(f"guard is not propositional: {t!r}")

    return eval(f"lambda m: bool({go(guard)})")


# ---------------------------------------------------------------------------
# acceptance of lassos


def _check_letters(a: SymbolicAutomaton, w: LassoTrace):
    for x in w.stem + w.loop:
        for item in x:
            if not (isinstance(item, tuple) and len(item) == 2):
                raise ValueError(f"letter element {item!r} is not an (ap, var) pair; zip the traces first")


def _marked_cycle(a: SymbolicAutomaton, w: LassoTrace) -> bool:
    _check_letters(a, w)
    n = len(w.stem) + len(w.loop)
    succ = list(range(1, n)) + [len(w.stem)]
    by_source: dict[int, list[Transition]] = {}
    for t in a.transitions:
        by_source.setdefault(t.source, []).append(t)
    g = nx.DiGraph()
    start = (a.initial, 0)
    g.add_node(start)
    stack = [start]
    while stack:
        q, i = stack.pop()
        letter = w.letter(i)
        for t in by_source.get(q, ()):
            if guard_holds(t.guard, letter):
                nxt = (t.target, succ[i])
                if nxt not in g:
                    g.add_node(nxt)
                    stack.append(nxt)
                g.add_edge((q, i), nxt)
    for comp in nx.strongly_connected_components(g):
        if not any(q in a.marked for q, _ in comp):
            continue
        if len(comp) > 1:
            return True
        v = next(iter(comp))
        if g.has_edge(v, v):
            return True
    return False


def nba_accepts_lasso(a: SymbolicAutomaton, w: LassoTrace) -> bool:
    """Some run visits an accepting state infinitely often."""
    if a.mode is not Mode.NBA:
        raise ValueError("nba_accepts_lasso needs a nondet-buchi automaton")
    return _marked_cycle(a, w)


def ucw_accepts_lasso(a: SymbolicAutomaton, w: LassoTrace) -> bool:
    """Every run visits rejecting states only finitely often."""
    if a.mode is not Mode.UCW:
        raise ValueError("ucw_accepts_lasso needs a universal-cobuchi automaton")
    return not _marked_cycle(a, w)


# ---------------------------------------------------------------------------
# export


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def to_dot(a: SymbolicAutomaton, name: str = "automaton") -> str:
    lines = [f"digraph {name} {{", "  rankdir=LR;", '  init [shape=point];']
    for q, label in enumerate(a.states):
        shape = "doublecircle" if q in a.marked else "circle"
        lines.append(f'  q{q} [shape={shape}, label="q{q}", tooltip="{_dot_escape(label)}"];')
    lines.append(f"  init -> q{a.initial};")
    for t in a.transitions:
        lines.append(f'  q{t.source} -> q{t.target} [label="{_dot_escape(format_term(t.guard))}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"

