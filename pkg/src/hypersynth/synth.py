"""Bounded synthesis: existence of a ``b``-state system whose self-composition is accepted.

A :class:`ConstraintSystem` bundles one :class:`BoundedInstance` per
automaton (typically an LTL part with one trace and a hyper part with
``n`` traces); all instances share the unknown transition and labeling
functions.  Two backends decide it: a builtin depth-first search and any
SMT-LIB2 solver run as a subprocess.
"""

from __future__ import annotations

import itertools
import re
import shlex
import subprocess
import tempfile
import threading
import time
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .automata import SymbolicAutomaton, Tableau, compile_guard, ucw_for
from .formula import (
    AlphabetSpec, And, Atom, Const, Formula, Iff, Implies, Not, Or, Term, atoms, desugar_term,
    forall, negate_to_nnf, props,
)
from .tsys import Semantics, TransitionSystem, model_check


class SolverError(RuntimeError):
    """Base class for backend failures."""


class SolverNotFound(SolverError):
    pass


class SolverFailed(SolverError):
    pass


class ModelParseError(SolverError):
    pass


class PartialModel(ValueError):
    pass


class BackendDisagreement(AssertionError):
    pass


class SoundnessError(AssertionError):
    """A returned witness failed independent re-verification."""


class TooWide(SolverError):
    """More input letters than the builtin search tabulates."""


MAX_INPUT_BITS = 16


class Interrupted(Exception):
    """Search stopped by cancellation, deadline or node budget."""


# ---------------------------------------------------------------------------
# instances


@dataclass(frozen=True)
class BoundedInstance:
    """Acceptance of the ``len(variables)``-fold self-composition by the UCW of ``body``."""

    body: Term
    variables: tuple[str, ...]
    bound: int
    semantics: Semantics
    inputs: tuple[str, ...]
    outputs: tuple[str, ...]

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("bound must be at least 1")
        if not self.variables:
            raise ValueError("an instance needs at least one trace variable")
        AlphabetSpec(self.inputs, self.outputs)
        stray = props(self.body) - set(self.inputs) - set(self.outputs)
        if stray:
            raise ValueError(f"body mentions propositions outside the alphabet: {sorted(stray)}")
        unknown = {a.var for a in atoms(self.body)} - set(self.variables)
        if unknown:
            raise ValueError(f"body uses unquantified trace variables {sorted(unknown)}")

    @property
    def n(self) -> int:
        return len(self.variables)

    @property
    def width(self) -> int:
        return 1 << len(self.inputs)

    @cached_property
    def ucw(self) -> SymbolicAutomaton:
        return ucw_for(desugar_term(self.body))

    def tableau(self, check=None) -> Tableau:
        return _cached_tableau(self.body, check)

    def bit_of(self) -> dict[Atom, int]:
        w = len(self.inputs) + len(self.outputs)
        names = self.inputs + self.outputs
        return {Atom(a, v): j * w + k for j, v in enumerate(self.variables) for k, a in enumerate(names)}

    def at(self, bound: int) -> "BoundedInstance":
        return BoundedInstance(self.body, self.variables, bound, self.semantics, self.inputs, self.outputs)


_local = threading.local()
TABLEAU_CACHE = 16


def _cached_tableau(body: Term, check) -> Tableau:
    """Per-thread reuse across bounds and budget rounds; tableaux expand lazily."""
    cache = getattr(_local, "tableaux", None)
    if cache is None:
        cache = _local.tableaux = {}
    tab = cache.get(body)
    if tab is None:
        if len(cache) >= TABLEAU_CACHE:
            cache.clear()
        tab = cache[body] = Tableau(negate_to_nnf(desugar_term(body)))
    tab.check = check
    return tab


def instance_for(f: Formula, bound: int, semantics: Semantics, inputs: Sequence[str], outputs: Sequence[str]) -> BoundedInstance:
    if not f.is_universal():
        raise ValueError("bounded synthesis handles universal formulas only")
    variables = f.variables or ("pi",)
    return BoundedInstance(f.body, tuple(variables), bound, semantics, tuple(inputs), tuple(outputs))


# ---------------------------------------------------------------------------
# constraint system and SMT-LIB rendering


def _tau(s: int, m: int) -> str:
    return f"tau_{s}_{m}"


def _lab(inst: BoundedInstance, s: int, m: int, o: str) -> str:
    if inst.semantics is Semantics.MOORE:
        return f"l_{s}_{o}"
    return f"l_{s}_{m}_{o}"


def _vertex(k: int, states: Sequence[int], q: int) -> str:
    return f"v{k}_{'_'.join(map(str, states))}_{q}"


def _smt_term(t: Term, value) -> str:
    match t:
        case Atom():
            return value(t)
        case Const(v):
            return "true" if v else "false"
        case Not(a):
            return f"(not {_smt_term(a, value)})"
        case And(a, b):
            return f"(and {_smt_term(a, value)} {_smt_term(b, value)})"
        case Or(a, b):
            return f"(or {_smt_term(a, value)} {_smt_term(b, value)})"
        case Implies(a, b):
            return f"(=> {_smt_term(a, value)} {_smt_term(b, value)})"
        case Iff(a, b):
            return f"(= {_smt_term(a, value)} {_smt_term(b, value)})"
    raise TypeError(f"guard is not propositional: {t!r}")


@dataclass(frozen=True)
class ConstraintSystem:
    """Instances sharing one bound, semantics and alphabet."""

    instances: tuple[BoundedInstance, ...]

    def __post_init__(self):
        if not self.instances:
            raise ValueError("a constraint system needs at least one instance")
        first = self.instances[0]
        for inst in self.instances[1:]:
            if (inst.bound, inst.semantics, inst.inputs, inst.outputs) != (
                first.bound, first.semantics, first.inputs, first.outputs,
            ):
                raise ValueError("instances must agree on bound, semantics and alphabet")

    @property
    def bound(self) -> int:
        return self.instances[0].bound

    @property
    def semantics(self) -> Semantics:
        return self.instances[0].semantics

    @property
    def inputs(self) -> tuple[str, ...]:
        return self.instances[0].inputs

    @property
    def outputs(self) -> tuple[str, ...]:
        return self.instances[0].outputs

    def declarations(self) -> list[tuple[str, str, int | None]]:
        """``(name, sort, upper bound)`` for every unknown."""
        b, width = self.bound, 1 << len(self.inputs)
        out: list[tuple[str, str, int | None]] = []
        for s in range(b):
            for m in range(width):
                out.append((_tau(s, m), "Int", b - 1))
        first = self.instances[0]
        for s in range(b):
            ms = [0] if self.semantics is Semantics.MOORE else range(width)
            for m in ms:
                for o in self.outputs:
                    out.append((_lab(first, s, m, o), "Bool", None))
        for k, inst in enumerate(self.instances):
            a = inst.ucw
            top = b**inst.n * a.size
            for states in itertools.product(range(b), repeat=inst.n):
                for q in range(a.size):
                    v = _vertex(k, states, q)
                    out.append((f"lb_{v}", "Bool", None))
                    out.append((f"lc_{v}", "Int", top))
        return out

    def _clauses(self, k: int, inst: BoundedInstance) -> Iterable[str]:
        a = inst.ucw
        b, ni = inst.bound, len(inst.inputs)
        by_source: dict[int, list] = {}
        for tr in a.transitions:
            by_source.setdefault(tr.source, []).append(tr)
        var_index = {v: j for j, v in enumerate(inst.variables)}
        succs = list(itertools.product(range(b), repeat=inst.n))
        for states in succs:
            for q in range(a.size):
                src = _vertex(k, states, q)
                for itup in itertools.product(range(inst.width), repeat=inst.n):
                    for tr in by_source.get(q, ()):
                        guard = self._instantiate(inst, tr.guard, states, itup, var_index, ni)
                        if guard is None:
                            continue
                        rel = ">" if tr.target in a.marked else ">="
                        parts = []
                        for nxt in succs:
                            eqs = " ".join(f"(= {_tau(s, m)} {s2})" for s, m, s2 in zip(states, itup, nxt))
                            dst = _vertex(k, nxt, tr.target)
                            eqs = eqs if inst.n == 1 else f"(and {eqs})"
                            parts.append(f"(=> {eqs} (and lb_{dst} ({rel} lc_{dst} lc_{src})))")
                        body = parts[0] if len(parts) == 1 else f"(and {' '.join(parts)})"
                        yield f"(assert (=> (and lb_{src} {guard}) {body}))"

    @staticmethod
    def _instantiate(inst, guard, states, itup, var_index, ni) -> str | None:
        """Guard with inputs fixed by ``itup``; None when no output choice satisfies it."""
        free = sorted({a for a in atoms(guard) if a.ap in inst.outputs}, key=str)

        def concrete(a: Atom, env: Mapping[Atom, bool]) -> bool:
            if a.ap in inst.outputs:
                return env[a]
            j = var_index[a.var]
            return bool(itup[j] >> inst.inputs.index(a.ap) & 1)

        def holds(t: Term, env) -> bool:
            match t:
                case Atom():
                    return concrete(t, env)
                case Const(v):
                    return v
                case Not(x):
                    return not holds(x, env)
                case And(x, y):
                    return holds(x, env) and holds(y, env)
                case Or(x, y):
                    return holds(x, env) or holds(y, env)
                case Implies(x, y):
                    return (not holds(x, env)) or holds(y, env)
                case Iff(x, y):
                    return holds(x, env) == holds(y, env)
            raise TypeError(t)

        if not any(holds(guard, dict(zip(free, bits))) for bits in itertools.product((False, True), repeat=len(free))):
            return None

        def value(a: Atom) -> str:
            if a.ap in inst.outputs:
                j = var_index[a.var]
                return _lab(inst, states[j], itup[j], a.ap)
            return "true" if concrete(a, {}) else "false"

        return _smt_term(guard, value)

    def clauses(self) -> Iterable[str]:
        for k, inst in enumerate(self.instances):
            yield from self._clauses(k, inst)

    def clause_count(self) -> int:
        return sum(1 for _ in self.clauses())

    def to_smtlib(self) -> str:
        lines = ["(set-logic QF_LIA)", "(set-option :produce-models true)"]
        for name, sort, top in self.declarations():
            lines.append(f"(declare-fun {name} () {sort})")
            if top is not None:
                lines.append(f"(assert (and (<= 0 {name}) (<= {name} {top})))")
        for k, inst in enumerate(self.instances):
            a = inst.ucw
            lines.append(f"(assert lb_{_vertex(k, (0,) * inst.n, a.initial)})")
        lines.extend(self.clauses())
        lines += ["(check-sat)", "(get-model)"]
        return "\n".join(lines) + "\n"


def encode(instances: BoundedInstance | Sequence[BoundedInstance]) -> ConstraintSystem:
    if isinstance(instances, BoundedInstance):
        instances = (instances,)
    return ConstraintSystem(tuple(instances))


@dataclass(frozen=True)
class Model:
    """Values of the transition and labeling unknowns, keyed by their SMT names."""

    values: Mapping[str, int | bool]
    stats: Mapping[str, float] = field(default_factory=dict)


# ---------------------------------------------------------------------------
# builtin backend


class _Inst:
    __slots__ = ("n", "tab", "bit_of", "guards", "index", "states", "qs", "rej", "succ", "pred", "edges",
                 "moves", "project")

    def __init__(self, inst: BoundedInstance, check=None):
        self.n = inst.n
        self.tab = inst.tableau(check)
        self.bit_of = inst.bit_of()
        self.guards: dict[int, list] = {}
        self.index: dict[tuple, int] = {}
        self.states: list[tuple[int, ...]] = []
        self.qs: list[int] = []
        self.rej: list[bool] = []
        self.succ: list[list[int]] = []
        self.pred: list[list[int]] = []
        self.edges: set[tuple[int, int]] = set()
        self.moves: dict[tuple[int, int], list[int]] = {}
        self.project = None
        if self.tab.tabular:
            pos = [self.bit_of[a] for a in self.tab.support]
            body = " | ".join(f"(m >> {p} & 1) << {j}" for j, p in enumerate(pos)) or "0"
            self.project = eval(f"lambda m: {body}")

    def out(self, q: int) -> list:
        g = self.guards.get(q)
        if g is None:
            if self.project is None:
                g = [(compile_guard(guard, self.bit_of), r) for guard, r in self.tab.successors(q)]
            else:
                g = self.tab.raw_successors(q)
            self.guards[q] = g
        return g

    def targets(self, q: int, letter: int) -> list[int]:
        """Automaton successors of ``q`` on a letter in instance bit layout."""
        key = (q, letter)
        found = self.moves.get(key)
        if found is None:
            if self.project is None:
                found = [r for fn, r in self.out(q) if fn(letter)]
            else:
                i = self.project(letter)
                found = [r for t, r in self.out(q) if t >> i & 1]
            self.moves[key] = found
        return found


class BuiltinSearch:
    """Depth-first search over transition and label tables.

    Run-graph vertices are created as soon as the unknowns they depend on
    are fixed; every new edge is checked for closing a cycle through a
    rejecting vertex, which is the only source of conflicts.  A fresh
    successor state must be the lowest unused index, which removes
    renamings of the same system from the search.
    """

    def __init__(self, cs: ConstraintSystem, cancel: threading.Event | None = None,
                 deadline: float | None = None, max_nodes: int | None = None):
        if len(cs.inputs) > MAX_INPUT_BITS:
            raise TooWide(f"{len(cs.inputs)} input propositions exceed the builtin limit of {MAX_INPUT_BITS}")
        self.cs = cs
        self.b = cs.bound
        self.ni = len(cs.inputs)
        self.no = len(cs.outputs)
        self.width = 1 << self.ni
        self.moore = cs.semantics is Semantics.MOORE
        self.ntau = self.b * self.width
        nlab = self.b if self.moore else self.b * self.width
        self.val = [-1] * (self.ntau + nlab)
        self.watch: list[list] = [[] for _ in self.val]
        self.agenda: list[int] = []
        self.trail: list[tuple] = []
        self.used = 1
        self.cancel = cancel
        self.deadline = deadline
        self.max_nodes = max_nodes
        self.nodes = 0
        # automaton expansion is charged to the node budget
        self.insts = [_Inst(i, self._tick) for i in cs.instances]
        self.itups = {i.n: list(itertools.product(range(self.width), repeat=i.n)) for i in self.insts}

    # variables -----------------------------------------------------------

    def _label_var(self, s: int, m: int) -> int:
        return self.ntau + (s if self.moore else s * self.width + m)

    def _needs(self, states, itup) -> list[int]:
        out = []
        for s, m in zip(states, itup):
            out.append(self._label_var(s, m))
            out.append(s * self.width + m)
        return out

    # mutation with undo --------------------------------------------------

    def _add_vertex(self, k: int, key: tuple, work: list) -> int:
        inst = self.insts[k]
        v = len(inst.states)
        inst.index[key] = v
        inst.states.append(key[0])
        inst.qs.append(key[1])
        inst.rej.append(inst.tab.is_marked(key[1]))
        inst.succ.append([])
        inst.pred.append([])
        self.trail.append(("vertex", k, key))
        if inst.out(key[1]):
            for itup in self.itups[inst.n]:
                work.append((k, v, itup))
        return v

    def _add_edge(self, k: int, u: int, w: int) -> bool:
        inst = self.insts[k]
        if (u, w) in inst.edges:
            return True
        inst.edges.add((u, w))
        inst.succ[u].append(w)
        inst.pred[w].append(u)
        self.trail.append(("edge", k, u, w))
        if u == w:
            return not inst.rej[u]
        if not inst.succ[w]:
            return True
        fwd = {w}
        stack = [w]
        while stack:
            x = stack.pop()
            for y in inst.succ[x]:
                if y not in fwd:
                    fwd.add(y)
                    stack.append(y)
        if u not in fwd or not any(inst.rej[x] for x in fwd):
            return True
        back = {u}
        stack = [u]
        while stack:
            x = stack.pop()
            if inst.rej[x]:
                return False
            for y in inst.pred[x]:
                if y in fwd and y not in back:
                    back.add(y)
                    stack.append(y)
        return True

    def _undo(self, mark: int):
        trail = self.trail
        while len(trail) > mark:
            op = trail.pop()
            kind = op[0]
            if kind == "val":
                self.val[op[1]] = -1
            elif kind == "used":
                self.used -= 1
            elif kind == "wtake":
                self.watch[op[1]] = op[2]
            elif kind == "wadd":
                self.watch[op[1]].pop()
            elif kind == "agenda":
                self.agenda.pop()
            elif kind == "edge":
                _, k, u, w = op
                inst = self.insts[k]
                inst.edges.discard((u, w))
                inst.succ[u].pop()
                inst.pred[w].pop()
            elif kind == "vertex":
                _, k, key = op
                inst = self.insts[k]
                del inst.index[key]
                inst.states.pop()
                inst.qs.pop()
                inst.rej.pop()
                inst.succ.pop()
                inst.pred.pop()

    def _propagate(self, work: list) -> bool:
        val = self.val
        while work:
            k, v, itup = work.pop()
            inst = self.insts[k]
            states = inst.states[v]
            pending = -1
            for x in self._needs(states, itup):
                if val[x] < 0:
                    pending = x
                    break
            if pending >= 0:
                if not self.watch[pending]:
                    self.agenda.append(pending)
                    self.trail.append(("agenda",))
                self.watch[pending].append((k, v, itup))
                self.trail.append(("wadd", pending))
                continue
            nxt = tuple(val[s * self.width + m] for s, m in zip(states, itup))
            w = self.ni + self.no
            letter = 0
            for j, (s, m) in enumerate(zip(states, itup)):
                letter |= (m | val[self._label_var(s, m)] << self.ni) << (j * w)
            for q2 in inst.targets(inst.qs[v], letter):
                key = (nxt, q2)
                target = inst.index.get(key)
                if target is None:
                    target = self._add_vertex(k, key, work)
                if not self._add_edge(k, v, target):
                    return False
        return True

    def _assign(self, x: int, value: int) -> bool:
        self.val[x] = value
        self.trail.append(("val", x))
        if x < self.ntau and value == self.used:
            self.used += 1
            self.trail.append(("used",))
        waiting = self.watch[x]
        self.watch[x] = []
        self.trail.append(("wtake", x, waiting))
        return self._propagate(list(waiting))

    def _pick(self) -> int | None:
        for x in self.agenda:
            if self.val[x] < 0 and self.watch[x]:
                return x
        return None

    def _domain(self, x: int) -> range:
        if x < self.ntau:
            return range(min(self.used + 1, self.b))
        return range(1 << self.no)

    def _tick(self):
        self.nodes += 1
        if self.max_nodes is not None and self.nodes > self.max_nodes:
            raise Interrupted("node budget exhausted")
        if self.nodes & 255 == 0:
            self._poll()

    def _poll(self):
        if self.cancel is not None and self.cancel.is_set():
            raise Interrupted("cancelled")
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise Interrupted("deadline reached")

    def _search(self) -> bool:
        self._tick()
        x = self._pick()
        if x is None:
            return True
        # explicit stack: deep searches would overflow the C stack
        stack = [(x, iter(self._domain(x)), len(self.trail))]
        while stack:
            x, values, mark = stack[-1]
            self._undo(mark)
            value = next(values, None)
            if value is None:
                stack.pop()
                continue
            if not self._assign(x, value):
                continue
            self._tick()
            y = self._pick()
            if y is None:
                return True
            stack.append((y, iter(self._domain(y)), len(self.trail)))
        return False

    def run(self) -> Model | None:
        start = time.monotonic()
        work: list = []
        for k, inst in enumerate(self.insts):
            self._add_vertex(k, ((0,) * inst.n, inst.tab.initial), work)
        ok = self._propagate(work)
        ok = ok and self._search()
        stats = {
            "nodes": self.nodes,
            "seconds": time.monotonic() - start,
            "vertices": sum(len(i.states) for i in self.insts),
        }
        if not ok:
            return None
        return Model(self._values(), stats)

    def _values(self) -> dict[str, int | bool]:
        values: dict[str, int | bool] = {}
        first = self.cs.instances[0]
        for s in range(self.b):
            for m in range(self.width):
                values[_tau(s, m)] = max(self.val[s * self.width + m], 0)
            ms = [0] if self.moore else range(self.width)
            for m in ms:
                mask = max(self.val[self._label_var(s, m)], 0)
                for j, o in enumerate(self.cs.outputs):
                    values[_lab(first, s, m, o)] = bool(mask >> j & 1)
        return values


# ---------------------------------------------------------------------------
# external backend


_TOKEN = re.compile(r"\(|\)|[^\s()]+")


def _sexprs(text: str) -> list:
    stack: list[list] = [[]]
    for tok in _TOKEN.findall(text):
        if tok == "(":
            stack.append([])
        elif tok == ")":
            if len(stack) == 1:
                raise ModelParseError("unbalanced parenthesis in solver output")
            done = stack.pop()
            stack[-1].append(done)
        else:
            stack[-1].append(tok)
    if len(stack) != 1:
        raise ModelParseError("unbalanced parenthesis in solver output")
    return stack[0]


def _value(expr) -> int | bool:
    match expr:
        case "true":
            return True
        case "false":
            return False
        case str() if re.fullmatch(r"\d+", expr):
            return int(expr)
        case ["-", str() as x] if re.fullmatch(r"\d+", x):
            return -int(x)
    raise ModelParseError(f"cannot interpret model value {expr!r}")


def parse_model(text: str) -> dict[str, int | bool]:
    """Collect ``define-fun`` entries of a ``(get-model)`` response."""
    values: dict[str, int | bool] = {}

    def walk(node):
        if isinstance(node, list):
            if len(node) == 5 and node[0] == "define-fun" and node[2] == []:
                values[node[1]] = _value(node[4])
                return
            for child in node:
                walk(child)

    walk(_sexprs(text))
    return values


def run_external(smt: str, solver_cmd: str, timeout: float | None = None) -> dict[str, int | bool] | None:
    with tempfile.TemporaryDirectory() as tmp:
        path = Path(tmp) / "query.smt2"
        path.write_text(smt)
        cmd = shlex.split(solver_cmd) + [str(path)]
        try:
            proc = subprocess.run(cmd, capture_output=True, text=True, timeout=timeout)
        except FileNotFoundError:
            raise SolverNotFound(f"solver executable not found: {cmd[0]}") from None
        except subprocess.TimeoutExpired:
            raise SolverFailed(f"solver timed out after {timeout} s") from None
    lines = proc.stdout.strip().splitlines()
    head = lines[0].strip() if lines else ""
    if head == "unsat":
        return None
    if head != "sat" or proc.returncode != 0:
        detail = (proc.stderr or proc.stdout).strip()[:300]
        raise SolverFailed(f"solver exited with code {proc.returncode} and answer {head!r}: {detail}")
    values = parse_model("\n".join(lines[1:]))
    if not values:
        raise ModelParseError("solver answered sat without a model")
    return values


def solve(cs: ConstraintSystem, backend: str = "builtin", solver_cmd: str | None = None,
          cancel: threading.Event | None = None, deadline: float | None = None,
          max_nodes: int | None = None, dump_smt: str | Path | None = None) -> Model | None:
    """Decide the constraint system; None means unsatisfiable.

    Raises :class:`Interrupted` when the builtin search is cut short.
    """
    if dump_smt is not None:
        Path(dump_smt).write_text(cs.to_smtlib())
    match backend:
        case "builtin":
            return BuiltinSearch(cs, cancel, deadline, max_nodes).run()
        case "external":
            if not solver_cmd:
                raise SolverNotFound("no solver command configured")
            start = time.monotonic()
            timeout = None if deadline is None else max(deadline - time.monotonic(), 0.1)
            values = run_external(cs.to_smtlib(), solver_cmd, timeout)
            if values is None:
                return None
            return Model(values, {"seconds": time.monotonic() - start})
    raise ValueError(f"unknown backend {backend!r}")


def solve_both(cs: ConstraintSystem, solver_cmd: str) -> tuple[Model | None, Model | None]:
    """Run both backends and fail loudly when their verdicts differ."""
    a = solve(cs, "builtin")
    b = solve(cs, "external", solver_cmd)
    if (a is None) != (b is None):
        raise BackendDisagreement(f"builtin says {'sat' if a else 'unsat'}, external says {'sat' if b else 'unsat'}")
    return a, b


def extract(m: Model, inst: BoundedInstance | ConstraintSystem, role: str = "system") -> TransitionSystem:
    """Read the transition system of exactly ``bound`` states out of a model."""
    first = inst.instances[0] if isinstance(inst, ConstraintSystem) else inst
    b, width = first.bound, first.width
    try:
        tau = tuple(tuple(int(m.values[_tau(s, mm)]) for mm in range(width)) for s in range(b))

        def mask(s, mm):
            return sum(1 << j for j, o in enumerate(first.outputs) if m.values[_lab(first, s, mm, o)])

        if first.semantics is Semantics.MOORE:
            labels = tuple(mask(s, 0) for s in range(b))
        else:
            labels = tuple(tuple(mask(s, mm) for mm in range(width)) for s in range(b))
    except KeyError as e:
        raise PartialModel(f"model does not assign {e}") from None
    return TransitionSystem(first.inputs, first.outputs, first.semantics, tau, labels, 0, role)


# ---------------------------------------------------------------------------
# bound loop


@dataclass(frozen=True)
class SynthesisResult:
    verdict: str
    bound: int
    system: TransitionSystem | None = None
    stats: Mapping[str, float] = field(default_factory=dict)
    reason: str = ""

    @property
    def realizable(self) -> bool:
        return self.verdict == "realizable"


def spec_instances(spec, bound: int, split: bool = True) -> list[BoundedInstance]:
    """One n=1 instance for the LTL part and one for the hyper part, or a single folded one."""
    inputs, outputs = tuple(spec.inputs), tuple(spec.outputs)
    hyper = spec.hyper_formula()
    if hyper is not None and not hyper.is_universal():
        raise ValueError("the hyper part is not universal; use the fragments router")
    if not split:
        return [instance_for(spec.combined(), bound, spec.semantics, inputs, outputs)]
    out = []
    ltl = spec.ltl_formula()
    if ltl is not None:
        out.append(instance_for(ltl, bound, spec.semantics, inputs, outputs))
    if hyper is not None:
        out.append(instance_for(hyper, bound, spec.semantics, inputs, outputs))
    return out


def verify_system(t: TransitionSystem, spec) -> None:
    for f in filter(None, [spec.ltl_formula(), *spec.hyper]):
        verdict = model_check(t, f)
        if not verdict.holds:
            raise SoundnessError(f"synthesized system violates {f}")


def synthesize(spec, max_bound: int = 4, backend: str = "builtin", solver_cmd: str | None = None,
               split: bool = True, cancel: threading.Event | None = None, deadline: float | None = None,
               min_bound: int = 1, dump_smt: str | Path | None = None) -> SynthesisResult:
    """Try bounds ``min_bound..max_bound`` in order; the first satisfiable one wins."""
    stats: dict[str, float] = {"seconds": 0.0, "nodes": 0}
    last = min_bound - 1
    for b in range(min_bound, max_bound + 1):
        if cancel is not None and cancel.is_set():
            return SynthesisResult("unknown", last, None, stats, "cancelled")
        result = synthesize_at(spec, b, backend, solver_cmd, split, cancel, deadline, dump_smt)
        for key in ("seconds", "nodes"):
            stats[key] += result.stats.get(key, 0)
        if result.verdict != "unsat":
            return SynthesisResult(result.verdict, b if result.realizable else last, result.system,
                                   {**result.stats, **stats}, result.reason)
        last = b
    return SynthesisResult("unknown", last, None, stats, "bounds exhausted")


def synthesize_at(spec, bound: int, backend: str = "builtin", solver_cmd: str | None = None, split: bool = True,
                  cancel: threading.Event | None = None, deadline: float | None = None,
                  dump_smt: str | Path | None = None, max_nodes: int | None = None) -> SynthesisResult:
    """One bound: verdict is realizable, unsat or unknown (interrupted)."""
    cs = encode(spec_instances(spec, bound, split))
    try:
        model = solve(cs, backend, solver_cmd, cancel, deadline, max_nodes, dump_smt)
    except Interrupted as e:
        return SynthesisResult("unknown", bound - 1, None, {}, str(e))
    if model is None:
        return SynthesisResult("unsat", bound, None, {})
    system = extract(model, cs)
    verify_system(system, spec)
    return SynthesisResult("realizable", bound, system, dict(model.stats))
