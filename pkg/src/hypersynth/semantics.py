"""Brute-force HyperLTL semantics over finite sets of lasso-shaped traces.

Two evaluators live here.  :func:`eval_body_on_zip` follows the textbook
clauses position by position and is the reference the rest of the package
is tested against.  :class:`TraceUniverse` evaluates a body over every
tuple of traces drawn from a fixed pool at once, with positions packed into
``uint64`` bitmasks; it backs the bounded equivalence check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np

from .formula import (
    And, Atom, Const, Eventually, Formula, Globally, Iff, Implies, Next, Not, Or,
    Quant, Release, Term, Until, WeakUntil, props,
)

Letter = frozenset


@dataclass(frozen=True)
class LassoTrace:
    """The ultimately periodic word ``stem . loop^omega``."""

    stem: tuple[frozenset, ...]
    loop: tuple[frozenset, ...]

    def __init__(self, stem: Iterable[Iterable[Hashable]], loop: Iterable[Iterable[Hashable]]):
        object.__setattr__(self, "stem", tuple(frozenset(x) for x in stem))
        object.__setattr__(self, "loop", tuple(frozenset(x) for x in loop))
        if not self.loop:
            raise ValueError("lasso loop must be nonempty")

    def letter(self, i: int) -> frozenset:
        if i < len(self.stem):
            return self.stem[i]
        return self.loop[(i - len(self.stem)) % len(self.loop)]

    def prefix(self, n: int) -> list[frozenset]:
        return [self.letter(i) for i in range(n)]

    def canonical(self) -> "LassoTrace":
        """Shortest stem and loop describing the same infinite word."""
        loop = list(self.loop)
        n = len(loop)
        for d in range(1, n + 1):
            if n % d == 0 and loop == loop[:d] * (n // d):
                loop = loop[:d]
                break
        stem = list(self.stem)
        while stem and stem[-1] == loop[-1]:
            stem.pop()
            loop = [loop[-1]] + loop[:-1]
        return LassoTrace(stem, loop)

    def same_word(self, other: "LassoTrace") -> bool:
        return self.canonical() == other.canonical()

    def project(self, aps: Iterable[Hashable]) -> "LassoTrace":
        keep = frozenset(aps)
        return LassoTrace([x & keep for x in self.stem], [x & keep for x in self.loop])

    def __str__(self) -> str:
        return format_lasso(self)


def _fmt_letter(x: frozenset) -> str:
    return "{" + ",".join(sorted(str(a) for a in x)) + "}"


def format_lasso(t: LassoTrace) -> str:
    stem = " ".join(_fmt_letter(x) for x in t.stem)
    loop = " ".join(_fmt_letter(x) for x in t.loop)
    return f"{stem} ; {loop}".strip()


def parse_lasso(text: str) -> LassoTrace:
    """Parse ``stem ; loop`` with letters written ``{a,b}``, e.g. ``{} ; {i}``."""
    if text.count(";") != 1:
        raise ValueError(f"lasso needs exactly one ';' separating stem and loop: {text!r}")
    stem_txt, loop_txt = text.split(";")

    def letters(part: str) -> list[frozenset]:
        out = []
        for chunk in part.split("}"):
            chunk = chunk.strip()
            if not chunk:
                continue
            if not chunk.startswith("{"):
                raise ValueError(f"malformed letter {chunk!r} in {text!r}")
            names = [a.strip() for a in chunk[1:].split(",") if a.strip()]
            out.append(frozenset(names))
        return out

    return LassoTrace(letters(stem_txt), letters(loop_txt))


# ---------------------------------------------------------------------------
# zipping


def _shape(traces: Iterable[LassoTrace]) -> tuple[int, int]:
    traces = list(traces)
    stem = max((len(t.stem) for t in traces), default=0)
    period = math.lcm(*(len(t.loop) for t in traces)) if traces else 1
    return stem, period


def zip_lassos(assignment: Mapping[str, LassoTrace], order: Sequence[str] | None = None) -> LassoTrace:
    """Zip an assignment into one lasso whose letters hold ``(ap, var)`` pairs."""
    order = list(order if order is not None else sorted(assignment))
    missing = set(assignment) - set(order)
    if missing:
        raise ValueError(f"order does not cover {sorted(missing)}")
    stem, period = _shape(assignment[v] for v in order)

    def letter(i):
        return frozenset((ap, v) for v in order for ap in assignment[v].letter(i))

    return LassoTrace([letter(i) for i in range(stem)], [letter(i) for i in range(stem, stem + period)])


def unzip_lasso(w: LassoTrace, order: Sequence[str]) -> dict[str, LassoTrace]:
    out = {}
    for v in order:
        def pick(x, v=v):
            return frozenset(ap for ap, var in x if var == v)
        out[v] = LassoTrace([pick(x) for x in w.stem], [pick(x) for x in w.loop])
    return out


# ---------------------------------------------------------------------------
# reference evaluator


def _fixpoint(a: list[bool], b: list[bool], stem: int, least: bool) -> list[bool]:
    n = len(a)
    val = [not least] * n
    for _ in range(3):
        old = val[:]
        nxt = val[stem]
        for i in range(n - 1, -1, -1):
            if least:
                v = b[i] or (a[i] and nxt)
            else:
                v = b[i] and (a[i] or nxt)
            val[i] = v
            nxt = v
        if val == old:
            return val
    raise AssertionError("temporal fixpoint did not stabilise within two sweeps")


def body_values(body: Term, assignment: Mapping[str, LassoTrace]) -> tuple[list[bool], int]:
    """Truth value of ``body`` at every position of the zipped lasso window."""
    stem, period = _shape(assignment.values())
    n = stem + period
    succ = list(range(1, n)) + [stem]
    memo: dict[Term, list[bool]] = {}

    def go(t: Term) -> list[bool]:
        if t in memo:
            return memo[t]
        match t:
            case Atom(ap, var):
                if var not in assignment:
                    raise KeyError(f"trace variable {var!r} is not assigned")
                tr = assignment[var]
                r = [ap in tr.letter(i) for i in range(n)]
            case Const(v):
                r = [v] * n
            case Not(a):
                r = [not x for x in go(a)]
            case Next(a):
                va = go(a)
                r = [va[succ[i]] for i in range(n)]
            case And(a, b):
                r = [x and y for x, y in zip(go(a), go(b))]
            case Or(a, b):
                r = [x or y for x, y in zip(go(a), go(b))]
            case Implies(a, b):
                r = [(not x) or y for x, y in zip(go(a), go(b))]
            case Iff(a, b):
                r = [x == y for x, y in zip(go(a), go(b))]
            case Until(a, b):
                r = _fixpoint(go(a), go(b), stem, least=True)
            case Release(a, b):
                r = _fixpoint(go(a), go(b), stem, least=False)
            case Eventually(a):
                r = _fixpoint([True] * n, go(a), stem, least=True)
            case Globally(a):
                r = _fixpoint([False] * n, go(a), stem, least=False)
            case WeakUntil(a, b):
                va, vb = go(a), go(b)
                g = _fixpoint([False] * n, va, stem, least=False)
                u = _fixpoint(va, vb, stem, least=True)
                r = [x or y for x, y in zip(g, u)]
            case _:
                raise TypeError(f"not a term: {t!r}")
        memo[t] = r
        return r

    return go(body), stem


def eval_body_on_zip(body: Term, assignment: Mapping[str, LassoTrace], position: int = 0) -> bool:
    """Evaluate a quantifier-free body on the traces of ``assignment``."""
    if not assignment:
        assignment = {"_": LassoTrace([], [()])}
    values, stem = body_values(body, assignment)
    n = len(values)
    if position >= n:
        position = stem + (position - stem) % (n - stem)
    return values[position]


def eval_formula(f: Formula, traces: Iterable[LassoTrace]) -> bool:
    """``T |= f`` with quantifiers ranging over ``traces`` (repetition allowed)."""
    pool = list(dict.fromkeys(traces))

    def go(k: int, assignment: dict[str, LassoTrace]) -> bool:
        if k == len(f.prefix):
            return eval_body_on_zip(f.body, assignment)
        q, v = f.prefix[k]
        results = (go(k + 1, {**assignment, v: t}) for t in pool)
        return all(results) if q is Quant.FORALL else any(results)

    return go(0, {})


# ``eval`` is the public name used throughout the docs; keep the builtin usable.
evaluate = eval_formula


# ---------------------------------------------------------------------------
# lasso enumeration


def _letters(aps: Sequence[str]) -> list[frozenset]:
    return [frozenset(a for k, a in enumerate(aps) if mask >> k & 1) for mask in range(1 << len(aps))]


def lasso_key(t: LassoTrace, aps: Sequence[str]) -> tuple:
    index = {a: k for k, a in enumerate(aps)}

    def code(x):
        return sum(1 << index[a] for a in x)

    return (len(t.stem) + len(t.loop), len(t.stem), tuple(code(x) for x in t.stem + t.loop))


def enumerate_lassos(aps: Iterable[str], max_stem: int, max_loop: int) -> list[LassoTrace]:
    """All distinct infinite words with a lasso of stem <= max_stem, loop <= max_loop.

    Sorted by total letter count, then lexicographically.
    """
    aps = sorted(aps)
    letters = _letters(aps)
    seen = set()
    out = []
    for s in range(max_stem + 1):
        for p in range(1, max_loop + 1):
            for stem in itertools.product(letters, repeat=s):
                for loop in itertools.product(letters, repeat=p):
                    c = LassoTrace(stem, loop).canonical()
                    if c not in seen:
                        seen.add(c)
                        out.append(c)
    out.sort(key=lambda t: lasso_key(t, aps))
    return out


# ---------------------------------------------------------------------------
# vectorised evaluation


_MAX_SETS = 20_000_000


class TraceUniverse:
    """A fixed pool of lassos expanded to a common stem/period.

    Bodies are evaluated for every tuple of pool traces simultaneously: a
    body over variables ``v1..vn`` yields an array broadcastable to
    ``(m,) * n`` whose entries are position bitmasks.
    """

    def __init__(self, lassos: Sequence[LassoTrace], aps: Iterable[str] | None = None):
        self.lassos = list(lassos)
        self.m = len(self.lassos)
        self.stem, self.period = _shape(self.lassos) if self.lassos else (0, 1)
        self.n = self.stem + self.period
        if self.n > 63:
            raise ValueError(f"lasso window of {self.n} positions exceeds 63")
        self.mask = np.uint64((1 << self.n) - 1)
        names = set(aps) if aps is not None else set()
        for t in self.lassos:
            for x in t.stem + t.loop:
                names |= x
        self.aps = sorted(names)
        self._bits: dict[str, np.ndarray] = {}
        for ap in self.aps:
            col = np.zeros(self.m, dtype=np.uint64)
            for j, t in enumerate(self.lassos):
                col[j] = sum(1 << i for i in range(self.n) if ap in t.letter(i))
            self._bits[ap] = col
        self.sizes = np.array([len(t.stem) + len(t.loop) for t in self.lassos], dtype=np.int64)
        self._memo: dict[tuple[tuple[str, ...], Term], np.ndarray] = {}

    @classmethod
    def bounded(cls, aps: Iterable[str], max_stem: int, max_loop: int) -> "TraceUniverse":
        aps = sorted(aps)
        return cls(enumerate_lassos(aps, max_stem, max_loop), aps)

    # -- bitmask operators
    def _next(self, v: np.ndarray) -> np.ndarray:
        one = np.uint64(1)
        wrap = ((v >> np.uint64(self.stem)) & one) << np.uint64(self.n - 1)
        return ((v >> one) | wrap) & self.mask

    def _fix(self, a, b, least: bool) -> np.ndarray:
        a, b = np.broadcast_arrays(np.asarray(a, dtype=np.uint64), np.asarray(b, dtype=np.uint64))
        x = b.copy() if least else np.full(b.shape, self.mask, dtype=np.uint64)
        for _ in range(self.n + 2):
            nx = (b | (a & self._next(x))) if least else (b & (a | self._next(x)))
            if np.array_equal(nx, x):
                return x
            x = nx
        raise AssertionError("bitmask fixpoint did not converge")

    def values(self, body: Term, variables: Sequence[str]) -> np.ndarray:
        variables = tuple(variables)
        axis = {v: k for k, v in enumerate(variables)}
        full = self.mask

        def go(t: Term) -> np.ndarray:
            key = (variables, t)
            if key in self._memo:
                return self._memo[key]
            match t:
                case Atom(ap, var):
                    if var not in axis:
                        raise KeyError(f"trace variable {var!r} is not in {variables}")
                    col = self._bits.get(ap, np.zeros(self.m, dtype=np.uint64))
                    shape = [1] * len(variables)
                    shape[axis[var]] = self.m
                    r = col.reshape(shape)
                case Const(v):
                    r = np.array(full if v else 0, dtype=np.uint64)
                case Not(a):
                    r = ~go(a) & full
                case Next(a):
                    r = self._next(go(a))
                case And(a, b):
                    r = go(a) & go(b)
                case Or(a, b):
                    r = go(a) | go(b)
                case Implies(a, b):
                    r = (~go(a) & full) | go(b)
                case Iff(a, b):
                    r = ~(go(a) ^ go(b)) & full
                case Until(a, b):
                    r = self._fix(go(a), go(b), least=True)
                case Release(a, b):
                    r = self._fix(go(a), go(b), least=False)
                case Eventually(a):
                    r = self._fix(full, go(a), least=True)
                case Globally(a):
                    r = self._fix(0, go(a), least=False)
                case WeakUntil(a, b):
                    va, vb = go(a), go(b)
                    r = self._fix(0, va, least=False) | self._fix(va, vb, least=True)
                case _:
                    raise TypeError(f"not a term: {t!r}")
            self._memo[key] = r
            return r

        return go(body)

    def holds(self, body: Term, variables: Sequence[str]) -> np.ndarray:
        """Boolean array of shape ``(m,) * n``: body true at position 0."""
        v = self.values(body, variables)
        shape = (self.m,) * len(variables)
        return np.broadcast_to((v & np.uint64(1)).astype(bool), shape)

    def set_values(self, f: Formula, combos: np.ndarray) -> np.ndarray:
        """``T |= f`` for each trace set given as a row of pool indices."""
        combos = np.asarray(combos, dtype=np.intp)
        k, j = combos.shape
        n = len(f.prefix)
        table = self.holds(f.body, f.variables)
        if n == 0:
            return np.full(k, bool(table))
        idx = []
        for d in range(n):
            shape = [k] + [1] * n
            shape[d + 1] = j
            idx.append(combos.reshape(shape))
        g = table[tuple(idx)]
        for q in reversed(f.quantifiers):
            g = g.all(axis=-1) if q is Quant.FORALL else g.any(axis=-1)
        return g

    def combinations(self, j: int, chunk: int = 250_000) -> Iterable[np.ndarray]:
        if math.comb(self.m, j) > _MAX_SETS:
            raise ValueError(f"{math.comb(self.m, j)} trace sets of size {j} exceed the enumeration cap")
        if j == 0:
            yield np.zeros((1, 0), dtype=np.intp)
            return
        it = itertools.combinations(range(self.m), j)
        while True:
            block = list(itertools.islice(it, chunk))
            if not block:
                return
            yield np.array(block, dtype=np.intp).reshape(len(block), j)


@dataclass(frozen=True)
class EquivVerdict:
    equivalent: bool
    counterexample: tuple[LassoTrace, ...] | None = None
    sets_checked: int = 0

    def __bool__(self) -> bool:
        return self.equivalent


def _effective_max_traces(f: Formula, g: Formula, max_traces: int) -> int:
    # Alternation-free formulas of the same kind agree everywhere once they
    # agree on all sets no larger than their widest prefix.
    same_kind = (f.is_universal() and g.is_universal()) or (f.is_existential() and g.is_existential())
    if same_kind:
        return min(max_traces, max(len(f.prefix), len(g.prefix), 1))
    return max_traces


def check_equiv_bounded(
    f: Formula,
    g: Formula,
    max_traces: int,
    max_stem: int,
    max_loop: int,
    aps: Iterable[str] | None = None,
    universe: TraceUniverse | None = None,
) -> EquivVerdict:
    """Compare ``f`` and ``g`` on every trace set within the bounds.

    Returns the first differing set in canonical order (total letter count,
    then set size, then lexicographic), or an equivalent-up-to-bound verdict.
    """
    if max_traces < 1 or max_loop < 1 or max_stem < 0:
        raise ValueError("bounds must be positive (max_stem may be zero)")
    if universe is None:
        names = set(aps) if aps is not None else props(f.body) | props(g.body)
        universe = TraceUniverse.bounded(names, max_stem, max_loop)
    limit = _effective_max_traces(f, g, max_traces)
    best = None
    checked = 0
    for j in range(0, limit + 1):
        for combos in universe.combinations(j):
            checked += len(combos)
            diff = universe.set_values(f, combos) != universe.set_values(g, combos)
            if not diff.any():
                continue
            rows = combos[diff]
            totals = universe.sizes[rows].sum(axis=1) if j else np.zeros(len(rows), dtype=np.int64)
            lo = totals.min()
            cand = rows[totals == lo]
            first = min(tuple(r) for r in cand.tolist())
            key = (int(lo), j, first)
            if best is None or key < best:
                best = key
    if best is None:
        return EquivVerdict(True, None, checked)
    return EquivVerdict(False, tuple(universe.lassos[i] for i in best[2]), checked)
