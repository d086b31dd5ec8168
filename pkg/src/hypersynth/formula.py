"""HyperLTL formulas: AST, parser, printer and syntactic transformations.

The concrete syntax is ASCII::

    forall p. forall q. (i[p] <-> i[q]) R (o[p] <-> o[q])

Operators, loosest binding first: ``<->``, ``->`` (right associative),
``||``, ``&&``, the binary temporal operators ``U``, ``R``, ``W`` (right
associative) and finally the unary ``!``, ``X``, ``F``, ``G``.
"""

from __future__ import annotations

import enum
import itertools
import re
from dataclasses import dataclass
from functools import reduce
from typing import Iterable, Mapping


class Term:
    """Base class of quantifier-free temporal terms."""

    __slots__ = ()

    def __str__(self) -> str:
        return format_term(self)


@dataclass(frozen=True)
class Atom(Term):
    ap: str
    var: str


@dataclass(frozen=True)
class Const(Term):
    value: bool


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Not(Term):
    arg: Term


@dataclass(frozen=True)
class Next(Term):
    arg: Term


@dataclass(frozen=True)
class Eventually(Term):
    arg: Term


@dataclass(frozen=True)
class Globally(Term):
    arg: Term


@dataclass(frozen=True)
class And(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Or(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Implies(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Iff(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Until(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Release(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class WeakUntil(Term):
    left: Term
    right: Term


UNARY = (Not, Next, Eventually, Globally)
BINARY = (And, Or, Implies, Iff, Until, Release, WeakUntil)
KERNEL = (Atom, Const, Not, And, Or, Next, Until, Release)


class Quant(enum.Enum):
    FORALL = "forall"
    EXISTS = "exists"


@dataclass(frozen=True)
class Formula:
    """A quantifier prefix followed by a quantifier-free body."""

    prefix: tuple[tuple[Quant, str], ...]
    body: Term

    def __post_init__(self):
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate trace variable in prefix {names}")
        unbound = trace_vars(self.body) - set(names)
        if unbound:
            raise ValueError(f"unbound trace variable(s) {sorted(unbound)}")

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(v for _, v in self.prefix)

    @property
    def quantifiers(self) -> tuple[Quant, ...]:
        return tuple(q for q, _ in self.prefix)

    def is_universal(self) -> bool:
        return all(q is Quant.FORALL for q, _ in self.prefix)

    def is_existential(self) -> bool:
        return all(q is Quant.EXISTS for q, _ in self.prefix)

    def __str__(self) -> str:
        return format_formula(self)


def forall(*names: str, body: Term) -> Formula:
    return Formula(tuple((Quant.FORALL, n) for n in names), body)


def exists(*names: str, body: Term) -> Formula:
    return Formula(tuple((Quant.EXISTS, n) for n in names), body)


@dataclass(frozen=True)
class AlphabetSpec:
    inputs: frozenset[str]
    outputs: frozenset[str]

    def __init__(self, inputs: Iterable[str], outputs: Iterable[str]):
        object.__setattr__(self, "inputs", frozenset(inputs))
        object.__setattr__(self, "outputs", frozenset(outputs))
        if self.inputs & self.outputs:
            raise ValueError(f"inputs and outputs overlap: {sorted(self.inputs & self.outputs)}")
        if not (self.inputs | self.outputs):
            raise ValueError("alphabet is empty")

    @property
    def aps(self) -> frozenset[str]:
        return self.inputs | self.outputs


# ---------------------------------------------------------------------------
# traversal helpers


def children(t: Term) -> tuple[Term, ...]:
    if isinstance(t, UNARY):
        return (t.arg,)
    if isinstance(t, BINARY):
        return (t.left, t.right)
    return ()


def rebuild(t: Term, kids: tuple[Term, ...]) -> Term:
    if isinstance(t, UNARY):
        return type(t)(kids[0])
    if isinstance(t, BINARY):
        return type(t)(kids[0], kids[1])
    return t


def subterms(t: Term) -> Iterable[Term]:
    yield t
    for c in children(t):
        yield from subterms(c)


def atoms(t: Term) -> set[Atom]:
    return {s for s in subterms(t) if isinstance(s, Atom)}


def trace_vars(t: Term) -> set[str]:
    return {a.var for a in atoms(t)}


def props(t: Term) -> set[str]:
    return {a.ap for a in atoms(t)}


def size(t: Term) -> int:
    """Number of operator nodes (atoms and constants count zero)."""
    return sum(1 for s in subterms(t) if children(s))


def rename(t: Term, mapping: Mapping[str, str]) -> Term:
    """Substitute trace variables; capture cannot occur since bodies bind nothing."""
    if isinstance(t, Atom):
        return Atom(t.ap, mapping.get(t.var, t.var))
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, tuple(rename(k, mapping) for k in kids))


def map_atoms(t: Term, fn) -> Term:
    if isinstance(t, Atom):
        return fn(t)
    kids = children(t)
    if not kids:
        return t
    return rebuild(t, tuple(map_atoms(k, fn) for k in kids))


def conj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return TRUE
    return reduce(And, terms)


def disj(terms: Iterable[Term]) -> Term:
    terms = list(terms)
    if not terms:
        return FALSE
    return reduce(Or, terms)


def xor(a: Term, b: Term) -> Term:
    return Not(Iff(a, b))


def nexts(t: Term, k: int) -> Term:
    for _ in range(k):
        t = Next(t)
    return t


# ---------------------------------------------------------------------------
# printer

_PREC = {
    Iff: 1,
    Implies: 2,
    Or: 3,
    And: 4,
    Until: 5,
    Release: 5,
    WeakUntil: 5,
}
_RIGHT_ASSOC = (Implies, Until, Release, WeakUntil)
_UNARY_PREC = 6
_SYMBOL = {
    Iff: "<->",
    Implies: "->",
    Or: "||",
    And: "&&",
    Until: "U",
    Release: "R",
    WeakUntil: "W",
    Not: "!",
    Next: "X ",
    Eventually: "F ",
    Globally: "G ",
}


def _prec(t: Term) -> int:
    if isinstance(t, BINARY):
        return _PREC[type(t)]
    if isinstance(t, UNARY):
        return _UNARY_PREC
    return 7


def format_term(t: Term, implicit_var: str | None = None) -> str:
    """Print with minimal parentheses; ``implicit_var`` atoms print bare."""

    def go(t: Term, need: int) -> str:
        if isinstance(t, Atom):
            s = t.ap if t.var == implicit_var else f"{t.ap}[{t.var}]"
        elif isinstance(t, Const):
            s = "true" if t.value else "false"
        elif isinstance(t, UNARY):
            s = _SYMBOL[type(t)] + go(t.arg, _UNARY_PREC)
        else:
            p = _PREC[type(t)]
            if isinstance(t, _RIGHT_ASSOC):
                lhs, rhs = go(t.left, p + 1), go(t.right, p)
            else:
                lhs, rhs = go(t.left, p), go(t.right, p + 1)
            s = f"{lhs} {_SYMBOL[type(t)]} {rhs}"
        if _prec(t) < need:
            return f"({s})"
        return s

    return go(t, 0)


def format_formula(f: Formula) -> str:
    head = "".join(f"{q.value} {v}. " for q, v in f.prefix)
    return head + format_term(f.body)


# ---------------------------------------------------------------------------
# parser


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<op><->|->|&&|\|\||!|\(|\)|\[|\]|\.)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*'*)
    """,
    re.VERBOSE,
)
_KEYWORDS = {"forall", "exists", "true", "false", "X", "F", "G", "U", "R", "W"}
_BINOPS = {"<->": Iff, "->": Implies, "||": Or, "&&": And, "U": Until, "R": Release, "W": WeakUntil}
_UNOPS = {"!": Not, "X": Next, "F": Eventually, "G": Globally}


@dataclass(frozen=True)
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        s = m.group()
        if kind != "ws":
            if kind == "ident" and s in _KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, s, line, pos - line_start + 1))
        for k, ch in enumerate(s):
            if ch == "\n":
                line, line_start = line + 1, pos + k + 1
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, implicit_var: str | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.implicit_var = implicit_var
        self.atom_pos: dict[Atom, _Tok] = {}

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def advance(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, text: str) -> _Tok:
        t = self.tok
        if t.text != text or t.kind == "eof":
            found = t.text or "end of input"
            raise ParseError(f"expected {text!r}, found {found!r}", t.line, t.col)
        return self.advance()

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.tok
        raise ParseError(msg, tok.line, tok.col)

    def formula(self) -> tuple[list[tuple[Quant, str, _Tok]], Term]:
        prefix = []
        while self.tok.kind == "kw" and self.tok.text in ("forall", "exists"):
            q = Quant(self.advance().text)
            name = self.tok
            if name.kind != "ident":
                self.error("expected trace variable after quantifier")
            self.advance()
            self.expect(".")
            prefix.append((q, name.text, name))
        body = self.iff()
        if self.tok.kind != "eof":
            self.error(f"unexpected {self.tok.text!r}")
        return prefix, body

    def iff(self) -> Term:
        left = self.implies()
        while self.tok.text == "<->" and self.tok.kind == "op":
            self.advance()
            left = Iff(left, self.implies())
        return left

    def implies(self) -> Term:
        left = self.disjunction()
        if self.tok.text == "->" and self.tok.kind == "op":
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Term:
        left = self.conjunction()
        while self.tok.text == "||" and self.tok.kind == "op":
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self) -> Term:
        left = self.temporal()
        while self.tok.text == "&&" and self.tok.kind == "op":
            self.advance()
            left = And(left, self.temporal())
        return left

    def temporal(self) -> Term:
        left = self.unary()
        if self.tok.kind == "kw" and self.tok.text in ("U", "R", "W"):
            op = _BINOPS[self.advance().text]
            return op(left, self.temporal())
        return left

    def unary(self) -> Term:
        t = self.tok
        if (t.kind == "op" and t.text == "!") or (t.kind == "kw" and t.text in ("X", "F", "G")):
            self.advance()
            return _UNOPS[t.text](self.unary())
        return self.primary()

    def primary(self) -> Term:
        t = self.tok
        if t.kind == "kw" and t.text in ("true", "false"):
            self.advance()
            return Const(t.text == "true")
        if t.kind == "op" and t.text == "(":
            self.advance()
            inner = self.iff()
            self.expect(")")
            return inner
        if t.kind == "ident":
            self.advance()
            if self.tok.text == "[" and self.tok.kind == "op":
                self.advance()
                var = self.tok
                if var.kind != "ident":
                    self.error("expected trace variable inside brackets")
                self.advance()
                self.expect("]")
                atom = Atom(t.text, var.text)
            elif self.implicit_var is not None:
                atom = Atom(t.text, self.implicit_var)
            else:
                self.error(f"atom {t.text!r} needs a trace variable, e.g. {t.text}[pi]", t)
            self.atom_pos.setdefault(atom, t)
            return atom
        found = t.text or "end of input"
        self.error(f"unexpected {found!r}")


def _check_atoms(parser: _Parser, body: Term, bound: set[str], alphabet: AlphabetSpec | None):
    for atom in sorted(atoms(body), key=lambda a: (parser.atom_pos[a].line, parser.atom_pos[a].col)):
        tok = parser.atom_pos[atom]
        if atom.var not in bound:
            raise ParseError(f"unbound trace variable {atom.var!r}", tok.line, tok.col)
        if alphabet is not None and atom.ap not in alphabet.aps:
            raise ParseError(f"proposition {atom.ap!r} is not in the alphabet", tok.line, tok.col)


def parse_hyperltl(text: str, alphabet: AlphabetSpec | None = None) -> Formula:
    """Parse a HyperLTL formula; atoms are written ``ap[var]``."""
    parser = _Parser(text, None)
    prefix, body = parser.formula()
    seen = set()
    for _, name, tok in prefix:
        if name in seen:
            raise ParseError(f"trace variable {name!r} quantified twice", tok.line, tok.col)
        seen.add(name)
    _check_atoms(parser, body, seen, alphabet)
    return Formula(tuple((q, n) for q, n, _ in prefix), body)


def parse_ltl(text: str, alphabet: AlphabetSpec | None = None, var: str = "pi") -> Term:
    """Parse a single-trace LTL formula; bare atoms are indexed by ``var``."""
    parser = _Parser(text, var)
    prefix, body = parser.formula()
    if prefix:
        _, _, tok = prefix[0]
        raise ParseError("quantifiers are not allowed in LTL formulas", tok.line, tok.col)
    _check_atoms(parser, body, {var}, alphabet)
    return body


# ---------------------------------------------------------------------------
# desugaring and negation normal form


def desugar_term(t: Term) -> Term:
    match t:
        case Atom() | Const():
            return t
        case Not(a):
            return Not(desugar_term(a))
        case Next(a):
            return Next(desugar_term(a))
        case Eventually(a):
            return Until(TRUE, desugar_term(a))
        case Globally(a):
            return Release(FALSE, desugar_term(a))
        case And(a, b):
            return And(desugar_term(a), desugar_term(b))
        case Or(a, b):
            return Or(desugar_term(a), desugar_term(b))
        case Implies(a, b):
            return Or(Not(desugar_term(a)), desugar_term(b))
        case Iff(a, b):
            a, b = desugar_term(a), desugar_term(b)
            return Or(And(a, b), And(Not(a), Not(b)))
        case Until(a, b):
            return Until(desugar_term(a), desugar_term(b))
        case Release(a, b):
            return Release(desugar_term(a), desugar_term(b))
        case WeakUntil(a, b):
            a, b = desugar_term(a), desugar_term(b)
            return Or(Release(FALSE, a), Until(a, b))
    raise TypeError(f"not a term: {t!r}")


def desugar(f: Formula) -> Formula:
    return Formula(f.prefix, desugar_term(f.body))


def is_kernel(t: Term) -> bool:
    return all(isinstance(s, KERNEL) for s in subterms(t))


def to_nnf(t: Term) -> Term:
    """Negation normal form of ``t`` over the desugared kernel."""
    return _nnf(desugar_term(t), False)


def negate_to_nnf(body: Term) -> Term:
    """Negation normal form of ``!body``."""
    return _nnf(desugar_term(body), True)


def _nnf(t: Term, neg: bool) -> Term:
    match t:
        case Atom():
            return Not(t) if neg else t
        case Const(v):
            return Const(v != neg)
        case Not(a):
            return _nnf(a, not neg)
        case Next(a):
            return Next(_nnf(a, neg))
        case And(a, b):
            return (Or if neg else And)(_nnf(a, neg), _nnf(b, neg))
        case Or(a, b):
            return (And if neg else Or)(_nnf(a, neg), _nnf(b, neg))
        case Until(a, b):
            return (Release if neg else Until)(_nnf(a, neg), _nnf(b, neg))
        case Release(a, b):
            return (Until if neg else Release)(_nnf(a, neg), _nnf(b, neg))
    raise TypeError(f"term is not desugared: {t!r}")


def is_nnf(t: Term) -> bool:
    for s in subterms(t):
        if not isinstance(s, KERNEL):
            return False
        if isinstance(s, Not) and not isinstance(s.arg, Atom):
            return False
    return True


# ---------------------------------------------------------------------------
# macros


def independence(a: Iterable[str], c: Iterable[str], pi: str = "pi1", pi2: str = "pi2") -> Term:
    """Body of the (in)dependence macro: ``c`` may only depend on ``a``.

    ``(OR_{x in a} x[pi] != x[pi2]) R (AND_{y in c} y[pi] <-> y[pi2])``
    """
    a, c = sorted(set(a)), sorted(set(c))
    if set(a) & set(c):
        raise ValueError(f"dependency sets overlap: {sorted(set(a) & set(c))}")
    left = disj(xor(Atom(x, pi), Atom(x, pi2)) for x in a)
    right = conj(Iff(Atom(y, pi), Atom(y, pi2)) for y in c)
    return Release(left, right)


def independence_formula(a: Iterable[str], c: Iterable[str], pi: str = "pi1", pi2: str = "pi2") -> Formula:
    return forall(pi, pi2, body=independence(a, c, pi, pi2))


def conjoin(*fs: Formula) -> Formula:
    """Conjunction of universal formulas as one prenex universal formula.

    Variables of each conjunct are renamed positionally onto the prefix of
    the conjunct with the most quantifiers; for universal formulas this is
    an equivalence.
    """
    if not fs:
        return forall("pi", body=TRUE)
    if not all(f.is_universal() for f in fs):
        raise ValueError("conjoin expects universal formulas")
    widest = max(fs, key=lambda f: len(f.prefix))
    names = widest.variables
    bodies = [rename(f.body, dict(zip(f.variables, names))) for f in fs]
    return Formula(widest.prefix, conj(bodies))


# ---------------------------------------------------------------------------
# prefix classification, collapse, 1-reduction


class PrefixClass(enum.Enum):
    EXISTS = "E*"
    EXISTS_FORALL1 = "E*A1"
    EXISTS_FORALL_MANY = "E*A>1"
    FORALL1 = "A1"
    FORALL_MANY = "A>1"
    FORALL_EXISTS = "A*E*"
    OTHER = "other-alternation"


def prefix_class(f: Formula) -> PrefixClass:
    word = "".join("A" if q is Quant.FORALL else "E" for q in f.quantifiers)
    m = re.fullmatch(r"(E*)(A*)", word)
    if m:
        n_exists, n_forall = len(m.group(1)), len(m.group(2))
        if n_forall == 0:
            return PrefixClass.EXISTS
        if n_exists == 0:
            return PrefixClass.FORALL1 if n_forall == 1 else PrefixClass.FORALL_MANY
        return PrefixClass.EXISTS_FORALL1 if n_forall == 1 else PrefixClass.EXISTS_FORALL_MANY
    if re.fullmatch(r"A+E+", word):
        return PrefixClass.FORALL_EXISTS
    return PrefixClass.OTHER


def collapse(f: Formula, var: str = "pi") -> Formula:
    """Merge all universally quantified trace variables into ``var``."""
    if not f.is_universal():
        raise ValueError("collapse is defined for universal formulas only")
    return forall(var, body=rename(f.body, {v: var for v in f.variables}))


def reduce1(f: Formula) -> Formula:
    """Drop the last universal quantifier by conjoining all variable merges."""
    if not f.is_universal():
        raise ValueError("reduce1 is defined for universal formulas only")
    n = len(f.prefix)
    if n < 2:
        raise ValueError("reduce1 needs at least two quantifiers")
    vs = f.variables
    conjuncts = []
    for i in range(1, n):
        for j in range(i):
            t = rename(f.body, {vs[i]: vs[j]})
            t = rename(t, {vs[n - 1]: vs[i]})
            conjuncts.append(t)
    return Formula(f.prefix[:-1], conj(conjuncts))


# ---------------------------------------------------------------------------
# Post's correspondence problem


@dataclass(frozen=True)
class PCPInstance:
    alphabet: tuple[str, ...]
    alpha: tuple[str, ...]
    beta: tuple[str, ...]

    def __init__(self, alphabet: Iterable[str], alpha: Iterable[str], beta: Iterable[str]):
        object.__setattr__(self, "alphabet", tuple(sorted(set(alphabet))))
        object.__setattr__(self, "alpha", tuple(alpha))
        object.__setattr__(self, "beta", tuple(beta))
        if not self.alpha or len(self.alpha) != len(self.beta):
            raise ValueError("a PCP instance needs two nonempty lists of equal length")
        for w in self.alpha + self.beta:
            if not w or set(w) - set(self.alphabet):
                raise ValueError(f"word {w!r} is empty or uses symbols outside the alphabet")
        for s in self.alphabet:
            if not re.fullmatch(r"[A-Za-z0-9]", s):
                raise ValueError(f"PCP symbols must be single alphanumeric characters, got {s!r}")

    def is_solution(self, indices: Iterable[int]) -> bool:
        idx = list(indices)
        return bool(idx) and "".join(self.alpha[i - 1] for i in idx) == "".join(self.beta[i - 1] for i in idx)


PCP_END = "hash"


def pcp_symbols(sigma: Iterable[str]) -> list[str]:
    sigma = list(sigma)
    return sigma + [f"{s}_dot" for s in sigma] + [PCP_END]


def pcp_prop(first: str, second: str) -> str:
    return f"fst_{first}__snd_{second}"


def encode_pcp(p: PCPInstance, pi: str = "pi", pi2: str = "pi2") -> tuple[Formula, AlphabetSpec]:
    """Encode a PCP instance as a forall-exists realizability problem.

    A relevant trace spells a sequence of stones: the first component of the
    output pair carries the alpha words, the second the beta words, and a
    dotted symbol marks where a stone starts.  The existential successor
    trace holds the same sequence with the first stone removed.
    """
    syms = pcp_symbols(p.alphabet)
    outputs = [pcp_prop(x, y) for x in syms for y in syms]
    alphabet = AlphabetSpec({"i"}, outputs)

    def i_(v):
        return Atom("i", v)

    def fst(x, v):
        return disj(Atom(pcp_prop(x, y), v) for y in syms)

    def snd(y, v):
        return disj(Atom(pcp_prop(x, y), v) for x in syms)

    def pair(x, y, v):
        return Atom(pcp_prop(x, y), v)

    rel = Until(Not(i_(pi)), Globally(i_(pi)))
    is_succ = Until(
        And(Not(i_(pi)), Not(i_(pi2))),
        conj([Globally(i_(pi)), Not(i_(pi2)), Next(Globally(i_(pi2)))]),
    )

    dotted = disj(pair(f"{s}_dot", f"{s}_dot", pi2) for s in p.alphabet)
    tilde = disj(
        pair(x, y, pi2)
        for s in p.alphabet
        for x in (s, f"{s}_dot")
        for y in (s, f"{s}_dot")
    )
    sol = Implies(Globally(i_(pi2)), And(dotted, Until(tilde, Globally(pair(PCP_END, PCP_END, pi2)))))

    def spell(word, component, v):
        parts = []
        for k, ch in enumerate(word):
            sym = f"{ch}_dot" if k == 0 else ch
            parts.append(nexts(component(sym, v), k))
        return conj(parts)

    def shift(offset, component):
        return Globally(
            conj(Iff(Next(component(x, pi2)), nexts(component(x, pi), offset)) for x in syms)
        )

    stones = []
    for a_word, b_word in zip(p.alpha, p.beta):
        stones.append(
            conj([
                spell(a_word, fst, pi),
                spell(b_word, snd, pi),
                shift(len(a_word), fst),
                shift(len(b_word), snd),
            ])
        )
    stone_shift = Or(Globally(pair(PCP_END, PCP_END, pi)), disj(stones))
    start = Until(Not(i_(pi)), And(stone_shift, Globally(i_(pi))))

    singletons = Globally(
        conj(Not(And(Atom(a, pi), Atom(b, pi))) for a, b in itertools.combinations(outputs, 2))
    )
    body = And(singletons, Implies(rel, conj([is_succ, start, sol])))
    prefix = ((Quant.FORALL, pi), (Quant.EXISTS, pi2))
    return Formula(prefix, body), alphabet
