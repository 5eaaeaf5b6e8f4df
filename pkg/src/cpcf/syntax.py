"""Formula ASTs, parser and printer for ceteris paribus conditionals.

Concrete syntax (ASCII)::

    p  _|_  ~a  a & b  a | b  a -> b
    [a, {g1, g2}] b        box conditional with a ceteris paribus clause
    <a, {g1, g2}> b        its dual
    a cf> b   a mcf> b     plain would / might counterfactuals
    a =< b                 comparative possibility
    a =<{g1, g2}nc b       clause-relative variants (tags nc, cp, ms)

Binding strength, tightest first: prefix operators (``~``, ``[..]``,
``<..>``), ``&``, ``|``, ``->``, then the binary conditionals and
comparatives. Everything from ``->`` down is right-associative.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Union

__all__ = [
    "Formula", "Atom", "Bottom", "Not", "Or", "CPBox", "CompPoss",
    "ClauseSet", "ParseError", "ClauseError",
    "And", "Implies", "Iff", "Top", "BOTTOM", "TOP", "CPDiamond",
    "Counterfactual", "MightCounterfactual", "Diamond", "Box",
    "Strict", "clause", "parse_formula", "parse_clause", "render_formula",
    "universe_of_discourse", "von_wright_clause", "is_modal",
    "subformulas", "distinct_subformulas", "gamma_rank", "node_count", "conjunction", "disjunction",
    "COMPARATIVE_KINDS",
]

COMPARATIVE_KINDS = ("plain", "nc", "cp", "ms")


class _Node:
    """Shared behaviour: cached hashing, pretty printing."""

    __slots__ = ()

    def __hash__(self) -> int:
        return self._hash

    def __str__(self) -> str:
        return render_formula(self)

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)


@dataclass(frozen=True, eq=True)
class Atom(_Node):
    name: str

    @cached_property
    def _hash(self):
        return hash(("atom", self.name))

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Bottom(_Node):
    @cached_property
    def _hash(self):
        return hash("bottom")

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Not(_Node):
    sub: "Formula"

    @cached_property
    def _hash(self):
        return hash(("not", self.sub))

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class Or(_Node):
    left: "Formula"
    right: "Formula"

    @cached_property
    def _hash(self):
        return hash(("or", self.left, self.right))

    __hash__ = _Node.__hash__


def clause(members: Iterable["Formula"] = ()) -> tuple:
    """Deduplicate and sort clause members into canonical order."""
    unique = {}
    for f in members:
        if not isinstance(f, _Node):
            raise TypeError(f"clause member is not a formula: {f!r}")
        unique.setdefault(f, None)
    return tuple(sorted(unique, key=render_formula))


@dataclass(frozen=True, eq=True)
class CPBox(_Node):
    """``[antecedent, clause] consequent``."""

    antecedent: "Formula"
    clause: tuple
    consequent: "Formula"

    def __post_init__(self):
        object.__setattr__(self, "clause", clause(self.clause))

    @cached_property
    def _hash(self):
        return hash(("cp", self.antecedent, self.clause, self.consequent))

    __hash__ = _Node.__hash__


@dataclass(frozen=True, eq=True)
class CompPoss(_Node):
    """``left`` is at least as possible as ``right`` (under ``kind``)."""

    kind: str
    clause: tuple | None
    left: "Formula"
    right: "Formula"

    def __post_init__(self):
        if self.kind not in COMPARATIVE_KINDS:
            raise ValueError(f"unknown comparative kind {self.kind!r}")
        if self.kind == "plain":
            if self.clause:
                raise ValueError("plain comparative takes no clause")
            object.__setattr__(self, "clause", None)
        else:
            object.__setattr__(self, "clause", clause(self.clause or ()))

    @cached_property
    def _hash(self):
        return hash(("cmp", self.kind, self.clause, self.left, self.right))

    __hash__ = _Node.__hash__


Formula = Union[Atom, Bottom, Not, Or, CPBox, CompPoss]
ClauseSet = tuple

BOTTOM = Bottom()
TOP = Not(BOTTOM)


# Abbreviations --------------------------------------------------------------

def Top():
    return TOP


def And(a, b):
    return Not(Or(Not(a), Not(b)))


def Implies(a, b):
    return Or(Not(a), b)


def Iff(a, b):
    return And(Implies(a, b), Implies(b, a))


def CPDiamond(a, gamma, b):
    return Not(CPBox(a, gamma, Not(b)))


def Counterfactual(a, b):
    return CPBox(a, (), b)


def MightCounterfactual(a, b):
    return Not(CPBox(a, (), Not(b)))


def Strict(kind, gamma, a, b):
    """Strict comparative: ``a`` strictly more possible than ``b``."""
    return Not(CompPoss(kind, gamma, b, a))


def Diamond(a):
    return Strict("plain", None, a, BOTTOM)


def Box(a):
    return Not(Diamond(Not(a)))


def conjunction(parts):
    """Left-folded conjunction; the empty conjunction is top."""
    parts = list(parts)
    if not parts:
        return TOP
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disjunction(parts):
    parts = list(parts)
    if not parts:
        return BOTTOM
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


# Tokenizer ------------------------------------------------------------------

class ParseError(ValueError):
    """Syntax error with the character offset where it was detected."""

    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        super().__init__(f"{message} at position {position}")


class ClauseError(ParseError):
    """A clause set is malformed or used where a formula is expected."""


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<op>mcf>|cf>|=<|->|_\|_|[~&|()\[\]{},<>])|(?P<ident>[A-Za-z0-9_]+))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    n = len(text)
    while pos < n:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.end() == pos:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        start = m.start("op") if m.group("op") else m.start("ident")
        if m.group("op"):
            tokens.append(("op", m.group("op"), start))
        else:
            tokens.append(("ident", m.group("ident"), start))
        pos = m.end()
    tokens.append(("eof", "", n))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def advance(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def at(self, value: str) -> bool:
        kind, val, _ = self.peek()
        return kind == "op" and val == value

    def expect(self, value: str, error=ParseError):
        kind, val, pos = self.peek()
        if kind != "op" or val != value:
            shown = val or "end of input"
            raise error(f"expected {value!r}, found {shown!r}", pos, self.text)
        return self.advance()

    # phi ::= impl ( ("cf>" | "mcf>" | "=<" [set tag]) phi )?
    def formula(self):
        left = self.implication()
        kind, val, pos = self.peek()
        if kind != "op":
            return left
        if val == "cf>":
            self.advance()
            return CPBox(left, (), self.formula())
        if val == "mcf>":
            self.advance()
            return MightCounterfactual(left, self.formula())
        if val == "=<":
            self.advance()
            if self.at("{"):
                gamma = self.clause_set()
                tkind, tag, tpos = self.peek()
                if tkind != "ident" or tag not in ("nc", "cp", "ms"):
                    raise ClauseError(
                        f"expected comparative tag nc/cp/ms, found {tag or 'end of input'!r}",
                        tpos, self.text)
                self.advance()
                return CompPoss(tag, gamma, left, self.formula())
            return CompPoss("plain", None, left, self.formula())
        return left

    def implication(self):
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return Implies(left, self.implication())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("|"):
            self.advance()
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.at("&"):
            self.advance()
            left = And(left, self.unary())
        return left

    def unary(self):
        kind, val, pos = self.peek()
        if kind == "ident":
            self.advance()
            return Atom(val)
        if kind == "op":
            if val == "_|_":
                self.advance()
                return BOTTOM
            if val == "~":
                self.advance()
                return Not(self.unary())
            if val == "(":
                self.advance()
                inner = self.formula()
                self.expect(")")
                return inner
            if val == "[":
                self.advance()
                ante = self.formula()
                self.expect(",", ClauseError)
                gamma = self.clause_set()
                self.expect("]", ClauseError)
                return CPBox(ante, gamma, self.unary())
            if val == "<":
                self.advance()
                ante = self.formula()
                self.expect(",", ClauseError)
                gamma = self.clause_set()
                self.expect(">", ClauseError)
                return CPDiamond(ante, gamma, self.unary())
            if val == "{":
                raise ClauseError("clause set where a formula was expected", pos, self.text)
        shown = val or "end of input"
        raise ParseError(f"unexpected token {shown!r}", pos, self.text)

    def clause_set(self):
        self.expect("{", ClauseError)
        members = []
        if not self.at("}"):
            members.append(self.formula())
            while self.at(","):
                self.advance()
                members.append(self.formula())
        self.expect("}", ClauseError)
        return clause(members)

    def finish(self):
        kind, val, pos = self.peek()
        if kind != "eof":
            raise ParseError(f"trailing input {val!r}", pos, self.text)


def parse_formula(text: str) -> Formula:
    """Parse ``text`` into a formula AST.

    >>> parse_formula("[p, {m}] h")
    CPBox(antecedent=Atom(name='p'), clause=(Atom(name='m'),), consequent=Atom(name='h'))
    """
    p = _Parser(text)
    f = p.formula()
    p.finish()
    return f


def parse_clause(text: str) -> ClauseSet:
    """Parse a brace-delimited clause such as ``{m, s}``."""
    p = _Parser(text)
    gamma = p.clause_set()
    p.finish()
    return gamma


# Printer --------------------------------------------------------------------

# Binding levels: 0 conditionals/comparatives, 1 ->, 2 |, 3 &, 4 prefix/atoms.

def _as_and(f):
    if isinstance(f, Not) and isinstance(f.sub, Or):
        o = f.sub
        if isinstance(o.left, Not) and isinstance(o.right, Not):
            return o.left.sub, o.right.sub
    return None


def _render_set(gamma) -> str:
    return "{" + ", ".join(_render(g, 0) for g in gamma) + "}"


def _wrap(text: str, level: int, need: int) -> str:
    return f"({text})" if level < need else text


def _render(f, need: int) -> str:
    if isinstance(f, Atom):
        return f.name
    if isinstance(f, Bottom):
        return "_|_"
    if isinstance(f, Not):
        pair = _as_and(f)
        if pair is not None:
            text = f"{_render(pair[0], 3)} & {_render(pair[1], 4)}"
            return _wrap(text, 3, need)
        return "~" + _render(f.sub, 4)
    if isinstance(f, Or):
        if isinstance(f.left, Not) and _as_and(f.left) is None:
            text = f"{_render(f.left.sub, 2)} -> {_render(f.right, 1)}"
            return _wrap(text, 1, need)
        text = f"{_render(f.left, 2)} | {_render(f.right, 3)}"
        return _wrap(text, 2, need)
    if isinstance(f, CPBox):
        return (f"[{_render(f.antecedent, 0)}, {_render_set(f.clause)}] "
                f"{_render(f.consequent, 4)}")
    if isinstance(f, CompPoss):
        op = "=<" if f.kind == "plain" else f"=<{_render_set(f.clause)}{f.kind}"
        text = f"{_render(f.left, 1)} {op} {_render(f.right, 0)}"
        return _wrap(text, 0, need)
    raise TypeError(f"not a formula: {f!r}")


def render_formula(f: Formula) -> str:
    """Print ``f`` in the concrete syntax; the output re-parses to ``f``."""
    return _render(f, 0)


# Structural utilities -------------------------------------------------------

def subformulas(f: Formula) -> Iterator[Formula]:
    """Every subformula occurrence, clause members included, pre-order."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        if isinstance(g, Not):
            stack.append(g.sub)
        elif isinstance(g, Or):
            stack.extend((g.right, g.left))
        elif isinstance(g, CPBox):
            stack.append(g.consequent)
            stack.extend(reversed(g.clause))
            stack.append(g.antecedent)
        elif isinstance(g, CompPoss):
            stack.append(g.right)
            stack.extend(reversed(g.clause or ()))
            stack.append(g.left)


def _children(g) -> tuple:
    if isinstance(g, Not):
        return (g.sub,)
    if isinstance(g, Or):
        return (g.left, g.right)
    if isinstance(g, CPBox):
        return (g.antecedent, *g.clause, g.consequent)
    if isinstance(g, CompPoss):
        return (g.left, *(g.clause or ()), g.right)
    return ()


def distinct_subformulas(f: Formula) -> Iterator[Formula]:
    """Each distinct subformula once; linear in the size of a shared DAG."""
    seen = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if g in seen:
            continue
        seen.add(g)
        yield g
        stack.extend(_children(g))


def universe_of_discourse(f) -> frozenset[str]:
    """Propositional variables occurring in a formula or a clause set."""
    if isinstance(f, (tuple, list, set, frozenset)):
        out = set()
        for g in f:
            out |= universe_of_discourse(g)
        return frozenset(out)
    return frozenset(g.name for g in distinct_subformulas(f) if isinstance(g, Atom))


def von_wright_clause(phi: Formula, psi: Formula, universe: Iterable[str]) -> ClauseSet:
    """Fix every variable of ``universe`` not mentioned by ``phi`` or ``psi``."""
    mentioned = universe_of_discourse(phi) | universe_of_discourse(psi)
    return clause(Atom(p) for p in set(universe) - mentioned)


def is_modal(f: Formula) -> bool:
    return any(isinstance(g, (CPBox, CompPoss)) for g in distinct_subformulas(f))


def gamma_rank(f: Formula) -> int:
    """Construction stage: clause members always sit at a strictly lower stage."""
    memo: dict = {}

    def rank(g):
        if g in memo:
            return memo[g]
        if isinstance(g, (Atom, Bottom)):
            n = 0
        elif isinstance(g, Not):
            n = rank(g.sub)
        elif isinstance(g, Or):
            n = max(rank(g.left), rank(g.right))
        elif isinstance(g, CPBox):
            inner = max((rank(x) + 1 for x in g.clause), default=0)
            n = max(inner, rank(g.antecedent), rank(g.consequent))
        elif isinstance(g, CompPoss):
            inner = max((rank(x) + 1 for x in g.clause or ()), default=0)
            n = max(inner, rank(g.left), rank(g.right))
        else:
            raise TypeError(f"not a formula: {g!r}")
        memo[g] = n
        return n

    return rank(f)


def node_count(f: Formula) -> int:
    """Tree size of ``f``, counting shared subterms once per occurrence."""
    memo: dict[int, int] = {}

    def size(g):
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, (Atom, Bottom)):
            n = 1
        elif isinstance(g, Not):
            n = 1 + size(g.sub)
        elif isinstance(g, Or):
            n = 1 + size(g.left) + size(g.right)
        elif isinstance(g, CPBox):
            n = 1 + size(g.antecedent) + size(g.consequent) + sum(size(x) for x in g.clause)
        else:
            n = 1 + size(g.left) + size(g.right) + sum(size(x) for x in g.clause or ())
        memo[key] = n
        return n

    return size(f)
