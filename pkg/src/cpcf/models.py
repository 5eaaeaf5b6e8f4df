"""Finite conditional models: similarity orders, validation, file I/O."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Mapping

__all__ = [
    "SimilarityOrder", "PairOrder", "ConditionalModel", "RelationSpec",
    "ValidationReport", "ModelFormatError", "ModelValidationError",
    "UnknownWorldError", "parse_model", "load_model", "render_model",
    "validate_model", "min_elements", "min_worlds", "trivial_order",
    "RELATION_KINDS",
]

_IDENT = re.compile(r"^[A-Za-z0-9_]+$")


class ModelFormatError(ValueError):
    """Malformed model file; carries the 1-based line number."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line else message)


class ModelValidationError(ValueError):
    def __init__(self, report: "ValidationReport"):
        self.report = report
        super().__init__("; ".join(report.violations))


class UnknownWorldError(KeyError):
    pass


@dataclass(frozen=True)
class SimilarityOrder:
    """Total preorder as ranked classes, most similar first.

    ``ranks[0]`` is expected to be ``{center}``; validation checks it.
    """

    center: str
    ranks: tuple

    def __post_init__(self):
        object.__setattr__(self, "ranks", tuple(frozenset(r) for r in self.ranks))

    @property
    def domain(self) -> frozenset:
        return frozenset().union(*self.ranks)

    @property
    def rank_of(self) -> dict:
        table = self.__dict__.get("_rank_of")
        if table is None:
            table = {u: i for i, r in enumerate(self.ranks) for u in r}
            object.__setattr__(self, "_rank_of", table)
        return table

    is_total = True

    def leq(self, u, v) -> bool:
        r = self.rank_of
        return u in r and v in r and r[u] <= r[v]

    def pairs(self) -> frozenset:
        r = self.rank_of
        return frozenset((u, v) for u in r for v in r if r[u] <= r[v])

    def __eq__(self, other):
        if not isinstance(other, SimilarityOrder):
            return NotImplemented
        return self.center == other.center and self.ranks == other.ranks

    def __hash__(self):
        return hash((self.center, self.ranks))


@dataclass(frozen=True)
class PairOrder:
    """Preorder stored as an explicit set of ``(u, v)`` pairs meaning u <= v.

    Used for updated models whose relation is not total.
    """

    center: str
    domain: frozenset
    pair_set: frozenset

    def leq(self, u, v) -> bool:
        return (u, v) in self.pair_set

    def pairs(self) -> frozenset:
        return self.pair_set

    @property
    def is_total(self) -> bool:
        d = self.domain
        return all(self.leq(u, v) or self.leq(v, u) for u in d for v in d)

    def as_ranked(self) -> SimilarityOrder:
        """Rank classes of a total pair order; raises if not total."""
        if not self.is_total:
            raise ValueError("order is not total")
        below = {u: sum(1 for v in self.domain if self.leq(v, u)) for u in self.domain}
        levels = sorted(set(below.values()))
        return SimilarityOrder(
            self.center,
            tuple(frozenset(u for u in self.domain if below[u] == k) for k in levels),
        )


def trivial_order(world: str) -> SimilarityOrder:
    return SimilarityOrder(world, (frozenset({world}),))


@dataclass(frozen=True)
class ConditionalModel:
    """``worlds`` in file order, ``orders`` keyed by center, ``valuation`` by prop."""

    worlds: tuple
    orders: Mapping = field(default_factory=dict)
    valuation: Mapping = field(default_factory=dict)
    name: str = "model"

    def __post_init__(self):
        object.__setattr__(self, "worlds", tuple(self.worlds))
        object.__setattr__(self, "orders", dict(self.orders))
        object.__setattr__(
            self, "valuation", {p: frozenset(ws) for p, ws in self.valuation.items()})

    def order_at(self, w):
        if w not in self.worlds:
            raise UnknownWorldError(w)
        order = self.orders.get(w)
        return order if order is not None else trivial_order(w)

    def props(self) -> tuple:
        return tuple(sorted(self.valuation))

    def true_at(self, prop: str) -> frozenset:
        return self.valuation.get(prop, frozenset())

    def defaulted_worlds(self) -> tuple:
        return tuple(w for w in self.worlds if w not in self.orders)

    def same_structure(self, other: "ConditionalModel") -> bool:
        """Equal worlds, valuation (ignoring empty props) and effective orders."""
        if set(self.worlds) != set(other.worlds):
            return False
        mine = {p: v for p, v in self.valuation.items() if v}
        theirs = {p: v for p, v in other.valuation.items() if v}
        if mine != theirs:
            return False
        return all(
            self.order_at(w).domain == other.order_at(w).domain
            and self.order_at(w).pairs() == other.order_at(w).pairs()
            for w in self.worlds
        )

    def __hash__(self):
        return id(self)

    def __eq__(self, other):
        if not isinstance(other, ConditionalModel):
            return NotImplemented
        return self.name == other.name and self.same_structure(other)


# Validation -----------------------------------------------------------------

@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self):
        return self.ok

    def __str__(self):
        lines = [f"violation: {v}" for v in self.violations]
        lines += [f"note: {n}" for n in self.notes]
        return "\n".join(lines) if lines else "ok"


def _check_ranked(w, order: SimilarityOrder, worlds: set, report: ValidationReport):
    seen = {}
    for i, rank in enumerate(order.ranks):
        if not rank:
            report.violations.append(f"order at {w}: rank {i} is empty")
        for u in rank:
            if u in seen:
                report.violations.append(
                    f"order at {w}: ranks not disjoint ({u} in ranks {seen[u]} and {i})")
            seen.setdefault(u, i)
    dom = order.domain
    if w not in dom:
        report.violations.append(f"order at {w}: center {w} is not entertainable")
    elif not order.ranks or order.ranks[0] != frozenset({w}):
        others = sorted(order.ranks[0] - {w}) if order.ranks else []
        report.violations.append(
            f"order at {w}: strict centering violated, {w} tied with {', '.join(others)}")
    for u in sorted(dom - worlds):
        report.violations.append(f"order at {w}: unknown world {u}")


def _check_pairs(w, order: PairOrder, worlds: set, report, relaxed: bool):
    dom = order.domain
    for u, v in order.pair_set:
        if u not in dom or v not in dom:
            report.violations.append(f"order at {w}: pair {u}<={v} outside domain")
    for u in sorted(dom):
        if not order.leq(u, u):
            report.violations.append(f"order at {w}: not reflexive at {u}")
    for u, v in order.pair_set:
        for v2, z in order.pair_set:
            if v == v2 and not order.leq(u, z):
                report.violations.append(
                    f"order at {w}: not transitive ({u}<={v}<={z} but not {u}<={z})")
    if w not in dom:
        report.violations.append(f"order at {w}: center {w} is not entertainable")
    else:
        for u in sorted(dom - {w}):
            if not order.leq(w, u) or order.leq(u, w):
                report.violations.append(
                    f"order at {w}: strict centering violated for {u}")
    if not order.is_total:
        msg = f"order at {w}: not total"
        (report.notes if relaxed else report.violations).append(msg)
    for u in sorted(dom - worlds):
        report.violations.append(f"order at {w}: unknown world {u}")


def validate_model(m: ConditionalModel, relaxed: bool = False) -> ValidationReport:
    """Check every model invariant; ``relaxed`` tolerates non-total pair orders."""
    report = ValidationReport()
    worlds = set(m.worlds)
    if not worlds:
        report.violations.append("model has no worlds")
    if len(worlds) != len(m.worlds):
        report.violations.append("duplicate world identifiers")
    for w in m.worlds:
        if not _IDENT.match(str(w)):
            report.violations.append(f"bad world identifier {w!r}")
    for p, ws in m.valuation.items():
        if not _IDENT.match(str(p)):
            report.violations.append(f"bad proposition identifier {p!r}")
        for u in sorted(ws - worlds):
            report.violations.append(f"valuation of {p}: unknown world {u}")
    for w, order in m.orders.items():
        if w not in worlds:
            report.violations.append(f"order for unknown world {w}")
            continue
        if order.center != w:
            report.violations.append(f"order at {w} has center {order.center}")
        if isinstance(order, SimilarityOrder):
            _check_ranked(w, order, worlds, report)
        else:
            _check_pairs(w, order, worlds, report, relaxed)
    defaulted = m.defaulted_worlds()
    if defaulted:
        report.notes.append("defaulted (trivial) orders at: " + ", ".join(defaulted))
    return report


# File format ----------------------------------------------------------------

def _split_words(text: str, line_no: int) -> list:
    words = text.split()
    for word in words:
        if not _IDENT.match(word):
            raise ModelFormatError(f"bad identifier {word!r}", line_no)
    return words


def parse_model(text: str, validate: bool = True, relaxed: bool = False) -> ConditionalModel:
    """Read the line-oriented ``.cpm`` format.

    Raises ``ModelFormatError`` on syntax problems and
    ``ModelValidationError`` when the model breaks an invariant.
    """
    name = "model"
    worlds: list = []
    valuation: dict = {}
    orders: dict = {}
    for line_no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()
        if keyword == "model":
            name = rest or name
        elif keyword == "worlds":
            worlds.extend(_split_words(rest, line_no))
        elif keyword in ("val", "order", "order-pairs"):
            head, colon, body = rest.partition(":")
            head = head.strip()
            if not colon or not _IDENT.match(head):
                raise ModelFormatError(f"expected '{keyword} <name>: ...'", line_no)
            if keyword == "val":
                if head in valuation:
                    raise ModelFormatError(f"duplicate valuation for {head}", line_no)
                valuation[head] = frozenset(_split_words(body, line_no))
                continue
            if head in orders:
                raise ModelFormatError(f"duplicate order for {head}", line_no)
            if keyword == "order":
                ranks = [_split_words(part, line_no) for part in body.split("|")]
                if any(not r for r in ranks):
                    raise ModelFormatError("empty rank in order", line_no)
                orders[head] = SimilarityOrder(head, tuple(frozenset(r) for r in ranks))
            else:
                pairs = set()
                for item in filter(None, (x.strip() for x in body.split(","))):
                    u, sep, v = item.partition("<=")
                    if not sep:
                        raise ModelFormatError(f"expected u<=v, got {item!r}", line_no)
                    u, v = u.strip(), v.strip()
                    _split_words(u, line_no)
                    _split_words(v, line_no)
                    pairs.add((u, v))
                dom = frozenset(x for pr in pairs for x in pr)
                orders[head] = PairOrder(head, dom, frozenset(pairs))
        else:
            raise ModelFormatError(f"unknown keyword {keyword!r}", line_no)
    model = ConditionalModel(tuple(worlds), orders, valuation, name=name)
    if validate:
        report = validate_model(model, relaxed=relaxed)
        if not report.ok:
            raise ModelValidationError(report)
    return model


def load_model(path, **kwargs) -> ConditionalModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model(fh.read(), **kwargs)


def _sorted_worlds(m: ConditionalModel, ws) -> list:
    index = {w: i for i, w in enumerate(m.worlds)}
    return sorted(ws, key=lambda u: (index.get(u, len(index)), u))


def render_model(m: ConditionalModel) -> str:
    lines = [f"model {m.name}", "worlds " + " ".join(m.worlds)]
    for p in m.props():
        lines.append(f"val {p}: " + " ".join(_sorted_worlds(m, m.valuation[p])))
    for w in m.worlds:
        order = m.orders.get(w)
        if order is None:
            continue
        if isinstance(order, SimilarityOrder):
            body = " | ".join(" ".join(_sorted_worlds(m, r)) for r in order.ranks)
            lines.append(f"order {w}: {body}")
        else:
            rank = {u: i for i, u in enumerate(_sorted_worlds(m, order.domain))}
            pairs = sorted(order.pair_set, key=lambda pr: (rank[pr[0]], rank[pr[1]]))
            lines.append(f"order-pairs {w}: " + ", ".join(f"{u}<={v}" for u, v in pairs))
    return "\n".join(lines) + "\n"


# Minimal worlds -------------------------------------------------------------

RELATION_KINDS = ("base", "cp", "nc", "ms")


@dataclass(frozen=True)
class RelationSpec:
    """Which similarity relation to use at ``center``.

    ``kind`` is ``base`` for the model's own order, or ``cp`` / ``nc`` /
    ``ms`` for the clause-transformed relations. ``interpretation`` is the
    semantics used to evaluate clause members.
    """

    kind: str
    center: str
    clause: tuple = ()
    interpretation: str = "CP"

    def __post_init__(self):
        if self.kind not in RELATION_KINDS:
            raise ValueError(f"unknown relation kind {self.kind!r}")


def min_elements(order, worlds: Iterable) -> frozenset:
    """Minimal members of ``worlds`` within the order's domain."""
    dom = order.domain
    candidates = [u for u in worlds if u in dom]
    if not candidates:
        return frozenset()
    if isinstance(order, SimilarityOrder):
        rank = order.rank_of
        best = min(rank[u] for u in candidates)
        return frozenset(u for u in candidates if rank[u] == best)
    # u is strictly below v iff u <= v and not v <= u
    return frozenset(
        v for v in candidates
        if not any(order.leq(u, v) and not order.leq(v, u) for u in candidates)
    )


def min_worlds(m: ConditionalModel, rel: RelationSpec, worlds: Iterable) -> frozenset:
    """Minimal elements of ``worlds`` under the relation described by ``rel``."""
    from .semantics import Interpretation, realize

    if rel.center not in m.worlds:
        raise UnknownWorldError(rel.center)
    order = realize(m, rel.kind, rel.clause, rel.center, Interpretation(rel.interpretation))
    return min_elements(order, worlds)
