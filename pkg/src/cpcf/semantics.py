"""Truth of formulas in conditional models under the CP, NC and MS readings.

Clause members and nested modalities are evaluated under the same
interpretation as the enclosing modality, always against the original
model's similarity orders. Unknown propositions are false everywhere.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .models import (
    ConditionalModel, PairOrder, SimilarityOrder, UnknownWorldError, min_elements,
)
from .syntax import Atom, Bottom, CompPoss, CPBox, Not, Or, parse_formula

__all__ = [
    "Interpretation", "AgreementSet", "Evaluator", "satisfies", "extension",
    "agreement_set", "agreement_class", "cp_relation", "realize",
]


class Interpretation(str, Enum):
    CP = "CP"
    NC = "NC"
    MS = "MS"

    @classmethod
    def coerce(cls, value) -> "Interpretation":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).upper())
        except ValueError:
            raise ValueError(f"unknown interpretation {value!r}; expected CP, NC or MS") from None

    def __str__(self):
        return self.value


# relation kind used by each interpretation's conditional
_KIND_FOR = {Interpretation.CP: "cp", Interpretation.NC: "nc", Interpretation.MS: "ms"}


@dataclass(frozen=True)
class AgreementSet:
    """Clause members on which two worlds agree."""

    members: tuple

    @property
    def size(self) -> int:
        return len(self.members)

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)


def _restrict(order, keep) -> SimilarityOrder | PairOrder:
    if isinstance(order, SimilarityOrder):
        ranks = tuple(r & keep for r in order.ranks)
        return SimilarityOrder(order.center, tuple(r for r in ranks if r))
    dom = order.domain & keep
    return PairOrder(order.center, dom,
                     frozenset((u, v) for u, v in order.pair_set if u in dom and v in dom))


class Evaluator:
    """Memoising evaluator bound to one model and one interpretation."""

    def __init__(self, model: ConditionalModel, interpretation="CP"):
        self.model = model
        self.interpretation = Interpretation.coerce(interpretation)
        self._ext: dict = {}
        self._rel: dict = {}
        self._all = frozenset(model.worlds)

    # -- extensions --
    def extension(self, f) -> frozenset:
        cached = self._ext.get(f)
        if cached is not None:
            return cached
        result = self._compute(f)
        self._ext[f] = result
        return result

    def holds(self, w, f) -> bool:
        if w not in self._all:
            raise UnknownWorldError(w)
        return w in self.extension(f)

    def _compute(self, f) -> frozenset:
        if isinstance(f, Atom):
            return self.model.true_at(f.name) & self._all
        if isinstance(f, Bottom):
            return frozenset()
        if isinstance(f, Not):
            return self._all - self.extension(f.sub)
        if isinstance(f, Or):
            return self.extension(f.left) | self.extension(f.right)
        if isinstance(f, CPBox):
            kind = _KIND_FOR[self.interpretation]
            ante = self.extension(f.antecedent)
            cons = self.extension(f.consequent)
            return frozenset(
                w for w in self.model.worlds
                if min_elements(self.relation(w, kind, f.clause), ante) <= cons
            )
        if isinstance(f, CompPoss):
            kind = "base" if f.kind == "plain" else f.kind
            left = self.extension(f.left)
            right = self.extension(f.right)
            return frozenset(
                w for w in self.model.worlds
                if _at_least_as_possible(self.relation(w, kind, f.clause or ()), left, right)
            )
        raise TypeError(f"not a formula: {f!r}")

    # -- agreement --
    def agreement_indices(self, gamma, u, w) -> frozenset:
        exts = [self.extension(g) for g in gamma]
        return frozenset(i for i, e in enumerate(exts) if (u in e) == (w in e))

    def agreement_set(self, gamma, u, v) -> AgreementSet:
        idx = self.agreement_indices(gamma, u, v)
        return AgreementSet(tuple(g for i, g in enumerate(gamma) if i in idx))

    def agreement_class(self, gamma, w) -> frozenset:
        base = self.model.order_at(w)
        full = len(gamma)
        return frozenset(u for u in base.domain
                         if len(self.agreement_indices(gamma, u, w)) == full)

    # -- relations --
    def relation(self, w, kind: str, gamma=()):
        key = (w, kind, gamma)
        cached = self._rel.get(key)
        if cached is None:
            cached = self._build_relation(w, kind, gamma)
            self._rel[key] = cached
        return cached

    def _build_relation(self, w, kind, gamma):
        base = self.model.order_at(w)
        if kind == "base" or not gamma:
            return base
        agree = {u: self.agreement_indices(gamma, u, w) for u in base.domain}
        if kind == "cp":
            full = len(gamma)
            return _restrict(base, frozenset(u for u, a in agree.items() if len(a) == full))
        if kind == "nc":
            if isinstance(base, SimilarityOrder):
                rank = base.rank_of
                keys = {u: (-len(agree[u]), rank[u]) for u in base.domain}
                levels = sorted(set(keys.values()))
                return SimilarityOrder(
                    w, tuple(frozenset(u for u in keys if keys[u] == k) for k in levels))
            dom = base.domain
            pairs = frozenset(
                (u, v) for u in dom for v in dom
                if len(agree[u]) > len(agree[v])
                or (len(agree[u]) == len(agree[v]) and base.leq(u, v))
            )
            return PairOrder(w, dom, pairs)
        if kind == "ms":
            dom = base.domain
            pairs = frozenset(
                (u, v) for u in dom for v in dom
                if agree[v] < agree[u] or (agree[v] == agree[u] and base.leq(u, v))
            )
            return PairOrder(w, dom, pairs)
        raise ValueError(f"unknown relation kind {kind!r}")


def _at_least_as_possible(order, left, right) -> bool:
    """Every right-world in the domain has a left-world at or below it."""
    dom = order.domain
    rights = [u for u in right if u in dom]
    if not rights:
        return True
    lefts = [v for v in left if v in dom]
    if not lefts:
        return False
    if isinstance(order, SimilarityOrder):
        rank = order.rank_of
        return min(rank[v] for v in lefts) <= min(rank[u] for u in rights)
    return all(any(order.leq(v, u) for v in lefts) for u in rights)


def _formula(f):
    return parse_formula(f) if isinstance(f, str) else f


def satisfies(m: ConditionalModel, w, f, x="CP") -> bool:
    """Whether ``f`` is true at world ``w`` of ``m`` under interpretation ``x``."""
    return Evaluator(m, x).holds(w, _formula(f))


def extension(m: ConditionalModel, f, x="CP") -> frozenset:
    return Evaluator(m, x).extension(_formula(f))


def agreement_set(m: ConditionalModel, gamma, u, v, x="CP") -> AgreementSet:
    for world in (u, v):
        if world not in m.worlds:
            raise UnknownWorldError(world)
    return Evaluator(m, x).agreement_set(tuple(gamma), u, v)


def agreement_class(m: ConditionalModel, gamma, w, x="CP") -> frozenset:
    """Worlds entertainable from ``w`` that agree with it on every clause member."""
    return Evaluator(m, x).agreement_class(tuple(gamma), w)


def realize(m: ConditionalModel, kind: str, gamma, w, x="CP"):
    """The order object for relation ``kind`` with clause ``gamma`` centred at ``w``."""
    from .syntax import clause

    if w not in m.worlds:
        raise UnknownWorldError(w)
    return Evaluator(m, x).relation(w, kind, clause(gamma))


def cp_relation(m: ConditionalModel, gamma, w, x="CP"):
    """The relation interpretation ``x`` substitutes for the order at ``w``.

    CP restricts the order to the agreement class; NC ranks by the number
    of agreeing clause members, then by the base order; MS compares
    agreement sets by strict inclusion, falling back on the base order when
    they coincide. Returns a ``SimilarityOrder`` or, for MS, possibly a
    ``PairOrder``.
    """
    x = Interpretation.coerce(x)
    return realize(m, _KIND_FOR[x], gamma, w, x)
