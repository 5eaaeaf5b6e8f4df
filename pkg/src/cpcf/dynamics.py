"""Clause updates: replace every world's similarity order by its transform."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

from .models import ConditionalModel, PairOrder
from .semantics import Evaluator, Interpretation, _KIND_FOR
from .syntax import CPBox, clause, is_modal

__all__ = [
    "UpdateDescriptor", "update", "iterated_update", "ModalityError",
    "IteratedUpdateWarning", "static_and_dynamic",
    "check_dynamic_static_agreement", "order_diff",
]


class ModalityError(ValueError):
    """Antecedent or consequent contains a modality."""


class IteratedUpdateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class UpdateDescriptor:
    clause: tuple
    interpretation: Interpretation = Interpretation.CP

    def __post_init__(self):
        object.__setattr__(self, "clause", clause(self.clause))
        object.__setattr__(self, "interpretation",
                           Interpretation.coerce(self.interpretation))


def update(m: ConditionalModel, d: UpdateDescriptor | tuple, x=None) -> ConditionalModel:
    """Return a fresh model with each world's order transformed by the clause.

    ``d`` may be an ``UpdateDescriptor`` or a bare clause (then ``x`` picks
    the interpretation, CP by default). Worlds, valuation and the source
    model are unchanged. Total MS results are stored as ranked orders;
    partial ones as ``PairOrder``.
    """
    if not isinstance(d, UpdateDescriptor):
        d = UpdateDescriptor(tuple(d), x or Interpretation.CP)
    ev = Evaluator(m, d.interpretation)
    kind = _KIND_FOR[d.interpretation]
    orders = {}
    for w in m.worlds:
        rel = ev.relation(w, kind, d.clause)
        if isinstance(rel, PairOrder) and rel.is_total:
            rel = rel.as_ranked()
        orders[w] = rel
    # keep defaulted worlds defaulted when their trivial order survives
    for w in m.worlds:
        if w not in m.orders and w in orders and orders[w].pairs() == {(w, w)}:
            del orders[w]
    return ConditionalModel(m.worlds, orders, m.valuation, name=m.name)


def iterated_update(m: ConditionalModel, descriptors) -> ConditionalModel:
    """Apply several updates in sequence.

    Sequential updates do not in general agree with the corresponding
    nested static conditionals; a warning is emitted to that effect.
    """
    descriptors = list(descriptors)
    if len(descriptors) > 1:
        warnings.warn("iterated clause updates need not match nested static conditionals",
                      IteratedUpdateWarning, stacklevel=2)
    for d in descriptors:
        m = update(m, d)
    return m


def static_and_dynamic(m, w, phi, gamma, psi, x="CP") -> tuple[bool, bool]:
    """Truth of ``[phi, gamma] psi`` at ``w`` and of ``phi cf> psi`` after updating."""
    x = Interpretation.coerce(x)
    gamma = clause(gamma)
    static = Evaluator(m, x).holds(w, CPBox(phi, gamma, psi))
    updated = update(m, UpdateDescriptor(gamma, x))
    dynamic = Evaluator(updated, x).holds(w, CPBox(phi, (), psi))
    return static, dynamic


def check_dynamic_static_agreement(m, w, phi, gamma, psi, x="CP",
                                   allow_modal: bool = False) -> bool:
    """Whether static and update-then-evaluate truth coincide.

    Raises ``ModalityError`` when ``phi`` or ``psi`` is modal, unless
    ``allow_modal`` is set (agreement is then not guaranteed).
    """
    if not allow_modal:
        for name, f in (("antecedent", phi), ("consequent", psi)):
            if is_modal(f):
                raise ModalityError(f"{name} must be modality-free: {f}")
    static, dynamic = static_and_dynamic(m, w, phi, gamma, psi, x)
    return static == dynamic


def order_diff(before: ConditionalModel, after: ConditionalModel) -> dict:
    """Per world: entertainable worlds removed and added by an update."""
    out = {}
    for w in before.worlds:
        old = before.order_at(w).domain
        new = after.order_at(w).domain
        out[w] = {
            "removed": sorted(old - new),
            "added": sorted(new - old),
            "reordered": before.order_at(w).pairs() != after.order_at(w).pairs(),
        }
    return out
