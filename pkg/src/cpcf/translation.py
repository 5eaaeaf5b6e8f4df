"""Compile ceteris paribus conditionals into plain comparative possibility.

Two stages, applied inside-out:

1. ``lower_cp_modality`` rewrites ``[phi, G] psi`` into the comparative
   language with clause-tagged operators.
2. ``eliminate_*_order`` rewrites each clause-tagged comparative into
   the plain ``=<`` fragment by case analysis over the sign patterns of
   the clause (``gamma_star``).

The CP lowering relativises its possibility guard to the agreement class,
the MS lowering goes straight to the plain fragment, and the NC
elimination compares against every agreement pattern of the same size.
The simpler textbook shapes are kept under ``naive=True``; they are not
equivalent in general (see the test suite for counterexamples).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .semantics import Interpretation
from .syntax import (
    BOTTOM, And, Atom, Bottom, CompPoss, CPBox, Diamond, Implies, Not, Or,
    Strict, clause, conjunction, disjunction, node_count,
)

__all__ = [
    "SignedConjunction", "TranslationBudget", "BudgetExceeded", "gamma_star",
    "lower_cp_modality", "eliminate_cp_order", "eliminate_ms_order",
    "eliminate_nc_order", "eliminate_order", "lower_all", "translate_full",
    "in_plain_fragment", "translation_stats",
]


class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, estimate: int | None = None):
        self.estimate = estimate
        super().__init__(message)


@dataclass(frozen=True)
class TranslationBudget:
    max_clause: int = 3
    max_nodes: int = 10**6

    def __post_init__(self):
        if self.max_clause <= 0 or self.max_nodes <= 0:
            raise ValueError("budget limits must be positive")

    def check_clause(self, gamma):
        if len(gamma) > self.max_clause:
            # rough size of the subset-guarded expansion: 4^|G| blocks
            raise BudgetExceeded(
                f"clause of size {len(gamma)} exceeds limit {self.max_clause}",
                estimate=4 ** len(gamma))


DEFAULT_BUDGET = TranslationBudget()


@dataclass(frozen=True)
class SignedConjunction:
    """One sign per clause member; reads as the conjunction of the literals."""

    literals: tuple  # ((positive: bool, member), ...)

    def literal_formulas(self) -> tuple:
        return tuple(g if pos else Not(g) for pos, g in self.literals)

    def formula(self):
        return conjunction(self.literal_formulas())

    def subsets(self):
        """Sub-conjunctions, smallest first, in canonical member order."""
        lits = self.literals
        for k in range(len(lits) + 1):
            for combo in itertools.combinations(lits, k):
                yield SignedConjunction(combo)

    def __len__(self):
        return len(self.literals)

    def __le__(self, other):
        return set(self.literals) <= set(other.literals)

    def __lt__(self, other):
        return set(self.literals) < set(other.literals)


def gamma_star(gamma, budget: TranslationBudget | None = None) -> list:
    """All ``2**len(gamma)`` sign patterns; the first member's sign varies fastest."""
    gamma = clause(gamma)
    if budget is not None:
        budget.check_clause(gamma)
    out = []
    for signs in itertools.product((True, False), repeat=len(gamma)):
        signs = signs[::-1]
        out.append(SignedConjunction(tuple(zip(signs, gamma))))
    return out


def _lewis(chi, psi):
    """Plain counterfactual over a total order, in the plain fragment."""
    return Implies(Diamond(chi), Strict("plain", None, And(chi, psi), And(chi, Not(psi))))


def _with(phi, lam: SignedConjunction):
    return And(phi, lam.formula())


def lower_cp_modality(phi, gamma, psi, x, naive: bool = False):
    """Rewrite ``[phi, gamma] psi`` under interpretation ``x`` as a comparative formula.

    NC: ``<>phi -> (phi & psi) <^G (phi & ~psi)``. CP: the same shape with
    the CP-tagged operator, guarded by possibility inside the agreement
    class. MS: a case split over agreement patterns with plain
    counterfactuals inside (already in the plain fragment).
    """
    x = Interpretation.coerce(x)
    gamma = clause(gamma)
    yes, no = And(phi, psi), And(phi, Not(psi))
    if x is Interpretation.NC:
        return Implies(Diamond(phi), Strict("nc", gamma, yes, no))
    if x is Interpretation.CP:
        guard = Diamond(phi) if naive or not gamma else Strict("cp", gamma, phi, BOTTOM)
        return Implies(guard, Strict("cp", gamma, yes, no))
    if naive:
        return Implies(Diamond(phi), Strict("ms", gamma, yes, no))
    if not gamma:
        return _lewis(phi, psi)
    blocks = []
    for g in gamma_star(gamma):
        cases = []
        for lam in g.subsets():
            guards = [Not(Diamond(_with(phi, bigger)))
                      for bigger in g.subsets() if lam < bigger]
            cases.append(Implies(conjunction(guards), _lewis(_with(phi, lam), psi)))
        blocks.append(Implies(g.formula(), conjunction(cases)))
    return conjunction(blocks)


def eliminate_cp_order(phi, gamma, psi, budget=DEFAULT_BUDGET):
    """``phi =<{G}cp psi`` as a conjunction over sign patterns of ``G``."""
    return conjunction(
        Implies(g.formula(), CompPoss("plain", None, _with(phi, g), _with(psi, g)))
        for g in gamma_star(gamma, budget)
    )


def _guarded_elimination(phi, psi, gamma, budget, bigger, left_for):
    blocks = []
    for g in gamma_star(gamma, budget):
        cases = []
        subsets = list(g.subsets())
        for lam in subsets:
            guards = [Not(Diamond(_with(phi, other))) for other in subsets if bigger(lam, other)]
            cases.append(Implies(conjunction(guards),
                                 CompPoss("plain", None, left_for(g, lam), _with(psi, lam))))
        blocks.append(Implies(g.formula(), conjunction(cases)))
    return conjunction(blocks)


def eliminate_ms_order(phi, gamma, psi, budget=DEFAULT_BUDGET):
    """``phi =<{G}ms psi`` with strict-superset guards."""
    return _guarded_elimination(
        phi, psi, gamma, budget,
        bigger=lambda lam, other: lam < other,
        left_for=lambda g, lam: _with(phi, lam),
    )


def eliminate_nc_order(phi, gamma, psi, budget=DEFAULT_BUDGET, naive: bool = False):
    """``phi =<{G}nc psi`` with cardinality guards.

    The left operand ranges over every pattern of the same size as the
    case being handled; ``naive=True`` uses only that pattern.
    """
    def left_for(g, lam):
        if naive:
            return _with(phi, lam)
        same = [other.formula() for other in g.subsets() if len(other) == len(lam)]
        return And(phi, disjunction(same))

    return _guarded_elimination(
        phi, psi, gamma, budget,
        bigger=lambda lam, other: len(lam) < len(other),
        left_for=left_for,
    )


_ELIMINATORS = {"cp": eliminate_cp_order, "ms": eliminate_ms_order, "nc": eliminate_nc_order}


def eliminate_order(f: CompPoss, budget=DEFAULT_BUDGET):
    if f.kind == "plain":
        return f
    return _ELIMINATORS[f.kind](f.left, f.clause, f.right, budget)


def _map(f, leaf_cpbox, leaf_comp, memo):
    key = id(f)
    hit = memo.get(key)
    if hit is not None:
        return hit[1]
    if isinstance(f, (Atom, Bottom)):
        out = f
    elif isinstance(f, Not):
        out = Not(_map(f.sub, leaf_cpbox, leaf_comp, memo))
    elif isinstance(f, Or):
        out = Or(_map(f.left, leaf_cpbox, leaf_comp, memo),
                 _map(f.right, leaf_cpbox, leaf_comp, memo))
    elif isinstance(f, CPBox):
        out = leaf_cpbox(
            _map(f.antecedent, leaf_cpbox, leaf_comp, memo),
            tuple(_map(g, leaf_cpbox, leaf_comp, memo) for g in f.clause),
            _map(f.consequent, leaf_cpbox, leaf_comp, memo),
        )
    elif isinstance(f, CompPoss):
        out = leaf_comp(
            f.kind,
            tuple(_map(g, leaf_cpbox, leaf_comp, memo) for g in f.clause or ()),
            _map(f.left, leaf_cpbox, leaf_comp, memo),
            _map(f.right, leaf_cpbox, leaf_comp, memo),
        )
    else:
        raise TypeError(f"not a formula: {f!r}")
    memo[key] = (f, out)  # keep f alive so its id is not reused
    return out


def lower_all(f, x, naive: bool = False):
    """Lower every conditional in ``f``; comparatives are left in place."""
    return _map(
        f,
        lambda a, g, c: lower_cp_modality(a, g, c, x, naive=naive),
        lambda kind, g, left, right: CompPoss(kind, g, left, right),
        {},
    )


def translate_full(f, x="CP", budget: TranslationBudget = DEFAULT_BUDGET):
    """Translate ``f`` into the plain comparative fragment, innermost first."""
    x = Interpretation.coerce(x)

    def check_size(out):
        n = node_count(out)
        if n > budget.max_nodes:
            raise BudgetExceeded(
                f"translation has {n} nodes, limit is {budget.max_nodes}", estimate=n)
        return out

    def on_cpbox(a, g, c):
        budget.check_clause(g)
        lowered = lower_cp_modality(a, g, c, x)
        return check_size(_map(lowered, on_cpbox, on_comp, {}))

    def on_comp(kind, g, left, right):
        # an empty clause leaves every tagged relation equal to the base order
        if kind == "plain" or not g:
            return CompPoss("plain", None, left, right)
        budget.check_clause(g)
        return check_size(_ELIMINATORS[kind](left, g, right, budget))

    return check_size(_map(f, on_cpbox, on_comp, {}))


def in_plain_fragment(f) -> bool:
    """Only atoms, bottom, negation, disjunction and untagged ``=<``."""
    stack = [f]
    seen = set()
    while stack:
        g = stack.pop()
        if id(g) in seen:
            continue
        seen.add(id(g))
        if isinstance(g, (Atom, Bottom)):
            continue
        if isinstance(g, Not):
            stack.append(g.sub)
        elif isinstance(g, Or):
            stack.extend((g.left, g.right))
        elif isinstance(g, CompPoss) and g.kind == "plain":
            stack.extend((g.left, g.right))
        else:
            return False
    return True


def translation_stats(source, output) -> dict:
    from .syntax import subformulas

    clauses = [g.clause for g in subformulas(source)
               if isinstance(g, CPBox) or (isinstance(g, CompPoss) and g.kind != "plain")]
    return {
        "input_nodes": node_count(source),
        "output_nodes": node_count(output),
        "clauses": len(clauses),
        "gamma_star_sizes": [2 ** len(c) for c in clauses],
        "plain_fragment": in_plain_fragment(output),
    }
