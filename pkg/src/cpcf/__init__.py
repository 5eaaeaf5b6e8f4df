"""Model checking for ceteris paribus counterfactuals.

Formulas are parsed with ``parse_formula``, evaluated in finite
conditional models with ``satisfies`` under the CP, NC or MS reading,
transformed by clause updates with ``update``, and compiled into the
plain comparative possibility fragment with ``translate_full``.
"""
from .dynamics import UpdateDescriptor, iterated_update, update
from .models import (
    ConditionalModel, PairOrder, RelationSpec, SimilarityOrder, load_model,
    min_worlds, parse_model, render_model, validate_model,
)
from .oracle import builtin_model, check_property, enumerate_models, random_model
from .semantics import Interpretation, agreement_class, agreement_set, extension, satisfies
from .syntax import parse_clause, parse_formula, render_formula
from .translation import BudgetExceeded, TranslationBudget, gamma_star, translate_full

__all__ = [
    "ConditionalModel", "SimilarityOrder", "PairOrder", "RelationSpec",
    "parse_model", "load_model", "render_model", "validate_model", "min_worlds",
    "parse_formula", "parse_clause", "render_formula",
    "Interpretation", "satisfies", "extension", "agreement_set", "agreement_class",
    "UpdateDescriptor", "update", "iterated_update",
    "TranslationBudget", "BudgetExceeded", "gamma_star", "translate_full",
    "builtin_model", "random_model", "enumerate_models", "check_property",
]
__version__ = "0.1.0"
