import random

import pytest

from cpcf.models import parse_model
from cpcf.oracle import (
    GeneratorParams, builtin_model, model_stream, random_boolean, random_clause,
    random_cp_formula,
)
from cpcf.semantics import Evaluator
from cpcf.syntax import (
    BOTTOM, TOP, And, Atom, CompPoss, CPBox, Diamond, Implies, Not, Or, Strict,
    parse_clause, parse_formula, render_formula, subformulas,
)
from cpcf.translation import (
    BudgetExceeded, TranslationBudget, eliminate_cp_order, eliminate_ms_order,
    eliminate_nc_order, eliminate_order, gamma_star, in_plain_fragment,
    lower_all, lower_cp_modality, translate_full, translation_stats,
)

p, q, r, s, m, h = (Atom(n) for n in "pqrsmh")
phi, psi = Atom("a"), Atom("b")


def test_gamma_star_example():
    got = [g.formula() for g in gamma_star(parse_clause("{p, ~q}"))]
    assert got == [And(p, Not(q)), And(Not(p), Not(q)), And(p, Not(Not(q))), And(Not(p), Not(Not(q)))]


def test_gamma_star_sizes():
    assert [g.formula() for g in gamma_star(())] == [TOP]
    for n in range(4):
        gamma = tuple(Atom(f"g{i}") for i in range(n))
        assert len(gamma_star(gamma)) == 2 ** n
        assert len({g.literals for g in gamma_star(gamma)}) == 2 ** n


def test_gamma_star_budget():
    gamma = tuple(Atom(f"g{i}") for i in range(4))
    with pytest.raises(BudgetExceeded) as info:
        gamma_star(gamma, TranslationBudget())
    assert info.value.estimate > 0
    assert len(gamma_star(gamma, TranslationBudget(max_clause=4))) == 16
    with pytest.raises(ValueError):
        TranslationBudget(max_clause=0)


def test_signed_subsets():
    g = gamma_star((m, s))[0]
    subsets = list(g.subsets())
    assert [len(x) for x in subsets] == [0, 1, 1, 2]
    assert subsets[0] < subsets[3] and not subsets[3] < subsets[1]


def test_lower_nc_shape():
    got = lower_cp_modality(p, (m,), h, "NC")
    assert got == Implies(Diamond(p), Strict("nc", (m,), And(p, h), And(p, Not(h))))


def test_lower_cp_shape():
    got = lower_cp_modality(p, (m,), h, "CP")
    guard = Strict("cp", (m,), p, BOTTOM)
    assert got == Implies(guard, Strict("cp", (m,), And(p, h), And(p, Not(h))))
    naive = lower_cp_modality(p, (m,), h, "CP", naive=True)
    assert naive == Implies(Diamond(p), Strict("cp", (m,), And(p, h), And(p, Not(h))))


def test_lower_empty_clause_is_lewis():
    fine, lewis = builtin_model("fine"), builtin_model("lewis")
    for x in ("CP", "NC", "MS"):
        f = lower_cp_modality(p, (), h, x)
        for model in (fine, lewis):
            assert Evaluator(model, "CP").extension(f) == Evaluator(model, x).extension(CPBox(p, (), h))


def test_lower_ms_is_plain():
    f = lower_cp_modality(p, (m, s), h, "MS")
    assert in_plain_fragment(f)
    naive = lower_cp_modality(p, (m, s), h, "MS", naive=True)
    assert naive == Implies(Diamond(p), Strict("ms", (m, s), And(p, h), And(p, Not(h))))


def test_eliminate_cp_shape():
    got = eliminate_cp_order(phi, (m,), psi)
    plain = lambda lit: CompPoss("plain", None, And(phi, lit), And(psi, lit))
    assert got == And(Implies(m, plain(m)), Implies(Not(m), plain(Not(m))))
    empty = eliminate_cp_order(phi, (), psi)
    assert empty == Implies(TOP, CompPoss("plain", None, And(phi, TOP), And(psi, TOP)))


def conjuncts(f):
    """Top-level conjuncts of a left-folded conjunction."""
    out = []
    while True:
        if isinstance(f, Not) and isinstance(f.sub, Or) and isinstance(f.sub.left, Not) \
                and isinstance(f.sub.right, Not):
            out.append(f.sub.right.sub)
            f = f.sub.left.sub
        else:
            out.append(f)
            return out[::-1]


def test_eliminate_cp_conjunct_count():
    for n in range(4):
        gamma = tuple(Atom(f"g{i}") for i in range(n))
        assert len(conjuncts(eliminate_cp_order(phi, gamma, psi))) == 2 ** n


def test_eliminate_ms_empty_and_singleton():
    empty = eliminate_ms_order(phi, (), psi)
    assert empty == Implies(TOP, Implies(TOP, CompPoss("plain", None, And(phi, TOP), And(psi, TOP))))
    single = eliminate_ms_order(phi, (m,), psi)
    guard = Not(Diamond(And(phi, m)))
    assert guard in set(subformulas(single))
    assert single == eliminate_nc_order(phi, (m,), psi)
    assert single == eliminate_nc_order(phi, (m,), psi, naive=True)


def test_eliminate_nc_guards():
    out = eliminate_nc_order(phi, (m, s), psi)
    subs = set(subformulas(out))
    for lit in (m, s):
        assert Not(Diamond(And(phi, lit))) in subs
    assert Not(Diamond(And(phi, And(m, s)))) in subs


def test_eliminate_order_dispatch():
    f = CompPoss("ms", (m,), phi, psi)
    assert eliminate_order(f) == eliminate_ms_order(phi, (m,), psi)
    plain = CompPoss("plain", None, phi, psi)
    assert eliminate_order(plain) is plain


# The simpler textbook forms are not equivalent; each has a small countermodel.

def _ext(model, f, x="CP"):
    return Evaluator(model, x).extension(f)


def test_naive_cp_lowering_counterexample():
    model = parse_model("worlds w a\nval p: w\norder w: w | a\n")
    direct = _ext(model, CPBox(Not(p), (p,), p), "CP")
    naive = _ext(model, lower_cp_modality(Not(p), (p,), p, "CP", naive=True))
    sound = _ext(model, lower_cp_modality(Not(p), (p,), p, "CP"))
    assert "w" in direct and "w" not in naive and sound == direct


def test_naive_ms_lowering_counterexample():
    model = parse_model("worlds w a b\nval p: a\nval q: b\norder w: w | a | b\n")
    f = CPBox(Or(p, q), (p, q), p)
    direct = _ext(model, f, "MS")
    naive = _ext(model, lower_cp_modality(Or(p, q), (p, q), p, "MS", naive=True), "MS")
    sound = _ext(model, lower_cp_modality(Or(p, q), (p, q), p, "MS"))
    assert "w" not in direct and "w" in naive and sound == direct


def test_naive_nc_elimination_counterexample():
    model = parse_model("worlds w a b\nval p: a\nval q: b\norder w: w | a | b\n")
    direct = _ext(model, CompPoss("nc", (p, q), p, q))
    naive = _ext(model, eliminate_nc_order(p, (p, q), q, naive=True))
    sound = _ext(model, eliminate_nc_order(p, (p, q), q))
    assert "w" in direct and "w" not in naive and sound == direct


def test_translate_empty_clause():
    out = translate_full(parse_formula("[p, {}] h"), "CP")
    assert out == Implies(Diamond(p), Strict("plain", None, And(p, h), And(p, Not(h))))
    assert render_formula(out) == "~(_|_ =< p) -> ~(p & ~h =< p & h)"


def test_translate_cp_chains_lowering_and_elimination():
    f = parse_formula("[p, {m}] h")
    lowered = lower_cp_modality(p, (m,), h, "CP")
    expected = Implies(
        Not(eliminate_cp_order(BOTTOM, (m,), p)),
        Not(eliminate_cp_order(And(p, Not(h)), (m,), And(p, h))),
    )
    assert lowered.left.sub.sub == CompPoss("cp", (m,), BOTTOM, p)
    assert translate_full(f, "CP") == expected


def test_translate_nested_on_noiter():
    model = builtin_model("noiter")
    f = parse_formula("[p, {s}] [q, {}] r")
    for x in ("CP", "NC", "MS"):
        out = translate_full(f, x)
        assert in_plain_fragment(out)
        assert _ext(model, out) == _ext(model, f, x)
    assert "w" in _ext(model, translate_full(f, "CP"))


def test_translate_fine_examples():
    fine = builtin_model("fine")
    for text in ["[p, {m}] h", "[p, {m, s}] h", "[p, {m, s}] ~h", "<p, {m}> s", "p =<{m}ms h"]:
        f = parse_formula(text)
        for x in ("CP", "NC", "MS"):
            assert _ext(fine, translate_full(f, x)) == _ext(fine, f, x), (text, x)


def test_translate_budget():
    f = parse_formula("[p, {a, b, c, d}] h")
    with pytest.raises(BudgetExceeded):
        translate_full(f, "MS")
    with pytest.raises(BudgetExceeded) as info:
        translate_full(parse_formula("[p, {m, s}] h"), "MS", TranslationBudget(max_nodes=50))
    assert info.value.estimate > 50


def test_in_plain_fragment():
    assert in_plain_fragment(parse_formula("~(p =< q) | r"))
    assert not in_plain_fragment(parse_formula("p =<{m}nc q"))
    assert not in_plain_fragment(parse_formula("p cf> q"))


def test_lower_all_keeps_comparatives():
    f = parse_formula("[p, {m}] h | (q =<{s}cp r)")
    out = lower_all(f, "NC")
    assert not any(isinstance(g, CPBox) for g in subformulas(out))
    assert CompPoss("cp", (s,), q, r) in set(subformulas(out))


def test_stats():
    f = parse_formula("[p, {m, s}] h")
    out = translate_full(f, "NC")
    stats = translation_stats(f, out)
    assert stats["clauses"] == 1 and stats["gamma_star_sizes"] == [4]
    assert stats["plain_fragment"] and stats["output_nodes"] > stats["input_nodes"]


def test_soundness_random():
    params = GeneratorParams(max_worlds=5, seed=21)
    stream = model_stream(params)
    rng = random.Random(21)
    budget = TranslationBudget(max_nodes=10**9)
    for _ in range(150):
        model = next(stream)
        f = random_cp_formula(rng, model, depth=3)
        for x in ("CP", "NC", "MS"):
            out = translate_full(f, x, budget)
            assert in_plain_fragment(out)
            assert _ext(model, out) == _ext(model, f, x)


def test_eliminations_random():
    stream = model_stream(GeneratorParams(seed=8))
    rng = random.Random(8)
    for _ in range(200):
        model = next(stream)
        a, b = random_boolean(rng, model), random_boolean(rng, model)
        gamma = random_clause(rng, model)
        for kind, fn in (("cp", eliminate_cp_order), ("ms", eliminate_ms_order), ("nc", eliminate_nc_order)):
            assert _ext(model, fn(a, gamma, b)) == _ext(model, CompPoss(kind, gamma, a, b))
