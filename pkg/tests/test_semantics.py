import random

import pytest

from cpcf.models import PairOrder, SimilarityOrder, UnknownWorldError
from cpcf.oracle import (
    GeneratorParams, brute_truth, builtin_model, model_stream, random_boolean,
    random_clause, random_cp_formula,
)
from cpcf.semantics import (
    Evaluator, Interpretation, agreement_class, agreement_set, cp_relation,
    extension, satisfies,
)
from cpcf.syntax import CPBox, CPDiamond, Not, parse_clause, parse_formula

XS = ("CP", "NC", "MS")


@pytest.fixture(scope="module")
def fine():
    return builtin_model("fine")


@pytest.fixture(scope="module")
def lewis():
    return builtin_model("lewis")


@pytest.mark.parametrize("x", XS)
def test_fine_and_lewis_baseline(fine, lewis, x):
    assert not satisfies(fine, "w", "p cf> h", x)
    assert satisfies(lewis, "w", "p cf> h", x)


def test_cp_examples(fine):
    assert satisfies(fine, "w", "[p, {m}] h", "CP")
    assert satisfies(fine, "w", "[p, {m, s}] h", "CP")
    assert satisfies(fine, "w", "[p, {m, s}] ~h", "CP")
    assert not satisfies(fine, "w", "[p, {m, s}] h", "NC")
    assert not satisfies(fine, "w", "[p, {m, s}] ~h", "MS")
    assert not satisfies(fine, "w", "[p, {m, s}] h", "MS")
    assert satisfies(fine, "w", "[p, {m, s}] ~h", "NC")


def test_extension_examples(fine):
    assert extension(fine, "p") == {"u1", "u2", "v1", "v2"}
    assert extension(fine, "~p") == {"w"}
    assert extension(fine, "p & m") == {"v1", "v2"}
    assert extension(fine, "zzz") == set()


def test_agreement(fine):
    gamma = parse_clause("{m, s}")
    assert agreement_set(fine, gamma, "v1", "w").members == parse_clause("{s}")
    assert agreement_set(fine, gamma, "u1", "u1").members == gamma
    assert agreement_set(fine, (), "u1", "w").size == 0
    assert agreement_class(fine, parse_clause("{m}"), "w") == {"w", "u1", "u2"}
    assert agreement_class(fine, gamma, "w") == {"w"}
    assert agreement_class(fine, (), "w") == {"w", "u1", "u2", "v1", "v2"}


def test_relations_on_fine(fine):
    gamma = parse_clause("{m, s}")
    nc = cp_relation(fine, gamma, "w", "NC")
    assert nc == fine.order_at("w")
    assert nc.leq("v1", "u1") and not nc.leq("u1", "v1")
    ms = cp_relation(fine, gamma, "w", "MS")
    assert isinstance(ms, PairOrder)
    assert not ms.leq("v1", "u1") and not ms.leq("u1", "v1")
    cp = cp_relation(fine, parse_clause("{m}"), "w", "CP")
    assert cp == SimilarityOrder("w", ({"w"}, {"u1"}, {"u2"}))
    for x in XS:
        assert cp_relation(fine, (), "w", x) == fine.order_at("w")


def test_unknown_world(fine):
    with pytest.raises(UnknownWorldError):
        satisfies(fine, "nowhere", "p")
    with pytest.raises(UnknownWorldError):
        agreement_set(fine, (), "w", "nowhere")


def test_interpretation_coerce():
    assert Interpretation.coerce("ms") is Interpretation.MS
    with pytest.raises(ValueError):
        Interpretation.coerce("XX")


def test_comparative_domains(fine):
    # the cp-tagged operator quantifies over the agreement class only
    assert satisfies(fine, "w", "_|_ =<{m}cp p & m")
    assert not satisfies(fine, "w", "_|_ =< p & m")
    assert satisfies(fine, "w", "p & m =< p & s")
    assert not satisfies(fine, "w", "p & s =< p & m")
    assert satisfies(fine, "w", "p & s =<{m}nc p & m")
    assert satisfies(fine, "w", "~(_|_ =< p)")  # possibly p


def random_instances(n, seed=11, max_worlds=6):
    params = GeneratorParams(max_worlds=max_worlds, seed=seed)
    rng = random.Random(seed)
    stream = model_stream(params)
    for _ in range(n):
        yield next(stream), rng


def test_duality_and_recovery():
    for m, rng in random_instances(300):
        phi, psi = random_boolean(rng, m), random_boolean(rng, m)
        gamma = random_clause(rng, m)
        for x in XS:
            ev = Evaluator(m, x)
            assert ev.extension(CPDiamond(phi, gamma, psi)) == \
                frozenset(m.worlds) - ev.extension(CPBox(phi, gamma, Not(psi)))
            plain = Evaluator(m, "CP").extension(CPBox(phi, (), psi))
            assert ev.extension(CPBox(phi, (), psi)) == plain


def test_relation_shapes():
    for m, rng in random_instances(300):
        gamma = random_clause(rng, m)
        for w in m.worlds:
            dom = m.order_at(w).domain
            cp = cp_relation(m, gamma, w, "CP")
            assert cp.ranks[0] == {w}
            assert cp.domain == agreement_class(m, gamma, w)
            nc = cp_relation(m, gamma, w, "NC")
            assert nc.is_total and nc.domain == dom and nc.ranks[0] == {w}
            ms = cp_relation(m, gamma, w, "MS")
            for a in dom:
                assert ms.leq(a, a)
                for b in dom:
                    for c in dom:
                        if ms.leq(a, b) and ms.leq(b, c):
                            assert ms.leq(a, c)
                if a != w:
                    assert ms.leq(w, a) and not ms.leq(a, w)


def test_matches_brute_force():
    for m, rng in random_instances(250):
        f = random_cp_formula(rng, m, depth=3)
        for x in XS:
            ext = Evaluator(m, x).extension(f)
            for w in m.worlds:
                assert (w in ext) == brute_truth(m, w, f, x)


def test_string_and_ast_agree(fine):
    f = parse_formula("[p, {m}] h")
    assert satisfies(fine, "w", f) == satisfies(fine, "w", "[p, {m}] h")
