import pytest

from cpcf.models import SimilarityOrder, render_model, validate_model
from cpcf.oracle import (
    BUILTIN_NAMES, NIXON_EXPECTED, PROPERTY_IDS, CheckReport, GeneratorParams,
    brute_relation, brute_truth, builtin_model, check_property,
    count_orders, enumerate_models, model_stream, nixon_table, pairwise_min,
    probe_modal_clause, random_model,
)
from cpcf.semantics import satisfies
from cpcf.syntax import parse_formula


def test_random_model_deterministic_and_valid():
    params = GeneratorParams(min_worlds=3, max_worlds=3, seed=1)
    a, b = random_model(params), random_model(params)
    assert len(a.worlds) == 3
    assert validate_model(a).ok
    assert render_model(a) == render_model(b)


def test_streams_repeat():
    params = GeneratorParams(seed=9)
    one = [render_model(m) for _, m in zip(range(20), model_stream(params))]
    two = [render_model(m) for _, m in zip(range(20), model_stream(params))]
    assert one == two
    assert len(set(one)) > 1


def test_density_zero_gives_trivial_orders():
    m = random_model(GeneratorParams(density=0.0, seed=4, min_worlds=4))
    for w in m.worlds:
        assert m.order_at(w) == SimilarityOrder(w, ({w},))


def test_generated_models_validate():
    for _, m in zip(range(300), model_stream(GeneratorParams(seed=2))):
        assert validate_model(m).ok
        assert all(w in m.orders for w in m.worlds)


@pytest.mark.parametrize("kwargs", [
    {"min_worlds": 0}, {"min_worlds": 4, "max_worlds": 3}, {"density": 1.5},
    {"tie_prob": -0.1}, {"max_props": 9},
])
def test_bad_params(kwargs):
    with pytest.raises(ValueError):
        GeneratorParams(**kwargs)


@pytest.mark.parametrize("n, k, expected", [(1, 1, 2), (2, 1, 8), (3, 0, 6), (1, 0, 1), (3, 2, 6 * 64)])
def test_enumeration_counts(n, k, expected):
    models = list(enumerate_models(n, k))
    assert len(models) == expected
    assert len({render_model(m) for m in models}) == expected
    assert all(validate_model(m).ok for m in models)


def test_order_count_formula():
    assert [count_orders(n) for n in (1, 2, 3)] == [1, 2, 6]


def test_enumeration_guard():
    with pytest.raises(ValueError):
        list(enumerate_models(4, 1))
    with pytest.raises(ValueError):
        list(enumerate_models(2, 3))


def test_builtins():
    assert set(BUILTIN_NAMES) == {"fine", "lewis", "noiter"}
    with pytest.raises(KeyError):
        builtin_model("nixon")
    lewis = builtin_model("lewis")
    assert satisfies(lewis, "w", "p cf> h")
    noiter = builtin_model("noiter")
    assert satisfies(noiter, "w", "[p, {s}] [q, {}] r", "CP")


def test_nixon_table_live():
    got = nixon_table()
    assert len(got) == 12
    for (cf, g, x), value in got.items():
        assert value == NIXON_EXPECTED[(cf, g)][x]


def test_brute_relation_kinds():
    m = builtin_model("fine")
    gamma = (parse_formula("m"), parse_formula("s"))
    dom, leq = brute_relation(m, "w", "ms", gamma)
    assert pairwise_min(dom, leq, m.true_at("p")) == {"v1", "u1"}
    dom, leq = brute_relation(m, "w", "cp", gamma)
    assert dom == ["w"]
    with pytest.raises(ValueError):
        brute_relation(m, "w", "xx", gamma)


def test_brute_truth_examples():
    m = builtin_model("fine")
    assert not brute_truth(m, "w", parse_formula("p cf> h"))
    assert brute_truth(m, "w", parse_formula("[p, {m}] h"))
    assert not brute_truth(m, "w", parse_formula("[p, {m, s}] h"), "NC")


@pytest.mark.parametrize("prop", PROPERTY_IDS)
def test_every_property_passes_small(prop):
    report = check_property(prop, trials=40, params=GeneratorParams(seed=13))
    assert report.passed, report.render()
    assert len(report.failures) <= report.instances


def test_unknown_property():
    with pytest.raises(KeyError):
        check_property("fact-9.9")


def test_report_rendering_of_failures():
    report = CheckReport("demo", trials=1)
    m = builtin_model("fine")
    from cpcf.oracle import _Trial
    _Trial(report, m).expect(False, "w", parse_formula("p cf> h"), "CP", "demo failure")
    assert not report.passed
    text = report.render()
    assert "FAIL demo" in text and "worlds w u1 u2 v1 v2" in text
    assert "cpcf eval" in report.failures[0]["repro"]
    assert report.to_dict()["passed"] is False


def test_harness_detects_a_broken_property(monkeypatch):
    # a deliberately wrong minimal-world routine must be caught by min-oracle
    import cpcf.oracle as oracle

    def wrong_min(m, rel, worlds):
        return frozenset(worlds)

    monkeypatch.setattr(oracle, "min_worlds", wrong_min)
    report = check_property("min-oracle", trials=5, exhaustive=False)
    assert not report.passed


def test_modal_clause_probe_reports():
    result = probe_modal_clause(trials=30)
    assert set(result) == {"fact-1.2", "fact-1.3", "fact-1.4", "fact-2.2", "fact-2.3", "fact-2.4"}
    for prop, report in result.items():
        print(f"modal clause probe {prop}: {len(report.failures)} failures in {report.instances} checks")
        assert report.instances > 0


@pytest.mark.parametrize("prop", ["lemma-2", "lemma-3"])
def test_harness_rejects_naive_lowering(monkeypatch, prop):
    import cpcf.oracle as oracle
    from cpcf.translation import lower_cp_modality

    monkeypatch.setattr(oracle, "lower_cp_modality",
                        lambda a, g, b, x: lower_cp_modality(a, g, b, x, naive=True))
    assert not check_property(prop, trials=100).passed


def test_harness_rejects_naive_nc_elimination(monkeypatch):
    import cpcf.oracle as oracle
    from cpcf.translation import eliminate_nc_order

    monkeypatch.setattr(oracle, "eliminate_nc_order",
                        lambda a, g, b: eliminate_nc_order(a, g, b, naive=True))
    assert not check_property("lemma-6", trials=500).passed
