import random

import pytest

from forestalgebra.algebra import (
    AlgebraError,
    AlgebraPresentation,
    DerivedTables,
    MultiAccept,
    NoAccept,
    algebra_from_json,
    algebra_to_json,
    graph_apply,
    graph_chain,
    graph_constant,
    graph_loop,
    graph_sing,
    graph_sum,
    graph_wide,
    leqL,
    member,
    plug,
    syntactic_sampler,
    validate_presentation,
)
from forestalgebra.automata import ParityForestAutomaton
from forestalgebra.forests import RankedAlphabet, empty_forest
from forestalgebra.nfa import nfa_all
from forestalgebra.notation import parse_term

AB = RankedAlphabet.letters("a", "b")


def test_evaluate_spec_shapes(contains_a):
    # the one-a-vertex rule on small defining forests
    assert contains_a.evaluate(graph_apply(contains_a, "o1", "z0"), 0) == "o0"
    assert contains_a.evaluate(graph_loop(contains_a, "z1"), 0) == "z0"
    assert contains_a.evaluate(empty_forest(contains_a.alphabet), 0) == "z0"


def test_unit_law_all_fixtures(all_algebras):
    for pres in all_algebras:
        for e, m in sorted(pres.element_arity.items()):
            assert pres.evaluate(graph_sing(pres, e), m) == e


def test_evaluate_arity_mismatch(contains_a):
    g = graph_constant(contains_a, "z0")
    with pytest.raises(AlgebraError):
        contains_a.evaluate(g, 1)


def test_evaluate_unlisted_arity(contains_a):
    g = graph_wide(contains_a, "o1", 2)
    with pytest.raises(AlgebraError):
        contains_a.evaluate(g, 2)


def universal_automaton(symbols):
    states = ["u"]
    delta = {}
    for sym, ar in symbols:
        delta[("u", sym)] = [{e: nfa_all(states) for e in range(ar)}]
    return ParityForestAutomaton(states, {"u": 0}, nfa_all(states), delta)


def test_multi_accept_reported(contains_a):
    data = algebra_to_json(contains_a)
    pres = algebra_from_json(data)
    symbols = [(e, m) for e, m in pres.element_arity.items()] + [(f"x{i}", 0) for i in range(4)]
    pres.automata["z0"] = universal_automaton(symbols)
    with pytest.raises(MultiAccept):
        pres.evaluate(graph_constant(pres, "o0"), 0)


def test_no_accept_reported(contains_a):
    data = algebra_to_json(contains_a)
    pres = algebra_from_json(data)
    # an automaton that rejects everything leaves a gap at z-valued forests
    empty = ParityForestAutomaton(["u"], {"u": 1}, nfa_all(["u"]), {}, symbols={
        s for (s, _) in pres.automata["z0"].delta
    } | {e for e in pres.element_arity} | {f"x{i}" for i in range(4)})
    pres.automata["z0"] = empty
    with pytest.raises(NoAccept):
        pres.evaluate(graph_constant(pres, "z0"), 0)


def test_missing_arity_hard_error(contains_a):
    data = algebra_to_json(contains_a)
    del data["arities"]["1"]
    for e in ("z1", "o1"):
        del data["automata"][e]
    data["generators"] = ["z0", "o0"]
    with pytest.raises(AlgebraError):
        algebra_from_json(data)


def test_tables_or_logic(contains_a):
    tbl = DerivedTables(contains_a)
    assert tbl.zero == "z0"
    or_ = {("z1", "z1"): "z1", ("z1", "o1"): "o1", ("o1", "z1"): "o1", ("o1", "o1"): "o1"}
    for (u, v), w in or_.items():
        assert tbl.vcomp(u, v) == w
    assert tbl.omega("o1") == "o0"
    assert tbl.omega("z1") == "z0"
    assert tbl.pi_exp("o1") == 1
    assert tbl.pi_exp("z1") == 1


def test_pi_exp_counts(two_a):
    tbl = DerivedTables(two_a)
    # d1 is not idempotent (1+1 = 2) but its square is
    assert tbl.pi_exp("d1") == 2
    assert tbl.pi_exp("d2") == 1
    assert tbl.pi_exp("d0") == 1


def test_sub_dup_identities(all_algebras):
    for pres in all_algebras:
        tbl = DerivedTables(pres)
        for u in pres.elements(1):
            assert tbl.dup(u, 1) == u
            assert tbl.sub(u, 1, tbl.zero) == u


def test_omega_laws(all_algebras):
    for pres in all_algebras:
        tbl = DerivedTables(pres)
        for u in pres.elements(1):
            w = tbl.omega(u)
            assert tbl.act(u, w) == w
            assert tbl.omega(tbl.vpow(u, tbl.pi_exp(u))) == w


def test_associativity_sampled(all_algebras):
    for pres in all_algebras:
        report = validate_presentation(pres, samples=120, seed=3)
        assert report.ok, report.lines()[:5]


def test_leql(contains_a):
    tbl = DerivedTables(contains_a)
    for x in contains_a.elements(0):
        assert leqL(tbl, x, x)
    assert leqL(tbl, "o0", "z0")
    assert not leqL(tbl, "z0", "o0")


def test_leql_antisymmetric_on_definable_fixtures(contains_a, two_a):
    # antisymmetry holds in algebras satisfying the counting equations
    for pres in (contains_a, two_a):
        tbl = DerivedTables(pres)
        a0 = pres.elements(0)
        for x in a0:
            for y in a0:
                if x != y and leqL(tbl, x, y) and leqL(tbl, y, x):
                    raise AssertionError(f"{pres.name}: {x} <= {y} <= {x}")


def test_syntactic_sampler_contains_a():
    def oracle(g):
        return any(lab == "a" for lab in g.labels.values())

    classes = syntactic_sampler(oracle, AB, 3, 3)
    keyed = {}
    for group in classes:
        has = oracle(group[0])
        assert all(oracle(g) == has for g in group)
        keyed.setdefault(has, []).append(group)
    # two classes: with an a and without
    assert len(classes) == 2


def test_syntactic_sampler_trivial_language():
    classes = syntactic_sampler(lambda g: True, AB, 3, 2)
    assert len(classes) == 1


def test_syntactic_sampler_two_a_separates_counts():
    def oracle(g):
        return sum(1 for lab in g.labels.values() if lab == "a") >= 2

    classes = syntactic_sampler(oracle, AB, 3, 3)
    assert len(classes) == 3
    sizes = {}
    for group in classes:
        count = min(2, sum(1 for lab in group[0].labels.values() if lab == "a"))
        assert all(min(2, sum(1 for l in g.labels.values() if l == "a")) == count for g in group)
        sizes[count] = len(group)
    assert set(sizes) == {0, 1, 2}


def test_plug_splices_at_every_hole():
    from forestalgebra.algebra import BOX

    ctx_alpha = RankedAlphabet(AB.symbols() + [(BOX, 0)])
    p = parse_term(f"a({BOX} + b) + {BOX}", ctx_alpha)
    s = parse_term("b(a)", AB)
    from forestalgebra.forests import ordered_equal

    assert ordered_equal(plug(p, s), parse_term("a(b(a) + b) + b(a)", AB))


def test_member_language(contains_a, two_a, inf_branch):
    single_a = parse_term("a", AB)
    ab = parse_term("b(a + b)", AB)
    two = parse_term("a(a)", AB)
    assert member(contains_a, single_a)
    assert member(contains_a, ab)
    assert not member(contains_a, parse_term("b(b)", AB))
    assert not member(two_a, single_a)
    assert member(two_a, two)
    assert not member(inf_branch, two)
    from forestalgebra.forests import ForestGraph

    loop = ForestGraph.build(AB, {0: "a"}, {0: [(0, 0)]}, [0])
    assert member(inf_branch, loop)
    assert member(contains_a, loop)
    assert member(two_a, loop)


def test_json_roundtrip_stable(contains_a):
    once = algebra_to_json(contains_a)
    twice = algebra_to_json(algebra_from_json(once))
    assert once == twice


def test_cache_hits(contains_a):
    g = graph_apply(contains_a, "o1", "z0")
    contains_a.evaluate(g, 0)
    key = (g.canonical_key(), 0)
    assert contains_a._cache[key] == "o0"
