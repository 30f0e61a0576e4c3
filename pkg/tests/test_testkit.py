import random

import pytest

from forestalgebra.forests import RankedAlphabet, validate
from forestalgebra.logic import equiv
from forestalgebra.notation import format_term
from forestalgebra.testkit import (
    EnumerationBudget,
    brute_accepts,
    count_forests,
    enum_forests,
    expand_tree,
    peel_once,
    random_regular_forest,
    repeat_forest,
    sample_equiv_pairs,
    shuffle_orders,
)

A1 = RankedAlphabet.letters("a")
AB = RankedAlphabet.letters("a", "b")


def test_enum_small_catalog():
    got = {format_term(g) for g in enum_forests(A1, EnumerationBudget(max_nodes=2))}
    assert got == {"0", "a", "a + a", "a(a)"}


def test_enum_counts_match_recurrence():
    for alphabet in (A1, AB, RankedAlphabet([("f", 2), ("c", 0)])):
        budget = EnumerationBudget(max_nodes=4)
        sizes = {}
        for g in enum_forests(alphabet, budget):
            sizes[len(g.labels)] = sizes.get(len(g.labels), 0) + 1
        for n in range(5):
            assert sizes.get(n, 0) == count_forests(alphabet, n), (alphabet, n)


def test_enum_valid_and_duplicate_free():
    seen = set()
    for g in enum_forests(AB, EnumerationBudget(max_nodes=4)):
        assert validate(g) == []
        key = g.canonical_key()
        assert key not in seen
        seen.add(key)


def test_budget_rejects_nonpositive():
    with pytest.raises(ValueError):
        EnumerationBudget(max_nodes=0)


def test_expand_tree_duplicates_shared_nodes():
    from forestalgebra.forests import ForestGraph

    g = ForestGraph.build(AB, {0: "a", 1: "b"}, {0: [(0, 1), (0, 1)]}, [0])
    t = expand_tree(g)
    assert len(t.labels) == 3


def test_brute_accepts_trivial_automata():
    from forestalgebra.automata import ParityForestAutomaton
    from forestalgebra.nfa import nfa_all
    from forestalgebra.notation import parse_term

    states = ["u"]
    universal = ParityForestAutomaton(
        states,
        {"u": 0},
        nfa_all(states),
        {("u", sym): [{0: nfa_all(states)}] for sym in AB},
    )
    refuser = ParityForestAutomaton(
        states, {"u": 0}, nfa_all(states), {}, symbols=set(AB)
    )
    for text in ("a", "b(a + b)"):
        g = parse_term(text, AB)
        assert brute_accepts(universal, g)
        assert not brute_accepts(refuser, g)


def test_saturated_duplication_pairs():
    rng = random.Random(4)
    for k in (1, 2):
        for _ in range(15):
            s = random_regular_forest(rng, AB, rng.randint(1, 4))
            g = repeat_forest(s, k + 1)
            h = repeat_forest(s, k + 2)
            for m in (1, 2, 3):
                assert equiv(g, h, k, m)


def test_peel_and_reorder_preserve_types():
    rng = random.Random(8)
    for _ in range(15):
        s = random_regular_forest(rng, AB, rng.randint(1, 5))
        assert equiv(s, peel_once(s), 2, 3)
        assert equiv(s, shuffle_orders(rng, s), 2, 3)


def test_sample_equiv_pairs_seeded_deterministic():
    a = sample_equiv_pairs(AB, 1, 2, 10, seed=3)
    b = sample_equiv_pairs(AB, 1, 2, 10, seed=3)
    assert [(g.canonical_key(), h.canonical_key()) for g, h in a] == [
        (g.canonical_key(), h.canonical_key()) for g, h in b
    ]
