import random

import pytest

from forestalgebra.automata import (
    ParityForestAutomaton,
    automaton_from_json,
    automaton_to_json,
    membership_game,
)
from forestalgebra.forests import ForestGraph, RankedAlphabet
from forestalgebra.nfa import NFA, compile_regex, nfa_all
from forestalgebra.notation import parse_term
from forestalgebra.parity import VERIFIER, solve
from forestalgebra.testkit import (
    EnumerationBudget,
    brute_accepts,
    enum_forests,
    random_automaton,
    random_forest,
)

ZO = RankedAlphabet.letters("z", "o")


def T(text, alphabet=ZO):
    return parse_term(text, alphabet)


def universal(alphabet) -> ParityForestAutomaton:
    states = ["u"]
    delta = {}
    for sym in alphabet:
        delta[("u", sym)] = [{e: nfa_all(states) for e in range(alphabet.arity(sym))}]
    return ParityForestAutomaton(states, {"u": 0}, nfa_all(states), delta)


def needs_one(alphabet) -> ParityForestAutomaton:
    """Accepting runs must witness a vertex labelled 'o' from the searching state."""
    states = ["s", "d"]
    prio = {"s": 1, "d": 0}
    delta = {}
    for sym in alphabet:
        if sym == "o":
            delta[("s", sym)] = [{0: compile_regex("d*", states)}]
        else:
            delta[("s", sym)] = [{0: compile_regex("d* s d*", states)}]
        delta[("d", sym)] = [{0: compile_regex("d*", states)}]
    root = compile_regex("d* s (s|d)*", states)
    return ParityForestAutomaton(states, prio, root, delta)


def test_universal_accepts_everything():
    aut = universal(ZO)
    for text in ("z", "o", "z(o + z)", "o(o(o))"):
        assert aut.accepts(T(text))
    loop = ForestGraph.build(ZO, {0: "z"}, {0: [(0, 0)]}, [0])
    assert aut.accepts(loop)


def test_reachability_automaton_on_finite_forests():
    aut = needs_one(ZO)
    assert not aut.accepts(T("z"))
    assert not aut.accepts(T("z(z + z)"))
    assert aut.accepts(T("o"))
    assert aut.accepts(T("z(z + o)"))
    assert aut.accepts(T("z(z(o))"))


def test_reachability_automaton_on_loop_with_side_child():
    # 0-labelled self-loop with an extra child labelled 1
    g = ForestGraph.build(ZO, {0: "z", 1: "o"}, {0: [(0, 0), (0, 1)]}, [0])
    aut = needs_one(ZO)
    assert aut.accepts(g)
    # bare self-loop: the searching state would have to persist forever
    bare = ForestGraph.build(ZO, {0: "z"}, {0: [(0, 0)]}, [0])
    assert not aut.accepts(bare)


def test_game_size_small_cases():
    aut = universal(ZO)
    g = T("z")
    game, init = membership_game(aut, g)
    assert len(game.positions) <= 3
    # construction bound: nodes x states x (1 + assignments) plus the gadget
    big = T("z(o + z)")
    game2, _ = membership_game(aut, big)
    assert len(game2.positions) <= 3 * 1 * (1 + 4) + 2


def test_game_winner_equals_acceptance():
    rng = random.Random(3)
    alphabet = ZO
    for _ in range(40):
        aut = random_automaton(rng, alphabet)
        g = random_forest(rng, alphabet, rng.randint(1, 5))
        game, init = membership_game(aut, g)
        assert (solve(game).winner[init] == VERIFIER) == aut.accepts(g)


def test_accepts_empty_forest_iff_root_accepts_empty_word():
    aut = universal(ZO)
    empty = ForestGraph.build(ZO, {}, {}, [])
    assert aut.accepts(empty)
    strict = ParityForestAutomaton(
        aut.states, aut.priority, compile_regex("u u*", aut.states), aut.delta
    )
    assert not strict.accepts(empty)
    assert strict.accepts(T("z"))


def test_alphabet_mismatch_raises():
    aut = needs_one(ZO)
    other = RankedAlphabet.letters("w")
    with pytest.raises(ValueError):
        aut.accepts(parse_term("w", other))


def test_brute_accepts_agrees_exhaustively():
    budget = EnumerationBudget(max_nodes=4)
    auts = [universal(ZO), needs_one(ZO)]
    for aut in auts:
        for g in enum_forests(ZO, budget):
            assert aut.accepts(g) == brute_accepts(aut, g)


def test_brute_accepts_agrees_on_random_pairs():
    rng = random.Random(17)
    for _ in range(300):
        aut = random_automaton(rng, ZO)
        g = random_forest(rng, ZO, rng.randint(1, 6))
        assert aut.accepts(g) == brute_accepts(aut, g), automaton_to_json(aut)


def test_automaton_json_roundtrip():
    aut = needs_one(ZO)
    data = automaton_to_json(aut)
    back = automaton_from_json(data)
    for text in ("z", "o", "z(z + o)", "z(z(z))"):
        assert back.accepts(T(text)) == aut.accepts(T(text))
