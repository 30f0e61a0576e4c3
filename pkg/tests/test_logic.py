import itertools
import random

import pytest

from forestalgebra.forests import ForestGraph, RankedAlphabet
from forestalgebra.logic import (
    Atom,
    Count,
    FormulaPositionError,
    FormulaSyntaxError,
    Not,
    Tp,
    capped_subtree_counts,
    chi,
    equiv,
    formula_to_text,
    modelcheck,
    modelcheck_tree,
    parse_formula,
    realizable_tree_types,
    tp,
    tree_equiv,
    type_context,
)
from forestalgebra.notation import parse_term
from forestalgebra.testkit import (
    EnumerationBudget,
    GameEquivOracle,
    enum_forests,
    expand_tree,
    game_equiv,
    random_forest,
    random_regular_forest,
    sample_equiv_pairs,
)

AB = RankedAlphabet.letters("a", "b")


def T(text):
    return parse_term(text, AB)


def loop_graph(label="a"):
    return ForestGraph.build(AB, {0: label}, {0: [(0, 0)]}, [0])


# -- formulas ---------------------------------------------------------------


def test_parse_simple():
    phi = parse_formula("E1(Pa)")
    assert isinstance(phi, Count) and phi.bound == 1
    assert isinstance(phi.arg, Atom) and phi.arg.name == "a"


def test_parse_nested():
    phi = parse_formula("E2(Pa & E1(Pb))")
    assert phi.k_index() == 2
    assert phi.depth() == 2


def test_parse_shorthand_e():
    assert parse_formula("E(Pa)") == parse_formula("E1(Pa)")


def test_atom_at_forest_position_rejected():
    with pytest.raises(FormulaPositionError):
        parse_formula("Pa")
    with pytest.raises(FormulaPositionError):
        parse_formula("E1(Pa) & Pb")


def test_parse_syntax_error_position():
    with pytest.raises(FormulaSyntaxError):
        parse_formula("E1(Pa")
    with pytest.raises(FormulaSyntaxError):
        parse_formula("E1(Pa) %")


def test_print_parse_roundtrip():
    texts = [
        "E1(Pa)",
        "E2(Pa & E1(Pb))",
        "!E1(Pa) | E3(Pb)",
        "E1(Pa | !Pb) & !E2(Pb)",
        "true",
        "E1(Pa & (E1(Pb) | E2(Pa)))",
    ]
    for text in texts:
        phi = parse_formula(text)
        again = parse_formula(formula_to_text(phi))
        assert formula_to_text(again) == formula_to_text(phi)


# -- model checking ---------------------------------------------------------


def test_single_node_semantics_differ():
    g = T("a")
    phi = parse_formula("E1(Pa)")
    assert modelcheck(g, phi, "inclusive") is True
    assert modelcheck(g, phi, "literal") is False


def test_two_count_needs_two():
    g = T("b(a)")
    phi = parse_formula("E2(Pa)")
    assert modelcheck(g, phi, "inclusive") is False
    assert modelcheck(g, phi, "literal") is False


def test_loop_counts_unboundedly():
    g = loop_graph("a")
    for k in range(1, 11):
        phi = parse_formula(f"E{k}(Pa)")
        assert modelcheck(g, phi, "inclusive") is True
        assert modelcheck(g, phi, "literal") is True


def test_nested_counting():
    g = T("b(a(b) + a)")
    # two a-vertices, one of which has a b below it
    assert modelcheck(g, parse_formula("E2(Pa)"))
    assert modelcheck(g, parse_formula("E1(Pa & E1(Pb))"))
    assert not modelcheck(g, parse_formula("E2(Pa & E1(Pb))"))


def test_literal_excludes_successor_roots():
    # literal reading: a tree formula counts below the successor forest's roots
    g = T("b(a)")
    phi_tree = parse_formula("E1(Pa)", position="tree")
    assert modelcheck_tree(g, phi_tree, "inclusive") is True
    assert modelcheck_tree(g, phi_tree, "literal") is False
    deeper = T("b(b(a))")
    assert modelcheck_tree(deeper, phi_tree, "literal") is True


def test_capped_counts_match_exact_on_finite():
    rng = random.Random(5)
    budget = EnumerationBudget(max_nodes=5)
    forests = list(enum_forests(AB, budget))
    forests += [random_forest(rng, AB, rng.randint(6, 12)) for _ in range(60)]
    for g in forests:
        tree = expand_tree(g)
        for cap in (1, 2, 3):
            targets = {v for v in g.labels if g.labels[v] == "a"}
            per = capped_subtree_counts(g, targets, cap)
            for r in g.roots:
                exact = sum(
                    1 for v in _subtree_nodes(tree, _match_root(tree, g, r)) if tree.labels[v] == "a"
                )
                assert per[r] == min(cap, exact)


def _match_root(tree, g, r):
    return tree.roots[list(g.roots).index(r)]


def _subtree_nodes(tree, root):
    out = [root]
    stack = [root]
    while stack:
        v = stack.pop()
        for _, t in tree.children[v]:
            out.append(t)
            stack.append(t)
    return out


# -- types ------------------------------------------------------------------


def test_tp_rank_zero_is_label():
    g = T("a(b)")
    assert tp(g, g.roots[0], 2, 0).label == "a"


def test_forest_type_single_a():
    tau = Tp(T("a"), 1, 1)
    assert len(tau.entries) == 1
    ((l, sub),) = tau.entries
    assert l == 1 and sub.label == "a"


def test_tp_of_chain():
    g = T("a(b)")
    tau = tp(g, g.roots[0], 2, 1)
    assert tau.label == "a"
    assert {(l, s.label) for l, s in tau.entries} == {(1, "b")}


def test_equiv_reflexive_and_counting():
    rng = random.Random(1)
    for _ in range(20):
        g = random_regular_forest(rng, AB, rng.randint(1, 5))
        assert equiv(g, g, 2, 2)
    assert equiv(T("a"), T("a + a"), 1, 1)
    assert not equiv(T("a"), T("a + a"), 2, 1)


def test_chain_vs_loop():
    chain = T("a(a(a))")
    assert equiv(chain, loop_graph ("a"), 1, 1)
    # deeper observation separates a finite chain from the loop
    assert not equiv(chain, loop_graph("a"), 1, 4)


def test_tree_equiv_via_wrappers():
    assert tree_equiv(T("a(b)"), T("a(b + b)"), 1, 1)
    assert not tree_equiv(T("a(b)"), T("a(b + b)"), 2, 1)


def test_monotonicity_sampled():
    rng = random.Random(9)
    pairs = []
    while len(pairs) < 60:
        g = random_regular_forest(rng, AB, rng.randint(1, 4))
        h = random_regular_forest(rng, AB, rng.randint(1, 4))
        pairs.append((g, h))
    for g, h in pairs:
        for k, m in ((1, 1), (1, 2), (2, 1)):
            if equiv(g, h, k, m + 1):
                assert equiv(g, h, k, m)
            if equiv(g, h, k + 1, m):
                assert equiv(g, h, k, m)


# -- game oracle -------------------------------------------------------------


def test_game_equiv_reflexive():
    rng = random.Random(3)
    for _ in range(10):
        g = random_forest(rng, AB, rng.randint(1, 5))
        assert game_equiv(g, g, 1, 1)
        assert game_equiv(g, g, 2, 2)


def test_game_equiv_label_split():
    assert not game_equiv(T("a(b)"), T("a(a)"), 1, 1)


def test_game_equiv_agrees_with_types_small():
    budget = EnumerationBudget(max_nodes=3)
    forests = list(enum_forests(AB, budget))
    oracle = {k: GameEquivOracle(k) for k in (1, 2)}
    for k in (1, 2):
        for m in (1, 2):
            for g, h in itertools.combinations(forests, 2):
                assert game_equiv(g, h, k, m, oracle=oracle[k]) == equiv(g, h, k, m), (
                    k,
                    m,
                    g.canonical_key(),
                    h.canonical_key(),
                )


def test_sample_equiv_pairs_all_equivalent():
    pairs = sample_equiv_pairs(AB, 2, 3, 25, seed=11)
    assert len(pairs) == 25
    for g, h in pairs:
        assert equiv(g, h, 2, 3)


# -- characteristic formulas --------------------------------------------------


def test_chi_rank_zero():
    ctx = type_context(1)
    tau = ctx.intern("tree", 0, "a", frozenset())
    assert chi(tau, 1, ["a", "b"]) == Atom("a")


def test_chi_self_description():
    for text in ("a", "a(b)", "a(b + a) + b", "b(b(a))"):
        g = T(text)
        for k, m in ((1, 1), (2, 2)):
            tau = Tp(g, k, m)
            phi = chi(tau, k, ["a", "b"])
            assert modelcheck(g, phi, "inclusive") is True


def test_chi_separates_inequivalent():
    forests = [T(t) for t in ("a", "b", "a(b)", "a + a", "a(a)", "b(a) + a")]
    for k, m in ((1, 1), (2, 2)):
        for g, h in itertools.combinations(forests, 2):
            if not equiv(g, h, k, m):
                assert modelcheck(g, chi(Tp(h, k, m), k, ["a", "b"])) is False
                assert modelcheck(h, chi(Tp(g, k, m), k, ["a", "b"])) is False


def test_realizable_rank1_is_full_grid():
    types = realizable_tree_types(["a", "b"], 2, 1)
    # label times capped count vector over two letters
    assert len(types) == 2 * 3 * 3


def test_modelcheck_depends_only_on_type():
    rng = random.Random(21)
    pairs = sample_equiv_pairs(AB, 2, 2, 30, seed=5)
    formulas = [random_formula(rng, 2, 2) for _ in range(100)]
    for phi in formulas:
        for g, h in pairs:
            assert modelcheck(g, phi) == modelcheck(h, phi), formula_to_text(phi)


def random_formula(rng, k, depth):
    def forest(d):
        parts = [Count(rng.randint(1, k), tree(d - 1)) for _ in range(rng.randint(1, 2))]
        out = parts[0] if len(parts) == 1 else __import__(
            "forestalgebra.logic", fromlist=["And"]
        ).And(tuple(parts))
        if rng.random() < 0.3:
            out = Not(out)
        return out

    def tree(d):
        atom = Atom(rng.choice(["a", "b"]))
        if d <= 0 or rng.random() < 0.4:
            return atom
        from forestalgebra.logic import And

        return And((atom, forest(d))) if rng.random() < 0.5 else forest(d)

    return forest(depth)
