import random

import pytest

from forestalgebra.forests import (
    ForestGraph,
    RankedAlphabet,
    bisimilar,
    empty_forest,
    flatten,
    forest_sum,
    hsum,
    map_sing,
    ordered_equal,
    sing,
    substitute,
    subtree,
    successor_forest,
    unravel,
    validate,
)
from forestalgebra.notation import format_term, parse_term

AB = RankedAlphabet.letters("a", "b")
RANKED = RankedAlphabet([("a", 1), ("b", 1), ("c", 0), ("f", 2), ("g", 3)])


def T(text, alphabet=AB):
    return parse_term(text, alphabet)


def test_validate_accepts_simple_forest():
    g = T("a(b + a) + b")
    assert validate(g) == []
    assert g.arity == 0


def test_validate_rejects_variable_root():
    g = ForestGraph.build(AB, {0: "x0"}, {}, [0])
    problems = validate(g)
    assert any("root" in p and "variable" in p for p in problems)


def test_validate_rejects_edge_label_exceeding_arity():
    g = ForestGraph.build(AB, {0: "a", 1: "b"}, {0: [(3, 1)]}, [0])
    problems = validate(g)
    assert any("exceeds arity" in p for p in problems)


def test_validate_rejects_variable_reachable_from_cycle():
    # a-node with a self-loop whose body also reaches an x0 leaf
    g = ForestGraph.build(AB, {0: "a", 1: "x0"}, {0: [(0, 0), (0, 1)]}, [0])
    problems = validate(g)
    assert any("variable reachable from cycle" in p for p in problems)
    # the unravelling oracle view: every cut of the unravelling that is deep
    # enough keeps picking up fresh x0 occurrences
    shallow = unravel(g, 3)
    deep = unravel(g, 6)
    count = lambda h: sum(1 for v in h.labels.values() if v == "x0")
    assert count(deep) > count(shallow) > 0


def test_validate_rejects_variable_gap():
    g = ForestGraph.build(AB, {0: "a", 1: "x1"}, {0: [(0, 1)]}, [0])
    assert any("missing" in p for p in validate(g))


def test_validate_rejects_variable_with_children():
    g = ForestGraph.build(AB, {0: "a", 1: "x0", 2: "b"}, {0: [(0, 1)], 1: [(0, 2)]}, [0])
    assert any("outgoing edges" in p for p in validate(g))


def test_hsum_unit_and_pair():
    s = T("a(b)")
    assert ordered_equal(hsum(empty_forest(AB), s), s)
    two = hsum(T("a"), T("b"))
    assert ordered_equal(two, T("a + b"))
    assert not ordered_equal(two, T("b + a"))


def test_hsum_duplicate_is_bisimilar_to_single():
    s = T("a")
    assert bisimilar(hsum(s, s), s)


def test_sing_shapes():
    assert ordered_equal(sing(RANKED, "c"), parse_term("c", RANKED))
    assert ordered_equal(sing(RANKED, "a"), parse_term("a(x0)", RANKED))
    f = sing(RANKED, "f")
    assert ordered_equal(f, parse_term("f(x0, x1)", RANKED))
    assert validate(f) == []


def test_substitute_simple():
    s = T("a(x0)")
    assert ordered_equal(substitute(s, 0, T("b")), T("a(b)"))
    assert ordered_equal(substitute(s, 0, T("b + a")), T("a(b + a)"))


def test_substitute_duplicates_occurrences():
    s = T("a(x0 + x0)")
    assert ordered_equal(substitute(s, 0, T("b")), T("a(b + b)"))


def test_substitute_into_sing_is_attachment():
    for sym in ("a", "b"):
        s = sing(AB, sym)
        t = T("a(b) + b")
        assert ordered_equal(substitute(s, 0, t), T(f"{sym}(a(b) + b)"))


def test_substitute_out_of_range():
    with pytest.raises(ValueError):
        substitute(T("a"), 0, T("b"))


def test_subtree_and_successor_forest():
    g = T("a(b + a(b))")
    root = g.roots[0]
    assert ordered_equal(subtree(g, root), g)
    succ = successor_forest(g, root)
    assert ordered_equal(succ, T("b + a(b)"))


def test_subtree_on_cycle_is_valid():
    g = ForestGraph.build(AB, {0: "a", 1: "b"}, {0: [(0, 1)], 1: [(0, 0)]}, [0])
    sub = subtree(g, 1)
    assert validate(sub) == []
    cut = unravel(sub, 5)
    assert cut.labels[cut.roots[0]] == "b"


def test_flatten_of_singletons_is_identity():
    for text in ("a(b + a) + b", "a(a(a))", "b"):
        g = T(text)
        outer, inner = map_sing(g)
        assert ordered_equal(flatten(outer, inner), g)


def test_flatten_single_substitution():
    # one outer node labelled by a(x0), one 0-successor labelled by b
    outer = ForestGraph.build(AB, {0: "n", 1: "m"}, {0: [(0, 1)]}, [0])
    # outer labels are read from the inner map, so any names work there
    inner = {0: T("a(x0)"), 1: T("b")}
    assert ordered_equal(flatten(outer, inner), T("a(b)"))


def test_flatten_two_bracketings_agree():
    from forestalgebra.testkit import random_forest, random_nested

    rng = random.Random(5)
    for _ in range(40):
        top, mids = random_nested(rng, RankedAlphabet([("m", 2)]), 3, 3)
        bottoms = {
            v: {
                w: random_forest(
                    rng,
                    AB,
                    rng.randint(1, 3),
                    arity=max((e for e, _ in mids[v].children[w]), default=-1) + 1,
                )
                for w in mids[v].labels
                if mids[v].labels[w] == "m"
            }
            for v in top.labels
        }
        # inside-out: collapse each middle layer first
        mid_flat = {v: flatten(mids[v], bottoms[v]) for v in top.labels}
        inside_first = flatten(top, mid_flat)
        # outside-in: collapse the two outer layers, then attach the bottom
        # forests via the origin map
        merged, origin = flatten(top, mids, return_origin=True)
        inner2 = {n: bottoms[v][w] for n, (v, w) in origin.items() if w in bottoms[v]}
        outer_first = flatten(merged, inner2)
        assert ordered_equal(inside_first, outer_first)


def test_bisimilar_basics():
    assert bisimilar(T("a"), T("a + a"))
    assert not bisimilar(T("a"), T("b"))
    loop = ForestGraph.build(AB, {0: "a"}, {0: [(0, 0)]}, [0])
    chain = T("a(a)")
    assert not bisimilar(loop, chain)
    assert bisimilar(loop, loop)


def test_bisimilar_requires_closed():
    with pytest.raises(ValueError):
        bisimilar(T("a(x0)"), T("a(x0)"))


def test_bisimilar_equivalence_on_sample():
    rng = random.Random(11)
    from forestalgebra.testkit import random_forest

    pool = [random_forest(rng, AB, rng.randint(1, 5)) for _ in range(12)]
    for g in pool:
        assert bisimilar(g, g)
    for g in pool:
        for h in pool:
            assert bisimilar(g, h) == bisimilar(h, g)
    for g in pool:
        for h in pool:
            for k in pool:
                if bisimilar(g, h) and bisimilar(h, k):
                    assert bisimilar(g, k)


def test_operations_preserve_validity():
    rng = random.Random(7)
    from forestalgebra.testkit import random_forest

    for _ in range(30):
        s = random_forest(rng, AB, rng.randint(1, 4))
        t = random_forest(rng, AB, rng.randint(1, 4))
        assert validate(hsum(s, t)) == []
    for sym in AB:
        base = sing(AB, sym)
        assert validate(base) == []
        assert validate(substitute(base, 0, T("a(b)"))) == []


def test_term_roundtrip():
    for text in ("a(b + a) + b", "b", "a(a(a))", "a(b) + a(b)"):
        g = T(text)
        assert format_term(g) == text.replace("  ", " ")


def test_term_ranked_arities():
    g = parse_term("g(b + c, 0, b) + b", RankedAlphabet([("g", 3), ("b", 0), ("c", 0)]))
    assert validate(g) == []
    root = g.roots[0]
    assert [t for e, t in g.children[root] if e == 0] != []
    assert g.kids_for_edge(root, 1) == []
    assert len(g.kids_for_edge(root, 2)) == 1


def test_canonical_key_ignores_node_ids():
    g1 = T("a(b + a)")
    g2 = ForestGraph.build(AB, {7: "a", 3: "b", 9: "a"}, {7: [(0, 3), (0, 9)]}, [7])
    assert g1.canonical_key() == g2.canonical_key()
