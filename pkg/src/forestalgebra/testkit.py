"""Generators and brute-force oracles backing the test suites.

Everything here is written for transparency rather than speed and shares
no logic with the modules it cross-checks.  All sampling is seeded.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from random import Random

from .forests import (
    ForestGraph,
    RankedAlphabet,
    _Builder,
    variable,
    variable_index,
)


@dataclass(frozen=True)
class EnumerationBudget:
    """Bounds for exhaustive suites; the seed pins the sampled ones."""

    max_nodes: int = 5
    max_alphabet: int = 2
    max_depth: int = 6
    max_unravel_depth: int = 5
    samples: int = 100
    seed: int = 0

    def __post_init__(self):
        for name in ("max_nodes", "max_alphabet", "max_depth", "max_unravel_depth", "samples"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


# ---------------------------------------------------------------------------
# random forests


def random_forest(rng: Random, alphabet: RankedAlphabet, size: int, arity: int = 0) -> ForestGraph:
    """Random finite forest with the given node count and variable arity.

    Variables x0..x(arity-1) are attached as extra leaves below random
    nodes, each at least once.
    """
    b = _Builder(alphabet)
    symbols = sorted(alphabet, key=alphabet.arity)
    hosts = [s for s in symbols if alphabet.arity(s) > 0]
    if arity > 0 and not hosts:
        raise ValueError("alphabet has no positive-arity symbol to host variables")
    nodes: list[int] = []
    for k in range(max(size, 1)):
        sym = rng.choice(hosts) if (arity > 0 and k == 0) else rng.choice(symbols)
        v = b.add(sym)
        if nodes and rng.random() < 0.7:
            parent = rng.choice([n for n in nodes if alphabet.arity(b.labels[n]) > 0] or [None])
            if parent is not None:
                e = rng.randrange(alphabet.arity(b.labels[parent]))
                b.children[parent].append((e, v))
            else:
                b.roots.append(v)
        else:
            b.roots.append(v)
        nodes.append(v)
    if not b.roots:
        b.roots.append(nodes[0])
    carriers = [n for n in nodes if alphabet.arity(b.labels[n]) > 0]
    for i in range(arity):
        leaf = b.add(variable(i))
        host = rng.choice(carriers)
        e = rng.randrange(alphabet.arity(b.labels[host]))
        b.children[host].append((e, leaf))
    return b.graph()


def random_regular_forest(
    rng: Random, alphabet: RankedAlphabet, size: int, loop_chance: float = 0.3
) -> ForestGraph:
    """Random closed forest graph that may contain cycles."""
    g = random_forest(rng, alphabet, size)
    b = _Builder(alphabet)
    m = b.copy_in(g)
    b.roots = [m[r] for r in g.roots]
    nodes = list(b.labels)
    for v in nodes:
        ar = alphabet.arity(b.labels[v])
        if ar > 0 and rng.random() < loop_chance:
            b.children[v].append((rng.randrange(ar), rng.choice(nodes)))
    return b.graph()


def random_nested(rng: Random, alphabet: RankedAlphabet, outer_max: int, inner_max: int):
    """Random two-layer nesting: a skeleton plus one inner forest per node.

    Returns ``(outer, inner)`` ready for :func:`forestalgebra.forests.flatten`.
    Inner forests carry exactly the variables needed for the skeleton's
    outgoing edge labels.
    """
    n = rng.randint(1, outer_max)
    labels = {}
    children: dict[int, list] = {}
    for v in range(n):
        labels[v] = "n"
        children[v] = []
    for v in range(1, n):
        children[rng.randrange(v)].append((0, v))
    roots = [v for v in range(n) if all(v != t for kids in children.values() for _, t in kids)]
    outer = ForestGraph.build(RankedAlphabet([("n", 1)]), labels, children, roots)
    inner = {}
    for v in outer.labels:
        slots = max((e for e, _ in outer.children[v]), default=-1) + 1
        inner[v] = random_forest(rng, alphabet, rng.randint(1, inner_max), arity=slots)
    return outer, inner


# ---------------------------------------------------------------------------
# exhaustive enumeration


def enum_forests(alphabet: RankedAlphabet, budget: EnumerationBudget):
    """All finite forests with at most ``budget.max_nodes`` nodes.

    Exhaustive and duplicate-free: each ordered forest shape appears once,
    including the empty forest.
    """
    yield from _forests_upto(alphabet, budget.max_nodes)


def _trees_exact(alphabet, size, memo):
    key = ("t", size)
    if key in memo:
        return memo[key]
    out = []
    if size >= 1:
        for sym in alphabet:
            ar = alphabet.arity(sym)
            if ar == 0:
                if size == 1:
                    out.append(("tree", sym, ()))
                continue
            # distribute size-1 nodes over the ar argument forests
            for split in _compositions(size - 1, ar):
                for parts in itertools.product(
                    *(_forests_exact(alphabet, s, memo) for s in split)
                ):
                    out.append(("tree", sym, tuple(parts)))
    memo[key] = out
    return out


def _forests_exact(alphabet, size, memo):
    key = ("f", size)
    if key in memo:
        return memo[key]
    if size == 0:
        memo[key] = [()]
        return memo[key]
    out = []
    for first in range(1, size + 1):
        for tree in _trees_exact(alphabet, first, memo):
            for rest in _forests_exact(alphabet, size - first, memo):
                out.append((tree,) + rest)
    memo[key] = out
    return out


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for head in range(total + 1):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail


def _shape_to_graph(alphabet, shape) -> ForestGraph:
    b = _Builder(alphabet)

    def build_tree(t) -> int:
        _, sym, arg_forests = t
        v = b.add(sym)
        for e, forest in enumerate(arg_forests):
            for tree in forest:
                b.children[v].append((e, build_tree(tree)))
        return v

    b.roots = [build_tree(t) for t in shape]
    return b.graph()


def _forests_upto(alphabet, max_nodes):
    memo: dict = {}
    for size in range(max_nodes + 1):
        for shape in _forests_exact(alphabet, size, memo):
            yield _shape_to_graph(alphabet, shape)


# ---------------------------------------------------------------------------
# counting-bisimulation game oracle (tuple matching, finite forests only)


class GameEquivOracle:
    """Direct tuple-matching recursion for the counting equivalences.

    Works on finite forests only; subtree pairs are memoized by canonical
    shape so the oracle stays usable on exhaustive small-forest suites.
    Shares no code with the type-based implementation.
    """

    def __init__(self, k: int):
        self.k = k
        # memo keyed by structural shape ids, safe to share between calls
        self._memo: dict = {}
        self._shape_ids: dict = {}

    def _shapes(self, g: ForestGraph) -> dict:
        """Structural id of the subtree at every node (g must be a tree)."""
        out: dict = {}

        def walk(u) -> int:
            if u in out:
                return out[u]
            kids = tuple(
                (e, walk(t)) for e, t in sorted(g.children[u], key=lambda p: p[0])
            )
            sid = self._shape_ids.setdefault((g.labels[u], kids), len(self._shape_ids))
            out[u] = sid
            return sid

        for r in g.roots:
            walk(r)
        return out

    def _descendants(self, g: ForestGraph, u) -> list:
        out = []
        stack = [t for _, t in g.children[u]]
        while stack:
            v = stack.pop()
            out.append(v)
            stack.extend(t for _, t in g.children[v])
        return out

    def trees_equal(self, gs: ForestGraph, u, gt: ForestGraph, v, m: int) -> bool:
        return self._trees(gs, self._shapes(gs), u, gt, self._shapes(gt), v, m)

    def _trees(self, gs, sh_s, u, gt, sh_t, v, m: int) -> bool:
        if gs.labels[u] != gt.labels[v]:
            return False
        if m == 0:
            return True
        key = (sh_s[u], sh_t[v], m)
        if key in self._memo:
            return self._memo[key]
        du = self._descendants(gs, u)
        dv = self._descendants(gt, v)
        ok = self._tuples_match(gs, sh_s, du, gt, sh_t, dv, m - 1) and self._tuples_match(
            gt, sh_t, dv, gs, sh_s, du, m - 1
        )
        self._memo[key] = ok
        return ok

    def forests_equal(self, gs: ForestGraph, gt: ForestGraph, m: int) -> bool:
        if m == 0:
            return True
        sh_s, sh_t = self._shapes(gs), self._shapes(gt)
        du = [v for r in gs.roots for v in [r] + self._descendants(gs, r)]
        dv = [v for r in gt.roots for v in [r] + self._descendants(gt, r)]
        return self._tuples_match(gs, sh_s, du, gt, sh_t, dv, m - 1) and self._tuples_match(
            gt, sh_t, dv, gs, sh_s, du, m - 1
        )

    def _tuples_match(self, ga, sh_a, da, gb, sh_b, db, m) -> bool:
        for xs in itertools.product(da, repeat=self.k):
            if not self._exists_matching(ga, sh_a, xs, gb, sh_b, db, m):
                return False
        return True

    def _exists_matching(self, ga, sh_a, xs, gb, sh_b, db, m) -> bool:
        for ys in itertools.product(db, repeat=self.k):
            if all(
                (xs[i] == xs[j]) == (ys[i] == ys[j])
                for i in range(self.k)
                for j in range(i + 1, self.k)
            ) and all(
                self._trees(ga, sh_a, xs[i], gb, sh_b, ys[i], m) for i in range(self.k)
            ):
                return True
        return False


def game_equiv(gs: ForestGraph, gt: ForestGraph, k: int, m: int, oracle=None) -> bool:
    """Counting equivalence of finite forests via explicit tuple matching."""
    if not gs.is_acyclic() or not gt.is_acyclic():
        raise ValueError("game_equiv requires acyclic forests")
    ts, tt = expand_tree(gs), expand_tree(gt)
    oracle = oracle or GameEquivOracle(k)
    return oracle.forests_equal(ts, tt, m)


def game_tree_equiv(gs: ForestGraph, gt: ForestGraph, k: int, m: int, oracle=None) -> bool:
    if not gs.is_acyclic() or not gt.is_acyclic():
        raise ValueError("game_tree_equiv requires acyclic forests")
    ts, tt = expand_tree(gs), expand_tree(gt)
    if len(ts.roots) != 1 or len(tt.roots) != 1:
        raise ValueError("game_tree_equiv requires single-rooted forests")
    oracle = oracle or GameEquivOracle(k)
    return oracle.trees_equal(ts, ts.roots[0], tt, tt.roots[0], m)


# ---------------------------------------------------------------------------
# equivalent-pair sampling


def sample_equiv_pairs(alphabet: RankedAlphabet, k: int, m: int, count: int, seed: int = 0):
    """Seeded pairs of regular forests with equal forest types.

    Candidate pairs come from type-preserving mutations (reordering, loop
    peeling, saturating duplication); every emitted pair is filtered
    through the type equivalence.
    """
    from .logic import equiv

    rng = Random(seed)
    out = []
    attempts = 0
    while len(out) < count and attempts < 80 * count:
        attempts += 1
        g = random_regular_forest(rng, alphabet, rng.randint(1, 5))
        kind = rng.randrange(3)
        if kind == 0:
            h = shuffle_orders(rng, g)
        elif kind == 1:
            h = peel_once(g)
        else:
            g2 = repeat_forest(g, k + 1)
            h = repeat_forest(g, k + 2)
            g = g2
        if equiv(g, h, k, m):
            out.append((g, h))
    if len(out) < count:
        raise RuntimeError("pair sampling did not converge")
    return out


def shuffle_orders(rng: Random, g: ForestGraph) -> ForestGraph:
    b = _Builder(g.alphabet)
    m = b.copy_in(g)
    for v in g.labels:
        kids = [(e, m[t]) for e, t in g.children[v]]
        rng.shuffle(kids)
        b.children[m[v]] = kids
    roots = [m[r] for r in g.roots]
    rng.shuffle(roots)
    b.roots = roots
    return b.graph()


def peel_once(g: ForestGraph) -> ForestGraph:
    """Prepend fresh copies of the roots; the unravelling is unchanged."""
    b = _Builder(g.alphabet)
    m = b.copy_in(g)
    roots = []
    for r in g.roots:
        fresh = b.add(g.labels[r])
        b.children[fresh] = [(e, m[t]) for e, t in g.children[r]]
        roots.append(fresh)
    b.roots = roots
    return b.graph()


def repeat_forest(g: ForestGraph, times: int) -> ForestGraph:
    b = _Builder(g.alphabet)
    roots = []
    for _ in range(times):
        m = b.copy_in(g)
        roots.extend(m[r] for r in g.roots)
    b.roots = roots
    return b.graph()


# ---------------------------------------------------------------------------
# run enumeration oracle for forest automata


def expand_tree(g: ForestGraph) -> ForestGraph:
    """Duplicate shared subgraphs of an acyclic graph into a proper forest."""
    if not g.is_acyclic():
        raise ValueError("expand_tree requires an acyclic graph")
    b = _Builder(g.alphabet)

    def copy(v: int) -> int:
        n = b.add(g.labels[v])
        for e, t in g.children[v]:
            b.children[n].append((e, copy(t)))
        return n

    b.roots = [copy(r) for r in g.roots]
    return b.graph()


def brute_accepts(aut, g: ForestGraph) -> bool:
    """Acceptance on a finite forest by enumerating runs bottom-up.

    For each vertex, collect the states from which the subtree admits an
    accepting run by explicitly trying every item and every choice of
    child states; then enumerate root words the same way.  Independent of
    the game construction; priorities never matter on finite runs.
    """
    if not g.is_acyclic():
        raise ValueError("brute_accepts requires an acyclic forest")
    t = expand_tree(g)
    acc: dict[int, set] = {}

    def label_arity(v):
        lab = t.labels[v]
        if variable_index(lab) is not None:
            return 0
        return t.alphabet.arity(lab)

    def node_states(v: int) -> set:
        if v in acc:
            return acc[v]
        result = set()
        for q in aut.states:
            for item in aut.items(q, t.labels[v]):
                if _item_matches(aut, t, v, item, label_arity(v), node_states):
                    result.add(q)
                    break
        acc[v] = result
        return result

    order = list(t.labels)
    for v in order:
        node_states(v)
    root_sets = [node_states(r) for r in t.roots]
    for word in itertools.product(*root_sets):
        if aut.root.accepts(word):
            return True
    return not t.roots and aut.root.accepts_empty()


def _item_matches(aut, t, v, item, arity, node_states) -> bool:
    for e in range(arity):
        kids = t.kids_for_edge(v, e)
        kid_sets = [node_states(k) for k in kids]
        if any(not s for s in kid_sets):
            return False
        nfa = item.get(e)
        if nfa is None:
            continue
        for word in itertools.product(*kid_sets):
            if nfa.accepts(word):
                break
        else:
            return False
    return True


def random_nfa(rng: Random, letters) -> "object":
    """Small random NFA over the given letters."""
    from .nfa import NFA

    n = rng.randint(1, 3)
    states = [f"n{i}" for i in range(n)]
    nfa = NFA(states, {states[0]}, {rng.choice(states)})
    if rng.random() < 0.3:
        nfa.final.add(states[0])
    for _ in range(rng.randint(1, 2 * n + 1)):
        nfa.add_edge(rng.choice(states), rng.choice(list(letters)), rng.choice(states))
    return nfa


def random_automaton(rng: Random, alphabet: RankedAlphabet):
    """Random parity forest automaton over the full alphabet."""
    from .automata import ParityForestAutomaton

    n = rng.randint(1, 3)
    states = [f"q{i}" for i in range(n)]
    priority = {q: rng.randint(0, 3) for q in states}
    root = random_nfa(rng, states)
    delta = {}
    for q in states:
        for sym in alphabet:
            ar = alphabet.arity(sym)
            items = []
            for _ in range(rng.randint(0, 2)):
                items.append({e: random_nfa(rng, states) for e in range(ar)})
            if items:
                delta[(q, sym)] = items
        # variables appear as arity-0 leaves
        for i in range(2):
            if rng.random() < 0.7:
                delta.setdefault((q, f"x{i}"), []).append({})
    known = set(alphabet) | {"x0", "x1"}
    return ParityForestAutomaton(states, priority, root, delta, symbols=known)


# ---------------------------------------------------------------------------
# marked-forest enumeration oracle

MARK = "markedc"


def brute_marked(pres, c: str, cap: int, size_bound: int):
    """Enumerate generator forests with marked c-leaves and evaluate them.

    Forests range over the arity-0 and arity-1 elements plus a marked copy
    of c; each one contributes (value, capped mark count, root flag).  The
    value is composed bottom-up through the derived tables, whose own
    agreement with the automaton evaluator is checked elsewhere.
    """
    from .algebra import DerivedTables

    tables = DerivedTables(pres)
    symbols = [(e, 0) for e in pres.elements(0)] + [(e, 1) for e in pres.elements(1)]
    symbols.append((MARK, 0))
    alphabet = RankedAlphabet(symbols)
    out = set()
    memo: dict = {}

    def tree_value(shape):
        if shape in memo:
            return memo[shape]
        _, sym, args = shape
        if sym == MARK:
            memo[shape] = (c, 1)
            return memo[shape]
        if not args:
            memo[shape] = (sym, 0)
            return memo[shape]
        value, marks = forest_value(args[0])
        memo[shape] = (tables.act(sym, value), marks)
        return memo[shape]

    def forest_value(shapes):
        value, marks = tables.zero, 0
        for t in shapes:
            tv, tm = tree_value(t)
            value = tables.hsum0(value, tv)
            marks = min(cap, marks + tm)
        return value, marks

    memo2: dict = {}
    for size in range(size_bound + 1):
        for shape in _forests_exact(alphabet, size, memo2):
            value, marks = forest_value(shape)
            rooted = any(t[1] == MARK for t in shape)
            out.add((value, marks, rooted))
    return out


# ---------------------------------------------------------------------------
# parity game oracle


def brute_force_regions(game) -> dict:
    """Winner of every position by enumerating positional strategies.

    For each strategy of one player, the opponent's best response is read
    off the fixed graph: with the player's moves frozen, the opponent wins
    from p exactly when a cycle of the losing parity (or a terminal
    declared for the opponent) is reachable.  A player wins p when some
    strategy of theirs defeats every response; the two computations must
    tile the position set, which the caller checks.
    """
    from .parity import REFUTER, VERIFIER

    winner = {}
    for p in game.positions:
        if _exists_winning_strategy(game, p, VERIFIER):
            winner[p] = VERIFIER
        else:
            winner[p] = REFUTER
    # determinacy cross-check: the refuter must win the rest outright
    for p, w in winner.items():
        if w == REFUTER:
            assert _exists_winning_strategy(game, p, REFUTER), "oracle determinacy failure"
    return winner


def _exists_winning_strategy(game, start, player) -> bool:
    mine = [p for p in game.positions if game.owner(p) == player and game.succ[p]]
    option_lists = [game.succ[p] for p in mine]
    for choice in itertools.product(*option_lists):
        frozen = dict(zip(mine, choice))
        if _best_response_loses(game, start, player, frozen):
            return True
    return False


def _best_response_loses(game, start, player, frozen) -> bool:
    """True when the opponent has no winning play against the frozen moves."""
    from .parity import VERIFIER

    # graph with the player's choices frozen; opponent keeps all options
    def moves(p):
        if p in frozen:
            return [frozen[p]]
        return game.succ[p]

    reach = {start}
    stack = [start]
    while stack:
        p = stack.pop()
        for q in moves(p):
            if q not in reach:
                reach.add(q)
                stack.append(q)

    bad_parity = 1 if player == VERIFIER else 0
    # a reachable terminal declared for the opponent defeats the strategy
    for p in reach:
        if not moves(p):
            declared = game.terminal_winner[p]
            if declared != player:
                return False
    # a reachable cycle whose maximum priority has the losing parity
    # defeats the strategy; it suffices to look for a priority-d node that
    # can return to itself through priorities <= d
    for p in reach:
        d = game.priority(p)
        if d % 2 != bad_parity:
            continue
        if _cycles_back(game, p, d, moves):
            return False
    return True


def _cycles_back(game, origin, cap, moves) -> bool:
    seen = set()
    stack = [q for q in moves(origin) if game.priority(q) <= cap]
    while stack:
        p = stack.pop()
        if p == origin:
            return True
        if p in seen or game.priority(p) > cap:
            continue
        seen.add(p)
        stack.extend(moves(p))
    return False


def random_game(rng: Random, max_positions: int = 8, max_priority: int = 4):
    """Seeded random parity game with a few terminals."""
    from .parity import ParityGame, REFUTER, VERIFIER

    n = rng.randint(1, max_positions)
    game = ParityGame()
    for i in range(n):
        game.add(i, rng.choice((VERIFIER, REFUTER)), rng.randint(0, max_priority))
    for i in range(n):
        if n > 1 and rng.random() < 0.12:
            game.set_terminal(i, rng.choice((VERIFIER, REFUTER)))
            continue
        for _ in range(rng.randint(1, 3)):
            game.add_edge(i, rng.randrange(n))
    # positions that ended up with no outgoing edges become terminals
    for i in range(n):
        if not game.succ[i] and i not in game.terminal_winner:
            game.set_terminal(i, rng.choice((VERIFIER, REFUTER)))
    return game


def count_forests(alphabet: RankedAlphabet, size: int) -> int:
    """Closed-form style counting recurrence, independent of the enumerator."""
    arities = [alphabet.arity(s) for s in alphabet]

    f_memo = {0: 1}
    t_memo: dict[int, int] = {}

    def trees(n: int) -> int:
        if n in t_memo:
            return t_memo[n]
        total = 0
        for ar in arities:
            if ar == 0:
                total += 1 if n == 1 else 0
            else:
                for split in _compositions(n - 1, ar):
                    prod = 1
                    for s in split:
                        prod *= forests(s)
                    total += prod
        t_memo[n] = total
        return total

    def forests(n: int) -> int:
        if n in f_memo:
            return f_memo[n]
        total = 0
        for first in range(1, n + 1):
            total += trees(first) * forests(n - first)
        f_memo[n] = total
        return total

    return forests(size)
