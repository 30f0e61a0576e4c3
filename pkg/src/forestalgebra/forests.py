"""Finite graphs denoting (possibly infinite) regular forests with variables.

A forest graph is a finite rooted multigraph.  Nodes carry a symbol from a
ranked alphabet or a variable ``x0, x1, ...``; edges carry a nonnegative
label that must be smaller than the arity of the source's symbol.  The
forest denoted by a graph is its unravelling from the ordered root list.
Two graphs count as the same forest when their unravellings coincide as
ordered forests, which is decided by an order-sensitive bisimulation.

All values are immutable after construction; every operation returns a
fresh graph.
"""

from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field

_VAR_RE = re.compile(r"^x(\d+)$")


def variable_index(label: str) -> int | None:
    """Return i when ``label`` is the variable ``xi``, else None."""
    m = _VAR_RE.match(label)
    return int(m.group(1)) if m else None


def variable(i: int) -> str:
    return f"x{i}"


class RankedAlphabet:
    """Finite set of symbols, each with a fixed arity.

    Plain (unranked) alphabets are embedded by giving every letter arity 1.
    Names of the shape ``x<digits>`` are reserved for variables.
    """

    def __init__(self, symbols):
        self._arity: dict[str, int] = {}
        for name, ar in symbols:
            if name in self._arity:
                raise ValueError(f"duplicate symbol {name!r}")
            if variable_index(name) is not None:
                raise ValueError(f"symbol name {name!r} is reserved for variables")
            if ar < 0:
                raise ValueError(f"negative arity for {name!r}")
            self._arity[name] = ar

    @classmethod
    def letters(cls, *names: str) -> "RankedAlphabet":
        """Unranked alphabet: every letter gets arity 1."""
        return cls([(n, 1) for n in names])

    def __contains__(self, name: str) -> bool:
        return name in self._arity

    def __iter__(self):
        return iter(self._arity)

    def arity(self, name: str) -> int:
        i = variable_index(name)
        if i is not None:
            return 0
        try:
            return self._arity[name]
        except KeyError:
            raise KeyError(f"unknown symbol {name!r}") from None

    def symbols(self) -> list[tuple[str, int]]:
        return list(self._arity.items())

    def __eq__(self, other):
        return isinstance(other, RankedAlphabet) and self._arity == other._arity

    def __repr__(self):
        inner = ", ".join(f"{n}/{a}" for n, a in self._arity.items())
        return f"RankedAlphabet({inner})"


@dataclass(frozen=True, eq=False)
class ForestGraph:
    """Finite graph whose unravelling is the denoted forest.

    ``labels`` maps node ids to symbol names or variables, ``children``
    maps node ids to ordered ``(edge_label, target)`` pairs, ``roots`` is
    the ordered root list (repetitions allowed).  The arity is the number
    of distinct variables reachable from the roots; validation checks that
    they are exactly ``x0 .. x(m-1)``.
    """

    alphabet: RankedAlphabet
    labels: dict[int, str]
    children: dict[int, tuple[tuple[int, int], ...]]
    roots: tuple[int, ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def build(cls, alphabet, labels, children, roots) -> "ForestGraph":
        labels = dict(labels)
        kids = {v: tuple((int(e), int(t)) for e, t in children.get(v, ())) for v in labels}
        for v in labels:
            kids.setdefault(v, ())
        return cls(alphabet, labels, kids, tuple(roots))

    # -- basic views ---------------------------------------------------

    def nodes(self) -> set[int]:
        return set(self.labels)

    def label(self, v: int) -> str:
        return self.labels[v]

    def label_arity(self, v: int) -> int:
        return self.alphabet.arity(self.labels[v])

    def kids(self, v: int) -> tuple[tuple[int, int], ...]:
        return self.children[v]

    def ordered_child_nodes(self, v: int) -> list[int]:
        """Children grouped by edge label ascending, sequence order kept."""
        return [t for e, t in sorted(self.children[v], key=lambda p: p[0])]

    def kids_for_edge(self, v: int, e: int) -> list[int]:
        return [t for el, t in self.children[v] if el == e]

    def reachable(self, starts=None) -> set[int]:
        if starts is None:
            starts = self.roots
        seen: set[int] = set()
        stack = [v for v in starts]
        while stack:
            v = stack.pop()
            if v in seen:
                continue
            seen.add(v)
            for _, t in self.children[v]:
                if t not in seen:
                    stack.append(t)
        return seen

    def variables(self) -> set[int]:
        """Indices of variables reachable from the roots."""
        out = set()
        for v in self.reachable():
            i = variable_index(self.labels[v])
            if i is not None:
                out.add(i)
        return out

    @property
    def arity(self) -> int:
        if "arity" not in self._cache:
            vs = self.variables()
            self._cache["arity"] = (max(vs) + 1) if vs else 0
        return self._cache["arity"]

    def is_closed(self) -> bool:
        return self.arity == 0

    # -- cycle structure ----------------------------------------------

    def sccs(self) -> list[list[int]]:
        """Strongly connected components, iterative Tarjan.

        Components come out children-first: a component is emitted only
        after every component reachable from it.  Cached per graph.
        """
        if "sccs" in self._cache:
            return self._cache["sccs"]
        index: dict[int, int] = {}
        low: dict[int, int] = {}
        on: set[int] = set()
        stack: list[int] = []
        comps: list[list[int]] = []
        counter = itertools.count()
        for start in self.labels:
            if start in index:
                continue
            work = [(start, iter(self.children[start]))]
            index[start] = low[start] = next(counter)
            stack.append(start)
            on.add(start)
            while work:
                v, it = work[-1]
                advanced = False
                for _, w in it:
                    if w not in index:
                        index[w] = low[w] = next(counter)
                        stack.append(w)
                        on.add(w)
                        work.append((w, iter(self.children[w])))
                        advanced = True
                        break
                    elif w in on:
                        low[v] = min(low[v], index[w])
                if advanced:
                    continue
                work.pop()
                if work:
                    pv = work[-1][0]
                    low[pv] = min(low[pv], low[v])
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on.discard(w)
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(comp)
        self._cache["sccs"] = comps
        return comps

    def cycle_nodes(self) -> set[int]:
        """Nodes lying on some directed cycle."""
        if "cycle_nodes" not in self._cache:
            out: set[int] = set()
            for comp in self.sccs():
                if len(comp) > 1:
                    out.update(comp)
                else:
                    v = comp[0]
                    if any(t == v for _, t in self.children[v]):
                        out.add(v)
            self._cache["cycle_nodes"] = out
        return self._cache["cycle_nodes"]

    def is_acyclic(self) -> bool:
        return not self.cycle_nodes()

    # -- canonical form -------------------------------------------------

    def canonical_key(self):
        """Hashable form, stable under renaming of node ids.

        Nodes are renumbered in BFS order from the roots (children by edge
        label ascending, then sequence order).  Unreachable nodes are
        dropped; they do not contribute to the denoted forest.
        """
        if "ckey" not in self._cache:
            order: dict[int, int] = {}
            queue = list(self.roots)
            while queue:
                v = queue.pop(0)
                if v in order:
                    continue
                order[v] = len(order)
                for _, t in sorted(self.children[v], key=lambda p: p[0]):
                    if t not in order:
                        queue.append(t)
            nodes = tuple(
                (
                    self.labels[v],
                    tuple((e, order[t]) for e, t in sorted(self.children[v], key=lambda p: p[0])),
                )
                for v in sorted(order, key=order.get)
            )
            self._cache["ckey"] = (tuple(order[r] for r in self.roots), nodes)
        return self._cache["ckey"]

    def canonical(self) -> "ForestGraph":
        """Fresh graph with nodes renumbered as in :meth:`canonical_key`."""
        rootmap, nodes = self.canonical_key()
        labels = {i: lab for i, (lab, _) in enumerate(nodes)}
        children = {i: kids for i, (_, kids) in enumerate(nodes)}
        return ForestGraph(self.alphabet, labels, children, tuple(rootmap))

    def __repr__(self):
        return f"ForestGraph(roots={list(self.roots)}, nodes={len(self.labels)})"


# ---------------------------------------------------------------------------
# validation


def validate(g: ForestGraph) -> list[str]:
    """Check the forest-graph invariants; return a list of violations.

    An empty list means the graph is a valid member of the forest functor:
    edge labels respect arities, variables are childless non-roots, the
    reachable variables are exactly x0..x(m-1), and no variable is
    reachable from a node on a directed cycle.
    """
    problems: list[str] = []
    for v, lab in g.labels.items():
        i = variable_index(lab)
        if i is None and lab not in g.alphabet:
            problems.append(f"node {v}: unknown symbol {lab!r}")
            continue
        ar = g.alphabet.arity(lab)
        if i is not None and g.children[v]:
            problems.append(f"node {v}: variable {lab} has outgoing edges")
        for e, t in g.children[v]:
            if e >= ar:
                problems.append(f"node {v}: edge label {e} exceeds arity of {lab!r}")
            if t not in g.labels:
                problems.append(f"node {v}: edge to unknown node {t}")
    for r in g.roots:
        if r not in g.labels:
            problems.append(f"root {r} is not a node")
        elif variable_index(g.labels[r]) is not None:
            problems.append(f"root {r} is a variable")

    reach = g.reachable()
    seen_vars = {variable_index(g.labels[v]) for v in reach}
    seen_vars.discard(None)
    if seen_vars:
        m = max(seen_vars) + 1
        for i in range(m):
            if i not in seen_vars:
                problems.append(f"variable x{i} missing while x{m - 1} occurs")

    # a variable reachable from a cycle occurs infinitely often in the
    # unravelling, which the functor forbids
    from_cycle = set(c for c in g.cycle_nodes() if c in reach)
    frontier = list(from_cycle)
    while frontier:
        v = frontier.pop()
        for _, t in g.children[v]:
            if t not in from_cycle:
                from_cycle.add(t)
                frontier.append(t)
    for v in sorted(from_cycle):
        if variable_index(g.labels[v]) is not None:
            problems.append(f"node {v}: variable reachable from cycle")
    return problems


def check_valid(g: ForestGraph) -> ForestGraph:
    problems = validate(g)
    if problems:
        raise ValueError("invalid forest graph: " + "; ".join(problems))
    return g


# ---------------------------------------------------------------------------
# constructors


class _Builder:
    """Mutable helper used internally to assemble graphs."""

    def __init__(self, alphabet):
        self.alphabet = alphabet
        self.labels: dict[int, str] = {}
        self.children: dict[int, list[tuple[int, int]]] = {}
        self.roots: list[int] = []
        self._next = 0

    def add(self, label: str) -> int:
        v = self._next
        self._next += 1
        self.labels[v] = label
        self.children[v] = []
        return v

    def copy_in(self, g: ForestGraph) -> dict[int, int]:
        """Copy all nodes of g with fresh ids; returns the id map."""
        m = {v: self.add(g.labels[v]) for v in g.labels}
        for v in g.labels:
            self.children[m[v]] = [(e, m[t]) for e, t in g.children[v]]
        return m

    def graph(self) -> ForestGraph:
        return ForestGraph.build(self.alphabet, self.labels, self.children, self.roots)


def empty_forest(alphabet) -> ForestGraph:
    return ForestGraph.build(alphabet, {}, {}, ())


def sing(alphabet, a: str) -> ForestGraph:
    """The one-node forest a(x0, ..., x(m-1)) for a symbol of arity m."""
    if a not in alphabet:
        raise KeyError(f"unknown symbol {a!r}")
    b = _Builder(alphabet)
    root = b.add(a)
    b.roots.append(root)
    for i in range(alphabet.arity(a)):
        leaf = b.add(variable(i))
        b.children[root].append((i, leaf))
    return b.graph()


def hsum(s: ForestGraph, t: ForestGraph) -> ForestGraph:
    """Disjoint union; roots of t appended after roots of s.

    Variables of the same index are merged by name, which keeps the
    combined graph inside the functor as long as the indices stay
    contiguous.
    """
    if s.alphabet != t.alphabet:
        raise ValueError("alphabet mismatch in hsum")
    b = _Builder(s.alphabet)
    ms = b.copy_in(s)
    mt = b.copy_in(t)
    b.roots = [ms[r] for r in s.roots] + [mt[r] for r in t.roots]
    return b.graph()


def forest_sum(alphabet, parts) -> ForestGraph:
    out = empty_forest(alphabet)
    for p in parts:
        out = hsum(out, p)
    return out


def _renumber_variables(b: _Builder) -> None:
    """Compact the variable indices reachable in the builder to 0..m-1."""
    g = b.graph()
    present = sorted(g.variables())
    re_map = {old: new for new, old in enumerate(present)}
    for v, lab in list(b.labels.items()):
        i = variable_index(lab)
        if i is not None and i in re_map and re_map[i] != i:
            b.labels[v] = variable(re_map[i])


def substitute(s: ForestGraph, i: int, t: ForestGraph) -> ForestGraph:
    """Replace every xi-leaf of s by the whole forest t.

    Incoming edges of an xi node are redirected to all roots of t, one
    copy per root in root order, keeping the edge label.  Remaining
    variable indices are compacted; variables of t merge with the
    survivors of s by name.
    """
    if i >= s.arity:
        raise ValueError(f"variable index {i} out of range for arity {s.arity}")
    if s.alphabet != t.alphabet:
        raise ValueError("alphabet mismatch in substitute")
    b = _Builder(s.alphabet)
    ms = b.copy_in(s)
    mt = b.copy_in(t)
    troots = [mt[r] for r in t.roots]
    var_nodes = {ms[v] for v, lab in s.labels.items() if lab == variable(i)}
    for v in list(b.children):
        new_kids: list[tuple[int, int]] = []
        for e, tgt in b.children[v]:
            if tgt in var_nodes:
                new_kids.extend((e, r) for r in troots)
            else:
                new_kids.append((e, tgt))
        b.children[v] = new_kids
    for v in var_nodes:
        del b.labels[v]
        del b.children[v]
    b.roots = [ms[r] for r in s.roots]
    _renumber_variables(b)
    return b.graph()


def subtree(g: ForestGraph, v: int) -> ForestGraph:
    """The tree hanging at v, as a forest graph rooted there."""
    if v not in g.labels:
        raise KeyError(f"unknown node {v}")
    return ForestGraph.build(g.alphabet, g.labels, g.children, (v,))


def successor_forest(g: ForestGraph, v: int) -> ForestGraph:
    """The forest of v's children, grouped by edge label ascending."""
    if v not in g.labels:
        raise KeyError(f"unknown node {v}")
    roots = [t for e, t in sorted(g.children[v], key=lambda p: p[0])]
    return ForestGraph.build(g.alphabet, g.labels, g.children, tuple(roots))


def flatten(outer: ForestGraph, inner: dict[int, ForestGraph], return_origin: bool = False):
    """Simultaneous substitution collapsing a forest of forests.

    ``outer`` must be acyclic.  ``inner[v]`` is the forest labelling node
    v; its arity must cover the edge labels leaving v.  Every xk leaf of
    ``inner[v]`` is replaced by the union of the forests attached to the
    k-successors of v, in child order.  Outer nodes missing from ``inner``
    must be variable leaves of the outer forest; they survive unchanged.

    With ``return_origin`` the result comes with a map from surviving
    result nodes to ``(outer node, inner node)`` pairs.
    """
    if not outer.is_acyclic():
        raise ValueError("flatten requires an acyclic outer forest")
    alphabet = None
    for v in outer.labels:
        if v not in inner:
            if variable_index(outer.labels[v]) is None:
                raise ValueError(f"outer node {v} has no inner forest")
            continue
        alphabet = inner[v].alphabet
        if not inner[v].is_acyclic():
            raise ValueError("flatten requires acyclic inner forests")
        top = max((e for e, _ in outer.children[v]), default=-1)
        if top >= 0 and inner[v].arity <= top:
            raise ValueError(
                f"outer node {v}: inner arity {inner[v].arity} does not cover edge label {top}"
            )
    if alphabet is None:
        alphabet = outer.alphabet

    b = _Builder(alphabet)
    maps: dict[int, dict[int, int]] = {}
    var_copies: dict[int, int] = {}
    for v in outer.labels:
        if v in inner:
            maps[v] = b.copy_in(inner[v])
        else:
            var_copies[v] = b.add(outer.labels[v])

    def attach_roots(v: int) -> list[int]:
        if v in var_copies:
            return [var_copies[v]]
        return [maps[v][r] for r in inner[v].roots]

    # redirect each variable leaf of a copied inner forest to the roots of
    # the successors' attachments, then drop the leaf
    for v in outer.labels:
        if v not in inner:
            continue
        m = maps[v]
        for k in range(inner[v].arity):
            targets: list[int] = []
            for kv in outer.kids_for_edge(v, k):
                targets.extend(attach_roots(kv))
            var_nodes = {m[w] for w, lab in inner[v].labels.items() if lab == variable(k)}
            if not var_nodes:
                continue
            for w in list(b.children):
                if all(tgt not in var_nodes for _, tgt in b.children[w]):
                    continue
                kids: list[tuple[int, int]] = []
                for e, tgt in b.children[w]:
                    if tgt in var_nodes:
                        kids.extend((e, r) for r in targets)
                    else:
                        kids.append((e, tgt))
                b.children[w] = kids
            for w in var_nodes:
                del b.labels[w]
                del b.children[w]
    roots: list[int] = []
    for r in outer.roots:
        roots.extend(attach_roots(r))
    b.roots = roots
    result = b.graph()
    if not return_origin:
        return result
    origin = {}
    for v, m in maps.items():
        for w, n in m.items():
            if n in result.labels:
                origin[n] = (v, w)
    return result, origin


def map_sing(g: ForestGraph) -> tuple[ForestGraph, dict[int, ForestGraph]]:
    """Nested forest whose inner labels are singletons; flatten gives g back."""
    inner = {
        v: sing(g.alphabet, g.labels[v])
        for v in g.labels
        if variable_index(g.labels[v]) is None
    }
    return g, inner


# ---------------------------------------------------------------------------
# unravelling and equality


def unravel(g: ForestGraph, depth: int) -> ForestGraph:
    """Finite tree expansion of the graph, cut below the given depth."""
    b = _Builder(g.alphabet)

    def expand(v: int, d: int) -> int:
        node = b.add(g.labels[v])
        if d < depth:
            for e, t in sorted(g.children[v], key=lambda p: p[0]):
                b.children[node].append((e, expand(t, d + 1)))
        return node

    b.roots = [expand(r, 0) for r in g.roots]
    return b.graph()


def _refine(nodes, label_of, signature_of) -> dict:
    """Partition refinement to the coarsest fixpoint; returns block ids."""
    block = {}
    fresh: dict = {}
    for n in nodes:
        block[n] = fresh.setdefault(label_of(n), len(fresh))
    size = len(fresh)
    while True:
        fresh = {}
        nxt = {}
        for n in nodes:
            key = (block[n], signature_of(n, block))
            nxt[n] = fresh.setdefault(key, len(fresh))
        if len(fresh) == size:
            return nxt
        block, size = nxt, len(fresh)


def ordered_equal(s: ForestGraph, t: ForestGraph) -> bool:
    """Equality of denoted forests: order-sensitive bisimulation.

    Nodes fall in the same class when their labels agree and, for every
    edge label, the ordered child lists have equal length and pointwise
    equal classes.  The forests are equal when the root lists match
    pointwise.
    """
    if s.alphabet != t.alphabet or len(s.roots) != len(t.roots):
        return False
    nodes = [(0, v) for v in s.labels] + [(1, v) for v in t.labels]
    graphs = (s, t)

    def label_of(n):
        tag, v = n
        return graphs[tag].labels[v]

    def signature_of(n, block):
        tag, v = n
        g = graphs[tag]
        return tuple(
            (e, block[(tag, tgt)]) for e, tgt in sorted(g.children[v], key=lambda p: p[0])
        )

    block = _refine(nodes, label_of, signature_of)
    return all(block[(0, a)] == block[(1, b)] for a, b in zip(s.roots, t.roots))


def bisimilar(s: ForestGraph, t: ForestGraph) -> bool:
    """Unordered bisimilarity of the denoted forests.

    Partition refinement on the disjoint union: nodes are equivalent when
    labels agree and the sets of successor classes per edge label agree.
    Forests are bisimilar when every component of one is bisimilar to some
    component of the other, i.e. the root class sets coincide.
    """
    if s.arity or t.arity:
        raise ValueError("bisimilar is defined for closed forests only")
    if s.alphabet != t.alphabet:
        return False
    nodes = [(0, v) for v in s.labels] + [(1, v) for v in t.labels]
    graphs = (s, t)

    def label_of(n):
        tag, v = n
        return graphs[tag].labels[v]

    def signature_of(n, block):
        tag, v = n
        g = graphs[tag]
        succ: dict[int, set[int]] = {}
        for e, tgt in g.children[v]:
            succ.setdefault(e, set()).add(block[(tag, tgt)])
        return tuple(sorted((e, tuple(sorted(cs))) for e, cs in succ.items()))

    block = _refine(nodes, label_of, signature_of)
    return {block[(0, r)] for r in s.roots} == {block[(1, r)] for r in t.roots}
