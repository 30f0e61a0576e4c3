"""Counting reachability logic over forests, and the matching type system.

Formulas alternate strictly between forest level (boolean combinations of
counting operators ``El``) and tree level (boolean combinations of label
atoms and forest formulas, evaluated on the successor forest).  Counting
is capped: on a graph, a satisfying node reachable from a cycle inside
the relevant subgraph stands for unboundedly many vertices of the
unravelling.

Two counting semantics exist.  ``inclusive`` counts every vertex of the
forest a counting operator is evaluated on; ``literal`` excludes that
forest's roots.  The type machinery (`tp`, `Tp`) matches the inclusive
reading; both are kept because they genuinely differ on shallow forests.
"""

from __future__ import annotations

import re
import threading
from dataclasses import dataclass

from .forests import ForestGraph, variable_index

INCLUSIVE = "inclusive"
LITERAL = "literal"


# ---------------------------------------------------------------------------
# formulas


class Formula:
    def k_index(self) -> int:
        raise NotImplementedError

    def depth(self) -> int:
        raise NotImplementedError

    def __repr__(self):
        return formula_to_text(self)

    def __eq__(self, other):
        return isinstance(other, Formula) and formula_to_text(self) == formula_to_text(other)

    def __hash__(self):
        return hash(formula_to_text(self))


@dataclass(frozen=True, repr=False, eq=False)
class Atom(Formula):
    name: str

    def k_index(self):
        return 0

    def depth(self):
        return 0


@dataclass(frozen=True, repr=False, eq=False)
class Count(Formula):
    bound: int
    arg: Formula

    def __post_init__(self):
        if self.bound < 1:
            raise ValueError("counting bound must be at least 1")

    def k_index(self):
        return max(self.bound, self.arg.k_index())

    def depth(self):
        return 1 + self.arg.depth()


@dataclass(frozen=True, repr=False, eq=False)
class Not(Formula):
    arg: Formula

    def k_index(self):
        return self.arg.k_index()

    def depth(self):
        return self.arg.depth()


@dataclass(frozen=True, repr=False, eq=False)
class And(Formula):
    args: tuple

    def k_index(self):
        return max((a.k_index() for a in self.args), default=0)

    def depth(self):
        return max((a.depth() for a in self.args), default=0)


@dataclass(frozen=True, repr=False, eq=False)
class Or(Formula):
    args: tuple

    def k_index(self):
        return max((a.k_index() for a in self.args), default=0)

    def depth(self):
        return max((a.depth() for a in self.args), default=0)


@dataclass(frozen=True, repr=False, eq=False)
class Bool(Formula):
    value: bool

    def k_index(self):
        return 0

    def depth(self):
        return 0


class FormulaSyntaxError(ValueError):
    def __init__(self, message, pos):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class FormulaPositionError(ValueError):
    pass


_F_TOKEN = re.compile(r"\s*(E\d*|P[A-Za-z_][A-Za-z0-9_]*|true|false|[()&|!])")


def parse_formula(text: str, position: str = "forest") -> Formula:
    """Parse the ASCII grammar; ``E(...)`` abbreviates ``E1(...)``.

    ``position`` is ``forest`` or ``tree``; a label atom in forest
    position is rejected, everything else is position-generic.
    """
    tokens = []
    i = 0
    while i < len(text):
        m = _F_TOKEN.match(text, i)
        if not m:
            if text[i:].strip():
                raise FormulaSyntaxError(f"unexpected character {text[i]!r}", i)
            break
        tokens.append((m.group(1), m.start(1)))
        i = m.end()
    tokens.append((None, len(text)))
    pos = 0

    def peek():
        return tokens[pos][0]

    def take(expected=None):
        nonlocal pos
        tok, at = tokens[pos]
        if expected is not None and tok != expected:
            raise FormulaSyntaxError(f"expected {expected!r}, found {tok!r}", at)
        pos += 1
        return tok, at

    def parse_or():
        parts = [parse_and()]
        while peek() == "|":
            take("|")
            parts.append(parse_and())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def parse_and():
        parts = [parse_not()]
        while peek() == "&":
            take("&")
            parts.append(parse_not())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def parse_not():
        if peek() == "!":
            take("!")
            return Not(parse_not())
        return parse_atom()

    def parse_atom():
        tok, at = take()
        if tok == "(":
            inner = parse_or()
            take(")")
            return inner
        if tok == "true":
            return Bool(True)
        if tok == "false":
            return Bool(False)
        if tok is not None and tok.startswith("P"):
            return Atom(tok[1:])
        if tok is not None and tok.startswith("E"):
            bound = int(tok[1:]) if len(tok) > 1 else 1
            take("(")
            inner = parse_or()
            take(")")
            return Count(bound, inner)
        raise FormulaSyntaxError(f"unexpected token {tok!r}", at)

    out = parse_or()
    tok, at = tokens[pos]
    if tok is not None:
        raise FormulaSyntaxError(f"trailing input {tok!r}", at)
    check_position(out, position)
    return out


def check_position(phi: Formula, position: str) -> None:
    """Enforce the strict forest/tree alternation."""
    if isinstance(phi, Atom):
        if position != "tree":
            raise FormulaPositionError(
                f"tree formula where forest formula expected: P{phi.name}"
            )
    elif isinstance(phi, Count):
        check_position(phi.arg, "tree")
    elif isinstance(phi, Not):
        check_position(phi.arg, position)
    elif isinstance(phi, (And, Or)):
        for a in phi.args:
            check_position(a, position)
    elif isinstance(phi, Bool):
        pass
    else:
        raise TypeError(phi)


def formula_to_text(phi: Formula) -> str:
    def render(p, prec):
        if isinstance(p, Atom):
            return f"P{p.name}"
        if isinstance(p, Bool):
            return "true" if p.value else "false"
        if isinstance(p, Count):
            return f"E{p.bound}({render(p.arg, 0)})"
        if isinstance(p, Not):
            return f"!{render(p.arg, 3)}"
        if isinstance(p, And):
            if not p.args:
                return "true"
            body = " & ".join(render(a, 2) for a in p.args)
            return f"({body})" if prec > 2 else body
        if isinstance(p, Or):
            if not p.args:
                return "false"
            body = " | ".join(render(a, 1) for a in p.args)
            return f"({body})" if prec > 1 else body
        raise TypeError(p)

    return render(phi, 0)


# ---------------------------------------------------------------------------
# capped occurrence counting on graphs


def capped_subtree_counts(g: ForestGraph, targets: set, cap: int) -> dict:
    """For every node u: occurrences of target nodes in the unravelled
    subtree at u (u included), saturated at cap; a target reachable from a
    cycle below counts as cap."""
    counts: dict[int, int] = {}
    for comp in g.sccs():
        nontrivial = len(comp) > 1 or any(
            t == comp[0] for _, t in g.children[comp[0]]
        )
        if nontrivial:
            # a cycle pumps every target it can reach unboundedly often
            members = set(comp)
            hit = any(u in targets for u in comp)
            below = 0
            for u in comp:
                for _, t in g.children[u]:
                    if t not in members:
                        below = min(cap, below + counts[t])
            value = cap if (hit or below > 0) else 0
            for u in comp:
                counts[u] = value
        else:
            u = comp[0]
            total = 1 if u in targets else 0
            for _, t in g.children[u]:
                total = min(cap, total + counts[t])
            counts[u] = total
    return counts


def count_from(g: ForestGraph, starts, subtree_counts, cap: int) -> int:
    total = 0
    for s in starts:
        total = min(cap, total + subtree_counts[s])
    return total


# ---------------------------------------------------------------------------
# model checking


def modelcheck(g: ForestGraph, phi: Formula, semantics: str = INCLUSIVE) -> bool:
    """Forest-formula satisfaction on the unravelling of g."""
    if g.arity != 0:
        raise ValueError("model checking requires a closed forest")
    check_position(phi, "forest")
    if semantics not in (INCLUSIVE, LITERAL):
        raise ValueError(f"unknown semantics {semantics!r}")
    ev = _Evaluator(g, semantics)
    return ev.forest_value(phi, tuple(g.roots), roots_excluded=(semantics == LITERAL))


def modelcheck_tree(g: ForestGraph, phi: Formula, semantics: str = INCLUSIVE) -> bool:
    """Tree-formula satisfaction at the unique root of g."""
    if len(g.roots) != 1:
        raise ValueError("modelcheck_tree requires a single-rooted forest")
    check_position(phi, "tree")
    ev = _Evaluator(g, semantics)
    return ev.tree_value(phi, g.roots[0])


class _Evaluator:
    def __init__(self, g: ForestGraph, semantics: str):
        self.g = g
        self.semantics = semantics
        self._tree_memo: dict = {}
        self._count_memo: dict = {}

    def tree_value(self, phi: Formula, v) -> bool:
        key = (id(phi), v)
        if key in self._tree_memo:
            return self._tree_memo[key]
        if isinstance(phi, Atom):
            out = self.g.labels[v] == phi.name
        elif isinstance(phi, Bool):
            out = phi.value
        elif isinstance(phi, Not):
            out = not self.tree_value(phi.arg, v)
        elif isinstance(phi, And):
            out = all(self.tree_value(a, v) for a in phi.args)
        elif isinstance(phi, Or):
            out = any(self.tree_value(a, v) for a in phi.args)
        elif isinstance(phi, Count):
            succ = tuple(self.g.ordered_child_nodes(v))
            # the successor forest of v: under the literal reading its own
            # roots (the children of v) are excluded from the count
            out = self.forest_value(phi, succ, roots_excluded=(self.semantics == LITERAL))
        else:
            raise TypeError(phi)
        self._tree_memo[key] = out
        return out

    def forest_value(self, phi: Formula, roots, roots_excluded: bool) -> bool:
        if isinstance(phi, Bool):
            return phi.value
        if isinstance(phi, Not):
            return not self.forest_value(phi.arg, roots, roots_excluded)
        if isinstance(phi, And):
            return all(self.forest_value(a, roots, roots_excluded) for a in phi.args)
        if isinstance(phi, Or):
            return any(self.forest_value(a, roots, roots_excluded) for a in phi.args)
        if isinstance(phi, Count):
            return self._count(phi, roots, roots_excluded) >= phi.bound
        raise TypeError(phi)

    def _count(self, phi: Count, roots, roots_excluded: bool) -> int:
        cap = phi.bound
        key = (id(phi), roots, roots_excluded)
        if key in self._count_memo:
            return self._count_memo[key]
        sat = {v for v in self.g.labels if self.tree_value(phi.arg, v)}
        per_subtree = capped_subtree_counts(self.g, sat, cap)
        if roots_excluded:
            total = 0
            for r in roots:
                strict = 0
                for _, t in self.g.children[r]:
                    strict = min(cap, strict + per_subtree[t])
                total = min(cap, total + strict)
        else:
            total = count_from(self.g, roots, per_subtree, cap)
        self._count_memo[key] = total
        return total


# ---------------------------------------------------------------------------
# types


class TypeValue:
    """Interned type: a label plus capped counts of subtree types.

    ``entries`` is downward closed: it holds (l, subtype) for every l from
    1 up to the capped count.  Tree types carry a label; forest types do
    not.  Instances are unique per context, so equality is identity.
    """

    __slots__ = ("kind", "rank", "label", "entries", "iid")

    def __init__(self, kind, rank, label, entries, iid):
        self.kind = kind
        self.rank = rank
        self.label = label
        self.entries = entries
        self.iid = iid

    def counts(self) -> dict:
        out: dict = {}
        for l, sub in self.entries:
            out[sub] = max(out.get(sub, 0), l)
        return out

    def __repr__(self):
        if self.rank == 0 and self.kind == "tree":
            return f"<{self.label}>"
        inner = ", ".join(
            f"{l}x{sub!r}" for l, sub in sorted(self.entries, key=lambda p: (p[0], p[1].iid))
        )
        head = self.label if self.kind == "tree" else "forest"
        return f"<{head}; {inner}>"


class TypeContext:
    """Interning pool for one counting bound k."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError("counting bound must be at least 1")
        self.k = k
        self._pool: dict = {}
        self._lock = threading.Lock()
        self._proj: dict = {}

    def intern(self, kind, rank, label, entries) -> TypeValue:
        key = (kind, rank, label, entries)
        with self._lock:
            hit = self._pool.get(key)
            if hit is None:
                hit = TypeValue(kind, rank, label, frozenset(entries), len(self._pool))
                self._pool[key] = hit
            return hit

    def entries_from_counts(self, counts: dict) -> frozenset:
        out = []
        for sub, c in counts.items():
            for l in range(1, min(c, self.k) + 1):
                out.append((l, sub))
        return frozenset(out)

    # -- type computation on graphs -----------------------------------

    def tree_types(self, g: ForestGraph, m: int) -> dict:
        """tp of every node of g at rank m; levels are cached on the graph."""
        key = ("tp", self.k, m)
        if key in g._cache:
            return g._cache[key]
        if m == 0:
            level = {v: self.intern("tree", 0, g.labels[v], frozenset()) for v in g.labels}
        else:
            below = self.tree_types(g, m - 1)
            classes: dict = {}
            for v, t in below.items():
                classes.setdefault(t, set()).add(v)
            strict: dict = {v: {} for v in g.labels}
            for sigma, nodes in classes.items():
                per_subtree = capped_subtree_counts(g, nodes, self.k)
                for v in g.labels:
                    c = 0
                    for _, t in g.children[v]:
                        c = min(self.k, c + per_subtree[t])
                    if c:
                        strict[v][sigma] = c
            level = {
                v: self.intern("tree", m, g.labels[v], self.entries_from_counts(strict[v]))
                for v in g.labels
            }
        g._cache[key] = level
        return level

    def tp(self, g: ForestGraph, v, m: int) -> TypeValue:
        return self.tree_types(g, m)[v]

    def Tp(self, g: ForestGraph, m: int) -> TypeValue:
        """Forest type: capped counts over all vertices, roots included."""
        key = ("Tp", self.k, m)
        if key in g._cache:
            return g._cache[key]
        if m == 0:
            # rank 0 makes no observation on forests: a single constant type
            out = self.intern("forest", 0, None, frozenset())
        else:
            level = self.tree_types(g, m - 1)
            classes: dict = {}
            for v, t in level.items():
                classes.setdefault(t, set()).add(v)
            counts: dict = {}
            for sigma, nodes in classes.items():
                per_subtree = capped_subtree_counts(g, nodes, self.k)
                c = count_from(g, g.roots, per_subtree, self.k)
                if c:
                    counts[sigma] = c
            out = self.intern("forest", m, None, self.entries_from_counts(counts))
        g._cache[key] = out
        return out


_contexts: dict[int, TypeContext] = {}
_contexts_lock = threading.Lock()


def type_context(k: int) -> TypeContext:
    with _contexts_lock:
        if k not in _contexts:
            _contexts[k] = TypeContext(k)
        return _contexts[k]


def tp(g: ForestGraph, v, k: int, m: int) -> TypeValue:
    return type_context(k).tp(g, v, m)


def Tp(g: ForestGraph, k: int, m: int) -> TypeValue:
    return type_context(k).Tp(g, m)


def equiv(gs: ForestGraph, gt: ForestGraph, k: int, m: int) -> bool:
    """Counting equivalence of forests: equal forest types."""
    ctx = type_context(k)
    return ctx.Tp(gs, m) is ctx.Tp(gt, m)


def tree_equiv(gs: ForestGraph, gt: ForestGraph, k: int, m: int) -> bool:
    """Counting equivalence of single trees: equal tree types."""
    if len(gs.roots) != 1 or len(gt.roots) != 1:
        raise ValueError("tree_equiv requires single-rooted forests")
    ctx = type_context(k)
    return ctx.tp(gs, gs.roots[0], m) is ctx.tp(gt, gt.roots[0], m)


# ---------------------------------------------------------------------------
# realizable types and characteristic formulas


def realizable_tree_types(alphabet, k: int, rank: int, limit: int = 200000):
    """Tree types realized by finite forests over the alphabet.

    Least fixpoint per rank: a type is realizable when its label is a
    letter and its count vector is an achievable sum of realizable child
    contributions; the contribution of a subtree adds its own root type to
    its strict-descendant counts.
    """
    ctx = type_context(k)
    cache = getattr(ctx, "_realizable", None)
    if cache is None:
        cache = ctx._realizable = {}
    ckey = (tuple(sorted(alphabet)), rank)
    if ckey in cache:
        return cache[ckey]
    labels = sorted(alphabet)
    current = [ctx.intern("tree", 0, a, frozenset()) for a in labels]
    for r in range(1, rank + 1):
        profiles = {frozenset()}
        types: set = set()
        changed = True
        while changed:
            changed = False
            for p in list(profiles):
                for a in labels:
                    tau = ctx.intern("tree", r, a, p)
                    if tau not in types:
                        types.add(tau)
                        changed = True
            for p in list(profiles):
                for tau in list(types):
                    combined = _profile_add(ctx, p, _contribution(ctx, tau))
                    if combined not in profiles:
                        profiles.add(combined)
                        changed = True
                        if len(profiles) > limit:
                            raise RuntimeError("realizable type enumeration exceeds limit")
        current = sorted(types, key=lambda t: t.iid)
    cache[ckey] = current
    return current


def _counts_of(entries) -> dict:
    out: dict = {}
    for l, sub in entries:
        out[sub] = max(out.get(sub, 0), l)
    return out


def _profile_add(ctx: TypeContext, p, q) -> frozenset:
    counts = _counts_of(p)
    for sub, c in _counts_of(q).items():
        counts[sub] = min(ctx.k, counts.get(sub, 0) + c)
    return ctx.entries_from_counts(counts)


def _contribution(ctx: TypeContext, tau: TypeValue) -> frozenset:
    """Counts a subtree of this type adds to its parent's profile."""
    root_proj = _project(ctx, tau, tau.rank - 1)
    counts = _counts_of(tau.entries)
    counts[root_proj] = min(ctx.k, counts.get(root_proj, 0) + 1)
    return ctx.entries_from_counts(counts)


def _project(ctx: TypeContext, tau: TypeValue, rank: int) -> TypeValue:
    """Lower-rank type of the same tree."""
    if rank < 0:
        raise ValueError("cannot project below rank 0")
    if tau.rank == rank:
        return tau
    key = (tau, rank)
    if key in ctx._proj:
        return ctx._proj[key]
    if rank == 0:
        out = ctx.intern("tree", 0, tau.label, frozenset())
    else:
        down = _counts_of(tau.entries)
        counts: dict = {}
        for sub, c in down.items():
            p = _project(ctx, sub, rank - 1)
            counts[p] = min(ctx.k, counts.get(p, 0) + c)
        out = ctx.intern("tree", rank, tau.label, ctx.entries_from_counts(counts))
    ctx._proj[key] = out
    return out


def chi(tau: TypeValue, k: int, alphabet) -> Formula:
    """Characteristic formula: a forest or tree satisfies it exactly when
    its type at (k, rank of tau) equals tau.

    Negative conjuncts range over the realizable lower-rank types; for
    ranks up to two over finite forests this is the complete set.
    """
    rank = tau.rank
    if tau.kind == "tree" and rank == 0:
        return Atom(tau.label)
    lower = realizable_tree_types(alphabet, k, rank - 1)
    have = set(tau.entries)
    parts: list[Formula] = []
    if tau.kind == "tree":
        parts.append(Atom(tau.label))
    for l, sub in sorted(have, key=lambda p: (p[1].iid, p[0])):
        parts.append(Count(l, chi_cached(sub, k, alphabet)))
    for sub in lower:
        for l in range(1, k + 1):
            if (l, sub) not in have:
                parts.append(Not(Count(l, chi_cached(sub, k, alphabet))))
    return And(tuple(parts))


def chi_cached(tau: TypeValue, k: int, alphabet) -> Formula:
    ctx = type_context(k)
    cache = getattr(ctx, "_chi_cache", None)
    if cache is None:
        cache = ctx._chi_cache = {}
    key = (tau, tuple(sorted(alphabet)))
    if key not in cache:
        cache[key] = chi(tau, k, alphabet)
    return cache[key]
