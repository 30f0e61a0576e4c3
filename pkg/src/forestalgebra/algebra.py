"""Finitary forest algebras presented by one automaton per element.

A presentation lists the elements of each arity together with a parity
forest automaton recognising each element's product preimage over the
listed elements.  The product of a regular forest is then the unique
element whose automaton accepts it; the derived horizontal and vertical
operations are cached instances of that evaluator.
"""

from __future__ import annotations

import json
import threading
from dataclasses import dataclass, field
from random import Random

from .automata import ParityForestAutomaton, automaton_from_json, automaton_to_json
from .forests import (
    ForestGraph,
    RankedAlphabet,
    _Builder,
    flatten,
    validate,
    variable,
    variable_index,
)
from .notation import format_term


class AlgebraError(Exception):
    pass


class NoAccept(AlgebraError):
    """No automaton of the required arity accepts the forest."""


class MultiAccept(AlgebraError):
    """Several automata accept the same forest; the presentation overlaps."""


@dataclass
class AlgebraPresentation:
    arities: dict[int, list[str]]
    generators: list[str]
    automata: dict[str, ParityForestAutomaton]
    accepted: list[str] = field(default_factory=list)
    letters: dict[str, str] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        self.element_arity: dict[str, int] = {}
        for m, elems in self.arities.items():
            for e in elems:
                if e in self.element_arity:
                    raise AlgebraError(f"element {e!r} listed twice")
                self.element_arity[e] = m
        for m in (0, 1):
            if m not in self.arities:
                raise AlgebraError(f"presentation must list arity {m}")
        for g in self.generators:
            if g not in self.element_arity:
                raise AlgebraError(f"generator {g!r} is not a listed element")
        for e in self.element_arity:
            if e not in self.automata:
                raise AlgebraError(f"element {e!r} has no automaton")
        self.alphabet = RankedAlphabet(sorted(self.element_arity.items()))
        self._cache: dict = {}
        self._lock = threading.Lock()

    # -- evaluation ------------------------------------------------------

    def elements(self, m: int) -> list[str]:
        if m not in self.arities:
            raise AlgebraError(f"no elements of arity {m} listed")
        return self.arities[m]

    def evaluate(self, g: ForestGraph, m: int | None = None) -> str:
        """The unique arity-m element whose automaton accepts g."""
        if m is None:
            m = g.arity
        if g.arity != m:
            raise AlgebraError(f"forest has arity {g.arity}, expected {m}")
        candidates = self.elements(m)
        key = (g.canonical_key(), m)
        with self._lock:
            hit = self._cache.get(key)
        if hit is not None:
            return hit
        accepting = [e for e in candidates if self.automata[e].accepts(g)]
        if not accepting:
            raise NoAccept(f"no arity-{m} automaton accepts {describe_forest(g)}")
        if len(accepting) > 1:
            raise MultiAccept(
                f"automata {accepting} all accept {describe_forest(g)}"
            )
        with self._lock:
            self._cache[key] = accepting[0]
        return accepting[0]

    def generated_by_low_arities(self) -> bool:
        return all(self.element_arity[g] <= 1 for g in self.generators)


def describe_forest(g: ForestGraph) -> str:
    if g.is_acyclic():
        return format_term(g)
    return f"graph with roots {list(g.roots)} and {len(g.labels)} nodes"


# ---------------------------------------------------------------------------
# small defining forests over the element alphabet


def graph_constant(pres, c: str) -> ForestGraph:
    b = _Builder(pres.alphabet)
    b.roots.append(b.add(c))
    return b.graph()


def graph_sum(pres, names) -> ForestGraph:
    b = _Builder(pres.alphabet)
    for c in names:
        b.roots.append(b.add(c))
    return b.graph()


def graph_apply(pres, u: str, c: str) -> ForestGraph:
    b = _Builder(pres.alphabet)
    top = b.add(u)
    b.roots.append(top)
    b.children[top].append((0, b.add(c)))
    return b.graph()


def graph_chain(pres, names, tail_variable: bool = True) -> ForestGraph:
    """names[0](names[1](... (x0))) or closed when tail_variable is False."""
    b = _Builder(pres.alphabet)
    prev = None
    for u in names:
        node = b.add(u)
        if prev is None:
            b.roots.append(node)
        else:
            b.children[prev].append((0, node))
        prev = node
    if tail_variable:
        b.children[prev].append((0, b.add(variable(0))))
    return b.graph()


def graph_loop(pres, u: str) -> ForestGraph:
    b = _Builder(pres.alphabet)
    node = b.add(u)
    b.roots.append(node)
    b.children[node].append((0, node))
    return b.graph()


def graph_hsum1(pres, u: str, v: str) -> ForestGraph:
    b = _Builder(pres.alphabet)
    for name in (u, v):
        node = b.add(name)
        b.roots.append(node)
        b.children[node].append((0, b.add(variable(0))))
    return b.graph()


def graph_wide(pres, u: str, var_count: int, consts=()) -> ForestGraph:
    """u applied to var_count copies of x0 plus constant children.

    Repeated children share one node with parallel edges, which keeps the
    membership game small for very wide applications.
    """
    b = _Builder(pres.alphabet)
    top = b.add(u)
    b.roots.append(top)
    if var_count:
        leaf = b.add(variable(0))
        for _ in range(var_count):
            b.children[top].append((0, leaf))
    shared: dict[str, int] = {}
    for c in consts:
        if c not in shared:
            shared[c] = b.add(c)
        b.children[top].append((0, shared[c]))
    return b.graph()


def graph_sing(pres, e: str) -> ForestGraph:
    b = _Builder(pres.alphabet)
    top = b.add(e)
    b.roots.append(top)
    for i in range(pres.element_arity[e]):
        b.children[top].append((i, b.add(variable(i))))
    return b.graph()


# ---------------------------------------------------------------------------
# derived operation tables


class DerivedTables:
    """Horizontal monoid, vertical semigroup and friends, memoized.

    Every entry is the product of one small defining forest; use
    :func:`derive_tables` to precompute the core tables eagerly.
    """

    def __init__(self, pres: AlgebraPresentation, kmax: int = 2):
        self.pres = pres
        self.kmax = kmax
        self._memo: dict = {}

    def _get(self, key, build):
        if key not in self._memo:
            self._memo[key] = build()
        return self._memo[key]

    @property
    def zero(self) -> str:
        from .forests import empty_forest

        return self._get("zero", lambda: self.pres.evaluate(empty_forest(self.pres.alphabet), 0))

    def hsum0(self, c: str, d: str) -> str:
        return self._get(("h0", c, d), lambda: self.pres.evaluate(graph_sum(self.pres, [c, d]), 0))

    def hsum_many(self, names) -> str:
        names = list(names)
        if not names:
            return self.zero
        out = names[0]
        for d in names[1:]:
            out = self.hsum0(out, d)
        return out

    def times(self, n: int, c: str) -> str:
        return self.hsum_many([c] * n)

    def act(self, u: str, c: str) -> str:
        return self._get(("act", u, c), lambda: self.pres.evaluate(graph_apply(self.pres, u, c), 0))

    def vcomp(self, u: str, v: str) -> str:
        return self._get(
            ("v", u, v), lambda: self.pres.evaluate(graph_chain(self.pres, [u, v]), 1)
        )

    def vpow(self, u: str, n: int) -> str:
        out = u
        for _ in range(n - 1):
            out = self.vcomp(out, u)
        return out

    def omega(self, u: str) -> str:
        return self._get(("w", u), lambda: self.pres.evaluate(graph_loop(self.pres, u), 0))

    def pi_exp(self, u: str) -> int:
        def build():
            # find the eventual cycle of vertical powers, then the least
            # power n with u^n u^n = u^n
            seen = {}
            powers = []
            cur = u
            n = 1
            while cur not in seen:
                seen[cur] = n
                powers.append(cur)
                cur = self.vcomp(cur, u)
                n += 1
            for i, p in enumerate(powers, start=1):
                if self.vcomp(p, p) == p:
                    return i
            raise AlgebraError(f"no idempotent vertical power of {u!r}")

        return self._get(("pi", u), build)

    def hsum1(self, u: str, v: str) -> str:
        return self._get(
            ("h1", u, v), lambda: self.pres.evaluate(graph_hsum1(self.pres, u, v), 1)
        )

    def ext(self, u: str, c: str) -> str:
        """Value of u(x0 + c)."""
        return self._get(
            ("ext", u, c),
            lambda: self.pres.evaluate(graph_wide(self.pres, u, 1, [c]), 1),
        )

    def hext(self, u: str, c: str) -> str:
        """Value of u(x0) + c."""

        def build():
            b = _Builder(self.pres.alphabet)
            top = b.add(u)
            b.roots.append(top)
            b.children[top].append((0, b.add(variable(0))))
            b.roots.append(b.add(c))
            return self.pres.evaluate(b.graph(), 1)

        return self._get(("hx", u, c), build)

    def sub(self, u: str, m: int, c: str) -> str:
        """Value of u(m copies of x0 + c)."""
        return self._get(
            ("sub", u, m, c),
            lambda: self.pres.evaluate(graph_wide(self.pres, u, m, [c]), 1),
        )

    def dup(self, u: str, m: int) -> str:
        """Value of u(m copies of x0)."""
        return self._get(
            ("dup", u, m),
            lambda: self.pres.evaluate(graph_wide(self.pres, u, m), 1),
        )


def derive_tables(pres: AlgebraPresentation, kmax: int = 2) -> DerivedTables:
    """Eagerly fill the core tables; the rest is computed on demand."""
    tbl = DerivedTables(pres, kmax)
    a0 = pres.elements(0)
    a1 = pres.elements(1)
    _ = tbl.zero
    for c in a0:
        for d in a0:
            tbl.hsum0(c, d)
    for u in a1:
        for c in a0:
            tbl.act(u, c)
        for v in a1:
            tbl.vcomp(u, v)
            tbl.hsum1(u, v)
        tbl.omega(u)
        tbl.pi_exp(u)
    return tbl


def leqL(tbl: DerivedTables, a: str, b: str) -> bool:
    """Left divisibility on constants: a = c(b) or a = b + d."""
    pres = tbl.pres
    return any(tbl.act(c, b) == a for c in pres.elements(1)) or any(
        tbl.hsum0(b, d) == a for d in pres.elements(0)
    )


# ---------------------------------------------------------------------------
# presentation validation


@dataclass
class ValidationReport:
    unit_failures: list = field(default_factory=list)
    assoc_failures: list = field(default_factory=list)
    acceptance_failures: list = field(default_factory=list)
    omega_failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not (
            self.unit_failures
            or self.assoc_failures
            or self.acceptance_failures
            or self.omega_failures
        )

    def lines(self) -> list[str]:
        out = []
        for group, name in (
            (self.unit_failures, "unit"),
            (self.assoc_failures, "associativity"),
            (self.acceptance_failures, "acceptance"),
            (self.omega_failures, "omega"),
        ):
            for item in group:
                out.append(f"{name}: {item}")
        return out


def validate_presentation(pres: AlgebraPresentation, samples: int = 200, seed: int = 0):
    """Check the algebra laws on the presentation, sampling where needed.

    The unit law is exact over all listed elements; associativity and the
    exactly-one-acceptance property are sampled; the vertical omega laws
    are exact over all of arity 1.
    """
    from .testkit import random_forest, random_nested

    rng = Random(seed)
    report = ValidationReport()

    for e, m in sorted(pres.element_arity.items()):
        try:
            got = pres.evaluate(graph_sing(pres, e), m)
        except AlgebraError as exc:
            report.unit_failures.append(f"sing({e}): {exc}")
            continue
        if got != e:
            report.unit_failures.append(f"sing({e}) evaluates to {got}")

    tbl = DerivedTables(pres)
    for u in pres.elements(1):
        w = tbl.omega(u)
        if tbl.act(u, w) != w:
            report.omega_failures.append(f"{u}(omega({u})) = {tbl.act(u, w)} != {w}")
        if tbl.omega(tbl.vpow(u, tbl.pi_exp(u))) != w:
            report.omega_failures.append(f"omega({u}^pi) != omega({u})")

    # sampled exactly-one acceptance, per listed arity
    per_arity = max(1, samples // (4 * max(1, len(pres.arities))))
    for m in sorted(pres.arities):
        for _ in range(per_arity):
            g = random_forest(rng, pres.alphabet, rng.randint(1, 5), arity=m)
            try:
                pres.evaluate(g, m)
            except AlgebraError as exc:
                report.acceptance_failures.append(str(exc))

    # sampled associativity: collapsing a nested forest before or after
    # evaluation gives the same element
    for _ in range(samples):
        outer, inner = random_nested(rng, pres.alphabet, 5, 4)
        try:
            direct = pres.evaluate(flatten(outer, inner), 0)
            b = _Builder(pres.alphabet)
            node_of = {}
            for v in outer.labels:
                slots = max((e for e, _ in outer.children[v]), default=-1) + 1
                node_of[v] = b.add(pres.evaluate(inner[v], slots))
            for v in outer.labels:
                for e, t in outer.children[v]:
                    b.children[node_of[v]].append((0, node_of[t]))
            b.roots = [node_of[r] for r in outer.roots]
            staged = pres.evaluate(b.graph(), 0)
        except AlgebraError as exc:
            report.assoc_failures.append(str(exc))
            continue
        if direct != staged:
            report.assoc_failures.append(f"flatten-first {direct} != evaluate-first {staged}")
    return report


# ---------------------------------------------------------------------------
# syntactic congruence sampler (test oracle)

BOX = "hole"


def syntactic_sampler(language_oracle, alphabet: RankedAlphabet, size_bound: int, context_bound: int):
    """Partition finite forests by behaviour under bounded contexts.

    A context is a forest over the alphabet plus an arity-0 hole symbol;
    plugging splices the candidate forest at every hole.  The result is an
    under-approximation of the syntactic congruence, refined enough for
    sanity checks against hand-built algebras.
    """
    from .testkit import EnumerationBudget, enum_forests

    ctx_alphabet = RankedAlphabet(alphabet.symbols() + [(BOX, 0)])
    forests = list(enum_forests(alphabet, EnumerationBudget(max_nodes=size_bound)))
    contexts = list(enum_forests(ctx_alphabet, EnumerationBudget(max_nodes=context_bound)))
    classes: dict[tuple, list] = {}
    for s in forests:
        sig = tuple(language_oracle(plug(p, s)) for p in contexts)
        classes.setdefault(sig, []).append(s)
    return list(classes.values())


def plug(context: ForestGraph, s: ForestGraph) -> ForestGraph:
    """Replace every hole leaf of the context by the forest s."""
    b = _Builder(s.alphabet)
    mc = {}
    for v, lab in context.labels.items():
        if lab == BOX:
            continue
        mc[v] = b.add(lab)
    ms = b.copy_in(s)
    sroots = [ms[r] for r in s.roots]
    holes = {v for v, lab in context.labels.items() if lab == BOX}
    for v in mc:
        kids = []
        for e, t in context.children[v]:
            if t in holes:
                kids.extend((e, r) for r in sroots)
            else:
                kids.append((e, mc[t]))
        b.children[mc[v]] = kids
    roots = []
    for r in context.roots:
        if r in holes:
            roots.extend(sroots)
        else:
            roots.append(mc[r])
    b.roots = roots
    return b.graph()


# ---------------------------------------------------------------------------
# JSON


def algebra_from_json(data: dict, name: str = "") -> AlgebraPresentation:
    arities = {int(m): list(elems) for m, elems in data["arities"].items()}
    automata = {
        e: automaton_from_json(spec, name=e) for e, spec in data["automata"].items()
    }
    return AlgebraPresentation(
        arities=arities,
        generators=list(data.get("generators", [])),
        automata=automata,
        accepted=list(data.get("accepted", [])),
        letters=dict(data.get("letters", {})),
        name=name or data.get("name", ""),
    )


def algebra_to_json(pres: AlgebraPresentation) -> dict:
    return {
        "name": pres.name,
        "arities": {str(m): elems for m, elems in sorted(pres.arities.items())},
        "generators": list(pres.generators),
        "accepted": list(pres.accepted),
        "letters": dict(pres.letters),
        "automata": {e: automaton_to_json(a) for e, a in sorted(pres.automata.items())},
    }


def load_algebra(path: str) -> AlgebraPresentation:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    import os

    return algebra_from_json(data, name=os.path.splitext(os.path.basename(path))[0])


def save_algebra(pres: AlgebraPresentation, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(algebra_to_json(pres), fh, indent=1, sort_keys=True)
        fh.write("\n")


def member(pres: AlgebraPresentation, g: ForestGraph) -> bool:
    """Language membership of a forest over the letter alphabet."""
    if not pres.letters:
        raise AlgebraError("presentation has no letter map")
    b = _Builder(pres.alphabet)
    m = {}
    for v, lab in g.labels.items():
        target = pres.letters.get(lab, lab)
        m[v] = b.add(target)
    for v in g.labels:
        b.children[m[v]] = [(e, m[t]) for e, t in g.children[v]]
    b.roots = [m[r] for r in g.roots]
    return pres.evaluate(b.graph(), 0) in pres.accepted