"""Hand-built algebra presentations used as fixtures.

Three languages over the letters {a, b}:

* ``contains_a``   - some vertex is labelled a
* ``two_a``        - at least two vertices are labelled a
* ``inf_branch``   - some branch is infinite

The first two are weight-counting algebras: every element carries the
number of a-vertices it contributes (capped), and arity >= 1 elements
additionally carry how often they duplicate their arguments.  Their
automata are built from a small family of threshold counters combined
with a product construction.  The third tracks reachability of an
infinite branch directly.
"""

from __future__ import annotations

from .algebra import AlgebraPresentation
from .automata import ParityForestAutomaton
from .nfa import NFA, compile_regex, eliminate_eps, minimize
from .forests import variable

# label info: name -> (weight, per-edge argument multiplicities)
# weight 2 means "at least two", multiplicity 2 means "at least twice"


def count_automaton(labels, nvars, target, var_weights=None):
    """Threshold counter over weighted labels with duplicating edges.

    ``target`` is one of ``exact0``, ``exact1``, ``atleast1``,
    ``atleast2``; the automaton accepts exactly the forests whose total
    weight (label weights plus, per edge, the multiplicity-scaled weight
    below) meets the target.  Variables count via ``var_weights``
    (default 0), which turns the same machinery into an occurrence
    counter for one variable.
    """
    var_weights = var_weights or {}

    if target == "exact0":
        states, prio, root = ["Z"], {"Z": 0}, "Z*"
    elif target == "exact1":
        states, prio, root = ["O", "Z"], {"O": 1, "Z": 0}, "Z* O Z*"
    elif target == "atleast1":
        states, prio, root = ["P", "A"], {"P": 1, "A": 0}, "A* P A*"
    elif target == "atleast2":
        states, prio, root = (
            ["Q", "P", "A"],
            {"Q": 1, "P": 1, "A": 0},
            "A* Q A* | A* P A* P A*",
        )
    else:
        raise ValueError(target)

    def rx(pattern):
        return minimize(compile_regex(pattern, states))

    def one_at(j, r, carrier, fill):
        return {i: rx(f"{fill}* {carrier} {fill}*" if i == j else f"{fill}*") for i in range(r)}

    def all_of(r, fill):
        return {i: rx(f"{fill}*") for i in range(r)}

    delta = {}

    def add(state, symbol, item):
        delta.setdefault((state, symbol), []).append(item)

    entries = [(name, w, mults) for name, (w, mults) in labels.items()]
    entries += [(variable(i), var_weights.get(variable(i), 0), ()) for i in range(nvars)]

    for name, w, mults in entries:
        r = len(mults)
        if "Z" in states:
            if w == 0:
                add("Z", name, all_of(r, "Z"))
        if "O" in states:
            if w == 1:
                add("O", name, all_of(r, "Z"))
            elif w == 0:
                for j in range(r):
                    if mults[j] == 1:
                        add("O", name, one_at(j, r, "O", "Z"))
        if "P" in states:
            if w >= 1:
                add("P", name, all_of(r, "A"))
            else:
                for j in range(r):
                    add("P", name, one_at(j, r, "P", "A"))
        if "Q" in states:
            if w >= 2:
                add("Q", name, all_of(r, "A"))
            elif w == 1:
                for j in range(r):
                    add("Q", name, one_at(j, r, "P", "A"))
            else:
                for j in range(r):
                    add("Q", name, one_at(j, r, "Q", "A"))
                    if mults[j] >= 2:
                        add("Q", name, one_at(j, r, "P", "A"))
                    two_here = {
                        i: rx("A* P A* P A*" if i == j else "A*") for i in range(r)
                    }
                    add("Q", name, two_here)
                    for j2 in range(j + 1, r):
                        split = {
                            i: rx("A* P A*" if i in (j, j2) else "A*") for i in range(r)
                        }
                        add("Q", name, split)
        if "A" in states:
            add("A", name, all_of(r, "A"))

    symbols = {name for name, _, _ in entries}
    return ParityForestAutomaton(states, prio, rx(root), delta, symbols=symbols)


def automaton_product(a: ParityForestAutomaton, b: ParityForestAutomaton) -> ParityForestAutomaton:
    """Run two automata simultaneously; accepts the intersection.

    Priorities combine by maximum, which is sound here because every
    component automaton is weak: along any run branch the priority is
    eventually constant, so the combined limit superior is the maximum of
    the component limits.
    """

    def join(p, q):
        return f"{p}&{q}"

    states = [join(p, q) for p in a.states for q in b.states]
    prio = {join(p, q): max(a.priority[p], b.priority[q]) for p in a.states for q in b.states}
    root = _nfa_product(a.root, b.root, a.states, b.states, join)
    delta = {}
    symbols = a._symbols & b._symbols
    for sym in symbols:
        for p in a.states:
            for q in b.states:
                items = []
                seen = set()
                for ia in a.items(p, sym):
                    for ib in b.items(q, sym):
                        edges = set(ia) | set(ib)
                        item = {}
                        for e in edges:
                            na = ia.get(e) or _any(a)
                            nb = ib.get(e) or _any(b)
                            item[e] = _nfa_product(na, nb, a.states, b.states, join)
                        key = _item_key(item)
                        if key not in seen:
                            seen.add(key)
                            items.append(item)
                if items:
                    delta[(join(p, q), sym)] = items
    return ParityForestAutomaton(states, prio, root, delta, symbols=set(symbols))


def _item_key(item):
    from .nfa import nfa_to_json

    return tuple(sorted((e, str(nfa_to_json(nfa))) for e, nfa in item.items()))


def _any(aut):
    from .nfa import nfa_all

    return nfa_all(aut.states)


def _nfa_product(n1: NFA, n2: NFA, letters1, letters2, join) -> NFA:
    n1 = eliminate_eps(n1)
    n2 = eliminate_eps(n2)

    def ns(p, q):
        return f"{p}~{q}"

    states = [ns(p, q) for p in n1.states for q in n2.states]
    out = NFA(
        states,
        {ns(p, q) for p in n1.initial for q in n2.initial},
        {ns(p, q) for p in n1.final for q in n2.final},
    )
    for (p1, l1), t1 in n1.edges.items():
        for (p2, l2), t2 in n2.edges.items():
            letter = join(l1, l2)
            for r1 in t1:
                for r2 in t2:
                    out.add_edge(ns(p1, p2), letter, ns(r1, r2))
    return minimize(out)


# ---------------------------------------------------------------------------
# fixtures


def build_contains_a() -> AlgebraPresentation:
    labels = {
        "z0": (0, ()),
        "o0": (1, ()),
        "z1": (0, (1,)),
        "o1": (1, (1,)),
        "z4": (0, (1, 1, 1, 1)),
        "o4": (1, (1, 1, 1, 1)),
    }
    nvars = 4
    automata = {}
    for name in labels:
        target = "exact0" if name.startswith("z") else "atleast1"
        automata[name] = count_automaton(labels, nvars, target)
    return AlgebraPresentation(
        arities={0: ["z0", "o0"], 1: ["z1", "o1"], 4: ["z4", "o4"]},
        generators=["z0", "o0", "z1", "o1"],
        automata=automata,
        accepted=["o0"],
        letters={"a": "o1", "b": "z1"},
        name="contains_a",
    )


def build_two_a() -> AlgebraPresentation:
    labels = {
        "c0": (0, ()),
        "c1": (1, ()),
        "c2": (2, ()),
        "d0": (0, (1,)),
        "dm": (0, (2,)),
        "d1": (1, (1,)),
        "d2": (2, (1,)),
        "ea": (0, (1, 1)),
        "eb": (0, (1, 2)),
        "ec": (0, (2, 1)),
        "ed": (0, (2, 2)),
        "e1": (1, (1, 1)),
        "e2": (2, (1, 1)),
    }
    nvars = 2
    weight = {
        0: lambda: count_automaton(labels, nvars, "exact0"),
        1: lambda: count_automaton(labels, nvars, "exact1"),
        2: lambda: count_automaton(labels, nvars, "atleast2"),
    }

    def mult(i, n):
        vw = {variable(i): 1}
        target = "exact1" if n == 1 else "atleast2"
        return count_automaton(labels, nvars, target, var_weights=vw)

    automata = {
        "c0": weight[0](),
        "c1": weight[1](),
        "c2": weight[2](),
        "d0": automaton_product(weight[0](), mult(0, 1)),
        "dm": automaton_product(weight[0](), mult(0, 2)),
        "d1": weight[1](),
        "d2": weight[2](),
        "ea": automaton_product(weight[0](), automaton_product(mult(0, 1), mult(1, 1))),
        "eb": automaton_product(weight[0](), automaton_product(mult(0, 1), mult(1, 2))),
        "ec": automaton_product(weight[0](), automaton_product(mult(0, 2), mult(1, 1))),
        "ed": automaton_product(weight[0](), automaton_product(mult(0, 2), mult(1, 2))),
        "e1": weight[1](),
        "e2": weight[2](),
    }
    return AlgebraPresentation(
        arities={
            0: ["c0", "c1", "c2"],
            1: ["d0", "dm", "d1", "d2"],
            2: ["ea", "eb", "ec", "ed", "e1", "e2"],
        },
        generators=["c0", "c1", "c2", "d0", "dm", "d1", "d2"],
        automata=automata,
        accepted=["c2"],
        letters={"a": "d1", "b": "d0"},
        name="two_a",
    )


def build_inf_branch() -> AlgebraPresentation:
    arities = {0: ["f0", "i0"], 1: ["f1", "i1"], 2: ["f2", "i2"]}
    infinite = {"i0", "i1", "i2"}
    label_arity = {}
    for m, elems in arities.items():
        for e in elems:
            label_arity[e] = m
    nvars = 2
    states = ["br", "fin", "any"]
    prio = {"br": 0, "fin": 1, "any": 0}

    def rx(pattern):
        return minimize(compile_regex(pattern, states))

    delta = {}

    def add(state, symbol, item):
        delta.setdefault((state, symbol), []).append(item)

    for name, r in label_arity.items():
        if name in infinite:
            # the label itself hides an infinite branch: stop searching
            add("br", name, {i: rx("any*") for i in range(r)})
        for j in range(r):
            # thread the search along one child
            add(
                "br",
                name,
                {i: rx("any* br any*" if i == j else "any*") for i in range(r)},
            )
        if name not in infinite:
            add("fin", name, {i: rx("fin*") for i in range(r)})
        add("any", name, {i: rx("any*") for i in range(r)})
    for i in range(nvars):
        add("fin", variable(i), {})
        add("any", variable(i), {})

    symbols = set(label_arity) | {variable(i) for i in range(nvars)}

    def aut(infinite_value: bool) -> ParityForestAutomaton:
        root = rx("any* br any*") if infinite_value else rx("fin*")
        return ParityForestAutomaton(states, dict(prio), root, dict(delta), symbols=set(symbols))

    automata = {e: aut(e in infinite) for e in label_arity}
    return AlgebraPresentation(
        arities=arities,
        generators=["f0", "i0", "f1", "i1"],
        automata=automata,
        accepted=["i0"],
        letters={"a": "f1", "b": "f1"},
        name="inf_branch",
    )


def build_trivial() -> AlgebraPresentation:
    """One element per arity; every equation degenerates."""
    labels = {"t0": (0, ()), "t1": (0, (1,))}
    automata = {
        "t0": count_automaton(labels, 1, "exact0"),
        "t1": count_automaton(labels, 1, "exact0"),
    }
    return AlgebraPresentation(
        arities={0: ["t0"], 1: ["t1"]},
        generators=["t0", "t1"],
        automata=automata,
        accepted=[],
        letters={"a": "t1", "b": "t1"},
        name="trivial",
    )


ALL_FIXTURES = {
    "contains_a": build_contains_a,
    "two_a": build_two_a,
    "inf_branch": build_inf_branch,
}


def write_fixtures(directory: str) -> list[str]:
    import os

    from .algebra import save_algebra

    paths = []
    for name, build in ALL_FIXTURES.items():
        path = os.path.join(directory, f"{name}.alg")
        save_algebra(build(), path)
        paths.append(path)
    return paths
