"""Nondeterministic parity automata over unranked forests.

An automaton assigns states to the vertices of a forest.  A transition
item for ``(state, symbol)`` constrains, per edge label, the ordered
sequence of child states by an NFA whose letters are automaton states;
the root sequence is constrained the same way.  Acceptance of a regular
forest (given as a graph) is decided by a parity game between a Verifier,
who produces the run, and a Refuter, who challenges one branch.

Verifier moves are collapsed to the *set* of (child node, state) pairs an
assignment realizes: the Refuter only ever picks an element of that set,
so two assignments with the same set are interchangeable.  This keeps
wide nodes with shared children tractable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .forests import ForestGraph, variable_index
from .nfa import NFA, nfa_from_json, nfa_to_json
from .parity import REFUTER, VERIFIER, ParityGame, solve


@dataclass
class ParityForestAutomaton:
    states: list
    priority: dict
    root: NFA
    # (state, symbol) -> list of items; item: edge label -> NFA
    delta: dict
    name: str = ""
    # symbols the automaton runs on; a symbol without items is rejected at
    # every state, an undeclared symbol is an input error
    symbols: set | None = None
    _symbols: set = field(default_factory=set, repr=False)

    def __post_init__(self):
        self._symbols = {sym for (_, sym) in self.delta}
        if self.symbols:
            self._symbols |= set(self.symbols)

    def items(self, state, symbol):
        return self.delta.get((state, symbol), ())

    def known_symbol(self, symbol) -> bool:
        return symbol in self._symbols

    def accepts(self, g: ForestGraph) -> bool:
        game, init = membership_game(self, g)
        return solve(game).winner[init] == VERIFIER


def _sequence_profiles(aut: ParityForestAutomaton, targets, nfa: NFA):
    """All sets of (target, state) pairs realized by accepted assignments.

    Walks the target sequence through the NFA, assigning each occurrence a
    state; configurations are deduplicated by (NFA state set, pair set),
    which collapses assignments that differ only on repeated targets.
    """
    configs = {(nfa.start(), frozenset())}
    for t in targets:
        nxt = set()
        for ss, chosen in configs:
            for q in aut.states:
                ss2 = nfa.step(ss, q)
                if ss2:
                    nxt.add((ss2, chosen | {(t, q)}))
        configs = nxt
        if not configs:
            return set()
    return {chosen for ss, chosen in configs if ss & nfa.final}


def _verifier_profiles(aut: ParityForestAutomaton, g: ForestGraph, v, state):
    """Combined (child, state) profiles over all items for (state, label)."""
    label = g.labels[v]
    out = set()
    for item in aut.items(state, label):
        families = []
        ok = True
        arity = _label_arity(aut, g, v)
        for e in range(arity):
            targets = g.kids_for_edge(v, e)
            nfa = item.get(e)
            if nfa is None:
                # unconstrained edge label: any assignment goes
                fam = _sequence_profiles(aut, targets, _any_nfa(aut))
            else:
                fam = _sequence_profiles(aut, targets, nfa)
            if not fam:
                ok = False
                break
            families.append(fam)
        if not ok:
            continue
        combined = {frozenset()}
        for fam in families:
            combined = {c | f for c in combined for f in fam}
        out |= combined
    return out


def _label_arity(aut, g, v) -> int:
    lab = g.labels[v]
    if variable_index(lab) is not None:
        return 0
    return g.alphabet.arity(lab)


def _any_nfa(aut) -> NFA:
    if getattr(aut, "_any", None) is None:
        from .nfa import nfa_all

        aut._any = nfa_all(aut.states)
    return aut._any


def membership_game(aut: ParityForestAutomaton, g: ForestGraph):
    """Parity game whose Verifier region decides acceptance.

    Positions: ``init`` (Verifier names a root profile), ``("roots", S)``
    (Refuter picks a root), ``("node", v, q)`` (Verifier names an item and
    child profile), ``("run", v, q, S)`` (Refuter descends).  Only the
    node positions carry state priorities; everything else is 0 and never
    dominates an infinite play.
    """
    for v in g.reachable():
        if not aut.known_symbol(g.labels[v]):
            raise ValueError(f"automaton {aut.name or ''} does not know symbol {g.labels[v]!r}")

    game = ParityGame()
    init = "init"
    game.add(init, VERIFIER, 0)

    todo = []

    def node_pos(v, q):
        pos = ("node", v, q)
        if pos not in game.positions:
            game.add(pos, VERIFIER, aut.priority[q])
            todo.append((v, q))
        return pos

    root_profiles = _sequence_profiles(aut, list(g.roots), aut.root)
    if not root_profiles:
        game.set_terminal(init, REFUTER)
    for S in sorted(root_profiles, key=sorted):
        rp = ("roots", S)
        game.add(rp, REFUTER, 0)
        game.add_edge(init, rp)
        if not S:
            game.set_terminal(rp, VERIFIER)
        for (v, q) in sorted(S):
            game.add_edge(rp, node_pos(v, q))

    while todo:
        v, q = todo.pop()
        pos = ("node", v, q)
        profiles = _verifier_profiles(aut, g, v, q)
        if not profiles:
            game.set_terminal(pos, REFUTER)
            continue
        if frozenset() in profiles:
            # childless node with a satisfied item: the Verifier wins here
            game.set_terminal(pos, VERIFIER)
            continue
        for S in sorted(profiles, key=sorted):
            ap = ("run", v, q, S)
            game.add(ap, REFUTER, 0)
            game.add_edge(pos, ap)
            for (w, q2) in sorted(S):
                game.add_edge(ap, node_pos(w, q2))
    return game, init


# ---------------------------------------------------------------------------
# JSON


def automaton_from_json(data: dict, name: str = "") -> ParityForestAutomaton:
    states = list(data["states"])
    priority = {q: int(p) for q, p in data["priority"].items()}
    root = nfa_from_json(data["root"], states)
    delta = {}
    for entry in data["delta"]:
        q = entry["state"]
        sym = entry["symbol"]
        items = []
        for item in entry["items"]:
            items.append({int(e): nfa_from_json(spec, states) for e, spec in item.items()})
        delta.setdefault((q, sym), []).extend(items)
    symbols = set(data.get("symbols", []))
    return ParityForestAutomaton(states, priority, root, delta, name=name, symbols=symbols)


def automaton_to_json(aut: ParityForestAutomaton) -> dict:
    delta = []
    for (q, sym), items in sorted(aut.delta.items(), key=str):
        delta.append(
            {
                "state": q,
                "symbol": sym,
                "items": [{str(e): nfa_to_json(nfa) for e, nfa in item.items()} for item in items],
            }
        )
    return {
        "states": list(aut.states),
        "priority": dict(aut.priority),
        "root": nfa_to_json(aut.root),
        "symbols": sorted(aut._symbols),
        "delta": delta,
    }
