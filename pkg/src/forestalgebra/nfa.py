"""Small nondeterministic finite automata over arbitrary hashable letters.

Used by the forest automata to constrain ordered child sequences; the
letters are then automaton states.  A tiny regular-expression surface
syntax (union ``|``, star ``*``, plus ``+``, option ``?``, grouping,
juxtaposition for concatenation, ``.`` for any letter) compiles to these.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

EPS = None


@dataclass
class NFA:
    states: list
    initial: set
    final: set
    # edges: (state, letter) -> set of states; letter EPS means epsilon
    edges: dict = field(default_factory=dict)

    def add_edge(self, p, letter, q):
        self.edges.setdefault((p, letter), set()).add(q)

    def eps_closure(self, ss) -> frozenset:
        out = set(ss)
        stack = list(ss)
        while stack:
            p = stack.pop()
            for q in self.edges.get((p, EPS), ()):
                if q not in out:
                    out.add(q)
                    stack.append(q)
        return frozenset(out)

    def step(self, ss, letter) -> frozenset:
        nxt = set()
        for p in ss:
            nxt |= self.edges.get((p, letter), set())
        return self.eps_closure(nxt)

    def start(self) -> frozenset:
        return self.eps_closure(self.initial)

    def accepts(self, word) -> bool:
        cur = self.start()
        for letter in word:
            cur = self.step(cur, letter)
            if not cur:
                return False
        return bool(cur & self.final)

    def accepts_empty(self) -> bool:
        return bool(self.start() & self.final)


def nfa_from_json(data, letters=None) -> NFA:
    """Explicit dict form, or a regex string as a shorthand."""
    if isinstance(data, str):
        return compile_regex(data, letters or [])
    nfa = NFA(list(data["states"]), set(data["initial"]), set(data["final"]))
    for p, letter, q in data["edges"]:
        nfa.add_edge(p, letter, q)
    return nfa


def eliminate_eps(nfa: NFA) -> NFA:
    """Equivalent NFA without epsilon edges (the JSON form has none)."""
    letters = {letter for (_, letter) in nfa.edges if letter is not EPS}
    out = NFA(list(nfa.states), set(nfa.initial), set())
    for p in nfa.states:
        closure = nfa.eps_closure({p})
        if closure & nfa.final:
            out.final.add(p)
        for letter in letters:
            targets = set()
            for s in closure:
                targets |= nfa.edges.get((s, letter), set())
            for q in nfa.eps_closure(targets):
                out.add_edge(p, letter, q)
    return trim(out)


def trim(nfa: NFA) -> NFA:
    """Drop states that are unreachable or cannot reach a final state."""
    fwd = {}
    bwd = {}
    for (p, letter), qs in nfa.edges.items():
        fwd.setdefault(p, set()).update(qs)
        for q in qs:
            bwd.setdefault(q, set()).add(p)

    def explore(starts, adj):
        seen = set(starts)
        stack = list(starts)
        while stack:
            p = stack.pop()
            for q in adj.get(p, ()):
                if q not in seen:
                    seen.add(q)
                    stack.append(q)
        return seen

    live = explore(nfa.initial, fwd) & explore(nfa.final, bwd)
    out = NFA(
        [s for s in nfa.states if s in live],
        nfa.initial & live,
        nfa.final & live,
    )
    for (p, letter), qs in nfa.edges.items():
        if p in live:
            for q in qs:
                if q in live:
                    out.add_edge(p, letter, q)
    return out


def minimize(nfa: NFA) -> NFA:
    """Minimal deterministic automaton for the language, reusable as an NFA.

    Subset construction followed by partition refinement; the dead state
    is dropped, so the result is a partial DFA.
    """
    base = eliminate_eps(nfa)
    letters = sorted({letter for (_, letter) in base.edges}, key=str)
    start = frozenset(base.initial)
    subsets = {start: 0}
    order = [start]
    trans: dict[tuple[int, object], int] = {}
    i = 0
    while i < len(order):
        cur = order[i]
        for letter in letters:
            nxt = frozenset(base.step(cur, letter))
            if nxt not in subsets:
                subsets[nxt] = len(order)
                order.append(nxt)
            trans[(subsets[cur], letter)] = subsets[nxt]
        i += 1
    finals = {subsets[s] for s in order if s & base.final}

    # refine {final, nonfinal} to the coarsest congruence
    block = {subsets[s]: (1 if subsets[s] in finals else 0) for s in order}
    while True:
        sig = {}
        for s in block:
            sig[s] = (block[s], tuple(block[trans[(s, letter)]] for letter in letters))
        fresh: dict = {}
        nxt_block = {s: fresh.setdefault(sig[s], len(fresh)) for s in block}
        if len(fresh) == len(set(block.values())):
            break
        block = nxt_block

    # drop classes that cannot reach a final state (the dead class)
    out = NFA([], set(), set())
    class_final = {block[s] for s in finals}
    out.initial = {f"m{block[subsets[start]]}"}
    out.final = {f"m{c}" for c in class_final}
    seen = set()
    for (s, letter), t in trans.items():
        seen.add(block[s])
        out.add_edge(f"m{block[s]}", letter, f"m{block[t]}")
    out.states = [f"m{c}" for c in sorted(seen | class_final | {block[subsets[start]]})]
    return trim(out)


def nfa_to_json(nfa: NFA) -> dict:
    flat = eliminate_eps(nfa)
    return {
        "states": list(flat.states),
        "initial": sorted(flat.initial, key=str),
        "final": sorted(flat.final, key=str),
        "edges": sorted(
            [[p, letter, q] for (p, letter), qs in flat.edges.items() for q in qs],
            key=str,
        ),
    }


# ---------------------------------------------------------------------------
# regex surface syntax (Thompson construction)

_RX_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|[().|*+?])")


class RegexSyntaxError(ValueError):
    pass


def _rx_tokens(text):
    out = []
    i = 0
    while i < len(text):
        m = _RX_TOKEN.match(text, i)
        if not m:
            if text[i:].strip():
                raise RegexSyntaxError(f"bad regex character {text[i]!r}")
            break
        out.append(m.group(1))
        i = m.end()
    out.append(None)
    return out


def compile_regex(pattern: str, letters) -> NFA:
    """Thompson construction; ``.`` expands to the given letter universe."""
    letters = list(letters)
    tokens = _rx_tokens(pattern)
    pos = 0

    def peek():
        return tokens[pos]

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    counter = [0]

    def fresh():
        counter[0] += 1
        return f"r{counter[0]}"

    nfa = NFA([], set(), set())

    def atom():
        tok = take()
        if tok == "(":
            frag = union()
            if take() != ")":
                raise RegexSyntaxError("unbalanced parenthesis")
        elif tok == ".":
            s, t = fresh(), fresh()
            for letter in letters:
                nfa.add_edge(s, letter, t)
            frag = (s, t)
        elif tok is not None and re.match(r"[A-Za-z_]", tok):
            s, t = fresh(), fresh()
            nfa.add_edge(s, tok, t)
            frag = (s, t)
        else:
            raise RegexSyntaxError(f"unexpected token {tok!r}")
        while peek() in ("*", "+", "?"):
            op = take()
            s, t = fresh(), fresh()
            fs, ft = frag
            nfa.add_edge(s, EPS, fs)
            nfa.add_edge(ft, EPS, t)
            if op in ("*", "+"):
                nfa.add_edge(ft, EPS, fs)
            if op in ("*", "?"):
                nfa.add_edge(s, EPS, t)
            frag = (s, t)
        return frag

    def concat():
        frag = atom()
        while peek() not in (None, ")", "|"):
            nxt = atom()
            nfa.add_edge(frag[1], EPS, nxt[0])
            frag = (frag[0], nxt[1])
        return frag

    def union():
        frag = concat()
        while peek() == "|":
            take()
            other = concat()
            s, t = fresh(), fresh()
            nfa.add_edge(s, EPS, frag[0])
            nfa.add_edge(s, EPS, other[0])
            nfa.add_edge(frag[1], EPS, t)
            nfa.add_edge(other[1], EPS, t)
            frag = (s, t)
        return frag

    start, end = union()
    if peek() is not None:
        raise RegexSyntaxError(f"trailing regex input {peek()!r}")
    nfa.initial = {start}
    nfa.final = {end}
    nfa.states = [f"r{i + 1}" for i in range(counter[0])]
    return nfa


def nfa_all(letters) -> NFA:
    """Accepts every word over the letters, including the empty one."""
    nfa = NFA(["u"], {"u"}, {"u"})
    for letter in letters:
        nfa.add_edge("u", letter, "u")
    return nfa


def nfa_empty_word_only() -> NFA:
    return NFA(["e"], {"e"}, {"e"})
