"""Text and JSON front ends for forest graphs.

Term notation covers finite forests, e.g. ``a(b + c, 0, b) + b`` for a
symbol ``a`` of arity 3: argument positions list the 0-, 1- and
2-successor forests, ``0`` is the empty forest, and ``+`` joins
components left to right.  Variables are written ``x0, x1, ...``.

The JSON format covers arbitrary graphs::

    {"alphabet": [["a", 1], ...],
     "roots": [0, ...],
     "nodes": [{"id": 0, "label": "a", "children": [[0, 1], ...]}, ...]}
"""

from __future__ import annotations

import json
import re

from .forests import ForestGraph, RankedAlphabet, _Builder, variable_index

_TOKEN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*|\d+|[(),+])")


class TermSyntaxError(ValueError):
    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


def _tokenize(text: str):
    out = []
    i = 0
    while i < len(text):
        m = _TOKEN.match(text, i)
        if not m:
            if text[i:].strip():
                raise TermSyntaxError(f"unexpected character {text[i]!r}", i)
            break
        out.append((m.group(1), m.start(1)))
        i = m.end()
    out.append((None, len(text)))
    return out


def parse_term(text: str, alphabet: RankedAlphabet) -> ForestGraph:
    """Parse the paper-style term notation into a forest graph."""
    tokens = _tokenize(text)
    pos = 0

    def peek():
        return tokens[pos][0]

    def take(expected=None):
        nonlocal pos
        tok, at = tokens[pos]
        if expected is not None and tok != expected:
            raise TermSyntaxError(f"expected {expected!r}, found {tok!r}", at)
        pos += 1
        return tok, at

    b = _Builder(alphabet)

    def parse_forest() -> list[int]:
        roots = parse_tree()
        while peek() == "+":
            take("+")
            roots.extend(parse_tree())
        return roots

    def parse_tree() -> list[int]:
        tok, at = take()
        if tok == "0":
            return []
        if tok is None or not re.match(r"[A-Za-z_]", tok or ""):
            raise TermSyntaxError(f"expected a symbol, found {tok!r}", at)
        if variable_index(tok) is not None:
            return [b.add(tok)]
        if tok not in alphabet:
            raise TermSyntaxError(f"unknown symbol {tok!r}", at)
        node = b.add(tok)
        ar = alphabet.arity(tok)
        if peek() == "(":
            take("(")
            args = [parse_forest()]
            while peek() == ",":
                take(",")
                args.append(parse_forest())
            _, closing = take(")")
            if len(args) > ar:
                raise TermSyntaxError(
                    f"symbol {tok!r} has arity {ar} but {len(args)} argument(s) given", closing
                )
            for k, forest_roots in enumerate(args):
                for r in forest_roots:
                    b.children[node].append((k, r))
        return [node]

    b.roots = parse_forest()
    tok, at = tokens[pos]
    if tok is not None:
        raise TermSyntaxError(f"trailing input {tok!r}", at)
    return b.graph()


def format_term(g: ForestGraph) -> str:
    """Term notation for an acyclic graph (expands sharing)."""
    if not g.is_acyclic():
        raise ValueError("term notation covers finite forests only")

    def tree(v: int) -> str:
        lab = g.labels[v]
        ar = 0 if variable_index(lab) is not None else g.alphabet.arity(lab)
        if ar == 0:
            return lab
        args = []
        used = False
        for k in range(ar):
            part = [tree(t) for t in g.kids_for_edge(v, k)]
            args.append(" + ".join(part) if part else "0")
            used = used or bool(part)
        while args and args[-1] == "0":
            args.pop()
        if not args:
            return lab
        return f"{lab}({', '.join(args)})"

    if not g.roots:
        return "0"
    return " + ".join(tree(r) for r in g.roots)


# ---------------------------------------------------------------------------
# JSON


def forest_to_json(g: ForestGraph) -> dict:
    return {
        "alphabet": [[n, a] for n, a in g.alphabet.symbols()],
        "roots": list(g.roots),
        "nodes": [
            {
                "id": v,
                "label": g.labels[v],
                "children": [[e, t] for e, t in g.children[v]],
            }
            for v in sorted(g.labels)
        ],
    }


def forest_from_json(data: dict) -> ForestGraph:
    alphabet = RankedAlphabet([(n, int(a)) for n, a in data["alphabet"]])
    labels = {}
    children = {}
    for nd in data["nodes"]:
        v = int(nd["id"])
        labels[v] = nd["label"]
        children[v] = [(int(e), int(t)) for e, t in nd.get("children", [])]
    return ForestGraph.build(alphabet, labels, children, [int(r) for r in data["roots"]])


def load_forest(path: str) -> ForestGraph:
    with open(path, encoding="utf-8") as fh:
        return forest_from_json(json.load(fh))


def save_forest(g: ForestGraph, path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(forest_to_json(g), fh, indent=1, sort_keys=True)
        fh.write("\n")
