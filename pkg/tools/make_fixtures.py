#!/usr/bin/env python3
"""Regenerate the committed fixture files under fixtures/."""

import json
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from forestalgebra.fixture_algebras import write_fixtures
from forestalgebra.forests import RankedAlphabet
from forestalgebra.notation import parse_term, save_forest


def write_expected(root):
    """Freeze oracle-computed values the test suite asserts against."""
    from forestalgebra.algebra import load_algebra
    from forestalgebra.testkit import brute_marked, count_forests

    expected_dir = os.path.join(root, "expected")
    os.makedirs(expected_dir, exist_ok=True)

    marked = {}
    for name in ("contains_a", "two_a", "inf_branch"):
        pres = load_algebra(os.path.join(root, f"{name}.alg"))
        for c in pres.elements(0):
            for cap in (1, 2):
                triples = sorted(brute_marked(pres, c, cap, 4))
                marked[f"{name}/{c}/cap{cap}"] = [[d, i, r] for d, i, r in triples]
    payload = {
        "provenance": "generated by forestalgebra.testkit.brute_marked, size bound 4",
        "sets": marked,
    }
    path = os.path.join(expected_dir, "marked_sets.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote", os.path.relpath(path))

    ab = RankedAlphabet.letters("a", "b")
    counts = {str(n): count_forests(ab, n) for n in range(7)}
    payload = {
        "provenance": "generated by forestalgebra.testkit.count_forests over letters a,b",
        "counts": counts,
    }
    path = os.path.join(expected_dir, "forest_counts.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")
    print("wrote", os.path.relpath(path))


def main():
    root = os.path.join(os.path.dirname(__file__), "..", "fixtures")
    os.makedirs(root, exist_ok=True)
    for path in write_fixtures(root):
        print("wrote", os.path.relpath(path))
    ab = RankedAlphabet.letters("a", "b")
    forests = {
        "single_a": "a",
        "single_b": "b",
        "two_components": "a(b) + b",
    }
    for name, term in forests.items():
        path = os.path.join(root, f"{name}.forest")
        save_forest(parse_term(term, ab), path)
        print("wrote", os.path.relpath(path))
    write_expected(root)


if __name__ == "__main__":
    main()
