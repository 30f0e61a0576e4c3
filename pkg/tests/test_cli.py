import json
import os

import pytest

from forestalgebra.cli import main

from conftest import fixture_path


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_validate_forest(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("single_a.forest"))
    assert code == 0
    assert "ok" in out


def test_validate_algebra(capsys):
    code, out, _ = run(capsys, "validate", fixture_path("contains_a.alg"), "--samples", "40")
    assert code == 0


def test_validate_missing_file(capsys):
    code, _, err = run(capsys, "validate", "no_such_file.forest")
    assert code == 2
    assert "error" in err


def test_eval_rejects_letter_forest(capsys):
    # eval consumes forests over element labels, not the letter alphabet
    code, _, err = run(
        capsys, "eval", fixture_path("contains_a.alg"), fixture_path("single_a.forest")
    )
    assert code == 2
    assert "error" in err


def test_eval_element_forest(tmp_path, capsys):
    # forests over element labels evaluate directly
    from forestalgebra.algebra import graph_apply, load_algebra
    from forestalgebra.notation import save_forest

    pres = load_algebra(fixture_path("contains_a.alg"))
    path = os.path.join(tmp_path, "g.forest")
    save_forest(graph_apply(pres, "o1", "z0"), path)
    code, out, _ = run(capsys, "eval", fixture_path("contains_a.alg"), path)
    assert code == 0
    assert out.strip() == "o0"


def test_tables_deterministic(capsys):
    code1, out1, _ = run(capsys, "--json", "tables", fixture_path("contains_a.alg"))
    code2, out2, _ = run(capsys, "--json", "tables", fixture_path("contains_a.alg"))
    assert code1 == code2 == 0
    assert out1 == out2
    data = json.loads(out1)
    assert data["zero"] == "z0"
    assert data["vcomp"]["o1,z1"] == "o1"


def test_K(capsys):
    code, out, _ = run(capsys, "K", fixture_path("contains_a.alg"))
    assert code == 0
    assert out.strip() == "K = 18"


def test_check_exit_codes(capsys):
    code, _, _ = run(capsys, "check", "bisim-invariance", fixture_path("contains_a.alg"))
    assert code == 0
    code, out, _ = run(capsys, "check", "ef", fixture_path("two_a.alg"))
    assert code == 1
    code, _, _ = run(capsys, "check", "cef", "--k", "2", fixture_path("two_a.alg"))
    assert code == 0
    code, _, _ = run(capsys, "check", "cef", "--k", "1", fixture_path("inf_branch.alg"))
    assert code == 1


def test_check_cef_requires_k(capsys):
    code, _, err = run(capsys, "check", "cef", fixture_path("contains_a.alg"))
    assert code == 2
    assert "cef-auto" in err


def test_check_cef_auto_prints_K(capsys):
    code, out, _ = run(capsys, "check", "cef-auto", fixture_path("contains_a.alg"))
    assert code == 0
    assert "K = 18" in out


def test_check_json_shape(capsys):
    code, out, _ = run(capsys, "--json", "check", "ef", fixture_path("two_a.alg"))
    assert code == 1
    data = json.loads(out)
    assert data["check"] == "ef"
    assert data["verdict"] == "fail"
    assert data["failures"]
    first = data["failures"][0]
    assert set(first) == {"equation", "instance", "lhs", "rhs"}


def test_check_json_deterministic(capsys):
    runs = [
        run(capsys, "--json", "check", "cef", "--k", "2", fixture_path("two_a.alg"))[1]
        for _ in range(2)
    ]
    assert runs[0] == runs[1]


def test_modelcheck_semantics_flag(capsys):
    code, out, _ = run(
        capsys,
        "modelcheck",
        "--formula",
        "E1(Pa)",
        "--forest",
        fixture_path("single_a.forest"),
    )
    assert code == 0 and out.strip() == "true"
    code, out, _ = run(
        capsys,
        "modelcheck",
        "--formula",
        "E1(Pa)",
        "--forest",
        fixture_path("single_a.forest"),
        "--semantics",
        "literal",
    )
    assert code == 1 and out.strip() == "false"


def test_modelcheck_bad_formula(capsys):
    code, _, err = run(
        capsys, "modelcheck", "--formula", "Pa", "--forest", fixture_path("single_a.forest")
    )
    assert code == 2
    assert "tree formula where forest formula expected" in err


def test_equiv_and_bisim(capsys):
    code, out, _ = run(
        capsys,
        "equiv",
        fixture_path("single_a.forest"),
        fixture_path("single_b.forest"),
        "--k",
        "1",
        "--m",
        "1",
    )
    assert code == 1
    code, out, _ = run(
        capsys,
        "bisim",
        fixture_path("single_a.forest"),
        fixture_path("single_a.forest"),
    )
    assert code == 0 and out.strip() == "true"


def test_types_output(capsys):
    code, out, _ = run(
        capsys, "types", fixture_path("two_components.forest"), "--k", "2", "--m", "1"
    )
    assert code == 0
    assert "forest:" in out and "root 0:" in out
