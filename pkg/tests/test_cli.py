"""Command-line interface tests: flags, formats, exit codes.

Everything here drives main() in-process; the byte-identity check across
real subprocesses lives in the acceptance suite.
"""
import json
import pathlib
import re

import pytest

from specminer.cli import (
    EXIT_BUDGET,
    EXIT_OK,
    EXIT_SOURCE,
    EXIT_USAGE,
    MAX_PATTERNS_ENV,
    main,
)

CORPUS = pathlib.Path(__file__).parent / "corpus"
DLL = str(CORPUS / "dll.c")
BRANCH = str(CORPUS / "branch.c")


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------- success

def test_text_output(capsys):
    code, out, err = run(capsys, DLL, "-f", "append")
    assert code == EXIT_OK
    assert "length(list) = 2" in out
    assert "ret = list'" in out
    assert re.search(r"elapsed: \d+\.\d{3}s", err)


def test_elapsed_goes_to_stderr_even_for_json(capsys):
    code, out, err = run(capsys, DLL, "-f", "append", "--format", "json")
    assert code == EXIT_OK
    assert "elapsed" not in out
    assert re.search(r"elapsed: \d+\.\d{3}s", err)


def test_json_document_shape(capsys):
    code, out, _err = run(capsys, DLL, "-f", "append", "--format", "json")
    doc = json.loads(out)
    assert doc["tool"] == "specminer"
    assert doc["modifier"] == "append"
    assert doc["limits"]["unroll"] == 1
    assert doc["stats"] == {"finalPatterns": 3, "errorPatterns": 0,
                            "truncatedPaths": 1}
    assert len(doc["axioms"]) == 3
    first = doc["axioms"][0]
    assert first["pre"][0]["rendered"] == "length(list) = 2"
    assert first["ret"]["rendered"] == "ret = list'"
    assert first["approx"] is False


def test_text_and_json_agree_on_equations(capsys):
    _c, text_out, _e = run(capsys, DLL, "-f", "init")
    _c, json_out, _e = run(capsys, DLL, "-f", "init", "--format", "json")
    doc = json.loads(json_out)
    for ax in doc["axioms"]:
        for eq in ax["pre"] + ax["post"] + ([ax["ret"]] if ax["ret"] else []):
            assert eq["rendered"] in text_out


def test_repeat_runs_are_identical(capsys):
    _c, out1, _e = run(capsys, DLL, "-f", "reverse", "--format", "json")
    _c, out2, _e = run(capsys, DLL, "-f", "reverse", "--format", "json")
    assert out1 == out2


def test_unroll_flag(capsys):
    code, out, _err = run(capsys, DLL, "-f", "append", "--unroll", "2")
    assert code == EXIT_OK
    assert "length(list) = 3" in out  # the unroll-2-only input class


def test_dump_patterns_text(capsys):
    code, out, _err = run(capsys, DLL, "-f", "append", "--dump-patterns")
    assert code == EXIT_OK
    assert "-- pattern p0" in out
    assert "<memcond> list != NULL /\\ list->next = NULL </memcond>" in out
    assert out.index("-- pattern") < out.index("length(list) = 2")


def test_dump_patterns_json(capsys):
    _c, out, _e = run(capsys, DLL, "-f", "append", "--dump-patterns",
                      "--format", "json")
    doc = json.loads(out)
    assert [p["id"] for p in doc["patterns"]] == ["p0", "p1", "p2"]
    assert doc["patterns"][0]["rendered"].startswith("<k>")


def test_observers_whitelist(capsys):
    code, out, _err = run(capsys, DLL, "-f", "append", "--observers", "length")
    assert code == EXIT_OK
    assert "length(list) = 0" in out
    assert "find(" not in out and "reverse(" not in out


def test_seed_label_prefixes_symbols_once(capsys):
    code, out, _err = run(capsys, DLL, "-f", "append", "--dump-patterns",
                          "--seed-label", "run1")
    assert code == EXIT_OK
    assert "run1:list->next != NULL" in out
    assert "run1:run1" not in out
    # equation arguments are parameter names, not symbol displays
    assert "length(list) = 2" in out


def test_lazy_aliasing_flag_runs(capsys, tmp_path):
    src = tmp_path / "touch.c"
    src.write_text(
        "struct Node { int v; struct Node* nxt; };\n"
        "int touch(struct Node* a, struct Node* b) {\n"
        "  a->v = 1;\n  b->v = 2;\n  return a->v;\n}\n")
    code, out, _err = run(capsys, str(src), "-f", "touch", "--lazy-aliasing")
    assert code == EXIT_OK
    # the aliased world surfaces as a second return class
    assert "ret = 1" in out and "ret = 2" in out


def test_no_axioms_message(capsys, tmp_path):
    # a modifier with untraceable effects and no observers to phrase them
    src = tmp_path / "v.c"
    src.write_text("void nop(int a) { }\n")
    code, out, _err = run(capsys, str(src), "-f", "nop")
    assert code == EXIT_OK
    assert "ret = void" in out


# ---------------------------------------------------------------- exit 2

def test_parse_error_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.c"
    bad.write_text("int f( {\n")
    code, _out, err = run(capsys, str(bad), "-f", "f")
    assert code == EXIT_SOURCE
    assert str(bad) in err


def test_lex_error_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.c"
    bad.write_text("int f(int a) { return a $ 1; }\n")
    assert run(capsys, str(bad), "-f", "f")[0] == EXIT_SOURCE


def test_resolve_error_exits_2(capsys, tmp_path):
    bad = tmp_path / "bad.c"
    bad.write_text("int f(int a) { return b; }\n")
    assert run(capsys, str(bad), "-f", "f")[0] == EXIT_SOURCE


# ---------------------------------------------------------------- exit 64

def test_missing_file_exits_64(capsys):
    assert run(capsys, "/nonexistent.c", "-f", "f")[0] == EXIT_USAGE


def test_unknown_function_exits_64(capsys):
    code, _out, err = run(capsys, DLL, "-f", "nope")
    assert code == EXIT_USAGE
    assert "nope" in err


def test_unknown_observer_exits_64(capsys):
    assert run(capsys, DLL, "-f", "append", "--observers", "nope")[0] == EXIT_USAGE


def test_bad_unroll_exits_64(capsys):
    code, _out, err = run(capsys, DLL, "-f", "append", "--unroll", "0")
    assert code == EXIT_USAGE
    assert err.startswith("usage: specminer")  # synopsis precedes the error
    assert "--unroll must be at least 1" in err


def test_empty_observers_exits_64(capsys):
    assert run(capsys, DLL, "-f", "append", "--observers", " , ")[0] == EXIT_USAGE


def test_unknown_flag_exits_64(capsys):
    assert run(capsys, DLL, "-f", "append", "--nope")[0] == EXIT_USAGE


def test_missing_function_flag_exits_64(capsys):
    assert run(capsys, DLL)[0] == EXIT_USAGE


def test_bad_env_budget_exits_64(capsys, monkeypatch):
    monkeypatch.setenv(MAX_PATTERNS_ENV, "abc")
    assert run(capsys, BRANCH, "-f", "branch")[0] == EXIT_USAGE
    monkeypatch.setenv(MAX_PATTERNS_ENV, "0")
    assert run(capsys, BRANCH, "-f", "branch")[0] == EXIT_USAGE


# ---------------------------------------------------------------- exit 3

def test_pattern_budget_exits_3(capsys, monkeypatch):
    monkeypatch.setenv(MAX_PATTERNS_ENV, "1")
    code, _out, err = run(capsys, BRANCH, "-f", "branch")
    assert code == EXIT_BUDGET
    assert "budget" in err


def test_generous_env_budget_is_fine(capsys, monkeypatch):
    monkeypatch.setenv(MAX_PATTERNS_ENV, "4096")
    assert run(capsys, BRANCH, "-f", "branch")[0] == EXIT_OK


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
