"""Lexer / parser / resolver tests for the C fragment frontend."""
import random
import re

import pytest

from specminer.frontend import (
    DuplicateDefinition,
    IllegalCharacter,
    ParseError,
    TypeMismatch,
    UnknownField,
    UnknownIdentifier,
    load_program,
    nodes as N,
    parse,
    tokenize,
)


# ---------------------------------------------------------------- lexer

def test_struct_keyword_count_in_append_matches_scan(dll_src):
    """Oracle written against the raw bytes: the `append` function uses the
    `struct` keyword exactly 6 times (return type, param, two locals, cast,
    sizeof). An independent regex scan pins the number; the lexer must agree.
    """
    snippet = dll_src[dll_src.index("struct List* append"):dll_src.index("int length")]
    scanned = len(re.findall(r"\bstruct\b", snippet))
    assert scanned == 6  # frozen by hand-count
    lexed = [t for t in tokenize(snippet) if t.kind == "kw" and t.text == "struct"]
    assert len(lexed) == scanned


def test_token_kinds_and_arrow():
    toks = tokenize("while (x->next != NULL) x = x->next;")
    kinds = [(t.kind, t.text) for t in toks if t.kind != "eof"]
    assert ("kw", "while") in kinds
    assert ("kw", "NULL") in kinds
    assert ("ident", "x") in kinds
    assert ("punct", "->") in kinds
    assert ("punct", "!=") in kinds


def test_comments_and_preprocessor_lines_are_skipped():
    src = "#include <stdlib.h>\n// line comment\nint /* inline */ x\n"
    toks = tokenize(src)
    texts = [t.text for t in toks if t.kind != "eof"]
    assert texts == ["int", "x"]


def test_number_then_ident_lexes_without_error():
    # "3x" is two tokens for the lexer; rejecting it is the parser's job
    toks = tokenize("3x")
    assert [(t.kind, t.text) for t in toks[:2]] == [("int", "3"), ("ident", "x")]
    with pytest.raises(ParseError):
        parse("int f(int a) { return 3x; }")


def test_illegal_character():
    with pytest.raises(IllegalCharacter) as ei:
        tokenize("int $;")
    assert ei.value.ch == "$"


def test_local_declarations_must_lead_the_body():
    with pytest.raises(ParseError):
        parse("int f(int a) { a = a + 1; int t; return a; }")
    with pytest.raises(ParseError):  # and only at function level
        parse("int f(int a) { if (a > 0) { int t; } return a; }")
    with pytest.raises(ParseError):  # no initializer form; declare, then assign
        parse("int f(int a) { int t = 3; return t; }")


# ---------------------------------------------------------------- parser

def test_append_signature(dll_index):
    f = dll_index.functions["append"]
    assert f.return_type == N.structptr("List")
    assert f.params == [("list", N.structptr("List")), ("d", N.VOIDPTR)]
    assert [n for n, _t in f.locals] == ["new_node", "final"]


def test_list_struct_fields(dll_index):
    sd = dll_index.structs["List"]
    assert sd.fields == [
        ("data", N.VOIDPTR),
        ("next", N.structptr("List")),
        ("prev", N.structptr("List")),
    ]
    assert dll_index.struct_fields("List")["next"] == N.structptr("List")


def test_operator_precedence_via_rerender():
    """|| binds loosest, then &&, then comparisons, then + -, then unary !.
    Re-rendering drops only redundant parentheses, so the canonical string
    exposes the parse shape."""
    src = "int f(int a, int b, int c) { return a + b < c && !(a == b) || c > 0; }"
    prog = parse(src)
    ret = prog.functions[0].body[0]
    assert isinstance(ret, N.Return)
    assert isinstance(ret.value, N.Binary) and ret.value.op == "||"
    assert ret.value.left.op == "&&"
    assert N.render_expr(ret.value) == "a + b < c && !(a == b) || c > 0"


def test_malloc_with_cast_round_trips():
    src = ("struct S { int a; };\n"
           "struct S* f() { struct S* p; p = (struct S*) malloc(sizeof(struct S)); return p; }")
    prog = parse(src)
    assign = prog.functions[0].body[0].expr
    assert isinstance(assign.value, N.Malloc) and assign.value.struct == "S"
    assert parse(N.render_program(prog)) == prog


def test_corpus_round_trips(corpus_dir):
    for name in ("dll.c", "branch.c", "setter.c"):
        src = (corpus_dir / name).read_text()
        prog = parse(src)
        again = parse(N.render_program(prog))
        assert again == prog, name


def _rand_expr(rng, depth):
    names = ["a", "b", "t"]
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.5:
            return N.IntLit(rng.randrange(0, 10))
        return N.Var(rng.choice(names))
    roll = rng.random()
    if roll < 0.15:
        return N.Unary("!", _rand_expr(rng, depth - 1))
    if roll < 0.25:
        return N.Call("g", [_rand_expr(rng, depth - 1)])
    op = rng.choice(["+", "-", "<", "<=", ">", ">=", "==", "!=", "&&", "||"])
    return N.Binary(op, _rand_expr(rng, depth - 1), _rand_expr(rng, depth - 1))


def _rand_stmt(rng, depth):
    roll = rng.random()
    if roll < 0.35 or depth <= 0:
        return N.ExprStmt(N.Assign(N.Var("t"), _rand_expr(rng, 2)))
    if roll < 0.55:
        els = _rand_stmt(rng, depth - 1) if rng.random() < 0.5 else None
        return N.If(_rand_expr(rng, 2), _rand_stmt(rng, depth - 1), els)
    if roll < 0.7:
        return N.While(_rand_expr(rng, 2), _rand_stmt(rng, depth - 1))
    if roll < 0.85:
        # parser unwraps one-statement blocks, so always emit two
        return N.Block([_rand_stmt(rng, 0), _rand_stmt(rng, 0)])
    return N.Return(_rand_expr(rng, 2))


def test_random_ast_round_trips():
    rng = random.Random(1337)
    for i in range(40):
        body = [_rand_stmt(rng, 3) for _ in range(rng.randrange(1, 4))]
        body.append(N.Return(N.Var("t")))
        prog = N.Program(
            structs=[],
            functions=[N.FunctionDef("f", N.INT,
                                     [("a", N.INT), ("b", N.INT)],
                                     [("t", N.INT)], body)],
        )
        text = N.render_program(prog)
        assert parse(text) == prog, f"iteration {i}:\n{text}"


# ---------------------------------------------------------------- resolver

def test_observer_and_modifier_sets(dll_index, branch_index, setter_index):
    # every non-void function can be used as an observer; every function is
    # a potential modifier
    assert dll_index.observers == {"append", "find", "head", "init",
                                   "last", "length", "reverse"}
    assert dll_index.modifiers == dll_index.observers
    assert branch_index.observers == {"branch"}
    assert setter_index.observers == set()
    assert setter_index.modifiers == {"set_val"}


def test_pointer_conversion_warning(dll_index):
    # `last` funnels head's void* result into a struct List* return slot
    assert any("last" in w and "void*" in w for w in dll_index.warnings)


def test_unknown_identifier():
    with pytest.raises(UnknownIdentifier):
        load_program("int f(int a) { return b; }")


def test_unknown_field():
    with pytest.raises(UnknownField):
        load_program("struct S { int a; };\nint f(struct S* s) { return s->b; }")


def test_arrow_on_int_is_a_type_error():
    with pytest.raises(TypeMismatch):
        load_program("int f(int a) { if (a->x > 0) return 1; return 0; }")


def test_call_arity_checked():
    with pytest.raises(TypeMismatch):
        load_program("int g(int a) { return a; }\nint f(int a) { return g(a, a); }")


def test_duplicate_function():
    with pytest.raises(DuplicateDefinition):
        load_program("int f(int a) { return a; }\nint f(int b) { return b; }")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
