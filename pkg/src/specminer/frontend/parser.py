"""Recursive-descent parser for the C fragment (see docs/grammar.md).

Precedence, tightest first: unary ! > + - > comparisons > && > ||;
assignment is a (right-associative) expression and binds loosest. Local
declarations must precede statements in a function body. A single-statement
brace block is unwrapped to the statement itself.
"""

from __future__ import annotations

from .lexer import Token, tokenize
from . import nodes as N


class ParseError(Exception):
    def __init__(self, message: str, line: int, col: int, expected=None):
        super().__init__(f"{message} at {line}:{col}")
        self.line = line
        self.col = col
        self.expected = expected or []


class _Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.pos = 0

    # -- token helpers --

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.pos + ahead, len(self.toks) - 1)]

    def at(self, kind: str, text: str | None = None, ahead: int = 0) -> bool:
        t = self.peek(ahead)
        return t.kind == kind and (text is None or t.text == text)

    def take(self) -> Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, text: str | None = None) -> Token:
        t = self.peek()
        if not self.at(kind, text):
            want = text if text is not None else kind
            raise ParseError(f"expected {want!r}, found {t.text or t.kind!r}", t.line, t.col, [want])
        return self.take()

    # -- top level --

    def program(self) -> N.Program:
        structs, functions = [], []
        while not self.at("eof"):
            if self.at("kw", "struct") and self.at("punct", "{", ahead=2):
                structs.append(self.struct_def())
            else:
                functions.append(self.function_def())
        return N.Program(structs, functions)

    def struct_def(self) -> N.StructDef:
        self.expect("kw", "struct")
        name = self.expect("ident").text
        self.expect("punct", "{")
        fields = []
        while not self.at("punct", "}"):
            ftype = self.type_name(allow_void=False)
            fname = self.expect("ident").text
            self.expect("punct", ";")
            fields.append((fname, ftype))
        if not fields:
            t = self.peek()
            raise ParseError(f"struct {name} must declare at least one field", t.line, t.col)
        self.expect("punct", "}")
        self.expect("punct", ";")
        return N.StructDef(name, fields)

    def type_name(self, allow_void: bool) -> N.CType:
        t = self.peek()
        if self.at("kw", "int"):
            self.take()
            return N.INT
        if self.at("kw", "void"):
            self.take()
            if self.at("punct", "*"):
                self.take()
                return N.VOIDPTR
            if allow_void:
                return N.VOID
            raise ParseError("plain void is only a return type", t.line, t.col)
        if self.at("kw", "struct"):
            self.take()
            sname = self.expect("ident").text
            self.expect("punct", "*")
            return N.structptr(sname)
        raise ParseError(f"expected a type, found {t.text!r}", t.line, t.col, ["int", "void", "struct"])

    def function_def(self) -> N.FunctionDef:
        rtype = self.type_name(allow_void=True)
        name = self.expect("ident").text
        self.expect("punct", "(")
        params = []
        if not self.at("punct", ")"):
            while True:
                ptype = self.type_name(allow_void=False)
                pname = self.expect("ident").text
                params.append((pname, ptype))
                if self.at("punct", ","):
                    self.take()
                    continue
                break
        self.expect("punct", ")")
        self.expect("punct", "{")
        locals_ = []
        while self.at("kw", "int") or self.at("kw", "void") or (
            self.at("kw", "struct") and not self.at("punct", "{", ahead=2)
        ):
            ltype = self.type_name(allow_void=False)
            lname = self.expect("ident").text
            self.expect("punct", ";")
            locals_.append((lname, ltype))
        body = []
        while not self.at("punct", "}"):
            body.append(self.statement())
        self.expect("punct", "}")
        return N.FunctionDef(name, rtype, params, locals_, body)

    # -- statements --

    def statement(self) -> N.Stmt:
        if self.at("punct", "{"):
            self.take()
            stmts = []
            while not self.at("punct", "}"):
                stmts.append(self.statement())
            self.expect("punct", "}")
            if len(stmts) == 1:
                return stmts[0]
            return N.Block(stmts)
        if self.at("kw", "if"):
            self.take()
            self.expect("punct", "(")
            cond = self.expression()
            self.expect("punct", ")")
            then = self.statement()
            els = None
            if self.at("kw", "else"):
                self.take()
                els = self.statement()
            return N.If(cond, then, els)
        if self.at("kw", "while"):
            self.take()
            self.expect("punct", "(")
            cond = self.expression()
            self.expect("punct", ")")
            body = self.statement()
            return N.While(cond, body)
        if self.at("kw", "return"):
            self.take()
            if self.at("punct", ";"):
                self.take()
                return N.Return(None)
            value = self.expression()
            self.expect("punct", ";")
            return N.Return(value)
        e = self.expression()
        self.expect("punct", ";")
        return N.ExprStmt(e)

    # -- expressions --

    def expression(self) -> N.Expr:
        return self.assignment()

    def assignment(self) -> N.Expr:
        left = self.logical_or()
        if self.at("punct", "="):
            t = self.peek()
            self.take()
            if not isinstance(left, (N.Var, N.FieldAccess)):
                raise ParseError("assignment target must be a variable or field", t.line, t.col)
            value = self.assignment()
            return N.Assign(left, value)
        return left

    def logical_or(self) -> N.Expr:
        e = self.logical_and()
        while self.at("punct", "||"):
            self.take()
            e = N.Binary("||", e, self.logical_and())
        return e

    def logical_and(self) -> N.Expr:
        e = self.comparison()
        while self.at("punct", "&&"):
            self.take()
            e = N.Binary("&&", e, self.comparison())
        return e

    def comparison(self) -> N.Expr:
        e = self.arith()
        while self.peek().kind == "punct" and self.peek().text in ("==", "!=", "<", "<=", ">", ">="):
            op = self.take().text
            e = N.Binary(op, e, self.arith())
        return e

    def arith(self) -> N.Expr:
        e = self.unary()
        while self.peek().kind == "punct" and self.peek().text in ("+", "-"):
            op = self.take().text
            e = N.Binary(op, e, self.unary())
        return e

    def unary(self) -> N.Expr:
        if self.at("punct", "!"):
            self.take()
            return N.Unary("!", self.unary())
        return self.postfix()

    def postfix(self) -> N.Expr:
        e = self.primary()
        while self.at("punct", "->"):
            self.take()
            fname = self.expect("ident").text
            e = N.FieldAccess(e, fname)
        return e

    def primary(self) -> N.Expr:
        t = self.peek()
        if t.kind == "int":
            self.take()
            return N.IntLit(int(t.text))
        if self.at("kw", "NULL"):
            self.take()
            return N.NullLit()
        if self.at("punct", "("):
            # "(struct S*) malloc(sizeof(struct S))" — cast parsed, discarded
            if self.at("kw", "struct", ahead=1):
                self.take()
                self.expect("kw", "struct")
                cast_struct = self.expect("ident").text
                self.expect("punct", "*")
                self.expect("punct", ")")
                m = self.malloc_expr()
                if m.struct != cast_struct:
                    raise ParseError(
                        f"malloc cast (struct {cast_struct}*) does not match sizeof(struct {m.struct})",
                        t.line, t.col,
                    )
                return m
            self.take()
            e = self.expression()
            self.expect("punct", ")")
            return e
        if t.kind == "ident":
            if t.text == "malloc":
                return self.malloc_expr()
            if self.at("punct", "(", ahead=1):
                self.take()
                self.take()
                args = []
                if not self.at("punct", ")"):
                    while True:
                        args.append(self.expression())
                        if self.at("punct", ","):
                            self.take()
                            continue
                        break
                self.expect("punct", ")")
                return N.Call(t.text, args)
            self.take()
            return N.Var(t.text)
        raise ParseError(f"unexpected token {t.text or t.kind!r}", t.line, t.col)

    def malloc_expr(self) -> N.Malloc:
        self.expect("ident", "malloc")
        self.expect("punct", "(")
        tok = self.expect("ident")
        if tok.text != "sizeof":
            raise ParseError("malloc argument must be sizeof(struct S)", tok.line, tok.col)
        self.expect("punct", "(")
        self.expect("kw", "struct")
        sname = self.expect("ident").text
        self.expect("punct", ")")
        self.expect("punct", ")")
        return N.Malloc(sname)


def parse(src: str) -> N.Program:
    toks = tokenize(src)
    if all(t.kind == "eof" for t in toks):
        return N.Program([], [])
    return _Parser(toks).program()
