"""AST node types plus the pretty-printer used for the round-trip check.

Type annotations added by the resolver live in `ctype` fields that are
excluded from structural equality, so two independent parses of the same
source compare equal.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

# ---- types ----


@dataclass(frozen=True)
class CType:
    kind: str  # "int" | "void" | "voidptr" | "structptr"
    struct: Optional[str] = None

    def render(self) -> str:
        if self.kind == "int":
            return "int"
        if self.kind == "void":
            return "void"
        if self.kind == "voidptr":
            return "void*"
        return f"struct {self.struct}*"

    @property
    def is_pointer(self) -> bool:
        return self.kind in ("voidptr", "structptr")


INT = CType("int")
VOID = CType("void")
VOIDPTR = CType("voidptr")


def structptr(name: str) -> CType:
    return CType("structptr", name)


# ---- expressions ----


@dataclass(eq=True)
class Expr:
    pass


def _anno():
    return field(default=None, compare=False, repr=False)


@dataclass
class IntLit(Expr):
    value: int
    ctype: Optional[CType] = _anno()


@dataclass
class NullLit(Expr):
    ctype: Optional[CType] = _anno()


@dataclass
class Var(Expr):
    name: str
    ctype: Optional[CType] = _anno()


@dataclass
class FieldAccess(Expr):
    base: Expr
    fieldname: str
    ctype: Optional[CType] = _anno()
    struct_name: Optional[str] = _anno()  # struct of the base pointer


@dataclass
class Unary(Expr):
    op: str  # "!"
    operand: Expr
    ctype: Optional[CType] = _anno()


@dataclass
class Binary(Expr):
    op: str  # == != < <= > >= + - && ||
    left: Expr
    right: Expr
    ctype: Optional[CType] = _anno()


@dataclass
class Assign(Expr):
    target: Expr  # Var or FieldAccess
    value: Expr
    ctype: Optional[CType] = _anno()


@dataclass
class Call(Expr):
    fname: str
    args: list[Expr]
    ctype: Optional[CType] = _anno()


@dataclass
class Malloc(Expr):
    struct: str  # malloc(sizeof(struct S)); any (struct S*) cast is discarded
    ctype: Optional[CType] = _anno()


# ---- statements ----


@dataclass
class Stmt:
    pass


@dataclass
class ExprStmt(Stmt):
    expr: Expr


@dataclass
class If(Stmt):
    cond: Expr
    then: Stmt
    els: Optional[Stmt]


@dataclass
class While(Stmt):
    cond: Expr
    body: Stmt


@dataclass
class Return(Stmt):
    value: Optional[Expr]


@dataclass
class Block(Stmt):
    stmts: list[Stmt]


# ---- top level ----


@dataclass
class StructDef:
    name: str
    fields: list[tuple[str, CType]]


@dataclass
class FunctionDef:
    name: str
    return_type: CType
    params: list[tuple[str, CType]]
    locals: list[tuple[str, CType]]
    body: list[Stmt]


@dataclass
class Program:
    structs: list[StructDef]
    functions: list[FunctionDef]


# ---- pretty printer ----

_BINARY_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 3, "<=": 3, ">": 3, ">=": 3, "+": 4, "-": 4}


def render_expr(e: Expr, prec: int = 0) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, NullLit):
        return "NULL"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, FieldAccess):
        return f"{render_expr(e.base, 6)}->{e.fieldname}"
    if isinstance(e, Unary):
        return f"!{render_expr(e.operand, 5)}"
    if isinstance(e, Binary):
        p = _BINARY_PREC[e.op]
        s = f"{render_expr(e.left, p)} {e.op} {render_expr(e.right, p + 1)}"
        return f"({s})" if p < prec else s
    if isinstance(e, Assign):
        s = f"{render_expr(e.target, 6)} = {render_expr(e.value, 0)}"
        return f"({s})" if prec > 0 else s
    if isinstance(e, Call):
        return f"{e.fname}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, Malloc):
        return f"malloc(sizeof(struct {e.struct}))"
    raise TypeError(f"unknown expression node {e!r}")


def render_stmt(s: Stmt, indent: int = 1) -> str:
    pad = "  " * indent
    if isinstance(s, ExprStmt):
        return f"{pad}{render_expr(s.expr)};"
    if isinstance(s, If):
        if s.els is not None:
            # brace the then-branch so a dangling else cannot rebind on re-parse
            out = f"{pad}if ({render_expr(s.cond)})\n{_render_braced(s.then, indent)}"
            out += f"\n{pad}else\n{render_stmt(s.els, indent + 1)}"
        else:
            out = f"{pad}if ({render_expr(s.cond)})\n{render_stmt(s.then, indent + 1)}"
        return out
    if isinstance(s, While):
        return f"{pad}while ({render_expr(s.cond)})\n{render_stmt(s.body, indent + 1)}"
    if isinstance(s, Return):
        if s.value is None:
            return f"{pad}return;"
        return f"{pad}return {render_expr(s.value)};"
    if isinstance(s, Block):
        inner = "\n".join(render_stmt(x, indent + 1) for x in s.stmts)
        if not inner:
            return f"{pad}{{\n{pad}}}"
        return f"{pad}{{\n{inner}\n{pad}}}"
    raise TypeError(f"unknown statement node {s!r}")


def _render_braced(s: Stmt, indent: int) -> str:
    """Render a statement inside braces (the parser unwraps single-statement
    blocks, so the extra braces do not change the re-parsed tree)."""
    if isinstance(s, Block):
        return render_stmt(s, indent)
    pad = "  " * indent
    return f"{pad}{{\n{render_stmt(s, indent + 1)}\n{pad}}}"


def render_program(prog: Program) -> str:
    parts = []
    for sd in prog.structs:
        lines = [f"struct {sd.name} {{"]
        for fname, ftype in sd.fields:
            lines.append(f"  {ftype.render()} {fname};")
        lines.append("};")
        parts.append("\n".join(lines))
    for fd in prog.functions:
        ps = ", ".join(f"{t.render()} {n}" for n, t in fd.params)
        lines = [f"{fd.return_type.render()} {fd.name}({ps}) {{"]
        for n, t in fd.locals:
            lines.append(f"  {t.render()} {n};")
        for st in fd.body:
            lines.append(render_stmt(st, 1))
        lines.append("}")
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + "\n"
