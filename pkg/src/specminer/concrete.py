"""Big-step concrete interpreter for the same language fragment.

Used as a ground-truth oracle in the tests: run a function on a fully
concrete heap and compare against what the symbolic engine claims. The
value domain is deliberately plain — Python ints, `None` for NULL, `CAddr`
for heap references, and arbitrary hashable tokens (strings in practice)
for opaque data.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .frontend import nodes


@dataclass(frozen=True)
class CAddr:
    oid: int

    def __repr__(self):
        return f"@{self.oid}"


class CUndefType:
    def __repr__(self):
        return "cundef"


CUNDEF = CUndefType()


class NullDeref(Exception):
    pass


class UndefRead(Exception):
    pass


class NonTermination(Exception):
    pass


@dataclass
class CObject:
    struct_name: str
    fields: dict


class _Return(Exception):
    def __init__(self, value):
        self.value = value


class _Interp:
    def __init__(self, index, heap: dict, max_steps: int):
        self.index = index
        self.heap = heap  # CAddr -> CObject
        self.max_steps = max_steps
        self.steps = 0
        self.next_oid = 1 + max((a.oid for a in heap), default=0)

    def _tick(self):
        self.steps += 1
        if self.steps > self.max_steps:
            raise NonTermination(f"exceeded {self.max_steps} steps")

    def call(self, fname: str, args: list):
        f = self.index.functions[fname]
        if len(args) != len(f.params):
            raise TypeError(f"arity mismatch calling {fname}")
        env = {p: v for (p, _t), v in zip(f.params, args)}
        for lname, _lt in f.locals:
            env[lname] = CUNDEF
        try:
            for s in f.body:
                self.stmt(s, env)
        except _Return as r:
            return r.value
        return CUNDEF

    def stmt(self, s, env):
        self._tick()
        if isinstance(s, nodes.Block):
            for x in s.stmts:
                self.stmt(x, env)
        elif isinstance(s, nodes.ExprStmt):
            self.expr(s.expr, env)
        elif isinstance(s, nodes.If):
            if self.truth(self.expr(s.cond, env)):
                self.stmt(s.then, env)
            elif s.els is not None:
                self.stmt(s.els, env)
        elif isinstance(s, nodes.While):
            while True:
                self._tick()
                if not self.truth(self.expr(s.cond, env)):
                    break
                self.stmt(s.body, env)
        elif isinstance(s, nodes.Return):
            raise _Return(self.expr(s.value, env) if s.value is not None else CUNDEF)
        else:
            raise TypeError(f"unknown statement {s!r}")

    def truth(self, v) -> bool:
        if v is CUNDEF:
            raise UndefRead("condition on undefined value")
        if v is None:
            return False
        if isinstance(v, int):
            return v != 0
        return True  # address or data token

    def _deref(self, v) -> CObject:
        if v is CUNDEF:
            raise UndefRead("dereference of undefined value")
        if v is None:
            raise NullDeref("NULL dereference")
        if not isinstance(v, CAddr):
            raise TypeError(f"dereference of non-address {v!r}")
        return self.heap[v]

    def expr(self, e, env):
        self._tick()
        if isinstance(e, nodes.IntLit):
            return e.value
        if isinstance(e, nodes.NullLit):
            return None
        if isinstance(e, nodes.Var):
            v = env[e.name]
            if v is CUNDEF:
                raise UndefRead(f"read of undefined variable '{e.name}'")
            return v
        if isinstance(e, nodes.FieldAccess):
            obj = self._deref(self.expr(e.base, env))
            v = obj.fields.get(e.fieldname, CUNDEF)
            if v is CUNDEF:
                raise UndefRead(f"read of uninitialized field '{e.fieldname}'")
            return v
        if isinstance(e, nodes.Unary):
            return 0 if self.truth(self.expr(e.operand, env)) else 1
        if isinstance(e, nodes.Binary):
            if e.op == "&&":
                if not self.truth(self.expr(e.left, env)):
                    return 0
                return 1 if self.truth(self.expr(e.right, env)) else 0
            if e.op == "||":
                if self.truth(self.expr(e.left, env)):
                    return 1
                return 1 if self.truth(self.expr(e.right, env)) else 0
            l = self.expr(e.left, env)
            r = self.expr(e.right, env)
            if l is CUNDEF or r is CUNDEF:
                raise UndefRead("operand is undefined")
            if e.op == "+":
                return l + r
            if e.op == "-":
                return l - r
            if e.op == "==":
                return 1 if l == r else 0
            if e.op == "!=":
                return 1 if l != r else 0
            if e.op == "<":
                return 1 if l < r else 0
            if e.op == "<=":
                return 1 if l <= r else 0
            if e.op == ">":
                return 1 if l > r else 0
            if e.op == ">=":
                return 1 if l >= r else 0
            raise ValueError(e.op)
        if isinstance(e, nodes.Assign):
            v = self.expr(e.value, env)
            t = e.target
            if isinstance(t, nodes.Var):
                env[t.name] = v
            else:
                obj = self._deref(self.expr(t.base, env))
                obj.fields[t.fieldname] = v
            return v
        if isinstance(e, nodes.Malloc):
            a = CAddr(self.next_oid)
            self.next_oid += 1
            self.heap[a] = CObject(e.struct, {})
            return a
        if isinstance(e, nodes.Call):
            args = [self.expr(a, env) for a in e.args]
            return self.call(e.fname, args)
        raise TypeError(f"unknown expression {e!r}")


def concrete_run(index, fname: str, heap: dict, args: list, max_steps: int = 100000):
    """Run `fname` on a copy of `heap`; return (result value, final heap).

    Raises NullDeref / UndefRead / NonTermination like the C fragment
    would crash.
    """
    h = {a: CObject(o.struct_name, dict(o.fields)) for a, o in heap.items()}
    interp = _Interp(index, h, max_steps)
    result = interp.call(fname, list(args))
    return result, interp.heap


# ---------------------------------------------------------------- builders

def build_dll(values: list, start_oid: int = 1) -> tuple:
    """Build a doubly linked List heap holding `values` in order.

    Returns (head value, heap dict). An empty list gives (None, {})."""
    heap: dict = {}
    addrs = [CAddr(start_oid + i) for i in range(len(values))]
    for i, (a, v) in enumerate(zip(addrs, values)):
        heap[a] = CObject("List", {
            "data": v,
            "next": addrs[i + 1] if i + 1 < len(addrs) else None,
            "prev": addrs[i - 1] if i > 0 else None,
        })
    return (addrs[0] if addrs else None), heap


def all_dlls(max_len: int, tokens: list) -> list:
    """Every doubly linked list of length <= max_len over `tokens`
    (with repetition), as (head, heap) pairs."""
    out = []
    for n in range(max_len + 1):
        for combo in itertools.product(tokens, repeat=n):
            out.append(build_dll(list(combo)))
    return out
