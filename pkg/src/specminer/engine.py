"""Symbolic execution of one function call, producing result patterns.

The machine is a small-step interpreter over a continuation stack (`k`) and
an expression value stack, exploring branches depth-first with the true
branch first. Three mechanisms matter beyond plain evaluation:

* Guard decisions. Comparing values that the current conditions do not
  already decide clones the pattern, one branch per polarity, and records
  the new atom — in the memory condition cell when the decision is an
  address-against-NULL question (heap shape discovery), in the ordinary
  path condition otherwise. A decision the conditions already entail takes
  a single successor and records nothing.

* Lazy heaps. The input heap starts unknown. Dereferencing an address the
  conditions allow to be non-null conjures an empty object for it; reading
  a field never seen before conjures a fresh value of the field's type.
  Both discoveries are mirrored into the pattern's entry heap, which ends
  up describing exactly the slice of the input this branch depends on.
  With `lazy_aliasing`, a newly discovered object may also be one of the
  already-discovered input objects, one extra successor per candidate.

* Loop budgets. Every loop-guard evaluation that required a genuine split
  since the last check marks the iteration as a real decision; only those
  iterations count against the unroll bound. Iterations whose guard was
  entailed are free, so post-state walks over already-discovered heaps do
  not burn budget. Paths cut at the bound are tallied, not emitted.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import constraints as C
from .constraints import Atom, IntConst, NullRef, SatResult, conjoin
from .frontend import nodes
from .symstate import (
    FINAL,
    ERROR,
    MISSING,
    NULL_ADDR,
    UNDEF,
    Addr,
    Allocator,
    CallPattern,
    Frame,
    HeapObject,
    Pattern,
    SymAddress,
    TypedValue,
    make_call_pattern,
)

# ---------------------------------------------------------------- limits

@dataclass
class Limits:
    unroll_bound: int = 1
    max_patterns: int = 4096
    max_steps: int = 100000


@dataclass
class SEResult:
    patterns: list  # terminal patterns in emission order
    truncated_paths: int
    budget_error: bool
    split_log: list  # [(Constraint, Constraint)] per genuine split

    @property
    def final_patterns(self) -> list:
        return [p for p in self.patterns if p.status == FINAL]

    @property
    def error_patterns(self) -> list:
        return [p for p in self.patterns if p.status == ERROR]


# ---------------------------------------------------------------- k items

@dataclass(frozen=True)
class KStmt:
    stmt: object


@dataclass(frozen=True)
class KPop:
    pass


@dataclass(frozen=True)
class KExpr:
    expr: object
    hint: str = ""


@dataclass(frozen=True)
class KBranch:
    then: object
    els: object


@dataclass(frozen=True)
class KLoopCheck:
    node: object


@dataclass(frozen=True)
class KLoopDecide:
    node: object


@dataclass(frozen=True)
class KCompare:
    op: str


@dataclass(frozen=True)
class KArith:
    op: str


@dataclass(frozen=True)
class KTruth:
    pass


@dataclass(frozen=True)
class KNot:
    pass


@dataclass(frozen=True)
class KAndRight:
    expr: object


@dataclass(frozen=True)
class KOrRight:
    expr: object


@dataclass(frozen=True)
class KField:
    fname: str
    struct_name: str


@dataclass(frozen=True)
class KAssignVar:
    name: str


@dataclass(frozen=True)
class KWriteField:
    fname: str
    struct_name: str


@dataclass(frozen=True)
class KInvoke:
    fname: str
    argc: int
    site: int


@dataclass(frozen=True)
class KCallBoundary:
    pass


@dataclass(frozen=True)
class KReturn:
    has_value: bool


_CMP_TO_ATOM = {"==": C.EQ, "!=": C.NEQ, "<": C.LT, "<=": C.LE, ">": C.GT, ">=": C.GE}


# ---------------------------------------------------------------- engine

class _Engine:
    def __init__(self, index, limits: Limits, alloc: Allocator, lazy_aliasing: bool):
        self.index = index
        self.limits = limits
        self.alloc = alloc
        self.lazy_aliasing = lazy_aliasing
        self.truncated = 0
        self.budget_error = False
        self.split_log: list = []

    # -------------------------------------------------- main loop

    def run(self, start: Pattern) -> SEResult:
        out: list[Pattern] = []
        finals = errors = 0
        stack = [start]
        while stack:
            if len(out) >= self.limits.max_patterns:
                self.budget_error = True
                break
            p = stack.pop()
            if p.status != "running":
                if p.status == FINAL:
                    p.provenance_id = f"p{finals}"
                    finals += 1
                else:
                    p.provenance_id = f"e{errors}"
                    errors += 1
                out.append(p)
                continue
            succs = self.step(p)
            for s in reversed(succs):
                stack.append(s)
        return SEResult(out, self.truncated, self.budget_error, self.split_log)

    # -------------------------------------------------- helpers

    def _error(self, p: Pattern, reason: str) -> Pattern:
        p.status = ERROR
        p.error_reason = reason
        p.k = []
        return p

    def _resolve(self, p: Pattern, a: SymAddress) -> SymAddress:
        while a in p.aliases:
            a = p.aliases[a]
        return a

    def _materialize(self, p: Pattern, a: SymAddress, struct_name: str) -> None:
        if a in p.heap:
            return
        p.heap[a] = HeapObject(struct_name, {}, lazy=True)
        p.entry_heap[a] = HeapObject(struct_name, {}, lazy=True)
        for m in sorted(p.malloced, key=lambda x: (x.display, x.sid)):
            p.add_alloc_atom(Atom(C.NEQ, a.ref, m.ref))

    def _fill(self, p: Pattern, a: SymAddress, fname: str, ftype: nodes.CType):
        display = f"{a.display}.{fname}"
        if ftype.kind == "structptr":
            v = Addr(self.alloc.derived_addr(display))
        elif ftype.kind == "voidptr":
            v = TypedValue(ftype, self.alloc.derived_data(display))
        elif ftype.kind == "int":
            v = TypedValue(ftype, self.alloc.derived_int(display))
        else:
            v = UNDEF
        obj = p.heap[a]
        obj.fields[fname] = v
        entry = p.entry_heap.get(a)
        if isinstance(entry, HeapObject) and fname not in entry.fields:
            entry.fields[fname] = v
        return v

    def _log_split(self, a: Pattern, b: Pattern) -> None:
        self.split_log.append((a.combined_condition(), b.combined_condition()))

    def _binary_split(self, p: Pattern, atom_true: Atom, route: str):
        """Return [(pattern, truth)] successors for a two-way decision."""
        neg = C.negate_atom(atom_true)
        base = p.combined_condition()
        st = C.check_sat(conjoin(base, C.constraint(atom_true)))
        sf = C.check_sat(conjoin(base, C.constraint(neg)))
        if st == SatResult.UNSAT and sf == SatResult.UNSAT:
            return []
        if sf == SatResult.UNSAT:
            if st == SatResult.UNKNOWN:
                p.approx = True
            return [(p, True)]
        if st == SatResult.UNSAT:
            if sf == SatResult.UNKNOWN:
                p.approx = True
            return [(p, False)]
        q_true = p
        q_false = p.clone()
        for q, atom, verdict in ((q_true, atom_true, st), (q_false, neg, sf)):
            if route == "mem":
                q.add_mem_atom(atom)
            else:
                q.add_path_atom(atom)
            if verdict == SatResult.UNKNOWN:
                q.approx = True
            q.guard_split = True
        self._log_split(q_true, q_false)
        return [(q_true, True), (q_false, False)]

    def _deref(self, p: Pattern, value, struct_name: str, then):
        """Dereference a pointer value; `then(pattern, address)` continues
        the work on each successor that reached an object."""
        if value is UNDEF:
            return [self._error(p, "read of undefined value")]
        if value is NULL_ADDR:
            return [self._error(p, "NULL dereference")]
        if not isinstance(value, Addr):
            return [self._error(p, "dereference of a non-address value")]
        target = self._resolve(p, value.target)
        base = p.combined_condition()
        eq_null = Atom(C.EQ, target.ref, NullRef())
        ne_null = Atom(C.NEQ, target.ref, NullRef())
        s_null = C.check_sat(conjoin(base, C.constraint(eq_null)))
        s_ok = C.check_sat(conjoin(base, C.constraint(ne_null)))
        if s_null == SatResult.UNSAT and s_ok == SatResult.UNSAT:
            return []
        if s_null == SatResult.UNSAT:
            # definitely an object; no new fact
            if s_ok == SatResult.UNKNOWN:
                p.approx = True
            self._materialize(p, target, struct_name)
            then(p, target)
            return [p]
        if s_ok == SatResult.UNSAT:
            if s_null == SatResult.UNKNOWN:
                p.approx = True
            return [self._error(p, "NULL dereference")]

        succs = []
        fresh_candidates = []
        if self.lazy_aliasing and target not in p.heap:
            fresh_candidates = sorted(
                (a for a, o in p.heap.items()
                 if isinstance(o, HeapObject) and o.lazy
                 and o.struct_name == struct_name and a != target),
                key=lambda a: (a.display, a.sid),
            )
        ok = p.clone()
        ok.add_mem_atom(ne_null)
        if s_ok == SatResult.UNKNOWN:
            ok.approx = True
        ok.guard_split = True
        for cand in fresh_candidates:
            ok.add_mem_atom(Atom(C.NEQ, target.ref, cand.ref))
        self._materialize(ok, target, struct_name)
        then(ok, target)
        succs.append(ok)

        for cand in fresh_candidates:
            al = p.clone()
            al.add_mem_atom(ne_null)
            al.add_mem_atom(Atom(C.EQ, target.ref, cand.ref))
            if C.check_sat(al.combined_condition()) == SatResult.UNSAT:
                continue
            al.guard_split = True
            al.aliases[target] = cand
            then(al, cand)
            succs.append(al)

        err = p.clone()
        err.add_mem_atom(eq_null)
        if s_null == SatResult.UNKNOWN:
            err.approx = True
        err.guard_split = True
        self._error(err, "NULL dereference")
        succs.append(err)
        self._log_split(succs[0], succs[-1])
        return succs

    @staticmethod
    def _int_term(v: TypedValue):
        if isinstance(v.payload, int):
            return IntConst(v.payload)
        return v.payload

    @staticmethod
    def _value_term(v):
        if v is NULL_ADDR:
            return NullRef()
        if isinstance(v, Addr):
            return v.target.ref
        if isinstance(v, TypedValue):
            if isinstance(v.payload, int):
                return IntConst(v.payload)
            return v.payload
        return None

    def _push_truth(self, p: Pattern, v):
        """Reduce a value to concrete 0/1 on each successor."""
        if v is UNDEF:
            return [self._error(p, "read of undefined value")]
        if v is NULL_ADDR:
            p.vals.append(TypedValue(nodes.INT, 0))
            return [p]
        if isinstance(v, TypedValue) and isinstance(v.payload, int):
            p.vals.append(TypedValue(nodes.INT, 1 if v.payload != 0 else 0))
            return [p]
        if isinstance(v, Addr):
            target = self._resolve(p, v.target)
            atom = Atom(C.NEQ, target.ref, NullRef())
            route = "mem"
        else:
            atom = Atom(C.NEQ, self._value_term(v), NullRef())
            route = "path"
        out = []
        for q, truth in self._binary_split(p, atom, route):
            q.vals.append(TypedValue(nodes.INT, 1 if truth else 0))
            out.append(q)
        return out

    # -------------------------------------------------- stepping

    def step(self, p: Pattern) -> list[Pattern]:
        p.steps += 1
        if p.steps > self.limits.max_steps:
            self.budget_error = True
            return [self._error(p, "step budget exceeded")]
        item = p.k.pop(0)

        if isinstance(item, KStmt):
            return self._step_stmt(p, item.stmt)
        if isinstance(item, KPop):
            p.vals.pop()
            return [p]
        if isinstance(item, KExpr):
            return self._step_expr(p, item.expr, item.hint)
        if isinstance(item, KBranch):
            v = p.vals.pop()
            taken = item.then if v.payload != 0 else item.els
            if taken is not None:
                p.k.insert(0, KStmt(taken))
            return [p]
        if isinstance(item, KLoopCheck):
            p.guard_split = False
            p.k[:0] = [KExpr(item.node.cond), KTruth(), KLoopDecide(item.node)]
            return [p]
        if isinstance(item, KLoopDecide):
            v = p.vals.pop()
            if v.payload == 0:
                return [p]
            key = id(item.node)
            if p.guard_split:
                count = p.loop_counts.get(key, 0) + 1
                if count > self.limits.unroll_bound:
                    self.truncated += 1
                    return []
                p.loop_counts[key] = count
            p.k[:0] = [KStmt(item.node.body), KLoopCheck(item.node)]
            return [p]
        if isinstance(item, KCompare):
            return self._step_compare(p, item.op)
        if isinstance(item, KArith):
            r = p.vals.pop()
            l = p.vals.pop()
            if not (isinstance(l, TypedValue) and isinstance(r, TypedValue)):
                return [self._error(p, "arithmetic on a non-integer value")]
            if isinstance(l.payload, int) and isinstance(r.payload, int):
                n = l.payload + r.payload if item.op == "+" else l.payload - r.payload
                p.vals.append(TypedValue(nodes.INT, n))
                return [p]
            lt, rt = self._int_term(l), self._int_term(r)
            s = self.alloc.fresh_int(f"i{self.alloc._next}")
            expr = C.Add(lt, rt) if item.op == "+" else C.Sub(lt, rt)
            p.add_path_atom(Atom(C.EQ, s, expr))
            p.vals.append(TypedValue(nodes.INT, s))
            return [p]
        if isinstance(item, KTruth):
            return self._push_truth(p, p.vals.pop())
        if isinstance(item, KNot):
            v = p.vals.pop()
            p.vals.append(TypedValue(nodes.INT, 0 if v.payload != 0 else 1))
            return [p]
        if isinstance(item, KAndRight):
            v = p.vals.pop()
            if v.payload == 0:
                p.vals.append(TypedValue(nodes.INT, 0))
            else:
                p.k[:0] = [KExpr(item.expr), KTruth()]
            return [p]
        if isinstance(item, KOrRight):
            v = p.vals.pop()
            if v.payload != 0:
                p.vals.append(TypedValue(nodes.INT, 1))
            else:
                p.k[:0] = [KExpr(item.expr), KTruth()]
            return [p]
        if isinstance(item, KField):
            base = p.vals.pop()

            def read(q: Pattern, addr: SymAddress):
                obj = q.heap[addr]
                v = obj.fields.get(item.fname, MISSING)
                if v is MISSING:
                    if obj.lazy:
                        ftype = dict(self.index.structs[item.struct_name].fields)[item.fname]
                        v = self._fill(q, addr, item.fname, ftype)
                    else:
                        self._error(q, f"read of uninitialized field '{item.fname}'")
                        return
                q.vals.append(v)

            return self._deref(p, base, item.struct_name, read)
        if isinstance(item, KAssignVar):
            v = p.vals[-1]
            cell = p.env[item.name]
            p.heap[cell] = v
            return [p]
        if isinstance(item, KWriteField):
            base = p.vals.pop()
            val = p.vals.pop()

            def write(q: Pattern, addr: SymAddress):
                q.heap[addr].fields[item.fname] = val
                q.vals.append(val)

            return self._deref(p, base, item.struct_name, write)
        if isinstance(item, KInvoke):
            return self._step_invoke(p, item)
        if isinstance(item, KCallBoundary):
            return self._do_return(p, UNDEF, boundary_consumed=True)
        if isinstance(item, KReturn):
            rv = p.vals.pop() if item.has_value else UNDEF
            return self._do_return(p, rv, boundary_consumed=False)
        raise TypeError(f"unknown continuation item {item!r}")

    # -------------------------------------------------- statements

    def _step_stmt(self, p: Pattern, s) -> list[Pattern]:
        if isinstance(s, nodes.Block):
            p.k[:0] = [KStmt(x) for x in s.stmts]
            return [p]
        if isinstance(s, nodes.ExprStmt):
            p.k[:0] = [KExpr(s.expr), KPop()]
            return [p]
        if isinstance(s, nodes.If):
            p.k[:0] = [KExpr(s.cond), KTruth(), KBranch(s.then, s.els)]
            return [p]
        if isinstance(s, nodes.While):
            p.k.insert(0, KLoopCheck(s))
            return [p]
        if isinstance(s, nodes.Return):
            if s.value is not None:
                p.k[:0] = [KExpr(s.value), KReturn(True)]
            else:
                p.k.insert(0, KReturn(False))
            return [p]
        raise TypeError(f"unknown statement {s!r}")

    # -------------------------------------------------- expressions

    def _step_expr(self, p: Pattern, e, hint: str) -> list[Pattern]:
        if isinstance(e, nodes.IntLit):
            p.vals.append(TypedValue(nodes.INT, e.value))
            return [p]
        if isinstance(e, nodes.NullLit):
            p.vals.append(NULL_ADDR)
            return [p]
        if isinstance(e, nodes.Var):
            cell = p.env.get(e.name)
            if cell is None:
                return [self._error(p, f"unbound variable '{e.name}'")]
            v = p.heap.get(cell, UNDEF)
            if v is UNDEF:
                return [self._error(p, f"read of undefined variable '{e.name}'")]
            p.vals.append(v)
            return [p]
        if isinstance(e, nodes.FieldAccess):
            p.k[:0] = [KExpr(e.base), KField(e.fieldname, e.struct_name)]
            return [p]
        if isinstance(e, nodes.Unary):
            p.k[:0] = [KExpr(e.operand), KTruth(), KNot()]
            return [p]
        if isinstance(e, nodes.Binary):
            if e.op == "&&":
                p.k[:0] = [KExpr(e.left), KTruth(), KAndRight(e.right)]
            elif e.op == "||":
                p.k[:0] = [KExpr(e.left), KTruth(), KOrRight(e.right)]
            elif e.op in ("+", "-"):
                p.k[:0] = [KExpr(e.left), KExpr(e.right), KArith(e.op)]
            else:
                p.k[:0] = [KExpr(e.left), KExpr(e.right), KCompare(e.op)]
            return [p]
        if isinstance(e, nodes.Assign):
            t = e.target
            if isinstance(t, nodes.Var):
                p.k[:0] = [KExpr(e.value, hint=t.name), KAssignVar(t.name)]
            else:
                p.k[:0] = [KExpr(e.value), KExpr(t.base),
                           KWriteField(t.fieldname, t.struct_name)]
            return [p]
        if isinstance(e, nodes.Malloc):
            name = hint or "obj"
            m = self.alloc.fresh_addr(name)
            for a, o in list(p.heap.items()):
                if isinstance(o, HeapObject):
                    p.add_alloc_atom(Atom(C.NEQ, m.ref, a.ref))
            p.add_alloc_atom(Atom(C.NEQ, m.ref, NullRef()))
            p.heap[m] = HeapObject(e.struct, {}, lazy=False)
            p.malloced = p.malloced | {m}
            p.vals.append(Addr(m))
            return [p]
        if isinstance(e, nodes.Call):
            items = [KExpr(a) for a in e.args]
            items.append(KInvoke(e.fname, len(e.args), id(e)))
            p.k[:0] = items
            return [p]
        raise TypeError(f"unknown expression {e!r}")

    # -------------------------------------------------- comparison

    def _step_compare(self, p: Pattern, op: str) -> list[Pattern]:
        r = p.vals.pop()
        l = p.vals.pop()
        if l is UNDEF or r is UNDEF:
            return [self._error(p, "read of undefined value")]
        # concrete integer comparison
        if (isinstance(l, TypedValue) and isinstance(r, TypedValue)
                and isinstance(l.payload, int) and isinstance(r.payload, int)):
            res = {
                "==": l.payload == r.payload, "!=": l.payload != r.payload,
                "<": l.payload < r.payload, "<=": l.payload <= r.payload,
                ">": l.payload > r.payload, ">=": l.payload >= r.payload,
            }[op]
            p.vals.append(TypedValue(nodes.INT, 1 if res else 0))
            return [p]
        # NULL == NULL and same-address fast paths
        if l is NULL_ADDR and r is NULL_ADDR:
            res = op in ("==", "<=", ">=")
            p.vals.append(TypedValue(nodes.INT, 1 if res else 0))
            return [p]
        if isinstance(l, Addr):
            l = Addr(self._resolve(p, l.target))
        if isinstance(r, Addr):
            r = Addr(self._resolve(p, r.target))
        if isinstance(l, Addr) and isinstance(r, Addr) and l.target == r.target:
            res = op in ("==", "<=", ">=")
            p.vals.append(TypedValue(nodes.INT, 1 if res else 0))
            return [p]
        lt = self._value_term(l)
        rt = self._value_term(r)
        if lt is None or rt is None:
            return [self._error(p, "comparison of incomparable values")]
        atom = Atom(_CMP_TO_ATOM[op], lt, rt)
        null_vs_addr = (
            (isinstance(l, Addr) and r is NULL_ADDR)
            or (l is NULL_ADDR and isinstance(r, Addr))
        )
        route = "mem" if null_vs_addr else "path"
        out = []
        for q, truth in self._binary_split(p, atom, route):
            q.vals.append(TypedValue(nodes.INT, 1 if truth else 0))
            out.append(q)
        return out

    # -------------------------------------------------- calls

    def _step_invoke(self, p: Pattern, item: KInvoke) -> list[Pattern]:
        f = self.index.functions.get(item.fname)
        if f is None:
            return [self._error(p, f"call to unknown function '{item.fname}'")]
        args = [p.vals.pop() for _ in range(item.argc)][::-1]
        if len(f.params) != len(args):
            return [self._error(p, f"arity mismatch calling '{item.fname}'")]
        active = sum(1 for fr in p.call_stack if fr.call_site == item.site)
        if active >= self.limits.unroll_bound:
            self.truncated += 1
            return []
        frame = Frame(item.fname, item.site, p.env, p.loop_counts)
        p.call_stack.append(frame)
        env = {}
        for (pname, _pt), v in zip(f.params, args):
            cell = self.alloc.fresh_addr(f"cell_{pname}")
            p.heap[cell] = v
            env[pname] = cell
        for lname, _lt in f.locals:
            cell = self.alloc.fresh_addr(f"cell_{lname}")
            p.heap[cell] = UNDEF
            env[lname] = cell
        p.env = env
        p.loop_counts = {}
        p.k[:0] = [KStmt(x) for x in f.body] + [KCallBoundary()]
        return [p]

    def _do_return(self, p: Pattern, rv, boundary_consumed: bool) -> list[Pattern]:
        if not boundary_consumed:
            while p.k:
                top = p.k.pop(0)
                if isinstance(top, KCallBoundary):
                    break
        if p.call_stack:
            frame = p.call_stack.pop()
            p.env = frame.saved_env
            p.loop_counts = frame.loop_counts
            p.vals.append(rv)
            return [p]
        p.status = FINAL
        p.return_value = rv
        p.k = []
        return [p]


# ---------------------------------------------------------------- API

def se(
    index,
    call_pattern: CallPattern,
    limits: Limits | None = None,
    alloc: Allocator | None = None,
    lazy_aliasing: bool = False,
) -> SEResult:
    """Execute `call_pattern` symbolically and return every terminal
    pattern (finals and errors), the count of bound-cut paths, and the log
    of genuine guard splits."""
    limits = limits or Limits()
    alloc = alloc or Allocator()
    eng = _Engine(index, limits, alloc, lazy_aliasing)
    f = index.functions.get(call_pattern.fname)
    if f is None:
        raise KeyError(f"unknown function '{call_pattern.fname}'")
    p = make_call_pattern(index, call_pattern, alloc)
    p.k = [KStmt(x) for x in f.body] + [KCallBoundary()]
    return eng.run(p)
