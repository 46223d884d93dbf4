"""Symbolic program states: addresses, typed values, heaps, and patterns.

A pattern is one branch of the symbolic execution: a continuation stack, an
environment mapping variables to heap cells, the heap itself, and the two
condition cells (one for ordinary branch facts, one for decisions taken
while materializing unexplored parts of the heap on demand).

The heap maps symbolic addresses either to a plain value cell (used for
parameters and locals, one level of indirection like a C lvalue) or to a
whole struct object. Reads of fields that were never written come back as
`MISSING`, letting the engine decide whether to conjure the field's value.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .constraints import (
    TRUE,
    Atom,
    Constraint,
    SymAddrRef,
    SymDataRef,
    SymIntRef,
)
from .frontend import nodes

# ---------------------------------------------------------------- values

@dataclass(frozen=True)
class SymAddress:
    sid: int
    display: str

    @property
    def ref(self) -> SymAddrRef:
        return SymAddrRef(self.sid, self.display)


@dataclass(frozen=True)
class Addr:
    """A pointer value aimed at a symbolic address."""
    target: SymAddress


class _NullAddr:
    def __repr__(self):
        return "NULL_ADDR"


class _Undef:
    def __repr__(self):
        return "UNDEF"


NULL_ADDR = _NullAddr()
UNDEF = _Undef()


@dataclass(frozen=True)
class TypedValue:
    """An integer or opaque-data payload tagged with its C type."""
    ctype: nodes.CType
    payload: object  # int | SymIntRef | SymDataRef


Value = object  # Addr | NULL_ADDR | UNDEF | TypedValue


def render_value(v: Value) -> str:
    if isinstance(v, Addr):
        return v.target.display.replace(".", "->")
    if v is NULL_ADDR:
        return "NULL"
    if v is UNDEF:
        return "undef"
    if isinstance(v, TypedValue):
        p = v.payload
        if isinstance(p, int):
            return str(p)
        if isinstance(p, (SymIntRef, SymDataRef)):
            return "?" + p.display.replace(".", "->")
        return str(p)
    raise TypeError(f"not a value: {v!r}")


def render_tv(v: Value) -> str:
    """Typed rendering used in result patterns, e.g. tv(int, 1)."""
    if isinstance(v, TypedValue):
        return f"tv({v.ctype.render()}, {render_value(v)})"
    return render_value(v)


# ---------------------------------------------------------------- heap

@dataclass
class HeapObject:
    struct_name: str
    fields: dict[str, Value] = field(default_factory=dict)
    # lazily discovered input objects answer missing fields with fresh
    # symbols; freshly malloc'd memory answers with an undefined-read error
    lazy: bool = False


class MissingField:
    def __repr__(self):
        return "MISSING"


MISSING = MissingField()


class UnboundAddress(Exception):
    pass


Heap = dict  # SymAddress -> Value (cell) | HeapObject


def heap_read_field(heap: Heap, addr: SymAddress, fname: str) -> Value:
    """Read obj.field; MISSING when the object exists but the field was
    never set."""
    if addr not in heap:
        raise UnboundAddress(addr.display)
    entry = heap[addr]
    if not isinstance(entry, HeapObject):
        raise UnboundAddress(f"{addr.display} holds a plain cell, not an object")
    if fname not in entry.fields:
        return MISSING
    return entry.fields[fname]


def heap_write_field(heap: Heap, addr: SymAddress, fname: str, v: Value) -> None:
    if addr not in heap:
        raise UnboundAddress(addr.display)
    entry = heap[addr]
    if not isinstance(entry, HeapObject):
        raise UnboundAddress(f"{addr.display} holds a plain cell, not an object")
    entry.fields[fname] = v


# ---------------------------------------------------------------- allocator

class Allocator:
    """Monotone source of fresh symbolic identities. Sharing one allocator
    across an entire run keeps every emitted name unique and the output
    deterministic."""

    def __init__(self, seed_label: str = ""):
        self._next = 0
        self._prefix = seed_label

    def _fresh(self, display: str) -> tuple[int, str]:
        sid = self._next
        self._next += 1
        return sid, (f"{self._prefix}:{display}" if self._prefix else display)

    def fresh_addr(self, display: str) -> SymAddress:
        sid, d = self._fresh(display)
        return SymAddress(sid, d)

    def fresh_int(self, display: str) -> SymIntRef:
        sid, d = self._fresh(display)
        return SymIntRef(sid, d)

    def fresh_data(self, display: str) -> SymDataRef:
        sid, d = self._fresh(display)
        return SymDataRef(sid, d)

    # names derived from an existing symbol's display (field fills) already
    # carry any label; these variants allocate an identity without re-prefixing
    def derived_addr(self, display: str) -> SymAddress:
        sid = self._next
        self._next += 1
        return SymAddress(sid, display)

    def derived_int(self, display: str) -> SymIntRef:
        sid = self._next
        self._next += 1
        return SymIntRef(sid, display)

    def derived_data(self, display: str) -> SymDataRef:
        sid = self._next
        self._next += 1
        return SymDataRef(sid, display)


# ---------------------------------------------------------------- patterns

RUNNING = "running"
FINAL = "final"
ERROR = "error"


@dataclass
class Pattern:
    k: list  # continuation stack, top at index 0 (engine-defined items)
    env: dict[str, SymAddress]
    heap: Heap
    entry_heap: Heap  # the input heap as discovered: materializations + fills
    call_stack: list
    path_condition: Constraint = TRUE
    mem_path_condition: Constraint = TRUE
    # distinctness facts for fresh storage (malloc results, materialized
    # input objects); consulted by every entailment but not displayed
    alloc_condition: Constraint = TRUE
    status: str = RUNNING
    error_reason: str = ""
    return_value: Value = UNDEF
    malloced: frozenset = frozenset()
    aliases: dict = field(default_factory=dict)
    vals: list = field(default_factory=list)  # expression value stack
    loop_counts: dict = field(default_factory=dict)
    approx: bool = False
    guard_split: bool = False
    steps: int = 0
    provenance_id: str = ""

    def clone(self) -> "Pattern":
        return Pattern(
            k=list(self.k),
            env=dict(self.env),
            heap=_copy_heap(self.heap),
            entry_heap=_copy_heap(self.entry_heap),
            call_stack=[frm.clone() for frm in self.call_stack],
            path_condition=self.path_condition,
            mem_path_condition=self.mem_path_condition,
            alloc_condition=self.alloc_condition,
            status=self.status,
            error_reason=self.error_reason,
            return_value=self.return_value,
            malloced=self.malloced,
            aliases=dict(self.aliases),
            vals=list(self.vals),
            loop_counts=dict(self.loop_counts),
            approx=self.approx,
            guard_split=self.guard_split,
            steps=self.steps,
            provenance_id=self.provenance_id,
        )

    def add_path_atom(self, a: Atom) -> None:
        self.path_condition = self.path_condition.with_atom(a)

    def add_mem_atom(self, a: Atom) -> None:
        self.mem_path_condition = self.mem_path_condition.with_atom(a)

    def add_alloc_atom(self, a: Atom) -> None:
        self.alloc_condition = self.alloc_condition.with_atom(a)

    def combined_condition(self) -> Constraint:
        from .constraints import conjoin
        return conjoin(conjoin(self.path_condition, self.mem_path_condition),
                       self.alloc_condition)


def _copy_heap(h: Heap) -> Heap:
    out: Heap = {}
    for k, v in h.items():
        if isinstance(v, HeapObject):
            out[k] = HeapObject(v.struct_name, dict(v.fields), v.lazy)
        else:
            out[k] = v
    return out


def copy_heap(h: Heap) -> Heap:
    return _copy_heap(h)


@dataclass
class Frame:
    """One pending call: where to put the return value and what to restore."""
    function: str
    call_site: int  # id() of the Call node, for recursion accounting
    saved_env: dict[str, SymAddress]
    loop_counts: dict

    def clone(self) -> "Frame":
        return Frame(self.function, self.call_site, dict(self.saved_env),
                     dict(self.loop_counts))


# ---------------------------------------------------------------- call shape

class ArityMismatch(Exception):
    pass


class NotFinal(Exception):
    pass


@dataclass
class CallPattern:
    """Entry point description: run `fname` on `args` against `initial_heap`
    under `initial_constraint`."""
    fname: str
    args: list  # list[Value]
    initial_constraint: Constraint = TRUE
    initial_heap: Heap = field(default_factory=dict)
    # addresses already known to be freshly allocated (kept distinct from
    # any input object discovered later in this run)
    initial_malloced: frozenset = frozenset()


def make_call_pattern(index, cp: CallPattern, alloc: Allocator) -> Pattern:
    """Bind parameters to fresh cells holding the argument values; locals
    get cells too, initially undefined."""
    f = index.functions[cp.fname]
    if len(f.params) != len(cp.args):
        raise ArityMismatch(f"{cp.fname} expects {len(f.params)} args, got {len(cp.args)}")
    heap = _copy_heap(cp.initial_heap)
    env: dict[str, SymAddress] = {}
    for (pname, _ptype), v in zip(f.params, cp.args):
        cell = alloc.fresh_addr(f"cell_{pname}")
        heap[cell] = v
        env[pname] = cell
    for lname, _ltype in f.locals:
        cell = alloc.fresh_addr(f"cell_{lname}")
        heap[cell] = UNDEF
        env[lname] = cell
    return Pattern(
        k=[],
        env=env,
        heap=heap,
        entry_heap=_copy_heap(cp.initial_heap),
        call_stack=[],
        path_condition=cp.initial_constraint,
        mem_path_condition=TRUE,
        malloced=cp.initial_malloced,
    )


def extract_return(p: Pattern) -> Value:
    if p.status != FINAL:
        raise NotFinal(f"pattern is {p.status}")
    return p.return_value


# ---------------------------------------------------------------- rendering

def render_pattern(p: Pattern) -> str:
    """Human-oriented dump: one cell per line. The env collapses the cell
    indirection so `x |-> v` shows the value, not the cell address."""
    lines = []
    if p.status == ERROR:
        lines.append(f"<k> Error: {p.error_reason} </k>")
    elif p.status == FINAL:
        lines.append(f"<k> return {render_tv(p.return_value)} </k>")
    else:
        lines.append(f"<k> ({len(p.k)} pending) </k>")
    for name in sorted(p.env):
        cell = p.env[name]
        v = p.heap.get(cell, UNDEF)
        if isinstance(v, HeapObject):
            v_str = v.struct_name
        else:
            v_str = render_tv(v)
        lines.append(f"<env> {name} |-> {v_str} </env>")
    objs = [(a, o) for a, o in sorted(p.heap.items(), key=lambda kv: kv[0].display)
            if isinstance(o, HeapObject)]
    for a, o in objs:
        inner = ", ".join(f"{f} |-> {render_value(v)}" for f, v in sorted(o.fields.items()))
        lines.append(f"<heap> {a.display} |-> ({inner}) </heap>")
    from .constraints import render_constraint
    lines.append(f"<cond> {render_constraint(p.path_condition)} </cond>")
    lines.append(f"<memcond> {render_constraint(p.mem_path_condition)} </memcond>")
    return "\n".join(lines)
