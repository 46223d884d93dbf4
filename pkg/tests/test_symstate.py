"""Symbolic state model: values, heap, allocator, call patterns."""
import pytest

from specminer.frontend import nodes as N
from specminer.symstate import (
    Addr,
    Allocator,
    ArityMismatch,
    CallPattern,
    HeapObject,
    MISSING,
    NULL_ADDR,
    NotFinal,
    TypedValue,
    UNDEF,
    UnboundAddress,
    extract_return,
    heap_read_field,
    heap_write_field,
    make_call_pattern,
    render_pattern,
    render_tv,
    render_value,
)


def test_render_typed_values():
    assert render_tv(TypedValue(N.INT, 1)) == "tv(int, 1)"
    alloc = Allocator()
    assert render_tv(TypedValue(N.VOIDPTR, alloc.fresh_data("d"))) == "tv(void*, ?d)"
    assert render_value(NULL_ADDR) == "NULL"
    assert render_value(UNDEF) == "undef"


def test_render_address_uses_arrow_for_path_names():
    alloc = Allocator()
    a = alloc.fresh_addr("list.next")
    assert render_value(Addr(a)) == "list->next"


def test_allocator_is_monotone_and_label_scoped():
    alloc = Allocator()
    a = alloc.fresh_addr("x")
    b = alloc.fresh_addr("x")
    i = alloc.fresh_int("n")
    assert a.sid < b.sid < i.sid
    assert a != b  # same display, distinct identity
    assert a.ref.sid == a.sid and a.ref.display == "x"
    labeled = Allocator("run1").fresh_addr("x")
    assert labeled.display == "run1:x"


def test_heap_field_access():
    alloc = Allocator()
    a = alloc.fresh_addr("n")
    heap = {a: HeapObject("List", {"data": NULL_ADDR})}
    assert heap_read_field(heap, a, "data") is NULL_ADDR
    assert heap_read_field(heap, a, "next") is MISSING
    heap_write_field(heap, a, "next", NULL_ADDR)
    assert heap_read_field(heap, a, "next") is NULL_ADDR


def test_heap_access_errors():
    alloc = Allocator()
    a = alloc.fresh_addr("n")
    with pytest.raises(UnboundAddress):
        heap_read_field({}, a, "data")
    with pytest.raises(UnboundAddress):
        # a plain cell (parameter slot) is not an object
        heap_read_field({a: TypedValue(N.INT, 1)}, a, "data")


def test_make_call_pattern_binds_params_and_locals(dll_index):
    alloc = Allocator()
    root = alloc.fresh_addr("list")
    cp = CallPattern("append", [Addr(root), TypedValue(N.VOIDPTR, alloc.fresh_data("d"))])
    p = make_call_pattern(dll_index, cp, alloc)
    assert sorted(p.env) == ["d", "final", "list", "new_node"]
    assert p.heap[p.env["list"]] == Addr(root)
    assert p.heap[p.env["final"]] is UNDEF
    assert p.status == "running"
    with pytest.raises(NotFinal):
        extract_return(p)


def test_make_call_pattern_checks_arity(dll_index):
    with pytest.raises(ArityMismatch):
        make_call_pattern(dll_index, CallPattern("append", []), Allocator())


def test_clone_isolates_heap_env_and_conditions(dll_index):
    alloc = Allocator()
    root = alloc.fresh_addr("list")
    obj = HeapObject("List", {"data": NULL_ADDR}, lazy=True)
    cp = CallPattern("length", [Addr(root)], initial_heap={root: obj})
    p = make_call_pattern(dll_index, cp, alloc)
    q = p.clone()
    heap_write_field(q.heap, root, "data", TypedValue(N.INT, 9))
    q.heap[q.env["len"]] = TypedValue(N.INT, 3)
    assert heap_read_field(p.heap, root, "data") is NULL_ADDR
    assert p.heap[p.env["len"]] is UNDEF
    # lazy flag must survive copying — it drives field materialization
    assert q.heap[root].lazy


def test_render_pattern_shape(dll_index):
    alloc = Allocator()
    root = alloc.fresh_addr("list")
    cp = CallPattern("length", [Addr(root)])
    p = make_call_pattern(dll_index, cp, alloc)
    dump = render_pattern(p)
    assert "<env> list |-> list </env>" in dump
    assert "<cond> true </cond>" in dump
    assert "<memcond> true </memcond>" in dump


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
