"""Inferring pre/post specifications expressed through observer calls.

Given a modifier function, execute it symbolically once per branch of
behavior. For each resulting pattern, run every type-compatible observer
call twice: against the entry heap that branch discovered (pre) and
against the final heap (post), both under the branch's accumulated
conditions. An observer call earns an equation only when every one of its
own branches finishes normally with the same value, and that value is
expressible in the caller's vocabulary: a literal, NULL, an input
argument, or the updated structure root. The surviving equations become
one axiom per branch; axioms are then merged (same conclusion — intersect
premises; same premises — union conclusions) and redundant equations
dropped.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

from . import constraints as C
from .constraints import Atom, Constraint, Entailment, IntConst, NullRef, SymAddrRef, SymIntRef
from .engine import Limits, SEResult, se
from .symstate import (
    NULL_ADDR,
    UNDEF,
    Addr,
    Allocator,
    CallPattern,
    Pattern,
    TypedValue,
    extract_return,
)
from .frontend import nodes


class UnknownFunction(Exception):
    def __init__(self, name: str):
        super().__init__(f"no function named {name!r} in the program")
        self.name = name


class NotAnObserver(Exception):
    pass


# ---------------------------------------------------------------- rhs

@dataclass(frozen=True)
class RInt:
    value: int

    def render(self) -> str:
        return str(self.value)

    def to_json(self) -> dict:
        return {"kind": "int", "value": self.value}


@dataclass(frozen=True)
class RNull:
    def render(self) -> str:
        return "NULL"

    def to_json(self) -> dict:
        return {"kind": "null"}


@dataclass(frozen=True)
class RArg:
    name: str

    def render(self) -> str:
        return self.name

    def to_json(self) -> dict:
        return {"kind": "arg", "value": self.name}


@dataclass(frozen=True)
class RPostRoot:
    name: str

    def render(self) -> str:
        return self.name

    def to_json(self) -> dict:
        return {"kind": "postRoot", "value": self.name}


@dataclass(frozen=True)
class RVoid:
    def render(self) -> str:
        return "void"

    def to_json(self) -> dict:
        return {"kind": "void"}


RET = "ret"


@dataclass(frozen=True)
class Equation:
    """observer(args...) = rhs, or ret = rhs when observer is RET."""
    observer: str
    args: tuple
    rhs: object
    approx: bool = field(default=False, compare=False)

    def render(self) -> str:
        if self.observer == RET:
            return f"ret = {self.rhs.render()}"
        return f"{self.observer}({', '.join(self.args)}) = {self.rhs.render()}"

    def to_json(self) -> dict:
        lhs = RET if self.observer == RET else {"observer": self.observer,
                                                "args": list(self.args)}
        return {"lhs": lhs, "rhs": self.rhs.to_json(), "rendered": self.render()}


@dataclass
class Axiom:
    pre: tuple  # tuple[Equation]
    post: tuple  # tuple[Equation]
    ret: Equation | None
    provenance: str
    approx: bool = False


@dataclass
class SpecSet:
    modifier: str
    axioms: list
    limits: Limits
    truncated_paths: int
    stats: dict
    diagnostics: list
    split_log: list
    budget_error: bool = False


# ---------------------------------------------------------------- universe

def build_universe(index, observer_names, args):
    """All well-typed observer calls over permutations of subsets of the
    modifier's arguments. `args` is [(display, value, ctype)]; returns
    [(observer, ((display, value), ...))] sorted by observer then args."""
    calls = []
    indexed = list(enumerate(args))
    for oname in sorted(observer_names):
        f = index.functions[oname]
        k = len(f.params)
        for combo in permutations(indexed, k):
            if all(a[1][2] == pt for a, (_pn, pt) in zip(combo, f.params)):
                calls.append((oname, tuple((d, v) for _i, (d, v, _t) in combo)))
    calls.sort(key=lambda cv: (cv[0], tuple(d for d, _v in cv[1])))
    return calls


# ---------------------------------------------------------------- explain

def _sym_id_map(args, post_root):
    """Map symbol ids appearing in argument values to their rhs form."""
    m: dict[int, object] = {}
    for display, value, _t in args:
        if isinstance(value, Addr):
            m.setdefault(value.target.sid, RArg(display))
        elif isinstance(value, TypedValue) and not isinstance(value.payload, int):
            m.setdefault(value.payload.sid, RArg(display))
    if post_root is not None:
        sid, name = post_root
        m[sid] = RPostRoot(name)
    return m


def _normalize_return(leaf: Pattern, sym_map: dict):
    """The leaf's return value as an expressible rhs, or None."""
    v = leaf.return_value
    if v is NULL_ADDR:
        return RNull()
    if isinstance(v, Addr):
        t = v.target
        seen = set()
        while t in leaf.aliases and t not in seen:
            seen.add(t)
            t = leaf.aliases[t]
        # a provably-null address is NULL first, whatever else it matches
        verdict = C.entails(leaf.combined_condition(),
                            Atom(C.EQ, t.ref, NullRef()))
        if verdict == Entailment.YES:
            return RNull()
        if t.sid in sym_map:
            return sym_map[t.sid]
        return None
    if isinstance(v, TypedValue):
        if isinstance(v.payload, int):
            return RInt(v.payload)
        if v.payload.sid in sym_map:
            return sym_map[v.payload.sid]
        return None
    return None


def explain(
    index,
    heap,
    condition: Constraint,
    args,
    limits: Limits,
    alloc: Allocator,
    observer_names,
    *,
    malloced=frozenset(),
    post_root=None,
    lazy_aliasing: bool = False,
    diagnostics: list | None = None,
    context: str = "",
):
    """Equations observed to hold on `heap` under `condition`.

    `args` is [(display, value, ctype)] — the vocabulary; `post_root`
    optionally names (sid, display) for the updated-structure root."""
    diagnostics = diagnostics if diagnostics is not None else []
    sym_map = _sym_id_map(args, post_root)
    equations = []
    budget_hit = False
    for oname, call_args in build_universe(index, observer_names, args):
        res = se(
            index,
            CallPattern(oname, [v for _d, v in call_args],
                        initial_constraint=condition,
                        initial_heap=heap,
                        initial_malloced=malloced),
            limits,
            alloc,
            lazy_aliasing,
        )
        if res.budget_error:
            budget_hit = True
            names = ", ".join(d for d, _v in call_args)
            diagnostics.append(
                f"{context}: observer run {oname}({names}) exhausted its "
                f"budget; inconclusive")
            continue
        if res.error_patterns or res.truncated_paths:
            continue
        leaves = res.final_patterns
        if not leaves:
            continue
        values = [_normalize_return(leaf, sym_map) for leaf in leaves]
        if any(v is None for v in values):
            continue
        first = values[0]
        if any(v != first for v in values[1:]):
            continue
        approx = any(leaf.approx for leaf in leaves)
        equations.append(Equation(oname, tuple(d for d, _v in call_args),
                                  first, approx))
    return equations, budget_hit


# ---------------------------------------------------------------- inference

def _seed_args(f, alloc: Allocator):
    out = []
    for pname, ptype in f.params:
        if ptype.kind == "structptr":
            out.append((pname, Addr(alloc.fresh_addr(pname)), ptype))
        elif ptype.kind == "voidptr":
            out.append((pname, TypedValue(ptype, alloc.fresh_data(pname)), ptype))
        else:
            out.append((pname, TypedValue(ptype, alloc.fresh_int(pname)), ptype))
    return out


def infer_spec(
    index,
    modifier: str,
    limits: Limits | None = None,
    observers_override=None,
    lazy_aliasing: bool = False,
    seed_label: str = "",
) -> SpecSet:
    limits = limits or Limits()
    f = index.functions.get(modifier)
    if f is None:
        raise UnknownFunction(modifier)
    if observers_override is not None:
        for name in observers_override:
            g = index.functions.get(name)
            if g is None:
                raise UnknownFunction(name)
            if g.return_type.kind == "void":
                raise NotAnObserver(f"{name} returns void")
        observer_names = [n for n in observers_override if n != modifier]
    else:
        observer_names = sorted(n for n in index.observers if n != modifier)

    alloc = Allocator(seed_label)
    seeded = _seed_args(f, alloc)
    res = se(index, CallPattern(modifier, [v for _n, v, _t in seeded]),
             limits, alloc, lazy_aliasing)

    diagnostics: list[str] = []
    split_log = list(res.split_log)
    budget_error = res.budget_error
    if res.budget_error:
        diagnostics.append(f"{modifier}: exploration budget exhausted; "
                           f"results cover only the explored branches")

    root_param = next((pname for pname, pt in f.params if pt.kind == "structptr"),
                      None)
    if root_param is None:
        diagnostics.append(f"{modifier}: no pointer argument; post-state "
                           f"equations use unprimed names")

    axioms = []
    for p in res.patterns:
        if p.status != "final":
            continue
        cond = p.combined_condition()
        pre_eqs, hit = explain(
            index, p.entry_heap, cond, seeded, limits, alloc, observer_names,
            malloced=p.malloced, lazy_aliasing=lazy_aliasing,
            diagnostics=diagnostics, context=f"{modifier}/{p.provenance_id} pre")
        budget_error = budget_error or hit

        ret_v = extract_return(p)
        post_args = []
        post_root = None
        for pname, seed_v, ptype in seeded:
            if pname == root_param:
                cell_v = p.heap.get(p.env[pname], UNDEF)
                root_v = ret_v if isinstance(ret_v, Addr) or ret_v is NULL_ADDR \
                    else cell_v
                display = pname + "'"
                post_args.append((display, root_v, ptype))
                if isinstance(root_v, Addr):
                    t = root_v.target
                    seen = set()
                    while t in p.aliases and t not in seen:
                        seen.add(t)
                        t = p.aliases[t]
                    post_root = (t.sid, display)
            else:
                post_args.append((pname, p.heap.get(p.env[pname], UNDEF), ptype))
        post_eqs, hit = explain(
            index, p.heap, cond, post_args, limits, alloc, observer_names,
            malloced=p.malloced, post_root=post_root, lazy_aliasing=lazy_aliasing,
            diagnostics=diagnostics, context=f"{modifier}/{p.provenance_id} post")
        budget_error = budget_error or hit

        if f.return_type.kind == "void":
            ret_eq = Equation(RET, (), RVoid())
        else:
            rhs = _normalize_return(p, _sym_id_map(post_args, post_root))
            ret_eq = Equation(RET, (), rhs) if rhs is not None else None

        approx = p.approx or any(e.approx for e in pre_eqs + post_eqs)
        axioms.append(Axiom(tuple(pre_eqs), tuple(post_eqs), ret_eq,
                            p.provenance_id, approx))

    axioms = simplify_spec(axioms)
    stats = {
        "finalPatterns": len(res.final_patterns),
        "errorPatterns": len(res.error_patterns),
        "truncatedPaths": res.truncated_paths,
    }
    return SpecSet(modifier, axioms, limits, res.truncated_paths, stats,
                   diagnostics, split_log, budget_error)


# ---------------------------------------------------------------- simplify

def _eq_key(e: Equation):
    return (e.observer, e.args)


def _canonical(eqs) -> tuple:
    return tuple(sorted(eqs, key=lambda e: (e.observer, e.args)))


def _encode_equations(eqs):
    """Each observer call becomes an opaque symbol; its equation becomes an
    atom over that symbol, so entailment between equations can be decided
    without interpreting the observers."""
    ids: dict = {}
    consts: dict = {}

    def var_for(key, int_valued):
        if key not in ids:
            sid = 10_000_000 + len(ids)
            ids[key] = (SymIntRef(sid, f"o{len(ids)}") if int_valued
                        else SymAddrRef(sid, f"o{len(ids)}"))
        return ids[key]

    def const_for(name):
        if name not in consts:
            sid = 20_000_000 + len(consts)
            consts[name] = SymAddrRef(sid, name)
        return consts[name]

    atoms = {}
    for e in eqs:
        rhs = e.rhs
        if isinstance(rhs, RInt):
            atoms[e] = Atom(C.EQ, var_for(_eq_key(e), True), IntConst(rhs.value))
        elif isinstance(rhs, RNull):
            atoms[e] = Atom(C.EQ, var_for(_eq_key(e), False), NullRef())
        elif isinstance(rhs, (RArg, RPostRoot)):
            atoms[e] = Atom(C.EQ, var_for(_eq_key(e), False), const_for(rhs.name))
        else:
            atoms[e] = None
    return atoms


def _drop_entailed(eqs: tuple) -> tuple:
    atoms = _encode_equations(eqs)
    kept = list(eqs)
    changed = True
    while changed:
        changed = False
        for e in sorted(kept, key=lambda x: (-len(x.render()), x.render())):
            a = atoms[e]
            if a is None:
                continue
            rest = [atoms[o] for o in kept if o is not e and atoms[o] is not None]
            if C.entails(Constraint(frozenset(rest)), a) == Entailment.YES:
                kept.remove(e)
                changed = True
                break
    return tuple(kept)


def simplify_spec(axioms: list) -> list:
    axioms = [Axiom(_canonical(a.pre), _canonical(a.post), a.ret,
                    a.provenance, a.approx) for a in axioms]
    changed = True
    while changed:
        changed = False
        # Same conclusion: keep the weaker premise. Only merge when one
        # premise set contains the other — then the intersection really is
        # their disjunction; intersecting incomparable premises would
        # promise the conclusion on inputs neither branch covered.
        for i in range(len(axioms)):
            for j in range(i + 1, len(axioms)):
                a, b = axioms[i], axioms[j]
                pa, pb = set(a.pre), set(b.pre)
                if (a.post == b.post and a.ret == b.ret
                        and (pa <= pb or pb <= pa)):
                    merged = Axiom(
                        _canonical(pa & pb), a.post, a.ret,
                        a.provenance + "+" + b.provenance, a.approx or b.approx)
                    axioms = [x for k, x in enumerate(axioms) if k not in (i, j)]
                    axioms.append(merged)
                    changed = True
                    break
            if changed:
                break
        if changed:
            continue
        # same premise: conclusions can be joined
        for i in range(len(axioms)):
            for j in range(i + 1, len(axioms)):
                a, b = axioms[i], axioms[j]
                if a.pre == b.pre and a.ret == b.ret:
                    merged = Axiom(
                        a.pre, _canonical(set(a.post) | set(b.post)), a.ret,
                        a.provenance + "+" + b.provenance, a.approx or b.approx)
                    axioms = [x for k, x in enumerate(axioms) if k not in (i, j)]
                    axioms.append(merged)
                    changed = True
                    break
            if changed:
                break
    axioms = [Axiom(_drop_entailed(a.pre), _drop_entailed(a.post), a.ret,
                    a.provenance, a.approx) for a in axioms]

    def size(a: Axiom) -> tuple:
        parts = [e.render() for e in a.pre + a.post]
        if a.ret is not None:
            parts.append(a.ret.render())
        text = " ".join(parts)
        return (len(a.pre), len(text), text)

    axioms.sort(key=size)
    return axioms
