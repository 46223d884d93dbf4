"""Constraint language for the two condition cells, with a built-in decision
procedure (no external solver).

Terms cover symbolic addresses, NULL, field paths, integer constants and
symbols, opaque data tokens, and +/- over integers. A Constraint is a set of
atoms (conjunction); the empty set is True.

Satisfiability is decided by
  (i)  congruence closure over the equality atoms of the address/data
       universe, with field paths treated as uninterpreted function
       applications and NULL as a distinguished constant, refuted by any
       disequality collapsing into one class; and
  (ii) integer reasoning: each arithmetic atom is normalized to
       "unit-coefficient linear term >= constant" and intervals are
       propagated between single-variable and multi-variable terms until
       fixpoint; crossing bounds refute.
Anything outside that fragment makes the verdict Unknown rather than wrong:
Unsat is only ever returned with an actual refutation in hand.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass

# ---------------------------------------------------------------- terms

@dataclass(frozen=True)
class Term:
    pass


@dataclass(frozen=True)
class SymAddrRef(Term):
    sid: int
    display: str


@dataclass(frozen=True)
class NullRef(Term):
    pass


NULL = NullRef()


@dataclass(frozen=True)
class FieldPath(Term):
    base: SymAddrRef
    fields: tuple[str, ...]


@dataclass(frozen=True)
class IntConst(Term):
    value: int


@dataclass(frozen=True)
class SymIntRef(Term):
    sid: int
    display: str


@dataclass(frozen=True)
class SymDataRef(Term):
    sid: int
    display: str


@dataclass(frozen=True)
class Add(Term):
    left: Term
    right: Term


@dataclass(frozen=True)
class Sub(Term):
    left: Term
    right: Term


EQ, NEQ, LT, LE, GT, GE = "=", "!=", "<", "<=", ">", ">="
_NEGATION = {EQ: NEQ, NEQ: EQ, LT: GE, GE: LT, LE: GT, GT: LE}


@dataclass(frozen=True)
class Atom:
    op: str
    lhs: Term
    rhs: Term


def negate_atom(a: Atom) -> Atom:
    return Atom(_NEGATION[a.op], a.lhs, a.rhs)


@dataclass(frozen=True)
class Constraint:
    atoms: frozenset[Atom]

    @property
    def is_true(self) -> bool:
        return not self.atoms

    def with_atom(self, a: Atom) -> "Constraint":
        return Constraint(self.atoms | {a})


TRUE = Constraint(frozenset())


def constraint(*atoms: Atom) -> Constraint:
    return Constraint(frozenset(atoms))


def conjoin(a: Constraint, b: Constraint) -> Constraint:
    return Constraint(a.atoms | b.atoms)


class SatResult(enum.Enum):
    SAT = "sat"
    UNSAT = "unsat"
    UNKNOWN = "unknown"


# ---------------------------------------------------------------- rendering

def render_term(t: Term) -> str:
    if isinstance(t, SymAddrRef):
        return t.display.replace(".", "->")
    if isinstance(t, NullRef):
        return "NULL"
    if isinstance(t, FieldPath):
        return "->".join([t.base.display.replace(".", "->"), *t.fields])
    if isinstance(t, IntConst):
        return str(t.value)
    if isinstance(t, SymIntRef):
        return "?" + t.display.replace(".", "->")
    if isinstance(t, SymDataRef):
        return "?" + t.display.replace(".", "->")
    if isinstance(t, Add):
        return f"{render_term(t.left)} + {render_term(t.right)}"
    if isinstance(t, Sub):
        return f"{render_term(t.left)} - {render_term(t.right)}"
    raise TypeError(f"unknown term {t!r}")


def render_atom(a: Atom) -> str:
    return f"{render_term(a.lhs)} {a.op} {render_term(a.rhs)}"


def render_constraint(c: Constraint) -> str:
    if c.is_true:
        return "true"
    return " /\\ ".join(sorted(render_atom(a) for a in c.atoms))


# ---------------------------------------------------------------- sorts

def is_int_term(t: Term) -> bool:
    return isinstance(t, (IntConst, SymIntRef, Add, Sub))


def _is_int_atom(a: Atom) -> bool:
    if a.op in (LT, LE, GT, GE):
        return True
    return is_int_term(a.lhs) or is_int_term(a.rhs)


# ---------------------------------------------------------------- congruence

class _UnionFind:
    def __init__(self):
        self.parent: dict = {}

    def find(self, x):
        self.parent.setdefault(x, x)
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def _congruence_classes(atoms) -> tuple[_UnionFind, list[Atom], list[Term]]:
    """Union-find over the non-integer terms, closed under field-path
    congruence (equal bases and equal field chains collapse)."""
    uf = _UnionFind()
    terms: set[Term] = set()
    eqs, neqs = [], []
    for a in atoms:
        terms.add(a.lhs)
        terms.add(a.rhs)
        for t in (a.lhs, a.rhs):
            if isinstance(t, FieldPath):
                terms.add(t.base)
        if a.op == EQ:
            eqs.append(a)
        elif a.op == NEQ:
            neqs.append(a)
    for t in terms:
        uf.find(t)
    for a in eqs:
        uf.union(a.lhs, a.rhs)
    # congruence over field paths: same field chain, unified base
    paths = [t for t in terms if isinstance(t, FieldPath)]
    changed = True
    while changed:
        changed = False
        for p1, p2 in itertools.combinations(paths, 2):
            if p1.fields == p2.fields and uf.find(p1.base) == uf.find(p2.base):
                if uf.find(p1) != uf.find(p2):
                    uf.union(p1, p2)
                    changed = True
    return uf, neqs, sorted(terms, key=render_term)


# ---------------------------------------------------------------- integers

def _linearize(t: Term):
    """Return (coeffs: {SymIntRef: int}, const: int) or None if non-linear
    scaffolding shows up (it cannot, with only Add/Sub)."""
    if isinstance(t, IntConst):
        return {}, t.value
    if isinstance(t, SymIntRef):
        return {t: 1}, 0
    if isinstance(t, (Add, Sub)):
        l = _linearize(t.left)
        r = _linearize(t.right)
        if l is None or r is None:
            return None
        sign = 1 if isinstance(t, Add) else -1
        coeffs = dict(l[0])
        for k, v in r[0].items():
            coeffs[k] = coeffs.get(k, 0) + sign * v
        return {k: v for k, v in coeffs.items() if v != 0}, l[1] + sign * r[1]
    return None


def _norm_int_atom(a: Atom):
    """Normalize to a list of (key, lo, hi) interval facts over canonical
    linear-term keys, or None when the atom leaves the supported fragment.

    key: tuple of (SymIntRef, coeff) sorted by display, sign-normalized so
    the first coefficient is positive; every |coeff| must be 1.
    """
    l = _linearize(a.lhs)
    r = _linearize(a.rhs)
    if l is None or r is None:
        return None
    coeffs = dict(l[0])
    for k, v in r[0].items():
        coeffs[k] = coeffs.get(k, 0) - v
    coeffs = {k: v for k, v in coeffs.items() if v != 0}
    const = l[1] - r[1]  # atom is: sum(coeffs) + const  <op>  0
    if any(abs(v) != 1 for v in coeffs.values()):
        return None
    if not coeffs:
        holds = {
            EQ: const == 0, NEQ: const != 0,
            LT: const < 0, LE: const <= 0, GT: const > 0, GE: const >= 0,
        }[a.op]
        return [] if holds else [("contradiction", 0, -1)]
    items = sorted(coeffs.items(), key=lambda kv: (kv[0].display, kv[0].sid))
    flip = items[0][1] < 0
    if flip:
        items = [(k, -v) for k, v in items]
        const = -const
        op = {EQ: EQ, NEQ: NEQ, LT: GT, GT: LT, LE: GE, GE: LE}[a.op]
    else:
        op = a.op
    key = tuple(items)
    # facts constrain: term := sum(items); term + const <op> 0  =>  term <op> -const
    b = -const
    inf = None
    if op == EQ:
        return [(key, b, b)]
    if op == NEQ:
        return [(key, ("neq", b), ("neq", b))]  # handled separately
    if op == LE:
        return [(key, inf, b)]
    if op == LT:
        return [(key, inf, b - 1)]
    if op == GE:
        return [(key, b, inf)]
    if op == GT:
        return [(key, b + 1, inf)]
    raise AssertionError(op)


def _int_sat(atoms) -> SatResult:
    """Interval propagation over canonical linear keys. Returns UNSAT only on
    a genuine crossing; SAT when every atom was representable; UNKNOWN
    otherwise."""
    unknown = False
    bounds: dict[tuple, list] = {}  # key -> [lo, hi] (None = unbounded)
    neqs: list[tuple[tuple, int]] = []

    def add_fact(key, lo, hi):
        b = bounds.setdefault(key, [None, None])
        if lo is not None and (b[0] is None or lo > b[0]):
            b[0] = lo
        if hi is not None and (b[1] is None or hi < b[1]):
            b[1] = hi

    for a in atoms:
        facts = _norm_int_atom(a)
        if facts is None:
            unknown = True
            continue
        for key, lo, hi in facts:
            if key == "contradiction":
                return SatResult.UNSAT
            if isinstance(lo, tuple) and lo[0] == "neq":
                neqs.append((key, lo[1]))
                continue
            add_fact(key, lo, hi)

    single = {}  # SymIntRef -> key of its singleton term
    for key in list(bounds):
        if len(key) == 1 and key[0][1] == 1:
            single[key[0][0]] = key

    def var_interval(v):
        key = single.get(v)
        if key is None or key not in bounds:
            return (None, None)
        return tuple(bounds[key])

    # propagate between multi-variable terms and their variables
    for _ in range(64):
        changed = False
        for key, (lo, hi) in list(bounds.items()):
            if len(key) == 1:
                continue
            # derive a bound for each variable when all the others are bounded
            for i, (v, coeff) in enumerate(key):
                rest = [key[j] for j in range(len(key)) if j != i]
                rest_lo = rest_hi = 0
                ok_lo = ok_hi = True
                for rv, rc in rest:
                    rlo, rhi = var_interval(rv)
                    a_, b_ = (rlo, rhi) if rc == 1 else ((None if rhi is None else -rhi),
                                                         (None if rlo is None else -rlo))
                    if a_ is None:
                        ok_lo = False
                    else:
                        rest_lo += a_
                    if b_ is None:
                        ok_hi = False
                    else:
                        rest_hi += b_
                vkey = ((v, 1),)
                # coeff*v = term - rest
                if lo is not None and ok_hi:
                    t_lo = lo - rest_hi  # coeff*v >= t_lo
                    if coeff == 1:
                        nlo, nhi = t_lo, None
                    else:
                        nlo, nhi = None, -t_lo
                    b0 = bounds.get(vkey, [None, None])
                    if (nlo is not None and (b0[0] is None or nlo > b0[0])) or \
                       (nhi is not None and (b0[1] is None or nhi < b0[1])):
                        add_fact(vkey, nlo, nhi)
                        single[v] = vkey
                        changed = True
                if hi is not None and ok_lo:
                    t_hi = hi - rest_lo  # coeff*v <= t_hi
                    if coeff == 1:
                        nlo, nhi = None, t_hi
                    else:
                        nlo, nhi = -t_hi, None
                    b0 = bounds.get(vkey, [None, None])
                    if (nlo is not None and (b0[0] is None or nlo > b0[0])) or \
                       (nhi is not None and (b0[1] is None or nhi < b0[1])):
                        add_fact(vkey, nlo, nhi)
                        single[v] = vkey
                        changed = True
        # tighten multi-variable terms from their variables' intervals
        for key in list(bounds):
            if len(key) == 1:
                continue
            t_lo = t_hi = 0
            ok_lo = ok_hi = True
            for v, c in key:
                vlo, vhi = var_interval(v)
                a_, b_ = (vlo, vhi) if c == 1 else ((None if vhi is None else -vhi),
                                                    (None if vlo is None else -vlo))
                if a_ is None:
                    ok_lo = False
                else:
                    t_lo += a_
                if b_ is None:
                    ok_hi = False
                else:
                    t_hi += b_
            b0 = bounds[key]
            if ok_lo and (b0[0] is None or t_lo > b0[0]):
                b0[0] = t_lo
                changed = True
            if ok_hi and (b0[1] is None or t_hi < b0[1]):
                b0[1] = t_hi
                changed = True
        if not changed:
            break

    for key, (lo, hi) in bounds.items():
        if lo is not None and hi is not None and lo > hi:
            return SatResult.UNSAT
    for key, forbidden in neqs:
        b = bounds.get(key)
        if b and b[0] is not None and b[0] == b[1] == forbidden:
            return SatResult.UNSAT
    return SatResult.UNKNOWN if unknown else SatResult.SAT


# ---------------------------------------------------------------- checkSat

def check_sat(c: Constraint) -> SatResult:
    int_atoms = [a for a in c.atoms if _is_int_atom(a)]
    eq_atoms = [a for a in c.atoms if not _is_int_atom(a)]

    uf, neqs, _terms = _congruence_classes(eq_atoms)
    for a in neqs:
        if uf.find(a.lhs) == uf.find(a.rhs):
            return SatResult.UNSAT

    r = _int_sat(int_atoms)
    if r == SatResult.UNSAT:
        return SatResult.UNSAT

    bad_sorts = any(
        not isinstance(t, (SymAddrRef, NullRef, FieldPath, SymDataRef))
        for a in eq_atoms for t in (a.lhs, a.rhs)
    )
    if bad_sorts or r == SatResult.UNKNOWN:
        return SatResult.UNKNOWN
    return SatResult.SAT


class Entailment(enum.Enum):
    YES = "yes"
    NO = "no"
    UNKNOWN = "unknown"


def entails(c: Constraint, a: Atom) -> Entailment:
    r = check_sat(conjoin(c, constraint(negate_atom(a))))
    if r == SatResult.UNSAT:
        return Entailment.YES
    if r == SatResult.SAT:
        return Entailment.NO
    return Entailment.UNKNOWN


# ---------------------------------------------------------------- simplify

class UnsatInput(Exception):
    pass


def _addrish(t: Term) -> bool:
    return isinstance(t, (SymAddrRef, NullRef, FieldPath, SymDataRef))


def _class_representative(members: list[Term]) -> Term:
    for m in members:
        if isinstance(m, NullRef):
            return m
    return min(members, key=lambda m: (len(render_term(m)), render_term(m)))


def simplify_constraint(c: Constraint) -> Constraint:
    if check_sat(c) == SatResult.UNSAT:
        raise UnsatInput(render_constraint(c))

    # 1. canonicalize aliases: keep member = representative equations, and
    #    substitute representatives into every other atom
    eqs = [a for a in c.atoms if a.op == EQ and _addrish(a.lhs) and _addrish(a.rhs)]
    uf, _, terms = _congruence_classes(eqs)
    classes: dict[Term, list[Term]] = {}
    for t in terms:
        classes.setdefault(uf.find(t), []).append(t)
    rep: dict[Term, Term] = {}
    for members in classes.values():
        r = _class_representative(members)
        for m in members:
            rep[m] = r

    def subst(t: Term) -> Term:
        if t in rep:
            return rep[t]
        if isinstance(t, FieldPath) and t.base in rep and isinstance(rep[t.base], SymAddrRef):
            return FieldPath(rep[t.base], t.fields)
        return t

    rebuilt: set[Atom] = set()
    for members in classes.values():
        r = _class_representative(members)
        for m in members:
            if m != r:
                rebuilt.add(Atom(EQ, m, r))
    for a in c.atoms:
        if a in eqs:
            continue
        na = Atom(a.op, subst(a.lhs), subst(a.rhs))
        if na.op == EQ and na.lhs == na.rhs:
            continue
        rebuilt.add(na)

    # 2. drop atoms entailed by the rest, trying the syntactically greatest
    #    first so the least member of a redundant group survives
    atoms = set(rebuilt)
    while True:
        dropped = False
        for a in sorted(atoms, key=lambda x: (-len(render_atom(x)), render_atom(x), x.op)):
            rest = Constraint(frozenset(atoms - {a}))
            if entails(rest, a) == Entailment.YES:
                atoms.discard(a)
                dropped = True
                break
        if not dropped:
            break
    return Constraint(frozenset(atoms))
