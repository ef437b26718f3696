"""Abstract types with boolean parameters and the constraints relating them.

A simple type is turned into an *abstract* type by attaching a set of
boolean parameters to every argument position.  Under an instantiation φ a
parameter set reads as the disjunction of its members, and an argument
position whose disjunction is true becomes the argument of a ``⇒`` instead of
a ``⊸``.  Walking the simple derivation produces one abstract type per node
together with a system of equations between parameter disjunctions; every
solution of that system is a candidate choice of implications which the
later stages either reject or turn into a full DLAL derivation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from ..formulas import Arrow, Imp, Lin, Par, TVar, Type, type_to_str
from .simple import TermTable, type_table


class ResourceLimit(RuntimeError):
    """Raised when a constraint system has too many free parameters to enumerate."""


PARAM_CAP = 64

ONE = "1"  # the constant true side of an equation


@dataclass(frozen=True)
class AAtom:
    name: str


@dataclass(frozen=True)
class AArrow:
    arg: "ADecorated"
    res: "ABasic"


ABasic = Union[AAtom, AArrow]


@dataclass(frozen=True)
class ADecorated:
    """A basic abstract type under a set of parameters, written ``u A``."""

    params: frozenset
    body: ABasic


def undecorated(a: ABasic) -> ADecorated:
    return ADecorated(frozenset(), a)


def abstract_to_str(a) -> str:
    if isinstance(a, ADecorated):
        inner = abstract_to_str(a.body)
        if not a.params:
            return inner
        if isinstance(a.body, AArrow):
            inner = f"({inner})"
        return "{" + ",".join(sorted(a.params, key=_param_key)) + "}" + inner
    if isinstance(a, AAtom):
        return a.name
    arg = abstract_to_str(a.arg)
    if isinstance(a.arg.body, AArrow) and not a.arg.params:
        arg = f"({arg})"
    return f"{arg} → {abstract_to_str(a.res)}"


def _param_key(p: str):
    return (len(p), p)


class ParamSupply:
    def __init__(self, prefix: str = "p"):
        self.prefix = prefix
        self.count = 0
        self.all: list = []

    def __call__(self) -> str:
        self.count += 1
        name = f"{self.prefix}{self.count}"
        self.all.append(name)
        return name


def maximal_decoration(a: Type, fresh: ParamSupply) -> ABasic:
    """Decorate every argument position of a simple type with its own fresh parameter."""
    if isinstance(a, TVar):
        return AAtom(a.name)
    if isinstance(a, Arrow):
        arg = ADecorated(frozenset((fresh(),)), maximal_decoration(a.arg, fresh))
        return AArrow(arg, maximal_decoration(a.res, fresh))
    raise TypeError(f"not a simple type: {type_to_str(a)}")


# ---------------------------------------------------------------------------
# constraints


@dataclass(frozen=True)
class Equation:
    """``lhs = rhs`` where each side is a frozenset of parameters (their disjunction) or ``ONE``."""

    lhs: object
    rhs: object

    def __str__(self):
        return f"{_side_str(self.lhs)} = {_side_str(self.rhs)}"


def _side_str(side) -> str:
    if side == ONE:
        return "1"
    if not side:
        return "0"
    return " ∨ ".join(sorted(side, key=_param_key))


@dataclass
class ConstraintSet:
    equations: list = field(default_factory=list)
    absurd: bool = False
    reasons: list = field(default_factory=list)

    def add(self, lhs, rhs):
        if lhs == rhs:
            return
        self.equations.append(Equation(lhs, rhs))

    def fail(self, why: str):
        self.absurd = True
        self.reasons.append(why)

    def extend(self, other: "ConstraintSet"):
        self.equations.extend(other.equations)
        if other.absurd:
            self.absurd = True
            self.reasons.extend(other.reasons)

    def __str__(self):
        if self.absurd:
            return "false"
        return "{" + ", ".join(str(e) for e in self.equations) + "}"


def unify_abstract(a: ADecorated, b: ADecorated) -> ConstraintSet:
    """Equations forcing two decorated types to agree (false on a shape clash)."""
    out = ConstraintSet()
    _unify(a, b, out)
    return out


def _unify(a: ADecorated, b: ADecorated, out: ConstraintSet):
    out.add(a.params, b.params)
    x, y = a.body, b.body
    if isinstance(x, AAtom) and isinstance(y, AAtom):
        if x.name != y.name:
            out.fail(f"atoms {x.name} and {y.name} differ")
        return
    if isinstance(x, AArrow) and isinstance(y, AArrow):
        _unify(x.arg, y.arg, out)
        _unify(undecorated(x.res), undecorated(y.res), out)
        return
    out.fail(f"shape clash between {abstract_to_str(x)} and {abstract_to_str(y)}")


def merge_types(a: ADecorated, b: ADecorated) -> ADecorated:
    """Position-wise union of the parameters of two decorated types of the same shape."""
    return ADecorated(a.params | b.params, _merge_basic(a.body, b.body))


def _merge_basic(x: ABasic, y: ABasic) -> ABasic:
    if isinstance(x, AAtom) and isinstance(y, AAtom) and x.name == y.name:
        return x
    if isinstance(x, AArrow) and isinstance(y, AArrow):
        return AArrow(merge_types(x.arg, y.arg), _merge_basic(x.res, y.res))
    raise ValueError("cannot merge abstract types of different shapes")


# ---------------------------------------------------------------------------
# the abstract derivation


@dataclass
class AbstractDeriv:
    """Abstract types for every node of the term table, plus the constraint system.

    ``types`` maps node ids to the basic abstract type of the judgement at
    that node.  ``occurrence_types`` maps variable occurrences to the
    decorated type of their context entry just before the binder abstracts
    them (so it already carries the parameters of every application whose
    argument contains the occurrence).  ``binder_types`` holds the merged
    type of each binder (abstraction node id or free-variable name).
    """

    table: TermTable
    types: dict
    occurrence_types: dict
    binder_types: dict
    abs_param: dict
    app_param: dict
    params: list
    constraints: ConstraintSet
    simple_binder_types: dict = field(default_factory=dict)
    simple_free_types: dict = field(default_factory=dict)

    def pretty(self) -> str:
        lines = []
        for n in self.table.nodes:
            label = {"var": n.occ, "abs": f"λ{n.var}", "app": "@"}[n.kind]
            par = self.abs_param.get(n.id) or self.app_param.get(n.id) or ""
            lines.append(f"{n.id:3} {label:<8} {par:<5} {abstract_to_str(self.types[n.id])}")
        lines.append("constraints: " + str(self.constraints))
        return "\n".join(lines)


def abstract_derivation(t, env=None, simple_type=None) -> AbstractDeriv:
    """Decorate the simple derivation of ``t`` and collect its parameter constraints.

    Variables get a maximal decoration of their simple type.  An application
    with parameter ``a`` asks the function's argument type to equal ``a``
    times the argument's type and adds ``a`` to the top of every context
    entry coming from the argument.  An abstraction with parameter ``a``
    merges the occurrences of its variable, and forces ``a = 1`` when the
    variable occurs more than once.
    """
    table, binder_simple, free_simple = type_table(t, env, simple_type)
    fresh = ParamSupply()
    cs = ConstraintSet()
    types: dict = {}
    occ_types: dict = {}
    binder_types: dict = {}
    abs_param: dict = {}
    app_param: dict = {}

    def go(i) -> set:
        """Fill in node ``i``; return the ids of the free occurrences below it."""
        n = table.nodes[i]
        if n.kind == "var":
            types[i] = maximal_decoration(n.stype, fresh)
            occ_types[i] = undecorated(types[i])
            return {i}
        if n.kind == "app":
            f, a = n.children
            free_f, free_a = go(f), go(a)
            p = fresh()
            app_param[i] = p
            ftype = types[f]
            assert isinstance(ftype, AArrow)
            cs.extend(unify_abstract(ftype.arg, ADecorated(frozenset((p,)), types[a])))
            for o in free_a:
                old = occ_types[o]
                occ_types[o] = ADecorated(old.params | {p}, old.body)
            types[i] = ftype.res
            return free_f | free_a
        free_b = go(n.children[0])
        p = fresh()
        abs_param[i] = p
        occ = table.occurrences_of(i)
        merged = _merge_occurrences(occ, occ_types, binder_simple[i], fresh)
        binder_types[i] = merged
        if len(occ) >= 2:
            cs.add(frozenset((p,)), ONE)
        types[i] = AArrow(ADecorated(merged.params | {p}, merged.body), types[n.children[0]])
        return free_b - set(occ)

    go(0)
    for name, occ in table.free.items():
        binder_types[name] = _merge_occurrences(occ, occ_types, free_simple[name], fresh)
    return AbstractDeriv(
        table, types, occ_types, binder_types, abs_param, app_param, list(fresh.all), cs, binder_simple, free_simple
    )


def _merge_occurrences(occ, occ_types, simple, fresh) -> ADecorated:
    if not occ:
        return undecorated(maximal_decoration(simple, fresh))
    merged = occ_types[occ[0]]
    for o in occ[1:]:
        merged = merge_types(merged, occ_types[o])
    return merged


def expected_constraints(a: ABasic, expected: Type) -> ConstraintSet:
    """Equations forcing the implications of ``a`` to match a propositional DLAL type.

    Paragraphs in ``expected`` are ignored here (they are stage 2's business);
    an argument position becomes ``1`` under ``⇒`` and ``0`` under ``⊸``.
    """
    out = ConstraintSet()
    _expect(a, expected, out)
    return out


def _expect(a: ABasic, b: Type, out: ConstraintSet):
    while isinstance(b, Par):
        b = b.body
    if isinstance(a, AAtom):
        if not (isinstance(b, TVar) and b.name == a.name):
            out.fail(f"expected {type_to_str(b)} where the simple type has atom {a.name}")
        return
    if not isinstance(b, (Lin, Imp)):
        out.fail(f"expected {type_to_str(b)} where the simple type has an arrow")
        return
    out.add(a.arg.params, ONE if isinstance(b, Imp) else frozenset())
    _expect(a.arg.body, b.arg, out)
    _expect(a.res, b.res, out)


# ---------------------------------------------------------------------------
# solving


class _Classes:
    """Union-find over parameters, used to merge single-parameter equalities."""

    def __init__(self, params):
        self.parent = {p: p for p in params}

    def find(self, p):
        while self.parent[p] != p:
            self.parent[p] = self.parent[self.parent[p]]
            p = self.parent[p]
        return p

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            if _param_key(rb) < _param_key(ra):
                ra, rb = rb, ra
            self.parent[rb] = ra


@dataclass
class Solver:
    """A constraint system reduced to free classes and residual equations."""

    params: list
    classes: _Classes
    fixed: dict
    free: list
    residual: list  # of (frozenset of classes | ONE, frozenset of classes | ONE)
    unsat: bool = False

    def expand(self, assignment: dict) -> dict:
        out = {}
        for p in self.params:
            r = self.classes.find(p)
            out[p] = self.fixed[r] if r in self.fixed else assignment[r]
        return out


def prepare(cs: ConstraintSet, params) -> Solver:
    """Merge equal parameters and fix forced values; raise ResourceLimit above the cap."""
    params = list(params)
    classes = _Classes(params)
    for e in cs.equations:
        for side in (e.lhs, e.rhs):
            if side != ONE:
                for p in side:
                    classes.parent.setdefault(p, p)
    if cs.absurd:
        return Solver(params, classes, {}, [], [], unsat=True)
    for e in cs.equations:
        if e.lhs != ONE and e.rhs != ONE and len(e.lhs) == 1 and len(e.rhs) == 1:
            classes.union(next(iter(e.lhs)), next(iter(e.rhs)))

    def lift(side):
        return ONE if side == ONE else frozenset(classes.find(p) for p in side)

    residual = []
    for e in cs.equations:
        lhs, rhs = lift(e.lhs), lift(e.rhs)
        if lhs != rhs:
            residual.append((lhs, rhs))
    fixed: dict = {}
    unsat = False
    changed = True
    while changed and not unsat:
        changed = False
        for lhs, rhs in residual:
            for a, b in ((lhs, rhs), (rhs, lhs)):
                if a == ONE or (a != ONE and any(fixed.get(c) == 1 for c in a)):
                    # b must be true
                    if b == ONE:
                        continue
                    open_ = [c for c in b if c not in fixed]
                    if any(fixed.get(c) == 1 for c in b):
                        continue
                    if not open_:
                        unsat = True
                    elif len(open_) == 1:
                        fixed[open_[0]] = 1
                        changed = True
                elif a != ONE and all(fixed.get(c) == 0 for c in a):
                    if b == ONE:
                        unsat = True
                        continue
                    for c in b:
                        if fixed.get(c) == 1:
                            unsat = True
                        elif c not in fixed:
                            fixed[c] = 0
                            changed = True
    roots = sorted({classes.find(p) for p in classes.parent}, key=_param_key)
    free = [r for r in roots if r not in fixed]
    if len(free) > PARAM_CAP:
        raise ResourceLimit(f"{len(free)} free parameters exceed the cap of {PARAM_CAP}")
    residual = [
        (lhs, rhs)
        for lhs, rhs in residual
        if not (_value(lhs, fixed) is not None and _value(lhs, fixed) == _value(rhs, fixed))
    ]
    return Solver(params, classes, fixed, free, residual, unsat)


def _value(side, assignment) -> Optional[int]:
    """1, 0, or None (undetermined) for a side under a partial assignment."""
    if side == ONE:
        return 1
    unknown = False
    for c in side:
        v = assignment.get(c)
        if v == 1:
            return 1
        if v is None:
            unknown = True
    return None if unknown else 0


def iter_solutions(cs: ConstraintSet, params) -> Iterator[dict]:
    """Solutions of ``cs`` over ``params``, in rounds of increasing true classes.

    Parameters that the equations force to be equal are merged into one
    class first; round ``k`` lists the assignments with exactly ``k`` true
    classes.  A solution therefore never comes after one that is pointwise
    smaller, although raw counts of true parameters may go down between
    rounds when classes have different sizes.

    Each solution maps every parameter to 0 or 1.  The enumeration is lazy,
    so callers can stop after the first few candidates.
    """
    solver = prepare(cs, params)
    if solver.unsat:
        return
    free = solver.free
    n = len(free)
    # for each free class, the residual equations that mention it
    watch = {c: [] for c in free}
    for k, (lhs, rhs) in enumerate(solver.residual):
        for side in (lhs, rhs):
            if side != ONE:
                for c in side:
                    if c in watch:
                        watch[c].append(k)
    def consistent(assign, touched) -> bool:
        for k in watch[touched]:
            lhs, rhs = solver.residual[k]
            a, b = _value(lhs, assign), _value(rhs, assign)
            if a is not None and b is not None and a != b:
                return False
        return True

    base = dict(solver.fixed)
    for ones in range(n + 1):
        yield from _search(free, 0, ones, base, consistent, solver)


def _search(free, idx, ones, assign, consistent, solver):
    remaining = len(free) - idx
    if ones < 0 or ones > remaining:
        return
    if idx == len(free):
        if all(_value(l, assign) == _value(r, assign) for l, r in solver.residual):
            yield solver.expand(assign)
        return
    c = free[idx]
    for v in (0, 1):
        if v == 0 and ones == remaining:
            continue
        assign[c] = v
        if consistent(assign, c):
            yield from _search(free, idx + 1, ones - v, assign, consistent, solver)
        del assign[c]


def enumerate_solutions(cs: ConstraintSet, params=None, limit: Optional[int] = None) -> list:
    """All solutions (or the first ``limit``) of ``cs``, in the order of :func:`iter_solutions`."""
    if params is None:
        params = sorted(
            {p for e in cs.equations for side in (e.lhs, e.rhs) if side != ONE for p in side}, key=_param_key
        )
    return list(itertools.islice(iter_solutions(cs, params), limit))


def satisfies(cs: ConstraintSet, phi: dict) -> bool:
    if cs.absurd:
        return False
    return all(_value(e.lhs, phi) == _value(e.rhs, phi) for e in cs.equations)


# ---------------------------------------------------------------------------
# instantiation


def instantiate(a, phi: dict) -> Type:
    """The DLAL skeleton (``⊸``/``⇒``, no paragraphs) an abstract type denotes under φ."""
    if isinstance(a, ADecorated):
        a = a.body
    if isinstance(a, AAtom):
        return TVar(a.name)
    arg = instantiate(a.arg.body, phi)
    res = instantiate(a.res, phi)
    if any(phi.get(p) for p in a.arg.params):
        return Imp(arg, res)
    return Lin(arg, res)


def is_true(params, phi) -> bool:
    return any(phi.get(p) for p in params)
