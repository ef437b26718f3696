"""Principal simple types and the simple derivation the inference stages decorate.

Both stages of DLAL inference work on a table of term nodes rather than on
the term itself: every variable occurrence gets its own name, so that
contraction can be made explicit just before the abstraction that binds the
variable.  :func:`principal_simple_type` builds that table, computes the
principal type by first-order unification and packages the result as a
:class:`SimpleDeriv` tree with explicit contraction and weakening nodes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .. import terms as T
from ..formulas import Arrow, TVar, Type, _atom_names, type_to_str
from ..syntax import fresh_name


class SimpleTypeError(ValueError):
    """The term has no simple type (occurs-check failure or atom clash)."""


@dataclass
class TNode:
    """One node of the term tree.

    ``kind`` is ``'var'``, ``'abs'`` or ``'app'``.  Variables record the node
    id of their binder (``None`` for free variables) and a per-occurrence
    name; abstractions record the ids of the occurrences they bind.
    """

    id: int
    kind: str
    parent: Optional[int]
    edge: Optional[str]
    children: list = field(default_factory=list)
    var: str = ""  # variable name (var) or binder name (abs)
    occ: str = ""  # per-occurrence name of a variable node
    binder: Optional[int] = None
    occurrences: list = field(default_factory=list)
    stype: Optional[Type] = None
    path: tuple = ()

    def __repr__(self):
        return f"TNode({self.id}, {self.kind}, {self.var or ''})"


class TermTable:
    """Node table for a term whose bound variables have been made distinct."""

    def __init__(self, term: T.Term):
        self.original = term
        self.term = uniquify(term)
        self.nodes: list = []
        self.free: dict = {}  # free variable name -> list of occurrence node ids
        self._build(self.term)
        self._name_occurrences()

    def _build(self, t: T.Term):
        scope: dict = {}

        def go(node, parent, edge, path):
            n = TNode(len(self.nodes), "", parent, edge, path=path)
            self.nodes.append(n)
            if isinstance(node, T.Var):
                n.kind, n.var = "var", node.name
                b = scope.get(node.name)
                n.binder = b
                if b is None:
                    self.free.setdefault(node.name, []).append(n.id)
                else:
                    self.nodes[b].occurrences.append(n.id)
            elif isinstance(node, T.Abs):
                n.kind, n.var = "abs", node.var
                saved = scope.get(node.var)
                scope[node.var] = n.id
                n.children.append(go(node.body, n.id, T.BODY, path + (T.BODY,)))
                if saved is None:
                    del scope[node.var]
                else:
                    scope[node.var] = saved
            else:
                n.kind = "app"
                n.children.append(go(node.fun, n.id, T.FUN, path + (T.FUN,)))
                n.children.append(go(node.arg, n.id, T.ARG, path + (T.ARG,)))
            return n.id

        go(t, None, None, ())

    def _name_occurrences(self):
        avoid = set(T.bound_names(self.term)) | set(self.term.fv)
        groups = [(self.nodes[v].var, self.nodes[v].occurrences) for v in self.binders()]
        groups += [(name, occ) for name, occ in self.free.items()]
        for name, occ in groups:
            if len(occ) == 1:
                self.nodes[occ[0]].occ = name
                continue
            for o in occ:
                new = fresh_name(name + "_1", avoid)
                avoid.add(new)
                self.nodes[o].occ = new

    @property
    def root(self) -> TNode:
        return self.nodes[0]

    def binders(self):
        return [n.id for n in self.nodes if n.kind == "abs"]

    def occurrences_of(self, key) -> list:
        """Occurrence ids for a binder node id or a free variable name."""
        if isinstance(key, str):
            return list(self.free.get(key, []))
        return list(self.nodes[key].occurrences)

    def subtree(self, i: int) -> list:
        out, stack = [], [i]
        while stack:
            j = stack.pop()
            out.append(j)
            stack.extend(self.nodes[j].children)
        return out

    def is_ancestor(self, a: int, b: int) -> bool:
        """True when node ``a`` lies on the path from the root to ``b`` (inclusive)."""
        while b is not None:
            if b == a:
                return True
            b = self.nodes[b].parent
        return False

    def renamed_term(self, i: int = 0) -> T.Term:
        """Subterm at node ``i`` with every occurrence replaced by its per-occurrence name."""
        n = self.nodes[i]
        if n.kind == "var":
            return T.Var(n.occ)
        if n.kind == "abs":
            return T.Abs(n.var, self.renamed_term(n.children[0]))
        return T.App(self.renamed_term(n.children[0]), self.renamed_term(n.children[1]))


def uniquify(t: T.Term) -> T.Term:
    """α-rename bound variables so that no name is bound twice or clashes with a free one."""
    used = set(t.fv)

    def go(node, ren):
        if isinstance(node, T.Var):
            return T.Var(ren.get(node.name, node.name))
        if isinstance(node, T.App):
            return T.App(go(node.fun, ren), go(node.arg, ren))
        new = fresh_name(node.var, used)
        used.add(new)
        return T.Abs(new, go(node.body, {**ren, node.var: new}))

    return go(t, {})


# ---------------------------------------------------------------------------
# unification of simple types


class _Unifier:
    def __init__(self):
        self.subst: dict = {}
        self.counter = 0

    def fresh(self) -> TVar:
        self.counter += 1
        return TVar(f"_t{self.counter}")

    def resolve(self, a: Type) -> Type:
        while isinstance(a, TVar) and a.name in self.subst:
            a = self.subst[a.name]
        return a

    def deep(self, a: Type) -> Type:
        a = self.resolve(a)
        if isinstance(a, Arrow):
            return Arrow(self.deep(a.arg), self.deep(a.res))
        return a

    def occurs(self, name: str, a: Type) -> bool:
        a = self.resolve(a)
        if isinstance(a, TVar):
            return a.name == name
        return self.occurs(name, a.arg) or self.occurs(name, a.res)

    def unify(self, a: Type, b: Type) -> None:
        a, b = self.resolve(a), self.resolve(b)
        if isinstance(a, TVar) and isinstance(b, TVar) and a.name == b.name:
            return
        if isinstance(a, TVar) and a.name.startswith("_t"):
            if self.occurs(a.name, b):
                raise SimpleTypeError(f"occurs check: {a.name} in {type_to_str(self.deep(b))}")
            self.subst[a.name] = b
            return
        if isinstance(b, TVar) and b.name.startswith("_t"):
            self.unify(b, a)
            return
        if isinstance(a, Arrow) and isinstance(b, Arrow):
            self.unify(a.arg, b.arg)
            self.unify(a.res, b.res)
            return
        raise SimpleTypeError(f"cannot unify {type_to_str(self.deep(a))} with {type_to_str(self.deep(b))}")


def _rigid(a: Type, prefix: str) -> Type:
    """Rename the atoms of a user-supplied type so they act as unification variables."""
    if isinstance(a, TVar):
        return TVar(f"_t{prefix}{a.name}")
    if isinstance(a, Arrow):
        return Arrow(_rigid(a.arg, prefix), _rigid(a.res, prefix))
    raise SimpleTypeError(f"not a simple type: {type_to_str(a)}")


def _rename_atoms(types: list) -> dict:
    """Map unification variables to ``a, b, c, …`` in order of first appearance."""
    mapping: dict = {}
    names = _atom_names()

    def walk(a):
        if isinstance(a, TVar):
            if a.name not in mapping:
                mapping[a.name] = TVar(next(names))
        else:
            walk(a.arg)
            walk(a.res)

    for a in types:
        walk(a)
    return mapping


def _apply(a: Type, mapping: dict) -> Type:
    if isinstance(a, TVar):
        return mapping.get(a.name, a)
    return Arrow(_apply(a.arg, mapping), _apply(a.res, mapping))


# ---------------------------------------------------------------------------
# simple derivations


@dataclass
class SimpleDeriv:
    """A simple-type derivation with explicit contraction and weakening.

    ``rule`` is one of ``ax``, ``app``, ``abs``, ``cntr``, ``weak``.  ``node``
    is the id of the term node the rule belongs to (for ``cntr``/``weak`` the
    abstraction they prepare).  ``env`` maps occurrence names to simple types.
    """

    rule: str
    term: T.Term
    type: Type
    env: dict
    premises: tuple = ()
    params: dict = field(default_factory=dict)
    node: Optional[int] = None

    def __str__(self):
        ctx = ", ".join(f"{k}: {type_to_str(v)}" for k, v in sorted(self.env.items()))
        return f"{ctx} ⊢ {T.to_str(self.term)} : {type_to_str(self.type)}"


def type_table(t: T.Term, env: Optional[dict] = None, simple_type: Optional[Type] = None):
    """Build the node table and give every node its simple type.

    ``env`` may fix the types of free variables and ``simple_type`` may fix
    (an instance of) the type of the whole term; both are unified with the
    principal typing.
    """
    table = TermTable(t)
    u = _Unifier()
    tv = {}
    free_tv = {name: u.fresh() for name in table.free}
    binder_tv = {}
    for n in table.nodes:
        tv[n.id] = u.fresh()
        if n.kind == "abs":
            binder_tv[n.id] = u.fresh()
    for n in table.nodes:
        if n.kind == "var":
            target = free_tv[n.var] if n.binder is None else binder_tv[n.binder]
            u.unify(tv[n.id], target)
        elif n.kind == "abs":
            u.unify(tv[n.id], Arrow(binder_tv[n.id], tv[n.children[0]]))
        else:
            f, a = n.children
            u.unify(tv[f], Arrow(tv[a], tv[n.id]))
    for name, a in (env or {}).items():
        if name in free_tv:
            u.unify(free_tv[name], _rigid(a, "env"))
    if simple_type is not None:
        u.unify(tv[0], _rigid(simple_type, "hint"))
    root_type = u.deep(tv[0])
    env_types = {name: u.deep(v) for name, v in sorted(free_tv.items())}
    mapping = _rename_atoms([root_type] + list(env_types.values()) + [u.deep(tv[n.id]) for n in table.nodes])
    for n in table.nodes:
        n.stype = _apply(u.deep(tv[n.id]), mapping)
    binder_types = {b: _apply(u.deep(v), mapping) for b, v in binder_tv.items()}
    free_types = {name: _apply(v, mapping) for name, v in env_types.items()}
    return table, binder_types, free_types


def _simple_deriv(table: TermTable, binder_types: dict, free_types: dict) -> SimpleDeriv:
    def go(i) -> SimpleDeriv:
        n = table.nodes[i]
        if n.kind == "var":
            return SimpleDeriv("ax", T.Var(n.occ), n.stype, {n.occ: n.stype}, (), {"var": n.occ}, i)
        if n.kind == "app":
            f, a = (go(c) for c in n.children)
            env = {**f.env, **a.env}
            return SimpleDeriv("app", T.App(f.term, a.term), n.stype, env, (f, a), {}, i)
        body = go(n.children[0])
        body = _close_variable(body, table, n.var, table.occurrences_of(n.id), binder_types[n.id], i)
        env = {k: v for k, v in body.env.items() if k != n.var}
        return SimpleDeriv("abs", T.Abs(n.var, body.term), n.stype, env, (body,), {"binder": n.var}, i)

    d = go(0)
    for name in sorted(table.free):
        d = _close_variable(d, table, name, table.occurrences_of(name), free_types[name], None)
    return d


def _close_variable(d: SimpleDeriv, table, x: str, occ_ids: list, a: Type, node) -> SimpleDeriv:
    """Weaken ``x`` in, or contract its occurrences into ``x``."""
    if not occ_ids:
        return SimpleDeriv("weak", d.term, d.type, {**d.env, x: a}, (d,), {"var": x}, node)
    names = [table.nodes[o].occ for o in occ_ids]
    if len(names) == 1:
        return d
    current = names[0]
    for k, other in enumerate(names[1:]):
        merged = x if k == len(names) - 2 else fresh_name(x + "_m", set(d.env) | {x})
        term = T.rename_free(d.term, {current: merged, other: merged})
        env = {key: v for key, v in d.env.items() if key not in (current, other)}
        env[merged] = a
        d = SimpleDeriv("cntr", term, d.type, env, (d,), {"merged": [current, other, merged]}, node)
        current = merged
    return d


def principal_simple_type(t: T.Term, env: Optional[dict] = None, simple_type: Optional[Type] = None):
    """Principal simple type of ``t`` and its simple derivation.

    Returns ``(type, derivation)``.  Atoms are named ``a, b, c, …`` in order
    of appearance.  Raises :class:`SimpleTypeError` when ``t`` is not simply
    typable (or does not fit the given hints).
    """
    table, binder_types, free_types = type_table(t, env, simple_type)
    return table.root.stype, _simple_deriv(table, binder_types, free_types)
