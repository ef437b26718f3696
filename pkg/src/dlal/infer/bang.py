"""Turning one parameter instantiation into a DLAL skeleton, or rejecting it.

An instantiation φ fixes which applications are non-linear (their argument
will sit in a ``!`` box) and which variables live in the non-linear zone.
The checks below reject choices that no placement of paragraphs could
repair: a non-linear argument may mention at most one variable from
outside, a variable may not be threaded through two non-linear arguments,
and the occurrences merged by a contraction must agree on every implication.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from ..formulas import Type
from .abstract import AbstractDeriv, instantiate, is_true


@dataclass
class Rejection:
    """Why an instantiation was rejected.  Always falsy."""

    reason: str

    def __bool__(self):
        return False


@dataclass
class BangDeriv:
    """A term table annotated with ``⊸``/``⇒`` skeletons under one instantiation.

    ``skeletons`` gives every node's type without paragraphs, ``binder_skeletons``
    the type of each binder (abstraction id or free-variable name).
    ``bang_apps`` are the applications whose argument is non-linear and
    ``nonlinear`` the binders whose variable lives in the non-linear zone.
    ``bang_arg_occurrence`` records, for each non-linear application, the
    single variable occurrence its argument takes from outside (or ``None``).
    """

    abstract: AbstractDeriv
    phi: dict
    skeletons: dict
    binder_skeletons: dict
    bang_apps: frozenset
    nonlinear: frozenset
    bang_arg_occurrence: dict = field(default_factory=dict)

    @property
    def table(self):
        return self.abstract.table

    def binder_key(self, occurrence: int) -> Union[int, str]:
        n = self.table.nodes[occurrence]
        return n.var if n.binder is None else n.binder


def bang_check(ad: AbstractDeriv, phi: dict) -> Union[BangDeriv, Rejection]:
    """Check the non-linear argument discipline for ``phi``; build the skeleton derivation."""
    table = ad.table
    nodes = table.nodes
    bang_apps = frozenset(i for i, p in ad.app_param.items() if phi.get(p))
    nonlinear = set()
    for v, p in ad.abs_param.items():
        if phi.get(p) or is_true(ad.binder_types[v].params, phi):
            nonlinear.add(v)
    for name, occ in table.free.items():
        if len(occ) >= 2 or is_true(ad.binder_types[name].params, phi):
            nonlinear.add(name)

    def key(o):
        n = nodes[o]
        return n.var if n.binder is None else n.binder

    # which non-linear arguments each occurrence is threaded through
    crossings = {o: [] for o in range(len(nodes)) if nodes[o].kind == "var"}
    outside = {}
    for p in sorted(bang_apps):
        arg = nodes[p].children[1]
        inside = set(table.subtree(arg))
        free = [o for o in inside if nodes[o].kind == "var" and (nodes[o].binder is None or nodes[o].binder not in inside)]
        if len(free) > 1:
            names = sorted(nodes[o].var for o in free)
            return Rejection(f"non-linear argument at {_path(nodes[p])} uses {len(free)} outside occurrences ({', '.join(names)})")
        outside[p] = free[0] if free else None
        for o in free:
            crossings[o].append(p)
    for o, ps in crossings.items():
        if len(ps) > 1:
            return Rejection(f"occurrence of {nodes[o].var} is passed through {len(ps)} non-linear arguments")
        if ps and key(o) not in nonlinear:
            return Rejection(f"variable {nodes[o].var} is used in a non-linear argument but bound linearly")

    skeletons = {i: instantiate(ad.types[i], phi) for i in range(len(nodes))}
    binder_skeletons = {k: instantiate(a, phi) for k, a in ad.binder_types.items()}
    for o in crossings:
        if skeletons[o] != binder_skeletons[key(o)]:
            return Rejection(f"contracted occurrences of {nodes[o].var} disagree on their implications")
    return BangDeriv(ad, dict(phi), skeletons, binder_skeletons, bang_apps, frozenset(nonlinear), outside)


def _path(n) -> str:
    return "/".join(n.path) or "root"
