"""DLAL type inference for plain lambda terms.

The pipeline has three steps:

1. :func:`principal_simple_type` types the term in the simply typed
   lambda calculus and gives every variable occurrence its own name.
2. :func:`abstract_derivation` decorates that derivation with boolean
   parameters that decide, for each argument position, between ``⊸`` and
   ``⇒``; :func:`iter_solutions` enumerates the admissible choices and
   :func:`bang_check` discards those that break the discipline of
   non-linear arguments.
3. :func:`place_paragraphs` searches for the ``§`` boxes and produces a
   derivation script, which is re-checked before it is returned.

:func:`infer` runs the three steps and returns every distinct typing it
finds within the given limits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .. import derivation as D
from ..formulas import Type, erase_to_simple, type_to_str
from .abstract import (
    PARAM_CAP,
    AbstractDeriv,
    ConstraintSet,
    Equation,
    ResourceLimit,
    abstract_derivation,
    abstract_to_str,
    expected_constraints,
    enumerate_solutions,
    instantiate,
    iter_solutions,
    maximal_decoration,
    merge_types,
    satisfies,
    unify_abstract,
)
from .bang import BangDeriv, Rejection, bang_check
from .paragraphs import ParagraphSearch, Placement, place_paragraphs, placements_with
from .simple import SimpleDeriv, SimpleTypeError, TermTable, principal_simple_type

__all__ = [
    "InferResult",
    "InferReport",
    "infer",
    "infer_report",
    "principal_simple_type",
    "abstract_derivation",
    "maximal_decoration",
    "unify_abstract",
    "merge_types",
    "enumerate_solutions",
    "iter_solutions",
    "bang_check",
    "place_paragraphs",
    "ResourceLimit",
    "SimpleTypeError",
    "PARAM_CAP",
]


@dataclass
class InferResult:
    """One DLAL typing: the type, its checked derivation script and how it was found."""

    type: Type
    script: D.Deriv
    phi: dict
    boxes: dict
    judgement: D.Judgement

    def __iter__(self):
        # allows ``for ty, script in infer(t)``
        yield self.type
        yield self.script

    def to_json(self) -> dict:
        return {
            "type": type_to_str(self.type),
            "phi": {k: v for k, v in sorted(self.phi.items(), key=lambda kv: (len(kv[0]), kv[0]))},
            "levels": self.boxes,
            "script": D.to_json(self.script),
        }


@dataclass
class InferReport:
    """Everything :func:`infer` learned, including why candidates were dropped."""

    simple_type: Optional[Type]
    results: list
    solutions_tried: int
    rejections: list
    truncated: bool
    error: Optional[str] = None


def infer_report(
    t,
    level_cap: int = 8,
    simple_type: Optional[Type] = None,
    env: Optional[dict] = None,
    limit: Optional[int] = None,
    phi_limit: int = 256,
    max_boxes: Optional[int] = None,
    search_budget: int = 200_000,
    expected: Optional[Type] = None,
) -> InferReport:
    """Run inference and keep the diagnostics.  See :func:`infer` for the parameters."""
    if expected is not None and simple_type is None:
        simple_type = erase_to_simple(expected)
    try:
        ad = abstract_derivation(t, env, simple_type)
    except SimpleTypeError as e:
        return InferReport(None, [], 0, [], False, f"not simply typable: {e}")
    if expected is not None:
        ad.constraints.extend(expected_constraints(ad.types[0], expected))
    results: list = []
    rejections: list = []
    searches = []
    tried = 0
    truncated = False
    for phi in iter_solutions(ad.constraints, ad.params):
        if tried >= phi_limit:
            truncated = True
            break
        tried += 1
        bd = bang_check(ad, phi)
        if not bd:
            rejections.append(bd.reason)
        else:
            searches.append((phi, ParagraphSearch(bd, level_cap, search_budget, expected)))
    # one seen-set shared by every instantiation deduplicates across them too
    seen: set = set()
    rounds = level_cap if max_boxes is None else max_boxes
    for b in range(rounds + 1):
        for phi, search in searches:
            for placement in placements_with(search, b, seen):
                results.append(InferResult(placement.type, placement.script, phi, placement.boxes, placement.judgement))
                if limit is not None and len(results) >= limit:
                    return InferReport(ad.table.root.stype, results, tried, rejections, truncated)
    truncated = truncated or any(search.truncated for _, search in searches)
    return InferReport(ad.table.root.stype, results, tried, rejections, truncated)


def infer(
    t,
    level_cap: int = 8,
    simple_type: Optional[Type] = None,
    env: Optional[dict] = None,
    limit: Optional[int] = None,
    phi_limit: int = 256,
    max_boxes: Optional[int] = None,
    search_budget: int = 200_000,
    expected: Optional[Type] = None,
) -> list:
    """DLAL typings of the plain term ``t``.

    Returns a list of :class:`InferResult` (each unpacks as ``(type,
    script)``); the list is empty when the term is not simply typable or no
    typing exists within the limits.  ``simple_type`` restricts the search to
    typings whose erasure is an instance of the given simple type, and
    ``env`` does the same for free variables.  ``level_cap`` bounds the
    nesting of boxes, ``max_boxes`` the number of optional boxes per typing,
    ``phi_limit`` the number of implication choices examined and ``limit``
    the number of typings returned.

    With ``expected`` set, inference runs in checking mode: the implications
    and paragraph counts of the conclusion are fixed to those of the given
    propositional type, and only derivations with exactly that type are
    returned.  Raises :class:`ResourceLimit` when the
    constraint system has more than ``PARAM_CAP`` free parameters.
    """
    return infer_report(t, level_cap, simple_type, env, limit, phi_limit, max_boxes, search_budget, expected).results
