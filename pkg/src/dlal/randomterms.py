"""Random lambda terms and random certified terms for property tests and benchmarks.

Certified terms are obtained the honest way: draw a random closed term,
keep it if it is simply typable, and ask :func:`dlal.infer.infer` for one
DLAL typing.  Whatever comes back has been re-checked by the inference
pipeline, so callers receive a term together with a script that checks.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Iterator, Optional

from . import derivation as D
from . import terms as T
from .infer import ResourceLimit, infer
from .infer.simple import SimpleTypeError, principal_simple_type


def random_term(rng: random.Random, size: int, scope=(), free=("z",)) -> T.Term:
    """A term with roughly ``size`` nodes; variables come from ``scope`` or, failing that, ``free``."""
    scope = list(scope)
    if size <= 1 or (scope and rng.random() < 0.2):
        return T.Var(rng.choice(scope or list(free)))
    if rng.random() < 0.45:
        v = f"v{len(scope)}"
        return T.Abs(v, random_term(rng, size - 1, scope + [v], free))
    k = rng.randint(1, size - 2) if size > 2 else 1
    return T.App(random_term(rng, k, scope, free), random_term(rng, max(1, size - 1 - k), scope, free))


def random_closed_typable(rng: random.Random, max_size: int = 25, min_size: int = 3) -> T.Term:
    """Draw until a closed, simply typable term of size at most ``max_size`` turns up."""
    while True:
        t = random_term(rng, rng.randint(min_size, max_size))
        if t.fv or T.term_size(t) > max_size:
            continue
        try:
            principal_simple_type(t)
        except SimpleTypeError:
            continue
        return t


@dataclass
class CertifiedTerm:
    term: T.Term
    script: D.Deriv
    type: object


def random_certified(
    rng: random.Random, count: int, max_size: int = 25, level_cap: int = 8, attempts: Optional[int] = None
) -> Iterator[CertifiedTerm]:
    """Yield ``count`` random closed terms that inference manages to type, with their scripts."""
    produced = 0
    tries = 0
    while produced < count:
        tries += 1
        if attempts is not None and tries > attempts:
            return
        t = random_closed_typable(rng, max_size)
        try:
            found = infer(t, level_cap=level_cap, limit=1)
        except ResourceLimit:
            continue
        if not found:
            continue
        produced += 1
        yield CertifiedTerm(t, found[0].script, found[0].type)
