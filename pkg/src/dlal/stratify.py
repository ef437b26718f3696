"""Stratified terms and level-by-level normalization.

A stratified term is a lambda term whose abstractions carry a depth and an
optional bang mark.  Decorating the subject of a DLAL script gives every
abstraction the number of boxes it sits in; a redex is at depth ``d`` when
its abstraction is.  Firing all redexes of depth 0, then depth 1, and so on,
normalizes the term, and the run is checked against the step and size bounds
that make this procedure polynomial for a fixed depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import derivation as D
from . import terms as T
from .bounds import TowerBound
from .syntax import fresh_name


class InvariantViolation(AssertionError):
    """A bound that the typing discipline guarantees was observed to fail."""


@dataclass(frozen=True)
class SVar:
    name: str
    size: int = field(default=1, init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", frozenset((self.name,)))


@dataclass(frozen=True)
class SAbs:
    var: str
    body: "StratTerm"
    depth: int = 0
    banged: bool = False
    size: int = field(init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", self.body.size + 1)
        object.__setattr__(self, "fv", self.body.fv - {self.var})


@dataclass(frozen=True)
class SApp:
    fun: "StratTerm"
    arg: "StratTerm"
    size: int = field(init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", self.fun.size + self.arg.size + 1)
        object.__setattr__(self, "fv", self.fun.fv | self.arg.fv)


StratTerm = Union[SVar, SAbs, SApp]


def strat_to_str(t: StratTerm) -> str:
    if isinstance(t, SVar):
        return t.name
    if isinstance(t, SAbs):
        mark = "!" if t.banged else ""
        return f"\\^{t.depth}{mark}{t.var}.{strat_to_str(t.body)}"
    fun = strat_to_str(t.fun)
    if isinstance(t.fun, SAbs):
        fun = f"({fun})"
    arg = strat_to_str(t.arg)
    if not isinstance(t.arg, SVar):
        arg = f"({arg})"
    return f"{fun} {arg}"


def erase(t: StratTerm) -> T.Term:
    if isinstance(t, SVar):
        return T.Var(t.name)
    if isinstance(t, SAbs):
        return T.Abs(t.var, erase(t.body))
    return T.App(erase(t.fun), erase(t.arg))


def plain(t: T.Term, depth: int = 0) -> StratTerm:
    """Annotate every abstraction of a plain term with the same depth."""
    if isinstance(t, T.Var):
        return SVar(t.name)
    if isinstance(t, T.Abs):
        return SAbs(t.var, plain(t.body, depth), depth)
    return SApp(plain(t.fun, depth), plain(t.arg, depth))


def strat_depth(t: StratTerm) -> int:
    """Maximal abstraction depth (0 for abstraction-free terms)."""
    best = 0
    stack = [t]
    while stack:
        n = stack.pop()
        if isinstance(n, SAbs):
            best = max(best, n.depth)
            stack.append(n.body)
        elif isinstance(n, SApp):
            stack.extend((n.fun, n.arg))
    return best


def shift(t: StratTerm, k: int = 1) -> StratTerm:
    """``t[+k]``: raise every abstraction depth by ``k``."""
    if k == 0 or isinstance(t, SVar):
        return t
    if isinstance(t, SAbs):
        return SAbs(t.var, shift(t.body, k), t.depth + k, t.banged)
    return SApp(shift(t.fun, k), shift(t.arg, k))


def substitute(t: StratTerm, x: str, u: StratTerm) -> StratTerm:
    """Capture-avoiding ``t[u/x]``; depths are left untouched."""
    if x not in t.fv:
        return t
    if isinstance(t, SVar):
        return u
    if isinstance(t, SApp):
        return SApp(substitute(t.fun, x, u), substitute(t.arg, x, u))
    var, body = t.var, t.body
    if var in u.fv:
        new = fresh_name(var, u.fv | body.fv | {x})
        body = substitute(body, var, SVar(new))
        var = new
    return SAbs(var, substitute(body, x, u), t.depth, t.banged)


def free_occurrences(x: str, t: StratTerm) -> int:
    if x not in t.fv:
        return 0
    if isinstance(t, SVar):
        return 1
    if isinstance(t, SAbs):
        return free_occurrences(x, t.body)
    return free_occurrences(x, t.fun) + free_occurrences(x, t.arg)


# ---------------------------------------------------------------------------
# decoration


def decorate(s: D.Deriv) -> StratTerm:
    """Annotate the subject of a DLAL script with abstraction depths.

    (⊸ i) and (⇒ i) introduce depth-0 abstractions (the latter banged), the
    argument of (⇒ e) and the whole premise of (§ i) are shifted up by one,
    and (§ e) and (Cntr) substitute as in the plain calculus.
    """
    D.check_ndlal(s)
    memo: dict = {}

    def go(d: D.Deriv) -> StratTerm:
        hit = memo.get(id(d))
        if hit is not None:
            return hit
        r, p = d.rule, d.premises
        if r == "Id":
            out = SVar(d.params["var"])
        elif r in ("LinI", "BangI_dlal"):
            out = SAbs(d.params["binder"], go(p[0]), 0, r == "BangI_dlal")
        elif r == "LinE":
            out = SApp(go(p[0]), go(p[1]))
        elif r == "BangE_dlal":
            out = SApp(go(p[0]), shift(go(p[1]), 1))
        elif r == "ParI":
            out = shift(go(p[0]), 1)
        elif r == "ParE":
            out = substitute(go(p[1]), d.params["binder"], go(p[0]))
        elif r == "Cntr":
            x1, x2, x = d.params["merged"]
            out = go(p[0])
            if x1 != x:
                out = substitute(out, x1, SVar(x))
            if x2 != x:
                out = substitute(out, x2, SVar(x))
        elif r in ("Weak", "ForallI", "ForallE"):
            out = go(p[0])
        else:
            raise D.DerivationError("rule outside DLAL", (), r)
        memo[id(d)] = out
        return out

    return go(s)


# ---------------------------------------------------------------------------
# forbidden shapes


@dataclass(frozen=True)
class Pattern:
    path: tuple
    kind: str  # "application" or "nesting"
    outer: int
    inner: int


def scan_forbidden_patterns(t: StratTerm) -> list:
    """Find ``(λ^d x.t)(λ^e y.u)`` and ``λ^d x.λ^e y.t`` with ``e < d``.

    Neither shape occurs in a typable stratified term; the returned list is
    empty on every decorated script and every term reached by level-wise
    reduction.
    """
    found = []
    stack = [(t, ())]
    while stack:
        n, path = stack.pop()
        if isinstance(n, SAbs):
            if isinstance(n.body, SAbs) and n.body.depth < n.depth:
                found.append(Pattern(path, "nesting", n.depth, n.body.depth))
            stack.append((n.body, path + (T.BODY,)))
        elif isinstance(n, SApp):
            if isinstance(n.fun, SAbs) and isinstance(n.arg, SAbs) and n.arg.depth < n.fun.depth:
                found.append(Pattern(path, "application", n.fun.depth, n.arg.depth))
            stack.append((n.arg, path + (T.ARG,)))
            stack.append((n.fun, path + (T.FUN,)))
    return found


# ---------------------------------------------------------------------------
# level-wise reduction


def redexes_at(t: StratTerm, depth_filter) -> list:
    """Paths of redexes whose abstraction depth satisfies ``depth_filter``, in pre-order."""
    out = []
    stack = [(t, ())]
    while stack:
        n, path = stack.pop()
        if isinstance(n, SAbs):
            stack.append((n.body, path + (T.BODY,)))
        elif isinstance(n, SApp):
            if isinstance(n.fun, SAbs) and depth_filter(n.fun.depth):
                out.append(path)
            stack.append((n.arg, path + (T.ARG,)))
            stack.append((n.fun, path + (T.FUN,)))
    return out


def _first_redex_at(t: StratTerm, d: int) -> Optional[tuple]:
    stack = [(t, ())]
    while stack:
        n, path = stack.pop()
        if isinstance(n, SAbs):
            stack.append((n.body, path + (T.BODY,)))
        elif isinstance(n, SApp):
            if isinstance(n.fun, SAbs) and n.fun.depth == d:
                return path
            stack.append((n.arg, path + (T.ARG,)))
            stack.append((n.fun, path + (T.FUN,)))
    return None


def _subterm(t, path):
    for step in path:
        t = t.fun if step == T.FUN else t.arg if step == T.ARG else t.body
    return t


def _replace(t, path, new):
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == T.FUN:
        return SApp(_replace(t.fun, rest, new), t.arg)
    if step == T.ARG:
        return SApp(t.fun, _replace(t.arg, rest, new))
    return SAbs(t.var, _replace(t.body, rest, new), t.depth, t.banged)


def _binder_depth(t: StratTerm, path, name: str) -> Optional[int]:
    """Depth of the abstraction above ``path`` that binds ``name`` (None if free)."""
    found = None
    node = t
    for step in path:
        if isinstance(node, SAbs):
            if node.var == name:
                found = node.depth
            node = node.body
        else:
            node = node.fun if step == T.FUN else node.arg
    return found


def _has_abstraction_at(t: StratTerm, d: int) -> bool:
    stack = [t]
    while stack:
        n = stack.pop()
        if isinstance(n, SAbs):
            if n.depth == d:
                return True
            stack.append(n.body)
        elif isinstance(n, SApp):
            stack.extend((n.fun, n.arg))
    return False


def _check_redex_discipline(t: StratTerm, path, d: int) -> None:
    """Shape facts about a depth-d redex that the bound proofs rely on.

    A linear redex uses its variable at most once.  A non-linear redex has an
    argument with no depth-d abstraction and at most one free variable, which
    is either free in the whole term or bound at depth d; copying such an
    argument cannot add depth-d work.
    """
    redex = _subterm(t, path)
    lam, arg = redex.fun, redex.arg
    if not lam.banged and free_occurrences(lam.var, lam.body) > 1:
        raise InvariantViolation(f"linear depth-{d} redex at {path} duplicates its argument")
    if lam.banged:
        if _has_abstraction_at(arg, d):
            raise InvariantViolation(f"non-linear argument at {path} contains a depth-{d} abstraction")
        if len(arg.fv) > 1:
            raise InvariantViolation(f"non-linear argument at {path} has {len(arg.fv)} free variables")
        for y in arg.fv:
            bd = _binder_depth(t, path, y)
            if bd is not None and bd != d:
                raise InvariantViolation(
                    f"free variable {y!r} of the non-linear argument at {path} is bound at depth {bd}"
                )


def reduce_level(t: StratTerm, d: int, check: bool = True, on_step=None) -> tuple:
    """Fire depth-``d`` redexes leftmost-outermost until none remain.

    Returns ``(result, steps)``.  With ``check`` set, the step count is held to
    the entry size and each fired redex is checked against the redex
    discipline; ``on_step(term, path)`` is called after every contraction.
    """
    budget = t.size
    steps = 0
    while True:
        path = _first_redex_at(t, d)
        if path is None:
            return t, steps
        if check:
            if steps >= budget:
                raise InvariantViolation(f"level {d} needs more than |t| = {budget} steps")
            _check_redex_discipline(t, path, d)
        redex = _subterm(t, path)
        t = _replace(t, path, substitute(redex.fun.body, redex.fun.var, redex.arg))
        steps += 1
        if on_step is not None:
            on_step(t, path)


@dataclass
class LevelRecord:
    level: int
    entry_size: int
    steps: int
    exit_size: int


@dataclass
class LevelTrace:
    initial: StratTerm
    records: list
    final: StratTerm
    depth: int

    @property
    def total_steps(self) -> int:
        return sum(r.steps for r in self.records)

    @property
    def size_sum(self) -> int:
        """``|t_0| + … + |t_d|``: entry sizes of all levels."""
        return sum(r.entry_size for r in self.records)

    @property
    def bound(self) -> TowerBound:
        return TowerBound(self.initial.size, self.depth)

    def to_json(self) -> dict:
        return {
            "depth": self.depth,
            "initial_size": self.initial.size,
            "levels": [
                {"level": r.level, "entry_size": r.entry_size, "steps": r.steps, "exit_size": r.exit_size}
                for r in self.records
            ],
            "total_steps": self.total_steps,
            "size_sum": self.size_sum,
            "bound": self.bound.to_json(),
            "final": T.to_str(erase(self.final)),
        }

    def to_csv(self) -> str:
        rows = ["level,entry_size,steps,exit_size"]
        rows += [f"{r.level},{r.entry_size},{r.steps},{r.exit_size}" for r in self.records]
        return "\n".join(rows) + "\n"


def normalize_levels(t: StratTerm, check: bool = True, scan: bool = False, shadow: bool = False) -> LevelTrace:
    """Normalize level by level, checking the per-level and global bounds.

    Checks (raising :class:`InvariantViolation`): steps at a level never
    exceed its entry size; the exit size is at most ``entry·(entry−1)`` when
    the entry size is at least 2 (skipped for single-variable terms); after
    level ``d`` no redex of depth ``≤ d`` remains; the entry sizes sum to at
    most ``|t|^(2^depth)``; the result is β-normal.  With ``scan`` the
    forbidden-shape scan runs on every intermediate term.  With ``shadow``
    every level is replayed by :func:`shadow_level`, whose result must
    erase to the same term.
    """
    depth = strat_depth(t)
    records = []
    current = t

    def on_step(term, _path):
        bad = scan_forbidden_patterns(term)
        if bad:
            raise InvariantViolation(f"forbidden shape {bad[0]} after a reduction")

    if scan and scan_forbidden_patterns(t):
        raise InvariantViolation(f"forbidden shape in the initial term: {scan_forbidden_patterns(t)[0]}")
    for level in range(depth + 1):
        entry = current.size
        before = current
        current, steps = reduce_level(current, level, check=check, on_step=on_step if scan else None)
        if shadow:
            replay, _ = shadow_level(before, level)
            if not T.alpha_eq(erase(replay), erase(current)):
                raise InvariantViolation(f"level {level}: the x-term replay ends on a different term")
        exit_size = current.size
        records.append(LevelRecord(level, entry, steps, exit_size))
        if check:
            if steps > entry:
                raise InvariantViolation(f"level {level}: {steps} steps exceed entry size {entry}")
            if entry >= 2 and exit_size > entry * (entry - 1):
                raise InvariantViolation(f"level {level}: exit size {exit_size} exceeds {entry}·({entry}−1)")
            low = redexes_at(current, lambda e, lv=level: e <= lv)
            if low:
                raise InvariantViolation(f"after level {level} a redex of depth ≤ {level} remains at {low[0]}")
    trace = LevelTrace(t, records, current, depth)
    if check:
        if redexes_at(current, lambda e: True):
            raise InvariantViolation("level-wise reduction ended on a non-normal term")
        if not trace.bound.admits(trace.size_sum):
            raise InvariantViolation(f"sum of level sizes {trace.size_sum} exceeds {trace.bound}")
    return trace


# ---------------------------------------------------------------------------
# shadow run with explicit substitutions (refined size bound)


@dataclass(frozen=True)
class XSub:
    """``body{arg/var}``: a substitution that has been recorded but not performed."""

    body: object
    var: str
    arg: StratTerm
    size: int = field(init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", self.body.size + self.arg.size)
        object.__setattr__(self, "fv", (self.body.fv - {self.var}) | self.arg.fv)


def expand(t) -> StratTerm:
    """Carry out every recorded substitution (the map back to plain stratified terms)."""
    if isinstance(t, XSub):
        return substitute(expand(t.body), t.var, expand(t.arg))
    if isinstance(t, SAbs):
        return SAbs(t.var, expand(t.body), t.depth, t.banged)
    if isinstance(t, SApp):
        return SApp(expand(t.fun), expand(t.arg))
    return t


def _x_names(t) -> set:
    if isinstance(t, XSub):
        return _x_names(t.body) | {t.var} | set(t.arg.fv)
    if isinstance(t, SAbs):
        return _x_names(t.body) | {t.var}
    if isinstance(t, SApp):
        return _x_names(t.fun) | _x_names(t.arg)
    return {t.name}


def _x_substitute(t, x: str, u: StratTerm):
    """Capture-avoiding substitution into a term that may hold recorded substitutions."""
    if x not in t.fv:
        return t
    if isinstance(t, SVar):
        return u
    if isinstance(t, SApp):
        return SApp(_x_substitute(t.fun, x, u), _x_substitute(t.arg, x, u))
    if isinstance(t, SAbs):
        var, body = t.var, t.body
        if var in u.fv:
            new = fresh_name(var, set(u.fv) | _x_names(body) | {x})
            body = _x_substitute(body, var, SVar(new))
            var = new
        return SAbs(var, _x_substitute(body, x, u), t.depth, t.banged)
    # XSub: the recorded argument is outside the binder, the body inside it
    var, body = t.var, t.body
    if var in u.fv:
        new = fresh_name(var, set(u.fv) | _x_names(body) | {x})
        body = _x_substitute(body, var, SVar(new))
        var = new
    return XSub(_x_substitute(body, x, u), var, _x_substitute(t.arg, x, u))


def _peel(t):
    """Split ``(λx.b)θ`` into the abstraction and the list of recorded substitutions θ."""
    theta = []
    while isinstance(t, XSub):
        theta.append((t.var, t.arg))
        t = t.body
    return t, theta


def _wrap(t, theta):
    for var, arg in reversed(theta):
        t = XSub(t, var, arg)
    return t


def _x_step(t, d: int):
    """Fire the first depth-``d`` redex of an x-term; None when there is none."""
    if isinstance(t, SApp):
        lam, theta = _peel(t.fun)
        if isinstance(lam, SAbs) and lam.depth == d:
            if lam.banged:
                return XSub(_wrap(lam.body, theta), lam.var, t.arg)
            # keep θ outside: rename its binders away from the argument's free variables
            body = lam.body
            new_theta = []
            for var, arg in theta:
                if var in t.arg.fv:
                    new = fresh_name(var, set(t.arg.fv) | _x_names(body) | {lam.var})
                    body = _x_substitute(body, var, SVar(new))
                    var = new
                new_theta.append((var, arg))
            return _wrap(_x_substitute(body, lam.var, t.arg), new_theta)
        for i, part in enumerate((t.fun, t.arg)):
            r = _x_step(part, d)
            if r is not None:
                return SApp(r, t.arg) if i == 0 else SApp(t.fun, r)
        return None
    if isinstance(t, SAbs):
        r = _x_step(t.body, d)
        return None if r is None else SAbs(t.var, r, t.depth, t.banged)
    if isinstance(t, XSub):
        r = _x_step(t.body, d)
        return None if r is None else XSub(r, t.var, t.arg)
    return None


def _total_occurrences(t: StratTerm) -> int:
    if isinstance(t, SVar):
        return 1
    if isinstance(t, SAbs):
        return _total_occurrences(t.body) - free_occurrences(t.var, t.body)
    return _total_occurrences(t.fun) + _total_occurrences(t.arg)


def _check_recorded(t, d: int, bound_at_d: frozenset, top_fv: frozenset) -> None:
    """Every recorded argument is depth-d-redex-free, substitution-free and has at most one allowed free variable."""
    if isinstance(t, XSub):
        arg = t.arg
        if redexes_at(arg, lambda e: e == d):
            raise InvariantViolation(f"recorded argument for {t.var!r} holds a depth-{d} redex")
        if len(arg.fv) > 1:
            raise InvariantViolation(f"recorded argument for {t.var!r} has {len(arg.fv)} free variables")
        for y in arg.fv:
            if y not in top_fv and y not in bound_at_d:
                raise InvariantViolation(f"free variable {y!r} of a recorded argument is bound above depth {d}")
        # a variable bound by a recorded substitution stands for an argument
        # that passed this same check, so it counts as an allowed free variable
        _check_recorded(t.body, d, bound_at_d | {t.var}, top_fv)
    elif isinstance(t, SAbs):
        inner = bound_at_d | {t.var} if t.depth == d else bound_at_d - {t.var}
        _check_recorded(t.body, d, inner, top_fv)
    elif isinstance(t, SApp):
        _check_recorded(t.fun, d, bound_at_d, top_fv)
        _check_recorded(t.arg, d, bound_at_d, top_fv)


def shadow_level(t: StratTerm, d: int) -> tuple:
    """Reduce the depth-``d`` redexes of ``t`` on x-terms, checking the refined size argument.

    Non-linear redexes are delayed as recorded substitutions, linear ones
    are substituted at once.  After every step the x-term must be no larger
    than ``t``, the recorded arguments must have the required shape, and its
    expansion ``u`` must satisfy ``no(u) ≤ |x-term|`` and
    ``|u| ≤ |x-term|·(|x-term|−1)`` when the x-term has size at least 2.
    Returns ``(expansion, steps)``.
    """
    entry = t.size
    top_fv = t.fv
    x = t
    steps = 0
    while True:
        nxt = _x_step(x, d)
        if nxt is None:
            return expand(x), steps
        x = nxt
        steps += 1
        if steps > entry:
            raise InvariantViolation(f"shadow level {d} needs more than {entry} steps")
        if x.size > entry:
            raise InvariantViolation(f"x-term of size {x.size} outgrew the level entry size {entry}")
        _check_recorded(x, d, frozenset(), top_fv)
        if x.size >= 2:
            u = expand(x)
            if _total_occurrences(u) > x.size:
                raise InvariantViolation(f"expansion has {_total_occurrences(u)} variable occurrences, above {x.size}")
            if u.size > x.size * (x.size - 1):
                raise InvariantViolation(f"expansion size {u.size} exceeds {x.size}·({x.size}−1)")
