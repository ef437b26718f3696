"""Plain lambda terms: syntax, size, substitution and strategy-driven β-reduction."""

from __future__ import annotations

import random
import sys
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from .syntax import ParseError, TokenStream, fresh_name

# Church numerals reduced by innermost strategies build fairly deep trees.
sys.setrecursionlimit(max(sys.getrecursionlimit(), 50000))

FUN, ARG, BODY = "fun", "arg", "body"


@dataclass(frozen=True)
class Var:
    name: str
    size: int = field(default=1, init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", frozenset((self.name,)))

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class Abs:
    var: str
    body: "Term"
    size: int = field(init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", self.body.size + 1)
        object.__setattr__(self, "fv", self.body.fv - {self.var})

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class App:
    fun: "Term"
    arg: "Term"
    size: int = field(init=False, repr=False, compare=False)
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "size", self.fun.size + self.arg.size + 1)
        object.__setattr__(self, "fv", self.fun.fv | self.arg.fv)

    def __str__(self):
        return to_str(self)


Term = Union[Var, Abs, App]
RedexPath = tuple  # of FUN / ARG / BODY


# ---------------------------------------------------------------------------
# concrete syntax


def parse_term(text: str) -> Term:
    """Parse ``\\x.body`` / application / parenthesis syntax into a Term."""
    stream = TokenStream(text)
    term = _parse_expr(stream)
    stream.finish()
    return term


def _parse_expr(s: TokenStream) -> Term:
    if s.at("\\"):
        s.next()
        binders = [s.ident()]
        while s.peek().kind == "ident":
            binders.append(s.ident())
        s.expect(".")
        body = _parse_expr(s)
        for b in reversed(binders):
            body = Abs(b, body)
        return body
    head = _parse_atom(s)
    while True:
        tok = s.peek()
        if tok.kind == "ident" or s.at("("):
            head = App(head, _parse_atom(s))
        elif s.at("\\"):
            head = App(head, _parse_expr(s))
            return head
        else:
            return head


def _parse_atom(s: TokenStream) -> Term:
    tok = s.peek()
    if s.at("("):
        s.next()
        inner = _parse_expr(s)
        s.expect(")")
        return inner
    if tok.kind == "ident":
        return Var(s.ident())
    found = "end of input" if tok.kind == "eof" else repr(tok.text)
    raise ParseError(f"expected a term, found {found}", tok.pos)


def to_str(t: Term) -> str:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return f"\\{t.var}.{to_str(t.body)}"
    fun = to_str(t.fun)
    if isinstance(t.fun, Abs):
        fun = f"({fun})"
    arg = to_str(t.arg)
    if not isinstance(t.arg, Var):
        arg = f"({arg})"
    return f"{fun} {arg}"


# ---------------------------------------------------------------------------
# metrics


def term_size(t: Term) -> int:
    return t.size


def free_occurrences(x: str, t: Term) -> int:
    """Number of free occurrences of ``x`` in ``t``."""
    if x not in t.fv:
        return 0
    count = 0
    stack = [t]
    while stack:
        node = stack.pop()
        if x not in node.fv:
            continue
        if isinstance(node, Var):
            count += 1
        elif isinstance(node, Abs):
            stack.append(node.body)
        else:
            stack.append(node.fun)
            stack.append(node.arg)
    return count


def free_vars(t: Term) -> frozenset:
    return t.fv


def bound_names(t: Term) -> set:
    out = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Abs):
            out.add(node.var)
            stack.append(node.body)
        elif isinstance(node, App):
            stack.append(node.fun)
            stack.append(node.arg)
    return out


# ---------------------------------------------------------------------------
# substitution and α-equivalence


def substitute(t: Term, x: str, u: Term) -> Term:
    """Capture-avoiding ``t[u/x]``."""
    if x not in t.fv:
        return t
    if isinstance(t, Var):
        return u
    if isinstance(t, App):
        return App(substitute(t.fun, x, u), substitute(t.arg, x, u))
    var, body = t.var, t.body
    if var in u.fv:
        new = fresh_name(var, u.fv | body.fv | {x})
        body = substitute(body, var, Var(new))
        var = new
    return Abs(var, substitute(body, x, u))


def rename_free(t: Term, mapping: dict) -> Term:
    """Simultaneously rename free variables according to ``mapping``."""
    out = t
    temps = {}
    avoid = set(t.fv) | set(mapping.values())
    for old in mapping:
        if old in t.fv:
            tmp = fresh_name(old + "_tmp", avoid)
            avoid.add(tmp)
            temps[tmp] = mapping[old]
            out = substitute(out, old, Var(tmp))
    for tmp, new in temps.items():
        out = substitute(out, tmp, Var(new))
    return out


def alpha_eq(a: Term, b: Term) -> bool:
    """α-equivalence, comparing bound variables by binding depth."""
    return _alpha(a, b, {}, {}, 0)


def _alpha(a, b, env_a, env_b, depth) -> bool:
    while True:
        if a.size != b.size:
            return False
        if isinstance(a, Var):
            if not isinstance(b, Var):
                return False
            da, db = env_a.get(a.name), env_b.get(b.name)
            if da is None and db is None:
                return a.name == b.name
            return da == db
        if isinstance(a, Abs):
            if not isinstance(b, Abs):
                return False
            env_a = {**env_a, a.var: depth}
            env_b = {**env_b, b.var: depth}
            depth += 1
            a, b = a.body, b.body
            continue
        if not isinstance(b, App):
            return False
        if not _alpha(a.fun, b.fun, env_a, env_b, depth):
            return False
        a, b = a.arg, b.arg


def canonical(t: Term) -> Term:
    """Rename bound variables to ``v0, v1, ...`` in binding order (α-normal form)."""
    counter = [0]
    reserved = set(t.fv)

    def go(node, env):
        if isinstance(node, Var):
            return Var(env.get(node.name, node.name))
        if isinstance(node, App):
            return App(go(node.fun, env), go(node.arg, env))
        name = f"v{counter[0]}"
        while name in reserved:
            counter[0] += 1
            name = f"v{counter[0]}"
        counter[0] += 1
        return Abs(name, go(node.body, {**env, node.var: name}))

    return go(t, {})


# ---------------------------------------------------------------------------
# redexes and reduction


def is_redex(t: Term) -> bool:
    return isinstance(t, App) and isinstance(t.fun, Abs)


def subterm(t: Term, path) -> Term:
    for step in path:
        if step == FUN:
            t = t.fun
        elif step == ARG:
            t = t.arg
        elif step == BODY:
            t = t.body
        else:
            raise ValueError(f"bad path step {step!r}")
    return t


def replace_at(t: Term, path, new: Term) -> Term:
    if not path:
        return new
    step, rest = path[0], path[1:]
    if step == FUN:
        return App(replace_at(t.fun, rest, new), t.arg)
    if step == ARG:
        return App(t.fun, replace_at(t.arg, rest, new))
    return Abs(t.var, replace_at(t.body, rest, new))


def contract(redex: Term) -> Term:
    if not is_redex(redex):
        raise ValueError("not a β-redex")
    return substitute(redex.fun.body, redex.fun.var, redex.arg)


def beta_step(t: Term, path) -> Term:
    """Contract the redex at ``path``; raises ValueError if none is there."""
    return replace_at(t, tuple(path), contract(subterm(t, path)))


def redex_paths(t: Term) -> list:
    """All redex paths, in leftmost-outermost (pre-order) order."""
    out = []

    def walk(node, path):
        if isinstance(node, App):
            if isinstance(node.fun, Abs):
                out.append(path)
            walk(node.fun, path + (FUN,))
            walk(node.arg, path + (ARG,))
        elif isinstance(node, Abs):
            walk(node.body, path + (BODY,))

    walk(t, ())
    return out


def leftmost_outermost(t: Term) -> Optional[tuple]:
    stack = [(t, ())]
    while stack:
        node, path = stack.pop()
        if isinstance(node, App):
            if isinstance(node.fun, Abs):
                return path
            stack.append((node.arg, path + (ARG,)))
            stack.append((node.fun, path + (FUN,)))
        elif isinstance(node, Abs):
            stack.append((node.body, path + (BODY,)))
    return None


def rightmost_innermost(t: Term) -> Optional[tuple]:
    """The rightmost of the redexes that contain no other redex."""

    def walk(node, path):
        if isinstance(node, Abs):
            return walk(node.body, path + (BODY,))
        if isinstance(node, Var):
            return None
        found = walk(node.arg, path + (ARG,))
        if found is not None:
            return found
        found = walk(node.fun, path + (FUN,))
        if found is not None:
            return found
        return path if isinstance(node.fun, Abs) else None

    return walk(t, ())


def is_normal(t: Term) -> bool:
    return leftmost_outermost(t) is None


@dataclass
class Step:
    path: tuple
    size: int


@dataclass
class ReductionTrace:
    """Record of a normalization run.  ``exhausted`` is set when fuel ran out."""

    initial: Term
    steps: list
    final: Term
    exhausted: bool = False
    strategy: str = "lo"

    @property
    def count(self) -> int:
        return len(self.steps)

    def to_json(self) -> dict:
        return {
            "initial": to_str(self.initial),
            "steps": [{"path": list(s.path), "size": s.size} for s in self.steps],
            "final": to_str(self.final),
            "count": self.count,
            "exhausted": self.exhausted,
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReductionTrace":
        return cls(
            initial=parse_term(data["initial"]),
            steps=[Step(tuple(s["path"]), s["size"]) for s in data["steps"]],
            final=parse_term(data["final"]),
            exhausted=data.get("exhausted", False),
        )

    def replay(self) -> Term:
        t = self.initial
        for s in self.steps:
            t = beta_step(t, s.path)
        return t


def parse_strategy(strategy) -> tuple:
    """Normalize strategy specs: 'lo', 'ri', 'random', ('random', seed), 'random:7'."""
    if isinstance(strategy, tuple):
        return strategy
    aliases = {
        "lo": "lo",
        "leftmost-outermost": "lo",
        "ri": "ri",
        "rightmost-innermost": "ri",
        "random": "random",
    }
    if isinstance(strategy, str) and strategy.startswith("random:"):
        return ("random", int(strategy.split(":", 1)[1]))
    if strategy not in aliases:
        raise ValueError(f"unknown strategy {strategy!r}")
    name = aliases[strategy]
    return (name, 0) if name == "random" else (name, None)


def redex_chooser(strategy):
    """Return a function mapping a term to the path of the next redex (or None)."""
    name, seed = parse_strategy(strategy)
    if name == "lo":
        return leftmost_outermost
    if name == "ri":
        return rightmost_innermost
    rng = random.Random(seed)

    def pick(t):
        paths = redex_paths(t)
        return rng.choice(paths) if paths else None

    return pick


def iter_reduction(t: Term, strategy="lo") -> Iterator[tuple]:
    """Yield ``(path, reduct)`` pairs until a normal form is reached."""
    choose = redex_chooser(strategy)
    while True:
        path = choose(t)
        if path is None:
            return
        t = beta_step(t, path)
        yield path, t


def normalize(t: Term, strategy="lo", fuel: int = 10**6) -> ReductionTrace:
    """Reduce ``t`` to β-normal form, recording each contracted redex."""
    if fuel <= 0:
        raise ValueError("fuel must be positive")
    name, seed = parse_strategy(strategy)
    label = name if seed is None else f"{name}:{seed}"
    steps = []
    current = t
    for path, reduct in iter_reduction(t, strategy):
        if len(steps) >= fuel:
            return ReductionTrace(t, steps, current, exhausted=True, strategy=label)
        steps.append(Step(path, reduct.size))
        current = reduct
    return ReductionTrace(t, steps, current, strategy=label)


def normal_form(t: Term, strategy="lo", fuel: int = 10**6) -> Term:
    trace = normalize(t, strategy, fuel)
    if trace.exhausted:
        raise RuntimeError(f"fuel of {fuel} steps exhausted")
    return trace.final


def apply_all(head: Term, *args: Term) -> Term:
    for a in args:
        head = App(head, a)
    return head


def lams(names, body: Term) -> Term:
    for n in reversed(list(names)):
        body = Abs(n, body)
    return body
