"""Light affine lambda calculus: terms with explicit ``!``/``§`` boxes and let-eliminators.

The calculus is used as a target for DLAL derivations.  :func:`embed` turns a
checked NDLAL script into a boxed term whose erasure is the script's subject,
and :func:`simulate_step` mirrors a single β-step of the erasure by one β-step
of the boxed term followed by administrative steps.  Counting those steps
over a whole normalization gives the quantity bounded by the polynomial
strong-normalization theorem for DLAL.

Paths into boxed terms use the plain-term steps ``fun``/``arg``/``body`` plus
``scrut`` for the scrutinee of a let; the body of a ``!``/``§`` box and of a
let is reached with ``body``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

from . import derivation as D
from . import terms as T
from .bounds import TowerBound
from .syntax import KEYWORDS, ParseError, TokenStream, fresh_name

FUN, ARG, BODY, SCRUT = T.FUN, T.ARG, T.BODY, "scrut"
RULES = ("par", "bang", "com1", "com2", "beta")


class SimulationError(RuntimeError):
    """The β-step of the erasure could not be mirrored in the boxed term."""


# ---------------------------------------------------------------------------
# syntax


@dataclass(frozen=True)
class Var:
    name: str
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", frozenset((self.name,)))

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class Abs:
    var: str
    body: "LlaTerm"
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.body.fv - {self.var})

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class App:
    fun: "LlaTerm"
    arg: "LlaTerm"
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.fun.fv | self.arg.fv)

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class Bang:
    body: "LlaTerm"
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.body.fv)

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class Par:
    body: "LlaTerm"
    fv: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "fv", self.body.fv)

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class LetBang:
    """``let scrut be !var in body``."""

    scrut: "LlaTerm"
    var: str
    body: "LlaTerm"
    fv: frozenset = field(init=False, repr=False, compare=False)
    mark = "!"

    def __post_init__(self):
        object.__setattr__(self, "fv", self.scrut.fv | (self.body.fv - {self.var}))

    def __str__(self):
        return to_str(self)


@dataclass(frozen=True)
class LetPar:
    """``let scrut be §var in body``."""

    scrut: "LlaTerm"
    var: str
    body: "LlaTerm"
    fv: frozenset = field(init=False, repr=False, compare=False)
    mark = "$"

    def __post_init__(self):
        object.__setattr__(self, "fv", self.scrut.fv | (self.body.fv - {self.var}))

    def __str__(self):
        return to_str(self)


LlaTerm = Union[Var, Abs, App, Bang, Par, LetBang, LetPar]
_LETS = (LetBang, LetPar)
_BOXES = (Bang, Par)


def _let(mark: str, scrut, var, body):
    return LetBang(scrut, var, body) if mark == "!" else LetPar(scrut, var, body)


def _box(mark: str, body):
    return Bang(body) if mark == "!" else Par(body)


def bang_abs(x: str, body: LlaTerm) -> Abs:
    """The abbreviation ``λ^! x.t`` = ``λx.let x be !y in t[y/x]`` with ``y`` fresh."""
    y = fresh_name(x, body.fv | {x} | _binders(body))
    return Abs(x, LetBang(Var(x), y, substitute(body, x, Var(y))))


def is_bang_abs(t: LlaTerm) -> bool:
    """Recognise the ``λ^!`` abbreviation structurally."""
    return (
        isinstance(t, Abs)
        and isinstance(t.body, LetBang)
        and t.body.scrut == Var(t.var)
        and t.var not in t.body.body.fv
    )


def parse_lla(text: str) -> LlaTerm:
    """Parse the boxed-term syntax.

    On top of the plain grammar: ``!t`` and ``$t`` (prefix, binding tighter
    than application), ``let u be !x in t`` and ``let u be $x in t``, and the
    sugar ``\\!x.t`` for the ``λ^!`` abbreviation.
    """
    stream = TokenStream(text)
    t = _parse_expr(stream)
    stream.finish()
    return t


def _starts_atom(s: TokenStream) -> bool:
    tok = s.peek()
    if tok.kind == "ident":
        return tok.text not in KEYWORDS
    return s.at("(") or s.at("!") or s.at("$")


def _parse_expr(s: TokenStream) -> LlaTerm:
    if s.at("\\"):
        s.next()
        binders = []
        while True:
            banged = False
            if s.at("!"):
                s.next()
                banged = True
            binders.append((s.ident(), banged))
            if s.peek().kind != "ident" and not s.at("!"):
                break
        s.expect(".")
        body = _parse_expr(s)
        for name, banged in reversed(binders):
            body = bang_abs(name, body) if banged else Abs(name, body)
        return body
    if s.at("let"):
        s.next()
        scrut = _parse_expr(s)
        s.expect("be")
        tok = s.peek()
        if not (s.at("!") or s.at("$")):
            raise ParseError("expected '!' or '$' after 'be'", tok.pos)
        mark = s.next().text
        var = s.ident()
        s.expect("in")
        body = _parse_expr(s)
        return _let(mark, scrut, var, body)
    head = _parse_atom(s)
    while True:
        if _starts_atom(s):
            head = App(head, _parse_atom(s))
        elif s.at("\\") or s.at("let"):
            return App(head, _parse_expr(s))
        else:
            return head


def _parse_atom(s: TokenStream) -> LlaTerm:
    tok = s.peek()
    if s.at("("):
        s.next()
        inner = _parse_expr(s)
        s.expect(")")
        return inner
    if s.at("!") or s.at("$"):
        mark = s.next().text
        return _box(mark, _parse_atom(s))
    if tok.kind == "ident" and tok.text not in KEYWORDS:
        return Var(s.ident())
    found = "end of input" if tok.kind == "eof" else repr(tok.text)
    raise ParseError(f"expected a term, found {found}", tok.pos)


def to_str(t: LlaTerm) -> str:
    """Print in the syntax accepted by :func:`parse_lla` (no abbreviations)."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Abs):
        return f"\\{t.var}.{to_str(t.body)}"
    if isinstance(t, _BOXES):
        mark = "!" if isinstance(t, Bang) else "$"
        return mark + _atomic(t.body)
    if isinstance(t, _LETS):
        return f"let {to_str(t.scrut)} be {t.mark}{t.var} in {to_str(t.body)}"
    fun = to_str(t.fun)
    if isinstance(t.fun, (Abs,) + _LETS):
        fun = f"({fun})"
    return f"{fun} {_atomic(t.arg)}"


def _atomic(t: LlaTerm) -> str:
    if isinstance(t, (Var,) + _BOXES):
        return to_str(t)
    return f"({to_str(t)})"


# ---------------------------------------------------------------------------
# metrics


def raw_size(t: LlaTerm) -> int:
    """Node count: every variable, abstraction, application, box and let counts one."""
    total = 0
    stack = [t]
    while stack:
        node = stack.pop()
        total += 1
        if isinstance(node, Abs) or isinstance(node, _BOXES):
            stack.append(node.body)
        elif isinstance(node, App):
            stack += [node.fun, node.arg]
        elif isinstance(node, _LETS):
            stack += [node.scrut, node.body]
    return total


def lla_size(t: LlaTerm) -> int:
    """Size that charges the ``λ^!`` abbreviation as a single binder and ``!u`` as ``u``.

    With this measure the boxed term produced by :func:`embed` is never larger
    than the derivation it comes from: a (⇒ i) node contributes one binder and
    a (⇒ e) node one application, exactly as their plain counterparts do.
    :func:`raw_size` gives the plain node count.
    """
    if isinstance(t, Var):
        return 1
    if isinstance(t, Abs):
        if is_bang_abs(t):
            return 1 + lla_size(t.body.body)
        return 1 + lla_size(t.body)
    if isinstance(t, App):
        return 1 + lla_size(t.fun) + lla_size(t.arg)
    if isinstance(t, Bang):
        return lla_size(t.body)
    if isinstance(t, Par):
        return 1 + lla_size(t.body)
    return 1 + lla_size(t.scrut) + lla_size(t.body)


def lla_depth(t: LlaTerm) -> int:
    """Largest number of ``!``/``§`` boxes crossed on a branch of the term tree."""
    if isinstance(t, Var):
        return 0
    if isinstance(t, Abs):
        return lla_depth(t.body)
    if isinstance(t, App):
        return max(lla_depth(t.fun), lla_depth(t.arg))
    if isinstance(t, _BOXES):
        return 1 + lla_depth(t.body)
    return max(lla_depth(t.scrut), lla_depth(t.body))


def _binders(t: LlaTerm) -> set:
    out = set()
    stack = [t]
    while stack:
        node = stack.pop()
        if isinstance(node, Abs):
            out.add(node.var)
            stack.append(node.body)
        elif isinstance(node, _BOXES):
            stack.append(node.body)
        elif isinstance(node, App):
            stack += [node.fun, node.arg]
        elif isinstance(node, _LETS):
            out.add(node.var)
            stack += [node.scrut, node.body]
    return out


# ---------------------------------------------------------------------------
# substitution, α-equivalence, erasure


def substitute(t: LlaTerm, x: str, u: LlaTerm) -> LlaTerm:
    """Capture-avoiding ``t[u/x]``; let binders scope over the let body only."""
    if x not in t.fv:
        return t
    if isinstance(t, Var):
        return u
    if isinstance(t, App):
        return App(substitute(t.fun, x, u), substitute(t.arg, x, u))
    if isinstance(t, Bang):
        return Bang(substitute(t.body, x, u))
    if isinstance(t, Par):
        return Par(substitute(t.body, x, u))
    var, body = t.var, t.body
    if var == x:
        # a let that rebinds x: only its scrutinee sees the outer x
        return _let(t.mark, substitute(t.scrut, x, u), var, body)
    if var in u.fv:
        new = fresh_name(var, u.fv | body.fv | {x})
        body = substitute(body, var, Var(new))
        var = new
    if isinstance(t, Abs):
        return Abs(var, substitute(body, x, u))
    return _let(t.mark, substitute(t.scrut, x, u), var, substitute(body, x, u))


def alpha_eq(a: LlaTerm, b: LlaTerm) -> bool:
    return _alpha(a, b, {}, {}, 0)


def _alpha(a, b, ea, eb, depth) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, Var):
        return ea.get(a.name, a.name) == eb.get(b.name, b.name)
    if isinstance(a, App):
        return _alpha(a.fun, b.fun, ea, eb, depth) and _alpha(a.arg, b.arg, ea, eb, depth)
    if isinstance(a, _BOXES):
        return _alpha(a.body, b.body, ea, eb, depth)
    if isinstance(a, _LETS) and not _alpha(a.scrut, b.scrut, ea, eb, depth):
        return False
    key = ("#", depth)
    return _alpha(a.body, b.body, {**ea, a.var: key}, {**eb, b.var: key}, depth + 1)


def erase(t: LlaTerm) -> T.Term:
    """Forget boxes and inline lets: ``(let u be †x in t)^- = t^-[u^-/x]``."""
    if isinstance(t, Var):
        return T.Var(t.name)
    if isinstance(t, Abs):
        return T.Abs(t.var, erase(t.body))
    if isinstance(t, App):
        return T.App(erase(t.fun), erase(t.arg))
    if isinstance(t, _BOXES):
        return erase(t.body)
    return T.substitute(erase(t.body), t.var, erase(t.scrut))


def from_plain(t: T.Term) -> LlaTerm:
    """A plain term seen as a box-free boxed term."""
    if isinstance(t, T.Var):
        return Var(t.name)
    if isinstance(t, T.Abs):
        return Abs(t.var, from_plain(t.body))
    return App(from_plain(t.fun), from_plain(t.arg))


# ---------------------------------------------------------------------------
# reduction rules


def subterm(t: LlaTerm, path) -> LlaTerm:
    for step in path:
        if step == FUN and isinstance(t, App):
            t = t.fun
        elif step == ARG and isinstance(t, App):
            t = t.arg
        elif step == SCRUT and isinstance(t, _LETS):
            t = t.scrut
        elif step == BODY and isinstance(t, (Abs,) + _BOXES + _LETS):
            t = t.body
        else:
            raise ValueError(f"path step {step!r} does not fit {type(t).__name__}")
    return t


def replace_at(t: LlaTerm, path, new: LlaTerm) -> LlaTerm:
    if not path:
        return new
    step, rest = path[0], tuple(path[1:])
    if step == FUN:
        return App(replace_at(t.fun, rest, new), t.arg)
    if step == ARG:
        return App(t.fun, replace_at(t.arg, rest, new))
    if step == SCRUT:
        return _let(t.mark, replace_at(t.scrut, rest, new), t.var, t.body)
    if isinstance(t, Abs):
        return Abs(t.var, replace_at(t.body, rest, new))
    if isinstance(t, _BOXES):
        return type(t)(replace_at(t.body, rest, new))
    return _let(t.mark, t.scrut, t.var, replace_at(t.body, rest, new))


def redex_rule(t: LlaTerm) -> Optional[str]:
    """Which rule, if any, applies at the root of ``t``."""
    if isinstance(t, App):
        if isinstance(t.fun, Abs):
            return "beta"
        if isinstance(t.fun, _LETS):
            return "com1"
        return None
    if isinstance(t, LetPar) and isinstance(t.scrut, Par):
        return "par"
    if isinstance(t, LetBang) and isinstance(t.scrut, Bang):
        return "bang"
    if isinstance(t, _LETS) and isinstance(t.scrut, _LETS):
        return "com2"
    return None


def _contract(t: LlaTerm, rule: str) -> LlaTerm:
    if rule == "beta":
        return substitute(t.fun.body, t.fun.var, t.arg)
    if rule in ("par", "bang"):
        return substitute(t.body, t.var, t.scrut.body)
    if rule == "com1":
        inner, v = t.fun, t.arg
        var, body = inner.var, inner.body
        if var in v.fv:
            new = fresh_name(var, v.fv | body.fv)
            body = substitute(body, var, Var(new))
            var = new
        return _let(inner.mark, inner.scrut, var, App(body, v))
    # com2: let (let u be †x in t) be ‡y in v  →  let u be †x in (let t be ‡y in v)
    inner = t.scrut
    var, mid = inner.var, inner.body
    if var in (t.body.fv - {t.var}):
        new = fresh_name(var, t.body.fv | mid.fv | {t.var})
        mid = substitute(mid, var, Var(new))
        var = new
    return _let(inner.mark, inner.scrut, var, _let(t.mark, mid, t.var, t.body))


def lla_step(t: LlaTerm, rule: str, path=()) -> LlaTerm:
    """Fire ``rule`` at ``path``; ValueError if the addressed subterm is not such a redex."""
    if rule not in RULES:
        raise ValueError(f"unknown rule {rule!r}")
    target = subterm(t, tuple(path))
    found = redex_rule(target)
    if found != rule:
        raise ValueError(f"no {rule} redex at {list(path)} (found {found or 'none'})")
    return replace_at(t, tuple(path), _contract(target, rule))


def lla_redexes(t: LlaTerm, rules=RULES) -> list:
    """All ``(path, rule)`` pairs in pre-order."""
    out = []

    def walk(node, path):
        r = redex_rule(node)
        if r is not None and r in rules:
            out.append((path, r))
        if isinstance(node, App):
            walk(node.fun, path + (FUN,))
            walk(node.arg, path + (ARG,))
        elif isinstance(node, _LETS):
            walk(node.scrut, path + (SCRUT,))
            walk(node.body, path + (BODY,))
        elif isinstance(node, (Abs,) + _BOXES):
            walk(node.body, path + (BODY,))

    walk(t, ())
    return out


ADMIN_RULES = ("par", "bang", "com1", "com2")


def is_admin_normal(t: LlaTerm) -> bool:
    """True when none of (§), (!), (com1), (com2) applies anywhere."""
    return not lla_redexes(t, ADMIN_RULES)


def saturate(t: LlaTerm) -> tuple:
    """Exhaust the administrative rules, innermost redexes first.

    Returns ``(normal term, number of steps)``.  Children are normalized
    before their parent, so at the moment a node is examined at most one rule
    can apply at its root; the order (§), (!), (com1), (com2) only matters as
    a tie-break and never actually arises.
    """
    counter = [0]
    return _sat(t, counter), counter[0]


def _sat(t: LlaTerm, counter) -> LlaTerm:
    if isinstance(t, Var):
        return t
    if isinstance(t, Abs):
        return Abs(t.var, _sat(t.body, counter))
    if isinstance(t, _BOXES):
        return type(t)(_sat(t.body, counter))
    if isinstance(t, App):
        return _sat_root(App(_sat(t.fun, counter), _sat(t.arg, counter)), counter)
    return _sat_root(_let(t.mark, _sat(t.scrut, counter), t.var, _sat(t.body, counter)), counter)


def _sat_root(t: LlaTerm, counter) -> LlaTerm:
    """Normalize ``t`` assuming its immediate subterms are already normal."""
    rule = redex_rule(t)
    if rule is None or rule == "beta":
        return t
    counter[0] += 1
    out = _contract(t, rule)
    if rule in ("par", "bang"):
        # substitution may plug a box or a let into a scrutinee position anywhere
        return _sat(out, counter)
    # commutations: the outer let keeps an already normal scrutinee, only the
    # rebuilt inner node can be a new redex
    return _let(out.mark, out.scrut, out.var, _sat_root(out.body, counter))


# ---------------------------------------------------------------------------
# embedding of DLAL derivations


def embed(s: D.Deriv) -> LlaTerm:
    """The boxed term read off a checked NDLAL script.

    (⇒ i) yields the ``λ^!`` abbreviation, (⇒ e) applies the function to a
    ``!``-box around the argument, (§ i) wraps its premise in a ``§``-box and
    (§ e) becomes a ``let … be §x in …``; (Cntr) renames the two contracted
    variables and the remaining structural and quantifier rules leave the term
    alone.
    """
    D.check_ndlal(s)
    memo: dict = {}

    def go(d: D.Deriv) -> LlaTerm:
        hit = memo.get(id(d))
        if hit is not None:
            return hit
        r, p = d.rule, d.premises
        if r == "Id":
            out = Var(d.params["var"])
        elif r == "LinI":
            out = Abs(d.params["binder"], go(p[0]))
        elif r == "BangI_dlal":
            out = bang_abs(d.params["binder"], go(p[0]))
        elif r == "LinE":
            out = App(go(p[0]), go(p[1]))
        elif r == "BangE_dlal":
            out = App(go(p[0]), Bang(go(p[1])))
        elif r == "ParI":
            out = Par(go(p[0]))
        elif r == "ParE":
            out = LetPar(go(p[0]), d.params["binder"], go(p[1]))
        elif r == "Cntr":
            x1, x2, x = d.params["merged"]
            out = go(p[0])
            for old in (x1, x2):
                if old != x:
                    out = substitute(out, old, Var(x))
        elif r in ("Weak", "ForallI", "ForallE"):
            out = go(p[0])
        else:
            raise D.DerivationError("rule outside DLAL", (), r)
        memo[id(d)] = out
        return out

    return go(s)


@dataclass(frozen=True)
class LlaJudgement:
    """A DLAL judgement whose subject is a boxed term."""

    gamma: dict
    delta: dict
    term: LlaTerm
    type: object


def lla_judgement(s: D.Deriv) -> LlaJudgement:
    """Type the embedded term with the script's own contexts and type.

    Boxed terms are only ever typed through the script they come from, so the
    judgement is the script's conclusion with the subject replaced.
    """
    j = D.check_ndlal(s)
    return LlaJudgement(j.gamma, j.delta, embed(s), j.type)


# ---------------------------------------------------------------------------
# shape facts used by the simulation argument


def shape_violations(t: LlaTerm) -> list:
    """Positions where an administratively normal term breaks the expected shapes.

    In a typable term with no (§), (!) or com redex, the head of every
    application is a variable, an application or an abstraction, the
    scrutinee of every ``§``-let is a variable or an application, and the
    scrutinee of every ``!``-let is a variable.  Returns ``(path, message)``
    pairs; empty means every node fits.
    """
    out = []

    def walk(node, path):
        if isinstance(node, App):
            if not isinstance(node.fun, (Var, App, Abs)):
                out.append((path, f"application head is a {type(node.fun).__name__}"))
            walk(node.fun, path + (FUN,))
            walk(node.arg, path + (ARG,))
        elif isinstance(node, LetPar):
            if not isinstance(node.scrut, (Var, App)):
                out.append((path, f"§-let scrutinee is a {type(node.scrut).__name__}"))
            walk(node.scrut, path + (SCRUT,))
            walk(node.body, path + (BODY,))
        elif isinstance(node, LetBang):
            if not isinstance(node.scrut, Var):
                out.append((path, f"!-let scrutinee is a {type(node.scrut).__name__}"))
            walk(node.scrut, path + (SCRUT,))
            walk(node.body, path + (BODY,))
        elif isinstance(node, (Abs,) + _BOXES):
            walk(node.body, path + (BODY,))

    walk(t, ())
    return out


# ---------------------------------------------------------------------------
# simulation of β-steps


def _walk_until_var(plain: T.Term, path, x: str) -> Optional[int]:
    """Follow ``path`` in ``plain``; return how many steps lead to a free ``x``, or None."""
    node = plain
    bound = set()
    for i, step in enumerate(path):
        if isinstance(node, T.Var):
            if node.name == x and x not in bound:
                return i
            raise SimulationError(f"path runs past variable {node.name!r}")
        if step == FUN and isinstance(node, T.App):
            node = node.fun
        elif step == ARG and isinstance(node, T.App):
            node = node.arg
        elif step == BODY and isinstance(node, T.Abs):
            bound.add(node.var)
            node = node.body
        else:
            raise SimulationError(f"path step {step!r} does not fit the erasure")
    if isinstance(node, T.Var) and node.name == x and x not in bound:
        return len(path)
    return None


def _fire(t: LlaTerm, path) -> LlaTerm:
    """Fire the β-redex of the boxed term that sits at ``path`` of its erasure."""
    if isinstance(t, _BOXES):
        return type(t)(_fire(t.body, path))
    if isinstance(t, _LETS):
        plain_body = erase(t.body)
        hit = _walk_until_var(plain_body, path, t.var)
        if hit is None:
            return _let(t.mark, t.scrut, t.var, _fire(t.body, path))
        occurrences = T.free_occurrences(t.var, plain_body)
        if occurrences != 1:
            raise SimulationError(
                f"redex inside the scrutinee of a let whose variable {t.var!r} occurs {occurrences} times"
            )
        return _let(t.mark, _fire(t.scrut, tuple(path[hit:])), t.var, t.body)
    if not path:
        if isinstance(t, App) and isinstance(t.fun, Abs):
            return _contract(t, "beta")
        raise SimulationError(f"erasure redex corresponds to a {type(t).__name__} whose head is not an abstraction")
    step, rest = path[0], tuple(path[1:])
    if isinstance(t, Abs) and step == BODY:
        return Abs(t.var, _fire(t.body, rest))
    if isinstance(t, App) and step == FUN:
        return App(_fire(t.fun, rest), t.arg)
    if isinstance(t, App) and step == ARG:
        return App(t.fun, _fire(t.arg, rest))
    raise SimulationError(f"path step {step!r} does not fit {type(t).__name__}")


def simulate_step(t: LlaTerm, redex) -> tuple:
    """Mirror the β-step at ``redex`` (a path in ``erase(t)``).

    ``t`` must be administratively normal.  Returns ``(u, steps)`` where ``u``
    is administratively normal, ``erase(u)`` is the β-reduct, and ``steps``
    counts the β-step plus the administrative steps that followed it.
    """
    fired = _fire(t, tuple(redex))
    out, admin = saturate(fired)
    return out, 1 + admin


@dataclass
class SimulationRun:
    """Outcome of driving a boxed term to normal form along its erasure."""

    strategy: str
    beta_steps: int = 0
    lla_steps: int = 0
    initial_admin_steps: int = 0
    diagram_violations: list = field(default_factory=list)
    shape_violations: list = field(default_factory=list)
    final: Optional[LlaTerm] = None
    exhausted: bool = False

    @property
    def plain_final(self) -> Optional[T.Term]:
        return None if self.final is None else erase(self.final)

    def to_json(self) -> dict:
        return {
            "strategy": self.strategy,
            "beta_steps": self.beta_steps,
            "lla_steps": self.lla_steps,
            "initial_admin_steps": self.initial_admin_steps,
            "diagram_violations": len(self.diagram_violations),
            "shape_violations": len(self.shape_violations),
            "exhausted": self.exhausted,
        }


def simulate_normalization(t: LlaTerm, strategy="lo", fuel: int = 10**6, check_shapes: bool = True) -> SimulationRun:
    """Reduce the erasure of ``t`` with ``strategy`` and mirror every step.

    The boxed term is first saturated (those steps are counted too).  After
    each mirrored step the erasure of the boxed term is compared with the
    plain β-reduct; mismatches are collected as diagram violations.
    """
    name, seed = T.parse_strategy(strategy)
    label = name if seed is None else f"{name}:{seed}"
    run = SimulationRun(label)
    current, admin = saturate(t)
    run.initial_admin_steps = admin
    run.lla_steps = admin
    choose = T.redex_chooser(strategy)
    plain = erase(current)
    while True:
        if check_shapes:
            for path, msg in shape_violations(current):
                run.shape_violations.append((run.beta_steps, path, msg))
        path = choose(plain)
        if path is None:
            break
        if run.beta_steps >= fuel:
            run.exhausted = True
            break
        expected = T.beta_step(plain, path)
        current, steps = simulate_step(current, path)
        run.beta_steps += 1
        run.lla_steps += steps
        plain = erase(current)
        if not T.alpha_eq(plain, expected):
            run.diagram_violations.append((run.beta_steps, path))
            plain = expected
    run.final = current
    return run


def simulation_bound(certificate: D.Deriv) -> TowerBound:
    """``|D|^(2^(d+1))`` for a script of size ``|D|`` and depth ``d``."""
    return TowerBound(D.node_count(certificate), D.deriv_depth(certificate) + 1)
