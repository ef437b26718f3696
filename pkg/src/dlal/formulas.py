"""Type languages: DLAL, LAL and simple types, plus typing contexts.

One family of immutable constructors serves all three languages.  A DLAL type
uses ``TVar, Lin, Imp, Par, Forall``; an LAL type uses ``TVar, Lin, Bang, Par,
Forall``; a simple type uses ``TVar, Arrow``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .syntax import ParseError, TokenStream, fresh_name


@dataclass(frozen=True)
class TVar:
    name: str

    def __str__(self):
        return type_to_str(self)


@dataclass(frozen=True)
class Lin:
    """Linear implication ``A ⊸ B``."""

    arg: "Type"
    res: "Type"

    def __str__(self):
        return type_to_str(self)


@dataclass(frozen=True)
class Imp:
    """Intuitionistic (non-linear) implication ``A ⇒ B``; DLAL only."""

    arg: "Type"
    res: "Type"

    def __str__(self):
        return type_to_str(self)


@dataclass(frozen=True)
class Bang:
    """The exponential ``!A``; LAL only."""

    body: "Type"

    def __str__(self):
        return type_to_str(self)


@dataclass(frozen=True)
class Par:
    """The paragraph modality ``§A``."""

    body: "Type"

    def __str__(self):
        return type_to_str(self)


@dataclass(frozen=True)
class Forall:
    var: str
    body: "Type"

    def __str__(self):
        return type_to_str(self)


@dataclass(frozen=True)
class Arrow:
    """Simple-type arrow ``A → B``."""

    arg: "Type"
    res: "Type"

    def __str__(self):
        return type_to_str(self)


Type = Union[TVar, Lin, Imp, Bang, Par, Forall, Arrow]


class UnsupportedType(ValueError):
    pass


def pars(a: Type, k: int = 1) -> Type:
    for _ in range(k):
        a = Par(a)
    return a


def strip_pars(a: Type) -> tuple:
    """Return ``(k, B)`` with ``a = §^k B`` and ``B`` not a paragraph."""
    k = 0
    while isinstance(a, Par):
        a, k = a.body, k + 1
    return k, a


# ---------------------------------------------------------------------------
# printing and parsing


def type_to_str(a: Type) -> str:
    if isinstance(a, TVar):
        return a.name
    if isinstance(a, (Lin, Imp, Arrow)):
        op = {Lin: "-o", Imp: "=>", Arrow: "->"}[type(a)]
        left = type_to_str(a.arg)
        if isinstance(a.arg, (Lin, Imp, Arrow, Forall)):
            left = f"({left})"
        return f"{left} {op} {type_to_str(a.res)}"
    if isinstance(a, (Par, Bang)):
        sym = "$" if isinstance(a, Par) else "!"
        inner = type_to_str(a.body)
        if isinstance(a.body, (Lin, Imp, Arrow, Forall)):
            return f"{sym} ({inner})"
        return sym + inner
    if isinstance(a, Forall):
        return f"forall {a.var}. {type_to_str(a.body)}"
    raise TypeError(f"not a type: {a!r}")


def type_to_unicode(a: Type) -> str:
    text = type_to_str(a)
    for old, new in (("-o", "⊸"), ("=>", "⇒"), ("->", "→"), ("$", "§"), ("forall ", "∀")):
        text = text.replace(old, new)
    return text


def parse_type(text: str) -> Type:
    stream = TokenStream(text)
    result = _parse_arrow(stream)
    stream.finish()
    return result


def _parse_arrow(s: TokenStream) -> Type:
    if s.at("forall"):
        s.next()
        names = [s.ident()]
        while s.peek().kind == "ident":
            names.append(s.ident())
        s.expect(".")
        body = _parse_arrow(s)
        for n in reversed(names):
            body = Forall(n, body)
        return body
    left = _parse_prefix(s)
    for op, ctor in (("-o", Lin), ("=>", Imp), ("->", Arrow)):
        if s.at(op):
            s.next()
            return ctor(left, _parse_arrow(s))
    return left


def _parse_prefix(s: TokenStream) -> Type:
    if s.at("$"):
        s.next()
        return Par(_parse_prefix(s))
    if s.at("!"):
        s.next()
        return Bang(_parse_prefix(s))
    if s.at("("):
        s.next()
        inner = _parse_arrow(s)
        s.expect(")")
        return inner
    tok = s.peek()
    if tok.kind == "ident" and tok.text != "forall":
        return TVar(s.ident())
    found = "end of input" if tok.kind == "eof" else repr(tok.text)
    raise ParseError(f"expected a type, found {found}", tok.pos)


# ---------------------------------------------------------------------------
# structural operations


def free_type_vars(a: Type) -> frozenset:
    if isinstance(a, TVar):
        return frozenset((a.name,))
    if isinstance(a, (Lin, Imp, Arrow)):
        return free_type_vars(a.arg) | free_type_vars(a.res)
    if isinstance(a, (Par, Bang)):
        return free_type_vars(a.body)
    return free_type_vars(a.body) - {a.var}


def _all_type_vars(a: Type) -> set:
    if isinstance(a, TVar):
        return {a.name}
    if isinstance(a, (Lin, Imp, Arrow)):
        return _all_type_vars(a.arg) | _all_type_vars(a.res)
    if isinstance(a, (Par, Bang)):
        return _all_type_vars(a.body)
    return _all_type_vars(a.body) | {a.var}


def type_substitute(a: Type, alpha: str, b: Type) -> Type:
    """Capture-avoiding ``a[b/alpha]``."""
    if alpha not in free_type_vars(a):
        return a
    fv_b = free_type_vars(b)

    def go(t):
        if isinstance(t, TVar):
            return b if t.name == alpha else t
        if isinstance(t, (Lin, Imp, Arrow)):
            return type(t)(go(t.arg), go(t.res))
        if isinstance(t, (Par, Bang)):
            return type(t)(go(t.body))
        if t.var == alpha or alpha not in free_type_vars(t):
            return t
        var, body = t.var, t.body
        if var in fv_b:
            new = fresh_name(var, fv_b | _all_type_vars(body) | {alpha})
            body = type_substitute(body, var, TVar(new))
            var = new
        return Forall(var, go(body))

    return go(a)


def type_alpha_eq(a: Type, b: Type) -> bool:
    return _talpha(a, b, {}, {}, 0)


def _talpha(a, b, ea, eb, depth) -> bool:
    if type(a) is not type(b):
        return False
    if isinstance(a, TVar):
        da, db = ea.get(a.name), eb.get(b.name)
        if da is None and db is None:
            return a.name == b.name
        return da == db
    if isinstance(a, (Lin, Imp, Arrow)):
        return _talpha(a.arg, b.arg, ea, eb, depth) and _talpha(a.res, b.res, ea, eb, depth)
    if isinstance(a, (Par, Bang)):
        return _talpha(a.body, b.body, ea, eb, depth)
    return _talpha(a.body, b.body, {**ea, a.var: depth}, {**eb, b.var: depth}, depth + 1)


def rename_atoms_canonically(a: Type, names=None) -> Type:
    """Rename free atoms to ``a, b, c, ...`` in order of first occurrence."""
    mapping: dict = {}
    order = []

    def collect(t, bound):
        if isinstance(t, TVar):
            if t.name not in bound and t.name not in mapping:
                mapping[t.name] = None
                order.append(t.name)
        elif isinstance(t, (Lin, Imp, Arrow)):
            collect(t.arg, bound)
            collect(t.res, bound)
        elif isinstance(t, (Par, Bang)):
            collect(t.body, bound)
        else:
            collect(t.body, bound | {t.var})

    collect(a, frozenset())
    pool = names or _atom_names()
    taken = _all_type_vars(a) - set(order)
    it = iter(pool)
    for old in order:
        new = next(it)
        while new in taken:
            new = next(it)
        mapping[old] = new
    return _rename_free(a, mapping)


def _atom_names():
    i = 0
    letters = "abcdefghijklmnopqrstuvwxyz"
    while True:
        q, r = divmod(i, 26)
        yield letters[r] + (str(q) if q else "")
        i += 1


def _rename_free(a: Type, mapping: dict) -> Type:
    if isinstance(a, TVar):
        return TVar(mapping.get(a.name, a.name))
    if isinstance(a, (Lin, Imp, Arrow)):
        return type(a)(_rename_free(a.arg, mapping), _rename_free(a.res, mapping))
    if isinstance(a, (Par, Bang)):
        return type(a)(_rename_free(a.body, mapping))
    inner = {k: v for k, v in mapping.items() if k != a.var}
    return Forall(a.var, _rename_free(a.body, inner))


def is_dlal(a: Type) -> bool:
    if isinstance(a, TVar):
        return True
    if isinstance(a, (Lin, Imp)):
        return is_dlal(a.arg) and is_dlal(a.res)
    if isinstance(a, (Par, Forall)):
        return is_dlal(a.body)
    return False


def is_lal(a: Type) -> bool:
    if isinstance(a, TVar):
        return True
    if isinstance(a, Lin):
        return is_lal(a.arg) and is_lal(a.res)
    if isinstance(a, (Par, Bang, Forall)):
        return is_lal(a.body)
    return False


def star_translate(a: Type) -> Type:
    """The map from DLAL to LAL types sending ``A ⇒ B`` to ``!A* ⊸ B*``."""
    if isinstance(a, TVar):
        return a
    if isinstance(a, Lin):
        return Lin(star_translate(a.arg), star_translate(a.res))
    if isinstance(a, Imp):
        return Lin(Bang(star_translate(a.arg)), star_translate(a.res))
    if isinstance(a, Par):
        return Par(star_translate(a.body))
    if isinstance(a, Forall):
        return Forall(a.var, star_translate(a.body))
    raise UnsupportedType(f"not a DLAL type: {type_to_str(a)}")


def in_dlal_star(a: Type) -> tuple:
    """Return ``(True, preimage)`` if ``a`` is the image of a DLAL type, else ``(False, None)``.

    The image is characterised by: ``!`` occurs only as the immediate
    argument of ``⊸``, never nested as ``!!``, never as a result type.
    """
    pre = _preimage(a)
    return (pre is not None, pre)


def _preimage(a: Type) -> Optional[Type]:
    if isinstance(a, TVar):
        return a
    if isinstance(a, Lin):
        res = _preimage(a.res)
        if res is None:
            return None
        if isinstance(a.arg, Bang):
            inner = _preimage(a.arg.body)
            return None if inner is None else Imp(inner, res)
        arg = _preimage(a.arg)
        return None if arg is None else Lin(arg, res)
    if isinstance(a, Par):
        body = _preimage(a.body)
        return None if body is None else Par(body)
    if isinstance(a, Forall):
        body = _preimage(a.body)
        return None if body is None else Forall(a.var, body)
    return None


def erase_to_simple(a: Type) -> Type:
    """Forget modalities and linearity: the result uses only ``TVar`` and ``Arrow``."""
    if isinstance(a, TVar):
        return a
    if isinstance(a, (Lin, Imp, Arrow)):
        return Arrow(erase_to_simple(a.arg), erase_to_simple(a.res))
    if isinstance(a, (Par, Bang)):
        return erase_to_simple(a.body)
    raise UnsupportedType("quantified types have no simple-type erasure")


# ---------------------------------------------------------------------------
# standard types


def nat_body(alpha: str = "a") -> Type:
    """``(α ⊸ α) ⇒ §(α ⊸ α)``, the body of the numeral type."""
    step = Lin(TVar(alpha), TVar(alpha))
    return Imp(step, Par(step))


def nat_instance(a: Type) -> Type:
    """``(A ⊸ A) ⇒ §(A ⊸ A)`` for an arbitrary type A."""
    step = Lin(a, a)
    return Imp(step, Par(step))


NAT = Forall("a", nat_body("a"))


def word_type(alpha: str = "a") -> Type:
    step = Lin(TVar(alpha), TVar(alpha))
    return Forall(alpha, Imp(step, Imp(step, Par(step))))


WORD = word_type()


# ---------------------------------------------------------------------------
# contexts


@dataclass(frozen=True)
class Discharged:
    """A context entry ``[A]`` produced by a modal introduction.

    ``mark`` is ``'$'`` for the paragraph discharge used by both systems, or
    ``'!'`` for the LAL exponential discharge.
    """

    type: Type
    mark: str = "$"

    def __str__(self):
        return f"[{type_to_str(self.type)}]{self.mark}"


@dataclass(frozen=True)
class DualContext:
    """``Γ; Δ``: ``nonlinear`` maps names to types, ``linear`` to types or Discharged."""

    nonlinear: tuple = ()  # sorted (name, Type) pairs
    linear: tuple = ()  # sorted (name, Type | Discharged) pairs

    @staticmethod
    def make(nonlinear: dict, linear: dict) -> "DualContext":
        overlap = set(nonlinear) & set(linear)
        if overlap:
            raise ValueError(f"context zones overlap on {sorted(overlap)}")
        return DualContext(tuple(sorted(nonlinear.items())), tuple(sorted(linear.items())))

    @property
    def gamma(self) -> dict:
        return dict(self.nonlinear)

    @property
    def delta(self) -> dict:
        return dict(self.linear)

    def has_discharged(self) -> bool:
        return any(isinstance(v, Discharged) for _, v in self.linear)

    def __str__(self):
        g = ", ".join(f"{x}:{type_to_str(t)}" for x, t in self.nonlinear)
        d = ", ".join(
            f"{x}:{v}" if isinstance(v, Discharged) else f"{x}:{type_to_str(v)}"
            for x, v in self.linear
        )
        return f"{g}; {d}"
