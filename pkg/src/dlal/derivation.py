"""Natural-deduction derivation scripts for DLAL and LAL.

A script is a tree of :class:`Deriv` nodes.  Each node names its rule, carries
the parameters the rule needs (binder names, instantiation types, the
contracted triple, weakened entries) and its premises.  The checkers compute
the judgement at every node bottom-up, so the subject term of the root is
reconstructed from the script alone.

Rule names and premise order
----------------------------
``Id``           params ``var``, ``type``.
``LinI``         params ``binder``; premise with ``binder`` linear.
``LinE``         premises ``[function, argument]``.
``BangI_dlal``   (⇒ i) params ``binder``; premise with ``binder`` non-linear.
``BangE_dlal``   (⇒ e) premises ``[function, argument]``; the argument's
                 context is empty or a single linear entry, which becomes
                 non-linear in the conclusion.
``Weak``         params ``var``, ``type``, ``zone`` (``"nonlinear"`` or
                 ``"linear"``), ``discharged`` (bool) or for LAL ``mark``
                 (``null``, ``"!"``, ``"$"``).
``Cntr``         params ``merged: [x1, x2, x]``.
``ParI``         DLAL: params ``nonlinear``: the premise entries that move to
                 the non-linear zone; the others become discharged.  LAL:
                 params ``bang``: the entries that become ``[B]!``.
``ParE``         params ``binder``; premises ``[major, minor]``.
``ForallI``      params ``var``.
``ForallE``      params ``inst_type``.
``BangI_lal``    (! i) premise with at most one, undischarged, entry.
``BangE_lal``    (! e) params ``binder``; premises ``[major, minor]``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from . import terms as T
from .formulas import (
    Bang,
    Discharged,
    DualContext,
    Forall,
    Imp,
    Lin,
    Par,
    TVar,
    Type,
    free_type_vars,
    parse_type,
    star_translate,
    type_alpha_eq,
    type_substitute,
    type_to_str,
)

DLAL_RULES = frozenset(
    {"Id", "LinI", "LinE", "BangI_dlal", "BangE_dlal", "Weak", "Cntr", "ParI", "ParE", "ForallI", "ForallE"}
)
LAL_RULES = frozenset(
    {"Id", "LinI", "LinE", "Weak", "Cntr", "ParI", "ParE", "ForallI", "ForallE", "BangI_lal", "BangE_lal"}
)
ARITY = {
    "Id": 0,
    "LinI": 1,
    "LinE": 2,
    "BangI_dlal": 1,
    "BangE_dlal": 2,
    "Weak": 1,
    "Cntr": 1,
    "ParI": 1,
    "ParE": 2,
    "ForallI": 1,
    "ForallE": 1,
    "BangI_lal": 1,
    "BangE_lal": 2,
}
_TYPE_PARAMS = ("type", "inst_type")


@dataclass(frozen=True, eq=False)
class Deriv:
    rule: str
    params: dict = field(default_factory=dict)
    premises: tuple = ()

    def __post_init__(self):
        if self.rule not in ARITY:
            raise ValueError(f"unknown rule {self.rule!r}")
        if len(self.premises) != ARITY[self.rule]:
            raise ValueError(f"rule {self.rule} expects {ARITY[self.rule]} premises, got {len(self.premises)}")

    def __repr__(self):
        return f"Deriv({self.rule}, {self.params}, {len(self.premises)} premises)"


class DerivationError(ValueError):
    """A rule application that does not fit its rule.  ``path`` lists premise indices from the root."""

    def __init__(self, message: str, path=(), rule: str = ""):
        where = "/".join(str(i) for i in path) or "root"
        super().__init__(f"{rule} at node {where}: {message}")
        self.path = tuple(path)
        self.rule = rule


@dataclass(frozen=True)
class Judgement:
    """``gamma; delta ⊢ term : type``.  LAL judgements keep ``gamma`` empty."""

    gamma: dict
    delta: dict
    term: T.Term
    type: Type

    @property
    def context(self) -> DualContext:
        return DualContext.make(self.gamma, self.delta)

    def is_final(self) -> bool:
        return not any(isinstance(v, Discharged) for v in self.delta.values())

    def __str__(self):
        return f"{self.context} ⊢ {T.to_str(self.term)} : {type_to_str(self.type)}"


# ---------------------------------------------------------------------------
# construction helpers


def node_count(d: Deriv) -> int:
    count = 0
    stack = [d]
    while stack:
        n = stack.pop()
        count += 1
        stack.extend(n.premises)
    return count


def iter_nodes(d: Deriv):
    """Pre-order traversal yielding ``(path, node)``."""
    stack = [((), d)]
    while stack:
        path, n = stack.pop()
        yield path, n
        for i in reversed(range(len(n.premises))):
            stack.append((path + (i,), n.premises[i]))


def deriv_depth(d: Deriv) -> int:
    """Branch-maximal count of modal boxes.

    For DLAL scripts this counts (§ i) premises and right premises of (⇒ e);
    for LAL scripts it counts (§ i) and (! i) premises.
    """
    if d.rule in ("ParI", "BangI_lal"):
        return 1 + deriv_depth(d.premises[0])
    if d.rule == "BangE_dlal":
        return max(deriv_depth(d.premises[0]), 1 + deriv_depth(d.premises[1]))
    return max((deriv_depth(p) for p in d.premises), default=0)


# ---------------------------------------------------------------------------
# JSON


def to_json(d: Deriv) -> dict:
    params = {}
    for k, v in d.params.items():
        params[k] = type_to_str(v) if k in _TYPE_PARAMS and v is not None else v
    return {"rule": d.rule, "params": params, "premises": [to_json(p) for p in d.premises]}


def from_json(data: dict) -> Deriv:
    params = {}
    for k, v in data.get("params", {}).items():
        if k in _TYPE_PARAMS and isinstance(v, str):
            params[k] = parse_type(v)
        elif isinstance(v, list):
            params[k] = list(v)
        else:
            params[k] = v
    return Deriv(data["rule"], params, tuple(from_json(p) for p in data.get("premises", [])))


def dumps(d: Deriv, **kw) -> str:
    return json.dumps(to_json(d), **kw)


def loads(text: str) -> Deriv:
    return from_json(json.loads(text))


# ---------------------------------------------------------------------------
# checking


def _merge(parts, path, rule):
    out: dict = {}
    for part in parts:
        for k, v in part.items():
            if k in out:
                raise DerivationError(f"variable {k!r} occurs in both premises", path, rule)
            out[k] = v
    return out


def _require_type(params, key, path, rule) -> Type:
    val = params.get(key)
    if isinstance(val, str):
        val = parse_type(val)
    if val is None:
        raise DerivationError(f"missing parameter {key!r}", path, rule)
    return val


def _rename_subject(t: T.Term, x1: str, x2: str, x: str) -> T.Term:
    if x in t.fv and x not in (x1, x2):
        raise ValueError("contracted name already free")
    t = T.substitute(t, x1, T.Var(x)) if x1 != x else t
    return T.substitute(t, x2, T.Var(x)) if x2 != x else t


def _context_types(j: Judgement):
    for v in list(j.gamma.values()) + list(j.delta.values()):
        yield v.type if isinstance(v, Discharged) else v


class _Checker:
    def __init__(self, system: str):
        self.system = system
        self.rules = DLAL_RULES if system == "ndlal" else LAL_RULES
        self.memo: dict = {}

    def check(self, d: Deriv, path=()) -> Judgement:
        cached = self.memo.get(id(d))
        if cached is not None:
            return cached[1]
        if d.rule not in self.rules:
            raise DerivationError(f"rule not available in {self.system.upper()}", path, d.rule)
        prem = [self.check(p, path + (i,)) for i, p in enumerate(d.premises)]
        j = getattr(self, "_" + d.rule)(d, prem, path)
        self.memo[id(d)] = (d, j)
        return j

    # rules shared by both systems ------------------------------------------

    def _Id(self, d, prem, path):
        x = d.params.get("var")
        if not isinstance(x, str):
            raise DerivationError("missing variable name", path, d.rule)
        a = _require_type(d.params, "type", path, d.rule)
        return Judgement({}, {x: a}, T.Var(x), a)

    def _LinI(self, d, prem, path):
        (j,) = prem
        x = d.params.get("binder")
        entry = j.delta.get(x)
        if entry is None:
            where = "non-linear zone" if x in j.gamma else "context"
            raise DerivationError(f"binder {x!r} is not a linear entry (found in {where})", path, d.rule)
        if isinstance(entry, Discharged):
            raise DerivationError(f"cannot abstract discharged variable {x!r}", path, d.rule)
        delta = {k: v for k, v in j.delta.items() if k != x}
        return Judgement(j.gamma, delta, T.Abs(x, j.term), Lin(entry, j.type))

    def _LinE(self, d, prem, path):
        f, a = prem
        if not isinstance(f.type, Lin):
            raise DerivationError(f"function type {type_to_str(f.type)} is not linear", path, d.rule)
        if not type_alpha_eq(f.type.arg, a.type):
            raise DerivationError(
                f"argument type {type_to_str(a.type)} does not match {type_to_str(f.type.arg)}", path, d.rule
            )
        gamma = _merge([f.gamma, a.gamma], path, d.rule)
        delta = _merge([f.delta, a.delta, gamma], path, d.rule)
        for k in gamma:
            delta.pop(k)
        return Judgement(gamma, delta, T.App(f.term, a.term), f.type.res)

    def _Weak(self, d, prem, path):
        (j,) = prem
        x = d.params.get("var")
        a = _require_type(d.params, "type", path, d.rule)
        if x in j.gamma or x in j.delta:
            raise DerivationError(f"variable {x!r} already in context", path, d.rule)
        if self.system == "ndlal":
            zone = d.params.get("zone", "linear")
            if zone == "nonlinear":
                return Judgement({**j.gamma, x: a}, j.delta, j.term, j.type)
            if zone != "linear":
                raise DerivationError(f"unknown zone {zone!r}", path, d.rule)
            entry = Discharged(a) if d.params.get("discharged") else a
            return Judgement(j.gamma, {**j.delta, x: entry}, j.term, j.type)
        mark = d.params.get("mark")
        if mark not in (None, "!", "$"):
            raise DerivationError(f"unknown mark {mark!r}", path, d.rule)
        entry = a if mark is None else Discharged(a, mark)
        return Judgement({}, {**j.delta, x: entry}, j.term, j.type)

    def _Cntr(self, d, prem, path):
        (j,) = prem
        merged = d.params.get("merged")
        if not (isinstance(merged, (list, tuple)) and len(merged) == 3):
            raise DerivationError("parameter 'merged' must be [x1, x2, x]", path, d.rule)
        x1, x2, x = merged
        if x1 == x2:
            raise DerivationError("contracted variables must be distinct", path, d.rule)
        if self.system == "ndlal":
            zone = j.gamma
            for v in (x1, x2):
                if v not in zone:
                    raise DerivationError(f"{v!r} is not in the non-linear zone", path, d.rule)
            a1, a2 = zone[x1], zone[x2]
        else:
            zone = j.delta
            for v in (x1, x2):
                e = zone.get(v)
                if not (isinstance(e, Discharged) and e.mark == "!"):
                    raise DerivationError(f"{v!r} is not a !-discharged entry", path, d.rule)
            a1, a2 = zone[x1].type, zone[x2].type
        if not type_alpha_eq(a1, a2):
            raise DerivationError("contracted variables have different types", path, d.rule)
        rest_g = {k: v for k, v in j.gamma.items() if k not in (x1, x2)}
        rest_d = {k: v for k, v in j.delta.items() if k not in (x1, x2)}
        if x in rest_g or x in rest_d:
            raise DerivationError(f"contracted name {x!r} already in context", path, d.rule)
        term = _rename_subject(j.term, x1, x2, x)
        if self.system == "ndlal":
            return Judgement({**rest_g, x: a1}, rest_d, term, j.type)
        return Judgement({}, {**rest_d, x: zone[x1]}, term, j.type)

    def _ParE(self, d, prem, path):
        u, t = prem
        x = d.params.get("binder")
        if not isinstance(u.type, Par):
            raise DerivationError(f"major premise type {type_to_str(u.type)} is not §A", path, d.rule)
        entry = t.delta.get(x)
        if not (isinstance(entry, Discharged) and entry.mark == "$"):
            raise DerivationError(f"binder {x!r} is not a §-discharged entry of the minor premise", path, d.rule)
        if not type_alpha_eq(entry.type, u.type.body):
            raise DerivationError("discharged type does not match the major premise", path, d.rule)
        t_delta = {k: v for k, v in t.delta.items() if k != x}
        gamma = _merge([u.gamma, t.gamma], path, d.rule)
        delta = _merge([u.delta, t_delta], path, d.rule)
        _merge([gamma, delta], path, d.rule)
        return Judgement(gamma, delta, T.substitute(t.term, x, u.term), t.type)

    def _ForallI(self, d, prem, path):
        (j,) = prem
        alpha = d.params.get("var")
        if not isinstance(alpha, str):
            raise DerivationError("missing type variable", path, d.rule)
        for a in _context_types(j):
            if alpha in free_type_vars(a):
                raise DerivationError(f"eigenvariable {alpha!r} free in the context", path, d.rule)
        return Judgement(j.gamma, j.delta, j.term, Forall(alpha, j.type))

    def _ForallE(self, d, prem, path):
        (j,) = prem
        if not isinstance(j.type, Forall):
            raise DerivationError(f"type {type_to_str(j.type)} is not quantified", path, d.rule)
        b = _require_type(d.params, "inst_type", path, d.rule)
        return Judgement(j.gamma, j.delta, j.term, type_substitute(j.type.body, j.type.var, b))

    # DLAL-only rules --------------------------------------------------------

    def _BangI_dlal(self, d, prem, path):
        (j,) = prem
        x = d.params.get("binder")
        if x not in j.gamma:
            raise DerivationError(f"binder {x!r} is not in the non-linear zone", path, d.rule)
        gamma = {k: v for k, v in j.gamma.items() if k != x}
        return Judgement(gamma, j.delta, T.Abs(x, j.term), Imp(j.gamma[x], j.type))

    def _BangE_dlal(self, d, prem, path):
        f, a = prem
        if not isinstance(f.type, Imp):
            raise DerivationError(f"function type {type_to_str(f.type)} is not ⇒", path, d.rule)
        if not type_alpha_eq(f.type.arg, a.type):
            raise DerivationError(
                f"argument type {type_to_str(a.type)} does not match {type_to_str(f.type.arg)}", path, d.rule
            )
        if a.gamma or len(a.delta) > 1:
            raise DerivationError("argument must have at most one (linear) free variable", path, d.rule)
        gamma = dict(f.gamma)
        for z, c in a.delta.items():
            if isinstance(c, Discharged):
                raise DerivationError(f"argument variable {z!r} is discharged", path, d.rule)
            if z in f.gamma or z in f.delta:
                raise DerivationError(f"variable {z!r} occurs in both premises", path, d.rule)
            gamma[z] = c
        return Judgement(gamma, dict(f.delta), T.App(f.term, a.term), f.type.res)

    def _ParI(self, d, prem, path):
        (j,) = prem
        if self.system == "ndlal":
            if j.gamma:
                raise DerivationError("premise must have an empty non-linear zone", path, d.rule)
            moved = list(d.params.get("nonlinear", []))
        else:
            moved = list(d.params.get("bang", []))
        for k, v in j.delta.items():
            if isinstance(v, Discharged):
                raise DerivationError(f"premise entry {k!r} is already discharged", path, d.rule)
        for k in moved:
            if k not in j.delta:
                raise DerivationError(f"{k!r} is not a premise entry", path, d.rule)
        if self.system == "ndlal":
            gamma = {k: j.delta[k] for k in moved}
            delta = {k: Discharged(v) for k, v in j.delta.items() if k not in gamma}
            return Judgement(gamma, delta, j.term, Par(j.type))
        delta = {k: Discharged(v, "!" if k in moved else "$") for k, v in j.delta.items()}
        return Judgement({}, delta, j.term, Par(j.type))

    # LAL-only rules ---------------------------------------------------------

    def _BangI_lal(self, d, prem, path):
        (j,) = prem
        if len(j.delta) > 1:
            raise DerivationError("(! i) premise has more than one free variable", path, d.rule)
        delta = {}
        for k, v in j.delta.items():
            if isinstance(v, Discharged):
                raise DerivationError(f"premise entry {k!r} is discharged", path, d.rule)
            delta[k] = Discharged(v, "!")
        return Judgement({}, delta, j.term, Bang(j.type))

    def _BangE_lal(self, d, prem, path):
        u, t = prem
        x = d.params.get("binder")
        if not isinstance(u.type, Bang):
            raise DerivationError(f"major premise type {type_to_str(u.type)} is not !A", path, d.rule)
        entry = t.delta.get(x)
        if not (isinstance(entry, Discharged) and entry.mark == "!"):
            raise DerivationError(f"binder {x!r} is not a !-discharged entry of the minor premise", path, d.rule)
        if not type_alpha_eq(entry.type, u.type.body):
            raise DerivationError("discharged type does not match the major premise", path, d.rule)
        t_delta = {k: v for k, v in t.delta.items() if k != x}
        delta = _merge([u.delta, t_delta], path, d.rule)
        return Judgement({}, delta, T.substitute(t.term, x, u.term), t.type)


def check_ndlal(s: Deriv) -> Judgement:
    """Check a DLAL script and return its conclusion (raises DerivationError)."""
    return _Checker("ndlal").check(s)


def check_nlal(s: Deriv) -> Judgement:
    """Check an LAL script and return its conclusion (raises DerivationError)."""
    return _Checker("nlal").check(s)


def judgements(s: Deriv, system: str = "ndlal") -> dict:
    """Map ``id(node)`` to the node's judgement for every node of a checked script."""
    checker = _Checker(system)
    checker.check(s)
    return {k: v[1] for k, v in checker.memo.items()}


def check_final_ndlal(s: Deriv) -> Judgement:
    """Check a script whose conclusion must be a final judgement (no discharged entries)."""
    j = check_ndlal(s)
    if not j.is_final():
        raise DerivationError("final judgement contains discharged entries", (), s.rule)
    return j


# ---------------------------------------------------------------------------
# translation to LAL


def translate_to_lal(s: Deriv) -> Deriv:
    """Turn a DLAL script into an LAL script of the star-translated judgement.

    A conclusion ``Γ; Δ ⊢ t : A`` becomes ``[Γ*]!, Δ* ⊢ t : A*``.
    """
    js = judgements(s, "ndlal")

    def go(d: Deriv) -> Deriv:
        p = [go(q) for q in d.premises]
        r = d.rule
        if r == "Id":
            return Deriv("Id", {"var": d.params["var"], "type": star_translate(d.params["type"])})
        if r in ("LinI", "LinE", "Cntr", "ParE", "ForallI"):
            return Deriv(r, dict(d.params), tuple(p))
        if r == "ForallE":
            return Deriv(r, {"inst_type": star_translate(d.params["inst_type"])}, tuple(p))
        if r == "Weak":
            a = star_translate(d.params["type"])
            if d.params.get("zone") == "nonlinear":
                mark = "!"
            else:
                mark = "$" if d.params.get("discharged") else None
            return Deriv("Weak", {"var": d.params["var"], "type": a, "mark": mark}, tuple(p))
        if r == "ParI":
            return Deriv("ParI", {"bang": list(d.params.get("nonlinear", []))}, tuple(p))
        if r == "BangI_dlal":
            x = d.params["binder"]
            a = star_translate(js[id(d.premises[0])].gamma[x])
            opened = Deriv("BangE_lal", {"binder": x}, (Deriv("Id", {"var": x, "type": Bang(a)}), p[0]))
            return Deriv("LinI", {"binder": x}, (opened,))
        if r == "BangE_dlal":
            return Deriv("LinE", {}, (p[0], Deriv("BangI_lal", {}, (p[1],))))
        raise DerivationError("unexpected rule", (), r)

    return go(s)


def star_judgement(j: Judgement) -> Judgement:
    """The LAL judgement ``[Γ*]!, Δ* ⊢ t : A*`` corresponding to a DLAL one."""
    delta = {k: Discharged(star_translate(v), "!") for k, v in j.gamma.items()}
    for k, v in j.delta.items():
        delta[k] = Discharged(star_translate(v.type)) if isinstance(v, Discharged) else star_translate(v)
    return Judgement({}, delta, j.term, star_translate(j.type))


def judgement_alpha_eq(a: Judgement, b: Judgement, up_to_alpha_term: bool = True) -> bool:
    if set(a.gamma) != set(b.gamma) or set(a.delta) != set(b.delta):
        return False
    for k in a.gamma:
        if not type_alpha_eq(a.gamma[k], b.gamma[k]):
            return False
    for k in a.delta:
        x, y = a.delta[k], b.delta[k]
        if isinstance(x, Discharged) != isinstance(y, Discharged):
            return False
        if isinstance(x, Discharged):
            if x.mark != y.mark or not type_alpha_eq(x.type, y.type):
                return False
        elif not type_alpha_eq(x, y):
            return False
    if not type_alpha_eq(a.type, b.type):
        return False
    return T.alpha_eq(a.term, b.term) if up_to_alpha_term else a.term == b.term


# ---------------------------------------------------------------------------
# constructors used to write scripts by hand


def id_(x: str, a: Type) -> Deriv:
    return Deriv("Id", {"var": x, "type": a})


def lin_i(x: str, d: Deriv) -> Deriv:
    return Deriv("LinI", {"binder": x}, (d,))


def lin_e(f: Deriv, a: Deriv) -> Deriv:
    return Deriv("LinE", {}, (f, a))


def imp_i(x: str, d: Deriv) -> Deriv:
    return Deriv("BangI_dlal", {"binder": x}, (d,))


def imp_e(f: Deriv, a: Deriv) -> Deriv:
    return Deriv("BangE_dlal", {}, (f, a))


def weak(d: Deriv, x: str, a: Type, zone: str = "linear", discharged: bool = False) -> Deriv:
    return Deriv("Weak", {"var": x, "type": a, "zone": zone, "discharged": discharged}, (d,))


def weak_lal(d: Deriv, x: str, a: Type, mark: Optional[str] = None) -> Deriv:
    return Deriv("Weak", {"var": x, "type": a, "mark": mark}, (d,))


def cntr(d: Deriv, x1: str, x2: str, x: str) -> Deriv:
    return Deriv("Cntr", {"merged": [x1, x2, x]}, (d,))


def cntr_all(d: Deriv, names, x: str) -> Deriv:
    """Contract every name in ``names`` (at least one) into ``x``."""
    names = list(names)
    if len(names) == 1:
        if names[0] != x:
            raise ValueError("renaming a single variable is not a contraction")
        return d
    d = cntr(d, names[0], names[1], x)
    for n in names[2:]:
        d = cntr(d, x, n, x)
    return d


def par_i(d: Deriv, nonlinear=()) -> Deriv:
    return Deriv("ParI", {"nonlinear": list(nonlinear)}, (d,))


def par_i_lal(d: Deriv, bang=()) -> Deriv:
    return Deriv("ParI", {"bang": list(bang)}, (d,))


def par_e(major: Deriv, x: str, minor: Deriv) -> Deriv:
    return Deriv("ParE", {"binder": x}, (major, minor))


def forall_i(alpha: str, d: Deriv) -> Deriv:
    return Deriv("ForallI", {"var": alpha}, (d,))


def forall_e(d: Deriv, b: Type) -> Deriv:
    return Deriv("ForallE", {"inst_type": b}, (d,))


def bang_i_lal(d: Deriv) -> Deriv:
    return Deriv("BangI_lal", {}, (d,))


def bang_e_lal(major: Deriv, x: str, minor: Deriv) -> Deriv:
    return Deriv("BangE_lal", {"binder": x}, (major, minor))


def lift(d: Deriv, times: int = 1) -> Deriv:
    """From ``;Δ ⊢ t : B`` build ``;§Δ ⊢ t : §B`` (``times`` rounds).

    Each round boxes the script with (§ i), leaving every linear entry
    discharged, then reopens each entry with a (§ e) against an axiom of the
    same name at the paragraph type.
    """
    for _ in range(times):
        j = check_ndlal(d)
        if j.gamma:
            raise ValueError("lift needs an empty non-linear zone")
        d = par_i(d)
        for x, a in sorted(j.delta.items()):
            d = par_e(id_(x, Par(a)), x, d)
    return d
