"""Rewriting DLAL derivation scripts: substitution, ∀§-normalization, subject reduction.

The substitution operations take scripts for the pieces and return a script
for the substituted judgement; they never re-derive anything from terms.
Renaming is the delicate part: a script binds names in three ways
((⊸ i)/(⇒ i) binders, the discharged variable of (§ e), the two names
merged by (Cntr)), and the substituted script must not let any of them
capture a free variable of the term being substituted.  Before substituting,
:func:`freshen` renames every such locally bound name that clashes.

All functions expect checked scripts and return scripts that check; the
tests re-check every output.
"""

from __future__ import annotations

from typing import Iterable, Optional

from . import derivation as D
from . import terms as T
from .derivation import Deriv, DerivationError, Judgement
from .formulas import Discharged, Forall, Type, TVar, free_type_vars, type_substitute
from .syntax import fresh_name


class RewriteError(ValueError):
    """The inputs do not have the shapes the requested rewrite needs."""


class _Judge:
    """Memoized judgements for the (immutable) script nodes met during one rewrite."""

    def __init__(self):
        self.checker = D._Checker("ndlal")

    def __call__(self, d: Deriv) -> Judgement:
        return self.checker.check(d)

    def context(self, d: Deriv) -> dict:
        j = self(d)
        return {**j.gamma, **j.delta}


def _names(d: Deriv) -> set:
    """Every variable name mentioned anywhere in a script."""
    out = set()
    for _, n in D.iter_nodes(d):
        p = n.params
        for key in ("var", "binder"):
            if key in p and n.rule != "ForallI":
                out.add(p[key])
        out.update(p.get("merged", []) or [])
        out.update(p.get("nonlinear", []) or [])
    return out


def _type_vars(d: Deriv) -> set:
    out = set()
    for _, n in D.iter_nodes(d):
        for key in ("type", "inst_type"):
            if n.params.get(key) is not None:
                out |= _all_atoms(n.params[key])
        if n.rule == "ForallI":
            out.add(n.params["var"])
    return out


def _all_atoms(a: Type) -> set:
    from .formulas import _all_type_vars

    return set(_all_type_vars(a))


class _Fresh:
    def __init__(self, avoid: Iterable[str]):
        self.avoid = set(avoid)

    def __call__(self, base: str) -> str:
        name = fresh_name(base, self.avoid)
        self.avoid.add(name)
        return name


# ---------------------------------------------------------------------------
# renaming


def rename_var(d: Deriv, old: str, new: str, judge: Optional[_Judge] = None) -> Deriv:
    """Rename the context variable ``old`` of the conclusion of ``d`` to ``new``."""
    judge = judge or _Judge()
    return _rename(d, old, new, judge)


def _rename(d: Deriv, old: str, new: str, judge: _Judge) -> Deriv:
    if old == new or old not in judge.context(d):
        return d
    p = dict(d.params)
    if d.rule == "Id":
        return D.id_(new, p["type"])
    if d.rule == "Weak" and p["var"] == old:
        p["var"] = new
        return Deriv("Weak", p, d.premises)
    if d.rule == "Cntr":
        x1, x2, x = p["merged"]
        if x == old:
            prem = d.premises[0]
            if old in (x1, x2):
                prem = _rename(prem, old, new, judge)
                x1, x2 = (new if x1 == old else x1), (new if x2 == old else x2)
            return Deriv("Cntr", {"merged": [x1, x2, new]}, (prem,))
        return Deriv("Cntr", p, (_rename(d.premises[0], old, new, judge),))
    if d.rule == "ParI":
        p["nonlinear"] = [new if v == old else v for v in p.get("nonlinear", [])]
    prems = []
    for i, q in enumerate(d.premises):
        if old in _bound_by(d, i):
            prems.append(q)
        else:
            prems.append(_rename(q, old, new, judge))
    return Deriv(d.rule, p, tuple(prems))


def _bound_by(d: Deriv, i: int) -> set:
    """Names the rule at ``d`` binds in its ``i``-th premise."""
    if d.rule in ("LinI", "BangI_dlal"):
        return {d.params["binder"]}
    if d.rule == "ParE" and i == 1:
        return {d.params["binder"]}
    if d.rule == "Cntr":
        x1, x2, x = d.params["merged"]
        return {x1, x2} - {x}
    return set()


def freshen(d: Deriv, avoid: set, type_avoid: set = frozenset(), judge: Optional[_Judge] = None) -> Deriv:
    """Rename locally bound names (and eigenvariables) of ``d`` that occur in ``avoid``.

    The conclusion of ``d`` is unchanged up to α-equivalence of the subject.
    """
    judge = judge or _Judge()
    fresh = _Fresh(set(avoid) | _names(d))
    tfresh = _Fresh(set(type_avoid) | _type_vars(d))
    return _freshen(d, set(avoid), set(type_avoid), fresh, tfresh, judge)


def _freshen(d, avoid, type_avoid, fresh, tfresh, judge):
    p = dict(d.params)
    prems = list(d.premises)
    if d.rule in ("LinI", "BangI_dlal") and p["binder"] in avoid:
        new = fresh(p["binder"])
        prems[0] = _rename(prems[0], p["binder"], new, judge)
        p["binder"] = new
    elif d.rule == "ParE" and p["binder"] in avoid:
        new = fresh(p["binder"])
        prems[1] = _rename(prems[1], p["binder"], new, judge)
        p["binder"] = new
    elif d.rule == "Cntr":
        x1, x2, x = p["merged"]
        renamed = []
        for v in (x1, x2):
            if v != x and v in avoid:
                new = fresh(v)
                prems[0] = _rename(prems[0], v, new, judge)
                renamed.append(new)
            else:
                renamed.append(v)
        p["merged"] = [renamed[0], renamed[1], x]
    elif d.rule == "ForallI" and p["var"] in type_avoid:
        new = tfresh(p["var"])
        prems[0] = subst_type(prems[0], p["var"], TVar(new))
        p["var"] = new
    prems = [_freshen(q, avoid, type_avoid, fresh, tfresh, judge) for q in prems]
    return Deriv(d.rule, p, tuple(prems))


# ---------------------------------------------------------------------------
# substitution into scripts


def subst_type(d: Deriv, alpha: str, b: Type) -> Deriv:
    """Type substitution: replace the type variable ``alpha`` by ``b`` throughout the script."""
    avoid = free_type_vars(b) | {alpha}
    tfresh = _Fresh(_type_vars(d) | set(free_type_vars(b)) | {alpha})
    return _subst_type(d, alpha, b, avoid, tfresh)


def _subst_type(d, alpha, b, avoid, tfresh):
    p = dict(d.params)
    prems = list(d.premises)
    if d.rule == "ForallI":
        beta = p["var"]
        if beta == alpha:
            return d  # α is bound here: the premise's α is the eigenvariable
        if beta in avoid:
            new = tfresh(beta)
            prems[0] = subst_type(prems[0], beta, TVar(new))
            p["var"] = new
    for key in ("type", "inst_type"):
        if p.get(key) is not None:
            p[key] = type_substitute(p[key], alpha, b)
    prems = [_subst_type(q, alpha, b, avoid, tfresh) for q in prems]
    return Deriv(d.rule, p, tuple(prems))


def _weaken_by(d: Deriv, j: Judgement) -> Deriv:
    """Add every context entry of ``j`` to the conclusion of ``d`` by (Weak)."""
    for name, a in sorted(j.gamma.items()):
        d = D.weak(d, name, a, "nonlinear")
    for name, a in sorted(j.delta.items()):
        if isinstance(a, Discharged):
            d = D.weak(d, name, a.type, "linear", discharged=True)
        else:
            d = D.weak(d, name, a, "linear")
    return d


def _prepare(d_u: Deriv, d_t: Deriv, judge: _Judge, extra=()) -> Deriv:
    ju = judge(d_u)
    avoid = set(ju.gamma) | set(ju.delta) | set(ju.term.fv) | set(extra)
    type_avoid = set()
    for a in D._context_types(ju):
        type_avoid |= set(free_type_vars(a))
    return freshen(d_t, avoid, type_avoid, judge)


def subst_linear(d_u: Deriv, d_t: Deriv, x: str) -> Deriv:
    """Linear substitution: from ``Γ1;Δ1 ⊢ u : A`` and ``Γ2; x:A, Δ2 ⊢ t : B`` build ``Γ1,Γ2;Δ1,Δ2 ⊢ t[u/x] : B``."""
    judge = _Judge()
    jt = judge(d_t)
    ju = judge(d_u)
    entry = jt.delta.get(x)
    if entry is None or isinstance(entry, Discharged):
        raise RewriteError(f"{x!r} is not a linear undischarged entry of the target script")
    if not D.type_alpha_eq(entry, ju.type):
        raise RewriteError("substituted script has the wrong type")
    d_t = _prepare(d_u, d_t, judge, extra={x})
    return _sub_linear(d_u, d_t, x, judge)


def _sub_linear(d_u, d, x, judge):
    if x not in judge(d).delta:
        return d
    if d.rule == "Id":
        return d_u
    if d.rule == "Weak" and d.params["var"] == x:
        return _weaken_by(d.premises[0], judge(d_u))
    if d.rule == "ParI":
        raise RewriteError(f"(§ i) cannot conclude a linear undischarged {x!r}")
    prems = []
    for i, q in enumerate(d.premises):
        if x in judge(q).delta and x not in _bound_by(d, i):
            prems.append(_sub_linear(d_u, q, x, judge))
        else:
            prems.append(q)
    return Deriv(d.rule, dict(d.params), tuple(prems))


def subst_par(d_u: Deriv, d_t: Deriv, x: str, nonlinear=()) -> Deriv:
    """Substitution for a discharged variable: from ``;Γ1,Δ1 ⊢ u : A`` and ``Γ2; x:[A]§, Δ2 ⊢ t : B`` build ``Γ1,Γ2;[Δ1]§,Δ2 ⊢ t[u/x] : B``.

    ``nonlinear`` lists the entries of ``u``'s context that form Γ1.
    """
    judge = _Judge()
    ju = judge(d_u)
    if ju.gamma or any(isinstance(v, Discharged) for v in ju.delta.values()):
        raise RewriteError("substitution for a discharged variable needs a script with a purely linear, undischarged context")
    entry = judge(d_t).delta.get(x)
    if not isinstance(entry, Discharged):
        raise RewriteError(f"{x!r} is not a discharged entry of the target script")
    missing = set(nonlinear) - set(ju.delta)
    if missing:
        raise RewriteError(f"{sorted(missing)} are not entries of the substituted script")
    d_t = _prepare(d_u, d_t, judge, extra={x})
    return _sub_par(d_u, d_t, x, list(nonlinear), judge)


def _sub_par(d_u, d, x, nonlinear, judge):
    if x not in judge(d).delta:
        return d
    if d.rule == "Weak" and d.params["var"] == x:
        ju = judge(d_u)
        out = d.premises[0]
        for name, a in sorted(ju.delta.items()):
            if name in nonlinear:
                out = D.weak(out, name, a, "nonlinear")
            else:
                out = D.weak(out, name, a, "linear", discharged=True)
        return out
    if d.rule == "ParI":
        prem = d.premises[0]
        inner = _sub_linear(d_u, prem, x, judge)
        moved = list(d.params.get("nonlinear", [])) + list(nonlinear)
        return D.par_i(inner, nonlinear=moved)
    prems = []
    for i, q in enumerate(d.premises):
        if x in judge(q).delta and x not in _bound_by(d, i):
            prems.append(_sub_par(d_u, q, x, nonlinear, judge))
        else:
            prems.append(q)
    return Deriv(d.rule, dict(d.params), tuple(prems))


def subst_nonlinear(d_u: Deriv, d_t: Deriv, xs) -> Deriv:
    """Non-linear substitution: substitute ``u`` for the non-linear variables ``xs`` of ``t``.

    From ``; z:C ⊢ u : A`` (or ``; ⊢ u : A``) and ``x1:A … xn:A, Γ; Δ ⊢ t : B``
    build ``z:C, Γ; Δ ⊢ t[u/x1 … u/xn] : B``.  Each use of a variable gets its
    own renamed copy of ``z``, and the copies are contracted at the end.
    """
    judge = _Judge()
    ju = judge(d_u)
    if ju.gamma or len(ju.delta) > 1 or any(isinstance(v, Discharged) for v in ju.delta.values()):
        raise RewriteError("non-linear substitution needs a script with at most one linear entry")
    jt = judge(d_t)
    xs = set(xs)
    for x in xs:
        if x not in jt.gamma:
            raise RewriteError(f"{x!r} is not a non-linear entry of the target script")
    z, c = next(iter(ju.delta.items()), (None, None))
    d_t = _prepare(d_u, d_t, judge, extra=xs)
    fresh = _Fresh(_names(d_t) | _names(d_u) | set(jt.term.fv) | set(ju.term.fv) | ({z} if z else set()))
    copies: list = []

    def copy_u():
        if z is None:
            return d_u
        zi = fresh(z)
        copies.append(zi)
        return _rename(d_u, z, zi, judge)

    out = _sub_nonlinear(d_t, xs, copy_u, c, judge)
    if z is None:
        return out
    if not copies:
        return D.weak(out, z, c, "nonlinear")
    if len(copies) == 1:
        return _rename(out, copies[0], z, judge)
    return D.cntr_all(out, copies, z)


def _sub_nonlinear(d, xs, copy_u, c, judge):
    here = xs & set(judge(d).gamma)
    if not here:
        return d
    if d.rule == "Weak" and d.params["var"] in here:
        prem = _sub_nonlinear(d.premises[0], here - {d.params["var"]}, copy_u, c, judge)
        fresh_copy = copy_u()
        jc = judge(fresh_copy)
        for name, a in jc.delta.items():
            prem = D.weak(prem, name, a, "nonlinear")
        return prem
    if d.rule == "Cntr":
        x1, x2, x = d.params["merged"]
        if x in here:
            return _sub_nonlinear(d.premises[0], (here - {x}) | {x1, x2}, copy_u, c, judge)
    if d.rule == "ParI":
        prem = d.premises[0]
        moved = []
        for name in d.params.get("nonlinear", []):
            if name in here:
                piece = copy_u()
                prem = _sub_linear(piece, prem, name, judge)
                moved.extend(judge(piece).delta)
            else:
                moved.append(name)
        return D.par_i(prem, nonlinear=moved)
    if d.rule == "BangE_dlal":
        f, a = d.premises
        f = _sub_nonlinear(f, here, copy_u, c, judge)
        ja = judge(a)
        (y,) = ja.delta or (None,)
        if y is not None and y in here:
            a = _sub_linear(copy_u(), a, y, judge)
        return D.imp_e(f, a)
    prems = []
    for i, q in enumerate(d.premises):
        sub = (here & set(judge(q).gamma)) - _bound_by(d, i)
        prems.append(_sub_nonlinear(q, sub, copy_u, c, judge) if sub else q)
    return Deriv(d.rule, dict(d.params), tuple(prems))


def subst_into_derivation(kind: str, *args, **kw) -> Deriv:
    """Dispatch to the four kinds of substitution.

    ``kind`` is ``"type"`` (script, α, B), ``"linear-term"`` (u-script,
    t-script, x), ``"par-term"`` (u-script, t-script, x, nonlinear=…) or
    ``"nonlinear-term"`` (u-script, t-script, names).
    """
    table = {
        "type": subst_type,
        "linear-term": subst_linear,
        "par-term": subst_par,
        "nonlinear-term": subst_nonlinear,
    }
    if kind not in table:
        raise RewriteError(f"unknown substitution kind {kind!r}")
    return table[kind](*args, **kw)


# ---------------------------------------------------------------------------
# ∀§-normalization

_ELIMS = ("LinE", "BangE_dlal", "ParE", "ForallE")
_PERMUTABLE = ("Weak", "Cntr", "ParE")


def normality_violations(d: Deriv) -> list:
    """Paths of nodes breaking ∀§-normality, with the offending pattern."""
    out = []
    for path, n in D.iter_nodes(d):
        if n.rule == "ForallE" and n.premises[0].rule == "ForallI":
            out.append((path, "(∀ i) into (∀ e)"))
        if n.rule == "ParE" and n.premises[0].rule == "ParI":
            out.append((path, "(§ i) into (§ e)"))
        if n.rule in _ELIMS and n.premises[0].rule in _PERMUTABLE:
            out.append((path, f"{n.premises[0].rule} as major premise of {n.rule}"))
    return out


def is_vs_normal(d: Deriv) -> bool:
    return not normality_violations(d)


def vs_normalize(d: Deriv, max_rounds: int = 100_000) -> Deriv:
    """A ∀§-normal script with the same conclusion as ``d``.

    Collapses (∀ i)/(∀ e) pairs by type substitution and (§ i)/(§ e) pairs
    by substitution for the discharged variable, and pushes (Weak), (Cntr)
    and (§ e) below the elimination whose major premise they conclude.
    """
    state = {"rounds": 0, "max": max_rounds}
    return _norm(d, state)


def _norm(d: Deriv, state) -> Deriv:
    prems = tuple(_norm(p, state) for p in d.premises)
    if any(a is not b for a, b in zip(prems, d.premises)):
        d = Deriv(d.rule, dict(d.params), prems)
    return _root(d, state)


def _root(d: Deriv, state) -> Deriv:
    state["rounds"] += 1
    if state["rounds"] > state["max"]:
        raise RewriteError("∀§-normalization did not terminate within the round limit")
    if d.rule not in _ELIMS:
        return d
    major = d.premises[0]
    if d.rule == "ForallE" and major.rule == "ForallI":
        out = subst_type(major.premises[0], major.params["var"], d.params["inst_type"])
        return _norm(out, state)
    if d.rule == "ParE" and major.rule == "ParI":
        out = subst_par(major.premises[0], d.premises[1], d.params["binder"], major.params.get("nonlinear", []))
        return _norm(out, state)
    if major.rule not in _PERMUTABLE:
        return d
    rest = d.premises[1:]
    judge = _Judge()
    others = set()
    for q in rest:
        others |= set(judge.context(q)) | set(judge(q).term.fv)
    if d.rule == "ParE":
        others.add(d.params["binder"])
    if major.rule == "Weak":
        inner = _root(Deriv(d.rule, dict(d.params), (major.premises[0],) + rest), state)
        return Deriv("Weak", dict(major.params), (inner,))
    if major.rule == "Cntr":
        x1, x2, x = major.params["merged"]
        prem = major.premises[0]
        fresh = _Fresh(others | _names(d))
        names = []
        for v in (x1, x2):
            if v in others and v != x:
                new = fresh(v)
                prem = _rename(prem, v, new, judge)
                names.append(new)
            else:
                names.append(v)
        inner = _root(Deriv(d.rule, dict(d.params), (prem,) + rest), state)
        return Deriv("Cntr", {"merged": [names[0], names[1], x]}, (inner,))
    # (§ e) as the major premise: its own scope is widened over the elimination, renaming on clashes
    v_major, minor = major.premises
    x = major.params["binder"]
    if x in others:
        new = _Fresh(others | _names(d))(x)
        minor = _rename(minor, x, new, judge)
        x = new
    inner = _root(Deriv(d.rule, dict(d.params), (minor,) + rest), state)
    return D.par_e(v_major, x, inner)


# ---------------------------------------------------------------------------
# subject reduction


def reduce_script(d: Deriv, path) -> Deriv:
    """A script for the reduct of the subject of ``d`` at the β-redex ``path``.

    The script is first ∀§-normalized; the redex is then located by following
    the subject through the rules, and contracted by linear substitution for a
    linear application or by non-linear substitution for a (⇒ e) one.  The conclusion
    keeps the contexts and type of ``d``.
    """
    d = vs_normalize(d)
    return _reduce(d, tuple(path), _Judge())


def _reduce(d: Deriv, path: tuple, judge: _Judge) -> Deriv:
    rule = d.rule
    if rule == "Id":
        raise RewriteError("no redex at a variable")
    if rule in ("Weak", "Cntr", "ParI", "ForallI", "ForallE"):
        return Deriv(rule, dict(d.params), (_reduce(d.premises[0], path, judge),))
    if rule in ("LinI", "BangI_dlal"):
        if not path or path[0] != T.BODY:
            raise RewriteError("path does not match an abstraction")
        return Deriv(rule, dict(d.params), (_reduce(d.premises[0], path[1:], judge),))
    if rule in ("LinE", "BangE_dlal"):
        f, a = d.premises
        if not path:
            if rule == "LinE":
                if f.rule != "LinI":
                    raise RewriteError(f"function premise ends with {f.rule}, not (⊸ i)")
                return subst_linear(a, f.premises[0], f.params["binder"])
            if f.rule != "BangI_dlal":
                raise RewriteError(f"function premise ends with {f.rule}, not (⇒ i)")
            return subst_nonlinear(a, f.premises[0], {f.params["binder"]})
        if path[0] == T.FUN:
            return Deriv(rule, {}, (_reduce(f, path[1:], judge), a))
        return Deriv(rule, {}, (f, _reduce(a, path[1:], judge)))
    if rule == "ParE":
        major, minor = d.premises
        x = d.params["binder"]
        # follow the path through the minor subject; reaching x means the redex lies in the major
        t = judge(minor).term
        k = 0
        while not isinstance(t, T.Var) and k < len(path):
            step = path[k]
            t = t.fun if step == T.FUN else t.arg if step == T.ARG else t.body
            k += 1
        if isinstance(t, T.Var):
            if t.name != x:
                raise RewriteError("path ends at a variable, not a redex")
            return D.par_e(_reduce(major, path[k:], judge), x, minor)
        if isinstance(t, T.App) and isinstance(t.fun, T.Var) and t.fun.name == x:
            raise RewriteError("redex created by substituting an abstraction through (§ e)")
        return D.par_e(major, x, _reduce(minor, path, judge))
    raise RewriteError(f"rule {rule} is not supported by subject reduction")


# ---------------------------------------------------------------------------
# structural properties of checked scripts


_INTRODUCES = {"LinI": "Lin", "BangI_dlal": "Imp", "ForallI": "Forall", "ParI": "Par"}


def abstraction_property_violations(d: Deriv) -> list:
    """Nodes of a ∀§-normal script that conclude an abstraction without introducing its connective.

    A node whose subject is an abstraction and whose rule is not (Weak),
    (Cntr) or (§ e) must be the introduction rule of the outermost connective
    of its type.  Returns ``(path, rule, type)`` for each node that is not.
    """
    judge = _Judge()
    bad = []
    for path, n in D.iter_nodes(d):
        j = judge(n)
        if not isinstance(j.term, T.Abs) or n.rule in ("Weak", "Cntr", "ParE"):
            continue
        if _INTRODUCES.get(n.rule) != type(j.type).__name__:
            bad.append((path, n.rule, j.type))
    return bad


def linear_use_violations(d: Deriv) -> list:
    """Nodes whose subject uses a linear (Δ) variable more than once.

    Returns ``(path, variable, count)`` triples; empty for every script the
    checker accepts.
    """
    judge = _Judge()
    bad = []
    for path, n in D.iter_nodes(d):
        j = judge(n)
        for x in j.delta:
            k = T.free_occurrences(x, j.term)
            if k > 1:
                bad.append((path, x, k))
    return bad
