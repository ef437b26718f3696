"""Concrete programs with hand-built certificates.

Every builder returns a term together with a DLAL (or, for the duplication
counterexample, LAL) script whose subject is that term.  The scripts are
assembled from the rule constructors of :mod:`dlal.derivation`; nothing here
trusts its own bookkeeping, since the certificate is re-checked wherever it
is used.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional

from .. import derivation as D
from .. import terms as T
from ..syntax import fresh_name
from ..formulas import (
    NAT,
    Bang,
    Imp,
    Lin,
    Par,
    TVar,
    Type,
    pars,
    word_type,
)

ALPHA = TVar("a")
STEP = Lin(ALPHA, ALPHA)


@dataclass
class NamedProgram:
    name: str
    term: T.Term
    certificate: Optional[D.Deriv] = None
    system: str = "ndlal"  # or "nlal"
    claimed_type: Optional[Type] = None
    notes: str = ""
    extra: dict = field(default_factory=dict)

    def judgement(self) -> D.Judgement:
        if self.certificate is None:
            raise ValueError(f"{self.name} has no certificate")
        check = D.check_ndlal if self.system == "ndlal" else D.check_nlal
        return check(self.certificate)


# ---------------------------------------------------------------------------
# numerals and words


def church_term(n: int) -> T.Term:
    body: T.Term = T.Var("x")
    for _ in range(n):
        body = T.App(T.Var("f"), body)
    return T.Abs("f", T.Abs("x", body))


def church_value(t: T.Term) -> Optional[int]:
    """Decode a normal form ``λf.λx.f (… (f x))``; None if it is not a numeral."""
    if not (isinstance(t, T.Abs) and isinstance(t.body, T.Abs)):
        return None
    f, x, body = t.var, t.body.var, t.body.body
    if f == x:
        return None
    n = 0
    while isinstance(body, T.App):
        if body.fun != T.Var(f):
            return None
        body, n = body.arg, n + 1
    return n if body == T.Var(x) else None


def _iterate_script(names, arg_name: str, a: Type) -> D.Deriv:
    """``; g1:A⊸A, …, gk:A⊸A, x:A ⊢ g1 (… (gk x)) : A``."""
    d = D.id_(arg_name, a)
    for g in reversed(names):
        d = D.lin_e(D.id_(g, Lin(a, a)), d)
    return d


def church_body_script(n: int, a: Type = ALPHA) -> D.Deriv:
    """``⊢ n̲ : (A ⊸ A) ⇒ §(A ⊸ A)`` without the outer quantifier."""
    occ = ["f"] if n == 1 else [f"f{i}" for i in range(1, n + 1)]
    d = D.lin_i("x", _iterate_script(occ, "x", a))
    d = D.par_i(d, nonlinear=occ)
    if n == 0:
        d = D.weak(d, "f", Lin(a, a), zone="nonlinear")
    elif n >= 2:
        d = D.cntr_all(d, occ, "f")
    return D.imp_i("f", d)


def church_script(n: int) -> D.Deriv:
    """``⊢ n̲ : N``."""
    return D.forall_i("a", church_body_script(n))


def church(n: int) -> NamedProgram:
    if n < 0:
        raise ValueError("numerals are non-negative")
    return NamedProgram(f"church{n}", church_term(n), church_script(n), claimed_type=NAT)


def word_term(bits: str) -> T.Term:
    body: T.Term = T.Var("x")
    for b in reversed(bits):
        body = T.App(T.Var("s" + b), body)
    return T.lams(["s0", "s1", "x"], body)


def word(bits: str) -> NamedProgram:
    # single-occurrence letters are named directly by their step function
    occ_names = []
    for i, b in enumerate(bits):
        count = bits.count(b)
        occ_names.append(f"s{b}" if count == 1 else f"s{b}_{i}")
    d = D.lin_i("x", _iterate_script(occ_names, "x", ALPHA))
    d = D.par_i(d, nonlinear=occ_names)
    for letter in "10":
        mine = [o for o, b in zip(occ_names, bits) if b == letter]
        name = "s" + letter
        if len(mine) >= 2:
            d = D.cntr_all(d, mine, name)
        elif not mine:
            d = D.weak(d, name, STEP, zone="nonlinear")
        d = D.imp_i(name, d)
    cert = D.forall_i("a", d)
    return NamedProgram(f"word_{bits or 'empty'}", word_term(bits), cert, claimed_type=word_type())


# ---------------------------------------------------------------------------
# arithmetic


def _iterate_numeral(n_name: str, f_name: str, a: Type = ALPHA) -> D.Deriv:
    """``f_name:A⊸A; n_name:N ⊢ n f : §(A⊸A)``."""
    inst = D.forall_e(D.id_(n_name, NAT), a)
    return D.imp_e(inst, D.id_(f_name, Lin(a, a)))


def add_body_script(n: str, m: str) -> D.Deriv:
    """``; n:N, m:N ⊢ λf.λx.n f (m f x) : N``."""
    inner = D.lin_i("x", D.lin_e(D.id_("g", STEP), D.lin_e(D.id_("h", STEP), D.id_("x", ALPHA))))
    d = D.par_i(inner)
    d = D.par_e(_iterate_numeral(m, "f2"), "h", d)
    d = D.par_e(_iterate_numeral(n, "f1"), "g", d)
    d = D.cntr(d, "f1", "f2", "f")
    return D.forall_i("a", D.imp_i("f", d))


def add_term() -> T.Term:
    return T.parse_term(r"\n.\m.\f.\x.n f (m f x)")


def add_script() -> D.Deriv:
    return D.lin_i("n", D.lin_i("m", add_body_script("n", "m")))


def succ_term() -> T.Term:
    return T.parse_term(r"\n.\f.\x.f (n f x)")


def succ_script() -> D.Deriv:
    """``⊢ succ : N ⊸ N``."""
    inner = D.lin_i("x", D.lin_e(D.id_("f2", STEP), D.lin_e(D.id_("h", STEP), D.id_("x", ALPHA))))
    d = D.par_i(inner, nonlinear=["f2"])
    d = D.par_e(_iterate_numeral("n", "f1"), "h", d)
    d = D.cntr(d, "f1", "f2", "f")
    return D.lin_i("n", D.forall_i("a", D.imp_i("f", d)))


def mult_term() -> T.Term:
    return T.parse_term(r"\n.\m.m (\k.\f.\x.n f (k f x)) (\f.\x.x)")


def mult_script() -> D.Deriv:
    """``⊢ mult : N ⇒ N ⊸ §N``."""
    step = D.lin_i("k", add_body_script("n", "k"))  # ; n:N ⊢ step : N ⊸ N
    m_inst = D.forall_e(D.id_("m", NAT), NAT)
    iterated = D.imp_e(m_inst, step)  # n:N; m:N ⊢ m step : §(N ⊸ N)
    apply_zero = D.lin_e(D.id_("y", Lin(NAT, NAT)), church_script(0))
    d = D.par_e(iterated, "y", D.par_i(apply_zero))
    return D.imp_i("n", D.lin_i("m", d))


# ---------------------------------------------------------------------------
# coercions


def coercion_context(kind: str, t: T.Term, n: str = "n", m: str = "m") -> T.Term:
    """Instantiate the coercion context ``C1`` or ``C2`` with hole ``t``."""
    zero = church_term(0)
    if kind in ("c1", "C1", 1):
        step = T.Abs("g", T.Abs("p", T.App(T.Var("g"), T.App(succ_term(), T.Var("p")))))
        return T.apply_all(T.Var(m), step, T.Abs(n, t), zero)
    if kind in ("c2", "C2", 2):
        return T.App(T.Abs(n, t), T.apply_all(T.Var(m), succ_term(), zero))
    raise ValueError(f"unknown coercion {kind!r}")


def coerce1(d: D.Deriv, n: str, m: str) -> D.Deriv:
    """From ``n:N; Δ ⊢ t : A`` build ``; m:N, §Δ ⊢ C1[t] : §A``."""
    j = D.check_ndlal(d)
    if set(j.gamma) != {n}:
        raise ValueError("coercion 1 needs n as the only non-linear variable")
    a = j.type
    fun = Imp(NAT, a)
    y = fresh_name("y", set(j.delta) | {m})
    g_app = D.imp_e(D.id_("g", fun), D.lin_e(succ_script(), D.id_("p", NAT)))
    step = D.lin_i("g", D.imp_i("p", g_app))  # ⊢ λg.λp.g (succ p) : (N⇒A) ⊸ (N⇒A)
    iterated = D.imp_e(D.forall_e(D.id_(m, NAT), fun), step)
    body = D.imp_e(D.lin_e(D.id_(y, Lin(fun, fun)), D.imp_i(n, d)), church_script(0))
    out = D.par_e(iterated, y, D.par_i(body))
    for x, b in sorted(j.delta.items()):
        out = D.par_e(D.id_(x, Par(b)), x, out)
    return out


def coerce2(d: D.Deriv, n: str, m: str) -> D.Deriv:
    """From ``Γ; n:§N, Δ ⊢ t : A`` build ``Γ; m:N, Δ ⊢ C2[t] : A``."""
    j = D.check_ndlal(d)
    if not (n in j.delta and j.delta[n] == Par(NAT)):
        raise ValueError("coercion 2 needs n : §N in the linear zone")
    iterated = D.imp_e(D.forall_e(D.id_(m, NAT), NAT), succ_script())
    apply_zero = D.lin_e(D.id_("y", Lin(NAT, NAT)), church_script(0))
    arg = D.par_e(iterated, "y", D.par_i(apply_zero))  # ; m:N ⊢ m succ 0 : §N
    return D.lin_e(D.lin_i(n, d), arg)


def coercion(kind: str, d: D.Deriv, n: str = "n", m: str = "m") -> D.Deriv:
    return coerce1(d, n, m) if kind in ("c1", "C1", 1) else coerce2(d, n, m)


# ---------------------------------------------------------------------------
# squaring and polynomials


def _mult_applied(n1: str, n2: str) -> D.Deriv:
    """``n1:N; n2:N ⊢ mult n1 n2 : §N``."""
    return D.lin_e(D.imp_e(mult_script(), D.id_(n1, NAT)), D.id_(n2, NAT))


def square_script() -> D.Deriv:
    """The squaring derivation: coerc1, coerc2, (§ i), (Cntr), coerc1, (⊸ i)."""
    d = coerce1(_mult_applied("n1", "n2"), "n1", "m1")  # ; m1:N, n2:§N ⊢ : §²N
    d = coerce2(d, "n2", "m2")  # ; m1:N, m2:N ⊢ : §²N
    d = D.par_i(d, nonlinear=["m1", "m2"])  # m1, m2; ⊢ : §³N
    d = D.cntr(d, "m1", "m2", "n")  # n:N; ⊢ : §³N
    d = coerce1(d, "n", "m")  # ; m:N ⊢ : §⁴N
    return D.lin_i("m", d)


@lru_cache(maxsize=None)
def _square_cached():
    return square_script()


def square_term() -> T.Term:
    return D.check_ndlal(_square_cached()).term


def iterated_square_script(k: int) -> D.Deriv:
    """``⊢ u : N ⊸ §^{4k} N`` where ``u`` squares its argument ``k`` times."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        return _square_cached()
    d = D.lin_e(_square_cached(), D.id_("x", NAT))  # ; x:N ⊢ square x : §⁴N
    for j in range(2, k + 1):
        outer = D.lin_e(_square_cached(), D.id_("y", NAT))
        outer = D.lift(outer, 4 * (j - 1) - 1)
        outer = D.par_i(outer)
        d = D.par_e(d, "y", outer)
    return D.lin_i("x", d)


def mult_p_script(p: int) -> D.Deriv:
    """``⊢ mult_p : §^p N ⊸ §^{p+1} N ⊸ §^{p+2} N``."""
    d = coerce1(_mult_applied("n1", "n2"), "n1", "m1")
    d = D.lift(d, p)
    return D.lin_i("m1", D.lin_i("n2", d))


def add_q_script(q: int) -> D.Deriv:
    """``⊢ add_q : §^q N ⊸ §^q N ⊸ §^q N``."""
    d = D.lin_e(D.lin_e(add_script(), D.id_("n1", NAT)), D.id_("n2", NAT))
    d = D.lift(d, q)
    return D.lin_i("n1", D.lin_i("n2", d))


def boxed_numeral_script(n: int, depth: int) -> D.Deriv:
    d = church_script(n)
    for _ in range(depth):
        d = D.par_i(d)
    return d


def polynomial_script(a: int, b: int, k: int) -> D.Deriv:
    """``⊢ t_P : N ⊸ §^{4k+1} N`` for ``P(X) = a X^(2^k) + b``."""
    if k < 1:
        raise ValueError("k must be at least 1")
    p, q = 4 * k - 1, 4 * k + 1
    u_n = D.lin_e(iterated_square_script(k), D.id_("n", NAT))
    prod = D.lin_e(D.lin_e(mult_p_script(p), boxed_numeral_script(a, p)), u_n)
    total = D.lin_e(D.lin_e(add_q_script(q), prod), boxed_numeral_script(b, q))
    return D.lin_i("n", total)


def polynomial(a: int, b: int, k: int) -> NamedProgram:
    cert = polynomial_script(a, b, k)
    term = D.check_ndlal(cert).term
    return NamedProgram(
        f"poly_{a}_{b}_{k}",
        term,
        cert,
        claimed_type=Lin(NAT, pars(NAT, 4 * k + 1)),
        notes=f"P(X) = {a} X^{2**k} + {b}",
        extra={"a": a, "b": b, "k": k},
    )


def arithmetic() -> dict:
    return {
        "add": NamedProgram("add", add_term(), add_script(), claimed_type=Lin(NAT, Lin(NAT, NAT))),
        "mult": NamedProgram("mult", mult_term(), mult_script(), claimed_type=Imp(NAT, Lin(NAT, Par(NAT)))),
        "square": NamedProgram("square", square_term(), _square_cached(), claimed_type=Lin(NAT, pars(NAT, 4))),
    }


def succ() -> NamedProgram:
    return NamedProgram("succ", succ_term(), succ_script(), claimed_type=Lin(NAT, NAT))


# ---------------------------------------------------------------------------
# applied programs (closed terms of numeral type)


def applied(name: str, *args: int) -> NamedProgram:
    """``f n̲1 … n̲k`` for a stdlib function, with its certificate."""
    fn = {"add": add_script, "mult": mult_script, "square": _square_cached, "succ": succ_script}[name]
    d = fn()
    for n in args:
        j = D.check_ndlal(d)
        if isinstance(j.type, Imp):
            d = D.imp_e(d, church_script(n))
        else:
            d = D.lin_e(d, church_script(n))
    j = D.check_ndlal(d)
    label = "_".join([name] + [str(n) for n in args])
    return NamedProgram(label, j.term, d, claimed_type=j.type, extra={"function": name, "args": list(args)})


def applied_polynomial(a: int, b: int, k: int, n: int) -> NamedProgram:
    d = D.lin_e(polynomial_script(a, b, k), church_script(n))
    j = D.check_ndlal(d)
    return NamedProgram(
        f"poly_{a}_{b}_{k}_at_{n}", j.term, d, claimed_type=j.type, extra={"a": a, "b": b, "k": k, "n": n}
    )


# ---------------------------------------------------------------------------
# the duplication counterexample (LAL only)


def counterexample_term(n: int) -> T.Term:
    """``t_n = (λx.y x x)^n z``: n nested applications of the duplicator."""
    if n < 1:
        raise ValueError("n must be at least 1")
    dup = T.Abs("x", T.apply_all(T.Var("y"), T.Var("x"), T.Var("x")))
    t: T.Term = T.Var("z")
    for _ in range(n):
        t = T.App(dup, t)
    return t


def counterexample_normal_form(n: int) -> T.Term:
    u: T.Term = T.Var("z")
    for _ in range(n):
        u = T.apply_all(T.Var("y"), u, u)
    return u


def counterexample_script(n: int) -> D.Deriv:
    """LAL script of ``y : !(!A ⊸ !A ⊸ !A), z : !!A ⊢ t_n : §!A``."""
    a = ALPHA
    banged = Bang(a)
    dup_type = Lin(banged, Lin(banged, banged))
    ys = ["y"] if n == 1 else [f"y{i}" for i in range(1, n + 1)]

    def duplicator(y: str) -> D.Deriv:
        w1 = D.bang_i_lal(D.id_("w1", a))
        w2 = D.bang_i_lal(D.id_("w2", a))
        body = D.lin_e(D.lin_e(D.id_(y, dup_type), w1), w2)
        body = D.cntr(body, "w1", "w2", "w")
        body = D.bang_e_lal(D.id_("x", banged), "w", body)
        return D.lin_i("x", body)

    d = D.id_("z", banged)
    for y in reversed(ys):
        d = D.lin_e(duplicator(y), d)
    d = D.par_i_lal(d, bang=ys + ["z"])
    if n >= 2:
        d = D.cntr_all(d, ys, "y")
    d = D.bang_e_lal(D.id_("y", Bang(dup_type)), "y", d)
    d = D.bang_e_lal(D.id_("z", Bang(banged)), "z", d)
    return d


def counterexample(n: int) -> NamedProgram:
    return NamedProgram(
        f"dup{n}",
        counterexample_term(n),
        counterexample_script(n),
        system="nlal",
        claimed_type=Par(Bang(ALPHA)),
        notes="normal form u_n = y u_{n-1} u_{n-1}; |u_n| = 2|u_{n-1}| + 3 grows like 2^n",
    )
