import random

import pytest

from dlal import derivation as D
from dlal import terms as T
from dlal.formulas import Discharged, Forall, Lin, Par, TVar, type_alpha_eq
from dlal.randomterms import random_certified
from dlal.rewrite import (
    RewriteError,
    abstraction_property_violations,
    is_vs_normal,
    linear_use_violations,
    normality_violations,
    reduce_script,
    subst_into_derivation,
    subst_linear,
    subst_nonlinear,
    subst_par,
    subst_type,
    vs_normalize,
)
from dlal.stdlib import programs as P

a, b = TVar("a"), TVar("b")


def _same_judgement(x, y):
    jx, jy = D.check_ndlal(x), D.check_ndlal(y)
    assert D.judgement_alpha_eq(jx, jy)


def test_type_substitution_by_itself_changes_nothing():
    d = P.church(2).certificate
    assert D.to_json(subst_type(d, "a", a)) == D.to_json(d)


def test_type_substitution_instantiates_free_variable():
    d = D.lin_i("x", D.id_("x", a))
    out = subst_type(d, "a", Lin(b, b))
    assert D.check_ndlal(out).type == Lin(Lin(b, b), Lin(b, b))


def test_type_substitution_avoids_capture_under_forall():
    d = D.weak(D.forall_i("b", D.lin_i("x", D.id_("x", b))), "y", a)
    out = subst_type(d, "a", b)
    j = D.check_ndlal(out)
    assert j.delta["y"] == b
    assert isinstance(j.type, Forall) and j.type.var != "b"


def test_linear_substitution_of_variable_into_variable():
    out = subst_linear(D.id_("y", a), D.id_("x", a), "x")
    j = D.check_ndlal(out)
    assert j.term == T.Var("y") and j.delta == {"y": a}


def test_linear_substitution_respects_node_bound():
    d_u = D.lin_i("z", D.id_("z", a))
    d_t = D.lin_e(D.id_("f", Lin(a, a)), D.id_("x", a))
    out = subst_linear(d_u, d_t, "f")
    j = D.check_ndlal(out)
    assert T.alpha_eq(j.term, T.parse_term(r"(\z.z) x"))
    assert D.node_count(out) <= D.node_count(d_u) + D.node_count(d_t)


def test_linear_substitution_renames_binders_that_would_capture():
    d_t = D.lin_i("y", D.weak(D.id_("y", a), "x", a))  # ; x:a ⊢ λy.y : a ⊸ a
    out = subst_linear(D.id_("y", a), d_t, "x")
    j = D.check_ndlal(out)
    assert "y" in j.delta and T.alpha_eq(j.term, T.parse_term(r"\w.w"))


def test_linear_substitution_into_weakening():
    d_t = D.weak(D.id_("w", b), "x", a)
    d_u = D.lin_e(D.id_("g", Lin(b, a)), D.id_("v", b))
    j = D.check_ndlal(subst_linear(d_u, d_t, "x"))
    assert set(j.delta) == {"w", "g", "v"} and j.term == T.Var("w")


def test_linear_substitution_rejects_type_mismatch():
    with pytest.raises(RewriteError):
        subst_linear(D.id_("y", b), D.id_("x", a), "x")


def test_paragraph_clause_through_paragraph_introduction():
    # Γ2; x:[a]§ ⊢ x : §a  with  ; y:a ⊢ y : a  gives  ; y:[a]§ ⊢ y : §a
    d_t = D.par_i(D.id_("x", a))
    out = subst_par(D.id_("y", a), d_t, "x")
    j = D.check_ndlal(out)
    assert j.delta == {"y": Discharged(a)} and j.type == Par(a)


def test_paragraph_clause_moves_chosen_entries_to_nonlinear_context():
    d_t = D.par_i(D.lin_e(D.id_("x", Lin(a, a)), D.id_("w", a)))
    d_u = D.lin_e(D.id_("g", Lin(a, Lin(a, a))), D.id_("h", a))
    out = subst_par(d_u, d_t, "x", nonlinear=["g"])
    j = D.check_ndlal(out)
    assert j.gamma == {"g": Lin(a, Lin(a, a))}
    assert j.delta == {"h": Discharged(a), "w": Discharged(a)}
    assert T.alpha_eq(j.term, T.parse_term("g h w"))
    assert D.node_count(out) <= D.node_count(d_u) + D.node_count(d_t)


def test_paragraph_clause_rejects_linear_target():
    with pytest.raises(RewriteError):
        subst_par(D.id_("y", a), D.id_("x", a), "x")


def test_nonlinear_clause_contracts_copies():
    church2 = P.church(2).certificate
    d_t = church2.premises[0].premises[0]  # drop (∀ i) and (⇒ i): f:a⊸a; ⊢ §(λx.f (f x))
    j_t = D.check_ndlal(d_t)
    (f,) = j_t.gamma
    d_u = D.lin_i("q", D.lin_e(D.id_("k", Lin(a, a)), D.id_("q", a)))
    out = subst_nonlinear(d_u, d_t, [f])
    j = D.check_ndlal(out)
    assert j.gamma == {"k": Lin(a, a)}
    assert T.alpha_eq(j.term, T.substitute(j_t.term, f, T.parse_term(r"\q.k q")))


def test_nonlinear_clause_with_closed_argument():
    church2 = P.church(2).certificate
    d_t = church2.premises[0].premises[0]
    (f,) = D.check_ndlal(d_t).gamma
    out = subst_nonlinear(D.lin_i("q", D.id_("q", a)), d_t, [f])
    j = D.check_ndlal(out)
    assert not j.gamma and not j.delta


def test_dispatch_by_kind():
    out = subst_into_derivation("linear-term", D.id_("y", a), D.id_("x", a), "x")
    assert D.check_ndlal(out).term == T.Var("y")
    with pytest.raises(RewriteError):
        subst_into_derivation("nonsense")


def test_forall_introduction_then_elimination_collapses():
    d = D.forall_e(D.forall_i("a", D.lin_i("x", D.id_("x", a))), Lin(b, b))
    assert normality_violations(d)
    out = vs_normalize(d)
    _same_judgement(out, d)
    assert out.rule == "LinI" and is_vs_normal(out)


def test_paragraph_introduction_then_elimination_collapses():
    major = D.par_i(D.id_("y", a))
    minor = D.par_i(D.lin_e(D.id_("g", Lin(a, b)), D.id_("x", a)))
    d = D.par_e(major, "x", minor)
    assert not is_vs_normal(d)
    out = vs_normalize(d)
    _same_judgement(out, d)
    assert is_vs_normal(out)
    assert D.node_count(out) < D.node_count(d)


def test_weakening_major_premise_is_permuted():
    f = D.weak(D.id_("f", Lin(a, a)), "w", b)
    d = D.lin_e(f, D.id_("x", a))
    out = vs_normalize(d)
    _same_judgement(out, d)
    assert out.rule == "Weak" and is_vs_normal(out)


def test_permutation_renames_on_clash():
    # the weakened name w is also bound in the argument's script
    f = D.weak(D.id_("f", Lin(Lin(a, a), a)), "w", b)
    arg = D.lin_i("w", D.id_("w", a))
    d = D.lin_e(f, arg)
    out = vs_normalize(d)
    _same_judgement(out, d)


def test_normal_script_unchanged(stdlib):
    for prog in stdlib.values():
        if prog.system != "ndlal" or prog.certificate is None:
            continue
        d = prog.certificate
        assert is_vs_normal(d)
        assert D.to_json(vs_normalize(d)) == D.to_json(d)


def test_normalization_is_idempotent_on_random_scripts():
    rng = random.Random(21)
    for c in random_certified(rng, 60):
        once = vs_normalize(c.script)
        _same_judgement(once, c.script)
        assert is_vs_normal(once)
        assert D.to_json(vs_normalize(once)) == D.to_json(once)


def _reduce_everywhere(d):
    j = D.check_ndlal(d)
    count = 0
    for path in T.redex_paths(j.term):
        out = reduce_script(d, path)
        k = D.check_ndlal(out)
        assert T.alpha_eq(k.term, T.beta_step(j.term, path))
        assert type_alpha_eq(k.type, j.type)
        assert k.gamma.keys() == j.gamma.keys() and k.delta.keys() == j.delta.keys()
        count += 1
    return count


def test_subject_reduction_on_every_redex_of_the_stdlib(dlal_programs):
    total = sum(_reduce_everywhere(p.certificate) for p in dlal_programs.values())
    assert total > 0


@pytest.mark.parametrize("name, args", [("add", (2, 3)), ("square", (3,)), ("succ", (3,))])
def test_subject_reduction_along_whole_reductions(name, args):
    d = P.applied(name, *args).certificate
    start = D.check_ndlal(d)
    steps = 0
    while True:
        j = D.check_ndlal(d)
        assert type_alpha_eq(j.type, start.type)
        path = T.leftmost_outermost(j.term)
        if path is None:
            break
        d = reduce_script(d, path)
        steps += 1
    assert T.alpha_eq(j.term, T.normal_form(start.term))
    assert steps > 0


def test_subject_reduction_on_random_scripts():
    rng = random.Random(22)
    total = 0
    for c in random_certified(rng, 80):
        total += _reduce_everywhere(c.script)
    assert total > 10


def test_reduce_rejects_non_redex():
    with pytest.raises((RewriteError, ValueError)):
        reduce_script(P.church(1).certificate, ())


def test_linear_variables_occur_at_most_once(dlal_programs):
    for p in dlal_programs.values():
        assert linear_use_violations(p.certificate) == []
    rng = random.Random(23)
    for c in random_certified(rng, 60):
        assert linear_use_violations(c.script) == []


def test_abstraction_property_on_normal_scripts(dlal_programs):
    for p in dlal_programs.values():
        assert abstraction_property_violations(vs_normalize(p.certificate)) == []
    rng = random.Random(24)
    for c in random_certified(rng, 60):
        assert abstraction_property_violations(vs_normalize(c.script)) == []
