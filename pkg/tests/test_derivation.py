import json

import pytest

from dlal import derivation as D
from dlal import terms as T
from dlal.formulas import NAT, Bang, Discharged, Imp, Lin, Par, TVar, parse_type, pars, star_translate, type_alpha_eq
from dlal.stdlib import programs as P

a = TVar("a")


def test_identity_judgement():
    j = D.check_ndlal(D.id_("x", a))
    assert j.gamma == {} and j.delta == {"x": a} and j.term == T.Var("x")


def test_square_certificate_type():
    j = D.check_ndlal(P.square_script())
    assert not j.gamma and not j.delta
    assert type_alpha_eq(j.type, Lin(NAT, pars(NAT, 4)))
    assert T.alpha_eq(j.term, P.square_term())


def test_linear_abstraction_of_discharged_variable_rejected():
    boxed = D.par_i(D.id_("x", a))  # ; x:[a] ⊢ x : §a
    with pytest.raises(D.DerivationError, match="LinI"):
        D.check_ndlal(D.lin_i("x", boxed))


def test_nonlinear_abstraction_of_discharged_variable_rejected():
    boxed = D.par_i(D.id_("x", a))
    with pytest.raises(D.DerivationError):
        D.check_ndlal(D.imp_i("x", boxed))


def test_contraction_only_on_nonlinear_zone():
    d = D.lin_e(D.lin_e(D.id_("y", Lin(a, Lin(a, a))), D.id_("x1", a)), D.id_("x2", a))
    with pytest.raises(D.DerivationError, match="non-linear zone"):
        D.check_ndlal(D.cntr(d, "x1", "x2", "x"))


def test_shared_linear_variable_rejected():
    d = D.lin_e(D.id_("f", Lin(a, a)), D.id_("f", a))
    with pytest.raises(D.DerivationError, match="both premises"):
        D.check_ndlal(d)


def test_eigenvariable_condition():
    with pytest.raises(D.DerivationError, match="eigenvariable"):
        D.check_ndlal(D.forall_i("a", D.id_("x", a)))


def test_bang_elimination_argument_with_two_variables_rejected():
    f = D.imp_i("y", D.weak(D.id_("z", a), "y", a, "nonlinear"))
    arg = D.lin_e(D.id_("g", Lin(a, a)), D.id_("x", a))
    with pytest.raises(D.DerivationError, match="at most one"):
        D.check_ndlal(D.imp_e(f, arg))


def test_bang_elimination_moves_argument_variable_to_nonlinear_zone():
    g = D.imp_i("y", D.par_i(D.id_("y", a), nonlinear=["y"]))
    j = D.check_ndlal(D.imp_e(g, D.id_("x", a)))
    assert j.gamma == {"x": a} and j.type == Par(a)


def test_error_names_the_offending_node():
    bad = D.lin_e(D.id_("f", a), D.id_("x", a))
    with pytest.raises(D.DerivationError) as err:
        D.check_ndlal(D.lin_i("x", bad))
    assert err.value.path == (0,) and err.value.rule == "LinE"


def test_lal_identity():
    j = D.check_nlal(D.id_("x", a))
    assert j.delta == {"x": a}


def test_counterexample_lal_certificate():
    j = D.check_nlal(P.counterexample_script(2))
    A = a
    assert type_alpha_eq(j.type, Par(Bang(A)))
    assert set(j.delta) == {"y", "z"}
    # the duplicator consumes banged arguments, so y carries !(!A ⊸ !A ⊸ !A)
    assert type_alpha_eq(j.delta["y"], Bang(Lin(Bang(A), Lin(Bang(A), Bang(A)))))
    assert type_alpha_eq(j.delta["z"], Bang(Bang(A)))
    assert T.alpha_eq(j.term, P.counterexample_term(2))


def test_lal_bang_intro_needs_single_variable():
    d = D.lin_e(D.id_("g", Lin(a, a)), D.id_("x", a))
    with pytest.raises(D.DerivationError, match="more than one"):
        D.check_nlal(D.bang_i_lal(d))


def test_depth_of_axiom():
    assert D.deriv_depth(D.id_("x", a)) == 0


def test_depth_of_church_two():
    assert D.deriv_depth(P.church_script(2)) == 1


def test_depth_of_square():
    # counted by hand on the transcription: a coercion box, the two boxes
    # around the squaring multiplication and two levels inside the numerals
    assert D.deriv_depth(P.square_script()) == 5


def test_translate_axiom():
    s = D.translate_to_lal(D.id_("x", a))
    assert D.check_nlal(s).type == a


def test_translate_church_two():
    j = D.check_nlal(D.translate_to_lal(P.church_script(2)))
    assert type_alpha_eq(j.type, star_translate(NAT))


def test_translate_square():
    j = D.check_nlal(D.translate_to_lal(P.square_script()))
    assert type_alpha_eq(j.type, star_translate(Lin(NAT, pars(NAT, 4))))
    assert T.alpha_eq(j.term, P.square_term())


def test_translation_marks_nonlinear_zone_with_bang():
    g = D.imp_i("y", D.par_i(D.id_("y", a), nonlinear=["y"]))
    open_script = D.imp_e(g, D.id_("x", a))
    j = D.check_nlal(D.translate_to_lal(open_script))
    assert j.delta == {"x": Discharged(a, "!")}


def test_json_round_trip(dlal_programs):
    for prog in dlal_programs.values():
        text = D.dumps(prog.certificate)
        back = D.loads(text)
        assert D.to_json(back) == json.loads(text)
        assert str(D.check_ndlal(back)) == str(D.check_ndlal(prog.certificate))


def test_json_field_names():
    doc = D.to_json(D.cntr(D.weak(D.weak(D.id_("z", a), "x1", a, "nonlinear"), "x2", a, "nonlinear"), "x1", "x2", "x"))
    assert doc["rule"] == "Cntr" and doc["params"]["merged"] == ["x1", "x2", "x"]
    assert doc["premises"][0]["params"]["type"] == "a"


def test_proposition_five_on_stdlib(dlal_programs):
    for prog in dlal_programs.values():
        j = D.check_ndlal(prog.certificate)
        assert T.term_size(j.term) <= D.node_count(prog.certificate), prog.name


def test_final_judgement_rejects_discharged():
    with pytest.raises(D.DerivationError, match="final"):
        D.check_final_ndlal(D.par_i(D.id_("x", a)))
