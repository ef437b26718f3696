import json

import pytest

from dlal import derivation as D
from dlal import stratify as S
from dlal import terms as T
from dlal.formulas import NAT, WORD, Lin, pars, type_alpha_eq
from dlal.infer import infer
from dlal.stdlib import (
    CORPUS_DIR,
    applied,
    applied_polynomial,
    arithmetic,
    church,
    church_value,
    coercion,
    coercion_context,
    counterexample,
    load_corpus,
    load_program,
    polynomial,
    registry,
    word,
    write_corpus,
)
from dlal.stdlib import programs as P


def _value(t):
    return church_value(T.normal_form(t))


def test_church_zero():
    assert T.alpha_eq(church(0).term, T.parse_term(r"\f.\x.x"))


def test_church_two_certified_at_numeral_type():
    prog = church(2)
    assert T.alpha_eq(prog.term, T.parse_term(r"\f.\x.f (f x)"))
    assert type_alpha_eq(D.check_ndlal(prog.certificate).type, NAT)


def test_church_five_has_five_applications():
    body = church(5).term.body.body
    count = 0
    while isinstance(body, T.App):
        assert body.fun == T.Var("f")
        body, count = body.arg, count + 1
    assert count == 5 and body == T.Var("x")


def test_church_value_decodes_only_numerals():
    assert [church_value(church(n).term) for n in range(6)] == list(range(6))
    assert church_value(T.parse_term(r"\f.\x.x f")) is None


def test_arithmetic_terms_as_printed():
    progs = arithmetic()
    assert T.alpha_eq(progs["add"].term, T.parse_term(r"\n.\m.\f.\x.n f (m f x)"))
    want = {"add": Lin(NAT, Lin(NAT, NAT)), "mult": P.Imp(NAT, Lin(NAT, P.Par(NAT))), "square": Lin(NAT, pars(NAT, 4))}
    for name, ty in want.items():
        assert type_alpha_eq(D.check_ndlal(progs[name].certificate).type, ty), name


@pytest.mark.parametrize("name, args, value", [("add", (2, 3), 5), ("mult", (2, 3), 6), ("square", (3,), 9), ("succ", (3,), 4)])
def test_applied_arithmetic(name, args, value):
    prog = applied(name, *args)
    assert _value(prog.term) == value
    D.check_ndlal(prog.certificate)


def test_square_rule_sequence():
    # the last rules, read from the root, follow the displayed derivation
    d = arithmetic()["square"].certificate
    assert d.rule == "LinI"
    assert any(n.rule == "Cntr" for _, n in D.iter_nodes(d))
    assert D.deriv_depth(d) == 5


@pytest.mark.parametrize("a, b, n, value", [(2, 3, 4, 35), (0, 7, 5, 7), (1, 1, 2, 5)])
def test_polynomial_values(a, b, n, value):
    prog = applied_polynomial(a, b, 1, n)
    assert _value(prog.term) == value


@pytest.mark.parametrize("k", range(5))
def test_polynomial_one_zero_squares(k):
    assert _value(applied_polynomial(1, 0, 1, k).term) == k * k


def test_polynomial_type():
    for k in (1, 2):
        prog = polynomial(1, 1, k)
        assert type_alpha_eq(D.check_ndlal(prog.certificate).type, Lin(NAT, pars(NAT, 4 * k + 1)))


def test_polynomial_k_two_computes_fourth_power():
    d = D.lin_e(P.polynomial_script(1, 1, 2), P.church_script(2))
    assert _value(D.check_ndlal(d).term) == 17


def _coerced(kind, t, k):
    ctx = coercion_context(kind, t)
    return T.normal_form(T.substitute(ctx, "m", church(k).term))


HOLES = {
    "n": T.Var("n"),
    "succ n": T.App(P.succ_term(), T.Var("n")),
    "add n 1": T.apply_all(P.add_term(), T.Var("n"), church(1).term),
}


@pytest.mark.parametrize("kind", ["c1", "c2"])
@pytest.mark.parametrize("hole", sorted(HOLES))
def test_coercions_are_extensionally_transparent(kind, hole):
    t = HOLES[hole]
    for k in range(6):
        want = T.normal_form(T.substitute(t, "n", church(k).term))
        assert T.alpha_eq(_coerced(kind, t, k), want), (kind, hole, k)


def test_first_coercion_of_variable_is_identity_on_numerals():
    for k in range(6):
        assert church_value(_coerced("c1", T.Var("n"), k)) == k


def test_coercion_certificates():
    inner = P._mult_applied("n1", "n2")  # n1:N; n2:N ⊢ mult n1 n2 : §N
    t = D.check_ndlal(inner).term
    first = coercion("c1", inner, "n1", "m1")
    j1 = D.check_ndlal(first)
    assert j1.gamma == {} and j1.delta == {"m1": NAT, "n2": P.Par(NAT)}
    assert j1.type == pars(NAT, 2)
    assert T.alpha_eq(j1.term, coercion_context("c1", t, "n1", "m1"))
    second = coercion("c2", first, "n2", "m2")
    j2 = D.check_ndlal(second)
    assert j2.delta == {"m1": NAT, "m2": NAT} and j2.type == pars(NAT, 2)
    assert T.alpha_eq(j2.term, coercion_context("c2", j1.term, "n2", "m2"))


def test_coercions_reject_wrong_contexts():
    with pytest.raises(ValueError):
        coercion("c1", D.id_("n", NAT))
    with pytest.raises(ValueError):
        coercion("c2", D.id_("n", NAT))


def test_mult_p_and_add_q_types():
    for p in range(4):
        got = D.check_ndlal(P.mult_p_script(p)).type
        assert type_alpha_eq(got, Lin(pars(NAT, p), Lin(pars(NAT, p + 1), pars(NAT, p + 2))))
    for q in range(4):
        got = D.check_ndlal(P.add_q_script(q)).type
        assert type_alpha_eq(got, Lin(pars(NAT, q), Lin(pars(NAT, q), pars(NAT, q))))


def test_word_certified_at_word_type():
    prog = word("101")
    assert type_alpha_eq(D.check_ndlal(prog.certificate).type, WORD)
    assert T.alpha_eq(prog.term, T.parse_term(r"\s0.\s1.\x.s1 (s0 (s1 x))"))


@pytest.mark.parametrize("n, size", [(1, 5), (2, 13), (3, 29)])
def test_counterexample_normal_form_sizes(n, size):
    prog = counterexample(n)
    nf = T.normal_form(prog.term)
    assert T.term_size(nf) == size
    assert T.alpha_eq(nf, P.counterexample_normal_form(n))


def test_counterexample_is_lal_only():
    prog = counterexample(2)
    assert prog.system == "nlal"
    D.check_nlal(prog.certificate)
    with pytest.raises(D.DerivationError):
        D.check_ndlal(prog.certificate)
    assert infer(prog.term) == []


def test_every_certificate_checks_with_matching_subject(stdlib):
    for prog in stdlib.values():
        check = D.check_nlal if prog.system == "nlal" else D.check_ndlal
        assert T.alpha_eq(check(prog.certificate).term, prog.term), prog.name


def test_stratified_normalization_agrees(dlal_programs):
    for prog in dlal_programs.values():
        trace = S.normalize_levels(S.decorate(prog.certificate))
        assert T.alpha_eq(S.erase(trace.final), T.normal_form(prog.term)), prog.name


def test_shipped_corpus_matches_registry():
    shipped = load_corpus()
    built = registry()
    assert sorted(shipped) == sorted(built)
    for name, prog in built.items():
        assert T.alpha_eq(shipped[name].term, prog.term)
        assert D.to_json(shipped[name].certificate) == D.to_json(prog.certificate)
        assert shipped[name].system == prog.system


def test_corpus_round_trip(tmp_path):
    progs = {n: p for n, p in registry().items() if n in ("church2", "add", "dup2")}
    write_corpus(tmp_path, progs)
    back = load_corpus(tmp_path)
    assert sorted(back) == sorted(progs)
    doc = json.loads((tmp_path / "add.cert.json").read_text())
    assert doc["claimed_type"] and doc["certificate"]["rule"]


def test_corpus_without_certificate(tmp_path):
    (tmp_path / "k.lam").write_text(r"\x.\y.x" + "\n")
    prog = load_program("k", tmp_path)
    assert prog.certificate is None


def test_missing_program_and_directory(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_program("nope", CORPUS_DIR)
    with pytest.raises(FileNotFoundError):
        load_corpus(tmp_path / "absent")
