import random

import pytest
from hypothesis import given, settings

from dlal import derivation as D
from dlal import terms as T
from dlal.formulas import NAT, Arrow, Imp, Lin, Par, TVar, erase_to_simple, parse_type, rename_atoms_canonically, type_alpha_eq
from dlal.infer import (
    PARAM_CAP,
    ResourceLimit,
    abstract_derivation,
    bang_check,
    enumerate_solutions,
    infer,
    infer_report,
    maximal_decoration,
    merge_types,
    principal_simple_type,
    unify_abstract,
)
from dlal.infer.abstract import AArrow, AAtom, ADecorated, ConstraintSet, ONE, ParamSupply, abstract_to_str, satisfies
from dlal.infer.simple import SimpleTypeError
from dlal.randomterms import random_closed_typable
from dlal.stdlib import programs as P

a = TVar("a")
NUM = Imp(Lin(a, a), Par(Lin(a, a)))


def dec(params, body):
    return ADecorated(frozenset(params), body)


def test_principal_type_of_identity():
    ty, _ = principal_simple_type(T.parse_term(r"\x.x"))
    assert ty == Arrow(a, a)


def test_principal_type_of_church_two():
    ty, _ = principal_simple_type(P.church_term(2))
    assert ty == parse_type("(a -> a) -> a -> a")


def test_self_application_is_not_simply_typable():
    with pytest.raises(SimpleTypeError):
        principal_simple_type(T.parse_term(r"\x.x x"))


def test_maximal_decoration_of_atom():
    assert maximal_decoration(a, ParamSupply()) == AAtom("a")


def test_maximal_decoration_of_arrow():
    out = maximal_decoration(Arrow(a, a), ParamSupply())
    assert out == AArrow(dec({"p1"}, AAtom("a")), AAtom("a"))


def test_maximal_decoration_nested_uses_fresh_parameters():
    supply = ParamSupply()
    out = maximal_decoration(Arrow(Arrow(a, a), a), supply)
    inner = AArrow(dec({"p2"}, AAtom("a")), AAtom("a"))
    assert out == AArrow(dec({"p1"}, inner), AAtom("a"))


def test_unify_atoms():
    cs = unify_abstract(dec({"a"}, AAtom("x")), dec({"b"}, AAtom("x")))
    assert not cs.absurd and [(e.lhs, e.rhs) for e in cs.equations] == [(frozenset({"a"}), frozenset({"b"}))]


def test_unify_shape_clash_is_false():
    arrow = AArrow(dec((), AAtom("x")), AAtom("x"))
    assert unify_abstract(dec({"a"}, arrow), dec((), AAtom("x"))).absurd


def test_unify_forces_parameter_to_zero():
    arrow = AArrow(dec((), AAtom("x")), AAtom("x"))
    cs = unify_abstract(dec((), arrow), dec({"a"}, arrow))
    assert enumerate_solutions(cs) == [{"a": 0}]


def test_merge_atoms():
    assert merge_types(dec({"a"}, AAtom("x")), dec({"b"}, AAtom("x"))) == dec({"a", "b"}, AAtom("x"))


def test_merge_undecorated():
    assert merge_types(dec((), AAtom("x")), dec((), AAtom("x"))) == dec((), AAtom("x"))


def test_merge_arrows_is_positionwise():
    left = AArrow(dec({"c"}, AAtom("x")), AAtom("x"))
    right = AArrow(dec({"d"}, AAtom("x")), AAtom("x"))
    out = merge_types(dec({"a"}, left), dec({"b"}, right))
    assert out == dec({"a", "b"}, AArrow(dec({"c", "d"}, AAtom("x")), AAtom("x")))


def test_identity_has_no_constraints():
    ad = abstract_derivation(T.parse_term(r"\x.x"))
    assert ad.constraints.equations == [] and not ad.constraints.absurd


def test_church_two_forces_its_binder_nonlinear():
    ad = abstract_derivation(P.church_term(2))
    p_f = ad.abs_param[ad.table.root.id]
    sols = enumerate_solutions(ad.constraints, ad.params)
    assert sols and all(s[p_f] == 1 for s in sols)


def test_application_with_free_variables():
    env = {"y": a, "z": parse_type("b")}
    ad = abstract_derivation(T.parse_term(r"(\x.y) z"), env)
    assert not ad.constraints.absurd and ad.constraints.equations


def test_enumerate_unconstrained():
    assert enumerate_solutions(ConstraintSet(), ["a"]) == [{"a": 0}, {"a": 1}]


def test_enumerate_forced():
    cs = ConstraintSet()
    cs.add(frozenset({"a"}), ONE)
    assert enumerate_solutions(cs, ["a"]) == [{"a": 1}]


def test_enumerate_absurd():
    cs = ConstraintSet()
    cs.add(frozenset(), ONE)
    assert enumerate_solutions(cs, []) == []


def test_enumeration_cap():
    cs = ConstraintSet()
    params = [f"q{i}" for i in range(PARAM_CAP + 1)]
    with pytest.raises(ResourceLimit):
        enumerate_solutions(cs, params)


def test_church_two_passes_bang_check():
    ad = abstract_derivation(P.church_term(2))
    assert any(bang_check(ad, phi) for phi in enumerate_solutions(ad.constraints, ad.params))


def test_duplication_example_rejected_by_first_condition():
    ad = abstract_derivation(P.counterexample_term(2))
    verdicts = [bang_check(ad, phi) for phi in enumerate_solutions(ad.constraints, ad.params)]
    assert verdicts and not any(verdicts)
    assert all("outside occurrences" in v.reason for v in verdicts)


def test_closed_argument_accepted():
    t = T.parse_term(r"(\f.f (f (\y.y))) (\x.x)")
    ad = abstract_derivation(t)
    assert any(bang_check(ad, phi) for phi in enumerate_solutions(ad.constraints, ad.params))


def test_identity_inference():
    types = [r.type for r in infer(T.parse_term(r"\x.x"))]
    assert Lin(a, a) in types


def test_church_two_inference_finds_numeral_type():
    types = [r.type for r in infer(P.church_term(2))]
    assert any(type_alpha_eq(t, NUM) for t in types)


def test_add_instance_recovered():
    n_a = NUM
    target = Lin(n_a, Lin(n_a, n_a))
    found = infer(P.add_term(), expected=target)
    assert found and type_alpha_eq(found[0].type, target)
    D.check_ndlal(found[0].script)


def test_duplication_example_has_no_typing():
    assert infer(P.counterexample_term(2)) == []
    assert infer(P.counterexample_term(3)) == []


def test_not_simply_typable_reports_error():
    report = infer_report(T.parse_term(r"\x.x x"))
    assert report.results == [] and "not simply typable" in report.error


def test_results_unpack_as_pairs():
    for ty, script in infer(T.parse_term(r"\x.x"), limit=2):
        assert type_alpha_eq(D.check_ndlal(script).type, ty)


def test_result_json_shape():
    (r,) = infer(P.church_term(1), limit=1)
    doc = r.to_json()
    assert set(doc) == {"type", "phi", "levels", "script"}
    assert D.from_json(doc["script"]).rule == r.script.rule


def _sound(t, results, simple):
    for r in results:
        j = D.check_ndlal(r.script)
        assert T.alpha_eq(j.term, t)
        assert type_alpha_eq(j.type, r.type)
        assert not j.gamma and not j.delta
        assert rename_atoms_canonically(erase_to_simple(r.type)) == rename_atoms_canonically(simple)


def test_soundness_on_random_terms():
    rng = random.Random(7)
    for _ in range(1000):
        t = random_closed_typable(rng, 25)
        simple, _ = principal_simple_type(t)
        _sound(t, infer(t, limit=3), simple)


def test_soundness_on_the_stdlib(stdlib):
    # large programs may exceed the parameter cap; that is a declared outcome,
    # anything else must come back checked
    for prog in stdlib.values():
        try:
            results = infer(prog.term, limit=3)
        except ResourceLimit:
            continue
        if results:
            simple, _ = principal_simple_type(prog.term)
            _sound(prog.term, results, simple)


def test_all_ones_is_always_a_solution():
    rng = random.Random(8)
    for _ in range(200):
        t = random_closed_typable(rng, 25)
        ad = abstract_derivation(t)
        assert satisfies(ad.constraints, {p: 1 for p in ad.params}), T.to_str(t)


def test_smaller_solutions_are_listed_first():
    rng = random.Random(9)
    for _ in range(50):
        t = random_closed_typable(rng, 20)
        ad = abstract_derivation(t)
        sols = enumerate_solutions(ad.constraints, ad.params, limit=200)
        for i, later in enumerate(sols):
            for earlier in sols[:i]:
                below = all(later[p] <= earlier[p] for p in later) and later != earlier
                assert not below
        assert all(satisfies(ad.constraints, s) for s in sols)
        assert len({tuple(sorted(s.items())) for s in sols}) == len(sols)


def test_comparable_solutions_are_both_listed():
    ad = abstract_derivation(T.parse_term(r"\f.\x.f x"))
    sols = enumerate_solutions(ad.constraints, ad.params)
    keys = {tuple(sorted(s.items())) for s in sols}
    assert tuple(sorted({p: 1 for p in ad.params}.items())) in keys
    assert tuple(sorted({p: 0 for p in ad.params}.items())) in keys
