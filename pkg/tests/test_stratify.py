import random

import pytest

from dlal import derivation as D
from dlal import stratify as S
from dlal import terms as T
from dlal.formulas import TVar
from dlal.randomterms import random_certified
from dlal.stdlib import programs as P

a = TVar("a")


def test_axiom_decorates_to_variable():
    st = S.decorate(D.id_("x", a))
    assert st == S.SVar("x") and S.strat_depth(st) == 0


def test_church_two_decoration():
    st = S.decorate(P.church_script(2))
    assert S.strat_to_str(st) == r"\^0!f.\^1x.f (f x)"


def test_square_decoration_depth_and_erasure():
    script = P.square_script()
    st = S.decorate(script)
    assert T.alpha_eq(S.erase(st), P.square_term())
    # a box that holds no abstraction leaves no trace in the term
    assert S.strat_depth(st) <= D.deriv_depth(script)


def test_decoration_depth_never_exceeds_script_depth(dlal_programs):
    for prog in dlal_programs.values():
        st = S.decorate(prog.certificate)
        assert S.strat_depth(st) <= D.deriv_depth(prog.certificate), prog.name
        assert T.alpha_eq(S.erase(st), prog.term), prog.name


def test_reduce_level_fires_one_redex():
    t = S.SApp(S.SAbs("x", S.SVar("x"), 0), S.SVar("y"))
    assert S.reduce_level(t, 0) == (S.SVar("y"), 1)


def test_reduce_level_without_redex_is_identity():
    t = S.SApp(S.SAbs("x", S.SVar("x"), 1), S.SVar("y"))
    assert S.reduce_level(t, 0) == (t, 0)


def test_add_level_zero_is_bounded():
    st = S.decorate(P.applied("add", 2, 3).certificate)
    out, steps = S.reduce_level(st, 0)
    assert 0 < steps <= st.size
    assert not S.redexes_at(out, lambda e: e == 0)


def test_church_two_is_already_normal():
    trace = S.normalize_levels(S.decorate(P.church_script(2)))
    assert trace.total_steps == 0


def test_square_three_normalizes_to_nine():
    trace = S.normalize_levels(S.decorate(P.applied("square", 3).certificate), scan=True)
    assert P.church_value(S.erase(trace.final)) == 9


def test_add_two_three_trace_bound():
    trace = S.normalize_levels(S.decorate(P.applied("add", 2, 3).certificate))
    assert P.church_value(S.erase(trace.final)) == 5
    assert trace.bound.admits(trace.size_sum)
    assert [r.level for r in trace.records] == list(range(trace.depth + 1))


def test_clean_numeral_has_no_forbidden_shape():
    assert S.scan_forbidden_patterns(S.decorate(P.church_script(2))) == []


def test_inverted_application_is_flagged():
    t = S.SApp(S.SAbs("x", S.SVar("x"), 1), S.SAbs("y", S.SVar("y"), 0))
    (hit,) = S.scan_forbidden_patterns(t)
    assert hit.kind == "application" and (hit.outer, hit.inner) == (1, 0)


def test_inverted_nesting_is_flagged():
    t = S.SAbs("x", S.SAbs("y", S.SVar("y"), 0), 2, True)
    assert S.scan_forbidden_patterns(t)[0].kind == "nesting"


def test_duplicating_linear_redex_is_caught():
    dup = S.SAbs("x", S.SApp(S.SVar("x"), S.SVar("x")), 0)
    with pytest.raises(S.InvariantViolation):
        S.reduce_level(S.SApp(dup, S.SVar("y")), 0)


def test_level_trace_csv_columns():
    trace = S.normalize_levels(S.decorate(P.applied("succ", 1).certificate))
    lines = trace.to_csv().splitlines()
    assert lines[0] == "level,entry_size,steps,exit_size"
    assert len(lines) == len(trace.records) + 1


def test_stdlib_levels_match_plain_normal_forms(dlal_programs):
    for prog in dlal_programs.values():
        trace = S.normalize_levels(S.decorate(prog.certificate), scan=True, shadow=True)
        assert T.alpha_eq(S.erase(trace.final), T.normal_form(prog.term)), prog.name


def test_shadow_replay_on_random_certified_terms():
    rng = random.Random(11)
    for item in random_certified(rng, 60):
        trace = S.normalize_levels(S.decorate(item.script), shadow=True)
        assert T.alpha_eq(S.erase(trace.final), T.normal_form(item.term))


def test_shadow_level_records_nonlinear_substitutions():
    # (λ^0! x. x x) y : the copy is recorded, and its expansion is y y
    t = S.SApp(S.SAbs("x", S.SApp(S.SVar("x"), S.SVar("x")), 0, True), S.SVar("y"))
    out, steps = S.shadow_level(t, 0)
    assert steps == 1 and T.to_str(S.erase(out)) == "y y"
