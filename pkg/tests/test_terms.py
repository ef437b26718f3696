import pytest
from hypothesis import given
from hypothesis import strategies as st

from dlal import terms as T
from dlal.stdlib import programs as P
from dlal.syntax import ParseError

from conftest import terms


def test_parse_identity():
    assert T.parse_term(r"\x.x") == T.Abs("x", T.Var("x"))


def test_parse_church_two():
    assert T.parse_term(r"\f.\x.f (f x)") == P.church_term(2)


def test_application_is_left_associative():
    t = T.parse_term("a b c")
    assert t == T.App(T.App(T.Var("a"), T.Var("b")), T.Var("c"))


def test_parse_error_reports_position():
    with pytest.raises(ParseError) as err:
        T.parse_term("\\x.")
    assert err.value.position == 3


@pytest.mark.parametrize("text,size", [("x", 1), (r"\x.x", 2), (r"\f.\x.f (f x)", 7)])
def test_term_size(text, size):
    assert T.term_size(T.parse_term(text)) == size


@pytest.mark.parametrize("x,text,count", [("x", r"\y.x x", 2), ("x", r"\x.x", 0), ("f", "f (f x)", 2)])
def test_free_occurrences(x, text, count):
    assert T.free_occurrences(x, T.parse_term(text)) == count


def test_substitute_variable():
    assert T.substitute(T.Var("x"), "x", T.Var("y")) == T.Var("y")


def test_substitute_avoids_capture():
    out = T.substitute(T.parse_term(r"\y.x"), "x", T.Var("y"))
    assert isinstance(out, T.Abs) and out.var != "y"
    assert out.body == T.Var("y")


def test_substitute_leaves_bound_occurrences():
    t = T.parse_term(r"\x.x")
    assert T.substitute(t, "x", T.Var("y")) == t


def test_one_step_identity_redex():
    trace = T.normalize(T.parse_term(r"(\x.x) y"))
    assert trace.final == T.Var("y") and trace.count == 1


def test_add_two_three_decodes_to_five():
    t = T.apply_all(P.add_term(), P.church_term(2), P.church_term(3))
    assert P.church_value(T.normal_form(t)) == 5


def test_counterexample_three_normal_form_size():
    assert T.term_size(T.normal_form(P.counterexample_term(3))) == 29


def test_fuel_exhaustion_is_reported():
    omega = T.parse_term(r"(\x.x x) (\x.x x)")
    trace = T.normalize(omega, fuel=5)
    assert trace.exhausted and trace.count == 5


def test_zero_fuel_rejected():
    with pytest.raises(ValueError):
        T.normalize(T.Var("x"), fuel=0)


def test_trace_json_round_trip():
    t = T.apply_all(P.add_term(), P.church_term(1), P.church_term(1))
    trace = T.normalize(t, "ri")
    back = T.ReductionTrace.from_json(trace.to_json())
    assert T.alpha_eq(back.replay(), trace.final)


@given(terms())
def test_print_parse_round_trip(t):
    assert T.alpha_eq(T.parse_term(T.to_str(t)), t)


@given(terms(), st.sampled_from(["x", "y", "z"]), terms(6))
def test_substituted_variable_disappears(t, x, u):
    if x in u.fv:
        return
    assert T.free_occurrences(x, T.substitute(t, x, u)) == 0


@given(terms())
def test_alpha_equivalence_is_invariant_under_canonical_renaming(t):
    assert T.alpha_eq(t, T.canonical(t))


@given(terms(8), st.sampled_from(["lo", "ri", "random:3"]))
def test_trace_replay_reaches_final(t, strategy):
    trace = T.normalize(t, strategy, fuel=40)
    assert T.alpha_eq(trace.replay(), trace.final)
    current = trace.initial
    for step in trace.steps:
        current = T.beta_step(current, step.path)
        assert current.size == step.size


def test_strategies_agree_on_stdlib(stdlib):
    for name, prog in stdlib.items():
        finals = [T.normal_form(prog.term, s) for s in ("lo", "ri", "random:1")]
        assert all(T.alpha_eq(finals[0], f) for f in finals[1:]), name
