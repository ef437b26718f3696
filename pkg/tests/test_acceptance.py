"""The ten acceptance criteria, one test each.

Every test records a single PASS/FAIL line through :func:`report` before it
asserts, so a failing criterion still says what it measured.  The lines are
printed immediately (visible with ``pytest -s``) and again, all together, in
the terminal summary that ``conftest.py`` adds to every run.  Running this
file directly with ``python tests/test_acceptance.py`` executes the ten
checks without pytest.
"""

import random
import time

from dlal import derivation as D
from dlal import lla
from dlal import stratify as S
from dlal import terms as T
from dlal.bounds import TowerBound
from dlal.formulas import NAT, erase_to_simple, Imp, Lin, Par, TVar, pars, type_alpha_eq
from dlal.infer import infer
from dlal.randomterms import random_certified
from dlal.stdlib import applied, applied_polynomial, church, church_value, coercion_context, registry
from dlal.stdlib import programs as P

RESULTS = {}


def report(number, title, ok, detail):
    line = f"CRITERION {number:>2} {'PASS' if ok else 'FAIL'}  {title}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def _dlal_programs():
    return {n: p for n, p in registry().items() if p.system == "ndlal" and p.certificate is not None}


def test_criterion_01_certificates():
    start = time.perf_counter()
    bad = []
    for name, prog in registry().items():
        check = D.check_nlal if prog.system == "nlal" else D.check_ndlal
        try:
            j = check(prog.certificate)
            if not T.alpha_eq(j.term, prog.term):
                bad.append(f"{name}: subject differs")
        except D.DerivationError as e:
            bad.append(f"{name}: {e}")
    square = D.check_ndlal(P.square_script())
    square_ok = not square.gamma and not square.delta and square.type == Lin(NAT, pars(NAT, 4))
    elapsed = time.perf_counter() - start
    ok = not bad and square_ok and elapsed < 1.0
    detail = f"{len(registry())} certificates, {len(bad)} rejected, square at N -o $^4 N: {square_ok}, {elapsed:.2f}s"
    assert report(1, "certificate suite", ok, detail), bad


STRATEGIES = ("lo", "ri", "random:11")


def test_criterion_02_arithmetic():
    start = time.perf_counter()
    cases = []
    for m in range(7):
        for n in range(7):
            cases.append((applied("add", m, n).term, m + n))
            cases.append((applied("mult", m, n).term, m * n))
        cases.append((applied("square", m).term, m * m))
        cases.append((applied_polynomial(2, 3, 1, m).term, 2 * m * m + 3))
        cases.append((applied_polynomial(1, 1, 1, m).term, m * m + 1))
    wrong = []
    for term, want in cases:
        for s in STRATEGIES:
            got = church_value(T.normalize(term, s, 10**6).final)
            if got != want:
                wrong.append((T.to_str(term)[:40], s, got, want))
    elapsed = time.perf_counter() - start
    ok = not wrong and elapsed < 5.0
    detail = f"{len(cases)} programs x {len(STRATEGIES)} strategies, {len(wrong)} wrong, {elapsed:.2f}s"
    assert report(2, "arithmetic oracle", ok, detail), wrong[:5]


def test_criterion_03_coercions():
    bodies = {
        "n": T.Var("n"),
        "succ n": T.App(P.succ_term(), T.Var("n")),
        "add n 1": T.apply_all(P.add_term(), T.Var("n"), church(1).term),
    }
    wrong = []
    for kind in ("c1", "c2"):
        for label, body in bodies.items():
            for k in range(6):
                numeral = church(k).term
                got = T.normal_form(T.substitute(coercion_context(kind, body), "m", numeral))
                want = T.normal_form(T.substitute(body, "n", numeral))
                if not T.alpha_eq(got, want):
                    wrong.append((kind, label, k))
    detail = f"2 coercions x {len(bodies)} bodies x 6 numerals, {len(wrong)} mismatches"
    assert report(3, "coercion identity", not wrong, detail), wrong


def level_violations(t):
    """Recompute the level-by-level bounds from scratch; returns a list of messages."""
    out = []
    depth = S.strat_depth(t)
    bound = TowerBound(t.size, depth)
    total = 0
    cur = t
    for d in range(depth + 1):
        entry = cur.size
        total += entry
        cur, steps = S.reduce_level(cur, d, check=False)
        if steps > entry:
            out.append(f"level {d}: {steps} steps > entry size {entry}")
        if entry >= 2 and cur.size > entry * (entry - 1):
            out.append(f"level {d}: exit size {cur.size} > {entry}*{entry - 1}")
        if S.redexes_at(cur, lambda k: k <= d):
            out.append(f"level {d}: redex of depth <= {d} survives")
    if not bound.admits(total):
        out.append(f"size sum {total} exceeds {bound}")
    if T.redex_paths(S.erase(cur)):
        out.append("result is not normal")
    try:
        S.normalize_levels(t, check=True)
    except S.InvariantViolation as e:
        out.append(f"library check: {e}")
    return out


def test_criterion_04_quantitative_lemmas():
    scripts = [(n, p.certificate) for n, p in _dlal_programs().items()]
    rng = random.Random(2024)
    scripts += [(T.to_str(c.term), c.script) for c in random_certified(rng, 500, max_size=25)]
    violations = []
    for name, script in scripts:
        for msg in level_violations(S.decorate(script)):
            violations.append(f"{name}: {msg}")
    detail = f"{len(scripts)} certified terms ({len(scripts) - 500} stdlib + 500 random), {len(violations)} violations"
    assert report(4, "quantitative lemmas", not violations, detail), violations[:5]


def test_criterion_05_strategy_independence():
    failures = []
    runs = 0
    for name, prog in _dlal_programs().items():
        t = prog.term
        bound = TowerBound(T.term_size(t), D.deriv_depth(prog.certificate))
        fuel = bound.exact()
        fuel = 10**7 if fuel is None else min(fuel, 10**7)
        reference = T.normal_form(t)
        for seed in range(10):
            trace = T.normalize(t, f"random:{seed}", fuel + 1)
            runs += 1
            if trace.exhausted or not bound.admits(trace.count):
                failures.append(f"{name} seed {seed}: {trace.count} steps, bound {bound}; trace {trace.to_json()['steps'][:3]}...")
            elif not T.alpha_eq(trace.final, reference):
                failures.append(f"{name} seed {seed}: different normal form {T.to_str(trace.final)}")
    detail = f"{runs} random-strategy runs, {len(failures)} violations"
    assert report(5, "strategy independence", not failures, detail), failures[:5]


def test_criterion_06_size_bounded_by_certificate():
    scripts = [p.certificate for p in _dlal_programs().values()]
    scripts += [c.script for c in random_certified(random.Random(6), 150)]
    nodes = 0
    bad = []
    for script in scripts:
        checker = D._Checker("ndlal")
        checker.check(script)
        for path, node in D.iter_nodes(script):
            nodes += 1
            j = checker.check(node)
            if T.term_size(j.term) > D.node_count(node):
                bad.append((path, T.term_size(j.term), D.node_count(node)))
    detail = f"{nodes} sub-certificates of {len(scripts)} scripts, {len(bad)} violations"
    assert report(6, "size bounded by certificate", not bad, detail), bad[:5]


def test_criterion_07_counterexample_contrast():
    sizes = [1]
    problems = []
    for n in range(1, 11):
        nf = T.normal_form(P.counterexample_term(n))
        sizes.append(T.term_size(nf))
        if sizes[n] != 2 * sizes[n - 1] + 3:
            problems.append(f"|u_{n}| = {sizes[n]}")
    try:
        D.check_nlal(P.counterexample(2).certificate)
    except D.DerivationError as e:
        problems.append(f"LAL certificate rejected: {e}")
    for n in (2, 3):
        found = infer(P.counterexample_term(n))
        if found:
            problems.append(f"t_{n} received a DLAL type")
    detail = f"|u_n| for n=0..10: {sizes}; {len(problems)} problems"
    assert report(7, "counterexample contrast", not problems, detail), problems


def test_criterion_08_simulation():
    problems = []
    runs = 0
    for name, prog in _dlal_programs().items():
        boxed = lla.embed(prog.certificate)
        bound = lla.simulation_bound(prog.certificate)
        for s in STRATEGIES:
            run = lla.simulate_normalization(boxed, s)
            runs += 1
            if run.exhausted:
                problems.append(f"{name}/{s}: fuel exhausted")
            if run.diagram_violations:
                problems.append(f"{name}/{s}: diagram broken at β step {run.diagram_violations[0][0]}")
            if run.lla_steps < run.beta_steps:
                problems.append(f"{name}/{s}: {run.lla_steps} λLA steps < {run.beta_steps} β steps")
            if not bound.admits(run.lla_steps):
                problems.append(f"{name}/{s}: {run.lla_steps} λLA steps exceed {bound}")
            if not T.alpha_eq(run.plain_final, T.normal_form(prog.term)):
                problems.append(f"{name}/{s}: erasure of the result is not the normal form")
    detail = f"{runs} simulated normalizations, {len(problems)} problems"
    assert report(8, "simulation", not problems, detail), problems[:5]


def test_criterion_09_translation():
    failures = []
    progs = _dlal_programs()
    for name, prog in progs.items():
        try:
            lal = D.translate_to_lal(prog.certificate)
            got = D.check_nlal(lal)
            want = D.star_judgement(D.check_ndlal(prog.certificate))
            if not D.judgement_alpha_eq(got, want):
                failures.append(f"{name}: judgement {got} is not the translation {want}")
        except D.DerivationError as e:
            failures.append(f"{name}: {e}")
    detail = f"{len(progs)} certificates translated, {len(failures)} failures"
    assert report(9, "translation", not failures, detail), failures


def test_criterion_10_inference_recovery():
    start = time.perf_counter()
    a = TVar("a")
    num = Imp(Lin(a, a), Par(Lin(a, a)))
    big = Imp(Lin(num, num), Par(Lin(num, num)))
    missing = []

    def recovered(results, target):
        for r in results:
            D.check_ndlal(r.script)
            if type_alpha_eq(r.type, target):
                return True
        return False

    # numerals 2..5 are typed from their principal simple type; 0 and 1 have
    # more general principal types (a -> b -> b and (a -> b) -> a -> b), so
    # they get the numeral's simple type as a hint and a free decoration search
    hint = erase_to_simple(num)
    for n in range(6):
        found = infer(P.church_term(n), level_cap=8, simple_type=hint if n < 2 else None)
        if not recovered(found, num):
            missing.append(f"church {n}")
    checks = {
        "add": (P.add_term(), Lin(num, Lin(num, num))),
        "mult": (P.mult_term(), Imp(num, Lin(big, Par(num)))),
        "succ": (P.succ_term(), Lin(num, num)),
    }
    for label, (term, target) in checks.items():
        if not recovered(infer(term, level_cap=8, expected=target), target):
            missing.append(label)
    elapsed = time.perf_counter() - start
    ok = not missing and elapsed < 30.0
    detail = f"numerals 0..5, add, mult, succ; {len(missing)} not recovered {missing}, {elapsed:.2f}s"
    assert report(10, "inference recovery", ok, detail), missing


if __name__ == "__main__":
    import sys

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
