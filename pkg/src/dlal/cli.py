"""The ``dlal`` command-line driver.

Every subcommand reads exactly one input: an inline term, a file (``.lam``
source or a JSON certificate), or a corpus program given with
``--program``.  Output is human-readable by default and JSON with
``--format json``.

Exit status: 0 on success, 1 when the input is well formed but the answer is
negative (a script that does not check, a term inference cannot type, a
bench row over its bound), 2 for usage errors, including malformed input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from . import derivation as D
from . import lla
from . import stratify as S
from . import terms as T
from .bounds import TowerBound
from .formulas import parse_type, star_translate, type_to_str
from .infer import ResourceLimit, infer_report
from .stdlib import CORPUS_DIR, NamedProgram, load_corpus, load_program
from .syntax import ParseError

DEFAULT_FUEL = 10**6
# fuel derived from a certificate is capped so a runaway reduction still stops
FUEL_CEILING = 10**7


class UsageError(Exception):
    """Bad invocation or malformed input: exit status 2."""


class DomainError(Exception):
    """Well-formed input with a negative answer: exit status 1."""


# ---------------------------------------------------------------------------
# inputs


@dataclass
class Source:
    """What the single input of an invocation resolved to."""

    term: T.Term
    certificate: Optional[D.Deriv] = None
    system: str = "ndlal"
    name: str = "<input>"


def _corpus_dir(arg: Optional[str]) -> Path:
    if arg in (None, "stdlib"):
        return CORPUS_DIR
    return Path(arg)


def _read_certificate(path: Path) -> tuple:
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON at line {e.lineno}, column {e.colno}: {e.msg}") from e
    system = "ndlal"
    if isinstance(doc, dict) and "certificate" in doc:
        system = doc.get("system", "ndlal")
        doc = doc["certificate"]
    try:
        return D.from_json(doc), system
    except (KeyError, TypeError, ValueError) as e:
        raise UsageError(f"{path}: not a derivation script: {e}") from e


def _check(script: D.Deriv, system: str) -> D.Judgement:
    check = D.check_ndlal if system == "ndlal" else D.check_nlal
    try:
        return check(script)
    except D.DerivationError as e:
        raise DomainError(f"certificate rejected: {e}") from e


def resolve_source(args) -> Source:
    if args.program is not None:
        try:
            prog: NamedProgram = load_program(args.program, _corpus_dir(args.corpus))
        except FileNotFoundError as e:
            raise UsageError(str(e)) from e
        return Source(prog.term, prog.certificate, prog.system, prog.name)
    if args.input is None:
        raise UsageError("give a term, a file, or --program NAME")
    path = Path(args.input)
    if path.suffix in (".lam", ".json") or path.is_file():
        if not path.is_file():
            raise UsageError(f"no such file: {path}")
        if path.suffix == ".json":
            script, system = _read_certificate(path)
            j = _check(script, system)
            return Source(j.term, script, system, path.stem)
        return Source(_parse(path.read_text()), None, "ndlal", path.stem)
    return Source(_parse(args.input))


def _parse(text: str) -> T.Term:
    try:
        return T.parse_term(text)
    except ParseError as e:
        raise UsageError(f"syntax error: {e}") from e


def _need_certificate(src: Source, system: str = "ndlal") -> D.Deriv:
    if src.certificate is None:
        raise UsageError("this subcommand needs a certificate (a .json file or --program with a certificate)")
    if src.system != system:
        raise UsageError(f"this subcommand needs an {system.upper()} certificate, got {src.system.upper()}")
    return src.certificate


def default_fuel(src: Source) -> int:
    """``|D|^(2^(d+1))`` when a DLAL certificate is at hand, else a flat million."""
    if src.certificate is None or src.system != "ndlal":
        return DEFAULT_FUEL
    exact = lla.simulation_bound(src.certificate).exact()
    return FUEL_CEILING if exact is None else min(exact, FUEL_CEILING)


# ---------------------------------------------------------------------------
# output


class Output:
    def __init__(self, fmt: str, stream=None):
        self.fmt = fmt
        self.stream = stream or sys.stdout

    def emit(self, human: str, data) -> None:
        if self.fmt == "json":
            print(json.dumps(data, indent=2, ensure_ascii=False), file=self.stream)
        else:
            print(human, file=self.stream)


def _strategy(args) -> str:
    if args.strategy == "random":
        return f"random:{args.seed}"
    return args.strategy


# ---------------------------------------------------------------------------
# subcommands


def cmd_parse(args, out: Output) -> int:
    src = resolve_source(args)
    text = T.to_str(src.term)
    out.emit(text, {"term": text, "size": T.term_size(src.term), "free": sorted(src.term.fv)})
    return 0


def cmd_size(args, out: Output) -> int:
    src = resolve_source(args)
    n = T.term_size(src.term)
    out.emit(str(n), {"size": n})
    return 0


def cmd_normalize(args, out: Output) -> int:
    src = resolve_source(args)
    fuel = args.fuel if args.fuel is not None else default_fuel(src)
    trace = T.normalize(src.term, _strategy(args), fuel)
    data = {**trace.to_json(), "strategy": trace.strategy, "fuel": fuel}
    human = f"{data['final']}\n{len(trace.steps)} steps ({trace.strategy})"
    if trace.exhausted:
        human += f", fuel {fuel} exhausted"
    out.emit(human, data)
    return 1 if trace.exhausted else 0


def cmd_check(args, out: Output) -> int:
    src = resolve_source(args)
    system = args.system or src.system
    script = _need_certificate(src, src.system)
    j = _check(script, system)
    data = {
        "ok": True,
        "system": system,
        "judgement": str(j),
        "type": type_to_str(j.type),
        "term": T.to_str(j.term),
        "nodes": D.node_count(script),
        "depth": D.deriv_depth(script),
    }
    out.emit(f"{j}\n{data['nodes']} nodes, depth {data['depth']}", data)
    return 0


def cmd_translate(args, out: Output) -> int:
    src = resolve_source(args)
    script = _need_certificate(src)
    _check(script, "ndlal")
    lal = D.translate_to_lal(script)
    j = _check(lal, "nlal")
    out.emit(f"{j}", {"judgement": str(j), "type": type_to_str(j.type), "certificate": D.to_json(lal)})
    return 0


def cmd_stratify(args, out: Output) -> int:
    src = resolve_source(args)
    script = _need_certificate(src)
    _check(script, "ndlal")
    st = S.decorate(script)
    try:
        trace = S.normalize_levels(st, check=True, scan=args.scan)
    except S.InvariantViolation as e:
        raise DomainError(f"stratified normalization broke an invariant: {e}") from e
    data = {"decorated": S.strat_to_str(st), **trace.to_json()}
    lines = [f"decorated: {data['decorated']}", "level  entry  steps  exit"]
    lines += [f"{r.level:5}  {r.entry_size:5}  {r.steps:5}  {r.exit_size:4}" for r in trace.records]
    lines.append(f"total steps {trace.total_steps}, size sum {trace.size_sum}, bound {trace.bound}")
    lines.append(f"normal form: {data['final']}")
    out.emit("\n".join(lines), data)
    return 0


def cmd_infer(args, out: Output) -> int:
    src = resolve_source(args)
    expected = None
    if args.expected:
        try:
            expected = parse_type(args.expected)
        except ParseError as e:
            raise UsageError(f"type syntax error: {e}") from e
    try:
        report = infer_report(src.term, level_cap=args.level_cap, limit=args.limit, expected=expected)
    except ResourceLimit as e:
        raise DomainError(str(e)) from e
    data = [
        {
            "type": type_to_str(r.type),
            "certificate": D.to_json(r.script),
            "phi": {k: v for k, v in sorted(r.phi.items())},
            "levels": {"/".join(p) or "root": k for p, k in sorted(r.boxes.items())},
        }
        for r in report.results
    ]
    if data:
        out.emit("\n".join(d["type"] for d in data), data)
        return 0
    # an empty result is a domain error: JSON callers still get their (empty) list
    # on stdout, and the explanation goes to stderr in both formats
    if out.fmt == "json":
        out.emit("", data)
    if report.error:
        raise DomainError(report.error)
    reasons = sorted(set(report.rejections))[:3]
    raise DomainError("no DLAL typing found" + (": " + "; ".join(reasons) if reasons else ""))


def cmd_lla(args, out: Output) -> int:
    src = resolve_source(args)
    script = _need_certificate(src)
    _check(script, "ndlal")
    boxed = lla.embed(script)
    fuel = args.fuel if args.fuel is not None else default_fuel(src)
    run = lla.simulate_normalization(boxed, _strategy(args), fuel)
    bound = lla.simulation_bound(script)
    data = {
        "embedded": lla.to_str(boxed),
        **run.to_json(),
        "bound": bound.to_json(),
        "within_bound": bound.admits(run.lla_steps),
        "final": lla.to_str(run.final),
        "erasure": T.to_str(run.plain_final),
    }
    human = (
        f"embedded: {data['embedded']}\n"
        f"β steps {run.beta_steps}, λLA steps {run.lla_steps} (bound {bound}), "
        f"{data['initial_admin_steps']} administrative steps before the first β step\n"
        f"diagram violations {data['diagram_violations']}, shape violations {data['shape_violations']}\n"
        f"normal form: {data['final']}"
    )
    out.emit(human, data)
    failed = run.diagram_violations or run.exhausted or not data["within_bound"]
    return 1 if failed else 0


# ---------------------------------------------------------------------------
# bench


@dataclass
class BenchRow:
    name: str
    term_size: int
    script_size: int
    depth: int
    bound: TowerBound
    steps: dict = field(default_factory=dict)
    level_trace: Optional[dict] = None
    lla_steps: Optional[int] = None
    problems: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.problems

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "term_size": self.term_size,
            "script_size": self.script_size,
            "depth": self.depth,
            "bound": self.bound.to_json(),
            "steps": self.steps,
            "level_trace": self.level_trace,
            "lla_steps": self.lla_steps,
            "status": "ok" if self.ok else "FAIL",
            "problems": self.problems,
        }


@dataclass
class BenchReport:
    rows: list
    skipped: list

    @property
    def failures(self) -> int:
        return sum(not r.ok for r in self.rows)

    def to_json(self) -> dict:
        return {"rows": [r.to_json() for r in self.rows], "skipped": self.skipped, "failures": self.failures}

    def to_human(self) -> str:
        if not self.rows:
            return "empty corpus"
        strategies = list(self.rows[0].steps)
        head = ["program", "|t|", "|D|", "d", "bound"] + strategies + ["levels", "λLA", "status"]
        table = [head]
        for r in self.rows:
            levels = "-" if r.level_trace is None else str(r.level_trace["total_steps"])
            table.append(
                [r.name, str(r.term_size), str(r.script_size), str(r.depth), str(r.bound)]
                + [str(r.steps[s]) for s in strategies]
                + [levels, "-" if r.lla_steps is None else str(r.lla_steps), "ok" if r.ok else "FAIL"]
            )
        widths = [max(len(row[i]) for row in table) for i in range(len(head))]
        lines = ["  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip() for row in table]
        for r in self.rows:
            if r.level_trace is not None:
                per_level = ", ".join(f"{e}/{k}/{x}" for e, k, x in r.level_trace["levels"])
                lines.append(
                    f"{r.name}: levels (entry/steps/exit) {per_level}; size sum {r.level_trace['size_sum']}"
                )
        for r in self.rows:
            lines += [f"{r.name}: {p}" for p in r.problems]
        if self.skipped:
            lines.append("skipped (no DLAL certificate): " + ", ".join(self.skipped))
        return "\n".join(lines)


def bench(programs: dict, strategies=("lo",), seeds=(), simulate: bool = True) -> BenchReport:
    """Step counts of every certified program under each strategy, against ``|t|^(2^d)``.

    ``strategies`` lists ``lo``/``ri``/``random``; ``random`` expands to one
    run per seed.  A row fails when some run exceeds the bound or does not
    finish, when level-by-level normalization breaks one of its invariants,
    or when the boxed-term simulation disagrees with β-reduction.
    """
    runs = []
    for s in strategies:
        if s == "random":
            runs += [f"random:{k}" for k in (seeds or (0,))]
        else:
            runs.append(s)
    rows, skipped = [], []
    for name in sorted(programs):
        prog = programs[name]
        if prog.certificate is None or prog.system != "ndlal":
            skipped.append(name)
            continue
        script = prog.certificate
        j = D.check_ndlal(script)
        depth = D.deriv_depth(script)
        bound = TowerBound(T.term_size(j.term), depth)
        row = BenchRow(name, T.term_size(j.term), D.node_count(script), depth, bound)
        fuel = bound.exact()
        fuel = FUEL_CEILING if fuel is None else min(fuel, FUEL_CEILING)
        finals = []
        for label in runs:
            trace = T.normalize(j.term, label, fuel + 1)
            row.steps[label] = len(trace.steps)
            finals.append(trace.final)
            if trace.exhausted or not bound.admits(len(trace.steps)):
                row.problems.append(f"{label}: {len(trace.steps)} steps exceed the bound {bound}")
        if any(not T.alpha_eq(finals[0], f) for f in finals[1:]):
            row.problems.append("strategies reached different normal forms")
        try:
            trace = S.normalize_levels(S.decorate(script))
            row.level_trace = {
                "depth": trace.depth,
                "total_steps": trace.total_steps,
                "size_sum": trace.size_sum,
                "levels": [[r.entry_size, r.steps, r.exit_size] for r in trace.records],
            }
            if finals and not T.alpha_eq(S.erase(trace.final), finals[0]):
                row.problems.append("level-by-level normal form differs from β-normal form")
        except S.InvariantViolation as e:
            row.problems.append(f"level-by-level normalization: {e}")
        if simulate:
            run = lla.simulate_normalization(lla.embed(script), "lo", fuel + 1)
            row.lla_steps = run.lla_steps
            sim_bound = lla.simulation_bound(script)
            if run.diagram_violations:
                row.problems.append(f"simulation diagram broken at β step {run.diagram_violations[0][0]}")
            if run.lla_steps < run.beta_steps or not sim_bound.admits(run.lla_steps):
                row.problems.append(f"λLA steps {run.lla_steps} outside [{run.beta_steps}, {sim_bound}]")
        rows.append(row)
    return BenchReport(rows, skipped)


def cmd_bench(args, out: Output) -> int:
    try:
        programs = load_corpus(_corpus_dir(args.corpus))
    except FileNotFoundError as e:
        raise UsageError(str(e)) from e
    if args.program:
        programs = {k: v for k, v in programs.items() if k in set(args.program)}
    strategies = args.strategies or ["lo", "ri", "random"]
    seeds = args.seeds or list(range(5))
    report = bench(programs, strategies, seeds, simulate=not args.no_simulate)
    out.emit(report.to_human(), report.to_json())
    return 1 if report.failures else 0


def cmd_list(args, out: Output) -> int:
    try:
        programs = load_corpus(_corpus_dir(args.corpus))
    except FileNotFoundError as e:
        raise UsageError(str(e)) from e
    rows = []
    for name, p in programs.items():
        typ = None
        if p.certificate is not None:
            j = p.judgement()
            typ = type_to_str(j.type)
        rows.append({"name": name, "size": T.term_size(p.term), "system": p.system if p.certificate else None, "type": typ})
    human = "\n".join(f"{r['name']:<18} {r['size']:>5}  {r['type'] or '(no certificate)'}" for r in rows)
    out.emit(human, rows)
    return 0


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _add_input(p):
    p.add_argument("input", nargs="?", help="inline term, .lam file or certificate .json file")
    p.add_argument("--program", "-p", help="a corpus program by name (instead of INPUT)")
    p.add_argument("--corpus", help="corpus directory (default: the shipped stdlib corpus)")


def _add_strategy(p):
    p.add_argument("--strategy", choices=["lo", "ri", "random"], default="lo")
    p.add_argument("--seed", type=int, default=0, help="seed for --strategy random")
    p.add_argument("--fuel", type=int, default=None, help="maximum number of β steps")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["human", "json"], default="human")
    parser = _Parser(prog="dlal", description="Dual Light Affine Logic toolkit", parents=[common])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.set_defaults(func=func)
        return p

    _add_input(command("parse", cmd_parse, "parse and print a term"))
    _add_input(command("size", cmd_size, "term size"))
    p = command("normalize", cmd_normalize, "β-normalize a term")
    _add_input(p)
    _add_strategy(p)
    p = command("check", cmd_check, "check a certificate")
    _add_input(p)
    p.add_argument("--system", choices=["ndlal", "nlal"], default=None)
    _add_input(command("translate", cmd_translate, "translate a DLAL certificate to LAL"))
    p = command("stratify", cmd_stratify, "level-by-level normalization of a certified term")
    _add_input(p)
    p.add_argument("--scan", action="store_true", help="scan every intermediate term for forbidden shapes")
    p = command("infer", cmd_infer, "infer DLAL types")
    _add_input(p)
    p.add_argument("--level-cap", type=int, default=8)
    p.add_argument("--limit", type=int, default=10, help="maximum number of typings reported")
    p.add_argument("--expected", help="check against this propositional type instead of searching freely")
    p = command("lla", cmd_lla, "simulate β-reduction on the boxed term of a certificate")
    _add_input(p)
    _add_strategy(p)
    p = command("bench", cmd_bench, "strategy benchmark against the polynomial bounds")
    p.add_argument("--corpus", help="corpus directory or 'stdlib' (default)")
    p.add_argument("--program", "-p", action="append", help="restrict to these programs")
    p.add_argument("--strategy", dest="strategies", action="append", choices=["lo", "ri", "random"])
    p.add_argument("--seed", dest="seeds", action="append", type=int)
    p.add_argument("--no-simulate", action="store_true", help="skip the λLA simulation column")
    p = command("list", cmd_list, "list corpus programs")
    p.add_argument("--corpus", help="corpus directory or 'stdlib' (default)")
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    """Run one invocation and return its exit status."""
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "program", None) and getattr(args, "input", None) and args.command != "bench":
            raise UsageError("give either INPUT or --program, not both")
        return args.func(args, Output(args.format, stdout))
    except UsageError as e:
        print(f"dlal: usage error: {e}", file=stderr)
        return 2
    except DomainError as e:
        print(f"dlal: {e}", file=stderr)
        return 1


def main() -> None:
    sys.exit(run())
