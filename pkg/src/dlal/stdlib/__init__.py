"""The standard programs, and the on-disk corpus they ship as.

:func:`registry` builds every program in memory from :mod:`.programs`.  The
same programs are shipped as ``<name>.lam`` source files with
``<name>.cert.json`` certificates in the ``corpus`` directory next to this
file; :func:`load_corpus` reads such a directory back (a user directory
works the same way, and certificates are optional there).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .. import derivation as D
from .. import terms as T
from ..formulas import parse_type, type_to_str
from .programs import (
    NamedProgram,
    applied,
    applied_polynomial,
    arithmetic,
    church,
    church_value,
    coercion,
    coercion_context,
    counterexample,
    polynomial,
    succ,
    word,
)

CORPUS_DIR = Path(__file__).parent / "corpus"

__all__ = [
    "CORPUS_DIR",
    "NamedProgram",
    "registry",
    "write_corpus",
    "load_corpus",
    "load_program",
    "church",
    "church_value",
    "arithmetic",
    "coercion_context",
    "coercion",
    "polynomial",
    "counterexample",
    "succ",
    "word",
    "applied",
    "applied_polynomial",
]


def registry() -> dict:
    """Every standard program by name, in a fixed order.

    Functions (numerals, words, succ, add, mult, square, one polynomial
    encoder) come first, then closed applications that actually compute,
    then the LAL-only duplication example.
    """
    progs = [church(n) for n in range(4)]
    progs += [word("101"), succ()]
    progs += list(arithmetic().values())
    progs.append(polynomial(2, 3, 1))
    progs += [
        applied("succ", 3),
        applied("add", 2, 3),
        applied("mult", 2, 3),
        applied("square", 3),
        applied_polynomial(1, 1, 1, 2),
    ]
    progs.append(counterexample(2))
    return {p.name: p for p in progs}


def write_corpus(directory: Path = CORPUS_DIR, programs: Optional[dict] = None) -> list:
    """Write ``.lam`` and ``.cert.json`` files for each program; returns the names written."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    programs = registry() if programs is None else programs
    for name, prog in programs.items():
        (directory / f"{name}.lam").write_text(T.to_str(prog.term) + "\n")
        if prog.certificate is not None:
            doc = {
                "name": name,
                "system": prog.system,
                "claimed_type": type_to_str(prog.claimed_type) if prog.claimed_type is not None else None,
                "notes": prog.notes,
                "certificate": D.to_json(prog.certificate),
            }
            (directory / f"{name}.cert.json").write_text(json.dumps(doc, indent=1, ensure_ascii=False) + "\n")
    return list(programs)


def load_program(name: str, directory: Path = CORPUS_DIR) -> NamedProgram:
    directory = Path(directory)
    source = directory / f"{name}.lam"
    if not source.exists():
        raise FileNotFoundError(f"no program {name!r} in {directory}")
    term = T.parse_term(source.read_text())
    cert_path = directory / f"{name}.cert.json"
    if not cert_path.exists():
        return NamedProgram(name, term)
    doc = json.loads(cert_path.read_text())
    claimed = doc.get("claimed_type")
    return NamedProgram(
        name,
        term,
        D.from_json(doc["certificate"]),
        system=doc.get("system", "ndlal"),
        claimed_type=parse_type(claimed) if claimed else None,
        notes=doc.get("notes", ""),
    )


def load_corpus(directory: Path = CORPUS_DIR) -> dict:
    """Programs of a corpus directory by name, sorted by name."""
    directory = Path(directory)
    if not directory.is_dir():
        raise FileNotFoundError(f"corpus directory {directory} does not exist")
    names = sorted(p.name[: -len(".lam")] for p in directory.glob("*.lam"))
    return {n: load_program(n, directory) for n in names}
