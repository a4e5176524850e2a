"""Core value types: terms, atoms, Horn clauses, theories, observation stores.

Everything here is immutable after construction and validated on
construction, so the reasoning modules can share values freely without
defensive copying.

Conventions (Prolog-style): variables start with an uppercase letter,
constants and predicates with a lowercase letter. Clauses are written
body-first (`body => head.`); a clause with an empty body is an assertion,
one with an empty head is a goal. The equality predicate `=` is ordinary
(no built-in semantics) and prints infix.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

IDENT_RE = re.compile(r"[A-Za-z][A-Za-z0-9_]*\Z")

EQUALS = "="


class TheoryError(ValueError):
    """A structural invariant of a theory or observation store is violated."""


@dataclass(frozen=True, order=True)
class Term:
    """A variable or constant; the case of the first letter decides which."""

    name: str

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.name):
            raise TheoryError(f"invalid term name {self.name!r}")

    @property
    def is_variable(self) -> bool:
        return self.name[0].isupper()

    @property
    def is_constant(self) -> bool:
        return not self.is_variable

    def __str__(self) -> str:
        return self.name


def var(name: str) -> Term:
    t = Term(name)
    if not t.is_variable:
        raise TheoryError(f"variable names start uppercase: {name!r}")
    return t


def const(name: str) -> Term:
    t = Term(name)
    if t.is_variable:
        raise TheoryError(f"constant names start lowercase: {name!r}")
    return t


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to a tuple of terms."""

    pred: str
    args: tuple[Term, ...] = ()

    def __post_init__(self) -> None:
        if self.pred != EQUALS and not IDENT_RE.match(self.pred):
            raise TheoryError(f"invalid predicate name {self.pred!r}")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def is_ground(self) -> bool:
        return all(t.is_constant for t in self.args)

    def variables(self) -> set[str]:
        return {t.name for t in self.args if t.is_variable}

    def constants(self) -> set[str]:
        return {t.name for t in self.args if t.is_constant}

    def __str__(self) -> str:
        if self.pred == EQUALS and self.arity == 2:
            return f"{self.args[0]} = {self.args[1]}"
        if not self.args:
            return self.pred
        return f"{self.pred}({', '.join(map(str, self.args))})"


@dataclass(frozen=True)
class Clause:
    """A named Horn clause: at most one head atom, any number of body atoms.

    Range restriction is enforced: every head variable must occur in the
    body, which makes assertions ground and keeps the least model finite.
    """

    cid: str
    body: tuple[Atom, ...]
    head: Optional[Atom]

    def __post_init__(self) -> None:
        if not IDENT_RE.match(self.cid):
            raise TheoryError(f"invalid clause id {self.cid!r}")
        if self.head is None and not self.body:
            raise TheoryError(f"{self.cid}: the empty clause is not allowed")
        if self.head is not None:
            body_vars = set().union(*(a.variables() for a in self.body)) if self.body else set()
            unbound = self.head.variables() - body_vars
            if unbound:
                which = ", ".join(sorted(unbound))
                raise TheoryError(f"{self.cid}: head variable {which} does not occur in the body")

    @property
    def is_assertion(self) -> bool:
        return self.head is not None and not self.body

    @property
    def is_rule(self) -> bool:
        return self.head is not None and bool(self.body)

    @property
    def is_goal(self) -> bool:
        return self.head is None

    def atoms(self) -> Iterator[Atom]:
        yield from self.body
        if self.head is not None:
            yield self.head

    def variables(self) -> set[str]:
        out: set[str] = set()
        for a in self.atoms():
            out |= a.variables()
        return out

    def __str__(self) -> str:
        body = ", ".join(str(a) for a in self.body)
        lhs = f"{body} " if body else ""
        rhs = f" {self.head}" if self.head is not None else " "
        return f"{self.cid}: {lhs}=>{rhs}."


@dataclass(frozen=True)
class Signature:
    """The predicates (with arities) and constants a clause set is written in."""

    predicates: dict[str, int]
    constants: frozenset[str]

    def arity(self, pred: str) -> int:
        return self.predicates[pred]


def derive_signature(clauses: Iterable[Clause]) -> Signature:
    preds: dict[str, int] = {}
    consts: set[str] = set()
    for c in clauses:
        for a in c.atoms():
            seen = preds.setdefault(a.pred, a.arity)
            if seen != a.arity:
                raise TheoryError(
                    f"{c.cid}: predicate {a.pred} used with arity {a.arity}, elsewhere {seen}"
                )
            consts |= a.constants()
    return Signature(preds, frozenset(consts))


@dataclass(frozen=True)
class Theory:
    """An ordered list of uniquely named clauses plus its derived signature."""

    clauses: tuple[Clause, ...]
    signature: Signature = field(init=False, compare=False, hash=False, repr=False)

    def __post_init__(self) -> None:
        ids: set[str] = set()
        for c in self.clauses:
            if c.cid in ids:
                raise TheoryError(f"duplicate clause id {c.cid}")
            ids.add(c.cid)
        object.__setattr__(self, "signature", derive_signature(self.clauses))

    def clause(self, cid: str) -> Clause:
        for c in self.clauses:
            if c.cid == cid:
                return c
        raise KeyError(cid)

    def has_clause(self, cid: str) -> bool:
        return any(c.cid == cid for c in self.clauses)

    def replace(self, cid: str, new: Clause) -> "Theory":
        if not self.has_clause(cid):
            raise KeyError(cid)
        return Theory(tuple(new if c.cid == cid else c for c in self.clauses))

    def without(self, cid: str) -> "Theory":
        if not self.has_clause(cid):
            raise KeyError(cid)
        return Theory(tuple(c for c in self.clauses if c.cid != cid))

    def append(self, new: Clause) -> "Theory":
        return Theory(self.clauses + (new,))

    def rules(self) -> list[Clause]:
        return [c for c in self.clauses if c.is_rule]

    def assertions(self) -> list[Clause]:
        return [c for c in self.clauses if c.is_assertion]

    def goals(self) -> list[Clause]:
        return [c for c in self.clauses if c.is_goal]

    def fresh_clause_id(self) -> str:
        used = {c.cid for c in self.clauses}
        k = len(self.clauses) + 1
        while f"A{k}" in used:
            k += 1
        return f"A{k}"

    def fresh_symbol(self, base: str) -> str:
        """Smallest `<base>_r<k>` colliding with no predicate or constant."""
        taken = set(self.signature.predicates) | set(self.signature.constants)
        k = 1
        while f"{base}_r{k}" in taken:
            k += 1
        return f"{base}_r{k}"


@dataclass(frozen=True)
class PreferredStructure:
    """Ground atoms observed true and observed false; the repair benchmark."""

    true_atoms: tuple[Atom, ...] = ()
    false_atoms: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        for a in self.true_atoms + self.false_atoms:
            if not a.is_ground:
                raise TheoryError(f"observation {a} is not ground")
        overlap = set(self.true_atoms) & set(self.false_atoms)
        if overlap:
            which = ", ".join(str(a) for a in sorted(overlap))
            raise TheoryError(f"observed both true and false: {which}")
        arities: dict[str, int] = {}
        for a in self.true_atoms + self.false_atoms:
            seen = arities.setdefault(a.pred, a.arity)
            if seen != a.arity:
                raise TheoryError(f"predicate {a.pred} used with arities {seen} and {a.arity}")

    @property
    def true_set(self) -> frozenset[Atom]:
        return frozenset(self.true_atoms)

    @property
    def false_set(self) -> frozenset[Atom]:
        return frozenset(self.false_atoms)

    def predicates(self) -> frozenset[str]:
        return frozenset(a.pred for a in self.true_atoms + self.false_atoms)

    @property
    def is_empty(self) -> bool:
        return not self.true_atoms and not self.false_atoms


def pretty_print(theory: Theory) -> str:
    """Render a theory in the on-disk format, one clause per line.

    Stable: parsing the output and printing again is byte-identical.
    """
    return "".join(f"{c}\n" for c in theory.clauses)


def pretty_print_ps(ps: PreferredStructure) -> str:
    lines = ["[true]"]
    lines += [f"{a}." for a in ps.true_atoms]
    lines.append("[false]")
    lines += [f"{a}." for a in ps.false_atoms]
    return "".join(f"{line}\n" for line in lines)


def rename_symbols(theory: Theory, mapping: dict[str, str]) -> Theory:
    """Rename predicates/constants wholesale; used for user-facing names."""

    def rename_term(t: Term) -> Term:
        return Term(mapping.get(t.name, t.name))

    def rename_atom(a: Atom) -> Atom:
        return Atom(mapping.get(a.pred, a.pred), tuple(rename_term(t) for t in a.args))

    clauses = tuple(
        Clause(c.cid, tuple(rename_atom(a) for a in c.body),
               rename_atom(c.head) if c.head is not None else None)
        for c in theory.clauses
    )
    return Theory(clauses)
