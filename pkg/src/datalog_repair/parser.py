"""Parsers for the theory (.adt) and observation-store (.aps) file formats.

Theory files hold one clause per line, `[Name:] body => head .`, where the
body is a comma-separated atom list (possibly empty) and the head is one
atom or empty. `%` starts a comment. Observation files have `[true]` and
`[false]` sections with one ground atom per line, `.`-terminated.

`X = Z` and `=(X, Z)` are accepted as synonyms; printing uses the infix
form. Unnamed clauses are numbered A1, A2, ... by file position.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .core import (
    EQUALS,
    Atom,
    Clause,
    PreferredStructure,
    Term,
    TheoryError,
    Theory,
)


class ParseError(ValueError):
    """Syntax or validation error with a 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Token:
    kind: str  # IDENT LPAREN RPAREN LBRACK RBRACK COMMA DOT COLON ARROW EQUALS EOF
    text: str
    line: int
    col: int


_PUNCT = {
    "(": "LPAREN",
    ")": "RPAREN",
    "[": "LBRACK",
    "]": "RBRACK",
    ",": "COMMA",
    ".": "DOT",
    ":": "COLON",
}


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "%":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch == "=" and i + 1 < n and text[i + 1] == ">":
            tokens.append(_Token("ARROW", "=>", line, col))
            i += 2
            col += 2
            continue
        if ch == "=":
            tokens.append(_Token("EQUALS", "=", line, col))
            i += 1
            col += 1
            continue
        if ch in _PUNCT:
            tokens.append(_Token(_PUNCT[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isalpha():
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


class _Stream:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, ahead: int = 0) -> _Token:
        return self.tokens[min(self.pos + ahead, len(self.tokens) - 1)]

    def next(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.next()
        if tok.kind != kind:
            found = tok.text or "end of input"
            raise ParseError(f"expected {what}, found {found!r}", tok.line, tok.col)
        return tok


def _parse_term(s: _Stream) -> tuple[Term, _Token]:
    tok = s.expect("IDENT", "a term")
    return Term(tok.text), tok


def _parse_atom(s: _Stream) -> tuple[Atom, _Token]:
    """One atom: `p`, `p(t, ...)`, `t = t`, or `=(t, t)`."""
    tok = s.peek()
    if tok.kind == "EQUALS":  # functional form =(s, t)
        s.next()
        s.expect("LPAREN", "'('")
        lhs, _ = _parse_term(s)
        s.expect("COMMA", "','")
        rhs, _ = _parse_term(s)
        s.expect("RPAREN", "')'")
        return Atom(EQUALS, (lhs, rhs)), tok
    name = s.expect("IDENT", "an atom")
    if s.peek().kind == "EQUALS":  # infix s = t
        s.next()
        rhs, _ = _parse_term(s)
        return Atom(EQUALS, (Term(name.text), rhs)), name
    if s.peek().kind == "LPAREN":
        s.next()
        args = [_parse_term(s)[0]]
        while s.peek().kind == "COMMA":
            s.next()
            args.append(_parse_term(s)[0])
        s.expect("RPAREN", "')'")
        return Atom(name.text, tuple(args)), name
    return Atom(name.text), name


def _check_arity(arities: dict[str, int], atom: Atom, tok: _Token) -> None:
    seen = arities.setdefault(atom.pred, atom.arity)
    if seen != atom.arity:
        raise ParseError(
            f"predicate {atom.pred} used with arity {atom.arity}, elsewhere {seen}",
            tok.line,
            tok.col,
        )


def parse_theory(text: str) -> Theory:
    """Parse a theory file into a validated Theory.

    Raises ParseError (with line/column) on syntax errors, arity
    conflicts, non-ground assertions, unbound head variables, the empty
    clause, and duplicate clause ids.
    """
    s = _Stream(_tokenize(text))
    clauses: list[Clause] = []
    arities: dict[str, int] = {}
    used_ids: set[str] = set()
    position = 0
    while s.peek().kind != "EOF":
        position += 1
        start = s.peek()
        name: Optional[str] = None
        if s.peek().kind == "IDENT" and s.peek(1).kind == "COLON":
            name = s.next().text
            s.next()  # colon
        body: list[Atom] = []
        if s.peek().kind not in ("ARROW",):
            atom, tok = _parse_atom(s)
            _check_arity(arities, atom, tok)
            body.append(atom)
            while s.peek().kind == "COMMA":
                s.next()
                atom, tok = _parse_atom(s)
                _check_arity(arities, atom, tok)
                body.append(atom)
        s.expect("ARROW", "'=>'")
        head: Optional[Atom] = None
        if s.peek().kind != "DOT":
            head, tok = _parse_atom(s)
            _check_arity(arities, head, tok)
        s.expect("DOT", "'.'")
        cid = name if name is not None else f"A{position}"
        if cid in used_ids:
            raise ParseError(f"duplicate clause id {cid}", start.line, start.col)
        used_ids.add(cid)
        try:
            clauses.append(Clause(cid, tuple(body), head))
        except TheoryError as exc:
            raise ParseError(str(exc), start.line, start.col) from exc
    try:
        return Theory(tuple(clauses))
    except TheoryError as exc:  # defensive; per-clause checks should have fired
        raise ParseError(str(exc), 1, 1) from exc


def parse_ps(text: str) -> PreferredStructure:
    """Parse an observation store: `[true]` and `[false]` sections of ground atoms."""
    s = _Stream(_tokenize(text))
    sections: dict[str, list[tuple[Atom, _Token]]] = {}
    current: Optional[str] = None
    arities: dict[str, int] = {}
    while s.peek().kind != "EOF":
        if s.peek().kind == "LBRACK":
            s.next()
            tag = s.expect("IDENT", "'true' or 'false'")
            if tag.text not in ("true", "false"):
                raise ParseError(f"unknown section [{tag.text}]", tag.line, tag.col)
            if tag.text in sections:
                raise ParseError(f"repeated section [{tag.text}]", tag.line, tag.col)
            s.expect("RBRACK", "']'")
            sections[tag.text] = []
            current = tag.text
            continue
        if current is None:
            tok = s.peek()
            raise ParseError("expected a [true] or [false] section header", tok.line, tok.col)
        atom, tok = _parse_atom(s)
        s.expect("DOT", "'.'")
        if not atom.is_ground:
            raise ParseError(f"observation {atom} is not ground", tok.line, tok.col)
        _check_arity(arities, atom, tok)
        sections[current].append((atom, tok))
    true_atoms = tuple(a for a, _ in sections.get("true", []))
    false_atoms = tuple(a for a, _ in sections.get("false", []))
    overlap = set(true_atoms) & set(false_atoms)
    if overlap:
        atom = sorted(overlap)[0]
        tok = next(t for a, t in sections["false"] if a == atom)
        raise ParseError(f"{atom} observed both true and false", tok.line, tok.col)
    return PreferredStructure(true_atoms, false_atoms)
