"""Recursive-descent parser for ``.dflp`` programs and the canonical printer.

See ``docs/language.md`` for the grammar.  ``parse_program`` collects every
error it can find, recovering at the next rule terminator, and raises
:class:`~fasolve.errors.ParseFailure` carrying the full list.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable

from .core import (
    AGGREGATE_FUNCTIONS,
    BUILTINS,
    ONE,
    AggregateAtom,
    AnnFunc,
    AnnotatedAtom,
    AnnVar,
    Atom,
    Const,
    Constant,
    FuncTerm,
    FuzzySet,
    Program,
    Rule,
    SetElement,
    SourceSpan,
    Var,
)
from .errors import ParseFailure

LEX, SYNTAX, ANNOTATION_RANGE, ARITY = "lex", "syntax", "annotation-range", "arity"


@dataclass(frozen=True)
class ParseError:
    span: SourceSpan
    kind: str
    message: str

    def __str__(self):
        return f"{self.span}: {self.kind} error: {self.message}"


_TOKEN_SPEC = [
    ("WS", r"[ \t\r]+"),
    ("NL", r"\n"),
    ("COMMENT", r"%[^\n]*"),
    ("NUMBER", r"\d+(?:\.\d+)?(?:/\d+)?"),
    ("AGG", r"#[A-Za-z_]+"),
    ("IF", r":-"),
    ("CMP", r"!=|<=|>=|<|>|="),
    ("IDENT", r"[a-z][A-Za-z0-9_]*"),
    ("VAR", r"[A-Z][A-Za-z0-9_]*"),
    ("PUNCT", r"[:|;,.(){}\-]"),
]
_TOKEN_RE = re.compile("|".join(f"(?P<{name}>{rx})" for name, rx in _TOKEN_SPEC))


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    span: SourceSpan


def tokenize(text: str, filename: str = "<input>") -> tuple[list[Token], list[ParseError]]:
    tokens, errors = [], []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        span = SourceSpan(filename, line, pos - line_start + 1)
        if m is None:
            errors.append(ParseError(span, LEX, f"unexpected character {text[pos]!r}"))
            pos += 1
            continue
        kind = m.lastgroup
        if kind == "NL":
            line += 1
            line_start = m.end()
        elif kind not in ("WS", "COMMENT"):
            tokens.append(Token(kind if kind != "PUNCT" else m.group(), m.group(), span))
        pos = m.end()
    tokens.append(Token("EOF", "", SourceSpan(filename, line, pos - line_start + 1)))
    return tokens, errors


class _Abort(Exception):
    def __init__(self, error: ParseError):
        self.error = error


def _number(text: str) -> Fraction:
    return Fraction(text)


class _Parser:
    def __init__(self, tokens: list[Token], classical: bool):
        self.toks = tokens
        self.pos = 0
        self.classical = classical
        self.errors: list[ParseError] = []
        # names seen in object / annotation position inside the current rule
        self.obj_names: dict[str, SourceSpan] = {}
        self.ann_names: dict[str, SourceSpan] = {}

    # -- token helpers
    @property
    def tok(self) -> Token:
        return self.toks[self.pos]

    def peek(self, offset=1) -> Token:
        return self.toks[min(self.pos + offset, len(self.toks) - 1)]

    def advance(self) -> Token:
        t = self.tok
        if t.kind != "EOF":
            self.pos += 1
        return t

    def fail(self, message, kind=SYNTAX, span=None):
        raise _Abort(ParseError(span or self.tok.span, kind, message))

    def expect(self, kind, what=None) -> Token:
        if self.tok.kind != kind:
            found = self.tok.text or "end of input"
            self.fail(f"expected {what or kind!r}, found {found!r}")
        return self.advance()

    # -- grammar
    def program(self) -> list[Rule]:
        rules = []
        while self.tok.kind != "EOF":
            start = self.pos
            try:
                rules.append(self.rule())
            except _Abort as exc:
                self.errors.append(exc.error)
                self.recover(start)
        return rules

    def recover(self, start):
        if self.pos == start:
            self.advance()
        while self.tok.kind not in (".", "EOF"):
            self.advance()
        self.advance()

    def rule(self) -> Rule:
        self.obj_names, self.ann_names = {}, {}
        span = self.tok.span
        if self.tok.kind == "IF":
            self.fail("rules need a non-empty head")
        head = [self.annotated_atom(allow_not=False)]
        while self.tok.kind == "|":
            self.advance()
            head.append(self.annotated_atom(allow_not=False))
        pos, neg = [], []
        if self.tok.kind == "IF":
            self.advance()
            while True:
                negated, lit = self.literal()
                (neg if negated else pos).append(lit)
                if self.tok.kind != ",":
                    break
                self.advance()
        self.expect(".", "'.'")
        clash = sorted(set(self.obj_names) & set(self.ann_names))
        if clash:
            name = clash[0]
            self.fail(f"{name} is used both as an object variable and an annotation variable",
                      span=self.ann_names[name])
        return Rule(head, pos, neg, span=span)

    def literal(self):
        negated = False
        if self.tok.kind == "IDENT" and self.tok.text == "not" and self.peek().kind in ("IDENT", "AGG"):
            self.advance()
            negated = True
        if self.tok.kind == "AGG":
            return negated, self.aggregate()
        return negated, self.annotated_atom(allow_not=True)

    def annotated_atom(self, allow_not) -> AnnotatedAtom:
        span = self.tok.span
        atom = self.atom()
        ann = self.opt_annotation()
        return AnnotatedAtom(atom, ann, span=span)

    def opt_annotation(self):
        if self.tok.kind != ":":
            return Const(ONE)
        if self.classical:
            self.fail("annotations are not allowed in classical mode")
        self.advance()
        return self.annotation()

    def atom(self) -> Atom:
        t = self.tok
        if t.kind != "IDENT":
            self.fail(f"expected an atom, found {t.text or 'end of input'!r}")
        if t.text == "not":
            self.fail("'not' cannot be used as a predicate name")
        self.advance()
        args = self.term_args() if self.tok.kind == "(" else []
        return Atom(t.text, args, span=t.span)

    def term_args(self) -> list:
        self.expect("(")
        args = [self.term()]
        while self.tok.kind == ",":
            self.advance()
            args.append(self.term())
        self.expect(")", "')'")
        return args

    def term(self):
        t = self.tok
        if t.kind == "VAR":
            self.advance()
            self.obj_names.setdefault(t.text, t.span)
            return Var(t.text, span=t.span)
        if t.kind == "IDENT":
            self.advance()
            if self.tok.kind == "(":
                return FuncTerm(t.text, self.term_args(), span=t.span)
            return Constant(t.text, span=t.span)
        if t.kind == "-" and self.peek().kind == "NUMBER":
            self.advance()
            return Constant(-_number(self.advance().text), span=t.span)
        if t.kind == "NUMBER":
            self.advance()
            return Constant(_number(t.text), span=t.span)
        self.fail(f"expected a term, found {t.text or 'end of input'!r}")

    def annotation(self):
        t = self.tok
        if t.kind == "NUMBER":
            self.advance()
            value = _number(t.text)
            if value > ONE:
                self.fail(f"grade {t.text} outside [0,1]", ANNOTATION_RANGE, t.span)
            return Const(value, span=t.span)
        if t.kind == "-" and self.peek().kind == "NUMBER":
            self.fail(f"grade -{self.peek().text} outside [0,1]", ANNOTATION_RANGE, t.span)
        if t.kind == "VAR":
            self.advance()
            self.ann_names.setdefault(t.text, t.span)
            return AnnVar(t.text, span=t.span)
        if t.kind == "IDENT" and self.peek().kind == "(":
            if t.text not in BUILTINS:
                self.fail(f"unknown annotation function {t.text!r}")
            self.advance()
            self.advance()
            args = [self.annotation()]
            while self.tok.kind == ",":
                self.advance()
                args.append(self.annotation())
            self.expect(")", "')'")
            arity = BUILTINS[t.text][0]
            if len(args) != arity:
                self.fail(f"{t.text} expects {arity} argument(s), got {len(args)}", ARITY, t.span)
            return AnnFunc(t.text, args, span=t.span)
        self.fail(f"expected an annotation, found {t.text or 'end of input'!r}")

    def aggregate(self) -> AggregateAtom:
        t = self.advance()
        name = t.text[1:]
        fn = name if name.endswith("_f") else name + "_f"
        if fn not in AGGREGATE_FUNCTIONS:
            self.fail(f"unknown aggregate {t.text!r}", span=t.span)
        set_span = self.expect("{", "'{'").span
        elements = [self.element()]
        while self.tok.kind == ";":
            self.advance()
            elements.append(self.element())
        self.expect("}", "'}'")
        if self.tok.kind != "CMP":
            self.fail(f"expected a comparison after aggregate, found {self.tok.text!r}")
        cmp = self.advance().text
        guard = self.term()
        ann = self.opt_annotation()
        return AggregateAtom(fn, FuzzySet(elements, span=set_span), cmp, guard, ann, span=t.span)

    def element(self) -> SetElement:
        span = self.tok.span
        item = self.term()
        grade = self.opt_annotation()
        self.expect("|", "'|'")
        conj = [self.annotated_atom(allow_not=False)]
        while self.tok.kind == ",":
            self.advance()
            conj.append(self.annotated_atom(allow_not=False))
        return SetElement(item, grade, conj, span=span)


def _check_arities(rules: Iterable[Rule]) -> list[ParseError]:
    seen: dict[str, int] = {}
    errors = []
    for rule in rules:
        for atom in rule.atoms():
            arity = seen.setdefault(atom.pred, atom.arity)
            if arity != atom.arity:
                span = atom.span or rule.span or SourceSpan("<input>", 0, 0)
                errors.append(ParseError(
                    span, ARITY, f"predicate {atom.pred} used with arity {atom.arity}, previously {arity}"))
    return errors


def parse_rules(text: str, filename: str = "<input>", classical: bool = False) -> list[Rule]:
    """Parse without the program-wide arity check (used when concatenating files)."""
    tokens, errors = tokenize(text, filename)
    parser = _Parser(tokens, classical)
    rules = parser.program()
    errors = sorted(errors + parser.errors, key=lambda e: (e.span.line, e.span.column))
    if errors:
        raise ParseFailure(errors)
    return rules


def parse_program(text: str, filename: str = "<input>", classical: bool = False) -> Program:
    tokens, lex_errors = tokenize(text, filename)
    parser = _Parser(tokens, classical)
    rules = parser.program()
    errors = lex_errors + parser.errors + _check_arities(rules)
    if errors:
        raise ParseFailure(sorted(errors, key=lambda e: (e.span.file, e.span.line, e.span.column)))
    return Program(rules)


def parse_files(paths: Iterable[str], classical: bool = False) -> Program:
    """Concatenate several files into one program, in argument order."""
    rules, errors = [], []
    for path in paths:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
        try:
            rules.extend(parse_rules(text, str(path), classical))
        except ParseFailure as exc:
            errors.extend(exc.errors)
    errors.extend(_check_arities(rules))
    if errors:
        raise ParseFailure(errors)
    return Program(rules)


def print_program(p: Program) -> str:
    return "\n".join(str(r) for r in p.rules)
