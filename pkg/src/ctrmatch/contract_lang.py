"""Lexer, parser, validator and pretty-printer for contract source files.

A contract looks like a Java class whose header reads
``contract <name> of <ComponentClass>``. Fields and method signatures are
kept; method bodies, static blocks and ``throws`` clauses are parsed and
dropped. The ``protocol { ... }`` block is captured as a flat run of
lexemes and compiled later by :mod:`ctrmatch.protocol_automata`.

Required services are marked with a ``//required ...`` line comment. The
comment opens a section: every method declared after it is grouped as
``required`` until a ``//provided ...`` or ``//private ...`` comment closes
the section.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "TokenKind",
    "Token",
    "TypeName",
    "Param",
    "FieldDecl",
    "MethodDecl",
    "Group",
    "ContractAst",
    "ContractSyntaxError",
    "LexError",
    "ParseError",
    "DuplicateProtocolError",
    "MissingProtocolError",
    "ValidationIssue",
    "UndeclaredProtocolSymbol",
    "DuplicateField",
    "DuplicateMethod",
    "tokenize",
    "parse_contract",
    "parse_contract_source",
    "validate_contract",
    "format_contract",
]


class TokenKind(enum.Enum):
    CONTRACT = "CONTRACT"
    OF = "OF"
    PROTOCOL = "PROTOCOL"
    STATIC = "STATIC"
    THROWS = "THROWS"
    MODIFIER = "MODIFIER"
    PRIMITIVE = "PRIMITIVE"
    IDENT = "IDENT"
    PUNCT = "PUNCT"
    STRING = "STRING"
    INT = "INT"
    PRAGMA = "PRAGMA"


KEYWORDS = {
    "contract": TokenKind.CONTRACT,
    "of": TokenKind.OF,
    "protocol": TokenKind.PROTOCOL,
    "static": TokenKind.STATIC,
    "throws": TokenKind.THROWS,
    "public": TokenKind.MODIFIER,
    "private": TokenKind.MODIFIER,
    "protected": TokenKind.MODIFIER,
}
PRIMITIVES = frozenset(
    ["void", "boolean", "byte", "char", "short", "int", "long", "float", "double"]
)
PUNCTUATION = frozenset("{}()[];,.=<>+-*/%!&|^?:~@")
PRAGMA_WORDS = ("required", "provided", "private")

IDENTIFIER_RE = re.compile(r"[A-Za-z_$][A-Za-z0-9_$]*")
_NUMBER_RE = re.compile(r"[0-9][A-Za-z0-9_]*")
_STRING_RE = re.compile(r'"(?:[^"\\\n]|\\.)*"')
_CHAR_RE = re.compile(r"'(?:[^'\\\n]|\\.)+'")
_SPACE_RE = re.compile(r"[ \t\r\f\n]+")


@dataclass(frozen=True)
class Token:
    kind: TokenKind
    lexeme: str
    line: int
    column: int

    def __repr__(self) -> str:
        return f"{self.kind.value}({self.lexeme!r})@{self.line}:{self.column}"


class ContractSyntaxError(ValueError):
    """Base class for errors raised while reading contract source."""

    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column
        self.message = message


class LexError(ContractSyntaxError):
    pass


class ParseError(ContractSyntaxError):
    def __init__(self, line: int, column: int, expected: str, found: str):
        super().__init__(line, column, f"expected {expected}, found {found}")
        self.expected = expected
        self.found = found


class DuplicateProtocolError(ContractSyntaxError):
    pass


class MissingProtocolError(ContractSyntaxError):
    pass


def _pragma_word(comment_text: str) -> str | None:
    words = comment_text.split()
    if words and words[0].lower() in PRAGMA_WORDS:
        return words[0].lower()
    return None


def tokenize(source: str) -> list[Token]:
    """Split contract source into tokens.

    Whitespace and comments are dropped, except line comments whose first
    word is ``required``, ``provided`` or ``private``; those become
    ``PRAGMA`` tokens carrying the whole comment as lexeme.
    """
    tokens: list[Token] = []
    pos = 0
    line = 1
    line_start = 0
    n = len(source)

    def advance_lines(text: str, start: int) -> None:
        nonlocal line, line_start
        newlines = text.count("\n")
        if newlines:
            line += newlines
            line_start = start + text.rindex("\n") + 1

    while pos < n:
        ch = source[pos]
        col = pos - line_start + 1
        m = _SPACE_RE.match(source, pos)
        if m:
            advance_lines(m.group(), pos)
            pos = m.end()
            continue
        if source.startswith("//", pos):
            end = source.find("\n", pos)
            end = n if end < 0 else end
            text = source[pos:end].rstrip("\r")
            if _pragma_word(text[2:]) is not None:
                tokens.append(Token(TokenKind.PRAGMA, text, line, col))
            pos = end
            continue
        if source.startswith("/*", pos):
            end = source.find("*/", pos + 2)
            if end < 0:
                raise LexError(line, col, "unterminated block comment")
            advance_lines(source[pos : end + 2], pos)
            pos = end + 2
            continue
        m = IDENTIFIER_RE.match(source, pos)
        if m:
            word = m.group()
            if word in KEYWORDS:
                kind = KEYWORDS[word]
            elif word in PRIMITIVES:
                kind = TokenKind.PRIMITIVE
            else:
                kind = TokenKind.IDENT
            tokens.append(Token(kind, word, line, col))
            pos = m.end()
            continue
        m = _NUMBER_RE.match(source, pos)
        if m:
            tokens.append(Token(TokenKind.INT, m.group(), line, col))
            pos = m.end()
            continue
        if ch == '"' or ch == "'":
            m = (_STRING_RE if ch == '"' else _CHAR_RE).match(source, pos)
            if not m:
                raise LexError(line, col, "unterminated literal")
            tokens.append(Token(TokenKind.STRING, m.group(), line, col))
            pos = m.end()
            continue
        if ch in PUNCTUATION:
            tokens.append(Token(TokenKind.PUNCT, ch, line, col))
            pos += 1
            continue
        raise LexError(line, col, f"unexpected character {ch!r}")
    return tokens


# ---------------------------------------------------------------------------
# AST


class Group(str, enum.Enum):
    PROVIDED = "provided"
    INTERNAL = "internal"
    REQUIRED = "required"


@dataclass(frozen=True)
class TypeName:
    name: str
    dims: int = 0

    def __str__(self) -> str:
        return self.name + "[]" * self.dims


@dataclass(frozen=True)
class Param:
    name: str
    dtype: TypeName


@dataclass(frozen=True)
class FieldDecl:
    name: str
    dtype: TypeName
    modifiers: frozenset[str] = frozenset()


@dataclass(frozen=True)
class MethodDecl:
    name: str
    return_type: TypeName | None
    params: tuple[Param, ...] = ()
    modifiers: frozenset[str] = frozenset()
    group: Group = Group.INTERNAL

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ContractAst:
    contract_name: str
    component_class: str
    fields: tuple[FieldDecl, ...] = ()
    methods: tuple[MethodDecl, ...] = ()
    protocol: tuple[str, ...] = ()

    def method_names(self) -> list[str]:
        return list(dict.fromkeys(m.name for m in self.methods))


# ---------------------------------------------------------------------------
# Parser

_MODIFIER_ORDER = ("public", "protected", "private", "static")
_PROTOCOL_PUNCT = frozenset("()+*;^|?")


class _Parser:
    def __init__(self, tokens: Sequence[Token]):
        self.tokens: list[Token] = []
        # pragma word in force for the token at the same index
        self.pragmas: list[str | None] = []
        pending = None
        for tok in tokens:
            if tok.kind is TokenKind.PRAGMA:
                pending = _pragma_word(tok.lexeme[2:])
                continue
            self.tokens.append(tok)
            self.pragmas.append(pending)
            pending = None
        self.pos = 0
        self.section_required = False

    # -- cursor helpers
    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.tokens[i] if i < len(self.tokens) else None

    def error(self, expected: str) -> ParseError:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else None
            line, col = (last.line, last.column) if last else (1, 1)
            return ParseError(line, col, expected, "end of input")
        return ParseError(tok.line, tok.column, expected, repr(tok.lexeme))

    def at(self, kind: TokenKind, lexeme: str | None = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok is not None and tok.kind is kind and (lexeme is None or tok.lexeme == lexeme)

    def at_punct(self, ch: str, offset: int = 0) -> bool:
        return self.at(TokenKind.PUNCT, ch, offset)

    def expect(self, kind: TokenKind, lexeme: str | None = None, what: str | None = None) -> Token:
        if not self.at(kind, lexeme):
            raise self.error(what or repr(lexeme) if lexeme else what or kind.value)
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect_punct(self, ch: str) -> Token:
        return self.expect(TokenKind.PUNCT, ch, repr(ch))

    def identifier(self) -> str:
        return self.expect(TokenKind.IDENT, what="identifier").lexeme

    # -- grammar
    def program(self) -> ContractAst:
        ast = self.contract_declaration()
        if self.peek() is not None:
            raise self.error("end of input")
        return ast

    def contract_declaration(self) -> ContractAst:
        self.expect(TokenKind.CONTRACT, what="'contract'")
        name = self.identifier()
        self.expect(TokenKind.OF, what="'of'")
        component = self.identifier()
        self.expect_punct("{")
        fields: list[FieldDecl] = []
        methods: list[MethodDecl] = []
        protocol: tuple[str, ...] | None = None
        while not self.at_punct("}"):
            if self.peek() is None:
                raise self.error("'}'")
            item = self.body_declaration()
            if item is None:
                continue
            if isinstance(item, tuple):
                if protocol is not None:
                    tok = self.tokens[self.pos - 1]
                    raise DuplicateProtocolError(tok.line, tok.column, "more than one protocol block")
                protocol = item
            elif isinstance(item, MethodDecl):
                methods.append(item)
            else:
                fields.extend(item)
        close = self.expect_punct("}")
        if protocol is None:
            raise MissingProtocolError(close.line, close.column, f"contract {name} has no protocol block")
        return ContractAst(name, component, tuple(fields), tuple(methods), protocol)

    def body_declaration(self):
        pragma = self.pragmas[self.pos] if self.pos < len(self.pragmas) else None
        if pragma is not None:
            self.section_required = pragma == "required"
        if self.at_punct(";"):
            self.pos += 1
            return None
        if self.at_punct("{") or (self.at(TokenKind.STATIC) and self.at_punct("{", 1)):
            if self.at(TokenKind.STATIC):
                self.pos += 1
            self.skip_block()
            return None
        modifiers: set[str] = set()
        while self.at(TokenKind.MODIFIER) or self.at(TokenKind.STATIC):
            modifiers.add(self.tokens[self.pos].lexeme)
            self.pos += 1
        if self.at(TokenKind.PROTOCOL):
            return self.protocol_declaration()
        if self.at(TokenKind.PRIMITIVE, "void"):
            self.pos += 1
            rtype = None
        else:
            rtype = self.type_type()
        name = self.identifier()
        if self.at_punct("("):
            return self.method_rest(name, rtype, frozenset(modifiers))
        if rtype is None:
            raise self.error("'('")
        return self.field_rest(name, rtype, frozenset(modifiers))

    def protocol_declaration(self) -> tuple[str, ...]:
        self.expect(TokenKind.PROTOCOL)
        self.expect_punct("{")
        out: list[str] = []
        while True:
            tok = self.peek()
            if tok is None:
                raise self.error("'}'")
            if tok.kind is TokenKind.IDENT or (
                tok.kind is TokenKind.PUNCT and tok.lexeme in _PROTOCOL_PUNCT
            ):
                out.append(tok.lexeme)
                self.pos += 1
            elif tok.kind is TokenKind.PUNCT and tok.lexeme == "}" and out:
                self.pos += 1
                return tuple(out)
            else:
                raise self.error("protocol symbol or operator")

    def type_type(self) -> TypeName:
        if self.at(TokenKind.PRIMITIVE) and not self.at(TokenKind.PRIMITIVE, "void"):
            name = self.tokens[self.pos].lexeme
            self.pos += 1
        else:
            name = self.qualified_name()
            if self.at_punct("<"):
                name += self.type_arguments()
        return TypeName(name, self.dims())

    def qualified_name(self) -> str:
        parts = [self.identifier()]
        while self.at_punct(".") and self.at(TokenKind.IDENT, offset=1):
            self.pos += 1
            parts.append(self.identifier())
        return ".".join(parts)

    def type_arguments(self) -> str:
        self.expect_punct("<")
        args = []
        while True:
            if self.at_punct("?"):
                self.pos += 1
                args.append("?")
            else:
                args.append(str(self.type_type()))
            if self.at_punct(","):
                self.pos += 1
                continue
            self.expect_punct(">")
            return "<" + ",".join(args) + ">"

    def dims(self) -> int:
        count = 0
        while self.at_punct("[") and self.at_punct("]", 1):
            self.pos += 2
            count += 1
        return count

    def field_rest(self, name: str, dtype: TypeName, modifiers: frozenset[str]) -> list[FieldDecl]:
        out = []
        while True:
            extra = self.dims()
            out.append(FieldDecl(name, TypeName(dtype.name, dtype.dims + extra), modifiers))
            if self.at_punct("="):
                self.pos += 1
                self.skip_expression()
            if self.at_punct(","):
                self.pos += 1
                name = self.identifier()
                continue
            self.expect_punct(";")
            return out

    def method_rest(self, name: str, rtype: TypeName | None, modifiers: frozenset[str]) -> MethodDecl:
        params = self.formal_parameters()
        extra = self.dims()
        if extra:
            if rtype is None:
                raise self.error("method body")
            rtype = TypeName(rtype.name, rtype.dims + extra)
        if self.at(TokenKind.THROWS):
            self.pos += 1
            self.qualified_name()
            while self.at_punct(","):
                self.pos += 1
                self.qualified_name()
        if self.at_punct(";"):
            self.pos += 1
        elif self.at_punct("{"):
            self.skip_block()
        else:
            raise self.error("method body")
        if self.section_required:
            group = Group.REQUIRED
        elif "public" in modifiers:
            group = Group.PROVIDED
        else:
            group = Group.INTERNAL
        return MethodDecl(name, rtype, tuple(params), modifiers, group)

    def formal_parameters(self) -> list[Param]:
        self.expect_punct("(")
        params: list[Param] = []
        if self.at_punct(")"):
            self.pos += 1
            return params
        while True:
            while self.at(TokenKind.IDENT, "final"):
                self.pos += 1
            dtype = self.type_type()
            if self.at_punct(".") and self.at_punct(".", 1) and self.at_punct(".", 2):
                self.pos += 3
                dtype = TypeName(dtype.name, dtype.dims + 1)
            pname = self.identifier()
            extra = self.dims()
            params.append(Param(pname, TypeName(dtype.name, dtype.dims + extra)))
            if self.at_punct(","):
                self.pos += 1
                continue
            self.expect_punct(")")
            return params

    def skip_block(self) -> None:
        open_tok = self.expect_punct("{")
        depth = 1
        while depth:
            tok = self.peek()
            if tok is None:
                raise ParseError(open_tok.line, open_tok.column, "'}' closing this block", "end of input")
            if tok.kind is TokenKind.PUNCT:
                if tok.lexeme == "{":
                    depth += 1
                elif tok.lexeme == "}":
                    depth -= 1
            self.pos += 1

    def skip_expression(self) -> None:
        depth = 0
        while True:
            tok = self.peek()
            if tok is None:
                raise self.error("';'")
            if tok.kind is TokenKind.PUNCT:
                if tok.lexeme in "({[":
                    depth += 1
                elif tok.lexeme in ")}]":
                    if depth == 0:
                        raise self.error("';'")
                    depth -= 1
                elif tok.lexeme in ";," and depth == 0:
                    return
            self.pos += 1


def parse_contract(tokens: Sequence[Token]) -> ContractAst:
    """Parse a token list produced by :func:`tokenize` into a ContractAst."""
    return _Parser(tokens).program()


def parse_contract_source(source: str) -> ContractAst:
    return parse_contract(tokenize(source))


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class ValidationIssue:
    subject: str
    severity: str = field(default="error", init=False)

    def __str__(self) -> str:
        return f"{type(self).__name__}({self.subject!r})"


@dataclass(frozen=True)
class UndeclaredProtocolSymbol(ValidationIssue):
    severity: str = field(default="warning", init=False)


@dataclass(frozen=True)
class DuplicateField(ValidationIssue):
    pass


@dataclass(frozen=True)
class DuplicateMethod(ValidationIssue):
    arity: int = 0

    def __str__(self) -> str:
        return f"DuplicateMethod({self.subject!r}/{self.arity})"


def validate_contract(ast: ContractAst) -> list[ValidationIssue]:
    """Collect problems with a parsed contract; an empty list means valid.

    Undeclared protocol symbols are warnings. Duplicate fields and duplicate
    method signatures (same name and arity) are errors.
    """
    issues: list[ValidationIssue] = []
    seen_fields: set[str] = set()
    for f in ast.fields:
        if f.name in seen_fields:
            issues.append(DuplicateField(f.name))
        seen_fields.add(f.name)
    seen_methods: set[tuple[str, int]] = set()
    for m in ast.methods:
        key = (m.name, m.arity)
        if key in seen_methods:
            issues.append(DuplicateMethod(m.name, m.arity))
        seen_methods.add(key)
    declared = {m.name for m in ast.methods}
    reported: set[str] = set()
    for sym in ast.protocol:
        if IDENTIFIER_RE.fullmatch(sym) and sym not in declared and sym not in reported:
            reported.add(sym)
            issues.append(UndeclaredProtocolSymbol(sym))
    return issues


# ---------------------------------------------------------------------------
# Pretty-printing


def _mods(modifiers: Iterable[str]) -> str:
    return "".join(m + " " for m in _MODIFIER_ORDER if m in modifiers)


def format_contract(ast: ContractAst, indent: str = "    ") -> str:
    """Render an AST back to contract source that reparses to the same AST."""
    lines = [f"contract {ast.contract_name} of {ast.component_class} {{"]
    for f in ast.fields:
        lines.append(f"{indent}{_mods(f.modifiers)}{f.dtype} {f.name};")
    in_required = False
    for m in ast.methods:
        if m.group is Group.REQUIRED and not in_required:
            lines.append(f"{indent}//required services")
            in_required = True
        elif m.group is not Group.REQUIRED and in_required:
            lines.append(f"{indent}//{'provided' if m.group is Group.PROVIDED else 'private'} methods")
            in_required = False
        ret = "void" if m.return_type is None else str(m.return_type)
        params = ", ".join(f"{p.dtype} {p.name}" for p in m.params)
        lines.append(f"{indent}{_mods(m.modifiers)}{ret} {m.name}({params}) {{;}}")
    lines.append(f"{indent}protocol {{ {' '.join(ast.protocol)} }}")
    lines.append("}")
    return "\n".join(lines) + "\n"
