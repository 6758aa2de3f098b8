"""Hand-rolled lexer; `//` and `/* */` comments, 1-based line/col spans."""

from __future__ import annotations

from dataclasses import dataclass

from .diagnostics import CompileError, Span, Stage, error

KEYWORDS = {
    "protocoltype",
    "parametertype",
    "struct",
    "typedef",
    "if",
    "else",
    "while",
    "for",
    "return",
}

# Longest-match punctuation; two-character tokens first.
_PUNCT2 = ("<=", ">=", "==", "!=", "&&", "||", "++", "--", "+=", "-=")
_PUNCT1 = "{}();,.<>=+-*/%!&|?:[]^"

_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", "\\": "\\", '"': '"', "'": "'", "0": "\0"}


@dataclass(frozen=True)
class Token:
    kind: str  # "ident", "keyword", "int", "char", "string", "punct", "eof"
    text: str
    span: Span
    value: object = None


def tokenize(source: str, file: str = "<input>") -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(source)

    def span() -> Span:
        return Span(file, line, col)

    def fail(message: str) -> CompileError:
        return CompileError(error(Stage.PARSE, span(), message))

    def advance(count: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(count):
            if i < n and source[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = source[i]
        if ch in " \t\r\n":
            advance()
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                advance()
            continue
        if source.startswith("/*", i):
            advance(2)
            while i < n and not source.startswith("*/", i):
                advance()
            if i >= n:
                raise fail("unterminated block comment")
            advance(2)
            continue
        start = span()
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            text = source[i:j]
            kind = "keyword" if text in KEYWORDS else "ident"
            tokens.append(Token(kind, text, start))
            advance(j - i)
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            text = source[i:j]
            tokens.append(Token("int", text, start, int(text)))
            advance(j - i)
            continue
        if ch == '"':
            advance()
            chars: list[str] = []
            while i < n and source[i] != '"':
                if source[i] == "\n":
                    raise fail("unterminated string literal")
                if source[i] == "\\":
                    advance()
                    if i >= n or source[i] not in _ESCAPES:
                        raise fail("unknown escape sequence")
                    chars.append(_ESCAPES[source[i]])
                else:
                    chars.append(source[i])
                advance()
            if i >= n:
                raise fail("unterminated string literal")
            advance()
            value = "".join(chars)
            tokens.append(Token("string", f'"{value}"', start, value))
            continue
        if ch == "'":
            advance()
            if i < n and source[i] == "\\":
                advance()
                if i >= n or source[i] not in _ESCAPES:
                    raise fail("unknown escape sequence")
                value = _ESCAPES[source[i]]
                advance()
            elif i < n and source[i] not in "'\n":
                value = source[i]
                advance()
            else:
                raise fail("empty character literal")
            if i >= n or source[i] != "'":
                raise fail("unterminated character literal")
            advance()
            tokens.append(Token("char", f"'{value}'", start, value))
            continue
        two = source[i : i + 2]
        if two in _PUNCT2:
            tokens.append(Token("punct", two, start))
            advance(2)
            continue
        if ch in _PUNCT1:
            tokens.append(Token("punct", ch, start))
            advance()
            continue
        raise fail(f"unexpected character {ch!r}")

    tokens.append(Token("eof", "", Span(file, line, col)))
    return tokens
