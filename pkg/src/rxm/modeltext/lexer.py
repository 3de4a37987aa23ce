"""Tokenizer for model and script text."""

from __future__ import annotations

from dataclasses import dataclass

PUNCT = [
    "->", "==", "!=", "<=", ">=", "&&", "||",
    "{", "}", "(", ")", "[", "]", ";", ":", ",", ".", "?",
    "<", ">", "=", "!", "+", "-", "*", "/", "%",
]


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | INT | STRING | PUNCT | EOF | ERROR
    text: str
    line: int
    col: int
    value: object = None  # decoded int/string payload


@dataclass
class LexError:
    line: int
    col: int
    message: str


def tokenize(text: str) -> tuple[list[Token], list[LexError]]:
    tokens: list[Token] = []
    errors: list[LexError] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if i < n and text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                advance(1)
            continue
        if ch.isdigit():
            start, sl, sc = i, line, col
            while i < n and text[i].isdigit():
                advance(1)
            tokens.append(Token("INT", text[start:i], sl, sc,
                                int(text[start:i])))
            continue
        if ch.isalpha() or ch == "_":
            start, sl, sc = i, line, col
            while i < n and (text[i].isalnum() or text[i] == "_"):
                advance(1)
            word = text[start:i]
            if not word.isascii():
                errors.append(LexError(sl, sc, f"non-ASCII identifier '{word}'"))
            tokens.append(Token("IDENT", word, sl, sc))
            continue
        if ch == '"':
            sl, sc = line, col
            advance(1)
            buf = []
            closed = False
            while i < n:
                c = text[i]
                if c == '"':
                    advance(1)
                    closed = True
                    break
                if c == "\n":
                    break
                if c == "\\" and i + 1 < n:
                    esc = text[i + 1]
                    mapped = {"\\": "\\", '"': '"', "n": "\n", "t": "\t"}.get(esc)
                    if mapped is None:
                        errors.append(LexError(line, col,
                                               f"unknown escape '\\{esc}'"))
                        mapped = esc
                    buf.append(mapped)
                    advance(2)
                    continue
                buf.append(c)
                advance(1)
            if not closed:
                errors.append(LexError(sl, sc, "unterminated string"))
            tokens.append(Token("STRING", '"' + "".join(buf) + '"', sl, sc,
                                "".join(buf)))
            continue
        matched = None
        for punct in PUNCT:
            if text.startswith(punct, i):
                matched = punct
                break
        if matched is not None:
            tokens.append(Token("PUNCT", matched, line, col))
            advance(len(matched))
            continue
        errors.append(LexError(line, col, f"unexpected character {ch!r}"))
        tokens.append(Token("ERROR", ch, line, col))
        advance(1)

    tokens.append(Token("EOF", "", line, col))
    return tokens, errors
