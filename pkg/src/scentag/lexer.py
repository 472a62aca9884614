"""Tokenizer shared by the category, scenario, and query parsers.

The surface syntax of all three languages is built from the same pieces:
identifiers, tag paths (`tree_id:seg/seg`), quoted strings, integers, and
a little punctuation. `#` starts a comment that runs to end of line.

A tag path is lexed as a single token: an identifier immediately followed
by `:` (no whitespace), then optionally `seg(/seg)*`. This is what makes
`other: lead_vehicle:no_leader` unambiguous - `other:` is a path token
with no segments, `lead_vehicle:no_leader` a path token with one.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import ParseError, SourceLoc

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_")
_IDENT_CONT = _IDENT_START | set("0123456789")
_PUNCT = set("{};()")


@dataclass(frozen=True)
class Token:
    kind: str  # "ident" | "path" | "string" | "int" | "punct" | "eof"
    text: str
    loc: SourceLoc
    # for "path" tokens only:
    tree_id: str = ""
    segments: tuple[str, ...] = ()


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(source)

    def loc() -> SourceLoc:
        return SourceLoc(line, col)

    def advance(k: int = 1) -> None:
        nonlocal i, line, col
        for _ in range(k):
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
        if ch == "#":
            while i < n and source[i] != "\n":
                advance()
            continue
        start = loc()
        if ch in _PUNCT:
            tokens.append(Token("punct", ch, start))
            advance()
            continue
        if ch == '"':
            advance()
            buf: list[str] = []
            while True:
                if i >= n or source[i] == "\n":
                    raise ParseError("unterminated string", start)
                c = source[i]
                if c == "\\":
                    if i + 1 >= n or source[i + 1] not in ('"', "\\", "n"):
                        raise ParseError("bad string escape", loc())
                    buf.append("\n" if source[i + 1] == "n" else source[i + 1])
                    advance(2)
                    continue
                if c == '"':
                    advance()
                    break
                buf.append(c)
                advance()
            tokens.append(Token("string", "".join(buf), start))
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            tokens.append(Token("int", source[i:j], start))
            advance(j - i)
            continue
        if ch in _IDENT_START:
            j = i
            while j < n and source[j] in _IDENT_CONT:
                j += 1
            word = source[i:j]
            if j < n and source[j] == ":":
                # path token: tree_id ':' [seg ('/' seg)*]
                advance(j - i + 1)
                segments: list[str] = []
                while i < n and source[i] in _IDENT_START:
                    k = i
                    while k < n and source[k] in _IDENT_CONT:
                        k += 1
                    segments.append(source[i:k])
                    advance(k - i)
                    if i < n and source[i] == "/":
                        advance()
                        if i >= n or source[i] not in _IDENT_START:
                            raise ParseError("expected path segment after '/'", loc())
                        continue
                    break
                tokens.append(
                    Token("path", f"{word}:{'/'.join(segments)}", start, word, tuple(segments))
                )
                continue
            tokens.append(Token("ident", word, start))
            advance(j - i)
            continue
        raise ParseError(f"unexpected character {ch!r}", start)

    tokens.append(Token("eof", "", loc()))
    return tokens


class TokenStream:
    """Cursor over a token list with the usual expect/accept helpers."""

    def __init__(self, source: str):
        self._tokens = tokenize(source)
        self._pos = 0

    def peek(self) -> Token:
        return self._tokens[self._pos]

    def next(self) -> Token:
        tok = self._tokens[self._pos]
        if tok.kind != "eof":
            self._pos += 1
        return tok

    def at_end(self) -> bool:
        return self.peek().kind == "eof"

    def accept_punct(self, text: str) -> bool:
        tok = self.peek()
        if tok.kind == "punct" and tok.text == text:
            self.next()
            return True
        return False

    def accept_ident(self, word: str) -> bool:
        tok = self.peek()
        if tok.kind == "ident" and tok.text == word:
            self.next()
            return True
        return False

    def expect_punct(self, text: str) -> Token:
        tok = self.next()
        if tok.kind != "punct" or tok.text != text:
            raise ParseError(f"expected {text!r}, found {self._describe(tok)}", tok.loc)
        return tok

    def expect_ident(self, word: str | None = None) -> Token:
        tok = self.next()
        if tok.kind != "ident" or (word is not None and tok.text != word):
            want = repr(word) if word else "identifier"
            raise ParseError(f"expected {want}, found {self._describe(tok)}", tok.loc)
        return tok

    def expect_string(self) -> Token:
        tok = self.next()
        if tok.kind != "string":
            raise ParseError(f"expected quoted string, found {self._describe(tok)}", tok.loc)
        return tok

    def expect_int(self) -> Token:
        tok = self.next()
        if tok.kind != "int":
            raise ParseError(f"expected integer, found {self._describe(tok)}", tok.loc)
        return tok

    def expect_path(self) -> Token:
        tok = self.next()
        if tok.kind != "path":
            raise ParseError(f"expected tag path, found {self._describe(tok)}", tok.loc)
        return tok

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "eof":
            return "end of input"
        return repr(tok.text)
