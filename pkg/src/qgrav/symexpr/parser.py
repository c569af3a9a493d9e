"""Recursive-descent parser for the wave-function expression language.

Grammar::

    expr   := term (("+" | "-") term)*
    term   := factor (("*" | "/") factor)*
    factor := "-" factor | power
    power  := atom ("^" factor)?
    atom   := NUMBER | IDENT | IDENT "(" expr ")" | "(" expr ")"

Unary minus binds looser than ``^`` (``-x^2`` is ``-(x^2)``) and ``^`` is
right-associative.  Decimal literals become exact rationals.
"""

from __future__ import annotations

import re
from fractions import Fraction

from .core import FUNCTIONS, PI, I, Symbol, add, func, mul, number, power

RESERVED = frozenset(FUNCTIONS) | {"i", "pi"}

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")
_IDENT = re.compile(r"[^\W\d]\w*")


class ParseError(ValueError):
    """Syntax error at a byte offset, with the set of tokens that would have been accepted."""

    def __init__(self, message, offset, expected=(), text=""):
        self.offset = offset
        self.expected = frozenset(expected)
        self.text = text
        detail = f" (expected {', '.join(sorted(repr(t) for t in self.expected))})" if self.expected else ""
        super().__init__(f"{message} at offset {offset}{detail}")


class UnknownFunctionError(ParseError):
    def __init__(self, name, offset, text=""):
        self.name = name
        super().__init__(f"unknown function {name!r}", offset, (), text)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.raw = text.encode("utf-8")
        self.pos = 0  # character index

    def offset(self, pos=None):
        # offsets are reported in bytes of the UTF-8 encoding
        pos = self.pos if pos is None else pos
        return len(self.text[:pos].encode("utf-8"))

    def error(self, message, expected=(), pos=None):
        return ParseError(message, self.offset(pos), expected, self.text)

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def accept(self, ch):
        if self.peek() == ch:
            self.pos += 1
            return True
        return False

    def expect(self, ch):
        if not self.accept(ch):
            found = self.peek()
            what = "end of input" if not found else repr(found)
            raise self.error(f"unexpected {what}", {ch})

    def parse(self):
        e = self.expr()
        if self.peek():
            raise self.error(f"unexpected {self.peek()!r}", {"+", "-", "*", "/", "^"})
        return e

    def expr(self):
        e = self.term()
        while True:
            if self.accept("+"):
                e = add(e, self.term())
            elif self.accept("-"):
                e = add(e, mul(-1, self.term()))
            else:
                return e

    def term(self):
        e = self.factor()
        while True:
            if self.accept("*"):
                e = mul(e, self.factor())
            elif self.accept("/"):
                e = mul(e, power(self.factor(), -1))
            else:
                return e

    def factor(self):
        if self.accept("-"):
            return mul(-1, self.factor())
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return power(base, self.factor())
        return base

    def atom(self):
        ch = self.peek()
        start = self.pos
        if ch == "(":
            self.pos += 1
            e = self.expr()
            self.expect(")")
            return e
        m = _NUMBER.match(self.text, self.pos)
        if m:
            self.pos = m.end()
            return number(Fraction(m.group(0)))
        m = _IDENT.match(self.text, self.pos)
        if m:
            name = m.group(0)
            self.pos = m.end()
            if self.peek() == "(":
                if name not in FUNCTIONS:
                    raise UnknownFunctionError(name, self.offset(start), self.text)
                self.pos += 1
                arg = self.expr()
                self.expect(")")
                return func(name, arg)
            if name in FUNCTIONS:
                raise self.error(f"function {name!r} needs an argument", {"("})
            if name == "i":
                return I
            if name == "pi":
                return PI
            return Symbol(name)
        found = "end of input" if not ch else repr(ch)
        raise self.error(f"unexpected {found}", {"NUMBER", "IDENT", "(", "-"})


def parse(text: str):
    """Parse ``text`` into a canonical expression.

    Raises :class:`ParseError` (with ``offset`` and ``expected``) on malformed
    input and :class:`UnknownFunctionError` for calls to unknown functions.
    """
    return _Parser(text).parse()
