"""Exact values and parity rules applied when a function node is built."""

from __future__ import annotations

from fractions import Fraction

from .core import (
    ONE,
    PI,
    POLE,
    ZERO,
    I,
    Add,
    Float,
    Func,
    Mul,
    Num,
    could_extract_minus_sign,
    func,
    is_number,
    mul,
    number,
    power,
)

_EVEN = {"cos"}


def _pi_multiple(arg):
    """Return q such that ``arg == q*pi`` with q rational, else None."""
    if arg == ZERO:
        return Fraction(0)
    if arg is PI:
        return Fraction(1)
    if isinstance(arg, Mul) and len(arg.args) == 2 and arg.args[1] is PI and isinstance(arg.args[0], Num):
        return arg.args[0].value
    return None


def _sin_of_pi_multiple(q: Fraction):
    """sin(q*pi) for q with denominator in {1, 2, 3, 4, 6}; None otherwise."""
    q = q % 2
    sign = 1
    if q >= 1:
        q -= 1
        sign = -1
    if q > Fraction(1, 2):
        q = 1 - q
    table = {
        Fraction(0): ZERO,
        Fraction(1, 6): number(Fraction(1, 2)),
        Fraction(1, 4): power(2, Fraction(-1, 2)),
        Fraction(1, 3): mul(Fraction(1, 2), power(3, Fraction(1, 2))),
        Fraction(1, 2): ONE,
    }
    v = table.get(q)
    if v is None:
        return None
    return mul(sign, v)


def _trig_special(name, q):
    s = _sin_of_pi_multiple(q)
    c = _sin_of_pi_multiple(q + Fraction(1, 2))
    if s is None or c is None:
        return None
    if name == "sin":
        return s
    if name == "cos":
        return c
    if name == "tan":
        return POLE if c == ZERO else mul(s, power(c, -1))
    return POLE if s == ZERO else mul(c, power(s, -1))


def evaluate_special(name, a):
    """Return a simplified replacement for ``name(a)`` or None to keep the node."""
    if name in ("sin", "cos", "tan", "cot"):
        q = _pi_multiple(a)
        if q is not None:
            return _trig_special(name, q)
        if isinstance(a, Float):
            return None
        if could_extract_minus_sign(a):
            flipped = func(name, mul(-1, a))
            return flipped if name in _EVEN else mul(-1, flipped)
        return None
    if name == "exp":
        if a == ZERO:
            return ONE
        if isinstance(a, Func) and a.name == "ln":
            return a.arg
        return None
    if name == "ln":
        if a == ONE:
            return ZERO
        if a == ZERO:
            return POLE
        return None
    if name == "sqrt":
        if isinstance(a, Num) and a.value >= 0:
            r = power(a, Fraction(1, 2))
            if is_number(r):
                return r
        return None
    if name == "abs":
        if is_number(a):
            return number(abs(a.value))
        if a is I:
            return ONE
        if isinstance(a, Func) and a.name == "abs":
            return a
        if could_extract_minus_sign(a) and not isinstance(a, Add):
            return func("abs", mul(-1, a))
        return None
    if name == "conj":
        if is_number(a) or a is PI:
            return a
        if a is I:
            return mul(-1, I)
        if isinstance(a, Func) and a.name in ("conj",):
            return a.arg
        if isinstance(a, Func) and a.name in ("re", "im", "abs"):
            return a
        return None
    if name == "re":
        if is_number(a) or a is PI:
            return a
        if a is I:
            return ZERO
        if isinstance(a, Func) and a.name in ("re", "im", "abs"):
            return a
        return None
    if name == "im":
        if is_number(a) or a is PI:
            return ZERO
        if a is I:
            return ONE
        if isinstance(a, Func) and a.name in ("re", "im", "abs"):
            return ZERO
        return None
    return None
