"""Exact partial derivatives."""

from __future__ import annotations

from fractions import Fraction

from .core import (
    ONE,
    POLE,
    ZERO,
    Add,
    Func,
    Mul,
    Pow,
    Symbol,
    add,
    free_symbols,
    func,
    mul,
    power,
)


def _outer(name, u):
    """Derivative of ``name`` evaluated at ``u`` (chain factor excluded)."""
    if name == "sin":
        return func("cos", u)
    if name == "cos":
        return mul(-1, func("sin", u))
    if name == "tan":
        return power(func("cos", u), -2)
    if name == "cot":
        return mul(-1, power(func("sin", u), -2))
    if name == "exp":
        return func("exp", u)
    if name == "ln":
        return power(u, -1)
    if name == "sqrt":
        return mul(Fraction(1, 2), power(func("sqrt", u), -1))
    raise NotImplementedError(name)


def differentiate(e, s):
    """Partial derivative of ``e`` with respect to the symbol ``s`` (name or Symbol).

    ``conj``, ``re`` and ``im`` commute with the derivative, which is valid
    for the real coordinates this engine differentiates against.
    """
    name = s.name if isinstance(s, Symbol) else str(s)
    memo = {}

    def d(n):
        key = id(n)
        if key in memo:
            return memo[key][1]
        out = _d(n)
        memo[key] = (n, out)
        return out

    def _d(n):
        if n is POLE:
            return POLE
        if isinstance(n, Symbol):
            return ONE if n.name == name else ZERO
        if not n.args:
            return ZERO
        if name not in free_symbols(n):
            return ZERO
        if isinstance(n, Add):
            return add(*[d(t) for t in n.args])
        if isinstance(n, Mul):
            terms = []
            for k, f in enumerate(n.args):
                df = d(f)
                if df == ZERO:
                    continue
                terms.append(mul(*n.args[:k], df, *n.args[k + 1 :]))
            return add(*terms)
        if isinstance(n, Pow):
            b, x = n.base, n.exp
            db = d(b)
            if name not in free_symbols(x):
                if db == ZERO:
                    return ZERO
                return mul(x, power(b, add(x, -1)), db)
            dx = d(x)
            return mul(n, add(mul(dx, func("ln", b)), mul(x, db, power(b, -1))))
        if isinstance(n, Func):
            u = n.arg
            du = d(u)
            if du == ZERO:
                return ZERO
            if n.name in ("conj", "re", "im"):
                return func(n.name, du)
            if n.name == "abs":
                # d|u| = Re(conj(u) u') / |u|
                return mul(func("re", mul(func("conj", u), du)), power(n, -1))
            return mul(_outer(n.name, u), du)
        raise TypeError(f"cannot differentiate {type(n).__name__}")

    return d(e)
