"""Numeric evaluation: a checked scalar evaluator and a vectorized compiler."""

from __future__ import annotations

import cmath
import math

import numpy as np

from .core import (
    POLE,
    Add,
    Constant,
    Float,
    Func,
    ImaginaryUnit,
    Mul,
    Num,
    Pow,
    Symbol,
    free_symbols,
)


class EvaluationError(ArithmeticError):
    pass


class UnboundSymbolError(EvaluationError):
    def __init__(self, names):
        self.names = tuple(sorted(names))
        super().__init__("unbound symbol(s): " + ", ".join(self.names))


class PoleError(EvaluationError):
    """Division by zero, logarithm of zero or a non-finite intermediate."""

    def __init__(self, subtree, reason="division by zero"):
        self.subtree = subtree
        self.reason = reason
        super().__init__(f"pole ({reason}) in {subtree}")


def _check_binding(e, binding):
    missing = free_symbols(e) - set(binding)
    if missing:
        raise UnboundSymbolError(missing)


def evaluate(e, binding=None) -> complex:
    """Evaluate ``e`` in IEEE double-precision complex arithmetic.

    ``binding`` maps symbol names to numbers.  Raises
    :class:`UnboundSymbolError` listing missing names and :class:`PoleError`
    carrying the offending subtree.
    """
    binding = {} if binding is None else binding
    _check_binding(e, binding)
    values = {k: complex(v) for k, v in binding.items()}
    memo = {}

    def ev(n):
        k = id(n)
        if k in memo:
            return memo[k]
        v = _ev(n)
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise PoleError(n, "non-finite value")
        memo[k] = v
        return v

    def _ev(n):
        if isinstance(n, (Num, Float)):
            return complex(float(n.value))
        if isinstance(n, Symbol):
            return values[n.name]
        if isinstance(n, ImaginaryUnit):
            return 1j
        if isinstance(n, Constant):
            return complex(math.pi)
        if n is POLE:
            raise PoleError(n, "symbolic pole")
        if isinstance(n, Add):
            return sum((ev(t) for t in n.args), 0j)
        if isinstance(n, Mul):
            out = 1 + 0j
            for f in n.args:
                out *= ev(f)
            return out
        if isinstance(n, Pow):
            b = ev(n.base)
            x = ev(n.exp)
            if b == 0:
                if x.real > 0 and x.imag == 0:
                    return 0j
                if x == 0:
                    return 1 + 0j
                raise PoleError(n)
            if x.imag == 0 and x.real == int(x.real) and abs(x.real) < 2**31:
                try:
                    return b ** int(x.real)
                except OverflowError as exc:
                    raise PoleError(n, "overflow") from exc
            try:
                return b**x
            except (OverflowError, ZeroDivisionError) as exc:
                raise PoleError(n, "overflow") from exc
        if isinstance(n, Func):
            return _func(n, ev(n.arg))
        raise TypeError(f"cannot evaluate {type(n).__name__}")

    return ev(e)


def _func(n, u):
    name = n.name
    try:
        if name == "sin":
            return cmath.sin(u)
        if name == "cos":
            return cmath.cos(u)
        if name == "tan":
            c = cmath.cos(u)
            if c == 0:
                raise PoleError(n)
            return cmath.sin(u) / c
        if name == "cot":
            s = cmath.sin(u)
            if s == 0:
                raise PoleError(n)
            return cmath.cos(u) / s
        if name == "exp":
            return cmath.exp(u)
        if name == "ln":
            if u == 0:
                raise PoleError(n, "logarithm of zero")
            return cmath.log(u)
        if name == "sqrt":
            return cmath.sqrt(u)
        if name == "abs":
            return complex(abs(u))
        if name == "conj":
            return u.conjugate()
        if name == "re":
            return complex(u.real)
        if name == "im":
            return complex(u.imag)
    except OverflowError as exc:
        raise PoleError(n, "overflow") from exc
    raise TypeError(f"unknown function {name}")


_NP = {
    "sin": "np.sin({})",
    "cos": "np.cos({})",
    "tan": "(np.sin({0})/np.cos({0}))",
    "cot": "(np.cos({0})/np.sin({0}))",
    "exp": "np.exp({})",
    "ln": "np.log({})",
    "sqrt": "np.sqrt({})",
    "abs": "(np.abs({})+0j)",
    "conj": "np.conj({})",
    "re": "(np.real({})+0j)",
    "im": "(np.imag({})+0j)",
}


def lambdify(e, names):
    """Compile ``e`` to ``f(*arrays) -> complex ndarray`` over the given symbol order.

    Poles surface as ``inf``/``nan`` entries; callers decide how to treat them.
    Shared subtrees are computed once.
    """
    names = list(names)
    missing = free_symbols(e) - set(names)
    if missing:
        raise UnboundSymbolError(missing)
    lines = []
    temps = {}
    arg_names = [f"_a{k}" for k in range(len(names))]
    index = {n: a for n, a in zip(names, arg_names)}

    def emit(n):
        k = id(n)
        if k in temps:
            return temps[k]
        if isinstance(n, (Num, Float)):
            code = repr(float(n.value))
            temps[k] = f"({code}+0j)"
            return temps[k]
        if isinstance(n, Symbol):
            temps[k] = index[n.name]
            return temps[k]
        if isinstance(n, ImaginaryUnit):
            return "1j"
        if isinstance(n, Constant):
            return repr(math.pi)
        if n is POLE:
            expr = "np.full(_shape, np.nan+0j)"
        elif isinstance(n, Add):
            expr = " + ".join(emit(t) for t in n.args)
        elif isinstance(n, Mul):
            expr = " * ".join(emit(f) for f in n.args)
        elif isinstance(n, Pow):
            b = emit(n.base)
            if isinstance(n.exp, Num) and n.exp.is_integer:
                p = int(n.exp.value)
                expr = f"_ipow({b}, {p})"
            else:
                expr = f"({b})**({emit(n.exp)})"
        elif isinstance(n, Func):
            expr = _NP[n.name].format(emit(n.arg))
        else:
            raise TypeError(type(n).__name__)
        t = f"_t{len(lines)}"
        lines.append(f"    {t} = {expr}")
        temps[k] = t
        return t

    result = emit(e)
    src = [f"def _f({', '.join(arg_names)}):"]
    src.append(f"    _shape = np.broadcast({', '.join(arg_names + ['0'])}).shape")
    src.extend(lines)
    src.append(f"    return np.broadcast_to(np.asarray({result}, dtype=complex), _shape).copy()")
    scope = {"np": np, "_ipow": _ipow}
    exec("\n".join(src), scope)  # noqa: S102 - generated from a trusted expression tree
    raw = scope["_f"]

    def f(*arrays):
        arrays = [np.asarray(a, dtype=complex) for a in arrays]
        with np.errstate(all="ignore"):
            return raw(*arrays)

    f.names = tuple(names)
    f.source = "\n".join(src)
    return f


def _ipow(b, p):
    if p >= 0:
        return b**p
    return 1.0 / (b ** (-p))
