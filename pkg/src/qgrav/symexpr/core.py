"""Immutable expression nodes and their canonicalizing constructors.

Every public constructor (:func:`add`, :func:`mul`, :func:`power`,
:func:`func`) returns a canonical node: sums and products are flattened,
like terms and like bases are collected, exact constants are folded and
children are sorted by a deterministic structural key, so two expressions
that differ only in operand order compare equal.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Number

FUNCTIONS = ("sin", "cos", "tan", "cot", "exp", "ln", "sqrt", "abs", "conj", "re", "im")


class Expr:
    """Base class of all expression nodes."""

    __slots__ = ("_hash", "_key", "_fs")
    kind = "expr"

    def _init(self, key):
        object.__setattr__(self, "_key", key)
        object.__setattr__(self, "_hash", hash(key))

    def __setattr__(self, name, value):
        raise AttributeError("Expr nodes are immutable")

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction, float)):
                return self == number(other)
            return NotImplemented
        return type(self) is type(other) and self._hash == other._hash and self._key == other._key

    def __ne__(self, other):
        eq = self.__eq__(other)
        return eq if eq is NotImplemented else not eq

    @property
    def args(self):
        return ()

    def rebuild(self, args):
        return self

    def __str__(self):
        from .printer import to_str

        return to_str(self)

    def __repr__(self):
        return f"{type(self).__name__}({self})"

    # operator sugar, always canonicalizing
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(-1, other))

    def __rsub__(self, other):
        return add(other, mul(-1, self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)

    def __neg__(self):
        return mul(-1, self)


class Num(Expr):
    """Exact integer or rational constant."""

    __slots__ = ("value",)
    kind = "number"

    def __init__(self, value):
        value = Fraction(value)
        object.__setattr__(self, "value", value)
        self._init((0, value, 0))

    @property
    def is_integer(self):
        return self.value.denominator == 1


class Float(Expr):
    """Inexact real constant; only produced by substitution of floats."""

    __slots__ = ("value",)
    kind = "float"

    def __init__(self, value):
        value = float(value)
        object.__setattr__(self, "value", value)
        self._init((0, value, 1))


class ImaginaryUnit(Expr):
    __slots__ = ()
    kind = "imaginary"

    def __init__(self):
        self._init((1,))


class Constant(Expr):
    """Named mathematical constant (only ``pi``)."""

    __slots__ = ("name",)
    kind = "constant"

    def __init__(self, name):
        object.__setattr__(self, "name", name)
        self._init((2, name))


class Symbol(Expr):
    __slots__ = ("name",)
    kind = "symbol"

    def __init__(self, name):
        object.__setattr__(self, "name", str(name))
        self._init((3, self.name))


class Func(Expr):
    __slots__ = ("name", "arg")
    kind = "function"

    def __init__(self, name, arg):
        object.__setattr__(self, "name", name)
        object.__setattr__(self, "arg", arg)
        self._init((4, name, arg._key))

    @property
    def args(self):
        return (self.arg,)

    def rebuild(self, args):
        return func(self.name, args[0])


class Pow(Expr):
    __slots__ = ("base", "exp")
    kind = "power"

    def __init__(self, base, exp):
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "exp", exp)
        self._init((5, base._key, exp._key))

    @property
    def args(self):
        return (self.base, self.exp)

    def rebuild(self, args):
        return power(args[0], args[1])


class Mul(Expr):
    __slots__ = ("_args",)
    kind = "product"

    def __init__(self, args):
        object.__setattr__(self, "_args", tuple(args))
        self._init((6, tuple(a._key for a in self._args)))

    @property
    def args(self):
        return self._args

    def rebuild(self, args):
        return mul(*args)


class Add(Expr):
    __slots__ = ("_args",)
    kind = "sum"

    def __init__(self, args):
        object.__setattr__(self, "_args", tuple(args))
        self._init((7, tuple(a._key for a in self._args)))

    @property
    def args(self):
        return self._args

    def rebuild(self, args):
        return add(*args)


class PoleMarker(Expr):
    """Absorbing marker left behind when an exact division by zero occurs."""

    __slots__ = ()
    kind = "pole"

    def __init__(self):
        self._init((8,))


_SMALL = {v: Num(v) for v in range(-4, 11)}
ZERO = _SMALL[0]
ONE = _SMALL[1]
TWO = _SMALL[2]
NEG_ONE = _SMALL[-1]
HALF = Num(Fraction(1, 2))
I = ImaginaryUnit()
PI = Constant("pi")
POLE = PoleMarker()


def number(value) -> Expr:
    """Wrap a Python number as a constant node (complex values become ``a + b*i``)."""
    if isinstance(value, Expr):
        return value
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return _SMALL.get(value) or Num(value)
    if isinstance(value, Fraction):
        if value.denominator == 1 and value.numerator in _SMALL:
            return _SMALL[value.numerator]
        return Num(value)
    if isinstance(value, complex):
        if value.imag == 0:
            return Float(value.real)
        return add(Float(value.real), mul(Float(value.imag), I))
    if isinstance(value, Number):
        return Float(float(value))
    raise TypeError(f"cannot convert {value!r} to an expression")


def sympify(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, str):
        return Symbol(value)
    return number(value)


def is_number(e) -> bool:
    return isinstance(e, (Num, Float))


def _numval(e):
    return e.value


def is_constant(e: Expr) -> bool:
    """True when ``e`` contains no symbols (may still be inexact, e.g. ``sin(1)``)."""
    return not free_symbols(e)


# ---------------------------------------------------------------------------
# structural helpers


def as_base_exp(e: Expr):
    if isinstance(e, Pow):
        return e.base, e.exp
    return e, ONE


def as_coeff_mul(e: Expr):
    """Split ``e`` into a numeric coefficient and a tuple of remaining factors."""
    if is_number(e):
        return e.value, ()
    if isinstance(e, Mul):
        if is_number(e.args[0]):
            return e.args[0].value, e.args[1:]
        return Fraction(1), e.args
    return Fraction(1), (e,)


def as_coeff_term(e: Expr):
    """Split ``e`` into ``(coefficient, monomial)``; the monomial of a number is ``None``."""
    c, rest = as_coeff_mul(e)
    if not rest:
        return c, None
    if len(rest) == 1:
        return c, rest[0]
    return c, Mul(rest)


def _with_coeff(c, m: Expr) -> Expr:
    if c == 1 and not isinstance(c, float):
        return m
    if isinstance(m, Mul):
        return Mul((number(c),) + m.args)
    return Mul((number(c), m))


def _factor_key(f: Expr):
    b, e = as_base_exp(f)
    return (b._key, e._key)


def _term_key(t: Expr):
    c, m = as_coeff_term(t)
    return ((), c) if m is None else (m._key, c)


def could_extract_minus_sign(e: Expr) -> bool:
    if is_number(e):
        return e.value < 0
    if isinstance(e, Mul):
        return is_number(e.args[0]) and e.args[0].value < 0
    if isinstance(e, Add):
        neg = sum(1 for t in e.args if could_extract_minus_sign(t))
        pos = len(e.args) - neg
        if neg != pos:
            return neg > pos
        return could_extract_minus_sign(e.args[0])
    return False


def _flatten(args, cls):
    out = []
    stack = list(reversed(args))
    while stack:
        a = sympify(stack.pop())
        if isinstance(a, cls):
            stack.extend(reversed(a.args))
        else:
            out.append(a)
    return out


def _num_add(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) + float(b)
    return a + b


def _num_mul(a, b):
    if isinstance(a, float) or isinstance(b, float):
        return float(a) * float(b)
    return a * b


# ---------------------------------------------------------------------------
# constructors


def add(*args) -> Expr:
    const = Fraction(0)
    terms = {}
    for a in _flatten(args, Add):
        if a is POLE:
            return POLE
        if is_number(a):
            const = _num_add(const, a.value)
            continue
        c, m = as_coeff_term(a)
        if m in terms:
            terms[m] = _num_add(terms[m], c)
        else:
            terms[m] = c
    out = [_with_coeff(c, m) for m, c in terms.items() if c != 0]
    if const != 0:
        out.append(number(const))
    if not out:
        return ZERO
    if len(out) == 1:
        return out[0]
    out.sort(key=_term_key)
    return Add(out)


def mul(*args) -> Expr:
    coeff = Fraction(1)
    powers = {}
    for a in _flatten(args, Mul):
        if a is POLE:
            return POLE
        if is_number(a):
            coeff = _num_mul(coeff, a.value)
            continue
        b, e = as_base_exp(a)
        if isinstance(b, Add) and isinstance(e, Num) and e.is_integer:
            lead, monic = _monic(b)
            if lead != 1:
                coeff = _num_mul(coeff, lead ** int(e.value))
                b = monic
        powers.setdefault(b, []).append(e)
    if coeff == 0:
        return ZERO
    factors = []
    for b, exps in powers.items():
        e = exps[0] if len(exps) == 1 else add(*exps)
        if e == ZERO:
            continue
        p = power(b, e) if (len(exps) > 1 or b is I or is_number(b)) else (b if e == ONE else Pow(b, e))
        if p is POLE:
            return POLE
        if is_number(p):
            coeff = _num_mul(coeff, p.value)
        elif isinstance(p, Mul):
            c, rest = as_coeff_mul(p)
            coeff = _num_mul(coeff, c)
            factors.extend(rest)
        else:
            factors.append(p)
    if coeff == 0:
        return ZERO
    if not factors:
        return number(coeff)
    factors.sort(key=_factor_key)
    unit = coeff == 1 and not isinstance(coeff, float)
    if len(factors) == 1:
        f = factors[0]
        if unit:
            return f
        if isinstance(f, Add):
            return add(*[mul(number(coeff), t) for t in f.args])
        return Mul((number(coeff), f))
    if unit:
        return Mul(factors)
    return Mul([number(coeff)] + factors)


def _monic(s: Add):
    """Return ``(c, s/c)`` where c is the coefficient of the leading term of ``s``."""
    lead, _ = as_coeff_term(s.args[0])
    if lead == 1:
        return lead, s
    return lead, _scaled_add(s, 1 / lead if isinstance(lead, float) else Fraction(1) / lead)


def _scaled_add(s: Add, k) -> Add:
    out = []
    for t in s.args:
        c, m = as_coeff_term(t)
        c = _num_mul(c, k)
        out.append(number(c) if m is None else _with_coeff(c, m))
    return Add(out)


def _int_root(n: int, k: int):
    """Exact k-th root of a non-negative integer, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _pow_numbers(b, e):
    """Fold ``b**e`` for numeric b, e when exact; return None to keep symbolic."""
    bv, ev = b.value, e.value
    if isinstance(bv, float) or isinstance(ev, float):
        if float(bv) < 0 and float(ev) != int(float(ev)):
            return None
        if float(bv) == 0 and float(ev) < 0:
            return POLE
        return Float(float(bv) ** float(ev))
    if bv == 0:
        return POLE if ev < 0 else (ZERO if ev > 0 else ONE)
    if ev.denominator == 1:
        return number(bv ** int(ev))
    q = ev.denominator
    p = ev.numerator
    sign = 1
    if bv < 0:
        if q == 2:
            sign = -1
        else:
            return None
    num = _int_root(abs(bv.numerator), q)
    den = _int_root(bv.denominator, q)
    if num is None or den is None:
        return None
    root = Fraction(num, den)
    if sign < 0:
        # (-x)^(p/2) = (sqrt(x) i)^p
        return mul(number(root**p), power(I, p))
    return number(root**p)


def power(base, exp) -> Expr:
    b = sympify(base)
    e = sympify(exp)
    if b is POLE or e is POLE:
        return POLE
    if e == ZERO:
        return ONE
    if e == ONE:
        return b
    if b == ONE:
        return ONE
    if is_number(b) and is_number(e):
        folded = _pow_numbers(b, e)
        if folded is not None:
            return folded
        return Pow(b, e)
    if b == ZERO:
        if is_number(e):
            return POLE if e.value < 0 else ZERO
        return Pow(b, e)
    if b is I and isinstance(e, Num) and e.is_integer:
        k = int(e.value) % 4
        return (ONE, I, NEG_ONE, Mul((NEG_ONE, I)))[k]
    int_exp = isinstance(e, Num) and e.is_integer
    if isinstance(b, Add) and int_exp:
        lead, monic = _monic(b)
        if lead != 1:
            return mul(number(lead) ** e, Pow(monic, e))
    if isinstance(b, Pow) and int_exp:
        return power(b.base, mul(b.exp, e))
    if isinstance(b, Mul) and int_exp:
        return mul(*[power(f, e) for f in b.args])
    return Pow(b, e)


def func(name: str, arg) -> Expr:
    if name not in FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    a = sympify(arg)
    if a is POLE:
        return POLE
    from .functions import evaluate_special

    special = evaluate_special(name, a)
    if special is not None:
        return special
    return Func(name, a)


def symbols(names: str):
    parts = names.replace(",", " ").split()
    return tuple(Symbol(n) for n in parts)


# ---------------------------------------------------------------------------
# traversals


def free_symbols(e: Expr) -> frozenset:
    """Names of all symbols occurring in ``e`` (cached on the node)."""
    try:
        return e._fs
    except AttributeError:
        pass
    stack = [(e, False)]
    while stack:
        n, ready = stack.pop()
        if hasattr(n, "_fs"):
            continue
        if isinstance(n, Symbol):
            object.__setattr__(n, "_fs", frozenset((n.name,)))
        elif not n.args:
            object.__setattr__(n, "_fs", frozenset())
        elif ready:
            fs = frozenset().union(*(a._fs for a in n.args))
            object.__setattr__(n, "_fs", fs)
        else:
            stack.append((n, True))
            stack.extend((a, False) for a in n.args if not hasattr(a, "_fs"))
    return e._fs


def has_pole(e: Expr) -> bool:
    return any(n is POLE for n in preorder(e))


def preorder(e: Expr):
    stack = [e]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(n.args))


def count_ops(e: Expr) -> int:
    """Number of nodes in the tree (shared subtrees counted each time)."""
    memo = {}

    def walk(n):
        k = id(n)
        if k in memo:
            return memo[k]
        v = 1 + sum(walk(a) for a in n.args)
        memo[k] = v
        return v

    return walk(e)


def substitute(e: Expr, mapping) -> Expr:
    """Replace symbols by expressions or numbers and re-canonicalize.

    ``mapping`` keys may be symbol names or :class:`Symbol` nodes.  Exact
    divisions by zero produced along the way collapse to :data:`POLE`.
    """
    table = {}
    for k, v in mapping.items():
        name = k.name if isinstance(k, Symbol) else str(k)
        table[name] = sympify(v)
    if not table:
        return e
    memo = {}

    def walk(n):
        k = id(n)
        if k in memo:
            return memo[k]
        if isinstance(n, Symbol):
            out = table.get(n.name, n)
        elif n.args:
            new = [walk(a) for a in n.args]
            out = n if all(x is y for x, y in zip(new, n.args)) else n.rebuild(new)
        else:
            out = n
        memo[k] = out
        return out

    return walk(e)


def replace_nodes(e: Expr, fn) -> Expr:
    """Bottom-up rewrite: ``fn(node)`` returns a replacement or None to keep it."""
    memo = {}

    def walk(n):
        k = id(n)
        if k in memo:
            return memo[k]
        if n.args:
            new = [walk(a) for a in n.args]
            m = n if all(x is y for x, y in zip(new, n.args)) else n.rebuild(new)
        else:
            m = n
        r = fn(m)
        out = m if r is None else r
        memo[k] = out
        return out

    return walk(e)
