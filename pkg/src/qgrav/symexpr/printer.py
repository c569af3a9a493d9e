"""Grammar-conformant printing.

The output always reparses with :func:`qgrav.symexpr.parse`.  A presentation
pass folds ``cos(u)^n / sin(u)^n`` back into ``cot(u)^n``.
"""

from __future__ import annotations

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
    as_base_exp,
    as_coeff_mul,
    could_extract_minus_sign,
    is_number,
    mul,
    number,
)

PREC_ADD = 1
PREC_NEG = 1.5
PREC_MUL = 2
PREC_POW = 3
PREC_ATOM = 4


def to_str(e) -> str:
    return _p(e)[0]


def _num_str(v):
    if isinstance(v, float):
        s = repr(v)
        return s, (PREC_NEG if v < 0 else PREC_ATOM)
    if v.denominator == 1:
        return str(v.numerator), (PREC_NEG if v < 0 else PREC_ATOM)
    return f"{v.numerator}/{v.denominator}", (PREC_NEG if v < 0 else PREC_MUL)


def _paren(item, prec):
    s, p = item
    return f"({s})" if p < prec else s


def _p(e):
    if isinstance(e, (Num, Float)):
        return _num_str(e.value)
    if isinstance(e, Symbol):
        return e.name, PREC_ATOM
    if isinstance(e, ImaginaryUnit):
        return "i", PREC_ATOM
    if isinstance(e, Constant):
        return e.name, PREC_ATOM
    if e is POLE:
        return "pole", PREC_ATOM
    if isinstance(e, Func):
        return f"{e.name}({to_str(e.arg)})", PREC_ATOM
    if isinstance(e, Add):
        return _add_str(e)
    if isinstance(e, Mul):
        return _mul_str(e)
    if isinstance(e, Pow):
        if is_number(e.exp) and e.exp.value < 0:
            return _mul_str(e)
        return _pow_str(e.base, e.exp)
    raise TypeError(f"cannot print {type(e).__name__}")


def _pow_str(base, exp):
    b = _paren(_p(base), PREC_ATOM)
    if isinstance(exp, Num) and exp.is_integer and exp.value >= 0:
        x = str(exp.value.numerator)
    else:
        x = _paren(_p(exp), PREC_ATOM)
    return f"{b}^{x}", PREC_POW


def _add_str(e):
    parts = []
    for k, t in enumerate(e.args):
        if k and could_extract_minus_sign(t) and not isinstance(t, Add):
            parts.append(" - " + _paren(_p(mul(-1, t)), PREC_MUL))
        elif k:
            parts.append(" + " + _paren(_p(t), PREC_MUL))
        else:
            parts.append(_paren(_p(t), PREC_ADD))
    return "".join(parts), PREC_ADD


def _cot_presentation(factors):
    """Replace matching ``cos(u)^n * sin(u)^-n`` pairs with ``cot(u)^n``."""
    sins = {}
    coss = {}
    for f in factors:
        b, x = as_base_exp(f)
        if isinstance(b, Func) and isinstance(x, Num) and x.is_integer:
            if b.name == "sin" and x.value < 0:
                sins[b.arg] = -x.value
            elif b.name == "cos" and x.value > 0:
                coss[b.arg] = x.value
    common = {u: min(n, coss[u]) for u, n in sins.items() if u in coss}
    if not common:
        return list(factors)
    out = []
    for f in factors:
        b, x = as_base_exp(f)
        if isinstance(b, Func) and b.name in ("sin", "cos") and b.arg in common:
            k = common[b.arg]
            rest = x.value + k if b.name == "sin" else x.value - k
            if rest:
                out.append(Pow(b, number(rest)) if rest != 1 else b)
            if b.name == "cos":
                cot = Func("cot", b.arg)
                out.append(cot if k == 1 else Pow(cot, number(k)))
        else:
            out.append(f)
    return out


def _mul_str(e):
    coeff, factors = as_coeff_mul(e)
    factors = _cot_presentation(factors)
    negative = coeff < 0
    coeff = -coeff if negative else coeff
    num, den, sums = [], [], []
    if isinstance(coeff, float):
        if coeff != 1.0:
            num.append(_num_str(coeff))
    else:
        if coeff.numerator != 1:
            num.append((str(coeff.numerator), PREC_ATOM))
        if coeff.denominator != 1:
            den.append((str(coeff.denominator), PREC_ATOM))
    for f in factors:
        b, x = as_base_exp(f)
        if is_number(x) and x.value < 0:
            pos = -x.value
            den.append(_p(b) if pos == 1 else _pow_str(b, number(pos)))
        elif isinstance(f, Add):
            sums.append(_p(f))
        else:
            num.append(_p(f))
    num_s = "*".join(_paren(it, PREC_MUL + 0.5) for it in num)
    if den:
        den_s = "*".join(_paren(it, PREC_POW) for it in den)
        if len(den) > 1:
            den_s = f"({den_s})"
    sum_s = "*".join(f"({s})" for s, _ in sums)
    if sums and (num or den):
        left = num_s or "1"
        if den:
            left = f"({left}/{den_s})"
        body = f"{left}*{sum_s}"
    elif sums:
        body = sum_s if not den else f"{sum_s}/{den_s}"
    else:
        body = num_s or "1"
        if den:
            body = f"{body}/{den_s}"
    if negative:
        return "-" + body, PREC_NEG
    return body, PREC_MUL
