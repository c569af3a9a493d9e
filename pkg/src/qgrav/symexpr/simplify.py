"""Fixed rewrite set used to keep expressions compact.

All symbols are treated as real-valued, which holds for the chart
coordinates and physical parameters this engine works with; ``re``, ``im``
and ``conj`` are resolved under that assumption.  Evaluation never relies
on it.
"""

from __future__ import annotations

from .core import (
    ONE,
    ZERO,
    Add,
    Constant,
    Float,
    Func,
    I,
    ImaginaryUnit,
    Mul,
    Num,
    Pow,
    Symbol,
    add,
    as_base_exp,
    as_coeff_mul,
    count_ops,
    func,
    is_number,
    mul,
    number,
    power,
    replace_nodes,
)

MAX_ROUNDS = 8
TOGETHER_SIZE_LIMIT = 3000
EXPAND_TERM_LIMIT = 4000


class _TooLarge(Exception):
    pass


# ---------------------------------------------------------------------------
# real/imaginary splitting


def _known_positive(e, cache):
    if is_number(e):
        return e.value > 0
    if isinstance(e, Constant):
        return True
    if isinstance(e, Func):
        if e.name == "exp":
            parts = split_complex(e.arg, cache)
            return parts is not None and parts[1] == ZERO
        return False
    if isinstance(e, Pow):
        if isinstance(e.exp, Num) and e.exp.is_integer and e.exp.value % 2 == 0:
            return False  # may vanish
        return _known_positive(e.base, cache)
    if isinstance(e, Mul):
        return all(_known_positive(f, cache) for f in e.args)
    return False


def split_complex(e, cache=None):
    """Return ``(re, im)`` of ``e`` with all symbols real, or None if not separable."""
    cache = {} if cache is None else cache
    k = id(e)
    if k in cache:
        return cache[k][1]
    out = _split(e, cache)
    cache[k] = (e, out)
    return out


def _cmul(p, q):
    a, b = p
    c, d = q
    if b == ZERO and d == ZERO:
        return mul(a, c), ZERO
    return add(mul(a, c), mul(-1, b, d)), add(mul(a, d), mul(b, c))


def _split(e, cache):
    if isinstance(e, (Num, Float, Symbol, Constant)):
        return e, ZERO
    if isinstance(e, ImaginaryUnit):
        return ZERO, ONE
    if isinstance(e, Add):
        res, ims = [], []
        for t in e.args:
            p = split_complex(t, cache)
            if p is None:
                return None
            res.append(p[0])
            ims.append(p[1])
        return add(*res), add(*ims)
    if isinstance(e, Mul):
        merged = _merge_exponentials(e)
        if merged is not e:
            return split_complex(merged, cache)
        real, acc = [], None
        for f in e.args:
            p = split_complex(f, cache)
            if p is None:
                return None
            if p[1] == ZERO:
                real.append(p[0])
            else:
                acc = p if acc is None else _cmul(acc, p)
        r = mul(*real)
        if acc is None:
            return r, ZERO
        return mul(r, acc[0]), mul(r, acc[1])
    if isinstance(e, Pow):
        pb = split_complex(e.base, cache)
        px = split_complex(e.exp, cache)
        if pb is None or px is None or px[1] != ZERO:
            return None
        int_exp = isinstance(e.exp, Num) and e.exp.is_integer
        if int_exp and isinstance(e.base, Func) and e.base.name == "exp":
            return split_complex(func("exp", mul(e.exp, e.base.arg)), cache)
        if pb[1] == ZERO:
            if int_exp or _known_positive(e.base, cache):
                return e, ZERO
            return None
        if not int_exp:
            return None
        n = int(e.exp.value)
        if abs(n) > 8:
            return None
        base = pb
        if n < 0:
            mod2 = add(mul(pb[0], pb[0]), mul(pb[1], pb[1]))
            base = (mul(pb[0], power(mod2, -1)), mul(-1, pb[1], power(mod2, -1)))
            n = -n
        acc = base
        for _ in range(n - 1):
            acc = _cmul(acc, base)
        return acc
    if isinstance(e, Func):
        if e.name in ("re", "im", "abs"):
            return e, ZERO
        p = split_complex(e.arg, cache)
        if e.name == "conj":
            return None if p is None else (p[0], mul(-1, p[1]))
        if p is None:
            return None
        wr, wi = p
        if e.name == "exp":
            if wi == ZERO:
                return e, ZERO
            m = func("exp", wr)
            return mul(m, func("cos", wi)), mul(m, func("sin", wi))
        if wi != ZERO:
            return None
        if e.name in ("sin", "cos", "tan", "cot"):
            return e, ZERO
        if e.name in ("ln", "sqrt") and _known_positive(e.arg, cache):
            return e, ZERO
        return None
    return None


def _conj(e, cache):
    """Push conjugation inward structurally; None if not possible."""
    p = split_complex(e, cache)
    if p is not None and p[1] == ZERO:
        return e
    if isinstance(e, ImaginaryUnit):
        return mul(-1, I)
    if isinstance(e, (Add, Mul)):
        parts = [_conj(a, cache) for a in e.args]
        if any(x is None for x in parts):
            return None
        return e.rebuild(parts)
    if isinstance(e, Pow):
        px = split_complex(e.exp, cache)
        if px is None or px[1] != ZERO:
            return None
        b = _conj(e.base, cache)
        if b is None or not (isinstance(e.exp, Num) and e.exp.is_integer):
            return None
        return power(b, e.exp)
    if isinstance(e, Func) and e.name in ("exp", "sin", "cos", "tan", "cot"):
        a = _conj(e.arg, cache)
        return None if a is None else func(e.name, a)
    if isinstance(e, Func) and e.name == "conj":
        return e.arg
    if p is not None:
        return add(p[0], mul(-1, I, p[1]))
    return None


# ---------------------------------------------------------------------------
# node-level rewrites


def _terms_as_powers(t):
    c, factors = as_coeff_mul(t)
    powers = {}
    for f in factors:
        b, x = as_base_exp(f)
        powers[b] = x
    return c, powers


def _from_powers(c, powers):
    return mul(number(c), *[power(b, x) for b, x in powers.items()])


def _drop(powers, base, amount):
    """Copy of ``powers`` with ``base``'s exponent lowered by ``amount``, or None."""
    x = powers.get(base)
    if not (isinstance(x, Num) and x.value >= amount):
        return None
    out = dict(powers)
    rest = x.value - amount
    if rest:
        out[base] = number(rest)
    else:
        del out[base]
    return out


def pythagorean(e):
    """Apply sin^2+cos^2 -> 1 (and 1-sin^2 -> cos^2, 1-cos^2 -> sin^2) within a sum."""
    if not isinstance(e, Add):
        return e
    terms = list(e.args)
    changed = True
    while changed and len(terms) > 1:
        changed = False
        index = {}
        for k, t in enumerate(terms):
            c, powers = _terms_as_powers(t)
            index.setdefault(("1", _from_powers(1, powers)), []).append((k, c))
            for b in powers:
                if isinstance(b, Func) and b.name in ("sin", "cos"):
                    rest = _drop(powers, b, 2)
                    if rest is not None:
                        key = (b.name, b.arg, _from_powers(1, rest))
                        index.setdefault(key, []).append((k, c))
        for key, hits in index.items():
            if key[0] != "sin":
                continue
            _, u, m = key
            for k1, c1 in hits:
                # sin^2 M c + cos^2 M c -> M c
                for k2, c2 in index.get(("cos", u, m), ()):
                    if k2 != k1 and c2 == c1:
                        return _rebuild_sum(terms, (k1, k2), mul(c1, m))
                # M c - M c sin^2 -> M c cos^2
                for k2, c2 in index.get(("1", m), ()):
                    if k2 != k1 and c2 == -c1:
                        return _rebuild_sum(terms, (k1, k2), mul(c2, m, power(func("cos", u), 2)))
        for key, hits in index.items():
            if key[0] != "cos":
                continue
            _, u, m = key
            for k1, c1 in hits:
                # cos^2 M c - sin^2 M c -> cos(2u) M c
                for k2, c2 in index.get(("sin", u, m), ()):
                    if k2 != k1 and c2 == -c1:
                        return _rebuild_sum(terms, (k1, k2), mul(c1, m, func("cos", mul(2, u))))
                for k2, c2 in index.get(("1", m), ()):
                    if k2 != k1 and c2 == -c1:
                        return _rebuild_sum(terms, (k1, k2), mul(c2, m, power(func("sin", u), 2)))
    return e


def _rebuild_sum(terms, drop, extra):
    rest = [t for k, t in enumerate(terms) if k not in drop]
    return pythagorean(add(*rest, extra))


def factor_terms(e):
    """Pull factors common to every term of a sum out in front of it."""
    if not isinstance(e, Add):
        return e
    infos = [_terms_as_powers(t) for t in e.args]
    common = dict(infos[0][1])
    for _, powers in infos[1:]:
        for b in list(common):
            if b not in powers:
                del common[b]
                continue
            x, y = common[b], powers[b]
            if x == y:
                continue
            if is_number(x) and is_number(y):
                common[b] = x if x.value <= y.value else y
            else:
                del common[b]
    if not common:
        return e
    rest = []
    for c, powers in infos:
        remaining = {}
        for b, x in powers.items():
            if b in common:
                x = add(x, mul(-1, common[b]))
                if x == ZERO:
                    continue
            remaining[b] = x
        rest.append(_from_powers(c, remaining))
    return mul(*[power(b, x) for b, x in common.items()], add(*rest))


def _merge_exponentials(e):
    if not isinstance(e, Mul):
        return e
    args = []
    others = []
    powered = False
    for f in e.args:
        b, x = as_base_exp(f)
        if isinstance(b, Func) and b.name == "exp" and isinstance(x, Num) and x.is_integer:
            args.append(mul(x, b.arg))
            powered = powered or x != ONE
        else:
            others.append(f)
    if len(args) < 2 and not powered:
        return e
    return mul(*others, func("exp", add(*args)))


def _rewrite(n, cache):
    if isinstance(n, Func):
        if n.name == "cot":
            return mul(func("cos", n.arg), power(func("sin", n.arg), -1))
        if n.name == "tan":
            return mul(func("sin", n.arg), power(func("cos", n.arg), -1))
        if n.name in ("re", "im"):
            p = split_complex(n.arg, cache)
            if p is not None:
                return p[0] if n.name == "re" else p[1]
            return None
        if n.name == "conj":
            return _conj(n.arg, cache)
        if n.name == "abs":
            if isinstance(n.arg, Func) and n.arg.name == "exp":
                p = split_complex(n.arg.arg, cache)
                if p is not None:
                    return func("exp", p[0])
            return None
        return None
    if isinstance(n, Pow):
        b, x = n.base, n.exp
        if isinstance(x, Num) and x.is_integer:
            if isinstance(b, Func) and b.name == "exp":
                return func("exp", mul(x, b.arg))
            if isinstance(b, Func) and b.name == "sqrt" and x.value % 2 == 0:
                return power(b.arg, x.value / 2)
        return None
    if isinstance(n, Mul):
        out = _merge_exponentials(n)
        return None if out is n else out
    if isinstance(n, Add):
        out = pythagorean(n)
        if isinstance(out, Add):
            out = factor_terms(out)
        return None if out is n else out
    return None


# ---------------------------------------------------------------------------
# rational normalization


def expand(e, limit=EXPAND_TERM_LIMIT):
    """Distribute products over sums (and positive integer powers of sums)."""

    def terms_of(n):
        if isinstance(n, Add):
            out = []
            for t in n.args:
                out.extend(terms_of(t))
            return out
        if isinstance(n, Mul):
            acc = [ONE]
            for f in n.args:
                ft = terms_of(f)
                if len(acc) * len(ft) > limit:
                    raise _TooLarge
                acc = [mul(a, b) for a in acc for b in ft]
            return acc
        if isinstance(n, Pow) and isinstance(n.base, Add) and isinstance(n.exp, Num) and n.exp.is_integer and 1 < n.exp.value <= 8:
            base = terms_of(n.base)
            acc = [ONE]
            for _ in range(int(n.exp.value)):
                if len(acc) * len(base) > limit:
                    raise _TooLarge
                acc = [mul(a, b) for a in acc for b in base]
            return acc
        return [n]

    return add(*terms_of(e))


def together(e):
    """Combine a sum over a common (syntactic) denominator with expanded numerator."""
    if not isinstance(e, Add):
        return e
    parts = []
    lcd = {}
    for t in e.args:
        c, factors = as_coeff_mul(t)
        num, den = [], {}
        for f in factors:
            b, x = as_base_exp(f)
            if is_number(x) and x.value < 0:
                den[b] = -x.value
                lcd[b] = max(lcd.get(b, 0), -x.value)
            else:
                num.append(f)
        parts.append((c, num, den))
    if not lcd:
        return e
    numer_terms = []
    for c, num, den in parts:
        scale = [power(b, k - den.get(b, 0)) for b, k in lcd.items()]
        numer_terms.append(mul(number(c), *num, *scale))
    numerator = expand(add(*numer_terms))
    numerator = factor_terms(pythagorean(numerator))
    return mul(numerator, *[power(b, -k) for b, k in lcd.items()])


# ---------------------------------------------------------------------------


def _simplify_once(e, cache, use_together):
    def rule(n):
        out = _rewrite(n, cache)
        cur = n if out is None else out
        if use_together and isinstance(cur, Add) and count_ops(cur) <= TOGETHER_SIZE_LIMIT:
            try:
                cand = together(cur)
            except _TooLarge:
                cand = cur
            if cand is not cur and count_ops(cand) < count_ops(cur):
                cur = cand
        return None if cur is n else cur

    return replace_nodes(e, rule)


def simplify(e, together_candidates=True):
    """Apply the rewrite set until a fixed point (bounded number of rounds).

    Rewrites: constant folding, cot/tan to sin/cos, merging of exponentials,
    power merging, resolution of re/im/conj, sin^2+cos^2=1, extraction of
    common factors and, when it shortens the result, normalization over a
    common denominator.
    """
    cache = {}
    for _ in range(MAX_ROUNDS):
        new = _simplify_once(e, cache, together_candidates)
        if new == e:
            return new
        e = new
    return e
