"""Randomized numeric equivalence of two expressions."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import free_symbols
from .evaluate import lambdify

DEFAULT_INTERVAL = (0.2, 1.2)
DEFAULT_SEED = 20240611


class InconclusiveError(ArithmeticError):
    """Too many sample points landed on poles of either expression."""

    def __init__(self, usable, trials):
        self.usable = usable
        self.trials = trials
        super().__init__(f"only {usable} of {trials} sample points were finite")


@dataclass
class Verdict:
    equivalent: bool
    trials: int
    max_error: float
    counterexample: dict | None = None
    values: tuple | None = None
    skipped: int = 0
    notes: list = field(default_factory=list)

    def __bool__(self):
        return self.equivalent


def _sample(rng, spec, n):
    """Draw ``n`` values from an interval ``(lo, hi)`` or a union of intervals."""
    if isinstance(spec, (int, float)):
        return np.full(n, float(spec))
    if len(spec) == 2 and all(isinstance(v, (int, float)) for v in spec):
        spec = [spec]
    widths = np.array([hi - lo for lo, hi in spec], dtype=float)
    pick = rng.choice(len(spec), size=n, p=widths / widths.sum())
    lo = np.array([spec[k][0] for k in pick])
    hi = np.array([spec[k][1] for k in pick])
    return lo + (hi - lo) * rng.random(n)


def equivalent(e1, e2, domain=None, trials=64, tol=1e-9, seed=DEFAULT_SEED, fixed=None):
    """Compare ``e1`` and ``e2`` at random points.

    ``domain`` maps symbol names to an interval or a list of intervals;
    unlisted symbols use :data:`DEFAULT_INTERVAL`.  ``fixed`` pins symbols to
    values.  A point fails when ``|e1 - e2| > tol * (1 + |e1|)``.  Raises
    :class:`InconclusiveError` when more than half the points hit poles.
    """
    domain = dict(domain or {})
    fixed = dict(fixed or {})
    names = sorted(free_symbols(e1) | free_symbols(e2))
    rng = np.random.default_rng(seed)
    cols = []
    for name in names:
        if name in fixed:
            cols.append(np.full(trials, float(fixed[name])))
        else:
            cols.append(_sample(rng, domain.get(name, DEFAULT_INTERVAL), trials))
    v1 = lambdify(e1, names)(*cols) if names else lambdify(e1, [])() * np.ones(trials)
    v2 = lambdify(e2, names)(*cols) if names else lambdify(e2, [])() * np.ones(trials)
    v1 = np.broadcast_to(v1, (trials,))
    v2 = np.broadcast_to(v2, (trials,))
    ok = np.isfinite(v1) & np.isfinite(v2)
    usable = int(ok.sum())
    if usable * 2 < trials:
        raise InconclusiveError(usable, trials)
    err = np.abs(v1 - v2)
    bound = tol * (1 + np.abs(v1))
    bad = ok & (err > bound)
    max_error = float(err[ok].max()) if usable else 0.0
    if bad.any():
        k = int(np.argmax(np.where(bad, err / bound, -1)))
        point = {n: float(c[k]) for n, c in zip(names, cols)}
        return Verdict(False, trials, max_error, point, (complex(v1[k]), complex(v2[k])), trials - usable)
    return Verdict(True, trials, max_error, skipped=trials - usable)
