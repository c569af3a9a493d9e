from .core import (
    FUNCTIONS, I, ONE, PI, POLE, ZERO, Add, Constant, Expr, Float, Func, ImaginaryUnit, Mul, Num,
    Pow, Symbol, add, count_ops, free_symbols, func, has_pole, mul, number, power, substitute,
    sympify, symbols,
)
from .parser import ParseError, UnknownFunctionError, parse
from .printer import to_str
from .calculus import differentiate
from .evaluate import EvaluationError, PoleError, UnboundSymbolError, evaluate, lambdify
from .simplify import expand, factor_terms, simplify, split_complex, together
from .equivalence import InconclusiveError, Verdict, equivalent
