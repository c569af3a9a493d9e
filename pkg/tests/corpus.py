"""Expressions shared by the derivative and round-trip tests.

All are finite and smooth for x, y in (0.2, 1.2).
"""

CORPUS = [
    "x",
    "x^2",
    "x^3 - 2*x + 1",
    "1/x",
    "x/y",
    "x^y",
    "x^-2",
    "sqrt(x)",
    "sqrt(x^2 + y^2)",
    "exp(x)",
    "exp(-x/y)",
    "exp(-x^2/2)",
    "ln(x)",
    "ln(x*y + 1)",
    "sin(x)",
    "cos(x)",
    "tan(x)",
    "cot(x)",
    "sin(x)^2 + cos(x)^2",
    "sin(x*y)",
    "cos(2*x - y)",
    "sin(x)*cos(y)",
    "cot(x)^2/(1 - x/3)^2",
    "(1/x^2)*(1 - cot(y)^2/(1 - x/3)^2)",
    "x*exp(-x/2)*sin(y)",
    "(1 - x/2)^2*exp(-x)",
    "x^2*sin(y)^2",
    "exp(i*x)",
    "exp(-i*x*y)",
    "re(exp(i*x))",
    "im(exp(i*x))*y",
    "conj(x + i*y)^2",
    "abs(x - 2)",
    "abs(exp(i*x)*y)",
    "(x + i)^3",
    "1/(x + i*y)",
    "re((x + i*y)^2)",
    "x*ln(x)",
    "exp(sin(x))",
    "sin(exp(x))",
    "sqrt(1 + sin(x)^2)",
    "ln(cos(x) + 2)",
    "x^(1/3)",
    "(x^2 + 1)^(-3/2)",
    "tan(x/2)*cot(y/3)",
    "2^x",
    "pi*x^2",
    "exp(-x)*cos(3*x)",
    "x*y/(x + y)",
    "(x - y)^4/(1 + x^2)",
]
