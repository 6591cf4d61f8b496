"""Small arithmetic expression grammar for user-supplied potentials.

Grammar: the variable x, numeric constants, + - * / ^, and the calls
exp, log, sinh, cosh, max.  '^' means power.  Parsed through the ast module
with a strict node whitelist, so no other names or calls can execute.
"""

from __future__ import annotations

import ast
import math
from typing import Callable

def _saturating(fn, odd: bool = False):
    # expressions must stay total on the line: intermediate float overflow
    # saturates to the correct signed infinity instead of raising, so bounded
    # combinations like 1/(1+exp(x)) stay evaluable everywhere
    def wrapped(v):
        try:
            return fn(v)
        except OverflowError:
            return math.copysign(math.inf, v) if odd else math.inf
    return wrapped


_ALLOWED_CALLS = {"exp": _saturating(math.exp), "log": math.log,
                  "sinh": _saturating(math.sinh, odd=True),
                  "cosh": _saturating(math.cosh), "max": max}
_ALLOWED_NAMES = {"x", "pi", "e"}
_ALLOWED_BINOPS = (ast.Add, ast.Sub, ast.Mult, ast.Div, ast.Pow)
_ALLOWED_UNARY = (ast.USub, ast.UAdd)


class ExpressionError(ValueError):
    pass


def _validate(node: ast.AST, src: str) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body, src)
    elif isinstance(node, ast.BinOp):
        if not isinstance(node.op, _ALLOWED_BINOPS):
            raise ExpressionError(f"operator not allowed in {src!r}")
        _validate(node.left, src)
        _validate(node.right, src)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, _ALLOWED_UNARY):
            raise ExpressionError(f"unary operator not allowed in {src!r}")
        _validate(node.operand, src)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _ALLOWED_CALLS):
            raise ExpressionError(f"only {sorted(_ALLOWED_CALLS)} may be called in {src!r}")
        if node.keywords:
            raise ExpressionError(f"keyword arguments not allowed in {src!r}")
        for arg in node.args:
            _validate(arg, src)
    elif isinstance(node, ast.Name):
        if node.id not in _ALLOWED_NAMES:
            raise ExpressionError(f"unknown name {node.id!r} in {src!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ExpressionError(f"only numeric constants allowed in {src!r}")
    else:
        raise ExpressionError(f"syntax not allowed in {src!r}: {type(node).__name__}")


def parse_expression(src: str) -> Callable[[float], float]:
    """Compile an expression in x to a scalar function."""
    text = src.replace("^", "**")
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {src!r}: {exc.msg}") from None
    _validate(tree, src)
    code = compile(tree, "<potential-expression>", "eval")
    env = dict(_ALLOWED_CALLS, pi=math.pi, e=math.e)

    def f(x: float) -> float:
        return float(eval(code, {"__builtins__": {}}, dict(env, x=float(x))))

    # probe once so structural mistakes surface at parse time; domain errors
    # (log of a negative, etc.) are legitimate at single points
    try:
        f(0.0)
    except (ValueError, OverflowError, ZeroDivisionError):
        pass
    return f
