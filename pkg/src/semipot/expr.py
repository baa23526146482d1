"""Minimal arithmetic expressions for user-supplied Koenigs maps.

Grammar: complex literals (``2``, ``0.5``, ``3j``), the imaginary unit ``i``,
one free variable, ``+ - * /``, unary minus, parentheses, and the functions
``log``, ``exp``, ``sqrt`` (principal branches).  Anything else is rejected.
"""

from __future__ import annotations

import ast
from typing import Callable

import numpy as np

_FUNCS = {"log": np.log, "exp": np.exp, "sqrt": np.sqrt}
_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract, ast.Mult: np.multiply, ast.Div: np.divide}


class ExpressionError(ValueError):
    pass


def compile_expression(source: str, variable: str = "z") -> Callable[[np.ndarray], np.ndarray]:
    """Compile ``source`` into a vectorised complex function of ``variable``."""
    try:
        tree = ast.parse(source.strip(), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {source!r}: {exc.msg}") from None

    def build(node):
        if isinstance(node, ast.Constant):
            if isinstance(node.value, bool) or not isinstance(node.value, (int, float, complex)):
                raise ExpressionError(f"unsupported literal {node.value!r}")
            value = complex(node.value)
            return lambda z: value
        if isinstance(node, ast.Name):
            if node.id == variable:
                return lambda z: z
            if node.id == "i":
                return lambda z: 1j
            raise ExpressionError(f"unknown name {node.id!r}")
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = build(node.operand)
            if isinstance(node.op, ast.USub):
                return lambda z: -inner(z)
            return inner
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            op = _BINOPS[type(node.op)]
            left, right = build(node.left), build(node.right)
            return lambda z: op(left(z), right(z))
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords or len(node.args) != 1:
                raise ExpressionError("only log(.), exp(.), sqrt(.) calls are allowed")
            fn = _FUNCS[node.func.id]
            arg = build(node.args[0])
            return lambda z: fn(arg(z))
        raise ExpressionError(f"unsupported syntax: {ast.dump(node)}")

    body = build(tree.body)

    def evaluate(z):
        z = np.asarray(z, dtype=complex)
        with np.errstate(all="ignore"):
            out = np.asarray(body(z), dtype=complex)
        return np.broadcast_to(out, z.shape).copy() if out.shape != z.shape else out

    evaluate.source = source
    return evaluate
