"""Tiny arithmetic expression language for time functions in configs.

Grammar is Python expression syntax restricted to numbers, names bound at
evaluation time (``t`` plus any index variables), ``+ - * / **``, unary
minus, and the functions ``sin cos exp pow``. ``pi`` and ``e`` are constants.
"""

from __future__ import annotations

import ast
import math
import operator

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_UNARY = {ast.USub: operator.neg, ast.UAdd: operator.pos}
_FUNCS = {"sin": math.sin, "cos": math.cos, "exp": math.exp, "pow": math.pow}
_CONSTS = {"pi": math.pi, "e": math.e}


class ExpressionError(ValueError):
    pass


class Expression:
    """A parsed expression; call with keyword bindings, e.g. ``expr(t=0.5, k=2)``."""

    def __init__(self, source: str, variables=("t",)):
        if isinstance(source, (int, float)):
            source = repr(float(source))
        self.source = str(source)
        self.variables = frozenset(variables)
        try:
            tree = ast.parse(self.source.replace("^", "**"), mode="eval")
        except SyntaxError as exc:
            raise ExpressionError(f"cannot parse {self.source!r}: {exc.msg}") from None
        self._body = tree.body
        self._used = set()
        self._check(self._body)

    def _check(self, node):
        if isinstance(node, ast.Constant):
            if not isinstance(node.value, (int, float)) or isinstance(node.value, bool):
                raise ExpressionError(f"unsupported literal {node.value!r} in {self.source!r}")
        elif isinstance(node, ast.Name):
            if node.id not in self.variables and node.id not in _CONSTS:
                raise ExpressionError(f"unknown name {node.id!r} in {self.source!r}")
            if node.id in self.variables:
                self._used.add(node.id)
        elif isinstance(node, ast.BinOp):
            if type(node.op) not in _BINOPS:
                raise ExpressionError(f"unsupported operator in {self.source!r}")
            self._check(node.left)
            self._check(node.right)
        elif isinstance(node, ast.UnaryOp):
            if type(node.op) not in _UNARY:
                raise ExpressionError(f"unsupported operator in {self.source!r}")
            self._check(node.operand)
        elif isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _FUNCS or node.keywords:
                raise ExpressionError(f"unsupported call in {self.source!r}")
            want = 2 if node.func.id == "pow" else 1
            if len(node.args) != want:
                raise ExpressionError(f"{node.func.id} takes {want} argument(s) in {self.source!r}")
            for arg in node.args:
                self._check(arg)
        else:
            raise ExpressionError(f"unsupported syntax {type(node).__name__} in {self.source!r}")

    def _eval(self, node, env):
        if isinstance(node, ast.Constant):
            return float(node.value)
        if isinstance(node, ast.Name):
            return float(env[node.id]) if node.id in env else _CONSTS[node.id]
        if isinstance(node, ast.BinOp):
            return _BINOPS[type(node.op)](self._eval(node.left, env), self._eval(node.right, env))
        if isinstance(node, ast.UnaryOp):
            return _UNARY[type(node.op)](self._eval(node.operand, env))
        return _FUNCS[node.func.id](*(self._eval(a, env) for a in node.args))

    def __call__(self, **env) -> float:
        missing = sorted(v for v in self._used if v not in env)
        if missing:
            raise ExpressionError(f"unbound variable(s) {missing} for {self.source!r}")
        try:
            return float(self._eval(self._body, env))
        except (ZeroDivisionError, OverflowError, ValueError) as exc:
            raise ExpressionError(f"evaluating {self.source!r} at {env}: {exc}") from None

    def __repr__(self):
        return f"Expression({self.source!r})"
