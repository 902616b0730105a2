"""Tiny parser for potentials and frozen points given on the command line.

Accepted: numbers, ``pi``, ``sqrt(c)``, ``t``, polynomials in ``t``, and
``sin(k t)`` / ``cos(k t)`` for integer ``k``, combined with ``+ - * / ^``.
Implicit multiplication (``2t``, ``2pi/3``) is allowed.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from collections import defaultdict

from .core import ClosedForm, FrozenArguments

_TOKEN = re.compile(r"\d+\.?\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|[A-Za-z_]+|\*\*|[-+*/^(),]|\S")
_FUNCS = {"sin", "cos", "sqrt"}
_NUMBER = re.compile(r"[\d.]")


class ExpressionError(ValueError):
    pass


class _Terms(dict):
    """Map from ``(kind, k)`` to coefficient, ``kind`` in ``poly, cos, sin``."""

    @classmethod
    def const(cls, c: float) -> "_Terms":
        return cls({("poly", 0): float(c)}) if c else cls()

    def constant(self) -> float | None:
        if all(key == ("poly", 0) for key in self):
            return self.get(("poly", 0), 0.0)
        return None

    def is_poly(self) -> bool:
        return all(kind == "poly" for kind, _ in self)

    def combine(self, other: "_Terms", sign: float) -> "_Terms":
        out = _Terms(self)
        for key, c in other.items():
            out[key] = out.get(key, 0.0) + sign * c
        return _Terms({k: v for k, v in out.items() if v})

    def scale(self, c: float) -> "_Terms":
        return _Terms({k: v * c for k, v in self.items() if v * c})

    def times(self, other: "_Terms") -> "_Terms":
        a, b = self.constant(), other.constant()
        if a is not None:
            return other.scale(a)
        if b is not None:
            return self.scale(b)
        if self.is_poly() and other.is_poly():
            out: dict = defaultdict(float)
            for (_, i), c in self.items():
                for (_, j), d in other.items():
                    out[("poly", i + j)] += c * d
            return _Terms({k: v for k, v in out.items() if v})
        raise ExpressionError("only polynomials may be multiplied together")


def _tokens(text: str) -> str:
    toks = _TOKEN.findall(text.strip().lower())
    out: list[str] = []
    for tok in toks:
        if out:
            prev = out[-1]
            left = _NUMBER.match(prev) or prev == ")" or (prev.isalpha() and prev not in _FUNCS)
            right = _NUMBER.match(tok) or tok == "(" or tok.isalpha()
            if left and right:
                out.append("*")
        out.append("**" if tok == "^" else tok)
    return " ".join(out)


_BINOPS = {ast.Add: 1.0, ast.Sub: -1.0}


def _eval(node) -> _Terms:
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return _Terms.const(node.value)
    if isinstance(node, ast.Name):
        if node.id == "t":
            return _Terms({("poly", 1): 1.0})
        if node.id == "pi":
            return _Terms.const(math.pi)
        raise ExpressionError(f"unknown name {node.id!r}")
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _eval(node.operand)
        return inner.scale(-1.0) if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        a, b = _eval(node.left), _eval(node.right)
        if type(node.op) in _BINOPS:
            return a.combine(b, _BINOPS[type(node.op)])
        if isinstance(node.op, ast.Mult):
            return a.times(b)
        if isinstance(node.op, ast.Div):
            c = b.constant()
            if c is None or c == 0:
                raise ExpressionError("division only by non-zero constants")
            return a.scale(1.0 / c)
        if isinstance(node.op, ast.Pow):
            p = b.constant()
            ca = a.constant()
            if ca is not None and p is not None:
                return _Terms.const(operator.pow(ca, p))
            if p is None or p < 0 or p != int(p) or not a.is_poly():
                raise ExpressionError("only polynomials may be raised to non-negative integer powers")
            out = _Terms.const(1.0)
            for _ in range(int(p)):
                out = out.times(a)
            return out
    if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) and len(node.args) == 1:
        name = node.func.id
        arg = _eval(node.args[0])
        c = arg.constant()
        if name == "sqrt":
            if c is None or c < 0:
                raise ExpressionError("sqrt takes a non-negative constant")
            return _Terms.const(math.sqrt(c))
        if name in ("sin", "cos"):
            if c is not None:
                return _Terms.const(getattr(math, name)(c))
            if set(arg) != {("poly", 1)}:
                raise ExpressionError(f"{name}() takes k*t with integer k")
            k = arg[("poly", 1)]
            if abs(k - round(k)) > 1e-12:
                raise ExpressionError(f"{name}() frequency {k} is not an integer")
            k = int(round(k))
            if name == "cos":
                return _Terms({("cos", abs(k)): 1.0})
            return _Terms({("sin", abs(k)): math.copysign(1.0, k)}) if k else _Terms()
    raise ExpressionError(f"unsupported expression: {ast.dump(node)}")


def _parse(text: str) -> _Terms:
    try:
        tree = ast.parse(_tokens(text), mode="eval")
    except SyntaxError as exc:
        raise ExpressionError(f"cannot parse {text!r}") from exc
    return _eval(tree)


def parse_constant(text: str) -> float:
    c = _parse(text).constant()
    if c is None:
        raise ExpressionError(f"{text!r} is not a constant")
    return c


def parse_potential(text: str) -> ClosedForm:
    """``"zero"``, ``"t"``, ``"1-cos(2t)"``, ``"t^2 - 3 sin(4t)"`` and similar."""
    if text.strip().lower() in ("zero", "0"):
        return ClosedForm()
    terms = _parse(text)
    size = {kind: 1 + max((k for kd, k in terms if kd == kind), default=-1) for kind in ("poly", "cos", "sin")}
    coeffs = {kind: [0.0] * n for kind, n in size.items()}
    for (kind, k), c in terms.items():
        coeffs[kind][k] += c
    return ClosedForm(tuple(coeffs["poly"]), tuple(coeffs["cos"]), tuple(coeffs["sin"]))


def parse_frozen(text: str) -> FrozenArguments:
    """Comma-separated constants, e.g. ``"1,sqrt(2)"`` or ``"pi/3, 2pi/3"``."""
    parts = text.split(",")
    if any(not p.strip() for p in parts):
        raise ExpressionError(f"empty entry in frozen argument list {text!r}")
    return FrozenArguments(tuple(parse_constant(p) for p in parts))
