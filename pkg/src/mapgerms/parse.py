"""Parser for the germ input grammar.

Polynomials in ``x`` and ``y`` with rational coefficients, ``^`` (or ``**``)
for exponents, and explicit ``*`` for every product.  A germ is a
parenthesised pair ``"(f1, f2)"``.  Parsing goes through :mod:`ast`, so
``2x`` (implicit multiplication) is rejected as a syntax error.
"""

from __future__ import annotations

import ast
from fractions import Fraction

from .jets import DEFAULT_ORDER, EXACT, Jet


class GermSyntaxError(ValueError):
    pass


def _walk(node, order, env):
    if isinstance(node, ast.Expression):
        return _walk(node.body, order, env)
    if isinstance(node, ast.Constant) and isinstance(node.value, int) and not isinstance(node.value, bool):
        return Fraction(node.value)
    if isinstance(node, ast.Constant) and isinstance(node.value, float):
        # decimal literals are read exactly as written, e.g. 0.1 -> 1/10
        return Fraction(repr(node.value))
    if isinstance(node, ast.Name):
        if node.id not in env:
            raise GermSyntaxError(f"unknown symbol {node.id!r}")
        return env[node.id]
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        v = _walk(node.operand, order, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.BinOp):
        left = _walk(node.left, order, env)
        if isinstance(node.op, ast.Pow):
            exp = _walk(node.right, order, env)
            if not isinstance(exp, Fraction) or exp.denominator != 1 or exp < 0:
                raise GermSyntaxError("exponents must be non-negative integer literals")
            if isinstance(left, Fraction):
                return left ** int(exp)
            return left ** int(exp)
        right = _walk(node.right, order, env)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            if isinstance(left, Jet) and isinstance(right, Jet):
                return left * right
            return left * right
        if isinstance(node.op, ast.Div):
            if not isinstance(right, Fraction) or right == 0:
                raise GermSyntaxError("division only by nonzero rational constants")
            return left * (1 / right) if isinstance(left, Jet) else left / right
    raise GermSyntaxError(f"unsupported syntax: {ast.dump(node)[:60]}")


def _to_jet(v, order):
    if isinstance(v, Jet):
        return v
    return Jet.constant(v, order, EXACT)


def _parse_tree(text: str):
    try:
        return ast.parse(text.replace("^", "**").strip(), mode="eval")
    except SyntaxError as exc:
        raise GermSyntaxError(f"cannot parse {text!r}: {exc.msg}") from None


def parse_polynomial(text: str, order: int = DEFAULT_ORDER) -> Jet:
    """Parse a polynomial in x, y into an exact jet of the given order."""
    x, y = Jet.variables(order, EXACT)
    tree = _parse_tree(text)
    if isinstance(tree.body, ast.Tuple):
        raise GermSyntaxError("expected a single polynomial, got a tuple")
    return _to_jet(_walk(tree, order, {"x": x, "y": y}), order)


def parse_germ(text: str, order: int = DEFAULT_ORDER) -> tuple[Jet, Jet]:
    """Parse ``"(f1, f2)"`` into a pair of exact jets."""
    x, y = Jet.variables(order, EXACT)
    tree = _parse_tree(text)
    if not isinstance(tree.body, ast.Tuple) or len(tree.body.elts) != 2:
        raise GermSyntaxError("a germ must be written as (f1, f2)")
    env = {"x": x, "y": y}
    return tuple(_to_jet(_walk(e, order, env), order) for e in tree.body.elts)
