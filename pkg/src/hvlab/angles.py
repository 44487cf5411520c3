"""Parse angle expressions such as ``3*pi/8`` and grids such as ``0:pi:pi/16``."""

from __future__ import annotations

import ast
import math
import operator

from hvlab.errors import ConfigError

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}
_UNARY = {ast.UAdd: operator.pos, ast.USub: operator.neg}


def _eval(node):
    if isinstance(node, ast.Expression):
        return _eval(node.body)
    if isinstance(node, ast.Constant) and type(node.value) in (int, float):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval(node.left), _eval(node.right))
    if isinstance(node, ast.UnaryOp) and type(node.op) in _UNARY:
        return _UNARY[type(node.op)](_eval(node.operand))
    raise ConfigError(f"unsupported element in angle expression: {ast.dump(node)}")


def parse_angle(text) -> float:
    """Radians from a number or an expression over numbers, ``pi``, ``+ - * /`` and parentheses."""
    if isinstance(text, (int, float)) and not isinstance(text, bool):
        return float(text)
    try:
        tree = ast.parse(str(text).strip(), mode="eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse angle {text!r}") from exc
    try:
        value = _eval(tree)
    except ZeroDivisionError as exc:
        raise ConfigError(f"division by zero in angle {text!r}") from exc
    if not math.isfinite(value):
        raise ConfigError(f"angle {text!r} is not finite")
    return value


def parse_grid(text: str) -> list[float]:
    """``start:stop:step`` (stop included) or a comma-separated list of angles."""
    text = str(text).strip()
    if ":" not in text:
        return [parse_angle(t) for t in text.split(",") if t.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ConfigError(f"grid must be start:stop:step, got {text!r}")
    start, stop, step = (parse_angle(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigError(f"grid needs step > 0 and stop >= start, got {text!r}")
    n = math.floor((stop - start) / step + 1e-9)
    return [start + k * step for k in range(n + 1)]
