"""Expression-tree utilities: folding constructors, vectorized evaluation,
symbolic differentiation and pretty printing."""

import math
from functools import lru_cache

import numpy as np

from meanscope.models.errors import EvaluationError
from meanscope.models.generator import BinOp, Call, Const, ExprNode, Neg, PowNode, Var

X = Var()
ZERO = Const(value=0.0)
ONE = Const(value=1.0)


def _is_const(node: ExprNode, value: float = None) -> bool:
    if not isinstance(node, Const):
        return False
    return value is None or node.value == value


def _finite_const(value: float):
    if isinstance(value, float) and math.isfinite(value):
        return Const(value=value)
    return None


# Folding constructors -------------------------------------------------------


def const(value: float) -> Const:
    return Const(value=float(value))


def neg(arg: ExprNode) -> ExprNode:
    if isinstance(arg, Const):
        return Const(value=-arg.value)
    if isinstance(arg, Neg):
        return arg.arg
    return Neg(arg=arg)


def binop(op: str, left: ExprNode, right: ExprNode) -> ExprNode:
    """Build ``left op right`` with constant folding and unit/zero identities."""
    if isinstance(left, Const) and isinstance(right, Const):
        a, b = left.value, right.value
        folded = None
        if op == "+":
            folded = _finite_const(a + b)
        elif op == "-":
            folded = _finite_const(a - b)
        elif op == "*":
            folded = _finite_const(a * b)
        elif op == "/" and b != 0.0:
            folded = _finite_const(a / b)
        if folded is not None:
            return folded
    if op == "+":
        if _is_const(left, 0.0):
            return right
        if _is_const(right, 0.0):
            return left
    elif op == "-":
        if _is_const(right, 0.0):
            return left
        if _is_const(left, 0.0):
            return neg(right)
    elif op == "*":
        if _is_const(left, 0.0) or _is_const(right, 0.0):
            return ZERO
        if _is_const(left, 1.0):
            return right
        if _is_const(right, 1.0):
            return left
        if _is_const(left, -1.0):
            return neg(right)
        if _is_const(right, -1.0):
            return neg(left)
    elif op == "/":
        if _is_const(right, 1.0):
            return left
        if _is_const(left, 0.0) and not _is_const(right, 0.0):
            return ZERO
    return BinOp(op=op, left=left, right=right)


def power(base: ExprNode, exponent: float) -> ExprNode:
    exponent = float(exponent)
    if exponent == 1.0:
        return base
    if exponent == 0.0:
        return ONE
    if isinstance(base, Const):
        try:
            value = base.value**exponent
        except (OverflowError, ZeroDivisionError):
            value = None
        if isinstance(value, float):
            folded = _finite_const(value)
            if folded is not None:
                return folded
    return PowNode(base=base, exponent=exponent)


def call(fn: str, arg: ExprNode) -> ExprNode:
    if isinstance(arg, Const):
        if fn == "ln" and arg.value > 0.0:
            return Const(value=math.log(arg.value))
        if fn == "exp":
            try:
                folded = _finite_const(math.exp(arg.value))
            except OverflowError:
                folded = None
            if folded is not None:
                return folded
    return Call(fn=fn, arg=arg)


# Evaluation -----------------------------------------------------------------


def _eval(node: ExprNode, x: np.ndarray) -> np.ndarray:
    if isinstance(node, Var):
        return x
    if isinstance(node, Const):
        return np.full_like(x, node.value)
    if isinstance(node, Neg):
        return -_eval(node.arg, x)
    if isinstance(node, PowNode):
        return np.power(_eval(node.base, x), node.exponent)
    if isinstance(node, Call):
        inner = _eval(node.arg, x)
        return np.log(inner) if node.fn == "ln" else np.exp(inner)
    left = _eval(node.left, x)
    right = _eval(node.right, x)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    return left / right


def evaluate_expr(node: ExprNode, x) -> np.ndarray:
    """Evaluate ``node`` elementwise; overflow yields inf, invalid operations raise."""
    arr = np.asarray(x, dtype=float)
    try:
        with np.errstate(divide="raise", invalid="raise", over="ignore", under="ignore"):
            return _eval(node, arr)
    except FloatingPointError as exc:
        with np.errstate(all="ignore"):
            values = np.atleast_1d(_eval(node, arr))
        bad = np.flatnonzero(~np.isfinite(values))
        where = float(np.atleast_1d(arr)[bad[0]]) if bad.size else None
        raise EvaluationError(f"invalid operation in expression ({exc})", where) from exc


# Differentiation ------------------------------------------------------------


def differentiate(node: ExprNode) -> ExprNode:
    """Symbolic d/dx with constant folding; total on the DSL grammar."""
    if isinstance(node, Const):
        return ZERO
    if isinstance(node, Var):
        return ONE
    if isinstance(node, Neg):
        return neg(differentiate(node.arg))
    if isinstance(node, PowNode):
        du = differentiate(node.base)
        outer = binop("*", const(node.exponent), power(node.base, node.exponent - 1.0))
        return binop("*", outer, du)
    if isinstance(node, Call):
        du = differentiate(node.arg)
        if node.fn == "ln":
            return binop("/", du, node.arg)
        return binop("*", node, du)
    u, v = node.left, node.right
    du, dv = differentiate(u), differentiate(v)
    if node.op in ("+", "-"):
        return binop(node.op, du, dv)
    if node.op == "*":
        return binop("+", binop("*", du, v), binop("*", u, dv))
    numerator = binop("-", binop("*", du, v), binop("*", u, dv))
    return binop("/", numerator, power(v, 2.0))


@lru_cache(maxsize=256)
def derivative_trees(node: ExprNode) -> tuple:
    """(f', f'') trees for an expression, cached per tree."""
    d1 = differentiate(node)
    return d1, differentiate(d1)


# Pretty printing --------------------------------------------------------------

_LEVEL = {"+": 1, "-": 1, "*": 2, "/": 2}


def _num(value: float) -> str:
    return repr(float(value))


def _level(node: ExprNode) -> int:
    if isinstance(node, BinOp):
        return _LEVEL[node.op]
    if isinstance(node, PowNode):
        return 3
    return 4


def _atom(node: ExprNode) -> str:
    text = pretty_expr(node)
    if isinstance(node, (Var, Call)) or (isinstance(node, Const) and node.value >= 0.0):
        return text
    return f"({text})"


def pretty_expr(node: ExprNode) -> str:
    """Render a tree in DSL syntax; the output reparses to the same tree."""
    if isinstance(node, Var):
        return "x"
    if isinstance(node, Const):
        return _num(node.value)
    if isinstance(node, Neg):
        return f"-{_atom(node.arg)}"
    if isinstance(node, Call):
        return f"{node.fn}({pretty_expr(node.arg)})"
    if isinstance(node, PowNode):
        return f"{_atom(node.base)}^{_num(node.exponent)}"
    level = _LEVEL[node.op]
    left = pretty_expr(node.left)
    if _level(node.left) < level:
        left = f"({left})"
    right = pretty_expr(node.right)
    if _level(node.right) <= level:
        right = f"({right})"
    return f"{left} {node.op} {right}"
