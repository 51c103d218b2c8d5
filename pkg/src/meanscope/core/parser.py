"""Generator DSL: tokenizer, recursive-descent parser and pretty printer.

Grammar (whitespace insignificant)::

    spec     := builtin | expr
    builtin  := "power(" num ")" | "log" | "exp(" num ")" | "quadlin(" num ")"
              | "spline(" [nums] ";" nums ";" nums ")" | "affine(" num "," num "," spec ")"
    expr     := term { ("+"|"-") term }
    term     := factor { ("*"|"/") factor }
    factor   := atom [ "^" num ]
    atom     := "x" | num | "ln(" expr ")" | "exp(" expr ")" | "(" expr ")" | "-" atom

``exp(c)`` with a bare numeric argument is the builtin; ``exp(<expr>)`` is the
DSL function.
"""

import re
from typing import List, NamedTuple, Optional

from meanscope.core import expr as ex
from meanscope.models.errors import (
    GeneratorSyntaxError,
    NonConstantExponentError,
    UnknownIdentifierError,
)
from meanscope.models.generator import (
    AffineSpec,
    Call,
    Const,
    ExpSpec,
    ExprNode,
    ExprSpec,
    GeneratorSpec,
    LogSpec,
    PowerSpec,
    PowNode,
    QuadLinSpec,
    SplineSpec,
    Var,
)

_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_PUNCT = set("+-*/^(),;")

BUILTINS = ("power", "log", "exp", "quadlin", "spline", "affine")


class Token(NamedTuple):
    kind: str  # "num", "ident", "op", "eof"
    value: str
    position: int  # 1-based


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        match = _NUMBER.match(text, i)
        if match:
            tokens.append(Token("num", match.group(0), i + 1))
            i = match.end()
            continue
        match = _IDENT.match(text, i)
        if match:
            tokens.append(Token("ident", match.group(0), i + 1))
            i = match.end()
            continue
        if ch in _PUNCT:
            tokens.append(Token("op", ch, i + 1))
            i += 1
            continue
        raise GeneratorSyntaxError(f"unexpected character {ch!r}", i + 1)
    tokens.append(Token("eof", "", len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0

    # token helpers

    def peek(self, offset: int = 0) -> Token:
        index = min(self.pos + offset, len(self.tokens) - 1)
        return self.tokens[index]

    def advance(self) -> Token:
        token = self.peek()
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return token

    def at(self, value: str, offset: int = 0) -> bool:
        token = self.peek(offset)
        return token.kind == "op" and token.value == value

    def expect(self, value: str) -> Token:
        token = self.peek()
        if not (token.kind == "op" and token.value == value):
            found = "end of input" if token.kind == "eof" else repr(token.value)
            raise GeneratorSyntaxError(f"expected {value!r}, found {found}", token.position)
        return self.advance()

    def _ends_spec(self, offset: int) -> bool:
        token = self.peek(offset)
        return token.kind == "eof" or (token.kind == "op" and token.value == ")")

    def signed_number(self) -> float:
        sign = 1.0
        if self.at("-"):
            self.advance()
            sign = -1.0
        token = self.peek()
        if token.kind != "num":
            raise GeneratorSyntaxError("expected a number", token.position)
        self.advance()
        return sign * float(token.value)

    def number_list(self, closers: str) -> List[float]:
        values: List[float] = []
        if self.peek().kind == "op" and self.peek().value in closers:
            return values
        values.append(self.signed_number())
        while self.at(","):
            self.advance()
            values.append(self.signed_number())
        return values

    def _bare_numeric_call(self) -> bool:
        """True for ``name(num)`` / ``name(-num)`` ending the spec."""
        if not self.at("(", 1):
            return False
        offset = 2
        if self.at("-", offset):
            offset += 1
        if self.peek(offset).kind != "num" or not self.at(")", offset + 1):
            return False
        return self._ends_spec(offset + 2)

    # grammar

    def spec(self) -> GeneratorSpec:
        token = self.peek()
        if token.kind == "ident":
            name = token.value
            if name == "log" and self._ends_spec(1):
                self.advance()
                return LogSpec()
            if name in ("power", "quadlin"):
                self.advance()
                self.expect("(")
                value_token = self.peek()
                value = self.signed_number()
                self.expect(")")
                try:
                    if name == "power":
                        return PowerSpec(p=value)
                    return QuadLinSpec(alpha=value)
                except ValueError as exc:
                    raise GeneratorSyntaxError(
                        f"invalid {name} parameter {value!r}", value_token.position
                    ) from exc
            if name == "exp" and self._bare_numeric_call():
                self.advance()
                self.expect("(")
                value_token = self.peek()
                value = self.signed_number()
                self.expect(")")
                if value == 0.0:
                    raise GeneratorSyntaxError("exp rate must be non-zero", value_token.position)
                return ExpSpec(c=value)
            if name == "spline":
                return self._spline()
            if name == "affine":
                return self._affine()
        return ExprSpec(ast=self.expr())

    def _spline(self) -> SplineSpec:
        start = self.advance()
        self.expect("(")
        knots = self.number_list(";")
        self.expect(";")
        slopes = self.number_list(";")
        self.expect(";")
        curvatures = self.number_list(")")
        self.expect(")")
        try:
            return SplineSpec(
                knots=tuple(knots), slopes=tuple(slopes), curvatures=tuple(curvatures)
            )
        except ValueError as exc:
            raise GeneratorSyntaxError(f"invalid spline: {exc}", start.position) from exc

    def _affine(self) -> AffineSpec:
        start = self.advance()
        self.expect("(")
        a = self.signed_number()
        self.expect(",")
        b = self.signed_number()
        self.expect(",")
        inner = self.spec()
        self.expect(")")
        try:
            return AffineSpec(a=a, b=b, inner=inner)
        except ValueError as exc:
            raise GeneratorSyntaxError(f"invalid affine wrapper: {exc}", start.position) from exc

    def expr(self) -> ExprNode:
        node = self.term()
        while self.at("+") or self.at("-"):
            op = self.advance().value
            node = ex.binop(op, node, self.term())
        return node

    def term(self) -> ExprNode:
        node = self.factor()
        while self.at("*") or self.at("/"):
            op = self.advance().value
            node = ex.binop(op, node, self.factor())
        return node

    def factor(self) -> ExprNode:
        base = self.atom()
        if self.at("^"):
            self.advance()
            return ex.power(base, self.exponent())
        return base

    def exponent(self) -> float:
        token = self.peek()
        if token.kind == "num" or self.at("-"):
            if self.at("-") and self.peek(1).kind != "num":
                raise NonConstantExponentError("exponent must be a constant", token.position)
            return self.signed_number()
        if self.at("("):
            self.advance()
            folded = self.expr()
            self.expect(")")
            if isinstance(folded, Const):
                return folded.value
        raise NonConstantExponentError("exponent must be a constant", token.position)

    def atom(self) -> ExprNode:
        token = self.peek()
        if token.kind == "num":
            self.advance()
            return ex.const(float(token.value))
        if token.kind == "op":
            if token.value == "-":
                self.advance()
                return ex.neg(self.atom())
            if token.value == "(":
                self.advance()
                node = self.expr()
                self.expect(")")
                return node
            raise GeneratorSyntaxError(f"unexpected {token.value!r}", token.position)
        if token.kind == "eof":
            raise GeneratorSyntaxError("unexpected end of input", token.position)
        name = token.value
        if name == "x":
            self.advance()
            return ex.X
        if name in ("ln", "exp"):
            self.advance()
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return ex.call(name, arg)
        hint = " (use ln for the natural logarithm)" if name == "log" else ""
        raise UnknownIdentifierError(f"unknown identifier {name!r}{hint}", token.position)

    def finish(self) -> None:
        token = self.peek()
        if token.kind != "eof":
            raise GeneratorSyntaxError(f"unexpected {token.value!r}", token.position)


def parse_generator(text: str) -> GeneratorSpec:
    """Parse generator text into a spec. Side-effect free."""
    parser = _Parser(text)
    spec = parser.spec()
    parser.finish()
    return spec


def pretty(spec: GeneratorSpec) -> str:
    """Render a spec in DSL syntax; ``parse_generator(pretty(s)) == s`` for parsed specs."""
    num = ex._num
    if isinstance(spec, PowerSpec):
        return f"power({num(spec.p)})"
    if isinstance(spec, LogSpec):
        return "log"
    if isinstance(spec, ExpSpec):
        return f"exp({num(spec.c)})"
    if isinstance(spec, QuadLinSpec):
        return f"quadlin({num(spec.alpha)})"
    if isinstance(spec, SplineSpec):
        parts = [
            ", ".join(num(v) for v in values)
            for values in (spec.knots, spec.slopes, spec.curvatures)
        ]
        return f"spline({parts[0]}; {parts[1]}; {parts[2]})"
    if isinstance(spec, AffineSpec):
        return f"affine({num(spec.a)}, {num(spec.b)}, {pretty(spec.inner)})"
    return ex.pretty_expr(spec.ast)


def _linear_rate(node: ExprNode) -> Optional[float]:
    """c when ``node`` is c*x or x*c (or plain x)."""
    if isinstance(node, Var):
        return 1.0
    if node.kind == "binop" and node.op == "*":
        if isinstance(node.left, Const) and isinstance(node.right, Var):
            return node.left.value
        if isinstance(node.right, Const) and isinstance(node.left, Var):
            return node.right.value
    if node.kind == "neg" and isinstance(node.arg, Var):
        return -1.0
    return None


def simplify_spec(spec: GeneratorSpec) -> GeneratorSpec:
    """Recognize expression trees that are builtins in disguise and fold affine wrappers."""
    if isinstance(spec, AffineSpec):
        inner = simplify_spec(spec.inner)
        if isinstance(inner, AffineSpec):
            a = spec.a * inner.a
            b = spec.a * inner.b + spec.b
            inner = inner.inner
        else:
            a, b = spec.a, spec.b
        if a == 1.0 and b == 0.0:
            return inner
        return AffineSpec(a=a, b=b, inner=inner)
    if not isinstance(spec, ExprSpec):
        return spec
    node = spec.ast
    if isinstance(node, Var):
        return PowerSpec(p=1.0)
    if isinstance(node, PowNode) and isinstance(node.base, Var):
        return PowerSpec(p=node.exponent)
    if isinstance(node, Call):
        if node.fn == "ln" and isinstance(node.arg, Var):
            return LogSpec()
        if node.fn == "exp":
            rate = _linear_rate(node.arg)
            if rate is not None and rate != 0.0:
                return ExpSpec(c=rate)
    return spec
