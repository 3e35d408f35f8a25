"""Scalar expressions of time: parsing, evaluation, symbolic differentiation.

The oscillator is defined by six real coefficient functions of t.  They are
written as plain strings ("0.5*exp(-0.2*t)"), parsed once into immutable trees
and evaluated many times inside ODE right-hand sides, so every node compiles
itself to a closure at construction.  Differentiation is exact and structural;
the only rewriting ever applied is folding of all-literal subtrees, which keeps
the domain behaviour of the original expression intact.
"""

from __future__ import annotations

import math

__all__ = [
    "ExprError",
    "ParseError",
    "DomainError",
    "ExprNode",
    "Const",
    "TimeVar",
    "Unary",
    "Binary",
    "CoefficientSet",
    "parse",
    "evaluate",
    "differentiate",
    "to_string",
]


class ExprError(ValueError):
    """Base class for expression failures."""


class ParseError(ExprError):
    """Malformed input text; `offset` is the byte position of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (offset {offset})")
        self.offset = offset


class DomainError(ExprError):
    """A sub-operation left the real domain during evaluation."""

    def __init__(self, message, node, t):
        super().__init__(f"{message} in '{node}' at t={t!r}")
        self.node = node
        self.t = t


# Unary functions: name -> math implementation.
_UNARY_FN = {
    "neg": lambda v: -v,
    "sin": math.sin,
    "cos": math.cos,
    "tan": math.tan,
    "sinh": math.sinh,
    "cosh": math.cosh,
    "tanh": math.tanh,
    "exp": math.exp,
    "log": math.log,
    "sqrt": math.sqrt,
}

_FUNCTIONS = frozenset(_UNARY_FN) - {"neg"}
_CONSTANTS = {"pi": math.pi, "e": math.e}

# Printing precedence; higher binds tighter.
_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


class ExprNode:
    """Immutable expression-tree node.

    Subclasses set `_fn`, a float -> float closure, during construction;
    `evaluate` is just a call into it.  Trees are never mutated afterwards,
    so sharing across threads is safe.
    """

    __slots__ = ("_fn",)

    def eval(self, t):
        return self._fn(t)

    def diff(self):
        raise NotImplementedError

    def _prec(self):
        return _PREC_ATOM

    def __str__(self):
        return to_string(self)

    def __repr__(self):
        return f"{type(self).__name__}({to_string(self)!r})"


class Const(ExprNode):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = float(value)
        v = self.value
        self._fn = lambda t: v

    def diff(self):
        return Const(0.0)


class TimeVar(ExprNode):
    __slots__ = ()

    def __init__(self):
        self._fn = lambda t: t

    def diff(self):
        return Const(1.0)


class Unary(ExprNode):
    __slots__ = ("op", "child")

    def __init__(self, op, child):
        if op not in _UNARY_FN:
            raise ValueError(f"unknown unary operator {op!r}")
        self.op = op
        self.child = child
        fn = _UNARY_FN[op]
        cfn = child._fn
        if op in ("log", "sqrt"):
            # Guard the domain edge ourselves so the error names the node.
            self._fn = self._guarded(fn, cfn)
        else:
            self._fn = self._plain(fn, cfn)

    def _plain(self, fn, cfn):
        def call(t):
            v = cfn(t)
            try:
                return fn(v)
            except OverflowError:
                raise DomainError("overflow", self, t) from None
            except ValueError:
                raise DomainError("argument outside real domain", self, t) from None

        return call

    def _guarded(self, fn, cfn):
        op = self.op

        def call(t):
            v = cfn(t)
            if op == "log" and v <= 0.0:
                raise DomainError("log of non-positive value", self, t)
            if op == "sqrt" and v < 0.0:
                raise DomainError("sqrt of negative value", self, t)
            try:
                return fn(v)
            except (ValueError, OverflowError):
                raise DomainError("argument outside real domain", self, t) from None

        return call

    def diff(self):
        u, du = self.child, self.child.diff()
        rules = {
            "neg": lambda: _neg(du),
            "sin": lambda: _mul(_un("cos", u), du),
            "cos": lambda: _neg(_mul(_un("sin", u), du)),
            "tan": lambda: _div(du, _pow(_un("cos", u), Const(2.0))),
            "sinh": lambda: _mul(_un("cosh", u), du),
            "cosh": lambda: _mul(_un("sinh", u), du),
            "tanh": lambda: _div(du, _pow(_un("cosh", u), Const(2.0))),
            "exp": lambda: _mul(_un("exp", u), du),
            "log": lambda: _div(du, u),
            "sqrt": lambda: _div(du, _mul(Const(2.0), _un("sqrt", u))),
        }
        return rules[self.op]()

    def _prec(self):
        return _PREC_NEG if self.op == "neg" else _PREC_ATOM


class Binary(ExprNode):
    __slots__ = ("op", "left", "right")

    def __init__(self, op, left, right):
        if op not in "+-*/^":
            raise ValueError(f"unknown binary operator {op!r}")
        self.op = op
        self.left = left
        self.right = right
        lf, rf = left._fn, right._fn
        if op == "+":
            self._fn = lambda t: lf(t) + rf(t)
        elif op == "-":
            self._fn = lambda t: lf(t) - rf(t)
        elif op == "*":
            self._fn = lambda t: lf(t) * rf(t)
        elif op == "/":
            def call(t):
                denom = rf(t)
                if denom == 0.0:
                    raise DomainError("division by zero", self, t)
                return lf(t) / denom

            self._fn = call
        else:  # '^'
            def call(t):
                base = lf(t)
                expo = rf(t)
                try:
                    return math.pow(base, expo)
                except OverflowError:
                    raise DomainError("overflow", self, t) from None
                except ValueError:
                    raise DomainError(
                        "negative base with non-integer exponent", self, t
                    ) from None
                except ZeroDivisionError:
                    raise DomainError("zero raised to negative power", self, t) from None

            self._fn = call

    def diff(self):
        u, v = self.left, self.right
        du, dv = u.diff(), v.diff()
        if self.op == "+":
            return _add(du, dv)
        if self.op == "-":
            return _sub(du, dv)
        if self.op == "*":
            return _add(_mul(du, v), _mul(u, dv))
        if self.op == "/":
            return _div(_sub(_mul(du, v), _mul(u, dv)), _pow(v, Const(2.0)))
        # power rule for a literal exponent, log rewrite otherwise
        if isinstance(v, Const):
            return _mul(_mul(v, _pow(u, Const(v.value - 1.0))), du)
        return _mul(
            _pow(u, v),
            _add(_mul(dv, _un("log", u)), _mul(v, _div(du, u))),
        )

    def _prec(self):
        return {"+": _PREC_ADD, "-": _PREC_ADD,
                "*": _PREC_MUL, "/": _PREC_MUL, "^": _PREC_POW}[self.op]


def _fold(node):
    """Collapse a node whose operands are all literals into a Const.

    Folding is skipped when the literal evaluation itself fails (log(-1)),
    so the domain error still surfaces at evaluation time.
    """
    try:
        return Const(node.eval(0.0))
    except ExprError:
        return node


def _un(op, child):
    node = Unary(op, child)
    return _fold(node) if isinstance(child, Const) else node


def _bin(op, left, right):
    node = Binary(op, left, right)
    if isinstance(left, Const) and isinstance(right, Const):
        return _fold(node)
    return node


def _add(a, b):
    return _bin("+", a, b)


def _sub(a, b):
    return _bin("-", a, b)


def _mul(a, b):
    return _bin("*", a, b)


def _div(a, b):
    return _bin("/", a, b)


def _pow(a, b):
    return _bin("^", a, b)


def _neg(a):
    return _fold(Unary("neg", a)) if isinstance(a, Const) else Unary("neg", a)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

class _Tokenizer:
    """Splits text into (kind, value, offset) triples; kinds are
    'num', 'ident', 'op', '(', ')', 'end'."""

    def __init__(self, text):
        self.text = text
        self.pos = 0
        self.tokens = []
        self._scan()
        self.index = 0

    def _scan(self):
        text, n = self.text, len(self.text)
        i = 0
        while i < n:
            ch = text[i]
            if ch in " \t\r\n":
                i += 1
                continue
            if ch.isdigit() or ch == ".":
                start = i
                while i < n and text[i].isdigit():
                    i += 1
                if i < n and text[i] == ".":
                    i += 1
                    while i < n and text[i].isdigit():
                        i += 1
                if i - start == 1 and text[start] == ".":
                    raise ParseError("malformed number", start)
                if i < n and text[i] in "eE":
                    j = i + 1
                    if j < n and text[j] in "+-":
                        j += 1
                    if j < n and text[j].isdigit():
                        i = j
                        while i < n and text[i].isdigit():
                            i += 1
                self.tokens.append(("num", text[start:i], start))
                continue
            if ch.isalpha() or ch == "_":
                start = i
                while i < n and (text[i].isalnum() or text[i] == "_"):
                    i += 1
                self.tokens.append(("ident", text[start:i], start))
                continue
            if ch in "+-*/^":
                self.tokens.append(("op", ch, i))
                i += 1
                continue
            if ch in "()":
                self.tokens.append((ch, ch, i))
                i += 1
                continue
            raise ParseError(f"unexpected character {ch!r}", i)
        self.tokens.append(("end", "", n))

    def peek(self):
        return self.tokens[self.index]

    def next(self):
        tok = self.tokens[self.index]
        if tok[0] != "end":
            self.index += 1
        return tok


class _Parser:
    """Recursive descent over `expr := term (('+'|'-') term)*`,
    `term := unary (('*'|'/') unary)*`, `unary := '-' unary | power`,
    `power := atom ('^' unary)?` (right-associative, binds tightest)."""

    def __init__(self, text):
        self.toks = _Tokenizer(text)

    def parse(self):
        node = self.expr()
        kind, value, offset = self.toks.peek()
        if kind != "end":
            raise ParseError(f"unexpected {value!r}", offset)
        return node

    def expr(self):
        node = self.term()
        while True:
            kind, value, _ = self.toks.peek()
            if kind == "op" and value in "+-":
                self.toks.next()
                node = _bin(value, node, self.term())
            else:
                return node

    def term(self):
        node = self.unary()
        while True:
            kind, value, _ = self.toks.peek()
            if kind == "op" and value in "*/":
                self.toks.next()
                node = _bin(value, node, self.unary())
            else:
                return node

    def unary(self):
        kind, value, _ = self.toks.peek()
        if kind == "op" and value == "-":
            self.toks.next()
            return _neg(self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        kind, value, _ = self.toks.peek()
        if kind == "op" and value == "^":
            self.toks.next()
            return _bin("^", base, self.unary())
        return base

    def atom(self):
        kind, value, offset = self.toks.next()
        if kind == "num":
            return Const(float(value))
        if kind == "ident":
            if value == "t":
                return TimeVar()
            if value in _CONSTANTS:
                return Const(_CONSTANTS[value])
            if value in _FUNCTIONS:
                k, v, off = self.toks.next()
                if k != "(":
                    raise ParseError(f"expected '(' after {value!r}", off)
                arg = self.expr()
                k, v, off = self.toks.next()
                if k != ")":
                    raise ParseError("expected ')'", off)
                return Unary(value, arg)
            raise ParseError(f"unknown identifier {value!r}", offset)
        if kind == "(":
            node = self.expr()
            k, v, off = self.toks.next()
            if k != ")":
                raise ParseError("expected ')'", off)
            return node
        if kind == "end":
            raise ParseError("unexpected end of input", offset)
        raise ParseError(f"unexpected {value!r}", offset)


def parse(text: str) -> ExprNode:
    """Parse an expression of the variable t into a tree.

    Accepts decimal/scientific numbers, `t`, `pi`, `e`, the functions
    sin cos tan sinh cosh tanh exp log sqrt, infix `+ - * / ^` with the
    usual precedence (`^` highest, right-associative), parentheses, and
    unary minus.  Whitespace is ignored.
    """
    if not isinstance(text, str):
        raise TypeError("expression must be a string")
    if not text.strip():
        raise ParseError("empty input", 0)
    return _Parser(text).parse()


def evaluate(expr: ExprNode, t: float) -> float:
    """Value of the expression at time t (IEEE double).

    Raises DomainError, naming the offending node, when a sub-operation
    is singular at t (log of non-positive, sqrt of negative, division
    by zero, out-of-range power).
    """
    value = expr.eval(t)
    if not math.isfinite(value):
        raise DomainError("non-finite result", expr, t)
    return value


def differentiate(expr: ExprNode) -> ExprNode:
    """Exact structural derivative d/dt; all-literal subtrees are folded."""
    return expr.diff()


def to_string(expr: ExprNode) -> str:
    """Render a tree so that parse(to_string(e)) evaluates identically to e."""
    return _render(expr, 0)


class CoefficientSet:
    """The six time-dependent coefficients a, b, c, d, f, g of the oscillator.

    Values are dimensionless (natural units, hbar = m = 1).  The derivatives
    of a and d are generated symbolically at construction because the
    characteristic-equation coefficients and the reduced phase formula need
    a' and d' at full accuracy.
    """

    __slots__ = ("a", "b", "c", "d", "f", "g", "da", "dd")

    def __init__(self, a, b, c, d, f, g):
        self.a = a
        self.b = b
        self.c = c
        self.d = d
        self.f = f
        self.g = g
        self.da = differentiate(a)
        self.dd = differentiate(d)

    @classmethod
    def from_strings(cls, a="0", b="0", c="0", d="0", f="0", g="0"):
        return cls(parse(a), parse(b), parse(c), parse(d), parse(f), parse(g))

    def values(self, t):
        """Tuple (a, b, c, d, f, g) evaluated at time t."""
        return (
            self.a.eval(t),
            self.b.eval(t),
            self.c.eval(t),
            self.d.eval(t),
            self.f.eval(t),
            self.g.eval(t),
        )

    def __repr__(self):
        parts = ", ".join(
            f"{name}={to_string(getattr(self, name))!r}" for name in "abcdfg"
        )
        return f"CoefficientSet({parts})"


def _render(node, parent_prec):
    if isinstance(node, Const):
        text = repr(node.value)
        if node.value < 0 and parent_prec > _PREC_ADD:
            text = f"({text})"
        return text
    if isinstance(node, TimeVar):
        return "t"
    if isinstance(node, Unary):
        if node.op == "neg":
            inner = _render(node.child, _PREC_NEG)
            text = f"-{inner}"
            return f"({text})" if parent_prec > _PREC_ADD else text
        return f"{node.op}({_render(node.child, 0)})"
    assert isinstance(node, Binary)
    prec = node._prec()
    if node.op == "^":
        # right-associative: parenthesise a '^' (or tighter-unary) left child
        left = _render(node.left, prec + 1)
        right = _render(node.right, prec)
    else:
        left = _render(node.left, prec)
        right = _render(node.right, prec + 1)
    text = f"{left}{node.op}{right}"
    return f"({text})" if prec < parent_prec else text
