"""A tiny closed-form expression language for potentials and initial data.

Grammar (``^`` binds tighter than unary minus and is right associative)::

    expr  := term (('+' | '-') term)*
    term  := unary (('*' | '/') unary)*
    unary := ('+' | '-') unary | power
    power := atom ('^' unary)?
    atom  := NUMBER | NAME | FUNC '(' expr ')' | '(' expr ')'

Names are the variables ``t``, ``x``, ``y`` and the constants ``pi``, ``e``;
functions are ``sin``, ``cos`` and ``exp``. Error columns are 0-based
character offsets into the source text.

Each parsed expression can be evaluated two ways: by walking the tree, or
through a Python function generated from the tree. The two must agree.
"""
import re
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

VARIABLES = ("t", "x", "y")
CONSTANTS = {"pi": np.pi, "e": np.e}
FUNCTIONS = {"sin": np.sin, "cos": np.cos, "exp": np.exp}

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>[-+*/^()])
""", re.VERBOSE)


class ExpressionError(ValueError):
    def __init__(self, message: str, column: int, text: str = ""):
        super().__init__(f"{message} at column {column}")
        self.column = column
        self.text = text


@dataclass(frozen=True)
class Num:
    value: float


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Node"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Call:
    func: str
    arg: "Node"


Node = Union[Num, Var, Unary, Binary, Call]


def _tokenize(text):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ExpressionError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def tok(self):
        return self.tokens[self.i]

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ExpressionError(message, tok[2], self.text)

    def accept(self, value):
        if self.tok[0] == "op" and self.tok[1] == value:
            self.i += 1
            return True
        return False

    def expect(self, value):
        if not self.accept(value):
            found = "end of input" if self.tok[0] == "end" else repr(self.tok[1])
            raise self.error(f"expected {value!r}, found {found}")

    def parse(self):
        node = self.expr()
        if self.tok[0] != "end":
            raise self.error(f"unexpected {self.tok[1]!r}")
        return node

    def expr(self):
        node = self.term()
        while self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            node = Binary(op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.tok[0] == "op" and self.tok[1] in "*/":
            op = self.tok[1]
            self.i += 1
            node = Binary(op, node, self.unary())
        return node

    def unary(self):
        if self.tok[0] == "op" and self.tok[1] in "+-":
            op = self.tok[1]
            self.i += 1
            return Unary(op, self.unary())
        return self.power()

    def power(self):
        base = self.atom()
        if self.accept("^"):
            return Binary("^", base, self.unary())
        return base

    def atom(self):
        kind, value, _ = tok = self.tok
        if kind == "num":
            self.i += 1
            return Num(float(value))
        if kind == "name":
            self.i += 1
            if value in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Call(value, arg)
            if value in VARIABLES:
                return Var(value)
            if value in CONSTANTS:
                return Num(float(CONSTANTS[value]))
            raise self.error(f"unknown name {value!r}", tok)
        if self.accept("("):
            node = self.expr()
            self.expect(")")
            return node
        if kind == "end":
            raise self.error("unexpected end of input")
        raise self.error(f"unexpected {value!r}")


def parse(text: str) -> Node:
    return _Parser(text).parse()


def variables(node: Node) -> set:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, Num):
        return set()
    if isinstance(node, Unary):
        return variables(node.operand)
    if isinstance(node, Call):
        return variables(node.arg)
    return variables(node.left) | variables(node.right)


_BINOPS = {
    "+": np.add, "-": np.subtract, "*": np.multiply,
    "/": np.divide, "^": np.power,
}


def evaluate(node: Node, t=0.0, x=0.0, y=0.0):
    """Tree-walking evaluation."""
    if isinstance(node, Num):
        return node.value
    if isinstance(node, Var):
        return {"t": t, "x": x, "y": y}[node.name]
    if isinstance(node, Unary):
        v = evaluate(node.operand, t, x, y)
        return np.negative(v) if node.op == "-" else np.positive(v)
    if isinstance(node, Call):
        return FUNCTIONS[node.func](evaluate(node.arg, t, x, y))
    return _BINOPS[node.op](evaluate(node.left, t, x, y),
                            evaluate(node.right, t, x, y))


def to_source(node: Node) -> str:
    if isinstance(node, Num):
        return repr(node.value)
    if isinstance(node, Var):
        return node.name
    if isinstance(node, Unary):
        fn = "negative" if node.op == "-" else "positive"
        return f"_np.{fn}({to_source(node.operand)})"
    if isinstance(node, Call):
        return f"_np.{node.func}({to_source(node.arg)})"
    fn = _BINOPS[node.op].__name__
    return f"_np.{fn}({to_source(node.left)}, {to_source(node.right)})"


def compile_node(node: Node):
    """Generate a ``f(t, x, y)`` Python function from the tree."""
    src = f"lambda t=0.0, x=0.0, y=0.0: {to_source(node)}"
    return eval(compile(src, "<expression>", "eval"), {"_np": np})


class Expression:
    """A parsed expression with both evaluation paths attached."""

    def __init__(self, text: str):
        self.text = str(text)
        self.tree = parse(self.text)
        self.variables = variables(self.tree)
        self._compiled = compile_node(self.tree)

    def __repr__(self):
        return f"Expression({self.text!r})"

    def __getstate__(self):
        return {"text": self.text}

    def __setstate__(self, state):
        self.__init__(state["text"])

    def __call__(self, t=0.0, x=0.0, y=0.0):
        with np.errstate(all="ignore"):
            return self._compiled(t, x, y)

    def walk(self, t=0.0, x=0.0, y=0.0):
        with np.errstate(all="ignore"):
            return evaluate(self.tree, t, x, y)

    def sample(self, t, coords: Tuple[np.ndarray, ...], shape) -> np.ndarray:
        """Evaluate on grid coordinates; raise if any value is not a finite real."""
        names = dict(zip(("x", "y"), coords))
        values = np.broadcast_to(self(t, **names), shape).astype(float)
        bad = ~np.isfinite(values)
        if np.any(bad):
            idx = np.unravel_index(int(np.argmax(bad)), shape)
            where = ", ".join(f"{n}={c[idx]:.6g}" for n, c in names.items())
            raise ExpressionError(
                f"non-real or non-finite value of {self.text!r} at t={t:.6g}, "
                f"{where}", 0, self.text)
        return values
