"""Syntax of probabilistic linear temporal formulas over finite traces.

Surface connectives: ``true``, ``false``, propositions, ``!``, ``&``, ``|``,
``->``, ``X``, ``F``, ``G``, ``U`` and the probability bound
``P<cmp><number>[phi]``.  :func:`normalize` rewrites a surface formula into
the core fragment (constants, propositions, negation, n-ary conjunction,
``X``, ``U``, ``P``) that the closure and automaton constructions expect.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

Valuation = frozenset
Trace = tuple


class Comparison(enum.Enum):
    """Comparison attached to a probability bound."""

    LE = "<="
    GE = ">="
    LT = "<"
    GT = ">"

    @property
    def inverse(self) -> "Comparison":
        """Comparison expressing the negation of ``P <cmp> p``."""
        return _INVERSE[self]

    @property
    def strict(self) -> bool:
        return self in (Comparison.LT, Comparison.GT)

    def holds(self, lhs: Fraction, rhs: Fraction) -> bool:
        if self is Comparison.LE:
            return lhs <= rhs
        if self is Comparison.GE:
            return lhs >= rhs
        if self is Comparison.LT:
            return lhs < rhs
        return lhs > rhs


_INVERSE = {
    Comparison.LE: Comparison.GT,
    Comparison.GT: Comparison.LE,
    Comparison.GE: Comparison.LT,
    Comparison.LT: Comparison.GE,
}


class Formula:
    """Base class for formula nodes.  All nodes are immutable."""

    __slots__ = ()

    def __and__(self, other: "Formula") -> "Formula":
        return And((self, other))

    def __or__(self, other: "Formula") -> "Formula":
        return Or((self, other))

    def __invert__(self) -> "Formula":
        return Not(self)

    def __str__(self) -> str:
        return formula_text(self)

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {formula_text(self)}>"


@dataclass(frozen=True, repr=False)
class TrueConst(Formula):
    pass


@dataclass(frozen=True, repr=False)
class FalseConst(Formula):
    pass


TRUE = TrueConst()
FALSE = FalseConst()

# Reserved words of the grammar; propositions may not shadow them.
KEYWORDS = frozenset({"true", "false", "X", "F", "G", "U", "P"})

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_proposition_name(name: str) -> bool:
    return bool(_IDENT_RE.match(name)) and name not in KEYWORDS


@dataclass(frozen=True, repr=False)
class Prop(Formula):
    name: str

    def __post_init__(self):
        if not is_proposition_name(self.name):
            raise ValueError(f"invalid proposition name {self.name!r}")


@dataclass(frozen=True, repr=False)
class Not(Formula):
    operand: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    operands: tuple

    def __post_init__(self):
        if len(self.operands) < 2:
            raise ValueError("conjunction needs at least two operands")


@dataclass(frozen=True, repr=False)
class Or(Formula):
    operands: tuple

    def __post_init__(self):
        if len(self.operands) < 2:
            raise ValueError("disjunction needs at least two operands")


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Next(Formula):
    operand: Formula


@dataclass(frozen=True, repr=False)
class Eventually(Formula):
    operand: Formula


@dataclass(frozen=True, repr=False)
class Always(Formula):
    operand: Formula


@dataclass(frozen=True, repr=False)
class Until(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Prob(Formula):
    """Probability bound ``P <cmp> bound [operand]`` on the children of a node."""

    cmp: Comparison
    bound: Fraction
    operand: Formula

    def __post_init__(self):
        bound = self.bound
        if not isinstance(bound, Fraction):
            bound = Fraction(bound)
            object.__setattr__(self, "bound", bound)
        if not 0 <= bound <= 1:
            raise ValueError(f"probability bound {bound} outside [0, 1]")


def formula_size(f: Formula) -> int:
    """Node count; the comparison and bound of a P node do not add to it."""
    match f:
        case TrueConst() | FalseConst() | Prop():
            return 1
        case Not(x) | Next(x) | Eventually(x) | Always(x) | Prob(_, _, x):
            return 1 + formula_size(x)
        case And(ops) | Or(ops):
            return 1 + sum(formula_size(o) for o in ops)
        case Implies(l, r) | Until(l, r):
            return 1 + formula_size(l) + formula_size(r)
    raise TypeError(f"not a formula: {f!r}")


# Printer precedence levels, loosest first.
_P_IMPLIES, _P_OR, _P_AND, _P_UNTIL, _P_UNARY, _P_ATOM = range(1, 7)


def _precedence(f: Formula) -> int:
    match f:
        case Implies():
            return _P_IMPLIES
        case Or():
            return _P_OR
        case And():
            return _P_AND
        case Until():
            return _P_UNTIL
        case Not() | Next() | Eventually() | Always():
            return _P_UNARY
        case _:
            return _P_ATOM


def formula_text(f: Formula) -> str:
    """Render with minimal parentheses; reparsing yields an equal formula."""

    def sub(g: Formula, minimum: int) -> str:
        text = formula_text(g)
        return f"({text})" if _precedence(g) < minimum else text

    match f:
        case TrueConst():
            return "true"
        case FalseConst():
            return "false"
        case Prop(name):
            return name
        case Not(x):
            return "!" + sub(x, _P_UNARY)
        case Next(x) | Eventually(x) | Always(x):
            op = {Next: "X", Eventually: "F", Always: "G"}[type(f)]
            inner = sub(x, _P_UNARY)
            return op + ("" if inner.startswith("(") else " ") + inner
        case Until(l, r):
            return f"{sub(l, _P_UNARY)} U {sub(r, _P_UNTIL)}"
        case And(ops):
            return " & ".join(sub(o, _P_UNTIL) for o in ops)
        case Or(ops):
            return " | ".join(sub(o, _P_AND) for o in ops)
        case Implies(l, r):
            return f"{sub(l, _P_OR)} -> {sub(r, _P_IMPLIES)}"
        case Prob(cmp, bound, x):
            return f"P{cmp.value}{bound}[{formula_text(x)}]"
    raise TypeError(f"not a formula: {f!r}")


def negate(f: Formula) -> Formula:
    """Negation of a normalized formula, kept in normal form.

    Never stacks two negations and never wraps a probability bound or a
    constant in one; bounds flip their comparison instead.
    """
    match f:
        case TrueConst():
            return FALSE
        case FalseConst():
            return TRUE
        case Not(x):
            return x
        case Prob(cmp, bound, x):
            return Prob(cmp.inverse, bound, x)
        case _:
            return Not(f)


def _conjunction(parts: tuple) -> Formula:
    flat = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.operands)
        else:
            flat.append(p)
    if not flat:
        return TRUE
    if len(flat) == 1:
        return flat[0]
    return And(tuple(flat))


def conj(*parts: Formula) -> Formula:
    """Flattened conjunction of already-normalized formulas."""
    return _conjunction(parts)


def normalize(f: Formula) -> Formula:
    """Rewrite into the core fragment.  Idempotent.

    F x becomes true U x, G x becomes !(true U !x), disjunction and
    implication are pushed into conjunction and negation, and negations are
    reduced so that they never wrap another negation, a constant or a
    probability bound.
    """
    match f:
        case TrueConst() | FalseConst() | Prop():
            return f
        case Not(x):
            return negate(normalize(x))
        case And(ops):
            return _conjunction(tuple(normalize(o) for o in ops))
        case Or(ops):
            return negate(_conjunction(tuple(negate(normalize(o)) for o in ops)))
        case Implies(l, r):
            return negate(_conjunction((normalize(l), negate(normalize(r)))))
        case Next(x):
            return Next(normalize(x))
        case Eventually(x):
            return Until(TRUE, normalize(x))
        case Always(x):
            return negate(Until(TRUE, negate(normalize(x))))
        case Until(l, r):
            return Until(normalize(l), normalize(r))
        case Prob(cmp, bound, x):
            return Prob(cmp, bound, normalize(x))
    raise TypeError(f"not a formula: {f!r}")


def is_normalized(f: Formula) -> bool:
    match f:
        case TrueConst() | FalseConst() | Prop():
            return True
        case Not(TrueConst()) | Not(FalseConst()) | Not(Not(_)) | Not(Prob()):
            return False
        case Not(x) | Next(x) | Prob(_, _, x):
            return is_normalized(x)
        case And(ops):
            return all(is_normalized(o) and not isinstance(o, And) for o in ops)
        case Until(l, r):
            return is_normalized(l) and is_normalized(r)
        case _:
            return False


def vars_of(f: Formula) -> frozenset:
    match f:
        case TrueConst() | FalseConst():
            return frozenset()
        case Prop(name):
            return frozenset({name})
        case Not(x) | Next(x) | Eventually(x) | Always(x) | Prob(_, _, x):
            return vars_of(x)
        case And(ops) | Or(ops):
            return frozenset().union(*(vars_of(o) for o in ops))
        case Implies(l, r) | Until(l, r):
            return vars_of(l) | vars_of(r)
    raise TypeError(f"not a formula: {f!r}")


def has_prob(f: Formula) -> bool:
    match f:
        case Prob():
            return True
        case TrueConst() | FalseConst() | Prop():
            return False
        case Not(x) | Next(x) | Eventually(x) | Always(x):
            return has_prob(x)
        case And(ops) | Or(ops):
            return any(has_prob(o) for o in ops)
        case Implies(l, r) | Until(l, r):
            return has_prob(l) or has_prob(r)
    raise TypeError(f"not a formula: {f!r}")


def eval_trace(f: Formula, trace: Trace, pos: int = 0) -> bool:
    """Classical finite-trace truth of a probability-free formula.

    Until reduces to its right argument on the last step; X is false there.
    """
    if not trace:
        raise ValueError("trace must be nonempty")
    if not 0 <= pos < len(trace):
        raise ValueError(f"position {pos} outside trace of length {len(trace)}")
    match f:
        case TrueConst():
            return True
        case FalseConst():
            return False
        case Prop(name):
            return name in trace[pos]
        case Not(x):
            return not eval_trace(x, trace, pos)
        case And(ops):
            return all(eval_trace(o, trace, pos) for o in ops)
        case Or(ops):
            return any(eval_trace(o, trace, pos) for o in ops)
        case Implies(l, r):
            return not eval_trace(l, trace, pos) or eval_trace(r, trace, pos)
        case Next(x):
            return pos + 1 < len(trace) and eval_trace(x, trace, pos + 1)
        case Eventually(x):
            return any(eval_trace(x, trace, i) for i in range(pos, len(trace)))
        case Always(x):
            return all(eval_trace(x, trace, i) for i in range(pos, len(trace)))
        case Until(l, r):
            for i in range(pos, len(trace)):
                if eval_trace(r, trace, i):
                    return True
                if not eval_trace(l, trace, i):
                    return False
            return False
        case Prob():
            raise ValueError(
                f"cannot evaluate probabilistic operator on a trace: {formula_text(f)}"
            )
    raise TypeError(f"not a formula: {f!r}")


class ParseError(ValueError):
    """Syntax error with a 1-based line/column position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col


_TOKEN_RE = re.compile(
    r"""(?P<ws>\s+)
      | (?P<arrow>->)
      | (?P<cmp><=|>=|<|>)
      | (?P<number>\d+(?:\.\d+)?(?:/\d+)?)
      | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<punct>[()\[\]!&|])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list:
    tokens = []
    line, col = 1, 1
    i = 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if m is None:
            raise ParseError(f"unexpected character {text[i]!r}", line, col)
        kind = m.lastgroup
        chunk = m.group()
        if kind != "ws":
            tokens.append(_Token(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        i = m.end()
    tokens.append(_Token("end", "", line, col))
    return tokens


def parse_number(text: str) -> Fraction:
    """Exact rational from a decimal or num/den literal."""
    return Fraction(text)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.pos = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.pos]

    def error(self, message: str):
        tok = self.current
        what = f"{tok.text!r}" if tok.kind != "end" else "end of input"
        raise ParseError(f"{message}, found {what}", tok.line, tok.col)

    def advance(self) -> _Token:
        tok = self.current
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        if self.current.text != text:
            self.error(f"expected {text!r}")
        return self.advance()

    def parse(self) -> Formula:
        f = self.implies()
        if self.current.kind != "end":
            self.error("trailing input")
        return f

    def implies(self) -> Formula:
        left = self.disjunction()
        if self.current.kind == "arrow":
            self.advance()
            return Implies(left, self.implies())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.current.text == "|":
            self.advance()
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.until()]
        while self.current.text == "&":
            self.advance()
            parts.append(self.until())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def until(self) -> Formula:
        left = self.unary()
        if self.current.text == "U":
            self.advance()
            return Until(left, self.until())
        return left

    def unary(self) -> Formula:
        tok = self.current
        if tok.text == "!":
            self.advance()
            return Not(self.unary())
        if tok.text == "X":
            self.advance()
            return Next(self.unary())
        if tok.text == "F":
            self.advance()
            return Eventually(self.unary())
        if tok.text == "G":
            self.advance()
            return Always(self.unary())
        return self.atom()

    def atom(self) -> Formula:
        tok = self.current
        if tok.text == "(":
            self.advance()
            f = self.implies()
            self.expect(")")
            return f
        if tok.text == "true":
            self.advance()
            return TRUE
        if tok.text == "false":
            self.advance()
            return FALSE
        if tok.text == "P":
            return self.probability()
        if tok.kind == "ident" and tok.text not in KEYWORDS:
            self.advance()
            return Prop(tok.text)
        self.error("expected a formula")

    def probability(self) -> Formula:
        self.expect("P")
        if self.current.kind != "cmp":
            self.error("expected a comparison after P")
        cmp = Comparison(self.advance().text)
        if self.current.kind != "number":
            self.error("expected a probability bound")
        tok = self.advance()
        try:
            bound = parse_number(tok.text)
        except ZeroDivisionError:
            raise ParseError(f"zero denominator in {tok.text}", tok.line, tok.col) from None
        if not 0 <= bound <= 1:
            raise ParseError(f"probability bound {tok.text} outside [0, 1]", tok.line, tok.col)
        self.expect("[")
        operand = self.implies()
        self.expect("]")
        return Prob(cmp, bound, operand)


def parse_formula(text: str) -> Formula:
    """Parse surface syntax.  Raises :class:`ParseError` with a position."""
    return _Parser(text).parse()


def parse_trace(text: str) -> Trace:
    """Parse a trace: steps separated by ';', variables by ',', '-' is empty."""
    steps = []
    for raw in text.split(";"):
        step = raw.strip()
        if not step:
            raise ValueError(f"empty trace step in {text!r}")
        if step == "-":
            steps.append(frozenset())
            continue
        names = []
        for name in step.split(","):
            name = name.strip()
            if not is_proposition_name(name):
                raise ValueError(f"invalid variable name {name!r} in trace step {step!r}")
            names.append(name)
        steps.append(frozenset(names))
    return tuple(steps)


def format_trace(trace: Trace) -> str:
    return ";".join("-" if not step else ",".join(sorted(step)) for step in trace)


def all_valuations(names) -> tuple:
    """Every subset of the given variable names, lexicographically ordered."""
    ordered = sorted(names)
    out = []
    for mask in range(1 << len(ordered)):
        out.append(frozenset(n for i, n in enumerate(ordered) if mask >> i & 1))
    return tuple(sorted(out, key=lambda v: tuple(sorted(v))))
