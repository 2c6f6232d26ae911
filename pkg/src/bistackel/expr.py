"""Expression trees over named variables with exact rational constants.

Grammar (whitespace-insensitive)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := '-'? base ('^' '-'? integer)?
    base   := number | ident | '(' expr ')' | ('exp'|'sqrt') '(' expr ')'

Trees are immutable.  There is no canonical simplification: identities are
tested by evaluating at random points (``equal_on_samples``).  Evaluation is
done through a small code generator so the same tree can be evaluated on
floats, numpy arrays (row-vectorised) and ``DualNumber`` objects.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .dual import DualNumber
from .errors import DomainError, ExpressionSyntaxError, UnknownVariable

__all__ = [
    "Expression", "Const", "Var", "Sum", "Product", "Quotient", "Power", "Neg", "Func",
    "parse", "to_text", "differentiate", "substitute", "evaluate", "evaluate_dual",
    "compile_expression", "equal_on_samples", "compare_on_samples", "const", "var",
    "free_variables", "FUNCTIONS",
]

FUNCTIONS = ("exp", "sqrt")


class Expression:
    """Base class; concrete node types are frozen dataclasses below."""

    __slots__ = ()

    def __add__(self, other):
        return make_sum([self, _coerce(other)])

    def __radd__(self, other):
        return make_sum([_coerce(other), self])

    def __sub__(self, other):
        return make_sum([self, make_neg(_coerce(other))])

    def __rsub__(self, other):
        return make_sum([_coerce(other), make_neg(self)])

    def __mul__(self, other):
        return make_product([self, _coerce(other)])

    def __rmul__(self, other):
        return make_product([_coerce(other), self])

    def __truediv__(self, other):
        return make_quotient(self, _coerce(other))

    def __rtruediv__(self, other):
        return make_quotient(_coerce(other), self)

    def __neg__(self):
        return make_neg(self)

    def __pow__(self, k: int):
        if not isinstance(k, int):
            raise TypeError("only integer powers are supported")
        return make_power(self, k)

    def __str__(self) -> str:
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Const(Expression):
    value: Fraction


@dataclass(frozen=True, eq=True)
class Var(Expression):
    name: str


@dataclass(frozen=True, eq=True)
class Sum(Expression):
    terms: tuple


@dataclass(frozen=True, eq=True)
class Product(Expression):
    factors: tuple


@dataclass(frozen=True, eq=True)
class Quotient(Expression):
    num: Expression
    den: Expression


@dataclass(frozen=True, eq=True)
class Power(Expression):
    base: Expression
    exponent: int


@dataclass(frozen=True, eq=True)
class Neg(Expression):
    arg: Expression


@dataclass(frozen=True, eq=True)
class Func(Expression):
    name: str
    arg: Expression


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def const(x) -> Const:
    if isinstance(x, float):
        x = Fraction(x).limit_denominator(10**12)
    return Const(Fraction(x))


def var(name: str) -> Var:
    return Var(name)


def _coerce(x) -> Expression:
    if isinstance(x, Expression):
        return x
    if isinstance(x, (int, Fraction, float)):
        return const(x)
    raise TypeError(f"cannot use {type(x).__name__} in an expression")


def _is_const(e, value=None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


# ---------------------------------------------------------------------------
# light-weight constructors (fold 0/1 and nested constants, nothing else)

def make_sum(terms: Iterable[Expression]) -> Expression:
    flat = []
    c = Fraction(0)
    pending = list(terms)
    pending.reverse()
    while pending:
        t = pending.pop()
        if isinstance(t, Sum):
            pending.extend(reversed(t.terms))
        elif isinstance(t, Const):
            c += t.value
        elif isinstance(t, Neg) and isinstance(t.arg, Const):
            c -= t.arg.value
        else:
            flat.append(t)
    if c != 0:
        flat.append(Const(c))
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def make_neg(e: Expression) -> Expression:
    if isinstance(e, Const):
        return Const(-e.value)
    if isinstance(e, Neg):
        return e.arg
    return Neg(e)


def make_product(factors: Iterable[Expression]) -> Expression:
    flat = []
    c = Fraction(1)
    pending = list(factors)
    pending.reverse()
    while pending:
        f = pending.pop()
        if isinstance(f, Product):
            pending.extend(reversed(f.factors))
        elif isinstance(f, Const):
            c *= f.value
        else:
            flat.append(f)
    if c == 0:
        return ZERO
    if not flat:
        return Const(c)
    if c != 1:
        if c == -1:
            body = flat[0] if len(flat) == 1 else Product(tuple(flat))
            return make_neg(body)
        flat.insert(0, Const(c))
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def make_quotient(num: Expression, den: Expression) -> Expression:
    if _is_const(den, 0):
        raise ZeroDivisionError("quotient with literal zero denominator")
    if _is_const(num, 0):
        return ZERO
    if _is_const(den, 1):
        return num
    if isinstance(den, Const):
        return make_product([Const(1 / den.value), num])
    return Quotient(num, den)


def make_power(base: Expression, k: int) -> Expression:
    if k == 0:
        return ONE
    if k == 1:
        return base
    if isinstance(base, Const):
        if base.value == 0 and k < 0:
            raise ZeroDivisionError("negative power of literal zero")
        return Const(base.value**k)
    return Power(base, int(k))


def make_func(name: str, arg: Expression) -> Expression:
    if name not in FUNCTIONS:
        raise ValueError(f"unsupported function {name!r}")
    return Func(name, arg)


def exp(e) -> Expression:
    return make_func("exp", _coerce(e))


def sqrt(e) -> Expression:
    return make_func("sqrt", _coerce(e))


# ---------------------------------------------------------------------------
# parsing

_TOKEN = re.compile(r"\s*(?:(\d+\.\d*|\.\d+|\d+)|([A-Za-z][A-Za-z0-9]*)|(\S))")


def _tokenize(text: str):
    pos = 0
    tokens = []
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:  # only trailing whitespace left
            break
        if m.group(1):
            tokens.append(("num", m.group(1), m.start(1)))
        elif m.group(2):
            tokens.append(("ident", m.group(2), m.start(2)))
        elif m.group(3):
            ch = m.group(3)
            if ch not in "+-*/^()":
                raise ExpressionSyntaxError(f"unexpected character {ch!r}", m.start(3), text)
            tokens.append(("op", ch, m.start(3)))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, allowed: frozenset[str]):
        self.text = text
        self.allowed = allowed
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message, tok=None):
        tok = tok or self.peek()
        found = "end of input" if tok[0] == "end" else repr(tok[1])
        raise ExpressionSyntaxError(f"{message}, found {found}", tok[2], self.text)

    def expect(self, op):
        tok = self.peek()
        if tok[0] != "op" or tok[1] != op:
            self.error(f"expected {op!r}")
        return self.take()

    def parse(self) -> Expression:
        e = self.expr()
        if self.peek()[0] != "end":
            self.error("unexpected token")
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek()[0] == "op" and self.peek()[1] in "+-":
            op = self.take()[1]
            t = self.term()
            terms.append(t if op == "+" else Neg(t))
        return terms[0] if len(terms) == 1 else Sum(tuple(terms))

    def term(self):
        acc = self.factor()
        factors = None
        while self.peek()[0] == "op" and self.peek()[1] in "*/":
            op = self.take()[1]
            tok = self.peek()
            f = self.factor()
            if op == "*":
                if factors is None:
                    factors = [acc]
                factors.append(f)
            else:
                if factors is not None:
                    acc = Product(tuple(factors))
                    factors = None
                if _is_const(f, 0):
                    raise ExpressionSyntaxError("division by literal zero", tok[2], self.text)
                acc = Quotient(acc, f)
        if factors is not None:
            acc = Product(tuple(factors))
        return acc

    def factor(self):
        negate = False
        if self.peek()[0] == "op" and self.peek()[1] == "-":
            self.take()
            negate = True
        e = self.base()
        if self.peek()[0] == "op" and self.peek()[1] == "^":
            self.take()
            sign = 1
            if self.peek()[0] == "op" and self.peek()[1] == "-":
                self.take()
                sign = -1
            tok = self.peek()
            if tok[0] != "num" or not tok[1].isdigit():
                self.error("expected integer exponent")
            self.take()
            e = Power(e, sign * int(tok[1]))
        return Neg(e) if negate else e

    def base(self):
        tok = self.peek()
        if tok[0] == "num":
            self.take()
            return Const(Fraction(tok[1]))
        if tok[0] == "ident":
            self.take()
            name = tok[1]
            if name in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Func(name, arg)
            if name not in self.allowed:
                raise UnknownVariable(name, self.allowed)
            return Var(name)
        if tok[0] == "op" and tok[1] == "(":
            self.take()
            e = self.expr()
            self.expect(")")
            return e
        self.error("expected number, variable, function or '('")


def parse(text: str, allowed_vars: Iterable[str]) -> Expression:
    """Parse ``text``; names outside ``allowed_vars`` raise ``UnknownVariable``."""
    if not text or not text.strip():
        raise ExpressionSyntaxError("empty expression", 0, text)
    return _Parser(text, frozenset(allowed_vars)).parse()


# ---------------------------------------------------------------------------
# printing

_PREC = {Sum: 1, Neg: 1, Product: 2, Quotient: 2, Power: 3}


def _const_text(c: Fraction) -> str:
    if c.denominator == 1:
        s = str(c.numerator)
    else:
        s = f"{c.numerator}/{c.denominator}"
    if c < 0:
        return f"({s})"
    return s


def _is_atomic(e) -> bool:
    if isinstance(e, (Var, Func)):
        return True
    return isinstance(e, Const) and e.value >= 0 and e.value.denominator == 1


def to_text(e: Expression) -> str:
    if isinstance(e, Const):
        return _const_text(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_text(e.arg)})"
    if isinstance(e, Sum):
        parts = []
        for i, t in enumerate(e.terms):
            if isinstance(t, Neg):
                inner = t.arg
                body = to_text(inner)
                if isinstance(inner, (Sum, Neg)):
                    body = f"({body})"
                parts.append(("-" if i == 0 else " - ") + body)
            else:
                body = to_text(t)
                if isinstance(t, Sum):
                    body = f"({body})"
                parts.append(body if i == 0 else " + " + body)
        return "".join(parts)
    if isinstance(e, Neg):
        body = to_text(e.arg)
        if not (_is_atomic(e.arg) or isinstance(e.arg, (Power, Product, Quotient))):
            body = f"({body})"
        elif isinstance(e.arg, Const) and e.arg.value < 0:
            body = f"({body})"
        return "-" + body
    if isinstance(e, Product):
        out = []
        for i, f in enumerate(e.factors):
            body = to_text(f)
            if isinstance(f, (Sum, Neg)) or (i > 0 and isinstance(f, Quotient)):
                body = f"({body})"
            elif isinstance(f, Const) and f.value.denominator != 1 and i > 0:
                body = f"({body})"
            out.append(body)
        return "*".join(out)
    if isinstance(e, Quotient):
        num = to_text(e.num)
        if isinstance(e.num, (Sum, Neg)):
            num = f"({num})"
        den = to_text(e.den)
        if not (_is_atomic(e.den) or isinstance(e.den, Power)):
            den = f"({den})"
        return f"{num}/{den}"
    if isinstance(e, Power):
        base = to_text(e.base)
        if not _is_atomic(e.base):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    raise TypeError(f"not an expression node: {e!r}")


# ---------------------------------------------------------------------------
# structure

def free_variables(e: Expression) -> set[str]:
    out: set[str] = set()
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, Var):
            out.add(n.name)
        elif isinstance(n, Sum):
            stack.extend(n.terms)
        elif isinstance(n, Product):
            stack.extend(n.factors)
        elif isinstance(n, Quotient):
            stack.extend((n.num, n.den))
        elif isinstance(n, (Power,)):
            stack.append(n.base)
        elif isinstance(n, (Neg, Func)):
            stack.append(n.arg)
    return out


def substitute(e: Expression, mapping: Mapping[str, Expression]) -> Expression:
    """Replace variables by expressions (no re-simplification beyond folding)."""
    if isinstance(e, Var):
        return mapping.get(e.name, e)
    if isinstance(e, Const):
        return e
    if isinstance(e, Sum):
        return make_sum(substitute(t, mapping) for t in e.terms)
    if isinstance(e, Product):
        return make_product(substitute(f, mapping) for f in e.factors)
    if isinstance(e, Quotient):
        return make_quotient(substitute(e.num, mapping), substitute(e.den, mapping))
    if isinstance(e, Power):
        return make_power(substitute(e.base, mapping), e.exponent)
    if isinstance(e, Neg):
        return make_neg(substitute(e.arg, mapping))
    if isinstance(e, Func):
        return Func(e.name, substitute(e.arg, mapping))
    raise TypeError(e)


def differentiate(e: Expression, name: str) -> Expression:
    """Exact symbolic derivative with respect to the variable ``name``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Sum):
        return make_sum(differentiate(t, name) for t in e.terms)
    if isinstance(e, Neg):
        return make_neg(differentiate(e.arg, name))
    if isinstance(e, Product):
        terms = []
        for i, f in enumerate(e.factors):
            df = differentiate(f, name)
            if _is_const(df, 0):
                continue
            terms.append(make_product(e.factors[:i] + (df,) + e.factors[i + 1:]))
        return make_sum(terms)
    if isinstance(e, Quotient):
        du = differentiate(e.num, name)
        dv = differentiate(e.den, name)
        if _is_const(dv, 0):
            return make_quotient(du, e.den)
        top = make_sum([make_product([du, e.den]), make_neg(make_product([e.num, dv]))])
        return make_quotient(top, make_power(e.den, 2))
    if isinstance(e, Power):
        db = differentiate(e.base, name)
        if _is_const(db, 0):
            return ZERO
        return make_product([Const(Fraction(e.exponent)), make_power(e.base, e.exponent - 1), db])
    if isinstance(e, Func):
        da = differentiate(e.arg, name)
        if _is_const(da, 0):
            return ZERO
        if e.name == "exp":
            return make_product([e, da])
        # d sqrt(a) = a' / (2 sqrt(a))
        return make_quotient(da, make_product([Const(Fraction(2)), e]))
    raise TypeError(e)


# ---------------------------------------------------------------------------
# evaluation

def _exp(x):
    if isinstance(x, DualNumber):
        return x.exp()
    if isinstance(x, np.ndarray):
        return np.exp(x)
    return math.exp(x)


def _sqrt(x):
    if isinstance(x, DualNumber):
        return x.sqrt()
    if isinstance(x, np.ndarray):
        if np.any(x < 0):
            raise DomainError("square root of a negative number")
        return np.sqrt(x)
    if x < 0:
        raise DomainError("square root of a negative number")
    return math.sqrt(x)


def _div(a, b):
    if isinstance(b, DualNumber):
        return a / b
    if isinstance(b, np.ndarray):
        if np.any(b == 0):
            raise DomainError("division by zero")
        return a / b
    if b == 0:
        raise DomainError("division by zero")
    return a / b


def _pow(x, k):
    if k < 0:
        return _div(1.0, _pow(x, -k))
    return x**k


_HELPERS = {"_exp": _exp, "_sqrt": _sqrt, "_div": _div, "_pow": _pow}


def _codegen(e: Expression, names: Mapping[str, str]) -> str:
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, Var):
        try:
            return names[e.name]
        except KeyError:
            raise UnknownVariable(e.name, names.keys()) from None
    if isinstance(e, Sum):
        return "(" + " + ".join(_codegen(t, names) for t in e.terms) + ")"
    if isinstance(e, Product):
        return "(" + " * ".join(_codegen(f, names) for f in e.factors) + ")"
    if isinstance(e, Quotient):
        return f"_div({_codegen(e.num, names)}, {_codegen(e.den, names)})"
    if isinstance(e, Power):
        return f"_pow({_codegen(e.base, names)}, {e.exponent})"
    if isinstance(e, Neg):
        return f"(-{_codegen(e.arg, names)})"
    if isinstance(e, Func):
        return f"_{e.name}({_codegen(e.arg, names)})"
    raise TypeError(e)


_COMPILED: dict = {}


def compile_program(
    steps: Sequence[tuple[str, Expression]],
    outputs: Sequence[Expression],
    variables: Sequence[str],
) -> Callable:
    """Compile a straight-line program into ``f(*variables) -> tuple``.

    ``steps`` are named intermediate definitions; later steps and the outputs
    may refer to earlier step names.  Works for floats, arrays and duals.
    """
    names = {v: f"_v{i}" for i, v in enumerate(variables)}
    body = []
    for j, (name, expr) in enumerate(steps):
        code = _codegen(expr, names)
        names = {**names, name: f"_s{j}"}
        body.append(f"    _s{j} = {code}")
    outs = ", ".join(_codegen(o, names) for o in outputs)
    args = ", ".join(f"_v{i}" for i in range(len(variables)))
    src = f"def _f({args}):\n" + "\n".join(body) + f"\n    return ({outs},)\n"
    ns = dict(_HELPERS)
    exec(src, ns)  # noqa: S102 - source generated from validated trees
    return ns["_f"]


def compile_expression(e: Expression, variables: Sequence[str]) -> Callable:
    """Compiled evaluator ``f(*values)`` for a single expression (cached)."""
    key = (id(e), tuple(variables))
    hit = _COMPILED.get(key)
    if hit is not None and hit[0] is e:
        return hit[1]
    prog = compile_program((), (e,), variables)

    def f(*args, _prog=prog):
        return _prog(*args)[0]

    _COMPILED[key] = (e, f)
    return f


def _interpret(e: Expression, env: Mapping[str, object]):
    # slow path, used to pinpoint the failing subtree after a DomainError
    try:
        if isinstance(e, Const):
            return float(e.value)
        if isinstance(e, Var):
            return env[e.name]
        if isinstance(e, Sum):
            vals = [_interpret(t, env) for t in e.terms]
            out = vals[0]
            for v in vals[1:]:
                out = out + v
            return out
        if isinstance(e, Product):
            vals = [_interpret(f, env) for f in e.factors]
            out = vals[0]
            for v in vals[1:]:
                out = out * v
            return out
        if isinstance(e, Quotient):
            return _div(_interpret(e.num, env), _interpret(e.den, env))
        if isinstance(e, Power):
            return _pow(_interpret(e.base, env), e.exponent)
        if isinstance(e, Neg):
            return -_interpret(e.arg, env)
        if isinstance(e, Func):
            return _HELPERS["_" + e.name](_interpret(e.arg, env))
    except DomainError as err:
        if err.subtree is None:
            raise DomainError(str(err), to_text(e)) from None
        raise
    raise TypeError(e)


def _run(e: Expression, env: Mapping[str, object]):
    names = sorted(free_variables(e))
    missing = [n for n in names if n not in env]
    if missing:
        raise UnknownVariable(missing[0], env.keys())
    f = compile_expression(e, names)
    try:
        return f(*(env[n] for n in names))
    except (DomainError, ZeroDivisionError):
        _interpret(e, env)
        raise DomainError("evaluation failed") from None


def evaluate(e: Expression, env: Mapping[str, float]) -> float:
    """Evaluate in binary64.  Raises ``DomainError`` naming the failing subtree."""
    return float(_run(e, {k: float(v) for k, v in env.items()}))


def evaluate_dual(e: Expression, env: Mapping[str, object]) -> DualNumber:
    """Evaluate on dual numbers; the tangent slots hold the gradient of ``e``."""
    duals = [v for v in env.values() if isinstance(v, DualNumber)]
    if not duals:
        raise ValueError("evaluate_dual needs at least one DualNumber in the environment")
    out = _run(e, env)
    if not isinstance(out, DualNumber):
        out = duals[0]._const(out)
    return out


# ---------------------------------------------------------------------------
# randomized identity testing

@dataclass(frozen=True)
class SampleComparison:
    equal: bool
    max_error: float
    samples: int
    worst_point: dict | None


def _sample_env(rng, variables, box, avoid, max_rejects=100):
    lo, hi = box
    for _ in range(max_rejects):
        env = {v: float(x) for v, x in zip(variables, rng.uniform(lo, hi, len(variables)))}
        try:
            if any(abs(evaluate(a, env)) < 1e-3 for a in avoid):
                continue
        except DomainError:
            continue
        return env
    raise DomainError(f"could not draw a regular sample point in {max_rejects} attempts")


def compare_on_samples(
    e1: Expression,
    e2: Expression,
    variables: Sequence[str],
    n_samples: int = 50,
    tol: float = 1e-9,
    seed: int = 0,
    avoid: Sequence[Expression] = (),
    box: tuple[float, float] = (-2.0, 2.0),
) -> SampleComparison:
    """Pointwise comparison at seeded random points.

    The error at a point is ``|e1 - e2| / (1 + max(|e1|, |e2|))``.  Points
    within 1e-3 of a zero of any ``avoid`` expression, or where either side
    fails to evaluate, are redrawn; 100 consecutive failures raise.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_env = None
    for _ in range(n_samples):
        for _attempt in range(100):
            env = _sample_env(rng, variables, box, avoid)
            try:
                a = evaluate(e1, env)
                b = evaluate(e2, env)
            except DomainError:
                continue
            break
        else:
            raise DomainError("could not evaluate both expressions at 100 consecutive points")
        err = abs(a - b) / (1.0 + max(abs(a), abs(b)))
        if err > worst or worst_env is None:
            worst, worst_env = err, env
    return SampleComparison(worst <= tol, worst, n_samples, worst_env)


def equal_on_samples(e1, e2, variables, n_samples=50, tol=1e-9, seed=0, avoid=(), box=(-2.0, 2.0)) -> bool:
    return compare_on_samples(e1, e2, variables, n_samples, tol, seed, avoid, box).equal
