"""Formula ASTs, concrete syntax, horizons, and the resiliency compiler.

Two formula languages share one lexer.  Plain STL formulas are built
from affine atoms with `not`, `and`, `or`, bounded `U`, `G`, `F`.  The
resiliency language has the same connectives but its atoms are
`R[alpha,beta](phi)`: the wrapped STL formula phi recovers within alpha
steps and afterwards holds for beta steps.  `srs_to_stl` compiles a
resiliency formula to plain STL, which is how its Boolean meaning is
defined.

All temporal bounds are integer step offsets.  Text written with bounds
in seconds can be parsed by passing `seconds_dt`; bounds are divided by
dt and must land on whole steps.

Grammar (both levels; `not` binds tightest, then `and`, `or`, `U`):

    srs    := ratom | 'not' srs | srs ('and'|'or') srs
            | srs 'U' ival srs | ('G'|'F') ival srs | '(' srs ')'
    ratom  := 'R' '[' num ',' num ']' '(' stl ')'
    stl    := atom | 'not' stl | stl ('and'|'or') stl
            | stl 'U' ival stl | ('G'|'F') ival stl | '(' stl ')'
    atom   := affine ('>='|'<='|'>'|'<') number
    affine := ['-'] term (('+'|'-') term)*
    term   := number '*' name | number | name
    ival   := '[' num ',' num ']'        (also '[' num ',' num ')' for G)

Strict comparisons are accepted but treated as their non-strict
counterparts, with a StrictComparisonWarning.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Optional, Union

from .errors import ParseError, StrictComparisonWarning


# ---------------------------------------------------------------------------
# AST types


@dataclass(frozen=True)
class Interval:
    """Integer interval of step offsets with 0 <= lo <= hi."""

    lo: int
    hi: int

    def __post_init__(self):
        if not (isinstance(self.lo, int) and isinstance(self.hi, int)):
            raise ValueError("interval bounds must be integers")
        if self.lo < 0:
            raise ValueError(f"interval bounds must be non-negative, got lo={self.lo}")
        if self.lo > self.hi:
            raise ValueError(f"interval [{self.lo},{self.hi}] is empty (lo > hi)")

    def offsets(self) -> range:
        """All offsets of the closed interval."""
        return range(self.lo, self.hi + 1)


@dataclass(frozen=True)
class AffineExpr:
    """Linear combination of channel values plus a constant."""

    terms: tuple[tuple[float, str], ...]
    constant: float = 0.0

    def __post_init__(self):
        terms = tuple((float(c), str(n)) for c, n in self.terms)
        if any(not math.isfinite(c) for c, _ in terms):
            raise ValueError("affine coefficients must be finite")
        if not math.isfinite(float(self.constant)):
            raise ValueError("affine constant must be finite")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "constant", float(self.constant))

    def channels(self) -> tuple[str, ...]:
        return tuple(name for _, name in self.terms)


class StlFormula:
    """Base class for plain STL nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return stl_to_text(self)


class SrsFormula:
    """Base class for resiliency-level nodes."""

    __slots__ = ()

    def __str__(self) -> str:
        return srs_to_text(self)


@dataclass(frozen=True)
class Atom(StlFormula):
    """Affine predicate `expr op const` with op '>=' or '<='."""

    expr: AffineExpr
    op: str
    const: float

    def __post_init__(self):
        if self.op not in (">=", "<="):
            raise ValueError(f"atom comparison must be '>=' or '<=', got {self.op!r}")
        if not math.isfinite(float(self.const)):
            raise ValueError("atom threshold must be finite")
        object.__setattr__(self, "const", float(self.const))


@dataclass(frozen=True)
class Not(StlFormula):
    child: StlFormula


@dataclass(frozen=True)
class And(StlFormula):
    left: StlFormula
    right: StlFormula


@dataclass(frozen=True)
class Or(StlFormula):
    left: StlFormula
    right: StlFormula


@dataclass(frozen=True)
class Until(StlFormula):
    """left holds from t until right holds at some offset in the interval."""

    interval: Interval
    left: StlFormula
    right: StlFormula


@dataclass(frozen=True)
class Always(StlFormula):
    """child holds at every offset in the interval.

    With closed=False the interval is half-open [lo, hi): the window is
    the offsets lo..hi-1, which may be empty (then the formula is
    vacuously true).
    """

    interval: Interval
    child: StlFormula
    closed: bool = True


@dataclass(frozen=True)
class Eventually(StlFormula):
    interval: Interval
    child: StlFormula


@dataclass(frozen=True)
class RAtom(SrsFormula):
    """Resiliency atom: body recovers within alpha steps, then holds for
    beta steps."""

    alpha: int
    beta: int
    body: StlFormula

    def __post_init__(self):
        if not (isinstance(self.alpha, int) and isinstance(self.beta, int)):
            raise ValueError("resiliency bounds must be integers")
        if self.alpha < 0:
            raise ValueError(f"recovery bound must be non-negative, got {self.alpha}")
        if self.beta < 1:
            raise ValueError(f"durability bound must be positive, got {self.beta}")


@dataclass(frozen=True)
class SrsNot(SrsFormula):
    child: SrsFormula


@dataclass(frozen=True)
class SrsAnd(SrsFormula):
    left: SrsFormula
    right: SrsFormula


@dataclass(frozen=True)
class SrsOr(SrsFormula):
    left: SrsFormula
    right: SrsFormula


@dataclass(frozen=True)
class SrsUntil(SrsFormula):
    interval: Interval
    left: SrsFormula
    right: SrsFormula


@dataclass(frozen=True)
class SrsAlways(SrsFormula):
    interval: Interval
    child: SrsFormula


@dataclass(frozen=True)
class SrsEventually(SrsFormula):
    interval: Interval
    child: SrsFormula


Formula = Union[StlFormula, SrsFormula]


# ---------------------------------------------------------------------------
# Structural measures and compilation


def horizon(formula: Formula) -> int:
    """Largest step offset past t that evaluation at t can inspect.

    Evaluating a formula at time t only ever reads samples in
    [t, t + horizon].  Nested temporal operators add their upper bounds;
    a half-open window reaches one step less than a closed one.
    """
    f = formula
    if isinstance(f, Atom):
        return 0
    if isinstance(f, (Not, SrsNot)):
        return horizon(f.child)
    if isinstance(f, (And, Or, SrsAnd, SrsOr)):
        return max(horizon(f.left), horizon(f.right))
    if isinstance(f, (Until, SrsUntil)):
        return f.interval.hi + max(horizon(f.left), horizon(f.right))
    if isinstance(f, Always):
        hi = f.interval.hi if f.closed else f.interval.hi - 1
        if hi < f.interval.lo:
            return 0
        return hi + horizon(f.child)
    if isinstance(f, (Eventually, SrsAlways, SrsEventually)):
        return f.interval.hi + horizon(f.child)
    if isinstance(f, RAtom):
        return f.alpha + (f.beta - 1) + horizon(f.body)
    raise TypeError(f"not a formula: {f!r}")


def srs_to_stl(psi: SrsFormula) -> StlFormula:
    """Compile a resiliency formula to the STL formula defining its
    Boolean meaning.

    R[a,b](phi) becomes (not phi) U[0,a] G[0,b) phi: within a steps phi
    starts an uninterrupted stretch of b steps, and phi is false while
    we wait for that stretch.  Connectives map one to one.
    """
    if isinstance(psi, RAtom):
        return Until(
            Interval(0, psi.alpha),
            Not(psi.body),
            Always(Interval(0, psi.beta), psi.body, closed=False),
        )
    if isinstance(psi, SrsNot):
        return Not(srs_to_stl(psi.child))
    if isinstance(psi, SrsAnd):
        return And(srs_to_stl(psi.left), srs_to_stl(psi.right))
    if isinstance(psi, SrsOr):
        return Or(srs_to_stl(psi.left), srs_to_stl(psi.right))
    if isinstance(psi, SrsUntil):
        return Until(psi.interval, srs_to_stl(psi.left), srs_to_stl(psi.right))
    if isinstance(psi, SrsAlways):
        return Always(psi.interval, srs_to_stl(psi.child), closed=True)
    if isinstance(psi, SrsEventually):
        return Eventually(psi.interval, srs_to_stl(psi.child))
    raise TypeError(f"not a resiliency formula: {psi!r}")


# ---------------------------------------------------------------------------
# Lexer

_RESERVED = frozenset({"not", "and", "or", "R", "G", "F", "U", "inf"})


@dataclass
class _Token:
    kind: str
    text: str
    line: int
    col: int
    value: float = 0.0
    is_int: bool = False


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            col += 1
            i += 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = seen_exp = False
            while j < n:
                c = text[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j + 1 < n and (
                    text[j + 1].isdigit()
                    or (text[j + 1] in "+-" and j + 2 < n and text[j + 2].isdigit())
                ):
                    seen_exp = True
                    j += 2 if text[j + 1] in "+-" else 1
                else:
                    break
            lit = text[i:j]
            tokens.append(
                _Token("NUM", lit, line, col, value=float(lit),
                       is_int=not (seen_dot or seen_exp))
            )
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("IDENT", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if text[i:i + 2] in (">=", "<="):
            tokens.append(_Token(text[i:i + 2], text[i:i + 2], line, col))
            col += 2
            i += 2
            continue
        if ch in "()[],+-*<>":
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("EOF", "", line, col))
    return tokens


# ---------------------------------------------------------------------------
# Parser


class _Parser:
    def __init__(self, text: str, seconds_dt: Optional[float]):
        if seconds_dt is not None and not (
            math.isfinite(seconds_dt) and seconds_dt > 0
        ):
            raise ValueError(f"seconds_dt must be a positive number, got {seconds_dt}")
        self.tokens = _tokenize(text)
        self.pos = 0
        self.dt = seconds_dt

    # -- token plumbing

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def fail(self, message: str, tok: Optional[_Token] = None):
        tok = tok or self.peek()
        raise ParseError(message, tok.line, tok.col)

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.peek()
        if tok.kind != kind:
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            self.fail(f"expected {what}, found {found}")
        return self.advance()

    def at_word(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "IDENT" and tok.text == word

    def finish(self):
        tok = self.peek()
        if tok.kind != "EOF":
            self.fail(f"unexpected trailing input {tok.text!r}")

    # -- shared pieces

    def time_bound(self, what: str) -> tuple[int, _Token]:
        tok = self.peek()
        if tok.kind == "-":
            self.fail(f"{what} must be non-negative")
        if tok.kind == "IDENT" and tok.text == "inf":
            self.fail(
                f"unbounded {what} 'inf' is not supported: "
                "offline monitoring needs a finite horizon"
            )
        tok = self.expect("NUM", "a number")
        if self.dt is None:
            if tok.is_int or tok.value.is_integer():
                return int(tok.value), tok
            self.fail(
                f"{what} must be a whole number of steps, got {tok.text}; "
                "use seconds mode to write bounds in seconds",
                tok,
            )
        steps = tok.value / self.dt
        rounded = round(steps)
        if abs(steps - rounded) > 1e-9 * max(1.0, abs(rounded)):
            self.fail(
                f"{what} {tok.text}s is not a whole number of steps at dt={self.dt}",
                tok,
            )
        return int(rounded), tok

    def interval(self, operator: str) -> tuple[Interval, bool]:
        self.expect("[", "'['")
        lo_tok = self.peek()
        lo, _ = self.time_bound("interval bound")
        self.expect(",", "','")
        hi, _ = self.time_bound("interval bound")
        closer = self.peek()
        if closer.kind == "]":
            self.advance()
            closed = True
        elif closer.kind == ")":
            if operator != "G":
                self.fail("half-open intervals are only supported on G")
            self.advance()
            closed = False
        else:
            found = "end of input" if closer.kind == "EOF" else repr(closer.text)
            self.fail(f"expected ']' or ')', found {found}")
        if lo > hi:
            self.fail(f"interval [{lo},{hi}] is empty (lo > hi)", lo_tok)
        return Interval(lo, hi), closed

    def channel(self) -> _Token:
        tok = self.peek()
        if tok.kind != "IDENT":
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            self.fail(f"expected a channel name, found {found}")
        if tok.text in _RESERVED:
            self.fail(f"reserved word {tok.text!r} cannot be used as a channel name")
        return self.advance()

    def signed_number(self) -> float:
        sign = 1.0
        if self.peek().kind == "-":
            self.advance()
            sign = -1.0
        tok = self.expect("NUM", "a number")
        return sign * tok.value

    # -- STL level

    def stl(self) -> StlFormula:
        left = self.stl_or()
        if self.at_word("U"):
            self.advance()
            ival, _ = self.interval("U")
            right = self.stl()
            return Until(ival, left, right)
        return left

    def stl_or(self) -> StlFormula:
        f = self.stl_and()
        while self.at_word("or"):
            self.advance()
            f = Or(f, self.stl_and())
        return f

    def stl_and(self) -> StlFormula:
        f = self.stl_unary()
        while self.at_word("and"):
            self.advance()
            f = And(f, self.stl_unary())
        return f

    def stl_unary(self) -> StlFormula:
        if self.at_word("not"):
            self.advance()
            return Not(self.stl_unary())
        if self.at_word("G"):
            self.advance()
            ival, closed = self.interval("G")
            return Always(ival, self.stl_unary(), closed=closed)
        if self.at_word("F"):
            self.advance()
            ival, _ = self.interval("F")
            return Eventually(ival, self.stl_unary())
        if self.peek().kind == "(":
            self.advance()
            f = self.stl()
            self.expect(")", "')'")
            return f
        return self.atom()

    def atom(self) -> Atom:
        expr = self.affine()
        tok = self.peek()
        if tok.kind in (">=", "<="):
            op = self.advance().kind
        elif tok.kind in (">", "<"):
            self.advance()
            op = ">=" if tok.kind == ">" else "<="
            warnings.warn(
                StrictComparisonWarning(
                    f"strict comparison {tok.kind!r} at {tok.line}:{tok.col} "
                    f"is treated as {op!r}"
                )
            )
        else:
            found = "end of input" if tok.kind == "EOF" else repr(tok.text)
            self.fail(f"expected a comparison ('>=', '<=', '>', '<'), found {found}")
        const = self.signed_number()
        return Atom(expr, op, const)

    def affine(self) -> AffineExpr:
        terms: list[tuple[float, str]] = []
        constant = 0.0
        sign = 1.0
        if self.peek().kind == "-":
            self.advance()
            sign = -1.0
        while True:
            tok = self.peek()
            if tok.kind == "NUM":
                self.advance()
                value = sign * tok.value
                if self.peek().kind == "*":
                    self.advance()
                    terms.append((value, self.channel().text))
                else:
                    constant += value
            elif tok.kind == "IDENT":
                terms.append((sign, self.channel().text))
            else:
                found = "end of input" if tok.kind == "EOF" else repr(tok.text)
                self.fail(f"expected a channel name or number, found {found}")
            nxt = self.peek()
            if nxt.kind == "+":
                self.advance()
                sign = 1.0
            elif nxt.kind == "-":
                self.advance()
                sign = -1.0
            else:
                break
        return AffineExpr(tuple(terms), constant)

    # -- resiliency level

    def srs(self) -> SrsFormula:
        left = self.srs_or()
        if self.at_word("U"):
            self.advance()
            ival, _ = self.interval("U")
            right = self.srs()
            return SrsUntil(ival, left, right)
        return left

    def srs_or(self) -> SrsFormula:
        f = self.srs_and()
        while self.at_word("or"):
            self.advance()
            f = SrsOr(f, self.srs_and())
        return f

    def srs_and(self) -> SrsFormula:
        f = self.srs_unary()
        while self.at_word("and"):
            self.advance()
            f = SrsAnd(f, self.srs_unary())
        return f

    def srs_unary(self) -> SrsFormula:
        if self.at_word("not"):
            self.advance()
            return SrsNot(self.srs_unary())
        if self.at_word("G"):
            self.advance()
            ival, _ = self.interval("SRS-G")
            return SrsAlways(ival, self.srs_unary())
        if self.at_word("F"):
            self.advance()
            ival, _ = self.interval("F")
            return SrsEventually(ival, self.srs_unary())
        if self.at_word("R"):
            return self.ratom()
        if self.peek().kind == "(":
            self.advance()
            f = self.srs()
            self.expect(")", "')'")
            return f
        tok = self.peek()
        found = "end of input" if tok.kind == "EOF" else repr(tok.text)
        self.fail(
            f"expected a resiliency formula, found {found} "
            "(atoms look like R[alpha,beta](phi))"
        )

    def ratom(self) -> RAtom:
        self.advance()
        self.expect("[", "'['")
        alpha, alpha_tok = self.time_bound("recovery bound")
        self.expect(",", "','")
        beta, beta_tok = self.time_bound("durability bound")
        self.expect("]", "']'")
        if beta < 1:
            self.fail(f"durability bound must be positive, got {beta}", beta_tok)
        self.expect("(", "'('")
        body = self.stl()
        self.expect(")", "')'")
        return RAtom(alpha, beta, body)


def parse_stl(text: str, *, seconds_dt: Optional[float] = None) -> StlFormula:
    """Parse STL text into an AST.  Raises ParseError with line:col."""
    parser = _Parser(text, seconds_dt)
    f = parser.stl()
    parser.finish()
    return f


def parse_srs(text: str, *, seconds_dt: Optional[float] = None) -> SrsFormula:
    """Parse resiliency-formula text into an AST."""
    parser = _Parser(text, seconds_dt)
    f = parser.srs()
    parser.finish()
    return f


# ---------------------------------------------------------------------------
# Canonical printer.  parse(print(ast)) == ast holds for every valid AST.

_PREC_ATOM = 4
_PREC_UNARY = 3
_PREC_AND = 2
_PREC_OR = 1
_PREC_UNTIL = 0


def _fmt_number(x: float) -> str:
    x = float(x)
    return str(int(x)) if x.is_integer() else repr(x)


def _interval_text(ival: Interval, closed: bool = True) -> str:
    return f"[{ival.lo},{ival.hi}{']' if closed else ')'}"


def _affine_text(expr: AffineExpr) -> str:
    parts: list[str] = []
    for coef, name in expr.terms:
        mag = abs(coef)
        body = name if mag == 1 else f"{_fmt_number(mag)}*{name}"
        if not parts:
            parts.append(body if coef >= 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if coef >= 0 else f"- {body}")
    if expr.constant != 0 or not parts:
        if not parts:
            parts.append(_fmt_number(expr.constant))
        elif expr.constant > 0:
            parts.append(f"+ {_fmt_number(expr.constant)}")
        else:
            parts.append(f"- {_fmt_number(abs(expr.constant))}")
    return " ".join(parts)


def _wrap(text: str, prec: int, min_prec: int) -> str:
    return text if prec >= min_prec else f"({text})"


def _stl_text(f: StlFormula, min_prec: int) -> str:
    if isinstance(f, Atom):
        text = f"{_affine_text(f.expr)} {f.op} {_fmt_number(f.const)}"
        return _wrap(text, _PREC_ATOM, min_prec)
    if isinstance(f, Not):
        return _wrap(f"not {_stl_text(f.child, _PREC_UNARY)}", _PREC_UNARY, min_prec)
    if isinstance(f, Always):
        text = f"G{_interval_text(f.interval, f.closed)} {_stl_text(f.child, _PREC_UNARY)}"
        return _wrap(text, _PREC_UNARY, min_prec)
    if isinstance(f, Eventually):
        text = f"F{_interval_text(f.interval)} {_stl_text(f.child, _PREC_UNARY)}"
        return _wrap(text, _PREC_UNARY, min_prec)
    if isinstance(f, And):
        text = f"{_stl_text(f.left, _PREC_AND)} and {_stl_text(f.right, _PREC_AND + 1)}"
        return _wrap(text, _PREC_AND, min_prec)
    if isinstance(f, Or):
        text = f"{_stl_text(f.left, _PREC_OR)} or {_stl_text(f.right, _PREC_OR + 1)}"
        return _wrap(text, _PREC_OR, min_prec)
    if isinstance(f, Until):
        text = (
            f"{_stl_text(f.left, _PREC_UNTIL + 1)} U{_interval_text(f.interval)} "
            f"{_stl_text(f.right, _PREC_UNTIL)}"
        )
        return _wrap(text, _PREC_UNTIL, min_prec)
    raise TypeError(f"not an STL formula: {f!r}")


def _srs_text(f: SrsFormula, min_prec: int) -> str:
    if isinstance(f, RAtom):
        text = f"R[{f.alpha},{f.beta}]({_stl_text(f.body, _PREC_UNTIL)})"
        return _wrap(text, _PREC_ATOM, min_prec)
    if isinstance(f, SrsNot):
        return _wrap(f"not {_srs_text(f.child, _PREC_UNARY)}", _PREC_UNARY, min_prec)
    if isinstance(f, SrsAlways):
        text = f"G{_interval_text(f.interval)} {_srs_text(f.child, _PREC_UNARY)}"
        return _wrap(text, _PREC_UNARY, min_prec)
    if isinstance(f, SrsEventually):
        text = f"F{_interval_text(f.interval)} {_srs_text(f.child, _PREC_UNARY)}"
        return _wrap(text, _PREC_UNARY, min_prec)
    if isinstance(f, SrsAnd):
        text = f"{_srs_text(f.left, _PREC_AND)} and {_srs_text(f.right, _PREC_AND + 1)}"
        return _wrap(text, _PREC_AND, min_prec)
    if isinstance(f, SrsOr):
        text = f"{_srs_text(f.left, _PREC_OR)} or {_srs_text(f.right, _PREC_OR + 1)}"
        return _wrap(text, _PREC_OR, min_prec)
    if isinstance(f, SrsUntil):
        text = (
            f"{_srs_text(f.left, _PREC_UNTIL + 1)} U{_interval_text(f.interval)} "
            f"{_srs_text(f.right, _PREC_UNTIL)}"
        )
        return _wrap(text, _PREC_UNTIL, min_prec)
    raise TypeError(f"not a resiliency formula: {f!r}")


def stl_to_text(phi: StlFormula) -> str:
    """Canonical text for an STL formula; parse_stl inverts it."""
    return _stl_text(phi, _PREC_UNTIL)


def srs_to_text(psi: SrsFormula) -> str:
    """Canonical text for a resiliency formula; parse_srs inverts it."""
    return _srs_text(psi, _PREC_UNTIL)
