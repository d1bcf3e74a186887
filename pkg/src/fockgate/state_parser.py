"""Text format for Fock-state superpositions and mixtures.

Grammar (whitespace is insignificant)::

    state   := group ['/' divisor]
    group   := '(' expr ')' | expr
    expr    := ['+'|'-'] term (('+'|'-') term)*
    term    := [coef ['*']] ket
    coef    := factor (['*'] factor)*   with '/' divisor allowed between factors
    factor  := INT | DECIMAL | 'sqrt(' INT ['/' INT] ')' | 'i'
    divisor := INT | DECIMAL | 'sqrt(' INT ['/' INT] ')'
    ket     := '|' INT (',' INT)* '>'   or  '|' DIGIT+ '>'

Without commas every digit of a ket is one mode, so ``|11>`` is two modes with
one photon each; occupations of 10 or more need commas.  Integers, fractions,
square roots and ``i`` keep the amplitudes exact; a decimal literal switches the
state to floating point.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

from .errors import (
    EmptyExpression,
    InvalidState,
    MixedPhotonNumber,
    MixtureParseError,
    ProbabilitySumError,
    StateParseError,
    StateSyntaxError,
)
from .exact import Surd, split_square
from .fock_space import DEFAULT_CAP, DensityMatrix, FockBasis, PureState, enumerate_basis, state_from_json

NORM_WARN_TOL = 1e-9
PROB_SUM_TOL = 1e-9


class Token(NamedTuple):
    kind: str
    value: object
    pos: int  # character position


_NUMBER = re.compile(r"\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?")


def _tokenize(text: str) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        ch = text[pos]
        if ch.isspace():
            pos += 1
        elif ch in "+-*/()":
            tokens.append(Token(ch, ch, pos))
            pos += 1
        elif ch == "|":
            tokens.append(_lex_ket(text, pos))
            pos = tokens[-1].value[1]
            tokens[-1] = Token("KET", tokens[-1].value[0], tokens[-1].pos)
        elif text.startswith("sqrt", pos):
            tokens.append(Token("SQRT", "sqrt", pos))
            pos += 4
        elif ch == "i":
            tokens.append(Token("I", ch, pos))
            pos += 1
        elif ch.isdigit() or ch == ".":
            match = _NUMBER.match(text, pos)
            lit = match.group(0)
            if any(c in lit for c in ".eE"):
                tokens.append(Token("DECIMAL", float(lit), pos))
            else:
                tokens.append(Token("INT", int(lit), pos))
            pos = match.end()
        else:
            raise StateSyntaxError(f"unexpected character {ch!r}", _byte(text, pos))
    tokens.append(Token("EOF", None, len(text)))
    return tokens


def _lex_ket(text: str, start: int) -> Token:
    end = text.find(">", start + 1)
    if end < 0:
        raise StateSyntaxError("unterminated ket", _byte(text, start), {">"})
    body = text[start + 1 : end]
    bad = re.search(r"[^\d,\s]", body)
    if bad:
        raise StateSyntaxError(
            f"unexpected {bad.group(0)!r} inside ket", _byte(text, start + 1 + bad.start()), {"digit", ",", ">"}
        )
    compact = re.sub(r"\s+", "", body)
    if not compact:
        raise StateSyntaxError("empty ket", _byte(text, start + 1), {"digit"})
    if "," in compact:
        parts = compact.split(",")
        if any(p == "" for p in parts):
            raise StateSyntaxError("missing occupation between commas", _byte(text, start + 1), {"digit"})
        ket = tuple(int(p) for p in parts)
    else:
        ket = tuple(int(c) for c in compact)
    return Token("KET", (ket, end + 1), start)


def _byte(text: str, pos: int) -> int:
    return len(text[:pos].encode("utf-8"))


@dataclass
class _Scalar:
    """A coefficient carried both as float complex and, while possible, exactly."""

    value: complex
    exact: Surd | None

    def __mul__(self, other: _Scalar) -> _Scalar:
        exact = None if self.exact is None or other.exact is None else self.exact * other.exact
        return _Scalar(self.value * other.value, exact)

    def inverse(self) -> _Scalar:
        if self.value == 0:
            raise ZeroDivisionError
        exact = None
        if self.exact is not None:
            # only real rationals and single square roots occur as divisors
            exact = _invert_simple(self.exact)
        return _Scalar(1 / self.value, exact)

    def neg(self) -> _Scalar:
        return _Scalar(-self.value, None if self.exact is None else -self.exact)


def _invert_simple(x: Surd) -> Surd | None:
    if x.is_rational():
        return Surd(1 / x.to_fraction())
    sq = x * x
    if sq.is_rational():
        # 1/x = x / x^2
        return x / sq.to_fraction()
    return None


_ONE = _Scalar(1 + 0j, Surd(1))


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.k = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.k]

    def error(self, message, expected=()):
        raise StateSyntaxError(message, _byte(self.text, self.tok.pos), expected)

    def take(self, kind) -> Token:
        if self.tok.kind != kind:
            self.error(f"unexpected {self._describe()}", {kind})
        t = self.tok
        self.k += 1
        return t

    def _describe(self):
        t = self.tok
        if t.kind == "EOF":
            return "end of input"
        if t.kind == "ket":
            return f"ket {_ket_text(t.value)}"
        return f"{t.value!r}"

    def parse(self):
        if self.tok.kind == "EOF":
            raise EmptyExpression("empty state expression", 0)
        if self.tok.kind == "(" and self._paren_wraps_expression():
            self.take("(")
            terms = self.expr()
            self.take(")")
        else:
            terms = self.expr()
        scale = _ONE
        if self.tok.kind == "/":
            self.take("/")
            scale = self.divisor().inverse()
        if self.tok.kind != "EOF":
            self.error(f"unexpected {self._describe()}", {"+", "-", "/", "EOF"})
        return [(c * scale, ket, pos) for c, ket, pos in terms]

    def _paren_wraps_expression(self):
        # '(' opens a grouped expression only when a ket appears before its ')'
        depth = 0
        for t in self.tokens[self.k :]:
            if t.kind == "(":
                depth += 1
            elif t.kind == ")":
                depth -= 1
                if depth == 0:
                    return False
            elif t.kind == "KET":
                return True
        return False

    def expr(self):
        terms = []
        sign = None
        if self.tok.kind in ("+", "-"):
            sign = self.take(self.tok.kind).kind
        while True:
            coef, ket, pos = self.term()
            if sign == "-":
                coef = coef.neg()
            terms.append((coef, ket, pos))
            if self.tok.kind in ("+", "-"):
                sign = self.take(self.tok.kind).kind
                continue
            return terms

    def term(self):
        coef = _ONE
        if self.tok.kind != "KET":
            coef = self.coef()
            if self.tok.kind == "*":
                self.take("*")
        if self.tok.kind != "KET":
            self.error(f"unexpected {self._describe()}", {"ket", "*", "INT", "sqrt", "i"})
        t = self.take("KET")
        return coef, t.value, t.pos

    def coef(self):
        value = self.factor()
        while True:
            kind = self.tok.kind
            if kind == "*" and self.tokens[self.k + 1].kind != "KET":
                self.take("*")
                value = value * self.factor()
            elif kind in ("INT", "DECIMAL", "SQRT", "I"):
                value = value * self.factor()
            elif kind == "/":
                self.take("/")
                value = value * self.divisor().inverse()
            else:
                return value

    def factor(self) -> _Scalar:
        t = self.tok
        if t.kind == "INT":
            self.take("INT")
            return _Scalar(complex(t.value), Surd(t.value))
        if t.kind == "DECIMAL":
            self.take("DECIMAL")
            return _Scalar(complex(t.value), None)
        if t.kind == "I":
            self.take("I")
            return _Scalar(1j, Surd.imag_unit())
        if t.kind == "SQRT":
            return self.sqrt()
        if t.kind == "(":
            self.error("parenthesized coefficients are not supported", {"INT", "sqrt", "i"})
        self.error(f"unexpected {self._describe()}", {"INT", "DECIMAL", "sqrt", "i", "ket"})

    def divisor(self) -> _Scalar:
        t = self.tok
        if t.kind == "INT":
            self.take("INT")
            if t.value == 0:
                raise StateSyntaxError("division by zero", _byte(self.text, t.pos))
            return _Scalar(complex(t.value), Surd(t.value))
        if t.kind == "DECIMAL":
            self.take("DECIMAL")
            if t.value == 0:
                raise StateSyntaxError("division by zero", _byte(self.text, t.pos))
            return _Scalar(complex(t.value), None)
        if t.kind == "SQRT":
            s = self.sqrt()
            if s.value == 0:
                raise StateSyntaxError("division by zero", _byte(self.text, t.pos))
            return s
        self.error(f"unexpected {self._describe()}", {"INT", "DECIMAL", "sqrt"})

    def sqrt(self) -> _Scalar:
        self.take("SQRT")
        self.take("(")
        num = self.take("INT").value
        den = 1
        if self.tok.kind == "/":
            self.take("/")
            den = self.take("INT").value
            if den == 0:
                self.error("zero denominator inside sqrt")
        self.take(")")
        q = Fraction(num, den)
        return _Scalar(complex(math.sqrt(q)), Surd.sqrt(q))


class ParsedState(NamedTuple):
    state: PureState
    renormalized: bool
    input_norm: float


def parse_state_expression(text: str) -> ParsedState:
    """Parse and normalize; also report whether the written norm differed from 1."""
    raw = _Parser(text).parse()
    first_ket, first_pos = raw[0][1], raw[0][2]
    for _, ket, pos in raw[1:]:
        if len(ket) != len(first_ket) or sum(ket) != sum(first_ket):
            raise MixedPhotonNumber(first_ket, ket, _byte(text, pos))
    floats: dict = {}
    exact: dict | None = {}
    for coef, ket, _ in raw:
        floats[ket] = floats.get(ket, 0j) + coef.value
        if exact is not None:
            if coef.exact is None:
                exact = None
            else:
                exact[ket] = exact.get(ket, Surd(0)) + coef.exact
    if exact is not None:
        exact = {k: v for k, v in exact.items() if v}
        if not exact:
            raise EmptyExpression("amplitudes cancel to the zero vector", _byte(text, first_pos))
        norm2 = sum((v.abs2() for v in exact.values()), Surd(0))
        if norm2.is_rational():
            q = norm2.to_fraction()
            scale = Surd.sqrt(q) / q  # 1/sqrt(q)
            state = PureState.from_exact({k: v * scale for k, v in exact.items()})
            norm = math.sqrt(q)
            return ParsedState(state, abs(norm - 1) > NORM_WARN_TOL, norm)
    floats = {k: v for k, v in floats.items() if v != 0}
    if not floats:
        raise EmptyExpression("amplitudes cancel to the zero vector", _byte(text, first_pos))
    norm = math.sqrt(sum(abs(v) ** 2 for v in floats.values()))
    if norm < 1e-300:
        raise EmptyExpression("state has zero norm", _byte(text, first_pos))
    state = PureState.from_terms(floats)
    return ParsedState(state, abs(norm - 1) > NORM_WARN_TOL, norm)


def parse_state(text: str) -> PureState:
    return parse_state_expression(text).state


def parse_mixture(source, basis: FockBasis | None = None, cap: int = DEFAULT_CAP) -> DensityMatrix:
    """Density matrix from ``[(p, expr), ...]``, a ``"p: expr; p: expr"`` string or mixture JSON."""
    items = _mixture_items(source)
    if not items:
        raise EmptyExpression("mixture has no components")
    states = []
    for idx, (p, entry) in enumerate(items):
        try:
            p = float(p)
            if isinstance(entry, PureState):
                state = entry
            elif isinstance(entry, str):
                state = parse_state(entry)
            else:
                state = state_from_json(entry)
        except (StateParseError, InvalidState, TypeError, ValueError) as exc:
            raise MixtureParseError(idx, exc) from exc
        if p < 0:
            raise ProbabilitySumError(f"component {idx} has negative probability {p}")
        states.append((p, state))
    total = sum(p for p, _ in states)
    if abs(total - 1.0) > PROB_SUM_TOL:
        raise ProbabilitySumError(f"probabilities sum to {total!r}, not 1")
    m, n = states[0][1].m, states[0][1].n
    for idx, (_, s) in enumerate(states):
        if (s.m, s.n) != (m, n):
            first = next(iter(states[0][1].terms))
            raise MixtureParseError(idx, MixedPhotonNumber(first, next(iter(s.terms))))
    if basis is None:
        basis = enumerate_basis(m, n, cap)
    return DensityMatrix.from_mixture(states, basis)


def _mixture_items(source) -> list:
    if isinstance(source, dict):
        if "mixture" not in source:
            raise StateSyntaxError("mixture JSON needs a 'mixture' list", None)
        return [(c["p"], c["state"]) for c in source["mixture"]]
    if isinstance(source, str):
        stripped = source.strip()
        if stripped.startswith("{") or stripped.startswith("["):
            return _mixture_items(json.loads(stripped))
        items = []
        for chunk in stripped.split(";"):
            if not chunk.strip():
                continue
            p, sep, expr = chunk.partition(":")
            if not sep:
                raise StateSyntaxError("mixture components are written 'p: expression'", None, {":"})
            items.append((p.strip(), expr))
        return items
    return [tuple(item) if not isinstance(item, dict) else (item["p"], item["state"]) for item in source]


def _sqrt_text(k: int) -> str:
    """'s*sqrt(r)' form of sqrt(k)."""
    s, r = split_square(k)
    if r == 1:
        return str(s)
    return f"sqrt({r})" if s == 1 else f"{s}*sqrt({r})"


def _ket_text(ket) -> str:
    return "|" + ",".join(str(x) for x in ket) + ">"


def _detect_exact(state: PureState, max_den=10**6):
    """Write each amplitude as phase * sqrt(r_k / N) with phase in {1, -1, i, -i}, if possible."""
    items = sorted(state.terms.items(), reverse=True)
    ref = items[0][1]
    unit = abs(ref) / ref  # makes the first amplitude real-positive
    out = []
    for ket, amp in items:
        a = amp * unit
        w = Fraction(abs(a) ** 2).limit_denominator(max_den)
        if abs(float(w) - abs(a) ** 2) > 1e-13:
            return None
        phase = a / abs(a)
        for sym, p in (("+", 1), ("-", -1), ("+i", 1j), ("-i", -1j)):
            if abs(phase - p) < 1e-12:
                break
        else:
            return None
        out.append((ket, w, sym))
    N = math.lcm(*(w.denominator for _, w, _ in out))
    return [(ket, int(w * N), sym) for ket, w, sym in out], N


def format_state(state: PureState, style: str = "exact") -> str:
    """Render a state in the input grammar; ``exact`` falls back to ``decimal`` when no closed form is found."""
    if style not in ("exact", "decimal"):
        raise ValueError(f"unknown style {style!r}")
    if style == "exact":
        detected = _detect_exact(state)
        if detected is not None:
            return _format_exact(*detected)
    return _format_decimal(state)


def _format_exact(terms, N) -> str:
    parts = []
    for idx, (ket, r, sym) in enumerate(terms):
        mag = _sqrt_text(r)
        imag = sym.endswith("i")
        coef = [] if mag == "1" else [mag]
        if imag:
            coef.append("i")
        body = "*".join(coef + [_ket_text(ket)])
        neg = sym.startswith("-")
        if idx == 0:
            parts.append(("-" if neg else "") + body)
        else:
            parts.append((" - " if neg else " + ") + body)
    expr = "".join(parts)
    if N == 1:
        return expr
    s, r = split_square(N)
    divisor = str(s) if r == 1 else (f"sqrt({N})")
    if len(terms) == 1:
        return f"{expr}/{divisor}"
    return f"({expr})/{divisor}"


def _format_decimal(state: PureState) -> str:
    parts = []
    for ket, amp in sorted(state.terms.items(), reverse=True):
        for value, suffix in ((amp.real, ""), (amp.imag, "*i")):
            if value == 0:
                continue
            sign = "-" if value < 0 else "+"
            parts.append(f" {sign} {abs(value)!r}{suffix}*{_ket_text(ket)}")
    text = "".join(parts).strip()
    return text[2:] if text.startswith("+ ") else "-" + text[2:]
