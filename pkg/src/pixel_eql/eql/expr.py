# pixel_eql/eql/expr.py
"""
Symbolic expressions extracted from an EQL network.

Two forms are kept:

- :class:`SymbolicExpr`, a canonical polynomial: a mapping from monomials to
  float coefficients. A monomial is a tuple of ``(variable, power)`` pairs
  sorted by variable name, the empty tuple being the constant term.
- A small tree form (:class:`Const`, :class:`Var`, :class:`Add`,
  :class:`Mul`, :class:`Pow`) that expands into a :class:`SymbolicExpr`.

Coefficients are never rounded; rounding happens only when printing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

from pixel_eql.errors import ContractError

logger = logging.getLogger(__name__)

Monomial = Tuple[Tuple[str, int], ...]
Value = Union[float, np.ndarray]

ONE: Monomial = ()


def _merge(a: Monomial, b: Monomial) -> Monomial:
    powers: Dict[str, int] = dict(a)
    for var, p in b:
        powers[var] = powers.get(var, 0) + p
    return tuple(sorted(powers.items()))


def degree(monomial: Monomial) -> int:
    return sum(p for _, p in monomial)


def term_order(monomial: Monomial) -> tuple:
    """Graded lexicographic key: higher degree first, then variable names; constant last."""
    expanded = tuple(var for var, p in monomial for _ in range(p))
    return (-degree(monomial), expanded)


class SymbolicExpr:
    """A polynomial with float coefficients over named variables."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping[Monomial, float] | None = None) -> None:
        self.terms: Dict[Monomial, float] = {}
        for mono, coeff in (terms or {}).items():
            if coeff != 0.0:
                self.terms[tuple(sorted(mono))] = float(coeff)

    # ---- constructors ----
    @classmethod
    def constant(cls, value: float) -> "SymbolicExpr":
        return cls({ONE: value})

    @classmethod
    def variable(cls, name: str) -> "SymbolicExpr":
        return cls({((name, 1),): 1.0})

    @classmethod
    def affine(cls, weights: Iterable[float], inputs: Iterable["SymbolicExpr"], bias: float) -> "SymbolicExpr":
        """``sum_j w_j x_j + b``, skipping exactly-zero weights."""
        acc: Dict[Monomial, float] = {ONE: float(bias)} if bias != 0.0 else {}
        for w, x in zip(weights, inputs):
            if w == 0.0:
                continue
            for mono, c in x.terms.items():
                acc[mono] = acc.get(mono, 0.0) + float(w) * c
        return cls(acc)

    # ---- arithmetic ----
    def __add__(self, other: "SymbolicExpr | float") -> "SymbolicExpr":
        other = _coerce(other)
        acc = dict(self.terms)
        for mono, c in other.terms.items():
            acc[mono] = acc.get(mono, 0.0) + c
        return SymbolicExpr(acc)

    __radd__ = __add__

    def __neg__(self) -> "SymbolicExpr":
        return self.scale(-1.0)

    def __sub__(self, other: "SymbolicExpr | float") -> "SymbolicExpr":
        return self + (-_coerce(other))

    def __mul__(self, other: "SymbolicExpr | float") -> "SymbolicExpr":
        if isinstance(other, (int, float)):
            return self.scale(float(other))
        acc: Dict[Monomial, float] = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                mono = _merge(m1, m2)
                acc[mono] = acc.get(mono, 0.0) + c1 * c2
        return SymbolicExpr(acc)

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> "SymbolicExpr":
        if not isinstance(exponent, int) or exponent < 0:
            raise ContractError("only non-negative integer powers are supported")
        result = SymbolicExpr.constant(1.0)
        for _ in range(exponent):
            result = result * self
        return result

    def scale(self, factor: float) -> "SymbolicExpr":
        return SymbolicExpr({m: c * factor for m, c in self.terms.items()})

    # ---- inspection ----
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SymbolicExpr):
            return NotImplemented
        return self.terms == other.terms

    def __repr__(self) -> str:
        return f"SymbolicExpr({self.sorted_terms()!r})"

    def sorted_terms(self) -> list[tuple[Monomial, float]]:
        return sorted(self.terms.items(), key=lambda item: term_order(item[0]))

    def variables(self) -> set[str]:
        return {var for mono in self.terms for var, _ in mono}

    def degree(self) -> int:
        return max((degree(m) for m in self.terms), default=0)

    def coefficient(self, monomial: Monomial) -> float:
        return self.terms.get(tuple(sorted(monomial)), 0.0)

    def evaluate(self, values: Mapping[str, Value]) -> Value:
        """
        Evaluate at ``values``; arrays broadcast, so one call can score many points.

        Raises:
            ContractError: if a variable has no value.
        """
        missing = self.variables() - set(values)
        if missing:
            raise ContractError(f"no value for variable(s) {sorted(missing)}")
        total: Value = 0.0
        for mono, coeff in self.sorted_terms():
            term: Value = coeff
            for var, p in mono:
                term = term * np.asarray(values[var], dtype=np.float64) ** p
            total = total + term
        return total

    def to_ast(self) -> "Node":
        terms: list[Node] = []
        for mono, coeff in self.sorted_terms():
            factors: list[Node] = [Const(coeff)]
            factors += [Var(v) if p == 1 else Pow(Var(v), p) for v, p in mono]
            terms.append(factors[0] if len(factors) == 1 else Mul(tuple(factors)))
        return Add(tuple(terms))


def _coerce(value: "SymbolicExpr | float") -> SymbolicExpr:
    if isinstance(value, SymbolicExpr):
        return value
    return SymbolicExpr.constant(float(value))


# ---------------- tree form ----------------


class Node:
    def expand(self) -> SymbolicExpr:
        raise NotImplementedError

    def evaluate(self, values: Mapping[str, Value]) -> Value:
        return self.expand().evaluate(values)


@dataclass(frozen=True)
class Const(Node):
    value: float

    def expand(self) -> SymbolicExpr:
        return SymbolicExpr.constant(self.value)


@dataclass(frozen=True)
class Var(Node):
    name: str

    def expand(self) -> SymbolicExpr:
        return SymbolicExpr.variable(self.name)


@dataclass(frozen=True)
class Add(Node):
    terms: tuple[Node, ...]

    def expand(self) -> SymbolicExpr:
        total = SymbolicExpr()
        for t in self.terms:
            total = total + t.expand()
        return total


@dataclass(frozen=True)
class Mul(Node):
    factors: tuple[Node, ...]

    def expand(self) -> SymbolicExpr:
        product = SymbolicExpr.constant(1.0)
        for f in self.factors:
            product = product * f.expand()
        return product


@dataclass(frozen=True)
class Pow(Node):
    base: Node
    exponent: int

    def expand(self) -> SymbolicExpr:
        return self.base.expand() ** self.exponent


# ---------------- printing ----------------


def format_coefficient(value: float, sig_digits: int = 2) -> str:
    """Positional notation with ``sig_digits`` significant digits, e.g. ``0.087``, ``-8.2``, ``120``."""
    return np.format_float_positional(
        value, precision=sig_digits, unique=False, fractional=False, trim="-"
    )


def _monomial_text(mono: Monomial) -> str:
    return "*".join(var if p == 1 else f"{var}**{p}" for var, p in mono)


def to_string(expr: SymbolicExpr, sig_digits: int = 2) -> str:
    """
    Render ``expr`` in graded lexicographic order, constant last.

    Coefficients print with ``sig_digits`` significant digits. Terms whose
    coefficient rounds to zero at ``sig_digits`` decimal places are left out;
    an expression with no remaining terms prints as ``0``.
    """
    pieces: list[tuple[str, str]] = []
    for mono, coeff in expr.sorted_terms():
        if round(abs(coeff), sig_digits) == 0.0:
            continue
        text = format_coefficient(abs(coeff), sig_digits)
        body = text if not mono else f"{text}*{_monomial_text(mono)}"
        pieces.append(("-" if coeff < 0 else "+", body))
    if not pieces:
        return "0"
    first_sign, first = pieces[0]
    out = [f"-{first}" if first_sign == "-" else first]
    out += [f" {sign} {body}" for sign, body in pieces[1:]]
    return "".join(out)
