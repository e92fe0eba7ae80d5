"""Block rules: the closed language describing multipliers as total block maps.

A rule maps a block index to a square matrix of that block's size.  Rules are
immutable, serializable (except :class:`FunctionRule`) and know nothing about
windows; truncation happens in the callers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable

import numpy as np

from .scalars import scalar_to_json

__all__ = [
    "Rule",
    "IdentityRule",
    "ZeroRule",
    "TableRule",
    "PolynomialRule",
    "CharacterRule",
    "PointMassRule",
    "LinearCombinationRule",
    "ProductRule",
    "FunctionRule",
    "RuleError",
]


class RuleError(ValueError):
    """A rule cannot be evaluated on the given algebra or index."""


class Rule:
    def block(self, algebra, index) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> Any:
        raise NotImplementedError

    def validate(self, algebra) -> None:
        """Raise :class:`RuleError` if the rule cannot live on ``algebra``."""


def _require_integer_index(algebra, index):
    if not isinstance(index, (int, np.integer)) or isinstance(index, bool):
        raise RuleError(f"{type(algebra.index_model).__name__} index {index!r} is not an integer")
    if algebra.block_dim(index) != 1:
        raise RuleError("integer formulas need 1x1 blocks")


@dataclass(frozen=True)
class IdentityRule(Rule):
    def block(self, algebra, index):
        return algebra.field.eye(algebra.block_dim(index))

    def to_json(self):
        return "identity"


@dataclass(frozen=True)
class ZeroRule(Rule):
    def block(self, algebra, index):
        n = algebra.block_dim(index)
        return algebra.field.zeros((n, n))

    def to_json(self):
        return "zero"


@dataclass(frozen=True, eq=False)
class TableRule(Rule):
    """Explicit blocks on finitely many indices, ``default`` elsewhere (zero if None)."""

    entries: dict
    default: Rule | None = None

    def block(self, algebra, index):
        if index in self.entries:
            return self.entries[index]
        if self.default is None:
            n = algebra.block_dim(index)
            return algebra.field.zeros((n, n))
        return self.default.block(algebra, index)

    def validate(self, algebra):
        for index, m in self.entries.items():
            n = algebra.block_dim(index)
            if m.shape != (n, n):
                raise RuleError(f"table block at {index!r} has shape {m.shape}, expected {(n, n)}")
        if self.default is not None:
            self.default.validate(algebra)

    def to_json(self):
        return {
            "table": [
                {"index": _index_json(k), "block": [[scalar_to_json(x) for x in row] for row in v]}
                for k, v in sorted(self.entries.items(), key=lambda kv: _sort_key(kv[0]))
            ],
            "default": None if self.default is None else self.default.to_json(),
        }


@dataclass(frozen=True)
class PolynomialRule(Rule):
    """``n -> sum(coeffs[k] * n**k)`` on integer-indexed 1x1 blocks."""

    coeffs: tuple

    def block(self, algebra, index):
        _require_integer_index(algebra, index)
        f = algebra.field
        n = f.scalar(int(index))
        value = f.zero
        for c in reversed(self.coeffs):
            value = value * n + f.scalar(c)
        return f.array([[value]])

    def validate(self, algebra):
        _require_integer_index(algebra, 0)

    def to_json(self):
        return {"polynomial": [scalar_to_json(c) for c in self.coeffs]}


@dataclass(frozen=True)
class CharacterRule(Rule):
    """``n -> zeta**n`` with ``zeta = exp(2*pi*i*turns)``.

    Exact mode admits only orders dividing 4 (``turns`` in quarter steps).
    """

    turns: Fraction | float

    def block(self, algebra, index):
        _require_integer_index(algebra, index)
        f = algebra.field
        if f.exact:
            zeta = f.root_of_unity(self.turns)
            return f.array([[zeta ** int(index)]])
        return f.array([[f.root_of_unity(float(self.turns) * int(index))]])

    def validate(self, algebra):
        _require_integer_index(algebra, 0)
        if algebra.field.exact:
            try:
                algebra.field.root_of_unity(self.turns)
            except ValueError as exc:
                raise RuleError(str(exc)) from exc

    def to_json(self):
        t = self.turns
        return {"character": {"turns": str(t) if isinstance(t, Fraction) else t}}


@dataclass(frozen=True)
class PointMassRule(Rule):
    """``value * identity`` at ``point``, zero elsewhere."""

    point: Any
    value: Any = 1

    def block(self, algebra, index):
        n = algebra.block_dim(index)
        f = algebra.field
        if index == self.point:
            return f.eye(n) * f.scalar(self.value)
        return f.zeros((n, n))

    def to_json(self):
        return {"point_mass": {"index": _index_json(self.point), "value": scalar_to_json(self.value)}}


@dataclass(frozen=True)
class LinearCombinationRule(Rule):
    terms: tuple  # of (coefficient, Rule)

    def block(self, algebra, index):
        f = algebra.field
        n = algebra.block_dim(index)
        out = f.zeros((n, n))
        for c, rule in self.terms:
            out = out + rule.block(algebra, index) * f.scalar(c)
        return out

    def validate(self, algebra):
        for _, rule in self.terms:
            rule.validate(algebra)

    def to_json(self):
        return {"sum": [{"coeff": scalar_to_json(c), "rule": r.to_json()} for c, r in self.terms]}


@dataclass(frozen=True)
class ProductRule(Rule):
    """Block-wise product, leftmost factor first."""

    factors: tuple

    def block(self, algebra, index):
        out = algebra.field.eye(algebra.block_dim(index))
        for rule in self.factors:
            out = out @ rule.block(algebra, index)
        return out

    def validate(self, algebra):
        for rule in self.factors:
            rule.validate(algebra)

    def to_json(self):
        return {"product": [r.to_json() for r in self.factors]}


@dataclass(frozen=True, eq=False)
class FunctionRule(Rule):
    """Arbitrary Python callable ``(algebra, index) -> matrix``; not serializable."""

    fn: Callable
    label: str = field(default="function")

    def block(self, algebra, index):
        return self.fn(algebra, index)

    def to_json(self):
        return {"opaque": self.label}


def _index_json(index):
    if isinstance(index, tuple):
        return [_index_json(i) for i in index]
    if isinstance(index, np.integer):
        return int(index)
    return index


def _sort_key(index):
    if isinstance(index, tuple):
        return (len(index), tuple(_sort_key(i) for i in index))
    return (0, index)
