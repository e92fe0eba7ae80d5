"""Direct sums of full matrix blocks, their elements and multipliers.

An algebra ``A = (+)_alpha M_{n_alpha}`` is described by an index model (which
block labels exist and how to exhaust them by finite windows) together with a
block-size map.  Elements are finitely supported block maps; multipliers are
total block maps given by a :mod:`~dqgm.rules` rule and evaluated lazily.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

from .linalg import kernel_basis
from .rules import IdentityRule, ProductRule, LinearCombinationRule, Rule, TableRule
from .scalars import EXACT, Field, kron

__all__ = [
    "AlgebraMismatch",
    "Window",
    "IndexModel",
    "FiniteIndex",
    "IntegerIndex",
    "IntegerPairIndex",
    "WordIndex",
    "NaturalIndex",
    "BlockAlgebra",
    "Element",
    "Multiplier",
    "TensorElement",
    "TensorMultiplier",
    "TensorRule",
    "ElementaryTensorRule",
    "TensorIdentityRule",
    "TensorFunctionRule",
    "element_multiply",
    "multiplier_apply",
    "embed_element",
    "local_unit",
    "tensor_multiplier_apply",
    "structure_constants",
    "tensor_structure",
    "check_nondegenerate",
    "LEFT",
    "RIGHT",
]

LEFT = "left"
RIGHT = "right"


class AlgebraMismatch(ValueError):
    """Operands live on different algebras."""


@dataclass(frozen=True)
class Window:
    level: int
    label: str
    indices: tuple

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, index):
        return index in set(self.indices)


class IndexModel:
    """Enumerable block-index set with a nested exhaustion by finite windows."""

    finite = False

    def contains(self, index) -> bool:
        raise NotImplementedError

    def window(self, level: int) -> Window:
        raise NotImplementedError

    def core(self, level: int) -> tuple:
        """Indices whose pairwise products stay inside ``window(level)``."""
        return self.window(level).indices

    def probe(self, level: int, size: int = 6) -> tuple:
        """Indices outside ``window(level)`` used as a disjoint probe set."""
        if self.finite:
            return ()
        inner = set(self.window(level).indices)
        outer = self.window(level + 1).indices
        return tuple(i for i in outer if i not in inner)[:size]


class FiniteIndex(IndexModel):
    finite = True

    def __init__(self, indices: Iterable):
        self.indices = tuple(indices)
        self._set = set(self.indices)

    def contains(self, index):
        return index in self._set

    def window(self, level):
        return Window(level, f"all {len(self.indices)}", self.indices)


class IntegerIndex(IndexModel):
    """Z, exhausted by ``[-W, W]`` with ``W = start * 2**level``."""

    def __init__(self, start: int = 4):
        self.start = start

    def contains(self, index):
        return isinstance(index, (int, np.integer)) and not isinstance(index, bool)

    def window(self, level):
        w = self.start * 2**level
        return Window(level, f"W={w}", tuple(range(-w, w + 1)))

    def core(self, level):
        w = self.start * 2**level // 2
        return tuple(range(-w, w + 1))

    def probe(self, level, size=6):
        w = self.start * 2**level
        out = []
        for k in range(1, size // 2 + 1):
            out += [w + k, -w - k]
        return tuple(out[:size])


class IntegerPairIndex(IndexModel):
    """Z^2, exhausted by squares ``[-W, W]^2`` with ``W = start * 2**level``."""

    def __init__(self, start: int = 2):
        self.start = start

    def contains(self, index):
        return (
            isinstance(index, tuple)
            and len(index) == 2
            and all(isinstance(i, (int, np.integer)) for i in index)
        )

    def window(self, level):
        w = self.start * 2**level
        r = range(-w, w + 1)
        return Window(level, f"W={w}", tuple(itertools.product(r, r)))

    def core(self, level):
        w = self.start * 2**level // 2
        r = range(-w, w + 1)
        return tuple(itertools.product(r, r))


class NaturalIndex(IndexModel):
    """N, exhausted by ``[0, N]`` with ``N = start * 2**level``."""

    def __init__(self, start: int = 3):
        self.start = start

    def contains(self, index):
        return isinstance(index, (int, np.integer)) and not isinstance(index, bool) and index >= 0

    def window(self, level):
        n = self.start * 2**level
        return Window(level, f"N={n}", tuple(range(n + 1)))

    def core(self, level):
        return tuple(range(self.start * 2**level // 2 + 1))


class WordIndex(IndexModel):
    """Reduced words in a free group, letters ``+-1..+-k``; balls of radius ``start + level``."""

    def __init__(self, generators: int, start: int = 2):
        self.generators = generators
        self.start = start

    def contains(self, index):
        if not isinstance(index, tuple):
            return False
        letters = set(range(1, self.generators + 1)) | set(range(-self.generators, 0))
        if any(x not in letters for x in index):
            return False
        return all(index[i] != -index[i + 1] for i in range(len(index) - 1))

    def ball(self, radius: int) -> tuple:
        letters = [g for k in range(1, self.generators + 1) for g in (k, -k)]
        words = [()]
        frontier = [()]
        for _ in range(radius):
            nxt = []
            for w in frontier:
                for x in letters:
                    if w and w[-1] == -x:
                        continue
                    nxt.append(w + (x,))
            words += nxt
            frontier = nxt
        return tuple(words)

    def window(self, level):
        r = self.start + level
        return Window(level, f"r={r}", self.ball(r))

    def core(self, level):
        return self.ball((self.start + level) // 2)


class BlockAlgebra:
    """``(+)_alpha M_{n_alpha}`` over the index model, with scalars from ``field``."""

    def __init__(self, name: str, index_model: IndexModel, block_dim: Callable | int = 1, field: Field = EXACT):
        self.name = name
        self.index_model = index_model
        self._dim = block_dim
        self.field = field

    def __repr__(self):
        return f"BlockAlgebra({self.name!r}, {self.field.name})"

    def block_dim(self, index) -> int:
        if callable(self._dim):
            return int(self._dim(index))
        return int(self._dim)

    def contains(self, index) -> bool:
        return self.index_model.contains(index)

    def window(self, level: int = 0) -> Window:
        return self.index_model.window(level)

    def windows(self) -> Iterator[Window]:
        for level in itertools.count():
            yield self.window(level)
            if self.index_model.finite:
                return

    def matrix_units(self, indices: Iterable) -> Iterator[tuple]:
        """Yield ``(index, i, j, element)`` for every matrix unit over ``indices``."""
        for index in indices:
            n = self.block_dim(index)
            for i in range(n):
                for j in range(n):
                    yield index, i, j, Element.unit(self, index, i, j)

    def basis_size(self, indices: Iterable) -> int:
        return sum(self.block_dim(i) ** 2 for i in indices)

    def check_same(self, other: BlockAlgebra) -> None:
        if other is not self:
            raise AlgebraMismatch(f"{self!r} vs {other!r}")


def _is_zero_block(field: Field, m: np.ndarray) -> bool:
    if field.exact:
        return not any(m.flat)
    return not np.any(m)


class Element:
    """Finitely supported element of a block algebra (zero blocks pruned)."""

    __slots__ = ("algebra", "blocks")

    def __init__(self, algebra: BlockAlgebra, blocks: dict | None = None):
        self.algebra = algebra
        clean = {}
        for index, m in (blocks or {}).items():
            m = algebra.field.array(m)
            n = algebra.block_dim(index)
            if m.shape != (n, n):
                raise ValueError(f"block {index!r} has shape {m.shape}, expected {(n, n)}")
            if not _is_zero_block(algebra.field, m):
                clean[index] = m
        self.blocks = clean

    @classmethod
    def unit(cls, algebra, index, i=0, j=0, value=1) -> Element:
        n = algebra.block_dim(index)
        m = algebra.field.zeros((n, n))
        m[i, j] = algebra.field.scalar(value)
        return cls(algebra, {index: m})

    @classmethod
    def zero(cls, algebra) -> Element:
        return cls(algebra)

    @property
    def support(self) -> tuple:
        return tuple(self.blocks)

    def block(self, index) -> np.ndarray:
        if index in self.blocks:
            return self.blocks[index]
        n = self.algebra.block_dim(index)
        return self.algebra.field.zeros((n, n))

    def is_zero(self) -> bool:
        f = self.algebra.field
        return all(f.is_zero_matrix(m) for m in self.blocks.values())

    def __repr__(self):
        return f"Element({self.algebra.name}, support={sorted(map(repr, self.blocks))})"

    def _combine(self, other, sign):
        self.algebra.check_same(other.algebra)
        out = dict(self.blocks)
        for index, m in other.blocks.items():
            out[index] = out[index] + sign * m if index in out else sign * m
        return Element(self.algebra, out)

    def __add__(self, other):
        return self._combine(other, 1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __neg__(self):
        return Element(self.algebra, {k: -v for k, v in self.blocks.items()})

    def scale(self, c) -> Element:
        c = self.algebra.field.scalar(c)
        return Element(self.algebra, {k: v * c for k, v in self.blocks.items()})

    def __mul__(self, c):
        if isinstance(c, (Element, Multiplier)):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Element):
            return element_multiply(self, other)
        if isinstance(other, Multiplier):
            return multiplier_apply(other, self, RIGHT)
        return NotImplemented

    def equals(self, other: Element, rtol: float | None = None) -> bool:
        self.algebra.check_same(other.algebra)
        f = self.algebra.field
        for index in set(self.blocks) | set(other.blocks):
            if not f.matrices_equal(self.block(index), other.block(index), rtol):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, Element) or other.algebra is not self.algebra:
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def vector(self, indices: Iterable) -> np.ndarray:
        """Concatenated row-major blocks over ``indices``."""
        parts = [self.block(i).reshape(-1) for i in indices]
        if not parts:
            return self.algebra.field.zeros(0)
        return np.concatenate(parts)


def element_multiply(a: Element, b: Element) -> Element:
    a.algebra.check_same(b.algebra)
    common = [i for i in a.blocks if i in b.blocks]
    return Element(a.algebra, {i: a.blocks[i] @ b.blocks[i] for i in common})


def local_unit(a: Element) -> Element:
    """Sum of block identities over ``supp(a)``: a unit for the ideal generated by ``a``."""
    f = a.algebra.field
    return Element(a.algebra, {i: f.eye(m.shape[0]) for i, m in a.blocks.items()})


class Multiplier:
    """Double centralizer given by a total block rule; blocks are cached on demand."""

    def __init__(self, algebra: BlockAlgebra, rule: Rule):
        self.algebra = algebra
        self.rule = rule
        self._cache: dict = {}

    def __repr__(self):
        return f"Multiplier({self.algebra.name}, {self.rule.to_json()!r})"

    @classmethod
    def identity(cls, algebra) -> Multiplier:
        return cls(algebra, IdentityRule())

    def block(self, index) -> np.ndarray:
        try:
            return self._cache[index]
        except KeyError:
            pass
        m = self.algebra.field.array(self.rule.block(self.algebra, index))
        n = self.algebra.block_dim(index)
        if m.shape != (n, n):
            raise ValueError(f"rule produced shape {m.shape} at {index!r}, expected {(n, n)}")
        self._cache[index] = m
        return m

    def restrict(self, indices: Iterable) -> Element:
        return Element(self.algebra, {i: self.block(i) for i in indices})

    def vector(self, indices: Iterable) -> np.ndarray:
        parts = [self.block(i).reshape(-1) for i in indices]
        if not parts:
            return self.algebra.field.zeros(0)
        return np.concatenate(parts)

    def apply(self, a: Element, side: str = LEFT) -> Element:
        return multiplier_apply(self, a, side)

    def __add__(self, other: Multiplier) -> Multiplier:
        self.algebra.check_same(other.algebra)
        return Multiplier(self.algebra, LinearCombinationRule(((1, self.rule), (1, other.rule))))

    def __sub__(self, other: Multiplier) -> Multiplier:
        self.algebra.check_same(other.algebra)
        return Multiplier(self.algebra, LinearCombinationRule(((1, self.rule), (-1, other.rule))))

    def scale(self, c) -> Multiplier:
        return Multiplier(self.algebra, LinearCombinationRule(((c, self.rule),)))

    def __mul__(self, c):
        if isinstance(c, (Element, Multiplier)):
            return NotImplemented
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, Multiplier):
            self.algebra.check_same(other.algebra)
            return Multiplier(self.algebra, ProductRule((self.rule, other.rule)))
        if isinstance(other, Element):
            return multiplier_apply(self, other, LEFT)
        return NotImplemented

    def equals_on(self, other: Multiplier, indices: Iterable, rtol: float | None = None) -> bool:
        f = self.algebra.field
        return all(f.matrices_equal(self.block(i), other.block(i), rtol) for i in indices)


def multiplier_apply(m: Multiplier, a: Element, side: str = LEFT) -> Element:
    """``m a`` (``side="left"``) or ``a m`` (``side="right"``), restricted to ``supp(a)``."""
    m.algebra.check_same(a.algebra)
    if side == LEFT:
        return Element(a.algebra, {i: m.block(i) @ x for i, x in a.blocks.items()})
    if side == RIGHT:
        return Element(a.algebra, {i: x @ m.block(i) for i, x in a.blocks.items()})
    raise ValueError(f"side must be 'left' or 'right', got {side!r}")


def embed_element(a: Element) -> Multiplier:
    return Multiplier(a.algebra, TableRule(dict(a.blocks)))


# -- tensor products ----------------------------------------------------------


class TensorElement:
    """Finite element of ``B (x) A``; block ``(beta, alpha)`` lives in ``M_{n_beta} (x) M_{n_alpha}``."""

    __slots__ = ("left", "right", "blocks")

    def __init__(self, left: BlockAlgebra, right: BlockAlgebra, blocks: dict | None = None):
        self.left = left
        self.right = right
        if left.field != right.field:
            raise AlgebraMismatch("tensor factors use different scalar modes")
        f = left.field
        clean = {}
        for key, m in (blocks or {}).items():
            m = f.array(m)
            n = left.block_dim(key[0]) * right.block_dim(key[1])
            if m.shape != (n, n):
                raise ValueError(f"tensor block {key!r} has shape {m.shape}, expected {(n, n)}")
            if not _is_zero_block(f, m):
                clean[key] = m
        self.blocks = clean

    @property
    def field(self):
        return self.left.field

    @classmethod
    def elementary(cls, b: Element, a: Element) -> TensorElement:
        return cls(
            b.algebra,
            a.algebra,
            {(i, j): kron(x, y) for i, x in b.blocks.items() for j, y in a.blocks.items()},
        )

    def block(self, key) -> np.ndarray:
        if key in self.blocks:
            return self.blocks[key]
        n = self.left.block_dim(key[0]) * self.right.block_dim(key[1])
        return self.field.zeros((n, n))

    def __add__(self, other: TensorElement) -> TensorElement:
        self._check(other)
        out = dict(self.blocks)
        for k, m in other.blocks.items():
            out[k] = out[k] + m if k in out else m
        return TensorElement(self.left, self.right, out)

    def __sub__(self, other: TensorElement) -> TensorElement:
        return self + other.scale(-1)

    def scale(self, c) -> TensorElement:
        c = self.field.scalar(c)
        return TensorElement(self.left, self.right, {k: v * c for k, v in self.blocks.items()})

    def _check(self, other):
        self.left.check_same(other.left)
        self.right.check_same(other.right)

    def equals(self, other: TensorElement, rtol: float | None = None) -> bool:
        self._check(other)
        return all(
            self.field.matrices_equal(self.block(k), other.block(k), rtol)
            for k in set(self.blocks) | set(other.blocks)
        )

    def __eq__(self, other):
        if not isinstance(other, TensorElement):
            return NotImplemented
        return self.equals(other)

    __hash__ = None


class TensorRule:
    def block(self, left: BlockAlgebra, right: BlockAlgebra, beta, alpha) -> np.ndarray:
        raise NotImplementedError

    def to_json(self):
        raise NotImplementedError


class TensorIdentityRule(TensorRule):
    def block(self, left, right, beta, alpha):
        return left.field.eye(left.block_dim(beta) * right.block_dim(alpha))

    def to_json(self):
        return "identity"


class ElementaryTensorRule(TensorRule):
    """``sum_k c_k x_k (x) y_k`` for multipliers ``x_k`` of B and ``y_k`` of A."""

    def __init__(self, terms):
        self.terms = tuple(terms)  # (coeff, Multiplier on B, Multiplier on A)

    def block(self, left, right, beta, alpha):
        f = left.field
        n = left.block_dim(beta) * right.block_dim(alpha)
        out = f.zeros((n, n))
        for c, x, y in self.terms:
            out = out + kron(x.block(beta), y.block(alpha)) * f.scalar(c)
        return out

    def to_json(self):
        from .scalars import scalar_to_json

        return {
            "elementary_sum": [
                {"coeff": scalar_to_json(c), "left": x.rule.to_json(), "right": y.rule.to_json()}
                for c, x, y in self.terms
            ]
        }


class TensorFunctionRule(TensorRule):
    def __init__(self, fn: Callable, label: str = "function"):
        self.fn = fn
        self.label = label

    def block(self, left, right, beta, alpha):
        return self.fn(left, right, beta, alpha)

    def to_json(self):
        return {"opaque": self.label}


class TensorMultiplier:
    """Multiplier ``Y`` of ``B (x) A`` given by a lazy rule over block pairs."""

    def __init__(self, left: BlockAlgebra, right: BlockAlgebra, rule: TensorRule):
        if left.field != right.field:
            raise AlgebraMismatch("tensor factors use different scalar modes")
        self.left = left
        self.right = right
        self.rule = rule
        self._cache: dict = {}

    @property
    def field(self):
        return self.left.field

    @classmethod
    def identity(cls, left, right) -> TensorMultiplier:
        return cls(left, right, TensorIdentityRule())

    @classmethod
    def elementary(cls, terms, left=None, right=None) -> TensorMultiplier:
        terms = [t if len(t) == 3 else (1, t[0], t[1]) for t in terms]
        left = left or terms[0][1].algebra
        right = right or terms[0][2].algebra
        for _, x, y in terms:
            left.check_same(x.algebra)
            right.check_same(y.algebra)
        return cls(left, right, ElementaryTensorRule(terms))

    def block(self, beta, alpha) -> np.ndarray:
        key = (beta, alpha)
        try:
            return self._cache[key]
        except KeyError:
            pass
        m = self.field.array(self.rule.block(self.left, self.right, beta, alpha))
        n = self.left.block_dim(beta) * self.right.block_dim(alpha)
        if m.shape != (n, n):
            raise ValueError(f"tensor rule produced shape {m.shape} at {key!r}, expected {(n, n)}")
        self._cache[key] = m
        return m

    def apply(self, t: TensorElement, side: str = LEFT) -> TensorElement:
        return tensor_multiplier_apply(self, t, side)

    def equals_on(self, other: TensorMultiplier, pairs: Iterable, rtol: float | None = None) -> bool:
        return all(self.field.matrices_equal(self.block(*p), other.block(*p), rtol) for p in pairs)


def tensor_multiplier_apply(Y: TensorMultiplier, t: TensorElement, side: str = LEFT) -> TensorElement:
    Y.left.check_same(t.left)
    Y.right.check_same(t.right)
    if side == LEFT:
        blocks = {k: Y.block(*k) @ m for k, m in t.blocks.items()}
    elif side == RIGHT:
        blocks = {k: m @ Y.block(*k) for k, m in t.blocks.items()}
    else:
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    return TensorElement(t.left, t.right, blocks)


# -- nondegeneracy -------------------------------------------------------------


def structure_constants(algebra: BlockAlgebra, indices: Iterable) -> np.ndarray:
    """``c[i, j, k]`` with ``e_i e_j = sum_k c[i, j, k] e_k`` over the matrix units of a window."""
    listing = list(algebra.matrix_units(list(indices)))
    units = [u for *_, u in listing]
    coords = {(index, i, j): pos for pos, (index, i, j, _) in enumerate(listing)}
    d = len(units)
    f = algebra.field
    c = f.zeros((d, d, d))
    for p, u in enumerate(units):
        for q, v in enumerate(units):
            w = element_multiply(u, v)
            for index, m in w.blocks.items():
                for (i, j), value in np.ndenumerate(m):
                    if value:
                        c[p, q, coords[(index, i, j)]] = value
    return c


def tensor_structure(c1: np.ndarray, c2: np.ndarray) -> np.ndarray:
    """Structure constants of the tensor product algebra, basis ``e_i (x) f_j`` row-major."""
    d1, d2 = c1.shape[0], c2.shape[0]
    c = np.einsum("ikm,jln->ijklmn", c1, c2)
    return c.reshape(d1 * d2, d1 * d2, d1 * d2)


def check_nondegenerate(algebra_or_constants, indices: Iterable | None = None) -> bool:
    """``aA = 0 => a = 0`` and ``Aa = 0 => a = 0`` on a finite window.

    Accepts either a :class:`BlockAlgebra` plus window indices, or a structure
    constant array ``c[i, j, k]``.
    """
    if isinstance(algebra_or_constants, BlockAlgebra):
        if indices is None:
            indices = algebra_or_constants.window(0).indices
        c = structure_constants(algebra_or_constants, indices)
    else:
        c = np.asarray(algebra_or_constants)
    d = c.shape[0]
    if d == 0:
        return True
    # a = sum_i a_i e_i; (a e_j)_k = sum_i a_i c[i, j, k]
    left_op = c.transpose(1, 2, 0).reshape(d * d, d)
    right_op = c.transpose(0, 2, 1).reshape(d * d, d)
    return not kernel_basis(left_op) and not kernel_basis(right_op)
