"""Reduced functionals ``a.phi`` / ``phi.a`` and the convolution algebra they form.

The left invariant functional is ``phi(a) = sum_alpha d_alpha tr(F_alpha a_alpha)``.
Every functional ``xi`` we handle is finitely supported and is equivalently
described by block densities ``G_alpha`` with ``xi(x) = sum tr(x_alpha G_alpha)``;
for ``a.phi`` the density is ``a_alpha W_alpha`` and for ``phi.a`` it is
``W_alpha a_alpha``, where ``W_alpha = d_alpha F_alpha``.
"""

from __future__ import annotations

from typing import Callable, Iterable

import numpy as np

from .algebra import (
    LEFT,
    RIGHT,
    BlockAlgebra,
    Element,
    Multiplier,
    element_multiply,
    multiplier_apply,
)
from .linalg import SingularSystem, inverse, kernel_basis, solve
from .scalars import dagger, kron

__all__ = [
    "HaarData",
    "ReducedFunctional",
    "WindowFunctional",
    "WindowTooSmall",
    "UnitNotFound",
    "evaluate",
    "evaluate_on_multiplier",
    "bimodule_act",
    "convolve",
    "convolution_density",
    "dual_unit",
    "modular_apply",
    "modular_inverse_apply",
    "functional_side_convert",
    "gram_matrix",
    "is_faithful",
]


class WindowTooSmall(ValueError):
    """A window functional is not specified on a block the computation needs."""


class UnitNotFound(ValueError):
    """The unit equations of the dual algebra have no unique solution on the window."""


class HaarData:
    """Left invariant functional, its modular automorphism and an optional right functional.

    ``weights(index) -> (d, F)``; ``modular(index) -> Q`` with
    ``sigma(a)_alpha = Q a_alpha Q^{-1}``.  When ``modular`` is omitted ``Q = F``,
    which is the automorphism satisfying ``phi(ab) = phi(b sigma(a))``.
    """

    def __init__(
        self,
        algebra: BlockAlgebra,
        weights: Callable | None = None,
        modular: Callable | None = None,
        right: HaarData | None = None,
        scale=1,
    ):
        self.algebra = algebra
        self._weights = weights
        self._modular = modular
        self.right = right
        self.scale = scale
        self._w_cache: dict = {}
        self._q_cache: dict = {}
        self._gram_cache: dict = {}

    def scaled(self, c) -> HaarData:
        return HaarData(self.algebra, self._weights, self._modular, self.right, self.scale * c)

    def weight_pair(self, index):
        f = self.algebra.field
        n = self.algebra.block_dim(index)
        if self._weights is None:
            return f.one, f.eye(n)
        d, F = self._weights(index)
        return f.scalar(d), f.array(F)

    def weight(self, index) -> np.ndarray:
        """``W = scale * d * F`` for the block."""
        try:
            return self._w_cache[index]
        except KeyError:
            pass
        d, F = self.weight_pair(index)
        w = F * (d * self.algebra.field.scalar(self.scale))
        self._w_cache[index] = w
        return w

    def modular(self, index) -> tuple[np.ndarray, np.ndarray]:
        """``(Q, Q^{-1})`` implementing sigma on the block."""
        try:
            return self._q_cache[index]
        except KeyError:
            pass
        if self._modular is None:
            q = self.weight_pair(index)[1]
        else:
            q = self.algebra.field.array(self._modular(index))
        pair = (q, inverse(q))
        self._q_cache[index] = pair
        return pair

    def phi(self, a: Element):
        self.algebra.check_same(a.algebra)
        f = self.algebra.field
        total = f.zero
        for index, m in a.blocks.items():
            total = total + np.trace(self.weight(index) @ m)
        return total

    def is_tracial_on(self, indices: Iterable) -> bool:
        f = self.algebra.field
        for index in indices:
            q, _ = self.modular(index)
            n = q.shape[0]
            # sigma is trivial iff Q is a scalar matrix
            if not f.matrices_equal(q, f.eye(n) * q[0, 0]):
                return False
        return True

    def gram(self, index, side: str = LEFT) -> np.ndarray:
        """``M[(i,j), (k,l)] = phi(e_ij e_kl)`` (left) or ``phi(e_kl e_ij)`` (right)."""
        key = (index, side)
        if key in self._gram_cache:
            return self._gram_cache[key]
        w = self.weight(index)
        n = w.shape[0]
        m = self.algebra.field.zeros((n * n, n * n))
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    for l in range(n):
                        if side == LEFT and j == k:
                            # phi(e_ij e_jl) = phi(e_il) = W[l, i]
                            m[i * n + j, k * n + l] = w[l, i]
                        elif side == RIGHT and l == i:
                            # phi(e_kl e_lj) = phi(e_kj) = W[j, k]
                            m[i * n + j, k * n + l] = w[j, k]
        self._gram_cache[key] = m
        return m

    def riesz(self, index, values: np.ndarray, side: str = LEFT) -> np.ndarray:
        """Block ``r`` with ``phi(e_ij r) = values[i, j]`` (left) or ``phi(r e_ij) = values[i, j]``."""
        n = self.algebra.block_dim(index)
        vec = self.algebra.field.array(values).reshape(-1)
        r = solve(self.gram(index, side), vec)
        return r.reshape(n, n)


def gram_matrix(haar: HaarData, indices: Iterable) -> np.ndarray:
    """Matrix of ``(a, b) -> phi(ab)`` over all matrix units of a window."""
    units = [u for *_, u in haar.algebra.matrix_units(list(indices))]
    f = haar.algebra.field
    g = f.zeros((len(units), len(units)))
    for p, u in enumerate(units):
        for q, v in enumerate(units):
            g[p, q] = haar.phi(element_multiply(u, v))
    return g


def is_faithful(haar: HaarData, indices: Iterable) -> bool:
    g = gram_matrix(haar, indices)
    return not kernel_basis(g)


class ReducedFunctional:
    """``a.phi`` (side ``"left"``: ``x -> phi(x a)``) or ``phi.a`` (``x -> phi(a x)``)."""

    def __init__(self, haar: HaarData, representative: Element, side: str = LEFT):
        haar.algebra.check_same(representative.algebra)
        if side not in (LEFT, RIGHT):
            raise ValueError(f"side must be 'left' or 'right', got {side!r}")
        self.haar = haar
        self.representative = representative
        self.side = side

    @property
    def algebra(self) -> BlockAlgebra:
        return self.haar.algebra

    @property
    def support(self) -> tuple:
        return self.representative.support

    def __repr__(self):
        what = "a.phi" if self.side == LEFT else "phi.a"
        return f"ReducedFunctional({what}, support={list(self.support)!r})"

    def density(self, index) -> np.ndarray:
        a = self.representative.block(index)
        w = self.haar.weight(index)
        return a @ w if self.side == LEFT else w @ a

    def densities(self) -> dict:
        return {i: self.density(i) for i in self.support}

    def __call__(self, x: Element):
        return evaluate(self, x)

    def as_left(self) -> ReducedFunctional:
        return self if self.side == LEFT else functional_side_convert(self)

    def __add__(self, other: ReducedFunctional) -> ReducedFunctional:
        a, b = self.as_left(), other.as_left()
        return ReducedFunctional(self.haar, a.representative + b.representative, LEFT)

    def scale(self, c) -> ReducedFunctional:
        return ReducedFunctional(self.haar, self.representative.scale(c), self.side)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__

    def equals(self, other: ReducedFunctional, rtol: float | None = None) -> bool:
        """Equality of functionals, decided on left representatives (phi is faithful)."""
        return self.as_left().representative.equals(other.as_left().representative, rtol)


class WindowFunctional:
    """Arbitrary functional on a finite set of blocks: ``f(x) = sum tr(x_alpha G_alpha)``."""

    def __init__(self, algebra: BlockAlgebra, densities: dict):
        self.algebra = algebra
        self.densities = {k: algebra.field.array(v) for k, v in densities.items()}

    @classmethod
    def from_unit_values(cls, algebra, values: dict) -> WindowFunctional:
        """``values[index][i, j] = f(e_ij)``; the density is its transpose."""
        return cls(algebra, {k: algebra.field.array(v).T for k, v in values.items()})

    def __call__(self, x: Element):
        self.algebra.check_same(x.algebra)
        f = self.algebra.field
        total = f.zero
        for index, m in x.blocks.items():
            if index not in self.densities:
                raise WindowTooSmall(f"functional not specified on block {index!r}")
            total = total + np.trace(m @ self.densities[index])
        return total


def evaluate(xi: ReducedFunctional, x: Element):
    """``(a.phi)(x) = phi(x a)``; ``(phi.a)(x) = phi(a x)``."""
    xi.algebra.check_same(x.algebra)
    a = xi.representative
    if xi.side == LEFT:
        return xi.haar.phi(element_multiply(x, a))
    return xi.haar.phi(element_multiply(a, x))


def evaluate_on_multiplier(xi: ReducedFunctional, m: Multiplier):
    """Natural extension to ``M(A)``: ``phi(m a)`` resp. ``phi(a m)``."""
    xi.algebra.check_same(m.algebra)
    a = xi.representative
    if xi.side == LEFT:
        return xi.haar.phi(multiplier_apply(m, a, LEFT))
    return xi.haar.phi(multiplier_apply(m, a, RIGHT))


def bimodule_act(a: Element, f, b: Element, haar: HaarData) -> ReducedFunctional:
    """The reduced functional ``a f b : x -> f(b x a)`` as an element ``r.phi``.

    ``f`` is any callable on elements (a :class:`WindowFunctional`, a
    :class:`ReducedFunctional`, ...).  The representative is found block by
    block from ``phi(x r) = f(b x a)`` over matrix units.
    """
    algebra = haar.algebra
    algebra.check_same(a.algebra)
    algebra.check_same(b.algebra)
    blocks = {}
    for index in a.support:
        if index not in b.blocks:
            continue
        n = algebra.block_dim(index)
        values = algebra.field.zeros((n, n))
        for i in range(n):
            for j in range(n):
                e = Element.unit(algebra, index, i, j)
                values[i, j] = f(element_multiply(element_multiply(b, e), a))
        blocks[index] = haar.riesz(index, values, LEFT)
    return ReducedFunctional(haar, Element(algebra, blocks), LEFT)


def modular_apply(haar: HaarData, a: Element) -> Element:
    blocks = {}
    for index, m in a.blocks.items():
        q, qinv = haar.modular(index)
        blocks[index] = q @ m @ qinv
    return Element(a.algebra, blocks)


def modular_inverse_apply(haar: HaarData, a: Element) -> Element:
    blocks = {}
    for index, m in a.blocks.items():
        q, qinv = haar.modular(index)
        blocks[index] = qinv @ m @ q
    return Element(a.algebra, blocks)


def functional_side_convert(xi: ReducedFunctional) -> ReducedFunctional:
    """Switch between ``a.phi`` and ``phi.b`` using ``phi.b = sigma(b).phi``."""
    if xi.side == RIGHT:
        return ReducedFunctional(xi.haar, modular_apply(xi.haar, xi.representative), LEFT)
    return ReducedFunctional(xi.haar, modular_inverse_apply(xi.haar, xi.representative), RIGHT)


def convolution_density(dqg, g1: dict, g2: dict) -> dict:
    """Densities of ``xi1 * xi2`` from densities of the factors.

    ``(xi1 (x) xi2)(delta(x))`` collects ``V^dagger (G1_beta (x) G2_gamma) V`` on
    every fusion channel ``(alpha, V)`` of ``(beta, gamma)``.
    """
    f = dqg.algebra.field
    out: dict = {}
    for beta, x in g1.items():
        for gamma, y in g2.items():
            g = kron(x, y)
            for alpha, v in dqg.fusion(beta, gamma):
                h = dagger(v) @ g @ v
                out[alpha] = out[alpha] + h if alpha in out else h
    return {k: v for k, v in out.items() if not f.is_zero_matrix(v)} if f.exact else out


def _from_density(haar: HaarData, dens: dict) -> ReducedFunctional:
    blocks = {index: haar.riesz(index, g.T, LEFT) for index, g in dens.items()}
    return ReducedFunctional(haar, Element(haar.algebra, blocks), LEFT)


def convolve(xi1: ReducedFunctional, xi2: ReducedFunctional, dqg) -> ReducedFunctional:
    """``(xi1 * xi2)(x) = (xi1 (x) xi2)(delta(x))``, returned as ``r.phi``."""
    dqg.algebra.check_same(xi1.algebra)
    dqg.algebra.check_same(xi2.algebra)
    dens = convolution_density(dqg, xi1.densities(), xi2.densities())
    return _from_density(dqg.haar, dens)


def dual_unit(dqg, level: int = 0) -> ReducedFunctional:
    """Unit of the dual algebra, solved from ``u * xi = xi = xi * u`` on a window.

    Unknowns are the densities of ``u`` on ``window(level)``; the probes are
    the matrix-unit functionals ``e_kl.phi`` on the same window.
    """
    algebra = dqg.algebra
    haar = dqg.haar
    f = algebra.field
    win = algebra.window(level).indices
    unknowns = [(beta, p, q) for beta in win for p in range(algebra.block_dim(beta)) for q in range(algebra.block_dim(beta))]
    probes = [
        {gamma: ReducedFunctional(haar, u, LEFT).density(gamma)}
        for gamma, *_, u in algebra.matrix_units(win)
    ]
    row_keys: dict = {}
    columns = []
    for beta, p, q in unknowns:
        n = algebra.block_dim(beta)
        e = f.zeros((n, n))
        e[p, q] = f.one
        col: dict = {}
        for k, probe in enumerate(probes):
            for tag, dens in (("L", convolution_density(dqg, {beta: e}, probe)), ("R", convolution_density(dqg, probe, {beta: e}))):
                for alpha, h in dens.items():
                    for (i, j), value in np.ndenumerate(h):
                        key = (k, tag, alpha, i, j)
                        row_keys.setdefault(key, len(row_keys))
                        col[key] = value
        columns.append(col)
    for k, probe in enumerate(probes):
        for tag in ("L", "R"):
            for alpha, h in probe.items():
                for (i, j), _ in np.ndenumerate(h):
                    row_keys.setdefault((k, tag, alpha, i, j), len(row_keys))
    mat = f.zeros((len(row_keys), len(unknowns)))
    for c, col in enumerate(columns):
        for key, value in col.items():
            mat[row_keys[key], c] = value
    rhs = f.zeros(len(row_keys))
    for k, probe in enumerate(probes):
        for tag in ("L", "R"):
            for alpha, h in probe.items():
                for (i, j), value in np.ndenumerate(h):
                    rhs[row_keys[(k, tag, alpha, i, j)]] = value
    try:
        sol = solve(mat, rhs)
    except SingularSystem as exc:
        raise UnitNotFound(f"unit equations on window {algebra.window(level).label}: {exc}") from exc
    dens = {}
    pos = 0
    for beta in win:
        n = algebra.block_dim(beta)
        dens[beta] = sol[pos : pos + n * n].reshape(n, n)
        pos += n * n
    unit = _from_density(haar, dens)
    return unit
