"""Discrete quantum group models: comultiplication as fusion data.

A model lists, for every block pair ``(beta, gamma)``, the channels
``(alpha, V)`` with ``V`` an isometry ``C^{n_alpha} -> C^{n_beta} (x) C^{n_gamma}``;
then ``delta(a)_{beta,gamma} = sum V a_alpha V^dagger``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .algebra import (
    BlockAlgebra,
    Element,
    FiniteIndex,
    IndexModel,
    IntegerIndex,
    IntegerPairIndex,
    Multiplier,
    NaturalIndex,
    TensorMultiplier,
    TensorRule,
    WordIndex,
    embed_element,
)
from .clebsch_gordan import cg_isometry, fusion_channels
from .functionals import HaarData
from .scalars import EXACT, FLOAT, Field, dagger

__all__ = [
    "GroupModel",
    "DQGDescriptor",
    "CoproductRule",
    "integers",
    "integer_pairs",
    "finite_cayley",
    "symmetric_group",
    "trivial_group",
    "free_group",
    "dual_of_group",
    "dual_of_su2",
    "single_block_algebra",
    "coproduct",
    "coproduct_of_multiplier",
]


@dataclass(frozen=True, eq=False)
class GroupModel:
    name: str
    index_model: IndexModel
    mul: Callable
    inv: Callable
    identity: object
    labels: tuple | None = None


def integers() -> GroupModel:
    return GroupModel("Z", IntegerIndex(), lambda g, h: g + h, lambda g: -g, 0)


def integer_pairs() -> GroupModel:
    return GroupModel(
        "Z^2",
        IntegerPairIndex(),
        lambda g, h: (g[0] + h[0], g[1] + h[1]),
        lambda g: (-g[0], -g[1]),
        (0, 0),
    )


def finite_cayley(table, identity: int = 0, name: str = "finite", labels=None) -> GroupModel:
    """Group on ``0..n-1`` with ``g * h = table[g][h]``; the group laws are checked."""
    table = [list(map(int, row)) for row in table]
    n = len(table)
    if any(len(row) != n for row in table):
        raise ValueError("Cayley table must be square")
    elems = range(n)
    if any(table[identity][g] != g or table[g][identity] != g for g in elems):
        raise ValueError(f"{identity} is not a two-sided identity")
    inverses = {}
    for g in elems:
        hits = [h for h in elems if table[g][h] == identity]
        if len(hits) != 1 or table[hits[0]][g] != identity:
            raise ValueError(f"element {g} has no unique two-sided inverse")
        inverses[g] = hits[0]
    for g, h, k in itertools.product(elems, repeat=3):
        if table[table[g][h]][k] != table[g][table[h][k]]:
            raise ValueError(f"table is not associative at {(g, h, k)}")
    frozen = tuple(tuple(row) for row in table)
    return GroupModel(
        name,
        FiniteIndex(elems),
        lambda g, h: frozen[g][h],
        lambda g: inverses[g],
        identity,
        None if labels is None else tuple(labels),
    )


def symmetric_group(n: int) -> GroupModel:
    """``S_n`` on permutations in lexicographic order; ``(p*q)(i) = p(q(i))``."""
    perms = list(itertools.permutations(range(n)))
    pos = {p: k for k, p in enumerate(perms)}
    table = [[pos[tuple(p[q[i]] for i in range(n))] for q in perms] for p in perms]
    return finite_cayley(table, pos[tuple(range(n))], f"S{n}", perms)


def trivial_group() -> GroupModel:
    return finite_cayley([[0]], 0, "trivial")


def free_group(generators: int) -> GroupModel:
    """Reduced words; letter ``k`` is the ``k``-th generator and ``-k`` its inverse."""

    def mul(g, h):
        g = list(g)
        h = list(h)
        while g and h and g[-1] == -h[0]:
            g.pop()
            h.pop(0)
        return tuple(g + h)

    def inv(g):
        return tuple(-x for x in reversed(g))

    return GroupModel(f"F{generators}", WordIndex(generators), mul, inv, ())


class DQGDescriptor:
    """Block algebra, fusion data and Haar data of a discrete quantum group.

    ``right_partners(beta, alpha)`` lists every ``gamma`` such that ``alpha``
    occurs in ``fusion(beta, gamma)``; ``left_partners(gamma, alpha)`` lists
    every such ``beta``.  Both are finite for discrete quantum groups.
    """

    def __init__(
        self,
        name: str,
        algebra: BlockAlgebra,
        fusion: Callable,
        haar: HaarData,
        right_partners: Callable,
        left_partners: Callable,
        unit_index=None,
    ):
        self.name = name
        self.algebra = algebra
        self._fusion = fusion
        self.haar = haar
        self._right = right_partners
        self._left = left_partners
        self.unit_index = unit_index
        self._cache: dict = {}

    def __repr__(self):
        return f"DQGDescriptor({self.name!r})"

    def fusion(self, beta, gamma) -> list:
        key = (beta, gamma)
        try:
            return self._cache[key]
        except KeyError:
            pass
        f = self.algebra.field
        out = [(alpha, f.array(v)) for alpha, v in self._fusion(beta, gamma)]
        self._cache[key] = out
        return out

    def right_partners(self, beta, alpha) -> list:
        return list(self._right(beta, alpha))

    def left_partners(self, gamma, alpha) -> list:
        return list(self._left(gamma, alpha))

    def with_haar(self, haar: HaarData) -> DQGDescriptor:
        return DQGDescriptor(self.name, self.algebra, self._fusion, haar, self._right, self._left, self.unit_index)

    def flipped(self) -> DQGDescriptor:
        """Model of the opposite comultiplication ``flip o delta``."""
        alg = self.algebra

        def fusion(beta, gamma):
            nb, ng = alg.block_dim(beta), alg.block_dim(gamma)
            perm = [c * nb + b for b in range(nb) for c in range(ng)]
            return [(alpha, v[perm, :]) for alpha, v in self.fusion(gamma, beta)]

        return DQGDescriptor(
            self.name + "^op", alg, fusion, self.haar, self._left, self._right, self.unit_index
        )


def dual_of_group(group: GroupModel, field: Field = EXACT) -> DQGDescriptor:
    """Functions on a discrete group: 1x1 blocks, ``delta(f)(g, h) = f(gh)``, counting measure."""
    algebra = BlockAlgebra(f"dual({group.name})", group.index_model, 1, field)
    one = [[1]]

    def fusion(g, h):
        return [(group.mul(g, h), one)]

    return DQGDescriptor(
        algebra.name,
        algebra,
        fusion,
        HaarData(algebra),
        lambda g, a: [group.mul(group.inv(g), a)],
        lambda h, a: [group.mul(a, group.inv(h))],
        unit_index=group.identity,
    )


def dual_of_su2(max_spin_index: int = 3) -> DQGDescriptor:
    """Dual of SU(2): block ``j`` (doubled spin) is ``M_{j+1}``; float mode.

    ``phi`` has ``d_alpha = n_alpha`` and ``F = I``, so sigma is trivial.  The
    index model is all of N; ``window(0)`` is ``[0, max_spin_index]``.
    """
    if max_spin_index < 0:
        raise ValueError("max_spin_index must be >= 0")
    algebra = BlockAlgebra("dual(SU2)", NaturalIndex(max(max_spin_index, 1)), lambda j: j + 1, FLOAT)

    def fusion(b, c):
        return [(a, cg_isometry(b, c, a).astype(complex)) for a in fusion_channels(b, c)]

    def partners(b, a):
        return range(abs(a - b), a + b + 1, 2)

    haar = HaarData(algebra, lambda j: (j + 1, np.eye(j + 1)))
    dqg = DQGDescriptor("dual(SU2)", algebra, fusion, haar, partners, partners, unit_index=0)
    dqg.max_spin_index = max_spin_index
    return dqg


def single_block_algebra(size: int = 2, density=(1, 2), d=1, field: Field = EXACT):
    """One block ``M_size`` with ``phi(a) = d tr(diag(density) a)``; returns ``(algebra, haar)``."""
    algebra = BlockAlgebra(f"M{size}", FiniteIndex([0]), size, field)
    F = field.zeros((size, size))
    for i, x in enumerate(density):
        F[i, i] = field.scalar(x)
    return algebra, HaarData(algebra, lambda _: (d, F))


class CoproductRule(TensorRule):
    """``delta(x)_{beta,gamma} = sum_{(alpha, V)} V x_alpha V^dagger``."""

    def __init__(self, dqg: DQGDescriptor, x: Multiplier, support: tuple | None = None):
        self.dqg = dqg
        self.x = x
        self.support = None if support is None else frozenset(support)

    def block(self, left, right, beta, gamma):
        f = left.field
        n = left.block_dim(beta) * right.block_dim(gamma)
        out = f.zeros((n, n))
        for alpha, v in self.dqg.fusion(beta, gamma):
            if self.support is not None and alpha not in self.support:
                continue
            out = out + v @ self.x.block(alpha) @ dagger(v)
        return out

    def to_json(self):
        return {"coproduct": self.x.rule.to_json()}


def coproduct(dqg: DQGDescriptor, a: Element) -> TensorMultiplier:
    dqg.algebra.check_same(a.algebra)
    rule = CoproductRule(dqg, embed_element(a), support=a.support)
    return TensorMultiplier(dqg.algebra, dqg.algebra, rule)


def coproduct_of_multiplier(dqg: DQGDescriptor, x: Multiplier) -> TensorMultiplier:
    dqg.algebra.check_same(x.algebra)
    return TensorMultiplier(dqg.algebra, dqg.algebra, CoproductRule(dqg, x))
