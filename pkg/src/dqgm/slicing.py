"""Right slices of multipliers of ``B (x) A`` and their finite-rank factorization.

``slice(Y, xi)`` is the multiplier ``m`` of ``B`` with ``(zeta (x) xi)(Y) = zeta(m)``
for every reduced ``zeta``.  When the slices over all of ``A^`` span a finite
dimensional space, ``Y = sum_k x_k (x) y_k``: :func:`factor` takes a basis
``x_k`` of slices, reads off the coordinate functionals ``lambda_k`` and
recovers each ``y_k`` from ``lambda_k(a) = phi(y_k a)``.

Everything is window-relative.  A stabilized dimension is evidence, not a
proof; reports keep the whole window history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import (
    LEFT,
    RIGHT,
    BlockAlgebra,
    Element,
    Multiplier,
    TensorElement,
    TensorMultiplier,
    element_multiply,
)
from .functionals import HaarData, ReducedFunctional, modular_apply
from .linalg import NotInSpan, coordinates_in_span, inverse, pivot_columns, rank
from .models import DQGDescriptor, coproduct_of_multiplier
from .rules import CharacterRule, Rule
from .scalars import kron

__all__ = [
    "BudgetExceeded",
    "ReconstructionMismatch",
    "SliceRule",
    "SliceSpaceReport",
    "Factorization",
    "AlmostPeriodicReport",
    "slice_multiplier",
    "pair_value",
    "slice_space_dimension",
    "factor",
    "is_almost_periodic",
    "random_element",
    "infer_character",
]

NO_CERTIFICATE = "no_finite_certificate"
ALMOST_PERIODIC = "almost_periodic"


class BudgetExceeded(RuntimeError):
    """Window expansion budget spent without the slice dimension stabilizing."""

    def __init__(self, report: SliceSpaceReport):
        dims = [h[2] for h in report.history]
        super().__init__(f"slice dimension did not stabilize: history {dims}")
        self.report = report


class ReconstructionMismatch(ArithmeticError):
    """``sum x_k (x) y_k`` disagrees with ``Y`` on a checked block pair."""


def _partial_trace_right(block: np.ndarray, nb: int, na: int, density: np.ndarray) -> np.ndarray:
    # (id (x) xi_alpha)(X)[p, p'] = sum_{q, q'} X[(p,q),(p',q')] G[q', q]
    return np.einsum("aqbr,rq->ab", block.reshape(nb, na, nb, na), density)


class SliceRule(Rule):
    """Block rule of ``(id (x) xi)(Y)``: finite sum over ``supp(xi)``."""

    def __init__(self, Y: TensorMultiplier, densities: dict, label: str = "slice"):
        self.Y = Y
        self.densities = densities
        self.label = label

    def block(self, algebra, beta):
        Y = self.Y
        nb = Y.left.block_dim(beta)
        out = algebra.field.zeros((nb, nb))
        for alpha, g in self.densities.items():
            na = Y.right.block_dim(alpha)
            out = out + _partial_trace_right(Y.block(beta, alpha), nb, na, g)
        return out

    def to_json(self):
        return {"slice": self.label}


def slice_multiplier(Y: TensorMultiplier, xi: ReducedFunctional, label: str = "slice") -> Multiplier:
    """The right slice ``(id (x) xi)(Y)`` as a multiplier of ``B``."""
    Y.right.check_same(xi.algebra)
    return Multiplier(Y.left, SliceRule(Y, xi.densities(), label))


def pair_value(Y: TensorMultiplier, zeta: ReducedFunctional, xi: ReducedFunctional):
    """``(zeta (x) xi)(Y)``: the reduced functional ``zeta (x) xi`` extended to ``M(B (x) A)``."""
    Y.left.check_same(zeta.algebra)
    Y.right.check_same(xi.algebra)
    f = Y.field
    total = f.zero
    gx = xi.densities()
    for beta, gz in zeta.densities().items():
        for alpha, g in gx.items():
            total = total + np.trace(Y.block(beta, alpha) @ kron(gz, g))
    return total


def _unit_functionals(haar: HaarData, indices):
    for alpha, i, j, e in haar.algebra.matrix_units(indices):
        yield (alpha, i, j), ReducedFunctional(haar, e, LEFT)


@dataclass
class SliceSpaceReport:
    history: list  # (B-window label, A-window label, dimension)
    stabilized: bool
    final_dimension: int
    level: int
    patience: int
    basis: list = field(default_factory=list)
    basis_keys: list = field(default_factory=list)
    scalar_mode: str = "exact"

    note = (
        "window-relative: a stabilized dimension is a heuristic certificate, "
        "not a proof of finite dimensionality"
    )

    @property
    def dimensions(self) -> list[int]:
        return [h[2] for h in self.history]

    def to_json(self):
        return {
            "history": [{"b_window": b, "a_window": a, "dimension": d} for b, a, d in self.history],
            "stabilized": self.stabilized,
            "final_dimension": self.final_dimension if self.stabilized else None,
            "patience": self.patience,
            "scalar_mode": self.scalar_mode,
            "note": self.note,
        }


def slice_space_dimension(
    Y: TensorMultiplier,
    dqg: DQGDescriptor,
    patience: int = 2,
    budget: int = 6,
    rtol: float = 1e-9,
) -> SliceSpaceReport:
    """Rank of the slice family ``{(id (x) e_ij.phi)(Y)}`` over nested windows.

    At level ``L`` the functionals run over matrix units of ``A.window(L)``
    and the slices are restricted to ``B.window(L)``.  The dimension is
    declared stable once it is unchanged for ``patience`` consecutive
    expansions; both windows finite means the first count is already exact.
    Raises :class:`BudgetExceeded` after ``budget`` windows without that.
    """
    if patience < 1 or budget < 1:
        raise ValueError("patience and budget must be positive")
    Y.right.check_same(dqg.algebra)
    haar = dqg.haar
    finite = Y.left.index_model.finite and Y.right.index_model.finite
    history = []
    level = 0
    while True:
        wb = Y.left.window(level)
        wa = Y.right.window(level)
        keys = []
        slices = []
        for key, xi in _unit_functionals(haar, wa.indices):
            keys.append(key)
            slices.append(slice_multiplier(Y, xi, label=f"e{key}.phi"))
        cols = [s.vector(wb.indices) for s in slices]
        mat = np.stack(cols, axis=1) if cols else Y.field.zeros((0, 0))
        dim = rank(mat, rtol)
        history.append((wb.label, wa.label, dim))
        dims = [h[2] for h in history]
        stable = finite or (len(dims) > patience and len(set(dims[-patience - 1 :])) == 1)
        if stable:
            piv = pivot_columns(mat, rtol)[:dim] if dim else []
            return SliceSpaceReport(
                history,
                True,
                dim,
                level,
                patience,
                basis=[slices[p] for p in piv],
                basis_keys=[keys[p] for p in piv],
                scalar_mode=Y.field.name,
            )
        if len(history) >= budget:
            raise BudgetExceeded(
                SliceSpaceReport(history, False, dim, level, patience, scalar_mode=Y.field.name)
            )
        level += 1


class _LambdaTable:
    """Coordinates ``lambda_k(e^alpha_ij)`` of slices in the chosen basis, computed per block."""

    def __init__(self, Y, haar, basis, b_indices, rtol):
        self.Y = Y
        self.haar = haar
        self.b_indices = tuple(b_indices)
        self.vectors = [x.vector(self.b_indices) for x in basis]
        self.n_terms = len(basis)
        self.rtol = rtol
        self._blocks: dict = {}
        self._left_inverse = None
        if haar.algebra.field.exact and basis:
            # exact mode: invert on a set of independent rows once, then check the rest
            X = np.stack(self.vectors, axis=1)
            rows = pivot_columns(X.T)
            self._matrix = X
            self._rows = rows
            self._left_inverse = inverse(X[rows, :])

    def coordinates(self, s: np.ndarray) -> np.ndarray:
        if self._left_inverse is None:
            return coordinates_in_span(self.vectors, s, rtol=self.rtol)
        c = self._left_inverse @ s[self._rows]
        if not self.haar.algebra.field.is_zero_matrix(self._matrix @ c - s):
            raise NotInSpan("slice is not a combination of the basis slices")
        return c

    def block(self, alpha) -> np.ndarray:
        """Array ``L[k, i, j] = lambda_k(e^alpha_ij)``."""
        if alpha in self._blocks:
            return self._blocks[alpha]
        alg = self.haar.algebra
        n = alg.block_dim(alpha)
        out = np.empty((self.n_terms, n, n), dtype=object if alg.field.exact else complex)
        for i in range(n):
            for j in range(n):
                xi = ReducedFunctional(self.haar, Element.unit(alg, alpha, i, j), LEFT)
                s = slice_multiplier(self.Y, xi).vector(self.b_indices)
                coeffs = self.coordinates(s)
                out[:, i, j] = coeffs
        self._blocks[alpha] = out
        return out

    def value(self, k: int, x: Element):
        """``lambda_k(x)`` by linearity over matrix units."""
        f = x.algebra.field
        total = f.zero
        for alpha, m in x.blocks.items():
            total = total + np.sum(m * self.block(alpha)[k])
        return total


class FactorRule(Rule):
    """Block rule of ``y_k``: solve ``phi(y_k e_ij) = lambda_k(e_ij)`` block by block."""

    def __init__(self, table: _LambdaTable, k: int):
        self.table = table
        self.k = k

    def block(self, algebra, alpha):
        values = self.table.block(alpha)[self.k]
        return self.table.haar.riesz(alpha, values, RIGHT)

    def to_json(self):
        return {"factor": self.k}


@dataclass
class Factorization:
    x: list
    y: list
    lambda_table: dict
    level: int
    b_window: tuple
    a_window: tuple
    probe_b: tuple
    probe_a: tuple
    pairs_checked: int
    max_error: float
    centralizer_pairs: int

    @property
    def rank(self) -> int:
        return len(self.x)

    def product(self, beta, alpha, field) -> np.ndarray:
        n = self.x[0].algebra.block_dim(beta) * self.y[0].algebra.block_dim(alpha) if self.x else 1
        out = field.zeros((n, n))
        for xk, yk in zip(self.x, self.y):
            out = out + kron(xk.block(beta), yk.block(alpha))
        return out

    def as_tensor_multiplier(self) -> TensorMultiplier:
        return TensorMultiplier.elementary([(1, xk, yk) for xk, yk in zip(self.x, self.y)])


def z_apply(table: _LambdaTable, haar: HaarData, k: int, c: Element) -> Element:
    """``z_k(c)`` from ``phi(z_k(c) d) = lambda_k(d sigma(c))``, using only the lambda table."""
    alg = c.algebra
    sc = modular_apply(haar, c)
    blocks = {}
    for alpha in c.support:
        n = alg.block_dim(alpha)
        values = alg.field.zeros((n, n))
        for i in range(n):
            for j in range(n):
                d = Element.unit(alg, alpha, i, j)
                values[i, j] = table.value(k, element_multiply(d, sc))
        blocks[alpha] = haar.riesz(alpha, values, RIGHT)
    return Element(alg, blocks)


def random_element(
    algebra: BlockAlgebra,
    indices,
    rng: np.random.Generator,
    max_blocks: int = 3,
    bound: int = 3,
) -> Element:
    """Random element on a few blocks of ``indices``; Gaussian-integer/2 entries when exact."""
    indices = list(indices)
    count = int(rng.integers(1, min(max_blocks, len(indices)) + 1))
    chosen = [indices[i] for i in rng.choice(len(indices), size=count, replace=False)]
    f = algebra.field
    blocks = {}
    for index in chosen:
        n = algebra.block_dim(index)
        if f.exact:
            from fractions import Fraction

            from .scalars import GaussianRational

            m = f.zeros((n, n))
            for p in range(n):
                for q in range(n):
                    re = Fraction(int(rng.integers(-bound, bound + 1)), int(rng.integers(1, 3)))
                    im = Fraction(int(rng.integers(-1, 2)), 1) if rng.random() < 0.3 else 0
                    m[p, q] = GaussianRational(re, im)
        else:
            m = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
        blocks[index] = m
    return Element(algebra, blocks)


def factor(
    Y: TensorMultiplier,
    dqg: DQGDescriptor,
    report: SliceSpaceReport,
    rtol: float = 1e-7,
    probe_size: int = 6,
    centralizer_pairs: int = 50,
    rng: np.random.Generator | None = None,
) -> Factorization:
    """Write ``Y = sum_k x_k (x) y_k`` from a stabilized slice report.

    The ``x_k`` are the report's basis slices.  For each matrix unit ``a`` of
    the A-window, ``(id (x) a.phi)(Y)`` is expanded in that basis, giving
    ``lambda_k(a)``; ``y_k`` is the unique multiplier with
    ``lambda_k(a) = phi(y_k a)``.  The result is then checked against ``Y`` on
    the final windows plus disjoint probe windows, and every ``(y_k, z_k)`` is
    checked to be a double centralizer on random pairs.
    """
    if not report.stabilized:
        raise ValueError("factor needs a stabilized slice report")
    haar = dqg.haar
    f = Y.field
    level = report.level
    wb = Y.left.window(level).indices
    wa = Y.right.window(level).indices
    table = _LambdaTable(Y, haar, report.basis, wb, rtol)
    xs = list(report.basis)
    ys = [Multiplier(Y.right, FactorRule(table, k)) for k in range(len(xs))]

    probe_b = Y.left.index_model.probe(level, probe_size)
    probe_a = Y.right.index_model.probe(level, probe_size)
    fac = Factorization(
        xs, ys, {}, level, tuple(wb), tuple(wa), probe_b, probe_a, 0, 0.0, 0
    )
    worst = 0.0
    checked = 0
    for beta in tuple(wb) + tuple(probe_b):
        for alpha in tuple(wa) + tuple(probe_a):
            want = Y.block(beta, alpha)
            got = fac.product(beta, alpha, f)
            checked += 1
            if f.exact:
                if not f.matrices_equal(got, want):
                    raise ReconstructionMismatch(f"block {(beta, alpha)!r} differs")
            else:
                scale = max(1.0, float(np.max(np.abs(want), initial=0.0)))
                err = float(np.max(np.abs(got - want), initial=0.0)) / scale
                worst = max(worst, err)
                if err > rtol:
                    raise ReconstructionMismatch(
                        f"block {(beta, alpha)!r} relative error {err:.3g} > {rtol:g}"
                    )

    rng = rng or np.random.default_rng(0)
    for k in range(len(xs)):
        for _ in range(centralizer_pairs):
            a1 = random_element(Y.right, wa, rng)
            a2 = random_element(Y.right, wa, rng)
            lhs = element_multiply(z_apply(table, haar, k, a1), a2)
            rhs = element_multiply(a1, ys[k].apply(a2, LEFT))
            if not lhs.equals(rhs, None if f.exact else rtol):
                raise ReconstructionMismatch(f"(y_{k}, z_{k}) is not a double centralizer")

    fac.lambda_table = {
        (alpha, i, j): tuple(table.block(alpha)[:, i, j])
        for alpha in wa
        for i in range(Y.right.block_dim(alpha))
        for j in range(Y.right.block_dim(alpha))
    }
    fac.pairs_checked = checked
    fac.max_error = worst
    fac.centralizer_pairs = centralizer_pairs * len(xs)
    return fac


@dataclass
class AlmostPeriodicReport:
    verdict: str
    dimension: int | None
    slices: SliceSpaceReport
    factorization: Factorization | None = None

    @property
    def almost_periodic(self) -> bool:
        return self.verdict == ALMOST_PERIODIC


def is_almost_periodic(
    x: Multiplier,
    dqg: DQGDescriptor,
    patience: int = 2,
    budget: int = 6,
    rtol: float = 1e-9,
    factor_rtol: float = 1e-7,
    rng: np.random.Generator | None = None,
) -> AlmostPeriodicReport:
    """Does ``delta(x)`` lie in ``M(A) (x) M(A)``, as far as the window budget can tell?"""
    Y = coproduct_of_multiplier(dqg, x)
    try:
        report = slice_space_dimension(Y, dqg, patience, budget, rtol)
    except BudgetExceeded as exc:
        return AlmostPeriodicReport(NO_CERTIFICATE, None, exc.report)
    fac = factor(Y, dqg, report, rtol=factor_rtol, rng=rng)
    return AlmostPeriodicReport(ALMOST_PERIODIC, report.final_dimension, report, fac)


def infer_character(m: Multiplier, indices) -> Rule | None:
    """If ``m`` restricted to integer ``indices`` is ``c * zeta**n``, return that rule (``c`` dropped)."""
    alg = m.algebra
    idx = sorted(i for i in indices if isinstance(i, int))
    if len(idx) < 2 or any(alg.block_dim(i) != 1 for i in idx):
        return None
    vals = [m.block(i)[0, 0] for i in idx]
    if any(not v if alg.field.exact else abs(v) < 1e-12 for v in vals):
        return None
    ratios = [vals[k + 1] / vals[k] for k in range(len(vals) - 1) if idx[k + 1] == idx[k] + 1]
    if not ratios:
        return None
    zeta = ratios[0]
    f = alg.field
    for r in ratios[1:]:
        if f.exact and r != zeta:
            return None
        if not f.exact and abs(r - zeta) > 1e-9:
            return None
    if f.exact:
        from fractions import Fraction

        for t in (Fraction(0), Fraction(1, 4), Fraction(1, 2), Fraction(3, 4)):
            if f.root_of_unity(t) == zeta:
                return CharacterRule(t)
        return None
    if abs(abs(zeta) - 1) > 1e-9:
        return None
    return CharacterRule(float(np.angle(zeta) / (2 * np.pi)))
