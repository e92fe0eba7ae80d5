"""Dense linear algebra over both scalar modes.

Exact matrices (``dtype=object`` of :class:`GaussianRational`) are reduced by
exact elimination; float matrices use the SVD with a relative threshold.
"""

from __future__ import annotations

from fractions import Fraction
from math import lcm

import numpy as np

from .scalars import EXACT, FLOAT, GaussianRational, field_for

__all__ = [
    "NotInSpan",
    "SingularSystem",
    "RANK_RTOL",
    "rank",
    "pivot_columns",
    "kernel_basis",
    "coordinates_in_span",
    "solve",
    "inverse",
]

RANK_RTOL = 1e-9


class NotInSpan(ValueError):
    """The target vector is not a combination of the given basis."""


class SingularSystem(ValueError):
    """A linear system has no solution or no unique solution."""


def _exact(m: np.ndarray) -> bool:
    return m.dtype == object


def _gaussian_integer_rows(m: np.ndarray) -> list[list[GaussianRational]]:
    rows = []
    for row in m:
        entries = [GaussianRational.coerce(x) for x in row]
        scale = 1
        for x in entries:
            scale = lcm(scale, x.re.denominator, x.im.denominator)
        rows.append([x * scale for x in entries])
    return rows


def _bareiss_rank(m: np.ndarray) -> int:
    """Fraction-free elimination over Z[i] after clearing row denominators."""
    rows = _gaussian_integer_rows(m)
    n_rows = len(rows)
    n_cols = m.shape[1] if m.ndim == 2 else 0
    prev = GaussianRational(1)
    r = 0
    for c in range(n_cols):
        if r == n_rows:
            break
        pivot = next((i for i in range(r, n_rows) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        p = rows[r][c]
        for i in range(r + 1, n_rows):
            f = rows[i][c]
            row_i, row_r = rows[i], rows[r]
            rows[i] = [(p * row_i[j] - f * row_r[j]) / prev for j in range(n_cols)]
        prev = p
        r += 1
    return r


def _float_singular_values(m: np.ndarray) -> np.ndarray:
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def _float_threshold(m: np.ndarray, sv: np.ndarray, rtol: float, policy: str) -> float:
    if policy == "entry":
        ref = float(np.max(np.abs(m), initial=0.0))
    elif policy == "singular":
        ref = float(sv[0]) if sv.size else 0.0
    else:
        raise ValueError(f"unknown tolerance policy {policy!r}")
    return rtol * ref


def rank(m: np.ndarray, rtol: float = RANK_RTOL, policy: str = "singular", method: str = "sparse") -> int:
    """Rank of ``m``.

    Exact matrices use sparse elimination over Q(i) (``method="sparse"``) or
    fraction-free Bareiss elimination over Z[i] (``method="bareiss"``).

    Float mode counts singular values above ``rtol`` times the largest singular
    value (``policy="singular"``) or the largest absolute entry
    (``policy="entry"``).
    """
    m = np.asarray(m)
    if m.ndim != 2 or m.size == 0:
        return 0
    if _exact(m):
        if method == "bareiss":
            return _bareiss_rank(m)
        return len(_rref_exact(m)[1])
    sv = _float_singular_values(m)
    tau = _float_threshold(m, sv, rtol, policy)
    return int(np.sum(sv > tau)) if sv.size and sv[0] > 0 else 0


def _sparse_rows(m: np.ndarray) -> list[dict]:
    rows = []
    for row in m:
        d = {}
        for c, x in enumerate(row):
            if x:
                d[c] = GaussianRational.coerce(x)
        rows.append(d)
    return rows


def _rref_exact(m: np.ndarray) -> tuple[list[dict], list[int]]:
    """Sparse Gauss-Jordan over Q(i); returns nonzero reduced rows and pivot columns."""
    pending = [r for r in _sparse_rows(m) if r]
    n_cols = m.shape[1]
    done: list[dict] = []
    pivots: list[int] = []
    for c in range(n_cols):
        hit = None
        for k, row in enumerate(pending):
            if c in row and (hit is None or len(row) < len(pending[hit])):
                hit = k
        if hit is None:
            continue
        prow = pending.pop(hit)
        inv = prow[c].inverse()
        prow = {k: v * inv for k, v in prow.items()}
        for group in (pending, done):
            for k, row in enumerate(group):
                f = row.get(c)
                if f is None:
                    continue
                new = dict(row)
                for col, v in prow.items():
                    x = new.get(col, 0) - f * v
                    if x:
                        new[col] = x
                    else:
                        new.pop(col, None)
                group[k] = new
        pending = [r for r in pending if r]
        done.append(prow)
        pivots.append(c)
        if not pending:
            break
    return done, pivots


def _float_pivots(m: np.ndarray, rtol: float) -> list[int]:
    # greedy column selection; a column is kept if it raises the numerical rank
    chosen: list[int] = []
    scale = float(np.max(np.linalg.svd(m, compute_uv=False), initial=0.0)) if m.size else 0.0
    if scale == 0.0:
        return chosen
    current = 0
    for c in range(m.shape[1]):
        trial = m[:, chosen + [c]]
        sv = np.linalg.svd(trial, compute_uv=False)
        r = int(np.sum(sv > rtol * scale))
        if r > current:
            chosen.append(c)
            current = r
    return chosen


def pivot_columns(m: np.ndarray, rtol: float = RANK_RTOL) -> list[int]:
    """Indices of a maximal set of linearly independent columns (leftmost first)."""
    m = np.asarray(m)
    if m.ndim != 2 or m.size == 0:
        return []
    if _exact(m):
        return _rref_exact(m)[1]
    return _float_pivots(m, rtol)


def kernel_basis(m: np.ndarray, rtol: float = RANK_RTOL) -> list[np.ndarray]:
    """Basis of the right null space of ``m``; empty iff ``rank(m) == cols``."""
    m = np.asarray(m)
    n_cols = m.shape[1]
    if _exact(m):
        if m.shape[0] == 0:
            return [EXACT.eye(n_cols)[:, j].copy() for j in range(n_cols)]
        rows, pivots = _rref_exact(m)
        pivot_set = set(pivots)
        free = [c for c in range(n_cols) if c not in pivot_set]
        basis = []
        for f in free:
            v = EXACT.zeros(n_cols)
            v[f] = GaussianRational(1)
            for r, pc in enumerate(pivots):
                if f in rows[r]:
                    v[pc] = -rows[r][f]
            basis.append(v)
        return basis
    if m.shape[0] == 0:
        return [np.eye(n_cols, dtype=complex)[:, j].copy() for j in range(n_cols)]
    u, sv, vh = np.linalg.svd(m.astype(complex))
    tau = rtol * (sv[0] if sv.size else 0.0)
    r = int(np.sum(sv > tau)) if sv.size and sv[0] > 0 else 0
    return [vh[j].conj().copy() for j in range(r, n_cols)]


def solve(m: np.ndarray, rhs: np.ndarray, rtol: float = 1e-8) -> np.ndarray:
    """Unique solution ``x`` of ``m @ x = rhs`` (rhs may be a vector or matrix).

    Raises :class:`SingularSystem` when the system is inconsistent or the
    solution is not unique.
    """
    m = np.asarray(m)
    rhs = np.asarray(rhs)
    vector = rhs.ndim == 1
    rhs2 = rhs.reshape(rhs.shape[0], -1)
    n_cols = m.shape[1]
    if _exact(m) or rhs.dtype == object:
        m = EXACT.array(m)
        rhs2 = EXACT.array(rhs2)
        aug = np.concatenate([m, rhs2], axis=1)
        rows, pivots = _rref_exact(aug)
        if any(p >= n_cols for p in pivots):
            raise SingularSystem("inconsistent system")
        if len(pivots) < n_cols:
            raise SingularSystem("solution is not unique")
        x = EXACT.zeros((n_cols, rhs2.shape[1]))
        for r, pc in enumerate(pivots):
            for col, v in rows[r].items():
                if col >= n_cols:
                    x[pc, col - n_cols] = v
        return x[:, 0] if vector else x
    m = m.astype(complex)
    rhs2 = rhs2.astype(complex)
    if rank(m) < n_cols:
        raise SingularSystem("solution is not unique")
    x, *_ = np.linalg.lstsq(m, rhs2, rcond=None)
    resid = np.max(np.abs(m @ x - rhs2), initial=0.0)
    scale = max(1.0, float(np.max(np.abs(rhs2), initial=0.0)))
    if resid > rtol * scale:
        raise SingularSystem(f"inconsistent system (residual {resid:.3g})")
    return x[:, 0] if vector else x


def inverse(m: np.ndarray) -> np.ndarray:
    field = field_for(np.asarray(m))
    return solve(m, field.eye(m.shape[0]))


def coordinates_in_span(
    basis: list[np.ndarray],
    target: np.ndarray,
    rtol: float = 1e-8,
    check_independent: bool = False,
) -> np.ndarray:
    """Unique coefficients ``c`` with ``sum(c[k] * basis[k]) == target``.

    Raises :class:`NotInSpan` if ``target`` lies outside the span.  With
    ``check_independent`` the basis is first verified to be independent.
    """
    target = np.asarray(target).reshape(-1)
    exact = target.dtype == object or any(np.asarray(b).dtype == object for b in basis)
    field = EXACT if exact else FLOAT
    if not basis:
        if field.is_zero_matrix(target):
            return field.zeros(0)
        raise NotInSpan("target is nonzero but the basis is empty")
    cols = np.stack([field.array(np.asarray(b).reshape(-1)) for b in basis], axis=1)
    target = field.array(target)
    if check_independent and rank(cols) != cols.shape[1]:
        raise ValueError("basis vectors are linearly dependent")
    try:
        return solve(cols, target, rtol=rtol)
    except SingularSystem as exc:
        if "not unique" in str(exc):
            raise ValueError("basis vectors are linearly dependent") from exc
        raise NotInSpan(str(exc)) from exc


def as_fraction_matrix(data) -> np.ndarray:
    """Shorthand used by tests and demos: exact matrix from ints/strings."""
    return EXACT.array([[Fraction(x) if isinstance(x, str) else x for x in row] for row in data])
