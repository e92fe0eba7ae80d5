"""Clebsch-Gordan isometries for SU(2) by the ladder-operator recursion.

Spins are given doubled (``j2 = 2j``) so labels stay integral.  In the block of
doubled spin ``j2`` the basis vector ``i`` has magnetic number ``m = j - i``
(highest weight first); tensor products use ``numpy.kron`` ordering.  Phases
follow the Condon-Shortley convention.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .linalg import kernel_basis


def lowering(j2: int) -> np.ndarray:
    """``J_-`` on the spin ``j2/2`` irrep."""
    n = j2 + 1
    j = j2 / 2
    out = np.zeros((n, n))
    for i in range(n - 1):
        m = j - i
        out[i + 1, i] = np.sqrt((j + m) * (j - m + 1))
    return out


def fusion_channels(j1: int, j2: int) -> list[int]:
    return list(range(abs(j1 - j2), j1 + j2 + 1, 2))


@lru_cache(maxsize=None)
def cg_isometry(j1: int, j2: int, J: int) -> np.ndarray:
    """Isometry ``V`` of shape ``((j1+1)(j2+1), J+1)`` onto the spin-``J/2`` summand.

    ``V[:, k]`` is the state ``|J/2, J/2 - k>`` written in the product basis.
    """
    if J not in fusion_channels(j1, j2):
        raise ValueError(f"spin {J}/2 does not occur in {j1}/2 x {j2}/2")
    n1, n2 = j1 + 1, j2 + 1
    lo1, lo2 = lowering(j1), lowering(j2)
    lower = np.kron(lo1, np.eye(n2)) + np.kron(np.eye(n1), lo2)
    raise_ = lower.T
    # doubled magnetic numbers of the product basis
    m2 = np.array([(j1 - 2 * a) + (j2 - 2 * b) for a in range(n1) for b in range(n2)])
    top = np.flatnonzero(m2 == J)
    null = kernel_basis(raise_[:, top].astype(complex))
    if len(null) != 1:
        raise ArithmeticError(f"highest weight space for J={J} has dimension {len(null)}")
    w = null[0]
    # Condon-Shortley: <j1 j1; j2 (J - j1) | J J> > 0
    w = w * (abs(w[0]) / w[0])
    v = np.zeros(n1 * n2)
    v[top] = np.real(w)
    v /= np.linalg.norm(v)
    cols = [v]
    jj = J / 2
    for k in range(J):
        m = jj - k
        v = lower @ v / np.sqrt((jj + m) * (jj - m + 1))
        cols.append(v)
    return np.stack(cols, axis=1)
