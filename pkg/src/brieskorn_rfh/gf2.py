"""Dense linear algebra over GF(2) on uint8 matrices."""

from __future__ import annotations

import numpy as np

from . import _accel


def as_gf2(M) -> np.ndarray:
    return np.ascontiguousarray(np.asarray(M, dtype=np.int64) & 1, dtype=np.uint8)


def matmul(A, B) -> np.ndarray:
    return as_gf2(np.asarray(A, dtype=np.int64) @ np.asarray(B, dtype=np.int64))


def rref(M) -> tuple[np.ndarray, np.ndarray, int]:
    M = as_gf2(M)
    if M.size == 0:
        return M.copy(), np.zeros(0, dtype=np.int64), 0
    return _accel.gf2_rref(M)


def rank(M) -> int:
    M = np.asarray(M)
    if M.size == 0:
        return 0
    return int(rref(M)[2])


def nullspace(M) -> np.ndarray:
    """Columns spanning ker M (shape cols x nullity)."""
    M = as_gf2(M)
    rows, cols = M.shape
    if rows == 0:
        return np.eye(cols, dtype=np.uint8)
    R, piv, r = rref(M)
    piv = list(piv[:r])
    free = [c for c in range(cols) if c not in piv]
    N = np.zeros((cols, len(free)), dtype=np.uint8)
    for k, f in enumerate(free):
        N[f, k] = 1
        for i, p in enumerate(piv):
            N[p, k] = R[i, f]
    return N


def independent_columns(M) -> list[int]:
    """Indices of the pivot columns, a basis of the column space."""
    M = as_gf2(M)
    if M.size == 0:
        return []
    _, piv, r = rref(M)
    return [int(p) for p in piv[:r]]


def solve(M, v, prefer: str = "lowest") -> np.ndarray | None:
    """Some x with M x = v, or None.

    Free variables are set to zero, so the returned solution is linear in v.
    ``prefer='highest'`` eliminates columns in reverse order, which moves
    pivots (and hence the chosen preimage) to the highest-index columns.
    """
    M = as_gf2(M)
    v = as_gf2(v).reshape(-1)
    rows, cols = M.shape
    if cols == 0:
        return np.zeros(0, dtype=np.uint8) if not v.any() else None
    order = np.arange(cols) if prefer == "lowest" else np.arange(cols)[::-1]
    aug = np.concatenate([M[:, order], v[:, None]], axis=1)
    R, piv, r = rref(aug)
    piv = [int(p) for p in piv[:r]]
    if cols in piv:
        return None
    y = np.zeros(cols, dtype=np.uint8)
    for i, p in enumerate(piv):
        y[p] = R[i, cols]
    x = np.zeros(cols, dtype=np.uint8)
    x[order] = y
    return x


def inverse(M) -> np.ndarray:
    M = as_gf2(M)
    m = M.shape[0]
    R, piv, r = rref(np.concatenate([M, np.eye(m, dtype=np.uint8)], axis=1))
    if r < m or list(piv[:m]) != list(range(m)):
        raise np.linalg.LinAlgError("matrix is singular over GF(2)")
    return R[:, m:].copy()
