"""Hot loops shared by the numeric modules.

Every kernel is written once in a numba-compatible subset of numpy.  When
numba is importable and ``BRIESKORN_RFH_BACKEND`` is not ``numpy`` the kernels
are compiled with ``@njit``; otherwise the very same functions run as plain
numpy code.  Callers must go through the module attribute (``_accel.propagate``)
so they pick up whichever version is active.  ``benchmarks/bench_kernels.py``
times both backends in separate processes.
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None
    HAS_NUMBA = False

BACKEND_ENV = "BRIESKORN_RFH_BACKEND"


def _wanted_backend() -> str:
    value = os.environ.get(BACKEND_ENV, "numba").strip().lower()
    if value not in ("numba", "numpy"):
        raise ValueError(f"{BACKEND_ENV} must be 'numba' or 'numpy', got {value!r}")
    if value == "numba" and not HAS_NUMBA:
        return "numpy"
    return value


BACKEND = _wanted_backend()


# ---------------------------------------------------------------------------
# matrix exponential and symplectic propagation


def expm_small(A):
    """Scaling-and-squaring Taylor exponential for small dense matrices."""
    m = A.shape[0]
    norm = 0.0
    for j in range(m):
        col = 0.0
        for i in range(m):
            col += abs(A[i, j])
        if col > norm:
            norm = col
    squarings = 0
    while norm > 0.5:
        norm *= 0.5
        squarings += 1
    B = A / (2.0**squarings)
    result = np.eye(m)
    term = np.eye(m)
    for k in range(1, 19):
        term = term @ B / k
        result = result + term
    for _ in range(squarings):
        result = result @ result
    return result


def symplectic_residual(P, J):
    """max |P^T J P - J| relative to |P|^2."""
    K = P.T @ J @ P - J
    scale = 0.0
    for i in range(P.shape[0]):
        for j in range(P.shape[1]):
            if abs(P[i, j]) > scale:
                scale = abs(P[i, j])
    scale = max(1.0, scale * scale)
    worst = 0.0
    for i in range(K.shape[0]):
        for j in range(K.shape[1]):
            if abs(K[i, j]) > worst:
                worst = abs(K[i, j])
    return worst / scale


def symplectic_correct(P, J):
    """One Newton-type step towards Sp: P (I + K^{-1}(J - K)/2), K = P^T J P."""
    K = P.T @ J @ P
    m = P.shape[0]
    D = np.linalg.solve(K, J - K)
    return P @ (np.eye(m) + 0.5 * D)


def propagate(omegas, J, reproject_tol):
    """Psi_{k+1} = expm(Omega_k) Psi_k from Psi_0 = I.

    Returns the stacked samples and the largest relative symplectic residual
    seen after re-projection.
    """
    steps = omegas.shape[0]
    m = omegas.shape[1]
    out = np.empty((steps + 1, m, m))
    P = np.eye(m)
    out[0] = P
    worst = 0.0
    for k in range(steps):
        P = expm_small(omegas[k]) @ P
        res = symplectic_residual(P, J)
        if res > reproject_tol:
            for _ in range(3):
                P = symplectic_correct(P, J)
                res = symplectic_residual(P, J)
                if res <= reproject_tol:
                    break
        if res > worst:
            worst = res
        out[k + 1] = P
    return out, worst


# ---------------------------------------------------------------------------
# GF(2) elimination


def gf2_rref(M):
    """Reduced row echelon form over GF(2); returns (R, pivot columns, rank)."""
    R = M.copy()
    rows, cols = R.shape
    pivots = np.full(cols, -1, dtype=np.int64)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        p = -1
        for i in range(r, rows):
            if R[i, c] != 0:
                p = i
                break
        if p < 0:
            continue
        if p != r:
            tmp = R[p].copy()
            R[p] = R[r]
            R[r] = tmp
        for i in range(rows):
            if i != r and R[i, c] != 0:
                R[i] ^= R[r]
        pivots[r] = c
        r += 1
    return R, pivots[:r], r


# ---------------------------------------------------------------------------
# projected RK4 gradient flows


def s3_gradient(A, s):
    f = 0.0
    for i in range(4):
        f += A[i] * s[i] * s[i]
    g = np.empty(4)
    for i in range(4):
        g[i] = 2.0 * s[i] * (A[i] - f)
    return g


def s3_flow(A, s0, h, nmax, sign, gtol):
    """RK4 on S^3 for s' = sign * grad f with renormalisation after each step."""
    out = np.empty((nmax + 1, 4))
    s = s0 / np.sqrt(np.sum(s0 * s0))
    out[0] = s
    n = 0
    converged = False
    for k in range(nmax):
        g = s3_gradient(A, s)
        if np.sqrt(np.sum(g * g)) < gtol:
            converged = True
            break
        k1 = sign * g
        k2 = sign * s3_gradient(A, s + 0.5 * h * k1)
        k3 = sign * s3_gradient(A, s + 0.5 * h * k2)
        k4 = sign * s3_gradient(A, s + h * k3)
        s = s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        s = s / np.sqrt(np.sum(s * s))
        n = k + 1
        out[n] = s
    if not converged:
        g = s3_gradient(A, s)
        converged = np.sqrt(np.sum(g * g)) < gtol
    return out[: n + 1], converged


def sstar_project(z, dim):
    """Newton projection onto |x|=|y|=1, <x,y>=0 (minimum-norm corrections)."""
    w = z.copy()
    for _ in range(8):
        x = w[:dim]
        y = w[dim:]
        c = np.empty(3)
        c[0] = np.sum(x * x) - 1.0
        c[1] = np.sum(y * y) - 1.0
        c[2] = np.sum(x * y)
        if np.max(np.abs(c)) < 1e-15:
            break
        G = np.zeros((3, 2 * dim))
        G[0, :dim] = 2.0 * x
        G[1, dim:] = 2.0 * y
        G[2, :dim] = y
        G[2, dim:] = x
        lam = np.linalg.solve(G @ G.T, c)
        w = w - G.T @ lam
    return w


def sstar_gradient(za, z, dim, pushforward):
    """Tangential gradient of psi = |z - za|^2 / 2 on S*S^{dim-1}.

    With ``pushforward`` the metric is 1/4 of the standard one on the
    orthogonal complement of X = (y, -x) and 1/8 of it along X.
    """
    x = z[:dim]
    y = z[dim:]
    v = z - za
    if pushforward:
        X = np.empty(2 * dim)
        X[:dim] = y
        X[dim:] = -x
        v = 4.0 * (v + (np.sum(v * X) / np.sum(X * X)) * X)
    G = np.zeros((3, 2 * dim))
    G[0, :dim] = x
    G[1, dim:] = y
    G[2, :dim] = y
    G[2, dim:] = x
    lam = np.linalg.solve(G @ G.T, G @ v)
    return v - G.T @ lam


def sstar_flow(za, z0, dim, h, nmax, sign, gtol, pushforward):
    """RK4 for z' = sign * grad_g psi with Newton re-projection each step."""
    out = np.empty((nmax + 1, 2 * dim))
    z = sstar_project(z0, dim)
    out[0] = z
    n = 0
    converged = False
    for k in range(nmax):
        g = sstar_gradient(za, z, dim, pushforward)
        if np.sqrt(np.sum(g * g)) < gtol:
            converged = True
            break
        k1 = sign * g
        k2 = sign * sstar_gradient(za, z + 0.5 * h * k1, dim, pushforward)
        k3 = sign * sstar_gradient(za, z + 0.5 * h * k2, dim, pushforward)
        k4 = sign * sstar_gradient(za, z + h * k3, dim, pushforward)
        z = sstar_project(z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4), dim)
        n = k + 1
        out[n] = z
    if not converged:
        g = sstar_gradient(za, z, dim, pushforward)
        converged = np.sqrt(np.sum(g * g)) < gtol
    return out[: n + 1], converged


_NAMES = (
    "expm_small",
    "symplectic_residual",
    "symplectic_correct",
    "propagate",
    "gf2_rref",
    "s3_gradient",
    "s3_flow",
    "sstar_project",
    "sstar_gradient",
    "sstar_flow",
)

PY_KERNELS = {name: globals()[name] for name in _NAMES}

if BACKEND == "numba":
    # compiled callers look callees up in module globals at first call,
    # so rebinding every name keeps the whole call graph in nopython mode
    for _name in _NAMES:
        globals()[_name] = numba.njit(cache=True)(PY_KERNELS[_name])
