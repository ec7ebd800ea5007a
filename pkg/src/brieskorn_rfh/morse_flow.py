"""An explicit perfect Morse-Smale pair on the unit cotangent bundle S*S^{n-1}.

S*S^{n-1} = {(x, y) in R^n x R^n : |x| = |y| = 1, <x, y> = 0} carries
psi(z) = |z - z_a|^2 / 2 with z_a = (a e_1; e_2), whose four critical points
z^{+-}_{+-} = (+-e_1; +-e_2) have indices 0, n-2, n-1, 2n-3.  For n = 3 the
map Phi: S^3 -> S*S^2 is a double cover carrying f(s) = sum A_i s_i^2 to psi
and the round metric to the metric g used below, so flows on S^3 count
connecting orbits of psi twice.

Flows are positive gradient flows (values increase forward in time).  The
heavy loops live in ``_accel`` (numba or numpy).
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.linalg import null_space

from . import _accel
from .errors import (
    ClusteringAmbiguous,
    ConstraintViolated,
    HessianDegenerate,
    InputError,
    MonotonicityViolated,
    NoConvergence,
)
from .floer_algebra import FloerTriple, homology_window

PUSHFORWARD = "pushforward_g"
AMBIENT = "ambient_standard"

HESSIAN_STEP = 1e-4
ZERO_BAND = 1e-6
CONSTRAINT_TOL = 1e-10


@dataclass(frozen=True)
class CriticalPoint:
    label: str
    point: np.ndarray = field(repr=False)
    value: float
    index: int


# ---------------------------------------------------------------------------
# setups


@dataclass(frozen=True)
class EmbeddedMorseSetup:
    """psi on S*S^{n-1} inside R^{2n} with one of two metrics."""

    n: int = 3
    a: float = 2.0
    metric: str = PUSHFORWARD

    def __post_init__(self):
        if self.n < 2:
            raise InputError(f"S*S^(n-1) needs n >= 2, got {self.n}")
        if self.a in (-1.0, 0.0, 1.0):
            raise InputError("psi is not Morse for a in {-1, 0, 1}")
        if self.metric not in (PUSHFORWARD, AMBIENT):
            raise InputError(f"unknown metric {self.metric!r}")

    @property
    def za(self) -> np.ndarray:
        z = np.zeros(2 * self.n)
        z[0] = self.a
        z[self.n + 1] = 1.0
        return z

    @property
    def ambient_dim(self) -> int:
        return 2 * self.n

    def value(self, z) -> float:
        d = np.asarray(z) - self.za
        return 0.5 * float(d @ d)

    def values(self, Z: np.ndarray) -> np.ndarray:
        d = Z - self.za
        return 0.5 * np.einsum("ij,ij->i", d, d)

    def constraints(self, z) -> np.ndarray:
        x, y = z[: self.n], z[self.n :]
        return np.array([x @ x - 1.0, y @ y - 1.0, x @ y])

    def constraint_jacobian(self, z) -> np.ndarray:
        n = self.n
        G = np.zeros((3, 2 * n))
        G[0, :n] = 2 * z[:n]
        G[1, n:] = 2 * z[n:]
        G[2, :n] = z[n:]
        G[2, n:] = z[:n]
        return G

    def residual(self, z) -> float:
        return float(np.max(np.abs(self.constraints(np.asarray(z, dtype=float)))))

    def project(self, z) -> np.ndarray:
        """Closest point: the orthonormal polar factor of the n x 2 frame (x, y)."""
        z = np.asarray(z, dtype=float)
        M = np.stack([z[: self.n], z[self.n :]], axis=1)
        U, _, Vt = np.linalg.svd(M, full_matrices=False)
        Q = U @ Vt
        return np.concatenate([Q[:, 0], Q[:, 1]])

    def tangent_basis(self, z) -> np.ndarray:
        return null_space(self.constraint_jacobian(z))

    def gradient(self, z) -> np.ndarray:
        return _accel.sstar_gradient(self.za, np.asarray(z, dtype=float), self.n, self.metric == PUSHFORWARD)

    def _flow(self, z0, h, nmax, sign, gtol):
        return _accel.sstar_flow(self.za, np.asarray(z0, dtype=float), self.n, h, nmax, sign, gtol, self.metric == PUSHFORWARD)

    # KKT pieces for Newton: ambient Hessian and constraint Hessians
    def _kkt_parts(self, z):
        n = self.n
        H = np.eye(2 * n)
        C = np.zeros((3, 2 * n, 2 * n))
        C[0, :n, :n] = 2 * np.eye(n)
        C[1, n:, n:] = 2 * np.eye(n)
        C[2, :n, n:] = np.eye(n)
        C[2, n:, :n] = np.eye(n)
        return z - self.za, H, C

    def seeds(self) -> list[tuple[str, np.ndarray, int]]:
        """Labels, exact locations and expected indices (a > 1)."""
        n = self.n
        out = []
        for label, sx, sy, ind in (("z++", 1, 1, 0), ("z+-", 1, -1, n - 2), ("z-+", -1, 1, n - 1), ("z--", -1, -1, 2 * n - 3)):
            z = np.zeros(2 * n)
            z[0] = sx
            z[n + 1] = sy
            out.append((label, z, ind))
        return out

    def reflect(self, z) -> np.ndarray:
        """r: minus sign on coordinates 3..n of both x and y."""
        w = np.array(z, dtype=float)
        w[2 : self.n] *= -1
        w[self.n + 2 :] *= -1
        return w

    def lyapunov(self, Z) -> np.ndarray:
        """F = |x - e_1|^2 + |y - e_2|^2, row-wise."""
        Z = np.atleast_2d(Z)
        ref = np.zeros(2 * self.n)
        ref[0] = 1.0
        ref[self.n + 1] = 1.0
        d = Z - ref
        return np.einsum("ij,ij->i", d, d)


def _default_A(a: float) -> tuple[float, float, float, float]:
    m, p = (a - 1) ** 2 / 2, (a + 1) ** 2 / 2
    return (m, m + 2, p, p + 2)


@dataclass(frozen=True)
class S3FlowSetup:
    """f(s) = sum A_i s_i^2 on the round S^3."""

    A: tuple[float, float, float, float] = _default_A(2.0)

    def __post_init__(self):
        A = tuple(float(x) for x in self.A)
        if len(A) != 4 or not all(x > 0 for x in A) or not all(p < q for p, q in zip(A, A[1:])):
            raise InputError(f"need 0 < A_1 < A_2 < A_3 < A_4, got {A}")
        object.__setattr__(self, "A", A)

    @classmethod
    def from_a(cls, a: float) -> "S3FlowSetup":
        return cls(_default_A(a))

    ambient_dim = 4

    def value(self, s) -> float:
        s = np.asarray(s)
        return float(np.dot(self.A, s * s))

    def values(self, S: np.ndarray) -> np.ndarray:
        return (S * S) @ np.asarray(self.A)

    def constraints(self, s) -> np.ndarray:
        return np.array([s @ s - 1.0])

    def constraint_jacobian(self, s) -> np.ndarray:
        return 2 * np.asarray(s, dtype=float)[None, :]

    def residual(self, s) -> float:
        return float(abs(np.dot(s, s) - 1.0))

    def project(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        return s / np.linalg.norm(s)

    def tangent_basis(self, s) -> np.ndarray:
        return null_space(np.asarray(s, dtype=float)[None, :])

    def gradient(self, s) -> np.ndarray:
        return _accel.s3_gradient(np.asarray(self.A), np.asarray(s, dtype=float))

    def _flow(self, s0, h, nmax, sign, gtol):
        return _accel.s3_flow(np.asarray(self.A), np.asarray(s0, dtype=float), h, nmax, sign, gtol)

    def _kkt_parts(self, s):
        H = 2 * np.diag(self.A)
        return H @ s, H, 2 * np.eye(4)[None]

    def seeds(self) -> list[tuple[str, np.ndarray, int]]:
        out = []
        for i in range(4):
            for sign, tag in ((1, "+"), (-1, "-")):
                out.append((f"c{i + 1}{tag}", sign * np.eye(4)[i], i))
        return out

    @staticmethod
    def reflect(s) -> np.ndarray:
        s = np.array(s, dtype=float)
        s[1:3] *= -1
        return s


Setup = EmbeddedMorseSetup | S3FlowSetup


# ---------------------------------------------------------------------------
# critical points


def _newton_kkt(setup: Setup, z0: np.ndarray, tol: float = 1e-14, maxit: int = 50) -> np.ndarray:
    """Newton on grad value = G^T lambda, c(z) = 0."""
    z = setup.project(z0)
    G = setup.constraint_jacobian(z)
    lam = np.linalg.lstsq(G.T, setup._kkt_parts(z)[0], rcond=None)[0]
    m, k = z.size, lam.size
    for _ in range(maxit):
        grad, H, C = setup._kkt_parts(z)
        G = setup.constraint_jacobian(z)
        r = np.concatenate([grad - G.T @ lam, setup.constraints(z)])
        if np.max(np.abs(r)) < tol:
            break
        K = np.zeros((m + k, m + k))
        K[:m, :m] = H - np.einsum("k,kij->ij", lam, C)
        K[:m, m:] = -G.T
        K[m:, :m] = G
        step = np.linalg.solve(K, -r)
        z = z + step[:m]
        lam = lam + step[m:]
    return z


def hessian_index(setup: Setup, point, step: float = HESSIAN_STEP, zero_band: float = ZERO_BAND) -> tuple[int, np.ndarray]:
    """Morse index from a central-difference Hessian of value o project in a tangent basis."""
    z = np.asarray(point, dtype=float)
    V = setup.tangent_basis(z)
    k = V.shape[1]

    def f(u):
        return setup.value(setup.project(z + V @ u))

    H = np.zeros((k, k))
    E = np.eye(k) * step
    for i in range(k):
        for j in range(i, k):
            H[i, j] = H[j, i] = (f(E[i] + E[j]) - f(E[i] - E[j]) - f(E[j] - E[i]) + f(-E[i] - E[j])) / (4 * step * step)
    eig = np.linalg.eigvalsh(H)
    if np.any(np.abs(eig) < zero_band):
        raise HessianDegenerate(f"Hessian eigenvalue within {zero_band} of zero: {eig}")
    return int(np.sum(eig < 0)), eig


def critical_points(setup: Setup) -> list[CriticalPoint]:
    """Critical points refined by Newton from perturbed seeds, with numeric indices."""
    out = []
    for k, (label, exact, _) in enumerate(setup.seeds()):
        nudge = 0.05 * np.cos(np.arange(exact.size) + k)
        z = _newton_kkt(setup, exact + nudge)
        if np.linalg.norm(z - exact) > 1e-6:
            raise NoConvergence(f"Newton from the {label} seed converged elsewhere")
        index, _ = hessian_index(setup, z)
        out.append(CriticalPoint(label=label, point=z, value=setup.value(z), index=index))
    return out


def critical_points_psi(n: int, a: float) -> list[CriticalPoint]:
    if a <= 1:
        raise InputError("the index pattern needs a > 1")
    return critical_points(EmbeddedMorseSetup(n=n, a=a))


# ---------------------------------------------------------------------------
# covering


def covering_map(s) -> np.ndarray:
    """Phi: S^3 -> S*S^2."""
    s = np.asarray(s, dtype=float)
    if abs(s @ s - 1.0) > 1e-9:
        raise ConstraintViolated(f"|s| = {np.linalg.norm(s)} is not 1")
    s1, s2, s3, s4 = s
    return np.array(
        [
            s1 * s1 + s2 * s2 - s3 * s3 - s4 * s4,
            2 * (s2 * s3 + s1 * s4),
            2 * (s1 * s3 - s2 * s4),
            2 * (s2 * s3 - s1 * s4),
            s1 * s1 + s3 * s3 - s2 * s2 - s4 * s4,
            -2 * (s1 * s2 + s3 * s4),
        ]
    )


def covering_jacobian(s) -> np.ndarray:
    s1, s2, s3, s4 = np.asarray(s, dtype=float)
    return 2 * np.array(
        [
            [s1, s2, -s3, -s4],
            [s4, s3, s2, s1],
            [s3, -s4, s1, -s2],
            [-s4, s3, s2, -s1],
            [s1, -s2, s3, -s4],
            [-s2, -s1, -s4, -s3],
        ]
    )


def s3_frame(s) -> np.ndarray:
    """Orthonormal frame v_1, v_2, v_3 of T_s S^3 as columns."""
    s1, s2, s3, s4 = np.asarray(s, dtype=float)
    return np.array([[s2, -s1, -s4, s3], [-s3, -s4, s1, s2], [-s4, s3, -s2, s1]]).T


@dataclass(frozen=True)
class CoveringReport:
    samples: int
    max_constraint_residual: float
    max_antipodal_error: float
    frame_norms: tuple[float, float, float]
    max_frame_norm_error: float
    max_frame_orthogonality: float
    max_value_error: float  # |psi o Phi - f|
    max_gradient_error: float  # |DPhi grad f - grad_g psi|
    max_reflection_error: float  # |Phi o r - r o Phi|

    @property
    def ok(self) -> bool:
        return max(
            self.max_constraint_residual,
            self.max_antipodal_error,
            self.max_frame_norm_error,
            self.max_frame_orthogonality,
            self.max_value_error,
            self.max_gradient_error,
            self.max_reflection_error,
        ) < 1e-9


def check_covering(samples: int = 1000, seed: int = 0, a: float = 2.0) -> CoveringReport:
    rng = np.random.default_rng(seed)
    s3 = S3FlowSetup.from_a(a)
    ss = EmbeddedMorseSetup(n=3, a=a)
    want = np.array([2.0, 2.0, 2.0 * math.sqrt(2.0)])
    res = anti = norm_err = orth = val = grad = refl = 0.0
    norms = np.zeros(3)
    for _ in range(samples):
        s = rng.normal(size=4)
        s /= np.linalg.norm(s)
        z = covering_map(s)
        res = max(res, ss.residual(z))
        anti = max(anti, float(np.max(np.abs(covering_map(-s) - z))))
        W = covering_jacobian(s) @ s3_frame(s)
        gram = W.T @ W
        nrm = np.sqrt(np.diag(gram))
        norms += nrm
        norm_err = max(norm_err, float(np.max(np.abs(nrm - want))))
        orth = max(orth, float(np.max(np.abs(gram - np.diag(np.diag(gram))))))
        val = max(val, abs(ss.value(z) - s3.value(s)))
        grad = max(grad, float(np.max(np.abs(covering_jacobian(s) @ s3.gradient(s) - ss.gradient(z)))))
        refl = max(refl, float(np.max(np.abs(covering_map(s3.reflect(s)) - ss.reflect(z)))))
    return CoveringReport(
        samples=samples,
        max_constraint_residual=res,
        max_antipodal_error=anti,
        frame_norms=tuple(float(x) for x in norms / samples),
        max_frame_norm_error=norm_err,
        max_frame_orthogonality=orth,
        max_value_error=val,
        max_gradient_error=grad,
        max_reflection_error=refl,
    )


# ---------------------------------------------------------------------------
# flows


@dataclass
class FlowTrajectory:
    times: np.ndarray
    points: np.ndarray
    values: np.ndarray
    limit: str | None
    limit_distance: float
    converged: bool
    constraint_residual: float
    lyapunov_residual: float  # min over steps of the increase of sign * value

    def to_csv(self, setup: Setup | None = None) -> str:
        buf = io.StringIO()
        m = self.points.shape[1]
        cols = ["t"] + [f"p{k}" for k in range(m)] + ["value"]
        F = None
        if isinstance(setup, EmbeddedMorseSetup):
            cols.append("F")
            F = setup.lyapunov(self.points)
        buf.write(",".join(cols) + "\n")
        for i, t in enumerate(self.times):
            row = [t, *self.points[i], self.values[i]] + ([F[i]] if F is not None else [])
            buf.write(",".join(f"{v:.12g}" for v in row) + "\n")
        return buf.getvalue()


def _nearest(setup: Setup, crit: Sequence[CriticalPoint], z) -> tuple[str, float]:
    d = [float(np.linalg.norm(z - c.point)) for c in crit]
    k = int(np.argmin(d))
    return crit[k].label, d[k]


_CRIT_CACHE: dict = {}


def _crit(setup: Setup) -> list[CriticalPoint]:
    if setup not in _CRIT_CACHE:
        _CRIT_CACHE[setup] = critical_points(setup)
    return _CRIT_CACHE[setup]


def integrate_flow(
    setup: Setup,
    start,
    direction: str = "forward",
    step: float = 0.02,
    T_max: float = 200.0,
    gtol: float = 1e-10,
) -> FlowTrajectory:
    """RK4 for z' = +-grad value with re-projection after every step."""
    if direction not in ("forward", "backward"):
        raise InputError(f"direction must be forward or backward, got {direction!r}")
    if step <= 0 or T_max <= 0:
        raise InputError("step and T_max must be positive")
    z0 = np.asarray(start, dtype=float)
    if z0.shape != (setup.ambient_dim,):
        raise InputError(f"start must have {setup.ambient_dim} coordinates")
    if setup.residual(z0) > 1e-6:
        raise ConstraintViolated(f"start is off the manifold (residual {setup.residual(z0):.2e})")
    sign = 1.0 if direction == "forward" else -1.0
    nmax = int(math.ceil(T_max / step))
    points, converged = setup._flow(z0, step, nmax, sign, gtol)
    end = points[-1]
    if not converged and np.linalg.norm(setup.gradient(end)) > 1e-6:
        raise NoConvergence(f"T_max={T_max} reached with |grad| = {np.linalg.norm(setup.gradient(end)):.2e}")
    vals = setup.values(points)
    label, dist = _nearest(setup, _crit(setup), end)
    res = max(setup.residual(p) for p in points[:: max(1, len(points) // 200)])
    res = max(res, setup.residual(end))
    inc = np.diff(sign * vals)
    return FlowTrajectory(
        times=step * np.arange(len(points)),
        points=points,
        values=vals,
        limit=label if dist < 1e-6 else None,
        limit_distance=dist,
        converged=bool(converged),
        constraint_residual=float(res),
        lyapunov_residual=float(inc.min()) if inc.size else 0.0,
    )


def energy_defect(setup: Setup, traj: FlowTrajectory) -> float:
    """|f(end) - f(start) - int |grad f|^2 dt| for the round S^3 metric."""
    if not isinstance(setup, S3FlowSetup):
        raise InputError("the energy identity is checked on the round S^3 only")
    g2 = np.array([np.sum(setup.gradient(p) ** 2) for p in traj.points])
    sign = 1.0 if traj.values[-1] >= traj.values[0] else -1.0
    integral = float(simpson(g2, x=traj.times)) if len(g2) > 2 else 0.0
    return abs(sign * (traj.values[-1] - traj.values[0]) - integral)


def predicted_limit_s3(s, direction: str = "forward") -> str:
    """Sign rule: forward flow goes to c_k^{sign s_k} for the largest k with s_k != 0."""
    s = np.asarray(s, dtype=float)
    order = range(3, -1, -1) if direction == "forward" else range(4)
    for k in order:
        if s[k] != 0:
            return f"c{k + 1}{'+' if s[k] > 0 else '-'}"
    raise InputError("zero vector")


# ---------------------------------------------------------------------------
# connecting orbits


@dataclass(frozen=True)
class ConnectingOrbit:
    source: str
    target: str
    midpoint: np.ndarray = field(repr=False)  # point on the orbit at the middle value


@dataclass(frozen=True)
class ConnectingCount:
    source: tuple[str, ...]
    target: tuple[str, ...]
    count: int
    projected: int | None  # after Phi, for S^3 setups
    orbits: tuple[ConnectingOrbit, ...] = field(repr=False)


def _members(setup: Setup, label: str) -> list[CriticalPoint]:
    crit = _crit(setup)
    hit = [c for c in crit if c.label == label]
    if not hit and isinstance(setup, S3FlowSetup):
        hit = [c for c in crit if c.label[:-1] == label]
    if not hit:
        raise InputError(f"unknown critical point {label!r}; known: {[c.label for c in crit]}")
    return hit


def _flow_jacobian(setup: Setup, z: np.ndarray, h: float = 1e-6) -> tuple[np.ndarray, np.ndarray]:
    V = setup.tangent_basis(z)
    cols = [(setup.gradient(setup.project(z + h * v)) - setup.gradient(setup.project(z - h * v))) / (2 * h) for v in V.T]
    return V, V.T @ np.array(cols).T


def _unstable_directions(setup: Setup, z: np.ndarray) -> np.ndarray:
    """Unstable eigendirections of the linearised flow, slowest first."""
    V, J = _flow_jacobian(setup, z)
    w, U = np.linalg.eig(J)
    w, U = w.real, U.real
    keep = np.argsort(w)
    keep = [k for k in keep if w[k] > ZERO_BAND]
    dirs = V @ U[:, keep]
    return dirs / np.linalg.norm(dirs, axis=0)


@dataclass(frozen=True)
class _Visit:
    """First critical ball entered after leaving the source, and from where."""

    label: str | None
    direction: np.ndarray | None = field(repr=False)
    traj: np.ndarray = field(repr=False)

    def same(self, other: "_Visit") -> bool:
        if self.label != other.label:
            return False
        if self.direction is None or other.direction is None:
            return True
        return float(np.linalg.norm(self.direction - other.direction)) < 1.0


def _first_visit(crit, traj: np.ndarray, source: str, radius: float) -> _Visit:
    P = np.array([c.point for c in crit])
    d = np.linalg.norm(traj[:, None, :] - P[None, :, :], axis=2)
    src = [k for k, c in enumerate(crit) if c.label == source][0]
    out = np.nonzero(d[:, src] > radius)[0]
    start = int(out[0]) if out.size else len(traj)
    for i in range(start, len(traj)):
        near = np.nonzero(d[i] < radius)[0]
        if near.size:
            k = int(near[0])
            v = traj[i] - P[k]
            return _Visit(crit[k].label, v / np.linalg.norm(v), traj)
    return _Visit(None, None, traj)


def _midpoint(setup, traj: np.ndarray, level: float) -> np.ndarray:
    vals = setup.values(traj)
    k = int(np.argmin(np.abs(vals - level)))
    return traj[k]


def count_connecting(
    setup: Setup,
    source: str,
    target: str,
    samples: int = 16,
    eps: float = 1e-3,
    radius: float = 1e-2,
    step: float = 0.02,
    T_max: float = 200.0,
) -> ConnectingCount:
    """Count flow lines between critical points of consecutive index by shooting.

    Seeds sit on an eps-circle spanned by the two slowest unstable directions
    of each source point (or on the eps-0-sphere if only one direction is
    unstable).  Each seed is labelled by the first critical ball it enters
    and the side it enters from; labels jump across separatrices, which are
    located by bisection.  Every maximal run of target labels around the
    circle is one orbit.
    """
    src = _members(setup, source)
    tgt = _members(setup, target)
    is_s3 = isinstance(setup, S3FlowSetup)
    if {c.label for c in src} == {c.label for c in tgt}:
        return ConnectingCount(tuple(c.label for c in src), tuple(c.label for c in tgt), 0, 0 if is_s3 else None, ())
    if src[0].value > tgt[0].value:
        src, tgt = tgt, src
    if tgt[0].index - src[0].index != 1:
        raise InputError("count_connecting needs critical points of consecutive index; use intersection_check")
    crit = _crit(setup)
    tlabels = {c.label for c in tgt}
    level = 0.5 * (src[0].value + tgt[0].value)
    nmax = int(math.ceil(T_max / step))
    orbits: list[ConnectingOrbit] = []

    def shoot(z0, sname) -> _Visit:
        traj, _ = setup._flow(setup.project(z0), step, nmax, 1.0, 1e-10)
        return _first_visit(crit, traj, sname, radius)

    for s in src:
        U = _unstable_directions(setup, s.point)
        if U.shape[1] == 1:
            for sgn in (1.0, -1.0):
                hit = shoot(s.point + sgn * eps * U[:, 0], s.label)
                if hit.label in tlabels:
                    orbits.append(ConnectingOrbit(s.label, hit.label, _midpoint(setup, hit.traj, level)))
            continue
        u, v = U[:, 0], U[:, 1]

        def seed(th, s=s, u=u, v=v):
            return s.point + eps * (math.cos(th) * u + math.sin(th) * v)

        thetas = [2 * math.pi * (k + 0.5) / samples for k in range(samples)]
        shots = [shoot(seed(t), s.label) for t in thetas]
        ring: list[_Visit] = []
        for k in range(samples):
            lo_hit, hi_hit = shots[k], shots[(k + 1) % samples]
            ring.append(lo_hit)
            if lo_hit.same(hi_hit) or lo_hit.label in tlabels or hi_hit.label in tlabels:
                continue
            lo, hi = thetas[k], thetas[k] + 2 * math.pi / samples
            found = None
            for _ in range(60):
                mid = 0.5 * (lo + hi)
                hit = shoot(seed(mid), s.label)
                if hit.same(lo_hit):
                    lo = mid
                elif hit.same(hi_hit):
                    hi = mid
                else:
                    found = hit
                    break
            if found is None:
                raise ClusteringAmbiguous(f"separatrix between {lo_hit.label} and {hi_hit.label} from {s.label} not resolved")
            ring.append(found)
        m = len(ring)
        if all(h.label in tlabels for h in ring):
            raise ClusteringAmbiguous(f"every seed from {s.label} reaches the target")
        for k in range(m):
            h = ring[k]
            if h.label in tlabels and not h.same(ring[k - 1]):
                orbits.append(ConnectingOrbit(s.label, h.label, _midpoint(setup, h.traj, level)))

    projected = None
    if is_s3:
        images: list[np.ndarray] = []
        for o in orbits:
            z = covering_map(o.midpoint / np.linalg.norm(o.midpoint))
            dists = [float(np.linalg.norm(z - w)) for w in images]
            if dists and min(dists) < 0.05:
                continue
            if dists and min(dists) < 0.2:
                raise ClusteringAmbiguous("projected orbits neither coincide nor separate")
            images.append(z)
        projected = len(images)
    return ConnectingCount(
        source=tuple(c.label for c in src),
        target=tuple(c.label for c in tgt),
        count=len(orbits),
        projected=projected,
        orbits=tuple(orbits),
    )


@dataclass(frozen=True)
class IntersectionReport:
    source: str
    target: str
    expected_dim: int
    samples: int
    consistent: int  # samples whose forward and backward limits match
    transversal: bool


def intersection_check(setup: S3FlowSetup, source: str, target: str, samples: int = 20, seed: int = 0) -> IntersectionReport:
    """Sample the explicit set W^u(source) cap W^s(target) on S^3 and flow both ways.

    With c_i = +-e_i, W^u(c_i^s) = {s_1..s_{i-1} = 0, sign s_i = s} and
    W^s(c_j^t) = {s_{j+1}.. = 0, sign s_j = t}.
    """
    if not isinstance(setup, S3FlowSetup):
        raise InputError("explicit invariant sets are known on S^3 only")
    (src,) = _members(setup, source)
    (tgt,) = _members(setup, target)
    if src.value > tgt.value:
        src, tgt = tgt, src
    i, j = src.index, tgt.index
    si = 1.0 if src.label.endswith("+") else -1.0
    sj = 1.0 if tgt.label.endswith("+") else -1.0
    rng = np.random.default_rng(seed)
    ok = 0
    for _ in range(samples):
        s = np.zeros(4)
        s[i : j + 1] = rng.normal(size=j - i + 1)
        s[i] = si * abs(s[i])
        s[j] = sj * abs(s[j])
        s /= np.linalg.norm(s)
        fwd = integrate_flow(setup, s, "forward")
        bwd = integrate_flow(setup, s, "backward")
        ok += fwd.limit == tgt.label and bwd.limit == src.label
    # T W^u = span(e_i..e_4) cap T_s S^3, T W^s = span(e_1..e_j) cap T_s S^3
    s = np.zeros(4)
    s[i] = si
    s[j] = sj
    s /= np.linalg.norm(s)
    P = np.eye(4) - np.outer(s, s)
    Tu = P @ np.eye(4)[:, i:]
    Ts = P @ np.eye(4)[:, : j + 1]
    transversal = np.linalg.matrix_rank(np.hstack([Tu, Ts]), tol=1e-9) == 3
    return IntersectionReport(src.label, tgt.label, j - i, samples, ok, bool(transversal))


# ---------------------------------------------------------------------------
# Lyapunov function and homology


@dataclass(frozen=True)
class LyapunovReport:
    min_delta: float
    total_increase: float
    monotone: bool
    strict: bool  # every step with a non-negligible gradient increases F
    in_U0: bool


def lyapunov_check(traj: FlowTrajectory, setup: EmbeddedMorseSetup, tol: float = 1e-6) -> LyapunovReport:
    if not isinstance(setup, EmbeddedMorseSetup):
        raise InputError("the Lyapunov function lives on S*S^(n-1)")
    F = setup.lyapunov(traj.points)
    dF = np.diff(F)
    n = setup.n
    off = np.concatenate([traj.points[:, 2:n], traj.points[:, n + 2 :]], axis=1)
    in_U0 = bool(off.size == 0 or np.max(np.abs(off)) < 1e-12)
    min_delta = float(dF.min()) if dF.size else 0.0
    if min_delta < -tol:
        raise MonotonicityViolated(f"F decreased by {-min_delta:.3e} in one step")
    g = np.array([np.linalg.norm(setup.gradient(p)) for p in traj.points[:-1]])
    live = g > 1e-3
    strict = bool(dF.size and live.any() and np.all(dF[live] > 0))
    return LyapunovReport(
        min_delta=min_delta,
        total_increase=float(F[-1] - F[0]),
        monotone=True,
        strict=strict,
        in_U0=in_U0,
    )


def _morse_triple(n: int, numeric: bool) -> FloerTriple:
    setup = EmbeddedMorseSetup(n=n, a=2.0)
    crit = critical_points(setup)
    boundary = []
    for x in crit:
        for y in crit:
            if x.index - y.index != 1:
                continue
            # two orbits per consecutive pair, living in U_0
            m = count_connecting(setup, y.label, x.label).count if numeric else 2
            boundary.append((x.label, y.label, m % 2))
    gens = [(c.label, c.value, c.index) for c in crit]
    return FloerTriple.build(gens, boundary)


def morse_homology_counts(n: int, numeric: bool = False) -> dict[int, int]:
    """Z2 Morse homology of psi on S*S^{n-1}, degree -> dimension."""
    if n < 2:
        raise InputError("need n >= 2")
    if numeric and n > 3:
        raise InputError("numeric orbit counts are implemented for n <= 3")
    triple = _morse_triple(n, numeric)
    hom = homology_window(triple, -math.inf, math.inf)
    return {d: k for d, k in sorted(hom.dims_by_degree.items()) if k}
