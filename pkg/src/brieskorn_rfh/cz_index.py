"""Robbin-Salamon Conley-Zehnder index of paths of symplectic matrices.

A path is given by its symmetric generator S(t): Psi' = J0 S(t) Psi, Psi(0) = 1,
with J0 the block-diagonal complex structure built from [[0, -1], [1, 0]] on
each coordinate pair (x_k, y_k).  The numeric engine integrates the path with
a fourth order Magnus scheme (every step is the exponential of a Hamiltonian
matrix, hence symplectic up to rounding), locates the times where
det(1 - Psi) vanishes, and sums signatures of the crossing forms.

Half-integers are carried exactly as an integer numerator over 2.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import _accel
from .errors import (
    BoundViolated,
    DegenerateCrossing,
    InputError,
    NonSymmetricGenerator,
    SymplecticDriftExceeded,
    UnresolvedCrossingCluster,
    Unsupported,
)

J2 = np.array([[0.0, -1.0], [1.0, 0.0]])
_SQRT3 = math.sqrt(3.0)


def standard_j(n: int) -> np.ndarray:
    """J0 on R^{2n} in the coordinate order (x1, y1, x2, y2, ...)."""
    return np.kron(np.eye(n), J2)


@dataclass(frozen=True)
class Tolerances:
    det: float = 1e-9
    kernel: float = 1e-7
    refine: float = 1e-12
    zero_band: float = 1e-8
    drift: float = 1e-8
    reproject: float = 1e-12

    def __post_init__(self):
        for name in ("det", "kernel", "refine", "zero_band", "drift", "reproject"):
            if not getattr(self, name) > 0:
                raise InputError(f"tolerance {name} must be positive")


DEFAULT_TOL = Tolerances()


# ---------------------------------------------------------------------------
# path specifications


@dataclass(frozen=True)
class Block:
    """A 2x2 block of a block-diagonal generator."""

    kind: str
    omega: float = 0.0
    rate: float | Callable[[float], float] = 1.0
    matrix: Callable[[float], np.ndarray] | None = None

    def generator(self, t: float) -> np.ndarray:
        if self.kind == "rotation":
            return self.omega * np.eye(2)
        if self.kind == "hyperbolic":
            r = self.rate(t) if callable(self.rate) else self.rate
            return -r * np.array([[0.0, 1.0], [1.0, 0.0]])
        return np.asarray(self.matrix(t), dtype=float)

    @property
    def constant_rate(self) -> bool:
        return self.kind == "rotation" or (self.kind == "hyperbolic" and not callable(self.rate))


def rotation(omega: float) -> Block:
    return Block("rotation", omega=float(omega))


def hyperbolic(rate: float | Callable[[float], float] = 1.0) -> Block:
    """Block with Psi = diag(e^rho, e^-rho); ``rate`` is rho'(t)."""
    return Block("hyperbolic", rate=rate)


def general(matrix: Callable[[float], np.ndarray] | np.ndarray) -> Block:
    if not callable(matrix):
        const = np.asarray(matrix, dtype=float)
        return Block("general", matrix=lambda t, m=const: m)
    return Block("general", matrix=matrix)


@dataclass(frozen=True)
class SymplecticPathSpec:
    """Path on [0, T] given either by ``blocks`` or by a callable ``generator``."""

    dim: int
    T: float
    blocks: tuple[Block, ...] | None = None
    generator: Callable[[float], np.ndarray] | None = None
    epsilon: float = 0.0

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise InputError("dim must be a positive even integer")
        if not self.T > 0:
            raise InputError("T must be positive")
        if (self.blocks is None) == (self.generator is None):
            raise InputError("give exactly one of blocks or generator")
        if self.blocks is not None and 2 * len(self.blocks) != self.dim:
            raise InputError("block count does not match dim")

    @classmethod
    def from_blocks(cls, blocks: Sequence[Block], T: float) -> "SymplecticPathSpec":
        return cls(dim=2 * len(blocks), T=float(T), blocks=tuple(blocks))

    @property
    def n(self) -> int:
        return self.dim // 2

    def S(self, t: float) -> np.ndarray:
        if self.blocks is not None:
            out = np.zeros((self.dim, self.dim))
            for k, block in enumerate(self.blocks):
                out[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = block.generator(t)
        else:
            out = np.array(self.generator(t), dtype=float)
        if self.epsilon:
            out = out + self.epsilon * np.eye(self.dim)
        return out

    def with_T(self, T: float) -> "SymplecticPathSpec":
        return replace(self, T=float(T))

    def perturbed(self, epsilon: float) -> "SymplecticPathSpec":
        """S(t) -> S(t) + epsilon * 1, the caller-controlled regularisation."""
        return replace(self, epsilon=self.epsilon + float(epsilon))

    def direct_sum(self, other: "SymplecticPathSpec") -> "SymplecticPathSpec":
        if self.blocks is not None and other.blocks is not None and not (self.epsilon or other.epsilon):
            return SymplecticPathSpec.from_blocks(self.blocks + other.blocks, self.T)
        a, b = self, other

        def gen(t):
            out = np.zeros((a.dim + b.dim, a.dim + b.dim))
            out[: a.dim, : a.dim] = a.S(t)
            out[a.dim :, a.dim :] = b.S(t)
            return out

        return SymplecticPathSpec(dim=a.dim + b.dim, T=self.T, generator=gen)

    def conjugated(self, phi0: np.ndarray) -> "SymplecticPathSpec":
        """Generator of phi0 Psi phi0^{-1}, namely phi0^{-T} S phi0^{-1}."""
        inv = np.linalg.inv(phi0)
        base = self

        def gen(t):
            return inv.T @ base.S(t) @ inv

        return SymplecticPathSpec(dim=self.dim, T=self.T, generator=gen)


def parse_block_spec(text: str) -> SymplecticPathSpec:
    """Parse the block DSL, e.g. ``"rot:1,hyp,rot:-2 T=6.2831853"``.

    Blocks are ``rot:<omega>``, ``hyp`` or ``hyp:<rate>``, and ``mat:<file>``
    (a JSON 2x2 symmetric matrix).  ``T`` accepts a trailing ``pi`` factor.
    """
    import json

    parts = text.split()
    t_parts = [p for p in parts if p.startswith("T=")]
    body = [p for p in parts if not p.startswith("T=")]
    if len(t_parts) != 1 or len(body) != 1:
        raise InputError(f"expected '<blocks> T=<time>', got {text!r}")
    T = _parse_real(t_parts[0][2:])
    blocks = []
    for token in body[0].split(","):
        kind, _, arg = token.partition(":")
        if kind == "rot":
            blocks.append(rotation(_parse_real(arg)))
        elif kind == "hyp":
            blocks.append(hyperbolic(_parse_real(arg) if arg else 1.0))
        elif kind == "mat":
            try:
                with open(arg) as fh:
                    m = np.asarray(json.load(fh), dtype=float)
            except (ValueError, TypeError) as exc:
                raise InputError(f"bad matrix file {arg!r}: {exc}") from exc
            if m.shape != (2, 2):
                raise InputError("matrix blocks must be 2x2")
            blocks.append(general(m))
        else:
            raise InputError(f"unknown block {token!r}")
    return SymplecticPathSpec.from_blocks(blocks, T)


_REAL = re.compile(r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)?\s*(\*?\s*pi)?\s*$")


def _parse_real(text: str) -> float:
    m = _REAL.match(text)
    if not m or (m.group(1) is None and m.group(2) is None):
        raise InputError(f"cannot parse number {text!r}")
    value = float(m.group(1)) if m.group(1) is not None else 1.0
    return value * math.pi if m.group(2) else value


# ---------------------------------------------------------------------------
# integration


def _magnus_omega(spec: SymplecticPathSpec, J: np.ndarray, t0: float, h: float) -> np.ndarray:
    c1 = 0.5 - _SQRT3 / 6.0
    c2 = 0.5 + _SQRT3 / 6.0
    A1 = J @ spec.S(t0 + c1 * h)
    A2 = J @ spec.S(t0 + c2 * h)
    return 0.5 * h * (A1 + A2) + (_SQRT3 / 12.0) * h * h * (A2 @ A1 - A1 @ A2)


def default_grid_size(spec: SymplecticPathSpec, step_norm: float = 0.05) -> int:
    probe = np.linspace(0.0, spec.T, 65)
    smax = max(np.linalg.norm(spec.S(t), 2) for t in probe)
    steps = max(64, math.ceil(spec.T * smax / step_norm))
    return steps + 1


@dataclass
class SampledPath:
    spec: SymplecticPathSpec
    times: np.ndarray
    psi: np.ndarray
    drift: float
    J: np.ndarray = field(repr=False)

    @property
    def h(self) -> float:
        return float(self.times[1] - self.times[0])

    def at(self, t: float) -> np.ndarray:
        """Psi(t) by one Magnus step from the closest sample below t."""
        if t <= 0.0:
            return self.psi[0]
        k = min(int(t / self.h), len(self.times) - 1)
        while k > 0 and self.times[k] > t:
            k -= 1
        dt = t - self.times[k]
        if dt == 0.0:
            return self.psi[k]
        omega = np.ascontiguousarray(_magnus_omega(self.spec, self.J, float(self.times[k]), dt))
        return _accel.expm_small(omega) @ self.psi[k]


def _check_symmetric(S: np.ndarray, t: float) -> None:
    if not np.allclose(S, S.T, rtol=0.0, atol=1e-12 * max(1.0, float(np.abs(S).max()))):
        raise NonSymmetricGenerator(f"S(t) is not symmetric at t={t!r}")


def integrate_path(
    spec: SymplecticPathSpec, grid_size: int | None = None, tol: Tolerances = DEFAULT_TOL
) -> SampledPath:
    """Sample Psi on a uniform grid of ``grid_size`` points over [0, T]."""
    if grid_size is None:
        grid_size = default_grid_size(spec)
    if grid_size < 2:
        raise InputError("grid_size must be at least 2")
    J = standard_j(spec.n)
    times = np.linspace(0.0, spec.T, grid_size)
    h = times[1] - times[0]
    omegas = np.empty((grid_size - 1, spec.dim, spec.dim))
    for k in range(grid_size - 1):
        _check_symmetric(spec.S(times[k]), times[k])
        omegas[k] = _magnus_omega(spec, J, times[k], h)
    _check_symmetric(spec.S(times[-1]), times[-1])
    psi, drift = _accel.propagate(omegas, J, tol.reproject)
    if drift > tol.drift:
        raise SymplecticDriftExceeded(f"symplectic residual {drift:.3e} exceeds {tol.drift:.1e}")
    return SampledPath(spec=spec, times=times, psi=psi, drift=float(drift), J=J)


# ---------------------------------------------------------------------------
# crossings


@dataclass(frozen=True)
class Crossing:
    t: float
    kernel_dim: int
    form: np.ndarray
    signature: int
    eigenvalues: tuple[float, ...]
    regular: bool = True
    kind: str = "interior"

    @property
    def endpoint(self) -> bool:
        return self.kind != "interior"


# Singular values of 1 - Psi that are rounding noise grow with |Psi|, so the
# kernel threshold is kernel_tol, raised by a rounding-aware term for strongly
# hyperbolic paths.  A threshold relative to the largest singular value alone
# would mark O(1) singular values as kernel once |Psi| exceeds 1/kernel_tol.
_ROUNDING_GROWTH = 1e-9


def _kernel_threshold(sv_max: float, tol: Tolerances) -> float:
    return tol.kernel * max(1.0, _ROUNDING_GROWTH * sv_max)


def _kernel_stats(psi: np.ndarray, tol: Tolerances):
    M = np.eye(psi.shape[0]) - psi
    _, sv, vt = np.linalg.svd(M)
    return sv, float(np.linalg.det(M)), vt


def _is_crossing(psi: np.ndarray, tol: Tolerances) -> bool:
    sv, det, _ = _kernel_stats(psi, tol)
    return sv[-1] < _kernel_threshold(sv[0], tol) and abs(det) < tol.det


def crossing_form(
    spec: SymplecticPathSpec,
    path: SampledPath,
    t: float,
    tol: Tolerances = DEFAULT_TOL,
    strict: bool = True,
    kind: str = "interior",
) -> Crossing:
    """Restriction of S(t) to the numerical kernel of 1 - Psi(t)."""
    sv, _, vt = _kernel_stats(path.at(t), tol)
    V = vt[sv < _kernel_threshold(sv[0], tol)].T
    S = spec.S(t)
    form = V.T @ S @ V
    form = 0.5 * (form + form.T)
    eig = np.linalg.eigvalsh(form) if form.size else np.zeros(0)
    band = tol.zero_band * max(1.0, float(np.linalg.norm(S, 2)))
    zero = np.abs(eig) <= band
    if zero.any() and strict:
        raise DegenerateCrossing(f"crossing form at t={t:.12g} has eigenvalues in the zero band: {eig}")
    signature = int(np.sum(eig > band) - np.sum(eig < -band))
    return Crossing(
        t=float(t),
        kernel_dim=V.shape[1],
        form=form,
        signature=signature,
        eigenvalues=tuple(float(e) for e in eig),
        regular=not zero.any(),
        kind=kind,
    )


def _golden_min(fn, lo: float, hi: float, xtol: float) -> float:
    """Golden-section search with an absolute tolerance.

    Brent's bounded method stops at a relative tolerance of order
    sqrt(eps) * |t|, too coarse for crossings far from t = 0.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = float(lo), float(hi)
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            if c <= a or c >= d:
                break
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            if d >= b or d <= c:
                break
            fd = fn(d)
    return c if fc <= fd else d


def find_crossing_times(path: SampledPath, tol: Tolerances = DEFAULT_TOL) -> list[tuple[float, str]]:
    """Crossing times with their kind ("start", "interior", "end"), increasing.

    Candidates are grid-local minima of the smallest singular value of
    1 - Psi that could reach zero within one step; each is refined by an
    absolute-tolerance golden-section search and then tested against the
    kernel and det tolerances.
    """
    T = path.spec.T
    m = path.psi.shape[1]
    M = np.eye(m)[None, :, :] - path.psi
    sv = np.linalg.svd(M, compute_uv=False)
    smin = sv[:, -1]
    det = np.linalg.det(M)
    thresh = tol.kernel * np.maximum(1.0, _ROUNDING_GROWTH * sv[:, 0])
    flagged = (smin < thresh) & (np.abs(det) < tol.det)
    if np.any(flagged[1:] & flagged[:-1]):
        i = int(np.argmax(flagged[1:] & flagged[:-1]))
        raise UnresolvedCrossingCluster(
            f"kernel persists between t={path.times[i]:.6g} and t={path.times[i + 1]:.6g}; "
            "crossings are not separated at grid resolution"
        )
    h = path.h
    n = len(smin)
    # |d/dt smin| <= |Psi'| <= |S| |Psi|
    speed = np.array([np.linalg.norm(path.spec.S(t), 2) for t in path.times]) * np.linalg.norm(
        path.psi, ord=2, axis=(1, 2)
    )
    reach = 2.0 * h * speed + thresh
    minima = [
        i
        for i in range(1, n - 1)
        if smin[i] <= smin[i - 1] and smin[i] <= smin[i + 1] and smin[i] <= reach[i]
    ]

    def objective(t):
        return float(np.linalg.svd(np.eye(m) - path.at(t), compute_uv=False)[-1])

    start = bool(flagged[0])
    end = bool(flagged[-1])
    found: list[tuple[float, str]] = []
    if start:
        found.append((0.0, "start"))
    for i in minima:
        lo, hi = path.times[i - 1], path.times[i + 1]
        t_star = _golden_min(objective, lo, hi, tol.refine)
        if smin[i] < objective(t_star):
            t_star = float(path.times[i])
        if not _is_crossing(path.at(t_star), tol):
            continue
        if (start and t_star < 2 * h) or (end and T - t_star < 2 * h):
            continue
        found.append((t_star, "interior"))
    # a crossing can hide between the last two samples without a grid minimum
    for edge, flag, lo, hi in ((0, start, path.times[0], path.times[1]), (n - 1, end, path.times[-2], path.times[-1])):
        if flag or smin[edge] > reach[edge]:
            continue
        t_star = _golden_min(objective, lo, hi, tol.refine)
        if _is_crossing(path.at(t_star), tol):
            found.append((t_star, "interior"))
    if end:
        found.append((float(T), "end"))
    found.sort()
    merged: list[tuple[float, str]] = []
    for t, kind in found:
        if merged and t - merged[-1][0] < 100 * tol.refine + 1e-14 * T:
            if kind != "interior":
                merged[-1] = (t, kind)
            continue
        if merged and t - merged[-1][0] < h:
            raise UnresolvedCrossingCluster(
                f"crossings at t={merged[-1][0]:.12g} and t={t:.12g} are closer than the grid step"
            )
        merged.append((t, kind))
    return merged


def find_crossings(
    path: SampledPath, tol: Tolerances = DEFAULT_TOL, strict: bool = True
) -> list[Crossing]:
    return [
        crossing_form(path.spec, path, t, tol, strict=strict, kind=kind)
        for t, kind in find_crossing_times(path, tol)
    ]


# ---------------------------------------------------------------------------
# indices


@dataclass(frozen=True)
class IndexResult:
    mu2: int
    mean_index: float | None
    crossings: tuple[Crossing, ...]
    all_regular: bool

    @property
    def mu_cz(self) -> Fraction:
        return Fraction(self.mu2, 2)

    @property
    def is_integer(self) -> bool:
        return self.mu2 % 2 == 0


def _merge_crossings(groups: Sequence[Sequence[Crossing]], T: float) -> list[Crossing]:
    """Combine per-block crossings that happen at the same time."""
    flat = sorted((c for g in groups for c in g), key=lambda c: c.t)
    merged: list[list[Crossing]] = []
    for c in flat:
        if merged and abs(c.t - merged[-1][0].t) <= 1e-9 * max(1.0, T):
            merged[-1].append(c)
        else:
            merged.append([c])
    out = []
    for parts in merged:
        if len(parts) == 1:
            out.append(parts[0])
            continue
        size = sum(p.form.shape[0] for p in parts)
        form = np.zeros((size, size))
        k = 0
        for p in parts:
            d = p.form.shape[0]
            form[k : k + d, k : k + d] = p.form
            k += d
        out.append(
            Crossing(
                t=parts[0].t,
                kernel_dim=sum(p.kernel_dim for p in parts),
                form=form,
                signature=sum(p.signature for p in parts),
                eigenvalues=tuple(sorted(e for p in parts for e in p.eigenvalues)),
                regular=all(p.regular for p in parts),
                kind=parts[0].kind,
            )
        )
    return out


def cz_index(
    spec: SymplecticPathSpec,
    tol: Tolerances = DEFAULT_TOL,
    grid_size: int | None = None,
    strict: bool = True,
) -> IndexResult:
    """mu = sign(start)/2 + sum of interior signatures + sign(end)/2.

    Block generators are split into their 2x2 blocks and the indices added
    (product property); a dense hyperbolic factor would otherwise stretch
    Psi beyond what double precision resolves near the other blocks' kernels.
    """
    if spec.blocks is not None and len(spec.blocks) > 1:
        parts = [
            cz_index(replace(spec, dim=2, blocks=(b,)), tol, grid_size, strict) for b in spec.blocks
        ]
        crossings = _merge_crossings([p.crossings for p in parts], spec.T)
        mu2 = sum(p.mu2 for p in parts)
    else:
        path = integrate_path(spec, grid_size, tol)
        crossings = find_crossings(path, tol, strict=strict)
        mu2 = sum(c.signature if c.endpoint else 2 * c.signature for c in crossings)
    try:
        mean = mean_index(spec)
    except Unsupported:
        mean = None
    return IndexResult(
        mu2=int(mu2),
        mean_index=mean,
        crossings=tuple(crossings),
        all_regular=all(c.regular for c in crossings),
    )


def cz_closed_form(kind: str, T: float) -> Fraction:
    """Index of the model rotation/hyperbolic paths on [0, T]."""
    if not T > 0:
        raise InputError("T must be positive")
    x = T / (2.0 * math.pi)
    turns = math.floor(x) + math.ceil(x)
    if kind == "rot_plus":
        return Fraction(turns)
    if kind == "rot_minus":
        return Fraction(-turns)
    if kind == "hyperbolic":
        return Fraction(0)
    raise InputError(f"unknown closed-form kind {kind!r}")


def mean_index(spec: SymplecticPathSpec) -> float:
    """Mean index over [0, T] for block generators."""
    if spec.blocks is None or spec.epsilon:
        raise Unsupported("mean index is only available for block generators")
    total = 0.0
    for block in spec.blocks:
        if block.kind == "rotation":
            total += block.omega * spec.T / math.pi
        elif block.kind == "hyperbolic":
            continue
        else:
            raise Unsupported("mean index of a general block is not supported")
    return total


@dataclass(frozen=True)
class IterationResult:
    residual: float
    mu_k: Fraction
    delta: float
    k: int
    bound: int


def iteration_check(spec: SymplecticPathSpec, tau: float, k: int, tol: Tolerances = DEFAULT_TOL) -> IterationResult:
    """R = mu([0, k tau]) - k * Delta([0, tau]); raises if |R| > 2n."""
    if k < 1:
        raise InputError("k must be a positive integer")
    if spec.blocks is None or any(not b.constant_rate for b in spec.blocks):
        raise Unsupported("iteration check needs a periodic block generator")
    delta = mean_index(spec.with_T(tau))
    mu = cz_index(spec.with_T(k * tau), tol).mu_cz
    R = float(mu) - k * delta
    bound = 2 * spec.n
    if abs(R) > bound + 1e-9:
        raise BoundViolated(f"|R|={abs(R):.6g} exceeds 2n={bound}")
    return IterationResult(residual=R, mu_k=mu, delta=delta, k=k, bound=bound)


def handle_orbit_index(alpha: float, A: Sequence[float], C_z: float, k: int, n: int) -> int:
    """Sum over j of floor(alpha A_j C_z / 2pi) + ceil(alpha A_j C_z / 2pi)."""
    if not 0 <= k < n:
        raise InputError("need 0 <= k < n")
    if len(A) != n - k:
        raise InputError("A must have length n - k")
    if any(a <= 0 for a in A) or C_z <= 0:
        raise InputError("A_j and C_z must be positive")
    total = 0
    for a_j in A:
        x = alpha * a_j * C_z / (2.0 * math.pi)
        total += math.floor(x) + math.ceil(x)
    return total
