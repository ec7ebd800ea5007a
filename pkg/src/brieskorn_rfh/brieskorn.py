"""Exact combinatorics of Brieskorn manifolds.

Sigma_a is the link of z_0^{a_0} + ... + z_n^{a_n} = 0 in the unit sphere of
C^{n+1}, a (2n-1)-manifold.  The Reeb flow of its standard contact form
rotates z_k with speed 4/a_k, so the orbits of period eta = L pi / 2 fill the
critical manifold N^eta = {z in Sigma_a : z_k = 0 unless a_k | L}, itself the
Brieskorn manifold of the sub-tuple a(L).

Everything here is integer or rational arithmetic except the two numerical
cross-checks ``mu_cz_oracle`` and ``verify_mb``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from typing import Iterable

import numpy as np

from . import cz_index
from .errors import (
    DimensionTooLow,
    EmptyCriticalManifold,
    IndexOutOfRange,
    InputError,
    UnsupportedCriticalManifold,
)


def _ceil_div(p: int, q: int) -> int:
    return -(-p // q)


@dataclass(frozen=True)
class BrieskornTuple:
    """Exponents (a_0, ..., a_n); Sigma_a has dimension 2n - 1."""

    a: tuple[int, ...]

    def __init__(self, a: Iterable[int]):
        values = tuple(int(x) for x in a)
        if len(values) < 2:
            raise InputError("a Brieskorn tuple needs at least two exponents")
        if any(x < 2 for x in values):
            raise InputError(f"exponents must be >= 2, got {values}")
        object.__setattr__(self, "a", values)

    @classmethod
    def parse(cls, text: str) -> "BrieskornTuple":
        try:
            values = [int(x) for x in text.replace(" ", "").strip("()").split(",")]
        except ValueError as exc:
            raise InputError(f"cannot parse tuple {text!r}") from exc
        return cls(values)

    @property
    def n(self) -> int:
        return len(self.a) - 1

    @property
    def dim(self) -> int:
        return 2 * self.n - 1

    @property
    def lcm(self) -> int:
        return math.lcm(*self.a)

    def __len__(self) -> int:
        return len(self.a)

    def __iter__(self):
        return iter(self.a)

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.a)) + ")"


def as_tuple(a) -> BrieskornTuple:
    return a if isinstance(a, BrieskornTuple) else BrieskornTuple(a)


@dataclass(frozen=True)
class CriticalManifold:
    L: int
    subtuple: tuple[int, ...]

    @property
    def count(self) -> int:
        return len(self.subtuple)

    @property
    def nonempty(self) -> bool:
        # points of a Brieskorn manifold have at least two nonzero coordinates
        return self.count >= 2

    @property
    def dim(self) -> int:
        return 2 * self.count - 3 if self.nonempty else -1

    @property
    def period(self) -> float:
        return self.L * math.pi / 2.0


def critical_manifold(a, L: int) -> CriticalManifold:
    """N^{L pi/2}; L = 0 gives the whole manifold (constant orbits)."""
    a = as_tuple(a)
    return CriticalManifold(L=int(L), subtuple=tuple(x for x in a.a if L % x == 0))


def spectrum(a, L_max: int) -> list[int]:
    """Sorted nonzero L with |L| <= L_max and N^{L pi/2} nonempty."""
    a = as_tuple(a)
    if L_max < 0:
        raise InputError("L_max must be non-negative")
    positive = [L for L in range(1, L_max + 1) if critical_manifold(a, L).nonempty]
    return [-L for L in reversed(positive)] + positive


def mu_index(a, L: int, ind_h: int) -> int:
    """RFH degree of a generator of Morse index ind_h on N^{L pi/2}."""
    a = as_tuple(a)
    N = critical_manifold(a, L)
    if not N.nonempty:
        raise EmptyCriticalManifold(f"N^(L pi/2) is empty for a={a}, L={L}")
    if not 0 <= ind_h <= N.dim:
        raise IndexOutOfRange(f"ind_h={ind_h} outside [0, {N.dim}]")
    return 2 * sum(_ceil_div(L, x) for x in a.a) - 2 * L + ind_h - (a.n - 1)


def mu_cz_closed(a, L: int) -> int:
    """sum_k (floor(L/a_k) + ceil(L/a_k)) - 2L."""
    a = as_tuple(a)
    return sum(L // x + _ceil_div(L, x) for x in a.a) - 2 * L


def linearized_path(a, L: int) -> cz_index.SymplecticPathSpec:
    """diag(e^{4it/a_k}) on [0, |L| pi/2], run backwards for negative L."""
    a = as_tuple(a)
    if L == 0:
        raise InputError("the linearized Reeb path needs L != 0")
    sign = 1 if L > 0 else -1
    blocks = [cz_index.rotation(sign * 4.0 / x) for x in a.a]
    return cz_index.SymplecticPathSpec.from_blocks(blocks, abs(L) * math.pi / 2.0)


def mu_cz_oracle(a, L: int, tol: cz_index.Tolerances = cz_index.DEFAULT_TOL) -> int:
    """Numeric index of the linearized Reeb path minus the 2L of the xi-complement."""
    a = as_tuple(a)
    if not critical_manifold(a, L).nonempty:
        raise EmptyCriticalManifold(f"N^(L pi/2) is empty for a={a}, L={L}")
    res = cz_index.cz_index(linearized_path(a, L), tol)
    if not res.is_integer:
        raise cz_index.DegenerateCrossing(f"half-integer index {res.mu_cz} for a closed orbit path")
    return res.mu2 // 2 - 2 * L


@dataclass(frozen=True)
class RegimeReport:
    s: Fraction
    regime: str
    A: int
    D_bounds: tuple[int, int]


def regime(a) -> RegimeReport:
    a = as_tuple(a)
    s = sum(Fraction(1, x) for x in a.a) - 1
    if s > 0:
        kind = "index_positive"
    elif s < 0:
        kind = "index_negative"
    else:
        kind = "index_bounded"
    A = math.prod(a.a)
    return RegimeReport(s=s, regime=kind, A=A, D_bounds=(-2 * A - a.n, 2 * a.n * A + a.n))


def isolated_vertices(a) -> list[int]:
    """Indices k with gcd(a_k, a_j) = 1 for every j != k."""
    a = as_tuple(a)
    return [
        k
        for k, x in enumerate(a.a)
        if all(math.gcd(x, y) == 1 for j, y in enumerate(a.a) if j != k)
    ]


def condition_o(a) -> bool:
    """The even exponents K: |K| odd and gcd(a_j, a_k) = 2 for all j != k in K."""
    even = [x for x in as_tuple(a).a if x % 2 == 0]
    return len(even) % 2 == 1 and all(math.gcd(x, y) == 2 for x, y in combinations(even, 2))


def is_topological_sphere(a) -> bool:
    """Brieskorn's graph criterion; only meaningful in dimension >= 5."""
    a = as_tuple(a)
    if a.n < 3:
        raise DimensionTooLow(f"the graph criterion needs n >= 3, got n={a.n}")
    iso = isolated_vertices(a)
    return len(iso) >= 2 or (len(iso) == 1 and condition_o(a))


def _is_sigma_l(a: tuple[int, ...]) -> bool:
    return len(a) == 4 and sorted(a)[:3] == [2, 2, 2] and sorted(a)[3] % 2 == 0


@dataclass(frozen=True)
class HomologySupport:
    degrees: tuple[int, ...]
    ranks: dict  # degree -> int or None (unknown)


def homology_support(a) -> HomologySupport:
    """Z2 ranks of H_*(Sigma_a); middle ranks stay None unless known."""
    a = as_tuple(a)
    n = a.n
    if n < 2:
        raise InputError("homology_support needs n >= 2")
    degrees = tuple(sorted({0, n - 1, n, 2 * n - 1}))
    ranks = {d: None for d in degrees}
    ranks[0] = ranks[2 * n - 1] = 1
    if sorted(a.a) == [2, 2, 2]:
        ranks.update({1: 1, 2: 1})
    elif _is_sigma_l(a.a):
        ranks.update({2: 1, 3: 1})
    elif n >= 3 and is_topological_sphere(a):
        ranks.update({n - 1: 0, n: 0})
    return HomologySupport(degrees=degrees, ranks=ranks)


def critical_homology(subtuple: tuple[int, ...]) -> dict[int, int | None]:
    """Z2 Betti numbers of a critical manifold Sigma_{a(L)} from a closed whitelist.

    Ranks of None mark middle degrees we cannot compute (only allowed for
    full tuples with sum 1/a_k = 1).  Anything else raises.
    """
    sub = tuple(subtuple)
    if len(sub) < 2:
        raise EmptyCriticalManifold("empty critical manifold has no homology")
    if len(sub) == 2:
        g = math.gcd(*sub)  # disjoint union of g circles
        return {0: g, 1: g}
    a = BrieskornTuple(sub)
    n = a.n
    if sorted(sub) == [2, 2, 2]:
        return {0: 1, 1: 1, 2: 1, 3: 1}
    if _is_sigma_l(sub):
        return {0: 1, 1: 0, 2: 1, 3: 1, 4: 0, 5: 1}
    if n >= 3 and is_topological_sphere(a):
        return {j: (1 if j in (0, 2 * n - 1) else 0) for j in range(2 * n)}
    if regime(a).regime == "index_bounded":
        return {j: (1 if j in (0, 2 * n - 1) else (None if j in (n - 1, n) else 0)) for j in range(2 * n)}
    raise UnsupportedCriticalManifold(f"no homology oracle for Sigma_{a}")


def verify_mb(a, L: int, tol: float = 1e-9) -> bool:
    """dim ker(D phi^{L pi/2} - 1) on C^{n+1} equals 2 n(a, L)."""
    a = as_tuple(a)
    N = critical_manifold(a, L)
    if not N.nonempty:
        return True
    m = len(a.a)
    D = np.zeros((2 * m, 2 * m))
    for k, x in enumerate(a.a):
        th = 2.0 * math.pi * L / x
        D[2 * k : 2 * k + 2, 2 * k : 2 * k + 2] = [[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]]
    sv = np.linalg.svd(D - np.eye(2 * m), compute_uv=False)
    return int(np.sum(sv < tol)) == 2 * N.count
