"""Filtered Floer complexes over GF(2) and their reduction to level homologies.

A Floer triple (C, f, m) is a finite set of generators with integer action f
and boundary coefficients m(y, x) in GF(2), read as dx = sum_y m(y, x) y.  The
boundary may only lower (or keep) the action and must square to zero.  The
matrix ``D`` stores m with D[y, x] = m(y, x).

Windows are closed action intervals: FC^b_a is spanned by the generators with
a <= f <= b, with the boundary induced on the subquotient FC^{<=b} / FC^{<a}.

The reduction replaces the generators by bases of the level homologies
FH^b_b and builds the boundary d_red = Phi o delta from the connecting maps of

    FH^{b-1} --iota--> FH^b --pi--> FH^b_b --delta--> FH^{b-1}

together with linear sections rho of pi and j of iota.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import gf2
from .errors import AxiomViolation, InputError, IsomorphismFailed, SectionConstructionFailed

INF = math.inf


# ---------------------------------------------------------------------------
# triples


@dataclass(frozen=True)
class FloerTriple:
    names: tuple[str, ...]
    action: tuple[int, ...]
    D: np.ndarray = field(repr=False)
    degree: tuple[int, ...] | None = None

    def __post_init__(self):
        m = len(self.names)
        if len(set(self.names)) != m:
            raise InputError("generator names must be unique")
        if len(self.action) != m or (self.degree is not None and len(self.degree) != m):
            raise InputError("action/degree lists must match the generators")
        D = gf2.as_gf2(self.D).reshape(m, m) if m else np.zeros((0, 0), dtype=np.uint8)
        D.setflags(write=False)
        object.__setattr__(self, "D", D)
        object.__setattr__(self, "action", tuple(int(x) for x in self.action))
        if self.degree is not None:
            object.__setattr__(self, "degree", tuple(int(x) for x in self.degree))

    @classmethod
    def build(
        cls,
        generators: Sequence[tuple],
        boundary: Iterable[tuple],
    ) -> "FloerTriple":
        """From ``(name, action[, degree])`` records and ``(source, target[, coeff])`` pairs.

        Actions may be any real numbers; they are replaced by their dense
        rank, which keeps the order and makes every level an integer.
        """
        names = [str(g[0]) for g in generators]
        raw = [float(g[1]) for g in generators]
        levels = {v: k for k, v in enumerate(sorted(set(raw)))}
        graded = [len(g) > 2 and g[2] is not None for g in generators]
        if any(graded) and not all(graded):
            raise InputError("either every generator has a degree or none does")
        degree = tuple(int(g[2]) for g in generators) if generators and all(graded) else None
        index = {name: k for k, name in enumerate(names)}
        D = np.zeros((len(names), len(names)), dtype=np.int64)
        for pair in boundary:
            src, tgt = str(pair[0]), str(pair[1])
            coeff = int(pair[2]) if len(pair) > 2 else 1
            if src not in index or tgt not in index:
                raise InputError(f"boundary pair ({src}, {tgt}) names an unknown generator")
            D[index[tgt], index[src]] += coeff
        return cls(tuple(names), tuple(levels[v] for v in raw), D, degree)

    @classmethod
    def from_dict(cls, data: dict) -> "FloerTriple":
        try:
            gens = [(g["name"], g["action"], g.get("degree")) for g in data["generators"]]
            pairs = [(b["source"], b["target"], b.get("coefficient", 1)) for b in data.get("boundary", [])]
        except (KeyError, TypeError) as exc:
            raise InputError(f"malformed triple record: {exc}") from exc
        return cls.build(gens, pairs)

    @classmethod
    def from_json(cls, text: str) -> "FloerTriple":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"triple file is not valid JSON: {exc}") from exc
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        gens = []
        for k, name in enumerate(self.names):
            rec = {"name": name, "action": self.action[k]}
            if self.degree is not None:
                rec["degree"] = self.degree[k]
            gens.append(rec)
        ys, xs = np.nonzero(self.D)
        pairs = sorted((self.names[x], self.names[y]) for y, x in zip(ys, xs))
        return {"generators": gens, "boundary": [{"source": s, "target": t} for s, t in pairs]}

    @property
    def size(self) -> int:
        return len(self.names)

    @property
    def graded(self) -> bool:
        return self.degree is not None

    @property
    def levels(self) -> list[int]:
        return sorted(set(self.action))

    def window(self, a: float = -INF, b: float = INF) -> list[int]:
        return [k for k, f in enumerate(self.action) if a <= f <= b]

    def boundary_of(self, x: str) -> list[str]:
        k = self.names.index(x)
        return [self.names[y] for y in np.nonzero(self.D[:, k])[0]]


def worked_example() -> FloerTriple:
    """Four generators a1, b1, a0, b0 (index = action); mod 2 only d a1 = b0 survives."""
    return FloerTriple.build(
        [("a1", 1, 1), ("b1", 1, 0), ("a0", 0, 1), ("b0", 0, 0)],
        [("a1", "b1", 2), ("a1", "b0", 1), ("a0", "b0", 2)],
    )


def zero_triple(names: Sequence[str], actions: Sequence[int], degrees: Sequence[int] | None = None) -> FloerTriple:
    m = len(names)
    return FloerTriple(tuple(names), tuple(actions), np.zeros((m, m), dtype=np.uint8), None if degrees is None else tuple(degrees))


def random_triple(rng: np.random.Generator, size: int, max_action: int = 5, max_degree: int = 3) -> FloerTriple:
    """D = T D0 T^{-1} with D0 a random pairing and T unipotent, filtered, degree preserving."""
    action = rng.integers(0, max_action + 1, size=size)
    degree = rng.integers(0, max_degree + 1, size=size)
    D0 = np.zeros((size, size), dtype=np.int64)
    free = list(rng.permutation(size))
    for x in list(free):
        if x not in free or rng.random() < 0.3:
            continue
        targets = [y for y in free if y != x and degree[y] == degree[x] - 1 and action[y] <= action[x]]
        if targets:
            y = targets[int(rng.integers(len(targets)))]
            D0[y, x] = 1
            free.remove(x)
            free.remove(y)
    order = np.lexsort((np.arange(size), action))
    rank = np.empty(size, dtype=np.int64)
    rank[order] = np.arange(size)
    T = np.eye(size, dtype=np.int64)
    for i in range(size):
        for j in range(size):
            if rank[i] < rank[j] and degree[i] == degree[j] and action[i] <= action[j] and rng.random() < 0.5:
                T[i, j] = 1
    D = gf2.matmul(gf2.matmul(T, D0), gf2.inverse(T))
    names = tuple(f"g{k}" for k in range(size))
    return FloerTriple(names, tuple(int(a) for a in action), D, tuple(int(d) for d in degree))


# ---------------------------------------------------------------------------
# axioms


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    axiom: str | None = None
    message: str = ""
    witnesses: tuple = ()

    def __str__(self) -> str:
        if self.ok:
            return "valid Floer triple"
        return f"axiom {self.axiom} violated: {self.message} (witnesses {self.witnesses})"


def validate(triple: FloerTriple) -> ValidationReport:
    """Checks action monotonicity (ii), d^2 = 0 (iii) and degree -1 of d.

    Finiteness of each action level (i') holds for any finite generator set.
    """
    D = triple.D
    f = triple.action
    names = triple.names
    for y, x in zip(*np.nonzero(D)):
        if f[y] > f[x]:
            return ValidationReport(
                False, "ii", f"m({names[y]},{names[x]}) != 0 but f({names[y]}) > f({names[x]})", (names[y], names[x])
            )
    DD = gf2.matmul(D, D)
    if DD.any():
        y, x = (int(v[0]) for v in np.nonzero(DD))
        return ValidationReport(False, "iii", f"sum_c m({names[y]},c) m(c,{names[x]}) = 1", (names[y], names[x]))
    if triple.degree is not None:
        deg = triple.degree
        for y, x in zip(*np.nonzero(D)):
            if deg[y] != deg[x] - 1:
                return ValidationReport(
                    False, "grading", f"m({names[y]},{names[x]}) != 0 but degrees {deg[y]}, {deg[x]}", (names[y], names[x])
                )
    return ValidationReport(True)


def _require_valid(triple: FloerTriple) -> None:
    report = validate(triple)
    if not report.ok:
        raise AxiomViolation(report)


# ---------------------------------------------------------------------------
# homology of subquotients


class _Homology:
    """Homology of the subquotient spanned by ``idx`` with a fixed basis.

    ``basis`` columns are homogeneous cycle representatives (in the
    coordinates of ``idx``) that complete a basis of the boundaries to one
    of the cycles; ``coords`` expresses a cycle in that basis.
    """

    def __init__(self, triple: FloerTriple, idx: Sequence[int]):
        self.idx = list(idx)
        self.pos = {g: k for k, g in enumerate(self.idx)}
        k = len(self.idx)
        self.d = triple.D[np.ix_(self.idx, self.idx)] if k else np.zeros((0, 0), dtype=np.uint8)
        if triple.degree is not None:
            gdeg = [triple.degree[g] for g in self.idx]
            groups = {}
            for p, dg in enumerate(gdeg):
                groups.setdefault(dg, []).append(p)
        else:
            gdeg = [0] * k
            groups = {0: list(range(k))} if k else {}
        self.gen_degree = gdeg
        bnd_cols, reps, rep_deg = [], [], []
        for dg in sorted(groups):
            cols = groups[dg]
            Z = np.zeros((k, 0), dtype=np.uint8)
            N = gf2.nullspace(self.d[:, cols])
            if N.shape[1]:
                Z = np.zeros((k, N.shape[1]), dtype=np.uint8)
                Z[cols, :] = N
            if triple.degree is not None:
                above = groups.get(dg + 1, [])
            else:
                above = cols
            B = self.d[:, above] if above else np.zeros((k, 0), dtype=np.uint8)
            B = B[:, gf2.independent_columns(B)] if B.shape[1] else B
            stack = np.concatenate([B, Z], axis=1)
            piv = gf2.independent_columns(stack) if stack.shape[1] else []
            bnd_cols.append(B)
            for p in piv:
                if p >= B.shape[1]:
                    reps.append(stack[:, p])
                    rep_deg.append(dg)
        self.boundaries = np.concatenate(bnd_cols, axis=1) if bnd_cols else np.zeros((k, 0), dtype=np.uint8)
        self.basis = np.stack(reps, axis=1) if reps else np.zeros((k, 0), dtype=np.uint8)
        self.degrees = rep_deg
        self._system = np.concatenate([self.boundaries, self.basis], axis=1)

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    def dims_by_degree(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for dg in self.degrees:
            out[dg] = out.get(dg, 0) + 1
        return out

    def coords(self, z: np.ndarray) -> np.ndarray:
        """Homology coordinates of the cycle z (a vector on ``idx``)."""
        if self.dim == 0 and self.boundaries.shape[1] == 0:
            if gf2.as_gf2(z).any():
                raise SectionConstructionFailed("nonzero chain in an acyclic empty window")
            return np.zeros(0, dtype=np.uint8)
        x = gf2.solve(self._system, z)
        if x is None:
            raise SectionConstructionFailed("chain is not a cycle of the window")
        return x[self.boundaries.shape[1] :]

    def lift(self, c: np.ndarray) -> np.ndarray:
        return gf2.matmul(self.basis, gf2.as_gf2(c).reshape(-1, 1)).reshape(-1) if self.dim else np.zeros(len(self.idx), dtype=np.uint8)

    def embed(self, v: np.ndarray, target: "_Homology") -> np.ndarray:
        """Re-index a chain on ``idx`` to a chain on ``target.idx`` (dropping the rest)."""
        out = np.zeros(len(target.idx), dtype=np.uint8)
        for p, g in enumerate(self.idx):
            if v[p] and g in target.pos:
                out[target.pos[g]] = 1
        return out


def _map_matrix(source: _Homology, target: _Homology, chain_map) -> np.ndarray:
    """Matrix in homology bases of a chain-level map given on representatives."""
    cols = [target.coords(chain_map(source.basis[:, k])) for k in range(source.dim)]
    if not cols:
        return np.zeros((target.dim, 0), dtype=np.uint8)
    return np.stack(cols, axis=1).astype(np.uint8)


class _Triangle:
    """sub --iota--> tot --pi--> quot --delta--> sub for a cut of a window."""

    def __init__(self, triple: FloerTriple, sub: Sequence[int], tot: Sequence[int], quot: Sequence[int]):
        self.triple = triple
        self.sub = _Homology(triple, sub)
        self.tot = _Homology(triple, tot)
        self.quot = _Homology(triple, quot)
        self.iota = _map_matrix(self.sub, self.tot, lambda v: self.sub.embed(v, self.tot))
        self.pi = _map_matrix(self.tot, self.quot, lambda v: self.tot.embed(v, self.quot))
        self.delta = _map_matrix(self.quot, self.sub, self._delta_chain)

    def _delta_chain(self, v: np.ndarray) -> np.ndarray:
        lifted = self.quot.embed(v, self.tot)
        dv = gf2.matmul(self.tot.d, lifted.reshape(-1, 1)).reshape(-1)
        return self.tot.embed(dv, self.sub)


# ---------------------------------------------------------------------------
# windows and exact sequences


@dataclass(frozen=True)
class WindowHomology:
    window: tuple[float, float]
    dim: int
    dims_by_degree: dict
    representatives: tuple[tuple[str, ...], ...]
    chain_dim: int


def homology_window(triple: FloerTriple, a: float = -INF, b: float = INF) -> WindowHomology:
    _require_valid(triple)
    H = _Homology(triple, triple.window(a, b))
    reps = tuple(
        tuple(triple.names[H.idx[p]] for p in np.nonzero(H.basis[:, k])[0]) for k in range(H.dim)
    )
    dims = H.dims_by_degree() if triple.graded else {}
    return WindowHomology(window=(a, b), dim=H.dim, dims_by_degree=dims, representatives=reps, chain_dim=len(H.idx))


@dataclass(frozen=True)
class ExactnessReport:
    exact: bool
    spots: tuple  # (degree or None, spot name, dim ker, rank of incoming map)


def _restrict(M: np.ndarray, rows_deg, cols_deg, r, c) -> np.ndarray:
    ri = [k for k, d in enumerate(rows_deg) if d == r]
    ci = [k for k, d in enumerate(cols_deg) if d == c]
    return M[np.ix_(ri, ci)] if ri and ci else np.zeros((len(ri), len(ci)), dtype=np.uint8)


def les_check(triple: FloerTriple, a: float, b: float, c: float) -> ExactnessReport:
    """Exactness of ... -> H(a<=f<b) -> H(a<=f<=c) -> H(b<=f<=c) -> H(a<=f<b) -> ..."""
    if not a <= b <= c:
        raise InputError("need a <= b <= c")
    _require_valid(triple)
    sub = [k for k, f in enumerate(triple.action) if a <= f < b]
    tot = triple.window(a, c)
    quot = triple.window(b, c)
    tri = _Triangle(triple, sub, tot, quot)
    Hs, Ht, Hq = tri.sub, tri.tot, tri.quot
    spots = []
    if triple.graded:
        degrees = sorted(set(Hs.degrees) | set(Ht.degrees) | set(Hq.degrees))
        degrees = sorted(set(degrees) | {d + 1 for d in degrees} | {d - 1 for d in degrees})
        for d in degrees:
            iota = _restrict(tri.iota, Ht.degrees, Hs.degrees, d, d)
            pi = _restrict(tri.pi, Hq.degrees, Ht.degrees, d, d)
            delta_in = _restrict(tri.delta, Hs.degrees, Hq.degrees, d, d + 1)
            delta_out = _restrict(tri.delta, Hs.degrees, Hq.degrees, d - 1, d)
            spots.append((d, "sub", Hs.degrees.count(d) - gf2.rank(iota), gf2.rank(delta_in)))
            spots.append((d, "tot", Ht.degrees.count(d) - gf2.rank(pi), gf2.rank(iota)))
            spots.append((d, "quot", Hq.degrees.count(d) - gf2.rank(delta_out), gf2.rank(pi)))
    else:
        spots.append((None, "sub", Hs.dim - gf2.rank(tri.iota), gf2.rank(tri.delta)))
        spots.append((None, "tot", Ht.dim - gf2.rank(tri.pi), gf2.rank(tri.iota)))
        spots.append((None, "quot", Hq.dim - gf2.rank(tri.delta), gf2.rank(tri.pi)))
    return ExactnessReport(exact=all(k == r for _, _, k, r in spots), spots=tuple(spots))


@dataclass(frozen=True)
class LadderStep:
    window: tuple[int, int]
    dim: int
    covers_all: bool
    rank_iota: int | None
    rank_pi: int | None


@dataclass(frozen=True)
class LimitResult:
    dim: int
    dims_by_degree: dict
    ladder: tuple[LadderStep, ...]
    stable_from: int
    certified: bool


def limit_homology(triple: FloerTriple, extra_steps: int = 2) -> LimitResult:
    """FH through the windows [c - i, c + i] with their connecting maps.

    Going from [a, b] to [a - 1, b + 1] passes through [a, b + 1]:
    FH^b_a --iota--> FH^{b+1}_a <--pi-- FH^{b+1}_{a-1}.  The value is
    certified once the window covers every generator and both maps are
    isomorphisms for ``extra_steps`` further steps.
    """
    _require_valid(triple)
    if triple.size == 0:
        return LimitResult(0, {}, (LadderStep((0, 0), 0, True, None, None),), 0, True)
    levels = triple.levels
    lo, hi = levels[0], levels[-1]
    centre = int(np.floor(np.median(triple.action)))
    cover = max(centre - lo, hi - centre, 0)
    steps = []
    prev = None
    for i in range(cover + extra_steps + 1):
        a, b = centre - i, centre + i
        H = _Homology(triple, triple.window(a, b))
        r_iota = r_pi = None
        if prev is not None:
            pa, pb = prev
            mid = triple.window(pa, b)
            tri_up = _Triangle(triple, triple.window(pa, pb), mid, [k for k in mid if triple.action[k] > pb])
            r_iota = gf2.rank(tri_up.iota)
            tri_down = _Triangle(triple, [k for k in triple.window(a, b) if triple.action[k] < pa], triple.window(a, b), mid)
            r_pi = gf2.rank(tri_down.pi)
        steps.append(LadderStep((a, b), H.dim, a <= lo and b >= hi, r_iota, r_pi))
        prev = (a, b)
    stable_from = cover
    tail = steps[cover:]
    certified = all(s.dim == tail[0].dim for s in tail) and all(
        s.rank_iota == s.dim and s.rank_pi == s.dim for s in tail[1:]
    )
    full = _Homology(triple, list(range(triple.size)))
    dims = full.dims_by_degree() if triple.graded else {}
    return LimitResult(tail[-1].dim, dims, tuple(steps), stable_from, certified)


# ---------------------------------------------------------------------------
# reduction


@dataclass
class ReductionData:
    triple: FloerTriple
    levels: list[int]
    level_basis: list[np.ndarray]  # per level: columns = cycle reps on that level's generators
    level_index: list[list[int]]  # generator indices of each level
    class_level: list[int]  # reduced basis element -> level position
    class_degree: list[int]  # reduced basis element -> degree (0 if ungraded)
    class_labels: list[str]
    boundary: np.ndarray  # reduced d, boundary[i, j] = coefficient of class i in d(class j)
    connecting: list[np.ndarray]  # per level p: delta from FH at level p to FH^{<= level p-1}
    filtered: list[_Homology] = field(repr=False)  # FH^{<= level}
    triangles: list[_Triangle | None] = field(repr=False)
    prefer: str = "lowest"

    @property
    def size(self) -> int:
        return len(self.class_level)


def _section(M: np.ndarray, v: np.ndarray, prefer: str) -> np.ndarray:
    x = gf2.solve(M, v, prefer=prefer)
    if x is None:
        raise SectionConstructionFailed("no preimage for a class in the image")
    return x


def _class_label(triple: FloerTriple, idx: Sequence[int], rep: np.ndarray) -> str:
    terms = [triple.names[idx[p]] for p in np.nonzero(rep)[0]]
    return "[" + "+".join(terms) + "]"


def build_reduction(triple: FloerTriple, prefer: str = "lowest") -> ReductionData:
    """Reduced complex on the level homologies with d_red = Phi o delta.

    ``prefer`` selects the pivot tie-break used for the sections rho and j.
    """
    if prefer not in ("lowest", "highest"):
        raise InputError("prefer must be 'lowest' or 'highest'")
    _require_valid(triple)
    levels = triple.levels
    level_idx = [[k for k, f in enumerate(triple.action) if f == b] for b in levels]
    filtered = [_Homology(triple, triple.window(-INF, b)) for b in levels]
    triangles: list[_Triangle | None] = []
    for p, b in enumerate(levels):
        sub = triple.window(-INF, levels[p - 1]) if p else []
        triangles.append(_Triangle(triple, sub, triple.window(-INF, b), level_idx[p]))
    level_h = [t.quot for t in triangles]

    offsets = np.cumsum([0] + [h.dim for h in level_h])
    total = int(offsets[-1])
    class_level, class_degree, labels = [], [], []
    for p, h in enumerate(level_h):
        for k in range(h.dim):
            class_level.append(p)
            class_degree.append(h.degrees[k])
            labels.append(_class_label(triple, h.idx, h.basis[:, k]))

    def phi(kappa: np.ndarray, top: int) -> np.ndarray:
        """Phi of a class kappa in K^{top} (coordinates in FH^{<= top})."""
        out = np.zeros(total, dtype=np.uint8)
        sigma = kappa
        for p in range(top, -1, -1):
            tri = triangles[p]
            eta = gf2.matmul(tri.pi, sigma.reshape(-1, 1)).reshape(-1) if tri.tot.dim else np.zeros(tri.quot.dim, dtype=np.uint8)
            out[offsets[p] : offsets[p + 1]] = eta
            rho = _section(tri.pi, eta, prefer) if tri.quot.dim else np.zeros(tri.tot.dim, dtype=np.uint8)
            rest = gf2.as_gf2(sigma.astype(np.int64) + rho)
            if p == 0:
                if rest.any():
                    raise SectionConstructionFailed("residual class below the lowest level")
                break
            sigma = _section(tri.iota, rest, prefer) if rest.any() else np.zeros(tri.sub.dim, dtype=np.uint8)
        return out

    boundary = np.zeros((total, total), dtype=np.uint8)
    for p in range(1, len(levels)):
        tri = triangles[p]
        for k in range(tri.quot.dim):
            kappa = tri.delta[:, k]
            col = offsets[p] + k
            if kappa.any():
                boundary[:, col] = phi(kappa, p - 1)
    if gf2.matmul(boundary, boundary).any():
        raise SectionConstructionFailed("reduced boundary does not square to zero")
    return ReductionData(
        triple=triple,
        levels=levels,
        level_basis=[h.basis for h in level_h],
        level_index=[h.idx for h in level_h],
        class_level=class_level,
        class_degree=class_degree,
        class_labels=labels,
        boundary=boundary,
        connecting=[t.delta for t in triangles],
        filtered=filtered,
        triangles=triangles,
        prefer=prefer,
    )


@dataclass(frozen=True)
class ReducedHomology:
    dim: int
    dims_by_degree: dict
    fh_dim: int
    fh_dims_by_degree: dict
    psi: np.ndarray  # columns: FH coordinates of Psi(reduced homology basis)
    isomorphism: bool
    filtration_preserving: bool


def _psi_chain(red: ReductionData, cycle: np.ndarray) -> np.ndarray:
    """Psi(sum eta^b) = [sum s^b] with [s^b]^b = rho(eta^b), as a chain on all generators."""
    m = red.triple.size
    chain = np.zeros(m, dtype=np.int64)
    start = 0
    for p, tri in enumerate(red.triangles):
        dim = tri.quot.dim
        eta = cycle[start : start + dim]
        start += dim
        if not eta.any():
            continue
        rho = _section(tri.pi, eta, red.prefer)
        rep = tri.tot.lift(rho)
        for q, g in enumerate(tri.tot.idx):
            chain[g] += rep[q]
    return gf2.as_gf2(chain)


def reduced_homology(red: ReductionData) -> ReducedHomology:
    """Homology of (reduced complex, d_red) and the comparison map Psi into FH."""
    triple = red.triple
    names = tuple(f"c{k}" for k in range(red.size))
    levels_of = [red.levels[p] for p in red.class_level]
    graded = triple.graded
    reduced = FloerTriple(names, tuple(levels_of), red.boundary, tuple(red.class_degree) if graded else None)
    H = _Homology(reduced, list(range(red.size)))
    full = _Homology(triple, list(range(triple.size)))
    cols, filt_ok = [], True
    for k in range(H.dim):
        cyc = H.basis[:, k]
        chain = _psi_chain(red, cyc)
        top = max((levels_of[i] for i in np.nonzero(cyc)[0]), default=-INF)
        if any(triple.action[g] > top for g in np.nonzero(chain)[0]):
            filt_ok = False
        cols.append(full.coords(chain))
    psi = np.stack(cols, axis=1).astype(np.uint8) if cols else np.zeros((full.dim, 0), dtype=np.uint8)
    iso = H.dim == full.dim and gf2.rank(psi) == full.dim
    if graded and iso:
        for d in set(H.degrees) | set(full.degrees):
            block = _restrict(psi, full.degrees, H.degrees, d, d)
            if block.shape[0] != block.shape[1] or gf2.rank(block) != block.shape[0]:
                iso = False
        # Psi must not mix degrees
        for i, di in enumerate(full.degrees):
            for j, dj in enumerate(H.degrees):
                if psi[i, j] and di != dj:
                    iso = False
    if not iso:
        raise IsomorphismFailed("Psi is not a degreewise isomorphism onto FH")
    return ReducedHomology(
        dim=H.dim,
        dims_by_degree=H.dims_by_degree() if graded else {},
        fh_dim=full.dim,
        fh_dims_by_degree=full.dims_by_degree() if graded else {},
        psi=psi,
        isomorphism=iso,
        filtration_preserving=filt_ok,
    )


def reduced_boundary_terms(red: ReductionData) -> list[tuple[str, list[str]]]:
    """(class, [classes in its reduced boundary]) for every class with nonzero d_red."""
    out = []
    for j in range(red.size):
        col = red.boundary[:, j]
        if col.any():
            out.append((red.class_labels[j], [red.class_labels[i] for i in np.nonzero(col)[0]]))
    return out
