"""Graded, action-filtered Rabinowitz-Floer chain models of Brieskorn manifolds.

Generators are the Z2 homology classes of the critical manifolds
N^{L pi/2} (a perfect Morse function is assumed on each, which the reduction
to level homologies licenses), graded by ``brieskorn.mu_index`` and filtered
by the period L pi / 2.  L = 0 contributes the homology of Sigma_a itself.

The boundary is never computed.  Each pair of classes in adjacent degrees
gets a policy tag, in order of precedence:

* ``forced_zero_action``: the target has larger period than the source,
  impossible since the boundary lowers the action;
* ``forced_zero_perfect_morse``: both lie on the same critical manifold;
* ``assumed_zero_symmetry``: the pair touches a degree inside a window where
  the symmetry argument for (2,2,2,...) tuples proves vanishing;
* ``unknown``.

Per-degree bounds follow from the term rank of the non-zero pattern.  Only
degrees whose neighbours are fully generated inside the window |L| <= L_max
(the coverage certificate) get an exact value.
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import maximum_flow

from . import brieskorn as bk
from .errors import DegreeInForbiddenWindow, InputError, NotExact

FORCED_ACTION = "forced_zero_action"
FORCED_MORSE = "forced_zero_perfect_morse"
SYMMETRY = "assumed_zero_symmetry"
UNKNOWN = "unknown"

_BIG = 10**6  # capacity standing in for an unknown multiplicity


@dataclass(frozen=True)
class GeneratorClass:
    L: int
    j: int  # homology degree on N^{L pi/2}
    degree: int
    multiplicity: int | None  # Z2 rank of H_j(N), None if unknown

    @property
    def action(self) -> float:
        return self.L * math.pi / 2.0

    @property
    def label(self) -> str:
        return f"{self.L}g{self.j}"


@dataclass(frozen=True)
class PairPolicy:
    source: GeneratorClass  # degree d + 1
    target: GeneratorClass  # degree d
    rule: str


@dataclass
class RFHChainModel:
    a: bk.BrieskornTuple
    L_max: int
    classes: list[GeneratorClass]
    by_degree: dict = field(repr=False)
    windows: list[tuple[float, float]] = field(repr=False)

    @property
    def n(self) -> int:
        return self.a.n

    @property
    def s(self) -> Fraction:
        return bk.regime(self.a).s

    def count(self, degree: int) -> int | None:
        """Total multiplicity in a degree, None if some class is unknown."""
        total = 0
        for c in self.by_degree.get(degree, ()):
            if c.multiplicity is None:
                return None
            total += c.multiplicity
        return total

    def has_classes(self, degree: int) -> bool:
        return any(c.multiplicity != 0 for c in self.by_degree.get(degree, ()))

    def in_window(self, degree: int) -> bool:
        return any(lo <= degree <= hi for lo, hi in self.windows)

    def covered(self, degree: int) -> bool:
        """Every generator of this degree has |L| <= L_max."""
        s = self.s
        if s == 0:
            return True
        reach = 2 * abs(s) * (self.L_max + 1)
        return -reach + 3 * self.n + 2 <= degree < reach - (self.n - 1)

    def covered_range(self) -> tuple[int, int] | None:
        """Largest integer interval of covered degrees."""
        if self.s == 0:
            return None
        reach = 2 * abs(self.s) * (self.L_max + 1)
        lo = math.ceil(-reach + 3 * self.n + 2)
        hi = math.ceil(reach - (self.n - 1)) - 1
        return (lo, hi) if lo <= hi else (0, -1)

    def policy(self, source: GeneratorClass, target: GeneratorClass) -> str:
        if target.L > source.L:
            return FORCED_ACTION
        if target.L == source.L:
            return FORCED_MORSE
        if self.in_window(source.degree) or self.in_window(target.degree):
            return SYMMETRY
        return UNKNOWN

    def pairs(self, degree: int) -> list[PairPolicy]:
        """Policies for all pairs from degree + 1 down to degree."""
        return [
            PairPolicy(x, y, self.policy(x, y))
            for x in self.by_degree.get(degree + 1, ())
            for y in self.by_degree.get(degree, ())
        ]


# ---------------------------------------------------------------------------
# symmetry windows


def _family_hypothesis(a: Sequence[int]) -> bool:
    """a = (2,2,2,a_3,...,a_n) with a_k > 2 for k >= 3."""
    s = sorted(a)
    return len(s) >= 4 and s[:3] == [2, 2, 2] and all(x > 2 for x in s[3:])


def symmetry_windows(a, degree_span: tuple[int, int]) -> list[tuple[float, float]]:
    """Degree windows where the vanishing of the boundary is proved."""
    s = sorted(bk.as_tuple(a).a)
    n = len(s) - 1
    if s == [2, 2, 2]:
        return [(-math.inf, math.inf)]
    if not _family_hypothesis(s):
        return []
    a3 = s[3]
    windows = [(n + 2, a3 + n - 5), (-a3 - n + 6, -n - 1)]
    if len(s) == 4 and a3 % 2 == 0:
        period = a3 + 2  # 2l + 2
        lo, hi = degree_span
        for N in range(math.floor(lo / period) - 1, math.ceil(hi / period) + 1):
            windows.append((N * period + 5, (N + 1) * period - 4))
    return [(lo, hi) for lo, hi in windows if lo <= hi]


# ---------------------------------------------------------------------------
# model


def chain_model(a, L_max: int) -> RFHChainModel:
    a = bk.as_tuple(a)
    if L_max < 0:
        raise InputError("L_max must be non-negative")
    classes = []
    for L in range(-L_max, L_max + 1):
        N = bk.critical_manifold(a, L)
        if not N.nonempty:
            continue
        ranks = bk.critical_homology(N.subtuple)
        for j, r in sorted(ranks.items()):
            if r == 0:
                continue
            classes.append(GeneratorClass(L=L, j=j, degree=bk.mu_index(a, L, j), multiplicity=r))
    by_degree: dict[int, list[GeneratorClass]] = defaultdict(list)
    for c in classes:
        by_degree[c.degree].append(c)
    span = (min(by_degree, default=0) - 1, max(by_degree, default=0) + 1)
    return RFHChainModel(a=a, L_max=L_max, classes=classes, by_degree=dict(by_degree), windows=symmetry_windows(a, span))


def _term_rank(pairs: Sequence[PairPolicy]) -> int:
    """Largest possible rank of a boundary supported on the non-zero pairs."""
    live = [p for p in pairs if p.rule == UNKNOWN]
    if not live:
        return 0
    src = sorted({p.source for p in live}, key=lambda c: (c.L, c.j))
    tgt = sorted({p.target for p in live}, key=lambda c: (c.L, c.j))
    si = {c: 1 + k for k, c in enumerate(src)}
    ti = {c: 1 + len(src) + k for k, c in enumerate(tgt)}
    sink = 1 + len(src) + len(tgt)
    size = sink + 1
    cap = np.zeros((size, size), dtype=np.int32)
    for c, k in si.items():
        cap[0, k] = _BIG if c.multiplicity is None else c.multiplicity
    for c, k in ti.items():
        cap[k, sink] = _BIG if c.multiplicity is None else c.multiplicity
    for p in live:
        cap[si[p.source], ti[p.target]] = _BIG
    return int(maximum_flow(csr_matrix(cap), 0, sink).flow_value)


# ---------------------------------------------------------------------------
# tables


@dataclass(frozen=True)
class TableEntry:
    degree: int
    kind: str  # exact | at_least | infinite | unknown
    value: int | None = None
    lo: int | None = None
    hi: int | None = None
    slope: Fraction | None = None
    rules: tuple[str, ...] = ()
    note: str = ""

    def interval(self) -> tuple[float, float]:
        if self.kind == "exact":
            return (self.value, self.value)
        if self.kind == "infinite":
            return (math.inf, math.inf)
        if self.kind == "at_least":
            return (self.lo, math.inf if self.hi is None else self.hi)
        return (0, math.inf)

    def as_dict(self) -> dict:
        out = {"degree": self.degree, "kind": self.kind}
        if self.kind == "exact":
            out["value"] = self.value
        elif self.kind == "at_least":
            out["lo"] = self.lo
            out["hi"] = self.hi
        elif self.kind == "infinite":
            out["slope"] = str(self.slope)
        out["rules"] = list(self.rules)
        if self.note:
            out["note"] = self.note
        return out

    def __str__(self) -> str:
        if self.kind == "exact":
            return str(self.value)
        if self.kind == "infinite":
            return "inf"
        if self.kind == "at_least":
            return f"[{self.lo},{'?' if self.hi is None else self.hi}]"
        return "?"


@dataclass(frozen=True)
class RFHTable:
    a: tuple[int, ...]
    entries: dict

    def __getitem__(self, degree: int) -> TableEntry:
        return self.entries[degree]

    @property
    def degrees(self) -> list[int]:
        return sorted(self.entries)

    def as_dict(self) -> dict:
        return {"tuple": list(self.a), "degrees": [self.entries[d].as_dict() for d in self.degrees]}

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["degree", "kind", "value", "lo", "hi", "slope", "rules"])
        for d in self.degrees:
            e = self.entries[d]
            w.writerow([d, e.kind, e.value, e.lo, e.hi, e.slope, ";".join(e.rules)])
        return buf.getvalue()


def _bounded_entry(model: RFHChainModel, d: int) -> TableEntry:
    n = model.n
    if d < -n + 1 or d > n:
        return TableEntry(d, "exact", value=0, rules=("index_bound",))
    if not model.has_classes(d):
        c = model.count(d)
        if c == 0:
            return TableEntry(d, "exact", value=0, rules=("no_generators",))
    if model.has_classes(d) and not model.has_classes(d - 1) and not model.has_classes(d + 1):
        if all(model.count(k) == 0 for k in (d - 1, d + 1)):
            period = model.a.lcm
            per = sum(
                c.multiplicity or 0 for c in model.by_degree.get(d, ()) if 0 < c.L <= period
            )
            return TableEntry(
                d, "infinite", slope=Fraction(per, period), rules=("isolated_degree",),
                note="no classes in adjacent degrees for any period",
            )
    return TableEntry(d, "unknown", rules=(UNKNOWN,), note="boundary not determined")


def rfh_entry(model: RFHChainModel, d: int) -> TableEntry:
    if model.s == 0:
        return _bounded_entry(model, d)
    if not all(model.covered(k) for k in (d - 1, d, d + 1)):
        return TableEntry(d, "unknown", rules=("uncovered",), note="raise L_max to cover this degree")
    c = model.count(d)
    out_pairs = model.pairs(d - 1)
    in_pairs = model.pairs(d)
    rules = tuple(sorted({p.rule for p in out_pairs + in_pairs}))
    if c is None:
        return TableEntry(d, "unknown", rules=rules, note="unknown multiplicity")
    if c == 0:
        return TableEntry(d, "exact", value=0, rules=rules or ("no_generators",))
    r = _term_rank(out_pairs) + _term_rank(in_pairs)
    if r == 0:
        return TableEntry(d, "exact", value=c, rules=rules)
    return TableEntry(d, "at_least", lo=max(0, c - r), hi=c, rules=rules)


def default_degrees(model: RFHChainModel) -> range:
    if model.s == 0:
        return range(-model.n - 2, model.n + 4)
    lo, hi = model.covered_range()
    return range(lo + 1, hi)


def rfh_dims(model: RFHChainModel, degrees: Iterable[int] | None = None) -> RFHTable:
    degrees = default_degrees(model) if degrees is None else degrees
    return RFHTable(a=model.a.a, entries={int(d): rfh_entry(model, int(d)) for d in degrees})


def L_max_for(a, degree_lo: int, degree_hi: int) -> int:
    """Smallest L_max whose coverage certificate includes [degree_lo - 1, degree_hi + 1]."""
    a = bk.as_tuple(a)
    s = abs(bk.regime(a).s)
    n = a.n
    if s == 0:
        return a.lcm
    need_hi = (degree_hi + 2 + (n - 1)) / (2 * s)
    need_lo = (3 * n + 2 - (degree_lo - 1)) / (2 * s)
    return max(1, math.ceil(max(need_hi, need_lo)))


def sstar_s2_table(degree_lo: int = -20, degree_hi: int = 20) -> RFHTable:
    """RFH of S*S^2 = Sigma_(2,2,2)."""
    model = chain_model((2, 2, 2), L_max_for((2, 2, 2), degree_lo, degree_hi))
    return rfh_dims(model, range(degree_lo, degree_hi + 1))


# ---------------------------------------------------------------------------
# growth


@dataclass(frozen=True)
class GrowthReport:
    sign: str
    f_class: str
    degree: int | None
    cutoffs: tuple[float, ...]
    counts: tuple[int, ...]
    gamma: float
    exact: bool
    shape: str


def census(model: RFHChainModel, sign: str, degree: int | None = None, N_max: int | None = None):
    """Cumulative class counts with period in (0, N A pi/2] (or [-N A pi/2, 0)), A = lcm(a)."""
    if sign not in ("+", "-"):
        raise InputError("sign must be '+' or '-'")
    A = model.a.lcm
    top = model.L_max // A
    N_max = top if N_max is None else min(N_max, top)
    if N_max < 1:
        raise InputError(f"L_max={model.L_max} is below one period lcm(a)={A}")
    pool = model.classes if degree is None else model.by_degree.get(degree, [])
    cutoffs, counts = [], []
    for N in range(1, N_max + 1):
        if sign == "+":
            k = sum(c.multiplicity or 0 for c in pool if 0 < c.L <= N * A)
        else:
            k = sum(c.multiplicity or 0 for c in pool if -N * A <= c.L < 0)
        cutoffs.append(N * A * math.pi / 2.0)
        counts.append(k)
    return cutoffs, counts


def growth_from_counts(cutoffs: Sequence[float], counts: Sequence[float], f_class: str) -> tuple[float, bool, str]:
    """Gamma = limsup (f^{-1} o log)(d) / log(a) along the cutoff sequence.

    Returns (gamma, exact, shape).  Exact values are reported for vanishing,
    eventually constant and exactly linear counts; otherwise the tail maximum
    of the ratio sequence estimates the limsup.
    """
    if f_class not in ("id", "log", "exp"):
        raise InputError("f_class must be one of id, log, exp")
    a = np.asarray(cutoffs, dtype=float)
    d = np.asarray(counts, dtype=float)
    if len(a) < 2:
        raise InputError("need at least two cutoffs")
    if np.any(np.diff(d) < 0):
        raise InputError("counts must be non-decreasing")
    if not d.any():
        return -math.inf, True, "zero"
    if d[-1] == d[len(d) // 2] and d[-1] > 0:
        return 0.0, True, "bounded"
    ratio = d / a
    if np.allclose(ratio, ratio[0], rtol=1e-12, atol=0.0):
        return {"id": 1.0, "log": math.inf, "exp": 0.0}[f_class], True, "linear"
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        logd = np.log(np.where(d > 0, d, np.nan))
        # local exponents of d against a; unbounded growth means superpolynomial
        k = np.diff(logd) / np.diff(np.log(a))
        if f_class == "id":
            vals = logd / np.log(a)
        elif f_class == "log":
            vals = np.exp(logd) / np.log(a)
        else:
            vals = np.log(logd) / np.log(a)
    k_tail = k[len(k) // 2 :]
    superpoly = (
        k_tail.size >= 2
        and np.all(np.isfinite(k_tail))
        and np.all(np.diff(k_tail) > 0)
        and k_tail[-1] >= 1.5 * k_tail[0] > 0
    )
    if superpoly and f_class in ("id", "log"):
        return math.inf, False, "superpolynomial"
    tail = vals[len(vals) // 2 :]
    tail = tail[np.isfinite(tail)]
    if tail.size == 0:
        return math.inf, False, "superpolynomial"
    return float(np.max(tail)), False, "superpolynomial" if superpoly else "estimated"


def growth_rate(model: RFHChainModel, sign: str, f_class: str = "id", degree: int | None = None) -> GrowthReport:
    cutoffs, counts = census(model, sign, degree)
    gamma, exact, shape = growth_from_counts(cutoffs, counts, f_class)
    return GrowthReport(sign, f_class, degree, tuple(cutoffs), tuple(counts), gamma, exact, shape)


# ---------------------------------------------------------------------------
# bookkeeping across manifolds


def connected_sum_dims(tables: Sequence[RFHTable], m: int, degrees: Iterable[int] | None = None) -> RFHTable:
    """b_k(base) + m * sum_i b_k(summand_i) at degrees outside [-n+1, n].

    ``tables[0]`` is the base manifold, the remaining tables are summands
    attached m times each.
    """
    if not tables:
        raise InputError("need at least the base table")
    if m < 0:
        raise InputError("m must be non-negative")
    base = tables[0]
    n = len(base.a) - 1
    if degrees is None:
        common = set(base.entries)
        for t in tables[1:]:
            common &= set(t.entries)
        degrees = sorted(k for k in common if k < -n + 1 or k > n)
    entries = {}
    for k in degrees:
        if -n + 1 <= k <= n:
            raise DegreeInForbiddenWindow(f"degree {k} lies in [{-n + 1}, {n}]")
        values = []
        for t in tables:
            e = t.entries.get(k)
            if e is None or e.kind != "exact":
                raise NotExact(f"table for {t.a} is not exact at degree {k}")
            values.append(e.value)
        entries[k] = TableEntry(k, "exact", value=values[0] + m * sum(values[1:]), rules=("connected_sum",))
    return RFHTable(a=base.a, entries=entries)


@dataclass(frozen=True)
class Witness:
    degree: int
    first: TableEntry
    second: TableEntry


def _sigma_l(a: Sequence[int]) -> int | None:
    s = sorted(a)
    if len(s) == 4 and s[:3] == [2, 2, 2] and s[3] % 2 == 0:
        return s[3] // 2
    return None


def distinguish(a1, a2, search: int | None = None) -> Witness | None:
    """A degree where the two tables certainly differ, or None."""
    t1, t2 = bk.as_tuple(a1), bk.as_tuple(a2)
    if sorted(t1.a) == sorted(t2.a):
        return None
    search = search if search is not None else max(40, 4 * max(t1.a + t2.a) + 8)
    candidates: list[int] = []
    ls = [l for l in (_sigma_l(t1.a), _sigma_l(t2.a)) if l is not None]
    if ls:
        l = min(ls)
        candidates += [(2 * l + 2) - 1, 2 * (2 * l + 2) - 1]
    for t in (t1, t2):
        for lo, hi in symmetry_windows(t, (-search, search)):
            if math.isfinite(lo) and math.isfinite(hi) and lo >= 0:
                candidates += list(range(int(lo), int(hi) + 1))
    for t in (t1, t2):
        for lo, hi in symmetry_windows(t, (-search, search)):
            if math.isfinite(lo) and math.isfinite(hi) and hi < 0:
                candidates += list(range(int(hi), int(lo) - 1, -1))
    for k in range(search + 1):
        candidates += [k, -k] if k else [0]
    candidates = [d for d in dict.fromkeys(candidates) if -search <= d <= search]
    models = [chain_model(t, L_max_for(t, -search, search)) for t in (t1, t2)]
    for d in candidates:
        e1, e2 = rfh_entry(models[0], d), rfh_entry(models[1], d)
        (lo1, hi1), (lo2, hi2) = e1.interval(), e2.interval()
        if hi1 < lo2 or hi2 < lo1:
            return Witness(d, e1, e2)
    return None
