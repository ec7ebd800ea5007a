"""Independent reference computations used by several test modules."""

import numpy as np


def rank_gf2(M) -> int:
    """Rank over GF(2) by xor-elimination on Python integer bitmasks."""
    rows = [int("".join(str(int(v) & 1) for v in row), 2) if len(row) else 0 for row in np.asarray(M)]
    rank = 0
    while rows:
        pivot = rows.pop()
        if pivot == 0:
            continue
        rank += 1
        top = pivot.bit_length() - 1
        rows = [r ^ pivot if (r >> top) & 1 else r for r in rows]
    return rank


def window_homology(triple, a, b) -> dict:
    """dim H_d of the subquotient complex {a <= f <= b}, degree by degree."""
    idx = [k for k, f in enumerate(triple.action) if a <= f <= b]
    D = np.asarray(triple.D, dtype=np.int64)[np.ix_(idx, idx)] & 1
    deg = [triple.degree[k] for k in idx]
    out = {}
    for d in sorted(set(deg)):
        cd = [i for i, x in enumerate(deg) if x == d]
        lo = [i for i, x in enumerate(deg) if x == d - 1]
        hi = [i for i, x in enumerate(deg) if x == d + 1]
        r_out = rank_gf2(D[np.ix_(lo, cd)]) if lo else 0
        r_in = rank_gf2(D[np.ix_(cd, hi)]) if hi else 0
        h = len(cd) - r_out - r_in
        if h:
            out[d] = h
    return out
