"""Time the hot kernels under both backends.

Each backend runs in its own interpreter because the choice is made at import
time from BRIESKORN_RFH_BACKEND.  The numba numbers exclude compilation (one
warm-up call per kernel before timing).

    python benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys

WORKER = r"""
import json, sys, timeit
import numpy as np
from brieskorn_rfh import _accel, cz_index

repeat = int(sys.argv[1])
rng = np.random.default_rng(0)
A = np.array([0.5, 2.0, 4.5, 6.5])
s0 = rng.normal(size=4); s0 /= np.linalg.norm(s0)
za = np.array([2.0, 0, 0, 0, 1.0, 0])
z0 = np.array([0.6, 0.8, 0, 0, 0, 1.0])
M = (rng.random((120, 160)) < 0.3).astype(np.uint8)
spec = cz_index.parse_block_spec("rot:1 T=62.83")
J = cz_index.standard_j(1)
omegas = np.array([cz_index._magnus_omega(spec, J, t, 0.01) for t in np.arange(0, 62.83, 0.01)])

cases = {
    "s3_flow": lambda: _accel.s3_flow(A, s0, 0.02, 5000, 1.0, 1e-10),
    "sstar_flow": lambda: _accel.sstar_flow(za, z0, 3, 0.02, 5000, 1.0, 1e-10, True),
    "gf2_rref": lambda: _accel.gf2_rref(M),
    "propagate": lambda: _accel.propagate(omegas, J, 1e-12),
}
out = {"backend": _accel.BACKEND}
for name, fn in cases.items():
    fn()
    out[name] = min(timeit.repeat(fn, number=1, repeat=repeat))
print(json.dumps(out))
"""


def run(backend: str, repeat: int) -> dict:
    env = dict(os.environ, BRIESKORN_RFH_BACKEND=backend)
    done = subprocess.run([sys.executable, "-c", WORKER, str(repeat)], env=env, capture_output=True, text=True, check=True)
    return json.loads(done.stdout)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    rows = {b: run(b, args.repeat) for b in ("numba", "numpy")}
    print(f"{'kernel':<12}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name in ("s3_flow", "sstar_flow", "gf2_rref", "propagate"):
        fast, slow = rows["numba"][name], rows["numpy"][name]
        print(f"{name:<12}{fast:>12.4f}{slow:>12.4f}{slow / fast:>10.1f}")


if __name__ == "__main__":
    main()
