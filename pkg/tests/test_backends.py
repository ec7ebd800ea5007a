import json
import os
import subprocess
import sys

import numpy as np
import pytest

from brieskorn_rfh import _accel

SCRIPT = """
import json
import numpy as np
from brieskorn_rfh import _accel, cz_index, gf2, morse_flow as mf

rng = np.random.default_rng(1)
M = (rng.random((9, 14)) < 0.4).astype(np.uint8)
setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
traj = mf.integrate_flow(setup, setup.project(rng.normal(size=6)))
s3 = mf.S3FlowSetup.from_a(2.0)
print(json.dumps({
    "backend": _accel.BACKEND,
    "mu2": [cz_index.cz_index(cz_index.parse_block_spec(s)).mu2 for s in ("rot:1 T=20", "rot:-2 T=7", "hyp T=5")],
    "rref": gf2.rref(M)[0].tolist(),
    "limit": traj.limit,
    "end": traj.points[-1].tolist(),
    "count": mf.count_connecting(s3, "c2", "c3").count,
}))
"""


def run_backend(name):
    env = dict(os.environ, BRIESKORN_RFH_BACKEND=name)
    done = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(done.stdout)


def test_backends_agree():
    fast, slow = run_backend("numba"), run_backend("numpy")
    assert fast["backend"] == "numba" and slow["backend"] == "numpy"
    for key in ("mu2", "rref", "limit", "count"):
        assert fast[key] == slow[key]
    assert np.allclose(fast["end"], slow["end"], atol=1e-10)


def test_bad_backend_value():
    env = dict(os.environ, BRIESKORN_RFH_BACKEND="fortran")
    done = subprocess.run([sys.executable, "-c", "import brieskorn_rfh._accel"], env=env, capture_output=True, text=True)
    assert done.returncode != 0 and "BRIESKORN_RFH_BACKEND" in done.stderr


@pytest.mark.skipif(_accel.BACKEND != "numba", reason="compiled backend not active")
def test_compiled_kernels_match_python():
    rng = np.random.default_rng(4)
    A = rng.normal(size=(4, 4)) * 0.3
    assert np.allclose(_accel.expm_small(A), _accel.PY_KERNELS["expm_small"](A), atol=1e-14)
    M = (rng.random((6, 8)) < 0.5).astype(np.uint8)
    for got, want in zip(_accel.gf2_rref(M), _accel.PY_KERNELS["gf2_rref"](M)):
        assert np.array_equal(got, want)
    s = rng.normal(size=4)
    s /= np.linalg.norm(s)
    A4 = np.array([0.5, 2.5, 4.5, 6.5])
    assert np.allclose(_accel.s3_gradient(A4, s), _accel.PY_KERNELS["s3_gradient"](A4, s), atol=1e-14)
