from types import SimpleNamespace

import numpy as np
import pytest

from brieskorn_rfh import morse_flow as mf
from brieskorn_rfh.errors import ConstraintViolated, HessianDegenerate, InputError, MonotonicityViolated


def expected_points(n, a):
    return {
        "z++": ((1, 1), (a - 1) ** 2 / 2, 0),
        "z+-": ((1, -1), (a - 1) ** 2 / 2 + 2, n - 2),
        "z-+": ((-1, 1), (a + 1) ** 2 / 2, n - 1),
        "z--": ((-1, -1), (a + 1) ** 2 / 2 + 2, 2 * n - 3),
    }


@pytest.mark.parametrize("n, a", [(3, 2.0), (4, 2.0), (3, 3.5), (5, 1.5)])
def test_critical_points(n, a):
    crit = mf.critical_points_psi(n, a)
    want = expected_points(n, a)
    assert len(crit) == 4
    for c in crit:
        (sx, sy), value, index = want[c.label]
        exact = np.zeros(2 * n)
        exact[0], exact[n + 1] = sx, sy
        assert np.linalg.norm(c.point - exact) < 1e-8
        assert c.value == pytest.approx(value, abs=1e-10)
        assert c.index == index


def test_index_pattern_needs_a_above_one():
    with pytest.raises(InputError):
        mf.critical_points_psi(3, 0.5)
    with pytest.raises(InputError):
        mf.EmbeddedMorseSetup(n=3, a=1.0)


def test_hessian_step_halving_keeps_index():
    setup = mf.EmbeddedMorseSetup(n=4, a=2.0)
    for label, z, ind in setup.seeds():
        i1, e1 = mf.hessian_index(setup, z)
        i2, e2 = mf.hessian_index(setup, z, step=mf.HESSIAN_STEP / 2)
        assert i1 == i2 == ind
        assert np.allclose(e1, e2, atol=1e-5)


def test_hessian_degenerate():
    # f = s1^2 + s2^2 + ... on S^3 has a circle of critical points through e1
    base = mf.S3FlowSetup.from_a(2.0)
    flat = SimpleNamespace(
        tangent_basis=base.tangent_basis,
        project=base.project,
        value=lambda s: float(s[0] ** 2 + s[1] ** 2 + 2 * s[2] ** 2 + 3 * s[3] ** 2),
    )
    with pytest.raises(HessianDegenerate):
        mf.hessian_index(flat, np.array([1.0, 0, 0, 0]))


def test_s3_critical_points():
    crit = mf.critical_points(mf.S3FlowSetup.from_a(2.0))
    assert sorted((c.label, c.index) for c in crit) == sorted(
        (f"c{i}{s}", i - 1) for i in range(1, 5) for s in "+-"
    )


def test_covering():
    rep = mf.check_covering(samples=1000, seed=0)
    assert rep.ok
    with pytest.raises(ConstraintViolated):
        mf.covering_map(np.array([1.0, 1.0, 0, 0]))
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    s = mf.S3FlowSetup.from_a(2.0)
    # Phi sends c_i to the critical points of psi and intertwines the reflections
    for (label, z, _), (_, c, _) in zip(setup.seeds(), s.seeds()[::2]):
        assert np.allclose(mf.covering_map(c), z, atol=1e-12), label
    rng = np.random.default_rng(3)
    for _ in range(20):
        v = rng.normal(size=4)
        v /= np.linalg.norm(v)
        assert np.allclose(mf.covering_map(s.reflect(v)), setup.reflect(mf.covering_map(v)), atol=1e-12)
        assert setup.value(mf.covering_map(v)) == pytest.approx(s.value(v), abs=1e-12)


def test_pushforward_gradient_matches_cover():
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    s3 = mf.S3FlowSetup.from_a(2.0)
    rng = np.random.default_rng(5)
    for _ in range(20):
        s = rng.normal(size=4)
        s /= np.linalg.norm(s)
        pushed = mf.covering_jacobian(s) @ s3.gradient(s)
        assert np.allclose(setup.gradient(mf.covering_map(s)), pushed, atol=1e-9)


@pytest.mark.parametrize(
    "s, fwd, bwd",
    [
        ((0.6, 0.0, -0.8, 0.0), "c3-", "c1+"),
        ((0.1, -0.2, 0.3, 0.9), "c4+", "c1+"),
        ((0.0, -0.6, 0.0, -0.8), "c4-", "c2-"),
    ],
)
def test_sign_rule(s, fwd, bwd):
    assert mf.predicted_limit_s3(s) == fwd
    assert mf.predicted_limit_s3(s, "backward") == bwd
    setup = mf.S3FlowSetup.from_a(2.0)
    s = np.array(s) / np.linalg.norm(s)
    assert mf.integrate_flow(setup, s).limit == fwd
    assert mf.integrate_flow(setup, s, "backward").limit == bwd


def test_random_starts_follow_sign_rule():
    setup = mf.S3FlowSetup.from_a(2.0)
    rng = np.random.default_rng(0)
    for _ in range(50):
        s = rng.normal(size=4)
        s /= np.linalg.norm(s)
        traj = mf.integrate_flow(setup, s)
        assert traj.converged and traj.limit == mf.predicted_limit_s3(s)
        assert traj.constraint_residual < 1e-10
        assert traj.lyapunov_residual > -1e-12
        assert mf.energy_defect(setup, traj) < 1e-3


def test_flow_from_critical_point_is_constant():
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    _, z, _ = setup.seeds()[1]
    traj = mf.integrate_flow(setup, z)
    assert traj.limit == "z+-" and np.allclose(traj.points, z)
    rep = mf.lyapunov_check(traj, setup)
    assert rep.total_increase == pytest.approx(0.0, abs=1e-14) and not rep.strict


def test_flow_input_errors():
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    with pytest.raises(ConstraintViolated):
        mf.integrate_flow(setup, np.ones(6))
    with pytest.raises(InputError):
        mf.integrate_flow(setup, np.ones(4))
    with pytest.raises(InputError):
        mf.integrate_flow(setup, setup.seeds()[0][1], direction="sideways")


@pytest.mark.parametrize("n", [3, 4, 5])
def test_lyapunov_strict_on_random_starts(n):
    setup = mf.EmbeddedMorseSetup(n=n, a=2.0)
    rng = np.random.default_rng(n)
    for _ in range(5):
        z = setup.project(rng.normal(size=2 * n))
        rep = mf.lyapunov_check(mf.integrate_flow(setup, z), setup)
        assert rep.monotone and rep.strict and rep.min_delta > -1e-6


def test_lyapunov_constant_on_U0_circle():
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    th = 0.7
    z = np.array([np.cos(th), np.sin(th), 0, np.sin(th), -np.cos(th), 0])
    traj = mf.integrate_flow(setup, z)
    rep = mf.lyapunov_check(traj, setup)
    assert rep.in_U0 and abs(rep.total_increase) < 1e-6
    assert traj.limit in ("z+-", "z-+")


def test_lyapunov_violation_is_reported():
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    traj = mf.integrate_flow(setup, setup.project(np.array([0.3, 0.9, 0.1, 0.8, -0.2, 0.5])))
    traj.points = traj.points[::-1]
    with pytest.raises(MonotonicityViolated):
        mf.lyapunov_check(traj, setup)


@pytest.mark.parametrize("src, tgt", [("c1", "c2"), ("c2", "c3"), ("c3", "c4")])
def test_s3_connecting_counts(src, tgt):
    res = mf.count_connecting(mf.S3FlowSetup.from_a(2.0), src, tgt)
    assert (res.count, res.projected) == (4, 2)


def test_connecting_edge_cases():
    s3 = mf.S3FlowSetup.from_a(2.0)
    assert mf.count_connecting(s3, "c2+", "c2+").count == 0
    with pytest.raises(InputError):
        mf.count_connecting(s3, "c1", "c3")


@pytest.mark.parametrize("src, tgt", [("z++", "z+-"), ("z+-", "z-+"), ("z-+", "z--")])
def test_sstar_connecting_counts(src, tgt):
    assert mf.count_connecting(mf.EmbeddedMorseSetup(n=3, a=2.0), src, tgt).count == 2


def test_intersection_check():
    rep = mf.intersection_check(mf.S3FlowSetup.from_a(2.0), "c1+", "c4+")
    assert rep.consistent == rep.samples == 20
    assert rep.transversal and rep.expected_dim == 3


@pytest.mark.parametrize(
    "n, dims",
    [(2, {0: 2, 1: 2}), (3, {0: 1, 1: 1, 2: 1, 3: 1}), (5, {0: 1, 3: 1, 4: 1, 7: 1})],
)
def test_morse_homology(n, dims):
    assert mf.morse_homology_counts(n) == dims


def test_numeric_morse_homology_agrees():
    assert mf.morse_homology_counts(3, numeric=True) == mf.morse_homology_counts(3)


def test_trajectory_csv():
    setup = mf.EmbeddedMorseSetup(n=3, a=2.0)
    traj = mf.integrate_flow(setup, setup.project(np.array([0.3, 0.9, 0.1, 0.8, -0.2, 0.5])))
    lines = traj.to_csv(setup).splitlines()
    assert lines[0].endswith(",value,F") and len(lines) == len(traj.times) + 1
