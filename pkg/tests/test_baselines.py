import math

import numpy as np
import pytest
from helpers import random_samples
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from socnav import synthgen
from socnav.baselines import (
    BaselineConfig,
    DWAConfig,
    dwa_lite_plan,
    plan,
    score_baseline,
    straight_pursuit_plan,
)
from socnav.episodes import Pose2D
from socnav.errors import DegenerateGoal, GenerationError, InputError
from socnav.sampling import NavigationInput
from socnav.trainer import write_per_sample
from socnav.voxelizer import DEFAULT_SPEC, VoxelGrid, voxelize

coord = st.floats(-5, 5, allow_nan=False)


def _input(occ_xy=(), goal=(2.5, 0.0)):
    occ = np.zeros(DEFAULT_SPEC.dims, dtype=np.uint8)
    for i, j in occ_xy:
        occ[i, j, 10] = 1
    return NavigationInput(VoxelGrid(DEFAULT_SPEC, occ), np.zeros((224, 224, 3), np.uint8), np.asarray(goal, float))


def _cells(x0, x1, y0, y1):
    xs, ys = DEFAULT_SPEC.cell_centers_xy()
    return [(i, j) for i in np.nonzero((xs >= x0) & (xs < x1))[0] for j in np.nonzero((ys >= y0) & (ys < y1))[0]]


def _rk4_closest_approach(omega, v, goal, dt=1e-3, t_max=20.0):
    """Integrate the unicycle ODE; distance to ``goal`` when the robot first draws level with it."""

    def f(s):
        return np.array([v * math.cos(s[2]), v * math.sin(s[2]), omega])

    def step(s, h):
        k1 = f(s)
        k2 = f(s + h / 2 * k1)
        k3 = f(s + h / 2 * k2)
        k4 = f(s + h * k3)
        return s + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)

    def along(s):  # signed progress of the goal ahead of the robot
        return (goal[0] - s[0]) * math.cos(s[2]) + (goal[1] - s[1]) * math.sin(s[2])

    s = np.zeros(3)
    for _ in range(int(t_max / dt)):
        nxt = step(s, dt)
        if along(s) > 0 >= along(nxt):
            lo, hi = 0.0, dt
            for _ in range(60):
                mid = (lo + hi) / 2
                if along(step(s, mid)) > 0:
                    lo = mid
                else:
                    hi = mid
            p = step(s, lo)
            return math.hypot(goal[0] - p[0], goal[1] - p[1])
        s = nxt
    return math.inf


def test_pursuit_hand_cases():
    out = straight_pursuit_plan((0.0, 2.5))
    assert out.action[1] == 0.8
    out = straight_pursuit_plan((2.5, 0.0))
    np.testing.assert_array_equal(out.action, [1.0, 0.0])
    np.testing.assert_allclose(out.waypoints, [[0.5, 0], [1, 0], [1.5, 0], [2, 0], [2.5, 0]], atol=1e-15)
    with pytest.raises(DegenerateGoal):
        straight_pursuit_plan((0.0, 0.0))


@pytest.mark.parametrize("seed", range(8))
def test_pursuit_arc_passes_through_goal(seed):
    rng = np.random.default_rng(seed)
    goal = rng.uniform([0.3, -3.0], [5.0, 3.0])
    out = straight_pursuit_plan(goal)
    assert _rk4_closest_approach(out.action[1], out.action[0], goal) <= 1e-6


@settings(max_examples=200, deadline=None)
@given(coord, coord)
def test_pursuit_collinear_and_sign(x, y):
    assume(math.hypot(x, y) > 1e-3)
    out = straight_pursuit_plan((x, y))
    cross = out.waypoints[:, 0] * y - out.waypoints[:, 1] * x
    assert np.abs(cross).max() <= 1e-9
    np.testing.assert_allclose(np.hypot(*out.waypoints.T), 0.5 * np.arange(1, 6), rtol=1e-12)
    assert np.sign(out.action[1]) == np.sign(y)


def test_config_validation():
    with pytest.raises(InputError):
        BaselineConfig(kind="teb")
    with pytest.raises(InputError):
        BaselineConfig(v_nominal=0)
    with pytest.raises(InputError):
        BaselineConfig(dwa=DWAConfig(v_samples=2))
    with pytest.raises(InputError):
        BaselineConfig(dwa=DWAConfig(robot_radius_m=0))


def test_dwa_unobstructed_goes_straight():
    out = dwa_lite_plan(_input())
    assert not out.blocked
    np.testing.assert_array_equal(out.action, [1.0, 0.0])
    np.testing.assert_allclose(out.waypoints[:, 1], 0.0, atol=1e-15)


def brute_force_clearance(inp, v, omega, horizon_s, step=1e-3):
    """Smallest distance from the swept arc to any occupied cell square (planar)."""
    length = v * horizon_s
    s = np.linspace(0.0, length, max(2, math.ceil(length / step) + 1))
    th = omega / v * s if v else np.zeros_like(s)
    # independent of arc_points: integrate heading numerically with the trapezoid rule
    c, sn = np.cos(th), np.sin(th)
    ds = np.diff(s)
    x = np.concatenate([[0], np.cumsum(ds * (c[1:] + c[:-1]) / 2)])
    y = np.concatenate([[0], np.cumsum(ds * (sn[1:] + sn[:-1]) / 2)])
    xs, ys = DEFAULT_SPEC.cell_centers_xy()
    ii, jj = np.nonzero(inp.voxels.footprint())
    if len(ii) == 0:
        return math.inf
    cx, cy, h = xs[ii], ys[jj], DEFAULT_SPEC.voxel / 2
    best = math.inf
    for k in range(0, len(x), 500):
        dx = np.maximum(np.abs(x[k:k + 500, None] - cx[None]) - h, 0)
        dy = np.maximum(np.abs(y[k:k + 500, None] - cy[None]) - h, 0)
        best = min(best, float(np.hypot(dx, dy).min()))
    return best


def test_dwa_wall_ahead_clears():
    inp = _input(_cells(1.0, 1.05, -1.0, 1.0), goal=(2.5, 0.0))
    cfg = BaselineConfig(kind="dwa_lite")
    out = dwa_lite_plan(inp, cfg)
    assert not out.blocked
    assert out.clearance > 0
    assert brute_force_clearance(inp, *out.action, cfg.dwa.horizon_s) > cfg.dwa.robot_radius_m


def test_dwa_surrounded_is_blocked():
    out = dwa_lite_plan(_input(_cells(0.3, 0.35, -3.0, 3.0)))
    assert out.blocked
    np.testing.assert_array_equal(out.action, [0.0, 0.0])
    np.testing.assert_array_equal(out.waypoints, np.zeros((5, 2)))


def _random_world_input(seed):
    rng = np.random.default_rng(seed)
    layout = str(rng.choice(["random", "maze", "walls"]))
    n_static, n_peds = int(rng.integers(1, 6)), int(rng.integers(0, 6))
    for attempt in range(20):
        try:
            world = synthgen.gen_world(synthgen.WorldSpec(seed=1000 * attempt + seed, n_static=n_static,
                                                          n_peds=n_peds, layout=layout))
            break
        except GenerationError:
            continue
    pose = Pose2D(float(rng.uniform(0, 6)), float(rng.uniform(-1, 1)), float(rng.uniform(-0.5, 0.5)))
    pts = synthgen.render_pointcloud(world, pose)
    ang = rng.uniform(-math.pi / 2, math.pi / 2)
    return NavigationInput(voxelize(pts), np.zeros((224, 224, 3), np.uint8), 2.5 * np.array([math.cos(ang), math.sin(ang)]))


def test_dwa_never_collides_in_random_worlds():
    cfg = BaselineConfig(kind="dwa_lite")
    n_blocked = 0
    for seed in range(100):
        inp = _random_world_input(seed)
        out = dwa_lite_plan(inp, cfg)
        if out.blocked:
            n_blocked += 1
            continue
        assert brute_force_clearance(inp, *out.action, cfg.dwa.horizon_s) > cfg.dwa.robot_radius_m, seed
    assert n_blocked < 100


def _mirror(inp):
    return NavigationInput(VoxelGrid(inp.voxels.spec, inp.voxels.occ[:, ::-1, :].copy()), inp.image,
                           inp.goal * [1, -1])


@pytest.mark.parametrize("kind", ["straight_pursuit", "dwa_lite"])
@pytest.mark.parametrize("seed", range(10))
def test_mirror_symmetry(kind, seed):
    inp = _random_world_input(seed)
    if abs(inp.goal[1]) < 1e-9:
        pytest.skip("goal on the axis")
    cfg = BaselineConfig(kind=kind)
    a, b = plan(cfg, inp), plan(cfg, _mirror(inp))
    assert b.action[0] == a.action[0]
    assert b.action[1] == -a.action[1]
    np.testing.assert_array_equal(b.waypoints, a.waypoints * [1, -1])


def test_score_matches_manual_and_regenerates(tmp_path):
    samples = random_samples(6, seed=2)
    cfg = BaselineConfig(kind="dwa_lite")
    res = score_baseline(cfg, samples)
    assert res.record.split == "baseline:dwa_lite"
    manual = []
    for s in samples:
        out = plan(cfg, s.input)
        g2 = np.mean(np.sum((out.waypoints - s.plan.waypoints) ** 2, axis=1))
        l1 = 0.5 * (abs(out.action[0] - s.action.action.v) + abs(out.action[1] - s.action.action.omega))
        manual.append(g2 + l1)
    assert res.record.total == pytest.approx(np.mean(manual), rel=1e-12)

    def dump(name):
        r = score_baseline(cfg, samples)
        return write_per_sample(tmp_path / name, [("dwa_lite", 0, s) for s in r.per_sample]).read_bytes()

    assert dump("a.csv") == dump("b.csv")
