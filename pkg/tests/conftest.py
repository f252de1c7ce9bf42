import math

import numpy as np
import pytest

from socnav.episodes import Episode, Frame, Pose2D, VelocityCommand


def make_episode(xy, thetas=None, dt=0.1, scenario="with_traffic", ep_id="ep", n_points=4, seed=0, v=1.0):
    """Episode whose odometry visits the given positions; sensors are random but valid."""
    rng = np.random.default_rng(seed)
    xy = np.asarray(xy, dtype=np.float64)
    if thetas is None:
        d = np.diff(xy, axis=0, append=xy[-1:] + (xy[-1:] - xy[-2:-1]))
        thetas = np.arctan2(d[:, 1], d[:, 0])
    frames = []
    for k, ((x, y), th) in enumerate(zip(xy, thetas)):
        stamp = round(k * dt, 9)
        frames.append(
            Frame(
                stamp=stamp,
                points=rng.uniform(-2, 9, size=(n_points, 3)).astype(np.float32),
                image=rng.integers(0, 256, size=(224, 224, 3), dtype=np.uint8),
                odom=Pose2D(float(x), float(y), float(th), stamp),
                action=VelocityCommand(v, 0.0),
            )
        )
    return Episode(ep_id, scenario, tuple(frames), 1.0 / dt)


def straight_xy(n, step=0.1, heading=0.0, origin=(0.0, 0.0)):
    s = np.arange(n) * step
    return np.stack([origin[0] + s * math.cos(heading), origin[1] + s * math.sin(heading)], axis=1)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE_RESULTS: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        ok, detail = ACCEPTANCE_RESULTS[n]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {n}: {detail}")
