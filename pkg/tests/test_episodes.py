import dataclasses
import math

import numpy as np
import pytest
from conftest import make_episode, straight_xy

from socnav import synthgen
from socnav.episodes import (
    Pose2D,
    episodes_equal,
    load_episode,
    save_episode,
    validate_episode,
    wrap_angle,
)
from socnav.errors import EpisodeFormatError, EpisodeValidationError


def test_minimal_roundtrip(tmp_path):
    ep = make_episode(straight_xy(2, step=1.0))
    out = save_episode(ep, tmp_path / "ep")
    names = sorted(p.name for p in out.iterdir())
    assert names == ["frame_000000.img", "frame_000000.pts", "frame_000001.img", "frame_000001.pts", "frames.idx", "meta.json"]
    back = load_episode(out)
    assert episodes_equal(ep, back)
    assert validate_episode(back) == []


def test_non_monotonic_stamps_rejected(tmp_path):
    ep = make_episode(straight_xy(3))
    f = ep.frames
    swapped = (f[0], dataclasses.replace(f[1], stamp=0.5, odom=dataclasses.replace(f[1].odom, stamp=0.5)), f[2])
    bad = dataclasses.replace(ep, frames=swapped)
    with pytest.raises(EpisodeValidationError, match="frame 2"):
        save_episode(bad, tmp_path / "bad")


def test_100_frame_generated_episode_bit_exact(tmp_path):
    spec = synthgen.WorldSpec(seed=11, extent=40.0, n_static=3, n_peds=4, ped_model="social_force_lite", ped_flow="against")
    ep = synthgen.simulate_episode(synthgen.gen_world(spec), synthgen.ExpertConfig(), T=19.8, dt=0.2)
    assert len(ep.frames) == 100
    back = load_episode(save_episode(ep, tmp_path / "gen"))
    assert episodes_equal(ep, back)
    for a, b in zip(ep.frames, back.frames):
        assert a.points.tobytes() == b.points.tobytes()


def test_meta_and_index_layout(tmp_path):
    ep = make_episode(straight_xy(3), n_points=5)
    out = save_episode(ep, tmp_path / "ep")
    import json

    meta = json.loads((out / "meta.json").read_text())
    assert meta == {"id": "ep", "scenario": "with_traffic", "rate_hz": 10.0, "n_frames": 3, "format_version": "1"}
    lines = (out / "frames.idx").read_text().splitlines()
    assert len(lines) == 3 and lines[1].split()[-1] == "5"
    assert (out / "frame_000001.pts").stat().st_size == 5 * 12
    assert (out / "frame_000001.img").stat().st_size == 224 * 224 * 3
    raw = np.fromfile(out / "frame_000002.pts", dtype="<f4").reshape(-1, 3)
    assert np.array_equal(raw, ep.frames[2].points)


def test_load_does_not_modify_files(tmp_path):
    out = save_episode(make_episode(straight_xy(4)), tmp_path / "ep")
    before = {p.name: (p.read_bytes(), p.stat().st_mtime_ns) for p in out.iterdir()}
    load_episode(out)
    after = {p.name: (p.read_bytes(), p.stat().st_mtime_ns) for p in out.iterdir()}
    assert before == after


@pytest.mark.parametrize(
    "damage, fname",
    [
        (lambda d: (d / "frame_000001.pts").unlink(), "frame_000001.pts"),
        (lambda d: (d / "frame_000000.img").write_bytes(b"\0" * 100), "frame_000000.img"),
        (lambda d: (d / "meta.json").write_text("{not json"), "meta.json"),
        (lambda d: (d / "frames.idx").write_text("1 2 3\n"), "frames.idx"),
    ],
)
def test_corrupt_files_name_the_file(tmp_path, damage, fname):
    out = save_episode(make_episode(straight_xy(2)), tmp_path / "ep")
    damage(out)
    with pytest.raises(EpisodeFormatError) as exc:
        load_episode(out)
    assert exc.value.filename == fname


def test_validate_valid_is_empty():
    assert validate_episode(make_episode(straight_xy(5))) == []


def test_validate_bad_image_names_frame():
    ep = make_episode(straight_xy(5))
    frames = list(ep.frames)
    frames[3] = dataclasses.replace(frames[3], image=np.zeros((100, 100, 3), np.uint8))
    problems = validate_episode(dataclasses.replace(ep, frames=tuple(frames)))
    assert len(problems) == 1 and "frame 3" in problems[0]


def test_validate_nan_point():
    ep = make_episode(straight_xy(5))
    frames = list(ep.frames)
    pts = frames[1].points.copy()
    pts[0, 2] = np.nan
    frames[1] = dataclasses.replace(frames[1], points=pts)
    problems = validate_episode(dataclasses.replace(ep, frames=tuple(frames)))
    assert len(problems) == 1 and "non-finite point" in problems[0]


def test_validate_other_invariants():
    ep = make_episode(straight_xy(3))
    f0 = ep.frames[0]
    assert validate_episode(dataclasses.replace(ep, frames=ep.frames[:1]))
    assert validate_episode(dataclasses.replace(ep, scenario=""))
    bad_theta = dataclasses.replace(f0, odom=Pose2D(0, 0, -math.pi, 0.0))
    assert any("heading" in p for p in validate_episode(dataclasses.replace(ep, frames=(bad_theta,) + ep.frames[1:])))
    fast = dataclasses.replace(f0, action=dataclasses.replace(f0.action, v=2.5))
    assert any("exceeds" in p for p in validate_episode(dataclasses.replace(ep, frames=(fast,) + ep.frames[1:])))
    skew = dataclasses.replace(f0, stamp=0.01)
    assert any("differs" in p for p in validate_episode(dataclasses.replace(ep, frames=(skew,) + ep.frames[1:])))


def test_wrap_angle_range():
    for a in np.linspace(-20, 20, 401):
        w = wrap_angle(a)
        assert -math.pi < w <= math.pi
        assert math.isclose(math.cos(w), math.cos(a), abs_tol=1e-12)
    assert wrap_angle(-math.pi) == math.pi
