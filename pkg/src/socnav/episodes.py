"""Demonstration episodes: data model, validation and the on-disk format.

An episode directory contains::

    meta.json            {"id", "scenario", "rate_hz", "n_frames", "format_version": "1"}
    frames.idx           one line per frame: stamp v omega odom_x odom_y odom_theta n_points
    frame_000000.pts     little-endian float32, n_points x (x, y, z)
    frame_000000.img     uint8, row-major 224 x 224 x 3, RGB

Floats in ``frames.idx`` are written with ``repr`` so they parse back to the
identical binary value.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EpisodeFormatError, EpisodeValidationError, StorageError

FORMAT_VERSION = "1"
IMAGE_SHAPE = (224, 224, 3)
V_MAX = 2.0
OMEGA_MAX = 1.5

PTS_DTYPE = np.dtype("<f4")


def wrap_angle(theta: float) -> float:
    """Map an angle to (-pi, pi]."""
    wrapped = math.remainder(theta, 2.0 * math.pi)
    if wrapped == -math.pi:
        wrapped = math.pi
    return wrapped


@dataclass(frozen=True)
class Pose2D:
    x: float
    y: float
    theta: float
    stamp: float = 0.0


@dataclass(frozen=True)
class VelocityCommand:
    v: float
    omega: float


@dataclass(frozen=True, eq=False)
class Frame:
    """One synchronized sensor snapshot with the demonstrator's command.

    ``points`` is an (n, 3) float32 array in the robot body frame
    (+x forward, +y left, +z up). ``image`` is a 224x224x3 uint8 RGB array.
    """

    stamp: float
    points: np.ndarray
    image: np.ndarray
    odom: Pose2D
    action: VelocityCommand


@dataclass(frozen=True, eq=False)
class Episode:
    id: str
    scenario: str
    frames: tuple[Frame, ...]
    rate_hz: float
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.frames)

    @property
    def poses(self) -> list[Pose2D]:
        return [f.odom for f in self.frames]


def frames_equal(a: Frame, b: Frame) -> bool:
    """Field-by-field equality; arrays must match in dtype, shape and bytes."""
    return (
        a.stamp == b.stamp
        and a.odom == b.odom
        and a.action == b.action
        and a.points.dtype == b.points.dtype
        and a.points.shape == b.points.shape
        and a.points.tobytes() == b.points.tobytes()
        and a.image.dtype == b.image.dtype
        and a.image.shape == b.image.shape
        and a.image.tobytes() == b.image.tobytes()
    )


def episodes_equal(a: Episode, b: Episode) -> bool:
    return (
        a.id == b.id
        and a.scenario == b.scenario
        and a.rate_hz == b.rate_hz
        and len(a.frames) == len(b.frames)
        and all(frames_equal(fa, fb) for fa, fb in zip(a.frames, b.frames))
    )


def validate_episode(ep: Episode, v_max: float = V_MAX, omega_max: float = OMEGA_MAX) -> list[str]:
    """Return a list of human-readable invariant violations (empty if valid)."""
    problems = []
    if not isinstance(ep.scenario, str) or not ep.scenario:
        problems.append("scenario label is empty")
    if len(ep.frames) < 2:
        problems.append(f"episode has {len(ep.frames)} frame(s); at least 2 required")
    prev_stamp = None
    for i, fr in enumerate(ep.frames):
        where = f"frame {i}"
        img = np.asarray(fr.image)
        if img.shape != IMAGE_SHAPE:
            problems.append(f"{where}: image shape {img.shape}, expected {IMAGE_SHAPE}")
        elif img.dtype != np.uint8:
            problems.append(f"{where}: image dtype {img.dtype}, expected uint8")
        pts = np.asarray(fr.points)
        if pts.ndim != 2 or pts.shape[1] != 3:
            problems.append(f"{where}: points shape {pts.shape}, expected (n, 3)")
        elif not np.all(np.isfinite(pts)):
            problems.append(f"{where}: non-finite point coordinate")
        o = fr.odom
        if not all(math.isfinite(c) for c in (o.x, o.y, o.theta, o.stamp)):
            problems.append(f"{where}: non-finite odometry")
        elif not (-math.pi < o.theta <= math.pi):
            problems.append(f"{where}: odometry heading {o.theta} outside (-pi, pi]")
        if not math.isfinite(fr.stamp):
            problems.append(f"{where}: non-finite stamp")
        elif fr.stamp != o.stamp:
            problems.append(f"{where}: stamp {fr.stamp} differs from odometry stamp {o.stamp}")
        a = fr.action
        if not (math.isfinite(a.v) and math.isfinite(a.omega)):
            problems.append(f"{where}: non-finite action")
        elif abs(a.v) > v_max or abs(a.omega) > omega_max:
            problems.append(f"{where}: action ({a.v}, {a.omega}) exceeds limits ({v_max}, {omega_max})")
        if prev_stamp is not None and not fr.stamp > prev_stamp:
            problems.append(f"{where}: stamp {fr.stamp} not after previous stamp {prev_stamp}")
        prev_stamp = fr.stamp
    return problems


def _frame_name(i: int, ext: str) -> str:
    return f"frame_{i:06d}.{ext}"


def save_episode(ep: Episode, dir: str | os.PathLike) -> Path:
    """Write ``ep`` into directory ``dir`` (created if needed) and return its path."""
    problems = validate_episode(ep)
    if problems:
        raise EpisodeValidationError(f"episode {ep.id!r} is invalid: {problems[0]}")
    out = Path(dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "id": ep.id,
            "scenario": ep.scenario,
            "rate_hz": ep.rate_hz,
            "n_frames": len(ep.frames),
            "format_version": FORMAT_VERSION,
        }
        (out / "meta.json").write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
        lines = []
        for i, fr in enumerate(ep.frames):
            pts = np.ascontiguousarray(fr.points, dtype=PTS_DTYPE)
            o, a = fr.odom, fr.action
            fields = (fr.stamp, a.v, a.omega, o.x, o.y, o.theta)
            lines.append(" ".join(repr(float(f)) for f in fields) + f" {pts.shape[0]}")
            (out / _frame_name(i, "pts")).write_bytes(pts.tobytes())
            (out / _frame_name(i, "img")).write_bytes(np.ascontiguousarray(fr.image, dtype=np.uint8).tobytes())
        (out / "frames.idx").write_text("\n".join(lines) + "\n", encoding="utf-8")
    except OSError as exc:
        raise StorageError(f"failed to write episode to {out}: {exc}") from exc
    return out


def _read_bytes(path: Path) -> bytes:
    try:
        return path.read_bytes()
    except FileNotFoundError:
        raise EpisodeFormatError("file is missing", path.name) from None
    except OSError as exc:
        raise EpisodeFormatError(f"unreadable ({exc})", path.name) from exc


def load_episode(dir: str | os.PathLike) -> Episode:
    root = Path(dir)
    try:
        meta = json.loads(_read_bytes(root / "meta.json").decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise EpisodeFormatError(f"not valid JSON ({exc})", "meta.json") from exc
    missing = {"id", "scenario", "rate_hz", "n_frames", "format_version"} - set(meta)
    if missing:
        raise EpisodeFormatError(f"missing keys {sorted(missing)}", "meta.json")
    if meta["format_version"] != FORMAT_VERSION:
        raise EpisodeFormatError(f"unsupported format_version {meta['format_version']!r}", "meta.json")

    idx_lines = _read_bytes(root / "frames.idx").decode("utf-8").splitlines()
    idx_lines = [ln for ln in idx_lines if ln.strip()]
    if len(idx_lines) != meta["n_frames"]:
        raise EpisodeFormatError(
            f"{len(idx_lines)} frame lines but meta.json says n_frames={meta['n_frames']}", "frames.idx"
        )

    frames = []
    img_bytes = int(np.prod(IMAGE_SHAPE))
    for i, line in enumerate(idx_lines):
        parts = line.split()
        if len(parts) != 7:
            raise EpisodeFormatError(f"line {i + 1}: expected 7 fields, got {len(parts)}", "frames.idx")
        try:
            stamp, v, omega, ox, oy, oth = (float(p) for p in parts[:6])
            n_points = int(parts[6])
        except ValueError as exc:
            raise EpisodeFormatError(f"line {i + 1}: {exc}", "frames.idx") from exc

        pts_name = _frame_name(i, "pts")
        raw = _read_bytes(root / pts_name)
        if len(raw) != n_points * 3 * PTS_DTYPE.itemsize:
            raise EpisodeFormatError(
                f"{len(raw)} bytes, expected {n_points * 3 * PTS_DTYPE.itemsize} for {n_points} points", pts_name
            )
        points = np.frombuffer(raw, dtype=PTS_DTYPE).reshape(n_points, 3).astype(np.float32)

        img_name = _frame_name(i, "img")
        raw = _read_bytes(root / img_name)
        if len(raw) != img_bytes:
            raise EpisodeFormatError(f"{len(raw)} bytes, expected {img_bytes}", img_name)
        image = np.frombuffer(raw, dtype=np.uint8).reshape(IMAGE_SHAPE).copy()

        frames.append(
            Frame(
                stamp=stamp,
                points=points,
                image=image,
                odom=Pose2D(ox, oy, oth, stamp),
                action=VelocityCommand(v, omega),
            )
        )
    return Episode(id=meta["id"], scenario=meta["scenario"], frames=tuple(frames), rate_hz=meta["rate_hz"])


def iter_episodes(root: str | os.PathLike):
    """Yield every episode stored in immediate subdirectories of ``root``, sorted by name."""
    for sub in sorted(Path(root).iterdir()):
        if (sub / "meta.json").is_file():
            yield load_episode(sub)


def from_rosbag(path):
    """Placeholder for a SCAND rosbag adapter.

    Converting real recordings needs ROS message parsing plus the camera and
    LiDAR extrinsics, neither of which ships with this package. Convert bags
    externally into the episode directory layout above.
    """
    raise NotImplementedError("rosbag conversion is not bundled; write episodes with save_episode()")
