"""Synthetic stand-in for real demonstration data.

Worlds are 2D corridors with oriented box obstacles, disc pedestrians and
painted "semantic zones". A scripted expert drives from the start pose to the
goal, and every step is rendered into both sensor channels:

* the LiDAR cloud sees boxes and pedestrians, never zones;
* the camera image sees zones, and sees boxes/pedestrians only when the world
  spec enables it.

That split is what lets an experiment place decision-relevant information in
exactly one modality.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .episodes import IMAGE_SHAPE, Episode, Frame, Pose2D, VelocityCommand, wrap_angle
from .errors import GenerationError

PED_MODELS = ("constant_velocity", "social_force_lite")
PED_FLOWS = ("random", "with", "against", "crossing", "standing")
LAYOUTS = ("random", "walls", "maze")

BACKGROUND = (176, 176, 160)
OBSTACLE_GRAY = (90, 90, 90)
PED_PALETTE = ((40, 90, 200), (230, 150, 30), (40, 160, 70), (150, 60, 170), (20, 170, 180))
SLOW_RED = (220, 40, 40)
DECOY_BLUE = (60, 80, 230)

ROBOT_RADIUS = 0.3
PED_RADIUS = 0.3
PED_HEIGHT = 1.7


@dataclass(frozen=True)
class Zone:
    """Axis-aligned painted rectangle ``(x0, y0, x1, y1)`` in world coordinates."""

    region: tuple[float, float, float, float]
    color: tuple[int, int, int] = SLOW_RED
    speed_factor: float = 0.4

    def contains(self, x, y):
        x0, y0, x1, y1 = self.region
        return (x >= x0) & (x < x1) & (y >= y0) & (y < y1)


@dataclass(frozen=True)
class WorldSpec:
    seed: int = 0
    extent: float = 16.0
    n_static: int = 0
    n_peds: int = 0
    ped_model: str = "constant_velocity"
    semantic_zones: tuple[Zone, ...] = ()
    scenario: str = "corridor"
    width: float = 8.0
    layout: str = "random"
    ped_flow: str = "random"
    heading_jitter: float = 0.0
    goal_jitter: float = 0.0
    render_geometry: bool = True
    render_pedestrians: bool = True

    def __post_init__(self):
        if self.n_static < 0 or self.n_peds < 0:
            raise ValueError("counts must be >= 0")
        if not self.extent > 10:
            raise ValueError("extent must exceed 10 m")
        if self.ped_model not in PED_MODELS:
            raise ValueError(f"ped_model must be one of {PED_MODELS}")
        if self.layout not in LAYOUTS:
            raise ValueError(f"layout must be one of {LAYOUTS}")
        if self.ped_flow not in PED_FLOWS:
            raise ValueError(f"ped_flow must be one of {PED_FLOWS}")
        for z in self.semantic_zones:
            if not 0 < z.speed_factor <= 1:
                raise ValueError("zone speed_factor must be in (0, 1]")


@dataclass(frozen=True)
class ExpertConfig:
    v_nominal: float = 1.0
    slow_radius: float = 2.0
    zone_obedience: bool = True
    slow_front_only: bool = False
    lookahead: float = 1.5
    omega_max: float = 1.5
    goal_tolerance: float = 0.3
    clearance: float = 0.6

    def __post_init__(self):
        if not self.v_nominal > 0:
            raise ValueError("v_nominal must be > 0")
        if not self.slow_radius > 0:
            raise ValueError("slow_radius must be > 0")


@dataclass(frozen=True)
class Box:
    cx: float
    cy: float
    hx: float
    hy: float
    yaw: float = 0.0
    height: float = 1.0

    def to_local(self, x, y):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        dx, dy = np.asarray(x) - self.cx, np.asarray(y) - self.cy
        return c * dx + s * dy, -s * dx + c * dy

    def corners(self, pad=0.0):
        c, s = math.cos(self.yaw), math.sin(self.yaw)
        out = []
        for u, w in ((1, 1), (-1, 1), (-1, -1), (1, -1)):
            lx, ly = u * (self.hx + pad), w * (self.hy + pad)
            out.append((self.cx + c * lx - s * ly, self.cy + s * lx + c * ly))
        return out

    @property
    def bounding_radius(self):
        return math.hypot(self.hx, self.hy)


@dataclass(frozen=True)
class Pedestrian:
    x: float
    y: float
    vx: float
    vy: float
    gx: float
    gy: float
    color: tuple[int, int, int] = PED_PALETTE[0]
    radius: float = PED_RADIUS
    height: float = PED_HEIGHT
    desired_speed: float = 0.0


@dataclass(frozen=True)
class World:
    spec: WorldSpec
    start: Pose2D
    goal: tuple[float, float]
    obstacles: tuple[Box, ...] = ()
    peds: tuple[Pedestrian, ...] = ()
    zones: tuple[Zone, ...] = ()
    time: float = 0.0


# geometry helpers -------------------------------------------------------------

def circle_box_overlap(x, y, r, box: Box, pad: float = 0.0) -> bool:
    u, w = box.to_local(x, y)
    du = max(abs(float(u)) - box.hx, 0.0)
    dw = max(abs(float(w)) - box.hy, 0.0)
    return du * du + dw * dw < (r + pad) ** 2


def segment_hits_box(p0, p1, box: Box, pad: float = 0.0) -> bool:
    """Slab test of segment p0->p1 against ``box`` grown by ``pad`` on each side."""
    u0, w0 = box.to_local(p0[0], p0[1])
    u1, w1 = box.to_local(p1[0], p1[1])
    lo, hi = 0.0, 1.0
    for o, e, h in ((float(u0), float(u1), box.hx + pad), (float(w0), float(w1), box.hy + pad)):
        d = e - o
        if abs(d) < 1e-12:
            if abs(o) > h:
                return False
            continue
        t1, t2 = (-h - o) / d, (h - o) / d
        if t1 > t2:
            t1, t2 = t2, t1
        lo, hi = max(lo, t1), min(hi, t2)
        if lo > hi:
            return False
    return True


def ray_box_distance(ox, oy, dx, dy, box: Box) -> np.ndarray:
    """Entry distance of rays (origin ox, oy; unit dirs dx, dy arrays) into ``box``; inf on miss."""
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    lo_x, lo_y = c * (ox - box.cx) + s * (oy - box.cy), -s * (ox - box.cx) + c * (oy - box.cy)
    ddx, ddy = c * dx + s * dy, -s * dx + c * dy
    tmin = np.full(dx.shape, -np.inf)
    tmax = np.full(dx.shape, np.inf)
    for o, d, h in ((lo_x, ddx, box.hx), (lo_y, ddy, box.hy)):
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = (-h - o) / d
            t2 = (h - o) / d
        par = np.abs(d) < 1e-15
        t_lo = np.where(par, np.where(abs(o) <= h, -np.inf, np.inf), np.minimum(t1, t2))
        t_hi = np.where(par, np.where(abs(o) <= h, np.inf, -np.inf), np.maximum(t1, t2))
        tmin = np.maximum(tmin, t_lo)
        tmax = np.minimum(tmax, t_hi)
    hit = (tmax >= tmin) & (tmin > 0)
    return np.where(hit, tmin, np.inf)


def ray_circle_distance(ox, oy, dx, dy, cx, cy, r) -> np.ndarray:
    fx, fy = ox - cx, oy - cy
    b = fx * dx + fy * dy
    c = fx * fx + fy * fy - r * r
    disc = b * b - c
    with np.errstate(invalid="ignore"):
        t = -b - np.sqrt(disc)
    return np.where((disc >= 0) & (t > 0), t, np.inf)


# world generation -----------------------------------------------------------

def _place_box(rng, spec: WorldSpec, layout_y, placed, start, goal, walls=()):
    for _ in range(200):
        hx, hy = rng.uniform(0.3, 0.9), rng.uniform(0.3, 0.9)
        box = Box(
            cx=float(rng.uniform(3.0, spec.extent - 2.5)),
            cy=float(layout_y()),
            hx=float(hx),
            hy=float(hy),
            yaw=float(rng.uniform(0, math.pi / 2)),
            height=float(rng.uniform(0.6, 1.0)),
        )
        if circle_box_overlap(start.x, start.y, ROBOT_RADIUS, box, pad=1.0):
            continue
        if circle_box_overlap(goal[0], goal[1], ROBOT_RADIUS, box, pad=0.8):
            continue
        if any(math.hypot(box.cx - b.cx, box.cy - b.cy) < box.bounding_radius + b.bounding_radius + 0.8 for b in placed):
            continue
        # walls are long and thin, so their bounding circles are useless for spacing
        if any(circle_box_overlap(box.cx, box.cy, box.bounding_radius, w, pad=0.8) for w in walls):
            continue
        return box
    raise GenerationError(f"could not place obstacle {len(placed)} for seed {spec.seed}")


def _walls(spec: WorldSpec):
    half = spec.width / 2
    length = spec.extent - 3.0
    cx = 1.5 + length / 2
    return [
        Box(cx, half + 0.15, length / 2, 0.15, 0.0, 1.2),
        Box(cx, -half - 0.15, length / 2, 0.15, 0.0, 1.2),
    ]


def _place_ped(rng, spec: WorldSpec, idx, obstacles, start, placed):
    half = spec.width / 2 - 0.5
    for _ in range(200):
        flow = spec.ped_flow
        speed = 0.0
        if flow == "with":
            x, y = rng.uniform(3.0, spec.extent - 2.0), rng.uniform(-half, half)
            speed = rng.uniform(0.3, 0.6)
            heading = 0.0
        elif flow == "against":
            x, y = rng.uniform(5.0, spec.extent + 4.0), rng.uniform(-half, half)
            speed = rng.uniform(0.7, 1.2)
            heading = math.pi
        elif flow == "crossing":
            side = rng.choice([-1.0, 1.0])
            x, y = rng.uniform(4.0, spec.extent - 2.0), side * rng.uniform(half - 1.0, half + 2.0)
            speed = rng.uniform(0.6, 1.0)
            heading = -side * math.pi / 2
        elif flow == "standing":
            x, y = rng.uniform(3.0, spec.extent - 1.5), rng.uniform(-half, half)
            heading = 0.0
        else:
            x, y = rng.uniform(2.0, spec.extent), rng.uniform(-half, half)
            speed = rng.uniform(0.3, 1.0)
            heading = rng.uniform(-math.pi, math.pi)
        x, y = float(x), float(y)
        if math.hypot(x - start.x, y - start.y) < 1.5:
            continue
        if any(circle_box_overlap(x, y, PED_RADIUS, b, pad=0.1) for b in obstacles):
            continue
        if any(math.hypot(x - p.x, y - p.y) < 2 * PED_RADIUS + 0.3 for p in placed):
            continue
        vx, vy = speed * math.cos(heading), speed * math.sin(heading)
        return Pedestrian(
            x=x, y=y, vx=float(vx), vy=float(vy), gx=x + 100.0 * vx, gy=y + 100.0 * vy,
            color=PED_PALETTE[idx % len(PED_PALETTE)], desired_speed=float(speed),
        )
    raise GenerationError(f"could not place pedestrian {idx} for seed {spec.seed}")


def gen_world(spec: WorldSpec) -> World:
    """Build a world from ``spec``; the same spec always gives the same world."""
    rng = np.random.default_rng(spec.seed)
    start = Pose2D(0.0, 0.0, float(rng.uniform(-1, 1) * spec.heading_jitter), 0.0)
    goal = (float(spec.extent), float(rng.uniform(-1, 1) * spec.goal_jitter))
    half = spec.width / 2 - 0.5

    walls = _walls(spec) if spec.layout == "walls" else []
    obstacles = []
    if spec.layout == "maze":
        # boxes straddle the start-goal line so the expert has to detour
        def layout_y():
            return rng.uniform(-0.8, 0.8)
    else:
        def layout_y():
            return rng.uniform(-half, half)
    for _ in range(spec.n_static):
        obstacles.append(_place_box(rng, spec, layout_y, obstacles, start, goal, walls))
    obstacles = walls + obstacles

    peds = []
    for i in range(spec.n_peds):
        peds.append(_place_ped(rng, spec, i, obstacles, start, peds))
    return World(spec, start, goal, tuple(obstacles), tuple(peds), tuple(spec.semantic_zones), 0.0)


# pedestrians ------------------------------------------------------------------

def _nearest_on_box(box: Box, x, y):
    u, w = box.to_local(x, y)
    u, w = float(np.clip(u, -box.hx, box.hx)), float(np.clip(w, -box.hy, box.hy))
    c, s = math.cos(box.yaw), math.sin(box.yaw)
    return box.cx + c * u - s * w, box.cy + s * u + c * w


def step_pedestrians(world: World, robot: Pose2D, dt: float) -> World:
    """Advance pedestrians by ``dt`` under the world's pedestrian model."""
    new = []
    for i, p in enumerate(world.peds):
        if world.spec.ped_model == "constant_velocity":
            new.append(replace(p, x=p.x + p.vx * dt, y=p.y + p.vy * dt))
            continue
        # social_force_lite: relax toward the desired velocity, inverse-square push-away
        fx = fy = 0.0
        gdx, gdy = p.gx - p.x, p.gy - p.y
        gd = math.hypot(gdx, gdy)
        if gd > 1e-9 and p.desired_speed > 0:
            fx += (p.desired_speed * gdx / gd - p.vx) / 0.5
            fy += (p.desired_speed * gdy / gd - p.vy) / 0.5
        else:
            fx -= p.vx / 0.5
            fy -= p.vy / 0.5
        sources = [(robot.x, robot.y, 1.0)]
        sources += [(*_nearest_on_box(b, p.x, p.y), 0.5) for b in world.obstacles]
        sources += [(q.x, q.y, 0.5) for j, q in enumerate(world.peds) if j != i]
        for sx, sy, strength in sources:
            dx, dy = p.x - sx, p.y - sy
            d = math.hypot(dx, dy)
            if 1e-9 < d < 3.0:
                mag = strength / (d * d)
                fx += mag * dx / d
                fy += mag * dy / d
        vx, vy = p.vx + fx * dt, p.vy + fy * dt
        cap = max(1.5 * p.desired_speed, 0.5)
        sp = math.hypot(vx, vy)
        if sp > cap:
            vx, vy = vx * cap / sp, vy * cap / sp
        # hard non-penetration guard: try the full move, then each axis, else stay
        for cand_vx, cand_vy in ((vx, vy), (vx, 0.0), (0.0, vy), (0.0, 0.0)):
            nx, ny = p.x + cand_vx * dt, p.y + cand_vy * dt
            if not any(circle_box_overlap(nx, ny, p.radius, b) for b in world.obstacles):
                break
        new.append(replace(p, x=nx, y=ny, vx=cand_vx, vy=cand_vy))
    return replace(world, peds=tuple(new), time=world.time + dt)


# sensors ----------------------------------------------------------------------

@dataclass(frozen=True)
class LidarConfig:
    n_rays: int = 720
    max_range: float = 12.0
    z_step: float = 0.1


def render_pointcloud(world: World, pose: Pose2D, cfg: LidarConfig = LidarConfig()) -> np.ndarray:
    """Planar ray cast lifted to 3D; returns (n, 3) float64 points in the robot frame.

    Each ray stops at its first hit, and the hit is replicated at heights
    ``z_step/2, 3*z_step/2, ...`` up to the height of the object it struck.
    Zones have no geometry and never produce returns.
    """
    ang = np.arange(cfg.n_rays) * (2 * math.pi / cfg.n_rays)
    dx, dy = np.cos(ang + pose.theta), np.sin(ang + pose.theta)
    best = np.full(cfg.n_rays, np.inf)
    height = np.zeros(cfg.n_rays)
    for b in world.obstacles:
        t = ray_box_distance(pose.x, pose.y, dx, dy, b)
        closer = t < best
        best[closer], height[closer] = t[closer], b.height
    for p in world.peds:
        t = ray_circle_distance(pose.x, pose.y, dx, dy, p.x, p.y, p.radius)
        closer = t < best
        best[closer], height[closer] = t[closer], p.height
    hit = best <= cfg.max_range
    if not hit.any():
        return np.zeros((0, 3))
    r, a, h = best[hit], ang[hit], height[hit]
    n_z = np.maximum(1, np.floor(h / cfg.z_step + 0.5).astype(int))
    reps = np.repeat(np.arange(len(r)), n_z)
    level = np.concatenate([np.arange(n) for n in n_z])
    z = (level + 0.5) * cfg.z_step
    return np.stack([r[reps] * np.cos(a[reps]), r[reps] * np.sin(a[reps]), z], axis=1)


@dataclass(frozen=True)
class CameraConfig:
    """Robot-centric top-down view: rows span x (far at the top), columns span y (left at col 0)."""

    x_range: tuple[float, float] = (-1.0, 8.0)
    y_range: tuple[float, float] = (-4.5, 4.5)


def _pixel_grid(cfg: CameraConfig):
    h, w, _ = IMAGE_SHAPE
    rows = (np.arange(h) + 0.5) / h
    cols = (np.arange(w) + 0.5) / w
    xr = cfg.x_range[1] - rows * (cfg.x_range[1] - cfg.x_range[0])
    yr = cfg.y_range[1] - cols * (cfg.y_range[1] - cfg.y_range[0])
    return np.meshgrid(xr, yr, indexing="ij")


def render_image(world: World, pose: Pose2D, cfg: CameraConfig = CameraConfig()) -> np.ndarray:
    """Schematic 224x224x3 uint8 rendering; deterministic in (world, pose)."""
    xr, yr = _pixel_grid(cfg)
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    xw = pose.x + c * xr - s * yr
    yw = pose.y + s * xr + c * yr
    img = np.empty(IMAGE_SHAPE, dtype=np.uint8)
    img[:] = BACKGROUND
    for z in world.zones:
        img[z.contains(xw, yw)] = z.color
    if world.spec.render_geometry:
        for b in world.obstacles:
            u, w = b.to_local(xw, yw)
            img[(np.abs(u) <= b.hx) & (np.abs(w) <= b.hy)] = OBSTACLE_GRAY
    if world.spec.render_pedestrians:
        for p in world.peds:
            img[(xw - p.x) ** 2 + (yw - p.y) ** 2 <= p.radius**2] = p.color
    return img


# expert -------------------------------------------------------------------------

def _blocked(world: World, p0, p1, pad) -> bool:
    return any(segment_hits_box(p0, p1, b, pad) for b in world.obstacles)


def _choose_target(world: World, pose: Pose2D, via, expert: ExpertConfig):
    here = (pose.x, pose.y)
    if not _blocked(world, here, world.goal, expert.clearance):
        return world.goal, None
    if via is not None and math.hypot(via[0] - pose.x, via[1] - pose.y) > 0.5 and not _blocked(
        world, here, via, expert.clearance - 0.05
    ):
        return via, via
    # detour around the first box in the way, through its best visible corner
    best = None
    for b in world.obstacles:
        if not segment_hits_box(here, world.goal, b, expert.clearance):
            continue
        for corner in b.corners(pad=expert.clearance + 0.3):
            if math.hypot(corner[0] - pose.x, corner[1] - pose.y) <= 0.5:
                continue
            if _blocked(world, here, corner, expert.clearance - 0.05):
                continue
            cost = math.hypot(corner[0] - pose.x, corner[1] - pose.y) + math.hypot(
                world.goal[0] - corner[0], world.goal[1] - corner[1]
            )
            if _blocked(world, corner, world.goal, expert.clearance):
                cost += 5.0
            if best is None or cost < best[0]:
                best = (cost, corner)
    if best is None:
        return world.goal, None
    return best[1], best[1]


def expert_speed(world: World, pose: Pose2D, expert: ExpertConfig) -> float:
    v = expert.v_nominal
    c, s = math.cos(pose.theta), math.sin(pose.theta)
    for p in world.peds:
        dx, dy = p.x - pose.x, p.y - pose.y
        if math.hypot(dx, dy) < expert.slow_radius and (not expert.slow_front_only or c * dx + s * dy > 0):
            v *= 0.5
            break
    if expert.zone_obedience:
        factors = [z.speed_factor for z in world.zones if z.contains(pose.x, pose.y)]
        if factors:
            v *= min(factors)
    return v


def _integrate(pose: Pose2D, v: float, omega: float, dt: float) -> Pose2D:
    if abs(omega) < 1e-12:
        x = pose.x + v * dt * math.cos(pose.theta)
        y = pose.y + v * dt * math.sin(pose.theta)
    else:
        r = v / omega
        th1 = pose.theta + omega * dt
        x = pose.x + r * (math.sin(th1) - math.sin(pose.theta))
        y = pose.y - r * (math.cos(th1) - math.cos(pose.theta))
    return Pose2D(x, y, wrap_angle(pose.theta + omega * dt), pose.stamp + dt)


def simulate_episode(world: World, expert: ExpertConfig = ExpertConfig(), T: float = 30.0, dt: float = 0.2,
                     lidar: LidarConfig = LidarConfig(), camera: CameraConfig = CameraConfig(),
                     episode_id: str | None = None) -> Episode:
    """Roll out the expert for up to ``T`` seconds, stopping once the goal is reached."""
    n_max = int(math.floor(T / dt + 1e-9)) + 1
    if n_max < 2:
        raise ValueError("T/dt must allow at least two frames")
    pose = world.start
    via = None
    frames = []
    for k in range(n_max):
        stamp = round(k * dt, 9)
        pose = Pose2D(pose.x, pose.y, pose.theta, stamp)
        target, via = _choose_target(world, pose, via, expert)
        v = expert_speed(world, pose, expert)
        alpha = wrap_angle(math.atan2(target[1] - pose.y, target[0] - pose.x) - pose.theta)
        omega = float(np.clip(2.0 * v * math.sin(alpha) / expert.lookahead, -expert.omega_max, expert.omega_max))
        frames.append(
            Frame(
                stamp=stamp,
                points=render_pointcloud(world, pose, lidar).astype(np.float32),
                image=render_image(world, pose, camera),
                odom=pose,
                action=VelocityCommand(v, omega),
            )
        )
        if len(frames) >= 2 and math.hypot(world.goal[0] - pose.x, world.goal[1] - pose.y) < expert.goal_tolerance:
            break
        world = step_pedestrians(world, pose, dt)
        pose = _integrate(pose, v, omega, dt)
    spec = world.spec
    return Episode(
        id=episode_id or f"{spec.scenario}_{spec.seed:05d}",
        scenario=spec.scenario,
        frames=tuple(frames),
        rate_hz=1.0 / dt,
        metadata={"seed": spec.seed},
    )


# presets ------------------------------------------------------------------------

PRESETS = ("with_traffic", "against_traffic", "street_crossing", "narrow_hall", "zone_semantic", "geometry_maze")


def _semantic_zones(rng, spec_extent, width):
    zones = []
    x = rng.uniform(1.0, 3.0)
    while x < spec_extent - 2.0:
        length = rng.uniform(1.5, 3.5)
        decoy = rng.random() < 0.3
        zones.append(
            Zone(
                (float(x), -width / 2 - 2.0, float(x + length), width / 2 + 2.0),
                DECOY_BLUE if decoy else SLOW_RED,
                1.0 if decoy else 0.4,
            )
        )
        x += length + rng.uniform(1.5, 4.0)
    return tuple(zones)


def preset_world_spec(name: str, seed: int) -> WorldSpec:
    """World spec for one of the named scenario presets."""
    if name == "with_traffic":
        return WorldSpec(seed, 16.0, 2, 4, "social_force_lite", scenario=name, ped_flow="with",
                         heading_jitter=0.2, goal_jitter=1.5)
    if name == "against_traffic":
        return WorldSpec(seed, 16.0, 2, 5, "social_force_lite", scenario=name, ped_flow="against",
                         heading_jitter=0.2, goal_jitter=1.5)
    if name == "street_crossing":
        return WorldSpec(seed, 16.0, 1, 4, "constant_velocity", scenario=name, ped_flow="crossing",
                         heading_jitter=0.2, goal_jitter=1.5)
    if name == "narrow_hall":
        return WorldSpec(seed, 16.0, 0, 2, "social_force_lite", scenario=name, width=3.2, layout="walls",
                         ped_flow="against", heading_jitter=0.1, goal_jitter=0.5)
    if name == "zone_semantic":
        rng = np.random.default_rng([seed, 7])
        return WorldSpec(seed, 16.0, 0, 0, semantic_zones=_semantic_zones(rng, 16.0, 8.0), scenario=name,
                         heading_jitter=0.4, goal_jitter=2.0)
    if name == "geometry_maze":
        return WorldSpec(seed, 16.0, 3, 6, "constant_velocity", scenario=name, layout="maze", ped_flow="standing",
                         heading_jitter=0.2, goal_jitter=1.0, render_geometry=False, render_pedestrians=False)
    raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")


def preset_expert(name: str) -> ExpertConfig:
    return ExpertConfig(v_nominal=1.0, slow_radius=2.0, zone_obedience=True, slow_front_only=True)


def generate_preset_episode(name: str, seed: int, T: float = 40.0, dt: float = 0.2) -> Episode:
    spec = preset_world_spec(name, seed)
    return simulate_episode(gen_world(spec), preset_expert(name), T=T, dt=dt)
