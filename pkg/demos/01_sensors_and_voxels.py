"""Walk through one synthetic scene: what the camera sees, what the lidar sees,
and how the point cloud becomes the occupancy grid the network consumes.

Run:  python demos/01_sensors_and_voxels.py
"""

# %% A maze world: boxes are hidden from the camera, so only the lidar sees them.
from socnav import synthgen
from socnav.voxelizer import DEFAULT_SPEC, voxelize

spec = synthgen.preset_world_spec("geometry_maze", seed=4)
world = synthgen.gen_world(spec)
print(f"{len(world.obstacles)} boxes, {len(world.peds)} pedestrians, start {world.start}")

# %% Render both sensors from the start pose.
pts = synthgen.render_pointcloud(world, world.start)
img = synthgen.render_image(world, world.start)
print("point cloud", pts.shape, "image", img.shape, img.dtype)
print("distinct image colours:", len({tuple(c) for c in img.reshape(-1, 3)}))

# %% Voxelize: 8 m ahead, 3 m to each side, 2.5 m of height, 5 cm cells.
grid = voxelize(pts)
print("grid dims", DEFAULT_SPEC.dims, "occupied cells", grid.n_occupied)

# %% The bird's-eye footprint is what the dwa_lite baseline plans against.
fp = grid.footprint()
coarse = fp.reshape(40, 4, 20, 6).any(axis=(1, 3))  # 20 cm x 30 cm blocks
for row in coarse.T[::-1]:  # x to the right, +y (left of the robot) on top
    print("".join("#" if c else "." for c in row))

# %% The painted zone preset is the opposite case: its cue exists only in the image.
zworld = synthgen.gen_world(synthgen.preset_world_spec("zone_semantic", seed=4))
print("zones:", [(z.region, z.speed_factor) for z in zworld.zones])
