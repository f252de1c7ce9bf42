"""From a recorded expert episode to supervised training samples.

Each sample pairs the sensor input at time t with the expert's next 2.5 m of
path (5 waypoints, 0.5 m apart, robot frame) and its velocity command.

Run:  python demos/02_episodes_to_samples.py
"""

# %%
import tempfile

import numpy as np

from socnav import synthgen
from socnav.episodes import episodes_equal, load_episode, save_episode, validate_episode
from socnav.sampling import build_dataset, extract_global_plan, extract_goal

ep = synthgen.generate_preset_episode("with_traffic", seed=2, T=20.0)
print(f"{len(ep.frames)} frames, scenario {ep.scenario}, problems: {validate_episode(ep)}")

# %% Episodes round-trip through the on-disk layout unchanged.
with tempfile.TemporaryDirectory() as d:
    path = save_episode(ep, d)
    print("saved to", path.name, "| identical after reload:", episodes_equal(ep, load_episode(path)))

# %% Goal and waypoints at one timestep.
t = 10
np.set_printoptions(precision=3, suppress=True)
print("goal (robot frame):", extract_goal(ep, t))
print("waypoints:\n", extract_global_plan(ep, t).waypoints)
print("expert command:", ep.frames[t].action)

# %% A dataset: every 5th frame; the tail without 2.5 m of future path is skipped.
samples, skipped = build_dataset([ep], stride=5)
print(f"{len(samples)} samples, {skipped} skipped")
s = samples[0]
print("voxels", s.input.voxels.occ.shape, "image", s.input.image.shape, "action", s.action.action)
