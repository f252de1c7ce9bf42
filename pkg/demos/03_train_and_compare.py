"""Train a small multimodal policy for a few epochs and score it next to the
two classical baselines on held-out episodes.

Takes a couple of minutes on one CPU core.  Run:  python demos/03_train_and_compare.py
"""

# %%
from socnav import synthgen
from socnav.baselines import BaselineConfig, score_baseline
from socnav.network import ModelConfig
from socnav.sampling import build_dataset
from socnav.trainer import TrainConfig, evaluate, train


def dataset(seeds):
    eps = [synthgen.generate_preset_episode(p, s, T=20.0) for p in ("zone_semantic", "geometry_maze") for s in seeds]
    return build_dataset(eps, stride=4)[0]


train_set, test_set = dataset(range(4)), dataset(range(50, 52))
print(len(train_set), "train samples,", len(test_set), "test samples")

# %% A reduced network so the demo stays quick; ModelConfig() is the full default.
cfg = ModelConfig(modality="multimodal", img_channels=[8, 16], vox_channels=[4, 8], embed_dim=32,
                  rnn_hidden=32, tf_heads=4, head_hidden=32)
model, history = train(train_set, cfg, TrainConfig(epochs=15, lr=3e-3, seed=0, eval_every=5), test_samples=test_set)
for r in history:
    if r.scenario == "all":
        print(f"epoch {r.epoch:3d} {r.split:5s} total {r.total:.4f}")

# %% Held-out comparison, per scenario.
results = {"multimodal": evaluate(model, test_set)}
for kind in ("straight_pursuit", "dwa_lite"):
    results[kind] = score_baseline(BaselineConfig(kind=kind), test_set)
for name, res in results.items():
    per = "  ".join(f"{sc} {rec.total:.3f}" for sc, rec in sorted(res.per_scenario.items()))
    print(f"{name:17s} all {res.record.total:.3f}  {per}")
