"""Shared test utilities: synthetic samples and a finite-difference oracle."""

import numpy as np
import torch

from socnav.episodes import VelocityCommand
from socnav.sampling import GlobalPlan, LocalPlan, NavigationInput, TrainingSample
from socnav.voxelizer import voxelize


def random_sample(rng, scenario="s", idx=0, n_points=300):
    pts = rng.uniform([0, -3, -0.5], [8, 3, 2], size=(n_points, 3))
    goal = rng.uniform([1.0, -1.5], [2.5, 1.5])
    wp = np.linspace(0, 1, 6)[1:, None] * goal[None, :] + rng.normal(0, 0.05, (5, 2))
    return TrainingSample(
        input=NavigationInput(voxelize(pts), rng.integers(0, 256, (224, 224, 3), dtype=np.uint8), goal),
        plan=GlobalPlan(wp),
        action=LocalPlan(VelocityCommand(float(rng.uniform(0.3, 1.2)), float(rng.uniform(-0.8, 0.8)))),
        episode_id=f"ep{idx // 4}",
        t_index=idx,
        scenario=scenario,
    )


def random_samples(n, seed=0, scenarios=("a", "b")):
    rng = np.random.default_rng(seed)
    return [random_sample(rng, scenarios[i % len(scenarios)], i) for i in range(n)]


def finite_difference_check(model, loss_fn, h=1e-5):
    """Compare autograd gradients with central differences for every parameter entry.

    Returns (worst relative error, number of entries checked). Relative error is
    |a - f| / max(|a|, |f|) where that scale exceeds 1e-7, and |a - f| / 1e-7
    below it (so tiny gradients must agree absolutely).
    """
    model.zero_grad()
    loss_fn().backward()
    worst, n = 0.0, 0
    with torch.no_grad():
        for p in model.parameters():
            analytic = p.grad.detach().clone().reshape(-1)
            flat = p.data.view(-1)
            for i in range(flat.numel()):
                orig = flat[i].item()
                flat[i] = orig + h
                up = loss_fn().item()
                flat[i] = orig - h
                down = loss_fn().item()
                flat[i] = orig
                fd = (up - down) / (2 * h)
                a = analytic[i].item()
                scale = max(abs(a), abs(fd), 1e-7)
                worst = max(worst, abs(a - fd) / scale)
                n += 1
    return worst, n
