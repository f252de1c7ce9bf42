"""Behavior-cloning objective, training loop and loss reporting.

Per sample::

    global_l2 = mean_i ||w_pred_i - w_demo_i||^2         (over the 5 waypoints)
    local_l1  = (|v_pred - v_demo| + |w_pred - w_demo|) / 2
    total     = global_l2 + lambda * local_l1

``global_l1`` (mean absolute per-coordinate waypoint error) is reported
alongside but never optimized.
"""

from __future__ import annotations

import csv
import logging
import math
import os
from collections import defaultdict
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch

from .errors import InputError, NonFiniteLoss
from .network import (
    ModelConfig,
    NavPolicy,
    NetworkOutput,
    batch_inputs,
    build_model,
    save_checkpoint,
)

log = logging.getLogger(__name__)

HISTORY_FIELDS = ["epoch", "split", "scenario", "global_l2", "global_l1", "local_l1", "total"]
ALL_SCENARIOS = "all"


@dataclass
class TrainConfig:
    lam: float = 1.0
    lr: float = 1e-3
    batch: int = 16
    epochs: int = 10
    seed: int = 0
    grad_clip: float = 10.0
    steps: int | None = None  # overrides epochs when set
    checkpoint_every: int = 0
    eval_every: int = 1
    num_threads: int | None = 1

    def __post_init__(self):
        if self.lam < 0:
            raise InputError("lambda must be >= 0")
        if not self.lr > 0:
            raise InputError("learning rate must be > 0")
        if self.batch < 1:
            raise InputError("batch must be >= 1")


@dataclass
class LossRecord:
    epoch: int
    split: str
    global_l2: float
    local_l1: float
    global_l1: float
    total: float
    scenario: str = ALL_SCENARIOS

    def row(self) -> dict:
        return {k: getattr(self, k) for k in HISTORY_FIELDS}


@dataclass
class SampleLoss:
    episode_id: str
    t_index: int
    scenario: str
    global_l2: float
    global_l1: float
    local_l1: float
    total: float


@dataclass
class EvalResult:
    record: LossRecord
    per_sample: list[SampleLoss]
    per_scenario: dict[str, LossRecord] = field(default_factory=dict)


def _loss_terms(pred_wp, pred_act, demo_wp, demo_act, lam):
    """Per-sample (total, global_l2, local_l1, global_l1); works for torch and numpy batches."""
    diff = pred_wp - demo_wp
    global_l2 = (diff**2).sum(-1).mean(-1)
    global_l1 = abs(diff).mean((-1, -2))
    local_l1 = abs(pred_act - demo_act).mean(-1)
    return global_l2 + lam * local_l1, global_l2, local_l1, global_l1


def bc_loss(pred: NetworkOutput, demo, lam: float = 1.0) -> tuple[float, float, float]:
    """Return ``(total, global_l2, local_l1)`` for one prediction.

    ``demo`` is a ``(GlobalPlan, LocalPlan)`` pair or a ``(waypoints, (v, omega))`` pair.
    """
    plan, local = demo
    demo_wp = np.asarray(getattr(plan, "waypoints", plan), dtype=np.float64)
    if hasattr(local, "action"):
        local = (local.action.v, local.action.omega)
    demo_act = np.asarray(local, dtype=np.float64)
    pred_wp = np.asarray(pred.waypoints, dtype=np.float64)
    pred_act = np.asarray(pred.action, dtype=np.float64)
    if pred_wp.shape != (5, 2) or demo_wp.shape != (5, 2):
        raise InputError(f"waypoint shapes {pred_wp.shape} / {demo_wp.shape}, expected (5, 2)")
    if pred_act.shape != (2,) or demo_act.shape != (2,):
        raise InputError(f"action shapes {pred_act.shape} / {demo_act.shape}, expected (2,)")
    total, g2, l1, _ = _loss_terms(pred_wp, pred_act, demo_wp, demo_act, lam)
    return float(total), float(g2), float(l1)


def demo_targets(samples, dtype=torch.float32):
    wp = torch.as_tensor(np.stack([s.plan.waypoints for s in samples]), dtype=dtype)
    act = torch.as_tensor([[s.action.action.v, s.action.action.omega] for s in samples], dtype=dtype)
    return wp, act


def batch_loss(model: NavPolicy, samples, lam: float, dtype=torch.float32):
    """Mean BC loss over a batch as a differentiable scalar, plus per-sample terms."""
    images, voxels, goals = batch_inputs([s.input for s in samples], model.config, dtype)
    pred_wp, pred_act = model(images, voxels, goals)
    demo_wp, demo_act = demo_targets(samples, dtype)
    total, g2, l1, gl1 = _loss_terms(pred_wp, pred_act, demo_wp, demo_act, lam)
    return total.mean(), (total, g2, l1, gl1)


def _aggregate(epoch, split, rows: Sequence[SampleLoss], scenario=ALL_SCENARIOS) -> LossRecord:
    n = len(rows)
    return LossRecord(
        epoch=epoch,
        split=split,
        scenario=scenario,
        global_l2=sum(r.global_l2 for r in rows) / n,
        local_l1=sum(r.local_l1 for r in rows) / n,
        global_l1=sum(r.global_l1 for r in rows) / n,
        total=sum(r.total for r in rows) / n,
    )


def summarize(per_sample: Sequence[SampleLoss], epoch=0, split="test") -> EvalResult:
    """Overall and per-scenario mean records from per-sample losses."""
    if not per_sample:
        raise InputError("no samples to summarize")
    groups = defaultdict(list)
    for r in per_sample:
        groups[r.scenario].append(r)
    per_scenario = {sc: _aggregate(epoch, split, rows, sc) for sc, rows in sorted(groups.items())}
    return EvalResult(_aggregate(epoch, split, per_sample), list(per_sample), per_scenario)


def evaluate(model: NavPolicy, samples, config: ModelConfig | None = None, lam: float = 1.0,
             epoch: int = 0, split: str = "test", batch: int = 32) -> EvalResult:
    """Score ``model`` on ``samples`` without touching its parameters."""
    if not samples:
        raise InputError("evaluate needs at least one sample")
    if config is not None and config.modality != model.config.modality:
        raise InputError(f"model modality {model.config.modality!r} != config {config.modality!r}")
    was_training = model.training
    model.eval()
    dtype = model._dtype()
    per_sample = []
    with torch.no_grad():
        for start in range(0, len(samples), batch):
            chunk = samples[start:start + batch]
            _, (total, g2, l1, gl1) = batch_loss(model, chunk, lam, dtype)
            for s, a, b, c, d in zip(chunk, total.tolist(), g2.tolist(), l1.tolist(), gl1.tolist()):
                per_sample.append(SampleLoss(s.episode_id, s.t_index, s.scenario, b, d, c, a))
    model.train(was_training)
    return summarize(per_sample, epoch, split)


def predict(model: NavPolicy, samples, batch: int = 32) -> list[NetworkOutput]:
    out = []
    model.eval()
    with torch.no_grad():
        for start in range(0, len(samples), batch):
            chunk = samples[start:start + batch]
            wp, act = model(*batch_inputs([s.input for s in chunk], model.config, model._dtype()))
            out += [NetworkOutput(w.double().numpy(), a.double().numpy()) for w, a in zip(wp, act)]
    return out


def train(samples, model_config: ModelConfig, train_config: TrainConfig, test_samples=None,
          checkpoint_dir: str | os.PathLike | None = None, dtype=torch.float32, model: NavPolicy | None = None):
    """Mini-batch Adam on the mean BC loss.

    Returns ``(model, history)``. ``history`` holds one train record per epoch
    (the mean of the per-sample losses seen during that epoch) and, when
    ``test_samples`` is given, overall and per-scenario test records every
    ``eval_every`` epochs. With ``num_threads=1`` (the default) two runs with
    the same seed are bit-identical.
    """
    if not samples:
        raise InputError("cannot train on an empty dataset")
    cfg = train_config
    if cfg.num_threads:
        torch.set_num_threads(cfg.num_threads)
    torch.manual_seed(cfg.seed)
    if model is None:
        model = build_model(model_config, seed=cfg.seed, dtype=dtype)
    model.train()
    opt = torch.optim.Adam(model.parameters(), lr=cfg.lr)
    gen = torch.Generator().manual_seed(cfg.seed)

    n = len(samples)
    steps_per_epoch = math.ceil(n / cfg.batch)
    epochs = cfg.epochs if cfg.steps is None else math.ceil(cfg.steps / steps_per_epoch)
    step = 0
    history: list[LossRecord] = []
    for epoch in range(1, epochs + 1):
        order = torch.randperm(n, generator=gen).tolist()
        seen = []
        for b, start in enumerate(range(0, n, cfg.batch)):
            if cfg.steps is not None and step >= cfg.steps:
                break
            chunk = [samples[i] for i in order[start:start + cfg.batch]]
            loss, (total, g2, l1, gl1) = batch_loss(model, chunk, cfg.lam, dtype)
            if not torch.isfinite(loss):
                ids = [(s.episode_id, s.t_index) for s in chunk]
                raise NonFiniteLoss(f"non-finite loss at epoch {epoch}, batch {b}: samples {ids}", batch_index=b)
            opt.zero_grad()
            loss.backward()
            if cfg.grad_clip:
                torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip)
            opt.step()
            step += 1
            for s, a, g, l, c in zip(chunk, total.tolist(), g2.tolist(), l1.tolist(), gl1.tolist()):
                seen.append(SampleLoss(s.episode_id, s.t_index, s.scenario, g, c, l, a))
        history.append(_aggregate(epoch, "train", seen))
        if test_samples and (epoch % cfg.eval_every == 0 or epoch == epochs):
            res = evaluate(model, test_samples, lam=cfg.lam, epoch=epoch, split="test")
            history.append(res.record)
            history.extend(res.per_scenario.values())
        if checkpoint_dir and cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
            save_checkpoint(Path(checkpoint_dir) / f"epoch_{epoch:04d}.pt", model,
                            {"seed": cfg.seed, "epoch": epoch, "loss": history[-1].total})
        log.debug("epoch %d train total %.5f", epoch, history[-1].total)
    model.eval()
    return model, history


def write_history(path, records: Sequence[LossRecord], append: bool = False) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    new = not (append and path.exists())
    with path.open("a" if append else "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=HISTORY_FIELDS)
        if new:
            w.writeheader()
        for r in records:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.row().items()})
    return path


def read_history(path) -> list[LossRecord]:
    with Path(path).open(newline="") as fh:
        return [
            LossRecord(
                epoch=int(row["epoch"]),
                split=row["split"],
                scenario=row["scenario"],
                global_l2=float(row["global_l2"]),
                global_l1=float(row["global_l1"]),
                local_l1=float(row["local_l1"]),
                total=float(row["total"]),
            )
            for row in csv.DictReader(fh)
        ]


PER_SAMPLE_FIELDS = ["method", "seed", "episode_id", "t_index", "scenario", "global_l2", "global_l1", "local_l1", "total"]


def write_per_sample(path, rows: Sequence[tuple[str, int, SampleLoss]]) -> Path:
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=PER_SAMPLE_FIELDS)
        w.writeheader()
        for method, seed, s in rows:
            d = asdict(s)
            d.update(method=method, seed=seed)
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in d.items()})
    return path
