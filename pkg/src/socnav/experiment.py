"""Experiment specs and the four pipeline commands behind the ``socnav`` CLI.

Output layout under ``out``::

    manifest.json                      splits, episode ids and paths
    episodes/{train,test}/<id>/        episode directories
    runs/<variant>/seed_<s>/model.pt   final checkpoint
    runs/<variant>/seed_<s>/history.csv
    compare/comparison.csv             per-scenario seed mean / std / median
    compare/per_sample.csv             every (method, seed, sample) loss row
    compare/history.csv                baseline records (split=baseline:<kind>)
    compare/loss_<scenario>.png, compare/loss_aggregate.png
"""

from __future__ import annotations

import csv
import json
import logging
import shutil
import statistics
from collections import defaultdict
from dataclasses import asdict, dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from . import synthgen
from .baselines import KINDS, BaselineConfig, DWAConfig, score_baseline
from .episodes import PTS_DTYPE, load_episode, save_episode
from .errors import EpisodeFormatError, InputError, MissingPrerequisite
from .network import MODALITIES, ModelConfig, load_checkpoint, save_checkpoint
from .sampling import build_dataset
from .trainer import (
    TrainConfig,
    evaluate,
    read_history,
    train,
    write_history,
    write_per_sample,
)
from .voxelizer import GridSpec, voxelize, write_grid

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
SPLITS = ("train", "test")
COMPARISON_FIELDS = [
    "method", "kind", "scenario", "n_seeds",
    "total_mean", "total_std", "total_median",
    "global_l2_mean", "local_l1_mean", "global_l1_mean",
]


@dataclass
class DataSpec:
    presets: list[str] = field(default_factory=lambda: ["zone_semantic", "geometry_maze"])
    train_episodes: int = 10  # per preset
    test_episodes: int = 3
    train_seed_start: int = 100
    test_seed_start: int = 900
    T: float = 40.0
    dt: float = 0.2
    stride: int = 5
    train_samples: int | None = None  # evenly spaced subsample cap
    test_samples: int | None = None

    def __post_init__(self):
        bad = [p for p in self.presets if p not in synthgen.PRESETS]
        if not self.presets or bad:
            raise InputError(f"unknown presets {bad}; choose from {synthgen.PRESETS}")
        if self.train_episodes < 1 or self.test_episodes < 1:
            raise InputError("each split needs at least one episode per preset")
        if self.stride < 1:
            raise InputError("stride must be >= 1")
        train, test = set(self.seeds("train")), set(self.seeds("test"))
        if train & test:
            raise InputError(f"train and test episode seeds overlap: {sorted(train & test)[:5]}")

    def seeds(self, split: str) -> list[int]:
        if split == "train":
            return list(range(self.train_seed_start, self.train_seed_start + self.train_episodes))
        return list(range(self.test_seed_start, self.test_seed_start + self.test_episodes))


@dataclass
class ExperimentSpec:
    name: str
    data: DataSpec
    models: dict[str, ModelConfig]
    train: TrainConfig
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    baselines: list[BaselineConfig] = field(default_factory=list)
    grid: GridSpec = field(default_factory=GridSpec)
    out: str | None = None

    def __post_init__(self):
        if not self.models:
            raise InputError("spec needs at least one model variant")
        if not self.seeds:
            raise InputError("spec needs at least one seed")
        if len(set(self.seeds)) != len(self.seeds):
            raise InputError("seeds must be distinct")

    @property
    def variants(self) -> list[str]:
        return list(self.models)


def _build(cls, raw, what):
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        raise InputError(f"{what}: expected a mapping, got {type(raw).__name__}")
    known = {f.name for f in fields(cls)}
    extra = set(raw) - known
    if extra:
        raise InputError(f"{what}: unknown keys {sorted(extra)}")
    try:
        return cls(**raw)
    except TypeError as exc:
        raise InputError(f"{what}: {exc}") from exc


def spec_from_dict(raw: dict) -> ExperimentSpec:
    if not isinstance(raw, dict) or "name" not in raw:
        raise InputError("experiment spec must be a mapping with a 'name'")
    extra = set(raw) - {"name", "data", "model", "train", "seeds", "baselines", "grid", "out"}
    if extra:
        raise InputError(f"unknown top-level keys {sorted(extra)}")

    model_raw = dict(raw.get("model") or {v: {} for v in MODALITIES})
    shared = model_raw.pop("shared", {}) or {}
    bad = set(model_raw) - set(MODALITIES)
    if bad:
        raise InputError(f"model: unknown variants {sorted(bad)}; choose from {MODALITIES}")
    models = {v: _build(ModelConfig, {**shared, **(o or {}), "modality": v}, f"model.{v}") for v, o in model_raw.items()}

    train_raw = dict(raw.get("train") or {})
    if "seed" in train_raw:
        raise InputError("train.seed is not allowed; list seeds at the top level")
    base_raw = dict(raw.get("baselines") or {"kinds": list(KINDS)})
    kinds = base_raw.pop("kinds", list(KINDS))
    dwa = _build(DWAConfig, base_raw.pop("dwa", None), "baselines.dwa")
    baselines = [_build(BaselineConfig, {**base_raw, "kind": k, "dwa": dwa}, "baselines") for k in kinds]

    grid_raw = dict(raw.get("grid") or {})
    for key in ("x_range", "y_range"):
        if key in grid_raw:
            grid_raw[key] = tuple(grid_raw[key])
    return ExperimentSpec(
        name=str(raw["name"]),
        data=_build(DataSpec, raw.get("data"), "data"),
        models=models,
        train=_build(TrainConfig, train_raw, "train"),
        seeds=[int(s) for s in raw.get("seeds", [0, 1, 2])],
        baselines=baselines,
        grid=_build(GridSpec, grid_raw, "grid"),
        out=raw.get("out"),
    )


def load_spec(path) -> ExperimentSpec:
    """Read an experiment spec from YAML. ``builtin:<name>`` loads a bundled spec."""
    path = str(path)
    if path.startswith("builtin:"):
        text = resources.files("socnav.specs").joinpath(path.split(":", 1)[1] + ".yaml").read_text()
    else:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise MissingPrerequisite(f"spec file {path} does not exist") from None
    try:
        raw = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"{path}: not valid YAML ({exc})") from exc
    return spec_from_dict(raw)


def default_out(spec: ExperimentSpec) -> Path:
    return Path(spec.out or Path("runs") / spec.name)


# data -----------------------------------------------------------------------------

def cmd_gen_data(spec: ExperimentSpec, out, force: bool = False) -> dict:
    """Generate every train/test episode and write ``manifest.json``."""
    out = Path(out)
    if out.exists() and any(out.iterdir()):
        if not force:
            raise InputError(f"{out} is not empty; pass --force to regenerate")
        # only remove what this command owns
        shutil.rmtree(out / "episodes", ignore_errors=True)
        (out / MANIFEST).unlink(missing_ok=True)
    d = spec.data
    manifest = {"name": spec.name, "data": asdict(d), "splits": {}}
    for split in SPLITS:
        entries = []
        for preset in d.presets:
            for seed in d.seeds(split):
                ep = synthgen.generate_preset_episode(preset, seed, T=d.T, dt=d.dt)
                rel = Path("episodes") / split / ep.id
                save_episode(ep, out / rel)
                entries.append({"id": ep.id, "preset": preset, "seed": seed, "path": rel.as_posix(),
                                "n_frames": len(ep.frames)})
        manifest["splits"][split] = entries
        log.info("%s: %d episodes", split, len(entries))
    (out / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return manifest


def read_manifest(out) -> dict:
    path = Path(out) / MANIFEST
    if not path.is_file():
        raise MissingPrerequisite(f"{path} not found; run `socnav gen-data` first")
    return json.loads(path.read_text(encoding="utf-8"))


def _subsample(samples, n):
    if n is None or n >= len(samples):
        return samples
    idx = np.linspace(0, len(samples) - 1, n).round().astype(int)
    return [samples[i] for i in idx]


def load_samples(spec: ExperimentSpec, out, split: str):
    manifest = read_manifest(out)
    eps = [load_episode(Path(out) / e["path"]) for e in manifest["splits"][split]]
    samples, skipped = build_dataset(eps, spec.data.stride, spec.grid)
    cap = spec.data.train_samples if split == "train" else spec.data.test_samples
    samples = _subsample(samples, cap)
    log.info("%s: %d samples (%d strided frames skipped)", split, len(samples), skipped)
    return samples


# training -------------------------------------------------------------------------

def run_dir(out, variant: str, seed: int) -> Path:
    return Path(out) / "runs" / variant / f"seed_{seed}"


def cmd_train(spec: ExperimentSpec, out, variant: str | None = None) -> dict:
    """Train each requested variant once per seed. Returns ``{(variant, seed): history}``."""
    variants = [variant] if variant else spec.variants
    for v in variants:
        if v not in spec.models:
            raise InputError(f"variant {v!r} is not configured in spec {spec.name!r}")
    train_samples = load_samples(spec, out, "train")
    test_samples = load_samples(spec, out, "test")
    results = {}
    for v in variants:
        for seed in spec.seeds:
            cfg = TrainConfig(**{**asdict(spec.train), "seed": seed})
            d = run_dir(out, v, seed)
            model, history = train(train_samples, spec.models[v], cfg, test_samples=test_samples,
                                   checkpoint_dir=d if cfg.checkpoint_every else None)
            write_history(d / "history.csv", history)
            final = [r for r in history if r.split == "test" and r.scenario == "all"][-1]
            save_checkpoint(d / "model.pt", model, {"spec": spec.name, "variant": v, "seed": seed,
                                                     "test_total": final.total})
            log.info("%s seed %d: final test total %.5f", v, seed, final.total)
            results[(v, seed)] = history
    return results


# comparison -----------------------------------------------------------------------

def _mean(xs):
    return sum(xs) / len(xs)


def comparison_rows(per_sample_rows) -> list[dict]:
    """Seed statistics of per-scenario means, from ``(method, kind, seed, SampleLoss)`` rows."""
    by_seed = defaultdict(list)  # (method, kind, scenario, seed) -> rows
    for method, kind, seed, s in per_sample_rows:
        by_seed[(method, kind, s.scenario, seed)].append(s)
        by_seed[(method, kind, "all", seed)].append(s)
    grouped = defaultdict(dict)  # (method, kind, scenario) -> seed -> means
    for (method, kind, scenario, seed), rows in by_seed.items():
        grouped[(method, kind, scenario)][seed] = {
            k: _mean([getattr(r, k) for r in rows]) for k in ("total", "global_l2", "local_l1", "global_l1")
        }
    out = []
    for (method, kind, scenario), seeds in sorted(grouped.items()):
        totals = [m["total"] for m in seeds.values()]
        out.append({
            "method": method,
            "kind": kind,
            "scenario": scenario,
            "n_seeds": len(seeds),
            "total_mean": _mean(totals),
            "total_std": statistics.pstdev(totals),
            "total_median": statistics.median(totals),
            "global_l2_mean": _mean([m["global_l2"] for m in seeds.values()]),
            "local_l1_mean": _mean([m["local_l1"] for m in seeds.values()]),
            "global_l1_mean": _mean([m["global_l1"] for m in seeds.values()]),
        })
    return out


def _write_csv(path, fieldnames, rows):
    with Path(path).open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=fieldnames)
        w.writeheader()
        for r in rows:
            w.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})


def read_comparison(path) -> list[dict]:
    with Path(path).open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    for r in rows:
        r["n_seeds"] = int(r["n_seeds"])
        for k in COMPARISON_FIELDS[4:]:
            r[k] = float(r[k])
    return rows


def cmd_compare(spec: ExperimentSpec, out) -> list[dict]:
    """Score trained checkpoints and baselines on the test split; write tables and plots."""
    out = Path(out)
    missing = [f"{v} (seed {s})" for v in spec.variants for s in spec.seeds
               if not (run_dir(out, v, s) / "model.pt").is_file()]
    if missing:
        raise MissingPrerequisite(
            f"no trained checkpoint for {', '.join(missing)}; run `socnav train --variant <name>` first"
        )
    test_samples = load_samples(spec, out, "test")
    rows, curves = [], {}
    for v in spec.variants:
        for seed in spec.seeds:
            model, _ = load_checkpoint(run_dir(out, v, seed) / "model.pt")
            res = evaluate(model, test_samples, lam=spec.train.lam)
            rows += [(v, "variant", seed, s) for s in res.per_sample]
            curves[(v, seed)] = [r for r in read_history(run_dir(out, v, seed) / "history.csv") if r.split == "test"]
    baseline_records = []
    for b in spec.baselines:
        res = score_baseline(b, test_samples, lam=spec.train.lam)
        rows += [(b.kind, "baseline", 0, s) for s in res.per_sample]
        baseline_records += [res.record, *res.per_scenario.values()]

    cdir = out / "compare"
    cdir.mkdir(parents=True, exist_ok=True)
    table = comparison_rows(rows)
    _write_csv(cdir / "comparison.csv", COMPARISON_FIELDS, table)
    write_per_sample(cdir / "per_sample.csv", [(m, seed, s) for m, _, seed, s in rows])
    write_history(cdir / "history.csv", baseline_records)
    plot_curves(cdir, spec, curves, table)
    return table


def plot_curves(cdir: Path, spec: ExperimentSpec, curves, table) -> list[Path]:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    scenarios = sorted({r.scenario for hist in curves.values() for r in hist})
    baseline_final = {(r["method"], r["scenario"]): r["total_mean"] for r in table if r["kind"] == "baseline"}
    written = []
    for sc in scenarios:
        fig, ax = plt.subplots(figsize=(6, 4))
        for v in spec.variants:
            per_seed = [{r.epoch: r.total for r in curves[(v, s)] if r.scenario == sc} for s in spec.seeds]
            epochs = sorted(set.intersection(*(set(p) for p in per_seed)))
            vals = np.array([[p[e] for e in epochs] for p in per_seed])
            ax.plot(epochs, vals.mean(0), label=v)
            ax.fill_between(epochs, vals.min(0), vals.max(0), alpha=0.2)
        for b in spec.baselines:
            if (b.kind, sc) in baseline_final:
                ax.axhline(baseline_final[(b.kind, sc)], ls="--", lw=1, label=b.kind, color="gray" if b.kind == "dwa_lite" else "k")
        ax.set_xlabel("epoch")
        ax.set_ylabel("test loss (total)")
        ax.set_title(f"{spec.name}: {sc}")
        ax.legend(fontsize=8)
        path = cdir / f"loss_{sc}.png"
        fig.tight_layout()
        fig.savefig(path, dpi=100)
        plt.close(fig)
        written.append(path)

    final = [r for r in table if r["scenario"] == "all"]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar([r["method"] for r in final], [r["total_mean"] for r in final],
           yerr=[r["total_std"] for r in final], capsize=4)
    ax.set_ylabel("average test loss (total)")
    ax.set_title(f"{spec.name}: all scenarios")
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right")
    fig.tight_layout()
    path = cdir / "loss_aggregate.png"
    fig.savefig(path, dpi=100)
    plt.close(fig)
    written.append(path)
    return written


# voxelize -------------------------------------------------------------------------

def read_points(path) -> np.ndarray:
    """Points file: ``.npy`` (n, 3) array, or raw little-endian float32 xyz triples."""
    path = Path(path)
    if not path.is_file():
        raise MissingPrerequisite(f"points file {path} does not exist")
    if path.suffix == ".npy":
        try:
            pts = np.load(path, allow_pickle=False)
        except ValueError as exc:
            raise EpisodeFormatError(f"not a valid .npy array ({exc})", path.name) from exc
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise EpisodeFormatError(f"array shape {pts.shape}, expected (n, 3)", path.name)
        return pts
    raw = path.read_bytes()
    if len(raw) % (3 * PTS_DTYPE.itemsize):
        raise EpisodeFormatError(f"{len(raw)} bytes is not a whole number of float32 xyz triples", path.name)
    return np.frombuffer(raw, dtype=PTS_DTYPE).reshape(-1, 3)


def cmd_voxelize(points_file, out, grid: GridSpec = GridSpec()) -> int:
    """Voxelize one points file into ``out/grid.vox``; returns the occupied-cell count."""
    vg = voxelize(read_points(points_file), grid)
    Path(out).mkdir(parents=True, exist_ok=True)
    write_grid(vg, Path(out) / "grid.vox")
    return vg.n_occupied
