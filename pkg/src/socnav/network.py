"""Image-only, point-cloud-only and fused navigation policies.

Each variant maps (perception, goal) to a 5-waypoint global plan and then,
from the waypoints plus the recurrent features, to a (v, omega) command.

Parameter names are prefixed so they split cleanly into the global-planner
set (``theta``: encoders, recurrent cells, global fusion, global head) and
the local-planner set (``phi``: waypoint embedder, local fusion, transformer,
action head).
"""

from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .errors import InputError
from .sampling import NavigationInput
from .voxelizer import DEFAULT_SPEC

MODALITIES = ("rgb", "lidar", "multimodal")
IMAGE_SHAPE = (224, 224, 3)
N_WAYPOINTS = 5

THETA_PREFIXES = ("img_enc.", "vox_enc.", "rnn_img.", "rnn_vox.", "fuse_global.", "global_head.")
PHI_PREFIXES = ("wp_embed.", "wp_norm.", "local_norm.", "fuse_local.", "token_pos", "transformer.", "local_head.")

CHECKPOINT_FORMAT = "socnav-checkpoint"
CHECKPOINT_VERSION = 1


@dataclass
class ModelConfig:
    modality: str = "multimodal"
    img_channels: list[int] = field(default_factory=lambda: [16, 32, 64])
    vox_channels: list[int] = field(default_factory=lambda: [8, 16, 32])
    embed_dim: int = 128
    rnn_hidden: int = 128
    tf_layers: int = 2
    tf_heads: int = 4
    M: int = N_WAYPOINTS
    scale: str = "desk"
    head_hidden: int = 128
    grid_dims: tuple[int, int, int] = DEFAULT_SPEC.dims

    def __post_init__(self):
        self.grid_dims = tuple(self.grid_dims)
        if self.modality not in MODALITIES:
            raise InputError(f"modality must be one of {MODALITIES}, got {self.modality!r}")
        if self.scale not in ("desk", "paper"):
            raise InputError(f"scale must be 'desk' or 'paper', got {self.scale!r}")
        if self.M != N_WAYPOINTS:
            raise InputError("M is fixed at 5 waypoints")
        if not self.img_channels or not self.vox_channels:
            raise InputError("channel lists must be non-empty")
        if self.embed_dim % self.tf_heads:
            raise InputError(f"embed_dim {self.embed_dim} not divisible by tf_heads {self.tf_heads}")

    @property
    def uses_image(self) -> bool:
        return self.modality in ("rgb", "multimodal")

    @property
    def uses_voxels(self) -> bool:
        return self.modality in ("lidar", "multimodal")

    @classmethod
    def tiny(cls, modality="multimodal") -> ModelConfig:
        """Smallest configuration, used for finite-difference gradient checks."""
        return cls(
            modality=modality,
            img_channels=[2],
            vox_channels=[2],
            embed_dim=8,
            rnn_hidden=8,
            tf_layers=1,
            tf_heads=2,
            head_hidden=8,
        )


@dataclass
class NetworkOutput:
    waypoints: np.ndarray  # (5, 2)
    action: np.ndarray  # (2,) = (v, omega)


class ImageEncoder(nn.Module):
    """Strided conv stem followed by stride-2 residual blocks, pooled to a 4x4 map."""

    def __init__(self, channels, embed_dim):
        super().__init__()
        c0 = channels[0]
        self.stem = nn.Sequential(nn.Conv2d(3, c0, kernel_size=5, stride=4, padding=2), nn.ReLU())
        blocks = []
        for cin, cout in zip(channels[:-1], channels[1:]):
            blocks.append(_ResBlock2d(cin, cout))
        self.blocks = nn.Sequential(*blocks)
        self.pool = nn.AdaptiveAvgPool2d(4)
        self.proj = nn.Linear(channels[-1] * 16, embed_dim)
        self.norm = nn.LayerNorm(embed_dim)

    def forward(self, img):  # (B, 3, 224, 224), roughly zero-centred
        h = self.blocks(self.stem(img))
        return self.norm(self.proj(self.pool(h).flatten(1)))


class _ResBlock2d(nn.Module):
    def __init__(self, cin, cout):
        super().__init__()
        self.conv1 = nn.Conv2d(cin, cout, 3, stride=2, padding=1)
        self.conv2 = nn.Conv2d(cout, cout, 3, padding=1)
        self.skip = nn.Conv2d(cin, cout, 1, stride=2)

    def forward(self, x):
        return torch.relu(self.skip(x) + self.conv2(torch.relu(self.conv1(x))))


class ResNet18Encoder(nn.Module):
    """torchvision ResNet-18 trunk (random init) with a linear projection."""

    def __init__(self, embed_dim):
        super().__init__()
        from torchvision.models import resnet18

        trunk = resnet18(weights=None)
        trunk.fc = nn.Identity()
        self.trunk = trunk
        self.proj = nn.Linear(512, embed_dim)
        self.norm = nn.LayerNorm(embed_dim)

    def forward(self, img):
        return self.norm(self.proj(self.trunk(img)))


class VoxelEncoder(nn.Module):
    """3D CNN over the occupancy grid.

    The first layer is a 4x4x4 stride-4 convolution that shrinks the
    160x120x50 grid to 40x30x12; later layers halve each axis.
    """

    def __init__(self, channels, embed_dim):
        super().__init__()
        layers = [nn.Conv3d(1, channels[0], kernel_size=4, stride=4), nn.ReLU()]
        for cin, cout in zip(channels[:-1], channels[1:]):
            layers += [nn.Conv3d(cin, cout, kernel_size=3, stride=2, padding=1), nn.ReLU()]
        self.convs = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool3d((4, 4, 2))
        self.proj = nn.Linear(channels[-1] * 32, embed_dim)
        # bounded GRU input; unnormalized embeddings grew large enough to saturate the gates
        self.norm = nn.LayerNorm(embed_dim)

    def forward(self, vox):  # (B, 1, X, Y, Z)
        return self.norm(self.proj(self.pool(self.convs(vox)).flatten(1)))


def _mlp(din, dhidden, dout):
    return nn.Sequential(nn.Linear(din, dhidden), nn.ReLU(), nn.Linear(dhidden, dout))


class NavPolicy(nn.Module):
    """F^g and F^l for one modality setting.

    ``forward`` takes batched tensors: images (B, 224, 224, 3) uint8 or float
    in [0, 255], voxels (B, X, Y, Z) and goals (B, 2). Unused modalities may
    be passed as ``None``.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = cfg = config
        d, h = cfg.embed_dim, cfg.rnn_hidden
        if cfg.uses_image:
            self.img_enc = ResNet18Encoder(d) if cfg.scale == "paper" else ImageEncoder(cfg.img_channels, d)
            self.rnn_img = nn.GRUCell(d + 2, h)
        if cfg.uses_voxels:
            self.vox_enc = VoxelEncoder(cfg.vox_channels, d)
            self.rnn_vox = nn.GRUCell(d + 2, h)
        n_branches = 2 if cfg.modality == "multimodal" else 1
        # unimodal variants still get both fusion blocks (single input) so the
        # heads see the same layer shapes in every variant
        self.fuse_global = nn.Sequential(nn.Linear(n_branches * h, h), nn.ReLU())
        self.fuse_local = nn.Sequential(nn.Linear(n_branches * h, d), nn.ReLU())
        self.global_head = _mlp(h, cfg.head_hidden, 2 * cfg.M)
        self.wp_embed = _mlp(2 * cfg.M, cfg.head_hidden, d)
        # per-token norms keep sample-dependent content on the same scale as
        # the positional term; without them the action head collapses to a constant
        self.wp_norm = nn.LayerNorm(d)
        self.local_norm = nn.LayerNorm(d)
        self.token_pos = nn.Parameter(torch.zeros(2, d))
        layer = nn.TransformerEncoderLayer(
            d_model=d, nhead=cfg.tf_heads, dim_feedforward=2 * d, dropout=0.0, activation="gelu",
            batch_first=True, norm_first=True,
        )
        self.transformer = nn.TransformerEncoder(layer, num_layers=cfg.tf_layers, enable_nested_tensor=False)
        self.local_head = _mlp(2 * d, cfg.head_hidden, 2)
        nn.init.normal_(self.token_pos, std=0.02)

    # pieces --------------------------------------------------------------
    def encode_image(self, images):
        images = images.to(self._dtype())
        # contiguous NCHW: channels-last strides with few channels crash the CPU conv backward (torch 2.13)
        x = (images.permute(0, 3, 1, 2).contiguous() - 127.5) / 64.0
        return self.img_enc(x)

    def encode_pointcloud(self, voxels):
        return self.vox_enc(voxels.to(self._dtype()).unsqueeze(1))

    def temporal_encode(self, branch: str, embedding, goal, state=None):
        rnn = self.rnn_img if branch == "rgb" else self.rnn_vox
        x = torch.cat([embedding, goal.to(embedding.dtype)], dim=1)
        if state is None:
            state = x.new_zeros(x.shape[0], rnn.hidden_size)
        hidden = rnn(x, state)
        return hidden, hidden

    def fuse(self, hiddens):
        cat = torch.cat(hiddens, dim=1)
        return self.fuse_global(cat), self.fuse_local(cat)

    def global_head_forward(self, fused_global):
        return self.global_head(fused_global).view(-1, self.config.M, 2)

    def local_head_forward(self, fused_local, waypoints):
        wp = self.wp_norm(self.wp_embed(waypoints.flatten(1)))
        tokens = torch.stack([wp, self.local_norm(fused_local)], dim=1) + self.token_pos
        z = self.transformer(tokens)
        return self.local_head(z.flatten(1))

    def _dtype(self):
        return self.global_head[0].weight.dtype

    # end to end -------------------------------------------------------------
    def hiddens(self, images, voxels, goals):
        cfg = self.config
        out = []
        if cfg.uses_voxels:
            if voxels is None:
                raise InputError(f"modality {cfg.modality} needs voxel input")
            if tuple(voxels.shape[1:]) != cfg.grid_dims:
                raise InputError(f"voxel grid shape {tuple(voxels.shape[1:])}, expected {cfg.grid_dims}")
            out.append(self.temporal_encode("lidar", self.encode_pointcloud(voxels), goals)[0])
        if cfg.uses_image:
            if images is None:
                raise InputError(f"modality {cfg.modality} needs image input")
            if tuple(images.shape[1:]) != IMAGE_SHAPE:
                raise InputError(f"image shape {tuple(images.shape[1:])}, expected {IMAGE_SHAPE}")
            out.append(self.temporal_encode("rgb", self.encode_image(images), goals)[0])
        return out

    def forward(self, images, voxels, goals):
        goals = goals.to(self._dtype())
        fused_g, fused_l = self.fuse(self.hiddens(images, voxels, goals))
        waypoints = self.global_head_forward(fused_g)
        action = self.local_head_forward(fused_l, waypoints)
        return waypoints, action

    # parameter partition ----------------------------------------------------
    def theta(self) -> dict[str, nn.Parameter]:
        return {n: p for n, p in self.named_parameters() if n.startswith(THETA_PREFIXES)}

    def phi(self) -> dict[str, nn.Parameter]:
        return {n: p for n, p in self.named_parameters() if n.startswith(PHI_PREFIXES)}


def build_model(config: ModelConfig, seed: int | None = None, dtype=torch.float32) -> NavPolicy:
    if seed is not None:
        torch.manual_seed(seed)
    return NavPolicy(config).to(dtype)


def batch_inputs(inputs, config: ModelConfig, dtype=torch.float32):
    """Stack NavigationInputs into (images, voxels, goals) tensors; skips unused modalities."""
    goals = torch.as_tensor(np.stack([np.asarray(i.goal, dtype=np.float64) for i in inputs]), dtype=dtype)
    images = voxels = None
    if config.uses_image:
        images = torch.from_numpy(np.stack([np.asarray(i.image) for i in inputs]))
    if config.uses_voxels:
        voxels = torch.from_numpy(np.stack([i.voxels.occ for i in inputs]))
    return images, voxels, goals


def forward(inp: NavigationInput, config: ModelConfig, model: NavPolicy) -> NetworkOutput:
    """Single-sample prediction: global plan (5, 2) and action (v, omega)."""
    if model.config.modality != config.modality:
        raise InputError(f"model was built for {model.config.modality!r}, config says {config.modality!r}")
    if config.uses_image and np.asarray(inp.image).shape != IMAGE_SHAPE:
        raise InputError(f"image shape {np.asarray(inp.image).shape}, expected {IMAGE_SHAPE}")
    with torch.no_grad():
        wp, act = model(*batch_inputs([inp], config, model._dtype()))
    return NetworkOutput(wp[0].double().numpy(), act[0].double().numpy())


def save_checkpoint(path, model: NavPolicy, metadata: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    payload = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "model_config": asdict(model.config),
        "state_dict": model.state_dict(),
        "metadata": dict(metadata or {}),
    }
    torch.save(payload, path)
    return path


def load_checkpoint(path: str | os.PathLike) -> tuple[NavPolicy, dict]:
    payload = torch.load(Path(path), map_location="cpu", weights_only=False)
    if payload.get("format") != CHECKPOINT_FORMAT or payload.get("version") != CHECKPOINT_VERSION:
        raise InputError(f"{path}: not a version-{CHECKPOINT_VERSION} {CHECKPOINT_FORMAT} file")
    config = ModelConfig(**payload["model_config"])
    model = NavPolicy(config)
    dtype = next(iter(payload["state_dict"].values())).dtype
    model = model.to(dtype)
    model.load_state_dict(payload["state_dict"])
    model.eval()
    return model, payload["metadata"]
