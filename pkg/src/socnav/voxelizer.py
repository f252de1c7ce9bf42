"""Crop a robot-frame point cloud and build a binary occupancy voxel grid."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass(frozen=True)
class GridSpec:
    """Crop box and voxel size. Intervals are half-open: [lo, hi)."""

    voxel: float = 0.05
    x_range: tuple[float, float] = (0.0, 8.0)
    y_range: tuple[float, float] = (-3.0, 3.0)
    z_min: float = -0.5
    z_extent: float = 2.5

    def __post_init__(self):
        if not self.voxel > 0:
            raise ValueError("voxel size must be positive")
        for name, n in zip(("x", "y", "z"), self.dims):
            if n < 1:
                raise ValueError(f"{name} extent is smaller than one voxel")

    @property
    def dims(self) -> tuple[int, int, int]:
        return (
            round((self.x_range[1] - self.x_range[0]) / self.voxel),
            round((self.y_range[1] - self.y_range[0]) / self.voxel),
            round(self.z_extent / self.voxel),
        )

    @property
    def n_cells(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    def cell_centers_xy(self) -> tuple[np.ndarray, np.ndarray]:
        """Robot-frame x and y coordinates of cell centers along each axis.

        Built as ``(index + 0.5 - n/2) * voxel + mid`` so that mirrored
        indices give exactly negated offsets from the range midpoint.
        """
        nx, ny, _ = self.dims
        xm = 0.5 * (self.x_range[0] + self.x_range[1])
        ym = 0.5 * (self.y_range[0] + self.y_range[1])
        xs = (np.arange(nx) + 0.5 - nx / 2) * self.voxel + xm
        ys = (np.arange(ny) + 0.5 - ny / 2) * self.voxel + ym
        return xs, ys


DEFAULT_SPEC = GridSpec()


@dataclass(frozen=True, eq=False)
class VoxelGrid:
    spec: GridSpec
    occ: np.ndarray
    n_discarded_nonfinite: int = field(default=0, compare=False)

    def __post_init__(self):
        if self.occ.shape != self.spec.dims:
            raise ValueError(f"occupancy shape {self.occ.shape} does not match spec dims {self.spec.dims}")

    def __eq__(self, other):
        if not isinstance(other, VoxelGrid):
            return NotImplemented
        return self.spec == other.spec and np.array_equal(self.occ, other.occ)

    @property
    def n_occupied(self) -> int:
        return int(np.count_nonzero(self.occ))

    def footprint(self) -> np.ndarray:
        """2D occupancy (nx, ny): max over the height axis."""
        return self.occ.any(axis=2)

    def to_bytes(self) -> bytes:
        return np.ascontiguousarray(self.occ, dtype=np.uint8).tobytes(order="C")


def point_to_index(p, spec: GridSpec = DEFAULT_SPEC):
    """Voxel index of a single point, or ``None`` when it falls outside the crop."""
    x, y, z = (float(c) for c in p)
    i = math.floor((x - spec.x_range[0]) / spec.voxel)
    j = math.floor((y - spec.y_range[0]) / spec.voxel)
    k = math.floor((z - spec.z_min) / spec.voxel)
    nx, ny, nz = spec.dims
    if 0 <= i < nx and 0 <= j < ny and 0 <= k < nz:
        return (i, j, k)
    return None


def voxel_indices(points, spec: GridSpec = DEFAULT_SPEC) -> tuple[np.ndarray, int]:
    """In-bounds voxel indices (m, 3) for an (n, 3) cloud plus the count of non-finite points dropped."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    finite = np.isfinite(pts).all(axis=1)
    n_bad = int(pts.shape[0] - finite.sum())
    pts = pts[finite]
    origin = np.array([spec.x_range[0], spec.y_range[0], spec.z_min])
    idx = np.floor((pts - origin) / spec.voxel).astype(np.int64)
    inside = np.all((idx >= 0) & (idx < np.array(spec.dims)), axis=1)
    return idx[inside], n_bad


def voxelize(points, spec: GridSpec = DEFAULT_SPEC) -> VoxelGrid:
    """Binary occupancy: a cell is 1 iff at least one in-bounds point lands in it."""
    idx, n_bad = voxel_indices(points, spec)
    occ = np.zeros(spec.dims, dtype=np.uint8)
    occ[idx[:, 0], idx[:, 1], idx[:, 2]] = 1
    return VoxelGrid(spec, occ, n_bad)


def write_grid(grid: VoxelGrid, path: str | os.PathLike) -> Path:
    """Dump one byte per cell, i-major then j then k (the ``grid.vox`` debug format)."""
    path = Path(path)
    path.write_bytes(grid.to_bytes())
    return path


def read_grid(path: str | os.PathLike, spec: GridSpec = DEFAULT_SPEC) -> VoxelGrid:
    raw = Path(path).read_bytes()
    if len(raw) != spec.n_cells:
        raise ValueError(f"{path}: {len(raw)} bytes, expected {spec.n_cells}")
    return VoxelGrid(spec, np.frombuffer(raw, dtype=np.uint8).reshape(spec.dims).copy())
