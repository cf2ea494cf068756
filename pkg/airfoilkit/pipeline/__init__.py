"""
Turn simulation clouds into learning samples: crop, distance feature,
inputs and targets, normalization and uniform subsampling.
"""
import json
import logging
import zlib
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import consts
from ..cloud import SimulationCloud
from ..errors import DataError
from ..naca import AirfoilGeometry

l = logging.getLogger(__name__)

INPUT_CHANNELS = ("x", "y", "u_in_x", "u_in_y", "sdf", "n_x", "n_y")
TARGET_CHANNELS = ("u_x", "u_y", "p", "nu_t")
# points per chunk of the brute-force distance
DISTANCE_CHUNK = 2048
ON_SURFACE = 1e-12


def crop(
    cloud: SimulationCloud, rect: Tuple[float, float, float, float] = consts.CROP_RECTANGLE
) -> SimulationCloud:
    """Keep the nodes inside the closed rectangle (xmin, xmax, ymin, ymax)."""
    xmin, xmax, ymin, ymax = rect
    x, y = cloud.positions[:, 0], cloud.positions[:, 1]
    keep = np.flatnonzero((x >= xmin) & (x <= xmax) & (y >= ymin) & (y <= ymax))
    if len(keep) == 0:
        raise DataError("no node inside the crop rectangle {}".format(rect))
    return cloud.take(keep)


def polyline_distance(points: np.ndarray, start: np.ndarray, end: np.ndarray) -> np.ndarray:
    """Minimum distance from each point to a set of segments."""
    points = np.asarray(points, dtype=float)
    direction = end - start
    length2 = np.einsum("ij,ij->i", direction, direction)
    distances = np.empty(len(points))
    for lo in range(0, len(points), DISTANCE_CHUNK):
        chunk = points[lo : lo + DISTANCE_CHUNK]
        offset = chunk[:, None, :] - start[None, :, :]
        r = np.einsum("nsj,sj->ns", offset, direction) / length2
        np.clip(r, 0.0, 1.0, out=r)
        gap = offset - r[..., None] * direction[None, :, :]
        distances[lo : lo + DISTANCE_CHUNK] = np.sqrt(
            np.min(np.einsum("nsj,nsj->ns", gap, gap), axis=1)
        )
    return distances


def signed_distance(points: np.ndarray, airfoil: AirfoilGeometry) -> np.ndarray:
    """
    Euclidean distance to the airfoil outline. The outline has no interior
    nodes around it, so the distance is left unsigned.
    """
    start, end = airfoil.segments()
    distances = polyline_distance(points, start, end)
    distances[distances < ON_SURFACE] = 0.0
    return distances


def build_features(
    cloud: SimulationCloud, case: Any = None
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Inputs (x, y, u_in_x, u_in_y, sdf, n_x, n_y) and targets (u_x, u_y, p,
    nu_t) per node. A case overrides the inlet velocity with its own.
    """
    n = len(cloud)
    inlet = cloud.inlet_velocity
    if case is not None:
        inlet = np.broadcast_to(case.inlet_velocity(), (n, 2))
    normals = np.where(cloud.surface_mask[:, None], cloud.normals, 0.0)
    inputs = np.column_stack([cloud.positions, inlet, cloud.sdf, normals])
    targets = cloud.fields.copy()
    if inputs.shape[1] != len(INPUT_CHANNELS) or targets.shape[1] != len(TARGET_CHANNELS):
        raise DataError("unexpected feature widths {}".format((inputs.shape, targets.shape)))
    return inputs, targets


class Normalizer:
    """
    Per-channel z-score with statistics of the whole training set.
    Channels without variance keep std 1.
    """

    def __init__(self, means: np.ndarray, stds: np.ndarray) -> None:
        self.means = np.asarray(means, dtype=float)
        self.stds = np.asarray(stds, dtype=float)
        if np.any(self.stds <= 0):
            raise DataError("normalizer stds must be positive")

    @classmethod
    def fit(cls, arrays: Sequence[np.ndarray]) -> "Normalizer":
        if len(arrays) == 0:
            raise DataError("cannot fit a normalizer on an empty training set")
        data = np.concatenate([np.asarray(a, dtype=float) for a in arrays], axis=0)
        if len(data) == 0:
            raise DataError("training arrays contain no nodes")
        means = data.mean(axis=0)
        stds = data.std(axis=0)
        flat = stds == 0
        if np.any(flat):
            l.warning("channels %s have zero variance, std set to 1", np.flatnonzero(flat).tolist())
            stds[flat] = 1.0
        return cls(means, stds)

    def apply(self, data: np.ndarray) -> np.ndarray:
        return (data - self.means) / self.stds

    def invert(self, data: np.ndarray) -> np.ndarray:
        return data * self.stds + self.means

    def to_json(self) -> Dict[str, List[float]]:
        return dict(means=self.means.tolist(), stds=self.stds.tolist())

    @classmethod
    def from_json(cls, data: Dict[str, List[float]]) -> "Normalizer":
        try:
            return cls(data["means"], data["stds"])
        except KeyError as e:
            raise DataError("normalizer file misses '{}'".format(e.args[0]))

    def save(self, path: str) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2)

    @classmethod
    def load(cls, path: str) -> "Normalizer":
        with open(path) as f:
            return cls.from_json(json.load(f))


def case_seed(seed: int, key: Optional[str]) -> np.random.SeedSequence:
    if key is None:
        return np.random.SeedSequence(seed)
    # crc32 stays stable across processes, unlike hash()
    return np.random.SeedSequence(seed, spawn_key=(zlib.crc32(key.encode()),))


def subsample(
    n_nodes: int, n: int = consts.SUBSAMPLE_NODES, seed: int = 0, key: Optional[str] = None
) -> Tuple[np.ndarray, bool]:
    """
    n distinct node indices drawn uniformly without replacement, sorted.
    The flag is True when the cloud was too small and all nodes came back.
    """
    if n_nodes <= n:
        if n_nodes < n:
            l.warning("cloud of %d nodes is smaller than the %d requested", n_nodes, n)
        return np.arange(n_nodes), n_nodes < n
    rng = np.random.default_rng(case_seed(seed, key))
    return np.sort(rng.choice(n_nodes, size=n, replace=False)), False
