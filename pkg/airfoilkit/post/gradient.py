import logging
from typing import Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .. import consts
from ..cloud import U_X, U_Y, SimulationCloud
from ..errors import ParameterError

l = logging.getLogger(__name__)

DEFAULT_NEIGHBORS = 12
# normal matrices above this condition number are treated as rank deficient
MAX_CONDITION = 1e12


def velocity_gradient_at_surface(
    cloud: SimulationCloud,
    k_neighbors: int = DEFAULT_NEIGHBORS,
    indices: Optional[np.ndarray] = None,
    no_slip: bool = False,
    tree: Optional[cKDTree] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Velocity gradient grad[a, b] = du_a/dx_b at the surface nodes.

    Each node fits a linear field anchored at its own velocity to its k
    nearest neighbours, weighting residuals by 1/distance. With no_slip every
    wall node of the cloud, anchor included, counts as zero velocity
    whatever its stored value. Neighbourhoods whose normal matrix is singular
    fall back to a one-sided difference along the wall normal; those nodes
    are flagged in the second returned array.
    """
    if k_neighbors < 4:
        raise ParameterError("need at least 4 neighbours, got {}".format(k_neighbors))
    if indices is None:
        indices = cloud.surface_indices
    indices = np.asarray(indices, dtype=np.int64)
    if len(cloud) <= k_neighbors:
        raise ParameterError(
            "cloud of {} nodes is too small for {} neighbours".format(len(cloud), k_neighbors)
        )
    if tree is None:
        tree = cKDTree(cloud.positions)

    velocity = cloud.fields[:, [U_X, U_Y]]
    if no_slip:
        velocity = np.where(cloud.surface_mask[:, None], 0.0, velocity)
    origin = cloud.positions[indices]
    dist, neighbors = tree.query(origin, k=k_neighbors + 1, workers=consts.worker_count())
    # drop the node itself, or the farthest one when duplicates shadow it
    is_self = neighbors == indices[:, None]
    keep = np.where(
        is_self.any(axis=1)[:, None], ~is_self, np.arange(k_neighbors + 1) < k_neighbors
    )
    neighbors = neighbors[keep].reshape(len(indices), k_neighbors)
    dist = dist[keep].reshape(len(indices), k_neighbors)

    anchor = velocity[indices]
    dx = cloud.positions[neighbors] - origin[:, None, :]
    du = velocity[neighbors] - anchor[:, None, :]
    with np.errstate(divide="ignore"):
        weights = np.where(dist > 0, 1.0 / dist, 0.0)

    normal_matrix = np.einsum("nk,nki,nkj->nij", weights, dx, dx)
    rhs = np.einsum("nk,nki,nka->nia", weights, dx, du)
    with np.errstate(divide="ignore", invalid="ignore"):
        condition = np.linalg.cond(normal_matrix)
    fallback = ~(condition < MAX_CONDITION)

    grad = np.zeros((len(indices), 2, 2))
    good = ~fallback
    if np.any(good):
        solved = np.linalg.solve(normal_matrix[good], rhs[good])
        grad[good] = np.transpose(solved, (0, 2, 1))
    if np.any(fallback):
        l.warning(
            "%d of %d surface nodes use a one-sided normal difference",
            int(fallback.sum()),
            len(indices),
        )
        grad[fallback] = _normal_difference(
            cloud.normals[indices[fallback]], dx[fallback], du[fallback]
        )
    return grad, fallback


def _normal_difference(normals: np.ndarray, dx: np.ndarray, du: np.ndarray) -> np.ndarray:
    """
    du/dn from the neighbour best aligned with the normal, tangential
    derivatives taken as zero.
    """
    grad = np.zeros((len(normals), 2, 2))
    length = np.linalg.norm(dx, axis=2)
    offset = np.einsum("nki,ni->nk", dx, normals)
    with np.errstate(divide="ignore", invalid="ignore"):
        alignment = np.where(length > 0, offset / length, -np.inf)
    best = np.argmax(alignment, axis=1)
    rows = np.arange(len(normals))
    step = offset[rows, best]
    usable = step > 0
    du_dn = np.zeros((len(normals), 2))
    du_dn[usable] = du[rows, best][usable] / step[usable, None]
    grad[:] = du_dn[:, :, None] * normals[:, None, :]
    return grad
