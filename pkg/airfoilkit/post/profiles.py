import csv
from typing import Dict, Optional, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.spatial import cKDTree

from .. import consts
from ..cloud import NU_T, U_X, U_Y, SimulationCloud
from ..errors import DomainError, ParameterError
from . import SurfaceDistribution, surface_chain

IDW_NEIGHBORS = 8
IDW_POWER = 2.0
EXACT_HIT = 1e-12


class BoundaryLayerProfile:
    """
    Fields sampled along the outward normal at one chord station, velocity
    over U_inf and turbulent viscosity over nu.
    """

    def __init__(
        self,
        x0: float,
        side: str,
        origin: np.ndarray,
        normal: np.ndarray,
        distance: np.ndarray,
        u: np.ndarray,
        v: np.ndarray,
        nu_t_ratio: np.ndarray,
    ) -> None:
        self.x0 = x0
        self.side = side
        self.origin = origin
        self.normal = normal
        self.distance = distance
        self.u = u
        self.v = v
        self.nu_t_ratio = nu_t_ratio

    def speed(self) -> np.ndarray:
        return np.hypot(self.u, self.v)


def split_sides(dist: SurfaceDistribution) -> Dict[str, np.ndarray]:
    """
    Chain positions (indices into dist) of both sides, each running from the
    leading edge to the trailing edge. The counter-clockwise chain starts
    on the lower side.
    """
    te = int(np.argmax(dist.positions[:, 0]))
    order = np.arange(len(dist))
    lower = order[: te + 1]
    upper = np.concatenate([order[:1], order[te:][::-1]])
    return {"lower": lower, "upper": upper}


def locate_station(
    dist: SurfaceDistribution, side: str, x0: float
) -> Tuple[int, int, float]:
    """First surface segment of `side` crossing x = x0 and the fraction on it."""
    sides = split_sides(dist)
    if side not in sides:
        raise ParameterError("unknown side '{}'".format(side))
    chain = sides[side]
    x = dist.positions[chain, 0]
    crossing = np.flatnonzero((x[:-1] - x0) * (x[1:] - x0) <= 0)
    if len(crossing) == 0:
        raise DomainError(
            "x = {} outside the {} surface [{:.4g}, {:.4g}]".format(x0, side, x.min(), x.max())
        )
    k = int(crossing[0])
    span = x[k + 1] - x[k]
    t = 0.0 if span == 0 else (x0 - x[k]) / span
    return int(chain[k]), int(chain[k + 1]), float(t)


def idw_interpolate(
    tree: cKDTree,
    values: np.ndarray,
    points: np.ndarray,
    k: int = IDW_NEIGHBORS,
    power: float = IDW_POWER,
) -> np.ndarray:
    k = min(k, tree.n)
    dist, idx = tree.query(points, k=k, workers=consts.worker_count())
    dist = dist.reshape(len(points), k)
    idx = idx.reshape(len(points), k)
    exact = dist[:, 0] <= EXACT_HIT
    with np.errstate(divide="ignore"):
        weights = 1.0 / dist ** power
    weights[exact] = 0.0
    weights[exact, 0] = 1.0
    weights /= weights.sum(axis=1, keepdims=True)
    return np.einsum("nk,nk...->n...", weights, values[idx])


def boundary_layer_profile(
    cloud: SimulationCloud,
    x0: float,
    side: str,
    max_dist: float,
    n_samples: int,
    u_inf: Optional[float] = None,
    nu: float = consts.NU,
    dist: Optional[SurfaceDistribution] = None,
    tree: Optional[cKDTree] = None,
) -> BoundaryLayerProfile:
    if not 0.0 < x0 < 1.0:
        raise DomainError("chord station must lie in (0, 1), got {}".format(x0))
    if max_dist <= 0:
        raise DomainError("profile length must be positive, got {}".format(max_dist))
    if n_samples < 2:
        raise ParameterError("need at least two samples")
    if dist is None:
        dist = surface_chain(cloud)
    if tree is None:
        tree = cKDTree(cloud.positions)
    if u_inf is None:
        u_inf = float(np.linalg.norm(cloud.inlet_velocity[0]))

    a, b, t = locate_station(dist, side, x0)
    origin = (1 - t) * dist.positions[a] + t * dist.positions[b]
    normal = (1 - t) * dist.normals[a] + t * dist.normals[b]
    normal /= np.linalg.norm(normal)

    distance = np.linspace(0.0, max_dist, n_samples)
    points = origin + distance[:, None] * normal
    fields = np.empty((n_samples, cloud.fields.shape[1]))
    fields[0] = (1 - t) * cloud.fields[dist.indices[a]] + t * cloud.fields[dist.indices[b]]
    fields[1:] = idw_interpolate(tree, cloud.fields, points[1:])

    return BoundaryLayerProfile(
        x0,
        side,
        origin,
        normal,
        distance,
        fields[:, U_X] / u_inf,
        fields[:, U_Y] / u_inf,
        fields[:, NU_T] / nu,
    )


def boundary_layer_thicknesses(profile: BoundaryLayerProfile) -> Dict[str, float]:
    """
    delta_99, displacement and momentum thickness and shape factor, the edge
    velocity being the largest speed of the profile.
    """
    speed = profile.speed()
    edge = float(speed.max())
    if edge <= 0.0:
        raise DomainError("profile has no velocity")
    ratio = speed / edge
    d = profile.distance

    above = np.flatnonzero(ratio >= 0.99)
    k = int(above[0])
    if k == 0:
        delta_99 = float(d[0])
    else:
        delta_99 = float(np.interp(0.99, [ratio[k - 1], ratio[k]], [d[k - 1], d[k]]))
    displacement = float(trapezoid(1.0 - ratio, d))
    momentum = float(trapezoid(ratio * (1.0 - ratio), d))
    shape_factor = displacement / momentum if momentum > 0 else float("inf")
    return dict(
        delta_99=delta_99,
        displacement=displacement,
        momentum=momentum,
        shape_factor=shape_factor,
    )


def write_profile_csv(profile: BoundaryLayerProfile, path: str) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["d", "u_over_u_inf", "v_over_u_inf", "nu_t_over_nu"])
        for row in zip(profile.distance, profile.u, profile.v, profile.nu_t_ratio):
            writer.writerow([repr(float(value)) for value in row])
