import argparse
import csv
import json
import logging
import os
from typing import TYPE_CHECKING, Any, Dict, Optional, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .. import consts
from ..cloud import P, SimulationCloud
from ..errors import ParameterError, TopologyError
from .gradient import DEFAULT_NEIGHBORS, velocity_gradient_at_surface

if TYPE_CHECKING:
    from ..design_space import CaseSpec

l = logging.getLogger(__name__)

# chain gaps larger than this many median spacings break the loop
MAX_GAP_FACTOR = 10.0
CHAIN_CANDIDATES = 16


class SurfaceDistribution:
    """
    Surface nodes ordered counter-clockwise from the leading edge, with
    outward normals, the length dS each node stands for, the reduced
    pressure and, once computed, the wall shear stress.
    """

    def __init__(
        self,
        indices: np.ndarray,
        positions: np.ndarray,
        normals: np.ndarray,
        ds: np.ndarray,
        pressure: np.ndarray,
        tau: Optional[np.ndarray] = None,
        closed: bool = True,
    ) -> None:
        self.indices = indices
        self.positions = positions
        self.normals = normals
        self.ds = ds
        self.pressure = pressure
        if tau is None:
            tau = np.zeros_like(positions)
        self.tau = tau
        self.closed = closed
        self.gradient_fallback = np.zeros(len(indices), dtype=bool)

    def __len__(self) -> int:
        return len(self.indices)

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.ds))

    def arc_length(self) -> np.ndarray:
        """running arc length from the leading edge"""
        steps = np.linalg.norm(np.diff(self.positions, axis=0), axis=1)
        return np.concatenate([[0.0], np.cumsum(steps)])

    def signed_area(self) -> float:
        x, y = self.positions[:, 0], self.positions[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


class ForceBreakdown:
    """
    Forces per unit density and span (reduced units). Drag and lift are the
    projections on the inflow direction and on its +90 degree rotation.
    """

    def __init__(
        self,
        pressure_force: np.ndarray,
        viscous_force: np.ndarray,
        inflow_dir: np.ndarray,
        q_inf: float,
    ) -> None:
        self.pressure_force = pressure_force
        self.viscous_force = viscous_force
        self.inflow_dir = inflow_dir
        self.q_inf = q_inf
        self.lift_dir = np.array([-inflow_dir[1], inflow_dir[0]])

        total = pressure_force + viscous_force
        self.drag = float(np.dot(total, inflow_dir))
        self.lift = float(np.dot(total, self.lift_dir))
        self.c_d = self.drag / q_inf
        self.c_l = self.lift / q_inf
        self.c_d_pressure = float(np.dot(pressure_force, inflow_dir)) / q_inf
        self.c_d_viscous = float(np.dot(viscous_force, inflow_dir)) / q_inf
        self.c_l_pressure = float(np.dot(pressure_force, self.lift_dir)) / q_inf
        self.c_l_viscous = float(np.dot(viscous_force, self.lift_dir)) / q_inf

    def to_json(self) -> Dict[str, Any]:
        return dict(
            D=self.drag,
            L=self.lift,
            C_D=self.c_d,
            C_L=self.c_l,
            q_inf=self.q_inf,
            pressure_force=self.pressure_force.tolist(),
            viscous_force=self.viscous_force.tolist(),
            C_D_pressure=self.c_d_pressure,
            C_D_viscous=self.c_d_viscous,
            C_L_pressure=self.c_l_pressure,
            C_L_viscous=self.c_l_viscous,
        )

    def __repr__(self) -> str:
        return "ForceBreakdown(C_D={:.6g}, C_L={:.6g})".format(self.c_d, self.c_l)


def leading_edge_index(points: np.ndarray) -> int:
    # minimum x, ties broken by minimum |y|
    return int(np.lexsort((np.abs(points[:, 1]), points[:, 0]))[0])


def surface_chain(cloud: SimulationCloud) -> SurfaceDistribution:
    """
    Order the surface nodes into a closed counter-clockwise loop by
    nearest-neighbour chaining from the leading edge. Among the unvisited
    candidates, nodes whose normal faces the same way as the current one
    win, which keeps the chain on its side near a thin trailing edge.
    """
    surface = cloud.surface_indices
    n = len(surface)
    if n < 3:
        raise TopologyError("need at least 3 surface nodes, got {}".format(n))
    points = cloud.positions[surface]
    normals = cloud.normals[surface]
    tree = cKDTree(points)

    seed = leading_edge_index(points)
    visited = np.zeros(n, dtype=bool)
    visited[seed] = True
    order = [seed]
    current = seed
    for _ in range(n - 1):
        k = min(n, CHAIN_CANDIDATES)
        while True:
            _, candidates = tree.query(points[current], k=k)
            candidates = [c for c in np.atleast_1d(candidates) if not visited[c]]
            if candidates or k == n:
                break
            k = min(n, 2 * k)
        aligned = [c for c in candidates if np.dot(normals[c], normals[current]) > 0]
        current = aligned[0] if aligned else candidates[0]
        visited[current] = True
        order.append(current)

    ordered = points[order]
    gaps = np.linalg.norm(np.roll(ordered, -1, axis=0) - ordered, axis=1)
    spacing = np.median(gaps)
    if np.max(gaps) > MAX_GAP_FACTOR * spacing:
        worst = int(np.argmax(gaps))
        raise TopologyError(
            "surface chain does not close: gap of {:.3g} m after node {} "
            "(median spacing {:.3g} m)".format(gaps[worst], surface[order[worst]], spacing)
        )

    chain = np.asarray(order)
    area = 0.5 * np.sum(
        ordered[:, 0] * np.roll(ordered[:, 1], -1) - np.roll(ordered[:, 0], -1) * ordered[:, 1]
    )
    if area < 0:
        chain = np.concatenate([chain[:1], chain[1:][::-1]])
        gaps = gaps[::-1]
    ds = 0.5 * (gaps + np.roll(gaps, 1))

    indices = surface[chain]
    return SurfaceDistribution(
        indices,
        cloud.positions[indices],
        cloud.normals[indices],
        ds,
        cloud.fields[indices, P],
    )


def wall_shear_stress(grad: np.ndarray, normal: np.ndarray, nu: float = consts.NU) -> np.ndarray:
    """
    tau = 2 nu S n with S the strain rate; the turbulent viscosity vanishes
    at the wall. Works on single tensors or stacks of them.
    """
    grad = np.asarray(grad, dtype=float)
    normal = np.asarray(normal, dtype=float)
    strain = grad + np.swapaxes(grad, -1, -2)
    return nu * np.einsum("...ij,...j->...i", strain, normal)


def dynamic_pressure(u_inf: float, area: float = consts.REFERENCE_AREA) -> float:
    return u_inf ** 2 * area / 2


def integrate_forces(
    dist: SurfaceDistribution, inflow_dir: np.ndarray, u_inf: float
) -> ForceBreakdown:
    if not dist.closed:
        raise TopologyError("forces need a closed surface")
    inflow_dir = np.asarray(inflow_dir, dtype=float)
    if abs(np.linalg.norm(inflow_dir) - 1.0) > 1e-9:
        raise ParameterError("inflow direction must be a unit vector")
    ds = dist.ds[:, None]
    pressure_force = -np.sum(dist.pressure[:, None] * dist.normals * ds, axis=0)
    viscous_force = np.sum(dist.tau * ds, axis=0)
    return ForceBreakdown(pressure_force, viscous_force, inflow_dir, dynamic_pressure(u_inf))


def pressure_coefficient(
    dist: SurfaceDistribution, q_inf: float, p_inf: float = 0.0
) -> np.ndarray:
    return (dist.pressure - p_inf) / q_inf


def flow_tangents(normals: np.ndarray, inflow_dir: np.ndarray) -> np.ndarray:
    tangents = np.column_stack([-normals[:, 1], normals[:, 0]])
    flip = tangents @ inflow_dir < 0
    tangents[flip] *= -1
    return tangents


def skin_friction_coefficient(
    dist: SurfaceDistribution, q_inf: float, inflow_dir: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Tangential wall shear over q_inf, the tangent pointing with the inflow,
    and the shear magnitude over q_inf.
    """
    tangents = flow_tangents(dist.normals, np.asarray(inflow_dir, dtype=float))
    c_tau = np.einsum("ni,ni->n", dist.tau, tangents) / q_inf
    return c_tau, np.linalg.norm(dist.tau, axis=1) / q_inf


class PostprocessResult:
    def __init__(
        self,
        forces: ForceBreakdown,
        surface: SurfaceDistribution,
        c_p: np.ndarray,
        c_tau: np.ndarray,
        c_tau_magnitude: np.ndarray,
    ) -> None:
        self.forces = forces
        self.surface = surface
        self.c_p = c_p
        self.c_tau = c_tau
        self.c_tau_magnitude = c_tau_magnitude


def postprocess_case(
    cloud: SimulationCloud,
    case: "CaseSpec",
    k_neighbors: int = DEFAULT_NEIGHBORS,
    nu: float = consts.NU,
) -> PostprocessResult:
    """
    Surface chain, wall shear, forces and surface coefficients of one
    simulation. Evaluation goes through here too.
    """
    u_inf, inflow_dir = case.u_inf, case.inflow_direction()
    dist = surface_chain(cloud)
    # predicted fields may carry a nonzero velocity on the wall
    grad, fallback = velocity_gradient_at_surface(
        cloud, k_neighbors, indices=dist.indices, no_slip=True
    )
    dist.tau = wall_shear_stress(grad, dist.normals, nu)
    dist.gradient_fallback = fallback
    forces = integrate_forces(dist, inflow_dir, u_inf)
    c_p = pressure_coefficient(dist, forces.q_inf)
    c_tau, c_tau_magnitude = skin_friction_coefficient(dist, forces.q_inf, inflow_dir)
    return PostprocessResult(forces, dist, c_p, c_tau, c_tau_magnitude)


def write_surface_csv(result: PostprocessResult, path: str) -> None:
    dist = result.surface
    s = dist.arc_length()
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["s", "x", "y", "c_p", "c_tau", "c_tau_magnitude"])
        for k in range(len(dist)):
            writer.writerow(
                [
                    repr(float(s[k])),
                    repr(float(dist.positions[k, 0])),
                    repr(float(dist.positions[k, 1])),
                    repr(float(result.c_p[k])),
                    repr(float(result.c_tau[k])),
                    repr(float(result.c_tau_magnitude[k])),
                ]
            )


def postprocess_command(args: argparse.Namespace) -> None:
    from ..case_io import read_case, read_prediction

    cloud, case = read_case(args.case)
    if args.pred is not None:
        cloud = cloud.with_fields(read_prediction(args.pred, len(cloud)))
    result = postprocess_case(cloud, case, k_neighbors=args.k_neighbors)
    out = args.out if args.out is not None else args.case
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "forces.json"), "w") as f:
        json.dump(result.forces.to_json(), f, indent=2, sort_keys=True)
    write_surface_csv(result, os.path.join(out, "surface.csv"))
    l.info("%s: %r", case.name, result.forces)
    print(json.dumps(result.forces.to_json(), indent=2, sort_keys=True))


def profiles_command(args: argparse.Namespace) -> None:
    from ..case_io import read_case
    from .profiles import boundary_layer_profile, write_profile_csv

    cloud, case = read_case(args.case)
    out = args.out if args.out is not None else args.case
    os.makedirs(out, exist_ok=True)
    for x0 in args.x:
        profile = boundary_layer_profile(
            cloud,
            x0,
            args.side,
            args.max_dist,
            args.n_samples,
            u_inf=case.u_inf,
        )
        path = os.path.join(out, "profile_{}_{:.3f}.csv".format(args.side, x0))
        write_profile_csv(profile, path)
        l.info("wrote %s", path)
