import functools
import math
import os
from pathlib import Path
from typing import Callable, Optional, Tuple

import numpy as np

from airfoilkit.cloud import SimulationCloud
from airfoilkit.design_space import CaseSpec
from airfoilkit.mesh import StructuredMesh, assemble_cgrid
from airfoilkit.naca import Naca4Params, generate_airfoil, reynolds_to_velocity

TEST_ROOT = Path(os.path.dirname(os.path.realpath(__file__)))

Field = Callable[[np.ndarray], np.ndarray]


def make_case(
    reynolds: float = 3e6, aoa_deg: float = 4.0, series: int = 4, digits: Tuple = (2, 4, 12)
) -> CaseSpec:
    return CaseSpec(
        series, digits, reynolds_to_velocity(reynolds), math.radians(aoa_deg), reynolds=reynolds
    )


def circle_cloud(
    n_surface: int,
    radius: float = 1.0,
    n_volume: int = 0,
    seed: int = 0,
    pressure: Optional[Field] = None,
    velocity: Optional[Field] = None,
    jitter: float = 0.0,
    inlet: Tuple[float, float] = (1.0, 0.0),
) -> SimulationCloud:
    """
    Surface nodes on a circle (outward normals) and volume nodes scattered
    in the annulus up to 1.3 radius. Fields default to zero.
    """
    rng = np.random.default_rng(seed)
    step = 2 * math.pi / n_surface
    theta = np.arange(n_surface) * step + jitter * step * rng.uniform(-0.5, 0.5, n_surface)
    surface = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    r = radius * (1 + 0.3 * rng.uniform(0.05, 1.0, n_volume))
    phi = rng.uniform(0, 2 * math.pi, n_volume)
    volume = np.column_stack([r * np.cos(phi), r * np.sin(phi)])

    positions = np.vstack([surface, volume])
    n = len(positions)
    normals = np.zeros((n, 2))
    normals[:n_surface] = surface / radius
    sdf = np.concatenate([np.zeros(n_surface), r - radius])
    fields = np.zeros((n, 4))
    if velocity is not None:
        fields[:, :2] = velocity(positions)
    if pressure is not None:
        fields[:, 2] = pressure(positions)
    mask = np.zeros(n, dtype=bool)
    mask[:n_surface] = True
    return SimulationCloud(
        positions, np.tile(inlet, (n, 1)), sdf, normals, fields, mask
    )


def shear_flow(a: float = 1.0, b: float = 0.5) -> Field:
    def velocity(x: np.ndarray) -> np.ndarray:
        return np.column_stack([a * x[:, 1] + 1.0, b * x[:, 0]])

    return velocity


def three_node_cloud() -> SimulationCloud:
    positions = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0 / 3.0]])
    return SimulationCloud(
        positions,
        np.tile([62.4, 0.1], (3, 1)),
        np.array([0.0, 1.0, 1.0 / 3.0]),
        np.array([[-1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
        np.array(
            [
                [0.0, 0.0, 0.1, 0.0],
                [1.0 / 7.0, -2.5, 3e-9, 1e-5],
                [math.pi, math.e, -0.3, 2.0 / 3.0],
            ]
        ),
        np.array([True, False, False]),
    )


@functools.lru_cache(maxsize=None)
def naca0012_mesh() -> StructuredMesh:
    geometry = generate_airfoil(Naca4Params(0.0, 0.0, 0.12), closed_te=True)
    return assemble_cgrid(geometry)


@functools.lru_cache(maxsize=None)
def synthetic_case() -> Tuple[SimulationCloud, CaseSpec]:
    from airfoilkit.case_io import synth_case

    case = make_case()
    return synth_case(case), case
