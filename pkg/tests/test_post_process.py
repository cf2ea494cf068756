import math

import numpy as np
import pytest

from airfoilkit.case_io import BOUNDARY_LAYER, power_law_profile
from airfoilkit.cloud import SimulationCloud
from airfoilkit.errors import DomainError, ParameterError, TopologyError
from airfoilkit.post import (
    dynamic_pressure,
    flow_tangents,
    integrate_forces,
    leading_edge_index,
    postprocess_case,
    surface_chain,
    wall_shear_stress,
    write_surface_csv,
)
from airfoilkit.post.gradient import velocity_gradient_at_surface
from airfoilkit.post.profiles import (
    BoundaryLayerProfile,
    boundary_layer_profile,
    boundary_layer_thicknesses,
    split_sides,
    write_profile_csv,
)

from .helper import circle_cloud, make_case, shear_flow, synthetic_case, three_node_cloud


def rotate(cloud: SimulationCloud, angle: float) -> SimulationCloud:
    c, s = math.cos(angle), math.sin(angle)
    rotation = np.array([[c, -s], [s, c]])
    fields = cloud.fields.copy()
    fields[:, :2] = fields[:, :2] @ rotation.T
    return SimulationCloud(
        cloud.positions @ rotation.T,
        cloud.inlet_velocity @ rotation.T,
        cloud.sdf,
        cloud.normals @ rotation.T,
        fields,
        cloud.surface_mask,
    )


def test_surface_chain_circle() -> None:
    cloud = circle_cloud(200, n_volume=50, jitter=0.5)
    dist = surface_chain(cloud)
    assert len(dist) == 200
    assert sorted(dist.indices.tolist()) == list(range(200))
    assert dist.signed_area() > 0
    assert dist.positions[0, 0] == pytest.approx(-1.0, abs=1e-3)
    assert dist.perimeter == pytest.approx(2 * math.pi, rel=1e-3)
    # counter-clockwise from the leading edge goes down first
    assert dist.positions[1, 1] < dist.positions[0, 1]


def test_leading_edge_ties() -> None:
    points = np.array([[0.0, 0.3], [0.0, -0.1], [0.5, 0.0]])
    assert leading_edge_index(points) == 1


def test_surface_chain_errors() -> None:
    with pytest.raises(TopologyError):
        surface_chain(circle_cloud(2))
    cloud = circle_cloud(200)
    upper_half = cloud.take(np.flatnonzero(cloud.positions[:, 1] >= 0))
    with pytest.raises(TopologyError):
        surface_chain(upper_half)


def test_constant_pressure_has_no_force() -> None:
    cloud = circle_cloud(1000, pressure=lambda x: np.full(len(x), 5.0))
    dist = surface_chain(cloud)
    forces = integrate_forces(dist, np.array([1.0, 0.0]), 1.0)
    assert np.linalg.norm(forces.pressure_force) < 1e-8 * 5.0 * dist.perimeter


def test_linear_pressure_lifts() -> None:
    cloud = circle_cloud(10000, pressure=lambda x: -x[:, 1])
    dist = surface_chain(cloud)
    forces = integrate_forces(dist, np.array([1.0, 0.0]), math.sqrt(2.0))
    assert forces.q_inf == pytest.approx(1.0)
    assert np.allclose(forces.pressure_force, [0.0, math.pi], atol=1e-3)
    assert forces.c_l == pytest.approx(math.pi, abs=1e-3)
    assert forces.c_d == pytest.approx(0.0, abs=1e-3)


def test_integrate_forces_checks() -> None:
    dist = surface_chain(circle_cloud(50))
    with pytest.raises(ParameterError):
        integrate_forces(dist, np.array([1.0, 1.0]), 1.0)
    dist.closed = False
    with pytest.raises(TopologyError):
        integrate_forces(dist, np.array([1.0, 0.0]), 1.0)


def test_wall_shear_stress() -> None:
    grad = np.array([[0.0, 1.0], [0.5, 0.0]])
    tau = wall_shear_stress(grad, np.array([0.0, 1.0]), nu=1.0)
    assert np.allclose(tau, [1.5, 0.0])
    stacked = wall_shear_stress(np.stack([grad] * 3), np.tile([0.0, 1.0], (3, 1)), nu=2.0)
    assert np.allclose(stacked, [[3.0, 0.0]] * 3)


def test_affine_gradient_is_exact() -> None:
    cloud = circle_cloud(200, n_volume=2000, velocity=shear_flow(1.0, 0.5))
    grad, fallback = velocity_gradient_at_surface(cloud)
    assert not fallback.any()
    expected = np.array([[0.0, 1.0], [0.5, 0.0]])
    assert np.max(np.abs(grad - expected)) < 1e-9


def test_uniform_field_has_no_gradient() -> None:
    def uniform(x: np.ndarray) -> np.ndarray:
        return np.tile([3.0, -1.0], (len(x), 1))

    cloud = circle_cloud(100, n_volume=1000, velocity=uniform)
    grad, fallback = velocity_gradient_at_surface(cloud)
    assert not fallback.any()
    assert np.allclose(grad, 0.0, atol=1e-9)


def test_no_slip_ignores_wall_velocity() -> None:
    cloud = circle_cloud(200, n_volume=2000, velocity=shear_flow(20.0, 5.0))
    surface = cloud.surface_mask
    fields = cloud.fields.copy()
    fields[surface, :2] = np.random.default_rng(1).normal(0.0, 10.0, (surface.sum(), 2))
    slipping = cloud.with_fields(fields)
    # the stored wall velocity of a prediction is not trusted
    cloud.fields[surface, :2] = 0.0

    wall, _ = velocity_gradient_at_surface(cloud, no_slip=True)
    again, _ = velocity_gradient_at_surface(slipping, no_slip=True)
    assert np.allclose(again, wall)
    free, _ = velocity_gradient_at_surface(slipping)
    assert not np.allclose(free, wall)

    case = make_case()
    first = postprocess_case(cloud, case)
    second = postprocess_case(slipping, case)
    assert np.allclose(second.surface.tau, first.surface.tau)
    assert second.forces.c_d == pytest.approx(first.forces.c_d)
    assert second.forces.c_l == pytest.approx(first.forces.c_l)


def test_gradient_falls_back_on_collinear_neighbours() -> None:
    # every neighbour on one line through the node
    n = 20
    positions = np.column_stack([np.zeros(n), np.arange(n) * 0.01])
    fields = np.zeros((n, 4))
    fields[:, 0] = positions[:, 1] * 3.0
    normals = np.zeros((n, 2))
    normals[0] = (0.0, 1.0)
    mask = np.zeros(n, dtype=bool)
    mask[0] = True
    cloud = SimulationCloud(positions, np.zeros((n, 2)), positions[:, 1], normals, fields, mask)
    grad, fallback = velocity_gradient_at_surface(cloud, k_neighbors=6)
    assert fallback.tolist() == [True]
    assert grad[0] == pytest.approx(np.array([[0.0, 3.0], [0.0, 0.0]]))


def test_gradient_parameters() -> None:
    with pytest.raises(ParameterError):
        velocity_gradient_at_surface(circle_cloud(50, n_volume=50), k_neighbors=3)
    with pytest.raises(ParameterError):
        velocity_gradient_at_surface(three_node_cloud(), k_neighbors=4)


def test_coefficients_are_rotation_invariant() -> None:
    cloud = circle_cloud(
        400,
        n_volume=4000,
        jitter=0.5,
        pressure=lambda x: 800.0 * x[:, 0] - 1000.0 * x[:, 1],
        velocity=shear_flow(20.0, 5.0),
    )
    beta = math.radians(5.0)
    first = postprocess_case(cloud, make_case(aoa_deg=2.0)).forces
    second = postprocess_case(rotate(cloud, beta), make_case(aoa_deg=7.0)).forces
    assert abs(first.c_l) > 0.1
    assert second.c_d == pytest.approx(first.c_d, rel=1e-11, abs=1e-12)
    assert second.c_l == pytest.approx(first.c_l, rel=1e-11, abs=1e-12)


def test_force_breakdown_adds_up() -> None:
    cloud = circle_cloud(
        300, n_volume=3000, pressure=lambda x: -500.0 * x[:, 1], velocity=shear_flow(30.0, 1.0)
    )
    case = make_case(aoa_deg=3.0)
    result = postprocess_case(cloud, case)
    forces = result.forces
    assert forces.q_inf == pytest.approx(dynamic_pressure(case.u_inf))
    assert forces.c_d == pytest.approx(forces.c_d_pressure + forces.c_d_viscous)
    assert forces.c_l == pytest.approx(forces.c_l_pressure + forces.c_l_viscous)
    assert len(result.c_p) == len(result.surface) == 300
    assert np.allclose(result.c_p, result.surface.pressure / forces.q_inf)
    assert set(forces.to_json()) >= {"C_D", "C_L", "D", "L"}


def test_flow_tangents() -> None:
    normals = np.array([[0.0, 1.0], [0.0, -1.0], [-1.0, 0.0]])
    tangents = flow_tangents(normals, np.array([1.0, 0.0]))
    assert np.all(tangents @ np.array([1.0, 0.0]) >= 0)
    assert np.allclose(np.einsum("ni,ni->n", tangents, normals), 0.0)


def test_surface_csv(tmp_path) -> None:
    cloud = circle_cloud(64, n_volume=400, pressure=lambda x: -x[:, 1])
    result = postprocess_case(cloud, make_case())
    path = str(tmp_path.joinpath("surface.csv"))
    write_surface_csv(result, path)
    with open(path) as f:
        lines = f.read().splitlines()
    assert lines[0] == "s,x,y,c_p,c_tau,c_tau_magnitude"
    assert len(lines) == 65


def test_split_sides_circle() -> None:
    dist = surface_chain(circle_cloud(100))
    sides = split_sides(dist)
    assert np.all(dist.positions[sides["lower"][1:-1], 1] < 0)
    assert np.all(dist.positions[sides["upper"][1:-1], 1] > 0)
    for chain in sides.values():
        assert chain[0] == 0


def test_thicknesses_of_power_law() -> None:
    delta = 0.02
    distance = np.linspace(0.0, 2 * delta, 20001)
    u = power_law_profile(distance, delta)
    profile = BoundaryLayerProfile(
        0.5, "upper", np.zeros(2), np.array([0.0, 1.0]), distance, u, 0 * u, 0 * u
    )
    result = boundary_layer_thicknesses(profile)
    assert result["delta_99"] == pytest.approx(delta * 0.99 ** 7, rel=1e-3)
    assert result["displacement"] == pytest.approx(delta / 8, rel=2e-3)
    assert result["momentum"] == pytest.approx(7 * delta / 72, rel=2e-3)
    assert result["shape_factor"] == pytest.approx(9.0 / 7.0, rel=4e-3)


def test_thicknesses_need_velocity() -> None:
    distance = np.linspace(0.0, 0.01, 5)
    zero = np.zeros(5)
    profile = BoundaryLayerProfile(
        0.5, "upper", np.zeros(2), np.array([0.0, 1.0]), distance, zero, zero, zero
    )
    with pytest.raises(DomainError):
        boundary_layer_thicknesses(profile)


def test_synthetic_profile_follows_power_law(tmp_path) -> None:
    cloud, case = synthetic_case()
    profile = boundary_layer_profile(cloud, 0.5, "upper", 0.04, 41, u_inf=case.u_inf)
    assert profile.origin[0] == pytest.approx(0.5, abs=1e-9)
    assert profile.normal[1] > 0.9
    expected = power_law_profile(profile.distance, BOUNDARY_LAYER)
    rms = math.sqrt(np.mean((profile.speed() - expected) ** 2))
    assert rms < 0.02
    assert profile.speed()[0] == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(profile.nu_t_ratio, 0.0)

    thickness = boundary_layer_thicknesses(profile)
    assert thickness["delta_99"] == pytest.approx(BOUNDARY_LAYER * 0.99 ** 7, rel=0.1)

    path = str(tmp_path.joinpath("profile.csv"))
    write_profile_csv(profile, path)
    with open(path) as f:
        assert len(f.read().splitlines()) == 42


def test_profile_station_checks() -> None:
    cloud, case = synthetic_case()
    with pytest.raises(DomainError):
        boundary_layer_profile(cloud, 1.2, "upper", 0.04, 41)
    with pytest.raises(DomainError):
        boundary_layer_profile(cloud, 0.5, "upper", -0.01, 41)
    with pytest.raises(ParameterError):
        boundary_layer_profile(cloud, 0.5, "middle", 0.04, 41)
