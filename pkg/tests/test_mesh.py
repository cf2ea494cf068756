import math
from typing import Dict, Iterator, Tuple

import numpy as np
import pytest

from airfoilkit.design_space import CaseSpec, sample_design_space
from airfoilkit.errors import DomainError, ParameterError
from airfoilkit.mesh import (
    AIRFOIL,
    FREESTREAM,
    OUTLET,
    MeshParams,
    assemble_cgrid,
    estimate_y_plus,
    leading_far_field,
    mesh_statistics,
    split_surface,
    wall_normal_angles,
)
from airfoilkit.mesh.export import block_cell_counts, block_dict_lines, read_mesh, write_mesh
from airfoilkit.mesh.grading import (
    BACKWARD,
    GradedEdge,
    auto_ratio,
    distribute_edge,
    geometric_cell_count,
    geometric_sum,
)
from airfoilkit.mesh.transfinite import signed_areas, transfinite_fill
from airfoilkit.naca import (
    Naca4Params,
    Naca5Params,
    NacaParams,
    generate_airfoil,
    params_from_digits,
)

from .helper import naca0012_mesh


def test_geometric_cell_count_examples() -> None:
    n, last = geometric_cell_count(1.0, 0.1, 1.0)
    assert n == 10 and last == pytest.approx(0.1)
    n, _ = geometric_cell_count(1.0, 2e-6, 1.075)
    assert n == 146
    n, last = geometric_cell_count(1.0, 0.5, 2.0)
    assert n == 2 and last == pytest.approx(1.0)


def test_geometric_cell_count_matches_loop() -> None:
    rng = np.random.default_rng(7)
    for _ in range(10000):
        ratio = rng.uniform(1.02, 1.5)
        first = rng.uniform(1e-4, 1e-1)
        n, total, size = 1, first, first
        while total < 1.0:
            size *= ratio
            total += size
            n += 1
        assert geometric_cell_count(1.0, first, ratio)[0] == n


def test_geometric_cell_count_domain() -> None:
    with pytest.raises(DomainError):
        geometric_cell_count(1.0, 0.0, 1.1)
    with pytest.raises(DomainError):
        geometric_cell_count(1.0, 0.1, 0.9)


def test_auto_ratio() -> None:
    ratio = auto_ratio(1.0, 0.01, 20)
    assert ratio > 1
    assert geometric_sum(0.01, ratio, 20) == pytest.approx(1.0, abs=1e-9)
    assert auto_ratio(1.0, 0.05, 20) == 1.0
    with pytest.raises(ParameterError):
        auto_ratio(1.0, 0.1, 20)

    n, _ = geometric_cell_count(1.0, 1e-3, 1.1)
    ratio = auto_ratio(1.0, 1e-3, n)
    assert 1.0 < ratio <= 1.1


def test_graded_edge() -> None:
    edge = GradedEdge.with_ratio(2.0, 1e-3, 1.2)
    assert edge.ratio <= 1.2
    assert np.sum(edge.cell_sizes()) == pytest.approx(2.0, rel=1e-9)
    assert edge.last_cell == pytest.approx(edge.cell_sizes()[-1])
    assert edge.total_expansion == pytest.approx(edge.last_cell / edge.first_cell)
    with pytest.raises(ParameterError):
        GradedEdge(1.0, 0.1, 1.0, 5)


def test_distribute_edge() -> None:
    line = np.array([[0.0, 0.0], [1.0, 0.0]])
    points = distribute_edge(line, GradedEdge(1.0, 0.25, 1.0, 4))
    assert np.allclose(points[:, 0], [0, 0.25, 0.5, 0.75, 1], atol=1e-15)

    doubling = GradedEdge(1.0, 1.0 / 7.0, 2.0, 3)
    forward = distribute_edge(line, doubling)
    assert np.allclose(forward[:, 0], [0, 1 / 7, 3 / 7, 1], atol=1e-15)
    backward = distribute_edge(line, doubling, BACKWARD)
    assert np.allclose(backward[:, 0], [0, 4 / 7, 6 / 7, 1], atol=1e-15)

    with pytest.raises(ParameterError):
        distribute_edge(line * 2, doubling)


def test_distribute_edge_follows_polyline() -> None:
    corner = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])
    points = distribute_edge(corner, GradedEdge(2.0, 0.5, 1.0, 4))
    assert np.allclose(points, [[0, 0], [0.5, 0], [1, 0], [1, 0.5], [1, 1]])


def test_transfinite_unit_square() -> None:
    s = np.linspace(0, 1, 6)
    t = np.linspace(0, 1, 4)
    grid = transfinite_fill(
        np.column_stack([s, 0 * s]),
        np.column_stack([s, 0 * s + 1]),
        np.column_stack([0 * t, t]),
        np.column_stack([0 * t + 1, t]),
    )
    assert grid.shape == (6, 4, 2)
    assert np.allclose(grid[..., 0], s[:, None], atol=1e-14)
    assert np.allclose(grid[..., 1], t[None, :], atol=1e-14)
    assert np.allclose(signed_areas(grid), 0.2 / 3)


def test_transfinite_collapsed_side() -> None:
    s = np.linspace(0, 1, 9)
    t = np.linspace(0, 1, 5)
    grid = transfinite_fill(
        np.column_stack([s, 0 * s]),
        np.column_stack([s, s]),
        np.zeros((5, 2)),
        np.column_stack([0 * t + 1, t]),
    )
    assert np.all(signed_areas(grid) > 0)
    assert np.allclose(grid[..., 1], s[:, None] * t[None, :], atol=1e-14)


def test_transfinite_keeps_curved_sides() -> None:
    s = np.linspace(0, 1, 21)
    t = np.linspace(0, 1, 11)
    bottom = np.column_stack([s, 0.1 * np.sin(math.pi * s)])
    top = np.column_stack([s, 1 + 0.05 * np.sin(2 * math.pi * s)])
    left = np.column_stack([0 * t, t])
    right = np.column_stack([0 * t + 1, t])
    grid = transfinite_fill(bottom, top, left, right)
    sides = ((grid[:, 0], bottom), (grid[:, -1], top), (grid[0], left), (grid[-1], right))
    for edge, side in sides:
        assert np.allclose(edge, side, rtol=0, atol=1e-15)
    assert np.all(signed_areas(grid) > 0)


def test_transfinite_corner_mismatch() -> None:
    s = np.linspace(0, 1, 3)
    with pytest.raises(ParameterError):
        transfinite_fill(
            np.column_stack([s, 0 * s]),
            np.column_stack([s, 0 * s + 1]),
            np.column_stack([0 * s + 0.1, s]),
            np.column_stack([0 * s + 1, s]),
        )


def test_split_surface() -> None:
    geometry = generate_airfoil(Naca4Params(0.04, 0.4, 0.12), n_points=100, closed_te=True)
    front, aft = split_surface(geometry.upper, geometry.camber[:, 0], 0.4)
    assert np.array_equal(front[-1], aft[0])
    assert np.array_equal(front[0], geometry.upper[0])
    assert np.array_equal(aft[-1], geometry.upper[-1])
    assert len(front) + len(aft) in (len(geometry.upper) + 1, len(geometry.upper) + 2)
    with pytest.raises(ParameterError):
        split_surface(geometry.upper, geometry.camber[:, 0], 1.5)


def test_mesh_params() -> None:
    with pytest.raises(ParameterError):
        MeshParams(wall_ratio=0.9)
    with pytest.raises(ParameterError):
        MeshParams(domain_extent=1.5)
    with pytest.raises(ParameterError):
        MeshParams(normal_cells=1)
    assert MeshParams().to_json()["aft_cells"] == 210


def test_mesh_needs_closed_trailing_edge() -> None:
    geometry = generate_airfoil(Naca4Params(0.0, 0.0, 0.12), n_points=64)
    with pytest.raises(ParameterError):
        assemble_cgrid(geometry)


def test_default_mesh_quality() -> None:
    mesh = naca0012_mesh()
    assert np.all(mesh.cell_areas() > 0)
    assert np.allclose(mesh.wall_first_cells(), 2e-6, atol=1e-9)
    assert mesh.extent() == pytest.approx(200.0)
    assert 2.5e5 <= mesh.n_cells <= 3e5
    ni, nj = mesh.shape
    assert mesh.n_cells == ni * nj


def test_default_mesh_topology() -> None:
    mesh = naca0012_mesh()
    counts = block_cell_counts(mesh)
    assert sum(a * b for a, b in counts.values()) == mesh.n_cells

    airfoil = mesh.patches[AIRFOIL]
    blocks = ("lower_aft", "lower_leading", "upper_leading", "upper_aft")
    assert len(np.unique(airfoil)) == sum(counts[name][0] for name in blocks)
    chain = mesh.patch_chain(AIRFOIL)
    assert chain[0] == chain[-1]
    assert len(np.unique(mesh.quads)) == mesh.n_nodes
    # the airfoil patch is a closed loop
    assert np.all(np.bincount(airfoil.ravel())[np.unique(airfoil)] == 2)
    far = mesh.nodes[mesh.patch_chain(FREESTREAM)]
    assert np.all(np.linalg.norm(far, axis=1) >= 200.0 - 1e-9)
    outlet = mesh.nodes[mesh.patch_chain(OUTLET)]
    assert np.allclose(outlet[:, 0], 200.0)

    stats = mesh_statistics(mesh)
    assert stats["cells"] == mesh.n_cells
    assert sum(stats["block_cells"].values()) == mesh.n_cells
    assert stats["block_cells"]["upper_aft"] == counts["upper_aft"][0] * counts["upper_aft"][1]


def test_mesh_round_trip(tmp_path) -> None:
    mesh = naca0012_mesh()
    write_mesh(mesh, str(tmp_path))
    again = read_mesh(str(tmp_path))
    assert np.array_equal(again.nodes, mesh.nodes)
    assert np.array_equal(again.quads, mesh.quads)
    assert np.array_equal(again.block_map, mesh.block_map)
    assert again.shape == mesh.shape
    assert again.closed_patches == (AIRFOIL,)
    for name, edges in mesh.patches.items():
        assert np.array_equal(again.patches[name], edges)


def test_block_dict() -> None:
    mesh = naca0012_mesh()
    text = "\n".join(block_dict_lines(mesh))
    assert text.count("hex (") == 6
    assert "frontAndBack" in text
    assert text.count("arc ") == 4
    assert text.count("polyLine ") == 8
    for name, (ni, nj) in block_cell_counts(mesh).items():
        assert " {} ({} {} 1) ".format(name, ni, nj) in text


def test_y_plus_estimate() -> None:
    assert estimate_y_plus(0.0, 30.0) == 0.0
    fastest = estimate_y_plus(2e-6, 6e6 * 1.56e-5)
    assert 0.2 < fastest < 1.0
    assert estimate_y_plus(4e-6, 50.0) == pytest.approx(2 * estimate_y_plus(2e-6, 50.0))


def test_wall_normal_angles_on_circle() -> None:
    # clockwise arc around the origin, outward normals point along the radius
    phi = np.linspace(1.4 * math.pi, 0.6 * math.pi, 41)
    row = np.column_stack([np.cos(phi), np.sin(phi)])
    angles = wall_normal_angles(row)
    assert np.allclose(angles[1:-1], phi[1:-1])


def test_leading_far_field_follows_normals() -> None:
    phi = np.linspace(1.4 * math.pi, 0.6 * math.pi, 41)
    wall = 0.1 * np.column_stack([np.cos(phi), np.sin(phi)])
    points = leading_far_field(wall, phi, 1.4 * math.pi, 0.6 * math.pi, 200.0)
    assert np.allclose(np.linalg.norm(points, axis=1), 200.0)
    psi = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * math.pi)
    assert np.allclose(psi, phi)


def test_leading_far_field_concave_wall() -> None:
    x = np.linspace(0.0, 1.0, 51)
    wall = np.column_stack([x, 0.2 * np.sin(3 * math.pi * x)])
    # normal angles that turn back on part of the wall
    angles = 1.5 * math.pi - 0.5 * math.pi * x + 0.3 * np.sin(4 * math.pi * x)
    points = leading_far_field(wall, angles, 1.5 * math.pi, math.pi, 200.0)
    psi = np.mod(np.arctan2(points[:, 1], points[:, 0]), 2 * math.pi)
    assert psi[0] == pytest.approx(1.5 * math.pi)
    assert psi[-1] == pytest.approx(math.pi)
    assert np.all(np.diff(psi) < 0)


def design_space_meshes() -> Iterator[Tuple[NacaParams, float]]:
    picked = {}  # type: Dict[Tuple[int, bool], CaseSpec]
    for case in sample_design_space(0, 64):
        picked.setdefault((case.series, case.aoa >= 0), case)
    assert len(picked) == 4
    for case in picked.values():
        yield case.airfoil, case.aoa
    # cambered sections whose leading-edge columns used to fold
    yield params_from_digits(4, (5.496, 1.823, 19.45)), math.radians(13.62)
    yield params_from_digits(5, (3.247, 4.627, 1, 14.821)), math.radians(0.56)
    yield Naca4Params(0.0443, 0.370, 0.187), math.radians(5.2)
    yield Naca5Params(0.6, 0.15, True, 0.2), math.radians(-5.0)


def test_design_space_meshes() -> None:
    for airfoil, aoa in design_space_meshes():
        mesh = assemble_cgrid(generate_airfoil(airfoil, closed_te=True), aoa=aoa)
        assert np.all(mesh.cell_areas() > 0), airfoil
        assert 2.5e5 <= mesh.n_cells <= 3e5, airfoil
        assert np.allclose(mesh.wall_first_cells(), 2e-6, atol=1e-9)
