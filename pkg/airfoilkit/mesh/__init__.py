"""
Six-block C-grid around a closed-trailing-edge airfoil.

The blocks are stitched into one structured index space (i, j). i walks
from the outlet along the lower wake to the trailing edge, around the
airfoil (lower surface, leading edge, upper surface) and back out along
the upper wake. j walks from the wall or the wake line to the far field.
The two wake blocks share their bottom row through the wake cut.
"""
import argparse
import json
import logging
import math
import os
from typing import Any, Dict, Optional, Tuple

import numpy as np

from .. import consts
from ..errors import MeshError, ParameterError
from ..naca import AirfoilGeometry, camber_max_abscissa
from .grading import (
    BACKWARD,
    GradedEdge,
    distribute_edge,
    geometric_cell_count,
    polyline_length,
    straight_line,
)
from .transfinite import signed_areas, transfinite_fill

l = logging.getLogger(__name__)

# block id -> corner points, in the order used by the block dictionary
BLOCKS = (
    ("lower_wake", (7, 10, 1, 0)),
    ("upper_wake", (10, 3, 2, 1)),
    ("upper_aft", (10, 11, 4, 3)),
    ("upper_leading", (11, 8, 5, 4)),
    ("lower_leading", (8, 9, 6, 5)),
    ("lower_aft", (9, 10, 7, 6)),
)
# blocks in increasing i
BLOCK_ORDER = (0, 5, 4, 3, 2, 1)

AIRFOIL = "airfoil"
FREESTREAM = "freestream"
OUTLET = "outlet"

# weight of the wall arc-length fraction in the leading far-field angles
ARC_SHARE = 0.1


class MeshParams:
    def __init__(
        self,
        domain_extent: float = 200.0,
        wall_first_cell: float = 2e-6,
        wall_ratio: float = 1.075,
        le_first_width: float = 1e-5,
        le_ratio: float = 1.025,
        wake_first_cell: float = 1e-4,
        te_first_width: float = 1e-3,
        aft_cells: int = 210,
        wake_ratio: float = 1.075,
        normal_cells: Optional[int] = None,
    ) -> None:
        self.domain_extent = domain_extent
        self.wall_first_cell = wall_first_cell
        self.wall_ratio = wall_ratio
        self.le_first_width = le_first_width
        self.le_ratio = le_ratio
        self.wake_first_cell = wake_first_cell
        self.te_first_width = te_first_width
        self.aft_cells = aft_cells
        self.wake_ratio = wake_ratio
        self.normal_cells = normal_cells

        for name in (
            "domain_extent",
            "wall_first_cell",
            "le_first_width",
            "wake_first_cell",
            "te_first_width",
            "aft_cells",
        ):
            if getattr(self, name) <= 0:
                raise ParameterError("{} must be positive".format(name))
        for name in ("wall_ratio", "le_ratio", "wake_ratio"):
            if getattr(self, name) < 1:
                raise ParameterError("{} must be >= 1".format(name))
        if normal_cells is not None and normal_cells < 2:
            raise ParameterError("need at least two wall-normal cells")
        if domain_extent <= 2 * consts.CHORD:
            raise ParameterError("domain extent must exceed twice the chord")

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "MeshParams":
        kwargs = {}
        for name in vars(cls()).keys():
            value = getattr(args, name, None)
            if value is not None:
                kwargs[name] = value
        return cls(**kwargs)

    def to_json(self) -> Dict[str, Any]:
        return dict(vars(self))


class StructuredMesh:
    """
    Quads (i,j), (i+1,j), (i+1,j+1), (i,j+1) numbered i-major, so cell
    i * nj + j sits in column i and layer j.
    """

    def __init__(
        self,
        nodes: np.ndarray,
        quads: np.ndarray,
        patches: Dict[str, np.ndarray],
        block_map: np.ndarray,
        shape: Tuple[int, int],
        closed_patches: Tuple[str, ...] = (AIRFOIL,),
        vertices: Optional[np.ndarray] = None,
        edges: Optional[Dict[Tuple[int, int], GradedEdge]] = None,
        curves: Optional[Dict[Tuple[int, int], np.ndarray]] = None,
    ) -> None:
        self.nodes = nodes
        self.quads = quads
        self.patches = patches
        self.block_map = block_map
        self.shape = shape
        self.closed_patches = closed_patches
        # block topology, only known for freshly assembled meshes
        self.vertices = vertices
        self.edges = edges
        self.curves = curves

    @property
    def n_cells(self) -> int:
        return len(self.quads)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def node_grid(self) -> np.ndarray:
        """(ni + 1, nj + 1) array of node ids"""
        ni, nj = self.shape
        q = self.quads.reshape(ni, nj, 4)
        grid = np.empty((ni + 1, nj + 1), dtype=np.int64)
        grid[:-1, :-1] = q[..., 0]
        grid[1:, :-1] = q[..., 1]
        grid[1:, 1:] = q[..., 2]
        grid[:-1, 1:] = q[..., 3]
        return grid

    def patch_chain(self, name: str) -> np.ndarray:
        edges = self.patches[name]
        return np.concatenate([edges[:, 0], edges[-1:, 1]])

    def cell_areas(self) -> np.ndarray:
        grid = self.nodes[self.node_grid()]
        return signed_areas(grid).ravel()

    def wall_first_cells(self) -> np.ndarray:
        """height of the first cell layer above each airfoil node"""
        grid = self.node_grid()
        wall = np.isin(grid[:, 0], self.patch_chain(AIRFOIL))
        inner = self.nodes[grid[wall, 0]]
        outer = self.nodes[grid[wall, 1]]
        return np.linalg.norm(outer - inner, axis=1)

    def extent(self) -> float:
        return float(np.max(np.abs(self.nodes)))


def split_surface(
    side: np.ndarray, stations: np.ndarray, x_split: float
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Cut a surface polyline (leading to trailing edge) at chord station
    x_split. The cut point lies on the polyline.
    """
    if not stations[0] < x_split < stations[-1]:
        raise ParameterError("split station {} outside the chord".format(x_split))
    k = int(np.searchsorted(stations, x_split))
    cut = np.array(
        [np.interp(x_split, stations, side[:, 0]), np.interp(x_split, stations, side[:, 1])]
    )
    front = side[:k]
    aft = side[k:]
    if np.array_equal(aft[0], cut):
        aft = aft[1:]
    if np.array_equal(front[-1], cut):
        front = front[:-1]
    return np.vstack([front, cut]), np.vstack([cut, aft])


def block_vertices(geometry: AirfoilGeometry, aoa: float, extent: float) -> np.ndarray:
    x_split = camber_max_abscissa(geometry.params)
    stations = geometry.camber[:, 0]
    te = geometry.upper[-1]
    r = extent
    wake_y = te[1] + (r - te[0]) * math.tan(aoa)
    if abs(wake_y) >= r:
        raise ParameterError("angle of attack too large for the domain")

    v = np.zeros((12, 2))
    v[0] = (r, -r)
    v[1] = (r, wake_y)
    v[2] = (r, r)
    v[3] = (te[0], r)
    v[4] = (0.0, r)
    v[5] = (-r, 0.0)
    v[6] = (0.0, -r)
    v[7] = (te[0], -r)
    v[8] = geometry.upper[0]
    v[9] = split_surface(geometry.lower, stations, x_split)[0][-1]
    v[10] = te
    v[11] = split_surface(geometry.upper, stations, x_split)[0][-1]
    return v


def assemble_cgrid(
    geometry: AirfoilGeometry, params: Optional[MeshParams] = None, aoa: float = 0.0
) -> StructuredMesh:
    if params is None:
        params = MeshParams()
    if not geometry.closed_te:
        raise ParameterError("the C-grid needs a closed trailing edge")
    if np.linalg.norm(geometry.upper[-1] - geometry.lower[-1]) > 1e-12:
        raise ParameterError("upper and lower surfaces do not meet at the trailing edge")

    r = params.domain_extent
    v = block_vertices(geometry, aoa, r)
    x_split = camber_max_abscissa(geometry.params)
    stations = geometry.camber[:, 0]
    upper_front, upper_aft = split_surface(geometry.upper, stations, x_split)
    lower_front, lower_aft = split_surface(geometry.lower, stations, x_split)

    if params.normal_cells is not None:
        nj = params.normal_cells
    else:
        nj, _ = geometric_cell_count(r, params.wall_first_cell, params.wall_ratio)

    edges = {}  # type: Dict[Tuple[int, int], GradedEdge]
    curves = {}  # type: Dict[Tuple[int, int], np.ndarray]

    def line(a: int, b: int) -> np.ndarray:
        return straight_line(v[a], v[b])

    for a, b in ((10, 3), (11, 4), (8, 5), (9, 6), (10, 7)):
        edges[a, b] = GradedEdge.with_count(
            float(np.linalg.norm(v[b] - v[a])), params.wall_first_cell, nj
        )
    for a, b in ((1, 2), (1, 0)):
        edges[a, b] = GradedEdge.with_count(
            float(np.linalg.norm(v[b] - v[a])), params.wake_first_cell, nj
        )

    # leading edge: fixed first width and ratio up to the camber maximum
    for a, b, curve in ((8, 11, upper_front), (8, 9, lower_front)):
        length = polyline_length(curve)
        n, _ = geometric_cell_count(length, params.le_first_width, params.le_ratio)
        edges[a, b] = GradedEdge.with_count(length, params.le_first_width, n)
        curves[a, b] = curve
    # aft: automatic ratio from the trailing edge
    for a, b, curve in ((10, 11, upper_aft[::-1]), (10, 9, lower_aft[::-1])):
        edges[a, b] = GradedEdge.with_count(
            polyline_length(curve), params.te_first_width, params.aft_cells
        )
        curves[a, b] = curve

    wake = line(10, 1)
    edges[10, 1] = GradedEdge.with_ratio(
        polyline_length(wake), params.te_first_width, params.wake_ratio
    )
    n_wake = edges[10, 1].n_cells

    # far-field edges continue the width of the uniform cells above the airfoil
    top_width = abs(v[3][0] - v[4][0]) / params.aft_cells
    for a, b in ((4, 3), (6, 7)):
        edges[a, b] = GradedEdge.with_count(
            float(np.linalg.norm(v[b] - v[a])), top_width, params.aft_cells
        )
    for a, b in ((3, 2), (7, 0)):
        edges[a, b] = GradedEdge.with_count(
            float(np.linalg.norm(v[b] - v[a])), top_width, n_wake
        )
    quarter = r * math.pi / 2
    edges[4, 5] = GradedEdge.with_count(quarter, top_width, edges[8, 11].n_cells)
    edges[6, 5] = GradedEdge.with_count(quarter, top_width, edges[8, 9].n_cells)

    n_aft = params.aft_cells
    n_le_lower = edges[8, 9].n_cells
    n_le_upper = edges[8, 11].n_cells
    starts = np.cumsum([0, n_wake, n_aft, n_le_lower, n_le_upper, n_aft, n_wake])
    ni = int(starts[-1])
    i_te_lower, i_te_upper = int(starts[1]), int(starts[5])
    l.info(
        "C-grid %d x %d: wake %d, aft %d, leading edge %d/%d",
        ni,
        nj,
        n_wake,
        n_aft,
        n_le_lower,
        n_le_upper,
    )

    grid = np.zeros((ni + 1, nj + 1, 2))

    def put_row(k: int, j: int, points: np.ndarray) -> None:
        grid[starts[k] : starts[k + 1] + 1, j] = points

    wake_points = distribute_edge(wake, edges[10, 1])
    put_row(0, 0, wake_points[::-1])
    put_row(1, 0, distribute_edge(curves[10, 9], edges[10, 9]))
    put_row(2, 0, distribute_edge(curves[8, 9], edges[8, 9])[::-1])
    put_row(3, 0, distribute_edge(curves[8, 11], edges[8, 11]))
    put_row(4, 0, distribute_edge(curves[10, 11], edges[10, 11])[::-1])
    put_row(5, 0, wake_points)

    put_row(0, nj, distribute_edge(line(0, 7), edges[7, 0], BACKWARD))
    put_row(1, nj, distribute_edge(line(7, 6), edges[6, 7], BACKWARD))
    # the leading blocks fan out along the wall normals, the arcs 6-5 and 5-4
    # follow their wall nodes instead of a geometric grading
    angles = wall_normal_angles(grid[:, 0])
    for k, start, end in ((2, 1.5 * math.pi, math.pi), (3, math.pi, 0.5 * math.pi)):
        i0, i1 = starts[k], starts[k + 1]
        wall = slice(i0, i1 + 1)
        put_row(k, nj, leading_far_field(grid[wall, 0], angles[wall], start, end, r))
    put_row(4, nj, distribute_edge(line(4, 3), edges[4, 3]))
    put_row(5, nj, distribute_edge(line(3, 2), edges[3, 2]))

    columns = ((1, 0), (10, 7), (9, 6), (8, 5), (11, 4), (10, 3), (1, 2))
    for i, (a, b) in zip(starts, columns):
        grid[i, :] = distribute_edge(line(a, b), edges[a, b])

    block_of_column = np.empty(ni, dtype=np.int64)
    for k, block in enumerate(BLOCK_ORDER):
        i0, i1 = starts[k], starts[k + 1]
        block_of_column[i0:i1] = block
        filled = transfinite_fill(
            grid[i0 : i1 + 1, 0], grid[i0 : i1 + 1, nj], grid[i0], grid[i1]
        )
        grid[i0 + 1 : i1, 1:nj] = filled[1:-1, 1:-1]

    _grade_wall_columns(grid, i_te_lower, i_te_upper, params.wall_first_cell)

    areas = signed_areas(grid).ravel()
    bad = np.flatnonzero(~(areas > 0))
    if len(bad) > 0:
        raise MeshError(
            "{} cells with non-positive area, first at column {}, layer {}".format(
                len(bad), bad[0] // nj, bad[0] % nj
            ),
            cell_id=int(bad[0]),
        )

    ids = np.arange((ni + 1) * (nj + 1)).reshape(ni + 1, nj + 1)
    # wake cut: the lower wake reuses the upper wake line nodes
    for i in range(i_te_lower + 1):
        ids[i, 0] = ids[ni - i, 0]
    used, node_grid = np.unique(ids, return_inverse=True)
    node_grid = node_grid.reshape(ids.shape)
    nodes = grid.reshape(-1, 2)[used]

    quads = np.stack(
        [node_grid[:-1, :-1], node_grid[1:, :-1], node_grid[1:, 1:], node_grid[:-1, 1:]],
        axis=-1,
    ).reshape(-1, 4)
    block_map = np.repeat(block_of_column, nj)

    def chain_edges(chain: np.ndarray) -> np.ndarray:
        return np.column_stack([chain[:-1], chain[1:]])

    patches = {
        AIRFOIL: chain_edges(node_grid[i_te_lower : i_te_upper + 1, 0]),
        FREESTREAM: chain_edges(node_grid[:, nj]),
        OUTLET: chain_edges(
            np.concatenate([node_grid[ni, ::-1], node_grid[0, 1:]])
        ),
    }
    mesh = StructuredMesh(
        nodes,
        quads,
        patches,
        block_map,
        (ni, nj),
        vertices=v,
        edges=edges,
        curves=curves,
    )
    assert mesh.patch_chain(AIRFOIL)[0] == mesh.patch_chain(AIRFOIL)[-1]
    l.info("C-grid with %d cells and %d nodes", mesh.n_cells, mesh.n_nodes)
    return mesh


def wall_normal_angles(row: np.ndarray) -> np.ndarray:
    """
    Polar angle of the outward normal at each node of the j = 0 row, in
    (0, 2 pi] with -x at pi. The row runs clockwise around the airfoil.
    """
    tangent = np.gradient(row, axis=0)
    # outward normal (-t_y, t_x), angle taken through its opposite
    return math.pi + np.arctan2(-tangent[:, 0], tangent[:, 1])


def leading_far_field(
    wall: np.ndarray, angles: np.ndarray, start: float, end: float, radius: float
) -> np.ndarray:
    """
    Far-field arc nodes of a leading-edge block. Each node sits at the
    polar angle of its wall node's normal, mapped from the normal range of
    the block onto [end, start]. The normal angle is replaced by its running
    minimum on concave stretches and blended with the wall arc-length
    fraction, so the arc angles decrease strictly.
    """
    envelope = np.minimum.accumulate(angles)
    steps = np.linalg.norm(np.diff(wall, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    arc /= arc[-1]
    span = envelope[0] - envelope[-1]
    if span > 0:
        progress = np.clip((envelope[0] - envelope) / span, 0.0, 1.0)
    else:
        progress = arc
    mix = (1.0 - ARC_SHARE) * progress + ARC_SHARE * arc
    psi = start + (end - start) * mix
    return radius * np.column_stack([np.cos(psi), np.sin(psi)])


def _grade_wall_columns(
    grid: np.ndarray, first_column: int, last_column: int, first_cell: float
) -> None:
    """
    Re-space the columns of the airfoil blocks along their own polyline so
    the first layer has exactly `first_cell` height.
    """
    nj = grid.shape[1] - 1
    for i in range(first_column, last_column + 1):
        column = grid[i]
        edge = GradedEdge.with_count(polyline_length(column), first_cell, nj)
        spaced = distribute_edge(column, edge)
        step = spaced[1] - spaced[0]
        spaced[1] = spaced[0] + first_cell * step / np.linalg.norm(step)
        grid[i] = spaced


def estimate_y_plus(first_cell: float, u_inf: float, x_ref: float = 1.0) -> float:
    """
    Wall distance of the first cell in viscous units, with the wall shear
    taken from the turbulent flat-plate estimate Cf = 0.0576 Re_x^-1/5.
    """
    if first_cell == 0.0:
        return 0.0
    re_x = u_inf * x_ref / consts.NU
    cf = 0.0576 * re_x ** (-0.2)
    tau_wall = cf * consts.RHO * u_inf ** 2 / 2
    u_tau = math.sqrt(tau_wall / consts.RHO)
    return first_cell * u_tau / consts.NU


def mesh_statistics(mesh: StructuredMesh) -> Dict[str, Any]:
    areas = mesh.cell_areas()
    wall = mesh.wall_first_cells()
    patch_nodes = {
        name: int(len(np.unique(edges))) for name, edges in sorted(mesh.patches.items())
    }
    blocks = np.bincount(mesh.block_map, minlength=len(BLOCKS))
    return dict(
        cells=mesh.n_cells,
        nodes=mesh.n_nodes,
        shape=list(mesh.shape),
        patch_nodes=patch_nodes,
        block_cells={BLOCKS[k][0]: int(n) for k, n in enumerate(blocks)},
        min_area=float(areas.min()),
        max_area=float(areas.max()),
        min_wall_cell=float(wall.min()),
        max_wall_cell=float(wall.max()),
        extent=mesh.extent(),
    )


def mesh_command(args: argparse.Namespace) -> None:
    from ..design_space import CaseSpec
    from ..naca import generate_airfoil
    from .export import write_block_dict, write_mesh

    with open(args.case) as f:
        case = CaseSpec.from_json(json.load(f))
    params = MeshParams.from_args(args)
    geometry = generate_airfoil(case.airfoil, n_points=args.n_points, closed_te=True)
    mesh = assemble_cgrid(geometry, params, case.aoa)

    y_plus = estimate_y_plus(params.wall_first_cell, case.u_inf)
    if y_plus > 1.0:
        l.warning("estimated y+ of %.2f for %s", y_plus, case.name)
    out = args.out
    if out is None:
        out = os.path.join(os.path.dirname(os.path.abspath(args.case)), "mesh")
    write_mesh(mesh, out)
    if args.block_dict is not None:
        write_block_dict(mesh, args.block_dict)

    stats = mesh_statistics(mesh)
    print(json.dumps(stats, indent=2, sort_keys=True))


__all__ = [
    "MeshParams",
    "StructuredMesh",
    "GradedEdge",
    "assemble_cgrid",
    "estimate_y_plus",
    "mesh_statistics",
]
