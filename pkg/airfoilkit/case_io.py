"""
On-disk case directories.

    case.json   metadata of the simulation (CaseSpec.to_json)
    nodes.txt   whitespace separated table, one node per row, columns named
                in a '#' header line
    nodes.bin   the same table as little-endian doubles, column-major,
                behind a 16-byte header: magic, version, columns, rows

A directory holds one of the two node files. Predictions are 4-column
text tables (u_x u_y p nu_t) with one row per node.
"""
import argparse
import json
import logging
import math
import os
import struct
from typing import TYPE_CHECKING, Optional, Tuple

import numpy as np

from . import consts
from .cloud import COLUMNS, FIELD_COLUMNS, SimulationCloud
from .design_space import CaseSpec
from .errors import DataError, ParameterError

if TYPE_CHECKING:
    from .mesh import MeshParams, StructuredMesh

l = logging.getLogger(__name__)

CASE_FILE = "case.json"
TEXT_NODES = "nodes.txt"
BINARY_NODES = "nodes.bin"
FORMATS = ("text", "binary")

MAGIC = b"AFKT"
VERSION = 1
HEADER = struct.Struct("<4sIII")
assert HEADER.size == 16

# relative agreement of the stored Reynolds number with u_inf * c / nu
REYNOLDS_TOLERANCE = 1e-3


def _parse_header(line: str, path: str) -> Tuple[str, ...]:
    if not line.startswith("#"):
        raise DataError("{} has no column header".format(path), row=0)
    return tuple(line[1:].split())


def _locate_bad_row(path: str, width: int) -> None:
    with open(path) as f:
        next(f)
        for row, line in enumerate(f):
            parts = line.split()
            if len(parts) != width:
                raise DataError(
                    "{}: {} values instead of {}".format(path, len(parts), width), row=row
                )
            for value in parts:
                try:
                    float(value)
                except ValueError:
                    raise DataError("{}: '{}' is not a number".format(path, value), row=row)


def read_table(path: str, columns: Tuple[str, ...]) -> np.ndarray:
    """Text table with a '#' header naming `columns` in any order."""
    with open(path) as f:
        header = _parse_header(f.readline(), path)
    for name in columns:
        if name not in header:
            raise DataError("{} misses a column".format(path), column=name)
    try:
        table = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError:
        _locate_bad_row(path, len(header))
        raise DataError("{} is not a numeric table".format(path))
    if table.size == 0:
        raise DataError("{} has no rows".format(path))
    if table.shape[1] != len(header):
        raise DataError(
            "{}: {} values per row for {} named columns".format(
                path, table.shape[1], len(header)
            )
        )
    return table[:, [header.index(name) for name in columns]]


def write_table(table: np.ndarray, columns: Tuple[str, ...], path: str) -> None:
    # %.17g keeps every double exactly and ignores the locale
    np.savetxt(path, table, fmt="%.17g", header=" ".join(columns), comments="# ")


def read_binary_table(path: str, n_columns: int) -> np.ndarray:
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < HEADER.size:
        raise DataError("{} is shorter than its header".format(path))
    magic, version, columns, rows = HEADER.unpack_from(data)
    if magic != MAGIC:
        raise DataError("{} is not a node table".format(path))
    if version != VERSION:
        raise DataError(
            "{} has format version {}, expected {}".format(path, version, VERSION)
        )
    if columns != n_columns:
        raise DataError("{} has {} columns, expected {}".format(path, columns, n_columns))
    if len(data) != HEADER.size + 8 * rows * columns:
        raise DataError("{} holds {} bytes for {} rows".format(path, len(data), rows))
    values = np.frombuffer(data, dtype="<f8", offset=HEADER.size)
    return values.reshape(columns, rows).T.astype(float)


def write_binary_table(table: np.ndarray, path: str) -> None:
    rows, columns = table.shape
    with open(path, "wb") as f:
        f.write(HEADER.pack(MAGIC, VERSION, columns, rows))
        f.write(np.ascontiguousarray(table.T, dtype="<f8").tobytes())


def check_reynolds(case: CaseSpec) -> None:
    expected = case.u_inf * consts.CHORD / consts.NU
    if abs(case.reynolds - expected) > REYNOLDS_TOLERANCE * expected:
        raise DataError(
            "Reynolds number {:.6g} does not match u_inf = {} m/s ({:.6g})".format(
                case.reynolds, case.u_inf, expected
            )
        )


def read_case(path: str) -> Tuple[SimulationCloud, CaseSpec]:
    meta = os.path.join(path, CASE_FILE)
    if not os.path.exists(meta):
        raise DataError("{} has no {}".format(path, CASE_FILE))
    with open(meta) as f:
        try:
            data = json.load(f)
        except ValueError as e:
            raise DataError("{}: {}".format(meta, e))
    try:
        case = CaseSpec.from_json(data)
    except ParameterError as e:
        raise DataError("{}: {}".format(meta, e))
    check_reynolds(case)

    binary = os.path.join(path, BINARY_NODES)
    text = os.path.join(path, TEXT_NODES)
    if os.path.exists(binary):
        if os.path.exists(text):
            l.warning("%s holds both node files, reading %s", path, BINARY_NODES)
        table = read_binary_table(binary, len(COLUMNS))
    elif os.path.exists(text):
        table = read_table(text, COLUMNS)
    else:
        raise DataError("{} has no node table".format(path))

    cloud = SimulationCloud.from_table(table)
    cloud.validate()
    return cloud, case


def write_case(
    cloud: SimulationCloud, case: CaseSpec, path: str, format: str = "text"
) -> None:
    if format not in FORMATS:
        raise ParameterError("unknown case format '{}'".format(format))
    cloud.validate()
    check_reynolds(case)
    os.makedirs(path, exist_ok=True)
    with open(os.path.join(path, CASE_FILE), "w") as f:
        json.dump(case.to_json(), f, indent=2, sort_keys=True)
        f.write("\n")

    table = cloud.to_table()
    if format == "text":
        target, stale = TEXT_NODES, BINARY_NODES
        write_table(table, COLUMNS, os.path.join(path, target))
    else:
        target, stale = BINARY_NODES, TEXT_NODES
        write_binary_table(table, os.path.join(path, target))
    if os.path.exists(os.path.join(path, stale)):
        os.remove(os.path.join(path, stale))
    l.info("wrote %s (%d nodes, %s)", path, len(cloud), format)


def read_prediction(path: str, n_nodes: Optional[int] = None) -> np.ndarray:
    table = read_table(path, FIELD_COLUMNS)
    if n_nodes is not None and len(table) != n_nodes:
        raise DataError("{} has {} rows for {} nodes".format(path, len(table), n_nodes))
    rows, cols = np.nonzero(~np.isfinite(table))
    if len(rows) > 0:
        raise DataError(
            "{}: non-finite prediction".format(path),
            row=int(rows[0]),
            column=FIELD_COLUMNS[cols[0]],
        )
    return table


def write_prediction(fields: np.ndarray, path: str) -> None:
    fields = np.asarray(fields, dtype=float)
    if fields.ndim != 2 or fields.shape[1] != len(FIELD_COLUMNS):
        raise DataError("prediction needs {} columns".format(len(FIELD_COLUMNS)))
    write_table(fields, FIELD_COLUMNS, path)


# synthetic cases

BOUNDARY_LAYER = 0.02
POWER_LAW = 1.0 / 7.0


def power_law_profile(distance: np.ndarray, thickness: float = BOUNDARY_LAYER) -> np.ndarray:
    """u / U_inf of a 1/7-power boundary layer of the given thickness"""
    return np.clip(np.asarray(distance, dtype=float) / thickness, 0.0, 1.0) ** POWER_LAW


def surface_normals(mesh: "StructuredMesh") -> Tuple[np.ndarray, np.ndarray]:
    """Airfoil node ids of the mesh and their outward unit normals."""
    from .mesh import AIRFOIL

    surface = mesh.patch_chain(AIRFOIL)[:-1]
    points = mesh.nodes[surface]
    tangent = np.roll(points, -1, axis=0) - np.roll(points, 1, axis=0)
    normals = np.column_stack([tangent[:, 1], -tangent[:, 0]])
    normals /= np.linalg.norm(normals, axis=1)[:, None]
    # right of a counter-clockwise loop is outside
    x, y = points[:, 0], points[:, 1]
    if np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y) < 0:
        normals = -normals
    return surface, normals


def synth_case(
    case: CaseSpec,
    mesh_params: Optional["MeshParams"] = None,
    n_points: int = 256,
    thickness: float = BOUNDARY_LAYER,
) -> SimulationCloud:
    """
    Cloud on the cropped C-grid nodes of the case: uniform inflow slowed
    down by a power-law boundary layer in the wall distance, zero reduced
    pressure and zero turbulent viscosity.
    """
    from .mesh import assemble_cgrid
    from .naca import generate_airfoil
    from .pipeline import crop, signed_distance

    geometry = generate_airfoil(case.airfoil, n_points=n_points, closed_te=True)
    mesh = assemble_cgrid(geometry, mesh_params, case.aoa)
    surface, wall_normals = surface_normals(mesh)

    positions = mesh.nodes
    n = len(positions)
    surface_mask = np.zeros(n, dtype=bool)
    surface_mask[surface] = True
    normals = np.zeros((n, 2))
    normals[surface] = wall_normals

    # distances only inside the crop, the rest is dropped anyway
    xmin, xmax, ymin, ymax = consts.CROP_RECTANGLE
    inside = (
        (positions[:, 0] >= xmin)
        & (positions[:, 0] <= xmax)
        & (positions[:, 1] >= ymin)
        & (positions[:, 1] <= ymax)
    )
    sdf = np.full(n, math.inf)
    sdf[inside] = signed_distance(positions[inside], geometry)
    sdf[surface] = 0.0

    inlet = np.broadcast_to(case.inlet_velocity(), (n, 2))
    fields = np.zeros((n, len(FIELD_COLUMNS)))
    fields[:, :2] = power_law_profile(sdf, thickness)[:, None] * inlet
    cloud = SimulationCloud(positions, np.array(inlet), sdf, normals, fields, surface_mask)
    return crop(cloud)


def synth_command(args: argparse.Namespace) -> None:
    from .mesh import MeshParams

    with open(args.case) as f:
        case = CaseSpec.from_json(json.load(f))
    cloud = synth_case(case, MeshParams.from_args(args), args.n_points, args.thickness)
    out = args.out
    if out is None:
        out = os.path.dirname(os.path.abspath(args.case))
    write_case(cloud, case, out, args.format)

