import json
import logging
import os
from typing import Dict, List, Tuple

import numpy as np

from ..errors import DataError, ParameterError
from . import AIRFOIL, BLOCKS, FREESTREAM, OUTLET, StructuredMesh

l = logging.getLogger(__name__)

NODES_FILE = "nodes.txt"
QUADS_FILE = "quads.txt"
BLOCKS_FILE = "blocks.txt"
PATCHES_FILE = "patches.json"

# unit span of the extruded one-cell layer
SPAN = 1.0

# boundary edges per patch between the 12 block vertices
PATCH_EDGES = {
    AIRFOIL: ((10, 11), (11, 8), (8, 9), (9, 10)),
    FREESTREAM: ((0, 7), (7, 6), (6, 5), (5, 4), (4, 3), (3, 2)),
    OUTLET: ((2, 1), (1, 0)),
}
ARCS = ((4, 5), (6, 5))


def write_mesh(mesh: StructuredMesh, directory: str) -> None:
    os.makedirs(directory, exist_ok=True)
    np.savetxt(os.path.join(directory, NODES_FILE), mesh.nodes, fmt="%.17g", header="x y")
    np.savetxt(
        os.path.join(directory, QUADS_FILE), mesh.quads, fmt="%d", header="n0 n1 n2 n3"
    )
    ni, nj = mesh.shape
    np.savetxt(
        os.path.join(directory, BLOCKS_FILE),
        mesh.block_map,
        fmt="%d",
        header="shape {} {}".format(ni, nj),
    )
    patches = {
        name: dict(closed=name in mesh.closed_patches, edges=edges.tolist())
        for name, edges in mesh.patches.items()
    }
    with open(os.path.join(directory, PATCHES_FILE), "w") as f:
        json.dump(patches, f)
    l.info("wrote mesh with %d cells to %s", mesh.n_cells, directory)


def _read_shape(path: str) -> Tuple[int, int]:
    with open(path) as f:
        header = f.readline().split()
    if len(header) != 4 or header[:2] != ["#", "shape"]:
        raise DataError("{} misses its shape header".format(path), row=0)
    return int(header[2]), int(header[3])


def read_mesh(directory: str) -> StructuredMesh:
    try:
        nodes = np.loadtxt(os.path.join(directory, NODES_FILE), ndmin=2)
        quads = np.loadtxt(os.path.join(directory, QUADS_FILE), dtype=np.int64, ndmin=2)
        block_map = np.loadtxt(os.path.join(directory, BLOCKS_FILE), dtype=np.int64, ndmin=1)
        shape = _read_shape(os.path.join(directory, BLOCKS_FILE))
        with open(os.path.join(directory, PATCHES_FILE)) as f:
            raw_patches = json.load(f)
    except (OSError, ValueError) as e:
        raise DataError("cannot read mesh in {}: {}".format(directory, e))

    if nodes.shape[1] != 2 or quads.shape[1] != 4:
        raise DataError("node or quad table has the wrong number of columns")
    if len(quads) != shape[0] * shape[1] or len(block_map) != len(quads):
        raise DataError(
            "mesh of shape {} has {} quads and {} block ids".format(
                shape, len(quads), len(block_map)
            )
        )
    bad = np.flatnonzero((quads < 0) | (quads >= len(nodes)))
    if len(bad) > 0:
        raise DataError("quad references a missing node", row=int(bad[0] // 4))
    patches = {
        name: np.asarray(p["edges"], dtype=np.int64).reshape(-1, 2)
        for name, p in raw_patches.items()
    }
    closed = tuple(name for name, p in raw_patches.items() if p.get("closed"))
    return StructuredMesh(nodes, quads, patches, block_map, shape, closed_patches=closed)


def _grading(mesh: StructuredMesh, a: int, b: int) -> float:
    assert mesh.edges is not None
    if (a, b) in mesh.edges:
        return mesh.edges[a, b].total_expansion
    return 1.0 / mesh.edges[b, a].total_expansion


def _cells(mesh: StructuredMesh, a: int, b: int) -> int:
    assert mesh.edges is not None
    edge = mesh.edges.get((a, b)) or mesh.edges[b, a]
    return edge.n_cells


def _point(p: np.ndarray, z: float) -> str:
    return "({!r} {!r} {!r})".format(float(p[0]), float(p[1]), z)


def foam_header() -> str:
    return """/*--------------------------------*- C++ -*----------------------------------*/
FoamFile
{
    version     2.0;
    format      ascii;
    class       dictionary;
    object      blockMeshDict;
}
// * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * * //
"""


def block_cell_counts(mesh: StructuredMesh) -> Dict[str, Tuple[int, int]]:
    """Cells along the first and second direction of each block."""
    return {
        name: (_cells(mesh, a, b), _cells(mesh, a, d)) for name, (a, b, c, d) in BLOCKS
    }


def block_dict_lines(mesh: StructuredMesh) -> List[str]:
    if mesh.vertices is None or mesh.edges is None or mesh.curves is None:
        raise ParameterError("block topology is only known for assembled meshes")
    v = mesh.vertices
    n = len(v)
    # the base plane is wound clockwise, so the span goes towards -z
    front, back = SPAN / 2, -SPAN / 2

    lines = ["convertToMeters 1;", "", "vertices", "("]
    for z in (front, back):
        for p in v:
            lines.append("    {}".format(_point(p, z)))
    lines += [");", "", "blocks", "("]

    counts = block_cell_counts(mesh)
    for name, (a, b, c, d) in BLOCKS:
        hex_vertices = (a, b, c, d, a + n, b + n, c + n, d + n)
        x1, x2 = _grading(mesh, a, b), _grading(mesh, d, c)
        y1, y2 = _grading(mesh, a, d), _grading(mesh, b, c)
        grading = (x1, x2, x2, x1, y1, y2, y2, y1, 1, 1, 1, 1)
        lines.append(
            "    hex ({}) {} ({} {} 1) edgeGrading ({})".format(
                " ".join(str(k) for k in hex_vertices),
                name,
                *counts[name],
                " ".join("{:.12g}".format(g) for g in grading),
            )
        )
    lines += [");", "", "edges", "("]

    for a, b in ARCS:
        middle = 0.5 * (v[a] + v[b])
        middle *= np.linalg.norm(v[a]) / np.linalg.norm(middle)
        for offset, z in ((0, front), (n, back)):
            lines.append("    arc {} {} {}".format(a + offset, b + offset, _point(middle, z)))
    for (a, b), curve in sorted(mesh.curves.items()):
        for offset, z in ((0, front), (n, back)):
            inner = " ".join(_point(p, z) for p in curve[1:-1])
            lines.append("    polyLine {} {} ({})".format(a + offset, b + offset, inner))
    lines += [");", "", "boundary", "("]

    patch_types = {AIRFOIL: "wall", FREESTREAM: "patch", OUTLET: "patch"}
    for patch, edges in PATCH_EDGES.items():
        lines += ["    {}".format(patch), "    {", "        type {};".format(patch_types[patch])]
        lines += ["        faces", "        ("]
        for a, b in edges:
            lines.append("            ({} {} {} {})".format(a, b, b + n, a + n))
        lines += ["        );", "    }"]
    lines += ["    frontAndBack", "    {", "        type empty;", "        faces", "        ("]
    for _, (a, b, c, d) in BLOCKS:
        lines.append("            ({} {} {} {})".format(a, d, c, b))
        lines.append("            ({} {} {} {})".format(a + n, b + n, c + n, d + n))
    lines += ["        );", "    }", ");", "", "mergePatchPairs", "(", ");"]
    return lines


def write_block_dict(mesh: StructuredMesh, path: str) -> None:
    """
    Write the six blocks as a hexahedral-generator dictionary, extruded by
    one cell over a unit span.
    """
    with open(path, "w") as f:
        f.write(foam_header())
        f.write("\n".join(block_dict_lines(mesh)))
        f.write("\n")
    l.info("wrote block dictionary to %s", path)
