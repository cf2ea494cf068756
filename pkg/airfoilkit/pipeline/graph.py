import argparse
import logging
import os

import numpy as np
from scipy.spatial import cKDTree

from .. import consts
from ..errors import ParameterError
from . import crop, subsample

l = logging.getLogger(__name__)


class RadiusGraph:
    """
    Directed edges (src, dst) from each node to its nearest neighbours
    within `radius`, at most `max_neighbors` per source.
    """

    def __init__(self, edges: np.ndarray, radius: float, max_neighbors: int) -> None:
        self.edges = edges
        self.radius = radius
        self.max_neighbors = max_neighbors

    def __len__(self) -> int:
        return len(self.edges)

    def out_degree(self, n_nodes: int) -> np.ndarray:
        return np.bincount(self.edges[:, 0], minlength=n_nodes)


def radius_graph(
    points: np.ndarray,
    radius: float = consts.GRAPH_RADIUS,
    max_neighbors: int = consts.GRAPH_MAX_NEIGHBORS,
) -> RadiusGraph:
    if radius <= 0 or max_neighbors < 1:
        raise ParameterError("radius and neighbour cap must be positive")
    points = np.asarray(points, dtype=float)
    if len(points) < 2:
        return RadiusGraph(np.zeros((0, 2), dtype=np.int64), radius, max_neighbors)

    tree = cKDTree(points)
    k = min(max_neighbors + 1, len(points))
    # closed ball: accept neighbours at exactly `radius`
    dist, idx = tree.query(
        points,
        k=k,
        distance_upper_bound=np.nextafter(radius, np.inf),
        workers=consts.worker_count(),
    )
    dist = dist.reshape(len(points), k)
    idx = idx.reshape(len(points), k)
    src = np.broadcast_to(np.arange(len(points))[:, None], idx.shape)
    keep = (dist <= radius) & (idx != src)

    src, dst = src[keep], idx[keep]
    # a source whose own index was pushed out by duplicates may still have
    # max_neighbors + 1 candidates
    order = np.lexsort((dist[keep], src))
    src, dst = src[order], dst[order]
    rank = np.arange(len(src)) - np.searchsorted(src, src)
    capped = rank < max_neighbors
    edges = np.column_stack([src[capped], dst[capped]]).astype(np.int64)
    return RadiusGraph(edges, radius, max_neighbors)


def write_edges(graph: RadiusGraph, path: str) -> None:
    np.savetxt(
        path,
        graph.edges,
        fmt="%d",
        header="src dst radius={!r} max_neighbors={}".format(graph.radius, graph.max_neighbors),
    )


def graph_command(args: argparse.Namespace) -> None:
    from ..case_io import read_case

    cloud, case = read_case(args.case)
    cloud = crop(cloud)
    nodes, truncated = subsample(len(cloud), args.n, args.seed, key=case.name)
    graph = radius_graph(cloud.positions[nodes], args.radius, args.max_nb)

    out = args.out if args.out is not None else os.path.join(args.case, "graph")
    os.makedirs(out, exist_ok=True)
    np.savetxt(os.path.join(out, "nodes.txt"), nodes, fmt="%d", header="cloud index")
    write_edges(graph, os.path.join(out, "edges.txt"))
    l.info(
        "%s: %d nodes%s, %d edges",
        case.name,
        len(nodes),
        " (all)" if truncated else "",
        len(graph),
    )
