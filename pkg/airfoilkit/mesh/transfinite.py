import numpy as np

from ..errors import ParameterError

CORNER_TOLERANCE = 1e-9


def _arc_fractions(curve: np.ndarray) -> np.ndarray:
    steps = np.linalg.norm(np.diff(curve, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    if arc[-1] == 0.0:
        # collapsed side, fall back to index fractions
        return np.linspace(0.0, 1.0, len(curve))
    return arc / arc[-1]


def transfinite_fill(
    bottom: np.ndarray, top: np.ndarray, left: np.ndarray, right: np.ndarray
) -> np.ndarray:
    """
    Bilinear transfinite interpolation of a block from its four sides.

    bottom and top run from the left side to the right side, left and right
    run from the bottom to the top. The result has shape
    (len(bottom), len(left), 2) and reproduces the sides exactly. Interior
    parameters blend the arc-length fractions of opposite sides.
    """
    bottom, top, left, right = (
        np.asarray(side, dtype=float) for side in (bottom, top, left, right)
    )
    if len(bottom) != len(top):
        raise ParameterError(
            "bottom has {} nodes but top has {}".format(len(bottom), len(top))
        )
    if len(left) != len(right):
        raise ParameterError(
            "left has {} nodes but right has {}".format(len(left), len(right))
        )
    if len(bottom) < 2 or len(left) < 2:
        raise ParameterError("a block side needs at least two nodes")
    corners = (
        (bottom[0], left[0]),
        (bottom[-1], right[0]),
        (top[0], left[-1]),
        (top[-1], right[-1]),
    )
    for a, b in corners:
        if np.linalg.norm(a - b) > CORNER_TOLERANCE:
            raise ParameterError("block sides do not meet at corner {}".format(a))

    s_bottom = _arc_fractions(bottom)[:, None]
    s_top = _arc_fractions(top)[:, None]
    s_left = _arc_fractions(left)[None, :]
    s_right = _arc_fractions(right)[None, :]

    denominator = 1.0 - (s_top - s_bottom) * (s_right - s_left)
    u = (s_bottom + s_left * (s_top - s_bottom)) / denominator
    v = (s_left + s_bottom * (s_right - s_left)) / denominator
    u = u[..., None]
    v = v[..., None]

    p00, p10, p01, p11 = bottom[0], bottom[-1], top[0], top[-1]
    grid = (
        (1 - v) * bottom[:, None, :]
        + v * top[:, None, :]
        + (1 - u) * left[None, :, :]
        + u * right[None, :, :]
        - (1 - u) * (1 - v) * p00
        - u * (1 - v) * p10
        - (1 - u) * v * p01
        - u * v * p11
    )
    grid[:, 0] = bottom
    grid[:, -1] = top
    grid[0, :] = left
    grid[-1, :] = right
    return grid


def signed_areas(grid: np.ndarray) -> np.ndarray:
    """Shoelace area of the quads (i,j), (i+1,j), (i+1,j+1), (i,j+1)."""
    a = grid[:-1, :-1]
    b = grid[1:, :-1]
    c = grid[1:, 1:]
    d = grid[:-1, 1:]
    # diagonals cross product
    ac = c - a
    bd = d - b
    return 0.5 * (ac[..., 0] * bd[..., 1] - ac[..., 1] * bd[..., 0])
