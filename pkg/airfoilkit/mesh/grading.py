import math
from typing import Tuple

import numpy as np
from scipy import optimize

from ..errors import DomainError, NumericError, ParameterError

# relative tolerance on a curve length handed to distribute_edge
LENGTH_TOLERANCE = 1e-6
FORWARD = "forward"
BACKWARD = "backward"


def geometric_sum(first_cell: float, ratio: float, n_cells: int) -> float:
    if ratio == 1.0:
        return first_cell * n_cells
    # expm1/log1p keep ratios close to one accurate
    return first_cell * math.expm1(n_cells * math.log1p(ratio - 1.0)) / (ratio - 1.0)


def geometric_cell_count(
    length: float, first_cell: float, ratio: float
) -> Tuple[int, float]:
    """
    Smallest number of cells, growing by `ratio` from `first_cell`, whose
    sizes add up to at least `length`. Returns the count and the last cell.
    """
    if length <= 0 or first_cell <= 0:
        raise DomainError(
            "length and first cell must be positive, got {} and {}".format(
                length, first_cell
            )
        )
    if ratio < 1:
        raise DomainError("expansion ratio must be >= 1, got {}".format(ratio))

    if ratio == 1.0:
        n = max(1, math.ceil(length / first_cell - 1e-9))
    else:
        estimate = math.log1p(length * (ratio - 1) / first_cell) / math.log(ratio)
        n = max(1, math.ceil(estimate - 1e-9))
        # the closed form may be off by one after rounding
        while n > 1 and geometric_sum(first_cell, ratio, n - 1) >= length:
            n -= 1
        while geometric_sum(first_cell, ratio, n) < length * (1 - 1e-12):
            n += 1
    return n, first_cell * ratio ** (n - 1)


def auto_ratio(length: float, first_cell: float, n_cells: int) -> float:
    """
    Expansion ratio that makes `n_cells` cells starting at `first_cell`
    fill `length` exactly.
    """
    if length <= 0 or first_cell <= 0 or n_cells < 1:
        raise DomainError(
            "cannot grade {} cells of first size {} over {}".format(
                n_cells, first_cell, length
            )
        )
    uniform = n_cells * first_cell
    if abs(uniform - length) <= 1e-12 * length:
        return 1.0
    if uniform > length:
        raise ParameterError(
            "{} cells of first size {} overfill an edge of length {}".format(
                n_cells, first_cell, length
            )
        )
    if n_cells == 1:
        raise ParameterError(
            "a single cell of size {} cannot fill length {}".format(first_cell, length)
        )

    def residual(r: float) -> float:
        return geometric_sum(first_cell, r, n_cells) / length - 1.0

    # the last cell alone reaches the length at this ratio
    upper = (length / first_cell) ** (1.0 / (n_cells - 1)) * (1 + 1e-12)
    try:
        ratio = optimize.bisect(residual, 1.0, upper, xtol=1e-15, maxiter=400)
    except RuntimeError as e:
        raise NumericError("expansion ratio did not converge: {}".format(e))
    return float(ratio)


class GradedEdge:
    """
    A block edge divided into `n_cells` cells growing geometrically from
    `first_cell`. The cell sizes add up to `length`.
    """

    def __init__(
        self, length: float, first_cell: float, ratio: float, n_cells: int
    ) -> None:
        if length <= 0 or first_cell <= 0 or n_cells < 1:
            raise DomainError(
                "invalid graded edge: length {}, first cell {}, {} cells".format(
                    length, first_cell, n_cells
                )
            )
        if ratio < 1:
            raise DomainError("expansion ratio must be >= 1, got {}".format(ratio))
        self.length = length
        self.first_cell = first_cell
        self.ratio = ratio
        self.n_cells = n_cells

        total = geometric_sum(first_cell, ratio, n_cells)
        if abs(total - length) > 1e-9 * length:
            raise ParameterError(
                "cells add up to {!r} on an edge of length {!r}".format(total, length)
            )

    @classmethod
    def with_count(cls, length: float, first_cell: float, n_cells: int) -> "GradedEdge":
        return cls(length, first_cell, auto_ratio(length, first_cell, n_cells), n_cells)

    @classmethod
    def with_ratio(cls, length: float, first_cell: float, ratio: float) -> "GradedEdge":
        n, _ = geometric_cell_count(length, first_cell, ratio)
        return cls.with_count(length, first_cell, n)

    @property
    def last_cell(self) -> float:
        return self.first_cell * self.ratio ** (self.n_cells - 1)

    @property
    def total_expansion(self) -> float:
        """last/first cell size, the grading a block dictionary expects"""
        return self.ratio ** (self.n_cells - 1)

    def cell_sizes(self) -> np.ndarray:
        return self.first_cell * self.ratio ** np.arange(self.n_cells)

    def fractions(self, direction: str = FORWARD) -> np.ndarray:
        cumulative = np.concatenate([[0.0], np.cumsum(self.cell_sizes())])
        fractions = cumulative / cumulative[-1]
        if direction == BACKWARD:
            fractions = 1.0 - fractions[::-1]
        elif direction != FORWARD:
            raise ParameterError("unknown direction '{}'".format(direction))
        fractions[0], fractions[-1] = 0.0, 1.0
        return fractions

    def __repr__(self) -> str:
        return "GradedEdge(length={:.6g}, first={:.3g}, ratio={:.6f}, n={})".format(
            self.length, self.first_cell, self.ratio, self.n_cells
        )


def polyline_length(curve: np.ndarray) -> float:
    return float(np.sum(np.linalg.norm(np.diff(curve, axis=0), axis=1)))


def distribute_edge(
    curve: np.ndarray, spec: GradedEdge, direction: str = FORWARD
) -> np.ndarray:
    """
    Place spec.n_cells + 1 nodes along the polyline `curve` at the graded
    arc-length fractions. Backward puts the first cell at the curve end.
    """
    curve = np.asarray(curve, dtype=float)
    steps = np.linalg.norm(np.diff(curve, axis=0), axis=1)
    arc = np.concatenate([[0.0], np.cumsum(steps)])
    length = arc[-1]
    if abs(length - spec.length) > LENGTH_TOLERANCE * spec.length:
        raise ParameterError(
            "curve length {!r} does not match edge length {!r}".format(
                length, spec.length
            )
        )
    s = spec.fractions(direction) * length
    points = np.column_stack(
        [np.interp(s, arc, curve[:, 0]), np.interp(s, arc, curve[:, 1])]
    )
    points[0], points[-1] = curve[0], curve[-1]
    return points


def straight_line(start: np.ndarray, end: np.ndarray) -> np.ndarray:
    return np.array([start, end], dtype=float)
