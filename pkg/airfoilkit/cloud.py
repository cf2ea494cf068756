from typing import Optional, Sequence

import numpy as np

from .errors import DataError

COLUMNS = (
    "x",
    "y",
    "u_in_x",
    "u_in_y",
    "sdf",
    "n_x",
    "n_y",
    "u_x",
    "u_y",
    "p",
    "nu_t",
    "is_surface",
)
FIELD_COLUMNS = ("u_x", "u_y", "p", "nu_t")
U_X, U_Y, P, NU_T = range(4)

# unit-normal check on surface nodes
NORMAL_TOLERANCE = 1e-6


class SimulationCloud:
    """
    Per-node arrays of one simulation: positions, inlet velocity, distance
    to the airfoil, wall normals (zero away from the surface) and the four
    flow fields (u_x, u_y, reduced pressure, turbulent viscosity).
    """

    def __init__(
        self,
        positions: np.ndarray,
        inlet_velocity: np.ndarray,
        sdf: np.ndarray,
        normals: np.ndarray,
        fields: np.ndarray,
        surface_mask: np.ndarray,
    ) -> None:
        self.positions = np.asarray(positions, dtype=float)
        self.inlet_velocity = np.asarray(inlet_velocity, dtype=float)
        self.sdf = np.asarray(sdf, dtype=float)
        self.normals = np.asarray(normals, dtype=float)
        self.fields = np.asarray(fields, dtype=float)
        self.surface_mask = np.asarray(surface_mask, dtype=bool)

    def __len__(self) -> int:
        return len(self.positions)

    @property
    def surface_indices(self) -> np.ndarray:
        return np.flatnonzero(self.surface_mask)

    def take(self, indices: np.ndarray) -> "SimulationCloud":
        return SimulationCloud(
            self.positions[indices],
            self.inlet_velocity[indices],
            self.sdf[indices],
            self.normals[indices],
            self.fields[indices],
            self.surface_mask[indices],
        )

    def with_fields(self, fields: np.ndarray) -> "SimulationCloud":
        """Same nodes, other flow fields (a prediction for instance)."""
        fields = np.asarray(fields, dtype=float)
        if fields.shape != self.fields.shape:
            raise DataError(
                "fields of shape {} for a cloud of {} nodes".format(fields.shape, len(self))
            )
        return SimulationCloud(
            self.positions,
            self.inlet_velocity,
            self.sdf,
            self.normals,
            fields,
            self.surface_mask,
        )

    def to_table(self) -> np.ndarray:
        return np.column_stack(
            [
                self.positions,
                self.inlet_velocity,
                self.sdf,
                self.normals,
                self.fields,
                self.surface_mask.astype(float),
            ]
        )

    @classmethod
    def from_table(cls, table: np.ndarray) -> "SimulationCloud":
        table = np.asarray(table, dtype=float)
        if table.ndim != 2 or table.shape[1] != len(COLUMNS):
            raise DataError(
                "node table needs {} columns, got shape {}".format(len(COLUMNS), table.shape)
            )
        flags = table[:, 11]
        bad = np.flatnonzero((flags != 0.0) & (flags != 1.0))
        if len(bad) > 0:
            raise DataError("is_surface must be 0 or 1", row=int(bad[0]), column="is_surface")
        return cls(
            table[:, 0:2],
            table[:, 2:4],
            table[:, 4],
            table[:, 5:7],
            table[:, 7:11],
            flags == 1.0,
        )

    def validate(self, columns: Optional[Sequence[str]] = None) -> None:
        """
        Check the per-node invariants, naming the first offending row and
        column.
        """
        n = len(self)
        if n == 0:
            raise DataError("empty cloud")
        for name, array in (
            ("inlet_velocity", self.inlet_velocity),
            ("sdf", self.sdf),
            ("normals", self.normals),
            ("fields", self.fields),
            ("surface_mask", self.surface_mask),
        ):
            if len(array) != n:
                raise DataError(
                    "{} has {} rows, positions have {}".format(name, len(array), n)
                )

        table = self.to_table()
        names = COLUMNS if columns is None else columns
        rows, cols = np.nonzero(~np.isfinite(table))
        if len(rows) > 0:
            raise DataError("non-finite value", row=int(rows[0]), column=names[cols[0]])

        surface = self.surface_mask
        bad = np.flatnonzero(surface & (self.sdf != 0.0))
        if len(bad) > 0:
            raise DataError("surface node with nonzero sdf", row=int(bad[0]), column="sdf")
        bad = np.flatnonzero(~surface & (self.sdf < 0.0))
        if len(bad) > 0:
            raise DataError("negative distance", row=int(bad[0]), column="sdf")
        norms = np.linalg.norm(self.normals, axis=1)
        bad = np.flatnonzero(surface & (np.abs(norms - 1.0) > NORMAL_TOLERANCE))
        if len(bad) > 0:
            raise DataError("surface normal is not unit", row=int(bad[0]), column="n_x")
        bad = np.flatnonzero(~surface & (norms != 0.0))
        if len(bad) > 0:
            raise DataError("off-surface node with a normal", row=int(bad[0]), column="n_x")
