from typing import Optional


class AirfoilKitError(Exception):
    exit_code = 2


class DomainError(AirfoilKitError):
    pass


class ParameterError(AirfoilKitError):
    pass


class NumericError(AirfoilKitError):
    exit_code = 3


class TopologyError(AirfoilKitError):
    pass


class UsageError(AirfoilKitError):
    exit_code = 1


class MeshError(AirfoilKitError):
    def __init__(self, msg: str, cell_id: Optional[int] = None) -> None:
        super().__init__(msg)
        self.cell_id = cell_id


class DataError(AirfoilKitError):
    def __init__(
        self, msg: str, row: Optional[int] = None, column: Optional[str] = None
    ) -> None:
        location = []
        if row is not None:
            location.append("row {}".format(row))
        if column is not None:
            location.append("column '{}'".format(column))
        if location:
            msg = "{} ({})".format(msg, ", ".join(location))
        super().__init__(msg)
        self.row = row
        self.column = column
