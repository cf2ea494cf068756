import argparse
import csv
import logging
import math
import sys
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from . import consts
from .errors import ParameterError
from .naca import (
    NacaParams,
    format_digit,
    naca_name,
    params_from_digits,
    reynolds_to_velocity,
    velocity_to_reynolds,
)

l = logging.getLogger(__name__)

CSV_COLUMNS = ["name", "series", "d1", "d2", "d3", "d4", "u_inf", "aoa_deg", "reynolds"]


class CaseSpec:
    """
    One simulation: an airfoil, an inflow speed and an angle of attack. The
    geometry stays chord-aligned, the angle of attack rotates the inflow.
    """

    def __init__(
        self,
        series: int,
        digits: Sequence[float],
        u_inf: float,
        aoa: float,
        name: Optional[str] = None,
        reynolds: Optional[float] = None,
    ) -> None:
        self.series = series
        self.digits = tuple(float(d) for d in digits)
        self.airfoil = params_from_digits(series, self.digits)  # type: NacaParams
        self.u_inf = float(u_inf)
        self.aoa = float(aoa)
        self.reynolds = velocity_to_reynolds(self.u_inf) if reynolds is None else reynolds

        lo, hi = consts.REYNOLDS_RANGE
        if not lo * (1 - 1e-12) <= self.reynolds <= hi * (1 + 1e-12):
            raise ParameterError("Reynolds number {} outside [2e6, 6e6]".format(self.reynolds))
        aoa_lo, aoa_hi = consts.aoa_range()
        if not aoa_lo - 1e-12 <= self.aoa <= aoa_hi + 1e-12:
            raise ParameterError(
                "angle of attack {:.3f} deg outside [-5, 15]".format(self.aoa_deg)
            )
        if name is None:
            name = default_case_name(self.u_inf, self.aoa_deg, self.digits)
        self.name = name

    @property
    def aoa_deg(self) -> float:
        return math.degrees(self.aoa)

    @property
    def naca(self) -> str:
        return naca_name(self.series, self.digits)

    def inflow_direction(self) -> np.ndarray:
        return np.array([math.cos(self.aoa), math.sin(self.aoa)])

    def inlet_velocity(self) -> np.ndarray:
        return self.u_inf * self.inflow_direction()

    def to_json(self) -> Dict[str, Any]:
        return dict(
            name=self.name,
            series=self.series,
            digits=list(self.digits),
            u_inf=self.u_inf,
            aoa_deg=self.aoa_deg,
            reynolds=self.reynolds,
        )

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "CaseSpec":
        try:
            return cls(
                series=int(data["series"]),
                digits=data["digits"],
                u_inf=float(data["u_inf"]),
                aoa=math.radians(float(data["aoa_deg"])),
                name=data.get("name"),
                reynolds=float(data["reynolds"]),
            )
        except KeyError as e:
            raise ParameterError("case metadata misses '{}'".format(e.args[0]))
        except (ValueError, TypeError) as e:
            raise ParameterError("malformed case metadata: {}".format(e))

    def __repr__(self) -> str:
        return "CaseSpec({}, u_inf={:.3f}, aoa={:.3f} deg)".format(
            self.naca, self.u_inf, self.aoa_deg
        )


def default_case_name(u_inf: float, aoa_deg: float, digits: Sequence[float]) -> str:
    parts = ["airFoil2D_SST", "{:.3f}".format(u_inf), "{:.3f}".format(aoa_deg)]
    parts += ["{:.3f}".format(d) for d in digits]
    return "_".join(parts)


def case_rng(seed: int, index: int) -> np.random.Generator:
    # one stream per (seed, index), so parallel and serial draws agree
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(index,)))


def sample_case(seed: int, index: int, four_digit_probability: float = 0.5) -> CaseSpec:
    rng = case_rng(seed, index)
    if rng.random() < four_digit_probability:
        series = 4
        m = rng.uniform(*consts.NACA4_M_RANGE)
        p = rng.uniform(*consts.NACA4_P_RANGE)
        if p < consts.NACA4_P_CUTOFF:
            p = 0.0
        xx = rng.uniform(*consts.NACA_XX_RANGE)
        digits = [m, p, xx]  # type: List[float]
    else:
        series = 5
        big_l = rng.uniform(*consts.NACA5_L_RANGE)
        p = rng.uniform(*consts.NACA5_P_RANGE)
        q = float(rng.integers(0, 2))
        xx = rng.uniform(*consts.NACA_XX_RANGE)
        digits = [big_l, p, q, xx]
    reynolds = rng.uniform(*consts.REYNOLDS_RANGE)
    aoa = math.radians(rng.uniform(*consts.AOA_RANGE_DEG))
    return CaseSpec(series, digits, reynolds_to_velocity(reynolds), aoa, reynolds=reynolds)


def sample_design_space(
    seed: int, n: int, four_digit_probability: float = 0.5
) -> List[CaseSpec]:
    if n < 1:
        raise ParameterError("need at least one case, got {}".format(n))
    return [sample_case(seed, i, four_digit_probability) for i in range(n)]


def case_row(case: CaseSpec) -> List[str]:
    digits = [repr(d) for d in case.digits] + [""] * (4 - len(case.digits))
    return (
        [case.name, str(case.series)]
        + digits
        + [repr(case.u_inf), repr(case.aoa_deg), repr(case.reynolds)]
    )


def sample_command(args: argparse.Namespace) -> None:
    cases = sample_design_space(args.seed, args.count, args.four_digit_probability)
    out = sys.stdout
    if args.out is not None:
        out = open(args.out, "w", newline="")
    try:
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for case in cases:
            writer.writerow(case_row(case))
    finally:
        if out is not sys.stdout:
            out.close()
    l.info("sampled %d cases with seed %d", len(cases), args.seed)


def read_case_table(path: str) -> List[CaseSpec]:
    cases = []
    with open(path, newline="") as f:
        for row in csv.DictReader(f):
            series = int(row["series"])
            digits = [float(row[c]) for c in ("d1", "d2", "d3", "d4") if row[c] != ""]
            cases.append(
                CaseSpec(
                    series,
                    digits,
                    float(row["u_inf"]),
                    math.radians(float(row["aoa_deg"])),
                    name=row["name"],
                    reynolds=float(row["reynolds"]),
                )
            )
    return cases


__all__ = ["CaseSpec", "sample_design_space", "sample_case", "format_digit"]
