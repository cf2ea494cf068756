import argparse
import logging
import math
import sys
from typing import IO, Sequence, Tuple, Union

import numpy as np
from scipy import optimize

from .consts import CHORD, NU
from .errors import DomainError, NumericError, ParameterError

l = logging.getLogger(__name__)

ArrayLike = Union[float, Sequence[float], np.ndarray]

THICKNESS_COEFFICIENTS = (0.2969, -0.1260, -0.3516, 0.2843)
OPEN_TE_COEFFICIENT = -0.1015

DEFAULT_POINTS = 512
# the thickness maximum of the 00XX envelope, used when there is no camber
SYMMETRIC_MAX_ABSCISSA = 0.3

# p = m (1 - sqrt(m / 3)) is increasing on [0, 4/3]
MAX_CAMBER_M_UPPER = 4.0 / 3.0
MAX_CAMBER_P_LIMIT = 4.0 / 9.0


class Naca4Params:
    series = 4

    def __init__(self, m: float, p: float, t: float) -> None:
        if not 0.0 <= m <= 0.07:
            raise ParameterError("max camber m={} outside [0, 0.07]".format(m))
        if not (p == 0.0 or 0.15 <= p <= 0.7):
            raise ParameterError("camber position p={} not 0 or in [0.15, 0.7]".format(p))
        if not 0.05 <= t <= 0.20:
            raise ParameterError("thickness t={} outside [0.05, 0.20]".format(t))
        self.m = float(m)
        self.p = float(p)
        self.t = float(t)

    @property
    def symmetric(self) -> bool:
        return self.m == 0.0 or self.p == 0.0

    def digits(self) -> Tuple[float, ...]:
        return (self.m * 100, self.p * 10, self.t * 100)

    def __repr__(self) -> str:
        return "Naca4Params(m={}, p={}, t={})".format(self.m, self.p, self.t)


class Naca5Params:
    series = 5

    def __init__(self, cl_design: float, p: float, reflex: bool, t: float) -> None:
        if not 0.0 <= cl_design <= 0.6:
            raise ParameterError(
                "design lift coefficient {} outside [0, 0.6]".format(cl_design)
            )
        if not 0.15 <= p <= 0.40:
            raise ParameterError("camber position p={} outside [0.15, 0.40]".format(p))
        if not 0.05 <= t <= 0.20:
            raise ParameterError("thickness t={} outside [0.05, 0.20]".format(t))
        self.cl_design = float(cl_design)
        self.p = float(p)
        self.reflex = bool(reflex)
        self.t = float(t)

    @property
    def symmetric(self) -> bool:
        return self.cl_design == 0.0

    def digits(self) -> Tuple[float, ...]:
        return (self.cl_design / 0.15, self.p / 0.05, float(self.reflex), self.t * 100)

    def __repr__(self) -> str:
        return "Naca5Params(cl_design={}, p={}, reflex={}, t={})".format(
            self.cl_design, self.p, self.reflex, self.t
        )


NacaParams = Union[Naca4Params, Naca5Params]


def params_from_digits(series: int, digits: Sequence[float]) -> NacaParams:
    """
    Real-valued designation digits to camber/thickness parameters: MPXX for
    the 4-digit series, LPQXX for the 5-digit one.
    """
    if series == 4:
        if len(digits) != 3:
            raise ParameterError("4-digit series needs 3 values (M P XX)")
        m, p, xx = digits
        # a zeroed P means no camber line whatever M says
        if p == 0.0:
            return Naca4Params(0.0, 0.0, xx / 100)
        return Naca4Params(m / 100, p / 10, xx / 100)
    if series == 5:
        if len(digits) != 4:
            raise ParameterError("5-digit series needs 4 values (L P Q XX)")
        big_l, p, q, xx = digits
        if q not in (0, 1):
            raise ParameterError("reflex digit Q must be 0 or 1, got {}".format(q))
        return Naca5Params(0.15 * big_l, 0.05 * p, bool(q), xx / 100)
    raise ParameterError("unknown NACA series {}".format(series))


def format_digit(value: float) -> str:
    text = "{:.3f}".format(value).rstrip("0").rstrip(".")
    return text if text != "-0" else "0"


def naca_name(series: int, digits: Sequence[float]) -> str:
    return "NACA " + " ".join(format_digit(d) for d in digits)


def _check_unit_interval(x: np.ndarray) -> None:
    if np.any(x < 0.0) or np.any(x > 1.0) or np.any(np.isnan(x)):
        raise DomainError("chord fraction outside [0, 1]")


def half_thickness(x: ArrayLike, t: float, closed_te: bool = False) -> np.ndarray:
    """
    Half thickness y_t of the NACA envelope at chord fraction x.

    The closed variant replaces the last coefficient by minus the sum of the
    others (-0.1036), written so that y_t(1) is exactly zero.
    """
    x = np.asarray(x, dtype=float)
    _check_unit_interval(x)
    if t <= 0:
        raise DomainError("thickness must be positive, got {}".format(t))
    a0, a1, a2, a3 = THICKNESS_COEFFICIENTS
    if closed_te:
        x4 = x ** 4
        y = a0 * (np.sqrt(x) - x4) + a1 * (x - x4) + a2 * (x ** 2 - x4) + a3 * (x ** 3 - x4)
    else:
        y = a0 * np.sqrt(x) + a1 * x + a2 * x ** 2 + a3 * x ** 3 + OPEN_TE_COEFFICIENT * x ** 4
    return (t / 0.2) * y


def camber_four(x: ArrayLike, params: Naca4Params) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    _check_unit_interval(x)
    m, p = params.m, params.p
    if m == 0.0:
        return np.zeros_like(x), np.zeros_like(x)
    if p == 0.0:
        raise ParameterError("cambered 4-digit profile needs p > 0")

    front = x <= p
    yc = np.where(
        front,
        m / p ** 2 * (2 * p * x - x ** 2),
        m / (1 - p) ** 2 * ((1 - 2 * p) + 2 * p * x - x ** 2),
    )
    slope = np.where(front, 2 * m / p ** 2 * (p - x), 2 * m / (1 - p) ** 2 * (p - x))
    return yc, slope


def _max_camber_residual(m: float, p: float) -> float:
    return m * (1 - math.sqrt(m / 3)) - p


def solve_max_camber_m(p: float, method: str = "newton") -> float:
    """
    Solve p = m (1 - sqrt(m / 3)) for m on its increasing branch. Newton from
    m0 = 2p, bisection on [p, 4/3] when Newton leaves the bracket or stalls.
    """
    if not 0.0 <= p < MAX_CAMBER_P_LIMIT:
        raise DomainError(
            "camber position {} has no root on the increasing branch".format(p)
        )
    if p == 0.0:
        return 0.0

    def f(m: float) -> float:
        return _max_camber_residual(m, p)

    def fprime(m: float) -> float:
        return 1 - math.sqrt(3 * m) / 2

    if method == "newton":
        try:
            m = optimize.newton(f, 2 * p, fprime=fprime, tol=1e-15, maxiter=50)
            if p <= m <= MAX_CAMBER_M_UPPER and abs(f(m)) < 1e-13:
                return float(m)
            l.info("newton left the bracket for p=%s, falling back to bisection", p)
        except (RuntimeError, ValueError, ZeroDivisionError):
            l.info("newton did not converge for p=%s, falling back to bisection", p)
    elif method != "bisection":
        raise ParameterError("unknown method {}".format(method))

    m = optimize.bisect(f, p, MAX_CAMBER_M_UPPER, xtol=1e-16, maxiter=200)
    if abs(f(m)) >= 1e-12:
        raise NumericError("max camber solve did not converge for p={}".format(p))
    return float(m)


def q_factor(m: float) -> float:
    return (3 * m - 7 * m ** 2 + 8 * m ** 3 - 4 * m ** 4) / math.sqrt(
        m * (1 - m)
    ) - 1.5 * (1 - 2 * m) * (math.pi / 2 - math.asin(1 - 2 * m))


def five_digit_constants(params: Naca5Params) -> Tuple[float, float, float]:
    """
    (m, K1, K2) of a 5-digit camber line; K2 is 0 for standard camber.
    """
    m = solve_max_camber_m(params.p)
    k1 = params.cl_design / q_factor(m)
    k2 = 0.0
    if params.reflex:
        k2 = (3 * (m - params.p) ** 2 - m ** 3) / (1 - m) ** 3
    return m, k1, k2


def camber_five(x: ArrayLike, params: Naca5Params) -> Tuple[np.ndarray, np.ndarray]:
    x = np.asarray(x, dtype=float)
    _check_unit_interval(x)
    if params.cl_design == 0.0:
        return np.zeros_like(x), np.zeros_like(x)

    m, k1, k2 = five_digit_constants(params)
    front = x <= m
    if not params.reflex:
        yc = np.where(
            front, k1 * (m ** 2 * (3 - m) * x - 3 * m * x ** 2 + x ** 3), k1 * m ** 3 * (1 - x)
        )
        slope = np.where(
            front,
            k1 * (m ** 2 * (3 - m) - 6 * m * x + 3 * x ** 2),
            np.full_like(x, -k1 * m ** 3),
        )
        return yc, slope

    base = m ** 3 * (1 - x) - k2 * (1 - m) ** 3 * x
    base_slope = -(m ** 3) - k2 * (1 - m) ** 3
    yc = k1 * (base + np.where(front, 1.0, k2) * (x - m) ** 3)
    slope = k1 * (base_slope + np.where(front, 1.0, k2) * 3 * (x - m) ** 2)
    return yc, slope


def camber(x: ArrayLike, params: NacaParams) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(params, Naca4Params):
        if params.p == 0.0:
            x = np.asarray(x, dtype=float)
            _check_unit_interval(x)
            return np.zeros_like(x), np.zeros_like(x)
        return camber_four(x, params)
    return camber_five(x, params)


def camber_max_abscissa(params: NacaParams) -> float:
    if params.symmetric:
        return SYMMETRIC_MAX_ABSCISSA
    return params.p


def chord_stations(n_points: int, spacing: str) -> np.ndarray:
    if spacing == "cosine":
        x = 0.5 * (1 - np.cos(np.linspace(0.0, math.pi, n_points)))
    elif spacing == "uniform":
        x = np.linspace(0.0, 1.0, n_points)
    else:
        raise ParameterError("unknown spacing '{}'".format(spacing))
    x[0], x[-1] = 0.0, 1.0
    return x


class AirfoilGeometry:
    """
    Upper and lower surfaces ordered leading -> trailing edge, chord along
    the x axis with the leading edge at the origin.
    """

    def __init__(
        self,
        upper: np.ndarray,
        lower: np.ndarray,
        camber: np.ndarray,
        params: NacaParams,
        closed_te: bool,
        chord: float = CHORD,
    ) -> None:
        self.upper = upper
        self.lower = lower
        self.camber = camber
        self.params = params
        self.closed_te = closed_te
        self.chord = chord

    def outline(self) -> np.ndarray:
        """
        Closed counter-clockwise loop: trailing edge, upper surface to the
        leading edge, lower surface back to the trailing edge. The first point
        is repeated at the end.
        """
        loop = np.concatenate([self.upper[::-1], self.lower[1:]])
        return np.concatenate([loop, loop[:1]])

    def segments(self) -> Tuple[np.ndarray, np.ndarray]:
        loop = self.outline()
        start, end = loop[:-1], loop[1:]
        keep = np.any(start != end, axis=1)
        return start[keep], end[keep]

    def perimeter(self) -> float:
        start, end = self.segments()
        return float(np.sum(np.linalg.norm(end - start, axis=1)))

    def side(self, name: str) -> np.ndarray:
        if name == "upper":
            return self.upper
        if name == "lower":
            return self.lower
        raise ParameterError("unknown side '{}'".format(name))


def generate_airfoil(
    params: NacaParams,
    n_points: int = DEFAULT_POINTS,
    spacing: str = "cosine",
    closed_te: bool = False,
) -> AirfoilGeometry:
    if n_points < 16:
        raise ParameterError("need at least 16 points per surface, got {}".format(n_points))

    x = chord_stations(n_points, spacing)
    yt = half_thickness(x, params.t, closed_te)
    yc, slope = camber(x, params)
    theta = np.arctan(slope)
    # the blunt trailing-edge base stays perpendicular to the chord
    theta[-1] = 0.0

    upper = np.column_stack([x - yt * np.sin(theta), yc + yt * np.cos(theta)])
    lower = np.column_stack([x + yt * np.sin(theta), yc - yt * np.cos(theta)])
    upper[0] = lower[0] = (0.0, 0.0)
    camber_line = np.column_stack([x, yc])
    return AirfoilGeometry(
        upper * CHORD, lower * CHORD, camber_line * CHORD, params, closed_te
    )


def reynolds_to_velocity(reynolds: float) -> float:
    return reynolds * NU / CHORD


def velocity_to_reynolds(u_inf: float) -> float:
    return u_inf * CHORD / NU


def write_surface_table(name: str, points: np.ndarray, out: IO[str]) -> None:
    out.write("# {}\n".format(name))
    for x, y in points:
        out.write("{!r} {!r}\n".format(float(x), float(y)))


def generate_command(args: argparse.Namespace) -> None:
    params = params_from_digits(args.series, args.digits)
    geometry = generate_airfoil(
        params, n_points=args.n_points, spacing=args.spacing, closed_te=args.closed_te
    )
    out = sys.stdout
    if args.out is not None:
        out = open(args.out, "w")
    try:
        write_surface_table("upper", geometry.upper, out)
        write_surface_table("lower", geometry.lower, out)
        write_surface_table("camber", geometry.camber, out)
    finally:
        if out is not sys.stdout:
            out.close()
