import math
import os
from typing import Tuple

# air at 298.15 K, sea level
NU = 1.56e-5  # kinematic viscosity, m^2/s
RHO = 1.184  # specific mass, kg/m^3

CHORD = 1.0
# the chord is used as the 1D characteristic "area"
REFERENCE_AREA = 1.0

REYNOLDS_RANGE = (2e6, 6e6)
AOA_RANGE_DEG = (-5.0, 15.0)

# 4-digit series: M, P, XX; P draws below 1.5 are set to 0
NACA4_M_RANGE = (0.0, 7.0)
NACA4_P_RANGE = (0.0, 7.0)
NACA4_P_CUTOFF = 1.5
NACA_XX_RANGE = (5.0, 20.0)
# 5-digit series: L, P, Q, XX
NACA5_L_RANGE = (0.0, 4.0)
NACA5_P_RANGE = (3.0, 8.0)

CROP_RECTANGLE = (-2.0, 4.0, -1.5, 1.5)  # xmin, xmax, ymin, ymax
SUBSAMPLE_NODES = 32000
GRAPH_RADIUS = 0.05
GRAPH_MAX_NEIGHBORS = 64

DATASET_SIZE = 1000
FULL_TRAIN_SIZE = 800
SCARCE_TRAIN_SIZE = 200
REYNOLDS_TRAIN_WINDOW = (3e6, 5e6)
AOA_TRAIN_WINDOW_DEG = (-2.5, 12.5)

ACCURACY_THRESHOLD = 0.05

THREADS_ENV = "AIRFOIL_KIT_THREADS"


def worker_count() -> int:
    """
    Number of workers allowed by AIRFOIL_KIT_THREADS, 0 or unset means all
    cores.
    """
    value = os.environ.get(THREADS_ENV, "0").strip() or "0"
    try:
        threads = int(value)
    except ValueError:
        threads = 0
    if threads <= 0:
        return os.cpu_count() or 1
    return threads


def aoa_range() -> Tuple[float, float]:
    return (math.radians(AOA_RANGE_DEG[0]), math.radians(AOA_RANGE_DEG[1]))
