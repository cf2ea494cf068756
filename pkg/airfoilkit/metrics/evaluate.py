import argparse
import csv
import json
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import TYPE_CHECKING, Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .. import consts
from ..cloud import FIELD_COLUMNS, SimulationCloud
from ..errors import DataError
from ..post import postprocess_case
from ..post.gradient import DEFAULT_NEIGHBORS
from ..progress_log import ProgressLog
from . import SURFACE_PRESSURE, field_mse, relative_error, spearman

if TYPE_CHECKING:
    from ..design_space import CaseSpec
    from ..pipeline import Normalizer

l = logging.getLogger(__name__)

# column titles of the field table
FIELD_TITLES = dict(u_x="Vx", u_y="Vy", p="p", nu_t="nut")
FIELDS_TABLE = "fields.csv"
COEFFICIENTS_TABLE = "coefficients.csv"
SCATTER_TABLE = "scatter.csv"


class CaseScore:
    def __init__(
        self,
        name: str,
        mse: Dict[str, float],
        c_d: Tuple[float, float],
        c_l: Tuple[float, float],
    ) -> None:
        self.name = name
        self.mse = mse
        # (true, predicted)
        self.c_d = c_d
        self.c_l = c_l


def _json_number(value: float) -> Optional[float]:
    # JSON has no NaN, an undefined correlation is written as null
    return value if math.isfinite(value) else None


class EvaluationReport:
    """
    Scores of one prediction set. Field errors are averaged over cases with
    equal weight; coefficient errors are mean and population std over cases.
    """

    def __init__(self, scores: List[CaseScore], normalized: bool) -> None:
        if not scores:
            raise DataError("nothing to evaluate")
        self.scores = scores
        self.normalized = normalized

        keys = list(FIELD_COLUMNS) + [SURFACE_PRESSURE]
        table = np.array([[score.mse[k] for k in keys] for score in scores])
        self.field_mse = {k: float(v) for k, v in zip(keys, table.mean(axis=0))}

        c_d = np.array([score.c_d for score in scores])
        c_l = np.array([score.c_l for score in scores])
        self.drag_error = relative_error(c_d[:, 1], c_d[:, 0])
        self.lift_error = relative_error(c_l[:, 1], c_l[:, 0])
        if len(scores) >= 2:
            self.spearman_drag = spearman(c_d[:, 0], c_d[:, 1])
            self.spearman_lift = spearman(c_l[:, 0], c_l[:, 1])
        else:
            l.warning("rank correlation needs two cases, got one")
            self.spearman_drag = self.spearman_lift = float("nan")

    @property
    def case_count(self) -> int:
        return len(self.scores)

    @property
    def accurate_drag(self) -> bool:
        return self.drag_error[0] < consts.ACCURACY_THRESHOLD

    @property
    def accurate_lift(self) -> bool:
        return self.lift_error[0] < consts.ACCURACY_THRESHOLD

    def to_json(self) -> Dict[str, Any]:
        return dict(
            case_count=self.case_count,
            normalized_fields=self.normalized,
            field_mse=self.field_mse,
            relative_error=dict(
                C_D=dict(mean=self.drag_error[0], std=self.drag_error[1]),
                C_L=dict(mean=self.lift_error[0], std=self.lift_error[1]),
                std="population",
            ),
            spearman=dict(
                C_D=_json_number(self.spearman_drag), C_L=_json_number(self.spearman_lift)
            ),
            accurate_drag=self.accurate_drag,
            accurate_lift=self.accurate_lift,
            cases=[
                dict(
                    name=score.name,
                    field_mse=score.mse,
                    C_D=list(score.c_d),
                    C_L=list(score.c_l),
                )
                for score in self.scores
            ],
        )

    def write_tables(self, directory: str) -> None:
        os.makedirs(directory, exist_ok=True)
        keys = list(FIELD_COLUMNS) + [SURFACE_PRESSURE]
        with open(os.path.join(directory, FIELDS_TABLE), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow([FIELD_TITLES.get(k, k) for k in keys])
            writer.writerow([repr(self.field_mse[k]) for k in keys])
        with open(os.path.join(directory, COEFFICIENTS_TABLE), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["C_D_mean", "C_D_std", "C_L_mean", "C_L_std", "rho_D", "rho_L"])
            writer.writerow(
                [
                    repr(v)
                    for v in (
                        self.drag_error[0],
                        self.drag_error[1],
                        self.lift_error[0],
                        self.lift_error[1],
                        self.spearman_drag,
                        self.spearman_lift,
                    )
                ]
            )
        with open(os.path.join(directory, SCATTER_TABLE), "w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["case", "C_D_true", "C_D_pred", "C_L_true", "C_L_pred"])
            for score in self.scores:
                writer.writerow(
                    [score.name] + [repr(v) for v in score.c_d + score.c_l]
                )


def score_case(
    cloud: SimulationCloud,
    case: "CaseSpec",
    prediction: np.ndarray,
    normalizer: Optional["Normalizer"] = None,
    k_neighbors: int = DEFAULT_NEIGHBORS,
) -> CaseScore:
    """
    Field errors on normalized fields when a normalizer is given, force
    coefficients from the physical predicted fields.
    """
    predicted = cloud.with_fields(prediction)
    truth, guess = cloud.fields, predicted.fields
    if normalizer is not None:
        if len(normalizer.means) != len(FIELD_COLUMNS):
            raise DataError(
                "normalizer has {} channels, fields have {}".format(
                    len(normalizer.means), len(FIELD_COLUMNS)
                )
            )
        truth, guess = normalizer.apply(truth), normalizer.apply(guess)
    mse = field_mse(guess, truth, ~cloud.surface_mask, cloud.surface_mask)

    reference = postprocess_case(cloud, case, k_neighbors).forces
    forces = postprocess_case(predicted, case, k_neighbors).forces
    return CaseScore(
        case.name, mse, (reference.c_d, forces.c_d), (reference.c_l, forces.c_l)
    )


def evaluate(
    cases: Sequence[Tuple[SimulationCloud, "CaseSpec"]],
    predictions: Sequence[np.ndarray],
    normalizer: Optional["Normalizer"] = None,
    k_neighbors: int = DEFAULT_NEIGHBORS,
) -> EvaluationReport:
    if len(cases) != len(predictions):
        raise DataError(
            "{} predictions for {} cases".format(len(predictions), len(cases))
        )
    progress = ProgressLog("evaluate", len(cases))

    def run(k: int) -> CaseScore:
        cloud, case = cases[k]
        return score_case(cloud, case, predictions[k], normalizer, k_neighbors)

    scores = []
    with ThreadPoolExecutor(max_workers=consts.worker_count()) as pool:
        # map keeps the case order, so the reductions do not depend on scheduling
        for done, score in enumerate(pool.map(run, range(len(cases))), start=1):
            scores.append(score)
            progress.update(done)
    return EvaluationReport(scores, normalizer is not None)


def prediction_path(pred_dir: str, name: str) -> str:
    return os.path.join(pred_dir, name + ".txt")


def evaluate_command(args: argparse.Namespace) -> None:
    from ..case_io import read_case, read_prediction
    from ..pipeline import Normalizer
    from ..pipeline.splits import TaskSplit

    split = TaskSplit.load(args.split)
    cases_dir = args.cases if args.cases is not None else os.path.dirname(args.split)
    normalizer = Normalizer.load(args.normalizer) if args.normalizer else None

    cases = []
    predictions = []
    for name in split.test_ids:
        cloud, case = read_case(os.path.join(cases_dir, name))
        cases.append((cloud, case))
        predictions.append(read_prediction(prediction_path(args.pred_dir, name), len(cloud)))
    report = evaluate(cases, predictions, normalizer, args.k_neighbors)

    text = json.dumps(report.to_json(), indent=2, sort_keys=True, allow_nan=False)
    if args.out is None:
        print(text)
        return
    with open(args.out, "w") as f:
        f.write(text + "\n")
    report.write_tables(os.path.dirname(os.path.abspath(args.out)))
    l.info("%d cases evaluated, report in %s", report.case_count, args.out)
