import itertools
import json
import math

import numpy as np
import pytest
from scipy import stats

from airfoilkit.errors import DataError, ParameterError
from airfoilkit.metrics import composite_loss, field_mse, relative_error, spearman
from airfoilkit.metrics.evaluate import (
    COEFFICIENTS_TABLE,
    FIELDS_TABLE,
    SCATTER_TABLE,
    EvaluationReport,
    evaluate,
    score_case,
)
from airfoilkit.pipeline import Normalizer

from .helper import circle_cloud, make_case, shear_flow


def test_spearman_matches_rank_pearson() -> None:
    for n in range(2, 7):
        xs = np.arange(n, dtype=float)
        for perm in itertools.permutations(range(n)):
            ys = np.array(perm, dtype=float)
            oracle = np.corrcoef(stats.rankdata(xs), stats.rankdata(ys))[0, 1]
            assert spearman(xs, ys) == pytest.approx(oracle, abs=1e-12)


def test_spearman_examples() -> None:
    assert spearman([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8)
    assert spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
    rng = np.random.default_rng(1)
    x = rng.normal(size=40)
    y = x + rng.normal(scale=0.5, size=40)
    assert spearman(np.exp(x), y ** 3) == pytest.approx(spearman(x, y), abs=1e-12)


def test_spearman_ties() -> None:
    xs = [1.0, 2.0, 2.0, 3.0, 5.0]
    ys = [2.0, 1.0, 4.0, 4.0, 9.0]
    assert spearman(xs, ys) == pytest.approx(stats.spearmanr(xs, ys)[0], abs=1e-12)


def test_spearman_degenerate() -> None:
    assert math.isnan(spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
    with pytest.raises(DataError):
        spearman([1.0], [2.0])
    with pytest.raises(DataError):
        spearman([1.0, 2.0], [1.0, 2.0, 3.0])


def test_composite_loss() -> None:
    true = np.zeros((4, 4))
    pred = np.zeros((4, 4))
    pred[:2] = 1.0
    pred[2:, 2] = 2.0
    volume, surface = np.array([0, 1]), np.array([2, 3])
    assert composite_loss(pred, true, volume, surface) == pytest.approx(8.0)
    assert composite_loss(pred, true, volume, surface, lam=0.5) == pytest.approx(6.0)
    with pytest.raises(DataError):
        composite_loss(pred, true, np.array([], dtype=int), surface)
    with pytest.raises(ParameterError):
        composite_loss(pred, true, volume, surface, lam=-1.0)


def test_field_mse() -> None:
    true = np.zeros((3, 4))
    pred = np.array([[1.0, 0, 0, 0], [0, 2.0, 0, 0], [0, 0, 3.0, 0]])
    volume = np.array([True, True, False])
    scores = field_mse(pred, true, volume, ~volume)
    assert scores == {"u_x": 0.5, "u_y": 2.0, "p": 0.0, "nu_t": 0.0, "p_surface": 9.0}

    with pytest.raises(DataError):
        field_mse(pred, true, volume, np.array([True, False, True]))
    with pytest.raises(DataError):
        field_mse(pred, true, volume, np.array([False, False, False]))
    with pytest.raises(DataError):
        field_mse(pred, true, np.ones(3, dtype=bool), np.zeros(3, dtype=bool))
    with pytest.raises(DataError):
        field_mse(pred[:2], true, volume, ~volume)


def test_relative_error() -> None:
    mean, std = relative_error([1.1, 2.4], [1.0, 2.0])
    assert mean == pytest.approx(0.15) and std == pytest.approx(0.05)
    mean, std = relative_error([1.0, 5.0], [0.0, 5.0])
    assert mean == 0.0 and std == 0.0
    with pytest.raises(DataError):
        relative_error([1.0], [0.0])
    with pytest.raises(DataError):
        relative_error([1.0, 2.0], [1.0])


def circle_cases(n: int = 4) -> list:
    cases = []
    for k in range(n):
        scale = 100.0 * (k + 1)
        cloud = circle_cloud(
            120,
            n_volume=1200,
            seed=k,
            pressure=lambda x, s=scale: -s * x[:, 1],
            velocity=shear_flow(scale / 10.0, 1.0),
        )
        cases.append((cloud, make_case(aoa_deg=1.0 + 2 * k)))
    return cases


def test_evaluate_truth() -> None:
    cases = circle_cases()
    report = evaluate(cases, [cloud.fields for cloud, _ in cases])
    assert report.case_count == 4
    assert all(value == 0.0 for value in report.field_mse.values())
    assert report.drag_error == (0.0, 0.0)
    assert report.lift_error == (0.0, 0.0)
    assert report.spearman_drag == pytest.approx(1.0)
    assert report.spearman_lift == pytest.approx(1.0)
    assert report.accurate_drag and report.accurate_lift
    assert not report.normalized


def test_evaluate_scaled_prediction(tmp_path) -> None:
    cases = circle_cases()
    report = evaluate(cases, [1.3 * cloud.fields for cloud, _ in cases])
    assert report.drag_error[0] == pytest.approx(0.3, abs=1e-9)
    assert report.lift_error[0] == pytest.approx(0.3, abs=1e-9)
    assert report.drag_error[1] == pytest.approx(0.0, abs=1e-9)
    assert report.spearman_drag == pytest.approx(1.0)
    assert report.spearman_lift == pytest.approx(1.0)
    assert not report.accurate_drag
    assert report.field_mse["p_surface"] > 0

    data = report.to_json()
    assert data["relative_error"]["std"] == "population"
    assert len(data["cases"]) == 4

    report.write_tables(str(tmp_path))
    with open(str(tmp_path.joinpath(FIELDS_TABLE))) as f:
        assert f.readline().strip() == "Vx,Vy,p,nut,p_surface"
    with open(str(tmp_path.joinpath(COEFFICIENTS_TABLE))) as f:
        assert f.readline().strip() == "C_D_mean,C_D_std,C_L_mean,C_L_std,rho_D,rho_L"
    with open(str(tmp_path.joinpath(SCATTER_TABLE))) as f:
        assert len(f.read().splitlines()) == 5


def test_score_case_normalized() -> None:
    cloud, case = circle_cases(1)[0]
    prediction = cloud.fields + 1.0
    raw = score_case(cloud, case, prediction)
    scaled = score_case(cloud, case, prediction, Normalizer(np.zeros(4), np.full(4, 2.0)))
    for key, value in raw.mse.items():
        assert scaled.mse[key] == pytest.approx(value / 4.0)
    assert raw.mse["u_x"] == pytest.approx(1.0)
    assert scaled.c_d == raw.c_d
    with pytest.raises(DataError):
        score_case(cloud, case, prediction, Normalizer(np.zeros(7), np.ones(7)))


def test_evaluate_errors() -> None:
    cases = circle_cases(2)
    with pytest.raises(DataError):
        evaluate(cases, [cases[0][0].fields])
    with pytest.raises(DataError):
        EvaluationReport([], normalized=False)


def test_single_case_has_no_rank_correlation() -> None:
    cases = circle_cases(1)
    report = evaluate(cases, [cases[0][0].fields])
    assert math.isnan(report.spearman_drag) and math.isnan(report.spearman_lift)
    data = report.to_json()
    assert data["spearman"] == {"C_D": None, "C_L": None}
    assert json.loads(json.dumps(data, allow_nan=False))["spearman"]["C_D"] is None
