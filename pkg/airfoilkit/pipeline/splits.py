import argparse
import collections
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from .. import consts
from ..design_space import CaseSpec, read_case_table
from ..errors import DataError, ParameterError

l = logging.getLogger(__name__)

TASKS = ("full", "scarce", "reynolds", "aoa")
FULL_TRAIN_FRACTION = consts.FULL_TRAIN_SIZE / consts.DATASET_SIZE
SCARCE_TRAIN_FRACTION = consts.SCARCE_TRAIN_SIZE / consts.DATASET_SIZE
# float slack on the closed extrapolation windows
WINDOW_SLACK = 1e-9


class TaskSplit:
    def __init__(
        self,
        task: str,
        train_ids: List[str],
        test_ids: List[str],
        val_ids: Optional[List[str]] = None,
        seed: Optional[int] = None,
    ) -> None:
        self.task = task
        self.train_ids = train_ids
        self.test_ids = test_ids
        self.val_ids = [] if val_ids is None else val_ids
        self.seed = seed
        overlap = (set(train_ids) & set(test_ids)) | (set(self.val_ids) & set(test_ids))
        overlap |= set(train_ids) & set(self.val_ids)
        if overlap:
            raise DataError("case {} is in more than one set".format(sorted(overlap)[0]))

    def to_json(self) -> Dict[str, Any]:
        return dict(
            task=self.task,
            seed=self.seed,
            train=self.train_ids,
            val=self.val_ids,
            test=self.test_ids,
        )

    @classmethod
    def from_json(cls, data: Dict[str, Any]) -> "TaskSplit":
        try:
            return cls(data["task"], data["train"], data["test"], data.get("val"), data.get("seed"))
        except KeyError as e:
            raise DataError("split file misses '{}'".format(e.args[0]))

    @classmethod
    def load(cls, path: str) -> "TaskSplit":
        with open(path) as f:
            return cls.from_json(json.load(f))


def in_reynolds_window(case: CaseSpec) -> bool:
    lo, hi = consts.REYNOLDS_TRAIN_WINDOW
    return lo * (1 - WINDOW_SLACK) <= case.reynolds <= hi * (1 + WINDOW_SLACK)


def in_aoa_window(case: CaseSpec) -> bool:
    lo, hi = consts.AOA_TRAIN_WINDOW_DEG
    return lo - WINDOW_SLACK <= case.aoa_deg <= hi + WINDOW_SLACK


def split_dataset(
    cases: Sequence[CaseSpec],
    task: str,
    seed: int = 0,
    val_fraction: float = 0.0,
) -> TaskSplit:
    """
    full: seeded 80/20 partition (800/200 on the 1000-case roster).
    scarce: a seeded quarter of the full training set, same test set.
    reynolds / aoa: train inside the training window, test outside.
    """
    if task not in TASKS:
        raise ParameterError("unknown task '{}'".format(task))
    if not 0.0 <= val_fraction < 1.0:
        raise ParameterError("validation fraction must lie in [0, 1)")
    if len(cases) < 2:
        raise DataError("need at least two cases to split")
    names = [case.name for case in cases]
    if len(set(names)) != len(names):
        raise DataError("case names are not unique")

    streams = np.random.SeedSequence(seed).spawn(3)
    if task in ("full", "scarce"):
        n_train = int(round(len(cases) * FULL_TRAIN_FRACTION))
        order = np.random.default_rng(streams[0]).permutation(len(cases))
        train = [names[k] for k in sorted(order[:n_train])]
        test = [names[k] for k in sorted(order[n_train:])]
        if task == "scarce":
            n_scarce = int(round(len(cases) * SCARCE_TRAIN_FRACTION))
            pick = np.random.default_rng(streams[1]).choice(len(train), n_scarce, replace=False)
            train = [train[k] for k in sorted(pick)]
    else:
        inside = in_reynolds_window if task == "reynolds" else in_aoa_window
        train = [case.name for case in cases if inside(case)]
        test = [case.name for case in cases if not inside(case)]

    val = []  # type: List[str]
    if val_fraction > 0 and train:
        n_val = int(round(len(train) * val_fraction))
        pick = set(np.random.default_rng(streams[2]).choice(len(train), n_val, replace=False))
        val = [name for k, name in enumerate(train) if k in pick]
        train = [name for k, name in enumerate(train) if k not in pick]

    split = TaskSplit(task, train, test, val, seed)
    l.info(
        "%s split: %d train, %d val, %d test", task, len(train), len(val), len(test)
    )
    return split


def _set_statistics(cases: List[CaseSpec]) -> Dict[str, Any]:
    if not cases:
        return dict(count=0)
    reynolds = np.array([c.reynolds for c in cases])
    aoa = np.array([c.aoa_deg for c in cases])
    series = collections.Counter(str(c.series) for c in cases)
    return dict(
        count=len(cases),
        reynolds=dict(
            min=float(reynolds.min()), max=float(reynolds.max()), mean=float(reynolds.mean())
        ),
        aoa_deg=dict(min=float(aoa.min()), max=float(aoa.max()), mean=float(aoa.mean())),
        series=dict(sorted(series.items())),
    )


def describe_split(split: TaskSplit, cases: Sequence[CaseSpec]) -> Dict[str, Any]:
    by_name = {case.name: case for case in cases}
    stats = {}
    for name, ids in (("train", split.train_ids), ("val", split.val_ids), ("test", split.test_ids)):
        try:
            members = [by_name[i] for i in ids]
        except KeyError as e:
            raise DataError("split names unknown case {}".format(e.args[0]))
        stats[name] = _set_statistics(members)
    return stats


def load_roster(path: str) -> List[CaseSpec]:
    """Cases from a sampled CSV table or from a directory of case directories."""
    if os.path.isdir(path):
        cases = []
        for entry in sorted(os.listdir(path)):
            meta = os.path.join(path, entry, "case.json")
            if os.path.exists(meta):
                with open(meta) as f:
                    cases.append(CaseSpec.from_json(json.load(f)))
        if not cases:
            raise DataError("no case directory below {}".format(path))
        return cases
    return read_case_table(path)


def split_command(args: argparse.Namespace) -> None:
    cases = load_roster(args.cases)
    split = split_dataset(cases, args.task, args.seed, args.val_fraction)
    data = split.to_json()
    data["statistics"] = describe_split(split, cases)
    text = json.dumps(data, indent=2, sort_keys=True)
    if args.out is None:
        print(text)
    else:
        with open(args.out, "w") as f:
            f.write(text + "\n")

