#!/usr/bin/env python3
import argparse
import json
import logging
import os
import sys

from airfoilkit.case_io import synth_case, write_case
from airfoilkit.design_space import sample_design_space
from airfoilkit.errors import AirfoilKitError
from airfoilkit.progress_log import ProgressLog

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description="Write a directory of synthetic cases")
    parser.add_argument("--count", type=int, default=10, help="number of cases")
    parser.add_argument("--seed", type=int, default=0, help="design space seed")
    parser.add_argument("--format", choices=("text", "binary"), default="binary")
    parser.add_argument("--out", required=True, help="directory of case directories")
    arg = parser.parse_args()
    logging.basicConfig(level=logging.INFO)

    cases = sample_design_space(arg.seed, arg.count)
    progress = ProgressLog("synth", len(cases), log_frequency=len(cases))
    try:
        for done, case in enumerate(cases, start=1):
            write_case(synth_case(case), case, os.path.join(arg.out, case.name), arg.format)
            progress.update(done)
    except AirfoilKitError as e:
        print(e, file=sys.stderr)
        sys.exit(e.exit_code)
    with open(os.path.join(arg.out, "cases.json"), "w") as f:
        json.dump([case.to_json() for case in cases], f, indent=2)
