import argparse
import sys
from typing import Any, List, NoReturn

from . import consts
from .case_io import BOUNDARY_LAYER
from .errors import UsageError
from .naca import DEFAULT_POINTS
from .pipeline.splits import TASKS
from .post.gradient import DEFAULT_NEIGHBORS

DEFAULT_SEED = 0
DEFAULT_FORMAT = "text"


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        raise UsageError("{}: {}".format(self.prog, message))


def add_global_flags(parser: argparse.ArgumentParser) -> None:
    # SUPPRESS lets the flags appear before or after the subcommand
    parser.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed")
    parser.add_argument("--out", default=argparse.SUPPRESS, help="output file or directory")
    parser.add_argument(
        "--format",
        choices=("text", "binary"),
        default=argparse.SUPPRESS,
        help="node table format of written cases",
    )


def add_mesh_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--n-points", type=int, default=DEFAULT_POINTS)
    parser.add_argument("--domain-extent", type=float, help="far-field radius (m)")
    parser.add_argument("--wall-first-cell", type=float, help="first cell height (m)")
    parser.add_argument("--wall-ratio", type=float)
    parser.add_argument("--le-first-width", type=float)
    parser.add_argument("--le-ratio", type=float)
    parser.add_argument("--wake-first-cell", type=float)
    parser.add_argument("--te-first-width", type=float)
    parser.add_argument("--aft-cells", type=int)
    parser.add_argument("--wake-ratio", type=float)
    parser.add_argument("--normal-cells", type=int)


def lazy(module: str, name: str) -> Any:
    def command(args: argparse.Namespace) -> Any:
        import importlib

        return getattr(importlib.import_module(module, __package__), name)(args)

    return command


def parse_arguments(argv: List[str]) -> argparse.Namespace:
    parser = ArgumentParser(
        prog=argv[0], description="airfoil geometry, meshes and surrogate evaluation"
    )
    parser.add_argument(
        "--debug", action="store_true", help="jump into ipdb post mortem debugger"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress")
    add_global_flags(parser)
    subparsers = parser.add_subparsers(
        title="subcommands", description="valid subcommands", help="additional help"
    )

    def subcommand(name: str, module: str, func: str, help: str) -> argparse.ArgumentParser:
        sub = subparsers.add_parser(name, help=help)
        add_global_flags(sub)
        sub.set_defaults(func=lazy(module, func))
        return sub

    generate = subcommand("generate", ".naca", "generate_command", "airfoil coordinates")
    generate.add_argument("series", type=int, choices=(4, 5))
    generate.add_argument("digits", type=float, nargs="+", help="M P XX or L P Q XX")
    generate.add_argument("--n-points", type=int, default=DEFAULT_POINTS)
    generate.add_argument("--spacing", choices=("cosine", "uniform"), default="cosine")
    generate.add_argument("--closed-te", action="store_true")

    sample = subcommand("sample", ".design_space", "sample_command", "draw cases")
    sample.add_argument("--count", type=int, default=consts.DATASET_SIZE)
    sample.add_argument("--four-digit-probability", type=float, default=0.5)

    mesh = subcommand("mesh", ".mesh", "mesh_command", "C-grid of a case")
    mesh.add_argument("case", help="case.json")
    mesh.add_argument("--block-dict", help="also write a hexahedral block dictionary")
    add_mesh_flags(mesh)

    post = subcommand("postprocess", ".post", "postprocess_command", "forces of a case")
    post.add_argument("case", help="case directory")
    post.add_argument("--pred", help="predicted fields replacing the simulated ones")
    post.add_argument("--k-neighbors", type=int, default=DEFAULT_NEIGHBORS)

    profiles = subcommand("profiles", ".post", "profiles_command", "boundary layer profiles")
    profiles.add_argument("case", help="case directory")
    profiles.add_argument("--x", type=float, nargs="+", required=True, help="chord stations")
    profiles.add_argument("--side", choices=("upper", "lower"), default="upper")
    profiles.add_argument("--max-dist", type=float, default=0.05)
    profiles.add_argument("--n-samples", type=int, default=101)

    split = subcommand("split", ".pipeline.splits", "split_command", "train/test split")
    split.add_argument("cases", help="case table (csv) or directory of cases")
    split.add_argument("--task", choices=TASKS, required=True)
    split.add_argument("--val-fraction", type=float, default=0.0)

    graph = subcommand("graph", ".pipeline.graph", "graph_command", "radius graph")
    graph.add_argument("case", help="case directory")
    graph.add_argument("--n", type=int, default=consts.SUBSAMPLE_NODES)
    graph.add_argument("--radius", type=float, default=consts.GRAPH_RADIUS)
    graph.add_argument("--max-nb", type=int, default=consts.GRAPH_MAX_NEIGHBORS)

    evaluate = subcommand("evaluate", ".metrics.evaluate", "evaluate_command", "score predictions")
    evaluate.add_argument("--split", required=True, help="split.json")
    evaluate.add_argument("--pred-dir", required=True, help="<case name>.txt predictions")
    evaluate.add_argument("--cases", help="directory of cases (default: next to the split)")
    evaluate.add_argument("--normalizer", help="normalizer.json of the target fields")
    evaluate.add_argument("--k-neighbors", type=int, default=DEFAULT_NEIGHBORS)

    synth = subcommand("synth", ".case_io", "synth_command", "synthetic case directory")
    synth.add_argument("case", help="case.json")
    synth.add_argument("--thickness", type=float, default=BOUNDARY_LAYER, help="boundary layer (m)")
    add_mesh_flags(synth)

    args = parser.parse_args(argv[1:])
    if not hasattr(args, "func"):
        parser.print_usage(sys.stderr)
        raise UsageError("no subcommand given")
    for name, default in (("seed", DEFAULT_SEED), ("out", None), ("format", DEFAULT_FORMAT)):
        if not hasattr(args, name):
            setattr(args, name, default)
    return args
