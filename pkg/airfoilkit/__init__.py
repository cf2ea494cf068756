import logging
import sys
from typing import List, Optional

from .cli import parse_arguments
from .errors import AirfoilKitError

l = logging.getLogger(__name__)


def main(argv: List[str] = sys.argv) -> int:
    try:
        args = parse_arguments(argv)
    except AirfoilKitError as e:
        print(e, file=sys.stderr)
        return e.exit_code
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    if args.debug:
        from ipdb import launch_ipdb_on_exception

        failure = None  # type: Optional[Exception]
        with launch_ipdb_on_exception():
            try:
                args.func(args)
            except Exception as e:
                # the debugger swallows the exception once the session ends
                failure = e
                raise
        if failure is None:
            return 0
        return failure.exit_code if isinstance(failure, AirfoilKitError) else 1
    try:
        args.func(args)
    except AirfoilKitError as e:
        l.error("%s", e)
        return e.exit_code
    return 0
