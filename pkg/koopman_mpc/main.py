import argparse
import logging
import sys

from koopman_mpc.commands import compare, report, run, train
from koopman_mpc.config import APP_NAME, LOG_LEVEL
from koopman_mpc.errors import KoopmanMpcError

logger = logging.getLogger(__name__)

COMMANDS = (train, run, compare, report)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Run configuration (TOML)")
    common.add_argument("--out", default=None, help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="Seed for training excitation")
    common.add_argument(
        "--set",
        action="append",
        default=[],
        metavar="SECTION.KEY=VALUE",
        help="Override one configuration value (repeatable)",
    )
    common.add_argument("--log-level", default=LOG_LEVEL)

    parser = argparse.ArgumentParser(
        prog=APP_NAME,
        description="Koopman-model FCS-MPC versus white-box MPC and FOC for an IPMSM drive",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for command in COMMANDS:
        command.register(subparsers, [common])
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=args.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.handler(args)
    except KoopmanMpcError as e:
        logger.error(f"{args.command} failed at stage '{e.stage}': {e}", exc_info=True)
        print(f"error [{e.stage}]: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        logger.error(f"{args.command} failed at stage '{args.stage}': {e}", exc_info=True)
        print(f"error [{args.stage}]: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
