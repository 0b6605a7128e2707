"""
main.py - Command-line interface for sykmonitor sweeps
"""

import argparse
import logging
import sys

from ..core.errors import SykMonitorError
from .config import MODES, OBSERVABLES, SweepConfig
from .runner import run_mode

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def build_parser():
    """Argument parser; every flag defaults to None so the config file can fill it"""
    parser = argparse.ArgumentParser(
        prog="sykmonitor",
        description="Monitored SYK trajectories: growth, phase diagrams, "
                    "purification rates, jump traces and decoupling scans.",
    )
    parser.add_argument("--config", help="JSON file with settings (flags override it)")
    parser.add_argument("--mode", choices=MODES)

    model = parser.add_argument_group("model")
    model.add_argument("--n-majoranas", help="N, or a comma list for growth/egr")
    model.add_argument("--j", help="coupling J, or a comma list for growth/egr")

    sweep = parser.add_argument_group("sweep")
    sweep.add_argument("--gamma-ratio", help="Gamma_m/Gamma_egr axis: list, lin:A:B:N or log:A:B:N")
    sweep.add_argument("--p-m", help="measurement probability axis: list, lin:A:B:N or log:A:B:N")
    sweep.add_argument("--dt", type=float)
    sweep.add_argument("--t-max", type=float)
    sweep.add_argument("--record-interval", type=float)
    sweep.add_argument("--t-inf", type=float, help="steady-state time of phase modes")
    sweep.add_argument("--runs", type=int, help="trajectories per cell")
    sweep.add_argument("--batches", type=int, help="batches for error bars (must divide runs)")
    sweep.add_argument("--observable", choices=OBSERVABLES, help="dynamics mode observable")
    sweep.add_argument("--gamma-egr", type=float, help="skip calibration and use this Gamma_egr")
    sweep.add_argument("--calibration-runs", type=int)
    sweep.add_argument("--calibration-t-max", type=float)

    decoupling = parser.add_argument_group("decoupling")
    decoupling.add_argument("--n-system", help="system sizes, comma list")
    decoupling.add_argument("--gamma-frac", help="Bell-paired fractions, comma list")
    decoupling.add_argument("--p-meas", help="measured fractions, comma list")
    decoupling.add_argument("--haar-samples", type=int)
    decoupling.add_argument("--rounds", type=int, help="scramble-and-measure rounds")

    run = parser.add_argument_group("execution")
    run.add_argument("--seed", type=int, help="master seed")
    run.add_argument("--workers", type=int, help="worker processes")
    run.add_argument("--out", help="output directory")
    run.add_argument("--log-level", choices=("DEBUG", "INFO", "WARNING", "ERROR"))
    return parser


def load_config(args):
    """SweepConfig from the parsed arguments and the optional config file"""
    overrides = {name: value for name, value in vars(args).items() if name != "config"}
    if args.config:
        return SweepConfig.from_file(args.config, overrides)
    return SweepConfig.from_sources(None, overrides)


def main(argv=None):
    """Entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=(args.log_level or "INFO").upper(), format=LOG_FORMAT)

    try:
        cfg = load_config(args)
        logging.getLogger().setLevel(cfg.log_level.upper())
        for path in run_mode(cfg):
            print(path)
        return 0
    except SykMonitorError as e:
        logger.error("%s", e)
        return 2
    except OSError as e:
        logger.error("I/O error: %s", e)
        return 2
    except Exception:
        logger.exception("unexpected failure")
        return 1


if __name__ == "__main__":
    sys.exit(main())
