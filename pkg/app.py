"""
Command-line entry point.

    python app.py sweep-full --config configs/sphere.yaml
    python app.py sweep-pod --config configs/sphere.yaml --snapshots 13 --tol 1e-4
    python app.py scale results/sweep_pod.csv --lemma size --factor 2
    python app.py compare-oracle --config configs/sphere.yaml

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 certificate unavailable, 1 anything else.
"""

from typing import List, Optional
import argparse
import logging
import sys

from agents import EXIT_FAILURE, EXIT_OK, log_level

logger = logging.getLogger(__name__)

SWEEP_COMMANDS = {
    "sweep-full": "Frequency sweep with the full-order model",
    "sweep-pod": "Reduced sweep with certificate bounds",
    "compare-oracle": "Compare a sphere sweep with the closed-form solution",
}


def _add_sweep_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", required=True, metavar="PATH", help="YAML run configuration")
    parser.add_argument("--out", metavar="DIR",
                        help="Output directory (default: output.dir, MPT_OUT_DIR, then ./results)")
    parser.add_argument("--threads", type=int, metavar="K",
                        help="Worker threads for independent solves (default: solver.threads, MPT_THREADS, then 1)")
    parser.add_argument("--tol", type=float, metavar="X",
                        help="Truncation tolerance sigma_i/sigma_1 of the reduced basis (default: pod.tol, 1e-4)")
    parser.add_argument("--snapshots", type=int, metavar="N", help="Number of snapshots (default: sweep.snapshots, 13)")
    parser.add_argument("--spacing", choices=("log", "lin"), help="Snapshot and output spacing (default: log)")
    parser.add_argument("--outputs", type=int, metavar="N0", help="Number of output frequencies (default: 40)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mpt",
        description="Magnetic polarizability tensor spectral signatures",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    commands = parser.add_subparsers(dest="command", required=True)
    for name, description in SWEEP_COMMANDS.items():
        _add_sweep_flags(commands.add_parser(name, help=description, description=description))

    scale = commands.add_parser("scale", help="Rescale an existing sweep without new solves")
    scale.add_argument("input", help="Sweep CSV or JSON written by sweep-full or sweep-pod")
    scale.add_argument("--lemma", required=True, choices=("conductivity", "size"))
    scale.add_argument("--factor", required=True, type=float, metavar="S", help="Scaling factor s > 0")
    scale.add_argument("--out", metavar="DIR", help="Output directory (default: MPT_OUT_DIR, then ./results)")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=log_level(), format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    from graph import run_command

    try:
        if args.command == "scale":
            state = run_command(
                "scale",
                overrides={"out": args.out},
                scale_request={"input": args.input, "lemma": args.lemma, "factor": args.factor},
            )
        else:
            overrides = {key: getattr(args, key) for key in ("out", "threads", "tol", "snapshots", "spacing", "outputs")}
            state = run_command(args.command, config_path=args.config, overrides=overrides)
    except Exception as e:
        logger.error(f"Unexpected failure: {str(e)}")
        return EXIT_FAILURE

    if state.get("errors"):
        for error in state["errors"]:
            print(f"error: {error}", file=sys.stderr)
        return state["exit_codes"][0] if state.get("exit_codes") else EXIT_FAILURE

    for name, path in (state.get("outputs") or {}).items():
        print(f"{name}: {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
