"""Command-line entry point for the equinet experiment harness."""
import argparse
import asyncio
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from app.core.config import settings
from app.core.errors import ConfigError
from app.core.logging import logger, set_console_level
from app.output.exporter import write_rows
from app.pipelines.experiment_pipeline import run_experiment, run_kernel_sweep
from app.pipelines.experiments import HANDLERS
from app.services.loader import load_builtin_experiments, load_experiment_config, validate_experiment_config
from app.services.operators.spectral import KERNEL_GAP_COLUMNS

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_USAGE = 2


def _pair(text: str) -> Tuple[int, int]:
    try:
        a, b = (int(part) for part in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'a,b' with nonnegative integers, got {text!r}")
    if a < 0 or b < 0:
        raise argparse.ArgumentTypeError(f"orders must be nonnegative, got {text!r}")
    return a, b


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="equinet",
        description="Deterministic experiments on lattice operators and equivariant networks",
    )
    parser.add_argument("--jobs", type=int, default=None,
                        help="cases run concurrently (default: EQUINET_JOBS or 1)")
    parser.add_argument("-v", "--verbose", action="store_true", help="DEBUG output on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one experiment config")
    run.add_argument("config", type=Path, help="experiment config JSON")
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--seed", type=int, default=None, help="override the config seed")

    kernels = sub.add_parser("check-kernels", help="kernel-gap sweep as CSV on stdout")
    kernels.add_argument("--ab", type=_pair, action="append", required=True,
                         help="derivative orders 'a,b'; repeat for several pairs")
    kernels.add_argument("--lambdas", type=_float_list, required=True,
                         help="descending grid spacings, e.g. 0.5,0.25")

    sub.add_parser("list-experiments", help="list experiment kinds and built-in configs")

    selftest = sub.add_parser("selftest", help="run every built-in experiment")
    selftest.add_argument("--out", type=Path, default=None, help="root output directory")
    return parser


async def _run(args) -> int:
    cfg = await load_experiment_config(args.config)
    if args.seed is not None:
        cfg = validate_experiment_config({**cfg.model_dump(mode="json"), "seed": args.seed})
    report = await run_experiment(cfg, args.jobs, args.out)
    print(f"{cfg.label}: {report.verdict}")
    return EXIT_PASS if report.passed else EXIT_FAIL


async def _check_kernels(args) -> int:
    results, verdicts = await run_kernel_sweep(args.ab, args.lambdas, args.jobs or settings.JOBS)
    failed = [r for r in results if not r.ok]
    for r in failed:
        print(f"error: {r.case_id}: {r.error}", file=sys.stderr)
    rows = [{k: r.metrics[k] for k in KERNEL_GAP_COLUMNS} for r in results if r.ok]
    write_rows(rows, sys.stdout)
    return EXIT_PASS if not failed and all(v.passed for v in verdicts) else EXIT_FAIL


async def _list_experiments(args) -> int:
    for kind, handler in HANDLERS.items():
        print(f"{kind}\t{handler.description}")
    for cfg in await load_builtin_experiments():
        print(f"builtin\t{cfg.label}\t{cfg.kind}")
    return EXIT_PASS


async def _selftest(args) -> int:
    configs = await load_builtin_experiments()
    if not configs:
        print(f"error: no built-in experiments under {settings.EXPERIMENTS_DIR}", file=sys.stderr)
        return EXIT_USAGE
    root = args.out or settings.OUT_DIR or settings.OUTPUT_DIR / "selftest"
    passed = True
    for cfg in configs:
        report = await run_experiment(cfg, args.jobs, Path(root) / cfg.label)
        print(f"{cfg.label}: {report.verdict}")
        passed = passed and report.passed
    print(f"selftest: {'pass' if passed else 'fail'}")
    return EXIT_PASS if passed else EXIT_FAIL


COMMANDS = {
    "run": _run,
    "check-kernels": _check_kernels,
    "list-experiments": _list_experiments,
    "selftest": _selftest,
}


def cli_main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments and dispatch.

    Returns:
        0 when every verdict passes, 1 when one fails, 2 on usage errors,
        missing files or invalid configs
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    if args.jobs is not None and args.jobs < 1:
        parser.print_usage(sys.stderr)
        print("error: --jobs must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    try:
        if args.verbose:
            set_console_level("DEBUG")
        settings.validate_runtime()
        return asyncio.run(COMMANDS[args.command](args))
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        for field in e.fields:
            print(f"  offending field: {field}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as e:
        logger.error(f"CLI: {str(e)}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
