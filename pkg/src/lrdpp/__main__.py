from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

from .bench import DEFAULT_BASKET_SIZE, DEFAULT_K, DEFAULT_M_VALUES, DEFAULT_TRIALS, run_bench
from .checks import DEFAULT_TRIALS as DEFAULT_CHECK_TRIALS
from .checks import run_checks
from .conditioning import complete_basket
from .config import load_config, make_train_config
from .data import (
    BasketDataset,
    DEFAULT_MIN_BASKET_SIZE,
    concat_datasets,
    load_counts,
    load_model,
    read_baskets,
    reindex,
    save_counts,
    save_model,
    split,
    write_baskets,
)
from .errors import BasketTooLargeError, LowRankDPPError, TrainingError
from .evaluation import DEFAULT_KS, DEFAULT_POP_BETA, evaluate, make_instances
from .formatting import format_bench_table, format_check_table, format_report_table
from .help_formatter import COMMANDS, print_command_help, print_help
from .likelihood import average_log_likelihood
from .optimizer import train
from .ui import print_config, print_error, print_info, print_success, print_warning, setup_logging

logger = logging.getLogger("lrdpp.cli")

DEFAULT_TEST_FRACTION = 0.3
DEFAULT_TOP = 10


def _int_list(text: str) -> List[int]:
    """Parse a comma-separated list of positive integers."""
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError(f"expected positive integers, got {text!r}")
    return values


def _add_common_arguments(parser: argparse.ArgumentParser) -> None:
    """Add common CLI arguments to parser."""
    parser.add_argument("-h", "--help", action="store_true", help="Show help for this command")
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help="Path to a YAML file of training defaults (defaults to ~/.config/lrdpp/config.yaml).",
    )
    parser.add_argument("--threads", type=int, default=1, help="Worker threads for gradients and scoring.")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="More log output.")
    parser.add_argument("-q", "--quiet", action="store_true", help="Only log warnings and errors.")


def _add_data_argument(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data",
        type=Path,
        action="append",
        required=True,
        help="Basket file, one comma-separated basket per line. Repeat to join disjoint categories.",
    )


def _build_parser() -> argparse.ArgumentParser:
    """Build the CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="lrdpp",
        description="Low-rank determinantal point processes for basket completion.",
        add_help=False,  # We'll handle help ourselves
    )
    parser.add_argument("-h", "--help", action="store_true", help="Show this help message")
    subparsers = parser.add_subparsers(dest="command", required=False)
    descriptions = dict(COMMANDS)

    # lrdpp train
    train_parser = subparsers.add_parser("train", description=descriptions["train"], add_help=False)
    _add_common_arguments(train_parser)
    _add_data_argument(train_parser)
    train_parser.add_argument("--out", type=Path, required=True, help="Where to write the model file.")
    train_parser.add_argument("--k", type=int, default=None, help="Number of trait dimensions K (default 30).")
    train_parser.add_argument("--alpha", type=float, default=None, help="Regularization strength (default 1.0).")
    train_parser.add_argument("--epsilon0", type=float, default=None, help="Initial learning rate (default 1e-5).")
    train_parser.add_argument("--beta", type=float, default=None, help="Nesterov momentum coefficient (default 0.95).")
    train_parser.add_argument("--batch", type=int, default=None, help="Mini-batch size (default 1000).")
    train_parser.add_argument(
        "--t-anneal",
        type=float,
        default=None,
        help="Annealing horizon T in iterations (default: ten epochs).",
    )
    train_parser.add_argument("--delta", type=float, default=None, help="Convergence threshold (default 1e-5).")
    train_parser.add_argument("--max-iters", type=int, default=None, help="Iteration cap (default 10000).")
    train_parser.add_argument("--seed", type=int, default=None, help="Seed for the split, init and batches.")
    train_parser.add_argument("--init-scale", type=float, default=None, help="Std-dev of initial traits (default 0.1).")
    train_parser.add_argument(
        "--test-fraction",
        type=float,
        default=DEFAULT_TEST_FRACTION,
        help="Fraction of baskets held out for testing; 0 trains on everything.",
    )
    train_parser.add_argument(
        "--min-basket-size",
        type=int,
        default=DEFAULT_MIN_BASKET_SIZE,
        help="Drop baskets with fewer distinct items.",
    )

    # lrdpp predict
    predict_parser = subparsers.add_parser("predict", description=descriptions["predict"], add_help=False)
    _add_common_arguments(predict_parser)
    predict_parser.add_argument("--model", type=Path, required=True, help="Model file written by train.")
    predict_parser.add_argument(
        "--basket",
        default="",
        help='Observed items, e.g. "id1,id2". Empty ranks by unconditioned popularity.',
    )
    predict_parser.add_argument("--top", type=int, default=DEFAULT_TOP, help="Number of items to print.")

    # lrdpp evaluate
    evaluate_parser = subparsers.add_parser("evaluate", description=descriptions["evaluate"], add_help=False)
    _add_common_arguments(evaluate_parser)
    evaluate_parser.add_argument("--model", type=Path, required=True, help="Model file written by train.")
    _add_data_argument(evaluate_parser)
    evaluate_parser.add_argument(
        "--ks",
        type=_int_list,
        default=list(DEFAULT_KS),
        metavar="K1,K2,...",
        help="Cut-offs for precision@k.",
    )
    evaluate_parser.add_argument(
        "--beta-pop",
        type=float,
        default=DEFAULT_POP_BETA,
        help="Power-law exponent for popularity weighting.",
    )
    evaluate_parser.add_argument("--seed", type=int, default=0, help="Seed for choosing held-out items.")
    evaluate_parser.add_argument(
        "--counts",
        type=Path,
        default=None,
        help="Training item counts (defaults to <model>.counts).",
    )
    evaluate_parser.add_argument("--report", type=Path, default=None, help="Also write key-value metrics here.")

    # lrdpp check
    check_parser = subparsers.add_parser("check", description=descriptions["check"], add_help=False)
    _add_common_arguments(check_parser)
    check_parser.add_argument("--seed", type=int, default=0, help="Seed of the first trial.")
    check_parser.add_argument(
        "--trials",
        type=int,
        default=DEFAULT_CHECK_TRIALS,
        help="Random instances per property.",
    )

    # lrdpp bench
    bench_parser = subparsers.add_parser("bench", description=descriptions["bench"], add_help=False)
    _add_common_arguments(bench_parser)
    bench_parser.add_argument(
        "--m-values",
        type=_int_list,
        default=list(DEFAULT_M_VALUES),
        metavar="M1,M2,...",
        help="Catalog sizes to time.",
    )
    bench_parser.add_argument("--k", type=int, default=DEFAULT_K, help="Trait dimensions.")
    bench_parser.add_argument("--basket-size", type=int, default=DEFAULT_BASKET_SIZE, help="Observed basket size.")
    bench_parser.add_argument("--trials", type=int, default=DEFAULT_TRIALS, help="Timed repetitions per size.")
    bench_parser.add_argument("--seed", type=int, default=0, help="Seed for the random models.")

    return parser


def _read_data(paths: List[Path], min_basket_size: int = DEFAULT_MIN_BASKET_SIZE) -> BasketDataset:
    """Read one basket file, or join several disjoint ones under their file stems."""
    if len(paths) == 1:
        return read_baskets(paths[0], min_basket_size)
    named = {}
    for path in paths:
        if path.stem in named:
            raise ValueError(f"Data files must have distinct names: {path.stem} given twice")
        named[path.stem] = read_baskets(path, min_basket_size)
    return concat_datasets(named)


def _sidecar(model_path: Path, suffix: str) -> Path:
    return model_path.with_name(model_path.name + suffix)


def _held_out_scorer(test_set: Optional[BasketDataset]) -> Optional[Callable[[Any], float]]:
    if test_set is None or not test_set.N:
        return None

    def score(V: Any) -> float:
        return average_log_likelihood(V, test_set)

    return score


def _train(args: argparse.Namespace) -> int:
    """Handle 'lrdpp train' command."""
    if not 0.0 <= args.test_fraction < 1.0:
        print_error(f"--test-fraction must lie in [0, 1) (got {args.test_fraction})")
        return 2

    defaults = load_config(args.config)
    overrides: Dict[str, Any] = {
        "k": args.k,
        "alpha": args.alpha,
        "epsilon0": args.epsilon0,
        "beta": args.beta,
        "batch_size": args.batch,
        "t_anneal": args.t_anneal,
        "delta": args.delta,
        "max_iters": args.max_iters,
        "seed": args.seed,
        "init_scale": args.init_scale,
        "workers": args.threads,
    }
    cfg = make_train_config(defaults, overrides)

    dataset = _read_data(args.data, args.min_basket_size)
    if args.test_fraction > 0.0:
        train_set, test_set = split(dataset, 1.0 - args.test_fraction, cfg.seed)
    else:
        train_set, test_set = dataset, None

    cfg = cfg.resolve(train_set.N)
    print_config(
        "train",
        {
            "data": ", ".join(str(p) for p in args.data),
            "out": args.out,
            "test_fraction": args.test_fraction,
            "min_basket_size": args.min_basket_size,
            "items (M)": dataset.M,
            "train baskets": train_set.N,
            "test baskets": test_set.N if test_set is not None else 0,
            **cfg.resolved(),
        },
    )

    trace_path = _sidecar(args.out, ".trace")
    try:
        V, trace = train(train_set, cfg, on_epoch=_held_out_scorer(test_set))
    except BasketTooLargeError as exc:
        print_error(str(exc))
        print_info(f"Every training basket must fit in K trait dimensions; retry with --k {exc.largest} or larger.")
        return 1
    except TrainingError as exc:
        if exc.trace is not None:
            exc.trace.write(trace_path)
            print_info(f"Partial trace written to {trace_path}")
        raise

    save_model(V, args.out)
    trace.write(trace_path)
    save_counts(train_set.catalog, train_set.counts, _sidecar(args.out, ".counts"))
    if test_set is not None:
        write_baskets(test_set, _sidecar(args.out, ".test.txt"))

    final = trace.records[-1]
    status = "converged" if trace.converged else "stopped at the iteration cap"
    print_success(f"Trained {V.M}x{V.K} model in {trace.iterations_run} iterations ({status}); saved to {args.out}")
    if final.test_ll is not None:
        print_info(f"Average test log-likelihood: {final.test_ll:.5f}")
    return 0


def _predict(args: argparse.Namespace) -> int:
    """Handle 'lrdpp predict' command."""
    V = load_model(args.model)
    ids = [token.strip() for token in args.basket.split(",") if token.strip()]
    print_config("predict", {"model": args.model, "basket": ",".join(ids) or "(empty)", "top": args.top})

    basket = V.catalog.indices(ids)
    for item, probability in complete_basket(V, basket, args.top):
        print(f"{V.catalog.external_ids[item]}\t{probability!r}")
    return 0


def _evaluate(args: argparse.Namespace) -> int:
    """Handle 'lrdpp evaluate' command."""
    V = load_model(args.model)
    dataset = reindex(_read_data(args.data), V.catalog)

    counts_path = args.counts or _sidecar(args.model, ".counts")
    if counts_path.exists():
        train_counts = load_counts(V.catalog, counts_path)
    else:
        print_warning(f"No training counts at {counts_path}; weighting by counts in the evaluation data")
        train_counts = dataset.counts

    print_config(
        "evaluate",
        {
            "model": args.model,
            "data": ", ".join(str(p) for p in args.data),
            "counts": counts_path if counts_path.exists() else "(evaluation data)",
            "ks": ",".join(str(k) for k in args.ks),
            "beta_pop": args.beta_pop,
            "seed": args.seed,
            "threads": args.threads,
            "baskets": dataset.N,
        },
    )

    instances = make_instances(dataset, args.seed)
    report = evaluate(instances, V, args.ks, train_counts, args.beta_pop, workers=args.threads)
    report.test_log_likelihood = average_log_likelihood(V, dataset)

    format_report_table(report)
    lines = report.to_lines()
    print("\n".join(lines))
    if args.report:
        args.report.write_text("\n".join(lines) + "\n", encoding="utf-8")
        print_success(f"Report written to {args.report}")
    return 0


def _check(args: argparse.Namespace) -> int:
    """Handle 'lrdpp check' command."""
    print_config("check", {"seed": args.seed, "trials": args.trials})
    results = run_checks(seed=args.seed, trials=args.trials)
    format_check_table(results)

    failed = [r for r in results if not r.passed]
    for result in failed:
        print_error(
            f"{result.name} failed; reproduce with: lrdpp check --seed {result.failing_seed} --trials 1"
        )
    if failed:
        return 1
    print_success(f"All {len(results)} properties passed")
    return 0


def _bench(args: argparse.Namespace) -> int:
    """Handle 'lrdpp bench' command."""
    print_config(
        "bench",
        {
            "m_values": ",".join(str(m) for m in args.m_values),
            "k": args.k,
            "basket_size": args.basket_size,
            "trials": args.trials,
            "seed": args.seed,
        },
    )
    rows = run_bench(args.m_values, args.k, args.basket_size, args.trials, args.seed)
    format_bench_table(rows)
    return 0


HANDLERS = {
    "train": _train,
    "predict": _predict,
    "evaluate": _evaluate,
    "check": _check,
    "bench": _bench,
}


def main(argv: Optional[list[str]] = None) -> int:
    """Main CLI entry point."""
    parser = _build_parser()

    # Check for help flag before parsing
    check_argv = argv if argv is not None else sys.argv[1:]
    if "-h" in check_argv or "--help" in check_argv:
        command = next((arg for arg in check_argv if not arg.startswith("-")), None)
        if command in HANDLERS:
            print_command_help(parser, command)
        else:
            print_help(parser)
        return 0

    args = parser.parse_args(argv)

    # No command provided
    if not args.command:
        print_help(parser)
        return 2

    setup_logging(-1 if args.quiet else args.verbose)

    try:
        return HANDLERS[args.command](args)
    except (LowRankDPPError, FileNotFoundError, ValueError) as exc:
        print_error(str(exc))
        return 1


if __name__ == "__main__":
    sys.exit(main())
