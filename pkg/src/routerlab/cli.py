"""Command-line interface.

Subcommands: validate, sweep, build, synth, metrics. Exit codes: 0 on
success, 1 when data fails validation or a computation is undefined,
2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

from . import __version__, kernels
from .cascade import DEFAULT_ALPHA, DEFAULT_K, sweep_cascade
from .io import (
    SyntheticParams,
    generate_synthetic,
    load_dataset,
    load_pricing,
    load_training_questions,
    read_curve,
    scan_dataset,
    write_curve,
    write_dataset,
    write_metrics,
    write_pairs,
    write_refusal_examples,
)
from .metrics import (
    golden_curve,
    latency_report,
    toa_from_points,
    togr,
)
from .prerouting import SCORE_SOURCES, sweep_pre
from .records import (
    DEFAULT_TAUS,
    SCHEMES,
    MetricsReport,
    PricingSchedule,
    ValidationError,
)
from .trainset import ESTIMATE_SAMPLES, build_dpo_pair, build_refusal_examples

DEFAULT_LATENCY_TAU = 0.6


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="routerlab",
        description="Replay-driven simulation and evaluation of SLM-to-LLM routing policies.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a dataset file and report problems")
    p.add_argument("dataset", help="questions JSONL file")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("sweep", help="evaluate a routing policy across thresholds")
    p.add_argument("dataset", help="questions JSONL file")
    p.add_argument("--mode", required=True, choices=("pre", "cascade"), help="routing policy")
    p.add_argument("--out-dir", required=True, help="directory for curve.csv and metrics.json")
    p.add_argument(
        "--score-source",
        choices=SCORE_SOURCES,
        default="pre",
        help="pre-routing score: stored pre_score or the derived refusal score (default: pre)",
    )
    p.add_argument(
        "--taus",
        type=_taus_arg,
        default=DEFAULT_TAUS,
        metavar="START:END:STEP",
        help="threshold grid, inclusive ends (default: 0:1:0.1)",
    )
    p.add_argument("--scheme", choices=SCHEMES, default="rcv", help="cascade sampling scheme (default: rcv)")
    p.add_argument("--k", type=_positive_int, default=DEFAULT_K, help="cascade samples per question (default: 10)")
    p.add_argument("--alpha", type=float, default=DEFAULT_ALPHA, help="confidence weight spread (default: 0.5)")
    p.add_argument(
        "--tau",
        type=float,
        default=DEFAULT_LATENCY_TAU,
        help="grid threshold whose cascade latencies fill agl/arol (default: 0.6)",
    )
    p.add_argument(
        "--assume-perfect",
        action="store_true",
        help="score every escalated question 1.0 instead of the recorded LLM result",
    )
    p.add_argument(
        "--golden",
        action="store_true",
        help="also write the hindsight-optimal reference curve and report ToGR",
    )
    p.add_argument("--pricing", help="pricing JSON file (default: built-in prices)")
    p.add_argument("--jobs", type=_positive_int, default=1, help="worker processes for the sweep (default: 1)")
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("build", help="build preference pairs and refusal examples from a corpus")
    p.add_argument("corpus", help="training corpus JSONL file")
    p.add_argument("--out-dir", required=True, help="directory for pairs.jsonl and refusal.jsonl")
    p.add_argument("--seed", type=int, default=None, help="target sampling seed (default: RL_SEED or 0)")
    p.add_argument(
        "--min-ratio",
        type=float,
        default=1.5,
        help="required rejected/chosen token ratio, at least 1.5 (default: 1.5)",
    )
    p.add_argument(
        "--include-correct-rejected",
        action="store_true",
        help="let long correct completions be rejected (default: incorrect only)",
    )
    p.set_defaults(handler=_cmd_build)

    p = sub.add_parser("synth", help="generate a synthetic dataset")
    p.add_argument("out", help="output questions JSONL file")
    p.add_argument("--n", type=_positive_int, required=True, help="number of questions")
    p.add_argument("--seed", type=int, default=None, help="generator seed (default: RL_SEED or 0)")
    p.add_argument("--scheme", choices=SCHEMES, default="rcv", help="sample scheme to generate (default: rcv)")
    p.add_argument("--n-samples", type=_positive_int, default=10, help="samples per question (default: 10)")
    p.add_argument("--difficulty-min", type=float, default=0.0)
    p.add_argument("--difficulty-max", type=float, default=1.0)
    p.add_argument(
        "--easy-fraction",
        type=float,
        default=0.0,
        help="fraction of questions pinned to difficulty 0 (default: 0)",
    )
    p.add_argument(
        "--pre-noise",
        type=float,
        default=0.0,
        help="uniform noise scale on stored pre-generation scores (default: 0)",
    )
    p.add_argument("--llm-correct-prob", type=float, default=0.9)
    p.add_argument("--no-llm", action="store_true", help="omit LLM records")
    p.set_defaults(handler=_cmd_synth)

    p = sub.add_parser("metrics", help="recompute metrics from curve CSV files")
    p.add_argument("curve", help="curve CSV written by sweep")
    p.add_argument("--golden", help="golden curve CSV; enables ToGR")
    p.add_argument(
        "--mode",
        choices=("actual", "perfect"),
        default="actual",
        help="how the curve was produced; perfect also fills toa100 (default: actual)",
    )
    p.add_argument("--out", help="write the report here instead of stdout")
    p.set_defaults(handler=_cmd_metrics)

    return parser


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def _taus_arg(text: str) -> tuple[float, ...]:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("expected START:END:STEP, e.g. 0:1:0.1")
    try:
        start, end, step = (float(part) for part in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected three numbers, got {text!r}")
    if step <= 0:
        raise argparse.ArgumentTypeError("step must be positive")
    if not 0.0 <= start <= end <= 1.0:
        raise argparse.ArgumentTypeError("thresholds must satisfy 0 <= start <= end <= 1")
    count = int(math.floor((end - start) / step + 1e-9))
    # Rounding keeps grids like 0:1:0.1 on the same floats as literals.
    return tuple(round(start + k * step, 9) for k in range(count + 1))


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get("RL_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"RL_SEED must be an integer, got {env!r}")


def _cmd_validate(args) -> int:
    count, problems = scan_dataset(args.dataset)
    for problem in problems:
        print(problem, file=sys.stderr)
    if problems:
        print(f"{args.dataset}: {count} question(s) ok, {len(problems)} problem(s)")
        return 1
    print(f"{args.dataset}: {count} question(s) ok")
    return 0


def _cmd_sweep(args) -> int:
    questions, profile = load_dataset(args.dataset)
    pricing = load_pricing(args.pricing) if args.pricing else PricingSchedule()
    os.makedirs(args.out_dir, exist_ok=True)

    if args.mode == "pre":
        result = sweep_pre(
            questions,
            profile,
            pricing,
            taus=args.taus,
            score_source=args.score_source,
            assume_perfect=args.assume_perfect,
            jobs=args.jobs,
        )
    else:
        result = sweep_cascade(
            questions,
            profile,
            pricing,
            taus=args.taus,
            scheme=args.scheme,
            k=args.k,
            alpha=args.alpha,
            assume_perfect=args.assume_perfect,
            jobs=args.jobs,
        )

    curve_path = os.path.join(args.out_dir, "curve.csv")
    write_curve(result.points, curve_path)

    toa_value = toa_from_points(result.points)
    toa100_value = toa_value if args.assume_perfect else None
    perfect_points = result.points if args.assume_perfect else None
    togr_value = None
    golden_points = None

    if args.golden:
        golden_points = golden_curve(questions, profile, pricing)
        write_curve(golden_points, os.path.join(args.out_dir, "golden.csv"))
        if perfect_points is None:
            if args.mode == "pre":
                perfect = sweep_pre(
                    questions,
                    profile,
                    pricing,
                    taus=args.taus,
                    score_source=args.score_source,
                    assume_perfect=True,
                    jobs=args.jobs,
                )
            else:
                perfect = sweep_cascade(
                    questions,
                    profile,
                    pricing,
                    taus=args.taus,
                    scheme=args.scheme,
                    k=args.k,
                    alpha=args.alpha,
                    assume_perfect=True,
                    jobs=args.jobs,
                )
            perfect_points = perfect.points
            write_curve(perfect_points, os.path.join(args.out_dir, "curve_perfect.csv"))
            toa100_value = toa_from_points(perfect_points)
        togr_value = togr(perfect_points, golden_points)

    if args.mode == "cascade":
        outcomes = result.outcomes_by_tau[_grid_tau(result.outcomes_by_tau, args.tau)]
        latencies = latency_report(outcomes)
        agl_value, arol_value = latencies.agl, latencies.arol
    else:
        agl_value, arol_value = 0.0, 0.0

    report = MetricsReport(
        toa=toa_value,
        agl=agl_value,
        arol=arol_value,
        mode="perfect" if args.assume_perfect else "actual",
        toa100=toa100_value,
        togr=togr_value,
    )
    metrics_path = os.path.join(args.out_dir, "metrics.json")
    write_metrics(report, metrics_path)

    print(
        f"swept {len(questions)} questions, mode={args.mode}, "
        f"{len(result.points)} curve rows, kernels={kernels.backend_name()}"
    )
    print(f"wrote {curve_path} and {metrics_path}")
    summary = f"toa={report.toa:.4f} toga={report.toga:.4f}"
    if report.togr is not None:
        summary += f" togr={report.togr:.4f}"
    if args.mode == "cascade":
        summary += f" agl={report.agl:.1f} arol={report.arol:.1f} (tau={args.tau:g})"
    print(summary)
    return 0


def _grid_tau(outcomes_by_tau, requested: float) -> float:
    for tau in outcomes_by_tau:
        if tau == requested or abs(tau - requested) <= 1e-9:
            return tau
    grid = ", ".join(f"{t:g}" for t in sorted(outcomes_by_tau))
    raise ValidationError(
        f"--tau {requested:g} is not on the sweep grid ({grid}); "
        "pick a grid threshold for the latency report"
    )


def _cmd_build(args) -> int:
    corpus = load_training_questions(args.corpus)
    seed = _resolve_seed(args.seed)
    short = [q.id for q in corpus if len(q.samples) != ESTIMATE_SAMPLES]
    if short:
        shown = ", ".join(repr(qid) for qid in short[:5])
        raise ValidationError(
            f"{len(short)} question(s) do not have exactly {ESTIMATE_SAMPLES} samples "
            f"(first: {shown}); the corpus cannot be built"
        )
    os.makedirs(args.out_dir, exist_ok=True)

    pairs = []
    for question in corpus:
        pair = build_dpo_pair(
            question.id,
            question.samples,
            min_ratio=args.min_ratio,
            include_correct_rejected=args.include_correct_rejected,
        )
        if pair is not None:
            pairs.append(pair)
    refusals = [
        example
        for question in corpus
        for example in build_refusal_examples(question, seed)
    ]

    pairs_path = os.path.join(args.out_dir, "pairs.jsonl")
    refusal_path = os.path.join(args.out_dir, "refusal.jsonl")
    write_pairs(pairs, pairs_path)
    write_refusal_examples(refusals, refusal_path)
    print(
        f"built {len(pairs)} preference pair(s) from {len(corpus)} question(s) "
        f"({len(corpus) - len(pairs)} without a qualifying pair)"
    )
    print(f"built {len(refusals)} refusal example(s), seed={seed}")
    print(f"wrote {pairs_path} and {refusal_path}")
    return 0


def _cmd_synth(args) -> int:
    seed = _resolve_seed(args.seed)
    params = SyntheticParams(
        scheme=args.scheme,
        n_samples=args.n_samples,
        difficulty_min=args.difficulty_min,
        difficulty_max=args.difficulty_max,
        easy_fraction=args.easy_fraction,
        pre_score_noise=args.pre_noise,
        llm_correct_prob=args.llm_correct_prob,
        include_llm=not args.no_llm,
    )
    questions = generate_synthetic(args.n, seed, params)
    write_dataset(questions, args.out)
    print(f"wrote {len(questions)} question(s) to {args.out} (scheme={args.scheme}, seed={seed})")
    return 0


def _cmd_metrics(args) -> int:
    points = read_curve(args.curve)
    toa_value = toa_from_points(points)
    togr_value = None
    if args.golden:
        togr_value = togr(points, read_curve(args.golden))
    report = MetricsReport(
        toa=toa_value,
        agl=0.0,  # curves carry no latency information
        arol=0.0,
        mode=args.mode,
        toa100=toa_value if args.mode == "perfect" else None,
        togr=togr_value,
    )
    if args.out:
        write_metrics(report, args.out)
        print(f"wrote {args.out}")
    else:
        print(json.dumps(report.to_dict(), indent=2))
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
