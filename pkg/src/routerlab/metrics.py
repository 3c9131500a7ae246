"""Trade-off and latency metrics over routing curves.

The central quantity is the trade-off area (ToA): the area under the
cost/performance curve after both axes are normalised so the all-SLM
reference sits at (0, 0) and the all-LLM reference at (1, 1). A router
no better than randomly interpolating between the references scores
0.5, so the trade-off gain ToGA = ToA - 0.5 is zero for trivial routers
and positive when the curve bulges toward cheap-and-good.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .costs import (
    llm_question_cost,
    mean_sample_correct,
    mean_sample_tokens,
    slm_question_cost,
    total_llm_cost,
)
from .records import (
    CurvePoint,
    DatasetProfile,
    PricingSchedule,
    QuestionRecord,
    RoutingOutcome,
    ValidationError,
)

# A golden gain smaller than this is treated as "no headroom": the
# ratio ToGR would amplify noise rather than measure anything.
_MIN_REFERENCE_GAIN = 1e-12


def toa(
    points: Iterable[CurvePoint],
    slm_point: tuple[float, float],
    llm_point: tuple[float, float],
) -> float:
    """Area under the normalised trade-off curve.

    ``slm_point`` and ``llm_point`` are (cost, performance) references.
    Costs and performances are mapped to the unit square, (0, 0) and
    (1, 1) are added as curve ends, points are sorted by x, and the
    polyline is integrated with the trapezoid rule over x in [0, 1];
    segments outside the unit interval are clipped off.
    """
    slm_cost, slm_perf = slm_point
    llm_cost, llm_perf = llm_point
    if not llm_cost > slm_cost:
        raise ValidationError(
            "the all-LLM reference must cost more than the all-SLM reference "
            f"({llm_cost} vs {slm_cost}); the cost axis is degenerate"
        )
    if not llm_perf > slm_perf:
        raise ValidationError(
            "the all-LLM reference must outperform the all-SLM reference "
            f"({llm_perf} vs {slm_perf}); the performance axis is degenerate"
        )
    pts = [(0.0, 0.0), (1.0, 1.0)]
    for point in points:
        x = (point.cost - slm_cost) / (llm_cost - slm_cost)
        y = (point.performance - slm_perf) / (llm_perf - slm_perf)
        pts.append((x, y))
    pts.sort()
    area = 0.0
    for (x0, y0), (x1, y1) in zip(pts, pts[1:]):
        if x1 <= 0.0 or x0 >= 1.0 or x1 <= x0:
            continue
        left = max(x0, 0.0)
        right = min(x1, 1.0)
        y_left = y0 + (y1 - y0) * (left - x0) / (x1 - x0)
        y_right = y0 + (y1 - y0) * (right - x0) / (x1 - x0)
        area += (right - left) * (y_left + y_right) / 2.0
    return area


def toga(
    points: Iterable[CurvePoint],
    slm_point: tuple[float, float],
    llm_point: tuple[float, float],
) -> float:
    """Trade-off gain: area above the random-interpolation diagonal."""
    return toa(points, slm_point, llm_point) - 0.5


def curve_endpoints(points: Sequence[CurvePoint]) -> tuple[CurvePoint, CurvePoint]:
    """The labelled all-SLM and all-LLM reference points of a curve."""
    slm = [p for p in points if p.label == "slm_only"]
    llm = [p for p in points if p.label == "llm_only"]
    if len(slm) != 1 or len(llm) != 1:
        raise ValidationError(
            "a curve needs exactly one slm_only and one llm_only point; "
            f"found {len(slm)} and {len(llm)}"
        )
    return slm[0], llm[0]


def toa_from_points(points: Sequence[CurvePoint]) -> float:
    """ToA of a curve that carries its own labelled reference points."""
    slm, llm = curve_endpoints(points)
    return toa(points, (slm.cost, slm.performance), (llm.cost, llm.performance))


def toga_from_points(points: Sequence[CurvePoint]) -> float:
    return toa_from_points(points) - 0.5


def toa100(
    questions: Sequence[QuestionRecord],
    profile: DatasetProfile,
    pricing: PricingSchedule,
    policy: str = "pre",
    **sweep_kwargs,
) -> float:
    """ToA with the large model assumed perfect.

    Reruns the sweep with every escalated question scored 1.0, which
    isolates routing quality from the large model's own errors.
    ``sweep_kwargs`` are forwarded to the policy's sweep (taus,
    score_source, scheme, k, alpha, jobs).
    """
    result = perfect_sweep(questions, profile, pricing, policy, **sweep_kwargs)
    return toa_from_points(result.points)


def perfect_sweep(
    questions: Sequence[QuestionRecord],
    profile: DatasetProfile,
    pricing: PricingSchedule,
    policy: str = "pre",
    **sweep_kwargs,
):
    """Run a policy sweep in assume-perfect mode."""
    # Imported here so the policy modules can import metrics helpers
    # without a cycle.
    from .cascade import sweep_cascade
    from .prerouting import sweep_pre

    if policy == "pre":
        return sweep_pre(questions, profile, pricing, assume_perfect=True, **sweep_kwargs)
    if policy == "cascade":
        return sweep_cascade(questions, profile, pricing, assume_perfect=True, **sweep_kwargs)
    raise ValidationError(f"policy must be 'pre' or 'cascade', got {policy!r}")


def golden_curve(
    questions: Sequence[QuestionRecord],
    profile: DatasetProfile,
    pricing: PricingSchedule,
) -> tuple[CurvePoint, ...]:
    """Hindsight-optimal routing reference under a perfect large model.

    Questions are escalated in ascending order of their small-model
    accuracy (ties broken by id): the m-th point routes the m hardest
    questions and keeps the rest, for m = 0..N. Kept questions score
    their mean sample accuracy and cost a mean-length SLM pass; routed
    questions score 1.0. The ends are the usual reference points.
    """
    questions = tuple(questions)
    if not questions:
        raise ValidationError("cannot build a golden curve for an empty dataset")
    ids = tuple(sorted(q.id for q in questions))
    if ids != profile.ids:
        raise ValidationError(
            "questions do not match the profiled dataset "
            f"({len(ids)} questions vs {profile.n_questions} profiled)"
        )
    denominator = total_llm_cost(profile, pricing)

    ordered = sorted(questions, key=lambda q: (mean_sample_correct(q), q.id))
    accuracies = [mean_sample_correct(q) for q in ordered]
    slm_costs = [slm_question_cost(q, mean_sample_tokens(q), pricing) for q in ordered]
    llm_costs = [llm_question_cost(q, profile, pricing) for q in ordered]

    n = len(ordered)
    slm_suffix = [0.0] * (n + 1)
    acc_suffix = [0.0] * (n + 1)
    for i in range(n - 1, -1, -1):
        slm_suffix[i] = slm_suffix[i + 1] + slm_costs[i]
        acc_suffix[i] = acc_suffix[i + 1] + accuracies[i]

    points = []
    llm_prefix = 0.0
    for m in range(n + 1):
        if m == 0:
            label = "slm_only"
        elif m == n:
            label = "llm_only"
        else:
            label = None
        points.append(
            CurvePoint(
                cost=(llm_prefix + slm_suffix[m]) / denominator,
                performance=(acc_suffix[m] + m) / n,
                label=label,
                n_routed=m,
            )
        )
        if m < n:
            llm_prefix += llm_costs[m]
    return tuple(points)


def togr(
    router_points: Sequence[CurvePoint], golden_points: Sequence[CurvePoint]
) -> float:
    """Trade-off gain ratio: router gain relative to the golden gain.

    Both curves should come from assume-perfect evaluation; the golden
    curve always is. 1.0 means the router extracts everything hindsight
    routing could; the ratio is undefined when the golden reference
    itself shows no gain.
    """
    router_gain = toa_from_points(router_points) - 0.5
    golden_gain = toa_from_points(golden_points) - 0.5
    if abs(golden_gain) <= _MIN_REFERENCE_GAIN:
        raise ValidationError(
            "golden routing shows no gain on this dataset; ToGR is undefined"
        )
    return router_gain / golden_gain


@dataclass(frozen=True)
class LatencyReport:
    """Mean decision latencies of a cascade run, split by decision.

    ``agl`` averages over accepted questions, ``arol`` over rejected
    (escalated) ones. An empty group reports 0.0; check the counts to
    tell a fast group from an absent one.
    """

    agl: float
    arol: float
    n_accepted: int
    n_rejected: int


def latency_report(outcomes: Iterable[RoutingOutcome]) -> LatencyReport:
    """Latency statistics for one threshold's cascade outcomes."""
    accepted: list[int] = []
    rejected: list[int] = []
    for outcome in outcomes:
        if outcome.mode != "cascade":
            raise ValidationError(
                "latency is defined for cascade outcomes only; "
                f"question {outcome.question_id!r} has mode {outcome.mode!r}"
            )
        if outcome.routed:
            rejected.append(outcome.decision_latency_tokens)
        else:
            accepted.append(outcome.decision_latency_tokens)
    if not accepted and not rejected:
        raise ValidationError("no outcomes to report latency over")
    return LatencyReport(
        agl=sum(accepted) / len(accepted) if accepted else 0.0,
        arol=sum(rejected) / len(rejected) if rejected else 0.0,
        n_accepted=len(accepted),
        n_rejected=len(rejected),
    )


def agl(outcomes: Iterable[RoutingOutcome]) -> float:
    """Mean decision latency over accepted questions (0.0 if none)."""
    return latency_report(outcomes).agl


def arol(outcomes: Iterable[RoutingOutcome]) -> float:
    """Mean decision latency over rejected questions (0.0 if none)."""
    return latency_report(outcomes).arol
