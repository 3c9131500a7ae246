"""Pre-generation routing: escalate on a confidence score, before sampling.

A question is routed to the large model exactly when its score falls
strictly below the threshold; a score equal to the threshold stays on
the small model. Because the decision happens before any generation,
routed questions incur no SLM cost and every decision has zero token
latency.
"""

from __future__ import annotations

from collections import Counter
from typing import Iterable, Sequence

from .costs import (
    average_quality,
    llm_only_point,
    llm_question_cost,
    mean_sample_correct,
    mean_sample_tokens,
    normalized_pre_cost,
    slm_question_cost,
)
from .parallel import map_tau_chunks
from .records import (
    CONFIDENCE_LEVELS,
    DEFAULT_TAUS,
    CurvePoint,
    DatasetProfile,
    PricingSchedule,
    QuestionRecord,
    RoutingOutcome,
    SampleRecord,
    SweepResult,
    ValidationError,
    confidence_ladder,
    normalize_taus,
)

SCORE_SOURCES = ("pre", "refusal")


def derive_refusal_score(question: QuestionRecord) -> float:
    """Routing score from refusal behaviour: the highest confidence level
    at which the recorded SLM still answered, or 0.0 if it refused at
    every level. Requires exactly one sample per level."""
    score = 0.0
    for level, sample in zip(CONFIDENCE_LEVELS, confidence_ladder(question)):
        if not sample.refusal:
            score = level
    return score


def question_score(question: QuestionRecord, score_source: str) -> float:
    """The routing score a pre-generation router sees for this question."""
    if score_source == "pre":
        if question.pre_score is None:
            raise ValidationError(
                f"question {question.id!r} has no pre_score; "
                "use the refusal score source or add scores"
            )
        return question.pre_score
    if score_source == "refusal":
        return derive_refusal_score(question)
    raise ValidationError(
        f"score_source must be one of {SCORE_SOURCES}, got {score_source!r}"
    )


def majority_answer(samples: Iterable[SampleRecord]) -> str | None:
    """Equal-weight majority answer; lexicographically smallest on ties.

    Refusals cast no vote. Returns None when every sample refused.
    """
    counts = Counter(s.answer for s in samples if s.answer is not None)
    if not counts:
        return None
    return min(counts.items(), key=lambda item: (-item[1], item[0]))[0]


def route_pre(
    question: QuestionRecord,
    tau: float,
    profile: DatasetProfile,
    pricing: PricingSchedule,
    score_source: str = "pre",
    assume_perfect: bool = False,
) -> RoutingOutcome:
    """Route one question at threshold ``tau``."""
    if question_score(question, score_source) < tau:
        return _escalated(question, profile, pricing, assume_perfect)
    return _kept(question, pricing)


def _kept(question: QuestionRecord, pricing: PricingSchedule) -> RoutingOutcome:
    """Outcome when the question stays on the small model.

    Quality and cost average over all stored samples, so the simulated
    deployment answers with a typical single draw.
    """
    return RoutingOutcome(
        question_id=question.id,
        mode="pre",
        routed=False,
        quality=mean_sample_correct(question),
        slm_cost=slm_question_cost(question, mean_sample_tokens(question), pricing),
        llm_cost=0.0,
        decision_latency_tokens=0,
        accepted_answer=majority_answer(question.slm_samples),
    )


def _escalated(
    question: QuestionRecord,
    profile: DatasetProfile,
    pricing: PricingSchedule,
    assume_perfect: bool,
) -> RoutingOutcome:
    """Outcome when the question goes to the large model before sampling."""
    if assume_perfect:
        quality = 1.0
    else:
        if question.llm is None:
            raise ValidationError(
                f"question {question.id!r} has no llm record; "
                "actual-quality evaluation needs one (or use assume-perfect)"
            )
        quality = float(question.llm.correct)
    return RoutingOutcome(
        question_id=question.id,
        mode="pre",
        routed=True,
        quality=quality,
        slm_cost=0.0,
        llm_cost=llm_question_cost(question, profile, pricing),
        decision_latency_tokens=0,
        accepted_answer=None,
    )


def sweep_pre(
    questions: Sequence[QuestionRecord],
    profile: DatasetProfile,
    pricing: PricingSchedule,
    taus: Iterable[float] = DEFAULT_TAUS,
    score_source: str = "pre",
    assume_perfect: bool = False,
    jobs: int = 1,
) -> SweepResult:
    """Evaluate pre-generation routing across a threshold grid.

    Returns the trade-off curve bracketed by the two reference points
    (all-SLM first, all-LLM last) plus the raw outcomes per threshold.
    """
    taus = normalize_taus(taus)
    questions = tuple(questions)
    if not questions:
        raise ValidationError("cannot sweep an empty dataset")

    common = (questions, profile, pricing, score_source, assume_perfect)
    outcomes_by_tau = map_tau_chunks(_pre_worker, common, taus, jobs)

    kept_all = tuple(_kept(q, pricing) for q in questions)
    points = [
        CurvePoint(
            cost=normalized_pre_cost(kept_all, profile, pricing),
            performance=average_quality(kept_all),
            label="slm_only",
            n_routed=0,
        )
    ]
    for tau in taus:
        outcomes = outcomes_by_tau[tau]
        points.append(
            CurvePoint(
                cost=normalized_pre_cost(outcomes, profile, pricing),
                performance=average_quality(outcomes),
                tau=tau,
                n_routed=sum(1 for o in outcomes if o.routed),
            )
        )
    points.append(llm_only_point(questions, profile, pricing, assume_perfect))
    return SweepResult(points=tuple(points), outcomes_by_tau=outcomes_by_tau)


def _pre_worker(args) -> list[tuple[float, tuple[RoutingOutcome, ...]]]:
    (questions, profile, pricing, score_source, assume_perfect), taus = args
    out = []
    for tau in taus:
        out.append(
            (
                tau,
                tuple(
                    route_pre(q, tau, profile, pricing, score_source, assume_perfect)
                    for q in questions
                ),
            )
        )
    return out
