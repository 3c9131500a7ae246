"""Token-priced cost accounting for simulated routing runs.

Prices are quoted per million tokens; costs come out in USD. The large
model's per-question cost always uses the dataset-average LLM output
length rather than the per-question recording, which keeps the cost of
routing a question independent of the answer the LLM happened to give.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .records import (
    CurvePoint,
    DatasetProfile,
    PricingSchedule,
    QuestionRecord,
    RoutingOutcome,
    ValidationError,
)

# Prices are USD per this many tokens.
PRICE_UNIT_TOKENS = 1e6


def slm_question_cost(
    question: QuestionRecord, output_tokens: float, pricing: PricingSchedule
) -> float:
    """USD cost of one SLM pass over the question's input.

    ``output_tokens`` is whatever the policy charges for generation: a
    mean over stored samples for pre-generation routing, the sum of all
    drawn samples for a cascade.
    """
    if output_tokens < 0:
        raise ValidationError(f"output_tokens must be >= 0, got {output_tokens}")
    return (
        pricing.slm_in * question.input_tokens + pricing.slm_out * output_tokens
    ) / PRICE_UNIT_TOKENS


def llm_question_cost(
    question: QuestionRecord, profile: DatasetProfile, pricing: PricingSchedule
) -> float:
    """USD cost of escalating one question to the large model.

    Output is charged at the dataset-average LLM answer length from the
    profile, never the question's own recording.
    """
    avg = _require_avg_llm_tokens(profile)
    return (
        pricing.llm_in * question.input_tokens + pricing.llm_out * avg
    ) / PRICE_UNIT_TOKENS


def total_llm_cost(profile: DatasetProfile, pricing: PricingSchedule) -> float:
    """USD cost of sending every profiled question to the large model.

    Summed per question, in id order, with the same per-question terms
    ``llm_question_cost`` produces; an all-routed run therefore
    normalises to exactly 1.0.
    """
    avg = _require_avg_llm_tokens(profile)
    acc = 0.0
    for input_tokens in profile.input_tokens:
        acc += (pricing.llm_in * input_tokens + pricing.llm_out * avg) / PRICE_UNIT_TOKENS
    return acc


def _require_avg_llm_tokens(profile: DatasetProfile) -> float:
    if profile.avg_llm_tokens is None:
        raise ValidationError(
            "dataset has no LLM records, so the average LLM answer length "
            "and every LLM cost are undefined"
        )
    return profile.avg_llm_tokens


def mean_sample_tokens(question: QuestionRecord) -> float:
    """Mean generated length over all stored SLM samples."""
    return sum(s.tokens for s in question.slm_samples) / len(question.slm_samples)


def mean_sample_correct(question: QuestionRecord) -> float:
    """Fraction of stored SLM samples that are correct (refusals count as wrong)."""
    return sum(1 for s in question.slm_samples if s.correct) / len(question.slm_samples)


def normalized_pre_cost(
    outcomes: Sequence[RoutingOutcome],
    profile: DatasetProfile,
    pricing: PricingSchedule,
) -> float:
    """Total cost of a pre-generation run, normalised to the all-LLM cost."""
    return _normalized_cost(outcomes, profile, pricing, mode="pre")


def normalized_cascade_cost(
    outcomes: Sequence[RoutingOutcome],
    profile: DatasetProfile,
    pricing: PricingSchedule,
) -> float:
    """Total cost of a cascade run, normalised to the all-LLM cost."""
    return _normalized_cost(outcomes, profile, pricing, mode="cascade")


def _normalized_cost(
    outcomes: Sequence[RoutingOutcome],
    profile: DatasetProfile,
    pricing: PricingSchedule,
    mode: str,
) -> float:
    ordered = _check_coverage(outcomes, profile, mode)
    acc = 0.0
    for outcome in ordered:
        acc += outcome.slm_cost + outcome.llm_cost
    return acc / total_llm_cost(profile, pricing)


def average_quality(outcomes: Iterable[RoutingOutcome]) -> float:
    """Mean per-question quality of a run."""
    outcomes = tuple(outcomes)
    if not outcomes:
        raise ValidationError("cannot average an empty outcome collection")
    return sum(o.quality for o in outcomes) / len(outcomes)


def llm_only_point(
    questions: Sequence[QuestionRecord],
    profile: DatasetProfile,
    pricing: PricingSchedule,
    assume_perfect: bool,
) -> CurvePoint:
    """All-LLM reference point for a trade-off curve.

    Its normalised cost is 1 by construction: the numerator would be the
    identical per-question sum the denominator already is.
    """
    total_llm_cost(profile, pricing)  # raises early when LLM costs are undefined
    if assume_perfect:
        performance = 1.0
    else:
        missing = [q.id for q in questions if q.llm is None]
        if missing:
            raise ValidationError(
                f"{len(missing)} question(s) have no llm record "
                f"(first: {missing[0]!r}); the all-LLM reference needs them"
            )
        performance = sum(1 for q in questions if q.llm.correct) / len(questions)
    return CurvePoint(
        cost=1.0,
        performance=performance,
        label="llm_only",
        n_routed=len(questions),
    )


def _check_coverage(
    outcomes: Sequence[RoutingOutcome], profile: DatasetProfile, mode: str
) -> list[RoutingOutcome]:
    """Require exactly one outcome per profiled question, in any order."""
    if not outcomes:
        raise ValidationError("cannot normalise an empty outcome collection")
    for outcome in outcomes:
        if outcome.mode != mode:
            raise ValidationError(
                f"expected {mode!r} outcomes, found mode {outcome.mode!r} "
                f"for question {outcome.question_id!r}"
            )
    ordered = sorted(outcomes, key=lambda o: o.question_id)
    ids = tuple(o.question_id for o in ordered)
    if ids != profile.ids:
        raise ValidationError(
            "outcomes do not cover the profiled dataset exactly "
            f"({len(ids)} outcomes vs {profile.n_questions} questions)"
        )
    return ordered
