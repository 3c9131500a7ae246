"""Cascade routing: sample the small model, vote, escalate on weak votes.

The SLM draws K completions per question. Each completion casts a vote
for its canonical answer, weighted by the confidence level it was
conditioned on; refusals cast no vote but still dilute every share. The
strongest answer is accepted when its share of the total weight reaches
the threshold, otherwise the question is escalated to the large model.

Cost is charged for what was actually consumed: the question input once
(samples share the prompt cache) plus every drawn completion in full,
and the LLM on top when escalating. Early stopping changes only the
decision latency, never the cost or the decision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from . import kernels
from .costs import (
    average_quality,
    llm_only_point,
    llm_question_cost,
    normalized_cascade_cost,
    slm_question_cost,
)
from .parallel import map_tau_chunks
from .records import (
    DEFAULT_TAUS,
    SCHEMES,
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

DEFAULT_K = 10
DEFAULT_ALPHA = 0.5

# Fixed point of the confidence-to-weight map: a sample conditioned on
# this level votes with this weight at every alpha.
WEIGHT_ANCHOR = 0.55


def vote_weight(confidence_level: float, alpha: float = DEFAULT_ALPHA) -> float:
    """Vote weight for a sample conditioned on ``confidence_level``.

    Linear in the level: ``0.55 + alpha * (level - 0.55)``. At alpha = 0
    every level votes with the same weight; larger alpha spreads weights
    apart around the anchor.
    """
    if alpha < 0:
        raise ValidationError(f"alpha must be >= 0, got {alpha}")
    level = float(confidence_level)
    weight = WEIGHT_ANCHOR + alpha * (level - WEIGHT_ANCHOR)
    if weight <= 0:
        raise ValidationError(
            f"alpha={alpha} gives a nonpositive vote weight for confidence "
            f"{level:.1f}; weights must stay positive"
        )
    return weight


@dataclass(frozen=True)
class VoteTally:
    """Weighted vote totals for one question's samples.

    ``answers`` are the distinct canonical answers in sorted order, with
    ``masses`` aligned. ``total_weight`` includes refusal weight, which
    is why refusals pull every share down.
    """

    answers: tuple[str, ...]
    masses: tuple[float, ...]
    total_weight: float
    refusal_weight: float

    def share(self, answer: str) -> float:
        """This answer's fraction of the total vote weight."""
        for candidate, mass in zip(self.answers, self.masses):
            if candidate == answer:
                return mass / self.total_weight
        return 0.0

    def best(self) -> tuple[str | None, float]:
        """Strongest answer and its share; lexicographic tie-break.

        Returns ``(None, 0.0)`` when every sample refused.
        """
        winner = None
        best_mass = 0.0
        for candidate, mass in zip(self.answers, self.masses):
            if mass > best_mass:
                best_mass = mass
                winner = candidate
        if winner is None:
            return None, 0.0
        return winner, best_mass / self.total_weight


@dataclass(frozen=True)
class CascadeDecision:
    """What the vote concluded: accept ``answer`` or escalate."""

    accepted: bool
    answer: str | None
    share: float


def _encode(
    samples: Sequence[SampleRecord], alpha: float
) -> tuple[tuple[str, ...], list[int], list[float], list[int]]:
    """Flatten samples into the parallel lists the kernels consume.

    Candidate codes are assigned in sorted-answer order, so the kernel's
    lowest-code tie-break is exactly a lexicographic tie-break.
    """
    if not samples:
        raise ValidationError("a cascade vote needs at least one sample")
    answers = tuple(sorted({s.answer for s in samples if s.answer is not None}))
    code_of = {answer: code for code, answer in enumerate(answers)}
    codes = [-1 if s.answer is None else code_of[s.answer] for s in samples]
    weights = [
        1.0 if s.confidence_level is None else vote_weight(s.confidence_level, alpha)
        for s in samples
    ]
    tokens = [s.tokens for s in samples]
    return answers, codes, weights, tokens


def tally_votes(
    samples: Sequence[SampleRecord], alpha: float = DEFAULT_ALPHA
) -> VoteTally:
    """Tally the weighted votes of one question's samples."""
    answers, codes, weights, _ = _encode(samples, alpha)
    masses, total = kernels.vote_masses(codes, weights, len(answers))
    refusal_weight = 0.0
    for code, weight in zip(codes, weights):
        if code < 0:
            refusal_weight += weight
    return VoteTally(
        answers=answers,
        masses=tuple(masses),
        total_weight=total,
        refusal_weight=refusal_weight,
    )


def decide(tally: VoteTally, tau: float) -> CascadeDecision:
    """Accept the strongest answer iff its share reaches ``tau``."""
    answer, share = tally.best()
    return CascadeDecision(accepted=share >= tau, answer=answer, share=share)


def simulate_parallel(
    samples: Sequence[SampleRecord], tau: float, alpha: float = DEFAULT_ALPHA
) -> tuple[CascadeDecision, int, bool]:
    """Decision plus its latency under parallel sampling with early stop.

    All samples launch together; completions land in ascending token
    order. Generation stops the moment the full-tally decision is
    certain, so the returned decision always equals ``decide`` on the
    complete tally and only the latency reflects the early stop.

    Returns ``(decision, latency_tokens, stopped_early)``.
    """
    answers, codes, weights, tokens = _encode(samples, alpha)
    accepted, winner, share, latency, stopped_early = kernels.cascade_vote(
        codes, weights, tokens, tau
    )
    decision = CascadeDecision(
        accepted=accepted,
        answer=answers[winner] if winner >= 0 else None,
        share=share,
    )
    return decision, latency, stopped_early


def select_samples(
    question: QuestionRecord, scheme: str, k: int = DEFAULT_K
) -> tuple[SampleRecord, ...]:
    """The question's samples that a sampling scheme replays.

    * ``rcv`` replays the confidence ladder: one sample per level, k=10.
    * ``fcv`` replays k samples conditioned on full confidence (1.0).
    * ``sc`` replays k unconditioned samples.
    """
    if scheme not in SCHEMES:
        raise ValidationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
    if not isinstance(k, int) or isinstance(k, bool) or k < 1:
        raise ValidationError(f"k must be a positive integer, got {k!r}")
    if scheme == "rcv":
        if k != 10:
            raise ValidationError("rcv replays the full confidence ladder; k must be 10")
        return confidence_ladder(question)
    if scheme == "fcv":
        pool = [s for s in question.slm_samples if s.confidence_level == 1.0]
        label = "at confidence 1.0"
    else:
        pool = [s for s in question.slm_samples if s.confidence_level is None]
        label = "without a confidence level"
    if len(pool) < k:
        raise ValidationError(
            f"question {question.id!r}: {scheme} needs {k} samples {label}, "
            f"found {len(pool)}"
        )
    return tuple(pool[:k])


def route_cascade(
    question: QuestionRecord,
    tau: float,
    profile: DatasetProfile,
    pricing: PricingSchedule,
    scheme: str = "rcv",
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    assume_perfect: bool = False,
) -> RoutingOutcome:
    """Route one question through the cascade at threshold ``tau``."""
    prepared = _prepare(question, scheme, k, alpha, profile, pricing, assume_perfect)
    return _outcome_at(prepared, tau)


# Indexes into the per-question tuples prepared for sweeping. A plain
# tuple keeps them cheap to pickle to worker processes.
def _prepare(
    question: QuestionRecord,
    scheme: str,
    k: int,
    alpha: float,
    profile: DatasetProfile,
    pricing: PricingSchedule,
    assume_perfect: bool,
) -> tuple:
    samples = select_samples(question, scheme, k)
    answers, codes, weights, tokens = _encode(samples, alpha)
    correct_of = {}
    for sample in samples:
        if sample.answer is not None:
            correct_of.setdefault(sample.answer, sample.correct)
    correct_by_code = tuple(correct_of[answer] for answer in answers)
    slm_cost = slm_question_cost(question, float(sum(tokens)), pricing)
    llm_cost = llm_question_cost(question, profile, pricing)
    if assume_perfect:
        llm_quality = 1.0
    else:
        if question.llm is None:
            raise ValidationError(
                f"question {question.id!r} has no llm record; "
                "actual-quality evaluation needs one (or use assume-perfect)"
            )
        llm_quality = float(question.llm.correct)
    return (question.id, codes, weights, tokens, answers, correct_by_code, slm_cost, llm_cost, llm_quality)


def _outcome_at(prepared: tuple, tau: float) -> RoutingOutcome:
    qid, codes, weights, tokens, answers, correct_by_code, slm_cost, llm_cost, llm_quality = prepared
    accepted, winner, _share, latency, _stopped = kernels.cascade_vote(
        codes, weights, tokens, tau
    )
    if accepted:
        if winner >= 0:
            quality = float(correct_by_code[winner])
            answer = answers[winner]
        else:
            quality = 0.0
            answer = None
        return RoutingOutcome(
            question_id=qid,
            mode="cascade",
            routed=False,
            quality=quality,
            slm_cost=slm_cost,
            llm_cost=0.0,
            decision_latency_tokens=latency,
            accepted_answer=answer,
        )
    return RoutingOutcome(
        question_id=qid,
        mode="cascade",
        routed=True,
        quality=llm_quality,
        slm_cost=slm_cost,
        llm_cost=llm_cost,
        decision_latency_tokens=latency,
        accepted_answer=None,
    )


def sweep_cascade(
    questions: Sequence[QuestionRecord],
    profile: DatasetProfile,
    pricing: PricingSchedule,
    taus: Iterable[float] = DEFAULT_TAUS,
    scheme: str = "rcv",
    k: int = DEFAULT_K,
    alpha: float = DEFAULT_ALPHA,
    assume_perfect: bool = False,
    jobs: int = 1,
) -> SweepResult:
    """Evaluate the cascade across a threshold grid.

    Returns the trade-off curve bracketed by the two reference points
    (all-SLM first, all-LLM last) plus the raw outcomes per threshold.
    The all-SLM point accepts every vote (it equals the grid at tau=0);
    the all-LLM point skips sampling entirely.
    """
    taus = normalize_taus(taus)
    questions = tuple(questions)
    if not questions:
        raise ValidationError("cannot sweep an empty dataset")

    prepared = tuple(
        _prepare(q, scheme, k, alpha, profile, pricing, assume_perfect)
        for q in questions
    )
    outcomes_by_tau = map_tau_chunks(_cascade_worker, prepared, taus, jobs)

    accept_all = tuple(_outcome_at(p, 0.0) for p in prepared)
    points = [
        CurvePoint(
            cost=normalized_cascade_cost(accept_all, profile, pricing),
            performance=average_quality(accept_all),
            label="slm_only",
            n_routed=0,
        )
    ]
    for tau in taus:
        outcomes = outcomes_by_tau[tau]
        points.append(
            CurvePoint(
                cost=normalized_cascade_cost(outcomes, profile, pricing),
                performance=average_quality(outcomes),
                tau=tau,
                n_routed=sum(1 for o in outcomes if o.routed),
            )
        )
    points.append(llm_only_point(questions, profile, pricing, assume_perfect))
    return SweepResult(points=tuple(points), outcomes_by_tau=outcomes_by_tau)


def _cascade_worker(args) -> list[tuple[float, tuple[RoutingOutcome, ...]]]:
    prepared, taus = args
    return [
        (tau, tuple(_outcome_at(p, tau) for p in prepared))
        for tau in taus
    ]
