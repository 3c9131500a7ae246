"""File formats and the synthetic dataset generator.

Datasets, training corpora, preference pairs and refusal examples are
JSON Lines; curves are CSV; pricing and metrics are single JSON objects.
Parsers are strict about required fields and value ranges but tolerate
unknown fields with a warning, so newer files keep loading.
"""

from __future__ import annotations

import csv
import hashlib
import json
import random
import warnings
from dataclasses import dataclass, fields
from typing import Any, Iterable, Iterator, Mapping, Sequence

from .records import (
    CONFIDENCE_LEVELS,
    SCHEMES,
    CurvePoint,
    DatasetProfile,
    LlmOutcome,
    MetricsReport,
    PreferencePair,
    PricingSchedule,
    QuestionRecord,
    RefusalExample,
    SampleRecord,
    ValidationError,
    canonical_answer,
)
from .trainset import ResponseSample, TrainingQuestion

CURVE_HEADER = ("tau", "cost", "performance", "n_routed")


class DatasetError(ValidationError):
    """A file could not be parsed; the message carries file:line context."""


def _iter_jsonl(path: str) -> Iterator[tuple[int, Any]]:
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                yield lineno, json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {exc}") from exc


def _warn_unknown(data: Mapping[str, Any], known: frozenset[str], where: str) -> None:
    extras = sorted(set(data) - known)
    if extras:
        warnings.warn(f"{where}: ignoring unknown field(s) {', '.join(extras)}")


_QUESTION_FIELDS = frozenset({"id", "input_tokens", "pre_score", "slm_samples", "llm"})
_SAMPLE_FIELDS = frozenset({"answer", "correct", "tokens", "confidence_level", "refusal"})
_LLM_FIELDS = frozenset({"correct", "tokens"})
_TRAINING_FIELDS = frozenset({"id", "question", "samples"})
_RESPONSE_FIELDS = frozenset({"text", "correct", "tokens"})


def parse_question(data: Mapping[str, Any], source: str = "question") -> QuestionRecord:
    """Build a QuestionRecord from one decoded JSONL object."""
    if not isinstance(data, Mapping):
        raise ValidationError(f"{source}: expected a JSON object, got {type(data).__name__}")
    _warn_unknown(data, _QUESTION_FIELDS, source)
    raw_samples = data.get("slm_samples")
    if isinstance(raw_samples, Sequence) and not isinstance(raw_samples, (str, bytes)):
        for index, sample in enumerate(raw_samples):
            if isinstance(sample, Mapping):
                _warn_unknown(sample, _SAMPLE_FIELDS, f"{source}: slm_samples[{index}]")
    raw_llm = data.get("llm")
    if isinstance(raw_llm, Mapping):
        _warn_unknown(raw_llm, _LLM_FIELDS, f"{source}: llm")
    return QuestionRecord.from_dict(data)


def load_dataset(path: str) -> tuple[tuple[QuestionRecord, ...], DatasetProfile]:
    """Read a dataset and profile it. Raises on the first bad line."""
    questions: list[QuestionRecord] = []
    seen: dict[str, int] = {}
    for lineno, data in _iter_jsonl(path):
        try:
            question = parse_question(data, source=f"{path}:{lineno}")
        except DatasetError:
            raise
        except ValidationError as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from exc
        if question.id in seen:
            raise DatasetError(
                f"{path}:{lineno}: duplicate question id {question.id!r} "
                f"(first seen on line {seen[question.id]})"
            )
        seen[question.id] = lineno
        questions.append(question)
    if not questions:
        raise DatasetError(f"{path}: no questions found")
    return tuple(questions), DatasetProfile.from_questions(questions)


def scan_dataset(path: str) -> tuple[int, list[str]]:
    """Check every line independently instead of stopping at the first
    problem. Returns (valid_question_count, diagnostics)."""
    count = 0
    problems: list[str] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                data = json.loads(line)
            except json.JSONDecodeError as exc:
                problems.append(f"{path}:{lineno}: invalid JSON: {exc}")
                continue
            try:
                question = parse_question(data, source=f"{path}:{lineno}")
            except ValidationError as exc:
                problems.append(f"{path}:{lineno}: {exc}")
                continue
            if question.id in seen:
                problems.append(
                    f"{path}:{lineno}: duplicate question id {question.id!r} "
                    f"(first seen on line {seen[question.id]})"
                )
                continue
            seen[question.id] = lineno
            count += 1
    if count == 0 and not problems:
        problems.append(f"{path}: no questions found")
    return count, problems


def write_dataset(questions: Iterable[QuestionRecord], path: str) -> None:
    _write_jsonl((q.to_dict() for q in questions), path)


def _write_jsonl(rows: Iterable[Mapping[str, Any]], path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False))
            handle.write("\n")


def load_pricing(path: str) -> PricingSchedule:
    """Read a pricing JSON object."""
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(data, Mapping):
        raise DatasetError(f"{path}: expected a JSON object with the four prices")
    known = frozenset(f.name for f in fields(PricingSchedule))
    _warn_unknown(data, known, path)
    try:
        return PricingSchedule.from_dict(data)
    except ValidationError as exc:
        raise DatasetError(f"{path}: {exc}") from exc


def write_curve(points: Iterable[CurvePoint], path: str) -> None:
    """Write a trade-off curve as CSV.

    Grid rows carry their threshold in the tau column; the reference
    rows carry their label there instead. Costs and performances are
    written with six decimals.
    """
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(CURVE_HEADER)
        for point in points:
            if point.label is not None:
                tau_cell = point.label
            elif point.tau is not None:
                tau_cell = format(point.tau, ".6g")
            else:
                tau_cell = ""
            writer.writerow(
                [tau_cell, f"{point.cost:.6f}", f"{point.performance:.6f}", point.n_routed]
            )


def read_curve(path: str) -> tuple[CurvePoint, ...]:
    """Read a curve CSV back into points (at the file's precision)."""
    points: list[CurvePoint] = []
    with open(path, encoding="utf-8", newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or tuple(header) != CURVE_HEADER:
            raise DatasetError(
                f"{path}: expected header {','.join(CURVE_HEADER)}, "
                f"got {','.join(header) if header else 'an empty file'}"
            )
        for row_index, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CURVE_HEADER):
                raise DatasetError(f"{path}:{row_index}: expected {len(CURVE_HEADER)} columns")
            tau_cell, cost_cell, perf_cell, routed_cell = row
            label = None
            tau = None
            if tau_cell in ("slm_only", "llm_only"):
                label = tau_cell
            elif tau_cell:
                tau = _parse_float(tau_cell, path, row_index, "tau")
            try:
                points.append(
                    CurvePoint(
                        cost=_parse_float(cost_cell, path, row_index, "cost"),
                        performance=_parse_float(perf_cell, path, row_index, "performance"),
                        tau=tau,
                        label=label,
                        n_routed=_parse_int(routed_cell, path, row_index, "n_routed"),
                    )
                )
            except DatasetError:
                raise
            except ValidationError as exc:
                raise DatasetError(f"{path}:{row_index}: {exc}") from exc
    if not points:
        raise DatasetError(f"{path}: no curve points found")
    return tuple(points)


def _parse_float(cell: str, path: str, lineno: int, name: str) -> float:
    try:
        return float(cell)
    except ValueError as exc:
        raise DatasetError(f"{path}:{lineno}: {name} is not a number: {cell!r}") from exc


def _parse_int(cell: str, path: str, lineno: int, name: str) -> int:
    try:
        return int(cell)
    except ValueError as exc:
        raise DatasetError(f"{path}:{lineno}: {name} is not an integer: {cell!r}") from exc


def write_metrics(report: MetricsReport, path: str) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2)
        handle.write("\n")


def parse_training_question(data: Mapping[str, Any], source: str = "question") -> TrainingQuestion:
    """Build a TrainingQuestion from one decoded JSONL object."""
    if not isinstance(data, Mapping):
        raise ValidationError(f"{source}: expected a JSON object, got {type(data).__name__}")
    _warn_unknown(data, _TRAINING_FIELDS, source)
    for name in ("id", "question", "samples"):
        if name not in data:
            raise ValidationError(f"{source}: missing required field {name!r}")
    raw_samples = data["samples"]
    if not isinstance(raw_samples, Sequence) or isinstance(raw_samples, (str, bytes)):
        raise ValidationError(f"{source}: samples must be a list")
    samples = []
    for index, raw in enumerate(raw_samples):
        if not isinstance(raw, Mapping):
            raise ValidationError(f"{source}: samples[{index}] must be an object")
        _warn_unknown(raw, _RESPONSE_FIELDS, f"{source}: samples[{index}]")
        for name in ("text", "correct", "tokens"):
            if name not in raw:
                raise ValidationError(f"{source}: samples[{index}] is missing {name!r}")
        samples.append(
            ResponseSample(text=raw["text"], correct=raw["correct"], tokens=raw["tokens"])
        )
    return TrainingQuestion(id=data["id"], question=data["question"], samples=tuple(samples))


def load_training_questions(path: str) -> tuple[TrainingQuestion, ...]:
    """Read a raw training corpus. Raises on the first bad line."""
    questions: list[TrainingQuestion] = []
    seen: dict[str, int] = {}
    for lineno, data in _iter_jsonl(path):
        try:
            question = parse_training_question(data, source=f"{path}:{lineno}")
        except DatasetError:
            raise
        except ValidationError as exc:
            raise DatasetError(f"{path}:{lineno}: {exc}") from exc
        if question.id in seen:
            raise DatasetError(
                f"{path}:{lineno}: duplicate question id {question.id!r} "
                f"(first seen on line {seen[question.id]})"
            )
        seen[question.id] = lineno
        questions.append(question)
    if not questions:
        raise DatasetError(f"{path}: no questions found")
    return tuple(questions)


def write_pairs(pairs: Iterable[PreferencePair], path: str) -> None:
    _write_jsonl((p.to_dict() for p in pairs), path)


def write_refusal_examples(examples: Iterable[RefusalExample], path: str) -> None:
    _write_jsonl((e.to_dict() for e in examples), path)


@dataclass(frozen=True)
class SyntheticParams:
    """Knobs for the synthetic dataset generator.

    Each question draws a difficulty d; its SLM answers are correct with
    probability 1 - d, and a confidence-conditioned sample refuses when
    1 - d falls below its level. ``easy_fraction`` pins that share of
    questions to d = 0 exactly, which is the only way fcv samples ever
    answer. ``pre_score_noise`` scales a uniform perturbation of the
    stored pre-generation score away from the true accuracy.
    """

    scheme: str = "rcv"
    n_samples: int = 10
    difficulty_min: float = 0.0
    difficulty_max: float = 1.0
    easy_fraction: float = 0.0
    input_tokens: tuple[int, int] = (20, 200)
    answer_tokens: tuple[int, int] = (40, 400)
    refusal_tokens: tuple[int, int] = (6, 14)
    llm_tokens: tuple[int, int] = (80, 800)
    llm_correct_prob: float = 0.9
    pre_score_noise: float = 0.0
    include_llm: bool = True
    answer_keys: tuple[str, ...] = ("a", "b", "c", "d")

    def __post_init__(self) -> None:
        if self.scheme not in SCHEMES:
            raise ValidationError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.scheme == "rcv" and self.n_samples != 10:
            raise ValidationError("rcv generates the full confidence ladder; n_samples must be 10")
        if not isinstance(self.n_samples, int) or self.n_samples < 1:
            raise ValidationError(f"n_samples must be a positive integer, got {self.n_samples!r}")
        if not 0.0 <= self.difficulty_min <= self.difficulty_max <= 1.0:
            raise ValidationError(
                "difficulty bounds must satisfy 0 <= min <= max <= 1, got "
                f"{self.difficulty_min}..{self.difficulty_max}"
            )
        if not 0.0 <= self.easy_fraction <= 1.0:
            raise ValidationError(f"easy_fraction must lie in [0, 1], got {self.easy_fraction}")
        if not 0.0 <= self.llm_correct_prob <= 1.0:
            raise ValidationError(f"llm_correct_prob must lie in [0, 1], got {self.llm_correct_prob}")
        if self.pre_score_noise < 0:
            raise ValidationError(f"pre_score_noise must be >= 0, got {self.pre_score_noise}")
        for name in ("input_tokens", "answer_tokens", "refusal_tokens", "llm_tokens"):
            bounds = getattr(self, name)
            if (
                len(bounds) != 2
                or not all(isinstance(b, int) and not isinstance(b, bool) for b in bounds)
                or not 1 <= bounds[0] <= bounds[1]
            ):
                raise ValidationError(f"{name} must be an integer range (lo, hi) with 1 <= lo <= hi")
            object.__setattr__(self, name, tuple(bounds))
        keys = tuple(canonical_answer(k) for k in self.answer_keys)
        if len(keys) < 2 or len(set(keys)) != len(keys) or any(not k for k in keys):
            raise ValidationError("answer_keys must be at least two distinct non-empty strings")
        object.__setattr__(self, "answer_keys", keys)


def generate_synthetic(
    n: int, seed: int, params: SyntheticParams = SyntheticParams()
) -> tuple[QuestionRecord, ...]:
    """Generate a reproducible synthetic dataset.

    Each question gets its own generator seeded from (seed, index), so
    the stream is stable under n: the first questions of a larger run
    equal a smaller run. The pre-sample draws are made in a fixed order
    regardless of parameters, so two runs with the same seed see the
    same difficulties even under different schemes.
    """
    if not isinstance(n, int) or isinstance(n, bool) or n < 1:
        raise ValidationError(f"n must be a positive integer, got {n!r}")
    questions = []
    for index in range(n):
        questions.append(_synthesize_question(index, seed, params))
    return tuple(questions)


def _synthesize_question(index: int, seed: int, params: SyntheticParams) -> QuestionRecord:
    digest = hashlib.sha256(f"{seed}:{index}".encode()).digest()
    rng = random.Random(int.from_bytes(digest, "big"))

    # Fixed draw order; see generate_synthetic.
    u_easy = rng.random()
    difficulty = rng.uniform(params.difficulty_min, params.difficulty_max)
    if u_easy < params.easy_fraction:
        difficulty = 0.0
    gold = rng.choice(params.answer_keys)
    llm_correct = rng.random() < params.llm_correct_prob
    llm_tokens = rng.randint(*params.llm_tokens)
    noise = rng.uniform(-1.0, 1.0) * params.pre_score_noise
    input_tokens = rng.randint(*params.input_tokens)

    accuracy = 1.0 - difficulty
    samples = []
    if params.scheme == "rcv":
        for level in CONFIDENCE_LEVELS:
            samples.append(_draw_sample(rng, params, accuracy, gold, level))
    elif params.scheme == "fcv":
        for _ in range(params.n_samples):
            samples.append(_draw_sample(rng, params, accuracy, gold, 1.0))
    else:
        for _ in range(params.n_samples):
            samples.append(_draw_sample(rng, params, accuracy, gold, None))

    pre_score = min(1.0, max(0.0, accuracy + noise))
    llm = LlmOutcome(correct=llm_correct, tokens=llm_tokens) if params.include_llm else None
    return QuestionRecord(
        id=f"q{index:06d}",
        input_tokens=input_tokens,
        slm_samples=tuple(samples),
        pre_score=pre_score,
        llm=llm,
    )


def _draw_sample(
    rng: random.Random,
    params: SyntheticParams,
    accuracy: float,
    gold: str,
    level: float | None,
) -> SampleRecord:
    if level is not None and accuracy < level:
        return SampleRecord(
            answer=None,
            correct=False,
            tokens=rng.randint(*params.refusal_tokens),
            confidence_level=level,
            refusal=True,
        )
    correct = rng.random() < accuracy
    if correct:
        answer = gold
    else:
        wrong = [key for key in params.answer_keys if key != gold]
        answer = rng.choice(wrong)
    return SampleRecord(
        answer=answer,
        correct=correct,
        tokens=rng.randint(*params.answer_tokens),
        confidence_level=level,
        refusal=False,
    )
