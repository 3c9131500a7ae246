"""Pure-Python voting kernels.

This module is the reference implementation; the compiled twin in
``_native.pyx`` mirrors it operation for operation so both backends
produce bit-identical floats. Keep the accumulation order here in sync
with the extension when changing either.

Inputs are plain lists. ``codes`` holds one candidate index per sample,
with -1 marking a refusal; ``weights`` are strictly positive vote
weights; ``tokens`` are the generated lengths used to order completions.
"""

from __future__ import annotations


def vote_masses(codes: list[int], weights: list[float], n_candidates: int) -> tuple[list[float], float]:
    """Accumulate vote mass per candidate.

    Returns ``(masses, total_weight)``. Refusals contribute their weight
    to the total but to no candidate, which is what dilutes every share
    when refusals are present.
    """
    if len(weights) != len(codes):
        raise ValueError("codes and weights must have equal length")
    masses = [0.0] * n_candidates
    total = 0.0
    for code, weight in zip(codes, weights):
        total += weight
        if code >= 0:
            if code >= n_candidates:
                raise ValueError("candidate code out of range")
            masses[code] += weight
        elif code < -1:
            raise ValueError("candidate code out of range")
    return masses, total


def cascade_vote(
    codes: list[int],
    weights: list[float],
    tokens: list[int],
    tau: float,
) -> tuple[bool, int, float, int, bool]:
    """Full-tally vote decision plus its parallel early-stop latency.

    The decision is always taken from the complete tally: accept when the
    strongest candidate's share of the total weight reaches ``tau``.

    For latency, samples are replayed in order of completion (ascending
    token count, ties by position). After each completion the decision is
    settled early if either a candidate's observed share already reached
    ``tau``, or no candidate can reach it even with every still-pending
    answer-bearing sample agreeing. Pending refusals are never counted as
    reachable mass; they can only dilute, and the total weight they
    dilute into is fixed up front.

    Returns ``(accepted, winner, winner_share, latency_tokens,
    stopped_early)`` where ``winner`` is a candidate index or -1 when no
    candidate received any mass, and ``winner_share`` is the share the
    full tally gives the winner (0.0 when there is none).
    """
    k = len(codes)
    if k == 0:
        raise ValueError("cannot vote over zero samples")
    if len(weights) != k or len(tokens) != k:
        raise ValueError("codes, weights and tokens must have equal length")
    n_candidates = 0
    for code in codes:
        if code + 1 > n_candidates:
            n_candidates = code + 1

    masses, total = vote_masses(codes, weights, n_candidates)
    winner = -1
    best = 0.0
    for candidate in range(n_candidates):
        if masses[candidate] > best:
            best = masses[candidate]
            winner = candidate
    winner_share = best / total if winner >= 0 else 0.0
    accepted = winner_share >= tau

    order = sorted(range(k), key=lambda i: (tokens[i], i))
    pending_votable = 0.0
    for i in range(k):
        if codes[i] >= 0:
            pending_votable += weights[i]

    observed = [0.0] * n_candidates
    max_observed = 0.0
    latency = 0
    stopped_early = False
    for step, i in enumerate(order):
        code = codes[i]
        if code >= 0:
            pending_votable -= weights[i]
            observed[code] += weights[i]
            if observed[code] > max_observed:
                max_observed = observed[code]
        latency = tokens[i]
        if max_observed / total >= tau or (max_observed + pending_votable) / total < tau:
            stopped_early = step < k - 1
            break

    return accepted, winner, winner_share, latency, stopped_early
