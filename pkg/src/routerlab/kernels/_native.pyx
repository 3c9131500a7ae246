# cython: language_level=3
# cython: boundscheck=False
# cython: wraparound=False
"""Compiled twin of the pure-Python voting kernels.

Mirrors ``_pure`` operation for operation, including the accumulation
order, so both backends produce bit-identical floats. See ``_pure`` for
the full semantics; change the two modules together.
"""

from libc.stdlib cimport free, malloc


def vote_masses(codes, weights, int n_candidates):
    """Accumulate vote mass per candidate; see ``_pure.vote_masses``."""
    cdef Py_ssize_t k = len(codes)
    if len(weights) != k:
        raise ValueError("codes and weights must have equal length")
    cdef double* masses = <double*> malloc((n_candidates if n_candidates > 0 else 1) * sizeof(double))
    if masses == NULL:
        raise MemoryError()
    cdef Py_ssize_t i
    cdef int code
    cdef double weight
    cdef double total = 0.0
    try:
        for i in range(n_candidates):
            masses[i] = 0.0
        for i in range(k):
            code = codes[i]
            weight = weights[i]
            total += weight
            if code >= 0:
                if code >= n_candidates:
                    raise ValueError("candidate code out of range")
                masses[code] += weight
            elif code < -1:
                raise ValueError("candidate code out of range")
        out = [masses[i] for i in range(n_candidates)]
    finally:
        free(masses)
    return out, total


def cascade_vote(codes, weights, tokens, double tau):
    """Vote decision plus early-stop latency; see ``_pure.cascade_vote``."""
    cdef Py_ssize_t k = len(codes)
    if k == 0:
        raise ValueError("cannot vote over zero samples")
    if len(weights) != k or len(tokens) != k:
        raise ValueError("codes, weights and tokens must have equal length")

    cdef Py_ssize_t buf = k if k > 0 else 1
    cdef int* ccodes = <int*> malloc(buf * sizeof(int))
    cdef double* cweights = <double*> malloc(buf * sizeof(double))
    cdef long long* ctokens = <long long*> malloc(buf * sizeof(long long))
    cdef Py_ssize_t* order = <Py_ssize_t*> malloc(buf * sizeof(Py_ssize_t))
    cdef double* masses = NULL

    cdef Py_ssize_t i, j, step, idx
    cdef int code
    cdef int n_candidates = 0
    cdef int winner = -1
    cdef double total = 0.0
    cdef double best = 0.0
    cdef double winner_share = 0.0
    cdef double pending_votable = 0.0
    cdef double max_observed = 0.0
    cdef long long latency = 0
    cdef bint accepted = False
    cdef bint stopped_early = False

    if ccodes == NULL or cweights == NULL or ctokens == NULL or order == NULL:
        free(ccodes)
        free(cweights)
        free(ctokens)
        free(order)
        raise MemoryError()

    try:
        for i in range(k):
            ccodes[i] = codes[i]
            cweights[i] = weights[i]
            ctokens[i] = tokens[i]
            if ccodes[i] < -1:
                raise ValueError("candidate code out of range")
            if ccodes[i] + 1 > n_candidates:
                n_candidates = ccodes[i] + 1

        masses = <double*> malloc((n_candidates if n_candidates > 0 else 1) * sizeof(double))
        if masses == NULL:
            raise MemoryError()
        for i in range(n_candidates):
            masses[i] = 0.0

        # Full tally, in sample order like the pure twin.
        for i in range(k):
            total += cweights[i]
            if ccodes[i] >= 0:
                masses[ccodes[i]] += cweights[i]
        for i in range(n_candidates):
            if masses[i] > best:
                best = masses[i]
                winner = i
        if winner >= 0:
            winner_share = best / total
        accepted = winner_share >= tau

        # Completion order: ascending token count, ties by sample index.
        for i in range(k):
            order[i] = i
        for i in range(1, k):
            idx = order[i]
            j = i - 1
            while j >= 0 and (
                ctokens[order[j]] > ctokens[idx]
                or (ctokens[order[j]] == ctokens[idx] and order[j] > idx)
            ):
                order[j + 1] = order[j]
                j -= 1
            order[j + 1] = idx

        for i in range(k):
            if ccodes[i] >= 0:
                pending_votable += cweights[i]

        # Reuse the masses buffer as the observed tally for the walk.
        for i in range(n_candidates):
            masses[i] = 0.0
        for step in range(k):
            idx = order[step]
            code = ccodes[idx]
            if code >= 0:
                pending_votable -= cweights[idx]
                masses[code] += cweights[idx]
                if masses[code] > max_observed:
                    max_observed = masses[code]
            latency = ctokens[idx]
            if max_observed / total >= tau or (max_observed + pending_votable) / total < tau:
                stopped_early = step < k - 1
                break
    finally:
        free(ccodes)
        free(cweights)
        free(ctokens)
        free(order)
        free(masses)

    return bool(accepted), winner, winner_share, int(latency), bool(stopped_early)
