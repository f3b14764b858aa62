"""Independent brute-force oracles the tests check the library against.

Everything here deliberately avoids the library's own code paths: alignment
by exhaustive recursion, edit distance by memoized recursion over suffix
tuples, and the information metrics by Counter arithmetic with math.log.
"""

import math
from collections import Counter

PLACEHOLDER = "*"


def enumerate_alignments(ref, hyp):
    """All valid pair lists aligning ref to hyp, with their costs.

    Exponential; intended for sequences of length <= 4.
    """
    if not ref and not hyp:
        yield (), 0
        return
    if ref and hyp:
        for pairs, cost in enumerate_alignments(ref[1:], hyp[1:]):
            step = 0 if ref[0] == hyp[0] else 1
            yield ((ref[0], hyp[0]),) + pairs, cost + step
    if ref:
        for pairs, cost in enumerate_alignments(ref[1:], hyp):
            yield ((ref[0], PLACEHOLDER),) + pairs, cost + 1
    if hyp:
        for pairs, cost in enumerate_alignments(ref, hyp[1:]):
            yield ((PLACEHOLDER, hyp[0]),) + pairs, cost + 1


def best_alignments(ref, hyp):
    """Minimal cost and the set of all pair lists achieving it."""
    best = None
    winners = set()
    for pairs, cost in enumerate_alignments(tuple(ref), tuple(hyp)):
        if best is None or cost < best:
            best = cost
            winners = {pairs}
        elif cost == best:
            winners.add(pairs)
    return best, winners


def edit_distance(ref, hyp, _cache=None):
    """Classical Levenshtein distance by memoized recursion."""
    cache = _cache if _cache is not None else {}

    def dist(r, h):
        if not r:
            return len(h)
        if not h:
            return len(r)
        key = (r, h)
        hit = cache.get(key)
        if hit is not None:
            return hit
        sub = dist(r[:-1], h[:-1]) + (0 if r[-1] == h[-1] else 1)
        dele = dist(r[:-1], h) + 1
        ins = dist(r, h[:-1]) + 1
        value = min(sub, dele, ins)
        cache[key] = value
        return value

    return dist(tuple(ref), tuple(hyp))


def nmi_from_pairs(pairs):
    """Normalized mutual information recomputed from an alignment pair list.

    Joint and marginals from Counter tallies, plain p*log(p/(pr*ph)) sums.
    """
    joint = Counter(pairs)
    total = sum(joint.values())
    p_ref = Counter(r for r, _ in pairs)
    p_hyp = Counter(h for _, h in pairs)

    h_ref = -sum((c / total) * math.log(c / total) for c in p_ref.values())
    h_hyp = -sum((c / total) * math.log(c / total) for c in p_hyp.values())
    if h_ref + h_hyp == 0.0:
        return 1.0 if all(r == h for r, h in pairs) else 0.0
    mi = 0.0
    for (r, h), c in joint.items():
        p = c / total
        mi += p * math.log(p / ((p_ref[r] / total) * (p_hyp[h] / total)))
    return 2.0 * mi / (h_ref + h_hyp)


def nmi_oracle(ref, hyp, align_fn):
    """NMI recomputed independently from the library's alignment only."""
    return nmi_from_pairs(align_fn(ref, hyp).pairs)


def central_difference(f, x, h=1e-5):
    """Central finite-difference derivative of a scalar function."""
    return (f(x + h) - f(x - h)) / (2.0 * h)
