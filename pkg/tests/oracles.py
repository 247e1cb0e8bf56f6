"""Independent brute-force reference implementations used as test oracles.

These deliberately share no code with the library: quadratic scans instead of
index maps, exhaustive enumeration instead of dynamic programming, plain
loops instead of pooled aggregation.
"""

from __future__ import annotations

from itertools import combinations


def brute_longest_block(a, b, alo, ahi, blo, bhi):
    """Naive scan for the longest matching block, earliest in a then in b."""
    besti, bestj, bestsize = alo, blo, 0
    for i in range(alo, ahi):
        for j in range(blo, bhi):
            k = 0
            while i + k < ahi and j + k < bhi and a[i + k] == b[j + k]:
                k += 1
            if k > bestsize:
                besti, bestj, bestsize = i, j, k
    return besti, bestj, bestsize


def brute_gestalt(a, b) -> float:
    if not a and not b:
        return 1.0

    def matched(alo, ahi, blo, bhi):
        i, j, k = brute_longest_block(a, b, alo, ahi, blo, bhi)
        if k == 0:
            return 0
        return k + matched(alo, i, blo, j) + matched(i + k, ahi, j + k, bhi)

    return 2.0 * matched(0, len(a), 0, len(b)) / (len(a) + len(b))


def brute_rouge_n(cand, ref, n):
    cand_grams = [tuple(cand[i : i + n]) for i in range(len(cand) - n + 1)]
    ref_grams = [tuple(ref[i : i + n]) for i in range(len(ref) - n + 1)]
    overlap = 0
    for gram in set(cand_grams):
        overlap += min(cand_grams.count(gram), ref_grams.count(gram))
    precision = overlap / len(cand_grams) if cand_grams else 0.0
    recall = overlap / len(ref_grams) if ref_grams else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def _is_subsequence(sub, seq) -> bool:
    it = iter(seq)
    return all(any(x == y for y in it) for x in sub)


def brute_lcs_exhaustive(a, b) -> int:
    """Longest common subsequence by enumerating subsequences of the shorter
    side, longest first.  Only viable for short inputs."""
    if len(a) > len(b):
        a, b = b, a
    for length in range(len(a), 0, -1):
        for idxs in combinations(range(len(a)), length):
            if _is_subsequence([a[i] for i in idxs], b):
                return length
    return 0


def brute_rouge_l(cand, ref):
    lcs = brute_lcs_exhaustive(cand, ref)
    precision = lcs / len(cand) if cand else 0.0
    recall = lcs / len(ref) if ref else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def set_overlap_prf(cand, ref):
    """Unigram set-overlap precision/recall: the one-hot embed reduction."""
    ref_set = set(ref)
    cand_set = set(cand)
    precision = sum(1 for t in cand if t in ref_set) / len(cand)
    recall = sum(1 for t in ref if t in cand_set) / len(ref)
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def brute_median(values) -> float:
    ordered = sorted(values)
    n = len(ordered)
    mid = n // 2
    if n % 2 == 1:
        return float(ordered[mid])
    return (ordered[mid - 1] + ordered[mid]) / 2.0


def brute_weighted_mean(pairs) -> float:
    """pairs: iterable of (weight, value)."""
    num = 0.0
    den = 0.0
    for w, v in pairs:
        num += w * v
        den += w
    return num / den
