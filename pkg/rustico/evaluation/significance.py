"""
paired significance of per-image scores: two-sided Wilcoxon signed-rank test.
"""
__package__ = 'rustico.evaluation'

import math

import numpy as np
from scipy import stats

from ..common.errors import ParameterError

MIN_PAIRS = 6
EXACT_MAX = 25


def signed_ranks(differences):
    """
    nonzero differences, their doubled mid-ranks (integers, so tied magnitudes stay exact) and the doubled
    positive rank sum ``2 W+``
    """
    d = np.asarray(differences, dtype=np.float64)
    d = d[d != 0]
    doubled = np.rint(2.0 * stats.rankdata(np.abs(d))).astype(np.int64)
    return d, doubled, int(doubled[d > 0].sum())


def exact_distribution(doubled):
    """
    null distribution of the doubled positive rank sum: ``counts[s]`` sign assignments give sum ``s``
    """
    counts = np.zeros(int(doubled.sum()) + 1, dtype=np.int64)
    counts[0] = 1
    for r in doubled:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[:counts.shape[0] - r]
        counts = counts + shifted
    return counts


def _exact_p(doubled, w2):
    counts = exact_distribution(doubled)
    total = float(counts.sum())
    lower = counts[:w2 + 1].sum() / total
    upper = counts[w2:].sum() / total
    return min(1.0, 2.0 * min(lower, upper))


def _normal_p(d, doubled, w2):
    n = d.shape[0]
    mean = n * (n + 1) / 4.0
    _, ties = np.unique(doubled, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - float(((ties ** 3) - ties).sum()) / 48.0
    if var <= 0:
        return 1.0
    z = max(0.0, abs(w2 / 2.0 - mean) - 0.5) / math.sqrt(var)
    return min(1.0, 2.0 * float(stats.norm.sf(z)))


def paired_significance(scores_a, scores_b):
    """
    two-sided Wilcoxon signed-rank p-value of the paired differences ``scores_a - scores_b``.

    zero differences are dropped. With at most 25 nonzero differences the exact null distribution is used,
    otherwise the normal approximation with tie and continuity corrections. All differences zero gives 1.

    :raises ParameterError: lengths differ, or fewer than 6 pairs
    """
    a = np.asarray(scores_a, dtype=np.float64).ravel()
    b = np.asarray(scores_b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise ParameterError('paired scores need equal lengths, got %d and %d' % (a.shape[0], b.shape[0]))
    if a.shape[0] < MIN_PAIRS:
        raise ParameterError('need at least %d pairs for a signed-rank test, got %d' % (MIN_PAIRS, a.shape[0]))
    d, doubled, w2 = signed_ranks(a - b)
    if d.shape[0] == 0:
        return 1.0
    if d.shape[0] <= EXACT_MAX:
        return _exact_p(doubled, w2)
    return _normal_p(d, doubled, w2)
