"""
pixel level evaluation of delineation outputs: thresholding, tolerance based precision / recall / F on
centerlines, the threshold sweep, MCC and the connectivity-area-length (CAL) triple.
"""
__package__ = 'rustico.evaluation'

import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from skimage import morphology

from ..common.errors import EvaluationError, ParameterError, require
from ..common.logger import get_logger
from ..common.wheel import ordered_map

logger = get_logger(__name__)

GRID_STEPS = 100
EUCLIDEAN = 'euclidean'
CHEBYSHEV = 'chebyshev'

CAL_ALPHA = 2
CAL_BETA = 2

# 8-connectivity
EIGHT = np.ones((3, 3), dtype=bool)

PRF = namedtuple('PRF', ['precision', 'recall', 'f'])
Confusion = namedtuple('Confusion', ['tp', 'tn', 'fp', 'fn'])
CalScore = namedtuple('CalScore', ['connectivity', 'area', 'length', 'cal'])


def threshold_grid(steps=GRID_STEPS):
    """
    the sweep grid ``{0.01, 0.02, ..., 1.00}``: ``k / steps`` for ``k = 1 .. steps``, each value the nearest
    float to the decimal
    """
    steps = int(steps)
    require(steps >= 1, 'the threshold grid needs at least one step, got %d' % steps)
    return np.arange(1, steps + 1) / float(steps)


def check_threshold(t):
    if not 0 < t <= 1:
        raise ParameterError('threshold must lie in (0, 1], got %r' % (t,))
    return float(t)


def as_mask(mask):
    mask = np.asarray(mask)
    require(mask.ndim == 2, 'a mask is 2-D, got %d dimension(s)' % mask.ndim, EvaluationError)
    return mask.astype(bool, copy=False)


def check_same_shape(*masks):
    shapes = {m.shape for m in masks if m is not None}
    if len(shapes) > 1:
        raise EvaluationError('dimension mismatch: %s' % ', '.join('%dx%d' % (s[1], s[0]) for s in sorted(shapes)))


def threshold_map(resp, t):
    """
    binary mask of the pixels with ``resp >= t``.

    :param resp: response normalized to [0, 1]
    :param float t: in (0, 1]
    """
    t = check_threshold(t)
    return np.asarray(resp, dtype=np.float64) >= t


def f_score(precision, recall):
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def _distance_to(mask, metric):
    # distance of every pixel to the nearest set pixel of a nonempty mask
    if metric == EUCLIDEAN:
        return ndimage.distance_transform_edt(~mask)
    if metric == CHEBYSHEV:
        return ndimage.distance_transform_cdt(~mask, metric='chessboard').astype(np.float64)
    raise ParameterError('unknown distance metric %r (expected %s or %s)' % (metric, EUCLIDEAN, CHEBYSHEV))


def centerline_prf(det, gt, d_star, metric=EUCLIDEAN):
    """
    precision, recall and F of a detected centerline against the ground truth centerline, with a position
    tolerance of ``d_star`` pixels.

    a detected pixel is a true positive if some ground truth pixel lies within ``d_star`` of it (precision);
    a ground truth pixel is recovered if some detected pixel lies within ``d_star`` of it (recall).

    * empty detection and empty ground truth: ``(1, 1, 1)``
    * empty detection or empty ground truth (not both): ``(0, 0, 0)``

    :param str metric: ``euclidean`` (exact distance transform) or ``chebyshev``
    :return: :py:class:`PRF`
    """
    det, gt = as_mask(det), as_mask(gt)
    check_same_shape(det, gt)
    require(d_star >= 0, 'd_star must be >= 0, got %r' % (d_star,))
    n_det, n_gt = int(np.count_nonzero(det)), int(np.count_nonzero(gt))
    if n_det == 0 and n_gt == 0:
        return PRF(1.0, 1.0, 1.0)
    if n_det == 0 or n_gt == 0:
        return PRF(0.0, 0.0, 0.0)
    hit_det = int(np.count_nonzero(det & (_distance_to(gt, metric) <= d_star)))
    hit_gt = int(np.count_nonzero(gt & (_distance_to(det, metric) <= d_star)))
    precision, recall = hit_det / float(n_det), hit_gt / float(n_gt)
    return PRF(precision, recall, f_score(precision, recall))


def _check_unit_range(resp):
    resp = np.asarray(resp, dtype=np.float64)
    require(resp.ndim == 2, 'a response map is 2-D, got %d dimension(s)' % resp.ndim, EvaluationError)
    if resp.size and (resp.min() < 0 or resp.max() > 1):
        raise ParameterError('response must be normalized to [0, 1], got range [%g, %g]' % (resp.min(), resp.max()))
    return resp


@dataclass
class SweepResult:
    """
    scores of every image at every grid threshold.

    ``table[i, k, m]`` is metric ``names[m]`` of image ``i`` at ``grid[k]``; ``t_star`` maximizes the dataset
    average of metric ``key``, ties going to the smaller threshold.
    """
    grid: np.ndarray
    names: tuple
    key: str
    table: np.ndarray

    @property
    def averages(self):
        """
        ``[len(grid), len(names)]`` dataset averages, summed in image order
        """
        return self.table.mean(axis=0)

    @property
    def t_star_index(self):
        return int(np.argmax(self.averages[:, self.names.index(self.key)]))

    @property
    def t_star(self):
        return float(self.grid[self.t_star_index])

    @property
    def best(self):
        """
        dataset average of ``key`` at ``t_star``
        """
        return float(self.averages[self.t_star_index, self.names.index(self.key)])

    def at_t_star(self):
        """
        per-image metric rows at ``t_star`` as a list of dicts
        """
        k = self.t_star_index
        return [dict(zip(self.names, (float(v) for v in row[k]))) for row in self.table]

    def __iter__(self):
        # unpacks as (t_star, best)
        return iter((self.t_star, self.best))


def sweep(responses, score, names, key, grid=None, jobs=1, progress=False):
    """
    evaluate ``score(mask, i)`` (a tuple ordered as ``names``) for every image ``i`` and every threshold
    of ``grid`` (default :py:func:`threshold_grid`).
    """
    grid = threshold_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    responses = [_check_unit_range(r) for r in responses]
    require(len(responses) > 0, 'nothing to sweep: empty image set', EvaluationError)
    require(key in names, 'unknown sweep key %r' % (key,))
    for t in grid:
        check_threshold(t)

    def one(i):
        return [tuple(score(responses[i] >= t, i)) for t in grid]

    rows = ordered_map(one, range(len(responses)), jobs=jobs, desc='sweep', progress=progress)
    table = np.asarray(rows, dtype=np.float64).reshape(len(responses), len(grid), len(names))
    result = SweepResult(grid, tuple(names), key, table)
    logger.debug('sweep over %d image(s): best %s=%.4f at t*=%.2f', len(responses), key, result.best, result.t_star)
    return result


def sweep_thresholds(responses, gts, d_star, metric=EUCLIDEAN, grid=None, jobs=1, progress=False):
    """
    precision / recall / F sweep of centerline detections.

    usage::

        result = sweep_thresholds(maps, gts, d_star=2)
        t_star, best_f = result

    :return: :py:class:`SweepResult` with ``names = ('precision', 'recall', 'f')`` and key ``f``
    """
    gts = [as_mask(g) for g in gts]
    require(len(gts) == len(responses), 'got %d response(s) but %d ground truth(s)' % (len(responses), len(gts)),
            EvaluationError)
    for r, g in zip(responses, gts):
        check_same_shape(np.asarray(r), g)

    def score(mask, i):
        return centerline_prf(mask, gts[i], d_star, metric)

    return sweep(responses, score, PRF._fields, 'f', grid, jobs, progress)


def confusion(pred, gt, fov=None):
    """
    :return: :py:class:`Confusion` counts, restricted to ``fov`` when given
    """
    pred, gt = as_mask(pred), as_mask(gt)
    fov = None if fov is None else as_mask(fov)
    check_same_shape(pred, gt, fov)
    if fov is None:
        fov = np.ones(pred.shape, dtype=bool)
    tp = int(np.count_nonzero(pred & gt & fov))
    tn = int(np.count_nonzero(~pred & ~gt & fov))
    fp = int(np.count_nonzero(pred & ~gt & fov))
    fn = int(np.count_nonzero(~pred & gt & fov))
    return Confusion(tp, tn, fp, fn)


def mcc_from_confusion(c):
    denominator = (c.tp + c.fp) * (c.tp + c.fn) * (c.tn + c.fp) * (c.tn + c.fn)
    if denominator == 0:
        return 0.0
    return (c.tp * c.tn - c.fp * c.fn) / math.sqrt(denominator)


def mcc(pred, gt, fov=None):
    """
    Matthews correlation coefficient of ``pred`` against ``gt``, counting only inside ``fov`` if given.

    returns 0 when any factor of the denominator is 0 (one class missing from prediction or ground truth).
    """
    return mcc_from_confusion(confusion(pred, gt, fov))


def skeletonize(mask):
    """
    Zhang-Suen thinning to a one pixel wide, topology preserving skeleton
    """
    mask = as_mask(mask)
    if not mask.any():
        return np.zeros(mask.shape, dtype=bool)
    return morphology.skeletonize(mask, method='zhang').astype(bool)


def count_components(mask):
    return int(ndimage.label(mask, structure=EIGHT)[1])


def dilate(mask, radius):
    if radius <= 0:
        return mask.copy()
    return ndimage.binary_dilation(mask, structure=morphology.disk(radius).astype(bool))


def cal(pred, gt, alpha=CAL_ALPHA, beta=CAL_BETA):
    """
    connectivity, area and length agreement of a segmented line network and their product.

    * ``C = 1 - min(1, |#gt - #pred| / |gt|)`` with ``#`` the number of 8-connected components
    * ``A = |(dil_alpha(pred) & gt) | (pred & dil_alpha(gt))| / |pred | gt|``
    * ``L = |(sk(pred) & dil_beta(gt)) | (dil_beta(pred) & sk(gt))| / |sk(pred) | sk(gt)|``

    where ``dil_r`` is dilation by a disk of radius ``r`` and ``sk`` the Zhang-Suen skeleton.

    :raises EvaluationError: empty ground truth (CAL is undefined)
    :return: :py:class:`CalScore`
    """
    pred, gt = as_mask(pred), as_mask(gt)
    check_same_shape(pred, gt)
    n_gt = int(np.count_nonzero(gt))
    if n_gt == 0:
        raise EvaluationError('CAL is undefined for an empty ground truth')

    c = 1.0 - min(1.0, abs(count_components(gt) - count_components(pred)) / float(n_gt))
    if not pred.any():
        return CalScore(c, 0.0, 0.0, 0.0)

    area_hit = (dilate(pred, alpha) & gt) | (pred & dilate(gt, alpha))
    a = np.count_nonzero(area_hit) / float(np.count_nonzero(pred | gt))

    sk_pred, sk_gt = skeletonize(pred), skeletonize(gt)
    length_hit = (sk_pred & dilate(gt, beta)) | (dilate(pred, beta) & sk_gt)
    sk_union = int(np.count_nonzero(sk_pred | sk_gt))
    l = np.count_nonzero(length_hit) / float(sk_union) if sk_union else 0.0
    return CalScore(c, a, l, c * a * l)


def sweep_segmentation(responses, gts, fovs=None, grid=None, jobs=1, progress=False):
    """
    MCC sweep of segmentation outputs (DRIVE protocol): ``t_star`` maximizes the average MCC.

    :return: :py:class:`SweepResult` with ``names = ('mcc',)``
    """
    gts = [as_mask(g) for g in gts]
    fovs = [None] * len(gts) if fovs is None else [None if f is None else as_mask(f) for f in fovs]
    require(len(gts) == len(responses) == len(fovs),
            'got %d response(s), %d ground truth(s) and %d fov(s)' % (len(responses), len(gts), len(fovs)),
            EvaluationError)

    def score(mask, i):
        return (mcc(mask, gts[i], fovs[i]),)

    return sweep(responses, score, ('mcc',), 'mcc', grid, jobs, progress)
