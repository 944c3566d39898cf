"""
B-COSFIRE filters: tuple model, automatic configuration on a bar prototype, rotated variants
and the blur / shift / geometric mean response.
"""
__package__ = 'rustico.filters'

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..common.errors import ConfigurationError, ParameterError, require
from ..common.logger import get_logger
from ..common.raster import as_gray_image, shift
from ..common.wheel import canonical_float, dump_json, load_json
from .dog import DoGResponseBank, DoGSpec, check_polarity, dog_response

logger = get_logger(__name__)

TWO_PI = 2.0 * math.pi
ANGLE_DECIMALS = 9

# configuration defaults (circle sampling, merge window, response fraction)
CIRCLE_SAMPLES = 360
MERGE_TURN = 1.0 / 16.0
DEFAULT_FRACTION = 0.2
DEFAULT_SIGMA0 = 3.0
DEFAULT_ALPHA = 0.1


def wrap_angle(phi):
    """
    canonical angle in [0, 2 pi): wrapped, then rounded to 9 decimals so that residues near 0 vanish
    """
    phi = math.fmod(float(phi), TWO_PI)
    if phi < 0:
        phi += TWO_PI
    phi = round(phi, ANGLE_DECIMALS)
    if phi == 0.0 or phi >= round(TWO_PI, ANGLE_DECIMALS):
        return 0.0
    return phi


@dataclass(frozen=True)
class Tuple4:
    """
    one afferent of a COSFIRE filter: DoG polarity ``delta`` and std ``sigma``, collected at distance
    ``rho`` and polar angle ``phi`` (radians) from the filter centre.

    sigma, rho and phi are stored rounded to 9 significant digits, phi wrapped into [0, 2 pi).
    """
    delta: int
    sigma: float
    rho: float
    phi: float

    def __post_init__(self):
        object.__setattr__(self, 'delta', check_polarity(self.delta))
        if not self.sigma > 0:
            raise ParameterError('tuple sigma must be > 0, got %r' % (self.sigma,))
        if not self.rho >= 0:
            raise ParameterError('tuple rho must be >= 0, got %r' % (self.rho,))
        object.__setattr__(self, 'sigma', canonical_float(self.sigma))
        object.__setattr__(self, 'rho', canonical_float(self.rho))
        object.__setattr__(self, 'phi', wrap_angle(self.phi))

    @property
    def dog(self):
        return DoGSpec(self.delta, self.sigma)

    def sort_key(self):
        return self.rho, self.phi, self.delta, self.sigma

    def to_dict(self):
        return {'delta': self.delta, 'sigma': self.sigma, 'rho': self.rho, 'phi': self.phi}

    @staticmethod
    def from_dict(d):
        try:
            return Tuple4(int(d['delta']), float(d['sigma']), float(d['rho']), float(d['phi']))
        except (KeyError, TypeError) as e:
            raise ConfigurationError('malformed tuple %r: %s' % (d, e))


@dataclass(frozen=True)
class CosfireFilter:
    """
    a set of :py:class:`Tuple4` and the blur hyperparameters: tuple ``i`` is blurred with
    ``sigma0 + alpha * rho_i`` before being shifted to the centre.

    tuples are kept sorted by ``(rho, phi)`` so that equal filters serialize to equal bytes.
    """
    tuples: tuple
    sigma0: float
    alpha: float

    def __post_init__(self):
        tuples = tuple(sorted(self.tuples, key=Tuple4.sort_key))
        require(len(tuples) >= 1, 'a COSFIRE filter needs at least one tuple')
        require(self.sigma0 >= 0, 'sigma0 must be >= 0, got %r' % (self.sigma0,))
        require(self.alpha >= 0, 'alpha must be >= 0, got %r' % (self.alpha,))
        object.__setattr__(self, 'tuples', tuples)
        object.__setattr__(self, 'sigma0', canonical_float(self.sigma0))
        object.__setattr__(self, 'alpha', canonical_float(self.alpha))
        for t in tuples:
            require(self.blur_sigma(t) > 0, 'blur sigma0 + alpha * rho must be > 0 (tuple %r)' % (t,))

    def blur_sigma(self, t):
        return self.sigma0 + self.alpha * t.rho

    def __len__(self):
        return len(self.tuples)

    def __iter__(self):
        return iter(self.tuples)

    def to_dict(self):
        return {'sigma0': self.sigma0, 'alpha': self.alpha, 'tuples': [t.to_dict() for t in self.tuples]}

    @staticmethod
    def from_dict(d):
        try:
            tuples = [Tuple4.from_dict(x) for x in d['tuples']]
            return CosfireFilter(tuple(tuples), float(d['sigma0']), float(d['alpha']))
        except (KeyError, TypeError) as e:
            raise ConfigurationError('malformed filter document: %s' % e)

    def save(self, path):
        return dump_json(self.to_dict(), path)

    @staticmethod
    def load(path):
        return CosfireFilter.from_dict(load_json(path))


def render_bar_prototype(length, width, canvas):
    """
    dark (0) square canvas with a bright (1) horizontal bar of ``length x width`` pixels centred on the
    centre pixel.

    :param int canvas: side of the canvas, must be odd
    """
    length, width, canvas = int(length), int(width), int(canvas)
    require(canvas % 2 == 1, 'canvas must be odd so that a centre pixel exists, got %d' % canvas)
    require(0 < width < length <= canvas, 'need 0 < width < length <= canvas, got %d, %d, %d' % (width, length, canvas))
    img = np.zeros((canvas, canvas), dtype=np.float64)
    c = canvas // 2
    top = c - width // 2
    left = c - length // 2
    img[top:top + width, left:left + length] = 1.0
    return img


def circular_peaks(values, threshold, window):
    """
    indices of angular local maxima of a circular signal above ``threshold``.

    a sample is a maximum if it is larger than its predecessor and not smaller than its successor (the first
    sample of a plateau wins). Maxima closer than ``window`` samples are merged, the strongest is kept.
    """
    values = np.asarray(values, dtype=np.float64)
    n = values.shape[0]
    prev, nxt = np.roll(values, 1), np.roll(values, -1)
    candidates = np.nonzero((values > prev) & (values >= nxt) & (values > threshold))[0]
    order = sorted(candidates, key=lambda k: (-values[k], k))
    kept = []
    for k in order:
        if all(min(abs(k - j), n - abs(k - j)) >= window for j in kept):
            kept.append(k)
    return sorted(int(k) for k in kept)


def configure(prototype, spec, radii, fraction=DEFAULT_FRACTION, samples=CIRCLE_SAMPLES, merge_turn=MERGE_TURN,
              sigma0=DEFAULT_SIGMA0, alpha=DEFAULT_ALPHA):
    """
    configure a filter on ``prototype`` from the DoG response of ``spec``.

    for ``rho = 0`` one tuple is added when the centre response exceeds ``fraction`` of the global maximum;
    for each ``rho > 0`` the response is sampled (bilinear) at ``samples`` equiangular points on the circle
    of radius ``rho`` around the centre, and every angular local maximum above ``fraction`` of the global
    maximum, after merging maxima closer than ``merge_turn`` of a turn, gives one tuple.

    :param prototype: gray image with odd dimensions (its centre pixel is the filter centre)
    :param DoGSpec spec: polarity and sigma shared by every tuple
    :param radii: ascending list of radii, ``0`` allowed
    :param float fraction: in (0, 1]
    :param float sigma0: blur offset stored in the filter
    :param float alpha: blur slope stored in the filter
    :raises ConfigurationError: when no circle yields a keypoint
    """
    prototype = as_gray_image(prototype)
    h, w = prototype.shape
    require(h % 2 == 1 and w % 2 == 1, 'prototype needs odd dimensions, got %dx%d' % (w, h))
    radii = [float(r) for r in radii]
    require(len(radii) > 0, 'radii must not be empty')
    require(all(r >= 0 for r in radii), 'radii must be >= 0')
    require(radii == sorted(radii), 'radii must be sorted ascending')
    require(0 < fraction <= 1, 'fraction must lie in (0, 1], got %r' % (fraction,))

    response = dog_response(prototype, spec)
    peak = response.max()
    if not peak > 0:
        raise ConfigurationError('prototype gives no %s DoG response (sigma=%g): nothing to configure'
                                 % ('center-on' if spec.delta > 0 else 'center-off', spec.sigma))
    threshold = fraction * peak
    cy, cx = h // 2, w // 2
    angles = np.arange(samples, dtype=np.float64) * (TWO_PI / samples)
    window = samples * merge_turn

    tuples = []
    circle_max = []
    for rho in radii:
        if rho == 0:
            value = response[cy, cx]
            circle_max.append(value)
            if value > threshold:
                tuples.append(Tuple4(spec.delta, spec.sigma, 0.0, 0.0))
            continue
        rows = cy - rho * np.sin(angles)
        cols = cx + rho * np.cos(angles)
        values = ndimage.map_coordinates(response, [rows, cols], order=1, mode='constant', cval=0.0)
        circle_max.append(values.max())
        for k in circular_peaks(values, threshold, window):
            tuples.append(Tuple4(spec.delta, spec.sigma, rho, angles[k]))

    if not tuples:
        detail = ', '.join('rho=%g: %.3g' % (r, m / peak) for r, m in zip(radii, circle_max))
        raise ConfigurationError('no keypoint above fraction %g of the maximum response on any circle (%s)'
                                 % (fraction, detail))
    f = CosfireFilter(tuple(tuples), sigma0, alpha)
    logger.debug('configured %d tuple(s) on %d circle(s)', len(f), len(radii))
    return f


def rotate_filter(f, psi):
    """
    ``B^psi``: every polar angle ``phi_i`` becomes ``(phi_i + psi) mod 2 pi``; nothing else changes
    """
    tuples = tuple(Tuple4(t.delta, t.sigma, t.rho, t.phi + psi) for t in f.tuples)
    return CosfireFilter(tuples, f.sigma0, f.alpha)


def feature_maps(f, img, bank=None):
    """
    the per-tuple maps ``shift(blur(dog_response(img, (delta_i, sigma_i)), sigma0 + alpha rho_i), rho_i, pi - phi_i)``
    in tuple order
    """
    bank = bank if bank is not None else DoGResponseBank(img)
    maps = []
    for t in f.tuples:
        blurred = bank.blurred(t.dog, f.blur_sigma(t))
        maps.append(shift(blurred, t.rho, math.pi - t.phi))
    return maps


def geometric_mean(maps):
    """
    pixelwise unweighted geometric mean of nonnegative maps.

    logs of the positive values are summed in list order (no underflow for long products); a pixel where
    any map is 0 is exactly 0.
    """
    if len(maps) == 1:
        return np.array(maps[0], dtype=np.float64)
    log_sum = np.zeros_like(maps[0], dtype=np.float64)
    dead = np.zeros(maps[0].shape, dtype=bool)
    for m in maps:
        positive = m > 0
        dead |= ~positive
        log_sum += np.log(np.where(positive, m, 1.0))
    out = np.exp(log_sum / len(maps))
    out[dead] = 0.0
    return out


def cosfire_response(f, img, bank=None):
    """
    response ``r_B`` of filter ``f`` on ``img``: geometric mean of the tuple feature maps.

    pass a shared :py:class:`DoGResponseBank` to reuse DoG and blurred maps across filters applied to the
    same image (rotations, inhibitory filters).
    """
    bank = bank if bank is not None else DoGResponseBank(img)
    return geometric_mean(feature_maps(f, bank.image, bank))
