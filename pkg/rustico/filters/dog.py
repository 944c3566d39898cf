"""
difference-of-Gaussians afferents: kernel synthesis, rectified responses and the per-image
response bank that every COSFIRE tuple draws its input from.
"""
__package__ = 'rustico.filters'

import threading
from dataclasses import dataclass

from ..common.errors import ParameterError
from ..common.logger import get_logger
from ..common.raster import (Kernel2D, as_gray_image, convolve, gaussian_blur, gaussian_taps, gaussian_weights,
                             kernel_radius, rectify)
from ..pytorch.utils import separable_correlate2d

logger = get_logger(__name__)

CENTER_ON = 1
CENTER_OFF = -1

# inner gaussian std = INNER_RATIO * outer std
INNER_RATIO = 0.5

# sigmas closer than this share one cache entry
SIGMA_RESOLUTION = 6


def check_polarity(delta):
    if delta not in (CENTER_ON, CENTER_OFF):
        raise ParameterError('polarity must be +1 (center-on) or -1 (center-off), got %r' % (delta,))
    return int(delta)


@dataclass(frozen=True)
class DoGSpec:
    """
    polarity ``delta`` (+1 center-on, -1 center-off) and outer standard deviation ``sigma``.
    The inner gaussian has std ``0.5 sigma``.
    """
    delta: int
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, 'delta', check_polarity(self.delta))
        if not self.sigma > 0:
            raise ParameterError('DoG sigma must be > 0, got %r' % (self.sigma,))
        object.__setattr__(self, 'sigma', float(self.sigma))

    @property
    def inner_sigma(self):
        return INNER_RATIO * self.sigma

    @property
    def radius(self):
        return kernel_radius(self.sigma)

    def key(self):
        return self.delta, round(self.sigma, SIGMA_RESOLUTION)


def dog_kernel(spec):
    """
    balanced DoG mask: unit-mass inner gaussian (std 0.5 sigma) minus unit-mass outer gaussian (std sigma),
    both sampled on the radius ``ceil(3 sigma)`` support. Negated for center-off.

    the two parts are normalized on the same truncated support, so the mask sums to 0 up to rounding
    and constant regions give no response.
    """
    radius = spec.radius
    base = gaussian_weights(spec.inner_sigma, radius) - gaussian_weights(spec.sigma, radius)
    return Kernel2D(base if spec.delta == CENTER_ON else -base)


def dog_response(img, spec):
    """
    ``rectify(convolve(img, dog_kernel(spec)))``.

    both gaussians of the balanced DoG are rank one, so the correlation is evaluated as the difference of
    two separable blurs on the common support; the result matches :py:func:`convolve` with
    :py:func:`dog_kernel` up to rounding.
    """
    img = as_gray_image(img)
    radius = spec.radius
    if 2 * radius + 1 > 4 * max(img.shape):
        # let convolve raise the degenerate-kernel error with its message
        return rectify(convolve(img, dog_kernel(spec)))
    inner = separable_correlate2d(img, gaussian_taps(spec.inner_sigma, radius))
    outer = separable_correlate2d(img, gaussian_taps(spec.sigma, radius))
    signed = inner - outer if spec.delta == CENTER_ON else outer - inner
    return rectify(signed)


class DoGResponseBank(object):
    """
    memo of the DoG response maps (and their blurred versions) of one image.

    one bank serves one filter application: all tuples, every orientation and both the excitatory and the
    inhibitory filter read from it, so a ``(delta, sigma)`` map is computed once and a
    ``(delta, sigma, blur sigma)`` map is computed once whatever the number of tuples and orientations.
    ``misses`` counts DoG computations and ``blur_misses`` blurs, for instrumentation.

    a lock guards the memo so that a bank may be shared by threads.

    usage::

        bank = DoGResponseBank(img)
        r = bank.response(DoGSpec(1, 2.5))
        b = bank.blurred(DoGSpec(1, 2.5), 3.4)
    """

    def __init__(self, img):
        self.image = as_gray_image(img)
        self._responses = {}
        self._blurred = {}
        self._lock = threading.Lock()
        self.misses = 0
        self.blur_misses = 0

    def response(self, spec):
        key = spec.key()
        with self._lock:
            ans = self._responses.get(key)
            if ans is None:
                ans = dog_response(self.image, spec)
                ans.setflags(write=False)
                self._responses[key] = ans
                self.misses += 1
                logger.debug('DoG response delta=%+d sigma=%g computed', spec.delta, spec.sigma)
        return ans

    def blurred(self, spec, blur_sigma):
        key = spec.key() + (round(blur_sigma, SIGMA_RESOLUTION),)
        with self._lock:
            ans = self._blurred.get(key)
        if ans is not None:
            return ans
        response = self.response(spec)
        with self._lock:
            ans = self._blurred.get(key)
            if ans is None:
                ans = gaussian_blur(response, blur_sigma)
                ans.setflags(write=False)
                self._blurred[key] = ans
                self.blur_misses += 1
        return ans

    def __len__(self):
        return len(self._responses)
