"""
image container, image I/O and the low level numeric kernels shared by every filter stage.

a *gray image* is a 2-D ``float64`` numpy array indexed ``[row, col]`` (``width`` = number of columns,
``height`` = number of rows); a *binary mask* is a 2-D ``bool`` array of the same shape.

conventions

* x grows rightward (columns), y grows downward (rows)
* polar angles are counter-clockwise from +x in the mathematical plane: the point at distance
  ``rho`` and angle ``phi`` from ``(cx, cy)`` is column ``cx + rho cos(phi)``, row ``cy - rho sin(phi)``
* :py:func:`shift` moves content by ``rint(rho cos(angle))`` columns and ``rint(rho sin(angle))`` rows
  (down). Shifting by angle ``pi - phi`` brings the evidence found at ``(rho, phi)`` onto the centre.
* convolution borders are replicated, shift borders are zero-filled
* intensities are scaled to [0, 1] on load
"""
__package__ = 'rustico.common'

import math

import numpy as np
from PIL import Image

from ..pytorch.utils import correlate2d, separable_correlate2d
from .errors import DatasetError, ParameterError, require

# gaussian masks are truncated at ceil(TRUNCATE * sigma)
TRUNCATE = 3.0


class Kernel2D(object):
    """
    odd, square correlation mask. ``weights[radius, radius]`` is the centre tap.
    """

    __slots__ = ('weights',)

    def __init__(self, weights):
        weights = np.array(weights, dtype=np.float64)
        require(weights.ndim == 2 and weights.shape[0] == weights.shape[1], 'kernel must be square, got shape %s' % (weights.shape,))
        require(weights.shape[0] % 2 == 1, 'kernel side must be odd, got %d' % weights.shape[0])
        require(np.all(np.isfinite(weights)), 'kernel weights must be finite')
        weights.setflags(write=False)
        self.weights = weights

    @property
    def radius(self):
        return self.weights.shape[0] // 2

    @property
    def side(self):
        return self.weights.shape[0]

    def __eq__(self, other):
        return isinstance(other, Kernel2D) and np.array_equal(self.weights, other.weights)

    def __ne__(self, other):
        return not self == other

    def __hash__(self):
        return hash(self.weights.tobytes())

    def __repr__(self):
        return 'Kernel2D(radius=%d)' % self.radius


def as_gray_image(img):
    """
    validate and convert to a C-contiguous float64 2-D array
    """
    img = np.ascontiguousarray(img, dtype=np.float64)
    require(img.ndim == 2, 'a gray image is 2-D, got %d dimension(s)' % img.ndim)
    require(img.size > 0, 'image is empty')
    require(bool(np.all(np.isfinite(img))), 'image contains NaN or Inf')
    return img


def kernel_radius(sigma):
    return int(math.ceil(TRUNCATE * sigma))


def gaussian_taps(sigma, radius=None):
    """
    sampled 1-D gaussian on ``[-radius, radius]`` normalized to sum 1. ``outer(taps, taps)`` is the
    normalized 2-D isotropic gaussian of the same radius.
    """
    require(sigma > 0, 'sigma must be > 0, got %r' % sigma)
    radius = kernel_radius(sigma) if radius is None else radius
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    taps = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return taps / taps.sum()


def gaussian_weights(sigma, radius):
    """
    isotropic 2-D gaussian samples on a ``(2 radius + 1)^2`` support, normalized to sum 1
    """
    require(sigma > 0, 'sigma must be > 0, got %r' % sigma)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    xx, yy = np.meshgrid(x, x, indexing='xy')
    weights = np.exp(-(xx * xx + yy * yy) / (2.0 * sigma * sigma))
    return weights / weights.sum()


def gaussian_kernel(sigma):
    """
    :param float sigma: standard deviation in pixels, ``> 0``
    :return: :py:class:`Kernel2D` of radius ``ceil(3 sigma)``, weights summing to 1
    """
    require(sigma > 0, 'sigma must be > 0, got %r' % sigma)
    return Kernel2D(gaussian_weights(sigma, kernel_radius(sigma)))


def _check_kernel_fits(img, side):
    if side > 4 * max(img.shape):
        raise ParameterError('degenerate configuration: kernel side %d is larger than 4x the image side %d'
                             % (side, max(img.shape)))


def convolve(img, k):
    """
    correlation of ``img`` with ``k``, borders handled by edge replication. Output has the input shape.

    kernels used here are point-symmetric (or meant as correlation masks), so correlation is the contract.
    """
    img = as_gray_image(img)
    _check_kernel_fits(img, k.side)
    return correlate2d(img, k.weights)


def gaussian_blur(img, sigma):
    """
    blur with the :py:func:`gaussian_kernel` of ``sigma``, computed as two separable 1-D passes
    """
    img = as_gray_image(img)
    taps = gaussian_taps(sigma)
    _check_kernel_fits(img, taps.shape[0])
    return separable_correlate2d(img, taps)


def rectify(img):
    """
    half-wave rectification ``max(0, img)``
    """
    return np.maximum(np.asarray(img, dtype=np.float64), 0.0)


def polar_offset(rho, angle):
    """
    integer ``(d_col, d_row)`` displacement of :py:func:`shift` (row grows downward)
    """
    return int(np.rint(rho * math.cos(angle))), int(np.rint(rho * math.sin(angle)))


def translate(img, d_col, d_row):
    """
    move content by ``d_col`` columns to the right and ``d_row`` rows down, zero-fill what is vacated
    """
    img = np.asarray(img, dtype=np.float64)
    out = np.zeros_like(img)
    h, w = img.shape
    if abs(d_row) >= h or abs(d_col) >= w:
        return out
    src_rows = slice(max(0, -d_row), h - max(0, d_row))
    dst_rows = slice(max(0, d_row), h - max(0, -d_row))
    src_cols = slice(max(0, -d_col), w - max(0, d_col))
    dst_cols = slice(max(0, d_col), w - max(0, -d_col))
    out[dst_rows, dst_cols] = img[src_rows, src_cols]
    return out


def shift(img, rho, angle):
    """
    translate by the vector ``(rho, angle)`` rounded to whole pixels; vacated pixels are 0.

    ``shift(img, 2, 0)`` moves a pixel at column 5 to column 7. See the module docstring for the
    orientation of the row axis.
    """
    require(rho >= 0, 'rho must be >= 0, got %r' % rho)
    d_col, d_row = polar_offset(rho, angle)
    return translate(img, d_col, d_row)


# image I/O -------------------------------------------------------------------------------------------

_LUMA = np.array([0.299, 0.587, 0.114])


def _pil_to_unit(im, channel):
    mode = im.mode
    if mode == 'P':
        im = im.convert('RGBA' if 'transparency' in im.info else 'RGB')
        mode = im.mode
    if mode == '1':
        return np.asarray(im, dtype=np.float64)
    if mode in ('I;16', 'I;16B', 'I;16L', 'I;16N', 'I'):
        return np.asarray(im, dtype=np.float64) / 65535.0
    if mode == 'F':
        return np.clip(np.asarray(im, dtype=np.float64), 0.0, 1.0)
    if mode == 'L':
        return np.asarray(im, dtype=np.float64) / 255.0
    if mode == 'LA':
        return np.asarray(im, dtype=np.float64)[..., 0] / 255.0
    if mode not in ('RGB', 'RGBA'):
        im = im.convert('RGB')
    rgb = np.asarray(im, dtype=np.float64)[..., :3] / 255.0
    if channel == 'green':
        return np.ascontiguousarray(rgb[..., 1])
    if channel == 'luminance':
        return rgb.dot(_LUMA)
    raise ParameterError('unknown channel %r (expected green or luminance)' % (channel,))


def load_image(path, channel='luminance'):
    """
    read an 8 or 16 bit gray or RGB image (PNG, PGM/PPM, and whatever else Pillow reads)
    and scale it to [0, 1].

    :param str channel: for color images, ``green`` or ``luminance`` (ITU-R 601 weights)
    :return: float64 ``[H, W]`` array
    """
    try:
        with Image.open(str(path)) as im:
            im.load()
            img = _pil_to_unit(im, channel)
    except (IOError, OSError) as e:
        raise DatasetError('cannot read image %s: %s' % (path, e))
    return as_gray_image(img)


def load_mask(path):
    """
    read a binary ground truth image; any pixel of gray value >= 128 is set
    """
    try:
        with Image.open(str(path)) as im:
            im.load()
            return np.asarray(im.convert('L')) >= 128
    except (IOError, OSError) as e:
        raise DatasetError('cannot read mask %s: %s' % (path, e))


def save_response_png(img, path):
    """
    8 bit PNG of a nonnegative map, scaled by its global maximum (an all-zero map stays black)
    """
    img = np.asarray(img, dtype=np.float64)
    peak = img.max()
    scaled = img / peak if peak > 0 else np.zeros_like(img)
    data = np.rint(np.clip(scaled, 0.0, 1.0) * 255.0).astype(np.uint8)
    Image.fromarray(data).save(str(path), format='PNG')
    return path


def save_mask_png(mask, path):
    data = np.where(np.asarray(mask, dtype=bool), 255, 0).astype(np.uint8)
    Image.fromarray(data).save(str(path), format='PNG')
    return path
