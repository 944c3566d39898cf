__package__ = 'rustico.pytorch'

import numpy as np
import torch
import torch.nn.functional as F


def numpy_to_tensor(x):
    """
    wrap a 2-D numpy array as a float64 ``[1, 1, H, W]`` tensor (the layout ``conv2d`` expects)
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    return torch.from_numpy(x).view(1, 1, *x.shape)


def tensor_to_numpy(x):
    """
    convert a ``[1, 1, H, W]`` (or any) tensor back to a 2-D float64 numpy array
    """
    ans = x.detach().cpu().numpy()
    return np.ascontiguousarray(ans.reshape(ans.shape[-2], ans.shape[-1]), dtype=np.float64)


def _edge_pad(img, pad_rows, pad_cols):
    # np.pad accepts pads larger than the image, torch's replicate padding does not on every version
    return np.pad(img, ((pad_rows, pad_rows), (pad_cols, pad_cols)), mode='edge')


def correlate2d(img, weights):
    """
    correlation of a 2-D image with an odd-sized 2-D mask, borders replicated.

    ``out[y, x] = sum_{i, j} weights[i, j] * padded[y + i, x + j]`` with the mask centred on ``(y, x)``.
    ``torch.nn.functional.conv2d`` computes exactly this (it does not flip the mask).

    :param np.ndarray img: ``[H, W]`` float image
    :param np.ndarray weights: ``[2r+1, 2r+1]`` mask
    :return: ``[H, W]`` float64 numpy array
    """
    weights = np.asarray(weights, dtype=np.float64)
    kr, kc = weights.shape[0] // 2, weights.shape[1] // 2
    padded = _edge_pad(np.asarray(img, dtype=np.float64), kr, kc)
    with torch.no_grad():
        out = F.conv2d(numpy_to_tensor(padded), numpy_to_tensor(weights))
    return tensor_to_numpy(out)


def separable_correlate2d(img, taps):
    """
    correlation with the rank-one mask ``outer(taps, taps)`` as two 1-D passes (rows then columns).

    same result as :py:func:`correlate2d` with ``np.outer(taps, taps)`` up to rounding, for
    ``2(2r+1)`` instead of ``(2r+1)^2`` multiplications per pixel.
    """
    taps = np.asarray(taps, dtype=np.float64)
    r = taps.shape[0] // 2
    padded = _edge_pad(np.asarray(img, dtype=np.float64), r, r)
    row_mask = numpy_to_tensor(taps.reshape(1, -1))
    col_mask = numpy_to_tensor(taps.reshape(-1, 1))
    with torch.no_grad():
        out = F.conv2d(numpy_to_tensor(padded), row_mask)
        out = F.conv2d(out, col_mask)
    return tensor_to_numpy(out)
