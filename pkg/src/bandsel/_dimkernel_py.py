"""NumPy implementation of the moving-window lambda kernels.

Same contract as the compiled ``_dimkernel`` module; used when the
extension is not built or ``BANDSEL_PURE_PYTHON`` is set.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

EPS = 1e-12


def _ratio(sx, sy, dd, n, ny, rw):
    s = sx / (n * rw) + sy / (ny * rw)
    d = np.sqrt(dd) / rw
    small = s < EPS
    return np.where(small, np.where(d < EPS, 0.0, d / EPS), d / np.where(small, 1.0, s))


def _row_sum(a):
    # left-to-right over rows, matching the compiled loop order
    acc = np.zeros(a.shape[1:])
    for row in a:
        acc += row
    return acc


def _window_sq(dev, w):
    # (rows, m - w + 1) sums of squares, each accumulated left to right
    win = sliding_window_view(dev * dev, w, axis=-1)
    return np.cumsum(win, axis=-1)[..., -1]


def sweep_width(dx, dy, dmu, w, out):
    """Fill ``out[k]`` with lambda for the window ``[k, k + w)``."""
    m = dx.shape[1]
    if w < 1 or w > m:
        raise ValueError("window width out of range")
    if out.shape[0] != m - w + 1:
        raise ValueError("output length must be m - w + 1")
    sx = _row_sum(np.sqrt(_window_sq(dx, w)))
    sy = _row_sum(np.sqrt(_window_sq(dy, w)))
    dd = _window_sq(dmu[None, :], w)[0]
    out[:] = _ratio(sx, sy, dd, dx.shape[0], dy.shape[0], np.sqrt(w))


def dim_block(dx, dy, dmu, k_lo, k_hi, values):
    """Fill every DIM cell whose start lies in ``[k_lo, k_hi)``."""
    m = dx.shape[1]
    if values.shape[0] != m * (m + 1) // 2:
        raise ValueError("values must hold m(m+1)/2 cells")
    if k_lo < 0 or k_hi > m or k_lo > k_hi:
        raise ValueError("start range out of bounds")
    w = np.arange(1, m + 1)
    offsets = (w - 1) * (m + 1) - (w - 1) * w // 2
    for k in range(k_lo, k_hi):
        ax = np.cumsum(dx[:, k:] ** 2, axis=1)
        ay = np.cumsum(dy[:, k:] ** 2, axis=1)
        dd = np.cumsum(dmu[k:] ** 2)
        ww = w[: m - k]
        values[offsets[: m - k] + k] = _ratio(
            _row_sum(np.sqrt(ax)), _row_sum(np.sqrt(ay)), dd,
            dx.shape[0], dy.shape[0], np.sqrt(ww))
