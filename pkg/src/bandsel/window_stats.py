"""Moving-window class separability and the Dissimilarity Index Matrix.

For two groups of spectra restricted to a window of width ``w``, the
separability ``lambda`` is the distance between the group centroids
divided by the summed mean within-group scatter, both measured with the
Euclidean norm and normalised by ``sqrt(w)``::

    scatter  = sum_i |x_i - mu_x| / (n sqrt(w)) + sum_j |y_j - mu_y| / (n_y sqrt(w))
    distance = |mu_x - mu_y| / sqrt(w)
    lambda   = distance / scatter

Large ``lambda`` means well separated classes over that window.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import _backend
from .dataset import BinaryDataset

EPS = 1e-12


def group_means(group_x, group_y):
    """Coordinate-wise means of the two groups (each ``(count, w)``)."""
    gx = np.atleast_2d(np.asarray(group_x, dtype=np.float64))
    gy = np.atleast_2d(np.asarray(group_y, dtype=np.float64))
    if gx.shape[0] < 1 or gy.shape[0] < 1:
        raise ValueError("both groups need at least one vector")
    if gx.shape[1] != gy.shape[1]:
        raise ValueError("group vectors differ in length")
    return gx.mean(axis=0), gy.mean(axis=0)


def lambda_ratio(group_x, group_y) -> float:
    """Separability of two groups of equal-length vectors.

    Parameters
    ----------
    group_x, group_y : array-like, shape (n, w) and (n_y, w)
        Window contents of the two classes.

    Returns
    -------
    float
        Non-negative, finite ratio. When the within-group scatter is below
        ``1e-12`` the result is ``0`` for coincident centroids and
        ``distance / 1e-12`` otherwise.
    """
    gx = np.atleast_2d(np.asarray(group_x, dtype=np.float64))
    gy = np.atleast_2d(np.asarray(group_y, dtype=np.float64))
    mx, my = group_means(gx, gy)
    rw = np.sqrt(gx.shape[1])
    scatter = (np.linalg.norm(gx - mx, axis=1).sum() / (gx.shape[0] * rw)
               + np.linalg.norm(gy - my, axis=1).sum() / (gy.shape[0] * rw))
    distance = np.linalg.norm(mx - my) / rw
    if scatter < EPS:
        return 0.0 if distance < EPS else float(distance / EPS)
    return float(distance / scatter)


def _deviations(bd: BinaryDataset):
    gx, gy = bd.groups()
    if len(gx) == 0 or len(gy) == 0:
        raise ValueError("both classes must be non-empty")
    mx, my = gx.mean(axis=0), gy.mean(axis=0)
    return (np.ascontiguousarray(gx - mx), np.ascontiguousarray(gy - my),
            np.ascontiguousarray(mx - my))


def _kernel(backend):
    if backend is None:
        return _backend.kernel
    return _backend.load(backend)[1]


def sweep_windows(bd: BinaryDataset, w: int, backend: str | None = None) -> np.ndarray:
    """Lambda for every window of width ``w``; entry ``k`` covers ``[k, k + w)``."""
    m = bd.m
    if not 1 <= w <= m:
        raise ValueError(f"window width {w} outside [1, {m}]")
    dx, dy, dmu = _deviations(bd)
    out = np.empty(m - w + 1)
    _kernel(backend).sweep_width(dx, dy, dmu, int(w), out)
    return out


def dim_offset(m: int, w: int) -> int:
    """Flat index of cell ``(k=0, w)`` in the width-major triangular layout."""
    return (w - 1) * (m + 1) - (w - 1) * w // 2


@dataclass
class DissimilarityIndexMatrix:
    """Lambda for every valid window ``(k, w)`` with ``k + w <= m``.

    ``values`` is flat and width-major: all ``k`` for ``w=1``, then all
    ``k`` for ``w=2`` and so on, ``m (m + 1) / 2`` cells in total.
    """

    m: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.m * (self.m + 1) // 2,):
            raise ValueError("values must hold m(m+1)/2 cells")

    def __getitem__(self, kw):
        k, w = kw
        if not (w >= 1 and k >= 0 and k + w <= self.m):
            raise IndexError(f"({k}, {w}) is outside the valid triangle")
        return self.values[dim_offset(self.m, w) + k]

    def row(self, w: int) -> np.ndarray:
        """All cells of width ``w`` (a view)."""
        start = dim_offset(self.m, w)
        return self.values[start:start + self.m - w + 1]

    def cells(self):
        """Yield ``(k, w, lambda)`` in ascending ``(w, k)`` order."""
        for w in range(1, self.m + 1):
            for k, lam in enumerate(self.row(w)):
                yield k, w, float(lam)

    def to_square(self) -> np.ndarray:
        """``(m, m)`` image with rows = width - 1, columns = start; invalid cells are NaN."""
        img = np.full((self.m, self.m), np.nan)
        for w in range(1, self.m + 1):
            img[w - 1, : self.m - w + 1] = self.row(w)
        return img


def _start_blocks(m: int, jobs: int):
    """Split starts ``0..m-1`` into contiguous blocks of roughly equal work."""
    n_blocks = max(1, min(m, 4 * jobs))
    # start k owns m - k cells; cut where cumulative work crosses equal shares
    work = np.cumsum(np.arange(m, 0, -1))
    cuts = np.searchsorted(work, work[-1] * np.arange(1, n_blocks) / n_blocks, side="right")
    edges = np.unique(np.concatenate([[0], cuts, [m]]))
    return list(zip(edges[:-1].tolist(), edges[1:].tolist()))


def build_dim(bd: BinaryDataset, jobs: int = 1, backend: str | None = None) -> DissimilarityIndexMatrix:
    """Compute the full Dissimilarity Index Matrix.

    Cells are produced start by start, extending each window one frequency
    at a time; the additions are the same ones a from-scratch sum over the
    window performs, so every cell equals ``sweep_windows(bd, w)[k]``.
    ``jobs > 1`` splits the starts across threads (the compiled kernel
    releases the GIL); cells are independent, so the result does not
    depend on ``jobs``.
    """
    m = bd.m
    dx, dy, dmu = _deviations(bd)
    kern = _kernel(backend)
    values = np.empty(m * (m + 1) // 2)

    def fill(block):
        kern.dim_block(dx, dy, dmu, block[0], block[1], values)

    blocks = _start_blocks(m, jobs)
    if jobs <= 1:
        for b in blocks:
            fill(b)
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(fill, blocks))
    return DissimilarityIndexMatrix(m, values)


def write_dim_csv(dim: DissimilarityIndexMatrix, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("k,w,lambda\n")
        for k, w, lam in dim.cells():
            fh.write(f"{k},{w},{lam!r}\n")


def read_dim_csv(path) -> DissimilarityIndexMatrix:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    n = data.shape[0]
    m = int(round((np.sqrt(8 * n + 1) - 1) / 2))
    if m * (m + 1) // 2 != n:
        raise ValueError("row count is not triangular")
    dim = DissimilarityIndexMatrix(m, np.empty(n))
    for k, w, lam in data:
        dim.values[dim_offset(m, int(w)) + int(k)] = lam
    return dim


def dim_to_pgm_bytes(dim: DissimilarityIndexMatrix) -> bytes:
    """8-bit binary PGM: rows are widths 1..m, columns starts 0..m-1.

    Valid cells are min-max scaled to 0..255; invalid cells are 0. A
    constant matrix renders entirely black.
    """
    m = dim.m
    lo, hi = float(dim.values.min()), float(dim.values.max())
    img = np.zeros((m, m), dtype=np.uint8)
    if hi > lo:
        for w in range(1, m + 1):
            scaled = (dim.row(w) - lo) / (hi - lo) * 255.0
            img[w - 1, : m - w + 1] = np.rint(scaled).astype(np.uint8)
    return f"P5\n{m} {m}\n255\n".encode("ascii") + img.tobytes()


def write_dim_pgm(dim: DissimilarityIndexMatrix, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dim_to_pgm_bytes(dim))
