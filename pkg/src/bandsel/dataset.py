"""Labeled spectra: class schema, CSV I/O, binary selection and synthesis."""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

DEFAULT_M = 512

ATOMIC_CODES = (
    "a2", "a3", "ab", "gl", "hb", "ly", "me", "mm",
    "no", "oa", "od", "pi", "pn", "ra", "sc",
)
COMPOSITES = {
    "G1": ("a2", "oa", "od"),  # low-grade gliomas
    "G2": ("gl", "me"),        # high-grade malignant
}
ECHO_TIMES = ("SET", "LET")


class DatasetError(ValueError):
    """Raised for malformed dataset files or invalid selections."""


def expand(code: str) -> tuple[str, ...]:
    """Return the atomic codes a class code stands for.

    Atomic codes expand to themselves, so ``expand`` is idempotent when
    applied element-wise to its own output.
    """
    if code in COMPOSITES:
        return COMPOSITES[code]
    if code in ATOMIC_CODES:
        return (code,)
    raise DatasetError(f"unknown class code {code!r}")


@dataclass(frozen=True)
class Spectrum:
    id: str
    label: str
    intensities: np.ndarray
    echo_time: str | None = None


@dataclass
class Dataset:
    """Ordered collection of equal-length spectra.

    Intensities are kept as one ``(n, m)`` float64 array; ``labels`` and
    ``ids`` are parallel lists.
    """

    ids: list[str]
    labels: list[str]
    X: np.ndarray
    echo_time: str | None = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(self.X, dtype=np.float64)
        if self.X.ndim != 2:
            raise DatasetError("intensities must be a 2-D array")
        n = self.X.shape[0]
        if len(self.ids) != n or len(self.labels) != n:
            raise DatasetError("ids/labels length does not match intensities")
        if len(set(self.ids)) != n:
            raise DatasetError("spectrum ids are not unique")
        for lab in self.labels:
            if lab not in ATOMIC_CODES:
                raise DatasetError(f"unknown class code {lab!r}")
        if not np.all(np.isfinite(self.X)):
            raise DatasetError("non-finite intensity value")
        if self.echo_time is not None and self.echo_time not in ECHO_TIMES:
            raise DatasetError(f"unknown echo time {self.echo_time!r}")

    @property
    def m(self) -> int:
        return self.X.shape[1]

    def __len__(self):
        return self.X.shape[0]

    def __getitem__(self, i) -> Spectrum:
        return Spectrum(self.ids[i], self.labels[i], self.X[i], self.echo_time)

    def subset(self, index) -> "Dataset":
        index = np.asarray(index, dtype=int)
        return Dataset(
            [self.ids[i] for i in index],
            [self.labels[i] for i in index],
            self.X[index],
            self.echo_time,
        )

    def class_counts(self) -> dict[str, int]:
        counts: dict[str, int] = {}
        for lab in self.labels:
            counts[lab] = counts.get(lab, 0) + 1
        return counts


@dataclass
class BinaryDataset:
    """Two-class view of a dataset: targets are -1 for ``class_a``, +1 for ``class_b``."""

    data: Dataset
    y: np.ndarray
    class_a: str
    class_b: str

    @property
    def X(self) -> np.ndarray:
        return self.data.X

    @property
    def m(self) -> int:
        return self.data.m

    def __len__(self):
        return len(self.data)

    def groups(self) -> tuple[np.ndarray, np.ndarray]:
        """Intensity rows of the -1 group and the +1 group."""
        return self.X[self.y < 0], self.X[self.y > 0]

    def subset(self, index) -> "BinaryDataset":
        index = np.asarray(index, dtype=int)
        return BinaryDataset(self.data.subset(index), self.y[index], self.class_a, self.class_b)


def echo_time_from_path(path) -> str | None:
    name = os.path.basename(str(path)).lower()
    if name.endswith("_set.csv"):
        return "SET"
    if name.endswith("_let.csv"):
        return "LET"
    return None


def load_dataset(path, echo_time: str | None = None, m: int | None = None) -> Dataset:
    """Read a dataset CSV (``id,label,v0,...,v{m-1}``).

    Parameters
    ----------
    path : str or path-like
        CSV file location.
    echo_time : {'SET', 'LET'}, optional
        Overrides the echo time inferred from a ``_set.csv``/``_let.csv``
        file-name suffix.
    m : int, optional
        Expected number of intensity columns. Defaults to the header width.

    Raises
    ------
    DatasetError
        On a malformed header or row; row numbers are 1-based data rows.
    """
    if echo_time is None:
        echo_time = echo_time_from_path(path)
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise DatasetError("empty dataset file")
    header = lines[0].rstrip().split(",")
    if len(header) < 3 or header[0] != "id" or header[1] != "label":
        raise DatasetError("header must start with 'id,label,v0'")
    width = len(header) - 2
    if header[2:] != [f"v{i}" for i in range(width)]:
        raise DatasetError("header value columns must be v0..v{m-1}")
    if m is not None and width != m:
        raise DatasetError(f"header has {width} value columns, expected {m}")

    ids, labels, rows = [], [], []
    for rownum, line in enumerate(lines[1:], start=1):
        fields = line.rstrip().split(",")
        if len(fields) != width + 2:
            raise DatasetError(f"wrong column count at row {rownum}")
        sid, label = fields[0], fields[1]
        if label not in ATOMIC_CODES:
            raise DatasetError(f"unknown class code {label!r} at row {rownum}")
        try:
            values = [float(v) for v in fields[2:]]
        except ValueError:
            raise DatasetError(f"malformed value at row {rownum}") from None
        if not all(math.isfinite(v) for v in values):
            raise DatasetError(f"non-finite value at row {rownum}")
        if sid in ids:
            raise DatasetError(f"duplicate id {sid!r} at row {rownum}")
        ids.append(sid)
        labels.append(label)
        rows.append(values)
    X = np.array(rows, dtype=np.float64).reshape(len(rows), width)
    return Dataset(ids, labels, X, echo_time)


def write_dataset(ds: Dataset, path) -> None:
    """Write ``ds`` in the CSV layout read by :func:`load_dataset`.

    Values use ``repr`` so a load/write cycle is lossless.
    """
    header = ["id", "label"] + [f"v{i}" for i in range(ds.m)]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for sid, lab, row in zip(ds.ids, ds.labels, ds.X):
            fh.write(",".join([sid, lab] + [repr(float(v)) for v in row]) + "\n")


def select_binary(ds: Dataset, class_a: str, class_b: str) -> BinaryDataset:
    """Keep the spectra of two (possibly composite) classes.

    Spectra belonging to ``class_a`` get target -1, ``class_b`` +1.
    """
    if class_a == class_b:
        raise DatasetError(f"identical classes {class_a!r} vs {class_b!r}")
    ea, eb = set(expand(class_a)), set(expand(class_b))
    if ea & eb:
        raise DatasetError(f"overlapping classes {class_a!r} and {class_b!r}")
    keep, y = [], []
    for i, lab in enumerate(ds.labels):
        if lab in ea:
            keep.append(i)
            y.append(-1.0)
        elif lab in eb:
            keep.append(i)
            y.append(1.0)
    y = np.array(y)
    if not np.any(y < 0):
        raise DatasetError(f"no spectra of class {class_a!r}")
    if not np.any(y > 0):
        raise DatasetError(f"no spectra of class {class_b!r}")
    return BinaryDataset(ds.subset(keep), y, class_a, class_b)


@dataclass
class SynthSpec:
    """Recipe for a Gaussian-line synthetic dataset.

    Each class ``c`` gets ``n_per_class[c]`` spectra whose noise-free shape
    is the sum of its peaks; ``peak_widths`` and ``peak_amplitudes`` are
    parallel to ``peak_centers[c]``.
    """

    n_per_class: Sequence[int]
    peak_centers: Sequence[Sequence[float]]
    peak_widths: Sequence[Sequence[float]]
    peak_amplitudes: Sequence[Sequence[float]]
    noise_sigma: float = 0.0
    seed: int = 0
    m: int = DEFAULT_M
    labels: Sequence[str] | None = None
    echo_time: str | None = None

    def __post_init__(self):
        k = len(self.n_per_class)
        if k < 1:
            raise DatasetError("at least one class required")
        if any(int(n) < 1 for n in self.n_per_class):
            raise DatasetError("class counts must be positive")
        if not (len(self.peak_centers) == len(self.peak_widths) == len(self.peak_amplitudes) == k):
            raise DatasetError("per-class peak lists must match the number of classes")
        for cs, ws, amps in zip(self.peak_centers, self.peak_widths, self.peak_amplitudes):
            if not len(cs) == len(ws) == len(amps):
                raise DatasetError("peak centers, widths and amplitudes differ in length")
            if any(not 0 <= c < self.m for c in cs):
                raise DatasetError("peak center outside signal")
            if any(w <= 0 for w in ws) or any(a <= 0 for a in amps):
                raise DatasetError("peak widths and amplitudes must be positive")
        if self.noise_sigma < 0:
            raise DatasetError("noise_sigma must be non-negative")
        if self.labels is None:
            if k > len(ATOMIC_CODES):
                raise DatasetError("too many classes for the atomic code list")
            self.labels = list(ATOMIC_CODES[:k])
        if len(self.labels) != k or len(set(self.labels)) != k:
            raise DatasetError("labels must be distinct, one per class")


def peak_sum(m: int, centers, widths, amplitudes) -> np.ndarray:
    t = np.arange(m, dtype=np.float64)
    out = np.zeros(m)
    for c, w, a in zip(centers, widths, amplitudes):
        out += a * np.exp(-((t - c) ** 2) / (2.0 * w * w))
    return out


def synthesize(spec: SynthSpec) -> Dataset:
    rng = np.random.default_rng(spec.seed)
    ids, labels, rows = [], [], []
    for c, n in enumerate(spec.n_per_class):
        clean = peak_sum(spec.m, spec.peak_centers[c], spec.peak_widths[c], spec.peak_amplitudes[c])
        noise = rng.normal(0.0, 1.0, size=(int(n), spec.m))
        lab = spec.labels[c]
        for i in range(int(n)):
            ids.append(f"{lab}_{i:04d}")
            labels.append(lab)
            if spec.noise_sigma > 0:
                rows.append(clean + spec.noise_sigma * noise[i])
            else:
                rows.append(clean.copy())
    return Dataset(ids, labels, np.array(rows), spec.echo_time)


# Shared "metabolite" lines as fractions of the signal length.
_BASE_PEAKS = ((0.04, 6.0, 3.0), (0.30, 3.0, 0.8), (0.42, 4.0, 1.2), (0.62, 3.0, 1.0), (0.72, 5.0, 0.6))


def band_spec(
    n_per_class: Sequence[int],
    band: tuple[int, int],
    amplitudes: Sequence[float] | None = None,
    noise_sigma: float = 0.2,
    seed: int = 0,
    m: int = DEFAULT_M,
    labels: Sequence[str] | None = None,
    base_peaks: bool = True,
) -> SynthSpec:
    """Build a :class:`SynthSpec` whose classes differ only inside ``band``.

    All classes share a fixed set of baseline peaks. Class ``c`` adds one
    extra line centred in ``band`` with amplitude ``amplitudes[c]``
    (``0`` means no extra line); the line width is a sixth of the band so
    the band edges are three widths from the centre.

    The default amplitudes are ``0, 1, 2, ...``.
    """
    lo, hi = band
    if not (0 <= lo < hi <= m):
        raise DatasetError("band outside signal")
    k = len(n_per_class)
    if amplitudes is None:
        amplitudes = [float(c) for c in range(k)]
    if len(amplitudes) != k:
        raise DatasetError("one band amplitude per class required")
    centre = 0.5 * (lo + hi - 1)
    width = max((hi - lo) / 6.0, 0.5)
    base = []
    if base_peaks:
        base = [(f * m, max(w * m / 512.0, 0.5), a) for f, w, a in _BASE_PEAKS]
    centers, widths, amps = [], [], []
    for a in amplitudes:
        peaks = list(base)
        if a > 0:
            peaks.append((centre, width, float(a)))
        centers.append([p[0] for p in peaks])
        widths.append([p[1] for p in peaks])
        amps.append([p[2] for p in peaks])
    return SynthSpec(
        n_per_class=list(n_per_class),
        peak_centers=centers,
        peak_widths=widths,
        peak_amplitudes=amps,
        noise_sigma=noise_sigma,
        seed=seed,
        m=m,
        labels=labels,
    )
