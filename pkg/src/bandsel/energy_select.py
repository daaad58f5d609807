"""Zone energies of the width-1 lambda profile and energy-ranked feature groups.

The frequency axis is split into three zones: ``Z1 = [0, z1_end)``
(acquisition and water artefacts), ``Z2 = [z1_end, z2_end)`` (metabolite
region) and ``Z3 = [z2_end, m)`` (noise tail). The standardized energy of a
zone is the mean squared lambda over it; ``Z3`` serves as the noise
reference that the other energies are divided by.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

DEFAULT_ZONES_512 = (120, 400)
_THRESHOLD_SLACK = 1e-12


class EnergyError(ValueError):
    pass


@dataclass(frozen=True)
class ZoneConfig:
    z1_end: int
    z2_end: int

    @classmethod
    def default(cls, m: int = 512) -> "ZoneConfig":
        """The 512-point defaults, rescaled proportionally for other lengths."""
        if m == 512:
            return cls(*DEFAULT_ZONES_512)
        z1 = max(1, round(DEFAULT_ZONES_512[0] * m / 512))
        z2 = max(z1 + 1, round(DEFAULT_ZONES_512[1] * m / 512))
        return cls(z1, z2)

    def validate(self, m: int) -> None:
        if not 0 < self.z1_end < self.z2_end < m:
            raise EnergyError(
                f"zones need 0 < z1_end < z2_end < m, got {self.z1_end}, {self.z2_end}, m={m}")

    def zones(self, m: int) -> tuple[range, range, range]:
        self.validate(m)
        return range(0, self.z1_end), range(self.z1_end, self.z2_end), range(self.z2_end, m)

    def eligible(self, include_z1: bool = True) -> range:
        """Indices that may enter the ranking."""
        return range(0 if include_z1 else self.z1_end, self.z2_end)


@dataclass(frozen=True)
class EnergyReport:
    e1: float
    e2: float
    e3: float
    r1: float
    r2: float
    zones: ZoneConfig

    def to_dict(self) -> dict:
        d = asdict(self)
        d["zones"] = {"z1_end": self.zones.z1_end, "z2_end": self.zones.z2_end}
        return d


@dataclass(frozen=True)
class FeatureGroup:
    percent: int
    indices: tuple[int, ...]
    group_energy_ratio: float

    @property
    def n_vars(self) -> int:
        return len(self.indices)


def zone_energy(lambdas, zone) -> float:
    """Mean of ``lambdas[n] ** 2`` over the indices in ``zone``."""
    vals = np.asarray(lambdas, dtype=np.float64)[np.asarray(zone, dtype=int)]
    if vals.size == 0:
        raise EnergyError("empty zone")
    return float(np.sum(vals * vals) / vals.size)


def energy_ratios(lambdas, zc: ZoneConfig) -> EnergyReport:
    lam = np.asarray(lambdas, dtype=np.float64)
    z1, z2, z3 = zc.zones(lam.size)
    e1, e2, e3 = zone_energy(lam, z1), zone_energy(lam, z2), zone_energy(lam, z3)
    if e3 == 0:
        raise EnergyError("noise-zone energy is zero")
    return EnergyReport(e1, e2, e3, e1 / e3, e2 / e3, zc)


def rank_variables(lambdas, zc: ZoneConfig, include_z1: bool = True) -> np.ndarray:
    """Eligible indices by descending lambda, ties by ascending index."""
    lam = np.asarray(lambdas, dtype=np.float64)
    zc.validate(lam.size)
    idx = np.asarray(zc.eligible(include_z1))
    # lexsort: last key is primary
    order = np.lexsort((idx, -lam[idx]))
    return idx[order]


def cumulative_groups(
    lambdas,
    zc: ZoneConfig,
    percents: Sequence[int] = tuple(range(1, 11)),
    include_z1: bool = True,
) -> list[FeatureGroup]:
    """Shortest ranking prefixes holding ``p`` percent of the eligible energy.

    Parameters
    ----------
    lambdas : array-like, shape (m,)
        Width-1 lambda profile.
    zc : ZoneConfig
    percents : sequence of int
        Strictly increasing values in ``1..100``.
    include_z1 : bool
        Whether artefact-zone indices may be selected.

    Returns
    -------
    list of FeatureGroup
        One per percent; each group's indices are a prefix of the next.
    """
    percents = [int(p) for p in percents]
    if not percents or any(p < 1 or p > 100 for p in percents):
        raise EnergyError("percents must lie in 1..100")
    if any(b <= a for a, b in zip(percents, percents[1:])):
        raise EnergyError("percents must be strictly increasing")
    lam = np.asarray(lambdas, dtype=np.float64)
    e3 = energy_ratios(lam, zc).e3
    ranking = rank_variables(lam, zc, include_z1)
    sq = lam[ranking] ** 2
    cum = np.cumsum(sq)
    total = cum[-1]
    if total <= 0:
        raise EnergyError("no discriminative energy")
    groups = []
    for p in percents:
        # relative slack so prefixes landing exactly on the threshold are
        # kept regardless of rounding (and of any uniform rescaling)
        threshold = p * total / 100.0 * (1.0 - _THRESHOLD_SLACK)
        size = int(np.searchsorted(cum, threshold, side="left")) + 1
        size = min(size, len(ranking))
        ratio = float(cum[size - 1] / size / e3)
        groups.append(FeatureGroup(p, tuple(int(i) for i in ranking[:size]), ratio))
    return groups


def write_groups_csv(groups: Sequence[FeatureGroup], path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("percent,n_vars,group_energy_ratio,indices\n")
        for g in groups:
            fh.write(f"{g.percent},{g.n_vars},{g.group_energy_ratio!r},{' '.join(map(str, g.indices))}\n")
