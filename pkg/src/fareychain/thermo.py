"""Finite-size thermodynamics by exact enumeration.

Every Gibbs sum is taken over configuration-index order in fixed chunks of
``2**16`` entries: each chunk is reduced with numpy's pairwise sum and the
chunk partials are reduced the same way. The chunking does not depend on
the thread count, so results are bitwise reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import chain_core
from ._config import check_k, parallel_map

__all__ = [
    "ThermoPoint",
    "EnsembleBounds",
    "EventReport",
    "partition_function",
    "free_energy",
    "free_energy_bounds",
    "mean_magnetization",
    "mean_square_magnetization",
    "pair_correlation",
    "correlation_profile",
    "conditional_expectation",
    "event_probability_sum",
    "smallest_nmax",
    "internal_energy",
    "thermo_point",
    "sweep",
]

_CHUNK = 1 << 16
ENSEMBLES = ("farey", "canonical", "grand")


@lru_cache(maxsize=4)
def _log_heights(k: int, grand: bool) -> np.ndarray:
    h = chain_core.grand_height_table(k) if grand else chain_core.height_table(k)
    out = np.log(h.astype(np.float64))
    out.setflags(write=False)
    return out


def _energies(k: int, ensemble: str) -> np.ndarray:
    check_k(k)
    if ensemble == "farey":
        return chain_core.energy_table(k)
    if ensemble == "canonical":
        return _log_heights(k, False)
    if ensemble == "grand":
        return _log_heights(k, True)
    raise ValueError(f"unknown ensemble {ensemble!r}; expected one of {ENSEMBLES}")


def _gibbs_sums(energy: np.ndarray, beta: float, observables: Sequence[np.ndarray] = ()) -> list[float]:
    """``[sum w, sum w*o_1, ...]`` with ``w = exp(-beta * energy)``."""
    starts = range(0, energy.size, _CHUNK)

    def chunk(i: int) -> list[float]:
        w = np.exp(-beta * energy[i:i + _CHUNK])
        return [float(np.sum(w))] + [float(np.sum(w * o[i:i + _CHUNK])) for o in observables]

    parts = np.array(parallel_map(chunk, starts))
    return [float(np.sum(parts[:, j])) for j in range(parts.shape[1])]


def _check_beta(beta: float, strict: bool = False) -> float:
    beta = float(beta)
    if beta < 0 or (strict and beta == 0):
        raise ValueError(f"inverse temperature must be {'> 0' if strict else '>= 0'}, got {beta}")
    return beta


def partition_function(k: int, beta: float, ensemble: str = "farey") -> float:
    beta = _check_beta(beta)
    return _gibbs_sums(_energies(k, ensemble), beta)[0]


def free_energy(k: int, beta: float, ensemble: str = "farey") -> float:
    """Free energy density ``-ln Z / (beta k)``."""
    beta = _check_beta(beta, strict=True)
    return -math.log(partition_function(k, beta, ensemble)) / (beta * k)


@dataclass(frozen=True)
class EnsembleBounds:
    k: int
    beta: float
    F_farey: float
    F_canonical: float
    F_grand: float
    lower: float
    upper: float

    @property
    def sandwich_slack(self) -> tuple[float, float]:
        """``(F_farey - lower, upper - F_farey)``; both nonnegative when the bounds hold."""
        return self.F_farey - self.lower, self.upper - self.F_farey

    @property
    def grand_canonical_slack(self) -> tuple[float, float]:
        """``(F_G - F_C, F_C + ln(k+2)/k - F_G)``."""
        gap = self.F_grand - self.F_canonical
        return gap, math.log(self.k + 2) / self.k - gap

    def holds(self, tol: float = 1e-12) -> bool:
        return min(*self.sandwich_slack, *self.grand_canonical_slack) >= -tol


def free_energy_bounds(k: int, beta: float) -> EnsembleBounds:
    """Farey free energy with its canonical/grand canonical sandwich."""
    beta = _check_beta(beta, strict=True)
    fc = free_energy(k, beta, "canonical")
    ff = free_energy(k, beta, "farey")
    fg = free_energy(k, beta, "grand")
    lower = (k - 1) / k * fc - math.log(2) / (beta * k)
    return EnsembleBounds(k, beta, ff, fc, fg, lower, fg)


def _expectation(k: int, beta: float, observable: np.ndarray) -> float:
    z, num = _gibbs_sums(_energies(k, "farey"), _check_beta(beta), [observable])
    return num / z


def mean_magnetization(k: int, beta: float) -> float:
    return _expectation(k, beta, chain_core.magnetization_table(k))


def mean_square_magnetization(k: int, beta: float) -> float:
    m = chain_core.magnetization_table(k)
    return _expectation(k, beta, m * m)


def _parity_sign(k: int, mask: int) -> np.ndarray:
    idx = np.arange(1 << k, dtype=np.uint64)
    par = np.bitwise_count(idx & np.uint64(mask)) & 1
    return (1.0 - 2.0 * par).astype(np.float64)


def pair_correlation(k: int, beta: float, j: int) -> float:
    """``<s_1 s_j>`` in the Farey ensemble."""
    if not 1 <= j <= k:
        raise ValueError(f"site j={j} outside 1..{k}")
    if j == 1:
        return 1.0
    return _expectation(k, beta, _parity_sign(k, 1 | (1 << (j - 1))))


def correlation_profile(k: int, beta: float) -> list[float]:
    """``[<s_1 s_j> for j in 1..k]``."""
    return [pair_correlation(k, beta, j) for j in range(1, k + 1)]


def conditional_expectation(k: int, n: int, sites: Iterable[int], beta: float) -> float:
    """``<s_Lambda | first n+2 sites frozen to (0, 1^n, 0)>`` on a chain of k+n+2 sites.

    ``sites`` are labels ``1..k`` of the free block.
    """
    beta = _check_beta(beta)
    mask = 0
    for i in sites:
        if not 1 <= i <= k:
            raise ValueError(f"site {i} outside the free block 1..{k}")
        mask |= 1 << (i - 1)
    energy = chain_core.energy_table(k, n)
    if mask == 0:
        return 1.0
    z, num = _gibbs_sums(energy, beta, [_parity_sign(k, mask)])
    return num / z


@dataclass(frozen=True)
class EventReport:
    g: int
    beta: float
    total: float
    per_n: tuple[float, ...]  # per_n[i] = sum over shifts l of P(event with run length i+1)

    @property
    def cumulative(self) -> list[float]:
        return list(np.cumsum(self.per_n))


def event_probability_sum(g: int, beta: float, nmax: int) -> EventReport:
    """Probability that site 1 sits in a maximal run of 1-spins of length ``<= nmax``.

    The event for run length ``n`` and offset ``l`` freezes ``n + 2`` cyclic
    sites to ``(0, 1^n, 0)``; by shift invariance all ``n`` offsets carry the
    same probability, namely the constrained partition function on the other
    ``g - n - 2`` sites divided by ``Z_g``.
    """
    beta = _check_beta(beta)
    check_k(g)
    if not 1 <= nmax <= g - 3:
        raise ValueError(f"nmax must be in 1..g-3={g - 3}, got {nmax}")
    zg = partition_function(g, beta)
    per_n = []
    for n in range(1, nmax + 1):
        zn = _gibbs_sums(chain_core.energy_table(g - n - 2, n), beta)[0]
        per_n.append(n * zn / zg)
    return EventReport(g, beta, math.fsum(per_n), tuple(per_n))


def smallest_nmax(report: EventReport, eps: float) -> int | None:
    """Smallest ``nmax`` whose cumulative event probability reaches ``(1 - eps)/2``."""
    target = 0.5 * (1.0 - eps)
    for i, c in enumerate(report.cumulative, start=1):
        if c >= target:
            return i
    return None


def internal_energy(k: int, beta: float) -> float:
    """Gibbs mean of ``E_k / k``."""
    energy = _energies(k, "farey")
    z, num = _gibbs_sums(energy, _check_beta(beta), [energy])
    return num / (z * k)


@dataclass(frozen=True)
class ThermoPoint:
    beta: float
    k: int
    Z: float
    F: float
    U: float
    msq: float


def thermo_point(k: int, beta: float) -> ThermoPoint:
    beta = _check_beta(beta)
    energy = _energies(k, "farey")
    m = chain_core.magnetization_table(k)
    z, e_sum, m2_sum = _gibbs_sums(energy, beta, [energy, m * m])
    f = -math.log(z) / (beta * k) if beta > 0 else math.nan
    return ThermoPoint(beta, k, z, f, e_sum / (z * k), m2_sum / z)


def sweep(ks: Iterable[int], betas: Iterable[float]) -> list[ThermoPoint]:
    betas = list(betas)
    return [thermo_point(k, b) for k in ks for b in betas]
