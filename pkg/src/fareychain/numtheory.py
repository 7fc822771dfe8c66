"""Euler totients, canonical height multiplicities and the real zeta function."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import chain_core

__all__ = [
    "TotientTable",
    "HeightMultiplicities",
    "totient_sieve",
    "height_multiplicities",
    "canonical_partition_from_multiplicities",
    "zeta",
    "totient_dirichlet_limit",
]


@dataclass(frozen=True)
class TotientTable:
    limit: int
    phi: np.ndarray  # phi[0] = 0, phi[n] = Euler totient of n

    def __getitem__(self, n: int) -> int:
        if not 1 <= n <= self.limit:
            raise IndexError(f"{n} outside 1..{self.limit}")
        return int(self.phi[n])


def totient_sieve(limit: int) -> TotientTable:
    if limit < 1:
        raise ValueError("sieve limit must be >= 1")
    phi = np.arange(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if phi[p] == p:  # untouched so far, hence prime
            phi[p::p] -= phi[p::p] // p
    phi.setflags(write=False)
    return TotientTable(limit, phi)


@dataclass(frozen=True)
class HeightMultiplicities:
    """Histogram of canonical heights for chain length ``k``.

    ``counts[n]`` is the number of configurations of canonical height ``n``;
    ``capped[n]`` counts configurations with ``max(height, k + 1) == n``.
    """

    k: int
    counts: dict[int, int]
    capped: dict[int, int]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def max_height(self) -> int:
        return max(self.counts)


def height_multiplicities(k: int) -> HeightMultiplicities:
    heights = chain_core.height_table(k)
    values, freq = np.unique(heights, return_counts=True)
    counts = {int(v): int(c) for v, c in zip(values, freq)}
    capped: dict[int, int] = {}
    floor = k + 1
    low = sum(c for v, c in counts.items() if v <= floor)
    if low:
        capped[floor] = low
    for v, c in counts.items():
        if v > floor:
            capped[v] = c
    return HeightMultiplicities(k, counts, capped)


def canonical_partition_from_multiplicities(k: int, beta: float) -> float:
    """``sum_n Phi_k(n) n**-beta`` from the height histogram."""
    mult = height_multiplicities(k)
    return math.fsum(c * float(n) ** -beta for n, c in mult.counts.items())


# B_2, B_4, B_6, B_8
_BERNOULLI = (1 / 6, -1 / 30, 1 / 42, -1 / 30)
_ZETA_TERMS = 64


def zeta(s: float) -> float:
    """Riemann zeta for real ``s > 1`` via Euler-Maclaurin summation."""
    s = float(s)
    if not s > 1.0 + 1e-3:
        raise ValueError(f"zeta(s) needs s > 1.001, got {s} (too close to the pole)")
    m = _ZETA_TERMS
    head = math.fsum(n ** -s for n in range(1, m))
    tail = m ** (1.0 - s) / (s - 1.0) + 0.5 * m ** -s
    rising = s  # s (s+1) ... (s+2j-2)
    for j, b in enumerate(_BERNOULLI, start=1):
        tail += b / math.factorial(2 * j) * rising * m ** (-s - 2 * j + 1)
        rising *= (s + 2 * j - 1) * (s + 2 * j)
    return head + tail


def totient_dirichlet_limit(beta: float) -> float:
    """``sum_n phi(n) n**-beta = zeta(beta-1)/zeta(beta)``; converges for beta > 2."""
    if not beta > 2.0 + 1e-3:
        raise ValueError(f"the totient Dirichlet series needs beta > 2, got {beta}")
    return zeta(beta - 1.0) / zeta(beta)
