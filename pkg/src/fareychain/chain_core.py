"""Configurations, transfer-matrix products, traces and heights.

Indexing convention used by every table in the package: site ``i`` (1-based)
of a configuration lives in bit ``i - 1`` of its integer index, so the
configuration ``(sigma_1, ..., sigma_k)`` has index ``sum(sigma_i << (i - 1))``.
A table over the configuration space of length ``k`` is a one-dimensional
array of length ``2**k`` addressed by that index.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from ._config import check_k, parallel_map

__all__ = [
    "SpinConfiguration",
    "Mat2",
    "IDENTITY",
    "A",
    "B",
    "S",
    "D",
    "P",
    "ONES",
    "N_matrix",
    "build_matrix",
    "trace_energy",
    "canonical_height",
    "grand_height",
    "constrained_trace",
    "symmetry_action",
    "trace_table",
    "energy_table",
    "height_table",
    "grand_height_table",
    "magnetization_table",
    "spin_table",
    "symmetry_permutation",
    "bitstring",
]


@dataclass(frozen=True)
class SpinConfiguration:
    """A word over {0,1} of length ``k`` stored as a k-bit index."""

    k: int
    bits: int

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if not 0 <= self.bits < (1 << self.k):
            raise ValueError(f"bits={self.bits} out of range for k={self.k}")

    @classmethod
    def from_sigma(cls, sigma: Iterable[int]) -> "SpinConfiguration":
        sigma = [int(s) for s in sigma]
        bits = 0
        for i, s in enumerate(sigma):
            if s not in (0, 1):
                raise ValueError(f"spin values must be 0 or 1, got {s}")
            bits |= s << i
        return cls(len(sigma), bits)

    @property
    def sigma(self) -> tuple[int, ...]:
        return tuple((self.bits >> i) & 1 for i in range(self.k))

    @property
    def spins(self) -> tuple[int, ...]:
        return tuple(1 - 2 * s for s in self.sigma)

    @property
    def magnetization(self) -> float:
        return sum(self.spins) / self.k

    def complement(self) -> "SpinConfiguration":
        return SpinConfiguration(self.k, self.bits ^ ((1 << self.k) - 1))

    def concat(self, other: "SpinConfiguration") -> "SpinConfiguration":
        """Configuration with ``self`` on the first sites and ``other`` after it."""
        return SpinConfiguration(self.k + other.k, self.bits | (other.bits << self.k))

    def __len__(self) -> int:
        return self.k

    def __str__(self) -> str:
        return bitstring(self.bits, self.k)


def bitstring(index: int, k: int) -> str:
    """Render an index as ``sigma_1 sigma_2 ... sigma_k`` (site order)."""
    return "".join(str((index >> i) & 1) for i in range(k))


def _as_config(sigma) -> SpinConfiguration:
    if isinstance(sigma, SpinConfiguration):
        return sigma
    return SpinConfiguration.from_sigma(sigma)


@dataclass(frozen=True)
class Mat2:
    """2x2 matrix ``[[a, b], [c, d]]`` with Python integer entries."""

    a: int
    b: int
    c: int
    d: int

    def __matmul__(self, o: "Mat2") -> "Mat2":
        return Mat2(
            self.a * o.a + self.b * o.c,
            self.a * o.b + self.b * o.d,
            self.c * o.a + self.d * o.c,
            self.c * o.b + self.d * o.d,
        )

    def __add__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a + o.a, self.b + o.b, self.c + o.c, self.d + o.d)

    def __sub__(self, o: "Mat2") -> "Mat2":
        return Mat2(self.a - o.a, self.b - o.b, self.c - o.c, self.d - o.d)

    def __neg__(self) -> "Mat2":
        return Mat2(-self.a, -self.b, -self.c, -self.d)

    def scale(self, s: int) -> "Mat2":
        return Mat2(s * self.a, s * self.b, s * self.c, s * self.d)

    def __pow__(self, n: int) -> "Mat2":
        if n < 0:
            raise ValueError("negative powers are not supported")
        result, base = IDENTITY, self
        while n:
            if n & 1:
                result = result @ base
            base = base @ base
            n >>= 1
        return result

    @property
    def trace(self) -> int:
        return self.a + self.d

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def T(self) -> "Mat2":
        return Mat2(self.a, self.c, self.b, self.d)

    def tolist(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]


IDENTITY = Mat2(1, 0, 0, 1)
A = Mat2(1, 0, 1, 1)
B = Mat2(1, 1, 0, 1)
S = A + B
D = A - B
P = Mat2(0, 1, 1, 0)
ONES = Mat2(1, 1, 1, 1)
_GEN = (A, B)


def N_matrix(n: int) -> Mat2:
    """``A B^n A``, the product contributed by the frozen block ``(0, 1^n, 0)``."""
    if n < 1:
        raise ValueError(f"block length n must be >= 1, got {n}")
    return A @ (B ** n) @ A


def build_matrix(sigma) -> Mat2:
    """Return ``M_k(sigma) = X(sigma_k) ... X(sigma_1)`` with X(0)=A, X(1)=B."""
    cfg = _as_config(sigma)
    check_k(cfg.k, allow_zero=True, table=False)
    m = IDENTITY
    for s in cfg.sigma:
        m = _GEN[s] @ m
    return m


def trace_energy(sigma) -> tuple[int, float]:
    """Exact trace of ``M_k(sigma)`` and its natural logarithm."""
    t = build_matrix(sigma).trace
    # math.log is correctly rounded on arbitrary-size ints (no float overflow)
    return t, math.log(t)


def _height_pair(sigma: Sequence[int]) -> tuple[int, int]:
    h, hbar = 1, 1
    for s in sigma:
        h, hbar = h + s * hbar, hbar + (1 - s) * h
    return h, hbar


def canonical_height(sigma) -> int:
    cfg = _as_config(sigma)
    check_k(cfg.k, allow_zero=True, table=False)
    return _height_pair(cfg.sigma)[0]


def grand_height(sigma) -> int:
    cfg = _as_config(sigma)
    check_k(cfg.k, allow_zero=True, table=False)
    return sum(_height_pair(cfg.sigma))


def constrained_trace(n: int, sigma) -> int:
    """Trace of ``M_k(sigma) N`` with ``N = A B^n A``.

    Equals the trace of the chain of length ``k + n + 2`` whose first ``n + 2``
    sites are frozen to ``(0, 1, ..., 1, 0)``.
    """
    return (build_matrix(sigma) @ N_matrix(n)).trace


def symmetry_action(sigma, which: str) -> SpinConfiguration:
    """Apply ``shift`` (site l takes the value of site l-1), ``mirror`` or ``flip``."""
    cfg = _as_config(sigma)
    k, x = cfg.k, cfg.bits
    if which == "shift":
        if k == 0:
            return cfg
        mask = (1 << k) - 1
        return SpinConfiguration(k, ((x << 1) & mask) | (x >> (k - 1)))
    if which == "mirror":
        return SpinConfiguration.from_sigma(reversed(cfg.sigma))
    if which == "flip":
        return cfg.complement()
    raise ValueError(f"unknown symmetry {which!r}; expected shift, mirror or flip")


# --- whole-table builders -------------------------------------------------

_LOW_BITS = 16
_INT64_SAFE = 1 << 62


def _fib(n: int) -> int:
    a, b = 0, 1
    for _ in range(n):
        a, b = b, a + b
    return a


def _product_arrays(k: int, right: Mat2, dtype):
    """Entries of ``M_k(sigma) @ right`` for every sigma, as four arrays."""
    a = np.array([right.a], dtype=dtype)
    b = np.array([right.b], dtype=dtype)
    c = np.array([right.c], dtype=dtype)
    d = np.array([right.d], dtype=dtype)
    for _ in range(k):
        # first half: A @ M, second half: B @ M
        ac, bd = a + c, b + d
        a, b, c, d = (
            np.concatenate((a, ac)),
            np.concatenate((b, bd)),
            np.concatenate((ac, c)),
            np.concatenate((bd, d)),
        )
    return a, b, c, d


def _prefix_matrix(high: int, nbits: int) -> Mat2:
    m = IDENTITY
    for i in range(nbits):
        m = _GEN[(high >> i) & 1] @ m
    return m


@lru_cache(maxsize=6)
def _trace_table(k: int, n: int | None) -> np.ndarray:
    right = IDENTITY if n is None else N_matrix(n)
    scale = max(abs(right.a), abs(right.b), abs(right.c), abs(right.d))
    # entries of a length-k word in A, B never exceed fib(k + 1)
    bound = 4 * _fib(k + 2) * scale
    dtype = np.int64 if bound < _INT64_SAFE else object
    low = min(k, _LOW_BITS)
    la, lb, lc, ld = _product_arrays(low, right, dtype)
    nhigh = k - low

    def chunk(high: int) -> np.ndarray:
        p = _prefix_matrix(high, nhigh)
        return p.a * la + p.b * lc + p.c * lb + p.d * ld

    parts = parallel_map(chunk, range(1 << nhigh))
    table = parts[0] if len(parts) == 1 else np.concatenate(parts)
    table.setflags(write=False)
    return table


def trace_table(k: int, n: int | None = None) -> np.ndarray:
    """Exact traces ``T_k`` (or constrained traces ``T_k^n``) for all configurations.

    Machine integers are used whenever the Fibonacci bound on the entries
    fits in int64; otherwise the table holds Python ints (object dtype).
    """
    check_k(k)
    if n is not None and n < 1:
        raise ValueError(f"block length n must be >= 1, got {n}")
    return _trace_table(int(k), None if n is None else int(n))


def _log_table(values: np.ndarray) -> np.ndarray:
    if values.dtype == object:
        out = np.array([math.log(v) for v in values], dtype=np.float64)
    else:
        out = np.log(values.astype(np.float64))
    out.setflags(write=False)
    return out


@lru_cache(maxsize=6)
def _energy_table(k: int, n: int | None) -> np.ndarray:
    return _log_table(_trace_table(k, n))


def energy_table(k: int, n: int | None = None) -> np.ndarray:
    """``E_k = ln T_k`` (or ``E_k^n = ln T_k^n``) as float64."""
    trace_table(k, n)
    return _energy_table(int(k), None if n is None else int(n))


@lru_cache(maxsize=4)
def _height_table(k: int) -> np.ndarray:
    h = np.ones(1, dtype=np.int64)
    for _ in range(k):
        # h_{j+1}(sigma, 1) = h_j(sigma) + h_j(1 - sigma); complement = reversed index
        h = np.concatenate((h, h + h[::-1]))
    h.setflags(write=False)
    return h


def height_table(k: int) -> np.ndarray:
    """Canonical heights for all configurations of length k."""
    check_k(k, allow_zero=True)
    return _height_table(int(k))


def grand_height_table(k: int) -> np.ndarray:
    h = height_table(k)
    g = h + h[::-1]
    g.setflags(write=False)
    return g


def spin_table(k: int, site: int) -> np.ndarray:
    """``s_site(sigma) = (-1)**sigma_site`` as int8 over all configurations."""
    if not 1 <= site <= k:
        raise ValueError(f"site {site} outside 1..{k}")
    idx = np.arange(1 << k, dtype=np.int64)
    return (1 - 2 * ((idx >> (site - 1)) & 1)).astype(np.int8)


def magnetization_table(k: int) -> np.ndarray:
    """Mean magnetization ``m_k(sigma)`` for all configurations."""
    check_k(k)
    idx = np.arange(1 << k, dtype=np.uint64)
    ones = np.bitwise_count(idx).astype(np.float64)
    return (k - 2.0 * ones) / k


def symmetry_permutation(k: int, which: str) -> np.ndarray:
    """Index array ``perm`` with ``perm[x] = index(action(x))``.

    For a table ``f``, ``f[perm]`` is the table of ``f`` composed with the action.
    """
    idx = np.arange(1 << k, dtype=np.int64)
    mask = (1 << k) - 1
    if which == "shift":
        return ((idx << 1) & mask) | (idx >> (k - 1))
    if which == "flip":
        return idx ^ mask
    if which == "mirror":
        out = np.zeros_like(idx)
        for i in range(k):
            out |= ((idx >> i) & 1) << (k - 1 - i)
        return out
    raise ValueError(f"unknown symmetry {which!r}; expected shift, mirror or flip")
