"""Walsh-Hadamard transform over {0,1}^k and the interaction coefficients.

The forward transform carries the ``2**-k`` normalisation::

    (F f)(t) = 2**-k * sum_sigma f(sigma) * (-1)**popcount(sigma & t)

so applying it twice returns ``2**-k`` times the input.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import chain_core
from ._config import check_k

__all__ = [
    "forward_transform",
    "inverse_transform",
    "interaction_coefficients",
    "trace_transform",
    "table_k",
    "LogTransform",
    "exact_log_transform",
]


def table_k(n: int) -> int:
    """Chain length of a table with ``n`` entries; ``n`` must be a power of two."""
    if n < 1 or n & (n - 1):
        raise ValueError(f"table length {n} is not a power of two")
    return n.bit_length() - 1


def _butterfly_float(values: np.ndarray) -> np.ndarray:
    x = np.array(values, dtype=np.float64)
    n = x.size
    h = 1
    while h < n:
        x = x.reshape(-1, 2, h)
        lo, hi = x[:, 0, :], x[:, 1, :]
        x = np.stack((lo + hi, lo - hi), axis=1).reshape(n)
        h *= 2
    return x


def _butterfly_int_rows(rows: np.ndarray) -> np.ndarray:
    """Unnormalised integer transform of every row of a 2-D int64 array."""
    x = np.array(rows, dtype=np.int64)
    m, n = x.shape
    h = 1
    while h < n:
        x = x.reshape(m, -1, 2, h)
        lo, hi = x[:, :, 0, :], x[:, :, 1, :]
        x = np.stack((lo + hi, lo - hi), axis=2).reshape(m, n)
        h *= 2
    return x


def _butterfly_exact(values: Sequence) -> list:
    x = list(values)
    n = len(x)
    h = 1
    while h < n:
        for start in range(0, n, 2 * h):
            for i in range(start, start + h):
                u, v = x[i], x[i + h]
                x[i], x[i + h] = u + v, u - v
        h *= 2
    return x


def forward_transform(table, exact: bool = False):
    """Normalised Walsh-Hadamard transform of a table over {0,1}^k.

    With ``exact=True`` the entries (ints or Fractions) are transformed without
    rounding and a list of Fractions is returned; otherwise a float64 array.
    """
    k = table_k(len(table))
    if exact:
        raw = _butterfly_exact([v if isinstance(v, Fraction) else int(v) for v in table])
        return [Fraction(v) / (1 << k) for v in raw]
    return _butterfly_float(table) / float(1 << k)


def inverse_transform(coefficients, exact: bool = False):
    """Undo :func:`forward_transform` (forward again, times ``2**k``)."""
    k = table_k(len(coefficients))
    out = forward_transform(coefficients, exact=exact)
    if exact:
        return [v * (1 << k) for v in out]
    return out * float(1 << k)


_ENSEMBLES = ("farey", "canonical", "grand", "constrained")


def _energy(k: int, which: str, n: int | None) -> np.ndarray:
    if which == "farey":
        return chain_core.energy_table(k)
    if which == "canonical":
        return np.log(chain_core.height_table(k).astype(np.float64))
    if which == "grand":
        return np.log(chain_core.grand_height_table(k).astype(np.float64))
    if which == "constrained":
        if n is None:
            raise ValueError("the constrained ensemble needs a block length n")
        return chain_core.energy_table(k, n)
    raise ValueError(f"unknown ensemble {which!r}; expected one of {_ENSEMBLES}")


def interaction_coefficients(k: int, which: str = "farey", n: int | None = None) -> np.ndarray:
    """Minus the transform of the energy table of the chosen ensemble.

    ``farey`` gives ``J_k``; ``canonical`` and ``grand`` use the logarithms of
    the canonical and grand canonical heights; ``constrained`` uses
    ``ln T_k^n`` and needs ``n``.
    """
    check_k(k)
    return -forward_transform(_energy(k, which, n))


def trace_transform(k: int, n: int | None = None) -> list[Fraction]:
    """Exact transform of the integer trace table (``T_k`` or ``T_k^n``)."""
    check_k(k)
    traces = chain_core.trace_table(k, n)
    return forward_transform([int(v) for v in traces], exact=True)


@dataclass(frozen=True)
class LogTransform:
    """Exact form of the transform of ``ln f`` for an integer-valued table ``f``.

    ``(F ln f)(t) = 2**-k * sum_i ln(values[i]) * coefficients[i, t]`` with
    integer ``coefficients``: row ``i`` is the unnormalised transform of the
    indicator of ``f == values[i]``.
    """

    k: int
    values: tuple[int, ...]
    coefficients: np.ndarray

    def evaluate(self) -> np.ndarray:
        logs = np.log(np.array(self.values, dtype=np.float64))
        return logs @ self.coefficients / float(1 << self.k)

    def rational_coefficient(self, value: int, t: int) -> Fraction:
        """Exact rational weight of ``ln(value)`` in the coefficient at ``t``."""
        i = self.values.index(value)
        return Fraction(int(self.coefficients[i, t]), 1 << self.k)

    def invariant_under(self, perm: np.ndarray) -> bool:
        """True when every coefficient row satisfies ``row[perm] == row`` exactly."""
        return bool(np.array_equal(self.coefficients[:, perm], self.coefficients))


def exact_log_transform(k: int, which: str = "farey", n: int | None = None) -> LogTransform:
    """Exact log-linear representation of ``F_k E`` for an integer energy base.

    ``which`` selects the integer table: ``farey`` (traces), ``canonical``,
    ``grand`` (heights) or ``constrained`` (needs ``n``). Minus
    :meth:`LogTransform.evaluate` equals :func:`interaction_coefficients`.
    """
    check_k(k)
    if which == "farey":
        base = chain_core.trace_table(k)
    elif which == "canonical":
        base = chain_core.height_table(k)
    elif which == "grand":
        base = chain_core.grand_height_table(k)
    elif which == "constrained":
        if n is None:
            raise ValueError("the constrained ensemble needs a block length n")
        base = chain_core.trace_table(k, n)
    else:
        raise ValueError(f"unknown ensemble {which!r}; expected one of {_ENSEMBLES}")
    values, inverse = np.unique(np.asarray(base, dtype=np.int64), return_inverse=True)
    indicator = np.zeros((values.size, base.size), dtype=np.int64)
    indicator[inverse, np.arange(base.size)] = 1
    coeffs = _butterfly_int_rows(indicator)
    coeffs.setflags(write=False)
    return LogTransform(k, tuple(int(v) for v in values), coeffs)
