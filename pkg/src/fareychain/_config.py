"""Runtime limits and worker settings shared by all modules."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

DEFAULT_K_MAX = 26
# bytes per configuration held simultaneously by the heaviest table builder
_BYTES_PER_SITE = 40


class SizeCapError(ValueError):
    """Raised when a chain length exceeds the configured cap."""


def k_max() -> int:
    raw = os.environ.get("FAREY_KMAX")
    if raw is None:
        return DEFAULT_K_MAX
    try:
        value = int(raw)
    except ValueError as exc:
        raise SizeCapError(f"FAREY_KMAX must be an integer, got {raw!r}") from exc
    if value < 1:
        raise SizeCapError(f"FAREY_KMAX must be positive, got {value}")
    return value


def _physical_memory() -> int | None:
    try:
        return os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError, AttributeError):
        return None


def check_k(k: int, *, allow_zero: bool = False, table: bool = True) -> int:
    """Validate a chain length against the cap and, for tables, the memory estimate."""
    k = int(k)
    lo = 0 if allow_zero else 1
    if k < lo:
        raise SizeCapError(f"chain length must be >= {lo}, got {k}")
    cap = k_max()
    if k > cap:
        raise SizeCapError(f"chain length {k} exceeds K_MAX={cap} (set FAREY_KMAX to raise it)")
    mem = _physical_memory() if table else None
    if table and mem is not None and _BYTES_PER_SITE * (1 << k) > mem:
        raise SizeCapError(
            f"chain length {k} needs about {_BYTES_PER_SITE << k} bytes, more than the "
            f"{mem} bytes of physical memory"
        )
    return k


_threads = max(1, int(os.environ.get("FAREY_THREADS", "1")))


def threads() -> int:
    return _threads


def set_threads(n: int) -> None:
    global _threads
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _threads = int(n)


def parallel_map(func, items):
    """Order-preserving map; the thread count never changes the result."""
    items = list(items)
    if _threads == 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=_threads) as pool:
        return list(pool.map(func, items))
