"""Abstract polymer models attached to the Farey chain.

Three instances are provided:

``farey``
    the loop ``p`` (support = whole cycle, activity ``3**-k``) and the arcs
    ``p_{l,r}``, ``l != r`` on Z/kZ, support walking cyclically from l to r,
    activity ``-3**-|supp|``.
``grand``
    only the arcs with ``l < r``.
``constrained``
    left rods ``p^L_m`` (support ``1..m``), right rods ``p^R_m`` (support
    ``m..k``), both with activity ``-3**-|supp| / (2(n+1))``, plus arcs with
    ``l < r``. Any two rods are incompatible.

For each model the sum over disjoint multipolymers reproduces the
corresponding trace-like weight::

    W(sigma) = prefactor * sum_{X disjoint} prod_{gamma in X} z(gamma) (-1)**(sigma . hat(gamma))

with prefactor ``(3/2)**k``, ``2 (3/2)**k`` and ``2 (n+1) (3/2)**k``
respectively (``T_k``, the grand height, ``T_k^n``).
"""

from __future__ import annotations

import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

from . import walsh
from ._config import check_k

__all__ = [
    "Polymer",
    "PolymerModel",
    "MultiPolymer",
    "OrderCapError",
    "ClusterTerm",
    "ClusterSeries",
    "polymer_model",
    "enumerate_polymers",
    "disjoint_covers",
    "trace_cover_sum",
    "trace_closed_form",
    "constrained_cover_sum",
    "constrained_closed_form",
    "ursell_factor",
    "ursell_bruteforce",
    "connected_multipolymers",
    "cluster_order_terms",
    "cluster_series_interaction",
]

URSELL_MAX_ORDER = 9
SERIES_MAX_ORDER = 40


class OrderCapError(ValueError):
    """Raised when a multipolymer is too large for exact Ursell evaluation."""


@dataclass(frozen=True)
class Polymer:
    kind: str  # "loop", "arc", "left", "right"
    k: int
    support: int  # bitmask, site i -> bit i-1
    hat: int  # group element, same bit convention
    activity: Fraction
    l: int = 0
    r: int = 0

    @property
    def is_rod(self) -> bool:
        return self.kind in ("left", "right")

    @property
    def size(self) -> int:
        return bin(self.support).count("1")

    @property
    def label(self) -> str:
        if self.kind == "loop":
            return "p"
        if self.kind == "arc":
            return f"p[{self.l},{self.r}]"
        return f"p{'L' if self.kind == 'left' else 'R'}[{self.l}]"

    def __repr__(self) -> str:
        return f"<{self.label} z={self.activity}>"


def incompatible(p: Polymer, q: Polymer) -> bool:
    return bool(p.support & q.support) or (p.is_rod and q.is_rod)


def _cyclic_support(l: int, r: int, k: int) -> int:
    mask, i = 0, l
    while True:
        mask |= 1 << (i - 1)
        if i == r:
            return mask
        i = i % k + 1


def _arcs(k: int, ordered_only: bool) -> list[Polymer]:
    out = []
    for l in range(1, k + 1):
        for r in range(1, k + 1):
            if l == r or (ordered_only and l > r):
                continue
            supp = _cyclic_support(l, r, k)
            size = bin(supp).count("1")
            out.append(
                Polymer("arc", k, supp, (1 << (l - 1)) | (1 << (r - 1)), -Fraction(1, 3 ** size), l, r)
            )
    return out


def enumerate_polymers(model: str, k: int, n: int | None = None) -> list[Polymer]:
    """Full polymer list of ``farey``, ``grand`` or ``constrained`` (needs ``n``)."""
    check_k(k)
    if model == "farey":
        if k < 2:
            raise ValueError("the farey polymer set needs k >= 2")
        full = (1 << k) - 1
        return [Polymer("loop", k, full, 0, Fraction(1, 3 ** k))] + _arcs(k, ordered_only=False)
    if model == "grand":
        return _arcs(k, ordered_only=True)
    if model == "constrained":
        if n is None or n < 1:
            raise ValueError("the constrained model needs a block length n >= 1")
        rods = []
        weight = Fraction(1, 2 * (n + 1))
        for m in range(1, k + 1):
            left = (1 << m) - 1
            right = ((1 << k) - 1) ^ ((1 << (m - 1)) - 1)
            rods.append(Polymer("left", k, left, 1 << (m - 1), -weight / 3 ** m, m))
            rods.append(Polymer("right", k, right, 1 << (m - 1), -weight / 3 ** (k - m + 1), m))
        return rods + _arcs(k, ordered_only=True)
    raise ValueError(f"unknown polymer model {model!r}; expected farey, grand or constrained")


@dataclass(frozen=True)
class MultiPolymer:
    """Ordered tuple of polymers together with its incompatibility graph."""

    polymers: tuple[Polymer, ...]

    def __len__(self) -> int:
        return len(self.polymers)

    @property
    def hat(self) -> int:
        h = 0
        for p in self.polymers:
            h ^= p.hat
        return h

    @property
    def activity(self) -> Fraction:
        z = Fraction(1)
        for p in self.polymers:
            z *= p.activity
        return z

    @property
    def edges(self) -> frozenset[tuple[int, int]]:
        ps = self.polymers
        return frozenset(
            (i, j)
            for i in range(len(ps))
            for j in range(i + 1, len(ps))
            if incompatible(ps[i], ps[j])
        )

    @property
    def adjacency(self) -> tuple[int, ...]:
        adj = [0] * len(self.polymers)
        for i, j in self.edges:
            adj[i] |= 1 << j
            adj[j] |= 1 << i
        return tuple(adj)

    @property
    def is_disjoint(self) -> bool:
        return not self.edges

    @property
    def is_connected(self) -> bool:
        return len(self.polymers) > 0 and _connected(self.adjacency)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(p.label for p in self.polymers)


@dataclass
class PolymerModel:
    name: str
    k: int
    n: int | None
    polymers: list[Polymer]
    prefactor: Fraction
    _disjoint: dict[int, list[MultiPolymer]] | None = field(default=None, repr=False)

    @property
    def log_prefactor(self) -> float:
        return math.log(self.prefactor)

    def incompatibility_matrix(self) -> np.ndarray:
        ps = self.polymers
        return np.array([[incompatible(p, q) for q in ps] for p in ps], dtype=bool)

    def disjoint_sets(self) -> dict[int, list[MultiPolymer]]:
        """All sets of pairwise compatible polymers, grouped by their hat."""
        if self._disjoint is None:
            groups: dict[int, list[MultiPolymer]] = defaultdict(list)
            ps = self.polymers

            def grow(start: int, used: int, rod: bool, chosen: list[Polymer]):
                groups[_xor_hats(chosen)].append(MultiPolymer(tuple(chosen)))
                for i in range(start, len(ps)):
                    p = ps[i]
                    if p.support & used or (rod and p.is_rod):
                        continue
                    chosen.append(p)
                    grow(i + 1, used | p.support, rod or p.is_rod, chosen)
                    chosen.pop()

            grow(0, 0, False, [])
            self._disjoint = dict(groups)
        return self._disjoint


def _xor_hats(ps: Iterable[Polymer]) -> int:
    h = 0
    for p in ps:
        h ^= p.hat
    return h


@lru_cache(maxsize=64)
def polymer_model(model: str, k: int, n: int | None = None) -> PolymerModel:
    polymers = enumerate_polymers(model, k, n)
    base = Fraction(3, 2) ** k
    if model == "farey":
        pref = base
    elif model == "grand":
        pref = 2 * base
    else:
        pref = 2 * (n + 1) * base
    return PolymerModel(model, k, n if model == "constrained" else None, polymers, pref)


def disjoint_covers(model: str, k: int, t: int, n: int | None = None) -> list[MultiPolymer]:
    """All disjoint multipolymers (as sets) whose hats add up to ``t``.

    For the farey model an odd-weight ``t`` has no cover and an empty list is
    returned.
    """
    if not 0 <= t < (1 << k):
        raise ValueError(f"group element {t} out of range for k={k}")
    return list(polymer_model(model, k, n).disjoint_sets().get(t, []))


def _disjoint_sum(model: str, k: int, t: int, n: int | None) -> Fraction:
    pm = polymer_model(model, k, n)
    return pm.prefactor * sum((x.activity for x in disjoint_covers(model, k, t, n)), Fraction(0))


def trace_cover_sum(k: int, t: int) -> Fraction:
    """``(3/2)**k`` times the activity sum over disjoint covers of ``t``."""
    if k > 14:
        raise ValueError("cover enumeration is limited to k <= 14")
    return _disjoint_sum("farey", k, t, None)


def constrained_cover_sum(k: int, n: int, t: int) -> Fraction:
    """``2(n+1)(3/2)**k`` times the constrained-model cover sum for ``t``."""
    return _disjoint_sum("constrained", k, t, n)


def trace_closed_form(k: int, t: int) -> Fraction:
    """Closed-form transform of the trace table at ``t``."""
    w = bin(t).count("1")
    if t == 0:
        return Fraction(3 ** k + 1, 2 ** k)
    if w % 2:
        return Fraction(0)
    bits = [(t >> i) & 1 for i in range(k)]
    last = max(i for i in range(k) if bits[i])
    # rotate cyclically so the final site carries a 1
    bits = bits[last + 1:] + bits[: last + 1]
    blocks, run = [], 0
    for b in bits:
        if b:
            blocks.append(run)
            run = 0
        else:
            run += 1
    dm1 = sum(blocks[0::2])
    dm2 = sum(blocks[1::2])
    pairs = len(blocks) // 2
    return Fraction((-1) ** pairs * (3 ** dm1 + 3 ** dm2), 2 ** k)


def _zero_blocks(t: int, k: int) -> list[int]:
    """Lengths ``m_1..m_u`` of the zero runs in ``(0_{m1},1,0_{m2},1,...,0_{mu})``."""
    blocks, run = [], 0
    for i in range(k):
        if (t >> i) & 1:
            blocks.append(run)
            run = 0
        else:
            run += 1
    blocks.append(run)
    return blocks


def constrained_closed_form(k: int, n: int, t: int) -> Fraction:
    """Transform of the constrained trace table at ``t`` in closed form."""
    if n < 1:
        raise ValueError("block length n must be >= 1")
    m = _zero_blocks(t, k)
    u = len(m)
    pref = 2 * (n + 1) * Fraction(3, 2) ** k
    if u % 2:
        prod = Fraction(1)
        for i in range(1, (u - 1) // 2 + 1):
            prod *= -Fraction(1, 3 ** (m[2 * i - 1] + 2))
        return pref * prod
    rod = Fraction(1, 2 * (n + 1))
    left = -rod / 3 ** (m[u - 1] + 1)
    right = -rod / 3 ** (m[0] + 1)
    for i in range(1, u // 2):
        left *= -Fraction(1, 3 ** (m[2 * i - 1] + 2))
        right *= -Fraction(1, 3 ** (m[2 * i] + 2))
    return pref * (left + right)


# --- Ursell coefficients ------------------------------------------------------


def _connected(adj: Sequence[int]) -> bool:
    n = len(adj)
    if n == 0:
        return False
    seen, frontier = 1, 1
    while frontier:
        nxt = 0
        f = frontier
        while f:
            low = f & -f
            nxt |= adj[low.bit_length() - 1]
            f ^= low
        frontier = nxt & ~seen
        seen |= nxt
    return seen == (1 << n) - 1


def _canonical(adj: Sequence[int]) -> tuple[int, ...]:
    n = len(adj)
    deg = [bin(a).count("1") for a in adj]
    order = sorted(range(n), key=lambda v: (-deg[v], v))
    pos = {v: i for i, v in enumerate(order)}
    out = []
    for v in order:
        a, m = adj[v], 0
        while a:
            low = a & -a
            m |= 1 << pos[low.bit_length() - 1]
            a ^= low
        out.append(m)
    return tuple(out)


def _drop_vertex(adj: Sequence[int], v: int) -> tuple[int, ...]:
    out = []
    lowmask = (1 << v) - 1
    for i, a in enumerate(adj):
        if i == v:
            continue
        out.append((a & lowmask) | ((a >> (v + 1)) << v))
    return tuple(out)


@lru_cache(maxsize=1 << 18)
def _ursell(adj: tuple[int, ...]) -> int:
    n = len(adj)
    if n == 1:
        return 1
    if not _connected(adj):
        return 0
    deg = [bin(a).count("1") for a in adj]
    m = sum(deg) // 2
    if m == n - 1:
        return (-1) ** (n - 1)
    if m == n * (n - 1) // 2:
        return (-1) ** (n - 1) * math.factorial(n - 1)
    for v in range(n):
        if deg[v] == 1:
            # a pendant edge must be used: factor -1
            return -_ursell(_canonical(_drop_vertex(adj, v)))
    u = 0
    v = (adj[u] & -adj[u]).bit_length() - 1
    deleted = list(adj)
    deleted[u] &= ~(1 << v)
    deleted[v] &= ~(1 << u)
    # contraction: v merges into u, parallel edges collapse to one
    merged = list(adj)
    merged[u] = (adj[u] | adj[v]) & ~((1 << u) | (1 << v))
    for w in range(n):
        if w not in (u, v) and (adj[v] >> w) & 1:
            merged[w] |= 1 << u
    contracted = _drop_vertex(merged, v)
    return _ursell(_canonical(deleted)) - _ursell(_canonical(contracted))


def _as_adjacency(graph) -> tuple[int, ...]:
    if isinstance(graph, MultiPolymer):
        return graph.adjacency
    nverts, edges = graph
    adj = [0] * nverts
    for i, j in edges:
        if i == j:
            raise ValueError("loops are not allowed in an incompatibility graph")
        adj[i] |= 1 << j
        adj[j] |= 1 << i
    return tuple(adj)


def ursell_factor(graph) -> int:
    """``n(G) = n_+ - n_-`` by deletion-contraction.

    ``graph`` is a :class:`MultiPolymer` or a pair ``(n_vertices, edges)``.
    """
    adj = _as_adjacency(graph)
    if not adj:
        raise ValueError("the Ursell factor needs at least one vertex")
    if len(adj) > URSELL_MAX_ORDER:
        raise OrderCapError(f"order {len(adj)} exceeds the cap {URSELL_MAX_ORDER}")
    return _ursell(_canonical(adj))


def ursell_bruteforce(graph) -> int:
    """Signed count of connected spanning subgraphs, by enumerating edge subsets."""
    adj = _as_adjacency(graph)
    n = len(adj)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n) if (adj[i] >> j) & 1]
    if len(edges) > 22:
        raise OrderCapError("too many edges for brute-force enumeration")
    total = 0
    for mask in range(1 << len(edges)):
        sub = [0] * n
        count = 0
        for e, (i, j) in enumerate(edges):
            if (mask >> e) & 1:
                sub[i] |= 1 << j
                sub[j] |= 1 << i
                count += 1
        if n == 1 or _connected(sub):
            total += -1 if count % 2 else 1
    return total


# --- connected clusters -------------------------------------------------------


@dataclass(frozen=True)
class ClusterTerm:
    """One multiset of polymers with its combined weight ``n(X) z^X / prod(m!)``.

    The weight already sums over all orderings of the multiset.
    """

    members: tuple[int, ...]  # sorted polymer indices, repeats allowed
    hat: int
    ursell: int
    activity: Fraction
    weight: Fraction

    @property
    def order(self) -> int:
        return len(self.members)


def connected_multipolymers(
    model: str, k: int, max_order: int, n: int | None = None, t: int | None = None
) -> list[ClusterTerm]:
    """Connected multisets of polymers up to ``max_order`` with their weights.

    Multisets are grown one incompatible polymer at a time and deduplicated
    by their sorted index tuple. Restrict to ``hat == t`` when ``t`` is given.
    """
    if max_order > URSELL_MAX_ORDER:
        raise OrderCapError(f"explicit enumeration is capped at order {URSELL_MAX_ORDER}")
    pm = polymer_model(model, k, n)
    ps = pm.polymers
    inc = pm.incompatibility_matrix()
    neighbours = [np.flatnonzero(inc[i]).tolist() for i in range(len(ps))]
    terms = []
    level = {(i,) for i in range(len(ps))}
    for order in range(1, max_order + 1):
        for members in sorted(level):
            x = MultiPolymer(tuple(ps[i] for i in members))
            hat = x.hat
            if t is not None and hat != t:
                continue
            nx = ursell_factor(x)
            mult = math.prod(math.factorial(c) for c in Counter(members).values())
            z = x.activity
            terms.append(ClusterTerm(members, hat, nx, z, nx * z / mult))
        if order == max_order:
            break
        nxt = set()
        for members in level:
            reach = set()
            for i in set(members):
                reach.update(neighbours[i])
            for j in reach:
                nxt.add(tuple(sorted(members + (j,))))
        level = nxt
    return terms


def _xor_convolve(a: np.ndarray, b: np.ndarray, xor_index: np.ndarray) -> np.ndarray:
    return b[xor_index] @ a


def cluster_order_terms(model: str, k: int, max_order: int, n: int | None = None) -> np.ndarray:
    """Order-by-order sums of the connected-cluster series for every group element.

    Row ``l - 1`` holds ``sum_{X connected, |X| = l, hat = t} n(X) z^X / l!``
    for all ``t``. These are the Taylor coefficients in the grading parameter
    of the logarithm of the polymer partition function over the group algebra,
    computed by the power-series log recurrence with XOR convolution.
    """
    if not 1 <= max_order <= SERIES_MAX_ORDER:
        raise ValueError(f"max_order must be in 1..{SERIES_MAX_ORDER}")
    pm = polymer_model(model, k, n)
    size = 1 << k
    q = np.zeros((max_order + 1, size))
    for hat, sets in pm.disjoint_sets().items():
        for x in sets:
            if 1 <= len(x) <= max_order:
                q[len(x), hat] += float(x.activity)
    idx = np.arange(size)
    xor_index = idx[:, None] ^ idx[None, :]
    c = np.zeros((max_order + 1, size))
    for order in range(1, max_order + 1):
        acc = order * q[order]
        for j in range(1, order):
            if q[order - j].any():
                acc = acc - j * _xor_convolve(c[j], q[order - j], xor_index)
        c[order] = acc / order
    return c[1:]


@dataclass(frozen=True)
class ClusterSeries:
    """Truncated cluster-series estimate of an interaction coefficient.

    ``value`` is minus the Fourier coefficient of the log-weight at ``t``:
    ``-delta_{t,0} ln(prefactor) - sum of connected clusters`` through
    ``max_order``. ``tail_bound`` is a geometric extrapolation from the last
    two nonzero order sums, not a proven bound.
    """

    model: str
    k: int
    t: int
    max_order: int
    value: float
    tail_bound: float
    converged: bool
    order_terms: tuple[float, ...]
    partial_sums: tuple[float, ...]  # interaction estimate after each order
    sign_definite: bool | None


def cluster_series_interaction(
    model: str, k: int, t: int, max_order: int, n: int | None = None
) -> ClusterSeries:
    pm = polymer_model(model, k, n)
    if not 0 <= t < (1 << k):
        raise ValueError(f"group element {t} out of range for k={k}")
    terms = cluster_order_terms(model, k, max_order, n)[:, t]
    offset = -pm.log_prefactor if t == 0 else 0.0
    partial = offset - np.cumsum(terms)
    nonzero = [abs(x) for x in terms if abs(x) > 0.0]
    if len(nonzero) >= 2:
        ratio = nonzero[-1] / nonzero[-2]
        converged = ratio < 1.0
        tail = nonzero[-1] * ratio / (1.0 - ratio) if converged else math.inf
    else:
        converged, tail = True, 0.0
    sign_definite = None
    if model in ("grand", "constrained"):
        # every activity is negative, so each cluster carries n(X) z^X <= 0
        scale = max((abs(x) for x in terms), default=0.0)
        sign_definite = bool(np.all(terms <= 1e-15 * max(scale, 1.0)))
    return ClusterSeries(
        model, k, t, max_order, float(partial[-1]), float(tail), converged,
        tuple(float(x) for x in terms), tuple(float(x) for x in partial), sign_definite,
    )


def exact_interaction(model: str, k: int, n: int | None = None) -> np.ndarray:
    """Interaction table of the model's ensemble, by direct transform."""
    which = {"farey": "farey", "grand": "grand", "constrained": "constrained"}[model]
    return walsh.interaction_coefficients(k, which, n)
