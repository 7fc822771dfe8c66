"""Invariant suites run by ``fareychain verify``.

Each suite returns ``(ok, detail)``; :func:`run_all` yields one row per suite.
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import chain_core as cc
from . import numtheory as nt
from . import polymer as pm
from . import thermo as th
from . import walsh as wh

BETAS = (0.5, 1.0, 1.5, 2.0, 3.0, 4.0)


@dataclass
class SuiteResult:
    name: str
    ok: bool
    detail: str
    seconds: float


def _odd_mask(k: int) -> np.ndarray:
    return (np.bitwise_count(np.arange(1 << k, dtype=np.uint64)) & 1).astype(bool)


def matrices() -> tuple[bool, str]:
    for k in range(0, 11):
        for bits in range(1 << k):
            m = cc.build_matrix(cc.SpinConfiguration(k, bits))
            if m.det != 1 or min(m.a, m.b, m.c, m.d) < 0 or m.trace < 2:
                return False, f"bad product at k={k}, index={bits}"
    if cc.A @ cc.P != cc.P @ cc.B:
        return False, "AP != PB"
    for m in range(21):
        sm = cc.S ** m
        if cc.D @ sm @ cc.D != sm - cc.IDENTITY.scale(3 ** m + 1):
            return False, f"DS^mD identity fails at m={m}"
    for n in range(1, 8):
        if cc.N_matrix(n) != cc.ONES.scale(n + 1) + cc.D:
            return False, f"N identity fails at n={n}"
    return True, "det=1, entries>=0, trace>=2 (k<=10); DS^mD (m<=20); N (n<=7)"


def heights() -> tuple[bool, str]:
    for k in range(1, 13):
        t = cc.trace_table(k).astype(np.int64)
        h = cc.height_table(k)
        g = cc.grand_height_table(k)
        if np.any(t > g):
            return False, f"T_k > grand height at k={k}"
        if np.any(h[::-1] > (k + 1) * h) or np.any(g > (k + 2) * h):
            return False, f"height ratio bound fails at k={k}"
        hk1 = cc.height_table(k - 1)
        low = t[0::2]  # sigma_1 = 0, remaining sites form sigma in Gamma_{k-1}
        high = t[1::2][::-1]  # (1, 1 - sigma)
        if not np.array_equal(low, high) or np.any(low < hk1):
            return False, f"lower bound on T_k fails at k={k}"
        inner = t[1:-1]
        if k >= 2 and np.any(inner <= k):
            return False, f"T_k > k fails at k={k}"
    return True, "h^C <= T <= h^G-type bounds hold for k<=12"


def constrained() -> tuple[bool, str]:
    for k in range(1, 9):
        for n in range(1, 5):
            tau = ((1 << n) - 1) << 1
            full = cc.trace_table(k + n + 2)
            idx = tau | (np.arange(1 << k, dtype=np.int64) << (n + 2))
            if not np.array_equal(full[idx], cc.trace_table(k, n)):
                return False, f"constrained trace mismatch at k={k}, n={n}"
    return True, "T_k^n equals the concatenated trace (k<=8, n<=4)"


def symmetries() -> tuple[bool, str]:
    for k in range(2, 15):
        t = cc.trace_table(k)
        lt = wh.exact_log_transform(k)
        for which in ("shift", "mirror", "flip"):
            perm = cc.symmetry_permutation(k, which)
            if not np.array_equal(t[perm], t):
                return False, f"E_k not {which}-invariant at k={k}"
        for which in ("shift", "mirror"):
            if not lt.invariant_under(cc.symmetry_permutation(k, which)):
                return False, f"J_k not {which}-invariant at k={k}"
        odd = _odd_mask(k)
        if np.any(lt.coefficients[:, odd]) or np.any(wh.interaction_coefficients(k)[odd] != 0):
            return False, f"J_k(odd t) != 0 at k={k}"
        j = wh.trace_transform(k)
        if any(j[x] != 0 for x in np.flatnonzero(odd)):
            return False, f"j_k(odd t) != 0 at k={k}"
    return True, "shift/mirror/flip exact for k<=14"


def walsh_suite() -> tuple[bool, str]:
    rng = np.random.default_rng(7)
    for k in range(1, 11):
        f = rng.normal(size=1 << k)
        twice = wh.forward_transform(wh.forward_transform(f))
        if not np.allclose(twice, f / (1 << k), rtol=0, atol=1e-14):
            return False, f"involution fails at k={k}"
    for k in range(1, 15):
        e = cc.energy_table(k)
        if np.abs(wh.inverse_transform(wh.forward_transform(e)) - e).max() > 1e-12:
            return False, f"reconstruction fails at k={k}"
    for k in range(1, 17):
        if wh.trace_transform(k)[0] != pm.Fraction(3 ** k + 1, 2 ** k):
            return False, f"j_k(0) wrong at k={k}"
    for k in range(2, 13):
        jg = wh.interaction_coefficients(k, "grand")
        if jg[1:].min() < -1e-13:
            return False, f"grand interaction negative at k={k}"
    return True, "involution, reconstruction, j_k(0), grand positivity"


def polymer_suite() -> tuple[bool, str]:
    for k in range(2, 11):
        j = wh.trace_transform(k)
        covers = pm.polymer_model("farey", k).disjoint_sets()
        odd = _odd_mask(k)
        for t in range(1 << k):
            if odd[t]:
                continue
            if len(covers.get(t, [])) != 2:
                return False, f"not exactly two covers at k={k}, t={t}"
            if pm.trace_cover_sum(k, t) != j[t]:
                return False, f"cover-sum identity fails at k={k}, t={t}"
    for k in range(1, 11):
        for n in range(1, 5):
            j = wh.trace_transform(k, n)
            if any(pm.constrained_closed_form(k, n, t) != j[t] for t in range(1 << k)):
                return False, f"constrained closed form fails at k={k}, n={n}"
        for n in range(1, 4):
            fe = -wh.interaction_coefficients(k, "constrained", n)
            if fe[1:].max(initial=-1.0) > 1e-13:
                return False, f"constrained transform positive at k={k}, n={n}"
    for l in range(1, 7):
        complete = (l, list(itertools.combinations(range(l), 2)))
        want = (-1) ** (l - 1) * math.factorial(l - 1)
        if pm.ursell_factor(complete) != want or pm.ursell_bruteforce(complete) != want:
            return False, f"n(K_{l}) wrong"
    for model, k, n in (("farey", 4, None), ("grand", 5, None), ("constrained", 3, 1)):
        for term in pm.connected_multipolymers(model, k, 6, n):
            if (-1) ** (term.order - 1) * term.ursell < 0:
                return False, f"Ursell sign fails for {model} {term.members}"
    series = pm.cluster_series_interaction("farey", 2, 3, 30)
    if abs(series.value - 0.25 * math.log(9 / 4)) > 1e-8:
        return False, "cluster series for k=2, t=(1,1) off"
    return True, "cover sums, two covers, constrained closed form, Ursell signs, cluster series"


def thermo_suite() -> tuple[bool, str]:
    for k in range(2, 13):
        for beta in (0.5, 1.0, 2.0, 3.0):
            if abs(th.mean_magnetization(k, beta)) > 1e-12:
                return False, f"<m> != 0 at k={k}, beta={beta}"
    for k in range(2, 19):
        for beta in BETAS:
            if not th.free_energy_bounds(k, beta).holds(1e-12):
                return False, f"free-energy sandwich fails at k={k}, beta={beta}"
    for k in (4, 8, 12):
        for beta in (2.5, 3.0, 4.0):
            msq = th.mean_square_magnetization(k, beta)
            if not 2 * 2 ** -beta / th.partition_function(k, beta) <= msq + 1e-12 <= 1 + 2e-12:
                return False, f"<m^2> bound fails at k={k}, beta={beta}"
    for k in range(1, 9):
        for n in range(1, 4):
            for size in range(0, 4):
                for lam in itertools.combinations(range(1, k + 1), size):
                    for beta in (0.5, 1.0, 2.0, 4.0):
                        if th.conditional_expectation(k, n, lam, beta) < -1e-12:
                            return False, f"conditional GKS fails k={k} n={n} {lam} beta={beta}"
    for g in range(4, 19, 2):
        for beta in BETAS:
            r = th.event_probability_sum(g, beta, g - 3)
            if r.total > 0.5 + 1e-12:
                return False, f"event sum > 1/2 at g={g}, beta={beta}"
    for k in (4, 8, 12):
        u = [th.internal_energy(k, b) for b in np.arange(0.0, 6.01, 0.25)]
        if np.any(np.diff(u) >= 0):
            return False, f"U_k not decreasing at k={k}"
    return True, "<m>=0, sandwich, <m^2> bounds, GKS, events, U monotone"


def numtheory_suite() -> tuple[bool, str]:
    phi = nt.totient_sieve(5000)
    for n in (12, 36, 97, 360, 4999):
        if sum(phi[d] for d in range(1, n + 1) if n % d == 0) != n:
            return False, f"Gauss identity fails at n={n}"
    for k in range(1, 17):
        mult = nt.height_multiplicities(k)
        if mult.total != 1 << k:
            return False, f"multiplicities do not sum to 2^k at k={k}"
        for n, c in mult.counts.items():
            if c > phi[n] or (n <= k + 1 and c != phi[n]):
                return False, f"Phi_k(n) vs phi(n) fails at k={k}, n={n}"
        if any(n not in mult.counts for n in range(1, k + 2)):
            return False, f"missing small height at k={k}"
    for k in range(1, 15):
        for beta in (1.0, 2.5, 3.0):
            a = nt.canonical_partition_from_multiplicities(k, beta)
            b = th.partition_function(k, beta, "canonical")
            if abs(a - b) > 1e-12 * b:
                return False, f"Z^c mismatch at k={k}"
    for s in (1.5, 2.0, 3.0, 5.0, 10.0):
        rest = nt.zeta(s) - 1 - 2 ** -s
        if not 0 < rest < 3 ** -s * (s + 2) / (s - 1):
            return False, f"zeta tail band fails at s={s}"
    return True, "totients, Phi_k(n), Z^c identity, zeta band"


SUITES: dict[str, Callable[[], tuple[bool, str]]] = {
    "matrices": matrices,
    "heights": heights,
    "constrained": constrained,
    "symmetries": symmetries,
    "walsh": walsh_suite,
    "polymer": polymer_suite,
    "thermo": thermo_suite,
    "numtheory": numtheory_suite,
}


def run_all(names=None):
    for name in names or SUITES:
        start = time.perf_counter()
        try:
            ok, detail = SUITES[name]()
        except Exception as exc:  # a crash is a failed suite, not an aborted run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        yield SuiteResult(name, ok, detail, time.perf_counter() - start)
