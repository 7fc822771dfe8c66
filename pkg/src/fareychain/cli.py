"""Command-line front end.

Exit codes: 0 success, 1 a verification or inequality check failed, 2 usage
error (bad flags, size cap exceeded).
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
from contextlib import contextmanager

from . import chain_core, polymer, thermo, walsh
from ._config import SizeCapError, check_k, set_threads
from .polymer import OrderCapError

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
DEFAULT_BETAS = [0.25 * i for i in range(1, 17)]


def fmt(x: float) -> str:
    """Floats at 12 significant digits."""
    return f"{x:.12g}"


@contextmanager
def _output(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def _writer(fh):
    return csv.writer(fh, lineterminator="\n")


def _size(value: int, flag: str) -> int:
    try:
        return check_k(value)
    except SizeCapError as exc:
        raise _Usage(f"{flag} {value}: {exc}") from exc


def _note(msg: str) -> None:
    print(f"# {msg}", file=sys.stderr)


def cmd_verify(args) -> int:
    from . import verify

    names = args.suite or None
    failed = 0
    for res in verify.run_all(names):
        status = "PASS" if res.ok else "FAIL"
        print(f"{status}  {res.name:<12} {res.seconds:7.2f}s  {res.detail}")
        failed += not res.ok
    print(f"{'all suites green' if not failed else f'{failed} suite(s) failed'}")
    return EXIT_FAIL if failed else EXIT_OK


def cmd_interactions(args) -> int:
    k = _size(args.k, "--k")
    if args.ensemble == "constrained" and args.n is None:
        raise _Usage("--n is required for the constrained ensemble")
    coeffs = walsh.interaction_coefficients(k, args.ensemble, args.n)
    with _output(args.output) as fh:
        w = _writer(fh)
        w.writerow(["t_bits", "t_index", "weight", "J"])
        for t, value in enumerate(coeffs):
            w.writerow([chain_core.bitstring(t, k), t, bin(t).count("1"), fmt(value + 0.0)])
    # odd-weight t vanish by flip symmetry in the farey ensemble, so look at even t
    even = [t for t in range(1, len(coeffs)) if bin(t).count("1") % 2 == 0]
    if args.ensemble != "farey":
        even = list(range(1, len(coeffs)))
    if even:
        t_min = min(even, key=lambda t: coeffs[t])
        _note(f"min J(t) over t != 0 (ferromagnetic check, reported only): "
              f"{fmt(coeffs[t_min] + 0.0)} at t={chain_core.bitstring(t_min, k)}")
    return EXIT_OK


def cmd_cluster(args) -> int:
    k = _size(args.k, "--k")
    if not 0 <= args.t < (1 << k):
        raise _Usage(f"--t {args.t} out of range for k={k}")
    series = polymer.cluster_series_interaction(args.model, k, args.t, args.order, args.n)
    exact = polymer.exact_interaction(args.model, k, args.n)[args.t]
    with _output(args.output) as fh:
        w = _writer(fh)
        w.writerow(["order", "term", "partial_sum", "exact", "abs_error"])
        for order, (term, partial) in enumerate(zip(series.order_terms, series.partial_sums), 1):
            w.writerow([order, fmt(term), fmt(partial), fmt(exact), fmt(abs(partial - exact))])
    _note(f"tail estimate {fmt(series.tail_bound)}, converged={series.converged}")
    if series.sign_definite is False:
        _note("sign-definiteness violated")
        return EXIT_FAIL
    return EXIT_OK


def _k_schedule(args) -> list[int]:
    if args.ks:
        ks = args.ks
    else:
        ks = list(range(args.kstep, args.kmax + 1, args.kstep))
        if not ks or ks[-1] != args.kmax:
            ks.append(args.kmax)
    for k in ks:
        _size(k, "--ks" if args.ks else "--kmax")
    return ks


def cmd_sweep(args) -> int:
    if any(b <= 0 for b in args.betas):
        raise _Usage("--betas must be strictly positive")
    ks = _k_schedule(args)
    with _output(args.output) as fh:
        w = _writer(fh)
        w.writerow(["k", "beta", "Z", "F", "U", "msq"])
        for p in thermo.sweep(ks, args.betas):
            w.writerow([p.k, fmt(p.beta), fmt(p.Z), fmt(p.F), fmt(p.U), fmt(p.msq)])
    return EXIT_OK


def cmd_correlate(args) -> int:
    k = _size(args.k, "--k")
    profile = thermo.correlation_profile(k, args.beta)
    with _output(args.output) as fh:
        w = _writer(fh)
        w.writerow(["j", "s1sj"])
        for j, c in enumerate(profile, 1):
            w.writerow([j, fmt(c)])
    msq = thermo.mean_square_magnetization(k, args.beta)
    _note(f"<m^2>={fmt(msq)}, mean of profile={fmt(math.fsum(profile) / k)}")
    return EXIT_OK


def cmd_gks(args) -> int:
    k = _size(args.k, "--k")
    _size(k + args.n + 2, '--k + --n + 2 =')
    worst = math.inf
    with _output(args.output) as fh:
        w = _writer(fh)
        w.writerow(["Lambda", "size", "expectation"])
        for size in range(args.max_size + 1):
            for lam in itertools.combinations(range(1, k + 1), size):
                value = thermo.conditional_expectation(k, args.n, lam, args.beta)
                worst = min(worst, value)
                w.writerow([" ".join(map(str, lam)), size, fmt(value)])
    _note(f"minimum conditional expectation {fmt(worst)}")
    return EXIT_FAIL if worst < -1e-12 else EXIT_OK


def cmd_events(args) -> int:
    g = _size(args.g, "--g")
    nmax = args.nmax if args.nmax is not None else g - 3
    if not 1 <= nmax <= g - 3:
        raise _Usage(f"--nmax must be in 1..{g - 3}")
    report = thermo.event_probability_sum(g, args.beta, nmax)
    with _output(args.output) as fh:
        w = _writer(fh)
        w.writerow(["n", "probability", "cumulative"])
        for n, (p, c) in enumerate(zip(report.per_n, report.cumulative), 1):
            w.writerow([n, fmt(p), fmt(c)])
    found = thermo.smallest_nmax(report, args.eps)
    _note(f"total {fmt(report.total)} (<= 1/2 required); "
          f"smallest nmax reaching (1-eps)/2 with eps={args.eps}: {found if found else 'none'}")
    return EXIT_FAIL if report.total > 0.5 + 1e-12 else EXIT_OK


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fareychain", description=__doc__.splitlines()[0])
    parser.add_argument("--threads", type=int, default=1, help="worker threads (results do not depend on it)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("verify", help="run every invariant suite")
    p.add_argument("--suite", action="append", help="run only the named suite (repeatable)")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("interactions", help="CSV of interaction coefficients")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--ensemble", choices=["farey", "canonical", "grand", "constrained"], default="farey")
    p.add_argument("--n", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_interactions)

    p = sub.add_parser("cluster", help="cluster-series partial sums against the exact coefficient")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=int, required=True, help="group element as integer index")
    p.add_argument("--order", type=int, default=30)
    p.add_argument("--model", choices=["farey", "grand", "constrained"], default="farey")
    p.add_argument("--n", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("sweep", help="CSV of thermodynamic points")
    p.add_argument("--kmax", type=int, default=20)
    p.add_argument("--kstep", type=int, default=4)
    p.add_argument("--ks", type=int, nargs="+")
    p.add_argument("--betas", type=float, nargs="+", default=DEFAULT_BETAS)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("correlate", help="<s_1 s_j> profile")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_correlate)

    p = sub.add_parser("gks", help="conditional expectations given a frozen (0,1^n,0) block")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--max-size", type=int, default=3)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_gks)

    p = sub.add_parser("events", help="run-length event probabilities around site 1")
    p.add_argument("--g", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--nmax", type=int)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_events)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.threads < 1:
            raise _Usage("--threads must be >= 1")
        set_threads(args.threads)
        return args.func(args)
    except (_Usage, SizeCapError, OrderCapError, ValueError) as exc:
        print(f"fareychain {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
