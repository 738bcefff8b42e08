"""Badness functionals for systems of affine forms and Dani-type trajectory checks.

The product form ``||q||^n * ||Aq - b||_Z^m`` replaces ``c / ||q||^{n/m}`` so no
fractional powers appear; the two are equivalent through ``c -> c^m``.

Scans run on integers. Rational systems are put over a common denominator;
float systems are converted to fixed point with ``FIXED_POINT_BITS`` bits,
which keeps a scan over ``10^6`` values of ``q`` in the low seconds while
staying far more accurate than the 1e-9 float-mode tolerance.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import scalar as sc
from .lattice import FlowSchedule, apply_flow, closest_point, shortest_vector, system_lattice
from ._reduce import sup_norm

FIXED_POINT_BITS = 192

SINGULAR = "SINGULAR-UP-TO-SCALE"
NOT_SINGULAR = "NOT-SINGULAR-UP-TO-SCALE"


def dist_to_Z(x):
    """Sup-norm distance from ``x`` (scalar or vector) to the nearest integer vector."""
    if not isinstance(x, (list, tuple)):
        x = [x]
    x = sc.unify(x)
    return max(abs(v - sc.iround(v)) for v in x)


@dataclass(frozen=True)
class AffineSystem:
    """The pair ``<A, b>`` with ``A`` an ``m x n`` matrix and ``b`` in ``R^m``."""

    A: tuple
    b: tuple = None

    def __post_init__(self):
        rows = [list(r) for r in self.A]
        m, n = len(rows), len(rows[0])
        if any(len(r) != n for r in rows):
            raise ValueError("A must be rectangular")
        b = list(self.b) if self.b is not None else [0] * m
        if len(b) != m:
            raise ValueError(f"b must have {m} entries")
        vals = sc.unify([x for r in rows for x in r] + b)
        object.__setattr__(self, "A", tuple(tuple(vals[i * n:(i + 1) * n]) for i in range(m)))
        object.__setattr__(self, "b", tuple(vals[m * n:]))

    @property
    def m(self):
        return len(self.A)

    @property
    def n(self):
        return len(self.A[0])

    @property
    def k(self):
        return self.m + self.n

    @property
    def mode(self):
        return sc.mode_of([x for r in self.A for x in r] + list(self.b))

    def residual(self, q):
        """``Aq - b``."""
        return tuple(sum((a * x for a, x in zip(row, q)), start=bi * 0) - bi
                     for row, bi in zip(self.A, self.b))

    def lattice(self):
        return system_lattice(self.A, self.b)

    def with_b(self, b):
        return AffineSystem(self.A, b)

    def b_is_integral(self):
        return all(dist_to_Z(x) == 0 for x in self.b)


@dataclass
class BadnessEstimate:
    """Result of :func:`badness_scan`.

    ``window_minima`` holds ``((lo, hi), minimum, argmin)`` for the dyadic
    windows ``lo = 2^j <= ||q|| <= hi = min(2^{j+1} - 1, Q)``.
    """

    Q: int
    min_product: object
    argmin_q: tuple
    window_minima: list = field(default_factory=list)

    def tail_minimum(self, windows=3):
        """Smallest window minimum over the last ``windows`` windows (a liminf proxy)."""
        return min(w[1] for w in self.window_minima[-windows:])


class _FixedPoint:
    """Integer numerators over a common scale for fast ``||Aq - b||_Z`` scans."""

    def __init__(self, S):
        values = [x for r in S.A for x in r] + list(S.b)
        if S.mode == "rational":
            scale = math.lcm(*(Fraction(v).denominator for v in values))
            conv = lambda v: int(Fraction(v) * scale)
            self.exact = True
        else:
            scale = 1 << FIXED_POINT_BITS
            conv = lambda v: int(mpmath.nint(sc.to_mpf(v) * scale))
            self.exact = False
        self.scale = scale
        self.NA = [[conv(a) for a in row] for row in S.A]
        self.Nb = [conv(x) for x in S.b]
        self.m, self.n = S.m, S.n

    def dist(self, q):
        """Scaled ``||Aq - b||_Z`` as an integer in ``[0, scale/2]``."""
        S = self.scale
        best = 0
        for row, bi in zip(self.NA, self.Nb):
            r = (sum(a * x for a, x in zip(row, q)) - bi) % S
            d = min(r, S - r)
            if d > best:
                best = d
        return best

    def to_scalar(self, key):
        """Convert a scaled product ``||q||^n d^m`` back to a Scalar."""
        denom = self.scale ** self.m
        if self.exact:
            return Fraction(key, denom)
        return mpmath.mpf(key) / denom


def _q_by_shell(n, Q):
    """Nonzero ``q`` in ``[-Q, Q]^n`` by increasing sup norm; within a shell,
    lexicographically descending (so ``q = 1`` precedes ``q = -1``)."""
    if n == 1:
        for s in range(1, Q + 1):
            yield s, (s,)
            yield s, (-s,)
        return
    for s in range(1, Q + 1):
        shell = [q for q in itertools.product(range(-s, s + 1), repeat=n) if max(map(abs, q)) == s]
        shell.sort(reverse=True)
        for q in shell:
            yield s, q


def badness_scan(S, Q):
    """Exact minimum of ``||q||^n ||Aq - b||_Z^m`` over ``0 < ||q|| <= Q``.

    Ties keep the first minimizer in shell order (see ``_q_by_shell``), so
    results are reproducible bit for bit.
    """
    if Q < 1:
        raise ValueError("Q must be at least 1")
    fp = _FixedPoint(S)
    m, n = S.m, S.n
    if m == 1 and n == 1:
        return _badness_scan_1x1(fp, Q)
    best_key, best_q = None, None
    windows = []
    j = 0
    lo, hi = 1, min(1, Q)
    w_key, w_q = None, None
    for s, q in _q_by_shell(n, Q):
        if s > hi:
            windows.append(((lo, hi), w_key, w_q))
            j += 1
            lo, hi = 2 ** j, min(2 ** (j + 1) - 1, Q)
            w_key, w_q = None, None
        key = s ** n * fp.dist(q) ** m
        if w_key is None or key < w_key:
            w_key, w_q = key, q
        if best_key is None or key < best_key:
            best_key, best_q = key, q
    windows.append(((lo, hi), w_key, w_q))
    return BadnessEstimate(
        Q=Q,
        min_product=fp.to_scalar(best_key),
        argmin_q=best_q,
        window_minima=[(w, fp.to_scalar(kk), qq) for w, kk, qq in windows],
    )


def _badness_scan_1x1(fp, Q):
    # same result as the generic loop, inlined: this is the hot path
    a, b, M = fp.NA[0][0], fp.Nb[0], fp.scale
    half = M // 2
    best_key = best_q = None
    windows = []
    lo = 1
    while lo <= Q:
        hi = min(2 * lo - 1, Q)
        w_key = w_q = None
        for s in range(lo, hi + 1):
            r = (s * a - b) % M
            key = s * (r if r <= half else M - r)
            if w_key is None or key < w_key:
                w_key, w_q = key, s
            r = (-s * a - b) % M
            key = s * (r if r <= half else M - r)
            if key < w_key:
                w_key, w_q = key, -s
        windows.append(((lo, hi), w_key, (w_q,)))
        if best_key is None or w_key < best_key:
            best_key, best_q = w_key, (w_q,)
        lo *= 2
    return BadnessEstimate(
        Q=Q,
        min_product=fp.to_scalar(best_key),
        argmin_q=best_q,
        window_minima=[(w, fp.to_scalar(kk), qq) for w, kk, qq in windows],
    )


def is_singular_scan(S, eps_grid, N_grid):
    """Finite-scale singularity test for ``A`` (``b`` is ignored).

    For each ``(eps, N)`` looks for ``0 < ||q|| < N`` with
    ``||Aq||_Z <= eps / N^{n/m}`` (compared as ``||Aq||_Z^m N^n <= eps^m``).
    The verdict is ``SINGULAR-UP-TO-SCALE`` when every ``eps`` has witnesses
    for all ``N`` in the upper half of the grid. Returns ``(verdict, witnesses)``
    with ``witnesses[(eps, N)]`` a ``q`` or ``None``.
    """
    H = AffineSystem(S.A, [0] * S.m)
    fp = _FixedPoint(H)
    m, n = H.m, H.n
    Nmax = max(N_grid)
    # best (smallest) scaled distance among ||q|| <= s, for each s
    prefix, best_d, best_q = {}, None, None
    for s, q in _q_by_shell(n, Nmax - 1) if Nmax > 1 else []:
        d = fp.dist(q)
        if best_d is None or d < best_d:
            best_d, best_q = d, q
        prefix[s] = (best_d, best_q)
    witnesses = {}
    for eps in eps_grid:
        eps_s = sc.to_scalar(eps)
        for N in N_grid:
            entry = prefix.get(N - 1)
            hit = None
            if entry is not None:
                d, q = entry
                lhs = fp.to_scalar(d ** m) * N ** n
                if lhs <= sc.like(eps_s, lhs) ** m:
                    hit = q
            witnesses[(eps, N)] = hit
    large = sorted(N_grid)[len(N_grid) // 2:]
    singular = all(witnesses[(eps, N)] is not None for eps in eps_grid for N in large)
    return (SINGULAR if singular else NOT_SINGULAR), witnesses


@dataclass
class TrajectoryReport:
    """Sup distance to the origin of ``g^l L_A(b) Z^k`` for ``l = 0..L``.

    ``minima`` rows are ``(l, t, distance)`` with ``t = l * T``.
    """

    schedule: FlowSchedule
    minima: list
    homogeneous: bool = False

    @property
    def infimum(self):
        return min(d for _, _, d in self.minima)

    @property
    def trend(self):
        ds = [sc.to_float(d) for _, _, d in self.minima]
        if len(ds) < 4:
            return "short"
        head, tail = ds[: len(ds) // 4 or 1], ds[-(len(ds) // 4 or 1):]
        if max(tail) < 1e-3 * max(max(ds), 1e-300):
            return "to-zero"
        if min(tail) > 10 * max(head):
            return "diverging"
        return "bounded"

    def distance(self, ell):
        return self.minima[ell][2]


def trajectory_minima(S, F, L, exclude_origin=False):
    """Distances of the flowed affine lattices to the origin via exact CVP.

    ``exclude_origin`` switches to the shortest nonzero vector, which is the
    meaningful quantity when ``b`` is integral (the origin is then a lattice
    point at every step).
    """
    if L < 0:
        raise ValueError("L must be nonnegative")
    X = S.lattice()
    rows = []
    for ell in range(L + 1):
        Y = apply_flow(F, ell, X)
        if exclude_origin:
            d = sup_norm(shortest_vector(Y.lattice))
        else:
            d = sup_norm(closest_point(Y, [0] * Y.k))
        rows.append((ell, F.time(ell), d))
    return TrajectoryReport(F, rows, homogeneous=exclude_origin)


@dataclass
class DaniReport:
    min_product: object
    argmin_q: tuple
    trajectory_infimum: object
    lower_bound: object
    upper_bound: object
    scale_factor: object
    passed: bool
    notes: list = field(default_factory=list)

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


def dani_scale_factor(S, F):
    """Slack ``(1 + c)^2 u^{-n}`` with ``c = n`` (sup-norm bound of a shift by ``D``, ``||D|| <= 1``)."""
    c = S.n
    return (1 + c) ** 2 * F.u ** (-S.n)


def _root(x, k):
    if sc.is_exact(x):
        r = sc.sqrt(x) if k == 2 else None
        if r is not None and sc.is_exact(r):
            return r
    return sc.to_mpf(x) ** (mpmath.mpf(1) / k)


def dani_cross_check(S, F, L, Q, badness=None, trajectory=None):
    """Compare the scan ``min_product`` with the trajectory infimum at matching scales.

    Lower direction: a point of ``g^l L_A(b) Z^k`` coming from ``q`` has sup
    norm at least ``(||q||^n ||Aq - b||_Z^m)^{1/k}``, and ``q = 0`` points sit
    at ``u^{-n l} ||b||_Z``; so the infimum over steps whose minimizers are
    visible (``||q|| <= Q``) is bounded below by the smaller of the two.
    Upper direction: the scan minimizer, flowed to the first sampled step past
    its balancing time, has norm at most ``u^{-n} min_product^{1/k}``.
    Either bound may be missed by at most ``dani_scale_factor`` before the
    check FAILs. With ``min_product = 0`` both sides must degenerate together.
    """
    est = badness if badness is not None else badness_scan(S, Q)
    homogeneous = S.b_is_integral()
    traj = trajectory if trajectory is not None else trajectory_minima(S, F, L, exclude_origin=homogeneous)
    k = S.k
    fac = dani_scale_factor(S, F)
    notes = []
    P = est.min_product
    E, C = F.expand, F.contract

    visible = [(ell, d) for ell, _, d in traj.minima
               if sc.to_mpf(d) * sc.to_mpf(C) ** (-ell) <= Q]
    if len(visible) < len(traj.minima):
        notes.append(f"{len(traj.minima) - len(visible)} steps have minimizers beyond Q={Q}")
    traj_inf = traj.infimum
    vis_inf = min((d for _, d in visible), default=None)

    lower = _root(P, k)
    if not homogeneous:
        nb = dist_to_Z(list(S.b))
        q0 = min(nb * E ** ell for ell, _ in visible) if visible else nb
        lower = min(sc.to_mpf(lower), sc.to_mpf(q0)) if not (sc.is_exact(lower) and sc.is_exact(q0)) else min(lower, q0)
    passed = True
    if vis_inf is not None and sc.to_mpf(vis_inf) * sc.to_mpf(fac) < sc.to_mpf(lower) * (1 - 1e-12):
        passed = False
        notes.append("lower direction violated")

    upper = None
    s = max(abs(x) for x in est.argmin_q)
    a = dist_to_Z(list(S.residual(est.argmin_q)))
    if P == 0:
        # exact hit: that lattice point sits at s * C^l at step l
        upper = s * C ** L
        if sc.to_mpf(traj_inf) > sc.to_mpf(upper) * (1 + 1e-12):
            passed = False
            notes.append("min_product is 0 but trajectory stays away from 0")
        else:
            notes.append("degenerate: both sides tend to 0")
    else:
        ell_star = math.log(sc.to_float(s) / sc.to_float(a)) / math.log(sc.to_float(E / C))
        ell_c = max(0, math.ceil(ell_star - 1e-12))
        if ell_c <= L:
            upper = _root(P, k) * sc.to_mpf(E) if ell_c > 0 else max(sc.to_mpf(a), sc.to_mpf(s))
            upper = sc.to_mpf(upper)
            if sc.to_mpf(traj_inf) > upper * sc.to_mpf(fac) * (1 + 1e-12):
                passed = False
                notes.append("upper direction violated")
        else:
            notes.append("scan minimizer balances beyond the horizon L")
    return DaniReport(P, est.argmin_q, traj_inf, lower, upper, fac, passed, notes)
