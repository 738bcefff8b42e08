"""White strategies. Bad_A and Bad_A^infinity fix A and let b vary; Bad^b fixes b and lets A vary.

Flow steps are absolute: a ball of radius ``u^{n s}`` is seen at step ``s``,
where one unit of particle displacement in the flowed lattice corresponds to
the ball radius. Dual vectors of ``L_A(0) Z^k`` are tracked by their integer
data ``(a, c)``: ``w0 = (a, c - A^T a)`` and ``w_s = (u^{ns} a, u^{-ms}(c - A^T a))``.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import scalar as sc
from ._reduce import l1_norm, sup_norm
from .diophantine import AffineSystem, badness_scan, dist_to_Z
from .exceptions import (
    BaseStrategyViolation,
    ConfigError,
    NotCase1,
    NotFound,
    StrategyBreakdown,
)
from .fractal import Slab, alpha_bound, avoid_hyperplanes, point_on_K_in_ball
from .game import Ball, Strategy, recenter, validate_move
from .lattice import (
    apply_flow,
    closest_point,
    coset_step,
    enumerate_small_hyperplanes,
    hyperplane,
    hyperplane_basis,
    pyramid_volume,
    shortest_dual_sq,
    shortest_vector,
    system_lattice,
)

ANY_MOVES_WIN = "ANY-MOVES-WIN"
DIVERGES = "DIVERGES"
BOUNDED = "BOUNDED"
NOT_APPLICABLE = "NOT-APPLICABLE"
CASE1_COVOLUME_SQ = Fraction(1, 9)


def alpha_for(decay, k):
    """Largest dyadic rational not above half of ``(4 (2 ceil(sqrt k) C)^{1/eta})^{-1}``."""
    half = sc.to_mpf(alpha_bound(decay, k)) / 2
    e = 0
    while mpmath.mpf(2) ** -e > half:
        e += 1
    return Fraction(1, 2 ** e)


def _xi(k):
    return math.isqrt(k - 1) + 1 if k > 1 else 1


def flow_offset(u, n, rho1):
    """``j`` with ``rho1 = u^{n j}``; ConfigError when ``rho1`` is off the flow grid."""
    rho1 = sc.to_scalar(rho1)
    base = u ** n
    j, r = 0, Fraction(1)
    while r > rho1:
        r *= base
        j += 1
    if r != rho1:
        raise ConfigError("initial", f"radius {sc.format_scalar(rho1)} is not u^(n j) for u = {u}")
    return j


# --- dual-vector bookkeeping ---------------------------------------------


@dataclass(frozen=True)
class DualKey:
    """Integer data ``(a, c)`` of ``w0 = (a, c - A^T a)``."""

    a: tuple
    c: tuple


class DualFrame:
    def __init__(self, A, schedule):
        self.A = sc.unify_matrix(A)
        self.m, self.n = len(self.A), len(self.A[0])
        self.F = schedule
        self.exact = all(sc.is_exact(x) for r in self.A for x in r)

    def w0(self, key):
        At_a = [sum(self.A[i][j] * key.a[i] for i in range(self.m)) for j in range(self.n)]
        return tuple(Fraction(x) for x in key.a) + tuple(cj - x for cj, x in zip(key.c, At_a))

    def w(self, key, s):
        return self.F.apply_dual(s, self.w0(key))

    def norm_sq(self, key, s):
        return sum(x * x for x in self.w(key, s))

    def key_of(self, w_s, s):
        w0 = self.F.apply_dual(-s, w_s)
        a = tuple(sc.iround(x) for x in w0[:self.m])
        At_a = [sum(self.A[i][j] * a[i] for i in range(self.m)) for j in range(self.n)]
        c = tuple(sc.iround(x + y) for x, y in zip(w0[self.m:], At_a))
        ints = a + c
        first = next(x for x in ints if x)
        if first < 0:
            a, c = tuple(-x for x in a), tuple(-x for x in c)
        return DualKey(a, c)

    def small_keys(self, s):
        L = apply_flow(self.F, s, system_lattice(self.A).lattice)
        return [self.key_of(H.dual_vector, s) for H in enumerate_small_hyperplanes(L)]

    def is_small(self, key, s):
        k = self.m + self.n
        return self.norm_sq(key, s) <= k

    def persistence(self, key, s, horizon):
        count = 0
        while count <= horizon and self.is_small(key, s + count):
            count += 1
        return count

    def last_small(self, key, s, cap=4096):
        """Last step ``>= s`` where ``key`` stays small; ``None`` when it never leaves (time part zero)."""
        if self.exact and all(x == 0 for x in self.w0(key)[self.m:]):
            return None
        t = s
        while t - s < cap and self.is_small(key, t + 1):
            t += 1
        return t


@dataclass
class ProtectionEntry:
    """Certified ``||y||_sup >= kappa / ||w_t||_1`` for every lattice point ``y`` at steps ``t`` in ``[start, end]``."""

    key: DualKey
    start: int
    end: object
    kappa: object
    planes: int
    proof_bound: float = None

    def covers(self, t):
        return t >= self.start and (self.end is None or t <= self.end)

    def bound(self, frame, t):
        if self.kappa <= 0:
            return 0
        kappa, norm = sc.unify([self.kappa, l1_norm(frame.w(self.key, t))])
        return kappa / norm

    def to_dict(self):
        return {"a": list(self.key.a), "c": list(self.key.c), "start": self.start, "end": self.end,
                "kappa": sc.format_scalar(self.kappa), "planes": self.planes,
                "proof_bound": self.proof_bound}


def _coset_planes(frame, key, center, rho, s, alpha, widen):
    """Particle-space traces ``{b : <b, a> = z}`` of the cosets near the unit ball."""
    a = [Fraction(x) for x in key.a]
    if not any(a):
        return []
    ws = frame.w(key, s)
    reach = sc.sqrt(sum(x * x for x in ws))
    if widen:
        reach = sc.to_mpf(reach) + sc.to_mpf(rho * (1 - alpha) * l1_norm(a))
    val = sum(x * c for x, c in zip(a, center))
    lo, hi = sc.iceil(sc.to_mpf(val) - sc.to_mpf(reach)), sc.ifloor(sc.to_mpf(val) + sc.to_mpf(reach))
    eps = 2 * alpha * rho
    return [Slab(tuple(a), Fraction(z), eps) for z in range(lo, hi + 1)]


def _kappa(key, center, alpha, rho):
    a = key.a
    return dist_to_Z(sum(x * c for x, c in zip(a, center))) - alpha * rho * sum(abs(x) for x in a)


def _proof_bound(frame, key, s, alpha):
    """``xi0 e^{-T/m} alpha delta / |g_t H|`` with ``delta`` realized from a pyramid volume."""
    k = frame.m + frame.n
    L = apply_flow(frame.F, s, system_lattice(frame.A).lattice)
    H = hyperplane(L, frame.w(key, s))
    basis = hyperplane_basis(H, L)
    cov = sc.to_mpf(sc.sqrt(H.covolume_sq))
    delta = 0
    for i in range(frame.m):
        e = [0] * k
        e[i] = 1
        try:
            delta = max(delta, sc.to_mpf(pyramid_volume(basis, e)) / cov)
        except Exception:
            continue
    return float(mpmath.sqrt(k) * sc.to_mpf(frame.F.u ** frame.n) * sc.to_mpf(alpha) * delta / cov)


# --- Case 1 ---------------------------------------------------------------


def find_case1_key(A, box=None):
    """Primitive ``a`` with ``A^T a`` integral (a time-free dual vector), smallest norm first."""
    rows = sc.unify_matrix(A)
    if not all(sc.is_exact(x) for r in rows for x in r):
        raise NotCase1("Case 1 detection needs a rational A")
    m, n = len(rows), len(rows[0])
    den = 1
    for r in rows:
        for x in r:
            den = den * x.denominator // math.gcd(den, x.denominator)
    box = den if box is None else box
    best = None
    ranges = [range(-box, box + 1)] * m
    stack = [()]
    for rg in ranges:
        stack = [p + (v,) for p in stack for v in rg]
    for a in stack:
        if not any(a) or next(x for x in a if x) < 0:
            continue
        At_a = [sum(rows[i][j] * a[i] for i in range(m)) for j in range(n)]
        if all(x.denominator == 1 for x in At_a) and math.gcd(*a, *(int(x) for x in At_a)) == 1:
            key = (sum(x * x for x in a), a)
            if best is None or key < best[0]:
                best = (key, DualKey(a, tuple(int(x) for x in At_a)))
    if best is None:
        raise NotCase1(f"no time-free dual vector with coefficients in [-{box}, {box}]")
    return best[1]


def case1_certificate(A, key, b):
    """Pyramid volume spanned by ``H ∩ L_A(0)Z^k`` and the nearest translate of ``(b, 0)``."""
    L = system_lattice(A).lattice
    m = len(key.a)
    w0 = tuple(Fraction(x) for x in key.a) + (Fraction(0),) * (L.k - m)
    H = hyperplane(L, w0)
    basis = hyperplane_basis(H, L)
    v = coset_step(H, L)
    val = sum(x * y for x, y in zip(key.a, b))
    z = sc.iround(val)
    vec = [x - z * y for x, y in zip(list(b) + [0] * (L.k - m), v)]
    return pyramid_volume(basis, vec)


# --- Bad_A ----------------------------------------------------------------


@dataclass
class BadAState:
    A: list
    schedule: object
    offset: int
    alpha: object
    lookahead: int = 20
    J: int = 0
    tracked: dict = field(default_factory=dict)  # key -> [first small step, still small, handled]
    ledger: list = field(default_factory=list)
    missed: list = field(default_factory=list)
    case: int = 2
    case1_key: object = None
    case1_done: bool = False
    certificate: object = None
    frame: object = None

    def __post_init__(self):
        self.frame = DualFrame(self.A, self.schedule)

    @property
    def m(self):
        return self.frame.m

    @property
    def k(self):
        return self.frame.m + self.frame.n

    def step_of(self, J):
        return self.offset + J - 1

    def c0(self):
        """``(kappa / ||a||_1)^m`` from a time-free protected hyperplane, else ``None``."""
        vals = [e.kappa / sum(abs(x) for x in e.key.a) for e in self.ledger
                if e.kappa > 0 and any(e.key.a) and _time_free(self.frame, e.key)]
        return max(vals) ** self.m if vals else None


def _time_free(frame, key):
    return all(x == 0 for x in frame.w0(key)[frame.m:])


def _rank(state, candidates, s):
    """Most persistent first, ties broken lexicographically."""
    def score(key):
        return (-state.frame.persistence(key, s, state.lookahead), key.a + key.c)
    return sorted(candidates, key=score)


def _avoid(state, K, decay, ball, planes):
    try:
        return avoid_hyperplanes(K, decay, ball.center, ball.radius, state.alpha, planes, k=state.k)
    except NotFound as exc:
        raise StrategyBreakdown(f"avoidance failed: {exc.violated}") from exc


def _protect(state, key, center, rho, s, nplanes):
    kappa = _kappa(key, center, state.alpha, rho)
    end = state.frame.last_small(key, s)
    try:
        pb = _proof_bound(state.frame, key, s, state.alpha)
    except Exception:
        pb = None
    state.ledger.append(ProtectionEntry(key, s, end, kappa, nplanes, pb))


def badA_step(state, B_J, K, decay):
    """One White move of the Bad_A strategy (Case 2 mechanism).

    Newly small hyperplanes (small now, big one step earlier; at the first
    move every small one counts) join a pending queue. Pending ones still
    small are handled, most persistent first and as many as the plane cap
    allows, by pushing the center off the particle-space traces of their
    cosets near the unit ball.
    """
    state.J += 1
    s = state.step_of(state.J)
    rho = B_J.radius
    if rho != state.schedule.u ** (state.schedule.n * s):
        raise StrategyBreakdown(f"ball radius {sc.format_scalar(rho)} off the flow grid at step {s}")
    fr = state.frame
    small = set(fr.small_keys(s))
    for key in small:
        if key not in state.tracked:
            newly = state.J == 1 or not fr.is_small(key, s - 1)
            state.tracked[key] = [s, True, not newly]
        else:
            state.tracked[key][1] = True
    for key, info in state.tracked.items():
        if key not in small:
            if info[1] and not info[2]:
                state.missed.append((key, s))
                info[2] = True
            info[1] = False
    pending = [key for key, info in state.tracked.items() if info[1] and not info[2]]
    if not pending:
        return recenter(K, B_J, state.alpha)
    cap = 2 * _xi(state.k) + 1
    chosen, planes = [], []
    for key in _rank(state, pending, s):
        extra = _coset_planes(fr, key, B_J.center, rho, s, state.alpha, widen=True)
        if len(planes) + len(extra) > cap:
            extra = _coset_planes(fr, key, B_J.center, rho, s, state.alpha, widen=False)
        if chosen and len(planes) + len(extra) > cap:
            continue
        chosen.append((key, len(extra)))
        planes += extra
    c = _avoid(state, K, decay, B_J, planes) if planes else B_J.center
    for key, count in chosen:
        state.tracked[key][2] = True
        _protect(state, key, c, rho, s, count)
    return Ball(c, state.alpha * rho)


def case1_step(state, B_J, K, decay):
    """Idle until the time-free hyperplane has covolume below 1/3, avoid once, then anything wins."""
    state.J += 1
    s = state.step_of(state.J)
    rho = B_J.radius
    key = state.case1_key
    if state.case1_done or state.frame.norm_sq(key, s) >= CASE1_COVOLUME_SQ:
        return recenter(K, B_J, state.alpha)
    planes = _coset_planes(state.frame, key, B_J.center, rho, s, state.alpha, widen=True)
    c = _avoid(state, K, decay, B_J, planes) if planes else B_J.center
    _protect(state, key, c, rho, s, len(planes))
    state.case1_done = True
    state.certificate = case1_certificate(state.A, key, c)
    return Ball(c, state.alpha * rho)


def case1_strategy(A, B1, K, decay, alpha, schedule, max_steps=256):
    """One-shot Case 1 play from ``B_1`` with idle moves: returns ``(W, certificate, flag)``."""
    key = find_case1_key(A)
    state = BadAState(A, schedule, flow_offset(schedule.u, schedule.n, B1.radius), alpha)
    state.case, state.case1_key = 1, key
    B = B1
    for _ in range(max_steps):
        W = case1_step(state, B, K, decay)
        if state.case1_done:
            return W, state.certificate, ANY_MOVES_WIN, state
        B = Ball(W.center, W.radius * schedule.u ** schedule.n / state.alpha)
    raise StrategyBreakdown("time-free hyperplane never became small enough")


class BadAStrategy(Strategy):
    """White for Bad_A. ``mode`` is ``auto`` (Case 1 when detected), ``case1`` or ``case2``."""

    name = "badA"

    def __init__(self, A, mode="auto", lookahead=20):
        self.A = sc.unify_matrix(A)
        self.mode = mode
        self.lookahead = lookahead

    def reset(self, params, seed):
        super().reset(params, seed)
        F = params.schedule
        self.state = BadAState(self.A, F, flow_offset(F.u, F.n, params.initial.radius), params.alpha, self.lookahead)
        if self.mode in ("auto", "case1"):
            try:
                self.state.case1_key = find_case1_key(self.A)
                self.state.case = 1
            except NotCase1:
                if self.mode == "case1":
                    raise
        a_max = alpha_bound(params.decay, self.state.k)
        if not sc.to_mpf(params.alpha) < sc.to_mpf(a_max):
            raise ConfigError("alpha", f"alpha must be below {sc.to_float(a_max)} for this support")

    def move(self, history, ball, ratio):
        p = self.params
        if self.state.case == 1:
            return case1_step(self.state, ball, p.support, p.decay)
        return badA_step(self.state, ball, p.support, p.decay)

    def report(self):
        st = self.state
        return {"strategy": "badA", "case": st.case, "ledger": [e.to_dict() for e in st.ledger],
                "missed": [[list(k.a), list(k.c), s] for k, s in st.missed],
                "c0": None if st.c0() is None else sc.format_scalar(st.c0()),
                "certificate": None if st.certificate is None else sc.format_scalar(st.certificate),
                "control": ANY_MOVES_WIN if st.case1_done else None}


def ledger_check(state, b, L):
    """Compare every ledger bound with the actual lattice distance at the covered steps ``<= L``.

    Returns a list of ``(step, bound, actual)`` failures.
    """
    fr = state.frame
    X = system_lattice(state.A, b)
    fails = []
    cache = {}
    for e in state.ledger:
        stop = L if e.end is None else min(e.end, L)
        for t in range(e.start, stop + 1):
            if t not in cache:
                cache[t] = sup_norm(closest_point(apply_flow(fr.F, t, X), [0] * X.k))
            bnd = e.bound(fr, t)
            if sc.to_mpf(bnd) > sc.to_mpf(cache[t]) * (1 + 1e-12):
                fails.append((t, bnd, cache[t]))
    return fails


# --- Bad^b ----------------------------------------------------------------


def _flat(A):
    return tuple(x for r in A for x in r)


def _matrix(v, m, n):
    return [list(v[i * n:(i + 1) * n]) for i in range(m)]


class GreedyBase(Strategy):
    """Invented placeholder for a Bad^0 strategy (not from the source construction).

    Among a small grid of admissible centers, keep the one whose rescaled
    lattice ``g^s L_A(0) Z^k`` has the longest shortest vector.
    """

    name = "greedy"

    def __init__(self, m, n, schedule, offset, grid=2):
        self.m, self.n, self.F, self.offset, self.grid = m, n, schedule, offset, grid

    def choose(self, ball, ratio, step, K):
        r = ratio * ball.radius
        reach = ball.radius - r
        best = None
        g = self.grid
        idx = range(-g, g + 1)
        pts = [()]
        for _ in range(len(ball.center)):
            pts = [p + (i,) for p in pts for i in idx]
        pts.sort(key=lambda p: (max(abs(i) for i in p), p))
        for p in pts:
            y = tuple(c + reach * Fraction(i, g) for c, i in zip(ball.center, p))
            try:
                y = point_on_K_in_ball(K, y, reach - max(abs(a - c) for a, c in zip(y, ball.center)))
            except Exception:
                continue
            L = apply_flow(self.F, step, system_lattice(_matrix(y, self.m, self.n)).lattice)
            score = sup_norm(shortest_vector(L))
            if best is None or score > best[0]:
                best = (score, y)
        c = best[1] if best else ball.center
        return Ball(c, r)


@dataclass
class BadBState:
    b: tuple
    m: int
    n: int
    schedule: object
    offset: int
    alpha0: object
    alpha_ratio: object
    stride: int = 1
    ell: int = 0
    last_v: tuple = None
    events: list = field(default_factory=list)

    @property
    def alpha(self):
        return self.alpha0 * self.alpha_ratio


def avoid_subspace(K, decay, Bp, ratio, v_p, v_t):
    """Center in ``B(A', rho'(1 - ratio))`` off the ``m`` planes ``(A v_t)_i = -(v_p)_i``.

    Matrices are flattened row-major; each plane is avoided by
    ``eps = 2 ratio rho'`` so ``||A'' v_t + v_p|| >= eps ||v_t||``.
    """
    m, n = len(v_p), len(v_t)
    eps = 2 * ratio * Bp.radius
    planes = []
    for i in range(m):
        normal = [Fraction(0)] * (m * n)
        for j in range(n):
            normal[i * n + j] = v_t[j]
        planes.append(Slab(tuple(normal), -v_p[i], eps))
    try:
        return avoid_hyperplanes(K, decay, Bp.center, Bp.radius, ratio, planes, k=1)
    except NotFound as exc:
        raise StrategyBreakdown(f"avoidance failed: {exc.violated}") from exc


def badB_step(state, base, B, K, decay):
    """Base move to ``B(A', alpha0 rho)``, then avoid ``{A : A v_t = -v_p}`` for the shortest ``v``."""
    state.ell += 1
    s = state.offset + state.ell - 1
    Bp = base.choose(B, state.alpha0, s, K)
    if validate_move(B, Bp, state.alpha0, K) is not None:
        raise BaseStrategyViolation(f"base move {Bp} is illegal inside {B}")
    if (state.ell - 1) % state.stride:
        return recenter(K, Bp, state.alpha_ratio)
    A1 = _matrix(Bp.center, state.m, state.n)
    X = system_lattice(A1, state.b)
    y = closest_point(apply_flow(state.schedule, s, X), [0] * X.k)
    y0 = state.schedule.apply_vector(-s, y)
    m, n = state.m, state.n
    q = [sc.iround(x) for x in y0[m:]]
    Aq = [sum(A1[i][j] * q[j] for j in range(n)) for i in range(m)]
    v_p = tuple(y0[i] - Aq[i] for i in range(m))  # = p - b
    v_t = tuple(Fraction(x) for x in q)
    state.last_v = (v_p, v_t)
    if not any(v_t):
        state.events.append((state.ell, "skip"))
        return recenter(K, Bp, state.alpha_ratio)
    c = avoid_subspace(K, decay, Bp, state.alpha_ratio, v_p, v_t)
    state.events.append((state.ell, "avoid"))
    return Ball(c, state.alpha * B.radius)


class BadBStrategy(Strategy):
    """White for Bad^b, wrapping a base Bad^0 strategy; acts every ``stride``-th round."""

    name = "badB"

    def __init__(self, b, m=1, n=1, stride=1, base=None):
        self.b = tuple(sc.to_scalar(x) for x in b)
        self.m, self.n, self.stride, self.base = m, n, stride, base

    def reset(self, params, seed):
        super().reset(params, seed)
        F = params.schedule
        ratio = alpha_for(params.decay, 1)
        alpha0 = params.alpha / ratio
        if not alpha0 < 1:
            raise ConfigError("alpha", f"alpha must be below {ratio} for the wrapper")
        offset = flow_offset(F.u, F.n, params.initial.radius)
        self.state = BadBState(self.b, self.m, self.n, F, offset, alpha0, ratio, self.stride)
        if self.base is None:
            self.base_impl = GreedyBase(self.m, self.n, F, offset)
        else:
            self.base_impl = self.base

    def move(self, history, ball, ratio):
        return badB_step(self.state, self.base_impl, ball, self.params.support, self.params.decay)

    def report(self):
        return {"strategy": "badB", "events": [list(e) for e in self.state.events],
                "alpha0": sc.format_scalar(self.state.alpha0)}


# --- Bad_A^infinity -------------------------------------------------------


@dataclass
class GrowthReport:
    covolumes: list  # [(step, min_H |g H|^2)]
    window_minima: list
    verdict: str
    ratios: list = field(default_factory=list)


def badInf_verify(A, b, schedule, L=40, Q=2 ** 12):
    """Decay of ``min_H |g_t H|`` along the flow and growth of badness-window minima for ``b``."""
    X = system_lattice(A).lattice
    covs = [(s, shortest_dual_sq(apply_flow(schedule, s, X))) for s in range(L + 1)]
    ratios = []
    for (s0, c0), (s1, c1) in zip(covs, covs[1:]):
        ratios.append(c1 / c0 if sc.is_exact(c0) and sc.is_exact(c1) else sc.to_mpf(c1) / sc.to_mpf(c0))
    first, last = sc.to_mpf(covs[0][1]), sc.to_mpf(covs[-1][1])
    decaying = last <= first * sc.to_mpf(schedule.u) ** (schedule.n * L)
    est = badness_scan(AffineSystem(A, b), Q)
    wins = [v for (lo, hi), v, _ in est.window_minima if hi - lo + 1 == lo]
    if not decaying:
        verdict = NOT_APPLICABLE
    elif wins and all(sc.to_mpf(x) < sc.to_mpf(y) for x, y in zip(wins, wins[1:])):
        verdict = DIVERGES
    else:
        verdict = BOUNDED
    return GrowthReport(covs, est.window_minima, verdict, ratios)
