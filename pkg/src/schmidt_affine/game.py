"""Schmidt (alpha, beta)-game referee and runner.

Black opens with ``B_1``; each cycle White answers inside the current Black
ball with ratio ``alpha`` and Black answers inside White's ball with ratio
``beta``. A game of ``rounds = R`` plays ``R + 1`` White moves, so the last
White ball has radius ``alpha (alpha beta)^R rho_1 <= (alpha beta)^R rho_1``.
"""

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction

from . import scalar as sc
from .exceptions import ConfigError, InvalidTranscript
from .fractal import (
    DecayParams,
    SupportSpec,
    _box_meets_ball,
    _children,
    _root_cell,
    _sup_dist,
    _width,
    contains,
    default_decay,
    point_on_K_in_ball,
)
from .lattice import FlowSchedule, _rational_root


class Violation(enum.Enum):
    RADIUS = "RADIUS"
    NESTING = "NESTING"
    SUPPORT = "SUPPORT"


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: object

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(sc.to_scalar(v) for v in self.center))
        object.__setattr__(self, "radius", sc.to_scalar(self.radius))
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    def contains_ball(self, other):
        vals = sc.unify(list(self.center) + list(other.center) + [self.radius, other.radius])
        d = self.dim
        gap = max(abs(a - b) for a, b in zip(vals[:d], vals[d:2 * d]))
        return gap <= vals[-2] - vals[-1]

    def contains_point(self, x):
        vals = sc.unify(list(self.center) + list(x) + [self.radius])
        d = self.dim
        return max(abs(a - b) for a, b in zip(vals[:d], vals[d:2 * d])) <= vals[-1]


@dataclass(frozen=True)
class GameParams:
    alpha: object
    beta: object
    rounds: int
    support: SupportSpec
    initial: Ball
    decay: DecayParams = None
    m: int = 1
    n: int = 1

    def __post_init__(self):
        for name in ("alpha", "beta"):
            v = sc.to_scalar(getattr(self, name))
            if not sc.is_exact(v) or not 0 < v < 1:
                raise ConfigError(name, "must be a rational in (0, 1)")
            object.__setattr__(self, name, v)
        if self.rounds < 0:
            raise ConfigError("rounds", "must be nonnegative")
        if self.initial.dim != self.support.dim:
            raise ConfigError("initial", "initial ball dimension differs from the support")
        if self.decay is None:
            object.__setattr__(self, "decay", default_decay(self.support))
        if _rational_root(self.alpha * self.beta, self.n) is None:
            raise ConfigError("beta", f"alpha*beta = {self.alpha * self.beta} is not an n-th power of a rational (n={self.n})")

    @property
    def u(self):
        return _rational_root(self.alpha * self.beta, self.n)

    @property
    def schedule(self):
        return FlowSchedule(self.m, self.n, self.u)

    @property
    def radius_bound(self):
        return (self.alpha * self.beta) ** self.rounds * self.initial.radius


@dataclass
class Transcript:
    params: GameParams
    rounds: list = field(default_factory=list)  # [(black Ball, white Ball)]
    limit_center: tuple = None
    limit_radius_bound: object = None
    violation: tuple = None  # (player, Violation, round index)
    fixed: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    @property
    def valid(self):
        return self.violation is None

    def balls(self):
        out = []
        for b, w in self.rounds:
            out.append(b)
            if w is not None:
                out.append(w)
        return out


def validate_move(prev, nxt, ratio, K):
    """``None`` when legal, otherwise the first violated rule (RADIUS, NESTING, SUPPORT)."""
    r_prev, r_next, q = sc.unify([prev.radius, nxt.radius, ratio])
    if not sc.close(r_next, q * r_prev):
        return Violation.RADIUS
    if not prev.contains_ball(nxt):
        return Violation.NESTING
    if not contains(K, nxt.center):
        return Violation.SUPPORT
    return None


class Strategy:
    """Move interface: ``move`` receives the full history and the ball to answer."""

    name = "strategy"

    def reset(self, params, seed):
        self.params = params
        self.rng = random.Random(seed)

    def move(self, history, ball, ratio):
        raise NotImplementedError


def recenter(K, ball, ratio):
    """Shrink in place; the center is already on ``K`` for any legal ball."""
    r = ratio * ball.radius
    c = point_on_K_in_ball(K, ball.center, ball.radius - r)
    return Ball(c, r)


def _uniform(rng, bits=16):
    return Fraction(rng.randrange(-(2 ** bits), 2 ** bits + 1), 2 ** bits)


def random_point_on_K(K, center, s, rng, tries=8):
    """A random point of ``K`` within ``s`` of ``center``; falls back to ``center``."""
    center = tuple(center)
    if s <= 0:
        return center
    if K.is_box:
        y = tuple(c + s * _uniform(rng) for c in center)
        return tuple(min(max(v, lo), hi) for v, (lo, hi) in zip(y, K.bounds))
    hull = K.hull()
    width = _width(K)
    p0 = K.fixed_points()[0]
    for _ in range(tries):
        cell = _root_cell(K)
        while cell.scale * width >= s / 4:
            kids = [ch for ch in _children(K, cell) if _box_meets_ball(*ch.box(hull), center, s)]
            if not kids:
                break
            cell = kids[rng.randrange(len(kids))]
        a = cell.image(p0)
        if _sup_dist(a, center) <= s:
            return a
    return center


class RecenterStrategy(Strategy):
    name = "trivial"

    def move(self, history, ball, ratio):
        return recenter(self.params.support, ball, ratio)


class RandomStrategy(Strategy):
    name = "random"

    def move(self, history, ball, ratio):
        r = ratio * ball.radius
        c = random_point_on_K(self.params.support, ball.center, ball.radius - r, self.rng)
        return Ball(c, r)


class ReplayStrategy(Strategy):
    """Plays back the moves of one side of a stored transcript."""

    def __init__(self, transcript, side):
        if side not in ("black", "white"):
            raise ValueError("side must be 'black' or 'white'")
        self.transcript = transcript
        self.side = side
        self.name = f"replay-{side}"

    def move(self, history, ball, ratio):
        black, white = self.transcript.rounds[len(history) // 2]
        return white if self.side == "white" else black


def run_game(params, white, black, seed=0, fixed=None):
    """Play ``params.rounds + 1`` cycles, refereeing every move."""
    K = params.support
    rng = random.Random(seed)
    white.reset(params, rng.getrandbits(64))
    black.reset(params, rng.getrandbits(64))
    T = Transcript(params, fixed=dict(fixed or {}))
    B = params.initial
    history = [B]
    if not contains(K, B.center):
        T.violation = ("black", Violation.SUPPORT, 0)
        T.rounds.append((B, None))
        return T
    for j in range(params.rounds + 1):
        W = white.move(history, B, params.alpha)
        v = validate_move(B, W, params.alpha, K)
        T.rounds.append((B, W))
        history.append(W)
        if v is not None:
            T.violation = ("white", v, j)
            return T
        if j == params.rounds:
            break
        B = black.move(history, W, params.beta)
        v = validate_move(W, B, params.beta, K)
        history.append(B)
        if v is not None:
            T.rounds.append((B, None))
            T.violation = ("black", v, j + 1)
            return T
    T.limit_center = T.rounds[-1][1].center
    T.limit_radius_bound = params.radius_bound
    T.extra.update(getattr(white, "report", lambda: {})())
    return T


def validate_transcript(T):
    """Re-referee every move; returns the list of ``(player, Violation, round)``."""
    p = T.params
    K = p.support
    out = []
    prev_white = None
    for j, (B, W) in enumerate(T.rounds):
        if j == 0:
            if B != p.initial:
                out.append(("black", Violation.NESTING, 0))
            if not contains(K, B.center):
                out.append(("black", Violation.SUPPORT, 0))
        else:
            v = validate_move(prev_white, B, p.beta, K)
            if v is not None:
                out.append(("black", v, j))
        if W is None:
            out.append(("white", Violation.RADIUS, j))
            break
        v = validate_move(B, W, p.alpha, K)
        if v is not None:
            out.append(("white", v, j))
        prev_white = W
    if not out and len(T.rounds) != p.rounds + 1:
        out.append(("white", Violation.RADIUS, len(T.rounds)))
    return out


def limit_point(T):
    """Last White center and ``(alpha beta)^R rho(B_1)``."""
    problems = validate_transcript(T)
    if problems or T.violation is not None:
        raise InvalidTranscript(f"transcript has violations: {problems or [T.violation]}")
    bound = T.params.radius_bound
    return T.rounds[-1][1].center, bound


def radii(T):
    return [b.radius for b in T.balls()]

