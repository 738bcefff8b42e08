"""Black adversaries for stress-testing White strategies."""

import random
from dataclasses import dataclass
from fractions import Fraction

from . import scalar as sc
from .fractal import _box_meets_ball, _children, _root_cell, _sup_dist, _width
from .game import Ball, RandomStrategy, ReplayStrategy, Strategy, random_point_on_K
from .lattice import apply_flow, closest_point, enumerate_small_hyperplanes, system_lattice

RANDOM = "random"
TARGETING = "targeting"
REPLAY = "replay"
TOWARD_HIT = "toward-lattice-hit"
TOWARD_COSET = "toward-coset"


@dataclass(frozen=True)
class BlackSpec:
    variant: str
    seed: int = 0
    mode: str = TOWARD_HIT
    transcript: object = None

    @classmethod
    def parse(cls, text, transcript=None):
        """``random`` | ``targeting:<mode>`` | ``replay:<path>`` (the transcript is loaded by the caller)."""
        head, _, tail = text.partition(":")
        if head == RANDOM:
            return cls(RANDOM)
        if head == TARGETING:
            mode = tail or TOWARD_HIT
            if mode not in (TOWARD_HIT, TOWARD_COSET):
                raise ValueError(f"unknown targeting mode {mode!r}")
            return cls(TARGETING, mode=mode)
        if head == REPLAY:
            return cls(REPLAY, transcript=transcript)
        raise ValueError(f"unknown black strategy {text!r}")


def _like_center(target, center):
    """Exact centers get a dyadic target so Black's balls stay rational."""
    if all(sc.is_exact(c) for c in center):
        return tuple(sc.dyadic(t) for t in target)
    return tuple(sc.unify(list(target) + list(center))[:len(center)])


def _toward(K, center, s, target):
    """Point of ``K`` within ``s`` of ``center`` closest to ``target``; ``center`` is a candidate."""
    center = tuple(center)
    target = _like_center(target, center)
    if K.is_box:
        y = tuple(c + max(-s, min(s, t - c)) for c, t in zip(center, target))
        y = tuple(min(max(v, lo), hi) for v, (lo, hi) in zip(y, K.bounds))
        return y if _sup_dist(y, target) <= _sup_dist(center, target) else center
    hull = K.hull()
    width = _width(K)
    p0 = K.fixed_points()[0]
    level = [_root_cell(K)]
    while level and level[0].scale * width >= s / 8:
        level = [ch for cell in level for ch in _children(K, cell) if _box_meets_ball(*ch.box(hull), center, s)]
    best = (_sup_dist(center, target), center)
    for cell in level:
        a = cell.image(p0)
        if _sup_dist(a, center) <= s:
            cand = (_sup_dist(a, target), a)
            if cand[0] < best[0] or (cand[0] == best[0] and a < best[1]):
                best = cand
    return best[1]


def _step_for(F, radius):
    """Flow step ``s`` with ``u^{n s}`` closest to ``radius`` from above."""
    s, r = 0, Fraction(1)
    base = F.u ** F.n
    while r * base >= radius:
        r *= base
        s += 1
    return s


def hit_target_b(A, b, F, radius):
    """The b-value that zeroes the particle part of the lattice point nearest the origin."""
    s = _step_for(F, radius)
    X = system_lattice(A, b)
    y = closest_point(apply_flow(F, s, X), [0] * X.k)
    y0 = F.apply_vector(-s, y)
    m = len(b)
    return tuple(bi + yi for bi, yi in zip(b, y0[:m]))


def coset_target_b(A, b, F, radius):
    """Nearest point of ``{b : <b, a> in Z}`` over the currently small hyperplanes."""
    s = _step_for(F, radius)
    L = apply_flow(F, s, system_lattice(A).lattice)
    m = len(b)
    best = None
    for H in enumerate_small_hyperplanes(L):
        w0 = F.apply_dual(-s, H.dual_vector)
        a = [sc.iround(x) for x in w0[:m]]
        if not any(a):
            continue
        val = sum(x * y for x, y in zip(a, b))
        z = sc.iround(val)
        nsq = sum(x * x for x in a)
        t = tuple(y - (val - z) * x / nsq for x, y in zip(a, b))
        d = _sup_dist(t, b)
        if best is None or d < best[0]:
            best = (d, t)
    return best[1] if best else tuple(b)


def hit_target_A(b, m, n, F, A_flat, radius):
    """Matrix nearest ``A`` with ``A q = b - p`` for the shortest lattice vector's integer data."""
    A = [list(A_flat[i * n:(i + 1) * n]) for i in range(m)]
    s = _step_for(F, radius)
    X = system_lattice(A, b)
    y = closest_point(apply_flow(F, s, X), [0] * X.k)
    y0 = F.apply_vector(-s, y)
    q = [sc.iround(x) for x in y0[m:]]
    qq = sum(x * x for x in q)
    if qq == 0:
        return tuple(A_flat)
    out = []
    for i in range(m):
        resid = y0[i]  # p_i + (A q)_i - b_i
        out.extend(A[i][j] - resid * q[j] / qq for j in range(n))
    return tuple(out)


class TargetingBlack(Strategy):
    """Pushes the center as far as allowed toward the current dangerous object.

    ``context`` is ``{"A": ...}`` for games in b-space or
    ``{"b": ..., "m": m, "n": n}`` for games in matrix space.
    """

    name = "targeting"

    def __init__(self, context, mode=TOWARD_HIT):
        self.context = context
        self.mode = mode
        self.last = None

    def target(self, W):
        F = self.params.schedule
        if "A" in self.context:
            if self.mode == TOWARD_COSET:
                return coset_target_b(self.context["A"], W.center, F, W.radius)
            return hit_target_b(self.context["A"], W.center, F, W.radius)
        c = self.context
        return hit_target_A(c["b"], c["m"], c["n"], F, W.center, W.radius)

    def move(self, history, ball, ratio):
        r = ratio * ball.radius
        try:
            t = _like_center(self.target(ball), ball.center)
        except (ArithmeticError, ValueError):
            self.last = None
            return Ball(ball.center, r)
        c = _toward(self.params.support, ball.center, ball.radius - r, t)
        self.last = (t, _sup_dist(ball.center, t), _sup_dist(c, t))
        return Ball(c, r)


def make_black(spec, context=None):
    if spec.variant == RANDOM:
        return RandomStrategy()
    if spec.variant == TARGETING:
        return TargetingBlack(context or {}, spec.mode)
    if spec.variant == REPLAY:
        return ReplayStrategy(spec.transcript, "black")
    raise ValueError(spec.variant)


def black_move(spec, history, W_prev, beta, K, params, context=None, seed=0):
    """Single Black answer to ``W_prev``; falls back to a concentric shrink."""
    if spec.variant == REPLAY:
        return spec.transcript.rounds[len(history) // 2][0]
    r = beta * W_prev.radius
    if spec.variant == RANDOM:
        return Ball(random_point_on_K(K, W_prev.center, W_prev.radius - r, random.Random(seed)), r)
    p = TargetingBlack(context or {}, spec.mode)
    p.reset(params, seed)
    try:
        return p.move(history, W_prev, beta)
    except Exception:
        return Ball(W_prev.center, r)
