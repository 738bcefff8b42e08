"""Supports of absolutely decaying measures: boxes with Lebesgue measure and
self-similar IFS attractors with their natural measure.

Balls are sup-norm balls; distances to hyperplanes are Euclidean.
"""

import functools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath

from . import scalar as sc
from .exceptions import ConfigError, EmptyIntersection, NotFound

BOX = "box"
IFS = "ifs"
RESOLUTION = Fraction(1, 10 ** 9)
MAX_SEARCH_LEVELS = 40


@dataclass(frozen=True)
class SupportSpec:
    """Either ``BOX(dim, bounds)`` or ``IFS(maps, dim)``; maps are ``(ratio, offset)`` for ``x -> ratio*x + offset``."""

    kind: str
    dim: int
    bounds: tuple = ()
    maps: tuple = ()

    def __post_init__(self):
        if self.kind == BOX:
            if len(self.bounds) != self.dim or self.dim < 1:
                raise ConfigError("support", "box needs one (lo, hi) pair per coordinate")
            for lo, hi in self.bounds:
                if not lo < hi:
                    raise ConfigError("support", f"empty box side [{lo}, {hi}]")
        elif self.kind == IFS:
            if len(self.maps) < 1:
                raise ConfigError("support", "IFS needs at least one map")
            for r, o in self.maps:
                if not 0 < r < 1:
                    raise ConfigError("support", f"ratio {r} is not in (0, 1)")
                if len(o) != self.dim:
                    raise ConfigError("support", "offset dimension mismatch")
        else:
            raise ConfigError("support", f"unknown support kind {self.kind!r}")

    @classmethod
    def box(cls, bounds):
        bounds = tuple((sc.to_scalar(lo), sc.to_scalar(hi)) for lo, hi in bounds)
        return cls(BOX, len(bounds), bounds=bounds)

    @classmethod
    def ifs(cls, maps, dim=None):
        maps = tuple((sc.to_scalar(r), tuple(sc.to_scalar(v) for v in o)) for r, o in maps)
        return cls(IFS, dim if dim is not None else len(maps[0][1]), maps=maps)

    @property
    def is_box(self):
        return self.kind == BOX

    def fixed_points(self):
        return [tuple(v / (1 - r) for v in o) for r, o in self.maps]

    def hull(self):
        """Bounding box of the fixed points; it is mapped into itself by every map."""
        if self.is_box:
            return [lo for lo, _ in self.bounds], [hi for _, hi in self.bounds]
        pts = self.fixed_points()
        return [min(p[i] for p in pts) for i in range(self.dim)], [max(p[i] for p in pts) for i in range(self.dim)]

    def weights(self):
        """Natural measure weights ``r_i^s`` with ``sum r_i^s = 1``; exact ``1/N`` for equal ratios."""
        ratios = [r for r, _ in self.maps]
        if len(set(ratios)) == 1:
            return [Fraction(1, len(ratios))] * len(ratios)
        f = lambda s: sum(mpmath.mpf(sc.to_float(r)) ** s for r in ratios) - 1
        s = mpmath.findroot(f, 1.0)
        return [sc.to_mpf(r) ** s for r in ratios]

    def similarity_dimension(self):
        ratios = [r for r, _ in self.maps]
        if len(set(ratios)) == 1:
            return mpmath.log(len(ratios)) / -mpmath.log(sc.to_mpf(ratios[0]))
        f = lambda s: sum(sc.to_mpf(r) ** s for r in ratios) - 1
        return mpmath.findroot(f, 1.0)

    def to_dict(self):
        if self.is_box:
            return {"kind": BOX, "dim": self.dim,
                    "bounds": [[sc.format_scalar(lo), sc.format_scalar(hi)] for lo, hi in self.bounds]}
        return {"kind": IFS, "dim": self.dim,
                "maps": [{"ratio": sc.format_scalar(r), "offset": sc.format_vector(o)} for r, o in self.maps]}

    @classmethod
    def from_dict(cls, d):
        if d["kind"] == BOX:
            return cls.box([(sc.parse_scalar(lo), sc.parse_scalar(hi)) for lo, hi in d["bounds"]])
        maps = [(sc.parse_scalar(m["ratio"]), sc.parse_vector(m["offset"])) for m in d["maps"]]
        return cls.ifs(maps, d.get("dim"))


def unit_box(dim=1):
    return SupportSpec.box([(0, 1)] * dim)


def cantor():
    """Middle-thirds Cantor set."""
    return SupportSpec.ifs([(Fraction(1, 3), [0]), (Fraction(1, 3), [Fraction(2, 3)])])


def sierpinski():
    h = Fraction(1, 2)
    return SupportSpec.ifs([(h, [0, 0]), (h, [h, 0]), (h, [0, h])])


@dataclass(frozen=True)
class DecayParams:
    C: object
    eta: object
    r0: object = Fraction(1)
    federer_D: object = None
    fitting: tuple = None

    def __post_init__(self):
        for name in ("C", "eta", "r0"):
            object.__setattr__(self, name, sc.to_scalar(getattr(self, name)))
            if not getattr(self, name) > 0:
                raise ConfigError(name, "must be positive")

    def bound(self, eps, r):
        return sc.to_mpf(self.C) * (sc.to_mpf(eps) / sc.to_mpf(r)) ** sc.to_mpf(self.eta)

    def to_dict(self):
        return {"C": sc.format_scalar(self.C), "eta": sc.format_scalar(self.eta), "r0": sc.format_scalar(self.r0)}


def default_decay(K):
    """Shipped constants: ``(2, 1)`` for boxes, ``(4, s)`` for IFS attractors of similarity dimension ``s``."""
    if K.is_box:
        return DecayParams(Fraction(2), Fraction(1))
    return DecayParams(Fraction(4), K.similarity_dimension())


@dataclass(frozen=True)
class Slab:
    """Thickening ``{y : dist(y, {a.y = d}) <= eps}`` of an affine hyperplane."""

    normal: tuple
    offset: object
    eps: object

    def clears(self, y):
        """True when ``y`` lies strictly outside the thickening (exact in rational mode)."""
        vals = sc.unify(list(self.normal) + list(y) + [self.offset, self.eps])
        k = len(self.normal)
        a, yy, d, e = vals[:k], vals[k:2 * k], vals[2 * k], vals[2 * k + 1]
        s = sum(ai * yi for ai, yi in zip(a, yy)) - d
        return s * s > e * e * sum(ai * ai for ai in a)

    def distance(self, y):
        a = [sc.to_mpf(v) for v in self.normal]
        s = sum(ai * sc.to_mpf(yi) for ai, yi in zip(a, y)) - sc.to_mpf(self.offset)
        return abs(s) / mpmath.sqrt(sum(ai * ai for ai in a))


def point_slab(point, eps):
    """In dimension one a hyperplane is a point."""
    return Slab((Fraction(1),), sc.to_scalar(point), sc.to_scalar(eps))


# --- cells ---------------------------------------------------------------


@dataclass(frozen=True)
class _Cell:
    word: tuple
    scale: object
    offset: tuple

    def box(self, hull):
        lo, hi = hull
        return ([self.scale * l + o for l, o in zip(lo, self.offset)],
                [self.scale * h + o for h, o in zip(hi, self.offset)])

    def image(self, p):
        return tuple(self.scale * v + o for v, o in zip(p, self.offset))


def _root_cell(K):
    return _Cell((), Fraction(1), tuple(Fraction(0) for _ in range(K.dim)))


def _children(K, cell):
    for j, (r, o) in enumerate(K.maps):
        yield _Cell(cell.word + (j,), cell.scale * r,
                    tuple(c + cell.scale * v for c, v in zip(cell.offset, o)))


def _width(K):
    lo, hi = K.hull()
    return max(h - l for l, h in zip(lo, hi))


def _tol(values):
    return mpmath.mpf(2) ** (-(sc.get_precision() - 16)) if sc.any_float(values) else 0


def _box_meets_ball(blo, bhi, x, r, tol=0):
    return all(l - tol <= xi + r and xi - r <= h + tol for l, h, xi in zip(blo, bhi, x))


def _sup_dist(x, y):
    return max(abs(a - b) for a, b in zip(x, y))


def _clamp(K, x):
    return tuple(min(max(v, lo), hi) for v, (lo, hi) in zip(x, K.bounds))


def contains(K, x, resolution=RESOLUTION):
    """Membership at resolution: ``x`` lies in a closed cell of diameter below ``resolution``.

    IFS points are pulled back through the inverse maps; ``x`` is in the cell
    ``f_w(hull)`` exactly when ``f_w^{-1}(x)`` is in the hull.
    """
    return _contains(K, tuple(sc.to_scalar(v) for v in x), resolution)


@functools.lru_cache(maxsize=65536)
def _contains(K, x, resolution):
    tol = _tol(x)
    if K.is_box:
        return all(lo - tol <= v <= hi + tol for v, (lo, hi) in zip(x, K.bounds))
    fixed = set(K.fixed_points())
    lo, hi = K.hull()
    width = _width(K)
    if not all(l - tol <= v <= h + tol for v, l, h in zip(x, lo, hi)):
        return False
    level = {x: Fraction(1)}
    while level:
        nxt = {}
        for y, scale in level.items():
            if scale * width < resolution or y in fixed:
                return True
            t = tol / scale
            for r, o in K.maps:
                z = tuple((v - ov) / r for v, ov in zip(y, o))
                if all(l - t <= v <= h + t for v, l, h in zip(z, lo, hi)):
                    nxt[z] = max(nxt.get(z, 0), scale * r)
        level = nxt
    return False


def _cells_meeting(K, x, r, stop):
    """BFS levels of cells meeting ``B(x, r)``; yields each level until ``stop(scale)``."""
    hull = K.hull()
    tol = _tol(list(x) + [r])
    level = [_root_cell(K)]
    depth = 0
    while level and depth <= MAX_SEARCH_LEVELS:
        yield level
        if stop(level[0].scale):
            return
        nxt = []
        for cell in level:
            for ch in _children(K, cell):
                lo, hi = ch.box(hull)
                if _box_meets_ball(lo, hi, x, r, tol):
                    nxt.append(ch)
        level = nxt
        depth += 1


def point_on_K_in_ball(K, x, r):
    """A point of ``K`` within sup distance ``r`` of ``x``; ``x`` itself when already on ``K``."""
    x = tuple(sc.to_scalar(v) for v in x)
    r = sc.to_scalar(r)
    if K.is_box:
        y = _clamp(K, x)
        if _sup_dist(x, y) > r:
            raise EmptyIntersection(f"B({sc.format_vector(x)}, {sc.format_scalar(r)}) misses the box")
        return y
    if contains(K, x):
        return x
    width = _width(K)
    p0 = K.fixed_points()[0]
    best = None
    for level in _cells_meeting(K, x, r, lambda s: s * width < RESOLUTION):
        if level[0].scale * width >= r / 4:
            continue
        for cell in level:
            a = cell.image(p0)
            d = _sup_dist(a, x)
            if d <= r and (best is None or d < best[0]):
                best = (d, a)
        if best is not None:
            return best[1]
    raise EmptyIntersection(f"B({sc.format_vector(x)}, {sc.format_scalar(r)}) misses K at resolution")


def alpha_bound(decay, k):
    """``(4 (2 ceil(sqrt k) C)^{1/eta})^{-1}``, exact when ``1/eta`` is an integer."""
    xi = math.isqrt(k - 1) + 1 if k > 1 else 1
    base = 2 * xi * decay.C
    eta = decay.eta
    if sc.is_exact(eta) and sc.is_exact(base) and (1 / eta).denominator == 1:
        return 1 / (4 * base ** int(1 / eta))
    return 1 / (4 * sc.to_mpf(base) ** (1 / sc.to_mpf(eta)))


def max_planes(k):
    return 2 * (math.isqrt(k - 1) + 1 if k > 1 else 1) + 1


def _check_avoid_pre(decay, r, alpha, planes, k):
    if len(planes) > max_planes(k):
        raise NotFound("too many planes", f"|planes| = {len(planes)} > 2*ceil(sqrt({k}))+1 = {max_planes(k)}")
    for p in planes:
        e, lim = sc.unify([p.eps, 2 * alpha * r])
        if e > lim:
            raise NotFound("slab too thick", f"eps = {sc.to_float(e)} > 2*alpha*r = {sc.to_float(lim)}")
    a, b = sc.unify([alpha, alpha_bound(decay, k)])
    if not a < b:
        raise NotFound("alpha too large", f"alpha = {sc.to_float(a)} >= bound {sc.to_float(b)}")


def _box_candidates(K, x, rad):
    """Nested dyadic grids over ``B(x, rad)`` clamped to the box."""
    seen = set()
    for j in range(0, 12):
        steps = 2 ** j
        idx = range(-steps, steps + 1)
        grid = [()]
        for _ in range(K.dim):
            grid = [g + (i,) for g in grid for i in idx]
        grid.sort(key=lambda g: (max(abs(i) for i in g), g))
        for g in grid:
            y = _clamp(K, tuple(xi + rad * Fraction(i, steps) for xi, i in zip(x, g)))
            if y not in seen:
                seen.add(y)
                yield y


def avoid_hyperplanes(K, decay, x, r, alpha, planes, k=None):
    """A point ``y`` of ``K`` with ``||y - x|| <= r(1 - alpha)`` clearing every slab.

    ``k`` is the lattice dimension entering the plane-count and ``alpha``
    preconditions (default ``K.dim + 1``). Search is breadth first over IFS
    cells (anchors tested in child order) or nested grids for boxes.
    """
    x = tuple(sc.to_scalar(v) for v in x)
    r, alpha = sc.to_scalar(r), sc.to_scalar(alpha)
    k = K.dim + 1 if k is None else k
    _check_avoid_pre(decay, r, alpha, planes, k)
    rad = r * (1 - alpha)

    def ok(y):
        return _sup_dist(x, y) <= rad and all(p.clears(y) for p in planes)

    if K.is_box:
        for y in _box_candidates(K, x, rad):
            if ok(y):
                return y
    else:
        if contains(K, x) and ok(x):
            return x
        p0 = K.fixed_points()[0]
        width = _width(K)
        floor = rad * RESOLUTION
        for level in _cells_meeting(K, x, rad, lambda s: s * width < floor):
            for cell in level:
                y = cell.image(p0)
                if ok(y):
                    return y
    raise NotFound("search exhausted", "no admissible point found although the preconditions hold")


# --- measure computations ------------------------------------------------


def _fl(v):
    return [sc.to_float(t) for t in v]


def _lin_range(a, lo, hi):
    mn = sum(ai * (l if ai >= 0 else h) for ai, l, h in zip(a, lo, hi))
    mx = sum(ai * (h if ai >= 0 else l) for ai, l, h in zip(a, lo, hi))
    return mn, mx


def _ball_measures(K, x, r, a, d, eps, depth_limit):
    """Float bounds ``(upper mu(B n S), lower mu(B))`` by cell recursion."""
    hull = [_fl(v) for v in K.hull()]
    ratios = [sc.to_float(rr) for rr, _ in K.maps]
    offs = [_fl(o) for _, o in K.maps]
    wts = [float(w) for w in K.weights()]
    na = math.sqrt(sum(t * t for t in a))
    slo, shi = d - eps * na, d + eps * na
    up = 0.0
    low = 0.0
    stack = [(1.0, [0.0] * K.dim, 1.0, 0)]
    while stack:
        s, off, w, dep = stack.pop()
        lo = [s * l + o for l, o in zip(hull[0], off)]
        hi = [s * h + o for h, o in zip(hull[1], off)]
        if any(l > xi + r or h < xi - r for l, h, xi in zip(lo, hi, x)):
            continue
        in_ball = all(xi - r <= l and h <= xi + r for l, h, xi in zip(lo, hi, x))
        mn, mx = _lin_range(a, lo, hi)
        meets_slab = not (mx < slo or mn > shi)
        in_slab = slo <= mn and mx <= shi
        if in_ball:
            low += w
            if in_slab:
                up += w
                continue
            if not meets_slab:
                continue
        if dep >= depth_limit:
            if meets_slab:
                up += w
            continue
        for rr, o, ww in zip(ratios, offs, wts):
            stack.append((s * rr, [c + s * v for c, v in zip(off, o)], w * ww, dep + 1))
    return up, low


def _box_ratio_1d(K, x, r, a, d, eps):
    """Exact ``mu(B n S) / mu(B)`` for a box in dimension one."""
    (lo, hi), = K.bounds
    blo, bhi = max(lo, x - r), min(hi, x + r)
    p = d / a
    w = abs(eps)
    slo, shi = max(blo, p - w), min(bhi, p + w)
    return max(Fraction(0), shi - slo) / (bhi - blo)


@dataclass
class DecayReport:
    C: object
    eta: object
    trials: int
    max_ratio: float
    passed: bool
    counterexample: dict = None
    worst: dict = field(default_factory=dict)

    @property
    def verdict(self):
        return "PASS" if self.passed else "FAIL"


def _random_point(K, rnd):
    if K.is_box:
        return [sc.to_float(lo) + rnd.random() * sc.to_float(hi - lo) for lo, hi in K.bounds]
    p0 = _fl(K.fixed_points()[0])
    s, off = 1.0, [0.0] * K.dim
    for _ in range(40):
        r, o = K.maps[rnd.randrange(len(K.maps))]
        off = [c + s * v for c, v in zip(off, _fl(o))]
        s *= sc.to_float(r)
    return [s * v + c for v, c in zip(p0, off)]


def verify_absolute_decay(K, decay, trials, seed, depth_extra=4):
    """Sample balls and slabs on ``K``; compare ``mu(B n S)/mu(B)`` with ``C (eps/r)^eta``.

    IFS measures are bracketed by cell recursion (upper bound on the slab
    part, lower bound on the ball) so a PASS is conservative. Each random
    trial is paired with a probe whose slab is centered at ``x`` itself.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rnd = random.Random(seed)
    C, eta = sc.to_float(decay.C), sc.to_float(decay.eta)
    r0 = sc.to_float(decay.r0)
    exact_box = K.is_box and K.dim == 1
    width = sc.to_float(_width(K))
    contraction = max(sc.to_float(r) for r, _ in K.maps) if not K.is_box else 0.5
    worst = {"ratio": -1.0}
    bad = None
    for t in range(trials):
        x = _random_point(K, rnd)
        r = r0 * 10 ** (-3 * rnd.random())
        eps = r * 10 ** (-3 * rnd.random())
        if K.dim == 1:
            a = [1.0]
            centre = x[0] if t % 2 else x[0] + (2 * rnd.random() - 1) * r
        else:
            a = [rnd.gauss(0, 1) for _ in range(K.dim)]
            y = x if t % 2 else [xi + (2 * rnd.random() - 1) * r for xi in x]
            centre = sum(ai * yi for ai, yi in zip(a, y))
        if exact_box:
            fx = [Fraction(v) for v in x]
            ratio = float(_box_ratio_1d(K, fx[0], Fraction(r), Fraction(a[0]), Fraction(centre), Fraction(eps)))
        else:
            scale = min(eps, r) / max(width, 1e-300) / 8
            depth = int(math.ceil(math.log(scale) / math.log(contraction))) + depth_extra
            up, low = _ball_measures(K, x, r, a, centre, eps, depth)
            ratio = up / low if low > 0 else math.inf
        bound = C * (eps / r) ** eta
        if ratio / bound > worst["ratio"]:
            worst = {"ratio": ratio / bound, "x": x, "r": r, "eps": eps, "normal": a, "offset": centre}
        if ratio > bound * (1 + 1e-9) and bad is None:
            bad = {"x": x, "r": r, "eps": eps, "normal": a, "offset": centre,
                   "measure_ratio": ratio, "bound": bound}
    return DecayReport(decay.C, decay.eta, trials, worst["ratio"], bad is None, bad, worst)


# --- fitting -------------------------------------------------------------


def fitting_count(K, beta, x, r):
    """Greedy lower bound on the number of disjoint ``beta r``-balls centered on ``K`` inside ``B(x, r)``.

    Balls count as disjoint when their centers are at least ``2 beta r``
    apart. ``x`` is placed first, then candidate centers in lexicographic order.
    """
    beta, r = sc.to_scalar(beta), sc.to_scalar(r)
    x = tuple(sc.to_scalar(v) for v in x)
    rho = beta * r
    reach = r - rho
    if K.is_box:
        steps = max(1, sc.iceil(reach / rho)) if reach > 0 else 0
        grid = [()]
        for _ in range(K.dim):
            grid = [g + (i,) for g in grid for i in range(-steps, steps + 1)]
        cands = [_clamp(K, tuple(xi + Fraction(i) * rho for xi, i in zip(x, g))) for g in grid]
    else:
        width = _width(K)
        p0 = K.fixed_points()[0]
        cands = []
        for level in _cells_meeting(K, x, reach, lambda s: s * width <= rho):
            if level[0].scale * width <= rho:
                cands = [c.image(p0) for c in level]
    cands = sorted(set(c for c in cands if _sup_dist(c, x) <= reach))
    chosen = [x]
    for c in cands:
        if all(_sup_dist(c, y) >= 2 * rho for y in chosen):
            chosen.append(c)
    return len(chosen)


def measure_of_level(K, depth):
    """Cell measures at ``depth``; they sum to one."""
    wts = K.weights()
    out = [Fraction(1) if not sc.any_float(wts) else mpmath.mpf(1)]
    for _ in range(depth):
        out = [w * v for w in out for v in wts]
    return out


def open_set_spot_check(K):
    """First-level images of the hull interior are pairwise disjoint."""
    if K.is_box:
        return True
    hull = K.hull()
    cells = list(_children(K, _root_cell(K)))
    boxes = [c.box(hull) for c in cells]
    for i in range(len(boxes)):
        for j in range(i + 1, len(boxes)):
            (l1, h1), (l2, h2) = boxes[i], boxes[j]
            if all(a < d and c < b for a, b, c, d in zip(l1, h1, l2, h2)):
                return False
    return True
