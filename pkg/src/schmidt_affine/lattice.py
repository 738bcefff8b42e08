"""Affine lattices in R^k and the diagonal flow acting on them.

Rows of a basis matrix are the basis vectors. Coordinates split as
``(particle | time)``: the first ``m`` entries are the particle part and the
last ``n`` the time part. Sup norms measure Diophantine quantities,
Euclidean norms measure covolumes (``|H| = ||w||_2``).
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

from . import _reduce as red
from . import scalar as sc
from .exceptions import DegenerateBase, DimensionTooLarge, NotRational, PrecisionExhausted, SingularBasis

MAX_DIM = 8


def _vec(v):
    return tuple(sc.unify(v))


@dataclass(frozen=True, eq=False)
class Lattice:
    """A lattice given by a row basis.

    ``check=True`` enforces unimodularity (exact in rational mode, relative
    ``1e-9`` in float mode). Flowed and dual lattices inherit it for free.
    """

    basis: tuple
    check: bool = True

    def __post_init__(self):
        rows = sc.unify_matrix(self.basis)
        k = len(rows)
        if any(len(r) != k for r in rows):
            raise ValueError("basis must be square")
        object.__setattr__(self, "basis", tuple(tuple(r) for r in rows))
        if self.check and not sc.close(abs(self.det), 1):
            raise ValueError(f"basis is not unimodular (det = {self.det})")

    @property
    def k(self):
        return len(self.basis)

    @property
    def mode(self):
        return sc.mode_of(self.basis[0])

    @cached_property
    def det(self):
        return red.determinant([list(r) for r in self.basis])

    @cached_property
    def gram(self):
        return tuple(tuple(red.dot(u, v) for v in self.basis) for u in self.basis)

    @cached_property
    def inverse(self):
        try:
            return red.inverse([list(r) for r in self.basis])
        except ZeroDivisionError:
            raise SingularBasis("basis is not invertible") from None

    @cached_property
    def reduced(self):
        """``(reduced_rows, U)`` from LLL, with ``reduced_rows = U @ basis``."""
        return red.lll([list(r) for r in self.basis])

    def point(self, coeffs):
        return tuple(red.combine(coeffs, self.basis))

    def coordinates(self, v):
        """Coefficients of ``v`` in this basis (need not be integral)."""
        v = sc.unify(list(v) + [self.basis[0][0]])[:-1]
        inv = self.inverse
        return [red.dot(v, [inv[i][j] for i in range(self.k)]) for j in range(self.k)]

    def contains(self, v):
        return all(_is_integral(c) for c in self.coordinates(v))

    def __eq__(self, other):
        return isinstance(other, Lattice) and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self):
        return f"Lattice({[sc.format_vector(r) for r in self.basis]})"


@dataclass(frozen=True, eq=False)
class AffineLattice:
    """The translate ``lattice + shift``."""

    lattice: Lattice
    shift: tuple

    def __post_init__(self):
        object.__setattr__(self, "shift", _vec(self.shift))
        if len(self.shift) != self.lattice.k:
            raise ValueError("shift has the wrong dimension")

    @property
    def k(self):
        return self.lattice.k

    def point(self, coeffs):
        return tuple(p + c for p, c in zip(self.lattice.point(coeffs), self.shift))

    def __eq__(self, other):
        return (isinstance(other, AffineLattice) and self.lattice == other.lattice
                and self.shift == other.shift)

    def __hash__(self):
        return hash((self.lattice, self.shift))


@dataclass(frozen=True)
class Hyperplane:
    """``H = w^perp`` for a primitive dual vector ``w``; ``covolume_sq = ||w||^2``.

    ``coeffs`` are the integer coordinates of ``w`` in the dual basis of the
    lattice it was built for, i.e. ``coeffs[i] = <basis_i, w>``.
    """

    dual_vector: tuple
    covolume_sq: object
    coeffs: tuple = field(default=(), compare=False)

    @property
    def covolume(self):
        return sc.sqrt(self.covolume_sq)

    def time_part(self, m):
        return self.dual_vector[m:]

    def particle_part(self, m):
        return self.dual_vector[:m]


@dataclass(frozen=True)
class FlowSchedule:
    """Sampled diagonal flow: one step is ``diag(u^-n I_m, u^m I_n)``.

    With ``alpha*beta = u^n`` one step is exactly one full game cycle
    (``T = -m log(alpha*beta)``).
    """

    m: int
    n: int
    u: Fraction

    def __post_init__(self):
        u = sc.to_scalar(self.u)
        if not sc.is_exact(u):
            raise ValueError("flow base u must be rational")
        if not 0 < u < 1:
            raise ValueError("flow base u must lie in (0, 1)")
        if self.m < 1 or self.n < 1:
            raise ValueError("m and n must be positive")
        object.__setattr__(self, "u", u)

    @property
    def k(self):
        return self.m + self.n

    @property
    def expand(self):
        """Per-step particle factor ``e^{T/m} = u^-n``."""
        return self.u ** -self.n

    @property
    def contract(self):
        """Per-step time factor ``e^{-T/n} = u^m``."""
        return self.u ** self.m

    @property
    def T(self):
        return -self.m * self.n * math.log(self.u)

    @classmethod
    def from_alpha_beta(cls, m, n, alpha, beta):
        ab = sc.to_scalar(alpha) * sc.to_scalar(beta)
        u = _rational_root(ab, n)
        if u is None:
            raise ValueError(f"alpha*beta = {ab} is not an n-th power of a rational (n={n})")
        return cls(m, n, u)

    def factors(self, steps):
        return self.u ** (-self.n * steps), self.u ** (self.m * steps)

    def diagonal(self, steps):
        p, t = self.factors(steps)
        return (p,) * self.m + (t,) * self.n

    def step_matrix(self, steps=1):
        d = self.diagonal(steps)
        return [[d[i] if i == j else Fraction(0) for j in range(self.k)] for i in range(self.k)]

    def apply_vector(self, steps, v):
        return tuple(x * f for x, f in zip(v, self.diagonal(steps)))

    def apply_dual(self, steps, w):
        """Flow on dual vectors is the inverse transpose: ``g^-steps``."""
        return self.apply_vector(-steps, w)

    def time(self, steps):
        return steps * self.T

    def bits_lost(self, steps):
        """Bits of float input consumed after ``steps``: ``(m + n) |steps| log2(1/u)``.

        A short vector at that step has ``|q| ~ u^{-m steps}``, and its particle
        part is stretched by ``u^{-n steps}``.
        """
        return self.k * abs(steps) * math.log2(1 / self.u)


def _rational_root(x, n):
    x = Fraction(x)
    if x <= 0:
        return None
    p = round(x.numerator ** (1.0 / n))
    q = round(x.denominator ** (1.0 / n))
    for a in (p - 1, p, p + 1):
        for b in (q - 1, q, q + 1):
            if a > 0 and b > 0 and Fraction(a, b) ** n == x:
                return Fraction(a, b)
    return None


def _is_integral(x):
    if sc.is_exact(x):
        return Fraction(x).denominator == 1
    return abs(x - sc.iround(x)) <= sc.FLOAT_RTOL * max(1, abs(x))


def system_lattice(A, b=None):
    """The affine lattice ``L_A(b) Z^k = {(p + A q - b, q)}``.

    ``A`` is an ``m x n`` matrix (list of rows); basis rows are ``(e_i, 0)``
    for the particle directions and ``(A e_j, e_j)`` for the time directions.
    """
    rows = sc.unify_matrix(A)
    m, n = len(rows), len(rows[0])
    if b is None:
        b = [0] * m
    vals = sc.unify([x for r in rows for x in r] + list(b))
    Aflat, bvec = vals[: m * n], vals[m * n:]
    A_ = [Aflat[i * n:(i + 1) * n] for i in range(m)]
    zero, one = vals[0] * 0, vals[0] * 0 + 1
    basis = []
    for i in range(m):
        basis.append([one if j == i else zero for j in range(m)] + [zero] * n)
    for j in range(n):
        basis.append([A_[i][j] for i in range(m)] + [one if l == j else zero for l in range(n)])
    shift = [-x for x in bvec] + [zero] * n
    return AffineLattice(Lattice(basis), shift)


def dual_lattice(L):
    """Basis of ``L*`` as the inverse transpose; ``(L*)* = L`` exactly."""
    try:
        inv = red.inverse([list(r) for r in L.basis])
    except ZeroDivisionError:
        raise SingularBasis("basis is not invertible") from None
    return Lattice(red.transpose(inv), check=L.check)


def dual_coefficients(L, w):
    """Integer coordinates ``<b_i, w>`` of ``w`` in the dual basis, or NotRational."""
    w = sc.unify(list(w) + [L.basis[0][0]])[:-1]
    cs = [red.dot(b, w) for b in L.basis]
    if not all(_is_integral(c) for c in cs):
        raise NotRational(f"{sc.format_vector(w)} is not in the dual lattice")
    return tuple(sc.iround(c) for c in cs)


def hyperplane(L, w):
    """Build the Hyperplane ``w^perp`` for ``w`` in ``L*``, made primitive."""
    cs = dual_coefficients(L, w)
    g = math.gcd(*cs)
    if g == 0:
        raise ValueError("zero dual vector")
    cs = tuple(c // g for c in cs)
    D = dual_lattice(L)
    wv = D.point(cs)
    return Hyperplane(wv, red.dot(wv, wv), cs)


def covolume_sq(H, L):
    """Squared covolume ``|H|^2 = ||w||^2`` of an ``L``-rational hyperplane."""
    cs = dual_coefficients(L, H.dual_vector)
    if math.gcd(*cs) != 1:
        # a non-primitive w describes the same hyperplane; normalize
        H = hyperplane(L, H.dual_vector)
    w = H.dual_vector
    return red.dot(w, w)


def hyperplane_basis(H, L):
    """A Z-basis of ``H ∩ L`` (k-1 vectors), from the integer kernel of ``coeffs``."""
    cs = dual_coefficients(L, H.dual_vector)
    g = math.gcd(*cs)
    cs = [c // g for c in cs]
    kernel, _, _ = red.integer_kernel_basis(cs)
    return [L.point(c) for c in kernel]


def coset_step(H, L):
    """A lattice vector ``v`` with ``<v, w> = 1`` (it moves ``H`` to the adjacent coset)."""
    cs = dual_coefficients(L, H.dual_vector)
    g = math.gcd(*cs)
    cs = [c // g for c in cs]
    _, u, gg = red.integer_kernel_basis(cs)
    v = L.point(u)
    return v if gg == 1 else tuple(-x for x in v)


def enumerate_small_hyperplanes(L, bound_sq=None):
    """All hyperplanes ``w^perp`` with primitive ``w`` in ``L*`` and ``||w||^2 <= bound_sq``.

    One representative per ``+-w``; sorted by ``(covolume_sq, coeffs)``. The
    default bound is ``k`` (``xi0 = sqrt(k)``).
    """
    if L.k > MAX_DIM:
        raise DimensionTooLarge(f"k = {L.k} > {MAX_DIM}")
    if bound_sq is None:
        bound_sq = L.k
    D = dual_lattice(L)
    red_rows, U = D.reduced
    bound_sq = sc.like(bound_sq, D.basis[0][0])
    if bound_sq <= 0:
        return []
    out = []
    for c in red.enumerate_ball(red_rows, bound_sq, half=True, primitive=True):
        if math.gcd(*c) != 1:
            continue
        orig = [sum(c[i] * U[i][j] for i in range(L.k)) for j in range(L.k)]
        # canonical sign: first nonzero original coefficient positive
        first = next(x for x in orig if x)
        if first < 0:
            orig = [-x for x in orig]
        w = D.point(orig)
        out.append(Hyperplane(w, red.dot(w, w), tuple(orig)))
    out.sort(key=lambda h: (h.covolume_sq, h.coeffs))
    return out


def shortest_dual_sq(L):
    """Smallest ``||w||^2`` over nonzero ``w`` in ``L*``, i.e. ``min_H |H|^2``."""
    D = dual_lattice(L)
    rows, _ = D.reduced
    best = min(red.dot(r, r) for r in rows)
    for c in red.enumerate_ball(rows, best, half=True, primitive=True):
        v = red.combine(c, rows)
        best = min(best, red.dot(v, v))
    return best


def shortest_vector(L):
    """Nonzero lattice vector of minimal sup norm."""
    if L.k > MAX_DIM:
        raise DimensionTooLarge(f"k = {L.k} > {MAX_DIM}")
    rows, U = L.reduced
    zero = rows[0][0] * 0
    c, _ = red.closest_sup(rows, [zero] * L.k, exclude_zero=True)
    v = red.combine(c, rows)
    first = next(x for x in v if x != 0)
    return tuple(-x for x in v) if first < 0 else tuple(v)


def closest_point(X, target):
    """Point of ``X`` minimizing the sup distance to ``target``.

    Ties resolve lexicographically on the coefficients in the reduced basis.
    """
    if X.k > MAX_DIM:
        raise DimensionTooLarge(f"k = {X.k} > {MAX_DIM}")
    rows, U = X.lattice.reduced
    vals = sc.unify(list(target) + list(X.shift))
    t, s = vals[:X.k], vals[X.k:]
    rel = [a - b for a, b in zip(t, s)]
    c, _ = red.closest_sup(rows, rel)
    return tuple(x + y for x, y in zip(red.combine(c, rows), s))


def distance_to_origin(X):
    """Sup distance from the origin to the nearest point of ``X``."""
    p = closest_point(X, [0] * X.k)
    return red.sup_norm(p)


PRECISION_MARGIN = 24


def check_precision(F, steps, X):
    """Raise PrecisionExhausted when a float lattice cannot be flowed ``steps`` far."""
    L = X if isinstance(X, Lattice) else X.lattice
    if not sc.any_float([x for r in L.basis for x in r]):
        return
    need = F.bits_lost(steps) + PRECISION_MARGIN
    if need > sc.get_precision():
        raise PrecisionExhausted(
            f"flowing {steps} steps with u = {F.u} needs about {math.ceil(need)} bits; "
            f"precision is {sc.get_precision()} (raise --precision)")


def apply_flow(F, steps, X):
    """``g^steps`` applied to an AffineLattice (or a plain Lattice)."""
    check_precision(F, steps, X)
    if isinstance(X, Lattice):
        rows = [F.apply_vector(steps, r) for r in X.basis]
        return Lattice(rows, check=X.check)
    rows = [F.apply_vector(steps, r) for r in X.lattice.basis]
    return AffineLattice(Lattice(rows, check=X.lattice.check), F.apply_vector(steps, X.shift))


def translate(X, b):
    """``L_0(b) X``: shift the particle coordinates by ``-b``."""
    b = list(b)
    m = len(b)
    vals = sc.unify(list(X.shift) + b)
    shift, b = vals[:X.k], vals[X.k:]
    return AffineLattice(X.lattice, [s - (b[i] if i < m else 0) for i, s in enumerate(shift)])


def pyramid_volume(H_basis, v):
    """k-volume of the parallelepiped spanned by ``H_basis`` and ``v``."""
    rows = [list(h) for h in H_basis]
    k = len(v)
    if len(rows) != k - 1:
        raise ValueError("need k-1 base vectors")
    if red.gram_det(sc.unify_matrix(rows)) == 0:
        raise DegenerateBase("base vectors are linearly dependent")
    M = sc.unify_matrix(rows + [list(v)])
    return abs(red.determinant(M))
