import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import random_unimodular_integer, random_unimodular_rational
from schmidt_affine import _reduce as red
from schmidt_affine.exceptions import DegenerateBase, NotRational, SingularBasis
from schmidt_affine.lattice import (
    AffineLattice,
    FlowSchedule,
    Hyperplane,
    Lattice,
    apply_flow,
    closest_point,
    coset_step,
    covolume_sq,
    dual_lattice,
    enumerate_small_hyperplanes,
    hyperplane,
    hyperplane_basis,
    pyramid_volume,
    shortest_dual_sq,
    shortest_vector,
    system_lattice,
    translate,
)

Z2 = Lattice([[1, 0], [0, 1]])
DIAG = Lattice([[F(1, 2), 0], [0, 2]])


def coefficient_box(L):
    """|<b_i, w>| <= ||b_i|| sqrt(k) for ||w||^2 <= k, so this box is exhaustive."""
    return max(math.isqrt(int(red.dot(b, b) * L.k)) + 1 for b in L.basis)


def brute_small_duals(L, bound_sq, box):
    """Primitive dual coefficient vectors (mod sign) with ||w||^2 <= bound_sq."""
    D = np.array([[float(x) for x in r] for r in dual_lattice(L).basis])
    grid = np.array(list(itertools.product(range(-box, box + 1), repeat=L.k)), dtype=np.int64)
    W = grid @ D
    keep = grid[(W * W).sum(axis=1) <= float(bound_sq) + 1e-9]
    out = set()
    for c in map(tuple, keep.tolist()):
        if not any(c) or math.gcd(*c) != 1:
            continue
        if next(x for x in c if x) < 0:
            continue
        w = dual_lattice(L).point(c)
        if red.dot(w, w) <= bound_sq:
            out.add(c)
    return out


# --- covolume_sq -----------------------------------------------------------

def test_covolume_unit_hyperplane():
    H = Hyperplane((F(0), F(1)), F(1))  # span{e1} = (0,1)^perp
    assert covolume_sq(H, Z2) == 1


def test_covolume_diagonal_lattice():
    H = hyperplane(DIAG, (0, F(1, 2)))  # x-axis
    assert covolume_sq(H, DIAG) == F(1, 4)
    assert hyperplane_basis(H, DIAG) in ([(F(1, 2), F(0))], [(F(-1, 2), F(0))])


def test_covolume_not_rational():
    with pytest.raises(NotRational):
        covolume_sq(Hyperplane((F(1, 3), F(0)), F(1, 9)), Z2)


def _oracle_covolume_sq_3d(L, coeffs, box=6):
    # vectors of L in H, then the smallest positive Gram determinant of a pair
    vecs = [L.point(c) for c in itertools.product(range(-box, box + 1), repeat=3)
            if any(c) and sum(a * b for a, b in zip(c, coeffs)) == 0]
    best = None
    for u, v in itertools.combinations(vecs[: 400], 2):
        g = red.gram_det([list(u), list(v)])
        if g > 0 and (best is None or g < best):
            best = g
    return best


def test_covolume_matches_gram_brute_force(rng):
    for _ in range(5):
        L = Lattice(random_unimodular_integer(3, rng, steps=3, mult=1))
        d = [rng.randint(-2, 2) for _ in range(3)]
        if not any(d) or math.gcd(*d) != 1:
            d = [1, 0, 0]
        H = hyperplane(L, dual_lattice(L).point(d))
        assert covolume_sq(H, L) == _oracle_covolume_sq_3d(L, H.coeffs)
        assert covolume_sq(H, L) == red.gram_det([list(v) for v in hyperplane_basis(H, L)])


# --- dual_lattice ----------------------------------------------------------

def test_dual_examples():
    assert dual_lattice(Lattice([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == Lattice([[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert dual_lattice(DIAG) == Lattice([[2, 0], [0, F(1, 2)]])


def test_dual_pairings_integral_and_involution(rng):
    for _ in range(10):
        L = Lattice(random_unimodular_rational(4, rng))
        D = dual_lattice(L)
        for v in L.basis:
            for w in D.basis:
                assert F(red.dot(v, w)).denominator == 1
        assert dual_lattice(D) == L


def test_dual_singular():
    with pytest.raises(SingularBasis):
        dual_lattice(Lattice([[1, 1], [1, 1]], check=False))


# --- enumerate_small_hyperplanes ---------------------------------------------

def test_enumerate_Z2():
    hs = enumerate_small_hyperplanes(Z2, 2)
    assert {h.dual_vector for h in hs} == {(1, 0), (0, 1), (1, 1), (1, -1)}
    assert {h.coeffs for h in hs} == brute_small_duals(Z2, 2, 2)


def test_enumerate_diagonal():
    hs = enumerate_small_hyperplanes(DIAG, 2)
    assert [h.dual_vector for h in hs] == [(0, F(1, 2))]
    assert hs[0].covolume_sq == F(1, 4)
    assert {h.coeffs for h in hs} == brute_small_duals(DIAG, 2, 2)


def test_enumerate_tiny_bound_is_empty():
    assert enumerate_small_hyperplanes(Z2, F(1, 10 ** 9)) == []
    assert enumerate_small_hyperplanes(DIAG, F(1, 10 ** 9)) == []


def test_enumerate_skewed_lattice_is_fast():
    # after 40 flow steps the dual has a vector of length 3 * 2^-40
    X = apply_flow(FlowSchedule(1, 1, F(1, 2)), 40, system_lattice([[F(1, 3)]]))
    hs = enumerate_small_hyperplanes(X.lattice)
    assert [h.dual_vector for h in hs] == [(F(3, 2 ** 40), F(0))]


def test_enumerate_matches_brute_force_random(rng):
    for k in (3, 4):
        for _ in range(8):
            L = Lattice(random_unimodular_integer(k, rng, steps=4, mult=1))
            got = {h.coeffs for h in enumerate_small_hyperplanes(L)}
            assert got == brute_small_duals(L, k, coefficient_box(L))


def test_dual_correspondence(rng):
    L = Lattice(random_unimodular_rational(3, rng))
    for H in enumerate_small_hyperplanes(L):
        basis = hyperplane_basis(H, L)
        assert red.gram_det([list(v) for v in basis]) == H.covolume_sq


# --- shortest_vector / closest_point ---------------------------------------

def test_shortest_vector_examples():
    assert red.sup_norm(shortest_vector(Z2)) == 1
    assert shortest_vector(DIAG) == (F(1, 2), 0)
    L = Lattice([[1, F(9, 10)], [0, 1]])
    brute = min(red.sup_norm(L.point(c)) for c in itertools.product(range(-20, 21), repeat=2) if any(c))
    assert brute == 1
    assert red.sup_norm(shortest_vector(L)) == brute


def test_shortest_vector_random_brute_force(rng):
    for _ in range(10):
        L = Lattice(random_unimodular_rational(3, rng))
        brute = min(red.sup_norm(L.point(c)) for c in itertools.product(range(-5, 6), repeat=3) if any(c))
        v = shortest_vector(L)
        assert L.contains(v) and any(v)
        assert red.sup_norm(v) == brute


def test_closest_point_examples():
    X = AffineLattice(Z2, (F(3, 10), F(2, 5)))
    p = closest_point(X, (0, 0))
    assert p == (F(3, 10), F(2, 5)) and red.sup_norm(p) == F(2, 5)
    assert closest_point(AffineLattice(Z2, (0, 0)), (0, 0)) == (0, 0)


def test_closest_point_random_brute_force(rng):
    for _ in range(10):
        L = Lattice(random_unimodular_rational(3, rng))
        shift = [F(rng.randint(-9, 9), 10) for _ in range(3)]
        target = [F(rng.randint(-9, 9), 7) for _ in range(3)]
        X = AffineLattice(L, shift)
        p = closest_point(X, target)
        # every point within sup distance R of target has coefficients in this box
        R = red.sup_norm([a - t for a, t in zip(p, target)])
        center = L.coordinates([t - s for t, s in zip(target, shift)])
        inv = L.inverse
        ranges = []
        for j in range(3):
            w = R * sum(abs(inv[i][j]) for i in range(3))
            ranges.append(range(math.floor(center[j] - w), math.ceil(center[j] + w) + 1))
        brute = min(red.sup_norm([a - t for a, t in zip(X.point(c), target)])
                    for c in itertools.product(*ranges))
        assert L.contains([a - s for a, s in zip(p, shift)])
        assert red.sup_norm([a - t for a, t in zip(p, target)]) == brute


# --- apply_flow --------------------------------------------------------------

FLOW = FlowSchedule(1, 1, F(1, 2))


def test_flow_single_step_point():
    assert FLOW.apply_vector(1, (F(1, 10), 8)) == (F(1, 5), 4)
    X = AffineLattice(Z2, (F(1, 10), 8))
    assert apply_flow(FLOW, 1, X).shift == (F(1, 5), 4)


def test_flow_identity_and_group():
    X = system_lattice([[F(1, 3)]], [F(1, 6)])
    assert apply_flow(FLOW, 0, X) == X
    assert apply_flow(FLOW, -3, apply_flow(FLOW, 3, X)) == X
    assert apply_flow(FLOW, 3, X).lattice.det == 1


def test_flow_factors():
    f = FlowSchedule(2, 3, F(2, 3))
    p, t = f.factors(1)
    assert p ** f.m * t ** f.n == 1
    assert f.expand == F(2, 3) ** -3 and f.contract == F(2, 3) ** 2
    assert math.isclose(math.exp(f.T / f.m), float(f.expand))
    assert FlowSchedule.from_alpha_beta(1, 2, F(1, 8), F(1, 2)).u == F(1, 4)


@pytest.mark.parametrize("steps", [1, 2, 5, -2])
def test_conjugation_identity(steps):
    A, b = [[F(2, 7)]], [F(3, 11)]
    base = system_lattice(A)
    lhs = apply_flow(FLOW, steps, translate(base, b))
    p, _ = FLOW.factors(steps)
    rhs = translate(apply_flow(FLOW, steps, base), [p * b[0]])
    assert lhs == rhs


# --- pyramid_volume -----------------------------------------------------------

def test_pyramid_examples():
    assert pyramid_volume([(1, 0)], (0, 1)) == 1
    assert pyramid_volume([(1, 0, 0), (0, 1, 0)], (3, 4, 0)) == 0
    with pytest.raises(DegenerateBase):
        pyramid_volume([(1, 0, 0), (2, 0, 0)], (0, 0, 1))


def test_pyramid_cross_check_and_flow_invariance(rng):
    f = FlowSchedule(2, 1, F(1, 3))
    for _ in range(20):
        base = [tuple(F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(3)) for _ in range(2)]
        v = tuple(F(rng.randint(-5, 5), rng.randint(1, 4)) for _ in range(3))
        if red.gram_det([list(b) for b in base]) == 0:
            continue
        vol = pyramid_volume(base, v)
        # volume^2 = gram(base + v) = gram(base) * dist(v, span)^2
        assert vol ** 2 == red.gram_det([list(b) for b in base] + [list(v)])
        flowed = pyramid_volume([f.apply_vector(2, b) for b in base], f.apply_vector(2, v))
        assert flowed == vol


# --- invariants ----------------------------------------------------------------

def test_coset_spacing_lemma(rng):
    for k in (3, 4):
        for _ in range(10):
            L = Lattice(random_unimodular_rational(k, rng))
            d = [rng.randint(-3, 3) for _ in range(k)]
            if not any(d):
                continue
            H = hyperplane(L, dual_lattice(L).point(d))
            base = [list(v) for v in hyperplane_basis(H, L)]
            v = coset_step(H, L)
            spacing_sq = red.gram_det(base + [list(v)]) / red.gram_det(base)
            assert spacing_sq * red.gram_det(base) == 1
            assert spacing_sq * H.covolume_sq == 1


def test_independent_vectors_have_a_long_one(rng):
    # Euclidean length: the sup-norm version fails for rotated lattices
    rot = Lattice([[F(3, 5), F(4, 5)], [F(-4, 5), F(3, 5)]])
    assert max(red.sup_norm(v) for v in rot.basis) < 1
    for _ in range(30):
        L = Lattice(random_unimodular_rational(3, rng))
        C = random_unimodular_integer(3, rng, steps=2, mult=1)
        C[0] = [x * rng.choice([1, 2]) for x in C[0]]
        vecs = [L.point(c) for c in C]
        assert max(red.dot(v, v) for v in vecs) >= 1


@pytest.mark.parametrize("A", [[[F(1, 3)]], [[F(2, 5), F(1, 7)]], [[F(1, 2)], [F(1, 3)]], [[0]]])
def test_covolume_dichotomy(A):
    m, n = len(A), len(A[0])
    f = FlowSchedule(m, n, F(1, 2))
    base = system_lattice(A).lattice
    D = dual_lattice(base)
    for c in itertools.product(range(-2, 3), repeat=m + n):
        if not any(c) or math.gcd(*c) != 1:
            continue
        w = D.point(c)
        seq = [red.dot(x, x) for x in (f.apply_dual(l, w) for l in range(41))]
        diffs = [b - a for a, b in zip(seq, seq[1:])]
        tail = diffs[10:]
        assert all(d < 0 for d in tail) or all(d > 0 for d in tail)
        to_zero = all(d < 0 for d in tail)
        assert to_zero == (not any(w[m:]))


def test_shortest_dual_sq():
    assert shortest_dual_sq(Z2) == 1
    assert shortest_dual_sq(DIAG) == F(1, 4)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.fractions(min_value=-3, max_value=3, max_denominator=9), min_size=2, max_size=2))
def test_flow_preserves_unimodularity(shift):
    X = AffineLattice(DIAG, shift)
    for s in (1, 4, -3):
        Y = apply_flow(FLOW, s, X)
        assert abs(Y.lattice.det) == 1
