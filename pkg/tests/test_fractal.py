import math
import random
from fractions import Fraction as F

import pytest

from schmidt_affine.exceptions import EmptyIntersection, NotFound
from schmidt_affine.fractal import (
    DecayParams,
    Slab,
    SupportSpec,
    alpha_bound,
    avoid_hyperplanes,
    cantor,
    contains,
    default_decay,
    fitting_count,
    measure_of_level,
    open_set_spot_check,
    point_on_K_in_ball,
    point_slab,
    sierpinski,
    unit_box,
    verify_absolute_decay,
)

CANTOR = cantor()
# loose constants so the alpha <= 1/10 examples satisfy the preconditions
LOOSE = DecayParams(F(1, 2), 1)


def in_cantor(x):
    """Ternary-digit oracle for rationals: iterate x -> 3x or 3x - 2 until a repeat."""
    seen = set()
    while x not in seen:
        if x < 0 or x > 1:
            return False
        seen.add(x)
        if x <= F(1, 3):
            x = 3 * x
        elif x >= F(2, 3):
            x = 3 * x - 2
        else:
            return False
    return True


def random_cantor_point(rnd, depth=12):
    return sum(F(2 * rnd.randrange(2), 3 ** (i + 1)) for i in range(depth))


def test_cantor_oracle_agrees_with_membership():
    rnd = random.Random(3)
    pts = [F(rnd.randrange(0, 3 ** 6 + 1), 3 ** 6) for _ in range(200)] + [F(1, 4), F(3, 4), F(1, 2), F(1, 10)]
    for x in pts:
        assert contains(CANTOR, [x]) == in_cantor(x), x


def test_point_on_box():
    assert point_on_K_in_ball(unit_box(), [F(1, 2)], F(1, 4)) == (F(1, 2),)
    assert point_on_K_in_ball(unit_box(), [F(5, 4)], F(1, 2)) == (F(1),)
    with pytest.raises(EmptyIntersection):
        point_on_K_in_ball(unit_box(), [F(2)], F(1, 2))


def test_point_on_cantor():
    y = point_on_K_in_ball(CANTOR, [F(1, 2)], F(1, 2))
    assert in_cantor(y[0]) and abs(y[0] - F(1, 2)) <= F(1, 2)
    with pytest.raises(EmptyIntersection):
        point_on_K_in_ball(CANTOR, [F(1, 2)], F(1, 100))


def test_point_on_cantor_random():
    rnd = random.Random(5)
    for _ in range(200):
        x = F(rnd.randrange(0, 1000), 999)
        r = F(1, rnd.choice([3, 9, 27, 81, 200]))
        try:
            y = point_on_K_in_ball(CANTOR, [x], r)
        except EmptyIntersection:
            # cross-check emptiness on a fine rational grid
            lo, hi = x - r, x + r
            assert not any(in_cantor(lo + (hi - lo) * F(i, 400)) for i in range(401))
            continue
        assert in_cantor(y[0]) and abs(y[0] - x) <= r


def test_alpha_bound_values():
    assert alpha_bound(DecayParams(2, 1), 2) == F(1, 32)
    assert alpha_bound(DecayParams(1, 1), 2) == F(1, 16)
    assert abs(alpha_bound(DecayParams(2, 1000), 2) - F(1, 4)) < 1e-2


def test_avoid_box_example():
    y = avoid_hyperplanes(unit_box(2), DecayParams(2, 1), [F(1, 2)] * 2, F(1, 2), F(1, 64),
                          [Slab((1, 0), F(1, 2), F(1, 64))])
    assert abs(y[0] - F(1, 2)) > F(1, 64)
    assert max(abs(v - F(1, 2)) for v in y) <= F(1, 2) * F(63, 64)


def test_avoid_cantor_example():
    y = avoid_hyperplanes(CANTOR, LOOSE, [F(1, 2)], F(1, 2), F(1, 10), [point_slab(F(1, 3), F(1, 20))])
    assert in_cantor(y[0])
    assert abs(y[0] - F(1, 3)) > F(1, 20)
    assert abs(y[0] - F(1, 2)) <= F(9, 20)


def test_avoid_preconditions_reported():
    d = default_decay(CANTOR)
    with pytest.raises(NotFound) as exc:
        avoid_hyperplanes(CANTOR, d, [F(0)], 1, F(1, 10), [])
    assert "alpha" in exc.value.violated
    with pytest.raises(NotFound) as exc:
        avoid_hyperplanes(CANTOR, d, [F(0)], 1, F(1, 1024), [point_slab(0, F(1, 10))])
    assert "eps" in exc.value.violated
    with pytest.raises(NotFound) as exc:
        avoid_hyperplanes(CANTOR, d, [F(0)], 1, F(1, 1024), [point_slab(F(i, 7), F(1, 10 ** 6)) for i in range(6)])
    assert "planes" in exc.value.violated


@pytest.mark.parametrize("K,decay,alpha", [
    (CANTOR, default_decay(CANTOR), F(1, 1024)),
    (unit_box(), DecayParams(2, 1), F(1, 64)),
])
def test_avoid_randomized(K, decay, alpha):
    rnd = random.Random(11)
    for _ in range(300):
        x = [random_cantor_point(rnd)] if not K.is_box else [F(rnd.randrange(0, 101), 100)]
        r = F(1, 3 ** rnd.randrange(0, 6))
        planes = [point_slab(x[0] + r * F(rnd.randrange(-100, 101), 100), 2 * alpha * r)
                  for _ in range(rnd.randrange(0, 6))]
        y = avoid_hyperplanes(K, decay, x, r, alpha, planes)
        assert contains(K, y) and (K.is_box or in_cantor(y[0]))
        assert abs(y[0] - x[0]) <= r * (1 - alpha)
        assert all(abs(y[0] - p.offset) > p.eps for p in planes)


def test_avoid_sierpinski_two_dims():
    K = sierpinski()
    decay = DecayParams(F(4), 1)
    alpha = F(1, 1024)
    rnd = random.Random(2)
    for _ in range(50):
        x = (F(0), F(0))
        r = F(1, 2 ** rnd.randrange(0, 4))
        planes = [Slab((rnd.randint(-3, 3) or 1, rnd.randint(-3, 3)), F(rnd.randint(-5, 5), 16), 2 * alpha * r)
                  for _ in range(rnd.randrange(0, 5))]
        y = avoid_hyperplanes(K, decay, x, r, alpha, planes, k=2)
        assert contains(K, y)
        assert max(abs(a - b) for a, b in zip(x, y)) <= r * (1 - alpha)
        assert all(p.clears(y) for p in planes)


def test_decay_box_exact_pass():
    rep = verify_absolute_decay(unit_box(), DecayParams(2, 1), 2000, seed=1)
    assert rep.passed and rep.max_ratio <= 1 + 1e-12


def test_decay_cantor_pass_and_fail():
    good = verify_absolute_decay(CANTOR, default_decay(CANTOR), 2000, seed=2)
    assert good.passed
    bad = verify_absolute_decay(CANTOR, DecayParams(4, 1), 2000, seed=2)
    assert not bad.passed
    ce = bad.counterexample
    assert ce["measure_ratio"] > ce["bound"]


def test_decay_counterexample_is_real():
    # slab centered on a point of K: the Cantor mass of a thin interval is ~ (eps/r)^s, not eps/r
    bad = verify_absolute_decay(CANTOR, DecayParams(4, 1), 500, seed=9)
    ce = bad.counterexample
    r, eps = ce["r"], ce["eps"]
    assert ce["measure_ratio"] >= (eps / r) ** (math.log(2) / math.log(3)) / 16


def test_decay_reproducible():
    a = verify_absolute_decay(CANTOR, default_decay(CANTOR), 200, seed=4)
    b = verify_absolute_decay(CANTOR, default_decay(CANTOR), 200, seed=4)
    assert a == b


def test_fitting_counts():
    assert fitting_count(unit_box(), F(1, 4), [F(1, 2)], F(1, 4)) >= 2
    assert fitting_count(CANTOR, F(1, 9), [F(0)], F(1)) >= 4
    assert fitting_count(CANTOR, F(99, 100), [F(0)], F(1)) == 1
    assert fitting_count(unit_box(), F(99, 100), [F(1, 2)], F(1, 4)) == 1


def test_fitting_grows_like_power():
    # N(beta) >= M beta^{-s} with M = 1/2 on the Cantor set
    s = math.log(2) / math.log(3)
    for j in range(1, 5):
        beta = F(1, 3 ** j)
        assert fitting_count(CANTOR, beta, [F(0)], F(1)) >= 0.5 * float(beta) ** (-s)


@pytest.mark.parametrize("K", [CANTOR, sierpinski(),
                               SupportSpec.ifs([(F(1, 2), [0]), (F(1, 4), [F(3, 4)])])])
def test_measure_normalization(K):
    for depth in range(5):
        total = sum(measure_of_level(K, depth))
        assert abs(total - 1) < 1e-30


def test_open_set_condition_examples():
    assert open_set_spot_check(CANTOR)
    assert open_set_spot_check(sierpinski())
    assert not open_set_spot_check(SupportSpec.ifs([(F(2, 3), [0]), (F(2, 3), [F(1, 3)])]))


def test_support_roundtrip():
    for K in (CANTOR, unit_box(2), sierpinski()):
        assert SupportSpec.from_dict(K.to_dict()) == K
