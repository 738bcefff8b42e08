"""Acceptance gate: one PASS/FAIL line per criterion, with timing.

Run with ``pytest tests/test_acceptance.py -v -s`` or directly with
``python3 tests/test_acceptance.py``. Each criterion checks its numbers
against an independent oracle first, then against the stated target.
Criterion 1 is expected to FAIL; see the notes in the README.
"""

import itertools
import math
import random
import sys
import time
from fractions import Fraction as F
from pathlib import Path

import mpmath
import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conftest import random_unimodular_integer, random_unimodular_rational  # noqa: E402
from schmidt_affine import _reduce as red  # noqa: E402
from schmidt_affine.black import TargetingBlack  # noqa: E402
from schmidt_affine.diophantine import AffineSystem, badness_scan, dani_cross_check, trajectory_minima  # noqa: E402
from schmidt_affine.fractal import (  # noqa: E402
    DecayParams,
    avoid_hyperplanes,
    cantor,
    contains,
    default_decay,
    point_slab,
    unit_box,
    verify_absolute_decay,
)
from schmidt_affine.game import Ball, GameParams, RandomStrategy, run_game, validate_transcript  # noqa: E402
from schmidt_affine.lattice import (  # noqa: E402
    FlowSchedule,
    Lattice,
    coset_step,
    dual_lattice,
    enumerate_small_hyperplanes,
    hyperplane,
    hyperplane_basis,
)
from schmidt_affine.white import (  # noqa: E402
    DIVERGES,
    BadAStrategy,
    BadBStrategy,
    DualKey,
    alpha_for,
    badInf_verify,
)

THIRD = [[F(1, 3)]]


def report(num, title, passed, detail, elapsed, limit):
    ok = passed and elapsed < limit
    line = f"[{'PASS' if ok else 'FAIL'}] #{num:<2} {title}: {detail} ({elapsed:.1f}s, limit {limit}s)"
    return ok, line


def timed(fn):
    t = time.perf_counter()
    passed, detail = fn()
    return passed, detail, time.perf_counter() - t


# --- oracles ----------------------------------------------------------------


def oracle_golden_min(Q):
    """mpmath loop over 0 < |q| <= Q of |q| ||q phi||_Z."""
    phi = (1 + mpmath.sqrt(5)) / 2
    best = None
    for q in range(1, Q + 1):
        x = q * phi
        v = q * abs(x - mpmath.nint(x))
        if best is None or v < best:
            best = v
    return best


def oracle_product_1d(A, b, Q):
    """``min_{1<=q<=Q} q ||qA - b||_Z`` with exact fractions."""
    best = None
    for q in range(1, Q + 1):
        x = q * A - b
        v = q * abs(x - round(x))
        if best is None or v < best:
            best = v
    return best


def brute_small_duals(L, box=10):
    """Primitive dual coefficients (mod sign) in ``[-box, box]^k`` with ``||w||^2 <= k``."""
    D = dual_lattice(L)
    M = np.array([[float(x) for x in r] for r in D.basis])
    grid = np.array(list(itertools.product(range(-box, box + 1), repeat=L.k)), dtype=np.int64)
    W = grid @ M
    keep = grid[(W * W).sum(axis=1) <= L.k + 1e-9]
    out = set()
    for c in map(tuple, keep.tolist()):
        if not any(c) or math.gcd(*c) != 1 or next(x for x in c if x) < 0:
            continue
        w = D.point(c)
        if red.dot(w, w) <= L.k:
            out.add(c)
    return out


# --- criteria ---------------------------------------------------------------


def crit1():
    Q = 10 ** 5
    oracle = oracle_golden_min(Q)
    est = badness_scan(AffineSystem([[(1 + mpmath.sqrt(5)) / 2]], [0]), Q)
    agrees = abs(est.min_product - oracle) < 1e-20
    target = 1 / mpmath.sqrt(5)
    within = abs(est.min_product - target) <= F(2, 100) * target
    detail = (f"min_product={float(est.min_product):.6f} oracle={float(oracle):.6f} target 0.44721 +-2% "
              f"(tail_minimum={float(est.tail_minimum()):.6f}; the minimum sits at q=1, the liminf is 1/sqrt5)")
    return agrees and within, detail


def crit2():
    est = badness_scan(AffineSystem(THIRD, [F(1, 6)]), 1000)
    windows = [(lo, v) for (lo, hi), v, _ in est.window_minima if lo <= 2 ** 9]
    grows = all(v >= F(lo, 6) for lo, v in windows)
    ok = est.min_product == F(1, 6) and est.argmin_q == (1,) and grows and len(windows) == 10
    return ok, f"min_product={est.min_product} argmin_q={est.argmin_q[0]} windows j<=9 all >= 2^j/6: {grows}"


def crit3():
    rng = random.Random(3)
    done = bad = 0
    while done < 200:
        k = 3 + done % 2
        L = Lattice(random_unimodular_rational(k, rng))
        d = [rng.randint(-4, 4) for _ in range(k)]
        if not any(d):
            continue
        H = hyperplane(L, dual_lattice(L).point(d))
        base = [list(v) for v in hyperplane_basis(H, L)]
        spacing_sq = red.gram_det(base + [list(coset_step(H, L))]) / red.gram_det(base)
        bad += spacing_sq * H.covolume_sq != 1
        done += 1
    return bad == 0, f"{done} lattices (k=3,4), spacing^2 * |H|^2 == 1 exactly in {done - bad}"


def crit4():
    rng = random.Random(4)
    done = bad = skipped = 0
    while done < 200:
        k = 3 + done % 2
        L = Lattice(random_unimodular_integer(k, rng, steps=4, mult=1))
        # the box [-10, 10]^k is exhaustive only when every basis vector is short enough
        if max(math.isqrt(int(red.dot(b, b) * k)) + 1 for b in L.basis) > 10:
            skipped += 1
            continue
        got = {h.coeffs for h in enumerate_small_hyperplanes(L)}
        bad += got != brute_small_duals(L)
        done += 1
    return bad == 0, f"{done} lattices (k=3,4) match the [-10,10]^k brute force; {skipped} redrawn (box not exhaustive)"


def crit5():
    F2 = FlowSchedule(1, 1, F(1, 2))
    good = AffineSystem(THIRD, [F(1, 6)])
    hit = AffineSystem(THIRD, [F(1, 3)])
    tg = trajectory_minima(good, F2, 40)
    th = trajectory_minima(hit, F2, 40)
    dg = dani_cross_check(good, F2, 40, 10 ** 4, trajectory=tg)
    dh = dani_cross_check(hit, F2, 40, 10 ** 4, trajectory=th)
    lo = min(d for _, _, d in tg.minima)
    first_small = next((ell for ell, _, d in th.minima if d < F(1, 1000)), None)
    ok = lo >= F(5, 100) and first_small is not None and dg.passed and dh.passed
    return ok, (f"(1/3,1/6) min over l<=40 = {float(lo):.4f}; (1/3,1/3) below 1e-3 at l={first_small}; "
                f"Dani {dg.verdict}/{dh.verdict}")


def crit6():
    rnd = random.Random(6)
    supports = [(unit_box(), Ball([F(1, 2)], F(1, 2))), (cantor(), Ball([F(0)], F(1, 2)))]
    violations = radius_errors = 0
    for s in range(10 ** 4):
        K, start = supports[s % 2]
        a, b = (F(1, rnd.choice([2, 3, 4, 8])) for _ in range(2))
        p = GameParams(a, b, rnd.randrange(0, 5), K, start)
        T = run_game(p, RandomStrategy(), RandomStrategy(), seed=s)
        violations += (not T.valid) + len(validate_transcript(T))
        balls = T.balls()
        expect = [start.radius * (a * b) ** (i // 2) * (a if i % 2 else 1) for i in range(len(balls))]
        radius_errors += [x.radius for x in balls] != expect
        radius_errors += T.limit_radius_bound != (a * b) ** p.rounds * start.radius
    return violations == 0 and radius_errors == 0, f"10^4 games, {violations} violations, {radius_errors} radius mismatches"


def crit7():
    K = unit_box()
    alpha = alpha_for(default_decay(K), 2)
    p = GameParams(alpha, F(1, 4), 30, K, Ball([F(1, 2)], 1))
    w = BadAStrategy(THIRD)
    T = run_game(p, w, TargetingBlack({"A": THIRD}), seed=7)
    if not T.valid:
        return False, f"transcript invalid: {T.violation}"
    c0 = F(T.extra["c0"])
    W = T.rounds[-1][1]
    F_ = p.schedule
    last = w.state.step_of(w.state.J)
    rnd = random.Random(7)
    worst_ratio, min_scan, ledger_bad = None, None, 0
    for _ in range(10):
        b = (W.center[0] + W.radius * F(rnd.randint(-10 ** 6, 10 ** 6), 10 ** 6),)
        traj = trajectory_minima(AffineSystem(THIRD, b), F_, last)
        for e in w.state.ledger:
            for t in range(e.start, (last if e.end is None else min(e.end, last)) + 1):
                bound, actual = e.bound(w.state.frame, t), traj.minima[t][2]
                ledger_bad += bound > actual
                r = F(bound) / actual if actual else None
                worst_ratio = r if worst_ratio is None or (r is not None and r > worst_ratio) else worst_ratio
        P = badness_scan(AffineSystem(THIRD, b), 10 ** 5).min_product
        min_scan = P if min_scan is None else min(min_scan, P)
    ok = c0 > 0 and ledger_bad == 0 and min_scan >= c0
    return ok, (f"alpha={alpha} valid, c0={float(c0):.5f}, min scan over 10 b = {float(min_scan):.5f}, "
                f"ledger bound/actual <= {float(worst_ratio):.3f} ({ledger_bad} violations)")


def crit8():
    K = unit_box()
    alpha = alpha_for(default_decay(K), 1) / 2
    out = []
    ok = True
    for name, black in (("random", RandomStrategy()),
                        ("targeting", TargetingBlack({"b": (F(1, 2),), "m": 1, "n": 1}))):
        p = GameParams(alpha, F(1, 4), 30, K, Ball([F(1, 2)], 1))
        T = run_game(p, BadBStrategy([F(1, 2)]), black, seed=8)
        if not T.valid:
            return False, f"{name}: transcript invalid: {T.violation}"
        A_star = T.limit_center[0]
        c0 = oracle_product_1d(A_star, F(1, 2), 10 ** 4)
        ok = ok and c0 > 0
        out.append(f"{name}: A*={float(A_star):.6f} c0={float(c0):.5f}")
    return ok, "; ".join(out) + " (c0 = realized minimum over 1<=q<=10^4)"


def crit9():
    K = unit_box()
    p = GameParams(alpha_for(default_decay(K), 2), F(1, 4), 30, K, Ball([F(1, 2)], 1))
    T = run_game(p, BadAStrategy(THIRD), TargetingBlack({"A": THIRD}), seed=9)
    F_ = p.schedule
    g = badInf_verify(THIRD, T.limit_center, F_, L=40, Q=2 ** 12)
    key = DualKey((3,), (1,))
    # first step where the time-free hyperplane (a = 3) attains the minimum
    start = next(s for s, c in g.covolumes if c == sum(x * x for x in F_.apply_dual(s, (3, 0))))
    rate = F_.u ** (2 * F_.m)
    exact = all(r == rate for r in g.ratios[start:])
    ok = T.valid and exact and g.verdict == DIVERGES
    return ok, (f"u={F_.u}: |g H|^2 ratio == u^(2m) exactly for steps {start}..40 (transient before: "
                f"{[str(r) for r in g.ratios[:start]]}), key {key.a}, verdict {g.verdict}")


def crit10():
    K = cantor()
    decay = default_decay(K)
    alpha = alpha_for(decay, 2)
    rnd = random.Random(10)
    failures = 0
    for _ in range(10 ** 3):
        x = [sum(F(2 * rnd.randrange(2), 3 ** (i + 1)) for i in range(12))]
        r = F(1, 3 ** rnd.randrange(0, 6))
        planes = [point_slab(x[0] + r * F(rnd.randrange(-100, 101), 100), 2 * alpha * r)
                  for _ in range(rnd.randrange(0, 6))]
        y = avoid_hyperplanes(K, decay, x, r, alpha, planes)
        failures += not (contains(K, y) and abs(y[0] - x[0]) <= r * (1 - alpha) and all(pl.clears(y) for pl in planes))
    good = verify_absolute_decay(K, DecayParams(4, mpmath.log(2) / mpmath.log(3)), 10 ** 4, seed=10)
    bad = verify_absolute_decay(K, DecayParams(4, 1), 10 ** 4, seed=10)
    ce = bad.counterexample
    ok = failures == 0 and good.passed and not bad.passed and ce is not None and ce["measure_ratio"] > ce["bound"]
    detail = (f"10^3 avoid instances, {failures} failures; decay (4, log2/log3) {good.verdict} "
              f"max ratio {good.max_ratio:.3f}; (4, 1) {bad.verdict}")
    if ce:
        detail += f" at x={ce['x'][0]:.5f} r={ce['r']:.2e} eps={ce['eps']:.2e}"
    return ok, detail


CRITERIA = [
    (1, "golden badness", crit1, 10),
    (2, "affine exact case", crit2, 1),
    (3, "coset spacing", crit3, 30),
    (4, "small-hyperplane enumeration", crit4, 60),
    (5, "Dani cross-check", crit5, 10),
    (6, "referee fuzz", crit6, 60),
    (7, "Bad_A end-to-end", crit7, 120),
    (8, "Bad^b end-to-end", crit8, 120),
    (9, "Bad^infinity growth", crit9, 30),
    (10, "fractal avoidance and decay", crit10, 60),
]


@pytest.mark.parametrize("num,title,fn,limit", CRITERIA, ids=[f"criterion{c[0]}" for c in CRITERIA])
def test_criterion(num, title, fn, limit, capsys):
    passed, detail, elapsed = timed(fn)
    ok, line = report(num, title, passed, detail, elapsed, limit)
    with capsys.disabled():
        print("\n" + line)
    assert ok, line


if __name__ == "__main__":
    results = []
    for num, title, fn, limit in CRITERIA:
        passed, detail, elapsed = timed(fn)
        ok, line = report(num, title, passed, detail, elapsed, limit)
        print(line, flush=True)
        results.append(ok)
    print(f"{sum(results)}/{len(results)} criteria passed")
