"""Low-dimensional lattice reduction and exhaustive enumeration.

Everything here works on plain lists of Scalars (rows are vectors) and is
exact in rational mode. Dimensions are small (k <= 8), so the textbook LLL
with full Gram-Schmidt recomputation is fast enough and easy to audit.
"""

from fractions import Fraction
from itertools import combinations

from . import scalar as sc


def dot(u, v):
    return sum((a * b for a, b in zip(u, v)), start=sc.like(0, u[0]) if u else 0)


def sup_norm(v):
    return max((abs(x) for x in v), default=0)


def l1_norm(v):
    return sum((abs(x) for x in v), start=sc.like(0, v[0]) if v else 0)


def combine(coeffs, rows):
    """Integer combination ``sum c_i rows[i]``."""
    k = len(rows[0])
    out = [sc.like(0, rows[0][0])] * k
    for c, r in zip(coeffs, rows):
        if c:
            out = [o + c * x for o, x in zip(out, r)]
    return out


def gram_schmidt(rows):
    """Return ``(bstar, mu, bstar_sq)`` for the row basis ``rows``."""
    n = len(rows)
    bstar, bsq = [], []
    mu = [[sc.like(0, rows[0][0])] * n for _ in range(n)]
    for i, b in enumerate(rows):
        v = list(b)
        for j in range(i):
            mu[i][j] = dot(b, bstar[j]) / bsq[j]
            v = [x - mu[i][j] * y for x, y in zip(v, bstar[j])]
        bstar.append(v)
        bsq.append(dot(v, v))
    return bstar, mu, bsq


def lll(rows, delta=Fraction(3, 4)):
    """LLL-reduce a row basis.

    Returns ``(reduced, U)`` with ``reduced = U @ rows`` and ``U`` an integer
    unimodular matrix (list of lists of ints).
    """
    b = [list(r) for r in rows]
    n = len(b)
    U = [[int(i == j) for j in range(n)] for i in range(n)]
    delta = sc.like(delta, b[0][0])
    bstar, mu, bsq = gram_schmidt(b)
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            q = sc.iround(mu[k][j])
            if q:
                b[k] = [x - q * y for x, y in zip(b[k], b[j])]
                U[k] = [x - q * y for x, y in zip(U[k], U[j])]
                for i in range(j + 1):
                    mu[k][i] -= q * (mu[j][i] if i < j else 1)
        if bsq[k] >= (delta - mu[k][k - 1] ** 2) * bsq[k - 1]:
            k += 1
        else:
            b[k], b[k - 1] = b[k - 1], b[k]
            U[k], U[k - 1] = U[k - 1], U[k]
            bstar, mu, bsq = gram_schmidt(b)
            k = max(k - 1, 1)
    return b, U


def _gs_coords(target, bstar, bsq):
    return [dot(target, bs) / q for bs, q in zip(bstar, bsq)]


def _interval(center, rem, qsq):
    """Integers ``c`` with ``(c - center)^2 * qsq <= rem`` (exact filter)."""
    if rem < 0:
        return []
    s = sc.sqrt(sc.to_mpf(rem) / sc.to_mpf(qsq))
    lo = sc.ifloor(sc.to_mpf(center) - s) - 1
    hi = sc.iceil(sc.to_mpf(center) + s) + 1
    return [c for c in range(lo, hi + 1) if (c - center) ** 2 * qsq <= rem]


def enumerate_ball(rows, radius_sq, target=None, half=False, primitive=False):
    """Yield integer coefficient tuples ``c`` with ``|c.rows - target|^2 <= radius_sq``.

    With ``half`` only one of ``+-c`` is produced and the zero vector is
    skipped (target must be zero). With ``primitive`` the innermost level is
    restricted to coefficient 1 when all outer coefficients vanish, which is
    what keeps enumeration finite-cost on very skewed lattices.
    """
    n = len(rows)
    zero = sc.like(0, rows[0][0])
    bstar, mu, bsq = gram_schmidt(rows)
    tstar = _gs_coords(target, bstar, bsq) if target is not None else [zero] * n
    radius_sq = sc.like(radius_sq, zero)
    coeffs = [0] * n

    def rec(j, partial, all_zero):
        center = tstar[j] - sum((coeffs[i] * mu[i][j] for i in range(j + 1, n)), start=zero)
        rem = radius_sq - partial
        if half and all_zero and j == 0 and primitive:
            cands = [1] if (1 - center) ** 2 * bsq[0] <= rem else []
        else:
            cands = _interval(center, rem, bsq[j])
            if half and all_zero:
                cands = [c for c in cands if c >= 0]
        for c in cands:
            coeffs[j] = c
            p = partial + (c - center) ** 2 * bsq[j]
            if j == 0:
                if half and all_zero and c == 0:
                    continue
                yield tuple(coeffs)
            else:
                yield from rec(j - 1, p, all_zero and c == 0)
        coeffs[j] = 0

    yield from rec(n - 1, zero, True)


def _min_sup_1d(y, a):
    """Real ``c`` minimizing ``max_l |y_l + c a_l|`` (a convex piecewise-linear map)."""
    zero = sc.like(0, y[0])
    cands = [zero]
    idx = range(len(y))
    for l in idx:
        if a[l] != 0:
            cands.append(-y[l] / a[l])
    for l, j in combinations(idx, 2):
        if a[l] != a[j]:
            cands.append((y[j] - y[l]) / (a[l] - a[j]))
        if a[l] != -a[j]:
            cands.append(-(y[j] + y[l]) / (a[l] + a[j]))

    def f(c):
        return max(abs(yy + c * aa) for yy, aa in zip(y, a))

    return min(cands, key=f)


def closest_sup(rows, target, exclude_zero=False):
    """Lattice point (as coefficients) minimizing the sup distance to ``target``.

    Euclidean Fincke-Pohst over the outer levels with radius ``sqrt(k)*R``
    (``R`` the best sup distance so far), and an exact one-dimensional convex
    minimization on the innermost level. Ties resolve to the lexicographically
    smallest coefficient tuple (for ``exclude_zero``: fewest coefficients
    first, then lexicographic). Returns ``(coeffs, sup_distance)``.
    """
    n = len(rows)
    k = len(rows[0])
    zero = sc.like(0, rows[0][0])
    bstar, mu, bsq = gram_schmidt(rows)
    tstar = _gs_coords(target, bstar, bsq)

    best = {"val": None, "coeffs": None, "key": None}

    def consider(cs):
        if exclude_zero and not any(cs):
            return
        v = combine(cs, rows)
        d = sup_norm([x - t for x, t in zip(v, target)])
        key = (sum(map(abs, cs)), cs) if exclude_zero else cs
        if best["val"] is None or d < best["val"] or (d == best["val"] and key < best["key"]):
            best["val"], best["coeffs"], best["key"] = d, cs, key

    # Babai-style seed from rounding GS coordinates top-down
    seed = [0] * n
    for j in range(n - 1, -1, -1):
        center = tstar[j] - sum((seed[i] * mu[i][j] for i in range(j + 1, n)), start=zero)
        seed[j] = sc.iround(center)
    consider(tuple(seed))
    if exclude_zero:
        for i in range(n):
            consider(tuple(int(i == j) for j in range(n)))

    coeffs = [0] * n

    def rec(j, partial):
        center = tstar[j] - sum((coeffs[i] * mu[i][j] for i in range(j + 1, n)), start=zero)
        rem = k * best["val"] ** 2 - partial
        if j == 0:
            y = combine([0] + coeffs[1:], rows)
            y = [a - t for a, t in zip(y, target)]
            c_real = _min_sup_1d(y, rows[0])
            fl = sc.ifloor(c_real)
            for c in sorted({fl - 1, fl, fl + 1, fl + 2}):
                coeffs[0] = c
                consider(tuple(coeffs))
            coeffs[0] = 0
            return
        for c in _interval(center, rem, bsq[j]):
            coeffs[j] = c
            p = partial + (c - center) ** 2 * bsq[j]
            # radius may have shrunk since the interval was built
            if p <= k * best["val"] ** 2:
                rec(j - 1, p)
        coeffs[j] = 0

    rec(n - 1, zero)
    return best["coeffs"], best["val"]


def integer_kernel_basis(d):
    """Z-basis of ``{c in Z^k : c . d = 0}`` for a primitive integer vector ``d``.

    Column operations reduce ``d`` to ``(g, 0, ..., 0)``; the transformed
    unit vectors for the zero slots span the kernel.
    """
    k = len(d)
    d = list(d)
    V = [[int(i == j) for j in range(k)] for i in range(k)]  # columns of V are V[.][j]
    # gather gcd into position 0 via pairwise extended Euclid on columns
    for j in range(1, k):
        while d[j] != 0:
            q = d[0] // d[j]
            d[0], d[j] = d[j], d[0] - q * d[j]
            for row in V:
                row[0], row[j] = row[j], row[0] - q * row[j]
    return [[V[i][j] for i in range(k)] for j in range(1, k)], [V[i][0] for i in range(k)], d[0]


def determinant(M):
    """Exact determinant by fraction-free-ish Gaussian elimination."""
    n = len(M)
    A = [list(r) for r in M]
    one = sc.like(1, A[0][0]) if n else Fraction(1)
    det = one
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i] != 0), None)
        if piv is None:
            return one * 0
        if piv != i:
            A[i], A[piv] = A[piv], A[i]
            det = -det
        det *= A[i][i]
        for r in range(i + 1, n):
            f = A[r][i] / A[i][i]
            if f:
                A[r] = [x - f * y for x, y in zip(A[r], A[i])]
    return det


def inverse(M):
    """Exact inverse by Gauss-Jordan; raises ZeroDivisionError if singular."""
    n = len(M)
    one = sc.like(1, M[0][0])
    A = [list(r) + [one * int(i == j) for j in range(n)] for i, r in enumerate(M)]
    for i in range(n):
        piv = next((r for r in range(i, n) if A[r][i] != 0), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        A[i], A[piv] = A[piv], A[i]
        p = A[i][i]
        A[i] = [x / p for x in A[i]]
        for r in range(n):
            if r != i and A[r][i] != 0:
                f = A[r][i]
                A[r] = [x - f * y for x, y in zip(A[r], A[i])]
    return [row[n:] for row in A]


def transpose(M):
    return [list(c) for c in zip(*M)]


def gram_det(vectors):
    if not vectors:
        return Fraction(1)
    G = [[dot(u, v) for v in vectors] for u in vectors]
    return determinant(G)
