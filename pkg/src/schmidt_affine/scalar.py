"""Scalars: exact rationals (``Fraction``) or high-precision floats (``mpmath.mpf``).

A computation runs in one mode. Rational mode is closed under the field
operations and every comparison is exact. Float mode is entered as soon as
an irrational input (golden ratio, sqrt 2, a decimal float) appears; exact
equalities then downgrade to a relative tolerance of ``FLOAT_RTOL``.

``Fraction`` and ``mpf`` add and multiply fine but do not compare, so
values are always passed through :func:`unify` before they meet.
"""

import math
import re
from fractions import Fraction
from numbers import Integral, Rational

import mpmath

DEFAULT_PRECISION = 128
FLOAT_RTOL = 1e-9

mpmath.mp.prec = DEFAULT_PRECISION

MPF = mpmath.mpf

NAMED_CONSTANTS = {
    "golden": lambda: (1 + mpmath.sqrt(5)) / 2,
    "phi": lambda: (1 + mpmath.sqrt(5)) / 2,
    "sqrt2": lambda: mpmath.sqrt(2),
    "sqrt3": lambda: mpmath.sqrt(3),
    "pi": lambda: +mpmath.pi,
    "e": lambda: +mpmath.e,
}

_HEX_RE = re.compile(r"^(-?)0x([0-9a-f]+)p(-?\d+)$")


def set_precision(bits):
    """Set the float-mode mantissa size; never drops below 100 bits."""
    if bits < 100:
        raise ValueError("float mode needs at least 100 bits of mantissa")
    mpmath.mp.prec = int(bits)


def get_precision():
    return mpmath.mp.prec


def is_exact(x):
    return isinstance(x, (Integral, Rational)) and not isinstance(x, bool)


def is_float(x):
    return isinstance(x, mpmath.mpf)


def to_scalar(x):
    """Coerce a user value to a Scalar.

    Integers and fractions stay exact, decimal floats and named constants
    become ``mpf``; strings are parsed with :func:`parse_scalar`.
    """
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, bool):
        raise TypeError("bool is not a scalar")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, Integral):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, mpmath.mpf):
        return x
    if isinstance(x, float):
        return MPF(x)
    # numpy scalars and the like
    if hasattr(x, "item"):
        return to_scalar(x.item())
    raise TypeError(f"cannot interpret {x!r} as a scalar")


def to_mpf(x):
    if isinstance(x, mpmath.mpf):
        return x
    if isinstance(x, Fraction):
        return MPF(x.numerator) / x.denominator
    if isinstance(x, Integral):
        return MPF(int(x))
    return MPF(x)


def any_float(values):
    return any(isinstance(v, mpmath.mpf) for v in values)


def unify(values):
    """Return ``values`` as a list in one common mode."""
    vals = [to_scalar(v) for v in values]
    if any_float(vals):
        return [to_mpf(v) for v in vals]
    return vals


def unify_matrix(rows):
    flat = [to_scalar(v) for row in rows for v in row]
    use_float = any_float(flat)
    conv = to_mpf if use_float else (lambda v: v)
    return [[conv(to_scalar(v)) for v in row] for row in rows]


def mode_of(values):
    return "float" if any_float(values) else "rational"


def like(x, ref):
    """Convert ``x`` to the mode of ``ref``."""
    if isinstance(ref, mpmath.mpf):
        return to_mpf(x)
    return to_scalar(x)


def ifloor(x):
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    if isinstance(x, Integral):
        return int(x)
    if isinstance(x, mpmath.mpf):
        return int(mpmath.floor(x))
    return math.floor(x)


def iceil(x):
    return -ifloor(-x)


def iround(x):
    """Nearest integer, halves rounded up."""
    return ifloor(x + Fraction(1, 2)) if not isinstance(x, mpmath.mpf) else int(mpmath.floor(x + MPF(0.5)))


def sqrt(x):
    """Square root; exact for squares of rationals, ``mpf`` otherwise."""
    if isinstance(x, Fraction) and x >= 0:
        n, d = math.isqrt(x.numerator), math.isqrt(x.denominator)
        if n * n == x.numerator and d * d == x.denominator:
            return Fraction(n, d)
    return mpmath.sqrt(to_mpf(x))


def dyadic(x, bits=64):
    """Exact ``Fraction`` nearest ``x`` on the grid ``2^-bits``."""
    if is_exact(x):
        return Fraction(x)
    return Fraction(int(mpmath.nint(to_mpf(x) * 2 ** bits)), 2 ** bits)


def to_float(x):
    if isinstance(x, Fraction):
        return x.numerator / x.denominator
    return float(x)


def close(a, b, rtol=FLOAT_RTOL, atol=0.0):
    """Exact equality in rational mode, relative tolerance otherwise."""
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = to_mpf(a), to_mpf(b)
    return abs(a - b) <= max(atol, rtol * max(abs(a), abs(b)))


def format_scalar(x):
    """Serialize: rationals as ``"p/q"``, floats as bit-exact hex strings."""
    if isinstance(x, mpmath.mpf):
        sign, man, exp, _ = x._mpf_
        if man == 0:
            return "0x0p0"
        return f"{'-' if sign else ''}0x{int(man):x}p{int(exp)}"
    x = to_scalar(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


def parse_scalar(text):
    """Inverse of :func:`format_scalar`; also accepts named constants and decimals."""
    s = str(text).strip().lower()
    if s.startswith("-") and s[1:] in NAMED_CONSTANTS:
        return -NAMED_CONSTANTS[s[1:]]()
    if s in NAMED_CONSTANTS:
        return NAMED_CONSTANTS[s]()
    m = _HEX_RE.match(s)
    if m:
        man = int(m.group(2), 16)
        if m.group(1):
            man = -man
        return MPF((man, int(m.group(3))))
    try:
        return Fraction(s)
    except ValueError:
        pass
    try:
        return MPF(s)
    except (ValueError, TypeError):
        raise ValueError(f"cannot parse scalar {text!r}") from None


def format_vector(v):
    return [format_scalar(x) for x in v]


def parse_vector(items):
    return unify(parse_scalar(x) for x in items)
