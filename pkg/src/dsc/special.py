"""Error function and its inverse.

``erf`` uses the everywhere-positive Maclaurin-type series
``erf(x) = 2/sqrt(pi) * exp(-x^2) * sum_n 2^n x^(2n+1) / (2n+1)!!``
for ``|x| < 3`` and a Lentz-evaluated continued fraction for ``erfc`` beyond.
``erf_inv`` starts from Winitzki's closed-form approximation and polishes it
with Halley iterations on ``erf`` (or ``erfc`` in the tails).
"""
import math

__all__ = ["erf", "erfc", "erf_inv"]

_TWO_OVER_SQRT_PI = 2.0 / math.sqrt(math.pi)
_SERIES_LIMIT = 3.0


def _erf_series(x):
    # all terms positive: no cancellation
    x2 = x * x
    term = x
    total = x
    n = 0
    while True:
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
        if term <= 1e-17 * total:
            break
    return _TWO_OVER_SQRT_PI * math.exp(-x2) * total


def _erfc_cf(x):
    """erfc(x) for x >= 3 via the continued fraction

    erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    """
    tiny = 1e-300
    f = x
    C = x
    D = 0.0
    k = 1
    while k < 500:
        a = 0.5 * k
        D = x + a * D
        D = tiny if D == 0.0 else D
        C = x + a / C
        C = tiny if C == 0.0 else C
        D = 1.0 / D
        delta = C * D
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
        k += 1
    return math.exp(-x * x) / (math.sqrt(math.pi) * f)


def erf(x: float) -> float:
    x = float(x)
    if math.isnan(x):
        return x
    if x < 0.0:
        return -erf(-x)
    if x < _SERIES_LIMIT:
        return _erf_series(x)
    if x > 27.0:  # erfc(27) < 1e-318
        return 1.0
    return 1.0 - _erfc_cf(x)


def erfc(x: float) -> float:
    x = float(x)
    if math.isnan(x):
        return x
    if x < 0.0:
        return 2.0 - erfc(-x)
    if x < _SERIES_LIMIT:
        # relative accuracy degrades as erfc shrinks, ~1e-11 at x = 3
        return 1.0 - _erf_series(x)
    if x > 27.0:
        return 0.0
    return _erfc_cf(x)


def erf_inv(p: float) -> float:
    """Inverse of :func:`erf` on the open interval (-1, 1)."""
    p = float(p)
    if not (-1.0 < p < 1.0):
        raise ValueError(f"erf_inv requires p in (-1, 1), got {p!r}")
    if p == 0.0:
        return 0.0
    if p < 0.0:
        return -erf_inv(-p)
    a = 0.147
    ln = math.log((1.0 - p) * (1.0 + p))
    t = 2.0 / (math.pi * a) + 0.5 * ln
    y = math.sqrt(math.sqrt(t * t - ln / a) - t)
    q = 1.0 - p
    for _ in range(50):
        if p < 0.5:
            f = erf(y) - p
        else:
            f = q - erfc(y)
        df = _TWO_OVER_SQRT_PI * math.exp(-y * y)
        step = f / (df + y * f)
        y -= step
        if abs(step) <= 1e-16 * max(1.0, abs(y)):
            break
    return y
