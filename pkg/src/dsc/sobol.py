"""Sobol low-discrepancy points with Joe-Kuo direction numbers.

Points are produced in Gray-code order (Antonov-Saleev), the ordering used by
the Joe-Kuo reference generator. Index 0 is the all-zeros point.
"""
import numpy as np

__all__ = ["MAX_DIMS", "sobol_points"]

_BITS = 32

# (s, a, m_1..m_s) for dimensions 2..32, from new-joe-kuo-6.21201.
_JOE_KUO = (
    (1, 0, (1,)),
    (2, 1, (1, 3)),
    (3, 1, (1, 3, 1)),
    (3, 2, (1, 1, 1)),
    (4, 1, (1, 1, 3, 3)),
    (4, 4, (1, 3, 5, 13)),
    (5, 2, (1, 1, 5, 5, 17)),
    (5, 4, (1, 1, 5, 5, 5)),
    (5, 7, (1, 1, 7, 11, 19)),
    (5, 11, (1, 1, 5, 1, 1)),
    (5, 13, (1, 1, 1, 3, 11)),
    (5, 14, (1, 3, 5, 5, 31)),
    (6, 1, (1, 3, 3, 9, 7, 49)),
    (6, 13, (1, 1, 1, 15, 21, 21)),
    (6, 16, (1, 3, 1, 13, 27, 49)),
    (6, 19, (1, 1, 1, 15, 7, 5)),
    (6, 22, (1, 3, 1, 15, 13, 25)),
    (6, 25, (1, 1, 5, 5, 19, 61)),
    (7, 1, (1, 3, 7, 11, 23, 15, 103)),
    (7, 4, (1, 3, 7, 13, 13, 15, 69)),
    (7, 7, (1, 1, 3, 13, 7, 35, 63)),
    (7, 8, (1, 3, 5, 9, 1, 25, 53)),
    (7, 14, (1, 3, 1, 13, 9, 35, 107)),
    (7, 19, (1, 3, 1, 5, 27, 61, 31)),
    (7, 21, (1, 1, 5, 11, 19, 41, 61)),
    (7, 28, (1, 3, 5, 3, 3, 13, 69)),
    (7, 31, (1, 1, 7, 13, 1, 19, 1)),
    (7, 32, (1, 3, 7, 5, 13, 19, 59)),
    (7, 37, (1, 1, 3, 9, 25, 29, 41)),
    (7, 41, (1, 3, 5, 13, 23, 1, 55)),
    (7, 42, (1, 3, 7, 3, 13, 59, 17)),
)

MAX_DIMS = len(_JOE_KUO) + 1


def _direction_numbers(n_dims):
    V = np.zeros((n_dims, _BITS), dtype=np.uint64)
    # first dimension: van der Corput in base 2
    for k in range(_BITS):
        V[0, k] = 1 << (_BITS - 1 - k)
    for j in range(1, n_dims):
        s, a, m = _JOE_KUO[j - 1]
        v = [0] * _BITS
        for k in range(min(s, _BITS)):
            v[k] = m[k] << (_BITS - 1 - k)
        for k in range(s, _BITS):
            x = v[k - s] ^ (v[k - s] >> s)
            for i in range(1, s):
                if (a >> (s - 1 - i)) & 1:
                    x ^= v[k - i]
            v[k] = x
        V[j] = v
    return V


def sobol_points(n_dims, count, skip=0):
    """Return ``count`` Sobol points in ``[0, 1)^n_dims`` starting at index ``skip``.

    Parameters
    ----------
    n_dims : int
        Dimension, at most :data:`MAX_DIMS`.
    count : int
        Number of points.
    skip : int
        Index of the first returned point in the sequence.

    Returns
    -------
    ndarray of shape (count, n_dims)
    """
    if not 1 <= n_dims <= MAX_DIMS:
        raise ValueError(f"Sobol direction numbers available for 1..{MAX_DIMS} dimensions, got {n_dims}")
    if count < 1:
        raise ValueError("count must be >= 1")
    if skip < 0:
        raise ValueError("skip must be >= 0")
    if skip + count > 1 << _BITS:
        raise ValueError("requested indices exceed the 2^32 sequence period")
    V = _direction_numbers(n_dims)
    idx = np.arange(skip, skip + count, dtype=np.uint64)
    gray = idx ^ (idx >> np.uint64(1))
    X = np.zeros((count, n_dims), dtype=np.uint64)
    for k in range(_BITS):
        bit = ((gray >> np.uint64(k)) & np.uint64(1)).astype(bool)
        if bit.any():
            X[bit] ^= V[:, k]
    return X.astype(np.float64) / float(1 << _BITS)
