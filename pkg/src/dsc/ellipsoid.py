"""Bounding ellipsoids around live points and uniform sampling inside them."""
import numpy as np

from .errors import EllipsoidSamplingError

__all__ = ["Ellipsoid", "enclosing_ellipsoid", "sample_in_ellipsoid", "MAX_REJECTIONS"]

MAX_REJECTIONS = 100_000
_RIDGE = 1e-10
# guards the farthest live point against rounding in the membership test
_SAFETY = 1.0 + 1e-12


class Ellipsoid:
    """Ellipsoid ``(x - c)^T A (x - c) <= 1`` stored by its principal axes.

    ``radii`` are the semi-axis lengths before enlargement; the effective
    semi-axes are ``radii * (1 + enlargement)``.
    """

    def __init__(self, center, rotation, radii, enlargement=0.0):
        if enlargement < 0:
            raise ValueError("enlargement must be >= 0")
        self.center = np.asarray(center, dtype=np.float64)
        self.rotation = np.asarray(rotation, dtype=np.float64)
        self.radii = np.asarray(radii, dtype=np.float64)
        if np.any(self.radii <= 0):
            raise ValueError("semi-axes must be positive")
        self.enlargement = float(enlargement)
        self.axes = self.rotation * (self.radii * (1.0 + self.enlargement))

    @property
    def ndim(self):
        return self.center.size

    @property
    def semi_axes(self):
        return self.radii * (1.0 + self.enlargement)

    @property
    def shape(self):
        """The SPD matrix ``A`` of the enlarged ellipsoid."""
        r = self.semi_axes
        return (self.rotation / r ** 2) @ self.rotation.T

    def quadform(self, x):
        """``(x - c)^T A (x - c)`` for one point or an (n, d) array."""
        y = (np.asarray(x, dtype=np.float64) - self.center) @ self.rotation
        return np.sum((y / self.semi_axes) ** 2, axis=-1)

    def contains(self, x):
        return self.quadform(x) <= 1.0

    def volume(self):
        from math import gamma, pi

        n = self.ndim
        return pi ** (n / 2) / gamma(n / 2 + 1) * float(np.prod(self.semi_axes))

    def sample(self, rng):
        """One point uniformly distributed inside the ellipsoid."""
        n = self.ndim
        z = rng.standard_normal(n)
        norm = np.sqrt(z @ z)
        u = rng.random() ** (1.0 / n)
        return self.center + self.axes @ (z * (u / norm))

    def __repr__(self):
        return (f"Ellipsoid(center={self.center.tolist()}, semi_axes={self.semi_axes.tolist()}, "
                f"enlargement={self.enlargement!r})")


def enclosing_ellipsoid(points, enlargement=0.0, min_axis=0.0):
    """Covariance-based ellipsoid enclosing ``points``, then enlarged.

    The center is the sample mean and the shape is the inverse sample
    covariance (ridge-regularized by ``1e-10 * trace``) scaled so that the
    farthest point lies on the boundary. Semi-axes are floored at ``min_axis``
    to keep degenerate point sets full-dimensional.

    Parameters
    ----------
    points : array_like, shape (n, d)
    enlargement : float
        Relative axis inflation, e.g. 0.3 scales every semi-axis by 1.3.
    min_axis : float
        Lower bound on the (unenlarged) semi-axis lengths.
    """
    x = np.asarray(points, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    n, nd = x.shape
    if n < 2:
        raise ValueError("need at least 2 points to build an enclosing ellipsoid")
    center = x.mean(axis=0)
    delta = x - center
    cov = np.atleast_2d(np.cov(delta, rowvar=False))
    tr = float(np.trace(cov))
    # floor at the smallest normal double so the ridge cannot underflow to zero
    ridge = max(_RIDGE * tr, np.finfo(np.float64).tiny) if tr > 0 else 1.0
    cov = cov + ridge * np.eye(nd)
    w, V = np.linalg.eigh(cov)
    w = np.maximum(w, ridge)
    y = delta @ V
    fmax = float(np.max(np.sum(y * y / w, axis=1)))
    if fmax > 0:
        radii = np.sqrt(w * fmax) * _SAFETY
    else:
        radii = np.zeros(nd)
    floor = max(float(min_axis), 0.0)
    if floor == 0.0 and not np.all(radii > 0):
        floor = 1e-12
    radii = np.maximum(radii, floor)
    return Ellipsoid(center, V, radii, enlargement)


def sample_in_ellipsoid(ellipsoid, space, rng, max_rejections=MAX_REJECTIONS, return_tries=False):
    """Uniform draw from the intersection of ``ellipsoid`` and the box ``space``.

    With ``return_tries`` the number of draws discarded for falling outside
    the box is returned alongside the point.
    """
    lower, upper = space.lower, space.upper
    for tries in range(max_rejections + 1):
        x = ellipsoid.sample(rng)
        if np.all(x >= lower) and np.all(x <= upper):
            return (x, tries) if return_tries else x
    raise EllipsoidSamplingError(
        f"ellipsoid nearly disjoint from knowledge space: {max_rejections} consecutive draws "
        f"fell outside {space!r}")
