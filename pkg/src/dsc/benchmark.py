"""Two-parameter analytic benchmark with closed-form design spaces.

The quality attribute is ``s = theta * d1**2 + d2`` on ``K = [-1, 1]^2`` and it
must satisfy ``lower <= s <= upper`` (default band ``[0.20, 0.75]``). With
``theta ~ N(mu, sigma)`` the feasibility probability, the nominal design space
and the set-membership (HPD interval) design space are all available in closed
form, which makes the model an oracle for the samplers.
"""
import math
from dataclasses import dataclass

import numpy as np

from .core import KnowledgeSpace, ProcessModel
from .special import erf, erf_inv

__all__ = [
    "CQA_LOWER",
    "CQA_UPPER",
    "KNOWLEDGE_SPACE",
    "IllustrativeModel",
    "NormalTheta",
    "analytic_probability",
    "analytic_robust_member",
    "nominal_member",
]

CQA_LOWER = 0.20
CQA_UPPER = 0.75
KNOWLEDGE_SPACE = KnowledgeSpace([-1.0, -1.0], [1.0, 1.0])
_SQRT2 = math.sqrt(2.0)


class IllustrativeModel(ProcessModel):
    """Constraints ``(lower - s, s - upper) <= 0``."""

    n_constraints = 2

    def __init__(self, lower=CQA_LOWER, upper=CQA_UPPER):
        if not lower <= upper:
            raise ValueError("CQA band needs lower <= upper")
        self.lower = float(lower)
        self.upper = float(upper)

    def __repr__(self):
        return f"IllustrativeModel(lower={self.lower!r}, upper={self.upper!r})"

    def evaluate(self, d, theta):
        s = float(theta[0]) * float(d[0]) * float(d[0]) + float(d[1])
        return (self.lower - s, s - self.upper)

    def evaluate_batch(self, d, thetas):
        d1 = float(d[0])
        s = np.asarray(thetas, dtype=np.float64)[:, 0] * d1 * d1 + float(d[1])
        return np.column_stack((self.lower - s, s - self.upper))


@dataclass(frozen=True)
class NormalTheta:
    """Normal prior on theta; ``sigma`` is the standard deviation."""

    mu: float = 0.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")


def analytic_probability(d, prior: NormalTheta, lower=CQA_LOWER, upper=CQA_UPPER) -> float:
    """Exact ``P[lower <= theta*d1^2 + d2 <= upper]`` for normal theta.

    At ``d1 == 0`` the theta term vanishes and the probability is the
    deterministic indicator of ``lower <= d2 <= upper``.
    """
    d1, d2 = float(d[0]), float(d[1])
    q = d1 * d1
    if q == 0.0:
        return 1.0 if lower <= d2 <= upper else 0.0
    # standardize in theta: the band maps to [(lower - d2)/q, (upper - d2)/q]
    scale = _SQRT2 * prior.sigma
    hi = erf(((upper - d2) / q - prior.mu) / scale)
    lo = erf(((lower - d2) / q - prior.mu) / scale)
    return min(1.0, max(0.0, 0.5 * (hi - lo)))


def analytic_robust_member(d, prior: NormalTheta, alpha, lower=CQA_LOWER, upper=CQA_UPPER) -> int:
    """Membership in the set-membership design space for ``theta in mu +- z_alpha sigma``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    z = _SQRT2 * erf_inv(alpha)
    d1, d2 = float(d[0]), float(d[1])
    q = d1 * d1
    lo = lower - (prior.mu - z * prior.sigma) * q
    hi = upper - (prior.mu + z * prior.sigma) * q
    return int(lo <= d2 <= hi)


def nominal_member(d, lower=CQA_LOWER, upper=CQA_UPPER, theta_nom=1.0) -> int:
    """Membership in the nominal design space (theta fixed at ``theta_nom``)."""
    s = float(theta_nom) * float(d[0]) * float(d[0]) + float(d[1])
    return int(lower <= s <= upper)
