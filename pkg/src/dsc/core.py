"""Domain types, the process-model interface and the feasibility estimator.

A design point ``d`` lives in an axis-aligned knowledge space. The parametric
uncertainty is a weighted ensemble of ``theta`` samples, and the feasibility
probability of ``d`` is the weight mass of the samples for which every
constraint ``g_k(d, theta) <= 0`` holds.
"""
from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import ModelError, NonFiniteConstraintError

__all__ = [
    "KnowledgeSpace",
    "UncertaintySet",
    "ProcessModel",
    "FunctionModel",
    "CountingModel",
    "Status",
    "DesignSample",
    "RunStats",
    "Bounded",
    "indicator",
    "feasibility_probability",
    "feasibility_probability_bounded",
]

log = logging.getLogger(__name__)

_EPS = np.finfo(np.float64).eps


def _readonly(a):
    a = np.array(a, dtype=np.float64)
    a.setflags(write=False)
    return a


class KnowledgeSpace:
    """Axis-aligned box ``[lower, upper]`` of process parameters."""

    __slots__ = ("lower", "upper")

    def __init__(self, lower, upper):
        lower = np.atleast_1d(_readonly(lower))
        upper = np.atleast_1d(_readonly(upper))
        if lower.ndim != 1 or lower.shape != upper.shape:
            raise ValueError("lower and upper must be vectors of equal length")
        if lower.size < 1:
            raise ValueError("knowledge space needs at least one dimension")
        if not (np.all(np.isfinite(lower)) and np.all(np.isfinite(upper))):
            raise ValueError("knowledge space bounds must be finite")
        bad = np.flatnonzero(lower >= upper)
        if bad.size:
            i = int(bad[0])
            raise ValueError(
                f"lower[{i}]={lower[i]!r} must be strictly less than upper[{i}]={upper[i]!r}")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

    def __setattr__(self, name, value):
        raise AttributeError("KnowledgeSpace is immutable")

    def __repr__(self):
        return f"KnowledgeSpace(lower={self.lower.tolist()}, upper={self.upper.tolist()})"

    @property
    def ndim(self) -> int:
        return self.lower.size

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def diagonal(self) -> float:
        return float(np.sqrt(np.sum(self.width ** 2)))

    def contains(self, d) -> bool:
        d = np.asarray(d, dtype=np.float64)
        return bool(np.all(d >= self.lower) and np.all(d <= self.upper))

    def from_unit(self, u):
        """Affine map of unit-cube coordinates onto the box."""
        u = np.asarray(u, dtype=np.float64)
        return self.lower + u * self.width

    def to_canonical(self, d):
        """Map box coordinates onto ``[-1, 1]`` per dimension."""
        d = np.asarray(d, dtype=np.float64)
        return 2.0 * (d - self.lower) / self.width - 1.0

    def uniform(self, n, rng):
        return self.from_unit(rng.random((n, self.ndim)))


class UncertaintySet:
    """Weighted samples ``(theta_j, w_j)`` discretizing the parameter distribution.

    Weights are normalized to sum to one; a warning is logged if the raw sum
    was off by more than 1e-6.
    """

    __slots__ = ("thetas", "weights", "order", "_rows")

    def __init__(self, thetas, weights=None):
        thetas = np.array(thetas, dtype=np.float64)
        if thetas.ndim == 1:
            thetas = thetas[:, None]
        if thetas.ndim != 2 or thetas.shape[0] < 1 or thetas.shape[1] < 1:
            raise ValueError("thetas must be a non-empty (N, n_theta) array")
        if not np.all(np.isfinite(thetas)):
            raise ValueError("thetas must be finite")
        n = thetas.shape[0]
        if weights is None:
            weights = np.full(n, 1.0 / n)
        weights = np.array(weights, dtype=np.float64).reshape(-1)
        if weights.size != n:
            raise ValueError(f"{weights.size} weights given for {n} samples")
        if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
            raise ValueError("all weights must be finite and > 0")
        total = math.fsum(weights)
        if abs(total - 1.0) > 1e-6:
            log.warning("uncertainty weights sum to %r; normalizing to 1", total)
        if total != 1.0:
            weights = weights / total
        thetas.setflags(write=False)
        weights.setflags(write=False)
        # descending weight, ties by ascending index
        order = np.argsort(-weights, kind="stable")
        order.setflags(write=False)
        object.__setattr__(self, "thetas", thetas)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "order", order)
        object.__setattr__(self, "_rows", None)

    def __setattr__(self, name, value):
        raise AttributeError("UncertaintySet is immutable")

    def __len__(self):
        return self.thetas.shape[0]

    def __repr__(self):
        return f"UncertaintySet(N={len(self)}, n_theta={self.n_theta})"

    @property
    def n_theta(self) -> int:
        return self.thetas.shape[1]

    def ordered_rows(self):
        """``(theta, weight)`` pairs in evaluation order, cached."""
        rows = self._rows
        if rows is None:
            rows = tuple((self.thetas[j], float(self.weights[j])) for j in self.order)
            object.__setattr__(self, "_rows", rows)
        return rows

    @classmethod
    def single(cls, theta):
        """Degenerate set holding one scenario with weight 1 (nominal case)."""
        return cls(np.atleast_2d(np.asarray(theta, dtype=np.float64)), [1.0])

    @classmethod
    def normal(cls, mean, cov, n, rng):
        """Equal-weight draws from a multivariate normal."""
        mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(cov, dtype=np.float64))
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean of size {mean.size}")
        if n < 1:
            raise ValueError("sample count must be >= 1")
        # Cholesky keeps draws identical across numpy versions for a given stream
        try:
            L = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError:
            raise ValueError("covariance must be symmetric positive definite") from None
        z = rng.standard_normal((n, mean.size))
        return cls(mean + z @ L.T)

    @classmethod
    def from_csv(cls, path):
        """Read ``theta_1,...,theta_p,weight`` with a header row."""
        import csv

        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            try:
                header = [h.strip() for h in next(reader)]
            except StopIteration:
                raise ValueError(f"{path}: empty uncertainty file") from None
            if len(header) < 2 or header[-1] != "weight":
                raise ValueError(f"{path}: header must be theta_1,...,theta_p,weight")
            expected = [f"theta_{i + 1}" for i in range(len(header) - 1)]
            if header[:-1] != expected:
                raise ValueError(f"{path}: expected columns {expected + ['weight']}, got {header}")
            rows = []
            for lineno, row in enumerate(reader, start=2):
                if not row or all(not c.strip() for c in row):
                    continue
                if len(row) != len(header):
                    raise ValueError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
                try:
                    rows.append([float(c) for c in row])
                except ValueError:
                    raise ValueError(f"{path}:{lineno}: non-numeric field") from None
        if not rows:
            raise ValueError(f"{path}: no samples")
        arr = np.array(rows)
        return cls(arr[:, :-1], arr[:, -1])

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            cols = [f"theta_{i + 1}" for i in range(self.n_theta)] + ["weight"]
            fh.write(",".join(cols) + "\n")
            for theta, w in zip(self.thetas, self.weights):
                fh.write(",".join(repr(float(x)) for x in theta) + f",{float(w)!r}\n")


class ProcessModel:
    """Constraint model ``G(d, theta) <= 0``.

    Subclasses set ``n_constraints`` and implement :meth:`evaluate`. Overriding
    :meth:`evaluate_batch` with a vectorized version is optional; it must give
    bit-identical values to looping over :meth:`evaluate`.
    """

    n_constraints: int = 1

    def evaluate(self, d, theta) -> Sequence[float]:
        raise NotImplementedError

    def evaluate_batch(self, d, thetas) -> np.ndarray:
        out = np.empty((len(thetas), self.n_constraints))
        for j, theta in enumerate(thetas):
            out[j] = _as_constraints(self.evaluate(d, theta), self.n_constraints, d, theta)
        return out

    def close(self):
        pass


class FunctionModel(ProcessModel):
    """Adapts a plain callable ``fn(d, theta) -> g`` to :class:`ProcessModel`."""

    def __init__(self, fn, n_constraints):
        if n_constraints < 1:
            raise ValueError("n_constraints must be >= 1")
        self.fn = fn
        self.n_constraints = int(n_constraints)

    def evaluate(self, d, theta):
        return self.fn(d, theta)


class CountingModel(ProcessModel):
    """Wraps a model and counts single (d, theta) evaluations."""

    def __init__(self, model):
        self.model = model
        self.n_constraints = model.n_constraints
        self.count = 0

    def evaluate(self, d, theta):
        self.count += 1
        return self.model.evaluate(d, theta)

    def evaluate_batch(self, d, thetas):
        self.count += len(thetas)
        batch = getattr(self.model, "evaluate_batch", None)
        if batch is None:
            return ProcessModel.evaluate_batch(self.model, d, thetas)
        return batch(d, thetas)

    def close(self):
        close = getattr(self.model, "close", None)
        if close is not None:
            close()


def _as_constraints(g, n, d, theta):
    try:
        g = np.asarray(g, dtype=np.float64).reshape(-1)
    except (TypeError, ValueError) as exc:
        raise ModelError(f"model returned non-numeric constraints at d={list(d)}: {exc}") from None
    if g.size != n:
        raise ModelError(
            f"model returned {g.size} constraint values, expected {n} "
            f"(d={np.asarray(d).tolist()}, theta={np.asarray(theta).tolist()})")
    return g


def indicator(g, d=None, theta=None) -> int:
    """1 if every ``g_k <= 0``, else 0. Non-finite entries raise."""
    ok = 1
    n = 0
    for v in g:
        n += 1
        if not math.isfinite(v):
            raise NonFiniteConstraintError(d, theta, g)
        if v > 0.0:
            ok = 0
    if n == 0:
        raise ModelError("empty constraint vector")
    return ok


class Status(str, enum.Enum):
    LIVE = "live"
    DEAD = "dead"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class DesignSample:
    """A design point with its estimated feasibility probability."""

    d: tuple
    prob: Optional[float]
    status: Status = Status.DEAD

    def __post_init__(self):
        object.__setattr__(self, "d", tuple(float(x) for x in self.d))
        if self.prob is not None and not (0.0 <= self.prob <= 1.0):
            raise ValueError(f"probability {self.prob!r} outside [0, 1]")


@dataclass
class RunStats:
    model_evals: int = 0
    iterations: int = 0
    proposals_generated: int = 0
    proposals_accepted: int = 0
    proposals_rejected: int = 0
    proposals_interrupted: int = 0
    termination: str = ""
    wall_seconds: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "model_evals": self.model_evals,
            "iterations": self.iterations,
            "proposals_generated": self.proposals_generated,
            "proposals_accepted": self.proposals_accepted,
            "proposals_rejected": self.proposals_rejected,
            "proposals_interrupted": self.proposals_interrupted,
            "termination": self.termination,
            "wall_seconds": self.wall_seconds,
        }
        out.update(self.extra)
        return out


class Bounded(NamedTuple):
    """Outcome of :func:`feasibility_probability_bounded`.

    ``value`` is None when the evaluation was interrupted below the floor.
    """

    value: Optional[float]
    evaluations: int

    @property
    def rejected(self) -> bool:
        return self.value is None


def _feasible_mass(weights):
    # correctly rounded, hence independent of summation order
    return min(1.0, math.fsum(weights))


def feasibility_probability(model, d, uncertainty: UncertaintySet) -> float:
    """Weighted fraction of scenarios in which all constraints hold.

    Performs exactly ``len(uncertainty)`` model evaluations.
    """
    d = np.asarray(d, dtype=np.float64)
    thetas = uncertainty.thetas
    batch = getattr(model, "evaluate_batch", None)
    if batch is not None:
        G = np.asarray(batch(d, thetas), dtype=np.float64)
    else:
        G = ProcessModel.evaluate_batch(model, d, thetas)
    if G.ndim != 2 or G.shape[0] != len(thetas):
        raise ModelError(f"batched model returned shape {G.shape}, expected ({len(thetas)}, n_g)")
    finite = np.isfinite(G).all(axis=1)
    if not finite.all():
        j = int(np.flatnonzero(~finite)[0])
        raise NonFiniteConstraintError(d, thetas[j], G[j])
    feasible = (G <= 0.0).all(axis=1)
    return _feasible_mass(uncertainty.weights[feasible])


def feasibility_probability_bounded(model, d, uncertainty: UncertaintySet, floor: float) -> Bounded:
    """Feasibility probability with early interruption below ``floor``.

    Scenarios are visited in descending weight order. As soon as the feasible
    mass accumulated so far plus the mass still unvisited drops strictly below
    ``floor`` the evaluation stops and a rejected result is returned. Otherwise
    the value equals :func:`feasibility_probability` bit for bit.
    """
    if not (0.0 <= floor <= 1.0):
        raise ValueError(f"floor must lie in [0, 1], got {floor!r}")
    d = np.asarray(d, dtype=np.float64)
    rows = uncertainty.ordered_rows()
    n = len(rows)
    # Running sums are only used for the interrupt test; shrink the floor by a
    # rounding margin so that an interrupt always implies value < floor.
    threshold = floor - 4.0 * (n + 1) * _EPS
    remaining = 1.0
    acc = 0.0
    feasible = []
    evaluate = model.evaluate
    for k, (theta, w) in enumerate(rows):
        g = evaluate(d, theta)
        if indicator(g, d, theta):
            acc += w
            feasible.append(w)
        remaining -= w
        if acc + max(remaining, 0.0) < threshold:
            return Bounded(None, k + 1)
    return Bounded(_feasible_mass(feasible), n)
