"""Nested sampling of the design space.

A fixed number of live design points is pushed through regions of increasing
feasibility probability. Each iteration draws a batch of proposals uniformly
from an enlarged ellipsoid around the live points (clipped to the knowledge
space); any proposal more reliable than the current worst live point replaces
it, and the replaced point is archived as a dead sample. The run ends once
every live point reaches the target reliability, when progress stalls, or at
the iteration cap.
"""
import logging
import time
from dataclasses import dataclass, replace

import numpy as np

from .core import (
    CountingModel,
    DesignSample,
    RunStats,
    Status,
    UncertaintySet,
    feasibility_probability,
    feasibility_probability_bounded,
)
from .ellipsoid import enclosing_ellipsoid, sample_in_ellipsoid
from .results import SamplingResult, TraceRow
from .rng import spawn_streams

__all__ = ["NSConfig", "Termination", "run_ns", "run_nominal", "enlargement_at"]

log = logging.getLogger(__name__)


class Termination:
    REACHED_ALPHA = "reached_alpha"
    STALLED_EMPTY_DS = "stalled_empty_ds"
    MAX_ITERATIONS = "max_iterations"


@dataclass(frozen=True)
class NSConfig:
    alpha_star: float = 0.95
    n_live: int = 500
    n_proposals: int = 8
    enlargement0: float = 0.30
    shrink_rate: float = 0.20
    stall_window: int = 50
    stall_epsilon: float = 1e-4
    max_iterations: int = 100_000
    seed: int = 0
    accelerate: bool = False

    def __post_init__(self):
        if not 0.0 <= self.alpha_star <= 1.0:
            raise ValueError("alpha_star must lie in [0, 1]")
        if self.n_live < 2:
            raise ValueError("n_live must be >= 2")
        if self.n_proposals < 1:
            raise ValueError("n_proposals must be >= 1")
        if self.enlargement0 < 0:
            raise ValueError("enlargement0 must be >= 0")
        if not 0.0 <= self.shrink_rate < 1.0:
            raise ValueError("shrink_rate must lie in [0, 1)")
        if self.stall_window < 1:
            raise ValueError("stall_window must be >= 1")
        if not self.stall_epsilon > 0:
            raise ValueError("stall_epsilon must be > 0")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


def enlargement_at(cfg: NSConfig, iteration: int) -> float:
    """Geometric decay ``e0 * (1 - r)**t`` of the ellipsoid enlargement."""
    return max(0.0, cfg.enlargement0 * (1.0 - cfg.shrink_rate) ** iteration)


def run_ns(model, space, uncertainty, cfg: NSConfig, callback=None) -> SamplingResult:
    """Characterize the design space at reliability ``cfg.alpha_star``.

    Parameters
    ----------
    model : ProcessModel
    space : KnowledgeSpace
    uncertainty : UncertaintySet
    cfg : NSConfig
    callback : callable, optional
        Called with each :class:`~dsc.results.TraceRow` as iterations finish.

    Returns
    -------
    SamplingResult
        Dead samples in archival order followed by the final live points.
        ``stats.termination`` is one of the :class:`Termination` values.
    """
    t0 = time.perf_counter()
    streams = spawn_streams(cfg.seed)
    counter = CountingModel(model)
    stats = RunStats()
    alpha = cfg.alpha_star
    min_axis = 1e-12 * space.diagonal

    live = space.uniform(cfg.n_live, streams.init)
    probs = np.array([feasibility_probability(counter, d, uncertainty) for d in live])

    dead = []
    trace = []
    # progress measures at the end of each iteration, index 0 = initial state
    pmin_hist = [float(probs.min())]
    mass_hist = [float(probs.sum())]
    termination = Termination.REACHED_ALPHA
    it = 0

    while probs.min() < alpha:
        if it >= cfg.max_iterations:
            termination = Termination.MAX_ITERATIONS
            break
        enl = enlargement_at(cfg, it)
        ellipsoid = enclosing_ellipsoid(live, enl, min_axis)
        proposals = [sample_in_ellipsoid(ellipsoid, space, streams.proposals)
                     for _ in range(cfg.n_proposals)]
        stats.proposals_generated += cfg.n_proposals
        accepted = 0
        for x in proposals:
            worst = int(np.argmin(probs))
            p_min = float(probs[worst])
            if cfg.accelerate:
                p = feasibility_probability_bounded(counter, x, uncertainty, p_min).value
                if p is None:
                    stats.proposals_interrupted += 1
            else:
                p = feasibility_probability(counter, x, uncertainty)
            if p is not None and p > p_min:
                dead.append(DesignSample(live[worst], p_min, Status.DEAD))
                live[worst] = x
                probs[worst] = p
                accepted += 1
            else:
                stats.proposals_rejected += 1
        stats.proposals_accepted += accepted
        it += 1

        row = TraceRow(it, float(probs.min()), enl, counter.count, accepted)
        trace.append(row)
        if callback is not None:
            callback(row)
        pmin_hist.append(row.p_min)
        mass_hist.append(float(probs.sum()))
        if it >= cfg.stall_window and probs.min() < alpha:
            w = cfg.stall_window
            if (pmin_hist[-1] - pmin_hist[-1 - w] < cfg.stall_epsilon
                    and mass_hist[-1] - mass_hist[-1 - w] < cfg.stall_epsilon):
                termination = Termination.STALLED_EMPTY_DS
                log.info("no progress over %d iterations (p_min=%.6g); stopping", w, row.p_min)
                break

    samples = dead + [DesignSample(d, float(p), Status.LIVE) for d, p in zip(live, probs)]
    stats.iterations = it
    stats.model_evals = counter.count
    stats.termination = termination
    stats.wall_seconds = time.perf_counter() - t0
    return SamplingResult(samples, stats, trace)


def run_nominal(model, space, theta_nom, cfg: NSConfig, callback=None) -> SamplingResult:
    """Nominal design space: a single scenario ``theta_nom`` with target 1."""
    return run_ns(model, space, UncertaintySet.single(theta_nom), replace(cfg, alpha_star=1.0),
                  callback=callback)
