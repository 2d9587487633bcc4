"""Exhaustive Monte Carlo characterization over a fixed design sample."""
import time
from dataclasses import dataclass

import numpy as np

from .core import CountingModel, DesignSample, RunStats, Status, feasibility_probability
from .results import SamplingResult
from .rng import spawn_streams
from .sobol import sobol_points

__all__ = ["MCConfig", "design_points", "run_mc"]

SEQUENCES = ("sobol", "uniform")


@dataclass(frozen=True)
class MCConfig:
    n_points: int = 3249
    sequence: str = "sobol"
    seed: int = 0
    # index 0 of the Sobol sequence is the all-zeros corner
    skip: int = 1

    def __post_init__(self):
        if self.n_points < 1:
            raise ValueError("n_points must be >= 1")
        if self.sequence not in SEQUENCES:
            raise ValueError(f"sequence must be one of {SEQUENCES}, got {self.sequence!r}")
        if self.skip < 0:
            raise ValueError("skip must be >= 0")


def design_points(space, cfg: MCConfig):
    """The design sample in knowledge-space coordinates, shape (N_d, n_d)."""
    if cfg.sequence == "sobol":
        u = sobol_points(space.ndim, cfg.n_points, cfg.skip)
    else:
        u = spawn_streams(cfg.seed).init.random((cfg.n_points, space.ndim))
    return space.from_unit(u)


def run_mc(model, space, uncertainty, cfg: MCConfig) -> SamplingResult:
    """Estimate the feasibility probability at every design point.

    Every returned sample is marked dead; ``stats.model_evals`` is
    ``N_d * N_theta``.
    """
    t0 = time.perf_counter()
    counter = CountingModel(model)
    samples = []
    for d in design_points(space, cfg):
        p = feasibility_probability(counter, d, uncertainty)
        samples.append(DesignSample(d, p, Status.DEAD))
    stats = RunStats(model_evals=counter.count, termination="completed")
    stats.wall_seconds = time.perf_counter() - t0
    return SamplingResult(samples, stats)
