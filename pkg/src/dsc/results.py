"""Sampler output containers and their on-disk formats.

``samples.csv``
    header ``d_1,...,d_n,prob,status``; one row per design sample, numbers in
    shortest round-trip decimal form, ``status`` is ``live`` or ``dead``.
``stats.json``
    the :class:`~dsc.core.RunStats` counters.
``trace.csv``
    nested sampling only: ``iteration,p_min,enlargement,model_evals,accepted``.
"""
import csv
import json
from dataclasses import dataclass, field
from typing import List, Optional

from .core import DesignSample, RunStats, Status

__all__ = [
    "SamplingResult",
    "TraceRow",
    "write_samples_csv",
    "read_samples_csv",
    "write_stats_json",
    "write_trace_csv",
    "reliability_breakdown",
]

RELIABILITY_BANDS = (0.95, 0.70, 0.50, 0.25)


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    p_min: float
    enlargement: float
    model_evals: int
    accepted: int


@dataclass
class SamplingResult:
    samples: List[DesignSample]
    stats: RunStats
    trace: Optional[List[TraceRow]] = None
    meta: dict = field(default_factory=dict)

    def probabilities(self):
        return [s.prob for s in self.samples]

    def at_least(self, alpha):
        """Samples whose estimated probability is ``>= alpha``."""
        return [s for s in self.samples if s.prob is not None and s.prob >= alpha]


def _fmt(x):
    return repr(float(x))


def write_samples_csv(path, samples):
    samples = list(samples)
    n = len(samples[0].d) if samples else 0
    with open(path, "w", newline="") as fh:
        fh.write(",".join([f"d_{i + 1}" for i in range(n)] + ["prob", "status"]) + "\n")
        for s in samples:
            fh.write(",".join([_fmt(x) for x in s.d] + [_fmt(s.prob), str(s.status)]) + "\n")


def read_samples_csv(path):
    """Inverse of :func:`write_samples_csv`."""
    out = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty samples file") from None
        if len(header) < 3 or header[-2:] != ["prob", "status"]:
            raise ValueError(f"{path}: header must be d_1,...,d_n,prob,status")
        n = len(header) - 2
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != n + 2:
                raise ValueError(f"{path}:{lineno}: expected {n + 2} fields")
            try:
                d = tuple(float(x) for x in row[:n])
                prob = float(row[n])
                status = Status(row[n + 1])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
            out.append(DesignSample(d, prob, status))
    return out


def write_stats_json(path, stats, **extra):
    doc = stats.to_dict()
    doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_trace_csv(path, trace):
    with open(path, "w", newline="") as fh:
        fh.write("iteration,p_min,enlargement,model_evals,accepted\n")
        for r in trace:
            fh.write(f"{r.iteration},{_fmt(r.p_min)},{_fmt(r.enlargement)},{r.model_evals},{r.accepted}\n")


def reliability_breakdown(samples, bands=RELIABILITY_BANDS):
    """Count samples per reliability band, highest band first.

    Returns a list of ``(label, count)``; the bands are half-open
    ``[b_k, b_{k-1})`` with the top band ``[b_0, 1]``.
    """
    probs = [s.prob for s in samples]
    edges = list(bands)
    rows = []
    upper = None
    for b in edges:
        if upper is None:
            label = f"{b:.2f} <= p"
            n = sum(1 for p in probs if p >= b)
        else:
            label = f"{b:.2f} <= p < {upper:.2f}"
            n = sum(1 for p in probs if b <= p < upper)
        rows.append((label, n))
        upper = b
    rows.append((f"p < {upper:.2f}", sum(1 for p in probs if p < upper)))
    return rows
