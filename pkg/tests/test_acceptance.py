"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every test records a PASS/FAIL line that is printed in the session summary.
Run on its own with ``pytest tests/test_acceptance.py -v``.
"""
import functools
import math
import os
import time

import numpy as np
import pytest

from dsc.benchmark import (
    KNOWLEDGE_SPACE,
    IllustrativeModel,
    NormalTheta,
    analytic_probability,
    analytic_robust_member,
    nominal_member,
)
from dsc.bridge import ExternalModel
from dsc.core import Status, UncertaintySet, feasibility_probability
from dsc.mc import MCConfig, run_mc
from dsc.ns import NSConfig, Termination, run_nominal, run_ns
from dsc.results import write_samples_csv
from dsc.rng import spawn_streams
from dsc.surrogate import MLPConfig, fit, gradient_check

from conftest import ACCEPTANCE_RESULTS, PYTHON, SCRIPTS

STD = NormalTheta(0.0, 1.0)
NARROW = NormalTheta(1.0, math.sqrt(0.3))
BANDS = (0.95, 0.7, 0.5, 0.25)


def report(name, ok, detail, seconds=None, budget=None):
    if seconds is not None:
        detail += f" [{seconds:.1f} s"
        if budget is not None:
            ok = ok and seconds <= budget
            detail += f" / {budget:.0f} s budget"
        detail += "]"
    ACCEPTANCE_RESULTS.append((name, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    assert ok, detail


def _uset(seed, n=100, prior=STD):
    return UncertaintySet.normal([prior.mu], [[prior.sigma ** 2]], n, spawn_streams(seed).uncertainty)


@functools.lru_cache(maxsize=None)
def _ns(seed, accelerate=False):
    return run_ns(IllustrativeModel(), KNOWLEDGE_SPACE, _uset(seed),
                  NSConfig(alpha_star=0.95, n_live=500, seed=seed, accelerate=accelerate))


def test_criterion_1_oracle_agreement():
    t0 = time.perf_counter()
    model = IllustrativeModel()
    U = UncertaintySet(spawn_streams(1).uncertainty.standard_normal((10_000, 1)))
    grid = np.linspace(-1.0, 1.0, 20)
    pts = [(a, b) for a in grid for b in np.linspace(-1.0, 1.0, 10)]
    hits = 0
    for d in pts:
        p = feasibility_probability(model, d, U)
        a = analytic_probability(d, STD)
        if abs(p - a) <= 3 * math.sqrt(a * (1 - a) / 1e4) + 0.005:
            hits += 1
    frac = hits / len(pts)
    report("1 oracle agreement", frac >= 0.95,
           f"{hits}/{len(pts)} grid points within 3 sigma + 0.005 ({frac:.1%}, need >= 95%)",
           time.perf_counter() - t0, 60)


def test_criterion_2_table_density():
    t0 = time.perf_counter()
    model = IllustrativeModel()
    ns_hi, ns_total, ns_evals, ns_ok = [], [], [], True
    for seed in range(3):
        res = _ns(seed)
        ns_ok &= res.stats.termination == Termination.REACHED_ALPHA and len(res.at_least(0.95)) >= 500
        ns_hi.append(len(res.at_least(0.95)))
        ns_total.append(len(res.samples))
        ns_evals.append(res.stats.model_evals)
    mc_hi, mc_evals = [], []
    for seed in range(10):
        res = run_mc(model, KNOWLEDGE_SPACE, _uset(seed), MCConfig(n_points=3249, seed=seed))
        mc_hi.append(len(res.at_least(0.95)))
        mc_evals.append(res.stats.model_evals)
    mc_ok = all(abs(c - 247) <= 60 for c in mc_hi)
    ns_frac = np.mean(np.array(ns_hi) / np.array(ns_total))
    mc_frac = np.mean(mc_hi) / 3249
    ratio = ns_frac / mc_frac
    budget_ratio = np.mean(ns_evals) / np.mean(mc_evals)
    comparable = 0.5 <= budget_ratio <= 1.5
    report("2 density vs Monte Carlo", ns_ok and mc_ok and ratio >= 2 and comparable,
           f"NS >=0.95: {ns_hi} of {ns_total}; MC >=0.95 over 10 seeds: {min(mc_hi)}..{max(mc_hi)} "
           f"(247+-60); fraction ratio {ratio:.2f} (need >= 2) at eval ratio {budget_ratio:.2f}",
           time.perf_counter() - t0, 300)


def test_criterion_3_acceleration_equivalence(tmp_path):
    t0 = time.perf_counter()
    identical, savings = True, []
    for seed in range(5):
        off, on = _ns(seed), _ns(seed, accelerate=True)
        write_samples_csv(tmp_path / f"off{seed}.csv", off.samples)
        write_samples_csv(tmp_path / f"on{seed}.csv", on.samples)
        identical &= (tmp_path / f"off{seed}.csv").read_bytes() == (tmp_path / f"on{seed}.csv").read_bytes()
        savings.append((off.stats.model_evals, on.stats.model_evals))
    ok = identical and all(b <= a for a, b in savings) and any(b < a for a, b in savings)
    pct = ", ".join(f"{100 * (a - b) / a:.1f}%" for a, b in savings)
    report("3 acceleration equivalence", ok,
           f"samples.csv byte-identical on 5 seeds: {identical}; evaluation savings {pct}",
           time.perf_counter() - t0)


def test_criterion_4_robust_conservatism():
    t0 = time.perf_counter()
    grid = np.linspace(-1.0, 1.0, 100)
    violations, members = 0, 0
    for prior in (STD, NARROW):
        for alpha in (0.5, 0.7, 0.95):
            for d1 in grid:
                for d2 in grid:
                    if analytic_robust_member((d1, d2), prior, alpha):
                        members += 1
                        violations += analytic_probability((d1, d2), prior) < alpha
    report("4 robust DS conservatism", violations == 0 and members > 0,
           f"{violations} violations among {members} robust members (2 priors x 3 alphas x 100x100)",
           time.perf_counter() - t0)


def test_criterion_5_monotonicity():
    t0 = time.perf_counter()
    sets_checked, bad = 0, 0
    results = [_ns(s) for s in range(3)] + [
        run_mc(IllustrativeModel(), KNOWLEDGE_SPACE, _uset(0), MCConfig()),
        run_nominal(IllustrativeModel(), KNOWLEDGE_SPACE, [1.0], NSConfig(n_live=200)),
    ]
    for res in results:
        nested = [{i for i, s in enumerate(res.samples) if s.prob >= a} for a in BANDS]
        sets_checked += 1
        bad += not all(a <= b for a, b in zip(nested, nested[1:]))
    report("5 reliability monotonicity", bad == 0,
           f"{sets_checked} sample sets, {bad} with non-nested bands", time.perf_counter() - t0)


def test_criterion_6_nominal_correctness():
    t0 = time.perf_counter()
    ok, lines = True, []
    for seed in range(3):
        res = run_nominal(IllustrativeModel(), KNOWLEDGE_SPACE, [1.0], NSConfig(n_live=500, seed=seed))
        live = [s for s in res.samples if s.status is Status.LIVE]
        inside = sum(nominal_member(s.d) for s in live)
        ok &= res.stats.termination == Termination.REACHED_ALPHA and inside == len(live) == 500
        lines.append(f"{inside}/{len(live)}")
    report("6 nominal DS correctness", ok, f"live points inside closed-form band: {', '.join(lines)}",
           time.perf_counter() - t0)


def test_criterion_7_empty_design_space():
    t0 = time.perf_counter()
    cfg = NSConfig(alpha_star=0.95, n_live=500, seed=0, max_iterations=10_000)
    res = run_ns(IllustrativeModel(10.0, 10.5), KNOWLEDGE_SPACE, _uset(0), cfg)
    ok = (res.stats.termination == Termination.STALLED_EMPTY_DS and res.stats.iterations < cfg.max_iterations
          and not res.at_least(cfg.alpha_star))
    report("7 empty DS detection", ok,
           f"termination={res.stats.termination} after {res.stats.iterations} iterations, "
           f"{len(res.at_least(cfg.alpha_star))} samples >= alpha*", time.perf_counter() - t0)


def test_criterion_8_surrogate_quality():
    t0 = time.perf_counter()
    res = _ns(0)
    X = np.array([s.d for s in res.samples])
    y = np.array([s.prob for s in res.samples])
    mlp = fit((X, y), MLPConfig(hidden_layers=(16, 32, 32, 16)), KNOWLEDGE_SPACE)
    val = mlp.validation_indices
    pred = mlp.predict_many(X[val])
    truth = np.array([analytic_probability(d, STD) for d in X[val]])
    upper = truth >= 0.5

    def rmse(a, b):
        return float(np.sqrt(np.mean((a - b) ** 2)))

    all_lab, all_true = rmse(pred, y[val]), rmse(pred, truth)
    up_lab, up_true = rmse(pred[upper], y[val][upper]), rmse(pred[upper], truth[upper])
    grad = max(gradient_check(MLPConfig(hidden_layers=(16, 32, 32, 16)), probe_count=40, seed=s)
               for s in range(3))
    ok = max(all_lab, all_true) <= 0.10 and max(up_lab, up_true) <= 0.05 and grad <= 1e-4
    report("8 surrogate quality", ok,
           f"held-out RMSE {all_lab:.4f} vs labels / {all_true:.4f} vs exact (<= 0.10); "
           f"upper region ({int(upper.sum())} pts) {up_lab:.4f} / {up_true:.4f} (<= 0.05); "
           f"gradient check {grad:.1e} (<= 1e-4)", time.perf_counter() - t0, 300)


def test_criterion_9_bridge_round_trip(tmp_path):
    t0 = time.perf_counter()
    U = _uset(0)
    cfg = NSConfig(n_live=100, seed=0)
    a = run_ns(IllustrativeModel(), KNOWLEDGE_SPACE, U, cfg)
    with ExternalModel([PYTHON, os.path.join(SCRIPTS, "illustrative_model.py")], 2) as ext:
        b = run_ns(ext, KNOWLEDGE_SPACE, U, cfg)
    write_samples_csv(tmp_path / "inproc.csv", a.samples)
    write_samples_csv(tmp_path / "bridge.csv", b.samples)
    same = (tmp_path / "inproc.csv").read_bytes() == (tmp_path / "bridge.csv").read_bytes()
    report("9 external-model bridge round trip", same and a.stats.model_evals == b.stats.model_evals,
           f"byte-identical samples.csv: {same}; {b.stats.model_evals} evaluations through the bridge",
           time.perf_counter() - t0)
