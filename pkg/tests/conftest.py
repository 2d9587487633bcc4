import os
import sys

import numpy as np
import pytest

from dsc.benchmark import KNOWLEDGE_SPACE, IllustrativeModel
from dsc.core import UncertaintySet

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
SCRIPTS = os.path.join(ROOT, "scripts")
CONFIGS = os.path.join(ROOT, "configs")
PYTHON = sys.executable


@pytest.fixture
def model():
    return IllustrativeModel()


@pytest.fixture
def space():
    return KNOWLEDGE_SPACE


def normal_set(n, seed=0, mean=0.0, sd=1.0):
    rng = np.random.default_rng(seed)
    return UncertaintySet(rng.normal(mean, sd, size=(n, 1)))


def write_config(path, body):
    with open(path, "w") as fh:
        fh.write(body)
    return str(path)


NS_CONFIG = """\
method = "{method}"
seed = {seed}
output = "out"

[model]
name = "illustrative"
cqa_band = [{lo}, {hi}]

[knowledge_space]
lower = [-1.0, -1.0]
upper = [1.0, 1.0]

[uncertainty]
mean = [{mean}]
cov = [[1.0]]
samples = {n_theta}

[ns]
alpha_star = 0.95
live_points = {n_live}
"""


def ns_config_text(method="ns", seed=0, lo=0.2, hi=0.75, mean=0.0, n_theta=100, n_live=500):
    return NS_CONFIG.format(method=method, seed=seed, lo=lo, hi=hi, mean=mean, n_theta=n_theta,
                            n_live=n_live)


# one (criterion, passed, detail) entry per acceptance check, printed at the end of the session
ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
