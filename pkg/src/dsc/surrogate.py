"""Feed-forward regression of the feasibility-probability map.

A small multilayer perceptron is fitted to ``(d, prob)`` pairs by mini-batch
gradient descent (Adam updates) on the mean squared error. Inputs are mapped
affinely from the knowledge space onto ``[-1, 1]``, hidden layers use tanh or
relu and the single output unit is a logistic sigmoid, so predictions always
lie in ``(0, 1)``.

Persisted JSON document (``schema = "dsc.mlp/1"``)::

    {
      "schema": "dsc.mlp/1",
      "architecture": {"inputs": n_d, "hidden": [16, 32, 32, 16],
                       "activation": "tanh", "output": "sigmoid"},
      "normalization": {"lower": [...], "upper": [...]},
      "layers": [{"weights": [[...], ...], "bias": [...]}, ...],
      "training": {...}
    }

``layers[k]["weights"][i][j]`` is the weight from unit ``i`` of layer ``k`` to
unit ``j`` of layer ``k + 1`` (row-major, one row per input unit).
"""
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import TrainingDivergedError

__all__ = [
    "SCHEMA",
    "ExtrapolationWarning",
    "MLPConfig",
    "FeasibilityMapMLP",
    "fit",
    "predict",
    "gradient_check",
    "loss_and_grad",
]

SCHEMA = "dsc.mlp/1"
ACTIVATIONS = ("tanh", "relu")
_P_MIN = np.finfo(np.float64).tiny
_P_MAX = np.nextafter(1.0, 0.0)


class ExtrapolationWarning(UserWarning):
    """Prediction requested outside the box the network was trained on."""


@dataclass(frozen=True)
class MLPConfig:
    hidden_layers: tuple = (16, 32, 32, 16)
    activation: str = "tanh"
    epochs: int = 2000
    batch_size: int = 32
    learning_rate: float = 1e-3
    seed: int = 0
    validation_fraction: float = 0.2
    patience: int = 50

    def __post_init__(self):
        object.__setattr__(self, "hidden_layers", tuple(int(h) for h in self.hidden_layers))
        if len(self.hidden_layers) < 1 or min(self.hidden_layers) < 1:
            raise ValueError("need at least one hidden layer, all widths >= 1")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"activation must be one of {ACTIVATIONS}")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")
        if not self.learning_rate > 0:
            raise ValueError("learning_rate must be > 0")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ValueError("validation_fraction must lie in [0, 1)")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")


def _sigmoid(z):
    # split by sign to avoid overflow in exp
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def _init_params(sizes, activation, rng):
    params = []
    gain = 6.0 if activation == "relu" else 3.0
    for n_in, n_out in zip(sizes[:-1], sizes[1:]):
        limit = math.sqrt(gain / n_in)
        W = rng.uniform(-limit, limit, size=(n_in, n_out))
        params.append((W, np.zeros(n_out)))
    return params


def _forward(params, X, activation):
    acts = [X]
    pre = []
    a = X
    last = len(params) - 1
    for k, (W, b) in enumerate(params):
        z = a @ W + b
        pre.append(z)
        if k == last:
            a = _sigmoid(z)
        elif activation == "tanh":
            a = np.tanh(z)
        else:
            a = np.maximum(z, 0.0)
        acts.append(a)
    return acts, pre


def loss_and_grad(params, X, t, activation):
    """Mean squared error and its gradient with respect to every (W, b)."""
    acts, pre = _forward(params, X, activation)
    y = acts[-1][:, 0]
    r = y - t
    loss = float(np.mean(r * r))
    n = X.shape[0]
    delta = (2.0 / n * r * y * (1.0 - y))[:, None]
    grads = [None] * len(params)
    for k in range(len(params) - 1, -1, -1):
        W, _ = params[k]
        grads[k] = (acts[k].T @ delta, delta.sum(axis=0))
        if k > 0:
            da = delta @ W.T
            if activation == "tanh":
                delta = da * (1.0 - acts[k] ** 2)
            else:
                delta = da * (pre[k - 1] > 0.0)
    return loss, grads


class FeasibilityMapMLP:
    """Trained surrogate ``d -> probability``. Treat instances as immutable."""

    def __init__(self, params, lower, upper, activation="tanh", training=None):
        self.params = [(np.array(W, dtype=np.float64), np.array(b, dtype=np.float64))
                       for W, b in params]
        for W, b in self.params:
            W.setflags(write=False)
            b.setflags(write=False)
        self.lower = np.array(lower, dtype=np.float64)
        self.upper = np.array(upper, dtype=np.float64)
        if self.params[0][0].shape[0] != self.lower.size:
            raise ValueError("input layer does not match normalization bounds")
        if self.params[-1][0].shape[1] != 1:
            raise ValueError("output layer must have a single unit")
        if np.any(self.lower >= self.upper):
            raise ValueError("normalization bounds need lower < upper")
        self.activation = activation
        self.training = dict(training or {})

    @property
    def n_inputs(self):
        return self.lower.size

    @property
    def hidden_layers(self):
        return [W.shape[1] for W, _ in self.params[:-1]]

    def _normalize(self, X):
        return 2.0 * (X - self.lower) / (self.upper - self.lower) - 1.0

    def predict_many(self, X, warn=True):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_inputs:
            raise ValueError(f"expected points of dimension {self.n_inputs}, got shape {X.shape}")
        if warn and (np.any(X < self.lower) or np.any(X > self.upper)):
            warnings.warn("prediction outside the training knowledge space", ExtrapolationWarning,
                          stacklevel=2)
        acts, _ = _forward(self.params, self._normalize(X), self.activation)
        # a saturated sigmoid rounds to exactly 0 or 1; keep the open interval
        return np.clip(acts[-1][:, 0], _P_MIN, _P_MAX)

    def predict(self, d, warn=True) -> float:
        d = np.asarray(d, dtype=np.float64)
        if d.ndim != 1:
            raise ValueError("predict expects a single point; use predict_many for arrays")
        return float(self.predict_many(d[None, :], warn=warn)[0])

    def to_dict(self):
        return {
            "schema": SCHEMA,
            "architecture": {
                "inputs": self.n_inputs,
                "hidden": self.hidden_layers,
                "activation": self.activation,
                "output": "sigmoid",
            },
            "normalization": {"lower": self.lower.tolist(), "upper": self.upper.tolist()},
            "layers": [{"weights": W.tolist(), "bias": b.tolist()} for W, b in self.params],
            "training": self.training,
        }

    @classmethod
    def from_dict(cls, doc):
        schema = doc.get("schema")
        if schema != SCHEMA:
            raise ValueError(f"unsupported model schema {schema!r}, expected {SCHEMA!r}")
        arch = doc["architecture"]
        params = [(layer["weights"], layer["bias"]) for layer in doc["layers"]]
        mlp = cls(params, doc["normalization"]["lower"], doc["normalization"]["upper"],
                  arch["activation"], doc.get("training"))
        if mlp.hidden_layers != list(arch["hidden"]):
            raise ValueError("layer shapes do not match the declared architecture")
        return mlp

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def predict(mlp: FeasibilityMapMLP, d) -> float:
    return mlp.predict(d)


@dataclass
class _Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: list = field(default_factory=list)
    v: list = field(default_factory=list)

    def step(self, params, grads):
        if not self.m:
            self.m = [np.zeros_like(p) for pair in params for p in pair]
            self.v = [np.zeros_like(p) for pair in params for p in pair]
        self.t += 1
        c1 = 1.0 - self.beta1 ** self.t
        c2 = 1.0 - self.beta2 ** self.t
        i = 0
        for pair, gpair in zip(params, grads):
            for p, g in zip(pair, gpair):
                m, v = self.m[i], self.v[i]
                m *= self.beta1
                m += (1.0 - self.beta1) * g
                v *= self.beta2
                v += (1.0 - self.beta2) * g * g
                p -= self.lr * (m / c1) / (np.sqrt(v / c2) + self.eps)
                i += 1


def _split(n, fraction, rng):
    perm = rng.permutation(n)
    n_val = int(round(fraction * n)) if fraction > 0 else 0
    n_val = min(n_val, n - 1)
    return perm[n_val:], perm[:n_val]


def fit(dataset, cfg: MLPConfig = MLPConfig(), space=None) -> FeasibilityMapMLP:
    """Train a surrogate on ``dataset``.

    Parameters
    ----------
    dataset : sequence of (d, prob) or tuple (X, y) of arrays
    cfg : MLPConfig
    space : KnowledgeSpace, optional
        Box used for input normalization; the data bounding box if omitted.

    Returns
    -------
    FeasibilityMapMLP
        With the weights of the best validation epoch. ``training`` records
        the split indices' sizes, final losses and the held-out RMSE.
    """
    X, y = _as_arrays(dataset)
    n, nd = X.shape
    if n < 10:
        raise ValueError(f"need at least 10 samples to fit a surrogate, got {n}")
    if np.any(~np.isfinite(y)) or np.any((y < 0) | (y > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    if space is not None:
        lower, upper = space.lower.copy(), space.upper.copy()
        if np.any(X < lower) or np.any(X > upper):
            raise ValueError("training points outside the knowledge space")
    else:
        lower, upper = X.min(axis=0), X.max(axis=0)
        flat = upper <= lower
        lower[flat] -= 0.5
        upper[flat] += 0.5

    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(cfg.seed))))
    train_idx, val_idx = _split(n, cfg.validation_fraction, rng)
    Xn = 2.0 * (X - lower) / (upper - lower) - 1.0
    Xt, yt = Xn[train_idx], y[train_idx]
    Xv, yv = Xn[val_idx], y[val_idx]

    sizes = [nd, *cfg.hidden_layers, 1]
    params = [(W, b) for W, b in _init_params(sizes, cfg.activation, rng)]
    opt = _Adam(cfg.learning_rate)

    def mse(Xs, ys):
        acts, _ = _forward(params, Xs, cfg.activation)
        r = acts[-1][:, 0] - ys
        return float(np.mean(r * r))

    monitor = (Xv, yv) if len(val_idx) else (Xt, yt)
    best = mse(*monitor)
    best_params = [(W.copy(), b.copy()) for W, b in params]
    best_epoch = 0
    stale = 0
    epoch = 0
    bs = cfg.batch_size
    for epoch in range(1, cfg.epochs + 1):
        order = rng.permutation(len(train_idx))
        for start in range(0, len(order), bs):
            batch = order[start:start + bs]
            loss, grads = loss_and_grad(params, Xt[batch], yt[batch], cfg.activation)
            if not math.isfinite(loss):
                raise TrainingDivergedError("training diverged; reduce learning rate")
            opt.step(params, grads)
        score = mse(*monitor)
        if not math.isfinite(score):
            raise TrainingDivergedError("training diverged; reduce learning rate")
        if score < best:
            best, best_epoch, stale = score, epoch, 0
            best_params = [(W.copy(), b.copy()) for W, b in params]
        else:
            stale += 1
            if stale >= cfg.patience:
                break

    params = best_params
    train_mse = mse(Xt, yt)
    val_mse = mse(Xv, yv) if len(val_idx) else None
    training = {
        "epochs_run": epoch,
        "best_epoch": best_epoch,
        "n_train": int(len(train_idx)),
        "n_validation": int(len(val_idx)),
        "train_mse": train_mse,
        "validation_mse": val_mse,
        "validation_rmse": None if val_mse is None else math.sqrt(val_mse),
        "seed": int(cfg.seed),
        "learning_rate": cfg.learning_rate,
        "batch_size": cfg.batch_size,
        "loss": "mse",
        "optimizer": "adam",
    }
    mlp = FeasibilityMapMLP(params, lower, upper, cfg.activation, training)
    mlp.validation_indices = val_idx
    mlp.train_indices = train_idx
    return mlp


def _as_arrays(dataset):
    if isinstance(dataset, tuple) and len(dataset) == 2 and np.ndim(dataset[1]) == 1:
        X = np.asarray(dataset[0], dtype=np.float64)
        y = np.asarray(dataset[1], dtype=np.float64)
    else:
        pairs = list(dataset)
        if not pairs:
            raise ValueError("empty dataset")
        X = np.array([np.asarray(d, dtype=np.float64) for d, _ in pairs])
        y = np.array([float(p) for _, p in pairs])
    if X.ndim == 1:
        X = X[:, None]
    if X.ndim != 2 or X.shape[0] != y.shape[0]:
        raise ValueError("inputs and targets have inconsistent shapes")
    return X, y


def gradient_check(cfg: MLPConfig = MLPConfig(hidden_layers=(4, 3)), probe_count=20, seed=0,
                   n_inputs=2, n_samples=16, params=None, data=None):
    """Largest relative error between back-propagated and finite-difference gradients.

    Probes ``probe_count`` randomly chosen parameters with central differences
    of step ``1e-6 * max(1, |w|)``. For relu networks probes whose perturbation
    flips the sign of any hidden pre-activation are redrawn.
    """
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed))))
    if data is None:
        X = rng.uniform(-1.0, 1.0, size=(n_samples, n_inputs))
        t = rng.uniform(0.0, 1.0, size=n_samples)
    else:
        X, t = data
    if params is None:
        params = _init_params([X.shape[1], *cfg.hidden_layers, 1], cfg.activation, rng)
        # random biases so the check does not sit on a symmetric point
        params = [(W, rng.uniform(-0.5, 0.5, size=b.shape)) for W, b in params]
    params = [(np.array(W, dtype=np.float64), np.array(b, dtype=np.float64)) for W, b in params]
    _, grads = loss_and_grad(params, X, t, cfg.activation)

    flat = [(k, j) for k in range(len(params)) for j in range(2)]
    sizes = [params[k][j].size for k, j in flat]
    total = sum(sizes)

    def signs():
        _, pre = _forward(params, X, cfg.activation)
        return [z > 0 for z in pre[:-1]]

    worst = 0.0
    done = 0
    attempts = 0
    while done < probe_count:
        attempts += 1
        if attempts > 100 * probe_count:
            raise RuntimeError("could not find enough kink-free probes")
        pos = int(rng.integers(total))
        slot = 0
        while pos >= sizes[slot]:
            pos -= sizes[slot]
            slot += 1
        k, j = flat[slot]
        arr = params[k][j].reshape(-1)
        w0 = arr[pos]
        h = 1e-6 * max(1.0, abs(w0))
        arr[pos] = w0 + h
        lp, _ = loss_and_grad(params, X, t, cfg.activation)
        sp = signs() if cfg.activation == "relu" else None
        arr[pos] = w0 - h
        lm, _ = loss_and_grad(params, X, t, cfg.activation)
        sm = signs() if cfg.activation == "relu" else None
        arr[pos] = w0
        if sp is not None and any(np.any(a != b) for a, b in zip(sp, sm)):
            continue
        numeric = (lp - lm) / (2.0 * h)
        analytic = float(grads[k][j].reshape(-1)[pos])
        denom = max(abs(analytic), abs(numeric))
        err = 0.0 if denom < 1e-10 else abs(analytic - numeric) / denom
        worst = max(worst, err)
        done += 1
    return worst
