"""TOML run configuration.

Example::

    method = "ns"            # "mc", "ns" or "nominal"
    seed = 1
    output = "out"

    [model]
    name = "illustrative"    # registry name ...
    cqa_band = [0.20, 0.75]
    # command = ["python3", "model.py"]   ... or an external executable
    # n_constraints = 2
    # timeout = 60

    [knowledge_space]
    lower = [-1.0, -1.0]
    upper = [1.0, 1.0]

    [uncertainty]            # exactly one source: normal spec or file
    mean = [0.0]
    cov = [[1.0]]
    samples = 100
    # file = "thetas.csv"

    [ns]
    alpha_star = 0.95
    live_points = 500

Relative paths (``output``, ``uncertainty.file``, the model command's
working directory) resolve against the config file's directory.
"""
import math
import os
import re
from dataclasses import dataclass, field, replace
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from .benchmark import CQA_LOWER, CQA_UPPER, IllustrativeModel
from .core import KnowledgeSpace, UncertaintySet
from .errors import ConfigError
from .mc import MCConfig
from .ns import NSConfig
from .rng import spawn_streams

__all__ = ["RunConfig", "load_config", "parse_config", "MODEL_REGISTRY", "build_model"]

METHODS = ("mc", "ns", "nominal")


def _illustrative(spec):
    band = spec.get("cqa_band", [CQA_LOWER, CQA_UPPER])
    if not (isinstance(band, list) and len(band) == 2 and all(_is_number(x) for x in band)):
        raise ConfigError("expected [lower, upper]", "model.cqa_band")
    if band[0] > band[1]:
        raise ConfigError("lower must not exceed upper", "model.cqa_band")
    return IllustrativeModel(float(band[0]), float(band[1]))


MODEL_REGISTRY = {"illustrative": _illustrative}


def _is_number(x):
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


@dataclass
class RunConfig:
    method: str
    model: dict
    space: KnowledgeSpace
    seed: int = 0
    output: str = "out"
    uncertainty_normal: Optional[dict] = None
    uncertainty_file: Optional[str] = None
    mc: MCConfig = field(default_factory=MCConfig)
    ns: NSConfig = field(default_factory=NSConfig)
    nominal_theta: Optional[list] = None
    base_dir: str = "."
    source: str = ""

    def with_overrides(self, seed=None, accelerate=None, output=None):
        cfg = replace(self)
        if seed is not None:
            cfg.seed = int(seed)
            cfg.mc = replace(cfg.mc, seed=int(seed))
            cfg.ns = replace(cfg.ns, seed=int(seed))
        if accelerate is not None:
            cfg.ns = replace(cfg.ns, accelerate=bool(accelerate))
        if output is not None:
            cfg.output = output
        return cfg

    def build_uncertainty(self) -> UncertaintySet:
        if self.uncertainty_file is not None:
            path = os.path.join(self.base_dir, self.uncertainty_file)
            try:
                return UncertaintySet.from_csv(path)
            except (OSError, ValueError) as exc:
                raise ConfigError(str(exc), "uncertainty.file") from None
        spec = self.uncertainty_normal
        rng = spawn_streams(self.seed).uncertainty
        return UncertaintySet.normal(spec["mean"], spec["cov"], spec["samples"], rng)

    def build_model(self):
        return build_model(self.model, self.base_dir)


def build_model(spec, base_dir="."):
    if "command" in spec:
        from .bridge import ExternalModel

        n = spec.get("n_constraints")
        if not isinstance(n, int) or isinstance(n, bool) or n < 1:
            raise ConfigError("external models need an integer n_constraints >= 1", "model.n_constraints")
        timeout = spec.get("timeout", 60)
        if not _is_number(timeout) or timeout <= 0:
            raise ConfigError("must be a positive number of seconds", "model.timeout")
        return ExternalModel(spec["command"], n, timeout, cwd=base_dir)
    factory = MODEL_REGISTRY.get(spec["name"])
    if factory is None:
        raise ConfigError(f"unknown model {spec['name']!r}; registered: {sorted(MODEL_REGISTRY)}", "model.name")
    return factory(spec)


class _Reader:
    """Typed access to the parsed document with field-path diagnostics."""

    def __init__(self, text):
        self.text = text

    def line_of(self, path):
        parts = path.split(".")
        key = parts[-1]
        section = ".".join(parts[:-1])
        current = ""
        for lineno, raw in enumerate(self.text.splitlines(), start=1):
            line = raw.strip()
            m = re.match(r"^\[\s*([^\]]+?)\s*\]", line)
            if m:
                current = m.group(1)
                continue
            if current == section and re.match(rf"^{re.escape(key)}\s*=", line):
                return lineno
        return None

    def error(self, path, message):
        return ConfigError(message, path, self.line_of(path))

    def get(self, table, path, kind, default=None, required=False):
        key = path.split(".")[-1]
        if key not in table:
            if required:
                raise ConfigError("missing required field", path)
            return default
        value = table[key]
        if kind == "int":
            if not isinstance(value, int) or isinstance(value, bool):
                raise self.error(path, f"expected an integer, got {value!r}")
        elif kind == "float":
            if not _is_number(value):
                raise self.error(path, f"expected a finite number, got {value!r}")
            value = float(value)
        elif kind == "bool":
            if not isinstance(value, bool):
                raise self.error(path, f"expected true or false, got {value!r}")
        elif kind == "str":
            if not isinstance(value, str):
                raise self.error(path, f"expected a string, got {value!r}")
        elif kind == "vector":
            if not (isinstance(value, list) and value and all(_is_number(x) for x in value)):
                raise self.error(path, "expected a non-empty list of numbers")
            value = [float(x) for x in value]
        elif kind == "matrix":
            if not (isinstance(value, list) and value and all(
                    isinstance(r, list) and r and all(_is_number(x) for x in r) for r in value)):
                raise self.error(path, "expected a list of lists of numbers")
            value = [[float(x) for x in r] for r in value]
        elif kind == "table":
            if not isinstance(value, dict):
                raise self.error(path, "expected a table")
        return value


_SECTION_KEYS = {
    "model": {"name", "cqa_band", "command", "n_constraints", "timeout"},
    "knowledge_space": {"lower", "upper"},
    "uncertainty": {"file", "mean", "cov", "mu", "sigma", "samples"},
    "mc": {"n_points", "sequence", "skip"},
    "ns": {"alpha_star", "live_points", "proposals", "enlargement", "shrink_rate",
           "stall_window", "stall_epsilon", "max_iterations", "accelerate"},
    "nominal": {"theta"},
}


def _check_keys(r, doc):
    for section, allowed in _SECTION_KEYS.items():
        table = doc.get(section)
        if not isinstance(table, dict):
            continue
        for key in table:
            if key not in allowed:
                raise r.error(f"{section}.{key}", f"unknown field; expected one of {sorted(allowed)}")


def load_config(path) -> RunConfig:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    base = os.path.dirname(os.path.abspath(path))
    return parse_config(raw.decode("utf-8"), base_dir=base)


def parse_config(text, base_dir=".") -> RunConfig:
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ConfigError(f"syntax error: {exc}", line=int(m.group(1)) if m else None) from None
    r = _Reader(text)
    known = {"method", "seed", "output", "model", "knowledge_space", "uncertainty", "mc", "ns", "nominal"}
    for key in doc:
        if key not in known:
            raise r.error(key, f"unknown field; expected one of {sorted(known)}")
    _check_keys(r, doc)

    method = r.get(doc, "method", "str", required=True)
    if method not in METHODS:
        raise r.error("method", f"must be one of {METHODS}, got {method!r}")
    seed = r.get(doc, "seed", "int", 0)
    if not 0 <= seed < 1 << 64:
        raise r.error("seed", "must be a 64-bit unsigned integer")
    output = r.get(doc, "output", "str", "out")

    model = r.get(doc, "model", "table", required=True)
    if ("name" in model) == ("command" in model):
        raise ConfigError("give exactly one of model.name or model.command", "model")
    if "name" in model:
        name = r.get(model, "model.name", "str")
        if name not in MODEL_REGISTRY:
            raise r.error("model.name", f"unknown model {name!r}; registered: {sorted(MODEL_REGISTRY)}")
    else:
        cmd = model["command"]
        if isinstance(cmd, str):
            if not cmd.strip():
                raise r.error("model.command", "empty command")
        elif not (isinstance(cmd, list) and cmd and all(isinstance(c, str) for c in cmd)):
            raise r.error("model.command", "expected a string or a list of strings")

    ks = r.get(doc, "knowledge_space", "table", required=True)
    lower = r.get(ks, "knowledge_space.lower", "vector", required=True)
    upper = r.get(ks, "knowledge_space.upper", "vector", required=True)
    if len(lower) != len(upper):
        raise r.error("knowledge_space.upper", f"has {len(upper)} entries but lower has {len(lower)}")
    for i, (lo, hi) in enumerate(zip(lower, upper)):
        if not lo < hi:
            raise r.error("knowledge_space.lower",
                          f"lower[{i}]={lo!r} must be strictly less than upper[{i}]={hi!r}")
    space = KnowledgeSpace(lower, upper)

    cfg = RunConfig(method=method, model=model, space=space, seed=seed, output=output,
                    base_dir=base_dir, source=text)

    unc = doc.get("uncertainty")
    if unc is not None:
        unc = r.get(doc, "uncertainty", "table")
        has_file = "file" in unc
        has_normal = any(k in unc for k in ("mean", "cov", "mu", "sigma", "samples"))
        if has_file == has_normal:
            raise ConfigError("give exactly one uncertainty source: a normal spec "
                              "(mean/cov/samples or mu/sigma/samples) or a file", "uncertainty")
        if has_file:
            cfg.uncertainty_file = r.get(unc, "uncertainty.file", "str")
        else:
            samples = r.get(unc, "uncertainty.samples", "int", required=True)
            if samples < 1:
                raise r.error("uncertainty.samples", "must be >= 1")
            if "mu" in unc or "sigma" in unc:
                if "mean" in unc or "cov" in unc:
                    raise ConfigError("use either mu/sigma or mean/cov, not both", "uncertainty")
                mu = r.get(unc, "uncertainty.mu", "float", 0.0)
                sigma = r.get(unc, "uncertainty.sigma", "float", 1.0)
                if sigma <= 0:
                    raise r.error("uncertainty.sigma", "must be > 0")
                mean, cov = [mu], [[sigma * sigma]]
            else:
                mean = r.get(unc, "uncertainty.mean", "vector", required=True)
                cov = r.get(unc, "uncertainty.cov", "matrix", required=True)
                if len(cov) != len(mean) or any(len(row) != len(mean) for row in cov):
                    raise r.error("uncertainty.cov", f"must be {len(mean)}x{len(mean)}")
            cfg.uncertainty_normal = {"mean": mean, "cov": cov, "samples": samples}
    elif method != "nominal":
        raise ConfigError("missing required section", "uncertainty")

    mc = r.get(doc, "mc", "table", {})
    try:
        cfg.mc = MCConfig(
            n_points=r.get(mc, "mc.n_points", "int", MCConfig.n_points),
            sequence=r.get(mc, "mc.sequence", "str", MCConfig.sequence),
            seed=seed,
            skip=r.get(mc, "mc.skip", "int", MCConfig.skip),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "mc") from None

    ns = r.get(doc, "ns", "table", {})
    d = NSConfig()
    try:
        cfg.ns = NSConfig(
            alpha_star=r.get(ns, "ns.alpha_star", "float", d.alpha_star),
            n_live=r.get(ns, "ns.live_points", "int", d.n_live),
            n_proposals=r.get(ns, "ns.proposals", "int", d.n_proposals),
            enlargement0=r.get(ns, "ns.enlargement", "float", d.enlargement0),
            shrink_rate=r.get(ns, "ns.shrink_rate", "float", d.shrink_rate),
            stall_window=r.get(ns, "ns.stall_window", "int", d.stall_window),
            stall_epsilon=r.get(ns, "ns.stall_epsilon", "float", d.stall_epsilon),
            max_iterations=r.get(ns, "ns.max_iterations", "int", d.max_iterations),
            seed=seed,
            accelerate=r.get(ns, "ns.accelerate", "bool", d.accelerate),
        )
    except ValueError as exc:
        raise ConfigError(str(exc), "ns") from None

    if method == "nominal":
        nom = r.get(doc, "nominal", "table", {})
        if "theta" in nom:
            cfg.nominal_theta = r.get(nom, "nominal.theta", "vector")
        elif cfg.uncertainty_normal is not None:
            cfg.nominal_theta = list(cfg.uncertainty_normal["mean"])
        else:
            raise ConfigError("nominal runs need nominal.theta (or a normal uncertainty mean)",
                              "nominal.theta")
    return cfg
