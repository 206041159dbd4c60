"""Run configuration: JSON schema version 1, parsed and validated before any computation."""
from __future__ import annotations

import copy
import json
import math
import re
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigurationError
from .grid import DEFAULT_N_NODES, DEFAULT_R_MAX, DEFAULT_R_MIN, RadialGrid, build_log_grid
from .model import (NonlinearitySpec, PotentialSpec, ProblemSpec, exponential_critical, pure_power)

SCHEMA_VERSION = 1
DEFAULT_SEED = 42

DEFAULTS = {
    "schema": SCHEMA_VERSION,
    "problem": {
        "mu": 1.0,
        "V": {"form": "constant", "coef": 1.0},
        "Q": {"form": "constant", "coef": 1.0},
        "nonlinearity": {"family": "exp_critical", "lam": 1.0, "p": 2.0, "alpha0": "4*pi"},
    },
    "grid": {"r_min": DEFAULT_R_MIN, "r_max": DEFAULT_R_MAX, "n_nodes": DEFAULT_N_NODES},
    "solver": {"tol": 1e-6, "max_iter": 5000, "init": "gaussian"},
    "moser": {"n_list": [10, 100, 1000, 10000], "alpha_list": ["2*pi", "6*pi"]},
    "outputs": {"dir": "out", "svg": True},
    "seed": DEFAULT_SEED,
}

_PI_RE = re.compile(r"^\s*(?:([-+]?\d*\.?\d+(?:[eE][-+]?\d+)?)\s*\*?\s*)?pi\s*$")
_SECTIONS = {"schema", "problem", "grid", "solver", "moser", "outputs", "seed"}
_NL_KEYS = {
    "exp_critical": {"family", "lam", "p", "alpha0", "theta", "theta_margin", "xi", "q_exp",
                     "vartheta", "M0", "s0", "beta0"},
    "pure_power": {"family", "degree", "coef"},
}
_POT_KEYS = {"form", "coef", "e0", "einf", "table_r", "table_w"}


def parse_real(value, where: str) -> float:
    """A JSON number or a string 'pi', 'k*pi', 'k pi'."""
    if isinstance(value, bool):
        raise ConfigurationError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        out = float(value)
    elif isinstance(value, str):
        m = _PI_RE.match(value)
        if not m:
            raise ConfigurationError(f"{where}: cannot read {value!r} as a number (use a number or 'k*pi')")
        out = (float(m.group(1)) if m.group(1) else 1.0) * math.pi
    else:
        raise ConfigurationError(f"{where}: expected a number, got {type(value).__name__}")
    if not math.isfinite(out):
        raise ConfigurationError(f"{where}: must be finite")
    return out


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for key, val in override.items():
        if isinstance(val, dict) and isinstance(out.get(key), dict) and key not in ("V", "Q", "nonlinearity"):
            out[key] = _merge(out[key], val)
        else:
            out[key] = copy.deepcopy(val)
    return out


def _unknown(keys, allowed, where):
    extra = sorted(set(keys) - set(allowed))
    if extra:
        raise ConfigurationError(f"{where}: unknown field(s) {', '.join(extra)}")


def _potential(d, role: str, where: str) -> PotentialSpec:
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where}: expected an object")
    _unknown(d, _POT_KEYS, where)
    form = d.get("form", "power")
    try:
        if form == "constant":
            return PotentialSpec.constant(parse_real(d.get("coef", 1.0), f"{where}.coef"), role=role)
        if form == "power":
            return PotentialSpec.power(parse_real(d.get("coef", 1.0), f"{where}.coef"),
                                       parse_real(d.get("e0", 0.0), f"{where}.e0"),
                                       parse_real(d.get("einf", 0.0), f"{where}.einf"), role=role)
        if form == "tabulated":
            return PotentialSpec(role=role, form="tabulated", e0=parse_real(d.get("e0", 0.0), f"{where}.e0"),
                                 einf=parse_real(d.get("einf", 0.0), f"{where}.einf"),
                                 table_r=tuple(parse_real(x, f"{where}.table_r") for x in d.get("table_r", [])),
                                 table_w=tuple(parse_real(x, f"{where}.table_w") for x in d.get("table_w", [])))
    except ConfigurationError as exc:
        if str(exc).startswith(where):
            raise
        raise ConfigurationError(f"{where}: {exc}") from None
    raise ConfigurationError(f"{where}.form: unknown potential form {form!r}")


def _nonlinearity(d, where: str) -> NonlinearitySpec:
    if not isinstance(d, dict):
        raise ConfigurationError(f"{where}: expected an object")
    family = d.get("family", "exp_critical")
    if family not in _NL_KEYS:
        raise ConfigurationError(f"{where}.family: unknown family {family!r}")
    _unknown(d, _NL_KEYS[family], where)
    real = {k: parse_real(v, f"{where}.{k}") for k, v in d.items() if k != "family" and v is not None}
    try:
        if family == "pure_power":
            return pure_power(real.get("degree", 2.0), real.get("coef", 1.0))
        growth = {k: real[k] for k in ("xi", "q_exp", "vartheta", "M0", "s0", "beta0") if k in real}
        return exponential_critical(real.get("lam", 1.0), real.get("p", 2.0), real.get("alpha0", 4.0 * math.pi),
                                    theta=real.get("theta"), theta_margin=real.get("theta_margin", 1e-3), **growth)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{where}: {exc}") from None


@dataclass
class RunConfig:
    raw: dict
    problem: ProblemSpec
    grid_params: tuple
    tol: float
    max_iter: int
    init: str
    n_list: list
    alpha_list: list
    out_dir: Path
    svg: bool
    seed: int

    def grid(self) -> RadialGrid:
        return build_log_grid(*self.grid_params)

    def resolved(self) -> dict:
        """Parsed input plus defaults; parsing it again gives an equal RunConfig."""
        return copy.deepcopy(self.raw)

    def with_overrides(self, out_dir=None, seed=None) -> "RunConfig":
        raw = copy.deepcopy(self.raw)
        if out_dir is not None:
            raw["outputs"]["dir"] = str(out_dir)
        if seed is not None:
            raw["seed"] = int(seed)
        return parse_config(raw)


def parse_config(data: dict) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigurationError("config: top level must be a JSON object")
    _unknown(data, _SECTIONS, "config")
    if data.get("schema", SCHEMA_VERSION) != SCHEMA_VERSION:
        raise ConfigurationError(f"schema: unsupported version {data.get('schema')!r} (expected {SCHEMA_VERSION})")
    raw = _merge(DEFAULTS, data)
    for section in ("problem", "grid", "solver", "moser", "outputs"):
        if not isinstance(raw[section], dict):
            raise ConfigurationError(f"{section}: expected an object")
    _unknown(raw["problem"], {"mu", "V", "Q", "nonlinearity"}, "problem")
    _unknown(raw["grid"], {"r_min", "r_max", "n_nodes"}, "grid")
    _unknown(raw["solver"], {"tol", "max_iter", "init"}, "solver")
    _unknown(raw["moser"], {"n_list", "alpha_list"}, "moser")
    _unknown(raw["outputs"], {"dir", "svg"}, "outputs")

    p = raw["problem"]
    mu = parse_real(p["mu"], "problem.mu")
    if not 0.0 < mu < 2.0:
        raise ConfigurationError(f"problem.mu: must lie in (0, 2), got {mu}")
    V = _potential(p["V"], "V", "problem.V")
    Q = _potential(p["Q"], "Q", "problem.Q")
    nl = _nonlinearity(p["nonlinearity"], "problem.nonlinearity")
    problem = ProblemSpec(mu, V, Q, nl)

    g = raw["grid"]
    r_min, r_max = parse_real(g["r_min"], "grid.r_min"), parse_real(g["r_max"], "grid.r_max")
    n_nodes = g["n_nodes"]
    if isinstance(n_nodes, bool) or not isinstance(n_nodes, int):
        raise ConfigurationError("grid.n_nodes: expected an integer")
    try:
        build_log_grid(r_min, r_max, 16)
        if n_nodes < 16:
            raise ConfigurationError(f"n_nodes must be an integer >= 16 (got {n_nodes})")
    except ConfigurationError as exc:
        raise ConfigurationError(f"grid: {exc}") from None

    s = raw["solver"]
    tol = parse_real(s["tol"], "solver.tol")
    if not tol > 0.0:
        raise ConfigurationError("solver.tol: must be positive")
    max_iter = s["max_iter"]
    if isinstance(max_iter, bool) or not isinstance(max_iter, int) or max_iter < 0:
        raise ConfigurationError("solver.max_iter: expected a nonnegative integer")
    if s["init"] not in ("gaussian", "cutoff"):
        raise ConfigurationError(f"solver.init: expected 'gaussian' or 'cutoff', got {s['init']!r}")

    m = raw["moser"]
    if not isinstance(m["n_list"], list) or not m["n_list"]:
        raise ConfigurationError("moser.n_list: expected a non-empty list of integers >= 2")
    for n in m["n_list"]:
        if isinstance(n, bool) or not isinstance(n, int) or n < 2:
            raise ConfigurationError(f"moser.n_list: entry {n!r} is not an integer >= 2")
    if not isinstance(m["alpha_list"], list) or not m["alpha_list"]:
        raise ConfigurationError("moser.alpha_list: expected a non-empty list")
    alphas = [parse_real(a, "moser.alpha_list") for a in m["alpha_list"]]
    if any(a <= 0.0 for a in alphas):
        raise ConfigurationError("moser.alpha_list: entries must be positive")

    o = raw["outputs"]
    if not isinstance(o["dir"], str) or not o["dir"]:
        raise ConfigurationError("outputs.dir: expected a path string")
    if not isinstance(o["svg"], bool):
        raise ConfigurationError("outputs.svg: expected true or false")
    seed = raw["seed"]
    if isinstance(seed, bool) or not isinstance(seed, int) or seed < 0:
        raise ConfigurationError("seed: expected a nonnegative integer")

    return RunConfig(raw, problem, (r_min, r_max, n_nodes), tol, max_iter, s["init"], list(m["n_list"]),
                     alphas, Path(o["dir"]), o["svg"], seed)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigurationError(f"{path}: cannot read config ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return parse_config(data)
