"""Experiment configuration: a YAML file with nested sections.

Every key is optional except the map; defaults are the values below.

.. code-block:: yaml

    map:
      A: 4.0                 # or solve: {k0: 3, p: 5, bracket: [3.9, 3.95]}
      ell: 2.0
    z: 0.0                   # number, "postcritical:i" or "periodic:n:index"
    battery: []              # list of z values for the trichotomy command
    eps: {start: 1.0e-2, factor: 0.31622776601683794, count: 5, side_ratio: 1.0}
    numerics: {n_bins: 32768, tol: 1.0e-12, tau_max: 64, depth: null,
               method: spectral, min_side_bins: 32, pass_tol: 0.07}
    mc: {n_samples: 1000000, horizon: null, seed: null}
    hts: {alpha: [1.0], t: [1.0]}
    output: mtescape-out
    cache: null
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .errors import ConfigError
from .maps import UnimodalMap, critical_orbit, find_mt_parameter, find_periodic_points

_SECTIONS = {"map", "z", "battery", "eps", "numerics", "mc", "hts", "output", "cache"}


@dataclass
class ExperimentConfig:
    A: float | None = None
    solve: dict | None = None
    ell: float = 2.0
    z: object = None
    battery: list = field(default_factory=list)
    eps_start: float = 1e-2
    eps_factor: float = 10 ** -0.5
    eps_count: int = 5
    side_ratio: float = 1.0
    n_bins: int = 1 << 15
    tol: float = 1e-12
    tau_max: int = 64
    depth: int | None = None
    method: str = "spectral"
    min_side_bins: float = 32
    pass_tol: float = 0.07
    n_samples: int = 10**6
    horizon: int | None = None
    seed: int | None = None
    alphas: list = field(default_factory=lambda: [1.0])
    ts: list = field(default_factory=lambda: [1.0])
    output: str = "mtescape-out"
    cache: str | None = None

    def eps_grid(self) -> np.ndarray:
        return self.eps_start * self.eps_factor ** np.arange(self.eps_count)

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True, default=str)
        return hashlib.sha256(blob.encode()).hexdigest()

    def validate(self, needs_seed: bool = False) -> "ExperimentConfig":
        if self.A is None and self.solve is None:
            raise ConfigError("map needs either A or solve: {k0, p, bracket}")
        if self.solve is not None:
            for k in ("k0", "p", "bracket"):
                if k not in self.solve:
                    raise ConfigError(f"map.solve lacks {k!r}")
        if not 0.0 < self.eps_factor < 1.0:
            raise ConfigError("eps.factor must lie in (0, 1)")
        if self.eps_start <= 0 or self.side_ratio <= 0:
            raise ConfigError("eps.start and eps.side_ratio must be positive")
        for name in ("eps_count", "n_bins", "tau_max", "n_samples"):
            if int(getattr(self, name)) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if self.method not in ("spectral", "mc", "both"):
            raise ConfigError(f"numerics.method must be spectral, mc or both, not {self.method!r}")
        if needs_seed and self.seed is None:
            raise ConfigError("mc.seed is required for Monte Carlo runs")
        if any(a <= 0 for a in self.alphas) or any(t <= 0 for t in self.ts):
            raise ConfigError("hts alpha and t values must be positive")
        return self


def _get(d: dict, key: str, default, cast=None):
    v = d.get(key, default)
    if v is None or cast is None:
        return v
    try:
        return cast(v)
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad value for {key!r}: {v!r}") from err


def from_dict(raw: dict) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    cfg = ExperimentConfig()
    m = raw.get("map") or {}
    if not isinstance(m, dict):
        raise ConfigError("map must be a mapping")
    cfg.A = _get(m, "A", None, float)
    cfg.solve = m.get("solve")
    cfg.ell = _get(m, "ell", 2.0, float)
    cfg.z = raw.get("z")
    cfg.battery = list(raw.get("battery") or [])
    e = raw.get("eps") or {}
    cfg.eps_start = _get(e, "start", cfg.eps_start, float)
    cfg.eps_factor = _get(e, "factor", cfg.eps_factor, float)
    cfg.eps_count = _get(e, "count", cfg.eps_count, int)
    cfg.side_ratio = _get(e, "side_ratio", cfg.side_ratio, float)
    n = raw.get("numerics") or {}
    cfg.n_bins = _get(n, "n_bins", cfg.n_bins, int)
    cfg.tol = _get(n, "tol", cfg.tol, float)
    cfg.tau_max = _get(n, "tau_max", cfg.tau_max, int)
    cfg.depth = _get(n, "depth", None, int)
    cfg.method = _get(n, "method", cfg.method, str)
    cfg.min_side_bins = _get(n, "min_side_bins", cfg.min_side_bins, float)
    cfg.pass_tol = _get(n, "pass_tol", cfg.pass_tol, float)
    mc = raw.get("mc") or {}
    cfg.n_samples = _get(mc, "n_samples", cfg.n_samples, int)
    cfg.horizon = _get(mc, "horizon", None, int)
    cfg.seed = _get(mc, "seed", None, int)
    h = raw.get("hts") or {}
    cfg.alphas = [float(a) for a in (h.get("alpha") or cfg.alphas)]
    cfg.ts = [float(t) for t in (h.get("t") or cfg.ts)]
    cfg.output = str(raw.get("output") or cfg.output)
    cfg.cache = raw.get("cache")
    return cfg


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as err:
        raise ConfigError(f"cannot read config {path}: {err}") from err
    try:
        raw = yaml.safe_load(text) or {}
    except yaml.YAMLError as err:
        raise ConfigError(f"config is not valid YAML: {err}") from err
    return from_dict(raw)


def resolve_map(cfg: ExperimentConfig) -> UnimodalMap:
    if cfg.A is not None:
        return UnimodalMap(cfg.A, cfg.ell)
    s = cfg.solve
    try:
        bracket = [float(b) for b in s["bracket"]]
    except (TypeError, ValueError) as err:
        raise ConfigError(f"bad bracket {s['bracket']!r}") from err
    if len(bracket) != 2:
        raise ConfigError("bracket needs exactly two values")
    return find_mt_parameter(int(s["k0"]), int(s["p"]), bracket, ell=cfg.ell)


def resolve_z(fmap: UnimodalMap, zdesc) -> float:
    """Turn a z descriptor into a point of the core."""
    if zdesc is None:
        raise ConfigError("no z given")
    if isinstance(zdesc, (int, float)):
        return float(zdesc)
    text = str(zdesc).strip()
    parts = text.split(":")
    try:
        nums = [int(v) for v in parts[1:]] if parts[0] in ("postcritical", "periodic") \
            else [float(text)]
    except ValueError as err:
        raise ConfigError(f"cannot parse z descriptor {zdesc!r}") from err
    if parts[0] == "postcritical" and len(nums) == 1:
        return critical_orbit(fmap).point(nums[0])
    if parts[0] == "periodic" and len(nums) == 2:
        n, idx = nums
        pts = sorted((q for q in find_periodic_points(fmap, n) if q.period == n),
                     key=lambda q: q.x)
        if not 0 <= idx < len(pts):
            raise ConfigError(f"only {len(pts)} points of prime period {n}")
        return float(pts[idx].x)
    if parts[0] in ("postcritical", "periodic"):
        raise ConfigError(f"cannot parse z descriptor {zdesc!r}")
    return nums[0]
