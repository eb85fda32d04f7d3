"""Command-line experiment runner.

Every subcommand reads one YAML config (see :mod:`mtescape.config`),
writes its tables into the output directory and finishes with
``manifest.json``.  Exit status is 0 on success, 2 for bad input or
configuration and 3 when a numerical routine fails.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import threading
import time
from collections import Counter
from contextlib import contextmanager
from importlib import metadata
from pathlib import Path

import numpy as np

from .config import ExperimentConfig, load_config, resolve_map, resolve_z
from .errors import ConfigError, InputError, MTError, NumericalError
from .hts import hts_csv, hts_sweep
from .maps import UnimodalMap, classify_point, critical_orbit
from .measure import FORMAT_VERSION, InvariantDensity, build_ulam, default_breakpoints, invariant_density
from .open_system import _num, local_escape_sweep, sweep_csv
from .svgplot import line_chart
from .symbolic import build_partition

CACHE_ENV = "MTESCAPE_CACHE"
EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL = 0, 2, 3


def _version() -> str:
    try:
        return metadata.version("mtescape")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    return obj


class Cache:
    """Content-addressed store of text blobs.

    Keys hash the map parameters at 17 significant digits, the stage
    payload and the package version.  With ``root=None`` nothing is
    stored and every lookup computes.
    """

    def __init__(self, root, fmap: UnimodalMap | None = None):
        self.root = Path(root) if root else None
        self.fmap = fmap
        self.hits: Counter = Counter()
        self.misses: Counter = Counter()
        self._lock = threading.Lock()
        if self.root is not None:
            self.root.mkdir(parents=True, exist_ok=True)

    def key(self, stage: str, payload: dict) -> str:
        full = {"stage": stage, "payload": payload, "version": _version(),
                "format": FORMAT_VERSION}
        if self.fmap is not None:
            full["A"] = f"{self.fmap.A:.17g}"
            full["ell"] = f"{self.fmap.ell:.17g}"
        blob = json.dumps(full, sort_keys=True, default=repr)
        return hashlib.sha256(blob.encode()).hexdigest()

    def text(self, stage: str, payload: dict, compute) -> str:
        if self.root is None:
            with self._lock:
                self.misses[stage] += 1
            return compute()
        path = self.root / stage / f"{self.key(stage, payload)}.txt"
        if path.exists():
            with self._lock:
                self.hits[stage] += 1
            return path.read_text()
        with self._lock:
            self.misses[stage] += 1
        text = compute()
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(f".{os.getpid()}.{threading.get_ident()}.tmp")
        tmp.write_text(text)
        os.replace(tmp, path)
        return text

    def memo(self, key: dict, compute):
        """JSON-valued memo in the form the sweep functions expect."""
        stage = key.get("stage", "point")
        return json.loads(self.text(stage, key, lambda: json.dumps(compute())))


class Run:
    """Bookkeeping for one invocation: outputs, timings, manifest."""

    def __init__(self, command: str, cfg: ExperimentConfig, out: Path, cache: Cache):
        self.command, self.cfg, self.out, self.cache = command, cfg, out, cache
        self.outputs: list[str] = []
        self.times: dict[str, float] = {}
        out.mkdir(parents=True, exist_ok=True)

    @contextmanager
    def stage(self, name: str):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.times[name] = self.times.get(name, 0.0) + time.perf_counter() - t0

    def write(self, name: str, text: str):
        (self.out / name).write_text(text)
        if name not in self.outputs:
            self.outputs.append(name)

    def write_json(self, name: str, obj):
        self.write(name, json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")

    def manifest(self, status: int = 0):
        versions = {"mtescape": _version(), "python": sys.version.split()[0]}
        for pkg in ("numpy", "scipy", "numba", "pyyaml"):
            try:
                versions[pkg] = metadata.version(pkg)
            except metadata.PackageNotFoundError:
                pass
        doc = {"command": self.command, "config_hash": self.cfg.digest(), "versions": versions,
               "cache_dir": str(self.cache.root) if self.cache.root else None,
               "cache_hits": dict(self.cache.hits), "cache_misses": dict(self.cache.misses),
               "wall_times": {k: round(v, 6) for k, v in self.times.items()},
               "outputs": sorted(self.outputs), "status": status}
        (self.out / "manifest.json").write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ----------------------------------------------------------------- stages
def _density(run: Run, fmap: UnimodalMap, n_bins: int) -> InvariantDensity:
    """Unpunctured density, always parsed back from its text form.

    Going through the text on cold runs too makes warm and cold runs use
    bit-identical numbers.
    """
    def compute():
        orbit = critical_orbit(fmap)
        bp = default_breakpoints(fmap, orbit)
        return invariant_density(build_ulam(fmap, n_bins, breakpoints=bp), tol=run.cfg.tol,
                                 orbit=orbit).to_text()

    with run.stage("density"):
        text = run.cache.text("density", {"n_bins": n_bins, "hole": "none"}, compute)
    return InvariantDensity.from_text(text)


def _sweep(run: Run, fmap, density, z: float, method: str, workers):
    cfg = run.cfg
    with run.stage("escape"):
        return local_escape_sweep(
            fmap, z, cfg.eps_grid(), method=method, n_bins=cfg.n_bins, side_ratio=cfg.side_ratio,
            min_side_bins=cfg.min_side_bins, n_samples=cfg.n_samples, horizon=cfg.horizon,
            seed=cfg.seed, density=density, workers=workers, tol=cfg.tol, memo=run.cache.memo)


def _hts(run: Run, fmap, density, z: float, alphas, ts, workers):
    cfg = run.cfg
    with run.stage("hts"):
        return hts_sweep(fmap, z, cfg.eps_grid(), alphas, ts, n_samples=cfg.n_samples,
                         seed=cfg.seed, side_ratio=cfg.side_ratio, density=density,
                         workers=workers, memo=run.cache.memo)


def _ratio_chart(title: str, series, predicted: dict) -> str:
    hl = [(f"{k} = {v:.4g}", v) for k, v in predicted.items() if math.isfinite(v)]
    return line_chart(series, title=title, hlines=hl)


# ----------------------------------------------------------------- commands
def cmd_find_param(run: Run, fmap: UnimodalMap, args) -> int:
    with run.stage("orbit"):
        orbit = critical_orbit(fmap)
        part = build_partition(orbit, fmap)
    rep = {"A": f"{fmap.A:.17g}", "ell": fmap.ell, "k0": orbit.k0, "p": orbit.p,
           "orbit": [f"{x:.17g}" for x in orbit.orbit], "lambda_tail": orbit.lambda_tail,
           "orientation": orbit.orientation, "residual": orbit.residual,
           "partition_size": part.M}
    run.write_json("find_param.json", rep)
    print(json.dumps(_jsonable(rep), indent=2, sort_keys=True))
    return EXIT_OK


def cmd_density(run: Run, fmap: UnimodalMap, args) -> int:
    dens = _density(run, fmap, run.cfg.n_bins)
    lines = ["left,right,value,mass"]
    e = dens.edges
    lines += [f"{_num(e[i])},{_num(e[i + 1])},{_num(v)},{_num(m)}"
              for i, (v, m) in enumerate(zip(dens.values, dens.masses))]
    run.write("density.csv", "\n".join(lines) + "\n")
    spikes = {"n_bins": dens.n_bins, "rho_c": dens.rho_c, "residual": dens.residual,
              "spikes": [{"point": f"{q:.17g}", "exponent": dens.spike_exponents.get(float(q))}
                         for q in dens.spikes]}
    run.write_json("spikes.json", spikes)
    for s in spikes["spikes"]:
        ex = s["exponent"]
        print(f"spike at {s['point']}: exponent {'n/a' if ex is None else f'{ex:.4f}'}")
    return EXIT_OK


def cmd_escape(run: Run, fmap: UnimodalMap, args) -> int:
    cfg = run.cfg
    z = resolve_z(fmap, cfg.z)
    dens = _density(run, fmap, cfg.n_bins)
    rep = _sweep(run, fmap, dens, z, cfg.method, args.workers)
    run.write("escape.csv", sweep_csv(rep))
    summary = {"z": f"{z:.17g}", "case": rep.case, "predicted": rep.predicted,
               "period": rep.period, "multiplier": rep.multiplier,
               "extrapolated": rep.extrapolated, "last_raw": rep.last_raw,
               "method": rep.method, "observed": rep.observed}
    run.write_json("escape_report.json", summary)
    eps = [o[0] for o in rep.observed]
    run.write("escape.svg", _ratio_chart(f"escape ratio at z={z:.6g}",
                                         [("e(H)/mu(H)", eps, [o[1] for o in rep.observed])],
                                         {"predicted": rep.predicted}))
    print(f"z={z:.10g} case={rep.case} predicted={rep.predicted:.6f} "
          f"extrapolated={rep.extrapolated:.6f}")
    return EXIT_OK


def cmd_hts(run: Run, fmap: UnimodalMap, args) -> int:
    cfg = run.cfg
    z = resolve_z(fmap, cfg.z)
    dens = _density(run, fmap, cfg.n_bins)
    rep = _hts(run, fmap, dens, z, cfg.alphas, cfg.ts, args.workers)
    run.write("hts.csv", hts_csv(rep))
    run.write_json("hts_report.json", {
        "z": f"{z:.17g}", "case": rep.case, "predicted": rep.predicted,
        "extrapolated": [{"alpha": a, "t": t, "L": v} for (a, t), v in rep.extrapolated.items()]})
    series = []
    for (a, t) in rep.extrapolated:
        sel = [r for r in rep.rows if r.alpha == a and r.t == t]
        series.append((f"L alpha={a:g} t={t:g}", [math.sqrt(r.eps_L * r.eps_R) for r in sel],
                       [r.L_value for r in sel]))
    run.write("hts.svg", _ratio_chart(f"hitting-time statistics at z={z:.6g}", series,
                                      {"predicted": rep.predicted}))
    for (a, t), v in rep.extrapolated.items():
        print(f"alpha={a:g} t={t:g} L={v:.6f} (predicted {rep.predicted:.6f})")
    return EXIT_OK


TRICHOTOMY_COLUMNS = ("z", "case", "period", "multiplier", "predicted", "escape_extrapolated",
                      "escape_last", "escape_pass", "L11_extrapolated", "L11_pass", "error")


def cmd_trichotomy(run: Run, fmap: UnimodalMap, args) -> int:
    cfg = run.cfg
    if not cfg.battery:
        raise ConfigError("trichotomy needs a non-empty battery of z values")
    zs = [resolve_z(fmap, s) for s in cfg.battery]
    orbit = critical_orbit(fmap)
    cases = set()
    for z in zs:
        try:
            cases.add(classify_point(fmap, z, orbit)[0])
        except MTError:
            pass  # reported on its own row below
    missing = {"nonperiodic", "periodic_off_orbit", "periodic_in_orbit"} - cases
    if missing:
        print(f"note: battery has no z of case {', '.join(sorted(missing))}", file=sys.stderr)
    dens = _density(run, fmap, cfg.n_bins)
    rows, series, status = [], [], EXIT_OK
    for z in zs:
        row = dict.fromkeys(TRICHOTOMY_COLUMNS)
        row["z"] = z
        try:
            rep = _sweep(run, fmap, dens, z, "spectral", args.workers)
            row.update(case=rep.case, period=rep.period, multiplier=rep.multiplier,
                       predicted=rep.predicted, escape_extrapolated=rep.extrapolated,
                       escape_last=rep.last_raw)
            row["escape_pass"] = int(abs(rep.extrapolated - rep.predicted) <= cfg.pass_tol)
            series.append((f"z={z:.4g}", [o[0] for o in rep.observed],
                           [o[1] for o in rep.observed]))
            if cfg.seed is not None:
                h = _hts(run, fmap, dens, z, [1.0], [1.0], args.workers)
                L = h.extrapolated[(1.0, 1.0)]
                row["L11_extrapolated"] = L
                row["L11_pass"] = int(abs(L - rep.predicted) <= cfg.pass_tol)
        except MTError as err:
            row["error"] = f"{type(err).__name__}: {err}".replace(",", ";")
            code = EXIT_NUMERICAL if isinstance(err, NumericalError) else EXIT_INPUT
            status = status or code
            print(f"z={z:.10g}: {row['error']}", file=sys.stderr)
        rows.append(row)
    lines = [",".join(TRICHOTOMY_COLUMNS)]
    lines += [",".join(_num(r[c]) for c in TRICHOTOMY_COLUMNS) for r in rows]
    run.write("trichotomy.csv", "\n".join(lines) + "\n")
    preds = {f"z={r['z']:.4g}": r["predicted"] for r in rows if r["predicted"] is not None}
    run.write("trichotomy.svg", _ratio_chart("escape ratio against eps", series, preds))
    for r in rows:
        if r["error"] is None:
            print(f"z={r['z']:.10g} {r['case']}: predicted {r['predicted']:.4f} "
                  f"escape {r['escape_extrapolated']:.4f} "
                  f"{'pass' if r['escape_pass'] else 'FAIL'}")
    return status


COMMANDS = {"find-param": cmd_find_param, "density": cmd_density, "escape": cmd_escape,
            "hts": cmd_hts, "trichotomy": cmd_trichotomy}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mtescape", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--config", required=True, help="YAML experiment file")
        s.add_argument("--seed", type=int, help="override mc.seed")
        s.add_argument("--workers", type=int, default=None, help="worker threads")
        s.add_argument("--cache", help=f"cache directory (overrides ${CACHE_ENV})")
        s.add_argument("--out", help="output directory (overrides the config)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = None
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.workers is not None and args.workers < 1:
            raise ConfigError("--workers must be at least 1")
        needs_seed = args.command == "hts" or (args.command == "escape" and cfg.method != "spectral")
        cfg.validate(needs_seed=needs_seed)
        cache_dir = args.cache or os.environ.get(CACHE_ENV) or cfg.cache
        out = Path(args.out or cfg.output)
        fmap = resolve_map(cfg)
        run = Run(args.command, cfg, out, Cache(cache_dir, fmap))
        status = COMMANDS[args.command](run, fmap, args)
    except InputError as err:
        print(f"error: {type(err).__name__}: {err}", file=sys.stderr)
        status = EXIT_INPUT
    except NumericalError as err:
        print(f"numerical failure: {type(err).__name__}: {err}", file=sys.stderr)
        status = EXIT_NUMERICAL
    if run is not None:
        run.manifest(status)
    return status


if __name__ == "__main__":
    sys.exit(main())
