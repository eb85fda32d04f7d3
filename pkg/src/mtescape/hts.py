"""Hitting-time statistics for shrinking holes.

For a hole ``H`` of measure ``mu_H`` and ``n = floor(t * mu_H**-alpha)``,

    L = -log mu(r_H > n) / (t * mu_H**(1 - alpha)),

where ``r_H(x) = inf{k >= 1 : f^k(x) in H}`` and ``x`` is mu-distributed.
Because ``r_H`` is an integer, ``r_H > n`` is the same event as
``r_H >= t * mu_H**-alpha`` whenever the latter is not itself an integer.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, InsufficientHorizon
from .maps import UnimodalMap, classify_point, critical_orbit
from .measure import InvariantDensity, MeasureEvaluator, build_ulam, invariant_density
from .montecarlo import simulate_hits
from .open_system import _num, extrapolate, split_eps


@dataclass(frozen=True)
class HittingTimeSample:
    """First hitting times; censored trajectories are only counted.

    ``times`` holds the uncensored values, so ``len(times) + n_censored``
    equals ``n_samples``.  Trajectories frozen on a floating-point fixed
    point are dropped before counting and reported in ``n_degenerate``.
    """

    hole: tuple[float, float, float]
    times: np.ndarray
    n_censored: int
    n_samples: int
    horizon: int
    seed: int | None = None
    n_degenerate: int = 0

    def survival(self, n) -> np.ndarray:
        """Fraction of samples with ``r > n``."""
        n = np.atleast_1d(np.asarray(n))
        if self.n_samples == 0:
            return np.ones(n.shape)
        srt = np.sort(self.times)
        hits = np.searchsorted(srt, n, side="right")
        return (self.n_samples - hits) / self.n_samples


@dataclass(frozen=True)
class HtsEstimate:
    alpha: float
    t: float
    L_value: float
    stderr: float
    predicted: float = float("nan")
    n_eps: int = 0
    survivor_frac: float = 1.0


def sample_hitting_times(fmap: UnimodalMap, density: InvariantDensity, hole, n_samples: int,
                         horizon: int, seed: int, burn_in: int = 32,
                         workers: int | None = None) -> HittingTimeSample:
    """Simulate ``r_H`` for ``n_samples`` mu-distributed points.

    ``hole`` is ``(z, eps_L, eps_R)``.
    """
    if seed is None:
        raise ConfigError("a seed is required for Monte Carlo runs")
    z, eL, eR = hole
    raw = simulate_hits(fmap, density, (z - eL, z + eR), n_samples, horizon, seed,
                        first=1, burn_in=burn_in, workers=workers)
    valid = raw[raw >= 0]
    done = valid[valid <= horizon]
    return HittingTimeSample((float(z), float(eL), float(eR)), done,
                             int(valid.size - done.size), int(valid.size), int(horizon),
                             seed, int(raw.size - valid.size))


def estimate_L(sample: HittingTimeSample, mu_H: float, alpha: float, t: float,
               predicted: float = float("nan")) -> HtsEstimate:
    """``L_{alpha,t}`` at the sample's hole, with a binomial delta-method error."""
    if not (alpha > 0 and t > 0):
        raise ConfigError("alpha and t must be positive")
    if mu_H <= 0:
        return HtsEstimate(alpha, t, 0.0, 0.0, predicted, 0, 1.0)
    n_eps = math.floor(t * mu_H ** (-alpha))
    if n_eps > sample.horizon:
        raise InsufficientHorizon(f"n_eps={n_eps} exceeds horizon {sample.horizon}")
    S = float(sample.survival(n_eps)[0])
    scale = t * mu_H ** (1.0 - alpha)
    N = sample.n_samples
    if S <= 0.0:
        return HtsEstimate(alpha, t, math.inf, math.inf, predicted, n_eps, S)
    L = -math.log(S) / scale
    se = math.sqrt((1.0 - S) / (S * N)) / scale if N else math.inf
    return HtsEstimate(alpha, t, max(L, 0.0), se, predicted, n_eps, S)


def extremal_index(sample: HittingTimeSample, mu_H: float) -> float:
    """``-log`` of the fraction of points not hitting within ``floor(1/mu_H)`` steps."""
    if mu_H <= 0:
        return 0.0
    n = math.floor(1.0 / mu_H)
    if n > sample.horizon:
        raise InsufficientHorizon(f"1/mu_H={n} exceeds horizon {sample.horizon}")
    S = float(sample.survival(n)[0])
    return math.inf if S <= 0 else max(-math.log(S), 0.0)


@dataclass
class HtsRow:
    z: float
    eps_L: float
    eps_R: float
    mu_H: float
    alpha: float
    t: float
    n_eps: int
    survivor_frac: float
    L_value: float
    stderr: float
    predicted: float
    n_samples: int
    horizon: int
    seed: int | None


@dataclass
class HtsReport:
    z: float
    case: str
    predicted: float
    rows: list = field(default_factory=list)
    extrapolated: dict = field(default_factory=dict)


HTS_COLUMNS = ("z", "eps_L", "eps_R", "mu_H", "alpha", "t", "n_eps", "survivor_frac",
               "L_value", "stderr", "predicted", "n_samples", "horizon", "seed")


def hts_sweep(fmap: UnimodalMap, z: float, eps_grid, alphas=(1.0,), ts=(1.0,),
              n_samples: int = 10**6, seed: int = 0, side_ratio: float = 1.0,
              density: InvariantDensity | None = None, n_bins: int = 1 << 15,
              horizon_factor: float = 5.0, workers: int | None = None,
              memo=None) -> HtsReport:
    """``L_{alpha,t}`` over a grid of holes; one simulation per hole.

    The horizon of each simulation is ``horizon_factor`` times the largest
    ``n_eps`` requested.  ``extrapolated[(alpha, t)]`` is the zero-hole
    intercept of the same linear fit used for escape ratios.  ``memo`` has
    the same contract as in :func:`local_escape_sweep`.
    """
    eps_grid = np.asarray(eps_grid, float)
    if eps_grid.size < 1 or np.any(eps_grid <= 0):
        raise ConfigError("eps grid must be non-empty and positive")
    orbit = critical_orbit(fmap)
    case, _, _, pred = classify_point(fmap, z, orbit)
    if density is None:
        density = invariant_density(build_ulam(fmap, n_bins), orbit=orbit)
    ev = MeasureEvaluator(density)
    rep = HtsReport(z, case, pred)
    for eps in eps_grid:
        eL, eR = split_eps(eps, side_ratio)
        mu_H = ev(z - eL, z + eR)
        need = max(math.floor(t * mu_H ** (-a)) for a in alphas for t in ts)
        horizon = int(math.ceil(horizon_factor * max(need, 1)))

        def compute():
            smp = sample_hitting_times(fmap, density, (z, eL, eR), n_samples, horizon, seed,
                                       workers=workers)
            out = []
            for a in alphas:
                for t in ts:
                    est = estimate_L(smp, mu_H, a, t, pred)
                    out.append([a, t, est.n_eps, est.survivor_frac, est.L_value, est.stderr,
                                smp.n_samples])
            return out

        key = {"stage": "hts", "z": z, "eps_L": eL, "eps_R": eR, "alphas": list(alphas),
               "ts": list(ts), "n_samples": n_samples, "horizon": horizon, "seed": seed,
               "density_bins": density.n_bins}
        vals = compute() if memo is None else memo(key, compute)
        for a, t, n_eps, S, L, se, n_ok in vals:
            rep.rows.append(HtsRow(z, eL, eR, mu_H, float(a), float(t), int(n_eps), float(S),
                                   float(L), float(se), pred, int(n_ok), horizon, seed))
    for a in alphas:
        for t in ts:
            sel = [r for r in rep.rows if r.alpha == a and r.t == t]
            eps = np.array([math.sqrt(r.eps_L * r.eps_R) for r in sel])
            L = np.array([r.L_value for r in sel])
            rep.extrapolated[(a, t)] = (extrapolate(eps, L, case, fmap.ell)
                                        if len(sel) >= 2 else float(L[-1]))
    return rep


def hts_csv(report: HtsReport) -> str:
    out = io.StringIO()
    out.write(",".join(HTS_COLUMNS) + "\n")
    rows = sorted(report.rows, key=lambda r: (-(r.eps_L * r.eps_R), r.alpha, r.t))
    for r in rows:
        out.write(",".join(_num(getattr(r, c)) for c in HTS_COLUMNS) + "\n")
    return out.getvalue()
