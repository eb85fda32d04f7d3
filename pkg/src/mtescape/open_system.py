"""Escape rates through a hole, local escape sweeps and the induced relation.

Two independent estimators are provided.  The spectral one takes ``-log``
of the leading eigenvalue of the punctured Ulam matrix; the Monte Carlo one
fits the exponential decay of survivor counts.  A sweep divides either by
``mu(H)`` and extrapolates the ratio to zero hole size.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, HoleTooSmall, TooFewSurvivors
from .maps import UnimodalMap, classify_point, critical_orbit
from .measure import (
    POWER_MAXIT,
    POWER_TOL,
    InvariantDensity,
    MeasureEvaluator,
    build_ulam,
    default_breakpoints,
    hole_span_bins,
    invariant_density,
    markov_edges,
    power_iteration,
)
from .montecarlo import simulate_hits, survivor_curve
from .symbolic import InducedMap, identify_chains, induced_hole

FULL = "FULL"  # file token for an infinite rate (every point escapes at once)


def split_eps(eps: float, side_ratio: float = 1.0) -> tuple[float, float]:
    """``(eps_L, eps_R)`` with ``eps_L / eps_R = side_ratio`` and geometric mean ``eps``."""
    r = math.sqrt(side_ratio)
    return eps * r, eps / r


# ----------------------------------------------------------------- records
@dataclass(frozen=True)
class QuasiStationaryDensity:
    edges: np.ndarray
    masses: np.ndarray
    eigenvalue: float
    residual: float = 0.0

    @property
    def values(self) -> np.ndarray:
        return self.masses / np.diff(self.edges)


@dataclass(frozen=True)
class MCEstimate:
    rate: float
    stderr: float
    survivors: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0))
    window: tuple[int, int] = (0, 0)
    n_degenerate: int = 0


@dataclass
class EscapeEstimate:
    z: float
    eps_L: float
    eps_R: float
    mu_H: float
    rate_spectral: float | None = None
    rate_mc: float | None = None
    rate_mc_stderr: float | None = None
    ratio: float = float("nan")
    Lambda_induced: float | None = None
    nu_tau: float | None = None
    n_bins: int = 0
    n_samples: int = 0
    seed: int | None = None
    case: str = ""
    predicted: float = float("nan")


@dataclass
class TrichotomyReport:
    z: float
    case: str
    predicted: float
    period: int | None
    multiplier: float | None
    observed: list
    extrapolated: float
    last_raw: float
    estimates: list = field(default_factory=list)
    method: str = "spectral"


# ----------------------------------------------------------------- spectral
def _hole_state(fmap, z, eps_L, eps_R):
    lo, hi = fmap.core
    if eps_L + eps_R <= 0.0:
        return "empty"
    h0, h1 = z - eps_L, z + eps_R
    if h0 <= lo and h1 >= hi:
        return "full"
    if h1 <= lo or h0 >= hi:
        return "empty"
    return "partial"


def escape_rate_spectral(fmap: UnimodalMap, z: float, eps_L: float, eps_R: float,
                         n_bins: int, tol: float = POWER_TOL, min_hole_bins: float = 8,
                         breakpoints=None, maxit: int = POWER_MAXIT):
    """``-log`` of the leading eigenvalue of the punctured Ulam operator.

    Returns ``(rate, QuasiStationaryDensity)``; a hole covering the core
    gives ``rate = inf`` with eigenvalue 0.
    """
    state = _hole_state(fmap, z, eps_L, eps_R)
    if breakpoints is None:
        breakpoints = default_breakpoints(fmap)
    if state == "full":
        edges = markov_edges(fmap, n_bins, breakpoints)
        return math.inf, QuasiStationaryDensity(edges, np.zeros(edges.size - 1), 0.0)
    if state == "empty":
        op = build_ulam(fmap, n_bins, breakpoints=breakpoints)
        lam, v, _ = power_iteration(op.matrix, tol=tol, maxit=maxit)
        res = float(np.abs(op.matrix.T @ v - v).sum())
        return 0.0, QuasiStationaryDensity(op.edges, v, 1.0, res)
    op = build_ulam(fmap, n_bins, hole=(z, eps_L, eps_R), breakpoints=breakpoints)
    span = op.hole_bins()
    if span < min_hole_bins:
        raise HoleTooSmall(f"hole spans {span:.2f} bins, need {min_hole_bins}")
    lam, v, _ = power_iteration(op.matrix, tol=tol, maxit=maxit)
    if lam <= 0.0:
        return math.inf, QuasiStationaryDensity(op.edges, np.zeros(op.n_bins), 0.0)
    res = float(np.abs(op.matrix.T @ v - lam * v).sum())
    return -math.log(lam), QuasiStationaryDensity(op.edges, v, lam, res)


def hole_sides(fmap: UnimodalMap, z: float, eps_L: float, eps_R: float):
    """The in-core parts of the hole on each side of ``z`` (empty ones dropped)."""
    lo, hi = fmap.core
    sides = [(max(z - eps_L, lo), min(z, hi)), (max(z, lo), min(z + eps_R, hi))]
    return [(a, b) for a, b in sides if b > a]


def refine_bins(fmap: UnimodalMap, z: float, eps_L: float, eps_R: float, n_bins: int,
                min_side_bins: float = 32, max_bins: int = 1 << 22, breakpoints=None) -> int:
    """Smallest ``n_bins * 2**k`` resolving each side of the hole by ``min_side_bins``.

    Sides are counted separately because ``z`` may carry a one-sided density
    spike, where the first few Ulam bins are least accurate.
    """
    if _hole_state(fmap, z, eps_L, eps_R) != "partial":
        return n_bins
    if breakpoints is None:
        breakpoints = default_breakpoints(fmap)
    sides = hole_sides(fmap, z, eps_L, eps_R)
    n = n_bins
    while n < max_bins:
        e = markov_edges(fmap, n, breakpoints)
        if all(hole_span_bins(e, s) >= min_side_bins for s in sides):
            return n
        n *= 2
    return max(n_bins, max_bins)


# ----------------------------------------------------------------- Monte Carlo
def fit_decay(S: np.ndarray, n0: int, min_survivors: int = 100):
    """Weighted least-squares decay rate of ``S`` over ``[n0, last n with S >= min]``."""
    ok = np.flatnonzero(S >= min_survivors)
    if ok.size == 0 or ok[-1] < n0 + 2:
        raise TooFewSurvivors(
            f"fewer than {min_survivors} survivors in the fit window from n={n0}")
    n1 = int(ok[-1])
    n = np.arange(n0, n1 + 1)
    s = S[n0:n1 + 1].astype(float)
    slope = np.polyfit(n, np.log(s), 1, w=np.sqrt(s))[0]
    return max(-float(slope), 0.0), (n0, n1)


def escape_rate_mc(fmap: UnimodalMap, z: float, eps_L: float, eps_R: float, n_samples: int,
                   horizon: int, seed: int, density: InvariantDensity | None = None,
                   n_bins: int = 1 << 14, burn_in: int = 32, n0: int | None = None,
                   workers: int | None = None, n_groups: int = 20,
                   n_boot: int = 200) -> MCEstimate:
    """Escape rate from survivor counts of mu-distributed trajectories.

    The decay of ``S(n) = #{x : f^j(x) not in H, j < n}`` is fitted on
    ``[n0, n1]``, with ``n0 = horizon // 5`` by default and ``n1`` the last
    time with at least 100 survivors.  The standard error comes from a
    bootstrap over ``n_groups`` contiguous blocks of trajectories.
    """
    if seed is None:
        raise ConfigError("a seed is required for Monte Carlo runs")
    state = _hole_state(fmap, z, eps_L, eps_R)
    if state == "empty":
        return MCEstimate(0.0, 0.0)
    if state == "full":
        return MCEstimate(math.inf, 0.0)
    if density is None:
        density = invariant_density(build_ulam(fmap, n_bins))
    times = simulate_hits(fmap, density, (z - eps_L, z + eps_R), n_samples, horizon, seed,
                          first=0, burn_in=burn_in, workers=workers)
    S = survivor_curve(times, horizon)
    n0 = horizon // 5 if n0 is None else n0
    rate, window = fit_decay(S, n0)
    groups = np.array_split(times, n_groups)
    Sg = np.array([survivor_curve(g, horizon) for g in groups])
    rng = np.random.default_rng([int(seed), n_groups, n_boot])
    a, b = window
    nn = np.arange(a, b + 1)
    boot = []
    for _ in range(n_boot):
        pick = rng.integers(0, n_groups, n_groups)
        s = Sg[pick].sum(axis=0)[a:b + 1].astype(float)
        good = s > 0
        if good.sum() < 3:
            continue
        boot.append(-np.polyfit(nn[good], np.log(s[good]), 1, w=np.sqrt(s[good]))[0])
    stderr = float(np.std(boot, ddof=1)) if len(boot) > 1 else float("nan")
    return MCEstimate(rate, stderr, S, window, int((times < 0).sum()))


def auto_horizon(rate_guess: float, n_samples: int, floor: int = 50, cap: int = 1 << 20) -> int:
    """Horizon at which about 400 of ``n_samples`` survivors are expected."""
    if not rate_guess > 0:
        return floor
    h = math.log(max(n_samples / 400.0, math.e)) / rate_guess
    return int(min(max(math.ceil(h), floor), cap))


# ----------------------------------------------------------------- sweeps
def extrapolate(eps: np.ndarray, ratios: np.ndarray, case: str, ell: float) -> float:
    """Intercept of the linear fit of ratio against ``eps**(1/ell)`` or ``eps``."""
    eps = np.asarray(eps, float)
    r = np.asarray(ratios, float)
    ok = np.isfinite(r)
    if ok.sum() < 2:
        return float(r[ok][-1]) if ok.any() else float("nan")
    x = eps[ok] ** (1.0 / ell) if case == "periodic_in_orbit" else eps[ok]
    return float(np.polyfit(x, r[ok], 1)[1])


def local_escape_sweep(fmap: UnimodalMap, z: float, eps_grid, method: str = "spectral",
                       n_bins: int = 1 << 15, side_ratio: float = 1.0,
                       min_side_bins: float = 32, max_bins: int = 1 << 21,
                       n_samples: int = 10**6, horizon: int | None = None,
                       seed: int | None = None, density: InvariantDensity | None = None,
                       workers: int | None = None, tol: float = POWER_TOL,
                       memo=None) -> TrichotomyReport:
    """Ratios ``e(H_eps)/mu(H_eps)`` along a decreasing grid, extrapolated to 0.

    ``method`` is ``"spectral"``, ``"mc"`` or ``"both"``; with both, the
    ratio is taken from the spectral rate.  The bin count is doubled per
    point as needed so each side of the hole spans ``min_side_bins`` bins.

    ``memo(key, compute)``, if given, is called around every per-point
    computation with a JSON-able ``key``; it must return ``compute()`` or a
    previously stored copy of its (JSON-able) value.
    """
    eps_grid = np.asarray(eps_grid, dtype=float)
    if eps_grid.size < 4 or np.any(np.diff(eps_grid) >= 0) or np.any(eps_grid <= 0):
        raise ConfigError("eps grid must be positive, strictly decreasing, with >= 4 points")
    if method not in ("spectral", "mc", "both"):
        raise ConfigError(f"unknown method {method!r}")
    if method != "spectral" and seed is None:
        raise ConfigError("a seed is required for Monte Carlo runs")
    orbit = critical_orbit(fmap)
    case, per, lam, pred = classify_point(fmap, z, orbit)
    bp = default_breakpoints(fmap, orbit)
    if density is None:
        density = invariant_density(build_ulam(fmap, n_bins, breakpoints=bp), orbit=orbit)
    ev = MeasureEvaluator(density)
    if memo is None:
        def memo(key, compute):
            return compute()

    def spectral(eps):
        eL, eR = split_eps(eps, side_ratio)

        def compute():
            nb = refine_bins(fmap, z, eL, eR, n_bins, min_side_bins, max_bins, bp)
            rate, _ = escape_rate_spectral(fmap, z, eL, eR, nb, tol=tol, breakpoints=bp)
            return [rate, nb]

        key = {"stage": "spectral", "z": z, "eps_L": eL, "eps_R": eR, "n_bins": n_bins,
               "min_side_bins": min_side_bins, "max_bins": max_bins, "tol": tol}
        rate, nb = memo(key, compute)
        return float(rate), int(nb)

    rates = [None] * eps_grid.size
    if method in ("spectral", "both"):
        if workers and workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as ex:
                rates = list(ex.map(spectral, eps_grid))
        else:
            rates = [spectral(e) for e in eps_grid]
    estimates = []
    for k, eps in enumerate(eps_grid):
        eL, eR = split_eps(eps, side_ratio)
        mu_H = ev(z - eL, z + eR)
        est = EscapeEstimate(z, eL, eR, mu_H, case=case, predicted=pred, seed=seed)
        if rates[k] is not None:
            est.rate_spectral, est.n_bins = rates[k]
        if method in ("mc", "both"):
            guess = est.rate_spectral if est.rate_spectral else max(pred, 0.3) * mu_H
            hz = horizon or auto_horizon(guess, n_samples)

            def compute():
                mc = escape_rate_mc(fmap, z, eL, eR, n_samples, hz, seed, density=density,
                                    workers=workers)
                return [mc.rate, mc.stderr]

            key = {"stage": "mc", "z": z, "eps_L": eL, "eps_R": eR, "n_samples": n_samples,
                   "horizon": hz, "seed": seed, "density_bins": density.n_bins}
            rate_mc, se = memo(key, compute)
            est.rate_mc, est.rate_mc_stderr, est.n_samples = float(rate_mc), float(se), n_samples
        rate = est.rate_spectral if est.rate_spectral is not None else est.rate_mc
        est.ratio = rate / mu_H if mu_H > 0 else float("nan")
        estimates.append(est)
    ratios = np.array([e.ratio for e in estimates])
    extra = extrapolate(eps_grid, ratios, case, fmap.ell)
    return TrichotomyReport(z, case, pred, per, lam, list(zip(eps_grid.tolist(), ratios.tolist())),
                            extra, float(ratios[-1]), estimates, method)


def _num(x) -> str:
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    if math.isinf(x):
        return FULL
    return f"{x:.17g}"


SWEEP_COLUMNS = ("z", "eps_L", "eps_R", "mu_H", "rate_spectral", "rate_mc", "rate_mc_stderr",
                 "ratio", "case", "predicted", "n_bins", "n_samples", "seed")


def sweep_csv(report: TrichotomyReport) -> str:
    """Escape sweep table, one row per point in descending eps."""
    out = io.StringIO()
    out.write(",".join(SWEEP_COLUMNS) + "\n")
    for e in sorted(report.estimates, key=lambda e: -(e.eps_L * e.eps_R)):
        out.write(",".join(_num(getattr(e, c)) for c in SWEEP_COLUMNS) + "\n")
    return out.getvalue()


# ----------------------------------------------------------------- induced operator
def _induced_grid(induced: InducedMap, n_bins: int) -> np.ndarray:
    Y = induced.Y
    lo, hi = Y.parts[0][0], Y.parts[-1][1]
    base = np.linspace(lo, hi, n_bins + 1)
    pts = [base[Y.contains(base)], Y.boundaries, induced.lefts, induced.rights]
    return np.unique(np.concatenate(pts))


def induced_ulam(induced: InducedMap, n_bins: int = 1 << 12, removed=None):
    """Ulam surrogate of the induced transfer operator over ``Y``.

    Cells are the uniform grid over ``Y`` refined at every domain endpoint,
    so each cell lies in one domain.  Transition fractions use the exact
    branch: edges of target cells are pulled back through the domain's
    word.  Rows are normalised by the covered length of the cell, and rows
    of domains listed in ``removed`` are zeroed.

    Returns ``(matrix, edges, cell_tau, cell_domain)``; cells outside ``Y``
    or outside every domain carry ``cell_domain = -1``.
    """
    from .symbolic import pull_back

    fmap = induced.fmap
    edges = _induced_grid(induced, n_bins)
    ncell = edges.size - 1
    cell_dom = np.full(ncell, -1, dtype=np.int64)
    rows, cols, vals = [], [], []
    covered = np.zeros(ncell)
    removed = set() if removed is None else {int(i) for i in removed}
    for i, d in enumerate(induced.domains):
        c0 = int(np.searchsorted(edges, d.left, side="left"))
        c1 = int(np.searchsorted(edges, d.right, side="left"))
        if c1 <= c0:
            continue
        cell_dom[c0:c1] = i
        covered[c0:c1] += np.diff(edges[c0:c1 + 1])
        if i in removed:
            continue
        ylo, yhi = d.image
        inner = edges[(edges > ylo) & (edges < yhi)]
        ys = np.concatenate([[ylo], inner, [yhi]])
        xs = pull_back(fmap, ys, d.word)[0]
        increasing = xs[-1] > xs[0]
        xs[0], xs[-1] = (d.left, d.right) if increasing else (d.right, d.left)
        # target cell of each y-piece
        tgt = np.searchsorted(edges, 0.5 * (ys[:-1] + ys[1:]), side="right") - 1
        src_edges = edges[c0:c1 + 1]
        xb = np.unique(np.concatenate([np.sort(xs), src_edges]))
        xb = xb[(xb >= d.left) & (xb <= d.right)]
        xm = 0.5 * (xb[:-1] + xb[1:])
        ln = np.diff(xb)
        xs_sorted = xs if increasing else xs[::-1]
        k = np.clip(np.searchsorted(xs_sorted, xm, side="right") - 1, 0, tgt.size - 1)
        piece_tgt = tgt[k] if increasing else tgt[::-1][k]
        src = np.clip(np.searchsorted(edges, xm, side="right") - 1, 0, ncell - 1)
        rows.append(src)
        cols.append(piece_tgt)
        vals.append(ln)
    if rows:
        R, C, V = np.concatenate(rows), np.concatenate(cols), np.concatenate(vals)
    else:
        R = C = np.zeros(0, dtype=np.int64)
        V = np.zeros(0)
    norm = np.where(covered > 0, covered, 1.0)
    mat = sp.csr_matrix((V / norm[R], (R, C)), shape=(ncell, ncell))
    mat.sum_duplicates()
    taus = np.array([induced.domains[j].tau if j >= 0 else 0 for j in cell_dom])
    return mat, edges, taus, cell_dom


@dataclass(frozen=True)
class InducedEscape:
    Lambda: float
    nu_tau: float
    lhs: float
    rhs: float
    rate_spectral: float
    mu_Y_Hprime: float
    n_cells: int

    @property
    def relative_gap(self) -> float:
        return abs(self.lhs - self.rhs) / self.lhs if self.lhs > 0 else 0.0

    @property
    def limit_ratio(self) -> float:
        """``(1 - Lambda) / mu_Y(H')``, which tends to 1 with the hole."""
        return (1.0 - self.Lambda) / self.mu_Y_Hprime if self.mu_Y_Hprime > 0 else float("nan")


def induced_escape_check(fmap: UnimodalMap, induced: InducedMap, z: float, eps_L: float,
                         eps_R: float, n_bins: int = 1 << 12,
                         density: InvariantDensity | None = None,
                         rate_spectral: float | None = None, spectral_bins: int = 1 << 15,
                         tol: float = POWER_TOL) -> InducedEscape:
    """Both sides of ``-log Lambda = nu(tau) * e(H)``.

    ``Lambda`` and the quasi-stationary pair come from the punctured
    induced surrogate; ``nu`` is proportional to the product of its left
    and right leading eigenvectors, the finite-state analogue of the
    density times the conformal measure.  ``e(H)`` is the spectral escape
    rate of ``f`` itself unless supplied.
    """
    if density is None:
        density = invariant_density(build_ulam(fmap, spectral_bins))
    ev = MeasureEvaluator(density)
    mu_Y = sum(ev(a, b) for a, b in induced.Y)
    if eps_L + eps_R <= 0.0:
        mat, edges, taus, cdom = induced_ulam(induced, n_bins)
        lam, g, _ = power_iteration(mat, tol=tol)
        nu_tau = float(np.dot(g, taus))
        return InducedEscape(1.0, nu_tau, 0.0, 0.0, 0.0, 0.0, edges.size - 1)
    hole = induced_hole(induced, z, eps_L, eps_R)
    mat, edges, taus, cdom = induced_ulam(hole.induced, n_bins, removed=hole.members)
    lam, g, _ = power_iteration(mat, tol=tol)
    _, e, _ = power_iteration(mat.T.tocsr(), tol=tol)
    w = g * e
    nu = w / w.sum()
    nu_tau = float(np.dot(nu, taus))
    if rate_spectral is None:
        nb = refine_bins(fmap, z, eps_L, eps_R, spectral_bins)
        rate_spectral, _ = escape_rate_spectral(fmap, z, eps_L, eps_R, nb, tol=tol)
    mu_hp = sum(ev(a, b) for a, b in hole.intervals())
    lhs = -math.log(lam) if lam > 0 else math.inf
    return InducedEscape(lam, nu_tau, lhs, nu_tau * rate_spectral, rate_spectral,
                         mu_hp / mu_Y, edges.size - 1)


# ----------------------------------------------------------------- beta-allowable holes
def beta_deep(t: float, lo: float, hi: float, beta: float) -> bool:
    """``t`` lies in ``[lo, hi]`` at distance at least ``beta * (hi - lo)`` from both ends."""
    m = beta * (hi - lo)
    return lo + m <= t <= hi - m


def _ladder_intervals(pts: np.ndarray) -> list[tuple[float, float]]:
    pts = np.sort(np.asarray(pts, float))
    return [(float(a), float(b)) for a, b in zip(pts[:-1], pts[1:]) if b > a]


def beta_allowable(induced: InducedMap, z: float, beta: float, eps_range, side_ratio: float = 1.0,
                   per_decade: int = 400, chains=None) -> list[tuple[float, float]]:
    """Hole radii whose edges sit ``beta``-deep in the ladder intervals.

    Candidates form a fixed geometric grid with ``per_decade`` points per
    decade, independent of ``beta``, so larger ``beta`` returns a subset.
    A side with no ladder (``z`` at an end of the core) is unconstrained.
    Output is sorted by decreasing ``eps``.
    """
    if not 0.0 < beta < 0.5:
        raise ConfigError("beta must lie in (0, 1/2)")
    lo_e, hi_e = sorted(float(v) for v in eps_range)
    if chains is None:
        chains = identify_chains(induced, z)
    left = _ladder_intervals(chains.left_ladder)
    right = _ladder_intervals(chains.right_ladder)
    k0 = math.ceil(per_decade * math.log10(lo_e) - 1e-9)
    k1 = math.floor(per_decade * math.log10(hi_e) + 1e-9)
    out = []
    for k in range(k1, k0 - 1, -1):
        eps = 10.0 ** (k / per_decade)
        eL, eR = split_eps(eps, side_ratio)
        okL = not left or any(beta_deep(z - eL, a, b, beta) for a, b in left)
        okR = not right or any(beta_deep(z + eR, a, b, beta) for a, b in right)
        if okL and okR:
            out.append((eL, eR))
    return out
