"""Ulam discretization, invariant density and interval measures.

The transfer operator is replaced by the row-stochastic matrix of bin-to-bin
transition fractions.  Bin edges are uniform on each interval of the Markov
partition, so every postcritical point sits on an edge and no bin straddles
a density spike.  Holes are cut out exactly: the surviving part of a bin is
split at the hole edges before its preimage lengths are measured.

Plain Ulam spreads each bin's mass uniformly, which badly misplaces mass
next to the ``|x - q|**(1/ell - 1)`` spikes: at the fixed point of the full
quadratic map the first bin ends up with a third of its true mass.  Bins
within a few widths of a spike therefore use that power law as their
within-bin profile.  Rows stay exactly stochastic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.sparse as sp

from .errors import ConfigError, DomainError, MTError, NoConvergence
from .maps import CriticalOrbitData, UnimodalMap, classify_point, critical_orbit

FORMAT_VERSION = 1
SPIKE_BINS = 30
SPIKE_RADIUS_BINS = 20
PROFILE_RADIUS_BINS = 20
POWER_TOL = 1e-12
POWER_MAXIT = 100_000


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ----------------------------------------------------------------- grid
def markov_edges(fmap: UnimodalMap, n_bins: int, breakpoints=None) -> np.ndarray:
    """Bin edges over the core, uniform within each partition interval.

    ``n_bins`` is shared out by length with the largest-remainder rule, every
    interval receiving at least one bin.  With fewer bins than intervals, or
    without breakpoints, the grid is plain uniform.
    """
    lo, hi = fmap.core
    if n_bins < 1:
        raise DomainError("n_bins must be positive")
    pts = np.array([lo, hi]) if breakpoints is None else np.asarray(breakpoints, float)
    pts = np.unique(np.clip(np.concatenate([[lo, hi], pts]), lo, hi))
    lens = np.diff(pts)
    if n_bins < lens.size or lens.size == 1:
        return np.linspace(lo, hi, n_bins + 1)
    quota = n_bins * lens / (hi - lo)
    k = np.maximum(np.floor(quota).astype(int), 1)
    short = n_bins - int(k.sum())
    if short > 0:
        order = np.argsort(-(quota - np.floor(quota)), kind="stable")
        k[order[:short]] += 1
    while k.sum() > n_bins:
        # only reachable when the at-least-one rule overshoots
        j = int(np.argmax(np.where(k > 1, k - quota, -np.inf)))
        k[j] -= 1
    parts = [pts[:1]]
    for a, b, m in zip(pts[:-1], pts[1:], k):
        seg = np.linspace(a, b, m + 1)[1:]
        seg[-1] = b
        parts.append(seg)
    return np.concatenate(parts)


def default_breakpoints(fmap: UnimodalMap, orbit: CriticalOrbitData | None = None):
    if orbit is None:
        orbit = critical_orbit(fmap)
    return np.concatenate([[fmap.c], orbit.orbit])


# ----------------------------------------------------------------- operator
@dataclass(frozen=True)
class UlamOperator:
    """Sparse Ulam matrix, optionally punctured by a hole.

    ``matrix[i, j]`` is ``|(B_i minus H) ∩ f^{-1} B_j| / |B_i|``.
    """

    fmap: UnimodalMap
    n_bins: int
    edges: np.ndarray
    matrix: sp.csr_matrix
    punctured: bool = False
    hole: tuple[float, float, float] | None = None

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.edges)

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    def row_sums(self) -> np.ndarray:
        return np.asarray(self.matrix.sum(axis=1)).ravel()

    def hole_bins(self) -> float:
        """Hole length inside the core in units of the local bin width."""
        if self.hole is None:
            return math.inf
        return hole_span_bins(self.edges, hole_interval(self.hole))

    def to_text(self) -> str:
        m = self.matrix.tocoo()
        order = np.lexsort((m.col, m.row))
        hole = "none" if self.hole is None else " ".join(_fmt(v) for v in self.hole)
        lines = [f"# ulam v{FORMAT_VERSION} A={_fmt(self.fmap.A)} ell={_fmt(self.fmap.ell)} "
                 f"n_bins={self.n_bins} hole={hole}"]
        lines.append("edges " + " ".join(_fmt(e) for e in self.edges))
        lines += [f"{m.row[k]} {m.col[k]} {_fmt(m.data[k])}" for k in order]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "UlamOperator":
        head, edge_line, *rows = text.strip().splitlines()
        kv = dict(tok.split("=", 1) for tok in head.split()[3:] if "=" in tok)
        hole_txt = head.split("hole=", 1)[1].strip()
        hole = None if hole_txt == "none" else tuple(float(v) for v in hole_txt.split())
        fmap = UnimodalMap(float(kv["A"]), float(kv["ell"]))
        n = int(kv["n_bins"])
        edges = np.array([float(v) for v in edge_line.split()[1:]])
        if rows:
            arr = np.array([r.split() for r in rows], dtype=float)
            mat = sp.csr_matrix((arr[:, 2], (arr[:, 0].astype(int), arr[:, 1].astype(int))),
                                shape=(n, n))
        else:
            mat = sp.csr_matrix((n, n))
        return cls(fmap, n, edges, mat, hole is not None, hole)


def hole_span_bins(edges: np.ndarray, interval: tuple[float, float]) -> float:
    """Length of ``interval`` inside the grid, in units of the bins it meets."""
    a, b = max(interval[0], edges[0]), min(interval[1], edges[-1])
    if b <= a:
        return 0.0
    n = edges.size - 1
    i0 = max(int(np.searchsorted(edges, a, side="right")) - 1, 0)
    i1 = min(int(np.searchsorted(edges, b, side="left")), n)
    w = np.diff(edges[i0:max(i1, i0 + 1) + 1]).mean()
    return float((b - a) / w)


def hole_interval(hole) -> tuple[float, float]:
    z, eL, eR = hole
    return z - eL, z + eR


def build_ulam(fmap: UnimodalMap, n_bins: int, hole=None, breakpoints=None,
               edges: np.ndarray | None = None, spikes=None,
               spike_radius: float = PROFILE_RADIUS_BINS) -> UlamOperator:
    """Assemble the Ulam matrix from exact preimage lengths.

    Parameters
    ----------
    fmap : UnimodalMap
    n_bins : int
        Number of bins over the core.
    hole : tuple (z, eps_L, eps_R), optional
        Removes ``(z - eps_L, z + eps_R)``; surviving fractions are exact.
    breakpoints : array_like, optional
        Points to align bin edges with.  Defaults to ``c`` and the
        postcritical orbit when the map is Misiurewicz-Thurston, else none.
    edges : ndarray, optional
        Explicit edges; overrides ``n_bins`` and ``breakpoints``.
    spikes : list of (q, side), optional
        One-sided density spikes.  Bins within ``spike_radius`` bin widths
        on the spike side of ``q`` spread their mass as ``|x - q|**(1/ell - 1)``
        instead of uniformly.  Defaults to :func:`spike_sides` for
        Misiurewicz-Thurston maps; pass ``[]`` for the plain Ulam matrix.
    """
    orbit = None
    if breakpoints is None or spikes is None:
        try:
            orbit = critical_orbit(fmap)
        except MTError:
            orbit = None
    if spikes is None:
        spikes = [] if orbit is None else spike_sides(fmap, orbit)
    if edges is None:
        if breakpoints is None and orbit is not None:
            breakpoints = default_breakpoints(fmap, orbit)
        edges = markov_edges(fmap, n_bins, breakpoints)
    edges = np.asarray(edges, dtype=float)
    n = edges.size - 1
    c = fmap.c
    x0, x1 = edges[:-1].copy(), edges[1:].copy()
    row = np.arange(n)
    k = int(np.searchsorted(edges, c, side="right")) - 1
    if 0 <= k < n and edges[k] < c < edges[k + 1]:
        x0, x1, row = np.append(x0, c), np.append(x1, x1[k]), np.append(row, k)
        x1[k] = c
    if hole is not None:
        a, b = hole_interval(hole)
        left_part = np.minimum(x1, a)
        keep_l = left_part > x0
        right_part = np.maximum(x0, b)
        keep_r = x1 > right_part
        x0, x1, row = (np.concatenate([x0[keep_l], right_part[keep_r]]),
                       np.concatenate([left_part[keep_l], x1[keep_r]]),
                       np.concatenate([row[keep_l], row[keep_r]]))
    mat = _assemble(fmap, edges, x0, x1, row, _profiles(fmap, edges, spikes, spike_radius))
    return UlamOperator(fmap, n, edges, mat, hole is not None,
                        None if hole is None else tuple(float(v) for v in hole))


def spike_sides(fmap: UnimodalMap, orbit: CriticalOrbitData) -> list[tuple[float, int]]:
    """``(q, side)`` for every one-sided density spike on the postcritical orbit.

    The fold at ``c`` puts a spike below ``f(c)``; each further step carries
    it to the side given by the sign of ``Df`` at the current point.
    """
    n = orbit.k0 + orbit.p - 1
    sides = [set() for _ in range(n + 1)]
    sides[1].add(-1)
    for _ in range(2):  # second lap settles sides arriving through the cycle
        for j in range(1, n + 1):
            nxt = j + 1 if j < n else orbit.k0
            sg = 1 if fmap.df(orbit.point(j)) > 0 else -1
            sides[nxt] |= {sg * s for s in sides[j]}
    return sorted({(orbit.point(j), s) for j in range(1, n + 1) for s in sides[j]})


def _profiles(fmap, edges, spikes, radius):
    """Per-bin spike anchor and exponent; ``nan`` anchor means a flat profile."""
    n = edges.size - 1
    anchor = np.full(n, np.nan)
    if not spikes:
        return anchor
    beta = 1.0 / fmap.ell - 1.0
    if beta >= 0.0:
        return anchor
    mid = 0.5 * (edges[:-1] + edges[1:])
    w = np.diff(edges)
    best = np.full(n, np.inf)
    for q, sd in spikes:
        d = (mid - q) * sd
        near = (d > 0) & (d < radius * w) & (d < best)
        anchor[near] = q
        best[near] = d[near]
    return anchor


def _mass(x, anchor, expo):
    """Antiderivative of the bin profile, up to sign (flat where ``anchor`` is nan).

    The signed power stays monotone across ``q``, so rounding that pushes a
    piece end a hair past the spike cannot break telescoping row sums.
    """
    flat = np.isnan(anchor)
    d = x - np.where(flat, 0.0, anchor)
    return np.where(flat, x, np.sign(d) * np.abs(d) ** expo)


def _assemble(fmap, edges, x0, x1, row, anchor=None):
    n = edges.size - 1
    if x0.size == 0:
        return sp.csr_matrix((n, n))
    side = np.where(0.5 * (x0 + x1) < fmap.c, -1, 1)
    y0, y1 = fmap(x0), fmap(x1)
    y0, y1 = np.atleast_1d(y0), np.atleast_1d(y1)
    ylo, yhi = np.minimum(y0, y1), np.maximum(y0, y1)
    # x-preimage of ylo / yhi: left branch increasing, right branch decreasing
    xlo = np.where(side < 0, x0, x1)
    xhi = np.where(side < 0, x1, x0)
    jlo = np.clip(np.searchsorted(edges, ylo, side="right") - 1, 0, n - 1)
    jhi = np.clip(np.searchsorted(edges, yhi, side="left") - 1, 0, n - 1)
    jhi = np.maximum(jhi, jlo)
    cnt = jhi - jlo + 1
    piece = np.repeat(np.arange(x0.size), cnt)
    offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    J = jlo[piece] + offs
    ya = np.maximum(edges[J], ylo[piece])
    yb = np.minimum(edges[J + 1], yhi[piece])
    sd = side[piece]
    # interior edges are pulled back; image endpoints reuse the exact piece ends
    ta = np.where(ya <= ylo[piece], xlo[piece], fmap.inverse(ya, sd))
    tb = np.where(yb >= yhi[piece], xhi[piece], fmap.inverse(yb, sd))
    # next to the fold f(x) is flat, so a pulled-back edge can round past
    # the piece; clipping keeps consecutive sub-pieces telescoping
    plo, phi = x0[piece], x1[piece]
    ta, tb = np.clip(ta, plo, phi), np.clip(tb, plo, phi)
    R = row[piece]
    if anchor is None or np.all(np.isnan(anchor)):
        ln = np.abs(tb - ta)
        w = np.diff(edges)[R]
    else:
        expo = 1.0 / fmap.ell
        a = anchor[R]
        ln = np.abs(_mass(tb, a, expo) - _mass(ta, a, expo))
        w = np.abs(_mass(edges[R + 1], a, expo) - _mass(edges[R], a, expo))
    ok = (yb > ya) & (ln > 0.0)
    mat = sp.csr_matrix((ln[ok] / w[ok], (R[ok], J[ok])), shape=(n, n))
    mat.sum_duplicates()
    return mat


# ----------------------------------------------------------------- eigenvectors
def power_iteration(matrix: sp.csr_matrix, tol: float = POWER_TOL, maxit: int = POWER_MAXIT,
                    v0: np.ndarray | None = None):
    """Dominant left eigenvector of a nonnegative matrix.

    The iterate is kept at unit mass, so the eigenvalue estimate is the mass
    after one application.  Returns ``(eigenvalue, vector, iterations)``.
    """
    n = matrix.shape[0]
    mt = matrix.T.tocsr()
    v = np.full(n, 1.0 / n) if v0 is None else np.asarray(v0, float) / np.sum(v0)
    lam = 0.0
    for it in range(1, maxit + 1):
        w = mt @ v
        lam = float(w.sum())
        if lam <= 0.0:
            return 0.0, np.zeros(n), it
        w /= lam
        if np.abs(w - v).sum() < tol:
            return lam, w, it
        v = w
    raise NoConvergence(f"power iteration did not reach {tol:g} in {maxit} steps")


# ----------------------------------------------------------------- density
@dataclass(frozen=True)
class InvariantDensity:
    """Ulam approximation of the invariant density.

    ``values`` are per-bin averages of the density; ``masses`` the bin
    probabilities.  ``spike_exponents`` maps each postcritical point to the
    fitted local exponent of the density next to it.
    """

    fmap: UnimodalMap
    edges: np.ndarray
    masses: np.ndarray
    spike_exponents: dict = field(default_factory=dict)
    rho_c: float = float("nan")
    spikes: np.ndarray = field(default_factory=lambda: np.array([]))
    residual: float = 0.0

    @property
    def values(self) -> np.ndarray:
        return self.masses / np.diff(self.edges)

    @property
    def n_bins(self) -> int:
        return self.masses.size

    @property
    def cumulative(self) -> np.ndarray:
        return np.concatenate([[0.0], np.cumsum(self.masses)])

    def cdf(self, x):
        """Piecewise-linear distribution function of the bin density."""
        return np.interp(x, self.edges, self.cumulative)

    def quantile(self, u):
        return np.interp(u, self.cumulative, self.edges)

    def to_text(self) -> str:
        head = (f"# density v{FORMAT_VERSION} A={_fmt(self.fmap.A)} ell={_fmt(self.fmap.ell)} "
                f"n_bins={self.n_bins} rho_c={_fmt(self.rho_c)} residual={_fmt(self.residual)}")
        sp_line = "spikes " + " ".join(f"{_fmt(q)}:{_fmt(self.spike_exponents.get(float(q), float('nan')))}"
                                        for q in self.spikes)
        lines = [head, "edges " + " ".join(_fmt(e) for e in self.edges), sp_line]
        lines += [f"{i} {_fmt(v)}" for i, v in enumerate(self.values)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "InvariantDensity":
        head, edge_line, sp_line, *rows = text.strip().splitlines()
        kv = dict(tok.split("=", 1) for tok in head.split()[3:] if "=" in tok)
        edges = np.array([float(v) for v in edge_line.split()[1:]])
        vals = np.array([float(r.split()[1]) for r in rows])
        spikes, expo = [], {}
        for tok in sp_line.split()[1:]:
            q, e = tok.split(":")
            spikes.append(float(q))
            expo[float(q)] = float(e)
        fmap = UnimodalMap(float(kv["A"]), float(kv["ell"]))
        return cls(fmap, edges, vals * np.diff(edges), expo, float(kv["rho_c"]),
                   np.array(spikes), float(kv["residual"]))


def invariant_density(op: UlamOperator, tol: float = POWER_TOL, maxit: int = POWER_MAXIT,
                      orbit: CriticalOrbitData | None = None) -> InvariantDensity:
    """Fixed vector of the unpunctured Ulam operator, with spike fits.

    See :func:`fit_spike_exponent` for how the local exponents are read off.
    """
    if op.punctured:
        raise DomainError("invariant density needs the unpunctured operator")
    lam, v, _ = power_iteration(op.matrix, tol=tol, maxit=maxit)
    res = float(np.abs(op.matrix.T @ v - v).sum())
    if res > max(tol, 1e-10) * 10:
        raise NoConvergence(f"fixed-point residual {res:.3g}")
    fmap = op.fmap
    if orbit is None:
        try:
            orbit = critical_orbit(fmap)
        except Exception:
            orbit = None
    spikes = np.array([]) if orbit is None else np.unique(orbit.orbit)
    dens = InvariantDensity(fmap, op.edges.copy(), v, {}, _rho_at(op.edges, v, fmap.c),
                            spikes, res)
    if spikes.size and op.n_bins >= 4 * SPIKE_BINS:
        ev = MeasureEvaluator(dens)
        expo = {float(q): fit_spike_exponent(ev, float(q)) for q in spikes}
        dens = replace(dens, spike_exponents=expo)
    return dens


def _rho_at(edges, masses, x, k: int = 5) -> float:
    if masses.size < k:
        return float(masses.sum() / (edges[-1] - edges[0]))
    centers = 0.5 * (edges[:-1] + edges[1:])
    idx = np.sort(np.argsort(np.abs(centers - x), kind="stable")[:k])
    return float(masses[idx].sum() / (edges[idx + 1] - edges[idx]).sum())


def fit_spike_exponent(ev: "MeasureEvaluator", q: float, n_fit: int = SPIKE_BINS) -> float:
    """Local power-law exponent of the density at ``q``.

    Log-log regression of ``m(r)`` against ``r`` over the ``n_fit`` bin
    radii nearest ``q``, where ``m(r)`` is the invariant mass within ``r``
    on the spike side.  At an interior point the mass on the opposite side
    is subtracted first: the smooth part of the density is continuous at
    ``q`` and cancels, leaving the spike alone even when it is faint.
    Masses come from ``ev``, which resolves the spike by invariance rather
    than by the bin average, whose first few bins are biased at a spike.
    """
    edges = ev.density.edges
    iq = int(np.argmin(np.abs(edges - q)))
    w = np.diff(edges)
    h = float(w[min(iq, w.size - 1)] if iq < w.size else w[-1])
    r = h * np.arange(1, n_fit + 1)
    right = np.array([ev(q, q + t) for t in r]) if q + r[0] <= ev.hi else None
    left = np.array([ev(q - t, q) for t in r]) if q - r[0] >= ev.lo else None
    if right is not None and left is not None:
        m = np.abs(right - left)
        ok = (q + r <= ev.hi) & (q - r >= ev.lo)
    else:
        m = right if right is not None else left
        ok = (q + r <= ev.hi) if right is not None else (q - r >= ev.lo)
    ok &= m > 0
    if m is None or ok.sum() < 4:
        return float("nan")
    slope = np.polyfit(np.log(r[ok]), np.log(m[ok]), 1)[0]
    return float(slope - 1.0)


# ----------------------------------------------------------------- measure of intervals
class MeasureEvaluator:
    """``mu([a, b])`` with the spikes resolved by invariance.

    Quadrature of the bin density is accurate away from postcritical points.
    Pieces within ``radius`` of one are replaced by their two preimages,
    which is exact for an invariant measure; a spike at ``f^j(c)`` is thereby
    traced back to the smooth neighbourhood of ``c``.  Totals are divided by
    the raw value of the core so the core has measure one.
    """

    def __init__(self, density: InvariantDensity, radius: float | None = None,
                 max_depth: int = 200, min_width: float = 1e-300):
        self.density = density
        self.fmap = density.fmap
        w = np.diff(density.edges)
        self.spikes = np.asarray(density.spikes, dtype=float)
        self.lo, self.hi = float(density.edges[0]), float(density.edges[-1])
        self.radius = (min(SPIKE_RADIUS_BINS * float(w.max()), 0.25 * self._separation())
                       if radius is None else float(radius))
        self.max_depth = max_depth
        self.min_width = min_width
        self._cum = density.cumulative
        self._norm = 1.0
        self._norm = self._raw(self.lo, self.hi, 0)

    def _separation(self) -> float:
        # Gap between spikes and their mirror images about c, ignoring exact
        # coincidences; a wider radius lets pullbacks branch at every level.
        q = self.spikes
        pts = np.unique(np.concatenate([q, 2 * self.fmap.c - q, [self.lo, self.hi]]))
        d = np.diff(pts)
        d = d[d > 1e-9]
        return float(d.min()) if d.size else math.inf

    def _quad(self, a, b):
        return float(np.interp(b, self.density.edges, self._cum)
                     - np.interp(a, self.density.edges, self._cum))

    def _raw(self, a, b, depth):
        a, b = max(a, self.lo), min(b, self.hi)
        if b <= a:
            return 0.0
        if self.spikes.size == 0:
            return self._quad(a, b)
        r = self.radius
        cuts = [a, b] + [t for q in self.spikes for t in (q - r, q + r) if a < t < b]
        cuts = sorted(set(cuts))
        tot = 0.0
        f = self.fmap
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            mid = 0.5 * (x0 + x1)
            near = bool(np.any(np.abs(self.spikes - mid) < r))
            if not near or depth >= self.max_depth or x1 - x0 < self.min_width:
                tot += self._quad(x0, x1)
                continue
            s_hi, s_lo = f.branch_offset(x0), f.branch_offset(x1)
            tot += self._raw(f.c - s_hi, f.c - s_lo, depth + 1)
            tot += self._raw(f.c + s_lo, f.c + s_hi, depth + 1)
        return tot

    def __call__(self, a: float, b: float) -> float:
        return self._raw(float(a), float(b), 0) / self._norm


def mu_interval(density: InvariantDensity, a: float, b: float, orbitData=None) -> float:
    """Invariant measure of ``[a, b]``.

    ``orbitData`` optionally overrides the postcritical points treated as
    spikes.  Repeated calls should reuse a :class:`MeasureEvaluator`.
    """
    if b < a:
        raise DomainError(f"empty interval [{a}, {b}]")
    if orbitData is not None:
        density = _with_spikes(density, orbitData)
    return _evaluator(density)(a, b)


def _with_spikes(density, orbit):
    pts = np.unique(orbit.orbit if isinstance(orbit, CriticalOrbitData) else np.asarray(orbit))
    return InvariantDensity(density.fmap, density.edges, density.masses, density.spike_exponents,
                            density.rho_c, pts, density.residual)


_EVAL_CACHE: dict = {}


def _evaluator(density: InvariantDensity) -> MeasureEvaluator:
    key = id(density)
    hit = _EVAL_CACHE.get(key)
    if hit is None or hit.density is not density:
        if len(_EVAL_CACHE) > 16:
            _EVAL_CACHE.clear()
        hit = _EVAL_CACHE[key] = MeasureEvaluator(density)
    return hit


# ----------------------------------------------------------------- hole measures
@dataclass(frozen=True)
class HoleMeasures:
    mu_H: float
    mu_Hprime: float
    ratio: float
    predicted_ratio: float


def hole_measures(fmap: UnimodalMap, induced, density: InvariantDensity, z: float,
                  eps_L: float, eps_R: float, orbit: CriticalOrbitData | None = None) -> HoleMeasures:
    """``mu(H)``, ``mu(H')`` and their ratio against the limiting value."""
    from .symbolic import induced_hole

    if not (0.1 <= eps_L / eps_R <= 10.0):
        raise ConfigError("hole side ratio must lie in [1/10, 10]")
    if orbit is None:
        orbit = critical_orbit(fmap)
    ev = _evaluator(density)
    mu_H = ev(z - eps_L, z + eps_R)
    hp = induced_hole(induced, z, eps_L, eps_R)
    mu_Hp = float(sum(ev(a, b) for a, b in hp.intervals()))
    case, _, _, pred = classify_point(fmap, z, orbit)
    # off the postcritical orbit the induced hole carries the full measure
    pred = pred if case == "periodic_in_orbit" else 1.0
    return HoleMeasures(mu_H, mu_Hp, mu_Hp / mu_H if mu_H > 0 else float("nan"), pred)
