"""Unimodal map family, critical orbits and periodic points.

The family is ``f(x) = A/4 - A|x - c|**ell`` with ``c = 1/2``.  For ``ell = 2``
this is the logistic map ``A x (1 - x)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import (
    DomainError,
    NoRoot,
    NotEventuallyPeriodic,
    NotMinimal,
    NotRepelling,
)

PERIODIC_TOL = 1e-10
MAX_PERIOD = 12


@dataclass(frozen=True)
class UnimodalMap:
    """One member of the family ``x -> A/4 - A|x - c|**ell``.

    Evaluation is arranged so that points near 0 and near the critical value
    keep full relative precision, which matters for orbits that shadow the
    postcritical set for a long time.
    """

    A: float
    ell: float = 2.0
    c: float = 0.5

    def __post_init__(self):
        if not self.ell > 1.0:
            raise DomainError(f"critical order must exceed 1, got {self.ell}")
        if not self.A > 0.0:
            raise DomainError(f"parameter A must be positive, got {self.A}")

    # constants of the stable formulas
    @property
    def _cl(self) -> float:
        return self.c**self.ell

    @property
    def _shift(self) -> float:
        # 1/4 - c**ell, zero for the quadratic member
        return 0.25 - self._cl

    @property
    def critical_value(self) -> float:
        return self.A / 4.0

    @property
    def core(self) -> tuple[float, float]:
        """Dynamical core ``[f^2(c), f(c)]``."""
        c1 = self.critical_value
        return (float(self(c1)), c1)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        c = self.c
        # c - |x - c|, computed without cancellation near 0 and near 2c
        near = np.where(x < c, x, 2.0 * c - x)
        if self.ell == 2.0:
            d = np.abs(x - c)
            out = self.A * (self._shift + near * (c + d))
        else:
            v = -near / c
            with np.errstate(divide="ignore"):
                pw = np.expm1(self.ell * np.log1p(v))
            out = self.A * (self._shift - self._cl * pw)
        return out if out.ndim else float(out)

    def df(self, x):
        """First derivative."""
        x = np.asarray(x, dtype=float)
        d = x - self.c
        out = -self.ell * self.A * np.abs(d) ** (self.ell - 1.0) * np.sign(d)
        return out if out.ndim else float(out)

    def branch_offset(self, y):
        """Distance ``s(y) = |x - c|`` of either preimage of ``y``."""
        y = np.asarray(y, dtype=float)
        u = np.maximum((self._shift - y / self.A) / self._cl, -1.0)
        with np.errstate(divide="ignore"):
            out = self.c * np.exp(np.log1p(u) / self.ell)
        return out if out.ndim else float(out)

    def inverse(self, y, side):
        """Preimage of ``y`` on the left (``side < 0``) or right branch."""
        y = np.asarray(y, dtype=float)
        u = np.maximum((self._shift - y / self.A) / self._cl, -1.0)
        with np.errstate(divide="ignore"):
            g = np.log1p(u) / self.ell
            left = -self.c * np.expm1(g)
            right = self.c + self.c * np.exp(g)
        out = np.where(np.asarray(side) < 0, left, right)
        return out if out.ndim else float(out)

    def side(self, x):
        """-1 left of c, +1 right of c (c itself counts as right)."""
        return np.where(np.asarray(x) < self.c, -1, 1)


def _check_domain(x):
    xa = np.asarray(x, dtype=float)
    if np.any(~np.isfinite(xa)) or np.any(xa < 0.0) or np.any(xa > 1.0):
        raise DomainError(f"point(s) outside [0, 1]: {x!r}")
    return xa


def eval(fmap: UnimodalMap, x, n: int = 1):  # noqa: A001 - mirrors f^n
    """Return ``f^n(x)``; ``n = 0`` returns ``x`` unchanged."""
    if n < 0:
        raise DomainError("iterate count must be non-negative")
    y = _check_domain(x)
    for _ in range(n):
        y = fmap(y)
    return y if np.ndim(y) else float(y)


def deriv(fmap: UnimodalMap, x, n: int = 1):
    """``Df^n(x)`` as the chain-rule product along the orbit."""
    if n < 1:
        raise DomainError("derivative order must be at least 1")
    y = np.asarray(x, dtype=float)
    out = np.ones_like(y)
    for _ in range(n):
        out = out * fmap.df(y)
        y = fmap(y)
    return out if np.ndim(out) else float(out)


@dataclass(frozen=True)
class CriticalOrbitData:
    """Finite postcritical orbit of a Misiurewicz-Thurston map.

    ``orbit`` holds the distinct points ``c_1, ..., c_{k0+p-1}`` with
    ``c_j = f^j(c)``; the orbit closes up with ``c_{k0+p} = c_{k0}``.
    """

    orbit: np.ndarray
    k0: int
    p: int
    lambda_tail: float
    orientation: int
    residual: float = 0.0

    def point(self, j: int) -> float:
        """``f^j(c)`` for any ``j >= 1``, folded onto the cycle."""
        if j < 1:
            raise DomainError("postcritical index starts at 1")
        if j >= self.k0 + self.p:
            j = self.k0 + (j - self.k0) % self.p
        return float(self.orbit[j - 1])

    @property
    def cycle(self) -> np.ndarray:
        return self.orbit[self.k0 - 1:]

    def index_of(self, x: float, tol: float = 1e-9) -> int | None:
        """Smallest ``j >= 1`` with ``f^j(c) = x`` within ``tol``, else None."""
        hits = np.flatnonzero(np.abs(self.orbit - x) <= tol)
        return int(hits[0]) + 1 if hits.size else None


def critical_orbit(fmap: UnimodalMap, max_iter: int = 64,
                   tol: float = PERIODIC_TOL) -> CriticalOrbitData:
    """Detect the minimal preperiod ``k0`` and period ``p`` of ``f(c)``.

    The first index ``n`` at which ``c_n`` repeats an earlier ``c_m`` gives
    the minimal pair ``(k0, p) = (m, n - m)``.  A recurrence onto a cycle
    that is not repelling means the orbit is merely converging to an
    attracting cycle.
    """
    pts = [fmap.c]
    for n in range(1, max_iter + 1):
        x = float(fmap(pts[-1]))
        prev = np.asarray(pts)
        close = np.flatnonzero(np.abs(prev - x) < tol)
        pts.append(x)
        if close.size == 0:
            continue
        m = int(close[0])
        k0, p = m, n - m
        if k0 == 0:
            raise NotEventuallyPeriodic("the critical point itself is periodic")
        lam = deriv(fmap, pts[k0], p)
        if abs(lam) <= 1.0:
            raise NotEventuallyPeriodic(
                f"critical orbit converges to an attracting cycle "
                f"(period {p}, multiplier {lam:.6g})")
        if k0 < 2:
            raise NotEventuallyPeriodic("critical value is periodic; core degenerates")
        orbit = np.asarray(pts[1:k0 + p])
        return CriticalOrbitData(orbit=orbit, k0=k0, p=p, lambda_tail=abs(lam),
                                 orientation=int(np.sign(lam)),
                                 residual=abs(x - pts[k0]))
    raise NotEventuallyPeriodic(f"no recurrence within {max_iter} iterates at tol={tol}")


def mt_residual(A: float, k0: int, p: int, ell: float = 2.0, c: float = 0.5) -> float:
    """``g(A) = f_A^{k0+p}(c) - f_A^{k0}(c)``."""
    fmap = UnimodalMap(A, ell, c)
    x = c
    for _ in range(k0):
        x = float(fmap(x))
    base = x
    for _ in range(p):
        x = float(fmap(x))
    return x - base


def _smaller_match(A, k0, p, ell, c, tol):
    for kk, pp in itertools.product(range(0, k0 + 1), range(1, p + 1)):
        if (kk, pp) == (k0, p) or (kk == k0 and p % pp) or (kk + pp > k0 + p):
            continue
        if kk < k0 or pp < p:
            if abs(mt_residual(A, kk, pp, ell, c)) < tol:
                return kk, pp
    return None


def _polish(A, k0, p, ell, c, target=1e-13):
    """Secant steps from a bracketed root until the residual is tiny."""
    g = lambda a: mt_residual(a, k0, p, ell, c)  # noqa: E731
    best, gbest = A, g(A)
    a0, a1 = A, np.nextafter(A, np.inf)
    g0, g1 = gbest, g(a1)
    for _ in range(8):
        if abs(gbest) < target or g1 == g0:
            break
        a2 = a1 - g1 * (a1 - a0) / (g1 - g0)
        a0, g0, a1, g1 = a1, g1, a2, g(a2)
        if abs(g1) < abs(gbest):
            best, gbest = a1, g1
    # a last scan over neighbouring doubles
    cand = best
    for _ in range(4):
        for step in (np.inf, -np.inf):
            nb = np.nextafter(cand, step)
            if abs(g(nb)) < abs(gbest):
                best, gbest = nb, g(nb)
        cand = best
    return float(best), float(gbest)


def find_mt_parameter(k0: int, p: int, bracket: Sequence[float], ell: float = 2.0,
                      c: float = 0.5, n_scan: int = 2001,
                      target: float = 1e-13) -> UnimodalMap:
    """Locate ``A`` in ``bracket`` with ``f^{k0}(c)`` periodic of period ``p``.

    The bracket is scanned for sign changes of ``g``; each is refined by
    Brent's method and polished with secant steps, then checked for
    minimality of ``(k0, p)`` and a repelling tail.  The first candidate
    passing every check is returned.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise NoRoot(f"empty bracket {bracket!r}")
    g = lambda a: mt_residual(a, k0, p, ell, c)  # noqa: E731
    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([g(a) for a in grid])
    # (A, crossing?) pairs; zeros sitting on the grid count as touching only
    cands: list[tuple[float, bool]] = []
    for i in range(n_scan - 1):
        if vals[i] * vals[i + 1] < 0.0:
            root = brentq(g, grid[i], grid[i + 1], xtol=1e-16, rtol=1e-15, maxiter=200)
            cands.append((root, True))
    for a, v in zip(grid, vals):
        if abs(v) < target:
            cands.append((a, False))
    failures: list[Exception] = []
    for a, crossing in cands:
        A, res = _polish(a, k0, p, ell, c, target)
        if abs(res) >= target:
            failures.append(NoRoot(f"residual {res:.3g} at A={A!r} above {target}"))
            continue
        smaller = _smaller_match(A, k0, p, ell, c, PERIODIC_TOL)
        if smaller is not None:
            failures.append(NotMinimal(f"A={A!r} also satisfies (k0, p)={smaller}"))
            continue
        fmap = UnimodalMap(A, ell, c)
        lam = abs(deriv(fmap, float(eval(fmap, c, k0)), p))
        if lam <= 1.0:
            failures.append(NotRepelling(f"A={A!r}: |Df^p| = {lam:.6g} <= 1"))
            continue
        return fmap
    if not any(crossing for _, crossing in cands):
        raise NoRoot(f"g(A) has no admissible sign change in [{lo}, {hi}] "
                     f"for k0={k0}, p={p}")
    raise failures[0]


@dataclass(frozen=True)
class PeriodicPoint:
    x: float
    period: int
    multiplier: float
    orientation: str  # "preserving" or "reversing"


def turning_points(fmap: UnimodalMap, n: int) -> np.ndarray:
    """Points of [0, 1] where ``f^n`` changes monotonicity."""
    level = np.array([fmap.c])
    found = [level]
    for _ in range(n - 1):
        level = level[level <= fmap.critical_value]
        if level.size == 0:
            break
        pre = np.concatenate([fmap.inverse(level, -1), fmap.inverse(level, 1)])
        level = pre[(pre >= 0.0) & (pre <= 1.0)]
        found.append(level)
    return np.unique(np.concatenate(found))


def find_periodic_points(fmap: UnimodalMap, n: int, tol: float = 1e-9,
                         n_max: int = MAX_PERIOD) -> list[PeriodicPoint]:
    """All solutions of ``f^n(x) = x`` in [0, 1], tagged with prime periods."""
    if not 1 <= n <= n_max:
        raise DomainError(f"period must be in 1..{n_max}")
    laps = np.concatenate([[0.0], turning_points(fmap, n), [1.0]])
    laps = np.unique(laps)

    def g(x):
        y = x
        for _ in range(n):
            y = float(fmap(y))
            if not -1e-12 <= y <= 1.0 + 1e-12:
                return np.nan
        return y - x

    roots: list[float] = []
    for a, b in zip(laps[:-1], laps[1:]):
        ga, gb = g(a), g(b)
        if np.isnan(ga) or np.isnan(gb):
            continue
        if abs(ga) < tol:
            roots.append(a)
        if abs(gb) < tol:
            roots.append(b)
        if ga * gb < 0.0:
            roots.append(brentq(g, a, b, xtol=1e-15, rtol=1e-15, maxiter=200))
    roots.sort()
    uniq: list[float] = []
    for r in roots:
        if not uniq or abs(r - uniq[-1]) > 1e-9:
            uniq.append(r)
    out = []
    for x in uniq:
        per = next(d for d in range(1, n + 1)
                   if n % d == 0 and abs(eval(fmap, x, d) - x) < 1e-8)
        lam = deriv(fmap, x, per)
        out.append(PeriodicPoint(float(x), per, abs(lam),
                                 "preserving" if lam > 0 else "reversing"))
    return out


def lambda_per_estimate(fmap: UnimodalMap, n_max: int = 8) -> float:
    """Empirical ``min |Df^n(x)|^{1/n}`` over located periodic points."""
    best = np.inf
    for n in range(1, n_max + 1):
        for pt in find_periodic_points(fmap, n):
            if pt.period == n and pt.multiplier > 0:
                best = min(best, pt.multiplier ** (1.0 / n))
    return float(best)


def classify_point(fmap: UnimodalMap, z: float, orbit: CriticalOrbitData,
                   max_period: int = MAX_PERIOD, tol: float = 1e-9):
    """Trichotomy case of ``z`` with its period and multiplier.

    Returns ``(case, period, multiplier, predicted)`` where ``case`` is one of
    ``"nonperiodic"``, ``"periodic_off_orbit"``, ``"periodic_in_orbit"``.
    """
    _check_domain(z)
    per = None
    y = float(z)
    for n in range(1, max_period + 1):
        y = float(fmap(y))
        if abs(y - z) < tol:
            per = n
            break
    if per is None:
        return "nonperiodic", None, None, 1.0
    lam = abs(deriv(fmap, z, per))
    if orbit.index_of(z, tol) is not None:
        return "periodic_in_orbit", per, lam, 1.0 - lam ** (-1.0 / fmap.ell)
    return "periodic_off_orbit", per, lam, 1.0 - 1.0 / lam
