"""Trajectory simulation for survivor counts and hitting times.

Initial points are drawn from the Ulam density by inverse CDF and then
pushed ``burn_in`` steps forward, which replaces the piecewise-uniform
within-bin profile by the true one near the density spikes.  Randomness
is keyed by ``(seed, block)`` with fixed-size blocks, so output does not
depend on how many worker threads share the work.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor

import numba
import numpy as np

from .maps import UnimodalMap

BLOCK = 1 << 14
DEGENERATE = -1


@numba.njit(cache=True, nogil=True, inline="always")
def _step(y, A, ell, c, shift, cl, quad):
    near = y if y < c else 2.0 * c - y
    if quad:
        return A * (shift + near * (c + abs(y - c)))
    return A * (shift - cl * math.expm1(ell * math.log1p(-near / c)))


@numba.njit(cache=True, nogil=True)
def _hits(x, A, ell, c, h0, h1, horizon, first, burn, out):
    """First time ``k >= first`` with ``f^k(x)`` in ``(h0, h1)``.

    Writes ``horizon + 1`` for trajectories that never enter within the
    horizon and ``DEGENERATE`` for those that freeze on a floating-point
    fixed point outside the hole, which no invariant-measure orbit does.
    """
    shift = 0.25 - c ** ell
    cl = c ** ell
    quad = ell == 2.0
    for i in range(x.shape[0]):
        y = x[i]
        stuck = False
        for _ in range(burn):
            yn = _step(y, A, ell, c, shift, cl, quad)
            if yn == y:
                stuck = True
                break
            y = yn
        if stuck and not (h0 < y < h1):
            out[i] = -1
            continue
        res = horizon + 1
        k = 0
        if first == 1:
            y = _step(y, A, ell, c, shift, cl, quad)
            k = 1
        while k <= horizon:
            if h0 < y < h1:
                res = k
                break
            yn = _step(y, A, ell, c, shift, cl, quad)
            if yn == y:
                res = -1
                break
            y = yn
            k += 1
        out[i] = res


def _block_times(fmap, quantile, hole, size, horizon, first, burn, seed, block):
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))
    x = quantile(rng.random(size))
    out = np.empty(size, dtype=np.int64)
    h0, h1 = hole
    _hits(np.ascontiguousarray(x, dtype=np.float64), float(fmap.A), float(fmap.ell),
          float(fmap.c), float(h0), float(h1), int(horizon), int(first), int(burn), out)
    return out


def simulate_hits(fmap: UnimodalMap, density, hole: tuple[float, float], n_samples: int,
                  horizon: int, seed: int, first: int = 0, burn_in: int = 32,
                  workers: int | None = None) -> np.ndarray:
    """Hitting times of ``n_samples`` mu-distributed trajectories.

    Parameters
    ----------
    hole : (h0, h1)
        Open interval to hit.
    first : {0, 1}
        ``0`` counts time zero (escape times), ``1`` gives the first
        return-type hitting time ``inf{k >= 1}``.

    Returns
    -------
    ndarray of int64 in trajectory order: the hitting time, ``horizon + 1``
    if censored, or ``-1`` for degenerate trajectories.
    """
    if seed is None:
        raise ValueError("a seed is required for Monte Carlo runs")
    n_blocks = -(-n_samples // BLOCK)
    sizes = [min(BLOCK, n_samples - b * BLOCK) for b in range(n_blocks)]
    workers = workers or os.cpu_count() or 1
    q = density.quantile

    def run(b):
        return _block_times(fmap, q, hole, sizes[b], horizon, first, burn_in,
                            int(seed), b)

    if workers == 1 or n_blocks == 1:
        parts = [run(b) for b in range(n_blocks)]
    else:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(run, range(n_blocks)))
    return np.concatenate(parts) if parts else np.empty(0, dtype=np.int64)


def survivor_curve(times: np.ndarray, horizon: int) -> np.ndarray:
    """``S[n] = #{T >= n}`` for ``n = 0..horizon`` over non-degenerate samples."""
    t = times[times >= 0]
    cnt = np.bincount(np.minimum(t, horizon + 1), minlength=horizon + 2)
    return np.cumsum(cnt[::-1])[::-1][: horizon + 1]
