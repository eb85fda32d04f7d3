"""Markov partition, inducing domain, first-return map and chains.

The first-return map is enumerated by pushing intervals forward and cutting
their images at the boundary of ``Y`` (and at ``c`` for the first step).
Domain endpoints are never obtained by forward iteration: every returned
piece is pulled back along its branch word, which keeps the points near the
critical value accurate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace
from typing import Iterable, Sequence

import numpy as np

from .errors import BadDomain, CapTooSmall, DegeneratePartition, NoChains
from .maps import CriticalOrbitData, UnimodalMap, classify_point, deriv

_TOUCH = 1e-13


# ----------------------------------------------------------------- intervals
@dataclass(frozen=True)
class IntervalUnion:
    """Finite union of disjoint closed intervals, sorted."""

    parts: tuple[tuple[float, float], ...]

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]]) -> "IntervalUnion":
        ps = sorted((float(a), float(b)) for a, b in pairs if b > a)
        merged: list[list[float]] = []
        for a, b in ps:
            if merged and a <= merged[-1][1] + _TOUCH:
                merged[-1][1] = max(merged[-1][1], b)
            else:
                merged.append([a, b])
        return cls(tuple((a, b) for a, b in merged))

    def subtract(self, holes: Iterable[Sequence[float]]) -> "IntervalUnion":
        out = list(self.parts)
        for h0, h1 in holes:
            nxt = []
            for a, b in out:
                if h1 <= a or h0 >= b:
                    nxt.append((a, b))
                    continue
                if h0 > a:
                    nxt.append((a, h0))
                if h1 < b:
                    nxt.append((h1, b))
            out = nxt
        return IntervalUnion.from_pairs(out)

    @property
    def measure(self) -> float:
        return float(sum(b - a for a, b in self.parts))

    @property
    def boundaries(self) -> np.ndarray:
        return np.array(sorted({x for ab in self.parts for x in ab}))

    def contains(self, x, tol: float = 0.0):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for a, b in self.parts:
            out |= (x >= a - tol) & (x <= b + tol)
        return out if out.ndim else bool(out)

    def covers(self, a: float, b: float, tol: float = 0.0) -> bool:
        return any(lo - tol <= a and b <= hi + tol for lo, hi in self.parts)

    def __iter__(self):
        return iter(self.parts)

    def __len__(self):
        return len(self.parts)


def pull_back(fmap: UnimodalMap, y, word: Sequence[int], start: int = 0):
    """Undo ``f`` along ``word[start:]``, returning the full chain.

    ``chain[k]`` is the point reached after ``start + k`` forward steps, so
    ``chain[0]`` lies in the original interval and ``chain[-1]`` is ``y``.
    """
    y = np.asarray(y, dtype=float)
    chain = [y]
    for sd in reversed(word[start:]):
        y = fmap.inverse(y, sd)
        chain.append(y)
    return np.array(chain[::-1])


def push_forward(fmap: UnimodalMap, y, steps: int):
    y = np.asarray(y, dtype=float)
    for _ in range(steps):
        y = fmap(y)
    return y


# ----------------------------------------------------------------- partition
@dataclass(frozen=True)
class MarkovPartition:
    fmap: UnimodalMap
    orbit: CriticalOrbitData
    boundaries: np.ndarray
    transition: np.ndarray
    markov_defect: float

    @property
    def M(self) -> int:
        return len(self.boundaries) - 1

    @property
    def intervals(self) -> list[tuple[float, float]]:
        b = self.boundaries
        return [(float(b[i]), float(b[i + 1])) for i in range(self.M)]

    def is_irreducible(self) -> bool:
        T = self.transition.astype(int)
        reach = np.eye(self.M, dtype=int)
        for _ in range(self.M):
            reach = np.minimum(reach + reach @ T, 1)
        return bool(reach.all())

    def is_aperiodic(self) -> bool:
        T = self.transition.astype(int)
        P = np.eye(self.M, dtype=int)
        for _ in range(self.M * self.M + 1):
            P = np.minimum(P @ T, 1)
        return bool(P.all())


def build_partition(orbit: CriticalOrbitData, fmap: UnimodalMap) -> MarkovPartition:
    """Partition of the core cut at the critical orbit ``c_0, ..., c_{k0+p-1}``."""
    pts = np.sort(np.concatenate([[fmap.c], orbit.orbit]))
    gaps = np.diff(pts)
    if np.any(gaps < 1e-12):
        raise DegeneratePartition("postcritical points coincide within 1e-12")
    n = len(pts) - 1
    trans = np.zeros((n, n), dtype=bool)
    defect = 0.0
    for i in range(n):
        lo, hi = sorted((float(fmap(pts[i])), float(fmap(pts[i + 1]))))
        for e in (lo, hi):
            defect = max(defect, float(np.min(np.abs(pts - e))))
        for j in range(n):
            trans[i, j] = lo - 1e-9 <= pts[j] and pts[j + 1] <= hi + 1e-9
    return MarkovPartition(fmap, orbit, pts, trans, defect)


# ----------------------------------------------------------------- inducing domain
@dataclass(frozen=True)
class InducingDomain:
    """``Y`` together with the neighbourhoods removed to build it.

    ``removed`` maps a postcritical index ``j`` to the open neighbourhood of
    ``c_j`` taken out of the core.  ``u0`` is the neighbourhood of ``z``;
    orbits leaving the removed region re-enter ``Y`` inside ``reentry``.
    """

    fmap: UnimodalMap
    orbit: CriticalOrbitData
    z: float
    k1: int
    depth: int
    Y: IntervalUnion
    removed: dict
    u0: tuple[float, float]
    reentry: tuple[float, float]

    @property
    def periodic(self) -> bool:
        return self.k1 >= self.orbit.k0

    @property
    def cycle_sides(self) -> tuple[int, ...]:
        """Branch sides along the cycle of ``z`` (periodic case)."""
        return tuple(int(self.fmap.side(self.orbit.point(self.k1 + j)))
                     for j in range(self.orbit.p))

    def in_u0(self, lo: float, hi: float) -> bool:
        return self.u0[0] - _TOUCH <= lo and hi <= self.u0[1] + _TOUCH


def cylinder_nbhd(fmap: UnimodalMap, orbit: CriticalOrbitData, x: float,
                  depth: int) -> tuple[float, float]:
    """Open depth-``depth`` cylinder next to ``x`` on either side.

    Its endpoints are the nearest points to ``x`` among the preimages of
    ``orb(c)`` of order below ``depth``.  They are found by pulling back the
    cylinder around ``f(x)`` one level shallower, so only ``depth`` inverse
    evaluations are needed.
    """
    lo, hi = fmap.core
    marks = np.concatenate([[fmap.c], orbit.orbit])
    left = marks[marks < x - _TOUCH]
    right = marks[marks > x + _TOUCH]
    a = float(left.max()) if left.size else lo
    b = float(right.min()) if right.size else hi
    if depth <= 1:
        return a, b
    ya, yb = cylinder_nbhd(fmap, orbit, float(fmap(x)), depth - 1)
    sd = int(fmap.side(x))
    pre = fmap.inverse(np.array([ya, yb]), sd)
    for q in pre:
        if q < x - _TOUCH:
            a = max(a, float(q))
        elif q > x + _TOUCH:
            b = min(b, float(q))
    return a, b


def _image(fmap, a, b):
    ya, yb = float(fmap(a)), float(fmap(b))
    return (ya, yb) if ya <= yb else (yb, ya)


def _try_domain(fmap, orbit, z, k1, depth):
    core = fmap.core
    u0 = cylinder_nbhd(fmap, orbit, z, depth)
    k0, p = orbit.k0, orbit.p

    def fold(j):
        return j if j < k0 + p else k0 + (j - k0) % p

    removed = {fold(k1): u0}
    last = k1 + p - 1 if k1 >= k0 else k0 + p - 1
    cur = u0
    for j in range(k1, last):
        if cur[0] + 1e-12 < fmap.c < cur[1] - 1e-12:
            raise BadDomain(f"neighbourhood of c_{fold(j)} contains the critical point")
        cur = _image(fmap, *cur)
        removed[fold(j + 1)] = cur
    reentry = _image(fmap, *cur)
    # preperiodic points: pull back from c_{k0} (periodic z) or from z itself
    start = min(k1, k0)
    nb = removed[start]
    for m in range(start - 1, 0, -1):
        sd = int(fmap.side(orbit.point(m)))
        ends = fmap.inverse(np.array(nb), sd)
        nb = (float(min(ends)), float(max(ends)))
        removed[m] = nb
    Y = IntervalUnion.from_pairs([core]).subtract(removed.values())
    return Y, removed, u0, reentry


def _check_domain(fmap, orbit, z, Y, removed, reentry, core):
    lo, hi = core
    if Y.contains(z):
        raise BadDomain("z lies in Y")
    for j in range(1, orbit.k0 + orbit.p):
        q = orbit.point(j)
        if Y.contains(q, -_TOUCH) and not any(x == q for x in Y.boundaries):
            raise BadDomain(f"postcritical point c_{j} lies in Y")
    # f(Y) covers Y
    imgs = []
    for a, b in Y:
        cuts = [a, b] + ([fmap.c] if a < fmap.c < b else [])
        cuts.sort()
        for x0, x1 in zip(cuts[:-1], cuts[1:]):
            imgs.append(_image(fmap, x0, x1))
    # Points of Y outside f(Y) can only be reached through the removed
    # region; they must sit inside the re-entry hull next to z.
    gaps = Y.subtract(IntervalUnion.from_pairs(imgs).parts)
    for a, b in gaps:
        if b - a > 1e-9 and not (reentry[0] - 1e-9 <= a and b <= reentry[1] + 1e-9):
            raise BadDomain(f"f(Y) misses [{a}, {b}] outside the re-entry region")
    if any(b - a < 1e-9 for a, b in Y):
        raise BadDomain("Y has a sliver component; refine the cylinders")
    # re-entry from the removed region happens only inside the re-entry hull
    for a, b in removed.values():
        xs = np.linspace(a, b, 203)[1:-1]
        x = xs.copy()
        alive = np.ones(x.size, dtype=bool)
        for _ in range(400):
            x = np.where(alive, fmap(x), x)
            hit = alive & Y.contains(x)
            if np.any(hit):
                bad = hit & ~((x >= reentry[0] - 1e-9) & (x <= reentry[1] + 1e-9))
                if np.any(bad):
                    raise BadDomain("orbit re-enters Y away from the designated point")
                alive &= ~hit
            if not alive.any():
                break


def build_inducing_domain(partition: MarkovPartition, z: float, depth: int | None = None,
                          hole: tuple[float, float] | None = None,
                          max_depth: int = 24, min_fraction: float = 0.5) -> InducingDomain:
    """Remove cylinder neighbourhoods of ``orb(f(c))`` from the core.

    ``z`` must be a postcritical point.  The neighbourhood of ``z`` is the
    depth-``depth`` cylinder around it; it is carried forward along the
    orbit of ``z`` and pulled back along the preperiodic part of the
    critical orbit.  Without an explicit depth the shallowest one passing
    all checks, keeping at least ``min_fraction`` of the core and containing
    ``hole`` if given, is used.
    """
    fmap, orbit = partition.fmap, partition.orbit
    core = fmap.core
    if not core[0] - 1e-12 <= z <= core[1] + 1e-12:
        raise BadDomain(f"z={z} lies outside the core {core}")
    k1 = orbit.index_of(z)
    if k1 is None:
        raise BadDomain(f"z={z} is not on the postcritical orbit")
    z = orbit.point(k1)
    depths = [depth] if depth is not None else range(2, max_depth + 1)
    last_err: Exception | None = None
    for d in depths:
        if d < 1:
            raise BadDomain("depth must be at least 1")
        try:
            Y, removed, u0, reentry = _try_domain(fmap, orbit, z, k1, d)
            if hole is not None:
                h0, h1 = max(hole[0], core[0]), min(hole[1], core[1])
                if not (u0[0] - _TOUCH <= h0 and h1 <= u0[1] + _TOUCH):
                    raise BadDomain(f"hole {hole} exceeds the neighbourhood {u0}")
            _check_domain(fmap, orbit, z, Y, removed, reentry, core)
            if depth is None and Y.measure < min_fraction * (core[1] - core[0]):
                raise BadDomain(f"Y keeps only {Y.measure:.3f} of the core")
        except BadDomain as err:
            last_err = err
            if depth is None and hole is not None and "exceeds" in str(err):
                # deeper cylinders only shrink the neighbourhood
                break
            continue
        return InducingDomain(fmap, orbit, z, k1, d, Y, dict(sorted(removed.items())),
                              u0, reentry)
    raise last_err if last_err else BadDomain("no admissible depth")


# ----------------------------------------------------------------- first return
@dataclass(frozen=True)
class Domain:
    left: float
    right: float
    tau: int
    word: tuple[int, ...]
    image: tuple[float, float]
    deriv_min: float
    deriv_max: float
    visits: tuple[tuple[int, float, float], ...] = ()
    parent: int = -1

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def hole_pass(self):
        """First step spent near ``z`` and the side of ``z`` it falls on."""
        return self.visits[0][0] if self.visits else None


@dataclass(frozen=True)
class InducedMap:
    fmap: UnimodalMap
    domain: InducingDomain
    domains: tuple[Domain, ...]
    tau_max: int
    uncovered: float

    @property
    def Y(self) -> IntervalUnion:
        return self.domain.Y

    @property
    def taus(self) -> np.ndarray:
        return np.array([d.tau for d in self.domains])

    @property
    def lefts(self) -> np.ndarray:
        return np.array([d.left for d in self.domains])

    @property
    def rights(self) -> np.ndarray:
        return np.array([d.right for d in self.domains])

    @property
    def coverage(self) -> float:
        return 1.0 - self.uncovered / self.Y.measure

    def tail_counts(self):
        """(n, Lebesgue measure of {tau = n}, number of domains with tau = n)."""
        taus = self.taus
        lens = self.rights - self.lefts
        ns = np.arange(1, self.tau_max + 1)
        meas = np.array([lens[taus == n].sum() for n in ns])
        cnt = np.array([(taus == n).sum() for n in ns])
        return ns, meas, cnt

    def expansion(self) -> np.ndarray:
        """``min |Df^tau|^{1/tau}`` per domain."""
        return np.array([d.deriv_min ** (1.0 / d.tau) for d in self.domains])

    def to_table(self, chains: "ChainStructure | None" = None) -> str:
        lab = chains.labels() if chains is not None else {}
        rows = ["# left right tau image_left image_right chain_id depth"]
        order = np.argsort(self.lefts, kind="stable")
        for i in order:
            d = self.domains[i]
            cid, dep = lab.get(int(i), (-1, 0))
            rows.append(" ".join([f"{d.left:.17g}", f"{d.right:.17g}", str(d.tau),
                                  f"{d.image[0]:.17g}", f"{d.image[1]:.17g}",
                                  str(cid), str(dep)]))
        return "\n".join(rows) + "\n"

    @classmethod
    def from_table(cls, text: str, fmap: UnimodalMap, domain: InducingDomain,
                   tau_max: int) -> "InducedMap":
        """Rebuild from :meth:`to_table` output; words come from midpoints."""
        doms = []
        for line in text.splitlines():
            if not line.strip() or line.startswith("#"):
                continue
            f = line.split()
            left, right, tau = float(f[0]), float(f[1]), int(f[2])
            img = (float(f[3]), float(f[4]))
            x = 0.5 * (left + right)
            word = []
            for _ in range(tau):
                word.append(int(fmap.side(x)))
                x = float(fmap(x))
            doms.append(_make_domain(fmap, domain, tuple(word), img, tau,
                                     _visit_steps(fmap, domain, left, right, tau),
                                     (left, right)))
        Ym = domain.Y.measure
        return cls(fmap, domain, tuple(doms), tau_max,
                   Ym - sum(d.length for d in doms))


def _visit_steps(fmap, domain, left, right, tau):
    x = 0.5 * (left + right)
    steps = []
    for s in range(1, tau):
        x = float(fmap(x))
        if domain.u0[0] <= x <= domain.u0[1]:
            steps.append(s)
    return tuple(steps)


def _make_domain(fmap, domain, word, img, tau, visit_steps, ends=None, parent=-1):
    mid = 0.5 * (img[0] + img[1])
    chain = pull_back(fmap, np.array([img[0], mid, img[1]]), word)
    xs = chain[0]
    dfs = np.abs(np.prod(fmap.df(chain[:-1]), axis=0))
    left, right = (float(min(xs[0], xs[2])), float(max(xs[0], xs[2])))
    if ends is not None:
        left, right = ends
    visits = tuple((s, float(min(chain[s][0], chain[s][2])),
                    float(max(chain[s][0], chain[s][2]))) for s in visit_steps)
    return Domain(left, right, tau, tuple(word), (float(img[0]), float(img[1])),
                  float(dfs.min()), float(dfs.max()), visits, parent)


def first_return_map(fmap: UnimodalMap, domain: InducingDomain, tau_max: int = 64,
                     min_cover: float = 1 - 1e-3, prune: float = 1e-15,
                     max_pieces: int = 20_000) -> InducedMap:
    """Enumerate the first-return map to ``Y`` breadth first.

    Each queue item is an image interval of the current iterate together
    with its branch word.  Images are cut at the boundary of ``Y``; pieces
    inside ``Y`` become domains, the others keep iterating up to
    ``tau_max``.  Pieces whose preimage is shorter than ``prune`` are
    dropped and counted as uncovered, as is everything still queued once
    ``max_pieces`` pieces have been processed.
    """
    Y = domain.Y
    cuts_all = Y.boundaries
    queue: deque = deque()
    for a, b in Y:
        pts = [a, b] + ([fmap.c] if a < fmap.c < b else [])
        pts.sort()
        for x0, x1 in zip(pts[:-1], pts[1:]):
            queue.append((x0, x1, (), ()))
    doms: list[Domain] = []
    processed = 0
    while queue and processed < max_pieces:
        processed += 1
        u, v, word, vis = queue.popleft()
        n = len(word)
        sd = int(fmap.side(0.5 * (u + v)))
        lo, hi = _image(fmap, u, v)
        word2 = word + (sd,)
        inner = cuts_all[(cuts_all > lo + _TOUCH) & (cuts_all < hi - _TOUCH)]
        pts = np.concatenate([[lo], inner, [hi]])
        for p0, p1 in zip(pts[:-1], pts[1:]):
            if p1 - p0 <= 0.0:
                continue
            mid = 0.5 * (p0 + p1)
            if Y.contains(mid):
                d = _make_domain(fmap, domain, word2, (p0, p1), n + 1, vis)
                # pieces squeezed onto c by rounding carry no usable branch
                if d.right - d.left > 0.0 and d.deriv_min > 0.0:
                    doms.append(d)
            elif n + 1 < tau_max:
                vis2 = vis + ((n + 1,) if domain.in_u0(p0, p1) else ())
                ends = pull_back(fmap, np.array([p0, p1]), word2)[0]
                if abs(ends[1] - ends[0]) > prune:
                    queue.append((p0, p1, word2, vis2))
    doms.sort(key=lambda d: d.left)
    covered = sum(d.length for d in doms)
    uncovered = max(Y.measure - covered, 0.0)
    induced = InducedMap(fmap, domain, tuple(doms), tau_max, uncovered)
    if induced.coverage < min_cover:
        raise CapTooSmall(f"covered fraction {induced.coverage:.6f} at tau_max={tau_max}")
    return induced


# ----------------------------------------------------------------- chains
@dataclass(frozen=True)
class Chain:
    side: str
    entry_step: int
    members: tuple[int, ...]
    depths: tuple[int, ...]
    is_principal: bool
    prefix: tuple[int, ...]


@dataclass(frozen=True)
class ChainStructure:
    z: float
    p: int
    multiplier: float
    orientation: int
    chains: tuple[Chain, ...]
    left_ladder: np.ndarray
    right_ladder: np.ndarray

    def labels(self) -> dict:
        return {m: (cid, k) for cid, ch in enumerate(self.chains)
                for m, k in zip(ch.members, ch.depths)}

    @property
    def principal(self) -> tuple[Chain, ...]:
        return tuple(ch for ch in self.chains if ch.is_principal)


def local_inverse(fmap: UnimodalMap, domain: InducingDomain, y, times: int = 1):
    """Apply the branch of ``f^{-p}`` fixing ``z``, ``times`` times."""
    sides = domain.cycle_sides
    y = np.asarray(y, dtype=float)
    for _ in range(times):
        for sd in reversed(sides):
            y = fmap.inverse(y, sd)
    return y


def ladders(fmap: UnimodalMap, domain: InducingDomain, n_max: int = 80):
    """Marker points accumulating on ``z`` from the left and right."""
    z = domain.z
    a, b = domain.u0
    lam = deriv(fmap, z, domain.orbit.p)
    seq_a, seq_b = [a], [b]
    for _ in range(n_max):
        seq_a.append(float(local_inverse(fmap, domain, seq_a[-1])))
        seq_b.append(float(local_inverse(fmap, domain, seq_b[-1])))
        if abs(seq_a[-1] - z) < 1e-15 and abs(seq_b[-1] - z) < 1e-15:
            break
    if lam < 0:
        seq_a, seq_b = ([seq_a[i] if i % 2 == 0 else seq_b[i] for i in range(len(seq_a))],
                        [seq_b[i] if i % 2 == 0 else seq_a[i] for i in range(len(seq_b))])
    left = np.array([x for x in seq_a if x < z])
    right = np.array([x for x in seq_b if x > z])
    lo, hi = fmap.core
    if z <= lo + _TOUCH:
        left = np.array([])
    if z >= hi - _TOUCH:
        right = np.array([])
    return left, right


def identify_chains(induced: InducedMap, z: float | None = None,
                    p: int | None = None) -> ChainStructure:
    """Group domains passing near ``z`` into depth-indexed chains.

    A domain whose orbit first enters the neighbourhood of ``z`` at step
    ``s`` has depth ``(tau - s)/p``.  Domains sharing the branch word up to
    ``s`` and the side of ``z`` they land on form one chain.  The two
    chains that follow the critical orbit are the principal ones.
    """
    dom = induced.domain
    fmap = induced.fmap
    if z is not None and abs(z - dom.z) > 1e-9:
        if classify_point(fmap, z, dom.orbit)[0] == "nonperiodic":
            raise NoChains(f"z={z} is not periodic: no return ladder")
        raise NoChains(f"induced map was built around z={dom.z}, not {z}")
    if not dom.periodic:
        raise NoChains("z is not periodic: no return ladder")
    p = dom.orbit.p if p is None else p
    if p != dom.orbit.p:
        raise NoChains(f"z has period {dom.orbit.p}, not {p}")
    groups: dict = {}
    for i, d in enumerate(induced.domains):
        if not d.visits:
            continue
        s, lo, hi = d.visits[0]
        if (d.tau - s) % p:
            continue
        side = "L" if hi <= dom.z + 1e-15 else "R"
        groups.setdefault((d.word[:s], side), []).append((i, (d.tau - s) // p))
    if not groups:
        raise NoChains("no domain passes near z before returning")
    crit_sides = tuple(int(fmap.side(dom.orbit.point(j))) for j in range(1, dom.k1))
    chains = []
    for (prefix, side), mem in sorted(groups.items(), key=lambda kv: (len(kv[0][0]), kv[0])):
        mem.sort(key=lambda t: t[1])
        s = len(prefix)
        principal = s == dom.k1 and prefix[1:] == crit_sides
        chains.append(Chain(side, s, tuple(m for m, _ in mem), tuple(k for _, k in mem),
                            principal, prefix))
    left, right = ladders(fmap, dom)
    lam = deriv(fmap, dom.z, p)
    return ChainStructure(dom.z, p, abs(lam), int(np.sign(lam)), tuple(chains), left, right)


# ----------------------------------------------------------------- induced hole
@dataclass(frozen=True)
class InducedHole:
    """Induced map refined at the hole preimages, with the members of ``H'``."""

    induced: InducedMap
    members: np.ndarray
    z: float
    eps_L: float
    eps_R: float

    @property
    def lebesgue(self) -> float:
        d = self.induced.domains
        return float(sum(d[i].length for i in self.members))

    def intervals(self) -> list[tuple[float, float]]:
        d = self.induced.domains
        return [(d[i].left, d[i].right) for i in self.members]

    def mask(self) -> np.ndarray:
        m = np.zeros(len(self.induced.domains), dtype=bool)
        m[self.members] = True
        return m


def induced_hole(induced: InducedMap, z: float, eps_L: float, eps_R: float) -> InducedHole:
    """Domains whose orbit meets ``(z - eps_L, z + eps_R)`` before returning.

    Domains straddling a hole boundary at some visit are cut at the
    preimage of that boundary, so each resulting piece is either wholly in
    the induced hole or wholly outside.  ``Domain.parent`` records the
    original index.
    """
    dom = induced.domain
    fmap = induced.fmap
    h0, h1 = z - eps_L, z + eps_R
    lo_core, hi_core = fmap.core
    if not dom.in_u0(max(h0, lo_core), min(h1, hi_core)):
        raise BadDomain(f"hole ({h0}, {h1}) leaves the neighbourhood {dom.u0} of z")
    new: list[Domain] = []
    members: list[int] = []
    for idx, d in enumerate(induced.domains):
        if not d.visits or all(hi <= h0 or lo >= h1 for _, lo, hi in d.visits):
            new.append(replace(d, parent=idx))
            continue
        s1, lo1, hi1 = d.visits[0]
        cuts = []
        for s, lo, hi in d.visits:
            for t in (h0, h1):
                if lo < t < hi:
                    y = pull_back(fmap, t, d.word[:s], start=s1)[0] if s > s1 else t
                    cuts.append(float(y))
        ys = np.unique(np.concatenate([[lo1], np.clip(cuts, lo1, hi1), [hi1]]))
        xs = pull_back(fmap, ys, d.word[:s1])[0]
        xs[np.argmin(xs)], xs[np.argmax(xs)] = d.left, d.right
        for k in range(len(ys) - 1):
            ya, yb = ys[k], ys[k + 1]
            if yb <= ya:
                continue
            ym = 0.5 * (ya + yb)
            inside = False
            vis = []
            for s, _, _ in d.visits:
                seg = push_forward(fmap, np.array([ya, ym, yb]), s - s1)
                inside |= h0 < seg[1] < h1
                vis.append((s, float(seg[[0, 2]].min()), float(seg[[0, 2]].max())))
            end = push_forward(fmap, np.array([ya, yb]), d.tau - s1)
            x0, x1 = sorted((float(xs[k]), float(xs[k + 1])))
            piece = Domain(x0, x1, d.tau, d.word, (float(end.min()), float(end.max())),
                           d.deriv_min, d.deriv_max, tuple(vis), idx)
            if inside:
                members.append(len(new))
            new.append(piece)
    order = np.argsort([q.left for q in new], kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    new_sorted = tuple(new[i] for i in order)
    mem = np.sort(rank[np.array(members, dtype=int)]) if members else np.array([], dtype=int)
    refined = InducedMap(fmap, dom, new_sorted, induced.tau_max, induced.uncovered)
    return InducedHole(refined, mem, z, eps_L, eps_R)


def principal_constant(fmap: UnimodalMap, orbit: CriticalOrbitData, k1: int) -> float:
    """``C_p = (A |Df^{k1-1}(f(c))|)^{-1/ell}``."""
    d = abs(deriv(fmap, orbit.point(1), k1 - 1)) if k1 > 1 else 1.0
    return (fmap.A * d) ** (-1.0 / fmap.ell)
