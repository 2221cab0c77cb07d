"""Bowen metrics, Birkhoff sums, cylinder enumeration, and partition sums.

Separated sets are built greedily from the depth-n inverse-branch cylinder
representatives: for an expanding map the n-cylinders are exactly the
resolution at which the n-th Bowen metric distinguishes points, so the
candidate pool is the anchor point pulled back through every depth-n branch
chain.  The greedy value is a lower bound for the separated-set supremum and
the greedy set is simultaneously a spanning set of the pool.
"""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import CoverError, NodeCapError, ValidationError
from .maps import circle_dist

DEFAULT_NODE_CAP = 1 << 18
DEFAULT_ANCHOR = 0.5


@dataclass(frozen=True)
class OrbitSegment:
    """The orbit segment (x, n): a start point plus a length."""

    start: float
    length: int

    def __post_init__(self):
        if self.length < 1:
            raise ValidationError("length", "orbit segments need length >= 1")


def birkhoff_sum(system, phi, seg):
    """Sum of phi along the first `seg.length` iterates of `seg.start`."""
    orbit = system.orbit(seg.start, seg.length)[0]
    return float(np.sum(phi(orbit)))


def birkhoff_sums(phi, orbit_matrix):
    """Birkhoff sums for many segments given as orbit rows."""
    return phi(orbit_matrix).sum(axis=1)


def bowen_distance(system, x, y, n):
    """max over 0 <= k < n of d(g^k x, g^k y)."""
    if n < 1:
        raise ValidationError("n", "Bowen metric needs n >= 1")
    ox = system.orbit(x, n)[0]
    oy = system.orbit(y, n)[0]
    return float(np.max(circle_dist(ox, oy)))


class FullCollection:
    """The collection of all orbit segments."""

    name = "full"

    def member_mask(self, system, points, n):
        return np.ones(np.asarray(points).shape[0], dtype=bool)

    def contains(self, system, x, n):
        return True

    refine_depth = 0


class CylinderTree:
    """Anchor pullbacks through every inverse-branch chain up to depth n.

    Level k holds one representative per depth-k cylinder, indexed by the
    branch address read most-significant-first in base `degree`.  Forward
    orbits of representatives are exact level lookups: dropping the leading
    address digit is one application of the map.
    """

    def __init__(self, system, depth, anchor=DEFAULT_ANCHOR, node_cap=DEFAULT_NODE_CAP):
        if system.degree ** depth > node_cap:
            raise NodeCapError(
                f"degree^{depth} = {system.degree ** depth} exceeds node cap {node_cap}")
        self.system = system
        self.depth = depth
        self.anchor = float(anchor)
        levels = [np.array([self.anchor])]
        for _ in range(depth):
            prev = levels[-1]
            nxt = np.concatenate([system.branch_solve(b, prev)
                                  for b in range(system.degree)])
            levels.append(nxt)
        self.levels = levels
        self._log_sigma_levels = {}

    def _log_sigma_level(self, k):
        if k not in self._log_sigma_levels:
            pts = self.levels[k]
            out = np.empty(pts.size)
            for lo in range(0, pts.size, 1 << 15):
                hi = min(pts.size, lo + (1 << 15))
                out[lo:hi] = self.system.branch_lipschitz(pts[lo:hi])
            self._log_sigma_levels[k] = np.log(out)
        return self._log_sigma_levels[k]

    def representatives(self, n=None):
        n = self.depth if n is None else n
        return self.levels[n]

    def orbit_matrix(self, n=None, depth=None):
        """Orbits of the depth-`depth` representatives over n time steps.

        Dropping the leading address digit is one application of the map, so
        columns are exact level lookups (no forward float iteration).
        """
        depth = self.depth if depth is None else depth
        n = depth if n is None else n
        if n > depth:
            raise ValidationError("n", "orbit length exceeds tree depth")
        reps = self.levels[depth]
        out = np.empty((reps.size, n))
        addr = np.arange(reps.size)
        for k in range(n):
            suffix = addr % (self.system.degree ** (depth - k))
            out[:, k] = self.levels[depth - k][suffix]
        return out

    def log_sigma_matrix(self, n, depth=None):
        """log of the inverse-branch Lipschitz field along representative
        orbits, cached per level."""
        depth = self.depth if depth is None else depth
        size = self.levels[depth].size
        out = np.empty((size, n))
        addr = np.arange(size)
        for k in range(n):
            suffix = addr % (self.system.degree ** (depth - k))
            out[:, k] = self._log_sigma_level(depth - k)[suffix]
        return out


def _candidate_pool(system, coll, n, eps, phi, candidates, anchor, node_cap,
                    tree=None):
    if candidates is None:
        # membership-filtered collections may refine the enumerator with
        # deeper-tree representatives (finer resolution, same cylinders)
        refine = getattr(coll, "refine_depth", 0)
        depth = n + refine
        while system.degree ** depth > node_cap and depth > n:
            depth -= 1
        if tree is None or tree.depth < depth:
            tree = CylinderTree(system, depth, anchor=anchor, node_cap=node_cap)
        points = tree.representatives(depth)
        orbits = tree.orbit_matrix(n, depth=depth)
        if hasattr(coll, "mask_from_log_sigma"):
            mask = coll.mask_from_log_sigma(tree.log_sigma_matrix(n, depth=depth))
        else:
            mask = coll.member_mask(system, points, n)
    else:
        points = np.asarray(candidates, dtype=float) % 1.0
        orbits = system.orbit(points, n)
        mask = coll.member_mask(system, points, n)
    mask = np.asarray(mask, dtype=bool)
    points, orbits = points[mask], orbits[mask]
    weights = (np.zeros(points.size) if phi is None
               else np.asarray(phi(orbits)).sum(axis=1))
    # descending weight, then candidate (address) order
    order = np.lexsort((np.arange(points.size), -weights))
    return points, orbits, weights, order


def separated_set(system, coll, n, eps, phi=None, candidates=None,
                  anchor=DEFAULT_ANCHOR, node_cap=DEFAULT_NODE_CAP, tree=None):
    """Greedy maximal (n, eps)-separated subset of the collection's pool.

    Returns the selected points in selection order.  The pool is the depth-n
    cylinder representatives unless explicit `candidates` are supplied;
    either way it is filtered through the collection's membership test and
    ordered by descending Birkhoff weight (ties by address).
    """
    if eps <= 0:
        raise ValidationError("eps", "must be positive")
    points, orbits, _, order = _candidate_pool(
        system, coll, n, eps, phi, candidates, anchor, node_cap, tree=tree)
    if points.size == 0:
        return np.empty(0)
    keep = kernels.greedy_separated(orbits, order, eps)
    return points[order][keep[order]]


def _log_sum_exp(values):
    if values.size == 0:
        return -np.inf
    m = float(np.max(values))
    return m + float(np.log(np.sum(np.exp(values - m))))


def partition_sum_sep(system, phi, coll, n, eps, candidates=None,
                      anchor=DEFAULT_ANCHOR, node_cap=DEFAULT_NODE_CAP,
                      log=False, tree=None):
    """Greedy estimate of the separated-set partition sum.

    Sum of exp(S_n phi) over the greedy maximal (n, eps)-separated subset;
    a lower bound for the supremum over all separated subsets of the pool.
    With ``log=True`` the stable log-sum is returned (-inf for empty pools).
    """
    if eps <= 0:
        raise ValidationError("eps", "must be positive")
    points, orbits, weights, order = _candidate_pool(
        system, coll, n, eps, phi, candidates, anchor, node_cap, tree=tree)
    if points.size == 0:
        return -np.inf if log else 0.0
    keep = kernels.greedy_separated(orbits, order, eps)
    log_sum = _log_sum_exp(weights[keep])
    return log_sum if log else float(np.exp(log_sum))


def greedy_cover(orbits, eps, masses, tie_weights, target_mass):
    """Greedy max-coverage cover by closed Bowen balls of radius eps.

    Repeatedly selects the candidate whose ball covers the most uncovered
    mass (ties: smaller tie weight, then smaller index) until the covered
    mass reaches `target_mass`.  Returns selected indices in pick order.
    """
    n_cand = orbits.shape[0]
    if n_cand == 0:
        raise CoverError("empty candidate pool")
    cover = kernels.pairwise_bowen(orbits) <= eps
    uncovered = np.ones(n_cand, dtype=bool)
    total = 0.0
    chosen = []
    target = target_mass - 1e-12
    while total < target:
        gains = cover[:, uncovered] @ masses[uncovered]
        best = float(np.max(gains))
        if best <= 0.0:
            raise CoverError(
                f"cover stalled at mass {total:.6g} < target {target_mass:.6g}")
        tied = np.flatnonzero(gains >= best)
        i = int(tied[np.lexsort((tied, tie_weights[tied]))[0]])
        chosen.append(i)
        total += float(masses[uncovered & cover[i]].sum())
        uncovered &= ~cover[i]
    return np.asarray(chosen, dtype=int)


def partition_sum_span(system, phi, coll, n, eps, candidates=None,
                       anchor=DEFAULT_ANCHOR, node_cap=DEFAULT_NODE_CAP,
                       log=False, tree=None):
    """Greedy estimate of the spanning partition sum.

    Two spanning sets of the pool are constructed -- the max-coverage greedy
    cover and the greedy maximal separated set (maximality makes it
    spanning) -- and the smaller weighted sum is reported.  This keeps the
    estimate an upper bound for the spanning infimum restricted to
    constructed covers and guarantees span <= sep on identical inputs.
    """
    if eps <= 0:
        raise ValidationError("eps", "must be positive")
    points, orbits, weights, order = _candidate_pool(
        system, coll, n, eps, phi, candidates, anchor, node_cap, tree=tree)
    if points.size == 0:
        return -np.inf if log else 0.0
    if points.size ** 2 > node_cap * 64:
        raise NodeCapError("pool too large for pairwise cover matrix")
    chosen = greedy_cover(orbits, eps, np.ones(points.size), weights, float(points.size))
    keep = kernels.greedy_separated(orbits, order, eps)
    log_sum = min(_log_sum_exp(weights[chosen]), _log_sum_exp(weights[keep]))
    return log_sum if log else float(np.exp(log_sum))
