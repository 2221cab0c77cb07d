"""Hyperbolic-time classification of orbit segments.

A segment (x, n) is *good* at threshold sigma when every trailing window
average of log sigma(.) along its orbit beats log sigma, which forces
uniform backward contraction along the inverse-branch chain from g^n(x) to
x.  It is *bad* when already the full-window average fails.  Every segment
splits into a good prefix followed by a bad suffix; the split index is the
first time whose suffix is bad.
"""

import enum
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ValidationError
from .maps import circle_dist


@dataclass(frozen=True)
class DecompositionConfig:
    """Hyperbolicity threshold sigma in (0, 1)."""

    sigma: float

    def __post_init__(self):
        if not 0.0 < self.sigma < 1.0:
            raise ValidationError("sigma", "must lie in (0, 1)")

    @property
    def log_sigma(self):
        return float(np.log(self.sigma))


class Classification(enum.Enum):
    GOOD = "good"
    BAD = "bad"
    NEITHER = "neither"


@dataclass(frozen=True)
class Decomposition:
    """Lengths of the (prefix, good, bad) split; the prefix is trivial here."""

    g_len: int
    s_len: int
    p_len: int = 0

    @property
    def total(self):
        return self.p_len + self.g_len + self.s_len


@dataclass(frozen=True)
class ObstructionSample:
    """Finite-horizon proxy for membership in the expansivity-obstruction set.

    For each point, `entries` holds the smallest K <= horizon such that every
    Birkhoff average of log sigma with length in [K, horizon] is >= log
    sigma, or None when no such K exists below the horizon.  This is a proxy:
    true membership is an all-lengths condition undecidable from finite data.
    """

    horizon: int
    entries: Tuple[Tuple[float, Optional[int]], ...]

    def hits(self):
        return [(x, k) for x, k in self.entries if k is not None]


# ---------------------------------------------------------------------------
# window machinery
# ---------------------------------------------------------------------------

def segment_log_sigma(system, x, n):
    """log sigma(g^i x) for i = 0..n-1; rows over x when x is an array."""
    orbit = system.orbit(x, n)
    return np.log(system.branch_lipschitz(orbit.reshape(-1))).reshape(orbit.shape)


def suffix_means(logs):
    """Trailing-window means: out[j] = mean(logs[j:]), along the last axis."""
    logs = np.asarray(logs, dtype=float)
    n = logs.shape[-1]
    tail_sums = np.cumsum(logs[..., ::-1], axis=-1)[..., ::-1]
    return tail_sums / np.arange(n, 0, -1)


def in_sigma_window(system, cfg, x, j, n):
    """True iff the trailing average over [j, n) beats log sigma."""
    if not 0 <= j <= n - 1:
        raise ValidationError("j", "window index must satisfy 0 <= j <= n-1")
    logs = segment_log_sigma(system, x, n)[0]
    return bool(np.mean(logs[j:]) < cfg.log_sigma)


def classify_logs(logs, log_sigma):
    means = suffix_means(logs)
    if np.all(means < log_sigma):
        return Classification.GOOD
    if means[0] >= log_sigma:
        return Classification.BAD
    return Classification.NEITHER


def classify_segment(system, cfg, seg):
    """Good / bad / neither status of one segment (mutually exclusive)."""
    logs = segment_log_sigma(system, seg.start, seg.length)[0]
    return classify_logs(logs, cfg.log_sigma)


def split_index(logs, log_sigma):
    """Smallest m whose suffix is bad; len(logs) when no suffix is bad."""
    means = suffix_means(logs)
    bad = np.flatnonzero(means >= log_sigma)
    return int(bad[0]) if bad.size else len(logs)


def decompose(system, cfg, seg):
    """Split (x, n) into a good prefix and bad suffix at the first bad-suffix
    index; either part may be empty."""
    logs = segment_log_sigma(system, seg.start, seg.length)[0]
    m = split_index(logs, cfg.log_sigma)
    return Decomposition(g_len=m, s_len=seg.length - m)


def good_mask(logs, log_sigma):
    """Row mask: which orbit rows are good segments."""
    return np.all(suffix_means(logs) < log_sigma, axis=-1)


def bad_mask(logs, log_sigma):
    """Row mask: which orbit rows are bad segments."""
    return suffix_means(logs)[..., 0] >= log_sigma


class GoodCollection:
    """Segments whose every trailing window beats the threshold."""

    refine_depth = 0

    def __init__(self, cfg):
        self.cfg = cfg
        self.name = f"good({cfg.sigma:g})"

    def member_mask(self, system, points, n):
        logs = segment_log_sigma(system, np.asarray(points), n)
        return good_mask(logs, self.cfg.log_sigma)

    def mask_from_log_sigma(self, logs):
        return good_mask(logs, self.cfg.log_sigma)

    def contains(self, system, x, n):
        return bool(self.member_mask(system, np.atleast_1d(x), n)[0])


class BadCollection:
    """Segments whose full-window average fails the threshold.

    The enumerator is refined with deeper-tree cylinder representatives:
    near neutral behavior the depth-n representative of a cylinder can
    escape faster than the cylinder's slowest points, so one representative
    per n-cylinder undercounts the bad set."""

    refine_depth = 4

    def __init__(self, cfg):
        self.cfg = cfg
        self.name = f"bad({cfg.sigma:g})"

    def member_mask(self, system, points, n):
        logs = segment_log_sigma(system, np.asarray(points), n)
        return bad_mask(logs, self.cfg.log_sigma)

    def mask_from_log_sigma(self, logs):
        return bad_mask(logs, self.cfg.log_sigma)

    def contains(self, system, x, n):
        return bool(self.member_mask(system, np.atleast_1d(x), n)[0])


def obstruction_sample(system, cfg, points, k_max):
    """Scan Birkhoff averages of log sigma up to the horizon for each point."""
    if k_max < 1:
        raise ValidationError("k_max", "horizon must be >= 1")
    points = np.atleast_1d(np.asarray(points, dtype=float))
    logs = segment_log_sigma(system, points, k_max)
    means = np.cumsum(logs, axis=1) / np.arange(1, k_max + 1)
    below = means < cfg.log_sigma
    entries = []
    for i, x in enumerate(points):
        fail = np.flatnonzero(below[i])
        if fail.size == 0:
            entries.append((float(x), 1))
        elif fail[-1] == k_max - 1:
            entries.append((float(x), None))
        else:
            entries.append((float(x), int(fail[-1]) + 2))
    return ObstructionSample(horizon=k_max, entries=tuple(entries))


# ---------------------------------------------------------------------------
# backward contraction along good segments
# ---------------------------------------------------------------------------

def pullback_chain(system, x, n, endpoint):
    """Pull `endpoint` (near g^n x) back along the inverse-branch chain
    through the orbit of x; returns z_0..z_n with g(z_k) = z_{k+1}."""
    orbit = system.orbit(x, n + 1)[0]
    chain = np.empty(n + 1)
    chain[n] = endpoint % 1.0
    for k in range(n - 1, -1, -1):
        chain[k] = system.pullback(orbit[k], chain[k + 1])
    return chain


def contraction_profile(system, x, n, endpoint):
    """Distances d(g^k x, z_k) of the pullback chain to the reference orbit."""
    orbit = system.orbit(x, n + 1)[0]
    chain = pullback_chain(system, x, n, endpoint)
    return circle_dist(orbit, chain)
