"""Circle state space, expanding map systems, and potentials.

Every built-in system is a degree-D monotone covering map of the circle
[0, 1), described through its lift G: [0, 1] -> [0, D].  All inverse-branch
machinery (branch solves, local inverses through a point, arc images) runs
on the lift, which makes arc arithmetic exact and keeps every pullback a
single monotone root solve.
"""

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MixingCapError, ValidationError

TWO_PI = 2.0 * math.pi
CIRCLE_DIAMETER = 0.5


def wrap(x):
    """Reduce to the fundamental domain [0, 1)."""
    return np.asarray(x, dtype=float) % 1.0


def circle_dist(x, y):
    """Wraparound metric d(x, y) = min(|x - y|, 1 - |x - y|)."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float)) % 1.0
    return np.minimum(d, 1.0 - d)


def circle_signed(origin, target):
    """Signed circular offset from origin to target, in [-1/2, 1/2)."""
    return (np.asarray(target, dtype=float) - np.asarray(origin, dtype=float) + 0.5) % 1.0 - 0.5


@dataclass(frozen=True)
class StateSpace:
    kind: str = "circle"
    diameter: float = CIRCLE_DIAMETER

    def distance(self, x, y):
        return circle_dist(x, y)


class MapSystem:
    """A topologically exact degree-D monotone circle cover.

    Parameters
    ----------
    name : str
        Identifier used in reports.
    lift : callable
        Strictly increasing lift G on [0, 1] with G(0) = 0, G(1) = degree.
    lift_deriv : callable
        Derivative of the lift, bounded and positive.
    degree : int
        Number of inverse branches.
    epsilon0 : float
        Uniform radius at which local inverses are used.
    exact_branch_solve : callable, optional
        Closed-form (branch, y) -> preimage, bypassing the root solver.
    """

    def __init__(self, name, lift, lift_deriv, degree, epsilon0,
                 exact_branch_solve=None, sigma_grid=8193):
        if degree < 2:
            raise ValidationError("degree", "need at least two branches")
        if not 0.0 < epsilon0 <= 0.25:
            raise ValidationError("epsilon0", "must lie in (0, 1/4]")
        self.name = name
        self.degree = int(degree)
        self.epsilon0 = float(epsilon0)
        self.space = StateSpace()
        self._lift = lift
        self._deriv = lift_deriv
        self._exact_solve = exact_branch_solve
        self.branch_cuts = self._solve_cuts()
        grid = np.linspace(0.0, 1.0, sigma_grid, endpoint=False)
        self._sigma_sup = float(np.max(1.0 / self._deriv(grid)))

    # -- basic evaluation ---------------------------------------------------

    def lift(self, x):
        return self._lift(np.asarray(x, dtype=float))

    def deriv(self, x):
        return self._deriv(np.asarray(x, dtype=float))

    def forward(self, x):
        """g(x), reduced into [0, 1)."""
        return self._lift(np.asarray(x, dtype=float) % 1.0) % 1.0

    def lift_real(self, x):
        """The lift extended to all reals: F(x + 1) = F(x) + degree."""
        x = np.asarray(x, dtype=float)
        k = np.floor(x)
        return self._lift(x - k) + self.degree * k

    def orbit(self, x, n):
        """Forward orbit [x, g(x), ..., g^(n-1)(x)] as rows over x."""
        x = np.atleast_1d(np.asarray(x, dtype=float)) % 1.0
        out = np.empty(x.shape + (n,))
        cur = x
        for k in range(n):
            out[..., k] = cur
            cur = self.forward(cur)
        return out

    # -- inverse branches ---------------------------------------------------

    def _solve_cuts(self):
        cuts = [0.0]
        for b in range(1, self.degree):
            lo, hi = 0.0, 1.0
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if self._lift(np.float64(mid)) < b:
                    lo = mid
                else:
                    hi = mid
            cuts.append(0.5 * (lo + hi))
        cuts.append(1.0)
        return np.asarray(cuts)

    def branch_solve(self, branch, y):
        """Preimage of y under branch `branch`: x in branch domain, G(x) = branch + y."""
        y = np.asarray(y, dtype=float)
        if self._exact_solve is not None:
            return self._exact_solve(branch, y)
        target = y + branch
        lo = np.full_like(y, self.branch_cuts[branch])
        hi = np.full_like(y, self.branch_cuts[branch + 1])
        for _ in range(44):
            mid = 0.5 * (lo + hi)
            below = self._lift(mid) < target
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x = 0.5 * (lo + hi)
        for _ in range(3):  # Newton polish, clipped into the bracket
            x = x - (self._lift(x) - target) / self._deriv(x)
            x = np.clip(x, lo, hi)
        return x

    def inverse_branches(self, y):
        """All degree preimages of y, indexed by branch id."""
        y = np.asarray(y, dtype=float) % 1.0
        return np.stack([self.branch_solve(b, y) for b in range(self.degree)])

    def lift_inverse(self, v):
        """F^{-1}(v) for real v; monotone, used for exact arc pullbacks."""
        v = np.asarray(v, dtype=float)
        k = np.floor(v / self.degree)
        w = v - self.degree * k
        w = np.clip(w, 0.0, np.nextafter(float(self.degree), 0.0))
        b = np.minimum(np.floor(w).astype(int), self.degree - 1)
        out = np.empty_like(v)
        for branch in range(self.degree):
            m = b == branch
            if np.any(m):
                out[m] = self.branch_solve(branch, w[m] - branch)
        return out + k

    def pullback(self, x, y):
        """Local inverse through x, evaluated at y near g(x).

        Returns the unique preimage z of y on the same monotone piece as x,
        i.e. the continuation of x under the inverse branch defined on the
        ball around g(x).
        """
        x = np.asarray(x, dtype=float)
        delta = circle_signed(self.forward(x), y)
        return self.lift_inverse(self._lift(x % 1.0) + delta) % 1.0

    # -- derived fields -----------------------------------------------------

    @property
    def sigma_sup(self):
        """Global supremum of the inverse-derivative field."""
        return self._sigma_sup

    def branch_lipschitz(self, x, n_samples=33):
        """Upper bound sigma(x) for the Lipschitz constant of the inverse
        branch through x on the ball of radius epsilon0 about g(x).

        Computed as the sampled supremum of 1/g' over the pulled-back ball
        (including x itself), inflated by 1.01 and clamped at the global
        supremum of 1/g'.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float)) % 1.0
        v = self._lift(x)
        zlo = self.lift_inverse(v - self.epsilon0)
        zhi = self.lift_inverse(v + self.epsilon0)
        t = np.linspace(0.0, 1.0, n_samples)
        samples = zlo[..., None] + (zhi - zlo)[..., None] * t
        inv = 1.0 / self._deriv(samples % 1.0)
        raw = np.maximum(inv.max(axis=-1), 1.0 / self._deriv(x))
        # derivative kinks (wrap point and branch cuts) can carry the sup as
        # a cusp that grid samples miss; evaluate both sides of each kink
        # falling inside the pulled-back interval
        for cut in self.branch_cuts[:-1]:
            shift = np.ceil(zlo - cut)
            inside = cut + shift <= zhi
            if np.any(inside):
                side = max(float(1.0 / self._deriv(np.float64(cut))),
                           float(1.0 / self._deriv(np.float64((cut - 1e-12) % 1.0))))
                raw = np.where(inside, np.maximum(raw, side), raw)
        out = np.minimum(1.01 * raw, self._sigma_sup)
        return out if out.size > 1 else float(out[0])

    def mixing_time(self, eps, grid=256, cap=512):
        """Smallest N with g^N(B_eps(y)) = X for every y on a verification grid.

        Arc images are exact on the lift: an arc covers once its lift length
        reaches 1.  Raises MixingCapError if the cap is hit (non-exact map
        or eps too small for the cap).
        """
        if not 0.0 < eps <= self.epsilon0:
            raise ValidationError("eps", f"must lie in (0, epsilon0={self.epsilon0}]")
        ys = np.linspace(0.0, 1.0, grid, endpoint=False)
        lo = ys - eps
        hi = ys + eps
        times = np.zeros(grid, dtype=int)
        open_mask = (hi - lo) < 1.0
        for t in range(1, cap + 1):
            if not np.any(open_mask):
                break
            lo[open_mask] = self.lift_real(lo[open_mask])
            hi[open_mask] = self.lift_real(hi[open_mask])
            closed = open_mask & ((hi - lo) >= 1.0)
            times[closed] = t
            open_mask &= ~closed
        if np.any(open_mask):
            raise MixingCapError(
                f"{self.name}: no covering time <= {cap} at eps={eps}")
        return int(times.max())

    def __repr__(self):
        return f"MapSystem({self.name!r}, degree={self.degree}, eps0={self.epsilon0})"


# ---------------------------------------------------------------------------
# built-in systems
# ---------------------------------------------------------------------------

def _doubling_solve(branch, y):
    return (np.asarray(y, dtype=float) + branch) / 2.0


def doubling():
    """The doubling map g(x) = 2x mod 1."""
    return MapSystem(
        "doubling",
        lift=lambda x: 2.0 * x,
        lift_deriv=lambda x: np.full_like(np.asarray(x, dtype=float), 2.0),
        degree=2,
        epsilon0=0.25,
        exact_branch_solve=_doubling_solve,
    )


def manneville_pomeau(alpha=0.5, epsilon0=0.125):
    """Intermittent map g(x) = x + x^(1+alpha) mod 1, neutral fixed point at 0."""
    if not 0.0 < alpha < 1.0:
        raise ValidationError("alpha", "must lie in (0, 1)")
    a = float(alpha)
    sys = MapSystem(
        f"manneville_pomeau({a:g})",
        lift=lambda x: x + np.power(np.abs(x), 1.0 + a),
        lift_deriv=lambda x: 1.0 + (1.0 + a) * np.power(np.abs(x), a),
        degree=2,
        epsilon0=epsilon0,
    )
    sys.alpha = a
    return sys


def perturbed_doubling(delta=0.75):
    """Smooth perturbation g(x) = 2x + (delta / 2 pi) sin(2 pi x) mod 1."""
    if not 0.0 <= delta < 1.0:
        raise ValidationError("delta", "must lie in [0, 1) to keep g' > 1")
    d = float(delta)
    return MapSystem(
        f"perturbed_doubling({d:g})",
        lift=lambda x: 2.0 * x + (d / TWO_PI) * np.sin(TWO_PI * x),
        lift_deriv=lambda x: 2.0 + d * np.cos(TWO_PI * x),
        degree=2,
        epsilon0=0.25,
    )


def tabulated_map(values, epsilon0=0.125):
    """Map given by monotone lift samples on a uniform grid over [0, 1].

    `values` must start at 0, end at an integer degree >= 2, and increase
    strictly; evaluation is by linear interpolation.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 9:
        raise ValidationError("values", "need a 1-d table with >= 9 samples")
    if abs(v[0]) > 1e-12 or np.any(np.diff(v) <= 0):
        raise ValidationError("values", "lift table must start at 0 and increase strictly")
    degree = int(round(v[-1]))
    if degree < 2 or abs(v[-1] - degree) > 1e-9:
        raise ValidationError("values", "lift table must end at an integer degree >= 2")
    grid = np.linspace(0.0, 1.0, v.size)
    slopes = np.diff(v) / np.diff(grid)

    def lift(x):
        return np.interp(np.asarray(x, dtype=float), grid, v)

    def deriv(x):
        idx = np.clip(np.searchsorted(grid, np.asarray(x, dtype=float), side="right") - 1,
                      0, slopes.size - 1)
        return slopes[idx]

    return MapSystem("tabulated", lift=lift, lift_deriv=deriv,
                     degree=degree, epsilon0=epsilon0)


BUILTIN_MAPS = {
    "doubling": doubling,
    "manneville_pomeau": manneville_pomeau,
    "perturbed_doubling": perturbed_doubling,
}


# ---------------------------------------------------------------------------
# potentials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Potential:
    """A real potential on the circle with declared Hoelder data.

    `wrap_jump` records the discontinuity size across the point 0; when it
    is positive the Hoelder data is only claimed for pairs that do not
    straddle the wrap point (piecewise-Hoelder potentials such as the
    geometric potential of a map with a derivative kink).
    """

    fn: Callable
    holder_constant: float
    holder_exponent: float
    name: str = "potential"
    wrap_jump: float = 0.0

    def __call__(self, x):
        return self.fn(np.asarray(x, dtype=float))


def zero_potential():
    return Potential(lambda x: np.zeros_like(np.asarray(x, dtype=float)),
                     0.0, 1.0, name="zero")


def constant_potential(c):
    c = float(c)
    return Potential(lambda x: np.full_like(np.asarray(x, dtype=float), c),
                     0.0, 1.0, name=f"constant({c:g})")


def geometric_potential(system, t=1.0):
    """phi(x) = -t log g'(x), the geometric family of the system.

    Hoelder data is estimated on a fine grid at the natural exponent of the
    map (alpha for intermittent maps, 1 otherwise); a derivative mismatch
    across the wrap point is recorded in `wrap_jump` instead of being folded
    into an unbounded constant.
    """
    t = float(t)

    def fn(x):
        return -t * np.log(system.deriv(np.asarray(x, dtype=float) % 1.0))

    alpha = getattr(system, "alpha", 1.0)
    xs = np.linspace(0.0, 1.0, 4097, endpoint=False)
    vals = fn(xs)
    # max difference quotient over several pair separations, non-wrapping
    c_est = 0.0
    for stride in (1, 4, 16, 64):
        dv = np.abs(vals[stride:] - vals[:-stride])
        dx = xs[stride:] - xs[:-stride]
        c_est = max(c_est, float(np.max(dv / dx**alpha)))
    jump = float(abs(fn(np.float64(0.0)) - fn(np.float64(1.0 - 1e-12))))
    if jump < 1e-9:
        jump = 0.0
    return Potential(fn, 1.05 * c_est, alpha,
                     name=f"geometric({t:g})", wrap_jump=jump)


def tabulated_potential(xs, values, holder_constant, holder_exponent):
    """Potential from samples on the circle, linearly interpolated."""
    xs = np.asarray(xs, dtype=float)
    values = np.asarray(values, dtype=float)
    if xs.shape != values.shape or xs.ndim != 1:
        raise ValidationError("values", "sample and value arrays must match")
    order = np.argsort(xs)
    xs, values = xs[order], values[order]
    # close the circle for interpolation
    xp = np.concatenate([xs, [xs[0] + 1.0]])
    vp = np.concatenate([values, [values[0]]])

    def fn(x):
        return np.interp(np.asarray(x, dtype=float) % 1.0, xp, vp)

    return Potential(fn, float(holder_constant), float(holder_exponent),
                     name="tabulated")
