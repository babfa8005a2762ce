"""Backward-orbit Julia sampling, linearization at a repelling fixed point,
and real-interval invariance tests.

The sampling side is elementary: pull a point backward through randomly (or
cyclically) chosen inverse branches from a repelling fixed point; after a
burn-in the samples distribute over the Julia set.  The linearization side
provides the two mutually inverse coordinates at a repelling fixed point p
with multiplier lambda:

* `poincare_eval` computes F(z) = lim f^n(p + z lambda^{-n}), the entire
  linearizer with F(0) = p, F'(0) = 1, F(lambda z) = f(F(z));
* `koenigs_coordinate` computes phi = lim lambda^n (g^n(z) - p) along the
  inverse branch g fixing p, so that F(phi(z)) = z near p.

Forward iteration multiplies errors by |lambda|^n, which at the default
depth 40 eats ~12 digits, so poincare_eval runs in mpmath at a working
precision chosen from the depth; the backward direction contracts and stays
in doubles.

The Julia set of a degree >= 2 real polynomial lies in a real interval [a, b]
exactly when the interval is invariant in the strong sense checked by
`interval_criterion`; `chebyshev_conjugacy_check` detects the rigid cases
conjugate to +-(Chebyshev) on [-2, 2].
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import mpmath as mp
import numpy as np

from .algebra import (
    INF,
    CircumError,
    Mobius,
    Polynomial,
    RationalMap,
    RootConvergenceError,
    chordal,
    is_inf,
)
from .rng import Xorshift
from .sphere import PointCloud

__all__ = [
    "NoRepellingFixedPointError",
    "JuliaSampleConfig",
    "KoenigsChart",
    "IntervalCriterionReport",
    "repelling_fixed_points",
    "repelling_fixed_point",
    "julia_sample",
    "koenigs_chart",
    "poincare_eval",
    "koenigs_coordinate",
    "line_invariance_check",
    "interval_criterion",
    "chebyshev_conjugacy_check",
    "blaschke_halfplane_check",
    "escape_render",
]


class NoRepellingFixedPointError(CircumError):
    """The map has no fixed point with |multiplier| > 1."""


def repelling_fixed_points(f: RationalMap) -> list[tuple[complex, complex]]:
    """All (point, multiplier) pairs with |multiplier| > 1 + 1e-9.

    Sorted with finite points before infinity, larger |multiplier| first,
    ties broken by (Re, Im) of the point.
    """
    reps = [(z, lam) for z, lam in f.fixed_points() if abs(lam) > 1.0 + 1e-9]
    reps.sort(
        key=lambda t: (
            is_inf(t[0]),
            -abs(t[1]),
            t[0].real if not is_inf(t[0]) else 0.0,
            t[0].imag if not is_inf(t[0]) else 0.0,
        )
    )
    return reps


def repelling_fixed_point(f: RationalMap) -> tuple[complex, complex]:
    """The preferred repelling fixed point (see repelling_fixed_points)."""
    reps = repelling_fixed_points(f)
    if not reps:
        raise NoRepellingFixedPointError("no fixed point has |multiplier| > 1")
    return reps[0]


@dataclass(frozen=True)
class JuliaSampleConfig:
    n_points: int = 5000
    burn_in: int = 100
    seed: int = 0
    branch_rule: str = "uniform-random"  # or "cycling"

    def __post_init__(self):
        if self.n_points < 1 or self.burn_in < 0:
            raise ValueError("need n_points >= 1 and burn_in >= 0")
        if self.branch_rule not in ("uniform-random", "cycling"):
            raise ValueError(f"unknown branch rule {self.branch_rule!r}")


def julia_sample(
    f: RationalMap,
    config: JuliaSampleConfig,
    stats: dict | None = None,
) -> PointCloud:
    """Backward-orbit sample of the Julia set of f (degree >= 2).

    Starts at the preferred repelling fixed point and repeatedly replaces the
    current point by one of its degree-many preimages; the branch is chosen
    by the seeded generator (or cyclically).  The first burn_in points are
    discarded.  Preimage lists are canonically sorted and the generator is
    fixed by the seed, so the output is bit-for-bit reproducible.

    A root-finding failure resets the orbit to the fixed point and retries;
    after 50 failures the last error propagates.  Pass a dict as `stats` to
    receive {"retries": ...}.
    """
    if f.degree < 2:
        raise ValueError("julia_sample needs degree >= 2")
    p, _lam = repelling_fixed_point(f)
    rng = Xorshift(config.seed)
    z = p
    points: list[complex] = []
    retries = 0
    step = 0
    total = config.burn_in + config.n_points
    while len(points) < config.n_points:
        try:
            pre = f.preimages(z)
        except RootConvergenceError:
            retries += 1
            if retries > 50:
                raise
            z = p
            continue
        if config.branch_rule == "uniform-random":
            k = rng.choice_index(len(pre))
        else:
            k = step % len(pre)
        z = pre[k]
        step += 1
        if step > config.burn_in:
            points.append(z)
        if step > 10 * total + 1000:
            raise CircumError("sampling failed to make progress")
    if stats is not None:
        stats["retries"] = retries
    return PointCloud(points)


@dataclass(frozen=True)
class KoenigsChart:
    """Linearization data at a finite repelling fixed point.

    `multiplier` is f'(p); validity_radius bounds the disk around p where the
    inverse-branch iteration of `koenigs_coordinate` is trusted; max_depth
    caps both iteration directions.
    """

    map: RationalMap
    p: complex
    multiplier: complex
    validity_radius: float
    max_depth: int = 40

    def __post_init__(self):
        if is_inf(self.p):
            raise ValueError("chart point must be finite")
        if abs(self.map(self.p) - self.p) >= 1e-9:
            raise ValueError("p is not fixed to within 1e-9")
        lam = self.map.derivative()(self.p)
        if abs(lam - self.multiplier) >= 1e-8:
            raise ValueError("stored multiplier disagrees with f'(p)")
        if abs(self.multiplier) <= 1.0 + 1e-9:
            raise ValueError("fixed point is not repelling")
        if not (self.validity_radius > 0.0) or self.max_depth < 1:
            raise ValueError("need validity_radius > 0 and max_depth >= 1")


def koenigs_chart(
    f: RationalMap,
    p: complex | None = None,
    max_depth: int = 40,
    validity_radius: float | None = None,
) -> KoenigsChart:
    """Build a KoenigsChart at p (default: the preferred repelling point).

    The default validity radius is 0.1 times the distance from p to the
    nearest other finite fixed or critical point (1.0 if there is none).
    """
    if f.degree < 2:
        raise ValueError("koenigs_chart needs degree >= 2")
    if p is None:
        p, lam = repelling_fixed_point(f)
    else:
        p = complex(p)
        lam = complex(f.derivative()(p))
    if validity_radius is None:
        others = [z for z, _ in f.fixed_points() if not is_inf(z)]
        others += [z for z in f.critical_points() if not is_inf(z)]
        dists = [abs(z - p) for z in others if abs(z - p) > 1e-9]
        validity_radius = 0.1 * min(dists) if dists else 1.0
    return KoenigsChart(
        map=f, p=p, multiplier=lam, validity_radius=float(validity_radius),
        max_depth=int(max_depth),
    )


def _map_mp(f: RationalMap, z: mp.mpc):
    """One application of f in mpmath arithmetic (None encodes infinity)."""
    if z is None:
        w = f.at_infinity()
        return None if is_inf(w) else mp.mpc(w)
    nv = mp.mpc(0)
    for c in f.num.coeffs[::-1]:
        nv = nv * z + mp.mpc(complex(c))
    dv = mp.mpc(0)
    for c in f.den.coeffs[::-1]:
        dv = dv * z + mp.mpc(complex(c))
    if dv == 0:
        return None
    return nv / dv


def _poincare_fixed_depth(chart: KoenigsChart, z: complex, n: int):
    if n == 0:
        return complex(chart.p) + complex(z)
    lam = mp.mpc(complex(chart.multiplier))
    w = mp.mpc(complex(chart.p)) + mp.mpc(complex(z)) * lam ** (-n)
    for _ in range(n):
        w = _map_mp(chart.map, w)
        if w is None:
            return INF
    return complex(w)


def poincare_eval(
    chart: KoenigsChart, z: complex, depth: int | None = None
) -> tuple[complex, float]:
    """F_n(z) = f^n(p + z lambda^{-n}) and the chordal gap to depth n - 1.

    With depth=None the depth is raised adaptively until the gap drops below
    1e-12 or max_depth is reached.  The iteration runs in mpmath with working
    precision ~ 25 + max_depth * log10|lambda| digits, because the forward
    pass amplifies the seed error by |lambda|^n.

    The deepest evaluation must start inside the chart:
    |z| |lambda|^{-n} < validity_radius is required (depth=0 is exempt and
    returns p + z exactly).
    """
    z = complex(z)
    n_max = chart.max_depth if depth is None else int(depth)
    if depth is not None and depth == 0:
        return complex(chart.p) + z, 0.0
    if n_max < 1:
        raise ValueError("depth must be >= 0")
    if abs(z) * abs(chart.multiplier) ** (-n_max) >= chart.validity_radius:
        raise ValueError("z does not reach the chart disk at the requested depth")
    dps = 25 + int(np.ceil(n_max * np.log10(abs(chart.multiplier)))) + int(
        np.ceil(np.log10(1.0 + abs(z)))
    )
    with mp.workdps(dps):
        if depth is not None:
            val = _poincare_fixed_depth(chart, z, n_max)
            prev = _poincare_fixed_depth(chart, z, n_max - 1)
            return val, chordal(val, prev)
        prev = _poincare_fixed_depth(chart, z, 1)
        gap = float("inf")
        val = prev
        for n in range(2, n_max + 1):
            val = _poincare_fixed_depth(chart, z, n)
            gap = chordal(val, prev)
            if gap < 1e-12:
                return val, gap
            prev = val
        return val, gap


def koenigs_coordinate(chart: KoenigsChart, z: complex) -> complex:
    """phi(z) = lim lambda^n (g^n(z) - p) along the inverse branch fixing p.

    phi(p) = 0, phi'(p) = 1, and poincare_eval(chart, phi(z)) returns z.
    Each backward step picks the preimage closest to p.  The limit is read
    off once the orbit is ~5e-6 from p, through the expansion
    phi(p + u) = u + c u^2 + O(u^3) with c = f''(p) / (2 lambda (1 - lambda)):
    contracting all the way to the fixed point would amplify the rounding of
    the last steps by lambda^n and cap the accuracy near 1e-6 relative,
    while stopping at the crossover and correcting quadratically leaves
    ~1e-10 relative error.  Requires |z - p| < validity_radius.
    """
    z = complex(z)
    p = chart.p
    if abs(z - p) >= chart.validity_radius:
        raise ValueError("z is outside the chart's validity disk")
    stop = 5e-6 * (1.0 + abs(p))
    w = z
    factor = 1.0 + 0.0j
    for _ in range(chart.max_depth):
        if abs(w - p) < stop:
            break
        pre = [q for q in chart.map.preimages(w) if not is_inf(q)]
        if not pre:
            raise CircumError("no finite preimage while contracting toward p")
        w = min(pre, key=lambda q: abs(q - p))
        factor *= chart.multiplier
    u = w - p
    lam = chart.multiplier
    fpp = chart.map.derivative().derivative()(p)
    c = fpp / (2.0 * lam * (1.0 - lam))
    return factor * (u + c * u * u)


def line_invariance_check(
    chart: KoenigsChart, cloud: PointCloud
) -> tuple[bool, complex, float]:
    """Do the Koenigs images of the cloud lie on a line through 0?

    Takes the finite cloud points inside the chart's validity disk (at least
    10 required), maps them through koenigs_coordinate, and measures their
    spread about the dominant direction of the second-moment matrix taken
    about the origin.  Returns (is_line, direction, max_deviation) where
    direction is a unit complex number with canonical sign.  is_line needs
    max_deviation < 1e-5 * max|phi| and an essentially real multiplier
    (|Im lambda| <= 1e-8 |lambda|).
    """
    p = chart.p
    inside = [
        z for z in cloud.points
        if not is_inf(z) and abs(complex(z) - p) < chart.validity_radius
    ]
    if len(inside) < 10:
        raise ValueError("need at least 10 cloud points inside the validity disk")
    phis = np.array([koenigs_coordinate(chart, z) for z in inside])
    x, y = phis.real, phis.imag
    sxx, sxy, syy = float(x @ x), float(x @ y), float(y @ y)
    half = (sxx - syy) / 2.0
    disc = float(np.hypot(half, sxy))
    lam_max = (sxx + syy) / 2.0 + disc
    v = np.array([sxy, lam_max - sxx])
    if np.linalg.norm(v) < 1e-30:
        v = np.array([lam_max - syy, sxy])
    if np.linalg.norm(v) < 1e-30:
        v = np.array([1.0, 0.0])  # isotropic cloud: any direction
    v = v / np.linalg.norm(v)
    if v[0] < -1e-12 or (abs(v[0]) <= 1e-12 and v[1] < 0):
        v = -v
    direction = complex(v[0], v[1])
    dev = np.abs((phis * np.conj(direction)).imag)
    max_dev = float(np.max(dev))
    scale = float(np.max(np.abs(phis)))
    lam = chart.multiplier
    is_line = (max_dev < 1e-5 * scale) and (abs(lam.imag) <= 1e-8 * abs(lam))
    return is_line, direction, max_dev


@dataclass(frozen=True)
class IntervalCriterionReport:
    """Four-part test for forward invariance of [a, b] in the strong sense.

    verdict is the conjunction: real coefficients, endpoint set invariance,
    all finite critical points in [a, b], and all critical values outside
    the open interval (a, b)."""

    a: float
    b: float
    is_real_map: bool
    endpoints_invariant: bool
    critical_points_inside: bool
    critical_values_outside: bool

    @property
    def verdict(self) -> bool:
        return (
            self.is_real_map
            and self.endpoints_invariant
            and self.critical_points_inside
            and self.critical_values_outside
        )


def interval_criterion(f: RationalMap, a: float, b: float) -> IntervalCriterionReport:
    """Evaluate the interval test for a polynomial map and [a, b].

    Tolerances: coefficients real to 1e-12; endpoint images within 1e-9 of
    {a, b}; critical points real to 1e-9 and in [a - 1e-9, b + 1e-9];
    critical values excluded from (a + 1e-9, b - 1e-9) x (-1e-9, 1e-9).
    """
    if not a < b:
        raise ValueError("need a < b")
    if f.den.degree != 0:
        raise ValueError("interval_criterion is for polynomials")
    if f.degree < 2:
        raise ValueError("interval_criterion needs degree >= 2")
    is_real = f.is_real_symmetric(1e-12)

    def near_endpoint(w: complex) -> bool:
        return (not is_inf(w)) and min(abs(w - a), abs(w - b)) <= 1e-9

    endpoints = near_endpoint(f(complex(a))) and near_endpoint(f(complex(b)))
    crit = [c for c in f.critical_points() if not is_inf(c)]
    pts_inside = all(
        abs(c.imag) <= 1e-9 and a - 1e-9 <= c.real <= b + 1e-9 for c in crit
    )
    vals_outside = True
    for c in crit:
        v = f(c)
        if is_inf(v):
            continue
        strictly_inside = (
            abs(v.imag) < 1e-9 and a + 1e-9 < v.real < b - 1e-9
        )
        if strictly_inside:
            vals_outside = False
            break
    return IntervalCriterionReport(
        a=float(a),
        b=float(b),
        is_real_map=is_real,
        endpoints_invariant=endpoints,
        critical_points_inside=pts_inside,
        critical_values_outside=vals_outside,
    )


def _chebyshev_poly(d: int) -> Polynomial:
    """p_d with p_d(2 cos t) = 2 cos(d t): p_0 = 2, p_1 = z, p_{k+1} = z p_k - p_{k-1}."""
    prev = Polynomial([2.0])
    cur = Polynomial([0.0, 1.0])
    if d == 0:
        return prev
    for _ in range(d - 1):
        prev, cur = cur, Polynomial([0.0, 1.0]) * cur - prev
    return cur


def chebyshev_conjugacy_check(f: RationalMap, a: float, b: float) -> bool:
    """Is f on [a, b] affinely conjugate to +-p_d on [-2, 2]?

    Requires interval_criterion(f, a, b) to pass.  The answer is True when
    every finite critical value is within 1e-9 of an endpoint AND the affine
    change of variables [a, b] -> [-2, 2] (either orientation) actually
    carries f to +-p_d with coefficients matching to 1e-8.
    """
    rep = interval_criterion(f, a, b)
    if not rep.verdict:
        raise ValueError("interval criterion fails; conjugacy check undefined")
    for c in f.critical_points():
        if is_inf(c):
            continue
        v = f(c)
        if is_inf(v) or min(abs(v - a), abs(v - b)) > 1e-9:
            return False
    d = f.degree
    target = _chebyshev_poly(d)
    tol = 1e-8 * max(1.0, float(np.max(np.abs(target.coeffs))))
    for sign in (1.0, -1.0):
        m = Mobius(sign * 4.0, -sign * 2.0 * (a + b), 0.0, b - a)
        g = f.conjugate(m)
        gc = g.num.coeffs / g.den.coeffs[0]
        for tsign in (1.0, -1.0):
            tc = tsign * target.coeffs
            if len(gc) == len(tc) and np.max(np.abs(gc - tc)) <= tol:
                return True
    return False


def blaschke_halfplane_check(f: RationalMap, grid_density: int = 32) -> str:
    """Classify how f moves the open upper half-plane.

    Samples f on a tan-transformed grid filling the upper half-plane and
    inspects imaginary signs: "Preserves" if every sample stays weakly upper
    (Im >= -1e-12), "Swaps" if every sample lands weakly lower, otherwise
    "Neither".  Requires a real-symmetric map (otherwise the real axis is
    not even invariant and the question dissolves)."""
    if not f.is_real_symmetric(1e-12):
        raise ValueError("blaschke_halfplane_check needs a real-symmetric map")
    n = int(grid_density)
    if n < 2:
        raise ValueError("grid_density must be >= 2")
    u = (np.arange(n) + 0.5) / n * np.pi - np.pi / 2.0
    v = (np.arange(n) + 0.5) / n * (np.pi / 2.0)
    ims: list[float] = []
    for x in np.tan(u):
        for y in np.tan(v):
            w = f(complex(x, y))
            if is_inf(w):
                continue
            ims.append(w.imag)
    if not ims:
        raise ValueError("no finite samples; map is degenerate on the grid")
    arr = np.array(ims)
    if np.all(arr >= -1e-12):
        return "Preserves"
    if np.all(arr <= 1e-12):
        return "Swaps"
    return "Neither"


def escape_render(
    f: RationalMap,
    window: tuple[float, float, float, float],
    resolution: int,
    max_iter: int = 500,
) -> np.ndarray:
    """Escape-time image of a polynomial's filled Julia set.

    Returns a uint8 array of shape (resolution, resolution); row 0 is the top
    of the window (largest Im).  A pixel escaping at step n gets value
    floor(255 n / max_iter); non-escaping pixels get 255.  The escape radius
    is max(2, Cauchy root bound, (2/|lead|)^(1/(d-1))), beyond which orbits
    must diverge.
    """
    if f.den.degree != 0:
        raise ValueError("escape_render is for polynomials")
    if f.degree < 2:
        raise ValueError("escape_render needs degree >= 2")
    if resolution < 1:
        raise ValueError("resolution must be positive")
    x0, x1, y0, y1 = (float(t) for t in window)
    if not (x0 < x1 and y0 < y1):
        raise ValueError("window must have positive area")
    coeffs = f.num.coeffs / f.den.coeffs[0]
    lead = coeffs[-1]
    d = len(coeffs) - 1
    cauchy = 1.0 + float(np.max(np.abs(coeffs[:-1] / lead))) if d >= 1 else 2.0
    radius = max(2.0, cauchy, (2.0 / abs(lead)) ** (1.0 / (d - 1)))
    xs = np.linspace(x0, x1, resolution)
    ys = np.linspace(y1, y0, resolution)
    z = xs[None, :] + 1j * ys[:, None]
    counts = np.full(z.shape, max_iter, dtype=np.int64)
    alive = np.ones(z.shape, dtype=bool)
    for n in range(max_iter):
        zz = z[alive]
        acc = np.full(zz.shape, coeffs[-1])
        for c in coeffs[-2::-1]:
            acc = acc * zz + c
        z[alive] = acc
        escaped_now = alive & (np.abs(z) > radius)
        counts[escaped_now] = n
        alive &= ~escaped_now
        if not alive.any():
            break
    img = np.where(
        counts >= max_iter,
        np.uint8(255),
        (255 * counts // max_iter).astype(np.uint8),
    )
    return img.astype(np.uint8)
