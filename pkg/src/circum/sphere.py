"""Stereographic projection, circlines, and least-squares circline fitting.

A circline (circle or straight line in the plane) is exactly the intersection
of the Riemann sphere with a plane ``n . s = h``, ``|n| = 1``, ``|h| < 1``;
lines are the circlines through the north pole.  We use the projection

    x + iy  ->  (2x, 2y, x^2 + y^2 - 1) / (x^2 + y^2 + 1),    inf -> (0, 0, 1)

under which Euclidean distance between sphere images equals the chordal
metric (sphere diameter 2), so plane-distance residuals below are chordal
quantities.  Fitting a circline to a point cloud is then a 3x3 symmetric
eigenproblem: the plane normal is the smallest-eigenvalue direction of the
weighted covariance of the sphere images.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .algebra import INF, is_inf

__all__ = [
    "Circline",
    "PointCloud",
    "FitReport",
    "to_sphere",
    "from_sphere",
    "fit_circline",
    "circline_through",
    "is_contained_in_circline",
    "image_of_real_line",
]


def to_sphere(z: complex) -> np.ndarray:
    """Stereographic image of z as a unit 3-vector (inf -> north pole)."""
    if is_inf(z):
        return np.array([0.0, 0.0, 1.0])
    x, y = z.real, z.imag
    r2 = x * x + y * y
    if r2 <= 1.0:
        return np.array([2.0 * x, 2.0 * y, r2 - 1.0]) / (r2 + 1.0)
    # divide through by r^2 so large moduli cannot overflow
    u = 1.0 / r2
    return np.array([2.0 * x * u, 2.0 * y * u, 1.0 - u]) / (1.0 + u)


def from_sphere(s: Sequence[float]) -> complex:
    """Inverse stereographic projection; the north pole maps to INF."""
    s = np.asarray(s, dtype=float)
    denom = 1.0 - s[2]
    if denom <= 0.0:
        return INF
    z = complex(s[0] / denom, s[1] / denom)
    return INF if is_inf(z) else z


def _sphere_array(points: Sequence[complex]) -> np.ndarray:
    return np.array([to_sphere(z) for z in points])


@dataclass(frozen=True)
class Circline:
    """Plane section n . s = offset of the unit sphere, |n| = 1."""

    normal: np.ndarray
    offset: float

    def __post_init__(self):
        n = np.asarray(self.normal, dtype=float)
        norm = float(np.linalg.norm(n))
        if norm == 0.0:
            raise ValueError("circline normal is zero")
        n = n / norm
        # canonical sign: first component of magnitude above 1e-12 is positive
        for comp in n:
            if abs(comp) > 1e-12:
                if comp < 0:
                    n = -n
                    object.__setattr__(self, "offset", -float(self.offset) / norm)
                else:
                    object.__setattr__(self, "offset", float(self.offset) / norm)
                break
        object.__setattr__(self, "normal", n)

    @property
    def is_line(self) -> bool:
        """Circlines through the north pole are straight lines in the plane."""
        return abs(float(self.normal[2]) - self.offset) < 1e-9

    def residual(self, z: complex) -> float:
        return abs(float(np.dot(self.normal, to_sphere(z))) - self.offset)


@dataclass
class PointCloud:
    """Points on the extended plane with optional positive weights."""

    points: list[complex]
    weights: np.ndarray | None = None

    def __post_init__(self):
        self.points = [complex(z) if not is_inf(z) else INF for z in self.points]
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if len(w) != len(self.points):
                raise ValueError("weights length does not match points")
            if np.any(w <= 0):
                raise ValueError("weights must be positive")
            self.weights = w

    def __len__(self) -> int:
        return len(self.points)


@dataclass
class FitReport:
    circline: Circline
    rms_residual: float
    max_residual: float
    eigengap: float
    offset_out_of_range: bool = False
    ill_conditioned: bool = False


def _char_coeffs(c: np.ndarray) -> tuple[float, float, float]:
    """Coefficients (tr, m2, det) of det(C - t I) = -t^3 + tr t^2 - m2 t + det."""
    tr = c[0, 0] + c[1, 1] + c[2, 2]
    m2 = (
        c[0, 0] * c[1, 1] - c[0, 1] * c[1, 0]
        + c[0, 0] * c[2, 2] - c[0, 2] * c[2, 0]
        + c[1, 1] * c[2, 2] - c[1, 2] * c[2, 1]
    )
    det = float(np.linalg.det(c))
    return float(tr), float(m2), det


def _sym3_eigenvalues(c: np.ndarray) -> np.ndarray:
    """Eigenvalues of a symmetric 3x3, ascending, by the trigonometric closed form."""
    p1 = c[0, 1] ** 2 + c[0, 2] ** 2 + c[1, 2] ** 2
    q = (c[0, 0] + c[1, 1] + c[2, 2]) / 3.0
    if p1 == 0.0:
        return np.sort(np.diag(c).astype(float))
    p2 = (c[0, 0] - q) ** 2 + (c[1, 1] - q) ** 2 + (c[2, 2] - q) ** 2 + 2.0 * p1
    p = np.sqrt(p2 / 6.0)
    b = (c - q * np.eye(3)) / p
    r = float(np.clip(np.linalg.det(b) / 2.0, -1.0, 1.0))
    phi = np.arccos(r) / 3.0
    big = q + 2.0 * p * np.cos(phi)
    small = q + 2.0 * p * np.cos(phi + 2.0 * np.pi / 3.0)
    mid = 3.0 * q - big - small
    eigs = np.array([small, mid, big])
    # the trig formula resolves a near-double pair only to ~sqrt(eps), so
    # polish the best-separated root by Newton (well-conditioned there) and
    # recover the pair from the deflated quadratic instead
    tr, m2, det = _char_coeffs(c)
    dists = [
        min(abs(eigs[0] - eigs[1]), abs(eigs[0] - eigs[2])),
        min(abs(eigs[1] - eigs[0]), abs(eigs[1] - eigs[2])),
        min(abs(eigs[2] - eigs[0]), abs(eigs[2] - eigs[1])),
    ]
    t = eigs[int(np.argmax(dists))]
    for _ in range(2):
        val = -t**3 + tr * t**2 - m2 * t + det
        der = -3.0 * t**2 + 2.0 * tr * t - m2
        if der == 0.0:
            break
        step = val / der
        if not np.isfinite(step) or abs(step) > 1e-2 * (abs(t) + p):
            break
        t -= step
    beta = t - tr  # quadratic factor t^2 + beta t + gamma holds the pair
    gamma = t * beta + m2
    disc = max(beta * beta - 4.0 * gamma, 0.0)
    if beta >= 0.0:
        r1 = -0.5 * (beta + np.sqrt(disc))
    else:
        r1 = -0.5 * (beta - np.sqrt(disc))
    r2 = gamma / r1 if r1 != 0.0 else -beta - r1
    return np.sort(np.array([t, r1, r2]))


def _eigenvector(c: np.ndarray, lam: float) -> np.ndarray:
    """Unit vector in the (near-)null space of C - lam I via row cross products."""
    m = c - lam * np.eye(3)
    crosses = [
        np.cross(m[0], m[1]),
        np.cross(m[0], m[2]),
        np.cross(m[1], m[2]),
    ]
    norms = [float(np.linalg.norm(v)) for v in crosses]
    k = int(np.argmax(norms))
    if norms[k] > 1e-30:
        return crosses[k] / norms[k]
    # repeated eigenvalue: any vector annihilating the strongest row will do
    rows = [float(np.linalg.norm(r)) for r in m]
    j = int(np.argmax(rows))
    if rows[j] < 1e-30:
        return np.array([0.0, 0.0, 1.0])
    r = m[j] / rows[j]
    # complete to an orthonormal pair and return one orthogonal direction
    t = np.array([1.0, 0.0, 0.0]) if abs(r[0]) < 0.9 else np.array([0.0, 1.0, 0.0])
    v = np.cross(r, t)
    return v / np.linalg.norm(v)


def fit_circline(cloud: PointCloud) -> FitReport:
    """Total-least-squares circline through a weighted point cloud.

    Lifts the points to the sphere, forms the weighted covariance about the
    weighted mean, and takes the smallest-eigenvalue direction as the plane
    normal; the offset is the mean's projection onto it.  Residuals are
    distances to the plane (a lower bound for chordal distance to the
    circline, and zero exactly on it).

    The report flags |offset| >= 1 (plane missing the sphere: the points
    concentrate near a point, not a circle) instead of raising, and flags an
    eigengap below 1e-9 as ill-conditioned.

    Raises
    ------
    ValueError
        Fewer than 3 points, or all points within 1e-9 chordal diameter.
    """
    if len(cloud) < 3:
        raise ValueError("fit_circline needs at least 3 points")
    s = _sphere_array(cloud.points)
    w = cloud.weights if cloud.weights is not None else np.ones(len(cloud))
    if float(np.max(np.linalg.norm(s - s[0], axis=1))) < 1e-9:
        raise ValueError("all points coincide within 1e-9 chordal distance")
    wsum = float(np.sum(w))
    mean = (w[:, None] * s).sum(axis=0) / wsum
    d = s - mean
    cov = (w[:, None] * d).T @ d / wsum
    eigs = _sym3_eigenvalues(cov)
    normal = _eigenvector(cov, eigs[0])
    offset = float(np.dot(normal, mean))
    res = np.abs(s @ normal - offset)
    rms = float(np.sqrt(np.sum(w * res**2) / wsum))
    eigengap = float(eigs[1] - eigs[0])
    out_of_range = abs(offset) >= 1.0
    if out_of_range:
        # keep |offset| < 1 formally false but still return the fitted plane
        circ = Circline.__new__(Circline)
        object.__setattr__(circ, "normal", normal)
        object.__setattr__(circ, "offset", offset)
    else:
        circ = Circline(normal, offset)
    return FitReport(
        circline=circ,
        rms_residual=rms,
        max_residual=float(np.max(res)),
        eigengap=eigengap,
        offset_out_of_range=out_of_range,
        ill_conditioned=eigengap < 1e-9,
    )


def circline_through(z1: complex, z2: complex, z3: complex) -> Circline:
    """The unique circline through three distinct points."""
    s1, s2, s3 = to_sphere(z1), to_sphere(z2), to_sphere(z3)
    n = np.cross(s1 - s2, s1 - s3)
    norm = float(np.linalg.norm(n))
    if norm < 1e-12:
        raise ValueError("points are not distinct enough to define a circline")
    n = n / norm
    return Circline(n, float(np.dot(n, s1)))


def is_contained_in_circline(
    cloud: PointCloud, tol: float = 1e-6
) -> tuple[bool, FitReport]:
    """Fit a circline and decide containment by max residual <= tol."""
    rep = fit_circline(cloud)
    return bool(rep.max_residual <= tol), rep


def image_of_real_line(
    f: Callable[[complex], complex],
    n_points: int = 2048,
    span: float = 50.0,
) -> PointCloud:
    """Sample f along the real axis, on a grid that also probes |x| >> span.

    Half the nodes are uniform on [-span, span]; the other half are
    tan-transformed, x = tan(u) with u uniform in (-pi/2, pi/2), reaching
    magnitudes ~1e16 so the behavior toward the ends of the line is seen.
    Poles simply contribute INF samples.
    """
    m = n_points // 2
    xs = np.concatenate([
        np.linspace(-span, span, m),
        np.tan((np.arange(m) + 0.5) / m * np.pi - np.pi / 2.0),
    ])
    xs.sort()
    pts = []
    for x in xs:
        try:
            w = f(complex(x))
        except ZeroDivisionError:
            w = INF
        pts.append(INF if is_inf(w) else complex(w))
    return PointCloud(pts)
