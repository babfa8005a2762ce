"""Polynomials, rational maps, and Moebius transformations on the Riemann sphere.

Everything downstream (backward orbits, circline fits, growth integrals) sits on
the arithmetic in this module, so the conventions are spelled out once here:

* Coefficients are stored ascending: ``coeffs[k]`` multiplies ``z**k``.  An
  empty coefficient list is the zero polynomial.
* The point at infinity is the module constant ``INF``.  Any complex number
  with a non-finite component is treated as infinity by ``is_inf``.
* Rational maps are kept in lowest terms; the constructor rejects numerator
  and denominator with a (numerically) common root.
* All root lists are sorted by (real, imaginary) so that identical inputs
  produce identical outputs, which the sampling layer relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "INF",
    "CircumError",
    "RootConvergenceError",
    "DegreeCapExceeded",
    "is_inf",
    "chordal",
    "Polynomial",
    "poly_roots",
    "Mobius",
    "RationalMap",
]

INF = complex(float("inf"), 0.0)


class CircumError(Exception):
    """Base class for errors raised by this package."""


class RootConvergenceError(CircumError):
    """Root finding failed to reach the residual target.

    Attributes
    ----------
    worst_residual : float
        Largest relative residual |p(r)| / sum_k |a_k| |r|^k over the
        returned approximations.
    roots : list of complex
        The non-certified approximations, for diagnosis.
    """

    def __init__(self, message: str, worst_residual: float, roots: list[complex]):
        super().__init__(message)
        self.worst_residual = worst_residual
        self.roots = roots


class DegreeCapExceeded(CircumError):
    """Composition would exceed the configured degree cap."""


def is_inf(z: complex) -> bool:
    """True if z represents the point at infinity."""
    return not (np.isfinite(z.real) and np.isfinite(z.imag))


def chordal(z: complex, w: complex) -> float:
    """Chordal distance on the Riemann sphere (diameter normalized to 2).

    d(z, w) = 2|z - w| / sqrt((1 + |z|^2)(1 + |w|^2)), with the usual limit
    d(z, inf) = 2 / sqrt(1 + |z|^2).  Computed with hypot so that inputs up
    to ~1e300 do not overflow.
    """
    zi, wi = is_inf(z), is_inf(w)
    if zi and wi:
        return 0.0
    if zi:
        return 2.0 / np.hypot(1.0, abs(w))
    if wi:
        return 2.0 / np.hypot(1.0, abs(z))
    return 2.0 * abs(z - w) / (np.hypot(1.0, abs(z)) * np.hypot(1.0, abs(w)))


def _horner(coeffs: np.ndarray, z):
    """Evaluate an ascending-coefficient polynomial at scalar or array z."""
    if len(coeffs) == 0:
        return np.zeros_like(z) if isinstance(z, np.ndarray) else 0.0 + 0.0j
    acc = np.full_like(z, coeffs[-1]) if isinstance(z, np.ndarray) else complex(coeffs[-1])
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


class Polynomial:
    """Polynomial with complex coefficients, stored ascending.

    Parameters
    ----------
    coeffs : sequence of complex
        ``coeffs[k]`` multiplies ``z**k``.  Exact trailing zeros are trimmed;
        an empty sequence (or all-zero) is the zero polynomial, with degree -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[complex] | np.ndarray = ()):
        a = np.asarray(coeffs, dtype=complex).ravel()
        n = len(a)
        while n > 0 and a[n - 1] == 0:
            n -= 1
        self.coeffs = a[:n].copy()

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return len(self.coeffs) == 0

    def __call__(self, z):
        return _horner(self.coeffs, z)

    def __repr__(self) -> str:
        return f"Polynomial({[complex(c) for c in self.coeffs]!r})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return len(self.coeffs) == len(other.coeffs) and bool(
            np.all(self.coeffs == other.coeffs)
        )

    def __hash__(self):
        return hash(tuple(self.coeffs.tolist()))

    def abs_bound(self, r: float) -> float:
        """sum_k |a_k| r^k, an upper bound for |p| on |z| <= r."""
        return float(_horner(np.abs(self.coeffs).astype(complex), complex(r)).real)

    def derivative(self) -> "Polynomial":
        if self.degree < 1:
            return Polynomial()
        k = np.arange(1, self.degree + 1)
        return Polynomial(self.coeffs[1:] * k)

    def __add__(self, other: "Polynomial") -> "Polynomial":
        n = max(len(self.coeffs), len(other.coeffs))
        a = np.zeros(n, dtype=complex)
        a[: len(self.coeffs)] += self.coeffs
        a[: len(other.coeffs)] += other.coeffs
        return Polynomial(a)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __neg__(self) -> "Polynomial":
        return Polynomial(-self.coeffs)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero or other.is_zero:
                return Polynomial()
            return Polynomial(np.convolve(self.coeffs, other.coeffs))
        return Polynomial(self.coeffs * complex(other))

    __rmul__ = __mul__

    def compose(self, other: "Polynomial", cap: int = 4096) -> "Polynomial":
        """self(other(z)), rejecting results of degree above cap."""
        if self.degree >= 1 and other.degree >= 1 and self.degree * other.degree > cap:
            raise DegreeCapExceeded(
                f"composition degree {self.degree * other.degree} exceeds cap {cap}"
            )
        acc = Polynomial()
        for c in self.coeffs[::-1]:
            acc = acc * other + Polynomial([c])
        return acc

    def roots(self) -> list[complex]:
        return poly_roots(self)

    @staticmethod
    def from_roots(roots: Iterable[complex], lead: complex = 1.0) -> "Polynomial":
        p = Polynomial([lead])
        for r in roots:
            p = p * Polynomial([-r, 1.0])
        return p


def _trim_leading(p: Polynomial, rel: float = 1e-12) -> Polynomial:
    # derived polynomials (fixed-point, preimage, critical numerator) can have
    # a leading coefficient that is pure cancellation noise; dropping it routes
    # the lost roots to the infinity bookkeeping instead of ~1e12-sized fakes
    if p.is_zero:
        return p
    m = float(np.max(np.abs(p.coeffs)))
    n = len(p.coeffs)
    while n > 0 and abs(p.coeffs[n - 1]) <= rel * m:
        n -= 1
    return Polynomial(p.coeffs[:n])


_ABERTH_ROTATION = 2.399963229728653  # irrational angle, breaks conjugate symmetry


def _quadratic_roots(c0: complex, c1: complex, c2: complex) -> list[complex]:
    disc = np.sqrt(complex(c1 * c1 - 4.0 * c2 * c0))
    # pick the sign that avoids cancellation in -b -+ sqrt(disc)
    q = -0.5 * (c1 + disc) if abs(c1 + disc) >= abs(c1 - disc) else -0.5 * (c1 - disc)
    if q == 0:
        return [0.0 + 0.0j, complex(-c1 / c2)]
    return [complex(q / c2), complex(c0 / q)]


def _cluster_roots(roots: np.ndarray, tol: float) -> list[complex]:
    """Merge approximations within tol into multiplicity clusters (means repeated)."""
    n = len(roots)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if abs(roots[i] - roots[j]) < tol:
                parent[find(i)] = find(j)
    groups: dict[int, list[complex]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(roots[i])
    out: list[complex] = []
    for members in groups.values():
        m = complex(np.mean(members))
        out.extend([m] * len(members))
    return out


def poly_roots(p: Polynomial, max_iter: int = 200) -> list[complex]:
    """All complex roots of p, with multiplicity, sorted by (real, imag).

    Degrees 1 and 2 use closed forms.  Higher degrees run Aberth-Ehrlich
    simultaneous iteration started on a circle of the Cauchy root-bound
    radius, rotated by a fixed irrational angle, then three Newton polish
    steps.  Approximations closer than 1e-7 are merged into multiplicity
    clusters at their mean.

    Raises
    ------
    RootConvergenceError
        If some residual |p(r)| exceeds 1e-10 * sum_k |a_k| |r|^k after
        max_iter iterations.
    """
    if p.degree < 1:
        raise ValueError("poly_roots needs degree >= 1")
    c = p.coeffs / np.max(np.abs(p.coeffs))
    n = p.degree
    if n == 1:
        roots = np.array([-c[0] / c[1]])
    elif n == 2:
        roots = np.array(_quadratic_roots(c[0], c[1], c[2]))
    else:
        lead = c[-1]
        radius = 1.0 + float(np.max(np.abs(c[:-1] / lead)))
        k = np.arange(n)
        z = radius * np.exp(1j * (2.0 * np.pi * k / n + _ABERTH_ROTATION))
        dc = c[1:] * np.arange(1, n + 1)
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            for _ in range(max_iter):
                pv = _horner(c, z)
                dv = _horner(dc, z)
                newton = np.where(dv != 0, pv / np.where(dv != 0, dv, 1.0), 0.0)
                diff = z[:, None] - z[None, :]
                np.fill_diagonal(diff, 1.0)
                s = np.sum(1.0 / diff, axis=1) - 1.0  # remove the diagonal's 1/1
                s = np.where(np.isfinite(s), s, 0.0)
                denom = 1.0 - newton * s
                step = np.where(
                    denom != 0, newton / np.where(denom != 0, denom, 1.0), newton
                )
                z = z - step
                scale = 1.0 + float(np.max(np.abs(z)))
                if float(np.max(np.abs(step))) < 1e-14 * scale:
                    break
        for _ in range(3):
            pv = _horner(c, z)
            dv = _horner(dc, z)
            z = z - np.where(dv != 0, pv / np.where(dv != 0, dv, 1.0), 0.0)
        roots = z
    merged = _cluster_roots(np.asarray(roots), 1e-7)
    worst = 0.0
    pnorm = Polynomial(c)
    for r in merged:
        # the bound can be 0 at r = 0 with zero constant term (an exact root)
        bound = max(pnorm.abs_bound(abs(r)), 1e-300)
        worst = max(worst, abs(_horner(c, complex(r))) / bound)
    if worst > 1e-10:
        raise RootConvergenceError(
            f"root residual {worst:.3e} above 1e-10 after {max_iter} iterations",
            worst,
            sorted(merged, key=lambda w: (w.real, w.imag)),
        )
    return sorted(merged, key=lambda w: (w.real, w.imag))


@dataclass(frozen=True)
class Mobius:
    """z -> (a z + b) / (c z + d) with ad - bc != 0."""

    a: complex = 1.0
    b: complex = 0.0
    c: complex = 0.0
    d: complex = 1.0

    def __post_init__(self):
        m = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        if m == 0 or abs(self.a * self.d - self.b * self.c) / (m * m) <= 1e-12:
            raise ValueError("Mobius map is singular (|ad - bc| too small)")

    @staticmethod
    def identity() -> "Mobius":
        return Mobius(1.0, 0.0, 0.0, 1.0)

    def __call__(self, z: complex) -> complex:
        if is_inf(z):
            return INF if self.c == 0 else complex(self.a / self.c)
        num = self.a * z + self.b
        den = self.c * z + self.d
        if den == 0:
            return INF
        w = num / den
        return INF if is_inf(w) else complex(w)

    def inverse(self) -> "Mobius":
        return Mobius(self.d, -self.b, -self.c, self.a)

    def as_rational_map(self) -> "RationalMap":
        return RationalMap(
            Polynomial([self.b, self.a]), Polynomial([self.d, self.c]), _validate=False
        )


class RationalMap:
    """Rational map f = num/den on the Riemann sphere, kept in lowest terms.

    Parameters
    ----------
    num, den : Polynomial or coefficient sequence (ascending)
        den must be nonzero.  If both have degree >= 1 their root sets must
        be disjoint: a pair of roots within 1e-9 * (1 + |root|) raises
        ValueError.  The degree of the map is max(deg num, deg den).
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,), *, _validate: bool = True):
        self.num = num if isinstance(num, Polynomial) else Polynomial(num)
        self.den = den if isinstance(den, Polynomial) else Polynomial(den)
        if self.den.is_zero:
            raise ValueError("denominator is the zero polynomial")
        if self.num.is_zero and self.den.degree > 0:
            raise ValueError("zero numerator with nonconstant denominator is unreduced")
        if _validate and self.num.degree >= 1 and self.den.degree >= 1:
            nr = poly_roots(self.num)
            dr = poly_roots(self.den)
            for r in nr:
                for s in dr:
                    if abs(r - s) < 1e-9 * (1.0 + abs(r)):
                        raise ValueError(
                            f"numerator and denominator share a root near {r:.6g}"
                        )

    @property
    def degree(self) -> int:
        return max(self.num.degree, self.den.degree, 0)

    def __repr__(self) -> str:
        num = [complex(c) for c in self.num.coeffs]
        den = [complex(c) for c in self.den.coeffs]
        return f"RationalMap({num!r}, {den!r})"

    def at_infinity(self) -> complex:
        """f(inf) by comparing degrees (ratio of leading coefficients on a tie)."""
        p, q = self.num.degree, self.den.degree
        if p > q:
            return INF
        if p < q:
            return 0.0 + 0.0j
        return complex(self.num.coeffs[-1] / self.den.coeffs[-1])

    def __call__(self, z: complex) -> complex:
        if is_inf(z):
            return self.at_infinity()
        z = complex(z)
        if abs(z) <= 1.0:
            nv = _horner(self.num.coeffs, z)
            dv = _horner(self.den.coeffs, z)
            if dv == 0:
                if nv == 0:
                    return self._lhopital(z)
                return INF
            w = nv / dv
            return INF if is_inf(w) else w
        # |z| > 1: evaluate in the w = 1/z chart so high powers cannot overflow:
        # f(z) = z^(p-q) * rev(num)(w) / rev(den)(w)
        w = 1.0 / z
        p, q = self.num.degree, self.den.degree
        nv = _horner(self.num.coeffs[::-1], w)
        dv = _horner(self.den.coeffs[::-1], w)
        if dv == 0:
            if nv == 0:
                return self._lhopital(z)
            return INF
        ratio = nv / dv
        if p == q:
            return INF if is_inf(ratio) else ratio
        factor = z ** (p - q)
        out = factor * ratio
        return INF if is_inf(out) else out

    def _lhopital(self, z: complex) -> complex:
        # exact common vanishing can only happen for degenerate inputs that
        # slipped past validation; one derivative step settles the value
        nd = self.num.derivative()
        dd = self.den.derivative()
        nv = nd(z)
        dv = dd(z)
        if dv == 0:
            return INF if nv != 0 else complex(0.0)
        return complex(nv / dv)

    def derivative(self) -> "RationalMap":
        """f' as a rational map, with exact common factors at poles removed."""
        w = self.num.derivative() * self.den - self.num * self.den.derivative()
        if self.den.degree == 0:
            return RationalMap(Polynomial(w.coeffs / self.den.coeffs[0]), (1.0,), _validate=False)
        den_roots = poly_roots(self.den)
        # multiplicity-m poles contribute a factor (z - r)^(m-1) to both parts
        seen: list[complex] = []
        top = w
        bottom_roots: list[complex] = []
        for r in den_roots:
            mult = sum(1 for s in den_roots if s == r)
            if any(s == r for s in seen):
                continue
            seen.append(r)
            for _ in range(mult - 1):
                top = _deflate(top, r)
            bottom_roots.extend([r] * (mult + 1))
        lead = self.den.coeffs[-1] ** 2
        bottom = Polynomial.from_roots(bottom_roots, lead)
        return RationalMap(top, bottom, _validate=False)

    def compose(self, g: "RationalMap", cap: int = 4096) -> "RationalMap":
        """self(g(z)).  Degree multiplies; results above cap are rejected."""
        if self.degree * g.degree > cap:
            raise DegreeCapExceeded(
                f"composition degree {self.degree * g.degree} exceeds cap {cap}"
            )
        n = max(self.num.degree, self.den.degree)
        if n < 0:
            n = 0
        # homogenize: sum_i a_i P^i Q^(n-i) over sum_j b_j P^j Q^(n-j)
        p_pow = [Polynomial([1.0])]
        q_pow = [Polynomial([1.0])]
        for _ in range(n):
            p_pow.append(p_pow[-1] * g.num)
            q_pow.append(q_pow[-1] * g.den)
        num_new = Polynomial()
        den_new = Polynomial()
        for i in range(self.num.degree + 1):
            num_new = num_new + self.num.coeffs[i] * (p_pow[i] * q_pow[n - i])
        for j in range(self.den.degree + 1):
            den_new = den_new + self.den.coeffs[j] * (p_pow[j] * q_pow[n - j])
        # composition of reduced maps is reduced; revalidating would just redo root finds
        return RationalMap(num_new, den_new, _validate=False)

    def conjugate(self, m: Mobius) -> "RationalMap":
        """m o f o m^-1."""
        inner = self.compose(m.inverse().as_rational_map())
        return m.as_rational_map().compose(inner)

    def preimages(self, w: complex) -> list[complex]:
        """The degree-many solutions of f(z) = w, with multiplicity.

        Finite solutions are the roots of num - w * den (or den alone for
        w = inf); the count is padded with INF when the leading terms cancel.
        """
        d = self.degree
        if is_inf(w):
            poly = self.den
        else:
            poly = self.num - complex(w) * self.den
        poly = _trim_leading(poly)
        if poly.is_zero:
            raise ValueError("preimage equation is identically zero (constant map?)")
        finite = poly_roots(poly) if poly.degree >= 1 else []
        return finite + [INF] * (d - len(finite))

    def fixed_points(self) -> list[tuple[complex, complex]]:
        """(point, multiplier) pairs for all d+1 fixed points with multiplicity.

        Finite fixed points are roots of num - z * den with multiplier f'.
        The deficiency from degree d+1 sits at infinity; its multiplier is 0
        when deg num >= deg den + 2 and den_lead/num_lead when the degrees
        differ by exactly one.
        """
        d = self.degree
        g = self.num - Polynomial([0.0, 1.0]) * self.den
        g = _trim_leading(g)
        if g.is_zero:
            raise ValueError("every point is fixed (identity map)")
        finite = poly_roots(g) if g.degree >= 1 else []
        fp = self.derivative()
        out: list[tuple[complex, complex]] = [(r, complex(fp(r))) for r in finite]
        missing = (d + 1) - len(out)
        if missing > 0:
            p, q = self.num.degree, self.den.degree
            if p >= q + 2:
                lam = 0.0 + 0.0j
            elif p == q + 1:
                lam = complex(self.den.coeffs[-1] / self.num.coeffs[-1])
            else:
                raise ValueError("infinity is not fixed but fixed-point count is short")
            out.extend([(INF, lam)] * missing)
        out.sort(key=lambda t: (is_inf(t[0]), t[0].real if not is_inf(t[0]) else 0.0,
                                t[0].imag if not is_inf(t[0]) else 0.0))
        return out

    def critical_points(self) -> list[complex]:
        """All 2d - 2 critical points with multiplicity (INF entries for infinity).

        Finite ones are roots of W = num' den - num den' (a pole of order m is
        critical of order m - 1 and shows up as such a root of W); infinity
        absorbs 2d - 2 - deg W.
        """
        d = self.degree
        if d < 2:
            raise ValueError("critical_points needs degree >= 2")
        w = self.num.derivative() * self.den - self.num * self.den.derivative()
        w = _trim_leading(w)
        finite = poly_roots(w) if w.degree >= 1 else []
        pad = (2 * d - 2) - len(finite)
        if pad < 0:
            raise ValueError("critical polynomial degree exceeds 2d - 2")
        return finite + [INF] * pad

    def critical_values(self) -> list[complex]:
        return [self(c) for c in self.critical_points()]

    def schwarz_reflect(self) -> "RationalMap":
        """conj(f(conj(z))): conjugate every coefficient."""
        return RationalMap(
            Polynomial(np.conj(self.num.coeffs)),
            Polynomial(np.conj(self.den.coeffs)),
            _validate=False,
        )

    def is_real_symmetric(self, tol: float = 1e-12) -> bool:
        """True if f commutes with complex conjugation (maps R to R on the sphere)."""
        return _scalar_equivalent(self, self.schwarz_reflect(), tol)


def _deflate(p: Polynomial, root: complex) -> Polynomial:
    """Synthetic division of p by (z - root); the remainder is discarded."""
    c = p.coeffs
    n = len(c)
    if n <= 1:
        return Polynomial()
    out = np.zeros(n - 1, dtype=complex)
    acc = c[n - 1]
    for k in range(n - 2, -1, -1):
        out[k] = acc
        acc = c[k] + acc * root
    return Polynomial(out)


def _scalar_equivalent(f: RationalMap, g: RationalMap, tol: float) -> bool:
    """Whether f and g have proportional (num, den) coefficient vectors."""
    fc = np.concatenate([f.num.coeffs, f.den.coeffs])
    gc = np.concatenate([g.num.coeffs, g.den.coeffs])
    if len(fc) != len(gc):
        return False
    pivot = int(np.argmax(np.abs(fc)))
    if gc[pivot] == 0:
        return False
    s = fc[pivot] / gc[pivot]
    return bool(np.max(np.abs(fc - s * gc)) <= tol * max(1.0, float(np.max(np.abs(fc)))))
