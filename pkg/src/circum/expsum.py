"""Exponential sums, their zeros, and the exceptional quotient family.

An exponential sum is g(z) = sum_k a_k exp(i mu_k z) with real frequencies
mu_k.  Zeros in a rectangle are counted by the argument principle and then
located by bisection plus Newton refinement.  The quotient family

    f(z) = L( (1 - e^{i(c1 z - b1)}) / (1 - e^{i(c2 z - b2)}) )

with L a Moebius map is the borderline family for which preimage sets of
three values can all be real; solving f(z) = a reduces to a three-term
exponential sum, which is what `exceptional_preimage_equation` builds.

Accuracy note: a double zero of g sits at the bottom of a quadratic valley,
so complex Newton stalls around 1e-8 from it once |g| reaches rounding noise.
When g is conjugate-symmetric up to a phase rotation (detected by
`real_symmetry_phase`), the refinement restricts to the real axis in real
arithmetic instead, which pins real zeros at imaginary part exactly zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .algebra import INF, CircumError, Mobius, is_inf

__all__ = [
    "ExpSum",
    "ExceptionalParams",
    "ZeroReport",
    "CaseVerdict",
    "OverflowGuardError",
    "ContourError",
    "expsum_eval",
    "expsum_derivative",
    "count_zeros_rect",
    "locate_zeros_rect",
    "real_symmetry_phase",
    "exceptional_eval",
    "exceptional_preimage_equation",
    "circle_case_classifier",
]

_EXP_CAP = 700.0  # |Im z| * max|mu| beyond this would overflow exp


class OverflowGuardError(CircumError):
    """Evaluation point too deep in the strip for double-precision exp."""


class ContourError(CircumError):
    """Winding-number integration could not be certified."""


class ExpSum:
    """g(z) = sum_k coeffs[k] * exp(i * freqs[k] * z), freqs real and distinct.

    Terms are merged when frequencies agree within 1e-12 and dropped when the
    merged coefficient is exactly zero; the zero sum (no terms) is allowed as
    the derivative of a constant, but most operations reject it.
    """

    __slots__ = ("coeffs", "freqs")

    def __init__(self, terms: Sequence[tuple[complex, float]]):
        items = sorted(((float(f), complex(c)) for c, f in terms), key=lambda t: t[0])
        freqs: list[float] = []
        coeffs: list[complex] = []
        for f, c in items:
            if freqs and abs(f - freqs[-1]) <= 1e-12:
                coeffs[-1] += c
            else:
                freqs.append(f)
                coeffs.append(c)
        keep = [k for k in range(len(freqs)) if coeffs[k] != 0]
        self.freqs = np.array([freqs[k] for k in keep], dtype=float)
        self.coeffs = np.array([coeffs[k] for k in keep], dtype=complex)

    @property
    def terms(self) -> list[tuple[complex, float]]:
        return [(complex(c), float(f)) for c, f in zip(self.coeffs, self.freqs)]

    @property
    def is_zero(self) -> bool:
        return len(self.freqs) == 0

    def __repr__(self) -> str:
        return f"ExpSum({[(c, f) for c, f in self.terms]!r})"

    def _guard(self, z):
        if len(self.freqs) == 0:
            return
        max_im = float(np.max(np.abs(np.imag(np.atleast_1d(z)))))
        max_f = float(np.max(np.abs(self.freqs)))
        if max_im * max_f >= _EXP_CAP:
            raise OverflowGuardError(
                f"|Im z| * max|freq| = {max_im * max_f:.3g} >= {_EXP_CAP:g}"
            )

    def __call__(self, z):
        self._guard(z)
        if isinstance(z, np.ndarray):
            if self.is_zero:
                return np.zeros(z.shape, dtype=complex)
            e = np.exp(1j * np.multiply.outer(z, self.freqs))
            return e @ self.coeffs
        if self.is_zero:
            return 0.0 + 0.0j
        return complex(np.sum(self.coeffs * np.exp(1j * self.freqs * complex(z))))

    def eval_with_derivative(self, z):
        """(g(z), g'(z)) sharing one set of exponentials."""
        self._guard(z)
        if self.is_zero:
            zero = np.zeros(np.shape(z), dtype=complex) if isinstance(z, np.ndarray) else 0j
            return zero, zero
        if isinstance(z, np.ndarray):
            e = np.exp(1j * np.multiply.outer(z, self.freqs))
            return e @ self.coeffs, e @ (1j * self.freqs * self.coeffs)
        e = np.exp(1j * self.freqs * complex(z))
        return (
            complex(np.sum(self.coeffs * e)),
            complex(np.sum(1j * self.freqs * self.coeffs * e)),
        )

    def derivative(self) -> "ExpSum":
        """Term-wise derivative; a zero-frequency term differentiates away."""
        return ExpSum([(1j * f * c, f) for c, f in self.terms])

    def conjugate_reflected(self) -> "ExpSum":
        """h with h(z) = conj(g(conj(z)))."""
        return ExpSum([(np.conj(c), -f) for c, f in self.terms])

    def sup_bound(self, im_lo: float, im_hi: float) -> float:
        """sum_k |a_k| max(e^{-mu_k im_lo}, e^{-mu_k im_hi}), a sup bound on the strip."""
        if self.is_zero:
            return 0.0
        e = np.maximum(np.exp(-self.freqs * im_lo), np.exp(-self.freqs * im_hi))
        return float(np.sum(np.abs(self.coeffs) * e))


def expsum_eval(g: ExpSum, z):
    return g(z)


def expsum_derivative(g: ExpSum) -> ExpSum:
    return g.derivative()


def real_symmetry_phase(g: ExpSum, tol: float = 1e-9) -> tuple[float, float] | None:
    """(gamma, delta) making e^{i delta} e^{i gamma z} g(z) conjugate-symmetric.

    Conjugate-symmetric means h(conj z) = conj(h(z)), i.e. h is real on the
    real axis.  Requires the frequency list to be symmetric about its center
    and mirrored coefficients to be conjugate up to one common phase.
    Returns None when no such rotation exists.
    """
    if g.is_zero:
        return None
    mu = g.freqs
    m = len(mu)
    gamma = -(mu[0] + mu[-1]) / 2.0
    nu = mu + gamma
    if float(np.max(np.abs(nu + nu[::-1]))) > tol:
        return None
    a = g.coeffs
    scale = float(np.max(np.abs(a)))
    phase = None
    for i in range(m):
        j = m - 1 - i
        if abs(abs(a[i]) - abs(a[j])) > tol * scale:
            return None
        w = np.conj(a[i]) / a[j]
        if phase is None:
            phase = w
        elif abs(w - phase) > 10.0 * tol:
            return None
    delta = float(np.angle(phase)) / 2.0
    return float(gamma), delta


# --- argument-principle machinery ------------------------------------------

_GL32 = np.polynomial.legendre.leggauss(32)
_GL16 = np.polynomial.legendre.leggauss(16)


def _segment_integral(g: ExpSum, a: complex, b: complex, nodes) -> complex:
    x, w = nodes
    z = a + (b - a) * (x + 1.0) / 2.0
    gv, gd = g.eval_with_derivative(z)
    if np.any(gv == 0):
        raise ContourError("contour passes exactly through a zero")
    return complex(np.sum(w * gd / gv) * (b - a) / 2.0)


def _adaptive_segment(g: ExpSum, a: complex, b: complex, depth: int = 0) -> complex:
    coarse = _segment_integral(g, a, b, _GL16)
    fine = _segment_integral(g, a, b, _GL32)
    if abs(fine - coarse) <= 0.01:
        return fine
    if depth >= 48:
        raise ContourError("contour quadrature failed to converge")
    mid = (a + b) / 2.0
    return _adaptive_segment(g, a, mid, depth + 1) + _adaptive_segment(g, mid, b, depth + 1)


def _winding(g: ExpSum, rect: tuple[float, float, float, float]) -> float:
    x0, x1, y0, y1 = rect
    corners = [
        complex(x0, y0),
        complex(x1, y0),
        complex(x1, y1),
        complex(x0, y1),
    ]
    total = 0.0 + 0.0j
    for k in range(4):
        total += _adaptive_segment(g, corners[k], corners[(k + 1) % 4])
    return float((total / (2.0j * np.pi)).real)


def _boundary_min_ratio(g: ExpSum, rect: tuple[float, float, float, float],
                        samples: int = 256) -> float:
    """min|g| / max|g| over boundary samples."""
    x0, x1, y0, y1 = rect
    t = np.linspace(0.0, 1.0, samples // 4, endpoint=False)
    edges = np.concatenate([
        x0 + (x1 - x0) * t + 1j * y0,
        x1 + 1j * (y0 + (y1 - y0) * t),
        x1 + (x0 - x1) * t + 1j * y1,
        x0 + 1j * (y1 + (y0 - y1) * t),
    ])
    vals = np.abs(g(edges))
    mx = float(np.max(vals))
    if mx == 0.0:
        return 0.0
    return float(np.min(vals)) / mx


def _dilate(rect, factor):
    x0, x1, y0, y1 = rect
    cx, cy = (x0 + x1) / 2.0, (y0 + y1) / 2.0
    hx, hy = (x1 - x0) / 2.0 * factor, (y1 - y0) / 2.0 * factor
    return (cx - hx, cx + hx, cy - hy, cy + hy)


def _count_raw(g: ExpSum, rect) -> int:
    w = _winding(g, rect)
    if abs(w - round(w)) > 0.25:
        raise ContourError(f"winding number {w:.4f} is not close to an integer")
    n = int(round(w))
    if n < 0:
        raise ContourError(f"negative winding number {n} (contour orientation broken)")
    return n


def count_zeros_rect(g: ExpSum, rect: tuple[float, float, float, float]) -> int:
    """Number of zeros of g in the rectangle, with multiplicity.

    The rectangle is (x0, x1, y0, y1).  If the boundary runs too close to a
    zero (min |g| below 1e-9 of the boundary max) the rectangle is dilated
    about its center by a factor 1 + 1e-4, at most five times, and the count
    is for the dilated rectangle.

    Raises
    ------
    ContourError
        Winding not certifiably an integer, or the boundary could not be
        moved off the zero set.
    """
    if g.is_zero:
        raise ValueError("cannot count zeros of the zero sum")
    x0, x1, y0, y1 = rect
    if not (x0 < x1 and y0 < y1):
        raise ValueError("rectangle must have positive width and height")
    r = tuple(float(v) for v in rect)
    for _ in range(6):
        if _boundary_min_ratio(g, r) > 1e-9:
            return _count_raw(g, r)
        r = _dilate(r, 1.0 + 1e-4)
    raise ContourError("boundary stays within 1e-9 of a zero after 5 dilations")


@dataclass
class ZeroReport:
    """Zeros of an exponential sum in a rectangle.

    zeros is a flat list, multiple zeros repeated; count is the winding total
    and equals len(zeros) when refinement succeeded for every cluster.
    max_abs_im_of_real_candidates covers the zeros classified as real
    (|Im z| < 1e-8 * (1 + |Re z|)); it is None when there are none.
    """

    rectangle: tuple[float, float, float, float]
    count: int
    zeros: list[complex] = field(default_factory=list)
    max_abs_im_of_real_candidates: float | None = None
    max_residual: float = 0.0


def _newton(g: ExpSum, z0: complex, mult: int, iters: int = 80) -> complex:
    z = complex(z0)
    try:
        v, d = g.eval_with_derivative(z)
    except OverflowGuardError:
        return z
    for _ in range(iters):
        if d == 0:
            break
        step = mult * v / d
        # halve the step until |g| stops increasing; a full step from a poor
        # start can drift out of the strip and through the overflow guard
        accepted = False
        for _ in range(20):
            try:
                z2 = z - step
                v2, d2 = g.eval_with_derivative(z2)
            except OverflowGuardError:
                step /= 2.0
                continue
            if abs(v2) <= abs(v) or abs(step) < 1e-15 * (1.0 + abs(z)):
                accepted = True
                break
            step /= 2.0
        if not accepted:
            break
        z, v, d = z2, v2, d2
        if abs(step) < 1e-13 * (1.0 + abs(z)):
            break
    return z


def _newton_real(g: ExpSum, gamma: float, delta: float, x0: float, mult: int) -> float:
    """Newton in real arithmetic on h(x) = Re(e^{i delta} e^{i gamma x} g(x))."""
    c = np.exp(1j * delta)
    x = float(x0)
    for _ in range(80):
        v, d = g.eval_with_derivative(complex(x))
        rot = c * np.exp(1j * gamma * x)
        h = (rot * v).real
        # (d/dx) [e^{i delta} e^{i gamma x} g(x)] = rot * (i gamma g + g')
        hp = (rot * (1j * gamma * v + d)).real
        if hp == 0.0:
            break
        step = mult * h / hp
        x -= step
        if abs(step) < 1e-13 * (1.0 + abs(x)):
            break
    return x


# deliberately no 0.5 and nothing rational-looking: for a strip symmetric
# about the real axis an exact-half split runs straight through the real
# zeros, and such a boundary can never be subdivided away by the children
_SPLIT_FRACTIONS = (0.5136, 0.4787, 0.5573, 0.4368, 0.5892, 0.4147, 0.6021)


def _subdivide(g: ExpSum, rect, count: int, out: list[tuple[complex, int]], depth: int):
    """Recursive bisection down to single zeros or tiny multiplicity clusters."""
    x0, x1, y0, y1 = rect
    diam = np.hypot(x1 - x0, y1 - y0)
    if count == 0:
        return
    # single-zero cells are still shrunk to diameter ~1 so Newton starts next
    # to its zero; from the center of a strip-sized cell it can wander off to
    # one of the almost-periodic far-field copies instead
    if (count == 1 and diam <= 1.0) or diam < 1e-9 or depth > 64:
        center = complex((x0 + x1) / 2.0, (y0 + y1) / 2.0)
        out.append((center, count))
        return
    horizontal = (x1 - x0) >= (y1 - y0)
    for frac in _SPLIT_FRACTIONS:
        if horizontal:
            xm = x0 + (x1 - x0) * frac
            r1, r2 = (x0, xm, y0, y1), (xm, x1, y0, y1)
        else:
            ym = y0 + (y1 - y0) * frac
            r1, r2 = (x0, x1, y0, ym), (x0, x1, ym, y1)
        try:
            if _boundary_min_ratio(g, r1) <= 1e-9 or _boundary_min_ratio(g, r2) <= 1e-9:
                continue
            c1 = _count_raw(g, r1)
            c2 = _count_raw(g, r2)
        except ContourError:
            continue
        if c1 + c2 != count:
            continue
        _subdivide(g, r1, c1, out, depth + 1)
        _subdivide(g, r2, c2, out, depth + 1)
        return
    if diam < 1e-4:
        # winding inside the valley of a multiple zero is numerically mushy;
        # treat the cell as one multiplicity-count cluster and let Newton finish
        center = complex((x0 + x1) / 2.0, (y0 + y1) / 2.0)
        out.append((center, count))
        return
    raise ContourError("bisection could not separate zeros (all split lines failed)")


def locate_zeros_rect(g: ExpSum, rect: tuple[float, float, float, float]) -> ZeroReport:
    """Count and locate all zeros of g in the rectangle.

    Bisection isolates zeros (or tight clusters), Newton refines each, with
    the multiplicity-m correction z -> z - m g/g' on clusters.  If g is
    conjugate-symmetric up to a phase rotation, near-real candidates are
    re-refined on the real axis, which makes genuinely real zeros exactly
    real.  Residuals are validated against 1e-8 times a sup bound for |g|
    over the rectangle's strip.
    """
    count = count_zeros_rect(g, rect)
    report = ZeroReport(rectangle=tuple(float(v) for v in rect), count=count)
    if count == 0:
        return report
    clusters: list[tuple[complex, int]] = []
    _subdivide(g, tuple(float(v) for v in rect), count, clusters, 0)
    sym = real_symmetry_phase(g)
    x0, x1, y0, y1 = report.rectangle
    zeros: list[complex] = []
    for center, mult in clusters:
        z = _newton(g, center, mult)
        if not (x0 - 1e-6 <= z.real <= x1 + 1e-6 and y0 - 1e-6 <= z.imag <= y1 + 1e-6):
            z = _newton(g, center, mult, iters=200)
        if sym is not None and abs(z.imag) < 1e-6 * (1.0 + abs(z.real)):
            gamma, delta = sym
            z = complex(_newton_real(g, gamma, delta, z.real, mult), 0.0)
        zeros.extend([z] * mult)
    zeros.sort(key=lambda w: (w.real, w.imag))
    report.zeros = zeros
    bound = g.sup_bound(min(y0, y1), max(y0, y1))
    worst = max(abs(g(z)) for z in zeros) / bound if zeros else 0.0
    report.max_residual = float(worst)
    if worst > 1e-8:
        raise ContourError(f"zero residual {worst:.3e} above 1e-8 of the strip bound")
    real_ims = [
        abs(z.imag) for z in zeros if abs(z.imag) < 1e-8 * (1.0 + abs(z.real))
    ]
    report.max_abs_im_of_real_candidates = max(real_ims) if real_ims else None
    return report


# --- the exceptional quotient family ---------------------------------------


@dataclass(frozen=True)
class ExceptionalParams:
    """Parameters of f(z) = L((1 - e^{i(c1 z - b1)}) / (1 - e^{i(c2 z - b2)})).

    c1, c2 must not both vanish.  L is any invertible Moebius map, identity
    by default.
    """

    c1: float
    b1: float
    c2: float
    b2: float
    L: Mobius = Mobius.identity()

    def __post_init__(self):
        if self.c1 == 0.0 and self.c2 == 0.0:
            raise ValueError("c1 and c2 cannot both be zero")

    def numerator(self) -> ExpSum:
        return ExpSum([(1.0, 0.0), (-np.exp(-1j * self.b1), self.c1)])

    def denominator(self) -> ExpSum:
        return ExpSum([(1.0, 0.0), (-np.exp(-1j * self.b2), self.c2)])

    def as_quotient(self) -> tuple[ExpSum, ExpSum]:
        """(N, D) with f = N/D, L already folded in."""
        n, d = self.numerator(), self.denominator()
        top = ExpSum(
            [(self.L.a * c, f) for c, f in n.terms]
            + [(self.L.b * c, f) for c, f in d.terms]
        )
        bottom = ExpSum(
            [(self.L.c * c, f) for c, f in n.terms]
            + [(self.L.d * c, f) for c, f in d.terms]
        )
        return top, bottom

    def __call__(self, z: complex) -> complex:
        return exceptional_eval(self, z)


def exceptional_eval(params: ExceptionalParams, z: complex) -> complex:
    """f(z) for the quotient family, resolving exact 0/0 points by one
    derivative step (the shared zeros of both factors are removable)."""
    num = params.numerator()
    den = params.denominator()
    nv = num(z)
    dv = den(z)
    if nv == 0 and dv == 0:
        nv = num.derivative()(z)
        dv = den.derivative()(z)
    if dv == 0:
        return params.L(INF) if nv != 0 else params.L(0.0)
    ratio = nv / dv
    return params.L(INF) if is_inf(ratio) else params.L(complex(ratio))


def exceptional_preimage_equation(params: ExceptionalParams, a: complex) -> ExpSum:
    """The exponential sum whose zeros are the solutions of f(z) = a.

    With alpha = L^{-1}(a) the equation is num - alpha * den = 0, i.e.

        (1 - alpha) - e^{-i b1} e^{i c1 z} + alpha e^{-i b2} e^{i c2 z} = 0;

    alpha = inf swaps the roles and the equation is den = 0.

    Raises
    ------
    ValueError
        The merged sum is constant: either identically zero (f is constant)
        or a nonzero constant (a is an omitted value with no preimages).
    """
    alpha = params.L.inverse()(a)
    if is_inf(alpha):
        eq = params.denominator()
    else:
        eq = ExpSum(
            [
                (1.0 - alpha, 0.0),
                (-np.exp(-1j * params.b1), params.c1),
                (alpha * np.exp(-1j * params.b2), params.c2),
            ]
        )
    if eq.is_zero:
        raise ValueError("preimage equation vanishes identically (constant map)")
    if len(eq.freqs) == 1 and eq.freqs[0] == 0.0:
        raise ValueError("value has no preimages (equation is a nonzero constant)")
    return eq


@dataclass
class CaseVerdict:
    """Output of circle_case_classifier.

    kind is "MapsRealLineToCircle" or "GenericNonReal".  matched_rule names
    the parameter condition that fired, None for the generic case.
    nonreal_evidence lists located zeros off the real axis backing a generic
    verdict; reports holds the strip zero reports when verification ran.
    """

    kind: str
    matched_rule: str | None
    equation: ExpSum
    nonreal_evidence: list[complex] = field(default_factory=list)
    reports: list[ZeroReport] = field(default_factory=list)


_DEFAULT_STRIP = (-20.0, 20.0, 0.05, 5.0)


def circle_case_classifier(
    c: float,
    b: float,
    a: complex,
    strip: tuple[float, float, float, float] | None = None,
    verify: bool = True,
) -> CaseVerdict:
    """Classify the normalized family f(z) = (1 - e^{iz}) / (1 - e^{i(cz + b)}).

    The real line maps onto a single circline exactly when c = 0, c = 1, or
    (a, c, e^{ib}) = (-1, -1, 1); otherwise the preimages of a generic value
    a leave the real axis.  The verdict is decided from the parameters (at
    tolerance 1e-12) and, when verify is set, cross-checked by locating the
    zeros of the preimage equation for a in the given horizontal strip and
    its mirror image.

    Raises
    ------
    ValueError
        Degenerate parameters (the quotient collapses to a constant).
    """
    params = ExceptionalParams(c1=1.0, b1=0.0, c2=float(c), b2=-float(b))
    eq = exceptional_preimage_equation(params, a)  # also rejects degenerate a
    if abs(c) <= 1e-12 and abs(np.exp(1j * b) - 1.0) <= 1e-12:
        raise ValueError("degenerate parameters: denominator vanishes identically")
    if abs(c - 1.0) <= 1e-12 and abs(np.exp(1j * b) - 1.0) <= 1e-12:
        raise ValueError("degenerate parameters: f is identically 1")
    rule = None
    if abs(c) <= 1e-12:
        rule = "c=0"
    elif abs(c - 1.0) <= 1e-12:
        rule = "c=1"
    elif abs(complex(a) + 1.0) <= 1e-12 and abs(c + 1.0) <= 1e-12 and abs(np.exp(1j * b) - 1.0) <= 1e-12:
        rule = "a=-1,c=-1,e^{ib}=1"
    kind = "MapsRealLineToCircle" if rule is not None else "GenericNonReal"
    verdict = CaseVerdict(kind=kind, matched_rule=rule, equation=eq)
    if not verify:
        return verdict
    x0, x1, y0, y1 = strip if strip is not None else _DEFAULT_STRIP
    for band in ((x0, x1, y0, y1), (x0, x1, -y1, -y0)):
        rep = locate_zeros_rect(eq, band)
        verdict.reports.append(rep)
        verdict.nonreal_evidence.extend(
            z for z in rep.zeros if abs(z.imag) > 1e-6 * (1.0 + abs(z.real))
        )
    return verdict
