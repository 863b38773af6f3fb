"""Dense complex polynomials, root finding with multiplicity clustering,
Chebyshev interpolation and polynomial square roots.

Coefficients are stored in ascending order, ``coeffs[k]`` multiplies ``x**k``.
"""

from typing import NamedTuple

import numpy as np
from numpy.polynomial import chebyshev as C
from numpy.polynomial import polynomial as P

from .errors import DegreeZero, DuplicateNode, NotAPerfectSquare

CLUSTER_RADIUS = 1e-7
REAL_TOL = 1e-9
EXTENDED_DEGREE = 20


class Polynomial:
    """Immutable polynomial with complex coefficients in the monomial basis."""

    __slots__ = ("_c",)

    def __init__(self, coeffs=(0.0,)):
        c = np.array(coeffs, dtype=complex).ravel()
        if c.size == 0:
            c = np.zeros(1, dtype=complex)
        nz = np.flatnonzero(c)
        c = c[: nz[-1] + 1] if nz.size else c[:1] * 0
        c.flags.writeable = False
        self._c = c

    # construction helpers
    @classmethod
    def x(cls):
        return cls([0.0, 1.0])

    @classmethod
    def constant(cls, value):
        return cls([value])

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        """Build ``lead * prod (x - r)**m`` from complex roots or (root, mult) pairs."""
        flat = []
        for r in roots:
            if isinstance(r, tuple):
                flat.extend([r[0]] * int(r[1]))
            else:
                flat.append(r)
        c = np.array([1.0 + 0j])
        for r in flat:
            c = P.polymul(c, [-r, 1.0])
        return cls(lead * c)

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return -1 if self.is_zero() else self._c.size - 1

    @property
    def lead(self):
        return complex(self._c[-1])

    def is_zero(self):
        return self._c.size == 1 and self._c[0] == 0

    def is_real(self, tol=REAL_TOL):
        scale = max(1.0, float(np.max(np.abs(self._c))))
        return bool(np.max(np.abs(self._c.imag)) <= tol * scale)

    def real(self):
        """Copy with imaginary parts dropped."""
        return Polynomial(self._c.real)

    def conj(self):
        return Polynomial(self._c.conj())

    def truncate(self, degree):
        """Drop every coefficient above ``degree``."""
        return Polynomial(self._c[: degree + 1])

    def trim(self, tol):
        """Drop trailing coefficients below ``tol`` times the largest one."""
        c = self._c
        if c.size == 1:
            return self
        cut = tol * np.max(np.abs(c))
        k = c.size
        while k > 1 and abs(c[k - 1]) <= cut:
            k -= 1
        return Polynomial(c[:k])

    def deriv(self, m=1):
        return Polynomial(P.polyder(self._c, m))

    def __call__(self, x):
        x = np.asarray(x)
        out = np.zeros_like(x, dtype=complex)
        for c in self._c[::-1]:
            out = out * x + c
        return out if out.ndim else complex(out)

    def _coerce(self, other):
        if isinstance(other, Polynomial):
            return other._c
        return np.array([other], dtype=complex)

    def __add__(self, other):
        return Polynomial(P.polyadd(self._c, self._coerce(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Polynomial(P.polysub(self._c, self._coerce(other)))

    def __rsub__(self, other):
        return Polynomial(P.polysub(self._coerce(other), self._c))

    def __neg__(self):
        return Polynomial(-self._c)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return Polynomial(P.polymul(self._c, other._c))
        return Polynomial(self._c * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Polynomial(self._c / scalar)

    def __pow__(self, n):
        out = Polynomial([1.0])
        for _ in range(int(n)):
            out = out * self
        return out

    def divmod(self, other):
        quo, rem = P.polydiv(self._c, other._c)
        return Polynomial(quo), Polynomial(rem)

    def compose_affine(self, scale, shift):
        """Return ``x -> self(scale * x + shift)``."""
        lin = Polynomial([shift, scale])
        out = Polynomial([0.0])
        for c in self._c[::-1]:
            out = out * lin + c
        return out

    def allclose(self, other, rtol=1e-10, atol=0.0):
        a, b = self._c, other._c
        n = max(a.size, b.size)
        a = np.pad(a, (0, n - a.size))
        b = np.pad(b, (0, n - b.size))
        scale = max(np.max(np.abs(a)), np.max(np.abs(b)), 1e-300)
        return bool(np.max(np.abs(a - b)) <= atol + rtol * scale)

    def __eq__(self, other):
        return isinstance(other, Polynomial) and np.array_equal(self._c, other._c)

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"Polynomial({self._c.tolist()!r})"

    def to_json(self):
        """Ascending list of ``[re, im]`` pairs."""
        return [[float(c.real), float(c.imag)] for c in self._c]

    @classmethod
    def from_json(cls, data):
        return cls([complex(re, im) for re, im in data])


class Root(NamedTuple):
    value: complex
    multiplicity: int


def poly_eval_arith(p, q, x):
    """Sum, product and value of ``p`` at ``x``."""
    return {"sum": p + q, "product": p * q, "evaluation": p(x)}


# compensated Horner

def _two_sum(a, b):
    s = a + b
    z = s - a
    return s, (a - (s - z)) + (b - z)


_SPLIT = 134217729.0  # 2**27 + 1


def _two_prod(a, b):
    p = a * b
    ah = a * _SPLIT
    ah = ah - (ah - a)
    al = a - ah
    bh = b * _SPLIT
    bh = bh - (bh - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def horner_compensated(coeffs, x):
    """Evaluate a polynomial at a complex point with twofold compensated Horner.

    Every real product and sum is split into a value and its rounding error;
    the errors are accumulated in a second Horner pass and added back.
    """
    xr, xi = float(np.real(x)), float(np.imag(x))
    c = np.asarray(coeffs, dtype=complex)
    sr, si = float(c[-1].real), float(c[-1].imag)
    er, ei = 0.0, 0.0
    for a in c[-2::-1]:
        p1, e1 = _two_prod(sr, xr)
        p2, e2 = _two_prod(-si, xi)
        p3, e3 = _two_prod(sr, xi)
        p4, e4 = _two_prod(si, xr)
        t, e5 = _two_sum(p1, p2)
        nr, e6 = _two_sum(t, float(a.real))
        t, e7 = _two_sum(p3, p4)
        ni, e8 = _two_sum(t, float(a.imag))
        # error term: e * x + local errors
        er, ei = er * xr - ei * xi + (e1 + e2 + e5 + e6), er * xi + ei * xr + (e3 + e4 + e7 + e8)
        sr, si = nr, ni
    return complex(sr + er, si + ei)


def _eval(p, x, extended):
    if extended:
        return horner_compensated(p.coeffs, x)
    return p(x)


def cluster_points(values, radius=CLUSTER_RADIUS):
    """Single-linkage clustering of complex points; returns list of index lists."""
    values = list(values)
    n = len(values)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            scale = max(1.0, abs(values[i]), abs(values[j]))
            if abs(values[i] - values[j]) <= radius * scale:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def poly_roots(p, cluster_radius=CLUSTER_RADIUS, extended=None):
    """Roots of ``p`` with multiplicities.

    Companion-matrix eigenvalues, one guarded Newton step per root, then
    clustering of numerically coincident roots. ``extended`` switches the
    Newton step to compensated evaluation; by default it is on for degree
    above 20.
    """
    if p.is_zero():
        raise DegreeZero("the zero polynomial has no well defined roots")
    if p.degree == 0:
        return []
    if extended is None:
        extended = p.degree > EXTENDED_DEGREE
    c = p.coeffs
    if p.degree == 1:
        raw = np.array([-c[0] / c[1]])
    else:
        raw = np.linalg.eigvals(P.polycompanion(c))
    dp = p.deriv()
    polished = []
    for r in raw:
        fr = _eval(p, r, extended)
        d = _eval(dp, r, extended)
        if d != 0:
            # a near-zero derivative can throw the step far away; such a step is discarded
            with np.errstate(over="ignore", invalid="ignore"):
                cand = r - fr / d
                fc = _eval(p, cand, extended)
            if np.isfinite(cand) and np.isfinite(fc) and abs(fc) < abs(fr):
                r = cand
        polished.append(complex(r))
    out = []
    for group in cluster_points(polished, cluster_radius):
        centre = complex(np.mean([polished[i] for i in group]))
        out.append(Root(centre, len(group)))
    out.sort(key=lambda r: (round(r.value.real, 12), r.value.imag))
    return out


def poly_interpolate(nodes, values):
    """Interpolating polynomial of degree < len(nodes).

    The nodes are mapped affinely onto [-1, 1] and the system is solved in the
    Chebyshev basis before converting back to monomials.
    """
    x = np.asarray(nodes, dtype=complex).ravel()
    y = np.asarray(values, dtype=complex).ravel()
    if x.size != y.size or x.size == 0:
        raise ValueError("nodes and values must be non-empty and of equal length")
    centre = 0.5 * (x.real.max() + x.real.min()) + 0.5j * (x.imag.max() + x.imag.min())
    half = float(np.max(np.abs(x - centre))) or 1.0
    for i in range(x.size):
        if np.any(np.abs(x[i + 1:] - x[i]) <= 1e-14 * max(half, abs(centre), 1.0)):
            raise DuplicateNode(f"node {x[i]} repeated")
    s = (x - centre) / half
    V = C.chebvander(s, x.size - 1)
    b = np.linalg.solve(V, y)
    mono = Polynomial(C.cheb2poly(b))
    return mono.compose_affine(1.0 / half, -centre / half)


def poly_sqrt(p, leading_sign=1, rtol=1e-7):
    """Real polynomial ``r`` with ``r**2 == p`` and ``sign(r.lead) == leading_sign``.

    The top half of the coefficients fixes ``r`` exactly; a few Gauss-Newton
    sweeps on the full residual then absorb rounding in the input. The input
    is rejected when the relative coefficient residual stays above ``rtol``.
    """
    if p.is_zero():
        return Polynomial([0.0])
    if not p.is_real():
        raise NotAPerfectSquare("input has non-real coefficients")
    c = p.coeffs.real
    n = c.size - 1
    if n % 2 or c[-1] <= 0:
        raise NotAPerfectSquare(f"degree {n} with leading coefficient {c[-1]:.3g} is not a square")
    d = n // 2
    r = np.zeros(d + 1)
    r[d] = np.sign(leading_sign) * np.sqrt(c[-1])
    for k in range(1, d + 1):
        acc = sum(r[d - i] * r[d - k + i] for i in range(1, k))
        r[d - k] = (c[n - k] - acc) / (2.0 * r[d])
    scale = np.max(np.abs(c))
    for _ in range(4):
        res = P.polymul(r, r) - c
        jac = np.zeros((n + 1, d + 1))
        for j in range(d + 1):
            jac[j: j + d + 1, j] = 2.0 * r
        step = np.linalg.lstsq(jac, res, rcond=None)[0]
        r = r - step
    res = np.max(np.abs(P.polymul(r, r) - c)) / scale
    if res > rtol:
        raise NotAPerfectSquare(f"relative residual {res:.3g} exceeds {rtol:.1g}")
    return Polynomial(r)
