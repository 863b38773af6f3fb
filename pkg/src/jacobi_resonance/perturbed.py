"""The perturbed operator ``a_n = a0_n + u_n``, ``b_n = b0_n + v_n`` for
``0 <= n <= p``.

The central object is :class:`JostPair`, the polynomial data
``(1 + A, J, P1, P2)`` from which every regularized quantity follows::

    w_hat = (zeta - 1/zeta) (1 + A) - J
    f0    = P1 + m_+ P2
    s_hat = (zeta - 1/zeta) f0 - w_hat

The direct problem builds it from ``(u, v)``; the reconstruction pipeline
builds it from states and zeros.
"""

import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .algebra import Polynomial
from .background import SurfacePoint, weyl_m, weyl_values, zeta_values
from .errors import ClassViolation, DegreeMismatch

DEGREE_TRIM = 1e-9


@dataclass(frozen=True)
class Perturbation:
    u: tuple
    v: tuple

    def __post_init__(self):
        object.__setattr__(self, "u", tuple(float(x) for x in self.u))
        object.__setattr__(self, "v", tuple(float(x) for x in self.v))

    @property
    def p(self):
        return len(self.u) - 1

    @property
    def nu(self):
        return 2 * self.p if self.u[-1] != 0 else 2 * self.p - 1

    def to_json(self):
        return {"p": self.p, "u": list(self.u), "v": list(self.v)}

    @property
    def is_zero(self):
        return not any(self.u) and not any(self.v)

    @classmethod
    def from_json(cls, data):
        pert = cls(tuple(data["u"]), tuple(data["v"]))
        if "p" in data and int(data["p"]) != pert.p:
            raise ValueError(f"p={data['p']} does not match len(u)-1={pert.p}")
        return pert

    @classmethod
    def zero(cls, p=1):
        """The trivial perturbation; outside every class, used for checks."""
        return cls((0.0,) * (p + 1), (0.0,) * (p + 1))


def validate_class(bg, pert):
    """Class index ``nu`` of ``pert``; raises ClassViolation otherwise."""
    u, v = pert.u, pert.v
    if len(u) != len(v):
        raise ClassViolation("u and v must have the same length")
    p = pert.p
    if p < 1:
        raise ClassViolation("support length p must be at least 1")
    for n in range(p + 1):
        if bg.a(n) + u[n] <= 0:
            raise ClassViolation(f"a_{n} = a0_{n} + u_{n} must be positive")
    if v[0] == 0:
        raise ClassViolation("v_0 must be nonzero")
    if u[p] == 0 and v[p] == 0:
        raise ClassViolation("u_p and v_p both vanish; p is not the support length")
    nu = pert.nu
    if nu + 2 * bg.q - 1 < 2 * bg.q + 1:
        warnings.warn(f"state count {nu + 2 * bg.q - 1} is below 2q+1; uniqueness of the inverse "
                      "problem is not covered", stacklevel=2)
    return nu


@dataclass(frozen=True)
class JostPair:
    """Polynomial carriers of ``w_hat`` and ``f0 = f_0^+``."""

    bg: object
    one_plus_a: Polynomial
    j: Polynomial
    p1: Polynomial
    p2: Polynomial

    @property
    def a00(self):
        return self.bg.a(0)

    @cached_property
    def f_poly(self):
        """``4 (1 - Delta^2) (1 + A)^2 + J^2``, the product of w_hat over both sheets."""
        return 4 * self.bg.one_minus_delta_sq * self.one_plus_a**2 + self.j**2

    @cached_property
    def s_carrier(self):
        """``(P, Q)`` with ``s_hat = ((zeta - 1/zeta) P + Q) / phi_q``."""
        bg = self.bg
        P = bg.phi_q * self.p1 + bg.phi_half * self.p2 - bg.phi_q * self.one_plus_a
        Q = -2 * bg.one_minus_delta_sq * self.p2 + bg.phi_q * self.j
        return P.real(), Q.real()

    def w_hat(self, lam, zeta):
        lam = np.asarray(lam, dtype=complex)
        return (zeta - 1.0 / zeta) * self.one_plus_a(lam) - self.j(lam)

    def f0(self, lam, zeta):
        lam = np.asarray(lam, dtype=complex)
        return self.p1(lam) + weyl_values(self.bg, lam, zeta, +1) * self.p2(lam)

    def s_hat(self, lam, zeta):
        lam = np.asarray(lam, dtype=complex)
        return s_hat_eval(self.bg, lam, zeta, self.w_hat(lam, zeta), self.p1, self.p2, self.s_carrier)

    def w_hat_deriv(self, lam, sheet=1):
        """``d w_hat / d lambda`` at real gap points or complex points."""
        lam = np.asarray(lam, dtype=complex)
        zeta = zeta_values(self.bg, lam, sheet)
        two_i_omega = zeta - 1.0 / zeta
        d_two_i_omega = 4 * self.bg.delta(lam) * self.bg.delta.deriv()(lam) / two_i_omega
        return (d_two_i_omega * self.one_plus_a(lam) + two_i_omega * self.one_plus_a.deriv()(lam)
                - self.j.deriv()(lam))

    def at(self, pt):
        """``(w_hat, s_hat, f0)`` at a surface point."""
        zeta = zeta_values(self.bg, np.array([pt.lam]), pt.sheet, pt.side)
        lam = np.array([pt.lam])
        return (complex(self.w_hat(lam, zeta)[0]), complex(self.s_hat(lam, zeta)[0]),
                complex(self.f0(lam, zeta)[0]))


@dataclass(frozen=True)
class JostFamily:
    bg: object
    pert: Perturbation
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    @property
    def p(self):
        return self.pert.p

    @property
    def nu(self):
        return self.pert.nu

    def a(self, n):
        base = self.bg.a(n)
        return base + self.pert.u[n] if 0 <= n <= self.p else base

    def b(self, n):
        base = self.bg.b(n)
        return base + self.pert.v[n] if 0 <= n <= self.p else base

    def plus(self, n):
        """``(theta_n^+, phi_n^+)``: equal to the background at ``n >= p+1``."""
        p = self.p
        if n >= p + 1:
            return self.bg.theta_phi(n)
        cache = self._cache.setdefault("plus", {p + 1: self.bg.theta_phi(p + 1),
                                                p + 2: self.bg.theta_phi(p + 2)})
        lam = Polynomial.x()
        for k in range(min(cache), n, -1):
            (t, f), (tp, fp) = cache[k], cache[k + 1]
            cache[k - 1] = tuple(((lam - self.b(k)) * y - self.a(k) * yp) / self.a(k - 1)
                                 for y, yp in ((t, tp), (f, fp)))
        return cache[n]

    def minus(self, n):
        """``(theta_n^-, phi_n^-)``: equal to the background at ``n <= 0``."""
        if n <= 0:
            return self.bg.theta_phi(n)
        cache = self._cache.setdefault("minus", {-1: self.bg.theta_phi(-1), 0: self.bg.theta_phi(0)})
        lam = Polynomial.x()
        for k in range(max(cache), n):
            (tm, fm), (t, f) = cache[k - 1], cache[k]
            cache[k + 1] = tuple(((lam - self.b(k)) * y - self.a(k - 1) * ym) / self.a(k)
                                 for y, ym in ((t, tm), (f, fm)))
        return cache[n]

    @cached_property
    def constants(self):
        p, nu = self.p, self.nu
        c1 = 1.0 / float(np.prod([self.a(j) for j in range(p + 1)]))
        if nu == 2 * p:
            c2 = c1 * self.pert.u[p] * (self.bg.a(p) + self.a(p))
        else:
            c2 = c1 * self.bg.a(p) ** 2 * self.pert.v[p]
        a_p = float(np.prod([self.bg.a(j) for j in range(p + 1)]))
        return {"A_p": a_p, "c1": c1, "c2": c2, "c3": c1 * c2, "nu": nu}

    @cached_property
    def pair(self):
        bg = self.bg
        if self.pert.is_zero:
            one = Polynomial([1.0])
            return JostPair(bg, one, Polynomial([0.0]), one, Polynomial([0.0]))
        a00, a_0, v0 = bg.a(0), self.a(0), self.pert.v[0]
        t0, f0 = self.plus(0)
        t1, f1 = self.plus(1)
        r = a_0 / a00
        one_plus_a = (r * f1 + (v0 / a00) * f0 + t0) / 2
        j = -(r * bg.phi_q * t1 + bg.phi_half * (r * f1 - t0)
              + (v0 / a00) * (bg.phi_q * t0 + bg.phi_half * f0) + bg.theta_q1 * f0)
        nu, q = self.nu, bg.q
        one_plus_a = _with_degree(one_plus_a.real(), nu - 1, "1 + A")
        j = _with_degree(j.real(), nu + q - 1, "J")
        p1 = _with_degree(t0.real(), max(nu - 2, 0), "theta_0^+")
        p2 = _with_degree(f0.real(), nu - 1, "phi_0^+")
        return JostPair(bg, one_plus_a, j, p1, p2)

    @cached_property
    def f_poly(self):
        if self.pert.is_zero:
            return self.pair.f_poly
        kappa = self.nu + 2 * self.bg.q - 1
        return _with_degree(self.pair.f_poly, kappa, "state polynomial")

    def jost(self, n, lam, zeta, sign):
        """``f_n^+-`` at arrays of points."""
        t, f = self.plus(n) if sign > 0 else self.minus(n)
        lam = np.asarray(lam, dtype=complex)
        return t(lam) + weyl_values(self.bg, lam, zeta, sign) * f(lam)


def s_hat_eval(bg, lam, zeta, w, p1, p2, carrier):
    """``s_hat = 2i Omega f0 - w_hat``.

    The carrier form ``((zeta - 1/zeta) P + Q) / phi_q`` cancels badly near
    Dirichlet points, so it only fills in where the ``f0`` route is not finite.
    """
    zeta = np.asarray(zeta, dtype=complex)
    two_i_omega = zeta - 1.0 / zeta
    with np.errstate(divide="ignore", invalid="ignore"):
        out = two_i_omega * (p1(lam) + weyl_values(bg, lam, zeta, +1) * p2(lam)) - w
        bad = ~np.isfinite(out)
        if np.any(bad):
            P, Q = carrier
            alt = (two_i_omega * P(lam) + Q(lam)) / bg.phi_q(lam)
            out = np.where(bad, alt, out)
    return out


def _with_degree(poly, degree, name):
    """Cut ``poly`` to ``degree`` after checking the dropped part is rounding."""
    c = poly.coeffs
    scale = float(np.max(np.abs(c)))
    if c.size - 1 > degree and np.max(np.abs(c[degree + 1:])) > DEGREE_TRIM * scale:
        raise DegreeMismatch(f"{name} has degree {c.size - 1}, expected {degree}")
    out = poly.truncate(degree)
    if out.degree != degree or abs(out.lead) <= DEGREE_TRIM * scale:
        raise DegreeMismatch(f"{name} has degree {out.degree}, expected {degree}")
    return out


def perturbed_polys(bg, pert):
    validate_class(bg, pert)
    return JostFamily(bg, pert)


def aj_decomposition(bg, pert):
    pair = perturbed_polys(bg, pert).pair
    return {"A": pair.one_plus_a - 1, "J": pair.j}


def f_polynomial(bg, pert):
    return perturbed_polys(bg, pert).f_poly


def jost_eval(bg, pert, n, pt, sign):
    fam = JostFamily(bg, pert)
    t, f = fam.plus(n) if sign > 0 else fam.minus(n)
    return complex(t(pt.lam) + weyl_m(bg, pt, sign) * f(pt.lam))


def wronskians(bg, pert, pt):
    """``w``, ``s`` and their regularized forms at a surface point."""
    fam = JostFamily(bg, pert)
    lam = pt.lam
    a00 = bg.a(0)
    mp, mm = weyl_m(bg, pt, +1), weyl_m(bg, pt, -1)
    (t0, f0), (t1, f1) = fam.plus(0), fam.plus(1)
    jost0 = t0(lam) + mp * f0(lam)
    jost1 = t1(lam) + mp * f1(lam)
    v0 = pert.v[0]
    w = fam.a(0) * jost1 + (v0 - a00 * mm) * jost0
    s = (a00 * mp - v0) * jost0 - fam.a(0) * jost1
    scale = bg.phi_q(lam) / a00
    return {"w": complex(w), "s": complex(s), "w_hat": complex(scale * w), "s_hat": complex(scale * s)}


def wronskian_at(fam, n, lam, zeta_f, zeta_g, sign_f, sign_g):
    """Discrete Wronskian ``a_n (f_n g_{n+1} - f_{n+1} g_n)`` of two Jost solutions."""
    f_n = fam.jost(n, lam, zeta_f, sign_f)
    f_n1 = fam.jost(n + 1, lam, zeta_f, sign_f)
    g_n = fam.jost(n, lam, zeta_g, sign_g)
    g_n1 = fam.jost(n + 1, lam, zeta_g, sign_g)
    return fam.a(n) * (f_n * g_n1 - f_n1 * g_n)


def point_arrays(bg, pts):
    """``(lam, zeta)`` arrays for a list of surface points."""
    lam = np.array([pt.lam for pt in pts], dtype=complex)
    zeta = np.array([complex(zeta_values(bg, np.array([pt.lam]), pt.sheet, pt.side)[0]) for pt in pts])
    return lam, zeta


__all__ = [
    "Perturbation", "JostFamily", "JostPair", "SurfacePoint", "validate_class", "perturbed_polys",
    "aj_decomposition", "f_polynomial", "jost_eval", "wronskians",
]
