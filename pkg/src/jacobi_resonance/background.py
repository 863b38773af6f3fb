"""The unperturbed q-periodic Jacobi operator.

Conventions: ``a0 = (a_1, ..., a_q)`` with ``a_0 = a_q`` and likewise for
``b0``. The operator acts by ``(Hy)_n = a_{n-1} y_{n-1} + a_n y_{n+1} + b_n y_n``.

On the two-sheeted surface every point is described by its Floquet
multiplier ``zeta = Delta + i Omega``. Sheet 1 is ``|zeta| < 1`` off the
spectrum, sheet 2 swaps ``zeta`` and ``1/zeta``. Boundary values on a band
interior carry a side tag, +1 for the limit from the upper half plane.
"""

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .algebra import CLUSTER_RADIUS, Polynomial, poly_roots
from .errors import NormalizationViolated, OnSlit, PoleAtDirichletPoint, SquareRootSingularity

NORMALIZATION_TOL = 1e-12
# imaginary parts below this (relative to |lambda|) count as boundary values
REAL_AXIS_TOL = 1e-13


@dataclass(frozen=True)
class SurfacePoint:
    """A point of the two-sheeted surface: projection, sheet and, for band
    interiors, the side from which the real axis is approached."""

    lam: complex
    sheet: int = 1
    side: int = 1

    def __post_init__(self):
        if self.sheet not in (1, 2):
            raise ValueError(f"sheet must be 1 or 2, got {self.sheet}")
        if self.side not in (1, -1):
            raise ValueError(f"side must be +1 or -1, got {self.side}")
        object.__setattr__(self, "lam", complex(self.lam))

    def other_sheet(self):
        return SurfacePoint(self.lam, 3 - self.sheet, self.side)


@dataclass(frozen=True)
class BandStructure:
    """Band edges ``(l0+, l1-, l1+, ..., lq-)``, Dirichlet points ``mu``,
    critical points ``alpha`` of the discriminant and slit heights ``h``."""

    edges: tuple
    mu: tuple
    alpha: tuple
    h: tuple
    closed: tuple

    @property
    def q(self):
        return len(self.edges) // 2

    def band(self, j):
        """Band ``j`` in 1..q as ``(lower, upper)``."""
        return self.edges[2 * j - 2], self.edges[2 * j - 1]

    def gap(self, j):
        """Gap ``j`` in 0..q; gaps 0 and q are the unbounded ends."""
        lo = self.edges[2 * j - 1] if j > 0 else -np.inf
        hi = self.edges[2 * j] if j < self.q else np.inf
        return lo, hi

    def open_gaps(self):
        return [j for j in range(1, self.q) if not self.closed[j - 1]]

    def locate(self, x):
        """Return ``("band", j)`` or ``("gap", j)`` for a real number."""
        e = self.edges
        if x < e[0]:
            return "gap", 0
        if x > e[-1]:
            return "gap", self.q
        for j in range(1, self.q + 1):
            lo, hi = self.band(j)
            if lo <= x <= hi:
                return "band", j
        for j in range(1, self.q):
            lo, hi = self.gap(j)
            if lo < x < hi:
                return "gap", j
        raise AssertionError(f"unreachable location for {x}")

    def edge_index(self, x, radius=CLUSTER_RADIUS):
        """Index into ``edges`` of an edge within ``radius`` of ``x``, else None."""
        for k, e in enumerate(self.edges):
            if abs(x - e) <= radius * max(1.0, abs(e)):
                return k
        return None

    def to_json(self):
        return {
            "edges": [float(e) for e in self.edges],
            "mu": [float(m) for m in self.mu],
            "alpha": [float(a) for a in self.alpha],
            "h": [float(h) for h in self.h],
            "closed_gaps": [j for j in range(1, self.q) if self.closed[j - 1]],
        }


@dataclass(frozen=True)
class PeriodicBackground:
    a0: tuple
    b0: tuple
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        a0 = tuple(float(x) for x in self.a0)
        b0 = tuple(float(x) for x in self.b0)
        object.__setattr__(self, "a0", a0)
        object.__setattr__(self, "b0", b0)
        if len(a0) < 2 or len(a0) != len(b0):
            raise ValueError("a0 and b0 must have the same length q >= 2")
        if min(a0) <= 0:
            raise NormalizationViolated("all a0 entries must be positive")
        prod = float(np.prod(a0))
        if abs(prod - 1.0) > NORMALIZATION_TOL:
            raise NormalizationViolated(f"product of a0 is {prod!r}, expected 1")

    @property
    def q(self):
        return len(self.a0)

    def a(self, n):
        return self.a0[(n - 1) % self.q]

    def b(self, n):
        return self.b0[(n - 1) % self.q]

    def theta_phi(self, n):
        """Fundamental polynomials ``(theta_n, phi_n)`` for any integer ``n``."""
        cache = self._cache.setdefault("tp", {0: (Polynomial([1.0]), Polynomial([0.0])),
                                              1: (Polynomial([0.0]), Polynomial([1.0]))})
        if n in cache:
            return cache[n]
        lam = Polynomial.x()
        if n > 1:
            hi = max(cache)
            for k in range(hi, n):
                (tm, pm), (t, p) = cache[k - 1], cache[k]
                cache[k + 1] = tuple(((lam - self.b(k)) * y - self.a(k - 1) * ym) / self.a(k)
                                     for y, ym in ((t, tm), (p, pm)))
        else:
            lo = min(cache)
            for k in range(lo, n, -1):
                (t, p), (tp, pp) = cache[k], cache[k + 1]
                cache[k - 1] = tuple(((lam - self.b(k)) * y - self.a(k) * yp) / self.a(k - 1)
                                     for y, yp in ((t, tp), (p, pp)))
        return cache[n]

    @cached_property
    def delta(self):
        q = self.q
        return ((self.theta_phi(q + 1)[1] + self.theta_phi(q)[0]) / 2).real()

    @cached_property
    def phi_half(self):
        """The half-difference ``(phi_{q+1} - theta_q) / 2``."""
        q = self.q
        return ((self.theta_phi(q + 1)[1] - self.theta_phi(q)[0]) / 2).real()

    @cached_property
    def phi_q(self):
        return self.theta_phi(self.q)[1].real()

    @cached_property
    def theta_q(self):
        return self.theta_phi(self.q)[0].real()

    @cached_property
    def theta_q1(self):
        return self.theta_phi(self.q + 1)[0].real()

    @cached_property
    def one_minus_delta_sq(self):
        return 1 - self.delta * self.delta

    @cached_property
    def bands(self):
        return band_structure(self)

    def to_json(self):
        return {"q": self.q, "a0": list(self.a0), "b0": list(self.b0)}

    @classmethod
    def from_json(cls, data):
        bg = cls(tuple(data["a0"]), tuple(data["b0"]))
        if "q" in data and int(data["q"]) != bg.q:
            raise ValueError(f"q={data['q']} does not match len(a0)={bg.q}")
        return bg


def fundamental_solutions(bg, n_max):
    """``{n: (theta_n, phi_n)}`` for ``0 <= n <= n_max``."""
    return {n: bg.theta_phi(n) for n in range(n_max + 1)}


def discriminant_data(bg):
    return {"delta": bg.delta, "phi": bg.phi_half, "phi_q": bg.phi_q, "theta_q1": bg.theta_q1}


def _real_sorted_roots(p):
    return sorted(r.value.real for r in poly_roots(p, cluster_radius=0.0) for _ in range(r.multiplicity))


def band_structure(bg):
    if abs(np.prod(bg.a0) - 1.0) > NORMALIZATION_TOL:
        raise NormalizationViolated("product of a0 differs from 1")
    q = bg.q
    D = bg.delta
    dD = D.deriv()
    alpha = [_newton_real(dD, x) for x in _real_sorted_roots(dD)]
    bound = 1.0 + max(abs(c) for c in (D - 1).coeffs[:-1] / D.lead.real) + 1.0
    bound = max(bound, 1.0 + max(abs(c) for c in (D + 1).coeffs[:-1] / D.lead.real) + 1.0)
    ddD = dD.deriv()
    edges = [None] * (2 * q)
    h, closed = [], []
    for j in range(1, q):
        sigma = (-1) ** (q - j)
        height = sigma * D(alpha[j - 1]).real
        # a gap narrower than the cluster radius counts as closed
        width2 = 2 * max(height - 1.0, 0.0) / max(abs(ddD(alpha[j - 1]).real), 1e-300)
        is_closed = height - 1.0 <= 0 or np.sqrt(width2) < CLUSTER_RADIUS * max(1.0, abs(alpha[j - 1]))
        closed.append(bool(is_closed))
        h.append(0.0 if is_closed else float(np.arccosh(height)))
    # monotone pieces between consecutive critical points
    brk = [-bound] + alpha + [bound]
    for j in range(1, q + 1):
        lo, hi = brk[j - 1], brk[j]
        for k, sigma in ((2 * j - 2, (-1) ** (q - j + 1)), (2 * j - 1, (-1) ** (q - j))):
            if k == 2 * j - 2 and j > 1 and closed[j - 2]:
                edges[k] = alpha[j - 2]
                continue
            if k == 2 * j - 1 and j < q and closed[j - 1]:
                edges[k] = alpha[j - 1]
                continue
            f = lambda x, s=sigma: D(x).real - s
            edges[k] = brentq(f, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=500)
    mu = [_newton_real(bg.phi_q, x) for x in _real_sorted_roots(bg.phi_q)]
    return BandStructure(tuple(edges), tuple(mu), tuple(alpha), tuple(h), tuple(closed))


def _newton_real(p, x, steps=3):
    dp = p.deriv()
    for _ in range(steps):
        d = dp(x).real
        if d == 0:
            break
        nx = x - p(x).real / d
        if abs(p(nx)) >= abs(p(x)):
            break
        x = nx
    return float(x)


# evaluation on the surface

def zeta_values(bg, lam, sheet=1, side=1):
    """Floquet multiplier ``Delta + i Omega`` at projections ``lam`` (array)."""
    lam = np.asarray(lam, dtype=complex)
    D = bg.delta(lam)
    r = np.sqrt(D * D - 1)
    big = np.where(np.abs(D + r) >= np.abs(D - r), D + r, D - r)
    zeta = 1.0 / big
    near_axis = np.abs(lam.imag) <= REAL_AXIS_TOL * np.maximum(1.0, np.abs(lam.real))
    on_band = near_axis & (np.abs(D.real) <= 1.0)
    if np.any(on_band):
        x = lam.real[on_band]
        Dx = np.clip(bg.delta(x).real, -1.0, 1.0)
        s = np.where(lam.imag[on_band] > 0, 1, np.where(lam.imag[on_band] < 0, -1, side))
        omega = -s * np.sign(bg.delta.deriv()(x).real) * np.sqrt(1.0 - Dx * Dx)
        zeta = zeta.copy()
        zeta[on_band] = Dx + 1j * omega
    if sheet == 2:
        zeta = 1.0 / zeta
    return zeta


def _zeta(bg, pt):
    return complex(zeta_values(bg, np.array([pt.lam]), pt.sheet, pt.side)[0])


def omega_eval(bg, pt):
    zeta = _zeta(bg, pt)
    return complex((zeta - 1 / zeta) / 2j)


def weyl_values(bg, lam, zeta, sign):
    """``m_+ = (zeta - theta_q)/phi_q`` or ``m_- = (1/zeta - theta_q)/phi_q``.

    Near a Dirichlet point the equivalent form ``-theta_{q+1}/(1/zeta - theta_q)``
    (signs swapped for ``m_-``) is used whenever its denominator is larger.
    """
    lam = np.asarray(lam, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    th = bg.theta_q(lam)
    num = (zeta if sign > 0 else 1.0 / zeta) - th
    alt = (1.0 / zeta if sign > 0 else zeta) - th
    den = bg.phi_q(lam)
    with np.errstate(divide="ignore", invalid="ignore"):
        direct = num / den
        swapped = -bg.theta_q1(lam) / alt
    return np.where(np.abs(den) >= np.abs(alt), direct, swapped)


def weyl_m(bg, pt, sign):
    lam = pt.lam
    zeta = _zeta(bg, pt)
    num = (zeta if sign > 0 else 1 / zeta) - bg.theta_q(lam)
    den = bg.phi_q(lam)
    scale = max(1.0, abs(zeta), abs(1 / zeta), abs(bg.theta_q(lam)))
    if abs(den) > 1e-10 * max(1.0, float(np.max(np.abs(bg.phi_q.coeffs)))):
        return complex(num / den)
    omega = (zeta - 1 / zeta) / 2j
    if abs(omega) < 1e-8:
        raise SquareRootSingularity(f"Dirichlet point {lam} sits at a band edge")
    if abs(num) > 1e-8 * scale:
        raise PoleAtDirichletPoint(f"m with sign {sign:+d} has a pole at {lam}")
    # removable singularity: differentiate numerator and denominator
    dzeta = bg.delta.deriv()(lam) * zeta / (1j * omega)
    dnum = (dzeta if sign > 0 else -dzeta / zeta**2) - bg.theta_q.deriv()(lam)
    return complex(dnum / bg.phi_q.deriv()(lam))


def bloch_psi(bg, n, pt, sign):
    theta, phi = bg.theta_phi(n)
    return complex(theta(pt.lam) + weyl_m(bg, pt, sign) * phi(pt.lam))


def psi_table(bg, ns, lam, zeta, sign):
    """Bloch solutions ``psi_n`` for every ``n`` in ``ns`` at arrays of points.

    Uses the numeric recurrence over one period and the Floquet property
    ``psi_{n+q} = zeta**(+-1) psi_n`` beyond it.
    """
    lam = np.asarray(lam, dtype=complex)
    zeta = np.asarray(zeta, dtype=complex)
    m = weyl_values(bg, lam, zeta, sign)
    q = bg.q
    base = {0: np.ones_like(lam), 1: m}
    for k in range(1, q):
        base[k + 1] = ((lam - bg.b(k)) * base[k] - bg.a(k - 1) * base[k - 1]) / bg.a(k)
    mult = zeta if sign > 0 else 1.0 / zeta
    out = {}
    for n in ns:
        k, r = divmod(n, q)
        out[n] = base[r] * mult**k
    return out


# quasimomentum

def _kappa_real(bg, x):
    """``kappa`` at a real point approached from above on sheet 1."""
    q = bg.q
    bs = bg.bands
    D = bg.delta(x).real
    where, j = bs.locate(x)
    if where == "band":
        k = q - j
        ac = np.arccos(np.clip(D, -1.0, 1.0))
        qk = -k * np.pi - ac if k % 2 == 0 else -(k + 1) * np.pi + ac
        return complex(qk / q)
    sgn = (-1) ** (q - j)
    return complex(-(q - j) * np.pi / q, np.arccosh(max(sgn * D, 1.0)) / q)


def _z_upper(bg, lam):
    """``z`` on sheet 1 for ``Im lam > 0`` by continuation up from the real axis."""
    q = bg.q
    x, y = lam.real, lam.imag
    z0 = np.exp(1j * _kappa_real(bg, x))
    roots_q = np.exp(2j * np.pi * np.arange(q) / q)

    def candidates(t):
        zeta = complex(zeta_values(bg, np.array([complex(x, y * t)]))[0])
        r = abs(zeta) ** (1.0 / q) * np.exp(1j * np.angle(zeta) / q)
        return r * roots_q

    def advance(t0, z_prev, t1, depth=0):
        c = candidates(t1)
        d = np.abs(c - z_prev)
        order = np.argsort(d)
        if depth < 40 and d[order[0]] > 0.3 * d[order[1]]:
            tm = 0.5 * (t0 + t1)
            zm = advance(t0, z_prev, tm, depth + 1)
            return advance(tm, zm, t1, depth + 1)
        return c[order[0]]

    z = z0
    ts = np.linspace(0.0, 1.0, 33) ** 2
    for t0, t1 in zip(ts[:-1], ts[1:]):
        z = advance(t0, z, t1)
    return complex(z)


def quasimomentum(bg, pt):
    """``(kappa, z)`` with ``cos(q kappa) = Delta`` and ``z = exp(i kappa)``."""
    lam = pt.lam
    near_axis = abs(lam.imag) <= REAL_AXIS_TOL * max(1.0, abs(lam.real))
    if near_axis:
        side = pt.side if lam.imag == 0 else (1 if lam.imag > 0 else -1)
        k = _kappa_real(bg, lam.real)
        if side < 0:
            k = -k.conjugate()
        z = np.exp(1j * k)
    elif lam.imag > 0:
        z = _z_upper(bg, lam)
        k = -1j * np.log(z)
    else:
        z = np.conj(_z_upper(bg, lam.conjugate()))
        k = -1j * np.log(z)
    if pt.sheet == 2:
        z, k = 1.0 / z, -k
    return complex(k), complex(z)


def slits(bg):
    """Radial slits of the z-plane: list of ``(angle, r_in, r_out)``."""
    q = bg.q
    out = []
    for j in range(1, q):
        hj = bg.bands.h[j - 1]
        if hj <= 0:
            continue
        ang = (q - j) * np.pi / q
        for s in (-1, 1):
            out.append((s * ang, float(np.exp(-hj / q)), float(np.exp(hj / q))))
    return out


def lambda_of_z(bg, z, radius=CLUSTER_RADIUS):
    """Surface point whose quasimomentum image is ``z``."""
    z = complex(z)
    if z == 0:
        raise ValueError("z = 0 is the image of infinity on sheet 1")
    for ang, r_in, r_out in slits(bg):
        on_ray = abs(np.angle(z * np.exp(-1j * ang))) <= radius
        if on_ray and r_in * (1 - radius) <= abs(z) <= r_out * (1 + radius) and abs(abs(z) - 1) > radius:
            raise OnSlit(f"z={z} lies on the slit at angle {ang:.6g}")
    sheet = 1 if abs(z) <= 1 else 2
    z1 = z if sheet == 1 else 1.0 / z
    q = bg.q
    s = z1**q + z1 ** (-q)
    cands = poly_roots(2 * bg.delta - s, cluster_radius=0.0)
    side = 1 if z1.imag <= 0 else -1
    best, best_d = None, np.inf
    for r in cands:
        lam = r.value
        if abs(lam.imag) <= 1e-9 * max(1.0, abs(lam)):
            lam = complex(lam.real, 0.0)
        pt = SurfacePoint(lam, 1, side)
        d = abs(quasimomentum(bg, pt)[1] - z1)
        if d < best_d:
            best, best_d = pt, d
    return SurfacePoint(best.lam, sheet, best.side)
