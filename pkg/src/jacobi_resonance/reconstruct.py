"""Rebuild ``(w_hat, f_0^+)`` from states, zeros of ``R_- + 1``, the
polynomials ``A`` and ``phi_0^+`` and the constants ``c3, v0``; then hand the
resulting scattering data to the GLM solver.

Writing ``f_0^+ = P1 + m_+ P2`` with ``m_+ = (phi + i Omega) / phi_q`` and
using ``phi**2 + Omega**2 = -phi_q theta_{q+1}`` gives

    F_f := phi_q f_0^+(sheet 1) f_0^+(sheet 2)
         = phi_q P1**2 + 2 phi P1 P2 - theta_{q+1} P2**2

and ``X = phi_q P1 + phi P2`` satisfies
``X**2 = phi_q F_f - (1 - Delta**2) P2**2``. ``F_f`` vanishes at the zeros of
``f_0^+`` and at Dirichlet points where ``P2`` vanishes, since there ``f_0^+``
is regular on both sheets. ``P1`` follows from ``X`` once the sign of its
leading coefficient is chosen.
"""

from dataclasses import dataclass

import numpy as np

from .algebra import CLUSTER_RADIUS, Polynomial, poly_interpolate, poly_sqrt
from .background import SurfacePoint, zeta_values
from .errors import (BranchSelectionFailed, ClassMembershipFailed, HypothesisViolation, NonRealCoefficients,
                     NotAPerfectSquare)
from .glm import glm_kernel_F, recover_perturbation
from .perturbed import JostPair, perturbed_polys
from .scattering import data_from_pair, pole_split
from .states import locate_states, states_from_pair, validate_state_laws

REAL_TOL = 1e-8
DEGREE_TOL = 1e-8


@dataclass(frozen=True)
class ReconstructionInput:
    states: tuple       # ((SurfacePoint, multiplicity), ...)
    r_zeros: tuple      # complex zeros of R_- + 1, projected to the plane
    A: Polynomial
    phi0_plus: Polynomial
    c3: float
    v0: float

    def to_json(self):
        return {
            "states": [{"lambda": [s.lam.real, s.lam.imag], "sheet": s.sheet, "multiplicity": m}
                       for s, m in self.states],
            "r_zeros": [[complex(r).real, complex(r).imag] for r in self.r_zeros],
            "A": self.A.to_json(),
            "phi0_plus": self.phi0_plus.to_json(),
            "c3": self.c3,
            "v0": self.v0,
        }

    @classmethod
    def from_json(cls, data):
        states = tuple((SurfacePoint(complex(*s["lambda"]), int(s.get("sheet", 1))), int(s.get("multiplicity", 1)))
                       for s in data["states"])
        return cls(states, tuple(complex(*r) for r in data["r_zeros"]), Polynomial.from_json(data["A"]),
                   Polynomial.from_json(data["phi0_plus"]), float(data["c3"]), float(data["v0"]))


def derived_constants(inp, bg):
    """``nu, p, A_p, c1, c2`` implied by ``phi_0^+`` and ``c3``.

    ``phi_0^+`` has degree ``nu - 1`` and leading coefficient ``-a0_0 c2 / A_p``.
    """
    nu = inp.phi0_plus.degree + 1
    p = (nu + 1) // 2
    a_p = float(np.prod([bg.a(j) for j in range(p + 1)]))
    c2 = -a_p * inp.phi0_plus.lead.real / bg.a(0)
    return {"nu": nu, "p": p, "A_p": a_p, "c2": c2, "c1": inp.c3 / c2, "c3": inp.c3, "v0": inp.v0,
            "kappa": nu + 2 * bg.q - 1}


def state_lead(c3, v0, nu):
    """Leading coefficient of ``F``: ``c3 v0``, less one when ``nu = 1``.

    For ``nu = 1`` the constant ``1 + A`` keeps the ``1`` at top order.
    """
    return c3 * v0 - (1.0 if nu == 1 else 0.0)


def f_from_states(inp, bg=None):
    """State polynomial ``F = state_lead * prod (lam - lam_j)**m_j``."""
    roots = [(complex(s.lam), m) for s, m in inp.states]
    nu = inp.phi0_plus.degree + 1
    f = Polynomial.from_roots(roots, lead=state_lead(inp.c3, inp.v0, nu))
    if bg is not None:
        kappa = derived_constants(inp, bg)["kappa"]
        if f.degree != kappa:
            raise ValueError(f"state multiplicities sum to {f.degree}, expected {kappa}")
    if not f.is_real(REAL_TOL):
        raise NonRealCoefficients("state set is not closed under conjugation")
    return f.real()


def what_from_F(F, A, bg, constants):
    """``(1 + A, J)`` with ``J = sqrt(F - 4 (1 - Delta**2) (1 + A)**2)``.

    The sign of ``J`` is that of its leading coefficient: ``c2 v0 / (2 A_p)``
    for ``nu >= 2`` and ``c1 A_p - (1 + A)`` for ``nu = 1``, where ``1 + A``
    is constant and enters the top order of ``w_hat``.
    """
    one_plus_a = A + 1.0
    rest = F - 4.0 * bg.one_minus_delta_sq * one_plus_a * one_plus_a
    scale = max(1.0, float(np.max(np.abs(F.coeffs))))
    rest = rest.trim(1e-10 * scale / max(1.0, float(np.max(np.abs(rest.coeffs)))))
    if constants.get("nu", 2) == 1:
        sign = np.sign(constants["c1"] * constants["A_p"] - one_plus_a.coeffs[0].real)
    else:
        sign = np.sign(constants["c2"] * constants["v0"] / constants["A_p"])
    return one_plus_a, poly_sqrt(rest.real(), sign)


def dirichlet_zeros(bg, p2, tol=1e-9):
    """Dirichlet points where ``P2`` vanishes; these are roots of ``F_f`` but not of ``f_0^+``."""
    scale = max(1.0, float(np.max(np.abs(p2.coeffs))))
    return [mu for mu in bg.bands.mu if abs(p2(mu)) <= tol * scale * max(1.0, abs(mu)) ** p2.degree]


def _nodes(bg, count):
    bs = bg.bands
    lo, hi = bs.edges[0], bs.edges[-1]
    pad = 0.1 * (hi - lo)
    k = np.arange(count)
    x = (lo + hi) / 2 + (hi - lo + 2 * pad) / 2 * np.cos((2 * k + 1) * np.pi / (2 * count))
    # keep clear of Dirichlet points
    for mu in bs.mu:
        close = np.abs(x - mu) < 1e-6
        x[close] += 2e-6
    return x


def jost0_from_zeros(inp, bg, constants=None):
    """``(P1, P2)`` carrying ``f_0^+`` from the zeros of ``R_- + 1``."""
    c = constants or derived_constants(inp, bg)
    nu, q = c["nu"], bg.q
    p2 = inp.phi0_plus
    extra = dirichlet_zeros(bg, p2)
    if len(inp.r_zeros) + len(extra) != nu + q - 1:
        raise ValueError(f"{len(inp.r_zeros)} zeros given, expected {nu + q - 1 - len(extra)}")
    ff = Polynomial.from_roots(list(inp.r_zeros) + extra, lead=-bg.a(0) * c["c3"])
    if not ff.is_real(REAL_TOL):
        raise NonRealCoefficients("zeros of R_- + 1 are not closed under conjugation")
    ff = ff.real()
    x_sq = bg.phi_q * ff - bg.one_minus_delta_sq * p2 * p2
    scale = max(1.0, float(np.max(np.abs(x_sq.coeffs))))
    x_sq = x_sq.trim(1e-10 * scale / max(1.0, float(np.max(np.abs(x_sq.coeffs)))))
    target = max(nu - 2, 0)
    nodes = _nodes(bg, nu + 2)
    found = []
    for sign in (np.sign(p2.lead.real), -np.sign(p2.lead.real)):
        try:
            x = poly_sqrt(x_sq.real(), sign)
        except NotAPerfectSquare:
            continue
        vals = (x(nodes) - bg.phi_half(nodes) * p2(nodes)) / bg.phi_q(nodes)
        p1 = poly_interpolate(nodes, vals).real()
        cmax = max(1e-300, float(np.max(np.abs(p1.coeffs))))
        if p1.degree > target and np.max(np.abs(p1.coeffs[target + 1:])) > DEGREE_TOL * cmax:
            continue
        found.append(p1.truncate(target))
    if len(found) != 1:
        raise BranchSelectionFailed(f"{len(found)} square-root branches give deg P1 = {target}")
    return found[0], p2


def check_input_hypotheses(inp, bg, radius=1e-6):
    """Simplicity and disjointness from edges and Dirichlet points."""
    bs = bg.bands
    special = list(bs.edges) + list(bs.mu)
    pts = [complex(s.lam) for s, m in inp.states] + [complex(r) for r in inp.r_zeros]
    if any(m != 1 for _, m in inp.states):
        raise HypothesisViolation("simplicity", "non-simple state")
    for group in (pts[: len(inp.states)], pts[len(inp.states):]):
        for i, a in enumerate(group):
            if any(abs(a - b) <= radius * max(1.0, abs(a)) for b in group[i + 1:]):
                raise HypothesisViolation("simplicity", f"repeated point {a}")
    for a in pts:
        if any(abs(a - e) <= radius * max(1.0, abs(a)) for e in special):
            raise HypothesisViolation("disjointness", f"{a} meets an edge or Dirichlet point")


def _series_mul(a, b, n):
    return np.convolve(a, b)[:n]


def _series_inv(a, n):
    out = np.zeros(n)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        acc = sum(a[j] * out[k - j] for j in range(1, min(k, len(a) - 1) + 1))
        out[k] = -acc / a[0]
    return out


def _reversed(poly, degree, n):
    # coefficients of lam**-degree * poly(lam) as a series in w = 1/lam
    c = np.zeros(n)
    for k, v in enumerate(poly.coeffs.real):
        if degree - k < n:
            c[degree - k] = v
    return c


def sheet1_expansion(pair, bg):
    """Laurent coefficients of ``f_0^+`` at infinity on sheet 1.

    Returns ``(growth, limit)``: the coefficients of the positive powers of
    ``lam`` (highest first) and the constant term. ``m_+ = w M(w)`` is the
    small root of ``phi_q m**2 - 2 phi m - theta_{q+1} = 0``, solved as a
    power series in ``w = 1/lam``.
    """
    q = bg.q
    d = max(pair.p1.degree, pair.p2.degree - 1, 0)
    n = d + 2
    big_p = _reversed(bg.phi_q, q - 1, n)
    big_t = _reversed(bg.theta_q1, q - 1, n)
    inv_phi = _series_inv(_reversed(bg.phi_half, q, n), n)
    w2 = np.zeros(n)
    if n > 2:
        w2[2] = 1.0
    m = np.zeros(n)
    for _ in range(n):
        m2 = _series_mul(w2, _series_mul(m, m, n), n)
        m = 0.5 * _series_mul(_series_mul(big_p, m2, n) - big_t, inv_phi, n)
    f = _reversed(pair.p1, d, n) + _series_mul(m, _reversed(pair.p2, d + 1, n), n)
    return f[:d], float(f[d])


def scattering_from_pair(pair, bg, side="right", F=None, constants=None):
    """Scattering data from a reconstructed pair after class-membership checks."""
    c = constants or {}
    nu = pair.p2.degree + 1
    q = bg.q
    if pair.one_plus_a.degree != nu - 1 or pair.j.degree != nu + q - 1 or pair.p1.degree > max(nu - 2, 0):
        raise ClassMembershipFailed("degrees", f"deg(1+A)={pair.one_plus_a.degree}, deg J={pair.j.degree}, "
                                               f"deg P1={pair.p1.degree} for nu={nu}")
    if F is not None and not pair.f_poly.allclose(F, rtol=1e-7):
        raise ClassMembershipFailed("asymptotics", "4(1 - Delta^2)(1 + A)^2 + J^2 differs from F")
    if "c1" in c and "A_p" in c:
        growth, lim = sheet1_expansion(pair, bg)
        want = c["c1"] * c["A_p"]
        scale = max(1.0, float(np.max(np.abs(pair.p1.coeffs))), float(np.max(np.abs(pair.p2.coeffs))))
        if np.any(np.abs(growth) > 1e-7 * scale) or abs(lim - want) > 1e-6 * max(1.0, abs(want)):
            raise ClassMembershipFailed("asymptotics", f"f0 tends to {lim:.9g} on sheet 1, expected {want:.9g}")
    kappa = nu + 2 * q - 1
    catalog = states_from_pair(bg, pair, pair.f_poly.truncate(kappa), kappa)
    laws = validate_state_laws(catalog, bg, strict=False)
    for name in ("even-count", "simplicity"):
        if not laws["laws"][name]["pass"]:
            raise ClassMembershipFailed("state laws", laws["laws"][name]["detail"])
    split = pole_split(bg)
    for e in split.m_edge:
        lam = np.array([complex(e)])
        zeta = zeta_values(bg, lam)
        s, w = pair.s_hat(lam, zeta)[0], pair.w_hat(lam, zeta)[0]
        if abs(s - w) > 1e-7 * max(1.0, abs(w)):
            raise ClassMembershipFailed("edge values", f"s_hat != w_hat at edge {e}")
    data = data_from_pair(bg, pair, catalog.bound_states(), side, split)
    bad = [r for r, g in zip(data.rho, data.gamma_plus) if not g > 0]
    if bad:
        raise ClassMembershipFailed("norming positivity", f"non-positive norming constant at {bad}")
    return data


def reconstruct(inp, bg, side="right", check=True):
    """Full pipeline from reconstruction input to ``(perturbation, report)``."""
    if check:
        check_input_hypotheses(inp, bg)
    c = derived_constants(inp, bg)
    F = f_from_states(inp, bg)
    one_plus_a, j = what_from_F(F, inp.A, bg, c)
    p1, p2 = jost0_from_zeros(inp, bg, c)
    pair = JostPair(bg, one_plus_a, j, p1, p2)
    data = scattering_from_pair(pair, bg, side, F, c)
    pert, report = recover_perturbation(bg, glm_kernel_F(data, bg))
    report["constants"] = c
    return pert, report


def extract_input(bg, pert, radius=CLUSTER_RADIUS, verify=True):
    """Reconstruction input read off the direct problem.

    With ``verify`` every zero of ``F_f`` is checked to be a zero of both
    ``f_0^+`` and ``R_- + 1`` on one sheet.
    """
    fam = perturbed_polys(bg, pert)
    pair = fam.pair
    catalog = locate_states(bg, pert)
    c = fam.constants
    ff = bg.phi_q * pair.p1 * pair.p1 + 2.0 * bg.phi_half * pair.p1 * pair.p2 - bg.theta_q1 * pair.p2 * pair.p2
    ff = ff.truncate(pert.nu + bg.q - 1)
    zeros = [complex(r) for r in np.roots(ff.coeffs[::-1])]
    for mu in dirichlet_zeros(bg, pair.p2):
        k = int(np.argmin([abs(r - mu) for r in zeros]))
        zeros.pop(k)
    if verify:
        for r in zeros:
            lam = np.array([r])
            best = np.inf
            for sheet in (1, 2):
                for s in (1, -1):
                    zeta = zeta_values(bg, lam, sheet, s)
                    f0 = abs(pair.f0(lam, zeta)[0])
                    w = pair.w_hat(lam, zeta)[0]
                    r1 = abs(pair.s_hat(lam, zeta)[0] / w + 1)
                    best = min(best, max(f0, r1))
            if best > 1e-6:
                raise HypothesisViolation("jost-zeros", f"zero {r} of F_f is not a zero of f0 and R_- + 1")
    states = tuple((s.location, s.multiplicity) for s in catalog.states)
    return ReconstructionInput(states, tuple(zeros), pair.one_plus_a - 1.0, pair.p2, c["c3"], pert.v[0])
