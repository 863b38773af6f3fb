"""Scattering matrix, Dirichlet pole split, norming constants and the
scattering data that feed the inverse problem.

On the unit circle ``|z| = 1`` a point ``z`` is a band point approached
from above (``Im z < 0``) or from below (``Im z > 0``); ``1/z`` is the same
projection on the other side, which is how ``R_+ = s_hat(1/z) / w_hat(z)``
is evaluated.
"""

from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.optimize import brentq

from .algebra import CLUSTER_RADIUS, Polynomial
from .background import SurfacePoint, _kappa_real, zeta_values
from .errors import AmbiguousAssignment, AtBandEdge, HypothesisViolation, NonPositiveNorming
from .perturbed import JostFamily, perturbed_polys, s_hat_eval
from .states import locate_states

SIDES = ("right", "left")


@dataclass(frozen=True)
class PoleSplit:
    m_plus: tuple
    m_minus: tuple
    m_edge: tuple
    d_plus: Polynomial
    d_minus: Polynomial

    def to_json(self):
        return {"M_plus": list(self.m_plus), "M_minus": list(self.m_minus), "M_edge": list(self.m_edge),
                "D_plus": self.d_plus.to_json(), "D_minus": self.d_minus.to_json()}


def pole_split(bg, tol=1e-8):
    """Assign each Dirichlet point to the Weyl function that has a pole there."""
    bs = bg.bands
    plus, minus, edge = [], [], []
    for mu in bs.mu:
        if bs.edge_index(mu) is not None:
            edge.append(mu)
            continue
        zeta = complex(zeta_values(bg, np.array([complex(mu)]))[0])
        th = bg.theta_q(mu)
        scale = max(1.0, abs(zeta), abs(1 / zeta), abs(th))
        vp, vm = abs(zeta - th) / scale, abs(1 / zeta - th) / scale
        if vp <= tol < vm:
            minus.append(mu)
        elif vm <= tol < vp:
            plus.append(mu)
        else:
            raise AmbiguousAssignment(f"mu={mu}: |phi+i Omega|={vp:.3g}, |phi-i Omega|={vm:.3g}")
    d_plus = Polynomial.from_roots(plus + edge).real()
    d_minus = Polynomial.from_roots(minus).real()
    return PoleSplit(tuple(plus), tuple(minus), tuple(edge), d_plus, d_minus)


def band_point_of_z(bg, z, radius=CLUSTER_RADIUS):
    """Projection and side of a point on the unit circle."""
    z = complex(z)
    q = bg.q
    theta = float(np.angle(z))
    side = 1 if theta <= 0 else -1
    kappa = -abs(theta)
    if abs(np.sin(q * kappa)) <= radius:
        raise AtBandEdge(f"z={z} is the image of a band edge")
    k = min(int(np.floor(-q * kappa / np.pi)), q - 1)
    lo, hi = bg.bands.band(q - k)
    target = np.cos(q * kappa)
    lam = brentq(lambda x: bg.delta(x).real - target, lo, hi, xtol=1e-15, rtol=1e-15)
    return SurfacePoint(complex(lam, 0.0), 1, side)


def z_of_band_point(bg, lam, side=1):
    """``z`` for real band points; vectorized over ``lam``."""
    lam = np.atleast_1d(np.asarray(lam, dtype=float))
    k = np.array([_kappa_real(bg, x) for x in lam])
    if side < 0:
        k = -k.conj()
    return np.exp(1j * k)


@dataclass(frozen=True)
class ScatteringData:
    """Rational carriers of ``w_hat`` and ``s_hat`` plus bound-state data.

    ``side`` selects which reflection coefficient and norming constants the
    inverse problem uses: ``right`` for ``R_+`` and ``gamma_+``.
    """

    bg: object
    side: str
    one_plus_a: Polynomial
    j: Polynomial
    s_p: Polynomial
    s_q: Polynomial
    rho: tuple
    gamma_plus: tuple
    gamma_minus: tuple
    split: PoleSplit

    @property
    def nu(self):
        return self.j.degree - self.bg.q + 1

    @property
    def gamma(self):
        return self.gamma_plus if self.side == "right" else self.gamma_minus

    def w_hat(self, lam, zeta):
        return (zeta - 1.0 / zeta) * self.one_plus_a(lam) - self.j(lam)

    @cached_property
    def jost0(self):
        """``(theta_0^+, phi_0^+)`` recovered from the carrier by exact division, or None."""
        bg = self.bg
        p2, r2 = (bg.phi_q * self.j - self.s_q).divmod(2 * bg.one_minus_delta_sq)
        p1, r1 = (self.s_p - bg.phi_half * p2).divmod(bg.phi_q)
        scale = max(float(np.max(np.abs(self.s_q.coeffs))), float(np.max(np.abs(self.s_p.coeffs))), 1.0)
        if max(float(np.max(np.abs(r1.coeffs))), float(np.max(np.abs(r2.coeffs)))) > 1e-9 * scale:
            return None
        return (p1 + self.one_plus_a).real(), p2.real()

    def s_hat(self, lam, zeta):
        lam = np.asarray(lam, dtype=complex)
        carrier = (self.s_p, self.s_q)
        if self.jost0 is None:
            zeta = np.asarray(zeta, dtype=complex)
            return ((zeta - 1.0 / zeta) * self.s_p(lam) + self.s_q(lam)) / self.bg.phi_q(lam)
        p1, p2 = self.jost0
        return s_hat_eval(self.bg, lam, zeta, self.w_hat(lam, zeta), p1, p2, carrier)

    def reflection(self, lam, zeta, sign=None):
        """``R_+`` (sign +1) or ``R_-`` (sign -1); defaults to this data's side."""
        sign = sign if sign is not None else (1 if self.side == "right" else -1)
        lam = np.asarray(lam, dtype=complex)
        w = self.w_hat(lam, zeta)
        if sign > 0:
            return self.s_hat(lam, 1.0 / zeta) / w
        return self.s_hat(lam, zeta) / w

    def transmission(self, lam, zeta):
        lam = np.asarray(lam, dtype=complex)
        return (zeta - 1.0 / zeta) / self.w_hat(lam, zeta)

    def with_side(self, side):
        return ScatteringData(self.bg, side, self.one_plus_a, self.j, self.s_p, self.s_q, self.rho,
                              self.gamma_plus, self.gamma_minus, self.split)

    def to_json(self):
        return {
            "side": self.side,
            "background": self.bg.to_json(),
            "rho": list(self.rho),
            "gamma": list(self.gamma),
            "gamma_plus": list(self.gamma_plus),
            "gamma_minus": list(self.gamma_minus),
            "w_hat": {"one_plus_A": self.one_plus_a.to_json(), "J": self.j.to_json()},
            "s_carrier": {"P": self.s_p.to_json(), "Q": self.s_q.to_json(),
                          "denominator": self.bg.phi_q.to_json()},
            "pole_split": self.split.to_json(),
        }

    @classmethod
    def from_json(cls, data, bg):
        sp = data["pole_split"]
        split = PoleSplit(tuple(sp["M_plus"]), tuple(sp["M_minus"]), tuple(sp["M_edge"]),
                          Polynomial.from_json(sp["D_plus"]), Polynomial.from_json(sp["D_minus"]))
        side = data["side"]
        if side not in SIDES:
            raise ValueError(f"side must be one of {SIDES}")
        gp = tuple(data.get("gamma_plus", data["gamma"] if side == "right" else ()))
        gm = tuple(data.get("gamma_minus", data["gamma"] if side == "left" else ()))
        return cls(bg, side, Polynomial.from_json(data["w_hat"]["one_plus_A"]),
                   Polynomial.from_json(data["w_hat"]["J"]), Polynomial.from_json(data["s_carrier"]["P"]),
                   Polynomial.from_json(data["s_carrier"]["Q"]), tuple(data["rho"]), gp, gm, split)


def smatrix(bg, pert, z):
    """Scattering matrix entries at a point of the unit circle."""
    pt = band_point_of_z(bg, z)
    pair = perturbed_polys(bg, pert).pair
    lam = np.array([pt.lam])
    zeta = zeta_values(bg, lam, 1, pt.side)
    two_i_omega = (zeta - 1 / zeta)[0]
    w = complex(pair.w_hat(lam, zeta)[0])
    s_here = complex(pair.s_hat(lam, zeta)[0])
    s_there = complex(pair.s_hat(lam, 1 / zeta)[0])
    alpha = w / two_i_omega
    r_minus, r_plus = s_here / w, s_there / w
    t = 1 / alpha
    return {"T": t, "R_plus": r_plus, "R_minus": r_minus, "alpha": alpha,
            "beta_minus": s_here / two_i_omega, "beta_plus": r_plus * alpha,
            "det_S": t * t - r_plus * r_minus, "lambda": pt.lam.real, "side": pt.side}


def norming_from_pair(bg, pair, split, rho):
    """``(gamma_+, gamma_-, w_hat')`` at each bound state from the closed formula."""
    gp, gm, wd = [], [], []
    for r in rho:
        lam = np.array([complex(r)])
        zeta = zeta_values(bg, lam)
        two_i_omega = (zeta - 1 / zeta)[0]
        s = complex(pair.s_hat(lam, zeta)[0])
        d = complex(pair.w_hat_deriv(lam)[0])
        g = -(split.d_minus(r) / split.d_plus(r)) * two_i_omega / (s * d)
        gp.append(g.real)
        gm.append((1 / (g * d * d)).real)
        wd.append(d.real)
    return gp, gm, wd


def norming_l2_oracle(fam, split, r, sign):
    """``(sum_n |D f_n(r)|^2)^{-1}`` with geometric tails from the Floquet multiplier."""
    bg = fam.bg
    q, p = bg.q, fam.p
    lam = np.array([complex(r)])
    zeta = zeta_values(bg, lam)
    d = (split.d_plus if sign > 0 else split.d_minus)(r).real
    lo, hi = 1 - q, p + q
    f = {n: fam.jost(n, lam, zeta, sign)[0].real * d for n in range(lo, hi + 1)}
    ratio = abs(zeta[0]) ** 2
    head = sum(f[lo + k] ** 2 for k in range(q))
    tail = sum(f[hi - q + 1 + k] ** 2 for k in range(q))
    total = sum(v * v for v in f.values()) + (head + tail) * ratio / (1 - ratio)
    return 1.0 / total


def norming_constants(bg, pert, catalog=None, oracle=True):
    """Norming constants at the bound states, optionally with the l2 cross-check."""
    fam = JostFamily(bg, pert)
    catalog = catalog or locate_states(bg, pert)
    rho = catalog.bound_states()
    split = pole_split(bg)
    gp, gm, wd = norming_from_pair(bg, fam.pair, split, rho)
    bad = [r for r, a, b in zip(rho, gp, gm) if not (a > 0 and b > 0)]
    if bad:
        raise NonPositiveNorming(f"non-positive norming constants at {bad}")
    out = {"rho": rho, "gamma_plus": gp, "gamma_minus": gm, "w_hat_deriv": wd}
    if oracle:
        out["gamma_plus_l2"] = [norming_l2_oracle(fam, split, r, 1) for r in rho]
        out["gamma_minus_l2"] = [norming_l2_oracle(fam, split, r, -1) for r in rho]
    return out


def data_from_pair(bg, pair, rho, side="right", split=None):
    split = split or pole_split(bg)
    gp, gm, _ = norming_from_pair(bg, pair, split, rho)
    P, Q = pair.s_carrier
    return ScatteringData(bg, side, pair.one_plus_a, pair.j, P, Q, tuple(float(r) for r in rho),
                          tuple(gp), tuple(gm), split)


def assemble_scattering_data(bg, pert, side="right", catalog=None):
    if side not in SIDES:
        raise ValueError(f"side must be one of {SIDES}")
    fam = perturbed_polys(bg, pert)
    catalog = catalog or locate_states(bg, pert)
    data = data_from_pair(bg, fam.pair, catalog.bound_states(), side)
    if any(g <= 0 for g in data.gamma_plus + data.gamma_minus):
        raise NonPositiveNorming("non-positive norming constant in assembled data")
    return data


def band_grid(bg, n):
    """``n`` band points from above, spread over the bands by arc parameter."""
    bs = bg.bands
    widths = np.array([bs.band(j)[1] - bs.band(j)[0] for j in range(1, bg.q + 1)])
    counts = np.maximum(1, np.round(n * widths / widths.sum()).astype(int))
    while counts.sum() > n:
        counts[np.argmax(counts)] -= 1
    while counts.sum() < n:
        counts[np.argmin(counts)] += 1
    lam = []
    for j, c in zip(range(1, bg.q + 1), counts):
        lo, hi = bs.band(j)
        t = (np.arange(c) + 0.5) * np.pi / c
        lam.extend((lo + hi) / 2 - (hi - lo) / 2 * np.cos(t))
    return np.array(lam)


def scattering_grid(data, n):
    """Rows ``(z, T, R_-, R_+)`` on ``n`` band points from above."""
    bg = data.bg
    lam = band_grid(bg, n).astype(complex)
    zeta = zeta_values(bg, lam, 1, 1)
    z = z_of_band_point(bg, lam.real, 1)
    return {"z": z, "lambda": lam.real, "T": data.transmission(lam, zeta),
            "R_minus": data.reflection(lam, zeta, -1), "R_plus": data.reflection(lam, zeta, 1)}


def check_hypothesis1(data, bg, grid=200, strict=True, glm_check=True):
    """Verify the properties the inverse problem relies on.

    Returns ``{"pass": bool, "clauses": {...}}``; with ``strict`` a failing
    clause raises HypothesisViolation.
    """
    clauses = {}
    lam = band_grid(bg, grid).astype(complex)
    up = zeta_values(bg, lam, 1, 1)
    down = zeta_values(bg, lam, 1, -1)
    r_up = data.reflection(lam, up)
    r_down = data.reflection(lam, down)
    sym = float(np.max(np.abs(r_down - np.conj(r_up))))
    clauses["symmetry"] = (sym < 1e-9, f"max |R(conj z) - conj R(z)| = {sym:.3g}")

    mod = np.abs(r_up)
    z = z_of_band_point(bg, lam.real, 1)
    edges_z = [np.exp(1j * _kappa_real(bg, e)) for e in bg.bands.edges]
    edges_z += [np.conj(e) for e in edges_z]
    dist = np.prod([np.abs(z - e) ** 2 for e in edges_z], axis=0)
    c_fit = float(np.min((1 - mod**2) / dist))
    clauses["subunit"] = (bool(np.all(mod < 1)) and c_fit > 0,
                          f"max |R| = {mod.max():.12g}, fitted lower-bound constant {c_fit:.3g}")

    t_up = data.transmission(lam, up)
    t_down = data.transmission(lam, down)
    rm_up = data.reflection(lam, up, -1)
    rp_down = data.reflection(lam, down, 1)
    # cross-multiplied so that R = 0 is admissible
    cons = float(np.max(np.abs(rm_up * t_down + t_up * rp_down) / np.abs(t_down * t_down)))
    clauses["consistency-R"] = (cons < 1e-8, f"max |R_-(z)/R_+(conj z) + T(z)/T(conj z)| = {cons:.3g}")

    bs = bg.bands
    rho_ok = all(bs.locate(r)[0] == "gap" for r in data.rho) and len(set(data.rho)) == len(data.rho)
    clauses["bound-states"] = (rho_ok, f"{len(data.rho)} distinct gap points" if rho_ok else "invalid rho")
    pos = all(g > 0 for g in data.gamma_plus + data.gamma_minus)
    clauses["positive-norming"] = (pos, "all norming constants positive" if pos else "non-positive norming")

    wd = []
    for r in data.rho:
        x = np.array([complex(r)])
        zeta = zeta_values(bg, x)
        h = 1e-6 * max(1.0, abs(r))
        # central difference of w_hat along the gap
        wp = data.w_hat(x + h, zeta_values(bg, x + h))[0]
        wm = data.w_hat(x - h, zeta_values(bg, x - h))[0]
        wd.append(((wp - wm) / (2 * h)).real)
        del zeta
    prod_err = max([abs(gp * gm * d * d - 1) for gp, gm, d in zip(data.gamma_plus, data.gamma_minus, wd)],
                   default=0.0)
    clauses["consistency-norming"] = (prod_err < 1e-5, f"max |gamma_+ gamma_- w'^2 - 1| = {prod_err:.3g}")

    worst = 0.0
    for k, e in enumerate(bs.edges):
        gap_j = (k + 1) // 2
        if 0 < gap_j < bg.q and bs.closed[gap_j - 1]:
            continue
        inward = 1.0 if k % 2 == 0 else -1.0
        at_mu = any(abs(e - m) <= CLUSTER_RADIUS * max(1.0, abs(e)) for m in bs.mu)
        vals = []
        for d in (1e-6, 1e-8):
            x = np.array([complex(e + inward * d * max(1.0, abs(e)))])
            zeta = zeta_values(bg, x, 1, 1)
            r = data.reflection(x, zeta, -1)[0]
            t = data.transmission(x, zeta)[0]
            root = (zeta - 1 / zeta)[0] / 2
            vals.append(abs(root * (r + (-1 if at_mu else 1)) / t))
        if vals[0] > 1e-12:
            worst = max(worst, vals[1] / vals[0])
    clauses["edge-limits"] = (worst < 0.5, f"worst decay ratio over two scales {worst:.3g}")

    if glm_check:
        from .glm import glm_kernel_F
        try:
            kern = glm_kernel_F(data, bg)
            clauses["finite-support"] = (True, f"residue identity max deviation {kern.residue_error:.3g}")
        except HypothesisViolation as exc:
            clauses["finite-support"] = (False, str(exc))

    report = {"pass": all(ok for ok, _ in clauses.values()),
              "clauses": {k: {"pass": bool(ok), "detail": d} for k, (ok, d) in clauses.items()}}
    if strict and not report["pass"]:
        name = next(k for k, (ok, _) in clauses.items() if not ok)
        raise HypothesisViolation(name, clauses[name][1])
    return report
