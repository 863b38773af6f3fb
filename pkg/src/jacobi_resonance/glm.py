"""Gel'fand-Levitan-Marchenko kernel, its solution and coefficient recovery.

Integrals over the unit circle are pulled back to the spectral arcs: each
arc ``[lo, hi]`` (bands merged across closed gaps) is parametrized by
``lam = mid + half * cos(t)``, ``t in (0, pi)``, traversed on both sides. The
open midpoint rule never touches a band edge, where the measure has
its inverse square-root singularity absorbed by the substitution. The nodes
in ``t`` are graded toward the ends (see ``graded_nodes``).
"""

from dataclasses import dataclass

import numpy as np

from .background import psi_table, zeta_values
from .errors import HypothesisViolation, NotPositive, QuadratureNotConverged, SupportLeak
from .perturbed import Perturbation

QUAD_TOL = 1e-10
START_NODES = 64
MAX_NODES = 8192
RESIDUE_TOL = 1e-8
SUPPORT_TOL = 1e-6
T_FLOOR = 1e-6


def spectral_arcs(bg):
    """Bands merged across closed gaps, as ``(lo, hi)`` pairs."""
    bs = bg.bands
    arcs = [list(bs.band(1))]
    for j in range(2, bg.q + 1):
        lo, hi = bs.band(j)
        if bs.closed[j - 2]:
            arcs[-1][1] = hi
        else:
            arcs.append([lo, hi])
    return [tuple(a) for a in arcs]


def measure_weight(bg, band_index, t):
    """Density of ``d omega / (2 pi i)`` in the arc parameter ``t``.

    Returns ``(lam, weight)``: the integral over arc ``band_index`` (1-based)
    of ``g`` against ``d omega / (2 pi i)``, both sides together, equals
    ``int_0^pi (g(lam + i0) + g(lam - i0)) weight dt``.
    """
    arcs = spectral_arcs(bg)
    lo, hi = arcs[band_index - 1]
    t = np.asarray(t, dtype=float)
    mid, half = (lo + hi) / 2, (hi - lo) / 2
    lam = mid + half * np.cos(t)
    rest = np.ones_like(lam)
    for k, (a, b) in enumerate(arcs):
        if k != band_index - 1:
            rest = rest * (lam - a) * (lam - b)
    # closed gaps contribute a double root of 1 - Delta^2 that cancels against phi_q / Delta'
    dd = bg.delta.deriv()(lam).real
    num = bg.phi_q(lam).real
    for j in range(1, bg.q):
        if bg.bands.closed[j - 1]:
            c = bg.bands.alpha[j - 1]
            if lo < c < hi:
                dd = dd / (lam - c)
                num = num / (lam - c)
    sign = np.sign(dd)
    weight = num * sign / (2 * np.pi * bg.a(0) * np.sqrt(np.abs(rest)))
    return lam, weight


def graded_nodes(n):
    """Midpoint nodes on ``(0, pi)`` graded toward both ends, with their weights.

    ``t = pi (s - sin(2 pi s) / (2 pi))`` keeps the integrand even about each
    end, so the rule stays geometrically convergent, and resolves zeros of
    ``w_hat`` lying just past a band edge.
    """
    s = (np.arange(n) + 0.5) / n
    t = np.pi * (s - np.sin(2 * np.pi * s) / (2 * np.pi))
    dt = np.pi * (1 - np.cos(2 * np.pi * s)) / n
    # the outermost nodes carry negligible weight; keep them off the edges themselves
    return np.clip(t, T_FLOOR, np.pi - T_FLOOR), dt


def circle_integral(bg, func, tol=QUAD_TOL, start=START_NODES, max_nodes=MAX_NODES):
    """``(1/2 pi i) oint func d omega`` with node doubling.

    ``func(lam, zeta)`` is evaluated on both sides of each arc and may return
    an array of any trailing shape. Doubling stops once successive rules agree
    to ``tol`` relative to ``max(1, |I|)``.
    """
    arcs = spectral_arcs(bg)

    def rule(n):
        t, dt = graded_nodes(n)
        total = 0
        for j in range(1, len(arcs) + 1):
            lam, w = measure_weight(bg, j, t)
            w = w * dt
            lam = lam.astype(complex)
            up = zeta_values(bg, lam, 1, 1)
            down = zeta_values(bg, lam, 1, -1)
            vals = np.asarray(func(lam, up)) + np.asarray(func(lam, down))
            total = total + np.tensordot(w, vals, axes=(0, 0))
        return total

    n = start
    prev = rule(n)
    err = np.inf
    while n < max_nodes:
        n *= 2
        cur = rule(n)
        err = float(np.max(np.abs(cur - prev)))
        if err <= tol * max(1.0, float(np.max(np.abs(cur)))):
            return cur, n, err
        prev = cur
    raise QuadratureNotConverged(f"circle integral not within {tol:g} at {max_nodes} nodes (last change {err:.3g})")


@dataclass(frozen=True)
class GLMKernel:
    """Table of ``F_+(l, m)`` or ``F_-(l, m)`` on a square index window."""

    side: str
    indices: tuple
    table: np.ndarray
    nu: int
    nodes: int
    residue_error: float
    imag_max: float

    def __call__(self, l, m):
        lo = self.indices[0]
        if self.side == "right" and l + m > self.nu:
            return 0.0
        if self.side == "left" and l + m <= 0:
            return 0.0
        return float(self.table[l - lo, m - lo])


def _row_indices(side, nu, n):
    # the kernel vanishes past its support, so two extra entries suffice
    if side == "right":
        return [n + l for l in range(max(nu - 2 * n, 0) + 3)]
    return [n - l for l in range(max(2 * n - 1, 0) + 3)]


def _window(side, nu, n_lo, n_hi):
    idx = [i for n in range(n_lo, n_hi + 1) for i in _row_indices(side, nu, n)]
    return min(idx), max(idx)


def glm_kernel_F(data, bg, n_lo=None, n_hi=None, tol=QUAD_TOL, max_nodes=MAX_NODES):
    """Kernel of the GLM equation for ``data.side``.

    Entries outside the nonzero zone are computed as well and must vanish to
    ``RESIDUE_TOL``; this is the residue identity that makes the kernel
    finitely supported. A failure raises HypothesisViolation.
    """
    nu = data.nu
    p = max((nu + 1) // 2, 0)
    n_lo = -3 if n_lo is None else n_lo
    n_hi = p + 3 if n_hi is None else n_hi
    lo, hi = _window(data.side, nu, n_lo - 1, n_hi + 1)
    idx = list(range(lo, hi + 1))
    sign = 1 if data.side == "right" else -1
    d_poly = data.split.d_plus if sign > 0 else data.split.d_minus

    def integrand(lam, zeta):
        r = data.reflection(lam, zeta)
        psi = psi_table(bg, idx, lam, zeta, sign)
        mat = np.stack([psi[i] for i in idx], axis=-1)
        return r[:, None, None] * mat[:, :, None] * mat[:, None, :]

    f0, nodes, _ = circle_integral(bg, integrand, tol=tol, max_nodes=max_nodes)
    imag_max = float(np.max(np.abs(f0.imag)))
    table = f0.real.copy()
    for r, g in zip(data.rho, data.gamma):
        lam = np.array([complex(r)])
        zeta = zeta_values(bg, lam)
        psi = psi_table(bg, idx, lam, zeta, sign)
        vec = np.array([psi[i][0].real for i in idx]) * d_poly(r).real
        table += g * np.outer(vec, vec)
    ll = np.add.outer(np.array(idx), np.array(idx))
    outside = ll > nu if sign > 0 else ll <= 0
    scale = max(1.0, float(np.max(np.abs(table))))
    residue_error = float(np.max(np.abs(table[outside]), initial=0.0)) / scale
    if residue_error > RESIDUE_TOL:
        raise HypothesisViolation("finite-support", f"kernel outside its support reaches {residue_error:.3g}")
    if imag_max > 1e3 * tol * scale:
        raise HypothesisViolation("symmetry", f"kernel has imaginary part {imag_max:.3g}")
    table[outside] = 0.0
    return GLMKernel(data.side, tuple(idx), table, nu, nodes, residue_error, imag_max)


@dataclass(frozen=True)
class TransformRow:
    """Row ``K(n, .)`` of the transformation operator."""

    n: int
    side: str
    values: dict
    min_eig: float
    residual: float

    @property
    def diag(self):
        return self.values[self.n]


def solve_glm(kernel, n):
    """Solve the GLM equation for row ``n`` on a window just past the kernel's support."""
    idx = _row_indices(kernel.side, kernel.nu, n)
    lo, hi = kernel.indices[0], kernel.indices[-1]
    if min(idx) < lo or max(idx) > hi:
        raise ValueError(f"row {n} needs indices outside the kernel window [{lo}, {hi}]")
    m = np.eye(len(idx)) + np.array([[kernel(a, b) for b in idx] for a in idx])
    min_eig = float(np.linalg.eigvalsh(m).min())
    if min_eig <= 0:
        raise NotPositive(f"I + F is not positive definite for n={n} (min eigenvalue {min_eig:.3g})")
    rhs = np.zeros(len(idx))
    rhs[0] = 1.0
    x = np.linalg.solve(m, rhs)
    k_nn = np.sqrt(x[0])
    values = {i: v / k_nn for i, v in zip(idx, x)}
    residual = float(np.max(np.abs(m @ np.array([values[i] for i in idx]) - rhs / k_nn)))
    return TransformRow(n, kernel.side, values, min_eig, residual)


def recover_perturbation(bg, kernel, n_lo=-3, n_hi=None, tol=SUPPORT_TOL):
    """Perturbation coefficients from one kernel.

    Coefficients are computed on ``[n_lo, n_hi]``; anything above ``tol``
    outside the support implied by the kernel raises SupportLeak. Returns
    ``(perturbation, report)``.
    """
    p = max((kernel.nu + 1) // 2, 0)
    n_hi = p + 3 if n_hi is None else n_hi
    rows = {n: solve_glm(kernel, n) for n in range(n_lo - 1, n_hi + 2)}

    def k(n, m):
        return rows[n].values[m]

    u, v = {}, {}
    for n in range(n_lo, n_hi + 1):
        if kernel.side == "right":
            a = bg.a(n) * k(n + 1, n + 1) / k(n, n)
            v[n] = bg.a(n) * k(n, n + 1) / k(n, n) - bg.a(n - 1) * k(n - 1, n) / k(n - 1, n - 1)
        else:
            a = bg.a(n) * k(n, n) / k(n + 1, n + 1)
            v[n] = bg.a(n - 1) * k(n, n - 1) / k(n, n) - bg.a(n) * k(n + 1, n) / k(n + 1, n + 1)
        u[n] = a - bg.a(n)
    leak = {n: (u[n], v[n]) for n in u if not 0 <= n <= p and max(abs(u[n]), abs(v[n])) > tol}
    if leak:
        raise SupportLeak(f"coefficients outside [0, {p}]: {leak}")
    pert = Perturbation(tuple(u[n] for n in range(p + 1)), tuple(v[n] for n in range(p + 1)))
    report = {
        "side": kernel.side,
        "nodes": kernel.nodes,
        "residue_error": kernel.residue_error,
        "max_row_residual": max(r.residual for r in rows.values()),
        "min_eigenvalue": min(r.min_eig for r in rows.values()),
        "outside_support_max": max([max(abs(u[n]), abs(v[n])) for n in u if not 0 <= n <= p], default=0.0),
    }
    return pert, report
