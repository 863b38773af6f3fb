import warnings

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_resonance.algebra import Polynomial
from jacobi_resonance.background import SurfacePoint, bloch_psi, zeta_values
from jacobi_resonance.draws import random_pair
from jacobi_resonance.errors import ClassViolation
from jacobi_resonance.perturbed import (JostFamily, Perturbation, aj_decomposition, f_polynomial,
                                        jost_eval, perturbed_polys, validate_class, wronskian_at,
                                        wronskians)
from jacobi_resonance.scattering import band_point_of_z

pairs = st.integers(0, 2**32 - 1).map(lambda s: random_pair(np.random.default_rng(s)))


def _zeta(bg, lam, sheet=1):
    return zeta_values(bg, np.atleast_1d(np.asarray(lam, dtype=complex)), sheet)


def test_validate_class(bg2, pert1):
    assert validate_class(bg2, pert1) == 2
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        assert validate_class(bg2, Perturbation((0, 0), (1, 1))) == 1
    with pytest.raises(ClassViolation):
        validate_class(bg2, Perturbation((0, 1), (0, 0)))
    with pytest.raises(ClassViolation):
        validate_class(bg2, Perturbation((-2.5, 1), (1, 0)))


def test_constants_bg2(bg2, pert1):
    c = perturbed_polys(bg2, pert1).constants
    assert c["A_p"] == pytest.approx(1.0) and c["c1"] == pytest.approx(1 / 3)
    assert c["c2"] == pytest.approx(2 / 3) and c["c3"] == pytest.approx(2 / 9)


def test_perturbed_wronskian(bg2, pert1):
    fam = perturbed_polys(bg2, pert1)
    (t0, f0), (t1, f1) = fam.plus(0), fam.plus(1)
    assert (fam.a(0) * (t0 * f1 - t1 * f0)).allclose(Polynomial([2.0]), atol=1e-12)


def test_zero_perturbation_is_background(bg2):
    fam = JostFamily(bg2, Perturbation.zero(2))
    for n in range(-2, 5):
        assert fam.plus(n)[0].allclose(bg2.theta_phi(n)[0], atol=1e-14)
        assert fam.minus(n)[1].allclose(bg2.theta_phi(n)[1], atol=1e-14)
    assert fam.pair.j.is_zero() and fam.pair.one_plus_a.allclose(Polynomial([1.0]))
    assert fam.f_poly.allclose(4 * bg2.one_minus_delta_sq)


def test_zero_perturbation_wronskians(bg2):
    pt = SurfacePoint(0.4 + 0.6j, 1)
    w = wronskians(bg2, Perturbation.zero(1), pt)
    zeta = _zeta(bg2, pt.lam)[0]
    assert abs(w["s"]) < 1e-12
    assert abs(w["w_hat"] - (zeta - 1 / zeta)) < 1e-12


def test_jost_anchor(bg2, pert1):
    pt = SurfacePoint(2.0 + 0.3j, 1)
    assert jost_eval(bg2, pert1, 0, pt, -1) == pytest.approx(1.0)
    assert abs(jost_eval(bg2, pert1, 2, pt, 1) - bloch_psi(bg2, 2, pt, 1)) < 1e-13


def test_jost_recurrence(bg2, pert1):
    fam = JostFamily(bg2, pert1)
    pt = SurfacePoint(2 + 0.3j, 1)
    for sign in (1, -1):
        f = {n: jost_eval(bg2, pert1, n, pt, sign) for n in range(-2, 5)}
        for n in range(-1, 4):
            res = fam.a(n - 1) * f[n - 1] + fam.a(n) * f[n + 1] + fam.b(n) * f[n] - pt.lam * f[n]
            assert abs(res) < 1e-10


def test_wronskian_n_independent(bg2, pert1):
    fam = JostFamily(bg2, pert1)
    lam = np.array([1 + 1j])
    zeta = _zeta(bg2, lam)
    w = wronskians(bg2, pert1, SurfacePoint(1 + 1j, 1))["w"]
    for n in range(-2, pert1.p + 4):
        assert abs(wronskian_at(fam, n, lam, zeta, zeta, -1, 1)[0] - w) < 1e-10


def test_aj_bg2(bg2, pert1):
    aj = aj_decomposition(bg2, pert1)
    assert aj["A"].degree == 1 and aj["J"].degree == 3
    assert aj["J"].lead.real == pytest.approx(1 / 3, abs=1e-12)


def test_state_polynomial_bg2(bg2, pert1):
    f = f_polynomial(bg2, pert1)
    assert f.degree == 5
    assert f.lead.real == pytest.approx(2 / 9, abs=1e-12)


def test_state_polynomial_product(bg2, pert1):
    pair = perturbed_polys(bg2, pert1).pair
    # in the gap the star is the sheet swap
    lam = np.linspace(-1.45, 1.45, 20)
    w1 = pair.w_hat(lam, _zeta(bg2, lam, 1))
    w2 = pair.w_hat(lam, _zeta(bg2, lam, 2))
    assert np.max(np.abs(pair.f_poly(lam) - w1 * w2)) < 1e-9
    # on a band the swap is complex conjugation
    lam = np.linspace(1.55, 2.45, 20)
    w = pair.w_hat(lam, _zeta(bg2, lam))
    assert np.max(np.abs(pair.f_poly(lam) - w * np.conj(w))) < 1e-9


@settings(max_examples=30, deadline=None)
@given(pairs)
def test_degrees_and_leading_laws(pair):
    bg, pert = pair
    fam = perturbed_polys(bg, pert)
    c, nu, q = fam.constants, pert.nu, bg.q
    assert fam.pair.one_plus_a.degree == nu - 1 and fam.pair.j.degree == nu + q - 1
    lead = c["c2"] * pert.v[0] / (2 * c["A_p"])
    if nu >= 2:
        assert fam.pair.one_plus_a.lead.real == pytest.approx(-lead, rel=1e-8)
        assert fam.pair.j.lead.real == pytest.approx(lead, rel=1e-8)
        assert fam.f_poly.lead.real == pytest.approx(c["c3"] * pert.v[0], rel=1e-8)
    else:
        # with nu = 1 the constant 1 + A keeps its 1
        assert fam.pair.j.lead.real == pytest.approx(c["c1"] * c["A_p"] - fam.pair.one_plus_a.lead.real,
                                                      rel=1e-8)
        assert fam.f_poly.lead.real == pytest.approx(c["c3"] * pert.v[0] - 1, rel=1e-8)


def _random_points(bg, rng, n):
    lam = rng.uniform(-3, 3, n) + 1j * rng.uniform(0.05, 2, n) * rng.choice([-1, 1], n)
    return lam


@settings(max_examples=30, deadline=None)
@given(pairs, st.integers(0, 2**32 - 1))
def test_pointwise_identities(pair, seed):
    bg, pert = pair
    fam = perturbed_polys(bg, pert)
    rng = np.random.default_rng(seed)
    lam = _random_points(bg, rng, 50)
    for sheet in (1, 2):
        zeta = _zeta(bg, lam, sheet)
        w = fam.pair.w_hat(lam, zeta)
        s = fam.pair.s_hat(lam, zeta)
        w_star = fam.pair.w_hat(lam, 1 / zeta)
        s_star = fam.pair.s_hat(lam, 1 / zeta)
        two_i_omega = zeta - 1 / zeta
        scale = np.abs(w * w_star) + np.abs(two_i_omega) ** 2 + np.abs(s * s_star)
        assert np.max(np.abs(w * w_star + two_i_omega**2 - s * s_star) / scale) < 1e-9
        f0 = fam.pair.f0(lam, zeta)
        assert np.max(np.abs(w + s - two_i_omega * f0) / (np.abs(w) + np.abs(s))) < 1e-10
        assert np.max(np.abs(fam.pair.f_poly(lam) - w * w_star) / np.abs(w * w_star)) < 1e-9
    for lam_k in lam[:10]:
        pt = SurfacePoint(lam_k, 1)
        direct = wronskians(bg, pert, pt)["w_hat"]
        assert abs(direct - fam.pair.w_hat(np.array([lam_k]), _zeta(bg, lam_k))[0]) < 1e-9 * max(1, abs(direct))


def _circle(bg, n):
    t = (np.arange(n) + 0.5) * 2 * np.pi / n
    z = np.exp(1j * t)
    zq = z**bg.q
    keep = np.abs(zq * zq - 1) > 1e-3
    return z[keep]


@settings(max_examples=20, deadline=None)
@given(pairs)
def test_circle_functional_equation(pair):
    bg, pert = pair
    fam = perturbed_polys(bg, pert)
    for z in _circle(bg, 100):
        pt = band_point_of_z(bg, z)
        lam = np.array([pt.lam])
        zeta = zeta_values(bg, lam, 1, pt.side)
        w, w_inv = fam.pair.w_hat(lam, zeta)[0], fam.pair.w_hat(lam, 1 / zeta)[0]
        s, s_inv = fam.pair.s_hat(lam, zeta)[0], fam.pair.s_hat(lam, 1 / zeta)[0]
        zq = z**bg.q
        assert abs(zq - zeta[0]) < 1e-9
        res = w * w_inv + (zq - 1 / zq) ** 2 - s * s_inv
        assert abs(res) < 1e-9 * max(1.0, abs(w * w_inv))
        assert abs(w) >= abs(zq - 1 / zq) * (1 - 1e-12)


@settings(max_examples=20, deadline=None)
@given(pairs)
def test_band_edge_identities(pair):
    bg, pert = pair
    pair_ = perturbed_polys(bg, pert).pair
    bs = bg.bands
    for j in bs.open_gaps():
        for edge in bs.gap(j):
            lam = np.array([complex(edge)])
            # exact multiplier at an edge avoids the square-root amplification
            zeta = np.array([complex(np.sign(bg.delta(edge).real))])
            w, s, jv = pair_.w_hat(lam, zeta)[0], pair_.s_hat(lam, zeta)[0], pair_.j(lam)[0]
            tol = 1e-8 * max(1.0, abs(w))
            # f0 stays finite at the edge unless a Dirichlet point sits exactly on it
            if bg.phi_q(edge) != 0:
                assert abs(s + w) < tol and abs(w + jv) < tol
            else:
                assert abs(s - w) < tol


def test_asymptotics(bg2, pert1):
    from jacobi_resonance.background import lambda_of_z, quasimomentum
    fam = perturbed_polys(bg2, pert1)
    c, q, nu = fam.constants, bg2.q, pert1.nu
    big = lambda_of_z(bg2, 1e3 * np.exp(0.3j))
    zeta = zeta_values(bg2, np.array([big.lam]), 2)
    w = fam.pair.w_hat(np.array([big.lam]), zeta)[0]
    z = quasimomentum(bg2, big)[1]
    ratio = w * (-c["A_p"] / (c["c2"] * pert1.v[0])) * z ** (-(nu + q - 1))
    assert abs(ratio - 1) < 0.05
