import dataclasses
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_resonance.algebra import Polynomial
from jacobi_resonance.artifacts import dumps
from jacobi_resonance.background import SurfacePoint, quasimomentum, zeta_values
from jacobi_resonance.draws import random_pair
from jacobi_resonance.errors import AtBandEdge, HypothesisViolation
from jacobi_resonance.perturbed import JostFamily, Perturbation, perturbed_polys
from jacobi_resonance.scattering import (ScatteringData, assemble_scattering_data, band_grid,
                                         check_hypothesis1, data_from_pair, norming_constants, pole_split,
                                         scattering_grid, smatrix, z_of_band_point)
from jacobi_resonance.states import locate_states

pairs = st.integers(0, 2**32 - 1).map(lambda s: random_pair(np.random.default_rng(s)))


def _unitarity(data, n=200):
    g = scattering_grid(data, n)
    t2 = np.abs(g["T"]) ** 2
    return max(np.max(np.abs(t2 + np.abs(g["R_minus"]) ** 2 - 1)), np.max(np.abs(t2 + np.abs(g["R_plus"]) ** 2 - 1)))


def test_pole_split_bg2(bg2):
    split = pole_split(bg2)
    assert len(split.m_plus) + len(split.m_minus) == 1 and not split.m_edge
    assert (bg2.a(0) * split.d_plus * split.d_minus).allclose(bg2.phi_q, atol=1e-10)


def test_pole_split_free(free2):
    split = pole_split(free2)
    assert split.m_edge and split.d_plus.degree + split.d_minus.degree == 1
    assert (free2.a(0) * split.d_plus * split.d_minus).allclose(free2.phi_q, atol=1e-10)


def test_zero_data_is_reflectionless(bg2):
    data = data_from_pair(bg2, JostFamily(bg2, Perturbation.zero(1)).pair, [])
    g = scattering_grid(data, 50)
    assert np.max(np.abs(g["T"] - 1)) < 1e-14
    assert np.max(np.abs(g["R_minus"])) == 0 and np.max(np.abs(g["R_plus"])) == 0
    assert check_hypothesis1(data, bg2)["pass"]


def test_smatrix_bg2(bg2, pert1):
    z = quasimomentum(bg2, SurfacePoint(2.0, 1))[1]
    s = smatrix(bg2, pert1, z)
    assert abs(s["lambda"] - 2.0) < 1e-12
    assert abs(abs(s["T"]) ** 2 + abs(s["R_minus"]) ** 2 - 1) < 1e-10
    assert abs(abs(s["T"]) ** 2 + abs(s["R_plus"]) ** 2 - 1) < 1e-10
    assert abs(s["det_S"] - np.conj(s["alpha"]) / s["alpha"]) < 1e-10


def test_smatrix_at_edge(bg2, pert1):
    with pytest.raises(AtBandEdge):
        smatrix(bg2, pert1, 1.0)


def test_consistency_bg2(bg2, pert1):
    for t in np.linspace(0.1, np.pi - 0.1, 20):
        z = np.exp(-1j * t)
        if abs(np.sin(2 * t)) < 1e-3:
            continue
        a, b = smatrix(bg2, pert1, z), smatrix(bg2, pert1, np.conj(z))
        assert abs(a["R_minus"] / b["R_plus"] + a["T"] / b["T"]) < 1e-10


def test_norming_bg2(bg2, pert1):
    out = norming_constants(bg2, pert1)
    assert len(out["rho"]) == len(locate_states(bg2, pert1).bound_states()) > 0
    for gp, gm, d, lp, lm in zip(out["gamma_plus"], out["gamma_minus"], out["w_hat_deriv"],
                                 out["gamma_plus_l2"], out["gamma_minus_l2"]):
        assert gp > 0 and gm > 0
        assert abs(gp * gm * d * d - 1) < 1e-8
        assert abs(gp - lp) < 1e-6 * gp and abs(gm - lm) < 1e-6 * gm


def test_sinh_form(bg2, pert1):
    bs = bg2.bands
    for r in norming_constants(bg2, pert1, oracle=False)["rho"]:
        zeta = zeta_values(bg2, np.array([complex(r)]))[0]
        _, j = bs.locate(r)
        kappa, _ = quasimomentum(bg2, SurfacePoint(r, 1))
        want = -2 * (-1) ** (bg2.q - j) * np.sinh(bg2.q * kappa.imag)
        assert abs((zeta - 1 / zeta) - want) < 1e-10


def test_serialization_roundtrip(bg2, pert1):
    data = assemble_scattering_data(bg2, pert1)
    back = ScatteringData.from_json(json.loads(dumps(data.to_json())), bg2)
    for a, b in ((data.one_plus_a, back.one_plus_a), (data.j, back.j), (data.s_p, back.s_p), (data.s_q, back.s_q)):
        assert np.max(np.abs(a.coeffs - b.coeffs)) < 1e-12
    assert np.allclose(back.gamma_plus, data.gamma_plus, rtol=1e-12, atol=0)
    assert np.allclose(back.rho, data.rho, rtol=1e-12, atol=0)
    assert back.side == data.side


def test_hypothesis_pass(bg2, pert1):
    for side in ("right", "left"):
        assert check_hypothesis1(assemble_scattering_data(bg2, pert1, side), bg2)["pass"]


def test_hypothesis_corrupted_norming(bg2, pert1):
    data = assemble_scattering_data(bg2, pert1)
    bad = dataclasses.replace(data, gamma_plus=tuple(2 * g for g in data.gamma_plus))
    report = check_hypothesis1(bad, bg2, strict=False, glm_check=False)
    assert not report["clauses"]["consistency-norming"]["pass"]
    with pytest.raises(HypothesisViolation):
        check_hypothesis1(bad, bg2)


def test_hypothesis_scaled_reflection(bg2, pert1):
    data = assemble_scattering_data(bg2, pert1)
    bad = dataclasses.replace(data, s_p=1.1 * data.s_p, s_q=1.1 * data.s_q)
    report = check_hypothesis1(bad, bg2, strict=False, glm_check=False)
    assert not report["clauses"]["subunit"]["pass"]


def test_grid_size(bg2, pert1):
    assert len(band_grid(bg2, 200)) == 200
    g = scattering_grid(assemble_scattering_data(bg2, pert1), 77)
    assert all(len(v) == 77 for v in g.values())


@settings(max_examples=25, deadline=None)
@given(pairs)
def test_unitarity_and_residues(pair):
    bg, pert = pair
    data = assemble_scattering_data(bg, pert)
    assert _unitarity(data) < 1e-10
    g = scattering_grid(data, 200)
    assert np.min(np.abs(g["T"])) > 0
    fam = perturbed_polys(bg, pert)
    for r, d in zip(data.rho, norming_constants(bg, pert, oracle=False)["w_hat_deriv"]):
        lam = np.array([complex(r)])
        zeta = zeta_values(bg, lam)
        s1 = fam.pair.s_hat(lam, zeta)[0]
        s2 = fam.pair.s_hat(lam, 1 / zeta)[0]
        delta = bg.delta(r).real
        assert abs(s1 * s2 + 4 * (1 - delta**2)) < 1e-8 * abs(4 * (1 - delta**2))
        # residue of T at rho by a symmetric difference of (lam - rho) T
        h = 1e-4 * min(abs(r - e) for e in bg.bands.edges)
        x = np.array([r + h, r - h], dtype=complex)
        tt = data.transmission(x, zeta_values(bg, x))
        # steps as actually represented, since h can sit near the spacing of floats around r
        res = ((x[0].real - r) * tt[0] + (x[1].real - r) * tt[1]) / 2
        want = 4 * (delta**2 - 1) / d**2
        assert abs(res**2 - want) < 1e-6 * abs(want)


@settings(max_examples=20, deadline=None)
@given(pairs)
def test_norming_matches_l2(pair):
    bg, pert = pair
    out = norming_constants(bg, pert)
    for key in ("gamma_plus", "gamma_minus"):
        for a, b in zip(out[key], out[key + "_l2"]):
            assert abs(a - b) < 1e-6 * b
