import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jacobi_resonance.algebra import Polynomial
from jacobi_resonance.background import SurfacePoint, zeta_values
from jacobi_resonance.draws import random_pair
from jacobi_resonance.errors import (ClassMembershipFailed, HypothesisViolation, NonRealCoefficients,
                                     NotAPerfectSquare)
from jacobi_resonance.perturbed import JostPair, perturbed_polys
from jacobi_resonance.reconstruct import (ReconstructionInput, derived_constants, extract_input, f_from_states,
                                          jost0_from_zeros, reconstruct, scattering_from_pair, state_lead,
                                          what_from_F)

from conftest import draws


def _error(a, b):
    return max(np.max(np.abs(np.subtract(a.u, b.u))), np.max(np.abs(np.subtract(a.v, b.v))))


def test_derived_constants_bg2(bg2, pert1):
    c = derived_constants(extract_input(bg2, pert1), bg2)
    assert (c["nu"], c["p"], c["kappa"]) == (2, 1, 5)
    assert c["A_p"] == pytest.approx(1.0)
    assert c["c2"] == pytest.approx(2 / 3)
    assert c["c1"] == pytest.approx(1 / 3)


def test_f_from_states_roundtrip(bg2, pert1):
    inp = extract_input(bg2, pert1)
    F = f_from_states(inp, bg2)
    assert F.allclose(perturbed_polys(bg2, pert1).f_poly, rtol=1e-9)


def test_f_from_states_zero_roots():
    inp = ReconstructionInput(((SurfacePoint(0j, 1), 3),), (), Polynomial([0.0]), Polynomial([0.0, -1.0]), 0.5, 2.0)
    F = f_from_states(inp)
    assert F.degree == 3
    assert np.allclose(F.coeffs, [0, 0, 0, state_lead(0.5, 2.0, 2)])


def test_f_from_states_nonreal():
    inp = ReconstructionInput(((SurfacePoint(1 + 1j, 1), 1),), (), Polynomial([0.0]), Polynomial([-1.0]), 2.0, 1.0)
    with pytest.raises(NonRealCoefficients):
        f_from_states(inp)


def test_what_from_F(bg2, pert1):
    inp = extract_input(bg2, pert1)
    c = derived_constants(inp, bg2)
    one_plus_a, j = what_from_F(f_from_states(inp, bg2), inp.A, bg2, c)
    pair = perturbed_polys(bg2, pert1).pair
    assert one_plus_a.allclose(pair.one_plus_a, rtol=1e-9)
    assert j.allclose(pair.j, rtol=1e-7)
    assert j.lead.real == pytest.approx(1 / 3)


def test_what_from_F_wrong_A(bg2, pert1):
    inp = extract_input(bg2, pert1)
    c = derived_constants(inp, bg2)
    with pytest.raises(NotAPerfectSquare):
        what_from_F(f_from_states(inp, bg2), inp.A + Polynomial([0.0, 1.0]), bg2, c)


def test_jost0_from_zeros(bg2, pert1):
    inp = extract_input(bg2, pert1)
    pair = perturbed_polys(bg2, pert1).pair
    p1, p2 = jost0_from_zeros(inp, bg2)
    assert p1.allclose(pair.p1, rtol=1e-8)
    assert p2.allclose(pair.p2, rtol=1e-12)


def test_zeros_are_jost_zeros(bg2, pert1):
    inp = extract_input(bg2, pert1)
    pair = perturbed_polys(bg2, pert1).pair
    for r in inp.r_zeros:
        lam = np.array([complex(r)])
        best = min(abs(pair.f0(lam, zeta_values(bg2, lam, sheet, s))[0]) for sheet in (1, 2) for s in (1, -1))
        assert best < 1e-9


def test_negative_norming_rejected(bg2, pert1):
    pair = perturbed_polys(bg2, pert1).pair
    flipped = JostPair(bg2, pair.one_plus_a, -1.0 * pair.j, pair.p1, pair.p2)
    with pytest.raises(ClassMembershipFailed, match="norming positivity"):
        scattering_from_pair(flipped, bg2)


def test_nonsimple_input_rejected(bg2, pert1):
    inp = extract_input(bg2, pert1)
    s0, _ = inp.states[0]
    bad = ReconstructionInput(((s0, 2),) + inp.states[2:], inp.r_zeros, inp.A, inp.phi0_plus, inp.c3, inp.v0)
    with pytest.raises(HypothesisViolation):
        reconstruct(bad, bg2)


def test_full_chain_bg2(bg2, pert1):
    pert, report = reconstruct(extract_input(bg2, pert1), bg2)
    assert _error(pert, pert1) < 1e-6
    assert report["constants"]["nu"] == 2


def test_json_roundtrip(bg2, pert1):
    inp = extract_input(bg2, pert1)
    back = ReconstructionInput.from_json(inp.to_json())
    assert _error(reconstruct(back, bg2)[0], pert1) < 1e-6


def test_randomized_suite():
    accepted, rejected = 0, 0
    for bg, pert in draws(2024, 30):
        try:
            inp = extract_input(bg, pert)
            rec, _ = reconstruct(inp, bg)
        except HypothesisViolation:
            rejected += 1
            continue
        accepted += 1
        assert _error(rec, pert) < 1e-6
    assert accepted >= 20


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_reconstruct_property(seed):
    bg, pert = random_pair(np.random.default_rng(seed))
    try:
        inp = extract_input(bg, pert)
        rec, _ = reconstruct(inp, bg)
    except HypothesisViolation:
        return
    assert _error(rec, pert) < 1e-6
    assert f_from_states(inp, bg).allclose(perturbed_polys(bg, pert).f_poly, rtol=1e-6)
