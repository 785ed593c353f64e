"""Principal symbol, well-posedness gating, and the marching solver.

The workhorse configuration is a cylinder chart rotated by pi/4 with
the constant differential i: the chart rows then sit exactly halfway
between the stretch directions (45 degree margin), and the identity
spin field solves the march, so every error is pure solver error.
"""

import numpy as np
import pytest

import quatsurf as qs
from quatsurf import qnorm
from quatsurf.cauchy import (CauchyProblem, build_background,
                             characteristic_angles, check_wellposed,
                             march_solve, reconstruct, stretch_alignment,
                             symbol, symbol_det_profile)

ROT = np.pi / 4


@pytest.fixture(scope="module")
def prob(surf):
    g = surf("cylinder", 33, rotation=ROT)
    return CauchyProblem(g.imm, 1j, row=16)


def test_problem_setup(prob):
    assert prob.row == 16
    assert prob.margin_ok
    assert prob.margin_deg == pytest.approx(45.0, abs=1e-6)
    assert prob.curve.points.shape == (33, 2)
    assert prob.q.phi[0, 0] == 1j


def test_symbol_invertible_off_characteristic(prob):
    s = symbol(prob.imm, prob.tau, (16, 16), (0.0, 1.0))
    assert s.matrix.shape == (4, 4)
    assert abs(s.normalized_det()) > 0.01
    assert s.kernel_dim() == 0
    # normalized det is scale-invariant in the covector
    s2 = symbol(prob.imm, prob.tau, (16, 16), (0.0, 3.0))
    assert s2.normalized_det() == pytest.approx(s.normalized_det(),
                                                rel=1e-10)


def test_symbol_degenerates_on_characteristic(prob):
    t = np.pi / 4
    on = symbol(prob.imm, prob.tau, (16, 16), (np.cos(t), np.sin(t)))
    off = symbol(prob.imm, prob.tau, (16, 16), (0.0, 1.0))
    assert abs(on.normalized_det()) < 1e-3 * abs(off.normalized_det())


def test_det_profile_and_characteristic_angles(prob):
    angles, dets = symbol_det_profile(prob.imm, prob.tau, (16, 16),
                                      n_angles=360)
    assert angles.shape == dets.shape == (360,)
    found = characteristic_angles(prob.imm, prob.tau, (16, 16))
    assert len(found) == 4
    want = np.deg2rad([45.0, 135.0, 225.0, 315.0])
    assert np.abs(np.degrees(np.array(found) - want)).max() < 0.01


def test_characteristics_align_with_stretch(prob):
    found = characteristic_angles(prob.imm, prob.tau, (16, 16))
    errs = stretch_alignment(prob.q, (16, 16), found)
    assert max(errs) < 0.01


def test_check_wellposed_report(prob):
    rep = check_wellposed(prob)
    assert rep["row"] == 16
    assert rep["min_normalized_det"] >= 0.01
    assert rep["angular_margin_deg"] == pytest.approx(45.0, abs=1e-6)


def test_characteristic_curve_rejected(surf):
    g = surf("cylinder", 33, rotation=ROT)
    # real constant differential: stretch directions land on the grid
    # axes, so every grid row is characteristic
    bad = CauchyProblem(g.imm, 1.0, row=16)
    assert not bad.margin_ok
    with pytest.raises(ValueError, match="characteristic"):
        check_wellposed(bad)
    with pytest.raises(ValueError, match="characteristic"):
        march_solve(bad, steps=4)


def test_march_holds_identity_solution(prob):
    spin = march_solve(prob, steps=8)
    lo, hi = spin.band_rows()
    assert (lo, hi) == (8, 24)
    assert np.isnan(spin.lam[:lo]).all()
    assert np.isnan(spin.lam[hi + 1:]).all()
    band = spin.lam[lo:hi + 1]
    ident = np.array([1.0, 0.0, 0.0, 0.0])
    assert np.abs(band - ident).max() < 2e-4


def test_march_argument_validation(prob):
    with pytest.raises(ValueError, match="row spacing"):
        march_solve(prob, steps=2, h_march=0.5 * prob.imm.grid.hy)
    with pytest.raises(ValueError, match=r"\(nx, 4\)"):
        march_solve(prob, steps=2, lam0=np.ones((7, 4)))
    zero0 = np.zeros((prob.imm.grid.nx, 4))
    with pytest.raises(ValueError, match="vanishes"):
        march_solve(prob, steps=2, lam0=zero0)


def test_reconstruct_recovers_background(prob):
    spin = march_solve(prob, steps=8)
    new, rep = reconstruct(prob, spin)
    assert rep["rows"] == (8, 24)
    assert new.grid.ny == 17
    assert new.grid.y0 == pytest.approx(prob.imm.grid.y0
                                        + 8 * prob.imm.grid.hy)
    assert rep["curve_match_rel"] < 1e-4
    assert rep["closedness_rel"] < 5e-3
    assert rep["q_residual_tangential_rel"] < 0.05
    assert rep["q_residual_normal_rel"] < 0.05
    # identity spin: the band must reproduce the background positions
    err = np.abs(new.positions - prob.imm.positions[8:25]).max()
    assert err < 1e-4


def test_reconstruct_needs_five_rows(prob):
    thin = march_solve(prob, steps=1)
    with pytest.raises(ValueError, match="too thin"):
        reconstruct(prob, thin)


def test_build_background_constant_rotation(surf):
    g = surf("cylinder", 33, rotation=ROT)
    th = 0.3
    mu = np.zeros((33, 4))
    mu[:, 0] = np.cos(th)
    mu[:, 3] = np.sin(th)
    new, spin, rep = build_background(g.imm, 1j, row=16, mu_row=mu,
                                      steps=8)
    lo, hi = spin.band_rows()
    # a constant unit spin solves the march, so the extension is the
    # rigidly rotated band
    dev = np.abs(spin.lam[lo:hi + 1] - mu[0]).max()
    assert dev < 2e-4
    d = qs.congruence_distance(new.positions, g.imm.positions[lo:hi + 1])
    assert d < 1e-4
    assert rep["closedness_rel"] < 5e-3
