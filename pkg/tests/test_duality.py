"""Dual-surface integration, duality identities, and pair classification."""

import numpy as np
import pytest

import quatsurf as qs
from quatsurf.charts import GridChart, build_immersion, interior, rms
from quatsurf.duality import integrate_form
from quatsurf.quaternions import QForm, from_vec, qnorm


def test_integrate_form_recovers_potential():
    n = 33
    h = 2.0 / (n - 1)
    g = GridChart(nx=n, ny=n, hx=h, hy=h, x0=-1.0, y0=-1.0)
    X, Y = g.mesh()
    # exact differential of (x^2 y, y^3, x + y)
    ax = from_vec(np.stack([2 * X * Y, np.zeros_like(X), np.ones_like(X)],
                           axis=-1))
    ay = from_vec(np.stack([X ** 2, 3 * Y ** 2, np.ones_like(X)], axis=-1))
    primitive, deviation = integrate_form(g, QForm(ax, ay))
    want = np.stack([X ** 2 * Y, Y ** 3, X + Y], axis=-1)
    want -= want[0, 0]
    got = primitive[..., 1:]
    assert deviation < 1e-12
    assert np.max(np.abs(got - want)) < 1e-10


def test_integrate_form_basepoint_and_routing():
    n = 17
    g = GridChart(nx=n, ny=n, hx=0.1, hy=0.1, x0=0.0, y0=0.0)
    X, Y = g.mesh()
    ax = from_vec(np.stack([np.ones_like(X)] * 3, axis=-1))
    ay = from_vec(np.stack([np.zeros_like(X)] * 3, axis=-1))
    prim, _ = integrate_form(g, QForm(ax, ay), basepoint=(5, 7))
    assert np.max(np.abs(prim[5, 7])) < 1e-14
    # same form, different hub: answers agree because the form is closed
    prim2, _ = integrate_form(g, QForm(ax, ay), basepoint=(5, 7),
                              route=(1, 1))
    assert np.max(qnorm(prim - prim2)) < 1e-12


def test_integrate_dual_cylinder(surf, dual_of):
    gen = surf("cylinder", 33)
    dual = dual_of("cylinder", 33)
    assert dual.closedness_rel < 1e-3
    assert dual.path_deviation < 1e-3
    assert dual.branch_nodes == []
    assert dual.pole_nodes == []
    # known dual: unit cylinder again, up to translation
    got = dual.positions - dual.positions.reshape(-1, 3).mean(axis=0)
    want = gen.dual_known - gen.dual_known.reshape(-1, 3).mean(axis=0)
    assert rms(np.linalg.norm(got - want, axis=-1)) < 1e-3


def test_dual_normals_flip(surf, dual_of):
    gen = surf("cylinder", 65)
    istar = dual_of("cylinder", 65).as_immersion()
    resid = qnorm(istar.N + gen.imm.N)
    assert rms(interior(resid)) < 1e-6


def test_verify_duality_residuals(surf, dual_of):
    gen = surf("catenoid", 33)
    dual = dual_of("catenoid", 33)
    curv = qs.weingarten_split(gen.imm)
    rep = qs.verify_duality(gen.imm, dual, curv)
    assert rep["classical_rel"] < 5e-3
    assert rep["wedge_rel"] < 5e-3
    assert rep["real_multiple_rel"] < 5e-3
    assert rep["fitted_vs_Hstar_rms"] < 5e-3


def test_not_isothermic_for_wrong_differential(surf):
    gen = surf("catenoid", 33)
    with pytest.raises(ValueError, match="not isothermic"):
        qs.integrate_dual(gen.imm, 1.0j)
    with pytest.raises(ValueError, match="trivial"):
        qs.integrate_dual(gen.imm, 0.0)


def test_branch_point_detection(surf, dual_of):
    dual = dual_of("enneper", 65)
    assert dual.branch_nodes == [(32, 32)]
    assert dual.branch_mults == [1]
    # the branched dual is not an immersion on this chart
    with pytest.raises(ValueError):
        dual.as_immersion()


def test_classify_christoffel(surf, dual_of):
    cyl = surf("cylinder", 33)
    cat = surf("catenoid", 33)
    rng = np.random.default_rng(7)
    shift = rng.standard_normal(3)
    scaled = build_immersion(cyl.imm.grid, 2.0 * cyl.imm.positions + shift)
    dstar = dual_of("cylinder", 33).as_immersion()
    assert qs.classify_christoffel(cyl.imm, scaled) == "scaling"
    assert qs.classify_christoffel(cyl.imm, dstar) == "dual_pair"
    assert qs.classify_christoffel(cyl.imm, cat.imm) == "unrelated"


def test_dual_of_dual_returns_to_start(surf, dual_of):
    gen = surf("cylinder", 65)
    istar = dual_of("cylinder", 65).as_immersion()
    dd = qs.integrate_dual(istar, gen.q_known)
    sim = qs.similarity_distance(dd.positions, gen.imm.positions)
    assert sim < 1e-4


def test_grid_mismatch_rejected(surf):
    gen = surf("cylinder", 33)
    other = GridChart(nx=9, ny=9, hx=0.1, hy=0.1, x0=0.0, y0=0.0)
    wrong = qs.QuadDifferential.constant(other, 1.0)
    with pytest.raises(ValueError):
        qs.integrate_dual(gen.imm, wrong)
