"""Christoffel dualization: integrate df* = df\\q, verify the duality
identities, and classify pairs of immersions.

Charts are rectangles (simply connected), so closedness of the
reconstructed form is the only obstruction to integrating it.  Path
integrals use an endpoint-corrected trapezoid rule (Euler-Maclaurin
h^2/12 correction with 4th-order endpoint derivatives), which keeps
path-independence deviations at the same order as the stencils.
"""

import numpy as np

from .charts import (build_immersion, closedness_residual, deriv_x, deriv_y,
                     form_rms, rms)
from .quaddiff import QuadDifferential, form_from_qdiff, zero_locus
from .quaternions import (QForm, from_real, qdot, qinv, qmul, qnorm,
                          qnormsq, star, to_vec, wedge)


def _cumint_x(g, hx):
    """Cumulative integral along axis 1 from column 0, corrected trapezoid."""
    T = np.zeros_like(g)
    T[:, 1:] = np.cumsum(0.5 * hx * (g[:, :-1] + g[:, 1:]), axis=1)
    gp = deriv_x(g, hx)
    return T - (hx * hx / 12.0) * (gp - gp[:, :1])


def _cumint_y(g, hy):
    """Cumulative integral along axis 0 from row 0, corrected trapezoid."""
    T = np.zeros_like(g)
    T[1:] = np.cumsum(0.5 * hy * (g[:-1] + g[1:]), axis=0)
    gp = deriv_y(g, hy)
    return T - (hy * hy / 12.0) * (gp - gp[:1])


def integrate_form(grid, form, basepoint=(0, 0), route=None):
    """Path-integrate a closed one-form, zeroed at a basepoint node.

    Paths are routed through a hub node (default: the chart center, so
    the long segments run where the stencils are centered and the form
    is most accurate): hub row across, then up/down the column.  The
    primitive is shifted to vanish at basepoint (j0, i0).  Also returns
    the maximum deviation against the transposed (column-then-row)
    routing, which is the path-independence diagnostic.
    """
    j0, i0 = basepoint
    jr, ir = (grid.ny // 2, grid.nx // 2) if route is None else route
    Ax = _cumint_x(form.ax, grid.hx)
    By = _cumint_y(form.ay, grid.hy)
    row_first = (Ax[jr:jr + 1] - Ax[jr:jr + 1, ir:ir + 1]) \
        + (By - By[jr:jr + 1])
    col_first = (By[:, ir:ir + 1] - By[jr:jr + 1, ir:ir + 1]) \
        + (Ax - Ax[:, ir:ir + 1])
    deviation = float(np.max(qnorm(row_first - col_first)))
    primitive = row_first - row_first[j0:j0 + 1, i0:i0 + 1]
    return primitive, deviation


def _raw_frame(grid, f):
    """Frame fields of a position array without conformality validation.

    Returns (fx, fy, N, e2u, ok) where ok masks nodes with a usable
    (non-degenerate) frame; N is NaN outside the mask.
    """
    fx = deriv_x(f, grid.hx)
    fy = deriv_y(f, grid.hy)
    cross = np.cross(fx[..., 1:], fy[..., 1:])
    cn = np.linalg.norm(cross, axis=-1)
    e2u = qnorm(fx) * qnorm(fy)
    ok = cn > 1e-12 * float(np.max(e2u))
    N = np.zeros_like(f)
    with np.errstate(invalid="ignore", divide="ignore"):
        N[..., 1:] = np.where(ok[..., None], cross / cn[..., None], np.nan)
    return fx, fy, N, e2u, ok


def _mean_curvature(grid, f):
    """Mean curvature of a position array via the conformal split,
    NaN where the frame degenerates."""
    fx, fy, N, e2u, ok = _raw_frame(grid, f)
    Nclean = np.where(ok[..., None], N, 0.0)
    Nx = deriv_x(Nclean, grid.hx)
    Ny = deriv_y(Nclean, grid.hy)
    # conformal part of dN without the unit-N validation
    cx = 0.5 * (Nx - qmul(Nclean, Ny))
    H = -qdot(cx, fx) / qnormsq(fx)
    # nodes whose stencil touched a degenerate node are unreliable
    bad = ~ok
    for _ in range(2):
        grown = bad.copy()
        grown[1:] |= bad[:-1]
        grown[:-1] |= bad[1:]
        grown[:, 1:] |= bad[:, :-1]
        grown[:, :-1] |= bad[:, 1:]
        bad = grown
    return np.where(bad, np.nan, H)


class DualResult:
    """Output of integrate_dual: the dual surface and its diagnostics."""

    def __init__(self, grid, fstar, tau, closedness_field, closedness_rel,
                 path_deviation, branch_nodes, branch_mults, pole_nodes,
                 Hstar, basepoint):
        self.grid = grid
        self.fstar = fstar
        self.tau = tau
        self.closedness_field = closedness_field
        self.closedness_rel = closedness_rel
        self.path_deviation = path_deviation
        self.branch_nodes = branch_nodes
        self.branch_mults = branch_mults
        self.pole_nodes = pole_nodes
        self.Hstar = Hstar
        self.basepoint = basepoint

    @property
    def positions(self):
        return to_vec(self.fstar)

    def as_immersion(self, chart_tol=1e-3):
        """Build a validated immersion from the dual positions (fails on
        charts where the dual branches)."""
        return build_immersion(self.grid, self.positions, chart_tol=chart_tol)


def integrate_dual(imm, q, basepoint=(0, 0), closed_tol=5e-3,
                   branch_tol=1e-6, pole_tol=25.0):
    """Integrate the dual surface from a holomorphic differential.

    Reconstructs tau = df\\q, measures its closedness, and integrates
    from the basepoint (default lower-left node).  Fails on the zero
    differential and on charts where tau is measurably non-closed
    (the immersion is not isothermic for this q).
    """
    if not isinstance(q, QuadDifferential):
        q = QuadDifferential(imm.grid, np.broadcast_to(
            np.asarray(q, np.complex128), (imm.grid.ny, imm.grid.nx)).copy())
    if q.max_abs() == 0.0:
        raise ValueError("trivial differential")

    tau = form_from_qdiff(imm, q)
    closedness, closedness_rel = closedness_residual(imm.grid, tau)
    if closedness_rel > closed_tol:
        raise ValueError(
            "not isothermic for this q: closedness residual %.3e > %.3e"
            % (closedness_rel, closed_tol))

    fstar, path_dev = integrate_form(imm.grid, tau, basepoint)

    try:
        branch_nodes, branch_mults, _ = zero_locus(q, tol=branch_tol)
    except ValueError:
        branch_nodes, branch_mults = [], []

    taumag = tau.norm()
    med = float(np.median(taumag))
    blowup = taumag > pole_tol * med if med > 0 else np.zeros_like(taumag, bool)
    pole_mask = q.pole_mask | blowup
    pole_nodes = [(int(j), int(i)) for j, i in np.argwhere(pole_mask)]

    Hstar = _mean_curvature(imm.grid, fstar)
    return DualResult(imm.grid, fstar, tau, closedness, closedness_rel,
                      path_dev, branch_nodes, branch_mults, pole_nodes,
                      Hstar, tuple(basepoint))


def verify_duality(imm, dual, curv):
    """Residual report for the duality identities.

    (a) classical: dN - H* df* + H df, with df* taken as the
        reconstructed form and H* the measured mean curvature of the
        integrated dual;
    (b) wedge: df* ^ omega - omega ^ df*;
    (c) real multiple: omega - a df* with the pointwise least-squares
        real coefficient a, which is also cross-checked against H*.
    Returns a dict of relative residuals and the fitted-coefficient
    comparison (all chart-RMS normalized).
    """
    tau = dual.tau
    dN = curv.dN
    H = curv.H[..., None]
    Hs = dual.Hstar
    ok = np.isfinite(Hs)

    resid_a = QForm(dN.ax - Hs[..., None] * tau.ax + H * imm.fx,
                    dN.ay - Hs[..., None] * tau.ay + H * imm.fy)
    field_a = np.where(ok, resid_a.norm(), np.nan)
    rel_a = rms(field_a[ok]) / form_rms(dN)

    W1 = wedge(tau, curv.omega)
    W2 = wedge(curv.omega, tau)
    field_b = qnorm(W1 - W2)
    den_b = rms(qnorm(W1))
    rel_b = rms(field_b) / den_b if den_b > 0 else 0.0

    num = qdot(curv.omega.ax, tau.ax) + qdot(curv.omega.ay, tau.ay)
    den = qnormsq(tau.ax) + qnormsq(tau.ay)
    a_fit = num / den
    resid_c = QForm(curv.omega.ax - a_fit[..., None] * tau.ax,
                    curv.omega.ay - a_fit[..., None] * tau.ay)
    den_c = form_rms(curv.omega)
    rel_c = form_rms(resid_c) / den_c if den_c > 0 else 0.0

    diff = np.abs(a_fit - Hs)[ok]
    return {
        "classical_rel": rel_a,
        "classical_field": field_a,
        "wedge_rel": rel_b,
        "wedge_field": field_b,
        "real_multiple_rel": rel_c,
        "fitted_coefficient": a_fit,
        "fitted_vs_Hstar_rms": float(np.sqrt(np.mean(diff ** 2))),
        "fitted_vs_Hstar_max": float(np.max(diff)),
    }


def classify_christoffel(immA, immB, tol=1e-3):
    """Classify a pair of immersions on one grid.

    Returns "dual_pair" when dfB is anti-conformal tangential with
    respect to A's normal, "scaling" when dfB is a constant real
    multiple of dfA, and "unrelated" otherwise (including whenever the
    tangent planes fail to be parallel).
    """
    if immA.grid.nx != immB.grid.nx or immA.grid.ny != immB.grid.ny:
        raise ValueError("immersions must share one grid")
    dot = np.abs(np.sum(to_vec(immA.N) * to_vec(immB.N), axis=-1))
    if float(np.max(1.0 - dot)) > 100 * tol:
        return "unrelated"

    dfB = immB.df
    scaleB = form_rms(dfB)
    s = star(dfB)
    anti = np.sqrt(qnormsq(s.ax + qmul(immA.N, dfB.ax))
                   + qnormsq(s.ay + qmul(immA.N, dfB.ay)))
    perp_x = 0.5 * (dfB.ax - qmul(immA.N, qmul(dfB.ax, immA.N)))
    perp_y = 0.5 * (dfB.ay - qmul(immA.N, qmul(dfB.ay, immA.N)))
    perp = np.sqrt(qnormsq(perp_x) + qnormsq(perp_y))
    if rms(anti) / scaleB < tol and rms(perp) / scaleB < tol:
        return "dual_pair"

    # dfB = (a + b N) dfA with a + i b fitted pointwise
    g = qmul(dfB.ax, qinv(immA.fx))
    a = g[..., 0]
    b = qdot(g, immA.N)
    coeff = from_real(a) + b[..., None] * immA.N
    pred = QForm(qmul(coeff, immA.fx), qmul(coeff, immA.fy))
    misfit = form_rms(dfB - pred) / scaleB
    a_scale = max(1.0, float(np.mean(np.abs(a))))
    if (misfit < tol and float(np.std(a)) < tol * a_scale
            and rms(b) < tol * a_scale):
        return "scaling"
    return "unrelated"
