"""Sampled conformal immersions on rectangular isothermal charts.

A chart is a uniform (ny, nx) grid over [x0, x0+(nx-1)hx] x [y0, ...].
All per-node fields are stored row-major with shape (ny, nx, ...), row
index j along y and column index i along x.  Frames come from 4th order
finite differences: centered stencils in the interior, one-sided at the
two boundary rows/columns on each side.
"""

import numpy as np

from .quaternions import (QForm, from_real, from_vec, qdot, qmul, qnorm,
                          qnormsq, split_conformal, split_tangential,
                          to_vec, value_tangential)


class GridChart:
    """Uniform rectangular grid: node (j, i) sits at (x0 + i hx, y0 + j hy)."""

    def __init__(self, nx, ny, hx, hy, x0=0.0, y0=0.0):
        if nx < 5 or ny < 5:
            raise ValueError("grid needs nx, ny >= 5 for the stencils")
        if hx <= 0 or hy <= 0:
            raise ValueError("grid spacings must be positive")
        self.nx = int(nx)
        self.ny = int(ny)
        self.hx = float(hx)
        self.hy = float(hy)
        self.x0 = float(x0)
        self.y0 = float(y0)

    @classmethod
    def from_bounds(cls, x0, x1, y0, y1, nx, ny):
        return cls(nx, ny, (x1 - x0) / (nx - 1), (y1 - y0) / (ny - 1), x0, y0)

    @property
    def xs(self):
        return self.x0 + self.hx * np.arange(self.nx)

    @property
    def ys(self):
        return self.y0 + self.hy * np.arange(self.ny)

    def mesh(self):
        return np.meshgrid(self.xs, self.ys)

    def spec(self):
        """Plain-dict description for reports."""
        return {"nx": self.nx, "ny": self.ny, "hx": self.hx, "hy": self.hy,
                "x0": self.x0, "y0": self.y0}

    def __repr__(self):
        return ("GridChart(nx=%d, ny=%d, hx=%g, hy=%g, x0=%g, y0=%g)"
                % (self.nx, self.ny, self.hx, self.hy, self.x0, self.y0))


def deriv_x(field, hx):
    """4th-order d/dx along axis 1 of an (ny, nx, ...) field."""
    f = np.asarray(field, dtype=np.float64)
    d = np.empty_like(f)
    d[:, 2:-2] = (f[:, :-4] - 8 * f[:, 1:-3] + 8 * f[:, 3:-1] - f[:, 4:]) / (12 * hx)
    d[:, 0] = (-25 * f[:, 0] + 48 * f[:, 1] - 36 * f[:, 2]
               + 16 * f[:, 3] - 3 * f[:, 4]) / (12 * hx)
    d[:, 1] = (-3 * f[:, 0] - 10 * f[:, 1] + 18 * f[:, 2]
               - 6 * f[:, 3] + f[:, 4]) / (12 * hx)
    d[:, -2] = (3 * f[:, -1] + 10 * f[:, -2] - 18 * f[:, -3]
                + 6 * f[:, -4] - f[:, -5]) / (12 * hx)
    d[:, -1] = (25 * f[:, -1] - 48 * f[:, -2] + 36 * f[:, -3]
                - 16 * f[:, -4] + 3 * f[:, -5]) / (12 * hx)
    return d


def deriv_y(field, hy):
    """4th-order d/dy along axis 0 of an (ny, nx, ...) field."""
    f = np.asarray(field, dtype=np.float64)
    d = np.empty_like(f)
    d[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * hy)
    d[0] = (-25 * f[0] + 48 * f[1] - 36 * f[2] + 16 * f[3] - 3 * f[4]) / (12 * hy)
    d[1] = (-3 * f[0] - 10 * f[1] + 18 * f[2] - 6 * f[3] + f[4]) / (12 * hy)
    d[-2] = (3 * f[-1] + 10 * f[-2] - 18 * f[-3] + 6 * f[-4] - f[-5]) / (12 * hy)
    d[-1] = (25 * f[-1] - 48 * f[-2] + 36 * f[-3] - 16 * f[-4] + 3 * f[-5]) / (12 * hy)
    return d


def interior(field):
    """Restrict a chart field to nodes served by centered stencils.

    One-sided boundary stencils carry ~6x larger error constants, so
    summary statistics are taken over this interior by default.
    """
    return np.asarray(field)[2:-2, 2:-2]


def rms(values):
    """Root-mean-square over all entries."""
    return float(np.sqrt(np.mean(np.square(np.asarray(values, dtype=np.float64)))))


def form_rms(form):
    """Chart RMS norm of a one-form: sqrt(mean(|ax|^2 + |ay|^2))."""
    return float(np.sqrt(np.mean(qnormsq(form.ax) + qnormsq(form.ay))))


def closedness_residual(grid, form):
    """Exterior-derivative residual of a one-form: (field, relative).

    field = |d(form)(dx, dy)| per node.  The relative value is measured
    over interior nodes only (re-differentiating across the switch from
    centered to one-sided stencils inflates the outer two rings by 1/h)
    against the larger of the cross-derivative magnitude and the form
    magnitude divided by the chart length; the floor matters for forms
    with constant components, where the raw derivative scale is pure
    rounding error and a ratio against it would be meaningless.
    """
    d_yx = deriv_y(form.ax, grid.hy)
    d_xy = deriv_x(form.ay, grid.hx)
    field = qnorm(d_xy - d_yx)
    dscale = rms(np.sqrt(qnormsq(interior(d_yx)) + qnormsq(interior(d_xy))))
    length = max((grid.nx - 1) * grid.hx, (grid.ny - 1) * grid.hy)
    scale = max(dscale, form_rms(form) / length)
    rel = rms(interior(field)) / scale if scale > 0 else 0.0
    return field, rel


def field_stats(field, interior_only=True):
    """Mean/std/min/max of a scalar chart field (interior nodes by default)."""
    a = interior(field) if interior_only else np.asarray(field)
    return {"mean": float(np.mean(a)), "std": float(np.std(a)),
            "min": float(np.min(a)), "max": float(np.max(a))}


class ChartImmersion:
    """A conformal immersion sampled on a chart, with its derived frame.

    Fields: f (imaginary quaternion positions), fx, fy (first derivatives),
    N (unit normal fx x fy / |fx x fy|), u (log conformal factor with
    e^u = sqrt(|fx| |fy|)), and the conformality residual
    max(| |fx|-|fy| |, |<fx, fy>|) / e^{2u} reported pointwise and as a
    max over interior nodes (the outer two rings use one-sided stencils
    whose error constants would otherwise dominate the figure).
    """

    def __init__(self, grid, f, fx, fy, N, u, conformality_field):
        self.grid = grid
        self.f = f
        self.fx = fx
        self.fy = fy
        self.N = N
        self.u = u
        self.conformality_field = conformality_field
        self.conformality_residual = float(np.max(interior(conformality_field)))

    @property
    def df(self):
        return QForm(self.fx, self.fy)

    @property
    def expu(self):
        return np.exp(self.u)

    @property
    def positions(self):
        return to_vec(self.f)

    def diameter(self):
        p = self.positions.reshape(-1, 3)
        return float(np.linalg.norm(p.max(axis=0) - p.min(axis=0)))


def build_immersion(grid, samples, chart_tol=1e-3, frame_tol=1e-8):
    """Differentiate position samples and validate conformality.

    samples: (ny, nx, 3) positions, or (ny, nx, 4) imaginary quaternions.
    Rejects non-finite input, degenerate frames |fx x fy| < frame_tol e^{2u},
    and charts whose interior conformality residual exceeds chart_tol.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[:2] != (grid.ny, grid.nx):
        raise ValueError("sample array shape does not match the grid")
    if samples.shape[2:] == (3,):
        f = from_vec(samples)
    elif samples.shape[2:] == (4,):
        f = samples.copy()
        f[..., 0] = 0.0
    else:
        raise ValueError("samples must be (ny, nx, 3) or (ny, nx, 4)")

    bad = ~np.isfinite(samples).all(axis=-1)
    if bad.any():
        j, i = map(int, np.argwhere(bad)[0])
        raise ValueError("non-finite sample at node (j=%d, i=%d)" % (j, i))

    fx = deriv_x(f, grid.hx)
    fy = deriv_y(f, grid.hy)
    nfx = qnorm(fx)
    nfy = qnorm(fy)
    e2u = nfx * nfy
    cross = np.cross(fx[..., 1:], fy[..., 1:])
    crossnorm = np.linalg.norm(cross, axis=-1)

    # e2u == 0 means a vanishing partial; the relative test below would
    # pass it (0 < 0 is false), so catch it explicitly
    degen = (e2u == 0.0) | (crossnorm < frame_tol * e2u)
    if degen.any():
        j, i = map(int, np.argwhere(degen)[0])
        raise ValueError("degenerate frame at node (j=%d, i=%d)" % (j, i))

    N = from_vec(cross / crossnorm[..., None])
    conf = np.maximum(np.abs(nfx - nfy), np.abs(qdot(fx, fy))) / e2u
    inner = interior(conf)
    worst = float(np.max(inner))
    if worst > chart_tol:
        j, i = map(int, np.argwhere(conf == worst)[0])
        raise ValueError(
            "chart is not conformal: residual %.3e > %.3e at node (j=%d, i=%d)"
            % (worst, chart_tol, j, i))

    u = 0.5 * np.log(e2u)
    return ChartImmersion(grid, f, fx, fy, N, u, conf)


class CurvatureData:
    """Curvature extraction results: mean curvature H, the anti-conformal
    tangential one-form omega from the normal's derivative, the second
    fundamental form II, and the complex coefficient hopf_qd of its
    trace-free (2,0) part in the chart coordinate."""

    def __init__(self, H, omega, II, hopf_qd, dN, conformal_part):
        self.H = H
        self.omega = omega
        self.II = II
        self.hopf_qd = hopf_qd
        self.dN = dN
        self.conformal_part = conformal_part


def weingarten_split(imm):
    """Split dN = -H df + omega and extract II and its (2,0) coefficient.

    H is defined by the conformal part of dN being -H df; omega is the
    anti-conformal remainder.  II(X, Y) = -<dN(X), df(Y)> symmetrized;
    hopf_qd = (II11 - II22)/4 - (i/2) II12.
    """
    Nx = deriv_x(imm.N, imm.grid.hx)
    Ny = deriv_y(imm.N, imm.grid.hy)
    dN = QForm(Nx, Ny)
    cpart, omega = split_conformal(dN, imm.N)
    H = -qdot(cpart.ax, imm.fx) / qnormsq(imm.fx)

    II11 = -qdot(Nx, imm.fx)
    II22 = -qdot(Ny, imm.fy)
    II12 = -0.5 * (qdot(Nx, imm.fy) + qdot(Ny, imm.fx))
    II = np.empty(II11.shape + (2, 2))
    II[..., 0, 0] = II11
    II[..., 0, 1] = II12
    II[..., 1, 0] = II12
    II[..., 1, 1] = II22
    hopf_qd = 0.25 * (II11 - II22) - 0.5j * II12
    return CurvatureData(H, omega, II, hopf_qd, dN, cpart)


def weingarten_residual(imm, curv):
    """Pointwise |dN + H df - omega| and its chart-RMS relative to |dN|."""
    H = curv.H[..., None]
    resid = QForm(curv.dN.ax + H * imm.fx - curv.omega.ax,
                  curv.dN.ay + H * imm.fy - curv.omega.ay)
    field = resid.norm()
    rel = form_rms(resid) / form_rms(curv.dN)
    return field, rel


def anticonformality_residual(imm, curv, use_remainder=True):
    """Chart-RMS of |star(w) + N w| relative to |dN| for the Hopf form w.

    The projector output curv.omega satisfies the identity exactly by
    construction (machine precision), so by default the residual is
    evaluated on the Weingarten remainder w = dN + H df, whose defect
    against anti-conformality is a genuine discretization-order
    quantity.  Pass use_remainder=False to check the projector output.
    Normalizing by |dN| rather than |w| keeps the figure meaningful on
    totally umbilic charts, where w itself shrinks to rounding noise.
    """
    from .quaternions import star
    if use_remainder:
        H = curv.H[..., None]
        w = QForm(curv.dN.ax + H * imm.fx, curv.dN.ay + H * imm.fy)
    else:
        w = curv.omega
    s = star(w)
    num = QForm(s.ax + qmul(imm.N, w.ax), s.ay + qmul(imm.N, w.ay))
    den = form_rms(curv.dN)
    return num.norm(), form_rms(num) / den if den > 0 else 0.0


def tangentiality_residual(imm, curv):
    """Chart-RMS of the transversal part of dN, relative to |dN|."""
    _, perp = split_tangential(curv.dN, imm.N)
    return perp.norm(), form_rms(perp) / form_rms(curv.dN)


def relate_hopf(imm, curv):
    """Residual of the frame identity tying omega to the II coefficient.

    Reconstructs the anti-conformal tangential form with complex
    coefficient 2 * hopf_qd through the frame and compares with omega.
    Returns the pointwise residual field and the chart-RMS relative value.
    """
    from .quaddiff import form_from_qdiff
    recon = form_from_qdiff(imm, 2.0 * curv.hopf_qd)
    resid = curv.omega - recon
    den = form_rms(curv.omega)
    rel = form_rms(resid) / den if den > 1e-300 else form_rms(resid)
    return resid.norm(), rel


def umbilics(curv, tol=1e-6):
    """Nodes where |hopf_qd| < tol * (chart max |II| entry).

    Returns a sorted list of (j, i) index pairs; empty when the surface
    has no umbilic on the chart at this tolerance.
    """
    scale = float(np.max(np.abs(curv.II)))
    hits = np.argwhere(np.abs(curv.hopf_qd) < tol * scale)
    return [(int(j), int(i)) for j, i in hits]


def holo_function_check(imm, w):
    """Residual field of the holomorphicity test for a complex function.

    w is a complex (ny, nx) field a + i b.  Builds g = a + b N, forms the
    two-form value gx fy - gy fx and returns the magnitude of its
    tangential part.  For holomorphic w this shrinks at discretization
    order; for w = conj(z) it sits near 2 e^u.
    """
    w = np.asarray(w)
    a = np.ascontiguousarray(w.real, dtype=np.float64)
    b = np.ascontiguousarray(w.imag, dtype=np.float64)
    g = from_real(a) + b[..., None] * imm.N
    gx = deriv_x(g, imm.grid.hx)
    gy = deriv_y(g, imm.grid.hy)
    T = qmul(gx, imm.fy) - qmul(gy, imm.fx)
    return qnorm(value_tangential(T, imm.N))
