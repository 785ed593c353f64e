"""Quaternion arrays and the pointwise one-form calculus used by every module.

Quaternions are stored as float arrays with shape (..., 4), components
ordered (w, x, y, z).  The imaginary part (x, y, z) doubles as an R^3
vector, so surface positions, frames and normals all live in the same
representation.  Everything here is exact pointwise algebra; there are
no grids and no tolerances except for unit-normal validation.
"""

import numpy as np

QUAT_DTYPE = np.float64


def quat(w=0.0, x=0.0, y=0.0, z=0.0):
    """Build a single quaternion from scalar components."""
    return np.array([w, x, y, z], dtype=QUAT_DTYPE)


def from_vec(v):
    """Embed R^3 vectors (..., 3) as imaginary quaternions (..., 4)."""
    v = np.asarray(v, dtype=QUAT_DTYPE)
    out = np.zeros(v.shape[:-1] + (4,), dtype=QUAT_DTYPE)
    out[..., 1:] = v
    return out


def to_vec(q):
    """Project quaternions onto their imaginary part, shape (..., 3)."""
    return np.asarray(q)[..., 1:]


def from_real(a):
    """Embed real scalars (...,) as real quaternions (..., 4)."""
    a = np.asarray(a, dtype=QUAT_DTYPE)
    out = np.zeros(a.shape + (4,), dtype=QUAT_DTYPE)
    out[..., 0] = a
    return out


def realpart(q):
    return np.asarray(q)[..., 0]


def qmul(a, b):
    """Quaternion product, broadcasting over leading axes."""
    a = np.asarray(a, dtype=QUAT_DTYPE)
    b = np.asarray(b, dtype=QUAT_DTYPE)
    aw, av = a[..., 0], a[..., 1:]
    bw, bv = b[..., 0], b[..., 1:]
    shape = np.broadcast_shapes(a.shape, b.shape)
    out = np.empty(shape, dtype=QUAT_DTYPE)
    out[..., 0] = aw * bw - np.sum(av * bv, axis=-1)
    out[..., 1:] = (aw[..., None] * bv + bw[..., None] * av
                    + np.cross(av, bv))
    return out


def qconj(q):
    q = np.asarray(q, dtype=QUAT_DTYPE)
    out = q.copy()
    out[..., 1:] *= -1.0
    return out


def qnormsq(q):
    return np.sum(np.square(np.asarray(q, dtype=QUAT_DTYPE)), axis=-1)


def qnorm(q):
    return np.sqrt(qnormsq(q))


def qinv(q):
    n2 = qnormsq(q)
    if np.any(n2 == 0.0):
        raise ZeroDivisionError("quaternion inverse of zero")
    return qconj(q) / n2[..., None]


def qdot(a, b):
    """Euclidean inner product of the 4-component representations."""
    return np.sum(np.asarray(a) * np.asarray(b), axis=-1)


def sandwich(q, p):
    """q * p * conj(q), the rotation/scaling action on imaginary p."""
    return qmul(qmul(q, p), qconj(q))


def check_unit_imaginary(N, tol=1e-9):
    """Validate a unit imaginary quaternion field (a normal field)."""
    N = np.asarray(N)
    if np.max(np.abs(N[..., 0])) > tol:
        raise ValueError("normal field has a real part")
    if np.max(np.abs(qnormsq(N) - 1.0)) > tol:
        raise ValueError("normal field is not unit length")
    return N


# ---------------------------------------------------------------------------
# one-form values

class QForm:
    """Value of a quaternion-valued one-form on a chart: (ax, ay) are the
    evaluations on the coordinate fields d/dx and d/dy.  ax, ay are
    (..., 4) arrays over the chart nodes."""

    __slots__ = ("ax", "ay")

    def __init__(self, ax, ay):
        self.ax = np.asarray(ax, dtype=QUAT_DTYPE)
        self.ay = np.asarray(ay, dtype=QUAT_DTYPE)

    def __add__(self, other):
        return QForm(self.ax + other.ax, self.ay + other.ay)

    def __sub__(self, other):
        return QForm(self.ax - other.ax, self.ay - other.ay)

    def __mul__(self, c):
        return QForm(self.ax * c, self.ay * c)

    __rmul__ = __mul__

    def __neg__(self):
        return QForm(-self.ax, -self.ay)

    def norm(self):
        """Pointwise magnitude sqrt(|ax|^2 + |ay|^2)."""
        return np.sqrt(qnormsq(self.ax) + qnormsq(self.ay))

    def lmul(self, q):
        """Left multiply both components by a quaternion field."""
        return QForm(qmul(q, self.ax), qmul(q, self.ay))

    def rmul(self, q):
        """Right multiply both components by a quaternion field."""
        return QForm(qmul(self.ax, q), qmul(self.ay, q))

    def copy(self):
        return QForm(self.ax.copy(), self.ay.copy())


def star(form):
    """Hodge star through the chart rotation d/dx -> d/dy, d/dy -> -d/dx."""
    return QForm(form.ay, -form.ax)


def split_conformal(form, N):
    """Split a one-form into its conformal and anti-conformal parts.

    The conformal part kc satisfies star(kc) = N kc, the anti-conformal
    part ka satisfies star(ka) = -N ka, and kc + ka = form.  These are
    the unique linear projectors with those properties:
    kc = (form - N star(form))/2, ka = (form + N star(form))/2.
    """
    check_unit_imaginary(N)
    ns = star(form).lmul(N)
    kc = 0.5 * (form - ns)
    ka = 0.5 * (form + ns)
    return kc, ka


def value_tangential(q, N):
    """Tangential part of a quaternion value: (q + N q N)/2.

    Tangential values anticommute with N; real and N-aligned parts
    commute with N and land in the complement.
    """
    nqn = qmul(N, qmul(q, N))
    return 0.5 * (q + nqn)


def value_transversal(q, N):
    """Complementary part (q - N q N)/2, commuting with N."""
    nqn = qmul(N, qmul(q, N))
    return 0.5 * (q - nqn)


def split_tangential(form, N):
    """Split a one-form into tangential and transversal parts w.r.t. N."""
    check_unit_imaginary(N)
    tang = QForm(value_tangential(form.ax, N), value_tangential(form.ay, N))
    perp = QForm(value_transversal(form.ax, N), value_transversal(form.ay, N))
    return tang, perp


def wedge(alpha, beta):
    """Two-form value (alpha ^ beta)(d/dx, d/dy) with quaternion products.

    Order matters: alpha(d/dx) beta(d/dy) - alpha(d/dy) beta(d/dx).
    """
    return qmul(alpha.ax, beta.ay) - qmul(alpha.ay, beta.ax)
