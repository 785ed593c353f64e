"""File formats: OBJ meshes, CSV node fields, deterministic JSON reports.

Everything here is plain text and reproducible: fixed float formatting,
sorted JSON keys, no timestamps, so identical inputs give byte-identical
artifacts.
"""

import hashlib
import json
import os

import numpy as np

from .charts import GridChart

FLOAT_FMT = "%.17g"


def write_obj(path, positions, comment=None):
    """Write an (ny, nx, 3) position grid as a triangulated OBJ mesh.

    Vertices are emitted row-major (node (j, i) is vertex j*nx + i + 1);
    each grid cell becomes two triangles, 2 (nx-1)(ny-1) faces total.
    """
    pos = np.asarray(positions, dtype=np.float64)
    if pos.ndim != 3 or pos.shape[2] != 3:
        raise ValueError("positions must be (ny, nx, 3)")
    ny, nx = pos.shape[:2]
    lines = []
    if comment:
        lines.append("# " + comment)
    for j in range(ny):
        for i in range(nx):
            lines.append("v " + " ".join(FLOAT_FMT % c for c in pos[j, i]))
    for j in range(ny - 1):
        for i in range(nx - 1):
            a = j * nx + i + 1
            b = a + 1
            c = a + nx + 1
            d = a + nx
            lines.append("f %d %d %d" % (a, b, c))
            lines.append("f %d %d %d" % (a, c, d))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")
    return path


def write_field_csv(path, grid, fields):
    """Write named per-node fields to CSV with x,y coordinate columns.

    fields: dict name -> (ny, nx) real array or (ny, nx, k) array whose
    components become name_0..name_{k-1}.  Rows are emitted row-major.
    """
    cols = ["x", "y"]
    data = []
    X, Y = grid.mesh()
    data.append(X.ravel())
    data.append(Y.ravel())
    for name in fields:
        arr = np.asarray(fields[name])
        if arr.shape[:2] != (grid.ny, grid.nx):
            raise ValueError("field %r does not match the grid" % name)
        if arr.ndim == 2:
            cols.append(name)
            data.append(arr.ravel())
        elif arr.ndim == 3:
            for k in range(arr.shape[2]):
                cols.append("%s_%d" % (name, k))
                data.append(arr[..., k].ravel())
        else:
            raise ValueError("field %r has unsupported rank" % name)
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for r in range(grid.ny * grid.nx):
            fh.write(",".join(FLOAT_FMT % col[r] for col in data) + "\n")
    return path


def _infer_grid(x, y):
    xs = np.unique(x)
    ys = np.unique(y)
    nx, ny = xs.size, ys.size
    if nx < 5 or ny < 5:
        raise ValueError("CSV grid too small (need at least 5 x 5 nodes)")
    if nx * ny != x.size:
        raise ValueError("CSV nodes do not form a full rectangular grid")
    for vals, name in ((xs, "x"), (ys, "y")):
        d = np.diff(vals)
        if np.any(np.abs(d - d[0]) > 1e-9 * max(abs(d[0]), 1e-30)):
            raise ValueError("CSV %s coordinates are not uniformly spaced"
                             % name)
    grid = GridChart(nx, ny, float(xs[1] - xs[0]), float(ys[1] - ys[0]),
                     float(xs[0]), float(ys[0]))
    jj = np.searchsorted(ys, y)
    ii = np.searchsorted(xs, x)
    return grid, jj, ii


def _read_csv(path, required):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = np.loadtxt(fh, delimiter=",", ndmin=2)
    missing = [c for c in required if c not in header]
    if missing:
        raise ValueError("CSV %s is missing columns: %s"
                         % (path, ", ".join(missing)))
    if rows.shape[1] != len(header):
        raise ValueError("CSV row width does not match its header")
    return {name: rows[:, k] for k, name in enumerate(header)}


def read_positions_csv(path):
    """Read x,y,px,py,pz node samples into (grid, (ny, nx, 3) positions)."""
    cols = _read_csv(path, ["x", "y", "px", "py", "pz"])
    grid, jj, ii = _infer_grid(cols["x"], cols["y"])
    pos = np.full((grid.ny, grid.nx, 3), np.nan)
    pos[jj, ii, 0] = cols["px"]
    pos[jj, ii, 1] = cols["py"]
    pos[jj, ii, 2] = cols["pz"]
    if not np.isfinite(pos).all():
        raise ValueError("CSV does not cover every grid node")
    return grid, pos


def read_qdiff_csv(path):
    """Read x,y,re_phi,im_phi samples into (grid, complex (ny, nx) phi)."""
    cols = _read_csv(path, ["x", "y", "re_phi", "im_phi"])
    grid, jj, ii = _infer_grid(cols["x"], cols["y"])
    phi = np.full((grid.ny, grid.nx), np.nan, dtype=np.complex128)
    phi[jj, ii] = cols["re_phi"] + 1j * cols["im_phi"]
    if not np.isfinite(phi).all():
        raise ValueError("CSV does not cover every grid node")
    return grid, phi


def _jsonable(obj):
    """Round-trip-safe JSON payload: numpy scalars/arrays to Python,
    floats rounded to 12 significant digits, non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(obj[k]) for k in obj}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        f = float(obj)
        if not np.isfinite(f):
            return repr(f)
        return float("%.12g" % f)
    # bool before int: bool subclasses int and would serialize as 0/1
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, complex):
        return {"re": _jsonable(obj.real), "im": _jsonable(obj.imag)}
    return obj


def canonical_json(obj):
    """Deterministic JSON text: sorted keys, rounded floats, newline."""
    return json.dumps(_jsonable(obj), sort_keys=True, indent=2) + "\n"


def config_hash(config):
    """Short stable hash of a configuration mapping."""
    return hashlib.sha256(canonical_json(config).encode()).hexdigest()[:16]


def write_report(path, report):
    text = canonical_json(report)
    with open(path, "w") as fh:
        fh.write(text)
    return path


def ensure_outdir(path):
    os.makedirs(path, exist_ok=True)
    return path
