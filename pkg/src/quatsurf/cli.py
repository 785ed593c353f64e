"""Command-line front end: generators, analysis pipelines, invariant
verification, and convergence ladders, with reproducible artifacts.

Artifacts are OBJ meshes, CSV node fields, and canonical JSON reports
(sorted keys, fixed float formatting, no timestamps), so a repeated run
with the same configuration produces byte-identical output.  Exit codes:
0 success, 1 configuration/validation error, 2 numerical failure; on
failure a machine-readable JSON error naming the failing module,
operation, and node (when known) is printed to stderr.
"""

import argparse
import json
import os
import re
import sys

import numpy as np

from .charts import (anticonformality_residual, build_immersion, field_stats,
                     interior, relate_hopf, rms, tangentiality_residual,
                     umbilics, weingarten_residual, weingarten_split)
from .quaternions import qconj, qmul, qnorm, quat
from .quaddiff import QuadDifferential, check_holomorphic
from .duality import classify_christoffel, integrate_dual, verify_duality
from .bonnet import (bonnet_pair, shape_distortion_check,
                     umbilic_branch_correspondence)
from .cauchy import CauchyProblem, check_wellposed, march_solve, reconstruct
from .generators import CATALOG, make_surface
from .align import similarity_distance
from .io import (config_hash, ensure_outdir, read_positions_csv,
                 read_qdiff_csv, write_field_csv, write_obj, write_report)

OUTDIR_ENV = "QUATSURF_OUTDIR"
DEFAULT_OUTDIR = "quatsurf-out"
COMMANDS = ("generate", "analyze", "dual", "bonnet", "solve-ivp", "verify",
            "converge")

# node coordinates embedded in library error messages, e.g. "(j=3, i=17)"
_NODE_RE = re.compile(r"\(j=(\d+),\s*i=(\d+)\)")


class ConfigError(ValueError):
    """Invalid run configuration (exit code 1)."""


class _Step:
    """Tracks which module/operation is active, for error reports."""

    def __init__(self):
        self.module = "quatsurf.cli"
        self.operation = "parse"

    def at(self, module, operation):
        self.module = "quatsurf." + module
        self.operation = operation


class RunConfig:
    """Validated settings for one CLI invocation.

    Collects the command, input sources (generator name + parameters or
    input file paths), grid size, tolerances, output directory, and seed
    into one record.  ``as_dict`` returns the canonical form that is
    embedded, along with its hash, in every report.
    """

    def __init__(self, command, generator=None, params=None, input_path=None,
                 qdiff_path=None, q=None, eps=1.0, row=None, steps=8,
                 n=65, closed_tol=5e-3, chart_tol=1e-3, umbilic_tol=1e-6,
                 classify_tol=1e-3, det_tol=0.01, outdir=None, seed=0,
                 checks=None, kind=None, levels=3):
        self.command = command
        self.generator = generator
        self.params = dict(params or {})
        self.input_path = input_path
        self.qdiff_path = qdiff_path
        self.q = q
        self.eps = eps
        self.row = row
        self.steps = steps
        self.n = n
        self.closed_tol = closed_tol
        self.chart_tol = chart_tol
        self.umbilic_tol = umbilic_tol
        self.classify_tol = classify_tol
        self.det_tol = det_tol
        self.outdir = outdir
        self.seed = seed
        self.checks = list(checks or [])
        self.kind = kind
        self.levels = levels
        self.validate()

    def validate(self):
        if self.command not in COMMANDS:
            raise ConfigError("unknown command: %r" % (self.command,))
        if self.n < 5:
            raise ConfigError("grid size n must be at least 5, got %d"
                              % self.n)
        if self.levels < 1:
            raise ConfigError("levels must be at least 1")
        if self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if self.eps <= 0:
            raise ConfigError("eps must be positive, got %g" % self.eps)
        for name in ("closed_tol", "chart_tol", "umbilic_tol",
                     "classify_tol", "det_tol"):
            val = getattr(self, name)
            if not (val > 0):
                raise ConfigError("%s must be positive, got %r" % (name, val))
        if self.generator is not None and self.generator not in CATALOG:
            raise ConfigError("unknown generator %r; choose from %s"
                              % (self.generator, ", ".join(sorted(CATALOG))))
        for path in (self.input_path, self.qdiff_path):
            if path is not None and not os.path.isfile(path):
                raise ConfigError("input file does not exist: %s" % path)
        needs_source = self.command in ("generate", "analyze", "dual",
                                        "bonnet", "solve-ivp")
        if needs_source and self.generator is None \
                and self.input_path is None:
            raise ConfigError("command %r needs --generator or --input"
                              % self.command)
        if self.command == "converge":
            kinds = ("weingarten", "dual", "bonnet", "ivp")
            if self.kind not in kinds:
                raise ConfigError("converge needs --kind from %s"
                                  % (", ".join(kinds)))
            if self.generator is None:
                raise ConfigError("converge resamples the surface at each "
                                  "level and therefore needs --generator")
            if self.qdiff_path is not None:
                raise ConfigError("converge cannot refine a fixed --qdiff "
                                  "file; use --q or a generator with a "
                                  "known differential")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")

    def as_dict(self):
        return {
            "command": self.command,
            "generator": self.generator,
            "params": self.params,
            "input": self.input_path,
            "qdiff": self.qdiff_path,
            "q": self.q,
            "eps": self.eps,
            "row": self.row,
            "steps": self.steps,
            "n": self.n,
            "tolerances": self.tolerances(),
            "seed": self.seed,
            "checks": self.checks,
            "kind": self.kind,
            "levels": self.levels,
        }

    def tolerances(self):
        return {
            "closed_tol": self.closed_tol,
            "chart_tol": self.chart_tol,
            "umbilic_tol": self.umbilic_tol,
            "classify_tol": self.classify_tol,
            "det_tol": self.det_tol,
        }


def _parse_param_list(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError("--param expects key=value, got %r" % item)
        key, _, raw = item.partition("=")
        key = key.strip()
        if not key:
            raise ConfigError("--param has empty key in %r" % item)
        try:
            params[key] = float(raw)
        except ValueError:
            raise ConfigError("--param %s: %r is not a number" % (key, raw))
    return params


def _parse_complex(text):
    try:
        return complex(text.replace(" ", ""))
    except ValueError:
        raise ConfigError("cannot parse %r as a complex number "
                          "(use forms like 1, -2.5, 1j, 0.5+0.5j)" % text)


def _load_surface(config, step):
    """Build the working immersion from the generator or an input file.

    Returns (immersion, q_known, dual_known, label).  Generator metadata
    rides along so downstream commands can default the quadratic
    differential to the catalog value.
    """
    if config.generator is not None:
        step.at("generators", "make_surface")
        gen = make_surface(config.generator, n=config.n, **config.params)
        return gen.imm, gen.q_known, gen.dual_known, gen.name
    step.at("io", "read_positions_csv")
    grid, positions = read_positions_csv(config.input_path)
    step.at("charts", "build_immersion")
    imm = build_immersion(grid, positions, chart_tol=config.chart_tol)
    label = os.path.splitext(os.path.basename(config.input_path))[0]
    return imm, None, None, label


def _load_qdiff(config, imm, q_known, step):
    """Resolve the quadratic differential: --qdiff file, --q constant, or
    the generator's catalog value."""
    if config.qdiff_path is not None:
        step.at("io", "read_qdiff_csv")
        grid, phi = read_qdiff_csv(config.qdiff_path)
        if grid.ny != imm.grid.ny or grid.nx != imm.grid.nx:
            raise ValueError("quadratic differential grid %dx%d does not "
                             "match surface grid %dx%d"
                             % (grid.ny, grid.nx, imm.grid.ny, imm.grid.nx))
        return QuadDifferential(imm.grid, phi)
    if config.q is not None:
        return QuadDifferential.constant(imm.grid, _parse_complex(config.q))
    if q_known is not None:
        return q_known
    raise ConfigError("no quadratic differential: pass --q or --qdiff, "
                      "or use a generator with a known one")


def _nodes_list(nodes, limit=64):
    return [[int(j), int(i)] for j, i in list(nodes)[:limit]]


def _band_lam(spin):
    """Spin values restricted to the solved band (outside rows are nan)."""
    if spin.row_span is None:
        return spin.lam
    lo, hi = spin.row_span
    return spin.lam[lo:hi + 1]


def _position_fields(imm):
    p = imm.positions
    return {"px": p[..., 0], "py": p[..., 1], "pz": p[..., 2]}


# ---------------------------------------------------------------------------
# command handlers: each returns (results dict, grid) and writes artifacts


def _cmd_generate(config, outdir, step):
    imm, q_known, dual_known, label = _load_surface(config, step)
    step.at("io", "write_obj")
    write_obj(os.path.join(outdir, "%s_surface.obj" % label), imm.positions,
              comment="generated surface: %s" % label)
    fields = _position_fields(imm)
    fields["log_density"] = imm.u
    fields["conformality"] = imm.conformality_field
    step.at("io", "write_field_csv")
    write_field_csv(os.path.join(outdir, "%s_fields.csv" % label),
                    imm.grid, fields)
    results = {
        "label": label,
        "diameter": imm.diameter(),
        "conformality_residual": imm.conformality_residual,
        "log_density": field_stats(imm.u),
        "has_known_qdiff": q_known is not None,
        "has_known_dual": dual_known is not None,
    }
    return results, imm.grid


def _cmd_analyze(config, outdir, step):
    imm, q_known, _, label = _load_surface(config, step)
    step.at("charts", "weingarten_split")
    curv = weingarten_split(imm)
    step.at("charts", "weingarten_residual")
    _, wrel = weingarten_residual(imm, curv)
    _, arel = anticonformality_residual(imm, curv)
    _, trel = tangentiality_residual(imm, curv)
    _, hrel = relate_hopf(imm, curv)
    step.at("charts", "umbilics")
    umb = umbilics(curv, tol=config.umbilic_tol)
    step.at("io", "write_field_csv")
    write_field_csv(os.path.join(outdir, "%s_curvature.csv" % label),
                    imm.grid,
                    {"H": curv.H,
                     "re_hopf": curv.hopf_qd.real,
                     "im_hopf": curv.hopf_qd.imag,
                     "conformality": imm.conformality_field})
    results = {
        "label": label,
        "H": field_stats(curv.H),
        "hopf_abs": field_stats(np.abs(curv.hopf_qd)),
        "umbilic_count": len(umb),
        "umbilic_nodes": _nodes_list(umb),
        "weingarten_rel": wrel,
        "anticonformality_rel": arel,
        "tangentiality_rel": trel,
        "hopf_consistency_rel": hrel,
        "conformality_residual": imm.conformality_residual,
    }
    return results, imm.grid


def _cmd_dual(config, outdir, step):
    imm, q_known, dual_known, label = _load_surface(config, step)
    q = _load_qdiff(config, imm, q_known, step)
    step.at("duality", "integrate_dual")
    dual = integrate_dual(imm, q, closed_tol=config.closed_tol)
    step.at("charts", "weingarten_split")
    curv = weingarten_split(imm)
    step.at("duality", "verify_duality")
    checks = verify_duality(imm, dual, curv)
    step.at("io", "write_obj")
    write_obj(os.path.join(outdir, "%s_dual.obj" % label), dual.positions,
              comment="dual surface of %s" % label)
    results = {
        "label": label,
        "closedness_rel": dual.closedness_rel,
        "path_deviation": dual.path_deviation,
        "branch_nodes": _nodes_list(dual.branch_nodes),
        "branch_multiplicities": [int(m) for m in dual.branch_mults],
        "pole_count": len(dual.pole_nodes),
        "H_dual": field_stats(dual.Hstar),
        "classical_rel": checks["classical_rel"],
        "wedge_rel": checks["wedge_rel"],
        "real_multiple_rel": checks["real_multiple_rel"],
        "fitted_vs_Hdual_rms": checks["fitted_vs_Hstar_rms"],
    }
    if not dual.branch_nodes:
        step.at("duality", "as_immersion")
        istar = dual.as_immersion(chart_tol=config.chart_tol)
        flip = qnorm(istar.N + imm.N)
        results["normal_flip_rms"] = float(rms(interior(flip)))
        step.at("duality", "classify_christoffel")
        results["classify"] = classify_christoffel(
            imm, istar, tol=config.classify_tol)
    if dual_known is not None:
        got = dual.positions - dual.positions.reshape(-1, 3).mean(axis=0)
        want = dual_known - dual_known.reshape(-1, 3).mean(axis=0)
        err = np.linalg.norm(got - want, axis=-1)
        results["known_dual_rms"] = float(rms(err))
    return results, imm.grid


def _cmd_bonnet(config, outdir, step):
    imm, q_known, _, label = _load_surface(config, step)
    q = _load_qdiff(config, imm, q_known, step)
    step.at("duality", "integrate_dual")
    dual = integrate_dual(imm, q, closed_tol=config.closed_tol)
    step.at("bonnet", "bonnet_pair")
    pair = bonnet_pair(imm, dual, config.eps,
                       closed_tol=config.closed_tol,
                       chart_tol=config.chart_tol)
    step.at("bonnet", "shape_distortion_check")
    _, dist_rel = shape_distortion_check(imm, dual, pair)
    step.at("bonnet", "umbilic_branch_correspondence")
    corr = umbilic_branch_correspondence(pair, dual, tol=config.umbilic_tol)
    step.at("io", "write_obj")
    write_obj(os.path.join(outdir, "%s_mate_plus.obj" % label),
              pair.fplus.positions, comment="mate at +eps")
    write_obj(os.path.join(outdir, "%s_mate_minus.obj" % label),
              pair.fminus.positions, comment="mate at -eps")
    dH = np.abs(interior(pair.Hplus) - interior(pair.Hminus))
    diam = imm.diameter()
    results = {
        "label": label,
        "eps": config.eps,
        "metric_rel": pair.metric_rel,
        "mean_curvature_diff_max": float(np.max(dH)),
        "H_plus": field_stats(pair.Hplus),
        "H_minus": field_stats(pair.Hminus),
        "congruence_rms": pair.congruence_rms,
        "congruence_floor": 1e-3 * diam,
        "noncongruent": bool(pair.congruence_rms > 1e-3 * diam),
        "normal_recovery_rel": pair.normal_recovery_rel,
        "distortion_identity_rel": dist_rel,
        "distortion_cr_rel": pair.D_cr_rel,
        "umbilic_branch_match": corr["all_match"],
        "distortion_zeros": _nodes_list(corr["distortion_zeros"]),
    }
    return results, imm.grid


def _cmd_solve_ivp(config, outdir, step):
    imm, q_known, _, label = _load_surface(config, step)
    q = _load_qdiff(config, imm, q_known, step)
    row = config.row if config.row is not None else imm.grid.ny // 2
    if not (0 <= row < imm.grid.ny):
        raise ConfigError("row %d outside grid (ny=%d)" % (row, imm.grid.ny))
    step.at("cauchy", "check_wellposed")
    prob = CauchyProblem(imm, q, row)
    well = check_wellposed(prob, det_tol=config.det_tol)
    step.at("cauchy", "march_solve")
    spin = march_solve(prob, config.steps)
    step.at("cauchy", "reconstruct")
    band, rep = reconstruct(prob, spin, closed_tol=config.closed_tol,
                            chart_tol=config.chart_tol)
    step.at("io", "write_obj")
    write_obj(os.path.join(outdir, "%s_band.obj" % label),
              band.positions, comment="marched band")
    results = {
        "label": label,
        "row": row,
        "steps": config.steps,
        "rows_solved": [int(spin.row_span[0]), int(spin.row_span[1])],
        "wellposed": well,
        "spin_norm": field_stats(qnorm(_band_lam(spin)),
                                 interior_only=False),
        "curve_match_rel": rep["curve_match_rel"],
        "closedness_rel": rep["closedness_rel"],
        "q_residual_tangential_rel": rep["q_residual_tangential_rel"],
        "q_residual_normal_rel": rep["q_residual_normal_rel"],
        "path_deviation": rep["path_deviation"],
    }
    return results, imm.grid


def _ladder(config):
    n0 = config.n
    return [n0 + (n0 - 1) * (2 ** k - 1) for k in range(config.levels)]


def _orders(values):
    out = []
    for a, b in zip(values, values[1:]):
        if a > 0 and b > 0:
            out.append(round(float(np.log2(a / b)), 2))
        else:
            out.append(float("inf"))
    return out


def _cmd_converge(config, outdir, step):
    ns = _ladder(config)
    series = {}

    def push(name, value):
        series.setdefault(name, []).append(float(value))

    for n in ns:
        step.at("generators", "make_surface")
        gen = make_surface(config.generator, n=n, **config.params)
        imm, q_known = gen.imm, gen.q_known
        if config.kind == "weingarten":
            step.at("charts", "weingarten_split")
            curv = weingarten_split(imm)
            _, wrel = weingarten_residual(imm, curv)
            _, arel = anticonformality_residual(imm, curv)
            _, trel = tangentiality_residual(imm, curv)
            push("weingarten_rel", wrel)
            push("anticonformality_rel", arel)
            push("tangentiality_rel", trel)
        elif config.kind == "dual":
            q = _load_qdiff(config, imm, q_known, step)
            step.at("duality", "integrate_dual")
            dual = integrate_dual(imm, q, closed_tol=config.closed_tol)
            curv = weingarten_split(imm)
            checks = verify_duality(imm, dual, curv)
            push("classical_rel", checks["classical_rel"])
            push("path_deviation", dual.path_deviation)
        elif config.kind == "bonnet":
            q = _load_qdiff(config, imm, q_known, step)
            step.at("bonnet", "bonnet_pair")
            dual = integrate_dual(imm, q, closed_tol=config.closed_tol)
            pair = bonnet_pair(imm, dual, config.eps,
                               closed_tol=config.closed_tol,
                               chart_tol=config.chart_tol)
            _, dist_rel = shape_distortion_check(imm, dual, pair)
            dH = np.abs(interior(pair.Hplus) - interior(pair.Hminus))
            push("mean_curvature_diff_max", float(np.max(dH)))
            push("distortion_identity_rel", dist_rel)
            push("distortion_cr_rel", pair.D_cr_rel)
        else:  # ivp
            q = _load_qdiff(config, imm, q_known, step)
            row = config.row if config.row is not None else imm.grid.ny // 2
            step.at("cauchy", "march_solve")
            prob = CauchyProblem(imm, q, row)
            spin = march_solve(prob, config.steps)
            _, rep = reconstruct(prob, spin, closed_tol=config.closed_tol,
                                 chart_tol=config.chart_tol)
            dev = np.abs(qnorm(_band_lam(spin)) - 1.0)
            push("spin_norm_dev_max", float(np.max(dev)))
            push("curve_match_rel", rep["curve_match_rel"])
            push("q_residual_normal_rel", rep["q_residual_normal_rel"])

    table = {name: {"residuals": vals, "orders": _orders(vals)}
             for name, vals in series.items()}
    results = {"kind": config.kind, "grid_sizes": ns, "series": table}
    grid = make_surface(config.generator, n=ns[0], **config.params).imm.grid
    return results, grid


# ---------------------------------------------------------------------------
# verify: a registry of fast self-checks


def _check_quaternion_algebra(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((64, 4))
    b = rng.standard_normal((64, 4))
    c = rng.standard_normal((64, 4))
    assoc = qmul(qmul(a, b), c) - qmul(a, qmul(b, c))
    norm_mult = qnorm(qmul(a, b)) - qnorm(a) * qnorm(b)
    conj_rev = qconj(qmul(a, b)) - qmul(qconj(b), qconj(a))
    worst = max(float(np.max(qnorm(assoc))),
                float(np.max(np.abs(norm_mult))),
                float(np.max(qnorm(conj_rev))))
    return worst < 1e-12, {"max_residual": worst}


def _check_weingarten(n, seed):
    gen = make_surface("cylinder", n=n)
    curv = weingarten_split(gen.imm)
    _, wrel = weingarten_residual(gen.imm, curv)
    h = field_stats(curv.H)
    ok = wrel < 1e-3 and abs(h["mean"] - 0.5) < 1e-3
    return ok, {"weingarten_rel": wrel, "H_mean": h["mean"]}


def _check_hopf(n, seed):
    gen = make_surface("cylinder", n=n)
    curv = weingarten_split(gen.imm)
    _, hrel = relate_hopf(gen.imm, curv)
    try:
        # loose tol: the coefficient comes from differentiated samples,
        # so one-sided stencils inflate its CR residual near the boundary
        worst = check_holomorphic(QuadDifferential(gen.imm.grid,
                                                   curv.hopf_qd), tol=5e-3)
        holo = True
    except ValueError:
        worst, holo = float("nan"), False
    return hrel < 1e-3 and holo, \
        {"hopf_consistency_rel": hrel, "cr_worst": worst}


def _check_dual_roundtrip(n, seed):
    gen = make_surface("cylinder", n=n)
    dual = integrate_dual(gen.imm, gen.q_known)
    istar = dual.as_immersion()
    flip = float(rms(interior(qnorm(istar.N + gen.imm.N))))
    dual2 = integrate_dual(istar, gen.q_known)
    sim = similarity_distance(dual2.positions, gen.imm.positions)
    ok = flip < 1e-4 and sim < 1e-3
    return ok, {"normal_flip_rms": flip, "roundtrip_similarity": sim}


def _check_catenoid_dual(n, seed):
    gen = make_surface("catenoid", n=n)
    dual = integrate_dual(gen.imm, gen.q_known)
    centered = dual.positions - dual.positions.reshape(-1, 3).mean(axis=0)
    known = gen.dual_known - gen.dual_known.reshape(-1, 3).mean(axis=0)
    err = float(rms(np.linalg.norm(centered - known, axis=-1)))
    size = float(rms(np.linalg.norm(known, axis=-1)))
    return err < 1e-3 * max(size, 1.0), {"dual_vs_gauss_rms": err}


def _check_classify(n, seed):
    cyl = make_surface("cylinder", n=n)
    cat = make_surface("catenoid", n=n)
    scaled = build_immersion(cyl.imm.grid, 2.0 * cyl.imm.positions + 0.25)
    dual = integrate_dual(cyl.imm, cyl.q_known).as_immersion()
    got = (classify_christoffel(cyl.imm, scaled),
           classify_christoffel(cyl.imm, dual),
           classify_christoffel(cyl.imm, cat.imm))
    want = ("scaling", "dual_pair", "unrelated")
    return got == want, {"got": list(got), "want": list(want)}


def _check_bonnet(n, seed):
    gen = make_surface("cylinder", n=n)
    dual = integrate_dual(gen.imm, gen.q_known)
    pair = bonnet_pair(gen.imm, dual, 1.0)
    diam = gen.imm.diameter()
    ok = pair.metric_rel < 1e-8 and pair.congruence_rms > 1e-3 * diam
    return ok, {"metric_rel": pair.metric_rel,
                "congruence_rms": pair.congruence_rms}


def _check_distortion(n, seed):
    gen = make_surface("cylinder", n=n)
    dual = integrate_dual(gen.imm, gen.q_known)
    pair = bonnet_pair(gen.imm, dual, 1.0)
    _, rel = shape_distortion_check(gen.imm, dual, pair)
    return rel < 0.05, {"distortion_identity_rel": rel}


def _check_march(n, seed):
    gen = make_surface("cylinder", n=n, rotation=np.pi / 4)
    q = QuadDifferential.constant(gen.imm.grid, 1j)
    prob = CauchyProblem(gen.imm, q, gen.imm.grid.ny // 2)
    spin = march_solve(prob, 4)
    lam = _band_lam(spin)
    dev = float(np.max(qnorm(lam - quat(1.0, 0.0, 0.0, 0.0))))
    return dev < 1e-3, {"spin_dev_max": dev}


def _check_characteristic_reject(n, seed):
    gen = make_surface("cylinder", n=n, rotation=np.pi / 4)
    q = QuadDifferential.constant(gen.imm.grid, 1.0 + 0.0j)
    prob = CauchyProblem(gen.imm, q, gen.imm.grid.ny // 2)
    try:
        check_wellposed(prob)
    except ValueError:
        return True, {"rejected": True}
    return False, {"rejected": False}


def _check_io_roundtrip(n, seed):
    import tempfile
    gen = make_surface("cylinder", n=n)
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "surf.csv")
        write_field_csv(path, gen.imm.grid, _position_fields(gen.imm))
        grid, pos = read_positions_csv(path)
    err = float(np.max(np.abs(pos - gen.imm.positions)))
    same = grid.ny == gen.imm.grid.ny and grid.nx == gen.imm.grid.nx
    return err < 1e-12 and same, {"roundtrip_max_err": err}


VERIFY_CHECKS = [
    ("quaternion_algebra", _check_quaternion_algebra),
    ("weingarten_cylinder", _check_weingarten),
    ("hopf_consistency", _check_hopf),
    ("dual_roundtrip", _check_dual_roundtrip),
    ("catenoid_dual_gauss", _check_catenoid_dual),
    ("classify_matrix", _check_classify),
    ("bonnet_cylinder", _check_bonnet),
    ("distortion_identity", _check_distortion),
    ("march_manufactured", _check_march),
    ("characteristic_reject", _check_characteristic_reject),
    ("io_roundtrip", _check_io_roundtrip),
]


def _cmd_verify(config, outdir, step):
    names = [name for name, _ in VERIFY_CHECKS]
    if config.checks:
        unknown = [c for c in config.checks if c not in names]
        if unknown:
            raise ConfigError("unknown checks: %s (available: %s)"
                              % (", ".join(unknown), ", ".join(names)))
        selected = [(m, f) for m, f in VERIFY_CHECKS if m in config.checks]
    else:
        selected = VERIFY_CHECKS
    outcomes = {}
    failures = 0
    for name, fn in selected:
        step.at("cli", "verify:" + name)
        passed, metrics = fn(config.n, config.seed)
        outcomes[name] = {"passed": bool(passed), "metrics": metrics}
        if not passed:
            failures += 1
    results = {
        "checks": outcomes,
        "total": len(selected),
        "failures": failures,
        "passed": failures == 0,
    }
    grid = make_surface("cylinder", n=config.n).imm.grid
    return results, grid


_HANDLERS = {
    "generate": _cmd_generate,
    "analyze": _cmd_analyze,
    "dual": _cmd_dual,
    "bonnet": _cmd_bonnet,
    "solve-ivp": _cmd_solve_ivp,
    "converge": _cmd_converge,
    "verify": _cmd_verify,
}


# ---------------------------------------------------------------------------
# report plumbing and entry point


def _emit_error(step, exc, code):
    node = None
    match = _NODE_RE.search(str(exc))
    if match:
        node = [int(match.group(1)), int(match.group(2))]
    payload = {
        "error": type(exc).__name__,
        "module": step.module,
        "operation": step.operation,
        "message": str(exc),
        "node": node,
        "exit_code": code,
    }
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return code


def _print_summary(command, results):
    if command == "verify":
        for name, out in results["checks"].items():
            print("%s %s" % ("PASS" if out["passed"] else "FAIL", name))
        print("verify: %d/%d checks passed"
              % (results["total"] - results["failures"], results["total"]))
        return
    if command == "converge":
        print("convergence (%s) on grids %s"
              % (results["kind"],
                 "/".join(str(n) for n in results["grid_sizes"])))
        for name, row in sorted(results["series"].items()):
            res = " ".join("%.3e" % v for v in row["residuals"])
            orders = " ".join("%.2f" % o for o in row["orders"])
            print("  %-28s %s   orders: %s" % (name, res, orders))
        return
    for key in ("label", "conformality_residual", "weingarten_rel",
                "umbilic_count", "closedness_rel", "path_deviation",
                "metric_rel", "congruence_rms", "curve_match_rel"):
        if key in results:
            val = results[key]
            if isinstance(val, float):
                print("  %s: %.6e" % (key, val))
            else:
                print("  %s: %s" % (key, val))


def run(config):
    step = _Step()
    try:
        outdir = config.outdir or os.environ.get(OUTDIR_ENV, DEFAULT_OUTDIR)
        step.at("io", "ensure_outdir")
        ensure_outdir(outdir)
        handler = _HANDLERS[config.command]
        results, grid = handler(config, outdir, step)
        cfg = config.as_dict()
        report = {
            "command": config.command,
            "config": cfg,
            "config_hash": config_hash(cfg),
            "grid": grid.spec() if grid is not None else None,
            "tolerances": config.tolerances(),
            "results": results,
        }
        step.at("io", "write_report")
        name = config.command.replace("-", "_") + "_report.json"
        write_report(os.path.join(outdir, name), report)
        print("%s: report written to %s"
              % (config.command, os.path.join(outdir, name)))
        _print_summary(config.command, results)
        if config.command == "verify" and not results["passed"]:
            return 2
        return 0
    except ConfigError as exc:
        return _emit_error(step, exc, 1)
    except (ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        return _emit_error(step, exc, 2)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="quatsurf",
        description="curvature, duality, and Bonnet-pair analysis of "
                    "conformally parametrized surface patches")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, source=True):
        if source:
            p.add_argument("--generator", choices=sorted(CATALOG),
                           help="analytic test surface to sample")
            p.add_argument("--param", action="append", default=[],
                           metavar="KEY=VALUE",
                           help="generator parameter (repeatable)")
            p.add_argument("--input", dest="input_path",
                           help="CSV with columns x,y,px,py,pz")
            p.add_argument("--n", type=int, default=65,
                           help="grid nodes per side (default 65)")
        p.add_argument("--outdir",
                       help="artifact directory (or set $%s)" % OUTDIR_ENV)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--closed-tol", type=float, default=5e-3)
        p.add_argument("--chart-tol", type=float, default=1e-3)
        p.add_argument("--umbilic-tol", type=float, default=1e-6)

    def add_qdiff(p):
        p.add_argument("--q", help="constant quadratic differential "
                                   "coefficient, e.g. '1j' or '0.5+0.5j'")
        p.add_argument("--qdiff", dest="qdiff_path",
                       help="CSV with columns x,y,re_phi,im_phi")

    p = sub.add_parser("generate", help="sample a catalog surface to disk")
    add_common(p)

    p = sub.add_parser("analyze",
                       help="curvature decomposition and umbilic report")
    add_common(p)

    p = sub.add_parser("dual", help="integrate the dual surface")
    add_common(p)
    add_qdiff(p)

    p = sub.add_parser("bonnet", help="build a Bonnet mate pair")
    add_common(p)
    add_qdiff(p)
    p.add_argument("--eps", type=float, default=1.0,
                   help="spectral parameter (default 1)")

    p = sub.add_parser("solve-ivp",
                       help="march the Cauchy problem off an initial row")
    add_common(p)
    add_qdiff(p)
    p.add_argument("--row", type=int, help="initial row (default: middle)")
    p.add_argument("--steps", type=int, default=8,
                   help="march steps per side (default 8)")
    p.add_argument("--det-tol", type=float, default=0.01)

    p = sub.add_parser("verify", help="run built-in self checks")
    p.add_argument("--all", action="store_true",
                   help="run every check (default when none named)")
    p.add_argument("--check", action="append", default=[], dest="checks",
                   help="run one named check (repeatable)")
    p.add_argument("--n", type=int, default=33)
    add_common(p, source=False)

    p = sub.add_parser("converge",
                       help="grid refinement ladder with observed orders")
    add_common(p)
    add_qdiff(p)
    p.add_argument("--kind", choices=("weingarten", "dual", "bonnet", "ivp"),
                   help="which residual family to refine")
    p.add_argument("--levels", type=int, default=3,
                   help="ladder rungs: n, 2n-1, 4n-3 (default 3)")
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--row", type=int)
    p.add_argument("--steps", type=int, default=8)
    return parser


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    step = _Step()
    try:
        config = RunConfig(
            args.command,
            generator=getattr(args, "generator", None),
            params=_parse_param_list(getattr(args, "param", [])),
            input_path=getattr(args, "input_path", None),
            qdiff_path=getattr(args, "qdiff_path", None),
            q=getattr(args, "q", None),
            eps=getattr(args, "eps", 1.0),
            row=getattr(args, "row", None),
            steps=getattr(args, "steps", 8),
            n=getattr(args, "n", 65),
            closed_tol=getattr(args, "closed_tol", 5e-3),
            chart_tol=getattr(args, "chart_tol", 1e-3),
            umbilic_tol=getattr(args, "umbilic_tol", 1e-6),
            det_tol=getattr(args, "det_tol", 0.01),
            outdir=args.outdir,
            seed=args.seed,
            checks=getattr(args, "checks", []),
            kind=getattr(args, "kind", None),
            levels=getattr(args, "levels", 3),
        )
    except ConfigError as exc:
        return _emit_error(step, exc, 1)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
