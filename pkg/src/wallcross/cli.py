"""Batch front-end: ``wallcross <group> <command> [CONFIG] [--out DIR] ...``.

Every run writes ``report.json`` (and CSV grids where they make sense) into
the output directory and prints the report to stdout.  Exit status is 0 on
success, 2 when a verification fails and 1 on any error.
"""

import argparse
import cmath
import csv
import hashlib
import io
import json
import math
import os
import random
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction

import numpy as np

from . import __version__
from .charges import Charge, standard_cone
from .errors import ConfigError, VerificationFailure, WallcrossError
from .hyperholo import ConnectionParams, gmn_connection_solve, lagrangian_section_check
from .local_model import EllipticSurface, local_compare, singular_fibers
from .ooguri_vafa import (FiberPoint, OVParams, metric_assemble, mirror_build, potential_gradient,
                          potential_u)
from .twistor import (TBAConfig, TBAProblem, fq_eval, fq_side_limit_richardson, ov_problem,
                      ray_phase, tba_solve, xsf_eval)
from .wallcrossing import CentralCharge, action_on_basis, chamber_from_json, factorize_spectrum, verify_wcf


class UnknownCommand(WallcrossError):
    code = "UNKNOWN_COMMAND"


class MalformedConfig(WallcrossError):
    code = "MALFORMED_CONFIG"


# ---------------------------------------------------------------- deterministic output


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (complex, np.complexfloating)):
        return {"re": float(x.real), "im": float(x.imag)}
    if isinstance(x, (float, np.floating)):
        return float(x)
    if isinstance(x, Charge):
        return ",".join(str(c) for c in x.coeffs)
    return x


def _fmt_float(v):
    if math.isnan(v) or math.isinf(v):
        return json.dumps(str(v))
    return "%.15g" % v


def dumps(obj, indent=0):
    """JSON with sorted keys and floats printed as %.15g."""
    obj = _plain(obj)
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = ["%s%s: %s" % (pad, json.dumps(k), dumps(obj[k], indent + 1)) for k in sorted(obj)]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        return _fmt_float(obj)
    return json.dumps(obj)


def csv_text(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt_float(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def inputs_digest(command, config, seed):
    canon = json.dumps({"command": command, "config": config, "seed": seed},
                       sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()


# ---------------------------------------------------------------- config helpers


def _c(v, default=None):
    if v is None:
        return default
    if isinstance(v, dict):
        return complex(v.get("re", 0.0), v.get("im", 0.0))
    if isinstance(v, (list, tuple)):
        return complex(v[0], v[1])
    return complex(v)


def _points(cfg, rng):
    """Fiber points from an explicit list, a polar grid or seeded random draws."""
    if "points" in cfg:
        out = []
        for d in cfg["points"]:
            if "z" in d:
                z = _c(d["z"])
            else:
                # lift a into the strip -2 pi <= Im z < 0
                z = cmath.log(_c(d["a"]))
                if z.imag >= 0:
                    z -= 2j * math.pi
            out.append(FiberPoint(z, float(d.get("theta_e", 0.0)), float(d.get("theta_m", 0.0))))
        return out
    if "grid" in cfg:
        g = cfg["grid"]
        rs = np.linspace(*g["abs"][:2], int(g["abs"][2]))
        ph = np.linspace(*g["arg"][:2], int(g["arg"][2]))
        te = np.linspace(*g.get("theta_e", [0.3, 0.3, 1])[:2], int(g.get("theta_e", [0, 0, 1])[2]))
        return [FiberPoint(complex(math.log(r), p - 2 * math.pi), float(t), 0.0)
                for r in rs for p in ph for t in te]
    if "random" in cfg:
        r = cfg["random"]
        lo, hi = r.get("abs", [0.15, 0.6])
        return [FiberPoint(complex(math.log(rng.uniform(lo, hi)), rng.uniform(-2 * math.pi, 0)),
                           rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi))
                for _ in range(int(r["count"]))]
    raise MalformedConfig("config needs 'points', 'grid' or 'random'")


def _ov(cfg):
    if "ov" not in cfg:
        raise MalformedConfig("config needs an 'ov' block")
    return OVParams.from_json(cfg["ov"])


def _map(fn, items, threads):
    if threads <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


def _pt_row(pt):
    a = pt.a
    return [float(a.real), float(a.imag), float(pt.z.imag), pt.theta_e, pt.theta_m]


PT_HEADER = ["a_re", "a_im", "arg_lift", "theta_e", "theta_m"]


class Run:
    def __init__(self, cfg, tol_scale, rng, threads):
        self.cfg = cfg
        self.tol_scale = tol_scale
        self.rng = rng
        self.threads = threads
        self.csv = {}

    def tol(self, base):
        return base * self.tol_scale


# ---------------------------------------------------------------- commands


def _sector(cfg):
    s = cfg.get("sector", [-math.pi / 2, math.pi / 2])
    return float(s[0]), float(s[1])


def cmd_wcf_verify(run):
    cfg = run.cfg
    Z1, d1 = chamber_from_json(cfg["side1"])
    Z2, d2 = chamber_from_json(cfg["side2"])
    cone = standard_cone(mode=cfg.get("cone", "cone"))
    equal, report = verify_wcf(Z1, d1, Z2, d2, _sector(cfg), int(cfg.get("max_degree", 10)), cone)
    return equal, report


def cmd_wcf_factorize(run):
    cfg = run.cfg
    Z1, d1 = chamber_from_json(cfg["source"])
    z2 = cfg["target_Z"]
    Z2 = CentralCharge(tuple(complex(r, i) for r, i in zip(z2["re"], z2["im"])))
    cone = standard_cone()
    deg = int(cfg.get("max_degree", 6))
    target = action_on_basis(_sector(cfg), Z1, d1, deg, cone)
    data = factorize_spectrum(target, Z2, deg, cone, _sector(cfg))
    spectrum = {",".join(map(str, g.coeffs)): int(v) for g, v in sorted(data.omega.items(),
                                                                        key=lambda kv: kv[0].coeffs)}
    ok = True
    if "expected" in cfg:
        ok = spectrum == {k: int(v) for k, v in cfg["expected"].items()}
    return ok, {"spectrum": spectrum, "max_degree": deg}


def cmd_ov_metric(run):
    p = _ov(run.cfg)
    mode = run.cfg.get("mode", "gh")
    pts = _points(run.cfg, run.rng)
    mets = _map(lambda pt: metric_assemble(pt, p, mode), pts, run.threads)
    rows = []
    min_eig = math.inf
    for pt, g in zip(pts, mets):
        ev = float(np.linalg.eigvalsh(0.5 * (g + g.T)).min())
        min_eig = min(min_eig, ev)
        rows.append(_pt_row(pt) + [float(v) for v in g.ravel()] + [ev])
    run.csv["metric.csv"] = (PT_HEADER + ["g%d%d" % (i, j) for i in range(4) for j in range(4)]
                             + ["min_eigenvalue"], rows)
    return min_eig > 0, {"points": len(pts), "mode": mode, "min_eigenvalue": min_eig,
                         "positive_definite": min_eig > 0}


def cmd_ov_potential(run):
    p = _ov(run.cfg)
    pts = _points(run.cfg, run.rng)
    n_max = int(run.cfg.get("n_max", 10000))

    def one(pt):
        us = [potential_u(pt, p, m, n_max) if m == "lattice" else potential_u(pt, p, m)
              for m in ("sf", "poisson", "lattice")]
        gp = potential_gradient(pt, p, "poisson")
        gl = potential_gradient(pt, p, "lattice", n_max)
        err = float(np.abs(np.array(gl) - np.array(gp)).max() / np.abs(np.array(gp)).max())
        return us, err

    out = _map(one, pts, run.threads)
    rows = [_pt_row(pt) + list(us) + [err] for pt, (us, err) in zip(pts, out)]
    run.csv["potential.csv"] = (PT_HEADER + ["U_sf", "U_poisson", "U_lattice", "grad_rel_err"], rows)
    worst = max(e for _, e in out)
    tol = run.tol(1e-8)
    return worst <= tol, {"points": len(pts), "max_gradient_rel_err": worst, "tolerance": tol}


def cmd_ov_mirror(run):
    p = _ov(run.cfg)
    spec = run.cfg.get("spectrum")
    q, rule = mirror_build(p, run.cfg.get("mode", "self"),
                           None if spec is None else {int(k): v for k, v in spec.items()})
    return True, {"mirror": q.to_json(), "swap": rule, "delta": q.delta}


def cmd_twistor_jumps(run):
    p = _ov(run.cfg)
    pt = _points(run.cfg, run.rng)[0]
    radius = float(run.cfg.get("radius", 0.8))
    tol = run.tol(1e-8)
    rows = []
    worst = 0.0
    for q in sorted(p.spectrum):
        xi = radius * cmath.exp(1j * ray_phase(q * pt.a))
        meas = fq_side_limit_richardson(q, pt, xi, p, "ccw") / fq_side_limit_richardson(q, pt, xi, p, "cw")
        xe = xsf_eval((1, 0), pt, xi, p)
        jump_err = abs(meas - 1 / (1 - xe ** q))
        # quasi-periodicity under z -> z + 2 pi i away from the ray
        xg = radius * cmath.exp(1j * (ray_phase(q * pt.a) + 1.0))
        up = FiberPoint(pt.z + 2j * math.pi, pt.theta_e, pt.theta_m)
        ratio = fq_eval(q, up, xg, p) / fq_eval(q, pt, xg, p)
        qp_err = abs(ratio - 1 / (1 - xsf_eval((1, 0), pt, xg, p) ** q))
        worst = max(worst, jump_err, qp_err)
        rows.append([q, float(meas.real), float(meas.imag), jump_err, qp_err])
    run.csv["jumps.csv"] = (["q", "jump_re", "jump_im", "jump_err", "quasi_period_err"], rows)
    return worst <= tol, {"max_error": worst, "tolerance": tol, "charges": sorted(p.spectrum)}


def _tba_problem(cfg):
    if "ov" in cfg:
        p = OVParams.from_json(cfg["ov"])
        pt = _points(cfg, random.Random(0))[0]
        return ov_problem(pt, p)
    d = cfg["problem"]
    omega = {Charge(tuple(int(x) for x in k.split(","))): int(v) for k, v in d["omega"].items()}
    Z = CentralCharge(tuple(complex(r, i) for r, i in zip(d["Z"]["re"], d["Z"]["im"])))
    return TBAProblem(omega, Z, tuple(float(t) for t in d["theta"]), float(d["R"]))


def cmd_tba_solve(run):
    pr = _tba_problem(run.cfg)
    c = run.cfg.get("tba", {})
    cfg = TBAConfig(tol=run.tol(float(c.get("tol", 1e-10))), max_iter=int(c.get("max_iter", 50)))
    sol = tba_solve(pr, cfg)
    rows = [[",".join(map(str, g)), phi, t, yr, yi] for g, phi, t, yr, yi in sol.to_rows()]
    run.csv["tba.csv"] = (["charge", "ray_phase", "t", "Y_re", "Y_im"], rows)
    return True, {"iterations": sol.iterations, "history": sol.history,
                  "conjectural_uniqueness": sol.conjectural_uniqueness}


def _connection(cfg):
    host = _ov(cfg)
    return ConnectionParams.from_json(cfg["connection"], host)


def cmd_conn_build(run):
    c = _connection(run.cfg)
    pts = _points(run.cfg, run.rng)
    sols = _map(lambda pt: gmn_connection_solve(pt, c), pts, run.threads)
    rows = []
    worst = 0.0
    for pt, s in zip(pts, sols):
        worst = max(worst, s.residual)
        rows.append(_pt_row(pt) + [float(v.imag) for v in s.components] + [s.residual])
    run.csv["connection.csv"] = (PT_HEADER + ["A1_im", "A2_im", "A3_im", "A4_im", "residual"], rows)
    tol = run.tol(1e-6)
    return worst <= tol, {"points": len(pts), "max_residual": worst, "tolerance": tol}


def cmd_conn_lagrangian(run):
    c = _connection(run.cfg)
    a_pts = [_c(a) for a in run.cfg["a_points"]]
    res = lagrangian_section_check(c, a_pts)
    if c.nonholomorphic:
        tol = 1e-4
        ok = res >= tol
    else:
        tol = run.tol(1e-7)
        ok = res <= tol
    return ok, {"residual": res, "tolerance": tol, "nonholomorphic": c.nonholomorphic != 0}


def cmd_fiber_singular(run):
    doc = run.cfg.get("surface", run.cfg)
    s = EllipticSurface.from_json(doc)
    fs = singular_fibers(s)
    distinct = len({complex(round(e.real, 10), round(e.imag, 10)) for e in fs.e})
    return True, {"e": fs.e, "w0": fs.w0, "resultant_degree": len(fs.resultant) - 1,
                  "multiplicities": fs.multiplicities, "distinct": distinct}


def cmd_local_compare(run):
    cfg = run.cfg
    pts = _points(cfg, run.rng)
    xis = [_c(x) for x in cfg.get("xi", [[0.7 * math.cos(0.4), 0.7 * math.sin(0.4)]])]
    Rs = [float(r) for r in cfg.get("R", [4.0])]
    rep = local_compare(pts, xis, Rs, include_minus=cfg.get("include_minus_gamma", True),
                        lam=_c(cfg.get("lambda"), 1.0))
    run.csv["local_compare.csv"] = (["R", "z_re", "z_im", "theta_e", "xi_re", "xi_im", "discrepancy"],
                                    rep.pop("rows"))
    tol = run.tol(1e-8)
    rep["per_R"] = {"%g" % k: v for k, v in rep["per_R"].items()}
    rep["tolerance"] = tol
    return rep["max_discrepancy"] <= tol, rep


COMMANDS = {
    ("wcf", "verify"): cmd_wcf_verify,
    ("wcf", "factorize"): cmd_wcf_factorize,
    ("ov", "metric"): cmd_ov_metric,
    ("ov", "potential"): cmd_ov_potential,
    ("ov", "mirror"): cmd_ov_mirror,
    ("twistor", "jumps"): cmd_twistor_jumps,
    ("tba", "solve"): cmd_tba_solve,
    ("conn", "build"): cmd_conn_build,
    ("conn", "lagrangian"): cmd_conn_lagrangian,
    ("fiber", "singular"): cmd_fiber_singular,
    ("local", "compare"): cmd_local_compare,
}


# ---------------------------------------------------------------- entry point


class UsageError(WallcrossError):
    code = "USAGE"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    ap = _Parser(prog="wallcross", description=__doc__.splitlines()[0])
    ap.add_argument("group")
    ap.add_argument("command")
    ap.add_argument("config_path", nargs="?")
    ap.add_argument("--config", dest="config_flag")
    ap.add_argument("--out", default=None)
    ap.add_argument("--tol-scale", type=float, default=1.0)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    return ap


def run_command(argv=None, stdout=None):
    """Run one command; returns (exit_status, report dict)."""
    stdout = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        report = {"status": "error", "code": exc.code, "message": str(exc), "version": __version__}
        stdout.write(dumps(report) + "\n")
        return 1, report
    name = "%s %s" % (args.group, args.command)
    threads = args.threads or int(os.environ.get("WALLCROSS_THREADS", "1") or 1)
    cfg = {}
    report = {"command": name, "version": __version__}
    files = {}
    try:
        fn = COMMANDS.get((args.group, args.command))
        if fn is None:
            raise UnknownCommand("unknown command %r" % name)
        path = args.config_flag or args.config_path
        if path:
            try:
                with open(path) as fh:
                    cfg = json.load(fh)
            except (OSError, json.JSONDecodeError) as exc:
                raise MalformedConfig(str(exc))
        if not isinstance(cfg, dict):
            raise MalformedConfig("config must be a JSON object")
        if not args.tol_scale > 0:
            raise ConfigError("--tol-scale must be positive")
        run = Run(cfg, args.tol_scale, random.Random(args.seed), max(threads, 1))
        try:
            ok, metrics = fn(run)
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise MalformedConfig("%s: %s" % (type(exc).__name__, exc))
        report.update(status="ok" if ok else "verification_failed", metrics=metrics)
        for fname, (header, rows) in run.csv.items():
            files[fname] = csv_text(header, rows)
        status = 0 if ok else 2
    except VerificationFailure as exc:
        report.update(status="verification_failed", code=exc.code, message=str(exc),
                      details=exc.details)
        status = 2
    except WallcrossError as exc:
        report.update(status="error", code=exc.code, message=str(exc), details=exc.details)
        status = 1
    report["inputs_digest"] = inputs_digest(name, cfg, args.seed)
    text = dumps(report) + "\n"
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "report.json"), "w") as fh:
            fh.write(text)
        for fname, body in files.items():
            with open(os.path.join(args.out, fname), "w") as fh:
                fh.write(body)
    stdout.write(text)
    return status, report


def main(argv=None):
    status, _ = run_command(argv)
    return status


if __name__ == "__main__":
    sys.exit(main())
