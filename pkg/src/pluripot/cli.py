"""Command-line front end with deterministic emission.

Subcommands mirror the library modules: capacity (equilibrium solves and
density indices), envelope (grid extremal/Green solves and comparison
checks), orlicz (Luxemburg norms and the cusp-collar dichotomy), bergman
(kernel tables and sublevel scans), chain (the log-domain recursion), and
verify (the worked staircase example).

Contract: identical argv + config files produce byte-identical stdout.  All
floats are emitted as %.17g with sorted JSON keys; the run manifest (argv,
config digest, version, wall time, pass flag) goes to stderr so timing never
perturbs the output stream.  Exit codes: 0 success, 2 numeric
assertion/convergence failure (JSON failure report on stdout), 1 usage or
input errors.
"""

import argparse
import csv
import dataclasses
import hashlib
import io
import json
import sys
import time

import numpy as np

from . import capacity as cap
from . import chain as chn
from . import envelopes as env
from . import geometry as geo
from . import orlicz_bergman as ob

VERSION = "0.1.0"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on bad usage; the contract reserves 2 for numeric
    # failures, so route parse errors through exit code 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write("error: %s\n" % message)
        raise SystemExit(1)


# ------------------------------------------------------------- serialization

def _fmt_float(v):
    if np.isnan(v):
        return '"nan"'
    if np.isinf(v):
        return '"inf"' if v > 0 else '"-inf"'
    return format(float(v), ".17g")


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name))
                for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (complex, np.complexfloating)):
        c = complex(obj)
        return {"im": c.imag, "re": c.real}
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def dumps(obj):
    """Deterministic JSON text: sorted keys, %.17g floats, no whitespace
    dependence on input ordering."""
    obj = _jsonable(obj)

    def rec(o):
        if o is None:
            return "null"
        if o is True:
            return "true"
        if o is False:
            return "false"
        if isinstance(o, float):
            return _fmt_float(o)
        if isinstance(o, int):
            return str(o)
        if isinstance(o, str):
            return json.dumps(o)
        if isinstance(o, list):
            return "[" + ",".join(rec(v) for v in o) + "]"
        if isinstance(o, dict):
            return "{" + ",".join(json.dumps(k) + ":" + rec(o[k])
                                  for k in sorted(o)) + "}"
        raise TypeError("unserializable: %r" % (o,))

    return rec(obj)


def _csv_cell(v):
    if isinstance(v, float):
        return _fmt_float(v).strip('"')
    if isinstance(v, (dict, list)):
        return dumps(v)
    return "" if v is None else str(v)


def emit(report, fmt):
    """Render a report as sorted-key JSON or header-row CSV (both stable)."""
    if fmt == "json":
        return dumps(report) + "\n"
    if isinstance(report, str):          # pre-rendered field dump
        return report
    rows = report.get("rows") if isinstance(report, dict) else None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if isinstance(rows, list) and rows and isinstance(rows[0], dict):
        keys = sorted(rows[0])
        w.writerow(keys)
        for row in rows:
            w.writerow([_csv_cell(_jsonable(row.get(k))) for k in keys])
    else:
        w.writerow(["key", "value"])
        flat = _jsonable(report)
        for k in sorted(flat):
            w.writerow([k, _csv_cell(flat[k])])
    return buf.getvalue()


# ------------------------------------------------------------- input parsing

def _load_json_arg(text, blobs):
    """Inline JSON or a path to a JSON file; raw bytes feed the config hash."""
    s = text.strip()
    if s.startswith("{"):
        raw = s
    else:
        try:
            with open(text, "r") as fh:
                raw = fh.read()
        except OSError as exc:
            raise UsageError("cannot read %s: %s" % (text, exc))
    blobs.append(raw.encode())
    try:
        return json.loads(raw)
    except json.JSONDecodeError as exc:
        raise UsageError("malformed JSON in %s: %s at line %d column %d"
                         % (text if not s.startswith("{") else "argument",
                            exc.msg, exc.lineno, exc.colno))


def _parse_complex(s):
    if isinstance(s, (list, tuple)):
        return complex(s[0], s[1])
    try:
        return complex(str(s).strip().replace(" ", "").replace("i", "j"))
    except ValueError:
        raise UsageError("cannot parse complex number: %r" % (s,))


def _parse_ball(s):
    if isinstance(s, dict):
        return (_parse_complex(s["center"]), float(s["radius"]))
    head, _, tail = str(s).rpartition(",")
    if not head:
        raise UsageError('ball must be "center,radius" (e.g. "2i,0.2")')
    return (_parse_complex(head), float(tail))


def _parse_eps_list(s):
    try:
        return [float(tok) for tok in str(s).split(",") if tok.strip()]
    except ValueError:
        raise UsageError("cannot parse eps list: %r" % (s,))


def _compact_set_from_doc(doc):
    E = geo.IntervalUnionSet(tuple(tuple(iv) for iv in doc.get("intervals",
                                                               ())),
                             tuple(doc.get("points", ())))
    s = cap.PlanarCompactSet.from_intervals(E)
    for c in doc.get("circles", ()):
        if isinstance(c, (int, float)):
            s = s.union(cap.PlanarCompactSet.circle(0.0, c))
        else:
            s = s.union(cap.PlanarCompactSet.circle(complex(c[0], c[1]),
                                                    c[2]))
    for a in doc.get("arcs", ()):
        s = s.union(cap.PlanarCompactSet.arc(complex(a[0], a[1]), a[2],
                                             a[3], a[4]))
    return s, E


def _interval_set_arg(args, blobs):
    if getattr(args, "staircase", None) is not None:
        return cap.staircase_set(args.staircase)
    if getattr(args, "set", None) is None:
        raise UsageError("need --set or --staircase")
    doc = _load_json_arg(args.set, blobs)
    return geo.IntervalUnionSet(tuple(tuple(iv)
                                      for iv in doc.get("intervals", ())),
                                tuple(doc.get("points", ())))


def _domain_arg(args, blobs):
    doc = _load_json_arg(args.domain, blobs)
    return geo.domain_spec_from_json(doc)


def _sample_domain(token, fspec):
    """--domain tokens for orlicz norm: hartogs:s, disk[:R], annulus:r,
    rect:x0,x1,y0,y1."""
    kind, _, rest = token.partition(":")
    f, _ = ob.function_from_json(fspec) if isinstance(fspec, dict) else (fspec,
                                                                         None)
    if kind == "hartogs":
        dom = geo.HartogsProfileDomain(float(rest) if rest else 0.5)
        return ob.hartogs_samples(dom, fspec)
    if kind == "disk":
        return ob.disk_samples(f, radius=float(rest) if rest else 1.0)
    if kind == "annulus":
        return ob.annulus_samples(f, float(rest))
    if kind == "rect":
        x0, x1, y0, y1 = (float(t) for t in rest.split(","))
        return ob.rectangle_samples(f, x0, x1, y0, y1)
    raise UsageError("unknown sample domain: %r" % (token,))


# ----------------------------------------------------------------- handlers

def _run_capacity_eval(args, blobs):
    if getattr(args, "staircase", None) is not None:
        set_ = cap.staircase_set(args.staircase)
    else:
        if args.set is None:
            raise UsageError("need --set or --staircase")
        set_, _ = _compact_set_from_doc(_load_json_arg(args.set, blobs))
    sol = cap.log_capacity(set_, n_nodes=args.nodes, solver=args.solver)
    report = {
        "capacity": sol.capacity,
        "energy": sol.energy,
        "log_capacity": sol.log_capacity,
        "n_nodes": int(sol.nodes.size),
        "iterations": sol.iterations,
        "solver": sol.solver,
        "flags": list(sol.flags),
    }
    return report, True


def _run_capacity_density(args, blobs):
    E = _interval_set_arg(args, blobs)
    a = _parse_complex(args.a)
    if args.family == "carleson":
        rep = cap.carleson_totik_set(E, a.real, args.eps, args.nmax,
                                     n_nodes=args.nodes)
    else:
        slicer = cap.punctured_disk_slicer(E, args.outer_radius)
        rep = cap.gamma_density_set(slicer, a, args.eps, args.lam,
                                    args.gamma, args.nmax,
                                    n_nodes=args.nodes)
    report = _jsonable(rep)
    report["rows"] = rep.rows()
    return report, True


def _run_verify_example5(args, blobs):
    rep = cap.verify_example5(n_max=args.nmax,
                              boundary_samples=args.samples)
    return rep, bool(rep["pass"])


def _run_envelope_extremal(args, blobs):
    spec = _domain_arg(args, blobs)
    dom = geo.rasterize_domain(spec, args.h)
    center, radius = _parse_ball(args.ball)
    f = env.relative_extremal(dom, (center, radius), tol=args.tol)
    if args.format == "csv":
        return env.field_to_csv(f), True
    report = {
        "kind": "relative-extremal",
        "h": dom.spacing,
        "ball": {"center": center, "radius": radius},
        "sweeps": f.sweeps,
        "tolerance": f.tolerance,
        "interior_nodes": int(dom.interior_count),
        "min_value": float(f.values.min()),
    }
    if args.probe:
        z = _parse_complex(args.probe)
        report["probe"] = {"z": z, "value": f.value_at(z)}
    return report, True


def _run_envelope_green(args, blobs):
    spec = _domain_arg(args, blobs)
    dom = geo.rasterize_domain(spec, args.h)
    w = _parse_complex(args.pole)
    g = env.green_function(dom, w, tol=args.tol)
    if args.format == "csv":
        return env.field_to_csv(g), True
    report = {
        "kind": "green",
        "h": dom.spacing,
        "pole": w,
        "sweeps": g.sweeps,
        "tolerance": g.tolerance,
        "interior_nodes": int(dom.interior_count),
        # the pole node itself carries -inf; report the finite floor
        "min_finite_value": float(g.values[np.isfinite(g.values)].min()),
    }
    if args.probe:
        z = _parse_complex(args.probe)
        report["probe"] = {"z": z, "value": g.value_at(z)}
    return report, True


def _run_envelope_check(args, blobs):
    p = _load_json_arg(args.params, blobs)
    spec = geo.domain_spec_from_json(p["domain"])
    dom = geo.rasterize_domain(spec, p.get("h", 0.01))
    tol = float(p.get("tolerance", 1e-3))
    if args.lemma == "blocki":
        rep = env.check_blocki_bounds(dom, _parse_complex(p["pole"]),
                                      float(p["eps"]),
                                      R_override=p.get("R_override"))
        ok = max(rep["violation_lower"], rep["violation_upper"]) <= tol
    elif args.lemma == "2.1":
        ball = _parse_ball(p["ball"])
        pairs = [(_parse_complex(a), _parse_complex(b))
                 for a, b in p["pairs"]]
        cert = p.get("certificate")
        rep = env.check_lemma21(dom, ball, float(p["r"]), pairs,
                                cert=tuple(cert) if cert else None)
        ok = rep["n_violations"] == 0
    else:
        ball = _parse_ball(p["ball"])
        rep = env.check_lemma22(dom, ball, _parse_complex(p["pole"]),
                                float(p["alpha"]), c=float(p.get("c", 1.0)))
        ok = np.isfinite(rep["C"])
    report = {"lemma": args.lemma, "params": p, "report": rep, "pass": ok}
    return report, ok


def _run_orlicz_norm(args, blobs):
    fspec = _load_json_arg(args.f, blobs)
    samples = _sample_domain(args.domain, fspec)
    params = ob.OrliczParams(args.p, args.q)
    report = {"p": params.p, "q": params.q, "domain": args.domain,
              "f": fspec, "area": samples.area}
    try:
        report["norm"] = ob.luxemburg_norm(samples, params)
        report["not_in_space"] = False
    except ValueError as exc:
        if "not-in-orlicz" not in str(exc):
            raise
        report["norm"] = None
        report["not_in_space"] = True
        report["detail"] = str(exc)
    return report, True


def _run_orlicz_lemma41(args, blobs):
    dom = geo.HartogsProfileDomain(args.s, args.transition_eps)
    rep = ob.lemma41_integrals(dom, args.q, _parse_eps_list(args.eps))
    rep["rows"] = [{"eps": e, "L": L, "J": J}
                   for e, L, J in zip(rep["eps"], rep["L"], rep["J"])]
    ok = bool(rep["minorant_ok"] and rep["majorant_ok"])
    return rep, ok


def _kernel_arg(token, M):
    kind, _, rest = token.partition(":")
    if kind == "disk":
        return ob.disk_kernel(M)
    if kind == "annulus":
        if not rest:
            raise UsageError("annulus domain needs a radius: annulus:0.5")
        return ob.annulus_kernel(float(rest), M)
    raise UsageError("kernel domain must be disk or annulus:r")


def _run_bergman_kernel(args, blobs):
    K = _kernel_arg(args.domain, args.M)
    check = ob.coefficient_check(K)
    report = {"kind": K.kind, "inner": K.inner, "M": K.M,
              "coefficient_check": check}
    if args.probe:
        zs, _, ws = args.probe.partition(",")
        z, w = _parse_complex(zs), _parse_complex(ws)
        val, flags = ob.kernel_eval(K, z, w, with_flags=True)
        report["probe"] = {"z": z, "w": w, "value": val,
                           "flags": list(flags)}
    ok = check <= 1e-10
    return report, ok


def _run_bergman_scan(args, blobs):
    K = _kernel_arg(args.domain, args.M)
    w = _parse_complex(args.pole)
    eps = (_parse_eps_list(args.eps) if args.eps
           else [2.0 ** -k for k in range(1, 9)])

    def rho(z):
        return np.maximum(-1.0, np.log(np.maximum(np.abs(z), 1e-300))
                          / np.log(2.0))

    rep = ob.sublevel_integral_scan(K, rho, w, eps)
    return rep, True


def _run_chain_run(args, blobs):
    params = chn.ChainParams(n=args.n, alpha=args.alpha, C=args.C,
                             beta=args.beta, c1=args.c1)
    trace = chn.chain_length(args.L0, args.lambda_target, params,
                             C_alpha=args.C_alpha)
    shown = trace.L_values[:50]
    report = {
        "m": trace.m,
        "L_values": list(shown),
        "L_values_truncated": len(trace.L_values) > len(shown),
        "slope": trace.slope,
        "d_B_lower_bound": trace.d_B_lower_bound,
        "closed_form_residual": trace.closed_form_residual,
        "notes": list(trace.notes),
        "params": {"n": params.n, "alpha": params.alpha, "beta": params.beta,
                   "C": params.C, "c1": params.c1, "gamma": params.gamma,
                   "expansion": params.expansion},
    }
    return report, trace.closed_form_residual <= 1e-10


def _run_chain_admissible(args, blobs):
    return chn.admissibility(args.n, args.alpha), True


# -------------------------------------------------------------- CLI assembly

def _build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--out", default=None)
    common.add_argument("--dry-run", action="store_true")

    top = _Parser(prog="pluripot",
                  description="capacity / envelope / orlicz / bergman / "
                              "chain toolbox")
    sub = top.add_subparsers(dest="command", required=True,
                             parser_class=_Parser)

    pc = sub.add_parser("capacity", help="equilibrium measures and density "
                        "indices").add_subparsers(dest="action",
                                                  required=True,
                                                  parser_class=_Parser)
    p = pc.add_parser("eval", parents=[common])
    p.add_argument("--set", help="JSON {intervals, points, circles, arcs} "
                   "inline or file")
    p.add_argument("--staircase", type=int, default=None)
    p.add_argument("--nodes", type=int, default=512)
    p.add_argument("--solver", choices=("pgd", "kkt"), default="pgd")
    p.set_defaults(run=_run_capacity_eval)
    p = pc.add_parser("density", parents=[common])
    p.add_argument("--def", dest="family", choices=("carleson", "gamma"),
                   required=True)
    p.add_argument("--set")
    p.add_argument("--staircase", type=int, default=None)
    p.add_argument("--a", default="0")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--nodes", type=int, default=160)
    p.add_argument("--outer-radius", type=float, default=3.0)
    p.set_defaults(run=_run_capacity_density)
    p = pc.add_parser("verify-example5", parents=[common])
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--samples", type=int, default=16)
    p.set_defaults(run=_run_verify_example5)

    pe = sub.add_parser("envelope", help="grid extremal functions and Green "
                        "functions").add_subparsers(dest="action",
                                                    required=True,
                                                    parser_class=_Parser)
    p = pe.add_parser("extremal", parents=[common])
    p.add_argument("--domain", required=True)
    p.add_argument("--ball", required=True, help='"center,radius"')
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--probe", default=None)
    p.set_defaults(run=_run_envelope_extremal)
    p = pe.add_parser("green", parents=[common])
    p.add_argument("--domain", required=True)
    p.add_argument("--pole", required=True)
    p.add_argument("--h", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--probe", default=None)
    p.set_defaults(run=_run_envelope_green)
    p = pe.add_parser("check", parents=[common])
    p.add_argument("--lemma", choices=("2.1", "2.2", "blocki"),
                   required=True)
    p.add_argument("--params", required=True)
    p.set_defaults(run=_run_envelope_check)

    po = sub.add_parser("orlicz", help="Luxemburg norms and collar "
                        "integrals").add_subparsers(dest="action",
                                                    required=True,
                                                    parser_class=_Parser)
    p = po.add_parser("norm", parents=[common])
    p.add_argument("--f", required=True, help="function spec JSON")
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--domain", default="hartogs:0.5")
    p.set_defaults(run=_run_orlicz_norm)
    p = po.add_parser("lemma41", parents=[common])
    p.add_argument("--s", type=float, default=0.5)
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--eps", required=True, help="comma-separated list")
    p.add_argument("--transition-eps", type=float, default=0.2)
    p.set_defaults(run=_run_orlicz_lemma41)

    pb = sub.add_parser("bergman", help="truncated kernels and sublevel "
                        "scans").add_subparsers(dest="action", required=True,
                                                parser_class=_Parser)
    p = pb.add_parser("kernel", parents=[common])
    p.add_argument("--domain", required=True, help="disk | annulus:r")
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--probe", default=None, help='"z,w"')
    p.set_defaults(run=_run_bergman_kernel)
    p = pb.add_parser("scan", parents=[common])
    p.add_argument("--domain", default="disk")
    p.add_argument("--M", type=int, default=None)
    p.add_argument("--pole", default="0")
    p.add_argument("--eps", default=None)
    p.add_argument("--r-fit", action="store_true")
    p.set_defaults(run=_run_bergman_scan)

    pch = sub.add_parser("chain", help="log-domain chain "
                         "recursion").add_subparsers(dest="action",
                                                     required=True,
                                                     parser_class=_Parser)
    p = pch.add_parser("run", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--lambda-target", type=float, required=True)
    p.add_argument("--L0", type=float, default=-1.0)
    p.add_argument("--c1", type=float, default=1.0)
    p.add_argument("--C-alpha", type=float, default=1.0)
    p.set_defaults(run=_run_chain_run)
    p = pch.add_parser("admissible", parents=[common])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.set_defaults(run=_run_chain_admissible)

    pv = sub.add_parser("verify", help="worked examples").add_subparsers(
        dest="action", required=True, parser_class=_Parser)
    p = pv.add_parser("example5", parents=[common])
    p.add_argument("--nmax", type=int, default=20)
    p.add_argument("--samples", type=int, default=16)
    p.set_defaults(run=_run_verify_example5)

    return top


def _config_digest(args, blobs):
    skip = {"run", "out", "dry_run"}
    conf = {k: v for k, v in sorted(vars(args).items()) if k not in skip}
    h = hashlib.sha256(dumps(conf).encode())
    for blob in blobs:
        h.update(blob)
    return h.hexdigest()


def dispatch(argv):
    """Parse and run one subcommand; returns the process exit code."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else 0
    blobs = []
    t0 = time.monotonic()
    manifest = {"argv": list(argv), "version": VERSION}
    try:
        np.random.default_rng(args.seed)   # reserved; all paths deterministic
        if args.dry_run:
            manifest["dry_run"] = True
            manifest["config_sha256"] = _config_digest(args, blobs)
            manifest["wall_time_s"] = time.monotonic() - t0
            sys.stderr.write(dumps(manifest) + "\n")
            return 0
        report, ok = args.run(args, blobs)
        text = report if isinstance(report, str) else emit(report,
                                                           args.format)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
        manifest["config_sha256"] = _config_digest(args, blobs)
        manifest["pass"] = bool(ok)
        manifest["wall_time_s"] = time.monotonic() - t0
        sys.stderr.write(dumps(manifest) + "\n")
        return 0 if ok else 2
    except UsageError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except ValueError as exc:
        sys.stderr.write("error: %s\n" % exc)
        return 1
    except KeyError as exc:
        sys.stderr.write("error: missing parameter %s\n" % exc)
        return 1
    except (AssertionError, RuntimeError) as exc:
        sys.stdout.write(dumps({"error": exc.__class__.__name__,
                                "detail": str(exc)}) + "\n")
        manifest["pass"] = False
        manifest["wall_time_s"] = time.monotonic() - t0
        sys.stderr.write(dumps(manifest) + "\n")
        return 2


def main():
    sys.exit(dispatch(sys.argv[1:]))


if __name__ == "__main__":
    main()
