"""``folcc`` command line: one subcommand per operation plus scenarios.

Every command prints a JSON report (schema ``folcc-report/1``, sorted keys);
``--csv`` prints a flat table instead.  Exit status is 0 on success, 1 when a
check fails and 2 on configuration or input errors.
"""

import argparse
import csv
import datetime
import json
import math
import sys

from . import __version__
from . import connections as cn
from . import dynamics as dyn
from . import frames as fr
from . import gf
from . import scenarios as sc
from . import szekeres as sz
from .errors import ConfigError, FolccError, ParseError

SCHEMA = sc.SCHEMA
EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def sanitize(obj):
    """JSON-safe copy: non-finite floats become ``"inf"``, ``"-inf"``, ``"nan"``."""
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    return obj


def dumps(report):
    return json.dumps(sanitize(report), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _report(command, result, **extra):
    out = {"schema": SCHEMA, "command": command, "result": result}
    out.update(extra)
    return out


def _write_csv(rows, stream):
    if not rows:
        return
    fields = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    w = csv.DictWriter(stream, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: sanitize(v) for k, v in r.items()})


# -- commands -------------------------------------------------------------------------
# Each returns (exit status, report, csv rows).


def cmd_gf_cohomology(args):
    flv = gf.flavor(args.flavor, args.max_index)
    degrees = [args.degree] if args.degree is not None else range(args.max_degree + 1)
    result, rows = {"flavor": str(flv), "degrees": {}}, []
    for d in degrees:
        groups = gf.cohomology_dim(flv, d, (args.weight_min, args.weight_max),
                                   representatives=True)
        result["degrees"][str(d)] = {str(w): g.to_json() for w, g in groups.items()}
        for w, g in groups.items():
            rows.append({"degree": d, "weight": w, "dim": g.dim,
                         "representatives": " ; ".join(gf.format_cochain(r)
                                                       for r in g.representatives)})
    if flv.kind == "duminy" and args.degree is None:
        result["total"] = gf.duminy_cohomology(flv.k).to_json()
    return EXIT_OK, _report("gf-cohomology", result), rows


def cmd_identities(args):
    rep = fr.structure_identities()
    ok = all(v["ok"] for v in rep.values())
    rows = [{"identity": k, "ok": v["ok"], "difference": v["difference"]}
            for k, v in sorted(rep.items())]
    return (EXIT_OK if ok else EXIT_FAIL), _report("identities", rep, passed=ok), rows


def _candidate_from_args(args, cfg, kind):
    charts = list(cfg.presentation.charts)
    if args.conjugacy:
        if kind != "affine":
            raise ConfigError("--conjugacy only builds affine candidates")
        return cn.connection_from_conjugacy(args.conjugacy, charts)
    if args.candidate:
        funcs = {}
        for item in args.candidate:
            chart, sep, text = item.partition("=")
            if not sep:
                funcs = {c: item for c in charts}
                break
            funcs[chart.strip()] = text
        return cn.ConnectionCandidate(kind, funcs)
    for check in cfg.checks:
        if check["kind"] == kind:
            if "conjugacy" in check:
                return cn.connection_from_conjugacy(check["conjugacy"], charts)
            if "candidate" in check:
                return cn.ConnectionCandidate(kind, check["candidate"])
    raise ConfigError(f"no {kind} candidate in the config; pass --candidate or --conjugacy")


def cmd_connection(args):
    cfg = sc.resolve(args.config)
    cand = _candidate_from_args(args, cfg, args.kind)
    tol = args.tol if args.tol is not None else cn.DEFAULT_TOL
    verify = (cn.verify_affine_connection if args.kind == "affine"
              else cn.verify_projective_connection)
    rep = verify(cfg.presentation, cand, args.samples, args.trim, tol)
    rows = [{"generator": g, "max_residual": r["max_residual"], "argmax": r["argmax"],
             "samples": r["samples"], "errors": len(r["errors"]), "passed": r["passed"]}
            for g, r in sorted(rep["generators"].items())]
    return (EXIT_OK if rep["passed"] else EXIT_FAIL), _report(
        "connection verify", rep, scenario=cfg.name, passed=rep["passed"]), rows


def cmd_gysin(args):
    form = fr.parse_form(args.form)
    image = fr.gysin(form)
    result = {"form": str(form), "image": str(image), "image_terms": image.to_json()}
    rows = [{"indices": " ".join(map(str, t["indices"])), "coefficient": t["coefficient"]}
            for t in image.to_json()]
    return EXIT_OK, _report("gysin", result), rows


def cmd_rotation(args):
    phi = sc.parse_map_spec(args.map, lift=True)
    est = dyn.rotation_number(phi, args.iters, args.seed_point, args.method)
    result = {"map": phi.describe(), "estimate": est.to_json()}
    status = EXIT_OK
    if args.alpha is not None:
        err = dyn.circle_distance(est.rho, sc.number(args.alpha))
        result["error"] = err
        result["passed"] = err <= (args.tol if args.tol is not None else est.bound)
        status = EXIT_OK if result["passed"] else EXIT_FAIL
    row = dict(est.to_json())
    row.update({k: result[k] for k in ("error", "passed") if k in result})
    return status, _report("rotation", result), [row]


def cmd_diophantine(args):
    rep = dyn.diophantine_exponent(args.alpha, args.cap, args.dps)
    rows = [w.to_json() for w in rep.witnesses]
    return EXIT_OK, _report("diophantine", rep.to_json()), rows


def cmd_szekeres(args):
    xs = [sc.number(v) for v in args.x]
    tol = args.tol if args.tol is not None else 1e-8
    result = {"field": args.field, "polynomials": {}, "identity": {}}
    rows, ok = [], True
    for n in range(1, args.n + 1):
        q = sz.q_polynomial(n)
        rep = sz.verify_szekeres_identity(args.field, n, xs, args.profile)
        result["polynomials"][str(n)] = q.to_json()
        result["identity"][str(n)] = rep
        ok &= rep["max_residual"] <= tol
        rows.append({"n": n, "Q": q.to_str(), "degree": q.degree,
                     "max_residual": rep["max_residual"]})
    result["passed"] = ok
    return (EXIT_OK if ok else EXIT_FAIL), _report("szekeres", result), rows


def cmd_reeb_probe(args):
    rep = dyn.reeb_probe(args.profile, args.nmax)
    summary = sc.reeb_summary(rep)
    result = rep.to_json()
    result["summary"] = summary
    rows = []
    for r in rep.rows + rep.tail:
        rows.append({"n": r["n"], "x0n": r["x0n"], "f": r["f"],
                     "ratio2": r["ratios"]["2"], "ratio3": r["ratios"]["3"],
                     "ratio4": r["ratios"]["4"], "ln_fprime": r["ln_fprime"],
                     "ln_fprime_over_f": r["ln_fprime_over_f"]})
    ok = all(summary.values())
    return (EXIT_OK if ok else EXIT_FAIL), _report("reeb-probe", result, passed=ok), rows


def cmd_fixed_points(args):
    phi = sc.parse_map_spec(args.map, domain=args.domain)
    tol = args.tol if args.tol is not None else 1e-9
    pts = dyn.classify_fixed_points(phi, tol=tol)
    result = {"map": phi.describe(), "fixed_points": [p.to_json() for p in pts]}
    rows = [{"point": p.point, "derivative": p.derivative, "class": p.kind,
             "semi_isolated": p.semi_isolated} for p in pts]
    return EXIT_OK, _report("fixed-points", result), rows


def cmd_scenario(args):
    cfg = sc.resolve(args.name)
    kinds = set(args.only) if args.only else None
    status, rep = sc.run_scenario(cfg, seed=args.seed, tol=args.tol, jet_order=args.jet_order,
                                  kinds=kinds)
    output = args.output or cfg.output
    if output:
        with open(output, "w") as fh:
            fh.write(dumps(rep))
        meta = {"schema": SCHEMA, "report": output,
                "generated": datetime.datetime.now(datetime.timezone.utc).isoformat()}
        with open(output + ".meta.json", "w") as fh:
            fh.write(dumps(meta))
    rows = [{"check": c["name"], "kind": c["kind"], "passed": c["passed"]}
            for c in rep["checks"]]
    return status, rep, rows


def cmd_list_scenarios(args):
    items = []
    for name in sc.builtin_names():
        cfg = sc.load_builtin(name)
        items.append({"name": name, "description": cfg.description,
                      "checks": [c["kind"] for c in cfg.checks]})
    rows = [{"name": i["name"], "description": i["description"]} for i in items]
    return EXIT_OK, _report("list-scenarios", items), rows


# -- parser ---------------------------------------------------------------------------


def _add_common(p, suppress):
    def default(v):
        return argparse.SUPPRESS if suppress else v

    g = p.add_argument_group("global options")
    fmt = g.add_mutually_exclusive_group()
    fmt.add_argument("--json", action="store_true", default=default(False),
                     help="emit the JSON report (default)")
    fmt.add_argument("--csv", action="store_true", default=default(False),
                     help="emit a flat CSV table")
    g.add_argument("--tol", type=float, default=default(None), help="override check tolerances")
    g.add_argument("--seed", type=int, default=default(None), help="seed for randomized checks")
    g.add_argument("--jet-order", type=int, default=default(None),
                   help="jet order for randomized invariance checks")


def build_parser():
    parser = argparse.ArgumentParser(prog="folcc", description=(
        "Characteristic classes of codimension-one foliations: formal vector field "
        "cohomology, canonical forms, connection cocycles and circle dynamics."))
    parser.add_argument("--version", action="version", version=f"folcc {__version__}")
    _add_common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_text):
        p = sub.add_parser(name, help=help_text, description=help_text)
        _add_common(p, suppress=True)
        p.set_defaults(func=func)
        return p

    p = add("gf-cohomology", cmd_gf_cohomology, "cohomology of the formal vector field complex")
    p.add_argument("--flavor", default="full",
                   help="full, o1, gl1, duminy or duminy(K) (default full)")
    p.add_argument("--degree", type=int, help="single degree (default: 0..--max-degree)")
    p.add_argument("--max-degree", type=int, default=5)
    p.add_argument("--weight-min", type=int, default=-2)
    p.add_argument("--weight-max", type=int, default=6)
    p.add_argument("--max-index", type=int, help="K for the duminy flavor")

    add("identities", cmd_identities, "exact structure identities of the canonical forms")

    p = add("connection", None, "transverse connection cocycles")
    csub = p.add_subparsers(dest="action", required=True, metavar="ACTION")
    v = csub.add_parser("verify", help="verify a candidate over a presentation")
    _add_common(v, suppress=True)
    v.set_defaults(func=cmd_connection)
    v.add_argument("--config", required=True, help="scenario TOML file or built-in name")
    v.add_argument("--kind", choices=("affine", "projective"), default="affine")
    v.add_argument("--candidate", action="append",
                   help="CHART=EXPR (repeatable) or EXPR for every chart")
    v.add_argument("--conjugacy", help="build T = f''/f' from this conjugacy")
    v.add_argument("--samples", type=int, default=cn.DEFAULT_SAMPLES)
    v.add_argument("--trim", type=float, default=cn.DEFAULT_TRIM)

    p = add("gysin", cmd_gysin, "integrate an x-chart form over the x1 fiber")
    p.add_argument("--form", required=True, help='e.g. "x1*dx1^dx0", "gvl"')

    p = add("rotation", cmd_rotation, "rotation number of a circle map lift")
    p.add_argument("--map", required=True, help="map spec, e.g. 'conj: x + 0.1*sin(2*pi*x) | 0.3'")
    p.add_argument("--iters", type=int, default=100000)
    p.add_argument("--method", choices=("auto", "iterate"), default="auto")
    p.add_argument("--seed-point", type=float, default=0.0)
    p.add_argument("--alpha", help="expected rotation number (adds a pass/fail verdict)")

    p = add("diophantine", cmd_diophantine, "empirical Diophantine exponent")
    p.add_argument("--alpha", required=True, help="expression, e.g. '(sqrt(5)-1)/2'")
    p.add_argument("--cap", type=int, default=10**6, help="denominator cap")
    p.add_argument("--dps", type=int, default=60, help="working decimal digits")

    p = add("szekeres", cmd_szekeres, "Q_n polynomials and the field identity")
    p.add_argument("--field", required=True, help="vector field v(x)")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--profile", help="closed-form f with f' = 1/v (optional oracle)")
    p.add_argument("--x", nargs="+", default=["0.1", "0.2", "0.5"], help="sample points")

    p = add("reeb-probe", cmd_reeb_probe, "derivative ratios of a Reeb profile along f^-1(n)")
    p.add_argument("--profile", default=dyn.REEB_PROFILE)
    p.add_argument("--nmax", type=int, default=12)

    p = add("fixed-points", cmd_fixed_points, "locate and classify fixed points")
    p.add_argument("--map", required=True, help="map spec")
    p.add_argument("--domain", nargs=2, metavar=("LO", "HI"), help="domain of an expr map")

    p = add("scenario", cmd_scenario, "run a built-in scenario or a TOML file")
    p.add_argument("name", help="built-in name or path ending in .toml")
    p.add_argument("--output", help="also write the report here (timestamp goes to .meta.json)")
    p.add_argument("--only", action="append", help="run only checks of this kind")

    add("list-scenarios", cmd_list_scenarios, "list the built-in scenarios")
    return parser


def _error(kind, exc):
    return {"schema": SCHEMA, "error": {"type": kind, "message": str(exc)}}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        status, report, rows = args.func(args)
    except (ConfigError, ParseError, ValueError) as exc:
        sys.stderr.write(dumps(_error(type(exc).__name__, exc)))
        return EXIT_CONFIG
    except FolccError as exc:
        sys.stderr.write(dumps(_error(type(exc).__name__, exc)))
        return EXIT_FAIL
    if args.csv:
        _write_csv(rows, sys.stdout)
    else:
        sys.stdout.write(dumps(report))
    return status


if __name__ == "__main__":
    sys.exit(main())
